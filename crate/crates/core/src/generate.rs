//! Seeded instance generators.
//!
//! Spec strings look like `family:dims[:key=value]...`, e.g.
//! `identity-cube:5`, `gaussian-dense:200x10:seed=7`,
//! `sparse-bernoulli:10000x20:density=0.01:seed=1`, `scaled-cube:4:scale=3`,
//! `rotated-diamond:seed=2`. `dims` is either `n` (square) or `mxn`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::PolytopeInstance;

/// Attempts before giving up on a family that can produce rank-deficient draws.
pub const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorFamily {
    IdentityCube,
    ScaledCube,
    RotatedDiamond,
    GaussianDense,
    SparseBernoulli,
}

impl GeneratorFamily {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorFamily::IdentityCube => "identity-cube",
            GeneratorFamily::ScaledCube => "scaled-cube",
            GeneratorFamily::RotatedDiamond => "rotated-diamond",
            GeneratorFamily::GaussianDense => "gaussian-dense",
            GeneratorFamily::SparseBernoulli => "sparse-bernoulli",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            GeneratorFamily::IdentityCube,
            GeneratorFamily::ScaledCube,
            GeneratorFamily::RotatedDiamond,
            GeneratorFamily::GaussianDense,
            GeneratorFamily::SparseBernoulli,
        ]
        .into_iter()
        .find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub family: GeneratorFamily,
    pub m: usize,
    pub n: usize,
    /// Entry probability for `sparse-bernoulli`.
    pub density: f64,
    /// Diagonal value for `scaled-cube`.
    pub scale: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: GeneratorFamily, m: usize, n: usize) -> Self {
        GeneratorSpec { family, m, n, density: 0.1, scale: 2.0, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < self.n {
            return Err(Error::Dimension(format!("need m >= n >= 1, got {}x{}", self.m, self.n)));
        }
        match self.family {
            GeneratorFamily::IdentityCube | GeneratorFamily::ScaledCube if self.m != self.n => {
                Err(Error::Dimension(format!("{} is square, got {}x{}", self.family.name(), self.m, self.n)))
            }
            GeneratorFamily::RotatedDiamond if (self.m, self.n) != (4, 2) => {
                Err(Error::Dimension("rotated-diamond is always 4x2".into()))
            }
            GeneratorFamily::ScaledCube if !(self.scale.is_finite() && self.scale != 0.0) => {
                Err(Error::Domain(format!("scale must be finite and nonzero, got {}", self.scale)))
            }
            GeneratorFamily::SparseBernoulli if !(self.density > 0.0 && self.density <= 1.0) => {
                Err(Error::Domain(format!("density must lie in (0, 1], got {}", self.density)))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    /// Canonical form; parses back to an equal spec.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}x{}", self.family.name(), self.m, self.n)?;
        match self.family {
            GeneratorFamily::ScaledCube => write!(f, ":scale={:e}", self.scale)?,
            GeneratorFamily::SparseBernoulli => write!(f, ":density={:e}", self.density)?,
            _ => {}
        }
        write!(f, ":seed={}", self.seed)
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::parse(1, msg);
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let family =
            GeneratorFamily::from_name(name).ok_or_else(|| bad(format!("unknown generator family {name:?}")))?;
        let mut spec = GeneratorSpec::new(family, 0, 0);
        let mut have_dims = false;
        if family == GeneratorFamily::RotatedDiamond {
            (spec.m, spec.n, have_dims) = (4, 2, true);
        }
        for part in parts {
            if let Some((key, value)) = part.split_once('=') {
                match key {
                    "seed" => spec.seed = value.parse().map_err(|_| bad(format!("bad seed {value:?}")))?,
                    "density" => spec.density = value.parse().map_err(|_| bad(format!("bad density {value:?}")))?,
                    "scale" => spec.scale = value.parse().map_err(|_| bad(format!("bad scale {value:?}")))?,
                    _ => return Err(bad(format!("unknown generator option {key:?}"))),
                }
            } else {
                let (m, n) = match part.split_once('x') {
                    Some((m, n)) => (m, n),
                    None => (part, part),
                };
                spec.m = m.parse().map_err(|_| bad(format!("bad dimensions {part:?}")))?;
                spec.n = n.parse().map_err(|_| bad(format!("bad dimensions {part:?}")))?;
                have_dims = true;
            }
        }
        if !have_dims {
            return Err(bad(format!("{name} needs dimensions")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Builds the instance described by `spec`. Identical specs give identical instances.
pub fn generate(spec: &GeneratorSpec) -> Result<PolytopeInstance> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    match spec.family {
        GeneratorFamily::IdentityCube => PolytopeInstance::identity(n),
        GeneratorFamily::ScaledCube => PolytopeInstance::scaled_identity(n, spec.scale),
        GeneratorFamily::RotatedDiamond => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (s, c) = angle.sin_cos();
            let rows: Vec<[f64; 2]> = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]
                .iter()
                .map(|[x, y]| [c * x - s * y, s * x + c * y])
                .collect();
            PolytopeInstance::from_rows(&rows)
        }
        GeneratorFamily::GaussianDense => retry(spec.seed, |rng| {
            let data = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
            PolytopeInstance::from_dense(m, n, data)
        }),
        GeneratorFamily::SparseBernoulli => retry(spec.seed, |rng| {
            // All-zero rows are vacuous constraints and are left out, so the
            // instance may have fewer than m rows.
            let mut triplets = Vec::new();
            let mut rows = 0usize;
            for _ in 0..m {
                let before = triplets.len();
                for j in 0..n {
                    if rng.random_bool(spec.density) {
                        let v: f64 = rng.sample(StandardNormal);
                        triplets.push((rows, j, v));
                    }
                }
                if triplets.len() > before {
                    rows += 1;
                }
            }
            PolytopeInstance::from_triplets(rows, n, triplets)
        }),
    }
}

fn retry(seed: u64, mut draw: impl FnMut(&mut ChaCha8Rng) -> Result<PolytopeInstance>) -> Result<PolytopeInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        match draw(&mut rng) {
            Ok(inst) => return Ok(inst),
            Err(Error::RankDeficient { .. } | Error::ZeroRow(_) | Error::Dimension(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed(MAX_ATTEMPTS))
}
