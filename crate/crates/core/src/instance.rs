//! Seeded test-instance generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::toeplitz::{vandermonde_synthesize, FourierFactor, SymToeplitz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// k frequencies on the grid j/d.
    Circulant,
    /// k clusters of 2 or 3 frequencies inside one bucket each.
    Clustered,
    /// k uniform frequencies in (0, 1/2).
    RandomVandermonde,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circulant" => Ok(Family::Circulant),
            "clustered" => Ok(Family::Clustered),
            "random-vandermonde" => Ok(Family::RandomVandermonde),
            _ => Err(Error::InvalidConfig(format!("unknown family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub d: usize,
    pub k: usize,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub matrix: SymToeplitz,
    /// Generating factor; the matrix equals its synthesis when `sigma == 0`.
    pub factor: FourierFactor,
}

impl Instance {
    pub fn is_exact(&self) -> bool {
        self.matrix == vandermonde_synthesize(&self.factor)
    }
}

/// Build an instance. Weights are uniform in [0.5, 1.5]; noise adds
/// `sigma ||T||_F / d * N(0, 1)` independently to every lag.
pub fn gen_instance(spec: &InstanceSpec) -> Result<Instance> {
    let d = spec.d;
    if d < 4 {
        return Err(Error::InvalidConfig("instances need d >= 4".into()));
    }
    if !(spec.sigma >= 0.0) {
        return Err(Error::InvalidConfig("noise level must be >= 0".into()));
    }
    let df = d as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    match spec.family {
        Family::Circulant => {
            let avail = (d - 1) / 2;
            if spec.k > avail {
                return Err(Error::InvalidConfig(format!("at most {avail} grid frequencies for d = {d}")));
            }
            for j in sample(&mut rng, avail, spec.k).into_iter() {
                pairs.push(((j + 1) as f64 / df, rng.random_range(0.5..1.5)));
            }
        }
        Family::Clustered => {
            // bucket j covers [(j-1)/d, j/d); keep clear of both ends of (0, 1/2)
            let avail = (d / 2).saturating_sub(2);
            if spec.k > avail {
                return Err(Error::InvalidConfig(format!("at most {avail} clusters for d = {d}")));
            }
            for j in sample(&mut rng, avail, spec.k).into_iter() {
                let center = (2 * (j + 2) - 1) as f64 / (2.0 * df);
                let n = rng.random_range(2..=3);
                for _ in 0..n {
                    let off = rng.random_range(-0.499..0.499) / df;
                    pairs.push((center + off, rng.random_range(0.5..1.5)));
                }
            }
        }
        Family::RandomVandermonde => {
            for _ in 0..spec.k {
                pairs.push((rng.random_range(1e-6..0.5 - 1e-6), rng.random_range(0.5..1.5)));
            }
        }
    }
    let factor = FourierFactor::from_pairs(d, &pairs, 0.0)?;
    let clean = vandermonde_synthesize(&factor);
    let matrix = if spec.sigma > 0.0 {
        let s = spec.sigma * clean.frobenius_norm() / df;
        let col = clean
            .first_column()
            .iter()
            .map(|x| x + s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        SymToeplitz::new(col)?
    } else {
        clean
    };
    Ok(Instance { matrix, factor })
}
