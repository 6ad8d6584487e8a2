use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ratexpr::RationalExpr;
use super::rational::Rational;
use super::table::{same_table, Sym};
use crate::error::{Error, Result};

/// Default number of sample points for sampled equality.
pub const DEFAULT_POINTS: usize = 8;
/// Bound on numerators and denominators of sampled coordinates.
pub const SAMPLE_BOUND: i64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum IdentityMode {
    Symbolic,
    Sampled { seed: u64, points: usize },
}

impl IdentityMode {
    pub fn sampled(seed: u64) -> IdentityMode {
        IdentityMode::Sampled { seed, points: DEFAULT_POINTS }
    }
}

pub fn is_identically_equal(a: &RationalExpr, b: &RationalExpr, mode: IdentityMode) -> Result<bool> {
    if !same_table(a.table(), b.table()) {
        return Err(Error::TableMismatch);
    }
    match mode {
        IdentityMode::Symbolic => a.equals(b),
        IdentityMode::Sampled { seed, points } => {
            let mut syms = a.symbols();
            syms.extend(b.symbols());
            syms.sort();
            syms.dedup();
            let mut sampler = PointSampler::new(seed, syms);
            let pts = sampler.points(points, |pt| {
                let val = |s: Sym| Some(lookup(pt, s));
                !a.den().evaluate(val).map(|v| v.is_zero()).unwrap_or(true)
                    && !b.den().evaluate(val).map(|v| v.is_zero()).unwrap_or(true)
            })?;
            for pt in &pts {
                let val = |s: Sym| Some(lookup(pt, s));
                if a.evaluate(val)? != b.evaluate(val)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

fn lookup(pt: &[(Sym, Rational)], s: Sym) -> Rational {
    pt.iter().find(|(k, _)| *k == s).map(|(_, v)| v.clone()).unwrap_or_else(Rational::zero)
}

/// Deterministic generator of random rational points.
pub struct PointSampler {
    rng: ChaCha8Rng,
    syms: Vec<Sym>,
}

impl PointSampler {
    pub fn new(seed: u64, syms: Vec<Sym>) -> PointSampler {
        PointSampler { rng: ChaCha8Rng::seed_from_u64(seed), syms }
    }

    pub fn rational(&mut self) -> Rational {
        let n = self.rng.gen_range(-SAMPLE_BOUND..=SAMPLE_BOUND);
        let d = self.rng.gen_range(1..=SAMPLE_BOUND);
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    pub fn point(&mut self) -> Vec<(Sym, Rational)> {
        let syms = self.syms.clone();
        syms.into_iter().map(|s| (s, self.rational())).collect()
    }

    /// Draws `n` points accepted by `valid`, giving up after a bounded number of tries.
    pub fn points(
        &mut self,
        n: usize,
        valid: impl Fn(&[(Sym, Rational)]) -> bool,
    ) -> Result<Vec<Vec<(Sym, Rational)>>> {
        let max_tries = 20 * n + 20;
        let mut out = Vec::with_capacity(n);
        let mut tries = 0;
        while out.len() < n {
            if tries >= max_tries {
                return Err(Error::SamplingFailed { wanted: n, tries });
            }
            tries += 1;
            let p = self.point();
            if valid(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }
}
