//! Random instance generation and the exhaustive oracle.

use bcs_core::{Assignment, BoolSystem, Monomial, Poly, VarId, MAX_VARS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Shape of a random Boolean system. Each polynomial includes every
/// monomial of degree 1..=degree independently with probability `density`;
/// the constant term is fixed by the planted solution when `planted` is
/// set, and drawn like any other monomial otherwise.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub m: usize,
    pub degree: usize,
    pub density: f64,
    pub planted: bool,
    pub seed: u64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec { n: 12, m: 12, degree: 2, density: 0.5, planted: true, seed: 0 }
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n < 1 || self.n > MAX_VARS {
            return Err(HarnessError::Input(format!("n = {} outside 1..={MAX_VARS}", self.n)));
        }
        if self.m < 1 {
            return Err(HarnessError::Input("m must be at least 1".into()));
        }
        if self.degree < 1 || self.degree > self.n {
            return Err(HarnessError::Input(format!(
                "degree = {} outside 1..={}",
                self.degree, self.n
            )));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(HarnessError::Input(format!(
                "density = {} outside (0, 1]",
                self.density
            )));
        }
        Ok(())
    }
}

/// All monomials of degree 1..=degree over x1..xn, in ascending (degree,
/// lex-by-variable-tuple) order. This is the Bernoulli draw order, so it is
/// part of the generator's determinism contract.
fn monomial_universe(n: usize, degree: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for deg in 1..=degree {
        let mut combo: Vec<usize> = (1..=deg).collect();
        loop {
            out.push(Monomial::from_vars(combo.iter().map(|&v| VarId::new(v))));
            // advance the combination lexicographically
            let mut at = deg;
            while at > 0 && combo[at - 1] == n - (deg - at) {
                at -= 1;
            }
            if at == 0 {
                break;
            }
            combo[at - 1] += 1;
            for k in at..deg {
                combo[k] = combo[k - 1] + 1;
            }
        }
    }
    out
}

/// Draws a random system; returns the planted solution alongside when the
/// spec plants one. Deterministic given `spec.seed`: the planted assignment
/// is drawn first (one bool per variable), then each polynomial draws its
/// monomials in `monomial_universe` order (preceded by the constant-term
/// draw in non-planted mode).
pub fn gen_random_system(
    spec: &InstanceSpec,
) -> Result<(BoolSystem, Option<Assignment>), HarnessError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let planted = if spec.planted {
        let mut bits = 0u128;
        for i in 0..spec.n {
            if rng.random::<bool>() {
                bits |= 1u128 << i;
            }
        }
        Some(Assignment::new(bits, spec.n))
    } else {
        None
    };

    let universe = monomial_universe(spec.n, spec.degree);
    let mut polys = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        let mut terms: Vec<Monomial> = Vec::new();
        let mut constant = match planted {
            None => rng.random::<f64>() < spec.density,
            Some(_) => false,
        };
        for &mono in &universe {
            if rng.random::<f64>() < spec.density {
                terms.push(mono);
            }
        }
        if let Some(s) = &planted {
            // parity of the drawn terms at s*; the constant cancels it
            constant = terms
                .iter()
                .filter(|m| m.satisfied_by(s.bits()))
                .count()
                % 2
                == 1;
        }
        if constant {
            terms.push(Monomial::ONE);
        }
        polys.push(Poly::from_monomials(terms));
    }

    let system = BoolSystem::new(spec.n, polys)?;
    if let Some(s) = &planted {
        debug_assert!(system.satisfied_by(s));
    }
    Ok((system, planted))
}

/// Maximum width the exhaustive oracle will enumerate.
pub const BRUTE_FORCE_MAX_N: usize = 24;

/// Enumerates all 2^n assignments and keeps the zeros of every polynomial,
/// in ascending bit order.
pub fn brute_force_solve(system: &BoolSystem) -> Result<Vec<Assignment>, HarnessError> {
    let n = system.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(HarnessError::Input(format!(
            "brute force refuses n = {n} > {BRUTE_FORCE_MAX_N}"
        )));
    }
    let mut out = Vec::new();
    for bits in 0..1u128 << n {
        let a = Assignment::new(bits, n);
        if system.satisfied_by(&a) {
            out.push(a);
        }
    }
    Ok(out)
}
