//! Variable orderings and frequency-spectrum features.
//!
//! An ordering σ = (x_{i1} ≺ x_{i2} ≺ … ≺ x_{in}) is stored as the renaming
//! permutation with perm[i] = new index of original variable i. Applying σ to
//! a system renames its variables; the solver then eliminates in its fixed
//! internal order x1 ≺ … ≺ xn, which realizes σ without touching solver code.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::anf::{VarId, MAX_VARS};
use crate::error::CoreError;
use crate::system::BoolSystem;

/// Permutation of [1..n], serialized as a JSON array of 1-based indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VarOrder {
    perm: Vec<u32>, // perm[bit] = 0-based new bit position
}

impl VarOrder {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_VARS, "ordering width {n} exceeds {MAX_VARS}");
        VarOrder { perm: (0..n as u32).collect() }
    }

    /// Validates that `perm` is a bijection on 1..=len.
    pub fn from_one_based(perm: &[usize]) -> Result<Self, CoreError> {
        let n = perm.len();
        if n > MAX_VARS {
            return Err(CoreError::BadPermutation {
                n,
                reason: format!("length {n} exceeds the supported maximum {MAX_VARS}"),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p == 0 || p > n {
                return Err(CoreError::BadPermutation {
                    n,
                    reason: format!("entry {p} outside 1..={n}"),
                });
            }
            if seen[p - 1] {
                return Err(CoreError::BadPermutation {
                    n,
                    reason: format!("entry {p} repeated"),
                });
            }
            seen[p - 1] = true;
        }
        Ok(VarOrder { perm: perm.iter().map(|&p| (p - 1) as u32).collect() })
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.perm.iter().map(|&p| p as usize + 1).collect()
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i as u32 == p)
    }

    /// New identity of `v` after renaming.
    pub fn map(&self, v: VarId) -> VarId {
        VarId::new(self.perm[v.bit() as usize] as usize + 1)
    }

    /// 0-based elimination position of `v`; higher rank means eliminated
    /// later, i.e. greater under σ.
    pub fn rank(&self, v: VarId) -> usize {
        self.perm[v.bit() as usize] as usize
    }

    pub(crate) fn rename_mask(&self, mask: u128) -> u128 {
        let mut out = 0u128;
        let mut rest = mask;
        while rest != 0 {
            let b = rest.trailing_zeros();
            rest &= rest - 1;
            out |= 1u128 << self.perm[b as usize];
        }
        out
    }

    pub fn inverse(&self) -> VarOrder {
        let mut inv = vec![0u32; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p as usize] = i as u32;
        }
        VarOrder { perm: inv }
    }

    /// Reads a solution of the renamed system back as a solution of the
    /// original: original variable i takes the bit at position perm[i].
    pub fn pull_back_bits(&self, bits: u128) -> u128 {
        let mut out = 0u128;
        for (i, &p) in self.perm.iter().enumerate() {
            if bits >> p & 1 == 1 {
                out |= 1u128 << i;
            }
        }
        out
    }

    /// Uniform over Sₙ via seeded Fisher-Yates.
    pub fn random(n: usize, seed: u64) -> VarOrder {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        VarOrder::random_with(&mut rng, n)
    }

    pub fn random_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> VarOrder {
        assert!(n <= MAX_VARS, "ordering width {n} exceeds {MAX_VARS}");
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(rng);
        VarOrder { perm }
    }

    /// Transposes positions i and j (1-based, i < j).
    pub fn swapped(&self, i: usize, j: usize) -> Result<VarOrder, CoreError> {
        let n = self.perm.len();
        if i == 0 || j == 0 || i >= j || j > n {
            return Err(CoreError::BadSwap { i, j, n });
        }
        let mut perm = self.perm.clone();
        perm.swap(i - 1, j - 1);
        Ok(VarOrder { perm })
    }
}

impl Serialize for VarOrder {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.perm.iter().map(|&p| p as u64 + 1))
    }
}

impl<'de> Deserialize<'de> for VarOrder {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let one_based = Vec::<usize>::deserialize(deserializer)?;
        VarOrder::from_one_based(&one_based).map_err(D::Error::custom)
    }
}

/// Normalized per-variable occurrence vector of a system: entry i is the
/// share of monomials (across all polynomials, with multiplicity per
/// polynomial) whose support contains x_{i+1}. All-zero when the system has
/// no variable occurrences.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum {
    freq: Vec<f64>,
}

impl Spectrum {
    pub fn of(system: &BoolSystem) -> Spectrum {
        let mut counts = vec![0u64; system.n()];
        for poly in system.polys() {
            for m in poly.terms() {
                for v in m.vars() {
                    counts[v.index() - 1] += 1;
                }
            }
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Spectrum { freq: vec![0.0; system.n()] };
        }
        Spectrum {
            freq: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        }
    }

    /// Wraps a raw feature vector without the occurrence-count provenance;
    /// used for synthetic predictor inputs.
    pub fn from_raw(freq: Vec<f64>) -> Spectrum {
        Spectrum { freq }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.freq
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    /// Pushes the entries through σ: the renamed variable σ(i) inherits the
    /// frequency of i.
    pub fn permuted(&self, order: &VarOrder) -> Spectrum {
        assert_eq!(order.n(), self.freq.len());
        let mut out = vec![0.0; self.freq.len()];
        for (i, &f) in self.freq.iter().enumerate() {
            out[order.rank(VarId::new(i + 1))] = f;
        }
        Spectrum { freq: out }
    }
}
