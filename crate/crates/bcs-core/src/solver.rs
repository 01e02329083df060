//! The instrumented characteristic-set solver.
//!
//! The engine is the zero-decomposition identity: writing a chosen
//! polynomial as p = I·x_c + U with x_c its class variable,
//!
//!   Zero(P ∪ {p}) = Zero(P ∪ {x_c + U, I + 1}) ⊔ Zero(P ∪ {I, U})
//!
//! where the first branch asserts I = 1 and eliminates x_c by substitution
//! and the second asserts I = 0, U = 0. The union is disjoint because the
//! branches force opposite values of I. Recursion bottoms out in
//! contradictions or triangular sets (monic relations x_c = U with strictly
//! decreasing heads), whose solutions are enumerated by expanding free
//! variables and back-substituting.
//!
//! Every step is metered: node and leaf counts, per-depth branching maxima,
//! and a term-operation tally, so a solve doubles as a deterministic cost
//! measurement for ordering experiments.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anf::{Assignment, Poly, VarId};
use crate::error::CoreError;
use crate::order::VarOrder;
use crate::system::BoolSystem;

/// Default solution cap: 2^20.
pub const DEFAULT_CAP: usize = 1 << 20;

/// Monic relations x_c = U with strictly decreasing heads; every variable of
/// a U lies below its head, so ascending back-substitution is well defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangularSet {
    /// (head, U) pairs sorted by decreasing head.
    pub relations: Vec<(VarId, Poly)>,
    /// Ascending variables not determined by any relation.
    pub free_vars: Vec<VarId>,
}

impl TriangularSet {
    fn assemble(mut relations: Vec<(VarId, Poly)>, n: usize) -> Self {
        relations.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        debug_assert!(relations.windows(2).all(|w| w[0].0 > w[1].0));
        let mut is_head = vec![false; n];
        for (head, _) in &relations {
            is_head[head.index() - 1] = true;
        }
        let free_vars = (1..=n)
            .filter(|&i| !is_head[i - 1])
            .map(VarId::new)
            .collect();
        TriangularSet { relations, free_vars }
    }

    /// Expands free variables in ascending binary-counter order and
    /// back-substitutes. Returns true if `cap` cut the enumeration short.
    fn enumerate_into(&self, n: usize, cap: usize, out: &mut Vec<Assignment>) -> bool {
        let k = self.free_vars.len();
        let mut counter: u128 = 0;
        loop {
            if out.len() >= cap {
                return true;
            }
            let mut bits = 0u128;
            for (t, v) in self.free_vars.iter().enumerate() {
                if counter >> t & 1 == 1 {
                    bits |= 1u128 << (v.index() - 1);
                }
            }
            // Ascending heads: each U only mentions variables already fixed.
            for (head, u) in self.relations.iter().rev() {
                if u.eval_bits(bits) {
                    bits |= 1u128 << (head.index() - 1);
                }
            }
            out.push(Assignment::new(bits, n));
            counter += 1;
            if k < 128 && counter == 1u128 << k {
                return false;
            }
        }
    }

    /// Number of solutions the set expands to: 2^(free variable count).
    pub fn solution_count(&self) -> u128 {
        1u128 << self.free_vars.len().min(127)
    }
}

/// Deterministic work measurements for one solve. `wall_ms` is the only
/// machine-dependent field and is excluded from reproducibility comparisons.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostMeter {
    /// Work-stack pops, i.e. decomposition-tree nodes visited.
    pub node_count: u64,
    /// Contradiction and triangular leaves reached.
    pub leaf_count: u64,
    /// Maximum branching factor observed at each depth; entries are 1 or 2.
    pub branch_max: Vec<u8>,
    /// Term-level operation tally accumulated from substitution and split
    /// sizes; a deterministic proxy for algebraic work.
    pub op_count: u64,
    pub wall_ms: f64,
}

impl CostMeter {
    /// Product of per-depth branching maxima, the upper bound on leaf_count.
    pub fn branch_product(&self) -> f64 {
        self.branch_max.iter().map(|&b| b as f64).product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub triangular_sets: Vec<TriangularSet>,
    /// Solutions in deterministic enumeration order, possibly truncated.
    pub solutions: Vec<Assignment>,
    pub truncated: bool,
    pub cost: CostMeter,
}

/// Mutable state of one decomposition node: the polynomials still to satisfy
/// and the monic relations already extracted on the path to it.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkState {
    pub active: Vec<Poly>,
    pub relations: Vec<(VarId, Poly)>,
}

impl WorkState {
    pub fn new(polys: Vec<Poly>) -> Self {
        WorkState { active: polys, relations: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Simplified {
    Consistent(WorkState),
    Contradiction,
}

/// Fixpoint cleanup of a work state: drops zeros, detects the constant 1,
/// and repeatedly extracts monic polynomials x_c + U as relations,
/// substituting x_c := U into the remaining active set. Returns the
/// simplified state (sorted and deduplicated, so the pass is idempotent)
/// together with the term-operation tally.
pub fn simplify(mut state: WorkState) -> (Simplified, u64) {
    let mut ops = 0u64;
    loop {
        state.active.retain(|p| !p.is_zero());
        if state.active.iter().any(|p| p.is_one()) {
            return (Simplified::Contradiction, ops);
        }
        state.active.sort_unstable();
        state.active.dedup();

        let monic_at = state.active.iter().position(|p| monic_head(p).is_some());
        let Some(idx) = monic_at else {
            return (Simplified::Consistent(state), ops);
        };
        let p = state.active.remove(idx);
        let xc = monic_head(&p).unwrap();
        let (_one, u) = p.split_on(xc);
        ops += p.term_count() as u64;
        for q in &mut state.active {
            if q.contains_var(xc) {
                ops += q.term_count() as u64 * (1 + u.term_count() as u64);
                *q = q.substitute(xc, &u);
            }
        }
        state.relations.push((xc, u));
    }
}

/// Some(x_c) when p is monic in its class variable: the only term containing
/// x_c is the bare x_c itself, so p = x_c + U is a ready relation.
fn monic_head(p: &Poly) -> Option<VarId> {
    let xc = p.max_var()?;
    let mut head_terms = p.terms().iter().filter(|m| m.contains(xc));
    match (head_terms.next(), head_terms.next()) {
        (Some(m), None) if m.degree() == 1 => Some(xc),
        _ => None,
    }
}

/// One application of the zero-decomposition identity to `p` under `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposeStep {
    pub x_c: VarId,
    /// Constraints asserting I = 1: {x_c + U, I + 1}, zero members dropped.
    pub branch_a: Vec<Poly>,
    /// Constraints asserting I = 0: {I, U}; pruned (None) when I is
    /// syntactically 1, since Zero(1, ·) is empty.
    pub branch_b: Option<Vec<Poly>>,
}

pub fn decompose_step(p: &Poly, order: &VarOrder) -> Result<DecomposeStep, CoreError> {
    let (x_c, i, u) = p.leading_split(order)?;
    let monic = Poly::var(x_c).add(&u);
    if i.is_one() {
        return Ok(DecomposeStep { x_c, branch_a: vec![monic], branch_b: None });
    }
    let i_plus_1 = i.add(&Poly::one());
    let mut branch_a = vec![monic];
    if !i_plus_1.is_zero() {
        branch_a.push(i_plus_1);
    }
    let mut branch_b = Vec::new();
    if !i.is_zero() {
        branch_b.push(i.clone());
    }
    if !u.is_zero() {
        branch_b.push(u);
    }
    Ok(DecomposeStep { x_c, branch_a, branch_b: Some(branch_b) })
}

/// Target choice at a node: greatest class variable first, then fewest
/// terms, then the canonical term-sequence order.
fn select_target(active: &[Poly]) -> usize {
    (0..active.len())
        .min_by(|&a, &b| {
            let (pa, pb) = (&active[a], &active[b]);
            pb.max_var()
                .cmp(&pa.max_var())
                .then(pa.term_count().cmp(&pb.term_count()))
                .then(pa.cmp(pb))
        })
        .expect("select_target called on an empty active set")
}

/// Full zero-decomposition of `system`, enumerating at most `cap` solutions.
///
/// Branch A (monic) is explored before branch B at every split. Every
/// reported solution is re-verified against the input system before return.
pub fn solve_all(system: &BoolSystem, cap: usize) -> SolveResult {
    assert!(cap >= 1, "solution cap must be at least 1");
    let start = Instant::now();
    let n = system.n();
    let order = VarOrder::identity(n);

    let mut cost = CostMeter::default();
    let mut triangular_sets = Vec::new();
    let mut solutions: Vec<Assignment> = Vec::new();
    let mut truncated = false;

    let mut stack = vec![(WorkState::new(system.polys().to_vec()), 0usize)];
    while let Some((state, depth)) = stack.pop() {
        cost.node_count += 1;
        let (outcome, ops) = simplify(state);
        cost.op_count += ops;
        let state = match outcome {
            Simplified::Contradiction => {
                cost.leaf_count += 1;
                continue;
            }
            Simplified::Consistent(s) => s,
        };

        if state.active.is_empty() {
            cost.leaf_count += 1;
            let tset = TriangularSet::assemble(state.relations, n);
            let hit_cap = tset.enumerate_into(n, cap, &mut solutions);
            triangular_sets.push(tset);
            if hit_cap {
                truncated = true;
                break;
            }
            continue;
        }

        let mut active = state.active;
        let target = active.remove(select_target(&active));
        cost.op_count += target.term_count() as u64;
        let step = decompose_step(&target, &order)
            .expect("active polynomials are non-constant after simplify");

        let mut width = 0u8;
        if let Some(b) = step.branch_b {
            let mut child = active.clone();
            child.extend(b);
            stack.push((
                WorkState { active: child, relations: state.relations.clone() },
                depth + 1,
            ));
            width += 1;
        }
        active.extend(step.branch_a);
        stack.push((WorkState { active, relations: state.relations }, depth + 1));
        width += 1;

        if cost.branch_max.len() <= depth {
            cost.branch_max.resize(depth + 1, 0);
        }
        cost.branch_max[depth] = cost.branch_max[depth].max(width);
    }

    // Soundness gate, not a debug assertion: a wrong solution here would
    // poison every downstream cost measurement.
    for a in &solutions {
        assert!(system.satisfied_by(a), "solver emitted a non-solution {a}");
    }

    cost.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    SolveResult { triangular_sets, solutions, truncated, cost }
}

/// Solves under a variable ordering: renames, solves with the fixed internal
/// order, and maps the solutions back through σ⁻¹ so they satisfy the
/// original system. The cost meter is the τ(σ) measurement.
pub fn solve_with_ordering(
    system: &BoolSystem,
    order: &VarOrder,
    cap: usize,
) -> Result<SolveResult, CoreError> {
    let renamed = system.apply_order(order)?;
    let mut result = solve_all(&renamed, cap);
    for sol in &mut result.solutions {
        *sol = Assignment::new(order.pull_back_bits(sol.bits()), system.n());
    }
    for a in &result.solutions {
        assert!(system.satisfied_by(a), "pulled-back solution {a} fails the original system");
    }
    Ok(result)
}
