//! Randomized solver contract: agreement with brute force, disjoint
//! triangular expansions, the branching-product bound, and determinism.

use std::collections::BTreeSet;

use bcs_core::{solve_all, solve_with_ordering, Assignment, BoolSystem, Monomial, Poly, VarId, VarOrder, DEFAULT_CAP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bernoulli inclusion over all monomials of degree <= 2, constant included.
fn random_system(n: usize, m: usize, density: f64, seed: u64) -> BoolSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut polys = Vec::with_capacity(m);
    for _ in 0..m {
        let mut terms = Vec::new();
        if rng.random::<f64>() < density {
            terms.push(Monomial::ONE);
        }
        for i in 1..=n {
            if rng.random::<f64>() < density {
                terms.push(Monomial::var(VarId::new(i)));
            }
        }
        for i in 1..n {
            for j in i + 1..=n {
                if rng.random::<f64>() < density {
                    terms.push(Monomial::from_vars([VarId::new(i), VarId::new(j)]));
                }
            }
        }
        polys.push(Poly::from_monomials(terms));
    }
    BoolSystem::new(n, polys).unwrap()
}

fn brute_force(system: &BoolSystem) -> BTreeSet<Assignment> {
    (0..1u128 << system.n())
        .map(|bits| Assignment::new(bits, system.n()))
        .filter(|a| system.satisfied_by(a))
        .collect()
}

#[test]
fn agrees_with_brute_force_on_random_systems() {
    for seed in 0..60u64 {
        let n = 4 + (seed % 7) as usize; // 4..=10
        let m = n + (seed % 3) as usize;
        let s = random_system(n, m, 0.25, seed);
        let r = solve_all(&s, DEFAULT_CAP);
        assert!(!r.truncated);
        let got: BTreeSet<Assignment> = r.solutions.iter().copied().collect();
        assert_eq!(got, brute_force(&s), "seed {seed}, n {n}");
        assert_eq!(got.len(), r.solutions.len(), "duplicate solutions at seed {seed}");
    }
}

#[test]
fn triangular_expansions_are_disjoint() {
    for seed in 100..130u64 {
        let n = 6 + (seed % 5) as usize; // 6..=10
        let s = random_system(n, n, 0.3, seed);
        let r = solve_all(&s, DEFAULT_CAP);
        let mut seen: BTreeSet<Assignment> = BTreeSet::new();
        for a in &r.solutions {
            assert!(seen.insert(*a), "solution {a} appears twice at seed {seed}");
        }
        let cover: u128 = r
            .triangular_sets
            .iter()
            .map(|t| t.solution_count())
            .sum();
        assert_eq!(cover, r.solutions.len() as u128, "seed {seed}");
    }
}

#[test]
fn branching_bound_and_meter_sanity() {
    for seed in 200..240u64 {
        let n = 8 + (seed % 5) as usize; // 8..=12
        let s = random_system(n, n, 0.3, seed);
        let r = solve_all(&s, DEFAULT_CAP);
        assert!(r.cost.branch_max.iter().all(|&b| b == 1 || b == 2), "seed {seed}");
        assert!(
            (r.cost.leaf_count as f64) <= r.cost.branch_product(),
            "seed {seed}: {} leaves > bound {}",
            r.cost.leaf_count,
            r.cost.branch_product()
        );
        assert!(r.cost.node_count >= r.cost.leaf_count, "seed {seed}");
        assert!(r.cost.node_count >= 1);
    }
}

#[test]
fn repeated_solves_report_identical_meters() {
    for seed in 300..320u64 {
        let s = random_system(10, 10, 0.3, seed);
        let a = solve_all(&s, DEFAULT_CAP);
        let b = solve_all(&s, DEFAULT_CAP);
        assert_eq!(a.solutions, b.solutions);
        assert_eq!(a.triangular_sets, b.triangular_sets);
        assert_eq!(a.cost.node_count, b.cost.node_count);
        assert_eq!(a.cost.leaf_count, b.cost.leaf_count);
        assert_eq!(a.cost.op_count, b.cost.op_count);
        assert_eq!(a.cost.branch_max, b.cost.branch_max);
    }
}

#[test]
fn ordered_solves_pull_back_to_the_oracle() {
    for seed in 400..420u64 {
        let n = 5 + (seed % 6) as usize; // 5..=10
        let s = random_system(n, n, 0.3, seed);
        let expected = brute_force(&s);
        for ord_seed in 0..5u64 {
            let o = VarOrder::random(n, seed * 1000 + ord_seed);
            let r = solve_with_ordering(&s, &o, DEFAULT_CAP).unwrap();
            let got: BTreeSet<Assignment> = r.solutions.iter().copied().collect();
            assert_eq!(got, expected, "seed {seed} ordering {ord_seed}");
        }
    }
}

#[test]
fn ordering_changes_cost_but_not_answers() {
    let s = random_system(12, 12, 0.25, 7);
    let expected = brute_force(&s);
    let mut node_counts = BTreeSet::new();
    for ord_seed in 0..25u64 {
        let o = VarOrder::random(12, ord_seed);
        let r = solve_with_ordering(&s, &o, DEFAULT_CAP).unwrap();
        let got: BTreeSet<Assignment> = r.solutions.iter().copied().collect();
        assert_eq!(got, expected);
        node_counts.insert(r.cost.node_count);
    }
    assert!(node_counts.len() > 1, "node counts never varied across orderings");
}
