//! Probability-system behavior: marginals, conditioning, the factorization
//! oracle, chain constructors, the two-chain divergence setup, and the
//! stability of structural properties under conditioning.

mod common;

use common::*;
use infodiag::error::Error;
use infodiag::graph::{test_mrf_oracle, Graph, MrfMode};
use infodiag::prob::{
    markov_chain_system, shared_transition_chains, DiscreteSystem, LogBase,
};
use infodiag::VarSubset;

const TOL: f64 = 1e-8;

#[test]
fn input_validation() {
    let vars = make_variables(&[2]);
    // Distribution far from normalized is rejected, near-normalized passes.
    assert!(DiscreteSystem::new(
        vars.clone(),
        vec![vec![0], vec![1]],
        vec![0.6, 0.6],
        None
    )
    .is_err());
    assert!(DiscreteSystem::new(
        vars.clone(),
        vec![vec![0], vec![1]],
        vec![0.5 + 1e-13, 0.5],
        None
    )
    .is_ok());
    // Negative mass and label overflow are rejected.
    assert!(DiscreteSystem::new(
        vars.clone(),
        vec![vec![0], vec![1]],
        vec![1.5, -0.5],
        None
    )
    .is_err());
    assert!(
        DiscreteSystem::new(vars.clone(), vec![vec![0], vec![2]], vec![0.5, 0.5], None).is_err()
    );
    // P must be absolutely continuous with respect to Q.
    let bad = DiscreteSystem::new(
        vars,
        vec![vec![0], vec![1]],
        vec![0.5, 0.5],
        Some(vec![1.0, 0.0]),
    );
    assert!(matches!(bad, Err(Error::AbsoluteContinuity { .. })));
}

#[test]
fn marginals_on_fixtures() {
    let xor = xor_triple();
    let m3 = xor.marginal_p(vs(3, &[2]));
    assert_eq!(m3.len(), 2);
    assert!((m3[&vec![0u16]] - 0.5).abs() < TOL);
    assert!((m3[&vec![1u16]] - 0.5).abs() < TOL);
    // The empty joint variable has the one-point law.
    let m0 = xor.marginal_p(vs(3, &[]));
    assert_eq!(m0.len(), 1);
    assert!((m0[&vec![]] - 1.0).abs() < TOL);
}

#[test]
fn conditioning_behaviour() {
    let xor = xor_triple();
    // Conditioning on the parity couples the two input bits.
    let cond = xor.condition(vs(3, &[2]), &[0]).unwrap();
    let pair = cond.marginal_p(vs(3, &[0, 1]));
    assert!((pair[&vec![0u16, 0]] - 0.5).abs() < TOL);
    assert!((pair[&vec![1u16, 1]] - 0.5).abs() < TOL);
    assert!(pair[&vec![0u16, 1]].abs() < TOL);
    // Outcome list is unchanged (zero-mass outcomes retained).
    assert_eq!(cond.num_outcomes(), xor.num_outcomes());

    // Conditioning on the empty event is the identity.
    let same = xor.condition(vs(3, &[]), &[]).unwrap();
    assert_eq!(same.p(), xor.p());

    // Conditioning a fair bit on its value gives a point mass.
    let bit = independent_bits(1);
    let point = bit.condition(vs(1, &[0]), &[0]).unwrap();
    assert_eq!(point.p(), &[1.0, 0.0]);

    // Zero-probability events are rejected.
    let det = DiscreteSystem::new(
        make_variables(&[2]),
        vec![vec![0], vec![1]],
        vec![1.0, 0.0],
        None,
    )
    .unwrap();
    assert!(matches!(
        det.condition(vs(1, &[0]), &[1]),
        Err(Error::ZeroProbabilityEvent { .. })
    ));
}

#[test]
fn entropy_values_on_fixtures() {
    let bit = independent_bits(1);
    assert!((bit.entropy(vs(1, &[]), vs(1, &[0]), LogBase::Two) - 1.0).abs() < TOL);

    let xor = xor_triple();
    // Each bit is a function of the other two.
    assert!(xor.entropy(vs(3, &[1, 2]), vs(3, &[0]), LogBase::Two).abs() < TOL);

    let four = DiscreteSystem::new(
        make_variables(&[4]),
        (0..4u16).map(|v| vec![v]).collect(),
        vec![0.25; 4],
        None,
    )
    .unwrap();
    assert!((four.entropy(vs(1, &[]), vs(1, &[0]), LogBase::Two) - 2.0).abs() < TOL);
    // Natural-log option scales by ln 2.
    let nats = four.entropy(vs(1, &[]), vs(1, &[0]), LogBase::E);
    assert!((nats - 2.0 * std::f64::consts::LN_2).abs() < TOL);
}

#[test]
fn divergence_values_on_fixtures() {
    // P = Q: divergence vanishes everywhere.
    let mut r = rng(31);
    let p = random_dist(&mut r, 4);
    let eq = DiscreteSystem::new(
        make_variables(&[2, 2]),
        product_outcomes(&[2, 2]),
        p.clone(),
        Some(p),
    )
    .unwrap();
    for jbits in 0u32..4 {
        for sbits in 1u32..4 {
            let j = VarSubset::from_bits(2, jbits).unwrap();
            let s = VarSubset::from_bits(2, sbits).unwrap();
            assert!(eq.relative_entropy(j, s, LogBase::Two).unwrap().abs() < TOL);
        }
    }

    // Point mass against the fair coin: one bit of divergence, and the
    // cross entropy splits as entropy plus divergence.
    let point = DiscreteSystem::new(
        make_variables(&[2]),
        vec![vec![0], vec![1]],
        vec![1.0, 0.0],
        Some(vec![0.5, 0.5]),
    )
    .unwrap();
    let kl = point.relative_entropy(vs(1, &[]), vs(1, &[0]), LogBase::Two).unwrap();
    let ce = point.cross_entropy(vs(1, &[]), vs(1, &[0]), LogBase::Two).unwrap();
    let h = point.entropy(vs(1, &[]), vs(1, &[0]), LogBase::Two);
    assert!((kl - 1.0).abs() < TOL);
    assert!((ce - 1.0).abs() < TOL);
    assert!((ce - (h + kl)).abs() < TOL);
}

#[test]
fn factorization_oracle_basics() {
    let bits = independent_bits(2);
    assert!(bits.p_independent(vs(2, &[0]), vs(2, &[1]), vs(2, &[])));

    let xor = xor_triple();
    assert!(!xor.p_independent(vs(3, &[0]), vs(3, &[1]), vs(3, &[2])));
    // Redundancy: a variable inside the conditioning set.
    assert!(xor.p_independent(vs(3, &[0]), vs(3, &[1]), vs(3, &[0, 2])));
}

#[test]
fn chain_construction() {
    // Two states, deterministic start, slightly noisy step.
    let sys = markov_chain_system(&[1.0, 0.0], &[vec![vec![0.9, 0.1], vec![0.1, 0.9]]]).unwrap();
    let joint = sys.marginal_p(vs(2, &[0, 1]));
    assert!((joint[&vec![0u16, 0]] - 0.9).abs() < TOL);
    assert!((joint[&vec![0u16, 1]] - 0.1).abs() < TOL);
    assert!(joint[&vec![1u16, 0]].abs() < TOL);

    // Identity transitions: perfectly correlated chain.
    let ident = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let sys = markov_chain_system(&[0.5, 0.5], &[ident.clone(), ident]).unwrap();
    let ends = sys.marginal_p(vs(3, &[0, 2]));
    assert!((ends[&vec![0u16, 0]] - 0.5).abs() < TOL);
    assert!(ends.get(&vec![0u16, 1]).copied().unwrap_or(0.0).abs() < TOL);

    // Uniform initial with doubly stochastic steps keeps marginals uniform.
    let ds = vec![vec![0.7, 0.3], vec![0.3, 0.7]];
    let sys = markov_chain_system(&[0.5, 0.5], &[ds.clone(), ds]).unwrap();
    for i in 0..3 {
        let m = sys.marginal_p(vs(3, &[i]));
        assert!((m[&vec![0u16]] - 0.5).abs() < TOL);
    }

    // Non-stochastic rows are rejected.
    assert!(markov_chain_system(&[1.0, 0.0], &[vec![vec![0.5, 0.6], vec![0.1, 0.9]]]).is_err());
}

#[test]
fn random_chains_satisfy_markov_factorization() {
    use rand::Rng;
    let mut r = rng(32);
    for _ in 0..10 {
        let n = r.gen_range(3..=4);
        let sizes: Vec<usize> = (0..n).map(|_| r.gen_range(2..=3)).collect();
        let initial = random_dist(&mut r, sizes[0]);
        let transitions: Vec<Vec<Vec<f64>>> = (1..n)
            .map(|k| random_stochastic(&mut r, sizes[k - 1], sizes[k]))
            .collect();
        let sys = markov_chain_system(&initial, &transitions).unwrap();
        for k in 2..n {
            let past = VarSubset::from_bits(n, (1 << (k - 1)) - 1).unwrap();
            assert!(sys.p_independent(
                VarSubset::singleton(n, k),
                past,
                VarSubset::singleton(n, k - 1)
            ));
        }
    }
}

#[test]
fn two_chain_divergence_setup() {
    // Deterministic start against the uniform reference, one noisy step.
    let t = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
    let sys = shared_transition_chains(&[1.0, 0.0], &[0.5, 0.5], &[t.clone()]).unwrap();
    assert!(sys.is_shared_transition_chain().unwrap());

    let kl1 = sys.relative_entropy(vs(2, &[]), vs(2, &[0]), LogBase::Two).unwrap();
    assert!((kl1 - 1.0).abs() < TOL);
    // After one step: divergence of (0.9, 0.1) from uniform, which is
    // 1 - H2(0.9) by the closed form.
    let h2 = -(0.9f64.log2() * 0.9 + 0.1f64.log2() * 0.1);
    let kl2 = sys.relative_entropy(vs(2, &[]), vs(2, &[1]), LogBase::Two).unwrap();
    assert!((kl2 - (1.0 - h2)).abs() < 1e-6);
    assert!(kl2 <= kl1);

    // Identical starts: zero divergence everywhere, so all atoms vanish.
    let zero = shared_transition_chains(&[0.5, 0.5], &[0.5, 0.5], &[t.clone(), t]).unwrap();
    let ev = kl_evaluator(zero);
    let d = ev.diagram().unwrap();
    for (a, v) in d.entries() {
        assert!(v.abs() < TOL, "atom {a} should vanish");
    }
}

#[test]
fn two_chain_divergence_atoms_collapse_to_prefixes() {
    // In the divergence diagram of two chains with shared transitions, only
    // atoms of the form {1..k} survive.
    let mut r = rng(33);
    let t1 = random_stochastic(&mut r, 2, 3);
    let t2 = random_stochastic(&mut r, 3, 2);
    let sys = shared_transition_chains(
        &[0.9, 0.1],
        &random_dist(&mut r, 2),
        &[t1, t2],
    )
    .unwrap();
    assert!(sys.is_shared_transition_chain().unwrap());
    let ev = kl_evaluator(sys);
    let d = ev.diagram().unwrap();
    for (a, v) in d.entries() {
        let set = a.set();
        let is_prefix = set.bits() == (1 << set.len()) - 1;
        if !is_prefix {
            assert!(v.abs() < TOL, "non-prefix atom {a} = {v} should vanish");
        }
    }
}

#[test]
fn conditioning_preserves_block_independence() {
    let mut r = rng(34);
    for _ in 0..20 {
        let sys =
            product_of_conditionals(&mut r, &[2, 2, 2, 2], &[3], &[vec![0], vec![1, 2]]);
        let blocks = [vs(4, &[0]), vs(4, &[1, 2])];
        assert!(sys.p_mutually_independent(&blocks, vs(4, &[3])));
        // Condition on part of the conditioning block.
        for y in 0..2u16 {
            let cond = sys.condition(vs(4, &[3]), &[y]).unwrap();
            assert!(
                cond.p_mutually_independent(&blocks, vs(4, &[3])),
                "block independence lost after conditioning"
            );
        }
    }
}

#[test]
fn conditioning_preserves_markov_structure() {
    let mut r = rng(35);
    for _ in 0..10 {
        let initial = random_dist(&mut r, 2);
        let transitions = vec![
            random_stochastic(&mut r, 2, 2),
            random_stochastic(&mut r, 2, 2),
        ];
        let sys = markov_chain_system(&initial, &transitions).unwrap();
        let path = Graph::path(3);
        fn oracle(
            s: &DiscreteSystem,
        ) -> impl FnMut(VarSubset, VarSubset, VarSubset) -> Result<bool, Error> + '_ {
            move |a, b, c| Ok(s.p_independent(a, b, c))
        }
        assert!(test_mrf_oracle(&path, MrfMode::Cutset, oracle(&sys)).unwrap());
        // Condition on the middle variable: both halves stay Markov.
        for y in 0..2u16 {
            let cond = sys.condition(vs(3, &[1]), &[y]).unwrap();
            assert!(
                test_mrf_oracle(&path, MrfMode::Cutset, oracle(&cond)).unwrap(),
                "Markov structure lost after conditioning"
            );
        }
    }
}

#[test]
fn conditioning_preserves_shared_transitions() {
    let mut r = rng(36);
    for _ in 0..10 {
        let t1 = random_stochastic(&mut r, 2, 2);
        let t2 = random_stochastic(&mut r, 2, 2);
        let sys =
            shared_transition_chains(&random_dist(&mut r, 2), &random_dist(&mut r, 2), &[t1, t2])
                .unwrap();
        assert!(sys.is_shared_transition_chain().unwrap());
        // Conditioning on the first state preserves the shared kernels.
        for y in 0..2u16 {
            let cond = sys.condition(vs(3, &[0]), &[y]).unwrap();
            assert!(
                cond.is_shared_transition_chain().unwrap(),
                "shared transitions lost after conditioning"
            );
        }
    }
}
