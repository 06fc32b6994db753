//! Shared test fixtures: independent oracle computations over raw joint
//! tables, and seeded random generators for systems, chains, and Gibbs
//! distributions.
//!
//! The oracles here deliberately avoid the library's evaluation paths:
//! entropies are computed from scratch on flat joint tables and interaction
//! terms via the alternating-entropy-sum identity, so agreement with the
//! library is a genuine cross-check.

#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use infodiag::prob::{DiscreteSystem, Functional, LogBase, ProbBackend, Variable};
use infodiag::{Evaluator, VarSubset};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A raw joint table: outcome tuples with masses, no library types.
#[derive(Clone, Debug)]
pub struct RawTable {
    pub outcomes: Vec<Vec<u16>>,
    pub mass: Vec<f64>,
}

impl RawTable {
    pub fn from_system(system: &DiscreteSystem) -> RawTable {
        RawTable {
            outcomes: (0..system.num_outcomes())
                .map(|k| system.outcome(k).to_vec())
                .collect(),
            mass: system.p().to_vec(),
        }
    }

    /// Plain-summation entropy of the joint variable over `vars`, in bits.
    pub fn entropy(&self, vars: &[usize]) -> f64 {
        let mut marg: HashMap<Vec<u16>, f64> = HashMap::new();
        for (o, &m) in self.outcomes.iter().zip(self.mass.iter()) {
            let key: Vec<u16> = vars.iter().map(|&i| o[i]).collect();
            *marg.entry(key).or_insert(0.0) += m;
        }
        marg.values()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    /// Oracle for the conditioned interaction term of singleton variables
    /// via the alternating entropy sum:
    /// `F(X_i : i in I | J) = -sum over T ⊆ I of (-1)^|T| H(X_(T ∪ J))`.
    pub fn interaction(&self, cond: &[usize], vars: &[usize]) -> f64 {
        let q = vars.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << q) {
            let mut t: Vec<usize> = cond.to_vec();
            for (k, &v) in vars.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    t.push(v);
                }
            }
            t.sort_unstable();
            t.dedup();
            let sign = if mask.count_ones() % 2 == 0 { -1.0 } else { 1.0 };
            total += sign * self.entropy(&t);
        }
        total
    }

    /// Oracle atom value: interaction of the singletons of `atom_vars`
    /// conditioned on everything else.
    pub fn atom(&self, n: usize, atom_vars: &[usize]) -> f64 {
        let cond: Vec<usize> = (0..n).filter(|i| !atom_vars.contains(i)).collect();
        self.interaction(&cond, atom_vars)
    }
}

/// Variables named `X1..Xn` with the given label counts.
pub fn make_variables(label_counts: &[usize]) -> Vec<Variable> {
    label_counts
        .iter()
        .enumerate()
        .map(|(i, &c)| Variable {
            name: format!("X{}", i + 1),
            labels: (0..c).map(|v| v.to_string()).collect(),
        })
        .collect()
}

/// Full product outcome space over the label counts, last variable fastest.
pub fn product_outcomes(label_counts: &[usize]) -> Vec<Vec<u16>> {
    let mut outcomes: Vec<Vec<u16>> = vec![vec![]];
    for &c in label_counts {
        outcomes = outcomes
            .into_iter()
            .flat_map(|o| {
                (0..c as u16).map(move |v| {
                    let mut o2 = o.clone();
                    o2.push(v);
                    o2
                })
            })
            .collect();
    }
    outcomes
}

/// A strictly positive random distribution over `len` outcomes.
pub fn random_dist(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let u = Uniform::new(0.05f64, 1.0);
    let raw: Vec<f64> = (0..len).map(|_| u.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    normalize_exact(raw.into_iter().map(|x| x / total).collect())
}

/// Forces an almost-normalized vector to sum to exactly 1.0 by adjusting
/// the largest entry, so systems pass the strict input check.
pub fn normalize_exact(mut dist: Vec<f64>) -> Vec<f64> {
    let total: f64 = dist.iter().sum();
    let imax = dist
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    dist[imax] += 1.0 - total;
    dist
}

/// Random strictly positive system on the full product space; `with_q`
/// additionally samples a strictly positive reference distribution.
pub fn random_system(rng: &mut ChaCha8Rng, label_counts: &[usize], with_q: bool) -> DiscreteSystem {
    let outcomes = product_outcomes(label_counts);
    let p = random_dist(rng, outcomes.len());
    let q = with_q.then(|| random_dist(rng, outcomes.len()));
    DiscreteSystem::new(make_variables(label_counts), outcomes, p, q).unwrap()
}

/// The XOR triple: two fair independent bits and their parity, uniform on
/// the four consistent outcomes.
pub fn xor_triple() -> DiscreteSystem {
    let outcomes: Vec<Vec<u16>> = (0..2u16)
        .flat_map(|a| (0..2u16).map(move |b| vec![a, b, a ^ b]))
        .collect();
    let p = vec![0.25; 4];
    DiscreteSystem::new(make_variables(&[2, 2, 2]), outcomes, p, None).unwrap()
}

/// Two perfectly correlated fair bits.
pub fn duplicated_bit() -> DiscreteSystem {
    DiscreteSystem::new(
        make_variables(&[2, 2]),
        vec![vec![0, 0], vec![1, 1]],
        vec![0.5, 0.5],
        None,
    )
    .unwrap()
}

/// `n` independent fair bits on the full product space.
pub fn independent_bits(n: usize) -> DiscreteSystem {
    let counts = vec![2usize; n];
    let outcomes = product_outcomes(&counts);
    let p = vec![1.0 / outcomes.len() as f64; outcomes.len()];
    DiscreteSystem::new(make_variables(&counts), outcomes, p, None).unwrap()
}

/// Random row-stochastic `from x to` matrix with strictly positive entries.
pub fn random_stochastic(rng: &mut ChaCha8Rng, from: usize, to: usize) -> Vec<Vec<f64>> {
    (0..from).map(|_| random_dist(rng, to)).collect()
}

/// A random system in which the blocks are conditionally independent given
/// the conditioning variables by construction:
/// `P(x) = P(x_cond) * prod over blocks of P(x_block | x_cond)`.
pub fn product_of_conditionals(
    rng: &mut ChaCha8Rng,
    label_counts: &[usize],
    cond: &[usize],
    blocks: &[Vec<usize>],
) -> DiscreteSystem {
    let outcomes = product_outcomes(label_counts);
    let cond_space: usize = cond.iter().map(|&i| label_counts[i]).product();
    let cond_dist = random_dist(rng, cond_space.max(1));
    // One conditional distribution per block per conditioning value.
    let block_dists: Vec<Vec<Vec<f64>>> = blocks
        .iter()
        .map(|block| {
            let space: usize = block.iter().map(|&i| label_counts[i]).product();
            (0..cond_space.max(1)).map(|_| random_dist(rng, space)).collect()
        })
        .collect();
    let flat_index = |o: &[u16], vars: &[usize]| -> usize {
        vars.iter().fold(0usize, |acc, &i| acc * label_counts[i] + o[i] as usize)
    };
    let p: Vec<f64> = outcomes
        .iter()
        .map(|o| {
            let ci = flat_index(o, cond);
            let mut mass = cond_dist[ci];
            for (b, block) in blocks.iter().enumerate() {
                mass *= block_dists[b][ci][flat_index(o, block)];
            }
            mass
        })
        .collect();
    DiscreteSystem::new(make_variables(label_counts), outcomes, normalize_exact(p), None).unwrap()
}

/// A random Gibbs distribution with strictly positive pairwise potentials
/// on the given edges: `P(x) ∝ prod over edges (i,j) of psi_ij(x_i, x_j)`.
pub fn gibbs_system(
    rng: &mut ChaCha8Rng,
    label_counts: &[usize],
    edges: &[(usize, usize)],
) -> DiscreteSystem {
    let outcomes = product_outcomes(label_counts);
    let potentials: Vec<Vec<f64>> = edges
        .iter()
        .map(|&(i, j)| {
            (0..label_counts[i] * label_counts[j])
                .map(|_| rng.gen_range(0.2f64..5.0))
                .collect()
        })
        .collect();
    let raw: Vec<f64> = outcomes
        .iter()
        .map(|o| {
            edges
                .iter()
                .zip(potentials.iter())
                .map(|(&(i, j), pot)| pot[o[i] as usize * label_counts[j] + o[j] as usize])
                .product()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let p = normalize_exact(raw.into_iter().map(|x| x / total).collect());
    DiscreteSystem::new(make_variables(label_counts), outcomes, p, None).unwrap()
}

/// Entropy-slice evaluator (base 2) of a system.
pub fn entropy_evaluator(system: DiscreteSystem) -> Evaluator<ProbBackend> {
    Evaluator::new(ProbBackend::new(Arc::new(system), Functional::Entropy, LogBase::Two).unwrap())
}

/// Relative-entropy-slice evaluator (base 2) of a system with a reference.
pub fn kl_evaluator(system: DiscreteSystem) -> Evaluator<ProbBackend> {
    Evaluator::new(
        ProbBackend::new(Arc::new(system), Functional::RelativeEntropy, LogBase::Two).unwrap(),
    )
}

/// Subset from 0-based indices with ground size `n`.
pub fn vs(n: usize, ix: &[usize]) -> VarSubset {
    VarSubset::from_indices(n, ix).unwrap()
}
