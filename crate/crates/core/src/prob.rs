//! Finite discrete probability systems and the entropy / divergence
//! functionals evaluated on them.
//!
//! A [`DiscreteSystem`] is a finite outcome space carrying a distribution
//! `P` and optionally a reference distribution `Q` with `P` absolutely
//! continuous with respect to `Q`, plus a family of named finite-valued
//! variables read off each outcome. [`ProbBackend`] exposes one functional
//! (entropy, relative entropy, or cross entropy) of that system through the
//! [`Backend`] trait, with conditioning realized as averaging the functional
//! of the conditioned distributions:
//!
//! ```text
//! (X_J . f)(P ‖ Q) = sum over j of P(X_J = j) * f(P|_{X_J=j} ‖ Q|_{X_J=j})
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::backend::{kahan_sum, Backend, Tolerance};
use crate::diagram::ConditionalPartition;
use crate::error::Error;
use crate::graph::{test_mrf_oracle, Graph, MrfMode};
use crate::subset::{VarSubset, MAX_VARS};

/// Tolerance used when validating that distributions sum to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance for distribution-level (oracle) independence checks.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// A named variable taking finitely many labelled values.
#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub labels: Vec<String>,
}

/// Logarithm base for all information quantities.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum LogBase {
    /// Base 2; values are in bits.
    #[default]
    Two,
    /// Natural logarithm; values are in nats.
    E,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

/// A finite outcome space with a distribution `P`, an optional reference
/// distribution `Q`, and a family of finite-valued variables.
///
/// Outcomes are sample points: two outcomes may assign identical values to
/// every variable. Conditioning keeps the full outcome list and zeroes the
/// masses outside the event, so outcome indices stay stable.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSystem {
    variables: Vec<Variable>,
    /// Per outcome, the label index each variable takes.
    outcomes: Vec<Vec<u16>>,
    p: Vec<f64>,
    q: Option<Vec<f64>>,
}

impl DiscreteSystem {
    /// Validates and normalizes a system.
    ///
    /// Distributions must be nonnegative and sum to one within
    /// [`NORMALIZATION_TOLERANCE`] (they are renormalized exactly); if `Q`
    /// is present, `P` must be absolutely continuous with respect to it.
    pub fn new(
        variables: Vec<Variable>,
        outcomes: Vec<Vec<u16>>,
        p: Vec<f64>,
        q: Option<Vec<f64>>,
    ) -> Result<Self, Error> {
        let n = variables.len();
        if n == 0 {
            return Err(Error::Model("system needs at least one variable".into()));
        }
        if n > MAX_VARS {
            return Err(Error::GroundSetTooLarge { n });
        }
        for v in &variables {
            if v.labels.is_empty() {
                return Err(Error::Model(format!("variable {} has no labels", v.name)));
            }
        }
        if outcomes.is_empty() {
            return Err(Error::Model("system needs at least one outcome".into()));
        }
        for (k, o) in outcomes.iter().enumerate() {
            if o.len() != n {
                return Err(Error::Model(format!(
                    "outcome {k} assigns {} values but there are {n} variables",
                    o.len()
                )));
            }
            for (i, &li) in o.iter().enumerate() {
                if li as usize >= variables[i].labels.len() {
                    return Err(Error::Model(format!(
                        "outcome {k} uses label index {li} for variable {}",
                        variables[i].name
                    )));
                }
            }
        }
        let p = normalize("P", p, outcomes.len())?;
        let q = match q {
            Some(q) => {
                let q = normalize("Q", q, outcomes.len())?;
                for (k, (&pk, &qk)) in p.iter().zip(q.iter()).enumerate() {
                    if pk > 0.0 && qk == 0.0 {
                        return Err(Error::AbsoluteContinuity {
                            event: format!("outcome {k}"),
                        });
                    }
                }
                Some(q)
            }
            None => None,
        };
        Ok(DiscreteSystem { variables, outcomes, p, q })
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn has_q(&self) -> bool {
        self.q.is_some()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> Option<&[f64]> {
        self.q.as_deref()
    }

    pub fn outcome(&self, k: usize) -> &[u16] {
        &self.outcomes[k]
    }

    fn project(&self, k: usize, vars: VarSubset) -> Vec<u16> {
        vars.iter().map(|i| self.outcomes[k][i]).collect()
    }

    /// Outcome indices grouped by their joint value on `vars`, keyed in
    /// ascending lexicographic order of the value tuple.
    fn groups(&self, vars: VarSubset) -> BTreeMap<Vec<u16>, Vec<usize>> {
        let mut map: BTreeMap<Vec<u16>, Vec<usize>> = BTreeMap::new();
        for k in 0..self.outcomes.len() {
            map.entry(self.project(k, vars)).or_default().push(k);
        }
        map
    }

    /// Marginal distribution of the joint variable over `vars` under `P`.
    pub fn marginal_p(&self, vars: VarSubset) -> BTreeMap<Vec<u16>, f64> {
        self.marginal_of(&self.p, vars)
    }

    /// Marginal distribution of the joint variable over `vars` under `Q`.
    pub fn marginal_q(&self, vars: VarSubset) -> Result<BTreeMap<Vec<u16>, f64>, Error> {
        Ok(self.marginal_of(self.q.as_ref().ok_or(Error::MissingQ)?, vars))
    }

    fn marginal_of(&self, dist: &[f64], vars: VarSubset) -> BTreeMap<Vec<u16>, f64> {
        self.groups(vars)
            .into_iter()
            .map(|(key, idxs)| {
                let mass: Vec<f64> = idxs.iter().map(|&k| dist[k]).collect();
                (key, kahan_sum(mass.iter()))
            })
            .collect()
    }

    /// Conditions both distributions on the event `X_vars = values`.
    ///
    /// The outcome list is unchanged; masses outside the event become zero
    /// and the rest are rescaled. Fails if the event has `P`-probability
    /// zero, or `Q`-probability zero while `Q` is present.
    pub fn condition(&self, vars: VarSubset, values: &[u16]) -> Result<DiscreteSystem, Error> {
        if values.len() != vars.len() {
            return Err(Error::Model(format!(
                "event assigns {} values to {} variables",
                values.len(),
                vars.len()
            )));
        }
        let in_event: Vec<bool> = (0..self.outcomes.len())
            .map(|k| self.project(k, vars) == values)
            .collect();
        let event = || format!("{vars} = {values:?}");
        let p_mass = kahan_sum((0..self.p.len()).filter(|&k| in_event[k]).map(|k| &self.p[k]));
        if p_mass <= 0.0 {
            return Err(Error::ZeroProbabilityEvent { event: event() });
        }
        let p: Vec<f64> = (0..self.p.len())
            .map(|k| if in_event[k] { self.p[k] / p_mass } else { 0.0 })
            .collect();
        let q = match &self.q {
            Some(q) => {
                let q_mass =
                    kahan_sum((0..q.len()).filter(|&k| in_event[k]).map(|k| &q[k]));
                if q_mass <= 0.0 {
                    return Err(Error::AbsoluteContinuity { event: event() });
                }
                Some(
                    (0..q.len())
                        .map(|k| if in_event[k] { q[k] / q_mass } else { 0.0 })
                        .collect(),
                )
            }
            None => None,
        };
        Ok(DiscreteSystem {
            variables: self.variables.clone(),
            outcomes: self.outcomes.clone(),
            p,
            q,
        })
    }

    /// Distribution-level conditional independence of `a` and `b` given `c`
    /// under `P`: for every joint value, `P(a,b,c) * P(c) = P(a,c) * P(b,c)`
    /// within [`ORACLE_TOLERANCE`].
    ///
    /// This is the factorization oracle; it never consults any diagram.
    pub fn p_independent(&self, a: VarSubset, b: VarSubset, c: VarSubset) -> bool {
        self.independent_in(&self.p, a, b, c)
    }

    /// Same factorization oracle under `Q`.
    pub fn q_independent(&self, a: VarSubset, b: VarSubset, c: VarSubset) -> Result<bool, Error> {
        Ok(self.independent_in(self.q.as_ref().ok_or(Error::MissingQ)?, a, b, c))
    }

    fn independent_in(&self, dist: &[f64], a: VarSubset, b: VarSubset, c: VarSubset) -> bool {
        let abc = a.union(b).union(c);
        let joint = self.marginal_of(dist, abc);
        let mut m_c: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
        let mut m_ac: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
        let mut m_bc: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
        let sub = |key: &[u16], vars: VarSubset| -> Vec<u16> {
            // `key` is indexed by ascending member order of `abc`.
            abc.iter()
                .zip(key.iter())
                .filter(|(i, _)| vars.contains(*i))
                .map(|(_, &v)| v)
                .collect()
        };
        for (key, &mass) in &joint {
            *m_c.entry(sub(key, c)).or_insert(0.0) += mass;
            *m_ac.entry(sub(key, a.union(c))).or_insert(0.0) += mass;
            *m_bc.entry(sub(key, b.union(c))).or_insert(0.0) += mass;
        }
        joint.iter().all(|(key, &mass)| {
            let lhs = mass * m_c[&sub(key, c)];
            let rhs = m_ac[&sub(key, a.union(c))] * m_bc[&sub(key, b.union(c))];
            (lhs - rhs).abs() <= ORACLE_TOLERANCE
        })
    }

    /// Factorization oracle for mutual independence of disjoint blocks given
    /// `cond`: every block must be independent of the union of the others.
    pub fn p_mutually_independent(&self, blocks: &[VarSubset], cond: VarSubset) -> bool {
        let union = blocks
            .iter()
            .fold(VarSubset::empty(self.num_vars()), |acc, b| acc.union(*b));
        blocks
            .iter()
            .all(|b| self.p_independent(*b, union.difference(*b), cond))
    }

    /// Conditioned entropy `sum_j P(j) * H(target | X_cond = j)`.
    pub fn entropy(&self, cond: VarSubset, target: VarSubset, base: LogBase) -> f64 {
        let mut terms: Vec<f64> = Vec::new();
        for (_, idxs) in self.groups(cond) {
            let masses: Vec<f64> = idxs.iter().map(|&k| self.p[k]).collect();
            let pj = kahan_sum(masses.iter());
            if pj <= 0.0 {
                continue;
            }
            let mut inner: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
            for &k in &idxs {
                *inner.entry(self.project(k, target)).or_insert(0.0) += self.p[k];
            }
            let cell: Vec<f64> = inner
                .values()
                .filter(|&&ps| ps > 0.0)
                .map(|&ps| {
                    let r = ps / pj;
                    -r * base.log(r)
                })
                .collect();
            terms.push(pj * kahan_sum(cell.iter()));
        }
        kahan_sum(terms.iter())
    }

    /// Conditioned relative entropy
    /// `sum_j P(j) * D( P(target | j) ‖ Q(target | j) )`.
    pub fn relative_entropy(
        &self,
        cond: VarSubset,
        target: VarSubset,
        base: LogBase,
    ) -> Result<f64, Error> {
        self.divergence(cond, target, base, false)
    }

    /// Conditioned cross entropy
    /// `sum_j P(j) * CE( P(target | j) ‖ Q(target | j) )`, where
    /// `CE(p ‖ q) = -sum p(x) log q(x)`.
    pub fn cross_entropy(
        &self,
        cond: VarSubset,
        target: VarSubset,
        base: LogBase,
    ) -> Result<f64, Error> {
        self.divergence(cond, target, base, true)
    }

    fn divergence(
        &self,
        cond: VarSubset,
        target: VarSubset,
        base: LogBase,
        cross: bool,
    ) -> Result<f64, Error> {
        let q = self.q.as_ref().ok_or(Error::MissingQ)?;
        let mut terms: Vec<f64> = Vec::new();
        for (key, idxs) in self.groups(cond) {
            let pj = kahan_sum(idxs.iter().map(|&k| &self.p[k]));
            if pj <= 0.0 {
                continue;
            }
            let qj = kahan_sum(idxs.iter().map(|&k| &q[k]));
            if qj <= 0.0 {
                return Err(Error::AbsoluteContinuity { event: format!("{cond} = {key:?}") });
            }
            let mut inner: BTreeMap<Vec<u16>, (f64, f64)> = BTreeMap::new();
            for &k in &idxs {
                let e = inner.entry(self.project(k, target)).or_insert((0.0, 0.0));
                e.0 += self.p[k];
                e.1 += q[k];
            }
            let mut cell: Vec<f64> = Vec::new();
            for (skey, &(ps, qs)) in &inner {
                if ps <= 0.0 {
                    continue;
                }
                if qs <= 0.0 {
                    return Err(Error::AbsoluteContinuity {
                        event: format!("{} = {skey:?}", cond.union(target)),
                    });
                }
                let rp = ps / pj;
                let rq = qs / qj;
                cell.push(if cross { -rp * base.log(rq) } else { rp * base.log(rp / rq) });
            }
            terms.push(pj * kahan_sum(cell.iter()));
        }
        Ok(kahan_sum(terms.iter()))
    }

    /// True when both `P` and `Q` (if present) have the chain factorization
    /// `X_k ⫫ (X_1, .., X_{k-2}) | X_{k-1}` in variable-index order, and the
    /// one-step transition probabilities of `P` and `Q` agree on every state
    /// the `P`-marginal gives positive mass.
    ///
    /// This is the distribution-level property preserved by conditioning on
    /// a final segment of the chain.
    pub fn is_shared_transition_chain(&self) -> Result<bool, Error> {
        let q = self.q.as_ref().ok_or(Error::MissingQ)?;
        let n = self.num_vars();
        for k in 2..n {
            let past = VarSubset::from_bits(n, (1 << (k - 1)) - 1).unwrap();
            let here = VarSubset::singleton(n, k);
            let prev = VarSubset::singleton(n, k - 1);
            if !self.p_independent(here, past, prev) || !self.independent_in(q, here, past, prev) {
                return Ok(false);
            }
        }
        for k in 1..n {
            let prev = VarSubset::singleton(n, k - 1);
            let pair = prev.union(VarSubset::singleton(n, k));
            let p_prev = self.marginal_p(prev);
            let q_prev = self.marginal_of(q, prev);
            let p_pair = self.marginal_p(pair);
            let q_pair = self.marginal_of(q, pair);
            for (key, &mass) in &p_pair {
                let prev_key = vec![key[0]];
                let pa = p_prev[&prev_key];
                if pa <= 0.0 {
                    continue;
                }
                let qa = q_prev[&prev_key];
                if qa <= 0.0 {
                    return Ok(false);
                }
                let qb = q_pair.get(key).copied().unwrap_or(0.0);
                if (mass / pa - qb / qa).abs() > ORACLE_TOLERANCE {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn normalize(name: &str, dist: Vec<f64>, len: usize) -> Result<Vec<f64>, Error> {
    if dist.len() != len {
        return Err(Error::Model(format!(
            "{name} has {} entries but there are {len} outcomes",
            dist.len()
        )));
    }
    if dist.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::Model(format!("{name} has a negative or non-finite entry")));
    }
    let total = kahan_sum(dist.iter());
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Model(format!("{name} sums to {total}, not 1")));
    }
    Ok(dist.into_iter().map(|x| x / total).collect())
}

/// Builds the joint system of a time-homogeneous-or-not chain
/// `X_1 -> X_2 -> ..` from an initial distribution and one transition matrix
/// per step. `transitions[k][a][b]` is `P(X_{k+2} = b | X_{k+1} = a)`.
pub fn markov_chain_system(
    initial: &[f64],
    transitions: &[Vec<Vec<f64>>],
) -> Result<DiscreteSystem, Error> {
    let joint = chain_joint(initial, transitions)?;
    let sizes = chain_sizes(initial, transitions);
    let (variables, outcomes) = chain_space(&sizes);
    DiscreteSystem::new(variables, outcomes, joint, None)
}

/// Builds a system carrying two chains driven by the *same* transition
/// matrices from different initial distributions: `P` starts at `p1`, the
/// reference `Q` at `q1`.
pub fn shared_transition_chains(
    p1: &[f64],
    q1: &[f64],
    transitions: &[Vec<Vec<f64>>],
) -> Result<DiscreteSystem, Error> {
    if p1.len() != q1.len() {
        return Err(Error::Model("P and Q initial distributions differ in size".into()));
    }
    let p = chain_joint(p1, transitions)?;
    let q = chain_joint(q1, transitions)?;
    let sizes = chain_sizes(p1, transitions);
    let (variables, outcomes) = chain_space(&sizes);
    DiscreteSystem::new(variables, outcomes, p, Some(q))
}

/// A structural property of a system that is stable under conditioning.
#[derive(Clone, Debug)]
pub enum StabilityProperty {
    /// Conditional mutual independence of the blocks of a partition.
    Fcmi(ConditionalPartition),
    /// The Markov random field property with respect to a graph.
    Mrf(Graph),
    /// Both distributions are Markov chains with equal transition kernels.
    EqualTransitions,
}

/// Checks that `property`, assumed to hold on `system`, still holds after
/// conditioning on the event `X_vars = values`.
///
/// All checks run on the conditioned distributions through factorization
/// oracles, never through a diagram, so this is ground truth for the
/// stability statements about diagrams.
pub fn verify_stability(
    system: &DiscreteSystem,
    property: &StabilityProperty,
    vars: VarSubset,
    values: &[u16],
) -> Result<bool, Error> {
    let conditioned = system.condition(vars, values)?;
    match property {
        StabilityProperty::Fcmi(partition) => {
            if partition.num_vars() != system.num_vars() {
                return Err(Error::Model(format!(
                    "partition is over {} variables, system has {}",
                    partition.num_vars(),
                    system.num_vars()
                )));
            }
            Ok(conditioned.p_mutually_independent(partition.blocks(), partition.cond()))
        }
        StabilityProperty::Mrf(graph) => {
            if graph.num_vertices() != system.num_vars() {
                return Err(Error::Model(format!(
                    "graph has {} vertices, system has {} variables",
                    graph.num_vertices(),
                    system.num_vars()
                )));
            }
            test_mrf_oracle(graph, MrfMode::Cutset, |a, b, c| {
                Ok(conditioned.p_independent(a, b, c))
            })
        }
        StabilityProperty::EqualTransitions => conditioned.is_shared_transition_chain(),
    }
}

fn chain_sizes(initial: &[f64], transitions: &[Vec<Vec<f64>>]) -> Vec<usize> {
    let mut sizes = vec![initial.len()];
    for t in transitions {
        sizes.push(t.first().map_or(0, |row| row.len()));
    }
    sizes
}

fn chain_space(sizes: &[usize]) -> (Vec<Variable>, Vec<Vec<u16>>) {
    let variables: Vec<Variable> = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| Variable {
            name: format!("X{}", i + 1),
            labels: (0..s).map(|v| v.to_string()).collect(),
        })
        .collect();
    let mut outcomes: Vec<Vec<u16>> = vec![vec![]];
    for &s in sizes {
        outcomes = outcomes
            .into_iter()
            .flat_map(|o| {
                (0..s as u16).map(move |v| {
                    let mut o2 = o.clone();
                    o2.push(v);
                    o2
                })
            })
            .collect();
    }
    (variables, outcomes)
}

fn chain_joint(initial: &[f64], transitions: &[Vec<Vec<f64>>]) -> Result<Vec<f64>, Error> {
    if initial.is_empty() {
        return Err(Error::Model("initial distribution is empty".into()));
    }
    let mut sizes = vec![initial.len()];
    for (k, t) in transitions.iter().enumerate() {
        let from = sizes[k];
        if t.len() != from {
            return Err(Error::Model(format!(
                "transition {} has {} rows but the source has {from} states",
                k + 1,
                t.len()
            )));
        }
        let to = t[0].len();
        if to == 0 {
            return Err(Error::Model(format!("transition {} has empty rows", k + 1)));
        }
        for row in t {
            if row.len() != to {
                return Err(Error::Model(format!("transition {} has ragged rows", k + 1)));
            }
            if row.iter().any(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::Model(format!(
                    "transition {} has a negative or non-finite entry",
                    k + 1
                )));
            }
            let s = kahan_sum(row.iter());
            if (s - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(Error::Model(format!(
                    "transition {} has a row summing to {s}, not 1",
                    k + 1
                )));
            }
        }
        sizes.push(to);
    }
    // Joint mass over the product space, last variable fastest.
    let mut joint = initial.to_vec();
    for t in transitions {
        let to = t[0].len();
        let mut next = Vec::with_capacity(joint.len() * to);
        for (idx, &mass) in joint.iter().enumerate() {
            let state = idx % t.len();
            for b in 0..to {
                next.push(mass * t[state][b]);
            }
        }
        joint = next;
    }
    Ok(joint)
}

/// Which information functional a [`ProbBackend`] evaluates.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Functional {
    Entropy,
    RelativeEntropy,
    CrossEntropy,
}

/// A probability system viewed through one functional, as a diagram backend.
pub struct ProbBackend {
    system: Arc<DiscreteSystem>,
    functional: Functional,
    base: LogBase,
    tolerance: Tolerance,
}

impl ProbBackend {
    pub fn new(
        system: Arc<DiscreteSystem>,
        functional: Functional,
        base: LogBase,
    ) -> Result<Self, Error> {
        if functional != Functional::Entropy && !system.has_q() {
            return Err(Error::MissingQ);
        }
        Ok(ProbBackend {
            system,
            functional,
            base,
            tolerance: Tolerance::default(),
        })
    }

    pub fn with_tolerance(mut self, tolerance: Tolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn system(&self) -> &Arc<DiscreteSystem> {
        &self.system
    }
}

impl Backend for ProbBackend {
    type Value = f64;

    fn num_vars(&self) -> usize {
        self.system.num_vars()
    }

    fn zero(&self) -> f64 {
        0.0
    }

    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }

    fn neg(&self, v: &f64) -> f64 {
        -v
    }

    fn eval(&self, cond: VarSubset, target: VarSubset) -> Result<f64, Error> {
        match self.functional {
            Functional::Entropy => Ok(self.system.entropy(cond, target, self.base)),
            Functional::RelativeEntropy => self.system.relative_entropy(cond, target, self.base),
            Functional::CrossEntropy => self.system.cross_entropy(cond, target, self.base),
        }
    }

    fn magnitude(&self, v: &f64) -> Option<f64> {
        Some(v.abs())
    }

    fn is_zero(&self, v: &f64, scale: f64) -> bool {
        self.tolerance.is_zero(*v, scale)
    }

    fn sum<'a, I>(&self, values: I) -> f64
    where
        I: Iterator<Item = &'a f64>,
    {
        kahan_sum(values)
    }
}
