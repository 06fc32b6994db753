//! The diagram engine: interaction terms, atoms, measures, and the
//! independence predicates built on top of them.
//!
//! Degree-one terms come from a [`Backend`]; everything of higher degree is
//! derived here by the inclusion-exclusion recursion
//!
//! ```text
//! F(Y1; ..; Yq | J) = F(Y1; ..; Y(q-1) | J) - F(Y1; ..; Y(q-1) | J ∪ Yq)
//! ```
//!
//! The resulting signed measure on atoms reproduces every interaction term
//! as the sum over its region, which is what makes the diagram picture
//! consistent: `F(L1; ..; Lq | J)` equals the measure of the atoms that meet
//! every `Lk` and avoid `J`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::backend::Backend;
use crate::error::Error;
use crate::subset::{enumerate_atoms, Atom, VarSubset};

/// A conditioning set together with a partition of the remaining variables.
///
/// The conditioning set may be empty; every block must be nonempty, the
/// blocks must be pairwise disjoint, and blocks plus conditioning set must
/// cover all variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalPartition {
    cond: VarSubset,
    blocks: Vec<VarSubset>,
}

impl ConditionalPartition {
    pub fn new(cond: VarSubset, blocks: Vec<VarSubset>) -> Result<Self, Error> {
        let n = cond.ground_size();
        let mut seen = cond;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition);
            }
            if !seen.is_disjoint(*b) {
                return Err(Error::InvalidPartition);
            }
            seen = seen.union(*b);
        }
        if seen != VarSubset::full(n) {
            return Err(Error::InvalidPartition);
        }
        Ok(ConditionalPartition { cond, blocks })
    }

    pub fn cond(&self) -> VarSubset {
        self.cond
    }

    pub fn num_vars(&self) -> usize {
        self.cond.ground_size()
    }

    pub fn blocks(&self) -> &[VarSubset] {
        &self.blocks
    }

    /// The atoms that must vanish for the blocks to be conditionally
    /// independent given the conditioning set: atoms that avoid the
    /// conditioning set and meet at least two distinct blocks. Needs at
    /// least two blocks to be meaningful.
    pub fn image_atoms(&self) -> Result<Vec<Atom>, Error> {
        if self.blocks.len() < 2 {
            return Err(Error::Precondition(
                "the image needs a partition with at least two blocks".into(),
            ));
        }
        let n = self.cond.ground_size();
        Ok(enumerate_atoms(n)
            .into_iter()
            .filter(|a| {
                let w = a.set();
                if !w.is_disjoint(self.cond) {
                    return false;
                }
                self.blocks.iter().filter(|b| !w.is_disjoint(**b)).count() >= 2
            })
            .collect())
    }
}

/// All atom values of one diagram, in ascending bit-pattern order.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram<V> {
    n: usize,
    values: Vec<V>,
}

impl<V> Diagram<V> {
    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn value(&self, atom: Atom) -> &V {
        &self.values[atom.index()]
    }

    /// `(atom, value)` pairs in ascending bit-pattern order.
    pub fn entries(&self) -> impl Iterator<Item = (Atom, &V)> {
        enumerate_atoms(self.n).into_iter().zip(self.values.iter())
    }
}

/// Result of testing whether a diagram certifies conditional independence of
/// a partition's blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceReport {
    pub holds: bool,
    /// Image atoms whose value failed the zero test, ascending order.
    pub violations: Vec<Atom>,
}

type MemoKey = (u32, Vec<u32>);

/// Evaluates interaction terms and diagrams over a backend, memoizing every
/// intermediate conditioned term.
///
/// Higher-degree terms are symmetric in their argument list, so memoization
/// keys use a sorted argument list; the recursion itself also runs on the
/// sorted list, which keeps floating-point results independent of the
/// caller's argument order and of thread count.
pub struct Evaluator<B: Backend> {
    backend: B,
    verify: bool,
    memo: Mutex<HashMap<MemoKey, B::Value>>,
    cache: OnceLock<(Arc<Diagram<B::Value>>, f64)>,
}

impl<B: Backend> Evaluator<B> {
    pub fn new(backend: B) -> Self {
        Evaluator {
            backend,
            verify: false,
            memo: Mutex::new(HashMap::new()),
            cache: OnceLock::new(),
        }
    }

    /// Enables cross-checking of predicates against an independent
    /// characterization; mismatches surface as [`Error::Verification`].
    pub fn with_verification(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    /// Whether cross-checking of predicates is enabled.
    pub fn verify_enabled(&self) -> bool {
        self.verify
    }

    pub fn num_vars(&self) -> usize {
        self.backend.num_vars()
    }

    /// The conditioned interaction term `F(P1; ..; Pq | cond)`.
    ///
    /// Degree one is a plain backend evaluation; higher degrees use the
    /// inclusion-exclusion recursion. `parts` must be nonempty; parts may
    /// overlap each other or the conditioning set.
    pub fn interaction(&self, cond: VarSubset, parts: &[VarSubset]) -> Result<B::Value, Error> {
        assert!(!parts.is_empty(), "interaction needs at least one argument");
        let mut sorted: Vec<VarSubset> = parts.to_vec();
        sorted.sort();
        self.interaction_sorted(cond, &sorted)
    }

    fn interaction_sorted(&self, cond: VarSubset, parts: &[VarSubset]) -> Result<B::Value, Error> {
        let key: MemoKey = (cond.bits(), parts.iter().map(|p| p.bits()).collect());
        if let Some(v) = self.memo.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let value = if parts.len() == 1 {
            self.backend.eval(cond, parts[0])?
        } else {
            let (last, rest) = parts.split_last().unwrap();
            let plain = self.interaction_sorted(cond, rest)?;
            let conditioned = self.interaction_sorted(cond.union(*last), rest)?;
            self.backend.add(&plain, &self.backend.neg(&conditioned))
        };
        self.memo.lock().unwrap().insert(key, value.clone());
        Ok(value)
    }

    /// The measure of a single atom `p_I`: the interaction term of the
    /// singletons of `I`, conditioned on everything outside `I`.
    pub fn atom_value(&self, atom: Atom) -> Result<B::Value, Error> {
        let set = atom.set();
        let n = set.ground_size();
        let parts: Vec<VarSubset> = set.iter().map(|i| VarSubset::singleton(n, i)).collect();
        self.interaction(set.complement(), &parts)
    }

    /// All atom values. Built once and cached; atoms are evaluated in
    /// parallel but the result is ordered by ascending bit pattern, so the
    /// diagram is identical regardless of thread count.
    pub fn diagram(&self) -> Result<Arc<Diagram<B::Value>>, Error> {
        Ok(self.diagram_and_scale()?.0)
    }

    /// Largest atom magnitude in the diagram (1.0 for exact backends); this
    /// is the scale fed to floating-point zero tests.
    pub fn scale(&self) -> Result<f64, Error> {
        Ok(self.diagram_and_scale()?.1)
    }

    fn diagram_and_scale(&self) -> Result<(Arc<Diagram<B::Value>>, f64), Error> {
        if let Some((d, s)) = self.cache.get() {
            return Ok((d.clone(), *s));
        }
        let n = self.num_vars();
        let atoms = enumerate_atoms(n);
        let values: Vec<B::Value> = atoms
            .par_iter()
            .map(|a| self.atom_value(*a))
            .collect::<Result<_, _>>()?;
        let scale = values
            .iter()
            .filter_map(|v| self.backend.magnitude(v))
            .fold(0.0f64, f64::max);
        let diagram = Arc::new(Diagram { n, values });
        let entry = self.cache.get_or_init(|| (diagram, scale));
        Ok((entry.0.clone(), entry.1))
    }

    /// Zero test against the diagram's scale (exact backends ignore scale).
    pub fn is_zero(&self, value: &B::Value) -> Result<bool, Error> {
        let scale = self.scale()?;
        Ok(self.backend.is_zero(value, scale))
    }

    /// Sum of atom values over a set of atoms, always taken in ascending
    /// bit-pattern order for reproducibility.
    pub fn measure(&self, atoms: &[Atom]) -> Result<B::Value, Error> {
        let diagram = self.diagram()?;
        let mut sorted = atoms.to_vec();
        sorted.sort();
        sorted.dedup();
        let values: Vec<&B::Value> = sorted.iter().map(|a| diagram.value(*a)).collect();
        Ok(self.backend.sum(values.into_iter()))
    }

    /// Recovers one atom's value from interaction terms attached to any atom
    /// set containing it, via the alternating-sum reconstruction
    ///
    /// ```text
    /// value(p_I) = sum over K ⊆ I of (-1)^(|I| - |K|) *
    ///              sum over p_L in A of F(singletons of L | complement(L) ∪ complement(K))
    /// ```
    ///
    /// This exercises the fact that a joint variable's conditioning action
    /// keeps or kills whole atoms, so the measure is determined by far fewer
    /// evaluations than a full diagram; it is primarily a consistency probe.
    pub fn subset_reconstruct(&self, atoms: &[Atom], target: Atom) -> Result<B::Value, Error> {
        if !atoms.contains(&target) {
            return Err(Error::AtomNotInSet { atom: format!("{target}") });
        }
        let n = self.num_vars();
        let set = target.set();
        let mut sorted_atoms = atoms.to_vec();
        sorted_atoms.sort();
        sorted_atoms.dedup();
        let mut terms: Vec<B::Value> = Vec::new();
        for k in set.subsets() {
            let extra_cond = k.complement();
            let mut inner: Vec<B::Value> = Vec::new();
            for a in &sorted_atoms {
                let l = a.set();
                let parts: Vec<VarSubset> =
                    l.iter().map(|i| VarSubset::singleton(n, i)).collect();
                inner.push(self.interaction(l.complement().union(extra_cond), &parts)?);
            }
            let term = self.backend.sum(inner.iter());
            let sign_negative = (set.len() - k.len()) % 2 == 1;
            terms.push(if sign_negative { self.backend.neg(&term) } else { term });
        }
        Ok(self.backend.sum(terms.iter()))
    }

    /// Total correlation of the variables in `vars`, conditioned on `cond`:
    /// the sum of the degree-one terms of the singletons minus the joint.
    pub fn total_correlation(&self, cond: VarSubset, vars: VarSubset) -> Result<B::Value, Error> {
        let n = self.num_vars();
        let mut terms: Vec<B::Value> = Vec::new();
        for i in vars.iter() {
            terms.push(self.backend.eval(cond, VarSubset::singleton(n, i))?);
        }
        let joint = self.backend.eval(cond, vars)?;
        terms.push(self.backend.neg(&joint));
        Ok(self.backend.sum(terms.iter()))
    }

    /// Dual total correlation of the variables in `vars`, conditioned on
    /// `cond`: the joint term minus each variable's term conditioned on all
    /// the others.
    pub fn dual_total_correlation(
        &self,
        cond: VarSubset,
        vars: VarSubset,
    ) -> Result<B::Value, Error> {
        let n = self.num_vars();
        let mut terms: Vec<B::Value> = vec![self.backend.eval(cond, vars)?];
        for i in vars.iter() {
            let single = VarSubset::singleton(n, i);
            let rest = vars.difference(single);
            let v = self.backend.eval(cond.union(rest), single)?;
            terms.push(self.backend.neg(&v));
        }
        Ok(self.backend.sum(terms.iter()))
    }

    /// Total correlation minus dual total correlation.
    pub fn o_information(&self, cond: VarSubset, vars: VarSubset) -> Result<B::Value, Error> {
        let tc = self.total_correlation(cond, vars)?;
        let dtc = self.dual_total_correlation(cond, vars)?;
        Ok(self.backend.add(&tc, &self.backend.neg(&dtc)))
    }

    /// Total correlation plus dual total correlation.
    pub fn s_information(&self, cond: VarSubset, vars: VarSubset) -> Result<B::Value, Error> {
        let tc = self.total_correlation(cond, vars)?;
        let dtc = self.dual_total_correlation(cond, vars)?;
        Ok(self.backend.add(&tc, &dtc))
    }

    /// Conditional independence of two joint variables given a third:
    /// true when the degree-two term `F(a; b | cond)` is zero.
    pub fn is_independent(
        &self,
        a: VarSubset,
        b: VarSubset,
        cond: VarSubset,
    ) -> Result<bool, Error> {
        let v = self.interaction(cond, &[a, b])?;
        self.is_zero(&v)
    }

    /// Mutual independence of pairwise-disjoint joint variables given
    /// `cond`: true when the conditioned dual total correlation of the
    /// composite blocks vanishes.
    ///
    /// In verification mode, also checks the two equivalent
    /// characterizations (all interaction terms among two or more blocks
    /// conditioned on the remaining blocks vanish; each block is independent
    /// of the union of the others) and fails if they disagree.
    pub fn is_mutually_independent(
        &self,
        blocks: &[VarSubset],
        cond: VarSubset,
    ) -> Result<bool, Error> {
        for (i, a) in blocks.iter().enumerate() {
            for b in &blocks[i + 1..] {
                if !a.is_disjoint(*b) {
                    return Err(Error::NotDisjoint {
                        context: format!("blocks {a} and {b} overlap"),
                    });
                }
            }
        }
        let union = blocks
            .iter()
            .fold(VarSubset::empty(self.num_vars()), |acc, b| acc.union(*b));

        // Dual-total-correlation criterion over composite blocks.
        let mut terms: Vec<B::Value> = vec![self.backend.eval(cond, union)?];
        for b in blocks {
            let rest = union.difference(*b);
            let v = self.backend.eval(cond.union(rest), *b)?;
            terms.push(self.backend.neg(&v));
        }
        let dtc = self.backend.sum(terms.iter());
        let holds = self.is_zero(&dtc)?;

        if self.verify {
            // Every interaction term among two or more blocks, conditioned
            // on the remaining blocks, must vanish exactly when `holds`.
            let q = blocks.len();
            let mut by_terms = true;
            'outer: for mask in 0u32..(1 << q) {
                if mask.count_ones() < 2 {
                    continue;
                }
                let chosen: Vec<VarSubset> = (0..q)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| blocks[i])
                    .collect();
                let others = (0..q)
                    .filter(|i| mask & (1 << i) == 0)
                    .fold(cond, |acc, i| acc.union(blocks[i]));
                let v = self.interaction(others, &chosen)?;
                if !self.is_zero(&v)? {
                    by_terms = false;
                    break 'outer;
                }
            }
            let mut by_pairs = true;
            for b in blocks {
                let rest = union.difference(*b);
                if !self.is_independent(*b, rest, cond)? {
                    by_pairs = false;
                    break;
                }
            }
            if by_terms != holds || by_pairs != holds {
                return Err(Error::Verification(format!(
                    "mutual independence characterizations disagree: \
                     dual total correlation says {holds}, interaction terms \
                     say {by_terms}, block-vs-rest says {by_pairs}"
                )));
            }
        }
        Ok(holds)
    }

    /// Tests conditional independence of a partition's blocks by checking
    /// that every image atom of the partition vanishes in the diagram.
    ///
    /// In verification mode, cross-checks against
    /// [`Self::is_mutually_independent`].
    pub fn test_partition_independence(
        &self,
        partition: &ConditionalPartition,
    ) -> Result<IndependenceReport, Error> {
        let diagram = self.diagram()?;
        let scale = self.scale()?;
        let mut violations = Vec::new();
        for atom in partition.image_atoms()? {
            if !self.backend.is_zero(diagram.value(atom), scale) {
                violations.push(atom);
            }
        }
        let holds = violations.is_empty();
        if self.verify {
            let direct = self.is_mutually_independent(partition.blocks(), partition.cond())?;
            if direct != holds {
                return Err(Error::Verification(format!(
                    "partition independence characterizations disagree: \
                     image atoms say {holds}, dual total correlation says {direct}"
                )));
            }
        }
        Ok(IndependenceReport { holds, violations })
    }
}
