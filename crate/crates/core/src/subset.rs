//! Subsets of a fixed variable index set `{0, .., n-1}`, stored as bitmasks.
//!
//! Everything in this crate is indexed against a fixed ground set of `n`
//! variables with `n <= MAX_VARS`. A [`VarSubset`] is a plain bitmask over
//! that ground set; an [`Atom`] is a nonempty subset naming one cell of the
//! diagram over the ground set (the cell of points that lie in exactly the
//! named variable regions and in no others).

use std::fmt;

use crate::error::Error;

/// Hard cap on the number of variables; diagrams have `2^n - 1` atoms.
pub const MAX_VARS: usize = 16;

/// A subset of the variable indices `{0, .., n-1}`, as a bitmask.
///
/// The ground-set size `n` is carried along so that complements are well
/// defined and mixed-arity operations are caught early.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSubset {
    bits: u32,
    n: u8,
}

impl VarSubset {
    /// The empty subset of a ground set of `n` variables.
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_VARS, "ground set larger than {MAX_VARS}");
        VarSubset { bits: 0, n: n as u8 }
    }

    /// The full ground set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VARS, "ground set larger than {MAX_VARS}");
        VarSubset {
            bits: if n == 0 { 0 } else { (1u32 << n) - 1 },
            n: n as u8,
        }
    }

    /// The singleton `{i}`.
    pub fn singleton(n: usize, i: usize) -> Self {
        let mut s = Self::empty(n);
        s.insert(i);
        s
    }

    /// Builds a subset from raw bits; bits outside the ground set are an error.
    pub fn from_bits(n: usize, bits: u32) -> Result<Self, Error> {
        if n > MAX_VARS {
            return Err(Error::GroundSetTooLarge { n });
        }
        if bits & !Self::full(n).bits != 0 {
            return Err(Error::VariableOutOfRange { index: 32 - bits.leading_zeros() as usize, n });
        }
        Ok(VarSubset { bits, n: n as u8 })
    }

    /// Builds a subset from 0-based variable indices.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self, Error> {
        let mut s = Self::empty(n);
        for &i in indices {
            if i >= n {
                return Err(Error::VariableOutOfRange { index: i, n });
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Raw bitmask.
    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Ground-set size this subset lives in.
    pub fn ground_size(self) -> usize {
        self.n as usize
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < self.n as usize && self.bits & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n as usize, "variable index out of range");
        self.bits |= 1 << i;
    }

    pub fn is_subset_of(self, other: VarSubset) -> bool {
        self.assert_same_ground(other);
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint(self, other: VarSubset) -> bool {
        self.assert_same_ground(other);
        self.bits & other.bits == 0
    }

    pub fn union(self, other: VarSubset) -> VarSubset {
        self.assert_same_ground(other);
        VarSubset { bits: self.bits | other.bits, n: self.n }
    }

    pub fn intersection(self, other: VarSubset) -> VarSubset {
        self.assert_same_ground(other);
        VarSubset { bits: self.bits & other.bits, n: self.n }
    }

    pub fn difference(self, other: VarSubset) -> VarSubset {
        self.assert_same_ground(other);
        VarSubset { bits: self.bits & !other.bits, n: self.n }
    }

    /// Complement within the ground set.
    pub fn complement(self) -> VarSubset {
        VarSubset {
            bits: Self::full(self.n as usize).bits & !self.bits,
            n: self.n,
        }
    }

    /// Iterates the member indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.n as usize).filter(move |i| bits & (1 << i) != 0)
    }

    /// All subsets of `self`, in ascending bit-pattern order (includes the
    /// empty set and `self` itself).
    pub fn subsets(self) -> impl Iterator<Item = VarSubset> {
        let n = self.n;
        let mask = self.bits;
        // Enumerate all bit patterns under the full ground mask and keep the
        // ones inside `mask`; for small n this is cheap and keeps the
        // ascending order guarantee trivially true.
        SubsetIter { mask, cur: 0, done: false, n }
    }

    fn assert_same_ground(self, other: VarSubset) {
        assert_eq!(self.n, other.n, "subsets over different ground sets");
    }
}

/// Iterates submasks of `mask` in ascending numeric order.
struct SubsetIter {
    mask: u32,
    cur: u32,
    done: bool,
    n: u8,
}

impl Iterator for SubsetIter {
    type Item = VarSubset;

    fn next(&mut self) -> Option<VarSubset> {
        if self.done {
            return None;
        }
        let out = VarSubset { bits: self.cur, n: self.n };
        if self.cur == self.mask {
            self.done = true;
        } else {
            // Standard submask increment: skip straight to the next submask.
            self.cur = (self.cur.wrapping_sub(self.mask)) & self.mask;
        }
        Some(out)
    }
}

impl fmt::Debug for VarSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            // 1-based in human-facing output.
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for VarSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One cell of the diagram: a nonempty subset `I` naming the cell of points
/// covered by exactly the variables in `I`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(VarSubset);

impl Atom {
    pub fn new(set: VarSubset) -> Result<Self, Error> {
        if set.is_empty() {
            return Err(Error::EmptyAtom);
        }
        Ok(Atom(set))
    }

    pub fn set(self) -> VarSubset {
        self.0
    }

    /// Position of this atom in the ascending bit-pattern enumeration
    /// (`{1}` is 0, `{2}` is 1, `{1,2}` is 2, ...).
    pub fn index(self) -> usize {
        self.0.bits() as usize - 1
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{:?}", self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// All `2^n - 1` atoms over `n` variables, in ascending bit-pattern order.
pub fn enumerate_atoms(n: usize) -> Vec<Atom> {
    assert!(n <= MAX_VARS, "ground set larger than {MAX_VARS}");
    (1..(1u32 << n))
        .map(|bits| Atom(VarSubset { bits, n: n as u8 }))
        .collect()
}

/// Atoms making up a conditioned intersection region: the atoms `p_W` with
/// `W` meeting every set in `parts` and avoiding `cond`.
///
/// This is the cell set whose measure equals the conditioned interaction
/// term of `parts` given `cond`.
pub fn region(n: usize, parts: &[VarSubset], cond: VarSubset) -> Vec<Atom> {
    enumerate_atoms(n)
        .into_iter()
        .filter(|a| {
            let w = a.set();
            parts.iter().all(|p| !w.is_disjoint(*p)) && w.is_disjoint(cond)
        })
        .collect()
}
