//! Exact finite algebraic models: a commutative idempotent monoid acting
//! additively on a finite abelian group, together with the functions that
//! satisfy the chain rule
//!
//! ```text
//! F(x * y) = F(x) + x.F(y)
//! ```
//!
//! These models drive the same diagram machinery as probability systems,
//! but with exact group arithmetic: zero tests are equality with the group
//! identity, and no tolerances are involved. They are small enough that all
//! algebraic laws are verified exhaustively at construction time.

use std::sync::Arc;

use crate::backend::Backend;
use crate::error::Error;
use crate::subset::{VarSubset, MAX_VARS};

/// Cap on monoid size; laws are checked on all `size^3` triples.
pub const MAX_MONOID: usize = 64;

/// Cap on group order.
pub const MAX_GROUP: usize = 256;

/// Cap on the brute-force search space when enumerating all chain-rule
/// functions of a model.
const MAX_COCYCLE_SEARCH: u128 = 4_000_000;

/// A finite commutative idempotent monoid, given by its multiplication
/// table. All laws are verified exhaustively on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMonoid {
    size: usize,
    identity: usize,
    /// Row-major `size x size` table of element indices.
    table: Vec<usize>,
}

impl FiniteMonoid {
    pub fn new(table: Vec<Vec<usize>>, identity: usize) -> Result<Self, Error> {
        let size = table.len();
        if size == 0 || size > MAX_MONOID {
            return Err(Error::Algebra(format!(
                "monoid size must be between 1 and {MAX_MONOID}"
            )));
        }
        if identity >= size {
            return Err(Error::Algebra("identity index out of range".into()));
        }
        let mut flat = Vec::with_capacity(size * size);
        for row in &table {
            if row.len() != size {
                return Err(Error::Algebra("multiplication table is not square".into()));
            }
            for &v in row {
                if v >= size {
                    return Err(Error::Algebra("table entry out of range".into()));
                }
                flat.push(v);
            }
        }
        let m = FiniteMonoid { size, identity, table: flat };
        for x in 0..size {
            if m.mul(m.identity, x) != x || m.mul(x, m.identity) != x {
                return Err(Error::Algebra(format!("{identity} is not an identity")));
            }
            if m.mul(x, x) != x {
                return Err(Error::Algebra(format!("element {x} is not idempotent")));
            }
            for y in 0..size {
                if m.mul(x, y) != m.mul(y, x) {
                    return Err(Error::Algebra(format!("{x} and {y} do not commute")));
                }
                for z in 0..size {
                    if m.mul(m.mul(x, y), z) != m.mul(x, m.mul(y, z)) {
                        return Err(Error::Algebra(format!(
                            "associativity fails on ({x}, {y}, {z})"
                        )));
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x * self.size + y]
    }

    /// Product of a list of elements (identity for the empty list).
    pub fn product(&self, xs: impl Iterator<Item = usize>) -> usize {
        xs.fold(self.identity, |acc, x| self.mul(acc, x))
    }

    /// The absorbing element `t` with `x * t = t` for all `x`, if present.
    /// It is unique when it exists.
    pub fn top(&self) -> Option<usize> {
        (0..self.size).find(|&t| (0..self.size).all(|x| self.mul(x, t) == t))
    }
}

/// A finite abelian group presented as a product of cyclic factors
/// `Z/c1 x .. x Z/ck`. Elements are indices in mixed-radix order (last
/// factor fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteAbelianGroup {
    factors: Vec<u32>,
    order: usize,
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u32>) -> Result<Self, Error> {
        if factors.iter().any(|&c| c == 0) {
            return Err(Error::Algebra("cyclic factors must be positive".into()));
        }
        let order: u128 = factors.iter().map(|&c| c as u128).product();
        if order == 0 || order > MAX_GROUP as u128 {
            return Err(Error::Algebra(format!(
                "group order must be between 1 and {MAX_GROUP}"
            )));
        }
        Ok(FiniteAbelianGroup { factors, order: order as usize })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn zero(&self) -> usize {
        0
    }

    /// Mixed-radix tuple of an element index.
    pub fn tuple(&self, mut idx: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.factors.len()];
        for (k, &c) in self.factors.iter().enumerate().rev() {
            out[k] = (idx % c as usize) as u32;
            idx /= c as usize;
        }
        out
    }

    /// Element index of a mixed-radix tuple (entries reduced mod factors).
    pub fn index(&self, tuple: &[u32]) -> Result<usize, Error> {
        if tuple.len() != self.factors.len() {
            return Err(Error::Algebra(format!(
                "tuple has {} entries, group has {} factors",
                tuple.len(),
                self.factors.len()
            )));
        }
        let mut idx = 0usize;
        for (&v, &c) in tuple.iter().zip(self.factors.iter()) {
            idx = idx * c as usize + (v % c) as usize;
        }
        Ok(idx)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let ta = self.tuple(a);
        let tb = self.tuple(b);
        let sum: Vec<u32> = ta
            .iter()
            .zip(tb.iter())
            .zip(self.factors.iter())
            .map(|((&x, &y), &c)| (x + y) % c)
            .collect();
        self.index(&sum).unwrap()
    }

    pub fn neg(&self, a: usize) -> usize {
        let t: Vec<u32> = self
            .tuple(a)
            .iter()
            .zip(self.factors.iter())
            .map(|(&x, &c)| (c - x) % c)
            .collect();
        self.index(&t).unwrap()
    }
}

/// A monoid action on a group by additive maps, as a `|M| x |G|` table of
/// element indices. Verified exhaustively: the identity acts trivially,
/// every element acts by a group endomorphism, and acting twice agrees with
/// acting by the product.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractModel {
    monoid: FiniteMonoid,
    group: FiniteAbelianGroup,
    /// `action[x * order + g]` is the index of `x.g`.
    action: Vec<usize>,
}

impl AbstractModel {
    pub fn new(
        monoid: FiniteMonoid,
        group: FiniteAbelianGroup,
        action: Vec<Vec<usize>>,
    ) -> Result<Self, Error> {
        let m = monoid.size();
        let o = group.order();
        if action.len() != m {
            return Err(Error::Algebra("action table needs one row per monoid element".into()));
        }
        let mut flat = Vec::with_capacity(m * o);
        for row in &action {
            if row.len() != o {
                return Err(Error::Algebra("action table row has wrong length".into()));
            }
            for &v in row {
                if v >= o {
                    return Err(Error::Algebra("action table entry out of range".into()));
                }
                flat.push(v);
            }
        }
        let model = AbstractModel { monoid, group, action: flat };
        let e = model.monoid.identity();
        for g in 0..o {
            if model.act(e, g) != g {
                return Err(Error::Algebra("identity does not act trivially".into()));
            }
        }
        for x in 0..m {
            if model.act(x, model.group.zero()) != model.group.zero() {
                return Err(Error::Algebra(format!("element {x} does not fix 0")));
            }
            for g in 0..o {
                for h in 0..o {
                    let lhs = model.act(x, model.group.add(g, h));
                    let rhs = model.group.add(model.act(x, g), model.act(x, h));
                    if lhs != rhs {
                        return Err(Error::Algebra(format!(
                            "element {x} does not act additively on ({g}, {h})"
                        )));
                    }
                }
            }
            for y in 0..m {
                let xy = model.monoid.mul(x, y);
                for g in 0..o {
                    if model.act(x, model.act(y, g)) != model.act(xy, g) {
                        return Err(Error::Algebra(format!(
                            "action is not compatible with multiplication on ({x}, {y}, {g})"
                        )));
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn monoid(&self) -> &FiniteMonoid {
        &self.monoid
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// `x.g` as a group element index.
    pub fn act(&self, x: usize, g: usize) -> usize {
        self.action[x * self.group.order() + g]
    }

    /// The subgroup `{ g : top.g = 0 }` of elements killed by the absorbing
    /// element, listed in ascending index order. Errors when the monoid has
    /// no absorbing element.
    pub fn top_killed(&self) -> Result<Vec<usize>, Error> {
        let top = self
            .monoid
            .top()
            .ok_or_else(|| Error::Algebra("monoid has no absorbing element".into()))?;
        Ok((0..self.group.order())
            .filter(|&g| self.act(top, g) == self.group.zero())
            .collect())
    }

    /// The chain-rule function `x -> g - x.g` generated by a group element
    /// with `top.g = 0`. When the monoid has an absorbing element, this is
    /// a bijection from such `g` onto all chain-rule functions, with inverse
    /// [`Self::evaluate_at_top`].
    pub fn generate_cocycle(&self, g: usize) -> Result<Cocycle, Error> {
        if g >= self.group.order() {
            return Err(Error::Algebra("generator index out of range".into()));
        }
        let killed = self.top_killed()?;
        if !killed.contains(&g) {
            return Err(Error::Algebra(format!(
                "generator {g} is not killed by the absorbing element"
            )));
        }
        let values = (0..self.monoid.size())
            .map(|x| self.group.add(g, self.group.neg(self.act(x, g))))
            .collect();
        Cocycle::new(self, values)
    }

    /// Evaluates a chain-rule function at the absorbing element, inverting
    /// [`Self::generate_cocycle`].
    pub fn evaluate_at_top(&self, cocycle: &Cocycle) -> Result<usize, Error> {
        let top = self
            .monoid
            .top()
            .ok_or_else(|| Error::Algebra("monoid has no absorbing element".into()))?;
        Ok(cocycle.value(top))
    }

    /// All functions `M -> G` satisfying the chain rule, by exhaustive
    /// search. Errors when `|G|^|M|` is unreasonably large.
    pub fn enumerate_cocycles(&self) -> Result<Vec<Cocycle>, Error> {
        let m = self.monoid.size();
        let o = self.group.order() as u128;
        let space = o.checked_pow(m as u32).unwrap_or(u128::MAX);
        if space > MAX_COCYCLE_SEARCH {
            return Err(Error::Algebra(format!(
                "cocycle search space {space} is too large"
            )));
        }
        let mut out = Vec::new();
        let mut values = vec![0usize; m];
        loop {
            if let Ok(c) = Cocycle::new(self, values.clone()) {
                out.push(c);
            }
            // Mixed-radix increment over the value vector.
            let mut k = m;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                values[k] += 1;
                if values[k] < self.group.order() {
                    break;
                }
                values[k] = 0;
            }
        }
    }
}

/// A function from the monoid to the group satisfying the chain rule,
/// verified exhaustively on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    values: Vec<usize>,
}

impl Cocycle {
    pub fn new(model: &AbstractModel, values: Vec<usize>) -> Result<Self, Error> {
        let m = model.monoid.size();
        if values.len() != m {
            return Err(Error::Algebra("cocycle needs one value per monoid element".into()));
        }
        if values.iter().any(|&v| v >= model.group.order()) {
            return Err(Error::Algebra("cocycle value out of range".into()));
        }
        for x in 0..m {
            for y in 0..m {
                let lhs = values[model.monoid.mul(x, y)];
                let rhs = model.group.add(values[x], model.act(x, values[y]));
                if lhs != rhs {
                    return Err(Error::Algebra(format!(
                        "chain rule fails on ({x}, {y})"
                    )));
                }
            }
        }
        Ok(Cocycle { values })
    }

    pub fn value(&self, x: usize) -> usize {
        self.values[x]
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

/// A model, a chain-rule function, and an assignment of monoid elements to
/// variables; together these drive the diagram machinery exactly.
pub struct AlgebraBackend {
    model: Arc<AbstractModel>,
    cocycle: Cocycle,
    vars: Vec<usize>,
}

impl AlgebraBackend {
    pub fn new(
        model: Arc<AbstractModel>,
        cocycle: Cocycle,
        vars: Vec<usize>,
    ) -> Result<Self, Error> {
        if vars.is_empty() || vars.len() > MAX_VARS {
            return Err(Error::Algebra(format!(
                "variable count must be between 1 and {MAX_VARS}"
            )));
        }
        if vars.iter().any(|&x| x >= model.monoid().size()) {
            return Err(Error::Algebra("variable refers to a monoid element out of range".into()));
        }
        if cocycle.values().len() != model.monoid().size() {
            return Err(Error::Algebra("cocycle does not match the model".into()));
        }
        Ok(AlgebraBackend { model, cocycle, vars })
    }

    pub fn model(&self) -> &Arc<AbstractModel> {
        &self.model
    }

    fn joint(&self, vars: VarSubset) -> usize {
        self.model.monoid().product(vars.iter().map(|i| self.vars[i]))
    }
}

impl Backend for AlgebraBackend {
    /// Group element index; comparisons are exact.
    type Value = usize;

    fn num_vars(&self) -> usize {
        self.vars.len()
    }

    fn zero(&self) -> usize {
        self.model.group().zero()
    }

    fn add(&self, a: &usize, b: &usize) -> usize {
        self.model.group().add(*a, *b)
    }

    fn neg(&self, v: &usize) -> usize {
        self.model.group().neg(*v)
    }

    fn eval(&self, cond: VarSubset, target: VarSubset) -> Result<usize, Error> {
        let value = self.cocycle.value(self.joint(target));
        Ok(self.model.act(self.joint(cond), value))
    }

    fn magnitude(&self, _v: &usize) -> Option<f64> {
        None
    }

    fn is_zero(&self, v: &usize, _scale: f64) -> bool {
        *v == self.model.group().zero()
    }
}

/// The smallest model where total-correlation-style criteria break down:
/// the multiplicative monoid `{1, 0}` acting on `Z/2` by multiplication,
/// with the chain-rule function `F(x) = 1 - x` and three variables all
/// equal to the absorbing element `0`.
///
/// Here `TC(X1; X2; X3) = 1 + 1 = 0` because the group has 2-torsion, yet
/// the variables are not mutually independent: `F(X3; X1 X2) = 1`.
pub fn torsion_model() -> (Arc<AbstractModel>, Cocycle, Vec<usize>) {
    // Element 0 is the multiplicative identity 1; element 1 is 0.
    let monoid = FiniteMonoid::new(vec![vec![0, 1], vec![1, 1]], 0).unwrap();
    let group = FiniteAbelianGroup::new(vec![2]).unwrap();
    // 1 acts trivially; 0 kills everything.
    let model =
        AbstractModel::new(monoid, group, vec![vec![0, 1], vec![0, 0]]).unwrap();
    let cocycle = Cocycle::new(&model, vec![0, 1]).unwrap();
    (Arc::new(model), cocycle, vec![1, 1, 1])
}
