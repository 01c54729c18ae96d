//! Back-and-forth for the catalog structures.
//!
//! Extension rules:
//!
//! * `(ℚ,<)`: the image of a fresh point is read off the piecewise-linear
//!   map through the current anchors, with slope 1 beyond the outermost
//!   anchors (identity when there are none). Points added this way lie on
//!   the same piecewise-linear graph, so an automorphism is a closed-form
//!   function of its seed and answers do not depend on query order.
//! * Rado graph: the image of a fresh vertex is the least vertex below 64
//!   with the required adjacency pattern over the current pairs. Failing
//!   that, it is a vertex `≥ 2^63` whose low bits encode the pattern and whose
//!   unconstrained low bits come from a generator seeded by the pattern (see
//!   [`rado_back_forth_witness`]). Answers are reproducible for a fixed query
//!   sequence; [`LazyAutomorphism::eval_batch`] processes a query set in
//!   canonical order.
//!
//! Vertices at or above 64 are pairwise non-adjacent in the 64-bit BIT
//! presentation, so a partial map can only grow while the low vertices
//! still offer witnesses. Exhaustion surfaces as `BudgetExceeded`.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnspace::{rat, Bijection, Carrier, Elem, FinOp, Rational, Window};
use crate::structures::{rado_adjacency, PartialIso, RelStructure};

/// Random fillings tried for a high witness.
const HIGH_WITNESS_TRIES: usize = 256;

fn separates(w: u64, u: &[u64], v: &[u64], avoid: &[u64]) -> bool {
    !avoid.contains(&w)
        && u.iter().all(|&x| x != w && rado_adjacency(x, w).unwrap())
        && v.iter().all(|&x| x != w && !rado_adjacency(x, w).unwrap())
}

/// Witness used by the Rado extension step: the least vertex below 64
/// adjacent to `U`, non-adjacent to `V` and outside `avoid`, otherwise a
/// vertex with bit 63 set, bits in `U ∩ [0,64)` set, bits in `V ∩ [0,64)`
/// clear and the remaining bits drawn from a generator seeded by `(U, V)`.
/// Spreading the free bits keeps later witnesses below 64 available for
/// both adjacency and non-adjacency to the new vertex.
pub fn rado_back_forth_witness(u: &[u64], v: &[u64], avoid: &[u64]) -> Result<u64> {
    if let Some(w) = (0..64).find(|&w| separates(w, u, v, avoid)) {
        return Ok(w);
    }
    let mut key: u64 = 0xcbf2_9ce4_8422_2325;
    let mut mix = |x: u64| {
        key ^= x;
        key = key.wrapping_mul(0x0100_0000_01b3);
    };
    let (mut su, mut sv) = (u.to_vec(), v.to_vec());
    su.sort_unstable();
    sv.sort_unstable();
    su.iter().for_each(|&x| mix(x));
    mix(u64::MAX);
    sv.iter().for_each(|&x| mix(x));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    for _ in 0..HIGH_WITNESS_TRIES {
        let mut w = rng.gen::<u64>() | (1 << 63);
        u.iter().filter(|&&x| x < 64).for_each(|&x| w |= 1 << x);
        v.iter().filter(|&&x| x < 64).for_each(|&x| w &= !(1 << x));
        if separates(w, u, v, avoid) {
            return Ok(w);
        }
    }
    Err(Error::BudgetExceeded { what: "Rado witnesses in 64-bit vertices", cap: HIGH_WITNESS_TRIES })
}

/// Default number of points probed by [`noncommuting_witness`].
pub const DEFAULT_PROBE_BUDGET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Catalog {
    RationalsOrder,
    Rado,
}

impl Catalog {
    pub fn of(s: &RelStructure) -> Result<Catalog> {
        match s.name() {
            Some("rationals-order") => Ok(Catalog::RationalsOrder),
            Some("rado") => Ok(Catalog::Rado),
            _ => Err(Error::Unsupported("back-and-forth outside the catalog")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Catalog::RationalsOrder => "rationals-order",
            Catalog::Rado => "rado",
        }
    }

    pub fn structure(self) -> RelStructure {
        match self {
            Catalog::RationalsOrder => RelStructure::rationals_order(),
            Catalog::Rado => RelStructure::rado(),
        }
    }

    pub fn carrier(self) -> Carrier {
        match self {
            Catalog::RationalsOrder => Carrier::Rationals,
            Catalog::Rado => Carrier::Rado,
        }
    }

    /// Default window `{-k..k}` for the rationals, `{0..k}` for Rado.
    pub fn default_window(self, k: u64) -> Window {
        let points: Vec<Elem> = match self {
            Catalog::RationalsOrder => (-(k as i64)..=k as i64).map(|i| Elem::Rat(rat(i, 1))).collect(),
            Catalog::Rado => (0..=k).map(Elem::Nat).collect(),
        };
        Window::new(&self.carrier(), points).expect("catalog points")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

fn as_rat(e: &Elem) -> Result<&Rational> {
    e.rat().ok_or_else(|| Error::NotInCarrier(e.clone()))
}

fn as_nat(e: &Elem) -> Result<u64> {
    e.nat().ok_or_else(|| Error::NotInCarrier(e.clone()))
}

/// Value at `x` of the piecewise-linear map through `anchors` (sorted by
/// source, increasing in both coordinates), slope 1 outside them.
fn pl_value<'a>(anchors: impl Iterator<Item = (&'a Elem, &'a Elem)>, x: &Rational) -> Result<Rational> {
    let mut below: Option<(Rational, Rational)> = None;
    let mut above: Option<(Rational, Rational)> = None;
    for (a, b) in anchors {
        let (a, b) = (as_rat(a)?, as_rat(b)?);
        if a == x {
            return Ok(b.clone());
        }
        if a < x {
            below = Some((a.clone(), b.clone()));
        } else {
            above = Some((a.clone(), b.clone()));
            break;
        }
    }
    Ok(match (below, above) {
        (None, None) => x.clone(),
        (Some((a, b)), None) => b + (x - a),
        (None, Some((a, b))) => b - (a - x),
        (Some((a0, b0)), Some((a1, b1))) => &b0 + (x - &a0) * (&b1 - &b0) / (&a1 - &a0),
    })
}

fn rado_pattern(p: &PartialIso, x: u64, dir: Direction) -> Result<(Vec<u64>, Vec<u64>, Vec<u64>)> {
    let (mut u, mut v) = (Vec::new(), Vec::new());
    let pairs: Vec<(u64, u64)> = p.pairs().map(|(a, b)| Ok((as_nat(a)?, as_nat(b)?))).collect::<Result<_>>()?;
    for (a, b) in pairs {
        let (known, other) = match dir {
            Direction::Forward => (a, b),
            Direction::Backward => (b, a),
        };
        if rado_adjacency(known, x)? {
            u.push(other);
        } else {
            v.push(other);
        }
    }
    let taken: Vec<u64> = match dir {
        Direction::Forward => p.range().map(as_nat).collect::<Result<_>>()?,
        Direction::Backward => p.domain().map(as_nat).collect::<Result<_>>()?,
    };
    Ok((u, v, taken))
}

/// Extends `p` by one pair with `target` on the given side, preserving and
/// reflecting the catalog relation.
pub fn extend_step(a: &RelStructure, p: &PartialIso, target: &Elem, dir: Direction) -> Result<PartialIso> {
    extend_step_avoiding(Catalog::of(a)?, p, target, dir, &[])
}

fn extend_step_avoiding(
    catalog: Catalog,
    p: &PartialIso,
    target: &Elem,
    dir: Direction,
    avoid: &[u64],
) -> Result<PartialIso> {
    catalog.carrier().check(target)?;
    let present = match dir {
        Direction::Forward => p.get(target).is_some(),
        Direction::Backward => p.get_inverse(target).is_some(),
    };
    if present {
        return Err(Error::Invalid(format!("{target} already mapped")));
    }
    let partner = match catalog {
        Catalog::RationalsOrder => {
            let x = as_rat(target)?;
            let v = match dir {
                Direction::Forward => pl_value(p.pairs(), x)?,
                Direction::Backward => pl_value(p.inverse().pairs(), x)?,
            };
            Elem::Rat(v)
        }
        Catalog::Rado => {
            let (u, v, taken) = rado_pattern(p, as_nat(target)?, dir)?;
            let avoid: Vec<u64> = taken.into_iter().chain(avoid.iter().copied()).collect();
            Elem::Nat(rado_back_forth_witness(&u, &v, &avoid)?)
        }
    };
    let mut next = p.clone();
    match dir {
        Direction::Forward => next.insert(target.clone(), partner)?,
        Direction::Backward => next.insert(partner, target.clone())?,
    }
    Ok(next)
}

/// Forward extension of `p` at `target` with a partner different from the
/// one [`extend_step`] picks: for the rationals the midpoint between the
/// canonical image and the next anchor image above (or the canonical image
/// plus one), for Rado the next witness after excluding the canonical one.
pub fn alternative_step(catalog: Catalog, p: &PartialIso, target: &Elem) -> Result<PartialIso> {
    let canonical = extend_step_avoiding(catalog, p, target, Direction::Forward, &[])?;
    let c = canonical.get(target).unwrap().clone();
    let partner = match catalog {
        Catalog::RationalsOrder => {
            let x = as_rat(target)?;
            let above = p.pairs().find(|(a, _)| a.rat().is_some_and(|a| a > x)).map(|(_, b)| b.clone());
            let c = as_rat(&c)?;
            Elem::Rat(match above {
                Some(hi) => (c + as_rat(&hi)?) / rat(2, 1),
                None => c + Rational::one(),
            })
        }
        Catalog::Rado => {
            let (u, v, taken) = rado_pattern(p, as_nat(target)?, Direction::Forward)?;
            let avoid: Vec<u64> = taken.into_iter().chain([as_nat(&c)?]).collect();
            Elem::Nat(rado_back_forth_witness(&u, &v, &avoid)?)
        }
    };
    let mut next = p.clone();
    next.insert(target.clone(), partner)?;
    Ok(next)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub direction: Direction,
    pub point: Elem,
    pub image: Elem,
}

/// Queried points, their images and whether the queried pairs form a
/// partial isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub structure: String,
    pub seed: PartialIso,
    pub queries: Vec<Query>,
    pub verified: bool,
}

/// An automorphism of a catalog structure, built on demand from a seed.
#[derive(Clone, Debug)]
pub struct LazyAutomorphism {
    catalog: Catalog,
    seed: PartialIso,
    memo: PartialIso,
    queries: Vec<Query>,
}

/// Checks the seed and starts an automorphism from it.
pub fn automorphism_from(a: &RelStructure, seed: PartialIso) -> Result<LazyAutomorphism> {
    LazyAutomorphism::new(Catalog::of(a)?, seed)
}

/// The automorphism started from `{x ↦ y}`.
pub fn transitivity_witness(a: &RelStructure, x: &Elem, y: &Elem) -> Result<LazyAutomorphism> {
    automorphism_from(a, PartialIso::from_pairs([(x.clone(), y.clone())])?)
}

impl LazyAutomorphism {
    pub fn new(catalog: Catalog, seed: PartialIso) -> Result<LazyAutomorphism> {
        let s = catalog.structure();
        if !seed.is_partial_iso(&s, &s)? {
            return Err(Error::InvalidSeed(format!("{seed} is not a partial isomorphism of {}", catalog.name())));
        }
        Ok(LazyAutomorphism { catalog, memo: seed.clone(), seed, queries: Vec::new() })
    }

    pub fn identity(catalog: Catalog) -> LazyAutomorphism {
        LazyAutomorphism::new(catalog, PartialIso::new()).expect("empty seed")
    }

    pub fn catalog(&self) -> Catalog {
        self.catalog
    }

    pub fn seed(&self) -> &PartialIso {
        &self.seed
    }

    /// All pairs fixed so far.
    pub fn snapshot(&self) -> &PartialIso {
        &self.memo
    }

    fn query(&mut self, x: &Elem, dir: Direction) -> Result<Elem> {
        let known = match dir {
            Direction::Forward => self.memo.get(x),
            Direction::Backward => self.memo.get_inverse(x),
        };
        let image = match known {
            Some(y) => y.clone(),
            None => {
                // rationals: anchors from the seed give the same value as
                // anchors from the memo, which keeps the memo small
                let base = match self.catalog {
                    Catalog::RationalsOrder => &self.seed,
                    Catalog::Rado => &self.memo,
                };
                let ext = extend_step_avoiding(self.catalog, base, x, dir, &[])?;
                let y = match dir {
                    Direction::Forward => ext.get(x),
                    Direction::Backward => ext.get_inverse(x),
                }
                .unwrap()
                .clone();
                match dir {
                    Direction::Forward => self.memo.insert(x.clone(), y.clone())?,
                    Direction::Backward => self.memo.insert(y.clone(), x.clone())?,
                }
                y
            }
        };
        self.queries.push(Query { direction: dir, point: x.clone(), image: image.clone() });
        Ok(image)
    }

    pub fn apply(&mut self, x: &Elem) -> Result<Elem> {
        self.query(x, Direction::Forward)
    }

    pub fn unapply(&mut self, y: &Elem) -> Result<Elem> {
        self.query(y, Direction::Backward)
    }

    /// Evaluates all of `xs`, extending in increasing element order; results
    /// follow the input order.
    pub fn eval_batch(&mut self, xs: &[Elem]) -> Result<Vec<Elem>> {
        let sorted: BTreeSet<&Elem> = xs.iter().collect();
        for x in sorted {
            self.apply(x)?;
        }
        xs.iter().map(|x| Ok(self.memo.get(x).unwrap().clone())).collect()
    }

    /// Whether every pair fixed so far preserves and reflects the relation.
    pub fn verify(&self) -> Result<bool> {
        let s = self.catalog.structure();
        self.memo.is_partial_iso(&s, &s)
    }

    pub fn transcript(&self) -> Result<Transcript> {
        Ok(Transcript {
            structure: self.catalog.name().into(),
            seed: self.seed.clone(),
            queries: self.queries.clone(),
            verified: self.verify()?,
        })
    }

    pub fn shared(self) -> SharedAutomorphism {
        SharedAutomorphism(Arc::new(Mutex::new(self)))
    }
}

/// A [`LazyAutomorphism`] behind a lock, usable as a [`Bijection`].
#[derive(Clone, Debug)]
pub struct SharedAutomorphism(Arc<Mutex<LazyAutomorphism>>);

impl SharedAutomorphism {
    pub fn apply(&self, x: &Elem) -> Result<Elem> {
        self.0.lock().unwrap().apply(x)
    }

    pub fn unapply(&self, y: &Elem) -> Result<Elem> {
        self.0.lock().unwrap().unapply(y)
    }

    pub fn with<T>(&self, f: impl FnOnce(&mut LazyAutomorphism) -> T) -> T {
        f(&mut self.0.lock().unwrap())
    }

    pub fn to_bijection(&self) -> Bijection {
        let carrier = self.with(|a| a.catalog.carrier());
        let (f, b) = (self.clone(), self.clone());
        let fwd = FinOp::unary_rule(&carrier, "aut", move |x| f.apply(x));
        let bwd = FinOp::unary_rule(&carrier, "aut⁻¹", move |y| b.unapply(y));
        Bijection::from_pair(fwd, bwd).expect("unary rules on one carrier")
    }
}

/// A self-embedding of the Rado graph built forward only, never using the
/// vertices in `avoid` as images (so it is not surjective when `avoid` is
/// non-empty).
#[derive(Clone, Debug)]
pub struct RadoEmbedding {
    memo: PartialIso,
    avoid: Vec<u64>,
}

impl RadoEmbedding {
    pub fn new(seed: PartialIso, avoid: Vec<u64>) -> Result<RadoEmbedding> {
        let s = RelStructure::rado();
        if !seed.is_partial_iso(&s, &s)? {
            return Err(Error::InvalidSeed(format!("{seed} is not a partial isomorphism of rado")));
        }
        if seed.range().any(|y| y.nat().is_some_and(|y| avoid.contains(&y))) {
            return Err(Error::InvalidSeed("seed maps onto an avoided vertex".into()));
        }
        Ok(RadoEmbedding { memo: seed, avoid })
    }

    pub fn apply(&mut self, x: &Elem) -> Result<Elem> {
        if let Some(y) = self.memo.get(x) {
            return Ok(y.clone());
        }
        self.memo = extend_step_avoiding(Catalog::Rado, &self.memo, x, Direction::Forward, &self.avoid)?;
        Ok(self.memo.get(x).unwrap().clone())
    }

    pub fn snapshot(&self) -> &PartialIso {
        &self.memo
    }

    pub fn into_op(self) -> FinOp {
        let cell = Mutex::new(self);
        FinOp::unary_rule(&Carrier::Rado, "rado-embedding", move |x| cell.lock().unwrap().apply(x))
    }
}

/// Closed-form self-embeddings of `(ℚ,<)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RatMap {
    /// `x ↦ slope·x + shift`, `slope > 0` (an automorphism).
    Affine {
        #[serde(with = "crate::fnspace::rational_serde")]
        slope: Rational,
        #[serde(with = "crate::fnspace::rational_serde")]
        shift: Rational,
    },
    /// Identity below `at`, shifted up by `jump > 0` from `at` on; misses
    /// `[at, at + jump)`.
    Gap {
        #[serde(with = "crate::fnspace::rational_serde")]
        at: Rational,
        #[serde(with = "crate::fnspace::rational_serde")]
        jump: Rational,
    },
    /// `x ↦ x / (1 + |x|)`, onto the open interval `(-1, 1)`.
    Squash,
    /// `outer ∘ inner`.
    Then { inner: Box<RatMap>, outer: Box<RatMap> },
}

impl RatMap {
    pub fn affine(slope: Rational, shift: Rational) -> Result<RatMap> {
        if !slope.is_positive() {
            return Err(Error::Invalid("slope must be positive".into()));
        }
        Ok(RatMap::Affine { slope, shift })
    }

    pub fn gap(at: Rational, jump: Rational) -> Result<RatMap> {
        if !jump.is_positive() {
            return Err(Error::Invalid("jump must be positive".into()));
        }
        Ok(RatMap::Gap { at, jump })
    }

    pub fn then(self, outer: RatMap) -> RatMap {
        RatMap::Then { inner: Box::new(self), outer: Box::new(outer) }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        match self {
            RatMap::Affine { slope, shift } => slope * x + shift,
            RatMap::Gap { at, jump } => {
                if x < at {
                    x.clone()
                } else {
                    x + jump
                }
            }
            RatMap::Squash => x / (Rational::one() + x.abs()),
            RatMap::Then { inner, outer } => outer.eval(&inner.eval(x)),
        }
    }

    /// Whether the map is onto `ℚ`.
    pub fn is_surjective(&self) -> bool {
        match self {
            RatMap::Affine { .. } => true,
            RatMap::Gap { .. } | RatMap::Squash => false,
            RatMap::Then { inner, outer } => inner.is_surjective() && outer.is_surjective(),
        }
    }

    pub fn to_op(&self) -> FinOp {
        let m = self.clone();
        FinOp::unary_rule(&Carrier::Rationals, format!("{self:?}"), move |x| Ok(Elem::Rat(m.eval(as_rat(x)?))))
    }
}

/// A rational with numerator in `-range..=range` and denominator in `1..=4`.
fn random_rational(rng: &mut impl Rng, range: i64) -> Rational {
    rat(rng.gen_range(-range..=range), rng.gen_range(1..=4))
}

/// A seeded random partial isomorphism with `size` pairs.
pub fn random_seed(catalog: Catalog, rng: &mut impl Rng, size: usize) -> Result<PartialIso> {
    match catalog {
        Catalog::RationalsOrder => {
            let mut xs = BTreeSet::new();
            let mut ys = BTreeSet::new();
            while xs.len() < size {
                xs.insert(random_rational(rng, 12));
            }
            while ys.len() < size {
                ys.insert(random_rational(rng, 12));
            }
            PartialIso::from_pairs(xs.into_iter().zip(ys).map(|(x, y)| (Elem::Rat(x), Elem::Rat(y))))
        }
        Catalog::Rado => {
            let mut p = PartialIso::new();
            if size == 0 {
                return Ok(p);
            }
            p.insert(Elem::Nat(rng.gen_range(0..16)), Elem::Nat(rng.gen_range(0..16)))?;
            while p.len() < size {
                let dir = if rng.gen_bool(0.5) { Direction::Forward } else { Direction::Backward };
                let x = Elem::Nat(rng.gen_range(0..16));
                let taken = match dir {
                    Direction::Forward => p.get(&x).is_some(),
                    Direction::Backward => p.get_inverse(&x).is_some(),
                };
                if !taken {
                    p = extend_step_avoiding(Catalog::Rado, &p, &x, dir, &[])?;
                }
            }
            Ok(p)
        }
    }
}

pub fn random_automorphism(catalog: Catalog, rng: &mut impl Rng, size: usize) -> Result<LazyAutomorphism> {
    LazyAutomorphism::new(catalog, random_seed(catalog, rng, size)?)
}

#[derive(Clone, Debug)]
pub enum NoncommutingOutcome {
    /// `f(g(point)) ≠ g(f(point))`.
    Found { g: LazyAutomorphism, point: Elem, fg: Elem, gf: Elem },
    /// Some probe was moved but no witness verified within the budget.
    BudgetExhausted { probed: usize },
    /// `f` fixed every probed point.
    IdentityOnProbes { probed: usize },
}

impl NoncommutingOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            NoncommutingOutcome::Found { .. } => "found",
            NoncommutingOutcome::BudgetExhausted { .. } => "budget exhausted",
            NoncommutingOutcome::IdentityOnProbes { .. } => "identity on probes",
        }
    }
}

/// Searches for `g` and `p` with `f(g(p)) ≠ g(f(p))`, probing the window
/// first and then carrier elements in enumeration order.
///
/// For a moved probe `p` with `y = f(p)`, `g` fixes `p` and sends `y` to a
/// different point `z` of the same type over `p`: the midpoint of `p` and `y`
/// for the rationals, the least vertex with the same adjacency to `p` for
/// Rado. Then `f(g(p)) = y` while `g(f(p)) = z`.
pub fn noncommuting_witness(f: &mut LazyAutomorphism, window: &Window, budget: usize) -> Result<NoncommutingOutcome> {
    let catalog = f.catalog;
    let carrier = catalog.carrier();
    let extra = (0u64..).map(|i| carrier.nth(i)).filter(|e| !window.contains(e));
    let mut moved = false;
    let mut probed = 0;
    for p in window.points().iter().cloned().chain(extra).take(budget) {
        probed += 1;
        let y = f.apply(&p)?;
        if y == p {
            continue;
        }
        moved = true;
        let z = match catalog {
            Catalog::RationalsOrder => Elem::Rat((as_rat(&p)? + as_rat(&y)?) / rat(2, 1)),
            Catalog::Rado => {
                let (pn, yn) = (as_nat(&p)?, as_nat(&y)?);
                let (u, v) = if rado_adjacency(pn, yn)? { (vec![pn], vec![]) } else { (vec![], vec![pn]) };
                Elem::Nat(rado_back_forth_witness(&u, &v, &[yn])?)
            }
        };
        let mut g = LazyAutomorphism::new(catalog, PartialIso::from_pairs([(p.clone(), p.clone()), (y.clone(), z)])?)?;
        let gp = g.apply(&p)?;
        let fg = f.apply(&gp)?;
        let gf = g.apply(&y)?;
        if fg != gf {
            return Ok(NoncommutingOutcome::Found { g, point: p, fg, gf });
        }
    }
    Ok(if moved {
        NoncommutingOutcome::BudgetExhausted { probed }
    } else {
        NoncommutingOutcome::IdentityOnProbes { probed }
    })
}

/// Interpolating automorphism for a partial isomorphism given on a window.
pub fn interpolating_automorphism(catalog: Catalog, pairs: PartialIso) -> Result<LazyAutomorphism> {
    LazyAutomorphism::new(catalog, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Elem {
        Elem::Rat(rat(n, d))
    }

    fn n(v: u64) -> Elem {
        Elem::Nat(v)
    }

    #[test]
    fn extend_step_examples() {
        let qs = RelStructure::rationals_order();
        let p = PartialIso::from_pairs([(q(0, 1), q(0, 1))]).unwrap();
        let e = extend_step(&qs, &p, &q(1, 1), Direction::Forward).unwrap();
        assert_eq!(e.get(&q(1, 1)), Some(&q(1, 1)));
        let e = extend_step(&qs, &PartialIso::new(), &q(7, 3), Direction::Forward).unwrap();
        assert_eq!(e.get(&q(7, 3)), Some(&q(7, 3)));
        assert!(extend_step(&qs, &p, &q(0, 1), Direction::Forward).is_err());

        let rado = RelStructure::rado();
        let p = PartialIso::from_pairs([(n(0), n(0))]).unwrap();
        let e = extend_step(&rado, &p, &n(1), Direction::Forward).unwrap();
        let w = e.get(&n(1)).unwrap().nat().unwrap();
        assert_eq!(rado_adjacency(0, w).unwrap(), rado_adjacency(0, 1).unwrap());
        assert!(e.is_partial_iso(&rado, &rado).unwrap());
        let b = extend_step(&rado, &p, &n(5), Direction::Backward).unwrap();
        assert!(b.get_inverse(&n(5)).is_some() && b.is_partial_iso(&rado, &rado).unwrap());
        let alt = alternative_step(Catalog::Rado, &p, &n(1)).unwrap();
        assert_ne!(alt.get(&n(1)), e.get(&n(1)));
        assert!(alt.is_partial_iso(&rado, &rado).unwrap());

        let p = PartialIso::from_pairs([(q(0, 1), q(0, 1)), (q(2, 1), q(4, 1))]).unwrap();
        let canon = extend_step(&qs, &p, &q(1, 1), Direction::Forward).unwrap();
        assert_eq!(canon.get(&q(1, 1)), Some(&q(2, 1)));
        let alt = alternative_step(Catalog::RationalsOrder, &p, &q(1, 1)).unwrap();
        assert_eq!(alt.get(&q(1, 1)), Some(&q(3, 1)));
        let alt = alternative_step(Catalog::RationalsOrder, &p, &q(5, 1)).unwrap();
        assert_eq!(alt.get(&q(5, 1)), Some(&q(8, 1)));
    }

    #[test]
    fn automorphism_examples() {
        let qs = RelStructure::rationals_order();
        let mut id = automorphism_from(&qs, PartialIso::new()).unwrap();
        assert_eq!(id.apply(&q(5, 7)).unwrap(), q(5, 7));
        let mut shift = automorphism_from(&qs, PartialIso::from_pairs([(q(0, 1), q(1, 1))]).unwrap()).unwrap();
        let xs: Vec<Elem> = (-5..5).map(|i| q(i, 3)).collect();
        let ys = shift.eval_batch(&xs).unwrap();
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ys[0], q(-2, 3));
        assert!(shift.verify().unwrap());

        let rado = RelStructure::rado();
        let bad = PartialIso::from_pairs([(n(0), n(0)), (n(1), n(2))]).unwrap();
        assert!(matches!(automorphism_from(&rado, bad), Err(Error::InvalidSeed(_))));
    }

    #[test]
    fn transitivity_examples() {
        let qs = RelStructure::rationals_order();
        let mut f = transitivity_witness(&qs, &q(0, 1), &q(5, 1)).unwrap();
        assert_eq!(f.apply(&q(0, 1)).unwrap(), q(5, 1));
        let rado = RelStructure::rado();
        let mut f = transitivity_witness(&rado, &n(3), &n(3)).unwrap();
        assert_eq!(f.apply(&n(3)).unwrap(), n(3));
        let mut f = transitivity_witness(&rado, &n(0), &n(7)).unwrap();
        assert_eq!(f.apply(&n(0)).unwrap(), n(7));
        let xs: Vec<Elem> = (0..8).map(n).collect();
        for (x, y) in xs.iter().zip(f.eval_batch(&xs).unwrap()) {
            assert_eq!(f.unapply(&y).unwrap(), *x);
        }
        assert!(f.verify().unwrap());
    }

    #[test]
    fn noncommuting_examples() {
        let qs = RelStructure::rationals_order();
        let mut id = LazyAutomorphism::identity(Catalog::RationalsOrder);
        let w = Catalog::RationalsOrder.default_window(2);
        assert!(matches!(noncommuting_witness(&mut id, &w, 16).unwrap(), NoncommutingOutcome::IdentityOnProbes { probed: 16 }));

        let mut shift = transitivity_witness(&qs, &q(0, 1), &q(1, 1)).unwrap();
        let w0 = Window::new(&Carrier::Rationals, [q(0, 1)]).unwrap();
        match noncommuting_witness(&mut shift, &w0, 16).unwrap() {
            NoncommutingOutcome::Found { mut g, point, fg, gf } => {
                assert_eq!(point, q(0, 1));
                assert_eq!(g.apply(&q(0, 1)).unwrap(), q(0, 1));
                assert_eq!(g.apply(&q(1, 1)).unwrap(), q(1, 2));
                assert_eq!((fg, gf), (q(1, 1), q(1, 2)));
            }
            other => panic!("{other:?}"),
        }

        let rado = RelStructure::rado();
        let mut f = transitivity_witness(&rado, &n(0), &n(7)).unwrap();
        let w0 = Window::new(&Carrier::Rado, [n(0)]).unwrap();
        match noncommuting_witness(&mut f, &w0, 16).unwrap() {
            NoncommutingOutcome::Found { mut g, fg, gf, .. } => {
                assert_eq!(g.apply(&n(0)).unwrap(), n(0));
                assert_ne!(g.apply(&n(7)).unwrap(), n(7));
                assert_ne!(fg, gf);
                assert!(g.verify().unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rat_maps() {
        let gap = RatMap::gap(rat(0, 1), rat(1, 1)).unwrap();
        assert_eq!(gap.eval(&rat(-1, 2)), rat(-1, 2));
        assert_eq!(gap.eval(&rat(0, 1)), rat(1, 1));
        assert!(!gap.is_surjective());
        assert_eq!(RatMap::Squash.eval(&rat(1, 1)), rat(1, 2));
        assert_eq!(RatMap::Squash.eval(&rat(-3, 1)), rat(-3, 4));
        assert!(RatMap::affine(rat(0, 1), rat(0, 1)).is_err());
        let composed = RatMap::affine(rat(2, 1), rat(0, 1)).unwrap().then(RatMap::Squash);
        assert_eq!(composed.eval(&rat(1, 1)), rat(2, 3));
        assert_eq!(composed.to_op().apply(&q(1, 1)).unwrap(), q(2, 3));
    }

    #[test]
    fn rado_embedding_avoids_vertices() {
        let mut e = RadoEmbedding::new(PartialIso::new(), vec![0, 1, 2]).unwrap();
        for x in 0..6 {
            let y = e.apply(&n(x)).unwrap().nat().unwrap();
            assert!(y > 2);
        }
        let rado = RelStructure::rado();
        assert!(e.snapshot().is_partial_iso(&rado, &rado).unwrap());
    }

    #[test]
    fn shared_automorphism_as_bijection() {
        let rado = RelStructure::rado();
        let f = transitivity_witness(&rado, &n(0), &n(7)).unwrap().shared();
        let b = f.to_bijection();
        let y = b.apply(&n(4)).unwrap();
        assert_eq!(b.unapply(&y).unwrap(), n(4));
        assert!(f.with(|a| a.verify()).unwrap());
    }

    proptest! {
        #[test]
        fn rationals_answers_are_order_insensitive(seed in 0u64..1000, perm in Just((-6..6).collect::<Vec<i64>>()).prop_shuffle()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = random_automorphism(Catalog::RationalsOrder, &mut rng, 3).unwrap();
            let (mut a, mut b) = (base.clone(), base);
            let xs: Vec<Elem> = (-6..6).map(|i| q(i, 2)).collect();
            let ys: Vec<Elem> = perm.iter().map(|&i| q(i, 2)).collect();
            let fa: Vec<Elem> = xs.iter().map(|x| a.apply(x).unwrap()).collect();
            for y in &ys {
                b.unapply(y).unwrap();
            }
            let fb: Vec<Elem> = xs.iter().map(|x| b.apply(x).unwrap()).collect();
            prop_assert_eq!(fa, fb);
            prop_assert!(a.verify().unwrap() && b.verify().unwrap());
        }

        #[test]
        fn rado_automorphisms_stay_partial_isos(seed in 0u64..500, queries in proptest::collection::vec((any::<bool>(), 0u64..24), 1..24)) {
            // the only admissible failure is running out of 64-bit witnesses
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut f = random_automorphism(Catalog::Rado, &mut rng, 3).unwrap();
            for (fwd, x) in queries {
                let y = match if fwd { f.apply(&n(x)) } else { f.unapply(&n(x)) } {
                    Ok(y) => y,
                    Err(Error::BudgetExceeded { .. }) => break,
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                };
                if fwd {
                    prop_assert_eq!(f.unapply(&y).unwrap(), n(x));
                } else {
                    prop_assert_eq!(f.apply(&y).unwrap(), n(x));
                }
            }
            prop_assert!(f.verify().unwrap());
        }

        #[test]
        fn rado_replay_is_deterministic(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = random_automorphism(Catalog::Rado, &mut rng, 2).unwrap();
            let xs: Vec<Elem> = (0..8).rev().map(n).collect();
            let (mut a, mut b) = (base.clone(), base);
            prop_assert_eq!(format!("{:?}", a.eval_batch(&xs)), format!("{:?}", b.eval_batch(&xs)));
            prop_assert_eq!(a.transcript().unwrap(), b.transcript().unwrap());
        }
    }
}
