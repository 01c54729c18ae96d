//! Arity-bounded clone fragments and clone homomorphisms.
//!
//! A fragment holds the operations of arities `1..=max_arity` of a clone on
//! a finite carrier. Closure is computed per arity as the set of term
//! operations over the generators, which is exactly the arity-`m` part of the
//! generated clone.
//!
//! The conjugation lifting theorem is checked along two independent routes:
//! [`lift_conjugation`] evaluates `θ ∘ h ∘ (θ⁻¹ × .. × θ⁻¹)` directly, while
//! [`thm41_predict`] only uses the unary part, weak-directedness witnesses
//! and the conjugation formula for unary operations.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnspace::{compose_at, projection, table_len, tuple_at, Bijection, Carrier, Elem, FinOp};
use crate::monoid::{is_weakly_directed, weakly_directed_witnesses, MonoidSet};

pub const DEFAULT_MAX_ARITY: usize = 3;
pub const DEFAULT_OP_CAP: usize = 512;
/// Upper bound on the number of composition instances a single
/// homomorphism or closedness check may inspect.
pub const COMPOSITION_BUDGET: usize = 1 << 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentFlags {
    pub contains_projections: bool,
    pub closed_within_bound: bool,
}

/// How an operation entered a fragment during closure.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Derivation {
    Projection(usize),
    /// `gens[gen]` applied to the listed operations of the same arity.
    Apply { gen: usize, args: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct CloneFragment {
    carrier: Carrier,
    max_arity: usize,
    ops: Vec<Vec<FinOp>>,
    flags: FragmentFlags,
}

impl CloneFragment {
    /// Builds a fragment from explicit per-arity operation lists
    /// (`per_arity[n - 1]` holds the `n`-ary members). Flags are verified.
    pub fn from_ops(carrier: &Carrier, max_arity: usize, per_arity: Vec<Vec<FinOp>>) -> Result<CloneFragment> {
        carrier.require_finite("clone fragments on lazy carriers")?;
        if max_arity == 0 {
            return Err(Error::Invalid("max_arity must be at least 1".into()));
        }
        if per_arity.len() > max_arity {
            return Err(Error::ArityMismatch(format!("operations above the bound {max_arity}")));
        }
        let mut ops = per_arity;
        ops.resize(max_arity, Vec::new());
        for (i, list) in ops.iter_mut().enumerate() {
            for f in list.iter() {
                if f.arity() != i + 1 {
                    return Err(Error::ArityMismatch(format!("{}-ary op listed under arity {}", f.arity(), i + 1)));
                }
                if f.carrier() != carrier {
                    return Err(Error::CarrierMismatch);
                }
                if f.table().is_none() {
                    return Err(Error::Unsupported("rule operations in a fragment"));
                }
            }
            list.sort();
            list.dedup();
        }
        let mut frag = CloneFragment { carrier: carrier.clone(), max_arity, ops, flags: FragmentFlags::default() };
        frag.flags.contains_projections = frag.has_projections();
        frag.flags.closed_within_bound = frag.check_closed()?;
        Ok(frag)
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn flags(&self) -> FragmentFlags {
        self.flags
    }

    /// The `n`-ary members, `1 ≤ n ≤ max_arity`.
    pub fn ops(&self, n: usize) -> &[FinOp] {
        if n == 0 || n > self.max_arity {
            return &[];
        }
        &self.ops[n - 1]
    }

    pub fn all_ops(&self) -> impl Iterator<Item = &FinOp> {
        self.ops.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.ops.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn profile(&self) -> Vec<usize> {
        self.ops.iter().map(Vec::len).collect()
    }

    pub fn index_of(&self, f: &FinOp) -> Option<usize> {
        self.ops(f.arity()).binary_search(f).ok()
    }

    pub fn contains(&self, f: &FinOp) -> bool {
        self.index_of(f).is_some()
    }

    /// `F^(1)` as a transformation monoid.
    pub fn unary_part(&self) -> Result<MonoidSet> {
        MonoidSet::from_ops(&self.carrier, self.ops(1).to_vec())
    }

    fn has_projections(&self) -> bool {
        (1..=self.max_arity).all(|n| (1..=n).all(|i| self.contains(&projection(&self.carrier, n, i).unwrap())))
    }

    fn composition_cost(&self) -> usize {
        let mut cost = 0usize;
        for n in 1..=self.max_arity {
            for m in 1..=self.max_arity {
                let c = self.ops(m).len().checked_pow(n as u32).and_then(|p| p.checked_mul(self.ops(n).len()));
                cost = cost.saturating_add(c.unwrap_or(usize::MAX));
            }
        }
        cost
    }

    fn check_closed(&self) -> Result<bool> {
        if self.composition_cost() > COMPOSITION_BUDGET {
            return Err(Error::BudgetExceeded { what: "closedness check", cap: COMPOSITION_BUDGET });
        }
        for n in 1..=self.max_arity {
            for m in 1..=self.max_arity {
                let inner = self.ops(m);
                if inner.is_empty() {
                    continue;
                }
                for f in self.ops(n) {
                    let mut idx = vec![0usize; n];
                    loop {
                        let gs: Vec<FinOp> = idx.iter().map(|&i| inner[i].clone()).collect();
                        if !self.contains(&compose_at(f, &gs, m)?) {
                            return Ok(false);
                        }
                        if !crate::fnspace::advance(&mut idx, inner.len()) {
                            break;
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Per-arity closure state with derivations, before canonical sorting.
struct ArityClosure {
    tables: Vec<Vec<u32>>,
    derivations: Vec<Derivation>,
}

fn close_arity(size: usize, m: usize, gens: &[FinOp], cap: usize) -> Result<ArityClosure> {
    let len = table_len(size, m)?;
    let mut tables: Vec<Vec<u32>> = Vec::new();
    let mut derivations = Vec::new();
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut push = |t: Vec<u32>, d: Derivation, tables: &mut Vec<Vec<u32>>, derivations: &mut Vec<Derivation>| -> Result<()> {
        if index.contains_key(&t) {
            return Ok(());
        }
        if tables.len() >= cap {
            return Err(Error::BudgetExceeded { what: "operations per arity", cap });
        }
        index.insert(t.clone(), tables.len());
        tables.push(t);
        derivations.push(d);
        Ok(())
    };
    let mut tuple = vec![0u32; m];
    for i in 0..m {
        let t = (0..len)
            .map(|idx| {
                tuple_at(size, m, idx, &mut tuple);
                tuple[i]
            })
            .collect();
        push(t, Derivation::Projection(i + 1), &mut tables, &mut derivations)?;
    }
    // nullary generators yield constants directly
    for (gi, g) in gens.iter().enumerate().filter(|(_, g)| g.arity() == 0) {
        let v = g.table().unwrap()[0];
        push(vec![v; len], Derivation::Apply { gen: gi, args: vec![] }, &mut tables, &mut derivations)?;
    }
    let mut old = 0usize;
    loop {
        let frontier_end = tables.len();
        if old == frontier_end {
            break;
        }
        for (gi, g) in gens.iter().enumerate().filter(|(_, g)| g.arity() > 0) {
            let n = g.arity();
            let gt = g.table().unwrap();
            for first_new in 0..n {
                // positions before `first_new` range over old members, the
                // position itself over the frontier, later ones over everything
                let ranges: Vec<(usize, usize)> = (0..n)
                    .map(|p| match p.cmp(&first_new) {
                        std::cmp::Ordering::Less => (0, old),
                        std::cmp::Ordering::Equal => (old, frontier_end),
                        std::cmp::Ordering::Greater => (0, frontier_end),
                    })
                    .collect();
                if ranges.iter().any(|(a, b)| a >= b) {
                    continue;
                }
                let mut args: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                loop {
                    let t: Vec<u32> = (0..len)
                        .map(|x| gt[args.iter().fold(0usize, |acc, &a| acc * size + tables[a][x] as usize)])
                        .collect();
                    push(t, Derivation::Apply { gen: gi, args: args.clone() }, &mut tables, &mut derivations)?;
                    let mut p = n;
                    loop {
                        if p == 0 {
                            break;
                        }
                        p -= 1;
                        args[p] += 1;
                        if args[p] < ranges[p].1 {
                            break;
                        }
                        args[p] = ranges[p].0;
                        if p == 0 {
                            p = usize::MAX;
                            break;
                        }
                    }
                    if p == usize::MAX {
                        break;
                    }
                }
            }
        }
        old = frontier_end;
    }
    Ok(ArityClosure { tables, derivations })
}

/// Least fragment containing `gens` and all projections of arity
/// `≤ max_arity`, closed under in-bound composition.
pub fn close_fragment(carrier: &Carrier, gens: &[FinOp], max_arity: usize, cap: usize) -> Result<CloneFragment> {
    close_with_derivations(carrier, gens, max_arity, cap).map(|(f, _)| f)
}

fn close_with_derivations(
    carrier: &Carrier,
    gens: &[FinOp],
    max_arity: usize,
    cap: usize,
) -> Result<(CloneFragment, Vec<Vec<Derivation>>)> {
    let size = carrier.require_finite("clone closure on a lazy carrier")?;
    if max_arity == 0 {
        return Err(Error::Invalid("max_arity must be at least 1".into()));
    }
    for g in gens {
        if g.carrier() != carrier || g.table().is_none() {
            return Err(Error::Invalid("generators must be tables on the carrier".into()));
        }
        if g.arity() > max_arity {
            return Err(Error::ArityMismatch(format!("generator of arity {} above bound {max_arity}", g.arity())));
        }
    }
    let closures = (1..=max_arity)
        .map(|m| close_arity(size, m, gens, cap))
        .collect::<Result<Vec<_>>>()?;
    let mut ops = Vec::with_capacity(max_arity);
    let mut derivations = Vec::with_capacity(max_arity);
    for (i, c) in closures.into_iter().enumerate() {
        let m = i + 1;
        let mut order: Vec<usize> = (0..c.tables.len()).collect();
        order.sort_by(|&a, &b| c.tables[a].cmp(&c.tables[b]));
        let mut rank = vec![0usize; order.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        ops.push(order.iter().map(|&o| FinOp::from_table_unchecked(carrier, m, c.tables[o].clone())).collect());
        derivations.push(
            order
                .iter()
                .map(|&o| match &c.derivations[o] {
                    Derivation::Apply { gen, args } => {
                        Derivation::Apply { gen: *gen, args: args.iter().map(|&a| rank[a]).collect() }
                    }
                    d => d.clone(),
                })
                .collect(),
        );
    }
    let frag = CloneFragment {
        carrier: carrier.clone(),
        max_arity,
        ops,
        flags: FragmentFlags { contains_projections: true, closed_within_bound: true },
    };
    Ok((frag, derivations))
}

/// Mode of a clone homomorphism.
#[derive(Clone, Debug)]
pub enum HomMode {
    ExplicitTable,
    Conjugation(Bijection),
}

/// An arity-preserving map between fragments: `maps[n - 1][i]` is the index
/// in the target's `n`-ary list of the image of the source's `i`-th `n`-ary
/// operation.
#[derive(Clone, Debug)]
pub struct CloneHom {
    pub maps: Vec<Vec<usize>>,
    pub mode: HomMode,
}

impl CloneHom {
    pub fn identity(f: &CloneFragment) -> CloneHom {
        CloneHom { maps: f.ops.iter().map(|l| (0..l.len()).collect()).collect(), mode: HomMode::ExplicitTable }
    }

    /// Conjugation by `θ` as a table from `source` to `target`; fails if some
    /// conjugate is missing from the target.
    pub fn conjugation(source: &CloneFragment, target: &CloneFragment, theta: &Bijection) -> Result<CloneHom> {
        if source.max_arity != target.max_arity {
            return Err(Error::ArityMismatch("fragments with different bounds".into()));
        }
        let maps = source
            .ops
            .iter()
            .map(|list| {
                list.iter()
                    .map(|h| {
                        let img = lift_conjugation(theta, h)?;
                        target.index_of(&img).ok_or_else(|| Error::Invalid("conjugate outside the target fragment".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CloneHom { maps, mode: HomMode::Conjugation(theta.clone()) })
    }

    pub fn image<'a>(&self, target: &'a CloneFragment, arity: usize, index: usize) -> &'a FinOp {
        &target.ops(arity)[self.maps[arity - 1][index]]
    }

    pub fn is_surjective(&self, target: &CloneFragment) -> bool {
        self.maps.iter().enumerate().all(|(i, m)| {
            let mut hit = vec![false; target.ops(i + 1).len()];
            m.iter().for_each(|&j| hit[j] = true);
            hit.into_iter().all(|b| b)
        })
    }

    /// The unary restriction as a map of tables.
    pub fn unary_equals_conjugation(&self, source: &CloneFragment, target: &CloneFragment, theta: &Bijection) -> Result<bool> {
        for (i, h) in source.ops(1).iter().enumerate() {
            if *self.image(target, 1, i) != lift_conjugation(theta, h)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Checks the projection and composition laws of `xi` within the bound.
pub fn is_clone_hom(source: &CloneFragment, target: &CloneFragment, xi: &CloneHom) -> Result<bool> {
    if source.max_arity != target.max_arity || xi.maps.len() != source.max_arity {
        return Ok(false);
    }
    for (i, m) in xi.maps.iter().enumerate() {
        if m.len() != source.ops[i].len() || m.iter().any(|&j| j >= target.ops[i].len()) {
            return Ok(false);
        }
    }
    if source.composition_cost() > COMPOSITION_BUDGET {
        return Err(Error::BudgetExceeded { what: "homomorphism check", cap: COMPOSITION_BUDGET });
    }
    let c = &source.carrier;
    for n in 1..=source.max_arity {
        for i in 1..=n {
            let p = projection(c, n, i)?;
            if let Some(k) = source.index_of(&p) {
                if *xi.image(target, n, k) != p {
                    return Ok(false);
                }
            }
        }
    }
    for n in 1..=source.max_arity {
        for m in 1..=source.max_arity {
            let inner = source.ops(m);
            if inner.is_empty() {
                continue;
            }
            for (fi, f) in source.ops(n).iter().enumerate() {
                let mut idx = vec![0usize; n];
                loop {
                    let gs: Vec<FinOp> = idx.iter().map(|&i| inner[i].clone()).collect();
                    if let Some(k) = source.index_of(&compose_at(f, &gs, m)?) {
                        let img_gs: Vec<FinOp> = idx.iter().map(|&i| xi.image(target, m, i).clone()).collect();
                        let rhs = compose_at(xi.image(target, n, fi), &img_gs, m)?;
                        if *xi.image(target, m, k) != rhs {
                            return Ok(false);
                        }
                    }
                    if !crate::fnspace::advance(&mut idx, inner.len()) {
                        break;
                    }
                }
            }
        }
    }
    Ok(true)
}

/// `y ↦ θ(h(θ⁻¹(y1), .., θ⁻¹(yn)))`.
pub fn lift_conjugation(theta: &Bijection, h: &FinOp) -> Result<FinOp> {
    theta.conjugate(h)
}

/// Value of `ξ(h)` at `targets` computed only from unary data: with
/// `a_i = θ⁻¹(y_i)`, pick a base point `c` and unary `g_i` with
/// `g_i(c) = a_i`, form `f = h ∘ (g_1, .., g_n)` and evaluate the conjugate
/// of `f` at `θ(c)`.
pub fn thm41_predict(theta: &Bijection, unary_part: &MonoidSet, h: &FinOp, targets: &[Elem]) -> Result<Elem> {
    if targets.len() != h.arity() {
        return Err(Error::ArityMismatch(format!("{} targets for arity {}", targets.len(), h.arity())));
    }
    let pre = targets
        .iter()
        .map(|y| {
            theta
                .unapply(y)?
                .nat()
                .map(|v| v as u32)
                .ok_or(Error::Unsupported("two-path prediction on a lazy carrier"))
        })
        .collect::<Result<Vec<u32>>>()?;
    let (base, gs) = weakly_directed_witnesses(unary_part, &pre)?;
    let f = compose_at(h, &gs, 1)?;
    let xi_f = theta.conjugate(&f)?;
    xi_f.apply(&theta.apply(&Elem::Nat(base as u64))?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm41Hypotheses {
    pub homomorphism: bool,
    pub surjective: bool,
    pub unary_weakly_directed: bool,
    pub unary_is_conjugation: bool,
}

impl Thm41Hypotheses {
    pub fn all(&self) -> bool {
        self.homomorphism && self.surjective && self.unary_weakly_directed && self.unary_is_conjugation
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub arity: usize,
    pub op: Vec<u32>,
    pub input: Vec<u32>,
    pub expected: u32,
    pub actual: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm41Report {
    pub hypotheses: Thm41Hypotheses,
    pub hypotheses_met: bool,
    pub counterexamples: Vec<Counterexample>,
    pub checked: usize,
}

/// Checks the hypotheses of the lifting theorem for `xi` and, when they all
/// hold, compares `xi(h)` with the conjugate of `h` for every member.
pub fn verify_thm41(
    source: &CloneFragment,
    target: &CloneFragment,
    xi: &CloneHom,
    theta: &Bijection,
) -> Result<Thm41Report> {
    let hypotheses = Thm41Hypotheses {
        homomorphism: is_clone_hom(source, target, xi)?,
        surjective: xi.is_surjective(target),
        unary_weakly_directed: is_weakly_directed(&source.unary_part()?)?,
        unary_is_conjugation: xi.maps.len() == source.max_arity
            && xi.unary_equals_conjugation(source, target, theta)?,
    };
    let hypotheses_met = hypotheses.all();
    let mut counterexamples = Vec::new();
    let mut checked = 0;
    if hypotheses_met {
        let size = source.carrier.size().unwrap();
        for n in 1..=source.max_arity {
            for (i, h) in source.ops(n).iter().enumerate() {
                checked += 1;
                let expected = lift_conjugation(theta, h)?;
                let actual = xi.image(target, n, i);
                if expected != *actual {
                    let (et, at) = (expected.table().unwrap(), actual.table().unwrap());
                    let pos = et.iter().zip(at).position(|(a, b)| a != b).unwrap();
                    let mut input = vec![0u32; n];
                    tuple_at(size, n, pos, &mut input);
                    counterexamples.push(Counterexample {
                        arity: n,
                        op: h.table().unwrap().to_vec(),
                        input,
                        expected: et[pos],
                        actual: at[pos],
                    });
                }
            }
        }
    }
    Ok(Thm41Report { hypotheses, hypotheses_met, counterexamples, checked })
}

/// `{ lift_conjugation(θ, h) : h ∈ F }` with the same arity profile.
pub fn conjugate_fragment(f: &CloneFragment, theta: &Bijection) -> Result<CloneFragment> {
    if theta.carrier() != f.carrier() {
        return Err(Error::CarrierMismatch);
    }
    let mut ops = f
        .ops
        .iter()
        .map(|l| l.iter().map(|h| lift_conjugation(theta, h)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    ops.iter_mut().for_each(|l| l.sort());
    Ok(CloneFragment { carrier: f.carrier.clone(), max_arity: f.max_arity, ops, flags: f.flags })
}

/// A generating set of a closed fragment, picked greedily in canonical order,
/// together with a derivation of every member from it.
fn presentation(f: &CloneFragment) -> Result<(Vec<FinOp>, Vec<Vec<Derivation>>)> {
    if !f.flags.closed_within_bound || !f.flags.contains_projections {
        return Err(Error::Invalid("homomorphism enumeration needs a closed fragment with projections".into()));
    }
    let mut gens: Vec<FinOp> = Vec::new();
    let mut current = close_with_derivations(&f.carrier, &gens, f.max_arity, usize::MAX)?;
    for op in f.all_ops() {
        if !current.0.contains(op) {
            gens.push(op.clone());
            current = close_with_derivations(&f.carrier, &gens, f.max_arity, f.len().max(1))?;
        }
    }
    debug_assert_eq!(current.0.profile(), f.profile());
    Ok((gens, current.1))
}

/// Generator index each member transitively depends on last; `None` for
/// members built from projections alone.
fn last_generator(derivations: &[Vec<Derivation>]) -> Vec<Vec<Option<usize>>> {
    derivations
        .iter()
        .map(|ds| {
            let mut memo: Vec<Option<Option<usize>>> = vec![None; ds.len()];
            fn dep(i: usize, ds: &[Derivation], memo: &mut Vec<Option<Option<usize>>>) -> Option<usize> {
                if let Some(v) = memo[i] {
                    return v;
                }
                let v = match &ds[i] {
                    Derivation::Projection(_) => None,
                    Derivation::Apply { gen, args } => {
                        args.iter().map(|&a| dep(a, ds, memo)).chain([Some(*gen)]).max().flatten()
                    }
                };
                memo[i] = Some(v);
                v
            }
            (0..ds.len()).map(|i| dep(i, ds, &mut memo)).collect()
        })
        .collect()
}

/// Precomputed composition indices `f ∘ (g1..gn)` within a fragment.
struct CompositionIndex {
    /// `(n, m)` → flat table over `(f, g1, .., gn)`, `None` when outside.
    tables: HashMap<(usize, usize), Vec<Option<usize>>>,
}

impl CompositionIndex {
    fn new(f: &CloneFragment) -> Result<CompositionIndex> {
        if f.composition_cost() > COMPOSITION_BUDGET {
            return Err(Error::BudgetExceeded { what: "composition index", cap: COMPOSITION_BUDGET });
        }
        let size = f.carrier.size().unwrap();
        let mut lookup: Vec<HashMap<&[u32], usize>> = Vec::new();
        for list in &f.ops {
            lookup.push(list.iter().enumerate().map(|(i, o)| (o.table().unwrap(), i)).collect());
        }
        let mut tables = HashMap::new();
        for n in 1..=f.max_arity {
            for m in 1..=f.max_arity {
                let inner = f.ops(m);
                let outer = f.ops(n);
                let len = size.pow(m as u32);
                let mut flat = Vec::new();
                let mut buf = vec![0u32; len];
                for o in outer {
                    let ot = o.table().unwrap();
                    if inner.is_empty() {
                        continue;
                    }
                    let mut idx = vec![0usize; n];
                    loop {
                        for (x, slot) in buf.iter_mut().enumerate() {
                            let at = idx.iter().fold(0usize, |acc, &g| acc * size + inner[g].table().unwrap()[x] as usize);
                            *slot = ot[at];
                        }
                        flat.push(lookup[m - 1].get(buf.as_slice()).copied());
                        if !crate::fnspace::advance(&mut idx, inner.len()) {
                            break;
                        }
                    }
                }
                tables.insert((n, m), flat);
            }
        }
        Ok(CompositionIndex { tables })
    }

    fn get(&self, n: usize, m: usize, inner_len: usize, f: usize, gs: &[usize]) -> Option<usize> {
        let idx = gs.iter().fold(f, |acc, &g| acc * inner_len + g);
        self.tables[&(n, m)][idx]
    }
}

/// All homomorphisms between two fragments with the same bound, in a
/// deterministic order. The source must be closed and contain the
/// projections; every homomorphism is then determined by the images of a
/// generating set, which is what the search enumerates. Each candidate is
/// checked against every in-bound composition.
pub fn enumerate_clone_homs(source: &CloneFragment, target: &CloneFragment) -> Result<Vec<CloneHom>> {
    if source.carrier != target.carrier {
        return Err(Error::CarrierMismatch);
    }
    if source.max_arity != target.max_arity {
        return Err(Error::ArityMismatch("fragments with different bounds".into()));
    }
    let (gens, derivations) = presentation(source)?;
    let deps = last_generator(&derivations);
    let src_index = CompositionIndex::new(source)?;
    let tgt_index = CompositionIndex::new(target)?;
    let k = source.max_arity;

    // projections are forced
    let mut image: Vec<Vec<Option<usize>>> = source.ops.iter().map(|l| vec![None; l.len()]).collect();
    for n in 1..=k {
        for (i, d) in derivations[n - 1].iter().enumerate() {
            if let Derivation::Projection(p) = d {
                match target.index_of(&projection(&source.carrier, n, *p)?) {
                    Some(j) => image[n - 1][i] = Some(j),
                    None => return Ok(Vec::new()),
                }
            }
        }
    }
    let search = HomSearch {
        source,
        target,
        gens: &gens,
        derivations: &derivations,
        deps: &deps,
        src_index: &src_index,
        tgt_index: &tgt_index,
    };
    let mut gen_images = Vec::with_capacity(gens.len());
    let mut out = Vec::new();
    search.descend(&mut gen_images, image, &mut out);
    Ok(out)
}

struct HomSearch<'a> {
    source: &'a CloneFragment,
    target: &'a CloneFragment,
    gens: &'a [FinOp],
    derivations: &'a [Vec<Derivation>],
    deps: &'a [Vec<Option<usize>>],
    src_index: &'a CompositionIndex,
    tgt_index: &'a CompositionIndex,
}

impl HomSearch<'_> {
    fn descend(&self, gen_images: &mut Vec<usize>, image: Vec<Vec<Option<usize>>>, out: &mut Vec<CloneHom>) {
        let g = gen_images.len();
        if g == self.gens.len() {
            let maps: Vec<Vec<usize>> = image.iter().map(|l| l.iter().map(|v| v.unwrap()).collect()).collect();
            if self.laws_hold(&maps, self.source.max_arity) {
                out.push(CloneHom { maps, mode: HomMode::ExplicitTable });
            }
            return;
        }
        let arity = self.gens[g].arity();
        for cand in 0..self.target.ops(arity).len() {
            gen_images.push(cand);
            if let Some(next) = self.propagate(g, gen_images, &image) {
                let unary_done = next[0].iter().all(Option::is_some);
                let fresh_unary = self.deps[0].contains(&Some(g));
                if !unary_done || !fresh_unary || self.unary_laws_hold(&next[0]) {
                    self.descend(gen_images, next, out);
                }
            }
            gen_images.pop();
        }
    }

    /// Images of members whose derivation completes with generator `g`.
    fn propagate(&self, g: usize, gen_images: &[usize], image: &[Vec<Option<usize>>]) -> Option<Vec<Vec<Option<usize>>>> {
        let mut next = image.to_vec();
        for m in 1..=self.source.max_arity {
            let ds = &self.derivations[m - 1];
            // derivation arguments always precede their results in closure
            // order, but canonical sorting loses that; resolve recursively
            for i in 0..ds.len() {
                if self.deps[m - 1][i] == Some(g) {
                    self.resolve(m, i, gen_images, &mut next)?;
                }
            }
        }
        Some(next)
    }

    fn resolve(&self, m: usize, i: usize, gen_images: &[usize], img: &mut [Vec<Option<usize>>]) -> Option<usize> {
        if let Some(v) = img[m - 1][i] {
            return Some(v);
        }
        let Derivation::Apply { gen, args } = &self.derivations[m - 1][i] else {
            unreachable!("projections are preassigned")
        };
        let mut arg_imgs = Vec::with_capacity(args.len());
        for &a in args {
            arg_imgs.push(self.resolve(m, a, gen_images, img)?);
        }
        // presentations are drawn from the fragment, so every generator has
        // arity at least one
        let n = self.gens[*gen].arity();
        let v = self.tgt_index.get(n, m, self.target.ops(m).len(), gen_images[*gen], &arg_imgs)?;
        img[m - 1][i] = Some(v);
        Some(v)
    }

    fn unary_laws_hold(&self, unary: &[Option<usize>]) -> bool {
        let n = unary.len();
        (0..n).all(|f| {
            (0..n).all(|g| match self.src_index.get(1, 1, n, f, &[g]) {
                Some(fg) => {
                    let t = self.tgt_index.get(1, 1, self.target.ops(1).len(), unary[f].unwrap(), &[unary[g].unwrap()]);
                    t == unary[fg]
                }
                None => true,
            })
        })
    }

    fn laws_hold(&self, maps: &[Vec<usize>], k: usize) -> bool {
        for n in 1..=k {
            for m in 1..=k {
                let inner = self.source.ops(m).len();
                let t_inner = self.target.ops(m).len();
                if inner == 0 {
                    continue;
                }
                for f in 0..self.source.ops(n).len() {
                    let mut idx = vec![0usize; n];
                    loop {
                        if let Some(fg) = self.src_index.get(n, m, inner, f, &idx) {
                            let img_gs: Vec<usize> = idx.iter().map(|&i| maps[m - 1][i]).collect();
                            match self.tgt_index.get(n, m, t_inner, maps[n - 1][f], &img_gs) {
                                Some(v) if v == maps[m - 1][fg] => {}
                                _ => return false,
                            }
                        }
                        if !crate::fnspace::advance(&mut idx, inner) {
                            break;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Runs [`enumerate_clone_homs`] for many source/target pairs in parallel;
/// results are in input order.
pub fn enumerate_many(pairs: &[(&CloneFragment, &CloneFragment)]) -> Vec<Result<Vec<CloneHom>>> {
    pairs.par_iter().map(|(s, t)| enumerate_clone_homs(s, t)).collect()
}
