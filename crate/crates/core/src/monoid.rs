//! Transformation monoids and permutation groups.
//!
//! Finite monoids are stored extensionally as canonically sorted lists of
//! unary tables. Monoids on lazy carriers are presented by generators and a
//! window-membership oracle; operations that need the full member list
//! reject them with [`Error::Unsupported`].

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnspace::{tuple_at, Bijection, Carrier, FinOp, Window};

/// Decides whether some member of a lazily presented monoid agrees with `f`
/// on `window`.
pub trait WindowMembership: Send + Sync {
    fn admits(&self, f: &FinOp, window: &Window) -> Result<bool>;
}

#[derive(Clone)]
pub struct LazyPresentation {
    pub generators: Vec<FinOp>,
    pub membership: Arc<dyn WindowMembership>,
}

#[derive(Clone)]
pub enum Members {
    Extensional(Vec<FinOp>),
    Generated(LazyPresentation),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidFlags {
    pub contains_identity: bool,
    pub closed_under_composition: bool,
}

#[derive(Clone)]
pub struct MonoidSet {
    carrier: Carrier,
    members: Members,
    flags: MonoidFlags,
}

impl std::fmt::Debug for MonoidSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.members {
            Members::Extensional(ops) => f
                .debug_struct("MonoidSet")
                .field("carrier", &self.carrier)
                .field("ops", &ops.iter().map(|o| o.table().unwrap().to_vec()).collect::<Vec<_>>())
                .finish(),
            Members::Generated(p) => f
                .debug_struct("MonoidSet")
                .field("carrier", &self.carrier)
                .field("generators", &p.generators)
                .finish(),
        }
    }
}

impl MonoidSet {
    /// A finite set of unary tables; flags are computed, not trusted.
    pub fn from_ops(carrier: &Carrier, ops: impl IntoIterator<Item = FinOp>) -> Result<MonoidSet> {
        carrier.require_finite("extensional monoids on lazy carriers")?;
        let mut ops: Vec<FinOp> = ops.into_iter().collect();
        for op in &ops {
            if op.arity() != 1 {
                return Err(Error::ArityMismatch("monoid members are unary".into()));
            }
            if op.carrier() != carrier {
                return Err(Error::CarrierMismatch);
            }
            if op.table().is_none() {
                return Err(Error::Unsupported("rule operations in an extensional monoid"));
            }
        }
        ops.sort();
        ops.dedup();
        let mut m = MonoidSet {
            carrier: carrier.clone(),
            members: Members::Extensional(ops),
            flags: MonoidFlags::default(),
        };
        m.flags = m.compute_flags();
        Ok(m)
    }

    pub fn from_tables(carrier: &Carrier, tables: impl IntoIterator<Item = Vec<u32>>) -> Result<MonoidSet> {
        let ops = tables
            .into_iter()
            .map(|t| FinOp::from_table(carrier, 1, t))
            .collect::<Result<Vec<_>>>()?;
        MonoidSet::from_ops(carrier, ops)
    }

    pub fn lazy(carrier: &Carrier, presentation: LazyPresentation) -> MonoidSet {
        MonoidSet {
            carrier: carrier.clone(),
            members: Members::Generated(presentation),
            flags: MonoidFlags { contains_identity: true, closed_under_composition: true },
        }
    }

    /// All `n^n` self-maps of a finite carrier.
    pub fn full(carrier: &Carrier) -> Result<MonoidSet> {
        let n = carrier.require_finite("full transformation monoid")?;
        let total = n.pow(n as u32);
        let mut t = vec![0u32; n];
        let tables = (0..total).map(|i| {
            tuple_at(n, n, i, &mut t);
            t.clone()
        });
        MonoidSet::from_tables(carrier, tables.collect::<Vec<_>>())
    }

    /// The symmetric group on a finite carrier.
    pub fn symmetric(carrier: &Carrier) -> Result<MonoidSet> {
        let full = MonoidSet::full(carrier)?;
        let perms = full.ops()?.iter().filter(|f| is_permutation(f.table().unwrap())).cloned();
        MonoidSet::from_ops(carrier, perms.collect::<Vec<_>>())
    }

    fn compute_flags(&self) -> MonoidFlags {
        let Members::Extensional(ops) = &self.members else {
            return self.flags;
        };
        let id = FinOp::identity(&self.carrier);
        let contains_identity = ops.binary_search(&id).is_ok();
        let closed_under_composition = ops.iter().all(|f| {
            ops.iter().all(|g| ops.binary_search(&compose_unary(f, g)).is_ok())
        });
        MonoidFlags { contains_identity, closed_under_composition }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn flags(&self) -> MonoidFlags {
        self.flags
    }

    pub fn members(&self) -> &Members {
        &self.members
    }

    /// The extensional member list in canonical order.
    pub fn ops(&self) -> Result<&[FinOp]> {
        match &self.members {
            Members::Extensional(ops) => Ok(ops),
            Members::Generated(_) => Err(Error::Unsupported("extensional enumeration of a lazy monoid")),
        }
    }

    pub fn len(&self) -> Result<usize> {
        self.ops().map(<[FinOp]>::len)
    }

    pub fn is_empty(&self) -> Result<bool> {
        self.ops().map(<[FinOp]>::is_empty)
    }

    pub fn index_of(&self, f: &FinOp) -> Option<usize> {
        match &self.members {
            Members::Extensional(ops) => ops.binary_search(f).ok(),
            Members::Generated(_) => None,
        }
    }

    pub fn contains(&self, f: &FinOp) -> bool {
        self.index_of(f).is_some()
    }

    /// Index table of `ops[i] ∘ ops[j]`, `None` where the product leaves the set.
    pub fn composition_table(&self) -> Result<Vec<Vec<Option<usize>>>> {
        let ops = self.ops()?;
        Ok(ops
            .iter()
            .map(|f| ops.iter().map(|g| self.index_of(&compose_unary(f, g))).collect())
            .collect())
    }
}

fn is_permutation(t: &[u32]) -> bool {
    let mut seen = vec![false; t.len()];
    t.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
}

/// `f ∘ g` on finite tables: `x ↦ f(g(x))`.
pub(crate) fn compose_unary(f: &FinOp, g: &FinOp) -> FinOp {
    let (ft, gt) = (f.table().unwrap(), g.table().unwrap());
    FinOp::from_table_unchecked(f.carrier(), 1, gt.iter().map(|&x| ft[x as usize]).collect())
}

/// A finite monoid all of whose members are invertible within it.
#[derive(Clone, Debug)]
pub struct GroupSet(MonoidSet);

impl GroupSet {
    pub fn new(m: MonoidSet) -> Result<GroupSet> {
        let ops = m.ops()?;
        let id = FinOp::identity(m.carrier());
        if !ops.is_empty() && !m.contains(&id) {
            return Err(Error::Invalid("group without identity".into()));
        }
        for g in ops {
            let has_inverse = ops.iter().any(|h| compose_unary(g, h) == id && compose_unary(h, g) == id);
            if !has_inverse {
                return Err(Error::Invalid(format!("{} has no inverse in the set", g.label())));
            }
        }
        Ok(GroupSet(m))
    }

    pub fn monoid(&self) -> &MonoidSet {
        &self.0
    }

    pub fn ops(&self) -> &[FinOp] {
        self.0.ops().expect("groups are extensional")
    }

    pub fn inverse_of(&self, g: &FinOp) -> Option<FinOp> {
        let id = FinOp::identity(self.0.carrier());
        self.ops().iter().find(|h| compose_unary(g, h) == id).cloned()
    }
}

/// Least composition-closed set containing `gens` and the identity.
pub fn close_under_composition(carrier: &Carrier, gens: &[FinOp]) -> Result<MonoidSet> {
    carrier.require_finite("composition closure on a lazy carrier")?;
    let mut members: Vec<FinOp> = Vec::new();
    let mut index: HashMap<FinOp, usize> = HashMap::new();
    let mut queue: VecDeque<FinOp> = VecDeque::new();
    let start = std::iter::once(FinOp::identity(carrier)).chain(gens.iter().cloned());
    for g in start {
        if g.arity() != 1 || g.carrier() != carrier || g.table().is_none() {
            return Err(Error::Invalid("generators must be unary tables on the carrier".into()));
        }
        if !index.contains_key(&g) {
            index.insert(g.clone(), members.len());
            members.push(g.clone());
            queue.push_back(g);
        }
    }
    while let Some(x) = queue.pop_front() {
        let snapshot = members.clone();
        for y in &snapshot {
            for z in [compose_unary(&x, y), compose_unary(y, &x)] {
                if !index.contains_key(&z) {
                    index.insert(z.clone(), members.len());
                    members.push(z.clone());
                    queue.push_back(z);
                }
            }
        }
    }
    MonoidSet::from_ops(carrier, members)
}

/// The members with a two-sided inverse inside `m`.
pub fn invertibles(m: &MonoidSet) -> Result<GroupSet> {
    let ops = m.ops()?;
    let id = FinOp::identity(m.carrier());
    let units = ops
        .iter()
        .filter(|g| ops.iter().any(|h| compose_unary(g, h) == id && compose_unary(h, g) == id))
        .cloned()
        .collect::<Vec<_>>();
    GroupSet::new(MonoidSet::from_ops(m.carrier(), units)?)
}

/// Reachability sets `R(c) = { f(c) : f ∈ S }` as bitmasks over the carrier.
fn reach(s: &MonoidSet) -> Result<Vec<Vec<bool>>> {
    let n = s.carrier().require_finite("orbit computation on a lazy carrier")?;
    let ops = s.ops()?;
    let mut r = vec![vec![false; n]; n];
    for f in ops {
        for (c, &v) in f.table().unwrap().iter().enumerate() {
            r[c][v as usize] = true;
        }
    }
    Ok(r)
}

pub fn is_transitive(s: &MonoidSet) -> Result<bool> {
    let r = reach(s)?;
    Ok(r.iter().all(|row| row.iter().all(|&b| b)))
}

/// For all `a, b` there are `f, g ∈ S` and `c` with `f(c) = a` and `g(c) = b`.
pub fn is_weakly_directed(s: &MonoidSet) -> Result<bool> {
    let r = reach(s)?;
    let n = r.len();
    Ok((0..n).all(|a| (0..n).all(|b| r.iter().any(|row| row[a] && row[b]))))
}

/// A common base point `c` and members `f_i` with `f_i(c) = a_i`. The
/// smallest working `c` is returned, each `f_i` is the first suitable member
/// in canonical order.
pub fn weakly_directed_witnesses(s: &MonoidSet, targets: &[u32]) -> Result<(u32, Vec<FinOp>)> {
    let n = s.carrier().require_finite("witness search on a lazy carrier")?;
    let ops = s.ops()?;
    if let Some(&bad) = targets.iter().find(|&&a| a as usize >= n) {
        return Err(Error::OutOfRange { value: bad as u64, size: n });
    }
    for c in 0..n {
        let picks: Option<Vec<FinOp>> = targets
            .iter()
            .map(|&a| ops.iter().find(|f| f.table().unwrap()[c] == a).cloned())
            .collect();
        if let Some(fs) = picks {
            return Ok((c as u32, fs));
        }
    }
    Err(Error::NoWitness(format!("no base point reaches all of {targets:?}")))
}

/// `{ g ∈ G : g ∘ h = h ∘ g for all h ∈ G }`.
pub fn centre(g: &GroupSet) -> Vec<FinOp> {
    let ops = g.ops();
    ops.iter()
        .filter(|x| ops.iter().all(|y| compose_unary(x, y) == compose_unary(y, x)))
        .cloned()
        .collect()
}

/// Injective monoid endomorphisms of `m` fixing every member of `fixed`,
/// each as the list `ψ(i)` of member indices. For finite monoids these are
/// permutations of the member indices.
pub fn injective_endos_fixing(m: &MonoidSet, fixed: &[FinOp]) -> Result<Vec<Vec<usize>>> {
    let ops = m.ops()?;
    let comp = m.composition_table()?;
    let mut start = EndoSearch::new(ops.len());
    let id = FinOp::identity(m.carrier());
    let id_idx = m.index_of(&id).ok_or_else(|| Error::Invalid("monoid without identity".into()))?;
    let mut seeds = vec![id_idx];
    for g in fixed {
        seeds.push(m.index_of(g).ok_or_else(|| Error::Invalid(format!("{} is not a member", g.label())))?);
    }
    for i in seeds {
        if !start.assign(i, i, &comp) {
            return Ok(Vec::new());
        }
    }
    let mut out = Vec::new();
    start.search(&comp, &mut out);
    out.sort();
    Ok(out)
}

#[derive(Clone)]
struct EndoSearch {
    image: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl EndoSearch {
    fn new(n: usize) -> Self {
        EndoSearch { image: vec![None; n], used: vec![false; n] }
    }

    /// Sets `ψ(x) = t` and propagates `ψ(a∘b) = ψ(a)∘ψ(b)`; false on conflict.
    fn assign(&mut self, x: usize, t: usize, comp: &[Vec<Option<usize>>]) -> bool {
        let mut work = vec![(x, t)];
        while let Some((x, t)) = work.pop() {
            match self.image[x] {
                Some(old) if old == t => continue,
                Some(_) => return false,
                None => {}
            }
            if self.used[t] {
                return false;
            }
            self.image[x] = Some(t);
            self.used[t] = true;
            let assigned: Vec<(usize, usize)> = self
                .image
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (i, v)))
                .collect();
            for &(y, u) in &assigned {
                for (a, b, ia, ib) in [(x, y, t, u), (y, x, u, t)] {
                    let (Some(src), Some(dst)) = (comp[a][b], comp[ia][ib]) else {
                        // the source product is always a member; its image must be too
                        if comp[a][b].is_some() {
                            return false;
                        }
                        continue;
                    };
                    match self.image[src] {
                        Some(v) if v != dst => return false,
                        Some(_) => {}
                        None => work.push((src, dst)),
                    }
                }
            }
        }
        true
    }

    fn search(&self, comp: &[Vec<Option<usize>>], out: &mut Vec<Vec<usize>>) {
        let Some(x) = self.image.iter().position(Option::is_none) else {
            out.push(self.image.iter().map(|v| v.unwrap()).collect());
            return;
        };
        for t in 0..self.used.len() {
            if self.used[t] {
                continue;
            }
            let mut next = self.clone();
            if next.assign(x, t, comp) {
                next.search(comp, out);
            }
        }
    }
}

/// The implication `φ1|G = φ2|G ⇒ M1 = M2 ∧ φ1 = φ2` over all monoid
/// isomorphisms `φi: M → Mi` onto images `M1 ⊆ M2` of injective
/// endomorphisms of `M` that fix `G` pointwise.
pub fn group_extension_condition(m: &MonoidSet, g: &[FinOp]) -> Result<bool> {
    let all = injective_endos_fixing(m, &[])?;
    let fixing = injective_endos_fixing(m, g)?;
    let image = |psi: &Vec<usize>| {
        let mut s = psi.clone();
        s.sort();
        s
    };
    let class: Vec<Vec<usize>> = {
        let mut c: Vec<Vec<usize>> = fixing.iter().map(image).collect();
        c.sort();
        c.dedup();
        c
    };
    let g_idx: Vec<usize> = g.iter().filter_map(|x| m.index_of(x)).collect();
    let isos: Vec<(&Vec<usize>, Vec<usize>)> =
        all.iter().map(|p| (p, image(p))).filter(|(_, im)| class.contains(im)).collect();
    for (p1, m1) in &isos {
        for (p2, m2) in &isos {
            let subset = m1.iter().all(|x| m2.binary_search(x).is_ok());
            if !subset || g_idx.iter().any(|&i| p1[i] != p2[i]) {
                continue;
            }
            if m1 != m2 || p1 != p2 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `phi(f) = θ ∘ f ∘ θ⁻¹` for every member of a finite monoid.
pub fn is_action_isomorphism(
    m: &MonoidSet,
    phi: impl Fn(&FinOp) -> Result<FinOp> + Sync,
    theta: &Bijection,
) -> Result<bool> {
    let ops = m.ops()?;
    ops.par_iter()
        .map(|f| Ok(phi(f)? == theta.conjugate(f)?))
        .collect::<Result<Vec<bool>>>()
        .map(|v| v.into_iter().all(|b| b))
}

/// Window-level version for lazy carriers: compares `phi(f)` with the
/// conjugate of `f` on each of the given windows, for each test operation.
pub fn is_action_isomorphism_on_windows(
    test_ops: &[FinOp],
    phi: impl Fn(&FinOp) -> Result<FinOp>,
    theta: &Bijection,
    windows: &[Window],
) -> Result<bool> {
    for f in test_ops {
        let lhs = phi(f)?;
        let rhs = theta.conjugate(f)?;
        for w in windows {
            if !crate::fnspace::equal_on_window(&lhs, &rhs, w)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Member tables in canonical order.
pub fn tables(m: &MonoidSet) -> Result<Vec<Vec<u32>>> {
    Ok(m.ops()?.iter().map(|f| f.table().unwrap().to_vec()).collect())
}

impl WindowMembership for MonoidSet {
    fn admits(&self, f: &FinOp, window: &Window) -> Result<bool> {
        for g in self.ops()? {
            if crate::fnspace::equal_on_window(f, g, window)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
