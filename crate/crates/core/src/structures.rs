//! Relational structures, their hom-sets, homogeneity and the lazy catalog.
//!
//! Finite relations are dense boolean tables indexed like operation tables.
//! Catalog structures are predicates: `(ℚ,<)` compares fractions exactly and
//! the Rado graph uses the BIT presentation, where `i < j` are adjacent iff
//! bit `i` of `j` is set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnspace::{advance, table_len, tuple_at, tuple_index, Carrier, Elem, FinOp};
use crate::monoid::{GroupSet, MonoidSet};

/// Default bound on the carrier size for exhaustive hom-set enumeration.
pub const HOM_SET_MAX_ELEMENTS: usize = 7;
/// Candidates tried below the explicit encoding in [`rado_extension_witness`].
pub const RADO_WITNESS_SEARCH: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

type Predicate = dyn Fn(&[Elem]) -> Result<bool> + Send + Sync;

#[derive(Clone)]
pub enum Relation {
    /// Membership per tuple index.
    Table(Vec<bool>),
    Predicate(Arc<Predicate>),
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Table(t) => write!(f, "Table({} tuples)", t.iter().filter(|b| **b).count()),
            Relation::Predicate(_) => f.write_str("Predicate"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelStructure {
    name: Option<String>,
    carrier: Carrier,
    signature: Vec<Symbol>,
    relations: Vec<Relation>,
}

impl RelStructure {
    /// A finite structure; `tuples[i]` lists the members of relation `i`.
    pub fn finite(size: usize, signature: Vec<Symbol>, tuples: Vec<Vec<Vec<u32>>>) -> Result<RelStructure> {
        let carrier = Carrier::finite(size)?;
        if signature.len() != tuples.len() {
            return Err(Error::Invalid(format!("{} symbols but {} relations", signature.len(), tuples.len())));
        }
        let mut relations = Vec::with_capacity(signature.len());
        for (sym, ts) in signature.iter().zip(tuples) {
            let mut table = vec![false; table_len(size, sym.arity)?];
            for t in ts {
                if t.len() != sym.arity {
                    return Err(Error::ArityMismatch(format!("tuple of length {} in {}", t.len(), sym.name)));
                }
                if let Some(&v) = t.iter().find(|&&v| v as usize >= size) {
                    return Err(Error::OutOfRange { value: v as u64, size });
                }
                table[tuple_index(size, &t)] = true;
            }
            relations.push(Relation::Table(table));
        }
        Ok(RelStructure { name: None, carrier, signature, relations })
    }

    /// A structure whose relations are decided by predicates.
    pub fn lazy(carrier: &Carrier, signature: Vec<Symbol>, predicates: Vec<Arc<Predicate>>) -> Result<RelStructure> {
        if signature.len() != predicates.len() {
            return Err(Error::Invalid("one predicate per symbol required".into()));
        }
        Ok(RelStructure {
            name: None,
            carrier: carrier.clone(),
            signature,
            relations: predicates.into_iter().map(Relation::Predicate).collect(),
        })
    }

    /// A simple graph with one symmetric binary relation `E`.
    pub fn graph(size: usize, edges: &[(u32, u32)]) -> Result<RelStructure> {
        let mut tuples = Vec::new();
        for &(a, b) in edges {
            tuples.push(vec![a, b]);
            tuples.push(vec![b, a]);
        }
        RelStructure::finite(size, vec![Symbol { name: "E".into(), arity: 2 }], vec![tuples])
    }

    pub fn cycle(n: usize) -> Result<RelStructure> {
        let edges: Vec<_> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        RelStructure::graph(n, &edges)
    }

    pub fn path(n: usize) -> Result<RelStructure> {
        let edges: Vec<_> = (1..n as u32).map(|i| (i - 1, i)).collect();
        RelStructure::graph(n, &edges)
    }

    pub fn complete(n: usize) -> Result<RelStructure> {
        RelStructure::complete_multipartite(&vec![1; n])
    }

    pub fn edgeless(n: usize) -> Result<RelStructure> {
        RelStructure::graph(n, &[])
    }

    /// Complete multipartite graph with the given part sizes.
    pub fn complete_multipartite(parts: &[usize]) -> Result<RelStructure> {
        let part: Vec<usize> = parts.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k)).collect();
        let n = part.len() as u32;
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| part[a as usize] != part[b as usize])
            .collect();
        RelStructure::graph(part.len(), &edges)
    }

    /// `(ℚ,<)`.
    pub fn rationals_order() -> RelStructure {
        let pred: Arc<Predicate> = Arc::new(|t: &[Elem]| match (t[0].rat(), t[1].rat()) {
            (Some(a), Some(b)) => Ok(a < b),
            _ => Err(Error::NotInCarrier(t[0].clone())),
        });
        let mut s = RelStructure::lazy(&Carrier::Rationals, vec![Symbol { name: "<".into(), arity: 2 }], vec![pred])
            .expect("one symbol");
        s.name = Some("rationals-order".into());
        s
    }

    /// The Rado graph in the BIT presentation; loops are absent.
    pub fn rado() -> RelStructure {
        let pred: Arc<Predicate> = Arc::new(|t: &[Elem]| match (t[0].nat(), t[1].nat()) {
            (Some(a), Some(b)) => Ok(a != b && rado_adjacency(a, b)?),
            _ => Err(Error::NotInCarrier(t[0].clone())),
        });
        let mut s = RelStructure::lazy(&Carrier::Rado, vec![Symbol { name: "E".into(), arity: 2 }], vec![pred])
            .expect("one symbol");
        s.name = Some("rado".into());
        s
    }

    /// Catalog lookup by name: `"rationals-order"` or `"rado"`.
    pub fn catalog(name: &str) -> Result<RelStructure> {
        match name {
            "rationals-order" => Ok(RelStructure::rationals_order()),
            "rado" => Ok(RelStructure::rado()),
            _ => Err(Error::Invalid(format!("unknown catalog structure {name:?}"))),
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn signature(&self) -> &[Symbol] {
        &self.signature
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn size(&self) -> Option<usize> {
        self.carrier.size()
    }

    /// Whether relation `rel` holds of `tuple`.
    pub fn holds(&self, rel: usize, tuple: &[Elem]) -> Result<bool> {
        let sym = &self.signature[rel];
        if tuple.len() != sym.arity {
            return Err(Error::ArityMismatch(format!("{} expects {} arguments", sym.name, sym.arity)));
        }
        for e in tuple {
            self.carrier.check(e)?;
        }
        match &self.relations[rel] {
            Relation::Table(t) => {
                let codes: Vec<u32> = tuple.iter().map(|e| e.nat().unwrap() as u32).collect();
                Ok(t[tuple_index(self.carrier.size().unwrap(), &codes)])
            }
            Relation::Predicate(p) => p(tuple),
        }
    }

    fn table(&self, rel: usize) -> &[bool] {
        match &self.relations[rel] {
            Relation::Table(t) => t,
            Relation::Predicate(_) => unreachable!("finite structures have tables"),
        }
    }

    /// Member tuples of a finite relation, in index order.
    pub fn tuples(&self, rel: usize) -> Result<Vec<Vec<u32>>> {
        let size = self.carrier.require_finite("listing tuples of a lazy relation")?;
        let arity = self.signature[rel].arity;
        let mut out = Vec::new();
        for (i, &b) in self.table(rel).iter().enumerate() {
            if b {
                let mut t = vec![0; arity];
                tuple_at(size, arity, i, &mut t);
                out.push(t);
            }
        }
        Ok(out)
    }
}

/// A finite injective partial map between carriers. Serializes as a list
/// of `[x, y]` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<(Elem, Elem)>", try_from = "Vec<(Elem, Elem)>")]
pub struct PartialIso {
    forward: BTreeMap<Elem, Elem>,
    backward: BTreeMap<Elem, Elem>,
}

impl PartialIso {
    pub fn new() -> PartialIso {
        PartialIso::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Elem, Elem)>) -> Result<PartialIso> {
        let mut p = PartialIso::new();
        for (a, b) in pairs {
            p.insert(a, b)?;
        }
        Ok(p)
    }

    /// Adds `a ↦ b`; re-adding an existing pair is a no-op.
    pub fn insert(&mut self, a: Elem, b: Elem) -> Result<()> {
        match (self.forward.get(&a), self.backward.get(&b)) {
            (Some(x), _) if *x == b => Ok(()),
            (None, None) => {
                self.forward.insert(a.clone(), b.clone());
                self.backward.insert(b, a);
                Ok(())
            }
            _ => Err(Error::Invalid(format!("{a} ↦ {b} breaks injectivity or functionality"))),
        }
    }

    pub fn get(&self, a: &Elem) -> Option<&Elem> {
        self.forward.get(a)
    }

    pub fn get_inverse(&self, b: &Elem) -> Option<&Elem> {
        self.backward.get(b)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Elem> {
        self.forward.keys()
    }

    pub fn range(&self) -> impl Iterator<Item = &Elem> {
        self.backward.keys()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Elem, &Elem)> {
        self.forward.iter()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn inverse(&self) -> PartialIso {
        PartialIso { forward: self.backward.clone(), backward: self.forward.clone() }
    }

    /// Whether this map preserves and reflects every relation of `a` (into
    /// `b`) on tuples drawn from its domain.
    pub fn is_partial_iso(&self, a: &RelStructure, b: &RelStructure) -> Result<bool> {
        if a.signature != b.signature {
            return Err(Error::Invalid("structures with different signatures".into()));
        }
        let dom: Vec<&Elem> = self.forward.keys().collect();
        for (x, y) in &self.forward {
            a.carrier.check(x)?;
            b.carrier.check(y)?;
        }
        if dom.is_empty() {
            return Ok(true);
        }
        for (r, sym) in a.signature.iter().enumerate() {
            let mut idx = vec![0usize; sym.arity];
            loop {
                let src: Vec<Elem> = idx.iter().map(|&i| dom[i].clone()).collect();
                let dst: Vec<Elem> = src.iter().map(|e| self.forward[e].clone()).collect();
                if a.holds(r, &src)? != b.holds(r, &dst)? {
                    return Ok(false);
                }
                if !advance(&mut idx, dom.len()) {
                    break;
                }
            }
        }
        Ok(true)
    }

    /// Whether the total unary map `f` agrees with this map on its domain.
    pub fn extended_by(&self, f: &FinOp) -> Result<bool> {
        for (x, y) in &self.forward {
            if f.apply(x)? != *y {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl From<PartialIso> for Vec<(Elem, Elem)> {
    fn from(p: PartialIso) -> Self {
        p.forward.into_iter().collect()
    }
}

impl TryFrom<Vec<(Elem, Elem)>> for PartialIso {
    type Error = Error;

    fn try_from(pairs: Vec<(Elem, Elem)>) -> Result<Self> {
        PartialIso::from_pairs(pairs)
    }
}

impl fmt::Display for PartialIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.forward.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}↦{b}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MapKind {
    Hom,
    Emb,
}

/// Backtracking over maps `A → B`, checking each tuple once all of its
/// coordinates are assigned.
fn map_search(a: &RelStructure, b: &RelStructure, kind: MapKind, cap: usize) -> Result<Vec<FinOp>> {
    let n = a.carrier.require_finite("hom-sets of lazy structures")?;
    let m = b.carrier.require_finite("hom-sets of lazy structures")?;
    if n > cap || m > cap {
        return Err(Error::BudgetExceeded { what: "hom-set carrier size", cap });
    }
    if a.signature != b.signature {
        return Err(Error::Invalid("structures with different signatures".into()));
    }
    // tuples grouped by their largest coordinate
    let mut by_last: Vec<Vec<(usize, Vec<u32>, bool)>> = vec![Vec::new(); n];
    for (r, sym) in a.signature.iter().enumerate() {
        let table = a.table(r);
        let mut t = vec![0u32; sym.arity];
        for (i, &inside) in table.iter().enumerate() {
            if !inside && kind == MapKind::Hom {
                continue;
            }
            tuple_at(n, sym.arity, i, &mut t);
            let last = t.iter().copied().max().unwrap_or(0) as usize;
            by_last[last].push((r, t.clone(), inside));
        }
    }
    let mut out = Vec::new();
    let mut assignment = vec![0u32; n];
    let mut used = vec![false; m];
    fn go(
        k: usize,
        n: usize,
        m: usize,
        b: &RelStructure,
        kind: MapKind,
        by_last: &[Vec<(usize, Vec<u32>, bool)>],
        assignment: &mut Vec<u32>,
        used: &mut Vec<bool>,
        out: &mut Vec<FinOp>,
    ) {
        if k == n {
            out.push(FinOp::from_table_unchecked(&Carrier::Finite(n), 1, assignment.clone()));
            return;
        }
        for v in 0..m as u32 {
            if kind == MapKind::Emb && used[v as usize] {
                continue;
            }
            assignment[k] = v;
            let ok = by_last[k].iter().all(|(r, t, inside)| {
                let img: Vec<u32> = t.iter().map(|&x| assignment[x as usize]).collect();
                b.table(*r)[tuple_index(m, &img)] == *inside
            });
            if ok {
                used[v as usize] = true;
                go(k + 1, n, m, b, kind, by_last, assignment, used, out);
                used[v as usize] = false;
            }
        }
    }
    go(0, n, m, b, kind, &by_last, &mut assignment, &mut used, &mut out);
    Ok(out)
}

/// All homomorphisms `A → B` as unary tables, in lexicographic order.
pub fn hom_set(a: &RelStructure, b: &RelStructure) -> Result<Vec<FinOp>> {
    hom_set_capped(a, b, HOM_SET_MAX_ELEMENTS)
}

pub fn hom_set_capped(a: &RelStructure, b: &RelStructure, cap: usize) -> Result<Vec<FinOp>> {
    map_search(a, b, MapKind::Hom, cap)
}

/// All embeddings (injective, preserving and reflecting) `A → B`.
pub fn emb_set(a: &RelStructure, b: &RelStructure) -> Result<Vec<FinOp>> {
    map_search(a, b, MapKind::Emb, HOM_SET_MAX_ELEMENTS)
}

pub fn end_monoid(a: &RelStructure) -> Result<MonoidSet> {
    MonoidSet::from_ops(a.carrier(), hom_set(a, a)?)
}

pub fn emb_monoid(a: &RelStructure) -> Result<MonoidSet> {
    MonoidSet::from_ops(a.carrier(), emb_set(a, a)?)
}

/// Self-embeddings of a finite structure are bijective, hence automorphisms.
pub fn aut_group(a: &RelStructure) -> Result<GroupSet> {
    GroupSet::new(emb_monoid(a)?)
}

/// Adds `not_R` (the full complement, diagonal tuples included) for every
/// symbol `R`, and the inequality relation `neq`.
pub fn complement_expansion(a: &RelStructure) -> RelStructure {
    let mut signature = a.signature.clone();
    let mut relations = a.relations.clone();
    for (sym, rel) in a.signature.iter().zip(&a.relations) {
        signature.push(Symbol { name: format!("not_{}", sym.name), arity: sym.arity });
        relations.push(match rel {
            Relation::Table(t) => Relation::Table(t.iter().map(|b| !b).collect()),
            Relation::Predicate(p) => {
                let p = p.clone();
                Relation::Predicate(Arc::new(move |t: &[Elem]| p(t).map(|b| !b)))
            }
        });
    }
    signature.push(Symbol { name: "neq".into(), arity: 2 });
    relations.push(match a.carrier.size() {
        Some(n) => Relation::Table((0..n * n).map(|i| i / n != i % n).collect()),
        None => Relation::Predicate(Arc::new(|t: &[Elem]| Ok(t[0] != t[1]))),
    });
    RelStructure { name: a.name.as_ref().map(|s| format!("{s}-complemented")), carrier: a.carrier.clone(), signature, relations }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub homogeneous: bool,
    /// Smallest partial isomorphism with no automorphic extension.
    pub witness: Option<PartialIso>,
}

/// Enumerates partial isomorphisms by increasing domain size (domains and
/// images in lexicographic order) and stops at the first one that no
/// automorphism extends.
pub fn is_homogeneous(a: &RelStructure) -> Result<HomogeneityReport> {
    let n = a.carrier.require_finite("homogeneity of a lazy structure")?;
    let auts = aut_group(a)?;
    let auts: Vec<&[u32]> = auts.ops().iter().map(|f| f.table().unwrap()).collect();
    for k in 1..=n {
        let mut dom: Vec<u32> = (0..k as u32).collect();
        loop {
            let mut img = vec![0usize; k];
            loop {
                let distinct = img.iter().collect::<BTreeSet<_>>().len() == k;
                if distinct {
                    let p = PartialIso::from_pairs(
                        dom.iter().zip(&img).map(|(&x, &y)| (Elem::Nat(x as u64), Elem::Nat(y as u64))),
                    )?;
                    if p.is_partial_iso(a, a)?
                        && !auts.iter().any(|t| dom.iter().zip(&img).all(|(&x, &y)| t[x as usize] as usize == y))
                    {
                        return Ok(HomogeneityReport { homogeneous: false, witness: Some(p) });
                    }
                }
                if !advance(&mut img, n) {
                    break;
                }
            }
            if !next_subset(&mut dom, n as u32) {
                break;
            }
        }
    }
    Ok(HomogeneityReport { homogeneous: true, witness: None })
}

/// Next `k`-subset of `0..n` in lexicographic order.
fn next_subset(s: &mut [u32], n: u32) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if s[i] < n - (k - i) as u32 {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Elements probed for the diagonal condition on lazy carriers.
const LOOPLESS_SAMPLE: u64 = 32;

/// Every relation meets the diagonal either nowhere or everywhere.
pub fn is_loopless(a: &RelStructure) -> Result<bool> {
    let points: Vec<Elem> = match a.carrier.size() {
        Some(_) => a.carrier.elements()?,
        None => (0..LOOPLESS_SAMPLE).map(|i| a.carrier.nth(i)).collect(),
    };
    for (r, sym) in a.signature.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for x in &points {
            seen.insert(a.holds(r, &vec![x.clone(); sym.arity])?);
        }
        if seen.len() > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Adjacency in the Rado graph: for `i < j`, bit `i` of `j`.
pub fn rado_adjacency(i: u64, j: u64) -> Result<bool> {
    if i == j {
        return Err(Error::Invalid(format!("no loops in the Rado graph (vertex {i})")));
    }
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    Ok(lo < 64 && (hi >> lo) & 1 == 1)
}

fn separates(w: u64, u: &[u64], v: &[u64]) -> bool {
    u.iter().all(|&x| x != w && rado_adjacency(x, w).unwrap()) && v.iter().all(|&x| x != w && !rado_adjacency(x, w).unwrap())
}

/// A vertex outside `U ∪ V` adjacent to all of `U` and none of `V`.
///
/// Returns the least such vertex below [`RADO_WITNESS_SEARCH`] when there is
/// one, otherwise the explicit encoding `Σ_{u∈U} 2^u + 2^k` with `k` above
/// every vertex in `U ∪ V`. Fails only when that encoding overflows `u64`.
pub fn rado_extension_witness(u: &[u64], v: &[u64]) -> Result<u64> {
    rado_extension_witness_avoiding(u, v, &[])
}

/// As [`rado_extension_witness`], additionally skipping `avoid`.
pub fn rado_extension_witness_avoiding(u: &[u64], v: &[u64], avoid: &[u64]) -> Result<u64> {
    if let Some(x) = u.iter().find(|x| v.contains(x)) {
        return Err(Error::Invalid(format!("vertex {x} in both U and V")));
    }
    let explicit = rado_explicit_witness(u, &[v, avoid].concat());
    let bound = explicit.map_or(RADO_WITNESS_SEARCH, |e| e.min(RADO_WITNESS_SEARCH));
    if let Some(w) = (0..=bound).find(|&w| !avoid.contains(&w) && separates(w, u, v)) {
        return Ok(w);
    }
    explicit.ok_or(Error::BudgetExceeded { what: "Rado witness encoding bits", cap: 63 })
}

/// `Σ_{u∈U} 2^u + 2^k`, `k = 1 + max(U ∪ V)`, if it fits.
pub fn rado_explicit_witness(u: &[u64], v: &[u64]) -> Option<u64> {
    let k = u.iter().chain(v).max().map_or(0, |m| m + 1);
    if k >= 64 {
        return None;
    }
    Some(u.iter().fold(1u64 << k, |acc, &x| acc | (1 << x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tables(ops: &[FinOp]) -> Vec<Vec<u32>> {
        ops.iter().map(|f| f.table().unwrap().to_vec()).collect()
    }

    #[test]
    fn hom_set_examples() {
        let k2 = RelStructure::complete(2).unwrap();
        let id_swap = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(tables(end_monoid(&k2).unwrap().ops().unwrap()), id_swap);
        assert_eq!(tables(emb_monoid(&k2).unwrap().ops().unwrap()), id_swap);
        assert_eq!(tables(aut_group(&k2).unwrap().ops()), id_swap);
        assert_eq!(hom_set(&RelStructure::edgeless(2).unwrap(), &RelStructure::edgeless(2).unwrap()).unwrap().len(), 4);
        let p3 = RelStructure::path(3).unwrap();
        assert_eq!(tables(aut_group(&p3).unwrap().ops()), vec![vec![0, 1, 2], vec![2, 1, 0]]);
        let big = RelStructure::edgeless(8).unwrap();
        assert!(matches!(hom_set(&big, &big), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn complement_expansion_examples() {
        let k2 = RelStructure::complete(2).unwrap();
        let x = complement_expansion(&k2);
        let names: Vec<_> = x.signature().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["E", "not_E", "neq"]);
        assert_eq!(x.tuples(1).unwrap(), vec![vec![0, 0], vec![1, 1]]);
        assert_eq!(x.tuples(2).unwrap(), vec![vec![0, 1], vec![1, 0]]);
        let id_swap = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(tables(end_monoid(&x).unwrap().ops().unwrap()), id_swap);
        let e2 = complement_expansion(&RelStructure::edgeless(2).unwrap());
        assert_eq!(tables(end_monoid(&e2).unwrap().ops().unwrap()), id_swap);
        let q = complement_expansion(&RelStructure::rationals_order());
        let (a, b) = (Elem::Rat(crate::fnspace::rat(1, 2)), Elem::Rat(crate::fnspace::rat(1, 3)));
        assert!(q.holds(1, &[a.clone(), b]).unwrap());
        assert!(q.holds(1, &[a.clone(), a.clone()]).unwrap());
        assert!(!q.holds(2, &[a.clone(), a]).unwrap());
    }

    #[test]
    fn homogeneity_examples() {
        assert!(is_homogeneous(&RelStructure::cycle(5).unwrap()).unwrap().homogeneous);
        assert!(is_homogeneous(&RelStructure::edgeless(1).unwrap()).unwrap().homogeneous);
        let p4 = is_homogeneous(&RelStructure::path(4).unwrap()).unwrap();
        assert!(!p4.homogeneous);
        let w = p4.witness.unwrap();
        assert_eq!(w, PartialIso::from_pairs([(Elem::Nat(0), Elem::Nat(1))]).unwrap());
        let c6 = is_homogeneous(&RelStructure::cycle(6).unwrap()).unwrap();
        assert_eq!(c6.witness.unwrap().len(), 2);
    }

    #[test]
    fn loopless_examples() {
        assert!(is_loopless(&RelStructure::complete(2).unwrap()).unwrap());
        let mixed = RelStructure::finite(2, vec![Symbol { name: "E".into(), arity: 2 }], vec![vec![vec![0, 0]]]).unwrap();
        assert!(!is_loopless(&mixed).unwrap());
        assert!(is_loopless(&RelStructure::rationals_order()).unwrap());
        assert!(is_loopless(&RelStructure::rado()).unwrap());
    }

    #[test]
    fn rado_examples() {
        assert!(rado_adjacency(0, 1).unwrap());
        assert!(rado_adjacency(1, 2).unwrap());
        assert!(!rado_adjacency(0, 2).unwrap());
        assert!(rado_adjacency(2, 1).unwrap());
        assert!(rado_adjacency(3, 3).is_err());
        assert!(!rado_adjacency(64, 1 << 40).unwrap());
        for (u, v) in [(vec![0], vec![1]), (vec![], vec![]), (vec![0, 1], vec![2])] {
            let w = rado_extension_witness(&u, &v).unwrap();
            assert!(separates(w, &u, &v), "{w}");
        }
        assert_eq!(rado_explicit_witness(&[0, 1], &[2]), Some(0b1011));
        assert_eq!(rado_explicit_witness(&[63], &[]), None);
    }

    #[test]
    fn partial_iso_checks() {
        let rado = RelStructure::rado();
        let bad = PartialIso::from_pairs([(Elem::Nat(0), Elem::Nat(0)), (Elem::Nat(1), Elem::Nat(2))]).unwrap();
        assert!(!bad.is_partial_iso(&rado, &rado).unwrap());
        let good = PartialIso::from_pairs([(Elem::Nat(0), Elem::Nat(0)), (Elem::Nat(1), Elem::Nat(3))]).unwrap();
        assert!(good.is_partial_iso(&rado, &rado).unwrap());
        let mut p = PartialIso::new();
        p.insert(Elem::Nat(1), Elem::Nat(2)).unwrap();
        assert!(p.insert(Elem::Nat(3), Elem::Nat(2)).is_err());
        assert!(p.insert(Elem::Nat(1), Elem::Nat(2)).is_ok());
    }

    #[test]
    fn finite_homogeneous_structures_have_transitive_and_full_aut() {
        for s in [
            RelStructure::cycle(5).unwrap(),
            RelStructure::complete(3).unwrap(),
            RelStructure::edgeless(3).unwrap(),
            RelStructure::complete_multipartite(&[2, 2]).unwrap(),
        ] {
            assert!(is_homogeneous(&s).unwrap().homogeneous);
            let aut = aut_group(&s).unwrap();
            assert!(crate::monoid::is_transitive(aut.monoid()).unwrap());
            assert_eq!(aut.ops(), emb_monoid(&s).unwrap().ops().unwrap());
        }
    }

    proptest! {
        #[test]
        fn rado_witnesses_verify(u in proptest::collection::btree_set(0u64..40, 0..5),
                                 v in proptest::collection::btree_set(0u64..40, 0..5)) {
            let u: Vec<u64> = u.into_iter().collect();
            let v: Vec<u64> = v.into_iter().filter(|x| !u.contains(x)).collect();
            let w = rado_extension_witness(&u, &v).unwrap();
            prop_assert!(separates(w, &u, &v));
        }

        #[test]
        fn complement_expansion_end_is_emb(edges in proptest::collection::vec((0u32..4, 0u32..4), 0..8)) {
            let s = RelStructure::finite(4, vec![Symbol { name: "R".into(), arity: 2 }],
                vec![edges.iter().map(|&(a, b)| vec![a, b]).collect()]).unwrap();
            let end = end_monoid(&complement_expansion(&s)).unwrap();
            let emb = emb_monoid(&s).unwrap();
            prop_assert_eq!(end.ops().unwrap(), emb.ops().unwrap());
        }
    }
}
