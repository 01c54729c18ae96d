//! Pointwise-convergence machinery on finite windows: entourages, density
//! witnesses, interpolants and window closures.
//!
//! On lazy carriers everything here is checked on finite windows and finite
//! test sets only; reports carry the status `"window-verified"`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::backforth::{alternative_step, Catalog, LazyAutomorphism};
use crate::error::{Error, Result};
use crate::fnspace::{equal_on_window, rat, Carrier, Elem, FinOp, Window};
use crate::monoid::{GroupSet, MonoidSet};
use crate::structures::PartialIso;

pub const WINDOW_VERIFIED: &str = "window-verified";

/// The equivalence `α_J`: agreement on the window `J`.
#[derive(Clone, Debug)]
pub struct Entourage {
    window: Window,
}

impl Entourage {
    pub fn new(window: Window) -> Entourage {
        Entourage { window }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn related(&self, f1: &FinOp, f2: &FinOp) -> Result<bool> {
        equal_on_window(f1, f2, &self.window)
    }
}

/// A permutation group that can produce members agreeing with a given map
/// on a finite window.
pub trait GroupOracle: Send + Sync {
    fn carrier(&self) -> Carrier;

    /// A member agreeing with `f` on `window`. Variant 0 is the canonical
    /// choice; other variants are members that still agree on `window` but
    /// are built from different seeds.
    fn interpolant(&self, f: &FinOp, window: &Window, variant: usize) -> Result<FinOp>;
}

/// A finite group given extensionally. Variant `v` picks the `v`-th
/// agreeing member in canonical order (cyclically); variant 0 returns `f`
/// itself when it is a member.
#[derive(Clone, Debug)]
pub struct FiniteGroup(pub GroupSet);

impl GroupOracle for FiniteGroup {
    fn carrier(&self) -> Carrier {
        self.0.monoid().carrier().clone()
    }

    fn interpolant(&self, f: &FinOp, window: &Window, variant: usize) -> Result<FinOp> {
        if variant == 0 && self.0.monoid().contains(f) {
            return Ok(f.clone());
        }
        let mut agreeing = Vec::new();
        for g in self.0.ops() {
            if equal_on_window(f, g, window)? {
                agreeing.push(g);
            }
        }
        if agreeing.is_empty() {
            return Err(Error::InterpolationFailed);
        }
        Ok(agreeing[variant % agreeing.len()].clone())
    }
}

/// The automorphism group of a catalog structure, interpolating by
/// back-and-forth from the restriction of `f` to the window. Variant `v ≥ 1`
/// adds one more pair, at the `v`-th point of [`variant_points`] outside the
/// window, with a non-canonical image.
#[derive(Clone, Copy, Debug)]
pub struct CatalogGroup(pub Catalog);

/// Points where interpolant variants deviate. For the rationals the
/// enumeration is interleaved with `-4, 16, -64, ...` so that variants also
/// move the tails; Rado uses the enumeration (large vertices are costly).
pub fn variant_points(catalog: Catalog) -> Box<dyn Iterator<Item = Elem>> {
    let carrier = catalog.carrier();
    let small = (0u64..).map(move |i| carrier.nth(i));
    match catalog {
        Catalog::RationalsOrder => {
            let far = (1u32..).map(|j| {
                let m = rat(4i64.pow(j.min(31)), 1);
                Elem::Rat(if j % 2 == 1 { -m } else { m })
            });
            Box::new(small.zip(far).flat_map(|(a, b)| [a, b]))
        }
        Catalog::Rado => Box::new(small),
    }
}

impl CatalogGroup {
    pub fn seed(&self, f: &FinOp, window: &Window, variant: usize) -> Result<PartialIso> {
        let pairs = window.points().iter().map(|x| Ok((x.clone(), f.apply(x)?))).collect::<Result<Vec<_>>>()?;
        let seed = PartialIso::from_pairs(pairs).map_err(|_| Error::InterpolationFailed)?;
        let s = self.0.structure();
        if !seed.is_partial_iso(&s, &s)? {
            return Err(Error::InterpolationFailed);
        }
        if variant == 0 {
            return Ok(seed);
        }
        let extra = variant_points(self.0).filter(|e| !window.contains(e)).nth(variant - 1).expect("infinite sequence");
        alternative_step(self.0, &seed, &extra)
    }

    pub fn automorphism(&self, f: &FinOp, window: &Window, variant: usize) -> Result<LazyAutomorphism> {
        LazyAutomorphism::new(self.0, self.seed(f, window, variant)?)
    }
}

impl GroupOracle for CatalogGroup {
    fn carrier(&self) -> Carrier {
        self.0.carrier()
    }

    fn interpolant(&self, f: &FinOp, window: &Window, variant: usize) -> Result<FinOp> {
        let aut = self.automorphism(f, window, variant)?.shared();
        Ok(aut.to_bijection().forward().clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityEntry {
    pub op: String,
    /// Restriction of the interpolant to the window, `None` on failure.
    pub witness: Option<Vec<Elem>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    pub status: String,
    pub window: Vec<Elem>,
    pub dense: bool,
    pub entries: Vec<DensityEntry>,
}

/// Whether every test operation has an interpolant in `group` on `window`.
/// Returns the interpolants alongside the report.
pub fn is_dense_at_window(
    group: &dyn GroupOracle,
    test_ops: &[FinOp],
    window: &Window,
) -> Result<(DensityReport, Vec<Option<FinOp>>)> {
    let mut entries = Vec::with_capacity(test_ops.len());
    let mut witnesses = Vec::with_capacity(test_ops.len());
    for f in test_ops {
        match group.interpolant(f, window, 0) {
            Ok(g) => {
                if !equal_on_window(f, &g, window)? {
                    return Err(Error::Invalid("oracle returned a non-agreeing interpolant".into()));
                }
                entries.push(DensityEntry { op: f.label(), witness: Some(g.restrict(window)?) });
                witnesses.push(Some(g));
            }
            Err(Error::InterpolationFailed) => {
                entries.push(DensityEntry { op: f.label(), witness: None });
                witnesses.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let dense = witnesses.iter().all(Option::is_some);
    let report = DensityReport {
        status: WINDOW_VERIFIED.into(),
        window: window.points().iter().cloned().collect(),
        dense,
        entries,
    };
    Ok((report, witnesses))
}

/// Extensional density check for finite `G ⊆ M`.
pub fn is_dense_finite(g: &GroupSet, m: &MonoidSet, window: &Window) -> Result<(DensityReport, Vec<Option<FinOp>>)> {
    is_dense_at_window(&FiniteGroup(g.clone()), m.ops()?, window)
}

/// The `α_J`-classes of `ops`, as restriction tables on the window.
pub fn closure_at_window(ops: &[FinOp], window: &Window) -> Result<BTreeSet<Vec<Elem>>> {
    ops.iter().map(|f| f.restrict(window)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backforth::{random_automorphism, RatMap};
    use crate::fnspace::Bijection;
    use crate::monoid::close_under_composition;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> Elem {
        Elem::Rat(rat(n, 1))
    }

    #[test]
    fn density_examples() {
        let b = Carrier::Finite(2);
        let m = MonoidSet::full(&b).unwrap();
        let sym = GroupSet::new(MonoidSet::symmetric(&b).unwrap()).unwrap();
        let (r, w) = is_dense_finite(&sym, sym.monoid(), &Window::new(&b, [Elem::Nat(0), Elem::Nat(1)]).unwrap()).unwrap();
        assert!(r.dense);
        assert_eq!(w.into_iter().map(Option::unwrap).collect::<Vec<_>>(), sym.ops());

        let trivial = GroupSet::new(MonoidSet::from_tables(&b, [vec![0, 1]]).unwrap()).unwrap();
        let full = Window::new(&b, [Elem::Nat(0), Elem::Nat(1)]).unwrap();
        let (r, _) = is_dense_finite(&trivial, &m, &full).unwrap();
        assert!(!r.dense);
        assert_eq!(r.entries.iter().filter(|e| e.witness.is_none()).count(), 3);

        let double = RatMap::affine(rat(2, 1), rat(0, 1)).unwrap().to_op();
        let j = Window::new(&Carrier::Rationals, [q(0), q(1), q(2)]).unwrap();
        let (r, w) = is_dense_at_window(&CatalogGroup(Catalog::RationalsOrder), &[double], &j).unwrap();
        assert!(r.dense);
        assert_eq!(r.status, WINDOW_VERIFIED);
        assert_eq!(r.entries[0].witness, Some(vec![q(0), q(2), q(4)]));
        let g = w[0].as_ref().unwrap();
        assert_eq!(g.apply(&Elem::Rat(rat(1, 2))).unwrap(), q(1));
        assert_eq!(g.apply(&q(3)).unwrap(), q(5));
    }

    #[test]
    fn interpolant_examples() {
        let b = Carrier::Finite(3);
        let s3 = GroupSet::new(MonoidSet::symmetric(&b).unwrap()).unwrap();
        let f = FinOp::from_table(&b, 1, vec![1, 2, 0]).unwrap();
        let j = Window::new(&b, [Elem::Nat(0)]).unwrap();
        assert_eq!(FiniteGroup(s3.clone()).interpolant(&f, &j, 0).unwrap(), f);
        let c = FinOp::from_table(&b, 1, vec![0, 0, 0]).unwrap();
        assert!(matches!(
            FiniteGroup(s3).interpolant(&c, &Window::new(&b, [Elem::Nat(0), Elem::Nat(1)]).unwrap(), 0),
            Err(Error::InterpolationFailed)
        ));

        let shift = RatMap::affine(rat(1, 1), rat(1, 1)).unwrap().to_op();
        let j = Window::new(&Carrier::Rationals, [q(0), q(1)]).unwrap();
        let g = CatalogGroup(Catalog::RationalsOrder).interpolant(&shift, &j, 0).unwrap();
        for x in [-7, 0, 3, 11] {
            assert_eq!(g.apply(&q(x)).unwrap(), q(x + 1));
        }

        let mut emb = crate::backforth::RadoEmbedding::new(PartialIso::new(), vec![0]).unwrap();
        for x in 0..3 {
            emb.apply(&Elem::Nat(x)).unwrap();
        }
        let f = emb.into_op();
        let j = Window::new(&Carrier::Rado, (0..3).map(Elem::Nat)).unwrap();
        for variant in 0..3 {
            let g = CatalogGroup(Catalog::Rado).interpolant(&f, &j, variant).unwrap();
            assert!(equal_on_window(&f, &g, &j).unwrap());
        }
    }

    #[test]
    fn variants_agree_on_window_and_differ_outside() {
        let cg = CatalogGroup(Catalog::RationalsOrder);
        let id = FinOp::identity(&Carrier::Rationals);
        let j = Window::new(&Carrier::Rationals, [q(1)]).unwrap();
        let g0 = cg.interpolant(&id, &j, 0).unwrap();
        let differs = (1..8).any(|v| {
            let g = cg.interpolant(&id, &j, v).unwrap();
            assert!(equal_on_window(&g0, &g, &j).unwrap());
            g.apply(&q(2)).unwrap() != g0.apply(&q(2)).unwrap()
        });
        assert!(differs);
    }

    #[test]
    fn closure_examples() {
        let b = Carrier::Finite(2);
        let s = [FinOp::identity(&b), FinOp::from_table(&b, 1, vec![1, 0]).unwrap()];
        let j0 = Window::new(&b, [Elem::Nat(0)]).unwrap();
        assert_eq!(closure_at_window(&s, &j0).unwrap().len(), 2);
        let consts = [FinOp::constant(&b, 1, 0).unwrap(), FinOp::constant(&b, 1, 1).unwrap()];
        assert_eq!(closure_at_window(&consts, &Window::empty(&b)).unwrap().len(), 1);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample: Vec<FinOp> = (0..12)
            .map(|_| {
                let a = random_automorphism(Catalog::RationalsOrder, &mut rng, 2).unwrap();
                a.shared().to_bijection().forward().clone()
            })
            .collect();
        let j = Window::new(&Carrier::Rationals, [q(0)]).unwrap();
        let images: BTreeSet<Elem> = sample.iter().map(|g| g.apply(&q(0)).unwrap()).collect();
        assert_eq!(closure_at_window(&sample, &j).unwrap().len(), images.len());
    }

    #[test]
    fn dense_on_chain_implies_closure_containment() {
        let b = Carrier::Finite(3);
        let m = close_under_composition(&b, &[FinOp::from_table(&b, 1, vec![1, 2, 0]).unwrap()]).unwrap();
        let g = GroupSet::new(m.clone()).unwrap();
        let chain = [Window::empty(&b), Window::new(&b, [Elem::Nat(0)]).unwrap(), Window::new(&b, [Elem::Nat(0), Elem::Nat(2)]).unwrap()];
        for j in &chain {
            assert!(is_dense_finite(&g, &m, j).unwrap().0.dense);
            let cg = closure_at_window(g.ops(), j).unwrap();
            assert!(closure_at_window(m.ops().unwrap(), j).unwrap().is_subset(&cg));
        }
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Vec<u32>> {
        Just((0..n as u32).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn entourages_refine_and_transport(
            f in proptest::collection::vec(0u32..4, 4),
            g in proptest::collection::vec(0u32..4, 4),
            t in arb_perm(4),
            small in proptest::collection::btree_set(0u64..4, 0..3),
            extra in proptest::collection::btree_set(0u64..4, 0..3),
        ) {
            let c = Carrier::Finite(4);
            let (f, g) = (FinOp::from_table(&c, 1, f).unwrap(), FinOp::from_table(&c, 1, g).unwrap());
            let j = Window::new(&c, small.iter().map(|&x| Elem::Nat(x))).unwrap();
            let jj = j.union(&Window::new(&c, extra.iter().map(|&x| Elem::Nat(x))).unwrap());
            let (e, ee) = (Entourage::new(j.clone()), Entourage::new(jj));
            if ee.related(&f, &g).unwrap() {
                prop_assert!(e.related(&f, &g).unwrap());
            }
            let theta = Bijection::from_table(&c, t).unwrap();
            let tj = j.image(theta.forward(), &c).unwrap();
            let (cf, cg) = (theta.conjugate(&f).unwrap(), theta.conjugate(&g).unwrap());
            prop_assert_eq!(e.related(&f, &g).unwrap(), Entourage::new(tj).related(&cf, &cg).unwrap());
        }
    }
}
