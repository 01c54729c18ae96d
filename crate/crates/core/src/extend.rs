//! Extending a group homomorphism `ξ: G → G'` to `ξ̄: M → M'` for `G` dense
//! in `M`: `ξ̄(f)(b) := ξ(g)(b)` for any `g ∈ G` agreeing with `f` on a
//! continuity modulus `C_b`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnspace::{rat, then, Bijection, Carrier, Elem, FinOp, Window};
use crate::monoid::MonoidSet;
use crate::topology::GroupOracle;

/// An evaluation callback for `ξ` on group elements.
pub type GroupMap = dyn Fn(&FinOp) -> Result<FinOp> + Send + Sync;

#[derive(Clone)]
pub enum HomMode {
    Conjugation(Bijection),
    Oracle(Arc<GroupMap>),
}

/// `b ↦ C_b`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContinuityModulus(BTreeMap<Elem, Window>);

impl ContinuityModulus {
    pub fn new() -> ContinuityModulus {
        ContinuityModulus::default()
    }

    pub fn insert(&mut self, b: Elem, window: Window) {
        self.0.insert(b, window);
    }

    pub fn get(&self, b: &Elem) -> Option<&Window> {
        self.0.get(b)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone)]
pub struct HomMap {
    mode: HomMode,
    source: Arc<dyn GroupOracle>,
    target: Carrier,
    modulus: ContinuityModulus,
}

impl fmt::Debug for HomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match &self.mode {
            HomMode::Conjugation(_) => "conjugation",
            HomMode::Oracle(_) => "oracle",
        };
        f.debug_struct("HomMap")
            .field("mode", &mode)
            .field("source", &self.source.carrier())
            .field("target", &self.target)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl HomMap {
    /// `ξ(g) = θ∘g∘θ⁻¹`, with `C_b = {θ⁻¹(b)}`.
    pub fn conjugation(source: Arc<dyn GroupOracle>, theta: Bijection) -> Result<HomMap> {
        if theta.carrier() != &source.carrier() {
            return Err(Error::CarrierMismatch);
        }
        let target = theta.carrier().clone();
        Ok(HomMap { mode: HomMode::Conjugation(theta), source, target, modulus: ContinuityModulus::new() })
    }

    pub fn oracle(
        source: Arc<dyn GroupOracle>,
        target: Carrier,
        xi: impl Fn(&FinOp) -> Result<FinOp> + Send + Sync + 'static,
        modulus: ContinuityModulus,
    ) -> HomMap {
        HomMap { mode: HomMode::Oracle(Arc::new(xi)), source, target, modulus }
    }

    pub fn mode(&self) -> &HomMode {
        &self.mode
    }

    pub fn source(&self) -> &dyn GroupOracle {
        &*self.source
    }

    pub fn target(&self) -> &Carrier {
        &self.target
    }

    pub fn modulus(&self) -> &ContinuityModulus {
        &self.modulus
    }

    pub fn set_modulus(&mut self, b: Elem, window: Window) {
        self.modulus.insert(b, window);
    }

    /// `ξ(g)`.
    pub fn apply(&self, g: &FinOp) -> Result<FinOp> {
        match &self.mode {
            HomMode::Conjugation(theta) => theta.conjugate(g),
            HomMode::Oracle(xi) => xi(g),
        }
    }

    /// `C_b`: derived in conjugation mode, looked up in oracle mode.
    pub fn modulus_at(&self, b: &Elem) -> Result<Window> {
        self.target.check(b)?;
        match &self.mode {
            HomMode::Conjugation(theta) => Window::new(&self.source.carrier(), [theta.unapply(b)?]),
            HomMode::Oracle(_) => {
                self.modulus.get(b).cloned().ok_or_else(|| Error::Invalid(format!("no continuity modulus at {b}")))
            }
        }
    }
}

/// The first `n` points of the canonical window chain: `0, 1, -1, 2, -2, ...`
/// on the rationals, the enumeration order elsewhere.
pub fn chain_points(carrier: &Carrier, n: usize) -> Vec<Elem> {
    match carrier {
        Carrier::Finite(size) => (0..n.min(*size) as u64).map(Elem::Nat).collect(),
        Carrier::Rationals => (0..n as i64)
            .map(|i| {
                let k = (i + 1) / 2;
                Elem::Rat(rat(if i % 2 == 1 { k } else { -k }, 1))
            })
            .collect(),
        _ => (0..n as u64).map(|i| carrier.nth(i)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModulusSearch {
    /// Number of chain points candidate windows are drawn from.
    pub pool: usize,
    /// Number of candidate windows tried.
    pub budget: usize,
    /// Interpolant variants compared per probe and candidate.
    pub variants: usize,
}

impl Default for ModulusSearch {
    fn default() -> Self {
        ModulusSearch { pool: 9, budget: 512, variants: 8 }
    }
}

/// Smallest candidate window (by size, then lexicographically in chain
/// order) on which every probed pair of agreeing group elements has equal
/// `ξ`-images at `b`. Agreeing pairs are interpolant variants of each
/// probe on the candidate.
pub fn derive_modulus(xi: &HomMap, b: &Elem, probes: &[FinOp], search: &ModulusSearch) -> Result<Window> {
    if let HomMode::Conjugation(_) = xi.mode {
        return xi.modulus_at(b);
    }
    xi.target.check(b)?;
    let carrier = xi.source.carrier();
    let identity = [FinOp::identity(&carrier)];
    let probes = if probes.is_empty() { &identity[..] } else { probes };
    let pool = chain_points(&carrier, search.pool);
    let mut tried = 0;
    for size in 0..=pool.len() {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            if tried == search.budget {
                return Err(Error::ModulusNotFound { budget: search.budget });
            }
            tried += 1;
            let w = Window::new(&carrier, idx.iter().map(|&i| pool[i].clone()))?;
            if stable_on(xi, b, probes, &w, search.variants)? {
                return Ok(w);
            }
            if !next_combination(&mut idx, pool.len()) {
                break;
            }
        }
    }
    Err(Error::ModulusNotFound { budget: search.budget })
}

fn stable_on(xi: &HomMap, b: &Elem, probes: &[FinOp], w: &Window, variants: usize) -> Result<bool> {
    for p in probes {
        let base = xi.apply(&xi.source.interpolant(p, w, 0)?)?.apply(b)?;
        for v in 1..=variants {
            let other = match xi.source.interpolant(p, w, v) {
                Ok(g) => g,
                Err(Error::InterpolationFailed) => continue,
                Err(e) => return Err(e),
            };
            if xi.apply(&other)?.apply(b)? != base {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `ξ̄(f)(b)` through the canonical interpolant on `C_b`.
pub fn extend_hom(xi: &HomMap, f: &FinOp, b: &Elem) -> Result<Elem> {
    extend_hom_via(xi, f, b, &Window::empty(&xi.source.carrier()), 0)
}

/// `ξ̄(f)(b)` through interpolant `variant` on `C_b ∪ extra`.
pub fn extend_hom_via(xi: &HomMap, f: &FinOp, b: &Elem, extra: &Window, variant: usize) -> Result<Elem> {
    let w = xi.modulus_at(b)?.union(extra);
    let g = xi.source.interpolant(f, &w, variant)?;
    xi.apply(&g)?.apply(b)
}

/// `ξ̄(f)` as a table, for finite carriers.
pub fn extend_op(xi: &HomMap, f: &FinOp) -> Result<FinOp> {
    let n = xi.target.require_finite("tabulating an extension on a lazy carrier")?;
    let table = (0..n as u64)
        .map(|b| Ok(extend_hom(xi, f, &Elem::Nat(b))?.nat().unwrap() as u32))
        .collect::<Result<Vec<_>>>()?;
    FinOp::from_table(&xi.target, 1, table)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathWitness {
    pub window: Vec<Elem>,
    pub variant: usize,
    pub value: Elem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellDefinedReport {
    pub value: Option<Elem>,
    pub values: Vec<Elem>,
    pub paths: usize,
    pub consistent: bool,
    pub witnesses: Vec<PathWitness>,
}

/// Computes `ξ̄(f)(b)` along `trials` paths. Path `i` uses the window `C_b`
/// plus the first `⌈i/2⌉` chain points, and interpolant variant `i`.
/// Paths run in order so that lazily built maps are reproducible.
pub fn check_well_defined(xi: &HomMap, f: &FinOp, b: &Elem, trials: usize) -> Result<WellDefinedReport> {
    let carrier = xi.source.carrier();
    let base = xi.modulus_at(b)?;
    let chain = chain_points(&carrier, trials.div_ceil(2));
    let mut witnesses = Vec::with_capacity(trials);
    for i in 0..trials {
        let extra = Window::new(&carrier, chain[..i.div_ceil(2)].iter().cloned())?;
        let value = extend_hom_via(xi, f, b, &extra, i)?;
        witnesses.push(PathWitness { window: base.union(&extra).points().iter().cloned().collect(), variant: i, value });
    }
    let mut values: Vec<Elem> = witnesses.iter().map(|w| w.value.clone()).collect();
    values.sort();
    values.dedup();
    Ok(WellDefinedReport {
        value: (values.len() == 1).then(|| values[0].clone()),
        consistent: values.len() <= 1,
        paths: trials,
        values,
        witnesses,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomLawReport {
    pub b: Elem,
    pub b_prime: Elem,
    pub lhs: Elem,
    pub rhs: Elem,
    pub holds: bool,
}

/// `ξ̄(f2∘f1)(b) = ξ̄(f2)(b')` with `b' = ξ̄(f1)(b)`.
pub fn check_hom_law(xi: &HomMap, f1: &FinOp, f2: &FinOp, b: &Elem) -> Result<HomLawReport> {
    let lhs = extend_hom(xi, &then(f1, f2)?, b)?;
    let b_prime = extend_hom(xi, f1, b)?;
    let rhs = extend_hom(xi, f2, &b_prime)?;
    Ok(HomLawReport { b: b.clone(), holds: lhs == rhs, b_prime, lhs, rhs })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferReport {
    pub b: Elem,
    pub extended: Elem,
    pub formula: Elem,
    pub holds: bool,
}

/// `ξ̄(f)(b) = θ(f(θ⁻¹(b)))` in conjugation mode.
pub fn check_conjugation_transfer(xi: &HomMap, f: &FinOp, b: &Elem) -> Result<TransferReport> {
    let HomMode::Conjugation(theta) = &xi.mode else {
        return Err(Error::Unsupported("conjugation transfer needs a conjugation homomorphism"));
    };
    let extended = extend_hom(xi, f, b)?;
    let formula = theta.apply(&f.apply(&theta.unapply(b)?)?)?;
    Ok(TransferReport { b: b.clone(), holds: extended == formula, extended, formula })
}

/// `ξ̄(g)(b) = ξ(g)(b)` for a group element `g`.
pub fn check_extends(xi: &HomMap, g: &FinOp, b: &Elem) -> Result<bool> {
    Ok(extend_hom(xi, g, b)? == xi.apply(g)?.apply(b)?)
}

/// For finite `M`: whether `ξ̄⁻¹ ∘ ξ̄` is the identity on `M`.
pub fn check_inverse_symmetry(xi: &HomMap, xi_inv: &HomMap, m: &MonoidSet) -> Result<bool> {
    for f in m.ops()? {
        if &extend_op(xi_inv, &extend_op(xi, f)?)? != f {
            return Ok(false);
        }
    }
    Ok(true)
}
