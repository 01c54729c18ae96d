//! Carriers, finitary operations and their composition algebra.
//!
//! Finite operations are stored as total tables. A tuple `(x1, .., xn)` over a
//! carrier of size `s` is addressed by the row-major index
//! `x1 * s^(n-1) + .. + xn`, leftmost coordinate most significant. The same
//! encoding is used by the JSON formats.
//!
//! Operations on lazy carriers (the rationals, the Rado graph) are evaluation
//! rules with a per-tuple memo cache.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Shorthand for the rational `num / den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
            if d.is_zero() {
                return Err(Error::Invalid(format!("zero denominator in {s:?}")));
            }
            Rational::new(n, d)
        }
        None => Rational::from_integer(
            s.parse().map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?,
        ),
    };
    Ok(parsed)
}

/// Canonical element code. Finite carriers and the Rado graph use naturals,
/// the rationals use fractions in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Nat(u64),
    Rat(Rational),
}

impl Elem {
    pub fn nat(&self) -> Option<u64> {
        match self {
            Elem::Nat(n) => Some(*n),
            Elem::Rat(_) => None,
        }
    }

    pub fn rat(&self) -> Option<&Rational> {
        match self {
            Elem::Rat(q) => Some(q),
            Elem::Nat(_) => None,
        }
    }
}

impl From<u64> for Elem {
    fn from(n: u64) -> Self {
        Elem::Nat(n)
    }
}

impl From<Rational> for Elem {
    fn from(q: Rational) -> Self {
        Elem::Rat(q)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Nat(n) => write!(f, "{n}"),
            Elem::Rat(q) => write!(f, "{q}"),
        }
    }
}

/// Naturals serialize as JSON numbers, rationals as `"p/q"` strings.
impl serde::Serialize for Elem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Elem::Nat(n) => s.serialize_u64(*n),
            Elem::Rat(q) => s.serialize_str(&q.to_string()),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Elem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Elem, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Nat(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Nat(n) => Ok(Elem::Nat(n)),
            Raw::Text(s) => parse_rational(&s).map(Elem::Rat).map_err(serde::de::Error::custom),
        }
    }
}

/// Serde helpers storing a rational as a `"p/q"` string.
pub mod rational_serde {
    use super::{parse_rational, Rational};

    pub fn serialize<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

type Enumerator = Arc<dyn Fn(u64) -> Elem + Send + Sync>;
type Membership = Arc<dyn Fn(&Elem) -> bool + Send + Sync>;

/// A user supplied countable carrier: an injective enumeration of its
/// elements together with a membership test.
#[derive(Clone)]
pub struct CustomCarrier {
    pub name: String,
    enumerate: Enumerator,
    contains: Membership,
}

impl CustomCarrier {
    pub fn new(
        name: impl Into<String>,
        enumerate: impl Fn(u64) -> Elem + Send + Sync + 'static,
        contains: impl Fn(&Elem) -> bool + Send + Sync + 'static,
    ) -> Self {
        CustomCarrier {
            name: name.into(),
            enumerate: Arc::new(enumerate),
            contains: Arc::new(contains),
        }
    }
}

#[derive(Clone)]
pub enum Carrier {
    Finite(usize),
    Rationals,
    Rado,
    Custom(CustomCarrier),
}

impl PartialEq for Carrier {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Carrier::Finite(a), Carrier::Finite(b)) => a == b,
            (Carrier::Rationals, Carrier::Rationals) | (Carrier::Rado, Carrier::Rado) => true,
            (Carrier::Custom(a), Carrier::Custom(b)) => {
                a.name == b.name && Arc::ptr_eq(&a.enumerate, &b.enumerate)
            }
            _ => false,
        }
    }
}

impl Eq for Carrier {}

impl fmt::Debug for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Carrier::Finite(n) => write!(f, "Finite({n})"),
            Carrier::Rationals => write!(f, "Rationals"),
            Carrier::Rado => write!(f, "Rado"),
            Carrier::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

impl Carrier {
    pub fn finite(size: usize) -> Result<Carrier> {
        if size == 0 {
            return Err(Error::Invalid("finite carriers need at least one element".into()));
        }
        Ok(Carrier::Finite(size))
    }

    pub fn size(&self) -> Option<usize> {
        match self {
            Carrier::Finite(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Carrier::Finite(_))
    }

    /// Size of a finite carrier, or `Unsupported` for lazy ones.
    pub fn require_finite(&self, what: &'static str) -> Result<usize> {
        self.size().ok_or(Error::Unsupported(what))
    }

    pub fn contains(&self, e: &Elem) -> bool {
        match (self, e) {
            (Carrier::Finite(n), Elem::Nat(v)) => (*v as u128) < *n as u128,
            (Carrier::Rationals, Elem::Rat(_)) => true,
            (Carrier::Rado, Elem::Nat(_)) => true,
            (Carrier::Custom(c), e) => (c.contains)(e),
            _ => false,
        }
    }

    pub fn check(&self, e: &Elem) -> Result<()> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(Error::NotInCarrier(e.clone()))
        }
    }

    /// The `i`-th element of the canonical enumeration. Injective on the
    /// naturals and onto the carrier; finite carriers wrap around.
    pub fn nth(&self, i: u64) -> Elem {
        match self {
            Carrier::Finite(n) => Elem::Nat(i % *n as u64),
            Carrier::Rado => Elem::Nat(i),
            Carrier::Rationals => Elem::Rat(nth_rational(i)),
            Carrier::Custom(c) => (c.enumerate)(i),
        }
    }

    /// All elements of a finite carrier in canonical order.
    pub fn elements(&self) -> Result<Vec<Elem>> {
        let n = self.require_finite("enumerating a lazy carrier")?;
        Ok((0..n as u64).map(Elem::Nat).collect())
    }
}

/// Calkin-Wilf enumeration of the rationals: 0, 1, -1, 1/2, -1/2, 2, -2, ...
fn nth_rational(i: u64) -> Rational {
    if i == 0 {
        return Rational::zero();
    }
    let k = i.div_ceil(2);
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    let bits = 64 - k.leading_zeros();
    for pos in (0..bits - 1).rev() {
        if (k >> pos) & 1 == 0 {
            b = &a + &b;
        } else {
            a = &a + &b;
        }
    }
    let q = Rational::new(a, b);
    if i % 2 == 1 {
        q
    } else {
        -q
    }
}

pub(crate) fn tuple_index(size: usize, tuple: &[u32]) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * size + x as usize)
}

pub(crate) fn tuple_at(size: usize, arity: usize, mut index: usize, out: &mut [u32]) {
    for slot in out[..arity].iter_mut().rev() {
        *slot = (index % size) as u32;
        index /= size;
    }
}

pub(crate) fn table_len(size: usize, arity: usize) -> Result<usize> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| size.checked_pow(a))
        .ok_or(Error::BudgetExceeded { what: "table length", cap: usize::MAX })
}

type RuleFn = dyn Fn(&[Elem]) -> Result<Elem> + Send + Sync;

struct Rule {
    label: String,
    eval: Box<RuleFn>,
    memo: Mutex<HashMap<Vec<Elem>, Elem>>,
}

#[derive(Clone)]
enum Repr {
    Table(Arc<[u32]>),
    Rule(Arc<Rule>),
}

/// How the values of an operation are given to [`make_op`].
pub enum OpRule {
    Table(Vec<u32>),
    Rule(String, Box<RuleFn>),
}

/// An `arity`-ary operation on a carrier.
#[derive(Clone)]
pub struct FinOp {
    carrier: Carrier,
    arity: usize,
    repr: Repr,
}

pub fn make_op(carrier: &Carrier, arity: usize, rule: OpRule) -> Result<FinOp> {
    match rule {
        OpRule::Table(t) => FinOp::from_table(carrier, arity, t),
        OpRule::Rule(label, eval) => Ok(FinOp {
            carrier: carrier.clone(),
            arity,
            repr: Repr::Rule(Arc::new(Rule { label, eval, memo: Mutex::new(HashMap::new()) })),
        }),
    }
}

impl FinOp {
    pub fn from_table(carrier: &Carrier, arity: usize, table: Vec<u32>) -> Result<FinOp> {
        let size = carrier.require_finite("tables on lazy carriers")?;
        let expected = table_len(size, arity)?;
        if table.len() != expected {
            return Err(Error::TableSize { expected, found: table.len() });
        }
        if let Some(&bad) = table.iter().find(|&&v| v as usize >= size) {
            return Err(Error::OutOfRange { value: bad as u64, size });
        }
        Ok(FinOp { carrier: carrier.clone(), arity, repr: Repr::Table(table.into()) })
    }

    /// Table constructor for callers that already guarantee validity.
    pub(crate) fn from_table_unchecked(carrier: &Carrier, arity: usize, table: Vec<u32>) -> FinOp {
        debug_assert_eq!(Some(table.len()), carrier.size().map(|s| s.pow(arity as u32)));
        FinOp { carrier: carrier.clone(), arity, repr: Repr::Table(table.into()) }
    }

    pub fn from_rule(
        carrier: &Carrier,
        arity: usize,
        label: impl Into<String>,
        eval: impl Fn(&[Elem]) -> Result<Elem> + Send + Sync + 'static,
    ) -> FinOp {
        FinOp {
            carrier: carrier.clone(),
            arity,
            repr: Repr::Rule(Arc::new(Rule {
                label: label.into(),
                eval: Box::new(eval),
                memo: Mutex::new(HashMap::new()),
            })),
        }
    }

    /// A unary rule operation.
    pub fn unary_rule(
        carrier: &Carrier,
        label: impl Into<String>,
        eval: impl Fn(&Elem) -> Result<Elem> + Send + Sync + 'static,
    ) -> FinOp {
        FinOp::from_rule(carrier, 1, label, move |xs| eval(&xs[0]))
    }

    pub fn identity(carrier: &Carrier) -> FinOp {
        match carrier.size() {
            Some(n) => FinOp::from_table_unchecked(carrier, 1, (0..n as u32).collect()),
            None => FinOp::unary_rule(carrier, "id", |x| Ok(x.clone())),
        }
    }

    /// The constant `arity`-ary operation with value `value` on a finite carrier.
    pub fn constant(carrier: &Carrier, arity: usize, value: u32) -> Result<FinOp> {
        let size = carrier.require_finite("constant tables on lazy carriers")?;
        FinOp::from_table(carrier, arity, vec![value; table_len(size, arity)?])
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> Option<&[u32]> {
        match &self.repr {
            Repr::Table(t) => Some(t),
            Repr::Rule(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.repr {
            Repr::Table(t) => format!("{t:?}"),
            Repr::Rule(r) => r.label.clone(),
        }
    }

    /// Table lookup for finite operations. Panics on rule operations.
    pub fn at(&self, args: &[u32]) -> u32 {
        let t = self.table().expect("table operation");
        t[tuple_index(self.carrier.size().unwrap(), args)]
    }

    pub fn eval(&self, args: &[Elem]) -> Result<Elem> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch(format!(
                "{} arguments for an operation of arity {}",
                args.len(),
                self.arity
            )));
        }
        for a in args {
            self.carrier.check(a)?;
        }
        match &self.repr {
            Repr::Table(t) => {
                let size = self.carrier.size().unwrap();
                let idx = args.iter().fold(0usize, |acc, a| acc * size + a.nat().unwrap() as usize);
                Ok(Elem::Nat(t[idx] as u64))
            }
            Repr::Rule(rule) => {
                if let Some(v) = rule.memo.lock().unwrap().get(args) {
                    return Ok(v.clone());
                }
                // Evaluated outside the lock: rules may themselves evaluate
                // other memoised operations.
                let v = (rule.eval)(args)?;
                self.carrier.check(&v)?;
                rule.memo.lock().unwrap().entry(args.to_vec()).or_insert(v.clone());
                Ok(v)
            }
        }
    }

    pub fn apply(&self, x: &Elem) -> Result<Elem> {
        self.eval(std::slice::from_ref(x))
    }

    /// Values on `J^n`, tuples in lexicographic order of the sorted window.
    pub fn restrict(&self, window: &Window) -> Result<Vec<Elem>> {
        let points: Vec<&Elem> = window.points.iter().collect();
        let k = points.len();
        let count = if self.arity == 0 { 1 } else { k.checked_pow(self.arity as u32).unwrap_or(usize::MAX) };
        let mut out = Vec::with_capacity(count.min(1 << 16));
        let mut idx = vec![0usize; self.arity];
        if self.arity > 0 && k == 0 {
            return Ok(out);
        }
        loop {
            let args: Vec<Elem> = idx.iter().map(|&i| points[i].clone()).collect();
            out.push(self.eval(&args)?);
            if !advance(&mut idx, k) {
                break;
            }
        }
        Ok(out)
    }
}

/// Odometer increment; returns false after the last tuple.
pub(crate) fn advance(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

impl PartialEq for FinOp {
    fn eq(&self, other: &Self) -> bool {
        if self.arity != other.arity || self.carrier != other.carrier {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Table(a), Repr::Table(b)) => a == b,
            (Repr::Rule(a), Repr::Rule(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Eq for FinOp {}

impl std::hash::Hash for FinOp {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        match &self.repr {
            Repr::Table(t) => t.hash(state),
            Repr::Rule(r) => (Arc::as_ptr(r) as *const u8 as usize).hash(state),
        }
    }
}

impl PartialOrd for FinOp {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: arity first, then lexicographic on tables. Rule
/// operations sort after tables and are not canonically ordered.
impl Ord for FinOp {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.arity.cmp(&other.arity).then_with(|| match (&self.repr, &other.repr) {
            (Repr::Table(a), Repr::Table(b)) => a.cmp(b),
            (Repr::Table(_), Repr::Rule(_)) => std::cmp::Ordering::Less,
            (Repr::Rule(_), Repr::Table(_)) => std::cmp::Ordering::Greater,
            (Repr::Rule(a), Repr::Rule(b)) => {
                (Arc::as_ptr(a) as *const u8 as usize).cmp(&(Arc::as_ptr(b) as *const u8 as usize))
            }
        })
    }
}

impl fmt::Debug for FinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinOp({:?}, arity {}, {})", self.carrier, self.arity, self.label())
    }
}

/// The `i`-th `n`-ary projection, `i` counted from 1.
pub fn projection(carrier: &Carrier, n: usize, i: usize) -> Result<FinOp> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    match carrier.size() {
        Some(size) => {
            let len = table_len(size, n)?;
            let mut tuple = vec![0u32; n];
            let table = (0..len)
                .map(|idx| {
                    tuple_at(size, n, idx, &mut tuple);
                    tuple[i - 1]
                })
                .collect();
            Ok(FinOp::from_table_unchecked(carrier, n, table))
        }
        None => Ok(FinOp::from_rule(carrier, n, format!("e_{i}^{n}"), move |xs| Ok(xs[i - 1].clone()))),
    }
}

/// `h(x) = f(g1(x), .., gn(x))`. All `gs` must share one arity; an empty
/// `gs` is only accepted through [`compose_at`].
pub fn compose(f: &FinOp, gs: &[FinOp]) -> Result<FinOp> {
    let m = gs
        .first()
        .map(|g| g.arity)
        .ok_or_else(|| Error::ArityMismatch("composition with no inner operations needs an explicit arity".into()))?;
    compose_at(f, gs, m)
}

/// Composition with the arity of the result given explicitly, so that nullary
/// outer operations compose to constants of arity `m`.
pub fn compose_at(f: &FinOp, gs: &[FinOp], m: usize) -> Result<FinOp> {
    if gs.len() != f.arity {
        return Err(Error::ArityMismatch(format!(
            "outer arity {} with {} inner operations",
            f.arity,
            gs.len()
        )));
    }
    if let Some(g) = gs.iter().find(|g| g.arity != m) {
        return Err(Error::ArityMismatch(format!("inner arities {} and {m} differ", g.arity)));
    }
    if gs.iter().any(|g| g.carrier != f.carrier) {
        return Err(Error::CarrierMismatch);
    }
    match (f.carrier.size(), f.table()) {
        (Some(size), Some(ft)) if gs.iter().all(|g| g.table().is_some()) => {
            let len = table_len(size, m)?;
            let inner: Vec<&[u32]> = gs.iter().map(|g| g.table().unwrap()).collect();
            let table = (0..len)
                .map(|idx| {
                    let outer = inner.iter().fold(0usize, |acc, t| acc * size + t[idx] as usize);
                    ft[outer]
                })
                .collect();
            Ok(FinOp::from_table_unchecked(&f.carrier, m, table))
        }
        _ => {
            let f = f.clone();
            let gs = gs.to_vec();
            let label = format!(
                "{}∘({})",
                f.label(),
                gs.iter().map(|g| g.label()).collect::<Vec<_>>().join(",")
            );
            Ok(FinOp::from_rule(&f.carrier.clone(), m, label, move |xs| {
                let inner = gs.iter().map(|g| g.eval(xs)).collect::<Result<Vec<_>>>()?;
                f.eval(&inner)
            }))
        }
    }
}

/// Unary composition `f ∘ g`, i.e. `x ↦ f(g(x))`.
pub fn then(g: &FinOp, f: &FinOp) -> Result<FinOp> {
    compose(f, std::slice::from_ref(g))
}

/// A finite set of carrier points.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Window {
    carrier: Carrier,
    points: BTreeSet<Elem>,
}

impl Window {
    pub fn new(carrier: &Carrier, points: impl IntoIterator<Item = Elem>) -> Result<Window> {
        let points: BTreeSet<Elem> = points.into_iter().collect();
        for p in &points {
            carrier.check(p)?;
        }
        Ok(Window { carrier: carrier.clone(), points })
    }

    pub fn empty(carrier: &Carrier) -> Window {
        Window { carrier: carrier.clone(), points: BTreeSet::new() }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn points(&self) -> &BTreeSet<Elem> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, e: &Elem) -> bool {
        self.points.contains(e)
    }

    pub fn is_subset(&self, other: &Window) -> bool {
        self.points.is_subset(&other.points)
    }

    pub fn union(&self, other: &Window) -> Window {
        Window { carrier: self.carrier.clone(), points: self.points.union(&other.points).cloned().collect() }
    }

    pub fn with(&self, e: Elem) -> Window {
        let mut w = self.clone();
        w.points.insert(e);
        w
    }

    /// `θ[J]` for a unary map θ.
    pub fn image(&self, f: &FinOp, target: &Carrier) -> Result<Window> {
        Window::new(target, self.points.iter().map(|p| f.apply(p)).collect::<Result<Vec<_>>>()?)
    }
}

/// Membership in the entourage `α_J`: `f1` and `f2` agree on every `n`-tuple
/// from `J`.
pub fn equal_on_window(f1: &FinOp, f2: &FinOp, window: &Window) -> Result<bool> {
    if f1.arity != f2.arity {
        return Err(Error::ArityMismatch(format!("arities {} and {}", f1.arity, f2.arity)));
    }
    if f1.carrier != f2.carrier || f1.carrier != window.carrier {
        return Err(Error::CarrierMismatch);
    }
    let k = window.len();
    if k == 0 && f1.arity > 0 {
        return Ok(true);
    }
    let points: Vec<&Elem> = window.points.iter().collect();
    let mut idx = vec![0usize; f1.arity];
    loop {
        let args: Vec<Elem> = idx.iter().map(|&i| points[i].clone()).collect();
        if f1.eval(&args)? != f2.eval(&args)? {
            return Ok(false);
        }
        if !advance(&mut idx, k) {
            return Ok(true);
        }
    }
}

/// A bijection `θ: A → B` with its inverse.
#[derive(Clone, Debug)]
pub struct Bijection {
    forward: FinOp,
    backward: FinOp,
}

impl Bijection {
    /// A permutation table on a finite carrier; rejects non-bijective tables.
    pub fn from_table(carrier: &Carrier, table: Vec<u32>) -> Result<Bijection> {
        let forward = FinOp::from_table(carrier, 1, table).map_err(|e| match e {
            Error::OutOfRange { .. } | Error::TableSize { .. } => Error::NotBijective,
            other => other,
        })?;
        let t = forward.table().unwrap();
        let mut inv = vec![u32::MAX; t.len()];
        for (x, &y) in t.iter().enumerate() {
            if inv[y as usize] != u32::MAX {
                return Err(Error::NotBijective);
            }
            inv[y as usize] = x as u32;
        }
        Ok(Bijection { forward, backward: FinOp::from_table_unchecked(carrier, 1, inv) })
    }

    /// Pairs a map with a claimed inverse. The inverse law is only checked
    /// on the points that are actually evaluated.
    pub fn from_pair(forward: FinOp, backward: FinOp) -> Result<Bijection> {
        if forward.arity != 1 || backward.arity != 1 {
            return Err(Error::ArityMismatch("bijections are unary".into()));
        }
        if forward.carrier != backward.carrier {
            return Err(Error::CarrierMismatch);
        }
        if let (Some(f), Some(b)) = (forward.table(), backward.table()) {
            if f.iter().enumerate().any(|(x, &y)| b[y as usize] as usize != x) {
                return Err(Error::NotBijective);
            }
        }
        Ok(Bijection { forward, backward })
    }

    pub fn identity(carrier: &Carrier) -> Bijection {
        let id = FinOp::identity(carrier);
        Bijection { forward: id.clone(), backward: id }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.forward.carrier
    }

    pub fn forward(&self) -> &FinOp {
        &self.forward
    }

    pub fn backward(&self) -> &FinOp {
        &self.backward
    }

    pub fn inverse(&self) -> Bijection {
        Bijection { forward: self.backward.clone(), backward: self.forward.clone() }
    }

    pub fn apply(&self, x: &Elem) -> Result<Elem> {
        self.forward.apply(x)
    }

    pub fn unapply(&self, y: &Elem) -> Result<Elem> {
        self.backward.apply(y)
    }

    /// `θ ∘ h ∘ (θ⁻¹ × .. × θ⁻¹)`, i.e. `y ↦ θ(h(θ⁻¹(y1), .., θ⁻¹(yn)))`.
    pub fn conjugate(&self, h: &FinOp) -> Result<FinOp> {
        if h.carrier != self.forward.carrier {
            return Err(Error::CarrierMismatch);
        }
        match (h.carrier.size(), h.table(), self.forward.table(), self.backward.table()) {
            (Some(size), Some(ht), Some(fwd), Some(bwd)) => {
                let len = table_len(size, h.arity)?;
                let mut tuple = vec![0u32; h.arity];
                let table = (0..len)
                    .map(|idx| {
                        tuple_at(size, h.arity, idx, &mut tuple);
                        let src = tuple.iter().fold(0usize, |acc, &y| acc * size + bwd[y as usize] as usize);
                        fwd[ht[src] as usize]
                    })
                    .collect();
                Ok(FinOp::from_table_unchecked(&h.carrier, h.arity, table))
            }
            _ => {
                let (theta, h2) = (self.clone(), h.clone());
                let label = format!("θ∘{}∘θ⁻¹", h.label());
                Ok(FinOp::from_rule(&h.carrier, h.arity, label, move |ys| {
                    let xs = ys.iter().map(|y| theta.unapply(y)).collect::<Result<Vec<_>>>()?;
                    theta.apply(&h2.eval(&xs)?)
                }))
            }
        }
    }

    /// Permutation table of a finite bijection.
    pub fn table(&self) -> Option<&[u32]> {
        self.forward.table()
    }
}
