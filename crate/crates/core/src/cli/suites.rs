//! Seeded experiment suites shared by the CLI and the acceptance tests.
//! Every suite is a pure function of its parameters and seed.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backforth::{
    noncommuting_witness, random_automorphism, random_seed, transitivity_witness, Catalog, LazyAutomorphism, RadoEmbedding,
    RatMap,
};
use crate::clone::{close_fragment, enumerate_many, thm41_predict, lift_conjugation, verify_thm41, CloneFragment, Counterexample};
use crate::error::{Error, Result};
use crate::extend::{check_conjugation_transfer, check_hom_law, check_well_defined, HomMap};
use crate::fnspace::{rat, Bijection, Carrier, Elem, FinOp, Rational};
use crate::json::boolean_op;
use crate::monoid::{close_under_composition, is_weakly_directed, MonoidSet};
use crate::structures::{complement_expansion, emb_set, end_monoid, PartialIso, RelStructure, Symbol};
use crate::topology::CatalogGroup;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_rational(rng: &mut impl Rng, range: i64) -> Rational {
    rat(rng.gen_range(-range..=range), rng.gen_range(1..=4))
}

fn positive_rational(rng: &mut impl Rng) -> Rational {
    rat(rng.gen_range(1..=8), rng.gen_range(1..=4))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm41Sweep {
    pub generated: usize,
    pub distinct: usize,
    pub pairs: usize,
    pub homomorphisms: usize,
    pub surjective: usize,
    /// (surjective homomorphism, θ) pairs meeting every hypothesis.
    pub hypotheses_met: usize,
    pub counterexamples: Vec<Counterexample>,
}

/// Fragments on `{0,1}` generated by each subset of the four unary maps
/// with one of AND, OR, XOR, NAND; every surjective homomorphism between
/// them is checked against both bijections of the carrier.
pub fn thm41_sweep(max_arity: usize, cap: usize) -> Result<Thm41Sweep> {
    let c = Carrier::Finite(2);
    let op = |name: &str| {
        let (arity, table) = boolean_op(name).unwrap();
        FinOp::from_table(&c, arity, table)
    };
    let unary = ["ID", "NOT", "C0", "C1"].map(op).into_iter().collect::<Result<Vec<_>>>()?;
    let mut generated = 0;
    let mut distinct: BTreeMap<Vec<FinOp>, CloneFragment> = BTreeMap::new();
    for binary in ["AND", "OR", "XOR", "NAND"] {
        for mask in 0..16u32 {
            let mut gens: Vec<FinOp> = (0..4).filter(|i| mask >> i & 1 == 1).map(|i| unary[i].clone()).collect();
            gens.push(op(binary)?);
            let frag = close_fragment(&c, &gens, max_arity, cap)?;
            generated += 1;
            distinct.entry(frag.all_ops().cloned().collect()).or_insert(frag);
        }
    }
    let frags: Vec<&CloneFragment> = distinct.values().collect();
    let mut pairs = Vec::new();
    for s in &frags {
        for t in &frags {
            if (1..=max_arity).all(|n| t.ops(n).len() <= s.ops(n).len()) {
                pairs.push((*s, *t));
            }
        }
    }
    let thetas = [Bijection::identity(&c), Bijection::from_table(&c, vec![1, 0])?];
    let homs = enumerate_many(&pairs);
    let mut sweep = Thm41Sweep {
        generated,
        distinct: frags.len(),
        pairs: pairs.len(),
        homomorphisms: 0,
        surjective: 0,
        hypotheses_met: 0,
        counterexamples: Vec::new(),
    };
    for ((s, t), found) in pairs.iter().zip(homs) {
        for xi in found? {
            sweep.homomorphisms += 1;
            if !xi.is_surjective(t) {
                continue;
            }
            sweep.surjective += 1;
            for theta in &thetas {
                let r = verify_thm41(s, t, &xi, theta)?;
                if r.hypotheses_met {
                    sweep.hypotheses_met += 1;
                    sweep.counterexamples.extend(r.counterexamples);
                }
            }
        }
    }
    Ok(sweep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPathCase {
    pub size: usize,
    pub unary_generators: Vec<Vec<u32>>,
    pub theta: Vec<u32>,
    pub arity: usize,
    pub op: Vec<u32>,
    pub targets: Vec<u32>,
    pub predicted: u32,
    pub lifted: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPathSuite {
    pub cases: usize,
    pub disagreements: Vec<TwoPathCase>,
    /// Digest of every case, for replay comparisons.
    pub digest: u64,
}

fn random_table(rng: &mut impl Rng, size: usize, arity: usize) -> Vec<u32> {
    (0..size.pow(arity as u32)).map(|_| rng.gen_range(0..size as u32)).collect()
}

fn random_perm(rng: &mut impl Rng, size: usize) -> Vec<u32> {
    use rand::seq::SliceRandom;
    let mut p: Vec<u32> = (0..size as u32).collect();
    p.shuffle(rng);
    p
}

/// Random weakly directed unary monoid: closure of one to three random
/// maps, resampled until weakly directed.
fn random_directed_monoid(rng: &mut impl Rng, size: usize) -> Result<(Vec<Vec<u32>>, MonoidSet)> {
    let c = Carrier::Finite(size);
    loop {
        let k = rng.gen_range(1..=3);
        let gens: Vec<Vec<u32>> = (0..k).map(|_| random_table(rng, size, 1)).collect();
        let ops = gens.iter().map(|t| FinOp::from_table(&c, 1, t.clone())).collect::<Result<Vec<_>>>()?;
        let m = close_under_composition(&c, &ops)?;
        if is_weakly_directed(&m)? {
            return Ok((gens, m));
        }
    }
}

/// `thm41_predict` against `lift_conjugation` on random instances.
pub fn two_path_suite(seed: u64, count: usize) -> Result<TwoPathSuite> {
    let mut rng = rng(seed);
    let mut disagreements = Vec::new();
    let mut digest = 0xcbf2_9ce4_8422_2325u64;
    for _ in 0..count {
        let size = rng.gen_range(2..=3);
        let c = Carrier::Finite(size);
        let (unary_generators, m) = random_directed_monoid(&mut rng, size)?;
        let theta_t = random_perm(&mut rng, size);
        let theta = Bijection::from_table(&c, theta_t.clone())?;
        let arity = rng.gen_range(1..=3);
        let table = random_table(&mut rng, size, arity);
        let h = FinOp::from_table(&c, arity, table.clone())?;
        let targets: Vec<u32> = (0..arity).map(|_| rng.gen_range(0..size as u32)).collect();
        let ys: Vec<Elem> = targets.iter().map(|&y| Elem::Nat(y as u64)).collect();
        let predicted = thm41_predict(&theta, &m, &h, &ys)?.nat().unwrap() as u32;
        let lifted = lift_conjugation(&theta, &h)?.eval(&ys)?.nat().unwrap() as u32;
        for v in [size as u32, predicted, lifted].into_iter().chain(targets.iter().copied()) {
            digest = (digest ^ v as u64).wrapping_mul(0x100_0000_01b3);
        }
        if predicted != lifted {
            disagreements.push(TwoPathCase {
                size,
                unary_generators,
                theta: theta_t,
                arity,
                op: table,
                targets,
                predicted,
                lifted,
            });
        }
    }
    Ok(TwoPathSuite { cases: count, disagreements, digest })
}

/// Non-surjective self-embeddings of the rationals (the affine members
/// are automorphisms).
pub fn sample_rat_embeddings(rng: &mut impl Rng, count: usize) -> Result<Vec<RatMap>> {
    (0..count)
        .map(|i| {
            let affine = |rng: &mut ChaCha8Rng| RatMap::affine(positive_rational(rng), random_rational(rng, 6));
            let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
            Ok(match i % 5 {
                0 => affine(&mut r)?,
                1 => RatMap::gap(random_rational(&mut r, 6), positive_rational(&mut r))?,
                2 => affine(&mut r)?.then(RatMap::gap(random_rational(&mut r, 6), positive_rational(&mut r))?),
                3 => affine(&mut r)?.then(RatMap::Squash),
                _ => RatMap::Squash.then(affine(&mut r)?),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionProbe {
    pub theta: usize,
    pub f: usize,
    pub f2: usize,
    pub b: Elem,
    pub value: Option<Elem>,
    pub formula: Elem,
    pub paths: usize,
    pub well_defined: bool,
    pub hom_law: bool,
    pub transfer: bool,
    /// Queries made to the automorphism `θ` (Rado only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_queries: Option<usize>,
}

impl ExtensionProbe {
    pub fn passed(&self) -> bool {
        self.well_defined && self.hom_law && self.transfer
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionSuite {
    pub structure: String,
    pub thetas: Vec<PartialIso>,
    pub maps: Vec<serde_json::Value>,
    pub probes: Vec<ExtensionProbe>,
    pub errors: Vec<String>,
}

impl ExtensionSuite {
    pub fn passed(&self) -> usize {
        self.probes.iter().filter(|p| p.passed()).count()
    }
}

/// Extension probes on the rationals: `ξ` is conjugation by one of
/// `thetas` seeded automorphisms, `f` one of `maps` sampled embeddings and
/// `b` a small rational. Each probe runs the well-definedness check with
/// `trials` paths, the homomorphism law with a second sampled map and the
/// conjugation transfer.
pub fn rationals_extension_suite(seed: u64, thetas: usize, maps: usize, probes: usize, trials: usize) -> Result<ExtensionSuite> {
    let mut rng = rng(seed);
    let catalog = Catalog::RationalsOrder;
    let auts = (0..thetas).map(|_| random_automorphism(catalog, &mut rng, 3)).collect::<Result<Vec<_>>>()?;
    let seeds: Vec<PartialIso> = auts.iter().map(|a| a.seed().clone()).collect();
    let homs = auts
        .into_iter()
        .map(|a| HomMap::conjugation(Arc::new(CatalogGroup(catalog)), a.shared().to_bijection()))
        .collect::<Result<Vec<_>>>()?;
    let fams = sample_rat_embeddings(&mut rng, maps)?;
    let ops: Vec<FinOp> = fams.iter().map(RatMap::to_op).collect();
    let mut out = Vec::with_capacity(probes);
    for _ in 0..probes {
        let (t, f, f2) = (rng.gen_range(0..thetas), rng.gen_range(0..maps), rng.gen_range(0..maps));
        let b = Elem::Rat(random_rational(&mut rng, 12));
        let xi = &homs[t];
        let wd = check_well_defined(xi, &ops[f], &b, trials)?;
        let law = check_hom_law(xi, &ops[f], &ops[f2], &b)?;
        let tr = check_conjugation_transfer(xi, &ops[f], &b)?;
        out.push(ExtensionProbe {
            theta: t,
            f,
            f2,
            well_defined: wd.consistent && wd.value.as_ref() == Some(&tr.formula),
            value: wd.value,
            formula: tr.formula,
            paths: wd.paths,
            hom_law: law.holds,
            transfer: tr.holds,
            b,
            theta_queries: None,
        });
    }
    Ok(ExtensionSuite {
        structure: catalog.name().into(),
        thetas: seeds,
        maps: fams.iter().map(|m| serde_json::to_value(m).expect("serializable")).collect(),
        probes: out,
        errors: Vec::new(),
    })
}

/// Rado probes: each uses a fresh back-and-forth automorphism `θ` from a
/// `theta_seed`-pair seed and a fresh forward-only embedding `f` avoiding
/// one vertex; checks the conjugation transfer at a vertex below 16.
/// Failures of the lazy construction are reported per probe.
pub fn rado_extension_suite(seed: u64, probes: usize, theta_seed: usize) -> Result<ExtensionSuite> {
    let mut rng = rng(seed);
    let catalog = Catalog::Rado;
    let mut thetas = Vec::new();
    let mut maps = Vec::new();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for i in 0..probes {
        let theta = random_automorphism(catalog, &mut rng, theta_seed)?.shared();
        let fseed = random_seed(catalog, &mut rng, 1)?;
        let avoid = loop {
            let v = rng.gen_range(0..16u64);
            if fseed.get_inverse(&Elem::Nat(v)).is_none() {
                break v;
            }
        };
        let b = Elem::Nat(rng.gen_range(0..16));
        thetas.push(theta.with(|a| a.seed().clone()));
        maps.push(serde_json::json!({ "seed": fseed, "avoid": [avoid] }));
        let f = RadoEmbedding::new(fseed, vec![avoid])?.into_op();
        let xi = HomMap::conjugation(Arc::new(CatalogGroup(catalog)), theta.to_bijection())?;
        match check_conjugation_transfer(&xi, &f, &b) {
            Ok(tr) => out.push(ExtensionProbe {
                theta: i,
                f: i,
                f2: i,
                value: Some(tr.extended),
                formula: tr.formula,
                paths: 1,
                well_defined: true,
                hom_law: true,
                transfer: tr.holds && theta.with(|a| a.verify())?,
                b,
                theta_queries: Some(theta.with(|a| a.snapshot().len())),
            }),
            Err(e) => errors.push(format!("probe {i}: {e}")),
        }
    }
    Ok(ExtensionSuite { structure: catalog.name().into(), thetas, maps, probes: out, errors })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplementSweep {
    pub max_size: usize,
    pub structures: usize,
    pub violations: Vec<(usize, Vec<Vec<u32>>)>,
}

/// `End(complement_expansion(A)) = Emb(A)` for every structure with one
/// binary relation on at most `max_size` elements.
pub fn complement_sweep(max_size: usize) -> Result<ComplementSweep> {
    let mut structures = 0;
    let mut violations = Vec::new();
    for n in 1..=max_size {
        let cells = n * n;
        if cells >= 32 {
            return Err(Error::BudgetExceeded { what: "binary relations", cap: 1 << 31 });
        }
        let found: Vec<Option<Vec<Vec<u32>>>> = (0..1u64 << cells)
            .into_par_iter()
            .map(|mask| {
                let tuples: Vec<Vec<u32>> =
                    (0..cells).filter(|i| mask >> i & 1 == 1).map(|i| vec![(i / n) as u32, (i % n) as u32]).collect();
                let a = RelStructure::finite(n, vec![Symbol { name: "R".into(), arity: 2 }], vec![tuples.clone()])?;
                let end = end_monoid(&complement_expansion(&a))?;
                let mut emb = emb_set(&a, &a)?;
                emb.sort();
                Ok((end.ops()? != emb.as_slice()).then_some(tuples))
            })
            .collect::<Result<Vec<_>>>()?;
        structures += found.len();
        violations.extend(found.into_iter().flatten().map(|t| (n, t)));
    }
    Ok(ComplementSweep { max_size, structures, violations })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCase {
    pub window: Vec<u64>,
    pub embedding: PartialIso,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Partial self-embeddings of the Rado graph on random windows of size at
/// most `max_window` inside `{0..15}`, each given to back-and-forth as a
/// seed; the automorphism is evaluated on the window and one more vertex and
/// checked for adjacency preservation and reflection.
pub fn rado_window_suite(seed: u64, count: usize, max_window: usize) -> Result<Vec<WindowCase>> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let k = rng.gen_range(1..=max_window);
        let mut window: Vec<u64> = Vec::new();
        while window.len() < k {
            let v = rng.gen_range(0..16);
            if !window.contains(&v) {
                window.push(v);
            }
        }
        window.sort();
        let avoid: Vec<u64> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..16)).collect();
        let case = (|| -> Result<(PartialIso, bool)> {
            let mut emb = RadoEmbedding::new(PartialIso::new(), avoid.clone())?;
            for &v in &window {
                emb.apply(&Elem::Nat(v))?;
            }
            let seed = emb.snapshot().clone();
            let mut aut = LazyAutomorphism::new(Catalog::Rado, seed.clone())?;
            let mut agrees = true;
            for (x, y) in seed.pairs() {
                agrees &= aut.apply(x)? == *y;
            }
            aut.apply(&Elem::Nat(16))?;
            let rado = RelStructure::rado();
            Ok((seed.clone(), agrees && aut.verify()? && seed.is_partial_iso(&rado, &rado)?))
        })();
        out.push(match case {
            Ok((embedding, verified)) => WindowCase { window, embedding, verified, error: None },
            Err(e) => WindowCase { window, embedding: PartialIso::new(), verified: false, error: Some(e.to_string()) },
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitivityCase {
    pub x: Elem,
    pub y: Elem,
    pub images: Vec<Elem>,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn random_point(catalog: Catalog, rng: &mut impl Rng) -> Elem {
    match catalog {
        Catalog::RationalsOrder => Elem::Rat(random_rational(rng, 12)),
        Catalog::Rado => Elem::Nat(rng.gen_range(0..32)),
    }
}

/// Automorphisms sending `x` to `y` for random pairs, evaluated on the
/// default window of radius `k`.
pub fn transitivity_suite(catalog: Catalog, seed: u64, count: usize, k: u64) -> Result<Vec<TransitivityCase>> {
    let mut rng = rng(seed);
    let s = catalog.structure();
    let window: Vec<Elem> = catalog.default_window(k).points().iter().cloned().collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (x, y) = (random_point(catalog, &mut rng), random_point(catalog, &mut rng));
        let case = (|| -> Result<(Vec<Elem>, bool)> {
            let mut a = transitivity_witness(&s, &x, &y)?;
            let hit = a.apply(&x)? == y;
            let images = a.eval_batch(&window)?;
            Ok((images, hit && a.verify()?))
        })();
        out.push(match case {
            Ok((images, verified)) => TransitivityCase { x, y, images, verified, error: None },
            Err(e) => TransitivityCase { x, y, images: Vec::new(), verified: false, error: Some(e.to_string()) },
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentreCase {
    pub seed: PartialIso,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Elem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_seed: Option<PartialIso>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<(Elem, Elem)>,
    pub probed: usize,
}

impl CentreCase {
    pub fn found(&self) -> bool {
        self.outcome == "found"
    }
}

/// Noncommuting witnesses for random non-identity automorphisms (seeds of
/// two pairs, at least one moved).
pub fn centre_suite(catalog: Catalog, seed: u64, count: usize, k: u64, budget: usize) -> Result<Vec<CentreCase>> {
    let mut rng = rng(seed);
    let window = catalog.default_window(k);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut f = loop {
            let a = random_automorphism(catalog, &mut rng, 2)?;
            if a.seed().pairs().any(|(x, y)| x != y) {
                break a;
            }
        };
        let seed = f.seed().clone();
        out.push(match noncommuting_witness(&mut f, &window, budget) {
            Ok(o) => {
                let label = o.label().to_string();
                match o {
                    crate::backforth::NoncommutingOutcome::Found { g, point, fg, gf } => CentreCase {
                        seed,
                        outcome: label,
                        point: Some(point),
                        g_seed: Some(g.seed().clone()),
                        values: Some((fg, gf)),
                        probed: 0,
                    },
                    crate::backforth::NoncommutingOutcome::BudgetExhausted { probed }
                    | crate::backforth::NoncommutingOutcome::IdentityOnProbes { probed } => {
                        CentreCase { seed, outcome: label, point: None, g_seed: None, values: None, probed }
                    }
                }
            }
            Err(e) => CentreCase { seed, outcome: format!("error: {e}"), point: None, g_seed: None, values: None, probed: 0 },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_replay() {
        assert_eq!(two_path_suite(3, 20).unwrap(), two_path_suite(3, 20).unwrap());
        assert!(two_path_suite(3, 20).unwrap().disagreements.is_empty());
        let a = rationals_extension_suite(1, 2, 5, 6, 3).unwrap();
        assert_eq!(a.passed(), 6);
        assert_eq!(a, rationals_extension_suite(1, 2, 5, 6, 3).unwrap());
        let w = rado_window_suite(5, 5, 3).unwrap();
        assert_eq!(w, rado_window_suite(5, 5, 3).unwrap());
        assert!(complement_sweep(2).unwrap().violations.is_empty());
        assert_eq!(complement_sweep(2).unwrap().structures, 2 + 16);
    }

    #[test]
    fn sampled_embeddings_are_mostly_non_surjective() {
        let maps = sample_rat_embeddings(&mut rng(0), 10).unwrap();
        assert_eq!(maps.iter().filter(|m| !m.is_surjective()).count(), 8);
        for m in &maps {
            let f = m.to_op();
            let xs: Vec<Rational> = (-6..6).map(|i| rat(i, 3)).collect();
            let ys: Vec<Elem> = xs.iter().map(|x| f.apply(&Elem::Rat(x.clone())).unwrap()).collect();
            assert!(ys.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
