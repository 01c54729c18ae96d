//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use clonelab::backforth::Catalog;
use clonelab::cli::suites::{
    centre_suite, complement_sweep, rado_extension_suite, rado_window_suite, rationals_extension_suite, thm41_sweep,
    transitivity_suite, two_path_suite,
};
use clonelab::cli::{run, Command, ExperimentConfig};
use clonelab::clone::DEFAULT_OP_CAP;
use clonelab::monoid::{close_under_composition, injective_endos_fixing, MonoidSet};
use clonelab::structures::{complement_expansion, end_monoid, is_homogeneous, RelStructure, Symbol};
use clonelab::{Carrier, FinOp};

const SEED: u64 = 20_241;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(t: Instant, limit: Duration) -> bool {
    t.elapsed() <= limit
}

/// Exhaustive conjugation lifting on 2-element fragments, arity bound 2.
fn conjugation_lifting_exhaustive() -> Outcome {
    let t = Instant::now();
    let sweep = thm41_sweep(2, DEFAULT_OP_CAP).expect("sweep");
    let pass = sweep.generated == 64 && sweep.hypotheses_met > 0 && sweep.counterexamples.is_empty() && within(t, Duration::from_secs(120));
    outcome(
        pass,
        format!(
            "{} fragments ({} distinct), {} surjective homs, {} meeting hypotheses, {} counterexamples, {:.2?}",
            sweep.generated,
            sweep.distinct,
            sweep.surjective,
            sweep.hypotheses_met,
            sweep.counterexamples.len(),
            t.elapsed()
        ),
    )
}

fn two_path_agreement() -> Outcome {
    let t = Instant::now();
    let s = two_path_suite(SEED, 500).expect("two-path suite");
    let pass = s.cases == 500 && s.disagreements.is_empty() && within(t, Duration::from_secs(60));
    outcome(pass, format!("{} cases, {} disagreements, {:.2?}", s.cases, s.disagreements.len(), t.elapsed()))
}

fn extension_on_rationals() -> Outcome {
    let s = rationals_extension_suite(SEED, 10, 10, 100, 5).expect("rationals suite");
    let all_paths = s.probes.iter().all(|p| p.paths == 5);
    let pass = s.probes.len() == 100 && s.passed() == 100 && all_paths && s.errors.is_empty();
    outcome(pass, format!("{}/100 probes pass (well-defined over 5 paths, law, transfer)", s.passed()))
}

fn extension_on_rado() -> Outcome {
    let s = rado_extension_suite(SEED, 50, 2).expect("rado suite");
    let pass = s.passed() == 50 && s.errors.is_empty();
    outcome(pass, format!("{}/50 probes pass, {} construction errors", s.passed(), s.errors.len()))
}

/// Emb by brute force over all self-maps, from the raw relation.
fn brute_emb(n: usize, rel: &BTreeSet<(u32, u32)>) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut f = vec![0u32; n];
    loop {
        let injective = f.iter().collect::<BTreeSet<_>>().len() == n;
        let strong = (0..n as u32)
            .all(|x| (0..n as u32).all(|y| rel.contains(&(x, y)) == rel.contains(&(f[x as usize], f[y as usize]))));
        if injective && strong {
            out.push(f.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            f[i] += 1;
            if (f[i] as usize) < n {
                break;
            }
            f[i] = 0;
        }
    }
}

fn complement_expansion_equality() -> Outcome {
    let t = Instant::now();
    let sweep = complement_sweep(4).expect("sweep");
    // independent oracle for sizes up to 3
    let mut oracle_mismatch = 0;
    for n in 1..=3usize {
        for mask in 0..1u32 << (n * n) {
            let rel: BTreeSet<(u32, u32)> =
                (0..n * n).filter(|i| mask >> i & 1 == 1).map(|i| ((i / n) as u32, (i % n) as u32)).collect();
            let a = RelStructure::finite(
                n,
                vec![Symbol { name: "R".into(), arity: 2 }],
                vec![rel.iter().map(|&(x, y)| vec![x, y]).collect()],
            )
            .unwrap();
            let end: Vec<Vec<u32>> =
                end_monoid(&complement_expansion(&a)).unwrap().ops().unwrap().iter().map(|f| f.table().unwrap().to_vec()).collect();
            if end != brute_emb(n, &rel) {
                oracle_mismatch += 1;
            }
        }
    }
    let pass = sweep.structures == 2 + 16 + 512 + 65536
        && sweep.violations.is_empty()
        && oracle_mismatch == 0
        && within(t, Duration::from_secs(300));
    outcome(
        pass,
        format!(
            "{} structures, {} violations, {} brute-force mismatches (n<=3), {:.2?}",
            sweep.structures,
            sweep.violations.len(),
            oracle_mismatch,
            t.elapsed()
        ),
    )
}

fn raw_rado_adjacent(i: u64, j: u64) -> bool {
    let (lo, hi) = (i.min(j), i.max(j));
    lo != hi && lo < 64 && hi & (1u64 << lo) != 0
}

fn rado_window_interpolation() -> Outcome {
    let cases = rado_window_suite(SEED, 100, 6).expect("window suite");
    let rechecked = cases
        .iter()
        .filter(|c| {
            let pairs: Vec<(u64, u64)> = c.embedding.pairs().map(|(x, y)| (x.nat().unwrap(), y.nat().unwrap())).collect();
            c.verified
                && pairs.len() == c.window.len()
                && pairs.iter().all(|&(x, y)| pairs.iter().all(|&(u, v)| x == u || raw_rado_adjacent(x, u) == raw_rado_adjacent(y, v)))
        })
        .count();
    let max = cases.iter().map(|c| c.window.len()).max().unwrap_or(0);
    outcome(rechecked == 100 && max <= 6, format!("{rechecked}/100 interpolants verified, windows up to {max}"))
}

fn witnesses() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (catalog, k) in [(Catalog::RationalsOrder, 3), (Catalog::Rado, 1)] {
        let tr = transitivity_suite(catalog, SEED, 100, k).expect("transitivity");
        let ok = tr.iter().filter(|c| c.verified).count();
        let ce = centre_suite(catalog, SEED, 50, 3, clonelab::backforth::DEFAULT_PROBE_BUDGET).expect("centre");
        let found = ce.iter().filter(|c| c.found()).count();
        let exhausted = ce.iter().filter(|c| c.outcome == "budget exhausted").count();
        pass &= ok == 100 && found == 50;
        parts.push(format!("{}: transitivity {ok}/100, noncommuting {found}/50 found ({exhausted} budget exhausted)", catalog.name()));
    }
    outcome(pass, parts.join("; "))
}

fn e_g_criterion() -> Outcome {
    let c = Carrier::Finite(2);
    let m = MonoidSet::from_tables(&c, [vec![0, 1], vec![0, 0], vec![1, 1]]).unwrap();
    let first = injective_endos_fixing(&m, &[FinOp::identity(&c)]).unwrap();
    let id_idx = m.index_of(&FinOp::identity(&c)).unwrap();
    let c0 = m.index_of(&FinOp::constant(&c, 1, 0).unwrap()).unwrap();
    let c1 = m.index_of(&FinOp::constant(&c, 1, 1).unwrap()).unwrap();
    let mut swap = vec![0; 3];
    swap[id_idx] = id_idx;
    swap[c0] = c1;
    swap[c1] = c0;
    let expected: Vec<Vec<usize>> = {
        let mut v = vec![vec![0, 1, 2], swap];
        v.sort();
        v
    };
    let not = close_under_composition(&c, &[FinOp::from_table(&c, 1, vec![1, 0]).unwrap()]).unwrap();
    let second = injective_endos_fixing(&not, not.ops().unwrap()).unwrap();
    let pass = first == expected && second.len() == 1;
    outcome(pass, format!("{{id,c0,c1}}/{{id}}: {} maps; <NOT>/<NOT>: {} map", first.len(), second.len()))
}

/// Graph as an edge set, for the independent check.
fn edges(a: &RelStructure) -> (usize, BTreeSet<(u32, u32)>) {
    (a.size().unwrap(), a.tuples(0).unwrap().into_iter().map(|t| (t[0], t[1])).collect())
}

/// Whether some automorphism of the graph extends the map, over all
/// permutations.
fn extends_to_automorphism(n: usize, e: &BTreeSet<(u32, u32)>, pairs: &[(u32, u32)]) -> bool {
    fn go(n: usize, e: &BTreeSet<(u32, u32)>, pairs: &[(u32, u32)], perm: &mut Vec<u32>, used: &mut Vec<bool>) -> bool {
        if perm.len() == n {
            let ok_pairs = pairs.iter().all(|&(x, y)| perm[x as usize] == y);
            let iso = (0..n as u32)
                .all(|x| (0..n as u32).all(|y| e.contains(&(x, y)) == e.contains(&(perm[x as usize], perm[y as usize]))));
            return ok_pairs && iso;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                perm.push(v as u32);
                let hit = go(n, e, pairs, perm, used);
                perm.pop();
                used[v] = false;
                if hit {
                    return true;
                }
            }
        }
        false
    }
    go(n, e, pairs, &mut Vec::new(), &mut vec![false; n])
}

fn homogeneity_corpus() -> Outcome {
    let mut positives: Vec<(String, RelStructure)> = vec![
        ("C5".into(), RelStructure::cycle(5).unwrap()),
        ("K3".into(), RelStructure::complete(3).unwrap()),
    ];
    for n in 1..=5 {
        positives.push((format!("edgeless {n}"), RelStructure::edgeless(n).unwrap()));
    }
    for parts in [vec![1, 1], vec![2, 2], vec![3, 3], vec![2, 2, 2], vec![1, 1, 1, 1]] {
        positives.push((format!("K{parts:?}"), RelStructure::complete_multipartite(&parts).unwrap()));
    }
    let negatives = [("P4", RelStructure::path(4).unwrap()), ("C6", RelStructure::cycle(6).unwrap())];
    let mut bad = Vec::new();
    for (name, a) in &positives {
        if !is_homogeneous(a).unwrap().homogeneous {
            bad.push(name.clone());
        }
    }
    for (name, a) in &negatives {
        let r = is_homogeneous(a).unwrap();
        let verified = match &r.witness {
            Some(w) if !r.homogeneous => {
                let (n, e) = edges(a);
                let pairs: Vec<(u32, u32)> = w.pairs().map(|(x, y)| (x.nat().unwrap() as u32, y.nat().unwrap() as u32)).collect();
                let is_local_iso = pairs.iter().all(|&(x, y)| pairs.iter().all(|&(u, v)| e.contains(&(x, u)) == e.contains(&(y, v))));
                is_local_iso && !extends_to_automorphism(n, &e, &pairs)
            }
            _ => false,
        };
        if !verified {
            bad.push(name.to_string());
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} homogeneous samples, 2 witnesses re-verified; failing: {:?}", positives.len(), bad),
    )
}

fn config(command: Command) -> ExperimentConfig {
    ExperimentConfig { seed: SEED, timestamp: false, ..ExperimentConfig::new(command) }
}

fn determinism() -> Outcome {
    let mut mismatched = Vec::new();
    let mut runs = 0;
    for command in [Command::VerifyThm41, Command::CheckExtension, Command::Density, Command::CentreWitness, Command::Transitivity, Command::EGCheck] {
        let (a, b) = (run(&config(command)), run(&config(command)));
        runs += 1;
        if a.to_json().unwrap() != b.to_json().unwrap() {
            mismatched.push(command.name().to_string());
        }
    }
    let timestamped = ExperimentConfig { timestamp: true, ..config(Command::EGCheck) };
    let (a, b) = (run(&timestamped), run(&timestamped));
    if a.comparable().to_json().unwrap() != b.comparable().to_json().unwrap() {
        mismatched.push("timestamped e-g-check".into());
    }
    for (name, x, y) in [
        ("two-path", json(&two_path_suite(SEED, 500).unwrap()), json(&two_path_suite(SEED, 500).unwrap())),
        ("rationals extension", json(&rationals_extension_suite(SEED, 10, 10, 100, 5).unwrap()), json(&rationals_extension_suite(SEED, 10, 10, 100, 5).unwrap())),
        ("rado extension", json(&rado_extension_suite(SEED, 50, 2).unwrap()), json(&rado_extension_suite(SEED, 50, 2).unwrap())),
        ("rado windows", json(&rado_window_suite(SEED, 100, 6).unwrap()), json(&rado_window_suite(SEED, 100, 6).unwrap())),
    ] {
        runs += 1;
        if x != y {
            mismatched.push(name.to_string());
        }
    }
    outcome(mismatched.is_empty(), format!("{runs} experiments replayed, mismatches: {mismatched:?}"))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap()
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("conjugation lifting, exhaustive", conjugation_lifting_exhaustive),
        ("two-path agreement", two_path_agreement),
        ("extension on (Q,<)", extension_on_rationals),
        ("extension on the Rado graph", extension_on_rado),
        ("End of complement expansion = Emb", complement_expansion_equality),
        ("window interpolation on the Rado graph", rado_window_interpolation),
        ("transitivity and noncommuting witnesses", witnesses),
        ("E_G criterion", e_g_criterion),
        ("homogeneity corpus", homogeneity_corpus),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = match std::panic::catch_unwind(f) {
            Ok(o) => o,
            Err(e) => outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>().map(String::as_str).or(e.downcast_ref::<&str>().copied()))),
        };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
