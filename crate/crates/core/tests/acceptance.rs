use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cartan_reps::cartan::{named_datum, CartanDatum, Orientation};
use cartan_reps::checks::{self, CheckReport};
use cartan_reps::field::Rationals;
use cartan_reps::grassmann::DEFAULT_PRIMES;
use cartan_reps::io::{module_from_json, ModuleJson};
use cartan_reps::module::Algebra;
use cartan_reps::Result;

const SEED: u64 = 20240601;

fn datum(name: &str) -> CartanDatum {
    named_datum(name).unwrap()
}

fn h(name: &str) -> Arc<Algebra> {
    let d = datum(name);
    Algebra::h(&d, &Orientation::default_for(&d))
}

fn pi(name: &str) -> Arc<Algebra> {
    let d = datum(name);
    Algebra::pi(&d, &Orientation::default_for(&d))
}

fn all_of(reports: Vec<CheckReport>) -> (bool, String) {
    let ok = reports.iter().all(|r| r.passed);
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| format!("{} ({})", r.name, r.summary)).collect();
    let text = if ok { format!("{} checks", reports.len()) } else { format!("failed: {}", failed.join("; ")) };
    (ok, text)
}

fn roots() -> Result<(bool, String)> {
    let mut parts = Vec::new();
    let mut counts = Vec::new();
    for (name, expected) in [("A2", 3), ("B2", 4), ("A3", 6), ("G2", 6), ("B3", 9)] {
        let d = datum(name);
        let r = checks::roots_check(&d, &Orientation::default_for(&d))?;
        let count = r.details["count"].as_u64().unwrap();
        counts.push(format!("{name}={count}"));
        parts.push(CheckReport::new(name, r.passed && count == expected, r.summary, r.details));
    }
    let (ok, text) = all_of(parts);
    Ok((ok, format!("{} ({text})", counts.join(" "))))
}

fn coxeter() -> Result<(bool, String)> {
    let names = ["A1", "A2", "A3", "A4", "B2", "B3", "B4", "C2", "C3", "C4", "D4", "F4", "G2"];
    let reports = names.iter().map(|n| checks::coxeter_check(&datum(n))).collect::<Result<Vec<_>>>()?;
    let cases: u64 = reports.iter().map(|r| r.details["cases"].as_u64().unwrap()).sum();
    let (ok, text) = all_of(reports);
    Ok((ok, format!("{} data, {cases} (D or 2D, Ω) cases; {text}", names.len())))
}

fn root_modules() -> Result<(bool, String)> {
    let start = Instant::now();
    let mut reports = Vec::new();
    for name in ["B2", "G2", "B3"] {
        reports.push(checks::root_modules_check(&h(name), SEED)?.0);
    }
    let elapsed = start.elapsed();
    let (ok, text) = all_of(reports);
    Ok((ok && elapsed < Duration::from_secs(10), format!("B2, G2, B3 in {:.2}s; {text}", elapsed.as_secs_f64())))
}

fn euler() -> Result<(bool, String)> {
    let names = ["A2", "B2", "G2", "A3", "B3"];
    let reports = names.iter().map(|n| checks::euler_check(&h(n), 200, 2, SEED)).collect::<Result<Vec<_>>>()?;
    let (ok, text) = all_of(reports);
    Ok((ok, format!("200 pairs each for {}; {text}", names.join(", "))))
}

fn homext() -> Result<(bool, String)> {
    let reports = vec![checks::homext_check(&h("B2"))?, checks::homext_check(&h("G2"))?];
    let summary = reports.iter().map(|r| r.summary.clone()).collect::<Vec<_>>().join("; ");
    Ok((all_of(reports).0, summary))
}

fn tau() -> Result<(bool, String)> {
    let names = ["A2", "B2", "G2", "A3", "B3", "C3"];
    let reports = names.iter().map(|n| checks::tau_check(&h(n), SEED)).collect::<Result<Vec<_>>>()?;
    let (ok, text) = all_of(reports);
    Ok((ok, format!("{}; {text}", names.join(", "))))
}

fn cluster() -> Result<(bool, String)> {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, expected) in [("A2", 3), ("B2", 4), ("G2", 6)] {
        let r = checks::cluster_check(&h(name), &DEFAULT_PRIMES)?;
        ok &= r.passed && r.details["total"] == expected;
        parts.push(format!("{name} {}", r.summary));
    }
    let elapsed = start.elapsed();
    Ok((ok && elapsed < Duration::from_secs(120), format!("{} in {:.2}s", parts.join(", "), elapsed.as_secs_f64())))
}

fn pbw() -> Result<(bool, String)> {
    let r = checks::pbw_check(&h("B2"), &[2, 2], &DEFAULT_PRIMES)?;
    Ok((r.passed, r.summary))
}

fn serre() -> Result<(bool, String)> {
    let reports = vec![
        checks::serre_check(&h("B2"), 0, 1, 50, SEED, &DEFAULT_PRIMES)?,
        checks::serre_check(&h("G2"), 0, 1, 50, SEED, &DEFAULT_PRIMES)?,
    ];
    let summary = reports.iter().map(|r| r.summary.clone()).collect::<Vec<_>>().join("; ");
    Ok((all_of(reports).0, summary))
}

fn pi_homology() -> Result<(bool, String)> {
    let r = checks::pi_homology_check(&pi("B2"), 100, 3, SEED)?;
    Ok((r.passed, r.summary))
}

fn nofilt() -> Result<(bool, String)> {
    let single = checks::nofilt_check(&h("B2"), &DEFAULT_PRIMES, Some((1, vec![1, 0, 0, 1])))?;
    let all = checks::nofilt_check(&h("B2"), &DEFAULT_PRIMES, None)?;
    let primes = single.details["cases"].as_array().map_or(0, Vec::len);
    Ok((single.passed && all.passed && primes == DEFAULT_PRIMES.len(), format!("β_2 = β_1 + β_4 over {primes} primes; {}", all.summary)))
}

fn fixture() -> Result<cartan_reps::module::Module<Rationals>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/noserre_b2.json");
    let doc: ModuleJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    module_from_json(&doc, &Rationals)
}

fn crystal() -> Result<(bool, String)> {
    let p = pi("B2");
    let vanishing = checks::crystal_check(&p, 0, 1, 20, SEED, &DEFAULT_PRIMES)?;
    let search = checks::noserre_search(&p, 0, 1, 200, SEED, &DEFAULT_PRIMES)?;
    let frozen = checks::noserre_fixture_check(&fixture()?, 0, 1, SEED, &DEFAULT_PRIMES)?;
    let found = match &search {
        Some(w) => format!("search hit at attempt {} with θ̃ = {}", w.attempt, w.value),
        None => "search found nothing".to_string(),
    };
    Ok((vanishing.passed && search.is_some() && frozen.passed, format!("{}; {found}; {}", vanishing.summary, frozen.summary)))
}

fn dimension() -> Result<(bool, String)> {
    let reports = vec![checks::dimension_check(&datum("B2"), 6)?, checks::dimension_check(&datum("G2"), 6)?];
    let summary = reports.iter().map(|r| r.summary.clone()).collect::<Vec<_>>().join("; ");
    Ok((all_of(reports).0, summary))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Result<(bool, String)>)> = vec![
        ("positive roots by orbit and β-sequence", roots),
        ("Coxeter matrix identity", coxeter),
        ("root modules", root_modules),
        ("Euler form", euler),
        ("Hom/Ext triangle", homext),
        ("τ rank action", tau),
        ("F-polynomial and g-vector match", cluster),
        ("dual PBW pairing", pbw),
        ("Serre vanishing", serre),
        ("Π homology", pi_homology),
        ("filtration order", nofilt),
        ("crystal vanishing and nonvanishing witness", crystal),
        ("dimension formula", dimension),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, text) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name} [{:.2}s]: {text}", k + 1, start.elapsed().as_secs_f64());
        if !ok {
            failed.push(k + 1);
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
