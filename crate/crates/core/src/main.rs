use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cartan_reps::cartan::{named_datum, parse_orientation, root_label, CartanDatum, DatumFile, Orientation};
use cartan_reps::checks::{self, CheckReport, Table};
use cartan_reps::field::{is_prime, Rationals};
use cartan_reps::grassmann::DEFAULT_PRIMES;
use cartan_reps::io::{canonical_json, module_from_json, module_to_json, ModuleJson};
use cartan_reps::module::Algebra;
use cartan_reps::{Error, Result};

#[derive(Parser)]
#[command(name = "cartan-reps", version, about = "Exact checks for locally free modules of symmetrizable Cartan data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Datum JSON file ({"C": .., "D": .., "Omega": ..}) or a name such as B2.
    #[arg(long)]
    datum: String,
    /// Orientation as 1-based pairs, "1,2;2,3" or [[1,2],[2,3]].
    #[arg(long)]
    omega: Option<String>,
    /// Primes for point counting.
    #[arg(long, value_delimiter = ',')]
    prime_set: Option<Vec<u64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Size of the worker pool.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for counting transcripts and exported documents.
    #[arg(long)]
    results_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Positive roots, by orbit closure and by β-sequence.
    Roots(Common),
    /// Symmetric and Euler forms, R and the Coxeter matrix.
    Forms(Common),
    /// Coxeter matrix identity over all orientations, at D and 2D.
    CoxeterCheck(Common),
    /// Root modules M(β) and their structural checks.
    RootModules(Common),
    /// dim Hom / dim Ext^1 between root modules against <β_i,β_j>.
    HomextTable(Common),
    /// τ-orbits of root modules and the rank action of τ.
    TauOrbits(Common),
    /// F-polynomials and g-vectors of the root modules.
    Fpoly(Common),
    /// Root-module F-polynomials against cluster variables.
    ClusterMatch(Common),
    /// Dual PBW pairing.
    PbwCheck {
        #[command(flatten)]
        common: Common,
        /// Componentwise bound on the weight.
        #[arg(long, value_delimiter = ',')]
        max_weight: Option<Vec<i64>>,
    },
    /// Serre element on random locally free modules.
    SerreCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// 1-based vertices of (ad θ_i)^{1-c_ij}(θ_j).
        #[arg(long, default_value_t = 1)]
        i: usize,
        #[arg(long, default_value_t = 2)]
        j: usize,
    },
    /// Preprojective modules: relations, E-filtrations, crystal vanishing
    /// and Ext-symmetry.
    PiCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 20)]
        crystal: usize,
        /// Attempts for the nonvanishing search.
        #[arg(long, default_value_t = 200)]
        attempts: usize,
        /// Frozen module on which θ̃_12 must be nonzero.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Write the witness found by the search to this path.
        #[arg(long)]
        write_fixture: Option<PathBuf>,
    },
    /// Filtrations of root modules by other root modules in both orders.
    NofiltCheck(Common),
    /// dim Hom - dim Ext^1 against the Euler form on random pairs.
    EulerCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
    },
    /// Arrow-data dimension against Σ c_i r_i^2 - (r,r)/2.
    DimCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        bound: i64,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Roots(c)
            | Command::Forms(c)
            | Command::CoxeterCheck(c)
            | Command::RootModules(c)
            | Command::HomextTable(c)
            | Command::TauOrbits(c)
            | Command::Fpoly(c)
            | Command::ClusterMatch(c)
            | Command::NofiltCheck(c) => c,
            Command::PbwCheck { common, .. }
            | Command::SerreCheck { common, .. }
            | Command::PiCheck { common, .. }
            | Command::EulerCheck { common, .. }
            | Command::DimCheck { common, .. } => common,
        }
    }
}

/// Failure before any mathematics ran.
struct Usage(String);

enum Failure {
    Usage(String),
    Math(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotDynkin => Failure::Usage(format!("{e}; this command needs a finite root system")),
            Error::Parse(_) | Error::InvalidOrientation(_) | Error::NotCartan(_) | Error::NotSymmetrizer(_) | Error::Io(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Math(other),
        }
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

struct Setup {
    datum: CartanDatum,
    omega: Orientation,
    primes: Vec<u64>,
}

fn load_datum(spec: &str) -> std::result::Result<(CartanDatum, Option<Orientation>), Failure> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        let doc: DatumFile = serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
        return Ok(doc.load()?);
    }
    match named_datum(spec) {
        Some(d) => Ok((d, None)),
        None => {
            Err(Usage(format!("--datum {spec:?} is neither a readable file nor a known name (A1..A4, B2..B4, C2..C4, D4, F4, G2, A1~)"))
                .into())
        }
    }
}

fn setup(c: &Common) -> std::result::Result<Setup, Failure> {
    let (datum, file_omega) = load_datum(&c.datum)?;
    let omega = match (&c.omega, file_omega) {
        (Some(text), _) => parse_orientation(&datum, text)?,
        (None, Some(o)) => o,
        (None, None) => Orientation::default_for(&datum),
    };
    let primes = c.prime_set.clone().unwrap_or_else(|| DEFAULT_PRIMES.to_vec());
    if primes.len() < 2 {
        return Err(Usage("--prime-set needs at least two primes".into()).into());
    }
    if let Some(p) = primes.iter().find(|&&p| !is_prime(p)) {
        return Err(Usage(format!("--prime-set entry {p} is not prime")).into());
    }
    if let Some(n) = c.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Usage(format!("--workers: {e}")))?;
    }
    Ok(Setup { datum, omega, primes })
}

fn require_seed(c: &Common) -> std::result::Result<u64, Failure> {
    c.seed.ok_or_else(|| Usage("this command is randomized; pass --seed <u64>".into()).into())
}

fn write_result(dir: &Option<PathBuf>, name: &str, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), canonical_json(value)? + "\n")?;
    }
    Ok(())
}

fn vertex(v: usize, n: usize) -> std::result::Result<usize, Failure> {
    if v == 0 || v > n {
        return Err(Usage(format!("vertex {v} is outside 1..={n}")).into());
    }
    Ok(v - 1)
}

fn run(cmd: &Command) -> std::result::Result<CheckReport, Failure> {
    let c = cmd.common();
    let s = setup(c)?;
    let h = Algebra::h(&s.datum, &s.omega);
    let pi = Algebra::pi(&s.datum, &s.omega);
    let report = match cmd {
        Command::Roots(_) => checks::roots_check(&s.datum, &s.omega)?,
        Command::Forms(_) => {
            let forms = s.datum.forms(&s.omega)?;
            let details = json!({
                "C": s.datum.c(), "D": s.datum.d(), "Omega": s.omega.to_one_based(),
                "type": s.datum.dynkin_type(), "forms": forms,
            });
            let summary = format!("forms of a rank {} datum", s.datum.n());
            CheckReport::new("forms", true, summary, details)
        }
        Command::CoxeterCheck(_) => checks::coxeter_check(&s.datum)?,
        Command::RootModules(_) => {
            let (report, table) = checks::root_modules_check(&h, c.seed.unwrap_or(0))?;
            let docs: Vec<serde_json::Value> =
                checks::root_module_documents(&table).into_iter().map(|(beta, doc)| json!({"beta": beta, "module": doc})).collect();
            write_result(&c.results_dir, "root_modules.json", &json!(docs))?;
            report
        }
        Command::HomextTable(_) => checks::homext_check(&h)?,
        Command::TauOrbits(_) => checks::tau_check(&h, c.seed.unwrap_or(0))?,
        Command::Fpoly(_) => {
            let side = checks::module_side(&h, &s.primes)?;
            let entries: Vec<serde_json::Value> =
                side.entries.iter().map(|(root, f, g)| json!({"root": root, "f": f.to_json(), "g": g})).collect();
            let transcripts: Vec<serde_json::Value> = side
                .entries
                .iter()
                .zip(&side.counts)
                .map(|((root, _, _), counts)| {
                    let per_e: Vec<serde_json::Value> = counts
                        .iter()
                        .map(|(e, poly)| {
                            let samples: Vec<serde_json::Value> =
                                poly.samples.iter().map(|(p, n)| json!({"prime": p, "count": n.to_string()})).collect();
                            json!({"e": e, "samples": samples, "coefficients": poly.coefficients.iter().map(|x| x.to_string()).collect::<Vec<_>>()})
                        })
                        .collect();
                    json!({"root": root, "grassmannians": per_e})
                })
                .collect();
            write_result(&c.results_dir, "fpoly_counts.json", &json!(transcripts))?;
            let mut t = Table::new(&["root", "g", "F"]);
            for (root, f, g) in &side.entries {
                t.push(vec![root_label(root), root_label(g), f.to_json().to_string()]);
            }
            let constant_one = side.entries.iter().all(|(_, f, _)| f.terms.get(&vec![0; s.datum.n()]) == Some(&1));
            let top_one = side.entries.iter().all(|(_, f, _)| f.terms.get(&f.rank) == Some(&1));
            let ok = constant_one && top_one;
            let details = json!({"entries": entries, "constant_term_one": constant_one, "top_term_one": top_one});
            CheckReport::new("fpoly", ok, format!("{} F-polynomials, constant and top term 1: {ok}", entries.len()), details).with_table(t)
        }
        Command::ClusterMatch(_) => checks::cluster_check(&h, &s.primes)?,
        Command::PbwCheck { max_weight, .. } => {
            let w = max_weight.clone().unwrap_or_else(|| vec![2; s.datum.n()]);
            if w.len() != s.datum.n() {
                return Err(Usage(format!("--max-weight needs {} entries", s.datum.n())).into());
            }
            checks::pbw_check(&h, &w, &s.primes)?
        }
        Command::SerreCheck { count, i, j, .. } => {
            let seed = require_seed(c)?;
            checks::serre_check(&h, vertex(*i, s.datum.n())?, vertex(*j, s.datum.n())?, *count, seed, &s.primes)?
        }
        Command::PiCheck { pairs, crystal, attempts, fixture, write_fixture, .. } => {
            let seed = require_seed(c)?;
            let mut parts = vec![checks::pi_structure_check(&pi, 20, seed)?, checks::pi_homology_check(&pi, *pairs, 3, seed)?];
            if s.datum.n() >= 2 {
                parts.push(checks::crystal_check(&pi, 0, 1, *crystal, seed, &s.primes)?);
                let found = checks::noserre_search(&pi, 0, 1, *attempts, seed, &s.primes)?;
                let search = match &found {
                    Some(w) => CheckReport::new(
                        "noserre-search",
                        true,
                        format!("attempt {} (sequence {:?}) gives θ̃ = {}", w.attempt, w.seq, w.value),
                        json!({"attempt": w.attempt, "seq": w.seq, "value": w.value.to_string(), "module": module_to_json(&w.module)}),
                    ),
                    None => CheckReport::new("noserre-search", false, format!("no module with θ̃ ≠ 0 in {attempts} attempts"), json!(null)),
                };
                parts.push(search);
                if let (Some(path), Some(w)) = (write_fixture, &found) {
                    std::fs::write(path, canonical_json(&module_to_json(&w.module))? + "\n").map_err(Error::from)?;
                }
                if let Some(path) = fixture {
                    let text = std::fs::read_to_string(path).map_err(Error::from)?;
                    let doc: ModuleJson = serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
                    let m = module_from_json(&doc, &Rationals)?;
                    if m.alg().datum() != pi.datum() {
                        return Err(Usage("fixture belongs to a different datum".into()).into());
                    }
                    parts.push(checks::noserre_fixture_check(&m, 0, 1, seed, &s.primes)?);
                }
            }
            checks::CheckReport::combine("pi-check", parts)
        }
        Command::NofiltCheck(_) => checks::nofilt_check(&h, &s.primes, None)?,
        Command::EulerCheck { pairs, .. } => checks::euler_check(&h, *pairs, 2, require_seed(c)?)?,
        Command::DimCheck { bound, .. } => checks::dimension_check(&s.datum, *bound)?,
    };
    Ok(report)
}

fn render(report: &CheckReport, format: Format) -> Result<String> {
    Ok(match (format, &report.table) {
        (Format::Csv, Some(t)) => t.to_csv(),
        (Format::Table, Some(t)) => format!("{}{}: {}\n", t.to_text(), report.name, report.summary),
        (Format::Table, None) => format!("{}: {}\n", report.name, report.summary),
        _ => canonical_json(report)? + "\n",
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.command.common().format;
    match run(&cli.command) {
        Ok(report) => match render(&report, format) {
            Ok(text) => {
                print!("{text}");
                if report.passed {
                    ExitCode::SUCCESS
                } else {
                    eprintln!("check failed: {}", report.summary);
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Math(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
