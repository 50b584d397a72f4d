//! Command implementations for the `scattering` binary.
//!
//! Every command reads an instance document (or builds one), runs the
//! requested pipeline and emits a JSON or tabular report. A fixed seed
//! makes the JSON byte-identical across runs. Exit codes: 0 success,
//! 1 bad instance, 2 numerical failure, 3 count mismatch.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use scattering::arrangement::ArrangementMatrix;
use scattering::chy;
use scattering::error::Error;
use scattering::hilbert;
use scattering::homotopy::{self, HomotopyConfig};
use scattering::linalg::{parse_rat, rat_int, rat_to_string, Rat, RatMat};
use scattering::matroid::{self, CriterionVerdict, FlatType, WeightOrder};
use scattering::report::{pairs_to_vec, SolutionReport};

#[derive(Parser)]
#[command(
    name = "scattering",
    version,
    about = "Scattering equations of hyperplane arrangements: solve, analyze, cross-validate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Subcommand)]
pub enum Command {
    /// Exact matroid statistics: circuits, flats, degrees, criterion
    Analyze {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the scattering equations by the degeneration homotopy
    Solve {
        /// Instance document; omit together with --bench --d --n to time a
        /// random integer instance
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Weight vector override, e.g. --omega 1,2,3,4
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        omega: Option<Vec<i64>>,
        /// JSON file with the exponent vector u as [re, im] pairs
        #[arg(long)]
        u_file: Option<PathBuf>,
        /// JSON file with the start matrix A0 as rows of [re, im] pairs
        #[arg(long)]
        a0_file: Option<PathBuf>,
        #[arg(long)]
        tol_corrector: Option<f64>,
        #[arg(long)]
        tol_zero: Option<f64>,
        #[arg(long)]
        tol_cluster: Option<f64>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Arc parameter override as re,im (defaults to a random arc)
        #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
        gamma: Option<Vec<f64>>,
        /// Include boundary clusters in the report
        #[arg(long)]
        return_boundary: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record per-phase wall times (timings vary between runs)
        #[arg(long)]
        bench: bool,
        /// Ambient dimension for a generated bench instance
        #[arg(long)]
        d: Option<usize>,
        /// Hyperplane count minus one for a generated bench instance
        #[arg(long)]
        n: Option<usize>,
    },
    /// Moduli-space instance: solve, boundary census, sub-system check
    Chy {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file with the Mandelstam vector s as [re, im] pairs
        #[arg(long)]
        s_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hilbert function table of the reciprocal ring and its section
    Hilbert {
        instance: PathBuf,
        #[arg(long)]
        q: usize,
        /// Optional linear form (rational coefficients, comma separated)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h: Option<Vec<String>>,
        /// With --h2: also print the eliminant of the pencil h2 - t h1
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h1: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h2: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eliminant of the pencil h2 - t h1 on the section
    Eliminant {
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h1: Vec<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h2: Vec<String>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the solution-set verification on a stored report
    Certify {
        instance: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub struct Outcome {
    pub exit_code: i32,
    pub output: String,
}

fn error_outcome(e: &Error) -> Outcome {
    let body = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
    Outcome {
        exit_code: e.exit_code(),
        output: format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
    }
}

fn io_error(msg: String) -> Outcome {
    let body = json!({"error": {"kind": "io", "message": msg}});
    Outcome {
        exit_code: 1,
        output: format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
    }
}

pub fn execute(cli: Cli) -> Outcome {
    match run_command(cli.command) {
        Ok(outcome) => outcome,
        Err(RunError::Lib(e)) => error_outcome(&e),
        Err(RunError::Io(msg)) => io_error(msg),
    }
}

enum RunError {
    Lib(Error),
    Io(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Lib(e)
    }
}

type RunResult<T> = std::result::Result<T, RunError>;

fn read_file(path: &Path) -> RunResult<String> {
    fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> RunResult<(ArrangementMatrix, Option<Vec<Complex64>>)> {
    let text = read_file(path)?;
    Ok(ArrangementMatrix::parse(&text)?)
}

fn load_complex_vector(path: &Path, expected: usize) -> RunResult<Vec<Complex64>> {
    let text = read_file(path)?;
    let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)
        .map_err(|e| RunError::Lib(Error::MalformedInput(e.to_string())))?;
    if pairs.len() != expected {
        return Err(RunError::Lib(Error::MalformedInput(format!(
            "{}: expected {expected} entries, got {}",
            path.display(),
            pairs.len()
        ))));
    }
    Ok(pairs_to_vec(&pairs))
}

fn load_complex_matrix(path: &Path, rows: usize, cols: usize) -> RunResult<DMatrix<Complex64>> {
    let text = read_file(path)?;
    let data: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text)
        .map_err(|e| RunError::Lib(Error::MalformedInput(e.to_string())))?;
    if data.len() != rows || data.iter().any(|r| r.len() != cols) {
        return Err(RunError::Lib(Error::MalformedInput(format!(
            "{}: expected a {rows} x {cols} matrix",
            path.display()
        ))));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(data[i][j][0], data[i][j][1])
    }))
}

fn parse_linear_form(coeffs: &[String], expected: usize) -> RunResult<Vec<Rat>> {
    if coeffs.len() != expected {
        return Err(RunError::Lib(Error::MalformedInput(format!(
            "linear form needs {expected} coefficients, got {}",
            coeffs.len()
        ))));
    }
    coeffs
        .iter()
        .map(|s| parse_rat(s).map_err(|e| RunError::Lib(Error::MalformedInput(e))))
        .collect()
}

fn emit(value: &Value, table: String, format: Format, out: Option<&Path>) -> RunResult<Outcome> {
    let rendered = match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(value).unwrap()),
        Format::Table => table,
    };
    if let Some(path) = out {
        fs::write(path, &rendered)
            .map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        return Ok(Outcome {
            exit_code: 0,
            output: String::new(),
        });
    }
    Ok(Outcome {
        exit_code: 0,
        output: rendered,
    })
}

fn run_command(cmd: Command) -> RunResult<Outcome> {
    match cmd {
        Command::Analyze {
            instance,
            format,
            out,
        } => {
            let (arr, _) = load_instance(&instance)?;
            cmd_analyze(&arr, format, out.as_deref())
        }
        Command::Solve {
            instance,
            seed,
            omega,
            u_file,
            a0_file,
            tol_corrector,
            tol_zero,
            tol_cluster,
            max_steps,
            gamma,
            return_boundary,
            format,
            out,
            bench,
            d,
            n,
        } => {
            let (arr, u_doc) = match (&instance, bench, d, n) {
                (Some(path), _, _, _) => load_instance(path)?,
                (None, true, Some(d), Some(n)) => (random_integer_instance(d, n, seed), None),
                _ => {
                    return Err(RunError::Lib(Error::MalformedInput(
                        "provide an instance path, or --bench with --d and --n".into(),
                    )))
                }
            };
            let mut cfg = HomotopyConfig::with_seed(seed);
            cfg.omega = omega;
            cfg.record_timings = bench;
            if let Some(v) = tol_corrector {
                cfg.tol_corrector = v;
            }
            if let Some(v) = tol_zero {
                cfg.tol_zero = v;
            }
            if let Some(v) = tol_cluster {
                cfg.tol_cluster = v;
            }
            if let Some(v) = max_steps {
                cfg.max_steps = v;
            }
            if let Some(g) = gamma {
                cfg.gamma = Some(Complex64::new(g[0], g[1]));
            }
            let u = match u_file {
                Some(path) => Some(load_complex_vector(&path, arr.ground_size())?),
                None => u_doc,
            };
            if let Some(path) = a0_file {
                cfg.a0 = Some(load_complex_matrix(&path, arr.d(), arr.ground_size())?);
            }
            let mut report = homotopy::track_all(&arr, u.as_deref(), &cfg)?;
            if !return_boundary {
                report.boundary_clusters = None;
            }
            let exit_code = solve_exit_code(&report);
            let value = serde_json::to_value(&report).unwrap();
            let mut outcome = emit(&value, render_solve_table(&report), format, out.as_deref())?;
            outcome.exit_code = exit_code;
            Ok(outcome)
        }
        Command::Chy {
            m,
            seed,
            s_file,
            format,
            out,
        } => cmd_chy(m, seed, s_file.as_deref(), format, out.as_deref()),
        Command::Hilbert {
            instance,
            q,
            h,
            h1,
            h2,
            seed,
            format,
            out,
        } => {
            let (arr, _) = load_instance(&instance)?;
            cmd_hilbert(&arr, q, h, h1, h2, seed, format, out.as_deref())
        }
        Command::Eliminant {
            instance,
            h1,
            h2,
            q,
            seed,
            format,
            out,
        } => {
            let (arr, _) = load_instance(&instance)?;
            cmd_eliminant(&arr, &h1, &h2, q, seed, format, out.as_deref())
        }
        Command::Certify {
            instance,
            report,
            grid,
            format,
            out,
        } => {
            let (arr, _) = load_instance(&instance)?;
            let text = read_file(&report)?;
            let report: SolutionReport = serde_json::from_str(&text)
                .map_err(|e| RunError::Lib(Error::MalformedInput(e.to_string())))?;
            let u = pairs_to_vec(&report.u);
            let cert = homotopy::verify_solution_set(&arr, &u, &report, grid)?;
            let value = serde_json::to_value(&cert).unwrap();
            let table = format!(
                "interior = {} (ml degree {})\nreality branch: {}\nbounded chambers: {}\n",
                cert.interior,
                cert.ml_degree,
                cert.reality_branch,
                cert.bounded_chambers
                    .map_or("n/a".to_string(), |v| v.to_string())
            );
            emit(&value, table, format, out.as_deref())
        }
    }
}

fn solve_exit_code(report: &SolutionReport) -> i32 {
    if !report.counts_check.interior_matches_ml || !report.counts_check.paths_match_reciprocal {
        return 3;
    }
    if report.path_stats.success != report.path_stats.total {
        return 2;
    }
    0
}

/// Random integer instance in the style of the timing experiments: entries
/// uniform in [-20, 20], redrawn until the matrix is a valid instance.
fn random_integer_instance(d: usize, n: usize, seed: u64) -> ArrangementMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5_c0de);
    loop {
        let l = RatMat::from_fn(d + 1, n + 1, |_, _| rat_int(rng.random_range(-20..=20)));
        if let Ok(arr) = ArrangementMatrix::from_l(l) {
            return arr;
        }
    }
}

fn cmd_analyze(arr: &ArrangementMatrix, format: Format, out: Option<&Path>) -> RunResult<Outcome> {
    let circuits = matroid::circuits(arr)?;
    let flats = matroid::flats(arr)?;
    let reciprocal = matroid::reciprocal_degree(arr)?;
    let ml = matroid::ml_degree(arr)?;
    let (verdict, witnesses) = matroid::degree_criterion(arr)?;
    let beta = matroid::beta_invariant(arr)?;
    let connected = matroid::is_connected(arr)?;
    let type_i = flats
        .iter()
        .filter(|f| f.flat_type == FlatType::TypeI)
        .count();
    let type_ii = flats
        .iter()
        .filter(|f| f.flat_type == FlatType::TypeII)
        .count();
    let value = json!({
        "d": arr.d(),
        "n": arr.n(),
        "rank": arr.d() + 1,
        "circuits": circuits.iter().map(|c| json!({
            "support": c.support,
            "alpha": c.alpha.iter().map(rat_to_string).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "flats": {
            "total": flats.len(),
            "type_i": type_i,
            "type_ii": type_ii,
        },
        "reciprocal_degree": reciprocal,
        "ml_degree": ml,
        "criterion": match verdict {
            CriterionVerdict::Equal => "equal",
            CriterionVerdict::Strict => "strict",
        },
        "witnesses": witnesses.iter().map(|f| f.support.clone()).collect::<Vec<_>>(),
        "beta_invariant": beta,
        "connected": connected,
    });
    let mut table = String::new();
    table.push_str(&format!(
        "d = {}, n = {}, rank = {}\n",
        arr.d(),
        arr.n(),
        arr.d() + 1
    ));
    table.push_str(&format!("circuits: {}\n", circuits.len()));
    for c in &circuits {
        let alpha: Vec<String> = c.alpha.iter().map(rat_to_string).collect();
        table.push_str(&format!("  {:?}  alpha = ({})\n", c.support, alpha.join(", ")));
    }
    table.push_str(&format!(
        "flats: {} total ({} type i, {} type ii)\n",
        flats.len(),
        type_i,
        type_ii
    ));
    table.push_str(&format!("reciprocal degree = {reciprocal}\n"));
    table.push_str(&format!("ml degree = {ml}\n"));
    table.push_str(&format!(
        "criterion: {}\n",
        if verdict == CriterionVerdict::Equal { "equal" } else { "strict" }
    ));
    for w in &witnesses {
        table.push_str(&format!("  type (ii) witness: {:?}\n", w.support));
    }
    table.push_str(&format!(
        "beta invariant = {beta} ({})\n",
        if connected { "connected" } else { "disconnected" }
    ));
    emit(&value, table, format, out)
}

fn render_solve_table(report: &SolutionReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "paths: {} tracked, {} succeeded\n",
        report.path_stats.total, report.path_stats.success
    ));
    s.push_str(&format!(
        "interior solutions: {} (ml degree {})\n",
        report.counts_check.interior, report.counts_check.ml_degree
    ));
    for (k, sol) in report.interior.iter().enumerate() {
        let coords: Vec<String> = sol
            .x
            .iter()
            .map(|p| format!("{:.6}{:+.6}i", p[0], p[1]))
            .collect();
        s.push_str(&format!(
            "  x[{k}] = ({})  residual {:.2e}\n",
            coords.join(", "),
            sol.residual
        ));
    }
    for cl in report.boundary() {
        s.push_str(&format!(
            "boundary: support {:?}, multiplicity {}\n",
            cl.support, cl.multiplicity
        ));
    }
    if !report.counts_check.optimal {
        s.push_str("note: run was not optimal\n");
    }
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    if let Some(t) = &report.timings {
        s.push_str(&format!(
            "timings: combinatorics {:.3}s, start {:.3}s, tracking {:.3}s, total {:.3}s\n",
            t.combinatorics_s, t.start_s, t.tracking_s, t.total_s
        ));
    }
    s
}

fn cmd_chy(
    m: usize,
    seed: u64,
    s_file: Option<&Path>,
    format: Format,
    out: Option<&Path>,
) -> RunResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = match s_file {
        Some(path) => Some(load_complex_vector(path, m * (m - 3) / 2)?),
        None => None,
    };
    let inst = chy::build_chy(m, s.as_deref(), &mut rng)?;
    let cfg = HomotopyConfig::with_seed(seed.wrapping_add(1));
    let report = homotopy::track_all(&inst.arr, Some(&inst.s), &cfg)?;
    let census = chy::boundary_census(&inst, &report)?;
    let sub_check = chy::sub_scattering_check(&inst, &report, 1e-6)?;
    let extras = chy::extra_type_two_flats(&inst)?;
    let value = json!({
        "m": m,
        "column_labels": inst.column_labels,
        "census": serde_json::to_value(&census).unwrap(),
        "sub_check": serde_json::to_value(&sub_check).unwrap(),
        "extra_type_two_flats": extras,
        "report": serde_json::to_value(&report).unwrap(),
    });
    let mut table = String::new();
    table.push_str(&format!("m = {m}: {} paths tracked\n", census.total_paths));
    table.push_str(&format!(
        "interior: {} observed / {} expected\n",
        census.interior_observed, census.interior_expected
    ));
    for s in &census.strata {
        table.push_str(&format!(
            "stratum r={} W={:?} support {:?}: {} points (expected {}), multiplicities {:?} (expected {})\n",
            s.r, s.w, s.support, s.observed_points, s.expected_points,
            s.observed_multiplicities, s.expected_multiplicity
        ));
    }
    table.push_str(&format!(
        "conjectured census {}\n",
        if census.conjecture_consistent { "matches" } else { "DEVIATES" }
    ));
    emit(&value, table, format, out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_hilbert(
    arr: &ArrangementMatrix,
    q: usize,
    h: Option<Vec<String>>,
    h1: Option<Vec<String>>,
    h2: Option<Vec<String>>,
    seed: u64,
    format: Format,
    out: Option<&Path>,
) -> RunResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = WeightOrder::random_permutation(arr.ground_size(), &mut rng);
    let hf: Vec<u64> = (0..=q)
        .map(|k| hilbert::hilbert_function_rl(arr, &omega, k))
        .collect::<Result<_, _>>()?;
    let regularity = hilbert::hilbert_regularity_rl(arr, &omega)?;
    let h_poly = match &h {
        Some(coeffs) => {
            let lin = parse_linear_form(coeffs, arr.ground_size())?;
            Some(hilbert::linear_poly(&lin))
        }
        None => None,
    };
    let mut quotient = Vec::new();
    let mut quotient_with_h = Vec::new();
    for k in 0..=q {
        quotient.push(hilbert::quotient_hilbert_function_generic(
            arr, k, None, &mut rng,
        )?);
        if let Some(hp) = &h_poly {
            quotient_with_h.push(hilbert::quotient_hilbert_function_generic(
                arr,
                k,
                Some(hp),
                &mut rng,
            )?);
        }
    }
    let mut value = json!({
        "hf": hf,
        "quotient_hf": quotient,
        "regularity": regularity,
        "omega": omega.entries(),
    });
    if !quotient_with_h.is_empty() {
        value["quotient_hf_with_h"] = json!(quotient_with_h);
    }
    let mut eliminant_text = String::new();
    if let (Some(h1), Some(h2)) = (&h1, &h2) {
        let h1 = parse_linear_form(h1, arr.ground_size())?;
        let h2 = parse_linear_form(h2, arr.ground_size())?;
        let u = hilbert::random_u_rational(arr.ground_size(), &mut rng);
        let coeffs = hilbert::eliminant(arr, &u, &h1, &h2, None, &omega, &mut rng)?;
        let cs: Vec<String> = coeffs.iter().map(rat_to_string).collect();
        value["eliminant"] = json!({
            "degree": coeffs.len() - 1,
            "coefficients": cs,
        });
        eliminant_text = format!(
            "eliminant of degree {} (ascending coefficients): [{}]\n",
            coeffs.len() - 1,
            coeffs.iter().map(rat_to_string).collect::<Vec<_>>().join(", ")
        );
    }
    let mut table = String::from("q: HF(R)  HF(R/section)");
    if h_poly.is_some() {
        table.push_str("  HF(R/(section+h))");
    }
    table.push('\n');
    for k in 0..=q {
        table.push_str(&format!("{k}: {}  {}", hf[k], quotient[k]));
        if let Some(v) = quotient_with_h.get(k) {
            table.push_str(&format!("  {v}"));
        }
        table.push('\n');
    }
    table.push_str(&format!("regularity(R) = {regularity}\n"));
    table.push_str(&eliminant_text);
    emit(&value, table, format, out)
}

fn cmd_eliminant(
    arr: &ArrangementMatrix,
    h1: &[String],
    h2: &[String],
    q: Option<usize>,
    seed: u64,
    format: Format,
    out: Option<&Path>,
) -> RunResult<Outcome> {
    let h1 = parse_linear_form(h1, arr.ground_size())?;
    let h2 = parse_linear_form(h2, arr.ground_size())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = WeightOrder::random_permutation(arr.ground_size(), &mut rng);
    let u = hilbert::random_u_rational(arr.ground_size(), &mut rng);
    let coeffs = hilbert::eliminant(arr, &u, &h1, &h2, q, &omega, &mut rng)?;
    let roots = hilbert::poly_roots(&coeffs);
    let value = json!({
        "q": q.unwrap_or(arr.d() + 1),
        "degree": coeffs.len() - 1,
        "coefficients": coeffs.iter().map(rat_to_string).collect::<Vec<_>>(),
        "roots": roots.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "u": u.iter().map(rat_to_string).collect::<Vec<_>>(),
    });
    let mut table = format!("eliminant of degree {} (ascending coefficients):\n", coeffs.len() - 1);
    let cs: Vec<String> = coeffs.iter().map(rat_to_string).collect();
    table.push_str(&format!("  [{}]\n", cs.join(", ")));
    for r in &roots {
        table.push_str(&format!("  root {:.8}{:+.8}i\n", r.re, r.im));
    }
    emit(&value, table, format, out)
}
