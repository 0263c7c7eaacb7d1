use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;

use aniso_hardy::atomfile::AtomFile;
use aniso_hardy::config::{CheckName, ExponentSpec, QSpec};
use aniso_hardy::{builtins, config, report, run, CliError};
use aniso_hardy_core::atoms::{make_atom, AtomConfig};
use aniso_hardy_core::dilation::{comparison_constant, SigmaConstant};
use aniso_hardy_core::fourier::{sampled_spectrum, transpose_evaluator};
use aniso_hardy_core::grid::{BoundingBox, GriddedFunction};
use aniso_hardy_core::varexp::{luxemburg_norm, modular};

#[derive(Parser)]
#[command(name = "aniso-hardy", version, about = "Anisotropic variable-exponent verification toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze a dilation matrix: b, spectral bounds, sigma, comparison constant.
    DilationInfo {
        /// Builtin name or row-major comma-separated entries.
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
    /// Luxemburg norm of a structured-text 1D function.
    Luxemburg {
        /// constant:P | log-smooth:P_INF,C[,C_LOG] | step:P_LOW,P_HIGH,T
        #[arg(long)]
        exponent: String,
        /// indicator:A,B | scaled:C,A,B | bump:CENTER,HALFWIDTH
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long, default_value = "dyadic-1d")]
        matrix: String,
    },
    /// Generate an atom and store it as versioned JSON.
    AtomGen {
        /// Ball as comma-separated center coordinates followed by the level.
        #[arg(long)]
        ball: String,
        /// Number or "inf".
        #[arg(long)]
        q: String,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        exponent: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "dyadic-1d")]
        matrix: String,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fourier transform of a stored atom on a log-radial frequency grid.
    Ft {
        /// Path to an atom.json produced by atom-gen.
        #[arg(long)]
        function: PathBuf,
        /// shells:M_MIN,M_MAX,DIRECTIONS
        #[arg(long, default_value = "shells:-6,6,32")]
        freqs: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a single named check from a run config.
    Verify {
        /// thm31 | thm41 | thm42 | lemma32 | lemma34
        check: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Execute a full run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the built-in matrices, exponent families, and default grids.
    ListBuiltins,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads(threads: Option<usize>) {
    let n = threads.or_else(|| {
        std::env::var("ANISO_HARDY_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch() -> Result<bool, CliError> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::DilationInfo { matrix, epsilon } => {
            let rows = parse_matrix(&matrix)?;
            let qn = run::evaluator_from_rows(&rows, epsilon)?;
            let d = qn.dilation();
            let sigma = SigmaConstant::compute(&qn, 2048)?;
            let comparison = comparison_constant(&qn, 2000, 1001)?;
            print_json(&json!({
                "dim": d.dim(),
                "b": d.b(),
                "lambda_minus": d.lambda_minus(),
                "lambda_plus": d.lambda_plus(),
                "diagonalizable": d.is_diagonalizable(),
                "sigma": sigma.sigma,
                "comparison_constant": comparison.c,
                "r": qn.ellipsoid().r(),
            }))?;
            Ok(true)
        }
        Cmd::Luxemburg { exponent, function, tol, resolution, matrix } => {
            let rows = parse_matrix(&matrix)?;
            if rows.len() != 1 {
                return Err(CliError::Config(
                    "the luxemburg subcommand works on 1D functions; use a 1x1 matrix".into(),
                ));
            }
            let qn = Arc::new(run::evaluator_from_rows(&rows, 0.01)?);
            let spec = ExponentSpec::parse(&exponent)?;
            let p = run::build_exponent(&spec, qn)?;
            let f = parse_function_1d(&function, resolution)?;
            let norm = luxemburg_norm(&f, &p, tol)?;
            let mod_at_norm =
                if norm > 0.0 { modular(&f.map(|v| v / norm), &p) } else { 0.0 };
            print_json(&json!({
                "norm": norm,
                "modular_at_norm": mod_at_norm,
                "resolution": resolution,
                "tol": tol,
            }))?;
            Ok(true)
        }
        Cmd::AtomGen { ball, q, s, exponent, seed, matrix, epsilon, resolution, out } => {
            let rows = parse_matrix(&matrix)?;
            let dim = rows.len();
            let parts: Vec<f64> = parse_csv(&ball)?;
            if parts.len() != dim + 1 {
                return Err(CliError::Config(format!(
                    "--ball needs {dim} center coordinates plus a level, got {} values",
                    parts.len()
                )));
            }
            let center = parts[..dim].to_vec();
            let level = parts[dim] as i32;
            if (parts[dim] - level as f64).abs() > 0.0 {
                return Err(CliError::Config("ball level must be an integer".into()));
            }
            let q_spec =
                if q == "inf" { QSpec::Text("inf".into()) } else { QSpec::Number(parse_one(&q)?) };
            let qn = Arc::new(run::evaluator_from_rows(&rows, epsilon)?);
            let exp_spec = ExponentSpec::parse(&exponent)?;
            let p = run::build_exponent(&exp_spec, qn.clone())?;
            let mut cfg = AtomConfig::default_for_dim(dim);
            if let Some(res) = resolution {
                cfg.resolution = res;
            }
            let atom = make_atom(
                &qn,
                &aniso_hardy_core::dilation::DilatedBall::new(center, level),
                q_spec.value()?,
                s,
                &p,
                seed,
                &cfg,
            )?;
            AtomFile::from_atom(&atom, rows, epsilon, exp_spec, seed).save(&out)?;
            print_json(&json!({
                "written": out,
                "lq_norm": atom.lq_norm_value(),
                "size_budget": atom.size_budget(),
                "gram_condition": atom.gram_condition(),
            }))?;
            Ok(true)
        }
        Cmd::Ft { function, freqs, out } => {
            let file = AtomFile::load(&function)?;
            let (atom, rows, epsilon, _spec) = file.into_atom()?;
            let qn = run::evaluator_from_rows(&rows, epsilon)?;
            let star = transpose_evaluator(qn.dilation(), epsilon)?;
            let (m0, m1, dirs) = parse_freq_spec(&freqs)?;
            let points = aniso_hardy_core::fourier::log_radial_grid(&star, m0, m1, dirs, &[1.2]);
            let sample = sampled_spectrum(atom.profile(), &points);
            write_ft_csv(&out, &sample, &star)?;
            print_json(&json!({
                "written": out,
                "points": sample.points.len(),
                "quad_tol": sample.quad_tol,
            }))?;
            Ok(true)
        }
        Cmd::Verify { check, config: path, out, threads } => {
            configure_threads(threads);
            let which = CheckName::parse(&check)?;
            if !matches!(
                which,
                CheckName::Thm31
                    | CheckName::Thm41
                    | CheckName::Thm42
                    | CheckName::Lemma32
                    | CheckName::Lemma34
            ) {
                return Err(CliError::Config(format!(
                    "verify supports thm31|thm41|thm42|lemma32|lemma34, got '{check}'"
                )));
            }
            let bytes = std::fs::read(&path)?;
            let mut cfg = config::parse_config(&bytes)?;
            cfg.checks = vec![which];
            config::validate(&cfg)?;
            let report = run_with_out(&cfg, &bytes, out)?;
            print_report(&report)?;
            Ok(report.passed)
        }
        Cmd::Run { config: path, threads, out } => {
            configure_threads(threads);
            let bytes = std::fs::read(&path)?;
            let cfg = config::parse_config(&bytes)?;
            let report = run_with_out(&cfg, &bytes, out)?;
            print_report(&report)?;
            Ok(report.passed)
        }
        Cmd::ListBuiltins => {
            print_json(&builtins::catalog())?;
            Ok(true)
        }
    }
}

/// `--out` accepts either a directory (report.json plus CSV companions are
/// written inside) or a `.json` path (the report lands there, companions
/// beside it).
fn run_with_out(
    cfg: &aniso_hardy::config::RunConfig,
    bytes: &[u8],
    out: Option<PathBuf>,
) -> Result<aniso_hardy::report::Report, CliError> {
    match out {
        None => run::run(cfg, bytes, None),
        Some(p) if p.extension().and_then(|e| e.to_str()) == Some("json") => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let report = run::run(cfg, bytes, Some(&dir))?;
            let default = dir.join("report.json");
            if default != p {
                std::fs::rename(&default, &p)?;
            }
            Ok(report)
        }
        Some(dir) => run::run(cfg, bytes, Some(&dir)),
    }
}

fn print_json(value: &serde_json::Value) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn print_report(report: &report::Report) -> Result<(), CliError> {
    let bytes = report.to_bytes()?;
    print!("{}", String::from_utf8_lossy(&bytes));
    Ok(())
}

fn parse_csv(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad number '{t}'")))
        })
        .collect()
}

fn parse_one(text: &str) -> Result<f64, CliError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("bad number '{text}'")))
}

/// Builtin name, or row-major comma-separated entries of a square matrix.
fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    if let Some(rows) = builtins::matrix_rows(text) {
        return Ok(rows);
    }
    let flat = parse_csv(text)?;
    let n = (flat.len() as f64).sqrt() as usize;
    if n * n != flat.len() || n == 0 {
        return Err(CliError::Config(format!(
            "matrix needs a square number of entries, got {}",
            flat.len()
        )));
    }
    Ok(flat.chunks(n).map(|c| c.to_vec()).collect())
}

/// indicator:A,B | scaled:C,A,B | bump:CENTER,HALFWIDTH on a grid of the
/// given resolution.
fn parse_function_1d(text: &str, resolution: usize) -> Result<GriddedFunction, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("function spec '{text}' missing ':'")))?;
    let nums = parse_csv(rest)?;
    match (kind, nums.as_slice()) {
        ("indicator", [a, b]) if a < b => Ok(GriddedFunction::from_fn(
            BoundingBox::new(vec![*a], vec![*b])?,
            resolution,
            |_| 1.0,
        )),
        ("scaled", [c, a, b]) if a < b => {
            let c = *c;
            Ok(GriddedFunction::from_fn(
                BoundingBox::new(vec![*a], vec![*b])?,
                resolution,
                move |_| c,
            ))
        }
        ("bump", [center, halfwidth]) if *halfwidth > 0.0 => {
            let (center, halfwidth) = (*center, *halfwidth);
            Ok(GriddedFunction::from_fn(
                BoundingBox::new(vec![center - halfwidth], vec![center + halfwidth])?,
                resolution,
                move |x| {
                    let t = ((x[0] - center) / halfwidth).powi(2);
                    if t < 1.0 {
                        (-1.0 / (1.0 - t)).exp()
                    } else {
                        0.0
                    }
                },
            ))
        }
        _ => Err(CliError::Config(format!("unrecognized function spec '{text}'"))),
    }
}

/// shells:M_MIN,M_MAX,DIRECTIONS
fn parse_freq_spec(text: &str) -> Result<(i32, i32, usize), CliError> {
    let rest = text
        .strip_prefix("shells:")
        .ok_or_else(|| CliError::Config(format!("freq spec '{text}' must start with shells:")))?;
    let nums = parse_csv(rest)?;
    match nums.as_slice() {
        [m0, m1, dirs] if m0 < m1 && *dirs >= 1.0 => {
            Ok((*m0 as i32, *m1 as i32, *dirs as usize))
        }
        _ => Err(CliError::Config(format!("bad freq spec '{text}'"))),
    }
}

fn write_ft_csv(
    path: &PathBuf,
    sample: &aniso_hardy_core::fourier::SpectrumSample,
    star: &aniso_hardy_core::dilation::QuasiNormEvaluator,
) -> Result<(), CliError> {
    use std::io::Write;
    let mut file = std::fs::File::create(path)?;
    let dim = sample.points.first().map(|p| p.len()).unwrap_or(0);
    let mut header: Vec<String> = (0..dim).map(|a| format!("xi_{a}")).collect();
    header.push("re".into());
    header.push("im".into());
    header.push("rho_astar".into());
    writeln!(file, "{}", header.join(","))?;
    for (xi, v) in sample.points.iter().zip(&sample.values) {
        let mut row: Vec<String> = xi.iter().map(|c| format!("{c:.17e}")).collect();
        row.push(format!("{:.17e}", v.re));
        row.push(format!("{:.17e}", v.im));
        row.push(format!("{:.17e}", star.value(xi)));
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(())
}
