use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use pdmosc::limit::{log_grid, sweep};
use pdmosc::oracle::{compare_spectrum, compare_spectrum_to, DEFAULT_POINTS};
use pdmosc::repalg::{lowest_weight_candidates, rep_coefficients};
use pdmosc::spectrum::{energy, full_line_energy, parameter_echo, tabulate_csv};
use pdmosc::verify::{run_all, DEFAULT_GRID_N};
use pdmosc::{DerivedParams, ModelParams, Parity, SectorLabel};

#[derive(Parser, Debug)]
#[command(
    name = "pdmosc",
    version,
    about = "Harmonic oscillator with mass (1 + alpha r^2)^-2: spectra, wavefunctions, algebra checks",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energies E_n (and oracle eigenvalues with --oracle).
    Spectrum(Common),
    /// Closed-form psi_n tabulated on a uniform grid.
    Wavefunction(Common),
    /// Runs every verification suite and prints a JSON report; exit code 1 on failure.
    Verify(Common),
    /// Constant-mass limit sweep over a log grid in alpha.
    Limit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-6)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        alpha_max: f64,
        #[arg(long, default_value_t = 2)]
        per_decade: usize,
    },
    /// Lowest weights and coefficient tables of the quadratic-algebra irreps.
    Irrep(Common),
    /// Finite-difference oracle against the closed forms (Richardson-extrapolated).
    OracleCompare(Common),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    /// radial:d,l | line:even | line:odd
    #[arg(long)]
    sector: Option<SectorLabel>,
    #[arg(long)]
    nmax: Option<u32>,
    /// Grid points (per half line).
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    rmax: Option<f64>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add finite-difference oracle eigenvalues (spectrum).
    #[arg(long)]
    oracle: bool,
    /// JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// JSON file with model parameters and run settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Keys accepted in a `--config` file: the model parameters plus run settings.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    omega: Option<f64>,
    sector: Option<SectorLabel>,
    nmax: Option<u32>,
    grid_n: Option<usize>,
    rmax: Option<f64>,
}

struct Run {
    params: ModelParams,
    nmax: Option<u32>,
    grid_n: Option<usize>,
    rmax: Option<f64>,
    out: Option<PathBuf>,
    oracle: bool,
    json: bool,
}

impl Run {
    fn dp(&self) -> DerivedParams {
        self.params.derive()
    }
}

fn resolve(c: &Common) -> Result<Run> {
    let file = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<FileConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let sector = c.sector.or(file.sector).unwrap_or(SectorLabel::Radial { d: 3, l: 0 });
    let params = ModelParams::new(
        c.alpha.or(file.alpha).unwrap_or(3.0),
        c.omega.or(file.omega).unwrap_or(4.0),
        sector,
    )?;
    let grid_n = c.grid_n.or(file.grid_n);
    if grid_n.is_some_and(|n| n < 11) {
        bail!("--grid-n must be at least 11");
    }
    let rmax = c.rmax.or(file.rmax);
    if rmax.is_some_and(|r| !(r.is_finite() && r > 0.0)) {
        bail!("--rmax must be finite and > 0");
    }
    Ok(Run {
        params,
        nmax: c.nmax.or(file.nmax),
        grid_n,
        rmax,
        out: c.out.clone(),
        oracle: c.oracle,
        json: c.json,
    })
}

fn emit(run: &Run, text: &str) -> Result<()> {
    match &run.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Line sectors list the full-line tower, both parities interleaved.
fn spectrum(run: &Run) -> Result<String> {
    let dp = run.dp();
    let nmax = run.nmax.unwrap_or(3);
    let points = run.grid_n.unwrap_or(DEFAULT_POINTS);
    let rows: Vec<(u32, f64)> = match dp.sector {
        SectorLabel::Radial { .. } => (0..=nmax).map(|n| (n, energy(&dp, n))).collect(),
        SectorLabel::Line { .. } => (0..=nmax).map(|n| (n, full_line_energy(&dp, n))).collect(),
    };
    let oracle: Option<Vec<f64>> = if run.oracle {
        Some(match dp.sector {
            SectorLabel::Radial { .. } => compare_spectrum(&dp, nmax, points)?
                .rows
                .iter()
                .map(|r| r.e_extrap)
                .collect(),
            SectorLabel::Line { .. } => {
                let tower = |parity: Parity, count: u32| -> Result<Vec<f64>> {
                    let d = dp.with_sector(SectorLabel::Line { parity })?;
                    Ok(compare_spectrum(&d, count, points)?
                        .rows
                        .iter()
                        .map(|r| r.e_extrap)
                        .collect())
                };
                let even = tower(Parity::Even, nmax / 2)?;
                let odd = tower(Parity::Odd, nmax.saturating_sub(1) / 2)?;
                (0..=nmax as usize)
                    .map(|n| if n % 2 == 0 { even[n / 2] } else { odd[n / 2] })
                    .collect()
            }
        })
    } else {
        None
    };
    if run.json {
        let rows: Vec<serde_json::Value> = rows
            .iter()
            .enumerate()
            .map(|(i, (n, e))| {
                let mut v = serde_json::json!({ "n": n, "E_closed": e });
                if let Some(o) = &oracle {
                    v["E_oracle"] = serde_json::json!(o[i]);
                }
                v
            })
            .collect();
        return json(&serde_json::json!({ "params": run.params, "rows": rows }));
    }
    let mut out = String::new();
    writeln!(out, "{}", parameter_echo(&dp))?;
    writeln!(out, "n,E_closed{}", if oracle.is_some() { ",E_oracle" } else { "" })?;
    for (i, (n, e)) in rows.iter().enumerate() {
        write!(out, "{n},{e:.16e}")?;
        if let Some(o) = &oracle {
            write!(out, ",{:.16e}", o[i])?;
        }
        out.push('\n');
    }
    Ok(out)
}

fn wavefunction(run: &Run) -> Result<String> {
    let dp = run.dp();
    let nmax = run.nmax.unwrap_or(3);
    let count = run.grid_n.unwrap_or(201);
    let r_max = run.rmax.unwrap_or(5.0 * dp.length_scale());
    let lo = if dp.sector.is_line() { -r_max } else { 0.0 };
    let points: Vec<f64> = (0..count)
        .map(|i| lo + (r_max - lo) * i as f64 / (count - 1) as f64)
        .collect();
    let ns: Vec<u32> = (0..=nmax).collect();
    Ok(tabulate_csv(&dp, &ns, &points))
}

fn limit(run: &Run, alpha_min: f64, alpha_max: f64, per_decade: usize) -> Result<String> {
    let alphas = log_grid(alpha_min, alpha_max, per_decade)?;
    let sw = sweep(run.params.omega, run.params.sector, &alphas, run.nmax.unwrap_or(4))?;
    if run.json {
        return json(&serde_json::json!({ "sweep": sw, "slopes": sw.slopes() }));
    }
    Ok(sw.to_csv())
}

fn irrep(run: &Run) -> Result<String> {
    let dp = run.dp();
    let nmax = run.nmax.unwrap_or(6);
    let candidates = lowest_weight_candidates(&dp, nmax.max(1));
    let reps = rep_coefficients(&dp, nmax)?;
    if run.json {
        return json(&serde_json::json!({
            "params": run.params,
            "lowest_weight_candidates": candidates,
            "irreps": reps,
        }));
    }
    let mut out = String::new();
    writeln!(out, "{}", parameter_echo(&dp))?;
    for c in &candidates {
        writeln!(
            out,
            "# lowest weight p0={:.16e},L_branch={:.16e},near_degenerate={}",
            c.p0, c.l_branch, c.near_degenerate
        )?;
    }
    writeln!(out, "p0,n,lambda,a_sq,a,b,g,tau")?;
    for r in &reps {
        for n in 0..r.lambda.len() {
            writeln!(
                out,
                "{:.16e},{n},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.p0, r.lambda[n], r.a_sq[n], r.a[n], r.b[n], r.g[n], r.tau[n]
            )?;
        }
    }
    Ok(out)
}

fn oracle_compare(run: &Run) -> Result<String> {
    let dp = run.dp();
    let nmax = run.nmax.unwrap_or(2);
    let points = run.grid_n.unwrap_or(DEFAULT_POINTS);
    let cmp = match run.rmax {
        Some(r) => compare_spectrum_to(&dp, nmax, points, r)?,
        None => compare_spectrum(&dp, nmax, points)?,
    };
    if run.json {
        return json(&serde_json::json!({ "params": run.params, "comparison": cmp }));
    }
    Ok(cmp.to_csv())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: &Command) -> Result<ExitCode> {
    let text = match command {
        Command::Verify(c) => {
            let run = resolve(c)?;
            let report = run_all(&run.params, run.grid_n.unwrap_or(DEFAULT_GRID_N));
            for s in &report.suites {
                let failed = s.checks.iter().filter(|c| !c.pass).count();
                eprintln!(
                    "{:<16} {} ({failed} of {} failed)",
                    s.suite,
                    if s.pass { "PASS" } else { "FAIL" },
                    s.checks.len()
                );
            }
            emit(&run, &json(&report)?)?;
            return Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        Command::Spectrum(c) => {
            let run = resolve(c)?;
            (spectrum(&run)?, run)
        }
        Command::Wavefunction(c) => {
            let run = resolve(c)?;
            (wavefunction(&run)?, run)
        }
        Command::Limit {
            common,
            alpha_min,
            alpha_max,
            per_decade,
        } => {
            let run = resolve(common)?;
            (limit(&run, *alpha_min, *alpha_max, *per_decade)?, run)
        }
        Command::Irrep(c) => {
            let run = resolve(c)?;
            (irrep(&run)?, run)
        }
        Command::OracleCompare(c) => {
            let run = resolve(c)?;
            (oracle_compare(&run)?, run)
        }
    };
    let (text, run) = text;
    emit(&run, &text)?;
    Ok(ExitCode::SUCCESS)
}
