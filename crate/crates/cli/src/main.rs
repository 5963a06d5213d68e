//! `utdist`: command-line access to the unit Teissier toolkit.
//!
//! Exit codes: 0 success, 1 domain/parse/usage error, 2 non-convergence.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::json;

// Stdout writers that exit quietly when the reader goes away (`utdist ... | head`).
macro_rules! print {
    ($($arg:tt)*) => {
        write_stdout(format_args!($($arg)*))
    };
}

macro_rules! println {
    () => {
        write_stdout(format_args!("\n"))
    };
    ($($arg:tt)*) => {
        write_stdout(format_args!("{}\n", format_args!($($arg)*)))
    };
}

fn write_stdout(args: std::fmt::Arguments) {
    if let Err(e) = io::stdout().lock().write_fmt(args) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing to stdout: {e}");
        std::process::exit(1);
    }
}

use unit_teissier::charact::{default_grid, max_gap, verify_characterization, Side};
use unit_teissier::dataset::{parse_dataset_str, risk73, DatasetFile, RISK73_TAG};
use unit_teissier::estimate::{fit, FitResult, Method};
use unit_teissier::gof::{gof_report, pp_points};
use unit_teissier::moments::{
    l_moments, os_moment_maxima, os_variance, OrderStatIndex, MAX_ORDER_N,
};
use unit_teissier::simulate::{
    aggregate_ranks, default_estimator, render_markdown, run_study_with, write_csv, StudyConfig,
};
use unit_teissier::UnitTeissier;

#[derive(Parser)]
#[command(name = "utdist", version, about = "Unit Teissier distribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate pdf, cdf, survival, hazard or quantile at the given points.
    #[command(group(ArgGroup::new("what").required(true).args(["pdf", "cdf", "sf", "quantile", "hazard"])))]
    Dist {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        pdf: bool,
        #[arg(long)]
        cdf: bool,
        #[arg(long)]
        sf: bool,
        #[arg(long)]
        quantile: bool,
        #[arg(long)]
        hazard: bool,
        #[arg(required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Draw a seeded random sample, one value per line.
    Sample {
        #[arg(long)]
        theta: f64,
        #[arg(short = 'n', long = "size")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moments of order statistics and L-moments.
    Moments {
        #[arg(long)]
        theta: f64,
        /// Largest sample size for order-statistic moments.
        #[arg(long, default_value_t = 5)]
        order_stats: usize,
        /// Report L-moments instead of order-statistic moments.
        #[arg(long)]
        l_moments: bool,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
    /// Estimate θ from data.
    Fit {
        /// Dataset file, or `risk73` for the bundled dataset.
        #[arg(long)]
        data: String,
        /// A method name or `all`.
        #[arg(long, default_value = "MLE")]
        method: String,
        #[arg(long)]
        json: bool,
    },
    /// Goodness-of-fit statistics at a given θ.
    Gof {
        #[arg(long)]
        data: String,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        json: bool,
    },
    /// Check the truncated-moment characterization against quadrature.
    Verify {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo comparison of the estimators.
    #[command(group(ArgGroup::new("grid").required(true).args(["config", "full_grid"])))]
    Simulate {
        /// JSON study configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Ten θ values, five sample sizes, 1000 replications (slow).
        #[arg(long, alias = "paper-grid")]
        full_grid: bool,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        workers: Option<usize>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write markdown tables here.
        #[arg(long)]
        markdown: Option<PathBuf>,
    },
    /// Regenerate the order-statistic (1), L-moment (2) or real-data (12) table.
    Tables {
        #[arg(long, value_parser = ["1", "2", "12"])]
        which: String,
    },
    /// pdf, cdf, survival and hazard on a grid, as CSV.
    Curves {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 199)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability-probability plot points as CSV.
    Pp {
        #[arg(long)]
        data: String,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
    Json,
}

/// A fit that did not converge; maps to exit code 2.
#[derive(Debug)]
struct NotConverged(String);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for NotConverged {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<NotConverged>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Dist {
            theta,
            pdf,
            cdf,
            sf,
            quantile,
            hazard,
            values,
            json,
        } => {
            let d = UnitTeissier::new(theta)?;
            type Eval<'a> = Box<dyn Fn(f64) -> Result<f64> + 'a>;
            let (name, eval): (&str, Eval) = if pdf {
                ("pdf", Box::new(|x| Ok(d.pdf(x))))
            } else if cdf {
                ("cdf", Box::new(|x| Ok(d.cdf(x).value())))
            } else if sf {
                ("sf", Box::new(|x| Ok(d.sf(x))))
            } else if quantile {
                ("quantile", Box::new(|p| Ok(d.quantile(p)?)))
            } else {
                debug_assert!(hazard);
                ("hazard", Box::new(|x| Ok(d.hazard(x)?)))
            };
            let out: Vec<f64> = values.iter().map(|&v| eval(v)).collect::<Result<_>>()?;
            if json {
                let rows: Vec<_> = values
                    .iter()
                    .zip(&out)
                    .map(|(x, v)| json!({ "x": x, name: v }))
                    .collect();
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                for v in out {
                    println!("{v}");
                }
            }
        }
        Command::Sample {
            theta,
            n,
            seed,
            out,
        } => {
            let d = UnitTeissier::new(theta)?;
            let mut text = String::with_capacity(n * 20);
            for x in d.sample(n, seed) {
                text.push_str(&format!("{x}\n"));
            }
            emit(out, &text)?;
        }
        Command::Moments {
            theta,
            order_stats,
            l_moments: want_l,
            format,
        } => {
            let d = UnitTeissier::new(theta)?;
            if want_l {
                print!("{}", render_l_moments(&d, format)?);
            } else {
                if order_stats == 0 || order_stats > MAX_ORDER_N {
                    bail!("--order-stats must be in 1..={MAX_ORDER_N}");
                }
                print!("{}", render_order_stats(&d, order_stats, format)?);
            }
        }
        Command::Fit { data, method, json } => {
            let ds = load(&data)?;
            let s = ds.sample()?;
            let methods: Vec<Method> = if method.eq_ignore_ascii_case("all") {
                Method::ALL.to_vec()
            } else {
                vec![method.parse()?]
            };
            let fits: Vec<FitResult> = methods
                .iter()
                .map(|&m| fit(m, &s))
                .collect::<Result<_, _>>()?;
            let mle = fits.iter().find(|f| f.method == Method::Mle && f.converged);
            let report = match mle {
                Some(f) => Some(gof_report(&s, f.theta_hat)?),
                None => None,
            };
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "fits": fits, "gof": report }))?
                );
            } else {
                println!(
                    "{:<7}{:>12}{:>12}{:>16}  converged",
                    "method", "theta", "se", "objective"
                );
                for f in &fits {
                    let se = f
                        .std_error
                        .map(|s| format!("{s:.5}"))
                        .unwrap_or_else(|| "-".into());
                    println!(
                        "{:<7}{:>12.5}{:>12}{:>16.6e}  {}",
                        f.method.to_string(),
                        f.theta_hat,
                        se,
                        f.objective_at_opt,
                        f.converged
                    );
                }
                if let Some(r) = &report {
                    println!();
                    print!("{r}");
                }
            }
            let failed: Vec<String> = fits
                .iter()
                .filter(|f| !f.converged)
                .map(|f| format!("{} (θ̂ = {})", f.method, f.theta_hat))
                .collect();
            if !failed.is_empty() {
                return Err(
                    NotConverged(format!("did not converge: {}", failed.join(", "))).into(),
                );
            }
        }
        Command::Gof { data, theta, json } => {
            let s = load(&data)?.sample()?;
            let r = gof_report(&s, theta)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{r}");
            }
        }
        Command::Verify {
            theta,
            points,
            tol,
            json,
        } => {
            let d = UnitTeissier::new(theta)?;
            let checks = verify_characterization(&d, &default_grid(points))?;
            let gap = max_gap(&checks);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(
                        &json!({ "max_gap": gap, "tol": tol, "checks": checks })
                    )?
                );
            } else {
                println!(
                    "{:>10}{:>22}{:>22}{:>12}",
                    "x", "g*f / h*f", "quadrature", "gap"
                );
                for c in &checks {
                    let tag = match c.side {
                        Side::Lower => "lower",
                        Side::Upper => "upper",
                    };
                    println!(
                        "{:>10.5}{:>22.15}{:>22.15}{:>12.2e} {tag}",
                        c.x, c.lhs, c.rhs, c.abs_gap
                    );
                }
                println!("max gap {gap:.3e} (tolerance {tol:e})");
            }
            if gap.is_nan() || gap > tol {
                bail!("characterization gap {gap:e} exceeds {tol:e}");
            }
        }
        Command::Simulate {
            config,
            full_grid,
            replications,
            seed,
            workers,
            out,
            markdown,
        } => {
            let mut cfg = if full_grid {
                StudyConfig::full_grid()
            } else {
                let path = config.expect("clap enforces one of --config/--full-grid");
                let text = fs::read_to_string(&path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("invalid config {}", path.display()))?
            };
            if let Some(r) = replications {
                cfg.replications = r;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            let workers = workers.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            });
            let rows = run_study_with(&cfg, workers, default_estimator)?;
            let table = aggregate_ranks(&rows)?;
            let mut buf = Vec::new();
            write_csv(&rows, &table, &mut buf)?;
            emit(out, std::str::from_utf8(&buf)?)?;
            if let Some(path) = markdown {
                fs::write(&path, render_markdown(&rows, &table))
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
        }
        Command::Tables { which } => match which.as_str() {
            "1" => print!("{}", os_moment_table()?),
            "2" => print!("{}", l_moment_table()?),
            _ => print!("{}", real_data_table()?),
        },
        Command::Curves { theta, points, out } => {
            let d = UnitTeissier::new(theta)?;
            let mut text = String::from("x,pdf,cdf,sf,hazard\n");
            for j in 1..=points {
                let x = j as f64 / (points + 1) as f64;
                let h = d.hazard(x).map(|h| h.to_string()).unwrap_or_default();
                text.push_str(&format!(
                    "{x},{},{},{},{h}\n",
                    d.pdf(x),
                    d.cdf(x).value(),
                    d.sf(x)
                ));
            }
            emit(out, &text)?;
        }
        Command::Pp { data, theta, out } => {
            let s = load(&data)?.sample()?;
            let mut text = String::from("empirical,theoretical\n");
            for p in pp_points(&s, theta)? {
                text.push_str(&format!(
                    "{},{}\n",
                    p.empirical.value(),
                    p.theoretical.value()
                ));
            }
            emit(out, &text)?;
        }
    }
    Ok(())
}

fn load(data: &str) -> Result<DatasetFile> {
    if data == RISK73_TAG {
        return Ok(risk73());
    }
    let text = fs::read_to_string(data).with_context(|| format!("cannot read {data}"))?;
    parse_dataset_str(data, &text).with_context(|| format!("in {data}"))
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// (n, r, mean, second moment, variance)
type OsRow = (usize, usize, f64, f64, f64);

fn os_rows(d: &UnitTeissier, n_max: usize) -> Result<Vec<OsRow>> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for r in 1..=n {
            let m1 = os_moment_maxima(d, OrderStatIndex::new(n, r, 1)?);
            let m2 = os_moment_maxima(d, OrderStatIndex::new(n, r, 2)?);
            rows.push((n, r, m1, m2, os_variance(d, n, r)?));
        }
    }
    Ok(rows)
}

fn render_order_stats(d: &UnitTeissier, n_max: usize, format: Format) -> Result<String> {
    let rows = os_rows(d, n_max)?;
    Ok(match format {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|&(n, r, m1, m2, v)| json!({"n": n, "r": r, "mean": m1, "second": m2, "variance": v}))
                .collect();
            serde_json::to_string_pretty(&json!({"theta": d.theta(), "order_statistics": v}))?
                + "\n"
        }
        Format::Csv => {
            let mut s = String::from("n,r,mean,second,variance\n");
            for (n, r, m1, m2, v) in rows {
                s += &format!("{n},{r},{m1},{m2},{v}\n");
            }
            s
        }
        Format::Md => {
            let mut s = format!(
                "θ = {}\n\n| n | r | mean | second | variance |\n|---|---|---|---|---|\n",
                d.theta()
            );
            for (n, r, m1, m2, v) in rows {
                s += &format!("| {n} | {r} | {m1:.5} | {m2:.5} | {v:.5} |\n");
            }
            s
        }
    })
}

const L_NAMES: [&str; 7] = [
    "lambda1", "lambda2", "lambda3", "lambda4", "l_cv", "tau3", "tau4",
];

fn l_values(d: &UnitTeissier) -> [f64; 7] {
    let l = l_moments(d);
    [
        l.lambda1, l.lambda2, l.lambda3, l.lambda4, l.l_cv, l.tau3, l.tau4,
    ]
}

fn render_l_moments(d: &UnitTeissier, format: Format) -> Result<String> {
    let l = l_moments(d);
    let v = l_values(d);
    Ok(match format {
        Format::Json => {
            serde_json::to_string_pretty(&json!({"theta": d.theta(), "l_moments": l}))? + "\n"
        }
        Format::Csv => format!(
            "{}\n{}\n",
            L_NAMES.join(","),
            v.map(|x| x.to_string()).join(",")
        ),
        Format::Md => {
            let mut s = format!("θ = {}\n\n| quantity | value |\n|---|---|\n", d.theta());
            for (name, x) in L_NAMES.iter().zip(v) {
                s += &format!("| {name} | {x:.5} |\n");
            }
            s
        }
    })
}

fn os_moment_table() -> Result<String> {
    let thetas = [1.0, 2.0, 3.0, 4.0];
    let per: Vec<_> = thetas
        .iter()
        .map(|&t| os_rows(&UnitTeissier::new(t)?, 5))
        .collect::<Result<_>>()?;
    let mut s = String::from("| n | r |");
    for t in thetas {
        s += &format!(" mean θ={t} | second θ={t} | var θ={t} |");
    }
    s += &format!("\n{}|\n", "|---".repeat(2 + 3 * thetas.len()));
    for i in 0..per[0].len() {
        let (n, r, ..) = per[0][i];
        s += &format!("| {n} | {r} |");
        for rows in &per {
            let (_, _, m1, m2, v) = rows[i];
            s += &format!(" {m1:.5} | {m2:.5} | {v:.5} |");
        }
        s.push('\n');
    }
    Ok(s)
}

fn l_moment_table() -> Result<String> {
    let thetas = [1.0, 2.0, 3.0, 4.0];
    let cols: Vec<[f64; 7]> = thetas
        .iter()
        .map(|&t| Ok(l_values(&UnitTeissier::new(t)?)))
        .collect::<Result<_>>()?;
    let mut s = String::from("| |");
    for t in thetas {
        s += &format!(" θ={t} |");
    }
    s += &format!("\n{}|\n", "|---".repeat(1 + thetas.len()));
    for (i, name) in L_NAMES.iter().enumerate() {
        s += &format!("| {name} |");
        for c in &cols {
            s += &format!(" {:.5} |", c[i]);
        }
        s.push('\n');
    }
    Ok(s)
}

fn real_data_table() -> Result<String> {
    let s = risk73().sample()?;
    let f = fit(Method::Mle, &s)?;
    if !f.converged {
        return Err(NotConverged("maximum likelihood fit did not converge".into()).into());
    }
    let g = gof_report(&s, f.theta_hat)?;
    let se = f
        .std_error
        .ok_or_else(|| anyhow!("standard error unavailable"))?;
    Ok(format!(
        "| model | estimate (SE) | -loglik | AIC | CAIC | BIC | HQIC | W* | A* | KS | p-value |\n\
         |---|---|---|---|---|---|---|---|---|---|---|\n\
         | UT | {:.4} ({:.4}) | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |\n",
        f.theta_hat, se, g.neg_loglik, g.aic, g.caic, g.bic, g.hqic, g.w2, g.a2, g.ks, g.ks_pvalue
    ))
}
