//! Command-line surface: `certify`, `oracle`, `sweep`, and `bench`.
//!
//! Exit codes: 0 success, 1 usage, 2 input (scene parse / IO), 3
//! computation failure. Reports go to stdout (human table by default,
//! CSV with `--csv`), diagnostics to stderr.

use crate::certify::{self, Method};
use crate::oracle;
use crate::scene::{self, Scene};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "riskcert",
    about = "Certified upper bounds on robot-obstacle collision probability under Gaussian position uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    #[value(name = "one-shot")]
    OneShot,
    #[value(name = "two-shot")]
    TwoShot,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::OneShot => Method::OneShot,
            MethodArg::TwoShot => Method::TwoShot,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Emit CSV instead of a human-readable table
    #[arg(long)]
    csv: bool,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify per-obstacle and scene collision probability bounds
    Certify {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_enum, default_value = "two-shot")]
        method: MethodArg,
        /// Bisection tolerance on epsilon
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimate of the true per-obstacle collision probability
    Oracle {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Covariance-scaling sweep comparing certified bounds to the MC truth
    Sweep {
        #[arg(long)]
        scene: PathBuf,
        /// Comma-separated covariance scale factors
        #[arg(long, default_value = "0.25,0.5,1,2,4")]
        alphas: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ring-scene timing benchmark over link/obstacle/tolerance ranges
    Bench {
        /// Link counts, as N or A..B (inclusive)
        #[arg(long, default_value = "4")]
        links: String,
        /// Obstacle counts, as N or A..B (inclusive)
        #[arg(long, default_value = "1")]
        obstacles: String,
        /// Tolerances (repeatable)
        #[arg(long, default_values_t = [1e-6])]
        tol: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        repeat: u64,
        #[arg(long, value_enum, default_value = "two-shot")]
        method: MethodArg,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Mean/median per-obstacle query time; the acceptance suite asserts on
/// the median, the CSV reports the mean.
pub struct BenchStats {
    pub mean_micros_per_obstacle: f64,
    pub median_micros_per_obstacle: f64,
}

/// Times `repeat` whole-scene certifications of a generated ring scene.
pub fn bench_ring(
    n_links: usize,
    n_obstacles: usize,
    tol: f64,
    repeat: u64,
    method: Method,
) -> Result<BenchStats, certify::CertifyError> {
    let scene = scene::gen_multi_ring_scene(n_links, n_obstacles, 1.2);
    let links = scene.posed_links();
    let mut per_obstacle_micros: Vec<f64> = Vec::with_capacity(repeat as usize);
    for _ in 0..repeat {
        let t0 = Instant::now();
        for o in &scene.obstacles {
            match method {
                Method::OneShot => {
                    certify::certify_one_shot(&links, &o.obstacle, tol)?;
                }
                _ => {
                    certify::certify_two_shot(&links, &o.obstacle, tol)?;
                }
            }
        }
        per_obstacle_micros.push(t0.elapsed().as_secs_f64() * 1e6 / n_obstacles as f64);
    }
    per_obstacle_micros.sort_by(f64::total_cmp);
    let mean = per_obstacle_micros.iter().sum::<f64>() / per_obstacle_micros.len() as f64;
    let median = per_obstacle_micros[per_obstacle_micros.len() / 2];
    Ok(BenchStats {
        mean_micros_per_obstacle: mean,
        median_micros_per_obstacle: median,
    })
}

fn parse_range(text: &str) -> Result<Vec<usize>, String> {
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| format!("bad range '{text}'"))?;
        let b: usize = b.trim().parse().map_err(|_| format!("bad range '{text}'"))?;
        if a == 0 || b < a {
            return Err(format!("bad range '{text}'"));
        }
        Ok((a..=b).collect())
    } else {
        let n: usize = text.trim().parse().map_err(|_| format!("bad count '{text}'"))?;
        if n == 0 {
            return Err(format!("bad count '{text}'"));
        }
        Ok(vec![n])
    }
}

fn parse_alphas(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let a: f64 = s.trim().parse().map_err(|_| format!("bad alpha '{s}'"))?;
            if !a.is_finite() || a <= 0.0 {
                return Err(format!("alpha must be > 0, got '{s}'"));
            }
            Ok(a)
        })
        .collect()
}

fn load_scene(path: &Path) -> Result<Scene, (i32, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    scene::parse_scene(&text).map_err(|e| (EXIT_INPUT, e.to_string()))
}

fn emit(output: &OutputArgs, body: &str) -> Result<(), (i32, String)> {
    match &output.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| (EXIT_INPUT, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn certify_report(scene: &Scene, report: &certify::RiskReport, csv: bool) -> String {
    let mut s = String::new();
    if csv {
        s.push_str("obstacle,method,eps,eps1,eps2,eps_lo,eps_hi,saturated,checks,micros\n");
        for (o, b) in scene.obstacles.iter().zip(&report.per_obstacle) {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                o.name,
                b.method.as_str(),
                b.epsilon,
                opt(b.eps1),
                opt(b.eps2),
                b.eps_lower,
                b.eps_upper,
                b.saturated_low,
                b.collision_checks,
                b.elapsed.as_micros()
            );
        }
    } else {
        let _ = writeln!(
            s,
            "{:<16} {:<18} {:>12} {:>12} {:>12} {:>10} {:>7} {:>9}",
            "obstacle", "method", "eps", "eps1", "eps2", "saturated", "checks", "micros"
        );
        for (o, b) in scene.obstacles.iter().zip(&report.per_obstacle) {
            let _ = writeln!(
                s,
                "{:<16} {:<18} {:>12.6e} {:>12} {:>12} {:>10} {:>7} {:>9}",
                o.name,
                b.method.as_str(),
                b.epsilon,
                b.eps1.map(|x| format!("{x:.6e}")).unwrap_or_default(),
                b.eps2.map(|x| format!("{x:.6e}")).unwrap_or_default(),
                b.saturated_low,
                b.collision_checks,
                b.elapsed.as_micros()
            );
        }
        let _ = writeln!(s, "scene bound (Boole): {:.6e}", report.scene_bound);
    }
    s
}

fn run_certify(
    scene_path: &Path,
    method: Method,
    tol: f64,
    output: &OutputArgs,
) -> Result<(), (i32, String)> {
    let scene = load_scene(scene_path)?;
    let report =
        certify::certify_scene(&scene, method, tol).map_err(|e| (EXIT_COMPUTE, e.to_string()))?;
    emit(output, &certify_report(&scene, &report, output.csv))
}

fn run_oracle(
    scene_path: &Path,
    samples: u64,
    seed: u64,
    output: &OutputArgs,
) -> Result<(), (i32, String)> {
    if samples == 0 {
        return Err((EXIT_USAGE, "samples must be >= 1".to_string()));
    }
    let scene = load_scene(scene_path)?;
    let links = scene.posed_links();
    let mut s = String::new();
    if output.csv {
        s.push_str("obstacle,estimate,ci3,samples,seed\n");
    } else {
        let _ = writeln!(
            s,
            "{:<16} {:>12} {:>12} {:>9} {:>6}",
            "obstacle", "estimate", "ci3", "samples", "seed"
        );
    }
    for o in &scene.obstacles {
        let e = oracle::mc_collision_probability(&links, &o.obstacle, samples, seed)
            .map_err(|e| (EXIT_COMPUTE, e.to_string()))?;
        if output.csv {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                o.name, e.estimate, e.ci_half_width_3sigma, e.samples, e.seed
            );
        } else {
            let _ = writeln!(
                s,
                "{:<16} {:>12.6e} {:>12.3e} {:>9} {:>6}",
                o.name, e.estimate, e.ci_half_width_3sigma, e.samples, e.seed
            );
        }
    }
    emit(output, &s)
}

fn run_sweep(
    scene_path: &Path,
    alphas: &[f64],
    tol: f64,
    samples: u64,
    seed: u64,
    output: &OutputArgs,
) -> Result<(), (i32, String)> {
    if samples == 0 {
        return Err((EXIT_USAGE, "samples must be >= 1".to_string()));
    }
    let base = load_scene(scene_path)?;
    let mut s = String::new();
    s.push_str("alpha,obstacle,eps_one_shot,eps_two_shot,eps_mc,rel_err_one,rel_err_two\n");
    for &alpha in alphas {
        let scene = scene::scale_covariances(&base, alpha);
        let links = scene.posed_links();
        let one = certify::certify_scene(&scene, Method::OneShot, tol)
            .map_err(|e| (EXIT_COMPUTE, e.to_string()))?;
        let two = certify::certify_scene(&scene, Method::TwoShot, tol)
            .map_err(|e| (EXIT_COMPUTE, e.to_string()))?;
        for (i, o) in scene.obstacles.iter().enumerate() {
            let mc = oracle::mc_collision_probability(&links, &o.obstacle, samples, seed)
                .map_err(|e| (EXIT_COMPUTE, e.to_string()))?;
            let e1 = one.per_obstacle[i].epsilon;
            let e2 = two.per_obstacle[i].epsilon;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                alpha,
                o.name,
                e1,
                e2,
                mc.estimate,
                e1 / mc.estimate - 1.0,
                e2 / mc.estimate - 1.0
            );
        }
    }
    emit(output, &s)
}

#[allow(clippy::too_many_arguments)]
fn run_bench(
    links: &str,
    obstacles: &str,
    tols: &[f64],
    repeat: u64,
    method: Method,
    output: &OutputArgs,
) -> Result<(), (i32, String)> {
    if repeat == 0 {
        return Err((EXIT_USAGE, "repeat must be >= 1".to_string()));
    }
    let link_counts = parse_range(links).map_err(|e| (EXIT_USAGE, e))?;
    let obstacle_counts = parse_range(obstacles).map_err(|e| (EXIT_USAGE, e))?;
    let mut s = String::new();
    s.push_str("links,obstacles,tol,mean_micros_per_obstacle,method\n");
    for &nl in &link_counts {
        for &no in &obstacle_counts {
            for &tol in tols {
                let stats = bench_ring(nl, no, tol, repeat, method)
                    .map_err(|e| (EXIT_COMPUTE, e.to_string()))?;
                let _ = writeln!(
                    s,
                    "{},{},{},{:.3},{}",
                    nl,
                    no,
                    tol,
                    stats.mean_micros_per_obstacle,
                    match method {
                        Method::OneShot => "one-shot",
                        _ => "two-shot",
                    }
                );
            }
        }
    }
    emit(output, &s)
}

/// Parses arguments and runs a command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::Certify {
            scene,
            method,
            tol,
            output,
        } => {
            if !tol.is_finite() || *tol <= 0.0 || *tol > 0.5 {
                Err((EXIT_USAGE, format!("tol must lie in (0, 0.5], got {tol}")))
            } else {
                run_certify(scene, (*method).into(), *tol, output)
            }
        }
        Command::Oracle {
            scene,
            samples,
            seed,
            output,
        } => run_oracle(scene, *samples, *seed, output),
        Command::Sweep {
            scene,
            alphas,
            tol,
            samples,
            seed,
            output,
        } => match parse_alphas(alphas) {
            Ok(a) => run_sweep(scene, &a, *tol, *samples, *seed, output),
            Err(e) => Err((EXIT_USAGE, e)),
        },
        Command::Bench {
            links,
            obstacles,
            tol,
            repeat,
            method,
            output,
        } => run_bench(links, obstacles, tol, *repeat, (*method).into(), output),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err((code, message)) => {
            eprintln!("error: {message}");
            code
        }
    }
}
