//! `ellsq` — moments, free cumulants, densities and Monte Carlo spectra of
//! squares of elliptic random matrices, from the command line.
//!
//! CSV output uses '.' decimals, LF line endings and always carries a header
//! row. JSON integers that may exceed 53 bits are emitted as decimal strings.
//! `ELLIPTIC_THREADS` caps the worker count (0 or unset = automatic).

mod svg;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;

use ellsq::chords::{self, Coloring};
use ellsq::moments::build_uv;
use ellsq::narayana::check_identities;
use ellsq::ncpart;
use ellsq::poly::IntPoly;
use ellsq::spectral;
use ellsq::verify::{run_all, VerifyOptions};
use ellsq::{mc, Result as EllsqResult};

#[derive(Parser)]
#[command(name = "ellsq", version, about = "spectral statistics of squares of elliptic random matrices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColoringArg {
    U,
    V,
}

#[derive(Clone, Copy, ValueEnum)]
enum PartitionType {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    F,
    G,
}

#[derive(Subcommand)]
enum Cmd {
    /// Moment polynomials M_0..M_k (or their values at a given rho)
    Moments {
        /// Largest moment index to emit
        #[arg(long)]
        k: usize,
        /// Evaluate at this correlation instead of printing coefficients
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Even free cumulants c_2..c_2n via moment inversion
    Cumulants {
        /// Largest half-order: emits c_2, c_4, ..., c_2n
        #[arg(long)]
        n: usize,
        /// Evaluate at this correlation instead of printing coefficients
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Exact Narayana-family identity suite up to order n
    Identities {
        #[arg(long)]
        n: usize,
    },
    /// Weighted planar chord diagram partition functions
    Diagrams {
        /// Half the number of vertices
        #[arg(long = "half-size")]
        half_size: usize,
        #[arg(long, value_enum)]
        coloring: ColoringArg,
        /// Restrict to atomic diagrams (u coloring, even half-size)
        #[arg(long)]
        atomic: bool,
    },
    /// Non-crossing partition counts and statistics
    Ncpart {
        #[arg(long = "type", value_enum)]
        kind: PartitionType,
        #[arg(long)]
        n: usize,
        /// Include block-statistics histograms
        #[arg(long)]
        stats: bool,
    },
    /// Spectral density on a grid, by Cauchy-transform inversion
    Density {
        #[arg(long)]
        rho: f64,
        #[arg(long, value_enum)]
        dist: DistArg,
        #[arg(long)]
        xmin: f64,
        #[arg(long)]
        xmax: f64,
        #[arg(long)]
        points: usize,
        /// Imaginary offset for the Stieltjes inversion
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Also write a line-plot SVG to this path
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Monte Carlo spectra of W = X^2 X*^2 / N^2; writes three CSV files
    Simulate {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Largest spectral moment in moments.csv
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        /// Histogram bin count
        #[arg(long, default_value_t = 60)]
        bins: usize,
        /// Output directory for the CSV files
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Variance of the diagonal entries
        #[arg(long = "diag-variance", default_value_t = 1.0)]
        diag_variance: f64,
    },
    /// Run the verification suite; exit code counts failed checks
    Verify {
        /// Skip Monte Carlo checks that need matrices of size >= 256
        #[arg(long, conflicts_with = "full")]
        fast: bool,
        /// Run everything (the default)
        #[arg(long)]
        full: bool,
        /// Run only these check ids (comma separated)
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

fn main() {
    ellsq::init_thread_pool_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.cmd {
        Cmd::Moments { k, rho, format } => moments_cmd(k, rho, format),
        Cmd::Cumulants { n, rho, format } => cumulants_cmd(n, rho, format),
        Cmd::Identities { n } => identities_cmd(n),
        Cmd::Diagrams {
            half_size,
            coloring,
            atomic,
        } => diagrams_cmd(half_size, coloring, atomic),
        Cmd::Ncpart { kind, n, stats } => ncpart_cmd(kind, n, stats),
        Cmd::Density {
            rho,
            dist,
            xmin,
            xmax,
            points,
            eps,
            svg,
        } => density_cmd(rho, dist, xmin, xmax, points, eps, svg),
        Cmd::Simulate {
            size,
            rho,
            trials,
            seed,
            kmax,
            bins,
            out,
            diag_variance,
        } => simulate_cmd(size, rho, trials, seed, kmax, bins, out, diag_variance),
        Cmd::Verify { fast, full: _, only } => verify_cmd(fast, only),
    }
}

fn poly_json(p: &IntPoly) -> serde_json::Value {
    serde_json::json!({ "coeffs": p.coeff_strings() })
}

fn moments_cmd(k: usize, rho: Option<f64>, format: Format) -> anyhow::Result<i32> {
    let table = build_uv(2 * k);
    let polys: EllsqResult<Vec<&IntPoly>> = (0..=k).map(|i| table.moment_polynomial(i)).collect();
    let polys = polys?;
    let out = std::io::stdout();
    let mut out = out.lock();
    match (rho, format) {
        (Some(r), Format::Csv) => {
            writeln!(out, "k,value")?;
            for (i, p) in polys.iter().enumerate() {
                writeln!(out, "{i},{}", p.eval_f64(r))?;
            }
        }
        (Some(r), Format::Json) => {
            let rows: Vec<_> = polys
                .iter()
                .enumerate()
                .map(|(i, p)| serde_json::json!({ "k": i, "value": p.eval_f64(r) }))
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        }
        (None, Format::Csv) => {
            let width = 2 * k + 1;
            let header: Vec<String> = (0..width).map(|i| format!("coeff_{i}")).collect();
            writeln!(out, "k,{}", header.join(","))?;
            for (i, p) in polys.iter().enumerate() {
                let coeffs: Vec<String> = (0..width).map(|j| p.coeff(j).to_string()).collect();
                writeln!(out, "{i},{}", coeffs.join(","))?;
            }
        }
        (None, Format::Json) => {
            let rows: Vec<_> = polys
                .iter()
                .enumerate()
                .map(|(i, p)| serde_json::json!({ "k": i, "coeffs": p.coeff_strings() }))
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        }
    }
    Ok(0)
}

fn cumulants_cmd(n: usize, rho: Option<f64>, format: Format) -> anyhow::Result<i32> {
    if n == 0 || n > 32 {
        bail!("--n must be in 1..=32");
    }
    let table = build_uv(2 * n);
    let mut momseq = Vec::with_capacity(2 * n);
    for order in 1..=2 * n {
        momseq.push(if order % 2 == 0 {
            table.moment_polynomial(order / 2)?.clone()
        } else {
            IntPoly::zero()
        });
    }
    let cums = ncpart::cumulants_from_moments(&momseq, 2 * n)?;
    let even: Vec<(usize, &IntPoly)> = (1..=n).map(|i| (2 * i, &cums[2 * i - 1])).collect();
    let out = std::io::stdout();
    let mut out = out.lock();
    match (rho, format) {
        (Some(r), Format::Json) => {
            let rows: Vec<_> = even
                .iter()
                .map(|(o, p)| serde_json::json!({ "order": o, "value": p.eval_f64(r) }))
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        }
        (None, Format::Json) => {
            let rows: Vec<_> = even
                .iter()
                .map(|(o, p)| serde_json::json!({ "order": o, "coeffs": p.coeff_strings() }))
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        }
        (Some(r), Format::Csv) => {
            writeln!(out, "order,value")?;
            for (o, p) in even {
                writeln!(out, "{o},{}", p.eval_f64(r))?;
            }
        }
        (None, Format::Csv) => {
            let width = 2 * n + 1;
            let header: Vec<String> = (0..width).map(|i| format!("coeff_{i}")).collect();
            writeln!(out, "order,{}", header.join(","))?;
            for (o, p) in even {
                let coeffs: Vec<String> = (0..width).map(|j| p.coeff(j).to_string()).collect();
                writeln!(out, "{o},{}", coeffs.join(","))?;
            }
        }
    }
    Ok(0)
}

fn identities_cmd(n: usize) -> anyhow::Result<i32> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let report = check_identities(n);
    let out = std::io::stdout();
    let mut out = out.lock();
    if report.all_pass() {
        writeln!(
            out,
            "all {} identity instances hold exactly for n <= {n}",
            report.checked
        )?;
        Ok(0)
    } else {
        for f in &report.failures {
            writeln!(
                out,
                "FAIL {} at n = {}: difference {}",
                f.identity,
                f.n,
                f.difference.to_string_var("t")
            )?;
        }
        Ok(report.failures.len().min(100) as i32)
    }
}

fn diagrams_cmd(half_size: usize, coloring: ColoringArg, atomic: bool) -> anyhow::Result<i32> {
    let (count, poly, coloring_name) = if atomic {
        if !matches!(coloring, ColoringArg::U) {
            bail!("--atomic is defined for the u coloring");
        }
        if half_size % 2 != 0 {
            bail!("--atomic needs an even half-size (4n vertices)");
        }
        let n = half_size / 2;
        let poly = chords::atomic_partition_function(n)?;
        let count = chords::enumerate_planar(half_size)?
            .iter()
            .filter(|d| d.is_atomic())
            .count();
        (count, poly, "u")
    } else {
        let rule = match coloring {
            ColoringArg::U => Coloring::U,
            ColoringArg::V => Coloring::V,
        };
        let diagrams = chords::enumerate_planar(half_size)?;
        let poly = chords::partition_function(half_size, rule)?;
        (
            diagrams.len(),
            poly,
            match coloring {
                ColoringArg::U => "u",
                ColoringArg::V => "v",
            },
        )
    };
    let value = serde_json::json!({
        "half_size": half_size,
        "coloring": coloring_name,
        "atomic": atomic,
        "count": count,
        "partition_function": poly_json(&poly),
    });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(0)
}

fn ncpart_cmd(kind: PartitionType, n: usize, stats: bool) -> anyhow::Result<i32> {
    let value = match kind {
        PartitionType::A => {
            let parts = ncpart::enumerate_nca(n)?;
            let mut v = serde_json::json!({ "type": "a", "n": n, "count": parts.len() });
            if stats {
                let hist = ncpart::block_count_polynomial(n)?;
                v["block_count_histogram"] = poly_json(&hist);
            }
            v
        }
        PartitionType::B => {
            let parts = ncpart::enumerate_ncb(n)?;
            let zero = parts.iter().filter(|p| p.zero_block().is_some()).count();
            let mut v = serde_json::json!({
                "type": "b",
                "n": n,
                "count": parts.len(),
                "with_zero_block": zero,
            });
            if stats {
                v["half_nonzero_block_histogram"] =
                    poly_json(&ncpart::half_nonzero_block_polynomial(n)?);
                v["zero_block_histogram"] = poly_json(&ncpart::bstats_zero_block(n)?);
            }
            v
        }
    };
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(0)
}

fn density_cmd(
    rho: f64,
    dist: DistArg,
    xmin: f64,
    xmax: f64,
    points: usize,
    eps: f64,
    svg: Option<PathBuf>,
) -> anyhow::Result<i32> {
    if points < 2 {
        bail!("--points must be at least 2");
    }
    if !(xmin < xmax) {
        bail!("--xmin must be below --xmax");
    }
    let xs: Vec<f64> = (0..points)
        .map(|i| xmin + (xmax - xmin) * i as f64 / (points - 1) as f64)
        .collect();
    let curve = match dist {
        DistArg::F => spectral::density_f(&xs, rho, eps)?,
        DistArg::G => spectral::density_g(&xs, rho, eps)?,
    };
    let out = std::io::stdout();
    let mut out = out.lock();
    writeln!(out, "x,density")?;
    for (x, d) in curve.xs.iter().zip(&curve.values) {
        writeln!(out, "{x},{d}")?;
    }
    drop(out);
    if let Some(path) = svg {
        let label = match dist {
            DistArg::F => format!("density of F, rho = {rho}"),
            DistArg::G => format!("density of G, rho = {rho}"),
        };
        let doc = svg::polyline_chart(&curve.xs, &curve.values, &label);
        std::fs::write(&path, doc).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    size: usize,
    rho: f64,
    trials: usize,
    seed: u64,
    kmax: usize,
    bins: usize,
    out: PathBuf,
    diag_variance: f64,
) -> anyhow::Result<i32> {
    std::fs::create_dir_all(&out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    // fail before the expensive part if the directory is not writable
    let probe = out.join(".write-probe");
    std::fs::write(&probe, b"")
        .with_context(|| format!("output directory {} not writable", out.display()))?;
    std::fs::remove_file(&probe).ok();

    let cfg = mc::SimulateConfig {
        n: size,
        rho,
        trials,
        seed,
        kmax,
        bins,
        diag_variance,
    };
    let result = mc::run_simulation(&cfg)?;
    std::fs::write(out.join("eigenvalues.csv"), &result.eigenvalues_csv)?;
    std::fs::write(out.join("moments.csv"), &result.moments_csv)?;
    std::fs::write(out.join("histogram.csv"), &result.histogram_csv)?;
    eprintln!(
        "wrote eigenvalues.csv, moments.csv, histogram.csv to {}",
        out.display()
    );
    Ok(0)
}

fn verify_cmd(fast: bool, only: Vec<usize>) -> anyhow::Result<i32> {
    let opts = VerifyOptions {
        fast,
        only: if only.is_empty() { None } else { Some(only) },
    };
    let results = run_all(&opts);
    let mut failed = 0usize;
    for r in &results {
        let status = if r.skipped {
            "SKIP"
        } else if r.passed {
            "PASS"
        } else {
            failed += 1;
            "FAIL"
        };
        println!(
            "[{:>2}] {:<24} {} ({:6.2}s) {}",
            r.id,
            r.name,
            status,
            r.elapsed.as_secs_f64(),
            r.detail
        );
    }
    println!(
        "{} checks, {} failed{}",
        results.len(),
        failed,
        if fast { " (fast mode)" } else { "" }
    );
    Ok(failed.min(100) as i32)
}
