use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use kdvtau::curve::{analyze, lattice_coordinates, CurveReport, Precision};
use kdvtau::io::{coeff_table_csv, parse_initial_data, parse_matrix, points_csv, MatrixFile};
use kdvtau::ring::{fmt_rational, C64};
use kdvtau::taugen::coeff_table_from_data;
use kdvtau::theta::theta_compare;
use kdvtau::tpoly::fmt_monomial;
use kdvtau::wk::{branch_stats_range, compare_with_published, has_double_point_at_origin, wk_truncation, AiryVariant};
use kdvtau::{verify, Error, Execution};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Taylor coefficients of KdV tau-functions: exact resolvent route and
/// hyperelliptic theta route.
#[derive(Parser, Debug)]
#[command(name = "kdvtau", version)]
struct Cli {
    /// Worker threads for the data-parallel kernels.
    #[arg(long, global = true, env = "KDVTAU_THREADS")]
    threads: Option<usize>,
    /// Numerical targets: `EPS` for both, or `QUAD,LATTICE`.
    #[arg(long, global = true, value_parser = parse_precision)]
    precision: Option<Precision>,
    /// Run every kernel sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact coefficients F_{k1..kN} (2 sum k + N <= m, N >= 2) as CSV.
    Taucoeffs {
        #[arg(long)]
        init: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Witten–Kontsevich truncation compared with the published table.
    Wk {
        #[arg(long)]
        m: usize,
    },
    /// Spectral curve, periods and divisor of a matrix polynomial as JSON.
    Curve {
        #[arg(long)]
        matrix: PathBuf,
        /// Highest second-kind index k of the V vectors.
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// log theta of the curve against the exact coefficients.
    ThetaCompare {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        tol: f64,
        /// Also write the side-by-side table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Branch point statistics of the truncated Airy resolvents, n = 1..nmax.
    BranchStats {
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write every branch point as `n,re,im`.
        #[arg(long)]
        roots: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Variant::Figure)]
        variant: Variant,
    },
    /// Exact symbolic self-checks.
    Verify {
        /// lax, hamiltonians, casimir, vector-fields, hw or all.
        #[arg(long)]
        suite: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    Resolvent,
    Printed,
    Figure,
}

impl From<Variant> for AiryVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Resolvent => AiryVariant::Resolvent,
            Variant::Printed => AiryVariant::Printed,
            Variant::Figure => AiryVariant::Figure,
        }
    }
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    let parse = |x: &str| -> Result<f64, String> {
        let v: f64 = x.trim().parse().map_err(|e| format!("{x}: {e}"))?;
        if v > 0.0 && v < 1.0 {
            Ok(v)
        } else {
            Err(format!("{x}: tolerance must lie in (0, 1)"))
        }
    };
    match s.split_once(',') {
        None => Ok(Precision::uniform(parse(s)?)),
        Some((q, l)) => Ok(Precision { quadrature: parse(q)?, lattice: parse(l)? }),
    }
}

/// A failure with its exit code: 2 for input errors, 3 for depth or
/// capability errors.
#[derive(Debug)]
struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn input(err: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, err: err.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidArgument(_) => 2,
            _ => 3,
        };
        Failure { code, err: e.into() }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let prec = cli.precision.unwrap_or_default();
    let result = match cli.command {
        Command::Taucoeffs { init, m, out } => taucoeffs(&init, m, &out, exec),
        Command::Wk { m } => wk(m, exec),
        Command::Curve { matrix, k, out } => curve(&matrix, k, &out, prec, exec),
        Command::ThetaCompare { matrix, m, tol, out } => theta(&matrix, m, tol, out.as_deref(), prec, exec),
        Command::BranchStats { nmax, out, roots, variant } => branch_stats(nmax, &out, roots.as_deref(), variant.into(), exec),
        Command::Verify { suite } => run_verify(&suite),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(input)
}

fn read_matrix(path: &Path) -> Result<MatrixFile, Failure> {
    parse_matrix(&read(path)?).with_context(|| format!("parsing {}", path.display())).map_err(input)
}

fn taucoeffs(init: &Path, m: usize, out: &Path, exec: Execution) -> Outcome {
    if m < 2 {
        return Err(input(anyhow::anyhow!("--m must be at least 2")));
    }
    let data = parse_initial_data(&read(init)?).with_context(|| format!("parsing {}", init.display())).map_err(input)?;
    let table = coeff_table_from_data(&data, m, exec).map_err(|e| {
        let depth = matches!(e, Error::InsufficientDepth { .. });
        let f = Failure::from(e);
        if depth {
            Failure { code: f.code, err: f.err.context(format!("level {m} needs a_i, b_i, c_i for i <= {}", m / 2)) }
        } else {
            f
        }
    })?;
    write(out, &coeff_table_csv(&table))?;
    println!("wrote {} coefficients to {}", table.entries().count(), out.display());
    Ok(true)
}

fn wk(m: usize, exec: Execution) -> Outcome {
    if m < 2 {
        return Err(input(anyhow::anyhow!("--m must be at least 2")));
    }
    let p = wk_truncation(m, exec)?;
    let rows = compare_with_published(&p);
    println!("log tau of the Airy data through level {m}, standard times");
    println!("(t-degree >= 2 only: the N-point formula does not produce linear terms)");
    println!("{:<16} {:>14} {:>14}  match", "monomial", "computed", "published");
    let mut ok = true;
    for r in &rows {
        let published = fmt_rational(&r.published);
        let matched = r.matches();
        ok &= matched;
        println!("{:<16} {:>14} {:>14}  {}", fmt_monomial(&r.monomial), fmt_rational(&r.computed), published, if matched { "yes" } else { "NO" });
    }
    let bad = rows.iter().filter(|r| !r.matches()).count();
    println!("{} of {} monomials match", rows.len() - bad, rows.len());
    Ok(ok)
}

fn curve_json(rep: &CurveReport) -> Value {
    let pd = &rep.periods;
    let b = pd.b_matrix();
    let (n, m) = lattice_coordinates(&b, &rep.divisor.u0);
    let mut v = serde_json::to_value(rep).expect("serializable");
    v["diagnostics"] = json!({
        "asymmetry": pd.asymmetry(),
        "normalization_residual": pd.normalization_residual,
        "v_route_discrepancy": pd.v_route_discrepancy(pd.v.len().saturating_sub(1)),
        "re_b_negative_definite": pd.re_negative_definite(),
        "u0_lattice_coordinates": { "b": n, "two_pi_i": m },
    });
    v
}

fn curve(matrix: &Path, k: usize, out: &Path, prec: Precision, exec: Execution) -> Outcome {
    let wp = read_matrix(matrix)?.complex();
    let rep = analyze(&wp, k, prec, exec)?;
    let text = serde_json::to_string_pretty(&curve_json(&rep)).expect("serializable");
    write(out, &text)?;
    let csv = out.with_extension("branch_points.csv");
    write(&csv, &points_csv(&rep.curve.branch_points))?;
    println!("genus {}; wrote {} and {}", rep.curve.g, out.display(), csv.display());
    let b = rep.periods.b_matrix();
    for i in 0..rep.curve.g {
        let row: Vec<String> = (0..rep.curve.g).map(|j| fmt_c(b[(i, j)])).collect();
        println!("B[{i}] = {}", row.join("  "));
    }
    Ok(true)
}

fn fmt_c(z: C64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn theta(matrix: &Path, m: usize, tol: f64, out: Option<&Path>, prec: Precision, exec: Execution) -> Outcome {
    if !(tol > 0.0) {
        return Err(input(anyhow::anyhow!("--tol must be positive")));
    }
    let file = read_matrix(matrix)?;
    let wp = file.exact().ok_or_else(|| input(anyhow::anyhow!("theta-compare needs rational matrix entries for the exact side")))?;
    let cmp = theta_compare(wp, m, prec, exec)?;
    let lc = cmp.log_constant();
    println!("genus {}, level {m}, standard times", wp.g);
    println!("log theta at the base point: {}", fmt_c(lc));
    println!("{:<16} {:>26} {:>14} {:>10}", "monomial", "theta side", "exact", "|diff|");
    let mut csv = String::from("multi_index,theta_re,theta_im,exact\n");
    for (k, a, b) in &cmp.comparison.rows {
        let exact = cmp.exact_side.coeff(k);
        println!("{:<16} {:>26} {:>14} {:>10.2e}", fmt_monomial(k), fmt_c(*a), fmt_rational(&exact), (a - b).norm());
        let _ = writeln!(csv, "{},{:.15e},{:.15e},{}", kdvtau::tpoly::fmt_multi_index(k), a.re, a.im, fmt_rational(&exact));
    }
    if let Some(path) = out {
        write(path, &csv)?;
    }
    let worst = cmp.comparison.worst.as_deref().map(fmt_monomial).unwrap_or_else(|| "-".into());
    let pass = cmp.comparison.passes(tol);
    println!("max deviation {:.3e} at {worst}; tolerance {tol:e}: {}", cmp.comparison.max_deviation, if pass { "pass" } else { "FAIL" });
    Ok(pass)
}

fn branch_stats(nmax: usize, out: &Path, roots: Option<&Path>, variant: AiryVariant, exec: Execution) -> Outcome {
    if nmax == 0 {
        return Err(input(anyhow::anyhow!("--nmax must be at least 1")));
    }
    let stats = branch_stats_range(nmax, variant, exec)?;
    let mut csv = String::from(
        "n,isolated_re,isolated_im,inner_count,inner_radius,outer_count,outer_radius,ratio,predicted_ratio,double_point_at_3n\n",
    );
    let mut all = String::from("n,re,im\n");
    let mut ok = true;
    for s in &stats {
        let counts = s.inner_count == 3 * s.n && s.outer_count == 3 * s.n + 2;
        ok &= counts;
        let _ = writeln!(
            csv,
            "{},{:.12e},{:.12e},{},{:.12e},{},{:.12e},{:.12e},{:.12e},{}",
            s.n,
            s.isolated.re,
            s.isolated.im,
            s.inner_count,
            s.inner_radius,
            s.outer_count,
            s.outer_radius,
            s.ratio(),
            s.predicted_ratio(),
            has_double_point_at_origin(s.n, variant)
        );
        for z in &s.roots {
            let _ = writeln!(all, "{},{:.15e},{:.15e}", s.n, z.re, z.im);
        }
        println!(
            "n={:<3} counts (1, {}, {}){}  R_in={:.4} R_out={:.4} ratio={:.4} predicted={:.4}",
            s.n,
            s.inner_count,
            s.outer_count,
            if counts { "" } else { " unexpected" },
            s.inner_radius,
            s.outer_radius,
            s.ratio(),
            s.predicted_ratio()
        );
    }
    write(out, &csv)?;
    if let Some(p) = roots {
        write(p, &all)?;
    }
    Ok(ok)
}

fn run_verify(suite: &str) -> Outcome {
    let checks = verify::run_suite(suite).ok_or_else(|| {
        input(anyhow::anyhow!("unknown suite {suite:?}; expected one of {} or all", verify::SUITES.join(", ")))
    })?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(failed == 0)
}
