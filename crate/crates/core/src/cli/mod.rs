//! The `qproc` batch front end.
//!
//! Exit codes: 0 success, 1 a `check` failed, 2 config or input error,
//! 3 path budget or dense cap exceeded, 4 a family or integral did not
//! converge under `--require-suitable`.

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decoherence::DEFAULT_DENSE_CAP;
use crate::error::{Error, Result};
use crate::process::{SuitabilityReport, Verdict, CONSISTENCY_TOLERANCE, DEFAULT_SUITABILITY_TOLERANCE, DEFAULT_WINDOW};
use crate::quantization::{
    process_integral, q_integral, tail_sum_at, tail_sum_integral, DiscreteMeasureSpace, IntegralReport,
    ProcessVariable, RandomVariable, StateOperator,
};
use crate::random::random_partition;
use crate::unitary::max_abs_diff;
use crate::walk::{walk_table, WalkTable, DEFAULT_DIRECT_CAP};
use config::{complex, matrix, ExperimentConfig, ParsedEvent};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qproc", version, about = "Quantum measures on finite unitary path spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// μₜ(Eₜ) and μₜ(Gₜ) for a two-site system.
    Walk(Opts),
    /// Nonzero spectrum of D̂ₙ.
    Spectrum(Opts),
    /// Quantum measures of cylinder events and suitability of event families.
    Measure(Opts),
    /// Quantum integrals with the tail-sum cross-check.
    Integrate(Opts),
    /// Consistency, spectral and grade-2 self-checks.
    Check(Opts),
}

#[derive(Debug, Args)]
struct Opts {
    /// JSON experiment config; `walk`, `spectrum` and `check` default to the two-site walk.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cross-check against dense matrices or enumeration.
    #[arg(long)]
    dense_check: bool,
    /// Exit with code 4 when a family or integral does not converge.
    #[arg(long)]
    require_suitable: bool,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let result = match &cli.command {
        Command::Walk(o) => load(o, true).and_then(|c| cmd_walk(&c, o, out, err)),
        Command::Spectrum(o) => load(o, true).and_then(|c| cmd_spectrum(&c, o, out)),
        Command::Measure(o) => load(o, false).and_then(|c| cmd_measure(&c, o, out)),
        Command::Integrate(o) => load(o, false).and_then(|c| cmd_integrate(&c, o, out)),
        Command::Check(o) => load(o, true).and_then(|c| cmd_check(&c, o, out)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::DenseCapExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_CONFIG,
    }
}

fn load(opts: &Opts, default_walk: bool) -> Result<ExperimentConfig> {
    match &opts.config {
        Some(p) => ExperimentConfig::load(p),
        None if default_walk => Ok(ExperimentConfig::two_site_walk()),
        None => Err(Error::InvalidArgument("--config is required for this command".into())),
    }
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("output: {e}"))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io)?;
    writeln!(out).map_err(io)
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// very large magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

struct Csv<'a>(csv::Writer<&'a mut dyn Write>);

impl<'a> Csv<'a> {
    fn new(out: &'a mut dyn Write, header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header).map_err(io)?;
        Ok(Csv(w))
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.0.write_record(fields).map_err(io)
    }

    fn finish(mut self) -> Result<()> {
        self.0.flush().map_err(io)
    }
}

fn cmd_walk(cfg: &ExperimentConfig, opts: &Opts, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let spec = cfg.walk.clone().unwrap_or_default();
    let t_max = opts.t_max.or(spec.t_max).unwrap_or(16);
    let cap = spec.direct_cap.unwrap_or(DEFAULT_DIRECT_CAP);
    let proc = cfg.build_process()?;
    let table: WalkTable = walk_table(&proc, t_max, cap)?;
    if !table.exact_route {
        let _ = writeln!(err, "note: not the shipped two-site walk; exact G/F columns are left empty");
    }
    if opts.json {
        emit_json(out, &table)?;
        return Ok(EXIT_OK);
    }
    let mut w = Csv::new(
        out,
        &[
            "t", "G_re", "G_im", "F_re", "F_im", "mu_E_exact", "mu_E", "mu_G_exact", "mu_G", "direct_mu_E",
            "direct_mu_G", "diff", "nu_C",
        ],
    )?;
    for r in &table.rows {
        let (gr, gi) = r.g.clone().unwrap_or_default();
        let (fr, fi) = r.f.clone().unwrap_or_default();
        w.row([
            r.t.to_string(),
            gr,
            gi,
            fr,
            fi,
            r.mu_e_exact.clone().unwrap_or_default(),
            opt(r.mu_e),
            r.mu_g_exact.clone().unwrap_or_default(),
            opt(r.mu_g),
            opt(r.direct_mu_e),
            opt(r.direct_mu_g),
            opt(r.diff),
            opt(r.classical_nu),
        ])?;
    }
    w.finish()?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct PairRow {
    site: usize,
    eigenvalue: f64,
    support_size: usize,
}

#[derive(Debug, Serialize)]
struct DenseSpectrumCheck {
    eigenvalue_diff: f64,
    reconstruction_diff: f64,
}

#[derive(Debug, Serialize)]
struct SpectrumReport {
    rank: usize,
    paths: usize,
    pairs: Vec<PairRow>,
    eigenvalue_sum: f64,
    dense: Option<DenseSpectrumCheck>,
}

fn cmd_spectrum(cfg: &ExperimentConfig, opts: &Opts, out: &mut dyn Write) -> Result<i32> {
    let spec = cfg.spectrum.clone().unwrap_or_default();
    let n = opts.t_max.or(spec.rank).unwrap_or(4);
    let proc = cfg.build_process()?;
    let st = proc.state(n)?;
    let sp = st.spectrum();
    let pairs = sp
        .pairs
        .iter()
        .flatten()
        .map(|p| PairRow {
            site: p.site,
            eigenvalue: p.eigenvalue,
            support_size: p.support_size(),
        })
        .collect();
    let dense = if opts.dense_check {
        let d = st.dense_matrix(spec.dense_cap.unwrap_or(DEFAULT_DENSE_CAP))?;
        let mut dense_ev: Vec<f64> = SymmetricEigen::new(d.clone()).eigenvalues.iter().copied().collect();
        dense_ev.sort_by(|a, b| b.total_cmp(a));
        let mut ev = sp.eigenvalues.clone();
        ev.resize(dense_ev.len(), 0.0);
        ev.sort_by(|a, b| b.total_cmp(a));
        let eigenvalue_diff = ev.iter().zip(&dense_ev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Some(DenseSpectrumCheck {
            eigenvalue_diff,
            reconstruction_diff: max_abs_diff(&sp.reconstruct(st.len()), &d),
        })
    } else {
        None
    };
    let report = SpectrumReport {
        rank: n,
        paths: st.len(),
        pairs,
        eigenvalue_sum: sp.eigenvalue_sum(),
        dense,
    };
    if opts.json {
        emit_json(out, &report)?;
        return Ok(EXIT_OK);
    }
    let mut w = Csv::new(out, &["row", "site", "value", "support_size"])?;
    for p in &report.pairs {
        w.row(["pair".into(), p.site.to_string(), num(p.eigenvalue), p.support_size.to_string()])?;
    }
    w.row(["eigenvalue_sum".into(), String::new(), num(report.eigenvalue_sum), String::new()])?;
    if let Some(d) = &report.dense {
        w.row(["dense_eigenvalue_diff".into(), String::new(), num(d.eigenvalue_diff), String::new()])?;
        w.row(["dense_reconstruction_diff".into(), String::new(), num(d.reconstruction_diff), String::new()])?;
    }
    w.finish()?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
#[serde(tag = "type", rename_all = "camelCase")]
enum MeasureResult {
    Cylinder {
        event: String,
        rank: usize,
        mu: f64,
        nu: f64,
        oracle: Option<f64>,
    },
    #[serde(rename_all = "camelCase")]
    Family {
        event: String,
        kind: String,
        nu: Option<f64>,
        report: SuitabilityReport,
        /// Largest gap between the structured and enumerated routes.
        oracle_diff: Option<f64>,
    },
}

fn cmd_measure(cfg: &ExperimentConfig, opts: &Opts, out: &mut dyn Write) -> Result<i32> {
    let spec = cfg
        .measure
        .clone()
        .ok_or_else(|| Error::InvalidArgument("config has no `measure` block".into()))?;
    let proc = cfg.build_process()?;
    let t_max = opts.t_max.or(spec.t_max).unwrap_or(12);
    let window = spec.window.unwrap_or(DEFAULT_WINDOW);
    let tol = opts.tol.or(spec.tol).unwrap_or(DEFAULT_SUITABILITY_TOLERANCE);
    let parsed = spec
        .events
        .iter()
        .map(|e| e.parse(&proc, &cfg.base_dir))
        .collect::<Result<Vec<_>>>()?;
    let mut results = Vec::new();
    let mut unconverged = false;
    for p in parsed {
        match p {
            ParsedEvent::Cylinder { name, event } => {
                let mu = proc.q_measure(&event)?;
                let oracle = if opts.dense_check {
                    let c = proc.system().class_operator(&event)?;
                    Some((c * proc.initial_state().vector()).norm_squared())
                } else {
                    None
                };
                results.push(MeasureResult::Cylinder {
                    event: name,
                    rank: event.rank(),
                    mu,
                    nu: event.classical_measure(),
                    oracle,
                });
            }
            ParsedEvent::Family(f) => {
                let report = proc.evaluate_suitability(&f, t_max, window, tol)?;
                unconverged |= report.verdict != Verdict::Suitable;
                let oracle_diff = if opts.dense_check {
                    let mut worst = 0.0f64;
                    for &(t, v) in &report.values {
                        if proc.space().checked_len(t).is_err() {
                            break;
                        }
                        worst = worst.max((proc.local_expectation_enumerated(&f, t)? - v).abs());
                    }
                    Some(worst)
                } else {
                    None
                };
                results.push(MeasureResult::Family {
                    event: f.name().to_string(),
                    kind: f.kind().to_string(),
                    nu: f.classical_measure(proc.space()),
                    report,
                    oracle_diff,
                });
            }
        }
    }
    if opts.json {
        emit_json(out, &results)?;
    } else {
        let mut w = Csv::new(out, &["event", "kind", "t", "value", "verdict", "limit", "nu", "oracle"])?;
        for r in &results {
            match r {
                MeasureResult::Cylinder {
                    event,
                    rank,
                    mu,
                    nu,
                    oracle,
                } => w.row([
                    event.clone(),
                    "cylinder".into(),
                    rank.to_string(),
                    num(*mu),
                    "exact".into(),
                    num(*mu),
                    num(*nu),
                    opt(*oracle),
                ])?,
                MeasureResult::Family {
                    event,
                    kind,
                    nu,
                    report,
                    oracle_diff,
                } => {
                    for &(t, v) in &report.values {
                        w.row([
                            event.clone(),
                            kind.clone(),
                            t.to_string(),
                            num(v),
                            report.verdict.to_string(),
                            opt(report.limit),
                            opt(*nu),
                            opt(*oracle_diff),
                        ])?;
                    }
                }
            }
        }
        w.finish()?;
    }
    Ok(if unconverged && opts.require_suitable {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Serialize)]
struct FiniteIntegralReport {
    q_integral: f64,
    tail_sum: f64,
    diff: f64,
}

#[derive(Debug, Serialize)]
struct CylinderIntegralReport {
    rank: usize,
    tail_sums: Vec<(usize, f64)>,
    max_diff: f64,
    report: IntegralReport,
}

#[derive(Debug, Serialize)]
struct IntegrateReport {
    finite: Option<FiniteIntegralReport>,
    cylinder: Option<CylinderIntegralReport>,
}

fn cmd_integrate(cfg: &ExperimentConfig, opts: &Opts, out: &mut dyn Write) -> Result<i32> {
    let spec = cfg
        .integrate
        .clone()
        .ok_or_else(|| Error::InvalidArgument("config has no `integrate` block".into()))?;
    if spec.finite.is_none() && spec.cylinder.is_none() {
        return Err(Error::InvalidArgument("`integrate` needs `finite` or `cylinder`".into()));
    }
    let mut report = IntegrateReport {
        finite: None,
        cylinder: None,
    };
    let mut unconverged = false;
    if let Some(fin) = &spec.finite {
        let space = DiscreteMeasureSpace::new(fin.weights.clone())?;
        if fin.f.len() != fin.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: fin.weights.len(),
                actual: fin.f.len(),
            });
        }
        let scale = fin.scale.unwrap_or(1.0);
        let labels = space.labels();
        let f = RandomVariable::new(labels.iter().map(|&x| scale * fin.f[x]).collect())?;
        let n = fin.weights.len();
        let rho = match (&fin.state.pure, &fin.state.matrix) {
            (Some(v), None) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: v.len(),
                    });
                }
                let v = labels.iter().map(|&x| complex(&v[x])).collect::<Result<Vec<_>>>()?;
                StateOperator::pure(&v)?
            }
            (None, Some(m)) => {
                let full = matrix(m, n)?;
                let k = labels.len();
                StateOperator::new(crate::unitary::ComplexMatrix::from_fn(k, k, |i, j| {
                    full[(labels[i], labels[j])]
                }))?
            }
            (None, None) => StateOperator::maximally_mixed(space.len())?,
            _ => return Err(Error::InvalidArgument("state takes `pure` or `matrix`, not both".into())),
        };
        let q = q_integral(&rho, &space, &f)?;
        let t = tail_sum_integral(&rho, &space, &f)?;
        report.finite = Some(FiniteIntegralReport {
            q_integral: q,
            tail_sum: t,
            diff: (q - t).abs(),
        });
    }
    if let Some(cyl) = &spec.cylinder {
        let proc = cfg.build_process()?;
        let len = proc.space().checked_len(cyl.rank)? as usize;
        let scale = cyl.scale.unwrap_or(1.0);
        let values: Vec<f64> = match (&cyl.values, cyl.final_site) {
            (Some(v), None) => v.iter().map(|x| scale * x).collect(),
            (None, Some(site)) => {
                if site >= proc.m() {
                    return Err(Error::SiteOutOfRange { site, m: proc.m() });
                }
                (0..len as u64)
                    .map(|i| if proc.space().final_site(cyl.rank, i) == site { scale } else { 0.0 })
                    .collect()
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "cylinder integral takes exactly one of `values` or `finalSite`".into(),
                ))
            }
        };
        let f = ProcessVariable::cylinder(&proc, cyl.rank, values.clone())?;
        let t_max = opts.t_max.or(cyl.t_max).unwrap_or(cyl.rank + 8);
        let window = cyl.window.unwrap_or(DEFAULT_WINDOW);
        let tol = opts.tol.or(cyl.tol).unwrap_or(DEFAULT_SUITABILITY_TOLERANCE);
        let r = process_integral(&proc, &f, t_max, window, tol)?;
        unconverged |= r.verdict != Verdict::Suitable;
        let mut tails = Vec::new();
        let mut max_diff = 0.0f64;
        for &(t, v) in &r.values {
            let st = proc.state(t)?;
            let factor = proc.space().pow_m(t - cyl.rank);
            let ext: Vec<f64> = (0..st.len() as u64).map(|i| values[(i / factor) as usize]).collect();
            let ts = tail_sum_at(&st, &ext);
            max_diff = max_diff.max((ts - v).abs());
            tails.push((t, ts));
        }
        report.cylinder = Some(CylinderIntegralReport {
            rank: cyl.rank,
            tail_sums: tails,
            max_diff,
            report: r,
        });
    }
    if opts.json {
        emit_json(out, &report)?;
    } else {
        let mut w = Csv::new(out, &["t", "q_integral", "tail_sum", "diff", "verdict", "limit"])?;
        if let Some(f) = &report.finite {
            w.row([
                String::new(),
                num(f.q_integral),
                num(f.tail_sum),
                num(f.diff),
                "exact".into(),
                num(f.q_integral),
            ])?;
        }
        if let Some(c) = &report.cylinder {
            for (&(t, v), &(_, ts)) in c.report.values.iter().zip(&c.tail_sums) {
                w.row([
                    t.to_string(),
                    num(v),
                    num(ts),
                    num((v - ts).abs()),
                    c.report.verdict.to_string(),
                    opt(c.report.limit),
                ])?;
            }
        }
        w.finish()?;
    }
    Ok(if unconverged && opts.require_suitable {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Serialize)]
struct CheckRow {
    check: String,
    rank: usize,
    value: f64,
    tolerance: f64,
    passed: bool,
}

fn cmd_check(cfg: &ExperimentConfig, opts: &Opts, out: &mut dyn Write) -> Result<i32> {
    let spec = cfg.check.clone().unwrap_or_default();
    let t_max = opts.t_max.or(spec.t_max).unwrap_or(6);
    let samples = spec.samples.unwrap_or(1 << 16);
    let seed = opts.seed.or(spec.seed).unwrap_or(0);
    let triples = spec.triples.unwrap_or(100);
    let tol = opts.tol.unwrap_or(CONSISTENCY_TOLERANCE);
    let proc = cfg.build_process()?;
    let mut rows = Vec::new();
    let mut push = |check: &str, rank: usize, value: f64, tolerance: f64| {
        rows.push(CheckRow {
            check: check.into(),
            rank,
            value,
            tolerance,
            passed: value <= tolerance,
        })
    };
    for t in 0..=t_max {
        let r = proc.verify_consistency(t, samples, seed.wrapping_add(t as u64))?;
        push("consistency", t, r.max_residual, tol);
    }
    for t in 0..=t_max {
        let st = proc.state(t)?;
        push("eigenvalue_sum", t, (st.spectrum().eigenvalue_sum() - 1.0).abs(), tol);
        if opts.dense_check && st.len() <= DEFAULT_DENSE_CAP {
            let sp = st.spectrum();
            let d = st.dense_matrix(DEFAULT_DENSE_CAP)?;
            push("dense_reconstruction", t, max_abs_diff(&sp.reconstruct(st.len()), &d), tol);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..triples {
        let parts = random_partition(*proc.space(), t_max, 3, &mut rng);
        worst = worst.max(proc.grade2_residual(&parts[0], &parts[1], &parts[2])?);
    }
    push("grade2", t_max, worst, tol);
    if crate::walk::is_two_site_walk(&proc) {
        let table = walk_table(&proc, t_max, t_max)?;
        push("walk_fast_vs_direct", t_max, table.max_diff(), 1e-12);
        let comp = table
            .rows
            .iter()
            .map(|r| (r.mu_g.unwrap_or(f64::NAN) - (1.0 - r.mu_e.unwrap_or(f64::NAN))).abs())
            .fold(0.0, f64::max);
        push("walk_complement", t_max, comp, 1e-12);
    }
    let all_passed = rows.iter().all(|r| r.passed);
    if opts.json {
        emit_json(out, &rows)?;
    } else {
        let mut w = Csv::new(out, &["check", "rank", "value", "tolerance", "passed"])?;
        for r in &rows {
            w.row([
                r.check.clone(),
                r.rank.to_string(),
                num(r.value),
                num(r.tolerance),
                r.passed.to_string(),
            ])?;
        }
        w.finish()?;
    }
    Ok(if all_passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
