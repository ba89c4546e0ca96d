//! Command-line front end. Exit status 0 means the command evaluated (a
//! detected violation is data, not failure); 1 is a validation or input
//! failure, or a violation found by `proptest`; 2 is a usage error.

mod output;
mod spec;

pub use output::{digest, write_atomic, RunReport};
pub use spec::{LoadedState, LocalSpec, PairSpec, SpinLabel, StateSpec, TermSpec};

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::casestudy::{
    appendix_sweep, asymptotic_dmatrix_report, reproduce_ft_discrepancy, AppendixOptions, AppendixReport,
};
use crate::error::{Error, Result};
use crate::hilbert::QuantumState;
use crate::states::{SU2CoherentParams, Truncation};
use crate::su2::{format_half, parse_half, wigner_d_with_cap, DConfig, DMethod, Irrep, EXACT_TWO_J_CAP, LOG_DOMAIN_TWO_J_CAP, STABLE_TWO_J_CAP};
use crate::witness::{
    decomposition_check, general_criterion, hw_criterion, optimize_alpha_beta, random_config, random_pairs,
    random_separable, spin_criterion, sum_criterion, HwBound, ObservablePair, SpinRhs, WitnessConfig,
    WitnessReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "sepwitness", version, about = "Variance-sum separability witnesses and SU(2) basis-change checks")]
pub struct Cli {
    /// Write the report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Largest j the d-matrix routines accept, e.g. `400` or `801/2`.
    #[arg(long, global = true, env = "SEPWITNESS_JMAX")]
    pub jmax: Option<String>,
    /// Fock cutoff for oscillator states that do not set one.
    #[arg(long, global = true, default_value_t = 40)]
    pub cutoff: usize,
    /// Largest discarded weight allowed when truncating the j range.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Add wall-clock timing to the report (breaks byte reproducibility).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    /// Oscillator quadratures against 2.
    Hw,
    /// Arbitrary pairs with weights alpha, beta.
    General,
    /// Unit weights.
    Sum,
    /// Collective spin pairs Jy, Jz.
    Spin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RhsArg {
    Symmetric,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HwBoundArg {
    Fixed,
    StateDependent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    LogDomain,
    Recursion,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a witness on a state file.
    Witness {
        /// JSON state description.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta: f64,
        /// Bound used by the spin criterion.
        #[arg(long, value_enum, default_value_t = RhsArg::General)]
        rhs: RhsArg,
        /// Bound used by the oscillator criterion.
        #[arg(long, value_enum, default_value_t = HwBoundArg::Fixed)]
        hw_bound: HwBoundArg,
        /// Also report the strongest (alpha, beta).
        #[arg(long)]
        optimize: bool,
    },
    /// Exact versus Fourier-shortcut z expansion of the coherent family.
    Appendix {
        #[arg(long, default_value_t = 400.0)]
        j_mean: f64,
        /// phi2 - phi1.
        #[arg(long, default_value_t = FRAC_PI_2, allow_hyphen_values = true)]
        phase_offset: f64,
        /// Number of phase offsets to sweep instead of a single point.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        sweep: Option<u32>,
        /// Sweep half-width around the phase offset.
        #[arg(long, default_value_t = 0.09)]
        sweep_half_width: f64,
        /// Run outside the near-pole regime and flag the rows.
        #[arg(long)]
        force: bool,
    },
    /// Wigner d-matrix elements at pi/2.
    Dmatrix {
        /// j, e.g. `3` or `1/2`.
        #[arg(long)]
        j: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Only rows and columns with |m| <= this.
        #[arg(long)]
        m_window: Option<String>,
        /// Emit the large-j error table instead of the elements.
        #[arg(long)]
        compare_asymptotic: bool,
    },
    /// Run the separable-ensemble necessity checks.
    Proptest {
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        /// Pair and weight draws per ensemble.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        draws: u64,
        /// Largest local dimension.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..=8))]
        max_dim: u64,
    },
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(Outcome { text, status }) => match emit(&cli, &text) {
            Ok(()) => status,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILURE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

struct Outcome {
    text: String,
    status: i32,
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let start = Instant::now();
    let (mut report, csv, status) = match &cli.command {
        Command::Witness { state, criterion, alpha, beta, rhs, hw_bound, optimize } => {
            let bytes = std::fs::read(state)
                .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", state.display())))?;
            let loaded = StateSpec::from_json(&bytes)?.load(cli.cutoff)?;
            let cfg = WitnessConfig::new(*alpha, *beta)?;
            let (w, optimum) = witness(&loaded, *criterion, &cfg, *rhs, *hw_bound, *optimize)?;
            let mut payload = json!({ "witness": w });
            if let Some(o) = optimum {
                payload["optimum"] = o;
            }
            let report = RunReport::new("witness", Some(w.criterion.id()), digest(&bytes), cli.seed, payload);
            (report, witness_csv(&w), EXIT_OK)
        }
        Command::Appendix { j_mean, phase_offset, sweep, sweep_half_width, force } => {
            let truncation = Truncation { tolerance: cli.tolerance, ..Truncation::default() };
            let opts = AppendixOptions { force: *force };
            let offsets: Vec<f64> = match sweep {
                None => vec![*phase_offset],
                Some(1) => vec![*phase_offset],
                Some(n) => (0..*n)
                    .map(|k| phase_offset - sweep_half_width + 2.0 * sweep_half_width * f64::from(k) / f64::from(n - 1))
                    .collect(),
            };
            let reports = if offsets.len() == 1 {
                let p = SU2CoherentParams::balanced(*j_mean, offsets[0])?;
                vec![reproduce_ft_discrepancy(&p, &truncation, opts)?]
            } else {
                appendix_sweep(*j_mean, &offsets, &truncation, opts)?
            };
            let inputs = json!({
                "j_mean": j_mean, "phase_offsets": offsets, "force": force,
                "window": truncation.window, "tolerance": truncation.tolerance,
            });
            let report = RunReport::new("appendix", None, digest(inputs.to_string().as_bytes()), cli.seed, json!({ "reports": reports }));
            (report, appendix_csv(&reports), EXIT_OK)
        }
        Command::Dmatrix { j, method, m_window, compare_asymptotic } => {
            let (payload, csv, inputs) = dmatrix(cli, j, *method, m_window.as_deref(), *compare_asymptotic)?;
            let report = RunReport::new("dmatrix", None, digest(inputs.to_string().as_bytes()), cli.seed, payload);
            (report, csv, EXIT_OK)
        }
        Command::Proptest { count, draws, max_dim } => {
            let summary = proptest(cli.seed, *count, *draws, *max_dim as usize)?;
            let inputs = json!({ "seed": cli.seed, "count": count, "draws": draws, "max_dim": max_dim });
            let status = if summary.violations == 0 { EXIT_OK } else { EXIT_FAILURE };
            let csv = proptest_csv(&summary);
            let report = RunReport::new("proptest", None, digest(inputs.to_string().as_bytes()), cli.seed, serde_json::to_value(&summary).map_err(json_err)?);
            (report, csv, status)
        }
    };
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let default = match cli.command {
        Command::Dmatrix { .. } => Format::Csv,
        _ => Format::Json,
    };
    let text = match cli.format.unwrap_or(default) {
        Format::Json => report.to_json()?,
        Format::Csv => csv,
    };
    Ok(Outcome { text, status })
}

fn json_err(e: serde_json::Error) -> Error {
    Error::InvalidParameter(format!("serialization: {e}"))
}

fn spin_irreps(dims: crate::hilbert::HilbertDims) -> Result<(Irrep, Irrep)> {
    let d2 = dims.d2.ok_or_else(|| Error::InvalidParameter("spin criterion needs a bipartite state".into()))?;
    let j = |d| Irrep::from_dimension(d).ok_or_else(|| Error::InvalidParameter(format!("dimension {d} is not a spin irrep")));
    Ok((j(dims.d1)?, j(d2)?))
}

fn witness(
    loaded: &LoadedState,
    criterion: CriterionArg,
    cfg: &WitnessConfig,
    rhs: RhsArg,
    hw_bound: HwBoundArg,
    optimize: bool,
) -> Result<(WitnessReport, Option<Value>)> {
    let (state, pairs): (&dyn QuantumState, ObservablePair) = match loaded {
        LoadedState::Bipartite { state, pairs } => {
            let pairs = match pairs {
                Some(p) => p.clone(),
                None => {
                    let (j1, j2) = spin_irreps(state.dims())?;
                    ObservablePair::collective_spin(j1, j2)
                }
            };
            (state, pairs)
        }
        LoadedState::Fock(f) => (&f.state, ObservablePair::quadratures(f.cutoff)?),
    };
    let report = match criterion {
        CriterionArg::Hw => match loaded {
            LoadedState::Fock(f) => hw_criterion(
                f,
                match hw_bound {
                    HwBoundArg::Fixed => HwBound::Fixed,
                    HwBoundArg::StateDependent => HwBound::StateDependent,
                },
            )?,
            _ => return Err(Error::InvalidParameter("the hw criterion needs an oscillator state".into())),
        },
        CriterionArg::General => general_criterion(state, &pairs, cfg)?,
        CriterionArg::Sum => sum_criterion(state, &pairs)?,
        CriterionArg::Spin => {
            let (j1, j2) = spin_irreps(state.dims())?;
            let mode = match rhs {
                RhsArg::Symmetric => SpinRhs::Symmetric,
                RhsArg::General => SpinRhs::General,
            };
            spin_criterion(state, j1, j2, mode)?
        }
    };
    let optimum = if optimize {
        Some(serde_json::to_value(optimize_alpha_beta(state, &pairs)?).map_err(json_err)?)
    } else {
        None
    };
    Ok((report, optimum))
}

fn fmt_f(x: f64) -> String {
    format!("{x:e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

fn witness_csv(w: &WitnessReport) -> String {
    format!(
        "criterion,lhs,rhs,margin,violated,c1,c2,alpha,beta\n{},{},{},{},{},{},{},{},{}\n",
        w.criterion.id(),
        fmt_f(w.lhs),
        fmt_f(w.rhs),
        fmt_f(w.margin),
        w.violated,
        fmt_f(w.c1),
        fmt_f(w.c2),
        fmt_f(w.alpha),
        fmt_f(w.beta)
    )
}

fn appendix_csv(reports: &[AppendixReport]) -> String {
    let mut s = String::from("phi_offset,exact_mz,provisional_mz,predicted_provisional,discrepancy_ratio,out_of_regime\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f(r.phase_offset),
            fmt_f(r.exact_mz),
            fmt_opt(r.provisional_mz),
            fmt_f(r.predicted_provisional),
            fmt_opt(r.discrepancy_ratio),
            !r.in_regime
        ));
    }
    s
}

fn parse_j(s: &str, what: &str) -> Result<u32> {
    match parse_half(s) {
        Some(t) if (0..=i64::from(u32::MAX)).contains(&t) => Ok(t as u32),
        _ => Err(Error::InvalidParameter(format!("{what} {s:?} is not a nonnegative integer or half-integer"))),
    }
}

fn dmatrix(
    cli: &Cli,
    j: &str,
    method: MethodArg,
    m_window: Option<&str>,
    compare_asymptotic: bool,
) -> Result<(Value, String, Value)> {
    let irrep = Irrep::new(parse_j(j, "j")?);
    let jmax = cli.jmax.as_deref().map(|s| parse_j(s, "jmax")).transpose()?;
    let window = m_window.map(|s| parse_j(s, "m window")).transpose()?;
    let inputs = json!({
        "two_j": irrep.two_j, "method": format!("{method:?}"), "two_m_window": window,
        "compare_asymptotic": compare_asymptotic, "two_j_max": jmax,
    });
    if compare_asymptotic {
        let w = window.map_or(3, |tw| tw / 2);
        let table = asymptotic_dmatrix_report(&[irrep], w)?;
        let mut csv = String::from("j,m,m_prime,exact,asymptotic,relative_error\n");
        for r in &table.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_half(i64::from(r.two_j)),
                format_half(r.two_m),
                format_half(r.two_mp),
                fmt_f(r.exact),
                fmt_f(r.asymptotic),
                fmt_opt(r.relative_error)
            ));
        }
        return Ok((serde_json::to_value(&table).map_err(json_err)?, csv, inputs));
    }
    let d = match method {
        MethodArg::Auto => {
            let cfg = DConfig {
                two_j_max: jmax.unwrap_or(STABLE_TWO_J_CAP),
                ..DConfig::default()
            };
            let m = cfg.method_for(irrep)?;
            let cap = if m == DMethod::ExactRational { cfg.exact_cap } else { cfg.two_j_max };
            wigner_d_with_cap(irrep, m, cap)?
        }
        MethodArg::Exact => wigner_d_with_cap(irrep, DMethod::ExactRational, jmax.unwrap_or(EXACT_TWO_J_CAP))?,
        MethodArg::LogDomain => wigner_d_with_cap(irrep, DMethod::LogDomain, jmax.unwrap_or(LOG_DOMAIN_TWO_J_CAP))?,
        MethodArg::Recursion => wigner_d_with_cap(irrep, DMethod::Recursion, jmax.unwrap_or(STABLE_TWO_J_CAP))?,
    };
    let deviation = d.error_estimate().unwrap_or(f64::NAN);
    let n = irrep.dimension();
    let keep = |k: usize| window.is_none_or(|w| irrep.two_m_at(k).unsigned_abs() <= u64::from(w));
    let mut csv = String::from("kind,m,m_prime,value\n");
    let mut elements = Vec::new();
    for r in (0..n).filter(|&k| keep(k)) {
        for c in (0..n).filter(|&k| keep(k)) {
            let (m, mp) = (format_half(irrep.two_m_at(r)), format_half(irrep.two_m_at(c)));
            let v = d.matrix()[(r, c)];
            csv.push_str(&format!("element,{m},{mp},{}\n", fmt_f(v)));
            elements.push(json!([m, mp, v]));
        }
    }
    csv.push_str(&format!("unitarity_deviation,,,{}\n", fmt_f(deviation)));
    let payload = json!({
        "j": format_half(i64::from(irrep.two_j)),
        "method": d.method().name(),
        "unitarity_deviation": deviation,
        "elements": elements,
    });
    Ok((payload, csv, inputs))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProptestSummary {
    pub ensembles: u64,
    pub draws_per_ensemble: u64,
    pub violations: u64,
    pub worst_margin_general: f64,
    pub worst_margin_sum: f64,
    pub worst_margin_spin: f64,
    pub max_identity_residual: f64,
    pub min_spread: f64,
}

struct Batch {
    violations: u64,
    general: f64,
    sum: f64,
    spin: f64,
    residual: f64,
    spread: f64,
}

fn one_ensemble(seed: u64, index: u64, draws: u64, max_dim: usize) -> Result<Batch> {
    // One generator per ensemble, so the stream does not depend on scheduling.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let d1 = rng.random_range(2..=max_dim);
    let d2 = rng.random_range(2..=max_dim);
    let n_terms = rng.random_range(1..=6);
    let dims = crate::hilbert::HilbertDims::bipartite(d1, d2)?;
    let e = random_separable(dims, n_terms, rng.random())?;
    let rho = crate::witness::ensemble_to_density(&e)?;
    let mut b = Batch {
        violations: 0,
        general: f64::INFINITY,
        sum: f64::INFINITY,
        spin: f64::INFINITY,
        residual: 0.0,
        spread: f64::INFINITY,
    };
    for _ in 0..draws {
        let pairs = random_pairs(dims, &mut rng)?;
        let cfg = random_config(&mut rng);
        let g = general_criterion(&rho, &pairs, &cfg)?;
        let s = sum_criterion(&rho, &pairs)?;
        let dc = decomposition_check(&e, &pairs, &cfg)?;
        b.violations += u64::from(g.violated) + u64::from(s.violated);
        b.general = b.general.min(g.margin);
        b.sum = b.sum.min(s.margin);
        b.residual = b.residual.max(dc.residual);
        b.spread = b.spread.min(dc.u.s.min(dc.v.s));
    }
    let (j1, j2) = spin_irreps(dims)?;
    let sp = spin_criterion(&rho, j1, j2, SpinRhs::General)?;
    b.violations += u64::from(sp.violated);
    b.spin = sp.margin;
    Ok(b)
}

pub fn proptest(seed: u64, count: u64, draws: u64, max_dim: usize) -> Result<ProptestSummary> {
    let batches: Vec<Batch> = (0..count)
        .into_par_iter()
        .map(|i| one_ensemble(seed, i, draws, max_dim))
        .collect::<Result<_>>()?;
    let mut s = ProptestSummary {
        ensembles: count,
        draws_per_ensemble: draws,
        violations: 0,
        worst_margin_general: f64::INFINITY,
        worst_margin_sum: f64::INFINITY,
        worst_margin_spin: f64::INFINITY,
        max_identity_residual: 0.0,
        min_spread: f64::INFINITY,
    };
    for b in batches {
        s.violations += b.violations;
        s.worst_margin_general = s.worst_margin_general.min(b.general);
        s.worst_margin_sum = s.worst_margin_sum.min(b.sum);
        s.worst_margin_spin = s.worst_margin_spin.min(b.spin);
        s.max_identity_residual = s.max_identity_residual.max(b.residual);
        s.min_spread = s.min_spread.min(b.spread);
    }
    Ok(s)
}

fn proptest_csv(s: &ProptestSummary) -> String {
    format!(
        "ensembles,draws_per_ensemble,violations,worst_margin_general,worst_margin_sum,worst_margin_spin,max_identity_residual,min_spread\n{},{},{},{},{},{},{},{}\n",
        s.ensembles,
        s.draws_per_ensemble,
        s.violations,
        fmt_f(s.worst_margin_general),
        fmt_f(s.worst_margin_sum),
        fmt_f(s.worst_margin_spin),
        fmt_f(s.max_identity_residual),
        fmt_f(s.min_spread)
    )
}
