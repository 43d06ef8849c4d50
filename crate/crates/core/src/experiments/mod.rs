//! Seeded batch experiments over grids of `(n, alpha)` cells.
//!
//! Trial `t` of every cell with block length `ns[i]` uses the seed
//! `splitmix64(master_seed + i * trials + t)`. The seed does not depend on
//! `alpha`, so cells that share `n` see the same uniforms and their forbidden
//! sets are nested. Records come back in `(n, alpha, trial)` order whatever
//! the worker count.

mod config;
mod lemmas;
mod output;

use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{read_potential, read_system, ExperimentConfig, Source, SystemSpec};
pub use lemmas::{run_lemma_suite, Check, LemmaReport, Table, LEMMA_DELTA};
pub use output::{records_csv, write_records_csv, CSV_HEADER};

use crate::error::Error;
use crate::estimators::{
    entropy_typical_set, k_schedule, log_phi, log_psi, EstimatorParams, TypicalSet, WeightedBlocks,
};
use crate::logvalue::format_g12;
use crate::open_systems::{escape_rate, pressure_escape_identity, survival_curve};
use crate::random_sft::{hole_measure, sample_forbidden, splitmix64};
use crate::sft::{BlockIndex, Sft};
use crate::thermo::{gibbs_measure, GibbsData, Potential, PotentialSpec};

/// Deviation thresholds reported in every summary.
pub const EPSILONS: [f64; 3] = [0.02, 0.05, 0.1];

/// Largest acceptable gap in the pressure-escape identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Theorem1,
    Theorem2,
    Emptiness,
    Lemmas,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Theorem1 => "theorem1",
            Kind::Theorem2 => "theorem2",
            Kind::Emptiness => "emptiness",
            Kind::Lemmas => "lemmas",
        }
    }
}

/// The system, its potential on the presentation they share, and the
/// equilibrium state.
#[derive(Clone, Debug)]
pub struct Setup {
    pub system: SystemSpec,
    pub potential: PotentialSpec,
    pub sft: Sft,
    pub f: Potential,
    pub g: GibbsData,
}

impl Setup {
    pub fn new(system: SystemSpec, potential: PotentialSpec) -> Result<Self, Error> {
        let base = system.build()?;
        let (sft, f) = potential.bind(&base)?;
        let g = gibbs_measure(&sft, &f)?;
        Ok(Setup {
            system,
            potential,
            sft,
            f,
            g,
        })
    }

    pub fn from_config(config: &ExperimentConfig) -> Result<Self, Error> {
        Self::new(config.system_spec()?, config.potential_spec()?)
    }
}

/// One trial. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub n: usize,
    pub alpha: f64,
    pub trial: usize,
    pub seed: u64,
    pub empty: bool,
    /// `P_Y(f)`, `-inf` when `Y` is empty.
    pub p_y: f64,
    /// `P_X(f) + log alpha`.
    pub target: f64,
    /// `|P_Y - target|`; `inf` when `Y` is empty.
    pub dev_pressure: f64,
    /// Log spectral radius of the open transfer operator.
    pub rho_spec: f64,
    /// Regression slope of the log survival curve.
    pub rho_reg: f64,
    /// `|rho_spec - log alpha|`.
    pub dev_escape: f64,
    pub phi: f64,
    /// NaN when the typical set is empty or `alpha <= gamma0` without a
    /// `delta` override.
    pub psi: f64,
    pub mu_hole: f64,
    #[serde(skip)]
    pub k: usize,
    #[serde(skip)]
    pub log_phi: f64,
    #[serde(skip)]
    pub log_psi: f64,
    #[serde(skip)]
    pub identity_gap: f64,
}

impl TrialRecord {
    /// `k P_Y <= log phi`, up to rounding.
    pub fn upper_bracket_holds(&self) -> bool {
        if self.p_y == f64::NEG_INFINITY {
            return true;
        }
        let lhs = self.k as f64 * self.p_y;
        lhs <= self.log_phi + 1e-9 * self.log_phi.abs().max(1.0)
    }
}

/// Per-`n` data shared by all cells with that block length.
struct Blocks {
    n_index: usize,
    n: usize,
    k: usize,
    weighted: WeightedBlocks,
}

struct Cell<'a> {
    blocks: &'a Blocks,
    alpha: f64,
    /// `None` when `psi` is undefined for this cell.
    typical: Option<TypicalSet>,
}

pub fn trial_seed(master_seed: u64, n_index: usize, trials: usize, trial: usize) -> u64 {
    splitmix64(master_seed.wrapping_add((n_index * trials + trial) as u64))
}

fn cells<'a>(setup: &Setup, config: &ExperimentConfig, blocks: &'a [Blocks]) -> Vec<Cell<'a>> {
    let mut out = Vec::new();
    for b in blocks {
        for &alpha in &config.alpha {
            let typical = EstimatorParams::with_defaults(
                &setup.g,
                b.n,
                alpha,
                config.k_exponent,
                config.delta,
            )
            .ok()
            .map(|p| entropy_typical_set(&setup.g, &b.weighted.index, p.delta))
            .filter(|t| !t.is_empty());
            out.push(Cell {
                blocks: b,
                alpha,
                typical,
            });
        }
    }
    out
}

fn run_trial(
    setup: &Setup,
    cell: &Cell,
    trial: usize,
    seed: u64,
    survival_length: usize,
) -> Result<TrialRecord, Error> {
    let wb = &cell.blocks.weighted;
    let index = &wb.index;
    let (n, k, alpha) = (cell.blocks.n, cell.blocks.k, cell.alpha);
    let sample = sample_forbidden(index, alpha, seed)?;
    let identity = pressure_escape_identity(&setup.g, &setup.sft, &setup.f, index, &sample)?;
    let p_y = identity.pressure_y;
    let rho_spec = -identity.lhs;
    let rho_reg = escape_rate(&survival_curve(&setup.g, index, &sample, survival_length)?).to_f64();
    let target = setup.g.pressure + alpha.ln();
    let log_phi = log_phi(wb, &sample, k)?.to_f64();
    let log_psi = match &cell.typical {
        Some(t) => log_psi(wb, &sample, k, t)?.to_f64(),
        None => f64::NAN,
    };
    Ok(TrialRecord {
        n,
        alpha,
        trial,
        seed,
        empty: p_y == f64::NEG_INFINITY,
        p_y,
        target,
        dev_pressure: (p_y - target).abs(),
        rho_spec,
        rho_reg,
        dev_escape: (rho_spec - alpha.ln()).abs(),
        phi: log_phi.exp(),
        psi: log_psi.exp(),
        mu_hole: hole_measure(&setup.g, index, &sample)?,
        k,
        log_phi,
        log_psi,
        identity_gap: identity.gap,
    })
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(pool.install(job))
}

/// Runs every trial of every cell. Records are in `(n, alpha, trial)` order.
pub fn run_trials(
    setup: &Setup,
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<Vec<TrialRecord>, Error> {
    config.validate()?;
    let blocks: Vec<Blocks> = config
        .n
        .iter()
        .enumerate()
        .map(|(n_index, &n)| Blocks {
            n_index,
            n,
            k: k_schedule(n, config.k_exponent),
            weighted: WeightedBlocks::new(&setup.g, BlockIndex::new(&setup.sft, n)),
        })
        .collect();
    let cells = cells(setup, config, &blocks);
    let tasks: Vec<(&Cell, usize)> = cells
        .iter()
        .flat_map(|c| (0..config.trials).map(move |t| (c, t)))
        .collect();
    with_pool(workers, || {
        tasks
            .par_iter()
            .map(|&(cell, t)| {
                let seed = trial_seed(config.master_seed, cell.blocks.n_index, config.trials, t);
                run_trial(setup, cell, t, seed, config.survival_length)
            })
            .collect::<Result<Vec<_>, Error>>()
    })?
}

/// Deviation statistics over the non-empty trials of a cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deviations {
    /// `None` when every trial was empty.
    pub median: Option<f64>,
    /// Fraction of non-empty trials with deviation at least `EPSILONS[i]`.
    pub exceed: Vec<f64>,
}

impl Deviations {
    fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let median = match v.len() {
            0 => None,
            m if m % 2 == 1 => Some(v[m / 2]),
            m => Some((v[m / 2 - 1] + v[m / 2]) / 2.0),
        };
        let exceed = EPSILONS
            .iter()
            .map(|&e| v.iter().filter(|&&d| d >= e).count() as f64 / v.len().max(1) as f64)
            .collect();
        Deviations { median, exceed }
    }

    /// Fraction strictly below `eps`.
    pub fn within(&self, eps: f64) -> Option<f64> {
        let i = EPSILONS.iter().position(|&e| e == eps)?;
        Some(1.0 - self.exceed[i])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub trials: usize,
    pub nonempty: usize,
    pub empty_fraction: f64,
    pub pressure: Deviations,
    pub escape: Deviations,
    pub mean_mu_hole: f64,
    pub se_mu_hole: f64,
    /// `|mean mu(H) - (1 - alpha)| <= 3 se`.
    pub hole_mean_consistent: bool,
    pub max_identity_gap: f64,
    /// Trials violating `k P_Y <= log phi`.
    pub upper_bracket_violations: usize,
    /// Fraction of non-empty trials with `P_Y < (1/k) log psi - 0.025`.
    pub lower_bracket_violation_rate: Option<f64>,
    /// Largest `|rho_reg - rho_spec|` over trials with a finite spectral rate.
    pub max_regression_gap: f64,
}

fn summarize_cell(records: &[TrialRecord]) -> CellSummary {
    let first = &records[0];
    let nonempty: Vec<&TrialRecord> = records.iter().filter(|r| !r.empty).collect();
    let pressure = Deviations::of(&nonempty.iter().map(|r| r.dev_pressure).collect::<Vec<_>>());
    let escape = Deviations::of(&nonempty.iter().map(|r| r.dev_escape).collect::<Vec<_>>());
    let (mean, var) = crate::estimators::mean_var(records.iter().map(|r| r.mu_hole));
    let se = (var / records.len() as f64).sqrt();
    let se = if se.is_nan() { 0.0 } else { se };
    let lower: Vec<bool> = nonempty
        .iter()
        .filter(|r| !r.log_psi.is_nan() && r.log_psi.is_finite())
        .map(|r| r.p_y < r.log_psi / r.k as f64 - 0.025)
        .collect();
    CellSummary {
        n: first.n,
        k: first.k,
        alpha: first.alpha,
        trials: records.len(),
        nonempty: nonempty.len(),
        empty_fraction: 1.0 - nonempty.len() as f64 / records.len() as f64,
        pressure,
        escape,
        mean_mu_hole: mean,
        se_mu_hole: se,
        hole_mean_consistent: (mean - (1.0 - first.alpha)).abs() <= 3.0 * se + 1e-12,
        max_identity_gap: records.iter().map(|r| r.identity_gap).fold(0.0, f64::max),
        upper_bracket_violations: records.iter().filter(|r| !r.upper_bracket_holds()).count(),
        lower_bracket_violation_rate: (!lower.is_empty())
            .then(|| lower.iter().filter(|&&v| v).count() as f64 / lower.len() as f64),
        max_regression_gap: records
            .iter()
            .filter(|r| r.rho_spec.is_finite())
            .map(|r| (r.rho_reg - r.rho_spec).abs())
            .fold(0.0, f64::max),
    }
}

/// Summaries in record order, one per `(n, alpha)` cell.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    records
        .chunk_by(|a, b| a.n == b.n && a.alpha == b.alpha)
        .map(summarize_cell)
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub kind: Kind,
    pub epsilons: [f64; 3],
    pub cells: Vec<CellSummary>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn trend_checks(kind: Kind, config: &ExperimentConfig, cells: &[CellSummary]) -> Vec<Check> {
    let mut checks = Vec::new();
    let at = |n: usize, alpha: f64| cells.iter().find(|c| c.n == n && c.alpha == alpha);
    match kind {
        Kind::Theorem1 => {
            for &alpha in &config.alpha {
                let medians: Vec<Option<f64>> = config
                    .n
                    .iter()
                    .map(|&n| at(n, alpha).and_then(|c| c.pressure.median))
                    .collect();
                if medians.len() < 2 || alpha == 1.0 {
                    continue;
                }
                let (first, last) = (medians[0], medians[medians.len() - 1]);
                checks.push(Check::new(
                    format!("median pressure deviation decreases in n (alpha = {alpha})"),
                    matches!((first, last), (Some(a), Some(b)) if b < a),
                    format!("medians {medians:?}"),
                ));
            }
            let bad: usize = cells.iter().map(|c| c.upper_bracket_violations).sum();
            checks.push(Check::new(
                "k P_Y <= log phi on every trial",
                bad == 0,
                format!("{bad} violations"),
            ));
        }
        Kind::Theorem2 => {
            let gap = cells.iter().map(|c| c.max_identity_gap).fold(0.0, f64::max);
            checks.push(Check::new(
                "pressure-escape identity on every trial",
                gap <= IDENTITY_TOLERANCE,
                format!("max gap {gap:e}"),
            ));
            let off: Vec<String> = cells
                .iter()
                .filter(|c| !c.hole_mean_consistent)
                .map(|c| format!("n={} alpha={}", c.n, c.alpha))
                .collect();
            checks.push(Check::new(
                "mean hole measure within 3 se of 1 - alpha",
                off.is_empty(),
                format!("inconsistent cells: {off:?}"),
            ));
        }
        Kind::Emptiness => {
            let g12_list = |xs: &[f64]| {
                xs.iter()
                    .map(|&x| format_g12(x))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let mut sorted = config.alpha.clone();
            sorted.sort_by(f64::total_cmp);
            for &n in &config.n {
                let fr: Vec<f64> = sorted
                    .iter()
                    .filter_map(|&a| at(n, a))
                    .map(|c| c.empty_fraction)
                    .collect();
                checks.push(Check::new(
                    format!("emptiness non-increasing in alpha (n = {n})"),
                    fr.windows(2).all(|w| w[1] <= w[0]),
                    format!(
                        "fractions [{}] for alpha [{}]",
                        g12_list(&fr),
                        g12_list(&sorted)
                    ),
                ));
            }
        }
        Kind::Lemmas => {}
    }
    checks
}

/// `P_X`, `h`, `gamma0` and the exact parameter set of a run, enough to
/// recompute every target column.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub kind: Kind,
    pub version: &'static str,
    pub system: SystemSpec,
    pub potential: PotentialSpec,
    pub presentation_size: usize,
    pub pressure: f64,
    pub entropy: f64,
    pub integral_f: f64,
    pub gamma0: f64,
    pub gamma_n0: Option<usize>,
    pub gamma_offset: usize,
    pub gibbs_k: f64,
    pub gibbs_length: usize,
    pub g0: Option<usize>,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub alpha: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub k_exponent: f64,
    pub delta: Option<f64>,
    #[serde(rename = "L")]
    pub survival_length: usize,
    pub seed_rule: &'static str,
}

impl Header {
    pub fn new(kind: Kind, setup: &Setup, config: &ExperimentConfig) -> Self {
        let g = &setup.g;
        Header {
            kind,
            version: env!("CARGO_PKG_VERSION"),
            system: setup.system.clone(),
            potential: setup.potential.clone(),
            presentation_size: setup.sft.size(),
            pressure: g.pressure,
            entropy: g.entropy,
            integral_f: g.integral_f,
            gamma0: g.gamma0(),
            gamma_n0: g.gamma.n0,
            gamma_offset: g.gamma.offset,
            gibbs_k: g.gibbs_k(),
            gibbs_length: g.constants.length,
            g0: g.constants.g0,
            n: config.n.clone(),
            k: config
                .n
                .iter()
                .map(|&n| k_schedule(n, config.k_exponent))
                .collect(),
            alpha: config.alpha.clone(),
            trials: config.trials,
            master_seed: config.master_seed,
            k_exponent: config.k_exponent,
            delta: config.delta,
            survival_length: config.survival_length,
            seed_rule: "splitmix64(master_seed + n_index * trials + trial)",
        }
    }
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub header: Header,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

fn range_warnings(setup: &Setup, config: &ExperimentConfig) -> Vec<String> {
    let gamma0 = setup.g.gamma0();
    config
        .alpha
        .iter()
        .filter(|&&a| a <= gamma0)
        .map(|a| {
            let msg = format!(
                "alpha = {a} is not above gamma0 = {gamma0:.6}; no convergence is expected"
            );
            warn!("{msg}");
            msg
        })
        .collect()
}

/// Runs a theorem or emptiness experiment in memory.
pub fn run_experiment(
    kind: Kind,
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<RunOutput, Error> {
    if kind == Kind::Lemmas {
        return Err(Error::Invalid(
            "use run_lemma_suite for the lemma suite".into(),
        ));
    }
    let setup = Setup::from_config(config)?;
    let warnings = match kind {
        Kind::Emptiness => Vec::new(),
        _ => range_warnings(&setup, config),
    };
    info!(
        "{}: {} cells x {} trials",
        kind.name(),
        config.n.len() * config.alpha.len(),
        config.trials
    );
    let records = run_trials(&setup, config, workers)?;
    let cells = summarize(&records);
    let checks = trend_checks(kind, config, &cells);
    Ok(RunOutput {
        header: Header::new(kind, &setup, config),
        records,
        summary: Summary {
            kind,
            epsilons: EPSILONS,
            cells,
            checks,
            warnings,
        },
    })
}

pub fn run_theorem1(config: &ExperimentConfig, workers: Option<usize>) -> Result<RunOutput, Error> {
    run_experiment(Kind::Theorem1, config, workers)
}

pub fn run_theorem2(config: &ExperimentConfig, workers: Option<usize>) -> Result<RunOutput, Error> {
    run_experiment(Kind::Theorem2, config, workers)
}

pub fn run_emptiness(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<RunOutput, Error> {
    run_experiment(Kind::Emptiness, config, workers)
}

/// Writes `records.csv`, `summary.json` and `header.json` into `dir`.
pub fn write_run(out: &RunOutput, dir: &Path) -> Result<(), Error> {
    output::create_dir(dir)?;
    write_records_csv(&out.records, &dir.join("records.csv"))?;
    output::write_json(&out.summary, &dir.join("summary.json"))?;
    output::write_json(&out.header, &dir.join("header.json"))
}

/// Writes the lemma report as `summary.json` next to `header.json`.
pub fn write_lemma_report(header: &Header, report: &LemmaReport, dir: &Path) -> Result<(), Error> {
    output::create_dir(dir)?;
    output::write_json(report, &dir.join("summary.json"))?;
    output::write_json(header, &dir.join("header.json"))
}
