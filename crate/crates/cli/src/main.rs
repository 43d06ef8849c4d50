use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rsft::estimators::{
    entropy_typical_set, exact_moments, log_phi, log_psi, monte_carlo_moments, EstimatorParams,
    WeightedBlocks, DEFAULT_K_EXPONENT,
};
use rsft::experiments::{self, ExperimentConfig, Kind, Setup, SystemSpec};
use rsft::logvalue::format_g12;
use rsft::open_systems::{
    escape_rate, escape_rate_spectral, pressure_escape_identity, survival_curve,
};
use rsft::random_sft::sample_forbidden;
use rsft::repeats::{find_repeats, repeat_area_bound_check, repeat_cover, Pattern};
use rsft::sft::{count_words, is_mixing, BlockIndex};
use rsft::thermo::{pressure, PotentialSpec};

#[derive(Parser)]
#[command(
    name = "rsft",
    version,
    about = "Random subshifts of finite type: pressure, estimators and escape rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect an SFT.
    Sft {
        #[command(subcommand)]
        action: SftAction,
    },
    /// Pressure and equilibrium states.
    Thermo {
        #[command(subcommand)]
        action: ThermoAction,
    },
    /// Draw a random forbidden set.
    Sample(SampleArgs),
    /// Repeat covers of a word.
    Repeats {
        #[command(subcommand)]
        action: RepeatsAction,
    },
    /// The phi and psi estimators and their moments.
    Estimators {
        #[command(subcommand)]
        action: EstimatorsAction,
    },
    /// Survival curve and escape rate through a random hole.
    #[command(args_conflicts_with_subcommands = true)]
    Escape {
        #[command(flatten)]
        args: EscapeArgs,
        #[command(subcommand)]
        action: Option<EscapeAction>,
    },
    /// Seeded batch experiments.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// SFT file (TOML). Defaults to the golden mean shift.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Potential file (TOML). Defaults to zero.
    #[arg(long)]
    potential: Option<PathBuf>,
}

impl SystemArgs {
    fn system(&self) -> Result<SystemSpec> {
        match &self.spec {
            Some(p) => Ok(experiments::read_system(p)?),
            None => Ok(SystemSpec::golden_mean()),
        }
    }

    fn setup(&self) -> Result<Setup> {
        let potential = match &self.potential {
            Some(p) => experiments::read_potential(p)?,
            None => PotentialSpec::zero(),
        };
        Ok(Setup::new(self.system()?, potential)?)
    }
}

#[derive(Subcommand)]
enum SftAction {
    /// Symbol count, transition count, mixing flag and |B_m| for m = 1..10.
    Info {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Subcommand)]
enum ThermoAction {
    /// P_X(f).
    Pressure(SystemArgs),
    /// Equilibrium data; with --emit-csv, the table symbol,pi,Q(symbol, .).
    Gibbs {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        emit_csv: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Hex,
    Words,
    Both,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
    /// What to print.
    #[arg(long, value_enum, default_value = "both")]
    emit: Emit,
}

#[derive(Subcommand)]
enum RepeatsAction {
    /// Greedy repeat cover, its area and the size and area bounds.
    Cover {
        #[arg(long)]
        word: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct CellArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    n: usize,
    /// Defaults to floor(n^1.5).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: f64,
    /// Tolerance of the typical set; defaults to log(alpha/gamma)/8.
    #[arg(long)]
    delta: Option<f64>,
}

impl CellArgs {
    fn params(&self, setup: &Setup) -> Result<EstimatorParams> {
        let mut p = EstimatorParams::with_defaults(
            &setup.g,
            self.n,
            self.alpha,
            DEFAULT_K_EXPONENT,
            self.delta,
        )?;
        if let Some(k) = self.k {
            p = EstimatorParams::new(self.n, k, self.alpha, p.delta, p.gamma)?;
        }
        Ok(p)
    }
}

#[derive(Subcommand)]
enum EstimatorsAction {
    /// phi and psi for one seeded forbidden set.
    Phi {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long)]
        seed: u64,
    },
    /// Means and variances, exact or Monte Carlo.
    Moments {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long, conflicts_with = "mc", required_unless_present = "mc")]
        exact: bool,
        /// Number of Monte Carlo trials.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct EscapeArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Survival curve length.
    #[arg(long = "L", default_value_t = 400)]
    len: usize,
    /// Print the curve as ell,survival,log_survival.
    #[arg(long)]
    emit_csv: bool,
}

#[derive(Subcommand)]
enum EscapeAction {
    /// Both sides of -escape rate = P_X - P_Y.
    Identity(EscapeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Theorem1,
    Theorem2,
    Emptiness,
    Lemmas,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "RSFT_WORKERS")]
    workers: Option<usize>,
}

fn sft_info(spec: &Path, out: &mut impl Write) -> Result<()> {
    let x = experiments::read_system(spec)?.build()?;
    writeln!(out, "symbols\t{}", x.size())?;
    writeln!(out, "transitions\t{}", x.transition_count())?;
    writeln!(out, "mixing\t{}", !x.is_empty() && is_mixing(&x)?)?;
    for m in 1..=10 {
        writeln!(out, "B_{m}\t{}", count_words(&x, m))?;
    }
    Ok(())
}

fn thermo(action: &ThermoAction, out: &mut impl Write) -> Result<()> {
    match action {
        ThermoAction::Pressure(system) => {
            let base = system.system()?.build()?;
            let spec = match &system.potential {
                Some(p) => experiments::read_potential(p)?,
                None => PotentialSpec::zero(),
            };
            let (x, f) = spec.bind(&base)?;
            writeln!(out, "{}", format_g12(pressure(&x, &f).to_f64()))?;
        }
        ThermoAction::Gibbs { system, emit_csv } => {
            let s = system.setup()?;
            let g = &s.g;
            if *emit_csv {
                let cols: Vec<String> = (0..g.size()).map(|b| format!("Q{b}")).collect();
                writeln!(out, "symbol,pi,{}", cols.join(","))?;
                for a in 0..g.size() {
                    let row: Vec<String> = (0..g.size())
                        .map(|b| format_g12(g.q(a as u32, b as u32)))
                        .collect();
                    writeln!(out, "{a},{},{}", format_g12(g.pi[a]), row.join(","))?;
                }
            } else {
                writeln!(out, "pressure\t{}", format_g12(g.pressure))?;
                writeln!(out, "entropy\t{}", format_g12(g.entropy))?;
                writeln!(out, "integral_f\t{}", format_g12(g.integral_f))?;
                writeln!(out, "gibbs_k\t{}", format_g12(g.gibbs_k()))?;
                writeln!(
                    out,
                    "g0\t{}",
                    g.constants.g0.map_or("none".into(), |v| v.to_string())
                )?;
                writeln!(out, "gamma0\t{}", format_g12(g.gamma0()))?;
                writeln!(
                    out,
                    "gamma_n0\t{}",
                    g.gamma.n0.map_or("none".into(), |v| v.to_string())
                )?;
                writeln!(out, "gamma_offset\t{}", g.gamma.offset)?;
            }
        }
    }
    Ok(())
}

fn sample(a: &SampleArgs, out: &mut impl Write) -> Result<()> {
    let s = a.system.setup()?;
    let index = BlockIndex::new(&s.sft, a.n);
    let f = sample_forbidden(&index, a.alpha, a.seed)?;
    if matches!(a.emit, Emit::Hex | Emit::Both) {
        writeln!(out, "{}", f.to_hex())?;
    }
    if matches!(a.emit, Emit::Words | Emit::Both) {
        for i in f.forbidden_indices() {
            writeln!(out, "{}", s.sft.decode(index.word(i)))?;
        }
    }
    Ok(())
}

fn repeats(action: &RepeatsAction, out: &mut impl Write) -> Result<()> {
    let RepeatsAction::Cover { word, n } = action;
    if *n == 0 {
        bail!("n must be positive");
    }
    let p = Pattern::contiguous(word.chars().collect::<Vec<_>>());
    let cover = repeat_cover(&p, *n);
    writeln!(out, "repeats\t{}", find_repeats(&p, *n).len())?;
    for r in &cover.pairs {
        writeln!(
            out,
            "pair\t{:?}\t{:?}",
            r.first_interval(*n),
            r.second_interval(*n)
        )?;
    }
    let area: Vec<String> = cover
        .area()
        .parts()
        .iter()
        .map(|r| format!("{r:?}"))
        .collect();
    writeln!(out, "area\t{}\t|A|={}", area.join(" "), cover.area().len())?;
    let len = word.chars().count();
    writeln!(
        out,
        "size_bound\t|R|={} <= 4|F|/n={}\t{}",
        cover.len(),
        format_g12(4.0 * len as f64 / *n as f64),
        if cover.len() * n <= 4 * len {
            "ok"
        } else {
            "violated"
        }
    )?;
    match repeat_area_bound_check(&p, *n, &cover) {
        Some(slack) => writeln!(
            out,
            "area_bound\tslack {slack}\t{}",
            if slack >= 0 { "ok" } else { "violated" }
        )?,
        None => writeln!(out, "area_bound\tvacuous (no repeats)")?,
    }
    Ok(())
}

fn estimators(action: &EstimatorsAction, out: &mut impl Write) -> Result<()> {
    match action {
        EstimatorsAction::Phi { cell, seed } => {
            let s = cell.system.setup()?;
            let p = cell.params(&s)?;
            let wb = WeightedBlocks::new(&s.g, BlockIndex::new(&s.sft, p.n));
            let typical = entropy_typical_set(&s.g, &wb.index, p.delta);
            let f = sample_forbidden(&wb.index, p.alpha, *seed)?;
            let lphi = log_phi(&wb, &f, p.k)?.to_f64();
            let lpsi = if typical.is_empty() {
                f64::NAN
            } else {
                log_psi(&wb, &f, p.k, &typical)?.to_f64()
            };
            writeln!(out, "n,k,alpha,seed,phi,psi,log_phi,log_psi")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.n,
                p.k,
                format_g12(p.alpha),
                seed,
                format_g12(lphi.exp()),
                format_g12(lpsi.exp()),
                format_g12(lphi),
                format_g12(lpsi)
            )?;
        }
        EstimatorsAction::Moments { cell, mc, seed, .. } => {
            let s = cell.system.setup()?;
            let p = cell.params(&s)?;
            let wb = WeightedBlocks::new(&s.g, BlockIndex::new(&s.sft, p.n));
            let typical = entropy_typical_set(&s.g, &wb.index, p.delta);
            match mc {
                None => {
                    let m = exact_moments(&s.sft, &s.g, &wb, &p, &typical)?;
                    let opt = |v: Option<f64>| format_g12(v.unwrap_or(f64::NAN));
                    writeln!(
                        out,
                        "n,k,alpha,E_phi,Var_phi,E_psi,Var_psi,phi_lower_bound,psi_lower_bound"
                    )?;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        m.n,
                        m.k,
                        format_g12(m.alpha),
                        format_g12(m.e_phi),
                        opt(m.var_phi),
                        format_g12(m.e_psi),
                        opt(m.var_psi),
                        format_g12(m.phi_lower_bound),
                        format_g12(m.psi_lower_bound)
                    )?;
                }
                Some(trials) => {
                    let m = monte_carlo_moments(&wb, &p, &typical, *trials, *seed)?;
                    writeln!(out, "n,k,alpha,trials,mean_phi,se_phi,mean_psi,se_psi")?;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        p.n,
                        p.k,
                        format_g12(p.alpha),
                        m.trials,
                        format_g12(m.mean_phi),
                        format_g12(m.se_phi()),
                        format_g12(m.mean_psi),
                        format_g12(m.se_psi())
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn escape(args: &EscapeArgs, identity: bool, out: &mut impl Write) -> Result<()> {
    let s = args.system.setup()?;
    let index = BlockIndex::new(&s.sft, args.n);
    let f = sample_forbidden(&index, args.alpha, args.seed)?;
    if identity {
        let id = pressure_escape_identity(&s.g, &s.sft, &s.f, &index, &f)?;
        writeln!(out, "lhs\t{}", format_g12(id.lhs))?;
        writeln!(out, "rhs\t{}", format_g12(id.rhs))?;
        writeln!(out, "gap\t{}", format_g12(id.gap))?;
        return Ok(());
    }
    let curve = survival_curve(&s.g, &index, &f, args.len)?;
    if args.emit_csv {
        writeln!(out, "ell,survival,log_survival")?;
        for (i, v) in curve.log_values.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                i + 1,
                format_g12(v.exp()),
                format_g12(v.to_f64())
            )?;
        }
    } else {
        writeln!(
            out,
            "rho_spec\t{}",
            format_g12(escape_rate_spectral(&s.g, &index, &f).to_f64())
        )?;
        writeln!(out, "rho_reg\t{}", format_g12(escape_rate(&curve).to_f64()))?;
        writeln!(out, "log_alpha\t{}", format_g12(args.alpha.ln()))?;
    }
    Ok(())
}

fn experiment(a: &ExperimentArgs, out: &mut impl Write) -> Result<()> {
    let config = ExperimentConfig::from_path(&a.config)?;
    let dir = a
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(|o| config.base_dir.join(o)))
        .context("no output directory: pass --out or set `out` in the config")?;
    let kind = match a.kind {
        ExperimentKind::Theorem1 => Kind::Theorem1,
        ExperimentKind::Theorem2 => Kind::Theorem2,
        ExperimentKind::Emptiness => Kind::Emptiness,
        ExperimentKind::Lemmas => Kind::Lemmas,
    };
    if kind == Kind::Lemmas {
        let (header, report) = experiments::run_lemma_suite(&config, a.workers)?;
        experiments::write_lemma_report(&header, &report, &dir)?;
        write!(out, "{}", report.render())?;
        return Ok(());
    }
    let run = experiments::run_experiment(kind, &config, a.workers)?;
    experiments::write_run(&run, &dir)?;
    writeln!(out, "n\tk\talpha\tempty\tmedian_dev_P\twithin_0.05_P\tmedian_dev_rho\twithin_0.05_rho\tmean_mu_H")?;
    let opt = |v: Option<f64>| format_g12(v.unwrap_or(f64::NAN));
    for c in &run.summary.cells {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.n,
            c.k,
            format_g12(c.alpha),
            format_g12(c.empty_fraction),
            opt(c.pressure.median),
            opt(c.pressure.within(0.05)),
            opt(c.escape.median),
            opt(c.escape.within(0.05)),
            format_g12(c.mean_mu_hole)
        )?;
    }
    for c in &run.summary.checks {
        writeln!(
            out,
            "{} {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    for w in &run.summary.warnings {
        writeln!(out, "warning: {w}")?;
    }
    writeln!(out, "wrote {}", dir.display())?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Sft {
            action: SftAction::Info { spec },
        } => sft_info(spec, &mut out),
        Command::Thermo { action } => thermo(action, &mut out),
        Command::Sample(a) => sample(a, &mut out),
        Command::Repeats { action } => repeats(action, &mut out),
        Command::Estimators { action } => estimators(action, &mut out),
        Command::Escape { args, action } => match action {
            Some(EscapeAction::Identity(a)) => escape(a, true, &mut out),
            None => escape(args, false, &mut out),
        },
        Command::Experiment(a) => experiment(a, &mut out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
