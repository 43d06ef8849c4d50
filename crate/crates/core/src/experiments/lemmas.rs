//! The lemma suite: PASS/FAIL checks for the claims that hold exactly at every
//! size, and REPORT tables for the asymptotic ones.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::{
    run_trials, summarize, with_pool, ExperimentConfig, Header, Kind, Setup, IDENTITY_TOLERANCE,
};
use crate::error::{Error, EstimatorError};
use crate::estimators::{
    class_tables, entropy_typical_set, exact_moments, EstimatorParams, WeightedBlocks,
};
use crate::logvalue::format_g12;
use crate::random_sft::{splitmix64, UniformStream};
use crate::repeats::{
    block_decomposition, find_repeats, repeat_area_bound_check, repeat_cover, Pattern,
};
use crate::sft::{BlockIndex, Symbol};
use crate::thermo::GibbsData;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `PASS`/`FAIL` lines followed by the report tables.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        for t in &self.tables {
            let _ = writeln!(s, "\nREPORT {}", t.name);
            let _ = writeln!(s, "{}", t.columns.join("\t"));
            for r in &t.rows {
                let cells: Vec<String> = r.iter().map(|&x| format_g12(x)).collect();
                let _ = writeln!(s, "{}", cells.join("\t"));
            }
        }
        s
    }
}

fn below(rng: &mut UniformStream, m: usize) -> usize {
    ((rng.next_f64() * m as f64) as usize).min(m - 1)
}

#[derive(Debug, Default)]
struct RepeatFuzz {
    cases: usize,
    cover_failures: usize,
    size_failures: usize,
    area_checked: usize,
    area_failures: usize,
}

/// Random patterns of length at most 40 over 2 or 3 letters with
/// `2 <= n <= 5`, checked against `find_repeats`.
fn fuzz_repeat_covers(cases: usize, seed: u64) -> RepeatFuzz {
    let mut rng = UniformStream::new(seed);
    let mut out = RepeatFuzz {
        cases,
        ..Default::default()
    };
    for _ in 0..cases {
        let len = 1 + below(&mut rng, 40);
        let q = 2 + below(&mut rng, 2);
        let n = 2 + below(&mut rng, 4);
        let word: Vec<u8> = (0..len).map(|_| below(&mut rng, q) as u8).collect();
        let p = Pattern::contiguous(word);
        let repeats = find_repeats(&p, n);
        let cover = repeat_cover(&p, n);
        let area = cover.area();
        let listed: HashSet<_> = repeats.iter().map(|r| (r.first, r.second)).collect();
        let valid = cover
            .pairs
            .iter()
            .all(|r| listed.contains(&(r.first, r.second)))
            && repeats
                .iter()
                .all(|r| area.contains_range(&r.second_interval(n)));
        if !valid {
            out.cover_failures += 1;
        }
        if cover.len() * n > 4 * len {
            out.size_failures += 1;
        }
        if let Some(slack) = repeat_area_bound_check(&p, n, &cover) {
            out.area_checked += 1;
            if slack < 0 {
                out.area_failures += 1;
            }
        }
    }
    out
}

/// Draws a word of length `len` from the Markov measure.
fn sample_word(g: &GibbsData, rng: &mut UniformStream, len: usize) -> Vec<Symbol> {
    let pick = |weights: &mut dyn Iterator<Item = (Symbol, f64)>, u: f64| {
        let mut acc = 0.0;
        let mut last = 0;
        for (s, w) in weights {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = s;
            if u < acc {
                return s;
            }
        }
        last
    };
    let mut w = Vec::with_capacity(len);
    let first = pick(
        &mut g.pi.iter().enumerate().map(|(a, &p)| (a as Symbol, p)),
        rng.next_f64(),
    );
    w.push(first);
    while w.len() < len {
        let a = *w.last().expect("non-empty");
        let u = rng.next_f64();
        w.push(pick(&mut g.successors(a).map(|b| (b, g.q(a, b))), u));
    }
    w
}

#[derive(Debug, Default)]
struct BlockFuzz {
    cases: usize,
    nontrivial: usize,
    failures: usize,
    min_slack: f64,
}

/// `mu(b) <= K^{2N} prod mu(blocks)` on repeat decompositions of words
/// drawn from `mu`.
fn fuzz_block_bound(g: &GibbsData, cases: usize, seed: u64) -> Result<BlockFuzz, Error> {
    let mut rng = UniformStream::new(seed);
    let k = g.gibbs_k();
    let mut out = BlockFuzz {
        cases,
        min_slack: f64::INFINITY,
        ..Default::default()
    };
    for _ in 0..cases {
        let len = 2 + below(&mut rng, 39);
        let n = 2 + below(&mut rng, 4);
        let b = sample_word(g, &mut rng, len);
        let cover = repeat_cover(&Pattern::contiguous(b.clone()), n);
        let d = block_decomposition(len, &cover.area())?;
        if d.repeated_blocks() > 0 {
            out.nontrivial += 1;
        }
        let slack = crate::repeats::birthday_bound_check(g, &b, &d, k);
        out.min_slack = out.min_slack.min(slack);
        if slack < -1e-9 {
            out.failures += 1;
        }
    }
    Ok(out)
}

/// Tolerance of the typical set in the exact cells unless the config
/// overrides it. The default `log(alpha/gamma)/8` is below every entropy
/// deviation of the golden mean at `n <= 6`, which would leave `E_n` empty.
pub const LEMMA_DELTA: f64 = 0.1;

fn exact_cells(
    setup: &Setup,
    config: &ExperimentConfig,
    checks: &mut Vec<Check>,
    tables: &mut Vec<Table>,
) -> Result<(), Error> {
    let g = &setup.g;
    let mut growth = Table::new(
        "estimator expectations and variance ratios",
        &[
            "n",
            "k",
            "alpha",
            "log_E_phi_per_k",
            "log_E_psi_per_k",
            "P_plus_log_alpha",
            "var_over_mean2_phi",
            "var_over_mean2_psi",
        ],
    );
    let mut typical_t = Table::new("entropy-typical sets", &["n", "delta", "size", "measure"]);
    let mut anchored_t = Table::new(
        "anchored words and overlapping anchored pairs",
        &[
            "n",
            "k",
            "alpha",
            "mu_G",
            "lower",
            "upper",
            "overlap",
            "overlap_bound",
        ],
    );
    let mut class_rows = Vec::new();
    let (mut phi_ok, mut psi_ok, mut computed, mut skipped) = (true, true, 0usize, Vec::new());
    let mut worst_phi = f64::INFINITY;
    let mut worst_psi = f64::INFINITY;

    for &n in &config.lemma_n {
        let wb = WeightedBlocks::new(g, BlockIndex::new(&setup.sft, n));
        let mut class_done = false;
        for &alpha in &config.alpha {
            let delta = Some(config.delta.unwrap_or(LEMMA_DELTA));
            let params = match EstimatorParams::with_defaults(g, n, alpha, config.k_exponent, delta)
            {
                Ok(p) => p,
                Err(EstimatorError::AlphaBelowGamma { .. }) => {
                    skipped.push(format!("n={n} alpha={alpha} (alpha <= gamma0)"));
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let typical = entropy_typical_set(g, &wb.index, params.delta);
            let m = match exact_moments(&setup.sft, g, &wb, &params, &typical) {
                Ok(m) => m,
                Err(
                    e @ (EstimatorError::GuardExceeded { .. } | EstimatorError::EmptyTypicalSet),
                ) => {
                    skipped.push(format!("n={n} alpha={alpha} ({e})"));
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            computed += 1;
            phi_ok &= m.phi_bound_holds();
            psi_ok &= m.psi_bound_holds();
            worst_phi = worst_phi.min(m.e_phi / m.phi_lower_bound);
            worst_psi = worst_psi.min(m.e_psi / m.psi_lower_bound);
            let kf = params.k as f64;
            growth.rows.push(vec![
                n as f64,
                kf,
                alpha,
                m.e_phi.ln() / kf,
                m.e_psi.ln() / kf,
                g.pressure + alpha.ln(),
                m.var_phi.map_or(f64::NAN, |v| v / (m.e_phi * m.e_phi)),
                m.var_psi.map_or(f64::NAN, |v| v / (m.e_psi * m.e_psi)),
            ]);
            if !class_done {
                typical_t.rows.push(vec![
                    n as f64,
                    params.delta,
                    typical.len() as f64,
                    typical.measure,
                ]);
                if let Ok(t) = class_tables(&setup.sft, g, &wb, &params, &typical) {
                    anchored_t.rows.push(vec![
                        n as f64,
                        kf,
                        alpha,
                        t.anchored_measure,
                        t.anchored_lower,
                        t.anchored_upper,
                        t.overlapping_anchored,
                        t.overlapping_anchored_bound,
                    ]);
                    let mut ct = Table::new(
                        format!("word and pair classes by window count (n = {n}, k = {}, alpha = {alpha})", params.k),
                        &[
                            "j",
                            "words",
                            "words_bound",
                            "pairs",
                            "pairs_bound",
                            "anchored_pairs",
                            "anchored_pairs_bound",
                        ],
                    );
                    for r in &t.rows {
                        ct.rows.push(vec![
                            r.j as f64,
                            r.words,
                            r.words_bound,
                            r.pairs,
                            r.pairs_bound,
                            r.anchored_pairs,
                            r.anchored_pairs_bound,
                        ]);
                    }
                    class_rows.push(ct);
                }
                class_done = true;
            }
        }
    }
    let detail = |worst: f64| {
        let mut d = format!(
            "{computed} exact cells, smallest mean/bound ratio {}",
            format_g12(worst)
        );
        if !skipped.is_empty() {
            let _ = write!(d, "; skipped {}", skipped.join(", "));
        }
        d
    };
    checks.push(Check::new(
        "E[phi] >= alpha^ell e^{Pk} / K",
        computed > 0 && phi_ok,
        detail(worst_phi),
    ));
    checks.push(Check::new(
        "E[psi] >= alpha^ell e^{Pk} mu(G) / (K |E_n|)",
        computed > 0 && psi_ok,
        detail(worst_psi),
    ));
    tables.push(growth);
    tables.push(typical_t);
    tables.push(anchored_t);
    tables.extend(class_rows);
    Ok(())
}

pub fn run_lemma_suite(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<(Header, LemmaReport), Error> {
    config.validate()?;
    let setup = Setup::from_config(config)?;
    let mut checks = Vec::new();
    let mut tables = Vec::new();

    let seed = splitmix64(config.master_seed);
    let r = fuzz_repeat_covers(config.fuzz_cases, seed);
    checks.push(Check::new(
        "repeat cover covers every repeat",
        r.cover_failures == 0,
        format!("{} of {} patterns failed", r.cover_failures, r.cases),
    ));
    checks.push(Check::new(
        "repeat cover size |R| <= 4|F|/n",
        r.size_failures == 0,
        format!("{} of {} patterns failed", r.size_failures, r.cases),
    ));
    checks.push(Check::new(
        "repeat area |A(R)| >= a + n - j - 1",
        r.area_failures == 0,
        format!(
            "{} of {} patterns with repeats failed",
            r.area_failures, r.area_checked
        ),
    ));
    let b = fuzz_block_bound(&setup.g, config.fuzz_cases, splitmix64(seed))?;
    checks.push(Check::new(
        "block decomposition bound mu(b) <= K^{2N} prod mu(blocks)",
        b.failures == 0,
        format!(
            "{} of {} decompositions failed ({} with N > 0), smallest log-slack {}",
            b.failures,
            b.cases,
            b.nontrivial,
            format_g12(b.min_slack)
        ),
    ));

    with_pool(workers, || {
        exact_cells(&setup, config, &mut checks, &mut tables)
    })??;

    let mut trial_config = config.clone();
    trial_config.n = config.lemma_n.clone();
    let records = run_trials(&setup, &trial_config, workers)?;
    let cells = summarize(&records);
    let bad: usize = cells.iter().map(|c| c.upper_bracket_violations).sum();
    checks.push(Check::new(
        "k P_Y <= log phi on every trial",
        bad == 0,
        format!("{bad} of {} trials violate it", records.len()),
    ));
    let gap = cells.iter().map(|c| c.max_identity_gap).fold(0.0, f64::max);
    checks.push(Check::new(
        "pressure-escape identity on every trial",
        gap <= IDENTITY_TOLERANCE,
        format!("max gap {gap:e} over {} trials", records.len()),
    ));
    let off: Vec<String> = cells
        .iter()
        .filter(|c| !c.hole_mean_consistent)
        .map(|c| format!("n={} alpha={}", c.n, c.alpha))
        .collect();
    checks.push(Check::new(
        "mean hole measure within 3 se of 1 - alpha",
        off.is_empty(),
        if off.is_empty() {
            format!("{} cells", cells.len())
        } else {
            format!("inconsistent: {}", off.join(", "))
        },
    ));

    let mut bracket = Table::new(
        "pressure lower bracket P_Y >= (1/k) log psi - 0.025",
        &[
            "n",
            "k",
            "alpha",
            "empty_fraction",
            "mean_P_Y",
            "mean_log_psi_per_k",
            "violation_rate",
        ],
    );
    for c in &cells {
        let nonempty: Vec<_> = records
            .iter()
            .filter(|r| r.n == c.n && r.alpha == c.alpha && !r.empty)
            .collect();
        let m = nonempty.len().max(1) as f64;
        let psi: Vec<f64> = nonempty
            .iter()
            .map(|r| r.log_psi / r.k as f64)
            .filter(|x| x.is_finite())
            .collect();
        bracket.rows.push(vec![
            c.n as f64,
            c.k as f64,
            c.alpha,
            c.empty_fraction,
            nonempty.iter().map(|r| r.p_y).sum::<f64>() / m,
            if psi.is_empty() {
                f64::NAN
            } else {
                psi.iter().sum::<f64>() / psi.len() as f64
            },
            c.lower_bracket_violation_rate.unwrap_or(f64::NAN),
        ]);
    }
    tables.push(bracket);

    Ok((
        Header::new(Kind::Lemmas, &setup, &trial_config),
        LemmaReport { checks, tables },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SystemSpec;
    use crate::thermo::PotentialSpec;
    use std::collections::BTreeMap;

    #[test]
    fn fuzzers_find_no_counterexamples() {
        let r = fuzz_repeat_covers(500, 3);
        assert_eq!(
            (r.cover_failures, r.size_failures, r.area_failures),
            (0, 0, 0)
        );
        assert!(r.area_checked > 100);
        let setup = Setup::new(SystemSpec::golden_mean(), PotentialSpec::zero()).unwrap();
        let b = fuzz_block_bound(&setup.g, 500, 4).unwrap();
        assert_eq!(b.failures, 0);
        assert!(b.nontrivial > 100);
    }

    #[test]
    fn sampled_words_are_admissible_and_follow_pi() {
        let setup = Setup::new(SystemSpec::golden_mean(), PotentialSpec::zero()).unwrap();
        let mut rng = UniformStream::new(9);
        let mut zeros = 0;
        for _ in 0..4000 {
            let w = sample_word(&setup.g, &mut rng, 5);
            assert!(setup.sft.is_admissible(&w));
            zeros += usize::from(w[0] == 0);
        }
        let p = setup.g.pi[0];
        let sd = (p * (1.0 - p) / 4000.0).sqrt();
        assert!((zeros as f64 / 4000.0 - p).abs() < 4.0 * sd);
    }

    #[test]
    fn suite_passes_on_small_golden_mean() {
        let potential = PotentialSpec {
            range: 2,
            default: 0.0,
            values: BTreeMap::from([("01".to_string(), 0.3), ("11".to_string(), 0.3)]),
        };
        let mut c = ExperimentConfig::new(
            SystemSpec::golden_mean(),
            potential,
            vec![6],
            vec![0.8, 0.9],
            30,
            5,
        );
        c.lemma_n = vec![3, 4];
        c.fuzz_cases = 300;
        c.survival_length = 50;
        let (_, report) = run_lemma_suite(&c, Some(2)).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert!(report.render().contains("REPORT"));
    }
}
