use rayon::prelude::*;
use serde::Serialize;

use super::{g_set_membership, phi, psi, EstimatorParams, TypicalSet, WeightedBlocks};
use crate::error::EstimatorError;
use crate::random_sft::{covariance, sample_forbidden, splitmix64};
use crate::sft::{enumerate_words, Sft};
use crate::thermo::{measure_of_word, GibbsData};

/// Largest `|B_k|` for which expectations are enumerated.
pub const EXPECTATION_GUARD: usize = 200_000;
/// Largest `|B_k|` for which covariance double sums are enumerated.
pub const VARIANCE_GUARD: usize = 3_000;

/// One word of `B_k` with everything the moment sums need.
#[derive(Clone, Debug)]
pub(crate) struct Census {
    pub weight: f64,
    pub measure: f64,
    /// Sorted distinct block indices of the `n`-windows.
    pub windows: Vec<u32>,
    pub anchored: bool,
}

pub(crate) fn census(
    sft: &Sft,
    g: &GibbsData,
    wb: &WeightedBlocks,
    k: usize,
    typical: &TypicalSet,
    guard: usize,
) -> Result<Vec<Census>, EstimatorError> {
    let size = crate::sft::count_words(sft, k);
    if size > guard as u128 {
        return Err(EstimatorError::GuardExceeded {
            size: usize::try_from(size).unwrap_or(usize::MAX),
            guard,
        });
    }
    Ok(enumerate_words(sft, k)
        .into_iter()
        .map(|u| {
            let mut windows: Vec<u32> = wb
                .index
                .window_indices(&u)
                .expect("admissible word")
                .into_iter()
                .map(|i| i as u32)
                .collect();
            windows.sort_unstable();
            windows.dedup();
            Census {
                weight: wb.birkhoff_sup(g, &u).exp(),
                measure: measure_of_word(g, &u),
                windows,
                anchored: g_set_membership(&u, &wb.index, typical),
            }
        })
        .collect())
}

/// Size of the intersection of two sorted lists.
pub(crate) fn shared(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Exact means and variances of `phi` and `psi` over the random forbidden
/// set, with the exact lower bounds on the means.
#[derive(Clone, Debug, Serialize)]
pub struct ExactMoments {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub e_phi: f64,
    pub e_psi: f64,
    /// `None` when `|B_k|` exceeds [`VARIANCE_GUARD`].
    pub var_phi: Option<f64>,
    pub var_psi: Option<f64>,
    /// `mu(G_{n,k})`.
    pub anchored_measure: f64,
    pub typical_size: usize,
    /// `alpha^ell e^{Pk} / K`.
    pub phi_lower_bound: f64,
    /// `alpha^ell e^{Pk} mu(G_{n,k}) / (K |E_n|)`.
    pub psi_lower_bound: f64,
}

impl ExactMoments {
    pub fn phi_bound_holds(&self) -> bool {
        self.e_phi >= self.phi_lower_bound * (1.0 - 1e-12)
    }

    pub fn psi_bound_holds(&self) -> bool {
        self.e_psi >= self.psi_lower_bound * (1.0 - 1e-12)
    }
}

pub fn exact_moments(
    sft: &Sft,
    g: &GibbsData,
    wb: &WeightedBlocks,
    params: &EstimatorParams,
    typical: &TypicalSet,
) -> Result<ExactMoments, EstimatorError> {
    if typical.is_empty() {
        return Err(EstimatorError::EmptyTypicalSet);
    }
    let words = census(sft, g, wb, params.k, typical, EXPECTATION_GUARD)?;
    let alpha = params.alpha;
    let e_size = typical.len() as f64;
    let mut e_phi = 0.0;
    let mut e_psi = 0.0;
    let mut anchored_measure = 0.0;
    for c in &words {
        let t = c.weight * alpha.powi(c.windows.len() as i32);
        e_phi += t;
        if c.anchored {
            e_psi += t;
            anchored_measure += c.measure;
        }
    }
    e_psi /= e_size;

    let (var_phi, var_psi) = if words.len() <= VARIANCE_GUARD {
        let (vp, vs) = covariance_sums(&words, alpha);
        (Some(vp), Some(vs / (e_size * e_size)))
    } else {
        (None, None)
    };

    let base = alpha.powi(params.ell as i32) * (g.pressure * params.k as f64).exp() / g.gibbs_k();
    Ok(ExactMoments {
        n: params.n,
        k: params.k,
        alpha,
        e_phi,
        e_psi,
        var_phi,
        var_psi,
        anchored_measure,
        typical_size: typical.len(),
        phi_lower_bound: base,
        psi_lower_bound: base * anchored_measure / e_size,
    })
}

/// `sum_{u,v} w_u w_v Cov(xi_u, xi_v)` over all pairs and over anchored pairs.
fn covariance_sums(words: &[Census], alpha: f64) -> (f64, f64) {
    let rows: Vec<(f64, f64)> = (0..words.len())
        .into_par_iter()
        .map(|i| {
            let u = &words[i];
            let (mut all, mut anchored) = (0.0, 0.0);
            for v in &words[i..] {
                let both = shared(&u.windows, &v.windows);
                if both == 0 {
                    continue;
                }
                let either = u.windows.len() + v.windows.len() - both;
                let mult = if std::ptr::eq(u, v) { 1.0 } else { 2.0 };
                let c = mult * u.weight * v.weight * covariance(alpha, either, both);
                all += c;
                if u.anchored && v.anchored {
                    anchored += c;
                }
            }
            (all, anchored)
        })
        .collect();
    rows.iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y))
}

/// Sample moments of `phi` and `psi` over seeded forbidden sets.
#[derive(Clone, Debug, Serialize)]
pub struct McMoments {
    pub trials: usize,
    pub mean_phi: f64,
    pub var_phi: f64,
    pub mean_psi: f64,
    pub var_psi: f64,
}

impl McMoments {
    pub fn se_phi(&self) -> f64 {
        (self.var_phi / self.trials as f64).sqrt()
    }

    pub fn se_psi(&self) -> f64 {
        (self.var_psi / self.trials as f64).sqrt()
    }
}

/// Trial `t` uses seed `splitmix64(master_seed + t)`.
pub fn monte_carlo_moments(
    wb: &WeightedBlocks,
    params: &EstimatorParams,
    typical: &TypicalSet,
    trials: usize,
    master_seed: u64,
) -> Result<McMoments, EstimatorError> {
    let values: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = splitmix64(master_seed.wrapping_add(t as u64));
            let s = sample_forbidden(&wb.index, params.alpha, seed)?;
            Ok((phi(wb, &s, params.k)?, psi(wb, &s, params.k, typical)?))
        })
        .collect::<Result<_, EstimatorError>>()?;
    let (mean_phi, var_phi) = mean_var(values.iter().map(|v| v.0));
    let (mean_psi, var_psi) = mean_var(values.iter().map(|v| v.1));
    Ok(McMoments {
        trials,
        mean_phi,
        var_phi,
        mean_psi,
        var_psi,
    })
}

/// Mean and unbiased variance.
pub(crate) fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    if n == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}
