use serde::Serialize;

use super::moments::{census, shared, VARIANCE_GUARD};
use super::{EstimatorParams, TypicalSet, WeightedBlocks};
use crate::error::EstimatorError;
use crate::sft::Sft;
use crate::thermo::{gamma_certificate, GibbsData, GAMMA_HORIZON};

/// Exact measures of the word and pair classes with exactly `j` distinct
/// `n`-windows, next to the polynomial-times-exponential bounds they are
/// expected to obey for large `n`. Bounds are reported, never asserted.
#[derive(Clone, Debug, Serialize)]
pub struct ClassRow {
    pub j: usize,
    /// `mu{u in B_k : |W_n(u)| = j}`.
    pub words: f64,
    /// Same, restricted to anchored words.
    pub anchored: f64,
    /// `mu x mu` of overlapping pairs in `B_k` with `j` windows in total.
    pub pairs: f64,
    /// Same, restricted to anchored pairs.
    pub anchored_pairs: f64,
    /// `(K^8 n^16)^{k/n} gamma^{k-j}`.
    pub words_bound: f64,
    /// `((2K)^16 n^32)^{k/n} gamma^{2 ell - j + n}`.
    pub pairs_bound: f64,
    /// `((2K)^32 gamma^{-2 n0 - 2} n^32)^{k/n} e^{-2n(h - delta)} gamma^{2 ell - j}`.
    pub anchored_pairs_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassTable {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    pub gamma: f64,
    pub delta: f64,
    pub gibbs_k: f64,
    /// Certified `n0` for `gamma`, or the horizon when certification failed.
    pub n0: usize,
    pub typical_measure: f64,
    /// `mu(G_{n,k})` with its two-sided bound
    /// `e^{-(h+delta)n} mu(E_n) / K <= mu(G) <= K e^{-(h-delta)n}`.
    pub anchored_measure: f64,
    pub anchored_lower: f64,
    pub anchored_upper: f64,
    /// `mu x mu` of overlapping anchored pairs and its bound
    /// `2^6 K^4 n^12 e^{-2n(h-delta)} gamma^n`.
    pub overlapping_anchored: f64,
    pub overlapping_anchored_bound: f64,
    /// Rows for `j = 1..=2 ell`.
    pub rows: Vec<ClassRow>,
}

pub fn class_tables(
    sft: &Sft,
    g: &GibbsData,
    wb: &WeightedBlocks,
    params: &EstimatorParams,
    typical: &TypicalSet,
) -> Result<ClassTable, EstimatorError> {
    let words = census(sft, g, wb, params.k, typical, VARIANCE_GUARD)?;
    let (n, k, ell) = (params.n, params.k, params.ell);
    let big_k = g.gibbs_k();
    let gamma = params.gamma;
    let h = g.entropy;
    let delta = params.delta;
    let cert = gamma_certificate(g, g.gamma0(), gamma, GAMMA_HORIZON);
    let n0 = cert.n0.unwrap_or(GAMMA_HORIZON);

    let mut rows: Vec<ClassRow> = (1..=2 * ell)
        .map(|j| ClassRow {
            j,
            words: 0.0,
            anchored: 0.0,
            pairs: 0.0,
            anchored_pairs: 0.0,
            words_bound: f64::NAN,
            pairs_bound: f64::NAN,
            anchored_pairs_bound: f64::NAN,
        })
        .collect();
    let mut anchored_measure = 0.0;
    for c in &words {
        let row = &mut rows[c.windows.len() - 1];
        row.words += c.measure;
        if c.anchored {
            row.anchored += c.measure;
            anchored_measure += c.measure;
        }
    }
    let mut overlapping_anchored = 0.0;
    for u in &words {
        for v in &words {
            let both = shared(&u.windows, &v.windows);
            if both == 0 {
                continue;
            }
            let j = u.windows.len() + v.windows.len() - both;
            let m = u.measure * v.measure;
            rows[j - 1].pairs += m;
            if u.anchored && v.anchored {
                rows[j - 1].anchored_pairs += m;
                overlapping_anchored += m;
            }
        }
    }

    let nf = n as f64;
    let power = k as f64 / nf;
    let decay = (-2.0 * nf * (h - delta)).exp();
    for row in &mut rows {
        let j = row.j as i32;
        let (ell, k, n) = (ell as i32, k as i32, n as i32);
        if j <= ell {
            row.words_bound = (big_k.powi(8) * nf.powi(16)).powf(power) * gamma.powi(k - j);
        }
        if j < 2 * ell {
            row.pairs_bound =
                ((2.0 * big_k).powi(16) * nf.powi(32)).powf(power) * gamma.powi(2 * ell - j + n);
        }
        row.anchored_pairs_bound =
            ((2.0 * big_k).powi(32) * gamma.powi(-2 * n0 as i32 - 2) * nf.powi(32)).powf(power)
                * decay
                * gamma.powi(2 * ell - j);
    }

    Ok(ClassTable {
        n,
        k,
        ell,
        gamma,
        delta,
        gibbs_k: big_k,
        n0,
        typical_measure: typical.measure,
        anchored_measure,
        anchored_lower: (-(h + delta) * nf).exp() * typical.measure / big_k,
        anchored_upper: big_k * (-(h - delta) * nf).exp(),
        overlapping_anchored,
        overlapping_anchored_bound: 64.0
            * big_k.powi(4)
            * nf.powi(12)
            * decay
            * gamma.powi(n as i32),
        rows,
    })
}
