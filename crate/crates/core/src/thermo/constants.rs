//! Finite-length certificates for the Gibbs constant, the mixing gap and the
//! exponential bound on cylinder measures.

use serde::Serialize;

use super::GibbsData;
use crate::sft::Symbol;

/// Relative slack allowed when comparing against exact equalities.
const REL_SLACK: f64 = 1e-12;

/// Constants certified for word lengths up to `length`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GibbsConstants {
    /// Certified `K`: the larger of `gibbs_ratio` and `quasi_multiplicative`.
    pub k: f64,
    /// Smallest `K` for the two-sided Gibbs bound on words of length
    /// `<= length`.
    pub gibbs_ratio: f64,
    /// `max Q(a,b)/pi_b` over transitions, the constant in
    /// `mu(uv) <= K mu(u) mu(v)` and in the conditional bound.
    pub quasi_multiplicative: f64,
    /// Smallest gap `g <= 2 * length` with
    /// `mu([u] and sigma^-(m+g)[v]) >= mu(u) mu(v) / k` for all `u`, `v`.
    pub g0: Option<usize>,
    pub length: usize,
}

/// Certifies the Gibbs property for all words of length at most `length`.
///
/// For a Markov equilibrium state the Gibbs ratio of a word depends only on
/// its first and last symbols:
///
/// ```text
/// mu(u) e^{P|u| - S_lo(u)} = pi_a lambda r_b e^{-min_c f(b,c)} / r_a
/// e^{S_hi(u) - P|u|} / mu(u) = r_a e^{max_c f(b,c)} / (pi_a lambda r_b)
/// ```
///
/// where `S_lo`/`S_hi` are the infimum and supremum of the Birkhoff sum over
/// `[u]`. So it suffices to know which pairs `(a, b)` are joined by a word of
/// each length. The three quasi-multiplicativity bounds are likewise
/// length-independent for Markov measures and reduce to entries of powers of
/// `Q` divided by `pi`.
pub fn gibbs_constant(g: &GibbsData, length: usize) -> GibbsConstants {
    let n = g.size();
    let length = length.max(1);
    let upper_end: Vec<f64> = (0..n)
        .map(|b| g.lambda * g.right[b] * (-g.min_out(b as Symbol)).exp())
        .collect();
    let lower_end: Vec<f64> = (0..n)
        .map(|b| g.max_out(b as Symbol).exp() / (g.lambda * g.right[b]))
        .collect();

    let mut reach: Vec<bool> = (0..n * n).map(|i| i / n == i % n).collect();
    let mut ratio: f64 = 1.0;
    for m in 1..=length {
        if m > 1 {
            let mut next = vec![false; n * n];
            for a in 0..n {
                for c in 0..n {
                    if reach[a * n + c] {
                        for b in g.successors(c as Symbol) {
                            next[a * n + b as usize] = true;
                        }
                    }
                }
            }
            reach = next;
        }
        for a in 0..n {
            for b in 0..n {
                if reach[a * n + b] {
                    let up = g.pi[a] * upper_end[b] / g.right[a];
                    let lo = g.right[a] * lower_end[b] / g.pi[a];
                    ratio = ratio.max(up).max(lo);
                }
            }
        }
    }

    let mut quasi: f64 = 1.0;
    for a in 0..n as Symbol {
        for b in g.successors(a) {
            quasi = quasi.max(g.q(a, b) / g.pi[b as usize]);
        }
    }
    let k = ratio.max(quasi);

    // Q^{g+1}: v starts g symbols after u ends.
    let mut power = g.markov.clone();
    let mut g0 = None;
    for gap in 1..=2 * length {
        power = mat_mul(&power, &g.markov, n);
        let worst = (0..n * n)
            .map(|i| power[i] / g.pi[i % n])
            .fold(f64::INFINITY, f64::min);
        if worst * k >= 1.0 - REL_SLACK {
            g0 = Some(gap);
            break;
        }
    }

    GibbsConstants {
        k,
        gibbs_ratio: ratio,
        quasi_multiplicative: quasi,
        g0,
        length,
    }
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += x * b[k * n + j];
            }
        }
    }
    c
}

/// `max_{u in B_m} mu(u)` for `m = 1..=horizon` (index `m - 1`).
pub fn max_word_measures(g: &GibbsData, horizon: usize) -> Vec<f64> {
    let n = g.size();
    let mut best = g.pi.clone();
    let mut out = Vec::with_capacity(horizon);
    for m in 1..=horizon {
        if m > 1 {
            let mut next = vec![0.0f64; n];
            for a in 0..n {
                for b in g.successors(a as Symbol) {
                    let v = best[a] * g.q(a as Symbol, b);
                    let slot = &mut next[b as usize];
                    *slot = slot.max(v);
                }
            }
            best = next;
        }
        out.push(best.iter().cloned().fold(0.0, f64::max));
    }
    out
}

/// Finite certificate for the exponential bound `mu(u) <= gamma^|u|`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GammaCertificate {
    pub gamma0: f64,
    /// The rate the certificate was checked against (`>= gamma0`).
    pub gamma: f64,
    /// Smallest `n0` with `max_{B_m} mu <= gamma^m` for all
    /// `n0 <= m <= horizon`; `None` if even `m = horizon` fails.
    pub n0: Option<usize>,
    /// Smallest `c >= 0` with `mu(u) <= gamma0^(|u| - c)` for all
    /// `1 <= |u| <= horizon`.
    pub offset: usize,
    pub horizon: usize,
}

pub fn gamma_certificate(
    g: &GibbsData,
    gamma0: f64,
    gamma: f64,
    horizon: usize,
) -> GammaCertificate {
    let maxima = max_word_measures(g, horizon);
    let holds = |m: usize| maxima[m - 1] <= gamma.powi(m as i32) * (1.0 + REL_SLACK);
    let mut n0 = None;
    for start in (1..=horizon).rev() {
        if holds(start) {
            n0 = Some(start);
        } else {
            break;
        }
    }
    let offset = if gamma0 > 0.0 && gamma0 < 1.0 {
        let lg = gamma0.ln();
        maxima
            .iter()
            .enumerate()
            .map(|(i, &mx)| {
                let m = (i + 1) as f64;
                // mx <= gamma0^(m - c)  <=>  c >= m - ln(mx)/ln(gamma0)
                let need = m - mx.ln() / lg;
                (need - 1e-9).ceil().max(0.0) as usize
            })
            .max()
            .unwrap_or(0)
    } else {
        0
    };
    GammaCertificate {
        gamma0,
        gamma,
        n0,
        offset,
        horizon,
    }
}
