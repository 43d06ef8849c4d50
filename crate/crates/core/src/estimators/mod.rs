//! Potential-weighted counts of surviving words, `phi` and `psi`, which
//! bracket the pressure of `Y_n` from above and below.
//!
//! Both are evaluated exactly per forbidden set by dynamic programming over
//! the `n`-block graph of `X`, counting `k`-words that avoid `F` whether or
//! not they extend to points of `Y_n`.

mod classes;
mod moments;

pub use classes::{class_tables, ClassRow, ClassTable};
pub(crate) use moments::mean_var;
pub use moments::{
    exact_moments, monte_carlo_moments, ExactMoments, McMoments, EXPECTATION_GUARD, VARIANCE_GUARD,
};

use crate::error::EstimatorError;
use crate::logvalue::LogValue;
use crate::random_sft::{check_alpha, ForbiddenSample};
use crate::sft::{BlockIndex, Symbol, Word};
use crate::thermo::{measure_of_word, GibbsData};

/// Default exponent of the schedule `k = floor(n^e)`.
pub const DEFAULT_K_EXPONENT: f64 = 1.5;

/// `k = floor(n^exponent)`, never below `n`.
pub fn k_schedule(n: usize, exponent: f64) -> usize {
    ((n as f64).powf(exponent).floor() as usize).max(n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorParams {
    pub n: usize,
    pub k: usize,
    /// `k - n + 1`, the number of `n`-windows in a `k`-word.
    pub ell: usize,
    pub delta: f64,
    /// Rate strictly between `gamma0` and `alpha`.
    pub gamma: f64,
    pub alpha: f64,
}

impl EstimatorParams {
    pub fn new(
        n: usize,
        k: usize,
        alpha: f64,
        delta: f64,
        gamma: f64,
    ) -> Result<Self, EstimatorError> {
        if n == 0 || k < n {
            return Err(EstimatorError::BadLengths { n, k });
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(EstimatorError::BadDelta(delta));
        }
        check_alpha(alpha)?;
        Ok(EstimatorParams {
            n,
            k,
            ell: k - n + 1,
            delta,
            gamma,
            alpha,
        })
    }

    /// `k = floor(n^exponent)` (at least `n`), `gamma = (gamma0 + alpha)/2`
    /// and, unless overridden, `delta = log(alpha/gamma)/8`.
    pub fn with_defaults(
        g: &GibbsData,
        n: usize,
        alpha: f64,
        k_exponent: f64,
        delta: Option<f64>,
    ) -> Result<Self, EstimatorError> {
        let k = k_schedule(n, k_exponent);
        let gamma0 = g.gamma0();
        let gamma = (gamma0 + alpha) / 2.0;
        let delta = match delta {
            Some(d) => d,
            None if alpha > gamma0 => (alpha / gamma).ln() / 8.0,
            None => return Err(EstimatorError::AlphaBelowGamma { alpha, gamma0 }),
        };
        Self::new(n, k, alpha, delta, gamma)
    }
}

/// The `n`-block graph of `X` carrying the potential: each block knows the
/// Birkhoff weight of its internal edges, the best outgoing edge from its
/// last symbol, and the weight of each step.
#[derive(Clone, Debug)]
pub struct WeightedBlocks {
    pub index: BlockIndex,
    /// Sum of `f` over the `n - 1` internal edges of each block.
    pub log_start: Vec<f64>,
    /// `max_b f(last, b)`: the free final edge of the cylinder supremum.
    pub log_tail: Vec<f64>,
    /// `(successor block, exp f(last, b))`.
    pub steps: Vec<Vec<(usize, f64)>>,
}

impl WeightedBlocks {
    pub fn new(g: &GibbsData, index: BlockIndex) -> Self {
        let len = index.len();
        let mut log_start = Vec::with_capacity(len);
        let mut log_tail = Vec::with_capacity(len);
        let mut steps = Vec::with_capacity(len);
        for i in 0..len {
            let w = index.word(i);
            log_start.push(w.windows(2).map(|p| g.potential(p[0], p[1])).sum());
            let last = index.last_symbol(i);
            log_tail.push(g.max_out(last));
            steps.push(
                index
                    .successors(i)
                    .map(|(b, j)| (j, g.potential(last, b).exp()))
                    .collect(),
            );
        }
        WeightedBlocks {
            index,
            log_start,
            log_tail,
            steps,
        }
    }

    pub fn n(&self) -> usize {
        self.index.block_len()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// `S_k f(u)` with the supremum over the cylinder `[u]`.
    pub fn birkhoff_sup(&self, g: &GibbsData, u: &[Symbol]) -> f64 {
        let internal: f64 = u.windows(2).map(|p| g.potential(p[0], p[1])).sum();
        internal + g.max_out(*u.last().expect("non-empty word"))
    }

    fn check(&self, sample: &ForbiddenSample) -> Result<(), EstimatorError> {
        if sample.len() != self.len() {
            return Err(crate::error::SampleError::SizeMismatch {
                expected: self.len(),
                got: sample.len(),
            }
            .into());
        }
        Ok(())
    }
}

/// A vector kept as `exp(log_scale) * v` with `max v = 1`.
struct Scaled {
    v: Vec<f64>,
    log_scale: f64,
}

impl Scaled {
    fn renormalise(&mut self) -> bool {
        let top = self.v.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return false;
        }
        for x in &mut self.v {
            *x /= top;
        }
        self.log_scale += top.ln();
        true
    }
}

/// Runs `steps` transitions of the weighted block graph restricted to
/// non-forbidden blocks. Returns `None` once every path has died.
fn propagate(
    wb: &WeightedBlocks,
    sample: &ForbiddenSample,
    mut cur: Scaled,
    steps: usize,
) -> Option<Scaled> {
    let len = wb.len();
    let mut next = vec![0.0; len];
    for _ in 0..steps {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &x) in cur.v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for &(j, w) in &wb.steps[i] {
                if !sample.is_forbidden(j) {
                    next[j] += x * w;
                }
            }
        }
        std::mem::swap(&mut cur.v, &mut next);
        if !cur.renormalise() {
            return None;
        }
    }
    Some(cur)
}

/// `log phi_{n,k}`, where `phi = sum over u in B_k(X) of exp(S_k f(u)) xi_u`.
pub fn log_phi(
    wb: &WeightedBlocks,
    sample: &ForbiddenSample,
    k: usize,
) -> Result<LogValue, EstimatorError> {
    wb.check(sample)?;
    let n = wb.n();
    if k < n {
        return Err(EstimatorError::BadLengths { n, k });
    }
    let top = (0..wb.len())
        .filter(|&i| !sample.is_forbidden(i))
        .map(|i| wb.log_start[i])
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(LogValue::NegInfinity);
    }
    let start = Scaled {
        v: (0..wb.len())
            .map(|i| {
                if sample.is_forbidden(i) {
                    0.0
                } else {
                    (wb.log_start[i] - top).exp()
                }
            })
            .collect(),
        log_scale: top,
    };
    let Some(end) = propagate(wb, sample, start, k - n) else {
        return Ok(LogValue::NegInfinity);
    };
    let total: f64 = end
        .v
        .iter()
        .zip(&wb.log_tail)
        .map(|(x, t)| x * t.exp())
        .sum();
    Ok(LogValue::from_linear(total).add(end.log_scale))
}

pub fn phi(wb: &WeightedBlocks, sample: &ForbiddenSample, k: usize) -> Result<f64, EstimatorError> {
    Ok(log_phi(wb, sample, k)?.exp())
}

/// The entropy-typical set `E_n` as block indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TypicalSet {
    pub blocks: Vec<usize>,
    pub mask: Vec<bool>,
    /// `mu(E_n)`.
    pub measure: f64,
}

impl TypicalSet {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn contains(&self, block: usize) -> bool {
        self.mask[block]
    }

    pub fn words<'a>(&'a self, index: &'a BlockIndex) -> impl Iterator<Item = &'a Word> + 'a {
        self.blocks.iter().map(|&i| index.word(i))
    }
}

/// `E_n = {u in B_n : |-(1/n) log mu(u) - h(mu)| < delta}`, by enumeration.
pub fn entropy_typical_set(g: &GibbsData, index: &BlockIndex, delta: f64) -> TypicalSet {
    let n = index.block_len() as f64;
    let mut blocks = Vec::new();
    let mut mask = vec![false; index.len()];
    let mut measure = 0.0;
    for (i, w) in index.words().iter().enumerate() {
        let m = measure_of_word(g, w);
        if m > 0.0 && (-m.ln() / n - g.entropy).abs() < delta {
            blocks.push(i);
            mask[i] = true;
            measure += m;
        }
    }
    TypicalSet {
        blocks,
        mask,
        measure,
    }
}

/// Whether the `k`-word `u` begins and ends with the same typical `n`-word.
pub fn g_set_membership(u: &[Symbol], index: &BlockIndex, typical: &TypicalSet) -> bool {
    let n = index.block_len();
    if u.len() < n {
        return false;
    }
    let ell = u.len() - n + 1;
    u[..n] == u[ell - 1..] && index.index_of(&u[..n]).is_some_and(|i| typical.contains(i))
}

/// `log psi_{n,k}`: the weighted count of surviving `k`-words that begin and
/// end with the same typical block, divided by `|E_n|`.
pub fn log_psi(
    wb: &WeightedBlocks,
    sample: &ForbiddenSample,
    k: usize,
    typical: &TypicalSet,
) -> Result<LogValue, EstimatorError> {
    wb.check(sample)?;
    let n = wb.n();
    if k < n {
        return Err(EstimatorError::BadLengths { n, k });
    }
    if typical.is_empty() {
        return Err(EstimatorError::EmptyTypicalSet);
    }
    let steps = k - n;
    // Sum of exp(log term) tracked relative to a running maximum.
    let mut acc = 0.0f64;
    let mut acc_log = f64::NEG_INFINITY;
    for &v in &typical.blocks {
        if sample.is_forbidden(v) {
            continue;
        }
        let mut start = vec![0.0; wb.len()];
        start[v] = 1.0;
        let cur = Scaled {
            v: start,
            log_scale: 0.0,
        };
        let Some(end) = propagate(wb, sample, cur, steps) else {
            continue;
        };
        if end.v[v] == 0.0 {
            continue;
        }
        let term = end.v[v].ln() + end.log_scale + wb.log_start[v] + wb.log_tail[v];
        if term > acc_log {
            acc = acc * (acc_log - term).exp() + 1.0;
            acc_log = term;
        } else {
            acc += (term - acc_log).exp();
        }
    }
    if acc == 0.0 {
        return Ok(LogValue::NegInfinity);
    }
    Ok(LogValue::Finite(
        acc.ln() + acc_log - (typical.len() as f64).ln(),
    ))
}

pub fn psi(
    wb: &WeightedBlocks,
    sample: &ForbiddenSample,
    k: usize,
    typical: &TypicalSet,
) -> Result<f64, EstimatorError> {
    Ok(log_psi(wb, sample, k, typical)?.exp())
}
