//! Pressure and equilibrium states of locally constant potentials.
//!
//! Everything reduces to the weighted transfer matrix
//! `L(a, b) = T(a, b) * exp(f(a, b))` of a vertex shift. Its Perron value is
//! `exp(P)`, and its Perron eigenvectors give the equilibrium state as a
//! stationary Markov chain.

mod constants;
mod karp;
mod potential;

pub use constants::{
    gamma_certificate, gibbs_constant, max_word_measures, GammaCertificate, GibbsConstants,
};
pub use karp::max_mean_cycle;
pub use potential::{Potential, PotentialSpec};

use crate::error::ThermoError;
use crate::linalg::{
    perron_irreducible, spectral_radius, SparseMatrix, PERRON_MAX_ITER, PERRON_TOL,
};
use crate::logvalue::LogValue;
use crate::sft::{is_mixing, Sft, Symbol};

/// Word length up to which [`gibbs_measure`] certifies the Gibbs constant.
pub const DEFAULT_GIBBS_LENGTH: usize = 10;
/// Longest word length used to certify `gamma0`.
pub const GAMMA_HORIZON: usize = 20;

/// `T * exp(f)` as a sparse matrix.
pub fn transfer_matrix(sft: &Sft, f: &Potential) -> SparseMatrix {
    let mut m = SparseMatrix::new(sft.size());
    for a in 0..sft.size() as Symbol {
        for b in sft.successors(a) {
            m.push(a as usize, b as usize, f.value(a, b).exp());
        }
    }
    m
}

/// Topological pressure `P_Y(f)`: log of the spectral radius of the weighted
/// transfer matrix, maximised over irreducible pieces. The empty system has
/// pressure `-inf`.
pub fn pressure(sft: &Sft, f: &Potential) -> LogValue {
    if sft.is_empty() {
        return LogValue::NegInfinity;
    }
    LogValue::from_linear(spectral_radius(&transfer_matrix(sft, f)))
}

/// `log Lambda_m`, where `Lambda_m` sums `exp(S_m f(w))` over `w` in `B_m`
/// and `S_m f(w)` takes the supremum over the cylinder `[w]`: the internal
/// edges of `w` plus the best outgoing edge from its last symbol.
pub fn log_partition_sum(sft: &Sft, f: &Potential, m: usize) -> LogValue {
    if sft.is_empty() || m == 0 {
        return if m == 0 {
            LogValue::Finite(0.0)
        } else {
            LogValue::NegInfinity
        };
    }
    let n = sft.size();
    let mut v = vec![1.0f64; n];
    let mut log_scale = 0.0;
    for _ in 1..m {
        let mut next = vec![0.0; n];
        for a in 0..n {
            if v[a] == 0.0 {
                continue;
            }
            for b in sft.successors(a as Symbol) {
                next[b as usize] += v[a] * f.value(a as Symbol, b).exp();
            }
        }
        let top = next.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return LogValue::NegInfinity;
        }
        for x in &mut next {
            *x /= top;
        }
        log_scale += top.ln();
        v = next;
    }
    let total: f64 = (0..n)
        .map(|a| v[a] * f.max_out(sft, a as Symbol).exp())
        .sum();
    LogValue::from_linear(total).add(log_scale)
}

/// `Lambda_m` on the linear scale.
pub fn partition_sum(sft: &Sft, f: &Potential, m: usize) -> f64 {
    log_partition_sum(sft, f, m).exp()
}

/// Equilibrium data of a locally constant potential on a mixing SFT.
#[derive(Clone, Debug)]
pub struct GibbsData {
    size: usize,
    transitions: Vec<bool>,
    f: Vec<f64>,
    /// `P_X(f) = log(lambda)`.
    pub pressure: f64,
    pub lambda: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    /// Stationary vector of `markov`.
    pub pi: Vec<f64>,
    /// Row-stochastic `Q(a,b) = L(a,b) r_b / (lambda r_a)`, row-major.
    pub markov: Vec<f64>,
    /// Entropy `h(mu)`.
    pub entropy: f64,
    /// `int f dmu`.
    pub integral_f: f64,
    pub constants: GibbsConstants,
    pub gamma: GammaCertificate,
}

impl GibbsData {
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn q(&self, a: Symbol, b: Symbol) -> f64 {
        self.markov[a as usize * self.size + b as usize]
    }

    #[inline]
    pub fn potential(&self, a: Symbol, b: Symbol) -> f64 {
        self.f[a as usize * self.size + b as usize]
    }

    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        self.transitions[a as usize * self.size + b as usize]
    }

    pub fn successors(&self, a: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.size as Symbol).filter(move |&b| self.allows(a, b))
    }

    /// Gibbs constant `K` valid for Lemma-type quasi-multiplicativity bounds.
    pub fn gibbs_k(&self) -> f64 {
        self.constants.k
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma.gamma0
    }

    pub fn max_out(&self, a: Symbol) -> f64 {
        self.successors(a)
            .map(|b| self.potential(a, b))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_out(&self, a: Symbol) -> f64 {
        self.successors(a)
            .map(|b| self.potential(a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Residual of `pi Q = pi` in max norm.
    pub fn stationarity_residual(&self) -> f64 {
        (0..self.size)
            .map(|b| {
                let s: f64 = (0..self.size)
                    .map(|a| self.pi[a] * self.q(a as Symbol, b as Symbol))
                    .sum();
                (s - self.pi[b]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of a row sum of `Q` from one.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.size)
            .map(|a| {
                let s: f64 = self.markov[a * self.size..(a + 1) * self.size].iter().sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Perron eigendata and the derived Markov equilibrium state.
pub fn gibbs_measure(sft: &Sft, f: &Potential) -> Result<GibbsData, ThermoError> {
    if sft.is_empty() {
        return Err(ThermoError::Empty);
    }
    if !is_mixing(sft)? {
        return Err(ThermoError::NotPrimitive);
    }
    let n = sft.size();
    let l_mat = transfer_matrix(sft, f);
    let right = perron_irreducible(&l_mat, PERRON_TOL, PERRON_MAX_ITER);
    let left = perron_irreducible(&l_mat.transpose(), PERRON_TOL, PERRON_MAX_ITER);
    if !right.converged || !left.converged {
        return Err(ThermoError::NoConvergence(PERRON_MAX_ITER));
    }
    let lambda = right.value;
    let r = right.vector;
    let l = left.vector;

    let mut markov = vec![0.0; n * n];
    for a in 0..n {
        let row = &mut markov[a * n..(a + 1) * n];
        for &(b, w) in l_mat.row(a) {
            row[b] = w * r[b] / (lambda * r[a]);
        }
        // Remove the eigen-solver residual so rows are exactly stochastic.
        let s: f64 = row.iter().sum();
        for x in row.iter_mut() {
            *x /= s;
        }
    }
    let z: f64 = l.iter().zip(&r).map(|(x, y)| x * y).sum();
    let pi: Vec<f64> = l.iter().zip(&r).map(|(x, y)| x * y / z).collect();

    let mut fvals = vec![0.0; n * n];
    let mut entropy = 0.0;
    let mut integral_f = 0.0;
    for a in 0..n as Symbol {
        for b in sft.successors(a) {
            let i = a as usize * n + b as usize;
            fvals[i] = f.value(a, b);
            let qab = markov[i];
            if qab > 0.0 {
                entropy -= pi[a as usize] * qab * qab.ln();
                integral_f += pi[a as usize] * qab * fvals[i];
            }
        }
    }

    let mut g = GibbsData {
        size: n,
        transitions: sft.transition_matrix().to_vec(),
        f: fvals,
        pressure: lambda.ln(),
        lambda,
        right: r,
        left: l,
        pi,
        markov,
        entropy,
        integral_f,
        constants: GibbsConstants::default(),
        gamma: GammaCertificate::default(),
    };
    g.constants = gibbs_constant(&g, DEFAULT_GIBBS_LENGTH);
    let gamma0 = gamma0(&g);
    g.gamma = gamma_certificate(&g, gamma0, gamma0, GAMMA_HORIZON);
    Ok(g)
}

/// Exact Markov cylinder measure `pi_{w_0} prod Q(w_k, w_{k+1})`; zero for
/// inadmissible words and one for the empty word.
pub fn measure_of_word(g: &GibbsData, w: &[Symbol]) -> f64 {
    let Some(&first) = w.first() else {
        return 1.0;
    };
    if first as usize >= g.size {
        return 0.0;
    }
    let mut m = g.pi[first as usize];
    for p in w.windows(2) {
        if p[1] as usize >= g.size {
            return 0.0;
        }
        m *= g.q(p[0], p[1]);
        if m == 0.0 {
            return 0.0;
        }
    }
    m
}

/// `exp` of the maximum mean cycle weight of `log Q`, i.e. the exponential
/// growth rate of `max_{u in B_m} mu(u)`.
pub fn gamma0(g: &GibbsData) -> f64 {
    let mut edges = Vec::new();
    for a in 0..g.size as Symbol {
        for b in g.successors(a) {
            edges.push((a as usize, b as usize, g.q(a, b).ln()));
        }
    }
    max_mean_cycle(g.size, &edges).map_or(0.0, f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::{enumerate_words, is_mixing, Alphabet, Word};
    use proptest::prelude::*;

    fn golden() -> Sft {
        Sft::from_forbidden_words(Alphabet::new(2).unwrap(), &["11".parse().unwrap()]).unwrap()
    }

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn pressure_examples() {
        let full = Sft::full_shift(2).unwrap();
        let p = pressure(&full, &Potential::zero(&full)).finite().unwrap();
        assert!((p - 2f64.ln()).abs() < 1e-12);
        let p = pressure(&golden(), &Potential::zero(&golden()))
            .finite()
            .unwrap();
        assert!((p - PHI.ln()).abs() < 1e-10);
        let p = pressure(&full, &Potential::constant(&full, 0.7))
            .finite()
            .unwrap();
        assert!((p - 2f64.ln() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn empty_system_pressure_is_sentinel() {
        let f: Vec<_> = ["0", "1"].iter().map(|s| s.parse().unwrap()).collect();
        let x = Sft::from_forbidden_words(Alphabet::new(2).unwrap(), &f).unwrap();
        assert!(pressure(&x, &Potential::zero(&x)).is_neg_infinity());
        assert_eq!(partition_sum(&x, &Potential::zero(&x), 3), 0.0);
    }

    #[test]
    fn partition_sum_examples() {
        let full = Sft::full_shift(2).unwrap();
        assert!((partition_sum(&full, &Potential::zero(&full), 5) - 32.0).abs() < 1e-9);
        let g = golden();
        assert!((partition_sum(&g, &Potential::zero(&g), 4) - 8.0).abs() < 1e-12);
        let rate = log_partition_sum(&g, &Potential::zero(&g), 60)
            .finite()
            .unwrap()
            / 60.0;
        assert!((rate - PHI.ln()).abs() < 0.01);
    }

    #[test]
    fn partition_sum_uses_cylinder_supremum() {
        // f(a,b) = b on the full 2-shift: sup over [w] of S_m f adds 1 for
        // the free final edge.
        let full = Sft::full_shift(2).unwrap();
        let f = Potential::from_fn(&full, |_, b| b as f64);
        let brute: f64 = enumerate_words(&full, 3)
            .iter()
            .map(|w| (w[1] as f64 + w[2] as f64 + 1.0).exp())
            .sum();
        assert!((partition_sum(&full, &f, 3) - brute).abs() < 1e-9);
    }

    #[test]
    fn uniform_bernoulli() {
        let full = Sft::full_shift(2).unwrap();
        let g = gibbs_measure(&full, &Potential::zero(&full)).unwrap();
        for a in 0..2u32 {
            assert!((g.pi[a as usize] - 0.5).abs() < 1e-12);
            for b in 0..2 {
                assert!((g.q(a, b) - 0.5).abs() < 1e-12);
            }
        }
        assert!((measure_of_word(&g, &[0, 1, 0]) - 0.125).abs() < 1e-12);
        assert!((g.gamma0() - 0.5).abs() < 1e-12);
        assert!((g.gibbs_k() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bernoulli_p() {
        let full = Sft::full_shift(2).unwrap();
        let p = [0.3, 0.7];
        let f = Potential::from_fn(&full, |_, b| f64::ln(p[b as usize]));
        let g = gibbs_measure(&full, &f).unwrap();
        assert!(g.pressure.abs() < 1e-12);
        for a in 0..2u32 {
            assert!((g.pi[a as usize] - p[a as usize]).abs() < 1e-12);
            for b in 0..2u32 {
                assert!((g.q(a, b) - p[b as usize]).abs() < 1e-12);
            }
        }
        assert!((g.gamma0() - 0.7).abs() < 1e-12);
        // The Birkhoff sum of log p_{x_1} .. log p_{x_n} is off from
        // mu(x_0 .. x_{n-1}) by p_{x_0} / p_{x_n}.
        assert!((g.gibbs_k() - 0.7 / 0.3).abs() < 1e-9);

        // Aligned with the cylinder, the ratio is identically one.
        let f = Potential::from_fn(&full, |a, _| f64::ln(p[a as usize]));
        let g = gibbs_measure(&full, &f).unwrap();
        assert!(g.pressure.abs() < 1e-12);
        assert!((g.gibbs_k() - 1.0).abs() < 1e-9);
        assert_eq!(g.constants.g0, Some(1));
    }

    #[test]
    fn parry_measure() {
        let x = golden();
        let g = gibbs_measure(&x, &Potential::zero(&x)).unwrap();
        assert!((g.entropy - PHI.ln()).abs() < 1e-10);
        // Independent route: eigenvector (phi, 1) of [[1,1],[1,0]] gives
        // pi_0 = phi^2 / (1 + phi^2) and Q(0,0) = 1/phi.
        let pi0 = PHI * PHI / (1.0 + PHI * PHI);
        assert!((g.pi[0] - pi0).abs() < 1e-10);
        assert!((measure_of_word(&g, &[0, 0]) - pi0 / PHI).abs() < 1e-10);
        assert_eq!(measure_of_word(&g, &[1, 1]), 0.0);
        assert!((g.gamma0() - 1.0 / PHI).abs() < 1e-10);
    }

    #[test]
    fn non_mixing_rejected() {
        let x =
            Sft::from_matrix(Alphabet::new(2).unwrap(), vec![false, true, true, false]).unwrap();
        assert_eq!(
            gibbs_measure(&x, &Potential::zero(&x)).unwrap_err(),
            ThermoError::NotPrimitive
        );
    }

    #[test]
    fn variational_identity_with_potential() {
        let x = golden();
        let f = Potential::from_fn(&x, |_, b| 0.3 * b as f64);
        let g = gibbs_measure(&x, &f).unwrap();
        assert!((g.entropy + g.integral_f - g.pressure).abs() < 1e-10);
        assert!(g.stationarity_residual() < 1e-10);
        assert!(g.row_sum_residual() < 1e-10);
    }
    fn systems() -> Vec<(Sft, Potential)> {
        let x = golden();
        let full = Sft::full_shift(3).unwrap();
        vec![
            (x.clone(), Potential::zero(&x)),
            (x.clone(), Potential::from_fn(&x, |_, b| 0.3 * b as f64)),
            (
                full.clone(),
                Potential::from_fn(&full, |a, b| 0.2 * a as f64 - 0.5 * (b == 2) as u8 as f64),
            ),
        ]
    }

    /// Infimum and supremum of the Birkhoff sum over `[u]`, by enumerating
    /// the free final edge.
    fn birkhoff_range(x: &Sft, f: &Potential, u: &Word) -> (f64, f64) {
        let inner: f64 = u.windows(2).map(|p| f.value(p[0], p[1])).sum();
        let last = *u.last().unwrap();
        let tails: Vec<f64> = x.successors(last).map(|b| f.value(last, b)).collect();
        let lo = tails.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = tails.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (inner + lo, inner + hi)
    }

    #[test]
    fn gibbs_bound_holds_on_every_short_word() {
        for (x, f) in systems() {
            let g = gibbs_measure(&x, &f).unwrap();
            let k = g.gibbs_k();
            assert!(k >= 1.0);
            for m in 1..=10 {
                for u in enumerate_words(&x, m) {
                    let mu = measure_of_word(&g, &u);
                    let (lo, hi) = birkhoff_range(&x, &f, &u);
                    let pm = g.pressure * m as f64;
                    assert!(mu * (pm - lo).exp() <= k * (1.0 + 1e-9), "{u}");
                    assert!((hi - pm).exp() / mu <= k * (1.0 + 1e-9), "{u}");
                }
            }
        }
    }

    #[test]
    fn gibbs_constant_grows_then_settles() {
        for (x, f) in systems() {
            let g = gibbs_measure(&x, &f).unwrap();
            let ks: Vec<f64> = (2..=12)
                .map(|l| constants::gibbs_constant(&g, l).k)
                .collect();
            assert!(ks.windows(2).all(|w| w[0] <= w[1]), "{ks:?}");
            assert!(ks[ks.len() - 1].is_finite());
            assert_eq!(ks[ks.len() - 1], ks[ks.len() - 2]);
        }
    }

    #[test]
    fn measures_sum_to_one() {
        for (x, f) in systems() {
            let g = gibbs_measure(&x, &f).unwrap();
            for m in 1..=10 {
                let total: f64 = enumerate_words(&x, m)
                    .iter()
                    .map(|u| measure_of_word(&g, u))
                    .sum();
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gamma0_matches_brute_maximum() {
        let x = golden();
        let g = gibbs_measure(&x, &Potential::zero(&x)).unwrap();
        let brute = enumerate_words(&x, 20)
            .iter()
            .map(|u| measure_of_word(&g, u))
            .fold(0.0, f64::max)
            .powf(1.0 / 20.0);
        assert!(
            (brute - g.gamma0()).abs() < 0.02,
            "{brute} vs {}",
            g.gamma0()
        );
    }

    #[test]
    fn cylinder_measures_obey_gamma0_offset() {
        for (x, f) in systems() {
            let g = gibbs_measure(&x, &f).unwrap();
            let (gamma0, c) = (g.gamma0(), g.gamma.offset as i32);
            assert!(gamma0 > 0.0 && gamma0 < 1.0);
            for m in 2..=12 {
                for u in enumerate_words(&x, m) {
                    assert!(measure_of_word(&g, &u) <= gamma0.powi(m as i32 - c) * (1.0 + 1e-9));
                }
            }
        }
    }

    fn mixing_system() -> impl Strategy<Value = (Sft, Potential)> {
        (2usize..5)
            .prop_flat_map(|q| {
                (
                    proptest::collection::vec(any::<bool>(), q * q),
                    proptest::collection::vec(-1.0f64..1.0, q * q),
                )
            })
            .prop_filter_map("mixing", |(t, v)| {
                let q = (t.len() as f64).sqrt() as usize;
                let x = Sft::from_matrix(Alphabet::new(q).unwrap(), t).ok()?;
                if x.is_empty() || !x.is_nontrivial() || !is_mixing(&x).ok()? {
                    return None;
                }
                let s = x.size();
                let f = Potential::from_fn(&x, |a, b| v[a as usize * s + b as usize]);
                Some((x, f))
            })
    }

    proptest! {
        #[test]
        fn equilibrium_invariants((x, f) in mixing_system()) {
            let g = gibbs_measure(&x, &f).unwrap();
            prop_assert!(g.stationarity_residual() < 1e-10);
            prop_assert!(g.row_sum_residual() < 1e-10);
            prop_assert!((g.entropy + g.integral_f - g.pressure).abs() < 1e-10);
            prop_assert!(g.gibbs_k() >= 1.0);
            prop_assert!(g.gamma0() > 0.0 && g.gamma0() < 1.0);
            let total: f64 = enumerate_words(&x, 6).iter().map(|u| measure_of_word(&g, u)).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}
