//! Perron–Frobenius computations on sparse non-negative matrices.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

/// Relative width of the Collatz–Wielandt bracket at which power iteration
/// stops.
pub const PERRON_TOL: f64 = 1e-12;
pub const PERRON_MAX_ITER: usize = 1_000_000;

/// Row-major sparse matrix with non-negative entries.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        SparseMatrix {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    /// Adds an entry; zero entries are dropped.
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(v >= 0.0 && v.is_finite(), "entry {v} at ({i},{j})");
        if v > 0.0 {
            self.rows[i].push((j, v));
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::new(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                t.rows[j].push((i, v));
            }
        }
        t
    }

    /// Principal submatrix on `idx`, reindexed in the given order.
    fn restrict(&self, idx: &[usize]) -> SparseMatrix {
        let mut pos = vec![usize::MAX; self.n];
        for (p, &i) in idx.iter().enumerate() {
            pos[i] = p;
        }
        let mut m = SparseMatrix::new(idx.len());
        for (p, &i) in idx.iter().enumerate() {
            for &(j, v) in &self.rows[i] {
                if pos[j] != usize::MAX {
                    m.rows[p].push((pos[j], v));
                }
            }
        }
        m
    }

    /// Strongly connected components that carry at least one cycle.
    pub fn cyclic_components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.n, self.nnz());
        let nodes: Vec<_> = (0..self.n).map(|_| g.add_node(())).collect();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
        tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
                c.sort_unstable();
                c
            })
            .filter(|c| c.len() > 1 || self.rows[c[0]].iter().any(|&(j, _)| j == c[0]))
            .collect()
    }
}

/// Outcome of power iteration on an irreducible block.
#[derive(Clone, Debug)]
pub struct Perron {
    pub value: f64,
    /// Positive right eigenvector, max-normalised.
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Perron value and right vector of an irreducible non-negative matrix.
///
/// Iterates the shifted matrix `M/s + I` (with `s` the largest row sum),
/// which is primitive even when `M` is periodic, and stops once the
/// Collatz–Wielandt bracket `[min (Bx)_i/x_i, max (Bx)_i/x_i]` is narrower than
/// `tol` relative to its upper end.
pub fn perron_irreducible(m: &SparseMatrix, tol: f64, max_iter: usize) -> Perron {
    let n = m.dim();
    if n == 0 {
        return Perron {
            value: 0.0,
            vector: Vec::new(),
            iterations: 0,
            converged: true,
        };
    }
    let scale = (0..n)
        .map(|i| m.row(i).iter().map(|&(_, v)| v).sum::<f64>())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Perron {
            value: 0.0,
            vector: vec![1.0; n],
            iterations: 0,
            converged: true,
        };
    }
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut bracket = (0.0, f64::INFINITY);
    for it in 1..=max_iter {
        m.mul_vec(&x, &mut y);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let mut top = 0.0f64;
        for i in 0..n {
            y[i] = y[i] / scale + x[i];
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
            top = top.max(y[i]);
        }
        for i in 0..n {
            x[i] = y[i] / top;
        }
        bracket = (lo, hi);
        if hi - lo <= tol * hi {
            return Perron {
                value: ((lo + hi) / 2.0 - 1.0) * scale,
                vector: x,
                iterations: it,
                converged: true,
            };
        }
    }
    log::warn!(
        "power iteration stopped at {max_iter} iterations with bracket {:?}",
        bracket
    );
    Perron {
        value: ((bracket.0 + bracket.1) / 2.0 - 1.0) * scale,
        vector: x,
        iterations: max_iter,
        converged: false,
    }
}

/// Spectral radius of a non-negative matrix, reducible or not: the largest
/// Perron value over its cyclic strongly connected components (zero when
/// there are none).
pub fn spectral_radius(m: &SparseMatrix) -> f64 {
    m.cyclic_components()
        .iter()
        .map(|c| {
            if c.len() == 1 {
                m.row(c[0])
                    .iter()
                    .find(|&&(j, _)| j == c[0])
                    .map_or(0.0, |&(_, v)| v)
            } else {
                perron_irreducible(&m.restrict(c), PERRON_TOL, PERRON_MAX_ITER).value
            }
        })
        .fold(0.0, f64::max)
}
