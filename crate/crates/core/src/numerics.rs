//! Small numerical building blocks: compensated summation, Gauss–Legendre
//! rules, polynomial extrapolation and finite-difference weights.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Neumaier compensated accumulator. Summation order is fixed by the caller,
/// so results are bit-reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if math::abs(self.sum) >= math::abs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton.
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, d) = legendre_poly_and_deriv(n, x);
            let dx = p / d;
            x -= dx;
            if math::abs(dx) < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_poly_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_poly_and_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_poly_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Neville tableau evaluated at 0: polynomial extrapolation of `(x_k, f_k)`
/// to `x → 0`. Walks the tableau diagonal and returns the entry whose
/// change from its predecessor is smallest — deeper columns amplify sample
/// noise, so the minimum marks the usable depth. The change itself is the
/// uncertainty estimate.
pub fn neville_to_zero(xs: &[f64], fs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2 && fs.len() == n);
    let mut tab: Vec<f64> = fs.to_vec();
    let mut diag = tab[0];
    let mut best = (f64::INFINITY, tab[0]);
    for j in 1..n {
        for i in 0..(n - j) {
            tab[i] = (-xs[i + j] * tab[i] + xs[i] * tab[i + 1]) / (xs[i] - xs[i + j]);
        }
        let change = math::abs(tab[0] - diag);
        diag = tab[0];
        if change < best.0 {
            best = (change, diag);
        }
    }
    (best.1, best.0)
}

/// Fornberg weights for the `order`-th derivative at `x0` from samples at
/// `nodes` (arbitrary distinct abscissae).
pub fn fornberg_weights(nodes: &[f64], x0: f64, order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order);
    let m = order;
    // c[k][j]: weight of node j for the k-th derivative, built incrementally.
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = core::cmp::min(i, m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c.swap_remove(m)
}

/// Dense least squares via normal equations with symmetric Gaussian
/// elimination; adequate for the tiny fit systems used here.
pub fn least_squares(design: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let rows = design.len();
    assert!(rows >= 1 && rhs.len() == rows);
    let cols = design[0].len();
    let mut ata = vec![vec![0.0; cols + 1]; cols];
    for r in 0..rows {
        for i in 0..cols {
            for j in 0..cols {
                ata[i][j] += design[r][i] * design[r][j];
            }
            ata[i][cols] += design[r][i] * rhs[r];
        }
    }
    // Gaussian elimination with partial pivoting on the augmented system.
    for k in 0..cols {
        let mut piv = k;
        for i in (k + 1)..cols {
            if math::abs(ata[i][k]) > math::abs(ata[piv][k]) {
                piv = i;
            }
        }
        ata.swap(k, piv);
        let d = ata[k][k];
        for j in k..=cols {
            ata[k][j] /= d;
        }
        for i in 0..cols {
            if i != k {
                let f = ata[i][k];
                for j in k..=cols {
                    ata[i][j] -= f * ata[k][j];
                }
            }
        }
    }
    (0..cols).map(|i| ata[i][cols]).collect()
}

/// Banded LU solve with partial pivoting, `kl` sub- and `ku` super-diagonals.
/// Factorisation is stored so repeated right-hand sides amortise the setup.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    // LAPACK-style band storage with room for fill-in: (2*kl + ku + 1) x n.
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Factor a band matrix given as `entries[(row, col)] -> value` pairs.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self, usize> {
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        let idx = |i: usize, j: usize| -> usize {
            // element (i, j) lives at row kl + ku + i - j of column j
            (kl + ku + i - j) + j * ldab
        };
        for &(i, j, v) in entries {
            debug_assert!(j <= i + kl && i <= j + ku);
            ab[idx(i, j)] += v;
        }
        let mut ipiv = vec![0usize; n];
        for k in 0..n {
            // pivot search within the column band
            let imax = core::cmp::min(n - 1, k + kl);
            let mut piv = k;
            let mut best = math::abs(ab[idx(k, k)]);
            for i in (k + 1)..=imax {
                let v = math::abs(ab[idx(i, k)]);
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Err(k);
            }
            ipiv[k] = piv;
            if piv != k {
                let jmax = core::cmp::min(n - 1, k + kl + ku);
                for j in k..=jmax {
                    let a = idx(k, j);
                    let b = idx(piv, j);
                    ab.swap(a, b);
                }
            }
            let pivot = ab[idx(k, k)];
            for i in (k + 1)..=imax {
                let l = ab[idx(i, k)] / pivot;
                ab[idx(i, k)] = l;
                let jmax = core::cmp::min(n - 1, k + kl + ku);
                for j in (k + 1)..=jmax {
                    let akj = ab[idx(k, j)];
                    if akj != 0.0 {
                        ab[idx(i, j)] -= l * akj;
                    }
                }
            }
        }
        Ok(Self { n, kl, ku, ab, ipiv })
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let ldab = 2 * self.kl + self.ku + 1;
        let idx = |i: usize, j: usize| (self.kl + self.ku + i - j) + j * ldab;
        for k in 0..n {
            let piv = self.ipiv[k];
            if piv != k {
                rhs.swap(k, piv);
            }
            let imax = core::cmp::min(n - 1, k + self.kl);
            for i in (k + 1)..=imax {
                rhs[i] -= self.ab[idx(i, k)] * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = core::cmp::min(n - 1, k + self.kl + self.ku);
            let mut acc = rhs[k];
            for j in (k + 1)..=jmax {
                acc -= self.ab[idx(k, j)] * rhs[j];
            }
            rhs[k] = acc / self.ab[idx(k, k)];
        }
    }
}
