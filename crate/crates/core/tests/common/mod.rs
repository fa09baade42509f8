//! Independent reference solvers used as oracles by the integration tests.

#![allow(dead_code)]

/// Dirichlet finite-difference Hamiltonian -1/2 d^2/dx^2 + V on [a, b] with
/// `n` interior points. Point-like wells are added as -eps / h on the node
/// closest to their position.
pub struct FdChain {
    pub h: f64,
    pub x: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: f64,
}

impl FdChain {
    pub fn new(a: f64, b: f64, n: usize, v: impl Fn(f64) -> f64) -> Self {
        let h = (b - a) / (n + 1) as f64;
        let x: Vec<f64> = (1..=n).map(|i| a + i as f64 * h).collect();
        let diag = x.iter().map(|&x| 1.0 / (h * h) + v(x)).collect();
        Self { h, x, diag, off: -0.5 / (h * h) }
    }

    pub fn add_delta(&mut self, x0: f64, eps: f64) {
        let i = self
            .x
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x0).abs().total_cmp(&(b.1 - x0).abs()))
            .unwrap()
            .0;
        self.diag[i] -= eps / self.h;
    }

    /// Number of eigenvalues below `e` (Sturm sequence count).
    pub fn count_below(&self, e: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for (i, d) in self.diag.iter().enumerate() {
            let coupling = if i == 0 { 0.0 } else { self.off * self.off / q };
            q = d - e - coupling;
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th eigenvalue (0-based) by bisection on the Sturm count.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let lo0 = self.diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * self.off.abs();
        let hi0 = self.diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * self.off.abs();
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl FdChain {
    /// Eigenvector for an eigenvalue near `e` by inverse iteration with a
    /// tridiagonal solve, normalized to sum |v|^2 h = 1.
    pub fn eigenvector(&self, e: f64) -> Vec<f64> {
        let n = self.diag.len();
        let shift = e - 1e-9 * e.abs().max(1.0);
        let mut v = vec![1.0; n];
        for _ in 0..4 {
            // Thomas algorithm on (H - shift) x = v
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            let b0 = self.diag[0] - shift;
            c[0] = self.off / b0;
            d[0] = v[0] / b0;
            for i in 1..n {
                let m = self.diag[i] - shift - self.off * c[i - 1];
                c[i] = self.off / m;
                d[i] = (v[i] - self.off * d[i - 1]) / m;
            }
            let mut x = vec![0.0; n];
            x[n - 1] = d[n - 1];
            for i in (0..n - 1).rev() {
                x[i] = d[i] - c[i] * x[i + 1];
            }
            let norm = (x.iter().map(|a| a * a).sum::<f64>() * self.h).sqrt();
            v = x.iter().map(|a| a / norm).collect();
        }
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        v
    }

    pub fn index_of(&self, x0: f64) -> usize {
        ((x0 - self.x[0]) / self.h).round() as usize
    }
}

/// Step potential with the node on the step set to the mean of both sides.
pub fn step_potential(v_left: f64, v_right: f64, h: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        if x.abs() < 0.5 * h {
            0.5 * (v_left + v_right)
        } else if x < 0.0 {
            v_left
        } else {
            v_right
        }
    }
}

/// Single point-like well on a step, on a box of length 40 with spacing
/// 40 / (n + 1); `n` odd puts a node on the well.
pub fn fd_delta_chain(eps: f64, v_left: f64, v_right: f64, n: usize) -> FdChain {
    let h = 40.0 / (n + 1) as f64;
    let mut c = FdChain::new(-20.0, 20.0, n, step_potential(v_left, v_right, h));
    c.add_delta(0.0, eps);
    c
}

/// Lowest eigenvalue of a single point-like well of depth `eps` at the
/// origin between barriers `v_left` (x < 0) and `v_right`, on a box of
/// length 40.
pub fn fd_delta_energy(eps: f64, v_left: f64, v_right: f64, n: usize) -> f64 {
    fd_delta_chain(eps, v_left, v_right, n).eigenvalue(0)
}

/// Splitting of the lowest doublet of two equal point-like wells of depth
/// `eps`, a distance `l` apart, all in a flat background `v`.
pub fn fd_doublet_splitting(eps: f64, v: f64, l: f64, n: usize) -> f64 {
    let mut c = FdChain::new(-20.0, 20.0 + l, n, |_| v);
    c.add_delta(0.0, eps);
    c.add_delta(l, eps);
    c.eigenvalue(1) - c.eigenvalue(0)
}

/// Exact splitting of the doublet of two delta wells of strength `eps` a
/// distance `l` apart in a flat background, from the even and odd matching
/// conditions k (1 + tanh(k l / 2)) = 2 eps and k (1 + coth(k l / 2)) = 2 eps.
pub fn exact_doublet_splitting(eps: f64, l: f64) -> f64 {
    let root = |f: &dyn Fn(f64) -> f64| {
        let (mut lo, mut hi) = (1e-12, 4.0 * eps);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let ks = root(&|k| k * (1.0 + (0.5 * k * l).tanh()) - 2.0 * eps);
    let ka = root(&|k| k * (1.0 + 1.0 / (0.5 * k * l).tanh()) - 2.0 * eps);
    0.5 * (ks * ks - ka * ka)
}

/// Composite Simpson rule on [a, b] with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
