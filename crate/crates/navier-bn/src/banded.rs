//! General banded matrices with LU solves.
//!
//! The radial operators assemble into bands of width <= 4 on each side.
//! The fast path factorizes without pivoting (the mapped operators are
//! close to diagonally dominant); if a pivot degenerates, the solve is
//! retried with partial pivoting inside the band.

use crate::error::{Error, Result};

/// Row-major band storage: `band[r][j]` holds A[r, r - kl + j] for
/// j in 0..kl+ku+1 (entries outside the matrix are zero).
#[derive(Debug, Clone)]
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    data: Vec<f64>,
    width: usize,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            data: vec![0.0; n * width],
            width,
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(c + self.kl >= r && c <= r + self.ku);
        self.data[r * self.width + (c + self.kl - r)]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(c + self.kl >= r && c <= r + self.ku, "({r},{c}) outside band");
        self.data[r * self.width + (c + self.kl - r)] = v;
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.width + (c + self.kl - r)] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for r in 0..self.n {
            let lo = r.saturating_sub(self.kl);
            let hi = (r + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for c in lo..=hi {
                acc += self.get(r, c) * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// Solve A x = b. Tries unpivoted LU first; falls back to partial
    /// pivoting when a pivot falls below `tiny` relative to its row scale.
    pub fn solve(&self, b: &[f64], diag: impl Fn() -> (usize, usize, f64, f64)) -> Result<Vec<f64>> {
        match self.solve_nopivot(b) {
            Ok(x) => Ok(x),
            Err(_) => self.solve_pivot(b).map_err(|reason| {
                let (n, points, r_min, rho) = diag();
                Error::SolverFailure {
                    reason,
                    n,
                    points,
                    r_min,
                    rho,
                }
            }),
        }
    }

    fn solve_nopivot(&self, b: &[f64]) -> std::result::Result<Vec<f64>, String> {
        let n = self.n;
        let (kl, ku, w) = (self.kl, self.ku, self.width);
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let piv = a[k * w + kl];
            let scale: f64 = (0..w).map(|j| a[k * w + j].abs()).fold(0.0, f64::max);
            if !(piv.abs() > 1e-13 * scale.max(1e-300)) {
                return Err(format!("pivot {piv:.3e} too small at row {k}"));
            }
            let rmax = (k + kl).min(n - 1);
            for r in k + 1..=rmax {
                // column k in row r sits at offset k + kl - r
                let off = k + kl - r;
                let m = a[r * w + off] / piv;
                if m != 0.0 {
                    a[r * w + off] = 0.0;
                    let cmax = (k + ku).min(n - 1);
                    for c in k + 1..=cmax {
                        a[r * w + (c + kl - r)] -= m * a[k * w + (c + kl - k)];
                    }
                    x[r] -= m * x[k];
                }
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let mut acc = x[k];
            let cmax = (k + ku).min(n - 1);
            for c in k + 1..=cmax {
                acc -= a[k * w + (c + kl - k)] * x[c];
            }
            x[k] = acc / a[k * w + kl];
        }
        Ok(x)
    }

    /// Partial pivoting within the band; U may fill up to kl + ku superdiagonals.
    fn solve_pivot(&self, b: &[f64]) -> std::result::Result<Vec<f64>, String> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let wu = kl + ku; // widened upper bandwidth
        let w = kl + wu + 1;
        let mut a = vec![0.0; n * w];
        for r in 0..n {
            for j in 0..self.width {
                let c = r as isize - kl as isize + j as isize;
                if c >= 0 && (c as usize) < n {
                    a[r * w + (c as usize + kl - r)] = self.data[r * self.width + j];
                }
            }
        }
        let mut x = b.to_vec();
        for k in 0..n {
            let rmax = (k + kl).min(n - 1);
            // pick pivot row
            let mut prow = k;
            let mut pval = a[k * w + kl].abs();
            for r in k + 1..=rmax {
                let v = a[r * w + (k + kl - r)].abs();
                if v > pval {
                    pval = v;
                    prow = r;
                }
            }
            if pval == 0.0 {
                return Err(format!("matrix numerically singular at column {k}"));
            }
            if prow != k {
                // swap the accessible segments of rows k and prow
                for c in k..=(k + wu).min(n - 1) {
                    let ik = k * w + (c + kl - k);
                    let ip = prow * w + (c + kl - prow);
                    a.swap(ik, ip);
                }
                x.swap(k, prow);
            }
            let piv = a[k * w + kl];
            for r in k + 1..=rmax {
                let off = k + kl - r;
                let m = a[r * w + off] / piv;
                if m != 0.0 {
                    a[r * w + off] = 0.0;
                    let cmax = (k + wu).min(n - 1);
                    for c in k + 1..=cmax {
                        a[r * w + (c + kl - r)] -= m * a[k * w + (c + kl - k)];
                    }
                    x[r] -= m * x[k];
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            let cmax = (k + wu).min(n - 1);
            for c in k + 1..=cmax {
                acc -= a[k * w + (c + kl - k)] * x[c];
            }
            x[k] = acc / a[k * w + kl];
        }
        Ok(x)
    }
}
