//! One-dimensional quadrature: Gauss-Legendre rules and an adaptive
//! bisection driver used for the constant cross-checks and boundary-kernel
//! integrals.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build an m-point rule by Newton iteration on P_m.
    pub fn new(m: usize) -> Self {
        assert!(m >= 2);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let half = m.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_deriv(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x; // left half in increasing order
            weights[i] = w;
            nodes[m - 1 - i] = x;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate f over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + hw * x);
        }
        acc * hw
    }
}

fn legendre_and_deriv(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive quadrature by interval bisection: an interval is accepted when
/// the 16-point value agrees with the sum of its two halves.
pub fn adaptive<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let rule = gl16();
    let whole = rule.integrate(f, a, b);
    let mut total = 0.0;
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut evals = 0usize;
    while let Some((a, b, whole, depth)) = stack.pop() {
        let mid = 0.5 * (a + b);
        let left = rule.integrate(f, a, mid);
        let right = rule.integrate(f, mid, b);
        evals += 1;
        if (left + right - whole).abs() <= tol.max(1e-300) || depth >= 48 {
            if depth >= 48 {
                return Err(Error::QuadratureFailure(format!(
                    "bisection depth exceeded on [{a:.6e}, {b:.6e}]"
                )));
            }
            total += left + right;
        } else {
            stack.push((a, mid, left, depth + 1));
            stack.push((mid, b, right, depth + 1));
        }
        if evals > 2_000_000 {
            return Err(Error::QuadratureFailure("evaluation budget exceeded".into()));
        }
    }
    Ok(total)
}

fn gl16() -> &'static GaussLegendre {
    use std::sync::OnceLock;
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Integral over [0, inf) of r^a (1+r^2)^(-b), split at r=1 with the u = 1/r
/// substitution mapping the tail to u^(2b-a-2) (1+u^2)^(-b) on (0, 1].
/// Requires 2b - a - 2 >= 0 (integrability at infinity) and a > -1.
pub fn radial_power_integral(a: f64, b: f64, tol: f64) -> Result<f64> {
    if 2.0 * b - a - 2.0 < 0.0 {
        return Err(Error::QuadratureFailure(format!(
            "divergent tail: r^{a} (1+r^2)^-{b}"
        )));
    }
    let inner = adaptive(|r| r.powf(a) * (1.0 + r * r).powf(-b), 0.0, 1.0, tol)?;
    let outer = adaptive(
        |u| u.powf(2.0 * b - a - 2.0) * (1.0 + u * u).powf(-b),
        0.0,
        1.0,
        tol,
    )?;
    Ok(inner + outer)
}

/// tail_T^inf t^a (1+t^2)^(-b) dt for T >= 1 via t = T/u on u in (0,1].
pub fn radial_power_tail(t_lo: f64, a: f64, b: f64) -> f64 {
    debug_assert!(t_lo >= 1.0);
    let rule = gl64();
    // integrand: T^(a+1) u^(2b-a-2) (u^2 + T^2)^(-b); evaluate in log form to
    // dodge overflow of T^(a+1) at large T.
    rule.integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let ln = (a + 1.0) * t_lo.ln() + (2.0 * b - a - 2.0) * u.ln()
                - b * (u * u + t_lo * t_lo).ln();
            ln.exp()
        },
        0.0,
        1.0,
    )
}

fn gl64() -> &'static GaussLegendre {
    use std::sync::OnceLock;
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}
