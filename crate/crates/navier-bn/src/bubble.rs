//! Closed-form bubble profiles on the centered ball and the deflection-form
//! energy integrals built from them.
//!
//! For a center bubble on B_rho the boundary defect theta = U - PU is an
//! exact quadratic: Delta^2 theta = 0 with theta(rho) = U(rho) and
//! (Delta theta)(rho) = (Delta U)(rho), and the only regular radial
//! biharmonic functions are 1 and r^2. That closed form is what makes the
//! energy *deflections* (S2^{n/4} minus the three bubble integrals)
//! computable as small quantities: they are assembled from the exterior
//! tail and integrals against theta, never by subtracting two O(S2^{n/4})
//! numbers. Gaps of order 1e-22 relative to S2 stay fully resolved.

use crate::dimconsts::DimParams;
use crate::error::Result;
use crate::potential::PotentialSpec;
use crate::quad;
use crate::radial::{integrate_samples, RadialGrid};

/// Center bubble U_{0,lambda} on B_rho with its boundary-defect quadratic.
#[derive(Debug, Clone)]
pub struct BubbleProfile {
    pub n: f64,
    pub nu: f64,
    pub two_star: f64,
    pub c_n: f64,
    pub lambda: f64,
    pub rho: f64,
    /// U(rho)
    pub u_rho: f64,
    /// (Delta U)(rho)
    pub du_rho: f64,
    /// theta(r) = a_theta + b_theta r^2
    pub a_theta: f64,
    pub b_theta: f64,
    /// d/dlambda of the defect coefficients
    pub da_theta: f64,
    pub db_theta: f64,
}

impl BubbleProfile {
    pub fn new(dims: &DimParams, rho: f64, lambda: f64) -> Self {
        let n = dims.n as f64;
        let nu = (n - 4.0) / 2.0;
        let c_n = dims.c_n;
        let u_rho = c_n * (nu * (lambda.ln() - (lambda * lambda * rho * rho).ln_1p())).exp();
        let du_rho = delta_u_raw(n, c_n, lambda, rho);
        let b_theta = du_rho / (2.0 * n);
        let a_theta = u_rho - b_theta * rho * rho;
        let dlu_rho = dlam_u_raw(nu, c_n, lambda, rho);
        let dldu_rho = dlam_delta_u_raw(n, c_n, lambda, rho);
        let db_theta = dldu_rho / (2.0 * n);
        let da_theta = dlu_rho - db_theta * rho * rho;
        BubbleProfile {
            n,
            nu,
            two_star: dims.two_star_f(),
            c_n,
            lambda,
            rho,
            u_rho,
            du_rho,
            a_theta,
            b_theta,
            da_theta,
            db_theta,
        }
    }

    /// U(r) = c_n (lambda / (1 + lambda^2 r^2))^{(n-4)/2}
    pub fn u(&self, r: f64) -> f64 {
        let t2 = self.lambda * self.lambda * r * r;
        self.c_n * (self.nu * (self.lambda.ln() - t2.ln_1p())).exp()
    }

    /// U^p for arbitrary power p, evaluated in log form.
    pub fn u_pow(&self, r: f64, p: f64) -> f64 {
        let t2 = self.lambda * self.lambda * r * r;
        (p * (self.c_n.ln() + self.nu * (self.lambda.ln() - t2.ln_1p()))).exp()
    }

    /// Delta U(r) = -(n-4) c_n lambda^{n/2} (n + 2 lambda^2 r^2)(1+lambda^2 r^2)^{-n/2-1}...
    /// see `delta_u_raw` for the exact exponent bookkeeping.
    pub fn delta_u(&self, r: f64) -> f64 {
        delta_u_raw(self.n, self.c_n, self.lambda, r)
    }

    pub fn theta(&self, r: f64) -> f64 {
        self.a_theta + self.b_theta * r * r
    }

    pub fn pu(&self, r: f64) -> f64 {
        self.u(r) - self.theta(r)
    }

    pub fn delta_pu(&self, r: f64) -> f64 {
        self.delta_u(r) - self.du_rho
    }

    /// d/dlambda U(r) = (nu U / lambda)(1 - lambda^2 r^2)/(1 + lambda^2 r^2)
    pub fn dlam_u(&self, r: f64) -> f64 {
        dlam_u_raw(self.nu, self.c_n, self.lambda, r)
    }

    pub fn dlam_theta(&self, r: f64) -> f64 {
        self.da_theta + self.db_theta * r * r
    }

    pub fn dlam_pu(&self, r: f64) -> f64 {
        self.dlam_u(r) - self.dlam_theta(r)
    }

    pub fn dlam_delta_u(&self, r: f64) -> f64 {
        dlam_delta_u_raw(self.n, self.c_n, self.lambda, r)
    }

    /// Delta of d/dlambda PU (the Laplacian of the scale mode).
    pub fn dlam_delta_pu(&self, r: f64) -> f64 {
        self.dlam_delta_u(r) - dlam_delta_u_raw(self.n, self.c_n, self.lambda, self.rho)
    }
}

fn delta_u_raw(n: f64, c_n: f64, lambda: f64, r: f64) -> f64 {
    let t2 = lambda * lambda * r * r;
    -(n - 4.0)
        * c_n
        * (n / 2.0 * lambda.ln() - (n / 2.0) * t2.ln_1p()).exp()
        * (n + 2.0 * t2)
}

fn dlam_u_raw(nu: f64, c_n: f64, lambda: f64, r: f64) -> f64 {
    let t2 = lambda * lambda * r * r;
    let u = c_n * (nu * (lambda.ln() - t2.ln_1p())).exp();
    nu * u / lambda * (1.0 - t2) / (1.0 + t2)
}

fn dlam_delta_u_raw(n: f64, c_n: f64, lambda: f64, r: f64) -> f64 {
    let t2 = lambda * lambda * r * r;
    let du = delta_u_raw(n, c_n, lambda, r);
    du * (n / (2.0 * lambda) + 4.0 * lambda * r * r / (n + 2.0 * t2)
        - n * lambda * r * r / (1.0 + t2))
}

/// Stable difference U_{lambda}(r) - U_{mu}(r) via expm1 of the log ratio.
pub fn u_diff(p_lam: &BubbleProfile, p_mu: &BubbleProfile, r: f64) -> f64 {
    let (lam, mu, nu) = (p_lam.lambda, p_mu.lambda, p_lam.nu);
    let t_mu = mu * mu * r * r;
    let dln = nu * ((lam / mu).ln() - ((lam * lam - mu * mu) * r * r / (1.0 + t_mu)).ln_1p());
    p_mu.u(r) * dln.exp_m1()
}

/// Stable difference Delta U_{lambda}(r) - Delta U_{mu}(r).
pub fn delta_u_diff(p_lam: &BubbleProfile, p_mu: &BubbleProfile, r: f64) -> f64 {
    let (lam, mu, n) = (p_lam.lambda, p_mu.lambda, p_lam.n);
    let t_mu = mu * mu * r * r;
    let dln = n / 2.0 * (lam / mu).ln()
        + (2.0 * (lam * lam - mu * mu) * r * r / (n + 2.0 * t_mu)).ln_1p()
        - n / 2.0 * ((lam * lam - mu * mu) * r * r / (1.0 + t_mu)).ln_1p();
    p_mu.delta_u(r) * dln.exp_m1()
}

/// Stable difference PU_lambda(r) - PU_mu(r).
pub fn pu_diff(p_lam: &BubbleProfile, p_mu: &BubbleProfile, r: f64) -> f64 {
    let du = u_diff(p_lam, p_mu, r);
    let dth = (p_lam.a_theta - p_mu.a_theta) + (p_lam.b_theta - p_mu.b_theta) * r * r;
    du - dth
}

/// Stable difference Delta PU_lambda(r) - Delta PU_mu(r).
pub fn delta_pu_diff(p_lam: &BubbleProfile, p_mu: &BubbleProfile, r: f64) -> f64 {
    delta_u_diff(p_lam, p_mu, r) - delta_u_diff(p_lam, p_mu, p_lam.rho)
}

/// The three deflections of Theorem-2.1 type plus the potential integral,
/// all as small quantities:
///   d1 = S2^{n/4} - |Delta PU|^2_{B}    (= exterior tail + int U^{2*-1} theta)
///   d3 = S2^{n/4} - int_B PU^{2*}
///   w  =            int_B V PU^2
#[derive(Debug, Clone, Copy)]
pub struct Deflections {
    pub d1: f64,
    pub d3: f64,
    pub w: f64,
    pub tail: f64,
}

/// Exterior-tail integral of U^{2*} over R^n minus B_rho.
pub fn tail_two_star(dims: &DimParams, rho: f64, lambda: f64) -> f64 {
    let n = dims.n as f64;
    dims.c_n.powf(dims.two_star_f())
        * dims.omega_n
        * quad::radial_power_tail(lambda * rho, n - 1.0, n)
}

pub fn deflections(
    dims: &DimParams,
    grid: &RadialGrid,
    lambda: f64,
    pot: &PotentialSpec,
) -> Deflections {
    let p = BubbleProfile::new(dims, grid.rho, lambda);
    let tail = tail_two_star(dims, grid.rho, lambda);
    let ts = dims.two_star_f();
    // d1: |Delta PU|^2 = int U^{2*-1} PU by parts (both Navier traces vanish),
    // so S2^{n/4} - |Delta PU|^2 = tail + int_B U^{2*-1} theta.
    let d1 = tail
        + integrate_samples(grid, |i| {
            let r = grid.r[i];
            p.u_pow(r, ts - 1.0) * p.theta(r)
        })
        + p.u_pow(0.0, ts - 1.0) * p.theta(0.0) * grid.inner_disk_measure();
    // d3: pointwise U^{2*} - PU^{2*} = -U^{2*} expm1(2* ln1p(-theta/U))
    let drop = |r: f64| {
        let x = (p.theta(r) / p.u(r)).min(1.0);
        -p.u_pow(r, ts) * (ts * (-x).ln_1p()).exp_m1()
    };
    let d3 = tail
        + integrate_samples(grid, |i| drop(grid.r[i]))
        + drop(0.0) * grid.inner_disk_measure();
    // w: straight quadrature, the integrand is uniformly O(lambda^{-4})-small
    let w = integrate_samples(grid, |i| {
        let r = grid.r[i];
        let pu = p.pu(r);
        pot.eval(r) * pu * pu
    }) + pot.eval(0.0) * p.pu(0.0) * p.pu(0.0) * grid.inner_disk_measure();
    Deflections { d1, d3, w, tail }
}

/// Gap of the quotient along the bubble family, exactly:
///   S2 - S_{eps V}[PU_lambda]
///     = -S2 expm1( ln1p(-delta_1) - (2/2*) ln1p(-delta_3) ),
/// with delta_1 = (d1 - eps w)/S2^{n/4}, delta_3 = d3/S2^{n/4}.
pub fn gap_from_deflections(dims: &DimParams, defl: &Deflections, eps: f64) -> f64 {
    let s2n4 = dims.s2_pow_n4();
    let delta1 = (defl.d1 - eps * defl.w) / s2n4;
    let delta3 = defl.d3 / s2n4;
    -dims.sobolev_s2 * ((-delta1).ln_1p() - 2.0 / dims.two_star_f() * (-delta3).ln_1p()).exp_m1()
}

pub fn bubble_gap(
    dims: &DimParams,
    grid: &RadialGrid,
    lambda: f64,
    eps: f64,
    pot: &PotentialSpec,
) -> f64 {
    gap_from_deflections(dims, &deflections(dims, grid, lambda, pot), eps)
}

/// Tail-corrected Rayleigh quotient of the free bubble U_{0,lambda} on a
/// large-rho surrogate of R^n: quadrature of |Delta U|^2 and U^{2*} inside
/// the ball plus the analytic exterior integrals.
pub fn sobolev_quotient_of_bubble(dims: &DimParams, grid: &RadialGrid, lambda: f64) -> Result<f64> {
    let n = dims.n as f64;
    let p = BubbleProfile::new(dims, grid.rho, lambda);
    let num_in = integrate_samples(grid, |i| {
        let d = p.delta_u(grid.r[i]);
        d * d
    }) + p.delta_u(0.0).powi(2) * grid.inner_disk_measure();
    // (Delta U)^2 = (n-4)^2 c^2 lambda^{n}(n+2t^2)^2 (1+t^2)^{-n-2}, t = lambda r;
    // expand (n+2t^2)^2 and reuse the power-tail transform per term.
    let t0 = lambda * grid.rho;
    let k = (n - 4.0) * (n - 4.0) * dims.c_n * dims.c_n * dims.omega_n;
    let num_tail = k
        * (n * n * quad::radial_power_tail(t0, n - 1.0, n)
            + 4.0 * n * quad::radial_power_tail(t0, n + 1.0, n)
            + 4.0 * quad::radial_power_tail(t0, n + 3.0, n));
    let den_in = integrate_samples(grid, |i| p.u_pow(grid.r[i], dims.two_star_f()))
        + p.u_pow(0.0, dims.two_star_f()) * grid.inner_disk_measure();
    let den_tail = tail_two_star(dims, grid.rho, lambda);
    Ok((num_in + num_tail) / (den_in + den_tail).powf(2.0 / dims.two_star_f()))
}
