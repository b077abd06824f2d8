//! Gamma function via the Lanczos approximation.
//!
//! Coefficients are the g=7, n=9 set from the GNU Scientific Library (the
//! same set reproduced on Wikipedia). Every Gamma argument in this crate is
//! a positive integer or half-integer, so the tests validate against the
//! exact recursion chain from Gamma(1) = 1 and Gamma(1/2) = sqrt(pi).

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma(x) for real x (poles at non-positive integers return NaN/inf naturally).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection formula
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_P[0];
        for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
            acc += p / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// ln Gamma(x) for x > 0; avoids overflow of gamma() for large arguments.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_P[0];
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += p / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact Gamma at k/2 via upward recursion from Gamma(1)=1, Gamma(1/2)=sqrt(pi).
    fn gamma_half_chain(two_x: u32) -> f64 {
        assert!(two_x >= 1);
        let mut val = if two_x % 2 == 0 { 1.0 } else { PI.sqrt() };
        let mut k = if two_x % 2 == 0 { 2 } else { 1 };
        while k < two_x {
            val *= k as f64 / 2.0;
            k += 2;
        }
        val
    }

    #[test]
    fn lanczos_matches_half_integer_chain() {
        let mut worst: f64 = 0.0;
        for two_x in 1..=48u32 {
            let x = two_x as f64 / 2.0;
            let exact = gamma_half_chain(two_x);
            let rel = (gamma(x) - exact).abs() / exact;
            worst = worst.max(rel);
            assert!(rel < 1e-13, "gamma({x}) rel err {rel:.3e}");
        }
        println!("lanczos worst rel err on half-integers up to 24: {worst:.3e}");
    }

    #[test]
    fn ln_gamma_consistent() {
        for two_x in 1..=48u32 {
            let x = two_x as f64 / 2.0;
            let rel = (ln_gamma(x) - gamma(x).ln()).abs() / gamma(x).ln().abs().max(1.0);
            assert!(rel < 1e-12, "ln_gamma({x})");
        }
    }

    #[test]
    fn reflection_small_values() {
        // Gamma(1/2) = sqrt(pi) through the x < 0.5 branch via gamma(0.25)*gamma(0.75)... spot values
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(6.0) - 120.0).abs() / 120.0 < 1e-14);
    }
}
