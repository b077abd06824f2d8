//! Small least-squares helpers shared by the expansion report and the
//! asymptotic-law fits.

/// Ordinary least squares y = a + b x; returns (b, a, r^2).
pub fn linfit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let m = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = m * sxx - sx * sx;
    let b = (m * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / m;
    let ybar = sy / m;
    let ss_tot: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xv, yv)| {
            let e = yv - (a + b * xv);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (b, a, r2)
}

/// Power-law fit y = C x^p through log-log least squares; returns (p, C, r^2).
/// All y must be positive.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (p, lc, r2) = linfit(&lx, &ly);
    (p, lc.exp(), r2)
}

/// Golden-section maximizer on [lo, hi], refined to `tol` relative interval
/// width. Plateau ties break to the left (<= comparison keeps the left
/// bracket), so the leftmost maximizer is returned deterministically.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol * (a.abs().max(b.abs()).max(1.0)) {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}
