use navier_bn::radial::*;
use navier_bn::dimconsts::make_dims;
fn main() {
    let g = build_grid(9, 1.0, 3000, 100.0).unwrap();
    let d = make_dims(9).unwrap();
    let lam = 5.0;
    let p = (9.0f64 + 4.0) / (9.0 - 4.0);
    let nu = (9.0f64 - 4.0) / 2.0;
    let rhs = RadialField::from_fn(&g, |r| {
        (d.c_n * (lam / (1.0 + lam * lam * r * r)).powf(nu)).powf(p)
    });
    let w = solve_navier_bilaplacian(&rhs).unwrap();
    let lw = laplacian_radial(&w);
    let llw = laplacian_radial(&lw);
    let res2 = integrate_samples(&g, |i| (llw.values[i] - rhs.values[i]).powi(2));
    let rhs2 = integrate_samples(&g, |i| rhs.values[i].powi(2));
    println!("res_l2 = {:.6e}, rhs_l2 = {:.6e}, ratio = {:.3e}", res2.sqrt(), rhs2.sqrt(), (res2/rhs2).sqrt());
    // largest weighted contributions
    let mut items: Vec<(usize, f64)> = (0..g.len()).map(|i| (i, g.weights[i]*(llw.values[i]-rhs.values[i]).powi(2))).collect();
    items.sort_by(|a,b| b.1.partial_cmp(&a.1).unwrap());
    for (i, c) in items.iter().take(8) {
        println!("  node {i} r={:.3e}: contrib {:.3e} (res {:.3e})", g.r[*i], c, (llw.values[*i]-rhs.values[*i]).abs());
    }
}
