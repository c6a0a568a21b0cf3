// Build the boundary traces `θu` from a Dirichlet-to-Neumann map and rebuild the
// embedding `f` from them. The disk DN map acts on Fourier modes by `|k|`.

use riemann_dn::boundary::{build_f, build_theta};
use riemann_dn::curve::Orientation;
use riemann_dn::oracle::{dn_apply, make_scenario};

pub fn run_example() -> riemann_dn::Result<f64> {
    let n = 128;
    let (s, exact, _) = make_scenario("disk-z-z2", n)?;
    let jacobian = vec![1.0; n];
    let mut theta = Vec::new();
    for ell in 0..3 {
        let u = exact.components[0].u[ell].clone();
        let nu = dn_apply(&s, std::slice::from_ref(&u))?.remove(0);
        theta.push(build_theta(&u, &nu, &jacobian, Orientation::Positive)?);
    }
    let worst = (0..3)
        .map(|l| {
            theta[l].0.iter().zip(&exact.components[0].theta[l].0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let f = build_f(&[[theta[0].clone(), theta[1].clone(), theta[2].clone()]])?;
    let square = f[0][0].0.iter().zip(&f[0][1].0).map(|(a, b)| (a * a - b).norm()).fold(0.0, f64::max);
    println!("theta from DN map vs exact: {worst:.2e}");
    println!("f2 - f1^2 on the boundary: {square:.2e}");
    Ok(worst.max(square))
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
