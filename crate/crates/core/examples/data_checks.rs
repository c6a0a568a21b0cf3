// Consistency checks on boundary data: Green moments at exterior points, the
// index `p − q` of a line, and monodromy of the fiber around a branch point.

use riemann_dn::branches::continue_branches;
use riemann_dn::moments::index_p_minus_q;
use riemann_dn::oracle::{green_moment_check, make_scenario};
use riemann_dn::Complex64;

pub fn run_example() -> riemann_dn::Result<(f64, Vec<usize>)> {
    let (s, ds, truth) = make_scenario("disk-z-z2", 256)?;
    let mut green: f64 = 0.0;
    for k in 0..8 {
        let z = Complex64::from_polar(1.5, std::f64::consts::PI * (2 * k + 1) as f64 / 8.0);
        green = green.max(green_moment_check(&s, &ds, z)?.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    println!("Green moments at 8 exterior points: {green:.2e}");

    let mut bad = ds.clone();
    bad.components[0].theta[0] = bad.components[0].theta[0].map(|z| z * 1.1);
    let r = green_moment_check(&s, &bad, Complex64::new(1.5, 0.0))?;
    println!("after scaling theta_0 by 1.1: {:.2e}", r[0].norm());

    let (x0, x1) = (Complex64::new(-0.3, 0.0), Complex64::new(0.1, 0.0));
    let w = index_p_minus_q(&ds, x0, x1)?;
    println!("index of the line ({x0}, {x1}): {} (oracle {})", w.index, truth.index(x0, x1));

    let path: Vec<Complex64> =
        (0..=64).map(|k| Complex64::from_polar(0.25, std::f64::consts::TAU * k as f64 / 64.0)).collect();
    let perm = continue_branches(&ds, &path, 2)?.permutation();
    println!("monodromy around 0: {perm:?}");
    Ok((green, perm))
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
