// Synthetic disk data with `f = (w, w²)`: sample the hidden surface over a grid
// in the `z₂`-plane and compare with `z₂ = z₁²`.

use riemann_dn::branches::sample_surface;
use riemann_dn::oracle::make_scenario;
use riemann_dn::Complex64;

pub fn run_example() -> riemann_dn::Result<f64> {
    let (_, ds, truth) = make_scenario("disk-z-z2", 256)?;
    let grid: Vec<Complex64> = (0..5)
        .flat_map(|j| (0..5).map(move |i| Complex64::new(-0.4 + 0.2 * i as f64, -0.2 + 0.1 * j as f64)))
        .collect();
    let cloud = sample_surface(&ds, &grid, 4);
    let worst = cloud.points.iter().map(|pt| (pt.z1 * pt.z1 - pt.z2).norm()).fold(0.0, f64::max);
    let p: Vec<usize> = cloud.fibers.iter().map(|f| f.p).collect();
    println!("{} points from {} nodes, fiber sizes {:?}", cloud.points.len(), grid.len(), p);
    for s in &cloud.skipped {
        println!("skipped {}: {}", s.xi, s.reason);
    }
    println!("max |z1^2 - z2| = {worst:.2e}");
    let xi = Complex64::new(0.09, 0.0);
    println!("oracle fiber over {xi}: {:?}", truth.fiber(xi));
    Ok(worst)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
