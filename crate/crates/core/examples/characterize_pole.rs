// Local series of `G` on a surface with one point at infinity, then the search for
// the smallest `p` making `G + L` the trace of a `p`-valued shock wave.

use riemann_dn::oracle::make_scenario;
use riemann_dn::shockwave::{characterize, choose_base, g_series, CharacterizeOptions, DEFAULT_ORDER};

pub fn run_example() -> riemann_dn::Result<usize> {
    let (_, ds, truth) = make_scenario("disk-pole", 256)?;
    let (base, radius) = choose_base(&ds)?;
    let g = g_series(&ds, base, radius, DEFAULT_ORDER, 64)?;
    let v = characterize(&g, 3, CharacterizeOptions::default())?;
    for a in &v.attempts {
        println!("p = {}: residual {:.2e}, discriminant nonzero {}", a.p, a.residual, a.discriminant_nonzero);
    }
    let p = v.p.unwrap_or(0);
    println!("base xi0 = {:.4}, xi1 = {:.4}, radius {radius:.3}", base.0, base.1);
    println!("p = {p}, L = {:.6} (oracle {:.6})", v.b.coeff(0), truth.l_value());
    Ok(p)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
