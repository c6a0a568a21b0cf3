use riemann_dn::boundary::{count_components, DnOracle};
use riemann_dn::curve::ClosedCurve;
use riemann_dn::oracle::{make_scenario, ScenarioOracle, SCENARIOS};
use riemann_dn::Result;

/// Presents the boundary components of another oracle in reverse order.
struct Reversed {
    inner: ScenarioOracle,
    curve: ClosedCurve,
}

impl Reversed {
    fn new(inner: ScenarioOracle) -> Self {
        let mut comps = inner.curve().components.clone();
        comps.reverse();
        let curve = ClosedCurve::new(comps).unwrap();
        Self { inner, curve }
    }
}

impl DnOracle for Reversed {
    fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    fn apply(&self, v: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut w = v.to_vec();
        w.reverse();
        let mut out = self.inner.apply(&w)?;
        out.reverse();
        Ok(out)
    }
}

#[test]
fn component_count_ignores_component_order() {
    for name in ["annulus", "two-disks"] {
        let (s, _, _) = make_scenario(name, 128).unwrap();
        let direct = count_components(&ScenarioOracle::new(s.clone()).unwrap()).unwrap();
        let rev = count_components(&Reversed::new(ScenarioOracle::new(s).unwrap())).unwrap();
        assert_eq!(direct.count, rev.count, "{name}");
        let m = direct.groups.iter().map(Vec::len).sum::<usize>();
        let mut mapped: Vec<Vec<usize>> = rev
            .groups
            .iter()
            .map(|g| {
                let mut g: Vec<usize> = g.iter().map(|&k| m - 1 - k).collect();
                g.sort();
                g
            })
            .collect();
        mapped.sort();
        let mut groups = direct.groups.clone();
        groups.iter_mut().for_each(|g| g.sort());
        groups.sort();
        assert_eq!(groups, mapped, "{name}");
    }
}

#[test]
fn oracle_datasets_satisfy_invariants() {
    for name in SCENARIOS {
        let (s, ds, _) = make_scenario(name, 256).unwrap();
        assert!(ds.invariant_residual() < 1e-8, "{name}: {}", ds.invariant_residual());
        // stored f agrees with the analytic embedding at every sample
        let b = s.boundary(256);
        let mut worst: f64 = 0.0;
        for (ci, comp) in ds.components.iter().enumerate() {
            for (k, &z) in b[ci].0.iter().enumerate() {
                let w = model_point(&s, z);
                let (f1, f2) = s.f(w);
                worst = worst.max((comp.f[0].0[k] - f1).norm()).max((comp.f[1].0[k] - f2).norm());
            }
        }
        assert!(worst < 1e-8, "{name}: {worst}");
    }
}

/// Model point over a planar boundary point: the identity except for the conformal
/// image, where the preimage is found by Newton's method.
fn model_point(s: &riemann_dn::oracle::Scenario, z: riemann_dn::Complex64) -> riemann_dn::Complex64 {
    let mut w = z;
    for _ in 0..50 {
        let h = 1e-7;
        let d = (s.planar(w + h) - s.planar(w - h)) / (2.0 * h);
        w -= (s.planar(w) - z) / d;
    }
    w
}
