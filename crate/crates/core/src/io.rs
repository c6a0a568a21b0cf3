//! File formats: dataset JSON, point-cloud CSV/JSON and series JSON.
//!
//! JSON output is canonical: object keys sorted, complex numbers as `[re, im]`,
//! floats in shortest round-trip form, one trailing newline. Writing, reading and
//! writing again gives identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boundary::BoundaryDataset;
use crate::branches::Cloud;
use crate::curve::{check_grid, ClosedCurve, CurveComponent, Orientation, PeriodicSamples};
use crate::error::{Error, Result};
use crate::series::BivariateSeries;

/// Relative disagreement tolerated between a stored `f` and the one recomputed from `θ`.
pub const STORED_F_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<Complex64>>>,
    pub n: usize,
    pub orientation: i64,
    /// Planar positions of the samples, when the curve is planar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Complex64>>,
    pub theta: Vec<Vec<Complex64>>,
    pub u: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub components: Vec<ComponentFile>,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

impl DatasetFile {
    pub fn from_dataset(ds: &BoundaryDataset, meta: BTreeMap<String, Value>) -> Self {
        let components = ds
            .curve
            .components
            .iter()
            .zip(&ds.components)
            .map(|(c, d)| ComponentFile {
                f: Some(d.f.iter().map(|s| s.0.clone()).collect()),
                n: c.n,
                orientation: c.orientation.sign() as i64,
                points: c.points.as_ref().map(|p| p.0.clone()),
                theta: d.theta.iter().map(|s| s.0.clone()).collect(),
                u: d.u.to_vec(),
            })
            .collect();
        Self { components, meta }
    }

    pub fn to_dataset(&self) -> Result<BoundaryDataset> {
        let mut curve = Vec::new();
        let mut u = Vec::new();
        let mut theta = Vec::new();
        for (k, c) in self.components.iter().enumerate() {
            check_grid(c.n)?;
            let bad = |what: &str| Error::InvalidGrid(format!("component {k}: {what} does not match n = {}", c.n));
            if c.u.len() != 3 || c.u.iter().any(|v| v.len() != c.n) {
                return Err(bad("u"));
            }
            if c.theta.len() != 3 || c.theta.iter().any(|v| v.len() != c.n) {
                return Err(bad("theta"));
            }
            let points = match &c.points {
                Some(p) if p.len() != c.n => return Err(bad("points")),
                Some(p) => Some(PeriodicSamples::new(p.clone())?),
                None => None,
            };
            curve.push(CurveComponent { n: c.n, orientation: Orientation::from_sign(c.orientation)?, points });
            u.push([c.u[0].clone(), c.u[1].clone(), c.u[2].clone()]);
            theta.push([
                PeriodicSamples::new(c.theta[0].clone())?,
                PeriodicSamples::new(c.theta[1].clone())?,
                PeriodicSamples::new(c.theta[2].clone())?,
            ]);
        }
        let ds = BoundaryDataset::new(ClosedCurve::new(curve)?, u, theta)?;
        let scale = ds.f_scale();
        for (k, c) in self.components.iter().enumerate() {
            if let Some(f) = &c.f {
                if f.len() != 2 || f.iter().any(|v| v.len() != c.n) {
                    return Err(Error::InvalidGrid(format!("component {k}: f does not match n = {}", c.n)));
                }
                let worst = (0..2)
                    .flat_map(|j| f[j].iter().zip(&ds.components[k].f[j].0).map(|(a, b)| (a - b).norm()))
                    .fold(0.0, f64::max);
                if worst > STORED_F_TOLERANCE * scale {
                    return Err(Error::Invalid(format!(
                        "component {k}: stored f differs from theta ratios by {worst:.3e}"
                    )));
                }
            }
        }
        Ok(ds)
    }
}

/// Canonical JSON text of any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's map is ordered, so going through Value sorts every object's keys
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_canonical_json(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_dataset(path: &Path) -> Result<(DatasetFile, BoundaryDataset)> {
    let file: DatasetFile = read_json(path)?;
    let ds = file.to_dataset()?;
    Ok((file, ds))
}

pub fn read_series(path: &Path) -> Result<BivariateSeries> {
    read_json(path)
}

/// Point cloud as CSV. `forms[ℓ]`, when given, holds one value per cloud point and adds
/// the columns `form{ℓ}_re, form{ℓ}_im`.
pub fn cloud_csv(cloud: &Cloud, forms: &[(usize, Vec<Complex64>)]) -> Result<String> {
    for (ell, v) in forms {
        if v.len() != cloud.points.len() {
            return Err(Error::Invalid(format!("form {ell}: {} values for {} points", v.len(), cloud.points.len())));
        }
    }
    let mut out = String::from("z1_re,z1_im,z2_re,z2_im,branch");
    for (ell, _) in forms {
        write!(out, ",form{ell}_re,form{ell}_im").unwrap();
    }
    out.push('\n');
    for (k, pt) in cloud.points.iter().enumerate() {
        write!(out, "{},{},{},{},{}", pt.z1.re, pt.z1.im, pt.z2.re, pt.z2.im, pt.branch).unwrap();
        for (_, v) in forms {
            write!(out, ",{},{}", v[k].re, v[k].im).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CloudRow {
    pub branch: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub forms: BTreeMap<String, Complex64>,
    pub z1: Complex64,
    pub z2: Complex64,
}

/// JSON equivalent of [`cloud_csv`].
pub fn cloud_rows(cloud: &Cloud, forms: &[(usize, Vec<Complex64>)]) -> Vec<CloudRow> {
    cloud
        .points
        .iter()
        .enumerate()
        .map(|(k, pt)| CloudRow {
            branch: pt.branch,
            forms: forms.iter().map(|(ell, v)| (format!("form{ell}"), v[k])).collect(),
            z1: pt.z1,
            z2: pt.z2,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::CloudPoint;
    use crate::oracle::make_scenario;

    #[test]
    fn dataset_round_trip_is_byte_identical() {
        for name in ["disk-z-z2", "two-disks", "disk-pole"] {
            let (_, ds, _) = make_scenario(name, 64).unwrap();
            let mut meta = BTreeMap::new();
            meta.insert("scenario".to_string(), Value::String(name.into()));
            let first = to_canonical_json(&DatasetFile::from_dataset(&ds, meta)).unwrap();
            let parsed: DatasetFile = serde_json::from_str(&first).unwrap();
            let back = parsed.to_dataset().unwrap();
            let second = to_canonical_json(&DatasetFile::from_dataset(&back, parsed.meta.clone())).unwrap();
            assert_eq!(first, second);
            assert_eq!(to_canonical_json(&parsed).unwrap(), first);
        }
    }

    #[test]
    fn keys_are_sorted() {
        let (_, ds, _) = make_scenario("disk-z-z2", 16).unwrap();
        let text = to_canonical_json(&DatasetFile::from_dataset(&ds, BTreeMap::new())).unwrap();
        let keys = ["\"f\"", "\"n\"", "\"orientation\"", "\"points\"", "\"theta\"", "\"u\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(text.find("\"components\"").unwrap() < text.find("\"meta\"").unwrap());
    }

    #[test]
    fn rejects_bad_files() {
        let (_, ds, _) = make_scenario("disk-z-z2", 16).unwrap();
        let good = DatasetFile::from_dataset(&ds, BTreeMap::new());
        let mut odd = good.clone();
        odd.components[0].u[1].pop();
        assert!(odd.to_dataset().is_err());
        let mut wrong_f = good.clone();
        wrong_f.components[0].f.as_mut().unwrap()[0][3] += Complex64::new(0.1, 0.0);
        assert!(wrong_f.to_dataset().is_err());
        let mut no_f = good.clone();
        no_f.components[0].f = None;
        assert!(no_f.to_dataset().is_ok());
        let mut zero = good;
        zero.components[0].theta[0] = vec![Complex64::new(0.0, 0.0); 16];
        assert!(matches!(zero.to_dataset(), Err(Error::ThetaDivision { .. })));
    }

    #[test]
    fn cloud_formats() {
        let cloud = Cloud {
            points: vec![
                CloudPoint { z1: Complex64::new(0.5, -0.25), z2: Complex64::new(0.1, 0.0), branch: 0 },
                CloudPoint { z1: Complex64::new(-0.5, 0.25), z2: Complex64::new(0.1, 0.0), branch: 1 },
            ],
            skipped: vec![],
            fibers: vec![],
        };
        let csv = cloud_csv(&cloud, &[]).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "z1_re,z1_im,z2_re,z2_im,branch");
        assert_eq!(csv.lines().nth(1).unwrap(), "0.5,-0.25,0.1,0,0");
        let forms = vec![(1, vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0)])];
        let csv = cloud_csv(&cloud, &forms).unwrap();
        assert!(csv.starts_with("z1_re,z1_im,z2_re,z2_im,branch,form1_re,form1_im\n"));
        assert!(csv.lines().nth(2).unwrap().ends_with(",3,4"));
        assert!(cloud_csv(&cloud, &[(0, vec![])]).is_err());
        let rows = cloud_rows(&cloud, &forms);
        assert_eq!(rows[1].forms["form1"], Complex64::new(3.0, 4.0));
    }
}
