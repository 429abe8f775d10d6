//! Field files: a `<name>.json` sidecar describing the grid plus a
//! `<name>.f64` blob of raw little-endian doubles in row-major order.
//! Coefficient sets and geometric data are directories of such pairs with a
//! `meta.json` carrying the scalar parameters.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSet, GeometricData};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid, ScalarField, SymTensorField, VectorField};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldMeta {
    pub d: usize,
    pub n: Vec<usize>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    pub dtype: String,
    pub order: String,
    pub endianness: String,
}

impl FieldMeta {
    fn for_grid(grid: &Grid) -> Self {
        Self {
            d: grid.dim(),
            n: grid.sizes().to_vec(),
            l: grid.periods().to_vec(),
            dtype: "f64".into(),
            order: "row-major".into(),
            endianness: "little".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dtype != "f64" || self.order != "row-major" || self.endianness != "little" {
            return Err(Error::Config(format!(
                "unsupported field encoding: dtype={} order={} endianness={}",
                self.dtype, self.order, self.endianness
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.d, &self.n, &self.l)
    }
}

/// Writes `<dir>/<name>.json` and `<dir>/<name>.f64`.
pub fn write_field(dir: &Path, name: &str, field: &ScalarField) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = FieldMeta::for_grid(field.grid());
    fs::write(
        dir.join(format!("{name}.json")),
        serde_json::to_string_pretty(&meta)?,
    )?;
    let mut bytes = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(dir.join(format!("{name}.f64")), bytes)?;
    Ok(())
}

/// Reads the sidecar pair written by [`write_field`], reconstructing the grid
/// from the metadata.
pub fn read_field(dir: &Path, name: &str) -> Result<ScalarField> {
    let meta: FieldMeta =
        serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json")))?)?;
    meta.validate()?;
    let grid = meta.grid()?;
    let bytes = fs::read(dir.join(format!("{name}.f64")))?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Config(format!(
            "field {name}: expected {} bytes, found {}",
            grid.len() * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ScalarField::from_values(&grid, values)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CoefficientMeta {
    #[serde(rename = "N")]
    n_param: u32,
    mode: String,
}

/// Writes a coefficient set as a directory of field files plus `meta.json`.
pub fn write_coefficient_set(dir: &Path, cs: &CoefficientSet) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, f) in [
        ("a", cs.a()),
        ("b", cs.b()),
        ("csq", cs.csq()),
        ("dsq", cs.dsq()),
        ("cd", cs.cd()),
        ("h", cs.h()),
    ] {
        write_field(dir, name, f)?;
    }
    let meta = CoefficientMeta {
        n_param: cs.n_param(),
        mode: "direct".into(),
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_coefficient_set(dir: &Path) -> Result<CoefficientSet> {
    let meta: CoefficientMeta =
        serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
    let a = read_field(dir, "a")?;
    let b = read_field(dir, "b")?;
    let csq = read_field(dir, "csq")?;
    let dsq = read_field(dir, "dsq")?;
    let cd = read_field(dir, "cd")?;
    let h = read_field(dir, "h")?;
    CoefficientSet::new(meta.n_param, a, b, csq, dsq, cd, h)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GeometricMeta {
    nu: f64,
    r_override: bool,
    d: usize,
}

/// Writes geometric constraint data (tau, pi, W, sigma, R) as a directory.
pub fn write_geometric_data(dir: &Path, gd: &GeometricData) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_field(dir, "tau", &gd.tau)?;
    write_field(dir, "pi", &gd.pi)?;
    write_field(dir, "r", &gd.r)?;
    let d = gd.w.grid().dim();
    for i in 0..d {
        write_field(dir, &format!("w{i}"), gd.w.component(i))?;
    }
    for i in 0..d {
        for j in i..d {
            write_field(dir, &format!("sigma{i}{j}"), gd.sigma.get(i, j))?;
        }
    }
    let meta = GeometricMeta {
        nu: gd.nu,
        r_override: gd.r_override,
        d,
    };
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_geometric_data(dir: &Path) -> Result<GeometricData> {
    let meta: GeometricMeta =
        serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)?;
    let tau = read_field(dir, "tau")?;
    let pi = read_field(dir, "pi")?;
    let r = read_field(dir, "r")?;
    let d = meta.d;
    let grid = tau.grid().clone();
    let mut w_comps = Vec::with_capacity(d);
    for i in 0..d {
        w_comps.push(read_field(dir, &format!("w{i}"))?);
    }
    let mut sigma_comps = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            sigma_comps.push(read_field(dir, &format!("sigma{i}{j}"))?);
        }
    }
    Ok(GeometricData {
        tau,
        pi,
        nu: meta.nu,
        w: VectorField::new(w_comps)?,
        sigma: SymTensorField::new(&grid, sigma_comps)?,
        r,
        r_override: meta.r_override,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn t2() -> Grid {
        make_grid(2, &[8, 6], &[2.0 * PI, 4.0]).unwrap()
    }

    #[test]
    fn field_roundtrip_is_bitwise_exact() {
        let g = t2();
        let f = ScalarField::from_fn(&g, |x| (x[0].sin() + 0.3 * x[1]).exp());
        let dir = tempfile::tempdir().unwrap();
        write_field(dir.path(), "u", &f).unwrap();
        let back = read_field(dir.path(), "u").unwrap();
        assert_eq!(back.grid().sizes(), g.sizes());
        assert_eq!(back.grid().periods(), g.periods());
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let g = t2();
        let f = ScalarField::constant(&g, 1.0);
        let dir = tempfile::tempdir().unwrap();
        write_field(dir.path(), "u", &f).unwrap();
        let blob = dir.path().join("u.f64");
        let mut bytes = fs::read(&blob).unwrap();
        bytes.truncate(bytes.len() - 8);
        fs::write(&blob, bytes).unwrap();
        assert!(read_field(dir.path(), "u").is_err());
    }

    #[test]
    fn unsupported_encoding_is_rejected() {
        let g = t2();
        let f = ScalarField::constant(&g, 1.0);
        let dir = tempfile::tempdir().unwrap();
        write_field(dir.path(), "u", &f).unwrap();
        let sidecar = dir.path().join("u.json");
        let text = fs::read_to_string(&sidecar)
            .unwrap()
            .replace("little", "big");
        fs::write(&sidecar, text).unwrap();
        assert!(matches!(read_field(dir.path(), "u"), Err(Error::Config(_))));
    }

    #[test]
    fn coefficient_set_roundtrip() {
        let g = t2();
        let cs = CoefficientSet::new(
            4,
            ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].cos()),
            ScalarField::from_fn(&g, |x| x[1].sin()),
            ScalarField::constant(&g, 0.25),
            ScalarField::constant(&g, 2.0),
            ScalarField::constant(&g, 0.0),
            ScalarField::from_fn(&g, |x| 3.0 + x[0].sin() * x[1].cos()),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_coefficient_set(dir.path(), &cs).unwrap();
        let back = read_coefficient_set(dir.path()).unwrap();
        assert_eq!(back.n_param(), 4);
        assert_eq!(back.a().values(), cs.a().values());
        assert_eq!(back.h().values(), cs.h().values());
        assert_eq!(back.grid().periods(), g.periods());
    }

    #[test]
    fn geometric_data_roundtrip() {
        let g = make_grid(3, &[4, 4, 4], &[2.0 * PI; 3]).unwrap();
        let w = VectorField::new(vec![
            ScalarField::from_fn(&g, |x| x[1].sin()),
            ScalarField::constant(&g, 0.0),
            ScalarField::from_fn(&g, |x| x[0].cos()),
        ])
        .unwrap();
        let gd = GeometricData {
            tau: ScalarField::from_fn(&g, |x| 1.0 + 0.2 * x[2].sin()),
            pi: ScalarField::constant(&g, 1.5),
            nu: -0.25,
            w,
            sigma: SymTensorField::zero(&g),
            r: ScalarField::constant(&g, 0.0),
            r_override: false,
        };
        let dir = tempfile::tempdir().unwrap();
        write_geometric_data(dir.path(), &gd).unwrap();
        let back = read_geometric_data(dir.path()).unwrap();
        assert_eq!(back.nu, gd.nu);
        assert!(!back.r_override);
        assert_eq!(back.tau.values(), gd.tau.values());
        assert_eq!(back.w.component(0).values(), gd.w.component(0).values());
        assert_eq!(back.sigma.get(0, 1).values(), gd.sigma.get(0, 1).values());
    }
}
