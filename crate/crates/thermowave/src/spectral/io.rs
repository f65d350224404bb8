//! CSV field bundles with a JSON grid sidecar.
//!
//! CSV schema: `field,component,xi_index,node_index,re,im`, one row per
//! coefficient. Surface fields use `node_index = 0`. Floats are written in the
//! shortest round-trip form, so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{FrequencyGrid, SpectralField, SurfaceSpectral, VerticalGrid, YData};
use crate::error::{Error, Result};

pub enum FieldRef<'a> {
    Bulk(&'a SpectralField),
    Surface(&'a SurfaceSpectral),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub dim_h: usize,
    pub box_len: f64,
    pub modes: usize,
    pub depth: f64,
    pub nz: usize,
    pub layout: String,
    pub fields: Vec<String>,
}

impl GridSidecar {
    pub fn new(fg: &FrequencyGrid, vg: &VerticalGrid, fields: &[&str]) -> Self {
        Self {
            dim_h: fg.dim_h,
            box_len: fg.box_len,
            modes: fg.modes,
            depth: vg.depth,
            nz: vg.nz(),
            layout: "xi_index: row-major over directions, index k <-> wavenumber k (k < modes/2) or k - modes; \
                     node_index: Chebyshev-Gauss-Lobatto nodes ascending from x_n = 0 to b"
                .into(),
            fields: fields.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn grids(&self) -> Result<(FrequencyGrid, VerticalGrid)> {
        Ok((FrequencyGrid::new(self.dim_h, self.box_len, self.modes)?, VerticalGrid::new(self.depth, self.nz)?))
    }
}

pub fn write_bundle<W: Write>(w: W, entries: &[(&str, FieldRef)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["field", "component", "xi_index", "node_index", "re", "im"])?;
    for (name, field) in entries {
        match field {
            FieldRef::Bulk(f) => {
                for c in 0..f.comps {
                    for h in 0..f.nh {
                        for (z, v) in f.profile(c, h).iter().enumerate() {
                            write_row(&mut wr, name, c, h, z, *v)?;
                        }
                    }
                }
            }
            FieldRef::Surface(s) => {
                for c in 0..s.comps {
                    for h in 0..s.nh {
                        write_row(&mut wr, name, c, h, 0, s.at(c, h))?;
                    }
                }
            }
        }
    }
    wr.flush()?;
    Ok(())
}

fn write_row<W: Write>(wr: &mut csv::Writer<W>, name: &str, c: usize, h: usize, z: usize, v: C64) -> Result<()> {
    wr.write_record([
        name.to_string(),
        c.to_string(),
        h.to_string(),
        z.to_string(),
        format!("{:e}", v.re),
        format!("{:e}", v.im),
    ])?;
    Ok(())
}

#[derive(Deserialize)]
struct Row {
    field: String,
    component: usize,
    xi_index: usize,
    node_index: usize,
    re: f64,
    im: f64,
}

/// Parsed bundle: coefficients keyed by field name, then `(component, xi, node)`.
#[derive(Default, Debug)]
pub struct Bundle {
    entries: BTreeMap<String, BTreeMap<(usize, usize, usize), C64>>,
}

impl Bundle {
    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut b = Bundle::default();
        for row in rd.deserialize() {
            let row: Row = row?;
            b.entries
                .entry(row.field)
                .or_default()
                .insert((row.component, row.xi_index, row.node_index), C64::new(row.re, row.im));
        }
        Ok(b)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(|s| s.as_str()).collect()
    }

    fn get(&self, name: &str) -> Result<&BTreeMap<(usize, usize, usize), C64>> {
        self.entries.get(name).ok_or_else(|| Error::Config(format!("field '{name}' missing from CSV")))
    }

    pub fn bulk(&self, name: &str, comps: usize, nh: usize, nz: usize) -> Result<SpectralField> {
        let mut f = SpectralField::zeros(comps, nh, nz);
        for (&(c, h, z), &v) in self.get(name)? {
            if c >= comps || h >= nh || z >= nz {
                return Err(Error::Config(format!("field '{name}' index ({c},{h},{z}) out of range")));
            }
            f.data[(c * nh + h) * nz + z] = v;
        }
        Ok(f)
    }

    pub fn surface(&self, name: &str, comps: usize, nh: usize) -> Result<SurfaceSpectral> {
        let mut s = SurfaceSpectral::zeros(comps, nh);
        for (&(c, h, z), &v) in self.get(name)? {
            if c >= comps || h >= nh || z != 0 {
                return Err(Error::Config(format!("surface field '{name}' index ({c},{h},{z}) out of range")));
            }
            *s.at_mut(c, h) = v;
        }
        Ok(s)
    }
}

pub fn write_sidecar(path: &Path, sidecar: &GridSidecar) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(sidecar)? + "\n")?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<GridSidecar> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

impl YData {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_bundle(
            w,
            &[
                ("f", FieldRef::Bulk(&self.f)),
                ("g", FieldRef::Bulk(&self.g)),
                ("l", FieldRef::Bulk(&self.l)),
                ("k", FieldRef::Surface(&self.k)),
                ("h", FieldRef::Surface(&self.h)),
                ("m", FieldRef::Surface(&self.m)),
            ],
        )
    }

    pub fn read_csv<R: Read>(r: R, n: usize, fg: &FrequencyGrid, vg: &VerticalGrid) -> Result<Self> {
        let b = Bundle::read(r)?;
        let (nh, nz) = (fg.len(), vg.nz());
        Ok(Self {
            f: b.bulk("f", n, nh, nz)?,
            g: b.bulk("g", 1, nh, nz)?,
            l: b.bulk("l", 1, nh, nz)?,
            k: b.surface("k", n, nh)?,
            h: b.surface("h", 1, nh)?,
            m: b.surface("m", 1, nh)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ydata_csv_round_trip() {
        let fg = FrequencyGrid::new(1, 2.0, 4).unwrap();
        let vg = VerticalGrid::new(1.0, 5).unwrap();
        let mut d = YData::zeros(2, &fg, &vg);
        d.f.data[7] = C64::new(0.1, -1.0 / 3.0);
        *d.h.at_mut(0, 1) = C64::new(1e-300, 2.5);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = YData::read_csv(buf.as_slice(), 2, &fg, &vg).unwrap();
        assert_eq!(back, d);
    }
}
