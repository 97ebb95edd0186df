use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Regular grid of cubic cells; values live at cell centers, stored with
/// `x` fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    /// Lower corner of cell `(0, 0, 0)` [m].
    pub origin: Vec3,
    /// Cell edge length [m].
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl Lattice {
    pub fn new(origin: Vec3, spacing: f64, dims: [usize; 3]) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter(format!(
                "lattice needs a positive spacing and non-empty dims, got {spacing} / {dims:?}"
            )));
        }
        Ok(Self {
            origin,
            spacing,
            dims,
        })
    }

    /// `n^3` cube centered on the box `[min, max]` whose side is the largest
    /// box extent plus `margin` on each side.
    pub fn cube_around(min: &Vec3, max: &Vec3, n: usize, margin: f64) -> Result<Self> {
        let ext = max - min;
        let side = ext.x.max(ext.y).max(ext.z) + 2.0 * margin;
        if n == 0 || !(side > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cannot fit a {n}-cell cube around an empty box"
            )));
        }
        let center = (min + max) / 2.0;
        let h = side / n as f64;
        Self::new(center - Vec3::repeat(side / 2.0), h, [n; 3])
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Upper corner of the last cell.
    pub fn max_corner(&self) -> Vec3 {
        self.origin + Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64) * self.spacing
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        [i, j, idx / (self.dims[0] * self.dims[1])]
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.spacing
    }

    pub fn center_of(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords(idx);
        self.center(i, j, k)
    }

    /// Whether `p` lies in the closed box covered by the cells.
    pub fn covers(&self, p: &Vec3) -> bool {
        let hi = self.max_corner();
        (0..3).all(|a| p[a] >= self.origin[a] && p[a] <= hi[a])
    }

    /// Per-axis index ranges of the cells whose centers lie in the box
    /// `[lo, hi]`; `None` when no center does.
    pub fn cell_range(&self, lo: &Vec3, hi: &Vec3) -> Option<[(usize, usize); 3]> {
        let mut out = [(0, 0); 3];
        for a in 0..3 {
            let first = ((lo[a] - self.origin[a]) / self.spacing - 0.5).ceil().max(0.0);
            let last = ((hi[a] - self.origin[a]) / self.spacing - 0.5).floor();
            let last = last.min(self.dims[a] as f64 - 1.0);
            if last < first {
                return None;
            }
            out[a] = (first as usize, last as usize);
        }
        Some(out)
    }

    pub fn check_same(&self, other: &Lattice) -> Result<()> {
        if self != other {
            return Err(Error::LatticeMismatch(format!(
                "{:?} @ {:?} h = {} vs {:?} @ {:?} h = {}",
                self.dims, self.origin, self.spacing, other.dims, other.origin, other.spacing
            )));
        }
        Ok(())
    }
}

/// Header written next to a raw lattice file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawHeader {
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: f64,
    pub dtype: String,
    pub byte_order: String,
    pub layout: String,
}

fn header_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

/// Writes `values` as little-endian `f64` to `path` and a JSON header with
/// the same stem and extension `json`.
pub fn write_raw_lattice(path: &Path, lattice: &Lattice, values: &[f64]) -> Result<()> {
    if values.len() != lattice.len() {
        return Err(Error::SizeMismatch {
            what: "lattice values",
            expected: lattice.len(),
            found: values.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let header = RawHeader {
        dims: lattice.dims,
        origin: lattice.origin.into(),
        spacing: lattice.spacing,
        dtype: "float64".into(),
        byte_order: "little".into(),
        layout: "x-fastest".into(),
    };
    let text = serde_json::to_string_pretty(&header)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    std::fs::write(header_path(path), text)?;
    Ok(())
}

pub fn read_raw_lattice(path: &Path) -> Result<(Lattice, Vec<f64>)> {
    let text = std::fs::read_to_string(header_path(path))?;
    let header: RawHeader = serde_json::from_str(&text)
        .map_err(|e| Error::MeshFormat(format!("bad lattice header: {e}")))?;
    if header.dtype != "float64" || header.byte_order != "little" || header.layout != "x-fastest" {
        return Err(Error::MeshFormat(format!(
            "unsupported lattice encoding {} / {} / {}",
            header.dtype, header.byte_order, header.layout
        )));
    }
    let lattice = Lattice::new(header.origin.into(), header.spacing, header.dims)?;
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() != 8 * lattice.len() {
        return Err(Error::SizeMismatch {
            what: "lattice file bytes",
            expected: 8 * lattice.len(),
            found: bytes.len(),
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((lattice, values))
}
