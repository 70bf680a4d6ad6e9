//! Space/time grids and gridded kernel fields with CSV and binary export.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform 1-D space grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl SpaceGrid {
    /// Symmetric window [−radius, radius] with `n` nodes (n odd keeps 0 on
    /// the grid).
    pub fn symmetric(radius: f64, n: usize) -> Self {
        assert!(n >= 2 && radius > 0.0);
        SpaceGrid { min: -radius, step: 2.0 * radius / (n - 1) as f64, n }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn max(&self) -> f64 {
        self.node(self.n - 1)
    }

    /// Index of the nearest grid node.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.min) / self.step).round() as isize;
        i.clamp(0, self.n as isize - 1) as usize
    }

    /// Exact node index if `x` sits on the grid (within 1e-9·step).
    pub fn exact_index(&self, x: f64) -> Option<usize> {
        let s = (x - self.min) / self.step;
        let i = s.round();
        if (s - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.n {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Sorted time nodes on [t_min, T]; log-spaced with any required output
/// times spliced in exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeLadder {
    pub nodes: Vec<f64>,
}

impl TimeLadder {
    pub fn logarithmic(t_min: f64, t_max: f64, n: usize, must_include: &[f64]) -> Self {
        assert!(t_min > 0.0 && t_max > t_min && n >= 2);
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| t_min * (t_max / t_min).powf(i as f64 / (n - 1) as f64))
            .collect();
        for &t in must_include {
            assert!(t >= t_min && t <= t_max, "required time {t} outside ladder");
            nodes.push(t);
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * *b);
        TimeLadder { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Exact index of a node (used for output times, which are spliced in).
    pub fn exact_index(&self, t: f64) -> Option<usize> {
        self.nodes
            .iter()
            .position(|&v| (v - t).abs() < 1e-11 * t.max(1e-30))
    }

    /// Linear interpolation weights, clamped to the ladder.
    pub fn weights(&self, t: f64) -> (usize, f64) {
        crate::interp::linear_weights(&self.nodes, t)
    }
}

/// What a kernel field holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Q0,
    QPartial,
    Q,
    Phi,
    PKappa,
}

/// Quadrature provenance carried by a field.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FieldMeta {
    pub mesh_gamma: f64,
    pub mesh_nodes: usize,
    /// Largest sub-floor (extrapolated) share of a time integral, over the
    /// production output times.
    pub extrapolated_share: f64,
    /// Total magnitude clipped from below zero (p^κ only).
    pub negativity_clipped: f64,
}

/// Values of a kernel on a (t, x, y) grid. Storage is dense; `coverage`
/// marks which (x,y) pairs are actually populated when the field was
/// assembled on a restricted pair set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelField {
    pub kind: FieldKind,
    pub t_nodes: Vec<f64>,
    pub x: SpaceGrid,
    pub y: SpaceGrid,
    pub values: Vec<f64>,
    /// Row-major (x, y) mask; `None` means fully covered.
    pub coverage: Option<Vec<bool>>,
    pub meta: FieldMeta,
}

impl KernelField {
    pub fn zeros(kind: FieldKind, t_nodes: Vec<f64>, x: SpaceGrid, y: SpaceGrid) -> Self {
        let n = t_nodes.len() * x.n * y.n;
        KernelField {
            kind,
            t_nodes,
            x,
            y,
            values: vec![0.0; n],
            coverage: None,
            meta: FieldMeta::default(),
        }
    }

    #[inline]
    pub fn idx(&self, it: usize, ix: usize, iy: usize) -> usize {
        (it * self.x.n + ix) * self.y.n + iy
    }

    #[inline]
    pub fn at(&self, it: usize, ix: usize, iy: usize) -> f64 {
        self.values[self.idx(it, ix, iy)]
    }

    #[inline]
    pub fn set(&mut self, it: usize, ix: usize, iy: usize, v: f64) {
        let i = self.idx(it, ix, iy);
        self.values[i] = v;
    }

    pub fn covered(&self, ix: usize, iy: usize) -> bool {
        match &self.coverage {
            None => true,
            Some(mask) => mask[ix * self.y.n + iy],
        }
    }

    /// Mutable slice for one time index.
    pub fn time_slice_mut(&mut self, it: usize) -> &mut [f64] {
        let stride = self.x.n * self.y.n;
        &mut self.values[it * stride..(it + 1) * stride]
    }

    pub fn time_slice(&self, it: usize) -> &[f64] {
        let stride = self.x.n * self.y.n;
        &self.values[it * stride..(it + 1) * stride]
    }

    /// Sup norm over covered entries of one time slice.
    pub fn sup_at(&self, it: usize) -> f64 {
        let mut sup = 0.0f64;
        for ix in 0..self.x.n {
            for iy in 0..self.y.n {
                if self.covered(ix, iy) {
                    sup = sup.max(self.at(it, ix, iy).abs());
                }
            }
        }
        sup
    }

    /// Sup norm over all covered entries.
    pub fn sup(&self) -> f64 {
        (0..self.t_nodes.len())
            .map(|it| self.sup_at(it))
            .fold(0.0, f64::max)
    }

    /// Writes `t,x,y,value` rows for covered entries, restricted to the given
    /// time indices (or all when empty).
    pub fn write_csv<W: Write>(&self, out: &mut W, t_indices: &[usize]) -> Result<()> {
        writeln!(out, "t,x,y,value")?;
        let all: Vec<usize>;
        let its: &[usize] = if t_indices.is_empty() {
            all = (0..self.t_nodes.len()).collect();
            &all
        } else {
            t_indices
        };
        for &it in its {
            for ix in 0..self.x.n {
                for iy in 0..self.y.n {
                    if self.covered(ix, iy) {
                        writeln!(
                            out,
                            "{},{},{},{}",
                            self.t_nodes[it],
                            self.x.node(ix),
                            self.y.node(iy),
                            self.at(it, ix, iy)
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    const MAGIC: &'static [u8; 4] = b"LVHK";
    const VERSION: u32 = 1;

    /// Versioned binary dump: magic, version, JSON header (grids, kind,
    /// coverage, meta), then raw little-endian f64 values.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(Self::MAGIC)?;
        f.write_all(&Self::VERSION.to_le_bytes())?;
        let header = serde_json::to_vec(&BinHeader {
            kind: self.kind,
            t_nodes: self.t_nodes.clone(),
            x: self.x,
            y: self.y,
            coverage: self.coverage.clone(),
            meta: self.meta.clone(),
        })
        .map_err(|e| Error::BadArtifact(e.to_string()))?;
        f.write_all(&(header.len() as u64).to_le_bytes())?;
        f.write_all(&header)?;
        f.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            f.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::BadArtifact("bad magic in kernel file".into()));
        }
        let mut word = [0u8; 4];
        f.read_exact(&mut word)?;
        if u32::from_le_bytes(word) != Self::VERSION {
            return Err(Error::BadArtifact("unsupported kernel file version".into()));
        }
        let mut len8 = [0u8; 8];
        f.read_exact(&mut len8)?;
        let hlen = u64::from_le_bytes(len8) as usize;
        let mut hbuf = vec![0u8; hlen];
        f.read_exact(&mut hbuf)?;
        let header: BinHeader =
            serde_json::from_slice(&hbuf).map_err(|e| Error::BadArtifact(e.to_string()))?;
        f.read_exact(&mut len8)?;
        let n = u64::from_le_bytes(len8) as usize;
        if n != header.t_nodes.len() * header.x.n * header.y.n {
            return Err(Error::BadArtifact("value count does not match grids".into()));
        }
        let mut values = Vec::with_capacity(n);
        let mut v8 = [0u8; 8];
        for _ in 0..n {
            f.read_exact(&mut v8)?;
            values.push(f64::from_le_bytes(v8));
        }
        Ok(KernelField {
            kind: header.kind,
            t_nodes: header.t_nodes,
            x: header.x,
            y: header.y,
            values,
            coverage: header.coverage,
            meta: header.meta,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BinHeader {
    kind: FieldKind,
    t_nodes: Vec<f64>,
    x: SpaceGrid,
    y: SpaceGrid,
    coverage: Option<Vec<bool>>,
    meta: FieldMeta,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_contains_origin() {
        let g = SpaceGrid::symmetric(12.0, 65);
        assert_eq!(g.exact_index(0.0), Some(32));
        assert_eq!(g.exact_index(12.0), Some(64));
        assert_eq!(g.exact_index(0.1), None);
        assert!((g.step - 0.375).abs() < 1e-15);
    }

    #[test]
    fn ladder_includes_required_times() {
        let l = TimeLadder::logarithmic(1.0 / 64.0, 2.0, 40, &[0.5, 1.0, 2.0]);
        for t in [0.5, 1.0, 2.0] {
            assert!(l.exact_index(t).is_some(), "{t}");
        }
        assert!(l.nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn binary_round_trip() {
        let mut f = KernelField::zeros(
            FieldKind::PKappa,
            vec![0.5, 1.0],
            SpaceGrid::symmetric(2.0, 5),
            SpaceGrid::symmetric(2.0, 5),
        );
        for it in 0..2 {
            for ix in 0..5 {
                for iy in 0..5 {
                    f.set(it, ix, iy, (it * 100 + ix * 10 + iy) as f64 * 0.25);
                }
            }
        }
        f.meta.mesh_gamma = 2.0;
        let dir = std::env::temp_dir().join("levyheat_grid_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.bin");
        f.write_binary(&path).unwrap();
        let g = KernelField::read_binary(&path).unwrap();
        assert_eq!(f.values, g.values);
        assert_eq!(f.t_nodes, g.t_nodes);
        assert_eq!(f.x, g.x);
        assert!((g.meta.mesh_gamma - 2.0).abs() < 1e-15);
    }
}
