//! The parametrix correction φ_y(t,x) = ∫_0^t ∫ p^{𝔎_z}(t−s,x,z) q(s,z,y) dzds
//! and the assembled kernel p^κ = p^{𝔎_y} + φ_y.
//!
//! The base point of the frozen kernel inside the integral is the integration
//! variable z — the construction's defining subtlety.

use rayon::prelude::*;

use super::mesh::{end_panel, extrapolate_down, ConvMesh};
use super::series::Convolver;
use crate::frozen::FrozenKernelCache;
use crate::grid::{FieldKind, KernelField};
use crate::{Error, Result};

/// Blend of two non-negative ladder rows, log-linear where both are positive.
fn blend_rows(a: &[f64], b: &[f64], w: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if w == 0.0 {
                x
            } else if x > 1e-300 && y > 1e-300 {
                (x.ln() * (1.0 - w) + y.ln() * w).exp()
            } else {
                x * (1.0 - w) + y * w
            }
        })
        .collect()
}

/// Frozen-density rows for all bases at an off-ladder time.
fn frozen_rows_at(cache: &FrozenKernelCache, tau: f64) -> Vec<Vec<f64>> {
    let (i, w) = cache.ladder().weights(tau);
    (0..cache.n_bases())
        .map(|ib| {
            if w == 0.0 {
                cache.density_row(ib, i).to_vec()
            } else {
                blend_rows(cache.density_row(ib, i), cache.density_row(ib, i + 1), w)
            }
        })
        .collect()
}

/// Builds the matrix P[ix][iz] = p^{𝔎_z}(τ, z − x) on the coarse grid, with
/// entries at |z − x| ≤ near_cut zeroed (they are handled on the fine
/// lattice when the kernel is narrower than the coarse spacing).
fn frozen_matrix(
    rows: &[Vec<f64>],
    n: usize,
    stride: usize,
    center: usize,
    near_cells: Option<usize>,
) -> Vec<f64> {
    let mut p = vec![0.0f64; n * n];
    for ix in 0..n {
        for iz in 0..n {
            if let Some(k) = near_cells {
                if iz.abs_diff(ix) <= k {
                    continue;
                }
            }
            let offset = iz as i64 - ix as i64;
            let iu = center as i64 + offset * stride as i64;
            p[ix * n + iz] = rows[iz][iu as usize];
        }
    }
    p
}

pub struct PhiEngine<'a> {
    pub cache: &'a FrozenKernelCache,
    pub conv: &'a Convolver,
}

impl<'a> PhiEngine<'a> {
    /// Coarse-grid spacing in u-lattice steps.
    fn stride(&self) -> usize {
        (self.cache.params.bases.step / self.cache.u_grid.step).round() as usize
    }

    /// Inner integral g(s)[ix][iy] = Σ_z p^{𝔎_z}(τ, z−x)·q(s,z,y)·dz at one
    /// mesh node, hybrid coarse/fine when the kernel width h⁻¹(1/τ) falls
    /// under the coarse spacing. `scale_tau` is h⁻¹(1/τ).
    fn inner_slice(
        &self,
        q_slice: &[f64],
        tau: f64,
        scale_tau: f64,
        n: usize,
    ) -> Vec<f64> {
        let cache = self.cache;
        let coarse_step = cache.params.bases.step;
        let rows = frozen_rows_at(cache, tau);
        let stride = self.stride();
        let center = cache.u_index(0.0).unwrap();
        let fine_needed = scale_tau < 2.0 * coarse_step;
        let near_cells = if fine_needed {
            Some(((4.0 * coarse_step).max(16.0 * scale_tau) / coarse_step).ceil() as usize)
        } else {
            None
        };
        let p = frozen_matrix(&rows, n, stride, center, near_cells);
        let mut g = vec![0.0f64; n * n];
        // Coarse part: g += P·q·Δz.
        for ix in 0..n {
            let grow = &mut g[ix * n..(ix + 1) * n];
            for iz in 0..n {
                let f = p[ix * n + iz] * coarse_step;
                if f == 0.0 {
                    continue;
                }
                let qrow = &q_slice[iz * n..(iz + 1) * n];
                for iy in 0..n {
                    grow[iy] += f * qrow[iy];
                }
            }
        }
        if let Some(k_cells) = near_cells {
            // Fine part: Σ_{|v| ≤ v_cut} p^{𝔎_{N(x+v)}}(τ, v)·q(s, x+v, y)·du
            // with the base frozen at the nearest coarse node (no
            // interpolation in the base point).
            let du = cache.u_grid.step;
            let v_cut = (k_cells as f64 + 0.5) * coarse_step;
            let m_cut = (v_cut / du).floor() as i64;
            let bases = &cache.params.bases;
            for ix in 0..n {
                let x = bases.node(ix);
                let grow = &mut g[ix * n..(ix + 1) * n];
                for m in -m_cut..=m_cut {
                    let v = m as f64 * du;
                    let z = x + v;
                    let ib = bases.nearest(z);
                    let pv = rows[ib][(center as i64 + m) as usize];
                    if pv == 0.0 {
                        continue;
                    }
                    // Linear interpolation of q in its first argument.
                    let pos = (z - bases.min) / coarse_step;
                    let j = (pos.floor() as i64).clamp(0, n as i64 - 2) as usize;
                    let wz = (pos - j as f64).clamp(0.0, 1.0);
                    let qa = &q_slice[j * n..(j + 1) * n];
                    let qb = &q_slice[(j + 1) * n..(j + 2) * n];
                    let f = pv * du;
                    for iy in 0..n {
                        grow[iy] += f * (qa[iy] * (1.0 - wz) + qb[iy] * wz);
                    }
                }
            }
        }
        g
    }

    /// φ on the full (ladder × x × y) grid. Ladder nodes with t ≤ 3·t_min are
    /// filled by downward power extrapolation in t.
    pub fn phi_field(&self, q: &KernelField, sf: &crate::scale::ScaleFunctions) -> Result<KernelField> {
        let cache = self.cache;
        if q.x != cache.params.bases {
            return Err(Error::GridMismatch(
                "q must live on the cache base grid".into(),
            ));
        }
        let n = q.x.n;
        let ladder = cache.ladder();
        let floor = ladder.t_min();
        let mut out = KernelField::zeros(FieldKind::Phi, ladder.nodes.clone(), q.x, q.y);
        out.meta.mesh_gamma = self.conv.mesh_gamma;
        out.meta.mesh_nodes = self.conv.mesh_nodes;

        let computed: Vec<(usize, Vec<f64>, f64)> = (0..ladder.len())
            .into_par_iter()
            .filter_map(|it| {
                let t = ladder.nodes[it];
                let mesh =
                    ConvMesh::build(t, floor, self.conv.mesh_gamma, self.conv.mesh_nodes)?;
                let mut c = vec![0.0f64; n * n];
                let mut band: Vec<Vec<f64>> = vec![Vec::new(); mesh.nodes.len()];
                let band_idx = [
                    mesh.lo_band.0,
                    mesh.lo_band.1,
                    mesh.hi_band.0,
                    mesh.hi_band.1,
                ];
                for (k, (&s, &w)) in mesh.nodes.iter().zip(&mesh.weights).enumerate() {
                    let tau = t - s;
                    let q_slice = super::series::slice_at_pub(q, s);
                    let scale_tau = sf.time_scale(tau);
                    let g = self.inner_slice(&q_slice, tau, scale_tau, n);
                    for (ci, gi) in c.iter_mut().zip(&g) {
                        *ci += w * gi;
                    }
                    if band_idx.contains(&k) {
                        band[k] = g;
                    }
                }
                let (lo1, lo2) = mesh.lo_band;
                let (hi1, hi2) = mesh.hi_band;
                let (s_lo1, s_lo2) = (mesh.nodes[lo1], mesh.nodes[lo2]);
                let (s_hi1, s_hi2) = (t - mesh.nodes[hi1], t - mesh.nodes[hi2]);
                let mut end_mass = 0.0f64;
                let mut mid_mass = 0.0f64;
                for idx in 0..n * n {
                    let lo = end_panel(s_lo1, band[lo1][idx], s_lo2, band[lo2][idx]);
                    let hi = end_panel(s_hi1, band[hi1][idx], s_hi2, band[hi2][idx]);
                    mid_mass += c[idx].abs();
                    end_mass += lo.abs() + hi.abs();
                    c[idx] += lo + hi;
                }
                let share = end_mass / (end_mass + mid_mass).max(1e-300);
                Some((it, c, share))
            })
            .collect();

        let mut share_out = 0.0f64;
        let mut done = vec![false; ladder.len()];
        for (it, c, share) in computed {
            out.time_slice_mut(it).copy_from_slice(&c);
            done[it] = true;
            if self
                .conv
                .t_out
                .iter()
                .any(|&t| (t - ladder.nodes[it]).abs() < 1e-11 * t)
            {
                share_out = share_out.max(share);
            }
        }
        out.meta.extrapolated_share = share_out;

        let t_a = ladder
            .nodes
            .iter()
            .position(|&t| t > 3.0 * floor)
            .ok_or_else(|| Error::GridMismatch("ladder has no nodes above 3·t_min".into()))?;
        let t_b = ladder
            .nodes
            .iter()
            .position(|&t| t >= 9.0 * floor)
            .unwrap_or(ladder.len() - 1)
            .max(t_a + 1);
        let (ta, tb) = (ladder.nodes[t_a], ladder.nodes[t_b]);
        let va = out.time_slice(t_a).to_vec();
        let vb = out.time_slice(t_b).to_vec();
        for it in 0..ladder.len() {
            if done[it] {
                continue;
            }
            let t = ladder.nodes[it];
            let slice = out.time_slice_mut(it);
            for idx in 0..n * n {
                slice[idx] = extrapolate_down(t, ta, va[idx], tb, vb[idx]);
            }
        }
        Ok(out)
    }

    /// p^κ(t,x,y) = p^{𝔎_y}(t, y−x) + φ_y(t,x) on the full grid.
    pub fn assemble_p_kappa(&self, phi: &KernelField) -> KernelField {
        let cache = self.cache;
        let n = phi.x.n;
        let stride = self.stride();
        let center = cache.u_index(0.0).unwrap();
        let mut out = phi.clone();
        out.kind = FieldKind::PKappa;
        let mut min_value = 0.0f64;
        for it in 0..phi.t_nodes.len() {
            for ix in 0..n {
                for iy in 0..n {
                    let offset = iy as i64 - ix as i64;
                    let iu = (center as i64 + offset * stride as i64) as usize;
                    let frozen = cache.density_at(iy, it, iu);
                    let idx = out.idx(it, ix, iy);
                    out.values[idx] += frozen;
                    min_value = min_value.min(out.values[idx]);
                }
            }
        }
        out.meta.negativity_clipped = (-min_value).max(0.0);
        out
    }
}
