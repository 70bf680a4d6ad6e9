//! Per-base-point kernel tables: density and gradient ladders obtained by
//! trapezoidal Fourier inversion (exact up to periodization by Poisson
//! summation), plus the frequency-domain machinery for frozen-operator
//! application and the parametrix driver q₀.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::symbol::{eval_symbol, FrozenSymbolTable};
use crate::coefficient::Coefficient;
use crate::grid::{FieldKind, KernelField, SpaceGrid, TimeLadder};
use crate::interp::lattice_cubic;
use crate::profile::UnimodalProfile;
use crate::scale::ScaleFunctions;
use crate::{Error, Result};

/// Build-time parameters for the frozen-kernel cache.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrozenCacheParams {
    /// Base points = the coarse space grid of the parametrix assembly.
    pub bases: SpaceGrid,
    pub ladder: TimeLadder,
    /// Working u-lattice step; must divide the base-grid step.
    pub du: f64,
    /// Stored window |u| ≤ u_radius.
    pub u_radius: f64,
    /// Minimum FFT period (controls periodization aliasing).
    pub period: f64,
    /// Operator-grid period for q₀ (coarser; q₀ tolerances are loose).
    pub op_period: f64,
    /// Spectrum is cut where t_min·(−Re ψ) reaches this (e^{-35} ≈ 6e-16).
    pub log_cut: f64,
}

impl FrozenCacheParams {
    pub fn new(bases: SpaceGrid, ladder: TimeLadder, du: f64, u_radius: f64) -> Self {
        FrozenCacheParams {
            bases,
            ladder,
            du,
            u_radius,
            period: 2048.0,
            op_period: 256.0,
            log_cut: 35.0,
        }
    }
}

/// Ringing bookkeeping for the clipped negative parts of inverted densities.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ClipStats {
    /// Largest single clipped magnitude.
    pub max_clip: f64,
    /// Total clipped mass (Σ |negative values|·du over all stored rows).
    pub clipped_mass: f64,
}

/// Immutable after build; all reads are lock-free.
#[derive(Debug)]
pub struct FrozenKernelCache {
    pub params: FrozenCacheParams,
    pub symbols: Vec<FrozenSymbolTable>,
    pub u_grid: SpaceGrid,
    /// Frequency cutoff actually needed at the ladder floor.
    pub xi_max: f64,
    pub clip: ClipStats,
    /// Worst (smallest) decay certificate across bases.
    pub decay_certificate: f64,
    density: Vec<f64>,
    /// Gradient rows (∂p/∂u) only at `gradient_slots` ladder indices.
    gradient: Vec<f64>,
    gradient_slots: Vec<usize>,
    op_dxi: f64,
    op_psi: Vec<Vec<Complex64>>,
}

impl FrozenKernelCache {
    /// Builds symbol tables and inverts the density/gradient ladders for
    /// every base point. `gradient_times` lists the ladder times at which
    /// gradient rows are materialized.
    pub fn build(
        profile: &UnimodalProfile,
        coef: &Coefficient,
        sf: &ScaleFunctions,
        params: FrozenCacheParams,
        gradient_times: &[f64],
    ) -> Result<Self> {
        if profile.d != 1 {
            return Err(Error::Config(
                "the kernel pipeline supports d = 1 only".into(),
            ));
        }
        let stride_f = params.bases.step / params.du;
        if (stride_f - stride_f.round()).abs() > 1e-9 {
            return Err(Error::Config(
                "base-grid step must be a multiple of the u-lattice step".into(),
            ));
        }
        let t_min = params.ladder.t_min();

        // Frequency cutoff: probe the symbol at the grid edges and centre.
        let mut xi_max = 0.0f64;
        for &w in &[params.bases.min, 0.0, params.bases.max()] {
            let mut s = 1.0;
            loop {
                let psi = eval_symbol(profile, coef, w, s)?;
                if t_min * (-psi.re) >= params.log_cut {
                    break;
                }
                s *= 2.0;
                if s > 1e7 {
                    return Err(Error::SymbolNotCoercive(format!(
                        "t_min·(−Re ψ) below {} out to ξ = 1e7 at base {w}",
                        params.log_cut
                    )));
                }
            }
            xi_max = xi_max.max(s);
        }

        let bases = params.bases.nodes();
        let symbols: Vec<FrozenSymbolTable> = bases
            .par_iter()
            .map(|&w| {
                FrozenSymbolTable::build(profile, coef, w, 1.05 * xi_max, |r| sf.h(r))
            })
            .collect::<Result<Vec<_>>>()?;
        let decay_certificate = symbols
            .iter()
            .map(|t| t.decay_certificate)
            .fold(f64::INFINITY, f64::min);
        if decay_certificate <= 1e-6 {
            return Err(Error::SymbolNotCoercive(format!(
                "decay certificate {decay_certificate:.3e}"
            )));
        }

        // FFT geometry: fine lattice step divides du, resolves ±xi_max, and
        // the transform length covers the requested period.
        let refine = (params.du * xi_max / std::f64::consts::PI).log2().ceil() as i32;
        let fft_du = params.du / (2.0f64).powi(refine.max(0));
        let n_fft = ((params.period / fft_du).log2().ceil() as u32).max(4);
        let n_fft = 1usize << n_fft;
        let dxi = 2.0 * std::f64::consts::PI / (n_fft as f64 * fft_du);
        let stride = (params.du / fft_du).round() as usize;

        let n_u_half = (params.u_radius / params.du).round() as usize;
        let u_grid = SpaceGrid {
            min: -(n_u_half as f64) * params.du,
            step: params.du,
            n: 2 * n_u_half + 1,
        };
        if u_grid.max() + params.du >= n_fft as f64 * fft_du / 2.0 {
            return Err(Error::Config(
                "u window exceeds half the FFT period; increase period".into(),
            ));
        }

        let ladder = &params.ladder;
        let mut gradient_slots: Vec<usize> = gradient_times
            .iter()
            .map(|&t| {
                ladder.exact_index(t).ok_or_else(|| {
                    Error::Config(format!("gradient time {t} is not a ladder node"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        gradient_slots.sort_unstable();
        gradient_slots.dedup();

        let n_t = ladder.len();
        let n_u = u_grid.n;
        let mut density = vec![0.0f64; bases.len() * n_t * n_u];
        let mut gradient = vec![0.0f64; bases.len() * gradient_slots.len() * n_u];

        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n_fft);

        // One base at a time (the ψ spectrum buffer is large); rows within a
        // base are parallel over the ladder.
        let mut clip = ClipStats::default();
        for (ib, tab) in symbols.iter().enumerate() {
            let half = n_fft / 2;
            let psi_pos: Vec<Complex64> = (0..=half)
                .into_par_iter()
                .map(|j| tab.eval(j as f64 * dxi))
                .collect();

            let rows: Vec<(usize, Option<usize>)> = (0..n_t)
                .map(|it| {
                    (
                        it,
                        gradient_slots.iter().position(|&g| g == it),
                    )
                })
                .collect();
            let results: Vec<(usize, Option<usize>, Vec<f64>, Vec<f64>, f64, f64, f64)> = rows
                .par_iter()
                .map(|&(it, gslot)| {
                    let t = ladder.nodes[it];
                    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
                    for j in 0..=half {
                        let w = (t * psi_pos[j]).exp();
                        buf[j] = w;
                        if j > 0 && j < half {
                            buf[n_fft - j] = w.conj();
                        }
                    }
                    fft.process(&mut buf);
                    let scale = dxi / (2.0 * std::f64::consts::PI);
                    // Mass over the full period is the ξ=0 coefficient: 1.
                    let mass: f64 = buf.iter().map(|v| v.re).sum::<f64>() * scale * fft_du;
                    let mut row = vec![0.0f64; n_u];
                    let mut max_clip = 0.0f64;
                    let mut clipped = 0.0f64;
                    for iu in 0..n_u {
                        let m = (iu as i64 - n_u_half as i64) * stride as i64;
                        let idx = m.rem_euclid(n_fft as i64) as usize;
                        let v = buf[idx].re * scale;
                        if v < 0.0 {
                            max_clip = max_clip.max(-v);
                            clipped += -v * params.du;
                            row[iu] = 0.0;
                        } else {
                            row[iu] = v;
                        }
                    }
                    let grow = if gslot.is_some() {
                        let mut gbuf = vec![Complex64::new(0.0, 0.0); n_fft];
                        for j in 0..=half {
                            let xi = j as f64 * dxi;
                            let w = (t * psi_pos[j]).exp() * Complex64::new(0.0, -xi);
                            if j < half {
                                gbuf[j] = w;
                                if j > 0 {
                                    gbuf[n_fft - j] = w.conj();
                                }
                            }
                        }
                        fft.process(&mut gbuf);
                        let mut g = vec![0.0f64; n_u];
                        for iu in 0..n_u {
                            let m = (iu as i64 - n_u_half as i64) * stride as i64;
                            let idx = m.rem_euclid(n_fft as i64) as usize;
                            g[iu] = gbuf[idx].re * scale;
                        }
                        g
                    } else {
                        Vec::new()
                    };
                    (it, gslot, row, grow, mass, max_clip, clipped)
                })
                .collect();

            for (it, gslot, row, grow, mass, max_clip, clipped) in results {
                if (mass - 1.0).abs() > 1e-6 {
                    return Err(Error::Quadrature(format!(
                        "full-period mass {mass:.9} ≠ 1 at base index {ib}, t index {it}"
                    )));
                }
                let off = (ib * n_t + it) * n_u;
                density[off..off + n_u].copy_from_slice(&row);
                if let Some(gs) = gslot {
                    let goff = (ib * gradient_slots.len() + gs) * n_u;
                    gradient[goff..goff + n_u].copy_from_slice(&grow);
                }
                clip.max_clip = clip.max_clip.max(max_clip);
                clip.clipped_mass += clipped;
            }
        }

        // Operator grid.
        let op_dxi = 2.0 * std::f64::consts::PI / params.op_period;
        let n_op = (xi_max * 1.02 / op_dxi).ceil() as usize + 1;
        let op_psi: Vec<Vec<Complex64>> = symbols
            .par_iter()
            .map(|tab| (0..n_op).map(|j| tab.eval(j as f64 * op_dxi)).collect())
            .collect();

        Ok(FrozenKernelCache {
            params,
            symbols,
            u_grid,
            xi_max,
            clip,
            decay_certificate,
            density,
            gradient,
            gradient_slots,
            op_dxi,
            op_psi,
        })
    }

    pub fn n_bases(&self) -> usize {
        self.params.bases.n
    }

    pub fn base_node(&self, ib: usize) -> f64 {
        self.params.bases.node(ib)
    }

    pub fn nearest_base(&self, x: f64) -> usize {
        self.params.bases.nearest(x)
    }

    pub fn ladder(&self) -> &TimeLadder {
        &self.params.ladder
    }

    /// Stored density row p^{𝔎_w}(t, ·) on the u-lattice.
    pub fn density_row(&self, ib: usize, it: usize) -> &[f64] {
        let n_u = self.u_grid.n;
        let off = (ib * self.params.ladder.len() + it) * n_u;
        &self.density[off..off + n_u]
    }

    /// Gradient row ∂p/∂u at a materialized ladder index.
    pub fn gradient_row(&self, ib: usize, it: usize) -> Result<&[f64]> {
        let gs = self
            .gradient_slots
            .iter()
            .position(|&g| g == it)
            .ok_or_else(|| {
                Error::OutOfWindow(format!("no gradient row at ladder index {it}"))
            })?;
        let n_u = self.u_grid.n;
        let off = (ib * self.gradient_slots.len() + gs) * n_u;
        Ok(&self.gradient[off..off + n_u])
    }

    /// Exact-hit lattice read.
    pub fn density_at(&self, ib: usize, it: usize, iu: usize) -> f64 {
        self.density_row(ib, it)[iu]
    }

    /// u-lattice index for an on-lattice displacement.
    pub fn u_index(&self, u: f64) -> Option<usize> {
        self.u_grid.exact_index(u)
    }

    /// p^{𝔎_w}(t, u) interpolated from the ladder (log-linear in t between
    /// rows, cubic on the u-lattice). Errors outside the stored window.
    pub fn density(&self, ib: usize, t: f64, u: f64) -> Result<f64> {
        if u.abs() > self.u_grid.max() - 2.0 * self.u_grid.step {
            return Err(Error::OutOfWindow(format!("u = {u}")));
        }
        let ladder = &self.params.ladder;
        if t < ladder.t_min() * (1.0 - 1e-9) || t > ladder.t_max() * (1.0 + 1e-9) {
            return Err(Error::OutOfWindow(format!("t = {t}")));
        }
        let (i, w) = ladder.weights(t);
        let a = self.row_value(ib, i, u);
        if w == 0.0 {
            return Ok(a);
        }
        let b = self.row_value(ib, i + 1, u);
        // Log-linear keeps positivity and is exact for power decay in t.
        if a > 0.0 && b > 0.0 {
            Ok((a.ln() * (1.0 - w) + b.ln() * w).exp())
        } else {
            Ok(a * (1.0 - w) + b * w)
        }
    }

    fn row_value(&self, ib: usize, it: usize, u: f64) -> f64 {
        lattice_cubic(
            self.density_row(ib, it),
            self.u_grid.min,
            self.u_grid.step,
            u,
        )
        .max(0.0)
    }

    /// Single-point density via a direct spectral sum (the slow oracle-grade
    /// path, independent of the FFT ladder resolution).
    pub fn density_single(&self, ib: usize, t: f64, u: f64) -> f64 {
        self.spectral_sum(ib, t, u, SpectralKind::Density)
    }

    /// ∂p/∂u at a single point, spectral sum with the −iξ multiplier.
    pub fn gradient_single(&self, ib: usize, t: f64, u: f64) -> f64 {
        self.spectral_sum(ib, t, u, SpectralKind::Gradient)
    }

    /// L^{𝔎_v} p^{𝔎_w}(t, ·) evaluated at displacement u = y − x:
    /// (2π)^{−1} ∫ e^{−iξu} ψ_v(ξ) e^{tψ_w(ξ)} dξ. For v = w this is
    /// ∂_t p^{𝔎_w}(t, u).
    pub fn apply_operator(&self, iv: usize, iw: usize, t: f64, u: f64) -> f64 {
        let dxi = 2.0 * std::f64::consts::PI / 4096.0;
        let tab_v = &self.symbols[iv];
        let tab_w = &self.symbols[iw];
        let mut sum = 0.0;
        let mut j = 1usize;
        loop {
            let xi = j as f64 * dxi;
            let b = (t * tab_w.eval(xi)).exp();
            let term = tab_v.eval(xi) * b * Complex64::new(0.0, -xi * u).exp();
            sum += term.re;
            if xi > 1.0 && b.norm() * (1.0 + xi) < 1e-16 {
                break;
            }
            if xi > 2.0 * self.xi_max {
                break;
            }
            j += 1;
        }
        sum * dxi / std::f64::consts::PI
    }

    fn spectral_sum(&self, ib: usize, t: f64, u: f64, kind: SpectralKind) -> f64 {
        let dxi = 2.0 * std::f64::consts::PI / 4096.0;
        let tab = &self.symbols[ib];
        let mut sum = match kind {
            SpectralKind::Density => 0.5, // j = 0 term, e^{tψ(0)} = 1
            SpectralKind::Gradient => 0.0,
        };
        let mut j = 1usize;
        loop {
            let xi = j as f64 * dxi;
            let b = (t * tab.eval(xi)).exp();
            let phase = Complex64::new(0.0, -xi * u).exp();
            let term = match kind {
                SpectralKind::Density => b * phase,
                SpectralKind::Gradient => b * phase * Complex64::new(0.0, -xi),
            };
            sum += term.re;
            if xi > 1.0 && b.norm() * (1.0 + xi) < 1e-16 {
                break;
            }
            if xi > 2.0 * self.xi_max {
                break;
            }
            j += 1;
        }
        sum * dxi / std::f64::consts::PI
    }

    /// δ^{𝔎_w}_{1.r}(t,x,y;z) = p(t,x+z,y) − p(t,x,y) − 1_{|z|<r}·z·∂_x p(t,x,y)
    /// from cached rows (t must be a ladder node with a gradient row).
    pub fn delta_direct(
        &self,
        ib: usize,
        t: f64,
        x: f64,
        y: f64,
        z: f64,
        r: f64,
    ) -> Result<f64> {
        let it = self
            .params
            .ladder
            .exact_index(t)
            .ok_or_else(|| Error::OutOfWindow(format!("t = {t} is not a ladder node")))?;
        let u = y - x;
        if u.abs() + z.abs() > self.u_grid.max() - 2.0 * self.u_grid.step {
            return Err(Error::OutOfWindow(format!("|y - x - z| near {}", u - z)));
        }
        let row = self.density_row(ib, it);
        let p_shift = lattice_cubic(row, self.u_grid.min, self.u_grid.step, u - z);
        let p0 = lattice_cubic(row, self.u_grid.min, self.u_grid.step, u);
        let mut delta = p_shift - p0;
        if z.abs() < r {
            let grad = self.gradient_row(ib, it)?;
            let du = lattice_cubic(grad, self.u_grid.min, self.u_grid.step, u);
            // ∂_x p(t, y−x) = −∂_u p.
            delta -= z * (-du);
        }
        Ok(delta)
    }

    /// q₀(t,x,y) = (L^{𝔎_x} − L^{𝔎_y}) p^{𝔎_y}(t,x,y) at a single point via
    /// the fine spectral sum.
    pub fn q0_single(&self, ix: usize, iy: usize, t: f64) -> f64 {
        if ix == iy {
            return 0.0;
        }
        let u = self.base_node(iy) - self.base_node(ix);
        let dxi = 2.0 * std::f64::consts::PI / 4096.0;
        let tab_x = &self.symbols[ix];
        let tab_y = &self.symbols[iy];
        let mut sum = 0.0;
        let mut j = 1usize;
        loop {
            let xi = j as f64 * dxi;
            let b = (t * tab_y.eval(xi)).exp();
            let mult = tab_x.eval(xi) - tab_y.eval(xi);
            sum += (mult * b * Complex64::new(0.0, -xi * u).exp()).re;
            if xi > 1.0 && b.norm() * (1.0 + xi) < 1e-16 {
                break;
            }
            if xi > 2.0 * self.xi_max {
                break;
            }
            j += 1;
        }
        sum * dxi / std::f64::consts::PI
    }

    /// The full q₀ field on (ladder × bases × bases) via the operator grid:
    /// q₀(t,x,y) = (1/2π)∫ e^{−iξ(y−x)} (ψ_x(ξ)−ψ_y(ξ)) e^{tψ_y(ξ)} dξ.
    /// Constant κ gives the exact zero field (bitwise-identical symbols).
    pub fn build_q0_field(&self) -> KernelField {
        let bases = &self.params.bases;
        let ladder = &self.params.ladder;
        let n_b = bases.n;
        let n_op = self.op_psi[0].len();

        let mut field = KernelField::zeros(
            FieldKind::Q0,
            ladder.nodes.clone(),
            *bases,
            *bases,
        );
        let n_slice = n_b * n_b;
        let slices: Vec<(usize, Vec<f64>)> = (0..ladder.len())
            .into_par_iter()
            .map(|it| {
                let t = ladder.nodes[it];
                let mut slice = vec![0.0f64; n_slice];
                let scale = self.op_dxi / std::f64::consts::PI;
                for iy in 0..n_b {
                    let y = bases.node(iy);
                    let psi_y = &self.op_psi[iy];
                    // Row cutoff where the damped multiplier is negligible.
                    let mut j_cut = 1usize;
                    for j in (1..n_op).rev() {
                        let xi = j as f64 * self.op_dxi;
                        if (t * psi_y[j].re).exp() * (1.0 + xi) > 1e-17 {
                            j_cut = (j + 2).min(n_op);
                            break;
                        }
                    }
                    // F_j = e^{tψ_y(ξ_j)}·e^{−iξ_j y}.
                    let f_vec: Vec<Complex64> = (0..j_cut)
                        .map(|j| {
                            let xi = j as f64 * self.op_dxi;
                            (t * psi_y[j]).exp() * Complex64::new(0.0, -xi * y).exp()
                        })
                        .collect();
                    for ix in 0..n_b {
                        if ix == iy {
                            continue;
                        }
                        let x = bases.node(ix);
                        let psi_x = &self.op_psi[ix];
                        let step = Complex64::new(0.0, self.op_dxi * x).exp();
                        let mut phase = step; // e^{iξ_1 x}
                        let mut acc = 0.0;
                        for j in 1..j_cut {
                            // ((ψ_x − ψ_y)·F)·e^{iξx}; the difference is taken
                            // first so identical symbols cancel exactly.
                            acc += ((psi_x[j] - psi_y[j]) * (f_vec[j] * phase)).re;
                            phase *= step;
                        }
                        slice[ix * n_b + iy] = acc * scale;
                    }
                }
                (it, slice)
            })
            .collect();
        for (it, slice) in slices {
            field.time_slice_mut(it).copy_from_slice(&slice);
        }
        field
    }
}

enum SpectralKind {
    Density,
    Gradient,
}

#[derive(Serialize, Deserialize)]
struct CacheHeader {
    params: FrozenCacheParams,
    symbols: Vec<FrozenSymbolTable>,
    u_grid: SpaceGrid,
    xi_max: f64,
    clip: ClipStats,
    decay_certificate: f64,
    gradient_slots: Vec<usize>,
    op_dxi: f64,
    n_op: usize,
}

impl FrozenKernelCache {
    const MAGIC: &'static [u8; 4] = b"LVHC";
    const VERSION: u32 = 1;

    /// Versioned binary dump (JSON header with grid metadata + raw arrays),
    /// to amortize builds across verifier runs.
    pub fn write_binary(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(Self::MAGIC)?;
        f.write_all(&Self::VERSION.to_le_bytes())?;
        let header = serde_json::to_vec(&CacheHeader {
            params: self.params.clone(),
            symbols: self.symbols.clone(),
            u_grid: self.u_grid,
            xi_max: self.xi_max,
            clip: self.clip,
            decay_certificate: self.decay_certificate,
            gradient_slots: self.gradient_slots.clone(),
            op_dxi: self.op_dxi,
            n_op: self.op_psi.first().map(|v| v.len()).unwrap_or(0),
        })
        .map_err(|e| Error::BadArtifact(e.to_string()))?;
        f.write_all(&(header.len() as u64).to_le_bytes())?;
        f.write_all(&header)?;
        let write_f64s = |f: &mut std::io::BufWriter<std::fs::File>, v: &[f64]| -> Result<()> {
            f.write_all(&(v.len() as u64).to_le_bytes())?;
            for x in v {
                f.write_all(&x.to_le_bytes())?;
            }
            Ok(())
        };
        write_f64s(&mut f, &self.density)?;
        write_f64s(&mut f, &self.gradient)?;
        let flat: Vec<f64> = self
            .op_psi
            .iter()
            .flat_map(|row| row.iter().flat_map(|c| [c.re, c.im]))
            .collect();
        write_f64s(&mut f, &flat)?;
        Ok(())
    }

    pub fn read_binary(path: &std::path::Path) -> Result<Self> {
        use std::io::Read;
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::BadArtifact("bad magic in cache file".into()));
        }
        let mut word = [0u8; 4];
        f.read_exact(&mut word)?;
        if u32::from_le_bytes(word) != Self::VERSION {
            return Err(Error::BadArtifact("unsupported cache file version".into()));
        }
        let mut len8 = [0u8; 8];
        f.read_exact(&mut len8)?;
        let hlen = u64::from_le_bytes(len8) as usize;
        let mut hbuf = vec![0u8; hlen];
        f.read_exact(&mut hbuf)?;
        let header: CacheHeader =
            serde_json::from_slice(&hbuf).map_err(|e| Error::BadArtifact(e.to_string()))?;
        let read_f64s = |f: &mut std::io::BufReader<std::fs::File>| -> Result<Vec<f64>> {
            let mut len8 = [0u8; 8];
            f.read_exact(&mut len8)?;
            let n = u64::from_le_bytes(len8) as usize;
            let mut v = Vec::with_capacity(n);
            let mut b = [0u8; 8];
            for _ in 0..n {
                f.read_exact(&mut b)?;
                v.push(f64::from_le_bytes(b));
            }
            Ok(v)
        };
        let density = read_f64s(&mut f)?;
        let gradient = read_f64s(&mut f)?;
        let flat = read_f64s(&mut f)?;
        let n_b = header.params.bases.n;
        if flat.len() != 2 * n_b * header.n_op {
            return Err(Error::BadArtifact("operator grid size mismatch".into()));
        }
        let op_psi: Vec<Vec<Complex64>> = (0..n_b)
            .map(|ib| {
                (0..header.n_op)
                    .map(|j| {
                        let k = 2 * (ib * header.n_op + j);
                        Complex64::new(flat[k], flat[k + 1])
                    })
                    .collect()
            })
            .collect();
        let expect = n_b * header.params.ladder.len() * header.u_grid.n;
        if density.len() != expect {
            return Err(Error::BadArtifact("density array size mismatch".into()));
        }
        Ok(FrozenKernelCache {
            params: header.params,
            symbols: header.symbols,
            u_grid: header.u_grid,
            xi_max: header.xi_max,
            clip: header.clip,
            decay_certificate: header.decay_certificate,
            density,
            gradient,
            gradient_slots: header.gradient_slots,
            op_dxi: header.op_dxi,
            op_psi,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::KappaFamily;
    use crate::profile::NuFamily;

    fn cauchy_cache() -> FrozenKernelCache {
        let profile = UnimodalProfile::new(1, NuFamily::Stable { alpha: 1.0 }, 1.0);
        let coef = Coefficient {
            kappa: KappaFamily::Constant { value: 1.0 },
            kappa0: 1.0,
            kappa1: 1.0,
            kappa2: 0.0,
            beta: 0.5,
            kappa3: 0.1,
            kappa4: 0.1,
        };
        let sf = ScaleFunctions::build(&profile, 1.0, Some(1.0)).unwrap();
        let bases = SpaceGrid::symmetric(6.0, 17); // step 0.75
        let ladder = TimeLadder::logarithmic(0.125, 2.0, 12, &[0.5, 1.0, 2.0]);
        let params = FrozenCacheParams {
            period: 1024.0,
            ..FrozenCacheParams::new(bases, ladder, 0.125, 13.0)
        };
        FrozenKernelCache::build(&profile, &coef, &sf, params, &[0.5, 1.0, 2.0]).unwrap()
    }

    /// Closed-form Cauchy density with scale a = πt.
    fn cauchy_p(t: f64, u: f64) -> f64 {
        let a = std::f64::consts::PI * t;
        a / (std::f64::consts::PI * (a * a + u * u))
    }

    fn cauchy_dp_du(t: f64, u: f64) -> f64 {
        let a = std::f64::consts::PI * t;
        -2.0 * a * u / (std::f64::consts::PI * (a * a + u * u).powi(2))
    }

    fn cauchy_dp_dt(t: f64, u: f64) -> f64 {
        let a = std::f64::consts::PI * t;
        (u * u - a * a) / (a * a + u * u).powi(2)
    }

    #[test]
    fn density_rows_match_cauchy_closed_form() {
        let cache = cauchy_cache();
        let it = cache.ladder().exact_index(1.0).unwrap();
        let ib = cache.nearest_base(0.0);
        let row = cache.density_row(ib, it);
        // u = 0: 1/π².
        let iu0 = cache.u_index(0.0).unwrap();
        let exact0 = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        // Periodization at P = 1024 contributes ~(π²/3)/P² ≈ 3.2e-6.
        assert!(
            (row[iu0] - exact0).abs() < 4e-6 + 1e-5 * exact0,
            "{} vs {exact0}",
            row[iu0]
        );
        for u in [-8.0, -2.5, 0.5, 3.0, 10.0] {
            let iu = cache.u_index(u).unwrap();
            let exact = cauchy_p(1.0, u);
            assert!(
                (row[iu] - exact).abs() < 4e-6 + 1e-4 * exact,
                "u={u}: {} vs {exact}",
                row[iu]
            );
        }
        // Symmetric coefficient: even density.
        for u in [0.5, 2.0, 7.5] {
            let a = row[cache.u_index(u).unwrap()];
            let b = row[cache.u_index(-u).unwrap()];
            assert!((a - b).abs() < 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn mass_is_conserved_and_clip_is_tiny() {
        let cache = cauchy_cache();
        assert!(cache.clip.clipped_mass < 1e-8, "{:?}", cache.clip);
        // Window mass should be 1 minus the analytic Cauchy tail.
        let it = cache.ladder().exact_index(0.5).unwrap();
        let ib = cache.nearest_base(0.0);
        let row = cache.density_row(ib, it);
        let mut mass: f64 = row.iter().sum::<f64>();
        mass -= 0.5 * (row[0] + row[row.len() - 1]);
        mass *= cache.u_grid.step;
        let tail = 2.0 * (0.5 - (13.0 / (std::f64::consts::PI * 0.5)).atan()
            / std::f64::consts::PI);
        assert!(
            (mass - (1.0 - tail)).abs() < 2e-4,
            "window mass {mass}, expected {}",
            1.0 - tail
        );
    }

    #[test]
    fn gradient_matches_closed_form() {
        let cache = cauchy_cache();
        let it = cache.ladder().exact_index(1.0).unwrap();
        let ib = cache.nearest_base(0.0);
        let grad = cache.gradient_row(ib, it).unwrap();
        for u in [-3.0, 1.0, 5.0] {
            let iu = cache.u_index(u).unwrap();
            let exact = cauchy_dp_du(1.0, u);
            assert!(
                (grad[iu] - exact).abs() < 2e-5 * exact.abs().max(1e-4),
                "u={u}: {} vs {exact}",
                grad[iu]
            );
        }
        // Odd at the origin for symmetric κ.
        let iu0 = cache.u_index(0.0).unwrap();
        assert!(grad[iu0].abs() < 1e-10);
    }

    #[test]
    fn operator_is_time_derivative_for_same_base() {
        let cache = cauchy_cache();
        let ib = cache.nearest_base(0.0);
        // Closed form at u = 0, t = 1: −1/π².
        let v = cache.apply_operator(ib, ib, 1.0, 0.0);
        let exact = -1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((v - exact).abs() < 1e-5 * exact.abs(), "{v} vs {exact}");
        // Sign change at u = πt.
        let v = cache.apply_operator(ib, ib, 1.0, std::f64::consts::PI);
        assert!(v.abs() < 1e-6, "{v}");
        // Against a centered finite difference of the density in t.
        for u in [0.0, 1.0, 4.0] {
            let dt = 1e-3;
            let fd = (cache.density_single(ib, 1.0 + dt, u)
                - cache.density_single(ib, 1.0 - dt, u))
                / (2.0 * dt);
            let op = cache.apply_operator(ib, ib, 1.0, u);
            let exact = cauchy_dp_dt(1.0, u);
            assert!(
                (op - fd).abs() <= 1e-4 * fd.abs().max(1e-3),
                "u={u}: op {op}, fd {fd}, exact {exact}"
            );
        }
    }

    #[test]
    fn delta_direct_properties() {
        let cache = cauchy_cache();
        let ib = cache.nearest_base(0.0);
        // z = 0 gives exactly 0.
        let d = cache.delta_direct(ib, 1.0, 0.75, 1.5, 0.0, 1.0).unwrap();
        assert_eq!(d, 0.0);
        // |z| ≥ r reduces to a plain difference.
        let z = 1.25;
        let d = cache.delta_direct(ib, 1.0, 0.0, 1.5, z, 1.0).unwrap();
        let plain = cauchy_p(1.0, 1.5 - z) - cauchy_p(1.0, 1.5);
        assert!((d - plain).abs() < 1e-4 * plain.abs().max(1e-3), "{d} vs {plain}");
        // Second-order smallness for small |z|: |δ| ≤ c z² sup|∂²p|.
        let hess = |u: f64| {
            let h = 0.05;
            (cauchy_p(1.0, u + h) - 2.0 * cauchy_p(1.0, u) + cauchy_p(1.0, u - h)) / (h * h)
        };
        for z in [0.05, 0.1, 0.2] {
            let d = cache.delta_direct(ib, 1.0, 0.0, 1.5, z, 1.0).unwrap();
            let bound = 1.5 * z * z * hess(1.5).abs().max(hess(1.3).abs());
            assert!(d.abs() <= bound, "z={z}: {d} vs bound {bound}");
        }
    }

    #[test]
    fn q0_field_is_exactly_zero_for_constant_kappa() {
        let cache = cauchy_cache();
        let q0 = cache.build_q0_field();
        assert!(q0.sup() == 0.0, "sup = {}", q0.sup());
    }

    #[test]
    fn out_of_window_requests_error() {
        let cache = cauchy_cache();
        assert!(cache.density(0, 1.0, 14.0).is_err());
        assert!(cache.density(0, 1e-4, 0.0).is_err());
        assert!(cache
            .delta_direct(0, 0.9371, 0.0, 1.0, 0.1, 1.0)
            .is_err());
    }
}
