//! Graded convolution meshes for the weakly singular time integrals
//! ∫_0^t g(s) ds, with power-law extrapolation of the two sub-floor end
//! panels.

/// Node/weight mesh on [floor, t − floor] with nodes accumulating at both
/// ends (s = t·(j/M)^γ and reflected), plus the band points used to fit the
/// end-panel power laws.
#[derive(Debug, Clone)]
pub struct ConvMesh {
    pub t: f64,
    pub floor: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Node indices of (floor, a₂) for the s→0 panel fit.
    pub lo_band: (usize, usize),
    /// Node indices of (t−floor, t−a₂′) for the s→t panel fit.
    pub hi_band: (usize, usize),
}

impl ConvMesh {
    /// `None` when t ≤ 3·floor (no room for the graded mesh and fit bands;
    /// such targets are extrapolated in t instead).
    pub fn build(t: f64, floor: f64, gamma: f64, m: usize) -> Option<ConvMesh> {
        if t <= 3.0 * floor {
            return None;
        }
        let lo = floor;
        let hi = t - floor;
        let mut nodes: Vec<f64> = Vec::with_capacity(2 * m + 6);
        for j in 0..=m {
            let s = t * (j as f64 / m as f64).powf(gamma);
            if s > lo && s < hi {
                nodes.push(s);
            }
            let r = t - s;
            if r > lo && r < hi {
                nodes.push(r);
            }
        }
        nodes.push(lo);
        nodes.push(hi);
        let a2 = (2.0 * floor).min(0.5 * (lo + hi));
        let b2 = (t - 2.0 * floor).max(0.5 * (lo + hi));
        nodes.push(a2);
        nodes.push(b2);
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * t);
        let weights = crate::quad::trapezoid_weights(&nodes);
        let find = |v: f64| -> usize {
            nodes
                .iter()
                .position(|&n| (n - v).abs() < 1e-12 * t)
                .expect("band node present")
        };
        Some(ConvMesh {
            t,
            floor,
            nodes: nodes.clone(),
            weights,
            lo_band: (find(lo), find(a2)),
            hi_band: (find(hi), find(b2)),
        })
    }
}

/// ∫_0^a g(s) ds from a power-law fit g(s) ≈ A·s^p through (a, g_a) and
/// (b, g_b), b > a. Falls back to a rectangle when the fit is unusable.
pub fn end_panel(a: f64, g_a: f64, b: f64, g_b: f64) -> f64 {
    if g_a == 0.0 {
        return 0.0;
    }
    if g_b != 0.0 && (g_a > 0.0) == (g_b > 0.0) {
        let p = (g_b.abs() / g_a.abs()).ln() / (b / a).ln();
        let p = p.clamp(-0.9, 6.0);
        return g_a * a / (p + 1.0);
    }
    g_a * a
}

/// Downward power extrapolation in t for ladder nodes below the convolution
/// floor: value(t) from (t_a, v_a), (t_b, v_b) with t < t_a < t_b.
pub fn extrapolate_down(t: f64, t_a: f64, v_a: f64, t_b: f64, v_b: f64) -> f64 {
    if v_a == 0.0 {
        return 0.0;
    }
    if v_b != 0.0 && (v_a > 0.0) == (v_b > 0.0) {
        let p = (v_b.abs() / v_a.abs()).ln() / (t_b / t_a).ln();
        let p = p.clamp(-0.5, 6.0);
        return v_a * (t / t_a).powf(p);
    }
    v_a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_covers_interior_and_band_points() {
        let mesh = ConvMesh::build(1.0, 1.0 / 64.0, 2.0, 12).unwrap();
        assert!((mesh.nodes[0] - 1.0 / 64.0).abs() < 1e-12);
        assert!((mesh.nodes[mesh.nodes.len() - 1] - (1.0 - 1.0 / 64.0)).abs() < 1e-12);
        // Weights sum to the interval length.
        let total: f64 = mesh.weights.iter().sum();
        assert!((total - (1.0 - 2.0 / 64.0)).abs() < 1e-12);
        // Band points resolve to distinct nodes.
        assert_ne!(mesh.lo_band.0, mesh.lo_band.1);
        assert_ne!(mesh.hi_band.0, mesh.hi_band.1);
        assert!(ConvMesh::build(0.04, 1.0 / 64.0, 2.0, 12).is_none());
    }

    #[test]
    fn graded_trapezoid_integrates_endpoint_singularity() {
        // ∫_0^1 s^{-1/2}(1-s)^{-1/2} ds = π, with the end panels extrapolated.
        // γ = 2 grading makes the trapezoid first-order in M for this worst
        // case; check the value and the convergence order.
        let g = |s: f64| s.powf(-0.5) * (1.0 - s).powf(-0.5);
        let run = |m: usize| -> f64 {
            let mesh = ConvMesh::build(1.0, 1e-4, 2.0, m).unwrap();
            let mut total = 0.0;
            for (s, w) in mesh.nodes.iter().zip(&mesh.weights) {
                total += w * g(*s);
            }
            let (i_lo, i_lo2) = mesh.lo_band;
            total += end_panel(
                mesh.nodes[i_lo],
                g(mesh.nodes[i_lo]),
                mesh.nodes[i_lo2],
                g(mesh.nodes[i_lo2]),
            );
            let (i_hi, i_hi2) = mesh.hi_band;
            total += end_panel(
                1.0 - mesh.nodes[i_hi],
                g(mesh.nodes[i_hi]),
                1.0 - mesh.nodes[i_hi2],
                g(mesh.nodes[i_hi2]),
            );
            total
        };
        let err48 = (run(48) - std::f64::consts::PI).abs();
        let err96 = (run(96) - std::f64::consts::PI).abs();
        assert!(err48 < 4e-2, "{err48}");
        assert!(err96 < 0.6 * err48, "first-order trend: {err48} → {err96}");
    }

    #[test]
    fn end_panel_exact_for_power_laws() {
        // g = s^{-0.3}: ∫_0^a = a^{0.7}/0.7.
        let a = 0.01;
        let b = 0.02;
        let v = end_panel(a, a.powf(-0.3), b, b.powf(-0.3));
        let exact = a.powf(0.7) / 0.7;
        assert!((v - exact).abs() < 1e-12 * exact);
    }
}
