//! Self-consistency oracles for the Levi construction on reduced grids:
//! envelope fits for q₀ and φ, mesh-doubling convergence, operator
//! identities, and the exactness degeneracy for constant coefficients.

use std::sync::LazyLock;

use levyheat::config::RunConfig;
use levyheat::coefficient::drift_integral;
use levyheat::parametrix::{apply_truncated_operator, Convolver};
use levyheat::pipeline::{self, Build};

fn skew_config(space_nodes: usize, mesh_nodes: usize) -> RunConfig {
    let text = format!(
        r#"
seed = 7
[profile]
family = "stable"
alpha = 1.0
d = 1
declared_alpha_h = 1.0
declared_beta_h = 1.0
[coefficient]
family = "skew_truncated"
a = 0.4
z0 = 0.5
kappa0 = 1.0
kappa1 = 1.4
kappa2 = 0.4
beta = 0.95
kappa3 = 0.15
kappa4 = 0.15
[grids]
t_min = 0.015625
t_out = [0.5, 1.0]
time_nodes = 28
space_radius = 8.0
space_nodes = {space_nodes}
lattice_step = 0.0625
frequency_period = 1024.0
check_radius = 3.0
[series]
max_terms = 3
tol = 1e-9
mesh_nodes = {mesh_nodes}
[verifier]
ck_pair = [0.5, 0.5]
"#
    );
    let cfg: RunConfig = toml::from_str(&text).unwrap();
    cfg.validate().unwrap();
    cfg
}

static SMALL: LazyLock<Build> =
    LazyLock::new(|| pipeline::build_stage(&skew_config(33, 10), false).unwrap());

#[test]
fn q0_vanishes_on_the_diagonal_and_matches_single_evals() {
    let b = &SMALL;
    let q0 = &b.q0;
    let it = q0
        .t_nodes
        .iter()
        .position(|&t| (t - 0.5).abs() < 1e-11)
        .unwrap();
    for ix in 0..q0.x.n {
        assert_eq!(q0.at(it, ix, ix), 0.0);
    }
    // The bulk operator-grid route against the fine single-point route.
    let mut worst = 0.0f64;
    for (ix, iy) in [(6, 9), (10, 21), (18, 12)] {
        let bulk = q0.at(it, ix, iy);
        let single = b.cache.q0_single(ix, iy, 0.5);
        worst = worst.max((bulk - single).abs());
    }
    assert!(worst < 2e-4, "bulk vs single q0 differ by {worst}");
}

#[test]
fn q0_envelope_fit_is_finite_and_stable() {
    // |q₀(t,x,y)| ≤ c·[h⁻¹(1/t)]⁰(|x−y|^β₁∧1)t⁻¹ρ_t(y−x) with a fitted c
    // that stays put under grid refinement.
    let fit = |b: &Build| -> f64 {
        let q0 = &b.q0;
        let beta1 = 0.9 * b.coef.beta.min(b.sf.alpha_h);
        let mut c = 0.0f64;
        for &t in &[0.25, 0.5, 1.0] {
            let (it, _) = b.q0.t_nodes.iter().enumerate().fold((0, f64::MAX), |acc, (i, &v)| {
                if (v - t).abs() < acc.1 {
                    (i, (v - t).abs())
                } else {
                    acc
                }
            });
            let tt = q0.t_nodes[it];
            for ix in 0..q0.x.n {
                for iy in 0..q0.y.n {
                    if ix == iy {
                        continue;
                    }
                    let env = b.sf.err_envelope(
                        0.0,
                        beta1,
                        tt,
                        (q0.y.node(iy) - q0.x.node(ix)).abs(),
                    );
                    if env > 0.0 {
                        c = c.max(q0.at(it, ix, iy).abs() / env);
                    }
                }
            }
        }
        c
    };
    let coarse = fit(&SMALL);
    let fine_build = pipeline::build_stage(&skew_config(65, 10), false).unwrap();
    let fine = fit(&fine_build);
    assert!(coarse.is_finite() && coarse > 0.0);
    assert!(
        (fine - coarse).abs() / coarse < 0.25,
        "envelope constant drifts: {coarse} → {fine}"
    );
}

#[test]
fn picard_mesh_doubling_self_convergence() {
    // ‖q₁(coarse mesh) − q₁(fine mesh)‖∞ / ‖q₁‖∞ ≤ 5e-2.
    let b = &SMALL;
    let conv_coarse = Convolver { mesh_gamma: 2.0, mesh_nodes: 10, t_out: vec![0.5, 1.0] };
    let conv_fine = Convolver { mesh_gamma: 2.0, mesh_nodes: 20, t_out: vec![0.5, 1.0] };
    let q1_coarse = conv_coarse.picard_step(&b.q0, &b.q0).unwrap();
    let q1_fine = conv_fine.picard_step(&b.q0, &b.q0).unwrap();
    let mut diff = 0.0f64;
    for (a, c) in q1_coarse.values.iter().zip(&q1_fine.values) {
        diff = diff.max((a - c).abs());
    }
    let sup = q1_fine.sup();
    assert!(diff / sup <= 5e-2, "mesh-doubling drift {}", diff / sup);
}

#[test]
fn phi_envelope_and_mesh_convergence() {
    let b = &SMALL;
    // |φ_y(t,x)| ≤ c·t·(err⁰_{β₁} + err^{β₁}_0)(t, x−y), fitted c finite.
    let beta1 = 0.9 * b.coef.beta.min(b.sf.alpha_h);
    let mut c_fit = 0.0f64;
    let it = b
        .phi
        .t_nodes
        .iter()
        .position(|&t| (t - 1.0).abs() < 1e-11)
        .unwrap();
    for ix in 0..b.phi.x.n {
        for iy in 0..b.phi.y.n {
            let u = (b.phi.y.node(iy) - b.phi.x.node(ix)).abs();
            let env = 1.0 * (b.sf.err_envelope(0.0, beta1, 1.0, u)
                + b.sf.err_envelope(beta1, 0.0, 1.0, u));
            if env > 0.0 {
                c_fit = c_fit.max(b.phi.at(it, ix, iy).abs() / env);
            }
        }
    }
    assert!(c_fit.is_finite() && c_fit > 0.0, "{c_fit}");

    // Mesh-doubling self-convergence of φ.
    let fine_cfg = skew_config(33, 20);
    let fine = pipeline::build_stage(&fine_cfg, false).unwrap();
    let mut diff = 0.0f64;
    for (a, c) in b.phi.values.iter().zip(&fine.phi.values) {
        diff = diff.max((a - c).abs());
    }
    assert!(
        diff / fine.phi.sup() <= 5e-2,
        "φ mesh-doubling drift {}",
        diff / fine.phi.sup()
    );
}

#[test]
fn truncated_operator_identities() {
    let b = &SMALL;
    let field = &b.p_kappa;
    let (t, x, y) = (0.5, 0.25, 1.0);

    // Constant-in-x test data: the operator annihilates constants.
    let mut flat = field.clone();
    for v in flat.values.iter_mut() {
        *v = 0.3;
    }
    for eps in [0.2, 0.05] {
        let op = apply_truncated_operator(&flat, &b.coef, &b.profile, eps, t, x, y).unwrap();
        assert!(op.value.abs() < 1e-8, "ε={eps}: {}", op.value);
    }

    // Compensation-mismatch identity: L^{κ,ε}f = ∫_{|z|>ε}(f(x+z)−f(x))κJ −
    // ⟨D(x,ε), f′(x)⟩ with D the internal-drift integral.
    let eps = 0.2;
    let op = apply_truncated_operator(field, &b.coef, &b.profile, eps, t, x, y)
        .unwrap()
        .value;
    let it = field.t_nodes.iter().position(|&v| (v - t).abs() < 1e-11).unwrap();
    let iy = field.y.exact_index(y).unwrap();
    let column: Vec<f64> = (0..field.x.n).map(|ix| field.at(it, ix, iy)).collect();
    let fval = |v: f64| levyheat::interp::lattice_cubic(&column, field.x.min, field.x.step, v);
    let h = field.x.step;
    let fprime = (-fval(x + 2.0 * h) + 8.0 * fval(x + h) - 8.0 * fval(x - h) + fval(x - 2.0 * h))
        / (12.0 * h);
    // Direct uncompensated integral via plain quadrature on each side.
    let mut direct = 0.0;
    for sign in [1.0f64, -1.0] {
        let reach = field.x.max() - 2.0 * h - x * sign.max(0.0) - (x * (-sign).max(0.0));
        let integrand = |zr: f64| {
            let z = sign * zr;
            (fval(x + z) - fval(x)) * b.coef.eval(x, z) * b.profile.j(zr)
        };
        let mut lo = eps;
        let reach = reach.abs().max(2.0);
        while lo < reach {
            let hi = (lo * 2.0).min(reach);
            direct += levyheat::quad::integrate(
                &integrand,
                lo,
                hi,
                levyheat::quad::QuadTol { abs: 1e-11, rel: 1e-9 },
            )
            .unwrap();
            lo = hi;
        }
        direct += -fval(x)
            * levyheat::quad::integrate_to_infinity(
                |zr| b.coef.eval(x, sign * zr) * b.profile.j(zr),
                reach,
                levyheat::quad::QuadTol { abs: 1e-11, rel: 1e-9 },
            )
            .unwrap();
    }
    let drift = drift_integral(&b.coef, &b.profile, x, eps).unwrap();
    let reconstructed = direct - drift * fprime;
    assert!(
        (op - reconstructed).abs() < 2e-3 * op.abs().max(1e-3),
        "operator {op} vs reconstruction {reconstructed}"
    );
}

#[test]
fn exactness_degeneracy_constant_coefficient() {
    // κ const ⇒ q ≡ 0 ⇒ p^κ coincides with the frozen kernel bit-for-bit.
    let mut cfg = skew_config(33, 10);
    cfg.coefficient.kappa = levyheat::coefficient::KappaFamily::Constant { value: 1.0 };
    cfg.coefficient.kappa1 = 1.0;
    let b = pipeline::build_stage(&cfg, false).unwrap();
    assert_eq!(b.q0.sup(), 0.0);
    assert_eq!(b.q.sup(), 0.0);
    assert_eq!(b.phi.sup(), 0.0);
    // p^κ equals the frozen rows exactly.
    let it = b.p_kappa.t_nodes.iter().position(|&v| (v - 1.0).abs() < 1e-11).unwrap();
    let stride = (b.p_kappa.x.step / b.cache.u_grid.step).round() as i64;
    let center = b.cache.u_index(0.0).unwrap() as i64;
    for (ix, iy) in [(0, 0), (5, 20), (16, 16), (30, 2)] {
        let iu = (center + (iy as i64 - ix as i64) * stride) as usize;
        assert_eq!(b.p_kappa.at(it, ix, iy), b.cache.density_at(iy, it, iu));
    }
}
