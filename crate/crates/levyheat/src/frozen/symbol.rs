//! The Lévy symbol ψ_w(ξ) = ∫ (e^{iξz} − 1 − iξz·1_{|z|<1}) κ(w,z) J(z) dz of
//! a frozen-coefficient operator, evaluated by quadrature and tabulated per
//! base point.
//!
//! Fourier normalization is pinned here once: forward e^{+iξz} in the symbol,
//! inverse (2π)^{−d} e^{−iξu} in the density.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficient::Coefficient;
use crate::interp::Pchip;
use crate::profile::UnimodalProfile;
use crate::quad::{self, QuadTol};
use crate::{Error, Result};

/// cos(w) − 1 without cancellation.
#[inline]
fn cos_m1(w: f64) -> f64 {
    let s = (0.5 * w).sin();
    -2.0 * s * s
}

/// sin(w) − w without cancellation.
#[inline]
fn sin_m_w(w: f64) -> f64 {
    if w.abs() < 0.5 {
        let w2 = w * w;
        w * w2 * (-1.0 / 6.0 + w2 * (1.0 / 120.0 - w2 / 5040.0))
    } else {
        w.sin() - w
    }
}

/// Filon coefficients α, β, γ at θ = s·h.
fn filon_coeffs(theta: f64) -> (f64, f64, f64) {
    if theta < 0.1 {
        let t2 = theta * theta;
        let alpha = theta * t2 * (2.0 / 45.0 - t2 * (2.0 / 315.0 - t2 * 2.0 / 4725.0));
        let beta = 2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 * (4.0 / 105.0 - t2 * 2.0 / 567.0));
        let gamma = 4.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * (1.0 / 210.0 - t2 / 11340.0));
        (alpha, beta, gamma)
    } else {
        let (sin_t, cos_t) = theta.sin_cos();
        let t3 = theta * theta * theta;
        let alpha = (theta * theta + theta * sin_t * cos_t - 2.0 * sin_t * sin_t) / t3;
        let beta = 2.0 * (theta * (1.0 + cos_t * cos_t) - 2.0 * sin_t * cos_t) / t3;
        let gamma = 4.0 * (sin_t - theta * cos_t) / t3;
        (alpha, beta, gamma)
    }
}

/// Filon quadrature of ∫_a^b g(z)·cos(sz) dz (`sin = false`) or against
/// sin(sz), with 2n uniform cells. Exact trig moments against a piecewise
/// quadratic of g, valid for any oscillation count.
fn filon<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, s: f64, n: usize, sine: bool) -> f64 {
    let h = (b - a) / (2 * n) as f64;
    let (alpha, beta, gamma) = filon_coeffs(s * h);
    let trig = |z: f64| if sine { (s * z).sin() } else { (s * z).cos() };
    let mut even = -0.5 * (g(a) * trig(a) + g(b) * trig(b));
    for i in 0..=n {
        let z = a + (2 * i) as f64 * h;
        even += g(z) * trig(z);
    }
    let mut odd = 0.0;
    for i in 1..=n {
        let z = a + (2 * i - 1) as f64 * h;
        odd += g(z) * trig(z);
    }
    let boundary = if sine {
        -(g(b) * (s * b).cos() - g(a) * (s * a).cos())
    } else {
        g(b) * (s * b).sin() - g(a) * (s * a).sin()
    };
    h * (alpha * boundary + beta * even + gamma * odd)
}

/// Oscillatory integral over [a, b] via geometric Filon panels.
fn filon_geometric<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, s: f64, sine: bool) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (lo * 2.0).min(b);
        total += filon(g, lo, hi, s, 48, sine);
        lo = hi;
    }
    total
}

/// ∫_a^b g with geometric sub-panels (b/a may span decades).
fn integrate_decaying<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, tol: QuadTol) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (lo * 2.0).min(b);
        total += quad::integrate(g, lo, hi, tol)?;
        lo = hi;
    }
    Ok(total)
}

/// Direct quadrature of the symbol at a single frequency. The d = 1
/// convention splits κ(w,·) into even and odd parts against the radial J:
/// Re ψ = 2∫_0^∞ (cos(sz)−1)·g_e, Im ψ = 2∫_0^∞ (sin(sz)−sz·1_{z<1})·g_o.
pub fn eval_symbol(
    profile: &UnimodalProfile,
    coef: &Coefficient,
    w: f64,
    xi: f64,
) -> Result<Complex64> {
    if xi == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = xi.abs();
    let g_e = |z: f64| 0.5 * (coef.eval(w, z) + coef.eval(w, -z)) * profile.j(z);
    let odd_vanishes = coef.kappa.odd_part_vanishes();
    let g_o = |z: f64| 0.5 * (coef.eval(w, z) - coef.eval(w, -z)) * profile.j(z);
    let tol = QuadTol { abs: 1e-12, rel: 1e-10 };

    // Cut list: κ and ν discontinuities, the compensation radius 1, and the
    // oscillation onset π/s. Regions right of π/s are handled by Filon.
    let z_star = std::f64::consts::PI / s;
    let kappa1 = coef.kappa1 * profile.j_scale * profile.gamma0;
    // Tail cutoff: the oscillatory remainder is bounded by 2 g(Z)/s.
    let tol_tail = 1e-13 * (1.0 + s);
    let mut z_far = 2.0f64.max(2.0 * z_star);
    while kappa1 * profile.nu(z_far) * 2.0 / s > tol_tail && z_far < 1e12 {
        z_far *= 2.0;
    }
    let mut cuts: Vec<f64> = vec![1.0, z_star];
    for b in coef.kappa.z_breakpoints() {
        cuts.push(b);
    }
    for b in [profile.integrability_cut] {
        cuts.push(b);
    }
    cuts.retain(|&c| c > 0.0 && c < z_far);
    cuts.push(z_far);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * *b);

    let mut re = 0.0;
    let mut im = 0.0;
    let mut lo = 0.0f64;
    for &hi in &cuts {
        if hi <= lo {
            continue;
        }
        let oscillatory = lo >= z_star - 1e-300;
        if !oscillatory {
            // Compensated integrands, no full oscillation inside.
            let fre = |z: f64| cos_m1(s * z) * g_e(z);
            re += if lo == 0.0 {
                quad::integrate_to_zero(fre, hi, tol)?
            } else {
                quad::integrate(fre, lo, hi, tol)?
            };
            if !odd_vanishes {
                let fim = |z: f64| {
                    let w = s * z;
                    let base = if z < 1.0 { sin_m_w(w) } else { w.sin() };
                    base * g_o(z)
                };
                im += if lo == 0.0 {
                    quad::integrate_to_zero(fim, hi, tol)?
                } else {
                    quad::integrate(fim, lo, hi, tol)?
                };
            }
        } else {
            re += filon_geometric(&g_e, lo, hi, s, false);
            re -= integrate_decaying(&g_e, lo, hi, tol)?;
            if !odd_vanishes {
                im += filon_geometric(&g_o, lo, hi, s, true);
                if lo < 1.0 {
                    let cap = hi.min(1.0);
                    im -= s * quad::integrate(|z| z * g_o(z), lo, cap, tol)?;
                }
            }
        }
        lo = hi;
    }
    // Past z_far the oscillatory parts are below tolerance; the plain −g_e
    // term is completed from its local power exponent.
    let f_cut = g_e(z_far);
    if f_cut > 0.0 {
        let rho = (g_e(z_far) / g_e(0.5 * z_far)).ln() / std::f64::consts::LN_2;
        if rho >= -1.05 {
            return Err(Error::Quadrature(format!(
                "jump-kernel tail not integrable (exponent {rho:.3} at {z_far:.3e})"
            )));
        }
        re -= f_cut * z_far / (-rho - 1.0);
    }
    let mut psi = Complex64::new(2.0 * re, 2.0 * im);
    if xi < 0.0 {
        psi = psi.conj();
    }
    Ok(psi)
}

/// Tabulated symbol for one base point: ln(−Re ψ) and Im ψ/s over ln|ξ|,
/// with a power extrapolation below the smallest node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrozenSymbolTable {
    pub base_point: f64,
    pub s_min: f64,
    pub s_max: f64,
    ln_neg_re: Pchip,
    im_over_s: Pchip,
    /// Slope of ln(−Re ψ) at the small end, for sub-s_min extrapolation.
    low_slope: f64,
    low_re: f64,
    low_im_ratio: f64,
    /// min over the tabulation grid (|ξ| ≥ 1e-4) of −Re ψ(ξ)/h(1/|ξ|).
    pub decay_certificate: f64,
}

const TAB_LN_STEP: f64 = 0.015;

impl FrozenSymbolTable {
    /// Tabulates ψ_w on a log grid of |ξ| ∈ [1e−7, s_max].
    pub fn build(
        profile: &UnimodalProfile,
        coef: &Coefficient,
        w: f64,
        s_max: f64,
        h_of: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let s_min = 1e-7;
        let n = ((s_max / s_min).ln() / TAB_LN_STEP).ceil() as usize + 1;
        let mut ln_s = Vec::with_capacity(n);
        let mut ln_nre = Vec::with_capacity(n);
        let mut im_ratio = Vec::with_capacity(n);
        let mut cert = f64::INFINITY;
        for i in 0..n {
            let s = s_min * (s_max / s_min).powf(i as f64 / (n - 1) as f64);
            let psi = eval_symbol(profile, coef, w, s)?;
            let neg_re = -psi.re;
            if neg_re <= 0.0 {
                return Err(Error::SymbolNotCoercive(format!(
                    "Re ψ({s:.3e}) = {:.3e} at base {w}",
                    psi.re
                )));
            }
            ln_s.push(s.ln());
            ln_nre.push(neg_re.ln());
            im_ratio.push(psi.im / s);
            if s >= 1e-4 {
                cert = cert.min(neg_re / h_of(1.0 / s));
            }
        }
        let low_slope = (ln_nre[1] - ln_nre[0]) / (ln_s[1] - ln_s[0]);
        let low_re = ln_nre[0];
        let low_im_ratio = im_ratio[0];
        Ok(FrozenSymbolTable {
            base_point: w,
            s_min,
            s_max,
            ln_neg_re: Pchip::new(ln_s.clone(), ln_nre),
            im_over_s: Pchip::new(ln_s, im_ratio),
            low_slope,
            low_re,
            low_im_ratio,
            decay_certificate: cert,
        })
    }

    /// ψ at any |ξ| ≤ s_max from the tabulation.
    pub fn eval(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = xi.abs();
        let (re, im) = if s < self.s_min {
            let ln_ratio = (s / self.s_min).ln();
            (
                -(self.low_re + self.low_slope * ln_ratio).exp(),
                self.low_im_ratio * s,
            )
        } else {
            let ln_s = s.ln();
            (
                -self.ln_neg_re.eval(ln_s).exp(),
                self.im_over_s.eval(ln_s) * s,
            )
        };
        let psi = Complex64::new(re, im);
        if xi < 0.0 {
            psi.conj()
        } else {
            psi
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::KappaFamily;
    use crate::profile::NuFamily;

    fn cauchy_setup() -> (UnimodalProfile, Coefficient) {
        let p = UnimodalProfile::new(1, NuFamily::Stable { alpha: 1.0 }, 1.0);
        let c = Coefficient {
            kappa: KappaFamily::Constant { value: 1.0 },
            kappa0: 1.0,
            kappa1: 1.0,
            kappa2: 0.0,
            beta: 0.5,
            kappa3: 0.1,
            kappa4: 0.1,
        };
        (p, c)
    }

    #[test]
    fn filon_matches_adaptive_on_smooth_integrand() {
        let g = |z: f64| 1.0 / (z * z + 0.5);
        for s in [0.05, 0.8, 7.0, 60.0] {
            let filon_v = filon(&g, 1.0, 3.0, s, 48, false);
            let exact = quad::integrate(
                |z| g(z) * (s * z).cos(),
                1.0,
                3.0,
                QuadTol { abs: 1e-13, rel: 1e-12 },
            )
            .unwrap();
            assert!(
                (filon_v - exact).abs() < 5e-8,
                "cos s={s}: {filon_v} vs {exact}"
            );
            let filon_v = filon(&g, 1.0, 3.0, s, 48, true);
            let exact = quad::integrate(
                |z| g(z) * (s * z).sin(),
                1.0,
                3.0,
                QuadTol { abs: 1e-13, rel: 1e-12 },
            )
            .unwrap();
            assert!(
                (filon_v - exact).abs() < 5e-8,
                "sin s={s}: {filon_v} vs {exact}"
            );
        }
    }

    #[test]
    fn cauchy_symbol_closed_form() {
        // κ ≡ 1, J = |z|⁻²: ψ(ξ) = −π|ξ|.
        let (p, c) = cauchy_setup();
        for xi in [0.02, 0.5, 1.0, 13.7, 211.0] {
            let psi = eval_symbol(&p, &c, 0.0, xi).unwrap();
            let exact = -std::f64::consts::PI * xi;
            assert!(
                (psi.re - exact).abs() < 1e-7 * exact.abs(),
                "xi={xi}: {} vs {exact}",
                psi.re
            );
            assert!(psi.im.abs() < 1e-9 * exact.abs().max(1.0), "xi={xi}: {}", psi.im);
        }
        // ψ(0) = 0 and Hermitian symmetry.
        assert_eq!(eval_symbol(&p, &c, 0.0, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        let plus = eval_symbol(&p, &c, 0.0, 3.0).unwrap();
        let minus = eval_symbol(&p, &c, 0.0, -3.0).unwrap();
        assert!((plus - minus.conj()).norm() < 1e-12 * plus.norm());
    }

    #[test]
    fn negative_real_part_for_skew_coefficient() {
        let p = UnimodalProfile::new(1, NuFamily::Stable { alpha: 1.0 }, 1.0);
        let c = Coefficient {
            kappa: KappaFamily::SkewTruncated { a: 0.4, z0: 0.5 },
            kappa0: 1.0,
            kappa1: 1.4,
            kappa2: 0.4,
            beta: 0.95,
            kappa3: 0.1,
            kappa4: 0.1,
        };
        for w in [-1.0, 0.0, 2.0] {
            for xi in [0.1, 1.0, 10.0, 100.0] {
                let psi = eval_symbol(&p, &c, w, xi).unwrap();
                assert!(psi.re < 0.0, "w={w} xi={xi}: {}", psi.re);
                // Bounds from κ₀, κ₁ against the symmetric symbol.
                let base = -std::f64::consts::PI * xi;
                assert!(psi.re <= 1.0 * base * 0.99 && psi.re >= 1.4 * base * 1.01);
            }
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let p = UnimodalProfile::new(1, NuFamily::Stable { alpha: 1.0 }, 1.0);
        let c = Coefficient {
            kappa: KappaFamily::SkewTruncated { a: 0.4, z0: 0.5 },
            kappa0: 1.0,
            kappa1: 1.4,
            kappa2: 0.4,
            beta: 0.95,
            kappa3: 0.1,
            kappa4: 0.1,
        };
        let h4 = |_r: f64| 1.0;
        let tab = FrozenSymbolTable::build(&p, &c, 0.7, 500.0, h4).unwrap();
        for xi in [1e-3, 0.07, 0.9, 3.3, 47.0, 333.0] {
            let direct = eval_symbol(&p, &c, 0.7, xi).unwrap();
            let interp = tab.eval(xi);
            let scale = direct.norm().max(1e-12);
            assert!(
                (direct - interp).norm() < 2e-5 * scale,
                "xi={xi}: direct {direct}, interp {interp}"
            );
        }
        assert!(tab.decay_certificate > 0.0);
    }

    #[test]
    fn modulated_coefficient_symbol_is_real() {
        let p = UnimodalProfile::new(1, NuFamily::Stable { alpha: 0.75 }, 1.0);
        let c = Coefficient {
            kappa: KappaFamily::Modulated { a: 0.3 },
            kappa0: 0.7,
            kappa1: 1.3,
            kappa2: 0.6,
            beta: 0.5,
            kappa3: 0.1,
            kappa4: 0.1,
        };
        let psi = eval_symbol(&p, &c, 0.4, 2.2).unwrap();
        assert_eq!(psi.im, 0.0);
        assert!(psi.re < 0.0);
    }
}
