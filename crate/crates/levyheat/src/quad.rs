//! Adaptive Gauss–Kronrod panels with singularity splitting at the origin and
//! accelerated oscillatory tails.

use crate::{Error, Result};

/// Absolute/relative tolerance pair. Defaults follow the run-config defaults
/// (1e-10 / 1e-8).
#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol { abs: 1e-10, rel: 1e-8 }
    }
}

// 21-point Gauss–Kronrod pair (10-point Gauss embedded).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One GK21 panel; returns (integral, error estimate).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    for j in 0..10 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        res_k += WGK[j] * fsum;
        if j % 2 == 1 {
            res_g += WG[j / 2] * fsum;
        }
    }
    ((res_k * half), ((res_k - res_g) * half).abs())
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: QuadTol) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack = vec![(a, b)];
    let mut total = 0.0f64;
    let mut err_total = 0.0f64;
    let mut panels = 0usize;
    // Rough first pass to scale the relative tolerance.
    let (coarse, _) = gk21(&f, a, b);
    let scale = coarse.abs();
    while let Some((lo, hi)) = stack.pop() {
        panels += 1;
        if panels > 4000 {
            return Err(Error::Quadrature(format!(
                "panel budget exhausted on [{a:.3e}, {b:.3e}]"
            )));
        }
        let (val, err) = gk21(&f, lo, hi);
        let width_share = ((hi - lo) / (b - a)).abs().max(1e-6);
        if err <= (tol.abs + tol.rel * scale.max(total.abs())) * width_share
            || (hi - lo).abs() < 1e-15 * (b - a).abs()
        {
            total += val;
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
    }
    if !total.is_finite() || err_total > 1e-2 * total.abs().max(1.0) {
        return Err(Error::Quadrature(format!(
            "non-convergent on [{a:.3e}, {b:.3e}] (err {err_total:.3e}, val {total:.3e})"
        )));
    }
    Ok(total)
}

/// Integrates `f` over `(0, b]` where `f` may be integrably singular at 0.
/// Geometric panels toward the origin; rejects integrands whose panel
/// contributions do not decay (divergent integral).
pub fn integrate_to_zero<F: Fn(f64) -> f64>(f: F, b: f64, tol: QuadTol) -> Result<f64> {
    assert!(b > 0.0);
    let mut total = 0.0f64;
    let mut hi = b;
    let mut prev = f64::INFINITY;
    let mut grow_count = 0;
    for level in 0..200 {
        let lo = hi * 0.5;
        let part = integrate(&f, lo, hi, tol)?;
        total += part;
        if part.abs() > prev && prev.is_finite() {
            grow_count += 1;
            if grow_count >= 6 {
                return Err(Error::Quadrature(format!(
                    "divergent near 0 (panel {level}: |{part:.3e}| > {prev:.3e})"
                )));
            }
        } else {
            grow_count = 0;
        }
        // Geometric completion of the remaining panels.
        let q = part.abs() / prev.max(1e-300);
        prev = part.abs();
        hi = lo;
        if level > 8 && q < 0.95 {
            let remainder = part.abs() * q / (1.0 - q);
            if remainder < 0.25 * (tol.abs + tol.rel * total.abs()) {
                total += part.signum() * remainder;
                return Ok(total);
            }
        }
    }
    Err(Error::Quadrature(
        "panel contributions near 0 did not converge in 200 halvings".into(),
    ))
}

/// Integrates `f` over `[a, ∞)` for an absolutely integrable `f` via
/// geometric panels; rejects fat tails whose panel contributions do not decay.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: QuadTol) -> Result<f64> {
    assert!(a > 0.0);
    let mut total = 0.0f64;
    let mut lo = a;
    let mut prev = f64::INFINITY;
    let mut grow_count = 0;
    for level in 0..200 {
        let hi = lo * 2.0;
        let part = integrate(&f, lo, hi, tol)?;
        total += part;
        if part.abs() > prev && prev.is_finite() {
            grow_count += 1;
            if grow_count >= 6 {
                return Err(Error::Quadrature(format!(
                    "divergent tail (panel {level}: |{part:.3e}| > {prev:.3e})"
                )));
            }
        } else {
            grow_count = 0;
        }
        let q = part.abs() / prev.max(1e-300);
        prev = part.abs();
        lo = hi;
        if level > 4 && q < 0.95 {
            let remainder = part.abs() * q / (1.0 - q);
            if remainder < 0.25 * (tol.abs + tol.rel * total.abs()) {
                total += part.signum() * remainder;
                return Ok(total);
            }
        }
    }
    Err(Error::Quadrature(
        "tail panel contributions did not converge in 200 doublings".into(),
    ))
}

/// Oscillation kind for [`oscillatory_tail`].
#[derive(Debug, Clone, Copy)]
pub enum Osc {
    Cos,
    Sin,
}

/// `∫_a^∞ g(z) · cos(ωz) dz` (or sin) for decaying `g`, by summing half-period
/// panels and accelerating the alternating series with repeated averaging
/// (Euler transformation). `ω > 0`.
pub fn oscillatory_tail<F: Fn(f64) -> f64>(g: F, a: f64, omega: f64, kind: Osc) -> Result<f64> {
    assert!(omega > 0.0 && a > 0.0);
    let half = std::f64::consts::PI / omega;
    // First zero of the oscillating factor at or after `a`.
    let k0 = match kind {
        Osc::Cos => ((a * omega / std::f64::consts::PI) - 0.5).ceil().max(0.0),
        Osc::Sin => (a * omega / std::f64::consts::PI).ceil().max(0.0),
    };
    let z0 = match kind {
        Osc::Cos => (k0 + 0.5) * half,
        Osc::Sin => k0 * half,
    };
    let tol = QuadTol { abs: 1e-13, rel: 1e-10 };
    let head = if z0 > a {
        let f = |z: f64| match kind {
            Osc::Cos => g(z) * (omega * z).cos(),
            Osc::Sin => g(z) * (omega * z).sin(),
        };
        integrate(f, a, z0, tol)?
    } else {
        0.0
    };

    const MAX_TERMS: usize = 48;
    let mut terms = Vec::with_capacity(MAX_TERMS);
    let mut z = z0;
    for _ in 0..MAX_TERMS {
        let f = |t: f64| match kind {
            Osc::Cos => g(t) * (omega * t).cos(),
            Osc::Sin => g(t) * (omega * t).sin(),
        };
        let (val, _) = gk21(&f, z, z + half);
        terms.push(val);
        z += half;
        if val.abs() < 1e-15 {
            break;
        }
    }
    // Repeated averaging of partial sums.
    let mut row: Vec<f64> = Vec::with_capacity(terms.len());
    let mut s = 0.0;
    for t in &terms {
        s += t;
        row.push(s);
    }
    while row.len() > 1 {
        let next: Vec<f64> = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let stable = (next[next.len() - 1] - row[row.len() - 1]).abs() < 1e-14;
        row = next;
        if stable {
            break;
        }
    }
    Ok(head + row[row.len() - 1])
}

/// Trapezoid weights for a sorted, possibly non-uniform node vector.
pub fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, QuadTol::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn integrable_singularity_at_zero() {
        // ∫_0^1 s^{-1/2} ds = 2
        let v = integrate_to_zero(|s| s.powf(-0.5), 1.0, QuadTol::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn divergent_singularity_rejected() {
        let r = integrate_to_zero(|s| s.powf(-1.5), 1.0, QuadTol::default());
        assert!(r.is_err());
    }

    #[test]
    fn tail_power_law() {
        // ∫_1^∞ s^{-2} ds = 1
        let v = integrate_to_infinity(|s| s.powi(-2), 1.0, QuadTol::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn fat_tail_rejected() {
        let r = integrate_to_infinity(|s| (1.0 + s).ln().recip(), 1.0, QuadTol::default());
        assert!(r.is_err());
    }

    #[test]
    fn oscillatory_cosine_tail() {
        // ∫_1^∞ cos(ωz)/z² dz for ω = 3, against a brute-force finite integral.
        let omega = 3.0;
        let f = |z: f64| (omega * z).cos() / (z * z);
        let mut brute = 0.0;
        let n = 4_000_000usize;
        let hi = 400.0;
        let dz = (hi - 1.0) / n as f64;
        for i in 0..n {
            let z = 1.0 + (i as f64 + 0.5) * dz;
            brute += f(z) * dz;
        }
        let v = oscillatory_tail(|z| 1.0 / (z * z), 1.0, omega, Osc::Cos).unwrap();
        assert!((v - brute).abs() < 1e-6, "{v} vs {brute}");
    }
}
