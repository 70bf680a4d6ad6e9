//! Interpolation helpers: monotone cubic (PCHIP) tables, lattice cubics and
//! local polynomial fits.

/// Monotone piecewise-cubic interpolant (Fritsch–Carlson slopes) on a strictly
/// increasing node vector. Exact on data sampled from straight lines, shape
/// preserving otherwise.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2);
        let n = xs.len();
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            d[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            if d[i - 1] * d[i] <= 0.0 {
                m[i] = 0.0;
            } else {
                let w1 = 2.0 * (xs[i + 1] - xs[i]) + (xs[i] - xs[i - 1]);
                let w2 = (xs[i + 1] - xs[i]) + 2.0 * (xs[i] - xs[i - 1]);
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        Pchip { xs, ys, slopes: m }
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    /// Evaluates the interpolant; clamps outside the node range.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.xs[0], self.xs[self.xs.len() - 1]);
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }
}

/// Index/weight pair for linear interpolation on a sorted node vector.
/// Clamps at the ends.
pub fn linear_weights(nodes: &[f64], x: f64) -> (usize, f64) {
    let n = nodes.len();
    if x <= nodes[0] {
        return (0, 0.0);
    }
    if x >= nodes[n - 1] {
        return (n - 2, 1.0);
    }
    let i = match nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    };
    let w = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
    (i, w)
}

/// Cubic (4-point Lagrange) interpolation on a uniform lattice
/// `x_j = origin + j·step`. Falls back to linear at the edges.
pub fn lattice_cubic(values: &[f64], origin: f64, step: f64, x: f64) -> f64 {
    let n = values.len();
    let s = (x - origin) / step;
    let j = s.floor() as isize;
    let f = s - j as f64;
    if j < 1 || (j as usize) + 2 >= n {
        let j = (j.max(0) as usize).min(n - 2);
        let f = ((x - origin) / step - j as f64).clamp(0.0, 1.0);
        return values[j] * (1.0 - f) + values[j + 1] * f;
    }
    let j = j as usize;
    let (ym1, y0, y1, y2) = (values[j - 1], values[j], values[j + 1], values[j + 2]);
    // Lagrange basis at offsets -1, 0, 1, 2.
    let a = -f * (f - 1.0) * (f - 2.0) / 6.0;
    let b = (f * f - 1.0) * (f - 2.0) / 2.0;
    let c = -f * (f + 1.0) * (f - 2.0) / 2.0;
    let d = f * (f * f - 1.0) / 6.0;
    a * ym1 + b * y0 + c * y1 + d * y2
}

/// Least-squares polynomial fit `Σ c_k x^k` of given degree through the
/// points `(xs, ys)`; plain normal equations, adequate for the small local
/// stencils used by the truncated-operator evaluation.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let m = degree + 1;
    let n = xs.len();
    assert!(n >= m);
    let mut ata = vec![0.0; m * m];
    let mut atb = vec![0.0; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut pows = vec![1.0; 2 * m - 1];
        for k in 1..2 * m - 1 {
            pows[k] = pows[k - 1] * x;
        }
        for r in 0..m {
            for c in 0..m {
                ata[r * m + c] += pows[r + c];
            }
            atb[r] += pows[r] * y;
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if ata[r * m + col].abs() > ata[piv * m + col].abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..m {
                ata.swap(col * m + c, piv * m + c);
            }
            atb.swap(col, piv);
        }
        let diag = ata[col * m + col];
        for r in col + 1..m {
            let factor = ata[r * m + col] / diag;
            for c in col..m {
                ata[r * m + c] -= factor * ata[col * m + c];
            }
            atb[r] -= factor * atb[col];
        }
    }
    let mut coeffs = vec![0.0; m];
    for r in (0..m).rev() {
        let mut v = atb[r];
        for c in r + 1..m {
            v -= ata[r * m + c] * coeffs[c];
        }
        coeffs[r] = v / ata[r * m + r];
    }
    coeffs
}

/// Power-law model `y = a·x^p` fitted through two points with positive
/// ordinates of equal sign; returns `(a, p)` in the sense `|y| = a·x^p` with
/// the common sign folded into `a`. `None` when the signs differ or either
/// value is ~0 (caller falls back to linear).
pub fn power_fit_two_point(x1: f64, y1: f64, x2: f64, y2: f64) -> Option<(f64, f64)> {
    if y1 == 0.0 || y2 == 0.0 || (y1 > 0.0) != (y2 > 0.0) {
        return None;
    }
    let p = (y2.abs() / y1.abs()).ln() / (x2 / x1).ln();
    if !p.is_finite() {
        return None;
    }
    let a = y1 / x1.powf(p);
    Some((a, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_is_exact_on_lines() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3 - 2.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.5 * x - 1.25).collect();
        let p = Pchip::new(xs, ys);
        for i in 0..50 {
            let x = -2.0 + i as f64 * 0.1;
            assert!((p.eval(x) - (3.5 * x - 1.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn pchip_preserves_monotonicity() {
        let xs: Vec<f64> = (0..15).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
        let p = Pchip::new(xs, ys);
        let mut prev = f64::INFINITY;
        for i in 0..140 {
            let v = p.eval(i as f64 * 0.1);
            assert!(v <= prev + 1e-14);
            prev = v;
        }
    }

    #[test]
    fn lattice_cubic_reproduces_cubics() {
        let vals: Vec<f64> = (0..30)
            .map(|j| {
                let x = j as f64 * 0.5 - 5.0;
                x * x * x - 2.0 * x
            })
            .collect();
        for i in 0..80 {
            let x = -4.0 + i as f64 * 0.1;
            let v = lattice_cubic(&vals, -5.0, 0.5, x);
            assert!((v - (x * x * x - 2.0 * x)).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn polyfit_recovers_coefficients() {
        let xs: Vec<f64> = (0..9).map(|i| (i as f64 - 4.0) * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x - 0.5 * x * x).collect();
        let c = polyfit(&xs, &ys, 2);
        assert!((c[0] - 1.0).abs() < 1e-10);
        assert!((c[1] - 2.0).abs() < 1e-10);
        assert!((c[2] + 0.5).abs() < 1e-9);
    }
}
