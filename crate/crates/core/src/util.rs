//! Small numeric helpers shared across modules.

/// log(Σ exp(x_i)) computed against overflow.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut buf: Vec<f64> = Vec::new();
    for v in values {
        buf.push(v);
        if v > max {
            max = v;
        }
    }
    if buf.is_empty() || max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = buf.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Streaming log-sum-exp accumulator; avoids materializing all terms.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, v: f64) {
        if v <= self.max {
            self.sum += (v - self.max).exp();
        } else {
            // rescale the running sum to the new maximum
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

/// Sample mean and standard error of the mean (n ≥ 2).
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    assert!(n >= 2, "need at least two samples for a standard error");
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Kolmogorov-Smirnov distance between a sample and a CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Maximize a smooth scalar function near a bracketing triple by golden-section
/// search; returns (argmax, max). Falls back to the midpoint when the bracket
/// is degenerate.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Vertex of the parabola through (x0±h, y...) relative to the middle node;
/// returns the abscissa offset clamped to [-h, h]. Degenerate (non-concave)
/// stencils return 0.
pub fn parabolic_offset(y_minus: f64, y_mid: f64, y_plus: f64, h: f64) -> f64 {
    let denom = y_minus - 2.0 * y_mid + y_plus;
    if !(denom < 0.0) {
        return 0.0;
    }
    let off = 0.5 * h * (y_minus - y_plus) / denom;
    off.clamp(-h, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lse_matches_direct() {
        let xs: [f64; 4] = [0.1, -2.0, 3.5, 1.0];
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert_abs_diff_eq!(log_sum_exp(xs), direct, epsilon = 1e-14);
        let mut acc = LogSumExp::new();
        for x in xs {
            acc.add(x);
        }
        assert_abs_diff_eq!(acc.value(), direct, epsilon = 1e-14);
    }

    #[test]
    fn lse_handles_large_values() {
        let mut acc = LogSumExp::new();
        acc.add(1000.0);
        acc.add(1000.0);
        assert_abs_diff_eq!(acc.value(), 1000.0 + 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn slope_of_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert_abs_diff_eq!(ls_slope(&x, &y), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn golden_finds_parabola_max() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 80);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
    }
}
