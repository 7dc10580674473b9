//! Exact finite-size and limit free energies of the Curie-Weiss model
//! F_N(t,h) = (1/N) log 2^{−N} Σ_σ exp N(t ξ(S_N) + h S_N), its magnetization
//! fixed points m = tanh(h + 2tm), and the critical exponents at t_c = ½.

use crate::util::{ls_slope, LogSumExp};
use crate::{Error, Result};
use statrs::function::gamma::ln_gamma;
use std::sync::Arc;

/// Critical inverse temperature of the Curie-Weiss model.
pub const T_CRITICAL: f64 = 0.5;

/// Interaction function ξ of the generalized model; the standard model is
/// ξ(x) = x².
#[derive(Clone)]
pub enum Xi {
    Square,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Xi {
    pub fn eval(&self, m: f64) -> f64 {
        match self {
            Xi::Square => m * m,
            Xi::Custom(f) => f(m),
        }
    }

    fn deriv(&self, m: f64) -> f64 {
        match self {
            Xi::Square => 2.0 * m,
            Xi::Custom(f) => {
                let h = 1e-6;
                let hi = (m + h).min(1.0);
                let lo = (m - h).max(-1.0);
                (f(hi) - f(lo)) / (hi - lo)
            }
        }
    }
}

impl std::fmt::Debug for Xi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Xi::Square => write!(f, "Square"),
            Xi::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Parameters (t, h, ξ) of the (generalized) Curie-Weiss free energy.
#[derive(Debug, Clone)]
pub struct CwParams {
    pub t: f64,
    pub h: f64,
    pub xi: Xi,
}

impl CwParams {
    pub fn new(t: f64, h: f64, xi: Xi) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::invalid("t must be ≥ 0"));
        }
        Ok(CwParams { t, h, xi })
    }

    pub fn standard(t: f64, h: f64) -> Result<Self> {
        CwParams::new(t, h, Xi::Square)
    }
}

const MAX_N: u64 = 10_000_000;

/// Exact F_N(t,h) via the O(N) magnetization-level sum
/// Σ_k C(N,k) 2^{−N} exp N(t ξ(m_k) + h m_k), m_k = (2k−N)/N, in log-space.
/// Binomials go through ln Γ so N up to 10⁷ cannot overflow.
pub fn finite_free_energy(n: u64, p: &CwParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("N must be ≥ 1"));
    }
    if n > MAX_N {
        return Err(Error::EnumerationTooLarge {
            configs: n as u128,
            limit: MAX_N as u128,
        });
    }
    let nf = n as f64;
    let ln_n_fact = ln_gamma(nf + 1.0);
    let mut lse = LogSumExp::new();
    for k in 0..=n {
        let kf = k as f64;
        let m = (2.0 * kf - nf) / nf;
        let ln_binom = ln_n_fact - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
        lse.add(ln_binom - nf * std::f64::consts::LN_2 + nf * (p.t * p.xi.eval(m) + p.h * m));
    }
    Ok(lse.value() / nf)
}

/// ψ*(m): the convex dual of log cosh, i.e. the binary entropy
/// (1+m)/2·log(1+m) + (1−m)/2·log(1−m) on [−1,1] (0·log 0 = 0), +∞ outside.
pub fn psi_star(m: f64) -> f64 {
    if m.abs() > 1.0 {
        return f64::INFINITY;
    }
    let a = 1.0 + m;
    let b = 1.0 - m;
    let ta = if a > 0.0 { 0.5 * a * a.ln() } else { 0.0 };
    let tb = if b > 0.0 { 0.5 * b * b.ln() } else { 0.0 };
    ta + tb
}

fn psi_star_deriv(m: f64) -> f64 {
    m.atanh()
}

/// Value and maximizer of the limit free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwLimit {
    pub value: f64,
    pub m_star: f64,
}

/// Limit free energy f(t,h) = sup_{m∈[−1,1]} (t ξ(m) + h m − ψ*(m)):
/// grid scan with parabolic refinement, then a safeguarded Newton polish on
/// the first-order condition. The closed-form derivative of ψ* makes the
/// polish essentially free and is what reaches the 1e-8 regime at maximizers
/// close to ±1, where a uniform grid alone cannot.
pub fn limit_free_energy(p: &CwParams) -> CwLimit {
    let score = |m: f64| p.t * p.xi.eval(m) + p.h * m - psi_star(m);
    let n = 4001usize; // odd, so m = 0 is a node
    let h_grid = 2.0 / (n - 1) as f64;
    let mut best = f64::NEG_INFINITY;
    let mut win = 0usize;
    for i in 0..n {
        let m = -1.0 + i as f64 * h_grid;
        let v = score(m);
        if v > best {
            best = v;
            win = i;
        }
    }
    let grid_m = -1.0 + win as f64 * h_grid;
    let mut m = grid_m;
    if win > 0 && win + 1 < n {
        let sm = score(m - h_grid);
        let sp = score(m + h_grid);
        let denom = sm - 2.0 * best + sp;
        if denom < 0.0 {
            m += 0.5 * h_grid * (sm - sp) / denom;
        }
    }
    // Newton polish on t ξ′(m) + h − atanh(m) = 0
    let eps = 1e-15;
    m = m.clamp(-1.0 + eps, 1.0 - eps);
    for _ in 0..60 {
        let g1 = p.t * p.xi.deriv(m) + p.h - psi_star_deriv(m);
        let g2 = match p.xi {
            Xi::Square => 2.0 * p.t - 1.0 / (1.0 - m * m),
            Xi::Custom(_) => {
                let d = 1e-7;
                let hi = (m + d).min(1.0 - eps);
                let lo = (m - d).max(-1.0 + eps);
                p.t * (p.xi.deriv(hi) - p.xi.deriv(lo)) / (hi - lo) - 1.0 / (1.0 - m * m)
            }
        };
        if !(g2 < 0.0) {
            break; // not in a concave basin, keep the grid answer
        }
        let next = (m - g1 / g2).clamp(-1.0 + eps, 1.0 - eps);
        if (next - m).abs() < 1e-16 {
            m = next;
            break;
        }
        m = next;
    }
    let polished = score(m);
    if polished >= best {
        CwLimit {
            value: polished,
            m_star: m,
        }
    } else {
        CwLimit {
            value: best,
            m_star: grid_m,
        }
    }
}

/// Classification of a magnetization fixed point by the sign of
/// ∂²_m g_{t,h}(m) = 2t − 1/(1−m²).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointType {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub m: f64,
    pub kind: FixedPointType,
    pub residual: f64,
}

/// All solutions of m = tanh(h + 2tm) in [−1, 1], found by sign-change
/// bisection on a 10⁴-point grid and refined to residual ≤ 1e-12; classified
/// by the analytic second derivative 2t − 1/(1−m²).
pub fn magnetization_fixed_points(t: f64, h: f64) -> Result<Vec<FixedPoint>> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t must be ≥ 0"));
    }
    let r = |m: f64| m - (h + 2.0 * t * m).tanh();
    let n = 10_000usize;
    let step = 2.0 / n as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_m = -1.0;
    let mut prev_r = r(prev_m);
    for i in 1..=n {
        let m = -1.0 + i as f64 * step;
        let cur = r(m);
        if prev_r == 0.0 {
            roots.push(prev_m);
        } else if prev_r * cur < 0.0 {
            let (mut lo, mut hi) = (prev_m, m);
            let mut rlo = prev_r;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let rm = r(mid);
                if rm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if rlo * rm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    rlo = rm;
                }
            }
            let mut root = 0.5 * (lo + hi);
            for _ in 0..5 {
                let sech2 = 1.0 - (h + 2.0 * t * root).tanh().powi(2);
                let dr = 1.0 - 2.0 * t * sech2;
                if dr.abs() < 1e-14 {
                    break;
                }
                root -= r(root) / dr;
            }
            roots.push(root);
        }
        prev_m = m;
        prev_r = cur;
    }
    if prev_r == 0.0 {
        roots.push(prev_m);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(roots
        .into_iter()
        .map(|m| {
            let second = 2.0 * t - 1.0 / (1.0 - m * m);
            FixedPoint {
                m,
                kind: if second <= 0.0 {
                    FixedPointType::Max
                } else {
                    FixedPointType::Min
                },
                residual: r(m).abs(),
            }
        })
        .collect())
}

/// Which critical exponent to probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentProbe {
    /// Fits log f(t_c, h) against log h; the slope is 1 + 1/δ.
    Delta,
    /// Fits log m₀(t) against log (t − t_c); the slope is β.
    Beta,
}

/// Least-squares critical-exponent probe at t_c = ½ over the decade
/// [1e-4, 1e-2] of the relevant small parameter.
pub fn critical_exponents(probe: ExponentProbe) -> f64 {
    let n_pts = 20;
    let (lo, hi) = (1e-4f64, 1e-2f64);
    let mut xs = Vec::with_capacity(n_pts);
    let mut ys = Vec::with_capacity(n_pts);
    for i in 0..n_pts {
        let frac = i as f64 / (n_pts - 1) as f64;
        let eps = lo * (hi / lo).powf(frac);
        match probe {
            ExponentProbe::Delta => {
                let p = CwParams::standard(T_CRITICAL, eps).unwrap();
                let f = limit_free_energy(&p).value;
                xs.push(eps.ln());
                ys.push(f.ln());
            }
            ExponentProbe::Beta => {
                let pts = magnetization_fixed_points(T_CRITICAL + eps, 0.0).unwrap();
                let m0 = pts
                    .iter()
                    .filter(|fp| fp.kind == FixedPointType::Max && fp.m > 0.0)
                    .map(|fp| fp.m)
                    .fold(0.0f64, f64::max);
                xs.push(eps.ln());
                ys.push(m0.ln());
            }
        }
    }
    ls_slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_coupling_is_log_cosh_for_every_n() {
        for n in [1u64, 7, 100, 2001] {
            for h in [0.0, 0.3, -1.2f64] {
                let p = CwParams::standard(0.0, h).unwrap();
                assert_abs_diff_eq!(
                    finite_free_energy(n, &p).unwrap(),
                    h.cosh().ln(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn single_spin_value() {
        // N = 1, ξ = x²: S₁ = ±1 so ξ(S₁) = 1 and F₁ = t + log cosh h
        let p = CwParams::standard(0.7, 0.4).unwrap();
        assert_abs_diff_eq!(
            finite_free_energy(1, &p).unwrap(),
            0.7 + 0.4f64.cosh().ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn rejects_oversized_n() {
        let p = CwParams::standard(0.1, 0.0).unwrap();
        assert!(finite_free_energy(20_000_000, &p).is_err());
        assert!(finite_free_energy(0, &p).is_err());
    }

    #[test]
    fn limit_at_zero_coupling_is_log_cosh() {
        for h in [0.0, 0.05, 0.5, 1.0, 2.0] {
            let p = CwParams::standard(0.0, h).unwrap();
            let lim = limit_free_energy(&p);
            assert_abs_diff_eq!(lim.value, h.cosh().ln(), epsilon = 1e-8);
        }
    }

    #[test]
    fn subcritical_value_is_zero() {
        let p = CwParams::standard(0.4, 0.0).unwrap();
        let lim = limit_free_energy(&p);
        assert_abs_diff_eq!(lim.value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lim.m_star, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn supercritical_value_matches_fixed_point() {
        let p = CwParams::standard(1.0, 0.0).unwrap();
        let lim = limit_free_energy(&p);
        assert!(lim.value > 0.0);
        let pts = magnetization_fixed_points(1.0, 0.0).unwrap();
        let m0 = pts
            .iter()
            .filter(|fp| fp.kind == FixedPointType::Max && fp.m > 0.0)
            .map(|fp| fp.m)
            .next()
            .unwrap();
        let val_at_m0 = m0 * m0 - psi_star(m0);
        assert_abs_diff_eq!(lim.value, val_at_m0, epsilon = 1e-10);
        assert_abs_diff_eq!(lim.m_star.abs(), m0, epsilon = 1e-8);
    }

    #[test]
    fn finite_n_converges_to_limit() {
        let p = CwParams::standard(1.0, 0.0).unwrap();
        let lim = limit_free_energy(&p).value;
        let f = finite_free_energy(4000, &p).unwrap();
        assert!((f - lim).abs() < 0.01, "|{f} − {lim}|");
    }

    #[test]
    fn convergence_is_monotone_along_n() {
        for (t, h) in [(0.2, 0.0), (0.5, 0.1), (1.0, 0.1)] {
            let p = CwParams::standard(t, h).unwrap();
            let lim = limit_free_energy(&p).value;
            let gaps: Vec<f64> = [250u64, 1000, 4000]
                .iter()
                .map(|&n| (finite_free_energy(n, &p).unwrap() - lim).abs())
                .collect();
            assert!(gaps[0] + 1e-3 >= gaps[1], "{gaps:?}");
            assert!(gaps[1] + 1e-3 >= gaps[2], "{gaps:?}");
        }
    }

    #[test]
    fn field_derivative_is_a_magnetization() {
        // ∂_h F_N ∈ [−1, 1] by central difference
        for n in [50u64, 500] {
            for (t, h) in [(0.3, 0.0), (0.8, 0.5), (1.5, -0.7)] {
                let dh = 1e-5;
                let fp = finite_free_energy(n, &CwParams::standard(t, h + dh).unwrap()).unwrap();
                let fm = finite_free_energy(n, &CwParams::standard(t, h - dh).unwrap()).unwrap();
                let deriv = (fp - fm) / (2.0 * dh);
                assert!(deriv.abs() <= 1.0 + 1e-9, "∂_h F = {deriv}");
            }
        }
    }

    #[test]
    fn symmetry_in_h() {
        for (t, h) in [(0.3, 0.4), (0.9, 1.1)] {
            let a = limit_free_energy(&CwParams::standard(t, h).unwrap()).value;
            let b = limit_free_energy(&CwParams::standard(t, -h).unwrap()).value;
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn maximizer_solves_fixed_point_equation() {
        for (t, h) in [(0.2, 0.1), (0.6, 0.01), (1.0, 0.0), (1.3, -0.2)] {
            let lim = limit_free_energy(&CwParams::standard(t, h).unwrap());
            let m = lim.m_star;
            assert!(
                (m - (h + 2.0 * t * m).tanh()).abs() <= 1e-6,
                "t={t}, h={h}: m={m}"
            );
        }
    }

    #[test]
    fn unique_root_below_critical_temperature() {
        let pts = magnetization_fixed_points(0.4, 0.0).unwrap();
        assert_eq!(pts.len(), 1);
        assert_abs_diff_eq!(pts[0].m, 0.0, epsilon = 1e-12);
        assert_eq!(pts[0].kind, FixedPointType::Max);
        assert!(pts[0].residual <= 1e-12);
    }

    #[test]
    fn three_roots_above_critical_temperature() {
        let pts = magnetization_fixed_points(0.6, 0.0).unwrap();
        assert_eq!(pts.len(), 3);
        let maxima: Vec<&FixedPoint> = pts
            .iter()
            .filter(|p| p.kind == FixedPointType::Max)
            .collect();
        assert_eq!(maxima.len(), 2);
        let m0 = maxima.iter().map(|p| p.m.abs()).fold(0.0f64, f64::max);
        // ±m₀ lie outside ±√(1 − 1/2t) = ±√(1/6)
        assert!(m0 > (1.0f64 / 6.0).sqrt());
        for p in &pts {
            assert!(p.residual <= 1e-12);
        }
    }

    #[test]
    fn small_field_selects_positive_maximizer() {
        let lim = limit_free_energy(&CwParams::standard(0.6, 0.01).unwrap());
        assert!(lim.m_star > 0.0);
        let pts = magnetization_fixed_points(0.6, 0.01).unwrap();
        let m_plus = pts
            .iter()
            .filter(|p| p.kind == FixedPointType::Max)
            .map(|p| p.m)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(lim.m_star, m_plus, epsilon = 1e-6);
    }

    #[test]
    fn critical_point_value_is_zero() {
        let lim = limit_free_energy(&CwParams::standard(T_CRITICAL, 0.0).unwrap());
        assert_abs_diff_eq!(lim.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn delta_exponent() {
        let slope = critical_exponents(ExponentProbe::Delta);
        assert!((slope - 4.0 / 3.0).abs() < 0.05, "slope = {slope}");
        let delta = 1.0 / (slope - 1.0);
        assert!((2.85..=3.15).contains(&delta), "δ = {delta}");
    }

    #[test]
    fn beta_exponent() {
        let beta = critical_exponents(ExponentProbe::Beta);
        assert!((beta - 0.5).abs() < 0.05, "β = {beta}");
    }

    #[test]
    fn psi_star_endpoints() {
        assert_abs_diff_eq!(psi_star(1.0), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(psi_star(-1.0), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(psi_star(1.5), f64::INFINITY);
        assert_abs_diff_eq!(psi_star(0.0), 0.0);
    }
}
