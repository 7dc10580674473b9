//! Legendre-Fenchel duality and variational solvers for the one-dimensional
//! Hamilton-Jacobi equation ∂_t f − H(∂_x f) = 0.
//!
//! Two variational representations of the viscosity solution are implemented:
//! the Hopf-Lax formula `f(t,x) = sup_y (ψ(y) − t H*((y−x)/t))`, valid for
//! convex H, and the Hopf formula `f(t,x) = sup_p (p·x + t H(p) − ψ*(p))`,
//! valid for convex ψ. When both are convex the two coincide, which the test
//! suite uses as a mutual oracle. The method of characteristics provides the
//! sampled wavefront for cross-checks and for non-convex diagnostics.
//!
//! All suprema are exhaustive scans over the grid followed by a three-point
//! parabolic refinement around the winner. The refinement is guarded: it only
//! fires when neighbouring second differences agree with the central one, so
//! kinks (|x|, duals hitting the boundary of their effective domain) are left
//! at the exact node value instead of being smeared by a parabola.

use crate::grid::{GridFunction, Node};
use crate::util::golden_max;
use crate::{Error, Result};
use std::sync::Arc;

/// Non-linearity H of the equation: sampled on a grid or closed-form.
#[derive(Clone)]
pub enum Nonlinearity {
    Grid(GridFunction),
    /// H(p) = p²
    Square,
    /// H(p) = −p²
    NegSquare,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Nonlinearity::Grid(g) => write!(f, "Grid([{}, {}])", g.lo(), g.hi()),
            Nonlinearity::Square => write!(f, "Square"),
            Nonlinearity::NegSquare => write!(f, "NegSquare"),
            Nonlinearity::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Nonlinearity {
    /// Evaluate H(p); grid form interpolates (with edge extrapolation).
    pub fn eval(&self, p: f64) -> f64 {
        match self {
            Nonlinearity::Grid(g) => g.interp(p, true).unwrap(),
            Nonlinearity::Square => p * p,
            Nonlinearity::NegSquare => -p * p,
            Nonlinearity::Custom(f) => f(p),
        }
    }

    /// H′(p); analytic where available, otherwise a central difference.
    pub fn deriv(&self, p: f64) -> f64 {
        match self {
            Nonlinearity::Square => 2.0 * p,
            Nonlinearity::NegSquare => -2.0 * p,
            _ => {
                let h = 1e-6 * (1.0 + p.abs());
                (self.eval(p + h) - self.eval(p - h)) / (2.0 * h)
            }
        }
    }

    /// Sample onto a uniform grid.
    pub fn sample(&self, lo: f64, hi: f64, n: usize) -> Result<GridFunction> {
        match self {
            Nonlinearity::Grid(g) => Ok(g.clone()),
            other => GridFunction::sample(lo, hi, n, |p| other.eval(p)),
        }
    }
}

/// An initial-value problem for ∂_t f − H(∂_x f) = 0 with f(0,·) = ψ.
#[derive(Debug, Clone)]
pub struct HjProblem {
    pub psi: GridFunction,
    pub h: Nonlinearity,
    /// Declared convexity of H; verified before the Hopf-Lax solver runs.
    pub h_convex: bool,
    /// Declared convexity of ψ; verified before the Hopf solver runs.
    pub psi_convex: bool,
}

impl HjProblem {
    pub fn new(
        psi: GridFunction,
        h: Nonlinearity,
        h_convex: bool,
        psi_convex: bool,
    ) -> Result<Self> {
        let (a, b) = psi.finite_range();
        if a != 0 || b != psi.len() - 1 {
            return Err(Error::invalid(
                "initial condition must be finite on its whole grid",
            ));
        }
        Ok(HjProblem {
            psi,
            h,
            h_convex,
            psi_convex,
        })
    }
}

const CONVEXITY_TOL: f64 = 1e-9;

/// Three-point parabolic refinement at `win`, guarded against kinks: the
/// vertex is used only when the second differences at the two flanking
/// stencils agree with the central one. `score(i)` returns the node value or
/// None outside the admissible range. Returns (abscissa offset, value).
fn guarded_refine(score: impl Fn(isize) -> Option<f64>, win: isize, h: f64) -> (f64, f64) {
    let s0 = score(win).unwrap();
    let (Some(sm), Some(sp)) = (score(win - 1), score(win + 1)) else {
        return (0.0, s0);
    };
    let d2 = sm - 2.0 * s0 + sp;
    if !(d2 < 0.0) {
        return (0.0, s0);
    }
    let scale = s0.abs().max(1.0);
    let smooth = |d2_side: Option<f64>| -> bool {
        match d2_side {
            Some(d) => (d - d2).abs() <= 0.5 * d2.abs() + 1e-12 * scale,
            None => false,
        }
    };
    let d2_left = score(win - 2).map(|smm| smm - 2.0 * sm + s0);
    let d2_right = score(win + 2).map(|spp| s0 - 2.0 * sp + spp);
    if !(smooth(d2_left) && smooth(d2_right)) {
        return (0.0, s0);
    }
    let off = 0.5 * (sm - sp) / d2;
    let val = s0 - 0.125 * (sm - sp) * (sm - sp) / d2;
    (off.clamp(-1.0, 1.0) * h, val.max(s0))
}

/// Legendre-Fenchel dual f*(λ) = sup_x (λx − f(x)) computed on a uniform dual
/// grid. Dual nodes where the discrete sup runs off the grid boundary while
/// |λ| exceeds the discrete Lipschitz constant of f are flagged +∞ (the dual
/// of an L-Lipschitz function is +∞ outside [−L, L]).
pub fn legendre_dual(
    f: &GridFunction,
    dual_lo: f64,
    dual_hi: f64,
    dual_n: usize,
) -> Result<GridFunction> {
    let (first, last) = f.finite_range();
    if dual_n < 2 || !(dual_lo < dual_hi) {
        return Err(Error::Grid("bad dual grid spec".into()));
    }
    let lip = f.lipschitz();
    let h = f.spacing();
    let dual_h = (dual_hi - dual_lo) / (dual_n - 1) as f64;
    let mut out = Vec::with_capacity(dual_n);
    for j in 0..dual_n {
        let lam = dual_lo + j as f64 * dual_h;
        let mut best = f64::NEG_INFINITY;
        let mut win = first;
        for i in first..=last {
            let v = lam * f.x(i) - f.node(i).finite().unwrap();
            // ties resolve toward the smallest x
            if v > best {
                best = v;
                win = i;
            }
        }
        let at_boundary = win == first || win == last;
        if at_boundary && lam.abs() > lip {
            out.push(Node::PlusInf);
            continue;
        }
        let sc = |i: isize| -> Option<f64> {
            if i < first as isize || i > last as isize {
                return None;
            }
            let i = i as usize;
            Some(lam * f.x(i) - f.node(i).finite().unwrap())
        };
        let (_, val) = guarded_refine(sc, win as isize, h);
        out.push(Node::Finite(val));
    }
    // +∞ nodes must form prefix/suffix; a convex dual always satisfies this,
    // but guard against stray interior flags from exotic inputs.
    match out.iter().position(|n| n.is_finite()) {
        None => Err(Error::invalid("dual is +∞ on the whole requested grid")),
        Some(a) => {
            let b = out.iter().rposition(|n| n.is_finite()).unwrap();
            if out[a..=b].iter().any(|n| !n.is_finite()) {
                return Err(Error::Grid("interior +∞ in dual output".into()));
            }
            GridFunction::new(dual_lo, dual_hi, out)
        }
    }
}

/// Dual extents recommended for f: [−1.5·Lip(f), 1.5·Lip(f)].
pub fn default_dual_range(f: &GridFunction) -> (f64, f64) {
    let l = f.lipschitz().max(1e-6);
    (-1.5 * l, 1.5 * l)
}

/// Exact-scan dual evaluation at a single λ (guarded-refined); used by the
/// polish stage of the Hopf solver where interpolation error would dominate.
fn dual_at(f: &GridFunction, lam: f64) -> f64 {
    let (first, last) = f.finite_range();
    let mut best = f64::NEG_INFINITY;
    let mut win = first;
    for i in first..=last {
        let v = lam * f.x(i) - f.node(i).finite().unwrap();
        if v > best {
            best = v;
            win = i;
        }
    }
    let sc = |i: isize| -> Option<f64> {
        if i < first as isize || i > last as isize {
            return None;
        }
        let i = i as usize;
        Some(lam * f.x(i) - f.node(i).finite().unwrap())
    };
    guarded_refine(sc, win as isize, f.spacing()).1
}

/// Hopf-Lax solver: precomputes H* once, then evaluates
/// f(t,x) = sup_y (ψ(y) − t H*((y−x)/t)).
pub struct HopfLaxSolver {
    psi: GridFunction,
    h_star: GridFunction,
}

impl HopfLaxSolver {
    pub fn new(prob: &HjProblem) -> Result<Self> {
        if !prob.h_convex {
            return Err(Error::invalid("Hopf-Lax requires a convex non-linearity"));
        }
        let lip_psi = prob.psi.lipschitz().max(1e-6);
        let p_max = 1.5 * lip_psi + 1.0;
        let h_grid = prob.h.sample(-p_max, p_max, 8193)?;
        h_grid.check_convex(CONVEXITY_TOL)?;
        let (dlo, dhi) = default_dual_range(&h_grid);
        let h_star = legendre_dual(&h_grid, dlo, dhi, 8193)?;
        Ok(HopfLaxSolver {
            psi: prob.psi.clone(),
            h_star,
        })
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::invalid("time must be ≥ 0"));
        }
        if t < 1e-12 {
            return Ok(self.psi.interp(x, true).unwrap());
        }
        let (first, last) = self.psi.finite_range();
        let score_at = |i: usize| -> Option<f64> {
            let y = self.psi.x(i);
            let hs = self.h_star.interp((y - x) / t, false)?;
            Some(self.psi.node(i).finite().unwrap() - t * hs)
        };
        let mut best = f64::NEG_INFINITY;
        let mut win = None;
        for i in first..=last {
            if let Some(v) = score_at(i) {
                if v > best {
                    best = v;
                    win = Some(i);
                }
            }
        }
        let win = win.ok_or_else(|| {
            Error::Grid("no admissible node in the Hopf-Lax scan; dual grid too narrow".into())
        })?;
        let sc = |i: isize| -> Option<f64> {
            if i < first as isize || i > last as isize {
                return None;
            }
            score_at(i as usize)
        };
        Ok(guarded_refine(sc, win as isize, self.psi.spacing()).1)
    }
}

/// Hopf solver: precomputes ψ* once, then evaluates
/// f(t,x) = sup_p (p·x + t H(p) − ψ*(p)) over |p| ≤ Lip(ψ).
pub struct HopfSolver {
    psi: GridFunction,
    psi_star: GridFunction,
    h: Nonlinearity,
}

impl HopfSolver {
    pub fn new(prob: &HjProblem) -> Result<Self> {
        if !prob.psi_convex {
            return Err(Error::invalid("Hopf requires a convex initial condition"));
        }
        prob.psi.check_convex(CONVEXITY_TOL)?;
        let (dlo, dhi) = default_dual_range(&prob.psi);
        let psi_star = legendre_dual(&prob.psi, dlo, dhi, 6001)?;
        Ok(HopfSolver {
            psi: prob.psi.clone(),
            psi_star,
            h: prob.h.clone(),
        })
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::invalid("time must be ≥ 0"));
        }
        let (first, last) = self.psi_star.finite_range();
        let mut best = f64::NEG_INFINITY;
        let mut win = first;
        for i in first..=last {
            let p = self.psi_star.x(i);
            let v = p * x + t * self.h.eval(p) - self.psi_star.node(i).finite().unwrap();
            if v > best {
                best = v;
                win = i;
            }
        }
        // polish against the exact dual: interpolation error in ψ* is the
        // dominant error term near the edge of its effective domain
        let p_lo = self.psi_star.x(if win > first { win - 1 } else { first });
        let p_hi = self.psi_star.x((win + 1).min(last));
        let exact = |p: f64| p * x + t * self.h.eval(p) - dual_at(&self.psi, p);
        let (_, polished) = golden_max(exact, p_lo, p_hi, 60);
        Ok(polished.max(best))
    }
}

/// Convenience one-shot forms of the two solvers.
pub fn hopf_lax(prob: &HjProblem, t: f64, x: f64) -> Result<f64> {
    HopfLaxSolver::new(prob)?.eval(t, x)
}

pub fn hopf(prob: &HjProblem, t: f64, x: f64) -> Result<f64> {
    HopfSolver::new(prob)?.eval(t, x)
}

/// One point of the sampled wavefront: a characteristic line started at
/// `foot` arrives at `arrival` at time t carrying `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharPoint {
    pub foot: f64,
    pub arrival: f64,
    pub value: f64,
}

/// Method of characteristics: for each interior grid foot y,
/// X(t,y) = y − t H′(ψ′(y)) and the transported value
/// ψ(y) + t (H(ψ′(y)) − H′(ψ′(y))·ψ′(y)). Crossing characteristics are
/// allowed; the caller interprets the multivalued wavefront.
pub fn characteristics(prob: &HjProblem, t: f64) -> Result<Vec<CharPoint>> {
    if t < 0.0 {
        return Err(Error::invalid("time must be ≥ 0"));
    }
    let psi = &prob.psi;
    let h = psi.spacing();
    let (first, last) = psi.finite_range();
    let mut out = Vec::new();
    for i in (first + 1)..last {
        let y = psi.x(i);
        let grad =
            (psi.node(i + 1).finite().unwrap() - psi.node(i - 1).finite().unwrap()) / (2.0 * h);
        let hp = prob.h.eval(grad);
        let dhp = prob.h.deriv(grad);
        out.push(CharPoint {
            foot: y,
            arrival: y - t * dhp,
            value: psi.node(i).finite().unwrap() + t * (hp - dhp * grad),
        });
    }
    Ok(out)
}

/// Values of the (possibly multivalued) wavefront above the point x, obtained
/// by linear interpolation along consecutive foot segments that straddle x.
pub fn wavefront_values_at(points: &[CharPoint], x: f64) -> Vec<f64> {
    let mut vals = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (lo, hi) = if a.arrival <= b.arrival { (a, b) } else { (b, a) };
        if lo.arrival <= x && x <= hi.arrival {
            let span = hi.arrival - lo.arrival;
            let v = if span < 1e-14 {
                0.5 * (lo.value + hi.value)
            } else {
                lo.value + (x - lo.arrival) / span * (hi.value - lo.value)
            };
            vals.push(v);
        }
    }
    vals
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quadratic_problem() -> HjProblem {
        let psi = GridFunction::sample(-10.0, 10.0, 4001, |x| 0.5 * x * x).unwrap();
        HjProblem::new(psi, Nonlinearity::Square, true, true).unwrap()
    }

    #[test]
    fn dual_of_half_square_is_itself() {
        // f(x) = x²/2 is self-dual
        let f = GridFunction::sample(-10.0, 10.0, 4001, |x| 0.5 * x * x).unwrap();
        let dual = legendre_dual(&f, -3.0, 3.0, 601).unwrap();
        for (lam, v) in dual.finite_nodes() {
            assert_abs_diff_eq!(v, 0.5 * lam * lam, epsilon = 2e-5);
        }
    }

    #[test]
    fn dual_of_abs_is_indicator() {
        let f = GridFunction::sample(-10.0, 10.0, 2001, |x| x.abs()).unwrap();
        let dual = legendre_dual(&f, -1.5, 1.5, 6001).unwrap();
        for (i, node) in dual.values().iter().enumerate() {
            let lam = dual.x(i);
            match node {
                Node::Finite(v) => {
                    assert!(lam.abs() <= 1.0 + 1e-9, "finite at λ = {lam}");
                    assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
                }
                Node::PlusInf => assert!(lam.abs() > 1.0 - 1e-9, "+∞ at λ = {lam}"),
            }
        }
    }

    #[test]
    fn dual_of_log_cosh_is_binary_entropy() {
        let f = GridFunction::sample(-14.0, 14.0, 16001, |x| x.cosh().ln()).unwrap();
        let dual = legendre_dual(&f, -0.95, 0.95, 1901).unwrap();
        for (m, v) in dual.finite_nodes() {
            let truth = if m.abs() < 1e-15 {
                0.0
            } else {
                0.5 * (1.0 + m) * (1.0 + m).ln() + 0.5 * (1.0 - m) * (1.0 - m).ln()
            };
            assert_abs_diff_eq!(v, truth, epsilon = 1e-4);
        }
    }

    #[test]
    fn dual_rejects_all_infinite_input() {
        let f = GridFunction::sample(-1.0, 1.0, 11, |x| x * x).unwrap();
        // dual grid entirely outside the Lipschitz ball → all +∞
        assert!(legendre_dual(&f, 50.0, 60.0, 11).is_err());
    }

    #[test]
    fn fenchel_moreau_involution() {
        let g = GridFunction::sample(-5.0, 5.0, 2001, |x| (1.0 + x * x).sqrt()).unwrap();
        let (dlo, dhi) = default_dual_range(&g);
        let dual = legendre_dual(&g, dlo, dhi, 4001).unwrap();
        let bidual = legendre_dual(&dual, -5.0, 5.0, 2001).unwrap();
        let tol = 2.0 * g.spacing() * (1.0 + g.lipschitz());
        for (x, v) in bidual.finite_nodes() {
            if x.abs() < 4.0 {
                let orig = g.interp(x, false).unwrap();
                assert!((v - orig).abs() <= tol, "x={x}: {v} vs {orig}");
            }
        }
    }

    #[test]
    fn hopf_lax_at_time_zero_returns_psi() {
        let prob = quadratic_problem();
        let solver = HopfLaxSolver::new(&prob).unwrap();
        for x in [-2.0, 0.0, 1.3] {
            assert_abs_diff_eq!(solver.eval(0.0, x).unwrap(), 0.5 * x * x, epsilon = 1e-12);
        }
    }

    #[test]
    fn hopf_lax_quadratic_explicit_solution() {
        // ψ = C h², H = p² → f(t,h) = C h²/(1−4Ct)
        let c = 0.1;
        let psi = GridFunction::sample(-10.0, 10.0, 8001, |x| c * x * x).unwrap();
        let prob = HjProblem::new(psi, Nonlinearity::Square, true, true).unwrap();
        let solver = HopfLaxSolver::new(&prob).unwrap();
        let got = solver.eval(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(got, 1.0 / 6.0, epsilon = 1e-3);
    }

    #[test]
    fn hopf_reproduces_flat_initial_condition_example() {
        // H = −p², ψ = |h|: f(t,h) = h²/4t for |h| ≤ 2t, |h| − t beyond
        let psi = GridFunction::sample(-10.0, 10.0, 2001, |x| x.abs()).unwrap();
        let prob = HjProblem::new(psi, Nonlinearity::NegSquare, false, true).unwrap();
        let solver = HopfSolver::new(&prob).unwrap();
        assert_abs_diff_eq!(solver.eval(1.0, 1.0).unwrap(), 0.25, epsilon = 1e-6);
        assert_abs_diff_eq!(solver.eval(1.0, 3.0).unwrap(), 2.0, epsilon = 1e-6);
    }

    #[test]
    fn hopf_rejects_nonconvex_psi() {
        let psi = GridFunction::sample(-5.0, 5.0, 501, |x| -x * x).unwrap();
        let prob = HjProblem::new(psi, Nonlinearity::Square, true, true).unwrap();
        assert!(HopfSolver::new(&prob).is_err());
    }

    #[test]
    fn hopf_lax_rejects_nonconvex_h() {
        let psi = GridFunction::sample(-5.0, 5.0, 501, |x| x * x).unwrap();
        let prob = HjProblem::new(psi, Nonlinearity::NegSquare, true, true).unwrap();
        let err = HopfLaxSolver::new(&prob);
        assert!(matches!(err, Err(Error::NotConvex { .. })));
    }

    #[test]
    fn hopf_lax_agrees_with_hopf_for_log_cosh() {
        // cross-oracle at a single point; the full sweep lives in the
        // acceptance suite
        let psi = GridFunction::sample(-14.0, 14.0, 16385, |x| x.cosh().ln()).unwrap();
        let prob = HjProblem::new(psi, Nonlinearity::Square, true, true).unwrap();
        let hl = HopfLaxSolver::new(&prob).unwrap();
        let ho = HopfSolver::new(&prob).unwrap();
        let a = hl.eval(0.4, 0.3).unwrap();
        let b = ho.eval(0.4, 0.3).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-4);
    }

    #[test]
    fn characteristics_of_linear_initial_condition() {
        let p0 = 0.7;
        let psi = GridFunction::sample(-5.0, 5.0, 1001, |x| p0 * x).unwrap();
        let prob = HjProblem::new(psi, Nonlinearity::Square, true, true).unwrap();
        let pts = characteristics(&prob, 2.0).unwrap();
        for pt in &pts {
            assert_abs_diff_eq!(pt.arrival, pt.foot - 2.0 * 2.0 * p0, epsilon = 1e-9);
            // value transported along the line: ψ(y) + t(H(p₀) − H′(p₀)p₀)
            let expected = p0 * pt.foot + 2.0 * (p0 * p0 - 2.0 * p0 * p0);
            assert_abs_diff_eq!(pt.value, expected, epsilon = 1e-9);
            // equivalently f(t, x) = ψ(x) + tH(p₀) along the affine solution
            assert_abs_diff_eq!(pt.value, p0 * pt.arrival + 2.0 * p0 * p0, epsilon = 1e-9);
        }
    }

    #[test]
    fn wavefront_matches_hopf_lax_short_time() {
        let psi = GridFunction::sample(-14.0, 14.0, 8193, |x| x.cosh().ln()).unwrap();
        let prob = HjProblem::new(psi, Nonlinearity::Square, true, true).unwrap();
        let t = 0.05;
        let pts = characteristics(&prob, t).unwrap();
        let solver = HopfLaxSolver::new(&prob).unwrap();
        let tol = 2.0 * prob.psi.spacing() * prob.psi.lipschitz().max(1.0);
        for x in [-1.0, -0.25, 0.0, 0.6, 2.0] {
            let vals = wavefront_values_at(&pts, x);
            assert!(!vals.is_empty());
            let f = solver.eval(t, x).unwrap();
            let best = vals
                .iter()
                .map(|v| (v - f).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(best <= tol, "x = {x}: gap {best} > {tol}");
        }
    }

    #[test]
    fn wavefront_contains_solution_long_time() {
        // crossing characteristics: the viscosity solution still lies on the
        // wavefront at every queried x
        let psi = GridFunction::sample(-30.0, 30.0, 16001, |x| x.cosh().ln()).unwrap();
        let prob = HjProblem::new(psi, Nonlinearity::Square, true, true).unwrap();
        let t = 5.0;
        let pts = characteristics(&prob, t).unwrap();
        let solver = HopfLaxSolver::new(&prob).unwrap();
        for x in [-3.0, -1.0, 0.5, 2.5] {
            let vals = wavefront_values_at(&pts, x);
            assert!(!vals.is_empty());
            let f = solver.eval(t, x).unwrap();
            let best = vals
                .iter()
                .map(|v| (v - f).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 2e-2, "x = {x}: gap {best}");
        }
    }

    #[test]
    fn order_preservation_is_exact() {
        // ψ₁ ≤ ψ₂ pointwise ⇒ hopf_lax(ψ₁) ≤ hopf_lax(ψ₂) — monotone sup
        let psi1 = GridFunction::sample(-8.0, 8.0, 2001, |x| x.cosh().ln()).unwrap();
        let psi2 = GridFunction::sample(-8.0, 8.0, 2001, |x| x.cosh().ln() + 0.1).unwrap();
        let p1 = HjProblem::new(psi1, Nonlinearity::Square, true, true).unwrap();
        let p2 = HjProblem::new(psi2, Nonlinearity::Square, true, true).unwrap();
        let s1 = HopfLaxSolver::new(&p1).unwrap();
        let s2 = HopfLaxSolver::new(&p2).unwrap();
        for t in [0.0, 0.3, 1.0] {
            for x in [-2.0, 0.0, 1.5] {
                assert!(s1.eval(t, x).unwrap() <= s2.eval(t, x).unwrap() + 1e-13);
            }
        }
    }

    #[test]
    fn lipschitz_preserved_in_space() {
        let psi = GridFunction::sample(-14.0, 14.0, 4001, |x| x.cosh().ln()).unwrap();
        let lip_psi = psi.lipschitz();
        let prob = HjProblem::new(psi, Nonlinearity::Square, true, true).unwrap();
        let solver = HopfLaxSolver::new(&prob).unwrap();
        let t = 0.7;
        let xs: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| solver.eval(t, x).unwrap()).collect();
        let mut lip: f64 = 0.0;
        for w in vals.windows(2) {
            lip = lip.max((w[1] - w[0]).abs() / 0.1);
        }
        assert!(lip <= lip_psi + 1e-3, "{lip} vs {lip_psi}");
    }

    #[test]
    fn semigroup_property() {
        let psi = GridFunction::sample(-14.0, 14.0, 8001, |x| x.cosh().ln()).unwrap();
        let prob = HjProblem::new(psi.clone(), Nonlinearity::Square, true, true).unwrap();
        let solver = HopfLaxSolver::new(&prob).unwrap();
        let (t, s) = (0.5, 0.3);
        // f(t, ·) sampled as a new initial condition
        let mid = GridFunction::sample(-10.0, 10.0, 4001, |x| solver.eval(t, x).unwrap()).unwrap();
        let prob2 = HjProblem::new(mid, Nonlinearity::Square, true, true).unwrap();
        let solver2 = HopfLaxSolver::new(&prob2).unwrap();
        let tol = 3.0 * psi.spacing() * (1.0 + psi.lipschitz()) + 1e-4;
        for x in [-1.5, 0.0, 0.8] {
            let direct = solver.eval(t + s, x).unwrap();
            let chained = solver2.eval(s, x).unwrap();
            assert!((direct - chained).abs() <= tol, "{direct} vs {chained}");
        }
    }
}
