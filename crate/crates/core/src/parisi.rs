//! The Parisi PDE, the path-indexed initial condition ψ(q) = −Φ^q(0,0), the
//! Hopf-Lax formula over non-decreasing paths, and the Parisi variational
//! formula for the SK free energy.
//!
//! The PDE −∂_t Φ = ∂²_x Φ + q⁻¹(t)(∂_x Φ)² with terminal condition
//! Φ(q(1),·) = φ(q(1),·) is solved backwards slab by slab. On each interval
//! where q⁻¹ is the constant ζ, the solution factorizes exactly through the
//! heat semigroup: Φ(s,x) = ζ⁻¹ log E exp(ζ Φ(s+Δ, x + B_{2Δ})), so the
//! only numerical work is a Gaussian convolution per slab (Gauss-Hermite in
//! the increment) and there is no time-discretization error at all.
//!
//! The Parisi functional over K-atom distribution functions ζ ∈ 𝒟[0,1] is
//! evaluated through the рescaling Φ_ζ(0,0) = Φ^{β²q}(0,0) + β², where the
//! path q is the right-continuous inverse of ζ; the term β²∫tζ(t)dt is exact
//! on the step function.

use crate::grid::GridFunction;
use crate::path::{DistFn, PiecewisePath};
use crate::prior::Prior;
use crate::quad::{gauss_hermite, QuadRule};
use crate::rng::RngStream;
use crate::util::LogSumExp;
use crate::{Error, Result};
use rayon::prelude::*;

/// φ(t,x) = log ∫ exp(xσ − tσ²) dP₁(σ), the single-spin terminal condition.
/// For the uniform ±1 prior this is log cosh(x) − t.
pub fn single_spin_phi(prior: &Prior, t: f64, x: f64) -> Result<f64> {
    let atoms = prior
        .atoms()
        .ok_or_else(|| Error::invalid("single-spin φ needs an atomic prior"))?;
    let mut lse = LogSumExp::new();
    for &(s, w) in atoms {
        lse.add(w.ln() + x * s - t * s * s);
    }
    Ok(lse.value())
}

/// Solution snapshots of the Parisi PDE: Φ(time, ·) at every slab boundary,
/// ordered from t = 0 up to the terminal time q(1).
#[derive(Debug, Clone)]
pub struct ParisiGrid {
    pub slabs: Vec<(f64, GridFunction)>,
    pub phi00: f64,
}

const PARISI_GRID_NODES: usize = 2049;
const GH_NODES: usize = 64;

fn derivative_bounds_ok(g: &GridFunction) -> Result<()> {
    let h = g.spacing();
    let vals: Vec<f64> = g.values().iter().map(|n| n.finite().unwrap()).collect();
    for w in vals.windows(2) {
        let d = (w[1] - w[0]) / h;
        if d.abs() > 1.0 + 1e-6 {
            return Err(Error::Grid(format!("|∂xΦ| = {} exceeds 1 + 1e-6", d.abs())));
        }
    }
    for w in vals.windows(3) {
        let d2 = (w[0] - 2.0 * w[1] + w[2]) / (h * h);
        if !(-1e-6..=1.0 + 1e-6).contains(&d2) {
            return Err(Error::Grid(format!("∂²xΦ = {d2} outside [−1e-6, 1 + 1e-6]")));
        }
    }
    Ok(())
}

/// Standard normal CDF and density.
fn norm_cdf(z: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(z / std::f64::consts::SQRT_2))
}

fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exact Gaussian convolution of the piecewise-linear interpolant of `phi`,
/// segment by segment through erf closed forms. Used for thin slabs, where
/// the kernel width falls below the grid spacing and quadrature nodes would
/// resolve the interpolation kinks as spurious curvature. The edge segments
/// extend linearly to ±∞, matching the interpolation used elsewhere.
fn slab_step_exact_pl(phi: &GridFunction, spread: f64, zeta: f64) -> GridFunction {
    let n = phi.len();
    let h = phi.spacing();
    let s = spread;
    let window = (12.0 * s / h).ceil() as isize + 2;
    let val = |i: usize| phi.node(i).finite().unwrap();
    let vals: Vec<crate::grid::Node> = (0..n)
        .map(|i| {
            let x = phi.x(i);
            let center = val(i);
            let j_lo = i as isize - window;
            let j_hi = i as isize + window;
            let mut acc = 0.0;
            for j in j_lo..j_hi {
                // segment [y0, y1] with the linear piece a + b·y; segments
                // beyond the grid extend the edge pieces to ±∞
                let jj = j.clamp(0, n as isize - 2) as usize;
                let (y0, y1) = if j < 0 {
                    (f64::NEG_INFINITY, phi.x(0))
                } else if j >= n as isize - 1 {
                    (phi.x(n - 1), f64::INFINITY)
                } else {
                    (phi.x(jj), phi.x(jj + 1))
                };
                if j < 0 && j != j_lo {
                    continue; // the single left-extension segment is enough
                }
                if j >= n as isize - 1 && j != j_hi - 1 {
                    continue;
                }
                let b = (val(jj + 1) - val(jj)) / h;
                let a = val(jj) - b * phi.x(jj);
                let u0 = if y0.is_finite() { (y0 - x) / s } else { f64::NEG_INFINITY };
                let u1 = if y1.is_finite() { (y1 - x) / s } else { f64::INFINITY };
                if zeta == 0.0 {
                    let mass = norm_cdf(u1.min(40.0)) - norm_cdf(u0.max(-40.0));
                    let first = norm_pdf(u0.max(-40.0)) - norm_pdf(u1.min(40.0));
                    acc += (a + b * x - center) * mass + b * s * first;
                } else {
                    let shift = zeta * b * s;
                    let c0 = if u0 == f64::NEG_INFINITY { 0.0 } else { norm_cdf(u0 - shift) };
                    let c1 = if u1 == f64::INFINITY { 1.0 } else { norm_cdf(u1 - shift) };
                    acc += (zeta * (a + b * x - center) + 0.5 * shift * shift).exp() * (c1 - c0);
                }
            }
            let v = if zeta == 0.0 {
                center + acc
            } else {
                center + acc.ln() / zeta
            };
            crate::grid::Node::Finite(v)
        })
        .collect();
    GridFunction::new(phi.lo(), phi.hi(), vals).unwrap()
}

/// One backward slab: Φ_out(x) = ζ⁻¹ log E exp(ζ Φ_in(x + √(2Δ) Z)), with
/// the ζ = 0 slab its pure-heat limit E Φ_in(x + √(2Δ) Z). Wide kernels use
/// Gauss-Hermite in the increment; kernels narrower than a few grid cells
/// switch to the exact piecewise-linear convolution.
fn slab_step(phi: &GridFunction, delta: f64, zeta: f64, gh: &QuadRule) -> GridFunction {
    let spread = (2.0 * delta).sqrt();
    let h = phi.spacing();
    if spread < 8.0 * h {
        return slab_step_exact_pl(phi, spread, zeta);
    }
    let n = phi.len();
    let data: Vec<f64> = phi.values().iter().map(|v| v.finite().unwrap()).collect();
    let slope_lo = (data[1] - data[0]) / h;
    let slope_hi = (data[n - 1] - data[n - 2]) / h;
    // the query offsets are uniform across nodes: precompute per GH node the
    // integer shift and interpolation fraction
    let offsets: Vec<(isize, f64, f64)> = gh
        .nodes
        .iter()
        .map(|&z| {
            let off = spread * z / h;
            (off.floor() as isize, off - off.floor(), spread * z)
        })
        .collect();
    let sample = |i: usize, k: isize, frac: f64, off_x: f64| -> f64 {
        let idx = i as isize + k;
        if idx >= 0 && (idx as usize) + 1 < n {
            let idx = idx as usize;
            (1.0 - frac) * data[idx] + frac * data[idx + 1]
        } else if idx < 0 {
            data[0] + slope_lo * (phi.x(i) + off_x - phi.lo())
        } else {
            data[n - 1] + slope_hi * (phi.x(i) + off_x - phi.hi())
        }
    };
    let vals: Vec<crate::grid::Node> = (0..n)
        .map(|i| {
            let center = data[i];
            let v = if zeta == 0.0 {
                offsets
                    .iter()
                    .zip(&gh.weights)
                    .map(|(&(k, frac, off_x), &w)| w * sample(i, k, frac, off_x))
                    .sum()
            } else {
                // shift by the central value so the exponentials stay tame
                let acc: f64 = offsets
                    .iter()
                    .zip(&gh.weights)
                    .map(|(&(k, frac, off_x), &w)| {
                        w * (zeta * (sample(i, k, frac, off_x) - center)).exp()
                    })
                    .sum();
                center + acc.ln() / zeta
            };
            crate::grid::Node::Finite(v)
        })
        .collect();
    GridFunction::new(phi.lo(), phi.hi(), vals).unwrap()
}

/// Solve the Parisi PDE for the path q, returning every slab boundary and
/// Φ^q(0,0). The spatial grid must reach x_max_query + 4√(2 q(1)); queries
/// beyond that are rejected.
pub fn parisi_pde_solve(
    q: &PiecewisePath,
    prior: &Prior,
    x_max_query: f64,
) -> Result<ParisiGrid> {
    let q = q.canonicalize();
    let gh = gauss_hermite(GH_NODES)?;
    let q1 = q.terminal();
    let half_width = (x_max_query + 4.0 * (2.0 * q1).sqrt()).max(6.0);
    let n = PARISI_GRID_NODES;
    let terminal = GridFunction::sample(-half_width, half_width, n, |x| {
        single_spin_phi(prior, q1, x).unwrap()
    })?;
    // slab boundaries: 0 = start, then the levels q₀ ≤ … ≤ q_K; on
    // [q_{k−1}, q_k) the inverse path is the breakpoint ζ_k, with ζ₀ = 0
    let mut zetas = vec![0.0];
    zetas.extend_from_slice(q.zetas());
    let levels = q.levels();
    let mut slabs: Vec<(f64, GridFunction)> = vec![(q1, terminal)];
    for k in (0..levels.len()).rev() {
        let upper = levels[k];
        let lower = if k == 0 { 0.0 } else { levels[k - 1] };
        let delta = upper - lower;
        let zeta = zetas[k];
        let next = if delta == 0.0 {
            slabs.last().unwrap().1.clone()
        } else {
            slab_step(&slabs.last().unwrap().1, delta, zeta, &gh)
        };
        slabs.push((lower, next));
    }
    slabs.reverse();
    for (_, g) in &slabs {
        derivative_bounds_ok(g)?;
    }
    let phi00 = slabs[0]
        .1
        .interp(0.0, false)
        .ok_or_else(|| Error::Grid("grid does not cover x = 0".into()))?;
    Ok(ParisiGrid { slabs, phi00 })
}

/// ψ(q) = −Φ^q(0,0), the path-indexed initial condition of the
/// Hamilton-Jacobi equation over paths.
pub fn psi_path(q: &PiecewisePath, prior: &Prior) -> Result<f64> {
    Ok(-parisi_pde_solve(q, prior, 0.0)?.phi00)
}

/// Projection onto the monotone non-negative cone (pool adjacent violators).
fn project_monotone(v: &mut [f64]) {
    let n = v.len();
    let mut means: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &x in v.iter() {
        means.push((x, 1));
        while means.len() >= 2 {
            let (m2, c2) = means[means.len() - 1];
            let (m1, c1) = means[means.len() - 2];
            if m1 <= m2 {
                break;
            }
            let merged = (m1 * c1 as f64 + m2 * c2 as f64) / (c1 + c2) as f64;
            means.pop();
            means.pop();
            means.push((merged, c1 + c2));
        }
    }
    let mut i = 0;
    for (m, c) in means {
        for _ in 0..c {
            v[i] = m.max(0.0);
            i += 1;
        }
    }
}

/// Result of the Hopf-Lax maximization over paths.
#[derive(Debug, Clone)]
pub struct PathHopfLax {
    pub value: f64,
    pub q_star: PiecewisePath,
}

/// f(t,q) = sup_{q′} (ψ(q + q′) − (1/4t)∫₀¹ q′(u)² du), the supremum running
/// over non-decreasing step paths q′ with K_var+1 levels on the uniform
/// breakpoints k/(K_var+1). Derivative-free coordinate ascent with 8
/// multistarts and a monotone-cone projection after every step.
pub fn hopf_lax_path(
    t: f64,
    q: &PiecewisePath,
    k_var: usize,
    prior: &Prior,
) -> Result<PathHopfLax> {
    if !(t >= 0.0) {
        return Err(Error::invalid("time must be ≥ 0"));
    }
    let n_levels = k_var + 1;
    let make_path = |levels: &[f64]| -> PiecewisePath {
        let zetas: Vec<f64> = (1..n_levels)
            .map(|k| k as f64 / n_levels as f64)
            .collect();
        PiecewisePath::new(zetas, levels.to_vec()).unwrap()
    };
    if t == 0.0 {
        return Ok(PathHopfLax {
            value: psi_path(q, prior)?,
            q_star: make_path(&vec![0.0; n_levels]),
        });
    }
    // a candidate whose solve trips the derivative-bound assertions is
    // numerically untrusted: score it infeasible and move on
    let objective = |levels: &[f64]| -> f64 {
        let qp = make_path(levels);
        let total = q.add(&qp);
        let penalty = qp.l2_sq() / (4.0 * t);
        match psi_path(&total, prior) {
            Ok(psi) => psi - penalty,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    // ψ is 1-Lipschitz in L¹, so maximizing levels stay below 2t + margin
    let level_cap = 2.0 * t + 1.0;
    let mut starts: Vec<Vec<f64>> = vec![
        vec![0.0; n_levels],
        (0..n_levels)
            .map(|k| level_cap * 0.5 * (k + 1) as f64 / n_levels as f64)
            .collect(),
        vec![(2.0 * t - 0.5).clamp(0.0, level_cap); n_levels],
    ];
    let mut seed_stream = RngStream::new(0x9a17, "hopf-lax-path-starts", 0);
    while starts.len() < 8 {
        let mut s: Vec<f64> = (0..n_levels)
            .map(|_| seed_stream.next_f64() * level_cap)
            .collect();
        project_monotone(&mut s);
        starts.push(s);
    }
    // shared best across multistarts: starts that fall far behind once the
    // step has shrunk are abandoned early
    let global = std::sync::Mutex::new(f64::NEG_INFINITY);
    let results: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|start| {
            let mut levels = start.clone();
            let mut best = objective(&levels);
            let mut step = 0.25 * (1.0 + t);
            while step > 3e-4 {
                let mut improved = false;
                for k in 0..n_levels {
                    for dir in [1.0, -1.0] {
                        let mut cand = levels.clone();
                        cand[k] = (cand[k] + dir * step).clamp(0.0, level_cap);
                        project_monotone(&mut cand);
                        let v = objective(&cand);
                        if v > best + 1e-12 {
                            best = v;
                            levels = cand;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                    let leader = *global.lock().unwrap();
                    if step < 0.05 && best < leader - 0.05 {
                        break;
                    }
                }
            }
            let mut leader = global.lock().unwrap();
            *leader = leader.max(best);
            (best, levels)
        })
        .collect();
    let (value, levels) = results
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    Ok(PathHopfLax {
        value,
        q_star: make_path(&levels).canonicalize(),
    })
}

/// Result of the Parisi minimization.
#[derive(Debug, Clone)]
pub struct ParisiValue {
    pub value: f64,
    pub zeta_star: DistFn,
}

/// Evaluate the Parisi functional Φ_ζ(0,0) − β²∫₀¹ tζ(t)dt + log 2 at a
/// K-atom ζ, through the path rescaling Φ_ζ(0,0) = Φ^{β²q}(0,0) + β².
pub fn parisi_functional(beta: f64, zeta: &DistFn, prior: &Prior) -> Result<f64> {
    let q = zeta.to_path().scale(beta * beta);
    let phi00 = parisi_pde_solve(&q, prior, 0.0)?.phi00;
    Ok(phi00 + beta * beta - beta * beta * zeta.int_t_zeta() + std::f64::consts::LN_2)
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Map unconstrained parameters to a K-atom ζ: locations through cumulative
/// softplus increments squashed into (0,1), jump sizes through a softmax.
fn params_to_zeta(theta: &[f64]) -> DistFn {
    let k = theta.len() / 2;
    let mut locs = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &a in &theta[..k] {
        acc += softplus(a);
        locs.push(acc);
    }
    let total = acc + 1.0;
    for l in locs.iter_mut() {
        *l /= total;
    }
    let mx = theta[k..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = theta[k..].iter().map(|b| (b - mx).exp()).collect();
    let z: f64 = exps.iter().sum();
    let atoms = locs
        .iter()
        .zip(&exps)
        .map(|(&l, &e)| crate::path::Atom {
            location: l,
            jump: e / z,
        })
        .collect();
    DistFn::new(atoms).unwrap()
}

/// Parisi formula: inf over K-atom ζ ∈ 𝒟[0,1] of
/// Φ_ζ(0,0) − β²∫₀¹ tζ(t)dt + log 2. Derivative-free pattern search with 8
/// multistarts over the (softplus locations, softmax jumps) parameterization.
/// β = 0 short-circuits to log 2 exactly.
pub fn parisi_formula(beta: f64, k_atoms: usize, prior: &Prior) -> Result<ParisiValue> {
    if !(beta >= 0.0) {
        return Err(Error::invalid("β must be ≥ 0"));
    }
    if k_atoms == 0 {
        return Err(Error::invalid("need at least one atom"));
    }
    let atoms = prior
        .atoms()
        .ok_or_else(|| Error::invalid("the Parisi formula needs the uniform ±1 prior"))?;
    if atoms.len() != 2 || atoms.iter().any(|&(v, w)| v.abs() != 1.0 || (w - 0.5).abs() > 1e-12) {
        return Err(Error::invalid("the Parisi formula needs the uniform ±1 prior"));
    }
    let rs = DistFn::new(vec![crate::path::Atom {
        location: 0.0,
        jump: 1.0,
    }])
    .unwrap();
    if beta == 0.0 {
        return Ok(ParisiValue {
            value: std::f64::consts::LN_2,
            zeta_star: rs,
        });
    }
    // infeasible (assertion-rejected) candidates score +∞ and are skipped
    let objective = |theta: &[f64]| -> f64 {
        parisi_functional(beta, &params_to_zeta(theta), prior).unwrap_or(f64::INFINITY)
    };
    let k = k_atoms;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    // near-replica-symmetric start: first atom pushed to location ~0 with
    // all the mass
    let mut rs_start = vec![-6.0; 2 * k];
    rs_start[k] = 4.0;
    starts.push(rs_start);
    // evenly spread atoms and jumps
    starts.push(vec![0.0; 2 * k]);
    let mut seed_stream = RngStream::new(0x9a17, "parisi-starts", 0);
    while starts.len() < 8 {
        starts.push((0..2 * k).map(|_| 3.0 * (seed_stream.next_f64() - 0.5)).collect());
    }
    let global = std::sync::Mutex::new(f64::INFINITY);
    let results: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|start| {
            let mut theta = start.clone();
            let mut best = objective(&theta);
            let mut step = 0.8;
            while step > 1e-3 {
                let mut improved = false;
                for i in 0..theta.len() {
                    for dir in [1.0, -1.0] {
                        let mut cand = theta.clone();
                        cand[i] += dir * step;
                        let v = objective(&cand);
                        if v < best - 1e-12 {
                            best = v;
                            theta = cand;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                    let leader = *global.lock().unwrap();
                    if step < 0.05 && best > leader + 0.05 {
                        break;
                    }
                }
            }
            let mut leader = global.lock().unwrap();
            *leader = leader.min(best);
            (best, theta)
        })
        .collect();
    let (mut value, theta) = results
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    let mut zeta_star = params_to_zeta(&theta);
    // the replica-symmetric candidate is a boundary point the soft
    // parameterization can only approach; evaluate it exactly
    let rs_value = parisi_functional(beta, &rs, prior)?;
    if rs_value < value {
        value = rs_value;
        zeta_star = rs;
    }
    Ok(ParisiValue { value, zeta_star })
}

/// Both sides of the Hamilton-Jacobi reformulation of the Parisi formula:
/// −f(β²/2, 0) + log 2 + β²/2 against the direct Parisi infimum, with their
/// absolute gap.
#[derive(Debug, Clone)]
pub struct HjEquivalence {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

pub fn parisi_hj_equivalence(beta: f64, k: usize, prior: &Prior) -> Result<HjEquivalence> {
    let t = beta * beta / 2.0;
    let hl = hopf_lax_path(t, &PiecewisePath::zero(), k, prior)?;
    let lhs = -hl.value + std::f64::consts::LN_2 + t;
    let rhs = parisi_formula(beta, k, prior)?.value;
    Ok(HjEquivalence {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// Random-energy-model quantities at inverse-temperature-squared parameter t:
/// the Poisson-Dirichlet exponent ζ = √(log 2 / t) and the limit free energy
/// log 2 + t below the freezing point t = log 2, 2√(t log 2) above. The
/// closed form is validated against the finite-size enumeration oracle in
/// the test suites before being relied on.
pub fn rem_quantities(t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::invalid("t must be > 0"));
    }
    let ln2 = std::f64::consts::LN_2;
    let zeta = (ln2 / t).sqrt();
    let free_energy = if t <= ln2 { ln2 + t } else { 2.0 * (t * ln2).sqrt() };
    Ok((zeta, free_energy))
}
