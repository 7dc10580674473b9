//! Symmetric rank-one matrix estimation: the single-spin initial condition
//! ψ(h) = E log ∫ exp(√(2h)·x·z + 2h·x·x̄ − h·x²) dP₁(x), the limit free
//! energy f(t,h) = sup_{h′≥0} (ψ(h+h′) − h′²/4t), and the quantities derived
//! from its maximizer: MMSE, mutual information, critical signal-to-noise
//! ratio, the PCA error curve, and the stochastic-block-model reduction.

use crate::prior::Prior;
use crate::quad::{gauss_hermite, QuadRule};
use crate::util::{golden_max, LogSumExp};
use crate::{Error, Result};

/// A rank-one estimation problem: the prior of the signal entries plus the
/// Gauss-Hermite resolution used for every Gaussian average.
#[derive(Debug, Clone)]
pub struct InferenceProblem {
    prior: Prior,
    quad: QuadRule,
}

impl InferenceProblem {
    pub fn new(prior: Prior, quad_nodes: usize) -> Result<Self> {
        Ok(InferenceProblem {
            prior,
            quad: gauss_hermite(quad_nodes)?,
        })
    }

    /// Default 64-node quadrature: the integrands are entire with Gaussian
    /// decay, so this is spectrally accurate at the tolerances used here.
    pub fn with_default_quad(prior: Prior) -> Self {
        InferenceProblem::new(prior, 64).unwrap()
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    /// ψ(h) = E log ∫ exp(√(2h)·x·z₁ + 2h·x·x̄₁ − h·x²) dP₁(x), h ≥ 0.
    ///
    /// Atomic priors: the inner integral is an exact atomic sum and the outer
    /// average runs over the atoms of x̄₁ and Gauss-Hermite in z₁. Gaussian
    /// prior: the inner integral has the closed form exp(a²/2b)/√b with
    /// a = √(2h)z₁ + 2h·x̄₁ and b = 1 + 2h, leaving a quadratic integrand
    /// that the outer quadrature integrates exactly.
    pub fn psi(&self, h: f64) -> Result<f64> {
        if !(h >= 0.0) {
            return Err(Error::invalid("psi requires h ≥ 0"));
        }
        if h == 0.0 {
            return Ok(0.0);
        }
        let s2h = (2.0 * h).sqrt();
        match &self.prior {
            Prior::Gaussian => {
                let b = 1.0 + 2.0 * h;
                // E over x̄ and z of a²/2b − ½ log b
                let mut acc = 0.0;
                for (&zb, &wb) in self.quad.nodes.iter().zip(&self.quad.weights) {
                    for (&z, &w) in self.quad.nodes.iter().zip(&self.quad.weights) {
                        let a = s2h * z + 2.0 * h * zb;
                        acc += wb * w * (a * a / (2.0 * b));
                    }
                }
                Ok(acc - 0.5 * b.ln())
            }
            Prior::Atomic { atoms, .. } => {
                let mut acc = 0.0;
                for &(xbar, wbar) in atoms {
                    for (&z, &w) in self.quad.nodes.iter().zip(&self.quad.weights) {
                        let mut lse = LogSumExp::new();
                        for &(x, wx) in atoms {
                            lse.add(wx.ln() + s2h * x * z + 2.0 * h * x * xbar - h * x * x);
                        }
                        acc += wbar * w * lse.value();
                    }
                }
                Ok(acc)
            }
        }
    }
}

/// Value and smallest maximizer of sup_{h′≥0} (ψ(h+h′) − h′²/4t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfLimit {
    pub value: f64,
    pub h_star: f64,
}

const H_GRID_NODES: usize = 10_000;

/// Limit free energy f(t,h) = sup_{h′≥0}(ψ(h+h′) − h′²/4t); at t = 0 the
/// quadratic penalty forces h′ = 0 and the value is ψ(h).
///
/// The scan runs over h′ ∈ [0, 4t·Lip(ψ) + 1]: any maximizer satisfies
/// h′ = 2t·∂ψ ≤ 2t·Lip(ψ) since ψ is Lipschitz with constant ≤ E x̄₁².
/// Ties break toward smaller h′ so that h_star = 0 is exact in the
/// sub-critical phase; a golden polish around the winning node pushes the
/// maximizer to the 1e-6 regime the MMSE tolerances need.
pub fn limit_free_energy_inf(prob: &InferenceProblem, t: f64, h: f64) -> Result<InfLimit> {
    if !(t >= 0.0) || !(h >= 0.0) {
        return Err(Error::invalid("t and h must be ≥ 0"));
    }
    let psi_h = prob.psi(h)?;
    if t == 0.0 {
        return Ok(InfLimit {
            value: psi_h,
            h_star: 0.0,
        });
    }
    let lip = prob.prior().second_moment();
    let h_max = 4.0 * t * lip + 1.0;
    let step = h_max / (H_GRID_NODES - 1) as f64;
    let score = |hp: f64| -> f64 { prob.psi(h + hp).unwrap() - hp * hp / (4.0 * t) };
    let mut best = psi_h; // h′ = 0 term
    let mut win = 0usize;
    for i in 1..H_GRID_NODES {
        let hp = i as f64 * step;
        let v = score(hp);
        if v > best {
            best = v;
            win = i;
        }
    }
    if win == 0 {
        // decreasing away from 0: smallest maximizer is exactly 0
        if score(step * 0.5) <= psi_h {
            return Ok(InfLimit {
                value: psi_h,
                h_star: 0.0,
            });
        }
        let (hp, v) = golden_max(score, 0.0, step, 60);
        return Ok(if v > psi_h {
            InfLimit {
                value: v,
                h_star: hp,
            }
        } else {
            InfLimit {
                value: psi_h,
                h_star: 0.0,
            }
        });
    }
    let lo = (win as f64 - 1.0) * step;
    let hi = ((win + 1).min(H_GRID_NODES - 1)) as f64 * step;
    let (hp, v) = golden_max(score, lo, hi, 80);
    Ok(if v >= best {
        InfLimit {
            value: v,
            h_star: hp,
        }
    } else {
        InfLimit {
            value: best,
            h_star: win as f64 * step,
        }
    })
}

/// Limit minimal mean-square error mmse(t) = (E x̄₁²)² − h*²(t)/4t², t > 0.
pub fn mmse(prob: &InferenceProblem, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("mmse requires t > 0"));
    }
    let lim = limit_free_energy_inf(prob, t, 0.0)?;
    let m2 = prob.prior().second_moment();
    Ok(m2 * m2 - lim.h_star * lim.h_star / (4.0 * t * t))
}

/// Limit mutual information I(t) = t (E x̄₁²)² − sup_{h≥0}(ψ(h) − h²/4t).
pub fn mutual_information(prob: &InferenceProblem, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t must be ≥ 0"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let lim = limit_free_energy_inf(prob, t, 0.0)?;
    let m2 = prob.prior().second_moment();
    Ok(t * m2 * m2 - lim.value)
}

/// Asymptotic mean-square error of the PCA estimator for a normalized prior
/// (E x̄₁ = 0, E x̄₁² = 1): 1 below t = ¼, (1/4t)(2 − 1/4t) above.
pub fn pca_mse(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t must be ≥ 0"));
    }
    Ok(if t <= 0.25 {
        1.0
    } else {
        (2.0 - 1.0 / (4.0 * t)) / (4.0 * t)
    })
}

const SNR_PREDICATE_THRESHOLD: f64 = 1e-9;

/// Critical signal-to-noise ratio: the largest t at which the limit free
/// energy at h = 0 is still zero, located by bisection of the predicate
/// f(t) > 1e-9 over [1e-3, 1e3] to 1e-4 absolute.
pub fn critical_snr(prob: &InferenceProblem) -> Result<f64> {
    let (mut lo, mut hi) = (1e-3f64, 1e3f64);
    let positive =
        |t: f64| -> Result<bool> { Ok(limit_free_energy_inf(prob, t, 0.0)?.value > SNR_PREDICATE_THRESHOLD) };
    if positive(lo)? {
        return Err(Error::NoTransition { lo, hi });
    }
    if !positive(hi)? {
        return Err(Error::NoTransition { lo, hi });
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Dense stochastic-block-model parameters: label bias p and the limiting
/// effective signal-to-noise ratio λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmParams {
    pub p: f64,
    pub lambda: f64,
}

impl SbmParams {
    pub fn new(p: f64, lambda: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("SBM needs p in (0, 1)"));
        }
        if !(lambda >= 0.0) {
            return Err(Error::invalid("SBM needs λ ≥ 0"));
        }
        Ok(SbmParams { p, lambda })
    }
}

/// Limit mutual information of the dense two-community block model:
/// λ/4 − sup_{h≥0}(ψ(h) − h²/λ), with ψ built from the ±1 prior with
/// P{+1} = p. The penalty h²/λ equals h²/4t at t = λ/4, so the optimization
/// is the rank-one one at that signal-to-noise ratio.
pub fn sbm_mutual_information(sbm: SbmParams) -> Result<f64> {
    if sbm.lambda == 0.0 {
        return Ok(0.0);
    }
    let prob = InferenceProblem::with_default_quad(Prior::bernoulli_pm1(sbm.p)?);
    let lim = limit_free_energy_inf(&prob, sbm.lambda / 4.0, 0.0)?;
    Ok(sbm.lambda / 4.0 - lim.value)
}
