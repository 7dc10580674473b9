//! Finite-size simulators that are exact in the spin configuration and Monte
//! Carlo in the disorder: SK (Gray-code enumeration over {±1}^N), the random
//! energy model (2^N i.i.d. Gaussian levels), and symmetric rank-one matrix
//! estimation (exact sum over the prior support); plus the identity test
//! batteries (Gaussian integration by parts, Nishimori, overlap variance).
//!
//! Exact enumeration removes all Gibbs-sampling bias at these sizes, so any
//! discrepancy against a limit formula decomposes into disorder-MC noise
//! plus a finite-size effect. Disorder draws are antithetic (±G pairs) for
//! the SK and rank-one Hamiltonians; each pair average counts as one sample
//! in the reported standard error.

use crate::prior::Prior;
use crate::rng::{RngStream, StreamKey};
use crate::util::{mean_stderr, LogSumExp};
use crate::{Error, Result};
use rayon::prelude::*;

/// A reproducible Monte Carlo report: the estimate, its standard error, the
/// sample count, and the stream key that regenerates it bit-for-bit.
#[derive(Debug, Clone)]
pub struct McReport {
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: StreamKey,
}

fn report(samples: &[f64], stream: &RngStream) -> McReport {
    let (estimate, stderr) = mean_stderr(samples);
    McReport {
        estimate,
        stderr,
        n_samples: samples.len(),
        seed: stream.key().clone(),
    }
}

const SK_MAX_N: usize = 16;
const REM_MAX_N: usize = 22;
const RANKONE_MAX_CONFIGS: u128 = 1 << 20;

/// Energies σ·Gσ/√N for all 2^N sign configurations by Gray-code updates:
/// one spin flip per step, O(N) amortized work each.
fn sk_energies(g: &[f64], n: usize, out: &mut Vec<f64>) {
    let nf = (n as f64).sqrt();
    // A = G + Gᵀ, S(σ) = ½ σᵀAσ; flipping spin k: S −= 2σ_k t_k − 2A_kk
    // with t = Aσ, then t_j −= 2σ_k A_jk.
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = g[i * n + j] + g[j * n + i];
        }
    }
    let mut sigma = vec![1.0f64; n];
    let mut t: Vec<f64> = (0..n).map(|j| a[j * n..j * n + n].iter().sum()).collect();
    let mut s: f64 = 0.5 * t.iter().sum::<f64>();
    out.clear();
    out.push(s / nf);
    let total = 1usize << n;
    for step in 1..total {
        let k = step.trailing_zeros() as usize; // Gray code flip position
        s += -2.0 * sigma[k] * t[k] + 2.0 * a[k * n + k];
        let sk = sigma[k];
        for j in 0..n {
            t[j] -= 2.0 * sk * a[j * n + k];
        }
        sigma[k] = -sk;
        out.push(s / nf);
    }
}

/// Naive O(4^N·N²) energy enumeration in the same (Gray-code visit) order;
/// internal oracle for the incremental scheme.
#[cfg(test)]
fn sk_energies_naive(g: &[f64], n: usize) -> Vec<f64> {
    let nf = (n as f64).sqrt();
    let mut sigma = vec![1.0f64; n];
    let total = 1usize << n;
    let mut out = Vec::with_capacity(total);
    let energy = |sig: &[f64]| {
        let mut e = 0.0;
        for i in 0..n {
            for j in 0..n {
                e += g[i * n + j] * sig[i] * sig[j];
            }
        }
        e / nf
    };
    out.push(energy(&sigma));
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        sigma[k] = -sigma[k];
        out.push(energy(&sigma));
    }
    out
}

/// SK free energy F̄_N(β) = (1/N) E log Σ_σ exp(β σ·Gσ/√N), exact in σ per
/// disorder draw, antithetic ±G pairs across draws.
pub fn sk_free_energy(
    n: usize,
    beta: f64,
    n_disorder: usize,
    stream: &RngStream,
) -> Result<McReport> {
    if n == 0 || n > SK_MAX_N {
        return Err(Error::EnumerationTooLarge {
            configs: 1u128 << n.min(127),
            limit: 1 << SK_MAX_N,
        });
    }
    if n_disorder < 4 {
        return Err(Error::invalid("need at least 4 disorder samples"));
    }
    let pairs = n_disorder / 2;
    let samples: Vec<f64> = (0..pairs as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = stream.with_index(r);
            let g = s.draw_gaussian(n * n);
            let mut energies = Vec::new();
            sk_energies(&g, n, &mut energies);
            let value = |sign: f64| {
                let mut lse = LogSumExp::new();
                for &e in &energies {
                    lse.add(beta * sign * e);
                }
                lse.value() / n as f64
            };
            0.5 * (value(1.0) + value(-1.0))
        })
        .collect();
    Ok(report(&samples, stream))
}

/// Normalized SK free energy F̄°_N(t) = −(1/N) E log 2^{−N} Σ_σ
/// exp(√(2t)·σ·Gσ/√N − Nt); non-negative by Jensen since the annealed
/// average of each summand is exactly one.
pub fn sk_normalized_free_energy(
    n: usize,
    t: f64,
    n_disorder: usize,
    stream: &RngStream,
) -> Result<McReport> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t must be ≥ 0"));
    }
    let beta = (2.0 * t).sqrt();
    let base = sk_free_energy(n, beta, n_disorder, stream)?;
    Ok(McReport {
        estimate: std::f64::consts::LN_2 + t - base.estimate,
        stderr: base.stderr,
        n_samples: base.n_samples,
        seed: base.seed,
    })
}

/// Random-energy-model report: free energy plus the Poisson count statistic.
#[derive(Debug, Clone)]
pub struct RemReport {
    pub free_energy: McReport,
    /// Per-draw count of rescaled extreme levels ζH − a_N² falling in
    /// [0, ∞); the limit law makes its mean ∫₀^∞ e^{−x} dx = 1.
    pub extreme_count_mean: f64,
    pub extreme_count_stderr: f64,
}

/// REM free energy (1/N) E log Σ_σ exp(√(2tN)·E_σ) over 2^N independent
/// standard Gaussian levels, with the extreme-value count statistic of the
/// rescaled point process.
pub fn rem_free_energy(
    n: usize,
    t: f64,
    n_disorder: usize,
    stream: &RngStream,
) -> Result<RemReport> {
    if n == 0 || n > REM_MAX_N {
        return Err(Error::EnumerationTooLarge {
            configs: 1u128 << n.min(127),
            limit: 1 << REM_MAX_N,
        });
    }
    if !(t > 0.0) {
        return Err(Error::invalid("t must be > 0"));
    }
    if n_disorder < 2 {
        return Err(Error::invalid("need at least 2 disorder samples"));
    }
    let nf = n as f64;
    let scale = (2.0 * t * nf).sqrt();
    let ln2 = std::f64::consts::LN_2;
    let a_sq = 2.0 * nf * ln2 - nf.ln() - ln2.ln() - (4.0 * std::f64::consts::PI).ln();
    let zeta = (ln2 / t).sqrt();
    let per: Vec<(f64, f64)> = (0..n_disorder as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = stream.with_index(r);
            let mut lse = LogSumExp::new();
            let mut count = 0usize;
            for _ in 0..(1usize << n) {
                let e = s.next_gaussian();
                let h = scale * e;
                lse.add(h);
                if zeta * h - a_sq >= 0.0 {
                    count += 1;
                }
            }
            (lse.value() / nf, count as f64)
        })
        .collect();
    let f_samples: Vec<f64> = per.iter().map(|p| p.0).collect();
    let c_samples: Vec<f64> = per.iter().map(|p| p.1).collect();
    let (cm, cs) = mean_stderr(&c_samples);
    Ok(RemReport {
        free_energy: report(&f_samples, stream),
        extreme_count_mean: cm,
        extreme_count_stderr: cs,
    })
}

/// Iterate all |support|^N configurations as index tuples.
struct MixedRadix {
    digits: Vec<usize>,
    base: usize,
    done: bool,
}

impl MixedRadix {
    fn new(n: usize, base: usize) -> Self {
        MixedRadix {
            digits: vec![0; n],
            base,
            done: false,
        }
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.digits.clone();
        let mut i = 0;
        loop {
            if i == self.digits.len() {
                self.done = true;
                break;
            }
            self.digits[i] += 1;
            if self.digits[i] < self.base {
                break;
            }
            self.digits[i] = 0;
            i += 1;
        }
        Some(out)
    }
}

/// The rank-one estimation Hamiltonian
/// H(x) = √(2t/N)·xᵀWx + (2t/N)(x·x̄)² − (t/N)|x|⁴ + 2h·x·x̄ + √(2h)·z·x − h|x|²
/// summed exactly over the prior support per disorder draw (x̄, W, z); ±W
/// antithetic pairs.
pub fn rankone_free_energy(
    n: usize,
    t: f64,
    h: f64,
    prior: &Prior,
    n_disorder: usize,
    stream: &RngStream,
) -> Result<McReport> {
    let atoms = prior
        .atoms()
        .ok_or_else(|| Error::invalid("finite-size enumeration needs an atomic prior"))?
        .to_vec();
    let configs = (atoms.len() as u128).pow(n as u32);
    if n == 0 || configs > RANKONE_MAX_CONFIGS {
        return Err(Error::EnumerationTooLarge {
            configs,
            limit: RANKONE_MAX_CONFIGS,
        });
    }
    if !(t >= 0.0) || !(h >= 0.0) {
        return Err(Error::invalid("t and h must be ≥ 0"));
    }
    if n_disorder < 4 {
        return Err(Error::invalid("need at least 4 disorder samples"));
    }
    let pairs = n_disorder / 2;
    let nf = n as f64;
    let samples: Vec<f64> = (0..pairs as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = stream.with_index(r);
            let xbar: Vec<f64> = (0..n).map(|_| sample_atom(&atoms, &mut s)).collect();
            let w = s.draw_gaussian(n * n);
            let z = s.draw_gaussian(n);
            let value = |w_sign: f64| {
                let mut lse = LogSumExp::new();
                for idx in MixedRadix::new(n, atoms.len()) {
                    let mut log_weight = 0.0;
                    let mut xw_x = 0.0;
                    let mut x_xbar = 0.0;
                    let mut x_sq = 0.0;
                    let mut z_x = 0.0;
                    let xs: Vec<f64> = idx.iter().map(|&a| atoms[a].0).collect();
                    for i in 0..n {
                        log_weight += atoms[idx[i]].1.ln();
                        x_xbar += xs[i] * xbar[i];
                        x_sq += xs[i] * xs[i];
                        z_x += z[i] * xs[i];
                        for j in 0..n {
                            xw_x += w[i * n + j] * xs[i] * xs[j];
                        }
                    }
                    let ham = (2.0 * t / nf).sqrt() * w_sign * xw_x
                        + 2.0 * t / nf * x_xbar * x_xbar
                        - t / nf * x_sq * x_sq
                        + 2.0 * h * x_xbar
                        + (2.0 * h).sqrt() * z_x
                        - h * x_sq;
                    lse.add(log_weight + ham);
                }
                lse.value() / nf
            };
            0.5 * (value(1.0) + value(-1.0))
        })
        .collect();
    Ok(report(&samples, stream))
}

fn sample_atom(atoms: &[(f64, f64)], stream: &mut RngStream) -> f64 {
    let u = stream.next_f64();
    let mut acc = 0.0;
    for &(v, w) in atoms {
        acc += w;
        if u <= acc {
            return v;
        }
    }
    atoms.last().unwrap().0
}

/// Nishimori identity check: per disorder draw the Gibbs averages ⟨x·x̄⟩ and
/// ⟨x·x′⟩ (and their squares) exactly, then Monte Carlo over the disorder.
/// The paired difference is the reported statistic.
#[derive(Debug, Clone)]
pub struct NishimoriReport {
    pub overlap_truth: McReport,
    pub overlap_replica: McReport,
    /// per-draw ⟨x·x̄⟩ − ⟨x·x′⟩; zero in expectation by the identity
    pub diff: McReport,
    /// per-draw ⟨(x·x̄)²⟩ − ⟨(x·x′)²⟩; also zero in expectation
    pub diff_sq: McReport,
}

pub fn nishimori_check(
    n: usize,
    t: f64,
    h: f64,
    prior: &Prior,
    n_disorder: usize,
    stream: &RngStream,
) -> Result<NishimoriReport> {
    let atoms = prior
        .atoms()
        .ok_or_else(|| Error::invalid("finite-size enumeration needs an atomic prior"))?
        .to_vec();
    let configs = (atoms.len() as u128).pow(n as u32);
    if n == 0 || n > 8 || configs > RANKONE_MAX_CONFIGS {
        return Err(Error::EnumerationTooLarge {
            configs,
            limit: RANKONE_MAX_CONFIGS,
        });
    }
    if n_disorder < 2 {
        return Err(Error::invalid("need at least 2 disorder samples"));
    }
    let nf = n as f64;
    struct Draw {
        truth: f64,
        replica: f64,
        truth_sq: f64,
        replica_sq: f64,
    }
    let per: Vec<Draw> = (0..n_disorder as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = stream.with_index(r);
            let xbar: Vec<f64> = (0..n).map(|_| sample_atom(&atoms, &mut s)).collect();
            let w = s.draw_gaussian(n * n);
            let z = s.draw_gaussian(n);
            // exact Gibbs sums: mean vector ⟨x_i⟩, correlation ⟨x_i x_j⟩,
            // ⟨x·x̄⟩ and ⟨(x·x̄)²⟩
            let mut lse = LogSumExp::new();
            let mut terms: Vec<(f64, Vec<f64>, f64)> = Vec::new(); // (logw+H, x, x·x̄)
            for idx in MixedRadix::new(n, atoms.len()) {
                let xs: Vec<f64> = idx.iter().map(|&a| atoms[a].0).collect();
                let mut log_weight = 0.0;
                let mut xw_x = 0.0;
                let mut x_xbar = 0.0;
                let mut x_sq = 0.0;
                let mut z_x = 0.0;
                for i in 0..n {
                    log_weight += atoms[idx[i]].1.ln();
                    x_xbar += xs[i] * xbar[i];
                    x_sq += xs[i] * xs[i];
                    z_x += z[i] * xs[i];
                    for j in 0..n {
                        xw_x += w[i * n + j] * xs[i] * xs[j];
                    }
                }
                let ham = (2.0 * t / nf).sqrt() * xw_x + 2.0 * t / nf * x_xbar * x_xbar
                    - t / nf * x_sq * x_sq
                    + 2.0 * h * x_xbar
                    + (2.0 * h).sqrt() * z_x
                    - h * x_sq;
                let lw = log_weight + ham;
                lse.add(lw);
                terms.push((lw, xs, x_xbar));
            }
            let log_z = lse.value();
            let mut mean = vec![0.0f64; n];
            let mut truth = 0.0;
            let mut truth_sq = 0.0;
            let mut corr = vec![0.0f64; n * n];
            for (lw, xs, x_xbar) in &terms {
                let p = (lw - log_z).exp();
                truth += p * x_xbar;
                truth_sq += p * x_xbar * x_xbar;
                for i in 0..n {
                    mean[i] += p * xs[i];
                    for j in 0..n {
                        corr[i * n + j] += p * xs[i] * xs[j];
                    }
                }
            }
            // ⟨x·x′⟩ = Σ_i ⟨x_i⟩² and ⟨(x·x′)²⟩ = Σ_ij ⟨x_i x_j⟩²
            let replica: f64 = mean.iter().map(|m| m * m).sum();
            let replica_sq: f64 = corr.iter().map(|c| c * c).sum();
            Draw {
                truth,
                replica,
                truth_sq,
                replica_sq,
            }
        })
        .collect();
    let truth: Vec<f64> = per.iter().map(|d| d.truth).collect();
    let replica: Vec<f64> = per.iter().map(|d| d.replica).collect();
    let diff: Vec<f64> = per.iter().map(|d| d.truth - d.replica).collect();
    let diff_sq: Vec<f64> = per.iter().map(|d| d.truth_sq - d.replica_sq).collect();
    Ok(NishimoriReport {
        overlap_truth: report(&truth, stream),
        overlap_replica: report(&replica, stream),
        diff: report(&diff, stream),
        diff_sq: report(&diff_sq, stream),
    })
}

/// Test functions for the Gaussian integration-by-parts identity
/// E[g F(g)] = E[g²]·E[F′(g)].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GibpFunction {
    Identity,
    Square,
    Tanh,
    Cos,
}

impl GibpFunction {
    fn eval(&self, x: f64) -> f64 {
        match self {
            GibpFunction::Identity => x,
            GibpFunction::Square => x * x,
            GibpFunction::Tanh => x.tanh(),
            GibpFunction::Cos => x.cos(),
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        match self {
            GibpFunction::Identity => 1.0,
            GibpFunction::Square => 2.0 * x,
            GibpFunction::Tanh => 1.0 - x.tanh() * x.tanh(),
            GibpFunction::Cos => -x.sin(),
        }
    }
}

/// Two-sided Monte Carlo report of E[gF(g)] against v²·E[F′(g)], g centred
/// Gaussian with standard deviation v.
#[derive(Debug, Clone)]
pub struct GibpReport {
    pub lhs: McReport,
    pub rhs: McReport,
}

pub fn gibp_check(
    f: GibpFunction,
    v: f64,
    n_mc: usize,
    stream: &RngStream,
) -> Result<GibpReport> {
    if !(v > 0.0) {
        return Err(Error::invalid("v must be > 0"));
    }
    if n_mc < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let per: Vec<(f64, f64)> = (0..n_mc as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = stream.with_index(r);
            let g = v * s.next_gaussian();
            (g * f.eval(g), v * v * f.deriv(g))
        })
        .collect();
    let lhs: Vec<f64> = per.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = per.iter().map(|p| p.1).collect();
    Ok(GibpReport {
        lhs: report(&lhs, stream),
        rhs: report(&rhs, stream),
    })
}

/// Overlap-variance report for the SK Gibbs measure at parameter t (h = 0):
/// Var(R₁₂) = E⟨R₁₂²⟩ − (E⟨R₁₂⟩)², exact two-replica sums per draw.
#[derive(Debug, Clone)]
pub struct OverlapReport {
    pub variance: f64,
    pub stderr: f64,
    pub mean_r12: f64,
    pub mean_r12_sq: f64,
    pub n_samples: usize,
}

pub fn overlap_variance(
    n: usize,
    t: f64,
    n_disorder: usize,
    stream: &RngStream,
) -> Result<OverlapReport> {
    if n == 0 || n > 14 {
        return Err(Error::EnumerationTooLarge {
            configs: 1u128 << n.min(127),
            limit: 1 << 14,
        });
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("t must be ≥ 0"));
    }
    if n_disorder < 2 {
        return Err(Error::invalid("need at least 2 disorder samples"));
    }
    let beta = (2.0 * t).sqrt();
    let nf = n as f64;
    let per: Vec<(f64, f64)> = (0..n_disorder as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = stream.with_index(r);
            let g = s.draw_gaussian(n * n);
            let mut energies = Vec::new();
            sk_energies(&g, n, &mut energies);
            let mut lse = LogSumExp::new();
            for &e in &energies {
                lse.add(beta * e);
            }
            let log_z = lse.value();
            // single-replica means and pair correlations
            let mut mean = vec![0.0f64; n];
            let mut corr = vec![0.0f64; n * n];
            let mut sigma = vec![1.0f64; n];
            for (step, &e) in energies.iter().enumerate() {
                if step > 0 {
                    let k = step.trailing_zeros() as usize;
                    sigma[k] = -sigma[k];
                }
                let p = (beta * e - log_z).exp();
                for i in 0..n {
                    mean[i] += p * sigma[i];
                    for j in 0..n {
                        corr[i * n + j] += p * sigma[i] * sigma[j];
                    }
                }
            }
            let r12: f64 = mean.iter().map(|m| m * m).sum::<f64>() / nf;
            let r12_sq: f64 = corr.iter().map(|c| c * c).sum::<f64>() / (nf * nf);
            (r12, r12_sq)
        })
        .collect();
    let r: Vec<f64> = per.iter().map(|p| p.0).collect();
    let rsq: Vec<f64> = per.iter().map(|p| p.1).collect();
    let (mr, se_r) = mean_stderr(&r);
    let (mrsq, se_rsq) = mean_stderr(&rsq);
    Ok(OverlapReport {
        variance: mrsq - mr * mr,
        stderr: (se_rsq * se_rsq + (2.0 * mr * se_r) * (2.0 * mr * se_r)).sqrt(),
        mean_r12: mr,
        mean_r12_sq: mrsq,
        n_samples: n_disorder,
    })
}
