//! Non-decreasing step paths on [0, 1) and their right-continuous inverses.
//!
//! A [`PiecewisePath`] is the overlap-path parameter q of the enriched
//! spin-glass free energy: breakpoints 0 = ζ₀ < ζ₁ < … < ζ_K < ζ_{K+1} = 1
//! and non-decreasing levels q₀ ≤ … ≤ q_K, meaning q = Σ q_k·1_{[ζ_k, ζ_{k+1})}.
//! A [`DistFn`] is a right-continuous non-decreasing ζ: [0,1] → [0,1] with
//! ζ(1) = 1, stored by its atoms; it is exactly the right-continuous inverse
//! of a path with levels in [0, 1].

use crate::{Error, Result};

/// Step path q = Σ_k levels[k]·1_{[ζ_k, ζ_{k+1})} with ζ₀ = 0, ζ_{K+1} = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath {
    /// Interior breakpoints ζ₁ < … < ζ_K, all in (0, 1). May be empty.
    zetas: Vec<f64>,
    /// Levels q₀ ≤ … ≤ q_K, all ≥ 0. Always one longer than `zetas`.
    levels: Vec<f64>,
}

impl PiecewisePath {
    pub fn new(zetas: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != zetas.len() + 1 {
            return Err(Error::invalid(format!(
                "need one more level than breakpoints, got {} levels / {} breakpoints",
                levels.len(),
                zetas.len()
            )));
        }
        for w in zetas.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::invalid("breakpoints must be strictly increasing"));
            }
        }
        if let (Some(&first), Some(&last)) = (zetas.first(), zetas.last()) {
            if !(first > 0.0 && last < 1.0) {
                return Err(Error::invalid("breakpoints must lie in (0, 1)"));
            }
        }
        for w in levels.windows(2) {
            if !(w[0] <= w[1]) {
                return Err(Error::invalid("levels must be non-decreasing"));
            }
        }
        if levels.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) {
            return Err(Error::invalid("levels must be finite and ≥ 0"));
        }
        Ok(PiecewisePath { zetas, levels })
    }

    /// The constant path q ≡ level.
    pub fn constant(level: f64) -> Result<Self> {
        PiecewisePath::new(vec![], vec![level])
    }

    /// The zero path.
    pub fn zero() -> Self {
        PiecewisePath::constant(0.0).unwrap()
    }

    pub fn zetas(&self) -> &[f64] {
        &self.zetas
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Left endpoints of all K+1 plateaus: [0, ζ₁, …, ζ_K].
    pub fn breakpoints_with_zero(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.zetas.len() + 1);
        b.push(0.0);
        b.extend_from_slice(&self.zetas);
        b
    }

    /// q(1) := q_K, the terminal level.
    pub fn terminal(&self) -> f64 {
        *self.levels.last().unwrap()
    }

    /// q(u) for u ∈ [0, 1).
    pub fn eval(&self, u: f64) -> f64 {
        let k = self.zetas.partition_point(|&z| z <= u);
        self.levels[k]
    }

    /// Merge equal adjacent levels (repetitions leave the path unchanged as a
    /// function, so they may always be collapsed).
    pub fn canonicalize(&self) -> PiecewisePath {
        let mut zetas = Vec::new();
        let mut levels = vec![self.levels[0]];
        for (i, &z) in self.zetas.iter().enumerate() {
            let q = self.levels[i + 1];
            if q != *levels.last().unwrap() {
                zetas.push(z);
                levels.push(q);
            }
        }
        PiecewisePath { zetas, levels }
    }

    /// Pointwise scale of the levels by c ≥ 0.
    pub fn scale(&self, c: f64) -> PiecewisePath {
        PiecewisePath {
            zetas: self.zetas.clone(),
            levels: self.levels.iter().map(|q| q * c).collect(),
        }
    }

    /// Pointwise sum q + q' on the merged breakpoint partition.
    pub fn add(&self, other: &PiecewisePath) -> PiecewisePath {
        let mut cuts: Vec<f64> = self
            .zetas
            .iter()
            .chain(other.zetas.iter())
            .copied()
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut levels = Vec::with_capacity(cuts.len() + 1);
        let probe = |u: f64| self.eval(u) + other.eval(u);
        levels.push(probe(0.0));
        for &z in &cuts {
            levels.push(probe(z));
        }
        PiecewisePath {
            zetas: cuts,
            levels,
        }
        .canonicalize()
    }

    /// Exact ∫₀¹ |q − q'| du on the merged breakpoint partition.
    pub fn l1_distance(&self, other: &PiecewisePath) -> f64 {
        let mut cuts: Vec<f64> = Vec::with_capacity(self.zetas.len() + other.zetas.len() + 2);
        cuts.push(0.0);
        cuts.extend_from_slice(&self.zetas);
        cuts.extend_from_slice(&other.zetas);
        cuts.push(1.0);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let u = w[0];
            total += (self.eval(u) - other.eval(u)).abs() * (w[1] - w[0]);
        }
        total
    }

    /// Exact ∫₀¹ q(u)² du.
    pub fn l2_sq(&self) -> f64 {
        let mut cuts = self.breakpoints_with_zero();
        cuts.push(1.0);
        let mut total = 0.0;
        for (k, w) in cuts.windows(2).enumerate() {
            total += self.levels[k] * self.levels[k] * (w[1] - w[0]);
        }
        total
    }

    /// Right-continuous inverse, defined for paths with levels in [0, 1].
    pub fn inverse(&self) -> Result<DistFn> {
        if self.terminal() > 1.0 {
            return Err(Error::invalid(
                "right-continuous inverse needs levels in [0, 1]",
            ));
        }
        let canon = self.canonicalize();
        // ζ jumps at each distinct level q_k by the width of its plateau
        let mut bounds = canon.breakpoints_with_zero();
        bounds.push(1.0);
        let atoms: Vec<Atom> = canon
            .levels
            .iter()
            .enumerate()
            .map(|(k, &q)| Atom {
                location: q,
                jump: bounds[k + 1] - bounds[k],
            })
            .collect();
        DistFn::new(atoms)
    }
}

/// An atom of a distribution function on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub jump: f64,
}

/// Right-continuous non-decreasing ζ: [0, 1] → [0, 1] with ζ(1) = 1, given by
/// finitely many atoms. ζ(t) = Σ_{location ≤ t} jump.
#[derive(Debug, Clone, PartialEq)]
pub struct DistFn {
    atoms: Vec<Atom>,
}

impl DistFn {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("need at least one atom"));
        }
        for w in atoms.windows(2) {
            if !(w[0].location < w[1].location) {
                return Err(Error::invalid("atom locations must be strictly increasing"));
            }
        }
        for a in &atoms {
            if !(a.location >= 0.0 && a.location <= 1.0) {
                return Err(Error::invalid("atom locations must lie in [0, 1]"));
            }
            if !(a.jump > 0.0) {
                return Err(Error::invalid("atom jumps must be positive"));
            }
        }
        let mass: f64 = atoms.iter().map(|a| a.jump).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "atom jumps must sum to 1 (ζ(1) = 1), got {mass}"
            )));
        }
        Ok(DistFn { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// ζ(t).
    pub fn eval(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|a| a.location <= t)
            .map(|a| a.jump)
            .sum()
    }

    /// Exact ∫₀¹ t ζ(t) dt for the step function ζ.
    pub fn int_t_zeta(&self) -> f64 {
        // ζ(t) = Σ_k jump_k·1_{t ≥ loc_k}, so ∫₀¹ tζ = Σ_k jump_k (1 − loc_k²)/2
        self.atoms
            .iter()
            .map(|a| a.jump * (1.0 - a.location * a.location) / 2.0)
            .sum()
    }

    /// The path whose right-continuous inverse is ζ: plateau levels are the
    /// atom locations, plateau widths the jumps.
    pub fn to_path(&self) -> PiecewisePath {
        let mut zetas = Vec::with_capacity(self.atoms.len().saturating_sub(1));
        let mut acc = 0.0;
        for a in &self.atoms[..self.atoms.len() - 1] {
            acc += a.jump;
            zetas.push(acc);
        }
        let levels = self.atoms.iter().map(|a| a.location).collect();
        PiecewisePath::new(zetas, levels).expect("atoms of a DistFn always form a valid path")
    }
}
