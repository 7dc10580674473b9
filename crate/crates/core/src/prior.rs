//! Single-spin reference laws: finite atomic measures and the standard
//! Gaussian.

use crate::{Error, Result};

/// A bounded single-spin prior. Atomic priors carry explicit (value, weight)
/// pairs; the Gaussian preset is handled in closed form where it appears.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Atomic {
        /// (support value, probability weight), weights strictly positive.
        atoms: Vec<(f64, f64)>,
        name: String,
    },
    Gaussian,
}

impl Prior {
    pub fn atomic(atoms: Vec<(f64, f64)>, name: &str) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("atomic prior needs at least one atom"));
        }
        let mut total = 0.0;
        for &(v, w) in &atoms {
            if !v.is_finite() {
                return Err(Error::invalid("atom values must be finite"));
            }
            if !(w > 0.0) {
                return Err(Error::invalid("atom weights must be strictly positive"));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "atom weights must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(Prior::Atomic {
            atoms,
            name: name.to_string(),
        })
    }

    /// ½δ₋₁ + ½δ₊₁ (the uniform ±1 spin).
    pub fn uniform_pm1() -> Self {
        Prior::atomic(vec![(-1.0, 0.5), (1.0, 0.5)], "uniform_pm1").unwrap()
    }

    /// Alias for the uniform ±1 prior under its inference-side name.
    pub fn rademacher() -> Self {
        Prior::atomic(vec![(-1.0, 0.5), (1.0, 0.5)], "rademacher").unwrap()
    }

    /// (1−p)δ₀ + (p/2)δ_{1/√p} + (p/2)δ_{−1/√p}; mean 0, second moment 1.
    pub fn sparse(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("sparse(p) needs p in (0, 1)"));
        }
        let s = 1.0 / p.sqrt();
        Prior::atomic(
            vec![(-s, p / 2.0), (0.0, 1.0 - p), (s, p / 2.0)],
            &format!("sparse({p})"),
        )
    }

    /// Spins ±1 with P{+1} = p (community-label prior of the block model).
    pub fn bernoulli_pm1(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid("bernoulli(p) needs p in (0, 1)"));
        }
        Prior::atomic(vec![(-1.0, 1.0 - p), (1.0, p)], &format!("bernoulli({p})"))
    }

    pub fn gaussian() -> Self {
        Prior::Gaussian
    }

    /// Parse a preset name: `gaussian`, `rademacher`, `uniform_pm1`,
    /// `sparse(p)`, `bernoulli(p)`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "gaussian" => return Ok(Prior::Gaussian),
            "rademacher" => return Ok(Prior::rademacher()),
            "uniform_pm1" => return Ok(Prior::uniform_pm1()),
            _ => {}
        }
        for (tag, ctor) in [
            ("sparse", Prior::sparse as fn(f64) -> Result<Prior>),
            ("bernoulli", Prior::bernoulli_pm1 as fn(f64) -> Result<Prior>),
        ] {
            if let Some(rest) = name.strip_prefix(tag) {
                let inner = rest
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| Error::invalid(format!("malformed prior `{name}`")))?;
                let p: f64 = inner
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad parameter in `{name}`")))?;
                return ctor(p);
            }
        }
        Err(Error::invalid(format!("unknown prior `{name}`")))
    }

    pub fn name(&self) -> String {
        match self {
            Prior::Atomic { name, .. } => name.clone(),
            Prior::Gaussian => "gaussian".to_string(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Prior::Atomic { atoms, .. } => atoms.iter().map(|(v, w)| v * w).sum(),
            Prior::Gaussian => 0.0,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            Prior::Atomic { atoms, .. } => atoms.iter().map(|(v, w)| v * v * w).sum(),
            Prior::Gaussian => 1.0,
        }
    }

    /// Support bound a := max value², finite for atomic priors.
    pub fn support_bound(&self) -> Option<f64> {
        match self {
            Prior::Atomic { atoms, .. } => atoms
                .iter()
                .map(|(v, _)| v * v)
                .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x)))),
            Prior::Gaussian => None,
        }
    }

    pub fn atoms(&self) -> Option<&[(f64, f64)]> {
        match self {
            Prior::Atomic { atoms, .. } => Some(atoms),
            Prior::Gaussian => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn presets_are_normalized() {
        for prior in [
            Prior::uniform_pm1(),
            Prior::rademacher(),
            Prior::sparse(0.05).unwrap(),
            Prior::sparse(0.5).unwrap(),
            Prior::sparse(0.9).unwrap(),
        ] {
            assert_abs_diff_eq!(prior.mean(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(prior.second_moment(), 1.0, epsilon = 1e-12);
        }
        // Gaussian preset is standard normal by definition
        assert_eq!(Prior::gaussian().mean(), 0.0);
        assert_eq!(Prior::gaussian().second_moment(), 1.0);
    }

    #[test]
    fn sparse_support_bound() {
        let p = 0.05;
        let prior = Prior::sparse(p).unwrap();
        assert_abs_diff_eq!(prior.support_bound().unwrap(), 1.0 / p, epsilon = 1e-12);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(Prior::atomic(vec![(0.0, 0.5), (1.0, 0.4)], "bad").is_err());
        assert!(Prior::atomic(vec![(0.0, 0.5), (1.0, -0.5)], "bad").is_err());
    }

    #[test]
    fn parse_round_trips() {
        assert_eq!(Prior::parse("gaussian").unwrap(), Prior::Gaussian);
        assert_eq!(Prior::parse("rademacher").unwrap(), Prior::rademacher());
        assert_eq!(
            Prior::parse("sparse(0.05)").unwrap(),
            Prior::sparse(0.05).unwrap()
        );
        assert_eq!(
            Prior::parse("bernoulli(0.5)").unwrap(),
            Prior::bernoulli_pm1(0.5).unwrap()
        );
        assert!(Prior::parse("cauchy").is_err());
        assert!(Prior::parse("sparse(2)").is_err());
    }
}
