//! Sampled real functions on a uniform one-dimensional grid.
//!
//! Values are `f64` with an explicit plus-infinity flag per node rather than
//! a sentinel float; the finite nodes must form a contiguous block so the
//! effective domain is an interval.

use crate::{Error, Result};

/// A node value: finite or +∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Finite(f64),
    PlusInf,
}

impl Node {
    pub fn finite(self) -> Option<f64> {
        match self {
            Node::Finite(v) => Some(v),
            Node::PlusInf => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Node::Finite(_))
    }
}

/// A function sampled on a uniform grid over [lo, hi].
#[derive(Debug, Clone)]
pub struct GridFunction {
    lo: f64,
    hi: f64,
    values: Vec<Node>,
}

impl GridFunction {
    /// Build from explicit nodes. The +∞ nodes must form a prefix and/or
    /// suffix of the array.
    pub fn new(lo: f64, hi: f64, values: Vec<Node>) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Grid(format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if values.len() < 2 {
            return Err(Error::Grid("need at least 2 nodes".into()));
        }
        let first = values.iter().position(|n| n.is_finite());
        let Some(first) = first else {
            return Err(Error::Grid("all nodes are +∞".into()));
        };
        let last = values.iter().rposition(|n| n.is_finite()).unwrap();
        if values[first..=last].iter().any(|n| !n.is_finite()) {
            return Err(Error::Grid(
                "+∞ nodes must form a prefix and/or suffix (effective domain is an interval)"
                    .into(),
            ));
        }
        for n in &values[first..=last] {
            if let Node::Finite(v) = n {
                if !v.is_finite() {
                    return Err(Error::Grid("finite nodes must hold finite floats".into()));
                }
            }
        }
        Ok(GridFunction { lo, hi, values })
    }

    /// Sample a closed-form function on n uniform nodes.
    pub fn sample(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid("need at least 2 nodes".into()));
        }
        let spacing = (hi - lo) / (n - 1) as f64;
        let values = (0..n)
            .map(|i| Node::Finite(f(lo + i as f64 * spacing)))
            .collect();
        GridFunction::new(lo, hi, values)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.values.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    pub fn node(&self, i: usize) -> Node {
        self.values[i]
    }

    pub fn values(&self) -> &[Node] {
        &self.values
    }

    /// Index range [first, last] of the finite nodes.
    pub fn finite_range(&self) -> (usize, usize) {
        let first = self.values.iter().position(|n| n.is_finite()).unwrap();
        let last = self.values.iter().rposition(|n| n.is_finite()).unwrap();
        (first, last)
    }

    /// Iterator over (x, value) of the finite nodes.
    pub fn finite_nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().filter_map(move |(i, n)| {
            n.finite().map(|v| (self.x(i), v))
        })
    }

    /// Largest |slope| between adjacent finite nodes.
    pub fn lipschitz(&self) -> f64 {
        let h = self.spacing();
        let (a, b) = self.finite_range();
        let mut lip: f64 = 0.0;
        for i in a..b {
            let u = self.values[i].finite().unwrap();
            let v = self.values[i + 1].finite().unwrap();
            lip = lip.max(((v - u) / h).abs());
        }
        lip
    }

    /// Linear interpolation at x; +∞ regions and out-of-range queries
    /// extrapolate linearly from the nearest finite edge when `extrapolate`,
    /// otherwise return None.
    pub fn interp(&self, x: f64, extrapolate: bool) -> Option<f64> {
        let h = self.spacing();
        let (a, b) = self.finite_range();
        let xa = self.x(a);
        let xb = self.x(b);
        if x < xa || x > xb {
            if !extrapolate {
                return None;
            }
            // one-sided slope from the edge pair
            return if x < xa {
                let slope = if b > a {
                    (self.values[a + 1].finite().unwrap() - self.values[a].finite().unwrap()) / h
                } else {
                    0.0
                };
                Some(self.values[a].finite().unwrap() + slope * (x - xa))
            } else {
                let slope = if b > a {
                    (self.values[b].finite().unwrap() - self.values[b - 1].finite().unwrap()) / h
                } else {
                    0.0
                };
                Some(self.values[b].finite().unwrap() + slope * (x - xb))
            };
        }
        let t = (x - self.lo) / h;
        let i = (t.floor() as usize).clamp(a, b.saturating_sub(1).max(a));
        if i >= b {
            return self.values[b].finite();
        }
        let frac = t - i as f64;
        let u = self.values[i].finite()?;
        let v = self.values[i + 1].finite()?;
        Some(u + frac * (v - u))
    }

    /// Check discrete convexity: second differences ≥ −tol·scale where scale
    /// is the largest |value|. Returns the first offending node on failure.
    pub fn check_convex(&self, tol: f64) -> Result<()> {
        let (a, b) = self.finite_range();
        let scale = self
            .values[a..=b]
            .iter()
            .map(|n| n.finite().unwrap().abs())
            .fold(1.0f64, f64::max);
        for i in (a + 1)..b {
            let um = self.values[i - 1].finite().unwrap();
            let u0 = self.values[i].finite().unwrap();
            let up = self.values[i + 1].finite().unwrap();
            let second = um - 2.0 * u0 + up;
            if second < -tol * scale {
                return Err(Error::NotConvex {
                    index: i,
                    x: self.x(i),
                    second_diff: second,
                    tol: tol * scale,
                });
            }
        }
        Ok(())
    }
}
