//! Poisson-Dirichlet cascades: depth-K trees of independent Poisson-Dirichlet
//! point processes with leaf weights w_α = Π_{ℓ≤K} u_{α|ℓ}, the overlap law
//! of two replicas, and the log-Laplace recursion that computes cascade
//! functionals E log⟨exp X_K(ω_∅, ω_{α|1}, …, ω_α)⟩ in closed form.
//!
//! Truncation: every node keeps `cutoff` explicit children plus one diffuse
//! pseudo-child carrying the Campbell conditional mean of the discarded mass.
//! Tail children never collide with anything, and at the deepest level their
//! functional contribution is the exact ω-average of exp X along the path
//! prefix (the discarded leaves carry fresh i.i.d. marks). At shallower
//! levels the unexplored subtree factor is approximated by the weighted
//! average of the explicit siblings; its prefactor is the shallow-level tail
//! mass, which the strictly increasing ζ sequence keeps small.

use crate::point_process::{sample_pdp, PdpSample};
use crate::quad::{gauss_legendre_01, QuadRule};
use crate::rng::RngStream;
use crate::util::mean_stderr;
use crate::{Error, Result};
use rayon::prelude::*;
use std::sync::Arc;

/// A bounded measurable function of K+1 uniform marks with a declared bound;
/// the bound guards the moment condition E exp(ζ_K X_K) < ∞.
#[derive(Clone)]
pub struct BoundedMarkFn {
    bound: f64,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl BoundedMarkFn {
    pub fn new(bound: f64, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::invalid(
                "mark functions must declare a finite bound (E exp ζX < ∞ guard)",
            ));
        }
        Ok(BoundedMarkFn {
            bound,
            f: Arc::new(f),
        })
    }

    pub fn eval(&self, marks: &[f64]) -> f64 {
        let v = (self.f)(marks);
        debug_assert!(v.abs() <= self.bound + 1e-12, "mark function exceeds its declared bound");
        v.clamp(-self.bound, self.bound)
    }
}

impl std::fmt::Debug for BoundedMarkFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BoundedMarkFn(|X| ≤ {})", self.bound)
    }
}

/// One internal node of the cascade: its child point process.
#[derive(Debug, Clone)]
struct CascadeNode {
    points: Vec<f64>,
    tail_mass: f64,
    tail_sq_mass: f64,
    tail_bound: f64,
}

impl From<PdpSample> for CascadeNode {
    fn from(p: PdpSample) -> Self {
        CascadeNode {
            points: p.points,
            tail_mass: p.tail_mass,
            tail_sq_mass: p.tail_sq_mass,
            tail_bound: p.tail_bound,
        }
    }
}

/// A sampled depth-K Poisson-Dirichlet cascade, truncated to
/// `cutoffs[ℓ]` children per depth-ℓ node. Nodes at depth ℓ < K carry
/// independent Poisson-Dirichlet samples with parameter ζ_{ℓ+1}.
#[derive(Debug, Clone)]
pub struct CascadeTree {
    zetas: Vec<f64>,
    cutoffs: Vec<usize>,
    /// levels[ℓ] holds the depth-ℓ internal nodes in row-major order.
    levels: Vec<Vec<CascadeNode>>,
}

/// Validate 0 < ζ₁ < … < ζ_K < 1.
fn validate_zetas(zetas: &[f64]) -> Result<()> {
    if zetas.is_empty() {
        return Err(Error::invalid("need at least one level"));
    }
    for w in zetas.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::invalid(
                "cascade parameters must be strictly increasing",
            ));
        }
    }
    if !(zetas[0] > 0.0 && *zetas.last().unwrap() < 1.0) {
        return Err(Error::invalid("cascade parameters must lie in (0, 1)"));
    }
    Ok(())
}

/// Sample a depth-K cascade with the same cutoff at every node.
pub fn sample_cascade(zetas: &[f64], cutoff: usize, stream: &mut RngStream) -> Result<CascadeTree> {
    sample_cascade_with_cutoffs(zetas, &vec![cutoff; zetas.len()], stream)
}

/// Sample a depth-K cascade with per-level cutoffs; `cutoffs[ℓ]` children
/// hang off each depth-ℓ node. A wide root with narrow deep levels captures
/// the slowly-decaying root-level mass reordering cheaply, the deep-level
/// truncation being already corrected through the Campbell tail terms.
pub fn sample_cascade_with_cutoffs(
    zetas: &[f64],
    cutoffs: &[usize],
    stream: &mut RngStream,
) -> Result<CascadeTree> {
    validate_zetas(zetas)?;
    if cutoffs.len() != zetas.len() || cutoffs.iter().any(|&c| c == 0) {
        return Err(Error::invalid("need one positive cutoff per level"));
    }
    let k = zetas.len();
    let mut levels = Vec::with_capacity(k);
    let mut n_nodes = 1usize;
    for (depth, &zeta) in zetas.iter().enumerate().take(k) {
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            nodes.push(CascadeNode::from(sample_pdp(zeta, cutoffs[depth], stream)?));
        }
        levels.push(nodes);
        n_nodes *= cutoffs[depth];
    }
    Ok(CascadeTree {
        zetas: zetas.to_vec(),
        cutoffs: cutoffs.to_vec(),
        levels,
    })
}

impl CascadeTree {
    pub fn depth(&self) -> usize {
        self.zetas.len()
    }

    pub fn zetas(&self) -> &[f64] {
        &self.zetas
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    fn node(&self, depth: usize, idx: usize) -> &CascadeNode {
        &self.levels[depth][idx]
    }

    /// Masses of all depth-ℓ explicit subtrees, bottom-up: a leaf has mass 1,
    /// an internal node has Σ u_i·M_i plus the diffuse-tail term whose
    /// subtree factor is the weighted average of the explicit children.
    fn subtree_masses(&self) -> Vec<Vec<f64>> {
        let k = self.depth();
        let mut masses: Vec<Vec<f64>> = vec![Vec::new(); k];
        for depth in (0..k).rev() {
            let child_masses = if depth + 1 < k {
                Some(std::mem::take(&mut masses[depth + 1]))
            } else {
                None
            };
            let stride = self.cutoffs[depth];
            let level: Vec<f64> = self.levels[depth]
                .iter()
                .enumerate()
                .map(|(i, node)| {
                    let mut explicit = 0.0;
                    let mut u_sum = 0.0;
                    for (j, &u) in node.points.iter().enumerate() {
                        let m_child = match &child_masses {
                            Some(cm) => cm[i * stride + j],
                            None => 1.0,
                        };
                        explicit += u * m_child;
                        u_sum += u;
                    }
                    let avg_child = explicit / u_sum;
                    explicit + node.tail_mass * avg_child
                })
                .collect();
            if let Some(cm) = child_masses {
                masses[depth + 1] = cm;
            }
            masses[depth] = level;
        }
        masses
    }

    /// Explicit leaf weights w_α = Π u (log-space), in row-major leaf order.
    pub fn leaf_log_weights(&self) -> Vec<f64> {
        let k = self.depth();
        let mut logs = vec![0.0f64];
        for depth in 0..k {
            let mut next = Vec::with_capacity(logs.len() * self.cutoffs[depth]);
            for (i, &lw) in logs.iter().enumerate() {
                for &u in &self.node(depth, i).points {
                    next.push(lw + u.ln());
                }
            }
            logs = next;
        }
        logs
    }

    /// Normalized leaf weights v_α over the explicit leaves; they sum to one
    /// by construction, the truncation being tracked by [`Self::deficit`].
    pub fn normalized_leaf_weights(&self) -> Vec<f64> {
        let logs = self.leaf_log_weights();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let s: f64 = unnorm.iter().sum();
        unnorm.into_iter().map(|w| w / s).collect()
    }

    /// Relative mass assigned to unexplored branches: 1 − Σ_explicit w / M.
    pub fn deficit(&self) -> f64 {
        let masses = self.subtree_masses();
        let logs = self.leaf_log_weights();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let explicit: f64 = logs.iter().map(|l| (l - max).exp()).sum::<f64>() * max.exp();
        1.0 - explicit / masses[0][0]
    }

    /// Worst per-node relative truncation bound, from the recorded
    /// deterministic tail bounds cutoff^{1−1/ζ}·(1/ζ)/(1/ζ−1).
    pub fn max_node_tail_bound(&self) -> f64 {
        self.levels
            .iter()
            .flatten()
            .map(|n| n.tail_bound / n.points.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Exact replica-pair overlap law given this tree: q_k = ⟨1{α¹∧α²=k}⟩
    /// for k = 0..K, averaging the two replicas in closed form. Collisions
    /// require both replicas to pick the same explicit vertex, so
    /// ⟨∧ ≥ ℓ⟩ = Σ_{|v|=ℓ} (w_prefix(v)·M_v / M_root)². Children are visited
    /// in decreasing-weight order, making the result invariant bit-for-bit
    /// under any tree-structure-preserving relabeling.
    pub fn overlap_distribution(&self) -> Vec<f64> {
        let k = self.depth();
        let masses = self.subtree_masses();
        let root_mass = masses[0][0];
        // P(∧ ≥ ℓ) for ℓ = 0..=K
        let mut p_ge = vec![1.0f64; k + 1];
        // prefix weights of explicit vertices at the current depth
        let mut prefix: Vec<(usize, f64)> = vec![(0, 1.0)]; // (node index, Π u)
        for depth in 0..k {
            let stride = self.cutoffs[depth];
            let mut collide = 0.0;
            let mut next = Vec::with_capacity(prefix.len() * stride);
            for &(i, w) in &prefix {
                let node = self.node(depth, i);
                // points come out of the sampler in decreasing order; after
                // a relabeling, reduce in sorted order so the result stays
                // bit-identical
                let sorted = node.points.windows(2).all(|p| p[0] >= p[1]);
                let mut order: Vec<usize> = (0..node.points.len()).collect();
                if !sorted {
                    order.sort_by(|&a, &b| node.points[b].partial_cmp(&node.points[a]).unwrap());
                }
                for &j in &order {
                    let u = node.points[j];
                    let child = i * stride + j;
                    let m_child = if depth + 1 < k {
                        masses[depth + 1][child]
                    } else {
                        1.0
                    };
                    let mass = w * u * m_child / root_mass;
                    collide += mass * mass;
                    next.push((child, w * u));
                }
                if depth + 1 == k {
                    // self-collisions of the truncated leaves: exact in
                    // conditional mean via the Campbell second moment;
                    // internal-level tails have no finite second moment and
                    // stay uncounted (they sit under the fast-decaying
                    // shallow weights)
                    let wr = w / root_mass;
                    collide += wr * wr * node.tail_sq_mass;
                }
            }
            p_ge[depth + 1] = collide;
            prefix = next;
        }
        (0..=k).map(|ell| {
            let upper = if ell + 1 <= k { p_ge[ell + 1] } else { 0.0 };
            p_ge[ell] - upper
        }).collect()
    }

    /// Relabel: permute the children of one node (and the subtrees hanging
    /// off them). Tree-structure preserving, so every overlap statistic must
    /// be unchanged.
    pub fn permute_children(&mut self, depth: usize, node_idx: usize, perm: &[usize]) {
        let c = self.cutoffs[depth];
        assert_eq!(perm.len(), c);
        let pts = &mut self.levels[depth][node_idx].points;
        let old = pts.clone();
        for (slot, &src) in perm.iter().enumerate() {
            pts[slot] = old[src];
        }
        // move the subtrees along with their parents, level by level
        let k = self.depth();
        let mut base = node_idx; // first node of the subtree at level d
        let mut per_child = 1usize; // nodes per child at level d
        for d in (depth + 1)..k {
            base *= self.cutoffs[d - 1];
            if d > depth + 1 {
                per_child *= self.cutoffs[d - 1];
            }
            let block = per_child * c;
            let level = &mut self.levels[d];
            let old_nodes: Vec<CascadeNode> = level[base..base + block].to_vec();
            for (slot, &src) in perm.iter().enumerate() {
                for q in 0..per_child {
                    level[base + slot * per_child + q] = old_nodes[src * per_child + q].clone();
                }
            }
        }
    }
}

/// Deterministic value of the cascade functional by the log-Laplace cascade
/// recursion: X_k = ζ_{k+1}^{−1} log E_{ω} exp(ζ_{k+1} X_{k+1}) down to
/// X_{−1} = E_{ω₀} X₀, every ω-average by Gauss-Legendre on [0,1].
pub fn cascade_recursion(zetas: &[f64], x: &BoundedMarkFn, quad_nodes: usize) -> Result<f64> {
    validate_zetas(zetas)?;
    let quad = gauss_legendre_01(quad_nodes)?;
    let k = zetas.len();
    let mut marks = vec![0.0f64; k + 1];
    fn level_value(
        depth: usize, // which X_k is being computed, k = depth − 1 style: we compute X_{depth-1}
        k: usize,
        zetas: &[f64],
        quad: &QuadRule,
        x: &BoundedMarkFn,
        marks: &mut Vec<f64>,
    ) -> f64 {
        // computes X_{depth}(marks[0..=depth]) given the prefix marks
        if depth == k {
            return x.eval(marks);
        }
        let zeta = zetas[depth]; // ζ_{depth+1} in 1-based notation
        let mut acc = 0.0;
        for (&node, &w) in quad.nodes.iter().zip(&quad.weights) {
            marks[depth + 1] = node;
            let inner = level_value(depth + 1, k, zetas, quad, x, marks);
            acc += w * (zeta * inner).exp();
        }
        acc.ln() / zeta
    }
    // X_{−1} = E_{ω₀} X₀
    let mut acc = 0.0;
    for (&node, &w) in quad.nodes.iter().zip(&quad.weights) {
        marks[0] = node;
        acc += w * level_value(0, k, zetas, &quad, x, &mut marks);
    }
    Ok(acc)
}

/// Monte Carlo estimate of E log⟨exp X_K(ω_∅, ω_{α|1}, …, ω_α)⟩ over fresh
/// cascades and marks. Returns (estimate, stderr).
pub fn cascade_functional(
    zetas: &[f64],
    cutoff: usize,
    x: &BoundedMarkFn,
    n_mc: usize,
    stream: &RngStream,
) -> Result<(f64, f64)> {
    validate_zetas(zetas)?;
    if n_mc < 2 {
        return Err(Error::invalid("need at least 2 Monte Carlo samples"));
    }
    let quad = gauss_legendre_01(32)?;
    let k = zetas.len();
    let samples: Vec<f64> = (0..n_mc as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = stream.with_index(r);
            let tree = sample_cascade(zetas, cutoff, &mut s).unwrap();
            let mut marks = vec![0.0f64; k + 1];
            marks[0] = s.next_f64(); // ω_∅ shared by every leaf
            let (num, den) = subtree_sums(&tree, 0, 0, &mut marks, &mut s, x, &quad);
            (num / den).ln()
        })
        .collect();
    Ok(mean_stderr(&samples))
}

/// As [`cascade_overlap_frequencies`] with per-level cutoffs.
pub fn cascade_overlap_frequencies_with_cutoffs(
    zetas: &[f64],
    cutoffs: &[usize],
    n_mc: usize,
    stream: &RngStream,
) -> Result<Vec<(f64, f64)>> {
    validate_zetas(zetas)?;
    if n_mc < 2 {
        return Err(Error::invalid("need at least 2 Monte Carlo samples"));
    }
    let k = zetas.len();
    let rows: Vec<Vec<f64>> = (0..n_mc as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = stream.with_index(r);
            sample_cascade_with_cutoffs(zetas, cutoffs, &mut s)
                .unwrap()
                .overlap_distribution()
        })
        .collect();
    Ok((0..=k)
        .map(|ell| {
            let col: Vec<f64> = rows.iter().map(|row| row[ell]).collect();
            mean_stderr(&col)
        })
        .collect())
}

/// Mass-weighted sums over the subtree of `node` at `depth`:
/// (Σ w·exp X with marks, Σ w). The deepest-level diffuse tail carries the
/// exact ω-average of exp X given the prefix marks; shallower tails reuse
/// the explicit-children average.
fn subtree_sums(
    tree: &CascadeTree,
    depth: usize,
    idx: usize,
    marks: &mut Vec<f64>,
    stream: &mut RngStream,
    x: &BoundedMarkFn,
    quad: &QuadRule,
) -> (f64, f64) {
    let k = tree.depth();
    let node = tree.node(depth, idx);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut u_sum = 0.0;
    for (j, &u) in node.points.iter().enumerate() {
        marks[depth + 1] = stream.next_f64();
        let (n_j, d_j) = if depth + 1 == k {
            (x.eval(&marks[..=k]).exp(), 1.0)
        } else {
            subtree_sums(tree, depth + 1, idx * tree.cutoffs[depth] + j, marks, stream, x, quad)
        };
        num += u * n_j;
        den += u * d_j;
        u_sum += u;
    }
    // diffuse tail
    if depth + 1 == k {
        let mut acc = 0.0;
        for (&nq, &wq) in quad.nodes.iter().zip(&quad.weights) {
            marks[k] = nq;
            acc += wq * x.eval(&marks[..=k]).exp();
        }
        num += node.tail_mass * acc;
        den += node.tail_mass;
    } else {
        num += node.tail_mass * num / u_sum;
        den += node.tail_mass * den / u_sum;
    }
    (num, den)
}

/// Monte Carlo estimate of the overlap law E⟨1{α¹∧α² = k}⟩, k = 0..K:
/// the replica average is exact per sampled tree (see
/// [`CascadeTree::overlap_distribution`]); only the tree is Monte Carlo.
/// Returns per-k (frequency, stderr).
pub fn cascade_overlap_frequencies(
    zetas: &[f64],
    cutoff: usize,
    n_mc: usize,
    stream: &RngStream,
) -> Result<Vec<(f64, f64)>> {
    cascade_overlap_frequencies_with_cutoffs(zetas, &vec![cutoff; zetas.len()], n_mc, stream)
}
