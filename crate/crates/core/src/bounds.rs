//! Norm bounds for generalized traces and the permutation sets behind them.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::caps;
use crate::error::{Error, Result};
use crate::symgroup::{factorial, Permutation};
use crate::tensor::{generalized_trace, plain_labels, DenseOperator, C64};

const REL_TOL: f64 = 1e-9;

/// `{0..kr} ↔ {0..k} × {0..r}`, leg `m` belongs to matrix `m / r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegIndexing {
    pub k: usize,
    pub r: usize,
}

impl LegIndexing {
    pub fn new(k: usize, r: usize) -> Self {
        LegIndexing { k, r }
    }

    pub fn legs(&self) -> usize {
        self.k * self.r
    }

    pub fn split(&self, m: usize) -> (usize, usize) {
        (m / self.r, m % self.r)
    }

    pub fn join(&self, i: usize, x: usize) -> usize {
        i * self.r + x
    }

    fn check(&self, sigma: &Permutation) -> Result<()> {
        if sigma.degree() != self.legs() {
            return Err(Error::DegreeMismatch(sigma.degree(), self.legs()));
        }
        Ok(())
    }

    /// Block image of every block, if `σ` maps blocks onto blocks.
    fn block_map(&self, sigma: &Permutation) -> Option<Vec<usize>> {
        (0..self.k)
            .map(|i| {
                let target = sigma.apply(self.join(i, 0)) / self.r;
                (0..self.r)
                    .all(|x| sigma.apply(self.join(i, x)) / self.r == target)
                    .then_some(target)
            })
            .collect()
    }
}

/// `σ` maps r-blocks to r-blocks and permutes the blocks in one k-cycle.
pub fn in_gamma(sigma: &Permutation, k: usize, r: usize) -> Result<bool> {
    let idx = LegIndexing::new(k, r);
    idx.check(sigma)?;
    if k == 0 {
        return Ok(true);
    }
    let Some(blocks) = idx.block_map(sigma) else {
        return Ok(false);
    };
    let mut len = 1;
    let mut i = blocks[0];
    while i != 0 {
        i = blocks[i];
        len += 1;
    }
    Ok(len == k)
}

/// Some equipartition `E ⊔ F` of the blocks has `σ(E-legs) ⊆ F-blocks` and
/// `σ(F-legs) ⊆ E-blocks`.
pub fn in_theta(sigma: &Permutation, k: usize, r: usize) -> Result<bool> {
    if k % 2 == 1 {
        return Err(Error::Precondition(format!("Θ needs an even number of matrices, got k = {k}")));
    }
    let idx = LegIndexing::new(k, r);
    idx.check(sigma)?;
    // a subset mask with the highest block in F covers each split once
    let top = if k == 0 { 0 } else { 1usize << (k - 1) };
    for mask in 0..top.max(1) {
        if mask.count_ones() as usize != k / 2 {
            continue;
        }
        let in_e = |block: usize| mask >> block & 1 == 1;
        let ok = (0..idx.legs()).all(|m| in_e(m / r) != in_e(sigma.apply(m) / r));
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Distance in the transposition Cayley graph of `S_{kr}` to a fixed subset,
/// tabulated by lexicographic rank.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    degree: usize,
    dist: Vec<u8>,
}

impl DistanceTable {
    /// Multi-source BFS from every member of the set.
    pub fn build(degree: usize, member: impl Fn(&Permutation) -> bool) -> Result<Self> {
        caps::check("BFS degree", degree as u128, caps::current().bfs_degree)?;
        let size = factorial(degree) as usize;
        let mut dist = vec![u8::MAX; size];
        let mut queue = VecDeque::new();
        for (rank, sigma) in Permutation::enumerate(degree)?.enumerate() {
            if member(&sigma) {
                dist[rank] = 0;
                queue.push_back(sigma);
            }
        }
        let transpositions: Vec<Permutation> = (0..degree)
            .flat_map(|a| (a + 1..degree).map(move |b| Permutation::transposition(degree, a, b)))
            .collect();
        while let Some(sigma) = queue.pop_front() {
            let d = dist[sigma.lex_rank()];
            for xi in &transpositions {
                let next = sigma.compose(xi)?;
                let rank = next.lex_rank();
                if dist[rank] == u8::MAX {
                    dist[rank] = d + 1;
                    queue.push_back(next);
                }
            }
        }
        Ok(DistanceTable { degree, dist })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `None` when the set is empty.
    pub fn distance(&self, sigma: &Permutation) -> Result<Option<usize>> {
        if sigma.degree() != self.degree {
            return Err(Error::DegreeMismatch(sigma.degree(), self.degree));
        }
        let d = self.dist[sigma.lex_rank()];
        Ok((d != u8::MAX).then_some(d as usize))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaThetaDistance {
    pub sigma: String,
    pub dist_gamma: usize,
    /// Undefined for odd `k`.
    pub dist_theta: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schatten {
    One,
    Two,
    Infinity,
}

pub fn schatten_norm(a: &DenseOperator, which: Schatten) -> f64 {
    let s = a.singular_values();
    match which {
        Schatten::One => s.iter().sum(),
        Schatten::Two => s.iter().map(|x| x * x).sum::<f64>().sqrt(),
        Schatten::Infinity => s.first().copied().unwrap_or(0.0),
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub lhs: f64,
    pub bound1: f64,
    pub bound_inf: f64,
    pub bound2: Option<f64>,
    /// `(bound − lhs) / bound`, and likewise below.
    pub slack1: f64,
    pub slack_inf: f64,
    pub slack2: Option<f64>,
    pub distances: GammaThetaDistance,
}

impl BoundReport {
    pub fn violations(&self) -> usize {
        [Some(self.slack1), Some(self.slack_inf), self.slack2]
            .into_iter()
            .flatten()
            .filter(|&s| s < -REL_TOL)
            .count()
    }
}

/// Distance tables to Γ and Θ for one `(k, r)`, built once and shared.
#[derive(Debug, Clone)]
pub struct BoundChecker {
    indexing: LegIndexing,
    gamma: DistanceTable,
    theta: Option<DistanceTable>,
}

impl BoundChecker {
    pub fn new(k: usize, r: usize) -> Result<Self> {
        if k == 0 || r == 0 {
            return Err(Error::Precondition("bound tables need k ≥ 1 and r ≥ 1".into()));
        }
        let degree = k * r;
        let gamma = DistanceTable::build(degree, |s| in_gamma(s, k, r).unwrap_or(false))?;
        let theta = if k.is_multiple_of(2) {
            Some(DistanceTable::build(degree, |s| in_theta(s, k, r).unwrap_or(false))?)
        } else {
            None
        };
        Ok(BoundChecker {
            indexing: LegIndexing::new(k, r),
            gamma,
            theta,
        })
    }

    pub fn k(&self) -> usize {
        self.indexing.k
    }

    pub fn r(&self) -> usize {
        self.indexing.r
    }

    pub fn distances(&self, sigma: &Permutation) -> Result<GammaThetaDistance> {
        let dist_gamma = self.gamma.distance(sigma)?.expect("Γ is nonempty");
        let dist_theta = match &self.theta {
            Some(t) => Some(t.distance(sigma)?.expect("Θ is nonempty for even k")),
            None => None,
        };
        Ok(GammaThetaDistance {
            sigma: sigma.to_string(),
            dist_gamma,
            dist_theta,
        })
    }

    /// Evaluates all applicable bounds; a relative violation above `1e−9`
    /// is an error.
    pub fn verify(&self, sigma: &Permutation, matrices: &[DenseOperator]) -> Result<BoundReport> {
        let (k, r) = (self.k(), self.r());
        if matrices.len() != k {
            return Err(Error::DimensionMismatch(format!("{} matrices, expected {k}", matrices.len())));
        }
        if matrices.iter().any(|m| m.num_legs() != r) {
            return Err(Error::DimensionMismatch(format!("every matrix needs {r} legs")));
        }
        let n = matrices[0].leg_dim() as f64;
        let distances = self.distances(sigma)?;
        let lhs = generalized_trace(sigma, matrices)?.norm();
        let prod = |w: Schatten| matrices.iter().map(|a| schatten_norm(a, w)).product::<f64>();
        let bound1 = prod(Schatten::One);
        let bound_inf = n.powi((r + distances.dist_gamma) as i32) * prod(Schatten::Infinity);
        let bound2 = distances.dist_theta.map(|d| n.powi(d as i32) * prod(Schatten::Two));
        let slack = |b: f64| if b > 0.0 { (b - lhs) / b } else if lhs == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        let report = BoundReport {
            lhs,
            bound1,
            bound_inf,
            bound2,
            slack1: slack(bound1),
            slack_inf: slack(bound_inf),
            slack2: bound2.map(slack),
            distances,
        };
        if report.violations() > 0 {
            return Err(Error::BoundViolation(format!(
                "σ = {}: lhs {lhs:e}, bounds {bound1:e} / {bound_inf:e} / {bound2:?}",
                report.distances.sigma
            )));
        }
        Ok(report)
    }

    /// Ginibre matrices and a uniform `σ`.
    pub fn random_trial<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<BoundReport> {
        let degree = self.indexing.legs();
        let sigma = Permutation::from_lex_rank(degree, rng.random_range(0..factorial(degree) as usize));
        let matrices = (0..self.k())
            .map(|_| ginibre(n, self.r(), rng))
            .collect::<Result<Vec<_>>>()?;
        self.verify(&sigma, &matrices)
    }
}

pub fn ginibre<R: Rng + ?Sized>(n: usize, legs: usize, rng: &mut R) -> Result<DenseOperator> {
    let d = n.pow(legs as u32);
    let m = DMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    DenseOperator::from_matrix(n, plain_labels(legs), m)
}

/// For `σ ∈ Γ`, the ordering `(b_j, ρ_j)` with
/// `Tr_σ(A_1..A_k) = Tr[A_{b_0} P_{ρ_0} A_{b_1} P_{ρ_1} ⋯]`.
pub fn gamma_factorization(sigma: &Permutation, k: usize, r: usize) -> Result<Option<Vec<(usize, Permutation)>>> {
    if !in_gamma(sigma, k, r)? {
        return Ok(None);
    }
    let idx = LegIndexing::new(k, r);
    let blocks = idx.block_map(sigma).expect("Γ preserves blocks");
    let mut pre = vec![0; k];
    for (i, &c) in blocks.iter().enumerate() {
        pre[c] = i;
    }
    let within = |i: usize| {
        Permutation::from_images((0..r).map(|x| sigma.apply(idx.join(i, x)) % r).collect()).expect("block bijection")
    };
    let mut out = Vec::with_capacity(k);
    let mut b = 0;
    for _ in 0..k {
        let next = pre[b];
        out.push((b, within(next)));
        b = next;
    }
    Ok(Some(out))
}
