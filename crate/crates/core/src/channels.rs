//! Haar-random isometries, their complementary channels and Monte Carlo
//! estimates for outputs of `(Φ^C)^{⊗r} ⊗ (Φ̄^C)^{⊗r}`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::caps;
use crate::diagram::DiagramElement;
use crate::error::{Error, Result};
use crate::partial_perm::PartialPermutation;
use crate::stats;
use crate::symgroup::Permutation;
use crate::tensor::constructions::r_operator;
use crate::tensor::{top_bottom_labels, DenseOperator, Leg, PureState, C64};

/// Deterministic generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// An isometry `V: C^n → C^k ⊗ C^n`; row `e·n + s` is environment `e`, system `s`.
#[derive(Debug, Clone)]
pub struct ChannelInstance {
    n: usize,
    k: usize,
    seed: u64,
    v: DMatrix<C64>,
}

/// First `n` columns of a Haar unitary on `C^{kn}`.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn sample_channel(n: usize, k: usize, seed: u64) -> Result<ChannelInstance> {
    sample_channel_indexed(n, k, seed, 0)
}

pub fn sample_channel_indexed(n: usize, k: usize, seed: u64, index: u64) -> Result<ChannelInstance> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition("channel dimensions must be positive".into()));
    }
    caps::check("channel n·k", (n * k) as u128, caps::current().channel_nk)?;
    let mut rng = sample_rng(seed, index);
    Ok(ChannelInstance {
        n,
        k,
        seed,
        v: haar_isometry(k * n, n, &mut rng),
    })
}

impl ChannelInstance {
    pub fn from_isometry(n: usize, k: usize, v: DMatrix<C64>) -> Result<Self> {
        if v.nrows() != k * n || v.ncols() != n {
            return Err(Error::DimensionMismatch(format!("isometry must be {}x{n}", k * n)));
        }
        Ok(ChannelInstance { n, k, seed: 0, v })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn isometry(&self) -> &DMatrix<C64> {
        &self.v
    }

    /// `‖V†V − I‖_∞`.
    pub fn isometry_defect(&self) -> f64 {
        let g = self.v.adjoint() * &self.v;
        (g - DMatrix::<C64>::identity(self.n, self.n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn check_input(&self, rho: &DMatrix<C64>) -> Result<()> {
        if rho.nrows() != self.n || rho.ncols() != self.n {
            return Err(Error::DimensionMismatch(format!("input must be {0}x{0}", self.n)));
        }
        Ok(())
    }

    /// `Φ(ρ) = Tr_{C^k}(VρV†)`.
    pub fn output(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        self.check_input(rho)?;
        let w = &self.v * rho * self.v.adjoint();
        let n = self.n;
        Ok(DMatrix::from_fn(n, n, |s, t| (0..self.k).map(|e| w[(e * n + s, e * n + t)]).sum()))
    }

    /// `Φ^C(ρ) = Tr_{C^n}(VρV†)`.
    pub fn complementary_output(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        self.check_input(rho)?;
        let w = &self.v * rho * self.v.adjoint();
        let n = self.n;
        Ok(DMatrix::from_fn(self.k, self.k, |e, f| (0..n).map(|s| w[(e * n + s, f * n + s)]).sum()))
    }

    fn v_entry(&self, e: usize, s: usize, i: usize, conj: bool) -> C64 {
        let z = self.v[(e * self.n + s, i)];
        if conj {
            z.conj()
        } else {
            z
        }
    }

    /// `Z = [(Φ^C)^{⊗r} ⊗ (Φ̄^C)^{⊗r}](ψψ*)` for a dense input.
    pub fn conjugate_pair_output(&self, psi: &PureState) -> Result<DenseOperator> {
        if psi.leg_dim() != self.n {
            return Err(Error::DimensionMismatch("state and channel dimensions differ".into()));
        }
        let legs = psi.num_legs();
        let r = psi.r();
        let (n, k) = (self.n, self.k);
        // contract V (or V̄) into one leg at a time; leg dims go from n to k·n
        let mut data: Vec<C64> = psi.amplitudes().iter().copied().collect();
        let mut dims = vec![n; legs];
        for leg in 0..legs {
            let conj = leg >= r;
            let outer: usize = dims[..leg].iter().product();
            let inner: usize = dims[leg + 1..].iter().product();
            let mut next = vec![C64::new(0.0, 0.0); outer * k * n * inner];
            for o in 0..outer {
                for i in 0..n {
                    let src = &data[(o * n + i) * inner..(o * n + i + 1) * inner];
                    for row in 0..k * n {
                        let w = self.v_entry(row / n, row % n, i, conj);
                        if w == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let dst = &mut next[(o * k * n + row) * inner..(o * k * n + row + 1) * inner];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
            }
            data = next;
            dims[leg] = k * n;
        }
        // M[(e_1..e_L), (s_1..s_L)]
        let rows = k.pow(legs as u32);
        let cols = n.pow(legs as u32);
        let mut m = DMatrix::<C64>::zeros(rows, cols);
        for (idx, z) in data.iter().enumerate() {
            let (mut e_idx, mut s_idx, mut rest) = (0, 0, idx);
            let mut pe = 1;
            let mut ps = 1;
            for _ in 0..legs {
                let d = rest % (k * n);
                rest /= k * n;
                e_idx += (d / n) * pe;
                s_idx += (d % n) * ps;
                pe *= k;
                ps *= n;
            }
            m[(e_idx, s_idx)] = *z;
        }
        let z = &m * m.adjoint();
        DenseOperator::from_matrix(k, top_bottom_labels(r), z)
    }

    /// `(Φ^C ⊗ Φ̄^C)(ΩΩ*)` for the maximally entangled `Ω ∈ C^n ⊗ C^n`, on `k²` dims.
    fn bell_pair_output(&self) -> DMatrix<C64> {
        let (n, k) = (self.n, self.k);
        let norm = 1.0 / (n as f64).sqrt();
        // M[(e,f),(s,t)] = n^{-1/2} Σ_i V[(e,s),i] conj(V[(f,t),i]) = (V V†)[(e,s),(f,t)] / √n
        let vv = &self.v * self.v.adjoint();
        let mut m = DMatrix::<C64>::zeros(k * k, n * n);
        for e in 0..k {
            for f in 0..k {
                for s in 0..n {
                    for t in 0..n {
                        m[(e * k + f, s * n + t)] = vv[(e * n + s, f * n + t)] * norm;
                    }
                }
            }
        }
        &m * m.adjoint()
    }

    /// Output for `⊗_x Ω_{[x,T],[π(x),B]}` without forming the `n^{2r}` input.
    pub fn bell_product_output(&self, pi: &Permutation) -> Result<DenseOperator> {
        let r = pi.degree();
        let k = self.k;
        let pair = self.bell_pair_output();
        let mut labels = Vec::with_capacity(2 * r);
        let mut z: Option<DenseOperator> = None;
        for x in 0..r {
            labels.push(Leg::top(x));
            labels.push(Leg::bottom(pi.apply(x)));
            let op = DenseOperator::from_matrix(k, vec![Leg::top(x), Leg::bottom(pi.apply(x))], pair.clone())?;
            z = Some(match z {
                None => op,
                Some(acc) => acc.kron(&op)?,
            });
        }
        let z = z.ok_or_else(|| Error::Precondition("r must be positive".into()))?;
        let target = top_bottom_labels(r);
        let order: Vec<usize> = target.iter().map(|l| labels.iter().position(|m| m == l).unwrap()).collect();
        z.reorder_legs(&order)
    }

    /// Output for the GHZ input `n^{-1/2} Σ_i e_i^{⊗2r}`.
    pub fn ghz_output(&self, r: usize) -> Result<DenseOperator> {
        let (n, k) = (self.n, self.k);
        let legs = 2 * r;
        let dim = k.pow(legs as u32);
        caps::check("operator dimension", dim as u128, caps::current().operator_dim)?;
        // G[(e,f)][(i,j)] = Σ_s V[(e,s),i] conj(V[(f,s),j])
        let mut g = vec![DMatrix::<C64>::zeros(n, n); k * k];
        for e in 0..k {
            for f in 0..k {
                let ve = self.v.rows(e * n, n);
                let vf = self.v.rows(f * n, n);
                g[e * k + f] = ve.transpose() * vf.map(|z| z.conj());
            }
        }
        let mut z = DMatrix::<C64>::zeros(dim, dim);
        let place: Vec<usize> = (0..legs).map(|l| k.pow((legs - 1 - l) as u32)).collect();
        for row in 0..dim {
            for col in 0..dim {
                let mut prod = DMatrix::<C64>::from_element(n, n, C64::new(1.0, 0.0));
                for l in 0..legs {
                    let (e, f) = ((row / place[l]) % k, (col / place[l]) % k);
                    let gl = &g[e * k + f];
                    if l < r {
                        prod.component_mul_assign(gl);
                    } else {
                        prod.component_mul_assign(&gl.map(|c| c.conj()));
                    }
                }
                z[(row, col)] = prod.sum() / n as f64;
            }
        }
        DenseOperator::from_matrix(k, top_bottom_labels(r), z)
    }

    /// Output for a computational basis input with per-leg digits.
    pub fn product_output(&self, digits: &[usize]) -> Result<DenseOperator> {
        let r = digits.len() / 2;
        let (n, k) = (self.n, self.k);
        if !digits.len().is_multiple_of(2) || digits.iter().any(|&d| d >= n) {
            return Err(Error::Precondition("product input needs 2r digits below n".into()));
        }
        let mut acc: Option<DenseOperator> = None;
        for (l, &d) in digits.iter().enumerate() {
            let conj = l >= r;
            let m = DMatrix::from_fn(k, k, |e, f| {
                (0..n).map(|s| self.v_entry(e, s, d, conj) * self.v_entry(f, s, d, conj).conj()).sum()
            });
            let label = if l < r { Leg::top(l) } else { Leg::bottom(l - r) };
            let op = DenseOperator::from_matrix(k, vec![label], m)?;
            acc = Some(match acc {
                None => op,
                Some(a) => a.kron(&op)?,
            });
        }
        acc.ok_or_else(|| Error::Precondition("r must be positive".into()))
    }
}

/// Input families for the conjugate-pair simulation.
#[derive(Debug, Clone)]
pub enum InputSpec {
    Bell(Permutation),
    Ghz { r: usize },
    Product(Vec<usize>),
    /// A uniformly random unit vector drawn once from `seed`.
    Random { r: usize, seed: u64 },
    Dense(PureState),
}

impl InputSpec {
    pub fn r(&self) -> usize {
        match self {
            InputSpec::Bell(p) => p.degree(),
            InputSpec::Ghz { r } | InputSpec::Random { r, .. } => *r,
            InputSpec::Product(d) => d.len() / 2,
            InputSpec::Dense(s) => s.r(),
        }
    }

    /// Parses `bell`, `bell:(1 2)`, `ghz`, `product`, `product:1,1,2,2` or `random`.
    pub fn parse(text: &str, r: usize, seed: u64) -> Result<Self> {
        let (kind, arg) = match text.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (text.trim(), None),
        };
        match kind {
            "bell" => Ok(InputSpec::Bell(match arg {
                Some(p) => Permutation::parse(p, Some(r))?,
                None => Permutation::identity(r),
            })),
            "ghz" => Ok(InputSpec::Ghz { r }),
            "product" => Ok(InputSpec::Product(match arg {
                Some(list) => list
                    .split(',')
                    .map(|d| {
                        d.trim()
                            .parse::<usize>()
                            .ok()
                            .filter(|&v| v >= 1)
                            .map(|v| v - 1)
                            .ok_or_else(|| Error::Parse(format!("bad digit {d:?}")))
                    })
                    .collect::<Result<_>>()?,
                None => vec![0; 2 * r],
            })),
            "random" => Ok(InputSpec::Random { r, seed }),
            _ => Err(Error::Parse(format!("unknown input {text:?}"))),
        }
    }

    /// The dense input vector, when one is needed.
    fn dense_state(&self, n: usize) -> Result<Option<PureState>> {
        match self {
            InputSpec::Random { r, seed } => {
                let mut rng = sample_rng(*seed, u64::MAX);
                Ok(Some(PureState::random(n, *r, &mut rng)?))
            }
            InputSpec::Dense(s) => Ok(Some(s.clone())),
            _ => Ok(None),
        }
    }

    /// `⟨ψ|T̃_β|ψ⟩` at dimension `n`.
    pub fn overlap(&self, beta: &PartialPermutation, n: usize) -> Result<f64> {
        let nf = n as f64;
        match self {
            InputSpec::Bell(pi) => {
                // the input projector is T̃_π: overlap = Tr(T̃_β T̃_π)
                let r = pi.degree();
                let (loops, prod) = DiagramElement::t(beta).multiply(&DiagramElement::t(&PartialPermutation::from_permutation(pi)))?;
                let exponent = (loops + prod.trace_loops()) as i32 - (beta.dom_size() + r) as i32;
                Ok(nf.powi(exponent))
            }
            InputSpec::Ghz { r } => Ok(if beta.is_full() && *r > 0 {
                nf.powi(1 - *r as i32)
            } else {
                nf.powi(-(beta.dom_size() as i32))
            }),
            InputSpec::Product(d) => {
                let r = d.len() / 2;
                Ok(beta
                    .pairs()
                    .map(|(x, y)| if d[x] == d[r + y] { 1.0 / nf } else { 0.0 })
                    .product())
            }
            _ => self.dense_state(n)?.unwrap().t_overlap(beta),
        }
    }

    /// Overlaps for every `β` of the input's `r`.
    pub fn a_map(&self, n: usize) -> Result<BTreeMap<PartialPermutation, f64>> {
        PartialPermutation::enumerate_all(self.r())?
            .into_iter()
            .map(|b| {
                let v = self.overlap(&b, n)?;
                Ok((b, v))
            })
            .collect()
    }
}

/// Output of one sampled channel for `input`.
pub fn output_for(ch: &ChannelInstance, input: &InputSpec, dense: Option<&PureState>) -> Result<DenseOperator> {
    match input {
        InputSpec::Bell(pi) => ch.bell_product_output(pi),
        InputSpec::Ghz { r } => ch.ghz_output(*r),
        InputSpec::Product(d) => ch.product_output(d),
        _ => ch.conjugate_pair_output(dense.expect("dense input prepared")),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Per-sample outputs `Z_n`, in sample order; sample `i` uses stream `i`.
pub fn sample_outputs(cfg: &SimulationConfig, input: &InputSpec) -> Result<Vec<DenseOperator>> {
    let dense = input.dense_state(cfg.n)?;
    (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let ch = sample_channel_indexed(cfg.n, cfg.k, cfg.seed, i)?;
            output_for(&ch, input, dense.as_ref())
        })
        .collect()
}

/// `Tr Z^p`.
pub fn trace_power(z: &DenseOperator, p: usize) -> f64 {
    if p == 0 {
        return z.dim() as f64;
    }
    let mut acc = z.matrix().clone();
    for _ in 1..p {
        acc = &acc * z.matrix();
    }
    acc.trace().re
}

#[derive(Debug, Clone)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub values: Vec<f64>,
}

/// Monte Carlo estimate of `E Tr Z_n^p`.
pub fn empirical_moment(cfg: &SimulationConfig, p: usize, input: &InputSpec) -> Result<MomentEstimate> {
    let values: Vec<f64> = sample_outputs(cfg, input)?.iter().map(|z| trace_power(z, p)).collect();
    let (mean, stderr) = stats::mean_stderr(&values);
    Ok(MomentEstimate { mean, stderr, values })
}

/// `[i, x, T|B] ↦ i·2r + (B ? r : 0) + x`.
pub fn triple_index(i: usize, x: usize, bottom: bool, r: usize) -> usize {
    i * 2 * r + if bottom { r } else { 0 } + x
}

/// The permutation encoding the trace of the product of `p` copies.
pub fn gamma(p: usize, r: usize) -> Permutation {
    let mut img = vec![0; 2 * r * p];
    for i in 0..p {
        for x in 0..r {
            // top: [i] -> [i-1] cyclically; bottom: [i] -> [i+1] cyclically
            img[triple_index(i, x, false, r)] = triple_index((i + p - 1) % p, x, false, r);
            img[triple_index(i, x, true, r)] = triple_index((i + 1) % p, x, true, r);
        }
    }
    Permutation::from_images(img).expect("gamma is a permutation")
}

/// The product of transpositions `([i,x,T], [i,x,B])`.
pub fn delta(p: usize, r: usize) -> Permutation {
    let mut img: Vec<usize> = (0..2 * r * p).collect();
    for i in 0..p {
        for x in 0..r {
            let (t, b) = (triple_index(i, x, false, r), triple_index(i, x, true, r));
            img[t] = b;
            img[b] = t;
        }
    }
    Permutation::from_images(img).expect("delta is a permutation")
}

/// `α = Π_i Π_{x ∈ dom α_i} ([i,x,T], [i,α_i(x),B])`.
pub fn alpha_from_tuple(alphas: &[PartialPermutation], r: usize) -> Permutation {
    let mut img: Vec<usize> = (0..2 * r * alphas.len()).collect();
    for (i, a) in alphas.iter().enumerate() {
        for (x, y) in a.pairs() {
            let (t, b) = (triple_index(i, x, false, r), triple_index(i, y, true, r));
            img[t] = b;
            img[b] = t;
        }
    }
    Permutation::from_images(img).expect("alpha is a permutation")
}

/// Leading-order `E Tr Z_n^p` from the overlaps `a` (missing entries are 0).
pub fn moment_formula(p: usize, r: usize, k: usize, a: &BTreeMap<PartialPermutation, f64>) -> Result<f64> {
    caps::check("moment p·r", (p * r) as u128, caps::current().moment_pr)?;
    let all = PartialPermutation::enumerate_all(r)?;
    let kf = k as f64;
    // b(α) = Σ_{β ≥ α} a_β (-1/k)^{|β| - |α|}
    let b: Vec<f64> = all
        .iter()
        .map(|alpha| {
            all.iter()
                .filter(|beta| alpha.leq_unchecked(beta))
                .map(|beta| {
                    a.get(beta).copied().unwrap_or(0.0) * (-1.0 / kf).powi((beta.dom_size() - alpha.dom_size()) as i32)
                })
                .sum()
        })
        .collect();
    let g = gamma(p, r);
    let mut total = 0.0;
    let mut idx = vec![0usize; p];
    loop {
        let coeff: f64 = idx.iter().map(|&i| b[i]).product();
        if coeff != 0.0 {
            let tuple: Vec<PartialPermutation> = idx.iter().map(|&i| all[i].clone()).collect();
            let alpha = alpha_from_tuple(&tuple, r);
            let len = alpha.inverse().compose(&g)?.length();
            total += coeff * kf.powi(-(len as i32));
        }
        let mut j = 0;
        loop {
            if j == p {
                return Ok(total);
            }
            idx[j] += 1;
            if idx[j] < all.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Leading term of `E Z_n`: `k^{-2r} Σ_β a_β R_β`.
pub fn expectation_formula(r: usize, k: usize, a: &BTreeMap<PartialPermutation, f64>) -> Result<DenseOperator> {
    let mut z = DenseOperator::zeros(k, top_bottom_labels(r))?;
    let scale = (k as f64).powi(-2 * r as i32);
    for (beta, &v) in a {
        if beta.r() != r {
            return Err(Error::DimensionMismatch(format!("β on {} points, expected {r}", beta.r())));
        }
        if v != 0.0 {
            z = z.add(&r_operator(beta, k)?.scale(v * scale))?;
        }
    }
    Ok(z)
}

/// Entrywise mean and standard error of a list of operators.
pub fn entrywise_mean(ops: &[DenseOperator]) -> Result<(DMatrix<C64>, DMatrix<f64>)> {
    let first = ops.first().ok_or_else(|| Error::InsufficientData("no samples".into()))?;
    let d = first.dim();
    let s = ops.len() as f64;
    let mut mean = DMatrix::<C64>::zeros(d, d);
    for z in ops {
        mean += z.matrix();
    }
    mean /= C64::new(s, 0.0);
    let mut var = DMatrix::<f64>::zeros(d, d);
    for z in ops {
        let diff = z.matrix() - &mean;
        var += diff.map(|c| c.norm_sqr());
    }
    let denom = (s - 1.0).max(1.0);
    let stderr = var.map(|v| (v / denom / s).sqrt());
    Ok((mean, stderr))
}

/// Eigenvalues of a Hermitian `k×k` output, descending.
pub fn spectrum(z: &DMatrix<C64>) -> Vec<f64> {
    let h = (z + z.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

/// Trace norm distance `½‖A − B‖₁` for Hermitian matrices.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    0.5 * spectrum(&(a - b)).iter().map(|l| l.abs()).sum::<f64>()
}

/// Rank-one density `xx*` for a unit vector.
pub fn pure_density(x: &DVector<C64>) -> DMatrix<C64> {
    x * x.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::constructions::z_alpha;

    fn full(r: usize) -> PartialPermutation {
        PartialPermutation::from_permutation(&Permutation::identity(r))
    }

    fn bell_a(r: usize) -> BTreeMap<PartialPermutation, f64> {
        InputSpec::Bell(Permutation::identity(r)).a_map(10).unwrap()
    }

    #[test]
    fn isometry_and_determinism() {
        let a = sample_channel(8, 3, 42).unwrap();
        assert!(a.isometry_defect() < 1e-10);
        let b = sample_channel(8, 3, 42).unwrap();
        assert_eq!(a.isometry(), b.isometry());
        let c = sample_channel_indexed(8, 3, 42, 1).unwrap();
        assert_ne!(a.isometry(), c.isometry());
        assert!(matches!(sample_channel(100, 10, 1), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn haar_columns_have_zero_mean() {
        let samples = 10_000;
        let mut mean = DMatrix::<C64>::zeros(4, 2);
        for i in 0..samples {
            mean += sample_channel_indexed(2, 2, 5, i).unwrap().isometry();
        }
        mean /= C64::new(samples as f64, 0.0);
        assert!(mean.iter().all(|z| z.norm() <= 5.0 / (samples as f64).sqrt()));
    }

    #[test]
    fn k1_channel_preserves_purity() {
        let ch = sample_channel(6, 1, 3).unwrap();
        let mut x = DVector::<C64>::zeros(6);
        x[2] = C64::new(1.0, 0.0);
        let out = ch.output(&pure_density(&x)).unwrap();
        let ev = spectrum(&out);
        assert!((ev[0] - 1.0).abs() < 1e-10 && ev[1].abs() < 1e-10);
        let comp = ch.complementary_output(&pure_density(&x)).unwrap();
        assert!((comp[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complementary_spectrum_matches() {
        let ch = sample_channel(8, 2, 9).unwrap();
        let mut rng = sample_rng(1, 0);
        let v = DVector::from_fn(8, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let v = &v / C64::new(v.norm(), 0.0);
        let rho = pure_density(&v);
        let a = spectrum(&ch.output(&rho).unwrap());
        let b = spectrum(&ch.complementary_output(&rho).unwrap());
        assert!((a[0] - b[0]).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8);
        assert!(a[2..].iter().all(|l| l.abs() < 1e-8));
        let mixed = DMatrix::<C64>::identity(8, 8) / C64::new(8.0, 0.0);
        assert!((ch.complementary_output(&mixed).unwrap().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn structured_outputs_match_dense_contraction() {
        let n = 3;
        let ch = sample_channel(n, 2, 17).unwrap();
        for r in 1..=2 {
            let ghz = PureState::ghz(n, r).unwrap();
            let a = ch.ghz_output(r).unwrap();
            let b = ch.conjugate_pair_output(&ghz).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
            for pi in Permutation::enumerate(r).unwrap() {
                let s = PureState::bell_product(n, r, &pi).unwrap();
                let a = ch.bell_product_output(&pi).unwrap();
                let b = ch.conjugate_pair_output(&s).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-12, "π={pi}");
            }
        }
        let digits = [0, 2, 1, 2];
        let s = PureState::product_basis(n, &digits).unwrap();
        assert!(ch.product_output(&digits).unwrap().max_abs_diff(&ch.conjugate_pair_output(&s).unwrap()) < 1e-12);
    }

    #[test]
    fn outputs_are_states() {
        let cfg = SimulationConfig { n: 5, k: 2, samples: 4, seed: 8 };
        for input in [
            InputSpec::Bell(Permutation::identity(2)),
            InputSpec::Ghz { r: 2 },
            InputSpec::Product(vec![0, 1, 2, 3]),
            InputSpec::Random { r: 1, seed: 3 },
        ] {
            for z in sample_outputs(&cfg, &input).unwrap() {
                assert!((z.trace().re - 1.0).abs() < 1e-10);
                assert!(z.is_psd());
            }
        }
    }

    #[test]
    fn structured_overlaps_match_dense_states() {
        let n = 3;
        let inputs = [
            (InputSpec::Bell(Permutation::parse("(1 2)", Some(2)).unwrap()), PureState::bell_product(n, 2, &Permutation::parse("(1 2)", Some(2)).unwrap()).unwrap()),
            (InputSpec::Ghz { r: 2 }, PureState::ghz(n, 2).unwrap()),
            (InputSpec::Product(vec![0, 1, 1, 2]), PureState::product_basis(n, &[0, 1, 1, 2]).unwrap()),
        ];
        for (spec, state) in &inputs {
            for beta in PartialPermutation::enumerate_all(2).unwrap() {
                assert!((spec.overlap(&beta, n).unwrap() - state.t_overlap(&beta).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gamma_and_delta_structure() {
        let g = gamma(3, 2);
        assert_eq!(g.apply(triple_index(0, 1, false, 2)), triple_index(2, 1, false, 2));
        assert_eq!(g.apply(triple_index(2, 0, true, 2)), triple_index(0, 0, true, 2));
        assert_eq!(gamma(1, 2), Permutation::identity(4));
        let d = delta(2, 2);
        assert_eq!(d.num_cycles(), 4);
        assert_eq!(d.apply(triple_index(1, 1, false, 2)), triple_index(1, 1, true, 2));
    }

    #[test]
    fn moment_formula_examples() {
        for r in 1..=3 {
            assert!((moment_formula(1, r, 2, &bell_a(r)).unwrap() - 1.0).abs() < 1e-12);
        }
        let a = bell_a(1);
        assert_eq!(moment_formula(2, 1, 2, &a).unwrap(), 0.4375);
        let c = z_alpha(&full(1), 2).unwrap();
        assert!((trace_power(&c, 2) - 0.4375).abs() < 1e-12);
        let trivial: BTreeMap<_, _> = [(PartialPermutation::empty(1), 1.0)].into();
        assert!((moment_formula(2, 1, 2, &trivial).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn moment_formula_is_trace_power_of_expectation() {
        // both are degree-p polynomials in the overlaps; compare on arbitrary a-maps
        let mut rng = sample_rng(4, 0);
        for (p, r, k) in [(2, 1, 2), (3, 1, 3), (4, 1, 2), (2, 2, 2), (2, 2, 3)] {
            for _ in 0..3 {
                let a: BTreeMap<_, _> = PartialPermutation::enumerate_all(r)
                    .unwrap()
                    .into_iter()
                    .map(|b| {
                        let v = if b.is_empty() { 1.0 } else { rng.random_range(0.0..1.0) };
                        (b, v)
                    })
                    .collect();
                let z = expectation_formula(r, k, &a).unwrap();
                let lhs = moment_formula(p, r, k, &a).unwrap();
                assert!((lhs - trace_power(&z, p)).abs() < 1e-12, "p={p} r={r} k={k}");
            }
        }
    }

    #[test]
    fn expectation_formula_examples() {
        let trivial: BTreeMap<_, _> = [(PartialPermutation::empty(2), 1.0)].into();
        let z = expectation_formula(2, 2, &trivial).unwrap();
        assert!(z.max_abs_diff(&DenseOperator::identity(2, top_bottom_labels(2)).unwrap().scale(1.0 / 16.0)) < 1e-15);
        let z = expectation_formula(1, 2, &bell_a(1)).unwrap();
        assert!(z.max_abs_diff(&z_alpha(&full(1), 2).unwrap()) < 1e-15);
    }

    #[test]
    fn moment_cap() {
        assert!(matches!(moment_formula(3, 2, 2, &bell_a(2)), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn input_parsing() {
        assert!(matches!(InputSpec::parse("bell:(1 2)", 2, 0).unwrap(), InputSpec::Bell(p) if !p.is_identity()));
        assert!(matches!(InputSpec::parse("product:1,2,1,2", 2, 0).unwrap(), InputSpec::Product(d) if d == vec![0, 1, 0, 1]));
        assert!(InputSpec::parse("nonsense", 1, 0).is_err());
    }
}
