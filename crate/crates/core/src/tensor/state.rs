use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::caps;
use crate::error::{Error, Result};
use crate::partial_perm::PartialPermutation;
use crate::symgroup::Permutation;

use super::operator::{checked_dim, decode, top_bottom_labels, DenseOperator, Leg, C64};

const NORM_TOL: f64 = 1e-12;

/// Unit vector in `(C^n)^{⊗2r}` with legs ordered `[1..r, T], [1..r, B]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    leg_dim: usize,
    labels: Vec<Leg>,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(leg_dim: usize, labels: Vec<Leg>, amplitudes: DVector<C64>) -> Result<Self> {
        let dim = checked_dim(leg_dim, labels.len(), caps::current().state_dim, "state dimension")?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for dimension {dim}", amplitudes.len())));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Precondition(format!("state has norm {norm}")));
        }
        Ok(PureState { leg_dim, labels, amplitudes })
    }

    /// `n^{-1/2} Σ_i e_i^{⊗2r}`.
    pub fn ghz(n: usize, r: usize) -> Result<Self> {
        let labels = top_bottom_labels(r);
        let dim = checked_dim(n, 2 * r, caps::current().state_dim, "state dimension")?;
        let mut amp = DVector::zeros(dim);
        let stride: usize = (0..2 * r).map(|l| n.pow(l as u32)).sum();
        let c = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        for i in 0..n {
            amp[i * stride] = c;
        }
        Self::new(n, labels, amp)
    }

    /// `⊗_x Ω` with `Ω` maximally entangled between `[x, T]` and `[π(x), B]`.
    pub fn bell_product(n: usize, r: usize, pi: &Permutation) -> Result<Self> {
        if pi.degree() != r {
            return Err(Error::DegreeMismatch(pi.degree(), r));
        }
        let labels = top_bottom_labels(r);
        let dim = checked_dim(n, 2 * r, caps::current().state_dim, "state dimension")?;
        let mut amp = DVector::zeros(dim);
        let c = C64::new((n as f64).powf(-(r as f64) / 2.0), 0.0);
        let legs = 2 * r;
        let place = |l: usize| n.pow((legs - 1 - l) as u32);
        // one amplitude per choice of r shared digits
        for t in 0..n.pow(r as u32) {
            let digits = decode(t, n, r);
            let idx: usize = (0..r)
                .map(|x| digits[x] * (place(x) + place(r + pi.apply(x))))
                .sum();
            amp[idx] = c;
        }
        Self::new(n, labels, amp)
    }

    /// A single computational basis vector.
    pub fn product_basis(n: usize, digits: &[usize]) -> Result<Self> {
        if !digits.len().is_multiple_of(2) || digits.iter().any(|&d| d >= n) {
            return Err(Error::Precondition("product state needs 2r digits below n".into()));
        }
        let r = digits.len() / 2;
        let dim = checked_dim(n, 2 * r, caps::current().state_dim, "state dimension")?;
        let mut amp = DVector::zeros(dim);
        amp[super::operator::encode(digits, n)] = C64::new(1.0, 0.0);
        Self::new(n, top_bottom_labels(r), amp)
    }

    /// Uniformly random unit vector.
    pub fn random<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Self> {
        let dim = checked_dim(n, 2 * r, caps::current().state_dim, "state dimension")?;
        let mut amp = DVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let norm = amp.norm();
        amp /= C64::new(norm, 0.0);
        Self::new(n, top_bottom_labels(r), amp)
    }

    pub fn leg_dim(&self) -> usize {
        self.leg_dim
    }

    pub fn num_legs(&self) -> usize {
        self.labels.len()
    }

    /// `r` for a state on `2r` legs.
    pub fn r(&self) -> usize {
        self.labels.len() / 2
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, op: &DenseOperator) -> Result<C64> {
        if op.leg_dim() != self.leg_dim || op.num_legs() != self.num_legs() {
            return Err(Error::DimensionMismatch("operator and state spaces differ".into()));
        }
        Ok(self.amplitudes.dotc(&(op.matrix() * &self.amplitudes)))
    }

    /// `⟨ψ|T̃_β|ψ⟩` by applying one Bell factor at a time to the vector.
    pub fn t_overlap(&self, beta: &PartialPermutation) -> Result<f64> {
        let r = self.r();
        if beta.r() != r {
            return Err(Error::DimensionMismatch(format!("β on {} points for a state with r = {r}", beta.r())));
        }
        let mut v = self.amplitudes.clone();
        for (x, y) in beta.pairs() {
            v = apply_bell(&v, self.leg_dim, 2 * r, x, r + y);
        }
        let val = self.amplitudes.dotc(&v).re;
        Ok(val * (self.leg_dim as f64).powi(-(beta.dom_size() as i32)))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn to_density(&self) -> Result<DenseOperator> {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DenseOperator::from_matrix(self.leg_dim, self.labels.clone(), m)
    }
}

/// Applies the un-normalized Bell operator on legs `a`, `b` to `v`.
pub(crate) fn apply_bell(v: &DVector<C64>, n: usize, legs: usize, a: usize, b: usize) -> DVector<C64> {
    let (pa, pb) = (n.pow((legs - 1 - a) as u32), n.pow((legs - 1 - b) as u32));
    let digit = |idx: usize, p: usize| (idx / p) % n;
    let mut out = DVector::zeros(v.len());
    for idx in 0..v.len() {
        let (da, db) = (digit(idx, pa), digit(idx, pb));
        if da != db || da != 0 {
            continue;
        }
        // idx is the representative with both digits zero
        let s: C64 = (0..n).map(|m| v[idx + m * (pa + pb)]).sum();
        for m in 0..n {
            out[idx + m * (pa + pb)] = s;
        }
    }
    out
}
