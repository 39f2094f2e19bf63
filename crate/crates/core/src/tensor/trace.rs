use crate::caps;
use crate::error::{Error, Result};
use crate::symgroup::Permutation;

use super::operator::{DenseOperator, C64};

/// `Tr[(A_1 ⊗ … ⊗ A_k) P⊗_σ]` with matrix `i` on legs `i·r .. (i+1)·r`.
///
/// Summed directly over the `n^{kr}` input digit strings.
pub fn generalized_trace(sigma: &Permutation, matrices: &[DenseOperator]) -> Result<C64> {
    if matrices.is_empty() {
        return if sigma.degree() == 0 {
            Ok(C64::new(1.0, 0.0))
        } else {
            Err(Error::DegreeMismatch(sigma.degree(), 0))
        };
    }
    let n = matrices[0].leg_dim();
    let r = matrices[0].num_legs();
    if matrices.iter().any(|m| m.leg_dim() != n || m.num_legs() != r) {
        return Err(Error::DimensionMismatch("generalized trace needs matrices of equal shape".into()));
    }
    let total = matrices.len() * r;
    if sigma.degree() != total {
        return Err(Error::DegreeMismatch(sigma.degree(), total));
    }
    if total == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let terms = (n as u128).checked_pow(total as u32).unwrap_or(u128::MAX);
    caps::check("generalized trace terms", terms, caps::current().trace_terms)?;

    let block = n.pow(r as u32);
    let mut digits = vec![0usize; total];
    let mut out = vec![0usize; total];
    let mut acc = C64::new(0.0, 0.0);
    loop {
        for (m, &d) in digits.iter().enumerate() {
            out[sigma.apply(m)] = d;
        }
        let mut term = C64::new(1.0, 0.0);
        for (i, a) in matrices.iter().enumerate() {
            let row = digits[i * r..(i + 1) * r].iter().fold(0, |s, &d| s * n + d);
            let col = out[i * r..(i + 1) * r].iter().fold(0, |s, &d| s * n + d);
            debug_assert!(row < block && col < block);
            term *= a.matrix()[(row, col)];
            if term == C64::new(0.0, 0.0) {
                break;
            }
        }
        acc += term;
        let mut i = total;
        loop {
            if i == 0 {
                return Ok(acc);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < n {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" | "e" | "nats" => Ok(LogBase::Natural),
            "two" | "2" | "bits" => Ok(LogBase::Two),
            _ => Err(Error::Parse(format!("unknown log base {s:?}"))),
        }
    }
}

/// `-Σ λ log λ` over the eigenvalues of the hermitized operator.
pub fn von_neumann_entropy(rho: &DenseOperator, base: LogBase) -> Result<f64> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-6 {
        return Err(Error::TraceDeviation(tr.re - 1.0));
    }
    entropy_of_spectrum(&rho.hermitian_eigenvalues(), base)
}

/// Entropy of a probability vector given as eigenvalues; tiny negative values
/// are rounding noise and count as zero.
pub fn entropy_of_spectrum(eigenvalues: &[f64], base: LogBase) -> Result<f64> {
    let mut h = 0.0;
    for &l in eigenvalues {
        if l < -1e-8 {
            return Err(Error::NegativeEigenvalue(l));
        }
        if l > 0.0 {
            h -= l * base.log(l);
        }
    }
    Ok(h)
}
