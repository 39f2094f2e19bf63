//! Unitary Weingarten function and the Möbius function on `S_p`.
//!
//! `Wg(n, ·)` is the convolution inverse of `σ ↦ n^{#σ}` in the group algebra
//! of `S_p`. Because both functions are central, the `p! × p!` system collapses
//! to one unknown per conjugacy class; that system is solved here in exact
//! rational arithmetic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::caps;
use crate::error::{Error, Result};
use crate::symgroup::{CycleType, Permutation};

/// Value of the Möbius function of the non-crossing partition lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MobiusValue(pub i64);

/// `Catalan(m) = C(2m, m) / (m + 1)`.
pub fn catalan(m: usize) -> i64 {
    let mut c: i64 = 1;
    for i in 0..m as i64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// Product over cycles of `(-1)^{len-1} Catalan(len-1)`.
pub fn mobius(sigma: &Permutation) -> MobiusValue {
    MobiusValue(
        sigma
            .cycle_type()
            .parts()
            .iter()
            .map(|&len| {
                let sign = if len % 2 == 1 { 1 } else { -1 };
                sign * catalan(len - 1)
            })
            .product(),
    )
}

/// Leading-order term `n^{-(p + |σ|)} Mob(σ)`.
pub fn wg_asymptotic(n: u64, sigma: &Permutation) -> f64 {
    let exponent = (sigma.degree() + sigma.length()) as i32;
    mobius(sigma).0 as f64 * (n as f64).powi(-exponent)
}

/// Exact `Wg(n, ·)` on `S_p`, one rational per cycle type.
#[derive(Debug, Clone)]
pub struct WeingartenTable {
    p: usize,
    n: u64,
    values: BTreeMap<CycleType, BigRational>,
}

impl WeingartenTable {
    pub fn new(p: usize, n: u64) -> Result<Self> {
        caps::check("Weingarten degree", p as u128, caps::current().wg_degree)?;
        if (n as u128) < p as u128 || n == 0 {
            return Err(Error::Singular(format!(
                "Gram matrix n^#(τ⁻¹π) on S_{p} is singular for n = {n} < p"
            )));
        }
        let classes = CycleType::all(p);
        let index: BTreeMap<&CycleType, usize> =
            classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let n_big = BigInt::from(n);
        let powers: Vec<BigInt> = (0..=p).map(|e| num_traits::pow(n_big.clone(), e)).collect();

        // row μ: Σ_λ w_λ Σ_{τ ∈ C_λ} n^{#(τ⁻¹ π_μ)} = δ_{μ, id}
        let elements: Vec<(Permutation, usize)> = Permutation::enumerate(p)?
            .map(|t| {
                let cls = index[&t.cycle_type()];
                (t.inverse(), cls)
            })
            .collect();
        let m = classes.len();
        let mut system = vec![vec![BigInt::zero(); m]; m];
        for (mu, class) in classes.iter().enumerate() {
            let rep = class.representative();
            for (tau_inv, lambda) in &elements {
                let c = tau_inv.compose(&rep)?.num_cycles();
                system[mu][*lambda] += &powers[c];
            }
        }
        let identity_class = index[&CycleType::all(p).pop().unwrap()];
        let mut rhs = vec![BigRational::zero(); m];
        rhs[identity_class] = BigRational::one();
        let matrix: Vec<Vec<BigRational>> = system
            .into_iter()
            .map(|row| row.into_iter().map(BigRational::from_integer).collect())
            .collect();
        let solution = solve_rational(matrix, rhs)?;
        Ok(WeingartenTable {
            p,
            n,
            values: classes.into_iter().zip(solution).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn get(&self, sigma: &Permutation) -> Result<&BigRational> {
        if sigma.degree() != self.p {
            return Err(Error::DegreeMismatch(sigma.degree(), self.p));
        }
        Ok(&self.values[&sigma.cycle_type()])
    }

    pub fn by_class(&self) -> impl Iterator<Item = (&CycleType, &BigRational)> {
        self.values.iter()
    }
}

/// `Wg(n, σ)` exactly.
pub fn wg_exact(n: u64, sigma: &Permutation) -> Result<BigRational> {
    WeingartenTable::new(sigma.degree(), n)?.get(sigma).cloned()
}

/// Lossy conversion used for ratios and plots.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator and denominator may both overflow f64 separately
        let shift = q.denom().bits().max(q.numer().bits()).saturating_sub(900);
        let num = (q.numer() >> shift).to_f64().unwrap();
        let den = (q.denom() >> shift).to_f64().unwrap();
        num / den
    })
}

/// Gaussian elimination with exact pivots.
fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Singular("class-collapsed Weingarten system".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for j in col..m {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for row in 0..m {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for j in col..m {
                let delta = &factor * &a[col][j];
                a[row][j] -= delta;
            }
            let delta = &factor * &b[col];
            b[row] -= delta;
        }
    }
    Ok(b)
}
