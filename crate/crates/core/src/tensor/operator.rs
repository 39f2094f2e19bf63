use std::fmt;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::caps;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Which half of a `(C^n)^{⊗r} ⊗ (C^n)^{⊗r}` space a leg belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Top,
    Bottom,
}

/// A tensor factor `[x, T]` or `[x, B]`; `index` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Leg {
    pub index: usize,
    pub side: Side,
}

impl Leg {
    pub fn top(index: usize) -> Self {
        Leg { index, side: Side::Top }
    }

    pub fn bottom(index: usize) -> Self {
        Leg { index, side: Side::Bottom }
    }
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::Top => 'T',
            Side::Bottom => 'B',
        };
        write!(f, "{}{}", self.index + 1, s)
    }
}

impl std::str::FromStr for Leg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, side) = s.split_at(s.len().saturating_sub(1));
        let side = match side {
            "T" => Side::Top,
            "B" => Side::Bottom,
            _ => return Err(Error::InvalidLeg(s.to_string())),
        };
        let index = num
            .parse::<usize>()
            .ok()
            .filter(|&x| x >= 1)
            .ok_or_else(|| Error::InvalidLeg(s.to_string()))?;
        Ok(Leg { index: index - 1, side })
    }
}

/// `[1,T] .. [r,T], [1,B] .. [r,B]`.
pub fn top_bottom_labels(r: usize) -> Vec<Leg> {
    (0..r).map(Leg::top).chain((0..r).map(Leg::bottom)).collect()
}

/// `r` top legs, used for the plain matrices of a generalized trace.
pub fn plain_labels(r: usize) -> Vec<Leg> {
    (0..r).map(Leg::top).collect()
}

/// Dense complex matrix on a labeled tensor product of equal-dimension legs.
///
/// Basis vectors are indexed in row-major mixed radix: the first label is
/// the most significant digit.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    leg_dim: usize,
    labels: Vec<Leg>,
    matrix: DMatrix<C64>,
}

pub(crate) fn checked_dim(leg_dim: usize, legs: usize, cap: usize, what: &'static str) -> Result<usize> {
    let dim = (leg_dim as u128).checked_pow(legs as u32).unwrap_or(u128::MAX);
    caps::check(what, dim, cap)?;
    Ok(dim as usize)
}

impl DenseOperator {
    pub fn zeros(leg_dim: usize, labels: Vec<Leg>) -> Result<Self> {
        let dim = checked_dim(leg_dim, labels.len(), caps::current().operator_dim, "operator dimension")?;
        Ok(DenseOperator {
            leg_dim,
            labels,
            matrix: DMatrix::zeros(dim, dim),
        })
    }

    pub fn identity(leg_dim: usize, labels: Vec<Leg>) -> Result<Self> {
        let mut op = Self::zeros(leg_dim, labels)?;
        op.matrix.fill_with_identity();
        Ok(op)
    }

    pub fn from_matrix(leg_dim: usize, labels: Vec<Leg>, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = checked_dim(leg_dim, labels.len(), usize::MAX, "operator dimension")?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for {} legs of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                labels.len(),
                leg_dim
            )));
        }
        Ok(DenseOperator { leg_dim, labels, matrix })
    }

    /// Operator whose entries are `coeff` times a product of Kronecker deltas.
    ///
    /// Points `0..L` stand for the row (output) legs and `L..2L` for the column
    /// (input) legs; `partner` is a perfect matching on these `2L` points and
    /// each matched pair forces equal digits.
    pub fn from_wiring(leg_dim: usize, labels: Vec<Leg>, partner: &[usize], coeff: C64) -> Result<Self> {
        let mut op = Self::zeros(leg_dim, labels)?;
        op.add_wiring(partner, coeff)?;
        Ok(op)
    }

    /// Adds `coeff · W` for the wiring `W` described in [`Self::from_wiring`].
    pub fn add_wiring(&mut self, partner: &[usize], coeff: C64) -> Result<()> {
        let legs = self.labels.len();
        if partner.len() != 2 * legs || (0..2 * legs).any(|a| partner[a] >= 2 * legs || partner[partner[a]] != a || partner[a] == a) {
            return Err(Error::Precondition("wiring is not a perfect matching".into()));
        }
        let n = self.leg_dim;
        let wires: Vec<(usize, usize)> = (0..2 * legs).filter(|&a| a < partner[a]).map(|a| (a, partner[a])).collect();
        let place: Vec<usize> = (0..legs).map(|l| n.pow((legs - 1 - l) as u32)).collect();
        let mut values = vec![0usize; wires.len()];
        loop {
            let (mut row, mut col) = (0, 0);
            for (&(a, b), &v) in wires.iter().zip(&values) {
                for p in [a, b] {
                    if p < legs {
                        row += v * place[p];
                    } else {
                        col += v * place[p - legs];
                    }
                }
            }
            self.matrix[(row, col)] += coeff;
            // odometer over wire values
            let mut i = 0;
            loop {
                if i == values.len() {
                    return Ok(());
                }
                values[i] += 1;
                if values[i] < n {
                    break;
                }
                values[i] = 0;
                i += 1;
            }
        }
    }

    pub fn leg_dim(&self) -> usize {
        self.leg_dim
    }

    pub fn num_legs(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Leg] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.leg_dim != other.leg_dim || self.labels.len() != other.labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} legs of dim {} vs {} legs of dim {}",
                self.labels.len(),
                self.leg_dim,
                other.labels.len(),
                other.leg_dim
            )));
        }
        Ok(())
    }

    /// Product that skips the zero entries of `rhs`; the operators built here
    /// are mostly very sparse.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.same_space(rhs)?;
        let d = self.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        let zero = C64::new(0.0, 0.0);
        for j in 0..d {
            for k in 0..d {
                let b = rhs.matrix[(k, j)];
                if b == zero {
                    continue;
                }
                let src = self.matrix.column(k);
                let mut dst = out.column_mut(j);
                for (x, y) in dst.iter_mut().zip(src.iter()) {
                    *x += *y * b;
                }
            }
        }
        Ok(DenseOperator {
            leg_dim: self.leg_dim,
            labels: self.labels.clone(),
            matrix: out,
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_space(rhs)?;
        Ok(DenseOperator {
            leg_dim: self.leg_dim,
            labels: self.labels.clone(),
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_space(rhs)?;
        Ok(DenseOperator {
            leg_dim: self.leg_dim,
            labels: self.labels.clone(),
            matrix: &self.matrix - &rhs.matrix,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        DenseOperator {
            leg_dim: self.leg_dim,
            labels: self.labels.clone(),
            matrix: self.matrix.map(|x| x * c),
        }
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator {
            leg_dim: self.leg_dim,
            labels: self.labels.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self ⊗ other`, labels concatenated.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        if self.leg_dim != other.leg_dim {
            return Err(Error::DimensionMismatch("kron of different leg dimensions".into()));
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        checked_dim(self.leg_dim, labels.len(), caps::current().operator_dim, "operator dimension")?;
        Ok(DenseOperator {
            leg_dim: self.leg_dim,
            labels,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Reorders the tensor factors: new position `j` holds old leg `order[j]`.
    pub fn reorder_legs(&self, order: &[usize]) -> Result<Self> {
        let legs = self.num_legs();
        let mut seen = vec![false; legs];
        if order.len() != legs || order.iter().any(|&o| o >= legs || std::mem::replace(&mut seen[o], true)) {
            return Err(Error::Precondition("leg order is not a permutation".into()));
        }
        let n = self.leg_dim;
        let d = self.dim();
        let map: Vec<usize> = (0..d)
            .map(|new_idx| {
                let digits = decode(new_idx, n, legs);
                let mut old = vec![0; legs];
                for (j, &o) in order.iter().enumerate() {
                    old[o] = digits[j];
                }
                encode(&old, n)
            })
            .collect();
        let matrix = DMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(DenseOperator {
            leg_dim: n,
            labels: order.iter().map(|&o| self.labels[o]).collect(),
            matrix,
        })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= 1e-10
    }

    pub fn is_psd(&self) -> bool {
        self.is_hermitian() && self.hermitian_eigenvalues().first().is_none_or(|&l| l >= -1e-10)
    }

    /// Index sets of the connected components of the nonzero pattern.
    ///
    /// The operator is block diagonal, up to a simultaneous permutation of rows
    /// and columns, with one block per component.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let d = self.dim();
        let mut parent: Vec<usize> = (0..d).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let zero = C64::new(0.0, 0.0);
        for j in 0..d {
            for (i, z) in self.matrix.column(j).iter().enumerate() {
                if *z != zero && i != j {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..d {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        groups.into_values().collect()
    }

    fn block(&self, idx: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.matrix[(idx[a], idx[b])])
    }

    /// Eigenvalues of `(M + M†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let herm = DenseOperator {
            leg_dim: self.leg_dim,
            labels: self.labels.clone(),
            matrix: (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0),
        };
        let mut out = Vec::with_capacity(self.dim());
        for idx in herm.blocks() {
            if idx.len() == 1 {
                out.push(herm.matrix[(idx[0], idx[0])].re);
                continue;
            }
            let eig = nalgebra::SymmetricEigen::new(herm.block(&idx));
            out.extend(eig.eigenvalues.iter().copied());
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for idx in self.blocks() {
            if idx.len() == 1 {
                out.push(self.matrix[(idx[0], idx[0])].norm());
                continue;
            }
            let svd = self.block(&idx).svd(false, false);
            out.extend(svd.singular_values.iter().copied());
        }
        out.sort_by(|a, b| b.partial_cmp(a).unwrap());
        out
    }

    /// Operator (Schatten-∞) norm.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Entry `⟨out|M|in⟩` addressed by per-leg digits.
    pub fn entry(&self, out: &[usize], inp: &[usize]) -> C64 {
        self.matrix[(encode(out, self.leg_dim), encode(inp, self.leg_dim))]
    }

    pub fn to_json(&self) -> OperatorJson {
        let mut pairs = Vec::with_capacity(self.dim() * self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.matrix[(i, j)];
                pairs.push([z.re, z.im]);
            }
        }
        OperatorJson {
            leg_dim: self.leg_dim,
            num_legs: self.num_legs(),
            labels: self.labels.iter().map(Leg::to_string).collect(),
            row_major_complex_pairs: pairs,
        }
    }

    pub fn from_json(json: &OperatorJson) -> Result<Self> {
        let labels = json
            .labels
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Leg>>>()?;
        if labels.len() != json.num_legs {
            return Err(Error::DimensionMismatch("numLegs disagrees with labels".into()));
        }
        let dim = checked_dim(json.leg_dim, json.num_legs, caps::current().operator_dim, "operator dimension")?;
        if json.row_major_complex_pairs.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} operator",
                json.row_major_complex_pairs.len()
            )));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            let [re, im] = json.row_major_complex_pairs[i * dim + j];
            C64::new(re, im)
        });
        Self::from_matrix(json.leg_dim, labels, m)
    }
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels.iter().map(Leg::to_string).collect();
        write!(f, "DenseOperator(n={}, legs=[{}]) {}", self.leg_dim, labels.join(","), self.matrix)
    }
}

/// Interchange container for operators and states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OperatorJson {
    pub leg_dim: usize,
    pub num_legs: usize,
    pub labels: Vec<String>,
    pub row_major_complex_pairs: Vec<[f64; 2]>,
}

/// Mixed-radix digits of `idx`, most significant first.
pub fn decode(mut idx: usize, n: usize, legs: usize) -> Vec<usize> {
    let mut digits = vec![0; legs];
    for d in digits.iter_mut().rev() {
        *d = idx % n;
        idx /= n;
    }
    digits
}

pub fn encode(digits: &[usize], n: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * n + d)
}
