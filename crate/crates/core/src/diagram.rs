//! The algebra generated by the `T_α` and the top/bottom tensor permutations,
//! in its basis of wire diagrams.
//!
//! A diagram is a perfect matching on `4r` points. Points `0..2r` are the
//! left (output) legs and `2r..4r` the right (input) legs, each half ordered
//! `[1..r, T], [1..r, B]`. This is the wiring convention of
//! [`DenseOperator::from_wiring`], so every diagram is also a dense operator.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::caps;
use crate::error::{Error, Result};
use crate::partial_perm::PartialPermutation;
use crate::symgroup::Permutation;
use crate::tensor::constructions::t_wiring;
use crate::tensor::{top_bottom_labels, DenseOperator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiagramClass {
    /// Some `T_α`, including the identity.
    X1,
    /// A top/bottom permutation pair other than the identity.
    X2,
    /// Everything else.
    X3,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiagramElement {
    r: usize,
    partner: Vec<usize>,
}

impl DiagramElement {
    pub fn identity(r: usize) -> Self {
        let m = 2 * r;
        DiagramElement {
            r,
            partner: (0..2 * m).map(|a| if a < m { a + m } else { a - m }).collect(),
        }
    }

    /// Partial transpose of `P⊗_σ` on the bottom legs.
    pub fn from_permutation(sigma: &Permutation) -> Result<Self> {
        let m = sigma.degree();
        if !m.is_multiple_of(2) {
            return Err(Error::Precondition(format!("diagram permutations have even degree, got {m}")));
        }
        let mut p = vec![0; 2 * m];
        for i in 0..m {
            p[sigma.apply(i)] = m + i;
            p[m + i] = sigma.apply(i);
        }
        Ok(Self::transpose_bottom(m / 2, &p))
    }

    pub fn to_permutation(&self) -> Permutation {
        let m = 2 * self.r;
        let p = Self::transpose_bottom(self.r, &self.partner).partner;
        Permutation::from_images((0..m).map(|i| p[m + i]).collect()).expect("transposed diagram is a permutation")
    }

    fn transpose_bottom(r: usize, partner: &[usize]) -> Self {
        let m = 2 * r;
        let swap = |a: usize| {
            let pos = a % m;
            if pos >= r {
                if a < m {
                    a + m
                } else {
                    a - m
                }
            } else {
                a
            }
        };
        let mut out = vec![0; 2 * m];
        for a in 0..2 * m {
            out[swap(a)] = swap(partner[a]);
        }
        DiagramElement { r, partner: out }
    }

    /// The diagram of `T_α`.
    pub fn t(alpha: &PartialPermutation) -> Self {
        DiagramElement {
            r: alpha.r(),
            partner: t_wiring(alpha),
        }
    }

    /// The diagram of `P⊗_{π_T} ⊗ P⊗_{π_B}`.
    pub fn permutation_pair(pi_t: &Permutation, pi_b: &Permutation) -> Result<Self> {
        if pi_t.degree() != pi_b.degree() {
            return Err(Error::DegreeMismatch(pi_t.degree(), pi_b.degree()));
        }
        let r = pi_t.degree();
        let m = 2 * r;
        let mut p = vec![0; 2 * m];
        for i in 0..m {
            let target = if i < r { pi_t.apply(i) } else { r + pi_b.apply(i - r) };
            p[target] = m + i;
            p[m + i] = target;
        }
        Ok(DiagramElement { r, partner: p })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn partner(&self) -> &[usize] {
        &self.partner
    }

    /// Number of wires joining two left points.
    pub fn caps(&self) -> usize {
        let m = 2 * self.r;
        (0..m).filter(|&a| self.partner[a] < m && a < self.partner[a]).count()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.r)
    }

    pub fn class(&self) -> DiagramClass {
        let m = 2 * self.r;
        let r = self.r;
        if self.caps() == 0 {
            return if self.is_identity() { DiagramClass::X1 } else { DiagramClass::X2 };
        }
        // T_α: every cap L_{xT}-L_{yB} has the cup R_{xT}-R_{yB}, every other leg goes straight through
        let is_t = (0..m).all(|a| {
            let b = self.partner[a];
            if b >= m {
                b == a + m
            } else {
                (a < r) != (b < r) && self.partner[a + m] == b + m
            }
        });
        if is_t {
            DiagramClass::X1
        } else {
            DiagramClass::X3
        }
    }

    /// `self · other = n^{loops} · result`.
    pub fn multiply(&self, other: &Self) -> Result<(usize, Self)> {
        if self.r != other.r {
            return Err(Error::DegreeMismatch(self.r, other.r));
        }
        let m = 2 * self.r;
        let (pa, pb) = (&self.partner, &other.partner);
        let mut out = vec![usize::MAX; 2 * m];
        let mut mid_seen = vec![false; m];
        for start in 0..2 * m {
            if out[start] != usize::MAX {
                continue;
            }
            // (in_a, point): the wire to follow next
            let (mut in_a, mut point) = if start < m { (true, start) } else { (false, start) };
            let end = loop {
                if in_a {
                    let q = pa[point];
                    if q < m {
                        break q;
                    }
                    mid_seen[q - m] = true;
                    in_a = false;
                    point = q - m;
                } else {
                    let q = pb[point];
                    if q >= m {
                        break q;
                    }
                    mid_seen[q] = true;
                    in_a = true;
                    point = q + m;
                }
            };
            out[start] = end;
            out[end] = start;
        }
        let mut loops = 0;
        for s in 0..m {
            if mid_seen[s] {
                continue;
            }
            loops += 1;
            let mut p = s;
            loop {
                mid_seen[p] = true;
                // middle point p: right leg of self, left leg of other
                let q = pb[p];
                mid_seen[q] = true;
                p = pa[q + m] - m;
                if p == s {
                    break;
                }
            }
        }
        Ok((loops, DiagramElement { r: self.r, partner: out }))
    }

    /// `Tr(D) = n^{trace_loops}`.
    pub fn trace_loops(&self) -> usize {
        let m = 2 * self.r;
        let twin = |a: usize| if a < m { a + m } else { a - m };
        let mut seen = vec![false; 2 * m];
        let mut loops = 0;
        for s in 0..2 * m {
            if seen[s] {
                continue;
            }
            loops += 1;
            // alternate diagram wires and the closing wires L_p - R_p
            let mut a = s;
            while !seen[a] {
                let b = self.partner[a];
                seen[a] = true;
                seen[b] = true;
                a = twin(b);
            }
        }
        loops
    }

    pub fn dense(&self, n: usize) -> Result<DenseOperator> {
        DenseOperator::from_wiring(n, top_bottom_labels(self.r), &self.partner, C64::new(1.0, 0.0))
    }
}

impl fmt::Debug for DiagramElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diagram[{} {:?}]", self.to_permutation(), self.class())
    }
}

/// Finite sum `Σ_j c_j n^{-j}` with integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InversePowerSeries(BTreeMap<i32, i64>);

impl InversePowerSeries {
    pub fn add_term(&mut self, power: i32, coeff: i64) {
        let e = self.0.entry(power).or_insert(0);
        *e += coeff;
        if *e == 0 {
            self.0.remove(&power);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.0.iter().map(|(&j, &c)| (j, c))
    }

    /// Smallest power `j` present, i.e. the leading order `n^{-j}`.
    pub fn leading_power(&self) -> Option<i32> {
        self.0.keys().next().copied()
    }

    /// Coefficient of `n^0`; the `n → ∞` limit when no positive powers of `n` occur.
    pub fn constant(&self) -> i64 {
        self.0.get(&0).copied().unwrap_or(0)
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.0.iter().map(|(&j, &c)| c as f64 * n.powi(-j)).sum()
    }
}

impl fmt::Display for InversePowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(&j, &c)| if j == 0 { format!("{c}") } else { format!("{c}n^-{j}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `L_Q` for `Q = Q_∅` in the rescaled basis `D̃ = n^{-caps(D)} D`.
#[derive(Debug, Clone)]
pub struct LqMatrix {
    r: usize,
    basis: Vec<DiagramElement>,
    /// `columns[j][i]` is the coefficient of `D̃_i` in `Q·D̃_j`.
    columns: Vec<BTreeMap<usize, InversePowerSeries>>,
}

impl LqMatrix {
    /// Structural assembly; the basis is ordered by lexicographic rank in `S_{2r}`.
    pub fn new(r: usize) -> Result<Self> {
        caps::check("diagram algebra r", r as u128, caps::current().diagram_r)?;
        let basis: Vec<DiagramElement> = Permutation::enumerate(2 * r)?
            .map(|s| DiagramElement::from_permutation(&s))
            .collect::<Result<_>>()?;
        let index: HashMap<&DiagramElement, usize> = basis.iter().enumerate().map(|(i, d)| (d, i)).collect();
        let ts: Vec<(i64, i32, DiagramElement)> = PartialPermutation::enumerate_all(r)?
            .iter()
            .map(|a| {
                let sign = if a.dom_size() % 2 == 0 { 1 } else { -1 };
                (sign, a.dom_size() as i32, DiagramElement::t(a))
            })
            .collect();
        let mut columns = Vec::with_capacity(basis.len());
        for d in &basis {
            let mut col: BTreeMap<usize, InversePowerSeries> = BTreeMap::new();
            for (sign, size, t) in &ts {
                let (loops, rho) = t.multiply(d)?;
                let power = size + d.caps() as i32 - loops as i32 - rho.caps() as i32;
                col.entry(index[&rho]).or_default().add_term(power, *sign);
            }
            col.retain(|_, v| !v.is_zero());
            columns.push(col);
        }
        Ok(LqMatrix { r, basis, columns })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn basis(&self) -> &[DiagramElement] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> Option<&InversePowerSeries> {
        self.columns[col].get(&row)
    }

    pub fn evaluate(&self, n: usize) -> Result<DMatrix<f64>> {
        if n < 2 * self.r {
            return Err(Error::Precondition(format!(
                "the diagrams are a basis only for n ≥ 2r = {}, got n = {n}",
                2 * self.r
            )));
        }
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (j, col) in self.columns.iter().enumerate() {
            for (&i, v) in col {
                m[(i, j)] = v.eval(n as f64);
            }
        }
        Ok(m)
    }

    /// Coefficient-wise `n → ∞` limit; errors if some entry grows with `n`.
    pub fn limit(&self) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (j, col) in self.columns.iter().enumerate() {
            for (&i, v) in col {
                if v.leading_power().is_some_and(|p| p < 0) {
                    return Err(Error::Precondition(format!("entry ({i},{j}) = {v} grows with n")));
                }
                m[(i, j)] = v.constant() as f64;
            }
        }
        Ok(m)
    }

    pub fn eigenvalues(&self, n: usize) -> Result<Vec<Complex<f64>>> {
        let m = self.evaluate(n)?;
        let mut ev: Vec<Complex<f64>> = if self.is_triangular() {
            (0..self.dim()).map(|i| Complex::new(m[(i, i)], 0.0)).collect()
        } else {
            m.complex_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        Ok(ev)
    }

    /// No symbolic entry lies above the diagonal in [`LqMatrix::triangular_order`],
    /// so the diagonal is the spectrum at every `n`.
    pub fn is_triangular(&self) -> bool {
        let mut pos = vec![0; self.dim()];
        for (p, &i) in self.triangular_order().iter().enumerate() {
            pos[i] = p;
        }
        self.columns
            .iter()
            .enumerate()
            .all(|(j, col)| col.keys().all(|&i| pos[i] >= pos[j]))
    }

    /// Basis indices grouped as `[identity, X2, rest]`; in this order the
    /// limit matrix is lower triangular.
    pub fn triangular_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dim()).filter(|&i| self.basis[i].is_identity()).collect();
        order.extend((0..self.dim()).filter(|&i| self.basis[i].class() == DiagramClass::X2));
        order.extend(
            (0..self.dim()).filter(|&i| !self.basis[i].is_identity() && self.basis[i].class() != DiagramClass::X2),
        );
        order
    }

    pub fn block_report(&self) -> BlockReport {
        let classes = [DiagramClass::X1, DiagramClass::X2, DiagramClass::X3];
        let members = |c: DiagramClass| -> Vec<usize> { (0..self.dim()).filter(|&i| self.basis[i].class() == c).collect() };
        let mut blocks = Vec::new();
        for &rc in &classes {
            let rows = members(rc);
            for &cc in &classes {
                let cols = members(cc);
                let mut leading: Option<i32> = None;
                let mut nonzero = 0;
                let mut is_identity = rows.len() == cols.len();
                for (a, &i) in rows.iter().enumerate() {
                    for (b, &j) in cols.iter().enumerate() {
                        let v = self.entry(i, j);
                        let diag_one = a == b && v.is_some_and(|s| s.terms().eq([(0, 1)]));
                        if a == b && !diag_one || a != b && v.is_some() {
                            is_identity = false;
                        }
                        if let Some(s) = v {
                            nonzero += 1;
                            leading = Some(leading.map_or(s.leading_power().unwrap(), |l| l.min(s.leading_power().unwrap())));
                        }
                    }
                }
                blocks.push(BlockSummary {
                    row_class: rc,
                    col_class: cc,
                    rows: rows.len(),
                    cols: cols.len(),
                    nonzero_entries: nonzero,
                    exactly_zero: nonzero == 0,
                    exactly_identity: is_identity && !rows.is_empty(),
                    leading_power: leading,
                });
            }
        }
        BlockReport { r: self.r, blocks }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockSummary {
    pub row_class: DiagramClass,
    pub col_class: DiagramClass,
    pub rows: usize,
    pub cols: usize,
    pub nonzero_entries: usize,
    pub exactly_zero: bool,
    pub exactly_identity: bool,
    /// Leading order `n^{-j}` over the block, `None` for an empty block.
    pub leading_power: Option<i32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub r: usize,
    pub blocks: Vec<BlockSummary>,
}

impl BlockReport {
    pub fn get(&self, row: DiagramClass, col: DiagramClass) -> &BlockSummary {
        self.blocks.iter().find(|b| b.row_class == row && b.col_class == col).unwrap()
    }
}

/// `max_λ min(|λ|, |λ - 1|)` over the eigenvalues of `L_Q` at `n`.
pub fn spectrum_distance_to_zero_one(lq: &LqMatrix, n: usize) -> Result<f64> {
    Ok(distance_to_zero_one(&lq.eigenvalues(n)?))
}

pub fn distance_to_zero_one(eigenvalues: &[Complex<f64>]) -> f64 {
    eigenvalues
        .iter()
        .map(|l| l.norm().min((l - Complex::new(1.0, 0.0)).norm()))
        .fold(0.0, f64::max)
}

/// Whether every value of `needles` lies within `tol` of some value of `haystack`.
pub fn spectrum_contained(needles: &[f64], haystack: &[Complex<f64>], tol: f64) -> bool {
    needles
        .iter()
        .all(|&x| haystack.iter().any(|h| (h - Complex::new(x, 0.0)).norm() <= tol))
}
