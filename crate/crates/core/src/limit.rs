//! Limit outputs from overlap parameters, their convex decomposition and
//! entropy bookkeeping.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channels::expectation_formula;
use crate::error::{Error, Result};
use crate::partial_perm::{sign_between, PartialPermutation};
use crate::stats;
use crate::symgroup::Permutation;
use crate::tensor::constructions::z_alpha;
use crate::tensor::{top_bottom_labels, von_neumann_entropy, DenseOperator, LogBase};

const P_TOL: f64 = 1e-9;

/// Overlap limits `a_β`, one per partial permutation; missing entries are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AParameters {
    r: usize,
    values: BTreeMap<PartialPermutation, f64>,
}

impl AParameters {
    pub fn new(r: usize, values: BTreeMap<PartialPermutation, f64>) -> Result<Self> {
        for (beta, &v) in &values {
            if beta.r() != r {
                return Err(Error::DimensionMismatch(format!("{beta} is not on {r} points")));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Precondition(format!("a_{beta} = {v} is outside [0, 1]")));
            }
        }
        let empty = values.get(&PartialPermutation::empty(r)).copied().unwrap_or(0.0);
        if empty != 1.0 {
            return Err(Error::Precondition(format!("a_∅ must be 1, got {empty}")));
        }
        Ok(AParameters { r, values })
    }

    /// Only `a_∅ = 1`.
    pub fn trivial(r: usize) -> Self {
        AParameters {
            r,
            values: [(PartialPermutation::empty(r), 1.0)].into(),
        }
    }

    /// `a_β = 1_{β ≤ π}`, the Bell-product limit.
    pub fn bell(pi: &Permutation) -> Self {
        let full = PartialPermutation::from_permutation(pi);
        AParameters {
            r: pi.degree(),
            values: full.restrictions().into_iter().map(|b| (b, 1.0)).collect(),
        }
    }

    /// Parses `{"r": 2, "entries": [{"pp": "{1>1, 2>2}", "a": 1.0}, …]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: AMapJson = serde_json::from_str(text)?;
        let mut values = BTreeMap::new();
        for e in raw.entries {
            let pp = PartialPermutation::parse(&e.pp, raw.r)?;
            if values.insert(pp.clone(), e.a).is_some() {
                return Err(Error::Parse(format!("duplicate entry for {pp}")));
            }
        }
        Self::new(raw.r, values)
    }

    pub fn to_json(&self) -> AMapJson {
        AMapJson {
            r: self.r,
            entries: self
                .values
                .iter()
                .map(|(pp, &a)| AEntry { pp: pp.to_string(), a })
                .collect(),
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, beta: &PartialPermutation) -> f64 {
        self.values.get(beta).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &BTreeMap<PartialPermutation, f64> {
        &self.values
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AMapJson {
    pub r: usize,
    pub entries: Vec<AEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AEntry {
    pub pp: String,
    pub a: f64,
}

/// Convex weights `p_α` of the limit output over the `Z_α`.
#[derive(Debug, Clone)]
pub struct PWeights {
    r: usize,
    values: BTreeMap<PartialPermutation, f64>,
}

impl PWeights {
    pub fn new(r: usize, values: BTreeMap<PartialPermutation, f64>) -> Result<Self> {
        let sum: f64 = values.values().sum();
        if (sum - 1.0).abs() > P_TOL {
            return Err(Error::Precondition(format!("weights sum to {sum}")));
        }
        Ok(PWeights { r, values })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, alpha: &PartialPermutation) -> f64 {
        self.values.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &BTreeMap<PartialPermutation, f64> {
        &self.values
    }

    /// All weights `≥ −1e−9`; false flags an a-map no state sequence produces.
    pub fn realizable(&self) -> bool {
        self.values.values().all(|&p| p >= -P_TOL)
    }

    /// Exactly one weight is (numerically) 1.
    pub fn is_vertex(&self) -> bool {
        self.values.values().filter(|&&p| (p - 1.0).abs() <= P_TOL).count() == 1
            && self.values.values().all(|&p| p.abs() <= P_TOL || (p - 1.0).abs() <= P_TOL)
    }

    /// `Σ_α p_α a-map of Z_α`, i.e. `a_β = Σ_{α ≥ β} p_α`.
    pub fn to_a(&self) -> BTreeMap<PartialPermutation, f64> {
        let all = PartialPermutation::enumerate_all(self.r).expect("r within caps");
        all.iter()
            .map(|beta| {
                let v = all.iter().filter(|a| beta.leq_unchecked(a)).map(|a| self.get(a)).sum();
                (beta.clone(), v)
            })
            .collect()
    }
}

/// Möbius inversion `p_α = Σ_{β ≥ α} (−1)^{|dom β| − |dom α|} a_β`.
pub fn p_from_a(a: &AParameters) -> Result<PWeights> {
    let all = PartialPermutation::enumerate_all(a.r)?;
    let values = all
        .iter()
        .map(|alpha| {
            let p = all
                .iter()
                .filter(|beta| alpha.leq_unchecked(beta))
                .map(|beta| sign_between(alpha, beta) * a.get(beta))
                .sum();
            (alpha.clone(), p)
        })
        .collect();
    PWeights::new(a.r, values)
}

/// `Z = k^{−2r} Σ_β a_β R_β`.
pub fn limit_output(a: &AParameters, k: usize) -> Result<DenseOperator> {
    expectation_formula(a.r, k, &a.values)
}

/// `Σ_α p_α Z_α`.
pub fn mixture_output(p: &PWeights, k: usize) -> Result<DenseOperator> {
    let mut z = DenseOperator::zeros(k, top_bottom_labels(p.r))?;
    for (alpha, &w) in &p.values {
        if w != 0.0 {
            z = z.add(&z_alpha(alpha, k)?.scale(w))?;
        }
    }
    Ok(z)
}

fn h(x: f64, base: LogBase) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * base.log(x)
    }
}

/// `H(C) = h(k⁻¹ + k⁻² − k⁻³) + (k² − 1) h(k⁻² − k⁻³)`.
pub fn entropy_of_c(k: usize, base: LogBase) -> Result<f64> {
    if k < 2 {
        return Err(Error::Precondition(format!("H(C) needs k ≥ 2, got {k}")));
    }
    let kf = k as f64;
    let small = kf.powi(-2) - kf.powi(-3);
    Ok(h(1.0 / kf + small, base) + (kf * kf - 1.0) * h(small, base))
}

/// `H(Z_α) = |dom α|·H(C) + (r − |dom α|)·log k²`.
pub fn entropy_of_z_alpha(alpha: &PartialPermutation, k: usize, base: LogBase) -> Result<f64> {
    let d = alpha.dom_size() as f64;
    Ok(d * entropy_of_c(k, base)? + (alpha.r() as f64 - d) * base.log((k * k) as f64))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntropyReport {
    pub entropy: f64,
    pub mixture_entropy: f64,
    pub bell_entropy: f64,
    /// `H(Z) − Σ p_α H(Z_α)`.
    pub concavity_gap: f64,
    /// `Σ p_α H(Z_α) − r·H(C)`.
    pub bell_gap: f64,
    pub vertex: bool,
    pub holds: bool,
}

/// Checks `H(Z) ≥ Σ_α p_α H(Z_α) ≥ r·H(C)`.
pub fn entropy_lower_bound_check(p: &PWeights, k: usize, base: LogBase) -> Result<EntropyReport> {
    let z = mixture_output(p, k)?;
    let entropy = von_neumann_entropy(&z, base)?;
    let mut mixture = 0.0;
    for (alpha, &w) in &p.values {
        mixture += w * entropy_of_z_alpha(alpha, k, base)?;
    }
    let bell = p.r as f64 * entropy_of_c(k, base)?;
    let concavity_gap = entropy - mixture;
    let bell_gap = mixture - bell;
    Ok(EntropyReport {
        entropy,
        mixture_entropy: mixture,
        bell_entropy: bell,
        concavity_gap,
        bell_gap,
        vertex: p.is_vertex(),
        holds: concavity_gap >= -P_TOL && bell_gap >= -P_TOL,
    })
}

/// Overlap sequences `β ↦ [(n, ⟨ψ_n|T̃_β|ψ_n⟩)]` decay for every `β ≠ ∅`.
///
/// Decay means a log-log slope `≤ −0.5`; sequences that vanish identically
/// count as decaying.
pub fn classify_bad_input(overlaps: &BTreeMap<PartialPermutation, Vec<(usize, f64)>>) -> Result<bool> {
    let mut all_decay = true;
    for (beta, seq) in overlaps {
        if beta.is_empty() {
            continue;
        }
        if seq.len() < 3 {
            return Err(Error::InsufficientData(format!("{} n-values for {beta}, need 3", seq.len())));
        }
        if seq.iter().all(|&(_, v)| v.abs() < 1e-300) {
            continue;
        }
        let x: Vec<f64> = seq.iter().map(|&(n, _)| n as f64).collect();
        let y: Vec<f64> = seq.iter().map(|&(_, v)| v.abs().max(1e-300)).collect();
        if -stats::decay_exponent(&x, &y)? > -0.5 {
            all_decay = false;
        }
    }
    Ok(all_decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{sample_rng, InputSpec};
    use crate::tensor::constructions::r_operator;
    use crate::tensor::PureState;
    use rand::Rng;

    fn pp(s: &str, r: usize) -> PartialPermutation {
        PartialPermutation::parse(s, r).unwrap()
    }

    #[test]
    fn p_from_a_examples() {
        let p = p_from_a(&AParameters::bell(&Permutation::identity(1))).unwrap();
        assert_eq!(p.get(&PartialPermutation::empty(1)), 0.0);
        assert_eq!(p.get(&pp("{1>1}", 1)), 1.0);
        let p = p_from_a(&AParameters::trivial(1)).unwrap();
        assert_eq!(p.get(&PartialPermutation::empty(1)), 1.0);
        let p = p_from_a(&AParameters::bell(&Permutation::identity(2))).unwrap();
        for (alpha, &w) in p.values() {
            let expected = if alpha == &pp("{1>1, 2>2}", 2) { 1.0 } else { 0.0 };
            assert_eq!(w, expected, "{alpha}");
        }
        assert!(p.is_vertex());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let a = AParameters::from_json(r#"{"r":2,"entries":[{"pp":"{}","a":1.0},{"pp":"{1>1,2>2}","a":0.5}]}"#).unwrap();
        assert_eq!(a.get(&pp("{1>1, 2>2}", 2)), 0.5);
        let text = serde_json::to_string(&a.to_json()).unwrap();
        assert_eq!(AParameters::from_json(&text).unwrap(), a);
        assert!(AParameters::from_json(r#"{"r":1,"entries":[{"pp":"{1>1}","a":1.0}]}"#).is_err());
        assert!(AParameters::from_json(r#"{"r":1,"entries":[{"pp":"{}","a":1.0},{"pp":"{1>1}","a":1.5}]}"#).is_err());
        assert!(AParameters::from_json("{not json").is_err());
    }

    #[test]
    fn limit_output_examples() {
        let z = limit_output(&AParameters::trivial(2), 3).unwrap();
        assert!(z.max_abs_diff(&DenseOperator::identity(3, top_bottom_labels(2)).unwrap().scale(1.0 / 81.0)) < 1e-15);
        let z = limit_output(&AParameters::bell(&Permutation::identity(1)), 2).unwrap();
        let ev = z.hermitian_eigenvalues();
        for (a, b) in ev.iter().zip([0.125, 0.125, 0.125, 0.625]) {
            assert!((a - b).abs() < 1e-12);
        }
        let z = limit_output(&AParameters::bell(&Permutation::identity(2)), 2).unwrap();
        let c = z_alpha(&pp("{1>1}", 1), 2).unwrap();
        let cc = c.kron(&c).unwrap().reorder_legs(&[0, 2, 1, 3]).unwrap();
        assert!(z.matrix().iter().zip(cc.matrix().iter()).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn r_is_mobius_sum_of_z() {
        for k in [2usize, 3] {
            for r in 1..=2 {
                let kf = k as f64;
                for beta in PartialPermutation::enumerate_all(r).unwrap() {
                    let mut sum = DenseOperator::zeros(k, top_bottom_labels(r)).unwrap();
                    for alpha in beta.restrictions() {
                        sum = sum.add(&z_alpha(&alpha, k).unwrap().scale(sign_between(&alpha, &beta))).unwrap();
                    }
                    let lhs = sum.scale(kf.powi(2 * r as i32));
                    assert!(lhs.max_abs_diff(&r_operator(&beta, k).unwrap()) < 1e-12, "{beta} k={k}");
                }
            }
        }
    }

    #[test]
    fn r_sum_equals_weighted_z_sum() {
        let mut rng = sample_rng(6, 0);
        for r in 1..=2 {
            for _ in 0..5 {
                let values: BTreeMap<_, _> = PartialPermutation::enumerate_all(r)
                    .unwrap()
                    .into_iter()
                    .map(|b| {
                        let v = if b.is_empty() { 1.0 } else { rng.random_range(0.0..1.0) };
                        (b, v)
                    })
                    .collect();
                let a = AParameters::new(r, values).unwrap();
                let p = p_from_a(&a).unwrap();
                let lhs = limit_output(&a, 2).unwrap();
                let rhs = mixture_output(&p, 2).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn entropy_of_c_examples() {
        let hc = entropy_of_c(2, LogBase::Natural).unwrap();
        assert!((hc - 1.0735).abs() < 1e-4);
        assert!(hc < 4f64.ln());
        assert!(entropy_of_c(1, LogBase::Natural).is_err());
        for k in [2usize, 3] {
            for r in 1..=2 {
                let full = PartialPermutation::from_permutation(&Permutation::identity(r));
                let h = von_neumann_entropy(&z_alpha(&full, k).unwrap(), LogBase::Natural).unwrap();
                assert!((h - r as f64 * entropy_of_c(k, LogBase::Natural).unwrap()).abs() < 1e-9);
            }
        }
        let bits = entropy_of_c(2, LogBase::Two).unwrap();
        assert!((bits - hc / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_chain_examples() {
        let bell = p_from_a(&AParameters::bell(&Permutation::identity(2))).unwrap();
        let rep = entropy_lower_bound_check(&bell, 2, LogBase::Natural).unwrap();
        assert!(rep.holds && rep.vertex);
        assert!(rep.concavity_gap.abs() < 1e-9 && rep.bell_gap.abs() < 1e-9);

        let trivial = p_from_a(&AParameters::trivial(2)).unwrap();
        let rep = entropy_lower_bound_check(&trivial, 2, LogBase::Natural).unwrap();
        assert!((rep.entropy - 2.0 * 4f64.ln()).abs() < 1e-9);
        assert!(rep.entropy > rep.bell_entropy);
    }

    #[test]
    fn argmin_over_bell_family() {
        for r in 1..=2 {
            let hc = entropy_of_c(2, LogBase::Natural).unwrap();
            let mut family: Vec<(bool, AParameters)> = Permutation::enumerate(r)
                .unwrap()
                .map(|pi| (true, AParameters::bell(&pi)))
                .collect();
            family.push((false, AParameters::trivial(r)));
            for (is_bell, a) in family {
                let h = von_neumann_entropy(&limit_output(&a, 2).unwrap(), LogBase::Natural).unwrap();
                if is_bell {
                    assert!((h - r as f64 * hc).abs() < 1e-9);
                } else {
                    assert!(h > r as f64 * hc + 1e-6);
                }
            }
        }
    }

    #[test]
    fn realizability_flag() {
        for r in 1..=2 {
            for pi in Permutation::enumerate(r).unwrap() {
                assert!(p_from_a(&AParameters::bell(&pi)).unwrap().realizable());
            }
            assert!(p_from_a(&AParameters::trivial(r)).unwrap().realizable());
        }
        // finite-n overlaps are off by n^{-2} for Bell⊗Bell: p_∅ = -n^{-2} < 0
        let finite = InputSpec::Bell(Permutation::identity(2)).a_map(8).unwrap();
        let a = AParameters::new(2, finite).unwrap();
        assert!((p_from_a(&a).unwrap().get(&PartialPermutation::empty(2)) + 1.0 / 64.0).abs() < 1e-12);

        // a_{id} = 1 forces a_{1>1} = 1 for any state sequence.
        let values = [(PartialPermutation::empty(2), 1.0), (pp("{1>1, 2>2}", 2), 1.0)].into();
        let p = p_from_a(&AParameters::new(2, values).unwrap()).unwrap();
        assert!(!p.realizable());
        assert_eq!(p.get(&pp("{1>1}", 2)), -1.0);
    }

    #[test]
    fn classification() {
        let ns = [8usize, 16, 32];
        let ghz = InputSpec::Ghz { r: 2 };
        let bell = InputSpec::Bell(Permutation::identity(2));
        let collect = |spec: &InputSpec| -> BTreeMap<PartialPermutation, Vec<(usize, f64)>> {
            let mut out: BTreeMap<PartialPermutation, Vec<(usize, f64)>> = BTreeMap::new();
            for &n in &ns {
                for (b, v) in spec.a_map(n).unwrap() {
                    out.entry(b).or_default().push((n, v));
                }
            }
            out
        };
        assert!(classify_bad_input(&collect(&ghz)).unwrap());
        assert!(!classify_bad_input(&collect(&bell)).unwrap());
        let product = InputSpec::Product(vec![0, 1, 1, 0]);
        assert!(classify_bad_input(&collect(&product)).unwrap());

        let short: BTreeMap<_, _> = [(pp("{1>1}", 1), vec![(2, 0.5), (4, 0.25)])].into();
        assert!(matches!(classify_bad_input(&short), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn random_states_are_bad_inputs() {
        let beta = pp("{1>1}", 1);
        let mut seq = Vec::new();
        for n in [8usize, 16, 32] {
            let mut vals: Vec<f64> = (0..21)
                .map(|i| {
                    let mut rng = sample_rng(77, i);
                    PureState::random(n, 1, &mut rng).unwrap().t_overlap(&beta).unwrap()
                })
                .collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = vals[vals.len() / 2];
            assert!(median <= (n as f64).powf(-1.0 + 0.2));
            seq.push((n, median));
        }
        let map: BTreeMap<_, _> = [(beta, seq)].into();
        assert!(classify_bad_input(&map).unwrap());
    }
}
