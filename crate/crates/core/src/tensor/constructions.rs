//! The operator families indexed by permutations and partial permutations.
//!
//! Every operator on `2r` legs uses the ordering `[1,T]..[r,T],[1,B]..[r,B]`.

use crate::error::{Error, Result};
use crate::partial_perm::{sign_between, PartialPermutation};
use crate::symgroup::Permutation;

use super::operator::{plain_labels, top_bottom_labels, DenseOperator, Leg, Side, C64};

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Identity wiring on `legs` legs.
pub(crate) fn identity_wiring(legs: usize) -> Vec<usize> {
    (0..2 * legs).map(|a| if a < legs { a + legs } else { a - legs }).collect()
}

/// Wiring of the un-normalized `T_α` on `2r` legs.
pub(crate) fn t_wiring(alpha: &PartialPermutation) -> Vec<usize> {
    let r = alpha.r();
    let legs = 2 * r;
    let mut partner = identity_wiring(legs);
    for (x, y) in alpha.pairs() {
        let (t, b) = (x, r + y);
        partner[t] = b;
        partner[b] = t;
        partner[legs + t] = legs + b;
        partner[legs + b] = legs + t;
    }
    partner
}

/// `P⊗_σ` on `deg(σ)` legs: `P(x_1 ⊗ … ⊗ x_p) = x_{σ⁻¹(1)} ⊗ … ⊗ x_{σ⁻¹(p)}`.
pub fn tensor_permutation(sigma: &Permutation, n: usize) -> Result<DenseOperator> {
    let p = sigma.degree();
    let mut partner = vec![0; 2 * p];
    for m in 0..p {
        // input leg m feeds output leg σ(m)
        partner[p + m] = sigma.apply(m);
        partner[sigma.apply(m)] = p + m;
    }
    DenseOperator::from_wiring(n, plain_labels(p), &partner, real(1.0))
}

/// `B_{x,y} = Σ_{i,j} e_i e_j* ⊗ f_i f_j*` on the legs `[x,T] ⊗ [y,B]`;
/// the normalized variant is `B/n`.
pub fn bell_operator(x: Leg, y: Leg, n: usize, normalized: bool) -> Result<DenseOperator> {
    if x.side != Side::Top || y.side != Side::Bottom {
        return Err(Error::InvalidLeg(format!("Bell operator needs a T leg and a B leg, got {x} and {y}")));
    }
    let coeff = if normalized { 1.0 / n as f64 } else { 1.0 };
    DenseOperator::from_wiring(n, vec![x, y], &[1, 0, 3, 2], real(coeff))
}

/// `T_α` (or `T̃_α = n^{-|dom α|} T_α` when `normalized`) on `2r` legs.
pub fn t_operator(alpha: &PartialPermutation, n: usize, normalized: bool) -> Result<DenseOperator> {
    let coeff = if normalized {
        (n as f64).powi(-(alpha.dom_size() as i32))
    } else {
        1.0
    };
    DenseOperator::from_wiring(n, top_bottom_labels(alpha.r()), &t_wiring(alpha), real(coeff))
}

/// `Q_α = Σ_{β ≥ α} (-1)^{|dom β| - |dom α|} T̃_β`.
pub fn q_operator(alpha: &PartialPermutation, n: usize) -> Result<DenseOperator> {
    let mut q = DenseOperator::zeros(n, top_bottom_labels(alpha.r()))?;
    for beta in PartialPermutation::enumerate_all(alpha.r())? {
        if alpha.leq_unchecked(&beta) {
            let c = sign_between(alpha, &beta) * (n as f64).powi(-(beta.dom_size() as i32));
            q.add_wiring(&t_wiring(&beta), real(c))?;
        }
    }
    Ok(q)
}

/// `R_β = Σ_{α ≤ β} T_α^{(k)} (-1/k)^{|dom β| - |dom α|}`.
pub fn r_operator(beta: &PartialPermutation, k: usize) -> Result<DenseOperator> {
    let mut out = DenseOperator::zeros(k, top_bottom_labels(beta.r()))?;
    for alpha in beta.restrictions() {
        let gap = (beta.dom_size() - alpha.dom_size()) as i32;
        out.add_wiring(&t_wiring(&alpha), real((-1.0 / k as f64).powi(gap)))?;
    }
    Ok(out)
}

/// `R_β` as the product `⊗_{x ∈ dom β} [B_{x,β(x)} - I/k] ⊗ I`.
pub fn r_operator_factored(beta: &PartialPermutation, k: usize) -> Result<DenseOperator> {
    pair_product(beta, k, |b, id| b.sub(&id.scale(1.0 / k as f64)))
}

/// `C_{x,y} = k^{-2} B_{x,y} + (k^{-2} - k^{-3}) I` on two legs.
pub fn c_matrix(k: usize) -> Result<DenseOperator> {
    let kf = k as f64;
    let b = bell_operator(Leg::top(0), Leg::bottom(0), k, false)?;
    let id = DenseOperator::identity(k, b.labels().to_vec())?;
    b.scale(kf.powi(-2)).add(&id.scale(kf.powi(-2) - kf.powi(-3)))
}

/// `Z_α = [⊗_{x ∈ dom α} C_{x,α(x)}] ⊗ Î`, with `Î` the unit-trace identity
/// on the untouched legs.
pub fn z_alpha(alpha: &PartialPermutation, k: usize) -> Result<DenseOperator> {
    let kf = k as f64;
    let z = pair_product(alpha, k, |b, id| {
        b.scale(kf.powi(-2)).add(&id.scale(kf.powi(-2) - kf.powi(-3)))
    })?;
    let free = 2 * (alpha.r() - alpha.dom_size());
    Ok(z.scale(kf.powi(-(free as i32))))
}

/// Product over the pairs of `pp` of `factor(B_pair ⊗ I, I)`.
fn pair_product<F>(pp: &PartialPermutation, n: usize, factor: F) -> Result<DenseOperator>
where
    F: Fn(&DenseOperator, &DenseOperator) -> Result<DenseOperator>,
{
    let r = pp.r();
    let id = DenseOperator::identity(n, top_bottom_labels(r))?;
    let mut acc = id.clone();
    for (x, y) in pp.pairs() {
        let single = PartialPermutation::from_pairs(r, &[(x, y)])?;
        let b = t_operator(&single, n, false)?;
        acc = acc.mul(&factor(&b, &id)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(s: &str, r: usize) -> PartialPermutation {
        PartialPermutation::parse(s, r).unwrap()
    }

    #[test]
    fn tensor_permutation_examples() {
        let id = tensor_permutation(&Permutation::identity(3), 2).unwrap();
        assert_eq!(id, DenseOperator::identity(2, plain_labels(3)).unwrap());

        let swap = tensor_permutation(&Permutation::parse("(1 2)", Some(2)).unwrap(), 2).unwrap();
        // basis action: e_a ⊗ e_b -> e_b ⊗ e_a
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(swap.entry(&[b, a], &[a, b]), real(1.0));
            }
        }
        assert!((swap.trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_permutation_action_on_simple_tensors() {
        // P(x1⊗x2⊗x3) = x_{σ⁻¹(1)} ⊗ x_{σ⁻¹(2)} ⊗ x_{σ⁻¹(3)} with σ = (1 2 3)
        let sigma = Permutation::parse("(1 2 3)", Some(3)).unwrap();
        let p = tensor_permutation(&sigma, 3).unwrap();
        let inp = [0usize, 1, 2];
        let inv = sigma.inverse();
        let out: Vec<usize> = (0..3).map(|j| inp[inv.apply(j)]).collect();
        assert_eq!(p.entry(&out, &inp), real(1.0));
    }

    #[test]
    fn tensor_permutation_is_a_homomorphism_with_trace() {
        let all: Vec<_> = Permutation::enumerate(3).unwrap().collect();
        for s in &all {
            let ps = tensor_permutation(s, 2).unwrap();
            assert!((ps.trace().re - 2f64.powi(s.num_cycles() as i32)).abs() < 1e-12);
            for t in &all {
                let prod = ps.mul(&tensor_permutation(t, 2).unwrap()).unwrap();
                let direct = tensor_permutation(&s.compose(t).unwrap(), 2).unwrap();
                assert_eq!(prod, direct);
            }
        }
    }

    #[test]
    fn bell_operator_examples() {
        let b = bell_operator(Leg::top(0), Leg::bottom(0), 2, false).unwrap();
        assert_eq!(b.dim(), 4);
        assert!((b.trace().re - 2.0).abs() < 1e-15);
        for n in 2..5 {
            let bt = bell_operator(Leg::top(0), Leg::bottom(1), n, true).unwrap();
            assert!(bt.mul(&bt).unwrap().max_abs_diff(&bt) < 1e-12);
            assert!((bt.trace().re - 1.0).abs() < 1e-12);
            // maximally entangled vector is a fixed point
            let omega: Vec<C64> = (0..n * n)
                .map(|i| if i / n == i % n { real(1.0 / (n as f64).sqrt()) } else { real(0.0) })
                .collect();
            let v = nalgebra::DVector::from_vec(omega);
            let val = (v.adjoint() * bt.matrix() * &v)[(0, 0)];
            assert!((val.re - 1.0).abs() < 1e-12);
        }
        assert!(bell_operator(Leg::bottom(0), Leg::top(0), 2, true).is_err());
    }

    #[test]
    fn t_operator_examples() {
        for r in 1..=2 {
            for n in 1..=3 {
                let t = t_operator(&PartialPermutation::empty(r), n, true).unwrap();
                assert_eq!(t, DenseOperator::identity(n, top_bottom_labels(r)).unwrap());
            }
        }
        let t = t_operator(&pp("{1>1}", 1), 2, true).unwrap();
        let b = bell_operator(Leg::top(0), Leg::bottom(0), 2, true).unwrap();
        assert_eq!(t.matrix(), b.matrix());
    }

    #[test]
    fn normalized_t_are_projections() {
        for r in 1..=2 {
            for n in [2, 3, 4] {
                for a in PartialPermutation::enumerate_all(r).unwrap() {
                    let t = t_operator(&a, n, true).unwrap();
                    assert!(t.mul(&t).unwrap().max_abs_diff(&t) < 1e-12, "{a} n={n}");
                    assert!(t.is_hermitian());
                }
            }
        }
    }

    #[test]
    fn seven_distinct_operators_at_r2() {
        let ops: Vec<_> = PartialPermutation::enumerate_all(2)
            .unwrap()
            .iter()
            .map(|a| t_operator(a, 2, false).unwrap())
            .collect();
        assert_eq!(ops.len(), 7);
        for i in 0..7 {
            for j in 0..i {
                assert!(ops[i].max_abs_diff(&ops[j]) > 0.5);
            }
        }
    }

    #[test]
    fn q_operator_r1() {
        for n in 2..6 {
            let q = q_operator(&PartialPermutation::empty(1), n).unwrap();
            for l in q.hermitian_eigenvalues() {
                assert!(l.abs() < 1e-12 || (l - 1.0).abs() < 1e-12);
            }
            let full = pp("{1>1}", 1);
            assert!(q_operator(&full, n).unwrap().max_abs_diff(&t_operator(&full, n, true).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn r_operator_examples() {
        assert_eq!(
            r_operator(&PartialPermutation::empty(2), 2).unwrap(),
            DenseOperator::identity(2, top_bottom_labels(2)).unwrap()
        );
        let r1 = r_operator(&pp("{1>1}", 1), 2).unwrap();
        // B - I/2: trace = k - k²/k = 0
        assert!(r1.trace().norm() < 1e-14);
        for k in [2, 3] {
            for b in PartialPermutation::enumerate_all(2).unwrap() {
                let sum = r_operator(&b, k).unwrap();
                let prod = r_operator_factored(&b, k).unwrap();
                assert!(sum.max_abs_diff(&prod) < 1e-12, "{b} k={k}");
            }
        }
    }

    #[test]
    fn z_alpha_examples() {
        let z0 = z_alpha(&PartialPermutation::empty(1), 2).unwrap();
        assert!(z0.max_abs_diff(&DenseOperator::identity(2, top_bottom_labels(1)).unwrap().scale(0.25)) < 1e-15);

        let ev = z_alpha(&pp("{1>1}", 1), 2).unwrap().hermitian_eigenvalues();
        let expected = [0.125, 0.125, 0.125, 0.625];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        for k in [2, 3] {
            for r in 1..=2 {
                for a in PartialPermutation::enumerate_all(r).unwrap() {
                    let z = z_alpha(&a, k).unwrap();
                    assert!((z.trace().re - 1.0).abs() < 1e-12);
                    assert!(z.is_psd());
                }
            }
        }
    }
}
