//! Exact arithmetic in the symmetric group `S_p`.
//!
//! Permutations are stored in one-line notation with 0-based images; the
//! textual forms (cycle notation, one-line lists) are 1-based.

use std::fmt;

use crate::caps;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

/// Cycle lengths in non-increasing order, fixed points included.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType(Vec<usize>);

impl CycleType {
    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// A representative permutation: consecutive cycles in the order of the parts.
    pub fn representative(&self) -> Permutation {
        let p = self.degree();
        let mut images = vec![0; p];
        let mut start = 0;
        for &len in &self.0 {
            for j in 0..len {
                images[start + j] = start + (j + 1) % len;
            }
            start += len;
        }
        Permutation { images }
    }

    /// All cycle types of degree `p`, i.e. the integer partitions of `p`,
    /// in reverse lexicographic order starting from `[p]`.
    pub fn all(p: usize) -> Vec<CycleType> {
        fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<CycleType>) {
            if rest == 0 {
                out.push(CycleType(cur.clone()));
                return;
            }
            for part in (1..=rest.min(max)).rev() {
                cur.push(part);
                rec(rest - part, part, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(p, p, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl Permutation {
    pub fn identity(p: usize) -> Self {
        Permutation {
            images: (0..p).collect(),
        }
    }

    /// Build from 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let p = images.len();
        let mut seen = vec![false; p];
        for &x in &images {
            if x >= p || seen[x] {
                return Err(Error::NotABijection(p));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Build from 1-based one-line notation.
    pub fn from_one_line(one_based: &[usize]) -> Result<Self> {
        if one_based.contains(&0) {
            return Err(Error::NotABijection(one_based.len()));
        }
        Self::from_images(one_based.iter().map(|&x| x - 1).collect())
    }

    /// The transposition exchanging the 0-based points `a` and `b`.
    pub fn transposition(p: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..p).collect();
        images.swap(a, b);
        Permutation { images }
    }

    /// Build from 0-based cycles; points not mentioned are fixed.
    pub fn from_cycles(p: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<Option<usize>> = vec![None; p];
        for cycle in cycles {
            for (j, &a) in cycle.iter().enumerate() {
                let b = cycle[(j + 1) % cycle.len()];
                if a >= p || b >= p || images[a].is_some() {
                    return Err(Error::NotABijection(p));
                }
                images[a] = Some(b);
            }
        }
        Self::from_images(
            images
                .into_iter()
                .enumerate()
                .map(|(i, x)| x.unwrap_or(i))
                .collect(),
        )
    }

    /// Parse cycle notation such as `"(1 2)(3 4 5)"` or `"id"`.
    ///
    /// `degree` fixes `p`; with `None` the largest mentioned point is used.
    pub fn parse(text: &str, degree: Option<usize>) -> Result<Self> {
        let text = text.trim();
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        if text != "id" && !text.is_empty() {
            let mut rest = text;
            while !rest.is_empty() {
                let open = rest
                    .strip_prefix('(')
                    .ok_or_else(|| Error::Parse(format!("expected '(' in {text:?}")))?;
                let close = open
                    .find(')')
                    .ok_or_else(|| Error::Parse(format!("unclosed cycle in {text:?}")))?;
                let cycle = open[..close]
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<usize>()
                            .ok()
                            .filter(|&x| x >= 1)
                            .map(|x| x - 1)
                            .ok_or_else(|| Error::Parse(format!("bad point {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if cycle.is_empty() {
                    return Err(Error::Parse("empty cycle".into()));
                }
                cycles.push(cycle);
                rest = open[close + 1..].trim_start();
            }
        }
        let needed = cycles.iter().flatten().map(|&x| x + 1).max().unwrap_or(0);
        let p = match degree {
            Some(p) if p < needed => {
                return Err(Error::Parse(format!("point {needed} exceeds degree {p}")))
            }
            Some(p) => p,
            None => needed,
        };
        Self::from_cycles(p, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// 0-based image of the 0-based point `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// All cycles (fixed points included), each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let p = self.degree();
        let mut seen = vec![false; p];
        let mut out = Vec::new();
        for start in 0..p {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut j = self.images[start];
            while j != start {
                seen[j] = true;
                cycle.push(j);
                j = self.images[j];
            }
            out.push(cycle);
        }
        out
    }

    pub fn num_cycles(&self) -> usize {
        let p = self.degree();
        let mut seen = vec![false; p];
        let mut count = 0;
        for start in 0..p {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.images[j];
            }
        }
        count
    }

    /// Minimal number of transpositions multiplying to `self`: `p - #cycles`.
    pub fn length(&self) -> usize {
        self.degree() - self.num_cycles()
    }

    pub fn cycle_type(&self) -> CycleType {
        let mut parts: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType(parts)
    }

    /// `(length, numCycles, cycleType)` in one pass.
    pub fn length_and_cycles(&self) -> (usize, usize, CycleType) {
        let ct = self.cycle_type();
        let c = ct.0.len();
        (self.degree() - c, c, ct)
    }

    /// Cayley distance `|σ⁻¹π|`.
    pub fn distance(&self, other: &Permutation) -> Result<usize> {
        Ok(self.inverse().compose(other)?.length())
    }

    /// Lexicographic rank of the one-line notation, in `0..p!`.
    pub fn lex_rank(&self) -> usize {
        let p = self.degree();
        let mut rank = 0;
        let mut used = vec![false; p];
        for i in 0..p {
            let smaller = (0..self.images[i]).filter(|&j| !used[j]).count();
            rank = rank * (p - i) + smaller;
            used[self.images[i]] = true;
        }
        rank
    }

    /// Inverse of [`Permutation::lex_rank`].
    pub fn from_lex_rank(p: usize, mut rank: usize) -> Permutation {
        let mut digits = vec![0; p];
        for i in (0..p).rev() {
            let base = p - i;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut free: Vec<usize> = (0..p).collect();
        let images = digits.into_iter().map(|d| free.remove(d)).collect();
        Permutation { images }
    }

    /// All of `S_p` in lexicographic order of one-line notation.
    pub fn enumerate(p: usize) -> Result<LexPermutations> {
        caps::check("permutation degree", p as u128, caps::current().perm_degree)?;
        Ok(LexPermutations {
            next: Some((0..p).collect()),
        })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return f.write_str("id");
        }
        for c in cycles {
            let pts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", pts.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{}; {}]", self.degree(), self)
    }
}

/// Iterator over `S_p` in lexicographic order.
pub struct LexPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for LexPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let n = succ.len();
        if n >= 2 {
            if let Some(i) = (0..n - 1).rev().find(|&i| succ[i] < succ[i + 1]) {
                let j = (i + 1..n).rev().find(|&j| succ[j] > succ[i]).unwrap();
                succ.swap(i, j);
                succ[i + 1..].reverse();
                self.next = Some(succ);
            }
        }
        Some(Permutation { images: current })
    }
}

/// `n!` as `u128`.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn perm(s: &str, p: usize) -> Permutation {
        Permutation::parse(s, Some(p)).unwrap()
    }

    #[test]
    fn compose_examples() {
        let id = Permutation::identity(2);
        let t = perm("(1 2)", 2);
        assert_eq!(id.compose(&t).unwrap(), t);
        assert!(t.compose(&t).unwrap().is_identity());

        // (123)∘(12): 1 -> 2 -> 3, 2 -> 1 -> 2, 3 -> 3 -> 1, i.e. (1 3).
        let c = perm("(1 2 3)", 3).compose(&perm("(1 2)", 3)).unwrap();
        assert_eq!(c.images(), &[2, 1, 0]);
        assert_eq!(c, perm("(1 3)", 3));
    }

    #[test]
    fn compose_rejects_degree_mismatch() {
        let a = Permutation::identity(2);
        let b = Permutation::identity(3);
        assert!(matches!(a.compose(&b), Err(Error::DegreeMismatch(2, 3))));
    }

    #[test]
    fn length_and_cycles_examples() {
        let (len, c, _) = Permutation::identity(4).length_and_cycles();
        assert_eq!((len, c), (0, 4));
        let (len, c, _) = perm("(1 2)", 4).length_and_cycles();
        assert_eq!((len, c), (1, 3));
        let (len, c, ct) = perm("(1 2 3)(4 5)", 5).length_and_cycles();
        assert_eq!((len, c), (3, 2));
        assert_eq!(ct.parts(), &[3, 2]);
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(Permutation::enumerate(0).unwrap().count(), 1);
        assert_eq!(Permutation::enumerate(3).unwrap().count(), 6);
        let all: HashSet<_> = Permutation::enumerate(5).unwrap().collect();
        assert_eq!(all.len(), 120);
        assert!(matches!(
            Permutation::enumerate(11),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn enumerate_is_lexicographic_and_matches_rank() {
        for (i, s) in Permutation::enumerate(4).unwrap().enumerate() {
            assert_eq!(s.lex_rank(), i);
            assert_eq!(Permutation::from_lex_rank(4, i), s);
        }
    }

    #[test]
    fn enumerated_elements_invert_to_identity() {
        for s in Permutation::enumerate(5).unwrap() {
            assert!(s.compose(&s.inverse()).unwrap().is_identity());
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(perm("id", 3), Permutation::identity(3));
        assert_eq!(perm("(1 2)(3 4 5)", 5).to_string(), "(1 2)(3 4 5)");
        assert_eq!(Permutation::parse("(2,3)", None).unwrap().degree(), 3);
        assert!(Permutation::parse("(1 1)", Some(2)).is_err());
        assert!(Permutation::parse("(1 5)", Some(3)).is_err());
        assert!(Permutation::parse("1 2", Some(3)).is_err());
    }

    #[test]
    fn cycle_types_are_partitions() {
        let counts: Vec<usize> = (0..=7).map(|p| CycleType::all(p).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15]);
        for ct in CycleType::all(6) {
            assert_eq!(ct.representative().cycle_type(), ct);
        }
    }

    fn arb_perm(p: usize) -> impl Strategy<Value = Permutation> {
        Just((0..p).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_images(v).unwrap())
    }

    proptest! {
        #[test]
        fn metric_axioms(a in arb_perm(6), b in arb_perm(6), c in arb_perm(6)) {
            prop_assert_eq!(a.distance(&a).unwrap(), 0);
            prop_assert_eq!(a.distance(&b).unwrap(), b.distance(&a).unwrap());
            prop_assert!(a.distance(&b).unwrap() <= a.distance(&c).unwrap() + c.distance(&b).unwrap());
        }

        #[test]
        fn transposition_flips_length(a in arb_perm(7), i in 0usize..7, j in 0usize..7) {
            prop_assume!(i != j);
            let t = Permutation::transposition(7, i, j);
            let l0 = a.length() as i64;
            let l1 = a.compose(&t).unwrap().length() as i64;
            prop_assert_eq!((l1 - l0).abs(), 1);
        }

        #[test]
        fn compose_is_associative(a in arb_perm(5), b in arb_perm(5), c in arb_perm(5)) {
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
