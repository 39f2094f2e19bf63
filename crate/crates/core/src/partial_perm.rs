//! Partial permutations of `{1..r}` under the map-extension order.

use std::fmt;

use crate::caps;
use crate::error::{Error, Result};
use crate::symgroup::Permutation;

/// Injective map from a subset of `{0..r}` into `{0..r}`, stored by source.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialPermutation {
    map: Vec<Option<usize>>,
}

/// `Σ_k C(r,k)² k!`.
pub fn cardinality(r: usize) -> u128 {
    let binom = |n: u128, k: u128| -> u128 { (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1)) };
    (0..=r as u128)
        .map(|k| binom(r as u128, k).pow(2) * (1..=k).product::<u128>())
        .sum()
}

impl PartialPermutation {
    pub fn empty(r: usize) -> Self {
        PartialPermutation { map: vec![None; r] }
    }

    /// Build from 0-based `(source, target)` pairs.
    pub fn from_pairs(r: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut map = vec![None; r];
        let mut hit = vec![false; r];
        for &(x, y) in pairs {
            if x >= r || y >= r {
                return Err(Error::Precondition(format!("pair ({x},{y}) outside 0..{r}")));
            }
            if map[x].is_some() || hit[y] {
                return Err(Error::Precondition(format!(
                    "pairs are not an injective partial map at ({x},{y})"
                )));
            }
            map[x] = Some(y);
            hit[y] = true;
        }
        Ok(PartialPermutation { map })
    }

    pub fn from_permutation(sigma: &Permutation) -> Self {
        PartialPermutation {
            map: sigma.images().iter().map(|&y| Some(y)).collect(),
        }
    }

    /// Parse `"{1>2, 2>1}"` (1-based) with ground set size `r`.
    pub fn parse(text: &str, r: usize) -> Result<Self> {
        let inner = text
            .trim()
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("expected {{...}} in {text:?}")))?;
        let mut pairs = Vec::new();
        for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (a, b) = item
                .split_once('>')
                .ok_or_else(|| Error::Parse(format!("expected x>y, got {item:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| Error::Parse(format!("bad point {s:?}")))
            };
            pairs.push((parse(a)? - 1, parse(b)? - 1));
        }
        Self::from_pairs(r, &pairs).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn r(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn get(&self, x: usize) -> Option<usize> {
        self.map[x]
    }

    pub fn dom_size(&self) -> usize {
        self.map.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.map.iter().all(Option::is_none)
    }

    pub fn is_full(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// `(source, target)` pairs sorted by source.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter_map(|(x, y)| y.map(|y| (x, y)))
    }

    pub fn to_permutation(&self) -> Option<Permutation> {
        let images: Option<Vec<usize>> = self.map.iter().copied().collect();
        images.and_then(|v| Permutation::from_images(v).ok())
    }

    fn same_r(&self, other: &Self) -> Result<()> {
        if self.r() != other.r() {
            Err(Error::DegreeMismatch(self.r(), other.r()))
        } else {
            Ok(())
        }
    }

    /// `self ≤ other` iff `other` extends `self`.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.same_r(other)?;
        Ok(self.leq_unchecked(other))
    }

    pub(crate) fn leq_unchecked(&self, other: &Self) -> bool {
        self.map
            .iter()
            .zip(&other.map)
            .all(|(a, b)| a.is_none() || a == b)
    }

    /// Least upper bound, or `None` when the union of the two maps is not an
    /// injective function.
    pub fn join(&self, other: &Self) -> Result<Option<Self>> {
        self.same_r(other)?;
        let r = self.r();
        let mut map = self.map.clone();
        let mut hit = vec![false; r];
        for y in self.map.iter().flatten() {
            hit[*y] = true;
        }
        for (x, b) in other.map.iter().enumerate() {
            let Some(y) = *b else { continue };
            match map[x] {
                Some(a) if a == y => {}
                Some(_) => return Ok(None),
                None => {
                    if hit[y] {
                        return Ok(None);
                    }
                    map[x] = Some(y);
                    hit[y] = true;
                }
            }
        }
        Ok(Some(PartialPermutation { map }))
    }

    /// The `γ` with `β = α ⊕ γ` for `α = self ≤ β`.
    pub fn direct_sum_complement(&self, beta: &Self) -> Result<Self> {
        if !self.leq(beta)? {
            return Err(Error::Precondition(format!("{self} is not below {beta}")));
        }
        Ok(PartialPermutation {
            map: self
                .map
                .iter()
                .zip(&beta.map)
                .map(|(a, b)| if a.is_some() { None } else { *b })
                .collect(),
        })
    }

    /// All `α ≤ self`, i.e. the restrictions to subsets of the domain.
    pub fn restrictions(&self) -> Vec<Self> {
        let dom: Vec<usize> = self.pairs().map(|(x, _)| x).collect();
        (0u32..1 << dom.len())
            .map(|mask| {
                let mut map = vec![None; self.r()];
                for (bit, &x) in dom.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        map[x] = self.map[x];
                    }
                }
                PartialPermutation { map }
            })
            .collect()
    }

    /// Every partial permutation of `{1..r}`, ordered by domain size and then
    /// lexicographically.
    pub fn enumerate_all(r: usize) -> Result<Vec<Self>> {
        caps::check("partial permutation r", r as u128, caps::current().partial_perm_r)?;
        fn rec(x: usize, r: usize, map: &mut Vec<Option<usize>>, hit: &mut Vec<bool>, out: &mut Vec<PartialPermutation>) {
            if x == r {
                out.push(PartialPermutation { map: map.clone() });
                return;
            }
            map[x] = None;
            rec(x + 1, r, map, hit, out);
            for y in 0..r {
                if !hit[y] {
                    hit[y] = true;
                    map[x] = Some(y);
                    rec(x + 1, r, map, hit, out);
                    hit[y] = false;
                }
            }
            map[x] = None;
        }
        let mut out = Vec::with_capacity(cardinality(r) as usize);
        rec(0, r, &mut vec![None; r], &mut vec![false; r], &mut out);
        out.sort_by(|a, b| a.dom_size().cmp(&b.dom_size()).then_with(|| a.cmp(b)));
        Ok(out)
    }
}

/// `(-1)^{|dom β| - |dom α|}`.
pub fn sign_between(alpha: &PartialPermutation, beta: &PartialPermutation) -> f64 {
    if (beta.dom_size() + alpha.dom_size()).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl fmt::Display for PartialPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .pairs()
            .map(|(x, y)| format!("{}>{}", x + 1, y + 1))
            .collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

impl fmt::Debug for PartialPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PP{}{}", self.r(), self)
    }
}
