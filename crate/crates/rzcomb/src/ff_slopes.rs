//! Slope bookkeeping for vector bundles on the Fargues–Fontaine curve, and
//! the case scan showing that weak admissibility forces the trivial
//! Harder–Narasimhan type for the basic orthogonal datum.

use std::fmt;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::linalg::{qi, Q};
use crate::{fmt_q, Error};

/// `⊕ O(λ)^{m_λ}` with slopes strictly decreasing. The zero bundle has no
/// parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BundleType {
    parts: Vec<(Q, u32)>,
}

impl BundleType {
    /// Sorts and merges; rejects zero multiplicities and the empty bundle.
    pub fn new(parts: &[(Q, u32)]) -> Result<Self, Error> {
        if parts.iter().any(|&(_, m)| m == 0) {
            return Err(Error::Invalid("zero multiplicity".into()));
        }
        let mut ps = parts.to_vec();
        ps.sort_by(|a, b| b.0.cmp(&a.0));
        let mut merged: Vec<(Q, u32)> = Vec::new();
        for (s, m) in ps {
            match merged.last_mut() {
                Some(last) if last.0 == s => last.1 += m,
                _ => merged.push((s, m)),
            }
        }
        if merged.is_empty() {
            return Err(Error::Invalid("a bundle type needs rank ≥ 1".into()));
        }
        Ok(BundleType { parts: merged })
    }

    pub fn zero() -> Self {
        BundleType { parts: Vec::new() }
    }

    pub fn trivial(n: u32) -> Self {
        BundleType {
            parts: vec![(qi(0), n)],
        }
    }

    /// `O(1/r) ⊕ O^{n−2r} ⊕ O(−1/r)`.
    pub fn isotropic_split_type(n: u32, r: u32) -> Result<Self, Error> {
        if r == 0 || 2 * r > n {
            return Err(Error::Invalid(format!(
                "need 1 ≤ r ≤ n/2, got r = {r}, n = {n}"
            )));
        }
        let mut parts = vec![(Q::new(1, i64::from(r)), 1), (Q::new(-1, i64::from(r)), 1)];
        if n > 2 * r {
            parts.push((qi(0), n - 2 * r));
        }
        Self::new(&parts)
    }

    pub fn parts(&self) -> &[(Q, u32)] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// `(rank, degree)`.
    pub fn rank_degree(&self) -> (i64, i64) {
        self.parts.iter().fold((0, 0), |(r, d), (s, m)| {
            let m = i64::from(*m);
            (r + s.denom() * m, d + s.numer() * m)
        })
    }

    pub fn direct_sum(&self, other: &BundleType) -> BundleType {
        let mut parts = self.parts.clone();
        parts.extend_from_slice(&other.parts);
        if parts.is_empty() {
            return BundleType::zero();
        }
        Self::new(&parts).expect("non-empty sum")
    }

    pub fn dual(&self) -> BundleType {
        let mut parts: Vec<(Q, u32)> = self.parts.iter().map(|&(s, m)| (-s, m)).collect();
        parts.reverse();
        BundleType { parts }
    }

    pub fn is_self_dual(&self) -> bool {
        self.dual() == *self
    }

    /// The semistable slope-0 types.
    pub fn is_trivial(&self) -> bool {
        self.parts.len() == 1 && self.parts[0].0.is_zero()
    }

    /// HN step `E^{≥λ}`.
    pub fn step_ge(&self, lambda: Q) -> BundleType {
        BundleType {
            parts: self
                .parts
                .iter()
                .copied()
                .filter(|p| p.0 >= lambda)
                .collect(),
        }
    }

    /// HN step `E^{>λ}`.
    pub fn step_gt(&self, lambda: Q) -> BundleType {
        BundleType {
            parts: self
                .parts
                .iter()
                .copied()
                .filter(|p| p.0 > lambda)
                .collect(),
        }
    }

    /// HN polygon vertices `(rank, degree)` from the origin.
    pub fn polygon(&self) -> Vec<(i64, i64)> {
        let mut out = vec![(0, 0)];
        let (mut r, mut d) = (0, 0);
        for (s, m) in &self.parts {
            r += s.denom() * i64::from(*m);
            d += s.numer() * i64::from(*m);
            out.push((r, d));
        }
        out
    }

    /// Orthogonal of an HN step under a perfect symmetric pairing:
    /// `(E^{≥λ})^⊥ = E^{>−λ}`.
    pub fn perp(&self, step: &BundleType) -> Result<BundleType, Error> {
        if !self.is_self_dual() {
            return Err(Error::Invalid(format!("{self} is not self-dual")));
        }
        let Some(&(lambda, _)) = step.parts.last() else {
            return Ok(self.clone());
        };
        if self.step_ge(lambda) != *step {
            return Err(Error::Invalid(format!(
                "{step} is not an HN step of {self}"
            )));
        }
        Ok(self.step_gt(-lambda))
    }
}

fn fmt_slope(s: &Q) -> String {
    if s.is_integer() {
        s.numer().to_string()
    } else {
        fmt_q(s)
    }
}

impl fmt::Display for BundleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let items: Vec<String> = self
            .parts
            .iter()
            .map(|(s, m)| {
                let base = if s.is_zero() {
                    "O".to_string()
                } else {
                    format!("O({})", fmt_slope(s))
                };
                if *m == 1 {
                    base
                } else {
                    format!("{base}^{m}")
                }
            })
            .collect();
        write!(f, "{}", items.join(" ⊕ "))
    }
}

impl Serialize for BundleType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Relative position of a rank-`r` sub-modification, entries decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModificationType(Vec<i64>);

impl ModificationType {
    pub fn new(mut v: Vec<i64>) -> Self {
        v.sort_unstable_by(|a, b| b.cmp(a));
        ModificationType(v)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// Degree change of the modified bundle.
    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }

    /// The three relative positions a sub-modification of `μ = (1,0,…,0,−1)`
    /// can have in rank `r`.
    pub fn candidates(r: usize) -> Vec<ModificationType> {
        let mut minus = vec![0; r];
        minus[0] = -1;
        let mut plus = vec![0; r];
        plus[r - 1] = 1;
        vec![
            ModificationType::new(minus),
            ModificationType::new(plus),
            ModificationType::new(vec![0; r]),
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModificationCase {
    pub modification: ModificationType,
    /// `deg ℱ = deg O(1/r) + deg(modification)`.
    pub sub_degree: i64,
    /// `deg ℱ ≤ 0` inside the semistable `O^n`.
    pub allowed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EliminatedCase {
    pub r: u32,
    pub bundle: BundleType,
    pub isotropic_step: BundleType,
    pub perp: BundleType,
    pub totally_isotropic: bool,
    pub modifications: Vec<ModificationCase>,
    pub forced_modification_degree: i64,
    pub forced_sub: BundleType,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeScan {
    pub n: u32,
    pub eliminated: Vec<EliminatedCase>,
    pub survivors: Vec<String>,
}

/// Walk the case list `O(1/r) ⊕ O^{n−2r} ⊕ O(−1/r)`, `1 ≤ r ≤ ⌊n/2⌋`, and
/// `O^n`, eliminating every non-trivial type.
pub fn admissible_type_scan(n: u32) -> Result<TypeScan, Error> {
    if n < 3 {
        return Err(Error::Invalid(format!("need n ≥ 3, got {n}")));
    }
    let mut eliminated = Vec::new();
    let mut survivors = Vec::new();
    for r in 1..=n / 2 {
        let e = BundleType::isotropic_split_type(n, r)?;
        let (rank, deg) = e.rank_degree();
        if rank != i64::from(n) || deg != 0 {
            return Err(Error::Consistency(format!(
                "{e} has rank {rank}, degree {deg}"
            )));
        }
        let top = e.step_ge(Q::new(1, i64::from(r)));
        let perp = e.perp(&top)?;
        // a step contained in its own orthogonal is totally isotropic
        let totally_isotropic = perp.step_ge(Q::new(1, i64::from(r))) == top;
        let (_, top_deg) = top.rank_degree();
        let modifications: Vec<ModificationCase> = ModificationType::candidates(r as usize)
            .into_iter()
            .map(|m| {
                let sub_degree = top_deg + m.degree();
                ModificationCase {
                    modification: m,
                    sub_degree,
                    allowed: sub_degree <= 0,
                }
            })
            .collect();
        let allowed: Vec<&ModificationCase> = modifications.iter().filter(|c| c.allowed).collect();
        let [forced] = allowed.as_slice() else {
            survivors.push(e.to_string());
            continue;
        };
        // a degree-0 subbundle of the semistable O^n is O^r = W ⊗ O with W
        // rational and totally isotropic, so D ∩ W_C ≠ 0
        let forced_sub = if forced.sub_degree == 0 {
            BundleType::trivial(r)
        } else {
            survivors.push(e.to_string());
            continue;
        };
        if !totally_isotropic {
            survivors.push(e.to_string());
            continue;
        }
        eliminated.push(EliminatedCase {
            r,
            bundle: e,
            isotropic_step: top,
            perp,
            totally_isotropic,
            forced_modification_degree: forced.modification.degree(),
            modifications: modifications.clone(),
            forced_sub,
            verdict: "contradicts weak admissibility".into(),
        });
    }
    // O^n is semistable of slope 0, hence admissible
    if BundleType::trivial(n).is_trivial() {
        survivors.push("trivial".into());
    }
    Ok(TypeScan {
        n,
        eliminated,
        survivors,
    })
}

/// Concavity of the HN polygon: successive slopes decrease.
pub fn polygon_is_concave(bt: &BundleType) -> bool {
    let pts = bt.polygon();
    pts.windows(3).all(|w| {
        let s1 = Q::new(w[1].1 - w[0].1, w[1].0 - w[0].0);
        let s2 = Q::new(w[2].1 - w[1].1, w[2].0 - w[1].0);
        s1 > s2
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    #[test]
    fn rank_degree_examples() {
        for n in 3..=10u32 {
            for r in 1..=n / 2 {
                assert_eq!(
                    BundleType::isotropic_split_type(n, r)
                        .unwrap()
                        .rank_degree(),
                    (i64::from(n), 0)
                );
            }
            assert_eq!(BundleType::trivial(n).rank_degree(), (i64::from(n), 0));
        }
        assert_eq!(
            BundleType::new(&[(q(1, 2), 1)]).unwrap().rank_degree(),
            (2, 1)
        );
    }

    #[test]
    fn dual_and_perp() {
        let o = BundleType::new(&[(q(1, 3), 1)]).unwrap();
        assert_eq!(o.dual(), BundleType::new(&[(q(-1, 3), 1)]).unwrap());
        let e = BundleType::isotropic_split_type(8, 3).unwrap();
        assert_eq!(
            e.perp(&o).unwrap(),
            BundleType::new(&[(q(1, 3), 1), (qi(0), 2)]).unwrap()
        );
        assert!(e.perp(&e).unwrap().is_zero());
        assert_eq!(e.perp(&BundleType::zero()).unwrap(), e);
        assert!(o.perp(&o).is_err());
    }

    #[test]
    fn modification_degrees() {
        let c = ModificationType::candidates(3);
        assert_eq!(
            c.iter().map(|m| m.degree()).collect::<Vec<_>>(),
            vec![-1, 1, 0]
        );
    }

    #[test]
    fn scan() {
        for n in 3..=10 {
            let s = admissible_type_scan(n).unwrap();
            assert_eq!(s.survivors, vec!["trivial".to_string()]);
            assert_eq!(s.eliminated.len() as u32, n / 2);
            assert!(s
                .eliminated
                .iter()
                .all(|c| c.forced_modification_degree == -1));
        }
    }
}
