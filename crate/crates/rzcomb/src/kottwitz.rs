//! Kottwitz sets `B(G, μ)`, local Shimura data, full Hodge–Newton
//! decomposability and the dimension formula for Rapoport–Zink spaces.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::linalg::{dot_q, in_lattice_q, lattice_coords, mat_vec, q, qi, to_q, MatZ, Q};
use crate::root_datum::{
    build_root_datum, leq_diff, levi_center_projection, orthogonal_nodes, Coweight, Family, Orth,
    Quotient, RootDatum,
};
use crate::Error;

/// A class `[b] ∈ B(G)`, recorded by its Newton and Kottwitz points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaConjClass {
    pub nu: Coweight,
    /// Class in `π₁(G)_Γ`, in the canonical coordinates of [`Quotient`].
    pub kappa: Vec<i64>,
    pub basic: bool,
    pub c: Option<Vec<i64>>,
    /// Simple roots of the centralizer Levi `M_ν`.
    #[serde(skip)]
    pub levi: Vec<usize>,
    /// A cocharacter whose `M_ν`-class is `κ_{M_ν}(b)`.
    #[serde(skip)]
    pub lambda: Vec<i64>,
}

fn phi_stable_subsets(rd: &RootDatum) -> Vec<Vec<usize>> {
    let r = rd.ss_rank();
    let perm = rd.phi_on_nodes();
    (0u32..(1u32 << r))
        .filter(|mask| (0..r).all(|i| (mask >> i & 1) == (mask >> perm[i] & 1)))
        .map(|mask| (0..r).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

fn node_orbits(rd: &RootDatum, nodes: &[usize]) -> Vec<Vec<usize>> {
    let perm = rd.phi_on_nodes();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &i in nodes {
        if seen.contains(&i) {
            continue;
        }
        let mut orb = vec![i];
        seen.insert(i);
        let mut j = perm[i];
        while j != i {
            orb.push(j);
            seen.insert(j);
            j = perm[j];
        }
        orb.sort_unstable();
        out.push(orb);
    }
    out
}

/// Coefficients of the non-central part of `x` in the simple coroots.
fn ss_coeffs(rd: &RootDatum, x: &[Q]) -> Vec<Q> {
    let all: Vec<usize> = (0..rd.ss_rank()).collect();
    let z = levi_center_projection(rd, &all, x);
    let d: Vec<Q> = x.iter().zip(&z).map(|(a, b)| a - b).collect();
    rd.coroot_coeffs(&d)
        .expect("semisimple part outside the coroot span")
}

/// `A_J = avg_Γ ∘ pr_J`, the Newton map of `M_J`-basic elements.
pub fn levi_newton(rd: &RootDatum, j: &[usize], x: &[Q]) -> Vec<Q> {
    rd.galois_average(&levi_center_projection(rd, j, x))
}

fn check_mu(rd: &RootDatum, mu: &Coweight) -> Result<Vec<i64>, Error> {
    if mu.num.len() != rd.dim {
        return Err(Error::Dimension {
            expected: rd.dim,
            got: mu.num.len(),
        });
    }
    let Some(m) = mu.integral() else {
        return Err(Error::Invalid(format!("μ = {mu} is not integral")));
    };
    if !rd.is_dominant_q(&mu.values()) {
        return Err(Error::Invalid(format!("μ = {mu} is not dominant")));
    }
    Ok(m)
}

/// Canonical linear extension of the dominance order: larger `⟨ρ, ν⟩` first,
/// ties broken by decreasing `ν`.
fn closure_sort(rd: &RootDatum, classes: &mut [SigmaConjClass]) {
    classes.sort_by(|a, b| {
        let ka = dot_rho(rd, &a.nu.values());
        let kb = dot_rho(rd, &b.nu.values());
        kb.cmp(&ka).then_with(|| b.nu.values().cmp(&a.nu.values()))
    });
}

fn dot_rho(rd: &RootDatum, x: &[Q]) -> Q {
    rd.rho
        .iter()
        .zip(x)
        .fold(Q::zero(), |acc, (r, v)| acc + r * v)
}

/// All classes of `B(G, μ)`, most ordinary first, basic last.
pub fn enumerate_bgmu(rd: &RootDatum, mu: &Coweight) -> Result<Vec<SigmaConjClass>, Error> {
    let mu_i = check_mu(rd, mu)?;
    let mu_q = to_q(&mu_i);
    let mu_bar = rd.galois_average(&mu_q);
    let coeff_bar = ss_coeffs(rd, &mu_bar);
    let coinv = rd.fundamental_group().coinvariants();
    let kappa = coinv.class(&mu_i);
    let mut out = Vec::new();
    for j in phi_stable_subsets(rd) {
        let jset: BTreeSet<usize> = j.iter().copied().collect();
        let outside: Vec<usize> = (0..rd.ss_rank()).filter(|i| !jset.contains(i)).collect();
        let orbits = node_orbits(rd, &outside);
        let a0 = levi_newton(rd, &j, &mu_q);
        let c0 = ss_coeffs(rd, &a0);
        let gens: Vec<Vec<Q>> = orbits
            .iter()
            .map(|o| levi_newton(rd, &j, &to_q(&rd.coroots[o[0]])))
            .collect();
        let mut ranges = Vec::with_capacity(orbits.len());
        for o in &orbits {
            let k = o[0];
            let size = qi(o.len() as i64);
            let lo = (-(c0[k]) * size).ceil().to_integer();
            let hi = ((coeff_bar[k] - c0[k]) * size).floor().to_integer();
            if lo > hi {
                break;
            }
            ranges.push((lo, hi));
        }
        if ranges.len() != orbits.len() {
            continue;
        }
        let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            let mut nu = a0.clone();
            for (g, &c) in gens.iter().zip(&cur) {
                for (x, y) in nu.iter_mut().zip(g) {
                    *x += *y * qi(c);
                }
            }
            let jn: Vec<usize> = orthogonal_nodes(rd, &nu).into_iter().collect();
            if jn == j && rd.is_dominant_q(&nu) {
                let diff: Vec<Q> = mu_bar.iter().zip(&nu).map(|(a, b)| a - b).collect();
                if leq_diff(rd, &diff, false) {
                    let mut lambda = mu_i.clone();
                    for (o, &c) in orbits.iter().zip(&cur) {
                        for (x, y) in lambda.iter_mut().zip(&rd.coroots[o[0]]) {
                            *x += c * y;
                        }
                    }
                    let basic = j.len() == rd.ss_rank();
                    out.push(SigmaConjClass {
                        nu: rd.coweight(nu),
                        kappa: kappa.clone(),
                        basic,
                        c: None,
                        levi: j.clone(),
                        lambda,
                    });
                }
            }
            // odometer
            let mut pos = 0;
            while pos < cur.len() {
                if cur[pos] < ranges[pos].1 {
                    cur[pos] += 1;
                    break;
                }
                cur[pos] = ranges[pos].0;
                pos += 1;
            }
            if pos == cur.len() {
                break;
            }
        }
    }
    closure_sort(rd, &mut out);
    for b in out.iter_mut() {
        b.c = Some(cbmu_inner(rd, &mu_i)?);
    }
    let basics = out.iter().filter(|b| b.basic).count();
    if basics != 1 {
        return Err(Error::Consistency(format!(
            "B(G, μ) has {basics} basic classes"
        )));
    }
    Ok(out)
}

/// `b' ≤ b` in the closure order: equal Kottwitz points and `ν' ≤ ν`.
pub fn closure_leq(rd: &RootDatum, b1: &SigmaConjClass, b2: &SigmaConjClass) -> bool {
    if b1.kappa != b2.kappa {
        return false;
    }
    let d: Vec<Q> = b2
        .nu
        .values()
        .iter()
        .zip(b1.nu.values())
        .map(|(a, b)| a - b)
        .collect();
    leq_diff(rd, &d, false)
}

/// Locate `(ν, κ)` inside `B(G, μ)`.
pub fn find_class<'a>(
    classes: &'a [SigmaConjClass],
    nu: &[Q],
    kappa: Option<&[i64]>,
) -> Option<&'a SigmaConjClass> {
    classes
        .iter()
        .find(|b| b.nu.values() == nu && kappa.is_none_or(|k| b.kappa == k))
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalDatum {
    #[serde(skip)]
    pub rd: RootDatum,
    pub mu: Coweight,
    pub b: SigmaConjClass,
    pub minuscule: bool,
    pub hodge_type: bool,
    pub abelian_type: bool,
    pub reason: String,
}

pub fn is_minuscule(rd: &RootDatum, mu: &[i64]) -> bool {
    let x = to_q(mu);
    rd.positive_roots()
        .iter()
        .all(|p| dot_q(&p.root, &x).abs() <= qi(1))
}

/// Weights of the declared faithful representation witnessing Hodge type.
fn hodge_weights(rd: &RootDatum) -> Option<Vec<Vec<i64>>> {
    let n = rd.dim;
    let unit = |i: usize| {
        let mut v = vec![0; n];
        v[i] = 1;
        v
    };
    match rd.family {
        Family::GL => Some((0..n).map(unit).collect()),
        Family::GSp => {
            let m = rd.size;
            let mut w: Vec<Vec<i64>> = (0..m).map(unit).collect();
            for i in 0..m {
                let mut v = vec![0; n];
                v[m] = 1;
                v[i] = -1;
                w.push(v);
            }
            Some(w)
        }
        Family::GSpin(_) => {
            // spin weights: (c; 1) with c ∈ {0,1}^m
            let m = rd.size;
            Some(
                (0u32..(1 << m))
                    .map(|mask| {
                        let mut v: Vec<i64> = (0..m).map(|i| i64::from(mask >> i & 1)).collect();
                        v.push(1);
                        v
                    })
                    .collect(),
            )
        }
        _ => None,
    }
}

fn hodge_shape(weights: &[Vec<i64>], mu: &[i64]) -> bool {
    weights
        .iter()
        .all(|w| matches!(crate::linalg::dot(w, mu), 0 | 1))
}

/// Validate a local Shimura datum and classify it.
pub fn validate_datum(
    rd: &RootDatum,
    mu: &Coweight,
    b: &SigmaConjClass,
) -> Result<LocalDatum, Error> {
    let mu_i = check_mu(rd, mu)?;
    let classes = enumerate_bgmu(rd, mu)?;
    let Some(found) = find_class(&classes, &b.nu.values(), Some(&b.kappa)) else {
        return Err(Error::Invalid(format!(
            "[b] with ν = {} is not in B(G, μ)",
            b.nu
        )));
    };
    let minuscule = is_minuscule(rd, &mu_i);
    let mut reason = String::new();
    let hodge_type = minuscule
        && match hodge_weights(rd) {
            Some(w) => {
                let ok = hodge_shape(&w, &mu_i);
                if !ok {
                    reason =
                        "μ is not of shape (1^r, 0^{n-r}) on the standard representation".into();
                }
                ok
            }
            None => {
                reason = format!("{} has no declared Hodge-type witness", rd.label());
                false
            }
        };
    let adjoint_match = minuscule && adjoint_hodge_lift(rd, &mu_i);
    let abelian_type = hodge_type || adjoint_match;
    if !minuscule {
        reason = "μ is not minuscule".into();
    } else if hodge_type {
        reason = "Hodge type".into();
    } else if abelian_type {
        reason = "adjoint datum agrees with a Hodge-type datum".into();
    }
    Ok(LocalDatum {
        rd: rd.clone(),
        mu: mu.clone(),
        b: found.clone(),
        minuscule,
        hodge_type,
        abelian_type,
        reason,
    })
}

/// Lift `μ` along the central isogenies `GL_n → PGL_n` and `GSpin → SO` and
/// test the Hodge-type shape upstairs.
fn adjoint_hodge_lift(rd: &RootDatum, mu: &[i64]) -> bool {
    match rd.family {
        Family::PGL => {
            let n = rd.size;
            let mut lift = vec![0i64; n];
            for i in (0..n - 1).rev() {
                lift[i] = lift[i + 1] + mu[i];
            }
            let lo = *lift.iter().min().unwrap();
            let lift: Vec<i64> = lift.iter().map(|x| x - lo).collect();
            let Ok(gl) = build_root_datum(Family::GL, n) else {
                return false;
            };
            is_minuscule(&gl, &lift) && hodge_shape(&hodge_weights(&gl).unwrap(), &lift)
        }
        Family::SO(o) => {
            let Ok(gs) = build_root_datum(Family::GSpin(o), rd.size) else {
                return false;
            };
            let w = hodge_weights(&gs).unwrap();
            (-2..=2).any(|t| {
                let mut lift = mu.to_vec();
                lift.push(t);
                is_minuscule(&gs, &lift) && hodge_shape(&w, &lift)
            })
        }
        _ => false,
    }
}

/// `Q_p`-rank of a quasi-split group: dimension of the Frobenius invariants.
pub fn qp_rank(rd: &RootDatum) -> usize {
    let n = rd.dim;
    let m: MatZ = (0..n)
        .map(|i| (0..n).map(|j| rd.phi[i][j] - i64::from(i == j)).collect())
        .collect();
    crate::linalg::kernel_z(&m, n).len()
}

/// Split `0..len` into maximal runs of equal value of `key`.
fn runs<T: PartialEq>(key: &[T]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut s = 0;
    for i in 1..=key.len() {
        if i == key.len() || key[i] != key[s] {
            out.push((s, i));
            s = i;
        }
    }
    out
}

/// `Q_p`-rank of `J_b` for a type-A Levi block of size `k` and degree `d`.
fn gl_block_rank(k: i64, d: i64) -> i64 {
    k.gcd(&d)
}

/// `Q_p`-rank of `J_b`.
pub fn jb_rank(rd: &RootDatum, b: &SigmaConjClass) -> Result<usize, Error> {
    let nu = b.nu.values();
    let lam = &b.lambda;
    let table_gap = |what: String| Error::DefectTable(format!("{} ({what})", rd.label()));
    let r: i64 = match rd.family {
        Family::GL => gl_rank_from_lambda(&nu, lam),
        Family::SL | Family::PGL => {
            let gl_lam = type_a_lift(rd, lam);
            let gl_nu = type_a_lift_q(rd, &nu);
            gl_rank_from_lambda(&gl_nu, &gl_lam) - 1
        }
        Family::Sp | Family::SO(_) => {
            let m = rd.size;
            let abs: Vec<Q> = nu[..m].iter().map(|x| x.abs()).collect();
            let mut rank = 0;
            let mut tail = Vec::new();
            for (s, e) in runs(&abs) {
                let v = abs[s];
                if v.is_zero() {
                    tail.extend(s..e);
                } else {
                    let k = (e - s) as i64;
                    let d = (v * qi(k)).to_integer();
                    rank += gl_block_rank(k, d);
                }
            }
            let kp = tail.len() as i64;
            let kappa: i64 = tail.iter().map(|&i| lam[i]).sum::<i64>().rem_euclid(2);
            rank + classical_factor_rank(rd.family, kp, kappa)
                .ok_or_else(|| table_gap(format!("factor of rank {kp} with κ = {kappa}")))?
        }
        Family::GSp => {
            let m = rd.size;
            let c = nu[m] / qi(2);
            let mut rank = 0;
            let mut kp = 0;
            for (s, e) in runs(&nu[..m]) {
                let v = nu[s];
                if v == c {
                    kp += (e - s) as i64;
                } else {
                    let k = (e - s) as i64;
                    let d = v * qi(k);
                    if !d.is_integer() {
                        return Err(table_gap("non-integral block degree".into()));
                    }
                    rank += gl_block_rank(k, d.to_integer());
                }
            }
            let nu0 = nu[m];
            if !nu0.is_integer() {
                return Err(table_gap("non-integral similitude slope".into()));
            }
            if nu0.to_integer().is_even() {
                rank + kp + 1
            } else {
                rank + kp / 2 + 1
            }
        }
        Family::GSpin(o) => {
            let so = build_root_datum(Family::SO(o), rd.size)?;
            let image = SigmaConjClass {
                nu: so.coweight(nu[..rd.size].to_vec()),
                kappa: Vec::new(),
                basic: b.basic,
                c: None,
                levi: b.levi.clone(),
                lambda: lam[..rd.size].to_vec(),
            };
            jb_rank(&so, &image)? as i64 + 1
        }
    };
    usize::try_from(r).map_err(|_| table_gap("negative rank".into()))
}

fn gl_rank_from_lambda(nu: &[Q], lam: &[i64]) -> i64 {
    runs(nu)
        .iter()
        .map(|&(s, e)| {
            let k = (e - s) as i64;
            let d: i64 = lam[s..e].iter().sum();
            gl_block_rank(k, d)
        })
        .sum()
}

/// Integral lift of an `SL_n` or `PGL_n` cocharacter to `GL_n`.
fn type_a_lift(rd: &RootDatum, x: &[i64]) -> Vec<i64> {
    let v = type_a_lift_q(rd, &to_q(x));
    v.iter().map(|c| c.to_integer()).collect()
}

fn type_a_lift_q(rd: &RootDatum, x: &[Q]) -> Vec<Q> {
    let n = rd.size;
    match rd.family {
        // coordinates in the simple coroots
        Family::SL => (0..n)
            .map(|i| {
                let a = if i < n - 1 { x[i] } else { Q::zero() };
                let b = if i > 0 { x[i - 1] } else { Q::zero() };
                a - b
            })
            .collect(),
        // coordinates ⟨α_i, x⟩
        Family::PGL => {
            let mut lift = vec![Q::zero(); n];
            for i in (0..n - 1).rev() {
                lift[i] = lift[i + 1] + x[i];
            }
            lift
        }
        _ => unreachable!(),
    }
}

/// Inner-form rank table for the classical factor `G'` of a Levi, where
/// `kp` is the rank of `G'` and `kappa` the parity of its Kottwitz point.
///
/// Odd orthogonal: the non-trivial inner form has anisotropic kernel of
/// dimension 3. Split even orthogonal: dimension 4. Quasi-split non-split
/// even orthogonal: both forms have a binary anisotropic kernel.
fn classical_factor_rank(family: Family, kp: i64, kappa: i64) -> Option<i64> {
    match (family, kp, kappa) {
        (_, 0, 0) => Some(0),
        (_, 0, _) => None,
        (Family::Sp, k, 0) => Some(k),
        (Family::SO(Orth::Odd), k, 0) => Some(k),
        (Family::SO(Orth::Odd), k, 1) => Some(k - 1),
        (Family::SO(Orth::EvenSplit), k, 0) => Some(k),
        (Family::SO(Orth::EvenSplit), 1, 1) => None,
        (Family::SO(Orth::EvenSplit), k, 1) => Some(k - 2),
        (Family::SO(Orth::EvenNonsplit), k, _) => Some(k - 1),
        _ => None,
    }
}

/// `def_G(b) = rank G − rank J_b`.
pub fn defect(rd: &RootDatum, b: &SigmaConjClass) -> Result<usize, Error> {
    let g = qp_rank(rd);
    let j = jb_rank(rd, b)?;
    g.checked_sub(j)
        .ok_or_else(|| Error::DefectTable(format!("{}: rank J_b exceeds rank G", rd.label())))
}

/// `⟨ρ, μ − ν⟩ − ½ def_G(b)`, required to be a non-negative integer.
pub fn rz_dimension(datum: &LocalDatum) -> Result<i64, Error> {
    rz_dimension_of(&datum.rd, &datum.mu, &datum.b)
}

pub fn rz_dimension_of(rd: &RootDatum, mu: &Coweight, b: &SigmaConjClass) -> Result<i64, Error> {
    let d: Vec<Q> = mu
        .values()
        .iter()
        .zip(b.nu.values())
        .map(|(a, b)| a - b)
        .collect();
    let dim = dot_rho(rd, &d) - q(defect(rd, b)? as i64, 2);
    if !dim.is_integer() || dim.is_negative() {
        return Err(Error::Consistency(format!(
            "dimension {dim} for ν = {} is not a non-negative integer",
            b.nu
        )));
    }
    Ok(dim.to_integer())
}

#[derive(Clone, Debug, Serialize)]
pub struct HnWitness {
    pub nu: Coweight,
    /// Simple roots of a proper standard Levi witnessing the decomposition.
    pub levi: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HnReport {
    pub decomposable: bool,
    pub witnesses: Vec<HnWitness>,
}

/// Does `κ_M(b) = μ^♯` hold in `π₁(M)_Γ` for the standard Levi `M = M_J`?
pub fn kappa_levi_matches(rd: &RootDatum, j: &[usize], lambda: &[i64], mu: &[i64]) -> bool {
    let n = rd.dim;
    let mut rel: Vec<Vec<i64>> = j.iter().map(|&i| rd.coroots[i].clone()).collect();
    for c in 0..n {
        let col: Vec<i64> = (0..n).map(|i| i64::from(i == c) - rd.phi[i][c]).collect();
        if col.iter().any(|&x| x != 0) {
            rel.push(col);
        }
    }
    let diff: Vec<i64> = lambda.iter().zip(mu).map(|(a, b)| a - b).collect();
    lattice_coords(&rel, &diff).is_some()
}

pub fn fully_hn_decomposable(rd: &RootDatum, mu: &Coweight) -> Result<HnReport, Error> {
    let mu_i = check_mu(rd, mu)?;
    let classes = enumerate_bgmu(rd, mu)?;
    let r = rd.ss_rank();
    let mut stable = phi_stable_subsets(rd);
    stable.retain(|s| s.len() < r);
    stable.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let mut witnesses = Vec::new();
    let mut all = true;
    for b in classes.iter().filter(|b| !b.basic) {
        let levi = stable
            .iter()
            .find(|s| {
                b.levi.iter().all(|i| s.contains(i)) && kappa_levi_matches(rd, s, &b.lambda, &mu_i)
            })
            .cloned();
        all &= levi.is_some();
        witnesses.push(HnWitness {
            nu: b.nu.clone(),
            levi,
        });
    }
    Ok(HnReport {
        decomposable: all,
        witnesses,
    })
}

/// Solve `(1 − φ)c = ω(b) − μ` in `π₁(G)` for the representative
/// `b ∈ G(W)σ(μ(p))G(W)`, so `ω(b) = [φμ]`.
pub fn cbmu(rd: &RootDatum, mu: &Coweight, b: &SigmaConjClass) -> Result<Vec<i64>, Error> {
    let mu_i = check_mu(rd, mu)?;
    if b.kappa != rd.kappa(&mu_i) {
        return Err(Error::Invalid("κ(b) differs from μ^♯".into()));
    }
    cbmu_inner(rd, &mu_i)
}

fn cbmu_inner(rd: &RootDatum, mu: &[i64]) -> Result<Vec<i64>, Error> {
    let quot = rd.fundamental_group().quotient();
    let factors = quot.factors();
    let omega = mat_vec(&rd.phi, mu);
    let target: Vec<i64> = omega.iter().zip(mu).map(|(a, b)| a - b).collect();
    let target = quot.class(&target);
    // exhaustive search in π₁, free factors restricted to a small window
    let ranges: Vec<i64> = factors
        .iter()
        .map(|&d| if d == 0 { 7 } else { d })
        .collect();
    let total: i64 = ranges.iter().product();
    let mut best: Option<Vec<i64>> = None;
    for idx in 0..total {
        let mut t = idx;
        let x: Vec<i64> = factors
            .iter()
            .zip(&ranges)
            .map(|(&d, &r)| {
                let v = t % r;
                t /= r;
                if d == 0 {
                    v - r / 2
                } else {
                    v
                }
            })
            .collect();
        let c = quot.lift(&x);
        let img: Vec<i64> = c
            .iter()
            .zip(mat_vec(&rd.phi, &c))
            .map(|(a, b)| a - b)
            .collect();
        if quot.class(&img) == target {
            let key = |v: &Vec<i64>| (v.iter().map(|x| x.abs()).sum::<i64>(), v.clone());
            if best.as_ref().is_none_or(|b| key(&x) < key(b)) {
                best = Some(x);
            }
        }
    }
    best.ok_or_else(|| Error::Invalid("no solution of the coboundary equation".into()))
}

/// Newton point test used by the oracles: does `(ν, κ)` occur in `B(G)` at
/// all, regardless of `μ`?
pub fn is_newton_point(rd: &RootDatum, nu: &[Q], kappa_rep: &[i64]) -> bool {
    if !rd.is_dominant_q(nu) || rd.apply_phi(nu) != nu {
        return false;
    }
    let j: Vec<usize> = orthogonal_nodes(rd, nu).into_iter().collect();
    let a0 = levi_newton(rd, &j, &to_q(kappa_rep));
    let mut gens: Vec<Vec<Q>> = (0..rd.ss_rank())
        .filter(|i| !j.contains(i))
        .map(|i| levi_newton(rd, &j, &to_q(&rd.coroots[i])))
        .collect();
    gens.retain(|g| g.iter().any(|x| !x.is_zero()));
    let d: Vec<Q> = nu.iter().zip(&a0).map(|(a, b)| a - b).collect();
    in_lattice_q(&gens, &d)
}

/// Serializable `B(G, μ)` table.
#[derive(Clone, Debug, Serialize)]
pub struct BgmuRow {
    pub nu: Coweight,
    pub kappa: Vec<i64>,
    pub basic: bool,
    pub dim: Option<i64>,
    pub defect: Option<usize>,
    pub hn_witness: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BgmuTable {
    pub family: String,
    pub mu: Coweight,
    pub classes: Vec<BgmuRow>,
}

pub fn bgmu_table(rd: &RootDatum, mu: &Coweight) -> Result<BgmuTable, Error> {
    let classes = enumerate_bgmu(rd, mu)?;
    let hn = fully_hn_decomposable(rd, mu)?;
    let mut wit = hn.witnesses.iter();
    let rows = classes
        .iter()
        .map(|b| BgmuRow {
            nu: b.nu.clone(),
            kappa: b.kappa.clone(),
            basic: b.basic,
            dim: rz_dimension_of(rd, mu, b).ok(),
            defect: defect(rd, b).ok(),
            hn_witness: if b.basic {
                None
            } else {
                wit.next().and_then(|w| w.levi.clone())
            },
        })
        .collect();
    Ok(BgmuTable {
        family: rd.label(),
        mu: mu.clone(),
        classes: rows,
    })
}

/// The orthogonal datum `(SO(V), μ)` with `dim V = n + 2`; `det_plus` means
/// `det V = (−1)^{n/2}` for even `n`.
pub fn orthogonal_datum(n: usize, det_plus: bool) -> Result<(RootDatum, Coweight), Error> {
    orthogonal_like(n, det_plus, false)
}

/// The spinor similitude datum `(GSpin(V), μ₁)` lifting [`orthogonal_datum`].
pub fn gspin_datum(n: usize, det_plus: bool) -> Result<(RootDatum, Coweight), Error> {
    orthogonal_like(n, det_plus, true)
}

pub fn orth_form(n: usize, det_plus: bool) -> (Orth, usize) {
    if n % 2 == 1 {
        (Orth::Odd, n.div_ceil(2))
    } else if det_plus {
        (Orth::EvenSplit, (n + 2) / 2)
    } else {
        (Orth::EvenNonsplit, (n + 2) / 2)
    }
}

fn orthogonal_like(n: usize, det_plus: bool, spin: bool) -> Result<(RootDatum, Coweight), Error> {
    if n < 1 {
        return Err(Error::Unsupported("n must be at least 1".into()));
    }
    let (o, m) = orth_form(n, det_plus);
    let fam = if spin {
        Family::GSpin(o)
    } else {
        Family::SO(o)
    };
    let rd = build_root_datum(fam, m)?;
    let mut mu = vec![0i64; rd.dim];
    mu[0] = 1;
    let mu = rd.coweight_int(&mu);
    Ok((rd, mu))
}

pub fn quotient_of(rd: &RootDatum) -> Quotient {
    rd.fundamental_group().coinvariants()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gl(n: usize) -> RootDatum {
        build_root_datum(Family::GL, n).unwrap()
    }

    fn nus(classes: &[SigmaConjClass]) -> Vec<Vec<Q>> {
        classes.iter().map(|b| b.nu.values()).collect()
    }

    #[test]
    fn gl2_examples() {
        let rd = gl(2);
        let b = enumerate_bgmu(&rd, &rd.coweight_int(&[1, 0])).unwrap();
        assert_eq!(nus(&b), vec![vec![qi(1), qi(0)], vec![q(1, 2), q(1, 2)]]);
        assert!(b[1].basic && !b[0].basic);
        let b = enumerate_bgmu(&rd, &rd.coweight_int(&[1, 1])).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].basic);
        assert_eq!(b[0].nu.num, vec![1, 1]);
    }

    #[test]
    fn rejects_bad_mu() {
        let rd = gl(2);
        assert!(enumerate_bgmu(&rd, &rd.coweight_int(&[0, 1])).is_err());
        assert!(enumerate_bgmu(&rd, &rd.coweight(vec![q(1, 2), qi(0)])).is_err());
    }

    #[test]
    fn k3_chain() {
        let (rd, mu) = orthogonal_datum(19, true).unwrap();
        let b = enumerate_bgmu(&rd, &mu).unwrap();
        assert_eq!(b.len(), 11);
        for (h, cls) in b.iter().take(10).enumerate() {
            let h = h as i64 + 1;
            let vals = cls.nu.values();
            for (i, v) in vals.iter().enumerate() {
                let want = if (i as i64) < h { q(1, h) } else { qi(0) };
                assert_eq!(*v, want);
            }
        }
        assert!(b[10].basic);
        for w in b.windows(2) {
            assert!(closure_leq(&rd, &w[1], &w[0]));
        }
    }

    #[test]
    fn defects_gl() {
        let rd = gl(2);
        let mu = rd.coweight_int(&[1, 0]);
        let b = enumerate_bgmu(&rd, &mu).unwrap();
        assert_eq!(defect(&rd, &b[0]).unwrap(), 0);
        assert_eq!(defect(&rd, &b[1]).unwrap(), 1);
        for n in 2..=5 {
            let rd = gl(n);
            let mut m = vec![0; n];
            m[0] = 1;
            let mu = rd.coweight_int(&m);
            let b = enumerate_bgmu(&rd, &mu).unwrap();
            let basic = b.iter().find(|c| c.basic).unwrap();
            assert_eq!(defect(&rd, basic).unwrap(), n - 1);
            assert_eq!(rz_dimension_of(&rd, &mu, basic).unwrap(), 0);
        }
    }

    #[test]
    fn siegel_supersingular_dimension() {
        // dimension of the supersingular locus is ⌊g²/4⌋
        for g in 1..=4 {
            let rd = build_root_datum(Family::GSp, g).unwrap();
            let mu = rd.coweight_int(&vec![1; g + 1]);
            let b = enumerate_bgmu(&rd, &mu).unwrap();
            let basic = b.iter().find(|c| c.basic).unwrap();
            let g = g as i64;
            assert_eq!(rz_dimension_of(&rd, &mu, basic).unwrap(), g * g / 4);
        }
    }

    #[test]
    fn orthogonal_dims() {
        for n in 1..=12 {
            for det in [true, false] {
                let (rd, mu) = orthogonal_datum(n, det).unwrap();
                let b = enumerate_bgmu(&rd, &mu).unwrap();
                for cls in &b {
                    let d = rz_dimension_of(&rd, &mu, cls).unwrap();
                    if !cls.basic {
                        assert_eq!(d, 0, "n={n}");
                    }
                }
                assert!(fully_hn_decomposable(&rd, &mu).unwrap().decomposable);
            }
        }
    }

    #[test]
    fn hn_examples() {
        for n in 2..=5 {
            let rd = gl(n);
            let mut m = vec![0; n];
            m[0] = 1;
            assert!(
                fully_hn_decomposable(&rd, &rd.coweight_int(&m))
                    .unwrap()
                    .decomposable
            );
        }
        let rd = gl(5);
        let r = fully_hn_decomposable(&rd, &rd.coweight_int(&[1, 1, 0, 0, 0])).unwrap();
        assert!(!r.decomposable);
        let rd = gl(4);
        let r = fully_hn_decomposable(&rd, &rd.coweight_int(&[2, 0, 0, 0])).unwrap();
        assert!(!r.decomposable);
    }

    #[test]
    fn validate_examples() {
        let rd = gl(3);
        let mu = rd.coweight_int(&[1, 0, 0]);
        let b = enumerate_bgmu(&rd, &mu).unwrap();
        let d = validate_datum(&rd, &mu, &b[0]).unwrap();
        assert!(d.minuscule && d.hodge_type && d.abelian_type);

        let pgl = build_root_datum(Family::PGL, 3).unwrap();
        let mu = pgl.coweight_int(&[1, 0]);
        let b = enumerate_bgmu(&pgl, &mu).unwrap();
        let d = validate_datum(&pgl, &mu, b.last().unwrap()).unwrap();
        assert!(d.abelian_type && !d.hodge_type);

        let (so, mu) = orthogonal_datum(5, true).unwrap();
        let b = enumerate_bgmu(&so, &mu).unwrap();
        let d = validate_datum(&so, &mu, &b[0]).unwrap();
        assert!(d.abelian_type && !d.hodge_type);

        let (gs, mu1) = gspin_datum(5, true).unwrap();
        let b = enumerate_bgmu(&gs, &mu1).unwrap();
        let d = validate_datum(&gs, &mu1, &b[0]).unwrap();
        assert!(d.hodge_type);

        // a class of B(GL_2) outside B(GL_2, (1,0))
        let rd = gl(2);
        let mu = rd.coweight_int(&[1, 0]);
        let mut fake = enumerate_bgmu(&rd, &mu).unwrap()[0].clone();
        fake.nu = rd.coweight_int(&[2, -1]);
        assert!(validate_datum(&rd, &mu, &fake).is_err());
    }

    #[test]
    fn cbmu_cases() {
        let rd = gl(3);
        let mu = rd.coweight_int(&[1, 0, 0]);
        let b = enumerate_bgmu(&rd, &mu).unwrap();
        assert_eq!(cbmu(&rd, &mu, &b[0]).unwrap(), vec![0]);
        let (so, mu) = orthogonal_datum(6, false).unwrap();
        let b = enumerate_bgmu(&so, &mu).unwrap();
        assert_eq!(cbmu(&so, &mu, &b[0]).unwrap(), vec![0]);
    }
}
