//! Brute-force oracles over Galois rings `W_m(F_{p^k})`: lattice models of
//! affine Deligne–Lusztig sets, the `GL_n → PGL_n` cartesian square,
//! special lattices in quadratic spaces, and Deligne–Lusztig point counts.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::Serialize;

use crate::linalg::Q;
use crate::Error;

/// Element of a Galois ring: coefficients in the basis `1, x, …, x^{k−1}`,
/// each in `[0, p^m)`.
pub type El = Vec<i64>;
pub type MatG = Vec<Vec<El>>;

const MAX_MODULUS: i64 = 1_000_000_000_000_000_000;

fn is_prime(p: i64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn vp(mut c: i64, p: i64) -> u32 {
    let mut v = 0;
    while c % p == 0 {
        c /= p;
        v += 1;
    }
    v
}

/// Polynomials over `F_p`, lowest degree first.
mod fp_poly {
    pub fn trim(mut a: Vec<i64>) -> Vec<i64> {
        while a.len() > 1 && *a.last().unwrap() == 0 {
            a.pop();
        }
        a
    }

    pub fn rem(a: &[i64], b: &[i64], p: i64) -> Vec<i64> {
        let mut r = a.to_vec();
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], p);
        while r.len() > db && !(r.len() == 1 && r[0] == 0) {
            let dr = r.len() - 1;
            let c = r[dr] * lead_inv % p;
            for i in 0..=db {
                r[dr - db + i] = (r[dr - db + i] - c * b[i]).rem_euclid(p);
            }
            r = trim(r);
            if r.len() - 1 < db || (r.len() == 1 && r[0] == 0) {
                break;
            }
        }
        r
    }

    pub fn inv_mod(a: i64, p: i64) -> i64 {
        (1..p).find(|x| (a * x).rem_euclid(p) == 1).unwrap()
    }

    /// `f` is irreducible iff no monic polynomial of degree `≤ deg f / 2`
    /// divides it.
    pub fn is_irreducible(f: &[i64], p: i64) -> bool {
        let k = f.len() - 1;
        for d in 1..=k / 2 {
            let count = p.pow(d as u32);
            for idx in 0..count {
                let mut g = vec![0i64; d + 1];
                let mut t = idx;
                for c in g.iter_mut().take(d) {
                    *c = t % p;
                    t /= p;
                }
                g[d] = 1;
                let r = rem(f, &g, p);
                if r.iter().all(|&c| c == 0) {
                    return false;
                }
            }
        }
        true
    }
}

/// The Galois ring `GR(p^m, k) = W_m(F_{p^k})` with its Frobenius.
#[derive(Clone, Debug)]
pub struct GaloisRing {
    pub p: i64,
    pub k: usize,
    pub m: u32,
    pub modulus: i64,
    /// Monic defining polynomial, lowest degree first, length `k + 1`.
    pub f: Vec<i64>,
    frob: Vec<El>,
}

impl GaloisRing {
    pub fn new(p: i64, k: usize, m: u32) -> Result<Self, Error> {
        if !is_prime(p) {
            return Err(Error::Unsupported(format!("p = {p} is not prime")));
        }
        if k == 0 || m == 0 {
            return Err(Error::Invalid("k and m must be positive".into()));
        }
        let modulus = p
            .checked_pow(m)
            .filter(|&x| x <= MAX_MODULUS)
            .ok_or_else(|| {
                Error::Precision(format!("p^m = {p}^{m} exceeds the arithmetic range"))
            })?;
        let f = Self::defining_polynomial(p, k);
        let mut ring = GaloisRing {
            p,
            k,
            m,
            modulus,
            f,
            frob: Vec::new(),
        };
        ring.frob = ring.frobenius_table()?;
        Ok(ring)
    }

    /// First monic irreducible polynomial of degree `k` over `F_p` with
    /// non-zero constant term, in lexicographic order of coefficients.
    fn defining_polynomial(p: i64, k: usize) -> Vec<i64> {
        if k == 1 {
            return vec![0, 1];
        }
        let total = p.pow(k as u32);
        for idx in 0..total {
            let mut f = vec![0i64; k + 1];
            let mut t = idx;
            for c in f.iter_mut().take(k) {
                *c = t % p;
                t /= p;
            }
            f[k] = 1;
            if f[0] != 0 && fp_poly::is_irreducible(&f, p) {
                return f;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// `σ(x)` is the root of `f` congruent to `x^p`, found by Newton
    /// iteration; `σ(x^i) = σ(x)^i`.
    fn frobenius_table(&self) -> Result<Vec<El>, Error> {
        let k = self.k;
        if k == 1 {
            return Ok(vec![self.one()]);
        }
        let mut x = self.zero();
        x[1] = 1;
        let mut y = self.pow(&x, self.p as u64);
        for _ in 0..=self.m {
            let fy = self.eval_f(&y);
            let dfy = self.eval_df(&y);
            let step = self.mul(&fy, &self.inv(&dfy)?);
            y = self.sub(&y, &step);
        }
        if !self.is_zero(&self.eval_f(&y)) {
            return Err(Error::Consistency(
                "Hensel lift of the Frobenius failed".into(),
            ));
        }
        let mut table = vec![self.one()];
        for i in 1..k {
            table.push(self.mul(&table[i - 1], &y));
        }
        Ok(table)
    }

    fn eval_f(&self, y: &El) -> El {
        let mut acc = self.zero();
        for c in self.f.iter().rev() {
            acc = self.add(&self.mul(&acc, y), &self.from_int(*c));
        }
        acc
    }

    fn eval_df(&self, y: &El) -> El {
        let mut acc = self.zero();
        for (i, c) in self.f.iter().enumerate().skip(1).rev() {
            acc = self.add(&self.mul(&acc, y), &self.from_int(c * i as i64));
        }
        acc
    }

    /// Residue field size `p^k`.
    pub fn q(&self) -> i64 {
        self.p.pow(self.k as u32)
    }

    fn red(&self, x: i128) -> i64 {
        x.rem_euclid(i128::from(self.modulus)) as i64
    }

    pub fn zero(&self) -> El {
        vec![0; self.k]
    }

    pub fn one(&self) -> El {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> El {
        let mut v = self.zero();
        v[0] = self.red(i128::from(c));
        v
    }

    pub fn add(&self, a: &El, b: &El) -> El {
        a.iter()
            .zip(b)
            .map(|(x, y)| self.red(i128::from(*x) + i128::from(*y)))
            .collect()
    }

    pub fn sub(&self, a: &El, b: &El) -> El {
        a.iter()
            .zip(b)
            .map(|(x, y)| self.red(i128::from(*x) - i128::from(*y)))
            .collect()
    }

    pub fn neg(&self, a: &El) -> El {
        a.iter().map(|x| self.red(-i128::from(*x))).collect()
    }

    pub fn scale(&self, a: &El, c: i64) -> El {
        a.iter()
            .map(|x| self.red(i128::from(*x) * i128::from(c)))
            .collect()
    }

    pub fn mul(&self, a: &El, b: &El) -> El {
        let k = self.k;
        let md = i128::from(self.modulus);
        let mut prod = vec![0i128; 2 * k - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + i128::from(x) * i128::from(y)) % md;
            }
        }
        for d in (k..2 * k - 1).rev() {
            let c = prod[d];
            if c != 0 {
                for i in 0..k {
                    prod[d - k + i] = (prod[d - k + i] - c * i128::from(self.f[i])) % md;
                }
                prod[d] = 0;
            }
        }
        prod[..k].iter().map(|&x| self.red(x)).collect()
    }

    pub fn pow(&self, a: &El, mut e: u64) -> El {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, a: &El) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// `p`-adic valuation, `m` for zero.
    pub fn val(&self, a: &El) -> u32 {
        a.iter()
            .filter(|&&c| c != 0)
            .map(|&c| vp(c, self.p))
            .min()
            .unwrap_or(self.m)
    }

    pub fn p_pow(&self, e: u32) -> El {
        if e >= self.m {
            self.zero()
        } else {
            self.from_int(self.p.pow(e))
        }
    }

    /// `a / p^v` for `a` divisible by `p^v`, determined modulo `p^{m−v}`.
    pub fn div_p_pow(&self, a: &El, v: u32) -> El {
        let d = self.p.pow(v);
        a.iter().map(|&c| c / d).collect()
    }

    /// `a = r + p^e c` with the coefficients of `r` in `[0, p^e)`.
    pub fn split_mod(&self, a: &El, e: u32) -> (El, El) {
        let d = self.p.pow(e);
        let r: El = a.iter().map(|&c| c % d).collect();
        let c: El = a.iter().map(|&c| c / d).collect();
        (r, c)
    }

    pub fn inv(&self, a: &El) -> Result<El, Error> {
        if self.val(a) > 0 {
            return Err(Error::Invalid("inverting a non-unit".into()));
        }
        let q = self.q() as u64;
        let mut b = self.pow(a, q - 2);
        let two = self.from_int(2);
        let mut prec = 1;
        while prec < self.m {
            b = self.mul(&b, &self.sub(&two, &self.mul(a, &b)));
            prec *= 2;
        }
        b = self.mul(&b, &self.sub(&two, &self.mul(a, &b)));
        Ok(b)
    }

    pub fn frob(&self, a: &El) -> El {
        let mut acc = self.zero();
        for (c, img) in a.iter().zip(&self.frob) {
            if *c != 0 {
                acc = self.add(&acc, &self.scale(img, *c));
            }
        }
        acc
    }

    pub fn frob_pow(&self, a: &El, r: usize) -> El {
        (0..r).fold(a.clone(), |x, _| self.frob(&x))
    }

    /// All elements with coefficients in `[0, p^e)`: a system of
    /// representatives of `W / p^e`.
    pub fn representatives(&self, e: u32) -> Vec<El> {
        let d = self.p.pow(e);
        let count = d.pow(self.k as u32);
        (0..count)
            .map(|mut t| {
                (0..self.k)
                    .map(|_| {
                        let c = t % d;
                        t /= d;
                        c
                    })
                    .collect()
            })
            .collect()
    }

    /// Every element of the ring, if there are at most `limit`.
    pub fn elements(&self, limit: i64) -> Result<Vec<El>, Error> {
        let size = (self.modulus as i128).pow(self.k as u32);
        if size > i128::from(limit) {
            return Err(Error::Resource(format!("ring has {size} elements")));
        }
        Ok(self.representatives(self.m))
    }

    /// `σ^k = id` on the generator.
    pub fn frobenius_has_order_k(&self) -> bool {
        let mut x = self.zero();
        if self.k > 1 {
            x[1] = 1;
        } else {
            x[0] = 1;
        }
        self.frob_pow(&x, self.k) == x
    }

    /// Elements fixed by `σ`, if the ring is small enough to scan.
    pub fn fixed_subring(&self, limit: i64) -> Result<Vec<El>, Error> {
        Ok(self
            .elements(limit)?
            .into_iter()
            .filter(|a| self.frob(a) == *a)
            .collect())
    }

    pub fn mat_mul(&self, a: &MatG, b: &MatG) -> MatG {
        let n = a.len();
        let c = b[0].len();
        (0..n)
            .map(|i| {
                (0..c)
                    .map(|j| {
                        let mut acc = self.zero();
                        for (t, x) in a[i].iter().enumerate() {
                            if !self.is_zero(x) && !self.is_zero(&b[t][j]) {
                                acc = self.add(&acc, &self.mul(x, &b[t][j]));
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    pub fn mat_frob(&self, a: &MatG) -> MatG {
        a.iter()
            .map(|row| row.iter().map(|x| self.frob(x)).collect())
            .collect()
    }

    pub fn mat_from_int(&self, a: &[Vec<i64>]) -> MatG {
        a.iter()
            .map(|row| row.iter().map(|&c| self.from_int(c)).collect())
            .collect()
    }

    pub fn identity(&self, n: usize) -> MatG {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { self.one() } else { self.zero() })
                    .collect()
            })
            .collect()
    }
}

/// Elementary divisors, weakly decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelPosition {
    pub exps: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct SmithGr {
    /// Exponents in the order found (weakly increasing); `None` marks a
    /// divisor at or beyond the precision limit.
    pub exps: Vec<Option<u32>>,
    pub u: MatG,
    pub v: MatG,
}

/// Smith form `U·M·V = diag(p^{e_i})` treating valuations `≥ lim` as zero.
pub fn smith_limited(ring: &GaloisRing, mat: &MatG, lim: u32) -> SmithGr {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut a = mat.clone();
    let mut u = ring.identity(rows);
    let mut v = ring.identity(cols);
    let mut exps = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, x) in row.iter().enumerate().skip(t) {
                let vx = ring.val(x).min(lim);
                if best.is_none_or(|b| vx < b.0) {
                    best = Some((vx, i, j));
                }
            }
        }
        let (e, bi, bj) = best.unwrap();
        if e >= lim {
            exps.extend((t..rows.min(cols)).map(|_| None));
            break;
        }
        a.swap(t, bi);
        u.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        for row in v.iter_mut() {
            row.swap(t, bj);
        }
        let unit = ring.div_p_pow(&a[t][t], e);
        let ui = ring.inv(&unit).expect("pivot unit");
        a[t] = a[t].iter().map(|x| ring.mul(x, &ui)).collect();
        u[t] = u[t].iter().map(|x| ring.mul(x, &ui)).collect();
        for i in t + 1..rows {
            if ring.is_zero(&a[i][t]) {
                continue;
            }
            let c = ring.div_p_pow(&a[i][t], e);
            for j in 0..cols {
                let d = ring.mul(&c, &a[t][j]);
                a[i][j] = ring.sub(&a[i][j], &d);
            }
            for j in 0..rows {
                let d = ring.mul(&c, &u[t][j]);
                u[i][j] = ring.sub(&u[i][j], &d);
            }
        }
        for j in t + 1..cols {
            if ring.is_zero(&a[t][j]) {
                continue;
            }
            let c = ring.div_p_pow(&a[t][j], e);
            for row in a.iter_mut() {
                let d = ring.mul(&c, &row[t]);
                row[j] = ring.sub(&row[j], &d);
            }
            for row in v.iter_mut() {
                let d = ring.mul(&c, &row[t]);
                row[j] = ring.sub(&row[j], &d);
            }
        }
        exps.push(Some(e));
    }
    SmithGr { exps, u, v }
}

/// Smith form at full precision; a pivot of valuation `≥ m − guard` is a
/// precision error.
pub fn smith_form(
    ring: &GaloisRing,
    mat: &MatG,
    guard: u32,
) -> Result<(RelPosition, MatG, MatG), Error> {
    let lim = ring.m.saturating_sub(guard);
    let s = smith_limited(ring, mat, lim);
    let mut exps = Vec::with_capacity(s.exps.len());
    for e in &s.exps {
        match e {
            Some(e) => exps.push(*e),
            None => {
                return Err(Error::Precision(format!(
                    "pivot valuation reached {lim} at precision {}",
                    ring.m
                )))
            }
        }
    }
    exps.sort_unstable_by(|a, b| b.cmp(a));
    Ok((RelPosition { exps }, s.u, s.v))
}

/// Upper triangular Hermite form of the lattice spanned by the columns of
/// `gens` (`n` rows): diagonal `p^{e_i}`, entries above the diagonal with
/// coefficients in `[0, p^{e_i})`.
pub fn hermite_form(ring: &GaloisRing, gens: &MatG) -> Result<(MatG, Vec<u32>), Error> {
    let n = gens.len();
    let r = if n == 0 { 0 } else { gens[0].len() };
    let mut cols: Vec<Vec<El>> = (0..r)
        .map(|j| (0..n).map(|i| gens[i][j].clone()).collect())
        .collect();
    let mut placed: Vec<Option<Vec<El>>> = vec![None; n];
    let mut e = vec![0u32; n];
    for i in (0..n).rev() {
        let Some((pos, v)) = cols
            .iter()
            .enumerate()
            .map(|(c, col)| (c, ring.val(&col[i])))
            .min_by_key(|&(_, v)| v)
            .filter(|&(_, v)| v < ring.m)
        else {
            return Err(Error::Precision(
                "lattice is not of full rank at the working precision".into(),
            ));
        };
        let mut piv = cols.swap_remove(pos);
        let ui = ring.inv(&ring.div_p_pow(&piv[i], v))?;
        piv = piv.iter().map(|x| ring.mul(x, &ui)).collect();
        for col in cols.iter_mut() {
            if ring.is_zero(&col[i]) {
                continue;
            }
            let c = ring.div_p_pow(&col[i], v);
            for t in 0..n {
                let d = ring.mul(&c, &piv[t]);
                col[t] = ring.sub(&col[t], &d);
            }
        }
        e[i] = v;
        placed[i] = Some(piv);
    }
    let mut h: Vec<Vec<El>> = placed.into_iter().map(|c| c.unwrap()).collect();
    for i in (0..n).rev() {
        for j in i + 1..n {
            let (_, c) = ring.split_mod(&h[j][i], e[i]);
            if ring.is_zero(&c) {
                continue;
            }
            for t in 0..n {
                let d = ring.mul(&c, &h[i][t]);
                h[j][t] = ring.sub(&h[j][t], &d);
            }
        }
    }
    // columns back to a row-major matrix
    let mat = (0..n)
        .map(|i| (0..n).map(|j| h[j][i].clone()).collect())
        .collect();
    Ok((mat, e))
}

/// A lattice `M` with `p^a Λ₀ ⊆ M ⊆ p^{−a} Λ₀`, stored as the Hermite form
/// of `p^a M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PLattice {
    pub n: usize,
    pub a: u32,
    pub e: Vec<u32>,
    pub basis: MatG,
}

impl PLattice {
    /// `ω_{GL_n}(g) = v(det g)` for `M = gΛ₀`.
    pub fn omega(&self) -> i64 {
        self.e.iter().map(|&x| i64::from(x)).sum::<i64>() - (self.n as i64) * i64::from(self.a)
    }
}

/// `p^s H^{-1}` for upper triangular `H` with diagonal `p^{e_i}`, or `None`
/// if it is not integral.
fn scaled_inverse(ring: &GaloisRing, h: &MatG, e: &[u32], s: u32) -> Option<MatG> {
    let n = h.len();
    let mut y = vec![vec![ring.zero(); n]; n];
    for c in 0..n {
        for i in (0..n).rev() {
            let mut num = if i == c { ring.p_pow(s) } else { ring.zero() };
            for j in i + 1..n {
                if !ring.is_zero(&h[i][j]) {
                    num = ring.sub(&num, &ring.mul(&h[i][j], &y[j][c]));
                }
            }
            if ring.val(&num) < e[i] {
                return None;
            }
            y[i][c] = ring.div_p_pow(&num, e[i]);
        }
    }
    Some(y)
}

/// Precision needed to decide relative positions up to `max_mu` exactly.
pub fn required_precision(n: usize, a: u32, max_mu: i64) -> u32 {
    2 * a * (n as u32 + 1) + max_mu.max(0) as u32 + 1
}

/// Every lattice in the window `p^a Λ₀ ⊆ M ⊆ p^{−a} Λ₀`.
pub fn window_lattices(ring: &GaloisRing, n: usize, a: u32) -> Result<Vec<PLattice>, Error> {
    if ring.m < 2 * a + 2 {
        return Err(Error::Precision(format!(
            "precision {} below the guard 2a + 2 = {}",
            ring.m,
            2 * a + 2
        )));
    }
    let mut out = Vec::new();
    let digits = 2 * a + 1;
    for mut idx in 0..(digits as usize).pow(n as u32) {
        let e: Vec<u32> = (0..n)
            .map(|_| {
                let d = (idx % digits as usize) as u32;
                idx /= digits as usize;
                d
            })
            .collect();
        let slots: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let reps: Vec<Vec<El>> = slots
            .iter()
            .map(|&(i, _)| ring.representatives(e[i]))
            .collect();
        let mut cur = vec![0usize; slots.len()];
        loop {
            let mut h = vec![vec![ring.zero(); n]; n];
            for i in 0..n {
                h[i][i] = ring.p_pow(e[i]);
            }
            for (s, &(i, j)) in slots.iter().enumerate() {
                h[i][j] = reps[s][cur[s]].clone();
            }
            if scaled_inverse(ring, &h, &e, 2 * a).is_some() {
                out.push(PLattice {
                    n,
                    a,
                    e: e.clone(),
                    basis: h,
                });
            }
            let mut pos = 0;
            while pos < cur.len() {
                cur[pos] += 1;
                if cur[pos] < reps[pos].len() {
                    break;
                }
                cur[pos] = 0;
                pos += 1;
            }
            if pos == cur.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Relative position `Inv(M, bσ(M))`, i.e. the elementary divisors of
/// `g^{-1} b σ(g)`; `None` entries exceed the decidable range.
pub fn relative_position(
    ring: &GaloisRing,
    lat: &PLattice,
    b: &MatG,
) -> Result<Vec<Option<i64>>, Error> {
    let s = 2 * lat.a;
    let y = scaled_inverse(ring, &lat.basis, &lat.e, s)
        .ok_or_else(|| Error::Invalid("lattice outside its window".into()))?;
    let x = ring.mat_mul(&ring.mat_mul(&y, b), &ring.mat_frob(&lat.basis));
    let loss: u32 = lat.e.iter().sum();
    let lim = ring.m.saturating_sub(loss);
    let sm = smith_limited(ring, &x, lim);
    let mut out: Vec<Option<i64>> = sm
        .exps
        .iter()
        .map(|e| e.map(|e| i64::from(e) - i64::from(s)))
        .collect();
    out.sort_by(|a, b| match (a, b) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, _) => std::cmp::Ordering::Less,
        (_, None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => y.cmp(x),
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AdlvVariant {
    /// `Inv = μ`.
    Exact,
    /// `Inv ≤ μ`.
    Closure,
}

fn position_matches(inv: &[Option<i64>], mu: &[i64], variant: AdlvVariant) -> bool {
    let Some(inv) = inv.iter().copied().collect::<Option<Vec<i64>>>() else {
        return false;
    };
    let mut mu = mu.to_vec();
    mu.sort_unstable_by(|a, b| b.cmp(a));
    match variant {
        AdlvVariant::Exact => inv == mu,
        AdlvVariant::Closure => {
            let mut si = 0;
            let mut sm = 0;
            for (x, y) in inv.iter().zip(&mu) {
                si += x;
                sm += y;
                if si > sm {
                    return false;
                }
            }
            si == sm
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdlvPoint {
    pub lattice: PLattice,
    pub omega: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdlvSet {
    pub points: Vec<AdlvPoint>,
    pub window_size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdlvSummary {
    pub count: usize,
    pub window_size: usize,
    pub omega_histogram: BTreeMap<i64, usize>,
    pub examples: Vec<PLattice>,
}

impl AdlvSet {
    pub fn omega_histogram(&self) -> BTreeMap<i64, usize> {
        let mut h = BTreeMap::new();
        for p in &self.points {
            *h.entry(p.omega).or_insert(0) += 1;
        }
        h
    }

    pub fn summary(&self, examples: usize) -> AdlvSummary {
        AdlvSummary {
            count: self.points.len(),
            window_size: self.window_size,
            omega_histogram: self.omega_histogram(),
            examples: self
                .points
                .iter()
                .take(examples)
                .map(|p| p.lattice.clone())
                .collect(),
        }
    }
}

/// Lattices `M` of the window with `Inv(M, bσ(M))` equal to (or below) `μ`.
pub fn enumerate_adlv(
    ring: &GaloisRing,
    b: &MatG,
    mu: &[i64],
    a: u32,
    variant: AdlvVariant,
) -> Result<AdlvSet, Error> {
    let n = mu.len();
    if n > 3 || a > 2 || ring.k > 3 || ring.p > 5 {
        return Err(Error::Resource(
            "oracle bounds are n ≤ 3, a ≤ 2, k ≤ 3, p ≤ 5".into(),
        ));
    }
    if b.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let max_mu = *mu.iter().max().unwrap_or(&0);
    let need = required_precision(n, a, max_mu);
    if ring.m < need {
        return Err(Error::Precision(format!(
            "precision {} below the required {need}",
            ring.m
        )));
    }
    let (detpos, _, _) = smith_form(ring, b, 0)?;
    let vb: u32 = detpos.exps.iter().sum();
    if vb > 2 * a * n as u32 {
        return Err(Error::Invalid(format!(
            "window a = {a} too small for b with v(det b) = {vb}"
        )));
    }
    let window = window_lattices(ring, n, a)?;
    let mut points = Vec::new();
    for lat in &window {
        let inv = relative_position(ring, lat, b)?;
        if position_matches(&inv, mu, variant) {
            points.push(AdlvPoint {
                omega: lat.omega(),
                lattice: lat.clone(),
            });
        }
    }
    points.sort_by(|x, y| (x.omega, &x.lattice).cmp(&(y.omega, &y.lattice)));
    Ok(AdlvSet {
        points,
        window_size: window.len(),
    })
}

/// Block-diagonal representative of the `GL_n` class with Newton point
/// `ν ≥ 0`: an isoclinic block of slope `d/h` is `e_i ↦ e_{i+1}`,
/// `e_h ↦ p^d e_1`.
pub fn gl_b_representative(ring: &GaloisRing, nu: &[Q]) -> Result<MatG, Error> {
    let n = nu.len();
    let mut b = vec![vec![0i64; n]; n];
    let mut s = 0;
    while s < n {
        let v = nu[s];
        let run = nu[s..].iter().take_while(|x| **x == v).count();
        let h = *v.denom() as usize;
        if run % h != 0 || *v.numer() < 0 {
            return Err(Error::Invalid(format!(
                "not a non-negative Newton point: {nu:?}"
            )));
        }
        let d = *v.numer() as u32;
        for blk in 0..run / h {
            let o = s + blk * h;
            for i in 0..h - 1 {
                b[o + i + 1][o + i] = 1;
            }
            b[o][o + h - 1] = ring.p.pow(d);
        }
        s += run;
    }
    Ok(ring.mat_from_int(&b))
}

/// Non-negative `GL_n` Newton points with slopes at most `max` and
/// denominators at most `n`, weakly decreasing.
pub fn gl_newton_candidates(n: usize, max: i64) -> Vec<Vec<Q>> {
    fn go(rest: usize, last: Option<Q>, max: i64, acc: &mut Vec<Q>, out: &mut Vec<Vec<Q>>) {
        if rest == 0 {
            out.push(acc.clone());
            return;
        }
        for len in 1..=rest {
            for h in 1..=len {
                if len % h != 0 {
                    continue;
                }
                for d in 0..=max * h as i64 {
                    let v = Q::new(d, h as i64);
                    if *v.denom() != h as i64 || last.is_some_and(|l| v >= l) {
                        continue;
                    }
                    let before = acc.len();
                    acc.extend(std::iter::repeat_n(v, len));
                    go(rest - len, Some(v), max, acc, out);
                    acc.truncate(before);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(n, None, max, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| b.cmp(a));
    out.dedup();
    out
}

/// Homothety class representative: `p^{−t} M` with `t` maximal such that
/// `M ⊆ p^t Λ₀`. Returns `(t, e', H')`.
fn normalize(ring: &GaloisRing, lat: &PLattice) -> (u32, Vec<u32>, MatG) {
    let t = lat
        .basis
        .iter()
        .flatten()
        .map(|x| ring.val(x))
        .min()
        .unwrap_or(0);
    let e = lat.e.iter().map(|x| x - t).collect();
    let h = lat
        .basis
        .iter()
        .map(|row| row.iter().map(|x| ring.div_p_pow(x, t)).collect())
        .collect();
    (t, e, h)
}

#[derive(Clone, Debug, Serialize)]
pub struct CartesianReport {
    pub gl_points: usize,
    pub pgl_points: usize,
    pub fibers_are_torsors: bool,
    pub commutes: bool,
    pub cartesian: bool,
    pub failures: Vec<String>,
}

impl CartesianReport {
    pub fn holds(&self) -> bool {
        self.fibers_are_torsors && self.commutes && self.cartesian
    }
}

/// Check the square `X^{GL}(b) → X^{PGL}(b_ad)`, `ω` to `Z → Z/n` on the
/// window. `negate_omega` corrupts `ω` as a negative control.
pub fn check_cartesian_gl_pgl(
    ring: &GaloisRing,
    b: &MatG,
    mu: &[i64],
    a: u32,
    negate_omega: bool,
) -> Result<CartesianReport, Error> {
    let n = mu.len();
    if !(2..=3).contains(&n) {
        return Err(Error::Resource(
            "cartesian check supports GL_2 and GL_3".into(),
        ));
    }
    let omega = |l: &PLattice| if negate_omega { -l.omega() } else { l.omega() };
    let gl = enumerate_adlv(ring, b, mu, a, AdlvVariant::Exact)?;
    let window = window_lattices(ring, n, a)?;
    let nn = n as i64;
    // PGL side: homothety classes whose relative position is μ up to centre
    let mut classes: BTreeMap<(Vec<u32>, MatG), Vec<(u32, PLattice)>> = BTreeMap::new();
    for lat in &window {
        let (t, e, h) = normalize(ring, lat);
        classes.entry((e, h)).or_default().push((t, lat.clone()));
    }
    let mu_sum: i64 = mu.iter().sum();
    let mut mu_sorted = mu.to_vec();
    mu_sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut pgl_points = 0;
    let mut failures = Vec::new();
    let gl_set: BTreeSet<&PLattice> = gl.points.iter().map(|p| &p.lattice).collect();
    let mut torsor = true;
    let mut commutes = true;
    let mut cartesian = true;
    for ((e, _), members) in &classes {
        let rep = &members[0].1;
        let inv = relative_position(ring, rep, b)?;
        let Some(inv) = inv.into_iter().collect::<Option<Vec<i64>>>() else {
            continue;
        };
        let shift = inv[0] - mu_sorted[0];
        let in_pgl = inv.iter().zip(&mu_sorted).all(|(x, y)| x - y == shift);
        // independent ω on the PGL side: class of v(det) of the normalized lattice
        let base: i64 = e.iter().map(|&x| i64::from(x)).sum::<i64>() - nn * i64::from(a);
        let omega_ad = base.rem_euclid(nn);
        if in_pgl {
            pgl_points += 1;
        }
        let lifts: Vec<&(u32, PLattice)> =
            members.iter().filter(|(_, l)| gl_set.contains(l)).collect();
        if !in_pgl && !lifts.is_empty() {
            commutes = false;
            failures.push(format!("GL point over a non-PGL class: {:?}", lifts[0].1.e));
        }
        let ts: BTreeSet<u32> = members.iter().map(|(t, _)| *t).collect();
        let lo = *ts.iter().next().unwrap();
        let hi = *ts.iter().last().unwrap();
        if ts.len() as u32 != hi - lo + 1 {
            torsor = false;
            failures.push(format!("homothety fiber has gaps: {e:?}"));
        }
        for (t, l) in members {
            let w = omega(l);
            if w.rem_euclid(nn) != omega_ad {
                commutes = false;
                failures.push(format!("ω mod n differs from ω_ad on {:?} / {:?}", l.e, e));
            }
            if w != base + nn * i64::from(*t) {
                torsor = false;
                failures.push(format!(
                    "ω(p^t M) ≠ ω(M) + n t for the pair {:?} / {:?}",
                    e, l.e
                ));
            }
        }
        // cartesian: over a PGL point with the right Kottwitz class, every
        // window lift is a GL point, and distinct lifts have distinct ω
        if in_pgl && shift * nn + mu_sum == inv.iter().sum::<i64>() {
            let ws: BTreeSet<i64> = members.iter().map(|(_, l)| omega(l)).collect();
            if ws.len() != members.len() {
                cartesian = false;
                failures.push(format!("ω does not separate the fiber over {e:?}"));
            }
            if shift == 0 && lifts.len() != members.len() {
                cartesian = false;
                failures.push(format!("fiber over {e:?} not entirely in X^GL"));
            }
        }
    }
    Ok(CartesianReport {
        gl_points: gl.points.len(),
        pgl_points,
        fibers_are_torsors: torsor,
        commutes,
        cartesian,
        failures,
    })
}

/// A quadratic space over `W[1/p]` with Gram matrix `p^{−scale} G`, `G`
/// integral, and Frobenius `1 ⊗ σ`.
#[derive(Clone, Debug)]
pub struct QuadModel {
    pub ring: GaloisRing,
    pub gram: Vec<Vec<i64>>,
    pub scale: u32,
}

impl QuadModel {
    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    /// `Z_p^{t+2}` with form `p^{−1} Q_Ω ⊥ H`, where `Q_Ω` is the non-split
    /// form of dimension `t` over `F_p` and `H` a hyperbolic plane; the
    /// standard lattice is then a vertex lattice of type `t`.
    pub fn vertex_model(ring: GaloisRing, t: usize) -> Result<Self, Error> {
        let p = ring.p;
        if p == 2 || t == 0 || t % 2 == 1 {
            return Err(Error::Unsupported(
                "vertex models need odd p and even t".into(),
            ));
        }
        let nonsq = (2..p)
            .find(|&c| (1..p).all(|x| (x * x - c).rem_euclid(p) != 0))
            .unwrap();
        let n = t + 2;
        let mut g = vec![vec![0i64; n]; n];
        for i in 0..(t / 2 - 1) {
            g[2 * i][2 * i + 1] = 1;
            g[2 * i + 1][2 * i] = 1;
        }
        // anisotropic plane x² − ε y²
        g[t - 2][t - 2] = 1;
        g[t - 1][t - 1] = -nonsq;
        g[t][t + 1] = p;
        g[t + 1][t] = p;
        Ok(QuadModel {
            ring,
            gram: g,
            scale: 1,
        })
    }

    fn pairing_matrix(&self, basis: &MatG) -> MatG {
        let r = &self.ring;
        let g = r.mat_from_int(&self.gram);
        let bt: MatG = (0..basis[0].len())
            .map(|j| basis.iter().map(|row| row[j].clone()).collect())
            .collect();
        r.mat_mul(&r.mat_mul(&bt, &g), basis)
    }

    /// `length(Λ / Λ^∨)`, meaningful when `Λ^∨ ⊆ Λ`.
    pub fn dual_index(&self, basis: &MatG) -> Result<i64, Error> {
        let gm = self.pairing_matrix(basis);
        let (pos, _, _) = smith_form(&self.ring, &gm, 0)?;
        let n = basis.len() as i64;
        Ok(n * i64::from(self.scale) - pos.exps.iter().map(|&x| i64::from(x)).sum::<i64>())
    }

    /// `Λ ⊆ Λ^∨`.
    pub fn is_integral(&self, basis: &MatG) -> bool {
        let gm = self.pairing_matrix(basis);
        gm.iter().flatten().all(|x| self.ring.val(x) >= self.scale)
    }
}

#[derive(Clone, Debug)]
pub struct SpecialLattice {
    pub model: QuadModel,
    pub basis: MatG,
    pub e: Vec<u32>,
}

fn lattice_sum(ring: &GaloisRing, a: &MatG, b: &MatG) -> Result<(MatG, Vec<u32>), Error> {
    let gens: MatG = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.iter().chain(y).cloned().collect())
        .collect();
    hermite_form(ring, &gens)
}

impl SpecialLattice {
    pub fn new(model: QuadModel, gens: &MatG) -> Result<Self, Error> {
        let (basis, e) = hermite_form(&model.ring, gens)?;
        let l = SpecialLattice { model, basis, e };
        if !l.is_self_dual()? {
            return Err(Error::Invalid("lattice is not self-dual".into()));
        }
        if l.step_length(&l.basis, &l.e)? != 1 {
            return Err(Error::Invalid("(L + Φ L)/L is not a line".into()));
        }
        Ok(l)
    }

    pub fn is_self_dual(&self) -> Result<bool, Error> {
        Ok(self.model.is_integral(&self.basis) && self.model.dual_index(&self.basis)? == 0)
    }

    fn step_length(&self, basis: &MatG, e: &[u32]) -> Result<i64, Error> {
        let r = &self.model.ring;
        let (_, e2) = lattice_sum(r, basis, &r.mat_frob(basis))?;
        Ok(e.iter().map(|&x| i64::from(x)).sum::<i64>()
            - e2.iter().map(|&x| i64::from(x)).sum::<i64>())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub d: usize,
    pub t: usize,
    /// `length(L^{(i)} / L)` for `i = 0..=d`.
    pub lengths: Vec<i64>,
    /// Hermite form of `Λ(L)`, with `Z_p` entries.
    pub lambda: Vec<Vec<i64>>,
}

/// Stabilize `L ⊊ L^{(1)} ⊊ ⋯ ⊊ L^{(d)} = L^{(d+1)}` and return `d` and the
/// type of the vertex lattice `Λ(L) = (L^{(d)})^Φ`.
pub fn special_lattice_chain(l: &SpecialLattice, t_max: usize) -> Result<ChainReport, Error> {
    let r = &l.model.ring;
    let len0: i64 = l.e.iter().map(|&x| i64::from(x)).sum();
    let mut cur = (l.basis.clone(), l.e.clone());
    let mut lengths = vec![0];
    let mut d = 0;
    loop {
        let next = lattice_sum(r, &cur.0, &r.mat_frob(&cur.0))?;
        if next == cur {
            break;
        }
        let grown = len0 - next.1.iter().map(|&x| i64::from(x)).sum::<i64>();
        if grown != *lengths.last().unwrap() + 1 {
            return Err(Error::Consistency(format!(
                "chain step {} grew by {}",
                d + 1,
                grown - lengths.last().unwrap()
            )));
        }
        lengths.push(grown);
        d += 1;
        cur = next;
        if d > t_max / 2 {
            return Err(Error::Consistency(format!(
                "chain did not stabilize within t_max/2 = {} steps",
                t_max / 2
            )));
        }
    }
    let fixed = r.mat_frob(&cur.0) == cur.0;
    let lambda: Option<Vec<Vec<i64>>> = cur
        .0
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| x[1..].iter().all(|&c| c == 0).then_some(x[0]))
                .collect()
        })
        .collect();
    let Some(lambda) = lambda.filter(|_| fixed) else {
        return Err(Error::Consistency("L^(d) is not Φ-stable".into()));
    };
    let t = usize::try_from(l.model.dual_index(&cur.0)?)
        .map_err(|_| Error::Consistency("Λ(L) is not a vertex lattice".into()))?;
    if t != 2 * d {
        return Err(Error::Consistency(format!("t(Λ) = {t} but d = {d}")));
    }
    Ok(ChainReport {
        d,
        t,
        lengths,
        lambda,
    })
}

/// A special lattice inside the vertex model of type `t = 2d`: `Λ^∨` plus
/// the lift of `span(v, σv, …, σ^{d−1}v)` for an isotropic `v` over the
/// residue field whose `σ`-translates are orthogonal up to distance `d − 1`
/// and span `Ω`. Candidates are scanned in a fixed scrambled order.
pub fn find_special_lattice(model: &QuadModel, budget: usize) -> Result<SpecialLattice, Error> {
    let r = &model.ring;
    let n = model.dim();
    let t = n - 2;
    let d = t / 2;
    let field = GaloisRing::new(r.p, r.k, 1)?;
    if field.f != r.f {
        return Err(Error::Consistency(
            "residue field polynomial mismatch".into(),
        ));
    }
    let qf: Vec<Vec<El>> = model.gram[..t]
        .iter()
        .map(|row| row[..t].iter().map(|&c| field.from_int(c)).collect())
        .collect();
    let form = |x: &[El], y: &[El]| -> El {
        let mut acc = field.zero();
        for i in 0..t {
            for j in 0..t {
                if !field.is_zero(&qf[i][j]) {
                    acc = field.add(&acc, &field.mul(&field.mul(&x[i], &qf[i][j]), &y[j]));
                }
            }
        }
        acc
    };
    let q = field.q() as u128;
    let total = q.pow(t as u32);
    // a multiplier coprime to the count visits every vector once
    let stride = (total / 3 * 2 + 1..).find(|s| s.gcd(&total) == 1).unwrap();
    for i in 0..budget.min(total as usize) as u128 {
        let mut idx = (i * stride + 1) % total;
        let v: Vec<El> = (0..t)
            .map(|_| {
                let mut c = (idx % q) as i64;
                idx /= q;
                (0..field.k)
                    .map(|_| {
                        let x = c % field.p;
                        c /= field.p;
                        x
                    })
                    .collect()
            })
            .collect();
        let orbit: Vec<Vec<El>> = (0..t)
            .map(|s| v.iter().map(|x| field.frob_pow(x, s)).collect())
            .collect();
        if (0..d).any(|s| !field.is_zero(&form(&v, &orbit[s]))) {
            continue;
        }
        if rank(&field, &orbit) != t {
            continue;
        }
        // generators: pe_i (i < t), e_t, e_{t+1}, lifts of v, σv, …, σ^{d−1}v
        let mut gens: MatG = vec![Vec::new(); n];
        for c in 0..n {
            for (row, g) in gens.iter_mut().enumerate() {
                let val = if row == c {
                    if c < t {
                        r.p
                    } else {
                        1
                    }
                } else {
                    0
                };
                g.push(r.from_int(val));
            }
        }
        for o in orbit.iter().take(d) {
            for (row, g) in gens.iter_mut().enumerate() {
                g.push(if row < t { o[row].clone() } else { r.zero() });
            }
        }
        return SpecialLattice::new(model.clone(), &gens);
    }
    Err(Error::Resource(format!(
        "no special lattice found among {budget} candidates"
    )))
}

/// Finite groups whose flag varieties the point counter enumerates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FiniteGroup {
    /// `PGL_2`: flags are points of `P^1`.
    Pgl2 { q: i64 },
    /// Split `SO_5`, form `x1 x5 + x2 x4 + x3²`: flags are isotropic
    /// line ⊂ isotropic plane.
    So5 { q: i64 },
}

impl FiniteGroup {
    pub fn q(&self) -> i64 {
        match self {
            FiniteGroup::Pgl2 { q } | FiniteGroup::So5 { q } => *q,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FiniteGroup::Pgl2 { .. } => 2,
            FiniteGroup::So5 { .. } => 5,
        }
    }

    /// Simple reflections as permutations of an adapted basis.
    pub fn simple_reflections(&self) -> Vec<Vec<usize>> {
        match self {
            FiniteGroup::Pgl2 { .. } => vec![vec![1, 0]],
            FiniteGroup::So5 { .. } => vec![vec![1, 0, 2, 4, 3], vec![0, 3, 2, 1, 4]],
        }
    }

    /// `|G/B(F_Q)|` as a polynomial count.
    pub fn flag_count(&self, d: u32) -> i64 {
        let qq = self.q().pow(d);
        match self {
            FiniteGroup::Pgl2 { .. } => qq + 1,
            FiniteGroup::So5 { .. } => (1 + qq) * (1 + qq + qq * qq + qq * qq * qq),
        }
    }

    pub fn word_to_permutation(&self, word: &[usize]) -> Vec<usize> {
        let s = self.simple_reflections();
        let mut out: Vec<usize> = (0..self.dim()).collect();
        for &i in word {
            out = (0..self.dim()).map(|x| out[s[i][x]]).collect();
        }
        out
    }
}

/// Linear algebra over a finite field given as a precision-one Galois ring.
fn rank(field: &GaloisRing, vecs: &[Vec<El>]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<El>> = vecs.to_vec();
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| !field.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(r, piv);
        let inv = field.inv(&m[r][c]).unwrap();
        m[r] = m[r].iter().map(|x| field.mul(x, &inv)).collect();
        for i in 0..m.len() {
            if i != r && !field.is_zero(&m[i][c]) {
                let f = m[i][c].clone();
                let row_r = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&row_r) {
                    *x = field.sub(x, &field.mul(&f, y));
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// `F_{p^k}` with elements numbered `Σ c_i p^i` and full operation tables.
struct Fq {
    p: usize,
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    frob: Vec<u8>,
}

impl Fq {
    fn new(field: &GaloisRing) -> Self {
        let elems = field.representatives(1);
        let q = elems.len();
        let index = |x: &El| -> u8 { x.iter().rev().fold(0i64, |acc, &c| acc * field.p + c) as u8 };
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for (i, x) in elems.iter().enumerate() {
            for (j, y) in elems.iter().enumerate() {
                add[i * q + j] = index(&field.add(x, y));
                mul[i * q + j] = index(&field.mul(x, y));
            }
        }
        let neg = elems.iter().map(|x| index(&field.neg(x))).collect();
        let inv = elems
            .iter()
            .map(|x| field.inv(x).map_or(0, |y| index(&y)))
            .collect();
        let frob = elems.iter().map(|x| index(&field.frob(x))).collect();
        Fq {
            p: field.p as usize,
            q,
            add,
            mul,
            neg,
            inv,
            frob,
        }
    }

    fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }

    fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    fn dot(&self, x: &[u8], y: &[u8]) -> u8 {
        x.iter()
            .zip(y)
            .fold(0, |acc, (&a, &b)| self.add(acc, self.mul(a, b)))
    }

    /// Reduced row echelon form; its length is the rank.
    fn rref(&self, vecs: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let mut m: Vec<Vec<u8>> = vecs.to_vec();
        let cols = m.first().map_or(0, |r| r.len());
        let mut r = 0;
        for c in 0..cols {
            let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else {
                continue;
            };
            m.swap(r, piv);
            let inv = self.inv[m[r][c] as usize];
            for x in m[r].iter_mut() {
                *x = self.mul(*x, inv);
            }
            for i in 0..m.len() {
                if i != r && m[i][c] != 0 {
                    let f = self.neg[m[i][c] as usize];
                    for j in 0..cols {
                        let d = self.mul(f, m[r][j]);
                        m[i][j] = self.add(m[i][j], d);
                    }
                }
            }
            r += 1;
            if r == m.len() {
                break;
            }
        }
        m.truncate(r);
        m
    }

    fn rank(&self, vecs: &[Vec<u8>]) -> usize {
        self.rref(vecs).len()
    }

    /// Basis of `{x : B(x, v) = 0 for v ∈ vecs}`.
    fn orthogonal_complement(&self, polar: &[Vec<u8>], vecs: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let n = polar.len();
        let rows: Vec<Vec<u8>> = vecs
            .iter()
            .map(|v| (0..n).map(|i| self.dot(&polar[i], v)).collect())
            .collect();
        let red = self.rref(&rows);
        let pivots: Vec<usize> = red
            .iter()
            .map(|row| row.iter().position(|&x| x != 0).unwrap())
            .collect();
        (0..n)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut x = vec![0u8; n];
                x[free] = 1;
                for (row, &pc) in red.iter().zip(&pivots) {
                    x[pc] = self.neg[row[free] as usize];
                }
                x
            })
            .collect()
    }

    fn frob_vecs(&self, vecs: &[Vec<u8>]) -> Vec<Vec<u8>> {
        vecs.iter()
            .map(|v| v.iter().map(|&x| self.frob[x as usize]).collect())
            .collect()
    }
}

/// Partial flag `F_1 ⊂ ⋯ ⊂ F_{n−1}` given by spanning sets.
type Flag = Vec<Vec<Vec<u8>>>;

fn flags(group: FiniteGroup, fq: &Fq) -> Result<Vec<Flag>, Error> {
    let n = group.dim();
    let total = fq.q.pow(n as u32);
    if total > 2_000_000 {
        return Err(Error::Resource(format!("{total} vectors to scan")));
    }
    // nonzero vectors with leading coordinate 1
    let normalized = |idx: usize| -> Option<Vec<u8>> {
        let mut t = idx;
        let v: Vec<u8> = (0..n)
            .map(|_| {
                let x = (t % fq.q) as u8;
                t /= fq.q;
                x
            })
            .collect();
        let lead = v.iter().position(|&x| x != 0)?;
        (v[lead] == 1).then_some(v)
    };
    match group {
        FiniteGroup::Pgl2 { .. } => Ok((1..total)
            .filter_map(normalized)
            .map(|v| vec![vec![v]])
            .collect()),
        FiniteGroup::So5 { .. } => {
            let qform = |x: &[u8]| {
                let a = fq.mul(x[0], x[4]);
                let b = fq.mul(x[1], x[3]);
                let c = fq.mul(x[2], x[2]);
                fq.add(fq.add(a, b), c)
            };
            let lines: Vec<Vec<u8>> = (1..total)
                .filter_map(normalized)
                .filter(|v| qform(v) == 0)
                .collect();
            let polar = so5_polar(fq.p);
            let mut out = Vec::new();
            for v in &lines {
                let bv: Vec<u8> = (0..n).map(|i| fq.dot(&polar[i], v)).collect();
                let lperp = fq.orthogonal_complement(&polar, std::slice::from_ref(v));
                let mut seen = BTreeSet::new();
                for w in &lines {
                    if w == v || fq.dot(&bv, w) != 0 {
                        continue;
                    }
                    let plane = vec![v.clone(), w.clone()];
                    if seen.insert(fq.rref(&plane)) {
                        let pperp = fq.orthogonal_complement(&polar, &plane);
                        out.push(vec![vec![v.clone()], plane, pperp, lperp.clone()]);
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Polar form of `x1 x5 + x2 x4 + x3²`; degenerate in characteristic 2.
fn so5_polar(p: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![0u8; 5]; 5];
    g[0][4] = 1;
    g[4][0] = 1;
    g[1][3] = 1;
    g[3][1] = 1;
    g[2][2] = (2 % p) as u8;
    g
}

/// Relative position of two flags of `V`: `w(j) = i` where `F_i ∩ G_j`
/// jumps.
fn relpos(fq: &Fq, f: &Flag, g: &Flag, n: usize) -> Vec<usize> {
    let dims: Vec<usize> = (0..=n).collect();
    let part = |fl: &Flag, i: usize| -> Vec<Vec<u8>> {
        if i == 0 || i == n {
            Vec::new()
        } else {
            fl[i - 1].clone()
        }
    };
    let cap = |i: usize, j: usize| -> i64 {
        if i == 0 || j == 0 {
            return 0;
        }
        if i == n || j == n {
            return dims[i.min(j)] as i64;
        }
        let mut both = part(f, i);
        both.extend(part(g, j));
        (i + j) as i64 - fq.rank(&both) as i64
    };
    let r: Vec<Vec<i64>> = (0..=n)
        .map(|i| (0..=n).map(|j| cap(i, j)).collect())
        .collect();
    let mut w = vec![0usize; n];
    for i in 1..=n {
        for j in 1..=n {
            if r[i][j] - r[i - 1][j] - r[i][j - 1] + r[i - 1][j - 1] == 1 {
                w[j - 1] = i - 1;
            }
        }
    }
    w
}

/// Number of flags `F` over `F_{q^d}` with `inv(F, Frob_q F) = w`.
pub fn count_dl_variety(group: FiniteGroup, word: &[usize], d: u32) -> Result<i64, Error> {
    let all = dl_counts(group, d)?;
    let w = group.word_to_permutation(word);
    Ok(*all.get(&w).unwrap_or(&0))
}

fn field_for(group: FiniteGroup, d: u32) -> Result<Fq, Error> {
    let q = group.q();
    if !is_prime(q) {
        return Err(Error::Unsupported("q must be prime".into()));
    }
    if d == 0 || q.pow(d) > 81 {
        return Err(Error::Resource(format!("q^d = {q}^{d} outside 1..=81")));
    }
    Ok(Fq::new(&GaloisRing::new(q, d as usize, 1)?))
}

/// Counts for every relative position at once.
pub fn dl_counts(group: FiniteGroup, d: u32) -> Result<BTreeMap<Vec<usize>, i64>, Error> {
    let fq = field_for(group, d)?;
    let n = group.dim();
    let mut counts = BTreeMap::new();
    // the generator of Gal(F_{q^d}/F_q) is the ring Frobenius
    for f in &flags(group, &fq)? {
        let sf: Flag = f.iter().map(|sp| fq.frob_vecs(sp)).collect();
        *counts.entry(relpos(&fq, f, &sf, n)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Total number of flags enumerated over `F_{q^d}`.
pub fn enumerated_flags(group: FiniteGroup, d: u32) -> Result<i64, Error> {
    Ok(flags(group, &field_for(group, d)?)?.len() as i64)
}

/// Flags over `F_{q^d}` equal to their Frobenius image, compared as
/// subspaces.
pub fn rational_flags(group: FiniteGroup, d: u32) -> Result<i64, Error> {
    let fq = field_for(group, d)?;
    Ok(flags(group, &fq)?
        .iter()
        .filter(|f| f.iter().all(|sp| fq.rref(sp) == fq.rref(&fq.frob_vecs(sp))))
        .count() as i64)
}

/// Apply `g ∈ GL_n(W)` (integral) to a window lattice, if the image stays
/// in the window.
pub fn act_on_lattice(
    ring: &GaloisRing,
    g: &MatG,
    lat: &PLattice,
) -> Result<Option<PLattice>, Error> {
    let img = ring.mat_mul(g, &lat.basis);
    let (h, e) = hermite_form(ring, &img)?;
    let out = PLattice {
        n: lat.n,
        a: lat.a,
        e,
        basis: h,
    };
    Ok(scaled_inverse(ring, &out.basis, &out.e, 2 * out.a)
        .is_some()
        .then_some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, qi};

    #[test]
    fn ring_basics() {
        for (p, k, m) in [(2, 1, 4), (3, 2, 3), (2, 3, 2), (5, 2, 2)] {
            let r = GaloisRing::new(p, k, m).unwrap();
            assert!(r.frobenius_has_order_k());
            let x = r.representatives(m)[7 % r.representatives(m).len()].clone();
            let y = r.representatives(m)[5].clone();
            assert_eq!(r.frob(&r.mul(&x, &y)), r.mul(&r.frob(&x), &r.frob(&y)));
            // σ(a) ≡ a^p mod p
            let fx = r.frob(&x);
            let xp = r.pow(&x, p as u64);
            assert!(fx.iter().zip(&xp).all(|(a, b)| (a - b) % p == 0));
        }
    }

    #[test]
    fn fixed_ring_is_zp() {
        let r = GaloisRing::new(3, 2, 2).unwrap();
        let fixed = r.fixed_subring(10_000).unwrap();
        assert_eq!(fixed.len(), 9);
        assert!(fixed.iter().all(|a| a[1] == 0));
    }

    #[test]
    fn smith_examples() {
        let r = GaloisRing::new(3, 1, 6).unwrap();
        let id = r.identity(2);
        assert_eq!(smith_form(&r, &id, 0).unwrap().0.exps, vec![0, 0]);
        let m = r.mat_from_int(&[vec![3, 0], vec![0, 1]]);
        assert_eq!(smith_form(&r, &m, 0).unwrap().0.exps, vec![1, 0]);
        let m = r.mat_from_int(&[vec![9, 3, 1], vec![0, 3, 2], vec![0, 0, 1]]);
        let (pos, u, v) = smith_form(&r, &m, 0).unwrap();
        let d = r.mat_mul(&r.mat_mul(&u, &m), &v);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i != j {
                    assert!(r.is_zero(x));
                }
            }
        }
        assert_eq!(pos.exps.iter().sum::<u32>(), 3);
    }

    #[test]
    fn window_sizes() {
        // lattices between p^2 Λ and Λ in rank 2 over Z_3, by index
        let r = GaloisRing::new(3, 1, 8).unwrap();
        assert_eq!(window_lattices(&r, 2, 1).unwrap().len(), 1 + 4 + 13 + 4 + 1);
    }

    #[test]
    fn gl2_basic_is_discrete() {
        let r = GaloisRing::new(3, 1, required_precision(2, 1, 1)).unwrap();
        let b = gl_b_representative(&r, &[q(1, 2), q(1, 2)]).unwrap();
        let set = enumerate_adlv(&r, &b, &[1, 0], 1, AdlvVariant::Exact).unwrap();
        let h = set.omega_histogram();
        assert!(!h.is_empty());
        assert!(h.values().all(|&c| c == 1));
        // b permutes the points, shifting ω by one
        for p in &set.points {
            if let Some(img) = act_on_lattice(&r, &b, &p.lattice).unwrap() {
                let hit = set.points.iter().find(|x| x.lattice == img).unwrap();
                assert_eq!(hit.omega, p.omega + 1);
            }
        }
    }

    #[test]
    fn cartesian_and_control() {
        let r = GaloisRing::new(3, 1, required_precision(2, 1, 1)).unwrap();
        let b = gl_b_representative(&r, &[q(1, 2), q(1, 2)]).unwrap();
        assert!(check_cartesian_gl_pgl(&r, &b, &[1, 0], 1, false)
            .unwrap()
            .holds());
        assert!(!check_cartesian_gl_pgl(&r, &b, &[1, 0], 1, true)
            .unwrap()
            .holds());
    }

    #[test]
    fn newton_candidates() {
        let c = gl_newton_candidates(2, 1);
        assert!(c.contains(&vec![q(1, 2), q(1, 2)]));
        assert!(c.contains(&vec![qi(1), qi(0)]));
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn special_lattices() {
        for (t, k) in [(2usize, 2usize), (4, 4)] {
            let r = GaloisRing::new(3, k, 2 * (t as u32 + 2) + 2).unwrap();
            let model = QuadModel::vertex_model(r, t).unwrap();
            let l = find_special_lattice(&model, 200_000).unwrap();
            let c = special_lattice_chain(&l, 20).unwrap();
            assert_eq!(c.t, t);
            assert_eq!(c.lengths, (0..=c.d as i64).collect::<Vec<_>>());
        }
    }

    #[test]
    fn dl_pgl2() {
        let g = FiniteGroup::Pgl2 { q: 3 };
        assert_eq!(count_dl_variety(g, &[0], 2).unwrap(), 6);
        assert_eq!(count_dl_variety(g, &[], 2).unwrap(), 4);
    }
}
