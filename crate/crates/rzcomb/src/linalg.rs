//! Small exact linear algebra over Z and Q.
//!
//! Matrices are row-major `Vec<Vec<_>>`. Everything here is sized for root
//! data of rank at most a few dozen, so the algorithms are the textbook ones.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Q = Ratio<i64>;
pub type MatZ = Vec<Vec<i64>>;
pub type MatQ = Vec<Vec<Q>>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn identity(n: usize) -> MatZ {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> MatZ {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

pub fn mat_vec_q(a: &[Vec<i64>], x: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(Q::zero(), |acc, (r, v)| acc + *v * *r)
        })
        .collect()
}

pub fn dot_q(a: &[i64], x: &[Q]) -> Q {
    a.iter().zip(x).fold(Q::zero(), |acc, (r, v)| acc + *v * *r)
}

pub fn dot(a: &[i64], x: &[i64]) -> i64 {
    a.iter().zip(x).map(|(r, v)| r * v).sum()
}

pub fn to_q(x: &[i64]) -> Vec<Q> {
    x.iter().map(|&v| qi(v)).collect()
}

/// Common denominator of a rational vector.
pub fn common_den(x: &[Q]) -> i64 {
    x.iter().fold(1i64, |acc, v| acc.lcm(v.denom()))
}

/// Result of an integer Smith normal form: `u * a * v = d` with `u`, `v`
/// unimodular and `d` diagonal with `d[0] | d[1] | ...`, all non-negative.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: MatZ,
    pub v: MatZ,
    pub diag: Vec<i64>,
    pub rows: usize,
    pub cols: usize,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|&&d| d != 0).count()
    }
}

fn swap_rows(m: &mut MatZ, i: usize, j: usize) {
    m.swap(i, j);
}

fn swap_cols(m: &mut MatZ, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

/// row_i += c * row_j
fn add_row(m: &mut MatZ, i: usize, j: usize, c: i64) {
    if c == 0 {
        return;
    }
    let src = m[j].clone();
    for (a, b) in m[i].iter_mut().zip(src) {
        *a += c * b;
    }
}

/// col_i += c * col_j
fn add_col(m: &mut MatZ, i: usize, j: usize, c: i64) {
    if c == 0 {
        return;
    }
    for row in m.iter_mut() {
        row[i] += c * row[j];
    }
}

pub fn smith(a: &[Vec<i64>], cols: usize) -> Smith {
    let rows = a.len();
    let mut m: MatZ = a.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let lim = rows.min(cols);
    for t in 0..lim {
        loop {
            // smallest non-zero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            swap_rows(&mut m, t, bi);
            swap_rows(&mut u, t, bi);
            swap_cols(&mut m, t, bj);
            swap_cols(&mut v, t, bj);
            let p = m[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let c = Integer::div_floor(&m[i][t], &p);
                add_row(&mut m, i, t, -c);
                add_row(&mut u, i, t, -c);
                dirty |= m[i][t] != 0;
            }
            for j in t + 1..cols {
                let c = Integer::div_floor(&m[t][j], &p);
                add_col(&mut m, j, t, -c);
                add_col(&mut v, j, t, -c);
                dirty |= m[t][j] != 0;
            }
            if dirty {
                continue;
            }
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| m[i][j] % p != 0);
            match bad {
                Some((i, _)) => {
                    add_row(&mut m, t, i, 1);
                    add_row(&mut u, t, i, 1);
                }
                None => break,
            }
        }
        if m[t][t] < 0 {
            for x in m[t].iter_mut() {
                *x = -*x;
            }
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
    }
    let diag = (0..lim).map(|i| m[i][i]).collect();
    Smith {
        u,
        v,
        diag,
        rows,
        cols,
    }
}

/// Basis (as columns, returned as a list of vectors) of the integer kernel
/// of `a`, an `rows x cols` matrix.
pub fn kernel_z(a: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    let s = smith(a, cols);
    let r = s.rank();
    (r..cols)
        .map(|j| s.v.iter().map(|row| row[j]).collect())
        .collect()
}

/// Integer coefficients `c` with `sum c_j g_j = x`, if any. `gens` is a list
/// of generators (each of length `x.len()`).
pub fn lattice_coords(gens: &[Vec<i64>], x: &[i64]) -> Option<Vec<i64>> {
    let n = x.len();
    if gens.is_empty() {
        return x.iter().all(|&v| v == 0).then(Vec::new);
    }
    let a: MatZ = (0..n)
        .map(|i| gens.iter().map(|g| g[i]).collect())
        .collect();
    let s = smith(&a, gens.len());
    let y = mat_vec(&s.u, x);
    let mut z = vec![0i64; gens.len()];
    for (i, &yi) in y.iter().enumerate() {
        let d = s.diag.get(i).copied().unwrap_or(0);
        if d == 0 {
            if yi != 0 {
                return None;
            }
        } else {
            if yi % d != 0 {
                return None;
            }
            z[i] = yi / d;
        }
    }
    Some(mat_vec(&s.v, &z))
}

/// Membership of a rational vector in the Z-span of rational generators.
pub fn in_lattice_q(gens: &[Vec<Q>], x: &[Q]) -> bool {
    let den = gens
        .iter()
        .map(|g| common_den(g))
        .fold(common_den(x), |a, b| a.lcm(&b));
    let scale = |v: &[Q]| -> Vec<i64> { v.iter().map(|e| (*e * qi(den)).to_integer()).collect() };
    let g: Vec<Vec<i64>> = gens.iter().map(|g| scale(g)).collect();
    lattice_coords(&g, &scale(x)).is_some()
}

/// Solve `a * c = b` over Q. Returns `None` when inconsistent; when the
/// solution is not unique, free variables are set to zero.
pub fn solve_q(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: MatQ = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                let src = m[r].clone();
                for (x, s) in m[i].iter_mut().zip(src) {
                    *x -= f * s;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut sol = vec![Q::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = m[i][cols];
    }
    Some(sol)
}

pub fn inverse_q(a: &[Vec<Q>]) -> Option<MatQ> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Q> = (0..n)
            .map(|i| if i == j { Q::one() } else { Q::zero() })
            .collect();
        let c = solve_q(a, &e)?;
        let back: Vec<Q> = a
            .iter()
            .map(|row| row.iter().zip(&c).fold(Q::zero(), |s, (x, y)| s + x * y))
            .collect();
        if back != e {
            return None;
        }
        cols.push(c);
    }
    Some(transpose(&cols))
}

/// Inverse of a unimodular integer matrix.
pub fn inverse_unimodular(a: &[Vec<i64>]) -> MatZ {
    let aq: MatQ = a.iter().map(|r| to_q(r)).collect();
    let inv = inverse_q(&aq).expect("matrix is not invertible");
    inv.iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    assert!(x.is_integer(), "matrix is not unimodular");
                    x.to_integer()
                })
                .collect()
        })
        .collect()
}

pub fn det_q(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            let src = m[c].clone();
            for (x, s) in m[i].iter_mut().zip(src) {
                *x -= f * s;
            }
        }
    }
    det
}

pub fn is_nonneg(x: &[Q]) -> bool {
    x.iter().all(|v| !v.is_negative())
}
