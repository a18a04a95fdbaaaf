//! Pinned based root data of the classical unramified groups, their Weyl
//! groups, the dominance order and the fundamental group with its Frobenius
//! action.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::linalg::{
    common_den, dot, dot_q, identity, in_lattice_q, inverse_unimodular, kernel_z, lattice_coords,
    mat_mul, mat_vec, mat_vec_q, q, qi, smith, solve_q, to_q, transpose, MatZ, Q,
};
use crate::Error;

/// Form of an orthogonal (or spinor) group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orth {
    /// `SO_{2m+1}`, type `B_m`.
    Odd,
    /// Split `SO_{2m}`, type `D_m`.
    EvenSplit,
    /// Quasi-split non-split `SO_{2m}`; Frobenius swaps the last two nodes.
    EvenNonsplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    GL,
    SL,
    PGL,
    Sp,
    GSp,
    SO(Orth),
    GSpin(Orth),
}

impl Family {
    /// Human label, with the size parameter substituted.
    pub fn label(&self, size: usize) -> String {
        match self {
            Family::GL => format!("GL_{size}"),
            Family::SL => format!("SL_{size}"),
            Family::PGL => format!("PGL_{size}"),
            Family::Sp => format!("Sp_{}", 2 * size),
            Family::GSp => format!("GSp_{}", 2 * size),
            Family::SO(Orth::Odd) => format!("SO_{}", 2 * size + 1),
            Family::SO(Orth::EvenSplit) => format!("SO_{}-split", 2 * size),
            Family::SO(Orth::EvenNonsplit) => format!("SO_{}-nonsplit", 2 * size),
            Family::GSpin(Orth::Odd) => format!("GSpin_{}", 2 * size + 1),
            Family::GSpin(Orth::EvenSplit) => format!("GSpin_{}-split", 2 * size),
            Family::GSpin(Orth::EvenNonsplit) => format!("GSpin_{}-nonsplit", 2 * size),
        }
    }
}

/// Simple Dynkin type of a connected component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Dynkin {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    Other(usize),
}

impl fmt::Display for Dynkin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dynkin::A(r) => write!(f, "A{r}"),
            Dynkin::B(r) => write!(f, "B{r}"),
            Dynkin::C(r) => write!(f, "C{r}"),
            Dynkin::D(r) => write!(f, "D{r}"),
            Dynkin::Other(r) => write!(f, "?{r}"),
        }
    }
}

/// A root with its coroot and its coefficients in the simple roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootPair {
    pub root: Vec<i64>,
    pub coroot: Vec<i64>,
    pub coeffs: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    pub family: Family,
    pub size: usize,
    /// Rank of `T`, i.e. the length of cocharacter tuples.
    pub dim: usize,
    pub roots: Vec<Vec<i64>>,
    pub coroots: Vec<Vec<i64>>,
    /// Frobenius on `X_*`, acting on column vectors.
    pub phi: MatZ,
    pub rho: Vec<Q>,
    positive: Vec<RootPair>,
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

fn diff(n: usize, i: usize, j: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] += 1;
    v[j] -= 1;
    v
}

fn type_a_cartan(r: usize) -> MatZ {
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| match i.abs_diff(j) {
                    0 => 2,
                    1 => -1,
                    _ => 0,
                })
                .collect()
        })
        .collect()
}

/// Build the canonical realization of a classical group.
///
/// `size` is `n` for the type-A families and the rank `m` otherwise.
pub fn build_root_datum(family: Family, size: usize) -> Result<RootDatum, Error> {
    let unsupported = || Error::Unsupported(format!("{} is not supported", family.label(size)));
    let (dim, roots, coroots, phi) = match family {
        Family::GL => {
            if size < 1 {
                return Err(unsupported());
            }
            let n = size;
            let r: Vec<_> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            (n, r.clone(), r, identity(n))
        }
        Family::SL | Family::PGL => {
            if size < 2 {
                return Err(unsupported());
            }
            let r = size - 1;
            let a = type_a_cartan(r);
            let units: Vec<_> = (0..r).map(|i| unit(r, i)).collect();
            if family == Family::SL {
                (r, a.clone(), units, identity(r))
            } else {
                (r, units, transpose(&a), identity(r))
            }
        }
        Family::Sp | Family::GSp | Family::SO(_) | Family::GSpin(_) => {
            let m = size;
            let even = matches!(
                family,
                Family::SO(Orth::EvenSplit | Orth::EvenNonsplit)
                    | Family::GSpin(Orth::EvenSplit | Orth::EvenNonsplit)
            );
            if m < 1 || (even && m < 2) {
                return Err(unsupported());
            }
            let extra = matches!(family, Family::GSp | Family::GSpin(_));
            let n = if extra { m + 1 } else { m };
            let mut roots: Vec<_> = (0..m - 1).map(|i| diff(n, i, i + 1)).collect();
            let mut coroots = roots.clone();
            let mut phi = identity(n);
            match family {
                Family::Sp => {
                    roots.push(unit(n, m - 1).iter().map(|x| 2 * x).collect());
                    coroots.push(unit(n, m - 1));
                }
                Family::GSp => {
                    let mut a = vec![0; n];
                    a[m - 1] = 2;
                    a[m] = -1;
                    roots.push(a);
                    coroots.push(unit(n, m - 1));
                }
                Family::SO(Orth::Odd) => {
                    roots.push(unit(n, m - 1));
                    coroots.push(unit(n, m - 1).iter().map(|x| 2 * x).collect());
                }
                Family::GSpin(Orth::Odd) => {
                    roots.push(unit(n, m - 1));
                    let mut c = vec![0; n];
                    c[m - 1] = 2;
                    c[m] = -1;
                    coroots.push(c);
                }
                Family::SO(o) => {
                    let mut a = vec![0; n];
                    a[m - 2] = 1;
                    a[m - 1] = 1;
                    roots.push(a.clone());
                    coroots.push(a);
                    if o == Orth::EvenNonsplit {
                        phi[m - 1][m - 1] = -1;
                    }
                }
                Family::GSpin(o) => {
                    let mut a = vec![0; n];
                    a[m - 2] = 1;
                    a[m - 1] = 1;
                    roots.push(a);
                    let mut c = vec![0; n];
                    c[m - 2] = 1;
                    c[m - 1] = 1;
                    c[m] = -1;
                    coroots.push(c);
                    if o == Orth::EvenNonsplit {
                        // e_m -> e_0 - e_m, everything else fixed
                        phi[m - 1][m - 1] = -1;
                        phi[m][m - 1] = 1;
                    }
                }
                _ => unreachable!(),
            }
            (n, roots, coroots, phi)
        }
    };
    let mut rd = RootDatum {
        family,
        size,
        dim,
        roots,
        coroots,
        phi,
        rho: Vec::new(),
        positive: Vec::new(),
    };
    rd.positive = rd.generate_positive();
    let mut two_rho = vec![0i64; dim];
    for p in &rd.positive {
        for (a, b) in two_rho.iter_mut().zip(&p.root) {
            *a += b;
        }
    }
    rd.rho = two_rho.iter().map(|&x| q(x, 2)).collect();
    Ok(rd)
}

impl RootDatum {
    pub fn label(&self) -> String {
        self.family.label(self.size)
    }

    /// Number of simple roots.
    pub fn ss_rank(&self) -> usize {
        self.roots.len()
    }

    pub fn cartan(&self) -> MatZ {
        self.roots
            .iter()
            .map(|a| self.coroots.iter().map(|c| dot(a, c)).collect())
            .collect()
    }

    pub fn positive_roots(&self) -> &[RootPair] {
        &self.positive
    }

    fn generate_positive(&self) -> Vec<RootPair> {
        let r = self.ss_rank();
        let mut seen: HashMap<Vec<i64>, RootPair> = HashMap::new();
        let mut queue = VecDeque::new();
        for i in 0..r {
            let p = RootPair {
                root: self.roots[i].clone(),
                coroot: self.coroots[i].clone(),
                coeffs: unit(r, i),
            };
            seen.insert(p.coroot.clone(), p.clone());
            queue.push_back(p);
        }
        while let Some(p) = queue.pop_front() {
            for i in 0..r {
                let k = dot(&p.root, &self.coroots[i]);
                if k == 0 {
                    continue;
                }
                let mut coeffs = p.coeffs.clone();
                coeffs[i] -= k;
                if coeffs.iter().any(|&c| c < 0) {
                    continue;
                }
                let kc = dot(&self.roots[i], &p.coroot);
                let root: Vec<i64> = p
                    .root
                    .iter()
                    .zip(&self.roots[i])
                    .map(|(a, b)| a - k * b)
                    .collect();
                let coroot: Vec<i64> = p
                    .coroot
                    .iter()
                    .zip(&self.coroots[i])
                    .map(|(a, b)| a - kc * b)
                    .collect();
                if !seen.contains_key(&coroot) {
                    let np = RootPair {
                        root,
                        coroot,
                        coeffs,
                    };
                    seen.insert(np.coroot.clone(), np.clone());
                    queue.push_back(np);
                }
            }
        }
        let mut out: Vec<RootPair> = seen.into_values().collect();
        out.sort_by(|a, b| {
            let ha: i64 = a.coeffs.iter().sum();
            let hb: i64 = b.coeffs.iter().sum();
            (ha, &a.coeffs).cmp(&(hb, &b.coeffs))
        });
        out
    }

    /// Is the coroot `c` (given in `X_*`) positive, measured against `2ρ`.
    pub fn coroot_is_positive(&self, c: &[i64]) -> bool {
        let two_rho: Vec<i64> = self.rho.iter().map(|x| (*x * qi(2)).to_integer()).collect();
        dot(&two_rho, c) > 0
    }

    pub fn pair(&self, i: usize, x: &[Q]) -> Q {
        dot_q(&self.roots[i], x)
    }

    pub fn is_dominant_q(&self, x: &[Q]) -> bool {
        (0..self.ss_rank()).all(|i| !self.pair(i, x).is_negative())
    }

    pub fn coweight(&self, values: Vec<Q>) -> Coweight {
        assert_eq!(values.len(), self.dim, "coweight has the wrong length");
        let dominant = self.is_dominant_q(&values);
        Coweight::from_values(values, dominant)
    }

    pub fn coweight_int(&self, values: &[i64]) -> Coweight {
        self.coweight(to_q(values))
    }

    /// Matrix of the simple reflection `s_i` on `X_*`.
    pub fn reflection(&self, i: usize) -> MatZ {
        let n = self.dim;
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| i64::from(r == c) - self.coroots[i][r] * self.roots[i][c])
                    .collect()
            })
            .collect()
    }

    pub fn weyl_element(&self, word: &[usize]) -> WeylElement {
        let mut m = identity(self.dim);
        for &i in word {
            m = mat_mul(&m, &self.reflection(i));
        }
        WeylElement {
            word: word.to_vec(),
            matrix: m,
        }
    }

    /// Number of positive coroots sent to negative ones.
    pub fn inversions(&self, matrix: &MatZ) -> usize {
        self.positive
            .iter()
            .filter(|p| !self.coroot_is_positive(&mat_vec(matrix, &p.coroot)))
            .count()
    }

    /// Breadth-first enumeration of the whole Weyl group.
    pub fn weyl_group(&self) -> Vec<WeylElement> {
        let refl: Vec<MatZ> = (0..self.ss_rank()).map(|i| self.reflection(i)).collect();
        let id = WeylElement {
            word: Vec::new(),
            matrix: identity(self.dim),
        };
        let mut seen: HashMap<MatZ, usize> = HashMap::new();
        seen.insert(id.matrix.clone(), 0);
        let mut out = vec![id];
        let mut head = 0;
        while head < out.len() {
            let cur = out[head].clone();
            head += 1;
            for (i, s) in refl.iter().enumerate() {
                let m = mat_mul(&cur.matrix, s);
                if !seen.contains_key(&m) {
                    seen.insert(m.clone(), out.len());
                    let mut word = cur.word.clone();
                    word.push(i);
                    out.push(WeylElement { word, matrix: m });
                }
            }
        }
        out
    }

    /// Order of the Frobenius on `X_*`.
    pub fn phi_order(&self) -> usize {
        let mut m = self.phi.clone();
        let id = identity(self.dim);
        for k in 1..=12 {
            if m == id {
                return k;
            }
            m = mat_mul(&m, &self.phi);
        }
        panic!("Frobenius has order > 12");
    }

    pub fn apply_phi(&self, x: &[Q]) -> Vec<Q> {
        mat_vec_q(&self.phi, x)
    }

    /// Average over the Frobenius orbit.
    pub fn galois_average(&self, x: &[Q]) -> Vec<Q> {
        let k = self.phi_order();
        let mut acc = vec![Q::zero(); self.dim];
        let mut cur = x.to_vec();
        for _ in 0..k {
            for (a, c) in acc.iter_mut().zip(&cur) {
                *a += c;
            }
            cur = self.apply_phi(&cur);
        }
        acc.iter().map(|a| a / qi(k as i64)).collect()
    }

    /// Coefficients of `x` in the simple coroots, if `x` lies in their span.
    pub fn coroot_coeffs(&self, x: &[Q]) -> Option<Vec<Q>> {
        let b: Vec<Vec<Q>> = (0..self.dim)
            .map(|i| self.coroots.iter().map(|c| qi(c[i])).collect())
            .collect();
        solve_q(&b, x)
    }

    /// Permutation of the simple nodes induced by the Frobenius.
    pub fn phi_on_nodes(&self) -> Vec<usize> {
        (0..self.ss_rank())
            .map(|i| {
                let img = mat_vec(&self.phi, &self.coroots[i]);
                self.coroots
                    .iter()
                    .position(|c| *c == img)
                    .expect("Frobenius does not permute the simple coroots")
            })
            .collect()
    }

    pub fn fundamental_group(&self) -> FinAbGroupWithAction {
        FinAbGroupWithAction {
            ambient: self.dim,
            relations: self.coroots.clone(),
            action: self.phi.clone(),
        }
    }

    /// Image of a cocharacter in `π₁(G)_Γ`.
    pub fn kappa(&self, x: &[i64]) -> Vec<i64> {
        self.fundamental_group().coinvariants().class(x)
    }

    /// Connected components of the Dynkin diagram, as node lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let a = self.cartan();
        let r = self.ss_rank();
        let mut comp = vec![usize::MAX; r];
        let mut out = Vec::new();
        for s in 0..r {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut nodes = vec![s];
            comp[s] = id;
            let mut k = 0;
            while k < nodes.len() {
                let i = nodes[k];
                k += 1;
                for j in 0..r {
                    if a[i][j] != 0 && comp[j] == usize::MAX {
                        comp[j] = id;
                        nodes.push(j);
                    }
                }
            }
            nodes.sort_unstable();
            out.push(nodes);
        }
        out
    }
}

/// Dynkin type of a connected Cartan matrix.
pub fn classify_component(a: &MatZ, nodes: &[usize]) -> Dynkin {
    let r = nodes.len();
    if r == 1 {
        return Dynkin::A(1);
    }
    let mut deg = vec![0usize; r];
    let mut multiple: Vec<(usize, usize)> = Vec::new();
    let mut edges = 0;
    for (x, &i) in nodes.iter().enumerate() {
        for (y, &j) in nodes.iter().enumerate() {
            if x < y && a[i][j] != 0 {
                edges += 1;
                deg[x] += 1;
                deg[y] += 1;
                if a[i][j] * a[j][i] == 2 {
                    multiple.push((x, y));
                } else if a[i][j] * a[j][i] != 1 {
                    return Dynkin::Other(r);
                }
            }
        }
    }
    if edges != r - 1 {
        return Dynkin::Other(r);
    }
    let branch: Vec<usize> = (0..r).filter(|&x| deg[x] >= 3).collect();
    match (multiple.len(), branch.len()) {
        (0, 0) => Dynkin::A(r),
        (1, 0) => {
            let (x, y) = multiple[0];
            if deg[x] != 1 && deg[y] != 1 {
                return Dynkin::Other(r);
            }
            let (end, inner) = if deg[x] == 1 { (x, y) } else { (y, x) };
            if r == 2 {
                return Dynkin::B(2);
            }
            // the end node is short in type B, long in type C
            if a[nodes[inner]][nodes[end]] == -2 {
                Dynkin::B(r)
            } else {
                Dynkin::C(r)
            }
        }
        (0, 1) => {
            let b = branch[0];
            if deg[b] != 3 {
                return Dynkin::Other(r);
            }
            let leaves = (0..r)
                .filter(|&x| deg[x] == 1 && a[nodes[x]][nodes[b]] != 0)
                .count();
            if leaves >= 2 {
                Dynkin::D(r)
            } else {
                Dynkin::Other(r)
            }
        }
        _ => Dynkin::Other(r),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SerreType {
    pub types: Vec<String>,
    pub eligible: bool,
}

pub fn classify_serre_type(rd: &RootDatum) -> SerreType {
    let a = rd.cartan();
    let mut types: Vec<Dynkin> = rd
        .components()
        .iter()
        .map(|c| classify_component(&a, c))
        .collect();
    types.sort();
    let eligible = types.iter().all(|t| !matches!(t, Dynkin::Other(_)));
    SerreType {
        types: types.iter().map(|t| t.to_string()).collect(),
        eligible,
    }
}

impl Serialize for RootDatum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RootDatum", 6)?;
        st.serialize_field("family", &self.label())?;
        st.serialize_field("rank", &self.dim)?;
        st.serialize_field("simple_roots", &self.roots)?;
        st.serialize_field("simple_coroots", &self.coroots)?;
        st.serialize_field("phi", &self.phi)?;
        let rho: Vec<String> = self.rho.iter().map(crate::fmt_q).collect();
        st.serialize_field("rho", &rho)?;
        st.end()
    }
}

/// A rational cocharacter `num / den` with its dominance flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coweight {
    pub num: Vec<i64>,
    pub den: i64,
    pub dominant: bool,
}

impl Coweight {
    pub fn from_values(values: Vec<Q>, dominant: bool) -> Self {
        let den = common_den(&values);
        let num = values.iter().map(|v| (*v * qi(den)).to_integer()).collect();
        Coweight { num, den, dominant }
    }

    pub fn values(&self) -> Vec<Q> {
        self.num.iter().map(|&n| q(n, self.den)).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn integral(&self) -> Option<Vec<i64>> {
        self.is_integral().then(|| self.num.clone())
    }
}

impl fmt::Display for Coweight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values().iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Coweight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.values().iter().map(crate::fmt_q).collect();
        v.serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElement {
    pub word: Vec<usize>,
    pub matrix: MatZ,
}

impl WeylElement {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn act(&self, x: &[Q]) -> Vec<Q> {
        mat_vec_q(&self.matrix, x)
    }
}

/// `μ' ≤ μ`: the difference is a non-negative combination of positive
/// coroots, integral when both inputs are integral.
pub fn dominance_leq(mu_p: &Coweight, mu: &Coweight, rd: &RootDatum) -> Result<bool, Error> {
    if mu_p.num.len() != rd.dim || mu.num.len() != rd.dim {
        return Err(Error::Dimension {
            expected: rd.dim,
            got: mu_p.num.len().max(mu.num.len()),
        });
    }
    let d: Vec<Q> = mu
        .values()
        .iter()
        .zip(mu_p.values())
        .map(|(a, b)| a - b)
        .collect();
    Ok(leq_diff(rd, &d, mu_p.is_integral() && mu.is_integral()))
}

pub(crate) fn leq_diff(rd: &RootDatum, d: &[Q], integral: bool) -> bool {
    let Some(c) = rd.coroot_coeffs(d) else {
        return false;
    };
    c.iter().all(|x| !x.is_negative()) && (!integral || c.iter().all(|x| x.is_integer()))
}

/// Dominant element of the Weyl orbit of `nu`, and a Weyl element taking
/// `nu` to it.
pub fn dominant_representative(nu: &Coweight, rd: &RootDatum) -> (Coweight, WeylElement) {
    let mut x = nu.values();
    let mut steps = Vec::new();
    while let Some(i) = (0..rd.ss_rank()).find(|&i| rd.pair(i, &x).is_negative()) {
        let k = rd.pair(i, &x);
        for (a, c) in x.iter_mut().zip(&rd.coroots[i]) {
            *a -= k * qi(*c);
        }
        steps.push(i);
    }
    steps.reverse();
    let w = rd.weyl_element(&steps);
    (rd.coweight(x), w)
}

/// Structure of a finitely generated abelian group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbelianGroup {
    /// Orders of the cyclic torsion factors, each at least 2.
    pub torsion: Vec<i64>,
    pub free_rank: usize,
}

impl AbelianGroup {
    pub fn is_z(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 1
    }

    pub fn is_cyclic_of_order(&self, n: i64) -> bool {
        self.free_rank == 0 && self.torsion == vec![n]
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `Z^N` modulo the span of `relations`, with a canonical class map.
#[derive(Clone, Debug)]
pub struct Quotient {
    u: MatZ,
    divisors: Vec<i64>,
}

impl Quotient {
    pub fn new(ambient: usize, relations: &[Vec<i64>]) -> Self {
        let a: MatZ = (0..ambient)
            .map(|i| relations.iter().map(|g| g[i]).collect())
            .collect();
        let s = smith(&a, relations.len());
        let divisors = (0..ambient)
            .map(|i| s.diag.get(i).copied().unwrap_or(0))
            .collect();
        Quotient { u: s.u, divisors }
    }

    /// Canonical coordinates of the class of `x`: one entry per non-trivial
    /// cyclic factor, torsion entries reduced into `[0, d)`.
    pub fn class(&self, x: &[i64]) -> Vec<i64> {
        let y = mat_vec(&self.u, x);
        y.iter()
            .zip(&self.divisors)
            .filter(|(_, &d)| d != 1)
            .map(|(&v, &d)| if d == 0 { v } else { v.rem_euclid(d) })
            .collect()
    }

    pub fn structure(&self) -> AbelianGroup {
        AbelianGroup {
            torsion: self.divisors.iter().copied().filter(|&d| d > 1).collect(),
            free_rank: self.divisors.iter().filter(|&&d| d == 0).count(),
        }
    }

    pub fn factors(&self) -> Vec<i64> {
        self.divisors.iter().copied().filter(|&d| d != 1).collect()
    }

    /// A cocharacter whose class has the given canonical coordinates.
    pub fn lift(&self, coords: &[i64]) -> Vec<i64> {
        let mut y = vec![0i64; self.divisors.len()];
        let slots = (0..self.divisors.len()).filter(|&i| self.divisors[i] != 1);
        for (slot, &c) in slots.zip(coords) {
            y[slot] = c;
        }
        mat_vec(&inverse_unimodular(&self.u), &y)
    }
}

/// A finitely generated abelian group `Z^N / R` with an automorphism.
#[derive(Clone, Debug)]
pub struct FinAbGroupWithAction {
    pub ambient: usize,
    pub relations: Vec<Vec<i64>>,
    pub action: MatZ,
}

/// A subgroup of `Z^N / R`, given by lifts of generators.
#[derive(Clone, Debug)]
pub struct Subgroup {
    pub generators: Vec<Vec<i64>>,
    pub structure: AbelianGroup,
}

impl FinAbGroupWithAction {
    pub fn quotient(&self) -> Quotient {
        Quotient::new(self.ambient, &self.relations)
    }

    pub fn structure(&self) -> AbelianGroup {
        self.quotient().structure()
    }

    /// The action is well defined and of finite order.
    pub fn action_is_valid(&self) -> bool {
        let img_ok = self
            .relations
            .iter()
            .all(|r| lattice_coords(&self.relations, &mat_vec(&self.action, r)).is_some());
        let id = identity(self.ambient);
        let mut m = self.action.clone();
        let finite = (0..12).any(|_| {
            let done = m == id;
            m = mat_mul(&m, &self.action);
            done
        });
        img_ok && finite
    }

    /// `π^Γ`: classes `x` with `φ(x) − x ∈ R`.
    pub fn invariants(&self) -> Subgroup {
        let n = self.ambient;
        let r = self.relations.len();
        // columns: φ − 1, then −R
        let m: MatZ = (0..n)
            .map(|i| {
                let mut row: Vec<i64> = (0..n)
                    .map(|j| self.action[i][j] - i64::from(i == j))
                    .collect();
                row.extend(self.relations.iter().map(|g| -g[i]));
                row
            })
            .collect();
        let ker = kernel_z(&m, n + r);
        let generators: Vec<Vec<i64>> = ker.iter().map(|v| v[..n].to_vec()).collect();
        let structure = subgroup_structure(n, &generators, &self.relations);
        Subgroup {
            generators,
            structure,
        }
    }

    /// `π_Γ = Z^N / (R + (1 − φ)Z^N)`.
    pub fn coinvariants(&self) -> Quotient {
        let n = self.ambient;
        let mut rel = self.relations.clone();
        for j in 0..n {
            let col: Vec<i64> = (0..n)
                .map(|i| i64::from(i == j) - self.action[i][j])
                .collect();
            if col.iter().any(|&x| x != 0) {
                rel.push(col);
            }
        }
        Quotient::new(n, &rel)
    }
}

/// Structure of the image of `gens` in `Z^N / R`.
pub fn subgroup_structure(n: usize, gens: &[Vec<i64>], rel: &[Vec<i64>]) -> AbelianGroup {
    let k = gens.len();
    if k == 0 {
        return AbelianGroup {
            torsion: Vec::new(),
            free_rank: 0,
        };
    }
    let m: MatZ = (0..n)
        .map(|i| {
            let mut row: Vec<i64> = gens.iter().map(|g| g[i]).collect();
            row.extend(rel.iter().map(|g| -g[i]));
            row
        })
        .collect();
    let ker = kernel_z(&m, k + rel.len());
    let kgens: Vec<Vec<i64>> = ker.iter().map(|v| v[..k].to_vec()).collect();
    Quotient::new(k, &kgens).structure()
}

/// Whether `a` and `b` generate the same subgroup of `Z^N / R`.
pub fn same_subgroup(a: &[Vec<i64>], b: &[Vec<i64>], rel: &[Vec<i64>]) -> bool {
    let inside = |xs: &[Vec<i64>], ys: &[Vec<i64>]| {
        let mut span = ys.to_vec();
        span.extend(rel.iter().cloned());
        xs.iter().all(|x| lattice_coords(&span, x).is_some())
    };
    inside(a, b) && inside(b, a)
}

/// Quotient map of cocharacter lattices for the supported central
/// isogenies: `GSpin → SO` drops the last coordinate and
/// `GL_n → PGL_n` records the pairings with the simple roots.
pub fn central_quotient_map(from: &RootDatum, to: &RootDatum) -> Result<MatZ, Error> {
    match (from.family, to.family) {
        (Family::GSpin(a), Family::SO(b)) if a == b && from.size == to.size => Ok((0..to.dim)
            .map(|i| (0..from.dim).map(|j| i64::from(i == j)).collect())
            .collect()),
        (Family::GL, Family::PGL) if from.size == to.size => Ok(from.roots.clone()),
        _ => Err(Error::Unsupported(format!(
            "no central quotient map {} -> {}",
            from.label(),
            to.label()
        ))),
    }
}

/// Surjectivity of `π₁(from)^Γ → π₁(to)^Γ` along a cocharacter map.
pub fn invariants_surjective(from: &RootDatum, to: &RootDatum, map: &MatZ) -> bool {
    let src = from.fundamental_group().invariants();
    let tgt = to.fundamental_group();
    let inv = tgt.invariants();
    let img: Vec<Vec<i64>> = src.generators.iter().map(|g| mat_vec(map, g)).collect();
    same_subgroup(&img, &inv.generators, &tgt.relations)
}

/// The set `J ⊂ {0..r}` of simple roots orthogonal to `x`.
pub fn orthogonal_nodes(rd: &RootDatum, x: &[Q]) -> BTreeSet<usize> {
    (0..rd.ss_rank())
        .filter(|&i| rd.pair(i, x).is_zero())
        .collect()
}

/// Projection of `X_*⊗Q` onto the centre of the standard Levi `M_J`, along
/// the span of the coroots in `J`.
pub fn levi_center_projection(rd: &RootDatum, j: &[usize], x: &[Q]) -> Vec<Q> {
    if j.is_empty() {
        return x.to_vec();
    }
    let cart: Vec<Vec<Q>> = j
        .iter()
        .map(|&a| {
            j.iter()
                .map(|&b| qi(dot(&rd.roots[a], &rd.coroots[b])))
                .collect()
        })
        .collect();
    let rhs: Vec<Q> = j.iter().map(|&a| rd.pair(a, x)).collect();
    let c = solve_q(&cart, &rhs).expect("Levi Cartan matrix is singular");
    let mut out = x.to_vec();
    for (k, &b) in j.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(&rd.coroots[b]) {
            *o -= c[k] * qi(*v);
        }
    }
    out
}

/// Is `x` in the rational span `L` described by generators (used by the
/// Newton-point lattice test).
pub fn in_span_lattice(gens: &[Vec<Q>], x: &[Q]) -> bool {
    in_lattice_q(gens, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_families() -> Vec<(Family, usize)> {
        let mut v = Vec::new();
        for n in 1..=5 {
            v.push((Family::GL, n));
        }
        for n in 2..=5 {
            v.push((Family::SL, n));
            v.push((Family::PGL, n));
        }
        for m in 1..=4 {
            v.push((Family::Sp, m));
            v.push((Family::GSp, m));
            v.push((Family::SO(Orth::Odd), m));
            v.push((Family::GSpin(Orth::Odd), m));
        }
        for m in 2..=5 {
            for o in [Orth::EvenSplit, Orth::EvenNonsplit] {
                v.push((Family::SO(o), m));
                v.push((Family::GSpin(o), m));
            }
        }
        v
    }

    #[test]
    fn datum_invariants() {
        for (f, s) in all_families() {
            let rd = build_root_datum(f, s).unwrap();
            let a = rd.cartan();
            for i in 0..rd.ss_rank() {
                assert_eq!(a[i][i], 2);
                assert_eq!(rd.pair(i, &to_q(&rd.coroots[i])), qi(2));
                assert_eq!(dot_q(&rd.coroots[i], &rd.rho), qi(1), "{}", rd.label());
            }
            let nodes = rd.phi_on_nodes();
            let mut sorted = nodes.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..rd.ss_rank()).collect::<Vec<_>>());
            assert!(rd.phi_order() <= 2);
            assert!(rd.fundamental_group().action_is_valid());
        }
    }

    #[test]
    fn spec_examples() {
        let gl2 = build_root_datum(Family::GL, 2).unwrap();
        assert_eq!(gl2.coroots, vec![vec![1, -1]]);
        let b10 = build_root_datum(Family::SO(Orth::Odd), 10).unwrap();
        assert_eq!(classify_serre_type(&b10).types, vec!["B10"]);
        let d2 = build_root_datum(Family::SO(Orth::EvenNonsplit), 2).unwrap();
        assert_eq!(d2.phi_on_nodes(), vec![1, 0]);
        assert_eq!(d2.phi_order(), 2);
    }

    #[test]
    fn serre_types() {
        let t = |f, s| classify_serre_type(&build_root_datum(f, s).unwrap()).types;
        assert_eq!(t(Family::GL, 5), vec!["A4"]);
        assert_eq!(t(Family::Sp, 3), vec!["C3"]);
        assert_eq!(t(Family::GSp, 2), vec!["B2"]);
        assert_eq!(t(Family::SO(Orth::EvenSplit), 4), vec!["D4"]);
        assert_eq!(t(Family::SO(Orth::EvenSplit), 3), vec!["A3"]);
        assert_eq!(t(Family::SO(Orth::EvenSplit), 2), vec!["A1", "A1"]);
        assert_eq!(t(Family::GSpin(Orth::Odd), 5), vec!["B5"]);
        let e = classify_serre_type(&build_root_datum(Family::GL, 1).unwrap());
        assert!(e.types.is_empty() && e.eligible);
    }

    #[test]
    fn weyl_orders() {
        let order = |f, s| build_root_datum(f, s).unwrap().weyl_group().len();
        assert_eq!(order(Family::GL, 4), 24);
        assert_eq!(order(Family::SO(Orth::Odd), 3), 48);
        assert_eq!(order(Family::Sp, 3), 48);
        assert_eq!(order(Family::SO(Orth::EvenSplit), 4), 192);
    }

    #[test]
    fn dominance_examples() {
        let rd = build_root_datum(Family::GL, 2).unwrap();
        let mu = rd.coweight_int(&[1, 0]);
        assert!(dominance_leq(&mu, &mu, &rd).unwrap());
        let half = rd.coweight(vec![q(1, 2), q(1, 2)]);
        assert!(dominance_leq(&half, &mu, &rd).unwrap());
        let bad = rd.coweight_int(&[2, -1]);
        assert!(!dominance_leq(&bad, &mu, &rd).unwrap());
        let short = Coweight::from_values(vec![qi(1)], true);
        assert!(dominance_leq(&short, &mu, &rd).is_err());
    }

    #[test]
    fn dominant_rep_examples() {
        let rd = build_root_datum(Family::GL, 2).unwrap();
        let (d, w) = dominant_representative(&rd.coweight_int(&[0, 1]), &rd);
        assert_eq!(d.num, vec![1, 0]);
        assert_eq!(w.word, vec![0]);
        let (d, w) = dominant_representative(&rd.coweight_int(&[3, 1]), &rd);
        assert_eq!(d.num, vec![3, 1]);
        assert!(w.is_empty());
    }

    #[test]
    fn b2_dominant_rep_against_orbit_scan() {
        let rd = build_root_datum(Family::SO(Orth::Odd), 2).unwrap();
        let nu = rd.coweight_int(&[-1, 0]);
        let (d, w) = dominant_representative(&nu, &rd);
        assert_eq!(d.num, vec![1, 0]);
        assert_eq!(w.act(&nu.values()), d.values());
        // brute force over all 8 elements: shortest element reaching (1,0)
        let group = rd.weyl_group();
        assert_eq!(group.len(), 8);
        let best = group
            .iter()
            .filter(|g| g.act(&nu.values()) == d.values())
            .map(|g| g.len())
            .min()
            .unwrap();
        assert_eq!(w.len(), best);
        assert_eq!(w.len(), 3);
        assert_eq!(rd.inversions(&w.matrix), w.len());
    }

    #[test]
    fn pi1_examples() {
        let gl = build_root_datum(Family::GL, 3).unwrap();
        let g = gl.fundamental_group();
        assert!(g.structure().is_z());
        assert!(g.invariants().structure.is_z());
        assert!(g.coinvariants().structure().is_z());

        let so = build_root_datum(Family::SO(Orth::Odd), 4).unwrap();
        let g = so.fundamental_group();
        assert!(g.structure().is_cyclic_of_order(2));
        assert!(g.invariants().structure.is_cyclic_of_order(2));

        let gspin = build_root_datum(Family::GSpin(Orth::Odd), 4).unwrap();
        assert!(gspin.fundamental_group().invariants().structure.is_z());
        let map = central_quotient_map(&gspin, &so).unwrap();
        assert!(invariants_surjective(&gspin, &so, &map));

        let sp = build_root_datum(Family::Sp, 3).unwrap();
        assert!(sp.fundamental_group().structure().is_trivial());
        let pgl = build_root_datum(Family::PGL, 4).unwrap();
        assert!(pgl.fundamental_group().structure().is_cyclic_of_order(4));
    }

    #[test]
    fn nonsplit_even_pi1() {
        // π₁ = Z/2 for SO_{2m}; Frobenius acts trivially on it
        let rd = build_root_datum(Family::SO(Orth::EvenNonsplit), 3).unwrap();
        let g = rd.fundamental_group();
        assert!(g.structure().is_cyclic_of_order(2));
        assert!(g.coinvariants().structure().is_cyclic_of_order(2));
        let gs = build_root_datum(Family::GSpin(Orth::EvenNonsplit), 3).unwrap();
        assert!(gs.fundamental_group().invariants().structure.is_z());
    }

    #[test]
    fn levi_projection_gl() {
        let rd = build_root_datum(Family::GL, 3).unwrap();
        let p = levi_center_projection(&rd, &[0], &to_q(&[1, 0, 0]));
        assert_eq!(p, vec![q(1, 2), q(1, 2), qi(0)]);
    }
}
