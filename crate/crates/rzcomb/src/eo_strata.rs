//! Ekedahl–Oort index sets `^J W`, the explicit orthogonal words, the basic
//! subsets `^J W^b`, vertex-lattice types and the K3 dictionary.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::fmt_q;
use crate::kottwitz::{
    enumerate_bgmu, fully_hn_decomposable, orth_form, orthogonal_datum, SigmaConjClass,
};
use crate::linalg::{identity, inverse_unimodular, mat_mul, mat_vec, qi, to_q, MatZ, Q};
use crate::root_datum::{Coweight, Family, Orth, RootDatum};
use crate::Error;

/// An index of `^J W`: a length, primed for the second element of length
/// `m − 1` in the even orthogonal case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub index: usize,
    pub primes: usize,
}

impl Label {
    pub fn plain(index: usize) -> Self {
        Label { index, primes: 0 }
    }

    pub fn primed(index: usize) -> Self {
        Label { index, primes: 1 }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.index, "'".repeat(self.primes))
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let digits = s.trim_end_matches('\'');
        let primes = s.len() - digits.len();
        let index = digits
            .parse()
            .map_err(|_| Error::Invalid(format!("bad label {s:?}")))?;
        Ok(Label { index, primes })
    }
}

#[derive(Clone, Debug)]
pub struct EOContext {
    pub rd: RootDatum,
    pub mu: Vec<i64>,
    /// Type of the parabolic attached to `μ`.
    pub j: Vec<usize>,
    /// Set for the orthogonal datum with `dim V = n + 2`.
    pub orthogonal: Option<QuadSpaceData>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuadSpaceData {
    pub n: usize,
    /// `det V = (−1)^{n/2}`; ignored for odd `n`.
    pub det_plus: bool,
    /// Hasse invariant of the Frobenius-fixed space.
    pub hasse: i8,
}

impl QuadSpaceData {
    pub fn new(n: usize, det_plus: bool) -> Result<Self, Error> {
        if n < 1 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        Ok(QuadSpaceData {
            n,
            det_plus: det_plus || n % 2 == 1,
            hasse: -1,
        })
    }

    /// `m` with `2m = n + 1` (odd) or `2m = n + 2` (even).
    pub fn m(&self) -> usize {
        orth_form(self.n, self.det_plus).1
    }

    pub fn is_odd(&self) -> bool {
        self.n % 2 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VertexLatticeClass {
    pub t: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CosetRep {
    pub label: Label,
    pub word: Vec<usize>,
    pub length: usize,
    #[serde(skip)]
    pub matrix: MatZ,
    /// Index into `B(G, μ)` of the class whose stratum contains this one.
    pub newton: Option<usize>,
    pub vertex_type: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JwPoset {
    pub elements: Vec<CosetRep>,
    /// Cover relations `(lower, upper)` of the induced Bruhat order.
    pub covers: Vec<(Label, Label)>,
}

impl JwPoset {
    pub fn get(&self, l: Label) -> Option<&CosetRep> {
        self.elements.iter().find(|e| e.label == l)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.elements.iter().map(|e| e.label).collect()
    }

    pub fn leq(&self, ctx: &EOContext, a: Label, b: Label) -> bool {
        match (self.get(a), self.get(b)) {
            (Some(x), Some(y)) => bruhat_leq(&ctx.rd, &x.matrix, &y.word),
            _ => false,
        }
    }
}

impl EOContext {
    pub fn new(rd: RootDatum, mu: &Coweight) -> Result<Self, Error> {
        let Some(m) = mu.integral() else {
            return Err(Error::Invalid("μ must be integral".into()));
        };
        if m.len() != rd.dim {
            return Err(Error::Dimension {
                expected: rd.dim,
                got: m.len(),
            });
        }
        let x = to_q(&m);
        let j = (0..rd.ss_rank())
            .filter(|&i| rd.pair(i, &x).is_zero())
            .collect();
        Ok(EOContext {
            rd,
            mu: m,
            j,
            orthogonal: None,
        })
    }

    /// The context of `(SO(V), μ)` with `dim V = n + 2`.
    pub fn orthogonal(quad: QuadSpaceData) -> Result<Self, Error> {
        let (rd, mu) = orthogonal_datum(quad.n, quad.det_plus)?;
        let mut ctx = EOContext::new(rd, &mu)?;
        ctx.orthogonal = Some(quad);
        Ok(ctx)
    }

    fn in_jw(&self, matrix: &MatZ) -> bool {
        let inv = inverse_unimodular(matrix);
        self.j.iter().all(|&j| {
            self.rd
                .coroot_is_positive(&mat_vec(&inv, &self.rd.coroots[j]))
        })
    }

    fn length(&self, matrix: &MatZ) -> usize {
        self.rd.inversions(matrix)
    }
}

/// Minimal-length representatives of `W_J \ W`, sorted by length then
/// word, with labels and Bruhat covers.
pub fn enumerate_jw(ctx: &EOContext) -> JwPoset {
    let rd = &ctx.rd;
    let refl: Vec<MatZ> = (0..rd.ss_rank()).map(|i| rd.reflection(i)).collect();
    let mut seen: HashSet<MatZ> = HashSet::new();
    let mut level = vec![(Vec::<usize>::new(), identity(rd.dim))];
    seen.insert(identity(rd.dim));
    let mut all = Vec::new();
    let mut len = 0;
    while !level.is_empty() {
        let mut next = Vec::new();
        for (word, m) in &level {
            for (i, s) in refl.iter().enumerate() {
                let ms = mat_mul(m, s);
                if seen.contains(&ms) || ctx.length(&ms) != len + 1 || !ctx.in_jw(&ms) {
                    continue;
                }
                seen.insert(ms.clone());
                let mut w = word.clone();
                w.push(i);
                next.push((w, ms));
            }
        }
        all.extend(level.drain(..).map(|(w, m)| (len, w, m)));
        level = next;
        len += 1;
    }
    all.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut elements: Vec<CosetRep> = Vec::with_capacity(all.len());
    for (len, word, matrix) in all {
        let primes = elements.iter().filter(|e| e.length == len).count();
        elements.push(CosetRep {
            label: Label { index: len, primes },
            word,
            length: len,
            matrix,
            newton: None,
            vertex_type: None,
        });
    }
    if ctx.orthogonal.is_some() {
        relabel_orthogonal(ctx, &mut elements);
    }
    let mut covers = Vec::new();
    for y in &elements {
        for x in &elements {
            if x.length + 1 == y.length && bruhat_leq(rd, &x.matrix, &y.word) {
                covers.push((x.label, y.label));
            }
        }
    }
    JwPoset { elements, covers }
}

/// In the even case the two elements of length `m − 1` are told apart by
/// their displayed words.
fn relabel_orthogonal(ctx: &EOContext, elements: &mut [CosetRep]) {
    let Ok(words) = orthogonal_words(ctx) else {
        return;
    };
    for e in elements.iter_mut() {
        for (l, w) in &words {
            if ctx.rd.weyl_element(w).matrix == e.matrix {
                e.label = *l;
            }
        }
    }
}

/// Bruhat order `x ≤ y`, with `y` given by a reduced word, via Deodhar's
/// lifting property: if `ys < y` then `x ≤ y` iff `min(x, xs) ≤ ys`.
pub fn bruhat_leq(rd: &RootDatum, x: &MatZ, y_word: &[usize]) -> bool {
    let mut x = x.clone();
    let mut lx = rd.inversions(&x);
    for &s in y_word.iter().rev() {
        if lx == 0 {
            return true;
        }
        let xs = mat_mul(&x, &rd.reflection(s));
        let lxs = rd.inversions(&xs);
        if lxs < lx {
            x = xs;
            lx = lxs;
        }
    }
    lx == 0
}

/// Lower Bruhat interval of a reduced word by the subword property.
pub fn subword_interval(rd: &RootDatum, word: &[usize]) -> HashSet<MatZ> {
    let mut set: HashSet<MatZ> = HashSet::new();
    set.insert(identity(rd.dim));
    for &s in word {
        let r = rd.reflection(s);
        let new: Vec<MatZ> = set.iter().map(|m| mat_mul(m, &r)).collect();
        set.extend(new);
    }
    set
}

/// Longest element of the parabolic subgroup `W_J`.
pub fn longest_element(rd: &RootDatum, j: &[usize]) -> MatZ {
    let mut m = identity(rd.dim);
    let mut len = 0;
    loop {
        let step = j.iter().find_map(|&s| {
            let ms = mat_mul(&m, &rd.reflection(s));
            let l = rd.inversions(&ms);
            (l > len).then_some((ms, l))
        });
        match step {
            Some((ms, l)) => {
                m = ms;
                len = l;
            }
            None => return m,
        }
    }
}

/// The length-reversing involution `w ↦ w_{0,J} w w_0` of `^J W`.
pub fn twist(ctx: &EOContext, w: &MatZ) -> MatZ {
    let all: Vec<usize> = (0..ctx.rd.ss_rank()).collect();
    let w0 = longest_element(&ctx.rd, &all);
    let w0j = longest_element(&ctx.rd, &ctx.j);
    mat_mul(&mat_mul(&w0j, w), &w0)
}

/// The displayed reduced words `w_i` (and `w'_{m−1}` for even `n`), with
/// simple reflections numbered from 0.
pub fn orthogonal_words(ctx: &EOContext) -> Result<Vec<(Label, Vec<usize>)>, Error> {
    let Some(quad) = ctx.orthogonal else {
        return Err(Error::Invalid("not an orthogonal context".into()));
    };
    let m = quad.m();
    let prefix = |k: usize| -> Vec<usize> { (0..k).collect() };
    let mut out = Vec::new();
    if quad.is_odd() {
        for i in 0..=m {
            out.push((Label::plain(i), prefix(i)));
        }
        for i in m + 1..=2 * m - 1 {
            // s_1⋯s_{m−1} s_m s_{m−1}⋯s_{2m−i}
            let mut w = prefix(m);
            w.extend((2 * m - i - 1..m - 1).rev());
            out.push((Label::plain(i), w));
        }
    } else {
        for i in 0..=m {
            if i == m {
                // s_1⋯s_{m−2} s_{m−1} s_m
                out.push((Label::plain(i), prefix(m)));
            } else {
                out.push((Label::plain(i), prefix(i)));
            }
        }
        for i in m + 1..=2 * m - 2 {
            // s_1⋯s_m s_{m−2}⋯s_{2m−1−i}
            let mut w = prefix(m);
            w.extend((2 * m - 2 - i..m - 2).rev());
            out.push((Label::plain(i), w));
        }
        let mut wp = prefix(m - 2);
        wp.push(m - 1);
        out.push((Label::primed(m - 1), wp));
    }
    out.sort();
    Ok(out)
}

/// The displayed `^J W^b` for the basic class.
pub fn basic_labels(quad: &QuadSpaceData) -> Vec<Label> {
    let m = quad.m();
    if quad.is_odd() {
        (m..=2 * m - 1).map(Label::plain).collect()
    } else if quad.det_plus {
        (m..=2 * m - 2).map(Label::plain).collect()
    } else {
        let mut v = vec![Label::plain(m - 1), Label::primed(m - 1)];
        v.extend((m..=2 * m - 2).map(Label::plain));
        v
    }
}

/// `^J W^b` for a class of `B(G, μ)` of the orthogonal datum. Non-basic
/// classes get singletons: shorter words go to more ordinary classes.
pub fn jw_b_subset(
    ctx: &EOContext,
    quad: &QuadSpaceData,
    b: &SigmaConjClass,
) -> Result<Vec<Label>, Error> {
    let assign = jw_b_assignment(ctx, quad)?;
    let classes = enumerate_bgmu(&ctx.rd, &ctx.rd.coweight_int(&ctx.mu))?;
    let idx = classes
        .iter()
        .position(|c| c.nu == b.nu && c.kappa == b.kappa)
        .ok_or_else(|| Error::Invalid(format!("ν = {} is not in B(G, μ)", b.nu)))?;
    Ok(assign[idx].clone())
}

/// `^J W^b` for every class of `B(G, μ)`, indexed like `enumerate_bgmu`.
pub fn jw_b_assignment(ctx: &EOContext, quad: &QuadSpaceData) -> Result<Vec<Vec<Label>>, Error> {
    if ctx.orthogonal != Some(*quad) {
        return Err(Error::Invalid(
            "quadratic space does not match the context".into(),
        ));
    }
    let mu = ctx.rd.coweight_int(&ctx.mu);
    if !fully_hn_decomposable(&ctx.rd, &mu)?.decomposable {
        return Err(Error::Invalid(
            "context is not fully Hodge–Newton decomposable".into(),
        ));
    }
    let classes = enumerate_bgmu(&ctx.rd, &mu)?;
    let jw = enumerate_jw(ctx);
    let basic: BTreeSet<Label> = basic_labels(quad).into_iter().collect();
    let mut rest: Vec<Label> = jw
        .labels()
        .into_iter()
        .filter(|l| !basic.contains(l))
        .collect();
    rest.sort();
    let nonbasic = classes.iter().filter(|c| !c.basic).count();
    if rest.len() != nonbasic {
        return Err(Error::Consistency(format!(
            "{} non-basic EO labels but {} non-basic classes",
            rest.len(),
            nonbasic
        )));
    }
    let mut it = rest.into_iter();
    Ok(classes
        .iter()
        .map(|c| {
            if c.basic {
                basic.iter().copied().collect()
            } else {
                vec![it.next().unwrap()]
            }
        })
        .collect())
}

/// The displayed maximal vertex-lattice type.
pub fn tmax(quad: &QuadSpaceData) -> usize {
    let n = quad.n;
    if quad.is_odd() {
        n + 1
    } else if quad.det_plus {
        n
    } else {
        n + 2
    }
}

pub fn vertex_types(quad: &QuadSpaceData) -> Vec<VertexLatticeClass> {
    (1..=tmax(quad) / 2)
        .map(|d| VertexLatticeClass { t: 2 * d })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EoHpRow {
    pub labels: Vec<Label>,
    pub t: usize,
}

/// `w_i ↦ t = 2(n − i + 1)` on `^J W^b`; in the non-split even case the two
/// elements of length `m − 1` share the type `2m`.
pub fn eo_hp_correspondence(ctx: &EOContext, quad: &QuadSpaceData) -> Result<Vec<EoHpRow>, Error> {
    if ctx.orthogonal != Some(*quad) {
        return Err(Error::Invalid(
            "not the orthogonal context of this space".into(),
        ));
    }
    let jw = enumerate_jw(ctx);
    let n = quad.n;
    let mut by_t: BTreeMap<usize, Vec<Label>> = BTreeMap::new();
    for l in basic_labels(quad) {
        let e = jw
            .get(l)
            .ok_or_else(|| Error::Consistency(format!("label {l} missing from ^JW")))?;
        if e.length > n + 1 {
            return Err(Error::Invalid(format!("label {l} outside ^JW^b")));
        }
        by_t.entry(2 * (n + 1 - e.length)).or_default().push(l);
    }
    let image: Vec<usize> = by_t.keys().copied().collect();
    let want: Vec<usize> = vertex_types(quad).iter().map(|v| v.t).collect();
    if image != want {
        return Err(Error::Consistency(format!(
            "image {image:?} differs from the vertex types {want:?}"
        )));
    }
    Ok(by_t
        .into_iter()
        .rev()
        .map(|(t, labels)| EoHpRow { labels, t })
        .collect())
}

/// Type of the vertex lattice attached to a basic EO label.
pub fn eo_hp_type(ctx: &EOContext, quad: &QuadSpaceData, l: Label) -> Result<usize, Error> {
    eo_hp_correspondence(ctx, quad)?
        .into_iter()
        .find(|r| r.labels.contains(&l))
        .map(|r| r.t)
        .ok_or_else(|| Error::Invalid(format!("label {l} outside ^JW^b")))
}

/// Fill the stratum metadata of `^J W` for the orthogonal datum.
pub fn annotate_orthogonal(ctx: &EOContext, quad: &QuadSpaceData) -> Result<JwPoset, Error> {
    let mut jw = enumerate_jw(ctx);
    let assign = jw_b_assignment(ctx, quad)?;
    let hp = eo_hp_correspondence(ctx, quad)?;
    for e in jw.elements.iter_mut() {
        e.newton = assign.iter().position(|s| s.contains(&e.label));
        e.vertex_type = hp.iter().find(|r| r.labels.contains(&e.label)).map(|r| r.t);
    }
    Ok(jw)
}

#[derive(Clone, Debug, Serialize)]
pub struct K3NewtonRow {
    /// Height `h`, or `"inf"` for the basic class.
    pub height: String,
    pub nu: Coweight,
    /// Slopes `(1 − 1/h, 1, 1 + 1/h)` of the K3 crystal.
    #[serde(serialize_with = "ser_qs")]
    pub slopes: Vec<Q>,
    pub eo: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct K3EoRow {
    /// `i = ℓ(w) + 1`.
    pub index: usize,
    pub label: Label,
    pub basic: bool,
    pub height: Option<usize>,
    pub artin: Option<usize>,
    pub vertex_type: Option<usize>,
    pub sigma0: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct K3Table {
    pub newton: Vec<K3NewtonRow>,
    pub eo: Vec<K3EoRow>,
}

fn ser_qs<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_q))
}

/// Weights of `ν` on the standard representation of `SO_{2m+1}`.
fn std_slopes(nu: &[Q]) -> (Q, Q) {
    let max = nu.iter().copied().max().unwrap_or_else(Q::zero);
    (-max, max)
}

/// The supersingular K3 dictionary, assembled from the orthogonal datum with
/// `n = 19` and cross-checked against every computed table.
pub fn k3_dictionary() -> Result<K3Table, Error> {
    let quad = QuadSpaceData::new(19, true)?;
    let ctx = EOContext::orthogonal(quad)?;
    let classes = enumerate_bgmu(&ctx.rd, &ctx.rd.coweight_int(&ctx.mu))?;
    let gate = |ok: bool, what: String| {
        if ok {
            Ok(())
        } else {
            Err(Error::Consistency(format!("K3 dictionary: {what}")))
        }
    };
    gate(
        classes.len() == 11,
        format!("{} Newton classes", classes.len()),
    )?;
    let jw = annotate_orthogonal(&ctx, &quad)?;
    gate(
        jw.elements.len() == 20,
        format!("{} EO labels", jw.elements.len()),
    )?;
    let assign = jw_b_assignment(&ctx, &quad)?;
    let one = qi(1);
    let mut newton = Vec::new();
    for (k, c) in classes.iter().enumerate() {
        let nu = c.nu.values();
        let (lo, hi) = std_slopes(&nu);
        let slopes = vec![one + lo, one, one + hi];
        let height = if c.basic {
            gate(hi.is_zero(), "basic class with non-zero slope".into())?;
            "inf".to_string()
        } else {
            let h = hi.recip();
            gate(
                h.is_integer() && nu.iter().filter(|x| **x == hi).count() as i64 == h.to_integer(),
                format!("class {} is not isoclinic of height 1/{}", c.nu, fmt_q(&hi)),
            )?;
            gate(
                h.to_integer() == k as i64 + 1,
                "classes out of height order".into(),
            )?;
            h.to_integer().to_string()
        };
        let eo: Vec<usize> = assign[k].iter().map(|l| l.index + 1).collect();
        newton.push(K3NewtonRow {
            height,
            nu: c.nu.clone(),
            slopes,
            eo,
        });
    }
    let mut eo = Vec::new();
    for e in &jw.elements {
        let index = e.length + 1;
        let k = e
            .newton
            .ok_or_else(|| Error::Consistency(format!("label {} has no class", e.label)))?;
        let basic = classes[k].basic;
        let (height, artin, sigma0) = if basic {
            let t = e
                .vertex_type
                .ok_or_else(|| Error::Consistency("basic label without type".into()))?;
            gate(
                t / 2 == 21 - index,
                format!("σ₀ = {} at i = {index}", t / 2),
            )?;
            (None, Some(21 - index), Some(t / 2))
        } else {
            gate(k + 1 == index, format!("w_{index} paired with b_{}", k + 1))?;
            (Some(k + 1), None, None)
        };
        eo.push(K3EoRow {
            index,
            label: e.label,
            basic,
            height,
            artin,
            vertex_type: e.vertex_type,
            sigma0,
        });
    }
    gate(
        eo.iter().filter(|r| r.basic).count() == 10,
        "basic EO label count".into(),
    )?;
    Ok(K3Table { newton, eo })
}

/// Plain-text rendering of the orthogonal case split.
pub fn pretty_case_split(quad: &QuadSpaceData) -> Result<String, Error> {
    let ctx = EOContext::orthogonal(*quad)?;
    let jw = enumerate_jw(&ctx);
    let join = |v: &[Label]| {
        v.iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let m = quad.m();
    let case = if quad.is_odd() {
        format!("n = 2m-1 odd, m = {m}")
    } else if quad.det_plus {
        format!("n = 2m-2 even, det V = (-1)^(n/2), m = {m}")
    } else {
        format!("n = 2m-2 even, det V != (-1)^(n/2), m = {m}")
    };
    let mut s = format!("n = {} ({case})\n", quad.n);
    s += &format!("^JW   = {{{}}}\n", join(&jw.labels()));
    s += &format!("^JW^b = {{{}}}\n", join(&basic_labels(quad)));
    s += &format!("t_max = {}\n", tmax(quad));
    for r in eo_hp_correspondence(&ctx, quad)? {
        s += &format!("  {} -> t = {}\n", join(&r.labels), r.t);
    }
    Ok(s)
}

pub fn is_orthogonal_family(rd: &RootDatum) -> bool {
    matches!(rd.family, Family::SO(_) | Family::GSpin(_))
}

pub fn orth_kind(quad: &QuadSpaceData) -> Orth {
    orth_form(quad.n, quad.det_plus).0
}
