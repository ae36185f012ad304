use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::group::check_group_element;
use crate::lie::{AlgebraElement, GroupElement};

/// Index of the real generator `Re g_ab` (`part = 0`) or `Im g_ab` (`part = 1`).
pub fn var_index(n: usize, a: usize, b: usize, part: usize) -> u16 {
    (2 * (a * n + b) + part) as u16
}

/// Product of real generators, stored as a sorted list of variable indices
/// (a variable appears once per unit of its exponent).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<u16>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn from_vars(mut vars: Vec<u16>) -> Self {
        vars.sort_unstable();
        Self(vars)
    }

    /// Build from an exponent vector over the `2n²` generators.
    pub fn from_exponents(exps: &[u32]) -> Self {
        let mut vars = Vec::new();
        for (v, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                vars.push(v as u16);
            }
        }
        Self(vars)
    }

    pub fn exponents(&self, nvars: usize) -> Vec<u32> {
        let mut e = vec![0u32; nvars];
        for &v in &self.0 {
            e[v as usize] += 1;
        }
        e
    }

    pub fn degree(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn vars(&self) -> &[u16] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                out.push(self.0[i]);
                i += 1;
            } else {
                out.push(other.0[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    fn with_var(&self, v: u16) -> Monomial {
        let pos = self.0.partition_point(|&x| x < v);
        let mut out = self.0.clone();
        out.insert(pos, v);
        Monomial(out)
    }

    pub fn eval(&self, vals: &[f64]) -> f64 {
        self.0.iter().fold(1.0, |acc, &v| acc * vals[v as usize])
    }
}

/// Real generator values `[Re g_00, Im g_00, Re g_01, …]` of a matrix.
pub fn generator_values(g: &GroupElement) -> Vec<f64> {
    let n = g.nrows();
    let mut out = Vec::with_capacity(2 * n * n);
    for a in 0..n {
        for b in 0..n {
            out.push(g[(a, b)].re);
            out.push(g[(a, b)].im);
        }
    }
    out
}

/// Scalar function on the group: a polynomial in the real and imaginary
/// parts of the matrix entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    n: usize,
    terms: BTreeMap<Monomial, f64>,
    degree_cap: u32,
}

/// Linear action of a left-invariant field on the generators:
/// `d/dt g_ab(g·exp(tX))|₀ = (gX)_ab`, split into real and imaginary parts.
#[derive(Debug, Clone)]
pub struct Derivation {
    n: usize,
    images: Vec<Vec<(u16, f64)>>,
}

impl Derivation {
    pub fn new(x: &AlgebraElement) -> Self {
        let n = x.size();
        let m = x.entries();
        let mut images = vec![Vec::new(); 2 * n * n];
        for a in 0..n {
            for b in 0..n {
                let mut re = Vec::new();
                let mut im = Vec::new();
                for c in 0..n {
                    let z: Complex64 = m[(c, b)];
                    let (xr, xi) = (var_index(n, a, c, 0), var_index(n, a, c, 1));
                    if z.re != 0.0 {
                        re.push((xr, z.re));
                        im.push((xi, z.re));
                    }
                    if z.im != 0.0 {
                        re.push((xi, -z.im));
                        im.push((xr, z.im));
                    }
                }
                images[var_index(n, a, b, 0) as usize] = re;
                images[var_index(n, a, b, 1) as usize] = im;
            }
        }
        Self { n, images }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Derivative of a single monomial, as `(monomial, coefficient)` pairs.
    pub fn apply_monomial(&self, m: &Monomial, out: &mut Vec<(Monomial, f64)>) {
        let vars = m.vars();
        let mut k = 0;
        while k < vars.len() {
            let v = vars[k];
            let mut e = 1;
            while k + e < vars.len() && vars[k + e] == v {
                e += 1;
            }
            let mut rest = vars.to_vec();
            rest.remove(k);
            let rest = Monomial(rest);
            for &(w, c) in &self.images[v as usize] {
                out.push((rest.with_var(w), c * e as f64));
            }
            k += e;
        }
    }

    pub fn apply(&self, u: &PolyField) -> PolyField {
        let mut out = PolyField::zero(u.n, u.degree_cap);
        let mut buf = Vec::new();
        for (m, &c) in &u.terms {
            buf.clear();
            self.apply_monomial(m, &mut buf);
            for (mm, cc) in buf.drain(..) {
                *out.terms.entry(mm).or_insert(0.0) += c * cc;
            }
        }
        out.purge();
        out
    }
}

#[derive(Serialize, Deserialize)]
struct PolyFieldJson {
    n: usize,
    degree_cap: u32,
    terms: Vec<(Vec<u32>, f64)>,
}

impl PolyField {
    pub fn zero(n: usize, degree_cap: u32) -> Self {
        Self { n, terms: BTreeMap::new(), degree_cap }
    }

    pub fn constant(n: usize, c: f64, degree_cap: u32) -> Self {
        let mut f = Self::zero(n, degree_cap);
        if c != 0.0 {
            f.terms.insert(Monomial::one(), c);
        }
        f
    }

    /// `Re g_ab` (0-based indices).
    pub fn re_entry(n: usize, a: usize, b: usize, degree_cap: u32) -> Self {
        Self::from_terms(n, degree_cap, vec![(Monomial(vec![var_index(n, a, b, 0)]), 1.0)])
            .expect("degree 1")
    }

    /// `Im g_ab` (0-based indices).
    pub fn im_entry(n: usize, a: usize, b: usize, degree_cap: u32) -> Self {
        Self::from_terms(n, degree_cap, vec![(Monomial(vec![var_index(n, a, b, 1)]), 1.0)])
            .expect("degree 1")
    }

    /// `|g_ab|²`.
    pub fn abs2_entry(n: usize, a: usize, b: usize, degree_cap: u32) -> Result<Self> {
        let r = var_index(n, a, b, 0);
        let i = var_index(n, a, b, 1);
        Self::from_terms(n, degree_cap, vec![(Monomial(vec![r, r]), 1.0), (Monomial(vec![i, i]), 1.0)])
    }

    pub fn from_terms(
        n: usize,
        degree_cap: u32,
        terms: impl IntoIterator<Item = (Monomial, f64)>,
    ) -> Result<Self> {
        let mut f = Self::zero(n, degree_cap);
        let nvars = 2 * n * n;
        for (m, c) in terms {
            if !c.is_finite() {
                return Err(Error::OutOfRange("non-finite coefficient".into()));
            }
            if m.degree() > degree_cap {
                return Err(Error::OutOfRange(format!(
                    "monomial degree {} exceeds cap {degree_cap}",
                    m.degree()
                )));
            }
            if m.vars().iter().any(|&v| v as usize >= nvars) {
                return Err(Error::OutOfRange("variable index out of range".into()));
            }
            *f.terms.entry(m).or_insert(0.0) += c;
        }
        f.purge();
        Ok(f)
    }

    fn purge(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Result<Self> {
        if self.degree() > cap {
            return Err(Error::OutOfRange(format!("degree {} exceeds cap {cap}", self.degree())));
        }
        self.degree_cap = cap;
        Ok(self)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut f = self.clone();
        f.terms.values_mut().for_each(|c| *c *= s);
        f.purge();
        f
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// `self + s·other`; the cap is the larger of the two.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let mut f = self.clone();
        f.degree_cap = f.degree_cap.max(other.degree_cap);
        for (m, &c) in &other.terms {
            *f.terms.entry(m.clone()).or_insert(0.0) += s * c;
        }
        f.purge();
        f
    }

    /// Pointwise product; the cap is the sum of the caps.
    pub fn mul(&self, other: &Self) -> Self {
        let mut f = Self::zero(self.n, self.degree_cap + other.degree_cap);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                *f.terms.entry(ma.mul(mb)).or_insert(0.0) += ca * cb;
            }
        }
        f.purge();
        f
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (m, &c) in &self.terms {
            d = d.max((c - other.coefficient(m)).abs());
        }
        for (m, &c) in &other.terms {
            if !self.terms.contains_key(m) {
                d = d.max(c.abs());
            }
        }
        d
    }

    /// Evaluate at a group element.
    pub fn evaluate(&self, g: &GroupElement) -> Result<f64> {
        if g.nrows() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: g.nrows() });
        }
        check_group_element(g)?;
        Ok(self.evaluate_unchecked(g))
    }

    pub fn evaluate_unchecked(&self, g: &GroupElement) -> f64 {
        self.evaluate_values(&generator_values(g))
    }

    /// Evaluate from precomputed [`generator_values`].
    pub fn evaluate_values(&self, vals: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| c * m.eval(vals)).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nvars = 2 * self.n * self.n;
        let doc = PolyFieldJson {
            n: self.n,
            degree_cap: self.degree_cap,
            terms: self.terms.iter().map(|(m, &c)| (m.exponents(nvars), c)).collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: PolyFieldJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))?;
        let nvars = 2 * doc.n * doc.n;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for (e, c) in doc.terms {
            if e.len() != nvars {
                return Err(Error::Config(format!(
                    "exponent vector has length {}, expected {nvars}",
                    e.len()
                )));
            }
            terms.push((Monomial::from_exponents(&e), c));
        }
        Self::from_terms(doc.n, doc.degree_cap, terms)
    }
}

/// Exact left-invariant derivative `(X u)(g) = d/dt u(g·exp(tX))|₀`.
pub fn apply_field(x: &AlgebraElement, u: &PolyField) -> Result<PolyField> {
    if x.size() != u.n() {
        return Err(Error::SizeMismatch { left: u.n(), right: x.size() });
    }
    Ok(Derivation::new(x).apply(u))
}
