//! Structured polynomials: linear in scalar symbols, quadratic (Gram form)
//! in vector symbols, with exact rational coefficients.
//!
//! A polynomial over a catalog with scalar symbols `s` and vector symbols
//! `u` represents
//!
//! ```text
//! p = constant + sum_s linear[s] * s + sum_{u, v} gram[u, v] * <u, v>
//! ```
//!
//! where the sum runs over ordered pairs and `gram` is symmetric, so the
//! coefficient of `<u, v>` for `u != v` is `2 * gram[u, v]`. Vector symbols
//! carry no dimension; it is supplied only when evaluating.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::numeric::{fmt_rational, parse_rational, Numeric, Rational};
use crate::ratmat::RatMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("symbol {0:?} appears more than once in the catalog")]
    DuplicateSymbol(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("catalog mismatch: expected scalars {expected_scalars:?} / vectors {expected_vectors:?}, found {found_scalars:?} / {found_vectors:?}")]
    CatalogMismatch {
        expected_scalars: Vec<String>,
        expected_vectors: Vec<String>,
        found_scalars: Vec<String>,
        found_vectors: Vec<String>,
    },
    #[error("replacement for {0:?} refers to the symbol itself")]
    SelfReferentialSubstitution(String),
    #[error("assignment is missing symbol {0:?}")]
    MissingAssignment(String),
    #[error("vector {name:?} has dimension {got}, expected {want}")]
    DimensionMismatch { name: String, got: usize, want: usize },
    #[error("combine needs at least one term")]
    EmptyCombination,
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Ordered scalar and vector symbol names. Construction order fixes every
/// downstream index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarCatalog {
    scalars: Vec<String>,
    vectors: Vec<String>,
}

impl VarCatalog {
    pub fn new<S: Into<String>, V: Into<String>>(
        scalars: impl IntoIterator<Item = S>,
        vectors: impl IntoIterator<Item = V>,
    ) -> Result<Arc<Self>, PolyError> {
        let scalars: Vec<String> = scalars.into_iter().map(Into::into).collect();
        let vectors: Vec<String> = vectors.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for name in scalars.iter().chain(&vectors) {
            if !seen.insert(name.as_str()) {
                return Err(PolyError::DuplicateSymbol(name.clone()));
            }
        }
        Ok(Arc::new(Self { scalars, vectors }))
    }

    pub fn scalars(&self) -> &[String] {
        &self.scalars
    }

    pub fn vectors(&self) -> &[String] {
        &self.vectors
    }

    pub fn scalar_index(&self, name: &str) -> Option<usize> {
        self.scalars.iter().position(|s| s == name)
    }

    pub fn vector_index(&self, name: &str) -> Option<usize> {
        self.vectors.iter().position(|s| s == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.scalar_index(name).is_some() || self.vector_index(name).is_some()
    }

    /// The same catalog with one vector symbol removed.
    pub fn without_vector(&self, name: &str) -> Result<Arc<Self>, PolyError> {
        if self.vector_index(name).is_none() {
            return Err(PolyError::UnknownSymbol(name.to_string()));
        }
        Ok(Arc::new(Self {
            scalars: self.scalars.clone(),
            vectors: self.vectors.iter().filter(|v| *v != name).cloned().collect(),
        }))
    }

    fn mismatch(&self, other: &Self) -> PolyError {
        PolyError::CatalogMismatch {
            expected_scalars: self.scalars.clone(),
            expected_vectors: self.vectors.clone(),
            found_scalars: other.scalars.clone(),
            found_vectors: other.vectors.clone(),
        }
    }
}

/// A linear combination of vector symbols, e.g. `x_k - 1/2 g_k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VecExpr {
    terms: BTreeMap<String, Rational>,
}

impl VecExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(name: &str) -> Self {
        Self::term(Rational::one(), name)
    }

    pub fn term(coeff: Rational, name: &str) -> Self {
        let mut e = Self::zero();
        e.push(coeff, name);
        e
    }

    fn push(&mut self, coeff: Rational, name: &str) {
        let entry = self.terms.entry(name.to_string()).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(name);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.terms.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn coefficient(&self, name: &str) -> Rational {
        self.terms.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, w: &Rational) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.push(v * w, k);
        }
        out
    }

    /// Coefficients in catalog order; rejects symbols outside the catalog.
    fn dense(&self, catalog: &VarCatalog) -> Result<Vec<Rational>, PolyError> {
        let mut out = vec![Rational::zero(); catalog.vectors.len()];
        for (name, c) in &self.terms {
            let i = catalog
                .vector_index(name)
                .ok_or_else(|| PolyError::UnknownSymbol(name.clone()))?;
            out[i] += c;
        }
        Ok(out)
    }
}

impl Add for VecExpr {
    type Output = VecExpr;
    fn add(mut self, rhs: VecExpr) -> VecExpr {
        for (k, v) in rhs.terms {
            self.push(v, &k);
        }
        self
    }
}

impl Sub for VecExpr {
    type Output = VecExpr;
    fn sub(self, rhs: VecExpr) -> VecExpr {
        self + (-rhs)
    }
}

impl Neg for VecExpr {
    type Output = VecExpr;
    fn neg(self) -> VecExpr {
        self.scaled(&-Rational::one())
    }
}

impl Mul<VecExpr> for Rational {
    type Output = VecExpr;
    fn mul(self, rhs: VecExpr) -> VecExpr {
        rhs.scaled(&self)
    }
}

impl Mul<&VecExpr> for &Rational {
    type Output = VecExpr;
    fn mul(self, rhs: &VecExpr) -> VecExpr {
        rhs.scaled(self)
    }
}

/// Canonical key of one coefficient. Pair keys hold the lexicographically
/// smaller symbol first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoefficientKey {
    Constant,
    Scalar(String),
    Pair(String, String),
}

impl CoefficientKey {
    pub fn pair(a: &str, b: &str) -> Self {
        if a <= b {
            Self::Pair(a.to_string(), b.to_string())
        } else {
            Self::Pair(b.to_string(), a.to_string())
        }
    }
}

impl fmt::Display for CoefficientKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant => write!(f, "constant -"),
            Self::Scalar(s) => write!(f, "scalar {s}"),
            Self::Pair(a, b) => write!(f, "pair {a}:{b}"),
        }
    }
}

/// Monomial in the `n = 1` coordinates: scalar symbols and the single
/// coordinate of each vector symbol are both plain variables here.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Monomial {
    One,
    Linear(String),
    /// Product of two variables, names sorted; equal names mean a square.
    Quadratic(String, String),
}

impl Monomial {
    pub fn product(a: &str, b: &str) -> Self {
        if a <= b {
            Self::Quadratic(a.to_string(), b.to_string())
        } else {
            Self::Quadratic(b.to_string(), a.to_string())
        }
    }
}

/// Values for every catalog symbol. All vectors must share one dimension.
#[derive(Debug, Clone)]
pub struct Assignment<T> {
    pub scalars: HashMap<String, T>,
    pub vectors: HashMap<String, Vec<T>>,
}

impl<T> Default for Assignment<T> {
    fn default() -> Self {
        Self {
            scalars: HashMap::new(),
            vectors: HashMap::new(),
        }
    }
}

impl<T> Assignment<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(mut self, name: &str, value: T) -> Self {
        self.scalars.insert(name.to_string(), value);
        self
    }

    pub fn vector(mut self, name: &str, value: Vec<T>) -> Self {
        self.vectors.insert(name.to_string(), value);
        self
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct StructuredPolynomial {
    catalog: Arc<VarCatalog>,
    constant: Rational,
    linear: Vec<Rational>,
    gram: RatMatrix,
}

impl fmt::Debug for StructuredPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl StructuredPolynomial {
    pub fn zero(catalog: &Arc<VarCatalog>) -> Self {
        let nv = catalog.vectors.len();
        Self {
            catalog: Arc::clone(catalog),
            constant: Rational::zero(),
            linear: vec![Rational::zero(); catalog.scalars.len()],
            gram: RatMatrix::zeros(nv, nv),
        }
    }

    /// Builds from raw parts; `gram` is symmetrized as `(G + G') / 2`.
    pub fn from_parts(
        catalog: &Arc<VarCatalog>,
        constant: Rational,
        linear: Vec<Rational>,
        gram: RatMatrix,
    ) -> Result<Self, PolyError> {
        let nv = catalog.vectors.len();
        if linear.len() != catalog.scalars.len() || gram.rows() != nv || gram.cols() != nv {
            return Err(PolyError::DimensionMismatch {
                name: "parts".into(),
                got: linear.len() + gram.rows(),
                want: catalog.scalars.len() + nv,
            });
        }
        let half = Rational::new(1.into(), 2.into());
        let sym = gram.add_scaled(&Rational::one(), &gram.transpose()).scale(&half);
        Ok(Self {
            catalog: Arc::clone(catalog),
            constant,
            linear,
            gram: sym,
        })
    }

    pub fn builder(catalog: &Arc<VarCatalog>) -> PolyBuilder {
        PolyBuilder {
            poly: Self::zero(catalog),
            error: None,
        }
    }

    /// `coeff * name` for a scalar symbol.
    pub fn scalar(catalog: &Arc<VarCatalog>, name: &str, coeff: Rational) -> Result<Self, PolyError> {
        Self::builder(catalog).scalar(name, coeff).build()
    }

    /// `<a, b>`
    pub fn inner(catalog: &Arc<VarCatalog>, a: &VecExpr, b: &VecExpr) -> Result<Self, PolyError> {
        Self::builder(catalog).inner(Rational::one(), a, b).build()
    }

    pub fn catalog(&self) -> &Arc<VarCatalog> {
        &self.catalog
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn linear(&self) -> &[Rational] {
        &self.linear
    }

    pub fn gram(&self) -> &RatMatrix {
        &self.gram
    }

    pub fn linear_coefficient(&self, name: &str) -> Option<&Rational> {
        self.catalog.scalar_index(name).map(|i| &self.linear[i])
    }

    /// Entry `gram[u, v]` (half the coefficient of `<u, v>` when `u != v`).
    pub fn gram_entry(&self, u: &str, v: &str) -> Option<&Rational> {
        let i = self.catalog.vector_index(u)?;
        let j = self.catalog.vector_index(v)?;
        Some(self.gram.get(i, j))
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.linear.iter().all(Zero::is_zero) && self.gram.is_zero()
    }

    /// Coefficient under a canonical key (`<u, v>` counted once per unordered pair).
    pub fn coefficient(&self, key: &CoefficientKey) -> Result<Rational, PolyError> {
        match key {
            CoefficientKey::Constant => Ok(self.constant.clone()),
            CoefficientKey::Scalar(s) => self
                .linear_coefficient(s)
                .cloned()
                .ok_or_else(|| PolyError::UnknownSymbol(s.clone())),
            CoefficientKey::Pair(a, b) => {
                let g = self
                    .gram_entry(a, b)
                    .ok_or_else(|| PolyError::UnknownSymbol(format!("{a}:{b}")))?;
                Ok(if a == b { g.clone() } else { g * Rational::from_integer(2.into()) })
            }
        }
    }

    /// Every nonzero coefficient under its canonical key, in catalog order
    /// (constant, scalars, then pairs by row).
    pub fn coefficients(&self) -> Vec<(CoefficientKey, Rational)> {
        let mut out = Vec::new();
        if !self.constant.is_zero() {
            out.push((CoefficientKey::Constant, self.constant.clone()));
        }
        for (name, c) in self.catalog.scalars.iter().zip(&self.linear) {
            if !c.is_zero() {
                out.push((CoefficientKey::Scalar(name.clone()), c.clone()));
            }
        }
        let two = Rational::from_integer(2.into());
        let vs = &self.catalog.vectors;
        for i in 0..vs.len() {
            for j in i..vs.len() {
                let g = self.gram.get(i, j);
                if g.is_zero() {
                    continue;
                }
                let c = if i == j { g.clone() } else { g * &two };
                out.push((CoefficientKey::pair(&vs[i], &vs[j]), c));
            }
        }
        out
    }

    /// Exact weighted sum of polynomials sharing one catalog.
    pub fn combine(terms: &[(Rational, &StructuredPolynomial)]) -> Result<Self, PolyError> {
        let (_, first) = terms.first().ok_or(PolyError::EmptyCombination)?;
        let mut out = Self::zero(&first.catalog);
        for (w, p) in terms {
            if p.catalog != first.catalog {
                return Err(first.catalog.mismatch(&p.catalog));
            }
            if w.is_zero() {
                continue;
            }
            out.constant += w * &p.constant;
            for (o, l) in out.linear.iter_mut().zip(&p.linear) {
                *o += w * l;
            }
            out.gram = out.gram.add_scaled(w, &p.gram);
        }
        Ok(out)
    }

    pub fn scaled(&self, w: &Rational) -> Self {
        Self {
            catalog: Arc::clone(&self.catalog),
            constant: &self.constant * w,
            linear: self.linear.iter().map(|l| l * w).collect(),
            gram: self.gram.scale(w),
        }
    }

    /// Replaces a vector symbol by a linear combination of the remaining ones;
    /// the result lives on the catalog without `target`.
    pub fn substitute_vector(&self, target: &str, replacement: &VecExpr) -> Result<Self, PolyError> {
        let new_catalog = self.catalog.without_vector(target)?;
        self.substitute_into(target, replacement, &new_catalog)
    }

    /// As [`Self::substitute_vector`], reusing an already reduced catalog so
    /// that many substituted polynomials share one `Arc`.
    pub fn substitute_into(
        &self,
        target: &str,
        replacement: &VecExpr,
        reduced: &Arc<VarCatalog>,
    ) -> Result<Self, PolyError> {
        if !replacement.coefficient(target).is_zero() {
            return Err(PolyError::SelfReferentialSubstitution(target.to_string()));
        }
        let expected = self.catalog.without_vector(target)?;
        if **reduced != *expected {
            return Err(expected.mismatch(reduced));
        }
        let repl = replacement.dense(reduced)?;
        let old = &self.catalog.vectors;
        // old vector u = sum_a T[u, a] * new vector a
        let mut t = RatMatrix::zeros(old.len(), reduced.vectors.len());
        for (u, name) in old.iter().enumerate() {
            if name == target {
                for (a, c) in repl.iter().enumerate() {
                    t.set(u, a, c.clone());
                }
            } else {
                let a = reduced.vector_index(name).expect("reduced catalog keeps the symbol");
                t.set(u, a, Rational::one());
            }
        }
        let gram = t.transpose().mul(&self.gram).mul(&t);
        Ok(Self {
            catalog: Arc::clone(reduced),
            constant: self.constant.clone(),
            linear: self.linear.clone(),
            gram,
        })
    }

    /// Coefficients as a polynomial in the `n = 1` coordinates.
    pub fn expand_univariate(&self) -> BTreeMap<Monomial, Rational> {
        let mut out = BTreeMap::new();
        let mut add = |m: Monomial, c: Rational| {
            if c.is_zero() {
                return;
            }
            let e = out.entry(m).or_insert_with(Rational::zero);
            *e += c;
        };
        add(Monomial::One, self.constant.clone());
        for (name, c) in self.catalog.scalars.iter().zip(&self.linear) {
            add(Monomial::Linear(name.clone()), c.clone());
        }
        let vs = &self.catalog.vectors;
        for i in 0..vs.len() {
            for j in 0..vs.len() {
                add(Monomial::product(&vs[i], &vs[j]), self.gram.get(i, j).clone());
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Value at an assignment; vectors may have any common dimension.
    pub fn evaluate<T: Numeric>(&self, assignment: &Assignment<T>) -> Result<T, PolyError> {
        let mut acc = T::from_rational(&self.constant);
        for (name, c) in self.catalog.scalars.iter().zip(&self.linear) {
            let v = assignment
                .scalars
                .get(name)
                .ok_or_else(|| PolyError::MissingAssignment(name.clone()))?;
            if !c.is_zero() {
                acc = acc + T::from_rational(c) * v.clone();
            }
        }
        let mut vecs = Vec::with_capacity(self.catalog.vectors.len());
        let mut dim = None;
        for name in &self.catalog.vectors {
            let v = assignment
                .vectors
                .get(name)
                .ok_or_else(|| PolyError::MissingAssignment(name.clone()))?;
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(PolyError::DimensionMismatch {
                        name: name.clone(),
                        got: v.len(),
                        want: d,
                    })
                }
                _ => {}
            }
            vecs.push(v);
        }
        let n = vecs.len();
        for i in 0..n {
            for j in 0..n {
                let g = self.gram.get(i, j);
                if g.is_zero() {
                    continue;
                }
                acc = acc + T::from_rational(g) * crate::numeric::dot(vecs[i], vecs[j]);
            }
        }
        Ok(acc)
    }

    /// One line per coefficient (`kind key num/den`), preceded by catalog
    /// header comments. The constant line is always present.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# scalars: {}\n", self.catalog.scalars.join(" ")));
        s.push_str(&format!("# vectors: {}\n", self.catalog.vectors.join(" ")));
        s.push_str(&format!("constant - {}\n", fmt_rational(&self.constant)));
        for (key, c) in self.coefficients() {
            if key != CoefficientKey::Constant {
                s.push_str(&format!("{key} {}\n", fmt_rational(&c)));
            }
        }
        s
    }

    /// Inverse of [`Self::to_text`].
    pub fn from_text(text: &str) -> Result<Self, PolyError> {
        let perr = |line: usize, message: &str| PolyError::Parse {
            line,
            message: message.to_string(),
        };
        let mut scalars = None;
        let mut vectors = None;
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let no = no + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(list) = rest.strip_prefix("scalars:") {
                    scalars = Some(list.split_whitespace().map(String::from).collect::<Vec<_>>());
                } else if let Some(list) = rest.strip_prefix("vectors:") {
                    vectors = Some(list.split_whitespace().map(String::from).collect::<Vec<_>>());
                }
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(perr(no, "expected `kind key value`"));
            }
            let value = parse_rational(parts[2]).map_err(|e| perr(no, &e.to_string()))?;
            let key = match parts[0] {
                "constant" => CoefficientKey::Constant,
                "scalar" => CoefficientKey::Scalar(parts[1].to_string()),
                "pair" => {
                    let (a, b) = parts[1].split_once(':').ok_or_else(|| perr(no, "pair key needs `a:b`"))?;
                    CoefficientKey::pair(a, b)
                }
                other => return Err(perr(no, &format!("unknown kind {other:?}"))),
            };
            entries.push((no, key, value));
        }
        let catalog = VarCatalog::new(
            scalars.ok_or_else(|| perr(0, "missing `# scalars:` header"))?,
            vectors.ok_or_else(|| perr(0, "missing `# vectors:` header"))?,
        )?;
        let mut b = Self::builder(&catalog);
        for (no, key, value) in entries {
            b = match key {
                CoefficientKey::Constant => b.constant(value),
                CoefficientKey::Scalar(s) => {
                    if catalog.scalar_index(&s).is_none() {
                        return Err(perr(no, &format!("unknown scalar {s:?}")));
                    }
                    b.scalar(&s, value)
                }
                CoefficientKey::Pair(u, v) => {
                    if catalog.vector_index(&u).is_none() || catalog.vector_index(&v).is_none() {
                        return Err(perr(no, &format!("unknown pair {u}:{v}")));
                    }
                    b.inner(value, &VecExpr::var(&u), &VecExpr::var(&v))
                }
            };
        }
        b.build()
    }
}

/// Accumulates terms of a polynomial on a fixed catalog; the first error is
/// reported by [`PolyBuilder::build`].
pub struct PolyBuilder {
    poly: StructuredPolynomial,
    error: Option<PolyError>,
}

impl PolyBuilder {
    pub fn constant(mut self, c: Rational) -> Self {
        self.poly.constant += c;
        self
    }

    pub fn scalar(mut self, name: &str, coeff: Rational) -> Self {
        match self.poly.catalog.scalar_index(name) {
            Some(i) => self.poly.linear[i] += coeff,
            None => self.fail(PolyError::UnknownSymbol(name.to_string())),
        }
        self
    }

    /// Adds `w * <a, b>`.
    pub fn inner(mut self, w: Rational, a: &VecExpr, b: &VecExpr) -> Self {
        let cat = Arc::clone(&self.poly.catalog);
        let (da, db) = match (a.dense(&cat), b.dense(&cat)) {
            (Ok(da), Ok(db)) => (da, db),
            (Err(e), _) | (_, Err(e)) => {
                self.fail(e);
                return self;
            }
        };
        let half = &w * Rational::new(1.into(), 2.into());
        for (i, ai) in da.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in db.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let c = ai * bj * &half;
                self.poly.gram.add_to(i, j, &c);
                self.poly.gram.add_to(j, i, &c);
            }
        }
        self
    }

    /// Adds `w * ||a||^2`.
    pub fn norm_sq(self, w: Rational, a: &VecExpr) -> Self {
        self.inner(w, a, a)
    }

    pub fn add(mut self, w: &Rational, p: &StructuredPolynomial) -> Self {
        match StructuredPolynomial::combine(&[(Rational::one(), &self.poly), (w.clone(), p)]) {
            Ok(sum) => self.poly = sum,
            Err(e) => self.fail(e),
        }
        self
    }

    fn fail(&mut self, e: PolyError) {
        if self.error.is_none() {
            self.error = Some(e);
        }
    }

    pub fn build(self) -> Result<StructuredPolynomial, PolyError> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.poly),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    fn gd_catalog() -> Arc<VarCatalog> {
        VarCatalog::new(["f_star", "f_k", "f_k1"], ["x_star", "x_k", "x_k1", "g_k", "g_k1"]).unwrap()
    }

    #[test]
    fn catalog_rejects_duplicates() {
        assert_eq!(
            VarCatalog::new(["a", "b"], ["a"]).unwrap_err(),
            PolyError::DuplicateSymbol("a".into())
        );
    }

    #[test]
    fn combine_cancels_and_scales() {
        let cat = gd_catalog();
        let p = StructuredPolynomial::builder(&cat)
            .scalar("f_k", int(3))
            .inner(int(2), &VecExpr::var("g_k"), &VecExpr::var("x_k"))
            .build()
            .unwrap();
        assert!(StructuredPolynomial::combine(&[(int(1), &p), (int(-1), &p)]).unwrap().is_zero());

        let gg = StructuredPolynomial::inner(&cat, &VecExpr::var("g_k"), &VecExpr::var("g_k")).unwrap();
        let two = StructuredPolynomial::combine(&[(int(2), &gg)]).unwrap();
        assert_eq!(two.gram_entry("g_k", "g_k"), Some(&int(2)));
        assert_eq!(two.coefficients().len(), 1);
    }

    #[test]
    fn combine_builds_rate_polynomial() {
        let cat = gd_catalog();
        let mk = StructuredPolynomial::builder(&cat)
            .scalar("f_k", int(1))
            .scalar("f_star", int(-1))
            .build()
            .unwrap();
        let mk1 = StructuredPolynomial::builder(&cat)
            .scalar("f_k1", int(1))
            .scalar("f_star", int(-1))
            .build()
            .unwrap();
        let p = StructuredPolynomial::combine(&[(rat(81, 121), &mk), (int(-1), &mk1)]).unwrap();
        assert_eq!(p.linear_coefficient("f_k"), Some(&rat(81, 121)));
        assert_eq!(p.linear_coefficient("f_k1"), Some(&int(-1)));
        assert_eq!(p.linear_coefficient("f_star"), Some(&rat(40, 121)));
    }

    #[test]
    fn combine_rejects_foreign_catalog() {
        let a = VarCatalog::new(["f"], ["x"]).unwrap();
        let b = VarCatalog::new(["f"], ["y"]).unwrap();
        let pa = StructuredPolynomial::zero(&a);
        let pb = StructuredPolynomial::zero(&b);
        assert!(matches!(
            StructuredPolynomial::combine(&[(int(1), &pa), (int(1), &pb)]),
            Err(PolyError::CatalogMismatch { .. })
        ));
        assert_eq!(StructuredPolynomial::combine(&[]).unwrap_err(), PolyError::EmptyCombination);
    }

    #[test]
    fn substitute_constant_step_update() {
        let cat = gd_catalog();
        let gamma = rat(1, 10);
        let d = VecExpr::var("x_k1") - VecExpr::var("x_star");
        let p = StructuredPolynomial::inner(&cat, &d, &d).unwrap();
        let repl = VecExpr::var("x_k") - &gamma * &VecExpr::var("g_k");
        let q = p.substitute_vector("x_k1", &repl).unwrap();
        assert!(q.catalog().vector_index("x_k1").is_none());
        let e = VecExpr::var("x_k") - VecExpr::var("x_star");
        let expected = StructuredPolynomial::builder(q.catalog())
            .norm_sq(int(1), &e)
            .inner(-int(2) * &gamma, &VecExpr::var("g_k"), &e)
            .norm_sq(&gamma * &gamma, &VecExpr::var("g_k"))
            .build()
            .unwrap();
        assert_eq!(q, expected);
    }

    #[test]
    fn substitute_zero_gradient() {
        let cat = VarCatalog::new(["f_k"], ["g_star", "g_k"]).unwrap();
        let d = VecExpr::var("g_k") - VecExpr::var("g_star");
        let p = StructuredPolynomial::inner(&cat, &d, &d).unwrap();
        let q = p.substitute_vector("g_star", &VecExpr::zero()).unwrap();
        assert_eq!(q.coefficients(), vec![(CoefficientKey::pair("g_k", "g_k"), int(1))]);
    }

    #[test]
    fn substitute_proximal_update() {
        let cat = VarCatalog::new(Vec::<String>::new(), ["x_k", "x_k1", "r_k", "sbar_k1"]).unwrap();
        let gamma = rat(1, 10);
        let p = StructuredPolynomial::inner(
            &cat,
            &VecExpr::var("sbar_k1"),
            &(VecExpr::var("x_k") - VecExpr::var("x_k1")),
        )
        .unwrap();
        let repl = VecExpr::var("x_k") - &gamma * &(VecExpr::var("r_k") + VecExpr::var("sbar_k1"));
        let q = p.substitute_vector("x_k1", &repl).unwrap();
        let expected = StructuredPolynomial::builder(q.catalog())
            .inner(gamma.clone(), &VecExpr::var("sbar_k1"), &VecExpr::var("r_k"))
            .inner(gamma, &VecExpr::var("sbar_k1"), &VecExpr::var("sbar_k1"))
            .build()
            .unwrap();
        assert_eq!(q, expected);
    }

    #[test]
    fn substitute_rejects_self_reference() {
        let cat = gd_catalog();
        let p = StructuredPolynomial::zero(&cat);
        assert_eq!(
            p.substitute_vector("x_k1", &(VecExpr::var("x_k1") + VecExpr::var("g_k"))).unwrap_err(),
            PolyError::SelfReferentialSubstitution("x_k1".into())
        );
    }

    #[test]
    fn expand_univariate_simple_cases() {
        let cat = gd_catalog();
        let p = StructuredPolynomial::inner(&cat, &VecExpr::var("g_k"), &VecExpr::var("g_k1")).unwrap();
        let m = p.expand_univariate();
        assert_eq!(m.len(), 1);
        assert_eq!(m[&Monomial::product("g_k", "g_k1")], int(1));
        let q = StructuredPolynomial::builder(&cat)
            .scalar("f_k", int(1))
            .scalar("f_star", int(-1))
            .build()
            .unwrap();
        let m = q.expand_univariate();
        assert_eq!(m[&Monomial::Linear("f_k".into())], int(1));
        assert_eq!(m[&Monomial::Linear("f_star".into())], int(-1));
    }

    #[test]
    fn evaluate_distance() {
        let cat = gd_catalog();
        let d = VecExpr::var("x_k") - VecExpr::var("x_star");
        let p = StructuredPolynomial::inner(&cat, &d, &d).unwrap();
        let mut a = Assignment::new();
        for s in cat.scalars() {
            a = a.scalar(s, int(0));
        }
        for v in cat.vectors() {
            a = a.vector(v, vec![int(0), int(0)]);
        }
        a = a.vector("x_k", vec![int(3), int(4)]);
        assert_eq!(p.evaluate(&a).unwrap(), int(25));
        assert_eq!(StructuredPolynomial::zero(&cat).evaluate(&a).unwrap(), int(0));

        let mut bad = a.clone();
        bad.vectors.insert("g_k".into(), vec![int(1)]);
        assert!(matches!(p.evaluate(&bad), Err(PolyError::DimensionMismatch { .. })));
        let mut missing = a;
        missing.scalars.remove("f_k");
        assert_eq!(p.evaluate(&missing).unwrap_err(), PolyError::MissingAssignment("f_k".into()));
    }

    #[test]
    fn text_round_trip() {
        let cat = gd_catalog();
        let p = StructuredPolynomial::builder(&cat)
            .scalar("f_k", rat(81, 121))
            .inner(int(1), &VecExpr::var("g_k"), &VecExpr::var("g_k1"))
            .norm_sq(rat(-1, 3), &(VecExpr::var("x_k") - VecExpr::var("x_star")))
            .build()
            .unwrap();
        let text = p.to_text();
        assert!(text.contains("scalar f_k 81/121\n"));
        assert!(text.contains("pair g_k:g_k1 1/1\n"));
        assert!(text.contains("constant - 0/1\n"));
        assert_eq!(StructuredPolynomial::from_text(&text).unwrap(), p);
    }
}
