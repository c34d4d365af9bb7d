//! Truncated multivariate formal power series.
//!
//! A [`Series`] stores the monomials of total degree at most `trunc` over a
//! named, ordered variable list. Truncation is applied eagerly: every
//! operation returns a series whose `trunc` is an honest bound on the degrees
//! it knows exactly.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar, Tolerance};

/// Ordered list of variable names, shared between series.
#[derive(Clone)]
pub struct Vars(Arc<Vec<String>>);

impl Vars {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        Vars(Arc::new(names.iter().map(|s| s.as_ref().to_string()).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.0
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    fn joined(&self) -> String {
        self.0.join(" ")
    }
}

impl PartialEq for Vars {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Vars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.joined())
    }
}

/// Exponent vector. Ordered graded-lexicographically: by total degree, then
/// with higher powers of earlier variables first.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub SmallVec<[u16; 8]>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize, power: u16) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = power;
        m
    }

    pub fn from_slice(e: &[u16]) -> Self {
        Mono(SmallVec::from_slice(e))
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.0[i]
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(o.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn display(&self, vars: &Vars) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    vars.name(i).to_string()
                } else {
                    format!("{}^{}", vars.name(i), e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors in `nvars` variables with total degree in `lo..=hi`,
/// in graded-lex order.
pub fn monomials(nvars: usize, lo: u32, hi: u32) -> Vec<Mono> {
    fn rec(nvars: usize, i: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Mono>) {
        if i + 1 == nvars {
            cur.push(left as u16);
            out.push(Mono::from_slice(cur));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e as u16);
            rec(nvars, i + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if lo == 0 {
            out.push(Mono::one(0));
        }
        return out;
    }
    for d in lo..=hi {
        rec(nvars, 0, d, &mut Vec::with_capacity(nvars), &mut out);
    }
    out
}

/// A multivariate power series truncated at total degree `trunc`.
#[derive(Clone)]
pub struct Series<C: Scalar> {
    vars: Vars,
    trunc: u32,
    terms: BTreeMap<Mono, C>,
    tol: Tolerance,
}

impl<C: Scalar> PartialEq for Series<C> {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.trunc == other.trunc && self.terms == other.terms
    }
}

impl<C: Scalar> fmt::Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({})", self, self.trunc + 1)
    }
}

impl<C: Scalar> fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{:?}*{}", c, m.display(&self.vars)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Scalar> Series<C> {
    pub fn zero(vars: &Vars, trunc: u32) -> Self {
        Series {
            vars: vars.clone(),
            trunc,
            terms: BTreeMap::new(),
            tol: Tolerance::default(),
        }
    }

    pub fn constant(vars: &Vars, trunc: u32, c: C) -> Self {
        let mut s = Self::zero(vars, trunc);
        s.add_term(Mono::one(vars.len()), c);
        s
    }

    pub fn one(vars: &Vars, trunc: u32) -> Self {
        Self::constant(vars, trunc, C::one())
    }

    /// The series consisting of the single variable `vars[i]`.
    pub fn var(vars: &Vars, i: usize, trunc: u32) -> Self {
        Self::monomial(vars, trunc, Mono::var(vars.len(), i, 1), C::one())
    }

    pub fn var_named(vars: &Vars, name: &str, trunc: u32) -> Result<Self> {
        Ok(Self::var(vars, vars.index(name)?, trunc))
    }

    pub fn monomial(vars: &Vars, trunc: u32, m: Mono, c: C) -> Self {
        let mut s = Self::zero(vars, trunc);
        s.add_term(m, c);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, C)>>(vars: &Vars, trunc: u32, terms: I) -> Self {
        let mut s = Self::zero(vars, trunc);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self.prune();
        self
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeff_of(&self, exps: &[u16]) -> C {
        self.coeff(&Mono::from_slice(exps))
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Mono::one(self.nvars()))
    }

    /// Adds `c·m` in place, dropping it if beyond `trunc`.
    pub fn add_term(&mut self, m: Mono, c: C) {
        if m.degree() > self.trunc {
            return;
        }
        let tol = self.tol;
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.add(&c);
                if v.is_negligible(tol) {
                    self.terms.remove(&m);
                }
            }
            None => {
                if !c.is_negligible(tol) {
                    self.terms.insert(m, c);
                }
            }
        }
    }

    fn prune(&mut self) {
        let tol = self.tol;
        let trunc = self.trunc;
        self.terms
            .retain(|m, c| m.degree() <= trunc && !c.is_negligible(tol));
    }

    fn from_map(vars: &Vars, trunc: u32, tol: Tolerance, map: HashMap<Mono, C>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(m, c)| m.degree() <= trunc && !c.is_negligible(tol))
            .collect();
        Series {
            vars: vars.clone(),
            trunc,
            terms,
            tol,
        }
    }

    fn same_vars(&self, o: &Self) -> Result<()> {
        if self.vars == o.vars {
            Ok(())
        } else {
            Err(Error::IncompatibleVars {
                left: self.vars.joined(),
                right: o.vars.joined(),
            })
        }
    }

    fn join_tol(&self, o: &Self) -> Tolerance {
        Tolerance {
            cmp: self.tol.cmp.max(o.tol.cmp),
        }
    }

    /// Restricts to total degree `≤ k`; a no-op when `k ≥ trunc`.
    pub fn truncate(&self, k: u32) -> Self {
        if k >= self.trunc {
            return self.clone();
        }
        let mut s = self.clone();
        s.trunc = k;
        s.prune();
        s
    }

    /// Least total degree of a stored term, `None` for the zero series.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    /// Least exponent of variable `i` among stored terms.
    pub fn valuation_in(&self, i: usize) -> Option<u16> {
        self.terms.keys().map(|m| m.exp(i)).min()
    }

    pub fn max_degree_in(&self, i: usize) -> u16 {
        self.terms.keys().map(|m| m.exp(i)).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    /// Lowest term in graded-lex order, rendered for reports.
    pub fn first_term(&self) -> Option<(Mono, C)> {
        self.terms.iter().next().map(|(m, c)| (m.clone(), c.clone()))
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self> {
        self.same_vars(o)?;
        let trunc = self.trunc.min(o.trunc);
        let tol = self.join_tol(o);
        let mut s = Series {
            vars: self.vars.clone(),
            trunc,
            terms: self.terms.clone(),
            tol,
        };
        s.prune();
        for (m, c) in &o.terms {
            s.add_term(m.clone(), c.clone());
        }
        Ok(s)
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self> {
        self.checked_add(&o.neg_series())
    }

    fn neg_series(&self) -> Self {
        Series {
            vars: self.vars.clone(),
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
            tol: self.tol,
        }
    }

    fn mul_into(&self, o: &Self, trunc: u32) -> Self {
        let tol = self.join_tol(o);
        let mut acc: HashMap<Mono, C> = HashMap::new();
        let rhs: Vec<(&Mono, &C, u32)> = o.terms.iter().map(|(m, c)| (m, c, m.degree())).collect();
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > trunc {
                break;
            }
            for &(mb, cb, db) in &rhs {
                if da + db > trunc {
                    break;
                }
                let m = ma.mul(mb);
                let prod = ca.mul(cb);
                match acc.get_mut(&m) {
                    Some(v) => *v = v.add(&prod),
                    None => {
                        acc.insert(m, prod);
                    }
                }
            }
        }
        Self::from_map(&self.vars, trunc, tol, acc)
    }

    /// Cauchy product truncated at the smaller of the two truncation orders.
    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        self.same_vars(o)?;
        Ok(self.mul_into(o, self.trunc.min(o.trunc)))
    }

    /// Product whose truncation order is the order to which the product is
    /// actually known: `min(a.trunc + val(b), b.trunc + val(a))`, capped.
    pub fn mul_tracked(&self, o: &Self, cap: u32) -> Self {
        let big = u32::MAX / 4;
        let va = self.valuation().unwrap_or(big);
        let vb = o.valuation().unwrap_or(big);
        let t = (self.trunc.saturating_add(vb))
            .min(o.trunc.saturating_add(va))
            .min(cap);
        let mut a = self.clone();
        a.trunc = t;
        let mut b = o.clone();
        b.trunc = t;
        a.mul_into(&b, t)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut s = Series {
            vars: self.vars.clone(),
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v.mul(c))).collect(),
            tol: self.tol,
        };
        s.prune();
        s
    }

    /// Multiplies by `c·m`; the product is exact, so `trunc` grows by `deg m`.
    pub fn mul_monomial(&self, m: &Mono, c: &C) -> Self {
        let mut s = Series {
            vars: self.vars.clone(),
            trunc: self.trunc + m.degree(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.mul(m), v.mul(c)))
                .collect(),
            tol: self.tol,
        };
        s.prune();
        s
    }

    pub fn mul_var_power(&self, i: usize, k: u16) -> Self {
        self.mul_monomial(&Mono::var(self.nvars(), i, k), &C::one())
    }

    /// Exact division by `vars[i]^k`; `trunc` drops by `k`.
    pub fn div_var_power(&self, i: usize, k: u16) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.exp(i) < k {
                return Err(Error::NotDivisible {
                    var: self.vars.name(i).to_string(),
                    power: k as u32,
                    monomial: m.display(&self.vars),
                });
            }
            let mut q = m.clone();
            q.0[i] -= k;
            terms.insert(q, c.clone());
        }
        Ok(Series {
            vars: self.vars.clone(),
            trunc: self.trunc.saturating_sub(k as u32),
            terms,
            tol: self.tol,
        })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(&self.vars, self.trunc).with_tol(self.tol);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_into(&base, self.trunc);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_into(&base, self.trunc);
            }
        }
        result
    }

    /// Coefficientwise complex conjugate; variables unchanged.
    pub fn conj(&self) -> Self {
        Series {
            vars: self.vars.clone(),
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
            tol: self.tol,
        }
    }

    /// Conjugates coefficients and permutes exponents: the exponent of
    /// variable `i` moves to variable `perm[i]`.
    pub fn conj_permuted(&self, perm: &[usize]) -> Self {
        Series {
            vars: self.vars.clone(),
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = Mono::one(self.nvars());
                    for (i, &p) in perm.iter().enumerate() {
                        e.0[p] = m.0[i];
                    }
                    (e, c.conj())
                })
                .collect(),
            tol: self.tol,
        }
    }

    /// k-th partial derivative in variable `i`; `trunc` drops by `k`.
    pub fn partial(&self, i: usize, k: u16) -> Self {
        let mut s = Self::zero(&self.vars, self.trunc.saturating_sub(k as u32)).with_tol(self.tol);
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e < k {
                continue;
            }
            let mut f: i64 = 1;
            for j in 0..k {
                f *= (e - j) as i64;
            }
            let mut q = m.clone();
            q.0[i] -= k;
            s.add_term(q, c.mul(&C::from_i64(f)));
        }
        s
    }

    /// Sets variable `i` to zero.
    pub fn at_zero(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.terms.retain(|m, _| m.exp(i) == 0);
        s
    }

    /// Coefficient of `vars[i]^k`, as a series in the same variables with
    /// exponent of `i` cleared. `trunc` drops by `k`.
    pub fn coeff_in(&self, i: usize, k: u16) -> Self {
        let mut s = Self::zero(&self.vars, self.trunc.saturating_sub(k as u32)).with_tol(self.tol);
        for (m, c) in &self.terms {
            if m.exp(i) == k {
                let mut q = m.clone();
                q.0[i] = 0;
                s.add_term(q, c.clone());
            }
        }
        s
    }

    /// Re-expresses the series over `target`, sending variable `i` to
    /// `target[map[i]]`.
    pub fn embed(&self, target: &Vars, map: &[usize]) -> Self {
        let n = target.len();
        Series {
            vars: target.clone(),
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = Mono::one(n);
                    for (i, &t) in map.iter().enumerate() {
                        e.0[t] += m.0[i];
                    }
                    (e, c.clone())
                })
                .collect(),
            tol: self.tol,
        }
    }

    /// Re-expresses over `target` by matching variable names; every variable
    /// of `self` must occur in `target`.
    pub fn embed_by_name(&self, target: &Vars) -> Result<Self> {
        let map: Result<Vec<usize>> = self.vars.names().iter().map(|n| target.index(n)).collect();
        Ok(self.embed(target, &map?))
    }

    /// Drops variables that do not occur, re-expressing over `target`.
    /// Fails if a dropped variable appears in some term.
    pub fn restrict_vars(&self, target: &Vars) -> Result<Self> {
        let mut map = Vec::with_capacity(self.nvars());
        for (i, name) in self.vars.names().iter().enumerate() {
            match target.index(name) {
                Ok(t) => map.push(Some(t)),
                Err(_) => {
                    if self.terms.keys().any(|m| m.exp(i) > 0) {
                        return Err(Error::Invalid(format!(
                            "variable `{name}` still present when restricting"
                        )));
                    }
                    map.push(None);
                }
            }
        }
        let n = target.len();
        Ok(Series {
            vars: target.clone(),
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = Mono::one(n);
                    for (i, t) in map.iter().enumerate() {
                        if let Some(t) = t {
                            e.0[*t] = m.0[i];
                        }
                    }
                    (e, c.clone())
                })
                .collect(),
            tol: self.tol,
        })
    }

    /// Formal composition: variable `i` of `self` is replaced by `images[i]`.
    ///
    /// Every image must have zero constant term. The result is truncated at
    /// the order to which it is determined by the known part of `self`.
    pub fn compose(&self, images: &[Series<C>]) -> Result<Self> {
        self.compose_impl(images, false)
    }

    /// Composition treating `self` as an exact polynomial, so images may have
    /// nonzero constant terms.
    pub fn compose_polynomial(&self, images: &[Series<C>]) -> Result<Self> {
        self.compose_impl(images, true)
    }

    fn compose_impl(&self, images: &[Series<C>], polynomial: bool) -> Result<Self> {
        if images.len() != self.nvars() {
            return Err(Error::SubstitutionArity {
                expected: self.nvars(),
                got: images.len(),
            });
        }
        let Some(first) = images.first() else {
            return Err(Error::Invalid("composition of a series in no variables".into()));
        };
        let target = first.vars.clone();
        let mut trunc = u32::MAX;
        let mut tol = self.tol;
        for img in images {
            first.same_vars(img)?;
            trunc = trunc.min(img.trunc);
            tol.cmp = tol.cmp.max(img.tol.cmp);
        }
        if !polynomial {
            let mut minval: Option<u32> = None;
            for (i, img) in images.iter().enumerate() {
                match img.valuation() {
                    Some(0) => {
                        return Err(Error::ConstantSubstitution {
                            var: self.vars.name(i).to_string(),
                        })
                    }
                    Some(v) => minval = Some(minval.map_or(v, |m: u32| m.min(v))),
                    None => {}
                }
            }
            if let Some(v) = minval {
                let known = (self.trunc as u64 + 1) * v as u64 - 1;
                trunc = trunc.min(known.min(u32::MAX as u64) as u32);
            }
        }
        let images: Vec<Series<C>> = images
            .iter()
            .map(|s| {
                let mut s = s.truncate(trunc);
                s.trunc = trunc;
                s
            })
            .collect();
        let mut powers: Vec<Vec<Series<C>>> = images
            .iter()
            .map(|s| vec![Series::one(&target, trunc).with_tol(tol), s.clone()])
            .collect();
        let terms: Vec<(&Mono, &C)> = self.terms.iter().collect();
        let out = horner(&terms, 0, &images, &mut powers, &target, trunc, tol);
        Ok(out)
    }

    /// Multiplicative inverse to `trunc`.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.constant_term();
        let inv0 = if c0.is_negligible(self.tol) {
            None
        } else {
            c0.inv()
        }
        .ok_or(Error::NotInvertible)?;
        let two = Series::constant(&self.vars, self.trunc, C::from_i64(2)).with_tol(self.tol);
        let mut g = Series::constant(&self.vars, self.trunc, inv0).with_tol(self.tol);
        let mut correct: u64 = 1;
        while correct <= self.trunc as u64 {
            let fg = self.mul_into(&g, self.trunc);
            g = g.mul_into(&(&two - &fg), self.trunc);
            correct *= 2;
        }
        Ok(g)
    }

    /// `(f)^(num/den)` for `f` with constant term 1, by the binomial series.
    pub fn pow_unit(&self, num: i64, den: i64) -> Result<Self> {
        let c0 = self.constant_term();
        if !c0.sub(&C::one()).is_negligible(self.tol) {
            return Err(Error::NotUnit {
                found: format!("{c0:?}"),
            });
        }
        let u = self - &Series::one(&self.vars, self.trunc);
        let mut out = Series::one(&self.vars, self.trunc).with_tol(self.tol);
        let mut coeff = C::one();
        let mut upow = Series::one(&self.vars, self.trunc).with_tol(self.tol);
        let Some(vu) = u.valuation() else {
            return Ok(out);
        };
        let mut k: i64 = 0;
        while (k as u64 + 1) * (vu as u64) <= self.trunc as u64 {
            coeff = coeff.mul(&C::from_ratio(num - k * den, (k + 1) * den));
            upow = upow.mul_into(&u, self.trunc);
            if upow.is_zero() {
                break;
            }
            out = &out + &upow.scale(&coeff);
            k += 1;
        }
        Ok(out)
    }

    /// Square root with value 1 at the origin.
    pub fn sqrt_unit(&self) -> Result<Self> {
        self.pow_unit(1, 2)
    }

    /// All coefficients of total degree `≤ k`, dense, in graded-lex order.
    pub fn jet(&self, k: u32) -> Result<Jet<C>> {
        if k > self.trunc {
            return Err(Error::JetOrder {
                order: k,
                trunc: self.trunc,
            });
        }
        let coeffs = monomials(self.nvars(), 0, k)
            .into_iter()
            .map(|m| {
                let c = self.coeff(&m);
                (m, c)
            })
            .collect();
        Ok(Jet {
            vars: self.vars.clone(),
            order: k,
            coeffs,
        })
    }

    /// Whether every coefficient is negligible under the series' tolerance
    /// (or an explicit one).
    pub fn is_negligible(&self, tol: Tolerance) -> bool {
        self.terms.values().all(|c| c.is_negligible(tol))
    }

    /// Lowest degree with a coefficient above `tol`.
    pub fn first_defect(&self, tol: Tolerance) -> Option<(Mono, C)> {
        self.terms
            .iter()
            .find(|(_, c)| !c.is_negligible(tol))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D, tol: Tolerance) -> Series<D> {
        let mut out = Series::<D>::zero(&self.vars, self.trunc).with_tol(tol);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Same terms and variables with a lowered truncation order.
    pub fn with_trunc(&self, trunc: u32) -> Self {
        let mut s = self.clone();
        s.trunc = trunc;
        s.prune();
        s
    }

    /// Parses a polynomial such as `tau + 2*i*z1*chi1 - 1/2*s^3`.
    pub fn poly(vars: &Vars, trunc: u32, text: &str) -> Result<Self> {
        parse_poly(vars, trunc, text)
    }
}

fn horner<C: Scalar>(
    terms: &[(&Mono, &C)],
    v: usize,
    images: &[Series<C>],
    powers: &mut Vec<Vec<Series<C>>>,
    target: &Vars,
    trunc: u32,
    tol: Tolerance,
) -> Series<C> {
    let mut out = Series::zero(target, trunc).with_tol(tol);
    if terms.is_empty() {
        return out;
    }
    if v == images.len() {
        let mut c = C::zero();
        for (_, t) in terms {
            c = c.add(t);
        }
        out.add_term(Mono::one(target.len()), c);
        return out;
    }
    let mut groups: BTreeMap<u16, Vec<(&Mono, &C)>> = BTreeMap::new();
    for &(m, c) in terms {
        groups.entry(m.exp(v)).or_default().push((m, c));
    }
    let last = v + 1 == images.len();
    for (e, group) in groups {
        let p = power(powers, images, v, e as usize, trunc);
        if p.is_zero() {
            continue;
        }
        if last {
            let mut c = C::zero();
            for (_, t) in &group {
                c = c.add(t);
            }
            for (m, pc) in &p.terms {
                out.add_term(m.clone(), pc.mul(&c));
            }
        } else {
            let inner = horner(&group, v + 1, images, powers, target, trunc, tol);
            if inner.is_zero() {
                continue;
            }
            let prod = if e == 0 {
                inner
            } else {
                inner.mul_into(&p, trunc)
            };
            for (m, c) in prod.terms {
                out.add_term(m, c);
            }
        }
    }
    out
}

fn power<C: Scalar>(
    powers: &mut [Vec<Series<C>>],
    images: &[Series<C>],
    v: usize,
    e: usize,
    trunc: u32,
) -> Series<C> {
    while powers[v].len() <= e {
        let next = powers[v].last().expect("power cache seeded").mul_into(&images[v], trunc);
        powers[v].push(next);
    }
    powers[v][e].clone()
}

/// Dense coefficient vector of all monomials up to a given degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<C: Scalar> {
    pub vars: Vars,
    pub order: u32,
    pub coeffs: Vec<(Mono, C)>,
}

impl<C: Scalar> Jet<C> {
    /// Nonzero entries only.
    pub fn support(&self) -> Vec<(Mono, C)> {
        self.coeffs
            .iter()
            .filter(|(_, c)| !c.is_zero_exact())
            .cloned()
            .collect()
    }

    pub fn approx_eq(&self, o: &Jet<C>, tol: Tolerance) -> bool {
        self.vars == o.vars
            && self.order == o.order
            && self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .all(|((_, a), (_, b))| a.sub(b).is_negligible(tol))
    }
}

impl<'a, C: Scalar> Add<&'a Series<C>> for &'a Series<C> {
    type Output = Series<C>;
    fn add(self, o: &'a Series<C>) -> Series<C> {
        self.checked_add(o).expect("series addition")
    }
}

impl<'a, C: Scalar> Sub<&'a Series<C>> for &'a Series<C> {
    type Output = Series<C>;
    fn sub(self, o: &'a Series<C>) -> Series<C> {
        self.checked_sub(o).expect("series subtraction")
    }
}

impl<'a, C: Scalar> Mul<&'a Series<C>> for &'a Series<C> {
    type Output = Series<C>;
    fn mul(self, o: &'a Series<C>) -> Series<C> {
        self.checked_mul(o).expect("series multiplication")
    }
}

impl<C: Scalar> Neg for &Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        self.neg_series()
    }
}

/// Solves `F(x, y) = 0` for `y = y(x)` with `y(0) = 0`, where `y` is variable
/// `yvar` of `F`. The result lives in the remaining variables of `F`.
///
/// Newton iteration on series; each step at least doubles the order of the
/// residual, so the loop stops after about `log2(trunc)` rounds.
pub fn implicit_solve<C: Scalar>(f: &Series<C>, yvar: usize) -> Result<Series<C>> {
    let tol = f.tol;
    if !f.constant_term().is_negligible(tol) {
        return Err(Error::DegenerateImplicit("F(0) ≠ 0".into()));
    }
    let dy0 = f.coeff(&Mono::var(f.nvars(), yvar, 1));
    if dy0.is_negligible(tol) {
        return Err(Error::DegenerateImplicit(format!(
            "∂F/∂{}(0) = 0",
            f.vars.name(yvar)
        )));
    }
    let xnames: Vec<String> = f
        .vars
        .names()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != yvar)
        .map(|(_, n)| n.clone())
        .collect();
    let xvars = Vars::new(&xnames);
    let trunc = f.trunc;
    let images_with = |y: &Series<C>| -> Vec<Series<C>> {
        let mut out = Vec::with_capacity(f.nvars());
        let mut k = 0;
        for i in 0..f.nvars() {
            if i == yvar {
                out.push(y.clone());
            } else {
                out.push(Series::var(&xvars, k, trunc).with_tol(tol));
                k += 1;
            }
        }
        out
    };
    // Floating residuals bottom out at roundoff relative to the coefficients.
    let fscale = f.max_abs_coeff().max(1.0);
    let settled = |r: &Series<C>, y: &Series<C>| {
        r.is_zero()
            || (C::BACKEND == Backend::Float && r.max_abs_coeff() <= tol.cmp * fscale.max(y.max_abs_coeff()))
    };
    let fy = f.partial(yvar, 1);
    let mut y = Series::zero(&xvars, trunc).with_tol(tol);
    let max_iter = trunc as usize + 3;
    for _ in 0..max_iter {
        let r = f.compose(&images_with(&y))?;
        if settled(&r, &y) {
            return Ok(y);
        }
        let d = fy.compose(&images_with(&y))?;
        let step = r.mul_tracked(&d.reciprocal()?, trunc);
        y = &y - &step.with_trunc(trunc);
        y.trunc = trunc;
    }
    let r = f.compose(&images_with(&y))?;
    if settled(&r, &y) {
        Ok(y)
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
        })
    }
}

/// A series in real coordinates, paired with the involution on variables
/// (e.g. `z_j ↔ z̄_j`, `s ↔ s`) that defines its formal conjugate.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSeries<C: Scalar> {
    pub series: Series<C>,
    pub pairing: Vec<usize>,
}

impl<C: Scalar> RealSeries<C> {
    pub fn new(series: Series<C>, pairing: Vec<usize>) -> Self {
        RealSeries { series, pairing }
    }

    /// Conjugated coefficients with variables swapped under the pairing.
    pub fn formal_conj(&self) -> Self {
        RealSeries {
            series: self.series.conj_permuted(&self.pairing),
            pairing: self.pairing.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        let d = &self.series - &self.formal_conj().series;
        d.is_zero()
    }
}

fn parse_poly<C: Scalar>(vars: &Vars, trunc: u32, text: &str) -> Result<Series<C>> {
    let err = |msg: String| Error::Parse { line: 0, msg };
    let mut out = Series::zero(vars, trunc);
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() || cleaned == "0" {
        return Ok(out);
    }
    // split into signed terms
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    for (k, ch) in cleaned.chars().enumerate() {
        if (ch == '+' || ch == '-') && k > 0 && !cur.ends_with('e') {
            terms.push((neg, std::mem::take(&mut cur)));
            neg = ch == '-';
        } else if (ch == '+' || ch == '-') && k == 0 {
            neg = ch == '-';
        } else {
            cur.push(ch);
        }
    }
    terms.push((neg, cur));
    for (neg, term) in terms {
        if term.is_empty() {
            return Err(err(format!("empty term in `{text}`")));
        }
        let mut c = if neg { C::from_i64(-1) } else { C::one() };
        let mut m = Mono::one(vars.len());
        for factor in term.split('*') {
            if factor == "i" {
                c = c.mul(&C::imag_unit());
            } else if factor.chars().next().is_some_and(|ch| ch.is_ascii_digit()) {
                let v = C::parse_text(factor, "0").map_err(err)?;
                c = c.mul(&v);
            } else {
                let (name, p) = match factor.split_once('^') {
                    Some((n, p)) => (
                        n,
                        p.parse::<u16>()
                            .map_err(|_| err(format!("bad exponent in `{factor}`")))?,
                    ),
                    None => (factor, 1),
                };
                let i = vars.index(name)?;
                m.0[i] += p;
            }
        }
        out.add_term(m, c);
    }
    Ok(out)
}
