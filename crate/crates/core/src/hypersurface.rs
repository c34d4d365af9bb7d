//! Real hypersurface germs in complex form `w = Q(z, χ, τ)` and real-graph
//! form `Im w = φ(z, z̄, Re w)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::holomap::{map_vars, HoloMap};
use crate::scalar::{RealScalar, Scalar, Tolerance};
use crate::series::{implicit_solve, Mono, RealSeries, Series, Vars};
use crate::textfmt::{DocWriter, Document};

/// Variables `z1 … zn chi1 … chin tau`.
pub fn complex_vars(n: usize) -> Vars {
    let mut names: Vec<String> = (1..=n).map(|j| format!("z{j}")).collect();
    names.extend((1..=n).map(|j| format!("chi{j}")));
    names.push("tau".into());
    Vars::new(&names)
}

/// Variables `z1 … zn zb1 … zbn s`.
pub fn real_vars(n: usize) -> Vars {
    let mut names: Vec<String> = (1..=n).map(|j| format!("z{j}")).collect();
    names.extend((1..=n).map(|j| format!("zb{j}")));
    names.push("s".into());
    Vars::new(&names)
}

/// The involution `z_j ↔ z̄_j` (or `z_j ↔ χ_j`), fixing the last variable.
pub fn swap_pairing(n: usize) -> Vec<usize> {
    (0..2 * n + 1)
        .map(|i| if i < n { i + n } else if i < 2 * n { i - n } else { i })
        .collect()
}

fn fit_vars<C: Scalar>(s: Series<C>, target: &Vars) -> Result<Series<C>> {
    if s.vars() == target {
        Ok(s)
    } else {
        s.restrict_vars(target)
    }
}

/// `w = Q(z, χ, τ)` with `χ = z̄`, `τ = w̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexDefining<C: Scalar> {
    pub n: usize,
    pub q: Series<C>,
}

impl<C: Scalar> ComplexDefining<C> {
    pub fn new(n: usize, q: Series<C>) -> Result<Self> {
        Ok(ComplexDefining {
            n,
            q: fit_vars(q, &complex_vars(n))?,
        })
    }

    pub fn from_poly(n: usize, trunc: u32, text: &str) -> Result<Self> {
        Self::new(n, Series::poly(&complex_vars(n), trunc, text)?)
    }

    pub fn trunc(&self) -> u32 {
        self.q.trunc()
    }

    pub fn tol(&self) -> Tolerance {
        self.q.tol()
    }

    /// `Q̄(χ, z, τ)` expressed in the same variables.
    pub fn conj_swapped(&self) -> Series<C> {
        self.q.conj_permuted(&swap_pairing(self.n))
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D, tol: Tolerance) -> ComplexDefining<D> {
        ComplexDefining {
            n: self.n,
            q: self.q.map_coeffs(f, tol),
        }
    }
}

/// `Im w = φ(z, z̄, s)` with `s = Re w`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealGraph<C: Scalar> {
    pub n: usize,
    pub phi: RealSeries<C>,
}

impl<C: Scalar> RealGraph<C> {
    pub fn new(n: usize, phi: Series<C>) -> Result<Self> {
        let phi = fit_vars(phi, &real_vars(n))?;
        Ok(RealGraph {
            n,
            phi: RealSeries::new(phi, swap_pairing(n)),
        })
    }

    pub fn from_poly(n: usize, trunc: u32, text: &str) -> Result<Self> {
        Self::new(n, Series::poly(&real_vars(n), trunc, text)?)
    }

    pub fn series(&self) -> &Series<C> {
        &self.phi.series
    }

    pub fn trunc(&self) -> u32 {
        self.phi.series.trunc()
    }

    pub fn is_real(&self) -> bool {
        let d = &self.phi.series - &self.phi.formal_conj().series;
        d.is_negligible(self.phi.series.tol())
    }

    /// `φ(z, 0, s) = φ(0, z̄, s) = 0`.
    pub fn is_normal(&self) -> bool {
        let tol = self.phi.series.tol();
        let mut no_zb = self.phi.series.clone();
        let mut no_z = self.phi.series.clone();
        for j in 0..self.n {
            no_zb = no_zb.at_zero(self.n + j);
            no_z = no_z.at_zero(j);
        }
        no_zb.is_negligible(tol) && no_z.is_negligible(tol)
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D, tol: Tolerance) -> RealGraph<D> {
        RealGraph {
            n: self.n,
            phi: RealSeries::new(self.phi.series.map_coeffs(f, tol), self.phi.pairing.clone()),
        }
    }
}

/// One failed identity in a normality check.
#[derive(Clone, Debug, PartialEq)]
pub struct Defect {
    pub identity: &'static str,
    pub monomial: String,
    pub degree: u32,
    pub coeff: String,
}

/// Outcome of [`check_normal`]; all statements hold up to `trunc`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalReport {
    pub trunc: u32,
    pub defects: Vec<Defect>,
}

impl NormalReport {
    pub fn holds(&self) -> bool {
        self.defects.is_empty()
    }
}

impl fmt::Display for NormalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            return write!(f, "normal to order {}", self.trunc);
        }
        write!(f, "not normal to order {}:", self.trunc)?;
        for d in &self.defects {
            write!(f, " [{}: first defect {} at degree {} with coefficient {}]", d.identity, d.monomial, d.degree, d.coeff)?;
        }
        Ok(())
    }
}

fn defect<C: Scalar>(identity: &'static str, r: &Series<C>) -> Option<Defect> {
    r.first_defect(r.tol()).map(|(m, c)| Defect {
        identity,
        monomial: m.display(r.vars()),
        degree: m.degree(),
        coeff: c.fmt_text(),
    })
}

/// Checks `Q(z,0,τ) = τ`, `Q(0,χ,τ) = τ` and `Q(z, χ, Q̄(χ, z, w)) = w`.
pub fn check_normal<C: Scalar>(h: &ComplexDefining<C>) -> Result<NormalReport> {
    let n = h.n;
    let vars = h.q.vars().clone();
    let tau = Series::var(&vars, 2 * n, h.trunc()).with_tol(h.tol());
    let mut defects = Vec::new();

    let mut no_chi = h.q.clone();
    let mut no_z = h.q.clone();
    for j in 0..n {
        no_chi = no_chi.at_zero(n + j);
        no_z = no_z.at_zero(j);
    }
    defects.extend(defect("Q(z,0,tau) = tau", &(&no_chi - &tau)));
    defects.extend(defect("Q(0,chi,tau) = tau", &(&no_z - &tau)));

    let qbar = h.conj_swapped();
    if qbar.constant_term().is_negligible(h.tol()) {
        let mut imgs: Vec<Series<C>> = (0..2 * n).map(|i| Series::var(&vars, i, h.trunc()).with_tol(h.tol())).collect();
        imgs.push(qbar);
        let lhs = h.q.compose(&imgs)?;
        let tau = tau.with_trunc(lhs.trunc());
        defects.extend(defect("Q(z,chi,Qbar(chi,z,w)) = w", &(&lhs - &tau)));
    } else {
        defects.push(Defect {
            identity: "Q(0) = 0",
            monomial: "1".into(),
            degree: 0,
            coeff: qbar.constant_term().fmt_text(),
        });
    }
    Ok(NormalReport {
        trunc: h.trunc(),
        defects,
    })
}

/// Solves `w − τ − 2iφ(z, χ, (w+τ)/2) = 0` for `w = Q(z, χ, τ)`.
pub fn real_to_complex<C: Scalar>(g: &RealGraph<C>) -> Result<ComplexDefining<C>> {
    let n = g.n;
    let trunc = g.trunc();
    let tol = g.series().tol();
    let mut names: Vec<String> = complex_vars(n).names().to_vec();
    names.push("w".into());
    let v = Vars::new(&names);
    let var = |i| Series::var(&v, i, trunc).with_tol(tol);
    let half = C::from_ratio(1, 2);
    let s_img = (&var(2 * n) + &var(2 * n + 1)).scale(&half);
    let mut imgs: Vec<Series<C>> = (0..2 * n).map(var).collect();
    imgs.push(s_img);
    let phi_w = g.series().compose(&imgs)?;
    let two_i = C::imag_unit().mul(&C::from_i64(2));
    let f = &(&var(2 * n + 1) - &var(2 * n)) - &phi_w.scale(&two_i);
    let q = implicit_solve(&f, 2 * n + 1)?;
    ComplexDefining::new(n, q)
}

/// Solves `s + iu − Q(z, z̄, s − iu) = 0` for `u = φ(z, z̄, s)`.
pub fn complex_to_real<C: Scalar>(h: &ComplexDefining<C>) -> Result<RealGraph<C>> {
    let n = h.n;
    let trunc = h.trunc();
    let tol = h.tol();
    let mut names: Vec<String> = real_vars(n).names().to_vec();
    names.push("u".into());
    let v = Vars::new(&names);
    let var = |i| Series::var(&v, i, trunc).with_tol(tol);
    let i_unit = C::imag_unit();
    let mut imgs: Vec<Series<C>> = (0..2 * n).map(var).collect();
    imgs.push(&var(2 * n) - &var(2 * n + 1).scale(&i_unit));
    let q = h.q.compose(&imgs)?;
    let f = &(&var(2 * n) + &var(2 * n + 1).scale(&i_unit)) - &q;
    let phi = implicit_solve(&f, 2 * n + 1)?;
    RealGraph::new(n, phi)
}

/// `A(s) = φ_{z z̄}(0, s)`: entry `(j, k)` is the coefficient of `z_j z̄_k`,
/// as a series in the single variable `s`.
pub fn levi_matrix_along_axis<C: Scalar>(g: &RealGraph<C>) -> Result<Vec<Vec<Series<C>>>> {
    let n = g.n;
    let sv = Vars::new(&["s"]);
    let phi = g.series();
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = Vec::with_capacity(n);
        for k in 0..n {
            let mut d = phi.partial(j, 1).partial(n + k, 1);
            for i in 0..2 * n {
                d = d.at_zero(i);
            }
            row.push(d.restrict_vars(&sv)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Operational infinite-type order of a normal real graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeOrder {
    /// `φ(z, z̄, 0) ≢ 0`: not of infinite type.
    Minimal,
    /// `φ = s^m ψ(z, z̄) + O(s^{m+1})` with `ψ ≢ 0`.
    Infinite(u32),
}

impl fmt::Display for TypeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeOrder::Minimal => write!(f, "minimal"),
            TypeOrder::Infinite(m) => write!(f, "{m}-infinite type"),
        }
    }
}

/// The least power of `s` dividing `φ`. Only meaningful up to the
/// truncation order, which callers should report alongside.
pub fn infinite_type_order<C: Scalar>(g: &RealGraph<C>) -> Result<TypeOrder> {
    let s = 2 * g.n;
    match g.series().valuation_in(s) {
        None => Err(Error::FlatToTruncation { trunc: g.trunc() }),
        Some(0) => Ok(TypeOrder::Minimal),
        Some(m) => Ok(TypeOrder::Infinite(m as u32)),
    }
}

/// `Q = τ + τ^m i⟨z,χ⟩ + τ^{m+1} Θ` with `⟨z,χ⟩ = Σ ε_j z_j χ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodNonminimalForm<C: Scalar> {
    pub m: u32,
    pub epsilons: Vec<i8>,
    pub theta: Series<C>,
}

impl<C: Scalar> GoodNonminimalForm<C> {
    pub fn n(&self) -> usize {
        self.epsilons.len()
    }

    /// `i⟨z, χ⟩` in the complex variables.
    pub fn levi_term(&self, trunc: u32) -> Series<C> {
        let n = self.n();
        let v = complex_vars(n);
        let mut s = Series::zero(&v, trunc).with_tol(self.theta.tol());
        for (j, &e) in self.epsilons.iter().enumerate() {
            let mut m = Mono::one(2 * n + 1);
            m.0[j] = 1;
            m.0[n + j] = 1;
            s.add_term(m, C::imag_unit().mul(&C::from_i64(e as i64)));
        }
        s
    }

    pub fn reconstruct(&self) -> ComplexDefining<C> {
        let n = self.n();
        let trunc = self.theta.trunc() + self.m + 1;
        let v = complex_vars(n);
        let tau = Series::var(&v, 2 * n, trunc).with_tol(self.theta.tol());
        let lead = self.levi_term(trunc).mul_var_power(2 * n, self.m as u16).with_trunc(trunc);
        let tail = self.theta.mul_var_power(2 * n, self.m as u16 + 1);
        ComplexDefining {
            n,
            q: &(&tau + &lead) + &tail,
        }
    }
}

/// Splits `Q − τ = τ^m·K + τ^{m+1}Θ` where `m` is the τ-valuation.
fn tau_head<C: Scalar>(h: &ComplexDefining<C>) -> Option<(u32, Series<C>)> {
    let n = h.n;
    let tau = Series::var(h.q.vars(), 2 * n, h.trunc()).with_tol(h.tol());
    let p = &h.q - &tau;
    let m = p.valuation_in(2 * n)?;
    Some((m as u32, p.coeff_in(2 * n, m)))
}

/// Diagonal entries `i·r_j` of a coefficient that must be `i Σ r_j z_j χ_j`.
fn diagonal_levi<C: Scalar>(k: &Series<C>, n: usize) -> std::result::Result<Vec<C::Real>, String> {
    let tol = k.tol();
    let mut r: Vec<Option<C::Real>> = vec![None; n];
    for (m, c) in k.terms() {
        let pair = (0..n).find(|&j| m.exp(j) == 1 && m.exp(n + j) == 1 && m.degree() == 2);
        let Some(j) = pair else {
            return Err(format!("unexpected term {} in the leading τ-coefficient", m.display(k.vars())));
        };
        if !C::from_real(c.re()).is_negligible(tol) {
            return Err(format!("coefficient of {} is not purely imaginary", m.display(k.vars())));
        }
        r[j] = Some(c.im());
    }
    r.into_iter()
        .enumerate()
        .map(|(j, x)| x.ok_or_else(|| format!("z{0}·chi{0} is missing from the leading τ-coefficient", j + 1)))
        .collect()
}

/// Recognizes Def. 3.1 literally (no change of variables).
pub fn is_good_nonminimal<C: Scalar>(h: &ComplexDefining<C>) -> Option<GoodNonminimalForm<C>> {
    let n = h.n;
    let (m, k) = tau_head(h)?;
    if m == 0 {
        return None;
    }
    let r = diagonal_levi(&k, n).ok()?;
    let tol = h.tol();
    let mut eps = Vec::with_capacity(n);
    for x in &r {
        let e = if C::from_real(x.sub(&<C::Real as RealScalar>::one())).is_negligible(tol) {
            1
        } else if C::from_real(x.add(&<C::Real as RealScalar>::one())).is_negligible(tol) {
            -1
        } else {
            return None;
        };
        eps.push(e);
    }
    let form = GoodNonminimalForm {
        m,
        epsilons: eps,
        theta: Series::zero(h.q.vars(), 0),
    };
    let tau = Series::var(h.q.vars(), 2 * n, h.trunc()).with_tol(tol);
    let lead = form.levi_term(h.trunc()).mul_var_power(2 * n, m as u16).with_trunc(h.trunc());
    let rest = &(&h.q - &tau) - &lead;
    let theta = rest.div_var_power(2 * n, m as u16 + 1).ok()?;
    Some(GoodNonminimalForm { theta, ..form })
}

/// Rescales `z_j ↦ z_j / λ_j` with `|λ_j|² = 1/c_j` so that the leading
/// τ-coefficient `i Σ ε_j c_j z_j χ_j` becomes `i⟨z, χ⟩`. Returns the new
/// defining function, the change of coordinates `(z, w) ↦ (z', w')`, and
/// the recognized form.
pub fn normalize_good<C: Scalar>(
    h: &ComplexDefining<C>,
) -> Result<(ComplexDefining<C>, HoloMap<C>, GoodNonminimalForm<C>)> {
    let n = h.n;
    let (m, k) = tau_head(h).ok_or_else(|| Error::NotGoodShape("Q = τ identically".into()))?;
    if m == 0 {
        return Err(Error::NotGoodShape("leading term is not divisible by τ (minimal type)".into()));
    }
    let r = diagonal_levi(&k, n).map_err(Error::NotGoodShape)?;
    let tol = h.tol();
    let mut lambdas = Vec::with_capacity(n);
    for (j, x) in r.iter().enumerate() {
        let sign = x.signum_tol(tol.cmp);
        if sign == 0 {
            return Err(Error::NotGoodShape(format!("Levi entry {} vanishes", j + 1)));
        }
        let c = if sign < 0 { x.neg() } else { x.clone() };
        let q = c
            .inv()
            .ok_or_else(|| Error::NotGoodShape(format!("Levi entry {} vanishes", j + 1)))?;
        let lam = C::norm_root(&q).ok_or_else(|| {
            Error::NeedsFloatBackend(format!("no scalar λ with |λ|² = 1/c for Levi entry {}", j + 1))
        })?;
        lambdas.push(lam);
    }
    let v = h.q.vars().clone();
    let trunc = h.trunc();
    let mut imgs = Vec::with_capacity(2 * n + 1);
    for (j, lam) in lambdas.iter().enumerate() {
        imgs.push(Series::var(&v, j, trunc).with_tol(tol).scale(lam));
    }
    for (j, lam) in lambdas.iter().enumerate() {
        imgs.push(Series::var(&v, n + j, trunc).with_tol(tol).scale(&lam.conj()));
    }
    imgs.push(Series::var(&v, 2 * n, trunc).with_tol(tol));
    let q = h.q.compose(&imgs)?;
    let out = ComplexDefining { n, q };
    let form = is_good_nonminimal(&out)
        .ok_or_else(|| Error::NotGoodShape("rescaled defining function is still not good".into()))?;
    let mv = map_vars(n);
    let f = lambdas
        .iter()
        .enumerate()
        .map(|(j, lam)| {
            let inv = lam.inv().expect("λ is nonzero");
            Series::var(&mv, j, trunc).with_tol(tol).scale(&inv)
        })
        .collect();
    let change = HoloMap::new(f, Series::var(&mv, n, trunc).with_tol(tol))?;
    Ok((out, change, form))
}

/// Components of `H` in `(z, χ, τ, w)`: `F(z, w)`, `G(z, w)` and the
/// conjugates `F̄(χ, τ)`, `Ḡ(χ, τ)`.
fn spread<C: Scalar>(h: &HoloMap<C>, v: &Vars) -> (Vec<Series<C>>, Vec<Series<C>>) {
    let n = h.n();
    let mut hol: Vec<usize> = (0..n).collect();
    hol.push(2 * n + 1);
    let mut anti: Vec<usize> = (n..2 * n).collect();
    anti.push(2 * n);
    let comps = h.components();
    (
        comps.iter().map(|c| c.embed(v, &hol)).collect(),
        comps.iter().map(|c| c.conj().embed(v, &anti)).collect(),
    )
}

fn with_w(n: usize) -> Vars {
    let mut names: Vec<String> = complex_vars(n).names().to_vec();
    names.push("w".into());
    Vars::new(&names)
}

/// `G(z, Q_src) − Q_dst(F(z, Q_src), F̄(χ, τ), Ḡ(χ, τ))`: vanishes to the
/// returned truncation order iff `H` maps the source into the target.
pub fn maps_into<C: Scalar>(h: &HoloMap<C>, src: &ComplexDefining<C>, dst: &ComplexDefining<C>) -> Result<Series<C>> {
    let n = src.n;
    if h.n() != n || dst.n != n {
        return Err(Error::Invalid("dimension mismatch between map and hypersurfaces".into()));
    }
    let v = with_w(n);
    let (hol, anti) = spread(h, &v);
    // substitute w = Q_src(z, χ, τ)
    let cv = complex_vars(n);
    let mut sub: Vec<Series<C>> = (0..=2 * n).map(|i| Series::var(&cv, i, src.trunc()).with_tol(src.tol())).collect();
    sub.push(src.q.clone());
    let mut imgs = Vec::with_capacity(2 * n + 1);
    for c in hol.iter().take(n) {
        imgs.push(c.compose(&sub)?);
    }
    for c in anti.iter().take(n) {
        imgs.push(c.compose(&sub)?);
    }
    imgs.push(anti[n].compose(&sub)?);
    let lhs = hol[n].compose(&sub)?;
    let rhs = dst.q.compose(&imgs)?;
    Ok(&lhs - &rhs)
}

/// Lowest degree where [`maps_into`] fails, `None` if it holds to truncation.
pub fn first_defect_order<C: Scalar>(h: &HoloMap<C>, src: &ComplexDefining<C>, dst: &ComplexDefining<C>) -> Result<Option<u32>> {
    let r = maps_into(h, src, dst)?;
    Ok(r.first_defect(r.tol()).map(|(m, _)| m.degree()))
}

/// The defining function of `H^{-1}(M')` for a change of coordinates `H`
/// (new coordinates to old), by solving
/// `G(z, w) = Q'(F(z, w), F̄(χ, τ), Ḡ(χ, τ))` for `w`.
pub fn pull_back<C: Scalar>(h: &HoloMap<C>, target: &ComplexDefining<C>) -> Result<ComplexDefining<C>> {
    let n = target.n;
    let v = with_w(n);
    let (hol, anti) = spread(h, &v);
    let mut imgs: Vec<Series<C>> = hol.iter().take(n).cloned().collect();
    imgs.extend(anti.iter().cloned());
    let rhs = target.q.compose(&imgs)?;
    let f = &hol[n] - &rhs;
    let trunc = target.trunc().min(h.trunc());
    let q = implicit_solve(&f.with_trunc(trunc), 2 * n + 1)?;
    ComplexDefining::new(n, q)
}

/// Either form of a hypersurface as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum Hypersurface<C: Scalar> {
    Complex(ComplexDefining<C>),
    Real(RealGraph<C>),
}

impl<C: Scalar> Hypersurface<C> {
    pub fn n(&self) -> usize {
        match self {
            Hypersurface::Complex(h) => h.n,
            Hypersurface::Real(g) => g.n,
        }
    }

    /// Reads `n:`, optional `trunc:` and a `Q:` or `phi:` block. A `trunc:`
    /// header lower than the block's own truncation order lowers it.
    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let n: usize = doc
            .header_parsed("n")?
            .ok_or_else(|| Error::Invalid("missing `n:` header".into()))?;
        let trunc: Option<u32> = doc.header_parsed("trunc")?;
        let clip = |s: Series<C>| match trunc {
            Some(t) if t < s.trunc() => s.with_trunc(t),
            _ => s,
        };
        match (doc.series::<C>("Q")?, doc.series::<C>("phi")?) {
            (Some(q), None) => Ok(Hypersurface::Complex(ComplexDefining::new(n, clip(q))?)),
            (None, Some(p)) => Ok(Hypersurface::Real(RealGraph::new(n, clip(p))?)),
            (Some(_), Some(_)) => Err(Error::Invalid("file holds both `Q:` and `phi:`".into())),
            (None, None) => Err(Error::Invalid("file holds neither `Q:` nor `phi:`".into())),
        }
    }

    pub fn to_text(&self) -> String {
        let mut w = DocWriter::new();
        w.header("n", self.n());
        match self {
            Hypersurface::Complex(h) => {
                w.header("trunc", h.trunc()).series("Q", &h.q);
            }
            Hypersurface::Real(g) => {
                w.header("trunc", g.trunc()).series("phi", g.series());
            }
        }
        w.finish()
    }

    pub fn complex(&self) -> Result<ComplexDefining<C>> {
        match self {
            Hypersurface::Complex(h) => Ok(h.clone()),
            Hypersurface::Real(g) => real_to_complex(g),
        }
    }

    pub fn real(&self) -> Result<RealGraph<C>> {
        match self {
            Hypersurface::Complex(h) => complex_to_real(h),
            Hypersurface::Real(g) => Ok(g.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    type Q = ComplexDefining<GaussRat>;
    type G = RealGraph<GaussRat>;

    #[test]
    fn check_normal_examples() {
        assert!(check_normal(&Q::from_poly(1, 6, "tau").unwrap()).unwrap().holds());
        assert!(check_normal(&Q::from_poly(1, 6, "tau + 2*i*z1*chi1").unwrap()).unwrap().holds());
        let bad = check_normal(&Q::from_poly(1, 6, "tau + z1*chi1").unwrap()).unwrap();
        assert!(!bad.holds());
        // the reality identity leaves 2zχ
        let d = &bad.defects[0];
        assert_eq!(d.identity, "Q(z,chi,Qbar(chi,z,w)) = w");
        assert_eq!((d.monomial.as_str(), d.coeff.as_str()), ("z1*chi1", "2 0"));
    }

    #[test]
    fn heisenberg_conversions() {
        let g = G::from_poly(1, 6, "z1*zb1").unwrap();
        let h = real_to_complex(&g).unwrap();
        assert_eq!(h, Q::from_poly(1, 6, "tau + 2*i*z1*chi1").unwrap());
        assert_eq!(complex_to_real(&h).unwrap(), g);
        let flat = G::from_poly(1, 6, "0").unwrap();
        assert_eq!(real_to_complex(&flat).unwrap(), Q::from_poly(1, 6, "tau").unwrap());
    }

    #[test]
    fn levi_matrix_examples() {
        let g = G::from_poly(2, 6, "s*z1*zb1 - s^3*z2*zb2").unwrap();
        let a = levi_matrix_along_axis(&g).unwrap();
        let sv = Vars::new(&["s"]);
        assert_eq!(a[0][0], Series::poly(&sv, 4, "s").unwrap());
        assert_eq!(a[1][1], Series::poly(&sv, 4, "-s^3").unwrap());
        assert!(a[0][1].is_zero() && a[1][0].is_zero());
    }

    #[test]
    fn type_order_examples() {
        assert_eq!(infinite_type_order(&G::from_poly(1, 6, "z1*zb1").unwrap()).unwrap(), TypeOrder::Minimal);
        assert_eq!(
            infinite_type_order(&G::from_poly(1, 6, "s*z1*zb1").unwrap()).unwrap(),
            TypeOrder::Infinite(1)
        );
        assert_eq!(
            infinite_type_order(&G::from_poly(1, 12, "1/2*s^9*z1*zb1 + s^10*z1^2*zb1").unwrap()).unwrap(),
            TypeOrder::Infinite(9)
        );
        assert!(matches!(
            infinite_type_order(&G::from_poly(1, 6, "0").unwrap()),
            Err(Error::FlatToTruncation { trunc: 6 })
        ));
    }

    #[test]
    fn good_nonminimal_recognition() {
        let h = Q::from_poly(1, 6, "tau + i*tau*z1*chi1 + tau^2*z1^2*chi1^2").unwrap();
        let f = is_good_nonminimal(&h).unwrap();
        assert_eq!((f.m, f.epsilons.clone()), (1, vec![1]));
        assert_eq!(f.reconstruct(), h);
        assert!(is_good_nonminimal(&Q::from_poly(1, 6, "tau + 2*i*z1*chi1").unwrap()).is_none());
        let h2 = Q::from_poly(2, 8, "tau + i*tau^2*z1*chi1 - i*tau^2*z2*chi2 + tau^3*z1*chi2").unwrap();
        let f2 = is_good_nonminimal(&h2).unwrap();
        assert_eq!((f2.m, f2.epsilons.clone()), (2, vec![1, -1]));
    }

    #[test]
    fn normalize_good_scalings() {
        // c = 4 gives z ↦ z/2 (λ = 1/2 in the original variable)
        let h = Q::from_poly(1, 6, "tau + 4*i*tau*z1*chi1").unwrap();
        let (out, change, form) = normalize_good(&h).unwrap();
        assert_eq!(form.m, 1);
        assert_eq!(out, Q::from_poly(1, 6, "tau + i*tau*z1*chi1").unwrap());
        assert_eq!(change.f[0], Series::poly(&map_vars(1), 6, "2*z1").unwrap());
        // already good: identity
        let (out, change, _) = normalize_good(&out).unwrap();
        assert_eq!(out.q, Q::from_poly(1, 6, "tau + i*tau*z1*chi1").unwrap().q);
        assert_eq!(change, HoloMap::identity(1, 6));
        // c = 1/2 needs |λ|² = 2, realized by the Gaussian integer 1 + i
        let h = Q::from_poly(1, 12, "tau + 1/2*i*tau^9*z1*chi1").unwrap();
        let (out, _, form) = normalize_good(&h).unwrap();
        assert_eq!(form.m, 9);
        assert_eq!(out, Q::from_poly(1, 12, "tau + i*tau^9*z1*chi1").unwrap());
    }

    #[test]
    fn hypersurface_file_round_trip() {
        let h = Hypersurface::Complex(Q::from_poly(1, 5, "tau + 2*i*z1*chi1").unwrap());
        assert_eq!(Hypersurface::<GaussRat>::parse(&h.to_text()).unwrap(), h);
    }

    #[test]
    fn maps_into_and_pull_back() {
        let heis = Q::from_poly(1, 6, "tau + 2*i*z1*chi1").unwrap();
        let v = map_vars(1);
        let dil = HoloMap::new(
            vec![Series::poly(&v, 6, "2*z1").unwrap()],
            Series::poly(&v, 6, "4*w").unwrap(),
        )
        .unwrap();
        assert!(maps_into(&dil, &heis, &heis).unwrap().is_zero());
        assert_eq!(pull_back(&dil, &heis).unwrap(), heis);
        // (z, w + w²) leaves 4i zχτ at degree 3 and pulls back to a new surface
        let bend = HoloMap::new(
            vec![Series::poly(&v, 6, "z1").unwrap()],
            Series::poly(&v, 6, "w + w^2").unwrap(),
        )
        .unwrap();
        assert_eq!(first_defect_order(&bend, &heis, &heis).unwrap(), Some(3));
        let src = pull_back(&bend, &heis).unwrap();
        assert_ne!(src, heis);
        assert_eq!(first_defect_order(&bend, &src, &heis).unwrap(), None);
    }
}
