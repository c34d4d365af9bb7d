//! Automorphisms of good nonminimal hypersurfaces: reality of the normal
//! component, the CR frame and its commutators, the reflection identity,
//! and a degree-by-degree probe of jet determination.

use std::fmt;

use crate::error::{Error, Result};
use crate::holomap::{map_vars, HoloMap};
use crate::hypersurface::{real_vars, swap_pairing, ComplexDefining, RealGraph};
use crate::scalar::Scalar;
use crate::series::{Mono, Series, Vars};

mod probe;

pub use probe::{
    decidable_degree, jet_determination_probe, kernel_automorphisms, DegreeStats, ProbeOptions, ProbeReport, Verdict,
};

/// Outcome of the reality check on `∂^ℓ_w G(z, 0)`, `ℓ ≤ m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GwRealReport {
    pub m: u32,
    /// First `ℓ` at which `∂^ℓ_w G(z, 0)` depends on `z` or is not real.
    pub offending: Option<u32>,
}

impl GwRealReport {
    pub fn holds(&self) -> bool {
        self.offending.is_none()
    }
}

impl fmt::Display for GwRealReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.offending {
            None => write!(f, "G_w^l(z,0) real constants for l <= {}", self.m),
            Some(l) => write!(f, "G_w^l(z,0) fails to be a real constant at l = {l}"),
        }
    }
}

pub fn check_gw_real<C: Scalar>(h: &HoloMap<C>, m: u32) -> Result<GwRealReport> {
    let n = h.n();
    if h.trunc() < m {
        return Err(Error::TruncationBudget {
            requested: m,
            achievable: h.trunc(),
        });
    }
    let tol = h.g.tol();
    for l in 0..=m {
        let c = h.g.coeff_in(n, l as u16);
        let k = c.constant_term();
        let rest = &c - &Series::constant(c.vars(), c.trunc(), k.clone());
        if !rest.is_negligible(tol) || !k.is_real(tol) {
            return Ok(GwRealReport { m, offending: Some(l) });
        }
    }
    Ok(GwRealReport { m, offending: None })
}

/// `G = P(w) + w^m G_2(z, w)` with the auxiliary series `𝒬` and `𝒯`.
#[derive(Clone, Debug, PartialEq)]
pub struct AutomorphismSplit<C: Scalar> {
    pub m: u32,
    /// Series in `w` of degree at most `m − 1`.
    pub p: Series<C>,
    pub g2: Series<C>,
    /// `(P(w̄) − P(w))/(w̄ − w)` in the variables `w, wb`.
    pub qpoly: Series<C>,
    /// `P(w)/w` when `m > 1`, zero otherwise.
    pub tpoly: Series<C>,
}

fn w_vars() -> Vars {
    Vars::new(&["w"])
}

pub fn split_automorphism<C: Scalar>(h: &HoloMap<C>, m: u32) -> Result<AutomorphismSplit<C>> {
    let rep = check_gw_real(h, m)?;
    if let Some(l) = rep.offending {
        return Err(Error::Invalid(format!("G_w^{l}(z,0) is not a real constant")));
    }
    let n = h.n();
    let trunc = h.trunc();
    let tol = h.g.tol();
    let wv = w_vars();
    let mut p = Series::zero(&wv, trunc).with_tol(tol);
    for j in 1..m {
        p.add_term(Mono::from_slice(&[j as u16]), h.g.coeff_in(n, j as u16).constant_term());
    }
    let p_map = p.embed(&map_vars(n), &[n]);
    let g2 = (&h.g - &p_map)
        .div_var_power(n, m as u16)
        .map_err(|e| Error::Invalid(format!("G − P is not divisible by w^{m}: {e}")))?;
    let qv = Vars::new(&["w", "wb"]);
    let mut qpoly = Series::zero(&qv, trunc).with_tol(tol);
    for (mono, c) in p.terms() {
        let j = mono.exp(0);
        for k in 0..j {
            qpoly.add_term(Mono::from_slice(&[k, j - 1 - k]), c.clone());
        }
    }
    let tpoly = if m > 1 {
        p.div_var_power(0, 1)?
    } else {
        Series::zero(&wv, trunc).with_tol(tol)
    };
    Ok(AutomorphismSplit {
        m,
        p,
        g2,
        qpoly,
        tpoly,
    })
}

impl<C: Scalar> AutomorphismSplit<C> {
    /// `P(w) + w^m G_2`.
    pub fn reconstruct_g(&self) -> Series<C> {
        let n = self.g2.nvars() - 1;
        let p = self.p.embed(self.g2.vars(), &[n]);
        &p + &self.g2.mul_var_power(n, self.m as u16)
    }
}

/// `w(t) = s + iφ`, `A = w̄/w` and `B = (w̄ − w)/w^m` on the real chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartFunctions<C: Scalar> {
    pub m: u32,
    pub w_of_t: Series<C>,
    pub a: Series<C>,
    pub b: Series<C>,
}

pub fn chart_functions<C: Scalar>(g: &RealGraph<C>, m: u32) -> Result<ChartFunctions<C>> {
    let n = g.n;
    let phi = g.series();
    let si = 2 * n;
    let i = C::imag_unit();
    if m == 0 {
        return Err(Error::Invalid("nonminimality order must be positive".into()));
    }
    let over_sm = phi.div_var_power(si, m as u16).map_err(|_| {
        Error::DivisionDefect(format!("w − w̄ = 2iφ is not divisible by s^{m}"))
    })?;
    let ratio = phi.div_var_power(si, 1)?;
    let one = Series::one(phi.vars(), ratio.trunc()).with_tol(phi.tol());
    let up = &one + &ratio.scale(&i);
    let down = &one - &ratio.scale(&i);
    let a = &down * &up.reciprocal()?;
    let b = (&over_sm * &up.pow_unit(-(m as i64), 1)?).scale(&C::from_i64(-2).mul(&i));
    let w_of_t = &Series::var(phi.vars(), si, g.trunc()).with_tol(phi.tol()) + &phi.scale(&i);
    Ok(ChartFunctions { m, w_of_t, a, b })
}

impl<C: Scalar> ChartFunctions<C> {
    /// Largest coefficients of `A·w − w̄` and `B·w^m − (w̄ − w)`.
    pub fn residuals(&self) -> (f64, f64) {
        let n = (self.w_of_t.nvars() - 1) / 2;
        let wb = self.w_of_t.conj_permuted(&swap_pairing(n));
        let r1 = &(&self.a * &self.w_of_t) - &wb;
        let r2 = &(&self.b * &self.w_of_t.pow(self.m)) - &(&wb - &self.w_of_t);
        (r1.max_abs_coeff(), r2.max_abs_coeff())
    }
}

/// A first-order operator `Σ_k c_k ∂/∂x_k` on `z, zb, s`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<C: Scalar> {
    pub coeffs: Vec<Series<C>>,
}

impl<C: Scalar> VectorField<C> {
    pub fn apply(&self, f: &Series<C>) -> Series<C> {
        let mut out = Series::zero(f.vars(), f.trunc()).with_tol(f.tol());
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &(c * &f.partial(k, 1));
            }
        }
        out
    }

    pub fn bracket(&self, o: &Self) -> Self {
        VectorField {
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| &self.apply(b) - &o.apply(a))
                .collect(),
        }
    }

    /// The complex conjugate operator.
    pub fn conj(&self) -> Self {
        let n = (self.coeffs.len() - 1) / 2;
        let perm = swap_pairing(n);
        let mut coeffs = self.coeffs.clone();
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[perm[k]] = c.conj_permuted(&perm);
        }
        VectorField { coeffs }
    }

    pub fn is_negligible(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(c.tol()))
    }
}

/// `L_j = ∂_{z̄_j} − φ_{z̄_j}/(φ_s − i) ∂_s` and `S = s^m ∂_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CRFrame<C: Scalar> {
    pub m: u32,
    pub l: Vec<VectorField<C>>,
    pub s: VectorField<C>,
}

impl<C: Scalar> CRFrame<C> {
    pub fn new(g: &RealGraph<C>, m: u32) -> Result<Self> {
        let n = g.n;
        let phi = g.series();
        let trunc = g.trunc();
        let tol = phi.tol();
        let zero = Series::zero(phi.vars(), trunc).with_tol(tol);
        let denom = (&phi.partial(2 * n, 1) - &Series::constant(phi.vars(), trunc, C::imag_unit())).reciprocal()?;
        let mut l = Vec::with_capacity(n);
        for j in 0..n {
            let mut coeffs = vec![zero.clone(); 2 * n + 1];
            coeffs[n + j] = Series::one(phi.vars(), trunc).with_tol(tol);
            coeffs[2 * n] = (&phi.partial(n + j, 1) * &denom).scale(&C::one().neg());
            l.push(VectorField { coeffs });
        }
        let mut coeffs = vec![zero; 2 * n + 1];
        coeffs[2 * n] = Series::monomial(phi.vars(), trunc, Mono::var(2 * n + 1, 2 * n, m as u16), C::one()).with_tol(tol);
        Ok(CRFrame {
            m,
            l,
            s: VectorField { coeffs },
        })
    }

    pub fn n(&self) -> usize {
        self.l.len()
    }

    pub fn cr_apply(&self, j: usize, f: &Series<C>) -> Series<C> {
        self.l[j].apply(f)
    }
}

/// `[L_j, L̄_k] = a_{jk} S` and `[L_j, S] = b_j S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Commutators<C: Scalar> {
    pub a: Vec<Vec<Series<C>>>,
    pub b: Vec<Series<C>>,
}

fn along_s<C: Scalar>(x: &VectorField<C>, m: u32, what: &str) -> Result<Series<C>> {
    let n = (x.coeffs.len() - 1) / 2;
    if x.coeffs[..2 * n].iter().any(|c| !c.is_negligible(c.tol())) {
        return Err(Error::DivisionDefect(format!("{what} has components off the s-direction")));
    }
    x.coeffs[2 * n]
        .div_var_power(2 * n, m as u16)
        .map_err(|_| Error::DivisionDefect(format!("{what} is not divisible by s^{m}")))
}

/// Computes `a_{jk}`, `b_j` and checks `[L_j, L_k] = 0`, `a_{jj}(0) ≠ 0`.
pub fn commutators<C: Scalar>(frame: &CRFrame<C>) -> Result<Commutators<C>> {
    let n = frame.n();
    let m = frame.m;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for j in 0..n {
        for k in 0..n {
            if !frame.l[j].bracket(&frame.l[k]).is_negligible() {
                return Err(Error::Invalid(format!("[L{}, L{}] ≠ 0", j + 1, k + 1)));
            }
        }
        let row = (0..n)
            .map(|k| along_s(&frame.l[j].bracket(&frame.l[k].conj()), m, &format!("[L{}, conj L{}]", j + 1, k + 1)))
            .collect::<Result<Vec<_>>>()?;
        if row[j].constant_term().is_negligible(row[j].tol()) {
            return Err(Error::DivisionDefect(format!(
                "a_{0}{0}(0) = 0: no component along S at the origin",
                j + 1
            )));
        }
        a.push(row);
        b.push(along_s(&frame.l[j].bracket(&frame.s), m, &format!("[L{}, S]", j + 1))?);
    }
    Ok(Commutators { a, b })
}

/// Outcome of the differentiated basic identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflectionReport {
    pub trunc: u32,
    pub defect_order: Option<u32>,
}

impl ReflectionReport {
    pub fn holds(&self) -> bool {
        self.defect_order.is_none()
    }
}

/// `E(t) = G(z, w(t)) − Q(F(z, w(t)), F̄(z̄, w̄(t)), Ḡ(z̄, w̄(t)))` on the real
/// chart of `h`.
pub fn basic_identity_on_chart<C: Scalar>(h: &HoloMap<C>, q: &ComplexDefining<C>, g: &RealGraph<C>) -> Result<Series<C>> {
    let n = q.n;
    let rv = real_vars(n);
    let trunc = g.trunc();
    let tol = q.tol();
    let i = C::imag_unit();
    let s = Series::var(&rv, 2 * n, trunc).with_tol(tol);
    let w = &s + &g.series().scale(&i);
    let wb = &s - &g.series().scale(&i);
    let mut hol: Vec<Series<C>> = (0..n).map(|j| Series::var(&rv, j, trunc).with_tol(tol)).collect();
    hol.push(w);
    let mut anti: Vec<Series<C>> = (0..n).map(|j| Series::var(&rv, n + j, trunc).with_tol(tol)).collect();
    anti.push(wb);
    let mut imgs = Vec::with_capacity(2 * n + 1);
    for fj in &h.f {
        imgs.push(fj.compose(&hol)?);
    }
    for fj in &h.f {
        imgs.push(fj.conj().compose(&anti)?);
    }
    imgs.push(h.g.conj().compose(&anti)?);
    let lhs = h.g.compose(&hol)?;
    Ok(&lhs - &q.q.compose(&imgs)?)
}

/// Applies each `L_j` to the basic identity restricted to `M`; since
/// `L_j w = 0`, this vanishes iff the `L_j`-derivative of the identity
/// divided by `w^m` does.
pub fn reflection_check<C: Scalar>(h: &HoloMap<C>, q: &ComplexDefining<C>, g: &RealGraph<C>, m: u32) -> Result<ReflectionReport> {
    let frame = CRFrame::new(g, m)?;
    let e = basic_identity_on_chart(h, q, g)?;
    let mut trunc = u32::MAX;
    let mut defect: Option<u32> = None;
    for j in 0..q.n {
        let r = frame.cr_apply(j, &e);
        trunc = trunc.min(r.trunc());
        if let Some((mono, _)) = r.first_defect(r.tol()) {
            defect = Some(defect.map_or(mono.degree(), |d| d.min(mono.degree())));
        }
    }
    Ok(ReflectionReport {
        trunc,
        defect_order: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{complex_to_real, first_defect_order, normalize_good, real_to_complex};
    use crate::lifting::check_preserves;
    use crate::scalar::GaussRat;

    type Q = GaussRat;

    /// For `m = 1` the formal model `τ + iτzχ`, which violates the reality
    /// identity at degree 5; for `m ≥ 2` the real graph `Im w = s^m |z|²`
    /// brought to good nonminimal form.
    fn model(m: u32, trunc: u32) -> ComplexDefining<Q> {
        if m == 1 {
            return ComplexDefining::from_poly(1, trunc, "tau + i*tau*z1*chi1").unwrap();
        }
        let g = RealGraph::from_poly(1, trunc, &format!("s^{m}*z1*zb1")).unwrap();
        normalize_good(&real_to_complex(&g).unwrap()).unwrap().0
    }

    fn map(trunc: u32, f: &str, g: &str) -> HoloMap<Q> {
        let v = map_vars(1);
        HoloMap::new(vec![Series::poly(&v, trunc, f).unwrap()], Series::poly(&v, trunc, g).unwrap()).unwrap()
    }

    #[test]
    fn reality_of_normal_component() {
        let q = model(1, 8);
        let rot = map(8, "3/5*z1 + 4/5*i*z1", "w");
        assert!(check_preserves(&rot, &q).unwrap().holds());
        assert!(check_gw_real(&rot, 1).unwrap().holds());
        let dil = map(8, "z1", "4*w");
        assert!(check_preserves(&dil, &q).unwrap().holds());
        assert!(check_gw_real(&dil, 1).unwrap().holds());
        assert_eq!(dil.g.coeff_of(&[0, 1]), Q::from_i64(4));
        let bad = map(8, "z1", "w + z1*w");
        assert_eq!(check_gw_real(&bad, 1).unwrap().offending, Some(1));
        assert!(!check_preserves(&bad, &q).unwrap().holds());
    }

    #[test]
    fn splits() {
        let id = HoloMap::<Q>::identity(1, 6);
        let s1 = split_automorphism(&id, 1).unwrap();
        assert!(s1.p.is_zero());
        assert_eq!(s1.g2, Series::one(&map_vars(1), 5));
        let s3 = split_automorphism(&id, 3).unwrap();
        assert_eq!(s3.p, Series::var(&w_vars(), 0, 6));
        assert!(s3.g2.is_zero());
        let g = map(6, "z1", "2*w + 5*w^2 + z1*w^3");
        let s2 = split_automorphism(&g, 2).unwrap();
        assert_eq!(s2.p, Series::poly(&w_vars(), 6, "2*w").unwrap());
        assert_eq!(s2.qpoly, Series::poly(&Vars::new(&["w", "wb"]), 6, "2").unwrap());
        assert_eq!(s2.tpoly, Series::poly(&w_vars(), 5, "2").unwrap());
        assert_eq!(s2.reconstruct_g().with_trunc(6), g.g);
        let bad = map(6, "z1", "i*w");
        assert!(split_automorphism(&bad, 2).is_err());
    }

    #[test]
    fn chart_functions_identities() {
        let g = RealGraph::<Q>::from_poly(1, 8, "s*z1*zb1").unwrap();
        let cf = chart_functions(&g, 1).unwrap();
        assert_eq!(cf.a.constant_term(), Q::one());
        assert_eq!(cf.b.coeff_of(&[1, 1, 0]), Q::from_parts(GaussRat::ratio(0, 1), GaussRat::ratio(-2, 1)));
        assert_eq!(cf.residuals(), (0.0, 0.0));
        let flat = RealGraph::<Q>::from_poly(1, 8, "0").unwrap();
        let cf = chart_functions(&flat, 1).unwrap();
        assert_eq!(cf.a, Series::one(cf.a.vars(), cf.a.trunc()));
        assert!(cf.b.is_zero());
        let lev = RealGraph::<Q>::from_poly(1, 8, "z1*zb1").unwrap();
        assert!(matches!(chart_functions(&lev, 1), Err(Error::DivisionDefect(_))));
    }

    #[test]
    fn cr_fields_annihilate_holomorphic_functions() {
        let g = RealGraph::<Q>::from_poly(1, 8, "z1*zb1").unwrap();
        let frame = CRFrame::new(&g, 1).unwrap();
        let rv = real_vars(1);
        let w = &Series::var(&rv, 2, 8) + &g.series().scale(&Q::imag_unit());
        assert!(frame.cr_apply(0, &w).is_zero());
        assert!(frame.cr_apply(0, &Series::var(&rv, 0, 8)).is_zero());
        assert_eq!(frame.cr_apply(0, &Series::var(&rv, 1, 8)), Series::one(&rv, 7));
    }

    #[test]
    fn commutation_relations() {
        let g = complex_to_real(&model(1, 8)).unwrap();
        let frame = CRFrame::new(&g, 1).unwrap();
        let c = commutators(&frame).unwrap();
        assert!(!c.a[0][0].constant_term().is_zero_exact());
        let l = &frame.l[0];
        let lb = l.conj();
        let lhs = l.bracket(&lb);
        let rhs = &c.a[0][0] * &frame.s.coeffs[2];
        assert!((&lhs.coeffs[2] - &rhs).is_zero());
        let flat = RealGraph::<Q>::from_poly(1, 8, "0").unwrap();
        let frame = CRFrame::new(&flat, 1).unwrap();
        assert!(matches!(commutators(&frame), Err(Error::DivisionDefect(_))));
    }

    #[test]
    fn reflection_identity() {
        let q = model(1, 8);
        let g = complex_to_real(&q).unwrap();
        let id = HoloMap::identity(1, 8);
        assert!(reflection_check(&id, &q, &g, 1).unwrap().holds());
        let rot = map(8, "3/5*z1 + 4/5*i*z1", "w");
        assert!(reflection_check(&rot, &q, &g, 1).unwrap().holds());
        let bend = map(8, "z1 + z1*w", "w");
        assert!(first_defect_order(&bend, &q, &q).unwrap().is_some());
        let r = reflection_check(&bend, &q, &g, 1).unwrap();
        assert!(!r.holds());
    }

    #[test]
    fn heisenberg_is_determined_by_two_jets() {
        let h6 = ComplexDefining::<Q>::from_poly(1, 6, "tau + 2*i*z1*chi1").unwrap();
        let r = jet_determination_probe(&h6, 2, ProbeOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Determined { through: 3 });
        assert!(r.is_determined(), "{r}");
        let h4 = ComplexDefining::<Q>::from_poly(1, 4, "tau + 2*i*z1*chi1").unwrap();
        let r = jet_determination_probe(&h4, 1, ProbeOptions::default()).unwrap();
        assert!(matches!(r.verdict, Verdict::Free { degree: 2, .. }), "{r}");
        assert!(!r.directions.is_empty());
        assert!(r.to_string().contains("trunc 4"));
    }

    #[test]
    fn kernel_automorphisms_preserve_the_model() {
        for m in [1, 2] {
            let q = model(m, 7);
            let g = complex_to_real(&q).unwrap();
            let auts = kernel_automorphisms(&q, 4, ProbeOptions::default()).unwrap();
            assert!(!auts.is_empty());
            for h in &auts {
                assert!(check_preserves(h, &q).unwrap().holds());
                assert!(check_gw_real(h, m).unwrap().holds());
                assert!(reflection_check(h, &q, &g, m).unwrap().holds());
            }
        }
    }

    #[test]
    fn determination_is_monotone_in_the_jet_order() {
        let q = model(1, 10);
        let verdicts: Vec<bool> = (0..4)
            .map(|k| jet_determination_probe(&q, k, ProbeOptions::default()).unwrap().is_determined())
            .collect();
        println!("m=1 model, trunc 10: determined by k-jet for k = 0..3: {verdicts:?}");
        if let Some(first) = verdicts.iter().position(|&d| d) {
            assert!(verdicts[first..].iter().all(|&d| d));
        }
    }
}
