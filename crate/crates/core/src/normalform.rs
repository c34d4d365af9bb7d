//! Normal coordinates along a transverse curve, unitary diagonalization of
//! the Levi family, and the diagonal normal form
//! `Im w = Σ ε_j |z_j|² (Re w)^{b_j} θ_j(Re w) + R`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::holomap::{map_vars, HoloMap};
use crate::hypersurface::{
    check_normal, complex_to_real, levi_matrix_along_axis, maps_into, pull_back, real_to_complex,
    real_vars, ComplexDefining, RealGraph,
};
use crate::linalg::MatSeries;
use crate::rellich::{rellich_diagonalize, Diagonalization, RellichOptions};
use crate::scalar::{CFloat, RealScalar, Scalar, Tolerance};
use crate::series::{Mono, Series, Vars};
use crate::textfmt::{DocWriter, Document};

/// The single curve parameter `t`.
pub fn curve_vars() -> Vars {
    Vars::new(&["t"])
}

fn axis_vars() -> Vars {
    Vars::new(&["s"])
}

/// `γ(t) = (β(t), η(t))` through the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticCurve<C: Scalar> {
    pub beta: Vec<Series<C>>,
    pub eta: Series<C>,
}

impl<C: Scalar> AnalyticCurve<C> {
    pub fn new(beta: Vec<Series<C>>, eta: Series<C>) -> Result<Self> {
        let tv = curve_vars();
        let fit = |s: Series<C>| s.restrict_vars(&tv);
        let beta = beta.into_iter().map(fit).collect::<Result<Vec<_>>>()?;
        let eta = fit(eta)?;
        if beta.iter().chain([&eta]).any(|s| !s.constant_term().is_zero_exact()) {
            return Err(Error::Curve("curve does not pass through the origin".into()));
        }
        Ok(AnalyticCurve { beta, eta })
    }

    /// `t ↦ (0, t)`.
    pub fn axis(n: usize, trunc: u32) -> Self {
        let tv = curve_vars();
        AnalyticCurve {
            beta: vec![Series::zero(&tv, trunc); n],
            eta: Series::var(&tv, 0, trunc),
        }
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn trunc(&self) -> u32 {
        self.beta.iter().map(Series::trunc).fold(self.eta.trunc(), u32::min)
    }

    pub fn is_transverse(&self) -> bool {
        !self.eta.coeff_of(&[1]).is_negligible(self.eta.tol())
    }

    /// `η(t) − t − iψ(β(t), β̄(t), t)` for real `t`.
    pub fn membership_residual(&self, psi: &RealGraph<C>) -> Result<Series<C>> {
        let tv = curve_vars();
        let t = Series::var(&tv, 0, self.trunc()).with_tol(self.eta.tol());
        let mut imgs: Vec<Series<C>> = self.beta.clone();
        imgs.extend(self.beta.iter().map(Series::conj));
        imgs.push(t.clone());
        let on = psi.series().compose(&imgs)?.scale(&C::imag_unit());
        Ok(&(&self.eta - &t) - &on)
    }
}

/// Moves a transverse curve on `h` to the axis `{z = 0, Im w = 0}`.
///
/// Returns the new defining function and the change `(z, w) ↦ (z′, w′)`
/// with `z′ = z + β(w)`, `w′ = Q(z + β(w), β̄(w), η̄(w))` from the new
/// coordinates to those of `h`.
pub fn adapt_to_curve<C: Scalar>(h: &ComplexDefining<C>, c: &AnalyticCurve<C>) -> Result<(ComplexDefining<C>, HoloMap<C>)> {
    let n = h.n;
    if c.n() != n {
        return Err(Error::Invalid(format!("curve has {} components, expected {n}", c.n())));
    }
    let report = check_normal(h)?;
    if !report.holds() {
        return Err(Error::NotNormal(report.to_string()));
    }
    if !c.is_transverse() {
        return Err(Error::Curve("curve is tangent to the complex tangent space: η′(0) = 0".into()));
    }
    let r = c.membership_residual(&complex_to_real(h)?)?;
    if let Some((m, k)) = r.first_defect(r.tol()) {
        return Err(Error::Curve(format!(
            "curve leaves the hypersurface at order {}: residual {} · {}",
            m.degree(),
            k.fmt_text(),
            m.display(r.vars())
        )));
    }
    let trunc = h.trunc().min(c.trunc());
    let mv = map_vars(n);
    let tol = h.tol();
    let on_w = |s: &Series<C>| s.embed(&mv, &[n]).with_tol(tol);
    let mut imgs = Vec::with_capacity(2 * n + 1);
    let mut f = Vec::with_capacity(n);
    for (j, b) in c.beta.iter().enumerate() {
        let zj = &Series::var(&mv, j, trunc).with_tol(tol) + &on_w(b);
        f.push(zj.clone());
        imgs.push(zj);
    }
    imgs.extend(c.beta.iter().map(|b| on_w(&b.conj())));
    imgs.push(on_w(&c.eta.conj()));
    let g = h.q.compose(&imgs)?;
    let change = HoloMap::new(f, g)?;
    let out = pull_back(&change, h)?;
    Ok((out, change))
}

/// `A(s) = A(s)*`, as an `n × n` matrix of series in `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianFamily<C: Scalar> {
    pub a: Vec<Vec<Series<C>>>,
}

impl<C: Scalar> HermitianFamily<C> {
    pub fn new(a: Vec<Vec<Series<C>>>) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("Hermitian family must be square".into()));
        }
        let sv = axis_vars();
        let a = a
            .into_iter()
            .map(|r| r.into_iter().map(|e| e.restrict_vars(&sv)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(HermitianFamily { a })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn trunc(&self) -> u32 {
        self.a.iter().flatten().map(Series::trunc).min().unwrap_or(0)
    }

    /// Largest coefficient of `A − A*`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((&self.a[i][j] - &self.a[j][i].conj()).max_abs_coeff());
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i == j || self.a[i][j].is_zero()))
    }

    pub fn to_float(&self) -> MatSeries<CFloat> {
        let entries: Vec<Vec<Series<CFloat>>> = self
            .a
            .iter()
            .map(|r| r.iter().map(|e| e.map_coeffs(|c| CFloat(c.to_cdd()), Tolerance::default())).collect())
            .collect();
        MatSeries::from_series(&entries, 0, self.trunc())
    }

    pub fn diagonalize(&self, opts: RellichOptions) -> Result<Diagonalization> {
        rellich_diagonalize(&self.to_float(), opts)
    }
}

/// The tuple `(ε_j, b_j, θ_j, R)` together with the change of coordinates
/// from the normal-form chart to the original one.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormData<C: Scalar> {
    pub epsilons: Vec<i8>,
    pub exponents: Vec<u32>,
    /// Series in `s` with `θ_j(0) = 1`.
    pub thetas: Vec<Series<C>>,
    /// Series in `z, zb, s` of `(z, z̄)`-degree at least 3.
    pub r: Series<C>,
    pub change: HoloMap<C>,
}

impl<C: Scalar> NormalFormData<C> {
    /// Assembles data whose change of coordinates is the identity.
    pub fn from_parts(epsilons: Vec<i8>, exponents: Vec<u32>, thetas: Vec<Series<C>>, r: Series<C>) -> Result<Self> {
        let n = epsilons.len();
        if exponents.len() != n || thetas.len() != n {
            return Err(Error::Invalid("epsilons, exponents and thetas differ in length".into()));
        }
        let sv = axis_vars();
        let thetas = thetas.into_iter().map(|t| t.restrict_vars(&sv)).collect::<Result<Vec<_>>>()?;
        let r = r.embed_by_name(&real_vars(n))?;
        let change = HoloMap::identity(n, r.trunc()).with_tol(r.tol());
        let nf = NormalFormData {
            epsilons,
            exponents,
            thetas,
            r,
            change,
        };
        nf.check_invariants()?;
        Ok(nf)
    }

    pub fn n(&self) -> usize {
        self.epsilons.len()
    }

    pub fn trunc(&self) -> u32 {
        self.r.trunc()
    }

    pub fn b1(&self) -> u32 {
        self.exponents.first().copied().unwrap_or(0)
    }

    /// `Σ ε_j z_j z̄_j s^{b_j} θ_j(s) + R`.
    pub fn reconstruct(&self) -> Result<RealGraph<C>> {
        let n = self.n();
        let rv = real_vars(n);
        let trunc = self.trunc();
        let mut phi = self.r.clone();
        for j in 0..n {
            let mut m = Mono::var(2 * n + 1, 2 * n, self.exponents[j] as u16);
            m.0[j] = 1;
            m.0[n + j] = 1;
            let t = self.thetas[j].embed(&rv, &[2 * n]).with_tol(self.r.tol());
            let term = t.mul_monomial(&m, &C::from_i64(self.epsilons[j] as i64));
            phi = &phi + &term.with_trunc(term.trunc().min(trunc));
        }
        RealGraph::new(n, phi.with_trunc(trunc))
    }

    /// Sorting, signs, `θ_j(0) = 1`, and the shape of `R`.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n();
        if self.epsilons.iter().any(|e| e.abs() != 1) {
            return Err(Error::Invalid("epsilons must be ±1".into()));
        }
        if self.exponents.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid(format!("exponents {:?} are not non-increasing", self.exponents)));
        }
        let tol = self.r.tol();
        for (j, t) in self.thetas.iter().enumerate() {
            if !t.constant_term().sub(&C::one()).is_negligible(tol) {
                return Err(Error::Invalid(format!("theta{} does not start with 1", j + 1)));
            }
        }
        for (m, _) in self.r.terms() {
            let dz: u32 = (0..n).map(|j| m.exp(j) as u32).sum();
            let dzb: u32 = (n..2 * n).map(|j| m.exp(j) as u32).sum();
            if dz == 0 || dzb == 0 || dz + dzb < 3 {
                return Err(Error::Invalid(format!(
                    "R contains the excluded term {}",
                    m.display(self.r.vars())
                )));
            }
        }
        Ok(())
    }

    /// Largest coefficient by which `change` fails to map the reconstructed
    /// normal form into `original`.
    pub fn residual(&self, original: &RealGraph<C>) -> Result<f64> {
        let src = real_to_complex(&self.reconstruct()?)?;
        let dst = real_to_complex(original)?;
        Ok(maps_into(&self.change, &src, &dst)?.max_abs_coeff())
    }

    pub fn write(&self, w: &mut DocWriter) {
        w.header("n", self.n())
            .header("trunc", self.trunc())
            .list("epsilons", &self.epsilons)
            .list("exponents", &self.exponents);
        for (j, t) in self.thetas.iter().enumerate() {
            w.series(&format!("theta{}", j + 1), t);
        }
        w.series("R", &self.r);
        self.change.write(w);
    }

    pub fn to_text(&self) -> String {
        let mut w = DocWriter::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn read(doc: &Document) -> Result<Self> {
        let need = |k: &str| {
            doc.header_list(k)?
                .ok_or_else(|| Error::Invalid(format!("missing `{k}:` header")))
        };
        let epsilons = need("epsilons")?.into_iter().map(|e| e as i8).collect::<Vec<_>>();
        let exponents = need("exponents")?
            .into_iter()
            .map(|b| u32::try_from(b).map_err(|_| Error::Invalid("negative exponent".into())))
            .collect::<Result<Vec<_>>>()?;
        let n = epsilons.len();
        let thetas = (1..=n)
            .map(|j| doc.require_series(&format!("theta{j}")))
            .collect::<Result<Vec<_>>>()?;
        let r: Series<C> = doc.require_series("R")?;
        let mut nf = NormalFormData::from_parts(epsilons, exponents, thetas, r)?;
        if doc.has_block("G") {
            nf.change = HoloMap::read(doc, n)?;
        }
        Ok(nf)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read(&Document::parse(text)?)
    }
}

/// `(valuation, sign, |leading coefficient|)` of a Levi branch.
fn branch_head<C: Scalar>(d: &Series<C>, zero_tol: f64) -> Option<(u32, i8, C::Real)> {
    let tol = Tolerance { cmp: zero_tol };
    let (m, c) = d.terms().find(|(_, c)| !c.is_negligible(tol))?;
    let re = c.re();
    let sign = re.signum_tol(0.0);
    let mag = if sign < 0 { re.neg() } else { re };
    Some((m.degree(), if sign < 0 { -1 } else { 1 }, mag))
}

/// `(z, w) ↦ (V(w)·z, w)` for a matrix family `V` given as series in `s`.
fn linear_change<C: Scalar>(v: &[Vec<Series<C>>], trunc: u32, tol: Tolerance) -> Result<HoloMap<C>> {
    let n = v.len();
    let mv = map_vars(n);
    let mut f = Vec::with_capacity(n);
    for row in v {
        let mut fj = Series::zero(&mv, trunc).with_tol(tol);
        for (k, e) in row.iter().enumerate() {
            // V is only known to the order of A, but its higher coefficients
            // meet the defining equations at degree > trunc only
            let on_w = e.embed(&mv, &[n]).with_tol(tol).mul_var_power(k, 1).with_trunc(trunc);
            fj = &fj + &on_w;
        }
        f.push(fj);
    }
    HoloMap::new(f, Series::var(&mv, n, trunc).with_tol(tol))
}

/// The unitary family `V = Uᵀ` with `Vᵀ A V̄ = U A U*` diagonal.
fn unitary_change<C: Scalar>(fam: &HermitianFamily<C>, opts: RellichOptions) -> Result<Vec<Vec<Series<C>>>> {
    let n = fam.n();
    let sv = axis_vars();
    if fam.is_diagonal() {
        let t = fam.trunc();
        return Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Series::one(&sv, t) } else { Series::zero(&sv, t) })
                    .collect()
            })
            .collect());
    }
    let probe = C::from_cdd(CFloat::one().0).is_some();
    if !probe {
        return Err(Error::NeedsFloatBackend(
            "the Levi matrix is not diagonal, so its unitary diagonalization leaves the rationals".into(),
        ));
    }
    let diag = fam.diagonalize(opts)?;
    let ut = diag.u.transpose();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = ut.entry_series(i, j, &sv, 0, Tolerance::default());
                    Ok(e.map_coeffs(|c| C::from_cdd(c.0).expect("float backend"), Tolerance::default()))
                })
                .collect()
        })
        .collect()
}

/// Computes `(ε_j, b_j, θ_j, R)` along the axis `{(0, s)}`.
pub fn normal_form<C: Scalar>(g: &RealGraph<C>) -> Result<NormalFormData<C>> {
    normal_form_with(
        g,
        RellichOptions {
            strict: false,
            ..RellichOptions::default()
        },
    )
}

pub fn normal_form_with<C: Scalar>(g: &RealGraph<C>, opts: RellichOptions) -> Result<NormalFormData<C>> {
    let n = g.n;
    let trunc = g.trunc();
    let tol = g.series().tol();
    if !g.is_normal() {
        return Err(Error::NotNormal("φ(z, 0, s) or φ(0, z̄, s) is not identically zero".into()));
    }
    let q0 = real_to_complex(g)?;
    let fam = HermitianFamily::new(levi_matrix_along_axis(g)?)?;

    // unitary step
    let v = unitary_change(&fam, opts)?;
    let h1 = linear_change(&v, trunc, tol)?;
    let g1 = complex_to_real(&pull_back(&h1, &q0)?)?;

    // read the diagonal branches
    let levi1 = levi_matrix_along_axis(&g1)?;
    let mut heads = Vec::with_capacity(n);
    for (j, row) in levi1.iter().enumerate() {
        let head = branch_head(&row[j], opts.zero_tol).ok_or(Error::DegenerateLevi { index: j + 1, trunc })?;
        heads.push((j, head));
    }
    heads.sort_by(|(ia, (ba, ea, ca)), (ib, (bb, eb, cb))| {
        bb.cmp(ba)
            .then(eb.cmp(ea))
            .then(cb.abs_f64().partial_cmp(&ca.abs_f64()).unwrap_or(Ordering::Equal))
            .then(ia.cmp(ib))
    });

    // permutation and rescaling: old z_{σ(k)} = λ_k · new z_k
    let sv = axis_vars();
    let mut m = vec![vec![Series::zero(&sv, trunc).with_tol(tol); n]; n];
    for (k, (old, (_, _, c))) in heads.iter().enumerate() {
        let q = c
            .inv()
            .ok_or(Error::DegenerateLevi { index: old + 1, trunc })?;
        let lam = C::norm_root(&q).ok_or_else(|| {
            Error::NeedsFloatBackend(format!("no scalar λ with |λ|² = 1/c for Levi branch {}", old + 1))
        })?;
        m[*old][k] = Series::constant(&sv, trunc, lam).with_tol(tol);
    }
    let h2 = linear_change(&m, trunc, tol)?;
    let change = h1.compose(&h2)?.with_trunc(trunc);
    let gf = complex_to_real(&pull_back(&change, &q0)?)?;

    // split off the (1,1) part
    let phi = gf.series();
    let rv = real_vars(n);
    let mut r = Series::zero(&rv, trunc).with_tol(tol);
    let mut thetas = vec![Series::zero(&sv, trunc.saturating_sub(2)).with_tol(tol); n];
    let mut epsilons = Vec::with_capacity(n);
    let mut exponents = Vec::with_capacity(n);
    for (_, (b, e, _)) in &heads {
        epsilons.push(*e);
        exponents.push(*b);
    }
    for (mono, c) in phi.terms() {
        let zs: Vec<usize> = (0..n).filter(|&j| mono.exp(j) > 0).collect();
        let zbs: Vec<usize> = (n..2 * n).filter(|&j| mono.exp(j) > 0).collect();
        let dz: u16 = (0..n).map(|j| mono.exp(j)).sum();
        let dzb: u16 = (n..2 * n).map(|j| mono.exp(j)).sum();
        if dz == 1 && dzb == 1 {
            let (j, k) = (zs[0], zbs[0] - n);
            if j == k {
                let p = mono.exp(2 * n);
                let b = exponents[j] as u16;
                if p >= b {
                    let e = C::from_i64(epsilons[j] as i64);
                    thetas[j].add_term(Mono::var(1, 0, p - b), c.mul(&e));
                }
            }
            continue;
        }
        r.add_term(mono.clone(), c.clone());
    }
    let thetas = thetas
        .into_iter()
        .zip(&exponents)
        .map(|(t, b)| t.with_trunc(trunc.saturating_sub(2 + b)))
        .collect();
    let nf = NormalFormData {
        epsilons,
        exponents,
        thetas,
        r,
        change,
    };
    nf.check_invariants()?;
    Ok(nf)
}

/// Off-diagonal size of the `(1,1)` part of a real graph, as a diagnostic
/// for the float backend.
pub fn levi_off_diagonal<C: Scalar>(g: &RealGraph<C>) -> Result<f64> {
    let a = levi_matrix_along_axis(g)?;
    let n = g.n;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(a[i][j].max_abs_coeff());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    type G = RealGraph<GaussRat>;

    #[test]
    fn heisenberg_is_its_own_normal_form() {
        let g = G::from_poly(1, 6, "z1*zb1").unwrap();
        let nf = normal_form(&g).unwrap();
        assert_eq!((nf.epsilons.clone(), nf.exponents.clone()), (vec![1], vec![0]));
        assert_eq!(nf.thetas[0], Series::one(&axis_vars(), 4));
        assert!(nf.r.is_zero());
        assert_eq!(nf.change, HoloMap::identity(1, 6));
        assert_eq!(nf.residual(&g).unwrap(), 0.0);
    }

    #[test]
    fn sorting_interchanges_coordinates() {
        let g = G::from_poly(2, 7, "s*z1*zb1 - s^3*z2*zb2").unwrap();
        let nf = normal_form(&g).unwrap();
        assert_eq!((nf.epsilons.clone(), nf.exponents.clone()), (vec![-1, 1], vec![3, 1]));
        let mv = map_vars(2);
        assert_eq!(nf.change.f[0], Series::poly(&mv, 7, "z2").unwrap());
        assert_eq!(nf.change.f[1], Series::poly(&mv, 7, "z1").unwrap());
        assert!(nf.r.is_zero());
        assert_eq!(nf.residual(&g).unwrap(), 0.0);
        assert_eq!(nf.reconstruct().unwrap(), G::from_poly(2, 7, "-s^3*z1*zb1 + s*z2*zb2").unwrap());
    }

    #[test]
    fn rescaling_and_higher_terms() {
        let g = G::from_poly(1, 8, "4*s*z1*zb1 + s^2*z1*zb1 + z1^2*zb1^2").unwrap();
        let nf = normal_form(&g).unwrap();
        assert_eq!((nf.epsilons.clone(), nf.exponents.clone()), (vec![1], vec![1]));
        assert_eq!(nf.thetas[0], Series::poly(&axis_vars(), 5, "1 + 1/4*s").unwrap());
        assert_eq!(nf.r, Series::poly(&real_vars(1), 8, "1/16*z1^2*zb1^2").unwrap());
        assert_eq!(nf.residual(&g).unwrap(), 0.0);
    }

    #[test]
    fn off_diagonal_levi_needs_float() {
        let g = G::from_poly(2, 6, "s*z1*zb2 + s*z2*zb1").unwrap();
        assert!(matches!(normal_form(&g), Err(Error::NeedsFloatBackend(_))));
        let g = RealGraph::<CFloat>::from_poly(2, 7, "s*z1*zb2 + s*z2*zb1 + z1^2*zb1^2 + s^2*z1*zb1").unwrap();
        let nf = normal_form(&g).unwrap();
        assert_eq!((nf.epsilons.clone(), nf.exponents.clone()), (vec![1, -1], vec![1, 1]));
        assert!(nf.residual(&g).unwrap() < 1e-25, "{}", nf.residual(&g).unwrap());
    }

    #[test]
    fn vanishing_branch_is_reported() {
        let g = G::from_poly(2, 6, "s*z1*zb1 + z1*z2*zb1*zb2").unwrap();
        assert!(matches!(normal_form(&g), Err(Error::DegenerateLevi { index: 2, trunc: 6 })));
    }

    #[test]
    fn text_round_trip() {
        let g = G::from_poly(2, 7, "s*z1*zb1 - s^3*z2*zb2 + s*z1^2*zb1^2").unwrap();
        let nf = normal_form(&g).unwrap();
        assert_eq!(NormalFormData::<GaussRat>::parse(&nf.to_text()).unwrap(), nf);
    }

    fn heis() -> ComplexDefining<GaussRat> {
        ComplexDefining::from_poly(1, 6, "tau + 2*i*z1*chi1").unwrap()
    }

    fn curve(beta: &str, eta: &str) -> AnalyticCurve<GaussRat> {
        let tv = curve_vars();
        AnalyticCurve::new(vec![Series::poly(&tv, 6, beta).unwrap()], Series::poly(&tv, 6, eta).unwrap()).unwrap()
    }

    /// `t ↦ H(0, t)`.
    fn image_of_axis(h: &HoloMap<GaussRat>) -> Vec<Series<GaussRat>> {
        let tv = curve_vars();
        let imgs = vec![Series::zero(&tv, h.trunc()), Series::var(&tv, 0, h.trunc())];
        h.components().iter().map(|c| c.compose(&imgs).unwrap()).collect()
    }

    #[test]
    fn axis_curve_is_trivial() {
        let (q, change) = adapt_to_curve(&heis(), &AnalyticCurve::axis(1, 6)).unwrap();
        assert_eq!(q, heis());
        assert_eq!(change, HoloMap::identity(1, 6));
    }

    #[test]
    fn curve_on_heisenberg_moves_to_axis() {
        let c = curve("t", "t + i*t^2");
        let (q, change) = adapt_to_curve(&heis(), &c).unwrap();
        assert!(check_normal(&q).unwrap().holds());
        let img = image_of_axis(&change);
        assert_eq!(img[0], c.beta[0]);
        assert_eq!(img[1], c.eta);
    }

    #[test]
    fn curve_off_the_surface_is_rejected() {
        match adapt_to_curve(&heis(), &curve("t", "t")) {
            Err(Error::Curve(msg)) => assert!(msg.contains("order 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(adapt_to_curve(&heis(), &curve("t", "0")), Err(Error::Curve(_))));
    }
}
