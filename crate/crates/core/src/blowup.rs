//! The weighted blow-up `ℬ(z, w) = (z_1 w^{α_1}, …, z_n w^{α_n}, w²)` of a
//! hypersurface in diagonal normal form, and the good nonminimal
//! hypersurface `M̂` it produces.

use crate::error::{Error, Result};
use crate::holomap::{map_vars, HoloMap};
use crate::hypersurface::{normalize_good, real_to_complex, real_vars, ComplexDefining, GoodNonminimalForm, RealGraph};
use crate::normalform::NormalFormData;
use crate::scalar::Scalar;
use crate::series::{Mono, Series, Vars};
use crate::textfmt::{DocWriter, Document};

/// `α_j = 2 + 3b_1 − b_j` and the exponent `3 + 6b_1` of `Re w` in `M̂`.
pub fn blowup_exponents(exponents: &[u32]) -> (Vec<u32>, u32) {
    let b1 = exponents.first().copied().unwrap_or(0);
    let alphas = exponents.iter().map(|b| 2 + 3 * b1 - b).collect();
    (alphas, 3 + 6 * b1)
}

/// `ℬ` as a map germ.
pub fn blowup_map<C: Scalar>(alphas: &[u32], trunc: u32) -> HoloMap<C> {
    let n = alphas.len();
    let v = map_vars(n);
    let f = alphas
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let mut m = Mono::var(n + 1, n, a as u16);
            m.0[j] = 1;
            Series::monomial(&v, trunc, m, C::one())
        })
        .collect();
    HoloMap {
        f,
        g: Series::monomial(&v, trunc, Mono::var(n + 1, n, 2), C::one()),
    }
}

/// Variables `z1 … zn zb1 … zbn s t`.
pub fn preimage_vars(n: usize) -> Vars {
    let mut names: Vec<String> = real_vars(n).names().to_vec();
    names.push("t".into());
    Vars::new(&names)
}

/// Degree to which the preimage equation is determined by the data.
fn preimage_order<C: Scalar>(nf: &NormalFormData<C>) -> u32 {
    let b1 = nf.b1();
    // unknown terms of R have (z, z̄)-degree ≥ 3 and each z_j carries
    // w^{α_j}, α_j ≥ 2 + 2b_1; unknown terms of θ_j carry (s² − t²)^{N+1}
    let from_r = 2 * nf.r.trunc() + 4 + 6 * b1;
    nf.thetas
        .iter()
        .map(|t| 2 * t.trunc() + 7 + 6 * b1)
        .fold(from_r, u32::min)
}

/// `Σ ε_j |z_j|² (s² − t²)^{b_j} (s² + t²)^{α_j} θ_j(s² − t²) + R̃ − 2st`,
/// the defining series of `ℬ^{-1}(M)` with `w = s + it`, where
/// `R̃ = R(z w^α, z̄ w̄^α, s² − t²)`.
pub fn preimage_equation<C: Scalar>(nf: &NormalFormData<C>) -> Result<Series<C>> {
    let n = nf.n();
    let pv = preimage_vars(n);
    let bound = preimage_order(nf);
    let tol = nf.r.tol();
    let var = |i: usize| Series::var(&pv, i, bound).with_tol(tol);
    let (alphas, _) = blowup_exponents(&nf.exponents);
    let s = var(2 * n);
    let t = var(2 * n + 1);
    let i = C::imag_unit();
    let s2 = s.pow(2);
    let t2 = t.pow(2);
    let re_w2 = &s2 - &t2;
    let abs_w2 = &s2 + &t2;
    let w = &s + &t.scale(&i);
    let wb = &s - &t.scale(&i);

    let mut out = (&s * &t).scale(&C::from_i64(-2));
    for j in 0..n {
        let theta = nf.thetas[j].compose_polynomial(std::slice::from_ref(&re_w2))?;
        let zz = &var(j) * &var(n + j);
        let term = &(&(&zz * &re_w2.pow(nf.exponents[j])) * &abs_w2.pow(alphas[j])) * &theta;
        out = &out + &term.scale(&C::from_i64(nf.epsilons[j] as i64));
    }
    let mut imgs = Vec::with_capacity(2 * n + 1);
    for (j, &a) in alphas.iter().enumerate() {
        imgs.push(&var(j) * &w.pow(a));
    }
    for (j, &a) in alphas.iter().enumerate() {
        imgs.push(&var(n + j) * &wb.pow(a));
    }
    imgs.push(re_w2);
    let rt = nf.r.compose_polynomial(&imgs)?;
    Ok((&out + &rt).with_trunc(bound))
}

/// Output of the blow-up construction.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowupData<C: Scalar> {
    pub alphas: Vec<u32>,
    pub threshold: u32,
    /// `η(z, z̄, s)` with `M̂ = {Im w = s^{3+6b_1} η}`.
    pub eta: Series<C>,
    pub mhat: RealGraph<C>,
}

impl<C: Scalar> BlowupData<C> {
    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn b_map(&self) -> HoloMap<C> {
        blowup_map(&self.alphas, self.mhat.trunc())
    }

    /// Exponent bookkeeping and the shape of `η`.
    pub fn check_invariants(&self, epsilons: &[i8], exponents: &[u32]) -> Result<()> {
        let n = self.n();
        let b1 = exponents.first().copied().unwrap_or(0);
        for (j, (&a, &b)) in self.alphas.iter().zip(exponents).enumerate() {
            if a < 2 || 2 * b + 2 * a != 4 + 6 * b1 {
                return Err(Error::Invalid(format!("exponent identity fails for j = {}", j + 1)));
            }
        }
        let rv = real_vars(n);
        let tol = self.eta.tol();
        let mut head = Series::zero(&rv, self.eta.trunc()).with_tol(tol);
        for (j, &e) in epsilons.iter().enumerate() {
            let mut m = Mono::one(2 * n + 1);
            m.0[j] = 1;
            m.0[n + j] = 1;
            head.add_term(m, C::from_ratio(e as i64, 2));
        }
        if !(&self.eta.at_zero(2 * n) - &head).is_negligible(tol) {
            return Err(Error::Invalid("η(z, z̄, 0) ≠ ½ Σ ε_j |z_j|²".into()));
        }
        let no_zb = (n..2 * n).fold(self.eta.clone(), |s, i| s.at_zero(i));
        let no_z = (0..n).fold(self.eta.clone(), |s, i| s.at_zero(i));
        if !no_zb.is_negligible(tol) || !no_z.is_negligible(tol) {
            return Err(Error::Invalid("η(z, 0, s) or η(0, z̄, s) is not zero".into()));
        }
        Ok(())
    }

    pub fn write(&self, w: &mut DocWriter) {
        w.header("n", self.n())
            .list("alphas", &self.alphas)
            .header("threshold", self.threshold)
            .series("eta", &self.eta)
            .series("phihat", self.mhat.series());
    }

    pub fn to_text(&self) -> String {
        let mut w = DocWriter::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn read(doc: &Document) -> Result<Self> {
        let alphas = doc
            .header_list("alphas")?
            .ok_or_else(|| Error::Invalid("missing `alphas:` header".into()))?
            .into_iter()
            .map(|a| u32::try_from(a).map_err(|_| Error::Invalid("negative alpha".into())))
            .collect::<Result<Vec<_>>>()?;
        let threshold: u32 = doc
            .header_parsed("threshold")?
            .ok_or_else(|| Error::Invalid("missing `threshold:` header".into()))?;
        let n = alphas.len();
        let rv = real_vars(n);
        let eta = doc.require_series::<C>("eta")?.embed_by_name(&rv)?;
        let mhat = RealGraph::new(n, doc.require_series::<C>("phihat")?.embed_by_name(&rv)?)?;
        Ok(BlowupData {
            alphas,
            threshold,
            eta,
            mhat,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read(&Document::parse(text)?)
    }
}

/// Order in `(z, z̄, s)` to which `η` is determined by `nf`.
pub fn achievable_eta_order<C: Scalar>(nf: &NormalFormData<C>) -> u32 {
    preimage_order(nf) - 4 - 6 * nf.b1()
}

/// Solves `2v = Σ ε_j |z_j|² (1 − s^{4+12b_1}v²)^{b_j} (1 + s^{4+12b_1}v²)^{α_j}
/// θ_j(s² − s^{6+12b_1}v²) + S` to the achievable order.
pub fn solve_blowup<C: Scalar>(nf: &NormalFormData<C>) -> Result<BlowupData<C>> {
    solve_blowup_to(nf, None)
}

/// As [`solve_blowup`], failing if `M̂` cannot be determined to `mhat_trunc`.
pub fn solve_blowup_to<C: Scalar>(nf: &NormalFormData<C>, mhat_trunc: Option<u32>) -> Result<BlowupData<C>> {
    let n = nf.n();
    let (alphas, threshold) = blowup_exponents(&nf.exponents);
    let k = achievable_eta_order(nf);
    let eta_trunc = match mhat_trunc {
        Some(m) if m > k + threshold => {
            return Err(Error::TruncationBudget {
                requested: m,
                achievable: k + threshold,
            })
        }
        Some(m) => m.saturating_sub(threshold),
        None => k,
    };
    let e = preimage_equation(nf)?;
    let pv = preimage_vars(n);
    let tol = nf.r.tol();
    let bound = e.trunc();
    // t = s^T v, then divide by s^{T+1}; the equation becomes F(v) = 0 with
    // F = RHS(v) − 2v
    let mut imgs: Vec<Series<C>> = (0..=2 * n).map(|i| Series::var(&pv, i, bound).with_tol(tol)).collect();
    imgs.push(Series::var(&pv, 2 * n + 1, bound).mul_var_power(2 * n, threshold as u16).with_trunc(bound));
    let f = e.compose(&imgs)?.div_var_power(2 * n, threshold as u16 + 1)?;
    let f = f.with_trunc(f.trunc().min(eta_trunc));
    let rv = real_vars(n);
    let mut subs: Vec<Series<C>> = (0..=2 * n).map(|i| Series::var(&rv, i, eta_trunc).with_tol(tol)).collect();
    let half = C::from_ratio(1, 2);
    let mut v = Series::zero(&rv, eta_trunc).with_tol(tol);
    for _ in 0..=eta_trunc {
        subs.truncate(2 * n + 1);
        subs.push(v.clone());
        let next = &v + &f.compose(&subs)?.scale(&half);
        if (&next - &v).is_negligible(tol) {
            v = next;
            break;
        }
        v = next;
    }
    let phihat = v.mul_var_power(2 * n, threshold as u16);
    let bd = BlowupData {
        alphas,
        threshold,
        eta: v.clone(),
        mhat: RealGraph::new(n, phihat)?,
    };
    bd.check_invariants(&nf.epsilons, &nf.exponents)?;
    Ok(bd)
}

/// `Im W − φ(Z, Z̄, Re W)` with `(Z, W) = ℬ(z, w)` and `w = s + i s^T η`,
/// in the variables of `M̂`. Vanishes iff `M̂ ⊂ ℬ^{-1}(M)` to its order.
pub fn membership_residual<C: Scalar>(nf: &NormalFormData<C>, bd: &BlowupData<C>) -> Result<Series<C>> {
    let n = nf.n();
    let phi = nf.reconstruct()?;
    let rv = real_vars(n);
    let tol = bd.eta.tol();
    let trunc = bd.mhat.trunc();
    let s = Series::var(&rv, 2 * n, trunc).with_tol(tol);
    let i = C::imag_unit();
    let lift = bd.mhat.series().scale(&i);
    let w = &s + &lift;
    let wb = &s - &lift;
    let w2 = w.pow(2);
    let wb2 = wb.pow(2);
    let re_w = (&w2 + &wb2).scale(&C::from_ratio(1, 2));
    let im_w = (&w2 - &wb2).scale(&i.neg().mul(&C::from_ratio(1, 2)));
    let mut imgs = Vec::with_capacity(2 * n + 1);
    for (j, &a) in bd.alphas.iter().enumerate() {
        imgs.push(&Series::var(&rv, j, trunc).with_tol(tol) * &w.pow(a));
    }
    for (j, &a) in bd.alphas.iter().enumerate() {
        imgs.push(&Series::var(&rv, n + j, trunc).with_tol(tol) * &wb.pow(a));
    }
    imgs.push(re_w);
    let on = phi.series().compose(&imgs)?;
    Ok(&im_w - &on)
}

/// `M̂` as a complex defining function in literal good nonminimal form, the
/// rescaling that achieves it, and the recognized form.
pub fn mhat_good_form<C: Scalar>(
    bd: &BlowupData<C>,
) -> Result<(ComplexDefining<C>, HoloMap<C>, GoodNonminimalForm<C>)> {
    let q = real_to_complex(&bd.mhat)?;
    let (q, change, form) = normalize_good(&q)?;
    if form.m != bd.threshold {
        return Err(Error::NotGoodShape(format!(
            "leading τ-power {} differs from the threshold {}",
            form.m, bd.threshold
        )));
    }
    Ok((q, change, form))
}
