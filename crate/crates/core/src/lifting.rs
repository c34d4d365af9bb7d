//! Lifting maps tangent to the identity through the blow-up:
//! `ℬ ∘ Ĥ = H ∘ ℬ` with `Ĝ = w·√(1 + Ψ∘ℬ)` and `F̂_j = (F_j∘ℬ)/Ĝ^{α_j}`.

use std::fmt;

use crate::blowup::{blowup_map, BlowupData};
use crate::error::{Error, Result};
use crate::holomap::HoloMap;
use crate::hypersurface::{complex_to_real, first_defect_order, maps_into, pull_back, real_to_complex, ComplexDefining};
use crate::scalar::Scalar;
use crate::series::Series;

/// A map `H = (F, G)` split into its tangential and normal components.
pub type SplitMap<C> = HoloMap<C>;

/// Which square root of `G∘ℬ` becomes `Ĝ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Linear part `+w`; the only branch tangent to the identity.
    Principal,
    Opposite,
}

/// `Ψ = G/w − 1`.
fn psi<C: Scalar>(h: &HoloMap<C>) -> Result<Series<C>> {
    let n = h.n();
    let q = h.g.div_var_power(n, 1).map_err(|_| Error::JetHypothesis("G(z, 0) ≢ 0".into()))?;
    Ok(&q - &Series::one(h.g.vars(), q.trunc()).with_tol(h.g.tol()))
}

/// Builds `Ĥ` on the requested branch without checking hypotheses.
pub fn lift_with_branch<C: Scalar>(h: &HoloMap<C>, alphas: &[u32], branch: Branch) -> Result<HoloMap<C>> {
    let n = h.n();
    if alphas.len() != n {
        return Err(Error::Invalid(format!("{} blow-up exponents for a map of dimension {n}", alphas.len())));
    }
    let b = blowup_map::<C>(alphas, 2 * h.trunc() + 2).with_tol(h.g.tol());
    let imgs = b.components();
    let unit = &Series::one(h.g.vars(), 2 * h.trunc()).with_tol(h.g.tol()) + &psi(h)?.compose(&imgs)?;
    let root = unit.sqrt_unit()?;
    let sign = match branch {
        Branch::Principal => C::one(),
        Branch::Opposite => C::one().neg(),
    };
    let g = root.mul_var_power(n, 1).scale(&sign);
    let mut f = Vec::with_capacity(n);
    for (j, &a) in alphas.iter().enumerate() {
        let fb = h.f[j].compose(&imgs)?.div_var_power(n, a as u16).map_err(|_| {
            Error::JetHypothesis(format!("F{}∘ℬ is not divisible by w^{a}", j + 1))
        })?;
        let corr = unit.pow_unit(-(a as i64), 2)?;
        let s = if branch == Branch::Opposite && a % 2 == 1 { sign.clone() } else { C::one() };
        f.push((&fb * &corr).scale(&s));
    }
    let out = HoloMap::new(f, g)?;
    Ok(out.with_trunc(out.trunc()))
}

/// Lowest `w`-exponent in `Ĝ − w`.
pub fn normal_defect_w_order<C: Scalar>(hhat: &HoloMap<C>) -> Option<u16> {
    let n = hhat.n();
    let w = Series::var(hhat.g.vars(), n, hhat.trunc());
    (&hhat.g - &w).with_trunc(hhat.trunc()).valuation_in(n)
}

/// The unique `Ĥ` with `ℬ∘Ĥ = H∘ℬ` and `j^ℓ Ĥ = j^ℓ Id`.
///
/// Requires `ℓ ≥ max{α_n, 3 + 6b_1}` and `j^ℓ H = j^ℓ Id`. The result is
/// determined to order `2N + 1 − max α_j` when `H` is known to order `N`.
pub fn lift_map<C: Scalar>(h: &HoloMap<C>, bd: &BlowupData<C>, ell: u32) -> Result<HoloMap<C>> {
    let amax = bd.alphas.iter().copied().max().unwrap_or(0);
    if ell < amax.max(bd.threshold) {
        return Err(Error::JetHypothesis(format!(
            "ℓ = {ell} is below max(α_n, 3 + 6b_1) = {}",
            amax.max(bd.threshold)
        )));
    }
    if h.trunc() < ell {
        return Err(Error::TruncationBudget {
            requested: ell,
            achievable: h.trunc(),
        });
    }
    if !h.tangent_to_identity(ell)? {
        return Err(Error::JetHypothesis(format!(
            "H differs from the identity at order {}",
            h.identity_defect().unwrap_or(0)
        )));
    }
    let hhat = lift_with_branch(h, &bd.alphas, Branch::Principal)?;
    if hhat.trunc() < ell {
        return Err(Error::TruncationBudget {
            requested: ell,
            achievable: hhat.trunc(),
        });
    }
    let sq = check_commuting_square(h, &hhat, &bd.alphas)?;
    if !sq.holds() {
        return Err(Error::Invalid(format!("commuting square fails: {sq}")));
    }
    if !hhat.tangent_to_identity(ell)? {
        return Err(Error::Invalid("lift is not tangent to the identity to order ℓ".into()));
    }
    if let Some(k) = normal_defect_w_order(&hhat) {
        if (k as u32) < 2 * ell + 1 {
            return Err(Error::Invalid(format!("Ĝ − w has a w^{k} term")));
        }
    }
    Ok(hhat)
}

/// Outcome of comparing `ℬ∘Ĥ` with `H∘ℬ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareReport {
    pub trunc: u32,
    /// `(component, order)` of the first mismatch, components numbered
    /// `1 … n` for `F` and `n + 1` for `G`.
    pub defect: Option<(usize, u32)>,
}

impl SquareReport {
    pub fn holds(&self) -> bool {
        self.defect.is_none()
    }
}

impl fmt::Display for SquareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.defect {
            None => write!(f, "B∘Ĥ = H∘B to order {}", self.trunc),
            Some((c, k)) => write!(f, "component {c} differs at order {k} (checked to {})", self.trunc),
        }
    }
}

pub fn check_commuting_square<C: Scalar>(h: &HoloMap<C>, hhat: &HoloMap<C>, alphas: &[u32]) -> Result<SquareReport> {
    let b = blowup_map::<C>(alphas, 2 * h.trunc().max(hhat.trunc()) + 2).with_tol(h.g.tol());
    let left = b.compose(hhat)?;
    let right = h.compose(&b)?;
    let trunc = left.trunc().min(right.trunc());
    let tol = h.g.tol();
    let defect = left
        .components()
        .iter()
        .zip(right.components())
        .enumerate()
        .filter_map(|(c, (l, r))| {
            (l - &r)
                .with_trunc(trunc)
                .first_defect(tol)
                .map(|(m, _)| (c + 1, m.degree()))
        })
        .min_by_key(|&(c, k)| (k, c));
    Ok(SquareReport { trunc, defect })
}

/// Whether `H` maps the hypersurface into itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreserveReport {
    pub trunc: u32,
    pub defect_order: Option<u32>,
}

impl PreserveReport {
    pub fn holds(&self) -> bool {
        self.defect_order.is_none()
    }
}

impl fmt::Display for PreserveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.defect_order {
            None => write!(f, "preserved to order {}", self.trunc),
            Some(k) => write!(f, "not preserved: first defect at order {k} (checked to {})", self.trunc),
        }
    }
}

pub fn check_preserves<C: Scalar>(h: &HoloMap<C>, q: &ComplexDefining<C>) -> Result<PreserveReport> {
    let r = maps_into(h, q, q)?;
    Ok(PreserveReport {
        trunc: r.trunc(),
        defect_order: first_defect_order(h, q, q)?,
    })
}

/// `Ĥ` together with both certifications of `Ĥ(M̂) ⊂ M̂`.
#[derive(Clone, Debug)]
pub struct LiftOutcome<C: Scalar> {
    pub hhat: HoloMap<C>,
    pub square: SquareReport,
    /// Direct substitution into the defining equation of `M̂`.
    pub preserves: PreserveReport,
    /// Largest coefficient of `φ̂ − φ′`, where `φ′` is the graph function of
    /// `Ĥ^{-1}(M̂)` recomputed from scratch.
    pub image_residual: f64,
}

/// Lifts an `M`-preserving `H` and certifies the lift preserves `M̂`.
/// `m` is `M` in the normal-form chart of `bd`.
pub fn lift_pipeline<C: Scalar>(
    h: &HoloMap<C>,
    m: &ComplexDefining<C>,
    bd: &BlowupData<C>,
    ell: u32,
) -> Result<LiftOutcome<C>> {
    let pre = check_preserves(h, m).map_err(|e| e.at("precondition"))?;
    if let Some(order) = pre.defect_order {
        return Err(Error::NotPreserving { order }.at("precondition"));
    }
    let hhat = lift_map(h, bd, ell).map_err(|e| e.at("lift"))?;
    let square = check_commuting_square(h, &hhat, &bd.alphas)?;
    let qhat = real_to_complex(&bd.mhat).map_err(|e| e.at("certify"))?;
    let preserves = check_preserves(&hhat, &qhat).map_err(|e| e.at("certify"))?;
    let image_residual = image_residual(&hhat, &qhat).map_err(|e| e.at("certify"))?;
    Ok(LiftOutcome {
        hhat,
        square,
        preserves,
        image_residual,
    })
}

/// Recomputes the hypersurface `Ĥ^{-1}(M̂)` as a graph and compares it
/// with `M̂` itself, to the common order.
pub fn image_residual<C: Scalar>(hhat: &HoloMap<C>, qhat: &ComplexDefining<C>) -> Result<f64> {
    let phi_new = complex_to_real(&pull_back(hhat, qhat)?)?;
    let phi_old = complex_to_real(qhat)?;
    let t = phi_new.trunc().min(phi_old.trunc());
    Ok((&phi_new.series().with_trunc(t) - &phi_old.series().with_trunc(t)).max_abs_coeff())
}
