use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::holomap::{map_vars, HoloMap};
use crate::hypersurface::{complex_vars, ComplexDefining};
use crate::scalar::{Backend, RealScalar, Scalar};
use crate::series::{monomials, Mono, Series};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    /// Relative pivot threshold for rank decisions on the floating backend.
    pub tau_rank: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { tau_rank: 1e-20 }
    }
}

/// Kernel of the infinitesimal system seen through the unknowns of one
/// degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeStats {
    pub degree: u32,
    pub unknowns: usize,
    /// Dimension of the kernel projected onto the degree-`degree` unknowns.
    pub free: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every degree in `jet + 1..=through` is forced to vanish.
    Determined { through: u32 },
    Free { degree: u32, dim: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport<C: Scalar> {
    pub n: usize,
    pub jet: u32,
    pub trunc: u32,
    pub backend: Backend,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub degrees: Vec<DegreeStats>,
    pub verdict: Verdict,
    /// Infinitesimal maps `(f, g)` spanning the free directions, if any.
    pub directions: Vec<HoloMap<C>>,
}

impl<C: Scalar> ProbeReport<C> {
    pub fn is_determined(&self) -> bool {
        matches!(self.verdict, Verdict::Determined { .. })
    }

    pub fn kernel_dim(&self) -> usize {
        self.unknowns - self.rank
    }
}

impl<C: Scalar> fmt::Display for ProbeReport<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "probe: n {} ; jet {} ; trunc {} ; backend {}",
            self.n, self.jet, self.trunc, self.backend
        )?;
        writeln!(
            f,
            "system: unknowns {} ; equations {} ; rank {} ; kernel {}",
            self.unknowns,
            self.equations,
            self.rank,
            self.kernel_dim()
        )?;
        for d in &self.degrees {
            writeln!(f, "degree {}: unknowns {} ; free {}", d.degree, d.unknowns, d.free)?;
        }
        match self.verdict {
            Verdict::Determined { through } => writeln!(
                f,
                "verdict: determined by the {}-jet through degree {through} at trunc {}",
                self.jet, self.trunc
            )?,
            Verdict::Free { degree, dim } => writeln!(
                f,
                "verdict: {dim} free direction(s) at degree {degree} at trunc {}",
                self.trunc
            )?,
        }
        let names = map_vars(self.n);
        for (k, h) in self.directions.iter().enumerate() {
            writeln!(f, "direction {}:", k + 1)?;
            for (c, s) in h.components().iter().enumerate() {
                let comp = if c < self.n { format!("F{}", c + 1) } else { "G".to_string() };
                for (m, v) in s.terms() {
                    writeln!(f, "  {comp} {} : {}", m.display(&names), v.fmt_text())?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Unknown {
    comp: usize,
    mono: Mono,
    imag: bool,
}

/// Real-linear system `L(h) = 0` in the coefficients of `h` of degree
/// `lo..=hi`, with equations up to degree `hi`, where
/// `L(h) = g(z,Q) − Σ Q_{z_j} f_j(z,Q) − Σ Q_{χ_j} f̄_j(χ,τ) − Q_τ ḡ(χ,τ)`.
struct System<C: Scalar> {
    unknowns: Vec<Unknown>,
    rows: Vec<Vec<C::Real>>,
}

fn build_system<C: Scalar>(q: &ComplexDefining<C>, lo: u32, hi: u32) -> System<C> {
    let n = q.n;
    let cv = complex_vars(n);
    let qq = q.q.with_trunc(hi);
    let tol = qq.tol();
    let mut qpow = vec![Series::one(&cv, hi).with_tol(tol)];
    for b in 1..=hi as usize {
        let next = &qpow[b - 1] * &qq;
        qpow.push(next);
    }
    let dz: Vec<Series<C>> = (0..n).map(|j| qq.partial(j, 1).with_trunc(hi)).collect();
    let dchi: Vec<Series<C>> = (0..n).map(|j| qq.partial(n + j, 1).with_trunc(hi)).collect();
    let dtau = qq.partial(2 * n, 1).with_trunc(hi);

    let mut unknowns = Vec::new();
    for mono in monomials(n + 1, lo, hi) {
        for comp in 0..=n {
            for imag in [false, true] {
                unknowns.push(Unknown {
                    comp,
                    mono: mono.clone(),
                    imag,
                });
            }
        }
    }
    let mut index: BTreeMap<Mono, usize> = BTreeMap::new();
    let mut cols: Vec<Vec<(usize, C)>> = Vec::with_capacity(unknowns.len());
    for u in &unknowns {
        let c = if u.imag { C::imag_unit() } else { C::one() };
        let mut zpart = Mono::one(2 * n + 1);
        let mut anti = Mono::one(2 * n + 1);
        for j in 0..n {
            zpart.0[j] = u.mono.exp(j);
            anti.0[n + j] = u.mono.exp(j);
        }
        anti.0[2 * n] = u.mono.exp(n);
        let hol = qpow[u.mono.exp(n) as usize].mul_monomial(&zpart, &c);
        let bar = Series::monomial(&cv, hi, anti, c.conj()).with_tol(tol);
        let image = if u.comp < n {
            let t = &(&dz[u.comp] * &hol) + &(&dchi[u.comp] * &bar);
            t.scale(&C::one().neg())
        } else {
            &hol - &(&dtau * &bar)
        };
        let mut col = Vec::new();
        for (m, v) in image.terms() {
            if m.degree() > hi || v.is_negligible(tol) {
                continue;
            }
            let next = index.len();
            let r = *index.entry(m.clone()).or_insert(next);
            col.push((r, v.clone()));
        }
        cols.push(col);
    }
    let zero = <C::Real as RealScalar>::zero();
    let mut rows = vec![vec![zero; unknowns.len()]; 2 * index.len()];
    for (k, col) in cols.into_iter().enumerate() {
        for (r, v) in col {
            rows[2 * r][k] = v.re();
            rows[2 * r + 1][k] = v.im();
        }
    }
    System { unknowns, rows }
}

fn to_map<C: Scalar>(n: usize, trunc: u32, unknowns: &[Unknown], v: &[C::Real], with_identity: bool) -> HoloMap<C> {
    let vars = map_vars(n);
    let mut comps: Vec<Series<C>> = (0..=n)
        .map(|j| {
            if with_identity {
                Series::var(&vars, j, trunc)
            } else {
                Series::zero(&vars, trunc)
            }
        })
        .collect();
    let zero = <C::Real as RealScalar>::zero();
    for (u, x) in unknowns.iter().zip(v) {
        let c = if u.imag {
            C::from_parts(zero.clone(), x.clone())
        } else {
            C::from_real(x.clone())
        };
        comps[u.comp].add_term(u.mono.clone(), c);
    }
    let g = comps.pop().expect("n + 1 components");
    HoloMap { f: comps, g }
}

/// `ν` with `ν + 1` the order of `Q − τ`.
fn levi_lag<C: Scalar>(q: &ComplexDefining<C>) -> Result<u32> {
    let tau = Series::var(q.q.vars(), 2 * q.n, q.trunc());
    let rest = &q.q - &tau;
    match rest.valuation() {
        Some(v) if v >= 2 => Ok(v - 1),
        _ => Err(Error::Invalid(
            "Q − τ must be nonzero and vanish to second order".into(),
        )),
    }
}

/// Highest degree the probe decides at truncation `trunc`: a direction of
/// degree `d` is first obstructed at degree `2d + 2(ν − 1)`.
pub fn decidable_degree<C: Scalar>(q: &ComplexDefining<C>) -> Result<u32> {
    let nu = levi_lag(q)?;
    Ok((q.trunc() / 2 + 1).saturating_sub(nu))
}

/// Decides whether an infinitesimal automorphism of `q` with vanishing
/// `k`-jet vanishes through the decidable degree. The kernel of the
/// linearized equation in all unknowns of degree `k + 1..=trunc` is
/// projected onto each degree in turn.
pub fn jet_determination_probe<C: Scalar>(q: &ComplexDefining<C>, k: u32, opts: ProbeOptions) -> Result<ProbeReport<C>> {
    let n = q.n;
    let trunc = q.trunc();
    let dmax = decidable_degree(q)?;
    if dmax <= k {
        let nu = levi_lag(q)?;
        return Err(Error::TruncationBudget {
            requested: 2 * (k + nu),
            achievable: trunc,
        });
    }
    let sys = build_system(q, k + 1, trunc);
    let ker = C::Real::nullspace(&sys.rows, sys.unknowns.len(), opts.tau_rank);
    let scale = ker
        .basis
        .iter()
        .flat_map(|v| v.iter().map(|x| x.abs_f64()))
        .fold(0.0, f64::max);
    let negligible = opts.tau_rank * scale;
    let mut degrees = Vec::new();
    let mut verdict = Verdict::Determined { through: dmax };
    let mut directions = Vec::new();
    for d in k + 1..=dmax {
        let front: Vec<usize> = (0..sys.unknowns.len())
            .filter(|&i| sys.unknowns[i].mono.degree() == d)
            .collect();
        let mut chosen: Vec<usize> = Vec::new();
        let mut proj_rows: Vec<Vec<C::Real>> = Vec::new();
        for (b, v) in ker.basis.iter().enumerate() {
            let row: Vec<C::Real> = front.iter().map(|&i| v[i].clone()).collect();
            if row.iter().all(|x| x.abs_f64() <= negligible) {
                continue;
            }
            proj_rows.push(row);
            let r = C::Real::nullspace(&proj_rows, front.len(), opts.tau_rank).rank;
            if r > chosen.len() {
                chosen.push(b);
            } else {
                proj_rows.pop();
            }
        }
        degrees.push(DegreeStats {
            degree: d,
            unknowns: front.len(),
            free: chosen.len(),
        });
        if !chosen.is_empty() {
            verdict = Verdict::Free {
                degree: d,
                dim: chosen.len(),
            };
            directions = chosen
                .iter()
                .map(|&b| to_map(n, trunc, &sys.unknowns, &ker.basis[b], false))
                .collect();
            break;
        }
    }
    Ok(ProbeReport {
        n,
        jet: k,
        trunc,
        backend: C::BACKEND,
        unknowns: sys.unknowns.len(),
        equations: sys.rows.len(),
        rank: ker.rank,
        degrees,
        verdict,
        directions,
    })
}

/// A basis of truncated automorphisms `Id + h` of `q` with `h` of order at
/// least `d`. Requires `2d > trunc`, where the linearized equation is exact.
pub fn kernel_automorphisms<C: Scalar>(q: &ComplexDefining<C>, d: u32, opts: ProbeOptions) -> Result<Vec<HoloMap<C>>> {
    let trunc = q.trunc();
    if 2 * d <= trunc || d > trunc {
        return Err(Error::Invalid(format!(
            "kernel automorphisms need trunc < 2d and d <= trunc (d = {d}, trunc = {trunc})"
        )));
    }
    let sys = build_system(q, d, trunc);
    let ker = C::Real::nullspace(&sys.rows, sys.unknowns.len(), opts.tau_rank);
    Ok(ker
        .basis
        .iter()
        .map(|v| to_map(q.n, trunc, &sys.unknowns, v, true).with_tol(q.tol()))
        .collect())
}
