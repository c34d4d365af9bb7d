//! Unitary diagonalization of Hermitian matrix families `A(s)` at finite
//! order, by recursive block splitting.
//!
//! At each level the constant term is diagonalized by Jacobi rotations, the
//! family is block-diagonalized along the clusters of equal eigenvalues by
//! an order-by-order Sylvester solve, the block-diagonalizing similarity is
//! made unitary by its polar factor, and each cluster is recursed on after
//! dividing out `s`.

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, Mat, MatSeries};
use crate::scalar::{dd_div, CFloat, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RellichOptions {
    /// Eigenvalues of a constant term closer than this are one cluster.
    pub cluster_tol: f64,
    /// Coefficients at or below this are zero when reading branch valuations.
    pub zero_tol: f64,
    /// Reject families whose eigenvalue branches never split (unless the
    /// family is already diagonal).
    pub strict: bool,
}

impl Default for RellichOptions {
    fn default() -> Self {
        RellichOptions {
            cluster_tol: 1e-20,
            zero_tol: 1e-25,
            strict: true,
        }
    }
}

/// `U·A·U* = diag(d_1, …, d_n)` to the truncation order of `A`.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub u: MatSeries<CFloat>,
    /// Coefficients `d_j[k]` of `s^k` in each branch.
    pub d: Vec<Vec<CFloat>>,
    /// Groups of branches that agreed through the whole window.
    pub unsplit: Vec<Vec<usize>>,
}

impl Diagonalization {
    pub fn trunc(&self) -> u32 {
        self.u.trunc()
    }

    pub fn d_matrix(&self) -> MatSeries<CFloat> {
        let n = self.d.len();
        let mut out = MatSeries::zeros(n, self.trunc());
        for (k, m) in out.coeffs.iter_mut().enumerate() {
            for j in 0..n {
                m.set(j, j, self.d[j][k]);
            }
        }
        out
    }

    /// Largest coefficient of `U U* − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.u.n;
        self.u
            .mul(&self.u.adjoint())
            .sub(&MatSeries::identity(n, self.trunc()))
            .max_abs()
    }

    /// Largest coefficient of `U A U* − D`, and the largest off-diagonal
    /// coefficient of `U A U*`.
    pub fn residuals(&self, a: &MatSeries<CFloat>) -> (f64, f64) {
        let uau = self.u.mul(a).mul(&self.u.adjoint());
        (uau.sub(&self.d_matrix()).max_abs(), uau.max_off_diag())
    }

    /// `(valuation, sign, |leading coefficient|)` of branch `j`, `None` if
    /// it vanishes to the truncation order.
    pub fn branch_head(&self, j: usize, zero_tol: f64) -> Option<(u32, i8, f64)> {
        self.d[j]
            .iter()
            .enumerate()
            .find(|(_, c)| c.abs_f64() > zero_tol)
            .map(|(k, c)| (k as u32, if c.0.re.hi() > 0.0 { 1 } else { -1 }, c.abs_f64()))
    }
}

fn czero() -> Complex<TwoFloat> {
    Complex::new(TwoFloat::from(0.0), TwoFloat::from(0.0))
}

fn clusters(vals: &[TwoFloat], tol: f64) -> Vec<Vec<usize>> {
    let scale = vals.iter().map(|v| v.abs().hi()).fold(1.0, f64::max);
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        match out.last_mut() {
            Some(last) if (*v - vals[*last.last().expect("nonempty")]).abs().hi() <= tol * scale => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// `V (V* V)^{-1/2}`, the unitary polar factor of a near-unitary family.
fn polar(v: &MatSeries<CFloat>) -> MatSeries<CFloat> {
    v.mul(&v.adjoint().mul(v).inv_sqrt_unit())
}

struct Split {
    u: MatSeries<CFloat>,
    d: Vec<Vec<CFloat>>,
    unsplit: Vec<Vec<usize>>,
}

fn recurse(a: &MatSeries<CFloat>, tol: f64) -> Split {
    let n = a.n;
    let t = a.trunc();
    if n == 1 {
        return Split {
            u: MatSeries::identity(1, t),
            d: vec![a.coeffs.iter().map(|m| *m.get(0, 0)).collect()],
            unsplit: Vec::new(),
        };
    }
    let (vals, e) = hermitian_eigen(&a.coeffs[0]);
    let e_adj = MatSeries::constant(e.adjoint(), t);
    let mut b = e_adj.mul(a).mul(&MatSeries::constant(e.clone(), t));
    b.coeffs[0] = Mat::from_fn(n, n, |i, j| if i == j { CFloat::from_real(vals[i]) } else { CFloat(czero()) });
    let groups = clusters(&vals, tol);

    if groups.len() == 1 {
        if t == 0 {
            return Split {
                u: e_adj,
                d: vals.iter().map(|v| vec![CFloat::from_real(*v)]).collect(),
                unsplit: vec![(0..n).collect()],
            };
        }
        let inner = recurse(&b.shift_down(), tol);
        let v = polar(&inner.u.with_trunc(t));
        let d = vals
            .iter()
            .zip(inner.d)
            .map(|(l, rest)| {
                let mut c = vec![CFloat::from_real(*l)];
                c.extend(rest);
                c
            })
            .collect();
        return Split {
            u: v.mul(&e_adj),
            d,
            unsplit: inner.unsplit,
        };
    }

    let w = block_diagonalizer(&b, &vals, &groups);
    let c = w.adjoint().mul(&b).mul(&w);
    let mut v = MatSeries::zeros(n, t);
    let mut d = vec![Vec::new(); n];
    let mut unsplit = Vec::new();
    for g in &groups {
        let sub = recurse(&c.sub_block(g), tol);
        for (k, m) in sub.u.coeffs.iter().enumerate() {
            for (i, &gi) in g.iter().enumerate() {
                for (j, &gj) in g.iter().enumerate() {
                    v.coeffs[k].set(gi, gj, *m.get(i, j));
                }
            }
        }
        for (i, &gi) in g.iter().enumerate() {
            d[gi] = sub.d[i].clone();
        }
        unsplit.extend(sub.unsplit.into_iter().map(|blk| blk.into_iter().map(|i| g[i]).collect()));
    }
    Split {
        u: v.mul(&w.adjoint()).mul(&e_adj),
        d,
        unsplit,
    }
}

/// Unitary `W(s)` with `W* B W` block-diagonal along `groups`, where `B(0)`
/// is the diagonal matrix of `vals`.
fn block_diagonalizer(b: &MatSeries<CFloat>, vals: &[TwoFloat], groups: &[Vec<usize>]) -> MatSeries<CFloat> {
    let n = b.n;
    let t = b.trunc() as usize;
    let mut cluster = vec![0usize; n];
    for (gi, g) in groups.iter().enumerate() {
        for &i in g {
            cluster[i] = gi;
        }
    }
    let mut x = MatSeries::identity(n, t as u32);
    let mut dd = MatSeries::zeros(n, t as u32);
    dd.coeffs[0] = b.coeffs[0].clone();
    for k in 1..=t {
        let mut kmat = b.coeffs[k].clone();
        for j in 1..k {
            kmat = kmat.add(&b.coeffs[k - j].mul(&x.coeffs[j]));
            kmat = kmat.sub(&x.coeffs[j].mul(&dd.coeffs[k - j]));
        }
        for p in 0..n {
            for q in 0..n {
                let kv = kmat.get(p, q).0;
                if cluster[p] == cluster[q] {
                    dd.coeffs[k].set(p, q, CFloat(kv));
                } else {
                    let gap = vals[p] - vals[q];
                    let xv = Complex::new(-dd_div(kv.re, gap), -dd_div(kv.im, gap));
                    x.coeffs[k].set(p, q, CFloat(xv));
                }
            }
        }
    }
    polar(&x)
}

/// Diagonalizes a Hermitian family. Branches are ordered by valuation
/// (descending), then sign (`+` first), then leading modulus (descending).
pub fn rellich_diagonalize(a: &MatSeries<CFloat>, opts: RellichOptions) -> Result<Diagonalization> {
    let n = a.n;
    let herm = a.sub(&a.adjoint()).max_abs();
    if herm > opts.zero_tol {
        return Err(Error::Invalid(format!("family is not Hermitian (defect {herm:e})")));
    }
    let split = recurse(a, opts.cluster_tol);
    let mut diag = Diagonalization {
        u: split.u,
        d: split.d,
        unsplit: split.unsplit,
    };
    let already_diagonal = a.max_off_diag() <= opts.zero_tol;
    if opts.strict && !already_diagonal {
        if let Some(block) = diag.unsplit.first() {
            return Err(Error::UnresolvableDegeneracy {
                trunc: a.trunc(),
                block: block.clone(),
            });
        }
    }
    if already_diagonal {
        // keep the canonical choice U = I
        diag.u = MatSeries::identity(n, a.trunc());
        diag.d = (0..n).map(|j| a.coeffs.iter().map(|m| *m.get(j, j)).collect()).collect();
    }
    // real parts only: imaginary parts of branches are roundoff
    for branch in diag.d.iter_mut() {
        for c in branch.iter_mut() {
            *c = CFloat::from_real(c.0.re);
        }
    }
    let key = |j: usize| -> (i64, i8, f64) {
        match diag.branch_head(j, opts.zero_tol) {
            Some((b, e, c)) => (-(b as i64), -e, -c),
            None => (i64::MIN, 0, 0.0),
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| key(i).partial_cmp(&key(j)).unwrap_or(std::cmp::Ordering::Equal));
    let pos: Vec<usize> = {
        let mut p = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            p[old] = new;
        }
        p
    };
    let u = MatSeries {
        n,
        coeffs: diag
            .u
            .coeffs
            .iter()
            .map(|m| Mat::from_fn(n, n, |i, j| *m.get(order[i], j)))
            .collect(),
    };
    Ok(Diagonalization {
        u,
        d: order.iter().map(|&j| diag.d[j].clone()).collect(),
        unsplit: diag
            .unsplit
            .iter()
            .map(|b| b.iter().map(|&i| pos[i]).collect())
            .collect(),
    })
}
