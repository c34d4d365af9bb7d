//! Dense linear algebra used by the diagonalization and the jet probe.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use twofloat::TwoFloat;

use crate::scalar::{dd_div, CFloat, Scalar, Tolerance};
use crate::series::{Mono, Series, Vars};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<C: Scalar> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C>,
}

impl<C: Scalar> Mat<C> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &C {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: C) {
        self.data[i * self.cols + j] = c;
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix shape mismatch");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero_exact() {
                    continue;
                }
                for j in 0..o.cols {
                    let v = out.get(i, j).add(&a.mul(o.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.mul(c)).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    /// Largest modulus among off-diagonal entries.
    pub fn max_off_diag(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    m = m.max(self.get(i, j).abs_f64());
                }
            }
        }
        m
    }

    pub fn is_diagonal(&self, tol: Tolerance) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_negligible(tol)))
    }

    /// Rows and columns selected by `idx`.
    pub fn sub_block(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }
}

/// A square matrix whose entries are power series in one variable, stored
/// as its coefficient matrices `M_0, M_1, …, M_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatSeries<C: Scalar> {
    pub n: usize,
    pub coeffs: Vec<Mat<C>>,
}

impl<C: Scalar> MatSeries<C> {
    pub fn zeros(n: usize, trunc: u32) -> Self {
        MatSeries {
            n,
            coeffs: vec![Mat::zeros(n, n); trunc as usize + 1],
        }
    }

    pub fn identity(n: usize, trunc: u32) -> Self {
        let mut m = Self::zeros(n, trunc);
        m.coeffs[0] = Mat::identity(n);
        m
    }

    pub fn constant(m: Mat<C>, trunc: u32) -> Self {
        let mut out = Self::zeros(m.rows, trunc);
        out.coeffs[0] = m;
        out
    }

    pub fn trunc(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    /// Reads the entries of `entries[i][j]`, a series in the single variable
    /// of index `var`; all other variables must be absent.
    pub fn from_series(entries: &[Vec<Series<C>>], var: usize, trunc: u32) -> Self {
        let n = entries.len();
        let mut out = Self::zeros(n, trunc);
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                for (m, c) in e.terms() {
                    let k = m.exp(var) as usize;
                    if k <= trunc as usize {
                        out.coeffs[k].set(i, j, c.clone());
                    }
                }
            }
        }
        out
    }

    /// Entry `(i, j)` as a series in variable `var` of `vars`.
    pub fn entry_series(&self, i: usize, j: usize, vars: &Vars, var: usize, tol: Tolerance) -> Series<C> {
        let mut s = Series::zero(vars, self.trunc()).with_tol(tol);
        for (k, m) in self.coeffs.iter().enumerate() {
            s.add_term(Mono::var(vars.len(), var, k as u16), m.get(i, j).clone());
        }
        s
    }

    pub fn mul(&self, o: &Self) -> Self {
        let t = self.trunc().min(o.trunc()) as usize;
        let mut out = Self::zeros(self.n, t as u32);
        for (a, ma) in self.coeffs.iter().enumerate().take(t + 1) {
            for (b, mb) in o.coeffs.iter().enumerate().take(t + 1 - a) {
                out.coeffs[a + b] = out.coeffs[a + b].add(&ma.mul(mb));
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let t = self.trunc().min(o.trunc()) as usize;
        MatSeries {
            n: self.n,
            coeffs: (0..=t).map(|k| self.coeffs[k].add(&o.coeffs[k])).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let t = self.trunc().min(o.trunc()) as usize;
        MatSeries {
            n: self.n,
            coeffs: (0..=t).map(|k| self.coeffs[k].sub(&o.coeffs[k])).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        MatSeries {
            n: self.n,
            coeffs: self.coeffs.iter().map(|m| m.scale(c)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        MatSeries {
            n: self.n,
            coeffs: self.coeffs.iter().map(Mat::adjoint).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        MatSeries {
            n: self.n,
            coeffs: self.coeffs.iter().map(Mat::transpose).collect(),
        }
    }

    /// Conjugates every coefficient without transposing.
    pub fn conj(&self) -> Self {
        MatSeries {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .map(|m| Mat::from_fn(m.rows, m.cols, |i, j| m.get(i, j).conj()))
                .collect(),
        }
    }

    pub fn with_trunc(&self, trunc: u32) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(trunc as usize + 1, Mat::zeros(self.n, self.n));
        MatSeries { n: self.n, coeffs }
    }

    /// `(M - M_0) / s`, one order shorter.
    pub fn shift_down(&self) -> Self {
        MatSeries {
            n: self.n,
            coeffs: self.coeffs[1..].to_vec(),
        }
    }

    /// `(I + E)^{-1/2}` for `self = I + E` with `E(0) = 0`.
    pub fn inv_sqrt_unit(&self) -> Self {
        let t = self.trunc();
        let mut e = self.clone();
        e.coeffs[0] = Mat::zeros(self.n, self.n);
        let mut out = Self::identity(self.n, t);
        let mut term = Self::identity(self.n, t);
        let mut c = C::one();
        for k in 0..t as i64 {
            c = c.mul(&C::from_ratio(-1 - 2 * k, 2 * (k + 1)));
            term = term.mul(&e);
            out = out.add(&term.scale(&c));
        }
        out
    }

    pub fn sub_block(&self, idx: &[usize]) -> Self {
        MatSeries {
            n: idx.len(),
            coeffs: self.coeffs.iter().map(|m| m.sub_block(idx)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Mat::max_abs).fold(0.0, f64::max)
    }

    pub fn max_off_diag(&self) -> f64 {
        self.coeffs.iter().map(Mat::max_off_diag).fold(0.0, f64::max)
    }
}

fn dd_abs(c: &Complex<TwoFloat>) -> TwoFloat {
    (c.re * c.re + c.im * c.im).sqrt()
}

/// Eigen-decomposition `A = V·diag(λ)·V*` of a Hermitian matrix by cyclic
/// complex Jacobi rotations in double-double arithmetic. Eigenvalues are
/// returned in ascending order with matching eigenvector columns.
pub fn hermitian_eigen(a: &Mat<CFloat>) -> (Vec<TwoFloat>, Mat<CFloat>) {
    let n = a.rows;
    let zero = TwoFloat::from(0.0);
    let one = TwoFloat::from(1.0);
    let mut h: Vec<Complex<TwoFloat>> = (0..n * n).map(|k| a.data[k].0).collect();
    let mut v: Vec<Complex<TwoFloat>> = (0..n * n)
        .map(|k| if k / n == k % n { Complex::new(one, zero) } else { Complex::new(zero, zero) })
        .collect();
    let scale = h.iter().map(|c| dd_abs(c).hi()).fold(0.0, f64::max).max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(dd_abs(&h[p * n + q]).hi());
            }
        }
        if off <= 1e-34 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let hpq = h[p * n + q];
                let b = dd_abs(&hpq);
                if b.hi() <= 1e-36 * scale {
                    continue;
                }
                // phase e^{-iφ} with h_pq = b e^{iφ}
                let ph = Complex::new(dd_div(hpq.re, b), -dd_div(hpq.im, b));
                let app = h[p * n + p].re;
                let aqq = h[q * n + q].re;
                let tau = dd_div(aqq - app, TwoFloat::from(2.0) * b);
                let t = if tau.hi() >= 0.0 {
                    dd_div(one, tau + (one + tau * tau).sqrt())
                } else {
                    -dd_div(one, -tau + (one + tau * tau).sqrt())
                };
                let c = dd_div(one, (one + t * t).sqrt());
                let s = t * c;
                // G = Φ·R acting on columns p, q
                let g_pp = Complex::new(c, zero);
                let g_pq = Complex::new(s, zero);
                let g_qp = ph * Complex::new(-s, zero);
                let g_qq = ph * Complex::new(c, zero);
                // H ← H·G
                for k in 0..n {
                    let hkp = h[k * n + p];
                    let hkq = h[k * n + q];
                    h[k * n + p] = hkp * g_pp + hkq * g_qp;
                    h[k * n + q] = hkp * g_pq + hkq * g_qq;
                }
                // H ← G*·H
                for k in 0..n {
                    let hpk = h[p * n + k];
                    let hqk = h[q * n + k];
                    h[p * n + k] = g_pp.conj() * hpk + g_qp.conj() * hqk;
                    h[q * n + k] = g_pq.conj() * hpk + g_qq.conj() * hqk;
                }
                h[p * n + q] = Complex::new(zero, zero);
                h[q * n + p] = Complex::new(zero, zero);
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * g_pp + vkq * g_qp;
                    v[k * n + q] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        h[i * n + i]
            .re
            .partial_cmp(&h[j * n + j].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&i| h[i * n + i].re).collect();
    let vecs = Mat::from_fn(n, n, |r, c| CFloat(v[r * n + order[c]]));
    (vals, vecs)
}

/// Result of a kernel computation for a real linear system.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<R> {
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub basis: Vec<Vec<R>>,
}

/// Kernel of the integer-coefficient matrix obtained by clearing the
/// denominators of `rows`, by fraction-free row reduction.
pub fn kernel_exact(rows: &[Vec<BigRational>], ncols: usize) -> Kernel<BigRational> {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            let l = r.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let row: Vec<BigInt> = r.iter().map(|x| (x * BigRational::from(l.clone())).to_integer()).collect();
            primitive(row)
        })
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..m.len()).filter(|&i| !m[i][col].is_zero()).min_by_key(|&i| m[i][col].abs()) else {
            continue;
        };
        m.swap(r, p);
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let g = prow[col].gcd(&row[col]);
            let a = &prow[col] / &g;
            let b = &row[col] / &g;
            let new: Vec<BigInt> = row.iter().zip(&prow).map(|(x, y)| x * &a - y * &b).collect();
            *row = primitive(new);
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let rank = pivots.len();
    let mut basis = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); ncols];
        v[f] = BigRational::one();
        for (k, &pc) in pivots.iter().enumerate() {
            v[pc] = -BigRational::new(m[k][f].clone(), m[k][pc].clone());
        }
        basis.push(v);
    }
    Kernel { rank, pivots, basis }
}

fn primitive(row: Vec<BigInt>) -> Vec<BigInt> {
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        row
    } else {
        row.into_iter().map(|x| x / &g).collect()
    }
}

/// Kernel by Gauss–Jordan elimination with partial pivoting. A column is
/// declared dependent when its best pivot is at most `tau_rank` times the
/// largest entry of the matrix.
pub fn kernel_float(rows: &[Vec<TwoFloat>], ncols: usize, tau_rank: f64) -> Kernel<TwoFloat> {
    let zero = TwoFloat::from(0.0);
    let mut m: Vec<Vec<TwoFloat>> = rows.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs().hi()))
        .fold(0.0, f64::max);
    let thresh = tau_rank * scale.max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == m.len() {
            break;
        }
        let (p, best) = (r..m.len())
            .map(|i| (i, m[i][col].abs().hi()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= thresh {
            for row in m.iter_mut().skip(r) {
                row[col] = zero;
            }
            continue;
        }
        m.swap(r, p);
        let piv = m[r][col];
        for x in m[r].iter_mut() {
            *x = dd_div(*x, piv);
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f.hi() == 0.0 {
                continue;
            }
            for (x, y) in row.iter_mut().zip(&prow) {
                *x -= f * *y;
            }
            row[col] = zero;
        }
        pivots.push(col);
        r += 1;
    }
    let rank = pivots.len();
    let mut basis = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![zero; ncols];
        v[f] = TwoFloat::from(1.0);
        for (k, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[k][f];
        }
        basis.push(v);
    }
    Kernel { rank, pivots, basis }
}

/// Cayley transform `(I - iK)(I + iK)^{-1}` of a real symmetric `K`: a
/// unitary matrix with rational entries when `K` is rational. Used to build
/// test families with known spectra.
pub fn cayley_unitary<C: Scalar>(k: &Mat<C>) -> Option<Mat<C>> {
    let n = k.rows;
    let ik = k.scale(&C::imag_unit());
    let a = Mat::identity(n).sub(&ik);
    let b = Mat::identity(n).add(&ik);
    Some(a.mul(&inverse(&b)?))
}

/// Inverse by Gauss–Jordan elimination; `None` if singular.
pub fn inverse<C: Scalar>(a: &Mat<C>) -> Option<Mat<C>> {
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = Mat::<C>::identity(n);
    for col in 0..n {
        let p = (col..n)
            .filter(|&i| !m.get(i, col).is_zero_exact())
            .max_by(|&i, &j| {
                m.get(i, col)
                    .abs_f64()
                    .partial_cmp(&m.get(j, col).abs_f64())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
        for j in 0..n {
            let (x, y) = (m.get(col, j).clone(), m.get(p, j).clone());
            m.set(col, j, y);
            m.set(p, j, x);
            let (x, y) = (inv.get(col, j).clone(), inv.get(p, j).clone());
            inv.set(col, j, y);
            inv.set(p, j, x);
        }
        let d = m.get(col, col).inv()?;
        for j in 0..n {
            m.set(col, j, m.get(col, j).mul(&d));
            inv.set(col, j, inv.get(col, j).mul(&d));
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m.get(i, col).clone();
            if f.is_zero_exact() {
                continue;
            }
            for j in 0..n {
                m.set(i, j, m.get(i, j).sub(&f.mul(m.get(col, j))));
                inv.set(i, j, inv.get(i, j).sub(&f.mul(inv.get(col, j))));
            }
        }
    }
    Some(inv)
}
