//! Coefficient backends.
//!
//! Two complex scalar types implement [`Scalar`]: exact Gaussian rationals
//! ([`GaussRat`]) and double-double floating complex numbers ([`CFloat`]).
//! Floating comparisons use a [`Tolerance`] carried by the series that owns
//! the coefficients, never a global.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::linalg::{kernel_exact, kernel_float, Kernel};

/// Comparison tolerances for the floating backend. Ignored by exact scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Coefficients with modulus at or below this are treated as zero.
    pub cmp: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { cmp: 1e-30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => write!(f, "exact"),
            Backend::Float => write!(f, "float"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(Error::Invalid(format!("unknown backend `{other}`"))),
        }
    }
}

/// Real field underlying a complex backend; used by the linear solvers.
pub trait RealScalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Sign with values within `tol` of zero reported as 0.
    fn signum_tol(&self, tol: f64) -> i8;
    fn abs_f64(&self) -> f64;
    fn to_dd(&self) -> TwoFloat;
    /// Kernel of a real matrix given by rows; `tau_rank` is ignored by exact
    /// fields.
    fn nullspace(rows: &[Vec<Self>], ncols: usize, tau_rank: f64) -> Kernel<Self>;
}

pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    type Real: RealScalar;
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn conj(&self) -> Self;

    fn is_negligible(&self, tol: Tolerance) -> bool;
    fn abs_f64(&self) -> f64;

    /// Some `λ` with `|λ|² = q` for a positive real `q`, if the backend can
    /// represent one.
    fn norm_root(q: &Self::Real) -> Option<Self>;

    fn to_cdd(&self) -> Complex<TwoFloat>;
    fn from_cdd(c: Complex<TwoFloat>) -> Option<Self>;

    fn fmt_text(&self) -> String;
    fn parse_text(re: &str, im: &str) -> std::result::Result<Self, String>;

    fn is_zero_exact(&self) -> bool {
        self.is_negligible(Tolerance { cmp: 0.0 })
    }

    fn from_real(r: Self::Real) -> Self {
        Self::from_parts(r, <Self::Real as RealScalar>::zero())
    }

    fn is_real(&self, tol: Tolerance) -> bool {
        Self::from_parts(self.im(), <Self::Real as RealScalar>::zero()).is_negligible(tol)
    }

    fn pow_u32(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// exact backend

/// Exact complex rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn complex(re: (i64, i64), im: (i64, i64)) -> Self {
        GaussRat {
            re: Self::ratio(re.0, re.1),
            im: Self::ratio(im.0, im.1),
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl RealScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn signum_tol(&self, _tol: f64) -> i8 {
        if self.is_zero() {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn abs_f64(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_dd(&self) -> TwoFloat {
        rational_to_dd(self)
    }
    fn nullspace(rows: &[Vec<Self>], ncols: usize, _tau_rank: f64) -> Kernel<Self> {
        kernel_exact(rows, ncols)
    }
}

fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Integers `(u, v)` with `u² + v² = n`, searched directly for moderate `n`.
fn two_squares(n: u64) -> Option<(u64, u64)> {
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut u = 0u64;
    while u * u <= n {
        let rest = n - u * u;
        let v = rest.sqrt();
        if v * v == rest {
            return Some((u, v));
        }
        u += 1;
    }
    None
}

impl Scalar for GaussRat {
    type Real = BigRational;
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        GaussRat {
            re: Zero::zero(),
            im: Zero::zero(),
        }
    }
    fn one() -> Self {
        GaussRat {
            re: One::one(),
            im: Zero::zero(),
        }
    }
    fn imag_unit() -> Self {
        GaussRat {
            re: Zero::zero(),
            im: One::one(),
        }
    }
    fn from_i64(n: i64) -> Self {
        GaussRat {
            re: <BigRational as RealScalar>::from_i64(n),
            im: Zero::zero(),
        }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        GaussRat {
            re: Self::ratio(num, den),
            im: Zero::zero(),
        }
    }
    fn from_parts(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }
    fn re(&self) -> BigRational {
        self.re.clone()
    }
    fn im(&self) -> BigRational {
        self.im.clone()
    }
    fn add(&self, o: &Self) -> Self {
        GaussRat {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
    fn sub(&self, o: &Self) -> Self {
        GaussRat {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
    fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat {
                re: &self.re * &o.re,
                im: Zero::zero(),
            };
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn neg(&self) -> Self {
        GaussRat {
            re: -&self.re,
            im: -&self.im,
        }
    }
    fn inv(&self) -> Option<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return None;
        }
        Some(GaussRat {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }
    fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -&self.im,
        }
    }
    fn is_negligible(&self, _tol: Tolerance) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn abs_f64(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::INFINITY);
        let im = self.im.to_f64().unwrap_or(f64::INFINITY);
        re.hypot(im)
    }
    fn norm_root(q: &BigRational) -> Option<Self> {
        if !q.is_positive() {
            return None;
        }
        if let Some(r) = exact_sqrt(q) {
            return Some(GaussRat::from_real(r));
        }
        // (u + iv)/b has squared modulus (u² + v²)/b² = a/b when u² + v² = ab.
        let ab = (q.numer() * q.denom()).to_u64()?;
        let (u, v) = two_squares(ab)?;
        let b = q.denom().clone();
        Some(GaussRat {
            re: BigRational::new(BigInt::from(u), b.clone()),
            im: BigRational::new(BigInt::from(v), b),
        })
    }
    fn to_cdd(&self) -> Complex<TwoFloat> {
        Complex::new(rational_to_dd(&self.re), rational_to_dd(&self.im))
    }
    fn from_cdd(_c: Complex<TwoFloat>) -> Option<Self> {
        None
    }
    fn fmt_text(&self) -> String {
        format!("{} {}", self.re, self.im)
    }
    fn parse_text(re: &str, im: &str) -> std::result::Result<Self, String> {
        Ok(GaussRat {
            re: parse_rational(re)?,
            im: parse_rational(im)?,
        })
    }
}

fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n).map_err(|e| format!("bad numerator `{n}`: {e}"))?;
        let d = BigInt::from_str(d).map_err(|e| format!("bad denominator `{d}`: {e}"))?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(BigRational::new(n, d))
    } else if s.contains(['.', 'e', 'E']) {
        parse_decimal(s)
    } else {
        let n = BigInt::from_str(s).map_err(|e| format!("bad integer `{s}`: {e}"))?;
        Ok(BigRational::from_integer(n))
    }
}

// ---------------------------------------------------------------------------
// floating backend

/// Double-double complex scalar (about 106 bits of mantissa).
#[derive(Clone, Copy, PartialEq)]
pub struct CFloat(pub Complex<TwoFloat>);

impl fmt::Debug for CFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} + {:e}i)", self.0.re.hi(), self.0.im.hi())
    }
}

impl CFloat {
    pub fn new(re: f64, im: f64) -> Self {
        CFloat(Complex::new(TwoFloat::from(re), TwoFloat::from(im)))
    }
}

impl RealScalar for TwoFloat {
    fn zero() -> Self {
        TwoFloat::from(0.0)
    }
    fn one() -> Self {
        TwoFloat::from(1.0)
    }
    fn from_i64(n: i64) -> Self {
        TwoFloat::from(n)
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn inv(&self) -> Option<Self> {
        if self.hi() == 0.0 {
            None
        } else {
            Some(dd_div(TwoFloat::from(1.0), *self))
        }
    }
    fn signum_tol(&self, tol: f64) -> i8 {
        if self.abs().hi() <= tol {
            0
        } else if self.hi() > 0.0 {
            1
        } else {
            -1
        }
    }
    fn abs_f64(&self) -> f64 {
        self.abs().hi()
    }
    fn to_dd(&self) -> TwoFloat {
        *self
    }
    fn nullspace(rows: &[Vec<Self>], ncols: usize, tau_rank: f64) -> Kernel<Self> {
        kernel_float(rows, ncols, tau_rank)
    }
}

/// Double-double quotient. The `Div` impl of `TwoFloat` keeps only about
/// 53 bits, so quotients are refined here by two correction steps.
pub fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

fn dd_abs(c: &Complex<TwoFloat>) -> TwoFloat {
    (c.re * c.re + c.im * c.im).sqrt()
}

impl Scalar for CFloat {
    type Real = TwoFloat;
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        CFloat::new(0.0, 0.0)
    }
    fn one() -> Self {
        CFloat::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        CFloat::new(0.0, 1.0)
    }
    fn from_i64(n: i64) -> Self {
        CFloat(Complex::new(TwoFloat::from(n), TwoFloat::from(0.0)))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        CFloat(Complex::new(
            dd_div(TwoFloat::from(num), TwoFloat::from(den)),
            TwoFloat::from(0.0),
        ))
    }
    fn from_parts(re: TwoFloat, im: TwoFloat) -> Self {
        CFloat(Complex::new(re, im))
    }
    fn re(&self) -> TwoFloat {
        self.0.re
    }
    fn im(&self) -> TwoFloat {
        self.0.im
    }
    fn add(&self, o: &Self) -> Self {
        CFloat(self.0 + o.0)
    }
    fn sub(&self, o: &Self) -> Self {
        CFloat(self.0 - o.0)
    }
    fn mul(&self, o: &Self) -> Self {
        CFloat(self.0 * o.0)
    }
    fn neg(&self) -> Self {
        CFloat(-self.0)
    }
    fn inv(&self) -> Option<Self> {
        let n = self.0.re * self.0.re + self.0.im * self.0.im;
        if n.hi() == 0.0 {
            return None;
        }
        Some(CFloat(Complex::new(dd_div(self.0.re, n), -dd_div(self.0.im, n))))
    }
    fn conj(&self) -> Self {
        CFloat(self.0.conj())
    }
    fn is_negligible(&self, tol: Tolerance) -> bool {
        dd_abs(&self.0).hi() <= tol.cmp
    }
    fn abs_f64(&self) -> f64 {
        dd_abs(&self.0).hi()
    }
    fn norm_root(q: &TwoFloat) -> Option<Self> {
        if q.hi() <= 0.0 {
            return None;
        }
        Some(CFloat(Complex::new(q.sqrt(), TwoFloat::from(0.0))))
    }
    fn to_cdd(&self) -> Complex<TwoFloat> {
        self.0
    }
    fn from_cdd(c: Complex<TwoFloat>) -> Option<Self> {
        Some(CFloat(c))
    }
    fn fmt_text(&self) -> String {
        format!("{} {}", format_dd(self.0.re), format_dd(self.0.im))
    }
    fn parse_text(re: &str, im: &str) -> std::result::Result<Self, String> {
        let re = rational_to_dd(&parse_rational(re)?);
        let im = rational_to_dd(&parse_rational(im)?);
        Ok(CFloat(Complex::new(re, im)))
    }
}

// ---------------------------------------------------------------------------
// decimal <-> double-double

pub(crate) fn rational_to_dd(r: &BigRational) -> TwoFloat {
    let hi = r.to_f64().unwrap_or(0.0);
    if !hi.is_finite() || hi == 0.0 {
        return TwoFloat::from(hi);
    }
    let rest = r - BigRational::from_float(hi).unwrap_or_else(<BigRational as Zero>::zero);
    let lo = rest.to_f64().unwrap_or(0.0);
    TwoFloat::new_add(hi, lo)
}

fn dd_to_rational(x: TwoFloat) -> BigRational {
    let hi = BigRational::from_float(x.hi()).unwrap_or_else(<BigRational as Zero>::zero);
    let lo = BigRational::from_float(x.lo()).unwrap_or_else(<BigRational as Zero>::zero);
    hi + lo
}

/// Formats a double-double value with 34 significant decimal digits.
pub fn format_dd(x: TwoFloat) -> String {
    let r = dd_to_rational(x);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let digits = 34i32;
    let mut e = x.hi().abs().log10().floor() as i32;
    let ten = BigInt::from(10);
    let scaled = |e: i32| -> BigInt {
        let shift = digits - 1 - e;
        let v = if shift >= 0 {
            &a * BigRational::from_integer(num_traits::pow(ten.clone(), shift as usize))
        } else {
            &a / BigRational::from_integer(num_traits::pow(ten.clone(), (-shift) as usize))
        };
        v.round().to_integer()
    };
    let mut m = scaled(e);
    let upper = num_traits::pow(ten.clone(), digits as usize);
    let lower = num_traits::pow(ten.clone(), (digits - 1) as usize);
    if m >= upper {
        e += 1;
        m = scaled(e);
    } else if m < lower {
        e -= 1;
        m = scaled(e);
    }
    let s = m.to_str_radix(10);
    let (head, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}

/// Parses `[-]digits[.digits][e[-]exp]` into an exact rational.
pub fn parse_decimal(s: &str) -> std::result::Result<BigRational, String> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], &s[p + 1..]),
        None => (s, "0"),
    };
    let exp: i64 = exp
        .parse()
        .map_err(|_| format!("bad exponent in `{s}`"))?;
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(format!("empty mantissa in `{s}`"));
    }
    let digits = format!("{int}{frac}");
    let m = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(|| format!("bad digits in `{s}`"))?;
    let e = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut r = if e >= 0 {
        BigRational::from_integer(m * num_traits::pow(ten, e as usize))
    } else {
        BigRational::new(m, num_traits::pow(ten, (-e) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Converts an exact scalar into the floating backend.
pub fn to_float(c: &GaussRat) -> CFloat {
    CFloat(c.to_cdd())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cancellation_is_bit_exact() {
        let a = GaussRat::complex((3, 7), (-2, 5));
        assert!(a.add(&a.neg()).is_zero_exact());
    }

    #[test]
    fn norm_root_prefers_real_roots() {
        let q = GaussRat::ratio(9, 4);
        assert_eq!(GaussRat::norm_root(&q), Some(GaussRat::from_ratio(3, 2)));
        let two = GaussRat::ratio(2, 1);
        let l = GaussRat::norm_root(&two).unwrap();
        assert_eq!(l.mul(&l.conj()), GaussRat::from_i64(2));
        assert!(GaussRat::norm_root(&GaussRat::ratio(3, 1)).is_none());
    }

    #[test]
    fn decimal_round_trip_keeps_double_double_precision() {
        let x = TwoFloat::from(2.0).sqrt();
        let back = rational_to_dd(&parse_decimal(&format_dd(x)).unwrap());
        assert!((back - x).abs().hi() < 1e-32);
        assert_eq!(format_dd(TwoFloat::from(-0.5)), "-5e-1");
        assert_eq!(format_dd(TwoFloat::from(0.0)), "0");
    }

    #[test]
    fn float_tolerance_comes_from_context() {
        let tiny = CFloat::new(1e-31, 0.0);
        assert!(tiny.is_negligible(Tolerance::default()));
        assert!(!tiny.is_negligible(Tolerance { cmp: 1e-40 }));
    }
}
