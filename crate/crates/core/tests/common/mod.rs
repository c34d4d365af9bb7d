//! Seeded random inputs shared by the integration tests.
#![allow(dead_code)]

use crjet::hypersurface::{real_vars, RealGraph};
use crjet::linalg::{Mat, MatSeries};
use crjet::scalar::{CFloat, GaussRat, Scalar};
use crjet::series::{monomials, Mono, Series, Vars};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn small_ratio(rng: &mut StdRng) -> num_rational::BigRational {
    GaussRat::ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

pub fn gauss(rng: &mut StdRng) -> GaussRat {
    GaussRat::new(small_ratio(rng), small_ratio(rng))
}

pub fn real(rng: &mut StdRng) -> GaussRat {
    GaussRat::from_real(small_ratio(rng))
}

/// Sparse random series with terms of degree `lo..=hi`.
pub fn series(rng: &mut StdRng, vars: &Vars, trunc: u32, lo: u32, hi: u32, density: f64) -> Series<GaussRat> {
    let mut s = Series::zero(vars, trunc);
    for m in monomials(vars.len(), lo, hi.min(trunc)) {
        if rng.gen_bool(density) {
            s.add_term(m, gauss(rng));
        }
    }
    s
}

/// Adds `c·m` and its formal conjugate, keeping the series real.
pub fn add_real_pair(s: &mut Series<GaussRat>, n: usize, m: &Mono, c: GaussRat) {
    let mut mc = m.clone();
    for j in 0..n {
        mc.0.swap(j, n + j);
    }
    if mc == *m {
        s.add_term(m.clone(), GaussRat::from_real(c.re));
    } else {
        s.add_term(m.clone(), c.clone());
        s.add_term(mc, c.conj());
    }
}

/// Random real `φ(z, z̄, s)` with every term divisible by some `z_j` and
/// some `z̄_k`.
pub fn normal_graph(rng: &mut StdRng, n: usize, trunc: u32, density: f64) -> RealGraph<GaussRat> {
    let rv = real_vars(n);
    let mut s = Series::zero(&rv, trunc);
    for m in monomials(2 * n + 1, 2, trunc) {
        let hol: u16 = m.0[..n].iter().sum();
        let anti: u16 = m.0[n..2 * n].iter().sum();
        if hol == 0 || anti == 0 || hol > anti || !rng.gen_bool(density) {
            continue;
        }
        add_real_pair(&mut s, n, &m, gauss(rng));
    }
    RealGraph::new(n, s).unwrap()
}

fn cf(r: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}

/// Random Hermitian matrix with small rational entries.
pub fn hermitian(rng: &mut StdRng, n: usize) -> Mat<CFloat> {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        m.set(i, i, CFloat::new(cf(&small_ratio(rng)), 0.0));
        for j in i + 1..n {
            let (re, im) = (cf(&small_ratio(rng)), cf(&small_ratio(rng)));
            m.set(i, j, CFloat::new(re, im));
            m.set(j, i, CFloat::new(re, -im));
        }
    }
    m
}

pub fn hermitian_family(rng: &mut StdRng, n: usize, trunc: u32) -> MatSeries<CFloat> {
    let mut a = MatSeries::zeros(n, trunc);
    for k in 0..=trunc as usize {
        a.coeffs[k] = hermitian(rng, n);
    }
    a
}

pub fn to_float(s: &Series<GaussRat>) -> Series<CFloat> {
    s.map_coeffs(crjet::scalar::to_float, Default::default())
}
