mod common;

use common::{gauss, rng, series};
use crjet::scalar::{GaussRat, Scalar};
use crjet::series::{implicit_solve, Series, Vars};
use proptest::prelude::*;

fn xy() -> Vars {
    Vars::new(&["x", "y"])
}

fn one(t: u32) -> Series<GaussRat> {
    Series::one(&xy(), t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = xy();
        let a = series(&mut r, &v, 6, 0, 6, 0.4);
        let b = series(&mut r, &v, 5, 0, 5, 0.4);
        let c = series(&mut r, &v, 6, 0, 6, 0.4);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = xy();
        let f = series(&mut r, &v, 5, 0, 5, 0.5);
        let g: Vec<_> = (0..2).map(|_| series(&mut r, &v, 5, 1, 5, 0.5)).collect();
        let h: Vec<_> = (0..2).map(|_| series(&mut r, &v, 5, 1, 5, 0.5)).collect();
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let gh: Vec<_> = g.iter().map(|gi| gi.compose(&h).unwrap()).collect();
        let right = f.compose(&gh).unwrap();
        let t = left.trunc().min(right.trunc());
        prop_assert_eq!(left.with_trunc(t), right.with_trunc(t));
    }

    #[test]
    fn reciprocal_and_square_root(seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = xy();
        let mut a = series(&mut r, &v, 7, 1, 7, 0.4);
        let u = &one(7) + &a;
        prop_assert_eq!(&u.sqrt_unit().unwrap().pow(2), &u);
        prop_assert_eq!(&u * &u.reciprocal().unwrap(), one(7));
        let c = loop {
            let c = gauss(&mut r);
            if !c.is_zero_exact() {
                break c;
            }
        };
        a.add_term(crjet::series::Mono::one(2), c);
        prop_assert_eq!(&a * &a.reciprocal().unwrap(), one(7));
    }

    #[test]
    fn implicit_solution_has_zero_residual(seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = xy();
        let mut f = series(&mut r, &v, 8, 2, 8, 0.3);
        f.add_term(crjet::series::Mono::from_slice(&[1, 0]), gauss(&mut r));
        let c = loop {
            let c = gauss(&mut r);
            if !c.is_zero_exact() {
                break c;
            }
        };
        f.add_term(crjet::series::Mono::from_slice(&[0, 1]), c);
        let y = implicit_solve(&f, 1).unwrap();
        let x = Series::var(y.vars(), 0, y.trunc());
        let residual = f.compose(&[x, y.clone()]).unwrap();
        prop_assert!(residual.is_zero(), "{:?}", residual);
        prop_assert_eq!(y.trunc(), 8);
    }

    #[test]
    fn conjugation_is_a_ring_involution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = xy();
        let a = series(&mut r, &v, 6, 0, 6, 0.4);
        let b = series(&mut r, &v, 6, 0, 6, 0.4);
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        prop_assert_eq!(a.conj_permuted(&[1, 0]).conj_permuted(&[1, 0]), a.clone());
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = series(&mut r, &xy(), 6, 0, 6, 0.4);
        let text = crjet::textfmt::write_series(&a);
        let doc = crjet::textfmt::Document::parse(&format!("A:\n{text}")).unwrap();
        prop_assert_eq!(doc.require_series::<GaussRat>("A").unwrap(), a);
    }
}
