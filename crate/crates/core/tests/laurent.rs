use doubling::laurent::{family_law_sides, LaurentSeries, MinimalScheme, MultiPolynomial, RotaBaxterFamily, TaylorScheme};
use doubling::rational::{q, qf, Q};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Q> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| qf(n, d))
}

/// Series with orders in −4..4 and a truncation order at or above the top.
fn series() -> impl Strategy<Value = LaurentSeries<Q>> {
    (-4i64..=0, prop::collection::vec(rational(), 0..6), prop::option::of(0i64..4)).prop_map(|(lo, c, t)| {
        let top = lo + c.len() as i64;
        match t {
            Some(extra) => LaurentSeries::new(lo, c, top + extra),
            None => LaurentSeries::exact(lo, c),
        }
    })
}

fn polynomial(nvars: usize) -> impl Strategy<Value = MultiPolynomial> {
    let term = (prop::collection::vec(0u32..=6, nvars), rational());
    prop::collection::vec(term, 0..8).prop_map(move |ts| {
        let mut p = MultiPolynomial::zero(nvars);
        for (mut e, c) in ts {
            // Total degree ≤ 6.
            while e.iter().sum::<u32>() > 6 {
                let i = e.iter().position(|&x| x > 0).unwrap();
                e[i] -= 1;
            }
            p.add_term(e, c);
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_laws(a in series(), b in series(), c in series()) {
        prop_assert!(a.add(&b).agrees_with(&b.add(&a)));
        prop_assert!(a.mul(&b).agrees_with(&b.mul(&a)));
        prop_assert!(a.mul(&b).mul(&c).agrees_with(&a.mul(&b.mul(&c))));
        prop_assert!(a.add(&b).add(&c).agrees_with(&a.add(&b.add(&c))));
        prop_assert!(a.mul(&b.add(&c)).agrees_with(&a.mul(&b).add(&a.mul(&c))));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn minimal_split_is_idempotent(a in series()) {
        let (n, p) = a.minimal_split();
        prop_assert!(n.add(&p).agrees_with(&a));
        prop_assert_eq!(n.minimal_split().0, n.clone());
        prop_assert!(p.minimal_split().1.agrees_with(&p));
        prop_assert!(p.minimal_split().0.is_zero());
        prop_assert!(n.minimal_split().1.is_zero());
    }

    #[test]
    fn minimal_scheme_rota_baxter(a in series(), b in series()) {
        let (lhs, rhs) = family_law_sides(&MinimalScheme, 0, 0, &a, &b, |x, y| x.mul(y), |x, y| x.add(y), |x, y| x.sub(y));
        prop_assert!(lhs.agrees_with(&rhs), "{} vs {}", lhs.render_q(), rhs.render_q());
    }

    #[test]
    fn taylor_family_law((f, g) in (1usize..=3).prop_flat_map(|n| (polynomial(n), polynomial(n)))) {
        for s in 0..=4 {
            for t in 0..=4 {
                let (lhs, rhs) = family_law_sides(&TaylorScheme, s, t, &f, &g, |x, y| x.mul(y), |x, y| x.add(y), |x, y| x.sub(y));
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn taylor_is_a_projector(p in polynomial(3), m in 0u32..=6) {
        let once = TaylorScheme.project(m, &p);
        prop_assert_eq!(TaylorScheme.project(m, &once), once.clone());
        prop_assert!(once.degree().map_or(true, |d| d <= m));
    }
}

#[test]
fn pure_taylor_series_has_no_pole_part() {
    let s = LaurentSeries::exact(0, vec![q(1), q(2), q(3)]);
    let (n, p) = s.minimal_split();
    assert!(n.is_zero());
    assert_eq!(p, s);
}
