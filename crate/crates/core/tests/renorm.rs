use doubling::corpus::{default_dir, load_dir, Entry};
use doubling::dimreg::{amplitude, laurent_extract, CircleOptions};
use doubling::laurent::LaurentSeries;
use doubling::rational::{q, Q};
use doubling::renorm::*;
use doubling::theory::SpecSub;
use std::sync::Arc;

fn corpus() -> Vec<Entry> {
    load_dir(&default_dir()).unwrap()
}

fn entry(name: &str) -> Entry {
    corpus().into_iter().find(|e| e.name == name).unwrap()
}

fn root(e: &Entry) -> Arc<Root> {
    Root::new(&e.theory, &e.graph)
}

fn probes(r: &Root) -> Vec<Vec<Vec<Q>>> {
    random_probes(block_dim(r, Default::default()).unwrap(), 5, r.sg.graph.num_pairs() as u64)
}

/// Exact formal equality, and equality on probes.
fn assert_same(r: &Root, base: &SpecSub, a: &LaurentOp, b: &LaurentOp, what: &str) {
    assert!(formally_equal(a, b), "{what}: formal\n{}\n{}", render_op(a, None), render_op(b, None));
    assert!(operators_equal(r, base, a, b, &probes(r)).unwrap(), "{what}: probes");
}

fn characters() -> Vec<(&'static str, Character)> {
    vec![
        ("feynman", Character::feynman(2)),
        ("synthetic-1", Character::synthetic(1, 2)),
        ("synthetic-2", Character::synthetic(2, 2)),
        ("synthetic-3", Character::synthetic(3, 2)),
    ]
}

#[test]
fn unit_laws() {
    let e = Character::unit();
    for entry in corpus() {
        let r = root(&entry);
        for (name, phi) in characters() {
            let (l, rt) = (e.convolve(&phi), phi.convolve(&e));
            for sub in r.pairs().unwrap() {
                let v = phi.on_pair(&r, &sub).unwrap();
                assert_same(&r, &SpecSub::empty(), &l.on_pair(&r, &sub).unwrap(), &v, name);
                assert_same(&r, &SpecSub::empty(), &rt.on_pair(&r, &sub).unwrap(), &v, name);
            }
        }
    }
}

#[test]
fn degree_zero_is_identity() {
    let entry = entry("phi3/nested_self_energy");
    let r = root(&entry);
    for (_, phi) in characters() {
        assert_eq!(phi.on_pair(&r, &SpecSub::empty()).unwrap(), identity_op());
    }
    assert_eq!(Character::unit().inverse().on_pair(&r, &r.full()).unwrap(), zero_op());
}

#[test]
fn associativity() {
    let cs = characters();
    for entry in corpus() {
        let r = root(&entry);
        for (i, (_, a)) in cs.iter().enumerate() {
            let (b, c) = (&cs[(i + 1) % 4].1, &cs[(i + 2) % 4].1);
            let left = a.convolve(b).convolve(c);
            let right = a.convolve(&b.convolve(c));
            for sub in r.pairs().unwrap() {
                let x = left.on_pair(&r, &sub).unwrap();
                let y = right.on_pair(&r, &sub).unwrap();
                assert_same(&r, &SpecSub::empty(), &x, &y, &entry.name);
            }
        }
    }
}

#[test]
fn two_sided_inverse() {
    let e = Character::unit();
    for entry in corpus() {
        let r = root(&entry);
        for (name, phi) in characters() {
            let inv = phi.inverse();
            for sub in r.pairs().unwrap() {
                let want = e.on_pair(&r, &sub).unwrap();
                assert_same(&r, &SpecSub::empty(), &phi.convolve(&inv).on_pair(&r, &sub).unwrap(), &want, name);
                assert_same(&r, &SpecSub::empty(), &inv.convolve(&phi).on_pair(&r, &sub).unwrap(), &want, name);
                if r.degree(&SpecSub::empty(), &sub) == 1 && r.active(&SpecSub::empty(), &sub).len() == 1 {
                    let v = phi.on_pair(&r, &sub).unwrap();
                    assert_eq!(inv.on_pair(&r, &sub).unwrap(), v.neg());
                }
            }
        }
    }
}

fn union_of(a: &str, b: &str) -> (Arc<Root>, Arc<Root>, Embedding) {
    let (ra, rb) = (root(&entry(a)), root(&entry(b)));
    let emb = Embedding::new(&[&ra, &rb]).unwrap();
    (ra, rb, emb)
}

/// `f(xy) = f(x) • f(y)` for every pair of pairs of two corpus graphs.
fn check_multiplicative(f: &Character, a: &str, b: &str) {
    let (ra, rb, emb) = union_of(a, b);
    for sa in ra.pairs().unwrap() {
        for sb in rb.pairs().unwrap() {
            let su = emb.sub(&[&sa, &sb], &[&ra, &rb]);
            let whole = f.on_pair(&emb.union, &su).unwrap();
            let parts = bullet(&emb.op(0, &f.on_pair(&ra, &sa).unwrap()), &emb.op(1, &f.on_pair(&rb, &sb).unwrap()));
            assert!(formally_equal(&whole, &parts), "{a} × {b}");
        }
    }
}

#[test]
fn convolution_and_inverse_are_multiplicative() {
    let cs = characters();
    for (a, b) in [("phi3/bubble_s0", "phi3/nested_self_energy"), ("phi4/fish", "phi4/sunset")] {
        for (i, (_, phi)) in cs.iter().enumerate() {
            let psi = &cs[(i + 1) % 4].1;
            check_multiplicative(phi, a, b);
            check_multiplicative(&phi.convolve(psi), a, b);
            check_multiplicative(&phi.inverse(), a, b);
        }
    }
}

#[test]
fn bullet_is_commutative() {
    let (ra, rb, emb) = union_of("phi3/triangle", "phi3/bubble_s1");
    for (_, phi) in characters() {
        let x = emb.op(0, &phi.on_pair(&ra, &ra.full()).unwrap());
        let y = emb.op(1, &phi.on_pair(&rb, &rb.full()).unwrap());
        assert_eq!(bullet(&x, &y), bullet(&y, &x));
        assert_eq!(bullet(&identity_op(), &x), x);
    }
}

/// Composable quadruples `a_i : base_i → δ_i`, `b_i : δ_i → sub_i` taken
/// from single Laurent coefficients of character values on two components.
#[test]
fn block_product_interchange() {
    let (ra, rb, emb) = union_of("phi3/nested_self_energy", "phi4/double_fish");
    let u = &emb.union;
    let pr = probes(u);
    let cs = characters();
    let mut count = 0;
    let chains = |r: &Arc<Root>| {
        let mut out = Vec::new();
        for sub in r.pairs().unwrap() {
            for d in r.between(&SpecSub::empty(), &sub).unwrap().iter() {
                out.push((d.clone(), sub.clone()));
            }
        }
        out
    };
    let (ca, cb) = (chains(&ra), chains(&rb));
    let pick = |r: &Arc<Root>, part: usize, phi: &Character, base: &SpecSub, sub: &SpecSub, n: i64| {
        let v = phi.eval(r, base, sub).unwrap();
        let c = v.coeff(n.max(v.valuation()).min(v.trunc())).unwrap();
        emb.op(part, &LaurentSeries::monomial(0, c, doubling::laurent::EXACT))
    };
    for (i, (d1, s1)) in ca.iter().enumerate() {
        for (j, (d2, s2)) in cb.iter().enumerate() {
            let phi = &cs[(i + j) % 4].1;
            let psi = &cs[(i + 2 * j + 1) % 4].1;
            let n = (i + j) as i64 % 2;
            let a1 = pick(&ra, 0, phi, &SpecSub::empty(), d1, n);
            let b1 = pick(&ra, 0, psi, d1, s1, 0);
            let a2 = pick(&rb, 1, psi, &SpecSub::empty(), d2, 0);
            let b2 = pick(&rb, 1, phi, d2, s2, n);
            let lhs = bullet(&compose(&b1, &a1), &compose(&b2, &a2));
            let rhs = compose(&bullet(&b1, &b2), &bullet(&a1, &a2));
            assert!(formally_equal(&lhs, &rhs));
            let (l, r) = (lhs.coeff(0).unwrap(), rhs.coeff(0).unwrap());
            for p in &pr {
                let x = apply(u, Default::default(), &l, p, Schedule::ComponentMajor).unwrap();
                let y = apply(u, Default::default(), &r, p, Schedule::Interleaved).unwrap();
                assert!(x.same_as(&y));
            }
            count += 1;
        }
    }
    assert!(count >= 50, "{count} quadruples");
}

fn birkhoff_checks(scheme: Scheme, probe: bool) {
    for entry in corpus() {
        let r = root(&entry);
        for (name, phi) in characters() {
            let (minus, plus, _) = birkhoff(&phi, scheme);
            let rebuilt = minus.inverse().convolve(&plus);
            for sub in r.pairs().unwrap() {
                let base = SpecSub::empty();
                let v = phi.on_pair(&r, &sub).unwrap();
                let w = rebuilt.on_pair(&r, &sub).unwrap();
                assert!(formally_equal(&v, &w), "{} {name}", entry.name);
                if probe {
                    assert!(operators_equal(&r, &base, &v, &w, &probes(&r)).unwrap());
                }
                if r.degree(&base, &sub) == 0 {
                    continue;
                }
                let (m, p) = (minus.on_pair(&r, &sub).unwrap(), plus.on_pair(&r, &sub).unwrap());
                assert!(scheme.in_minus(&r, &base, &sub, &m), "{} {name}", entry.name);
                assert!(scheme.in_plus(&r, &base, &sub, &p), "{} {name}", entry.name);
                if scheme == Scheme::Minimal {
                    assert!(m.max_order().map_or(true, |o| o < 0));
                    assert!(p.valuation() >= 0);
                }
                if r.degree(&base, &sub) == 1 && r.active(&base, &sub).len() == 1 {
                    assert_eq!(m, scheme.project(&r, &base, &sub, &v).neg());
                }
            }
        }
    }
}

#[test]
fn birkhoff_minimal() {
    birkhoff_checks(Scheme::Minimal, true);
}

#[test]
fn birkhoff_taylor() {
    birkhoff_checks(Scheme::Taylor, false);
}

#[test]
fn birkhoff_factors_are_multiplicative() {
    for scheme in [Scheme::Minimal, Scheme::Taylor] {
        for (_, phi) in characters() {
            let (minus, plus, _) = birkhoff(&phi, scheme);
            for (a, b) in [("phi3/bubble_s0", "phi3/nested_self_energy"), ("phi4/fish", "phi4/double_fish")] {
                check_multiplicative(&minus, a, b);
                check_multiplicative(&plus, a, b);
            }
        }
    }
}

#[test]
fn perturbed_factor_breaks_reconstruction() {
    let entry = entry("phi4/double_fish");
    let r = root(&entry);
    let full = r.full();
    for scheme in [Scheme::Minimal, Scheme::Taylor] {
        for (name, phi) in characters() {
            let (minus, plus, _) = birkhoff(&phi, scheme);
            // An A₊ element added to φ₋ on the one-loop pairs.
            for sub in r.pairs().unwrap() {
                if r.degree(&SpecSub::empty(), &sub) != 1 {
                    continue;
                }
                let v = phi.on_pair(&r, &sub).unwrap();
                let p = scheme.project(&r, &SpecSub::empty(), &sub, &v);
                let extra = v.sub(&p).with_trunc(0);
                assert!(!extra.is_zero());
                let bent = minus.perturbed(&r, &SpecSub::empty(), &sub, extra);
                let rebuilt = bent.inverse().convolve(&plus);
                let w = rebuilt.on_pair(&r, &sub).unwrap();
                assert!(!formally_equal(&w, &v), "{name}");
                let whole = rebuilt.on_pair(&r, &full).unwrap();
                assert!(!formally_equal(&whole, &phi.on_pair(&r, &full).unwrap()), "{name}");
            }
        }
    }
}

#[test]
fn integration_by_stages() {
    let entry = entry("phi3/nested_self_energy");
    let r = root(&entry);
    let phi = Character::feynman(3);
    let full = r.full();
    let base = SpecSub::empty();
    let direct = phi.on_pair(&r, &full).unwrap();
    let pr = probes(&r);
    let mut staged = 0;
    for d in r.between(&base, &full).unwrap().iter() {
        let via = compose(&phi.eval(&r, d, &full).unwrap(), &phi.eval(&r, &base, d).unwrap());
        assert!(operators_equal(&r, &base, &direct, &via, &pr).unwrap());
        staged += 1;
    }
    assert_eq!(staged, 4);
}

#[test]
fn operators_equal_examples() {
    let entry = entry("phi3/bubble_s0");
    let r = root(&entry);
    let pr = probes(&r);
    let base = SpecSub::empty();
    assert!(operators_equal(&r, &base, &identity_op(), &identity_op(), &pr).unwrap());
    let v = Character::feynman(2).on_pair(&r, &r.full()).unwrap();
    assert!(!operators_equal(&r, &base, &v, &v.scale(&q(2)), &pr).unwrap());
    let bumped = v.add(&LaurentSeries::monomial(0, v.coeff(0).unwrap(), 2));
    assert!(!operators_equal(&r, &base, &v, &bumped, &pr).unwrap());
    // Negative orders vanish on Gaussians, which are entire in D.
    let (neg, _) = v.minimal_split();
    assert!(operators_equal(&r, &base, &neg, &zero_op(), &pr).unwrap());
}

#[test]
fn renormalized_bubble_is_finite() {
    let entry = entry("phi4/fish");
    let r = root(&entry);
    let amp = amplitude(&entry.theory, &entry.graph.graph).unwrap();
    let a = laurent_extract(&amp.integrand, None, 4, (-1, 2), CircleOptions::default()).unwrap();
    let (_, plus, _) = birkhoff(&Character::feynman(2), Scheme::Minimal);
    let renormalized = integrate_series(&plus.on_pair(&r, &r.full()).unwrap(), &a).unwrap();
    for n in -3..0 {
        assert!(renormalized.coeff(n).unwrap().abs() <= 1e-10);
    }
    assert!((renormalized.coeff(0).unwrap() - a.coeff(0).unwrap()).abs() <= 1e-12);
    let unrenormalized = integrate_series(&Character::feynman(2).on_pair(&r, &r.full()).unwrap(), &a).unwrap();
    let pole = -2.0 * std::f64::consts::PI.powi(2);
    assert!((unrenormalized.coeff(-1).unwrap() - pole).abs() <= 1e-4 * pole.abs());
}
