//! Acceptance suite: one PASS/FAIL line per criterion, with timings.

use doubling::corpus::{default_dir, load_dir, Entry};
use doubling::dimreg::linalg::{self, Mat};
use doubling::dimreg::{
    amplitude, compose_check, eval_parametric, integrate_gaussian, laurent_extract, BilinearForm, CircleOptions,
    GaussianElement, Subspace,
};
use doubling::hopf::Hopf;
use doubling::laurent::{family_law_sides, LaurentSeries, MinimalScheme, MultiPolynomial, TaylorScheme, EXACT};
use doubling::rational::{qf, Q};
use doubling::renorm::*;
use doubling::theory::SpecSub;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn corpus() -> Vec<Entry> {
    load_dir(&default_dir()).expect("corpus loads")
}

fn entry(name: &str) -> Entry {
    corpus().into_iter().find(|e| e.name == name).expect("corpus entry")
}

fn probes(r: &Root) -> Vec<Mat> {
    random_probes(block_dim(r, Default::default()).unwrap(), 5, r.sg.graph.num_pairs() as u64)
}

fn characters() -> Vec<(&'static str, Character)> {
    vec![
        ("feynman", Character::feynman(2)),
        ("synthetic-1", Character::synthetic(1, 2)),
        ("synthetic-2", Character::synthetic(2, 2)),
        ("synthetic-3", Character::synthetic(3, 2)),
    ]
}

fn coassociativity() -> Outcome {
    let all = corpus();
    ensure(all.len() >= 12, || format!("corpus has {} graphs", all.len()))?;
    ensure(all.iter().any(|e| e.graph.graph.num_components() > 1), || "no disjoint graph".into())?;
    ensure(all.iter().any(|e| e.graph.graph.loop_number() == 2), || "no two-loop graph".into())?;
    let mut checked = 0;
    for e in &all {
        let mut h = Hopf::new(e.theory.clone());
        let mut monos = vec![h.register_graph(&e.graph)];
        for p in e.graph.coproduct_subgraphs(&e.theory).unwrap() {
            monos.push(h.register_pair(&e.graph, &p));
        }
        for m in &monos {
            let (l, r) = h.coassociativity(m).unwrap();
            ensure(l == r, || format!("{}", e.name))?;
            checked += 1;
        }
    }
    Ok(format!("{} graphs, {checked} elements", all.len()))
}

fn p2_morphism() -> Outcome {
    let mut checked = 0;
    for e in corpus() {
        let mut h = Hopf::new(e.theory.clone());
        for p in e.graph.coproduct_subgraphs(&e.theory).unwrap() {
            let m = h.register_pair(&e.graph, &p);
            let d = h.coproduct_mono(&m).unwrap();
            let lhs = h.p2_tensor(&d);
            let pm = h.p2_mono(&m);
            let rhs = h.coproduct_mono(&pm).unwrap();
            ensure(lhs == rhs, || e.name.clone())?;
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs"))
}

fn convolution_group() -> Outcome {
    let unit = Character::unit();
    let cs = characters();
    let mut checked = 0;
    for e in corpus() {
        let r = Root::new(&e.theory, &e.graph);
        let pr = probes(&r);
        ensure(pr.len() >= 5, || "fewer than 5 probes".into())?;
        let base = SpecSub::empty();
        for (i, (name, phi)) in cs.iter().enumerate() {
            let (psi, chi) = (&cs[(i + 1) % 4].1, &cs[(i + 2) % 4].1);
            let laws = [
                ("left unit", unit.convolve(phi), phi.clone()),
                ("right unit", phi.convolve(&unit), phi.clone()),
                ("associativity", phi.convolve(psi).convolve(chi), phi.convolve(&psi.convolve(chi))),
                ("right inverse", phi.convolve(&phi.inverse()), unit.clone()),
                ("left inverse", phi.inverse().convolve(phi), unit.clone()),
            ];
            for sub in r.pairs().unwrap() {
                if r.degree(&base, &sub) > 2 {
                    continue;
                }
                for (law, a, b) in &laws {
                    let (x, y) = (a.on_pair(&r, &sub).unwrap(), b.on_pair(&r, &sub).unwrap());
                    ensure(formally_equal(&x, &y), || format!("{law} {name} {} formal", e.name))?;
                    ensure(operators_equal(&r, &base, &x, &y, &pr).unwrap(), || format!("{law} {name} {} probes", e.name))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} law instances, 4 characters"))
}

fn block_interchange() -> Outcome {
    let (ea, eb) = (entry("phi3/nested_self_energy"), entry("phi4/double_fish"));
    let (ra, rb) = (Root::new(&ea.theory, &ea.graph), Root::new(&eb.theory, &eb.graph));
    let emb = Embedding::new(&[&ra, &rb]).unwrap();
    let u = &emb.union;
    let pr = probes(u);
    let cs = characters();
    let chains = |r: &Arc<Root>| {
        let mut out = Vec::new();
        for sub in r.pairs().unwrap() {
            for d in r.between(&SpecSub::empty(), &sub).unwrap().iter() {
                out.push((d.clone(), sub.clone()));
            }
        }
        out
    };
    let pick = |r: &Arc<Root>, part: usize, phi: &Character, base: &SpecSub, sub: &SpecSub, n: i64| {
        let v = phi.eval(r, base, sub).unwrap();
        let c = v.coeff(n.max(v.valuation()).min(v.trunc())).unwrap();
        emb.op(part, &LaurentSeries::monomial(0, c, EXACT))
    };
    let (ca, cb) = (chains(&ra), chains(&rb));
    let mut count = 0;
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
            ensure(formally_equal(&lhs, &rhs), || format!("quadruple {i},{j} formal"))?;
            let (l, r) = (lhs.coeff(0).unwrap(), rhs.coeff(0).unwrap());
            for p in &pr {
                let x = apply(u, Default::default(), &l, p, Schedule::ComponentMajor).unwrap();
                let y = apply(u, Default::default(), &r, p, Schedule::Interleaved).unwrap();
                ensure(x.same_as(&y), || format!("quadruple {i},{j} probes"))?;
            }
            count += 1;
        }
    }
    ensure(count >= 50, || format!("only {count} quadruples"))?;
    Ok(format!("{count} quadruples x {} probes", pr.len()))
}

fn random_polynomial(rng: &mut ChaCha8Rng, nvars: usize) -> MultiPolynomial {
    let mut p = MultiPolynomial::zero(nvars);
    for _ in 0..rng.gen_range(1..8) {
        let mut e = vec![0u32; nvars];
        for _ in 0..rng.gen_range(0..=6) {
            e[rng.gen_range(0..nvars)] += 1;
        }
        p.add_term(e, qf(rng.gen_range(-20..=20), rng.gen_range(1..=6)));
    }
    p
}

fn rota_baxter() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs = 100;
    for k in 0..pairs {
        let nvars = 1 + k % 3;
        let (f, g) = (random_polynomial(&mut rng, nvars), random_polynomial(&mut rng, nvars));
        for s in 0..=4 {
            for t in 0..=4 {
                let (lhs, rhs) =
                    family_law_sides(&TaylorScheme, s, t, &f, &g, |x, y| x.mul(y), |x, y| x.add(y), |x, y| x.sub(y));
                ensure(lhs == rhs, || format!("taylor pair {k} at s={s} t={t}"))?;
            }
        }
    }
    for k in 0..pairs {
        let mut series = || {
            let lo = rng.gen_range(-4..=0);
            let c: Vec<Q> = (0..rng.gen_range(0..6)).map(|_| qf(rng.gen_range(-20..=20), rng.gen_range(1..=6))).collect();
            LaurentSeries::exact(lo, c)
        };
        let (a, b) = (series(), series());
        let (lhs, rhs) = family_law_sides(&MinimalScheme, 0, 0, &a, &b, |x, y| x.mul(y), |x, y| x.add(y), |x, y| x.sub(y));
        ensure(lhs.agrees_with(&rhs), || format!("minimal pair {k}"))?;
    }
    Ok(format!("{pairs} polynomial pairs x 25 (s,t), {pairs} series pairs"))
}

fn birkhoff_decomposition() -> Outcome {
    let mut checked = 0;
    for scheme in [Scheme::Minimal, Scheme::Taylor] {
        for e in corpus() {
            let r = Root::new(&e.theory, &e.graph);
            let base = SpecSub::empty();
            for (name, phi) in characters() {
                let (minus, plus, _) = birkhoff(&phi, scheme);
                let rebuilt = minus.inverse().convolve(&plus);
                for sub in r.pairs().unwrap() {
                    let v = phi.on_pair(&r, &sub).unwrap();
                    ensure(formally_equal(&v, &rebuilt.on_pair(&r, &sub).unwrap()), || {
                        format!("{scheme:?} reconstruction {name} {}", e.name)
                    })?;
                    if r.degree(&base, &sub) > 0 {
                        ensure(scheme.in_minus(&r, &base, &sub, &minus.on_pair(&r, &sub).unwrap()), || {
                            format!("{scheme:?} minus {name} {}", e.name)
                        })?;
                        ensure(scheme.in_plus(&r, &base, &sub, &plus.on_pair(&r, &sub).unwrap()), || {
                            format!("{scheme:?} plus {name} {}", e.name)
                        })?;
                    }
                    checked += 1;
                }
            }
        }
        for (a, b) in [("phi3/bubble_s0", "phi3/nested_self_energy"), ("phi4/fish", "phi4/double_fish")] {
            let (ra, rb) = (Root::new(&entry(a).theory, &entry(a).graph), Root::new(&entry(b).theory, &entry(b).graph));
            let emb = Embedding::new(&[&ra, &rb]).unwrap();
            for (name, phi) in characters() {
                let (minus, plus, _) = birkhoff(&phi, scheme);
                for f in [&minus, &plus] {
                    for sa in ra.pairs().unwrap() {
                        for sb in rb.pairs().unwrap() {
                            let su = emb.sub(&[&sa, &sb], &[&ra, &rb]);
                            let whole = f.on_pair(&emb.union, &su).unwrap();
                            let parts = bullet(&emb.op(0, &f.on_pair(&ra, &sa).unwrap()), &emb.op(1, &f.on_pair(&rb, &sb).unwrap()));
                            ensure(formally_equal(&whole, &parts), || format!("{scheme:?} multiplicativity {name} {a} x {b}"))?;
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{checked} checks, minimal and taylor"))
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let a: Mat = (0..n).map(|_| (0..n).map(|_| qf(rng.gen_range(-4..=4), rng.gen_range(1..=3))).collect()).collect();
    linalg::add(&linalg::matmul(&linalg::transpose(&a), &a), &linalg::identity(n))
}

/// `∫ exp(−vᵀBv) dy` over the coordinates outside `keep`, with the kept
/// coordinates fixed to `x`, by the tensor trapezoid rule.
fn trapezoid_partial(b: &[Vec<f64>], keep: &[usize], x: &[f64]) -> f64 {
    let n = b.len();
    let free: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let (h, k) = (0.08, 90i64);
    let pts: Vec<f64> = (-k..=k).map(|i| i as f64 * h).collect();
    let mut v = vec![0.0; n];
    for (i, &c) in keep.iter().enumerate() {
        v[c] = x[i];
    }
    let mut idx = vec![0usize; free.len()];
    let mut total = 0.0;
    loop {
        for (j, &c) in free.iter().enumerate() {
            v[c] = pts[idx[j]];
        }
        let mut e = 0.0;
        for i in 0..n {
            for j in 0..n {
                e += v[i] * b[i][j] * v[j];
            }
        }
        total += (-e).exp();
        let mut d = 0;
        loop {
            if d == free.len() {
                return total * h.powi(free.len() as i32);
            }
            idx[d] += 1;
            if idx[d] < pts.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn gaussian_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let forms = 12;
    let mut worst: f64 = 0.0;
    for trial in 0..forms {
        let n = 1 + trial % 3;
        let m = rng.gen_range(0..=(n - 1).min(2));
        let b = random_spd(&mut rng, n);
        let mut keep: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            keep.swap(i, rng.gen_range(0..=i));
        }
        keep.truncate(m);
        keep.sort();
        let r = integrate_gaussian(&GaussianElement::of_form(&BilinearForm::new(b.clone()).unwrap()), &Subspace::new(n, keep.clone()).unwrap())
            .unwrap();
        let bf = linalg::to_f64(&b);
        for d in [1usize, 2] {
            // Kept momenta x_a ∈ ℝ^m for each of the D dimensions; C = Σ_a x_a x_aᵀ.
            let xs: Vec<Vec<f64>> = (0..d).map(|_| (0..m).map(|_| rng.gen_range(-0.7..0.7)).collect()).collect();
            let mut c = vec![vec![0.0; m]; m];
            for x in &xs {
                for i in 0..m {
                    for j in 0..m {
                        c[i][j] += x[i] * x[j];
                    }
                }
            }
            let got = r.value(&c, Complex64::new(d as f64, 0.0)).re;
            let want: f64 = xs.iter().map(|x| trapezoid_partial(&bf, &keep, x)).product();
            let rel = (got - want).abs() / want;
            worst = worst.max(rel);
            ensure(rel <= 1e-8, || format!("n={n} m={m} D={d}: {got} vs {want}"))?;
        }
    }
    Ok(format!("{forms} forms, worst rel err {worst:.1e}"))
}

fn functoriality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let triples = 24;
    for k in 0..triples {
        let n = 2 + k % 3;
        let b = BilinearForm::new(random_spd(&mut rng, n)).unwrap();
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, rng.gen_range(0..=i));
        }
        let m = rng.gen_range(1..n);
        let p = rng.gen_range(0..=m);
        ensure(compose_check(&b, &idx[..m], &idx[..p]).unwrap(), || format!("triple {k}"))?;
    }
    let e = entry("phi3/nested_self_energy");
    let r = Root::new(&e.theory, &e.graph);
    let phi = Character::feynman(3);
    let (base, full) = (SpecSub::empty(), r.full());
    let direct = phi.on_pair(&r, &full).unwrap();
    let pr = probes(&r);
    let mut staged = 0;
    for d in r.between(&base, &full).unwrap().iter() {
        let via = compose(&phi.eval(&r, d, &full).unwrap(), &phi.eval(&r, &base, d).unwrap());
        ensure(operators_equal(&r, &base, &direct, &via, &pr).unwrap(), || "stage law".into())?;
        staged += 1;
    }
    Ok(format!("{triples} nested triples, {staged} intermediate stages"))
}

/// Lanczos approximation, g = 7.
fn gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let s: f64 = C[0] + (1..9).map(|i| C[i] / (x + i as f64)).sum::<f64>();
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * s
}

/// Coefficients of `π^{2+z/2} Γ(−z/2)` at orders −1..=1.
fn bubble_oracle() -> [f64; 3] {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    // Γ(−z/2) = −(2/z) Γ(1 − z/2), and ln Γ(1+ε) = −γε + ζ(2)ε²/2 + …
    let l1 = 0.5 * EULER_GAMMA + 0.5 * PI.ln();
    let l2 = PI * PI / 6.0 / 8.0;
    let e1 = l1;
    let e2 = l2 + l1 * l1 / 2.0;
    let k = -2.0 * PI * PI;
    [k, k * e1, k * e2]
}

fn dimreg_numbers() -> Outcome {
    let e = entry("phi4/fish");
    let s = amplitude(&e.theory, &e.graph.graph).unwrap().integrand;
    for d in [2.5, 3.0, 3.5] {
        let got = eval_parametric(&s, None, Complex64::new(d, 0.0)).unwrap().re;
        let want = PI.powf(d / 2.0) * gamma(2.0 - d / 2.0);
        ensure((got - want).abs() <= 1e-6 * want.abs(), || format!("D={d}: {got} vs {want}"))?;
    }
    let at3 = eval_parametric(&s, None, Complex64::new(3.0, 0.0)).unwrap().re;
    ensure((at3 - PI * PI).abs() <= 1e-6 * PI * PI, || format!("D=3: {at3}"))?;
    let l = laurent_extract(&s, None, 4, (-2, 1), CircleOptions::default()).unwrap();
    let oracle = bubble_oracle();
    let (am1, a0) = (l.coeff(-1).unwrap(), l.coeff(0).unwrap());
    ensure((am1 - oracle[0]).abs() <= 1e-3 * oracle[0].abs(), || format!("a_-1 = {am1}"))?;
    ensure((a0 - oracle[1]).abs() <= 1e-4 * oracle[1].abs(), || format!("a_0 = {a0} vs {}", oracle[1]))?;
    let a1 = l.coeff(1).unwrap();
    ensure((a1 - oracle[2]).abs() <= 1e-4 * oracle[2].abs(), || format!("a_1 = {a1} vs {}", oracle[2]))?;
    Ok(format!("D=3 value {at3:.9}, a_-1 {am1:.7}, a_0 {a0:.7}"))
}

fn renormalized_finiteness() -> Outcome {
    let e = entry("phi4/fish");
    let r = Root::new(&e.theory, &e.graph);
    let amp = amplitude(&e.theory, &e.graph.graph).unwrap();
    let a = laurent_extract(&amp.integrand, None, 4, (-1, 2), CircleOptions::default()).unwrap();
    let (_, plus, _) = birkhoff(&Character::feynman(2), Scheme::Minimal);
    let ren = integrate_series(&plus.on_pair(&r, &r.full()).unwrap(), &a).unwrap();
    for n in -3..0 {
        let c = ren.coeff(n).unwrap();
        ensure(c.abs() <= 1e-10, || format!("order {n}: {c}"))?;
    }
    let (z0, a0) = (ren.coeff(0).unwrap(), a.coeff(0).unwrap());
    ensure((z0 - a0).abs() <= 1e-10 * a0.abs(), || format!("z^0 {z0} vs a_0 {a0}"))?;
    Ok(format!("renormalized z^0 = {z0:.9}"))
}

fn main() {
    let criteria: [(u32, &str, Option<u64>, fn() -> Outcome); 10] = [
        (1, "coassociativity", Some(10), coassociativity),
        (2, "P2 coalgebra morphism", None, p2_morphism),
        (3, "convolution group", Some(60), convolution_group),
        (4, "block product interchange", None, block_interchange),
        (5, "Rota-Baxter family law", Some(5), rota_baxter),
        (6, "Birkhoff decomposition", None, birkhoff_decomposition),
        (7, "Gaussian closed form", Some(30), gaussian_closed_form),
        (8, "functoriality and stage law", None, functoriality),
        (9, "dimensional regularization numbers", Some(60), dimreg_numbers),
        (10, "renormalized value finiteness", None, renormalized_finiteness),
    ];
    let mut failed = 0;
    for (n, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panic: {}", p.downcast_ref::<String>().cloned().unwrap_or_default())));
        let took = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if took > Duration::from_secs(b) => Err(format!("over the {b} s budget")),
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {n:>2} {name:<36} {:>8.2} s  {detail}", took.as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
