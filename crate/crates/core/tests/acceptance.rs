//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` still run and still print FAIL
//! when they fail; they only do not change the exit code.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use teichlab::charts::{al_flip_literal, xl_flip_literal, AChart, XChart};
use teichlab::laminations::{a_coordinates, flip_curve, intersection_number, reconstruct_a, reconstruct_x, torus_slope_curve, x_coordinates, CurvePath};
use teichlab::markov::{dual_arc_exponential, enumerate_solutions, markov_from_x, markov_of_slope, markov_tree, torus_curve_slope, tree_solutions, verify_tree, Slope};
use teichlab::monodromy::{loop_monodromy_x, vertex_curve, ExactRatSqrt, Mat2, Scalar};
use teichlab::pairings::{closed_words, expected_extremes, symbolic_trace};
use teichlab::poisson::{bracket, casimir_monomial, coordinate, invariance_check_a, invariance_check_tropical, invariance_check_x};
use teichlab::semifield::{int, rat, random_expr, sf_eval_tag, tropical_limit_probe, PosRat, SemifieldTag, SfValue, TropQ, TropZ};
use teichlab::surface::{pentagon_word, transform_epsilon, triangulations_isomorphic, EdgeId, SurfaceSig, Triangulation};

type Outcome = (bool, String);

/// Criteria whose printed targets cannot be met, with the reason.
const KNOWN_UNATTAINABLE: &[(usize, &str)] = &[(1, "3276569 is not a Markov number; the figure value is a misprint of 3276509")];

const FIGURE: [u64; 33] = [
    1, 2, 5, 13, 29, 34, 89, 169, 194, 233, 433, 985, 1325, 2897, 6466, 7561, 14701, 37666, 43261, 51641, 96557, 135137, 294685, 499393, 1278818, 1686049, 3276569,
    4400489, 5741, 7453378, 8399329, 9077, 48928105,
];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let tree = markov_tree(6);
    let numbers = tree.numbers();
    let elapsed = start.elapsed().as_secs_f64();
    let missing: Vec<u64> = FIGURE.iter().copied().filter(|v| !numbers.contains(&BigInt::from(*v))).collect();
    // a missing value is only a tree-depth problem if it is a Markov number at all
    let solutions = enumerate_solutions(*FIGURE.iter().max().unwrap());
    let all: BTreeSet<u64> = solutions.iter().flat_map(|t| t.iter().copied()).collect();
    let not_markov: Vec<u64> = missing.iter().copied().filter(|v| !all.contains(v)).collect();
    let ok = missing.is_empty() && elapsed < 1.0;
    (ok, format!("{}/{} figure values in the depth-6 tree in {elapsed:.3}s; missing {missing:?}, of which not Markov numbers {not_markov:?}", FIGURE.len() - missing.len(), FIGURE.len()))
}

fn criterion_2() -> Outcome {
    let (checked, bad) = verify_tree(20);
    let a = enumerate_solutions(10_000);
    let b = tree_solutions(10_000);
    (bad == 0 && checked > 0 && a == b, format!("{checked} triples to depth 20, {bad} violations; {} solutions up to 10^4, tree restriction equal: {}", a.len(), a == b))
}

fn criterion_3() -> Outcome {
    let one = int(1);
    let m = markov_from_x(&one, &one, &one).unwrap();
    let exact = m.iter().all(|v| *v == ExactRatSqrt::rational(int(1)));
    let t = Triangulation::punctured_torus();
    let c = XChart::<PosRat>::ones(&t);
    let mut traces = Vec::new();
    for (p, q) in [(1, 0), (0, 1), (1, -1)] {
        let l = &torus_slope_curve(p, q).unwrap().components[0];
        let mm: Mat2<f64> = loop_monodromy_x(&c, l).unwrap();
        traces.push(mm.trace().abs());
    }
    let ok = exact && traces.iter().all(|t| (t - 3.0).abs() <= 1e-9);
    (ok, format!("markov_from_x(1,1,1) exact: {exact}; traces {traces:?}"))
}

fn relabel_x<S: teichlab::semifield::Semifield>(c: &XChart<S>, iso: &[EdgeId], base: &Triangulation) -> XChart<S> {
    XChart::new(base.clone(), c.values().iter().map(|(&e, v)| (iso[e], v.clone())).collect()).unwrap()
}

fn relabel_a<S: teichlab::semifield::Semifield>(c: &AChart<S>, iso: &[EdgeId], base: &Triangulation) -> AChart<S> {
    let mut vals = c.values().to_vec();
    for (e, v) in c.values().iter().enumerate() {
        vals[iso[e]] = v.clone();
    }
    AChart::new(base.clone(), vals, false).unwrap()
}

fn criterion_4() -> Outcome {
    let t = Triangulation::disc_fan(5).unwrap();
    let d = t.internal_edges();
    let word = pentagon_word(d[0], d[1]);
    let end = t.apply_word(&word).unwrap();
    let Some(iso) = triangulations_isomorphic(&end, &t) else {
        return (false, "word does not return to the pentagon".into());
    };
    let swapped = iso[d[0]] == d[1] && iso[d[1]] == d[0];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut charts_ok = true;
    for _ in 0..20 {
        let xr = XChart::<PosRat>::from_fn(&t, |_| rat(rng.gen_range(1..20), rng.gen_range(1..20))).unwrap();
        let xt = XChart::<TropQ>::from_fn(&t, |_| rat(rng.gen_range(-20..20), rng.gen_range(1..5))).unwrap();
        let ar = AChart::<PosRat>::from_fn(&t, |_| rat(rng.gen_range(1..20), rng.gen_range(1..20))).unwrap();
        let at = AChart::<TropQ>::from_fn(&t, |_| rat(rng.gen_range(-20..20), rng.gen_range(1..5))).unwrap();
        charts_ok &= relabel_x(&xr.mutate_word(&word).unwrap().0, &iso, &t) == xr;
        charts_ok &= relabel_x(&xt.mutate_word(&word).unwrap().0, &iso, &t) == xt;
        charts_ok &= relabel_a(&ar.mutate_word(&word).unwrap().0, &iso, &t) == ar;
        charts_ok &= relabel_a(&at.mutate_word(&word).unwrap().0, &iso, &t) == at;
    }
    (swapped && charts_ok, format!("returns with diagonals exchanged: {swapped}; X/A charts over PosRat and TropQ restored exactly: {charts_ok}"))
}

fn sigs_small() -> Vec<SurfaceSig> {
    [(1, vec![0]), (0, vec![5]), (0, vec![8]), (0, vec![7, 3]), (1, vec![0, 2]), (0, vec![3, 0]), (1, vec![1]), (0, vec![0, 0, 0, 0]), (2, vec![0]), (0, vec![2, 1, 0, 0])]
        .into_iter()
        .map(|(g, b)| SurfaceSig::new(g, b))
        .collect()
}

/// Flippable edges whose flip keeps the triangulation free of self-folded triangles.
fn clean_flips(t: &Triangulation) -> Vec<EdgeId> {
    t.flippable_edges().into_iter().filter(|&e| !t.flip(e).map(|f| f.new.has_self_folded()).unwrap_or(true)).collect()
}

fn rpos(rng: &mut ChaCha8Rng) -> BigRational {
    rat(rng.gen_range(1..12), rng.gen_range(1..12))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut cases, mut bad) = (0, 0);
    while cases < 240 {
        for sig in sigs_small() {
            let t = Triangulation::random(&sig, &mut rng, 12).unwrap();
            let flips = clean_flips(&t);
            let Some(&e) = flips.choose(&mut rng) else { continue };
            let x = XChart::<PosRat>::from_fn(&t, |_| rpos(&mut rng)).unwrap();
            let a = AChart::<PosRat>::from_fn(&t, |_| rpos(&mut rng)).unwrap();
            let eps_ok = transform_epsilon(&t, &t.epsilon_matrix(), e).unwrap() == t.flip(e).unwrap().new.epsilon_matrix();
            let x_inv = x.mutate(e).unwrap().mutate(e).unwrap() == x;
            let a_inv = a.mutate(e).unwrap().mutate(e).unwrap() == a;
            let p_ok = a.mutate(e).unwrap().p_map() == a.p_map().mutate(e).unwrap();
            if !(eps_ok && x_inv && a_inv && p_ok) {
                bad += 1;
            }
            cases += 1;
        }
    }
    (bad == 0, format!("{cases} random (surface, chart, edge) cases, {bad} failures"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut cases, mut bad) = (0, 0);
    let sigs = sigs_small();
    while cases < 1000 {
        let sig = sigs.choose(&mut rng).unwrap();
        let t = Triangulation::random(sig, &mut rng, 8).unwrap();
        let flips = clean_flips(&t);
        let Some(&e) = flips.choose(&mut rng) else { continue };
        let x = XChart::<TropQ>::from_fn(&t, |_| int(rng.gen_range(-9..10))).unwrap();
        let a = AChart::<TropQ>::from_fn(&t, |_| int(rng.gen_range(-9..10))).unwrap();
        let xl = xl_flip_literal(&t, x.values(), e).unwrap();
        let al = al_flip_literal(&t, a.values(), e).unwrap();
        if x.mutate(e).unwrap().values() != &xl || a.mutate(e).unwrap().values() != al.as_slice() {
            bad += 1;
        }
        cases += 1;
    }
    let mut worst: f64 = 0.0;
    let vars = ["x", "y", "z"];
    for _ in 0..100 {
        let e = random_expr(&mut rng, &vars, 4);
        let env: BTreeMap<String, BigRational> = vars.iter().map(|v| (v.to_string(), int(rng.gen_range(-5..6)))).collect();
        let SfValue::Rat(trop) = sf_eval_tag(&e, &env, SemifieldTag::TropQ).unwrap() else { return (false, "tropical value is not rational".into()) };
        let probe = tropical_limit_probe(&e, &env, &[1e-3]).unwrap()[0];
        worst = worst.max((probe - teichlab::semifield::rat_to_f64(&trop)).abs());
    }
    (bad == 0 && worst < 1e-2, format!("{cases} integer charts, {bad} mismatches with the literal flips; worst limit-probe deviation {worst:.2e} at eps=1e-3"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let t = Triangulation::punctured_torus();
    let words = closed_words(&t, 10);
    let mut bad = 0;
    for w in &words {
        let p = symbolic_trace(&t, w, 1).unwrap();
        let hi = expected_extremes(&t, w, 1).unwrap();
        let lo: Vec<i64> = hi.iter().map(|x| -x).collect();
        if !p.all_coefficients_positive() || p.exponent_box() != Some((hi, lo)) {
            bad += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    (bad == 0 && elapsed < 60.0, format!("{} closed words up to length 10, {bad} failures, {elapsed:.1}s", words.len()))
}

fn same_up_to_sign(a: &ExactRatSqrt, b: &ExactRatSqrt) -> bool {
    a == b || *a == b.neg()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut parabolic, mut bad_parabolic, mut words_checked, mut bad_inv) = (0, 0, 0, 0);
    for sig in [SurfaceSig::new(1, vec![0]), SurfaceSig::new(0, vec![0, 0, 0, 0]), SurfaceSig::new(1, vec![0, 0]), SurfaceSig::new(0, vec![0, 0, 0])] {
        for _ in 0..6 {
            let t = Triangulation::random(&sig, &mut rng, 8).unwrap();
            // images of A points have every hole invariant equal to 1
            let a = AChart::<PosRat>::from_fn(&t, |_| rpos(&mut rng)).unwrap();
            let x = a.p_map();
            for v in t.holes() {
                let c = vertex_curve(&t, v).unwrap();
                let m: Mat2<f64> = loop_monodromy_x(&x, &c).unwrap();
                parabolic += 1;
                if (m.trace().abs() - 2.0).abs() > 1e-9 {
                    bad_parabolic += 1;
                }
            }
            // a general point, a mutation word, and loops carried along
            let x = XChart::<PosRat>::from_fn(&t, |_| rpos(&mut rng)).unwrap();
            let loops: Vec<CurvePath> = closed_words(&t, 4).into_iter().step_by(7).take(6).collect();
            let before: Vec<ExactRatSqrt> = loops.iter().map(|l| loop_monodromy_x::<PosRat, ExactRatSqrt>(&x, l).unwrap().trace()).collect();
            let mut hole_before: Vec<BigRational> = t.holes().iter().map(|&v| x.hole_invariant(v).unwrap()).collect();
            hole_before.sort();
            let len = rng.gen_range(1..=5);
            let (mut xc, mut ls) = (x.clone(), loops.clone());
            for _ in 0..len {
                let flips = clean_flips(xc.tri());
                let Some(&e) = flips.choose(&mut rng) else { break };
                ls = ls.iter().map(|l| flip_curve(xc.tri(), l, e).unwrap()).collect();
                xc = xc.mutate(e).unwrap();
            }
            let mut hole_after: Vec<BigRational> = xc.tri().holes().iter().map(|&v| xc.hole_invariant(v).unwrap()).collect();
            hole_after.sort();
            let after: Vec<ExactRatSqrt> = ls.iter().map(|l| loop_monodromy_x::<PosRat, ExactRatSqrt>(&xc, l).unwrap().trace()).collect();
            words_checked += 1;
            if hole_before != hole_after || before.iter().zip(&after).any(|(p, q)| !same_up_to_sign(p, q)) {
                bad_inv += 1;
            }
        }
    }
    (
        bad_parabolic == 0 && bad_inv == 0,
        format!("{parabolic} vertex loops at hole invariant 1, {bad_parabolic} non-parabolic; {words_checked} mutation words, {bad_inv} changed invariants or traces"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut cases, mut nonzero, mut casimir_bad) = (0, 0, 0);
    let sigs = sigs_small();
    while cases < 200 {
        let sig = sigs.choose(&mut rng).unwrap();
        let t = Triangulation::random(sig, &mut rng, 8).unwrap();
        let flips = clean_flips(&t);
        let Some(&e) = flips.choose(&mut rng) else { continue };
        let x = XChart::<PosRat>::from_fn(&t, |_| rpos(&mut rng)).unwrap();
        let a = AChart::<PosRat>::from_fn(&t, |_| rpos(&mut rng)).unwrap();
        for d in [invariance_check_x(&x, e).unwrap(), invariance_check_a(&a, e).unwrap(), invariance_check_tropical(&t, e).unwrap()] {
            if !d.is_zero() {
                nonzero += 1;
            }
        }
        for v in t.holes() {
            let r = casimir_monomial(&t, v);
            for b in t.internal_edges() {
                if !bracket(&x, &r, &coordinate(b)).unwrap().is_zero() {
                    casimir_bad += 1;
                }
            }
        }
        cases += 1;
    }
    (nonzero == 0 && casimir_bad == 0, format!("{cases} cases, {nonzero} nonzero deviations, {casimir_bad} nonvanishing Casimir brackets"))
}

fn criterion_10() -> Outcome {
    // torus curves whose coded slopes are 0, 1, 1/2, 1/3
    let targets = [(0, 1), (1, 1), (1, 2), (1, 3)];
    let mut rows = Vec::new();
    let mut ok = true;
    for (sp, sq) in targets {
        let want = Slope::from_i64(sp, sq).unwrap();
        let curve = (-4i64..=4).flat_map(|p| (-4i64..=4).map(move |q| (p, q))).find(|&(p, q)| num_integer::gcd(p, q) == 1 && torus_curve_slope(p, q).ok() == Some(want.clone()));
        let Some((p, q)) = curve else {
            ok = false;
            rows.push(format!("{want}: no curve"));
            continue;
        };
        let m = markov_of_slope(&want);
        let e = dual_arc_exponential(p, q).unwrap();
        let m_f = m.to_string().parse::<f64>().unwrap();
        ok &= (e - m_f).abs() <= 1e-9;
        rows.push(format!("{want}: curve ({p},{q}) M={m} e^l={e}"));
    }
    (ok, rows.join("; "))
}

fn xz(t: &Triangulation, v: &[i64]) -> XChart<TropZ> {
    XChart::new(t.clone(), t.internal_edges().into_iter().zip(v).map(|(e, &x)| (e, BigInt::from(x))).collect()).unwrap()
}

fn criterion_11() -> Outcome {
    let t = Triangulation::punctured_torus();
    let (mut n, mut bad) = (0, 0);
    for a in -4i64..=4 {
        for b in -4i64..=4 {
            for c in -4i64..=4 {
                let ch = xz(&t, &[a, b, c]);
                let m = reconstruct_x(&ch).unwrap();
                let back = x_coordinates(&t, &m.components, Some(&m.orientations)).unwrap();
                let as_q: BTreeMap<EdgeId, BigRational> = ch.values().iter().map(|(&e, x)| (e, BigRational::from_integer(x.clone()))).collect();
                n += 1;
                if back.values() != &as_q {
                    bad += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut m_disc = 0;
    for c in [5usize, 7] {
        for _ in 0..50 {
            let d = Triangulation::random(&SurfaceSig::new(0, vec![c as u32]), &mut rng, 6).unwrap();
            let v: Vec<BigRational> = (0..d.n_edges()).map(|_| rat(rng.gen_range(0..9), rng.gen_range(1..4))).collect();
            let ch = AChart::<TropQ>::new(d.clone(), v, false).unwrap();
            let m = reconstruct_a(&ch).unwrap();
            m_disc += 1;
            if a_coordinates(&d, &m.components).unwrap() != ch {
                bad += 1;
            }
        }
    }
    (bad == 0, format!("{n} torus X charts in [-4,4]^3 and {m_disc} disc A charts, {bad} failed round trips"))
}

fn criterion_12() -> Outcome {
    let mut slopes = Vec::new();
    for p in -5i64..=5 {
        for q in -5i64..=5 {
            // one representative per unoriented curve
            if num_integer::gcd(p, q) == 1 && (q > 0 || (q == 0 && p > 0)) {
                slopes.push((p, q));
            }
        }
    }
    let curves: Vec<_> = slopes.iter().map(|&(p, q)| torus_slope_curve(p, q).unwrap()).collect();
    let (mut n, mut bad) = (0, 0);
    for (i, &(p, q)) in slopes.iter().enumerate() {
        for (j, &(r, s)) in slopes.iter().enumerate() {
            let got = intersection_number(&curves[i], &curves[j]).unwrap();
            let want = BigRational::new(BigInt::from((p * s - q * r).abs()), BigInt::from(2));
            n += 1;
            if got != want || got.is_negative() {
                bad += 1;
            }
        }
    }
    (bad == 0, format!("{} slopes, {n} pairs, {bad} mismatches with |ps-qr|/2", slopes.len()))
}

fn main() -> ExitCode {
    let criteria: [(usize, fn() -> Outcome); 12] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut unexpected = 0;
    for (i, f) in criteria {
        let (ok, detail) = f();
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == i);
        let tag = if ok { "PASS" } else { "FAIL" };
        match (ok, known) {
            (false, Some((_, why))) => println!("criterion {i}: {tag} ({detail}) [known: {why}]"),
            (false, None) => {
                unexpected += 1;
                println!("criterion {i}: {tag} ({detail})");
            }
            _ => println!("criterion {i}: {tag} ({detail})"),
        }
    }
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
