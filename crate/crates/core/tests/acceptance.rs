//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use common::*;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};
use toricgit::build::{
    alpha_surface_formula, hirzebruch, product, projective_space, projectivized_bundle, segment, BundleSpec,
};
use toricgit::git::GitSetup;
use toricgit::klyachko::FiltrationSheaf;
use toricgit::linalg::{int_vec, rat, to_f64, to_rat_vec, Int, Rat};
use toricgit::minkowski::{
    ample_class_alpha, compatible_subgroups, converse_falsifier, minkowski_condition, solve_minkowski,
    verify_slope_identity, MinkowskiError, SearchOptions, SolverOptions,
};
use toricgit::polytope::DivisorClass;
use toricgit::stability::{
    check_stability, check_stability_with, max_line_slope, subsheaf_slope, Certainty, Polarization, SlopeValue,
    StabilityOptions, StabilityStatus,
};
use toricgit::{HPolytope, Sublattice, Subspace};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    let e = t.elapsed();
    ensure(e <= limit, format!("took {:.2?}, limit {:.0?}", e, limit))
}

fn p2_translated() -> HPolytope {
    poly(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[1, 1, 1])
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let setup = GitSetup::new(p2_translated(), Sublattice::new(2, &[int_vec(&[1, 1])]).unwrap()).unwrap();
    ensure(setup.is_generic(), "setup not generic")?;
    ensure(setup.stable_facets().len() == 2, format!("stable facets {:?}", setup.stable_facets()))?;
    let b = setup.b().unwrap();
    ensure(b.iter().all(|x| *x == Int::from(1)), format!("b = {b:?}"))?;
    let py = setup.quotient_polytope().unwrap();
    ensure(py.dim() == 1 && py.volume() == rat(2, 1), "quotient is not a lattice segment of length 2")?;
    let report = minkowski_condition(&setup).unwrap();
    ensure(report.holds && report.defect.iter().all(Zero::is_zero), "Minkowski defect nonzero")?;
    within(t, Duration::from_secs(1))?;
    Ok(format!("generic, 2 stable facets, b=(1,1), P_Y length 2, defect 0 in {:.2?}", t.elapsed()))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();
    for (n, expected) in [(2usize, 3usize), (3, 4)] {
        let p = projective_space(n, 1).unwrap();
        let r = compatible_subgroups(&p, &SearchOptions::default());
        ensure(r.subgroups.len() == expected, format!("P^{n}: {} subgroups, expected {expected}", r.subgroups.len()))?;
        ensure(r.subgroups.iter().all(|s| s.weighted_projective), format!("P^{n}: non-weighted-projective quotient"))?;
        ensure(r.upper_bound == Some(n as u128 + 1), format!("P^{n}: bound {:?}", r.upper_bound))?;
        let gens: Vec<String> = r.subgroups.iter().map(|s| format!("{:?}", s.generator)).collect();
        notes.push(format!("P^{n}: {}", gens.join(" ")));
    }
    within(t, Duration::from_secs(10))?;
    Ok(format!("{} in {:.2?}", notes.join("; "), t.elapsed()))
}

fn criterion_3() -> Outcome {
    for k in 1..=3 {
        let p = projective_space(2, k).unwrap();
        for f in 0..3 {
            ensure(p.facet_latvol(f).unwrap() == rat(k, 1), format!("O({k}) facet {f} latvol"))?;
        }
        let anti = DivisorClass::from_coefficients(&[rat(1, 1), rat(1, 1), rat(1, 1)]);
        ensure(p.degree(&anti).unwrap() == rat(3 * k, 1), format!("deg(-K) under O({k})"))?;
    }
    let f1 = hirzebruch(1, &[rat(0, 1), rat(0, 1), rat(2, 1), rat(1, 1)]).unwrap();
    let vols = f1.facet_latvols();
    let mut sum = vec![Rat::zero(); 2];
    for (f, v) in f1.facets().iter().zip(&vols) {
        for (s, u) in sum.iter_mut().zip(to_rat_vec(&f.normal)) {
            *s += v * u;
        }
    }
    ensure(sum.iter().all(Zero::is_zero), "F_1: weighted normals do not cancel")?;
    let shown: Vec<String> = vols.iter().map(|v| v.to_string()).collect();
    Ok(format!("P^2 latvol = k and deg(-K) = 3k for k=1..3; F_1 volumes ({}) balance", shown.join(",")))
}

fn jump_divisible(setup: &GitSetup, s: &FiltrationSheaf) -> bool {
    setup.stable_facets().iter().zip(setup.b().unwrap()).all(|(&f, b)| {
        let b = b.to_i64().unwrap();
        s.dimension_jumps(f).keys().all(|i| i % b == 0)
    })
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let mut rng = rng(4);
    let (mut descending, mut with_b) = (0, 0);
    for case in 0..200 {
        let setup = random_generic_setup(&mut rng);
        let b: Vec<i64> = setup.b().unwrap().iter().map(|x| x.to_i64().unwrap()).collect();
        if b.iter().any(|&x| x > 1) {
            with_b += 1;
        }
        let r = rng.gen_range(1..=3);
        let y = random_sheaf(&mut rng, r, setup.stable_facets().len(), -3, 3);
        let i = random_index(&mut rng, &setup);
        let x = setup.pullback_functor(&i, &y).unwrap();
        ensure(setup.pushforward(&x).unwrap() == y, format!("case {case}: pushforward∘pullback ≠ id"))?;
        ensure(
            setup.restrict_to_stable(&x).unwrap() == setup.pullback(&y).unwrap(),
            format!("case {case}: functor disagrees with pullback on stable facets"),
        )?;

        let mut moduli = vec![1i64; setup.polytope().facet_count()];
        for (&f, &bf) in setup.stable_facets().iter().zip(&b) {
            moduli[f] = bf;
        }
        let s = random_sheaf_mod(&mut rng, r, &moduli, 0.6);
        let d = setup.descends(&s).unwrap();
        let oracle = jump_divisible(&setup, &s);
        let stable = setup.restrict_to_stable(&s).unwrap();
        let round = setup.pullback(&setup.pushforward(&s).unwrap()).unwrap() == stable;
        ensure(
            d == oracle && d == round,
            format!("case {case}: descends={d}, divisibility={oracle}, round-trip={round}"),
        )?;
        if d {
            descending += 1;
            let w = Subspace::span(r, &random_frame(&mut rng, r, &[])[..rng.gen_range(1..=r)]).unwrap();
            let sub = s.subsheaf(&w).unwrap();
            ensure(
                setup.descends(&sub).unwrap(),
                format!("case {case}: subsheaf of a descending sheaf does not descend"),
            )?;
        }
    }
    within(t, Duration::from_secs(60))?;
    Ok(format!("200 setups ({with_b} with some b_F > 1), {descending} descending sheaves, in {:.2?}", t.elapsed()))
}

fn criterion_5() -> Outcome {
    let mut rng = rng(5);
    for case in 0..200 {
        let setup = random_generic_setup(&mut rng);
        let b: Vec<i64> = setup.b().unwrap().iter().map(|x| x.to_i64().unwrap()).collect();
        let r = rng.gen_range(1..=3);
        let y = random_sheaf(&mut rng, r, setup.stable_facets().len(), -3, 3);
        let i = random_index(&mut rng, &setup);
        let x = setup.pullback_functor(&i, &y).unwrap();
        for (j, (&f, &bf)) in setup.stable_facets().iter().zip(&b).enumerate() {
            let expected: BTreeMap<i64, i64> = y.dimension_jumps(j).into_iter().map(|(k, e)| (bf * k, e)).collect();
            ensure(x.dimension_jumps(f) == expected, format!("case {case}: jumps on stable facet {f}"))?;
            ensure(
                x.det_indices()[f] == bf * y.det_indices()[j],
                format!("case {case}: det index on stable facet {f}"),
            )?;
        }
        for (&f, &at) in &i {
            ensure(
                x.dimension_jumps(f) == BTreeMap::from([(at, -(r as i64))]),
                format!("case {case}: unstable facet {f}"),
            )?;
        }
        let j1 = rng.gen_range(0..setup.stable_facets().len());
        let mut coeffs = vec![0i64; setup.stable_facets().len()];
        coeffs[j1] = 1;
        let lifted = setup.pullback_functor(&i, &FiltrationSheaf::line_bundle(&coeffs)).unwrap();
        let mut expected = DivisorClass::prime(setup.stable_facets()[j1]).scaled(&rat(b[j1], 1));
        for (&f, &at) in &i {
            expected.add_term(f, rat(-at, 1));
        }
        ensure(lifted.first_chern() == expected, format!("case {case}: lifted line bundle divisor"))?;
    }
    Ok("jumps, det indices and lifted line bundles match on 200 random cases".into())
}

fn bundle_spec(divisors: Vec<Vec<i64>>, w: i64, h: i64) -> BundleSpec {
    let base = product(&segment(rat(0, 1), rat(w, 1)).unwrap(), &segment(rat(0, 1), rat(h, 1)).unwrap()).unwrap();
    BundleSpec::new(base, divisors.iter().map(|d| int_vec(d)).collect()).unwrap()
}

fn main_bundle() -> BundleSpec {
    bundle_spec(vec![vec![1, 0, 0, 0], vec![0, 0, 1, 0]], 2, 2)
}

fn tight_solver() -> SolverOptions {
    SolverOptions { tol: 1e-9, ..SolverOptions::default() }
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let setup = projectivized_bundle(&main_bundle()).unwrap();
    let alpha = ample_class_alpha(&setup, &tight_solver()).map_err(|e| e.to_string())?;
    let mut rng = rng(6);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let r = 1 + case % 3;
        let y = random_sheaf(&mut rng, r, 4, -3, 3);
        let i = if case % 2 == 0 { setup.zero_index() } else { random_index(&mut rng, &setup) };
        let id = verify_slope_identity(&setup, &y, &i, &alpha).map_err(|e| e.to_string())?;
        worst = worst.max(id.residual);
    }
    ensure(worst <= 1e-5, format!("worst residual {worst:e}"))?;
    within(t, Duration::from_secs(300))?;
    Ok(format!(
        "50 sheaves, worst |LHS-RHS| = {worst:.3e}, solver residual {:.2e}, {:.2?}",
        alpha.residual,
        t.elapsed()
    ))
}

/// Supports of a polytope recentred at its vertex barycenter, unit-normalized.
fn centred_direction(p: &HPolytope) -> Vec<f64> {
    let verts = p.vertices();
    let n = p.dim();
    let c: Vec<f64> = (0..n).map(|k| verts.iter().map(|v| to_f64(&v[k])).sum::<f64>() / verts.len() as f64).collect();
    let a: Vec<f64> = p
        .facets()
        .iter()
        .map(|f| to_f64(&f.support) + f.normal.iter().zip(&c).map(|(u, x)| u.to_f64().unwrap() * x).sum::<f64>())
        .collect();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    a.iter().map(|x| x / norm).collect()
}

fn alpha_matches(spec: &BundleSpec, reference: &[Rat]) -> Result<f64, String> {
    let setup = projectivized_bundle(spec).unwrap();
    let alpha = ample_class_alpha(&setup, &tight_solver()).map_err(|e| e.to_string())?;
    let base = &spec.base;
    let formula = HPolytope::from_parts(2, &base.normals(), reference).map_err(|e| e.to_string())?;
    let want = centred_direction(&formula);
    // quotient facet j is the stable facet stable[j], which is base facet stable[j]
    let got_poly = centred_direction(&alpha.polytope);
    let mut got = vec![0.0; want.len()];
    for (j, &f) in setup.stable_facets().iter().enumerate() {
        got[f] = got_poly[j];
    }
    Ok(got.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

fn criterion_7() -> Outcome {
    let spec = main_bundle();
    let formula = alpha_surface_formula(&spec).unwrap().to_vec(4);
    let err = alpha_matches(&spec, &formula)?;
    ensure(err <= 1e-4, format!("α vs 3c1(L_Y)+c1(V): max deviation {err:e}"))?;
    let mut controls = Vec::new();
    for (w, h) in [(2, 2), (2, 3)] {
        let trivial = bundle_spec(vec![vec![0, 0, 0, 0], vec![0, 0, 0, 0]], w, h);
        let supports = trivial.base.supports();
        let e = alpha_matches(&trivial, &supports)?;
        ensure(e <= 1e-4, format!("trivial bundle over [0,{w}]x[0,{h}]: deviation {e:e}"))?;
        controls.push(format!("{e:.1e}"));
    }
    let shown: Vec<String> = formula.iter().map(|q| q.to_string()).collect();
    Ok(format!(
        "formula supports ({}) matched within {err:.1e}; trivial-bundle controls {}",
        shown.join(","),
        controls.join(", ")
    ))
}

fn criterion_8() -> Outcome {
    let spec = main_bundle();
    let setup = projectivized_bundle(&spec).unwrap();
    let alpha = ample_class_alpha(&setup, &tight_solver()).map_err(|e| e.to_string())?;
    let pol = alpha.polarization(1e-7);
    let opts = StabilityOptions::default();
    let mut rng = rng(8);
    let mut counts = BTreeMap::new();
    for case in 0..20 {
        let y = random_sheaf(&mut rng, 2, 4, -2, 2);
        let vy = check_stability_with(&y, &pol, &opts).unwrap();
        let x = setup.pullback_functor(&setup.zero_index(), &y).unwrap();
        let vx = check_stability(&x, setup.polytope(), &opts).unwrap();
        ensure(
            vy.certainty == Certainty::Certified && vx.certainty == Certainty::Certified,
            format!("case {case}: uncertified verdict"),
        )?;
        ensure(vy.status == vx.status, format!("case {case}: Y says {:?}, X says {:?}", vy.status, vx.status))?;
        *counts.entry(format!("{:?}", vy.status)).or_insert(0) += 1;
    }
    Ok(format!("20 rank-2 sheaves agree, verdicts {counts:?}"))
}

fn criterion_9() -> Outcome {
    let perturbed = GitSetup::new(
        poly(2, &[&[1, 0], &[0, 1], &[-1, -1], &[0, -1]], &[1, 1, 2, 2]),
        Sublattice::new(2, &[int_vec(&[1, 1])]).unwrap(),
    )
    .unwrap();
    let cx = converse_falsifier(&perturbed).unwrap().ok_or("no counterexample on the perturbed setup")?;
    ensure(cx.x_slopes.0 == cx.x_slopes.1, "X-slopes differ")?;
    let distinct: BTreeSet<&Rat> = cx.ratios.iter().collect();
    ensure(distinct.len() > 1, "ratio c is constant")?;
    let mut bundles = 0;
    for divisors in
        [vec![vec![1, 0, 0, 0], vec![0, 0, 1, 0]], vec![vec![0, 0, 0, 0], vec![0, 0, 0, 0]], vec![vec![1, 0, 1, 0]]]
    {
        let setup = projectivized_bundle(&bundle_spec(divisors, 2, 3)).unwrap();
        ensure(converse_falsifier(&setup).unwrap().is_none(), "falsifier fired on a bundle setup")?;
        bundles += 1;
    }
    let shown: Vec<String> = cx.ratios.iter().map(|q| q.to_string()).collect();
    Ok(format!(
        "perturbed setup: equal X-slopes {}, ratios ({}); {bundles} bundle setups: none",
        cx.x_slopes.0,
        shown.join(",")
    ))
}

fn criterion_10() -> Outcome {
    let normals = vec![int_vec(&[1, 0]), int_vec(&[0, 1]), int_vec(&[-1, 0]), int_vec(&[0, -1])];
    let targets = vec![rat(2, 1), rat(1, 1), rat(2, 1), rat(1, 1)];
    let a = solve_minkowski(2, &normals, &targets, &SolverOptions::default()).map_err(|e| e.to_string())?;
    ensure(a.residual <= 1e-6, format!("residual {:e}", a.residual))?;
    let expected = [0.5, 1.0, 0.5, 1.0];
    let dev = a.supports.iter().zip(expected).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-5, format!("not the 1x2 rectangle: {:?}", a.supports))?;
    let exact = a.polytope.facet_latvols();
    let exact_res =
        exact.iter().zip(&targets).map(|(l, f)| (to_f64(l) - to_f64(f)).abs() / to_f64(f)).fold(0.0, f64::max);
    ensure(exact_res <= 1e-6, format!("exact latvol residual {exact_res:e}"))?;
    let mut spread = 0.0f64;
    for restart in 1..=2 {
        let b = solve_minkowski(2, &normals, &targets, &SolverOptions { restart, seed: 99, ..Default::default() })
            .map_err(|e| e.to_string())?;
        spread = spread.max(a.supports.iter().zip(&b.supports).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    ensure(spread <= 1e-5, format!("restarts differ by {spread:e}"))?;
    let bad = vec![rat(2, 1), rat(1, 1), rat(1, 1), rat(1, 1)];
    let rejected = matches!(
        solve_minkowski(2, &normals, &bad, &SolverOptions::default()),
        Err(MinkowskiError::InfeasibleTargets { .. })
    );
    ensure(rejected, "infeasible targets accepted")?;
    Ok(format!("1x2 rectangle, residual {:.1e}, restart spread {spread:.1e}, infeasible rejected", a.residual))
}

fn criterion_11() -> Outcome {
    let p = projective_space(2, 1).unwrap();
    let opts = StabilityOptions::default();
    let t = FiltrationSheaf::tangent(&p);
    let v = check_stability(&t, &p, &opts).unwrap();
    ensure(
        v.status == StabilityStatus::Stable
            && v.certainty == Certainty::Certified
            && v.slope == SlopeValue::Exact(rat(3, 2)),
        format!("tangent sheaf verdict {:?}/{:?} slope {:?}", v.status, v.certainty, v.slope),
    )?;
    for a in -2..=2i64 {
        for b in -2..=2i64 {
            let s =
                FiltrationSheaf::line_bundle(&[a, 0, 0]).direct_sum(&FiltrationSheaf::line_bundle(&[0, b, 0])).unwrap();
            let v = check_stability(&s, &p, &opts).unwrap();
            let want = if a == b { StabilityStatus::Semistable } else { StabilityStatus::Unstable };
            ensure(v.status == want, format!("O({a})+O({b}): {:?}", v.status))?;
        }
    }
    let mut rng = rng(11);
    let pol = Polarization::from_polytope(&p);
    for case in 0..50 {
        let s = random_sheaf(&mut rng, 2, 3, -3, 3);
        let (best, _, _) = max_line_slope(&s, &pol, 10_000).unwrap();
        let best = best.as_exact().unwrap().clone();
        for _ in 0..500 {
            let line = loop {
                let v: Vec<Rat> = (0..2).map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=5))).collect();
                if v.iter().any(|x| !x.is_zero()) {
                    break Subspace::line(v);
                }
            };
            let sl = subsheaf_slope(&s, &line, &pol);
            ensure(sl.as_exact().unwrap() <= &best, format!("case {case}: random line beats the closure maximum"))?;
        }
    }
    Ok("T_P2 stable/certified with slope 3/2; 25 split sums match sign(a-b); closure dominates 25000 random lines"
        .into())
}

fn main() {
    let criteria: [Check; 11] = [
        ("P2 pipeline", criterion_1),
        ("compatible subgroups", criterion_2),
        ("latvol equals degree", criterion_3),
        ("descent round-trips", criterion_4),
        ("functor identities", criterion_5),
        ("slope identity", criterion_6),
        ("alpha formula", criterion_7),
        ("stability preservation", criterion_8),
        ("converse falsifier", criterion_9),
        ("Minkowski solver", criterion_10),
        ("stability oracle", criterion_11),
    ];
    std::panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
