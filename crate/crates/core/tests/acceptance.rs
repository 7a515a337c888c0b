mod common;

use std::time::Instant;

use hmass::experiments::{counterexample, random_colliding_sequence, random_segments, relax, shipped_lsc_sequences};
use hmass::flat::{flat_zero, simplicial_flat_upper};
use hmass::functionals::phi_h;
use hmass::hfunc::{small_mass_bound, verify_assumptions, HSpec};
use hmass::rectifiable::balls::BALL_FLAT_LEVEL;
use hmass::rectifiable::{blowup_ratio, RectifiableCurrent, RectifiablePatch};
use hmass::slicing::{calibrate_constant, haar_sample_seeded, intgeo_estimate, lsc_slice_check, slice_chain};
use hmass::Error;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn relaxation() -> Outcome {
    let start = Instant::now();
    let hs = [("abs", HSpec::abs()), ("power:0.5", HSpec::power(0.5).unwrap()), ("affine:1", HSpec::affine_indicator(1.0).unwrap())];
    let mut worst_gap = f64::INFINITY;
    for file in ["quarter_circle.json", "quarter_circle_theta4.json"] {
        let r = RectifiableCurrent::from_file(&common::data(file)).map_err(err)?;
        for (name, h) in &hs {
            let (_, o) = relax(&r, h, 0.01).map_err(err)?;
            let tag = format!("{file} {name}");
            ensure(o.phi_h <= o.h_mass_target + 0.01, || format!("{tag}: phi_h {} > M_H {} + 0.01", o.phi_h, o.h_mass_target))?;
            ensure(o.mass_p <= o.mass_target + 0.01, || format!("{tag}: mass {} > {} + 0.01", o.mass_p, o.mass_target))?;
            ensure(o.flat_upper <= 0.01, || format!("{tag}: flat bound {}", o.flat_upper))?;
            let gap = o.liminf.tail_gap.ok_or_else(|| format!("{tag}: no refinement reached the flat tail"))?;
            ensure(gap >= -1e-6, || format!("{tag}: liminf gap {gap}"))?;
            worst_gap = worst_gap.min(gap);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("runtime {secs:.1}s"))?;
    Ok(format!("6 runs, worst tail gap {worst_gap:.2e}, {secs:.1}s"))
}

fn counterexample_table() -> Outcome {
    let start = Instant::now();
    let abs = counterexample(&HSpec::abs(), 14).map_err(err)?;
    let pow = counterexample(&HSpec::power(0.5).unwrap(), 14).map_err(err)?;
    ensure(abs.len() == 14 && pow.len() == 14, || "expected rows i = 1..14".into())?;
    for r in &abs {
        ensure(r.phi_h == 1.0, || format!("abs i={}: phi_h = {}", r.i, r.phi_h))?;
    }
    for r in &pow {
        let expected = 2f64.powf(r.i as f64 / 2.0);
        ensure((r.phi_h - expected).abs() <= 1e-9, || format!("power i={}: {} vs {expected}", r.i, r.phi_h))?;
    }
    for w in abs.windows(2) {
        ensure(w[1].flat_cauchy < w[0].flat_cauchy, || format!("flat bound not decreasing at i={}", w[1].i))?;
    }
    for r in &abs {
        let cap = 3.0 * 2f64.powi(-(r.i as i32));
        ensure(r.flat_cauchy <= cap, || format!("i={}: flat bound {} > {cap}", r.i, r.flat_cauchy))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("runtime {secs:.1}s"))?;
    Ok(format!("i=1..14, last flat bound {:.3e}, {secs:.1}s", abs[13].flat_cauchy))
}

fn integral_geometry() -> Outcome {
    let start = Instant::now();
    let samples = 100_000;
    let cal = calibrate_constant(2, 1, samples, 11).map_err(err)?;
    let chain = random_segments(5, 23).map_err(err)?;
    let mut details = vec![format!("c(2,1)={:.4}±{:.4}", cal.c, cal.std_error)];
    for (name, h) in [("abs", HSpec::abs()), ("power:0.5", HSpec::power(0.5).unwrap())] {
        let truth = phi_h(&chain, &h).map_err(err)?;
        let est = intgeo_estimate(&chain, &h, samples, 37, Some((cal.c, cal.std_error))).map_err(err)?;
        let (value, se) = est.calibrated.expect("calibration supplied");
        ensure((value - truth).abs() <= 3.0 * se, || format!("{name}: {value} vs {truth}, se {se}"))?;
        ensure(se / value < 0.02, || format!("{name}: relative error {:.3}", se / value))?;
        details.push(format!("{name} z={:.2}", (value - truth) / se));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("runtime {secs:.1}s"))?;
    Ok(format!("{}, {secs:.1}s", details.join(", ")))
}

fn flat_oracles() -> Outcome {
    let mut rng = common::rng(4);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let (atoms, n) = common::random_integer_zero_chain(&mut rng);
        let scale = rng.random_range(0.5..2.0);
        let got = flat_zero(&common::zero_chain(n, &atoms, scale)).map_err(err)?;
        let want = scale * common::brute_force_flat(&atoms);
        ensure((got - want).abs() <= 1e-7, || format!("instance {k}: {got} vs {want}"))?;
        worst = worst.max((got - want).abs());
    }
    let square = common::unit_square_boundary();
    let levels = (0..=3).map(|l| simplicial_flat_upper(&square, l).map(|c| c.value)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    ensure((levels[0] - 1.0).abs() <= 1e-6, || format!("unit grid gives {}", levels[0]))?;
    for w in levels.windows(2) {
        ensure(w[1] <= w[0] + 1e-12, || format!("refinement increased the bound: {levels:?}"))?;
    }
    Ok(format!("200 matchings, worst deviation {worst:.1e}; square {levels:?}"))
}

fn invariants() -> Outcome {
    let mut rng = common::rng(5);
    for k in 0..500 {
        let n = rng.random_range(2..=4usize);
        let m = rng.random_range(2..=n.min(3));
        let p = common::random_pooled_chain(&mut rng, n, m);
        let dd = p.boundary().and_then(|b| b.boundary()).map_err(err)?;
        ensure(dd.is_empty(), || format!("chain {k}: boundary of boundary has {} terms", dd.len()))?;
    }
    for k in 0..500 {
        let n = rng.random_range(1..=4usize);
        let m = rng.random_range(1..=n.min(3));
        let (p, items) = common::random_disjoint_chain(&mut rng, n, m);
        let mass = p.mass().map_err(err)?;
        let oracle: f64 = items.iter().map(|(v, t)| t.abs() * common::gram_volume(v)).sum();
        let phi = phi_h(&p, &HSpec::abs()).map_err(err)?;
        ensure((phi - mass).abs() <= 1e-12 * mass.max(1.0), || format!("chain {k}: phi_abs {phi} vs mass {mass}"))?;
        ensure((mass - oracle).abs() <= 1e-9 * oracle.max(1.0), || format!("chain {k}: mass {mass} vs Gram {oracle}"))?;
    }

    let grid: Vec<f64> = (0..=64).map(|k| k as f64 / 16.0).collect();
    let builtins = [
        HSpec::abs(),
        HSpec::power(0.5).unwrap(),
        HSpec::power(0.1).unwrap(),
        HSpec::affine_indicator(1.0).unwrap(),
        HSpec::affine_indicator(0.25).unwrap(),
        HSpec::indicator(),
    ];
    for h in &builtins {
        let rep = verify_assumptions(h, &grid);
        ensure(rep.h1.passed && rep.h2.passed && rep.h3.passed, || format!("{} fails the verifier", h.to_json()))?;
    }
    let sq = HSpec::tabulated(grid.clone(), grid.iter().map(|t| t * t).collect(), true).map_err(err)?;
    let rep = verify_assumptions(&sq, &grid);
    let [a, b, excess] = rep.h2.witness.ok_or("theta^2 passed subadditivity")?;
    let recomputed = (a + b).powi(2) - a * a - b * b;
    ensure(!rep.h2.passed && excess > 0.0 && (recomputed - excess).abs() <= 1e-9, || {
        format!("bad witness ({a}, {b}, {excess})")
    })?;

    for theta in [0.01, 0.3, 1.0, 2.5, 17.0] {
        let got = small_mass_bound(&HSpec::power(0.5).unwrap(), theta).map_err(err)?.value;
        ensure((got - theta.sqrt()).abs() <= 1e-9, || format!("power: {got} vs {}", theta.sqrt()))?;
        for beta in [0.5, 1.0, 3.0] {
            let got = small_mass_bound(&HSpec::affine_indicator(beta).unwrap(), theta).map_err(err)?.value;
            let want = theta / (1.0 + beta * theta);
            ensure((got - want).abs() <= 1e-9, || format!("affine {beta}: {got} vs {want}"))?;
        }
    }

    let mut atoms = 0;
    for k in 0..100u64 {
        let (n, m) = [(2, 2), (3, 2), (3, 3)][k as usize % 3];
        let cycle = common::random_pooled_chain(&mut rng, n, m).boundary().map_err(err)?;
        let v = haar_sample_seeded(n, m - 1, 1000 + k).map_err(err)?;
        let (lo, hi) = projected_box(&cycle, &v);
        let slice = loop {
            let y: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| rng.random_range(*a..*b)).collect();
            match slice_chain(&cycle, &v, &y) {
                Ok(s) => break s,
                Err(Error::NonGenericSlice) => continue,
                Err(e) => return Err(err(e)),
            }
        };
        atoms += slice.zero_chain.atoms().len();
        let total = slice.zero_chain.total();
        ensure(total.abs() <= 1e-9, || format!("cycle {k}: slice total {total}"))?;
    }
    Ok(format!("500 boundaries, 500 masses, {} H specs, 100 cycle slices ({atoms} atoms)", builtins.len()))
}

fn projected_box(p: &hmass::chain::PolyhedralChain, v: &hmass::slicing::MPlane) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; v.dim()];
    let mut hi = vec![f64::NEG_INFINITY; v.dim()];
    for t in p.terms() {
        for x in t.simplex.vertices() {
            for (k, c) in v.project(x).into_iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
    }
    (lo, hi)
}

fn blowup() -> Outcome {
    let parabola = RectifiableCurrent::from_file(&common::data("parabola.json")).map_err(err)?;
    let ratios = [0.2, 0.1, 0.05]
        .iter()
        .map(|&rho| blowup_ratio(&parabola, &[0.0, 0.0], rho, BALL_FLAT_LEVEL))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    ensure(ratios.windows(2).all(|w| w[1] < w[0]), || format!("not decreasing: {ratios:?}"))?;
    let affine = RectifiableCurrent::single(RectifiablePatch::segment(&[0.0, 0.0], &[1.0, 2.0], 3.0).map_err(err)?);
    let flat = blowup_ratio(&affine, &[0.4, 0.8], 0.1, BALL_FLAT_LEVEL).map_err(err)?;
    ensure(flat <= 1e-6, || format!("affine bound {flat}"))?;
    Ok(format!("parabola {ratios:.4?}, affine {flat:.1e}"))
}

fn zero_dim_lsc() -> Outcome {
    let h = HSpec::power(0.5).unwrap();
    let mut seqs = shipped_lsc_sequences().map_err(err)?;
    for i in 0..50 {
        seqs.push(random_colliding_sequence(7, i).map_err(err)?);
    }
    for s in &seqs {
        let rep = lsc_slice_check(&s.sequence, &s.target, &h, 1e-9).map_err(err)?;
        ensure(rep.passed, || format!("{}: {rep:?}", s.name))?;
        ensure(rep.target_h_mass <= rep.tail_min_h_mass + 1e-9, || {
            format!("{}: {} > {}", s.name, rep.target_h_mass, rep.tail_min_h_mass)
        })?;
    }
    Ok(format!("{} sequences", seqs.len()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("relaxation two-sided check", relaxation),
        ("counterexample reproduction", counterexample_table),
        ("integral-geometric equality", integral_geometry),
        ("flat-norm oracle equivalence", flat_oracles),
        ("invariant suites", invariants),
        ("blow-up diagnostic", blowup),
        ("0-dimensional lsc", zero_dim_lsc),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
