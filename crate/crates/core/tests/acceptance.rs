//! End-to-end acceptance checks. Runs without the test harness and prints
//! one PASS/FAIL line per criterion.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use approx::abs_diff_eq;
use nalgebra::DMatrix;
use parconv::duality::{module_from_set, roundtrip_distance, ModuleElement};
use parconv::gamma::{
    check_compression, eval_paff_matrix, random_isometry, random_paff, random_symmetric, reducing_pair,
    y2_pair_residuals, Isometry, MatrixTuple,
};
use parconv::geometry::{fig1, l_set, m_set, triangle, unit_box, PartiallyConvexSet, DEFAULT_RESOLUTION};
use parconv::lp::{support, Halfspace};
use parconv::paff::{
    approx_bernstein, recover_coefficients, sup_distance, CAffFunction, InteriorSelection, PAffPolynomial,
};
use parconv::poly::MultiPoly;
use parconv::regularity::{check_regular, Verdict, DEFAULT_TOL_RATE};
use parconv::separation::{separate_polynomial, validate_certificate, Branch, DEFAULT_TOL};
use parconv::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Interval `[lo, hi]` cut out by one-dimensional rows, computed directly.
fn interval_of(rows: &[Halfspace]) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for r in rows {
        let a = r.a[0];
        if a > 0.0 {
            hi = hi.min(r.b / a);
        } else if a < 0.0 {
            lo = lo.max(r.b / a);
        } else if r.b < 0.0 {
            return None;
        }
    }
    (lo <= hi + 1e-12).then_some((lo, hi))
}

fn slice_nonempty(set: &PartiallyConvexSet, k: usize) -> bool {
    let y = set.grid().point(k);
    let rows = set.rows_at(y).expect("grid point in box");
    if set.n() == 1 {
        interval_of(&rows).is_some()
    } else {
        !set.slice_at(k).vertices().is_empty()
    }
}

fn random_poly<R: Rng>(rng: &mut R, degree: u32, range: f64) -> MultiPoly {
    let terms: Vec<(Vec<u32>, f64)> = (0..=degree).map(|e| (vec![e], rng.gen_range(-range..range))).collect();
    MultiPoly::from_terms(1, terms).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = DEFAULT_RESOLUTION;
    let sets: Vec<(&str, PartiallyConvexSet)> = vec![
        ("fig1", fig1(r)),
        ("unit_box", unit_box(1, 1, r)),
        ("l_set", l_set(r)),
        ("m_set", m_set(r)),
        ("triangle", triangle(r)),
        ("unit_box:2:1", unit_box(2, 1, 11)),
    ];
    let (mut empty_cases, mut worst_min) = (0, f64::INFINITY);
    for i in 0..100 {
        let (name, set) = &sets[i % sets.len()];
        let (lo, hi) = set.grid().y_box()[0];
        let (x, y) = loop {
            let x: Vec<f64> = (0..set.n()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y = vec![rng.gen_range(lo - 0.5..hi + 0.5)];
            if !set.membership(&x, &y) {
                break (x, y);
            }
        };
        let cert = separate_polynomial(set, &x, &y).map_err(|e| format!("{name} z=({x:?},{y:?}): {e}"))?;
        let report = validate_certificate(set, &cert, &x, &y, DEFAULT_TOL);
        let min = report.min_on_k.unwrap_or(0.0);
        worst_min = worst_min.min(min);
        ensure(min >= -1e-7 && report.value_at_z < 0.0, || {
            format!("{name} z=({x:?},{y:?}): min {min:e}, p(z) {:e}", report.value_at_z)
        })?;
        if cert.branch == Branch::SliceEmpty {
            empty_cases += 1;
            let gamma = (0..set.grid().len())
                .filter(|&k| slice_nonempty(set, k))
                .map(|k| (set.grid().point(k)[0] - y[0]).powi(2))
                .fold(f64::INFINITY, f64::min);
            let got = cert.gamma.ok_or("empty branch without gamma")?;
            ensure((got - gamma).abs() <= 1e-6, || {
                format!("{name}: gamma {got} vs oracle {gamma}")
            })?;
            ensure(cert.big_m >= 1.0 / gamma - 1e-12, || {
                format!("{name}: M {} < 1/gamma {}", cert.big_m, 1.0 / gamma)
            })?;
        }
    }
    ensure(empty_cases > 0, || "no empty-slice instance drawn".into())?;
    Ok(format!(
        "100 instances, {empty_cases} empty-slice, worst min on K {worst_min:.3e}"
    ))
}

#[allow(clippy::approx_constant)]
fn criterion_2() -> Outcome {
    let set = fig1(DEFAULT_RESOLUTION);
    let slice = set.slice(&[0.0]).map_err(|e| e.to_string())?;
    let hi = support(&slice, &[1.0]).map_err(|e| e.to_string())?;
    let lo = -support(&slice, &[-1.0]).map_err(|e| e.to_string())?;
    ensure((hi - 0.70711).abs() <= 1e-5 && (lo + 0.70711).abs() <= 1e-5, || {
        format!("slice [{lo}, {hi}]")
    })?;
    let cert = separate_polynomial(&set, &[0.0], &[2.0]).map_err(|e| e.to_string())?;
    let report = validate_certificate(&set, &cert, &[0.0], &[2.0], DEFAULT_TOL);
    ensure(
        cert.branch == Branch::SliceEmpty && cert.v == vec![0.0] && cert.c == -1.0 && cert.big_m == 1.0 && report.pass,
        || format!("certificate {cert:?}, report {report:?}"),
    )?;
    Ok(format!(
        "slice [{lo:.5}, {hi:.5}], p = -1 + (y - 2)^2, p(z) = {}",
        report.value_at_z
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sets = [unit_box(1, 1, DEFAULT_RESOLUTION), fig1(DEFAULT_RESOLUTION)];
    let (mut worst, mut disagreement): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let p = PAffPolynomial::new(1, 1, vec![random_poly(&mut rng, 3, 2.0), random_poly(&mut rng, 3, 2.0)]).unwrap();
        for set in &sets {
            let f = |x: &[f64], y: &[f64]| p.eval(x, y);
            let a = recover_coefficients(set, f, InteriorSelection::Axis).map_err(|e| e.to_string())?;
            let b = recover_coefficients(set, f, InteriorSelection::Reflected).map_err(|e| e.to_string())?;
            for (k, y) in set.grid().points().iter().enumerate() {
                let exact = p.coefficient_values(y);
                let (ca, cb) = (a.values()[k].as_ref().unwrap(), b.values()[k].as_ref().unwrap());
                for i in 0..2 {
                    worst = worst.max((ca[i] - exact[i]).abs());
                    disagreement = disagreement.max((ca[i] - cb[i]).abs());
                }
            }
        }
    }
    ensure(worst <= 1e-8, || format!("recovery error {worst:e}"))?;
    ensure(disagreement <= 1e-7, || {
        format!("selection disagreement {disagreement:e}")
    })?;
    let tri = triangle(DEFAULT_RESOLUTION);
    match recover_coefficients(&tri, |x: &[f64], _: &[f64]| x[0], InteriorSelection::Axis) {
        Err(Error::DegenerateSlice { y, .. }) if y == vec![0.0] => {}
        other => return Err(format!("triangle gave {other:?}")),
    }
    Ok(format!(
        "max error {worst:.2e}, selections differ by {disagreement:.2e}, triangle degenerate at y = 0"
    ))
}

/// Random convex or concave profile on `[0, 1]`.
fn random_profile<R: Rng>(rng: &mut R) -> impl Fn(f64) -> f64 {
    let (a, b, c) = (
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.0..1.0),
    );
    let (t, s) = (rng.gen_range(0.0..1.0), rng.gen_range(-2.0..2.0));
    let (l0, l1) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    move |y: f64| sign * (a * y * y + b * (y - t).abs() + c * (s * y).exp()) + l0 + l1 * y
}

fn criterion_4() -> Outcome {
    let set = unit_box(1, 1, 101);
    let sampled = |f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64| {
        let values = set
            .grid()
            .points()
            .iter()
            .map(|y| Some(vec![f(y[0]), g(y[0])]))
            .collect();
        CAffFunction::new(1, set.grid().clone(), values).unwrap()
    };
    let sq = sampled(&|y| y * y, &|_| 0.0);
    let p2 = approx_bernstein(&sq, 2).map_err(|e| e.to_string())?;
    let at_half = (p2.coefficient_values(&[0.5])[0] - 0.25).abs();
    ensure(abs_diff_eq!(at_half, 0.125, epsilon = 1e-9), || {
        format!("error at 0.5: {at_half}")
    })?;
    let sup = sup_distance(&set, &sq, &p2);
    ensure(abs_diff_eq!(sup, 0.125, epsilon = 1e-9), || format!("sup error {sup}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..20 {
        let (f, g) = (random_profile(&mut rng), random_profile(&mut rng));
        let c = sampled(&f, &g);
        let errs: Vec<f64> = [2, 4, 8, 16]
            .iter()
            .map(|&d| sup_distance(&set, &c, &approx_bernstein(&c, d).unwrap()))
            .collect();
        ensure(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12), || {
            format!("profile {i}: errors {errs:?}")
        })?;
    }

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, b, c, d) = (
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        let aff = sampled(&|y| a + b * y, &|y| c + d * y);
        let p1 = approx_bernstein(&aff, 1).unwrap();
        for y in set.grid().points() {
            let v = p1.coefficient_values(y);
            worst = worst.max((v[0] - a - b * y[0]).abs()).max((v[1] - c - d * y[0]).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("degree-1 error {worst:e}"))?;
    Ok(format!(
        "B_2(y^2) error 0.125, 20 profiles monotone over 2,4,8,16, affine error {worst:.1e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    for r in [DEFAULT_RESOLUTION, 2 * DEFAULT_RESOLUTION - 1] {
        let fig = check_regular(&fig1(r), DEFAULT_TOL_RATE);
        let l = check_regular(&l_set(r), DEFAULT_TOL_RATE);
        let tri = check_regular(&triangle(r), DEFAULT_TOL_RATE);
        let m = check_regular(&m_set(r), DEFAULT_TOL_RATE);
        ensure(fig.verdict == Verdict::Regular, || {
            format!("fig1 at {r}: {:?}", fig.verdict)
        })?;
        ensure(l.verdict == Verdict::Regular, || {
            format!("l_set at {r}: {:?}", l.verdict)
        })?;
        ensure(
            tri.verdict == Verdict::NotRegular
                && !tri.interior.all_ok
                && tri.reason.as_deref().is_some_and(|s| s.contains("interior")),
            || format!("triangle at {r}: {:?} {:?}", tri.verdict, tri.reason),
        )?;
        ensure(
            m.verdict == Verdict::NotRegular && !m.lhc.ok && m.uhc.ok && m.interior.all_ok,
            || format!("m_set at {r}: {:?} lhc {} uhc {}", m.verdict, m.lhc.ok, m.uhc.ok),
        )?;
        lines.push(format!("{r} pts ok"));
    }
    Ok(format!(
        "fig1, l_set regular; triangle interior; m_set lhc only; {}",
        lines.join(", ")
    ))
}

fn criterion_6() -> Outcome {
    let r = DEFAULT_RESOLUTION;
    let mut worst: f64 = 0.0;
    for (name, set) in [
        ("unit_box", unit_box(1, 1, r)),
        ("unit_box:2:1", unit_box(2, 1, 11)),
        ("l_set", l_set(r)),
        ("fig1", fig1(r)),
    ] {
        let d = roundtrip_distance(&set).map_err(|e| format!("{name}: {e}"))?;
        ensure(d <= 1e-6, || format!("{name}: distance {d:e}"))?;
        worst = worst.max(d);
        let back = module_from_set(&set)
            .and_then(|m| m.state_space())
            .map_err(|e| format!("{name}: {e}"))?;
        let verdict = check_regular(&back, DEFAULT_TOL_RATE).verdict;
        ensure(verdict == Verdict::Regular, || {
            format!("{name}: state space {verdict:?}")
        })?;
    }
    Ok(format!("worst round-trip distance {worst:.2e}, state spaces regular"))
}

fn random_element<R: Rng>(rng: &mut R) -> (Vec<MultiPoly>, ModuleElement) {
    let polys = vec![random_poly(rng, 2, 1.0), random_poly(rng, 2, 1.0)];
    (polys.clone(), ModuleElement::from_polys(polys))
}

fn criterion_7() -> Outcome {
    let set = fig1(DEFAULT_RESOLUTION);
    let module = module_from_set(&set).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst, mut worst_rate): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let (polys, a) = random_element(&mut rng);
        let profile = module.global_norm(&a).map_err(|e| e.to_string())?;
        let fiber_max = (0..module.grid().len())
            .map(|k| module.fiber_norm(&a, k).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        ensure(profile.value == fiber_max, || {
            format!("global {} vs fiber max {fiber_max}", profile.value)
        })?;
        for (k, y) in set.grid().points().iter().enumerate() {
            let (lo, hi) = interval_of(&set.rows_at(y).unwrap()).unwrap();
            let (c0, c1) = (polys[0].eval(y), polys[1].eval(y));
            let oracle = (c0 + c1 * lo).abs().max((c0 + c1 * hi).abs());
            worst = worst.max((profile.profile[k] - oracle).abs());
        }
        for k in 1..profile.profile.len() {
            let gap = (set.grid().point(k)[0] - set.grid().point(k - 1)[0]).abs();
            worst_rate = worst_rate.max((profile.profile[k] - profile.profile[k - 1]).abs() / gap);
        }
    }
    ensure(worst <= 1e-7, || format!("fiber norm vs oracle {worst:e}"))?;
    ensure(worst_rate <= DEFAULT_TOL_RATE, || {
        format!("norm profile rate {worst_rate}")
    })?;
    Ok(format!(
        "100 elements, oracle gap {worst:.2e}, profile rate {worst_rate:.3}"
    ))
}

fn criterion_8() -> Outcome {
    let set = fig1(DEFAULT_RESOLUTION);
    let module = module_from_set(&set).map_err(|e| e.to_string())?;
    let recovered = module.state_space().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut positive, mut negative) = (0, 0);
    for i in 0..200 {
        let mut polys = vec![random_poly(&mut rng, 2, 1.0), random_poly(&mut rng, 1, 1.0)];
        polys[0] = &polys[0] + &MultiPoly::constant(1, rng.gen_range(0.0..2.0));
        let a = ModuleElement::from_polys(polys.clone());
        let mut min = f64::INFINITY;
        for (k, y) in recovered.grid().points().iter().enumerate() {
            for v in recovered.slice_at(k).vertices() {
                min = min.min(polys[0].eval(y) + polys[1].eval(y) * v[0]);
            }
        }
        let oracle = min >= -1e-8;
        let got = module.is_positive(&a).map_err(|e| e.to_string())?;
        if min.abs() > 1e-8 {
            ensure(got == oracle, || {
                format!("element {i}: is_positive {got}, min on samples {min:e}")
            })?;
        }
        if got {
            positive += 1;
        } else {
            negative += 1;
        }
    }
    ensure(positive > 0 && negative > 0, || {
        format!("one-sided draw: {positive} positive, {negative} not")
    })?;
    Ok(format!("200 elements agree ({positive} positive, {negative} not)"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut reducing_max: f64 = 0.0;
    for i in 0..100 {
        let k = [2, 4, 6][i % 3];
        let p = random_paff(&mut rng, 2);
        let (y, v) = reducing_pair(&mut rng, k, k / 2);
        let t = MatrixTuple::new(vec![random_symmetric(&mut rng, k), random_symmetric(&mut rng, k)], y).unwrap();
        reducing_max = reducing_max.max(check_compression(&p, &t, &v).unwrap());
    }
    ensure(reducing_max <= 1e-9, || format!("reducing residual {reducing_max:e}"))?;

    let mut direct_max: f64 = 0.0;
    for _ in 0..100 {
        let p = random_paff(&mut rng, 2);
        let y = random_symmetric(&mut rng, 3);
        let a = MatrixTuple::new(
            vec![random_symmetric(&mut rng, 3), random_symmetric(&mut rng, 3)],
            y.clone(),
        )
        .unwrap();
        let b = MatrixTuple::new(vec![random_symmetric(&mut rng, 3), random_symmetric(&mut rng, 3)], y).unwrap();
        let s: f64 = rng.gen_range(0.0..=1.0);
        let mut vm = DMatrix::zeros(6, 3);
        for j in 0..3 {
            vm[(j, j)] = s.sqrt();
            vm[(j + 3, j)] = (1.0 - s).sqrt();
        }
        let v = Isometry::new(vm).unwrap();
        let sum = a.direct_sum(&b).unwrap();
        let lhs = eval_paff_matrix(&p, &sum.compress(&v)).unwrap();
        let rhs = eval_paff_matrix(&p, &a).unwrap() * s + eval_paff_matrix(&p, &b).unwrap() * (1.0 - s);
        direct_max = direct_max.max((lhs - rhs).norm());
    }
    ensure(direct_max <= 1e-9, || format!("direct-sum residual {direct_max:e}"))?;

    let y_x1 = PAffPolynomial::new(1, 1, vec![MultiPoly::zero(1), MultiPoly::var(1, 0)]).unwrap();
    let (mut generic_min, mut resampled) = (f64::INFINITY, 0);
    for i in 0..100 {
        let k = [2, 4, 6][i % 3];
        let (t, g) = loop {
            let t = MatrixTuple::new(vec![random_symmetric(&mut rng, k)], random_symmetric(&mut rng, k)).unwrap();
            let g = random_isometry(&mut rng, k, k / 2);
            if y2_pair_residuals(&t, &g).0 > 1e-3 {
                break (t, g);
            }
            resampled += 1;
        };
        generic_min = generic_min.min(check_compression(&y_x1, &t, &g).unwrap());
    }
    ensure(generic_min > 1e-6, || format!("generic residual {generic_min:e}"))?;
    Ok(format!(
        "reducing {reducing_max:.1e}, direct sum {direct_max:.1e}, generic min {generic_min:.2e} ({resampled} resampled)"
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_parconv"))
        .args(args)
        .current_dir(dir)
        .env("PARCONV_SEED", "5")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn criterion_10() -> Outcome {
    let root: PathBuf = std::env::temp_dir().join(format!("parconv-acceptance-{}", std::process::id()));
    let runs = [root.join("a"), root.join("b")];
    let poly = r#"{"n":1,"m":1,"coeffs":[{"terms":[{"exp":[2],"coef":1.0}]},{"terms":[{"exp":[0],"coef":1.0},{"exp":[1],"coef":0.5}]}]}"#;
    let commands: Vec<Vec<&str>> = vec![
        vec!["check-regularity", "builtin:fig1"],
        vec!["check-regularity", "builtin:m_set"],
        vec!["separate", "builtin:fig1", "--x", "0", "--y", "2"],
        vec!["separate", "builtin:unit_box", "--x", "2", "--y", "0"],
        vec!["separate", "builtin:fig1", "--x", "0.9", "--y", "0", "--continuous"],
        vec!["recover", "builtin:fig1", "--function", "p.json", "-o", "caff.json"],
        vec!["approx", "builtin:fig1", "--samples", "caff.json", "--degree", "4"],
        vec!["dualize", "builtin:fig1", "-o", "module.json"],
        vec!["statespace", "module.json"],
        vec!["roundtrip", "builtin:l_set"],
        vec!["gamma-test", "--trials", "20"],
        vec!["plot-data", "builtin:fig1"],
        vec!["separate", "builtin:fig1", "--x", "0", "--y", "2", "-o", "cert.json"],
        vec!["plot-data", "builtin:fig1", "--cert", "cert.json"],
    ];
    let mut outputs: Vec<Vec<(i32, Vec<u8>)>> = Vec::new();
    for dir in &runs {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("p.json"), poly).map_err(|e| e.to_string())?;
        let mut results = Vec::new();
        for args in &commands {
            results.push(run_cli(dir, args)?);
        }
        for file in ["caff.json", "module.json", "cert.json"] {
            results.push((0, std::fs::read(dir.join(file)).map_err(|e| format!("{file}: {e}"))?));
        }
        outputs.push(results);
    }
    let _ = std::fs::remove_dir_all(&root);
    for (i, (a, b)) in outputs[0].iter().zip(&outputs[1]).enumerate() {
        ensure(a == b, || format!("output {i} differs between runs"))?;
    }
    let codes: Vec<i32> = outputs[0].iter().take(commands.len()).map(|(c, _)| *c).collect();
    ensure(
        codes[1] == 1 && codes.iter().enumerate().all(|(i, &c)| i == 1 || c == 0),
        || format!("exit codes {codes:?}"),
    )?;
    Ok(format!(
        "{} commands and {} files byte-identical across two runs",
        commands.len(),
        3
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("separation certificates", criterion_1),
        ("fig1 instance", criterion_2),
        ("coefficient recovery", criterion_3),
        ("Bernstein approximation", criterion_4),
        ("regularity verdicts", criterion_5),
        ("duality round trip", criterion_6),
        ("norm identities", criterion_7),
        ("order isomorphism", criterion_8),
        ("matrix compression identities", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
