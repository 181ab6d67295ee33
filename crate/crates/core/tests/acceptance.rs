//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;

use common::*;
use supergeo::geometry::{levi_civita, metricity_residuals, torsion_residuals, Chart, MetricContext, OspFrame, VectorField};
use supergeo::integration::action;
use supergeo::lie_killing::{killing_check, lie_derivative_bilinear, solve_killing, KillingMode};
use supergeo::morphism::{MapGeometry, Morphism};
use supergeo::scenario::{parse_expression, run_scenario, Scenario};
use supergeo::superlinalg::{gram_schmidt_osp, standard_metric, Signature};
use supergeo::{GeneratorPool, Parity, RationalFunction, Superfunction};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn killing_modes_agree() -> Check {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut total = 0;
    let mut passed = 0;
    for (name, g) in test_metrics() {
        let ctx = MetricContext::new(&g).map_err(e)?;
        let known = known_killing(&g);
        for k in 0..60 {
            let parity = if g.chart().dims().1 > 0 && rng.gen_bool(0.5) { Parity::Odd } else { Parity::Even };
            let (x, expect) = if k % 2 == 0 && known.iter().any(|f| f.parity() == parity) {
                (combination(&mut rng, &known, parity), Some(true))
            } else {
                (random_field(&mut rng, g.chart(), parity, 2), None)
            };
            let rep = killing_check(&x, &ctx, &KillingMode::ALL).map_err(e)?;
            ensure(rep.agree(), || format!("{name}: modes disagree on {x}"))?;
            if let Some(v) = expect {
                ensure(rep.pass() == v, || format!("{name}: Killing combination rejected: {x}"))?;
            }
            total += 1;
            passed += rep.pass() as usize;
        }
    }
    ensure(passed > 0 && passed < total, || format!("{passed} of {total} Killing; the sample is one-sided"))?;
    let dt = start.elapsed();
    ensure(dt < Duration::from_secs(60), || format!("took {dt:?}"))?;
    Ok(format!("{total} fields over 3 metrics, {passed} Killing, in {:.1}s", dt.as_secs_f64()))
}

fn solver_dimensions() -> Check {
    let cases: [(&[&str], &[&str], (usize, usize)); 3] =
        [(&["x", "y"], &[], (2, 0)), (&[], &["th1", "th2"], (0, 1)), (&["x", "y"], &["th1", "th2"], (2, 1))];
    let mut out = Vec::new();
    for (even, odd, (n, m)) in cases {
        let g = flat(even, odd, 0);
        let basis = solve_killing(&g, 1).map_err(e)?;
        let want = flat_killing_dims(n, m);
        ensure(basis.dims() == want, || format!("(0,{n}|{}) gave {:?}, want {want:?}", 2 * m, basis.dims()))?;
        ensure(basis.rank_certificate() == want, || "rank certificate differs from dims".into())?;
        let ctx = MetricContext::new(&g).map_err(e)?;
        for f in basis.fields() {
            let r = killing_check(f, &ctx, &[KillingMode::I]).map_err(e)?;
            ensure(r.pass(), || format!("basis field {f} fails mode i"))?;
        }
        let defects = basis.closure_defects(&g).map_err(e)?;
        ensure(defects.is_empty(), || format!("brackets leave the span: {defects:?}"))?;
        out.push(format!("{}|{}", want.0, want.1));
    }
    Ok(format!("dims {}", out.join(", ")))
}

fn levi_civita_checks() -> Check {
    for (name, g) in test_metrics() {
        let conn = levi_civita(&g).map_err(e)?;
        ensure(torsion_residuals(&conn).map_err(e)?.is_empty(), || format!("{name}: torsion"))?;
        ensure(metricity_residuals(&conn, &g).map_err(e)?.is_empty(), || format!("{name}: metricity"))?;
    }
    let g = polar();
    let conn = levi_civita(&g).map_err(e)?;
    let nv = 2;
    let x = poly_var(nv, 0);
    let oracle = classical_christoffel_diagonal(&[RationalFunction::one(nv), x.mul(&x)]);
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let got = conn.christoffel(k, i, j);
                ensure(got.is_even_function_of(&oracle[k][i][j]), || format!("Gamma^{k}_{i}{j} = {got}"))?;
            }
        }
    }
    let pool = g.chart().pool();
    ensure(conn.christoffel(0, 1, 1) == &-&Superfunction::named(pool, "x").unwrap(), || "Gamma^x_yy".into())?;
    ensure(
        conn.christoffel(1, 0, 1) == &Superfunction::from_ratfunc(pool, x.recip().unwrap()),
        || "Gamma^y_xy".into(),
    )?;
    Ok("torsion and metricity vanish on 3 metrics; Gamma^x_yy = -x, Gamma^y_xy = 1/x".into())
}

trait EvenFunction {
    fn is_even_function_of(&self, r: &RationalFunction) -> bool;
}

impl EvenFunction for Superfunction {
    fn is_even_function_of(&self, r: &RationalFunction) -> bool {
        self.soul().is_zero() && &self.body() == r
    }
}

/// Morphisms from flat `(0,2|2)` with two flesh generators into flat `(0,2|2)`.
fn noether_corpus() -> (Vec<MapGeometry>, supergeo::geometry::BilinearForm, supergeo::geometry::BilinearForm) {
    let src = Chart::unit(&["x", "y"], &["th1", "th2"], &["l1", "l2"]).unwrap();
    let tgt = Chart::unit(&["u", "v"], &["e1", "e2"], &[]).unwrap();
    let h = supergeo::geometry::BilinearForm::standard(&src, Signature::new(0, 2, 1)).unwrap();
    let g = supergeo::geometry::BilinearForm::standard(&tgt, Signature::new(0, 2, 1)).unwrap();
    let pool = src.pool();
    let p = |s: &str| parse_expression(s, pool).unwrap();
    let mut maps = Vec::new();
    let fixed = [
        ["x", "y", "th1", "th2"],
        ["3/5 x - 4/5 y + 1", "4/5 x + 3/5 y", "th1", "th2"],
        ["x + th1 th2", "y", "th1 + x th2", "th2"],
        ["x + 2 y + l1 l2", "y - x", "th1 + l1", "th2 + x l2"],
        ["x^2 - y^2", "2 x y", "x th1", "y th2 + l1"],
        ["x + l1 th1", "y + l2 th2", "th1 + l1 y", "th2"],
    ];
    for f in fixed {
        let phi = Morphism::new(&src, &tgt, f.iter().map(|s| p(s)).collect()).unwrap();
        maps.push(MapGeometry::new(phi, &h, &g).unwrap());
    }
    let mut rng = rng(4);
    while maps.len() < 26 {
        let flesh = maps.len() % 2 == 0;
        let deg = if maps.len() % 3 == 0 { 1 } else { 2 };
        let images = (0..4)
            .map(|a| random_superfunction(&mut rng, pool, Parity::from_bit(a >= 2), deg, flesh))
            .collect();
        let phi = Morphism::new(&src, &tgt, images).unwrap();
        maps.push(MapGeometry::new(phi, &h, &g).unwrap());
    }
    (maps, h, g)
}

fn noether_suite() -> Check {
    let (maps, h, g) = noether_corpus();
    let target_killing = known_killing(&g);
    let source_killing = known_killing(&h);
    let mut rng = rng(5);
    let mut flesh = 0;
    let mut harmonic = 0;
    for (k, geo) in maps.iter().enumerate() {
        if geo.phi.images().iter().any(|f| f.uses_flesh()) {
            flesh += 1;
        }
        for parity in [Parity::Even, Parity::Odd] {
            let xi = combination(&mut rng, &target_killing, parity);
            let r = geo.noether_target(&xi).map_err(e)?;
            ensure(r.hypothesis_holds && r.pass(), || format!("map {k}: target Noether fails for {xi}: {r:?}"))?;
            let eta = combination(&mut rng, &source_killing, parity);
            let r = geo.noether_domain(&eta).map_err(e)?;
            ensure(r.pass(), || format!("map {k}: domain Noether fails for {eta}"))?;
            let r = geo.stress_check(&eta).map_err(e)?;
            ensure(r.pass(), || format!("map {k}: stress identities fail for {eta}"))?;
            if r.harmonic && parity == Parity::Even {
                harmonic += 1;
            }
        }
    }
    ensure(flesh >= 5, || format!("only {flesh} maps carry flesh"))?;

    let src = maps[0].source_chart().clone();
    let tgt = maps[0].phi.target().clone();
    let dilate = VectorField::from_components(
        &tgt,
        vec![
            Superfunction::named(tgt.pool(), "u").unwrap(),
            Superfunction::named(tgt.pool(), "v").unwrap(),
            tgt.zero(),
            tgt.zero(),
        ],
    )
    .map_err(e)?;
    let stretch = VectorField::from_components(
        &src,
        vec![Superfunction::named(src.pool(), "x").unwrap(), src.zero(), src.zero(), src.zero()],
    )
    .map_err(e)?;
    let broken = [
        maps[0].noether_target(&dilate).map_err(e)?,
        maps[1].noether_target(&dilate).map_err(e)?,
        maps[0].stress_check(&stretch).map_err(e)?,
        maps[3].noether_target(&dilate).map_err(e)?,
    ];
    for (k, r) in broken.iter().enumerate() {
        ensure(!r.hypothesis_residuals.is_empty(), || format!("broken input {k} satisfies the hypothesis"))?;
        ensure(r.residuals.iter().any(|x| !x.value.is_zero()), || format!("broken input {k} shows no residual"))?;
    }
    Ok(format!(
        "{} maps ({flesh} with flesh, {harmonic} harmonic) conserve; {} broken inputs detected",
        maps.len(),
        broken.len()
    ))
}

fn superalgebra_identities() -> Check {
    let pool = GeneratorPool::with_names(&["x"], &["a", "b", "c", "d"], &[]).unwrap();
    let mut rng = rng(6);
    for k in 0..200 {
        let (p, q) = if k % 2 == 0 { (2, 2) } else { (1, 2) };
        let pa = Parity::from_bit(rng.gen_bool(0.5));
        let pb = Parity::from_bit(rng.gen_bool(0.5));
        let a = random_supermatrix(&mut rng, &pool, p, q, pa, 1);
        let b = random_supermatrix(&mut rng, &pool, p, q, pb, 1);
        let s = a.supercommutator(&b).map_err(e)?.supertrace();
        ensure(s.is_zero(), || format!("str[A,B] = {s}"))?;
    }
    for _ in 0..100 {
        let a = random_invertible(&mut rng, &pool, 2, 2);
        let b = random_invertible(&mut rng, &pool, 2, 2);
        let lhs = a.mul(&b).map_err(e)?.berezinian().map_err(e)?;
        let rhs = &a.berezinian().map_err(e)? * &b.berezinian().map_err(e)?;
        ensure(lhs == rhs, || "Ber(AB) != Ber(A) Ber(B)".into())?;
    }
    let chart = Chart::unit(&["x", "y"], &["th1", "th2"], &[]).unwrap();
    let sigs = [Signature::new(0, 2, 1), Signature::new(1, 1, 1), Signature::new(2, 0, 1)];
    for k in 0..20 {
        let sig = sigs[k % 3];
        let g = random_admissible_metric(&mut rng, &chart, sig);
        let basis = gram_schmidt_osp(g.matrix(), None).map_err(e)?;
        ensure(basis.signature == sig, || format!("signature {} != {sig}", basis.signature))?;
        let g0 = standard_metric(chart.pool(), sig);
        let n = chart.dim();
        for i in 0..n {
            for j in 0..n {
                let (pi, pj) = (chart.coord_parity(i), chart.coord_parity(j));
                let v = g.matrix().bilinear(&basis.frame.column(i), pi, &basis.frame.column(j), pj);
                ensure(&v == g0.get(i, j), || format!("metric {k}: g(e{i},e{j}) = {v}"))?;
            }
        }
        OspFrame::from_metric(&g).and_then(|f| f.verify(&g)).map_err(e)?;
    }
    Ok("200 supertraces, 100 Berezinians, 20 Gram-Schmidt frames exact".into())
}

fn classical_reduction() -> Check {
    let line = Chart::unit(&["x"], &[], &[]).unwrap();
    let target = Chart::unit(&["y"], &[], &[]).unwrap();
    let h = flat(&["x"], &[], 0);
    let h = supergeo::geometry::BilinearForm::new(&line, h.matrix().clone()).map_err(e)?;
    let g = supergeo::geometry::BilinearForm::standard(&target, Signature::new(0, 1, 0)).map_err(e)?;
    let sq = parse_expression("x^2", line.pool()).map_err(e)?;
    let geo = MapGeometry::new(Morphism::new(&line, &target, vec![sq]).map_err(e)?, &h, &g).map_err(e)?;
    let tau = geo.tension().map_err(e)?;
    ensure(tau.component(0) == &Superfunction::from_int(line.pool(), 2), || format!("tau = {}", tau.render()))?;
    let four_x2 = parse_expression("4 x^2", line.pool()).map_err(e)?;
    ensure(geo.pullback_metric().component(0, 0) == &four_x2, || "pullback metric".into())?;
    ensure(geo.energy_density().map_err(e)? == parse_expression("2 x^2", line.pool()).map_err(e)?, || "energy".into())?;

    for n in 1..=3 {
        let names = ["x", "y", "z"];
        let g = flat(&names[..n], &[], 0);
        let geo = MapGeometry::new(Morphism::identity(g.chart()).map_err(e)?, &g, &g).map_err(e)?;
        let want = Superfunction::constant(g.chart().pool(), q(n as i64, 2));
        ensure(geo.energy_density().map_err(e)? == want, || format!("identity energy in dimension {n}"))?;
    }

    let g = polar();
    let ctx = MetricContext::new(&g).map_err(e)?;
    let pool = g.chart().pool();
    let x = poly_var(2, 0);
    let diag = [RationalFunction::one(2), x.mul(&x)];
    let mut rng = rng(7);
    for _ in 0..20 {
        let f = random_field(&mut rng, g.chart(), Parity::Even, 2);
        let comps: Vec<RationalFunction> = f.components().iter().map(|c| c.body()).collect();
        let div = ctx.divergence(&f).map_err(e)?;
        let want = classical_divergence(&x, &comps);
        ensure(div.is_even_function_of(&want), || format!("div {f} = {div}, classical {}", want.render(&pool.even_names().to_vec())))?;
        let l = lie_derivative_bilinear(&f, &g).map_err(e)?;
        for i in 0..2 {
            for j in 0..2 {
                let mut want = RationalFunction::zero(2);
                if i == j {
                    for (k, c) in comps.iter().enumerate() {
                        want = want.add(&c.mul(&diag[i].derivative(k)));
                    }
                }
                want = want.add(&diag[j].mul(&comps[j].derivative(i)));
                want = want.add(&diag[i].mul(&comps[i].derivative(j)));
                ensure(l.component(i, j).is_even_function_of(&want), || format!("(L_X g)_{i}{j}"))?;
            }
        }
    }
    Ok("tau(x^2) = 2, Phi*g = 4x^2, e(id) = n/2, divergence and Lie derivative classical".into())
}

fn identity_actions() -> Check {
    let plane = flat(&["x", "y"], &[], 0);
    let a = action(&MapGeometry::new(Morphism::identity(plane.chart()).map_err(e)?, &plane, &plane).map_err(e)?)
        .map_err(e)?;
    ensure(a == q(1, 1), || format!("A(id) on (0,2|0) = {a}"))?;
    let sup = flat(&["x", "y"], &["th1", "th2"], 0);
    let b = action(&MapGeometry::new(Morphism::identity(sup.chart()).map_err(e)?, &sup, &sup).map_err(e)?)
        .map_err(e)?;
    ensure(b == q(0, 1), || format!("A(id) on (0,2|2) = {b}"))?;
    Ok(format!("A(id) = {a} on (0,2|0), {b} on (0,2|2)"))
}

const FUZZ_ALPHABET: &[&str] =
    &["x", "y", "th1", "th2", "l1", "z", "0", "1", "2", "64", "65", "+", "-", "*", "/", "^", "(", ")", " ", "é", "9999999999999999999999", "\t"];

const SCENARIO_ALPHABET: &[&str] = &[
    "[", "]", "=", ",", "\n", "#", "chart", "metric", "run", "x", "th1", "(x,x)", "standard", "(0,2|2)", "1",
    "check-killing", "--mode", "solve-killing", "--degree", "99", "\u{0}", "|", " ",
];

fn goldens_and_fuzz() -> Check {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut count = 0;
    let mut entries: Vec<_> = std::fs::read_dir(&dir).map_err(e)?.filter_map(|d| d.ok()).map(|d| d.path()).collect();
    entries.sort();
    for path in entries.iter().filter(|p| p.extension().is_some_and(|x| x == "sg")) {
        let golden = std::fs::read_to_string(path.with_extension("report")).map_err(e)?;
        let first = run_scenario(path, 0);
        let second = run_scenario(path, 0);
        ensure(first.report == golden, || format!("{} differs from its golden report", path.display()))?;
        ensure(second.report == first.report, || format!("{} is not deterministic", path.display()))?;
        count += 1;
    }
    ensure(count >= 5, || format!("only {count} golden scenarios"))?;

    std::panic::set_hook(Box::new(|_| {}));
    let pool = GeneratorPool::with_names(&["x", "y"], &["th1", "th2"], &["l1"]).unwrap();
    let base = std::fs::read_to_string(dir.join("flat.sg")).map_err(e)?;
    let mut rng = rng(8);
    let mut crashes = 0;
    let total = 100_000;
    for k in 0..total {
        let input = if k % 10 == 0 {
            let mut s = base.clone();
            for _ in 0..rng.gen_range(1..4) {
                let at = (0..=s.len()).filter(|&i| s.is_char_boundary(i)).nth(rng.gen_range(0..=s.chars().count())).unwrap_or(0);
                if rng.gen_bool(0.5) {
                    s.insert_str(at, SCENARIO_ALPHABET[rng.gen_range(0..SCENARIO_ALPHABET.len())]);
                } else {
                    let end = (at + rng.gen_range(1..20)).min(s.len());
                    let end = (end..=s.len()).find(|&i| s.is_char_boundary(i)).unwrap();
                    s.replace_range(at..end, "");
                }
            }
            s
        } else {
            (0..rng.gen_range(0..16)).map(|_| FUZZ_ALPHABET[rng.gen_range(0..FUZZ_ALPHABET.len())]).collect()
        };
        let r = catch_unwind(AssertUnwindSafe(|| {
            if k % 10 == 0 {
                let _ = Scenario::parse(&input);
            } else {
                let _ = parse_expression(&input, &pool);
            }
        }));
        if r.is_err() {
            crashes += 1;
            if crashes == 1 {
                eprintln!("first crash on input {input:?}");
            }
        }
    }
    let _ = std::panic::take_hook();
    ensure(crashes == 0, || format!("{crashes} of {total} fuzz inputs panicked"))?;
    Ok(format!("{count} golden reports identical; {total} fuzz inputs without a panic"))
}

fn main() {
    let checks: [(&str, fn() -> Check); 8] = [
        ("1 killing modes agree", killing_modes_agree),
        ("2 killing solver dimensions", solver_dimensions),
        ("3 levi-civita", levi_civita_checks),
        ("4 noether suite", noether_suite),
        ("5 superalgebra identities", superalgebra_identities),
        ("6 classical reduction", classical_reduction),
        ("7 identity action", identity_actions),
        ("8 goldens and parser fuzz", goldens_and_fuzz),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        let t = Instant::now();
        let r = catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match r {
            Ok(msg) => println!("PASS [{name}] {msg} ({:.1}s)", t.elapsed().as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{name}] {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
