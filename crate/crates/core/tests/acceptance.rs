//! Acceptance run: one PASS/FAIL line per criterion, each under its time limit.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transfinite::chebyshev::{m_estimate, mn_exact};
use transfinite::diameter::{d_estimate, dn_exact, fekete_heuristic};
use transfinite::energy::{
    continuum_energy_estimate, frostman_verify, minimax_energies, rendezvous, wiener_energy,
};
use transfinite::fixtures::{fixture, Expected};
use transfinite::numerics::ratio;
use transfinite::principles::{equivalence_experiment, max_principle_check};
use transfinite::{
    build_kernel, shift_kernel, DiscreteMeasure, ExtReal, Kernel, Point, Rational, SolverOptions,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, u64, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> ExtReal<Rational> {
    ExtReal::Finite(ratio(n, d))
}

fn finite(v: &ExtReal<Rational>) -> Rational {
    v.as_finite().cloned().expect("finite value")
}

fn load(name: &str, size: Option<usize>) -> Kernel<Rational> {
    build_kernel(&fixture(name, size).unwrap().spec).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn three_point() -> Outcome {
    let k = load("three-point", None);
    let all = k.all_indices();
    let o = opts();
    let e = |x: transfinite::Error| x.to_string();

    let w = wiener_energy(&k, &all, &o).map_err(e)?;
    ensure(w.w_value == q(1, 1), || format!("w = {}", w.w_value))?;
    let reference = fixture("three-point", None).unwrap();
    ensure(
        reference.expectation("D") == Some(&Expected::Exact { value: q(1, 1) }),
        || "D-limit reference is not 1".into(),
    )?;
    let d = d_estimate(&k, &all, 8, &o).map_err(e)?;
    ensure(d.get(2).unwrap().value == q(0, 1), || "D_2 != 0".into())?;
    ensure(d.get(3).unwrap().value == q(2, 3), || "D_3 != 2/3".into())?;
    ensure(d.entries.iter().all(|x| x.value <= q(1, 1)), || "D_n above the limit 1".into())?;

    let uvq = minimax_energies(&k, &all, &o).map_err(e)?;
    ensure(uvq.q == q(2, 1), || format!("q = {}", uvq.q))?;
    for n in 1..=4 {
        let m = mn_exact(&k, &all, n, &o).map_err(e)?;
        ensure(m.value == q(2, 1), || format!("M_{n} = {}", m.value))?;
    }

    let mp = max_principle_check(&k, &o).map_err(e)?;
    ensure(!mp.holds, || "maximum principle reported as holding".into())?;
    let wit = mp.witness.ok_or("no witness")?;
    let half = ratio(1, 2);
    ensure(wit.measure.weights() == [half.clone(), Rational::zero(), half], || {
        format!("witness measure {:?}", wit.measure.weights())
    })?;
    ensure(k.space().point(wit.exterior) == &Point::Label("0".into()), || {
        format!("exterior point {}", k.space().point(wit.exterior))
    })?;
    ensure(wit.gap == q(1, 1), || format!("gap {}", wit.gap))?;
    Ok("w = 1, q = 2, M_1..4 = 2, D_2 = 0, D_3 = 2/3, witness (1/2, 0, 1/2) at y = 0 with gap 1".into())
}

fn discrete_infinite_diagonal() -> Outcome {
    let k = load("discrete-infty-diag", Some(10));
    let all = k.all_indices();
    let o = opts();
    let e = |x: transfinite::Error| x.to_string();
    let d = d_estimate(&k, &all, 10, &o).map_err(e)?;
    for entry in &d.entries {
        ensure(entry.certification.is_certified() && entry.value == q(0, 1), || {
            format!("D_{} = {} ({})", entry.n, entry.value, entry.certification)
        })?;
    }
    let m = m_estimate(&k, &all, 8, &o).map_err(e)?;
    for entry in &m.entries {
        ensure(entry.certification.is_certified() && entry.value == q(1, 1), || {
            format!("M_{} = {} ({})", entry.n, entry.value, entry.certification)
        })?;
    }
    let w = wiener_energy(&k, &all, &o).map_err(e)?;
    ensure(w.w_value.is_infinite(), || format!("w = {}", w.w_value))?;
    let mp = max_principle_check(&k, &o).map_err(e)?;
    ensure(mp.holds, || "maximum principle reported as failing".into())?;
    Ok("D_2..10 = 0, M_1..8 = 1, w = inf, maximum principle holds".into())
}

fn geometric_decay() -> Outcome {
    let k = load("geometric-decay", Some(12));
    let all = k.all_indices();
    let o = opts();
    let e = |x: transfinite::Error| x.to_string();
    let w = wiener_energy(&k, &all, &o).map_err(e)?;
    ensure(w.w_value.is_infinite(), || format!("w = {}", w.w_value))?;
    let d2 = dn_exact(&k, &all, 2, &o).map_err(e)?;
    let expected = ExtReal::Finite(Rational::one() / Rational::from_integer((1u64 << 23).into()));
    ensure(d2.value == expected, || format!("D_2 = {}", d2.value))?;
    Ok("w = inf, D_2 = 2^-23".into())
}

fn log_interval() -> Outcome {
    let k: Kernel<f64> = build_kernel(&fixture("log-interval", Some(2048)).unwrap().spec).unwrap();
    let all = k.all_indices();
    let o = opts();
    let e = |x: transfinite::Error| x.to_string();
    let est = continuum_energy_estimate(&k, &o).map_err(e)?;
    let w = est.value.to_f64();
    let target = 4f64.ln();
    ensure((w - target).abs() <= 2e-2, || format!("energy estimate {w} vs log 4 = {target}"))?;

    let step = 1.0 / 2047.0;
    let f3 = fekete_heuristic(&k, &all, 3, o.restarts, &o).map_err(e)?;
    let xs: Vec<f64> = f3
        .indices
        .iter()
        .map(|&i| match k.space().point(i) {
            Point::Real(x) => *x,
            p => panic!("grid point {p}"),
        })
        .collect();
    for (x, want) in xs.iter().zip([0.0, 0.5, 1.0]) {
        ensure((x - want).abs() <= step + 1e-12, || format!("Fekete points {xs:?}"))?;
    }
    let d12 = fekete_heuristic(&k, &all, 12, o.restarts, &o).map_err(e)?;
    ensure(d12.value.to_f64() <= w, || format!("D_12 = {} above {w}", d12.value))?;
    Ok(format!(
        "estimate {w:.6} (log 4 = {target:.6}), Fekete_3 = {xs:.4?}, D_12 = {:.6}",
        d12.value.to_f64()
    ))
}

fn random_kernel(rng: &mut ChaCha8Rng, n: usize, diagonal_dominant: bool) -> Kernel<Rational> {
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let den = rng.gen_range(1..=6i64);
            let num = rng.gen_range(0..=10 * den);
            rows[i][j] = ratio(num, den);
            rows[j][i] = rows[i][j].clone();
        }
    }
    if diagonal_dominant {
        for i in 0..n {
            let top = rows[i].iter().max().cloned().unwrap();
            rows[i][i] = top.clone() + (ratio(10, 1) - top) * ratio(rng.gen_range(0..=4), 4);
        }
    }
    Kernel::from_finite(rows).unwrap()
}

/// Nested-cluster kernel: points merged later interact less.
fn random_ultrametric(rng: &mut ChaCha8Rng, n: usize) -> Kernel<Rational> {
    let mut levels: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=60)).collect();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    let mut rows = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        rows[i][i] = ratio(levels[0] + rng.gen_range(0..=6), 6);
    }
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for &level in &levels[1..] {
        let a = clusters.swap_remove(rng.gen_range(0..clusters.len()));
        let b = clusters.swap_remove(rng.gen_range(0..clusters.len()));
        for &i in &a {
            for &j in &b {
                rows[i][j] = ratio(level, 6);
                rows[j][i] = ratio(level, 6);
            }
        }
        clusters.push([a, b].concat());
    }
    Kernel::from_finite(rows).unwrap()
}

fn property_instances() -> Vec<Kernel<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..200)
        .map(|_| {
            let n = rng.gen_range(1..=5);
            random_kernel(&mut rng, n, false)
        })
        .collect()
}

/// `D_2..D_8`, `M_1..M_8`, `w`, `u`, `v`, `q`, `r`.
fn scalars(k: &Kernel<Rational>) -> Result<Vec<ExtReal<Rational>>, String> {
    let all = k.all_indices();
    let o = opts();
    let e = |x: transfinite::Error| x.to_string();
    let mut out: Vec<_> = d_estimate(k, &all, 8, &o).map_err(e)?.entries.into_iter().map(|x| x.value).collect();
    out.extend(m_estimate(k, &all, 8, &o).map_err(e)?.entries.into_iter().map(|x| x.value));
    out.push(wiener_energy(k, &all, &o).map_err(e)?.w_value);
    let mm = minimax_energies(k, &all, &o).map_err(e)?;
    out.extend([mm.u, mm.v, mm.q]);
    out.push(rendezvous(k, &all, &o).map_err(e)?.r_value);
    Ok(out)
}

fn check_instance(k: &Kernel<Rational>, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let all = k.all_indices();
    let o = opts();
    let e = |x: transfinite::Error| x.to_string();
    let d = d_estimate(k, &all, 8, &o).map_err(e)?;
    let m = m_estimate(k, &all, 8, &o).map_err(e)?;
    ensure(
        d.entries.iter().chain(&m.entries).all(|x| x.certification.is_certified()),
        || "uncertified trace entry".into(),
    )?;
    let dv = |n: usize| finite(&d.get(n).unwrap().value);
    let mv = |n: usize| finite(&m.get(n).unwrap().value);
    for n in 2..8 {
        ensure(dv(n) <= dv(n + 1), || format!("D_{n} > D_{}", n + 1))?;
    }
    for a in 1..8 {
        for b in 1..=8 - a {
            let lhs = Rational::from_integer((a + b).into()) * mv(a + b);
            let rhs = Rational::from_integer(a.into()) * mv(a) + Rational::from_integer(b.into()) * mv(b);
            ensure(lhs >= rhs, || format!("superadditivity fails at ({a}, {b})"))?;
        }
    }
    let w = finite(&wiener_energy(k, &all, &o).map_err(e)?.w_value);
    let mm = minimax_energies(k, &all, &o).map_err(e)?;
    let (u, v, qv) = (finite(&mm.u), finite(&mm.v), finite(&mm.q));
    let q_slack = qv.clone() + ratio(1, 1_000_000_000);
    for n in 2..=8 {
        ensure(dv(n) <= mv(n), || format!("D_{n} > M_{n}"))?;
        ensure(dv(n) <= w, || format!("D_{n} > w"))?;
    }
    for n in 1..=8 {
        ensure(mv(n) <= q_slack, || format!("M_{n} > q"))?;
    }
    ensure(w <= v && v <= u, || format!("w = {w}, v = {v}, u = {u}"))?;
    ensure(v == w, || format!("v = {v} != w = {w}"))?;

    let base = scalars(k)?;
    let shifted = scalars(&shift_kernel(k, &Rational::one()).map_err(e)?)?;
    for (i, (a, b)) in base.iter().zip(&shifted).enumerate() {
        ensure(finite(a) + Rational::one() == finite(b), || format!("scalar #{i} not shifted by 1"))?;
    }
    let mut perm = all.clone();
    perm.shuffle(rng);
    let relabeled = scalars(&k.relabel(&perm).map_err(e)?)?;
    ensure(base == relabeled, || format!("relabeling by {perm:?} changes the scalars"))?;
    Ok(())
}

fn property_suite(instances: &[Kernel<Rational>]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let failures: Vec<String> = instances
        .iter()
        .enumerate()
        .filter_map(|(i, k)| check_instance(k, &mut rng).err().map(|m| format!("#{i}: {m}")))
        .collect();
    match failures.first() {
        None => Ok(format!("{} kernels, 0 failures", instances.len())),
        Some(first) => Err(format!("{} failures, first {first}", failures.len())),
    }
}

fn equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let o = opts();
    let mut holding = 0;
    for i in 0..100 {
        let k = match i % 3 {
            0 => random_kernel(&mut rng, 4, false),
            1 => random_kernel(&mut rng, 4, true),
            _ => random_ultrametric(&mut rng, 4),
        };
        let r = equivalence_experiment(&k, &o).map_err(|x| format!("#{i}: {x}"))?;
        ensure(r.consistent, || format!("#{i}: inconsistent, offending {:?}", r.offending))?;
        if r.mp_holds {
            holding += 1;
            let f = &r.full_space;
            ensure(
                [&f.u, &f.v, &f.q].iter().all(|x| x.eq_within(&r.w_full, 1e-9)),
                || format!("#{i}: u = {}, v = {}, q = {}, w = {}", f.u, f.v, f.q, r.w_full),
            )?;
        }
    }
    Ok(format!("100 kernels consistent, principle holds on {holding}"))
}

fn frostman(instances: &[Kernel<Rational>]) -> Outcome {
    let o = opts();
    let e = |x: transfinite::Error| x.to_string();
    let mut checked = 0;
    for (i, k) in instances.iter().enumerate() {
        let all = k.all_indices();
        let eq = wiener_energy(k, &all, &o).map_err(e)?;
        let Some(mu) = &eq.minimizer else { continue };
        let r = frostman_verify(k, &all, mu, &eq.w_value, 0.0).map_err(e)?;
        ensure(r.passes(), || format!("#{i}: {r:?}"))?;
        checked += 1;
    }
    let k = load("three-point", None);
    let uniform = DiscreteMeasure::uniform_on(3, &[0, 1, 2]);
    let w = wiener_energy(&k, &[0, 1, 2], &o).map_err(e)?.w_value;
    let r = frostman_verify(&k, &[0, 1, 2], &uniform, &w, 0.0).map_err(e)?;
    ensure(!r.support_upper.ok && r.support_upper.violations.contains(&0), || {
        format!("uniform measure: {:?}", r.support_upper)
    })?;
    Ok(format!(
        "{checked} minimizers pass; uniform three-point measure fails (ii) at {:?}",
        r.support_upper.violations
    ))
}

fn rendezvous_numbers(instances: &[Kernel<Rational>]) -> Outcome {
    let o = opts();
    let e = |x: transfinite::Error| x.to_string();
    let k = load("three-point", None);
    let r = rendezvous(&k, &[0, 1, 2], &o).map_err(e)?;
    ensure(r.r_value == q(2, 1), || format!("r = {}", r.r_value))?;
    ensure(r.invariant_measure == Some(DiscreteMeasure::dirac(3, 1)), || {
        format!("invariant measure {:?}", r.invariant_measure)
    })?;
    ensure(r.constancy_defect == Some(Rational::zero()), || {
        format!("defect {:?}", r.constancy_defect)
    })?;
    let mut tight = 0;
    for (i, k) in instances.iter().enumerate() {
        let all = k.all_indices();
        let w = wiener_energy(k, &all, &o).map_err(e)?.w_value;
        let r = rendezvous(k, &all, &o).map_err(e)?;
        ensure(w <= r.r_value, || format!("#{i}: r = {} < w = {w}", r.r_value))?;
        if r.r_value.eq_within(&w, 1e-9) {
            tight += 1;
            ensure(r.invariant_measure.is_some(), || format!("#{i}: r = w without an invariant measure"))?;
        }
    }
    Ok(format!("three-point r = 2 at the middle point; r >= w on all, r = w on {tight}"))
}

fn main() -> ExitCode {
    let instances = property_instances();
    let criteria: Vec<Criterion> = vec![
        ("three-point example, exact", 1, Box::new(three_point)),
        ("discrete +inf diagonal, N = 10", 5, Box::new(discrete_infinite_diagonal)),
        ("geometric decay, N = 12", 1, Box::new(geometric_decay)),
        ("log kernel on [0, 1], m = 2048", 60, Box::new(log_interval)),
        ("property suite, 200 kernels", 120, Box::new(|| property_suite(&instances))),
        ("equivalence experiment, 100 kernels", 120, Box::new(equivalence)),
        ("Frostman conditions", 120, Box::new(|| frostman(&instances))),
        ("rendezvous numbers", 120, Box::new(|| rendezvous_numbers(&instances))),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > Duration::from_secs(*limit) => Err(format!("took {elapsed:.2?}")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {}: {tag} {name}: {detail} [{:.2}s, limit {limit}s]",
            i + 1,
            elapsed.as_secs_f64()
        );
        failed += usize::from(outcome.is_err());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
