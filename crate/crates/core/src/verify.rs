//! Invariant suites run against one kernel, and the convergence table.

use std::fmt::Write as _;

use crate::chebyshev::m_estimate;
use crate::diameter::d_estimate;
use crate::energy::{
    continuum_energy_estimate, frostman_verify, minimax_energies, q_energy, wiener_energy,
};
use crate::error::{Error, Result};
use crate::kernel::{restrict_sorted, shift_kernel, Kernel};
use crate::numerics::{ExtReal, Scalar, SolverOptions};
use crate::principles::{equivalence_experiment, max_principle_check};
use crate::trace::Trace;

#[derive(Clone, Debug, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub assertions: Vec<Assertion>,
}

impl SuiteReport {
    fn new(suite: &'static str) -> Self {
        SuiteReport {
            suite,
            assertions: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// One `PASS`/`FAIL` line per assertion.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for a in &self.assertions {
            let tag = if a.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "[{tag}] {}: {} ({})", self.suite, a.name, a.detail);
        }
        out
    }
}

fn le<T: Scalar>(a: &ExtReal<T>, b: &ExtReal<T>, tol: f64) -> bool {
    a.le_within(b, tol)
}

/// Runs `d_estimate`/`m_estimate`, turning an internal invariant failure into
/// a failed assertion instead of an error.
fn traced<T: Scalar>(
    report: &mut SuiteReport,
    name: &str,
    r: Result<Trace<T>>,
) -> Result<Option<Trace<T>>> {
    match r {
        Ok(t) => {
            report.check(name, true, "checked on exact entries");
            Ok(Some(t))
        }
        Err(Error::Internal(msg)) => {
            report.check(name, false, msg);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// `D_n <= M_n`, `D_n <= w`, `M_n <= q`, `w <= v <= u`, `w <= q <= u`,
/// `v = w`, and under the maximum principle `u = v = q = w`.
pub fn verify_chain<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    n_max: usize,
    opts: &SolverOptions,
) -> Result<SuiteReport> {
    let tol = opts.tolerance;
    let mut rep = SuiteReport::new("chain");
    let (sub, map) = restrict_sorted(k, subset)?;
    let d = traced(&mut rep, "D_n nondecreasing", d_estimate(k, &map, n_max.max(2), opts))?;
    let m = traced(&mut rep, "n M_n superadditive, M_n <= q", m_estimate(k, &map, n_max, opts))?;
    let w = wiener_energy(k, &map, opts)?.w_value;
    let mm = minimax_energies(k, &map, opts)?;
    if let (Some(d), Some(m)) = (&d, &m) {
        for de in d.exact_entries() {
            if let Some(me) = m.get(de.n).filter(|e| e.certification.is_certified()) {
                rep.check(
                    format!("D_{0} <= M_{0}", de.n),
                    le(&de.value, &me.value, tol),
                    format!("{} vs {}", de.value, me.value),
                );
            }
            rep.check(
                format!("D_{} <= w", de.n),
                le(&de.value, &w, tol),
                format!("{} vs {}", de.value, w),
            );
        }
    }
    rep.check("w <= v", le(&w, &mm.v, tol), format!("{w} vs {}", mm.v));
    rep.check("v <= u", le(&mm.v, &mm.u, tol), format!("{} vs {}", mm.v, mm.u));
    rep.check("w <= q", le(&w, &mm.q, tol), format!("{w} vs {}", mm.q));
    rep.check("q <= u", le(&mm.q, &mm.u, tol), format!("{} vs {}", mm.q, mm.u));
    if w.is_finite() {
        rep.check("v = w", mm.v.eq_within(&w, tol), format!("{} vs {w}", mm.v));
    }
    if sub.len() <= opts.support_threshold {
        let mp = max_principle_check(&sub, opts)?;
        if mp.holds {
            let all_equal = [&mm.u, &mm.v, &mm.q].iter().all(|x| x.eq_within(&w, tol));
            rep.check(
                "maximum principle => u = v = q = w",
                all_equal,
                format!("u={} v={} q={} w={w}", mm.u, mm.v, mm.q),
            );
            if let Some(m) = &m {
                let ok = m.exact_entries().all(|e| le(&e.value, &w, tol));
                rep.check("maximum principle => M_n <= w", ok, format!("w={w}"));
            }
        } else {
            rep.check("maximum principle", true, "fails; no extra equalities apply");
        }
    }
    Ok(rep)
}

/// Frostman conditions for the computed equilibrium measure.
pub fn verify_frostman<T: Scalar>(k: &Kernel<T>, subset: &[usize], opts: &SolverOptions) -> Result<SuiteReport> {
    let eq = wiener_energy(k, subset, opts)?;
    let Some(mu) = &eq.minimizer else {
        return Err(Error::Precondition(
            "the energy is +inf, so there is no equilibrium measure to check".into(),
        ));
    };
    let r = frostman_verify(k, subset, mu, &eq.w_value, opts.tolerance)?;
    let mut rep = SuiteReport::new("frostman");
    let fmt = |v: &[usize]| format!("violations at {v:?}");
    rep.check("U >= w off exceptional points", r.lower.ok, fmt(&r.lower.violations));
    rep.check("U <= w on the support", r.support_upper.ok, fmt(&r.support_upper.violations));
    rep.check("U = w at atoms", r.atom_equality.ok, fmt(&r.atom_equality.violations));
    Ok(rep)
}

/// Every quantity moves by exactly `c` when `c` is added to the kernel.
pub fn verify_shift<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    c: &T,
    n_max: usize,
    opts: &SolverOptions,
) -> Result<SuiteReport> {
    let tol = opts.tolerance;
    let shifted = shift_kernel(k, c)?;
    let (_, map) = restrict_sorted(k, subset)?;
    let mut rep = SuiteReport::new("shift");
    let mut cmp = |name: String, a: &ExtReal<T>, b: &ExtReal<T>| {
        let moved = a.offset(c);
        rep.check(name, moved.eq_within(b, tol), format!("{a} + {c} vs {b}"));
    };
    let d0 = d_estimate(k, &map, n_max.max(2), opts)?;
    let d1 = d_estimate(&shifted, &map, n_max.max(2), opts)?;
    for (a, b) in d0.exact_entries().zip(d1.exact_entries()) {
        cmp(format!("D_{}", a.n), &a.value, &b.value);
    }
    let m0 = m_estimate(k, &map, n_max, opts)?;
    let m1 = m_estimate(&shifted, &map, n_max, opts)?;
    for (a, b) in m0.exact_entries().zip(m1.exact_entries()) {
        cmp(format!("M_{}", a.n), &a.value, &b.value);
    }
    let w0 = wiener_energy(k, &map, opts)?;
    let w1 = wiener_energy(&shifted, &map, opts)?;
    if w0.certification.is_certified() {
        cmp("w".into(), &w0.w_value, &w1.w_value);
    }
    if map.len() <= opts.support_threshold {
        let a = minimax_energies(k, &map, opts)?;
        let b = minimax_energies(&shifted, &map, opts)?;
        cmp("u".into(), &a.u, &b.u);
        cmp("v".into(), &a.v, &b.v);
        cmp("q".into(), &a.q, &b.q);
    }
    Ok(rep)
}

/// Maximum principle versus `q(S) = w(S)` on every subset.
pub fn verify_equivalence<T: Scalar>(k: &Kernel<T>, opts: &SolverOptions) -> Result<SuiteReport> {
    let r = equivalence_experiment(k, opts).map_err(|e| match e {
        Error::InfiniteEntry(..) | Error::TooLarge { .. } => Error::Precondition(e.to_string()),
        other => other,
    })?;
    let mut rep = SuiteReport::new("equivalence");
    let unequal: Vec<_> = r.rows.iter().filter(|row| !row.equal).map(|row| row.subset.clone()).collect();
    rep.check(
        "maximum principle <=> q(S) = w(S) for all S",
        r.consistent,
        format!(
            "principle {}; subsets with q != w: {unequal:?}",
            if r.mp_holds { "holds" } else { "fails" }
        ),
    );
    if r.mp_holds {
        let f = &r.full_space;
        let ok = [&f.u, &f.v, &f.q].iter().all(|x| x.eq_within(&r.w_full, opts.tolerance));
        rep.check(
            "u = v = q = w",
            ok,
            format!("u={} v={} q={} w={}", f.u, f.v, f.q, r.w_full),
        );
    }
    Ok(rep)
}

/// CSV of `D_n` and `M_n` for `n = 1..=n_max` (`D_1` is blank), headed by
/// comment lines carrying `w` and `q`.
pub fn convergence_table<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    n_max: usize,
    opts: &SolverOptions,
) -> Result<String> {
    let (_, map) = restrict_sorted(k, subset)?;
    let d = d_estimate(k, &map, n_max.max(2), opts)?;
    let m = m_estimate(k, &map, n_max, opts)?;
    let w = wiener_energy(k, &map, opts)?;
    let (q, _) = q_energy(k, &map, opts)?;
    let mut out = String::new();
    let _ = writeln!(out, "# w={} ({})", w.w_value.to_f64_string(), w.certification);
    if map.len() == k.len() && k.origin().is_some() {
        let float = k.to_float();
        if let Ok(est) = continuum_energy_estimate(&float, opts) {
            let _ = writeln!(out, "# w_continuum={}", est.value.to_f64_string());
        }
    }
    let _ = writeln!(out, "# q={}", q.to_f64_string());
    out.push_str("n,D_n,D_status,M_n,M_status\n");
    for n in 1..=n_max {
        let (dv, ds) = match d.get(n) {
            Some(e) => (e.value.to_f64_string(), e.status()),
            None => (String::new(), ""),
        };
        let me = m.get(n).expect("every n from 1");
        let _ = writeln!(out, "{n},{dv},{ds},{},{}", me.value.to_f64_string(), me.status());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::kernel::build_kernel;
    use crate::numerics::{ratio, Rational};

    fn load(name: &str, size: Option<usize>) -> Kernel<Rational> {
        build_kernel(&fixture(name, size).unwrap().spec).unwrap()
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn three_point_suites_pass() {
        let k = load("three-point", None);
        let all = k.all_indices();
        let chain = verify_chain(&k, &all, 6, &opts()).unwrap();
        assert!(chain.passed(), "{}", chain.render());
        assert!(verify_frostman(&k, &all, &opts()).unwrap().passed());
        assert!(verify_shift(&k, &all, &ratio(1, 1), 5, &opts()).unwrap().passed());
        let eq = verify_equivalence(&k, &opts()).unwrap();
        assert!(eq.passed());
        assert!(eq.render().contains("principle fails"));
    }

    #[test]
    fn infinite_fixtures() {
        let k = load("discrete-infty-diag", Some(6));
        let all = k.all_indices();
        assert!(verify_chain(&k, &all, 5, &opts()).unwrap().passed());
        assert!(matches!(verify_frostman(&k, &all, &opts()), Err(Error::Precondition(_))));
        assert!(matches!(verify_equivalence(&k, &opts()), Err(Error::Precondition(_))));
        assert!(verify_shift(&k, &all, &ratio(1, 1), 4, &opts()).unwrap().passed());
    }

    #[test]
    fn three_point_convergence_table() {
        let k = load("three-point", None);
        let csv = convergence_table(&k, &[0, 1, 2], 6, &opts()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# w=1 (exact-rational)");
        assert_eq!(lines[1], "# q=2");
        assert_eq!(lines[2], "n,D_n,D_status,M_n,M_status");
        assert_eq!(lines[3], "1,,,2,exact");
        assert_eq!(lines[4], "2,0,exact,2,exact");
        assert_eq!(lines[8], "6,0.8,exact,2,exact");
    }

    #[test]
    fn log_grid_table_reports_the_continuum_estimate() {
        let k: Kernel<f64> = build_kernel(&fixture("log-interval", Some(33)).unwrap().spec).unwrap();
        let csv = convergence_table(&k, &k.all_indices(), 4, &opts()).unwrap();
        assert!(csv.starts_with("# w=inf (float-certified)\n# w_continuum=1.3"), "{csv}");
    }
}
