//! Deciding the maximum principle `U(mu) = V(mu)` on a finite space, and the
//! experiment comparing it with `q(S) = w(S)` on every subset.
//!
//! A violation needs a measure `mu` on a support `S` and a point `y` outside
//! `S` with `U^mu(y) > U^mu(x)` for all `x` in `S`. For fixed `(S, y)` the
//! best margin is a linear program in the weights, so enumerating supports
//! decides the principle exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chebyshev::{m_estimate, ChebyshevTrace};
use crate::diameter::{d_estimate, DiameterTrace};
use crate::energy::{minimax_energies, q_energy, wiener_energy, MinimaxEnergies};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{LinearProgram, LpOutcome, Relation};
use crate::measure::{potential, sup_potential, DiscreteMeasure, Over};
use crate::numerics::{exceeds, scalar_from_f64, ExtReal, Scalar, SolverOptions};

/// Largest space `equivalence_experiment` accepts.
pub const EQUIVALENCE_MAX_POINTS: usize = 10;

/// A measure whose potential is larger at `exterior` than anywhere on its
/// support.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxPrincipleWitness<T> {
    pub measure: DiscreteMeasure<T>,
    pub exterior: usize,
    /// `U^mu(exterior) - V(mu)`
    pub gap: ExtReal<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxPrincipleVerdict<T> {
    pub holds: bool,
    pub witness: Option<MaxPrincipleWitness<T>>,
    /// Number of (support, exterior point) pairs examined.
    pub pairs_checked: usize,
}

fn finite_block<T: Scalar>(k: &Kernel<T>, s: &[usize]) -> bool {
    s.iter().all(|&i| s.iter().all(|&j| k.get(i, j).is_finite()))
}

fn entry<T: Scalar>(k: &Kernel<T>, i: usize, j: usize) -> T {
    k.get(i, j).as_finite().expect("checked finite").clone()
}

/// `max t` over probability vectors `p` on `s` with
/// `sum_j p_j (k(y, j) - k(x, j)) >= t` for every `x` in `s`.
fn best_margin<T: Scalar>(k: &Kernel<T>, s: &[usize], y: usize, tol: f64) -> Result<(T, Vec<T>)> {
    let r = s.len();
    // variables: p_0..p_{r-1}, t+, t-
    let mut lp = LinearProgram::new(r + 2);
    lp.objective[r] = -T::one();
    lp.objective[r + 1] = T::one();
    for &x in s {
        let mut row: Vec<T> = s.iter().map(|&j| entry(k, y, j) - entry(k, x, j)).collect();
        row.push(-T::one());
        row.push(T::one());
        lp.constrain(row, Relation::Ge, T::zero());
    }
    let mut simplex = vec![T::one(); r];
    simplex.extend([T::zero(), T::zero()]);
    lp.constrain(simplex, Relation::Eq, T::one());
    match lp.solve(tol) {
        LpOutcome::Optimal { mut x, value } => {
            x.truncate(r);
            Ok((-value, x))
        }
        _ => Err(Error::Internal(format!("margin program for exterior point {y} has no optimum"))),
    }
}

fn witness_for<T: Scalar>(k: &Kernel<T>, mu: DiscreteMeasure<T>, y: usize) -> Result<MaxPrincipleWitness<T>> {
    let u = potential(k, &mu)?;
    let v = sup_potential(k, &mu, Over::SupportOnly)?;
    let gap = match (u.at(y), &v) {
        (ExtReal::Infinite, _) => ExtReal::Infinite,
        (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a.clone() - b.clone()),
        (ExtReal::Finite(_), ExtReal::Infinite) => {
            return Err(Error::Internal("witness measure has infinite V".into()))
        }
    };
    Ok(MaxPrincipleWitness {
        measure: mu,
        exterior: y,
        gap,
    })
}

/// Decides the maximum principle by enumerating supports in order of size,
/// then bitmask, then exterior point. The first violation found is
/// returned, so the witness has the smallest possible support.
///
/// Supports with an infinite block are skipped: every measure charging them
/// has `V = +inf`.
pub fn max_principle_check<T: Scalar>(k: &Kernel<T>, opts: &SolverOptions) -> Result<MaxPrincipleVerdict<T>> {
    let n = k.len();
    let limit = opts.support_threshold.min(63);
    if n > limit {
        return Err(Error::TooLarge {
            what: "a certified maximum-principle check (use the sampling mode)",
            size: n,
            limit,
        });
    }
    let mut masks: Vec<u64> = (1u64..(1 << n) - 1).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut pairs_checked = 0;
    for mask in masks {
        let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if !finite_block(k, &s) {
            continue;
        }
        for y in (0..n).filter(|y| mask >> y & 1 == 0) {
            pairs_checked += 1;
            if let Some(&j) = s.iter().find(|&&j| k.get(y, j).is_infinite()) {
                let w = witness_for(k, DiscreteMeasure::dirac(n, j), y)?;
                return Ok(MaxPrincipleVerdict {
                    holds: false,
                    witness: Some(w),
                    pairs_checked,
                });
            }
            let (t, p) = best_margin(k, &s, y, opts.tolerance)?;
            if exceeds(&t, &T::zero(), opts.tolerance) {
                let mut dense = vec![T::zero(); n];
                for (&i, w) in s.iter().zip(&p) {
                    dense[i] = if *w < T::zero() { T::zero() } else { w.clone() };
                }
                let mu = DiscreteMeasure::new(dense, opts.tolerance.max(1e-9))?;
                let w = witness_for(k, mu, y)?;
                return Ok(MaxPrincipleVerdict {
                    holds: false,
                    witness: Some(w),
                    pairs_checked,
                });
            }
        }
    }
    Ok(MaxPrincipleVerdict {
        holds: true,
        witness: None,
        pairs_checked,
    })
}

/// Result of random search for a violation; finding none proves nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledVerdict<T> {
    pub witness: Option<MaxPrincipleWitness<T>>,
    pub samples: usize,
}

/// Random search for a maximum-principle violation on spaces too large for
/// [`max_principle_check`]. Each sample draws a support of up to four
/// points and random weights on it.
pub fn max_principle_sample<T: Scalar>(
    k: &Kernel<T>,
    samples: usize,
    opts: &SolverOptions,
) -> Result<SampledVerdict<T>> {
    let n = k.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<MaxPrincipleWitness<T>> = None;
    for _ in 0..samples {
        let size = rng.gen_range(1..=n.min(4));
        let mut support: Vec<usize> = (0..size).map(|_| rng.gen_range(0..n)).collect();
        support.sort_unstable();
        support.dedup();
        if !finite_block(k, &support) {
            continue;
        }
        let raw: Vec<T> = support
            .iter()
            .map(|_| scalar_from_f64::<T>(rng.gen_range(1..=64) as f64))
            .collect();
        let total = raw.iter().fold(T::zero(), |a, w| a + w.clone());
        let weights: Vec<T> = raw.into_iter().map(|w| w / total.clone()).collect();
        let mut dense = vec![T::zero(); n];
        for (&i, w) in support.iter().zip(weights) {
            dense[i] = w;
        }
        let mu = DiscreteMeasure::new(dense, opts.tolerance.max(1e-9))?;
        let u = potential(k, &mu)?;
        let v = u.max_over(&mu.support());
        let Some(y) = (0..n).find(|&y| match (u.at(y), &v) {
            (ExtReal::Infinite, _) => true,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => exceeds(a, b, opts.tolerance),
            _ => false,
        }) else {
            continue;
        };
        let w = witness_for(k, mu, y)?;
        if best.as_ref().is_none_or(|b| w.gap > b.gap) {
            best = Some(w);
        }
    }
    Ok(SampledVerdict {
        witness: best,
        samples,
    })
}

/// One subset of the equivalence table.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetRow<T> {
    pub subset: Vec<usize>,
    pub q: ExtReal<T>,
    pub w: ExtReal<T>,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport<T> {
    pub mp_holds: bool,
    pub mp_witness: Option<MaxPrincipleWitness<T>>,
    /// Every nonempty subset in bitmask order.
    pub rows: Vec<SubsetRow<T>>,
    /// `mp_holds` agrees with "every row equal".
    pub consistent: bool,
    /// Subsets contradicting the verdict when the principle holds.
    pub offending: Vec<Vec<usize>>,
    /// `u`, `v`, `q` on the whole space.
    pub full_space: MinimaxEnergies<T>,
    pub w_full: ExtReal<T>,
    pub d_trace: DiameterTrace<T>,
    pub m_trace: ChebyshevTrace<T>,
}

impl<T: Scalar> EquivalenceReport<T> {
    /// CSV with columns `subset,q,w,equal`; subset members are separated by
    /// spaces.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("subset,q,w,equal\n");
        for r in &self.rows {
            let s: Vec<String> = r.subset.iter().map(|i| i.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.join(" "),
                r.q.to_f64_string(),
                r.w.to_f64_string(),
                r.equal
            ));
        }
        out
    }
}

/// Computes `q(S)` and `w(S)` for every nonempty subset, decides the maximum
/// principle, and checks that it holds exactly when every row is equal.
pub fn equivalence_experiment<T: Scalar>(k: &Kernel<T>, opts: &SolverOptions) -> Result<EquivalenceReport<T>> {
    if let Some((i, j)) = k.first_infinite() {
        return Err(Error::InfiniteEntry(i, j));
    }
    let n = k.len();
    if n > EQUIVALENCE_MAX_POINTS {
        return Err(Error::TooLarge {
            what: "the equivalence experiment",
            size: n,
            limit: EQUIVALENCE_MAX_POINTS,
        });
    }
    let mut rows = Vec::with_capacity((1 << n) - 1);
    for mask in 1u64..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let (q, _) = q_energy(k, &subset, opts)?;
        let w = wiener_energy(k, &subset, opts)?.w_value;
        let equal = q.eq_within(&w, opts.tolerance);
        rows.push(SubsetRow { subset, q, w, equal });
    }
    let mp = max_principle_check(k, opts)?;
    let all_equal = rows.iter().all(|r| r.equal);
    let consistent = mp.holds == all_equal;
    let offending = if mp.holds {
        rows.iter().filter(|r| !r.equal).map(|r| r.subset.clone()).collect()
    } else {
        Vec::new()
    };
    let all = k.all_indices();
    let full_space = minimax_energies(k, &all, opts)?;
    let w_full = rows.last().expect("n >= 1").w.clone();
    let trace_n = 4;
    Ok(EquivalenceReport {
        mp_holds: mp.holds,
        mp_witness: mp.witness,
        rows,
        consistent,
        offending,
        full_space,
        w_full,
        d_trace: d_estimate(k, &all, trace_n, opts)?,
        m_trace: m_estimate(k, &all, trace_n, opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::kernel::{build_kernel, restrict, FiniteSpace};
    use crate::numerics::{ratio, Rational};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> ExtReal<Rational> {
        ExtReal::Finite(ratio(n, d))
    }

    fn load(name: &str, size: Option<usize>) -> Kernel<Rational> {
        build_kernel(&fixture(name, size).unwrap().spec).unwrap()
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn exact(rows: &[&[i64]]) -> Kernel<Rational> {
        Kernel::from_finite(rows.iter().map(|r| r.iter().map(|&v| ratio(v, 1)).collect()).collect()).unwrap()
    }

    #[test]
    fn three_point_fails_with_the_half_half_witness() {
        let k = load("three-point", None);
        let v = max_principle_check(&k, &opts()).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.measure.weights(), &[ratio(1, 2), ratio(0, 1), ratio(1, 2)]);
        assert_eq!(w.exterior, 1);
        assert_eq!(k.space().point(w.exterior).to_string(), "0");
        assert_eq!(w.gap, q(1, 1));
    }

    #[test]
    fn truncated_discrete_example_holds() {
        let k = load("discrete-infty-diag", Some(6));
        let v = max_principle_check(&k, &opts()).unwrap();
        assert!(v.holds);
        assert!(v.witness.is_none());
    }

    #[test]
    fn constant_kernel_holds() {
        let k = exact(&[&[2, 2, 2], &[2, 2, 2], &[2, 2, 2]]);
        assert!(max_principle_check(&k, &opts()).unwrap().holds);
    }

    #[test]
    fn infinite_interaction_with_a_finite_atom_is_a_violation() {
        let inf = ExtReal::Infinite;
        let k = Kernel::new(
            FiniteSpace::labeled(["a", "b"]).unwrap(),
            vec![vec![q(1, 1), inf.clone()], vec![inf.clone(), inf]],
        )
        .unwrap();
        let v = max_principle_check(&k, &opts()).unwrap();
        let w = v.witness.unwrap();
        assert_eq!((w.exterior, w.gap), (1, ExtReal::Infinite));
        assert_eq!(w.measure, DiscreteMeasure::dirac(2, 0));
    }

    #[test]
    fn large_spaces_are_refused() {
        let k = Kernel::from_finite(vec![vec![ratio(1, 1); 15]; 15]).unwrap();
        assert!(matches!(max_principle_check(&k, &opts()), Err(Error::TooLarge { .. })));
        let s = max_principle_sample(&k, 50, &opts()).unwrap();
        assert!(s.witness.is_none());
    }

    #[test]
    fn sampling_finds_the_three_point_violation() {
        let k = load("three-point", None);
        let s = max_principle_sample(&k, 200, &opts()).unwrap();
        let w = s.witness.unwrap();
        assert!(w.gap > q(0, 1));
    }

    #[test]
    fn equivalence_examples() {
        let k = load("three-point", None);
        let r = equivalence_experiment(&k, &opts()).unwrap();
        assert!(!r.mp_holds && r.consistent);
        let full = r.rows.last().unwrap();
        assert_eq!((full.q.clone(), full.w.clone(), full.equal), (q(2, 1), q(1, 1), false));
        assert!(r.table_csv().contains("\n0 1 2,2,1,false\n"));

        let c = exact(&[&[5, 5, 5], &[5, 5, 5], &[5, 5, 5]]);
        let r = equivalence_experiment(&c, &opts()).unwrap();
        assert!(r.mp_holds && r.consistent);
        assert!(r.rows.iter().all(|row| row.q == q(5, 1) && row.w == q(5, 1)));

        let g = exact(&[&[2, 1], &[1, 3]]);
        let r = equivalence_experiment(&g, &opts()).unwrap();
        assert!(r.mp_holds && r.consistent);
        let qs: Vec<_> = r.rows.iter().map(|row| row.q.clone()).collect();
        assert_eq!(qs, vec![q(2, 1), q(3, 1), q(5, 3)]);
        assert_eq!(r.full_space.u, q(5, 3));
    }

    #[test]
    fn equivalence_needs_a_small_finite_kernel() {
        let k = load("discrete-infty-diag", Some(3));
        assert!(matches!(equivalence_experiment(&k, &opts()), Err(Error::InfiniteEntry(0, 0))));
        let big = Kernel::from_finite(vec![vec![ratio(1, 1); 11]; 11]).unwrap();
        assert!(matches!(equivalence_experiment(&big, &opts()), Err(Error::TooLarge { .. })));
    }

    /// Independent check: a witness must show U(y) > V directly.
    fn witness_is_sound(k: &Kernel<Rational>, w: &MaxPrincipleWitness<Rational>) -> bool {
        let u = potential(k, &w.measure).unwrap();
        let v = sup_potential(k, &w.measure, Over::SupportOnly).unwrap();
        let all = sup_potential(k, &w.measure, Over::AllPoints).unwrap();
        u.at(w.exterior).clone() == v.clone() + &w.gap && all > v && w.gap > q(0, 1)
    }

    fn finite_kernel(max_points: usize) -> impl Strategy<Value = Kernel<Rational>> {
        (1usize..=max_points).prop_flat_map(|s| {
            proptest::collection::vec(0i64..=10, s * (s + 1) / 2).prop_map(move |tri| {
                let mut rows = vec![vec![ratio(0, 1); s]; s];
                let mut it = tri.into_iter();
                for i in 0..s {
                    for j in i..s {
                        let v = ratio(it.next().unwrap(), 1);
                        rows[i][j] = v.clone();
                        rows[j][i] = v;
                    }
                }
                Kernel::from_finite(rows).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn equivalence_is_consistent(k in finite_kernel(4)) {
            let r = equivalence_experiment(&k, &opts()).unwrap();
            prop_assert!(r.consistent, "{:?}", r.rows);
            if let Some(w) = &r.mp_witness {
                prop_assert!(witness_is_sound(&k, w));
            }
        }

        #[test]
        fn restriction_preserves_the_principle(k in finite_kernel(4), drop in 0usize..4) {
            let v = max_principle_check(&k, &opts()).unwrap();
            let part: Vec<usize> = k.all_indices().into_iter().filter(|&i| i != drop).collect();
            prop_assume!(!part.is_empty());
            if v.holds {
                let (sub, _) = restrict(&k, &part).unwrap();
                prop_assert!(max_principle_check(&sub, &opts()).unwrap().holds);
            }
        }

        /// Brute force: if a random measure violates the principle, the
        /// decision procedure must say so.
        #[test]
        fn sampled_violations_are_detected(k in finite_kernel(4), raw in proptest::collection::vec(0i64..5, 4)) {
            let n = k.len();
            let raw: Vec<i64> = raw[..n].to_vec();
            let total: i64 = raw.iter().sum();
            prop_assume!(total > 0);
            let mu = DiscreteMeasure::new(raw.iter().map(|&w| ratio(w, total)).collect(), 0.0).unwrap();
            let u = sup_potential(&k, &mu, Over::AllPoints).unwrap();
            let v = sup_potential(&k, &mu, Over::SupportOnly).unwrap();
            if u > v {
                prop_assert!(!max_principle_check(&k, &opts()).unwrap().holds);
            }
        }
    }
}
