//! n-th diameters `D_n` and Fekete point systems.
//!
//! `D_n` is the smallest average interaction
//! `1/(n(n-1)) * sum_{j != l} k(w_j, w_l)` over n-point multisets of the
//! subset. Exact values come from branch-and-bound over multisets in
//! lexicographic order; larger instances fall back to single-point exchange.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{restrict_sorted, Kernel};
use crate::numerics::{exceeds, Certification, ExtReal, Scalar, SolverOptions};
use crate::trace::{Trace, TraceEntry};

/// An n-point multiset together with its average interaction.
#[derive(Clone, Debug, PartialEq)]
pub struct FeketeSystem<T> {
    /// Sorted indices into the parent kernel.
    pub indices: Vec<usize>,
    pub value: ExtReal<T>,
    pub certification: Certification,
}

pub type DiameterTrace<T> = Trace<T>;

/// `C(s + n - 1, n)`, the number of n-multisets over `s` points, saturating
/// at `u128::MAX`.
pub fn multiset_count(s: usize, n: usize) -> u128 {
    if s == 0 {
        return u128::from(n == 0);
    }
    let mut acc: u128 = 1;
    for i in 1..=n as u128 {
        // acc = C(s - 1 + i, i), always an exact division
        acc = match acc.checked_mul(s as u128 - 1 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Average over ordered distinct pairs of the multiset `indices` (n >= 2).
pub fn system_value<T: Scalar>(k: &Kernel<T>, indices: &[usize]) -> ExtReal<T> {
    let n = indices.len();
    debug_assert!(n >= 2);
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for i in sorted {
        match counts.last_mut() {
            Some((j, c)) if *j == i => *c += 1,
            _ => counts.push((i, 1)),
        }
    }
    let mut total = ExtReal::zero();
    for (a, &(i, ci)) in counts.iter().enumerate() {
        total = total + k.get(i, i).scaled(&T::from_usize(ci * (ci - 1)));
        for &(j, cj) in &counts[a + 1..] {
            total = total + k.get(i, j).scaled(&T::from_usize(2 * ci * cj));
        }
    }
    total.per(n * (n - 1))
}

struct Search<'a, T> {
    k: &'a Kernel<T>,
    n: usize,
    chosen: Vec<usize>,
    /// `rows[d][x] = sum_{l < d} k(x, chosen[l])`
    rows: Vec<Vec<ExtReal<T>>>,
    best: Option<ExtReal<T>>,
    best_pick: Vec<usize>,
}

impl<T: Scalar> Search<'_, T> {
    /// `sum` is the ordered-pair sum of `chosen[..depth]`; entries are
    /// nonnegative, so it only grows along a branch.
    fn descend(&mut self, depth: usize, start: usize, sum: ExtReal<T>) {
        if depth == self.n {
            if self.best.as_ref().is_none_or(|b| sum < *b) {
                self.best = Some(sum);
                self.best_pick = self.chosen.clone();
            }
            return;
        }
        let s = self.k.len();
        for j in start..s {
            let delta = &self.rows[depth][j];
            let next = sum.clone() + delta + delta;
            if self.best.as_ref().is_some_and(|b| next >= *b) {
                continue;
            }
            self.chosen[depth] = j;
            if depth + 1 < self.n {
                let (lo, hi) = self.rows.split_at_mut(depth + 1);
                for x in j..s {
                    hi[0][x] = lo[depth][x].clone() + self.k.get(x, j);
                }
            }
            self.descend(depth + 1, j, next);
        }
    }
}

/// Exact `D_n` on `subset` by exhaustive search over multisets.
///
/// Ties resolve to the lexicographically smallest multiset. Fails with
/// [`Error::BudgetExceeded`] when there are more than `opts.budget`
/// multisets.
pub fn dn_exact<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    n: usize,
    opts: &SolverOptions,
) -> Result<FeketeSystem<T>> {
    if n < 2 {
        return Err(Error::DegreeTooSmall { min: 2, got: n });
    }
    let (sub, map) = restrict_sorted(k, subset)?;
    let s = sub.len();
    let candidates = multiset_count(s, n);
    if candidates > u128::from(opts.budget) {
        return Err(Error::BudgetExceeded {
            candidates,
            budget: opts.budget,
        });
    }
    let mut search = Search {
        k: &sub,
        n,
        chosen: vec![0; n],
        rows: vec![vec![ExtReal::zero(); s]; n],
        best: None,
        best_pick: Vec::new(),
    };
    search.descend(0, 0, ExtReal::zero());
    let best = search.best.expect("a nonempty subset has at least one multiset");
    Ok(FeketeSystem {
        indices: search.best_pick.iter().map(|&i| map[i]).collect(),
        value: best.per(n * (n - 1)),
        certification: Certification::certified::<T>(),
    })
}

/// `new` is a strict improvement over `old`.
pub(crate) fn improves<T: Scalar>(new: &ExtReal<T>, old: &ExtReal<T>, tol: f64) -> bool {
    match (new, old) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => exceeds(b, a, tol),
        (ExtReal::Finite(_), ExtReal::Infinite) => true,
        (ExtReal::Infinite, _) => false,
    }
}

const MAX_SWEEPS: usize = 10_000;

/// Moves single points to the position minimizing their interaction with
/// the others until no move helps.
fn exchange<T: Scalar>(k: &Kernel<T>, pick: &mut [usize], tol: f64) {
    let s = k.len();
    for _ in 0..MAX_SWEEPS {
        let mut improved = false;
        for p in 0..pick.len() {
            let others: Vec<ExtReal<T>> = (0..s)
                .map(|y| {
                    pick.iter()
                        .enumerate()
                        .filter(|&(l, _)| l != p)
                        .map(|(_, &w)| k.get(y, w).clone())
                        .sum()
                })
                .collect();
            let mut best = pick[p];
            for y in 0..s {
                if others[y] < others[best] {
                    best = y;
                }
            }
            if improves(&others[best], &others[pick[p]], tol) {
                pick[p] = best;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

/// Adds, one at a time, the point with the least interaction with those
/// already chosen, starting from local index 0.
fn greedy_start<T: Scalar>(k: &Kernel<T>, n: usize) -> Vec<usize> {
    let s = k.len();
    let mut pick = vec![0];
    let mut load: Vec<ExtReal<T>> = (0..s).map(|y| k.get(y, 0).clone()).collect();
    while pick.len() < n {
        let mut best = 0;
        for y in 1..s {
            if load[y] < load[best] {
                best = y;
            }
        }
        pick.push(best);
        for (y, l) in load.iter_mut().enumerate() {
            *l = l.clone() + k.get(y, best);
        }
    }
    pick
}

/// Upper bound on `D_n` by single-point exchange from a greedy start and
/// `restarts` random starts. Deterministic given `opts.seed`.
pub fn fekete_heuristic<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    n: usize,
    restarts: usize,
    opts: &SolverOptions,
) -> Result<FeketeSystem<T>> {
    if n < 2 {
        return Err(Error::DegreeTooSmall { min: 2, got: n });
    }
    let (sub, map) = restrict_sorted(k, subset)?;
    let s = sub.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![greedy_start(&sub, n)];
    for _ in 0..restarts {
        starts.push((0..n).map(|_| rng.gen_range(0..s)).collect());
    }
    let mut best: Option<(ExtReal<T>, Vec<usize>)> = None;
    for mut pick in starts {
        exchange(&sub, &mut pick, opts.tolerance);
        pick.sort_unstable();
        let value = system_value(&sub, &pick);
        let better = match &best {
            None => true,
            Some((v, p)) => value < *v || (value == *v && pick < *p),
        };
        if better {
            best = Some((value, pick));
        }
    }
    let (value, pick) = best.expect("the greedy start always runs");
    Ok(FeketeSystem {
        indices: pick.iter().map(|&i| map[i]).collect(),
        value,
        certification: Certification::HeuristicUpperBound,
    })
}

/// `D_n` for `n = 2..=n_max`: exact while the multiset count fits the
/// budget, heuristic afterwards.
///
/// Exact entries must be nondecreasing; a violation is reported as an
/// internal error.
pub fn d_estimate<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    n_max: usize,
    opts: &SolverOptions,
) -> Result<DiameterTrace<T>> {
    if n_max < 2 {
        return Err(Error::DegreeTooSmall { min: 2, got: n_max });
    }
    let s = crate::kernel::check_subset(k.len(), subset)?.len();
    let mut entries = Vec::with_capacity(n_max - 1);
    for n in 2..=n_max {
        let system = if multiset_count(s, n) <= u128::from(opts.budget) {
            dn_exact(k, subset, n, opts)?
        } else {
            fekete_heuristic(k, subset, n, opts.restarts, opts)?
        };
        entries.push(TraceEntry {
            n,
            value: system.value,
            certification: system.certification,
            witness: system.indices,
        });
    }
    let trace = Trace::new(entries);
    let exact: Vec<_> = trace.exact_entries().collect();
    for pair in exact.windows(2) {
        if !pair[0].value.le_within(&pair[1].value, opts.tolerance) {
            return Err(Error::Internal(format!(
                "D_{} = {} exceeds D_{} = {}",
                pair[0].n, pair[0].value, pair[1].n, pair[1].value
            )));
        }
    }
    Ok(trace)
}
