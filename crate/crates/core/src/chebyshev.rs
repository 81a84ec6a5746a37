//! Log-polynomials and the n-th Chebyshev constants `M_n`.
//!
//! `M_n` is the largest value of `min_x (1/n) sum_j k(x, w_j)` over zero
//! multisets `w_1..w_n`, with both `x` and the zeros ranging over the
//! subset.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diameter::{improves, multiset_count};
use crate::energy::q_energy;
use crate::error::{Error, Result};
use crate::kernel::{check_subset, restrict_sorted, Kernel};
use crate::numerics::{Certification, ExtReal, Scalar, SolverOptions};
use crate::trace::{Trace, TraceEntry};

/// `x -> sum_j k(x, w_j)` for a multiset of zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogPolynomial {
    zeros: Vec<usize>,
}

impl LogPolynomial {
    pub fn new(mut zeros: Vec<usize>) -> Self {
        zeros.sort_unstable();
        LogPolynomial { zeros }
    }

    pub fn zeros(&self) -> &[usize] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval<T: Scalar>(&self, k: &Kernel<T>, x: usize) -> ExtReal<T> {
        self.zeros.iter().map(|&w| k.get(x, w).clone()).sum()
    }

    /// The sum of two log-polynomials; degrees add.
    pub fn plus(&self, other: &LogPolynomial) -> LogPolynomial {
        LogPolynomial::new(self.zeros.iter().chain(&other.zeros).copied().collect())
    }
}

/// A zero multiset together with its normalized infimum.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevSystem<T> {
    /// Sorted indices into the parent kernel.
    pub zeros: Vec<usize>,
    pub value: ExtReal<T>,
    pub certification: Certification,
}

pub type ChebyshevTrace<T> = Trace<T>;

/// `min_{x in subset} (1/n) sum_j k(x, w_j)`.
pub fn logpoly_inf<T: Scalar>(k: &Kernel<T>, zeros: &[usize], subset: &[usize]) -> Result<ExtReal<T>> {
    if zeros.is_empty() {
        return Err(Error::DegreeTooSmall { min: 1, got: 0 });
    }
    check_subset(k.len(), zeros)?;
    let subset = check_subset(k.len(), subset)?;
    let p = LogPolynomial::new(zeros.to_vec());
    let min = subset
        .iter()
        .map(|&x| p.eval(k, x))
        .reduce(ExtReal::min_of)
        .expect("subset is nonempty");
    Ok(min.per(zeros.len()))
}

fn min_entry<T: Scalar>(v: &[ExtReal<T>]) -> ExtReal<T> {
    v.iter().cloned().reduce(ExtReal::min_of).expect("nonempty")
}

struct Search<'a, T> {
    k: &'a Kernel<T>,
    n: usize,
    /// Largest entry of each row, the most one more zero can add there.
    row_max: Vec<ExtReal<T>>,
    chosen: Vec<usize>,
    /// `pot[d][x] = sum_{l < d} k(x, chosen[l])`
    pot: Vec<Vec<ExtReal<T>>>,
    best: Option<ExtReal<T>>,
    best_pick: Vec<usize>,
}

impl<T: Scalar> Search<'_, T> {
    fn descend(&mut self, depth: usize, start: usize) {
        let s = self.k.len();
        if depth == self.n {
            let v = min_entry(&self.pot[depth]);
            if self.best.as_ref().is_none_or(|b| v > *b) {
                self.best = Some(v);
                self.best_pick = self.chosen.clone();
            }
            return;
        }
        if let Some(best) = &self.best {
            let left = T::from_usize(self.n - depth);
            let bound = (0..s)
                .map(|x| self.pot[depth][x].clone() + self.row_max[x].scaled(&left))
                .reduce(ExtReal::min_of)
                .expect("nonempty");
            if bound <= *best {
                return;
            }
        }
        for j in start..s {
            self.chosen[depth] = j;
            let (lo, hi) = self.pot.split_at_mut(depth + 1);
            for x in 0..s {
                hi[0][x] = lo[depth][x].clone() + self.k.get(x, j);
            }
            self.descend(depth + 1, j);
        }
    }
}

/// Exact `M_n` by branch-and-bound over zero multisets; ties resolve to the
/// lexicographically smallest multiset.
pub fn mn_exact<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    n: usize,
    opts: &SolverOptions,
) -> Result<ChebyshevSystem<T>> {
    if n < 1 {
        return Err(Error::DegreeTooSmall { min: 1, got: n });
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
        row_max: (0..s)
            .map(|x| sub.row(x).iter().cloned().reduce(ExtReal::max_of).expect("nonempty"))
            .collect(),
        chosen: vec![0; n],
        pot: vec![vec![ExtReal::zero(); s]; n + 1],
        best: None,
        best_pick: Vec::new(),
    };
    search.descend(0, 0);
    let best = search.best.expect("at least one multiset");
    Ok(ChebyshevSystem {
        zeros: search.best_pick.iter().map(|&i| map[i]).collect(),
        value: best.per(n),
        certification: Certification::certified::<T>(),
    })
}

const MAX_SWEEPS: usize = 10_000;

/// `min_x (pot[x] + k(x, y))`
fn inf_with<T: Scalar>(k: &Kernel<T>, pot: &[ExtReal<T>], y: usize) -> ExtReal<T> {
    (0..k.len())
        .map(|x| pot[x].clone() + k.get(x, y))
        .reduce(ExtReal::min_of)
        .expect("nonempty")
}

/// Best-response exchange: moves single zeros while the infimum grows.
fn exchange<T: Scalar>(k: &Kernel<T>, pick: &mut [usize], tol: f64) {
    let s = k.len();
    for _ in 0..MAX_SWEEPS {
        let mut improved = false;
        for p in 0..pick.len() {
            let rest: Vec<ExtReal<T>> = (0..s)
                .map(|x| {
                    pick.iter()
                        .enumerate()
                        .filter(|&(l, _)| l != p)
                        .map(|(_, &w)| k.get(x, w).clone())
                        .sum()
                })
                .collect();
            let current = inf_with(k, &rest, pick[p]);
            let mut best = (pick[p], current.clone());
            for y in 0..s {
                let v = inf_with(k, &rest, y);
                if v > best.1 {
                    best = (y, v);
                }
            }
            if improves(&current, &best.1, tol) {
                pick[p] = best.0;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

fn inf_of<T: Scalar>(k: &Kernel<T>, pick: &[usize]) -> ExtReal<T> {
    (0..k.len())
        .map(|x| pick.iter().map(|&w| k.get(x, w).clone()).sum::<ExtReal<T>>())
        .reduce(ExtReal::min_of)
        .expect("nonempty")
}

/// Moves two zeros at once by one index step each. Single exchanges stall
/// on ridges where the infimum is attained at two points that pull the
/// zeros in opposite directions; this step gets past them.
fn pair_step<T: Scalar>(k: &Kernel<T>, pick: &mut [usize], tol: f64) -> bool {
    let s = k.len() as isize;
    let current = inf_of(k, pick);
    let mut best: Option<(ExtReal<T>, Vec<usize>)> = None;
    for a in 0..pick.len() {
        for b in a + 1..pick.len() {
            for da in -1isize..=1 {
                for db in -1isize..=1 {
                    let (ya, yb) = (pick[a] as isize + da, pick[b] as isize + db);
                    if (da, db) == (0, 0) || !(0..s).contains(&ya) || !(0..s).contains(&yb) {
                        continue;
                    }
                    let mut trial = pick.to_vec();
                    trial[a] = ya as usize;
                    trial[b] = yb as usize;
                    let v = inf_of(k, &trial);
                    if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                        best = Some((v, trial));
                    }
                }
            }
        }
    }
    match best {
        Some((v, trial)) if improves(&current, &v, tol) => {
            pick.copy_from_slice(&trial);
            true
        }
        _ => false,
    }
}

/// Adds, one at a time, the zero that raises the infimum most.
fn greedy_start<T: Scalar>(k: &Kernel<T>, n: usize) -> Vec<usize> {
    let s = k.len();
    let mut pick = Vec::with_capacity(n);
    let mut pot = vec![ExtReal::zero(); s];
    while pick.len() < n {
        let mut best = (0, inf_with(k, &pot, 0));
        for y in 1..s {
            let v = inf_with(k, &pot, y);
            if v > best.1 {
                best = (y, v);
            }
        }
        pick.push(best.0);
        for (x, p) in pot.iter_mut().enumerate() {
            *p = p.clone() + k.get(x, best.0);
        }
    }
    pick
}

/// Lower bound on `M_n` by best-response exchange from a greedy start and
/// `restarts` random starts. At each single-exchange fixpoint a two-zero
/// step is tried before giving up. Deterministic given `opts.seed`.
pub fn mn_heuristic<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    n: usize,
    restarts: usize,
    opts: &SolverOptions,
) -> Result<ChebyshevSystem<T>> {
    if n < 1 {
        return Err(Error::DegreeTooSmall { min: 1, got: n });
    }
    let (sub, map) = restrict_sorted(k, subset)?;
    let s = sub.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![greedy_start(&sub, n)];
    for _ in 0..restarts {
        starts.push((0..n).map(|_| rng.gen_range(0..s)).collect());
    }
    let all = sub.all_indices();
    let mut best: Option<(ExtReal<T>, Vec<usize>)> = None;
    for mut pick in starts {
        exchange(&sub, &mut pick, opts.tolerance);
        while pair_step(&sub, &mut pick, opts.tolerance) {
            exchange(&sub, &mut pick, opts.tolerance);
        }
        pick.sort_unstable();
        let value = logpoly_inf(&sub, &pick, &all)?;
        let better = match &best {
            None => true,
            Some((v, p)) => value > *v || (value == *v && pick < *p),
        };
        if better {
            best = Some((value, pick));
        }
    }
    let (value, pick) = best.expect("the greedy start always runs");
    Ok(ChebyshevSystem {
        zeros: pick.iter().map(|&i| map[i]).collect(),
        value,
        certification: Certification::HeuristicLowerBound,
    })
}

/// `M_n` for `n = 1..=n_max`, exact while the budget allows.
///
/// Superadditivity of `n M_n` is checked on exact entries. Every entry is
/// also checked against `q`, which bounds `M_n` from above.
pub fn m_estimate<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    n_max: usize,
    opts: &SolverOptions,
) -> Result<ChebyshevTrace<T>> {
    if n_max < 1 {
        return Err(Error::DegreeTooSmall { min: 1, got: n_max });
    }
    let s = restrict_sorted(k, subset)?.0.len();
    let mut entries = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let system = if multiset_count(s, n) <= u128::from(opts.budget) {
            mn_exact(k, subset, n, opts)?
        } else {
            mn_heuristic(k, subset, n, opts.restarts, opts)?
        };
        entries.push(TraceEntry {
            n,
            value: system.value,
            certification: system.certification,
            witness: system.zeros,
        });
    }
    let trace = Trace::new(entries);
    let exact: Vec<_> = trace.exact_entries().collect();
    for a in &exact {
        for b in &exact {
            let Some(c) = exact.iter().find(|c| c.n == a.n + b.n) else {
                continue;
            };
            let lhs = c.value.scaled(&T::from_usize(c.n));
            let rhs = a.value.scaled(&T::from_usize(a.n)) + b.value.scaled(&T::from_usize(b.n));
            if !rhs.le_within(&lhs, opts.tolerance) {
                return Err(Error::Internal(format!(
                    "superadditivity fails: {} M_{} < {} M_{} + {} M_{}",
                    c.n, c.n, a.n, a.n, b.n, b.n
                )));
            }
        }
    }
    let (q, _) = q_energy(k, subset, opts)?;
    if let Some(e) = trace.entries.iter().find(|e| !e.value.le_within(&q, opts.tolerance)) {
        return Err(Error::Internal(format!("M_{} = {} exceeds q = {q}", e.n, e.value)));
    }
    Ok(trace)
}
