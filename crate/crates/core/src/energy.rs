//! Wiener energy, the minimax energies `u`, `v`, `q`, Frostman conditions
//! and rendezvous numbers.
//!
//! A support `S` is admissible when the block `k|_{S x S}` is finite; any
//! measure charging a non-admissible support has infinite energy. On an
//! admissible face the minimum of `W` is either interior, where it solves
//! `K_S p = c 1, sum p = 1`, or on a smaller face, so enumerating faces in
//! bitmask order and keeping the least stationary value is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{check_subset, restrict, restrict_sorted, Kernel};
use crate::linalg::{solve_square, LinearProgram, LpOutcome, Relation};
use crate::measure::{energy, potential, DiscreteMeasure};
use crate::numerics::{close, scalar_from_f64, Certification, ExtReal, Scalar, SolverOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumResult<T> {
    pub w_value: ExtReal<T>,
    /// Absent exactly when `w = +inf`.
    pub minimizer: Option<DiscreteMeasure<T>>,
    pub certification: Certification,
}

/// `u`, `v` and `q` with a minimizing measure for each finite value.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxEnergies<T> {
    pub u: ExtReal<T>,
    pub v: ExtReal<T>,
    pub q: ExtReal<T>,
    pub u_witness: Option<DiscreteMeasure<T>>,
    pub v_witness: Option<DiscreteMeasure<T>>,
    pub q_witness: Option<DiscreteMeasure<T>>,
}

/// Outcome of one Frostman condition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionCheck {
    pub ok: bool,
    pub violations: Vec<usize>,
}

impl ConditionCheck {
    fn from_violations(violations: Vec<usize>) -> Self {
        ConditionCheck {
            ok: violations.is_empty(),
            violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrostmanReport {
    /// (i) `U >= w` off the exceptional points.
    pub lower: ConditionCheck,
    /// (ii) `U <= w` on the support.
    pub support_upper: ConditionCheck,
    /// (iii) `U = w` at every atom.
    pub atom_equality: ConditionCheck,
    /// Points of the subset whose singleton has infinite energy.
    pub exceptional_points: Vec<usize>,
}

impl FrostmanReport {
    pub fn passes(&self) -> bool {
        self.lower.ok && self.support_upper.ok && self.atom_equality.ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RendezvousResult<T> {
    pub r_value: ExtReal<T>,
    /// A measure whose potential is constant on the subset.
    pub invariant_measure: Option<DiscreteMeasure<T>>,
    /// Max minus min of that potential over the subset.
    pub constancy_defect: Option<T>,
}

/// Grid approximation of the continuum equilibrium energy.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuumEstimate {
    pub value: ExtReal<f64>,
    pub measure: Option<DiscreteMeasure<f64>>,
    /// `stationary` when the full-support system had a positive solution,
    /// `replicator` otherwise.
    pub method: &'static str,
}

/// Bitmask of admissible partners for each local point: bit `j` of
/// `finite[i]` is set iff `k(i, j) < inf`.
fn finite_masks<T: Scalar>(k: &Kernel<T>) -> Vec<u64> {
    (0..k.len())
        .map(|i| {
            (0..k.len())
                .filter(|&j| k.get(i, j).is_finite())
                .fold(0u64, |m, j| m | (1 << j))
        })
        .collect()
}

fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

fn block_is_finite(masks: &[u64], mask: u64) -> bool {
    mask_indices(mask).iter().all(|&i| masks[i] & mask == mask)
}

fn value<T: Scalar>(v: &ExtReal<T>) -> T {
    v.as_finite().expect("admissible entries are finite").clone()
}

/// Measure on `len` points with `weights` on `indices`. Float round-off
/// below the slack is clipped before renormalizing.
fn clean_measure<T: Scalar>(len: usize, indices: &[usize], weights: &[T], tol: f64) -> Result<DiscreteMeasure<T>> {
    if T::EXACT {
        return Ok(DiscreteMeasure::lifted(len, indices, weights));
    }
    let mut dense = vec![T::zero(); len];
    for (&i, w) in indices.iter().zip(weights) {
        dense[i] = if *w < T::zero() { T::zero() } else { w.clone() };
    }
    let total = dense.iter().fold(T::zero(), |a, w| a + w.clone());
    for w in dense.iter_mut() {
        *w = w.clone() / total.clone();
    }
    DiscreteMeasure::new(dense, tol.max(1e-9))
}

/// Solves `K_S p = c 1, sum p = 1` on the local support `s`. Returns `None`
/// when the system is singular.
fn stationary_point<T: Scalar>(k: &Kernel<T>, s: &[usize], tol: f64) -> Option<(T, Vec<T>)> {
    let r = s.len();
    let dim = r + 1;
    let mut a = vec![T::zero(); dim * dim];
    for (row, &i) in s.iter().enumerate() {
        for (col, &j) in s.iter().enumerate() {
            a[row * dim + col] = value(k.get(i, j));
        }
        a[row * dim + r] = -T::one();
    }
    for col in 0..r {
        a[r * dim + col] = T::one();
    }
    let mut b = vec![T::zero(); dim];
    b[r] = T::one();
    let x = solve_square(a, b, tol)?;
    let c = x[r].clone();
    Some((c, x[..r].to_vec()))
}

/// `min c` over `p >= 0` with `K_S p = c 1`, `sum p = 1`; `None` when no
/// such `p` exists.
fn stationary_lp<T: Scalar>(k: &Kernel<T>, rows: &[usize], cols: &[usize], tol: f64) -> Option<(T, Vec<T>)> {
    let r = cols.len();
    let mut lp = LinearProgram::new(r + 1);
    lp.objective[r] = T::one();
    for &i in rows {
        let mut row: Vec<T> = cols.iter().map(|&j| value(k.get(i, j))).collect();
        row.push(-T::one());
        lp.constrain(row, Relation::Eq, T::zero());
    }
    let mut simplex = vec![T::one(); r];
    simplex.push(T::zero());
    lp.constrain(simplex, Relation::Eq, T::one());
    match lp.solve(tol) {
        LpOutcome::Optimal { mut x, .. } => {
            let c = x.pop().expect("r + 1 variables");
            Some((c, x))
        }
        _ => None,
    }
}

/// `min t` over probability vectors `p` on `cols` with `(K p)_i <= t` for
/// every `i` in `rows`. Every entry involved must be finite.
fn minimax_lp<T: Scalar>(k: &Kernel<T>, rows: &[usize], cols: &[usize], tol: f64) -> Result<(T, Vec<T>)> {
    let r = cols.len();
    let mut lp = LinearProgram::new(r + 1);
    lp.objective[r] = T::one();
    for &i in rows {
        let mut row: Vec<T> = cols.iter().map(|&j| value(k.get(i, j))).collect();
        row.push(-T::one());
        lp.constrain(row, Relation::Le, T::zero());
    }
    let mut simplex = vec![T::one(); r];
    simplex.push(T::zero());
    lp.constrain(simplex, Relation::Eq, T::one());
    match lp.solve(tol) {
        LpOutcome::Optimal { mut x, value } => {
            x.pop();
            Ok((value, x))
        }
        other => Err(Error::Internal(format!(
            "minimax program on {} columns ended {:?}",
            r,
            std::mem::discriminant(&other)
        ))),
    }
}

/// Wiener energy `w = min W(mu)` over probability measures on `subset`.
///
/// Up to `opts.support_threshold` points every admissible face is solved
/// exactly; beyond it a multi-start replicator iteration gives an upper
/// bound.
pub fn wiener_energy<T: Scalar>(k: &Kernel<T>, subset: &[usize], opts: &SolverOptions) -> Result<EquilibriumResult<T>> {
    let (sub, map) = restrict_sorted(k, subset)?;
    if (0..sub.len()).all(|i| sub.get(i, i).is_infinite()) {
        return Ok(EquilibriumResult {
            w_value: ExtReal::Infinite,
            minimizer: None,
            certification: Certification::certified::<T>(),
        });
    }
    if sub.len() > opts.support_threshold.min(63) {
        return replicator_energy(k, &sub, &map, opts);
    }
    let tol = opts.tolerance;
    let masks = finite_masks(&sub);
    let mut best: Option<(T, Vec<usize>, Vec<T>)> = None;
    for mask in 1u64..(1 << sub.len()) {
        if !block_is_finite(&masks, mask) {
            continue;
        }
        let s = mask_indices(mask);
        let candidate = match stationary_point(&sub, &s, tol) {
            Some((c, p)) if p.iter().all(|x| *x > T::zero()) => Some((c, p)),
            Some(_) => None,
            // A singular face: W is constant on its stationary set, so the
            // least stationary value over nonnegative p is the face value
            // whenever the minimum is interior.
            None => stationary_lp(&sub, &s, &s, tol),
        };
        if let Some((c, p)) = candidate {
            if best.as_ref().is_none_or(|(b, _, _)| c < *b) {
                best = Some((c, s, p));
            }
        }
    }
    let (c, s, p) = best.ok_or_else(|| Error::Internal("no admissible face has a stationary point".into()))?;
    let parents: Vec<usize> = s.iter().map(|&i| map[i]).collect();
    Ok(EquilibriumResult {
        w_value: ExtReal::Finite(c),
        minimizer: Some(clean_measure(k.len(), &parents, &p, tol)?),
        certification: Certification::certified::<T>(),
    })
}

/// Dense `f64` copy of a block, `inf` kept.
fn float_block<T: Scalar>(k: &Kernel<T>, idx: &[usize]) -> Vec<f64> {
    idx.iter()
        .flat_map(|&i| idx.iter().map(move |&j| k.get(i, j).to_f64()))
        .collect()
}

/// Baum-Eagon iteration `p_i <- p_i (A p)_i / p'Ap` with `A = C - K`, which
/// decreases `p'Kp` monotonically. `a` is a finite `r x r` block.
fn replicator(kblock: &[f64], r: usize, mut p: Vec<f64>, tol: f64) -> Vec<f64> {
    let top = kblock.iter().cloned().fold(0.0, f64::max) + 1.0;
    let a: Vec<f64> = kblock.iter().map(|v| top - v).collect();
    let max_iter = (2e9 / (r * r) as f64).clamp(50.0, 20_000.0) as usize;
    let mut ap = vec![0.0; r];
    for _ in 0..max_iter {
        for i in 0..r {
            ap[i] = (0..r).map(|j| a[i * r + j] * p[j]).sum();
        }
        let pap: f64 = (0..r).map(|i| p[i] * ap[i]).sum();
        let mut change: f64 = 0.0;
        for i in 0..r {
            let next = p[i] * ap[i] / pap;
            change = change.max((next - p[i]).abs());
            p[i] = next;
        }
        if change < tol * 1e-3 {
            break;
        }
    }
    p
}

fn replicator_energy<T: Scalar>(
    k: &Kernel<T>,
    sub: &Kernel<T>,
    map: &[usize],
    opts: &SolverOptions,
) -> Result<EquilibriumResult<T>> {
    let s = sub.len();
    let finite_diag: Vec<usize> = (0..s).filter(|&i| sub.get(i, i).is_finite()).collect();
    // Greedy maximal admissible groups seeded at each point.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &seed in &finite_diag {
        let mut g = vec![seed];
        for &j in &finite_diag {
            if j != seed && g.iter().all(|&l| sub.get(j, l).is_finite()) {
                g.push(j);
            }
        }
        g.sort_unstable();
        if !groups.contains(&g) {
            groups.push(g);
        }
        if groups.len() >= 16 {
            break;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(ExtReal<T>, DiscreteMeasure<T>)> = None;
    for g in &groups {
        let r = g.len();
        let block = float_block(sub, g);
        let mut starts = vec![vec![1.0 / r as f64; r]];
        for _ in 0..opts.restarts {
            let raw: Vec<f64> = (0..r).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            starts.push(raw.into_iter().map(|x| x / total).collect());
        }
        for start in starts {
            let p = replicator(&block, r, start, opts.iterative_tolerance);
            let mut weights: Vec<T> = p.iter().map(|&x| if x < 1e-15 { T::zero() } else { scalar_from_f64(x) }).collect();
            let total = weights.iter().fold(T::zero(), |a, w| a + w.clone());
            for w in weights.iter_mut() {
                *w = w.clone() / total.clone();
            }
            let parents: Vec<usize> = g.iter().map(|&i| map[i]).collect();
            let mu = clean_measure(k.len(), &parents, &weights, opts.tolerance)?;
            let w = energy(k, &mu)?;
            if best.as_ref().is_none_or(|(b, _)| w < *b) {
                best = Some((w, mu));
            }
        }
    }
    let (w_value, mu) = best.expect("some point has a finite diagonal");
    Ok(EquilibriumResult {
        w_value,
        minimizer: Some(mu),
        certification: Certification::HeuristicUpperBound,
    })
}

/// `q` over `rows` with columns from `candidates` that are finite against
/// every row. Returns the value and the witness in parent indices.
fn constrained_minimax<T: Scalar>(
    k: &Kernel<T>,
    rows: &[usize],
    candidates: &[usize],
    tol: f64,
) -> Result<(ExtReal<T>, Option<DiscreteMeasure<T>>)> {
    let cols: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&j| rows.iter().all(|&i| k.get(i, j).is_finite()))
        .collect();
    if cols.is_empty() {
        return Ok((ExtReal::Infinite, None));
    }
    let (t, p) = minimax_lp(k, rows, &cols, tol)?;
    Ok((ExtReal::Finite(t), Some(clean_measure(k.len(), &cols, &p, tol)?)))
}

/// `q = inf_mu sup_{x in subset} U^mu(x)` over measures on `subset`.
pub fn q_energy<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    opts: &SolverOptions,
) -> Result<(ExtReal<T>, Option<DiscreteMeasure<T>>)> {
    let mut rows = check_subset(k.len(), subset)?;
    rows.sort_unstable();
    constrained_minimax(k, &rows, &rows, opts.tolerance)
}

/// `u`, `v` and `q` of `subset`. `v` enumerates supports, so the subset
/// must not exceed `opts.support_threshold` points.
pub fn minimax_energies<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    opts: &SolverOptions,
) -> Result<MinimaxEnergies<T>> {
    let tol = opts.tolerance;
    let mut cols = check_subset(k.len(), subset)?;
    cols.sort_unstable();
    if cols.len() > opts.support_threshold.min(63) {
        return Err(Error::TooLarge {
            what: "support enumeration for v",
            size: cols.len(),
            limit: opts.support_threshold,
        });
    }
    let (q, q_witness) = constrained_minimax(k, &cols, &cols, tol)?;
    let (u, u_witness) = constrained_minimax(k, &k.all_indices(), &cols, tol)?;

    let (sub, map) = restrict(k, &cols)?;
    let masks = finite_masks(&sub);
    let mut v = ExtReal::Infinite;
    let mut v_witness = None;
    for mask in 1u64..(1 << sub.len()) {
        if !block_is_finite(&masks, mask) {
            continue;
        }
        let s = mask_indices(mask);
        let (t, p) = minimax_lp(&sub, &s, &s, tol)?;
        let t = ExtReal::Finite(t);
        if t < v {
            let parents: Vec<usize> = s.iter().map(|&i| map[i]).collect();
            v_witness = Some(clean_measure(k.len(), &parents, &p, tol)?);
            v = t;
        }
    }
    Ok(MinimaxEnergies {
        u,
        v,
        q,
        u_witness,
        v_witness,
        q_witness,
    })
}

/// Checks the Frostman conditions for `mu` against the energy `w_value`.
///
/// Exceptional points are those with `k(x, x) = inf`; condition (i) skips
/// them.
pub fn frostman_verify<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    mu: &DiscreteMeasure<T>,
    w_value: &ExtReal<T>,
    tol: f64,
) -> Result<FrostmanReport> {
    let mut subset = check_subset(k.len(), subset)?;
    subset.sort_unstable();
    if mu.len() != k.len() {
        return Err(Error::SpaceMismatch {
            measure: mu.len(),
            kernel: k.len(),
        });
    }
    let support = mu.support();
    if let Some(&x) = support.iter().find(|x| !subset.contains(x)) {
        return Err(Error::Precondition(format!(
            "measure charges point {x} outside the subset"
        )));
    }
    if w_value.is_infinite() {
        return Err(Error::Precondition(
            "Frostman conditions need a finite energy".into(),
        ));
    }
    let u = potential(k, mu)?;
    let exceptional_points: Vec<usize> = subset
        .iter()
        .copied()
        .filter(|&x| k.get(x, x).is_infinite())
        .collect();
    let lower = subset
        .iter()
        .copied()
        .filter(|x| !exceptional_points.contains(x) && !w_value.le_within(u.at(*x), tol))
        .collect();
    let upper = support
        .iter()
        .copied()
        .filter(|&x| !u.at(x).le_within(w_value, tol))
        .collect();
    let equal = support
        .iter()
        .copied()
        .filter(|&x| !u.at(x).eq_within(w_value, tol))
        .collect();
    Ok(FrostmanReport {
        lower: ConditionCheck::from_violations(lower),
        support_upper: ConditionCheck::from_violations(upper),
        atom_equality: ConditionCheck::from_violations(equal),
        exceptional_points,
    })
}

/// Rendezvous number `r = q` of a finite-valued block, and an invariant
/// measure when one exists.
pub fn rendezvous<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    opts: &SolverOptions,
) -> Result<RendezvousResult<T>> {
    let tol = opts.tolerance;
    let (sub, map) = restrict_sorted(k, subset)?;
    if let Some((i, j)) = sub.first_infinite() {
        return Err(Error::InfiniteEntry(map[i], map[j]));
    }
    let (r_value, _) = q_energy(k, &map, opts)?;
    let all = sub.all_indices();
    let found = match stationary_point(&sub, &all, tol) {
        Some((c, p)) if p.iter().all(|x| *x >= -T::slack(tol)) => Some((c, p)),
        _ => stationary_lp(&sub, &all, &all, tol),
    };
    let Some((c, p)) = found else {
        return Ok(RendezvousResult {
            r_value,
            invariant_measure: None,
            constancy_defect: None,
        });
    };
    let mu = clean_measure(k.len(), &map, &p, tol)?;
    let u = potential(k, &mu)?;
    let hi = value(&u.max_over(&map));
    let lo = value(&u.min_over(&map));
    if !close(&c, &value(&r_value), tol) {
        return Err(Error::Internal(format!(
            "invariant measure has constant potential {c} but q = {r_value}"
        )));
    }
    Ok(RendezvousResult {
        r_value,
        invariant_measure: Some(mu),
        constancy_defect: Some(hi - lo),
    })
}

/// Continuum energy estimate for a closed-form kernel on a grid: the
/// singular diagonal is replaced by the energy of the uniform distribution
/// on one cell, and the resulting finite matrix is minimized.
pub fn continuum_energy_estimate(k: &Kernel<f64>, opts: &SolverOptions) -> Result<ContinuumEstimate> {
    let origin = k.origin().ok_or_else(|| {
        Error::Precondition("continuum estimates need a closed-form kernel on a grid".into())
    })?;
    let diag = origin.cell_self_energy();
    if !diag.is_finite() {
        return Ok(ContinuumEstimate {
            value: ExtReal::Infinite,
            measure: None,
            method: "stationary",
        });
    }
    let n = k.len();
    let mut a = float_block(k, &k.all_indices());
    for i in 0..n {
        a[i * n + i] = diag;
    }
    if let Some(x) = solve_square(a.clone(), vec![1.0; n], opts.tolerance * 1e-3) {
        let total: f64 = x.iter().sum();
        if total > 0.0 && x.iter().all(|&v| v > 0.0) {
            let p: Vec<f64> = x.iter().map(|v| v / total).collect();
            return Ok(ContinuumEstimate {
                value: ExtReal::Finite(1.0 / total),
                measure: Some(DiscreteMeasure::new(p, opts.tolerance)?),
                method: "stationary",
            });
        }
    }
    let p = replicator(&a, n, vec![1.0 / n as f64; n], opts.iterative_tolerance);
    let w: f64 = (0..n)
        .map(|i| p[i] * (0..n).map(|j| a[i * n + j] * p[j]).sum::<f64>())
        .sum();
    Ok(ContinuumEstimate {
        value: ExtReal::Finite(w),
        measure: Some(DiscreteMeasure::new(p, opts.tolerance.max(1e-9))?),
        method: "replicator",
    })
}
