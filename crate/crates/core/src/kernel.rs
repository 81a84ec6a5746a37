//! Finite spaces, kernels on them, and the JSON kernel-spec format.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{format_rational, parse_rational, ExtReal, Rational, Scalar};

/// A point of a finite space.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Label(String),
    /// Coordinate on a real interval.
    Real(f64),
    /// Angle on the unit circle, in `[0, 2pi)`.
    Angle(f64),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Label(l) => f.write_str(l),
            Point::Real(x) => write!(f, "{x}"),
            Point::Angle(t) => write!(f, "angle {t}"),
        }
    }
}

/// An indexed set of pairwise distinct points.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpace {
    points: Vec<Point>,
}

impl FiniteSpace {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpec("a space needs at least one point".into()));
        }
        let mut seen = HashSet::new();
        for p in &points {
            let key = match p {
                Point::Label(l) => format!("L{l}"),
                Point::Real(x) => format!("R{:x}", x.to_bits()),
                Point::Angle(t) => format!("A{:x}", t.to_bits()),
            };
            if !seen.insert(key) {
                return Err(Error::DuplicatePoint(p.to_string()));
            }
        }
        Ok(FiniteSpace { points })
    }

    pub fn labeled<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(labels.into_iter().map(|l| Point::Label(l.into())).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// Index of the point carrying `label`.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p.to_string() == label)
    }

    fn subspace(&self, indices: &[usize]) -> FiniteSpace {
        FiniteSpace {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }
}

/// How distances on circle grids are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleMetric {
    #[default]
    Chordal,
    Arc,
}

/// One-dimensional domains that can be discretized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridDomain {
    Interval { a: f64, b: f64 },
    Circle { metric: CircleMetric },
}

impl GridDomain {
    fn distance(&self, p: &Point, q: &Point) -> f64 {
        match (self, p, q) {
            (_, Point::Real(x), Point::Real(y)) => (x - y).abs(),
            (GridDomain::Circle { metric }, Point::Angle(s), Point::Angle(t)) => {
                let delta = (s - t).abs();
                match metric {
                    CircleMetric::Chordal => 2.0 * (delta / 2.0).sin(),
                    CircleMetric::Arc => delta.min(2.0 * PI - delta),
                }
            }
            _ => f64::NAN,
        }
    }

    /// Length of the cell one grid point stands for.
    fn cell_length(&self, m: usize) -> f64 {
        match self {
            GridDomain::Interval { a, b } => (b - a) / (m - 1) as f64,
            GridDomain::Circle { metric: CircleMetric::Chordal } => 2.0 * (PI / m as f64).sin(),
            GridDomain::Circle { metric: CircleMetric::Arc } => 2.0 * PI / m as f64,
        }
    }
}

/// Equally spaced points: both endpoints for intervals, `m` angles starting at
/// zero for the circle.
pub fn grid_discretize(domain: &GridDomain, m: usize) -> Result<FiniteSpace> {
    if m < 2 {
        return Err(Error::GridTooSmall(m));
    }
    let points = match *domain {
        GridDomain::Interval { a, b } => {
            if !a.is_finite() || !b.is_finite() || a >= b {
                return Err(Error::InvalidSpec(format!("interval needs a < b, got [{a}, {b}]")));
            }
            (0..m)
                .map(|j| {
                    if j == m - 1 {
                        Point::Real(b)
                    } else {
                        Point::Real(a + (b - a) * j as f64 / (m - 1) as f64)
                    }
                })
                .collect()
        }
        GridDomain::Circle { .. } => (0..m)
            .map(|j| Point::Angle(2.0 * PI * j as f64 / m as f64))
            .collect(),
    };
    FiniteSpace::new(points)
}

/// Closed-form kernel families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelFamily {
    /// `-log |x - y|`
    Log,
    /// `|x - y|^(-s)`
    Riesz { s: f64 },
}

/// Provenance of a kernel evaluated from a closed form on a grid, kept so the
/// continuum energy can be estimated.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub family: KernelFamily,
    /// Length of the cell each grid point represents.
    pub cell: f64,
    /// Total constant added on top of the closed form.
    pub shift: f64,
}

impl ClosedForm {
    /// Mean of the closed form over a cell times itself, i.e. the energy of
    /// the uniform distribution on one cell.
    pub fn cell_self_energy(&self) -> f64 {
        let l = self.cell;
        let raw = match self.family {
            KernelFamily::Log => -l.ln() + 1.5,
            KernelFamily::Riesz { s } if s < 1.0 => 2.0 * l.powf(-s) / ((1.0 - s) * (2.0 - s)),
            KernelFamily::Riesz { .. } => f64::INFINITY,
        };
        raw + self.shift
    }
}

/// Symmetric, nonnegative, extended-real matrix on a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    space: FiniteSpace,
    values: Vec<ExtReal<T>>,
    origin: Option<ClosedForm>,
}

impl<T: Scalar> Kernel<T> {
    /// Validates symmetry and nonnegativity.
    pub fn new(space: FiniteSpace, rows: Vec<Vec<ExtReal<T>>>) -> Result<Self> {
        let n = space.len();
        if rows.len() != n {
            return Err(Error::NotSquare {
                expected: n,
                found: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    expected: n,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        let kernel = Kernel {
            space,
            values,
            origin: None,
        };
        kernel.validate()?;
        Ok(kernel)
    }

    /// Kernel on `labels` from a dense matrix.
    pub fn from_matrix<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        rows: Vec<Vec<ExtReal<T>>>,
    ) -> Result<Self> {
        Self::new(FiniteSpace::labeled(labels)?, rows)
    }

    /// Kernel on the labels `0..n` from finite entries.
    pub fn from_finite(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(ExtReal::Finite).collect())
            .collect();
        Self::from_matrix((0..n).map(|i| i.to_string()), rows)
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                if self.get(i, j) != self.get(j, i) {
                    return Err(Error::Asymmetric(i, j));
                }
            }
        }
        let mut worst: Option<(usize, usize, T)> = None;
        for i in 0..n {
            for j in 0..n {
                if let ExtReal::Finite(v) = self.get(i, j) {
                    if *v < T::zero() && worst.as_ref().is_none_or(|w| *v < w.2) {
                        worst = Some((i, j, v.clone()));
                    }
                }
            }
        }
        if let Some((i, j, v)) = worst {
            return Err(Error::NegativeEntry {
                i,
                j,
                value: v.to_f64(),
                shift: -v.to_f64(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn origin(&self) -> Option<&ClosedForm> {
        self.origin.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> &ExtReal<T> {
        &self.values[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[ExtReal<T>] {
        let n = self.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<ExtReal<T>>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn all_indices(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    /// True when no entry is `+inf`.
    pub fn is_finite_valued(&self) -> bool {
        self.values.iter().all(ExtReal::is_finite)
    }

    /// First `+inf` entry in row-major order.
    pub fn first_infinite(&self) -> Option<(usize, usize)> {
        let n = self.len();
        self.values.iter().position(ExtReal::is_infinite).map(|p| (p / n, p % n))
    }

    pub fn min_finite_entry(&self) -> Option<T> {
        self.values
            .iter()
            .filter_map(|v| v.as_finite())
            .fold(None, |acc: Option<T>, v| match acc {
                Some(a) if a <= *v => Some(a),
                _ => Some(v.clone()),
            })
    }

    /// The same kernel with point `i` of the result being point `perm[i]` here.
    pub fn relabel(&self, perm: &[usize]) -> Result<Kernel<T>> {
        let n = self.len();
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != self.all_indices() {
            return Err(Error::InvalidSpec(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        let values = (0..n * n)
            .map(|p| self.get(perm[p / n], perm[p % n]).clone())
            .collect();
        Ok(Kernel {
            space: self.space.subspace(perm),
            values,
            origin: None,
        })
    }
}

impl<T: Scalar> Kernel<T> {
    /// Floating-point copy of the kernel.
    pub fn to_float(&self) -> Kernel<f64> {
        Kernel {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .map(|v| match v {
                    ExtReal::Finite(r) => ExtReal::Finite(r.to_f64()),
                    ExtReal::Infinite => ExtReal::Infinite,
                })
                .collect(),
            origin: self.origin.clone(),
        }
    }
}

/// Adds `c` to every finite entry; `+inf` entries stay.
pub fn shift_kernel<T: Scalar>(k: &Kernel<T>, c: &T) -> Result<Kernel<T>> {
    let n = k.len();
    let values: Vec<ExtReal<T>> = k.values.iter().map(|v| v.offset(c)).collect();
    if let Some(p) = values
        .iter()
        .position(|v| v.as_finite().is_some_and(|x| *x < T::zero()))
    {
        return Err(Error::ShiftTooNegative {
            shift: c.to_f64(),
            i: p / n,
            j: p % n,
        });
    }
    Ok(Kernel {
        space: k.space.clone(),
        values,
        origin: k.origin.clone().map(|mut o| {
            o.shift += c.to_f64();
            o
        }),
    })
}

/// Validates a subset of indices: nonempty and in range. Duplicates are
/// dropped; order is preserved.
pub fn check_subset(size: usize, subset: &[usize]) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut seen = vec![false; size];
    let mut out = Vec::with_capacity(subset.len());
    for &i in subset {
        if i >= size {
            return Err(Error::IndexOutOfRange { index: i, size });
        }
        if !seen[i] {
            seen[i] = true;
            out.push(i);
        }
    }
    Ok(out)
}

/// Principal submatrix on `subset`, together with the map from new indices
/// to parent indices.
pub fn restrict<T: Scalar>(k: &Kernel<T>, subset: &[usize]) -> Result<(Kernel<T>, Vec<usize>)> {
    let map = check_subset(k.len(), subset)?;
    let values = map
        .iter()
        .flat_map(|&i| map.iter().map(move |&j| (i, j)))
        .map(|(i, j)| k.get(i, j).clone())
        .collect();
    let origin = if map.len() == k.len() && map.iter().enumerate().all(|(a, &b)| a == b) {
        k.origin.clone()
    } else {
        None
    };
    Ok((
        Kernel {
            space: k.space.subspace(&map),
            values,
            origin,
        },
        map,
    ))
}

/// [`restrict`] with the subset sorted first, so that local index order
/// agrees with parent index order.
pub(crate) fn restrict_sorted<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
) -> Result<(Kernel<T>, Vec<usize>)> {
    let mut order = check_subset(k.len(), subset)?;
    order.sort_unstable();
    restrict(k, &order)
}

// ---------------------------------------------------------------------------
// JSON kernel specs

/// A matrix entry in a spec file: a number, `"p/q"`, or `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(serde_json::Number),
    Text(String),
}

impl Entry {
    pub fn infinite() -> Self {
        Entry::Text("inf".into())
    }

    pub fn parse(&self) -> Result<ExtReal<Rational>> {
        let text = match self {
            Entry::Number(n) => n.to_string(),
            Entry::Text(t) => t.clone(),
        };
        if matches!(text.trim(), "inf" | "+inf" | "Infinity") {
            return Ok(ExtReal::Infinite);
        }
        parse_rational(&text)
            .map(ExtReal::Finite)
            .ok_or_else(|| Error::InvalidSpec(format!("cannot read `{text}` as a kernel entry")))
    }

    pub fn from_rational(v: &ExtReal<Rational>) -> Self {
        match v {
            ExtReal::Infinite => Entry::infinite(),
            ExtReal::Finite(r) if r.is_integer() => match r.numer().to_string().parse::<i64>() {
                Ok(i) => Entry::Number(i.into()),
                Err(_) => Entry::Text(format_rational(r)),
            },
            ExtReal::Finite(r) => Entry::Text(format_rational(r)),
        }
    }

    pub fn from_float(v: &ExtReal<f64>) -> Self {
        match v {
            ExtReal::Infinite => Entry::infinite(),
            ExtReal::Finite(x) => serde_json::Number::from_f64(*x)
                .map(Entry::Number)
                .unwrap_or_else(|| Entry::Text(x.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "lowercase")]
pub enum GridSpec {
    Interval {
        a: f64,
        b: f64,
        m: usize,
    },
    Circle {
        m: usize,
        #[serde(default)]
        metric: CircleMetric,
    },
}

impl GridSpec {
    pub fn domain(&self) -> GridDomain {
        match *self {
            GridSpec::Interval { a, b, .. } => GridDomain::Interval { a, b },
            GridSpec::Circle { metric, .. } => GridDomain::Circle { metric },
        }
    }

    pub fn points(&self) -> usize {
        match *self {
            GridSpec::Interval { m, .. } | GridSpec::Circle { m, .. } => m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SpaceSpec {
    Finite { labels: Vec<serde_json::Value> },
    Grid(GridSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelForm {
    Matrix { rows: Vec<Vec<Entry>> },
    Log,
    Riesz { s: f64 },
    Shifted { c: Entry, base: Box<KernelForm> },
}

impl KernelForm {
    fn is_closed_form(&self) -> bool {
        match self {
            KernelForm::Matrix { .. } => false,
            KernelForm::Log | KernelForm::Riesz { .. } => true,
            KernelForm::Shifted { base, .. } => base.is_closed_form(),
        }
    }
}

/// Declarative description of a kernel, as stored in kernel spec files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub space: SpaceSpec,
    pub kernel: KernelForm,
}

impl KernelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kernel specs always serialize")
    }

    /// Spec for an explicit matrix on labeled points.
    pub fn matrix<S: ToString>(labels: &[S], rows: Vec<Vec<Entry>>) -> Self {
        KernelSpec {
            space: SpaceSpec::Finite {
                labels: labels.iter().map(|l| serde_json::Value::String(l.to_string())).collect(),
            },
            kernel: KernelForm::Matrix { rows },
        }
    }

    pub fn point_count(&self) -> usize {
        match &self.space {
            SpaceSpec::Finite { labels } => labels.len(),
            SpaceSpec::Grid(g) => g.points(),
        }
    }

    /// True when entries come from a transcendental formula.
    pub fn is_closed_form(&self) -> bool {
        self.kernel.is_closed_form()
    }

    pub fn build_space(&self) -> Result<FiniteSpace> {
        match &self.space {
            SpaceSpec::Finite { labels } => FiniteSpace::labeled(labels.iter().map(|v| match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            })),
            SpaceSpec::Grid(g) => grid_discretize(&g.domain(), g.points()),
        }
    }
}

/// Evaluates and validates a kernel spec in the arithmetic of `T`.
pub fn build_kernel<T: Scalar>(spec: &KernelSpec) -> Result<Kernel<T>> {
    let space = spec.build_space()?;
    let n = space.len();
    let grid = match &spec.space {
        SpaceSpec::Grid(g) => Some(g.domain()),
        SpaceSpec::Finite { .. } => None,
    };
    let (raw, shift) = evaluate(&spec.kernel, &space, grid.as_ref())?;

    if let (KernelForm::Log, Some(domain)) = (&spec.kernel, grid.as_ref()) {
        let diameter = grid_diameter(&space, domain);
        if diameter > 1.0 {
            return Err(Error::LogNeedsShift {
                diameter,
                shift: diameter.ln(),
            });
        }
    }

    let mut kernel = Kernel::new(space, raw)?;
    if let (Some(domain), Some(family)) = (grid, closed_family(&spec.kernel)) {
        kernel.origin = Some(ClosedForm {
            family,
            cell: domain.cell_length(n),
            shift,
        });
    }
    Ok(kernel)
}

fn closed_family(form: &KernelForm) -> Option<KernelFamily> {
    match form {
        KernelForm::Matrix { .. } => None,
        KernelForm::Log => Some(KernelFamily::Log),
        KernelForm::Riesz { s } => Some(KernelFamily::Riesz { s: *s }),
        KernelForm::Shifted { base, .. } => closed_family(base),
    }
}

fn grid_diameter(space: &FiniteSpace, domain: &GridDomain) -> f64 {
    let pts = space.points();
    match domain {
        GridDomain::Interval { a, b } => b - a,
        GridDomain::Circle { .. } => pts
            .iter()
            .map(|p| domain.distance(&pts[0], p))
            .fold(0.0, f64::max),
    }
}

type RawMatrix<T> = Vec<Vec<ExtReal<T>>>;

/// Entries before validation (possibly negative) and the accumulated shift.
fn evaluate<T: Scalar>(
    form: &KernelForm,
    space: &FiniteSpace,
    grid: Option<&GridDomain>,
) -> Result<(RawMatrix<T>, f64)> {
    let n = space.len();
    match form {
        KernelForm::Matrix { rows } => {
            if rows.len() != n {
                return Err(Error::NotSquare {
                    expected: n,
                    found: rows.len(),
                });
            }
            let mut out = Vec::with_capacity(n);
            for row in rows {
                if row.len() != n {
                    return Err(Error::NotSquare {
                        expected: n,
                        found: row.len(),
                    });
                }
                out.push(
                    row.iter()
                        .map(|e| e.parse().map(|v| lift(&v)))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            Ok((out, 0.0))
        }
        KernelForm::Log | KernelForm::Riesz { .. } => {
            let domain = grid.ok_or_else(|| {
                Error::InvalidSpec("closed-form kernels need a grid space".into())
            })?;
            if let KernelForm::Riesz { s } = form {
                if s.is_nan() || *s <= 0.0 {
                    return Err(Error::InvalidSpec(format!("Riesz exponent must be positive, got {s}")));
                }
            }
            let pts = space.points();
            let mut out = vec![vec![ExtReal::Infinite; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d = domain.distance(&pts[i], &pts[j]);
                    let value = match form {
                        KernelForm::Log => -d.ln(),
                        KernelForm::Riesz { s } => d.powf(-s),
                        _ => unreachable!(),
                    };
                    out[i][j] = ExtReal::Finite(T::from_real(value).ok_or(Error::NotRepresentable)?);
                }
            }
            Ok((out, 0.0))
        }
        KernelForm::Shifted { c, base } => {
            let c = match c.parse()? {
                ExtReal::Finite(c) => c,
                ExtReal::Infinite => {
                    return Err(Error::InvalidSpec("shift constant must be finite".into()))
                }
            };
            let (rows, shift) = evaluate::<T>(base, space, grid)?;
            let ct = T::from_rational(&c);
            let rows = rows
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.offset(&ct)).collect())
                .collect();
            Ok((rows, shift + ct.to_f64()))
        }
    }
}

fn lift<T: Scalar>(v: &ExtReal<Rational>) -> ExtReal<T> {
    match v {
        ExtReal::Finite(r) => ExtReal::Finite(T::from_rational(r)),
        ExtReal::Infinite => ExtReal::Infinite,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ratio;

    fn q(n: i64) -> ExtReal<Rational> {
        ExtReal::Finite(ratio(n, 1))
    }

    fn three_point() -> Kernel<Rational> {
        Kernel::from_matrix(
            ["-1", "0", "1"],
            vec![vec![q(2), q(2), q(0)], vec![q(2), q(2), q(2)], vec![q(0), q(2), q(2)]],
        )
        .unwrap()
    }

    #[test]
    fn builds_three_point_matrix() {
        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"finite","labels":[-1,0,1]},
                "kernel":{"type":"matrix","rows":[[2,2,0],[2,2,2],[0,2,2]]}}"#,
        )
        .unwrap();
        let k: Kernel<Rational> = build_kernel(&spec).unwrap();
        assert_eq!(k, three_point());
        assert_eq!(k.space().point(0).to_string(), "-1");
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"finite","labels":["a","b"]},
                "kernel":{"type":"matrix","rows":[[0,1],[2,0]]}}"#,
        )
        .unwrap();
        assert!(matches!(build_kernel::<Rational>(&spec), Err(Error::Asymmetric(0, 1))));
    }

    #[test]
    fn rejects_negative_entry_and_ragged_rows() {
        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"finite","labels":["a","b"]},
                "kernel":{"type":"matrix","rows":[[1,"-1/2"],["-1/2",1]]}}"#,
        )
        .unwrap();
        match build_kernel::<Rational>(&spec) {
            Err(Error::NegativeEntry { i: 0, j: 1, shift, .. }) => assert_eq!(shift, 0.5),
            other => panic!("unexpected {other:?}"),
        }
        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"finite","labels":["a","b"]},
                "kernel":{"type":"matrix","rows":[[1,2],[2]]}}"#,
        )
        .unwrap();
        assert!(matches!(build_kernel::<Rational>(&spec), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn log_kernel_on_unit_interval() {
        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"grid","domain":"interval","a":0,"b":1,"m":5},"kernel":{"type":"log"}}"#,
        )
        .unwrap();
        let k: Kernel<f64> = build_kernel(&spec).unwrap();
        assert_eq!(k.len(), 5);
        for i in 0..5 {
            assert_eq!(*k.get(i, i), ExtReal::Infinite);
        }
        assert_eq!(*k.get(0, 4), ExtReal::Finite(0.0));
        assert_eq!(*k.get(0, 2), ExtReal::Finite(2f64.ln()));
        assert_eq!(*k.get(1, 2), ExtReal::Finite(4f64.ln()));
        assert!(k.origin().is_some());
        assert!(matches!(build_kernel::<Rational>(&spec), Err(Error::NotRepresentable)));
    }

    #[test]
    fn log_kernel_on_wide_domain_needs_shift() {
        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"grid","domain":"interval","a":0,"b":2,"m":3},"kernel":{"type":"log"}}"#,
        )
        .unwrap();
        assert!(matches!(build_kernel::<f64>(&spec), Err(Error::LogNeedsShift { .. })));

        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"grid","domain":"interval","a":0,"b":2,"m":3},
                "kernel":{"type":"shifted","c":1,"base":{"type":"log"}}}"#,
        )
        .unwrap();
        let k: Kernel<f64> = build_kernel(&spec).unwrap();
        assert!((k.get(0, 2).to_f64() - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert_eq!(k.origin().unwrap().shift, 1.0);

        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"grid","domain":"interval","a":0,"b":3,"m":3},
                "kernel":{"type":"shifted","c":"1/2","base":{"type":"log"}}}"#,
        )
        .unwrap();
        assert!(matches!(build_kernel::<f64>(&spec), Err(Error::NegativeEntry { .. })));
    }

    #[test]
    fn riesz_and_circle() {
        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"grid","domain":"circle","m":4},"kernel":{"type":"riesz","s":1}}"#,
        )
        .unwrap();
        let k: Kernel<f64> = build_kernel(&spec).unwrap();
        assert!((k.get(0, 2).to_f64() - 0.5).abs() < 1e-15);
        assert!((k.get(0, 1).to_f64() - 1.0 / 2f64.sqrt()).abs() < 1e-12);

        let spec = KernelSpec::from_json(
            r#"{"space":{"type":"grid","domain":"circle","m":4,"metric":"arc"},"kernel":{"type":"riesz","s":1}}"#,
        )
        .unwrap();
        let k: Kernel<f64> = build_kernel(&spec).unwrap();
        assert!((k.get(0, 2).to_f64() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn grid_points() {
        let g = grid_discretize(&GridDomain::Interval { a: 0.0, b: 1.0 }, 5).unwrap();
        let xs: Vec<_> = g.points().to_vec();
        assert_eq!(
            xs,
            [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&x| Point::Real(x)).collect::<Vec<_>>()
        );
        let g = grid_discretize(&GridDomain::Interval { a: 0.0, b: 1.0 }, 2).unwrap();
        assert_eq!(g.points(), &[Point::Real(0.0), Point::Real(1.0)]);
        let g = grid_discretize(&GridDomain::Circle { metric: CircleMetric::Chordal }, 4).unwrap();
        assert_eq!(
            g.points(),
            &[Point::Angle(0.0), Point::Angle(PI / 2.0), Point::Angle(PI), Point::Angle(1.5 * PI)]
        );
        assert!(matches!(
            grid_discretize(&GridDomain::Interval { a: 0.0, b: 1.0 }, 1),
            Err(Error::GridTooSmall(1))
        ));
    }

    #[test]
    fn shifting() {
        let k = three_point();
        let shifted = shift_kernel(&k, &ratio(1, 1)).unwrap();
        assert_eq!(
            shifted.rows(),
            vec![vec![q(3), q(3), q(1)], vec![q(3), q(3), q(3)], vec![q(1), q(3), q(3)]]
        );
        assert_eq!(shift_kernel(&k, &ratio(0, 1)).unwrap(), k);
        assert!(matches!(
            shift_kernel(&k, &ratio(-1, 2)),
            Err(Error::ShiftTooNegative { i: 0, j: 2, .. })
        ));
        let twice = shift_kernel(&shift_kernel(&k, &ratio(1, 3)).unwrap(), &ratio(1, 6)).unwrap();
        assert_eq!(twice, shift_kernel(&k, &ratio(1, 2)).unwrap());
    }

    #[test]
    fn restriction() {
        let k = three_point();
        let (sub, map) = restrict(&k, &[0, 2]).unwrap();
        assert_eq!(map, vec![0, 2]);
        assert_eq!(sub.rows(), vec![vec![q(2), q(0)], vec![q(0), q(2)]]);
        assert_eq!(sub.space().point(1).to_string(), "1");
        let (full, _) = restrict(&k, &[0, 1, 2]).unwrap();
        assert_eq!(full, k);
        assert!(matches!(restrict(&k, &[]), Err(Error::EmptySubset)));
        assert!(matches!(restrict(&k, &[3]), Err(Error::IndexOutOfRange { index: 3, size: 3 })));

        // nested restriction composes
        let (outer, m1) = restrict(&k, &[2, 0, 1]).unwrap();
        let (inner, m2) = restrict(&outer, &[1, 2]).unwrap();
        let composed: Vec<usize> = m2.iter().map(|&i| m1[i]).collect();
        assert_eq!(restrict(&k, &composed).unwrap().0, inner);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(matches!(FiniteSpace::labeled(["a", "a"]), Err(Error::DuplicatePoint(_))));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = KernelSpec {
            space: SpaceSpec::Grid(GridSpec::Circle {
                m: 8,
                metric: CircleMetric::Arc,
            }),
            kernel: KernelForm::Shifted {
                c: Entry::Text("3/2".into()),
                base: Box::new(KernelForm::Log),
            },
        };
        assert_eq!(KernelSpec::from_json(&spec.to_json()).unwrap(), spec);
        let text = spec.to_json();
        assert!(text.contains("\"domain\": \"circle\""));
    }
}
