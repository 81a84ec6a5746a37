//! Named example instances with the values the solvers must reproduce.
//!
//! Infinite examples come as truncation families: the size parameter picks
//! how many points survive, and the expectations are stated for the
//! truncation rather than for the limit.

use num_traits::{One, Pow};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{Entry, GridSpec, KernelForm, KernelSpec, SpaceSpec};
use crate::numerics::{ratio, ExtReal, Rational};

/// One expected quantity of a fixture.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Expected {
    /// Exact value; `+inf` allowed.
    Exact {
        #[serde(serialize_with = "ser_ext")]
        value: ExtReal<Rational>,
    },
    /// Value reproduced up to `tolerance`.
    Approx { value: f64, tolerance: f64 },
    /// Boolean verdict.
    Verdict { holds: bool },
    /// Behaviour that is only checked by eye.
    Qualitative { description: String },
}

fn ser_ext<S: serde::Serializer>(v: &ExtReal<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    Entry::from_rational(v).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expectation {
    pub quantity: String,
    #[serde(flatten)]
    pub expected: Expected,
    /// Where the value comes from.
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fixture {
    pub name: String,
    pub size: Option<usize>,
    pub spec: KernelSpec,
    pub expected: Vec<Expectation>,
}

impl Fixture {
    pub fn expectation(&self, quantity: &str) -> Option<&Expected> {
        self.expected
            .iter()
            .find(|e| e.quantity == quantity)
            .map(|e| &e.expected)
    }
}

/// Names, default sizes and one-line descriptions of every fixture.
pub const FIXTURES: &[(&str, Option<usize>, &str)] = &[
    (
        "discrete-infty-diag",
        Some(10),
        "points 0..N, +inf diagonal, 1 between 0 and any other point, 0 otherwise",
    ),
    (
        "three-point",
        None,
        "three points -1, 0, 1 with k = 0 between -1 and 1 and 2 elsewhere",
    ),
    (
        "geometric-decay",
        Some(12),
        "points 1..N, +inf diagonal, k(n, m) = 2^(-n-m) off the diagonal",
    ),
    (
        "modified-log-interval",
        Some(8),
        "points 1/n (n <= N) and j/(2N) in (0, 1]; 2^(-n-m) between 1/n and 1/m, -log|x-y| otherwise",
    ),
    (
        "log-interval",
        Some(65),
        "-log|x-y| on an m-point grid of [0, 1]",
    ),
];

/// Builds fixture `name`; `size` overrides the default truncation or grid
/// size where the fixture has one.
pub fn fixture(name: &str, size: Option<usize>) -> Result<Fixture> {
    let default = FIXTURES
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))?
        .1;
    let size = size.or(default);
    match name {
        "discrete-infty-diag" => discrete_infty_diag(size.unwrap_or(10)),
        "three-point" => Ok(three_point()),
        "geometric-decay" => geometric_decay(size.unwrap_or(12)),
        "modified-log-interval" => modified_log_interval(size.unwrap_or(8)),
        "log-interval" => log_interval(size.unwrap_or(65)),
        _ => unreachable!("listed in FIXTURES"),
    }
}

fn exact(quantity: &str, value: ExtReal<Rational>, note: &str) -> Expectation {
    Expectation {
        quantity: quantity.into(),
        expected: Expected::Exact { value },
        note: note.into(),
    }
}

fn verdict(quantity: &str, holds: bool, note: &str) -> Expectation {
    Expectation {
        quantity: quantity.into(),
        expected: Expected::Verdict { holds },
        note: note.into(),
    }
}

fn int(n: i64) -> ExtReal<Rational> {
    ExtReal::Finite(ratio(n, 1))
}

fn entry(v: ExtReal<Rational>) -> Entry {
    Entry::from_rational(&v)
}

fn discrete_infty_diag(n: usize) -> Result<Fixture> {
    if n < 1 {
        return Err(Error::InvalidSpec("discrete-infty-diag needs N >= 1".into()));
    }
    let labels: Vec<usize> = (0..=n).collect();
    let rows = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| {
                    entry(if i == j {
                        ExtReal::Infinite
                    } else if i == 0 || j == 0 {
                        int(1)
                    } else {
                        int(0)
                    })
                })
                .collect()
        })
        .collect();
    Ok(Fixture {
        name: "discrete-infty-diag".into(),
        size: Some(n),
        spec: KernelSpec::matrix(&labels, rows),
        expected: vec![
            exact(
                "D_n",
                int(0),
                "for 2 <= n <= N: n distinct nonzero points interact with value 0",
            ),
            exact(
                "M_n",
                int(1),
                "for 1 <= n <= N: zeros at 0 give 1 off 0; any zero set leaves a point with average at most 1",
            ),
            exact("w", ExtReal::Infinite, "every atom has infinite self-interaction"),
            verdict(
                "max_principle",
                true,
                "every support block is infinite except singletons, whose potential is largest on the support",
            ),
        ],
    })
}

fn three_point() -> Fixture {
    let k = [[2, 2, 0], [2, 2, 2], [0, 2, 2]];
    let rows = k
        .iter()
        .map(|r| r.iter().map(|&v| entry(int(v))).collect())
        .collect();
    Fixture {
        name: "three-point".into(),
        size: None,
        spec: KernelSpec::matrix(&["-1", "0", "1"], rows),
        expected: vec![
            exact("w", int(1), "face enumeration; minimizer (1/2, 0, 1/2)"),
            exact("D", int(1), "equals w on a finite space"),
            exact("q", int(2), "the potential at 0 is 2 for every measure"),
            exact("M", int(2), "equals q for a finite-valued kernel"),
            exact("u", int(2), "q is taken over the whole space here"),
            exact("v", int(1), "attained by (1/2, 0, 1/2)"),
            exact("D_2", int(0), "the pair (-1, 1)"),
            exact("D_3", ExtReal::Finite(ratio(2, 3)), "brute force over the 10 multisets"),
            verdict(
                "max_principle",
                false,
                "(1/2, 0, 1/2) has potential 1 on its support and 2 at 0",
            ),
        ],
    }
}

fn geometric_decay(n: usize) -> Result<Fixture> {
    if n < 2 {
        return Err(Error::InvalidSpec("geometric-decay needs N >= 2".into()));
    }
    let two = Rational::from_integer(2.into());
    let pow = |e: usize| -> Rational { Rational::one() / Pow::pow(&two, e) };
    let labels: Vec<usize> = (1..=n).collect();
    let rows = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    entry(if i == j {
                        ExtReal::Infinite
                    } else {
                        ExtReal::Finite(pow(i + j))
                    })
                })
                .collect()
        })
        .collect();
    Ok(Fixture {
        name: "geometric-decay".into(),
        size: Some(n),
        spec: KernelSpec::matrix(&labels, rows),
        expected: vec![
            exact("w", ExtReal::Infinite, "every atom has infinite self-interaction"),
            exact(
                "D_2",
                ExtReal::Finite(pow(2 * n - 1)),
                "the two largest indices N - 1 and N",
            ),
        ],
    })
}

fn modified_log_interval(n: usize) -> Result<Fixture> {
    if n < 2 {
        return Err(Error::InvalidSpec("modified-log-interval needs N >= 2".into()));
    }
    let m = 2 * n;
    // (position, Some(k) when the point is 1/k)
    let mut points: Vec<(Rational, Option<usize>)> = (1..=n).map(|k| (ratio(1, k as i64), Some(k))).collect();
    for j in 1..=m {
        let x = ratio(j as i64, m as i64);
        if !points.iter().any(|(p, _)| *p == x) {
            points.push((x, None));
        }
    }
    points.sort_by(|a, b| a.0.cmp(&b.0));
    let labels: Vec<String> = points.iter().map(|(x, _)| crate::numerics::format_rational(x)).collect();
    let rows = points
        .iter()
        .map(|(x, a)| {
            points
                .iter()
                .map(|(y, b)| {
                    if x == y {
                        return Entry::infinite();
                    }
                    match (a, b) {
                        (Some(a), Some(b)) => entry(ExtReal::Finite(
                            Rational::one() / Pow::pow(&Rational::from_integer(2.into()), a + b),
                        )),
                        _ => {
                            let d = num_traits::ToPrimitive::to_f64(&(x - y)).unwrap_or(1.0).abs();
                            Entry::from_float(&ExtReal::Finite(-d.ln()))
                        }
                    }
                })
                .collect()
        })
        .collect();
    Ok(Fixture {
        name: "modified-log-interval".into(),
        size: Some(n),
        spec: KernelSpec::matrix(&labels, rows),
        expected: vec![
            Expectation {
                quantity: "D_n".into(),
                expected: Expected::Qualitative {
                    description: "systems drawn from the points 1/k keep D_n near 0".into(),
                },
                note: "the 2^(-n-m) interactions vanish as the indices grow".into(),
            },
            Expectation {
                quantity: "M_n".into(),
                expected: Expected::Qualitative {
                    description: "zeros drawn from the points 1/k keep M_n small".into(),
                },
                note: "same mechanism as D_n".into(),
            },
            Expectation {
                quantity: "w".into(),
                expected: Expected::Qualitative {
                    description: "+inf on the grid itself; the continuum energy of (0, 1] stays finite".into(),
                },
                note: "a countable set of modified pairs carries no continuous measure".into(),
            },
        ],
    })
}

fn log_interval(m: usize) -> Result<Fixture> {
    if m < 2 {
        return Err(Error::GridTooSmall(m));
    }
    Ok(Fixture {
        name: "log-interval".into(),
        size: Some(m),
        spec: KernelSpec {
            space: SpaceSpec::Grid(GridSpec::Interval { a: 0.0, b: 1.0, m }),
            kernel: KernelForm::Log,
        },
        expected: vec![
            exact("w", ExtReal::Infinite, "every grid atom has infinite self-interaction"),
            Expectation {
                quantity: "w_continuum".into(),
                expected: Expected::Approx {
                    value: 4f64.ln(),
                    tolerance: 2e-2,
                },
                note: "log 4 for [0, 1]; the cell-regularized grid estimate converges to it as m grows".into(),
            },
            exact("D_2", int(0), "the endpoints 0 and 1"),
        ],
    })
}
