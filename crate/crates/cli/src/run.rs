use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use transfinite::chebyshev::{m_estimate, mn_exact, mn_heuristic};
use transfinite::diameter::{d_estimate, dn_exact, fekete_heuristic, multiset_count};
use transfinite::energy::{continuum_energy_estimate, minimax_energies, rendezvous, wiener_energy};
use transfinite::fixtures::{fixture, FIXTURES};
use transfinite::numerics::parse_rational;
use transfinite::principles::max_principle_check;
use transfinite::report;
use transfinite::verify::{convergence_table, verify_chain, verify_equivalence, verify_frostman, verify_shift, SuiteReport};
use transfinite::{build_kernel, ArithmeticMode, Kernel, KernelSpec, Rational, Scalar, SolverOptions};

use crate::{Command, Degree, FixtureAction, Input, Mode, Quantity, Suite};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] transfinite::Error),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use transfinite::Error as E;
        match self {
            CliError::Core(E::Internal(_)) => 1,
            CliError::Core(E::BudgetExceeded { .. } | E::TooLarge { .. }) => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Runs one command; the returned code is 0 or 1 (failed suite).
pub fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Compute {
            quantity,
            input,
            degree,
            exact_only,
        } => {
            let job = Job::Compute {
                quantity,
                degree,
                exact_only,
            };
            dispatch(&input, &job)
        }
        Command::Verify {
            suite,
            input,
            n_max,
            shift,
        } => dispatch(&input, &Job::Verify { suite, n_max, shift }),
        Command::Converge { input, n_max, out } => dispatch(&input, &Job::Converge { n_max, out }),
        Command::Fixtures { action } => fixtures(action),
    }
}

enum Job {
    Compute {
        quantity: Quantity,
        degree: Degree,
        exact_only: bool,
    },
    Verify {
        suite: Suite,
        n_max: usize,
        shift: String,
    },
    Converge {
        n_max: usize,
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_spec(input: &Input) -> Result<KernelSpec> {
    match (&input.kernel, &input.fixture) {
        (Some(path), _) => Ok(KernelSpec::from_json(&read(path)?)?),
        (None, Some(name)) => Ok(fixture(name, input.fixture_size)?.spec),
        (None, None) => Err(CliError::Usage("one of --kernel or --fixture is required".into())),
    }
}

fn parse_subset(text: Option<&str>, size: usize) -> Result<Vec<usize>> {
    let Some(text) = text else {
        return Ok((0..size).collect());
    };
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("subset entry `{t}` is not an index")))
        })
        .collect()
}

/// Picks the arithmetic and runs the job in it.
fn dispatch(input: &Input, job: &Job) -> Result<u8> {
    let spec = load_spec(input)?;
    let auto = ArithmeticMode::auto(spec.point_count(), spec.is_closed_form());
    let exact = match input.mode {
        Some(Mode::Exact) => true,
        Some(Mode::Float) => false,
        None => auto == ArithmeticMode::ExactRational,
    };
    let mut opts = SolverOptions {
        seed: input.seed,
        ..SolverOptions::default()
    };
    if let Some(t) = input.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Usage(format!("tolerance {t} must be a nonnegative number")));
        }
        opts.tolerance = t;
    }
    if exact {
        run::<Rational>(&spec, input, job, &opts)
    } else {
        run::<f64>(&spec, input, job, &opts)
    }
}

fn run<T: Scalar>(spec: &KernelSpec, input: &Input, job: &Job, opts: &SolverOptions) -> Result<u8> {
    let k: Kernel<T> = build_kernel(spec)?;
    let subset = parse_subset(input.subset.as_deref(), k.len())?;
    match job {
        Job::Compute {
            quantity,
            degree,
            exact_only,
        } => {
            let report = compute(&k, &subset, *quantity, degree, *exact_only, opts)?;
            emit(&report);
            summarize(&report);
            Ok(0)
        }
        Job::Verify { suite, n_max, shift } => {
            let rep = match suite {
                Suite::Chain => verify_chain(&k, &subset, *n_max, opts)?,
                Suite::Frostman => verify_frostman(&k, &subset, opts)?,
                Suite::Shift => {
                    let c = parse_rational(shift)
                        .ok_or_else(|| CliError::Usage(format!("shift `{shift}` is not a number")))?;
                    verify_shift(&k, &subset, &T::from_rational(&c), *n_max, opts)?
                }
                Suite::Equivalence => {
                    if input.subset.is_some() {
                        return Err(CliError::Usage("the equivalence suite always runs on the whole space".into()));
                    }
                    verify_equivalence(&k, opts)?
                }
            };
            emit(&suite_json(&rep));
            eprint!("{}", rep.render());
            Ok(if rep.passed() { 0 } else { 1 })
        }
        Job::Converge { n_max, out } => {
            if *n_max < 2 {
                return Err(CliError::Usage("--n-max must be at least 2".into()));
            }
            let csv = convergence_table(&k, &subset, *n_max, opts)?;
            match out {
                Some(path) => {
                    write(path, &csv)?;
                    eprintln!("wrote {} rows to {}", n_max, path.display());
                }
                None => print!("{csv}"),
            }
            Ok(0)
        }
    }
}

fn compute<T: Scalar>(
    k: &Kernel<T>,
    subset: &[usize],
    quantity: Quantity,
    degree: &Degree,
    exact_only: bool,
    opts: &SolverOptions,
) -> Result<Value> {
    let size = subset.len();
    let check_budget = |n: usize| -> Result<()> {
        let candidates = multiset_count(size, n);
        if exact_only && candidates > u128::from(opts.budget) {
            return Err(transfinite::Error::BudgetExceeded {
                candidates,
                budget: opts.budget,
            }
            .into());
        }
        Ok(())
    };
    Ok(match quantity {
        Quantity::Dn => match (degree.n, degree.n_max) {
            (_, Some(n_max)) => {
                (2..=n_max).try_for_each(check_budget)?;
                report::trace_json("D", &d_estimate(k, subset, n_max, opts)?)
            }
            (n, None) => {
                let n = n.unwrap_or(2);
                check_budget(n)?;
                let s = match dn_exact(k, subset, n, opts) {
                    Err(transfinite::Error::BudgetExceeded { .. }) => fekete_heuristic(k, subset, n, opts.restarts, opts)?,
                    other => other?,
                };
                report::fekete_json(k, n, &s)
            }
        },
        Quantity::Mn => match (degree.n, degree.n_max) {
            (_, Some(n_max)) => {
                (1..=n_max).try_for_each(check_budget)?;
                report::trace_json("M", &m_estimate(k, subset, n_max, opts)?)
            }
            (n, None) => {
                let n = n.unwrap_or(1);
                check_budget(n)?;
                let s = match mn_exact(k, subset, n, opts) {
                    Err(transfinite::Error::BudgetExceeded { .. }) => mn_heuristic(k, subset, n, opts.restarts, opts)?,
                    other => other?,
                };
                report::chebyshev_json(k, n, &s)
            }
        },
        Quantity::W => {
            let r = wiener_energy(k, subset, opts)?;
            if exact_only && !r.certification.is_certified() {
                return Err(transfinite::Error::TooLarge {
                    what: "exact energy minimization",
                    size,
                    limit: opts.support_threshold,
                }
                .into());
            }
            let continuum = if k.origin().is_some() && size == k.len() {
                Some(continuum_energy_estimate(&k.to_float(), opts)?)
            } else {
                None
            };
            report::equilibrium_json(&r, continuum.as_ref())
        }
        Quantity::Uvq => report::minimax_json(&minimax_energies(k, subset, opts)?),
        Quantity::Rendezvous => report::rendezvous_json(&rendezvous(k, subset, opts)?),
        Quantity::Mp => {
            let (sub, _) = transfinite::restrict(k, subset)?;
            report::verdict_json(&sub, &max_principle_check(&sub, opts)?)
        }
    })
}

fn suite_json(rep: &SuiteReport) -> Value {
    let assertions: Vec<Value> = rep
        .assertions
        .iter()
        .map(|a| json!({"name": a.name, "passed": a.passed, "detail": a.detail}))
        .collect();
    json!({"suite": rep.suite, "passed": rep.passed(), "assertions": assertions})
}

fn emit(v: &Value) {
    println!("{}", serde_json::to_string(v).expect("reports serialize"));
}

fn summarize(v: &Value) {
    let text = |x: &Value| x.as_str().map_or_else(|| x.to_string(), str::to_owned);
    let name = v.get("quantity").map(text).unwrap_or_default();
    let cert = v.get("certification").map(text).unwrap_or_default();
    let fields: Vec<String> = ["value", "u", "v", "q", "holds"]
        .iter()
        .filter_map(|f| v.get(*f).map(|x| format!("{f}={}", text(x))))
        .collect();
    eprintln!("{name}: {} [{cert}]", fields.join(" "));
}

fn fixtures(action: FixtureAction) -> Result<u8> {
    match action {
        FixtureAction::List => {
            let mut rows = Vec::new();
            for &(name, size, description) in FIXTURES {
                let f = fixture(name, size)?;
                eprintln!("{name:<24}{:>6}  {description}", size.map_or("-".into(), |s| s.to_string()));
                rows.push(json!({
                    "name": name,
                    "default_size": size,
                    "description": description,
                    "expected": f.expected,
                }));
            }
            emit(&Value::Array(rows));
        }
        FixtureAction::Export { name, size, out } => {
            let f = fixture(&name, size)?;
            let text = f.spec.to_json() + "\n";
            match out {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(0)
}
