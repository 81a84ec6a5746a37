//! Discrete probability measures, their potentials and energies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Entry, Kernel};
use crate::numerics::{ExtReal, Rational, Scalar, WEIGHT_DUST};

/// Probability weights over the points of a space, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T> {
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Validates nonnegativity and unit mass. In floating mode weights below
    /// `1e-12` are dropped and the rest renormalized.
    pub fn new(weights: Vec<T>, tol: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("no weights".into()));
        }
        let mut weights = weights;
        if !T::EXACT {
            for w in weights.iter_mut() {
                if w.to_f64() < WEIGHT_DUST && w.to_f64() > -tol.max(WEIGHT_DUST) {
                    *w = T::zero();
                }
            }
        }
        if let Some(i) = weights.iter().position(|w| *w < T::zero()) {
            return Err(Error::InvalidMeasure(format!(
                "weight {} at index {i} is negative",
                weights[i]
            )));
        }
        let total = weights.iter().fold(T::zero(), |a, w| a + w.clone());
        let ok = if T::EXACT {
            total == T::one()
        } else {
            (total.to_f64() - 1.0).abs() <= tol.max(1e-12)
        };
        if !ok {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        if !T::EXACT {
            for w in weights.iter_mut() {
                *w = w.clone() / total.clone();
            }
        }
        Ok(DiscreteMeasure { weights })
    }

    /// Unit mass at `index`.
    pub fn dirac(len: usize, index: usize) -> Self {
        let mut weights = vec![T::zero(); len];
        weights[index] = T::one();
        DiscreteMeasure { weights }
    }

    /// Equal weights on `indices` (a nonempty set of distinct indices).
    pub fn uniform_on(len: usize, indices: &[usize]) -> Self {
        let mut weights = vec![T::zero(); len];
        let share = T::one() / T::from_usize(indices.len());
        for &i in indices {
            weights[i] = share.clone();
        }
        DiscreteMeasure { weights }
    }

    /// Builds a measure on a space of `len` points from weights on `indices`.
    /// The weights are trusted to be a probability vector.
    pub(crate) fn lifted(len: usize, indices: &[usize], weights: &[T]) -> Self {
        let mut out = vec![T::zero(); len];
        for (&i, w) in indices.iter().zip(weights) {
            out[i] = w.clone();
        }
        DiscreteMeasure { weights: out }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &T {
        &self.weights[i]
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Permutes weights so that index `i` of the result is `perm[i]` here.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        DiscreteMeasure {
            weights: perm.iter().map(|&p| self.weights[p].clone()).collect(),
        }
    }

    fn check_space(&self, k: &Kernel<T>) -> Result<()> {
        if self.len() != k.len() {
            return Err(Error::SpaceMismatch {
                measure: self.len(),
                kernel: k.len(),
            });
        }
        Ok(())
    }
}

/// JSON measure literal: `{"weights": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureLiteral {
    pub weights: Vec<Entry>,
}

impl MeasureLiteral {
    pub fn to_measure<T: Scalar>(&self, tol: f64) -> Result<DiscreteMeasure<T>> {
        let weights = self
            .weights
            .iter()
            .map(|e| match e.parse()? {
                ExtReal::Finite(r) => Ok(T::from_rational(&r)),
                ExtReal::Infinite => Err(Error::InvalidMeasure("infinite weight".into())),
            })
            .collect::<Result<Vec<T>>>()?;
        DiscreteMeasure::new(weights, tol)
    }

    pub fn from_measure<T: Scalar>(mu: &DiscreteMeasure<T>) -> Self {
        MeasureLiteral {
            weights: mu
                .weights()
                .iter()
                .map(|w| match w.ratio_parts() {
                    Some((n, d)) => Entry::from_rational(&ExtReal::Finite(Rational::new(n, d))),
                    None => Entry::from_float(&ExtReal::Finite(w.to_f64())),
                })
                .collect(),
        }
    }
}

/// `U^mu` evaluated at every point of the space.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialVector<T>(pub Vec<ExtReal<T>>);

impl<T: Scalar> PotentialVector<T> {
    pub fn values(&self) -> &[ExtReal<T>] {
        &self.0
    }

    pub fn at(&self, i: usize) -> &ExtReal<T> {
        &self.0[i]
    }

    /// Largest value over `indices`.
    pub fn max_over(&self, indices: &[usize]) -> ExtReal<T> {
        indices
            .iter()
            .map(|&i| self.0[i].clone())
            .reduce(ExtReal::max_of)
            .unwrap_or_else(ExtReal::zero)
    }

    /// Smallest value over `indices`.
    pub fn min_over(&self, indices: &[usize]) -> ExtReal<T> {
        indices
            .iter()
            .map(|&i| self.0[i].clone())
            .reduce(ExtReal::min_of)
            .unwrap_or_else(ExtReal::zero)
    }
}

/// `U^mu(x) = sum_j mu_j k(x, j)`, summing over the support only.
pub fn potential<T: Scalar>(k: &Kernel<T>, mu: &DiscreteMeasure<T>) -> Result<PotentialVector<T>> {
    mu.check_space(k)?;
    let support = mu.support();
    Ok(PotentialVector(
        (0..k.len())
            .map(|i| {
                support
                    .iter()
                    .map(|&j| k.get(i, j).scaled(mu.weight(j)))
                    .sum()
            })
            .collect(),
    ))
}

/// `W(mu) = sum_{i,j} mu_i mu_j k(i, j)` over the support.
pub fn energy<T: Scalar>(k: &Kernel<T>, mu: &DiscreteMeasure<T>) -> Result<ExtReal<T>> {
    let u = potential(k, mu)?;
    Ok(mu.support().iter().map(|&i| u.at(i).scaled(mu.weight(i))).sum())
}

/// Which points a supremum of the potential ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Over {
    /// `U(mu)`: the whole space.
    AllPoints,
    /// `V(mu)`: the support of the measure.
    SupportOnly,
}

pub fn sup_potential<T: Scalar>(
    k: &Kernel<T>,
    mu: &DiscreteMeasure<T>,
    over: Over,
) -> Result<ExtReal<T>> {
    let u = potential(k, mu)?;
    Ok(match over {
        Over::AllPoints => u.max_over(&k.all_indices()),
        Over::SupportOnly => u.max_over(&mu.support()),
    })
}
