//! Per-n sequences of `D_n` or `M_n` with their certification.

use crate::numerics::{Certification, ExtReal, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry<T> {
    pub n: usize,
    pub value: ExtReal<T>,
    pub certification: Certification,
    /// Sorted point indices of the optimizing multiset.
    pub witness: Vec<usize>,
}

impl<T> TraceEntry<T> {
    /// `exact` for certified entries, the bound direction otherwise.
    pub fn status(&self) -> &'static str {
        if self.certification.is_certified() {
            "exact"
        } else {
            self.certification.as_str()
        }
    }
}

/// Values for consecutive n, and the largest certified one.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace<T> {
    pub entries: Vec<TraceEntry<T>>,
    /// Max of the certified entries; `None` when there are none.
    pub running_sup: Option<ExtReal<T>>,
}

impl<T: Scalar> Trace<T> {
    pub(crate) fn new(entries: Vec<TraceEntry<T>>) -> Self {
        let running_sup = entries
            .iter()
            .filter(|e| e.certification.is_certified())
            .map(|e| e.value.clone())
            .reduce(ExtReal::max_of);
        Trace {
            entries,
            running_sup,
        }
    }

    pub fn get(&self, n: usize) -> Option<&TraceEntry<T>> {
        self.entries.iter().find(|e| e.n == n)
    }

    pub fn exact_entries(&self) -> impl Iterator<Item = &TraceEntry<T>> {
        self.entries.iter().filter(|e| e.certification.is_certified())
    }

    /// CSV with columns `n,value,status`; `+inf` is written `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value,status\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.n, e.value.to_f64_string(), e.status()));
        }
        out
    }
}

impl<T: Scalar> ExtReal<T> {
    /// Float rendering used in CSV and JSON: shortest round-trip form, `inf`
    /// for `+inf`.
    pub fn to_f64_string(&self) -> String {
        match self {
            ExtReal::Infinite => "inf".into(),
            ExtReal::Finite(v) => format!("{}", v.to_f64()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_sup_ignores_heuristic_entries() {
        let e = |n, v: f64, c| TraceEntry {
            n,
            value: ExtReal::Finite(v),
            certification: c,
            witness: vec![],
        };
        let t = Trace::new(vec![
            e(2, 0.0, Certification::FloatCertified),
            e(3, 0.5, Certification::FloatCertified),
            e(4, 0.9, Certification::HeuristicUpperBound),
        ]);
        assert_eq!(t.running_sup, Some(ExtReal::Finite(0.5)));
        assert_eq!(
            t.to_csv(),
            "n,value,status\n2,0,exact\n3,0.5,exact\n4,0.9,heuristic-upper-bound\n"
        );
        let empty: Trace<f64> = Trace::new(vec![e(2, 1.0, Certification::HeuristicLowerBound)]);
        assert_eq!(empty.running_sup, None);
    }
}
