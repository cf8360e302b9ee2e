use std::collections::HashMap;

use crate::genseq::VectorWindow;
use crate::qarith::{in_span, in_span_mod_one, repr_value, Rational, Representation, SubgroupSpec};

/// Brute-force ground truth on `{-w..w}^w` over a fixed sequence.
///
/// Every vector is evaluated exactly; vectors whose support runs past the
/// end of the sequence have no value and take part in no relation.
#[derive(Debug, Clone)]
pub struct Census {
    window: VectorWindow,
    values: Vec<Option<Rational>>,
    classes: Vec<Option<u32>>,
    mod1_classes: Vec<Option<u32>>,
}

fn class_ids(values: &[Option<Rational>], key: impl Fn(&Rational) -> Rational) -> Vec<Option<u32>> {
    let mut ids: HashMap<Rational, u32> = HashMap::new();
    values
        .iter()
        .map(|v| {
            v.as_ref().map(|x| {
                let next = ids.len() as u32;
                *ids.entry(key(x)).or_insert(next)
            })
        })
        .collect()
}

/// Census of all representations of length at most `w` with entries in `[-w, w]`.
pub fn window_census(beta: &[Rational], w: usize) -> Census {
    let window = VectorWindow::new(w);
    let values: Vec<Option<Rational>> = window
        .vectors()
        .iter()
        .map(|v| {
            let len = v.support_len();
            (len <= beta.len())
                .then(|| repr_value(&Representation::new(v.entries()[..len].to_vec()), beta).expect("length checked"))
        })
        .collect();
    let classes = class_ids(&values, Rational::clone);
    let mod1_classes = class_ids(&values, Rational::mod_one);
    Census { window, values, classes, mod1_classes }
}

impl Census {
    pub fn window(&self) -> &VectorWindow {
        &self.window
    }

    pub fn bound(&self) -> usize {
        self.window.bound()
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn value(&self, i: usize) -> Option<&Rational> {
        self.values.get(i)?.as_ref()
    }

    /// Value of `sigma`, if it lies in the window.
    pub fn value_of(&self, sigma: &Representation) -> Option<&Rational> {
        self.value(self.window.index_of(sigma)?)
    }

    /// Class id under exact equality.
    pub fn class(&self, i: usize) -> Option<u32> {
        self.classes.get(i).copied().flatten()
    }

    /// Class id under equality modulo 1.
    pub fn mod1_class(&self, i: usize) -> Option<u32> {
        self.mod1_classes.get(i).copied().flatten()
    }

    pub fn equal(&self, i: usize, j: usize) -> Option<bool> {
        Some(self.class(i)? == self.class(j)?)
    }

    pub fn equal_mod1(&self, i: usize, j: usize) -> Option<bool> {
        Some(self.mod1_class(i)? == self.mod1_class(j)?)
    }

    /// Whether `sigma` and `tau` are in the window and have equal values.
    pub fn marks_equal(&self, sigma: &Representation, tau: &Representation) -> Option<bool> {
        self.equal(self.window.index_of(sigma)?, self.window.index_of(tau)?)
    }

    fn pairs(&self, keep: impl Fn(u32, u32) -> bool, classes: &[Option<u32>]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..classes.len() {
            let Some(a) = classes[i] else { continue };
            for (j, b) in classes.iter().enumerate().skip(i + 1) {
                if b.is_some_and(|b| keep(a, b)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Index pairs `i < j` with different values.
    pub fn neq_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs(|a, b| a != b, &self.classes)
    }

    /// Index pairs `i < j` with values equal modulo 1.
    pub fn eq_mod1_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs(|a, b| a == b, &self.mod1_classes)
    }

    /// Indices of vectors whose value lies in `<q/m>`.
    pub fn members(&self, spec: &SubgroupSpec) -> Vec<usize> {
        self.filter(|x| in_span(x, spec))
    }

    /// Indices of vectors whose value lies in `<q/m> + Z`.
    pub fn mod1_members(&self, spec: &SubgroupSpec) -> Vec<usize> {
        self.filter(|x| in_span_mod_one(x, spec))
    }

    /// Indices of valued vectors outside `<q/m>`.
    pub fn non_members(&self, spec: &SubgroupSpec) -> Vec<usize> {
        self.filter(|x| !in_span(x, spec))
    }

    fn filter(&self, pred: impl Fn(&Rational) -> bool) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| v.as_ref().is_some_and(&pred)).map(|(i, _)| i).collect()
    }
}
