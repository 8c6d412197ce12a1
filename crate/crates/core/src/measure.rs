//! Finite-support step distributions with exact rational weights, and the
//! measure transformations used by the walk statistics: lazy mixture,
//! convolution powers, reflection.
//!
//! Weights stay exact through every transformation so that convolution powers
//! can feed exact entropy counting without rounding drift.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::map::PiecewiseAffineCircleMap;
use crate::thompson::GeneratorSet;

const DEFAULT_MEASURE: &str = include_str!("../data/measure.json");

/// One atom of a step distribution. The label is reporting metadata only;
/// equality of atoms is equality of the underlying canonical maps.
#[derive(Clone, Debug)]
pub struct Atom {
    pub map: Arc<PiecewiseAffineCircleMap>,
    pub weight: Rational,
    pub label: Option<String>,
}

/// Finite-support probability measure on group elements. Weights are
/// positive, sum exactly to 1, and atoms are pairwise distinct under
/// canonical equality.
#[derive(Clone, Debug)]
pub struct StepDistribution {
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct MeasureEntryWire {
    word: Vec<String>,
    weight: String,
}

impl StepDistribution {
    /// Builds a distribution, merging duplicate elements and validating the
    /// probability axioms exactly.
    pub fn new(entries: Vec<(PiecewiseAffineCircleMap, Rational)>) -> Result<Self> {
        Self::with_labels(
            entries
                .into_iter()
                .map(|(m, w)| (m, w, None))
                .collect::<Vec<_>>(),
        )
    }

    pub fn with_labels(
        entries: Vec<(PiecewiseAffineCircleMap, Rational, Option<String>)>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let mut merged: Vec<Atom> = Vec::new();
        let mut where_is: HashMap<PiecewiseAffineCircleMap, usize> = HashMap::new();
        for (map, weight, label) in entries {
            if !weight.is_positive() {
                return Err(Error::InvalidMeasure(format!(
                    "nonpositive weight {weight}"
                )));
            }
            match where_is.get(&map) {
                Some(&i) => {
                    merged[i].weight += weight;
                    if merged[i].label.is_none() {
                        merged[i].label = label;
                    }
                }
                None => {
                    where_is.insert(map.clone(), merged.len());
                    merged.push(Atom {
                        map: Arc::new(map),
                        weight,
                        label,
                    });
                }
            }
        }
        let mut total = Rational::zero();
        for a in &merged {
            total += a.weight.clone();
        }
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(StepDistribution { atoms: merged })
    }

    pub fn dirac(map: PiecewiseAffineCircleMap) -> Self {
        StepDistribution {
            atoms: vec![Atom {
                map: Arc::new(map),
                weight: Rational::one(),
                label: None,
            }],
        }
    }

    /// Uniform distribution over the generator set, labels from names.
    pub fn uniform_on(gens: &GeneratorSet) -> Result<Self> {
        let n = gens.len() as i64;
        let w = Rational::new(1, n)?;
        Self::with_labels(
            gens.names()
                .iter()
                .map(|name| {
                    (
                        gens.get(name).expect("own name").clone(),
                        w.clone(),
                        Some(name.clone()),
                    )
                })
                .collect(),
        )
    }

    /// Bundled default: uniform over the bundled generators.
    pub fn bundled(gens: &GeneratorSet) -> Result<Self> {
        Self::from_json(DEFAULT_MEASURE, gens)
    }

    /// Measure file: JSON array of {word, weight}; words are resolved through
    /// the active generator set (empty word = identity).
    pub fn from_json(text: &str, gens: &GeneratorSet) -> Result<Self> {
        let wires: Vec<MeasureEntryWire> = serde_json::from_str(text)?;
        let mut entries = Vec::with_capacity(wires.len());
        for wire in &wires {
            let map = gens.compose_word(&wire.word)?;
            let weight: Rational = wire.weight.parse()?;
            let label = if wire.word.is_empty() {
                Some("e".to_string())
            } else {
                Some(wire.word.join("."))
            };
            entries.push((map, weight, label));
        }
        Self::with_labels(entries)
    }

    pub fn load(path: &Path, gens: &GeneratorSet) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, gens)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// Exact weight of a group element (zero if absent).
    pub fn weight_of(&self, g: &PiecewiseAffineCircleMap) -> Rational {
        self.atoms
            .iter()
            .find(|a| a.map.as_ref() == g)
            .map(|a| a.weight.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, g: &PiecewiseAffineCircleMap) -> bool {
        self.atoms.iter().any(|a| a.map.as_ref() == g)
    }

    /// mu_lazy = 1/2 mu + 1/2 delta_e.
    pub fn lazify(&self) -> Self {
        let half = Rational::new(1, 2).expect("2 != 0");
        let mut entries: Vec<(PiecewiseAffineCircleMap, Rational, Option<String>)> = self
            .atoms
            .iter()
            .map(|a| (a.map.as_ref().clone(), &a.weight * &half, a.label.clone()))
            .collect();
        entries.push((
            PiecewiseAffineCircleMap::identity(),
            half,
            Some("e".to_string()),
        ));
        Self::with_labels(entries).expect("halving preserves the axioms")
    }

    /// Convex mixture (1 - t) self + t other; t in (0, 1).
    pub fn mix(&self, other: &StepDistribution, t: &Rational) -> Result<Self> {
        if !t.is_positive() || *t >= Rational::one() {
            return Err(Error::InvalidParameter(format!(
                "mixture weight {t} outside (0, 1)"
            )));
        }
        let s = Rational::one() - t.clone();
        let mut entries: Vec<(PiecewiseAffineCircleMap, Rational, Option<String>)> = Vec::new();
        for a in &self.atoms {
            entries.push((a.map.as_ref().clone(), &a.weight * &s, a.label.clone()));
        }
        for a in &other.atoms {
            entries.push((a.map.as_ref().clone(), &a.weight * t, a.label.clone()));
        }
        Self::with_labels(entries)
    }

    /// Convolution mu * nu: law of g h with g ~ mu, h ~ nu independent.
    /// Products are merged by canonical form.
    pub fn convolve(&self, other: &StepDistribution) -> Self {
        let mut acc: HashMap<PiecewiseAffineCircleMap, Rational> = HashMap::new();
        for a in &self.atoms {
            for b in &other.atoms {
                let prod = a.map.compose(&b.map);
                let w = &a.weight * &b.weight;
                match acc.get_mut(&prod) {
                    Some(entry) => *entry += w,
                    None => {
                        acc.insert(prod, w);
                    }
                }
            }
        }
        let entries: Vec<(PiecewiseAffineCircleMap, Rational)> = acc.into_iter().collect();
        Self::new(entries).expect("convolution preserves the axioms")
    }

    /// s-fold convolution power; s >= 1.
    pub fn power(&self, s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParameter(
                "convolution power needs s >= 1".into(),
            ));
        }
        let mut acc = self.clone();
        for _ in 1..s {
            acc = acc.convolve(self);
        }
        Ok(acc)
    }

    /// Reflected measure: weight of g moves to g^{-1}.
    pub fn reflect(&self) -> Self {
        let entries: Vec<(PiecewiseAffineCircleMap, Rational, Option<String>)> = self
            .atoms
            .iter()
            .map(|a| {
                (
                    a.map.invert(),
                    a.weight.clone(),
                    a.label.as_ref().map(|l| format!("{l}^-1")),
                )
            })
            .collect();
        Self::with_labels(entries).expect("reflection preserves the axioms")
    }

    /// Total breakpoint moment sum_g mu(g) |Br_g|; always finite here.
    pub fn breakpoint_moment(&self) -> Rational {
        let mut sum = Rational::zero();
        for a in &self.atoms {
            sum += &a.weight * &Rational::integer(a.map.breakpoint_count() as i64);
        }
        sum
    }

    /// Draws the index of an atom by inverse CDF against one uniform 64-bit
    /// draw compared exactly against the cumulative weights; the only bias is
    /// the 2^-64 grid of the draw itself (< 2^-63 per atom).
    pub fn sample_index<R: RngCore>(&self, rng: &mut R) -> usize {
        let u = rng.next_u64();
        // find the first atom with u < cum * 2^64, comparing exactly:
        // u * den < num * 2^64
        let scale = Rational::pow2(64);
        let u_q = Rational::integer(i128::from(u));
        let mut cum = Rational::zero();
        for (i, a) in self.atoms.iter().enumerate() {
            cum += a.weight.clone();
            if u_q < &cum * &scale {
                return i;
            }
        }
        self.atoms.len() - 1
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> &Atom {
        &self.atoms[self.sample_index(rng)]
    }
}
