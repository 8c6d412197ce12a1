//! Thompson's-group-T specific data: the bundled generating set, the explicit
//! small-support family `remark_element`, and relation verification.
//!
//! The generating set lives in a data file rather than in code, validated at
//! load time (membership, inverse pairs, relations), so other subgroups of
//! PAff+(S^1) can be swapped in through the same interface.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{CirclePoint, Rational};
use crate::map::PiecewiseAffineCircleMap;

const DEFAULT_GENERATORS: &str = include_str!("../data/generators.json");
const DEFAULT_RELATIONS: &str = include_str!("../data/relations.json");

#[derive(Serialize, Deserialize)]
struct GeneratorWire {
    name: String,
    map: PiecewiseAffineCircleMap,
    inverse_name: String,
}

/// A named, inverse-closed generating set together with its relation list.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    names: Vec<String>,
    maps: Vec<PiecewiseAffineCircleMap>,
    inverse_of: Vec<usize>,
    index: HashMap<String, usize>,
    relations: Vec<Vec<String>>,
    /// Short description of where the data came from.
    pub provenance: String,
    /// True when every element lies in Thompson's group T.
    pub all_in_thompson_t: bool,
}

impl GeneratorSet {
    /// The bundled three-generator set for T (two interval generators plus a
    /// torsion element moving the whole circle) with inverses and verified
    /// relations.
    pub fn bundled() -> Result<Self> {
        Self::from_json(DEFAULT_GENERATORS, DEFAULT_RELATIONS, "bundled".into())
    }

    pub fn load(generators: &Path, relations: Option<&Path>) -> Result<Self> {
        let gen_text = std::fs::read_to_string(generators)?;
        let rel_text = match relations {
            Some(p) => std::fs::read_to_string(p)?,
            None => "[]".to_string(),
        };
        Self::from_json(&gen_text, &rel_text, generators.display().to_string())
    }

    pub fn from_json(generators: &str, relations: &str, provenance: String) -> Result<Self> {
        let wires: Vec<GeneratorWire> = serde_json::from_str(generators)?;
        let relations: Vec<Vec<String>> = serde_json::from_str(relations)?;
        if wires.is_empty() {
            return Err(Error::InvalidGeneratorSet("empty generator list".into()));
        }
        let mut index = HashMap::new();
        for (i, w) in wires.iter().enumerate() {
            if index.insert(w.name.clone(), i).is_some() {
                return Err(Error::InvalidGeneratorSet(format!(
                    "duplicate generator name {:?}",
                    w.name
                )));
            }
        }
        let mut inverse_of = Vec::with_capacity(wires.len());
        for w in &wires {
            let j = *index.get(&w.inverse_name).ok_or_else(|| {
                Error::InvalidGeneratorSet(format!(
                    "inverse {:?} of {:?} is not in the set",
                    w.inverse_name, w.name
                ))
            })?;
            inverse_of.push(j);
        }
        // closure under inverses must be symmetric
        for (i, &j) in inverse_of.iter().enumerate() {
            if inverse_of[j] != i {
                return Err(Error::InvalidGeneratorSet(format!(
                    "inverse pairing of {:?} is not symmetric",
                    wires[i].name
                )));
            }
        }
        let names: Vec<String> = wires.iter().map(|w| w.name.clone()).collect();
        let maps: Vec<PiecewiseAffineCircleMap> = wires.into_iter().map(|w| w.map).collect();
        // inverse entries must really invert
        for (i, &j) in inverse_of.iter().enumerate() {
            if !maps[i].compose(&maps[j]).is_identity() {
                return Err(Error::InvalidGeneratorSet(format!(
                    "{:?} composed with {:?} is not the identity",
                    names[i], names[j]
                )));
            }
        }
        let all_in_thompson_t = maps.iter().all(|m| m.is_in_thompson_t());
        let set = GeneratorSet {
            names,
            maps,
            inverse_of,
            index,
            relations,
            provenance,
            all_in_thompson_t,
        };
        for rel in &set.relations {
            if !set.verify_relation(rel)? {
                return Err(Error::InvalidGeneratorSet(format!(
                    "relation {:?} does not compose to the identity",
                    rel
                )));
            }
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn maps(&self) -> &[PiecewiseAffineCircleMap] {
        &self.maps
    }

    pub fn relations(&self) -> &[Vec<String>] {
        &self.relations
    }

    pub fn get(&self, name: &str) -> Result<&PiecewiseAffineCircleMap> {
        self.index
            .get(name)
            .map(|&i| &self.maps[i])
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn inverse_name(&self, name: &str) -> Result<&str> {
        let &i = self
            .index
            .get(name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        Ok(&self.names[self.inverse_of[i]])
    }

    /// Name lookup for a map that happens to be one of the generators.
    pub fn name_of(&self, map: &PiecewiseAffineCircleMap) -> Option<&str> {
        self.maps
            .iter()
            .position(|m| m == map)
            .map(|i| self.names[i].as_str())
    }

    /// Composes a word of generator names left to right as functions: the
    /// word [g, h] is the map x -> g(h(x)).
    pub fn compose_word(&self, word: &[String]) -> Result<PiecewiseAffineCircleMap> {
        let mut acc = PiecewiseAffineCircleMap::identity();
        for name in word {
            acc = acc.compose(self.get(name)?);
        }
        Ok(acc)
    }

    /// True iff the word composes exactly to the identity.
    pub fn verify_relation(&self, word: &[String]) -> Result<bool> {
        Ok(self.compose_word(word)?.is_identity())
    }

    /// Random word of the given length, avoiding immediate inverse pairs.
    pub fn random_word<R: Rng>(&self, rng: &mut R, len: usize) -> Vec<String> {
        let mut word: Vec<usize> = Vec::with_capacity(len);
        for _ in 0..len {
            loop {
                let i = rng.gen_range(0..self.maps.len());
                if let Some(&prev) = word.last() {
                    if self.inverse_of[prev] == i {
                        continue;
                    }
                }
                word.push(i);
                break;
            }
        }
        word.into_iter().map(|i| self.names[i].clone()).collect()
    }

    /// Random element given directly as a map.
    pub fn random_element<R: Rng>(&self, rng: &mut R, len: usize) -> PiecewiseAffineCircleMap {
        let word = self.random_word(rng, len);
        self.compose_word(&word).expect("names come from the set")
    }
}

/// The explicit element a_n: fixes y, has support of length 2^-n + 2^-2n and
/// derivative jump 2^n at y. Three affine branches:
///   y + 2^n (x - y)                   on [y, y + 2^-2n)
///   y + 2^-n - 2^-3n + 2^-n (x - y)   on [y + 2^-2n, y + 2^-2n + 2^-n)
///   x                                 elsewhere
pub fn remark_element(y: &CirclePoint, n: u32) -> Result<PiecewiseAffineCircleMap> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "remark element needs n >= 1".into(),
        ));
    }
    if !y.is_dyadic() {
        return Err(Error::NotDyadic(y.to_string()));
    }
    let n = i64::from(n);
    let b1 = y.add_rational(&Rational::pow2(-2 * n));
    let b2 = y.add_rational(&(Rational::pow2(-2 * n) + Rational::pow2(-n)));
    let raw = vec![
        crate::map::RawSegment {
            left: y.clone(),
            slope: Rational::pow2(n),
            value: y.clone(),
        },
        crate::map::RawSegment {
            left: b1,
            slope: Rational::pow2(-n),
            value: y.add_rational(&Rational::pow2(-n)),
        },
        crate::map::RawSegment {
            left: b2.clone(),
            slope: Rational::one(),
            value: b2,
        },
    ];
    PiecewiseAffineCircleMap::canonicalize(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::Support;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn y_half() -> CirclePoint {
        CirclePoint::from_ratio(1, 2).unwrap()
    }

    #[test]
    fn bundled_set_loads_and_validates() {
        let gens = GeneratorSet::bundled().unwrap();
        assert!(gens.all_in_thompson_t);
        assert!(gens.len() >= 6);
        for name in gens.names() {
            let g = gens.get(name).unwrap();
            assert!(g.is_in_thompson_t(), "{name} not in T");
            let inv = gens.inverse_name(name).unwrap().to_string();
            let gi = gens.get(&inv).unwrap();
            assert!(g.compose(gi).is_identity());
        }
        assert!(!gens.relations().is_empty());
    }

    #[test]
    fn torsion_element_has_order_three() {
        let gens = GeneratorSet::bundled().unwrap();
        let c = gens.get("C").unwrap();
        let c3 = c.compose(c).compose(c);
        assert!(c3.is_identity());
        assert!(!c.compose(c).is_identity());
    }

    #[test]
    fn relation_words() {
        let gens = GeneratorSet::bundled().unwrap();
        assert!(gens.verify_relation(&[]).unwrap());
        assert!(gens.verify_relation(&["A".into(), "A_inv".into()]).unwrap());
        assert!(!gens.verify_relation(&["A".into()]).unwrap());
        assert!(gens
            .verify_relation(&["B".into(), "A".into(), "A_inv".into(), "B_inv".into()])
            .unwrap());
        assert!(matches!(
            gens.verify_relation(&["nope".into()]),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn remark_element_matches_branches() {
        let a2 = remark_element(&y_half(), 2).unwrap();
        // fixes y
        assert_eq!(a2.evaluate(&y_half()), y_half());
        // first branch: a2(1/2 + 1/32) = 1/2 + 4/32 = 1/2 + 1/8
        let x = CirclePoint::from_ratio(17, 32).unwrap();
        assert_eq!(a2.evaluate(&x), CirclePoint::from_ratio(5, 8).unwrap());
        // branch boundary: both adjacent branches give 3/4 at 1/2 + 1/16
        let xb = CirclePoint::from_ratio(9, 16).unwrap();
        assert_eq!(a2.evaluate(&xb), CirclePoint::from_ratio(3, 4).unwrap());
        // derivative jump at y is 2^n
        assert_eq!(a2.derivative_jump_ratio(&y_half()), Rational::pow2(2));
        assert!(a2.is_in_thompson_t());
    }

    #[test]
    fn remark_element_support() {
        for n in 1..6 {
            let a = remark_element(&y_half(), n).unwrap();
            let sup = a.support();
            let arcs = sup.arcs();
            assert_eq!(arcs.len(), 1, "n={n}");
            let expect_len = Rational::pow2(-i64::from(n)) + Rational::pow2(-2 * i64::from(n));
            assert_eq!(arcs[0].length(), expect_len);
            assert!(arcs[0].contains(&y_half()));
            assert_eq!(arcs[0].left(), &y_half());
            // three breakpoints: y, y + 2^-2n, y + 2^-2n + 2^-n
            assert_eq!(a.breakpoints().len(), 3);
        }
        // support diameter strictly decreasing in n
        let mut prev: Option<Rational> = None;
        for n in 1..8 {
            let a = remark_element(&y_half(), n).unwrap();
            let len = match a.support() {
                Support::Arcs(arcs) => arcs[0].length(),
                other => panic!("unexpected support {other:?}"),
            };
            if let Some(p) = prev {
                assert!(len < p);
            }
            prev = Some(len);
        }
    }

    #[test]
    fn remark_element_rejects_bad_input() {
        assert!(matches!(
            remark_element(&y_half(), 0),
            Err(Error::InvalidParameter(_))
        ));
        let third = CirclePoint::from_ratio(1, 3).unwrap();
        assert!(matches!(
            remark_element(&third, 3),
            Err(Error::NotDyadic(_))
        ));
    }

    #[test]
    fn orbit_of_zero_is_dense() {
        // Proxy for minimality of the shipped action: the forward orbit of 0
        // under random words becomes 2^-7-dense.
        let gens = GeneratorSet::bundled().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut points: Vec<CirclePoint> = Vec::new();
        for _ in 0..10_000 {
            let len = rng.gen_range(0..=30);
            let w = gens.random_element(&mut rng, len);
            points.push(w.evaluate(&CirclePoint::zero()));
        }
        points.sort();
        points.dedup();
        let gap_bound = Rational::pow2(-7);
        let n = points.len();
        for i in 0..n {
            let next = &points[(i + 1) % n];
            let gap = next.offset_from(&points[i]);
            assert!(
                gap <= gap_bound,
                "orbit gap {} exceeds 2^-7 after {}",
                gap,
                points[i]
            );
        }
    }
}
