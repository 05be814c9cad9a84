//! Finite abelian groups presented as products of cyclic groups.
//!
//! A group `Z_{d_1} x ... x Z_{d_k}` is stored exactly as given (no
//! invariant-factor normalization). Elements and characters share the
//! same mixed-radix encoding: the tuple `(a_1, ..., a_k)` has index
//! `a_1 + d_1 (a_2 + d_2 (a_3 + ...))`, so the first coordinate varies
//! fastest.
//! The character with coordinates `(t_1, ..., t_k)` maps `a` to
//! `exp(2 pi i sum_j t_j a_j / d_j)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest group accepted by [`GroupSpec::new`].
pub const DEFAULT_SIZE_CAP: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    orders: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

/// An element of a [`GroupSpec`], as a tuple of residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    coords: Vec<usize>,
}

/// A character of a [`GroupSpec`], encoded by the residues `(t_1, ..., t_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character {
    coords: Vec<usize>,
}

impl Element {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl Character {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl GroupSpec {
    pub fn new(orders: &[usize]) -> Result<Self> {
        Self::with_cap(orders, DEFAULT_SIZE_CAP)
    }

    /// Builds a group, rejecting any order below 2 and any size above `cap`.
    pub fn with_cap(orders: &[usize], cap: usize) -> Result<Self> {
        let mut size: u128 = 1;
        for &d in orders {
            if d < 2 {
                return Err(Error::InvalidOrder(d));
            }
            size = size.saturating_mul(d as u128);
            if size > cap as u128 {
                return Err(Error::GroupTooLarge { size, cap });
            }
        }
        let size = size as usize;
        let mut strides = Vec::with_capacity(orders.len());
        let mut stride = 1;
        for &d in orders {
            strides.push(stride);
            stride *= d;
        }
        Ok(Self {
            orders: orders.to_vec(),
            strides,
            size,
        })
    }

    /// Parses `"4,2,5"`-style specs; `"2^12"` expands to twelve factors of 2.
    pub fn parse_with_cap(spec: &str, cap: usize) -> Result<Self> {
        let err = |reason: String| Error::GroupSpecParse {
            spec: spec.to_string(),
            reason,
        };
        let trimmed = spec.trim();
        if trimmed.is_empty() || trimmed == "trivial" {
            return Self::with_cap(&[], cap);
        }
        let mut orders = Vec::new();
        for part in trimmed.split(',') {
            let part = part.trim();
            let (base, reps) = match part.split_once('^') {
                Some((b, e)) => {
                    let reps: usize = e
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("bad exponent in {part:?}")))?;
                    (b.trim(), reps)
                }
                None => (part, 1),
            };
            let d: usize = base
                .parse()
                .map_err(|_| err(format!("bad cyclic order {base:?}")))?;
            if reps > 64 {
                return Err(err(format!("exponent {reps} is too large")));
            }
            orders.extend(std::iter::repeat_n(d, reps));
        }
        Self::with_cap(&orders, cap)
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Number of elements `N`, which is also the number of characters.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn coords_of(&self, index: usize) -> Vec<usize> {
        self.orders
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| (index / s) % d)
            .collect()
    }

    fn index_unchecked(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(&a, &s)| a * s).sum()
    }

    fn check_coords(&self, coords: &[usize]) -> Result<()> {
        if coords.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: coords.len(),
            });
        }
        for (&a, &d) in coords.iter().zip(&self.orders) {
            if a >= d {
                return Err(Error::CoordinateOutOfRange { coord: a, order: d });
            }
        }
        Ok(())
    }

    pub fn element(&self, coords: &[usize]) -> Result<Element> {
        self.check_coords(coords)?;
        Ok(Element {
            coords: coords.to_vec(),
        })
    }

    /// Element with the given mixed-radix index.
    ///
    /// Panics if `index >= self.size()`.
    pub fn element_at(&self, index: usize) -> Element {
        assert!(index < self.size, "element index {index} out of range");
        Element {
            coords: self.coords_of(index),
        }
    }

    pub fn identity(&self) -> Element {
        Element {
            coords: vec![0; self.rank()],
        }
    }

    pub fn element_index(&self, a: &Element) -> Result<usize> {
        self.check_coords(&a.coords)?;
        Ok(self.index_unchecked(&a.coords))
    }

    pub fn character(&self, coords: &[usize]) -> Result<Character> {
        self.check_coords(coords)?;
        Ok(Character {
            coords: coords.to_vec(),
        })
    }

    /// Character with the given mixed-radix index.
    ///
    /// Panics if `index >= self.size()`.
    pub fn character_at(&self, index: usize) -> Character {
        assert!(index < self.size, "character index {index} out of range");
        Character {
            coords: self.coords_of(index),
        }
    }

    pub fn character_index(&self, chi: &Character) -> Result<usize> {
        self.check_coords(&chi.coords)?;
        Ok(self.index_unchecked(&chi.coords))
    }

    /// Group law: componentwise addition modulo the orders.
    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check_coords(&a.coords)?;
        self.check_coords(&b.coords)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.orders)
            .map(|((&x, &y), &d)| (x + y) % d)
            .collect();
        Ok(Element { coords })
    }

    pub fn inv(&self, a: &Element) -> Result<Element> {
        self.check_coords(&a.coords)?;
        let coords = a
            .coords
            .iter()
            .zip(&self.orders)
            .map(|(&x, &d)| (d - x) % d)
            .collect();
        Ok(Element { coords })
    }

    /// Group law on mixed-radix indices.
    pub fn mul_index(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides) {
            out += (((a / s) % d + (b / s) % d) % d) * s;
        }
        out
    }

    pub fn inv_index(&self, a: usize) -> usize {
        let mut out = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides) {
            out += ((d - (a / s) % d) % d) * s;
        }
        out
    }

    /// `a * b^{-1}` on indices.
    pub fn div_index(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides) {
            out += (((a / s) % d + d - (b / s) % d) % d) * s;
        }
        out
    }

    pub fn is_involution_index(&self, a: usize) -> bool {
        self.orders
            .iter()
            .zip(&self.strides)
            .all(|(&d, &s)| (2 * ((a / s) % d)).is_multiple_of(d))
    }

    /// `|{a : a^2 = 1}|`: each even factor contributes 2, each odd factor 1.
    pub fn involution_count(&self) -> usize {
        self.orders
            .iter()
            .map(|&d| if d % 2 == 0 { 2 } else { 1 })
            .product()
    }

    /// Fraction of elements that square to the identity.
    pub fn p2(&self) -> Ratio<u64> {
        Ratio::new(self.involution_count() as u64, self.size as u64)
    }

    /// The subgroup `{a : a^2 = 1}` as a sorted list of element indices.
    ///
    /// Each coordinate contributes `{0}` (odd order) or `{0, d/2}` (even).
    pub fn involutions(&self) -> Vec<usize> {
        let mut out = vec![0usize];
        for (&d, &s) in self.orders.iter().zip(&self.strides) {
            if d % 2 == 0 {
                let shift = (d / 2) * s;
                let extra: Vec<usize> = out.iter().map(|&x| x + shift).collect();
                out.extend(extra);
            }
        }
        out.sort_unstable();
        out
    }

    /// Numerator of the phase `sum_j t_j a_j / d_j` reduced mod 1, over
    /// the common denominator `N`.
    pub fn phase_index(&self, chi: usize, a: usize) -> u64 {
        let n = self.size as u128;
        let mut num: u128 = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides) {
            let t = ((chi / s) % d) as u128;
            let x = ((a / s) % d) as u128;
            num = (num + (t * x % d as u128) * (n / d as u128)) % n;
        }
        num as u64
    }

    pub fn char_value_index(&self, chi: usize, a: usize) -> Complex64 {
        unit_root(self.phase_index(chi, a), self.size as u64)
    }

    pub fn char_value(&self, chi: &Character, a: &Element) -> Result<Complex64> {
        let t = self.character_index(chi)?;
        let x = self.element_index(a)?;
        Ok(self.char_value_index(t, x))
    }

    /// True iff `chi` equals its conjugate, i.e. `2 t_j = 0 mod d_j` for all `j`.
    pub fn is_real_character(&self, chi: &Character) -> Result<bool> {
        self.check_coords(&chi.coords)?;
        Ok(chi
            .coords
            .iter()
            .zip(&self.orders)
            .all(|(&t, &d)| (2 * t) % d == 0))
    }

    pub fn is_real_character_index(&self, chi: usize) -> bool {
        // Same arithmetic as for involutions: the dual uses the same encoding.
        self.is_involution_index(chi)
    }

    pub fn real_character_count(&self) -> usize {
        (0..self.size)
            .filter(|&t| self.is_real_character_index(t))
            .count()
    }

    /// Index of the conjugate character `chi-bar`.
    pub fn conjugate_character_index(&self, chi: usize) -> usize {
        self.inv_index(chi)
    }

    /// Closure of `gens` under the group law, as sorted element indices.
    pub fn subgroup_closure(&self, gens: &[Element]) -> Result<Vec<usize>> {
        let gens: Vec<usize> = gens
            .iter()
            .map(|g| self.element_index(g))
            .collect::<Result<_>>()?;
        let mut seen = BTreeSet::from([0usize]);
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = self.mul_index(x, g);
                if seen.insert(y) {
                    if seen.len() > self.size {
                        return Err(Error::SizeCapExceeded {
                            size: seen.len(),
                            cap: self.size,
                        });
                    }
                    frontier.push(y);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Values of `chi` on the subgroup generated by `gens`.
    pub fn restrict_character(
        &self,
        chi: &Character,
        gens: &[Element],
    ) -> Result<RestrictedCharacter> {
        let t = self.character_index(chi)?;
        let elements = self.subgroup_closure(gens)?;
        Ok(self.restrict_to(t, &elements))
    }

    /// Restriction of character `chi` to an explicit (sorted) subgroup.
    pub fn restrict_to(&self, chi: usize, subgroup: &[usize]) -> RestrictedCharacter {
        let phases: Vec<u64> = subgroup.iter().map(|&a| self.phase_index(chi, a)).collect();
        let n = self.size as u64;
        RestrictedCharacter {
            elements: subgroup.to_vec(),
            values: phases.iter().map(|&p| unit_root(p, n)).collect(),
            phases,
        }
    }

    /// Groups all characters by their restriction to `subgroup`, keyed by
    /// the exact phase table.
    pub fn characters_by_restriction(&self, subgroup: &[usize]) -> BTreeMap<Vec<u64>, Vec<usize>> {
        let mut classes: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
        for t in 0..self.size {
            let key = subgroup.iter().map(|&a| self.phase_index(t, a)).collect();
            classes.entry(key).or_default().push(t);
        }
        classes
    }

    /// Whether two characters agree on the involution subgroup.
    pub fn same_restriction_to_involutions(&self, chi1: usize, chi2: usize) -> bool {
        // chi is determined on A = {a : 2a = 0} by t_j mod 2 for even d_j.
        self.orders
            .iter()
            .zip(&self.strides)
            .filter(|(&d, _)| d % 2 == 0)
            .all(|(&d, &s)| ((chi1 / s) % d) % 2 == ((chi2 / s) % d) % 2)
    }
}

/// `exp(2 pi i num / den)`, exact at multiples of a quarter turn.
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if (4 * num as u128).is_multiple_of(den as u128) {
        return match (4 * num as u128 / den as u128) as u8 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = std::f64::consts::TAU * (num as f64 / den as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// A character restricted to a subgroup.
#[derive(Clone, Debug)]
pub struct RestrictedCharacter {
    pub elements: Vec<usize>,
    /// Exact phase numerators over the ambient group size.
    pub phases: Vec<u64>,
    pub values: Vec<Complex64>,
}

impl PartialEq for RestrictedCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements && self.phases == other.phases
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orders.is_empty() {
            return f.write_str("trivial");
        }
        let parts: Vec<String> = self.orders.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_cap(s, DEFAULT_SIZE_CAP)
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
