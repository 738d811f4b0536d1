//! The six-dimensional quadratic space over F₂ attached to eight points.
//!
//! `V` is the space of even-weight vectors of F₂⁸ modulo the all-ones vector,
//! with `q(v) = (weight/2) mod 2`. Coordinates are taken in the basis
//! `class(e_j + e_{j+1})`, `j = 1..6`, which is where the mod-2 reduction of the
//! lattice lands. Permutations act on `{1..8}` from the right, so `j(στ) = (jσ)τ`
//! and the matrix of `στ` is `M(σ)·M(τ)` acting on row vectors.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use once_cell::sync::Lazy;
use serde::{Serialize, Serializer};

/// Class of an even-weight vector of F₂⁸ modulo `(1,…,1)`.
///
/// Bit `k` of the representative is the coefficient of `e_{k+1}`. The stored
/// representative always has bit 0 clear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct F2Class(u8);

impl F2Class {
    pub const ZERO: F2Class = F2Class(0);

    /// Build from any even-weight bit vector; odd weight is rejected.
    pub fn from_bits(bits: u8) -> Option<Self> {
        if bits.count_ones() % 2 == 1 {
            return None;
        }
        Some(Self::canonical(bits))
    }

    /// Class of `e_{i_1} + … + e_{i_k}` (1-based indices; repeats cancel).
    pub fn from_indices(idx: &[usize]) -> Option<Self> {
        let mut bits = 0u8;
        for &i in idx {
            assert!((1..=8).contains(&i), "point index {i} out of range");
            bits ^= 1 << (i - 1);
        }
        Self::from_bits(bits)
    }

    fn canonical(bits: u8) -> Self {
        if bits & 1 == 1 {
            F2Class(!bits)
        } else {
            F2Class(bits)
        }
    }

    pub fn rep(self) -> u8 {
        self.0
    }

    /// The other element of the coset.
    pub fn complement_rep(self) -> u8 {
        !self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn add(self, other: Self) -> Self {
        Self::canonical(self.0 ^ other.0)
    }

    /// Coordinates in the basis `class(e_j + e_{j+1})`, bit `j-1` for `j = 1..6`.
    pub fn coords(self) -> u8 {
        // pick the representative with e_8 absent; it is a sum of the basis vectors
        let v = if self.0 & 0x80 != 0 { !self.0 } else { self.0 };
        let mut c = 0u8;
        let mut run = 0u8;
        for j in 0..6 {
            run ^= (v >> j) & 1;
            c |= run << j;
        }
        c
    }

    pub fn from_coords(c: u8) -> Self {
        let mut bits = 0u8;
        for j in 0..6 {
            if (c >> j) & 1 == 1 {
                bits ^= 0b11 << j;
            }
        }
        Self::canonical(bits)
    }

    /// Image under a permutation acting on the right: `e_j ↦ e_{jσ}`.
    pub fn permute(self, sigma: &Perm) -> Self {
        let mut bits = 0u8;
        for j in 0..8 {
            if (self.0 >> j) & 1 == 1 {
                bits |= 1 << sigma.0[j];
            }
        }
        Self::canonical(bits)
    }

    pub fn all() -> impl Iterator<Item = F2Class> {
        (0u8..64).map(F2Class::from_coords)
    }
}

impl fmt::Display for F2Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..8 {
            write!(f, "{}", (self.0 >> j) & 1)?;
        }
        Ok(())
    }
}

/// Half the Hamming weight, mod 2.
pub fn quadratic_form(v: F2Class) -> u8 {
    ((v.0.count_ones() / 2) % 2) as u8
}

/// Value of `q` on an arbitrary even-weight representative.
pub fn quadratic_form_of_rep(bits: u8) -> u8 {
    debug_assert_eq!(bits.count_ones() % 2, 0);
    ((bits.count_ones() / 2) % 2) as u8
}

/// Polar form `b(u,v) = q(u+v) + q(u) + q(v)`.
pub fn polar(u: F2Class, v: F2Class) -> u8 {
    quadratic_form(u.add(v)) ^ quadratic_form(u) ^ quadratic_form(v)
}

/// A permutation of `{1..8}` stored 0-based: `self.0[j]` is the image of `j+1`, minus one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(pub [u8; 8]);

impl Perm {
    pub const IDENTITY: Perm = Perm([0, 1, 2, 3, 4, 5, 6, 7]);

    /// From 1-based images `[1σ, …, 8σ]`.
    pub fn from_images(images: [u8; 8]) -> Option<Self> {
        let mut seen = 0u8;
        let mut p = [0u8; 8];
        for (j, &im) in images.iter().enumerate() {
            if !(1..=8).contains(&im) || seen & (1 << (im - 1)) != 0 {
                return None;
            }
            seen |= 1 << (im - 1);
            p[j] = im - 1;
        }
        Some(Perm(p))
    }

    /// Transposition of two 1-based points.
    pub fn transposition(a: usize, b: usize) -> Self {
        let mut p = Self::IDENTITY;
        p.0.swap(a - 1, b - 1);
        p
    }

    /// Image of the 1-based point `j`.
    pub fn apply(&self, j: usize) -> usize {
        self.0[j - 1] as usize + 1
    }

    /// `self` followed by `other`: `j(στ) = (jσ)τ`.
    pub fn then(&self, other: &Perm) -> Perm {
        let mut p = [0u8; 8];
        for j in 0..8 {
            p[j] = other.0[self.0[j] as usize];
        }
        Perm(p)
    }

    pub fn inverse(&self) -> Perm {
        let mut p = [0u8; 8];
        for j in 0..8 {
            p[self.0[j] as usize] = j as u8;
        }
        Perm(p)
    }

    /// +1 or −1.
    pub fn sign(&self) -> i32 {
        let mut inv = 0;
        for i in 0..8 {
            for j in i + 1..8 {
                if self.0[i] > self.0[j] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn all() -> Vec<Perm> {
        let mut out = Vec::with_capacity(40320);
        let mut a = [0u8, 1, 2, 3, 4, 5, 6, 7];
        heap_permute(&mut a, 8, &mut out);
        out.sort();
        out
    }
}

fn heap_permute(a: &mut [u8; 8], k: usize, out: &mut Vec<Perm>) {
    if k == 1 {
        out.push(Perm(*a));
        return;
    }
    heap_permute(a, k - 1, out);
    for i in 0..k - 1 {
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
        heap_permute(a, k - 1, out);
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..8 {
            write!(f, "{}", self.0[j] + 1)?;
        }
        Ok(())
    }
}

/// A 6×6 matrix over F₂ acting on coordinate row vectors; row `j` is the image of basis vector `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrthogonalMap(pub [u8; 6]);

impl OrthogonalMap {
    pub const IDENTITY: OrthogonalMap = OrthogonalMap([1, 2, 4, 8, 16, 32]);

    /// `v·M` on coordinates.
    pub fn apply_coords(&self, c: u8) -> u8 {
        let mut out = 0u8;
        for j in 0..6 {
            if (c >> j) & 1 == 1 {
                out ^= self.0[j];
            }
        }
        out
    }

    pub fn apply(&self, v: F2Class) -> F2Class {
        F2Class::from_coords(self.apply_coords(v.coords()))
    }

    /// Matrix of "first `self`, then `other`".
    pub fn mul(&self, other: &OrthogonalMap) -> OrthogonalMap {
        let mut rows = [0u8; 6];
        for j in 0..6 {
            rows[j] = other.apply_coords(self.0[j]);
        }
        OrthogonalMap(rows)
    }

    pub fn preserves_q(&self) -> bool {
        F2Class::all().all(|v| quadratic_form(self.apply(v)) == quadratic_form(v))
    }

    pub fn is_invertible(&self) -> bool {
        let images: BTreeSet<u8> = (0u8..64).map(|c| self.apply_coords(c)).collect();
        images.len() == 64
    }
}

/// Matrix of `e_j ↦ e_{jσ}` in the basis `class(e_j + e_{j+1})`.
pub fn perm_to_orthogonal(sigma: &Perm) -> OrthogonalMap {
    let mut rows = [0u8; 6];
    for j in 0..6 {
        let b = (1u8 << sigma.0[j]) | (1u8 << sigma.0[j + 1]);
        rows[j] = F2Class::canonical(b).coords();
    }
    OrthogonalMap(rows)
}

static ORTHOGONAL_TO_PERM: Lazy<HashMap<OrthogonalMap, Perm>> = Lazy::new(|| {
    Perm::all()
        .into_iter()
        .map(|p| (perm_to_orthogonal(&p), p))
        .collect()
});

/// Inverse of [`perm_to_orthogonal`]; `None` if the map is not in the image.
pub fn orthogonal_to_perm(m: &OrthogonalMap) -> Option<Perm> {
    ORTHOGONAL_TO_PERM.get(m).copied()
}

/// Every linear map of `V` preserving `q`, found by choosing basis images one at a
/// time subject to `q` and the polar form.
pub fn all_isometries() -> Vec<OrthogonalMap> {
    let basis: Vec<F2Class> = (0..6).map(|j| F2Class::from_coords(1 << j)).collect();
    let mut out = Vec::new();
    let mut rows = [0u8; 6];
    fn rec(i: usize, basis: &[F2Class], rows: &mut [u8; 6], out: &mut Vec<OrthogonalMap>) {
        if i == 6 {
            out.push(OrthogonalMap(*rows));
            return;
        }
        for c in 1u8..64 {
            let v = F2Class::from_coords(c);
            if quadratic_form(v) != quadratic_form(basis[i]) {
                continue;
            }
            if (0..i).all(|k| polar(F2Class::from_coords(rows[k]), v) == polar(basis[k], basis[i])) {
                rows[i] = c;
                rec(i + 1, basis, rows, out);
            }
        }
    }
    rec(0, &basis, &mut rows, &mut out);
    out
}

/// A split of `{1..8}` into four unordered pairs, stored 1-based and canonically ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition2222 {
    pairs: [(u8, u8); 4],
}

impl Partition2222 {
    pub fn new(pairs: [(u8, u8); 4]) -> Option<Self> {
        let mut seen = 0u8;
        let mut ps = pairs;
        for p in ps.iter_mut() {
            for x in [p.0, p.1] {
                if !(1..=8).contains(&x) || seen & (1 << (x - 1)) != 0 {
                    return None;
                }
                seen |= 1 << (x - 1);
            }
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        ps.sort();
        Some(Self { pairs: ps })
    }

    /// `{{1,2},{3,4},{5,6},{7,8}}`.
    pub fn base() -> Self {
        Self { pairs: [(1, 2), (3, 4), (5, 6), (7, 8)] }
    }

    pub fn pairs(&self) -> [(u8, u8); 4] {
        self.pairs
    }

    /// Right action `r·σ = {{aσ, bσ}}`.
    pub fn act(&self, sigma: &Perm) -> Self {
        let mut ps = self.pairs;
        for p in ps.iter_mut() {
            *p = (sigma.apply(p.0 as usize) as u8, sigma.apply(p.1 as usize) as u8);
        }
        Self::new(ps).expect("permutation image of a partition is a partition")
    }

    /// Number of crossing pairs of chords when the points sit in order on a line.
    pub fn crossings(&self) -> u32 {
        let mut n = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                let (a, b) = self.pairs[i];
                let (c, d) = self.pairs[j];
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn parse(s: &str) -> Option<Self> {
        let mut pairs = [(0u8, 0u8); 4];
        let parts: Vec<&str> = s.split('.').collect();
        if parts.len() != 4 {
            return None;
        }
        for (k, p) in parts.iter().enumerate() {
            let d: Vec<u8> = p.chars().map(|c| c.to_digit(10).map(|x| x as u8)).collect::<Option<_>>()?;
            if d.len() != 2 {
                return None;
            }
            pairs[k] = (d[0], d[1]);
        }
        Self::new(pairs)
    }
}

impl fmt::Display for Partition2222 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.pairs.iter().map(|(a, b)| format!("{a}{b}")).collect();
        write!(f, "{}", s.join("."))
    }
}

impl Serialize for Partition2222 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A split of `{1..8}` into two 4-sets; the first half contains 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition44 {
    halves: [[u8; 4]; 2],
}

impl Partition44 {
    /// From the half containing... any half; the complement is filled in.
    pub fn from_half(half: [u8; 4]) -> Option<Self> {
        let mut mask = 0u8;
        for &x in &half {
            if !(1..=8).contains(&x) || mask & (1 << (x - 1)) != 0 {
                return None;
            }
            mask |= 1 << (x - 1);
        }
        if mask & 1 == 0 {
            mask = !mask;
        }
        let a: Vec<u8> = (1..=8u8).filter(|x| mask & (1 << (x - 1)) != 0).collect();
        let b: Vec<u8> = (1..=8u8).filter(|x| mask & (1 << (x - 1)) == 0).collect();
        Some(Self { halves: [a.try_into().ok()?, b.try_into().ok()?] })
    }

    pub fn halves(&self) -> [[u8; 4]; 2] {
        self.halves
    }

    /// `class(e_{s_1} + … + e_{s_4})`.
    pub fn class(&self) -> F2Class {
        let idx: Vec<usize> = self.halves[0].iter().map(|&x| x as usize).collect();
        F2Class::from_indices(&idx).expect("weight 4 is even")
    }
}

impl fmt::Display for Partition44 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h: Vec<String> = self
            .halves
            .iter()
            .map(|h| h.iter().map(|x| x.to_string()).collect::<String>())
            .collect();
        write!(f, "{}", h.join("."))
    }
}

impl Serialize for Partition44 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Pairs,
    Halves,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Partition {
    Pairs(Partition2222),
    Halves(Partition44),
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Partition::Pairs(p) => p.fmt(f),
            Partition::Halves(p) => p.fmt(f),
        }
    }
}

pub fn enumerate_pairings() -> Vec<Partition2222> {
    fn rec(rest: &mut Vec<u8>, acc: &mut Vec<(u8, u8)>, out: &mut Vec<Partition2222>) {
        if rest.is_empty() {
            out.push(Partition2222::new(acc.as_slice().try_into().unwrap()).unwrap());
            return;
        }
        let a = rest.remove(0);
        for i in 0..rest.len() {
            let b = rest.remove(i);
            acc.push((a, b));
            rec(rest, acc, out);
            acc.pop();
            rest.insert(i, b);
        }
        rest.insert(0, a);
    }
    let mut out = Vec::new();
    rec(&mut (1..=8).collect(), &mut Vec::new(), &mut out);
    out.sort();
    out
}

pub fn enumerate_splits() -> Vec<Partition44> {
    let mut out = Vec::new();
    for mask in 0u16..256 {
        if mask.count_ones() == 4 && mask & 1 == 1 {
            let half: Vec<u8> = (1..=8u8).filter(|x| mask & (1 << (x - 1)) != 0).collect();
            out.push(Partition44::from_half(half.try_into().unwrap()).unwrap());
        }
    }
    out.sort();
    out
}

pub fn enumerate_partitions(shape: Shape) -> Vec<Partition> {
    match shape {
        Shape::Pairs => enumerate_pairings().into_iter().map(Partition::Pairs).collect(),
        Shape::Halves => enumerate_splits().into_iter().map(Partition::Halves).collect(),
    }
}

/// Basis of `V_I = ⟨class(e_a + e_b) : {a,b} ∈ I⟩`, obtained by row reduction.
pub fn partition_subspace(i: &Partition2222) -> Vec<F2Class> {
    let gens: Vec<u8> = i
        .pairs()
        .iter()
        .map(|&(a, b)| F2Class::from_indices(&[a as usize, b as usize]).unwrap().coords())
        .collect();
    reduce_basis(&gens).into_iter().map(F2Class::from_coords).collect()
}

/// Echelon basis of the span of coordinate vectors.
pub fn reduce_basis(gens: &[u8]) -> Vec<u8> {
    let mut basis: Vec<u8> = Vec::new();
    for &g in gens {
        let mut v = g;
        for &b in &basis {
            let lead = 7 - b.leading_zeros() as u8;
            if (v >> lead) & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            let lead = 7 - v.leading_zeros() as u8;
            for b in basis.iter_mut() {
                if (*b >> lead) & 1 == 1 {
                    *b ^= v;
                }
            }
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

/// All elements of the span of a set of classes.
pub fn span(basis: &[F2Class]) -> BTreeSet<F2Class> {
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << basis.len()) {
        let mut v = F2Class::ZERO;
        for (k, b) in basis.iter().enumerate() {
            if (mask >> k) & 1 == 1 {
                v = v.add(*b);
            }
        }
        out.insert(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_examples() {
        assert_eq!(quadratic_form(F2Class::from_indices(&[1, 2]).unwrap()), 1);
        assert_eq!(quadratic_form(F2Class::from_indices(&[1, 2, 3, 4]).unwrap()), 0);
        assert_eq!(quadratic_form(F2Class::ZERO), 0);
    }

    #[test]
    fn q_is_well_defined_on_both_representatives() {
        for bits in 0u8..=255 {
            if bits.count_ones() % 2 == 0 {
                assert_eq!(quadratic_form_of_rep(bits), quadratic_form_of_rep(!bits));
                let c = F2Class::from_bits(bits).unwrap();
                assert_eq!(quadratic_form(c), quadratic_form_of_rep(bits));
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        for c in 0u8..64 {
            assert_eq!(F2Class::from_coords(c).coords(), c);
        }
        assert_eq!(F2Class::from_indices(&[3, 4]).unwrap().coords(), 0b100);
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_pairings().len(), 105);
        assert_eq!(enumerate_splits().len(), 35);
        assert!(enumerate_pairings().contains(&Partition2222::base()));
        let singular = F2Class::all().filter(|v| !v.is_zero() && quadratic_form(*v) == 0).count();
        assert_eq!(singular, 35);
    }

    #[test]
    fn splits_biject_onto_singular_vectors() {
        let img: BTreeSet<F2Class> = enumerate_splits().iter().map(|s| s.class()).collect();
        assert_eq!(img.len(), 35);
        assert!(img.iter().all(|v| !v.is_zero() && quadratic_form(*v) == 0));
    }

    #[test]
    fn subspaces_are_distinct_and_three_dimensional() {
        let mut seen = BTreeSet::new();
        for i in enumerate_pairings() {
            let b = partition_subspace(&i);
            assert_eq!(b.len(), 3);
            let s = span(&b);
            assert!(s.iter().any(|v| quadratic_form(*v) == 1));
            seen.insert(s);
        }
        assert_eq!(seen.len(), 105);
    }

    #[test]
    fn transposition_fixes_its_own_root_class() {
        let m = perm_to_orthogonal(&Perm::transposition(1, 2));
        let root = F2Class::from_indices(&[1, 2]).unwrap();
        assert_eq!(m.apply(root), root);
        assert_eq!(perm_to_orthogonal(&Perm::IDENTITY), OrthogonalMap::IDENTITY);
    }

    #[test]
    fn all_permutations_give_distinct_isometries() {
        let perms = Perm::all();
        assert_eq!(perms.len(), 40320);
        let maps: BTreeSet<OrthogonalMap> = perms.iter().map(perm_to_orthogonal).collect();
        assert_eq!(maps.len(), 40320);
        assert!(maps.iter().take(200).all(|m| m.preserves_q() && m.is_invertible()));
        let iso: BTreeSet<OrthogonalMap> = all_isometries().into_iter().collect();
        assert_eq!(iso, maps);
    }

    #[test]
    fn partition_strings() {
        let r = Partition2222::base();
        assert_eq!(r.to_string(), "12.34.56.78");
        assert_eq!(Partition2222::parse("12.34.56.78"), Some(r));
        let r26 = r.act(&Perm::transposition(2, 6));
        assert_eq!(r26.to_string(), "16.25.34.78");
    }

    #[test]
    fn crossing_count() {
        assert_eq!(Partition2222::base().crossings(), 0);
        assert_eq!(Partition2222::parse("15.26.34.78").unwrap().crossings(), 1);
        assert_eq!(Partition2222::parse("15.26.37.48").unwrap().crossings(), 6);
    }
}
