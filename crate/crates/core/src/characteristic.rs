//! Rational theta characteristics `m = (m′, m″)`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::exact::{frac, q, q_to_f64, qf, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic {
    m: Vec<Q>,
}

impl Characteristic {
    pub fn new(m: Vec<Q>) -> Self {
        assert_eq!(m.len(), 12, "characteristic has 12 entries");
        Self { m }
    }

    pub fn zero() -> Self {
        Self::new(vec![q(0); 12])
    }

    pub fn from_parts(prime: &[Q], dprime: &[Q]) -> Self {
        assert!(prime.len() == 6 && dprime.len() == 6);
        Self::new(prime.iter().chain(dprime).cloned().collect())
    }

    /// From integer numerators over a common denominator.
    pub fn from_ints(num: [i64; 12], den: i64) -> Self {
        Self::new(num.iter().map(|&n| qf(n, den)).collect())
    }

    /// `½(v, v·U)` for an integer 6-vector `v`.
    pub fn half_with_u(v: &[i64; 6]) -> Self {
        let vu = crate::lattice::row_times_u(v);
        let mut num = [0i64; 12];
        num[..6].copy_from_slice(v);
        num[6..].copy_from_slice(&vu);
        Self::from_ints(num, 2)
    }

    pub fn entries(&self) -> &[Q] {
        &self.m
    }

    pub fn prime(&self) -> &[Q] {
        &self.m[..6]
    }

    pub fn dprime(&self) -> &[Q] {
        &self.m[6..]
    }

    pub fn add(&self, other: &Characteristic) -> Characteristic {
        Self::new(self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Characteristic) -> Characteristic {
        Self::new(self.m.iter().zip(&other.m).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Q) -> Characteristic {
        Self::new(self.m.iter().map(|a| a * s).collect())
    }

    /// Representative in `[0,1)¹²`.
    pub fn reduced(&self) -> Characteristic {
        Self::new(self.m.iter().map(frac).collect())
    }

    /// Integer vector `k` with `self = self.reduced() + k`.
    pub fn integer_part(&self) -> Vec<Q> {
        self.m.iter().map(|x| x.floor()).collect()
    }

    /// Phase exponent `r` with `θ_self = e(r)·θ_{self.reduced()}`; it is `⟨m⟩′·k″`.
    pub fn reduction_phase(&self) -> Q {
        let red = self.reduced();
        let k = self.integer_part();
        red.prime().iter().zip(&k[6..]).fold(q(0), |acc, (a, b)| acc + a * b)
    }

    pub fn to_f64(&self) -> ([f64; 6], [f64; 6]) {
        let mut a = [0.0; 6];
        let mut b = [0.0; 6];
        for i in 0..6 {
            a[i] = q_to_f64(&self.m[i]);
            b[i] = q_to_f64(&self.m[6 + i]);
        }
        (a, b)
    }

    /// Even half-integer characteristic: `4·m′·m″ ≡ 0 mod 2`.
    pub fn is_even_half_integer(&self) -> bool {
        let two = q(2);
        if !self.m.iter().all(|x| (x * &two).is_integer()) {
            return false;
        }
        let s = self.prime().iter().zip(self.dprime()).fold(q(0), |acc, (a, b)| acc + a * b) * q(4);
        s.is_integer() && (s.to_integer() % 2u32) == 0u32.into()
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.m.iter().map(|x| x.to_string()).collect();
        write!(f, "({} | {})", s[..6].join(","), s[6..].join(","))
    }
}

impl Serialize for Characteristic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.m.iter().map(|x| x.to_string()).collect();
        v.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_keeps_class() {
        let m = Characteristic::from_ints([-1, 3, 0, 1, 2, -3, 5, -1, 0, 0, 1, 7], 2);
        let r = m.reduced();
        assert!(r.entries().iter().all(|x| *x >= q(0) && *x < q(1)));
        let k = m.sub(&r);
        assert!(k.entries().iter().all(|x| x.is_integer()));
    }

    #[test]
    fn parity() {
        assert!(Characteristic::zero().is_even_half_integer());
        let odd = Characteristic::from_ints([1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0], 2);
        assert!(!odd.is_even_half_integer());
    }
}
