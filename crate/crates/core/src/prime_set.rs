//! Sets of primes `E`, used by `Omega(n; E)` and friends.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Result};
use crate::random::unit_uniform;

#[derive(Debug, Clone, PartialEq)]
enum Membership {
    All,
    Empty,
    Residue { modulus: u64, residue: u64 },
    Random { density: f64, seed: u64 },
    List(BTreeSet<u64>),
}

/// A deterministic membership predicate over primes.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeSet {
    membership: Membership,
    name: String,
}

// Stream tag for set membership draws, distinct from rule value draws.
const SET_STREAM: u64 = 0x5e7;

impl PrimeSet {
    pub fn all() -> Self {
        Self { membership: Membership::All, name: "all".into() }
    }

    pub fn empty() -> Self {
        Self { membership: Membership::Empty, name: "none".into() }
    }

    /// Primes `p` with `p ≡ residue (mod modulus)`.
    pub fn residue_class(modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 {
            return invalid("residue-class modulus must be positive");
        }
        let residue = residue % modulus;
        Ok(Self {
            membership: Membership::Residue { modulus, residue },
            name: format!("mod{modulus}_{residue}"),
        })
    }

    /// Each prime kept independently with probability `density`, keyed by `(seed, p)`.
    pub fn random(density: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return invalid(format!("density {density} outside [0, 1]"));
        }
        Ok(Self {
            membership: Membership::Random { density, seed },
            name: format!("random{{theta={density},seed={seed}}}"),
        })
    }

    pub fn list(primes: impl IntoIterator<Item = u64>) -> Self {
        let set: BTreeSet<u64> = primes.into_iter().collect();
        let body: Vec<String> = set.iter().map(u64::to_string).collect();
        Self { name: format!("list{{{}}}", body.join(" ")), membership: Membership::List(set) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Membership of the prime `p`. Non-primes are never passed in by this crate.
    #[inline]
    pub fn contains(&self, p: u64) -> bool {
        match &self.membership {
            Membership::All => true,
            Membership::Empty => false,
            Membership::Residue { modulus, residue } => p % modulus == *residue,
            Membership::Random { density, seed } => unit_uniform(*seed, SET_STREAM, p) < *density,
            Membership::List(set) => set.contains(&p),
        }
    }

    pub fn is_all(&self) -> bool {
        matches!(self.membership, Membership::All)
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_class_membership() {
        let e = PrimeSet::residue_class(4, 1).unwrap();
        assert_eq!(e.name(), "mod4_1");
        let kept: Vec<u64> = [2u64, 3, 5, 7, 11, 13, 17].into_iter().filter(|&p| e.contains(p)).collect();
        assert_eq!(kept, vec![5, 13, 17]);
    }

    #[test]
    fn random_set_is_deterministic_with_roughly_right_density() {
        let e = PrimeSet::random(0.3, 9).unwrap();
        let ps = crate::sieve::primes_up_to(200_000);
        let a: Vec<bool> = ps.iter().map(|&p| e.contains(p)).collect();
        let b: Vec<bool> = ps.iter().map(|&p| e.contains(p)).collect();
        assert_eq!(a, b);
        let frac = a.iter().filter(|&&k| k).count() as f64 / a.len() as f64;
        assert!((frac - 0.3).abs() < 0.02, "{frac}");
        assert!(PrimeSet::random(1.5, 1).is_err());
    }

    #[test]
    fn list_and_trivial_sets() {
        let e = PrimeSet::list([3, 2]);
        assert!(e.contains(2) && e.contains(3) && !e.contains(5));
        assert!(PrimeSet::all().contains(101));
        assert!(!PrimeSet::empty().contains(2));
    }
}
