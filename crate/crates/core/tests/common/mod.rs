//! Independent oracles shared by integration tests: trial division and
//! direct summation, with no use of the sieve.

#![allow(dead_code)]

use mvlab::{Complex64, PrimePowerRule};

/// `(p, nu)` pairs of `n` by trial division.
pub fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut nu = 0;
            while n % p == 0 {
                n /= p;
                nu += 1;
            }
            out.push((p, nu));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && trial_division(n) == [(n, 1)]
}

/// `f(n)` from the prime-power values of a multiplicative rule.
pub fn eval_mult(f: &PrimePowerRule, n: u64) -> Complex64 {
    trial_division(n).into_iter().map(|(p, nu)| f.value(p, nu)).product()
}

/// `h(n)` for an additive rule.
pub fn eval_add(h: &PrimePowerRule, n: u64) -> Complex64 {
    trial_division(n).into_iter().map(|(p, nu)| h.value(p, nu)).sum()
}

/// Neumaier summation, written separately from the library's.
#[derive(Default, Clone, Copy)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Prefix sums `M(x; f)` for `x = 1..=limit` by trial division.
pub fn naive_prefix_sums(f: &PrimePowerRule, limit: u64) -> Vec<Complex64> {
    let (mut re, mut im) = (Kahan::default(), Kahan::default());
    (1..=limit)
        .map(|n| {
            let v = eval_mult(f, n);
            re.add(v.re);
            im.add(v.im);
            Complex64::new(re.value(), im.value())
        })
        .collect()
}
