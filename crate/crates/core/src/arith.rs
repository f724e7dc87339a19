//! Multiplicative and additive functions defined by their prime-power values.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::prime_set::PrimeSet;
use crate::random::unit_uniform;
use crate::sieve::{primes_up_to, product, PrimePower, PrimePowerFactorization, SpfTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Multiplicative,
    Additive,
}

type ValueFn = dyn Fn(u64, u32) -> Complex64 + Send + Sync;

/// A function on the integers given by a rule `(p, nu) -> value of p^nu`.
///
/// Multiplicative rules evaluate to the product of the prime-power values
/// (1 at `n = 1`); additive rules to their sum (0 at `n = 1`).
#[derive(Clone)]
pub struct PrimePowerRule {
    name: String,
    kind: RuleKind,
    value: Arc<ValueFn>,
}

impl fmt::Debug for PrimePowerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrimePowerRule").field("name", &self.name).field("kind", &self.kind).finish()
    }
}

impl PrimePowerRule {
    pub fn multiplicative<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(u64, u32) -> Complex64 + Send + Sync + 'static,
    {
        Self { name: name.into(), kind: RuleKind::Multiplicative, value: Arc::new(value) }
    }

    pub fn additive<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(u64, u32) -> Complex64 + Send + Sync + 'static,
    {
        Self { name: name.into(), kind: RuleKind::Additive, value: Arc::new(value) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn is_multiplicative(&self) -> bool {
        self.kind == RuleKind::Multiplicative
    }

    /// Value at `p^nu`; `nu = 0` gives the identity of the rule's kind.
    #[inline]
    pub fn value(&self, p: u64, nu: u32) -> Complex64 {
        if nu == 0 {
            return match self.kind {
                RuleKind::Multiplicative => Complex64::new(1.0, 0.0),
                RuleKind::Additive => Complex64::new(0.0, 0.0),
            };
        }
        (self.value)(p, nu)
    }

    /// Value at the prime `p`.
    #[inline]
    pub fn at_prime(&self, p: u64) -> Complex64 {
        (self.value)(p, 1)
    }

    /// Evaluates the induced function on a factorization.
    #[inline]
    pub fn eval(&self, factors: &[PrimePower]) -> Result<Complex64> {
        let out = match self.kind {
            RuleKind::Multiplicative => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in factors {
                    acc *= (self.value)(f.p, f.nu as u32);
                }
                acc
            }
            RuleKind::Additive => {
                let mut acc = Complex64::new(0.0, 0.0);
                for f in factors {
                    acc += (self.value)(f.p, f.nu as u32);
                }
                acc
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(non_finite(self, factors))
        }
    }

    /// Sets `f(p^nu) = 0` whenever `p^nu > x`.
    pub fn truncated(&self, x: f64) -> Self {
        let inner = self.clone();
        let zero = match self.kind {
            RuleKind::Multiplicative => Complex64::new(0.0, 0.0),
            // An additive function has no "vanishing" value; leave it alone.
            RuleKind::Additive => return self.clone(),
        };
        Self::multiplicative(format!("truncated{{{}, x={x}}}", self.name), move |p, nu| {
            if (p as f64).powi(nu as i32) > x {
                zero
            } else {
                inner.value(p, nu)
            }
        })
    }
}

fn non_finite(rule: &PrimePowerRule, factors: &[PrimePower]) -> Error {
    Error::NumericDomain {
        n: product(factors),
        detail: format!("rule {} produced a non-finite value", rule.name),
    }
}

/// Free-function form of [`PrimePowerRule::eval`].
pub fn eval(rule: &PrimePowerRule, fact: &PrimePowerFactorization) -> Result<Complex64> {
    rule.eval(fact.factors())
}

/// Parameters of the class `M(x; A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassParams {
    pub a: f64,
    pub b: f64,
    pub x: f64,
}

impl ClassParams {
    pub fn new(a: f64, b: f64, x: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return invalid(format!("class parameters need A > 0 and B > 0, got A = {a}, B = {b}"));
        }
        if !(x >= 2.0) {
            return invalid(format!("class parameter x must be >= 2, got {x}"));
        }
        Ok(Self { a, b, x })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassReport {
    pub max_prime_value: f64,
    pub prime_power_sum: f64,
    pub belongs: bool,
}

/// Computes both statistics defining `M(x; A, B)` exactly over `p^nu <= x`.
pub fn class_membership(rule: &PrimePowerRule, params: &ClassParams) -> Result<ClassReport> {
    if !rule.is_multiplicative() {
        return invalid("class membership is defined for multiplicative rules");
    }
    let x = params.x.floor() as u64;
    let mut max_prime_value: f64 = 0.0;
    let mut tail = crate::summation::CompensatedSum::new();
    for p in primes_up_to(x) {
        max_prime_value = max_prime_value.max(rule.at_prime(p).norm());
        let mut q = p as u128 * p as u128;
        let mut nu = 2u32;
        while q <= x as u128 {
            let q64 = q as f64;
            tail.add(rule.value(p, nu).norm() * q64.ln() / q64);
            q *= p as u128;
            nu += 1;
        }
    }
    let prime_power_sum = tail.value();
    Ok(ClassReport {
        max_prime_value,
        prime_power_sum,
        belongs: max_prime_value <= params.a && prime_power_sum <= params.b,
    })
}

fn factorial(nu: u32) -> f64 {
    (1..=nu).map(f64::from).product()
}

/// Exponentially multiplicative companion `g(p^nu) = f(p)^nu / nu!` for
/// `p <= x`. Above `x`, `g` vanishes, or equals `rho^nu / nu!` when a tail
/// exponent is supplied.
pub fn exp_companion(f: &PrimePowerRule, x: f64, tail_rho: Option<f64>) -> Result<PrimePowerRule> {
    if !f.is_multiplicative() {
        return invalid("exponential companion needs a multiplicative rule");
    }
    let f = f.clone();
    let name = match tail_rho {
        Some(rho) => format!("exp_companion{{{}, x={x}, rho={rho}}}", f.name()),
        None => format!("exp_companion{{{}, x={x}}}", f.name()),
    };
    Ok(PrimePowerRule::multiplicative(name, move |p, nu| {
        if (p as f64) <= x {
            f.at_prime(p).powu(nu) / factorial(nu)
        } else {
            match tail_rho {
                Some(rho) => Complex64::new(rho.powi(nu as i32) / factorial(nu), 0.0),
                None => Complex64::new(0.0, 0.0),
            }
        }
    }))
}

/// The factor `h` with `f = g * h`, `g` the companion above:
/// `h(p^nu) = sum_{j+k=nu} (-1)^j f(p)^j f(p^k) / j!` for `p <= x`, else 0.
pub fn convolution_factor(f: &PrimePowerRule, x: f64) -> Result<PrimePowerRule> {
    if !f.is_multiplicative() {
        return invalid("convolution factor needs a multiplicative rule");
    }
    let f = f.clone();
    Ok(PrimePowerRule::multiplicative(format!("convolution_factor{{{}, x={x}}}", f.name()), move |p, nu| {
        if (p as f64) > x {
            return Complex64::new(0.0, 0.0);
        }
        if nu == 1 {
            // f(p) - f(p); kept exact rather than relying on cancellation.
            return Complex64::new(0.0, 0.0);
        }
        let fp = f.at_prime(p);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for j in 0..=nu {
            if j > 0 {
                pow *= fp;
                fact *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * pow / fact * f.value(p, nu - j);
        }
        acc
    }))
}

/// Value at `n` of the Dirichlet convolution `f * g`, prime power by prime power.
pub fn dirichlet_convolve_eval(f: &PrimePowerRule, g: &PrimePowerRule, factors: &[PrimePower]) -> Result<Complex64> {
    if !(f.is_multiplicative() && g.is_multiplicative()) {
        return invalid("Dirichlet convolution is evaluated for multiplicative rules");
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for pp in factors {
        let nu = pp.nu as u32;
        let local: Complex64 = (0..=nu).map(|j| f.value(pp.p, j) * g.value(pp.p, nu - j)).sum();
        acc *= local;
    }
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(Error::NumericDomain { n: product(factors), detail: "convolution value is not finite".into() })
    }
}

/// Generalized binomial coefficient `C(rho + nu - 1, nu)`.
pub fn tau_rho_coefficient(rho: f64, nu: u32) -> f64 {
    (0..nu).map(|j| (rho + j as f64) / (j + 1) as f64).product()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn unimodular(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * turns)
}

/// Named constructors for the builtin rules.
pub mod builtins {
    use super::*;

    pub fn one() -> PrimePowerRule {
        PrimePowerRule::multiplicative("one", |_, _| c(1.0))
    }

    pub fn zero() -> PrimePowerRule {
        PrimePowerRule::multiplicative("zero", |_, _| c(0.0))
    }

    pub fn moebius() -> PrimePowerRule {
        PrimePowerRule::multiplicative("moebius", |_, nu| if nu == 1 { c(-1.0) } else { c(0.0) })
    }

    pub fn liouville() -> PrimePowerRule {
        PrimePowerRule::multiplicative("liouville", |_, nu| if nu % 2 == 1 { c(-1.0) } else { c(1.0) })
    }

    /// Dirichlet coefficients of `zeta(s)^rho`.
    pub fn tau_rho(rho: f64) -> PrimePowerRule {
        PrimePowerRule::multiplicative(format!("tau_rho{{rho={rho}}}"), move |_, nu| c(tau_rho_coefficient(rho, nu)))
    }

    /// Exponentially multiplicative with constant prime value: `f(p^nu) = z^nu / nu!`.
    pub fn exp_const(z: Complex64) -> PrimePowerRule {
        PrimePowerRule::multiplicative(format!("exp_const{{z={}}}", fmt_complex(z)), move |_, nu| z.powu(nu) / factorial(nu))
    }

    /// `f(p) = c` on primes, zero on higher powers.
    pub fn prime_const(value: Complex64) -> PrimePowerRule {
        PrimePowerRule::multiplicative(format!("prime_const{{c={}}}", fmt_complex(value)), move |_, nu| {
            if nu == 1 {
                value
            } else {
                c(0.0)
            }
        })
    }

    /// `n -> z^{Omega(n; E)}`.
    pub fn z_pow_big_omega_e(z: Complex64, set: PrimeSet) -> PrimePowerRule {
        let name = format!("z_pow_Omega_E{{z={}, E={}}}", fmt_complex(z), set.name());
        PrimePowerRule::multiplicative(name, move |p, nu| if set.contains(p) { z.powu(nu) } else { c(1.0) })
    }

    /// `n -> z^{omega(n; E)}`.
    pub fn z_pow_omega_e(z: Complex64, set: PrimeSet) -> PrimePowerRule {
        let name = format!("z_pow_omega_E{{z={}, E={}}}", fmt_complex(z), set.name());
        PrimePowerRule::multiplicative(name, move |p, _| if set.contains(p) { z } else { c(1.0) })
    }

    /// `n -> r^{Omega(n)}`.
    pub fn r_pow_omega(r: f64) -> PrimePowerRule {
        PrimePowerRule::multiplicative(format!("r_pow_Omega{{r={r}}}"), move |_, nu| c(r.powi(nu as i32)))
    }

    /// `omega(n)`: distinct prime factors.
    pub fn omega_additive() -> PrimePowerRule {
        PrimePowerRule::additive("omega", |_, _| c(1.0))
    }

    /// `Omega(n)`: prime factors with multiplicity.
    pub fn big_omega_additive() -> PrimePowerRule {
        PrimePowerRule::additive("Omega", |_, nu| c(nu as f64))
    }

    /// `log n`, additive.
    pub fn log_additive() -> PrimePowerRule {
        PrimePowerRule::additive("log", |p, nu| c(nu as f64 * (p as f64).ln()))
    }

    /// `Omega(phi(n))`. Needs `table` to cover `p - 1` for every prime
    /// that will be evaluated; outside it the value is NaN and evaluation fails.
    pub fn omega_phi(table: Arc<SpfTable>) -> PrimePowerRule {
        PrimePowerRule::additive("omega_phi", move |p, nu| {
            if p == 2 {
                return c((nu - 1) as f64);
            }
            match table.big_omega(p - 1) {
                Ok(k) => c((nu - 1 + k) as f64),
                Err(_) => c(f64::NAN),
            }
        })
    }

    /// Completely multiplicative `n^{i tau0}`.
    pub fn archimedean_twist(tau0: f64) -> PrimePowerRule {
        PrimePowerRule::multiplicative(format!("twist{{tau={tau0}}}"), move |p, nu| {
            Complex64::from_polar(1.0, tau0 * nu as f64 * (p as f64).ln())
        })
    }

    /// `f(p) = e(theta_p)` with `theta_p` uniform keyed by `(seed, p)`, supported on squarefrees.
    pub fn random_unimodular(seed: u64) -> PrimePowerRule {
        PrimePowerRule::multiplicative(format!("random_unimodular{{seed={seed}}}"), move |p, nu| {
            if nu == 1 {
                unimodular(unit_uniform(seed, 1, p))
            } else {
                c(0.0)
            }
        })
    }

    /// Random values: uniform in the disc of radius 2 at primes and radius 1 on higher powers.
    pub fn random_multiplicative(seed: u64) -> PrimePowerRule {
        PrimePowerRule::multiplicative(format!("random_multiplicative{{seed={seed}}}"), move |p, nu| {
            let key = p.wrapping_mul(64).wrapping_add(nu as u64);
            let radius = if nu == 1 { 2.0 } else { 1.0 };
            Complex64::from_polar(radius * unit_uniform(seed, 2, key).sqrt(), TAU * unit_uniform(seed, 3, key))
        })
    }

    /// Additive with `h(p^nu) = e(theta_p)`, `theta_p` keyed by `(seed, p)`.
    pub fn random_additive_unimodular(seed: u64) -> PrimePowerRule {
        PrimePowerRule::additive(format!("random_additive{{seed={seed}}}"), move |p, _| unimodular(unit_uniform(seed, 4, p)))
    }
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}
