//! Name-addressable builtin rules and prime sets.
//!
//! Specs look like `name` or `name{key=value, key=value}`, for example
//! `tau_rho{rho=0.5}` or `z_pow_omega_E{z=0.6+0.2i, E=mod4_1}`. A value may
//! itself contain braces (`E=random{theta=0.5,seed=3}`).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{builtins, PrimePowerRule, RuleKind};
use crate::error::{invalid, Error, Result};
use crate::prime_set::PrimeSet;
use crate::sieve::{build_spf, SpfTable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub params: &'static str,
    pub description: &'static str,
}

const fn entry(name: &'static str, kind: &'static str, params: &'static str, description: &'static str) -> RegistryEntry {
    RegistryEntry { name, kind, params, description }
}

const RULES: &[RegistryEntry] = &[
    entry("one", "multiplicative", "", "constant 1"),
    entry("zero", "multiplicative", "", "0 on every prime power (delta at n = 1)"),
    entry("moebius", "multiplicative", "", "Moebius function mu(n)"),
    entry("liouville", "multiplicative", "", "Liouville function (-1)^Omega(n)"),
    entry("tau_rho", "multiplicative", "rho", "coefficients of zeta(s)^rho: tau_rho(p^nu) = C(rho+nu-1, nu)"),
    entry("exp_const", "multiplicative", "z", "exponentially multiplicative, f(p^nu) = z^nu/nu!"),
    entry("prime_const", "multiplicative", "c", "f(p) = c, f(p^nu) = 0 for nu >= 2"),
    entry("z_pow_Omega_E", "multiplicative", "z, E", "z^Omega(n; E)"),
    entry("z_pow_omega_E", "multiplicative", "z, E", "z^omega(n; E)"),
    entry("r_pow_Omega", "multiplicative", "r", "r^Omega(n)"),
    entry("twist", "multiplicative", "tau", "n^(i tau)"),
    entry("random_unimodular", "multiplicative", "seed", "f(p) = e(theta_p) keyed by (seed, p), squarefree support"),
    entry("random_multiplicative", "multiplicative", "seed", "random values in |z| <= 2 at primes, |z| <= 1 on higher powers"),
    entry("omega", "additive", "", "number of distinct prime factors"),
    entry("Omega", "additive", "", "number of prime factors with multiplicity"),
    entry("omega_phi", "additive", "", "Omega(phi(n)); needs a factor table covering x"),
    entry("log", "additive", "", "log n"),
    entry("random_additive", "additive", "seed", "h(p^nu) = e(theta_p) keyed by (seed, p)"),
];

const SETS: &[RegistryEntry] = &[
    entry("all", "prime-set", "", "every prime"),
    entry("none", "prime-set", "", "no primes"),
    entry("mod<q>_<a>", "prime-set", "", "primes p = a (mod q), e.g. mod4_1"),
    entry("random", "prime-set", "theta, seed", "each prime kept with probability theta"),
    entry("list", "prime-set", "values", "explicit primes, e.g. list{values=2 3 5}"),
];

/// Catalog of builtin rules followed by builtin prime sets.
pub fn list_registry() -> Vec<RegistryEntry> {
    RULES.iter().chain(SETS.iter()).cloned().collect()
}

/// Split `name{a=1, b=c{d=2}}` into the name and its parameters.
fn split_spec(spec: &str) -> Result<(String, BTreeMap<String, String>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('{') else {
        return Ok((spec.to_string(), BTreeMap::new()));
    };
    if !spec.ends_with('}') {
        return invalid(format!("unbalanced braces in '{spec}'"));
    }
    let name = spec[..open].trim().to_string();
    let body = &spec[open + 1..spec.len() - 1];
    let mut params = BTreeMap::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut pieces = Vec::new();
    for (i, ch) in body.char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return invalid(format!("unbalanced braces in '{spec}'"));
        }
    }
    if depth != 0 {
        return invalid(format!("unbalanced braces in '{spec}'"));
    }
    pieces.push(&body[start..]);
    for piece in pieces.into_iter().map(str::trim).filter(|s| !s.is_empty()) {
        let Some((k, v)) = piece.split_once('=') else {
            return invalid(format!("parameter '{piece}' in '{spec}' is not key=value"));
        };
        if params.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return invalid(format!("duplicate parameter '{}' in '{spec}'", k.trim()));
        }
    }
    Ok((name, params))
}

/// Parses `1.5`, `-2`, `0.6+0.2i`, `2i`, `-i`, `0.5-0.3i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidArgument(format!("cannot parse complex number '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not the leading one or part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let imag = |s: &str| -> Result<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => Ok(Complex64::new(body[..i].parse::<f64>().map_err(|_| bad())?, imag(&body[i..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

struct Params {
    spec: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn take(&mut self, key: &str) -> Result<String> {
        self.map
            .remove(key)
            .ok_or_else(|| Error::InvalidArgument(format!("'{}' needs parameter '{key}'", self.spec)))
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        let v = self.take(key)?;
        v.parse().map_err(|_| Error::InvalidArgument(format!("parameter {key} = '{v}' is not a number")))
    }

    fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::InvalidArgument(format!("parameter {key} = '{v}' is not an integer"))),
        }
    }

    fn complex(&mut self, key: &str) -> Result<Complex64> {
        parse_complex(&self.take(key)?)
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => invalid(format!("unexpected parameter '{k}' in '{}'", self.spec)),
        }
    }
}

/// Context for specs that depend on the run: default seed and the factor
/// table needed by `omega_phi`.
#[derive(Debug, Clone, Default)]
pub struct RuleContext {
    pub seed: u64,
    pub factor_limit: u64,
    table: Option<Arc<SpfTable>>,
}

impl RuleContext {
    pub fn new(seed: u64, factor_limit: u64) -> Self {
        Self { seed, factor_limit, table: None }
    }

    fn table(&mut self) -> Result<Arc<SpfTable>> {
        if let Some(t) = &self.table {
            return Ok(t.clone());
        }
        let t = Arc::new(build_spf(self.factor_limit.max(2))?);
        self.table = Some(t.clone());
        Ok(t)
    }
}

pub fn parse_prime_set(spec: &str, seed: u64) -> Result<PrimeSet> {
    let (name, map) = split_spec(spec)?;
    let mut p = Params { spec: spec.to_string(), map };
    let set = match name.as_str() {
        "all" => PrimeSet::all(),
        "none" | "empty" => PrimeSet::empty(),
        "random" => {
            let theta = p.f64("theta")?;
            let seed = p.u64_or("seed", seed)?;
            PrimeSet::random(theta, seed)?
        }
        "list" => {
            let values = p.take("values")?;
            let mut primes = Vec::new();
            for tok in values.split(|c: char| c.is_whitespace() || c == ';').filter(|t| !t.is_empty()) {
                primes.push(tok.parse::<u64>().map_err(|_| Error::InvalidArgument(format!("'{tok}' is not an integer")))?);
            }
            PrimeSet::list(primes)
        }
        other => {
            let Some(rest) = other.strip_prefix("mod") else {
                return Err(Error::UnknownRule(format!("prime set '{spec}'")));
            };
            let parsed = rest.split_once('_').and_then(|(q, a)| Some((q.parse::<u64>().ok()?, a.parse::<u64>().ok()?)));
            let Some((q, a)) = parsed else {
                return Err(Error::UnknownRule(format!("prime set '{spec}'")));
            };
            PrimeSet::residue_class(q, a)?
        }
    };
    p.finish()?;
    Ok(set)
}

/// Builds a rule from its registry spec.
pub fn parse_rule(spec: &str, ctx: &mut RuleContext) -> Result<PrimePowerRule> {
    let (name, map) = split_spec(spec)?;
    let mut p = Params { spec: spec.to_string(), map };
    let rule = match name.as_str() {
        "one" => builtins::one(),
        "zero" => builtins::zero(),
        "moebius" | "mu" => builtins::moebius(),
        "liouville" => builtins::liouville(),
        "tau_rho" => builtins::tau_rho(p.f64("rho")?),
        "exp_const" => builtins::exp_const(p.complex("z")?),
        "prime_const" => builtins::prime_const(p.complex("c")?),
        "z_pow_Omega_E" | "z_pow_omega_E" => {
            let z = p.complex("z")?;
            let set = match p.map.remove("E") {
                Some(e) => parse_prime_set(&e, ctx.seed)?,
                None => PrimeSet::all(),
            };
            if name == "z_pow_Omega_E" {
                builtins::z_pow_big_omega_e(z, set)
            } else {
                builtins::z_pow_omega_e(z, set)
            }
        }
        "r_pow_Omega" => builtins::r_pow_omega(p.f64("r")?),
        "twist" => builtins::archimedean_twist(p.f64("tau")?),
        "random_unimodular" => builtins::random_unimodular(p.u64_or("seed", ctx.seed)?),
        "random_multiplicative" => builtins::random_multiplicative(p.u64_or("seed", ctx.seed)?),
        "omega" => builtins::omega_additive(),
        "Omega" => builtins::big_omega_additive(),
        "omega_phi" => builtins::omega_phi(ctx.table()?),
        "log" => builtins::log_additive(),
        "random_additive" => builtins::random_additive_unimodular(p.u64_or("seed", ctx.seed)?),
        _ => return Err(Error::UnknownRule(spec.to_string())),
    };
    p.finish()?;
    Ok(rule)
}

/// Like [`parse_rule`] but insists on a kind.
pub fn parse_rule_of_kind(spec: &str, kind: RuleKind, ctx: &mut RuleContext) -> Result<PrimePowerRule> {
    let rule = parse_rule(spec, ctx)?;
    if rule.kind() != kind {
        return invalid(format!("rule '{spec}' is {:?}, expected {kind:?}", rule.kind()));
    }
    Ok(rule)
}
