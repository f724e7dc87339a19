//! Weighted distributions of additive functions: the empirical CDF
//! `F_x(z; h, r)`, the moments `E_h`, `D_h`, Kolmogorov distances to the
//! Gaussian, the `Omega(phi(n))` application, and the weighted
//! Turan-Kubilius quantities.
//!
//! Samples with equal values are merged. Up to [`MAX_EXACT_VALUES`] distinct
//! values the CDF is exact; beyond that it is compressed to
//! [`SKETCH_GROUPS`] equal-weight groups, which moves any distance by at most
//! `2 / SKETCH_GROUPS`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{builtins, PrimePowerRule};
use crate::error::{invalid, Error, Result};
use crate::sieve::{build_spf, fold_segments, primes_up_to, Streaming};
use crate::special::normal_cdf;
use crate::summation::{CompensatedSum, ComplexSum};

pub const MAX_EXACT_VALUES: usize = 10_000_000;
pub const SKETCH_GROUPS: usize = 4096;

/// Step distribution function with nonnegative weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedEmpiricalCDF {
    /// Distinct values, ascending.
    values: Vec<f64>,
    /// `cumulative[i]` = total weight of values `<= values[i]`.
    cumulative: Vec<f64>,
    total_weight: f64,
    sketched: bool,
}

impl WeightedEmpiricalCDF {
    /// Builds the CDF from `(value, weight)` pairs.
    pub fn from_samples(samples: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut merged: HashMap<u64, f64> = HashMap::new();
        for (v, w) in samples {
            if !v.is_finite() || !(w >= 0.0) || !w.is_finite() {
                return invalid(format!("bad sample (value {v}, weight {w})"));
            }
            if w > 0.0 {
                // +0.0 and -0.0 are the same point.
                *merged.entry((v + 0.0).to_bits()).or_insert(0.0) += w;
            }
        }
        Self::from_merged(merged)
    }

    fn from_merged(merged: HashMap<u64, f64>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = merged.into_iter().map(|(b, w)| (f64::from_bits(b), w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = CompensatedSum::new();
        let mut values = Vec::with_capacity(pairs.len());
        let mut cumulative = Vec::with_capacity(pairs.len());
        for (v, w) in pairs {
            acc.add(w);
            values.push(v);
            cumulative.push(acc.value());
        }
        let total_weight = acc.value();
        if !(total_weight > 0.0) {
            return Err(Error::DegenerateInput("total weight is zero".into()));
        }
        let mut cdf = Self { values, cumulative, total_weight, sketched: false };
        if cdf.values.len() > MAX_EXACT_VALUES {
            cdf.compress(SKETCH_GROUPS);
        }
        Ok(cdf)
    }

    /// Keeps the last value of each of `groups` equal-weight quantile groups.
    fn compress(&mut self, groups: usize) {
        let mut values = Vec::with_capacity(groups);
        let mut cumulative = Vec::with_capacity(groups);
        let mut next = 1;
        for (i, (&v, &c)) in self.values.iter().zip(&self.cumulative).enumerate() {
            let last = i + 1 == self.values.len();
            if last || c >= self.total_weight * next as f64 / groups as f64 {
                values.push(v);
                cumulative.push(c);
                while next <= groups && c >= self.total_weight * next as f64 / groups as f64 {
                    next += 1;
                }
            }
        }
        self.values = values;
        self.cumulative = cumulative;
        self.sketched = true;
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn is_sketched(&self) -> bool {
        self.sketched
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.values
    }

    /// `F(z)`: weight of values `<= z` over total weight.
    pub fn cdf(&self, z: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= z);
        if i == 0 {
            0.0
        } else {
            (self.cumulative[i - 1] / self.total_weight).min(1.0)
        }
    }

    /// `sup_z |F(center + z scale) - Phi(z)|`, evaluated at every jump on
    /// both sides.
    pub fn kolmogorov_to_normal(&self, center: f64, scale: f64) -> Result<f64> {
        if !(scale > 0.0) {
            return Err(Error::DegenerateInput(format!("scale must be positive, got {scale}")));
        }
        let mut best: f64 = 0.0;
        let mut before = 0.0;
        for (&v, &c) in self.values.iter().zip(&self.cumulative) {
            let phi = normal_cdf((v - center) / scale);
            let after = (c / self.total_weight).min(1.0);
            best = best.max((before - phi).abs()).max((after - phi).abs());
            before = after;
        }
        Ok(best)
    }

    /// Rows `(z, F(center + z scale), Phi(z), gap)` on the given grid.
    pub fn comparison_table(&self, center: f64, scale: f64, z_grid: &[f64]) -> Vec<[f64; 4]> {
        z_grid
            .iter()
            .map(|&z| {
                let (f, phi) = (self.cdf(center + z * scale), normal_cdf(z));
                [z, f, phi, (f - phi).abs()]
            })
            .collect()
    }
}

/// `z = -4, -3.95, ..., 4`.
pub fn default_z_grid() -> Vec<f64> {
    (0..=160).map(|i| -4.0 + i as f64 * 0.05).collect()
}

fn check_kinds(h: &PrimePowerRule, r: &PrimePowerRule) -> Result<()> {
    if h.is_multiplicative() {
        return invalid(format!("{} must be an additive rule", h.name()));
    }
    if !r.is_multiplicative() {
        return invalid(format!("{} must be a multiplicative weight", r.name()));
    }
    Ok(())
}

/// `F_x(. ; h, r)` from one streaming pass.
pub fn weighted_cdf(h: &PrimePowerRule, r: &PrimePowerRule, x: u64, streaming: &Streaming) -> Result<WeightedEmpiricalCDF> {
    check_kinds(h, r)?;
    let parts = fold_segments(
        streaming,
        x,
        |_, _| HashMap::<u64, f64>::new(),
        |acc, n, factors| {
            let w = r.eval(factors)?;
            if w.im != 0.0 || !(w.re >= 0.0) {
                return Err(Error::InvalidInput { n, detail: format!("weight {} is not a nonnegative real ({w})", r.name()) });
            }
            let v = h.eval(factors)?;
            if v.im != 0.0 {
                return Err(Error::InvalidInput { n, detail: format!("{} is not real ({v})", h.name()) });
            }
            if w.re > 0.0 {
                *acc.entry((v.re + 0.0).to_bits()).or_insert(0.0) += w.re;
            }
            Ok(())
        },
    )?;
    let mut merged: HashMap<u64, f64> = HashMap::new();
    for part in parts {
        for (k, w) in part {
            *merged.entry(k).or_insert(0.0) += w;
        }
    }
    WeightedEmpiricalCDF::from_merged(merged)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    /// `sum_{p <= x} r(p) h(p) / p`.
    pub e_h: f64,
    /// `sqrt(sum_{p <= x} r(p) h(p)^2 / p)`.
    pub d_h: f64,
    /// `max_{p <= x} |h(p)|`.
    pub max_abs_h: f64,
    /// `sum_{p^nu <= x, nu >= 2} r(p^nu) |h(p^nu)| / p^nu`.
    pub prime_power_tail: f64,
}

pub fn moments(h: &PrimePowerRule, r: &PrimePowerRule, x: f64) -> Result<Moments> {
    check_kinds(h, r)?;
    let (mut e, mut d2, mut tail) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    let mut max_abs_h: f64 = 0.0;
    for p in primes_up_to(x.max(0.0).floor() as u64) {
        let (hv, rv) = (h.at_prime(p).re, r.at_prime(p).re);
        e.add(rv * hv / p as f64);
        d2.add(rv * hv * hv / p as f64);
        max_abs_h = max_abs_h.max(hv.abs());
        let mut q = (p as f64) * (p as f64);
        let mut nu = 2;
        while q <= x {
            tail.add(r.value(p, nu).re * h.value(p, nu).norm() / q);
            q *= p as f64;
            nu += 1;
        }
    }
    Ok(Moments { e_h: e.value(), d_h: d2.value().max(0.0).sqrt(), max_abs_h, prime_power_tail: tail.value() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltReport {
    pub x: u64,
    pub e_h: f64,
    pub d_h: f64,
    /// Observed `max_{p <= x} |h(p)| / D_h`.
    pub mu_x: f64,
    pub kolmogorov_distance: f64,
    /// `mu_x + 1/D_h`.
    pub claim_envelope: f64,
    pub prime_power_tail: f64,
    pub sketched: bool,
}

/// Compares `F_x(E_h + z D_h; h, r)` with `Phi(z)`.
pub fn gaussian_comparison(h: &PrimePowerRule, r: &PrimePowerRule, x: u64, streaming: &Streaming) -> Result<(CltReport, WeightedEmpiricalCDF)> {
    let m = moments(h, r, x as f64)?;
    if !(m.d_h > 0.0) {
        return Err(Error::DegenerateInput(format!("D_h = 0 for {} at x = {x}", h.name())));
    }
    let cdf = weighted_cdf(h, r, x, streaming)?;
    let report = CltReport {
        x,
        e_h: m.e_h,
        d_h: m.d_h,
        mu_x: m.max_abs_h / m.d_h,
        kolmogorov_distance: cdf.kolmogorov_to_normal(m.e_h, m.d_h)?,
        claim_envelope: m.max_abs_h / m.d_h + 1.0 / m.d_h,
        prime_power_tail: m.prime_power_tail,
        sketched: cdf.is_sketched(),
    };
    Ok((report, cdf))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaPhiReport {
    pub x: u64,
    pub rho: f64,
    /// `rho (log_2 x)^2 / 2`.
    pub center: f64,
    /// `rho (log_2 x)^{3/2} / sqrt(3)`.
    pub scale: f64,
    pub kolmogorov_distance: f64,
    /// `1 / sqrt(log_2 x)`.
    pub envelope: f64,
    /// Exact prime sums for `h = Omega(phi(.))`, for comparison with the centering.
    pub e_h: f64,
    pub d_h: f64,
}

/// `h(n) = Omega(phi(n))` under weight `r`, normalized with the fixed
/// centering and scaling `rho (log_2 x)^2 / 2`, `rho (log_2 x)^{3/2} / sqrt(3)`.
pub fn omega_phi_report(r: &PrimePowerRule, rho: f64, x: u64, streaming: &Streaming) -> Result<(OmegaPhiReport, WeightedEmpiricalCDF)> {
    if !(rho > 0.0) {
        return invalid(format!("rho must be positive, got {rho}"));
    }
    if x < 16 {
        return invalid(format!("x must be >= 16 so that log log x > 1, got {x}"));
    }
    let h = builtins::omega_phi(Arc::new(build_spf(x)?));
    let ll = (x as f64).ln().ln();
    let center = 0.5 * rho * ll * ll;
    let scale = rho * ll.powf(1.5) / 3f64.sqrt();
    let m = moments(&h, r, x as f64)?;
    let cdf = weighted_cdf(&h, r, x, streaming)?;
    let report = OmegaPhiReport {
        x,
        rho,
        center,
        scale,
        kolmogorov_distance: cdf.kolmogorov_to_normal(center, scale)?,
        envelope: 1.0 / ll.sqrt(),
        e_h: m.e_h,
        d_h: m.d_h,
    };
    Ok((report, cdf))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TkReport {
    pub x: u64,
    /// `sum_{p^nu <= x} lambda(p^nu) theta(p^nu) / p^nu`.
    pub theta: Complex64,
    /// `sum_{p^nu <= x} lambda(p^nu) |theta(p^nu)|^2 / p^nu`.
    pub frak_s: f64,
    /// `sum_{n <= x} (lambda(n)/n) |theta(n) - Theta|^2`.
    pub lhs: f64,
    /// `sum_{n <= x} lambda(n)/n`.
    pub l: f64,
    /// `lhs / (L frak_s)`.
    pub ratio: f64,
}

/// Weighted Turan-Kubilius quantities for a nonnegative multiplicative
/// weight `lambda` and an additive `theta`.
pub fn turan_kubilius(lambda: &PrimePowerRule, theta: &PrimePowerRule, x: u64, streaming: &Streaming) -> Result<TkReport> {
    check_kinds(theta, lambda)?;
    let xf = x as f64;
    let mut big_theta = ComplexSum::new();
    let mut frak_s = CompensatedSum::new();
    for p in primes_up_to(x) {
        let mut q = p as f64;
        let mut nu = 1;
        while q <= xf {
            let (l, t) = (lambda.value(p, nu), theta.value(p, nu));
            if l.im != 0.0 || !(l.re >= 0.0) {
                return Err(Error::InvalidInput { n: q as u64, detail: format!("weight {} is not a nonnegative real ({l})", lambda.name()) });
            }
            big_theta.add(t * (l.re / q));
            frak_s.add(l.re * t.norm_sqr() / q);
            q *= p as f64;
            nu += 1;
        }
    }
    let big_theta = big_theta.value();
    let parts = fold_segments(
        streaming,
        x,
        |_, _| (CompensatedSum::new(), CompensatedSum::new()),
        |(lhs, l), n, factors| {
            let w = lambda.eval(factors)?;
            if w.im != 0.0 || !(w.re >= 0.0) {
                return Err(Error::InvalidInput { n, detail: format!("weight {} is not a nonnegative real ({w})", lambda.name()) });
            }
            if w.re > 0.0 {
                let t = theta.eval(factors)?;
                let w = w.re / n as f64;
                lhs.add(w * (t - big_theta).norm_sqr());
                l.add(w);
            }
            Ok(())
        },
    )?;
    let (mut lhs, mut l) = (CompensatedSum::new(), CompensatedSum::new());
    for (a, b) in &parts {
        lhs.merge(a);
        l.merge(b);
    }
    let (lhs, l, frak_s) = (lhs.value(), l.value(), frak_s.value());
    let ratio = if lhs == 0.0 {
        0.0
    } else if frak_s > 0.0 && l > 0.0 {
        lhs / (l * frak_s)
    } else {
        return Err(Error::DegenerateInput(format!("frak_s = {frak_s} and L = {l} with lhs = {lhs}")));
    };
    Ok(TkReport { x, theta: big_theta, frak_s, lhs, l, ratio })
}

/// The fixed 12-member family of `(lambda, theta)` pairs: four weights times
/// three additive functions.
pub fn tk_suite(seed: u64) -> Vec<(PrimePowerRule, PrimePowerRule)> {
    let weights = [builtins::one(), builtins::tau_rho(0.5), builtins::tau_rho(2.0), builtins::r_pow_omega(0.7)];
    let mut out = Vec::with_capacity(12);
    for w in &weights {
        for t in [builtins::omega_additive(), builtins::big_omega_additive(), builtins::random_additive_unimodular(seed)] {
            out.push((w.clone(), t));
        }
    }
    out
}
