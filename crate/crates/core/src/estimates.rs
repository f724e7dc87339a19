//! Analytic bounds and main terms evaluated numerically.
//!
//! Suprema over continuous ranges of `tau` are taken on grids with local
//! refinement:
//!
//! * `H_T(alpha)`: each unit segment `|tau - k| <= 1/2` is sampled with step
//!   `tau_step` (default 1/64), and the `k = 0` segment with
//!   `min(tau_step, 1/(8 log x))`.
//! * `m_f(x; T)`: coarse step `1/log x` over `[-T, T]` plus `tau = 0`, then
//!   three rounds of refinement, each sampling `argmin +- h` with step `h/8`.
//!
//! The `alpha` integral in the Halasz bound is a trapezoid rule in `log alpha`
//! on nodes `alpha_j = 2^{j/8} / log x` up to 1; the reported quadrature error
//! is the difference against the same rule on every other node.
//!
//! `log_2 x` below always means `log log x`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::PrimePowerRule;
use crate::error::{invalid, Error, Result};
use crate::random::unit_uniform;
use crate::mean_values::{euler_factor, euler_product_truncated, mean_value, prime_sum};
use crate::sieve::{primes_up_to, Streaming};
use crate::special::{gamma_real, EULER_GAMMA};
use crate::summation::CompensatedSum;

/// Default `tau` step on unit segments.
pub const DEFAULT_TAU_STEP: f64 = 1.0 / 64.0;

const REFINE_ROUNDS: usize = 3;
const REFINE_SUBDIVISIONS: usize = 8;
const DOMINATION_SLACK: f64 = 1e-12;

/// Primes up to `x` with their logarithms.
struct PrimeTable {
    primes: Vec<u64>,
    logs: Vec<f64>,
}

impl PrimeTable {
    fn new(x: f64) -> Self {
        let primes = primes_up_to(x.max(0.0).floor() as u64);
        let logs = primes.iter().map(|&p| (p as f64).ln()).collect();
        Self { primes, logs }
    }
}

fn cis(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

/// Checks `|f(p)| <= r(p)` on primes up to `x`.
fn check_dominated(f: &PrimePowerRule, r: &PrimePowerRule, table: &PrimeTable) -> Result<()> {
    for &p in &table.primes {
        let (fv, rv) = (f.at_prime(p).norm(), r.at_prime(p).re);
        if fv > rv * (1.0 + DOMINATION_SLACK) + DOMINATION_SLACK {
            return invalid(format!("|{}(p)| = {fv} exceeds {}(p) = {rv} at p = {p}", f.name(), r.name()));
        }
    }
    Ok(())
}

/// `v_f(s; x) = sum_{p <= x} f(p) / p^s`.
pub fn v_f(f: &PrimePowerRule, s: Complex64, x: f64) -> Complex64 {
    let mut acc = crate::summation::ComplexSum::new();
    for p in primes_up_to(x.max(0.0).floor() as u64) {
        acc.add(f.at_prime(p) * (-s * (p as f64).ln()).exp());
    }
    acc.value()
}

/// Sampling of the vertical line `sigma = 1 + alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineSampleGrid {
    pub alpha: f64,
    pub tau_step: f64,
    pub t: f64,
}

impl LineSampleGrid {
    pub fn new(alpha: f64, tau_step: f64, t: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return invalid(format!("alpha must be positive, got {alpha}"));
        }
        if !(tau_step > 0.0 && tau_step <= 0.125) {
            return invalid(format!("tau step must lie in (0, 1/8], got {tau_step}"));
        }
        if !(t >= 1.0) || !t.is_finite() {
            return invalid(format!("T must be >= 1, got {t}"));
        }
        Ok(Self { alpha, tau_step, t })
    }
}

/// Max of `Re sum_p a_p p^{-i tau}` for `tau = tau0 + i*step`, `i = 0..=count`.
fn max_real_part(coeffs: &[Complex64], logs: &[f64], tau0: f64, step: f64, count: usize) -> f64 {
    let mut b: Vec<Complex64> = coeffs.iter().zip(logs).map(|(a, l)| a * cis(-tau0 * l)).collect();
    let w: Vec<Complex64> = logs.iter().map(|l| cis(-step * l)).collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..=count {
        let re: f64 = b.iter().map(|z| z.re).sum();
        best = best.max(re);
        if i < count {
            for (z, m) in b.iter_mut().zip(&w) {
                *z *= m;
            }
        }
    }
    best
}

fn h_t_from_table(f_primes: &[Complex64], table: &PrimeTable, x: f64, grid: &LineSampleGrid) -> f64 {
    let sigma = 1.0 + grid.alpha;
    let coeffs: Vec<Complex64> = f_primes.iter().zip(&table.logs).map(|(v, l)| v * (-sigma * l).exp()).collect();
    let kmax = grid.t.floor() as i64;
    let near_zero = grid.tau_step.min(1.0 / (8.0 * x.ln()));
    let mut acc = CompensatedSum::new();
    for k in -kmax..=kmax {
        let step = if k == 0 { near_zero } else { grid.tau_step };
        let count = (1.0 / step).ceil() as usize;
        let step = 1.0 / count as f64;
        let m = max_real_part(&coeffs, &table.logs, k as f64 - 0.5, step, count);
        acc.add((2.0 * m).exp() / ((k * k) as f64 + 1.0));
    }
    acc.value().sqrt()
}

/// `H_T(alpha)` with the grid supremum described in the module docs.
pub fn h_t(f: &PrimePowerRule, x: f64, grid: &LineSampleGrid) -> Result<f64> {
    if !(x >= 2.0) {
        return invalid(format!("x must be >= 2, got {x}"));
    }
    let table = PrimeTable::new(x);
    let values: Vec<Complex64> = table.primes.iter().map(|&p| f.at_prime(p)).collect();
    Ok(h_t_from_table(&values, &table, x, grid))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalaszReport {
    pub x: f64,
    pub t: f64,
    /// `int_{1/log x}^1 H_T(alpha)/alpha d alpha`.
    pub integral_term: f64,
    /// `e^{Z(x; r)} / sqrt(T)`.
    pub sqrt_t_term: f64,
    /// `e^{Z(x; r)} log_2 x / T`.
    pub tail_term: f64,
    /// `(x / log x)` times the bracket.
    pub rhs: f64,
    pub drop_tail: bool,
    pub z_r: f64,
    pub alpha_nodes: usize,
    pub quadrature_error: f64,
}

/// Right-hand side of the Halasz-type bound for `M(x; f)`, with `|f| <= r`.
pub fn halasz_rhs(f: &PrimePowerRule, r: &PrimePowerRule, x: f64, t: f64, drop_tail: bool, tau_step: f64) -> Result<HalaszReport> {
    if !(x >= 3.0) {
        return invalid(format!("x must be >= 3 for the Halasz bound, got {x}"));
    }
    LineSampleGrid::new(1.0, tau_step, t)?;
    let table = PrimeTable::new(x);
    check_dominated(f, r, &table)?;
    let values: Vec<Complex64> = table.primes.iter().map(|&p| f.at_prime(p)).collect();

    let log_x = x.ln();
    let u0 = (1.0 / log_x).ln();
    let du = std::f64::consts::LN_2 / 8.0;
    let mut nodes: Vec<f64> = (0..).map(|j| u0 + j as f64 * du).take_while(|&u| u < 0.0).collect();
    nodes.push(0.0);
    let h: Vec<f64> = nodes
        .iter()
        .map(|&u| {
            let grid = LineSampleGrid { alpha: u.exp(), tau_step, t };
            h_t_from_table(&values, &table, x, &grid)
        })
        .collect();
    let trapezoid = |idx: &[usize]| -> f64 {
        idx.windows(2).map(|w| 0.5 * (h[w[0]] + h[w[1]]) * (nodes[w[1]] - nodes[w[0]])).sum()
    };
    let all: Vec<usize> = (0..nodes.len()).collect();
    let mut coarse: Vec<usize> = (0..nodes.len()).step_by(2).collect();
    if *coarse.last().unwrap() != nodes.len() - 1 {
        coarse.push(nodes.len() - 1);
    }
    let integral_term = trapezoid(&all);
    let quadrature_error = (integral_term - trapezoid(&coarse)).abs();

    let z_r = prime_sum(r, x)?.re;
    let sqrt_t_term = z_r.exp() / t.sqrt();
    let tail_term = z_r.exp() * log_x.ln() / t;
    let bracket = integral_term + sqrt_t_term + if drop_tail { 0.0 } else { tail_term };
    Ok(HalaszReport {
        x,
        t,
        integral_term,
        sqrt_t_term,
        tail_term,
        rhs: x / log_x * bracket,
        drop_tail,
        z_r,
        alpha_nodes: nodes.len(),
        quadrature_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MfResult {
    pub value: f64,
    pub argmin_tau: f64,
}

/// `m_f(x; T) = min_{|tau| <= T} sum_{p <= x} (r(p) - Re(f(p) p^{-i tau})) / p`.
pub fn m_f(f: &PrimePowerRule, r: &PrimePowerRule, x: f64, t: f64, coarse_step: Option<f64>) -> Result<MfResult> {
    if !(x >= 2.0) {
        return invalid(format!("x must be >= 2, got {x}"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("T must be a finite nonnegative number, got {t}"));
    }
    let table = PrimeTable::new(x);
    check_dominated(f, r, &table)?;
    let fp: Vec<Complex64> = table.primes.iter().map(|&p| f.at_prime(p) / p as f64).collect();
    let rp: Vec<f64> = table.primes.iter().map(|&p| r.at_prime(p).re / p as f64).collect();
    let eval = |tau: f64| -> f64 {
        fp.iter()
            .zip(&rp)
            .zip(&table.logs)
            .map(|((a, rv), l)| rv - (a * cis(-tau * l)).re)
            .collect::<CompensatedSum>()
            .value()
    };

    let step = coarse_step.unwrap_or(1.0 / x.ln());
    if !(step > 0.0) {
        return invalid("coarse step must be positive");
    }
    let mut best = MfResult { value: eval(0.0), argmin_tau: 0.0 };
    if t > 0.0 {
        let count = (2.0 * t / step).ceil() as usize;
        let step = 2.0 * t / count as f64;
        let mut b: Vec<Complex64> = fp.iter().zip(&table.logs).map(|(a, l)| a * cis(t * l)).collect();
        let w: Vec<Complex64> = table.logs.iter().map(|l| cis(-step * l)).collect();
        let r_total: f64 = rp.iter().copied().collect::<CompensatedSum>().value();
        for i in 0..=count {
            let v = r_total - b.iter().map(|z| z.re).sum::<f64>();
            if v < best.value {
                best = MfResult { value: v, argmin_tau: -t + i as f64 * step };
            }
            for (z, m) in b.iter_mut().zip(&w) {
                *z *= m;
            }
        }
        // Re-evaluate the coarse winner directly to shed rotation drift.
        best.value = eval(best.argmin_tau);
        let mut h = step;
        for _ in 0..REFINE_ROUNDS {
            let centre = best.argmin_tau;
            let sub = h / REFINE_SUBDIVISIONS as f64;
            for j in 0..=2 * REFINE_SUBDIVISIONS {
                let tau = (centre - h + j as f64 * sub).clamp(-t, t);
                let v = eval(tau);
                if v < best.value {
                    best = MfResult { value: v, argmin_tau: tau };
                }
            }
            h = sub;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MfBoundReport {
    pub m_f: f64,
    pub argmin_tau: f64,
    /// `M(x; r)`, exact.
    pub mass_r: f64,
    pub t: f64,
    pub bound: f64,
}

/// `M(x; r) ((1 + m) e^{-m} + 1/sqrt(T))`.
pub fn mf_bound_from(mass_r: f64, m: f64, t: f64) -> f64 {
    mass_r * ((1.0 + m) * (-m).exp() + 1.0 / t.sqrt())
}

/// Upper bound for `|M(x; f)|` up to an absolute constant, with `M(x; r)`
/// computed exactly by sieve.
pub fn mf_bound(f: &PrimePowerRule, r: &PrimePowerRule, x: f64, t: f64, streaming: &Streaming) -> Result<MfBoundReport> {
    if !(t >= 1.0) {
        return invalid(format!("T must be >= 1, got {t}"));
    }
    let mf = m_f(f, r, x, t, None)?;
    let mass_r = mean_value(r, x.floor() as u64, streaming)?.re;
    Ok(MfBoundReport {
        m_f: mf.value,
        argmin_tau: mf.argmin_tau,
        mass_r,
        t,
        bound: mf_bound_from(mass_r, mf.value, t),
    })
}

/// Main term `e^{-gamma rho} x / (Gamma(rho) log x) * prod_p sum_{p^nu <= x} f(p^nu)/p^nu`.
pub fn wirsing_main_term(f: &PrimePowerRule, rho: f64, x: f64) -> Result<Complex64> {
    if !(rho > 0.0) {
        return invalid(format!("rho must be positive (Gamma has a pole), got {rho}"));
    }
    if !(x >= 3.0) {
        return invalid(format!("x must be >= 3, got {x}"));
    }
    let product = euler_product_truncated(f, x)?;
    Ok(product * wirsing_scale(rho, x)?)
}

/// The factor multiplying the Euler product in [`wirsing_main_term`].
pub fn wirsing_scale(rho: f64, x: f64) -> Result<f64> {
    Ok((-EULER_GAMMA * rho).exp() * x / (gamma_real(rho)? * x.ln()))
}

/// `prod_{p <= x} (local factor of f) / (local factor of r)`.
pub fn comparison_ratio_product(f: &PrimePowerRule, r: &PrimePowerRule, x: f64) -> Result<Complex64> {
    if !(f.is_multiplicative() && r.is_multiplicative()) {
        return invalid("comparison needs multiplicative rules");
    }
    if !(x >= 2.0) {
        return invalid(format!("x must be >= 2, got {x}"));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for p in primes_up_to(x.floor() as u64) {
        let den = euler_factor(r, p, x);
        if den.norm() < 1e-14 {
            return Err(Error::DegenerateInput(format!("Euler factor of {} vanishes at p = {p}", r.name())));
        }
        acc *= euler_factor(f, p, x) / den;
    }
    Ok(acc)
}

/// Main term `y (log y)^{rho - 1} / Gamma(rho)` of `sum_{n <= y} tau_rho(n)`.
pub fn tau_rho_summatory_main(rho: f64, y: f64) -> Result<f64> {
    if !(y > 1.0) {
        return invalid(format!("y must exceed 1, got {y}"));
    }
    Ok(y * y.ln().powf(rho - 1.0) / gamma_real(rho)?)
}

/// `M(x; r) prod_p (factor of f)/(factor of r)`, `M(x; r)` exact.
pub fn comparison_prediction(f: &PrimePowerRule, r: &PrimePowerRule, x: f64, streaming: &Streaming) -> Result<Complex64> {
    let ratio = comparison_ratio_product(f, r, x)?;
    Ok(mean_value(r, x.floor() as u64, streaming)? * ratio)
}

/// Parameters of the Wirsing-type theorems. Field names follow the usual
/// fraktur symbols: `frak_a`, `frak_b` are the two structural constants,
/// `class_a`, `class_b` the class bounds `A`, `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct HypothesisParams {
    pub frak_a: f64,
    pub frak_b: f64,
    pub class_a: f64,
    pub class_b: f64,
    pub rho: f64,
    pub eps: f64,
    pub delta1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedSymbols {
    /// `pi rho / A`.
    pub frak_p: f64,
    /// `1 - sin(frak_p)/frak_p`.
    pub beta: f64,
    /// `(1 - b) / (min(1, rho) - b)`.
    pub frak_h: f64,
    pub beta0: f64,
    pub delta0: f64,
    /// 1 for real `f`, 1/2 otherwise.
    pub w_f: f64,
    /// `w_f delta_1`.
    pub delta: f64,
    /// `sqrt(eps)`.
    pub eps1: f64,
}

impl HypothesisParams {
    pub fn derived(&self, f_is_real: bool) -> DerivedSymbols {
        let frak_p = PI * self.rho / self.class_a;
        let q = 2.0 * PI * self.frak_b / self.class_a;
        let beta0 = 1.0 - q.sin() / q;
        let w_f = if f_is_real { 1.0 } else { 0.5 };
        DerivedSymbols {
            frak_p,
            beta: 1.0 - frak_p.sin() / frak_p,
            frak_h: (1.0 - self.frak_b) / (self.rho.min(1.0) - self.frak_b),
            beta0,
            delta0: self.frak_b * beta0 / 3.0,
            w_f,
            delta: w_f * self.delta1,
            eps1: self.eps.sqrt(),
        }
    }

    /// Checks the admissible parameter ranges, naming the first violated one.
    pub fn validate(&self, x: f64) -> Result<()> {
        let Self { frak_a, frak_b, class_a, class_b, rho, eps, delta1 } = *self;
        let fail = |what: &str| invalid(format!("parameter constraint violated: {what}"));
        if !(frak_a > 0.0 && frak_a <= 0.5) {
            return fail("frak_a in (0, 1/2]");
        }
        if !(frak_b >= frak_a && frak_b < 1.0) {
            return fail("frak_b in [frak_a, 1)");
        }
        if !(class_a >= 2.0 * frak_b) {
            return fail("A >= 2 frak_b");
        }
        if !(class_b > 0.0) {
            return fail("B > 0");
        }
        if !(rho >= 2.0 * frak_b && rho <= class_a) {
            return fail("rho in [2 frak_b, A]");
        }
        if !(x > std::f64::consts::E) || !(eps > 1.0 / x.ln().sqrt() && eps <= 0.5) {
            return fail("eps in (1/sqrt(log x), 1/2]");
        }
        let beta = self.derived(true).beta;
        if !(delta1 > 0.0 && delta1 <= 2.0 / 3.0 * beta * frak_b * (1.0 + 1e-12)) {
            return fail("delta1 in (0, 2/3 beta frak_b]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub x: f64,
    pub params: HypothesisParams,
    pub derived: DerivedSymbols,
    /// `sum_{p <= x} (r(p) - Re f(p)) / p`, with `gap(p) = r(p) - Re f(p)`.
    pub gap_sum: f64,
    /// `beta frak_b log(1/eps) / 2`, the ceiling for `gap_sum`.
    pub gap_threshold: f64,
    /// Max over the grid of `sum_{x^eps < p <= y} gap(p)^h log p / p`,
    /// over `eps^{delta_1 h} log y`, with `h = frak_h`.
    pub large_gap_log_ratio: f64,
    /// Max over the grid of `|sum_{p <= y} (r(p) - rho) log p / p|`, over `eps log y`.
    pub rho_density_ratio: f64,
    /// `sum_{x^eps < p <= x} gap(p)^h / p`, over `eps^{delta_1 h}`.
    pub large_gap_ratio: f64,
    /// `max_{x^eps < p <= x} (r(p) - Re f(p))`, over `eps^{delta_1}`.
    pub max_gap_ratio: f64,
    /// Min over `y` of `sum_{y < p <= y^{1+eps_1}} r(p) log p / p`, over
    /// `4 frak_b eps_1 log y`. `None` when `[e^{1/eps_1}, x^{1/(1+eps_1)}]` is empty.
    pub short_interval_min_ratio: Option<f64>,
    pub y_grid: Vec<f64>,
}

/// Prefix sums over the primes of a table, evaluated at arbitrary cut-offs.
struct PrimePrefix {
    primes: Vec<u64>,
    cum: Vec<f64>,
}

impl PrimePrefix {
    fn new(primes: &[u64], mut term: impl FnMut(usize) -> f64) -> Self {
        let mut acc = CompensatedSum::new();
        let mut cum = Vec::with_capacity(primes.len() + 1);
        cum.push(0.0);
        for i in 0..primes.len() {
            acc.add(term(i));
            cum.push(acc.value());
        }
        Self { primes: primes.to_vec(), cum }
    }

    /// Sum over primes `p <= y`.
    fn upto(&self, y: f64) -> f64 {
        self.cum[self.primes.partition_point(|&p| (p as f64) <= y)]
    }

    /// Sum over `lo < p <= hi`.
    fn between(&self, lo: f64, hi: f64) -> f64 {
        self.upto(hi) - self.upto(lo)
    }
}

/// `sum_{y < p <= y^{1+eps1}} r(p) log p / p`.
pub fn short_interval_sum(r: &PrimePowerRule, y: f64, eps1: f64) -> f64 {
    let hi = y.powf(1.0 + eps1);
    crate::mean_values::sum_over_primes(hi.floor() as u64, |p| {
        if (p as f64) > y {
            r.at_prime(p).re * (p as f64).ln() / p as f64
        } else {
            0.0
        }
    })
}

/// Evaluates each hypothesis sum exactly and compares it with its envelope
/// over a grid of `y`. The default grid is `x^{eps}, x^{2 eps}, ...` up to `x`.
pub fn hypothesis_diagnostics(
    f: &PrimePowerRule,
    r: &PrimePowerRule,
    params: &HypothesisParams,
    x: f64,
    y_grid: Option<Vec<f64>>,
) -> Result<HypothesisReport> {
    params.validate(x)?;
    let table = PrimeTable::new(x);
    let f_is_real = table.primes.iter().all(|&p| {
        let mut q = p as f64;
        let mut nu = 1;
        let mut real = true;
        while q <= x && real {
            real = f.value(p, nu).im == 0.0;
            q *= p as f64;
            nu += 1;
        }
        real
    });
    let d = params.derived(f_is_real);
    let eps = params.eps;
    let x_eps = x.powf(eps);
    let ps = &table.primes;
    let gap: Vec<f64> = ps.iter().map(|&p| r.at_prime(p).re - f.at_prime(p).re).collect();

    let gap_sum = ps.iter().zip(&gap).map(|(&p, g)| g / p as f64).collect::<CompensatedSum>().value();
    let gap_threshold = 0.5 * d.beta * params.frak_b * (1.0 / eps).ln();

    let powered = |i: usize| gap[i].max(0.0).powf(d.frak_h);
    let above = |i: usize| (ps[i] as f64) > x_eps;
    let s_gap_log = PrimePrefix::new(ps, |i| if above(i) { powered(i) * table.logs[i] / ps[i] as f64 } else { 0.0 });
    let s_rho = PrimePrefix::new(ps, |i| (r.at_prime(ps[i]).re - params.rho) * table.logs[i] / ps[i] as f64);
    let s_gap = PrimePrefix::new(ps, |i| if above(i) { powered(i) / ps[i] as f64 } else { 0.0 });
    let s_r = PrimePrefix::new(ps, |i| r.at_prime(ps[i]).re * table.logs[i] / ps[i] as f64);

    let y_grid = y_grid.unwrap_or_else(|| {
        let mut g: Vec<f64> = (1..).map(|j| x.powf(j as f64 * eps)).take_while(|&y| y < x).collect();
        g.push(x);
        g
    });
    let gap_envelope = eps.powf(params.delta1 * d.frak_h);
    let mut large_gap_log_ratio: f64 = 0.0;
    let mut rho_density_ratio: f64 = 0.0;
    for &y in y_grid.iter().filter(|&&y| y > x_eps && y <= x) {
        large_gap_log_ratio = large_gap_log_ratio.max(s_gap_log.upto(y) / (gap_envelope * y.ln()));
        rho_density_ratio = rho_density_ratio.max(s_rho.upto(y).abs() / (eps * y.ln()));
    }
    let large_gap_ratio = s_gap.upto(x) / gap_envelope;
    let max_gap = ps.iter().zip(&gap).filter(|(&p, _)| (p as f64) > x_eps).map(|(_, g)| *g).fold(0.0, f64::max);
    let max_gap_ratio = max_gap / eps.powf(params.delta1);

    let (lo, hi) = ((1.0 / d.eps1).exp(), x.powf(1.0 / (1.0 + d.eps1)));
    let short_interval_min_ratio = (lo <= hi).then(|| {
        let steps = 32;
        (0..=steps)
            .map(|j| lo * (hi / lo).powf(j as f64 / steps as f64))
            .map(|y| s_r.between(y, y.powf(1.0 + d.eps1)) / (4.0 * params.frak_b * d.eps1 * y.ln()))
            .fold(f64::INFINITY, f64::min)
    });

    Ok(HypothesisReport {
        x,
        params: *params,
        derived: d,
        gap_sum,
        gap_threshold,
        large_gap_log_ratio,
        rho_density_ratio,
        large_gap_ratio,
        max_gap_ratio,
        short_interval_min_ratio,
        y_grid,
    })
}

/// `D^2(x; f, g) = sum_{p <= x} (1 - Re f(p) conj(g(p))) / p`, for `|f|, |g| <= 1` on primes.
pub fn pretentious_distance_sq(f: &PrimePowerRule, g: &PrimePowerRule, x: f64) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for p in primes_up_to(x.max(0.0).floor() as u64) {
        let (a, b) = (f.at_prime(p), g.at_prime(p));
        if a.norm() > 1.0 + DOMINATION_SLACK || b.norm() > 1.0 + DOMINATION_SLACK {
            return invalid(format!("pretentious distance needs |f(p)|, |g(p)| <= 1; fails at p = {p}"));
        }
        acc.add((1.0 - (a * b.conj()).re) / p as f64);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GallagherResult {
    /// `int_{-T}^{T} |sum a_n e(lambda_n t)|^2 dt` by composite Simpson.
    pub lhs: f64,
    /// `T sum_n |a_n|^2 #{m : |lambda_m - lambda_n| <= 1/T}`.
    pub rhs: f64,
    pub intervals: usize,
}

impl GallagherResult {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Both sides of the Gallagher mean-square inequality. The quadrature step
/// is `min(step, 1/(8 max|lambda|))`.
pub fn gallagher_check(points: &[f64], coeffs: &[Complex64], t: f64, step: Option<f64>) -> Result<GallagherResult> {
    if points.is_empty() || points.len() != coeffs.len() {
        return invalid("need as many coefficients as points, and at least one");
    }
    if !(t > 0.0) || !t.is_finite() {
        return invalid(format!("T must be positive, got {t}"));
    }
    let mut sorted: Vec<f64> = points.to_vec();
    if sorted.iter().any(|v| !v.is_finite()) {
        return invalid("frequencies must be finite");
    }
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return invalid(format!("duplicate frequency {}", w[0]));
    }

    let mut rhs = CompensatedSum::new();
    for (lam, a) in points.iter().zip(coeffs) {
        let lo = sorted.partition_point(|&v| v < lam - 1.0 / t);
        let hi = sorted.partition_point(|&v| v <= lam + 1.0 / t);
        rhs.add(t * a.norm_sqr() * (hi - lo) as f64);
    }

    let max_freq = sorted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut h = if max_freq > 0.0 { 1.0 / (8.0 * max_freq) } else { t };
    if let Some(s) = step {
        if !(s > 0.0) {
            return invalid("quadrature step must be positive");
        }
        h = h.min(s);
    }
    let mut intervals = (2.0 * t / h).ceil() as usize;
    intervals = intervals.max(2);
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let h = 2.0 * t / intervals as f64;
    let integrand = |u: f64| -> f64 {
        points
            .iter()
            .zip(coeffs)
            .map(|(lam, a)| a * cis(2.0 * PI * lam * u))
            .sum::<Complex64>()
            .norm_sqr()
    };
    let mut acc = CompensatedSum::new();
    for i in 0..=intervals {
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.add(w * integrand(-t + i as f64 * h));
    }
    Ok(GallagherResult { lhs: acc.value() * h / 3.0, rhs: rhs.value(), intervals })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GallagherInstance {
    pub points: Vec<f64>,
    pub coeffs: Vec<Complex64>,
    pub t: f64,
}

/// A seeded test instance with `1..=max_n` frequencies and `T` drawn from
/// `ts`. The seed also picks one of three families: spread-out, clustered
/// within `1/T`, or near-lattice frequencies.
pub fn random_gallagher_instance(seed: u64, max_n: usize, ts: &[f64]) -> GallagherInstance {
    let u = |k: u64| unit_uniform(seed, 0x6a11, k);
    let n = 1 + (u(0) * max_n as f64) as usize;
    let t = ts[(seed % ts.len() as u64) as usize];
    let spacing = (0.05f64.ln() + u(1) * (3.0f64 / 0.05).ln()).exp() / t;
    let mut points: Vec<f64> = match (seed / ts.len() as u64) % 3 {
        0 => (0..n).map(|i| (u(10 + i as u64) - 0.5) * n as f64 * spacing).collect(),
        1 => {
            let clusters = 1 + n / 20;
            (0..n)
                .map(|i| {
                    let c = (u(10 + i as u64) * clusters as f64).floor();
                    c * 10.0 / t + u(1000 + i as u64) / (2.0 * t)
                })
                .collect()
        }
        _ => (0..n).map(|i| i as f64 * spacing + 1e-3 * spacing * u(10 + i as u64)).collect(),
    };
    points.sort_by(f64::total_cmp);
    points.dedup();
    let coeffs = (0..points.len())
        .map(|i| Complex64::from_polar(u(5000 + i as u64), 2.0 * PI * u(9000 + i as u64)))
        .collect();
    GallagherInstance { points, coeffs, t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::builtins::*;
    use crate::prime_set::PrimeSet;

    #[test]
    fn v_f_examples() {
        assert_eq!(v_f(&zero(), Complex64::new(1.0, 0.0), 10.0), Complex64::new(0.0, 0.0));
        let v = v_f(&one(), Complex64::new(1.0, 0.0), 10.0);
        assert!((v.re - 1.176_190_476_190_476).abs() < 1e-14 && v.im.abs() < 1e-15);
        let s = Complex64::new(1.0, PI / 2f64.ln());
        let v = v_f(&one(), s, 10.0);
        let direct: Complex64 = [2.0f64, 3.0, 5.0, 7.0].iter().map(|p| (-s * p.ln()).exp()).sum();
        assert!((v - direct).norm() < 1e-14);
        let two = (-s * 2f64.ln()).exp();
        assert!((two - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn h_t_of_zero_function() {
        let g1 = LineSampleGrid::new(0.3, DEFAULT_TAU_STEP, 1.0).unwrap();
        assert!((h_t(&zero(), 1e4, &g1).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let g3 = LineSampleGrid::new(0.3, DEFAULT_TAU_STEP, 3.0).unwrap();
        assert!((h_t(&zero(), 1e4, &g3).unwrap() - 2.6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(LineSampleGrid::new(0.0, 0.01, 1.0).is_err());
        assert!(LineSampleGrid::new(0.1, 0.2, 1.0).is_err());
        assert!(LineSampleGrid::new(0.1, 0.01, 0.5).is_err());
    }

    #[test]
    fn h_t_grid_converges_under_refinement() {
        let x: f64 = 1e4;
        let alpha = 1.0 / x.ln();
        let coarse = h_t(&one(), x, &LineSampleGrid::new(alpha, DEFAULT_TAU_STEP, 1.0).unwrap()).unwrap();
        let fine = h_t(&one(), x, &LineSampleGrid::new(alpha, DEFAULT_TAU_STEP / 8.0, 1.0).unwrap()).unwrap();
        assert!((coarse / fine - 1.0).abs() < 0.02, "{coarse} vs {fine}");
        // At k = 0 the max sits at tau = 0, where |exp v| = exp Z-like sum at sigma.
        let at_zero = v_f(&one(), Complex64::new(1.0 + alpha, 0.0), x).re.exp();
        assert!(fine >= at_zero);
    }

    #[test]
    fn h_t_bounded_below_on_random_family() {
        let x = 3000.0;
        for seed in 0..8 {
            let f = random_unimodular(seed);
            for alpha in [1.0 / f64::ln(x), 0.2, 0.5] {
                let h = h_t(&f, x, &LineSampleGrid::new(alpha, DEFAULT_TAU_STEP, 2.0).unwrap()).unwrap();
                assert!(h >= 0.1, "seed {seed}, alpha {alpha}: {h}");
            }
        }
    }

    #[test]
    fn halasz_rhs_closed_form_for_zero() {
        let x = 1e4;
        let t = 1.0;
        let rep = halasz_rhs(&zero(), &zero(), x, t, false, DEFAULT_TAU_STEP).unwrap();
        let ll = x.ln().ln();
        assert!((rep.integral_term - 2f64.sqrt() * ll).abs() < 1e-12);
        assert!(rep.quadrature_error < 1e-12);
        let want = x / x.ln() * (2f64.sqrt() * ll + 1.0 + ll);
        assert!((rep.rhs / want - 1.0).abs() < 1e-12);
        let dropped = halasz_rhs(&zero(), &zero(), x, t, true, DEFAULT_TAU_STEP).unwrap();
        assert!(dropped.rhs < rep.rhs);
    }

    #[test]
    fn halasz_terms_decrease_in_t() {
        let f = random_unimodular(3);
        let a = halasz_rhs(&f, &one(), 2000.0, 1.0, false, DEFAULT_TAU_STEP).unwrap();
        let b = halasz_rhs(&f, &one(), 2000.0, 4.0, false, DEFAULT_TAU_STEP).unwrap();
        assert!(b.sqrt_t_term < a.sqrt_t_term && b.tail_term < a.tail_term);
        assert!(a.rhs >= a.x / a.x.ln() * a.integral_term);
    }

    #[test]
    fn halasz_requires_domination() {
        let err = halasz_rhs(&tau_rho(2.0), &one(), 100.0, 1.0, false, DEFAULT_TAU_STEP).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn m_f_examples() {
        let r = m_f(&one(), &one(), 1e4, 5.0, None).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.argmin_tau, 0.0);

        let r = m_f(&archimedean_twist(2.0), &one(), 1e5, 5.0, None).unwrap();
        assert!((r.argmin_tau - 2.0).abs() < 1e-3, "{r:?}");
        assert!(r.value.abs() < 1e-4, "{r:?}");

        let r = m_f(&prime_const(Complex64::new(-1.0, 0.0)), &one(), 1e4, 10.0, None).unwrap();
        assert!(r.value > 1.0, "{r:?}");
        let dense = (0..=20_000)
            .map(|i| -10.0 + i as f64 * 1e-3)
            .map(|tau| {
                crate::sieve::primes_up_to(10_000)
                    .iter()
                    .map(|&p| (1.0 + (tau * (p as f64).ln()).cos()) / p as f64)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(r.value <= dense + 1e-9, "{} vs dense {dense}", r.value);
    }

    #[test]
    fn m_f_nonnegative_under_domination() {
        for seed in 0..5 {
            let r = m_f(&random_unimodular(seed), &one(), 5000.0, 8.0, None).unwrap();
            assert!(r.value >= 0.0);
        }
    }

    #[test]
    fn mf_bound_shapes() {
        assert_eq!(mf_bound_from(100.0, 0.0, 4.0), 150.0);
        let big = mf_bound_from(100.0, 50.0, 1e6);
        assert!((big - 0.1).abs() < 1e-9);
        let rep = mf_bound(&one(), &one(), 1000.0, 4.0, &Streaming::default()).unwrap();
        assert_eq!(rep.mass_r, 1000.0);
        assert_eq!(rep.bound, 1500.0);
    }

    #[test]
    fn wirsing_main_term_examples() {
        let zero_at_two = PrimePowerRule::multiplicative("kill2", |p, nu| if p == 2 && nu == 1 { Complex64::new(-2.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        assert_eq!(wirsing_main_term(&zero_at_two, 1.0, 100.0).unwrap(), Complex64::new(0.0, 0.0));
        assert!(wirsing_main_term(&one(), 0.0, 100.0).is_err());
        assert!(wirsing_main_term(&one(), -1.0, 100.0).is_err());
        let v = wirsing_main_term(&one(), 1.0, 1e6).unwrap().re / 1e6;
        assert!((0.95..=1.05).contains(&v), "{v}");
    }

    #[test]
    fn wirsing_is_linear_in_the_product() {
        let f = tau_rho(0.5);
        let doubled = PrimePowerRule::multiplicative("double2", {
            let f = f.clone();
            move |p, nu| if p == 2 { f.value(p, nu) * 2.0 } else { f.value(p, nu) }
        });
        let a = wirsing_main_term(&f, 0.5, 1e4).unwrap();
        // Scaling the Euler factor at p = 2 scales the output by the same amount.
        let fac_a = euler_factor(&f, 2, 1e4);
        let fac_b = euler_factor(&doubled, 2, 1e4);
        let b = wirsing_main_term(&doubled, 0.5, 1e4).unwrap();
        assert!((b / a - fac_b / fac_a).norm() < 1e-12);
    }

    #[test]
    fn comparison_examples() {
        let s = Streaming::default();
        let r = one();
        assert_eq!(comparison_prediction(&r, &r, 1000.0, &s).unwrap(), Complex64::new(1000.0, 0.0));
        // f = r except f vanishes at p0 = 3: the ratio is 1 / (local factor of 1 at 3).
        let x = 1000.0;
        let no3 = PrimePowerRule::multiplicative("no3", |p, _| Complex64::new(if p == 3 { 0.0 } else { 1.0 }, 0.0));
        let pred = comparison_prediction(&no3, &r, x, &s).unwrap().re;
        let local: f64 = (0..7).map(|k| 3f64.powi(-k)).sum();
        assert!((pred - 1000.0 / local).abs() < 1e-10);
        let coprime = (1..=1000).filter(|n| n % 3 != 0).count() as f64;
        assert!((pred / coprime - 1.0).abs() < 0.01);
        let bad_r = PrimePowerRule::multiplicative("bad", |p, nu| Complex64::new(if p == 2 && nu == 1 { -2.0 } else { 0.0 }, 0.0));
        match comparison_ratio_product(&one(), &bad_r, 100.0) {
            Err(Error::DegenerateInput(msg)) => assert!(msg.contains("p = 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comparison_with_local_law_functions() {
        let x = 1e4;
        let e = PrimeSet::residue_class(4, 1).unwrap();
        let (z, r0) = (0.7, 1.3);
        let f = z_pow_big_omega_e(Complex64::new(z, 0.0), e.clone());
        let r = z_pow_big_omega_e(Complex64::new(r0, 0.0), e.clone());
        let pred = comparison_ratio_product(&f, &r, x).unwrap().re;
        // Truncated F(z; E) / F(r; E) with p^nu <= x sums instead of full geometric series.
        let mut want = 1.0;
        for p in primes_up_to(x as u64) {
            if e.contains(p) {
                let geo = |w: f64| {
                    let mut s = 0.0;
                    let mut q = 1.0;
                    let mut k = 0;
                    while q <= x {
                        s += w.powi(k) / q;
                        q *= p as f64;
                        k += 1;
                    }
                    s
                };
                want *= geo(z) / geo(r0);
            }
        }
        assert!((pred / want - 1.0).abs() < 1e-12);
    }

    fn params() -> HypothesisParams {
        HypothesisParams { frak_a: 0.25, frak_b: 0.5, class_a: 2.0, class_b: 5.0, rho: 1.0, eps: 0.4, delta1: 0.05 }
    }

    #[test]
    fn hypotheses_vanish_for_f_equal_r() {
        let rep = hypothesis_diagnostics(&one(), &one(), &params(), 1e5, None).unwrap();
        assert_eq!(rep.gap_sum, 0.0);
        assert_eq!(rep.large_gap_log_ratio, 0.0);
        assert_eq!(rep.large_gap_ratio, 0.0);
        assert_eq!(rep.derived.w_f, 1.0);
        assert!(rep.rho_density_ratio.is_finite() && rep.rho_density_ratio >= 0.0);
    }

    #[test]
    fn rho_density_vanishes_when_r_is_rho() {
        let p = HypothesisParams { class_a: 4.0, rho: 2.0, delta1: 0.1, ..params() };
        let two = prime_const(Complex64::new(2.0, 0.0));
        let rep = hypothesis_diagnostics(&two, &two, &p, 1e5, None).unwrap();
        assert_eq!(rep.rho_density_ratio, 0.0);
    }

    #[test]
    fn short_interval_sum_tracks_pnt() {
        let y = 1e4;
        let s = short_interval_sum(&one(), y, 0.1);
        assert!((s - 0.1 * y.ln()).abs() < 0.05, "{s}");
    }

    #[test]
    fn hypothesis_parameter_validation() {
        let bad = [
            HypothesisParams { frak_a: 0.0, ..params() },
            HypothesisParams { frak_b: 0.2, ..params() },
            HypothesisParams { class_a: 0.5, rho: 0.5, ..params() },
            HypothesisParams { rho: 3.0, ..params() },
            HypothesisParams { eps: 0.01, ..params() },
            HypothesisParams { delta1: 1.0, ..params() },
        ];
        for p in bad {
            assert!(matches!(hypothesis_diagnostics(&one(), &one(), &p, 1e5, None), Err(Error::InvalidArgument(_))), "{p:?}");
        }
    }

    #[test]
    fn pretentious_distance_examples() {
        let f = random_unimodular(1);
        assert!(pretentious_distance_sq(&f, &f, 1e4).unwrap().abs() < 1e-12);
        let d = pretentious_distance_sq(&one(), &prime_const(Complex64::new(-1.0, 0.0)), 10.0).unwrap();
        assert!((d - 2.0 * 1.176_190_476_190_476).abs() < 1e-12);
        assert!((d - 2.352381).abs() < 1e-6);
        assert!(pretentious_distance_sq(&tau_rho(2.0), &one(), 10.0).is_err());
    }

    #[test]
    fn pretentious_triangle_inequality() {
        let x = 2e4;
        for s in 0..10u64 {
            let (f, g, h) = (random_unimodular(3 * s), random_unimodular(3 * s + 1), archimedean_twist(s as f64 * 0.3));
            let d = |a: &PrimePowerRule, b: &PrimePowerRule| pretentious_distance_sq(a, b, x).unwrap().max(0.0).sqrt();
            assert!(d(&f, &h) <= d(&f, &g) + d(&g, &h) + 1e-12);
        }
    }

    #[test]
    fn gallagher_examples() {
        let one_pt = gallagher_check(&[0.0], &[Complex64::new(1.0, 0.0)], 3.0, None).unwrap();
        assert!((one_pt.lhs - 6.0).abs() < 1e-12);
        assert_eq!(one_pt.rhs, 3.0);
        assert!((one_pt.ratio() - 2.0).abs() < 1e-12);

        let two = gallagher_check(&[0.0, 10.0], &[Complex64::new(1.0, 0.0); 2], 1.0, None).unwrap();
        // int_{-1}^{1} 2 + 2 cos(20 pi t) dt = 4.
        assert!((two.lhs - 4.0).abs() < 1e-6, "{}", two.lhs);
        assert_eq!(two.rhs, 2.0);

        assert!(gallagher_check(&[1.0, 1.0], &[Complex64::new(1.0, 0.0); 2], 1.0, None).is_err());
        assert!(gallagher_check(&[1.0], &[], 1.0, None).is_err());
        assert!(gallagher_check(&[1.0], &[Complex64::new(1.0, 0.0)], 0.0, None).is_err());
    }

    #[test]
    fn gallagher_matches_closed_form_for_pairs() {
        // |a + b e(d t)|^2 integrates to 2T(|a|^2 + |b|^2) + 2 Re(a conj(b)) sin(2 pi d T)/(pi d).
        for (d, t) in [(0.3, 1.0), (1.7, 0.5), (0.05, 5.0)] {
            let (a, b) = (Complex64::new(0.7, 0.2), Complex64::new(-0.4, 0.9));
            let g = gallagher_check(&[0.0, d], &[a, b], t, Some(1e-3)).unwrap();
            let want = 2.0 * t * (a.norm_sqr() + b.norm_sqr()) + 2.0 * (a * b.conj()).re * (2.0 * PI * d * t).sin() / (PI * d);
            assert!((g.lhs - want).abs() < 1e-6 * want, "{d} {t}: {} vs {want}", g.lhs);
        }
    }

    #[test]
    fn random_gallagher_instances_are_valid() {
        for seed in 0..30 {
            let g = random_gallagher_instance(seed, 50, &[0.5, 1.0, 5.0]);
            assert!(!g.points.is_empty() && g.points.len() <= 50 && g.points.len() == g.coeffs.len());
            assert!(g.points.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(g, random_gallagher_instance(seed, 50, &[0.5, 1.0, 5.0]));
        }
    }
}
