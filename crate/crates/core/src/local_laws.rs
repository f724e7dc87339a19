//! Poisson-type local laws for the number of prime factors restricted to a
//! set `E`: histograms `N_m(x; E)`, generating sums `S(x; z, E)`, the
//! truncated product `F(z; E)`, and the crude and refined predictions.
//!
//! `S(x; r, E)` inside the refined prediction is the exact finite sum,
//! obtained from the histogram as `sum_k N_k r^k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::prime_set::PrimeSet;
use crate::sieve::{fold_segments, primes_up_to, PrimePower, Streaming, MAX_EXPONENT};
use crate::special::ln_factorial;
use crate::summation::{CompensatedSum, ComplexSum};

/// Number of points used by [`cauchy_extract`].
pub const CAUCHY_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistogramMode {
    /// `Omega(n; E)`, with multiplicity.
    #[serde(rename = "Omega")]
    BigOmega,
    /// `omega(n; E)`, distinct primes.
    #[serde(rename = "omega")]
    SmallOmega,
}

impl HistogramMode {
    fn count(self, set: &PrimeSet, factors: &[PrimePower]) -> usize {
        factors
            .iter()
            .filter(|f| set.contains(f.p))
            .map(|f| match self {
                HistogramMode::BigOmega => f.nu as usize,
                HistogramMode::SmallOmega => 1,
            })
            .sum()
    }
}

/// `E(x) = sum_{p <= x, p in E} 1/p`.
pub fn e_of_x(set: &PrimeSet, x: f64) -> f64 {
    if x < 2.0 {
        return 0.0;
    }
    primes_up_to(x.floor() as u64)
        .into_iter()
        .filter(|&p| set.contains(p))
        .map(|p| 1.0 / p as f64)
        .collect::<CompensatedSum>()
        .value()
}

/// `N_m(x; E)` for `m = 0, 1, ...`, trailing zeros trimmed.
pub fn omega_histogram(set: &PrimeSet, x: u64, mode: HistogramMode, streaming: &Streaming) -> Result<Vec<u64>> {
    const SLOTS: usize = MAX_EXPONENT as usize + 1;
    let parts = fold_segments(
        streaming,
        x,
        |_, _| [0u64; SLOTS],
        |h, _, factors| {
            h[mode.count(set, factors)] += 1;
            Ok(())
        },
    )?;
    let mut total = [0u64; SLOTS];
    for part in &parts {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    let len = total.iter().rposition(|&c| c > 0).map_or(0, |i| i + 1);
    Ok(total[..len].to_vec())
}

fn check_z(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return invalid(format!("z must be finite, got {z}"));
    }
    Ok(())
}

/// `S(x; z_j, E) = sum_{n <= x} z_j^{count(n)}` for every `z_j`, in one pass.
pub fn s_exact_many(set: &PrimeSet, zs: &[Complex64], x: u64, mode: HistogramMode, streaming: &Streaming) -> Result<Vec<Complex64>> {
    for &z in zs {
        check_z(z)?;
    }
    let parts = fold_segments(
        streaming,
        x,
        |_, _| vec![ComplexSum::new(); zs.len()],
        |acc, n, factors| {
            let k = mode.count(set, factors) as u32;
            for (a, z) in acc.iter_mut().zip(zs) {
                let term = z.powu(k);
                if !(term.re.is_finite() && term.im.is_finite()) {
                    return Err(Error::NumericDomain { n, detail: format!("{z}^{k} overflows") });
                }
                a.add(term);
            }
            Ok(())
        },
    )?;
    let mut total = vec![ComplexSum::new(); zs.len()];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    let out: Vec<Complex64> = total.iter().map(ComplexSum::value).collect();
    if let Some(z) = out.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NumericDomain { n: x, detail: format!("S(x; z) overflows ({z})") });
    }
    Ok(out)
}

/// `S(x; z, E)` by direct streaming summation.
pub fn s_exact(set: &PrimeSet, z: Complex64, x: u64, mode: HistogramMode, streaming: &Streaming) -> Result<Complex64> {
    Ok(s_exact_many(set, &[z], x, mode, streaming)?[0])
}

/// `sum_m N_m z^m`.
pub fn histogram_generating_sum(counts: &[u64], z: Complex64) -> Complex64 {
    let mut acc = ComplexSum::new();
    let mut w = Complex64::new(1.0, 0.0);
    for &c in counts {
        acc.add(w * c as f64);
        w *= z;
    }
    acc.value()
}

/// `N_m = (1/2 pi) int S(x; r e^{i t}, E) e^{-i m t} dt / r^m` on
/// [`CAUCHY_POINTS`] equally spaced points, for `m = 0..=m_max`.
pub fn cauchy_extract(set: &PrimeSet, x: u64, radius: f64, m_max: usize, mode: HistogramMode, streaming: &Streaming) -> Result<Vec<f64>> {
    if !(radius > 0.0) || !radius.is_finite() {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    let angles: Vec<f64> = (0..CAUCHY_POINTS).map(|j| 2.0 * PI * j as f64 / CAUCHY_POINTS as f64).collect();
    let zs: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(radius, t)).collect();
    let s = s_exact_many(set, &zs, x, mode, streaming)?;
    Ok((0..=m_max)
        .map(|m| {
            let acc: ComplexSum = s.iter().zip(&angles).map(|(v, &t)| v * Complex64::from_polar(1.0, -(m as f64) * t)).collect();
            acc.value().re / (CAUCHY_POINTS as f64 * radius.powi(m as i32))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FTrunc {
    /// `prod_{p <= x, p in E} (1 - z/p)^{-1}`.
    pub value: Complex64,
    /// `|(1 - z/p)^{-1} - 1|` for the largest included prime; 0 if none.
    pub last_factor_deviation: f64,
}

/// Truncation at `x` of the product `F(z; E)`.
pub fn f_trunc(set: &PrimeSet, z: Complex64, x: f64) -> Result<FTrunc> {
    check_z(z)?;
    let mut value = Complex64::new(1.0, 0.0);
    let mut last_factor_deviation = 0.0;
    for p in primes_up_to(x.max(0.0).floor() as u64) {
        if !set.contains(p) {
            continue;
        }
        let den = Complex64::new(1.0, 0.0) - z / p as f64;
        if den.norm() < 1e-15 {
            return Err(Error::DegenerateInput(format!("F(z; E) has a pole at z = {p}")));
        }
        let factor = den.inv();
        value *= factor;
        last_factor_deviation = (factor - 1.0).norm();
    }
    Ok(FTrunc { value, last_factor_deviation })
}

/// `t(x; E) = sqrt(log E(x) / E(x))`, the angular window for circle sweeps.
pub fn theta_window(e_of_x: f64) -> Result<f64> {
    if !(e_of_x > 1.0) {
        return invalid(format!("angular window needs E(x) > 1, got {e_of_x}"));
    }
    Ok((e_of_x.ln() / e_of_x).sqrt())
}

/// `[kappa E, (2 - kappa) E]`.
pub fn sarkozy_window(e_of_x: f64, kappa: f64) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return invalid(format!("kappa must lie in (0, 1), got {kappa}"));
    }
    Ok((kappa * e_of_x, (2.0 - kappa) * e_of_x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalLawReport {
    pub x: u64,
    pub set: String,
    pub mode: HistogramMode,
    pub kappa: f64,
    pub e_of_x: f64,
    /// `N_m` for `m = 0..=m_max`.
    pub counts: Vec<u64>,
    /// `x e^{-E} E^m / m!`.
    pub crude: Vec<f64>,
    /// `S(x; m/E, E) E^m / (m! e^m)`.
    pub refined: Vec<f64>,
    pub s_at_r: Vec<f64>,
    pub in_range: Vec<bool>,
}

impl LocalLawReport {
    pub const CSV_HEADER: [&'static str; 7] = ["m", "N_m", "crude", "refined", "ratio_crude", "ratio_refined", "in_sarkozy_range"];

    pub fn m_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn ratio_crude(&self, m: usize) -> f64 {
        self.counts[m] as f64 / self.crude[m]
    }

    pub fn ratio_refined(&self, m: usize) -> f64 {
        self.counts[m] as f64 / self.refined[m]
    }

    /// Indices `m` inside the window.
    pub fn window(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.counts.len()).filter(|&m| self.in_range[m])
    }
}

/// Default `m_max = ceil(3 E(x)) + 20`.
pub fn default_m_max(e_of_x: f64) -> usize {
    (3.0 * e_of_x).ceil() as usize + 20
}

pub fn local_law_report(set: &PrimeSet, x: u64, kappa: f64, mode: HistogramMode, streaming: &Streaming) -> Result<LocalLawReport> {
    let e = e_of_x(set, x as f64);
    if !(e > 0.0) {
        return Err(Error::DegenerateInput(format!("E(x) = 0 for E = {set} at x = {x}")));
    }
    let (lo, hi) = sarkozy_window(e, kappa)?;
    let mut counts = omega_histogram(set, x, mode, streaming)?;
    let m_max = default_m_max(e).max(counts.len().saturating_sub(1));
    counts.resize(m_max + 1, 0);

    let ln_x = (x as f64).ln();
    let ln_e = e.ln();
    let mut crude = Vec::with_capacity(m_max + 1);
    let mut refined = Vec::with_capacity(m_max + 1);
    let mut s_at_r = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let mf = m as f64;
        let poisson = mf * ln_e - ln_factorial(m as u64);
        crude.push((ln_x - e + poisson).exp());
        let s = histogram_generating_sum(&counts, Complex64::new(mf / e, 0.0)).re;
        s_at_r.push(s);
        refined.push(s * (poisson - mf).exp());
    }
    let in_range = (0..=m_max).map(|m| (m as f64) >= lo && (m as f64) <= hi).collect();
    Ok(LocalLawReport { x, set: set.name().to_string(), mode, kappa, e_of_x: e, counts, crude, refined, s_at_r, in_range })
}
