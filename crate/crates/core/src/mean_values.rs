//! Exact summatory quantities: `M(x; f)`, `K(x) = sum f(n) log n`,
//! `sum f(n)/n`, prime sums `Z(y; f)` and `Z_1(t)`, and truncated Euler
//! products.
//!
//! Euler products here are always finite: only prime powers `p^nu <= x`
//! enter, never the infinite product.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::PrimePowerRule;
use crate::error::{invalid, Error, Result};
use crate::sieve::{fold_segments, Primes, Streaming};
use crate::summation::{CompensatedSum, ComplexSum};

/// Partial sums of `f` at ascending checkpoints, all from one sieve pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanValueSeries {
    pub checkpoints: Vec<u64>,
    /// `M(x; f)`.
    pub m_values: Vec<Complex64>,
    /// `sum_{n <= x} f(n) log n`.
    pub k_values: Vec<Complex64>,
    /// `sum_{n <= x} f(n) / n`.
    pub log_sums: Vec<Complex64>,
}

impl MeanValueSeries {
    /// CSV header matching [`MeanValueSeries::rows`].
    pub const CSV_HEADER: [&'static str; 7] = ["x", "re_m", "im_m", "re_k", "im_k", "re_logsum", "im_logsum"];

    pub fn rows(&self) -> impl Iterator<Item = (u64, [f64; 6])> + '_ {
        (0..self.checkpoints.len()).map(move |i| {
            let (m, k, l) = (self.m_values[i], self.k_values[i], self.log_sums[i]);
            (self.checkpoints[i], [m.re, m.im, k.re, k.im, l.re, l.im])
        })
    }

    pub fn last_m(&self) -> Complex64 {
        *self.m_values.last().expect("series has at least one checkpoint")
    }
}

#[derive(Clone, Default)]
struct Bucket {
    m: ComplexSum,
    k: ComplexSum,
    l: ComplexSum,
}

impl Bucket {
    fn merge(&mut self, o: &Bucket) {
        self.m.merge(&o.m);
        self.k.merge(&o.k);
        self.l.merge(&o.l);
    }
}

fn check_checkpoints(checkpoints: &[u64]) -> Result<()> {
    if checkpoints.is_empty() {
        return invalid("at least one checkpoint is required");
    }
    if checkpoints[0] == 0 {
        return invalid("checkpoints must be >= 1");
    }
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return invalid("checkpoints must be ascending");
    }
    Ok(())
}

/// Streams `M`, `K` and the logarithmic sum of `f` up to the last checkpoint.
pub fn mean_value_series(f: &PrimePowerRule, checkpoints: &[u64], streaming: &Streaming) -> Result<MeanValueSeries> {
    check_checkpoints(checkpoints)?;
    let limit = *checkpoints.last().unwrap();
    // Bucket j collects n in (c_{j-1}, c_j].
    let per_segment = fold_segments(
        streaming,
        limit,
        |lo, _| (checkpoints.partition_point(|&c| c < lo), Vec::<(usize, Bucket)>::new()),
        |(bucket, out), n, factors| {
            while checkpoints[*bucket] < n {
                *bucket += 1;
            }
            let value = f.eval(factors)?;
            let log_n: f64 = factors.iter().map(|pp| pp.nu as f64 * (pp.p as f64).ln()).sum();
            let weighted = value * log_n;
            let harmonic = value / n as f64;
            if !(weighted.is_finite() && harmonic.is_finite()) {
                return Err(Error::NumericDomain { n, detail: format!("{} overflows", f.name()) });
            }
            if out.last().map(|(b, _)| *b) != Some(*bucket) {
                out.push((*bucket, Bucket::default()));
            }
            let slot = &mut out.last_mut().unwrap().1;
            slot.m.add(value);
            slot.k.add(weighted);
            slot.l.add(harmonic);
            Ok(())
        },
    )?;

    let mut buckets = vec![Bucket::default(); checkpoints.len()];
    for (_, seg) in per_segment {
        for (j, b) in seg {
            buckets[j].merge(&b);
        }
    }
    let mut running = Bucket::default();
    let mut series = MeanValueSeries {
        checkpoints: checkpoints.to_vec(),
        m_values: Vec::with_capacity(checkpoints.len()),
        k_values: Vec::with_capacity(checkpoints.len()),
        log_sums: Vec::with_capacity(checkpoints.len()),
    };
    for b in &buckets {
        running.merge(b);
        series.m_values.push(running.m.value());
        series.k_values.push(running.k.value());
        series.log_sums.push(running.l.value());
    }
    Ok(series)
}

/// Exact `M(x; f)`.
pub fn mean_value(f: &PrimePowerRule, x: u64, streaming: &Streaming) -> Result<Complex64> {
    Ok(mean_value_series(f, &[x.max(1)], streaming)?.last_m())
}

/// Prime sums at ascending checkpoints `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimeSumSeries {
    pub checkpoints: Vec<f64>,
    /// `Z(y; f) = sum_{p <= y} f(p) / p`.
    pub z_values: Vec<Complex64>,
    /// `Z_1(y) = sum_{p <= y} f(p) log p / p`.
    pub z1_values: Vec<Complex64>,
}

pub fn prime_sums(f: &PrimePowerRule, checkpoints: &[f64]) -> Result<PrimeSumSeries> {
    if checkpoints.iter().any(|y| !y.is_finite()) || checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return invalid("prime-sum checkpoints must be finite and ascending");
    }
    let limit = checkpoints.last().map_or(0, |&y| y.max(0.0).floor() as u64);
    let mut z = ComplexSum::new();
    let mut z1 = ComplexSum::new();
    let mut out = PrimeSumSeries {
        checkpoints: checkpoints.to_vec(),
        z_values: Vec::with_capacity(checkpoints.len()),
        z1_values: Vec::with_capacity(checkpoints.len()),
    };
    let mut idx = 0;
    for p in Primes::new(limit) {
        while idx < checkpoints.len() && checkpoints[idx] < p as f64 {
            out.z_values.push(z.value());
            out.z1_values.push(z1.value());
            idx += 1;
        }
        let v = f.at_prime(p) / p as f64;
        z.add(v);
        z1.add(v * (p as f64).ln());
    }
    while idx < checkpoints.len() {
        out.z_values.push(z.value());
        out.z1_values.push(z1.value());
        idx += 1;
    }
    Ok(out)
}

/// `Z(y; f)` at a single point.
pub fn prime_sum(f: &PrimePowerRule, y: f64) -> Result<Complex64> {
    Ok(prime_sums(f, &[y])?.z_values[0])
}

/// Local factor `sum_{nu >= 0, p^nu <= x} f(p^nu) / p^nu`.
pub fn euler_factor(f: &PrimePowerRule, p: u64, x: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let pf = p as f64;
    let mut q = pf;
    let mut nu = 1u32;
    while q <= x {
        acc += f.value(p, nu) / q;
        q *= pf;
        nu += 1;
    }
    acc
}

fn check_euler_args(f: &PrimePowerRule, x: f64) -> Result<()> {
    if !f.is_multiplicative() {
        return invalid("Euler products need a multiplicative rule");
    }
    if !(x >= 2.0) {
        return invalid(format!("Euler product needs x >= 2, got {x}"));
    }
    Ok(())
}

/// `prod_{p <= x} sum_{p^nu <= x} f(p^nu)/p^nu`, a finite product.
pub fn euler_product_truncated(f: &PrimePowerRule, x: f64) -> Result<Complex64> {
    check_euler_args(f, x)?;
    let mut acc = Complex64::new(1.0, 0.0);
    for p in Primes::new(x.floor() as u64) {
        let factor = euler_factor(f, p, x);
        if !factor.is_finite() {
            return Err(Error::NumericDomain { n: p, detail: format!("Euler factor of {} is not finite", f.name()) });
        }
        acc *= factor;
    }
    Ok(acc)
}

/// `min_{p <= x} |local factor at p|`, with the minimizing prime.
pub fn min_euler_factor(f: &PrimePowerRule, x: f64) -> Result<(f64, u64)> {
    check_euler_args(f, x)?;
    let mut best = (f64::INFINITY, 0u64);
    for p in Primes::new(x.floor() as u64) {
        let m = euler_factor(f, p, x).norm();
        if m < best.0 {
            best = (m, p);
        }
    }
    Ok(best)
}

/// Limit of `v(x)` as `x -> infinity` from three samples, assuming
/// `v = B + c_1 / log x + c_2 / log^2 x`.
pub fn extrapolate_limit(points: &[(f64, f64); 3]) -> Result<f64> {
    let rows: Vec<[f64; 4]> = points
        .iter()
        .map(|&(x, v)| {
            let u = 1.0 / x.ln();
            [1.0, u, u * u, v]
        })
        .collect();
    let mut m = [rows[0], rows[1], rows[2]];
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, pivot);
        if m[col][col].abs() < 1e-300 {
            return Err(Error::DegenerateInput("extrapolation points are not distinct".into()));
        }
        for r in 0..3 {
            if r != col {
                let k = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= k * m[col][c];
                }
            }
        }
    }
    Ok(m[0][3] / m[0][0])
}

/// Plain compensated sum helper used by other modules.
pub(crate) fn sum_over_primes<F: FnMut(u64) -> f64>(limit: u64, mut term: F) -> f64 {
    let mut acc = CompensatedSum::new();
    for p in Primes::new(limit) {
        acc.add(term(p));
    }
    acc.value()
}
