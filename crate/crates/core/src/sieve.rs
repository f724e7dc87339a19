//! Prime tables and streaming factorization of every integer up to a limit.
//!
//! Two routes are provided. [`SpfTable`] stores the smallest prime factor of
//! every `n <= limit` (4 bytes per entry, so roughly 400 MB at `10^8`).
//! [`stream_factorizations`] never holds more than one segment and handles
//! limits up to `10^12`, which is the route the summatory modules use.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Largest limit accepted by the streaming factorizer.
pub const MAX_STREAM_LIMIT: u64 = 1_000_000_000_000;

/// Largest limit accepted by [`build_spf`]; entries are `u32`.
pub const MAX_SPF_LIMIT: u64 = u32::MAX as u64;

/// Default number of integers per streaming segment.
pub const DEFAULT_SEGMENT_LENGTH: u64 = 1 << 22;

/// Exponents above this are rejected.
pub const MAX_EXPONENT: u8 = 63;

/// One factor `p^nu` of a factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub p: u64,
    pub nu: u8,
}

impl PrimePower {
    pub fn value(&self) -> u64 {
        self.p.pow(self.nu as u32)
    }
}

/// Prime-power factorization with strictly increasing primes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrimePowerFactorization {
    factors: Vec<PrimePower>,
}

impl PrimePowerFactorization {
    /// Validates ordering and exponents; primality is the caller's claim.
    pub fn new(factors: Vec<PrimePower>) -> Result<Self> {
        for w in factors.windows(2) {
            if w[0].p >= w[1].p {
                return invalid("factors must have strictly increasing primes");
            }
        }
        if let Some(f) = factors.iter().find(|f| f.nu == 0 || f.nu > MAX_EXPONENT || f.p < 2) {
            return invalid(format!("bad prime power {}^{}", f.p, f.nu));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Reconstructs `n`.
    pub fn value(&self) -> u64 {
        product(&self.factors)
    }
}

pub(crate) fn product(factors: &[PrimePower]) -> u64 {
    factors.iter().map(PrimePower::value).product()
}

/// Smallest-prime-factor table covering `2..=limit`.
#[derive(Debug, Clone)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

/// Linear sieve; every composite is written exactly once.
pub fn build_spf(limit: u64) -> Result<SpfTable> {
    if limit < 2 {
        return invalid(format!("spf limit must be >= 2, got {limit}"));
    }
    if limit > MAX_SPF_LIMIT {
        return invalid(format!("spf limit {limit} exceeds {MAX_SPF_LIMIT}; use the streaming factorizer"));
    }
    let len = limit as usize + 1;
    let mut spf: Vec<u32> = Vec::new();
    spf.try_reserve_exact(len)
        .map_err(|e| Error::Resource(format!("spf table of {len} entries: {e}")))?;
    spf.resize(len, 0);
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..len {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            if p > si {
                break;
            }
            let m = i * p as usize;
            if m >= len {
                break;
            }
            spf[m] = p;
        }
    }
    Ok(SpfTable { limit, spf })
}

impl SpfTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `None` for `n < 2` or `n > limit`.
    pub fn smallest_prime_factor(&self, n: u64) -> Option<u64> {
        if n < 2 || n > self.limit {
            None
        } else {
            Some(self.spf[n as usize] as u64)
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.smallest_prime_factor(n) == Some(n)
    }

    pub fn factorize(&self, n: u64) -> Result<PrimePowerFactorization> {
        if n == 0 || n > self.limit {
            return invalid(format!("n = {n} outside 1..={}", self.limit));
        }
        let mut factors = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            let mut nu = 0u8;
            while m % p == 0 {
                m /= p;
                nu += 1;
            }
            factors.push(PrimePower { p, nu });
        }
        Ok(PrimePowerFactorization { factors })
    }

    /// Total number of prime factors with multiplicity.
    pub fn big_omega(&self, n: u64) -> Result<u32> {
        if n == 0 || n > self.limit {
            return invalid(format!("n = {n} outside 1..={}", self.limit));
        }
        let mut m = n;
        let mut count = 0;
        while m > 1 {
            m /= self.spf[m as usize] as u64;
            count += 1;
        }
        Ok(count)
    }

    /// Primes in the table, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(move |&n| self.spf[n as usize] as u64 == n)
    }
}

fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

const PRIME_SEGMENT: u64 = 1 << 18;

/// Ascending primes up to a limit via a segmented sieve of Eratosthenes.
pub struct Primes {
    limit: u64,
    base: Vec<u64>,
    lo: u64,
    composite: Vec<bool>,
    idx: usize,
}

impl Primes {
    pub fn new(limit: u64) -> Self {
        Self {
            limit,
            base: small_primes(isqrt(limit)),
            lo: 0,
            composite: Vec::new(),
            idx: 0,
        }
    }

    fn fill_next(&mut self) -> bool {
        let lo = if self.composite.is_empty() && self.lo == 0 {
            2
        } else {
            self.lo + self.composite.len() as u64
        };
        if lo > self.limit {
            return false;
        }
        let hi = (lo + PRIME_SEGMENT - 1).min(self.limit);
        let len = (hi - lo + 1) as usize;
        self.composite.clear();
        self.composite.resize(len, false);
        for &p in &self.base {
            if p * p > hi {
                break;
            }
            let mut m = (p * p).max(lo.div_ceil(p) * p);
            while m <= hi {
                self.composite[(m - lo) as usize] = true;
                m += p;
            }
        }
        self.lo = lo;
        self.idx = 0;
        true
    }
}

impl Iterator for Primes {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            while self.idx < self.composite.len() {
                let i = self.idx;
                self.idx += 1;
                if !self.composite[i] {
                    return Some(self.lo + i as u64);
                }
            }
            if !self.fill_next() {
                return None;
            }
        }
    }
}

/// Exactly the primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    Primes::new(limit).collect()
}

/// Tiling of `[1, limit]` into consecutive segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentPlan {
    pub segment_length: u64,
    pub limit: u64,
}

impl SegmentPlan {
    pub fn new(limit: u64) -> Self {
        Self { segment_length: DEFAULT_SEGMENT_LENGTH, limit }
    }

    pub fn with_segment_length(limit: u64, segment_length: u64) -> Result<Self> {
        if segment_length == 0 {
            return invalid("segment length must be positive");
        }
        Ok(Self { segment_length, limit })
    }

    /// Inclusive `(lo, hi)` bounds, ascending.
    pub fn segments(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let len = self.segment_length;
        let limit = self.limit;
        (0..self.limit.div_ceil(len)).map(move |k| (k * len + 1, ((k + 1) * len).min(limit)))
    }

    fn validate(&self) -> Result<()> {
        if self.segment_length == 0 {
            return invalid("segment length must be positive");
        }
        if self.limit > MAX_STREAM_LIMIT {
            return invalid(format!("limit {} exceeds {MAX_STREAM_LIMIT}", self.limit));
        }
        Ok(())
    }
}

/// Segment sizing and thread count for streaming passes.
///
/// `threads == 1` is the reference mode. Partial results are always merged
/// in segment order, so other thread counts give the same bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streaming {
    pub segment_length: u64,
    pub threads: usize,
}

impl Default for Streaming {
    fn default() -> Self {
        Self { segment_length: DEFAULT_SEGMENT_LENGTH, threads: 1 }
    }
}

impl Streaming {
    pub fn plan(&self, limit: u64) -> SegmentPlan {
        SegmentPlan { segment_length: self.segment_length.max(1), limit }
    }
}

/// Factorizes a block `[lo, hi]` by sieving with primes up to `sqrt(hi)`.
struct SegmentFactorizer<'a> {
    base: &'a [u64],
    rem: Vec<u64>,
    offsets: Vec<u32>,
    primes: Vec<u32>,
    exps: Vec<u8>,
}

impl<'a> SegmentFactorizer<'a> {
    fn new(base: &'a [u64]) -> Self {
        Self { base, rem: Vec::new(), offsets: Vec::new(), primes: Vec::new(), exps: Vec::new() }
    }

    fn run<F>(&mut self, lo: u64, hi: u64, visit: &mut F) -> Result<()>
    where
        F: FnMut(u64, &[PrimePower]) -> Result<()>,
    {
        let len = (hi - lo + 1) as usize;
        let sieving: &[u64] = {
            let k = self.base.partition_point(|&p| p * p <= hi);
            &self.base[..k]
        };

        // Pass 1: distinct small prime factors per n, turned into offsets.
        self.offsets.clear();
        self.offsets.resize(len + 1, 0);
        for &p in sieving {
            let mut m = lo.div_ceil(p) * p;
            while m <= hi {
                self.offsets[(m - lo) as usize + 1] += 1;
                m += p;
            }
        }
        for i in 0..len {
            self.offsets[i + 1] += self.offsets[i];
        }
        let total = self.offsets[len] as usize;
        self.primes.clear();
        self.primes.resize(total, 0);
        self.exps.clear();
        self.exps.resize(total, 0);

        // Pass 2: divide out each sieving prime; what remains is 1 or a prime.
        self.rem.clear();
        self.rem.extend(lo..=hi);
        let mut cursor: Vec<u32> = self.offsets[..len].to_vec();
        for &p in sieving {
            let mut m = lo.div_ceil(p) * p;
            while m <= hi {
                let i = (m - lo) as usize;
                let mut r = self.rem[i];
                let mut nu = 0u8;
                while r % p == 0 {
                    r /= p;
                    nu += 1;
                }
                self.rem[i] = r;
                let c = cursor[i] as usize;
                self.primes[c] = p as u32;
                self.exps[c] = nu;
                cursor[i] += 1;
                m += p;
            }
        }

        let mut buf = [PrimePower { p: 0, nu: 0 }; 16];
        for i in 0..len {
            let (a, b) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
            let mut k = 0;
            for j in a..b {
                buf[k] = PrimePower { p: self.primes[j] as u64, nu: self.exps[j] };
                k += 1;
            }
            if self.rem[i] > 1 {
                buf[k] = PrimePower { p: self.rem[i], nu: 1 };
                k += 1;
            }
            visit(lo + i as u64, &buf[..k])?;
        }
        Ok(())
    }
}

/// Calls `visitor(n, factors)` once for each `n` in `[1, plan.limit]`,
/// ascending. The first visitor error stops the pass and is returned.
pub fn stream_factorizations<F>(plan: &SegmentPlan, mut visitor: F) -> Result<()>
where
    F: FnMut(u64, &[PrimePower]) -> Result<()>,
{
    plan.validate()?;
    let base = small_primes(isqrt(plan.limit));
    let mut fz = SegmentFactorizer::new(&base);
    for (lo, hi) in plan.segments() {
        fz.run(lo, hi, &mut visitor)?;
    }
    Ok(())
}

/// Folds every `(n, factors)` into one state per segment and returns the
/// states in segment order. The caller merges them in that order.
pub fn fold_segments<S, I, F>(streaming: &Streaming, limit: u64, init: I, fold: F) -> Result<Vec<S>>
where
    S: Send,
    I: Fn(u64, u64) -> S + Sync,
    F: Fn(&mut S, u64, &[PrimePower]) -> Result<()> + Sync,
{
    let plan = streaming.plan(limit);
    plan.validate()?;
    let base = small_primes(isqrt(limit));
    let segments: Vec<(u64, u64)> = plan.segments().collect();
    let work = |&(lo, hi): &(u64, u64)| -> Result<S> {
        let mut state = init(lo, hi);
        let mut fz = SegmentFactorizer::new(&base);
        fz.run(lo, hi, &mut |n, f| fold(&mut state, n, f))?;
        Ok(state)
    };
    if streaming.threads <= 1 || segments.len() <= 1 {
        let mut out = Vec::with_capacity(segments.len());
        let mut fz = SegmentFactorizer::new(&base);
        for &(lo, hi) in &segments {
            let mut state = init(lo, hi);
            fz.run(lo, hi, &mut |n, f| fold(&mut state, n, f))?;
            out.push(state);
        }
        return Ok(out);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(streaming.threads)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    pool.install(|| segments.par_iter().map(work).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(mut n: u64) -> Vec<PrimePower> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                let mut nu = 0;
                while n % p == 0 {
                    n /= p;
                    nu += 1;
                }
                out.push(PrimePower { p, nu });
            }
            p += 1;
        }
        if n > 1 {
            out.push(PrimePower { p: n, nu: 1 });
        }
        out
    }

    fn is_prime_td(n: u64) -> bool {
        n >= 2 && trial_division(n) == vec![PrimePower { p: n, nu: 1 }]
    }

    #[test]
    fn spf_small_tables() {
        let t = build_spf(10).unwrap();
        let expect = [(2, 2), (3, 3), (4, 2), (5, 5), (6, 2), (7, 7), (8, 2), (9, 3), (10, 2)];
        for (n, p) in expect {
            assert_eq!(t.smallest_prime_factor(n), Some(p));
        }
        assert_eq!(build_spf(2).unwrap().smallest_prime_factor(2), Some(2));
        assert_eq!(build_spf(49).unwrap().smallest_prime_factor(49), Some(7));
    }

    #[test]
    fn spf_rejects_small_limit() {
        assert!(matches!(build_spf(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_spf(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn spf_invariants_hold() {
        let t = build_spf(20_000).unwrap();
        for n in 2..=20_000u64 {
            let p = t.smallest_prime_factor(n).unwrap();
            assert!(is_prime_td(p) && n % p == 0);
            assert_eq!(p == n, is_prime_td(n));
            assert!(p * p <= n || p == n);
        }
    }

    #[test]
    fn factorize_examples() {
        let t = build_spf(100).unwrap();
        assert_eq!(t.factorize(12).unwrap().factors(), &[PrimePower { p: 2, nu: 2 }, PrimePower { p: 3, nu: 1 }]);
        assert!(t.factorize(1).unwrap().is_empty());
        assert_eq!(t.factorize(97).unwrap().factors(), &[PrimePower { p: 97, nu: 1 }]);
        assert!(t.factorize(0).is_err());
        assert!(t.factorize(101).is_err());
    }

    #[test]
    fn factorize_matches_trial_division() {
        let t = build_spf(100_000).unwrap();
        for n in 1..=100_000u64 {
            assert_eq!(t.factorize(n).unwrap().factors(), trial_division(n).as_slice(), "n = {n}");
        }
    }

    #[test]
    fn primes_examples() {
        assert_eq!(primes_up_to(10), vec![2, 3, 5, 7]);
        assert!(primes_up_to(1).is_empty());
        assert!(primes_up_to(0).is_empty());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
    }

    #[test]
    fn prime_stream_matches_spf_across_segment_edges() {
        let limit = 3 * PRIME_SEGMENT + 17;
        let t = build_spf(limit).unwrap();
        let a: Vec<u64> = t.primes().collect();
        assert_eq!(a, primes_up_to(limit));
    }

    #[test]
    fn stream_visits_small_limits() {
        let mut seen = Vec::new();
        stream_factorizations(&SegmentPlan::new(6), |n, f| {
            seen.push((n, f.to_vec()));
            Ok(())
        })
        .unwrap();
        let expect: Vec<(u64, Vec<PrimePower>)> = (1..=6).map(|n| (n, trial_division(n))).collect();
        assert_eq!(seen, expect);

        let mut count = 0;
        stream_factorizations(&SegmentPlan::new(1), |n, f| {
            assert_eq!(n, 1);
            assert!(f.is_empty());
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 1);
    }

    #[test]
    fn stream_counts_and_reconstructs() {
        let plan = SegmentPlan::with_segment_length(100_000, 4096).unwrap();
        let mut next = 1u64;
        stream_factorizations(&plan, |n, f| {
            assert_eq!(n, next);
            next += 1;
            assert_eq!(product(f), n);
            assert_eq!(f, trial_division(n).as_slice());
            Ok(())
        })
        .unwrap();
        assert_eq!(next - 1, 100_000);
    }

    #[test]
    fn stream_handles_large_offsets() {
        // A window far from the origin exercises leftover large primes.
        let lo = 999_999_000_000u64;
        let base = small_primes(isqrt(lo + 2000));
        let mut fz = SegmentFactorizer::new(&base);
        fz.run(lo, lo + 2000, &mut |n, f| {
            assert_eq!(product(f), n);
            for w in f.windows(2) {
                assert!(w[0].p < w[1].p);
            }
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn visitor_error_aborts() {
        let mut last = 0;
        let r = stream_factorizations(&SegmentPlan::new(1000), |n, _| {
            last = n;
            if n == 77 {
                Err(Error::DegenerateInput("stop".into()))
            } else {
                Ok(())
            }
        });
        assert!(r.is_err());
        assert_eq!(last, 77);
    }

    #[test]
    fn fold_segments_threads_agree() {
        let count = |s: &Streaming| -> Vec<u64> {
            fold_segments(s, 50_000, |_, _| 0u64, |acc, _, f| {
                *acc += f.iter().map(|pp| pp.nu as u64).sum::<u64>();
                Ok(())
            })
            .unwrap()
        };
        let a = count(&Streaming { segment_length: 3000, threads: 1 });
        let b = count(&Streaming { segment_length: 3000, threads: 3 });
        assert_eq!(a, b);
        assert_eq!(a.len(), 17);
    }

    #[test]
    fn segment_plan_tiles() {
        let plan = SegmentPlan::with_segment_length(10, 4).unwrap();
        let segs: Vec<_> = plan.segments().collect();
        assert_eq!(segs, vec![(1, 4), (5, 8), (9, 10)]);
        assert_eq!(SegmentPlan::new(0).segments().count(), 0);
        assert!(SegmentPlan::with_segment_length(10, 0).is_err());
    }

    #[test]
    fn factorization_validation() {
        assert!(PrimePowerFactorization::new(vec![PrimePower { p: 3, nu: 1 }, PrimePower { p: 2, nu: 1 }]).is_err());
        assert!(PrimePowerFactorization::new(vec![PrimePower { p: 2, nu: 64 }]).is_err());
        let f = PrimePowerFactorization::new(vec![PrimePower { p: 2, nu: 3 }, PrimePower { p: 5, nu: 1 }]).unwrap();
        assert_eq!(f.value(), 40);
    }
}
