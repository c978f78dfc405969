//! Prime-tools: consecutive-prime extraction from the first wheel
//! block, the square-in-first-block inequality, and the chi-interval
//! statistics.

use crate::error::{Error, Result};
use crate::wheel::{first_primes, nth_prime, pattern_build, WheelLevel, MAX_BUILD_K};
use serde::Serialize;

/// Default ceiling for the reference sieve.
pub const SIEVE_BUDGET: u64 = 1_000_000_000;

/// Plain sieve of Eratosthenes over odd numbers; the independent oracle
/// for everything in this module.
pub fn reference_sieve(limit: u64) -> Result<Vec<u64>> {
    if limit > SIEVE_BUDGET {
        return Err(Error::resource(format!(
            "sieve limit {limit} above budget {SIEVE_BUDGET}"
        )));
    }
    if limit < 2 {
        return Ok(Vec::new());
    }
    let n = limit as usize;
    // odd composites only; index i represents 2i+1
    let half = n.div_ceil(2);
    let mut struck = vec![false; half];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !struck[i] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j < half {
                struck[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2u64];
    primes.extend(
        (1..half)
            .filter(|&i| !struck[i])
            .map(|i| (2 * i + 1) as u64),
    );
    Ok(primes)
}

/// pi(x) over a sorted prime list that covers x.
pub fn pi_of(primes: &[u64], x: u64) -> u64 {
    primes.partition_point(|&p| p <= x) as u64
}

/// Primes extracted from one window of the wheel's first block.
#[derive(Debug, Clone, Serialize)]
pub struct PrimeWindow {
    pub n: usize,
    pub lo: u64,
    pub hi: u64,
    pub excluded: u64,
    pub primes: Vec<u64>,
    pub verified_against_sieve: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub below_paper_range: bool,
}

/// Survivors q of the level-(n-1) wheel with p_n < q < p_n * p_{n+1},
/// dropping q = p_n^2, checked against the reference sieve. Survivors
/// are generated by streaming the gap pattern, not by trial division.
pub fn consecutive_primes_from_block(n: usize) -> Result<PrimeWindow> {
    if n < 2 {
        return Err(Error::usage("window extraction requires n >= 2"));
    }
    if n - 1 > MAX_BUILD_K {
        return Err(Error::resource(format!(
            "window extraction feasible through n = {}",
            MAX_BUILD_K + 1
        )));
    }
    let p_n = nth_prime(n);
    let p_next = nth_prime(n + 1);
    let lo = p_n;
    let hi = p_n * p_next;
    let excluded = p_n * p_n;

    let pattern = pattern_build(&WheelLevel::new(n - 1)?)?;
    let mut survivors = Vec::new();
    let mut pos: u64 = 1;
    'outer: loop {
        for &g in pattern.gaps() {
            pos += g as u64;
            if pos >= hi {
                break 'outer;
            }
            if pos > lo && pos != excluded {
                survivors.push(pos);
            }
        }
    }

    let sieve = reference_sieve(hi)?;
    let expected: Vec<u64> = sieve
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    let verified = survivors == expected;

    Ok(PrimeWindow {
        n,
        lo,
        hi,
        excluded,
        primes: survivors,
        verified_against_sieve: verified,
        below_paper_range: n == 2,
    })
}

/// Truth of p_n (p_n - 1) < product of the first n-1 primes, i.e.
/// whether p_n^2 falls inside the first block of the level below.
pub fn square_in_first_block(n: usize) -> Result<bool> {
    if n < 2 {
        return Err(Error::usage("requires n >= 2"));
    }
    let p_n = nth_prime(n) as u128;
    let threshold = p_n * (p_n - 1);
    let mut product: u128 = 1;
    for p in first_primes(n - 1) {
        product = product.saturating_mul(p as u128);
        if product > threshold {
            return Ok(true);
        }
    }
    Ok(product > threshold)
}

/// Largest prime below p_n^2.
pub fn q_n(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::usage("requires n >= 2"));
    }
    let p_n = nth_prime(n);
    let sieve = reference_sieve(p_n * p_n - 1)?;
    Ok(*sieve.last().expect("primes below p_n^2 always exist"))
}

/// Interval statistics for width c over m intervals [(k-1)c, kc).
#[derive(Debug, Clone, Serialize)]
pub struct IntervalStats {
    pub c: u64,
    pub m: u64,
    pub chi_sum: u64,
    pub pi_mc: u64,
    /// None when the degenerate c = 1 case excludes the bound.
    pub lower_ok: Option<bool>,
    /// None unless c >= 3 (the theorem's hypothesis).
    pub upper_ok: Option<bool>,
}

impl IntervalStats {
    pub fn bounds_hold(&self) -> bool {
        self.lower_ok.unwrap_or(true) && self.upper_ok.unwrap_or(true)
    }

    pub fn csv_header() -> &'static str {
        "c,m,chi_sum,pi_mc,lower_ok,upper_ok"
    }

    pub fn csv_row(&self) -> String {
        let fmt = |v: Option<bool>| match v {
            Some(true) => "true",
            Some(false) => "false",
            None => "skipped",
        };
        format!(
            "{},{},{},{},{},{}",
            self.c,
            self.m,
            self.chi_sum,
            self.pi_mc,
            fmt(self.lower_ok),
            fmt(self.upper_ok)
        )
    }
}

fn stats_from(c: u64, m: u64, chi_sum: u64, pi_mc: u64) -> IntervalStats {
    // lower bound: pi(mc)/c <= chi_sum, evaluated without rounding
    let lower = pi_mc <= c * chi_sum;
    let upper = chi_sum < pi_mc;
    IntervalStats {
        c,
        m,
        chi_sum,
        pi_mc,
        lower_ok: if c >= 2 { Some(lower) } else { None },
        upper_ok: if c >= 3 { Some(upper) } else { None },
    }
}

/// Count intervals containing at least one prime and compare against
/// pi(mc) per the two-sided bound.
pub fn chi_interval_sum(c: u64, m: u64) -> Result<IntervalStats> {
    if c < 1 || m < 1 {
        return Err(Error::usage("c and m must be positive"));
    }
    let mc = c.checked_mul(m).ok_or_else(|| Error::usage("mc overflows"))?;
    let primes = reference_sieve(mc)?;
    let mut chi_sum = 0u64;
    let mut idx = 0usize;
    for k in 1..=m {
        let (lo, hi) = ((k - 1) * c, k * c);
        while idx < primes.len() && primes[idx] < lo {
            idx += 1;
        }
        if idx < primes.len() && primes[idx] < hi {
            chi_sum += 1;
        }
    }
    Ok(stats_from(c, m, chi_sum, pi_of(&primes, mc)))
}

/// Sweep report: per-(c, m) bound status with violations collected.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub checked: u64,
    pub violations: Vec<IntervalStats>,
}

/// Evaluate the bounds for every 1 <= m <= m_max for each width.
/// One sieve per width; chi_sum and pi accumulate incrementally.
pub fn chi_bounds_sweep(c_list: &[u64], m_max: u64) -> Result<SweepReport> {
    let mut checked = 0u64;
    let mut violations = Vec::new();
    for &c in c_list {
        if c < 1 || m_max < 1 {
            return Err(Error::usage("c and m_max must be positive"));
        }
        let limit = c
            .checked_mul(m_max)
            .ok_or_else(|| Error::usage("c * m_max overflows"))?;
        let primes = reference_sieve(limit)?;
        let mut chi_sum = 0u64;
        let mut chi_idx = 0usize;
        let mut pi_idx = 0usize;
        for m in 1..=m_max {
            let (lo, hi) = ((m - 1) * c, m * c);
            while chi_idx < primes.len() && primes[chi_idx] < lo {
                chi_idx += 1;
            }
            if chi_idx < primes.len() && primes[chi_idx] < hi {
                chi_sum += 1;
            }
            while pi_idx < primes.len() && primes[pi_idx] <= hi {
                pi_idx += 1;
            }
            let stats = stats_from(c, m, chi_sum, pi_idx as u64);
            checked += 1;
            if !stats.bounds_hold() {
                violations.push(stats);
            }
        }
    }
    Ok(SweepReport { checked, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_basics() {
        assert_eq!(reference_sieve(10).unwrap(), vec![2, 3, 5, 7]);
        let to30 = reference_sieve(30).unwrap();
        assert_eq!(to30.len(), 10);
        assert_eq!(*to30.last().unwrap(), 29);
        assert_eq!(reference_sieve(1).unwrap(), Vec::<u64>::new());
        assert_eq!(reference_sieve(2).unwrap(), vec![2]);
    }

    #[test]
    fn pi_210() {
        let primes = reference_sieve(210).unwrap();
        assert_eq!(pi_of(&primes, 210), 46);
        // cross-check by independent trial division
        let by_trial = (2u64..=210)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .count() as u64;
        assert_eq!(by_trial, 46);
    }

    #[test]
    fn window_n3() {
        let w = consecutive_primes_from_block(3).unwrap();
        assert_eq!(w.lo, 5);
        assert_eq!(w.hi, 35);
        assert_eq!(w.excluded, 25);
        assert_eq!(w.primes, vec![7, 11, 13, 17, 19, 23, 29, 31]);
        assert!(w.verified_against_sieve);
        assert!(!w.below_paper_range);
    }

    #[test]
    fn window_n2_flagged() {
        let w = consecutive_primes_from_block(2).unwrap();
        assert_eq!(w.primes, vec![5, 7, 11, 13]);
        assert!(w.verified_against_sieve);
        assert!(w.below_paper_range);
    }

    #[test]
    fn window_n4() {
        let w = consecutive_primes_from_block(4).unwrap();
        let sieve = reference_sieve(77).unwrap();
        let expected: Vec<u64> = sieve.into_iter().filter(|&p| p > 7 && p < 77).collect();
        assert_eq!(w.primes, expected);
        assert!(w.verified_against_sieve);
    }

    #[test]
    fn window_guards() {
        assert!(consecutive_primes_from_block(1).is_err());
        assert!(consecutive_primes_from_block(11).is_err());
    }

    #[test]
    fn square_inequality() {
        assert!(square_in_first_block(5).unwrap()); // 110 < 210
        assert!(!square_in_first_block(4).unwrap()); // 42 > 30
        assert!(!square_in_first_block(2).unwrap());
        assert!(!square_in_first_block(3).unwrap());
        assert!(square_in_first_block(10).unwrap());
        assert!(square_in_first_block(25).unwrap());
        assert!(square_in_first_block(1).is_err());
    }

    #[test]
    fn q_n_values() {
        assert_eq!(q_n(3).unwrap(), 23);
        assert_eq!(q_n(4).unwrap(), 47);
        assert_eq!(q_n(2).unwrap(), 7);
    }

    #[test]
    fn chi_examples() {
        let s = chi_interval_sum(3, 2).unwrap();
        assert_eq!(s.chi_sum, 2);
        assert_eq!(s.pi_mc, 3);
        assert_eq!(s.lower_ok, Some(true));
        assert_eq!(s.upper_ok, Some(true));

        let s = chi_interval_sum(5, 1).unwrap();
        assert_eq!(s.chi_sum, 1);
        assert_eq!(s.pi_mc, 3);
        assert!(s.bounds_hold());

        let s = chi_interval_sum(2, 10).unwrap();
        assert_eq!(s.upper_ok, None);
        assert_eq!(s.lower_ok, Some(true));

        let s = chi_interval_sum(1, 5).unwrap();
        assert_eq!(s.lower_ok, None);
        assert_eq!(s.upper_ok, None);
    }

    #[test]
    fn chi_csv_row() {
        let s = chi_interval_sum(2, 10).unwrap();
        assert_eq!(s.csv_row(), format!("2,10,{},{},true,skipped", s.chi_sum, s.pi_mc));
    }

    #[test]
    fn sweep_small_clean() {
        let report = chi_bounds_sweep(&[3, 10], 500).unwrap();
        assert_eq!(report.checked, 1000);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn sweep_matches_pointwise() {
        let report = chi_bounds_sweep(&[7], 40).unwrap();
        assert!(report.violations.is_empty());
        // spot-check the incremental path against the direct one
        let direct = chi_interval_sum(7, 40).unwrap();
        assert_eq!(direct.lower_ok, Some(true));
        assert_eq!(direct.upper_ok, Some(true));
    }

    #[test]
    fn chi_monotone_in_m() {
        let mut last = 0;
        for m in 1..=50 {
            let s = chi_interval_sum(4, m).unwrap();
            assert!(s.chi_sum >= last);
            last = s.chi_sum;
        }
    }
}
