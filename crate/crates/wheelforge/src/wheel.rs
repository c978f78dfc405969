//! Wheel-core: gap patterns of integers coprime to the first k primes.
//!
//! The pattern for a level is built two independent ways: a direct sieve
//! over one full period (the oracle), and the recursive
//! replicate-delete-merge procedure. Both must agree wherever both are
//! defined.

use crate::bits::Bitset;
use crate::error::{Error, Result};
use serde::Serialize;

/// Default cap on the basis size. L for k=14 (p14 = 43) is
/// 13082761331670030, comfortably below 2^63.
pub const DEFAULT_CAP_K: usize = 14;
/// Hard ceiling; overrides may lower the cap but never raise it past this.
pub const MAX_CAP_K: usize = 14;
/// Largest level whose full gap list is materialized in memory
/// (T9 = 36,495,360 gaps).
pub const MAX_BUILD_K: usize = 9;
/// Largest level the direct sieve oracle will scan in one allocation.
pub const MAX_ORACLE_K: usize = 9;

/// First `n` primes by trial division; n is always tiny here.
pub fn first_primes(n: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(n);
    let mut cand = 2u64;
    while primes.len() < n {
        if primes.iter().take_while(|&&p| p * p <= cand).all(|&p| !cand.is_multiple_of(p)) {
            primes.push(cand);
        }
        cand += 1;
    }
    primes
}

/// The `n`-th prime, 1-based.
pub fn nth_prime(n: usize) -> u64 {
    first_primes(n)[n - 1]
}

/// A wheel basis: the first k primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WheelLevel {
    k: usize,
    primes: Vec<u64>,
}

impl WheelLevel {
    pub fn new(k: usize) -> Result<Self> {
        Self::with_cap(k, DEFAULT_CAP_K)
    }

    /// `cap` itself is clamped to the hard ceiling.
    pub fn with_cap(k: usize, cap: usize) -> Result<Self> {
        let cap = cap.min(MAX_CAP_K);
        if k == 0 {
            return Err(Error::usage("level k must be at least 1"));
        }
        if k > cap {
            return Err(Error::resource(format!(
                "level k={k} exceeds cap {cap}"
            )));
        }
        Ok(WheelLevel {
            k,
            primes: first_primes(k),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// p_k, the largest basis prime.
    pub fn last_prime(&self) -> u64 {
        *self.primes.last().unwrap()
    }

    /// p_{k-1}; requires k >= 2.
    pub fn second_last_prime(&self) -> Result<u64> {
        if self.k < 2 {
            return Err(Error::usage("needs k >= 2"));
        }
        Ok(self.primes[self.k - 2])
    }

    /// The level one below this one; requires k >= 2.
    pub fn parent(&self) -> Result<WheelLevel> {
        if self.k < 2 {
            return Err(Error::usage("level 1 has no parent"));
        }
        Ok(WheelLevel {
            k: self.k - 1,
            primes: self.primes[..self.k - 1].to_vec(),
        })
    }
}

/// L = product of the basis primes. Exact; the cap keeps it below 2^63.
pub fn primorial(level: &WheelLevel) -> u64 {
    level.primes.iter().product()
}

/// T = product of (p_i - 1); the number of gaps in one period.
pub fn euler_period(level: &WheelLevel) -> u64 {
    level.primes.iter().map(|p| p - 1).product()
}

/// One period of survivor gaps for a level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    level: WheelLevel,
    gaps: Vec<u32>,
    period: u64,
    length: u64,
}

impl Pattern {
    fn from_gaps(level: WheelLevel, gaps: Vec<u32>) -> Self {
        let period = gaps.len() as u64;
        let length = gaps.iter().map(|&g| g as u64).sum();
        Pattern {
            level,
            gaps,
            period,
            length,
        }
    }

    /// Wrap an arbitrary gap list as a pattern. Period and length are
    /// recomputed from the gaps; nothing else is trusted. Intended for
    /// fault injection and test fixtures.
    pub fn from_raw_parts(level: WheelLevel, gaps: Vec<u32>) -> Self {
        Pattern::from_gaps(level, gaps)
    }

    pub fn level(&self) -> &WheelLevel {
        &self.level
    }

    pub fn gaps(&self) -> &[u32] {
        &self.gaps
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn max_gap(&self) -> u32 {
        self.gaps.iter().copied().max().unwrap_or(0)
    }

    /// Serializable form; `with_gaps = false` drops the gap list for
    /// levels too large to print.
    pub fn to_doc(&self, with_gaps: bool) -> PatternDoc {
        PatternDoc {
            k: self.level.k(),
            primes: self.level.primes().to_vec(),
            period: self.period,
            length: self.length,
            gaps: if with_gaps {
                Some(self.gaps.clone())
            } else {
                None
            },
        }
    }
}

/// JSON surface for a pattern.
#[derive(Debug, Serialize)]
pub struct PatternDoc {
    pub k: usize,
    pub primes: Vec<u64>,
    pub period: u64,
    pub length: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<u32>>,
}

/// Direct construction: strike multiples of every basis prime over
/// [1, L+1], collect survivors, and difference them. Independent of the
/// recursive path; used as its oracle.
pub fn pattern_sieve_oracle(level: &WheelLevel) -> Result<Pattern> {
    if level.k() > MAX_ORACLE_K {
        return Err(Error::resource(format!(
            "sieve oracle capped at k <= {MAX_ORACLE_K}"
        )));
    }
    let len = primorial(level);
    // positions 1..=L+1; index x-1
    let n = (len + 1) as usize;
    let mut struck = Bitset::new(n);
    for &p in level.primes() {
        let mut m = p;
        while m <= len + 1 {
            struck.set((m - 1) as usize);
            m += p;
        }
    }
    let mut gaps: Vec<u32> = Vec::with_capacity(euler_period(level) as usize);
    let mut prev: u64 = 1; // 1 always survives
    for x in 2..=len + 1 {
        if !struck.get((x - 1) as usize) {
            gaps.push((x - prev) as u32);
            prev = x;
        }
    }
    debug_assert_eq!(prev, len + 1);
    Ok(Pattern::from_gaps(level.clone(), gaps))
}

/// One induction step: replicate the previous pattern p_next times,
/// delete the survivors at p_next * h (h a survivor of the previous
/// first block), and merge each deleted survivor's two adjacent gaps.
pub fn pattern_refine(prev: &Pattern, p_next: u64) -> Result<Pattern> {
    let k_next = prev.level.k() + 1;
    let next_level = WheelLevel::new(k_next)?;
    if next_level.last_prime() != p_next {
        return Err(Error::usage(format!(
            "expected successor prime {} for level {}, got {p_next}",
            next_level.last_prime(),
            k_next
        )));
    }
    let t_prev = prev.period;
    let out_len = (p_next - 1) * t_prev;
    if out_len > (usize::MAX / 8) as u64 {
        return Err(Error::resource("refined pattern too large"));
    }
    let mut gaps: Vec<u32> = Vec::with_capacity(out_len as usize);

    // Walk survivors of the replicated block with a two-pointer merge
    // against the ascending deletion targets p_next * h.
    let mut target_walk = SurvivorWalk::new(prev);
    let mut target = p_next * target_walk.pos();
    let mut targets_left = t_prev;

    let mut pos: u64 = 1;
    let mut carry: u32 = 0;
    for _copy in 0..p_next {
        for &g in prev.gaps.iter() {
            pos += g as u64;
            if targets_left > 0 && pos == target {
                carry += g;
                targets_left -= 1;
                if targets_left > 0 {
                    target_walk.advance();
                    target = p_next * target_walk.pos();
                }
            } else {
                gaps.push(carry + g);
                carry = 0;
            }
        }
    }
    debug_assert_eq!(targets_left, 0);
    debug_assert_eq!(carry, 0); // L+1 itself is never a deletion target
    debug_assert_eq!(gaps.len() as u64, out_len);
    Ok(Pattern::from_gaps(next_level, gaps))
}

/// Streams survivor positions 1 = x1 < x2 < ... of a pattern's blocks.
struct SurvivorWalk<'a> {
    gaps: &'a [u32],
    idx: usize,
    pos: u64,
}

impl<'a> SurvivorWalk<'a> {
    fn new(pattern: &'a Pattern) -> Self {
        SurvivorWalk {
            gaps: &pattern.gaps,
            idx: 0,
            pos: 1,
        }
    }

    fn pos(&self) -> u64 {
        self.pos
    }

    fn advance(&mut self) {
        self.pos += self.gaps[self.idx] as u64;
        self.idx = (self.idx + 1) % self.gaps.len();
    }
}

/// Build the pattern by induction from the k=1 base {2}.
pub fn pattern_build(level: &WheelLevel) -> Result<Pattern> {
    if level.k() > MAX_BUILD_K {
        return Err(Error::resource(format!(
            "in-memory pattern build capped at k <= {MAX_BUILD_K}; use the scan path"
        )));
    }
    let mut pattern = Pattern::from_gaps(WheelLevel::new(1)?, vec![2]);
    for i in 1..level.k() {
        let p_next = level.primes()[i];
        pattern = pattern_refine(&pattern, p_next)?;
    }
    Ok(pattern)
}

/// Structural findings for one pattern. Data, not an exception: every
/// check runs even after an earlier one fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub period_matches: bool,
    pub length_matches: bool,
    pub palindrome_holds: bool,
    pub last_gap_is_2: bool,
    pub central_gap_is_4: bool,
    pub all_gaps_even: bool,
}

impl VerificationReport {
    pub fn all_hold(&self) -> bool {
        self.period_matches
            && self.length_matches
            && self.palindrome_holds
            && self.last_gap_is_2
            && self.central_gap_is_4
            && self.all_gaps_even
    }
}

/// Check the stated structure: period and length formulas, mirror
/// symmetry of the first T-1 gaps, last gap 2, central gap 4, evenness.
/// Defined for k >= 2.
pub fn verify_pattern(pattern: &Pattern) -> Result<VerificationReport> {
    if pattern.level.k() < 2 {
        return Err(Error::usage("verification defined for k >= 2"));
    }
    let gaps = &pattern.gaps;
    let t = gaps.len();
    let period_matches = pattern.period == euler_period(&pattern.level);
    let length_matches = pattern.length == primorial(&pattern.level);
    let body = &gaps[..t - 1];
    let palindrome_holds = body.iter().eq(body.iter().rev());
    let last_gap_is_2 = gaps[t - 1] == 2;
    let central_gap_is_4 = body[(t - 2) / 2] == 4;
    let all_gaps_even = gaps.iter().all(|g| g % 2 == 0);
    Ok(VerificationReport {
        period_matches,
        length_matches,
        palindrome_holds,
        last_gap_is_2,
        central_gap_is_4,
        all_gaps_even,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes_basic() {
        assert_eq!(first_primes(6), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn level_caps() {
        assert!(WheelLevel::new(0).is_err());
        assert!(matches!(WheelLevel::new(15), Err(Error::Resource(_))));
        assert!(WheelLevel::new(14).is_ok());
        // a configured cap may lower but not raise the ceiling
        assert!(matches!(
            WheelLevel::with_cap(14, 100),
            Ok(ref l) if l.k() == 14
        ));
        assert!(WheelLevel::with_cap(11, 10).is_err());
    }

    #[test]
    fn primorial_values() {
        assert_eq!(primorial(&WheelLevel::new(1).unwrap()), 2);
        assert_eq!(primorial(&WheelLevel::new(2).unwrap()), 6);
        assert_eq!(primorial(&WheelLevel::new(4).unwrap()), 210);
    }

    #[test]
    fn euler_period_values() {
        assert_eq!(euler_period(&WheelLevel::new(2).unwrap()), 2);
        assert_eq!(euler_period(&WheelLevel::new(3).unwrap()), 8);
        assert_eq!(euler_period(&WheelLevel::new(4).unwrap()), 48);
    }

    #[test]
    fn oracle_small_levels() {
        let p2 = pattern_sieve_oracle(&WheelLevel::new(2).unwrap()).unwrap();
        assert_eq!(p2.gaps(), &[4, 2]);
        let p3 = pattern_sieve_oracle(&WheelLevel::new(3).unwrap()).unwrap();
        assert_eq!(p3.gaps(), &[6, 4, 2, 4, 2, 4, 6, 2]);
        let p4 = pattern_sieve_oracle(&WheelLevel::new(4).unwrap()).unwrap();
        assert_eq!(p4.period(), 48);
        assert_eq!(&p4.gaps()[..8], &[10, 2, 4, 2, 4, 6, 2, 6]);
    }

    #[test]
    fn refine_base_step() {
        // {2} refined by 3 gives {4,2}; checked against a brute-force
        // sieve over [1,7] with primes {2,3}: survivors 1,5,7.
        let base = Pattern::from_gaps(WheelLevel::new(1).unwrap(), vec![2]);
        let p2 = pattern_refine(&base, 3).unwrap();
        assert_eq!(p2.gaps(), &[4, 2]);
    }

    #[test]
    fn refine_matches_worked_example() {
        let p2 = pattern_build(&WheelLevel::new(2).unwrap()).unwrap();
        let p3 = pattern_refine(&p2, 5).unwrap();
        assert_eq!(p3.gaps(), &[6, 4, 2, 4, 2, 4, 6, 2]);
        let p4 = pattern_refine(&p3, 7).unwrap();
        assert_eq!(p4.gaps(), pattern_sieve_oracle(p4.level()).unwrap().gaps());
    }

    #[test]
    fn refine_rejects_wrong_successor() {
        let p2 = pattern_build(&WheelLevel::new(2).unwrap()).unwrap();
        assert!(matches!(pattern_refine(&p2, 7), Err(Error::Usage(_))));
    }

    #[test]
    fn build_counts() {
        for k in 1..=7 {
            let level = WheelLevel::new(k).unwrap();
            let p = pattern_build(&level).unwrap();
            assert_eq!(p.period(), euler_period(&level));
            assert_eq!(p.length(), primorial(&level));
        }
    }

    #[test]
    fn build_k6_max_gap() {
        let p = pattern_build(&WheelLevel::new(6).unwrap()).unwrap();
        assert_eq!(p.max_gap(), 22);
    }

    #[test]
    fn verify_all_true_small() {
        for k in 2..=7 {
            let p = pattern_build(&WheelLevel::new(k).unwrap()).unwrap();
            let r = verify_pattern(&p).unwrap();
            assert!(r.all_hold(), "k={k}: {r:?}");
        }
    }

    #[test]
    fn verify_central_index() {
        let p = pattern_build(&WheelLevel::new(3).unwrap()).unwrap();
        // T=8, central index of the first 7 gaps is 3
        assert_eq!(p.gaps()[3], 4);
        let p7 = pattern_build(&WheelLevel::new(4).unwrap()).unwrap();
        // 48th gap mirrors the 1st: both 10 after merging
        assert_eq!(p7.gaps()[0], 10);
        assert_eq!(p7.gaps()[46], 10);
    }

    #[test]
    fn verify_flags_corruption() {
        let p = pattern_build(&WheelLevel::new(3).unwrap()).unwrap();
        let mut gaps = p.gaps().to_vec();
        gaps[0] = 8;
        let bad = Pattern::from_gaps(p.level().clone(), gaps);
        let r = verify_pattern(&bad).unwrap();
        assert!(!r.length_matches);
        assert!(!r.palindrome_holds);
        assert!(r.last_gap_is_2);
    }

    #[test]
    fn doc_omits_gaps_on_request() {
        let p = pattern_build(&WheelLevel::new(2).unwrap()).unwrap();
        let doc = p.to_doc(false);
        assert!(doc.gaps.is_none());
        let json = serde_json::to_value(p.to_doc(true)).unwrap();
        assert_eq!(json["gaps"], serde_json::json!([4, 2]));
    }
}
