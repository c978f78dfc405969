//! Residue-analysis: CRT coordinates modulo the basis primes, gap
//! histograms, and the extremal-skip machinery.

use crate::error::{Error, Result};
use crate::wheel::{euler_period, primorial, Pattern, WheelLevel};
use std::collections::BTreeMap;

/// Coordinates of an integer modulo (p_1, ..., p_k).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueVector {
    level: WheelLevel,
    coords: Vec<u64>,
}

impl ResidueVector {
    pub fn new(level: WheelLevel, coords: Vec<u64>) -> Result<Self> {
        if coords.len() != level.k() {
            return Err(Error::usage("coordinate count must equal k"));
        }
        for (&c, &p) in coords.iter().zip(level.primes()) {
            if c >= p {
                return Err(Error::usage(format!("coordinate {c} not below modulus {p}")));
            }
        }
        Ok(ResidueVector { level, coords })
    }

    pub fn level(&self) -> &WheelLevel {
        &self.level
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

pub fn to_residues(x: u64, level: &WheelLevel) -> ResidueVector {
    let coords = level.primes().iter().map(|&p| x % p).collect();
    ResidueVector {
        level: level.clone(),
        coords,
    }
}

/// CRT inverse of `to_residues`: the unique x in [0, L) with the given
/// coordinates.
pub fn from_residues(rv: &ResidueVector) -> u64 {
    let l = primorial(&rv.level) as u128;
    let mut x: u128 = 0;
    for (&r, &p) in rv.coords.iter().zip(rv.level.primes()) {
        let m = l / p as u128; // product of the other moduli
        let inv = mod_inverse(m % p as u128, p as u128);
        x = (x + r as u128 * m % l * inv) % l;
    }
    (x % l) as u64
}

fn mod_inverse(a: u128, m: u128) -> u128 {
    // extended Euclid; m is prime here so the inverse always exists
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as u128
}

/// True iff no coordinate is 0, i.e. x is coprime to every basis prime.
pub fn is_rprime(rv: &ResidueVector) -> bool {
    rv.coords.iter().all(|&c| c != 0)
}

/// Multiplicity of gaps 2 and 4 in one period: product of (p_i - 2)
/// over i >= 2.
pub fn multiplicity_small_gaps(level: &WheelLevel) -> Result<u64> {
    if level.k() < 2 {
        return Err(Error::usage("small-gap multiplicity defined for k >= 2"));
    }
    Ok(level.primes()[1..].iter().map(|p| p - 2).product())
}

/// Trivial lower bound for the largest gap: 2 * p_{k-1}.
pub fn max_skip_lower_bound(level: &WheelLevel) -> Result<u64> {
    Ok(2 * level.second_last_prime()?)
}

/// The two CRT solutions of (0,...,0,-1,+1) and (0,...,0,+1,-1): the
/// residue patterns that meet the lower bound. Positions only; the gap
/// actually surrounding each is measured separately since merging can
/// exceed the bound.
pub fn extremal_candidates(level: &WheelLevel) -> Result<(u64, u64)> {
    let k = level.k();
    if k < 3 {
        return Err(Error::usage("extremal candidates defined for k >= 3"));
    }
    let primes = level.primes();
    let mut coords = vec![0u64; k];
    coords[k - 2] = primes[k - 2] - 1; // -1 mod p_{k-1}
    coords[k - 1] = 1;
    let a = from_residues(&ResidueVector::new(level.clone(), coords.clone())?);
    coords[k - 2] = 1;
    coords[k - 1] = primes[k - 1] - 1;
    let b = from_residues(&ResidueVector::new(level.clone(), coords)?);
    Ok((a, b))
}

/// Smallest survivor y > x and the gap y - x. Residues are updated
/// incrementally; no divisions in the walk.
pub fn next_rprime_gap(x: u64, level: &WheelLevel) -> Result<(u64, u64)> {
    if !is_rprime(&to_residues(x, level)) {
        return Err(Error::usage(format!("{x} is not r-prime at level k={}", level.k())));
    }
    let mut walk = ResidueWalk::at(x, level);
    loop {
        walk.step();
        if walk.is_rprime() {
            return Ok((walk.pos(), walk.pos() - x));
        }
    }
}

/// The survivor gap enclosing a non-survivor x: (previous survivor,
/// next survivor).
pub fn enclosing_gap(x: u64, level: &WheelLevel) -> Result<(u64, u64)> {
    if is_rprime(&to_residues(x, level)) {
        return Err(Error::usage("x is itself a survivor"));
    }
    let mut lo = x - 1;
    while !is_rprime(&to_residues(lo, level)) {
        lo -= 1;
    }
    let mut hi = x + 1;
    while !is_rprime(&to_residues(hi, level)) {
        hi += 1;
    }
    Ok((lo, hi))
}

/// Incremental residue tracker for unit steps.
struct ResidueWalk<'a> {
    primes: &'a [u64],
    coords: Vec<u64>,
    pos: u64,
}

impl<'a> ResidueWalk<'a> {
    fn at(x: u64, level: &'a WheelLevel) -> Self {
        ResidueWalk {
            primes: level.primes(),
            coords: level.primes().iter().map(|&p| x % p).collect(),
            pos: x,
        }
    }

    fn step(&mut self) {
        self.pos += 1;
        for (c, &p) in self.coords.iter_mut().zip(self.primes) {
            *c += 1;
            if *c == p {
                *c = 0;
            }
        }
    }

    fn pos(&self) -> u64 {
        self.pos
    }

    fn is_rprime(&self) -> bool {
        self.coords.iter().all(|&c| c != 0)
    }
}

/// Sparse multiset of gap values over one period.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GapHistogram {
    entries: BTreeMap<u64, u64>,
}

impl GapHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_gaps(gaps: &[u32]) -> Self {
        let mut h = Self::new();
        for &g in gaps {
            h.add(g as u64, 1);
        }
        h
    }

    pub fn add(&mut self, gap: u64, count: u64) {
        *self.entries.entry(gap).or_insert(0) += count;
    }

    /// Commutative merge of per-worker partials.
    pub fn merge(&mut self, other: &GapHistogram) {
        for (&g, &c) in &other.entries {
            self.add(g, c);
        }
    }

    pub fn count(&self, gap: u64) -> u64 {
        self.entries.get(&gap).copied().unwrap_or(0)
    }

    /// Total number of gaps.
    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Sum of gap * count, i.e. the covered length.
    pub fn weighted_sum(&self) -> u64 {
        self.entries.iter().map(|(&g, &c)| g * c).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.entries.iter().map(|(&g, &c)| (g, c))
    }

    pub fn max_gap(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// CSV with header `gap,count`, rows ascending by gap.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gap,count\n");
        for (g, c) in self.iter() {
            out.push_str(&format!("{g},{c}\n"));
        }
        out
    }
}

/// Occurrence count of gap `g` in a pattern's period.
pub fn count_gap(pattern: &Pattern, g: u64) -> u64 {
    pattern.gaps().iter().filter(|&&x| x as u64 == g).count() as u64
}

/// Both recurrence checks for the multiplicity of gap 2 between level k
/// and k+1, with measured t values: t_next >= t_k * p_{k+1} - T_k, and
/// t_next > T_k.
pub fn multiplicity_recurrence_check(
    level_k: &WheelLevel,
    t_k: u64,
    t_next: u64,
) -> Result<(bool, bool)> {
    let next = WheelLevel::new(level_k.k() + 1)?;
    let p_next = next.last_prime();
    let t_cap = euler_period(level_k);
    let lower = t_k * p_next;
    let first = t_next as i128 >= lower as i128 - t_cap as i128;
    let second = t_next > t_cap;
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wheel::pattern_build;

    fn level(k: usize) -> WheelLevel {
        WheelLevel::new(k).unwrap()
    }

    #[test]
    fn to_residues_examples() {
        assert_eq!(to_residues(1, &level(4)).coords(), &[1, 1, 1, 1]);
        assert_eq!(to_residues(15, &level(3)).coords(), &[1, 0, 0]);
        assert_eq!(to_residues(25, &level(3)).coords(), &[1, 1, 0]);
    }

    #[test]
    fn from_residues_examples() {
        let lv = level(3);
        let rv = ResidueVector::new(lv.clone(), vec![1, 0, 0]).unwrap();
        assert_eq!(from_residues(&rv), 15);
        let rv = ResidueVector::new(lv.clone(), vec![1, 1, 1]).unwrap();
        assert_eq!(from_residues(&rv), 1);
        // brute-force scan of 0..29 confirms 14 = (0,2,4)
        let rv = ResidueVector::new(lv, vec![0, 2, 4]).unwrap();
        assert_eq!(from_residues(&rv), 14);
    }

    #[test]
    fn residue_vector_validation() {
        assert!(ResidueVector::new(level(3), vec![1, 1]).is_err());
        assert!(ResidueVector::new(level(3), vec![1, 3, 0]).is_err());
    }

    #[test]
    fn rprime_examples() {
        assert!(is_rprime(&to_residues(1, &level(3))));
        assert!(!is_rprime(&ResidueVector::new(level(3), vec![1, 1, 0]).unwrap()));
        assert!(is_rprime(&ResidueVector::new(level(4), vec![1, 2, 2, 2]).unwrap()));
    }

    #[test]
    fn small_gap_multiplicities() {
        assert_eq!(multiplicity_small_gaps(&level(3)).unwrap(), 3);
        assert_eq!(multiplicity_small_gaps(&level(4)).unwrap(), 15);
        assert!(multiplicity_small_gaps(&level(1)).is_err());
        // k=5 value confirmed against the sieve histogram in scan tests
        assert_eq!(multiplicity_small_gaps(&level(5)).unwrap(), 135);
    }

    #[test]
    fn count_gap_examples() {
        let p5 = pattern_build(&level(3)).unwrap();
        assert_eq!(count_gap(&p5, 6), 2);
        assert_eq!(count_gap(&p5, 8), 0);
        let p7 = pattern_build(&level(4)).unwrap();
        assert_eq!(count_gap(&p7, 2), 15);
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(max_skip_lower_bound(&level(6)).unwrap(), 22);
        assert_eq!(max_skip_lower_bound(&level(9)).unwrap(), 38);
        assert_eq!(max_skip_lower_bound(&level(2)).unwrap(), 4);
        assert!(max_skip_lower_bound(&level(1)).is_err());
    }

    #[test]
    fn extremal_candidates_k6() {
        let (a, b) = extremal_candidates(&level(6)).unwrap();
        let mut pair = [a, b];
        pair.sort();
        assert_eq!(pair, [9450, 20580]);
        assert_eq!(a + b, primorial(&level(6)));
    }

    #[test]
    fn extremal_candidates_k3() {
        let (a, b) = extremal_candidates(&level(3)).unwrap();
        // brute-force scan of 0..29: x = 0 mod 2, 2 mod 3, 1 mod 5 -> 26
        let mut pair = [a, b];
        pair.sort();
        assert_eq!(pair, [4, 26]);
        assert_eq!(a + b, 30);
        assert!(!is_rprime(&to_residues(a, &level(3))));
        assert!(!is_rprime(&to_residues(b, &level(3))));
        assert_ne!(a, b);
    }

    #[test]
    fn next_rprime_gap_examples() {
        assert_eq!(next_rprime_gap(1, &level(3)).unwrap(), (7, 6));
        let l = primorial(&level(3));
        assert_eq!(next_rprime_gap(l - 1, &level(3)).unwrap(), (l + 1, 2));
        assert_eq!(next_rprime_gap(113, &level(4)).unwrap(), (121, 8));
        assert!(next_rprime_gap(15, &level(3)).is_err());
    }

    #[test]
    fn histogram_from_pattern() {
        let p5 = pattern_build(&level(3)).unwrap();
        let h = GapHistogram::from_gaps(p5.gaps());
        assert_eq!(h.count(2), 3);
        assert_eq!(h.count(4), 3);
        assert_eq!(h.count(6), 2);
        assert_eq!(h.total(), 8);
        assert_eq!(h.weighted_sum(), 30);
        assert_eq!(h.max_gap(), Some(6));
        assert_eq!(h.to_csv(), "gap,count\n2,3\n4,3\n6,2\n");
    }

    #[test]
    fn recurrence_examples() {
        // t_5 = 3, t_7 = 15, T_5 = 8: 15 >= 3*7-8 and 15 > 8
        assert_eq!(
            multiplicity_recurrence_check(&level(3), 3, 15).unwrap(),
            (true, true)
        );
        // t_7 = 15, t_11 = 135, T_7 = 48: 135 >= 15*11-48 and 135 > 48
        assert_eq!(
            multiplicity_recurrence_check(&level(4), 15, 135).unwrap(),
            (true, true)
        );
    }

    #[test]
    fn central_table_matches() {
        // C-2 .. C+2 classification around the symmetry axis C = L/2
        for k in 2..=6 {
            let lv = level(k);
            let c = primorial(&lv) / 2;
            assert!(is_rprime(&to_residues(c - 2, &lv)), "k={k}");
            assert!(!is_rprime(&to_residues(c - 1, &lv)));
            assert!(!is_rprime(&to_residues(c, &lv)));
            assert!(!is_rprime(&to_residues(c + 1, &lv)));
            assert!(is_rprime(&to_residues(c + 2, &lv)));
        }
    }
}
