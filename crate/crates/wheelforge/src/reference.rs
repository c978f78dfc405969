//! Static table of reported max-skip data per level. Rows with
//! `verified = true` are reproducible by this crate's scans at desk
//! scale; the rest are shipped as-is and must always be labeled
//! unverified when displayed.

use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MaxSkipClaim {
    /// Basis size k (the pattern uses the first k primes).
    pub k: usize,
    /// p_k, the largest basis prime.
    pub pattern_prime: u64,
    /// Reported largest skip, where stated.
    pub max_skip: Option<u64>,
    /// Reported multiplicity of the largest skip, where stated.
    pub multiplicity: Option<u64>,
    /// max_skip minus the trivial bound 2 * p_{k-1}, where stated.
    pub defect: Option<u64>,
    /// True iff this row is re-checked by a full-block scan in this
    /// crate's test suite.
    pub verified: bool,
}

pub const MAX_SKIP_CLAIMS: &[MaxSkipClaim] = &[
    // the largest skip comes in pairs through the first 8 basis primes
    MaxSkipClaim { k: 3, pattern_prime: 5, max_skip: Some(6), multiplicity: Some(2), defect: Some(0), verified: true },
    MaxSkipClaim { k: 4, pattern_prime: 7, max_skip: Some(10), multiplicity: Some(2), defect: Some(0), verified: true },
    MaxSkipClaim { k: 5, pattern_prime: 11, max_skip: Some(14), multiplicity: Some(2), defect: Some(0), verified: true },
    MaxSkipClaim { k: 6, pattern_prime: 13, max_skip: Some(22), multiplicity: Some(2), defect: Some(0), verified: true },
    MaxSkipClaim { k: 7, pattern_prime: 17, max_skip: None, multiplicity: Some(2), defect: None, verified: true },
    MaxSkipClaim { k: 8, pattern_prime: 19, max_skip: None, multiplicity: Some(2), defect: None, verified: true },
    MaxSkipClaim { k: 9, pattern_prime: 23, max_skip: Some(40), multiplicity: Some(12), defect: Some(2), verified: true },
    // pairs reappear for exactly three more cases
    MaxSkipClaim { k: 10, pattern_prime: 29, max_skip: None, multiplicity: Some(2), defect: None, verified: false },
    MaxSkipClaim { k: 11, pattern_prime: 31, max_skip: None, multiplicity: Some(2), defect: None, verified: false },
    MaxSkipClaim { k: 13, pattern_prime: 41, max_skip: None, multiplicity: Some(2), defect: None, verified: false },
    // beyond desk scale; never presented as measured
    MaxSkipClaim { k: 15, pattern_prime: 47, max_skip: Some(100), multiplicity: None, defect: Some(14), verified: false },
    MaxSkipClaim { k: 22, pattern_prime: 79, max_skip: Some(200), multiplicity: None, defect: Some(54), verified: false },
    MaxSkipClaim { k: 28, pattern_prime: 107, max_skip: Some(300), multiplicity: None, defect: Some(94), verified: false },
    MaxSkipClaim { k: 34, pattern_prime: 139, max_skip: Some(414), multiplicity: None, defect: Some(140), verified: false },
    MaxSkipClaim { k: 39, pattern_prime: 167, max_skip: Some(510), multiplicity: None, defect: Some(184), verified: false },
];

pub fn claim_for(k: usize) -> Option<&'static MaxSkipClaim> {
    MAX_SKIP_CLAIMS.iter().find(|c| c.k == k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wheel::{first_primes, nth_prime};

    #[test]
    fn table_consistency() {
        for claim in MAX_SKIP_CLAIMS {
            assert_eq!(claim.pattern_prime, nth_prime(claim.k), "k={}", claim.k);
            if let (Some(max), Some(d)) = (claim.max_skip, claim.defect) {
                let bound = 2 * first_primes(claim.k)[claim.k - 2];
                assert_eq!(max - bound, d, "k={}", claim.k);
            }
        }
    }

    #[test]
    fn lookup() {
        assert_eq!(claim_for(9).unwrap().max_skip, Some(40));
        assert!(claim_for(12).is_none());
        assert!(!claim_for(15).unwrap().verified);
    }
}
