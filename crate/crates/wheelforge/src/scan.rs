//! Sieve-engine: memory-bounded segmented scan of the first block
//! [1, L+1] for levels whose full gap list does not fit in memory.
//!
//! Only odd positions are represented; p1 = 2 is handled implicitly.
//! Segments are mapped in parallel and reduced strictly in segment
//! order, so results are bit-identical for any segment length and any
//! worker count.

use crate::bits::Bitset;
use crate::error::{Error, Result};
use crate::residue::GapHistogram;
use crate::wheel::{primorial, WheelLevel};
use rayon::prelude::*;
use serde::Serialize;
use std::time::{Duration, Instant};

/// Full-block scans allowed without the long-run flag (L10 ~ 6.5e9).
pub const MAX_SCAN_K: usize = 10;
/// Full-block scans allowed with the long-run flag (L11 ~ 2e11).
pub const MAX_LONG_RUN_K: usize = 11;
/// Default positions per segment.
pub const DEFAULT_SEGMENT_LENGTH: u64 = 1 << 25;
/// Retained left endpoints of maximal gaps; the multiplicity stays exact.
pub const MAX_POSITIONS_KEPT: usize = 64;

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub level: WheelLevel,
    pub segment_length: u64,
    /// 0 means the rayon default.
    pub worker_count: usize,
    /// Sub-interval [lo, hi) of [1, L+2); None scans the full block.
    pub range: Option<(u64, u64)>,
    pub long_run: bool,
}

impl ScanConfig {
    pub fn new(level: WheelLevel) -> Self {
        ScanConfig {
            level,
            segment_length: DEFAULT_SEGMENT_LENGTH,
            worker_count: 0,
            range: None,
            long_run: false,
        }
    }

    fn validate(&self) -> Result<(u64, u64)> {
        if self.level.k() < 2 {
            return Err(Error::usage("scan requires k >= 2"));
        }
        if self.segment_length < 2 * self.level.last_prime() {
            return Err(Error::usage(format!(
                "segment length {} below minimum {}",
                self.segment_length,
                2 * self.level.last_prime()
            )));
        }
        let l = primorial(&self.level);
        match self.range {
            Some((lo, hi)) => {
                if lo < 1 || hi > l + 2 || lo >= hi {
                    return Err(Error::usage(format!(
                        "range [{lo}, {hi}) outside [1, {})",
                        l + 2
                    )));
                }
                Ok((lo, hi))
            }
            None => {
                let k = self.level.k();
                if k > MAX_LONG_RUN_K {
                    return Err(Error::resource(format!(
                        "full-block scan at k={k} is beyond the supported scale"
                    )));
                }
                if k > MAX_SCAN_K && !self.long_run {
                    return Err(Error::resource(format!(
                        "full-block scan at k={k} requires the long-run opt-in"
                    )));
                }
                Ok((1, l + 2))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub histogram: GapHistogram,
    pub gap_count: u64,
    pub max_gap: u64,
    pub max_gap_multiplicity: u64,
    pub max_gap_positions: Vec<u64>,
    pub elapsed: Duration,
}

impl PartialEq for ScanResult {
    /// Timing excluded; everything observable must be identical.
    fn eq(&self, other: &Self) -> bool {
        self.histogram == other.histogram
            && self.gap_count == other.gap_count
            && self.max_gap == other.max_gap
            && self.max_gap_multiplicity == other.max_gap_multiplicity
            && self.max_gap_positions == other.max_gap_positions
    }
}

/// JSON surface for a scan.
#[derive(Debug, Serialize)]
pub struct ScanResultDoc {
    pub k: usize,
    pub max_gap: u64,
    pub multiplicity: u64,
    pub positions: Vec<u64>,
    pub gap_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram_csv: Option<String>,
    pub elapsed_ms: u64,
    pub verified: bool,
}

impl ScanResult {
    pub fn to_doc(&self, k: usize, histogram_csv: Option<String>, verified: bool) -> ScanResultDoc {
        ScanResultDoc {
            k,
            max_gap: self.max_gap,
            multiplicity: self.max_gap_multiplicity,
            positions: self.max_gap_positions.clone(),
            gap_count: self.gap_count,
            histogram_csv,
            elapsed_ms: self.elapsed.as_millis() as u64,
            verified,
        }
    }
}

/// Per-segment observations, merged in segment order.
struct SegmentPartial {
    first_survivor: Option<u64>,
    last_survivor: Option<u64>,
    histogram: GapHistogram,
    gap_count: u64,
    max: MaxTracker,
}

#[derive(Debug, Clone, Default)]
struct MaxTracker {
    value: u64,
    multiplicity: u64,
    positions: Vec<u64>,
}

impl MaxTracker {
    fn observe(&mut self, gap: u64, left: u64) {
        if gap > self.value {
            self.value = gap;
            self.multiplicity = 1;
            self.positions.clear();
            self.positions.push(left);
        } else if gap == self.value && gap > 0 {
            self.multiplicity += 1;
            if self.positions.len() < MAX_POSITIONS_KEPT {
                self.positions.push(left);
            }
        }
    }

    fn absorb(&mut self, other: &MaxTracker) {
        if other.value > self.value {
            self.value = other.value;
            self.multiplicity = other.multiplicity;
            self.positions = other.positions.clone();
        } else if other.value == self.value && other.value > 0 {
            self.multiplicity += other.multiplicity;
            for &p in &other.positions {
                if self.positions.len() >= MAX_POSITIONS_KEPT {
                    break;
                }
                self.positions.push(p);
            }
        }
    }
}

fn scan_segment(level: &WheelLevel, lo: u64, hi: u64) -> SegmentPartial {
    // odd positions in [lo, hi)
    let base = if lo.is_multiple_of(2) { lo + 1 } else { lo };
    let mut partial = SegmentPartial {
        first_survivor: None,
        last_survivor: None,
        histogram: GapHistogram::new(),
        gap_count: 0,
        max: MaxTracker::default(),
    };
    if base >= hi {
        return partial;
    }
    let n_odd = ((hi - base) as usize).div_ceil(2);
    let mut struck = Bitset::new(n_odd);
    for &p in &level.primes()[1..] {
        let mut m = p * lo.div_ceil(p);
        if m.is_multiple_of(2) {
            m += p;
        }
        while m < hi {
            struck.set(((m - base) / 2) as usize);
            m += 2 * p;
        }
    }
    let mut prev: Option<u64> = None;
    for i in 0..n_odd {
        if !struck.get(i) {
            let x = base + 2 * i as u64;
            if let Some(pv) = prev {
                let gap = x - pv;
                partial.histogram.add(gap, 1);
                partial.gap_count += 1;
                partial.max.observe(gap, pv);
            } else {
                partial.first_survivor = Some(x);
            }
            prev = Some(x);
        }
    }
    partial.last_survivor = prev;
    partial
}

/// Streamed scan of the configured range. Survivor gaps accumulate into
/// a histogram; gaps straddling segment boundaries are stitched by
/// carrying the last survivor across segments.
pub fn scan_level(cfg: &ScanConfig) -> Result<ScanResult> {
    let (lo, hi) = cfg.validate()?;
    let started = Instant::now();
    let seg = cfg.segment_length;
    let n_segments = (hi - lo).div_ceil(seg);
    let bounds: Vec<(u64, u64)> = (0..n_segments)
        .map(|i| (lo + i * seg, (lo + (i + 1) * seg).min(hi)))
        .collect();

    let run = || -> Vec<SegmentPartial> {
        bounds
            .par_iter()
            .map(|&(a, b)| scan_segment(&cfg.level, a, b))
            .collect()
    };
    let partials = if cfg.worker_count > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.worker_count)
            .build()
            .map_err(|e| Error::resource(format!("thread pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    };

    // sequential stitch in segment order
    let mut histogram = GapHistogram::new();
    let mut gap_count = 0u64;
    let mut max = MaxTracker::default();
    let mut prev: Option<u64> = None;
    for partial in &partials {
        if let Some(first) = partial.first_survivor {
            if let Some(pv) = prev {
                let gap = first - pv;
                histogram.add(gap, 1);
                gap_count += 1;
                max.observe(gap, pv);
            }
            histogram.merge(&partial.histogram);
            gap_count += partial.gap_count;
            max.absorb(&partial.max);
            prev = partial.last_survivor;
        }
    }

    Ok(ScanResult {
        histogram,
        gap_count,
        max_gap: max.value,
        max_gap_multiplicity: max.multiplicity,
        max_gap_positions: max.positions,
        elapsed: started.elapsed(),
    })
}

/// Largest gap in the scanned range: value, exact multiplicity, and the
/// retained left endpoints.
pub fn max_skip(cfg: &ScanConfig) -> Result<(u64, u64, Vec<u64>)> {
    let result = scan_level(cfg)?;
    Ok((
        result.max_gap,
        result.max_gap_multiplicity,
        result.max_gap_positions,
    ))
}

/// Measured max skip minus the trivial lower bound 2 * p_{k-1}.
pub fn defect(level: &WheelLevel, measured_max: u64) -> Result<i64> {
    let bound = crate::residue::max_skip_lower_bound(level)?;
    Ok(measured_max as i64 - bound as i64)
}
