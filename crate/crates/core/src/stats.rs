//! Streaming keystream statistics.
//!
//! [`StreamStats`] keeps exact counts of symbol frequencies, repeats at each
//! distance `1..=D`, runs of equal symbols and constant windows, using memory
//! that depends only on `D`. Accumulators built over separate stream
//! segments merge by addition; a merge never compares symbols across the
//! boundary between segments.
//!
//! Rates are normalised by the number of comparable positions, which for a
//! single segment of length `L` is `L - d` at distance `d` and `L - r + 1`
//! for windows of length `r`.

use std::io::{self, Write};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::cipher::StepTrace;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DISTANCE: usize = 26;
/// Runs of this length or longer share the last run-length bucket.
pub const MAX_RUN: usize = 5;
/// Tuple (constant-window) lengths tracked.
pub const TUPLE_LENGTHS: [usize; 3] = [3, 4, 5];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamStats {
    modulus: u32,
    max_distance: usize,
    length: u64,
    freq: Vec<u64>,
    /// `repeats[d]` for `d` in `1..=max_distance`; index 0 unused.
    repeats: Vec<u64>,
    /// `const_windows[w]`: windows of length `w` holding a single symbol.
    const_windows: Vec<u64>,
    /// Completed runs by length; index `MAX_RUN` collects longer runs.
    runs: [u64; MAX_RUN + 1],
    /// Window-fit counts contributed by segments already closed by a merge.
    closed_fits: Vec<u64>,
    // Current segment.
    segment_len: u64,
    history: Vec<u8>,
    head: usize,
    current_run: u64,
}

impl StreamStats {
    pub fn new(modulus: u32) -> Self {
        Self::with_max_distance(modulus, DEFAULT_MAX_DISTANCE)
    }

    pub fn with_max_distance(modulus: u32, max_distance: usize) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        assert!(max_distance >= 1, "max distance must be at least 1");
        let max_window = (max_distance + 1).max(MAX_RUN);
        let ring = (max_distance + 1).next_power_of_two();
        StreamStats {
            modulus,
            max_distance,
            length: 0,
            freq: vec![0; modulus as usize + 1],
            repeats: vec![0; max_distance + 1],
            const_windows: vec![0; MAX_RUN + 1],
            runs: [0; MAX_RUN + 1],
            closed_fits: vec![0; max_window + 1],
            segment_len: 0,
            history: vec![0; ring],
            head: 0,
            current_run: 0,
        }
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn max_distance(&self) -> usize {
        self.max_distance
    }

    pub fn len(&self) -> u64 {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// Frequency of symbol `v` (1-based).
    pub fn frequency(&self, v: usize) -> u64 {
        self.freq[v]
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.freq[1..]
    }

    pub fn repeats(&self, d: usize) -> u64 {
        self.repeats[d]
    }

    /// Append one symbol in `1..=modulus`.
    #[inline]
    pub fn push(&mut self, v: u8) -> Result<()> {
        if v == 0 || v as u32 > self.modulus {
            return Err(Error::ValueOutOfRange {
                value: v as usize,
                n: self.modulus as usize,
            });
        }
        self.push_unchecked(v);
        Ok(())
    }

    #[inline]
    fn push_unchecked(&mut self, v: u8) {
        let mask = self.history.len() - 1;
        let reach = (self.segment_len as usize).min(self.max_distance);
        for d in 1..=reach {
            if self.history[(self.head.wrapping_sub(d)) & mask] == v {
                self.repeats[d] += 1;
            }
        }
        if self.segment_len > 0 && self.history[self.head.wrapping_sub(1) & mask] == v {
            self.current_run += 1;
        } else {
            self.close_run();
            self.current_run = 1;
        }
        let run = self.current_run as usize;
        for w in 2..=run.min(MAX_RUN) {
            self.const_windows[w] += 1;
        }
        self.history[self.head & mask] = v;
        self.head = self.head.wrapping_add(1);
        self.freq[v as usize] += 1;
        self.segment_len += 1;
        self.length += 1;
    }

    fn close_run(&mut self) {
        if self.current_run > 0 {
            self.runs[(self.current_run as usize).min(MAX_RUN)] += 1;
            self.current_run = 0;
        }
    }

    /// Append a chunk of symbols, continuing the current segment.
    pub fn accumulate(&mut self, chunk: &[u8]) -> Result<()> {
        if let Some(&bad) = chunk.iter().find(|&&v| v == 0 || v as u32 > self.modulus) {
            return Err(Error::ValueOutOfRange {
                value: bad as usize,
                n: self.modulus as usize,
            });
        }
        for &v in chunk {
            self.push_unchecked(v);
        }
        Ok(())
    }

    /// Positions at which a window of `w` consecutive symbols fits.
    fn fits(&self, w: usize) -> u64 {
        let open = self.segment_len.saturating_sub(w as u64 - 1);
        self.closed_fits.get(w).copied().unwrap_or(0) + open
    }

    /// Ends the current segment: later symbols are never compared with
    /// earlier ones.
    pub fn break_segment(&mut self) {
        self.close_run();
        for w in 1..self.closed_fits.len() {
            self.closed_fits[w] += self.segment_len.saturating_sub(w as u64 - 1);
        }
        self.segment_len = 0;
        self.head = 0;
    }

    /// Combine with an accumulator over a later, disjoint segment. The
    /// result continues `other`'s open segment.
    pub fn merge(&mut self, other: &StreamStats) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                expected: self.modulus,
                found: other.modulus,
            });
        }
        if self.max_distance != other.max_distance {
            return Err(Error::InvalidInput(format!(
                "distance bounds differ: {} vs {}",
                self.max_distance, other.max_distance
            )));
        }
        if other.length == 0 {
            return Ok(());
        }
        if self.length == 0 {
            *self = other.clone();
            return Ok(());
        }
        self.break_segment();
        self.length += other.length;
        add_into(&mut self.freq, &other.freq);
        add_into(&mut self.repeats, &other.repeats);
        add_into(&mut self.const_windows, &other.const_windows);
        add_into(&mut self.runs, &other.runs);
        add_into(&mut self.closed_fits, &other.closed_fits);
        self.segment_len = other.segment_len;
        self.history.copy_from_slice(&other.history);
        self.head = other.head;
        self.current_run = other.current_run;
        Ok(())
    }

    /// Comparable pairs at distance `d`.
    pub fn pairs(&self, d: usize) -> u64 {
        self.fits(d + 1)
    }

    /// Fraction of positions whose symbol equals the one `d` places earlier.
    pub fn repeat_rate(&self, d: usize) -> Result<f64> {
        if d == 0 || d > self.max_distance {
            return Err(Error::InvalidInput(format!(
                "distance {d} outside 1..={}",
                self.max_distance
            )));
        }
        let pairs = self.pairs(d);
        if pairs == 0 {
            return Err(Error::InsufficientData(format!(
                "no pairs at distance {d} in {} symbols",
                self.length
            )));
        }
        Ok(self.repeats[d] as f64 / pairs as f64)
    }

    /// Binomial standard error of [`Self::repeat_rate`].
    pub fn repeat_rate_stderr(&self, d: usize) -> Result<f64> {
        let r = self.repeat_rate(d)?;
        Ok((r * (1.0 - r) / self.pairs(d) as f64).sqrt())
    }

    /// Repeat rate and standard error for every distance.
    pub fn distance_profile(&self) -> Result<Vec<ProfilePoint>> {
        (1..=self.max_distance)
            .map(|d| {
                Ok(ProfilePoint {
                    distance: d,
                    rate: self.repeat_rate(d)?,
                    stderr: self.repeat_rate_stderr(d)?,
                })
            })
            .collect()
    }

    /// Probability that a window of length `r` (2..=5) is constant.
    pub fn tuple_rate(&self, r: usize) -> Result<f64> {
        if !(2..=MAX_RUN).contains(&r) {
            return Err(Error::InvalidInput(format!("tuple length {r} outside 2..=5")));
        }
        let fits = self.fits(r);
        if fits == 0 {
            return Err(Error::InsufficientData(format!(
                "no windows of length {r} in {} symbols",
                self.length
            )));
        }
        Ok(self.const_windows[r] as f64 / fits as f64)
    }

    /// Constant-window rates for lengths 3, 4, 5 and their successive ratios.
    pub fn tuple_rates(&self) -> Result<TupleRates> {
        if self.length < MAX_RUN as u64 {
            return Err(Error::InsufficientData(format!(
                "need at least {MAX_RUN} symbols, have {}",
                self.length
            )));
        }
        let pair = self.repeat_rate(1)?;
        let rates = [self.tuple_rate(3)?, self.tuple_rate(4)?, self.tuple_rate(5)?];
        let counts = [
            self.const_windows[3],
            self.const_windows[4],
            self.const_windows[5],
        ];
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::INFINITY };
        Ok(TupleRates {
            pair_rate: pair,
            rates,
            counts,
            ratios: [
                ratio(pair, rates[0]),
                ratio(rates[0], rates[1]),
                ratio(rates[1], rates[2]),
            ],
        })
    }

    /// Completed runs by length, counting the open run; bucket 5 is "5 or more".
    pub fn run_counts(&self) -> [u64; MAX_RUN + 1] {
        let mut runs = self.runs;
        if self.current_run > 0 {
            runs[(self.current_run as usize).min(MAX_RUN)] += 1;
        }
        runs
    }

    /// Pearson chi-square of the symbol counts against uniform.
    pub fn uniformity_chi2(&self) -> Result<ChiSquare> {
        let m = self.modulus as u64;
        if self.length < 100 * m {
            return Err(Error::InsufficientData(format!(
                "chi-square needs {} symbols, have {}",
                100 * m,
                self.length
            )));
        }
        let expected = self.length as f64 / m as f64;
        let statistic = self.freq[1..]
            .iter()
            .map(|&o| {
                let diff = o as f64 - expected;
                diff * diff / expected
            })
            .sum();
        Ok(ChiSquare {
            statistic,
            dof: m - 1,
        })
    }
}

fn add_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub distance: usize,
    pub rate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TupleRates {
    /// Distance-1 repeat rate.
    pub pair_rate: f64,
    /// Constant-window rates for r = 3, 4, 5.
    pub rates: [f64; 3],
    pub counts: [u64; 3],
    /// pair/r3, r3/r4, r4/r5.
    pub ratios: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: u64,
}

impl ChiSquare {
    pub fn p_value(&self) -> f64 {
        let dist = ChiSquared::new(self.dof as f64).expect("positive dof");
        dist.sf(self.statistic)
    }

    /// Upper quantile of the reference distribution, e.g. 0.999.
    pub fn critical_value(&self, level: f64) -> f64 {
        chi2_quantile(self.dof, level)
    }
}

pub fn chi2_quantile(dof: u64, level: f64) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("positive dof")
        .inverse_cdf(level)
}

/// Counts of the dereferenced (top) card on distance-1 repeat events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopCardHistogram {
    counts: Vec<u64>,
}

impl TopCardHistogram {
    pub fn new(n: usize) -> Self {
        TopCardHistogram {
            counts: vec![0; n + 1],
        }
    }

    pub fn record(&mut self, top_card: u8) {
        self.counts[top_card as usize] += 1;
    }

    /// Count for card value `v` (1-based).
    pub fn count(&self, v: usize) -> u64 {
        self.counts[v]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts[1..]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &TopCardHistogram) {
        add_into(&mut self.counts, &other.counts);
    }

    /// Mean count over `a` minus mean count over `b`, with its Poisson
    /// standard error.
    pub fn level_shift(
        &self,
        a: std::ops::RangeInclusive<usize>,
        b: std::ops::RangeInclusive<usize>,
    ) -> (f64, f64) {
        let mean_var = |r: std::ops::RangeInclusive<usize>| {
            let k = (r.end() - r.start() + 1) as f64;
            let sum: u64 = r.map(|v| self.counts[v]).sum();
            (sum as f64 / k, sum as f64 / (k * k))
        };
        let (ma, va) = mean_var(a);
        let (mb, vb) = mean_var(b);
        (ma - mb, (va + vb).sqrt())
    }
}

/// Histogram of `traces[i].top_card_value` over every `i` whose extraction
/// repeats the previous one.
pub fn top_card_on_repeat(traces: &[StepTrace], raw: &[u8], n: usize) -> Result<TopCardHistogram> {
    if traces.len() != raw.len() {
        return Err(Error::Misaligned(traces.len(), raw.len()));
    }
    if let Some(i) = traces
        .iter()
        .zip(raw)
        .position(|(t, &v)| t.extracted_value != v)
    {
        return Err(Error::InvalidInput(format!(
            "trace {i} extracted {} but stream holds {}",
            traces[i].extracted_value, raw[i]
        )));
    }
    let mut hist = TopCardHistogram::new(n);
    for i in 1..raw.len() {
        if raw[i] == raw[i - 1] {
            hist.record(traces[i].top_card_value);
        }
    }
    Ok(hist)
}

pub const PROFILE_CSV_HEADER: &str = "d,rate,stderr";
pub const HISTOGRAM_CSV_HEADER: &str = "value,count";
pub const TUPLE_CSV_HEADER: &str = "r,rate,ratio";

pub fn write_profile_csv<W: Write>(mut w: W, profile: &[ProfilePoint]) -> io::Result<()> {
    writeln!(w, "{PROFILE_CSV_HEADER}")?;
    for p in profile {
        writeln!(w, "{},{},{}", p.distance, p.rate, p.stderr)?;
    }
    Ok(())
}

pub fn write_histogram_csv<W: Write>(mut w: W, hist: &TopCardHistogram) -> io::Result<()> {
    writeln!(w, "{HISTOGRAM_CSV_HEADER}")?;
    for (i, c) in hist.counts().iter().enumerate() {
        writeln!(w, "{},{}", i + 1, c)?;
    }
    Ok(())
}

/// Rows r = 2..5; the ratio on row r is rate(r-1) / rate(r).
pub fn write_tuple_csv<W: Write>(mut w: W, t: &TupleRates) -> io::Result<()> {
    writeln!(w, "{TUPLE_CSV_HEADER}")?;
    writeln!(w, "2,{},", t.pair_rate)?;
    for (i, r) in TUPLE_LENGTHS.iter().enumerate() {
        writeln!(w, "{},{},{}", r, t.rates[i], t.ratios[i])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stats_of(m: u32, s: &[u8]) -> StreamStats {
        let mut st = StreamStats::new(m);
        st.accumulate(s).unwrap();
        st
    }

    #[test]
    fn triple_ones() {
        let st = stats_of(26, &[1, 1, 1]);
        assert_eq!(st.repeats(1), 2);
        assert_eq!(st.repeats(2), 1);
        assert_eq!(st.run_counts()[3], 1);
        assert_eq!(st.run_counts().iter().sum::<u64>(), 1);
        assert_eq!(st.repeat_rate(1).unwrap(), 1.0);
    }

    #[test]
    fn alternating() {
        let st = stats_of(26, &[1, 2, 1, 2]);
        assert_eq!(st.repeat_rate(2).unwrap(), 1.0);
        assert_eq!(st.repeat_rate(1).unwrap(), 0.0);
        assert!(matches!(st.repeat_rate(4), Err(Error::InsufficientData(_))));
        assert!(st.repeat_rate(0).is_err());
        assert!(st.repeat_rate(27).is_err());
    }

    #[test]
    fn constant_stream_tuple_rates_are_one() {
        let st = stats_of(26, &[7; 50]);
        let t = st.tuple_rates().unwrap();
        assert_eq!(t.rates, [1.0, 1.0, 1.0]);
        assert_eq!(t.pair_rate, 1.0);
        assert_eq!(st.run_counts()[MAX_RUN], 1);
        assert!(stats_of(26, &[1, 2, 3, 4]).tuple_rates().is_err());
    }

    #[test]
    fn chi_square_closed_forms() {
        let uniform: Vec<u8> = (0..2600).map(|i| (i % 26 + 1) as u8).collect();
        assert_eq!(stats_of(26, &uniform).uniformity_chi2().unwrap().statistic, 0.0);

        let ones = vec![1u8; 5400];
        let c = stats_of(54, &ones).uniformity_chi2().unwrap();
        assert!((c.statistic - 53.0 * 5400.0).abs() < 1e-6);
        assert_eq!(c.dof, 53);
        assert!(stats_of(26, &ones[..2599]).uniformity_chi2().is_err());
    }

    #[test]
    fn chi2_quantile_reference() {
        // 99.9% point of chi-square with 25 dof.
        assert!((chi2_quantile(25, 0.999) - 52.620).abs() < 1e-2);
    }

    #[test]
    fn out_of_range_symbols_rejected() {
        let mut st = StreamStats::new(26);
        assert!(st.accumulate(&[1, 27]).is_err());
        assert!(st.push(0).is_err());
        let other = StreamStats::new(54);
        assert!(matches!(st.merge(&other), Err(Error::ModulusMismatch { .. })));
    }

    #[test]
    fn merge_does_not_bridge_gap() {
        let mut a = stats_of(26, &[3, 3]);
        let b = stats_of(26, &[3, 3]);
        a.merge(&b).unwrap();
        assert_eq!(a.repeats(1), 2);
        assert_eq!(a.pairs(1), 2);
        assert_eq!(a.run_counts()[2], 2);
        assert_eq!(a.len(), 4);
        // Continues the later segment.
        a.accumulate(&[3]).unwrap();
        assert_eq!(a.repeats(1), 3);
        assert_eq!(a.run_counts()[3], 1);
    }

    #[test]
    fn top_card_histogram_counts_repeats() {
        use crate::{CipherState, Deck, Seed};
        let mut s = CipherState::new(Deck::shuffled(Seed(2), 54).unwrap());
        let (ks, traces) = s.keystream_traced(20_000);
        let hist = top_card_on_repeat(&traces, &ks.raw, 54).unwrap();
        let repeats = ks.raw.windows(2).filter(|w| w[0] == w[1]).count() as u64;
        assert_eq!(hist.total(), repeats);
        assert!(top_card_on_repeat(&traces[1..], &ks.raw, 54).is_err());
        let empty = top_card_on_repeat(&[], &[], 54).unwrap();
        assert_eq!(empty.total(), 0);
    }

    #[test]
    fn csv_emitters() {
        let st = stats_of(26, &[1, 1, 2, 2, 2, 3, 1, 1]);
        let mut out = Vec::new();
        write_tuple_csv(&mut out, &st.tuple_rates().unwrap()).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("r,rate,ratio\n2,"));
        assert_eq!(text.lines().count(), 5);
    }

    fn brute_repeats(s: &[u8], d: usize) -> u64 {
        s.windows(d + 1).filter(|w| w[0] == w[d]).count() as u64
    }

    fn brute_const(s: &[u8], r: usize) -> u64 {
        s.windows(r).filter(|w| w.iter().all(|&x| x == w[0])).count() as u64
    }

    proptest! {
        #[test]
        fn counts_match_brute_force(s in prop::collection::vec(1u8..=4, 0..300)) {
            let st = stats_of(4, &s);
            prop_assert_eq!(st.len(), s.len() as u64);
            prop_assert_eq!(st.frequencies().iter().sum::<u64>(), s.len() as u64);
            for d in 1..=26 {
                prop_assert_eq!(st.repeats(d), brute_repeats(&s, d));
                prop_assert!(st.repeats(d) <= (s.len() as u64).saturating_sub(d as u64));
            }
            for r in 2..=5 {
                prop_assert_eq!(st.const_windows[r], brute_const(&s, r));
            }
            if s.len() >= 5 {
                let t = st.tuple_rates().unwrap();
                prop_assert!(t.rates[0] <= t.pair_rate + 1e-12);
            }
        }

        #[test]
        fn merge_equals_gapped_stream(
            s in prop::collection::vec(1u8..=3, 0..200),
            cuts in prop::collection::vec(0usize..200, 0..4),
        ) {
            let mut cuts: Vec<usize> = cuts.into_iter().map(|c| c.min(s.len())).collect();
            cuts.sort_unstable();
            let mut bounds = vec![0];
            bounds.extend(cuts);
            bounds.push(s.len());
            let parts: Vec<&[u8]> = bounds.windows(2).map(|w| &s[w[0]..w[1]]).collect();

            let mut merged = StreamStats::new(3);
            for p in &parts {
                merged.merge(&stats_of(3, p)).unwrap();
            }
            let nonempty: Vec<&&[u8]> = parts.iter().filter(|p| !p.is_empty()).collect();
            for d in 1..=26 {
                let expect: u64 = nonempty.iter().map(|p| brute_repeats(p, d)).sum();
                let pairs: u64 = nonempty.iter().map(|p| (p.len() as u64).saturating_sub(d as u64)).sum();
                prop_assert_eq!(merged.repeats(d), expect);
                prop_assert_eq!(merged.pairs(d), pairs);
            }
            let runs: u64 = merged.run_counts().iter().sum();
            let brute_runs: usize = nonempty.iter().map(|p| 1 + p.windows(2).filter(|w| w[0] != w[1]).count()).sum();
            prop_assert_eq!(runs, brute_runs as u64);
        }

        #[test]
        fn merge_is_associative_with_identity(
            a in prop::collection::vec(1u8..=3, 0..60),
            b in prop::collection::vec(1u8..=3, 0..60),
            c in prop::collection::vec(1u8..=3, 0..60),
        ) {
            let (sa, sb, sc) = (stats_of(3, &a), stats_of(3, &b), stats_of(3, &c));
            let mut left = sa.clone();
            left.merge(&sb).unwrap();
            left.merge(&sc).unwrap();
            let mut bc = sb.clone();
            bc.merge(&sc).unwrap();
            let mut right = sa.clone();
            right.merge(&bc).unwrap();
            prop_assert_eq!(&left, &right);

            let mut with_empty = sa.clone();
            with_empty.merge(&StreamStats::new(3)).unwrap();
            prop_assert_eq!(&with_empty, &sa);
            let mut from_empty = StreamStats::new(3);
            from_empty.merge(&sa).unwrap();
            prop_assert_eq!(&from_empty, &sa);
        }
    }
}
