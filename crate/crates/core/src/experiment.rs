//! Seeded, segment-partitioned experiment drivers.
//!
//! A long stream is cut into segments of `segment_len` outputs; segment `i`
//! runs from a fresh deck shuffled with `seed.derive(i)`. Segments run in
//! parallel and are merged in index order, so results depend only on the
//! configuration and never on the worker count.

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::cipher::{self, CipherState, OutputMode};
use crate::deck::{adjacencies_preserved, adjacency_count, Deck, STANDARD_SIZE};
use crate::error::{Error, Result};
use crate::model;
use crate::rng::Seed;
use crate::stats::{StreamStats, TopCardHistogram, DEFAULT_MAX_DISTANCE};
use crate::variants::VariantSpec;

pub const DEFAULT_SEGMENT_LEN: u64 = 1 << 20;

/// Run `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamExperiment {
    /// Fixed starting deck; the whole run is then a single segment.
    pub deck: Option<Deck>,
    pub seed: Seed,
    pub outputs: u64,
    pub mode: OutputMode,
    pub variant: VariantSpec,
    pub max_distance: usize,
    pub segment_len: u64,
    pub deck_size: usize,
}

impl StreamExperiment {
    pub fn new(seed: Seed, outputs: u64, mode: OutputMode) -> Self {
        StreamExperiment {
            deck: None,
            seed,
            outputs,
            mode,
            variant: VariantSpec::STANDARD,
            max_distance: DEFAULT_MAX_DISTANCE,
            segment_len: DEFAULT_SEGMENT_LEN,
            deck_size: STANDARD_SIZE,
        }
    }

    /// One continuous stream from `deck`.
    pub fn from_deck(deck: Deck, outputs: u64, mode: OutputMode) -> Self {
        let mut e = StreamExperiment::new(Seed(0), outputs, mode);
        e.deck_size = deck.len();
        e.deck = Some(deck);
        e.segment_len = outputs.max(1);
        e
    }

    pub fn with_variant(mut self, variant: VariantSpec) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_max_distance(mut self, d: usize) -> Self {
        self.max_distance = d;
        self
    }

    /// Ignored for a fixed starting deck.
    pub fn with_segment_len(mut self, len: u64) -> Self {
        if self.deck.is_none() {
            self.segment_len = len.max(1);
        }
        self
    }

    /// Alphabet size of the emitted symbols: 26 for letters, the deck size
    /// otherwise.
    pub fn modulus(&self) -> u32 {
        match self.mode {
            OutputMode::Letters => cipher::ALPHABET as u32,
            _ => self.deck_size as u32,
        }
    }

    pub fn segments(&self) -> u64 {
        self.outputs.div_ceil(self.segment_len)
    }

    pub fn segment_outputs(&self, i: u64) -> u64 {
        (self.outputs - i * self.segment_len).min(self.segment_len)
    }

    pub fn segment_state(&self, i: u64) -> Result<CipherState> {
        match &self.deck {
            Some(d) => Ok(CipherState::new(d.clone())),
            None => Ok(CipherState::new(Deck::shuffled(self.seed.derive(i), self.deck_size)?)),
        }
    }

    /// Feed segment `i` to `sink` in chunks.
    pub fn for_each_chunk(&self, i: u64, mut sink: impl FnMut(&[u8])) -> Result<()> {
        let mut s = self.segment_state(i)?;
        let mut buf = [0u8; 4096];
        let mut left = self.segment_outputs(i);
        while left > 0 {
            let k = (left as usize).min(buf.len());
            for slot in &mut buf[..k] {
                *slot = self.variant.next_output(&mut s, self.mode);
            }
            sink(&buf[..k]);
            left -= k as u64;
        }
        Ok(())
    }

    pub fn segment_stats(&self, i: u64) -> Result<StreamStats> {
        let mut st = StreamStats::with_max_distance(self.modulus(), self.max_distance);
        let mut err = None;
        self.for_each_chunk(i, |chunk| {
            if err.is_none() {
                err = st.accumulate(chunk).err();
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(st),
        }
    }

    pub fn run_stats(&self) -> Result<StreamStats> {
        let parts: Vec<StreamStats> = (0..self.segments())
            .into_par_iter()
            .map(|i| self.segment_stats(i))
            .collect::<Result<_>>()?;
        let mut total = StreamStats::with_max_distance(self.modulus(), self.max_distance);
        for p in &parts {
            total.merge(p)?;
        }
        Ok(total)
    }

    /// Stream every output, segment by segment, to `w` as text (one value
    /// per line) or raw bytes.
    pub fn write_outputs<W: Write>(&self, mut w: W, binary: bool) -> Result<()> {
        let mut io_err: Option<io::Error> = None;
        for i in 0..self.segments() {
            self.for_each_chunk(i, |chunk| {
                if io_err.is_some() {
                    return;
                }
                let r = if binary {
                    cipher::write_keystream_bytes(&mut w, chunk)
                } else {
                    cipher::write_keystream_text(&mut w, chunk)
                };
                io_err = r.err();
            })?;
            if let Some(e) = io_err.take() {
                return Err(Error::InvalidInput(format!("write failed: {e}")));
            }
        }
        Ok(())
    }

    /// Top card on raw distance-1 repeats, over `outputs` standard update
    /// steps per the segment layout.
    pub fn top_card_histogram(&self) -> Result<TopCardHistogram> {
        let parts: Vec<TopCardHistogram> = (0..self.segments())
            .into_par_iter()
            .map(|i| {
                let mut s = self.segment_state(i)?;
                let mut h = TopCardHistogram::new(self.deck_size);
                let mut prev = 0u8;
                for t in 0..self.segment_outputs(i) {
                    let step = s.traced_step();
                    if t > 0 && step.extracted_value == prev {
                        h.record(step.top_card_value);
                    }
                    prev = step.extracted_value;
                }
                Ok(h)
            })
            .collect::<Result<_>>()?;
        let mut total = TopCardHistogram::new(self.deck_size);
        for p in &parts {
            total.merge(p);
        }
        Ok(total)
    }
}

/// Sum over `trials` work items, each drawing from its own derived RNG,
/// chunked and merged in index order.
fn parallel_sum<T, F>(seed: Seed, trials: u64, chunk: u64, f: F) -> T
where
    T: Send + Default + std::ops::AddAssign,
    F: Fn(&mut crate::rng::Prng) -> T + Sync,
{
    let chunks = trials.div_ceil(chunk);
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.derive(c).rng();
            let mut acc = T::default();
            for _ in c * chunk..((c + 1) * chunk).min(trials) {
                acc += f(&mut rng);
            }
            acc
        })
        .collect();
    let mut total = T::default();
    for p in parts {
        total += p;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjacencyMeans {
    pub decks: u64,
    /// Mean `adjacencies_preserved(d, U^s(d))`.
    pub preserved_mean: f64,
    /// Mean `adjacency_count` of uniform random decks.
    pub random_mean: f64,
}

pub fn adjacency_experiment(seed: Seed, decks: u64, updates: u32) -> Result<AdjacencyMeans> {
    if decks == 0 {
        return Err(Error::InvalidInput("need at least one deck".into()));
    }
    let Pair(kept, random) = parallel_sum(seed, decks, 4096, |rng| {
        let a = Deck::shuffled_with(rng, STANDARD_SIZE).expect("standard size");
        let mut s = CipherState::new(a.clone());
        for _ in 0..updates {
            s.update();
        }
        let kept = adjacencies_preserved(&a, s.deck()).expect("same size") as u64;
        let random = adjacency_count(&Deck::shuffled_with(rng, STANDARD_SIZE).expect("standard size")) as u64;
        Pair(kept, random)
    });
    Ok(AdjacencyMeans {
        decks,
        preserved_mean: kept as f64 / decks as f64,
        random_mean: random as f64 / decks as f64,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Pair(u64, u64);

impl std::ops::AddAssign for Pair {
    fn add_assign(&mut self, o: Pair) {
        self.0 += o.0;
        self.1 += o.1;
    }
}

/// Random decks satisfying the story placement conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoryMonteCarlo {
    pub decks: u64,
    pub hits: u64,
    pub expected_p: f64,
}

impl StoryMonteCarlo {
    pub fn fraction(&self) -> f64 {
        self.hits as f64 / self.decks as f64
    }

    pub fn stderr(&self) -> f64 {
        (self.expected_p * (1.0 - self.expected_p) / self.decks as f64).sqrt()
    }

    pub fn z(&self) -> f64 {
        (self.fraction() - self.expected_p) / self.stderr()
    }
}

pub fn story_monte_carlo(seed: Seed, decks: u64) -> Result<StoryMonteCarlo> {
    if decks == 0 {
        return Err(Error::InvalidInput("need at least one deck".into()));
    }
    let hits: u64 = parallel_sum(seed, decks, 1 << 16, |rng| {
        let d = Deck::shuffled_with(rng, STANDARD_SIZE).expect("standard size");
        u64::from(model::story_placement_holds(&d))
    });
    Ok(StoryMonteCarlo {
        decks,
        hits,
        expected_p: model::story_sums().p_f64(),
    })
}

/// Mean adjacent-repeat counts of keystreams implied by genuine and by
/// independent plaintexts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalTrials {
    pub trials: u64,
    pub length: usize,
    pub genuine_mean: f64,
    pub independent_mean: f64,
    pub null_sd: f64,
}

impl CausalTrials {
    pub fn separation_in_null_sd(&self) -> f64 {
        (self.genuine_mean - self.independent_mean) / self.null_sd
    }
}

pub fn causal_trials(seed: Seed, trials: u64, length: usize) -> Result<CausalTrials> {
    if trials == 0 || length < 2 {
        return Err(Error::InvalidInput("need trials and at least two letters".into()));
    }
    let random_text = |rng: &mut crate::rng::Prng| -> String {
        (0..length)
            .map(|_| (b'A' + rng.random_range(0..26u8)) as char)
            .collect()
    };
    let mut genuine = 0u64;
    let mut independent = 0u64;
    let mut null_sd = 0.0;
    for t in 0..trials {
        let mut rng = seed.derive(t).rng();
        let s0 = CipherState::new(Deck::shuffled_with(&mut rng, STANDARD_SIZE)?);
        let p = random_text(&mut rng);
        let other = random_text(&mut rng);
        let c = cipher::encrypt(&p, &s0)?;
        let g = crate::attacks::causal_repeat_test(&c, &p)?;
        let i = crate::attacks::causal_repeat_test(&c, &other)?;
        genuine += g.observed;
        independent += i.observed;
        null_sd = g.null_sd;
    }
    Ok(CausalTrials {
        trials,
        length,
        genuine_mean: genuine as f64 / trials as f64,
        independent_mean: independent as f64 / trials as f64,
        null_sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_layout() {
        let e = StreamExperiment::new(Seed(1), 10, OutputMode::Letters).with_segment_len(4);
        assert_eq!(e.segments(), 3);
        assert_eq!(
            (0..3).map(|i| e.segment_outputs(i)).collect::<Vec<_>>(),
            vec![4, 4, 2]
        );
        let e = StreamExperiment::new(Seed(1), 0, OutputMode::Letters);
        assert_eq!(e.segments(), 0);
        assert_eq!(e.run_stats().unwrap().len(), 0);
    }

    #[test]
    fn stats_match_direct_keystreams() {
        let e = StreamExperiment::new(Seed(5), 25_000, OutputMode::Letters).with_segment_len(10_000);
        let got = e.run_stats().unwrap();
        let mut want = StreamStats::new(26);
        for i in 0..e.segments() {
            let mut seg = StreamStats::new(26);
            let ks = e
                .segment_state(i)
                .unwrap()
                .keystream(e.segment_outputs(i) as usize, OutputMode::Letters);
            seg.accumulate(&ks.letters).unwrap();
            want.merge(&seg).unwrap();
        }
        assert_eq!(got, want);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let e = StreamExperiment::new(Seed(9), 50_000, OutputMode::Cards).with_segment_len(7_000);
        let one = with_workers(Some(1), || e.run_stats()).unwrap().unwrap();
        let three = with_workers(Some(3), || e.run_stats()).unwrap().unwrap();
        assert_eq!(one, three);
        let h1 = with_workers(Some(1), || e.top_card_histogram()).unwrap().unwrap();
        let h3 = with_workers(Some(3), || e.top_card_histogram()).unwrap().unwrap();
        assert_eq!(h1, h3);
    }

    #[test]
    fn written_outputs_match_segments() {
        let e = StreamExperiment::new(Seed(2), 5_000, OutputMode::Raw).with_segment_len(3_000);
        let mut bytes = Vec::new();
        e.write_outputs(&mut bytes, true).unwrap();
        assert_eq!(bytes.len(), 5_000);
        let first = e.segment_state(0).unwrap().keystream(3_000, OutputMode::Raw);
        assert_eq!(&bytes[..3_000], &first.raw[..]);
        let mut text = Vec::new();
        e.write_outputs(&mut text, false).unwrap();
        assert_eq!(String::from_utf8(text).unwrap().lines().count(), 5_000);
    }

    #[test]
    fn histogram_total_counts_raw_repeats() {
        let e = StreamExperiment::new(Seed(4), 30_000, OutputMode::Raw).with_segment_len(10_000);
        let h = e.top_card_histogram().unwrap();
        let st = e.run_stats().unwrap();
        assert_eq!(h.total(), st.repeats(1));
    }

    #[test]
    fn fixed_deck_is_one_segment() {
        let d = Deck::shuffled(Seed(8), 54).unwrap();
        let e = StreamExperiment::from_deck(d.clone(), 10_000, OutputMode::Letters).with_segment_len(100);
        assert_eq!(e.segments(), 1);
        let mut got = Vec::new();
        e.write_outputs(&mut got, true).unwrap();
        assert_eq!(got, CipherState::new(d).keystream(10_000, OutputMode::Letters).letters);
    }

    #[test]
    fn zero_updates_preserve_everything() {
        let m = adjacency_experiment(Seed(1), 100, 0).unwrap();
        assert_eq!(m.preserved_mean, 53.0);
        assert!(adjacency_experiment(Seed(1), 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_deterministic() {
        let a = story_monte_carlo(Seed(3), 100_000).unwrap();
        assert_eq!(a, story_monte_carlo(Seed(3), 100_000).unwrap());
        assert!(a.z().abs() < 5.0, "{a:?}");
    }
}
