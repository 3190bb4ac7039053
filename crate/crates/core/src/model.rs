//! Closed-form bias model.
//!
//! The repeat mechanism needs four cards in the right places: the
//! dereferenced (top) card, the count card just below the joker that
//! passes it, and both jokers. Counting placements over the
//! `54·53·52·51` arrangements of those four cards gives the probability
//! `p` that an update reproduces the previous extraction. Everything here
//! is for the 54-card deck only.

use std::io::{self, Write};

use num_rational::Ratio;

use crate::deck::Deck;
use crate::error::{Error, Result};

/// Number of arrangements of the four cards involved in the repeat mechanism.
pub const ARRANGEMENTS: u64 = 54 * 53 * 52 * 51;
/// From this joker position on, the count card's value `55 - i` falls into
/// the range of usable dereferenced values and must be excluded.
pub const SPLIT_INDEX: u64 = 29;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BiasModel {
    /// Placements where the slow joker passes the count card.
    pub slow_numerator: u64,
    /// Placements where the fast joker passes the count card.
    pub fast_numerator: u64,
    pub denominator: u64,
    pub split_index: u64,
}

impl BiasModel {
    /// Exact repeat probability.
    pub fn p(&self) -> Ratio<u64> {
        Ratio::new(self.slow_numerator + self.fast_numerator, self.denominator)
    }

    pub fn p_f64(&self) -> f64 {
        (self.slow_numerator + self.fast_numerator) as f64 / self.denominator as f64
    }
}

/// Evaluates both placement sums term by term.
pub fn story_sums() -> BiasModel {
    let mut slow = 0u64;
    let mut fast = 0u64;
    for i in 3u64..=52 {
        let trailing = 53 - i;
        let (slow_deref, fast_deref) = if i < SPLIT_INDEX {
            (i - 2, i - 3)
        } else {
            (i - 3, i - 4)
        };
        slow += trailing * slow_deref;
        fast += trailing * fast_deref;
    }
    BiasModel {
        slow_numerator: slow,
        fast_numerator: fast,
        denominator: ARRANGEMENTS,
        split_index: SPLIT_INDEX,
    }
}

/// Whether a deck matches one of the card placements counted by
/// [`story_sums`]: a joker at position `i` (3..=52) with the card of value
/// `55 - i` directly below it, the other joker further down, and a top card
/// small enough (at most `i - 2` for the slow joker, `i - 3` for the fast
/// one) that is not the count card itself. On a uniformly random deck this
/// holds with probability exactly `p`.
pub fn story_placement_holds(deck: &Deck) -> bool {
    if deck.len() != 54 {
        return false;
    }
    let cards = deck.cards();
    let slow = cards.iter().position(|&c| c == 53).unwrap() + 1;
    let fast = cards.iter().position(|&c| c == 54).unwrap() + 1;
    let (i, other, reach) = if slow < fast {
        (slow, fast, 2)
    } else {
        (fast, slow, 3)
    };
    if !(3..=52).contains(&i) || other < i + 2 {
        return false;
    }
    let count = 55 - i;
    if cards[i] as usize != count {
        return false;
    }
    let top = cards[0] as usize;
    top <= i - reach && top != count
}

/// `p + (1 - p) / m`: repeat rate when the mechanism fires with probability
/// `p` and every other step repeats by chance.
pub fn predicted_repeat_rate(p: f64, m: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || m == 0 {
        return Err(Error::InvalidInput(format!("p = {p}, m = {m}")));
    }
    Ok(p + (1.0 - p) / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub repeat_probability: f64,
    pub alphabet: u32,
    pub entropy_nats: f64,
    pub entropy_bits: f64,
    pub uniform_nats: f64,
    pub uniform_bits: f64,
    pub leak_nats: f64,
    pub leak_bits: f64,
}

/// Per-character entropy of a stream that repeats its previous symbol with
/// probability `q` and otherwise picks one of the other `m - 1` uniformly.
pub fn entropy_leak(q: f64, m: u32) -> Result<EntropyReport> {
    if !(q > 0.0 && q < 1.0) || m < 2 {
        return Err(Error::InvalidInput(format!(
            "entropy needs 0 < q < 1 and m >= 2, got q = {q}, m = {m}"
        )));
    }
    let rest = 1.0 - q;
    let h = -q * q.ln() - rest * (rest / (m - 1) as f64).ln();
    let uniform = (m as f64).ln();
    let ln2 = std::f64::consts::LN_2;
    Ok(EntropyReport {
        repeat_probability: q,
        alphabet: m,
        entropy_nats: h,
        entropy_bits: h / ln2,
        uniform_nats: uniform,
        uniform_bits: uniform / ln2,
        leak_nats: uniform - h,
        leak_bits: (uniform - h) / ln2,
    })
}

pub const ADJACENCIES_FULL: f64 = 53.0;
/// Adjacencies a single update is expected to keep.
pub const ADJACENCIES_KEPT: f64 = 45.0;

/// `53 (45/53)^s`.
pub fn adjacency_decay(s: u32) -> f64 {
    ADJACENCIES_FULL * (ADJACENCIES_KEPT / ADJACENCIES_FULL).powi(s as i32)
}

/// Smallest `s` with `adjacency_decay(s) < 1`.
pub fn decay_threshold() -> u32 {
    (0..).find(|&s| adjacency_decay(s) < 1.0).unwrap()
}

/// Smallest `s` with `53 - 8 s <= 1`: each update destroys at most eight
/// adjacencies.
pub fn linear_threshold() -> u32 {
    let lost = (ADJACENCIES_FULL - ADJACENCIES_KEPT) as u32;
    (0..).find(|&s| 53 <= 1 + lost * s).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackExpectation {
    pub trials: u64,
    /// Expected count of the biased outcome.
    pub biased_mean: f64,
    /// Expected count of any single unbiased outcome.
    pub null_mean: f64,
    pub null_sd: f64,
    /// `(biased_mean - null_mean) / null_sd`; zero when there is no spread.
    pub z_separation: f64,
}

impl AttackExpectation {
    fn from_binomial(trials: u64, biased_p: f64, null_p: f64) -> Self {
        let t = trials as f64;
        let biased_mean = t * biased_p;
        let null_mean = t * null_p;
        let null_sd = (t * null_p * (1.0 - null_p)).sqrt();
        let z_separation = if null_sd > 0.0 {
            (biased_mean - null_mean) / null_sd
        } else {
            0.0
        };
        AttackExpectation {
            trials,
            biased_mean,
            null_mean,
            null_sd,
            z_separation,
        }
    }
}

/// Difference tallies for one adjacent ciphertext position over `sessions`
/// independent encryptions: the true difference shows up with probability
/// `b`, each of the other `m - 1` with `(1 - b)/(m - 1)`.
pub fn credential_expectations(sessions: u64, b: f64, m: u32) -> AttackExpectation {
    AttackExpectation::from_binomial(sessions, b, (1.0 - b) / (m - 1) as f64)
}

/// Adjacent repeats in a derived keystream of `length` letters: causal
/// rate `b` against chance rate `1/m`.
pub fn causal_test_expectations(length: u64, b: f64, m: u32) -> AttackExpectation {
    AttackExpectation::from_binomial(length.saturating_sub(1), b, 1.0 / m as f64)
}

/// Observed distance-1 letter repeat rate used in the attack scenarios.
pub const OBSERVED_REPEAT_RATE: f64 = 0.0444;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub key: &'static str,
    pub value: String,
    pub units: &'static str,
}

/// Every closed-form quantity of the model.
pub fn model_report() -> Vec<ReportEntry> {
    let model = story_sums();
    let p = model.p_f64();
    let predicted = predicted_repeat_rate(p, 26).expect("p in range");
    let entropy = entropy_leak(predicted, 26).expect("q in range");
    let nominal = entropy_leak(1.0 / 22.5, 26).expect("q in range");
    let cred = credential_expectations(50_000, OBSERVED_REPEAT_RATE, 26);
    let causal = causal_test_expectations(10_000, OBSERVED_REPEAT_RATE, 26);
    let f = |v: f64| format!("{v}");
    let mut out = vec![
        entry("slow_numerator", model.slow_numerator.to_string(), "count"),
        entry("fast_numerator", model.fast_numerator.to_string(), "count"),
        entry("denominator", model.denominator.to_string(), "count"),
        entry("p_exact", model.p().to_string(), "ratio"),
        entry("p", f(p), "probability"),
        entry("predicted_repeat_rate", f(predicted), "probability"),
        entry("entropy_q", f(entropy.repeat_probability), "probability"),
        entry("entropy_nats", f(entropy.entropy_nats), "nats/char"),
        entry("entropy_bits", f(entropy.entropy_bits), "bits/char"),
        entry("uniform_entropy_nats", f(entropy.uniform_nats), "nats/char"),
        entry("uniform_entropy_bits", f(entropy.uniform_bits), "bits/char"),
        entry("leak_bits", f(entropy.leak_bits), "bits/char"),
        entry("entropy_bits_q_1_over_22.5", f(nominal.entropy_bits), "bits/char"),
        entry("leak_bits_q_1_over_22.5", f(nominal.leak_bits), "bits/char"),
        entry("adjacency_linear_threshold", linear_threshold().to_string(), "updates"),
        entry("adjacency_decay_threshold", decay_threshold().to_string(), "updates"),
    ];
    out.extend([
        entry("credential_sessions", cred.trials.to_string(), "count"),
        entry("credential_biased_mean", f(cred.biased_mean), "count"),
        entry("credential_null_mean", f(cred.null_mean), "count"),
        entry("credential_null_sd", f(cred.null_sd), "count"),
        entry("credential_z", f(cred.z_separation), "sd"),
        entry("causal_pairs", causal.trials.to_string(), "count"),
        entry("causal_mean", f(causal.biased_mean), "count"),
        entry("causal_null_mean", f(causal.null_mean), "count"),
        entry("causal_null_sd", f(causal.null_sd), "count"),
        entry("causal_z", f(causal.z_separation), "sd"),
    ]);
    out
}

fn entry(key: &'static str, value: String, units: &'static str) -> ReportEntry {
    ReportEntry { key, value, units }
}

pub const REPORT_CSV_HEADER: &str = "key,value,units";

pub fn write_report_csv<W: Write>(mut w: W, entries: &[ReportEntry]) -> io::Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for e in entries {
        writeln!(w, "{},{},{}", e.key, e.value, e.units)?;
    }
    Ok(())
}
