//! Modified update/extraction pairs for bias-reduction experiments.
//!
//! A [`VariantSpec`] picks an extraction rule and how many times the update
//! is applied between extractions. On the command line it is written
//! `E=<kind>,U=<repeats>`, for example `E=deref2,U=1` or `E=std,U=25`.
//! Extraction kinds are `std`, `sum2` (index by `S[1] + S[2]`) and
//! `deref2` (dereference twice).

use std::fmt;
use std::str::FromStr;

use crate::cipher::{self, CipherState, Keystream, OutputMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExtractionKind {
    /// `S[S[1] + 1]`.
    #[default]
    Standard,
    /// `S[((S[1] + S[2] - 1) mod n) + 1]`.
    DoubleIndex,
    /// `S[S[S[1] + 1] + 1]`, each level reading `S[n]` when its index card is `n`.
    DoubleDeref,
}

impl ExtractionKind {
    fn token(self) -> &'static str {
        match self {
            ExtractionKind::Standard => "std",
            ExtractionKind::DoubleIndex => "sum2",
            ExtractionKind::DoubleDeref => "deref2",
        }
    }
}

impl FromStr for ExtractionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "std" | "standard" => Ok(ExtractionKind::Standard),
            "sum2" | "double_index" | "index2" => Ok(ExtractionKind::DoubleIndex),
            "deref2" | "double_deref" => Ok(ExtractionKind::DoubleDeref),
            _ => Err(Error::InvalidInput(format!("unknown extraction kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariantSpec {
    pub extraction: ExtractionKind,
    update_repeats: u32,
}

impl Default for VariantSpec {
    fn default() -> Self {
        VariantSpec::STANDARD
    }
}

impl VariantSpec {
    pub const STANDARD: VariantSpec = VariantSpec {
        extraction: ExtractionKind::Standard,
        update_repeats: 1,
    };

    pub fn new(extraction: ExtractionKind, update_repeats: u32) -> Result<Self> {
        if update_repeats == 0 {
            return Err(Error::InvalidInput("update repeats must be at least 1".into()));
        }
        Ok(VariantSpec {
            extraction,
            update_repeats,
        })
    }

    pub fn update_repeats(&self) -> u32 {
        self.update_repeats
    }

    /// Advance by `update_repeats` updates, then extract.
    #[inline]
    pub fn next_raw(&self, state: &mut CipherState) -> u8 {
        for _ in 0..self.update_repeats {
            state.update();
        }
        variant_extract(state, self.extraction)
    }

    /// Next output in `mode`, skipping joker values where the mode asks.
    #[inline]
    pub fn next_output(&self, state: &mut CipherState, mode: OutputMode) -> u8 {
        let n = state.n();
        loop {
            let v = self.next_raw(state);
            match mode {
                OutputMode::Raw => return v,
                OutputMode::Cards if (v as usize) < n - 1 => return v,
                OutputMode::Letters => {
                    if let Some(l) = cipher::to_letter(v, n) {
                        return l;
                    }
                }
                OutputMode::Cards => {}
            }
        }
    }
}

impl fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E={},U={}", self.extraction.token(), self.update_repeats)
    }
}

impl FromStr for VariantSpec {
    type Err = Error;

    /// `E=<kind>,U=<repeats>`; either field may be omitted.
    fn from_str(s: &str) -> Result<Self> {
        let mut extraction = ExtractionKind::Standard;
        let mut repeats = 1u32;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got {part:?}")))?;
            match key.trim() {
                "E" | "e" => extraction = value.trim().parse()?,
                "U" | "u" => {
                    repeats = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("bad update count {value:?}")))?
                }
                other => return Err(Error::InvalidInput(format!("unknown variant key {other:?}"))),
            }
        }
        VariantSpec::new(extraction, repeats)
    }
}

/// Extract from the current state without updating.
pub fn variant_extract(state: &CipherState, kind: ExtractionKind) -> u8 {
    let cards = state.deck().cards();
    let n = cards.len();
    let deref = |index_card: u8| -> u8 {
        let v = index_card as usize;
        if v == n {
            cards[n - 1]
        } else {
            cards[v]
        }
    };
    match kind {
        ExtractionKind::Standard => deref(cards[0]),
        ExtractionKind::DoubleIndex => {
            let sum = cards[0] as usize + cards[1] as usize;
            cards[(sum - 1) % n]
        }
        ExtractionKind::DoubleDeref => deref(deref(cards[0])),
    }
}

/// `len` outputs of the variant cipher from `s0`.
pub fn variant_keystream(
    s0: &CipherState,
    len: usize,
    spec: VariantSpec,
    mode: OutputMode,
) -> Keystream {
    let mut s = s0.clone();
    let n = s.n();
    let mut ks = Keystream::default();
    let mut produced = 0;
    while produced < len {
        let v = spec.next_raw(&mut s);
        ks.raw.push(v);
        let letter = cipher::to_letter(v, n);
        if let Some(l) = letter {
            ks.letters.push(l);
        }
        produced += match mode {
            OutputMode::Raw => 1,
            _ => usize::from(letter.is_some()),
        };
    }
    ks
}

/// Counts of `(a + b) mod n` over ordered pairs of distinct values in `1..=n`,
/// indexed by residue.
pub fn pair_sum_census(n: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n];
    for a in 1..=n {
        for b in (1..=n).filter(|&b| b != a) {
            counts[(a + b) % n] += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::EXAMPLE_DECK;
    use crate::{Deck, Seed};

    fn example() -> CipherState {
        CipherState::new(Deck::new(EXAMPLE_DECK.to_vec()).unwrap())
    }

    #[test]
    fn example_deck_variants() {
        let s = example();
        assert_eq!(variant_extract(&s, ExtractionKind::Standard), 3);
        // S[1] + S[2] = 26 + 10 = 36; position 36 holds 31 (last card of row 4).
        assert_eq!(variant_extract(&s, ExtractionKind::DoubleIndex), 31);
        // S[27] = 3, then S[4] = 6.
        assert_eq!(variant_extract(&s, ExtractionKind::DoubleDeref), 6);
    }

    #[test]
    fn double_index_wraps() {
        let mut cards: Vec<u8> = vec![54, 53];
        cards.extend(1..=52);
        let s = CipherState::new(Deck::new(cards.clone()).unwrap());
        // 107 -> ((107 - 1) mod 54) + 1 = 53.
        assert_eq!(variant_extract(&s, ExtractionKind::DoubleIndex), cards[52]);
    }

    #[test]
    fn double_deref_joker_levels() {
        // Top card 54 reads S[54]; if that is 54's partner 53, the next level
        // reads S[54] too.
        let mut cards: Vec<u8> = vec![54];
        cards.extend(1..=52);
        cards.push(53);
        let s = CipherState::new(Deck::new(cards).unwrap());
        assert_eq!(variant_extract(&s, ExtractionKind::Standard), 53);
        assert_eq!(variant_extract(&s, ExtractionKind::DoubleDeref), 53);
    }

    #[test]
    fn standard_matches_cipher() {
        let mut rng = Seed(8).rng();
        for _ in 0..100_000 {
            let s = CipherState::new(Deck::shuffled_with(&mut rng, 54).unwrap());
            assert_eq!(variant_extract(&s, ExtractionKind::Standard), s.extract());
            for kind in [ExtractionKind::DoubleIndex, ExtractionKind::DoubleDeref] {
                assert!((1..=54).contains(&variant_extract(&s, kind)));
            }
        }
    }

    #[test]
    fn standard_spec_reproduces_keystream() {
        let s0 = CipherState::new(Deck::shuffled(Seed(4), 54).unwrap());
        for mode in [OutputMode::Raw, OutputMode::Letters] {
            let a = variant_keystream(&s0, 500, VariantSpec::STANDARD, mode);
            let b = s0.clone().keystream(500, mode);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn repeats_apply_several_updates() {
        let s0 = CipherState::new(Deck::shuffled(Seed(5), 54).unwrap());
        let spec = VariantSpec::new(ExtractionKind::Standard, 3).unwrap();
        let ks = variant_keystream(&s0, 10, spec, OutputMode::Raw);
        let mut s = s0.clone();
        let expected: Vec<u8> = (0..10)
            .map(|_| {
                s.update();
                s.update();
                s.next_raw()
            })
            .collect();
        assert_eq!(ks.raw, expected);
    }

    #[test]
    fn spec_grammar() {
        let s: VariantSpec = "E=deref2,U=1".parse().unwrap();
        assert_eq!(s.extraction, ExtractionKind::DoubleDeref);
        assert_eq!(s.update_repeats(), 1);
        let s: VariantSpec = "U=25".parse().unwrap();
        assert_eq!(s, VariantSpec::new(ExtractionKind::Standard, 25).unwrap());
        assert_eq!(s.to_string().parse::<VariantSpec>().unwrap(), s);
        assert!("U=0".parse::<VariantSpec>().is_err());
        assert!("E=foo".parse::<VariantSpec>().is_err());
        assert!("X=1".parse::<VariantSpec>().is_err());
        assert!("E".parse::<VariantSpec>().is_err());
    }

    #[test]
    fn pair_sums_favour_odd_residues() {
        let counts = pair_sum_census(54);
        assert_eq!(counts.iter().sum::<u64>(), 54 * 53);
        // a + b = r (mod 54) fixes b for each a; only even r lose the two
        // values with 2a = r.
        for (r, &c) in counts.iter().enumerate() {
            assert_eq!(c, if r % 2 == 1 { 54 } else { 52 }, "residue {r}");
        }
        let min_odd = counts.iter().skip(1).step_by(2).min().unwrap();
        let max_even = counts.iter().step_by(2).max().unwrap();
        assert!(min_odd > max_even);
    }
}
