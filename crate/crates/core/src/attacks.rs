//! Simulations of the two exploitation scenarios for the repeat bias: a
//! credential re-sent under many keys, and a disputed plaintext judged by
//! the repeats in the keystream it implies.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::cipher::{self, CipherState, ALPHABET};
use crate::deck::{Deck, STANDARD_SIZE};
use crate::error::{Error, Result};
use crate::model::{causal_test_expectations, OBSERVED_REPEAT_RATE};
use crate::rng::Seed;

const M: usize = ALPHABET as usize;

/// Length of the credential in the logon scenario.
pub const CREDENTIAL_LEN: usize = 30;

/// `(b - a) mod 26` as a residue in `0..26`.
#[inline]
pub fn difference(a: u8, b: u8) -> u8 {
    (b + ALPHABET - a) % ALPHABET
}

pub fn difference_profile(letters: &[u8]) -> Vec<u8> {
    letters.windows(2).map(|w| difference(w[0], w[1])).collect()
}

fn letters_only(text: &str) -> Result<Vec<u8>> {
    if let Some(bad) = text
        .chars()
        .find(|c| !c.is_ascii_alphabetic() && !c.is_whitespace())
    {
        return Err(Error::InvalidInput(format!("non-letter character {bad:?}")));
    }
    Ok(cipher::normalize_text(text))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredentialAttackReport {
    pub sessions: u64,
    pub credential_len: usize,
    /// `tallies[i][d]`: sessions whose ciphertext letters `i`, `i + 1`
    /// differ by `d`.
    pub tallies: Vec<[u64; M]>,
    pub recovered: Vec<u8>,
    pub planted: Vec<u8>,
    pub success: bool,
    /// Winner minus runner-up over the Poisson sd of their difference.
    pub z_margin: Vec<f64>,
}

impl CredentialAttackReport {
    fn from_tallies(sessions: u64, credential: &[u8], tallies: Vec<[u64; M]>) -> Self {
        let planted = difference_profile(credential);
        let mut recovered = Vec::with_capacity(tallies.len());
        let mut z_margin = Vec::with_capacity(tallies.len());
        for t in &tallies {
            let (best, top) = modal(t);
            let second = t
                .iter()
                .enumerate()
                .filter(|&(d, _)| d != best)
                .map(|(_, &c)| c)
                .max()
                .unwrap_or(0);
            recovered.push(best as u8);
            let spread = ((top + second) as f64).sqrt();
            z_margin.push(if spread > 0.0 {
                (top as f64 - second as f64) / spread
            } else {
                0.0
            });
        }
        CredentialAttackReport {
            sessions,
            credential_len: credential.len(),
            success: recovered == planted,
            tallies,
            recovered,
            planted,
            z_margin,
        }
    }

    pub fn modal_tally(&self, position: usize) -> u64 {
        modal(&self.tallies[position]).1
    }

    /// Mean tally of the 25 non-modal differences at `position`.
    pub fn runner_up_mean(&self, position: usize) -> f64 {
        let t = &self.tallies[position];
        let top = modal(t).1;
        (t.iter().sum::<u64>() - top) as f64 / (M - 1) as f64
    }

    /// The 26 credentials consistent with the recovered differences, one per
    /// first letter.
    pub fn candidates(&self) -> Vec<String> {
        (1..=ALPHABET)
            .map(|first| {
                let mut letters = vec![first];
                for &d in &self.recovered {
                    let prev = *letters.last().expect("non-empty");
                    letters.push((prev - 1 + d) % ALPHABET + 1);
                }
                cipher::letters_to_string(&letters)
            })
            .collect()
    }
}

/// Lowest difference with the largest tally.
fn modal(t: &[u64; M]) -> (usize, u64) {
    let mut best = 0;
    for d in 1..M {
        if t[d] > t[best] {
            best = d;
        }
    }
    (best, t[best])
}

/// Encrypt `credential` under `sessions` independently shuffled decks and
/// recover its difference profile from the per-position modal tallies.
/// Session `i` is keyed from `seed.derive(i)`.
pub fn simulate_credential_attack(
    credential: &str,
    sessions: u64,
    seed: Seed,
) -> Result<CredentialAttackReport> {
    let p = letters_only(credential)?;
    if p.len() < 2 {
        return Err(Error::InvalidInput("credential needs at least two letters".into()));
    }
    if sessions == 0 {
        return Err(Error::InvalidInput("need at least one session".into()));
    }
    let positions = p.len() - 1;
    const CHUNK: u64 = 1024;
    let chunks = sessions.div_ceil(CHUNK);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut t = vec![[0u64; M]; positions];
            let mut c = vec![0u8; p.len()];
            for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(sessions) {
                let deck = Deck::shuffled(seed.derive(i), STANDARD_SIZE).expect("standard size");
                let mut s = CipherState::new(deck);
                for (ci, &pi) in c.iter_mut().zip(&p) {
                    *ci = cipher::combine(pi, s.next_letter());
                }
                for (pos, w) in c.windows(2).enumerate() {
                    t[pos][difference(w[0], w[1]) as usize] += 1;
                }
            }
            t
        })
        .reduce(
            || vec![[0u64; M]; positions],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    for d in 0..M {
                        x[d] += y[d];
                    }
                }
                a
            },
        );
    Ok(CredentialAttackReport::from_tallies(sessions, &p, tallies))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalTestReport {
    pub length: u64,
    pub observed: u64,
    pub causal_mean: f64,
    pub causal_sd: f64,
    pub null_mean: f64,
    pub null_sd: f64,
    pub z_causal: f64,
    pub z_null: f64,
    /// `|z_null| - |z_causal|`: positive favours the causal claim.
    pub margin: f64,
}

impl CausalTestReport {
    pub fn favours_causal(&self) -> bool {
        self.margin > 0.0
    }
}

pub fn count_adjacent_repeats(values: &[u8]) -> u64 {
    values.windows(2).filter(|w| w[0] == w[1]).count() as u64
}

/// Derive the keystream implied by `plaintext` under `ciphertext` and score
/// its adjacent repeats against the biased and the chance rate.
pub fn causal_repeat_test(ciphertext: &str, plaintext: &str) -> Result<CausalTestReport> {
    let c = letters_only(ciphertext)?;
    let p = letters_only(plaintext)?;
    if c.len() != p.len() {
        return Err(Error::LengthMismatch(c.len(), p.len()));
    }
    let k: Vec<u8> = c
        .iter()
        .zip(&p)
        .map(|(&cl, &pl)| cipher::implied_key(cl, pl))
        .collect();
    Ok(score_repeats(k.len() as u64, count_adjacent_repeats(&k)))
}

fn score_repeats(length: u64, observed: u64) -> CausalTestReport {
    let e = causal_test_expectations(length, OBSERVED_REPEAT_RATE, ALPHABET as u32);
    let t = e.trials as f64;
    let causal_sd = (t * OBSERVED_REPEAT_RATE * (1.0 - OBSERVED_REPEAT_RATE)).sqrt();
    let z = |mean: f64, sd: f64| {
        if sd > 0.0 {
            (observed as f64 - mean) / sd
        } else {
            0.0
        }
    };
    let z_causal = z(e.biased_mean, causal_sd);
    let z_null = z(e.null_mean, e.null_sd);
    CausalTestReport {
        length,
        observed,
        causal_mean: e.biased_mean,
        causal_sd,
        null_mean: e.null_mean,
        null_sd: e.null_sd,
        z_causal,
        z_null,
        margin: z_null.abs() - z_causal.abs(),
    }
}

pub const CREDENTIAL_CSV_HEADER: &str =
    "position,planted,recovered,modal_count,runner_up_mean,z_margin";

pub fn write_credential_csv<W: Write>(mut w: W, r: &CredentialAttackReport) -> io::Result<()> {
    writeln!(w, "{CREDENTIAL_CSV_HEADER}")?;
    for i in 0..r.tallies.len() {
        writeln!(
            w,
            "{},{},{},{},{:.3},{:.3}",
            i + 1,
            r.planted[i],
            r.recovered[i],
            r.modal_tally(i),
            r.runner_up_mean(i),
            r.z_margin[i]
        )?;
    }
    Ok(())
}

/// One row per position, one column per difference residue.
pub fn write_tally_csv<W: Write>(mut w: W, r: &CredentialAttackReport) -> io::Result<()> {
    let cols: Vec<String> = (0..M).map(|d| format!("d{d}")).collect();
    writeln!(w, "position,{}", cols.join(","))?;
    for (i, t) in r.tallies.iter().enumerate() {
        let row: Vec<String> = t.iter().map(u64::to_string).collect();
        writeln!(w, "{},{}", i + 1, row.join(","))?;
    }
    Ok(())
}

pub fn write_causal_csv<W: Write>(mut w: W, r: &CausalTestReport) -> io::Result<()> {
    writeln!(w, "key,value")?;
    writeln!(w, "length,{}", r.length)?;
    writeln!(w, "observed,{}", r.observed)?;
    writeln!(w, "causal_mean,{:.3}", r.causal_mean)?;
    writeln!(w, "causal_sd,{:.3}", r.causal_sd)?;
    writeln!(w, "null_mean,{:.3}", r.null_mean)?;
    writeln!(w, "null_sd,{:.3}", r.null_sd)?;
    writeln!(w, "z_causal,{:.3}", r.z_causal)?;
    writeln!(w, "z_null,{:.3}", r.z_null)?;
    writeln!(w, "margin,{:.3}", r.margin)?;
    Ok(())
}
