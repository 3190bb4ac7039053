//! Functional graph of the update map: pre-images on any deck size and
//! exhaustive censuses on small decks.
//!
//! States of an `n`-card deck are addressed by their lexicographic rank
//! (factorial number system), so a census only stores one `u32` successor
//! per state.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::cipher::{self, CipherState};
use crate::deck::{Deck, MIN_SIZE};
use crate::error::{Error, Result};

/// 9! states.
pub const DEFAULT_CENSUS_BUDGET: u64 = 362_880;

/// Largest deck whose ranks fit the census tables.
pub const MAX_CENSUS_SIZE: usize = 12;

/// Largest deck that can be ranked into a `u64`.
pub const MAX_RANK_SIZE: usize = 20;

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Lexicographic rank of a permutation of `1..=n`, `n <= 20`.
pub fn rank(cards: &[u8]) -> u64 {
    let n = cards.len();
    assert!(n <= MAX_RANK_SIZE, "rank needs n <= {MAX_RANK_SIZE}");
    let mut used = 0u32;
    let mut r = 0u64;
    for (i, &c) in cards.iter().enumerate() {
        let v = c as u32 - 1;
        let smaller_unused = (!used & ((1u32 << v) - 1)).count_ones() as u64;
        r = r * (n - i) as u64 + smaller_unused;
        used |= 1 << v;
    }
    r
}

/// Inverse of [`rank`], written into `out` (whose length gives `n`).
pub fn unrank_into(mut r: u64, out: &mut [u8]) {
    let n = out.len();
    let mut digits = [0u8; MAX_RANK_SIZE];
    for i in 1..=n {
        digits[n - i] = (r % i as u64) as u8;
        r /= i as u64;
    }
    let mut pool: Vec<u8> = (1..=n as u8).collect();
    for (slot, &d) in out.iter_mut().zip(&digits[..n]) {
        *slot = pool.remove(d as usize);
    }
}

pub fn unrank(r: u64, n: usize) -> Result<Deck> {
    if !(MIN_SIZE..=MAX_RANK_SIZE).contains(&n) {
        return Err(Error::DeckSize(n));
    }
    if r >= factorial(n) {
        return Err(Error::InvalidInput(format!("rank {r} out of range for n = {n}")));
    }
    let mut cards = vec![0u8; n];
    unrank_into(r, &mut cards);
    Ok(Deck::from_vec_unchecked(cards))
}

/// A candidate produced by running the update backwards, with the branch
/// taken at each joker move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageCandidate {
    pub deck: Deck,
    pub slow_wrapped: bool,
    /// First and second fast-joker step.
    pub fast_wrapped: [bool; 2],
    pub verified: bool,
}

fn uncount_cut(cards: &mut [u8]) {
    let n = cards.len();
    let k = cards[n - 1] as usize;
    if k < n - 1 {
        cards[..n - 1].rotate_right(k);
    }
}

/// Every deck `u` with `advance(u, joker) == v`, flagged when the joker
/// came from the bottom.
fn unadvance(v: &[u8], joker: u8) -> Vec<(Vec<u8>, bool)> {
    let p = v.iter().position(|&c| c == joker).expect("joker present");
    let mut out = Vec::with_capacity(2);
    if p >= 1 {
        let mut u = v.to_vec();
        u.swap(p - 1, p);
        out.push((u, false));
    }
    if p == 1 {
        let mut u = v.to_vec();
        u[1..].rotate_left(1);
        out.push((u, true));
    }
    out
}

/// All backward candidates for `s`, verified or not.
pub fn preimage_candidates(s: &CipherState) -> Vec<PreimageCandidate> {
    let target = s.deck().cards();
    let n = target.len();
    let slow = (n - 1) as u8;
    let fast = n as u8;

    let mut moved = target.to_vec();
    uncount_cut(&mut moved);
    // The triple cut is an involution.
    cipher::triple_cut(&mut moved);

    let mut out = Vec::new();
    for (a, second) in unadvance(&moved, fast) {
        for (b, first) in unadvance(&a, fast) {
            for (c, slow_wrapped) in unadvance(&b, slow) {
                let mut forward = c.clone();
                cipher::update_stepwise(&mut forward);
                out.push(PreimageCandidate {
                    deck: Deck::from_vec_unchecked(c),
                    slow_wrapped,
                    fast_wrapped: [first, second],
                    verified: forward == target,
                });
            }
        }
    }
    out
}

/// All states `x` with `update(x) == s`, sorted.
pub fn preimages(s: &CipherState) -> Vec<CipherState> {
    let mut decks: Vec<Deck> = preimage_candidates(s)
        .into_iter()
        .filter(|c| c.verified)
        .map(|c| c.deck)
        .collect();
    decks.sort();
    decks.dedup();
    decks.into_iter().map(CipherState::new).collect()
}

fn check_census_size(n: usize, budget: u64) -> Result<u64> {
    if !(MIN_SIZE..=MAX_CENSUS_SIZE).contains(&n) {
        return Err(Error::DeckSize(n));
    }
    let states = factorial(n);
    if states > budget {
        return Err(Error::BudgetExceeded { states, budget });
    }
    Ok(states)
}

/// Successor rank of every state of an `n`-card deck.
pub fn forward_table(n: usize, budget: u64) -> Result<Vec<u32>> {
    let states = check_census_size(n, budget)?;
    let mut next = vec![0u32; states as usize];
    const CHUNK: usize = 4096;
    next.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, out)| {
        let mut cards = vec![0u8; n];
        let base = (chunk * CHUNK) as u64;
        for (i, slot) in out.iter_mut().enumerate() {
            unrank_into(base + i as u64, &mut cards);
            cipher::update_stepwise(&mut cards);
            *slot = rank(&cards) as u32;
        }
    });
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCensus {
    pub n: usize,
    pub states: u64,
    /// `in_degree[k]` = number of states with exactly `k` pre-images.
    pub in_degree: Vec<u64>,
    pub image_size: u64,
    pub cycle_count: u64,
    /// Cycle length -> number of cycles of that length.
    pub cycle_lengths: BTreeMap<u64, u64>,
    pub cyclic_states: u64,
    pub tail_states: u64,
    pub max_tail_length: u64,
}

impl GraphCensus {
    pub fn max_in_degree(&self) -> usize {
        self.in_degree.len().saturating_sub(1)
    }

    pub fn image_fraction(&self) -> f64 {
        self.image_size as f64 / self.states as f64
    }

    pub fn largest_cycle(&self) -> u64 {
        self.cycle_lengths.keys().next_back().copied().unwrap_or(0)
    }

    /// Census of an arbitrary successor table.
    pub fn from_table(n: usize, next: &[u32]) -> GraphCensus {
        let states = next.len();
        let mut indeg = vec![0u32; states];
        for &t in next {
            indeg[t as usize] += 1;
        }
        let mut in_degree = Vec::new();
        for &d in &indeg {
            let d = d as usize;
            if in_degree.len() <= d {
                in_degree.resize(d + 1, 0);
            }
            in_degree[d] += 1;
        }
        let image_size = states as u64 - in_degree.first().copied().unwrap_or(0);

        const UNSEEN: u8 = 0;
        const ON_PATH: u8 = 1;
        const DONE: u8 = 2;
        let mut mark = vec![UNSEEN; states];
        // Tail distance once DONE; index into `path` while ON_PATH.
        let mut depth = vec![0u32; states];
        let mut cycle_lengths = BTreeMap::new();
        let mut cyclic_states = 0u64;
        let mut max_tail = 0u64;
        let mut path: Vec<u32> = Vec::new();
        for start in 0..states {
            if mark[start] != UNSEEN {
                continue;
            }
            path.clear();
            let mut x = start;
            while mark[x] == UNSEEN {
                mark[x] = ON_PATH;
                depth[x] = path.len() as u32;
                path.push(x as u32);
                x = next[x] as usize;
            }
            let mut base = if mark[x] == ON_PATH {
                let from = depth[x] as usize;
                let len = (path.len() - from) as u64;
                *cycle_lengths.entry(len).or_insert(0) += 1;
                cyclic_states += len;
                for &c in &path[from..] {
                    mark[c as usize] = DONE;
                    depth[c as usize] = 0;
                }
                path.truncate(from);
                0
            } else {
                depth[x]
            };
            for &t in path.iter().rev() {
                base += 1;
                mark[t as usize] = DONE;
                depth[t as usize] = base;
            }
            max_tail = max_tail.max(base as u64);
        }
        GraphCensus {
            n,
            states: states as u64,
            in_degree,
            image_size,
            cycle_count: cycle_lengths.values().sum(),
            cycle_lengths,
            cyclic_states,
            tail_states: states as u64 - cyclic_states,
            max_tail_length: max_tail,
        }
    }
}

pub fn census(n: usize) -> Result<GraphCensus> {
    census_with_budget(n, DEFAULT_CENSUS_BUDGET)
}

pub fn census_with_budget(n: usize, budget: u64) -> Result<GraphCensus> {
    let next = forward_table(n, budget)?;
    Ok(GraphCensus::from_table(n, &next))
}

pub const IN_DEGREE_CSV_HEADER: &str = "in_degree,states";
pub const CYCLE_CSV_HEADER: &str = "cycle_length,cycles";
pub const CENSUS_SUMMARY_HEADER: &str =
    "n,states,image_size,cycles,cyclic_states,tail_states,max_tail,largest_cycle";

pub fn write_in_degree_csv<W: Write>(mut w: W, c: &GraphCensus) -> io::Result<()> {
    writeln!(w, "{IN_DEGREE_CSV_HEADER}")?;
    for (k, count) in c.in_degree.iter().enumerate() {
        writeln!(w, "{k},{count}")?;
    }
    Ok(())
}

pub fn write_cycle_csv<W: Write>(mut w: W, c: &GraphCensus) -> io::Result<()> {
    writeln!(w, "{CYCLE_CSV_HEADER}")?;
    for (len, count) in &c.cycle_lengths {
        writeln!(w, "{len},{count}")?;
    }
    Ok(())
}

pub fn census_summary_row(c: &GraphCensus) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        c.n,
        c.states,
        c.image_size,
        c.cycle_count,
        c.cyclic_states,
        c.tail_states,
        c.max_tail_length,
        c.largest_cycle()
    )
}

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Reference values for a uniform random bijection on `states` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BijectionBaseline {
    pub states: u64,
    /// Harmonic number `H_N`.
    pub expected_cycles: f64,
    /// `ln N + gamma`.
    pub expected_cycles_asymptotic: f64,
    /// Mean length of the cycle through a uniform state, `(N + 1) / 2`.
    pub mean_cycle_through_state: f64,
    pub landmark_fraction: f64,
}

impl BijectionBaseline {
    /// Probability that a uniform state lies on a cycle of length at least
    /// `c * N`. The cycle through a fixed point has uniform length on `1..=N`.
    pub fn prob_cycle_at_least(&self, c: f64) -> f64 {
        let n = self.states as f64;
        let min_len = (c * n).ceil().max(1.0);
        if min_len > n {
            return 0.0;
        }
        (n - min_len + 1.0) / n
    }
}

pub fn harmonic(n: u64) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

pub fn bijection_baseline(states: u64) -> Result<BijectionBaseline> {
    if states == 0 {
        return Err(Error::InvalidInput("need at least one state".into()));
    }
    Ok(BijectionBaseline {
        states,
        expected_cycles: harmonic(states),
        expected_cycles_asymptotic: (states as f64).ln() + EULER_GAMMA,
        mean_cycle_through_state: (states as f64 + 1.0) / 2.0,
        landmark_fraction: 1.0 - (-1.0f64).exp(),
    })
}
