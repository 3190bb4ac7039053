//! The Solitaire state machine.
//!
//! One update `U` is: advance the slow joker one place, advance the fast
//! joker two places, triple cut, count cut. A joker on the bottom card that
//! must advance instead re-enters at position 2 by a right rotation of the
//! last `n - 1` cards. The extraction `E` reads `S[S[1] + 1]`, or `S[n]` when
//! the top card is the fast joker.
//!
//! [`CipherState::keystream`] applies an update before every extraction, so
//! the first output is `E(U(s0))`. [`CipherState::extract`] probes the
//! current state without updating.

use std::io::{self, Write};

use crate::deck::Deck;
use crate::error::{Error, Result};

pub const ALPHABET: u8 = 26;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CipherState {
    deck: Deck,
    step: u64,
    jokers: JokerPos,
}

/// Output reduction applied to raw extractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    /// Every extraction, values `1..=n`.
    Raw,
    /// Jokers dropped, values `1..=n-2` unreduced. For the full deck this is
    /// the keystream "mod 54".
    Cards,
    /// Jokers dropped, remaining values reduced to `1..=26`.
    Letters,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Keystream {
    /// One value per update.
    pub raw: Vec<u8>,
    /// `raw` with the joker values removed, reduced to `1..=26`.
    pub letters: Vec<u8>,
}

impl Keystream {
    /// `raw` with the jokers removed, unreduced.
    pub fn cards(&self, n: usize) -> Vec<u8> {
        self.raw
            .iter()
            .copied()
            .filter(|&v| (v as usize) < n - 1)
            .collect()
    }

    pub fn values(&self, mode: OutputMode, n: usize) -> Vec<u8> {
        match mode {
            OutputMode::Raw => self.raw.clone(),
            OutputMode::Cards => self.cards(n),
            OutputMode::Letters => self.letters.clone(),
        }
    }
}

/// Per-update instrumentation. Positions are 1-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepTrace {
    /// Number of updates applied, including this one.
    pub t: u64,
    /// Top card of the updated deck: the card dereferenced by this extraction.
    pub top_card_value: u8,
    pub extracted_value: u8,
    pub slow_pos_before: u8,
    pub slow_pos_after: u8,
    pub fast_pos_before: u8,
    pub fast_pos_after: u8,
    /// The count card: bottom card after the triple cut, unchanged by the count cut.
    pub bottom_card_after_update: u8,
    /// The previous top card came back to the top with its prefix intact,
    /// forcing this extraction to repeat the previous one.
    pub story_flag: bool,
}

pub const TRACE_CSV_HEADER: &str = "t,top_card,extracted,slow_before,slow_after,fast_before,fast_after,count_card,story";

impl StepTrace {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.t,
            self.top_card_value,
            self.extracted_value,
            self.slow_pos_before,
            self.slow_pos_after,
            self.fast_pos_before,
            self.fast_pos_after,
            self.bottom_card_after_update,
            u8::from(self.story_flag)
        )
    }
}

impl CipherState {
    pub fn new(deck: Deck) -> Self {
        let jokers = JokerPos::scan(deck.cards());
        CipherState {
            deck,
            step: 0,
            jokers,
        }
    }

    pub fn deck(&self) -> &Deck {
        &self.deck
    }

    pub fn into_deck(self) -> Deck {
        self.deck
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn n(&self) -> usize {
        self.deck.len()
    }

    pub fn advance_slow_joker(&mut self) {
        let n = self.n();
        advance_joker(self.deck.cards_mut(), (n - 1) as u8);
        self.resync();
    }

    pub fn advance_fast_joker(&mut self) {
        let n = self.n();
        let cards = self.deck.cards_mut();
        advance_joker(cards, n as u8);
        advance_joker(cards, n as u8);
        self.resync();
    }

    pub fn triple_cut(&mut self) {
        triple_cut(self.deck.cards_mut());
        self.resync();
    }

    pub fn count_cut(&mut self) {
        count_cut(self.deck.cards_mut());
        self.resync();
    }

    fn resync(&mut self) {
        self.jokers = JokerPos::scan(self.deck.cards());
    }

    /// One full update; increments the step index.
    pub fn update(&mut self) {
        update_in_place(self.deck.cards_mut(), &mut self.jokers);
        self.step += 1;
    }

    pub fn extract(&self) -> u8 {
        extract(self.deck.cards())
    }

    /// Update then extract.
    pub fn next_raw(&mut self) -> u8 {
        self.update();
        self.extract()
    }

    /// Update/extract until a non-joker value appears; returns it reduced to `1..=26`.
    pub fn next_letter(&mut self) -> u8 {
        loop {
            let v = self.next_raw();
            if let Some(l) = to_letter(v, self.n()) {
                return l;
            }
        }
    }

    /// Update/extract until a non-joker value appears.
    pub fn next_card(&mut self) -> u8 {
        let n = self.n();
        loop {
            let v = self.next_raw();
            if (v as usize) < n - 1 {
                return v;
            }
        }
    }

    pub fn next_output(&mut self, mode: OutputMode) -> u8 {
        match mode {
            OutputMode::Raw => self.next_raw(),
            OutputMode::Cards => self.next_card(),
            OutputMode::Letters => self.next_letter(),
        }
    }

    /// `len` outputs in the given mode. In the joker-skipping modes more
    /// than `len` updates may be applied; `raw` records every extraction and
    /// `len` counts the non-joker outputs.
    pub fn keystream(&mut self, len: usize, mode: OutputMode) -> Keystream {
        let n = self.n();
        let mut ks = Keystream::default();
        match mode {
            OutputMode::Raw => {
                ks.raw.reserve(len);
                for _ in 0..len {
                    let v = self.next_raw();
                    ks.raw.push(v);
                    if let Some(l) = to_letter(v, n) {
                        ks.letters.push(l);
                    }
                }
            }
            OutputMode::Cards | OutputMode::Letters => {
                ks.letters.reserve(len);
                while ks.letters.len() < len {
                    let v = self.next_raw();
                    ks.raw.push(v);
                    if let Some(l) = to_letter(v, n) {
                        ks.letters.push(l);
                    }
                }
            }
        }
        ks
    }

    /// Raw-mode keystream plus one [`StepTrace`] per update.
    pub fn keystream_traced(&mut self, len: usize) -> (Keystream, Vec<StepTrace>) {
        let mut ks = Keystream::default();
        let mut traces = Vec::with_capacity(len);
        for _ in 0..len {
            let tr = self.traced_step();
            ks.raw.push(tr.extracted_value);
            if let Some(l) = to_letter(tr.extracted_value, self.n()) {
                ks.letters.push(l);
            }
            traces.push(tr);
        }
        (ks, traces)
    }

    /// One update and extraction with instrumentation.
    pub fn traced_step(&mut self) -> StepTrace {
        let n = self.n();
        let before_top = self.deck.top();
        let slow = (n - 1) as u8;
        let fast = n as u8;
        let slow_before = self.deck.position_of(slow).unwrap_or(0) as u8;
        let fast_before = self.deck.position_of(fast).unwrap_or(0) as u8;
        let mut before = [0u8; 256];
        before[..n].copy_from_slice(self.deck.cards());

        self.advance_slow_joker();
        self.advance_fast_joker();
        let moved = self.deck.cards();
        let slow_after = self.deck.position_of(slow).unwrap_or(0) as u8;
        let fast_after = self.deck.position_of(fast).unwrap_or(0) as u8;
        let story = story_holds(&before[..n], moved, before_top);

        self.triple_cut();
        self.count_cut();
        self.step += 1;

        StepTrace {
            t: self.step,
            top_card_value: self.deck.top(),
            extracted_value: self.extract(),
            slow_pos_before: slow_before,
            slow_pos_after: slow_after,
            fast_pos_before: fast_before,
            fast_pos_after: fast_after,
            bottom_card_after_update: self.deck.bottom(),
            story_flag: story,
        }
    }
}

/// The repeat mechanism. After the joker moves let the top-most joker sit at
/// 0-indexed `f`, having advanced normally (slow by one place, fast by two)
/// and so just passed the card now at `f - 1`: the count card. When the
/// count card's value is `n - f`, the triple cut and count cut together lift
/// `moved[..f - 1]` back to the top. If the dereferenced card `D` and the
/// card `D` places below it were among them and untouched by the joker
/// moves, the next extraction repeats.
fn story_holds(before: &[u8], moved: &[u8], deref: u8) -> bool {
    let n = moved.len();
    let Some(f) = moved.iter().position(|&c| c as usize >= n - 1) else {
        return false;
    };
    let d = deref as usize;
    if f < 3 || d + 2 > f {
        return false;
    }
    let stride = if moved[f] as usize == n { 2 } else { 1 };
    if before[f - stride] != moved[f] {
        return false;
    }
    if moved[f - 1] as usize != n - f {
        return false;
    }
    before[..=d] == moved[..=d]
}

/// Letter reduction: `None` for jokers, otherwise `((v - 1) mod 26) + 1`.
#[inline]
pub fn to_letter(v: u8, n: usize) -> Option<u8> {
    if v as usize >= n - 1 {
        None
    } else {
        Some((v - 1) % ALPHABET + 1)
    }
}

#[inline]
pub(crate) fn advance_joker(cards: &mut [u8], joker: u8) {
    let n = cards.len();
    let i = cards.iter().position(|&c| c == joker).expect("joker present");
    if i + 1 < n {
        cards.swap(i, i + 1);
    } else {
        cards[1..].rotate_right(1);
    }
}

/// Swap the block above the top-most joker with the block below the
/// bottom-most joker. Joker identities do not matter.
#[inline]
pub(crate) fn triple_cut(cards: &mut [u8]) {
    let n = cards.len();
    let slow = (n - 1) as u8;
    let i = cards.iter().position(|&c| c >= slow).expect("joker present");
    let j = n - 1 - cards.iter().rev().position(|&c| c >= slow).expect("joker present");
    // [B | M | A] with B = ..i, M = i..=j, A = j+1.. becomes [A | M | B].
    cards.rotate_left(i);
    let middle = j + 1 - i;
    cards[..n - i].rotate_left(middle);
}

#[inline]
pub(crate) fn count_cut(cards: &mut [u8]) {
    let n = cards.len();
    let k = cards[n - 1] as usize;
    if k >= n - 1 {
        return;
    }
    cards[..n - 1].rotate_left(k);
}

/// 0-indexed positions of the slow and fast jokers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct JokerPos {
    slow: usize,
    fast: usize,
}

impl JokerPos {
    pub(crate) fn scan(cards: &[u8]) -> Self {
        let n = cards.len();
        let slow = (n - 1) as u8;
        let mut pos = JokerPos { slow: 0, fast: 0 };
        for (i, &c) in cards.iter().enumerate() {
            if c == slow {
                pos.slow = i;
            } else if c > slow {
                pos.fast = i;
            }
        }
        pos
    }
}

/// Full update with joker positions carried across the moves and both cuts
/// written through one scratch copy. Agrees with [`update_stepwise`].
#[inline]
pub(crate) fn update_in_place(cards: &mut [u8], jokers: &mut JokerPos) {
    let n = cards.len();
    let last = n - 1;
    let JokerPos {
        slow: mut p,
        fast: mut q,
    } = *jokers;

    if p < last {
        cards.swap(p, p + 1);
        if q == p + 1 {
            q = p;
        }
        p += 1;
    } else {
        cards[1..].rotate_right(1);
        p = 1;
        if q >= 1 {
            q += 1;
        }
    }
    for _ in 0..2 {
        if q < last {
            cards.swap(q, q + 1);
            if p == q + 1 {
                p = q;
            }
            q += 1;
        } else {
            cards[1..].rotate_right(1);
            q = 1;
            if p >= 1 {
                p += 1;
            }
        }
    }

    let (i, j) = if p < q { (p, q) } else { (q, p) };
    let mut buf = [0u8; 256];
    let tmp = &mut buf[..n];
    let tail = last - j;
    tmp[..tail].copy_from_slice(&cards[j + 1..]);
    tmp[tail..tail + (j + 1 - i)].copy_from_slice(&cards[i..=j]);
    tmp[n - i..].copy_from_slice(&cards[..i]);
    p = tail + (p - i);
    q = tail + (q - i);

    let k = tmp[last] as usize;
    if k >= last {
        cards.copy_from_slice(tmp);
    } else {
        cards[..last - k].copy_from_slice(&tmp[k..last]);
        cards[last - k..last].copy_from_slice(&tmp[..k]);
        cards[last] = tmp[last];
        let shift = |x: usize| if x >= k { x - k } else { x + last - k };
        p = shift(p);
        q = shift(q);
    }
    *jokers = JokerPos { slow: p, fast: q };
}

/// Reference update built from the individual operations.
pub(crate) fn update_stepwise(cards: &mut [u8]) {
    let n = cards.len();
    advance_joker(cards, (n - 1) as u8);
    advance_joker(cards, n as u8);
    advance_joker(cards, n as u8);
    triple_cut(cards);
    count_cut(cards);
}

#[inline]
pub(crate) fn extract(cards: &[u8]) -> u8 {
    let n = cards.len();
    let top = cards[0] as usize;
    if top == n {
        cards[n - 1]
    } else {
        cards[top]
    }
}

/// Uppercase letters only; everything else is dropped.
pub fn normalize_text(text: &str) -> Vec<u8> {
    text.chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_uppercase() as u8 - b'A' + 1)
        .collect()
}

pub fn letters_to_string(letters: &[u8]) -> String {
    letters.iter().map(|&l| (b'A' + l - 1) as char).collect()
}

/// Shift each plaintext letter forward by `k - 1` places: with `A` = 1,
/// ciphertext `c = ((p + k - 2) mod 26) + 1`. Key value 1 leaves a letter
/// unchanged and an all-`A` plaintext encrypts to the keystream itself.
pub fn combine(p: u8, k: u8) -> u8 {
    (p + k - 2) % ALPHABET + 1
}

pub fn uncombine(c: u8, k: u8) -> u8 {
    (c + ALPHABET - k) % ALPHABET + 1
}

/// Keystream value implied by a plaintext/ciphertext letter pair.
pub fn implied_key(c: u8, p: u8) -> u8 {
    (c + ALPHABET - p) % ALPHABET + 1
}

/// Encrypt `plaintext` (normalized to A..Z) with the letter keystream of `s0`.
pub fn encrypt(plaintext: &str, s0: &CipherState) -> Result<String> {
    let p = normalize_text(plaintext);
    if p.is_empty() && !plaintext.trim().is_empty() {
        return Err(Error::InvalidInput("plaintext has no letters".into()));
    }
    let mut s = s0.clone();
    let c: Vec<u8> = p.iter().map(|&pl| combine(pl, s.next_letter())).collect();
    Ok(letters_to_string(&c))
}

pub fn decrypt(ciphertext: &str, s0: &CipherState) -> Result<String> {
    let c = normalize_text(ciphertext);
    if c.is_empty() && !ciphertext.trim().is_empty() {
        return Err(Error::InvalidInput("ciphertext has no letters".into()));
    }
    let mut s = s0.clone();
    let p: Vec<u8> = c.iter().map(|&cl| uncombine(cl, s.next_letter())).collect();
    Ok(letters_to_string(&p))
}

/// One byte per value.
pub fn write_keystream_bytes<W: Write>(mut w: W, values: &[u8]) -> io::Result<()> {
    w.write_all(values)
}

/// One decimal value per line.
pub fn write_keystream_text<W: Write>(mut w: W, values: &[u8]) -> io::Result<()> {
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn write_traces_csv<W: Write>(mut w: W, traces: &[StepTrace]) -> io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for t in traces {
        writeln!(w, "{}", t.csv_row())?;
    }
    Ok(())
}
