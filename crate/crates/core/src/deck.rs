//! Deck representation, text formats, seeded shuffling and adjacency metrics.
//!
//! Positions are 1-indexed in every public method: position 1 is the top of
//! the deck. [`Deck::cards`] exposes the raw slice, where index 0 holds
//! position 1.
//!
//! A deck of size `n` holds the values `1..=n`. The two highest values play
//! the jokers: `n - 1` is the slow joker and `n` the fast joker.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::card::{number_to_card, CardLabel};
use crate::error::{Error, Result};
use crate::rng::Seed;

pub const STANDARD_SIZE: usize = 54;
pub const MIN_SIZE: usize = 5;
pub const MAX_SIZE: usize = 255;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Deck {
    cards: Vec<u8>,
}

impl Deck {
    /// Validates that `cards` is a permutation of `1..=cards.len()`.
    pub fn new(cards: Vec<u8>) -> Result<Self> {
        let n = cards.len();
        if !(MIN_SIZE..=MAX_SIZE).contains(&n) {
            return Err(Error::DeckSize(n));
        }
        let mut seen = vec![false; n + 1];
        for &c in &cards {
            let v = c as usize;
            if v == 0 || v > n {
                return Err(Error::ValueOutOfRange { value: v, n });
            }
            if seen[v] {
                return Err(Error::DuplicateValue(v));
            }
            seen[v] = true;
        }
        Ok(Deck { cards })
    }

    pub fn from_values(values: &[usize]) -> Result<Self> {
        let n = values.len();
        let mut cards = Vec::with_capacity(n);
        for &v in values {
            if v == 0 || v > n || v > MAX_SIZE {
                return Err(Error::ValueOutOfRange { value: v, n });
            }
            cards.push(v as u8);
        }
        Deck::new(cards)
    }

    /// Caller guarantees the permutation invariant.
    pub(crate) fn from_vec_unchecked(cards: Vec<u8>) -> Self {
        debug_assert!(Deck::new(cards.clone()).is_ok());
        Deck { cards }
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Deck {
            cards: (1..=n as u16).map(|v| v as u8).collect(),
        })
    }

    pub fn reversed(n: usize) -> Result<Self> {
        let mut d = Deck::identity(n)?;
        d.cards.reverse();
        Ok(d)
    }

    /// Fisher–Yates shuffle of the identity deck, driven by `seed`.
    pub fn shuffled(seed: Seed, n: usize) -> Result<Self> {
        let mut rng = seed.rng();
        Deck::shuffled_with(&mut rng, n)
    }

    pub fn shuffled_with<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Self> {
        let mut d = Deck::identity(n)?;
        d.cards.shuffle(rng);
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    /// Card values top to bottom; index 0 is position 1.
    pub fn cards(&self) -> &[u8] {
        &self.cards
    }

    pub(crate) fn cards_mut(&mut self) -> &mut [u8] {
        &mut self.cards
    }

    pub fn into_cards(self) -> Vec<u8> {
        self.cards
    }

    /// Card at 1-indexed `position`.
    pub fn at(&self, position: usize) -> u8 {
        self.cards[position - 1]
    }

    pub fn top(&self) -> u8 {
        self.cards[0]
    }

    pub fn bottom(&self) -> u8 {
        self.cards[self.cards.len() - 1]
    }

    /// 1-indexed position of `value`, if present.
    pub fn position_of(&self, value: u8) -> Option<usize> {
        self.cards.iter().position(|&c| c == value).map(|i| i + 1)
    }

    pub fn slow_joker(&self) -> u8 {
        (self.cards.len() - 1) as u8
    }

    pub fn fast_joker(&self) -> u8 {
        self.cards.len() as u8
    }

    pub fn is_joker(&self, value: u8) -> bool {
        value as usize >= self.cards.len() - 1
    }

    pub fn to_numeric_string(&self) -> String {
        let parts: Vec<String> = self.cards.iter().map(|c| c.to_string()).collect();
        parts.join(",")
    }

    /// Card-label form, only defined for the 54-card deck.
    pub fn to_card_string(&self) -> Result<String> {
        if self.len() != STANDARD_SIZE {
            return Err(Error::InvalidInput(format!(
                "card labels need a {STANDARD_SIZE}-card deck, got {}",
                self.len()
            )));
        }
        let parts: Vec<String> = self
            .cards
            .iter()
            .map(|&c| number_to_card(c as usize).map(|l| l.to_string()))
            .collect::<Result<_>>()?;
        Ok(parts.join(" "))
    }
}

fn check_size(n: usize) -> Result<()> {
    if (MIN_SIZE..=MAX_SIZE).contains(&n) {
        Ok(())
    } else {
        Err(Error::DeckSize(n))
    }
}

impl fmt::Debug for Deck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Deck[{}]", self.to_numeric_string())
    }
}

impl fmt::Display for Deck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_numeric_string())
    }
}

impl FromStr for Deck {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_deck(s)
    }
}

/// Parses either the numeric form (`26,10,43,...`) or the card form
/// (`KD 10C 4S ... jo ... JO`). Numeric form is chosen when the text
/// contains a comma.
pub fn parse_deck(text: &str) -> Result<Deck> {
    let text = text.trim();
    let values: Vec<usize> = if text.contains(',') {
        text.split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<usize>()
                    .map_err(|_| Error::UnknownToken(t.to_string()))
            })
            .collect::<Result<_>>()?
    } else {
        text.split_whitespace()
            .map(|t| t.parse::<CardLabel>().map(|l| l.value() as usize))
            .collect::<Result<_>>()?
    };
    let n = values.len();
    check_size(n)?;
    let mut seen = vec![false; n + 1];
    for &v in &values {
        if v == 0 || v > n {
            return Err(Error::ValueOutOfRange { value: v, n });
        }
        if seen[v] {
            return Err(Error::DuplicateValue(v));
        }
        seen[v] = true;
    }
    if let Some(missing) = (1..=n).find(|&v| !seen[v]) {
        return Err(Error::MissingValue(missing));
    }
    Deck::from_values(&values)
}

/// Numeric text form.
pub fn format_deck(deck: &Deck) -> String {
    deck.to_numeric_string()
}

/// Number of positions `i` in `1..n` with `cards[i+1] == cards[i] + 1`.
pub fn adjacency_count(deck: &Deck) -> usize {
    deck.cards.windows(2).filter(|w| w[1] == w[0] + 1).count()
}

/// Number of neighbouring pairs of `a` that are still neighbours, in the
/// same order, in `b`. This is the adjacency count of `b` after relabelling
/// the cards so that `a` becomes the identity; with `a` the identity it is
/// `adjacency_count(b)`.
pub fn adjacencies_preserved(a: &Deck, b: &Deck) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    let n = a.len();
    let mut successor_in_b = vec![0u8; n + 1];
    for w in b.cards.windows(2) {
        successor_in_b[w[0] as usize] = w[1];
    }
    Ok(a.cards
        .windows(2)
        .filter(|w| successor_in_b[w[0] as usize] == w[1])
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const PAPER_DECK: &str = "26,10,43,6,29,1,28,53,14,38,27,47,32,20,34,9,19,4,\
        18,24,2,39,35,33,51,7,3,36,8,16,54,15,11,25,21,31,44,52,40,50,49,17,41,22,5,\
        23,42,37,13,48,46,12,30,45";

    const PAPER_DECK_CARDS: &str = "KD 10C 4S 6C 3H AC 2H jo AD QH AH 8S 6H 7D 8H 9C 6D 4C \
        5D JD 2C KH 9H 7H QS 7C 3C 10H 8C 3D JO 2D JC QD 8D 5H 5S KS AS JS 10S 4D 2S 9D 5C \
        10D 3S JH KC 9S 7S QC 4H 6S";

    #[test]
    fn card_and_numeric_tables_agree() {
        let numeric = parse_deck(PAPER_DECK).unwrap();
        let cards = parse_deck(PAPER_DECK_CARDS).unwrap();
        assert_eq!(numeric, cards);
        assert_eq!(numeric.top(), 26);
        assert_eq!(numeric.position_of(53), Some(8));
        assert_eq!(numeric.position_of(54), Some(31));
    }

    #[test]
    fn format_round_trips() {
        let d = parse_deck(PAPER_DECK).unwrap();
        let canonical = format_deck(&d);
        assert_eq!(format_deck(&parse_deck(&canonical).unwrap()), canonical);
        let cards = d.to_card_string().unwrap();
        assert_eq!(parse_deck(&cards).unwrap(), d);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_deck("1,1,3,4,5"), Err(Error::DuplicateValue(1)));
        assert_eq!(
            parse_deck("1,2,3,4,6"),
            Err(Error::ValueOutOfRange { value: 6, n: 5 })
        );
        assert!(matches!(parse_deck("1,2,x,4,5"), Err(Error::UnknownToken(_))));
        assert!(matches!(parse_deck("KD ZZ"), Err(Error::UnknownToken(_))));
        assert_eq!(parse_deck("1,2,3"), Err(Error::DeckSize(3)));
        // A card-form deck with a repeated card never reaches 54 distinct values.
        let dup = PAPER_DECK_CARDS.replacen("10C", "KD", 1);
        assert_eq!(parse_deck(&dup), Err(Error::DuplicateValue(26)));
    }

    #[test]
    fn adjacency_examples() {
        let id = Deck::identity(54).unwrap();
        let rev = Deck::reversed(54).unwrap();
        assert_eq!(adjacency_count(&id), 53);
        assert_eq!(adjacency_count(&rev), 0);
        let mut rotated: Vec<usize> = (2..=54).collect();
        rotated.push(1);
        assert_eq!(adjacency_count(&Deck::from_values(&rotated).unwrap()), 52);
        assert_eq!(adjacencies_preserved(&id, &id).unwrap(), 53);
        assert_eq!(adjacencies_preserved(&id, &rev).unwrap(), 0);
        assert!(adjacencies_preserved(&id, &Deck::identity(6).unwrap()).is_err());
    }

    #[test]
    fn preserved_adjacencies_follow_relabelling() {
        let mut rng = Seed(17).rng();
        for _ in 0..200 {
            let a = Deck::shuffled_with(&mut rng, 20).unwrap();
            let b = Deck::shuffled_with(&mut rng, 20).unwrap();
            assert_eq!(adjacencies_preserved(&a, &a).unwrap(), 19);
            // Relabel so that a becomes the identity.
            let mut label = vec![0u8; 21];
            for (i, &c) in a.cards().iter().enumerate() {
                label[c as usize] = i as u8 + 1;
            }
            let relabelled = Deck::new(b.cards().iter().map(|&c| label[c as usize]).collect()).unwrap();
            assert_eq!(adjacencies_preserved(&a, &b).unwrap(), adjacency_count(&relabelled));
            let id = Deck::identity(20).unwrap();
            assert_eq!(adjacencies_preserved(&id, &b).unwrap(), adjacency_count(&b));
        }
    }

    #[test]
    fn shuffle_is_deterministic_permutation() {
        for s in 0..50 {
            let a = Deck::shuffled(Seed(s), 54).unwrap();
            assert_eq!(a, Deck::shuffled(Seed(s), 54).unwrap());
            let mut sorted = a.cards().to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, (1..=54).collect::<Vec<u8>>());
        }
        assert!(Deck::shuffled(Seed(1), 4).is_err());
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Deck::new(vec![1, 2, 3, 4]).is_err());
        assert_eq!(Deck::new(vec![1, 2, 2, 4, 5]), Err(Error::DuplicateValue(2)));
        assert!(Deck::new(vec![0, 1, 2, 3, 4]).is_err());
    }
}
