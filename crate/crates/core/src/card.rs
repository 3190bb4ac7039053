//! Playing-card labels for the standard 54-card deck.
//!
//! Values run 1..=52 by rank plus a suit offset (clubs 0, diamonds 13,
//! hearts 26, spades 39). The two jokers are distinguishable: 53 is the slow
//! joker (`jo`) and 54 is the fast joker (`JO`). Schneier's original cipher
//! labels both jokers 53 for counting purposes; this crate keeps them apart.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suit {
    Clubs,
    Diamonds,
    Hearts,
    Spades,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Clubs, Suit::Diamonds, Suit::Hearts, Suit::Spades];

    pub fn offset(self) -> u8 {
        match self {
            Suit::Clubs => 0,
            Suit::Diamonds => 13,
            Suit::Hearts => 26,
            Suit::Spades => 39,
        }
    }

    fn letter(self) -> char {
        match self {
            Suit::Clubs => 'C',
            Suit::Diamonds => 'D',
            Suit::Hearts => 'H',
            Suit::Spades => 'S',
        }
    }

    fn from_symbol(c: char) -> Option<Suit> {
        match c {
            'C' | 'c' | '♣' => Some(Suit::Clubs),
            'D' | 'd' | '♦' => Some(Suit::Diamonds),
            'H' | 'h' | '♥' => Some(Suit::Hearts),
            'S' | 's' | '♠' => Some(Suit::Spades),
            _ => None,
        }
    }
}

/// A card of the 54-card deck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CardLabel {
    /// `rank` is 1 (ace) through 13 (king).
    Suited { rank: u8, suit: Suit },
    SlowJoker,
    FastJoker,
}

impl CardLabel {
    pub fn suited(rank: u8, suit: Suit) -> Result<Self> {
        if (1..=13).contains(&rank) {
            Ok(CardLabel::Suited { rank, suit })
        } else {
            Err(Error::InvalidInput(format!("rank {rank} outside 1..=13")))
        }
    }

    pub fn value(self) -> u8 {
        card_to_number(self)
    }
}

/// Numeric value 1..=54 of a card.
pub fn card_to_number(label: CardLabel) -> u8 {
    match label {
        CardLabel::Suited { rank, suit } => rank + suit.offset(),
        CardLabel::SlowJoker => 53,
        CardLabel::FastJoker => 54,
    }
}

/// Inverse of [`card_to_number`].
pub fn number_to_card(value: usize) -> Result<CardLabel> {
    match value {
        1..=52 => {
            let v = (value - 1) as u8;
            Ok(CardLabel::Suited {
                rank: v % 13 + 1,
                suit: Suit::ALL[(v / 13) as usize],
            })
        }
        53 => Ok(CardLabel::SlowJoker),
        54 => Ok(CardLabel::FastJoker),
        _ => Err(Error::ValueOutOfRange { value, n: 54 }),
    }
}

impl fmt::Display for CardLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CardLabel::Suited { rank, suit } => {
                let r = match rank {
                    1 => "A".to_string(),
                    11 => "J".to_string(),
                    12 => "Q".to_string(),
                    13 => "K".to_string(),
                    n => n.to_string(),
                };
                write!(f, "{r}{}", suit.letter())
            }
            CardLabel::SlowJoker => f.write_str("jo"),
            CardLabel::FastJoker => f.write_str("JO"),
        }
    }
}

impl FromStr for CardLabel {
    type Err = Error;

    /// Accepts `KD`, `10C`, `A♠`, `jo` (slow joker) and `JO` (fast joker).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jo" => return Ok(CardLabel::SlowJoker),
            "JO" => return Ok(CardLabel::FastJoker),
            _ => {}
        }
        let bad = || Error::UnknownToken(s.to_string());
        let suit_char = s.chars().last().ok_or_else(bad)?;
        let suit = Suit::from_symbol(suit_char).ok_or_else(bad)?;
        let rank_str = &s[..s.len() - suit_char.len_utf8()];
        let rank = match rank_str {
            "A" | "a" => 1,
            "J" | "j" => 11,
            "Q" | "q" => 12,
            "K" | "k" => 13,
            other => match other.parse::<u8>() {
                Ok(r @ 2..=10) => r,
                _ => return Err(bad()),
            },
        };
        CardLabel::suited(rank, suit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn king_of_diamonds_is_26() {
        let k: CardLabel = "KD".parse().unwrap();
        assert_eq!(card_to_number(k), 26);
        assert_eq!(number_to_card(26).unwrap(), k);
        assert_eq!("K♦".parse::<CardLabel>().unwrap(), k);
    }

    #[test]
    fn small_values() {
        assert_eq!(card_to_number("AC".parse().unwrap()), 1);
        assert_eq!(number_to_card(3).unwrap().to_string(), "3C");
        assert_eq!(number_to_card(53).unwrap(), CardLabel::SlowJoker);
        assert_eq!(card_to_number("JO".parse().unwrap()), 54);
    }

    #[test]
    fn round_trip_all_values() {
        for v in 1..=54 {
            let label = number_to_card(v).unwrap();
            assert_eq!(card_to_number(label) as usize, v);
            assert_eq!(label.to_string().parse::<CardLabel>().unwrap(), label);
        }
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "1C", "11C", "KX", "Jo", "K", "0S"] {
            assert!(bad.parse::<CardLabel>().is_err(), "{bad}");
        }
        assert!(number_to_card(0).is_err());
        assert!(number_to_card(55).is_err());
        assert!(CardLabel::suited(14, Suit::Clubs).is_err());
    }
}
