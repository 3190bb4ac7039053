//! Cryptanalysis workbench for the Solitaire (Pontifex) hand cipher.

pub mod attacks;
pub mod card;
pub mod cipher;
pub mod deck;
pub mod error;
pub mod experiment;
pub mod golden;
pub mod graph;
pub mod model;
pub mod repro;
pub mod rng;
pub mod stats;
pub mod variants;

pub use card::{card_to_number, number_to_card, CardLabel, Suit};
pub use cipher::{CipherState, Keystream, OutputMode, StepTrace};
pub use deck::{adjacencies_preserved, adjacency_count, format_deck, parse_deck, Deck};
pub use error::{Error, Result};
pub use rng::Seed;
