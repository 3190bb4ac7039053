//! Worked decks from the published walkthroughs of the cipher, in numeric
//! form (slow joker 53, fast joker 54).

/// Example deck before any update. Top card 26 (K♦) extracts 3.
pub const EXAMPLE_DECK: [u8; 54] = [
    26, 10, 43, 6, 29, 1, 28, 53, 14, //
    38, 27, 47, 32, 20, 34, 9, 19, 4, //
    18, 24, 2, 39, 35, 33, 51, 7, 3, //
    36, 8, 16, 54, 15, 11, 25, 21, 31, //
    44, 52, 40, 50, 49, 17, 41, 22, 5, //
    23, 42, 37, 13, 48, 46, 12, 30, 45,
];

pub const EXAMPLE_DECK_CARDS: &str = "KD 10C 4S 6C 3H AC 2H jo AD \
    QH AH 8S 6H 7D 8H 9C 6D 4C \
    5D JD 2C KH 9H 7H QS 7C 3C \
    10H 8C 3D JO 2D JC QD 8D 5H \
    5S KS AS JS 10S 4D 2S 9D 5C \
    10D 3S JH KC 9S 7S QC 4H 6S";

pub const EXAMPLE_AFTER_JOKERS: [u8; 54] = [
    26, 10, 43, 6, 29, 1, 28, 14, 53, //
    38, 27, 47, 32, 20, 34, 9, 19, 4, //
    18, 24, 2, 39, 35, 33, 51, 7, 3, //
    36, 8, 16, 15, 11, 54, 25, 21, 31, //
    44, 52, 40, 50, 49, 17, 41, 22, 5, //
    23, 42, 37, 13, 48, 46, 12, 30, 45,
];

pub const EXAMPLE_AFTER_TRIPLE_CUT: [u8; 54] = [
    25, 21, 31, 44, 52, 40, 50, 49, 17, //
    41, 22, 5, 23, 42, 37, 13, 48, 46, //
    12, 30, 45, 53, 38, 27, 47, 32, 20, //
    34, 9, 19, 4, 18, 24, 2, 39, 35, //
    33, 51, 7, 3, 36, 8, 16, 15, 11, //
    54, 26, 10, 43, 6, 29, 1, 28, 14,
];

pub const EXAMPLE_AFTER_COUNT_CUT: [u8; 54] = [
    37, 13, 48, 46, 12, 30, 45, 53, 38, //
    27, 47, 32, 20, 34, 9, 19, 4, 18, //
    24, 2, 39, 35, 33, 51, 7, 3, 36, //
    8, 16, 15, 11, 54, 26, 10, 43, 6, //
    29, 1, 28, 25, 21, 31, 44, 52, 40, //
    50, 49, 17, 41, 22, 5, 23, 42, 14,
];

/// Deck just after an extraction: top card 3 reads the 6 at position 4;
/// the count card 46 sits directly above the slow joker.
pub const REPEAT_DECK: [u8; 54] = [
    3, 10, 43, 6, 29, 1, 28, 53, 46, //
    38, 27, 14, 32, 20, 34, 9, 19, 4, //
    18, 24, 2, 39, 35, 33, 51, 7, 26, //
    36, 8, 16, 54, 15, 11, 25, 21, 31, //
    44, 52, 40, 50, 49, 17, 41, 22, 5, //
    23, 42, 37, 13, 48, 47, 12, 30, 45,
];

pub const REPEAT_AFTER_JOKERS: [u8; 54] = [
    3, 10, 43, 6, 29, 1, 28, 46, 53, //
    38, 27, 14, 32, 20, 34, 9, 19, 4, //
    18, 24, 2, 39, 35, 33, 51, 7, 26, //
    36, 8, 16, 15, 11, 54, 25, 21, 31, //
    44, 52, 40, 50, 49, 17, 41, 22, 5, //
    23, 42, 37, 13, 48, 47, 12, 30, 45,
];

pub const REPEAT_AFTER_TRIPLE_CUT: [u8; 54] = [
    25, 21, 31, 44, 52, 40, 50, 49, 17, //
    41, 22, 5, 23, 42, 37, 13, 48, 47, //
    12, 30, 45, 53, 38, 27, 14, 32, 20, //
    34, 9, 19, 4, 18, 24, 2, 39, 35, //
    33, 51, 7, 26, 36, 8, 16, 15, 11, //
    54, 3, 10, 43, 6, 29, 1, 28, 46,
];

pub const REPEAT_AFTER_UPDATE: [u8; 54] = [
    3, 10, 43, 6, 29, 1, 28, 25, 21, //
    31, 44, 52, 40, 50, 49, 17, 41, 22, //
    5, 23, 42, 37, 13, 48, 47, 12, 30, //
    45, 53, 38, 27, 14, 32, 20, 34, 9, //
    19, 4, 18, 24, 2, 39, 35, 33, 51, //
    7, 26, 36, 8, 16, 15, 11, 54, 46,
];
