//! Reproduction criteria at published scale, one test and one printed
//! pass/fail line per criterion.

use std::io::Write;
use std::sync::LazyLock;
use std::time::Instant;

use solitaire_core::repro::{Repro, Scale};
use solitaire_core::Seed;

static REPRO: LazyLock<Repro> = LazyLock::new(|| Repro::new(Seed(1), Scale::Full));

fn criterion(id: usize) {
    let start = Instant::now();
    let r = REPRO.run(id);
    // Straight to the process stdout so the line shows under capture too.
    writeln!(std::io::stdout(), "{r} ({:.1}s)", start.elapsed().as_secs_f64()).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn criterion_01_golden_vectors() {
    criterion(1);
}

#[test]
fn criterion_02_repeat_rates() {
    criterion(2);
}

#[test]
fn criterion_03_tuple_rates() {
    criterion(3);
}

#[test]
fn criterion_04_closed_forms() {
    criterion(4);
}

#[test]
fn criterion_05_entropy() {
    criterion(5);
}

#[test]
fn criterion_06_adjacency() {
    criterion(6);
}

#[test]
fn criterion_07_story_monte_carlo() {
    criterion(7);
}

#[test]
fn criterion_08_graph_census() {
    criterion(8);
}

#[test]
fn criterion_09_credential_attack() {
    criterion(9);
}

#[test]
fn criterion_10_causal_test() {
    criterion(10);
}

#[test]
fn criterion_11_variants() {
    criterion(11);
}

#[test]
fn criterion_12_properties() {
    criterion(12);
}
