use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use solitaire_core::variants::VariantSpec;

#[derive(Debug, Parser)]
#[command(name = "solitaire", version, about = "Cryptanalysis workbench for the Solitaire cipher")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit a keystream.
    Gen {
        #[command(flatten)]
        stream: StreamArgs,
        #[arg(long, value_enum, default_value_t = GenFormat::Lines)]
        format: GenFormat,
    },
    /// Distance profile, tuple rates and uniformity of a keystream.
    Stats {
        #[command(flatten)]
        stream: StreamArgs,
    },
    /// Histogram of the top card on repeated extractions.
    Trace {
        #[command(flatten)]
        source: DeckSource,
        #[arg(long, default_value = "1e6", value_parser = parse_count)]
        len: u64,
        /// Also write one CSV row per update step of the first segment.
        #[arg(long)]
        steps: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form constants of the bias model.
    Model {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive functional-graph census of the update on a small deck.
    Census {
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Largest state count allowed (default 9!).
        #[arg(long, value_parser = parse_count)]
        budget: Option<u64>,
        /// Output directory for in_degree.csv, cycles.csv and summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pre-images of a deck under the update.
    Preimages {
        #[arg(long)]
        deck: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attack simulations.
    Attack {
        #[command(subcommand)]
        attack: AttackCommand,
    },
    /// Keystream statistics of a modified cipher.
    Variant {
        #[command(flatten)]
        stream: StreamArgs,
    },
    /// Run the reproduction suite and print a pass/fail table.
    Repro {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ReproScale::Full)]
        scale: ReproScale,
        /// Only these criteria, comma separated.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AttackCommand {
    /// Recover a credential's difference profile from many encryptions.
    Cred {
        /// Credential letters, or @file.
        #[arg(long, default_value = "USERNAMEALICEPASSWORDHUNTERTWO")]
        credential: String,
        #[arg(long, default_value = "50000", value_parser = parse_count)]
        sessions: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory for positions.csv and tallies.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a claimed plaintext by the repeats of the keystream it implies.
    Causal {
        /// Ciphertext letters, or @file.
        #[arg(long)]
        ciphertext: String,
        /// Claimed plaintext letters, or @file.
        #[arg(long)]
        plaintext: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone)]
pub struct DeckSource {
    /// Seed for the shuffled starting decks.
    #[arg(long, conflicts_with = "deck")]
    pub seed: Option<u64>,
    /// Starting deck file (numbers separated by commas, or card labels).
    #[arg(long)]
    pub deck: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct StreamArgs {
    #[command(flatten)]
    pub source: DeckSource,
    /// Number of outputs; scientific notation accepted.
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    pub len: u64,
    /// 26 for letters, 54 for joker-free card values.
    #[arg(long = "mod", default_value_t = 26, value_parser = parse_modulus)]
    pub modulus: u32,
    /// Keep joker extractions (values 1..=54).
    #[arg(long)]
    pub raw: bool,
    /// Largest repeat distance tracked.
    #[arg(long, default_value_t = 26, value_parser = clap::value_parser!(u64).range(1..=4096))]
    pub dist: u64,
    /// Variant, e.g. `E=deref2,U=1`.
    #[arg(long)]
    pub variant: Option<VariantSpec>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenFormat {
    /// One decimal value per line.
    Lines,
    /// A..Z text, 26-symbol streams only.
    Letters,
    /// One byte per value.
    Bytes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproScale {
    Full,
    Ci,
}

/// Non-negative integer count: `1000000`, `1_000_000`, `1e6` or `2.5e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = t.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if !f.is_finite() || f < 0.0 || f.fract() != 0.0 || f > 9.007_199_254_740_992e15 {
        return Err(format!("not a whole non-negative count: {s:?}"));
    }
    Ok(f as u64)
}

fn parse_modulus(s: &str) -> Result<u32, String> {
    match s.trim() {
        "26" => Ok(26),
        "54" => Ok(54),
        _ => Err(format!("modulus must be 26 or 54, got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("0"), Ok(0));
        assert_eq!(parse_count("1e7"), Ok(10_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2_500));
        assert_eq!(parse_count("1_000"), Ok(1_000));
        assert_eq!(parse_count("18446744073709551615"), Ok(u64::MAX));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("ten").is_err());
        assert!(parse_count("1e300").is_err());
    }

    #[test]
    fn moduli() {
        assert_eq!(parse_modulus("54"), Ok(54));
        assert!(parse_modulus("52").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn deck_and_seed_conflict() {
        let r = Cli::try_parse_from(["solitaire", "gen", "--seed", "1", "--deck", "d.txt"]);
        assert!(r.is_err());
        let c = Cli::try_parse_from(["solitaire", "stats", "--len", "1e3", "--variant", "E=sum2,U=2"]).unwrap();
        match c.command {
            Command::Stats { stream } => {
                assert_eq!(stream.len, 1_000);
                assert_eq!(stream.variant.unwrap().update_repeats(), 2);
            }
            other => panic!("{other:?}"),
        }
    }
}
