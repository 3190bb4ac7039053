use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use solitaire_core::attacks::{self, causal_repeat_test, simulate_credential_attack};
use solitaire_core::cipher::{self, CipherState, TRACE_CSV_HEADER};
use solitaire_core::experiment::{with_workers, StreamExperiment};
use solitaire_core::graph::{self, bijection_baseline, preimages, DEFAULT_CENSUS_BUDGET};
use solitaire_core::model;
use solitaire_core::repro::{format_results, Repro, Scale, CRITERIA};
use solitaire_core::stats::{self, StreamStats};
use solitaire_core::variants::{pair_sum_census, ExtractionKind};
use solitaire_core::{format_deck, parse_deck, OutputMode, Seed};

use crate::args::{AttackCommand, Cli, Command, DeckSource, GenFormat, ReproScale, StreamArgs};
use crate::output::{in_dir, sink, write_csv, write_pairs, Provenance};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(solitaire_core::Error),
    Io(io::Error),
    Acceptance(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "data error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Acceptance(k) => write!(f, "{k} acceptance criteria failed"),
        }
    }
}

impl From<solitaire_core::Error> for CliError {
    fn from(e: solitaire_core::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult = Result<(), CliError>;

pub fn run(cli: Cli) -> CliResult {
    let workers = cli.workers;
    if workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    with_workers(workers, move || dispatch(cli.command))?
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Gen { stream, format } => gen(&stream, format),
        Command::Stats { stream } => stats(&stream, false),
        Command::Variant { stream } => stats(&stream, true),
        Command::Trace {
            source,
            len,
            steps,
            out,
        } => trace(&source, len, steps.as_deref(), out.as_deref()),
        Command::Model { out } => model(out.as_deref()),
        Command::Census { n, budget, out } => census(n, budget, out.as_deref()),
        Command::Preimages { deck, out } => preimages_cmd(&deck, out.as_deref()),
        Command::Attack { attack } => match attack {
            AttackCommand::Cred {
                credential,
                sessions,
                seed,
                out,
            } => credential_attack(&credential, sessions, seed, out.as_deref()),
            AttackCommand::Causal {
                ciphertext,
                plaintext,
                out,
            } => causal(&ciphertext, &plaintext, out.as_deref()),
        },
        Command::Repro { seed, scale, only } => repro(seed, scale, &only),
    }
}

fn read_deck(path: &Path) -> Result<solitaire_core::Deck, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(parse_deck(&text)?)
}

/// Inline text, or the contents of a file when prefixed with `@`.
fn text_arg(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(fs::read_to_string(path)?),
        None => Ok(arg.to_string()),
    }
}

/// Experiment and provenance source for a deck source.
fn experiment_for(
    source: &DeckSource,
    len: u64,
    mode: OutputMode,
) -> Result<(StreamExperiment, String), CliError> {
    match &source.deck {
        Some(path) => {
            let deck = read_deck(path)?;
            Ok((
                StreamExperiment::from_deck(deck, len, mode),
                format!("deck {}", path.display()),
            ))
        }
        None => {
            let seed = Seed(source.seed.unwrap_or(1));
            Ok((StreamExperiment::new(seed, len, mode), format!("seed {seed}")))
        }
    }
}

fn stream_experiment(args: &StreamArgs) -> Result<(StreamExperiment, String), CliError> {
    let mode = match (args.raw, args.modulus) {
        (true, 54) => OutputMode::Raw,
        (true, _) => return Err(CliError::Usage("--raw needs --mod 54".into())),
        (false, 26) => OutputMode::Letters,
        (false, _) => OutputMode::Cards,
    };
    let (mut e, source) = experiment_for(&args.source, args.len, mode)?;
    e = e.with_max_distance(args.dist as usize);
    if let Some(v) = args.variant {
        e = e.with_variant(v);
    }
    Ok((e, source))
}

fn gen(args: &StreamArgs, format: GenFormat) -> CliResult {
    let (e, _) = stream_experiment(args)?;
    if format == GenFormat::Letters && e.mode != OutputMode::Letters {
        return Err(CliError::Usage("--format letters needs --mod 26".into()));
    }
    let mut w = sink(args.out.as_deref())?;
    let mut failure: Option<io::Error> = None;
    for i in 0..e.segments() {
        e.for_each_chunk(i, |chunk| {
            if failure.is_some() {
                return;
            }
            let r = match format {
                GenFormat::Lines => cipher::write_keystream_text(&mut w, chunk),
                GenFormat::Bytes => cipher::write_keystream_bytes(&mut w, chunk),
                GenFormat::Letters => w.write_all(cipher::letters_to_string(chunk).as_bytes()),
            };
            failure = r.err();
        })?;
        if let Some(err) = failure.take() {
            return Err(err.into());
        }
    }
    if format == GenFormat::Letters && e.outputs > 0 {
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_opt(v: solitaire_core::Result<f64>) -> String {
    v.map(|x| format!("{x:.8}")).unwrap_or_else(|_| "NA".into())
}

fn stats_summary(e: &StreamExperiment, st: &StreamStats) -> Vec<(&'static str, String)> {
    let d = st.max_distance();
    let mut rows = vec![
        ("outputs", st.len().to_string()),
        ("symbols", st.modulus().to_string()),
        ("variant", e.variant.to_string()),
        ("repeat_rate_d1", fmt_opt(st.repeat_rate(1))),
        ("stderr_d1", fmt_opt(st.repeat_rate_stderr(1))),
        ("max_distance", d.to_string()),
        ("repeat_rate_dmax", fmt_opt(st.repeat_rate(d))),
        ("tuple_rate_3", fmt_opt(st.tuple_rate(3))),
        ("tuple_rate_4", fmt_opt(st.tuple_rate(4))),
        ("tuple_rate_5", fmt_opt(st.tuple_rate(5))),
    ];
    if e.mode == OutputMode::Letters {
        if let Ok(chi) = st.uniformity_chi2() {
            rows.push(("chi2", format!("{:.4}", chi.statistic)));
            rows.push(("chi2_dof", chi.dof.to_string()));
            rows.push(("chi2_p", format!("{:.6}", chi.p_value())));
        }
    }
    rows
}

fn stats(args: &StreamArgs, variant_required: bool) -> CliResult {
    if variant_required && args.variant.is_none() {
        return Err(CliError::Usage("variant needs --variant, e.g. E=deref2,U=1".into()));
    }
    let (e, source) = stream_experiment(args)?;
    let st = e.run_stats()?;
    let prov = Provenance::new(&source);
    let mut rows = stats_summary(&e, &st);
    if variant_required && e.variant.extraction == ExtractionKind::DoubleIndex {
        let counts = pair_sum_census(e.deck_size);
        let odd = counts.iter().skip(1).step_by(2).min().copied().unwrap_or(0);
        let even = counts.iter().step_by(2).max().copied().unwrap_or(0);
        rows.push(("pair_sum_min_odd", odd.to_string()));
        rows.push(("pair_sum_max_even", even.to_string()));
    }
    write_csv(None, &prov, |w| write_pairs(w, &rows))?;
    if let Some(dir) = &args.out {
        if let Ok(profile) = st.distance_profile() {
            write_csv(Some(&in_dir(dir, "profile.csv")?), &prov, |w| {
                stats::write_profile_csv(w, &profile)
            })?;
        }
        if let Ok(t) = st.tuple_rates() {
            write_csv(Some(&in_dir(dir, "tuples.csv")?), &prov, |w| stats::write_tuple_csv(w, &t))?;
        }
        write_csv(Some(&in_dir(dir, "summary.csv")?), &prov, |w| write_pairs(w, &rows))?;
    }
    Ok(())
}

fn trace(source: &DeckSource, len: u64, steps: Option<&Path>, out: Option<&Path>) -> CliResult {
    let (e, src) = experiment_for(source, len, OutputMode::Raw)?;
    let prov = Provenance::new(&src);
    let hist = e.top_card_histogram()?;
    write_csv(out, &prov, |w| stats::write_histogram_csv(w, &hist))?;
    if out.is_some() {
        let n = e.deck_size;
        let mut rows = vec![("repeats", hist.total().to_string())];
        if n == 54 {
            let (diff, sd) = hist.level_shift(20..=28, 29..=40);
            rows.push(("level_shift_20_28_vs_29_40", format!("{diff:.3}")));
            rows.push(("level_shift_sd", format!("{sd:.3}")));
        }
        write_csv(None, &prov, |w| write_pairs(w, &rows))?;
    }
    if let Some(path) = steps {
        let count = if e.segments() == 0 { 0 } else { e.segment_outputs(0) };
        let mut s: CipherState = e.segment_state(0)?;
        write_csv(Some(path), &prov, |w| {
            writeln!(w, "{TRACE_CSV_HEADER}")?;
            for _ in 0..count {
                writeln!(w, "{}", s.traced_step().csv_row())?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn model(out: Option<&Path>) -> CliResult {
    let prov = Provenance::new("closed form");
    let report = model::model_report();
    write_csv(out, &prov, |w| model::write_report_csv(w, &report))?;
    Ok(())
}

fn census(n: usize, budget: Option<u64>, out: Option<&Path>) -> CliResult {
    let c = graph::census_with_budget(n, budget.unwrap_or(DEFAULT_CENSUS_BUDGET))?;
    let base = bijection_baseline(c.states)?;
    let prov = Provenance::new(&format!("exhaustive n={n}"));
    let summary = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "{},bijection_expected_cycles", graph::CENSUS_SUMMARY_HEADER)?;
        writeln!(w, "{},{:.4}", graph::census_summary_row(&c), base.expected_cycles)
    };
    write_csv(None, &prov, |w| {
        summary(w)?;
        writeln!(w)?;
        graph::write_in_degree_csv(w, &c)
    })?;
    if let Some(dir) = out {
        write_csv(Some(&in_dir(dir, "in_degree.csv")?), &prov, |w| graph::write_in_degree_csv(w, &c))?;
        write_csv(Some(&in_dir(dir, "cycles.csv")?), &prov, |w| graph::write_cycle_csv(w, &c))?;
        write_csv(Some(&in_dir(dir, "summary.csv")?), &prov, summary)?;
    }
    Ok(())
}

fn preimages_cmd(deck: &Path, out: Option<&Path>) -> CliResult {
    let s = CipherState::new(read_deck(deck)?);
    let pre = preimages(&s);
    let mut w = sink(out)?;
    writeln!(w, "# {} pre-images", pre.len())?;
    for x in &pre {
        writeln!(w, "{}", format_deck(x.deck()))?;
    }
    w.flush()?;
    Ok(())
}

fn credential_attack(credential: &str, sessions: u64, seed: u64, out: Option<&Path>) -> CliResult {
    let text = text_arg(credential)?;
    let r = simulate_credential_attack(&text, sessions, Seed(seed))?;
    let prov = Provenance::new(&format!("seed {seed}"));
    let positions = r.tallies.len();
    let mean = |f: &dyn Fn(usize) -> f64| (0..positions).map(f).sum::<f64>() / positions as f64;
    let min_z = r.z_margin.iter().copied().fold(f64::INFINITY, f64::min);
    let rows = vec![
        ("sessions", r.sessions.to_string()),
        ("credential_len", r.credential_len.to_string()),
        ("success", r.success.to_string()),
        ("mean_modal_tally", format!("{:.2}", mean(&|i| r.modal_tally(i) as f64))),
        ("mean_runner_up", format!("{:.2}", mean(&|i| r.runner_up_mean(i)))),
        ("min_z_margin", format!("{min_z:.3}")),
        ("candidate_a", r.candidates()[0].clone()),
    ];
    write_csv(None, &prov, |w| write_pairs(w, &rows))?;
    if let Some(dir) = out {
        write_csv(Some(&in_dir(dir, "positions.csv")?), &prov, |w| attacks::write_credential_csv(w, &r))?;
        write_csv(Some(&in_dir(dir, "tallies.csv")?), &prov, |w| attacks::write_tally_csv(w, &r))?;
    }
    Ok(())
}

fn causal(ciphertext: &str, plaintext: &str, out: Option<&Path>) -> CliResult {
    let c = text_arg(ciphertext)?;
    let p = text_arg(plaintext)?;
    let r = causal_repeat_test(&c, &p)?;
    let prov = Provenance::new("supplied texts");
    write_csv(out, &prov, |w| attacks::write_causal_csv(w, &r))?;
    Ok(())
}

fn repro(seed: u64, scale: ReproScale, only: &[usize]) -> CliResult {
    if let Some(bad) = only.iter().find(|&&id| !(1..=CRITERIA).contains(&id)) {
        return Err(CliError::Usage(format!("no criterion {bad}; use 1..={CRITERIA}")));
    }
    let scale = match scale {
        ReproScale::Full => Scale::Full,
        ReproScale::Ci => Scale::Ci,
    };
    let r = Repro::new(Seed(seed), scale);
    let ids: Vec<usize> = if only.is_empty() {
        (1..=CRITERIA).collect()
    } else {
        only.to_vec()
    };
    let mut results = Vec::new();
    let mut stdout = io::stdout();
    for id in ids {
        let res = r.run(id);
        writeln!(stdout, "{res}")?;
        results.push(res);
    }
    let summary = format_results(&results);
    writeln!(stdout, "{}", summary.lines().last().unwrap_or(""))?;
    let failed = results.iter().filter(|x| !x.passed).count();
    if failed > 0 {
        return Err(CliError::Acceptance(failed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Io(io::Error::other("x")).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Data(solitaire_core::Error::DeckSize(3)).exit_code(), 3);
        assert_eq!(CliError::Acceptance(1).exit_code(), 4);
    }
}
