use std::fs;
use std::process::{Command, Output};

fn solitaire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solitaire"))
        .args(args)
        .output()
        .expect("spawn solitaire")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("no {key} in\n{out}"))
        .split(',')
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn model_prints_closed_form_constants() {
    let o = solitaire(&["model"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("# solitaire "));
    let p: f64 = value(&s, "p").parse().unwrap();
    assert!((p - 0.0055764).abs() < 5e-8, "{p}");
    let q: f64 = value(&s, "predicted_repeat_rate").parse().unwrap();
    assert!((q - 0.043823).abs() < 5e-7, "{q}");
}

#[test]
fn empty_keystream_is_empty_output() {
    let o = solitaire(&["gen", "--seed", "1", "--len", "0"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
}

#[test]
fn gen_formats_agree() {
    let lines = stdout(&solitaire(&["gen", "--seed", "3", "--len", "50"]));
    let letters = stdout(&solitaire(&["gen", "--seed", "3", "--len", "50", "--format", "letters"]));
    let bytes = solitaire(&["gen", "--seed", "3", "--len", "50", "--format", "bytes"]).stdout;
    let from_lines: Vec<u8> = lines.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(from_lines, bytes);
    let from_letters: Vec<u8> = letters.trim().bytes().map(|b| b - b'A' + 1).collect();
    assert_eq!(from_lines, from_letters);
    assert!(from_lines.iter().all(|&v| (1..=26).contains(&v)));
}

#[test]
fn letter_repeat_rate_at_ten_million() {
    let o = solitaire(&["stats", "--len", "1e7", "--seed", "7"]);
    assert!(o.status.success());
    let r: f64 = value(&stdout(&o), "repeat_rate_d1").parse().unwrap();
    assert!((r - 0.0444).abs() < 0.001, "{r}");
}

#[test]
fn csv_artifacts_are_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = solitaire(&[
            "stats", "--seed", "11", "--len", "3e6", "--mod", "54", "--out",
            out.to_str().unwrap(), "--workers", workers,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["profile.csv", "tuples.csv"] {
        let x = fs::read_to_string(a.join(name)).unwrap();
        let y = fs::read_to_string(b.join(name)).unwrap();
        let strip = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(&x), strip(&y), "{name}");
        assert!(x.starts_with("# solitaire "));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(solitaire(&["gen", "--raw"]).status.code(), Some(2));
    assert_eq!(solitaire(&["gen", "--mod", "52"]).status.code(), Some(2));
    assert_eq!(solitaire(&["gen", "--len", "1.5"]).status.code(), Some(2));
    assert_eq!(solitaire(&["variant", "--len", "10"]).status.code(), Some(2));
    assert_eq!(solitaire(&["repro", "--only", "13"]).status.code(), Some(2));
    assert_eq!(solitaire(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_deck_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.txt");
    fs::write(&short, "1,2,3").unwrap();
    let dup = dir.path().join("dup.txt");
    fs::write(&dup, "1,1,3,4,5,6").unwrap();
    for deck in [&short, &dup] {
        let o = solitaire(&["preimages", "--deck", deck.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(3));
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("solitaire: "));
    }
    let o = solitaire(&["census", "--n", "9", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn census_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = solitaire(&["census", "--n", "6", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("\n6,720,504,"), "{s}");
    let deg = fs::read_to_string(dir.path().join("in_degree.csv")).unwrap();
    assert!(deg.contains("\n0,216\n") && deg.contains("\n3,24\n"), "{deg}");
    assert!(dir.path().join("cycles.csv").exists());
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn preimages_of_an_image_step_forward_to_it() {
    let dir = tempfile::tempdir().unwrap();
    let deck = dir.path().join("deck.txt");
    fs::write(&deck, "3,1,7,2,6,4,5").unwrap();
    let o = solitaire(&["preimages", "--deck", deck.to_str().unwrap()]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("# "));
    for line in s.lines().skip(1) {
        let mut d: Vec<u8> = line.split(',').map(|x| x.trim().parse().unwrap()).collect();
        d.sort_unstable();
        assert_eq!(d, (1..=7).collect::<Vec<u8>>());
    }
}

#[test]
fn credential_attack_recovers_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = solitaire(&[
        "attack", "cred", "--sessions", "5e4", "--seed", "2", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "success"), "true");
    let pos = fs::read_to_string(dir.path().join("positions.csv")).unwrap();
    assert_eq!(pos.lines().filter(|l| !l.starts_with('#')).count(), 30);
    assert!(dir.path().join("tallies.csv").exists());
}

#[test]
fn causal_test_accepts_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    fs::write(&c, "ABCDEFGHIJKLMNOPQRSTUVWXYZ").unwrap();
    let arg = format!("@{}", c.display());
    let o = solitaire(&["attack", "causal", "--ciphertext", &arg, "--plaintext", "AAAAAAAAAAAAAAAAAAAAAAAAAA"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = solitaire(&["attack", "causal", "--ciphertext", "ABC", "--plaintext", "AB"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn repro_reports_per_criterion_lines() {
    let o = solitaire(&["repro", "--only", "1,8", "--scale", "ci"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| l.starts_with("[PASS]")).count(), 2, "{s}");
}
