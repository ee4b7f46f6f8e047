//! Shared fixtures for the command-line tests: a small synthetic corpus of
//! parsed requests with matching crowd annotations.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// One token row: surface, lemma, upos, head, relation.
type Row = (&'static str, &'static str, &'static str, usize, &'static str);

const POLITE: [&[Row]; 3] = [
    &[
        ("Could", "could", "AUX", 4, "aux"),
        ("you", "you", "PRON", 4, "nsubj"),
        ("please", "please", "INTJ", 4, "discourse"),
        ("check", "check", "VERB", 0, "root"),
        ("the", "the", "DET", 6, "det"),
        ("page", "page", "NOUN", 4, "obj"),
        ("?", "?", "PUNCT", 4, "punct"),
    ],
    &[
        ("Thanks", "thanks", "NOUN", 0, "root"),
        ("for", "for", "ADP", 4, "case"),
        ("your", "your", "PRON", 4, "nmod:poss"),
        ("help", "help", "NOUN", 1, "nmod"),
        ("!", "!", "PUNCT", 1, "punct"),
    ],
    &[
        ("I", "I", "PRON", 2, "nsubj"),
        ("think", "think", "VERB", 0, "root"),
        ("it", "it", "PRON", 5, "nsubj"),
        ("would", "would", "AUX", 5, "aux"),
        ("help", "help", "VERB", 2, "ccomp"),
        (".", ".", "PUNCT", 2, "punct"),
    ],
];

const IMPOLITE: [&[Row]; 3] = [
    &[
        ("Fix", "fix", "VERB", 0, "root"),
        ("the", "the", "DET", 3, "det"),
        ("page", "page", "NOUN", 1, "obj"),
        ("now", "now", "ADV", 1, "advmod"),
        (".", ".", "PUNCT", 1, "punct"),
    ],
    &[
        ("Why", "why", "ADV", 4, "advmod"),
        ("did", "do", "AUX", 4, "aux"),
        ("you", "you", "PRON", 4, "nsubj"),
        ("revert", "revert", "VERB", 0, "root"),
        ("it", "it", "PRON", 4, "obj"),
        ("?", "?", "PUNCT", 4, "punct"),
    ],
    &[
        ("No", "no", "INTJ", 5, "discourse"),
        (",", ",", "PUNCT", 5, "punct"),
        ("that", "that", "PRON", 5, "nsubj"),
        ("is", "be", "AUX", 5, "cop"),
        ("wrong", "wrong", "ADJ", 0, "root"),
        (".", ".", "PUNCT", 5, "punct"),
    ],
];

pub const WORKERS_PER_BATCH: usize = 5;
pub const BATCH_SIZE: usize = 20;

pub struct Corpus {
    pub conllu: PathBuf,
    pub annotations: PathBuf,
}

pub fn is_polite(i: usize) -> bool {
    i % 2 == 0
}

pub fn request_id(i: usize) -> String {
    format!("r{i:04}")
}

fn write_sentence(out: &mut String, rows: &[Row]) {
    let text: Vec<&str> = rows.iter().map(|r| r.0).collect();
    writeln!(out, "# text = {}", text.join(" ")).unwrap();
    for (i, (surface, lemma, upos, head, rel)) in rows.iter().enumerate() {
        writeln!(out, "{}\t{surface}\t{lemma}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_", i + 1).unwrap();
    }
    out.push('\n');
}

/// CoNLL-U text for `n` requests; even-numbered requests are polite.
pub fn conllu_text(n: usize, domain: &str) -> String {
    let mut out = String::from("# generator = politeness-kit tests\n\n");
    for i in 0..n {
        writeln!(out, "# id = {}", request_id(i)).unwrap();
        writeln!(out, "# domain = {domain}").unwrap();
        let role = if i % 3 == 0 { "admin" } else { "user" };
        writeln!(out, "# meta.role = {role}").unwrap();
        let templates = if is_polite(i) { &POLITE } else { &IMPOLITE };
        write_sentence(&mut out, templates[i % 3]);
        if i % 5 == 0 {
            write_sentence(&mut out, templates[(i + 1) % 3]);
        }
    }
    out
}

/// Annotation rows: every request is judged by the five workers of its batch
/// on a 1-7 scale, each worker with their own offset.
pub fn annotation_text(n: usize) -> String {
    let mut out = String::from("batch_id,worker_id,request_id,raw_score\n");
    for i in 0..n {
        let batch = i / BATCH_SIZE;
        for k in 0..WORKERS_PER_BATCH {
            let base: i64 = if is_polite(i) { 5 } else { 2 };
            let noise = ((i * 7 + k * 3) % 3) as i64 - 1;
            let raw = (base + noise + (k as i64 % 2)).clamp(1, 7);
            writeln!(out, "b{batch},w{batch}_{k},{},{raw}", request_id(i)).unwrap();
        }
    }
    out
}

pub fn write_corpus(dir: &Path, n: usize) -> Corpus {
    let corpus = Corpus {
        conllu: dir.join("requests.conllu"),
        annotations: dir.join("annotations.csv"),
    };
    std::fs::write(&corpus.conllu, conllu_text(n, "wiki")).unwrap();
    std::fs::write(&corpus.annotations, annotation_text(n)).unwrap();
    corpus
}

pub fn lexicons() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../lexicons")
}

/// Runs the binary with `args`, without any lexicon directory in the
/// environment unless the caller adds one.
pub fn command(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_politeness-kit"));
    cmd.args(args).env_remove("POLITENESS_LEXICONS").env_remove("RUST_LOG");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    command(args).output().expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Reads a JSONL artifact, checking and dropping its provenance line.
pub fn read_jsonl(path: &Path) -> Vec<serde_json::Value> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap());
    let first = lines.next().expect("provenance line");
    assert_eq!(first["provenance"]["tool"], "politeness-kit");
    lines.collect()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
