//! Every example sentence of the strategy table, parsed by hand, fires the
//! strategy it illustrates.

use std::path::PathBuf;

use politeness_core::corpus::conllu::ConlluReader;
use politeness_core::corpus::ParsedRequest;
use politeness_core::strategies::{detect_strategies, Detector, ParseScheme};
use politeness_core::{Lexicons, Strategy};

fn fixture() -> Vec<ParsedRequest> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/strategy_examples.conllu");
    ConlluReader::open(path)
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap()
}

fn lexicons() -> Lexicons {
    Lexicons::from_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../lexicons")).unwrap()
}

fn strategy_of(r: &ParsedRequest) -> Strategy {
    Strategy::from_key(&r.metadata["strategy"]).unwrap()
}

#[test]
fn fixture_covers_every_strategy_once() {
    let reqs = fixture();
    assert_eq!(reqs.len(), Strategy::COUNT);
    let mut seen: Vec<Strategy> = reqs.iter().map(strategy_of).collect();
    seen.sort_by_key(|s| s.index());
    assert_eq!(seen, Strategy::ALL);
}

#[test]
fn each_example_fires_its_strategy() {
    let lex = lexicons();
    for r in fixture() {
        let s = strategy_of(&r);
        let p = detect_strategies(&r, &lex);
        assert!(p.get(s), "{} does not fire on {:?}", s, r.text());
    }
}

#[test]
fn non_initial_markers_fire_no_start_variant() {
    let lex = lexicons();
    let pairs = [
        (Strategy::Please, Strategy::PleaseStart),
        (Strategy::FirstPerson, Strategy::FirstPersonStart),
        (Strategy::SecondPerson, Strategy::SecondPersonStart),
    ];
    let reqs = fixture();
    for (plain, start) in pairs {
        let r = reqs.iter().find(|r| strategy_of(r) == plain).unwrap();
        let p = detect_strategies(r, &lex);
        assert!(p.get(plain) && !p.get(start), "{}", r.text());
    }
    // and the sentence-initial "please" fires only the start variant
    let r = reqs.iter().find(|r| strategy_of(r) == Strategy::PleaseStart).unwrap();
    let p = detect_strategies(r, &lex);
    assert!(p.get(Strategy::PleaseStart) && !p.get(Strategy::Please), "{}", r.text());
}

#[test]
fn worked_examples() {
    let lex = lexicons();
    let reqs = fixture();
    let by = |s: Strategy| reqs.iter().find(|r| strategy_of(r) == s).unwrap();

    let p = detect_strategies(by(Strategy::Please), &lex);
    assert!(p.get(Strategy::CounterfactualModal) && p.get(Strategy::SecondPerson));

    let p = detect_strategies(by(Strategy::DirectQuestion), &lex);
    assert!(p.get(Strategy::SecondPerson));

    let p = detect_strategies(by(Strategy::DirectStart), &lex);
    assert!(p.get(Strategy::IndicativeModal));
    assert!(!p.get(Strategy::CounterfactualModal));
}

#[test]
fn hedge_needs_subject_edge_under_every_scheme() {
    let lex = lexicons();
    let reqs = fixture();
    let hedge = reqs.iter().find(|r| strategy_of(r) == Strategy::Hedges).unwrap();
    for scheme in [ParseScheme::Universal, ParseScheme::Any] {
        let d = Detector::new(lex.clone()).with_scheme(scheme);
        assert!(d.detect(hedge).get(Strategy::Hedges));
    }
    // "nsubj" is also the legacy label, so the legacy scheme accepts it too
    let d = Detector::new(lex).with_scheme(ParseScheme::Stanford);
    assert!(d.detect(hedge).get(Strategy::Hedges));
}
