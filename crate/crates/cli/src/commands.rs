use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use politeness_core::classifier::{
    class_labels, evaluate_cross_domain, evaluate_in_domain, fit_model, Example, TrainConfig,
    UnigramWeighting,
};
use politeness_core::corpus::conllu::ConlluReader;
use politeness_core::corpus::{
    assign_quartiles, binary_agreement_by_quartile, normalize_and_aggregate, pairwise_agreement,
    quartile_split, randomize_normalized, read_annotations, AgreementMode, Diagnostic, ParsedRequest, Quartile, QuartileAgreement, ScoreRecord, ScoredRequest,
    ANNOTATORS_PER_REQUEST,
};
use politeness_core::num::{mean, population_sd};
use politeness_core::stats::{
    group_compare, group_comparison_csv, sig, strategy_table, strategy_table_csv, GroupItem,
    Reference,
};
use politeness_core::strategies::{Catalog, Detector, LexiconName, Lexicons, StrategyProfile};
use politeness_core::{AnnotationSet, EvalReport, LinearModel, StrategyRow};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    AggregateArgs, AgreementArgs, CompareArgs, DetectArgs, DetectorOpts, EvalArgs, FormatArg,
    ModelOpts, ScoreArgs, TableArgs, TrainArgs,
};
use crate::io::{read_scores, write_csv, write_json, JsonlWriter, ScoreLine};
use crate::provenance::Provenance;

/// Requests handled per parallel chunk by the streaming commands.
const CHUNK: usize = 1024;

fn build_detector(opts: &DetectorOpts, prov: &mut Provenance) -> Result<Detector> {
    for name in LexiconName::ALL {
        prov.add_input(&opts.lexicons.join(name.file_name()))?;
    }
    let lexicons = Lexicons::from_dir(&opts.lexicons)?;
    let mut detector = Detector::new(lexicons).with_scheme(opts.scheme.into());
    if let Some(path) = &opts.catalog {
        prov.add_input(path)?;
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let catalog =
            Catalog::from_json(&text).with_context(|| format!("loading catalog {}", path.display()))?;
        detector = detector.with_catalog(catalog);
    }
    Ok(detector)
}

fn read_requests(path: &Path) -> Result<Vec<ParsedRequest>> {
    let requests: Vec<ParsedRequest> =
        ConlluReader::open(path)?.collect::<Result<_, _>>()?;
    info!("read {} requests from {}", requests.len(), path.display());
    Ok(requests)
}

/// Applies `f` to the requests of `path` in parallel chunks and hands the
/// results to `sink` in input order.
fn stream_requests<R: Send>(
    path: &Path,
    f: impl Fn(&[ParsedRequest]) -> Result<Vec<R>> + Sync,
    mut sink: impl FnMut(&ParsedRequest, R) -> Result<()>,
) -> Result<usize> {
    let mut reader = ConlluReader::open(path)?;
    let mut total = 0;
    loop {
        let chunk: Vec<ParsedRequest> = reader.by_ref().take(CHUNK).collect::<Result<_, _>>()?;
        if chunk.is_empty() {
            break;
        }
        let results = f(&chunk)?;
        for (request, result) in chunk.iter().zip(results) {
            sink(request, result)?;
        }
        total += chunk.len();
    }
    Ok(total)
}

/// Pairs requests with their scores, in request order. Requests without a
/// score and scores without a request are skipped with a warning.
fn join_scores(
    requests: Vec<ParsedRequest>,
    scores: &BTreeMap<String, ScoreLine>,
) -> Vec<(ParsedRequest, ScoreLine)> {
    let n_requests = requests.len();
    let joined: Vec<(ParsedRequest, ScoreLine)> = requests
        .into_iter()
        .filter_map(|r| scores.get(&r.id).cloned().map(|s| (r, s)))
        .collect();
    if joined.len() < n_requests {
        warn!("{} requests have no score; skipped", n_requests - joined.len());
    }
    if joined.len() < scores.len() {
        warn!("{} scores match no request; ignored", scores.len() - joined.len());
    }
    joined
}

fn train_config(opts: &ModelOpts) -> TrainConfig {
    let mut config = TrainConfig::new(opts.mode.into());
    config.min_count = opts.min_count;
    config.unigrams = if opts.binary_unigrams {
        UnigramWeighting::Binary
    } else {
        UnigramWeighting::Count
    };
    config.svm.c = opts.c;
    config.svm.seed = opts.seed;
    config
}

/// Requests, profiles and classes of the labeled extremes of a scored corpus.
struct Labeled {
    requests: Vec<ParsedRequest>,
    profiles: Vec<StrategyProfile>,
    classes: Vec<politeness_core::classifier::Class>,
}

impl Labeled {
    fn load(input: &Path, scores: &Path, detector: &Detector, prov: &mut Provenance) -> Result<Self> {
        prov.add_input(input)?;
        prov.add_input(scores)?;
        let joined = join_scores(read_requests(input)?, &read_scores(scores)?);
        let items: Vec<(&str, f64)> = joined
            .iter()
            .map(|(r, s)| (r.id.as_str(), s.score))
            .collect();
        let labels = class_labels(&items)?;
        let mut labeled = Labeled {
            requests: Vec::new(),
            profiles: Vec::new(),
            classes: Vec::new(),
        };
        let kept: Vec<_> = joined
            .into_iter()
            .zip(labels)
            .filter_map(|((r, _), c)| c.map(|c| (r, c)))
            .collect();
        labeled.profiles = kept.par_iter().map(|(r, _)| detector.detect(r)).collect();
        for (r, c) in kept {
            labeled.requests.push(r);
            labeled.classes.push(c);
        }
        info!("{} labeled requests from {}", labeled.requests.len(), input.display());
        Ok(labeled)
    }

    fn examples(&self) -> Vec<Example<'_>> {
        self.requests
            .iter()
            .zip(&self.profiles)
            .zip(&self.classes)
            .map(|((request, &profile), &class)| Example {
                request,
                profile,
                class,
            })
            .collect()
    }
}

pub fn aggregate(args: &AggregateArgs, mut prov: Provenance) -> Result<()> {
    let sets = load_annotations(&args.annotations, &mut prov)?;
    let aggregation = normalize_and_aggregate(&sets)?;
    for d in &aggregation.diagnostics {
        warn!("{}: {}", d.subject, d.message);
    }
    let items: Vec<(&str, f64)> = aggregation
        .politeness
        .iter()
        .map(|(id, &p)| (id.as_str(), p))
        .collect();
    let quartiles = assign_quartiles(&items)?;
    let mut out = JsonlWriter::create(&args.out, &prov)?;
    for (&(id, politeness), quartile) in items.iter().zip(quartiles) {
        out.write(&ScoreRecord {
            id: id.to_string(),
            politeness,
            quartile: Some(quartile),
        })?;
    }
    out.finish()?;
    info!("wrote {} scores to {}", items.len(), args.out.display());
    Ok(())
}

fn load_annotations(paths: &[std::path::PathBuf], prov: &mut Provenance) -> Result<Vec<AnnotationSet>> {
    let mut sets = Vec::new();
    for path in paths {
        prov.add_input(path)?;
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        sets.extend(read_annotations(BufReader::new(file), &path.display().to_string())?);
    }
    Ok(sets)
}

#[derive(Serialize)]
struct BatchAgreement {
    batch_id: String,
    mean_pairwise_correlation: f64,
    pairs_used: usize,
    baseline_mean: Option<f64>,
    baseline_sd: Option<f64>,
    diagnostics: Vec<Diagnostic>,
}

#[derive(Serialize)]
struct AgreementReport {
    batches: Vec<BatchAgreement>,
    skipped_batches: Vec<Diagnostic>,
    mean_batch_correlation: Option<f64>,
    binary_agreement: QuartileAgreement<f64>,
    binary_agreement_randomized: QuartileAgreement<f64>,
    diagnostics: Vec<Diagnostic>,
}

pub fn agreement(args: &AgreementArgs, mut prov: Provenance) -> Result<()> {
    let sets = load_annotations(&args.annotations, &mut prov)?;
    let mode = AgreementMode::Randomized {
        resamples: args.resamples,
        seed: args.seed,
    };
    let outcomes: Vec<_> = sets
        .par_iter()
        .map(|set| (set.batch_id().to_string(), pairwise_agreement(set, mode)))
        .collect();
    let mut batches = Vec::new();
    let mut skipped = Vec::new();
    for (batch_id, outcome) in outcomes {
        match outcome {
            Ok(a) => batches.push(BatchAgreement {
                baseline_mean: mean(&a.baseline),
                baseline_sd: population_sd(&a.baseline),
                batch_id: a.batch_id,
                mean_pairwise_correlation: a.mean_pairwise_correlation,
                pairs_used: a.pairs_used,
                diagnostics: a.diagnostics,
            }),
            Err(e) => {
                warn!("batch {batch_id}: {e}");
                skipped.push(Diagnostic::new(format!("batch {batch_id}"), e.to_string()));
            }
        }
    }
    let correlations: Vec<f64> = batches.iter().map(|b| b.mean_pairwise_correlation).collect();

    let aggregation = normalize_and_aggregate(&sets)?;
    let items: Vec<(&str, f64)> = aggregation
        .politeness
        .iter()
        .map(|(id, &p)| (id.as_str(), p))
        .collect();
    let quartiles: BTreeMap<String, Quartile> = items
        .iter()
        .map(|(id, _)| id.to_string())
        .zip(assign_quartiles(&items)?)
        .collect();
    let observed =
        binary_agreement_by_quartile(&aggregation.normalized, &quartiles, ANNOTATORS_PER_REQUEST);
    let randomized = binary_agreement_by_quartile(
        &randomize_normalized(&aggregation.normalized, args.seed),
        &quartiles,
        ANNOTATORS_PER_REQUEST,
    );
    let report = AgreementReport {
        batches,
        skipped_batches: skipped,
        mean_batch_correlation: mean(&correlations),
        binary_agreement: observed,
        binary_agreement_randomized: randomized,
        diagnostics: aggregation.diagnostics,
    };
    write_json(&args.out, &prov, &report)
}

#[derive(Serialize)]
struct DetectLine<'a> {
    id: &'a str,
    strategies: StrategyProfile,
}

pub fn detect(args: &DetectArgs, mut prov: Provenance) -> Result<()> {
    let detector = build_detector(&args.detector, &mut prov)?;
    prov.add_input(&args.input)?;
    if let Some(path) = &args.export_catalog {
        // loading a catalog ignores the extra provenance key
        write_json(path, &prov, detector.catalog())?;
    }
    let mut out = JsonlWriter::create(&args.out, &prov)?;
    let n = stream_requests(
        &args.input,
        |chunk| Ok(chunk.par_iter().map(|r| detector.detect(r)).collect()),
        |request, strategies| {
            out.write(&DetectLine {
                id: &request.id,
                strategies,
            })
        },
    )?;
    out.finish()?;
    info!("detected strategies in {n} requests");
    Ok(())
}

#[derive(Serialize)]
struct TableJsonRow<'a> {
    #[serde(flatten)]
    row: &'a StrategyRow,
    label: &'static str,
    politeness_sig: &'static str,
    top_quartile_sig: &'static str,
}

#[derive(Serialize)]
struct TableReport<'a> {
    n_requests: usize,
    rows: Vec<TableJsonRow<'a>>,
}

pub fn table(args: &TableArgs, mut prov: Provenance) -> Result<()> {
    let detector = build_detector(&args.detector, &mut prov)?;
    prov.add_input(&args.input)?;
    prov.add_input(&args.scores)?;
    let joined = join_scores(read_requests(&args.input)?, &read_scores(&args.scores)?);
    let from_file = joined.iter().all(|(_, s)| s.quartile.is_some());
    let mut scored: Vec<ScoredRequest<f64>> = joined
        .into_iter()
        .map(|(r, s)| {
            let mut sr = ScoredRequest::new(r, s.score);
            sr.quartile = s.quartile;
            sr
        })
        .collect();
    if !from_file {
        info!("scores file lacks quartiles; assigning them over the joined requests");
        scored = quartile_split(scored)?;
    }
    let profiles: Vec<StrategyProfile> =
        scored.par_iter().map(|s| detector.detect(&s.request)).collect();
    let rows = strategy_table(&scored, &profiles)?;
    match args.format {
        FormatArg::Csv => write_csv(&args.out, &prov, &strategy_table_csv(&rows)),
        FormatArg::Json => {
            let report = TableReport {
                n_requests: scored.len(),
                rows: rows
                    .iter()
                    .map(|row| TableJsonRow {
                        row,
                        label: row.strategy.label(),
                        politeness_sig: sig(&row.politeness_p),
                        top_quartile_sig: sig(&row.quartile_p),
                    })
                    .collect(),
            };
            write_json(&args.out, &prov, &report)
        }
    }
}

pub fn train(args: &TrainArgs, mut prov: Provenance) -> Result<()> {
    let detector = build_detector(&args.detector, &mut prov)?;
    let labeled = Labeled::load(&args.input, &args.scores, &detector, &mut prov)?;
    let examples = labeled.examples();
    let Some(first) = examples.first() else {
        bail!("no labeled requests to train on");
    };
    let domain = first.request.domain;
    let config = train_config(&args.model);
    let model: LinearModel = fit_model(&examples, &config, domain)?;
    let model = model.with_provenance(prov.to_value());
    let mut text = model.to_json();
    text.push('\n');
    std::fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    info!("trained on {} requests; model written to {}", examples.len(), args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct GridPoint {
    c: f64,
    report: EvalReport,
}

#[derive(Serialize)]
struct GridReport {
    grid: Vec<GridPoint>,
    /// Most accurate C; ties go to the smaller value.
    best_c: f64,
}

pub fn eval(args: &EvalArgs, mut prov: Provenance) -> Result<()> {
    let detector = build_detector(&args.detector, &mut prov)?;
    let train = Labeled::load(&args.input, &args.scores, &detector, &mut prov)?;
    let test = match (&args.test_in, &args.test_scores) {
        (Some(test_in), Some(test_scores)) => {
            Some(Labeled::load(test_in, test_scores, &detector, &mut prov)?)
        }
        _ => None,
    };
    let evaluate = |c: f64| -> Result<EvalReport> {
        let mut config = train_config(&args.model);
        config.svm.c = c;
        let report = match &test {
            Some(test) => evaluate_cross_domain(&train.examples(), &test.examples(), &config)?,
            None => evaluate_in_domain(&train.examples(), &config, args.protocol, args.model.seed)?,
        };
        info!("C = {c}: accuracy {:.4} over {} requests", report.accuracy, report.n);
        Ok(report)
    };
    if args.c_grid.is_empty() {
        return write_json(&args.out, &prov, &evaluate(args.model.c)?);
    }
    let mut grid = Vec::new();
    for &c in &args.c_grid {
        grid.push(GridPoint { c, report: evaluate(c)? });
    }
    let best_c = grid
        .iter()
        .max_by(|x, y| {
            x.report
                .accuracy
                .total_cmp(&y.report.accuracy)
                .then(y.c.total_cmp(&x.c))
        })
        .map(|p| p.c)
        .expect("non-empty grid");
    write_json(&args.out, &prov, &GridReport { grid, best_c })
}

#[derive(Serialize)]
struct ScoreLineOut<'a> {
    id: &'a str,
    score: f64,
    class: politeness_core::classifier::Class,
    margin: f64,
}

pub fn score(args: &ScoreArgs, mut prov: Provenance) -> Result<()> {
    prov.add_input(&args.model)?;
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let model = LinearModel::from_json(&text)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let detector = build_detector(&args.detector, &mut prov)?;
    prov.add_input(&args.input)?;
    let mut out = JsonlWriter::create(&args.out, &prov)?;
    let n = stream_requests(
        &args.input,
        |chunk| {
            let items: Vec<(&ParsedRequest, StrategyProfile)> =
                chunk.par_iter().map(|r| (r, detector.detect(r))).collect();
            Ok(model.predict_batch(&items)?)
        },
        |request, p| {
            out.write(&ScoreLineOut {
                id: &request.id,
                score: p.score,
                class: p.class,
                margin: p.margin,
            })
        },
    )?;
    out.finish()?;
    info!("scored {n} requests");
    Ok(())
}

pub fn compare(args: &CompareArgs, mut prov: Provenance) -> Result<()> {
    prov.add_input(&args.input)?;
    prov.add_input(&args.scores)?;
    let joined = join_scores(read_requests(&args.input)?, &read_scores(&args.scores)?);
    let items: Vec<GroupItem<f64>> = joined
        .iter()
        .map(|(r, s)| GroupItem::from_request(r, &args.key, s.score))
        .collect();
    let reference = match args.reference.as_str() {
        "complement" => Reference::Complement,
        group => Reference::Group(group.to_string()),
    };
    let comparison = group_compare(&items, &args.key, reference, args.score_kind.into())?;
    for d in &comparison.diagnostics {
        warn!("{}: {}", d.subject, d.message);
    }
    match args.format {
        FormatArg::Csv => write_csv(&args.out, &prov, &group_comparison_csv(&comparison)),
        FormatArg::Json => write_json(&args.out, &prov, &comparison),
    }
}
