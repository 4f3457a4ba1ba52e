use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, run_once, Pipeline};
use crate::dataset::{train_test_split, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::iba;
use crate::weights::{alpha_grid, round3, AlphaPair, WeightSchema, GRID_STEPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub dataset_id: String,
    pub pipeline: Pipeline,
    pub train_fraction: f64,
    pub seeds: Vec<u64>,
    /// Category map for EAT methods; its alpha is replaced at every grid point.
    pub schema_template: Option<WeightSchema>,
}

/// One evaluated grid point.
///
/// `baseline_ba` is the balanced accuracy of the matching unweighted method
/// on the same split and classifier, so `iba = ba - baseline_ba` can be
/// checked from the report alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset_id: String,
    pub method: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub k: usize,
    pub sigma: f64,
    pub classifier: String,
    pub seed: u64,
    pub ba: f64,
    pub iba: f64,
    pub baseline_ba: f64,
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Rows sorted by (alpha, seed), the canonical order for comparison.
    pub fn sorted(&self) -> Vec<SweepRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| {
            a.alpha
                .unwrap_or(-1.0)
                .total_cmp(&b.alpha.unwrap_or(-1.0))
                .then(a.seed.cmp(&b.seed))
                .then(a.method.cmp(&b.method))
                .then(a.classifier.cmp(&b.classifier))
        });
        rows
    }

    pub fn append(&mut self, other: SweepReport) {
        self.rows.extend(other.rows);
    }

    pub fn clear_timings(&mut self) {
        for row in &mut self.rows {
            row.wall_time_ms = None;
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for row in &self.rows {
            serde_json::to_writer(&mut writer, row)?;
            writer
                .write_all(b"\n")
                .map_err(|e| Error::io("<report>", e))?;
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let rows = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(Self { rows })
    }

    pub fn read_jsonl(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(Self { rows })
    }
}

struct Task<'a> {
    seed: u64,
    split: &'a (LabeledDataset, LabeledDataset),
    point: Option<AlphaPair>,
}

/// Runs the evaluation grid.
///
/// EAT methods produce one row per (alpha, seed) over the 20-point alpha
/// grid, each compared against the same-seed run of the unweighted method.
/// Baselines and `None` produce one row per seed with `iba = 0`. Grid points
/// run in parallel; every task owns a derived seed, so the report does not
/// depend on scheduling.
pub fn run_sweep(ds: &LabeledDataset, settings: &SweepSettings) -> Result<SweepReport> {
    if settings.seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed is required".into()));
    }
    let pipeline = &settings.pipeline;
    let eat = pipeline.method.is_some_and(|m| m.is_eat());
    if eat && settings.schema_template.is_none() {
        return Err(Error::InvalidConfig(
            "EAT sweeps need a schema template".into(),
        ));
    }

    let splits = settings
        .seeds
        .iter()
        .map(|&s| train_test_split(ds, settings.train_fraction, s))
        .collect::<Result<Vec<_>>>()?;

    let base_pipeline = pipeline.with_method(pipeline.method.map(|m| m.baseline()));
    let baselines = settings
        .seeds
        .par_iter()
        .zip(&splits)
        .map(|(&seed, (train, test))| {
            let start = Instant::now();
            let out = run_once(train, test, &base_pipeline, None, derive_seed(seed, 0))?;
            Ok((out.ba, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let method_name = pipeline.method.map_or("none", |m| m.as_str()).to_string();
    let row = |seed: u64, point: Option<AlphaPair>, ba: f64, baseline_ba: f64, ms: f64| SweepRow {
        dataset_id: settings.dataset_id.clone(),
        method: method_name.clone(),
        alpha: point.map(|p| p.alpha_rounded()),
        beta: point.map(|p| p.beta_rounded()),
        k: pipeline.k,
        sigma: pipeline.sigma,
        classifier: pipeline.classifier.to_string(),
        seed,
        ba,
        iba: iba(ba, baseline_ba),
        baseline_ba,
        wall_time_ms: Some(ms),
    };

    if !eat {
        let rows = settings
            .seeds
            .iter()
            .zip(&baselines)
            .map(|(&seed, &(ba, ms))| row(seed, None, ba, ba, ms))
            .collect();
        return Ok(SweepReport { rows });
    }

    let template = settings.schema_template.as_ref().expect("checked above");
    let tasks: Vec<(usize, Task<'_>)> = settings
        .seeds
        .iter()
        .zip(&splits)
        .enumerate()
        .flat_map(|(s, (&seed, split))| {
            alpha_grid().into_iter().map(move |p| {
                (
                    s,
                    Task {
                        seed,
                        split,
                        point: Some(p),
                    },
                )
            })
        })
        .collect();

    let rows = tasks
        .par_iter()
        .map(|(s, task)| {
            let point = task.point.expect("grid task");
            let schema = template.with_alpha(point.alpha)?;
            let start = Instant::now();
            let (train, test) = task.split;
            let out = run_once(
                train,
                test,
                pipeline,
                Some(&schema),
                derive_seed(task.seed, point.index),
            )?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(row(task.seed, Some(point), out.ba, baselines[*s].0, ms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows })
}

/// Which subgroup the best weighting favours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterpretationLabel {
    /// Higher balanced accuracy when the low-impact, high-frequency subgroup
    /// gets the larger weight (alpha < 0.5).
    #[serde(rename = "A")]
    A,
    /// Higher balanced accuracy when the high-impact, low-frequency subgroup
    /// gets the larger weight (alpha > 0.5).
    #[serde(rename = "B")]
    B,
    #[serde(rename = "APPROX")]
    Approx,
}

impl InterpretationLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            InterpretationLabel::A => "A",
            InterpretationLabel::B => "B",
            InterpretationLabel::Approx => "APPROX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InterpretationKey {
    pub dataset_id: String,
    pub method: String,
    pub classifier: String,
}

fn alpha_key(alpha: f64) -> i64 {
    (alpha * 1000.0).round() as i64
}

/// Mean BA per alpha (keyed in thousandths) for each EAT group, checking the
/// sweep is complete.
fn grid_means(report: &SweepReport) -> Result<BTreeMap<InterpretationKey, BTreeMap<i64, f64>>> {
    let mut groups: BTreeMap<InterpretationKey, BTreeMap<i64, Vec<(u64, f64)>>> = BTreeMap::new();
    for row in &report.rows {
        let Some(alpha) = row.alpha else { continue };
        let key = InterpretationKey {
            dataset_id: row.dataset_id.clone(),
            method: row.method.clone(),
            classifier: row.classifier.clone(),
        };
        groups
            .entry(key)
            .or_default()
            .entry(alpha_key(alpha))
            .or_default()
            .push((row.seed, row.ba));
    }
    if groups.is_empty() {
        return Err(Error::IncompleteSweep(
            "report has no weighted grid rows".into(),
        ));
    }
    let expected: BTreeSet<i64> = alpha_grid().iter().map(|p| alpha_key(p.alpha)).collect();
    let mut out = BTreeMap::new();
    for (key, by_alpha) in groups {
        let present: BTreeSet<i64> = by_alpha.keys().copied().collect();
        if present != expected {
            return Err(Error::IncompleteSweep(format!(
                "{}/{}/{}: {} of {} alpha values present",
                key.dataset_id,
                key.method,
                key.classifier,
                present.intersection(&expected).count(),
                GRID_STEPS - 1
            )));
        }
        let seed_sets: BTreeSet<Vec<u64>> = by_alpha
            .values()
            .map(|v| {
                let mut s: Vec<u64> = v.iter().map(|(seed, _)| *seed).collect();
                s.sort_unstable();
                s
            })
            .collect();
        if seed_sets.len() != 1 {
            return Err(Error::IncompleteSweep(format!(
                "{}/{}/{}: alpha values were run with different seeds",
                key.dataset_id, key.method, key.classifier
            )));
        }
        let means = by_alpha
            .into_iter()
            .map(|(a, v)| (a, v.iter().map(|(_, ba)| ba).sum::<f64>() / v.len() as f64))
            .collect();
        out.insert(key, means);
    }
    Ok(out)
}

/// Labels each (dataset, method, classifier) group: `B` when the best mean
/// BA with alpha > 0.5 beats the best with alpha < 0.5 by more than
/// `epsilon`, `A` for the reverse, `Approx` otherwise.
pub fn interpret(
    report: &SweepReport,
    epsilon: f64,
) -> Result<BTreeMap<InterpretationKey, InterpretationLabel>> {
    Ok(grid_means(report)?
        .into_iter()
        .map(|(key, means)| {
            let best = |pred: fn(i64) -> bool| {
                means
                    .iter()
                    .filter(|(a, _)| pred(**a))
                    .map(|(_, ba)| *ba)
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let high = best(|a| a > 500);
            let low = best(|a| a < 500);
            let label = if high - low > epsilon {
                InterpretationLabel::B
            } else if low - high > epsilon {
                InterpretationLabel::A
            } else {
                InterpretationLabel::Approx
            };
            (key, label)
        })
        .collect())
}

/// Alpha with the highest seed-averaged BA (first one on ties) and that BA.
/// For reports without grid rows returns `None` and the mean BA.
pub fn best_point(report: &SweepReport) -> Option<(Option<f64>, f64)> {
    if report.rows.is_empty() {
        return None;
    }
    let mut by_alpha: BTreeMap<Option<i64>, (f64, usize)> = BTreeMap::new();
    for row in &report.rows {
        let e = by_alpha.entry(row.alpha.map(alpha_key)).or_default();
        e.0 += row.ba;
        e.1 += 1;
    }
    let mut best: Option<(Option<f64>, f64)> = None;
    for (alpha, (sum, n)) in by_alpha {
        let mean = sum / n as f64;
        if best.is_none_or(|(_, b)| mean > b) {
            best = Some((alpha.map(|a| round3(a as f64 / 1000.0)), mean));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ClassifierKind;
    use crate::harness::{generate_synthetic, GeneratorSpec};
    use crate::oversample::Method;

    fn synthetic_report(curve: impl Fn(f64) -> f64) -> SweepReport {
        let rows = alpha_grid()
            .iter()
            .map(|p| SweepRow {
                dataset_id: "d".into(),
                method: "eat-smote".into(),
                alpha: Some(p.alpha_rounded()),
                beta: Some(p.beta_rounded()),
                k: 5,
                sigma: 0.1,
                classifier: "tree".into(),
                seed: 1,
                ba: curve(p.alpha),
                iba: 0.0,
                baseline_ba: 0.0,
                wall_time_ms: None,
            })
            .collect();
        SweepReport { rows }
    }

    fn label_of(report: &SweepReport, eps: f64) -> InterpretationLabel {
        *interpret(report, eps).unwrap().values().next().unwrap()
    }

    #[test]
    fn interpretation_rule() {
        // peak 0.88 near alpha 0.9, best low side 0.85
        let r = synthetic_report(|a| {
            if a > 0.5 {
                0.80 + 0.08 * a / 0.952
            } else {
                0.85 - 0.01 * a
            }
        });
        assert_eq!(label_of(&r, 0.005), InterpretationLabel::B);
        let r = synthetic_report(|a| 0.8 - (a - 0.5).abs() * 0.1);
        assert_eq!(label_of(&r, 0.005), InterpretationLabel::Approx);
        let r = synthetic_report(|a| 0.9 - a * 0.1);
        assert_eq!(label_of(&r, 0.005), InterpretationLabel::A);
    }

    #[test]
    fn incomplete_sweep_rejected() {
        let mut r = synthetic_report(|_| 0.7);
        r.rows.pop();
        assert!(matches!(
            interpret(&r, 0.005),
            Err(Error::IncompleteSweep(_))
        ));
        assert!(interpret(&SweepReport::default(), 0.005).is_err());
    }

    fn small() -> LabeledDataset {
        let spec = GeneratorSpec {
            majority: 140,
            minority: vec![10, 10],
            ..GeneratorSpec::default()
        };
        generate_synthetic(&spec, 11).unwrap()
    }

    fn settings(method: Option<Method>) -> SweepSettings {
        SweepSettings {
            dataset_id: "syn".into(),
            pipeline: Pipeline::new(method, ClassifierKind::Gnb),
            train_fraction: 0.7,
            seeds: vec![3],
            schema_template: Some(WeightSchema::high_low(0.5).unwrap()),
        }
    }

    #[test]
    fn eat_sweep_has_twenty_rows_and_consistent_iba() {
        let report = run_sweep(&small(), &settings(Some(Method::EatSmote))).unwrap();
        assert_eq!(report.rows.len(), 20);
        assert!(report
            .rows
            .iter()
            .any(|r| r.alpha == Some(0.238) && r.beta == Some(0.762)));
        for r in &report.rows {
            assert!((r.alpha.unwrap() + r.beta.unwrap() - 1.0).abs() < 1e-9);
            assert_eq!(r.iba, r.ba - r.baseline_ba);
        }
        let baseline = run_sweep(&small(), &settings(Some(Method::Smote))).unwrap();
        assert_eq!(baseline.rows.len(), 1);
        assert_eq!(baseline.rows[0].iba, 0.0);
        assert_eq!(baseline.rows[0].ba, report.rows[0].baseline_ba);
    }

    #[test]
    fn sweep_is_order_insensitive_and_round_trips() {
        let mut a = run_sweep(&small(), &settings(Some(Method::EatRos))).unwrap();
        let mut b = run_sweep(&small(), &settings(Some(Method::EatRos))).unwrap();
        a.clear_timings();
        b.clear_timings();
        b.rows.reverse();
        assert_eq!(a.sorted(), b.sorted());

        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        assert_eq!(SweepReport::read_csv(csv.as_slice()).unwrap(), a);
        let mut jl = Vec::new();
        a.write_jsonl(&mut jl).unwrap();
        let text = String::from_utf8(jl).unwrap();
        assert_eq!(text.lines().count(), 20);
        assert!(text
            .lines()
            .next()
            .unwrap()
            .starts_with("{\"dataset_id\":\"syn\",\"method\":\"eat-ros\""));
        assert_eq!(SweepReport::read_jsonl(&text).unwrap(), a);
    }

    #[test]
    fn eat_sweep_requires_template() {
        let mut s = settings(Some(Method::EatAdasyn));
        s.schema_template = None;
        assert!(run_sweep(&small(), &s).is_err());
    }

    #[test]
    fn best_point_picks_peak() {
        let r = synthetic_report(|a| 1.0 - (a - 5.0 / 21.0).abs());
        assert_eq!(best_point(&r), Some((Some(0.238), 1.0)));
    }
}
