use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use uec_core::analysis::ModulusCurve;
use uec_core::operators::{OperatorFamily, SafeWindow};
use uec_core::space::SchemeSummary;
use uec_core::tol;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub artifact: Artifact,
    pub config: ExperimentConfig,
    pub tolerances: Tolerances,
    pub family: FamilySummary,
    pub schemes: Vec<SchemeSummary>,
    pub results: Vec<AnalysisResult>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Artifact {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub norm: f64,
    pub identity: f64,
    pub rank: f64,
    pub singular_tie: f64,
    pub unitary_defect: f64,
    pub bounded_below: f64,
    pub oracle_rank: f64,
    pub statistical: f64,
    pub significant_digits: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: tol::NORM,
            identity: tol::IDENTITY,
            rank: tol::RANK,
            singular_tie: tol::SINGULAR_TIE,
            unitary_defect: tol::UNITARY_DEFECT,
            bounded_below: tol::BOUNDED_BELOW,
            oracle_rank: tol::ORACLE_RANK,
            statistical: tol::STATISTICAL,
            significant_digits: SIGNIFICANT_DIGITS,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberSummary {
    pub label: String,
    pub sigma_max: f64,
    pub sigma_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySummary {
    pub kind: String,
    pub dim: usize,
    pub members: Vec<MemberSummary>,
    pub identity: bool,
    pub max_superdiagonal: Option<i64>,
    pub safe_window: Option<SafeWindow>,
}

impl FamilySummary {
    pub fn new(kind: &str, family: &OperatorFamily) -> Self {
        Self {
            kind: kind.to_string(),
            dim: family.dim(),
            members: family
                .members()
                .iter()
                .map(|m| MemberSummary {
                    label: m.label.clone(),
                    sigma_max: m.op.sigma_max(),
                    sigma_min: m.op.sigma_min(),
                })
                .collect(),
            identity: family.members().iter().all(|m| m.op.is_identity(tol::IDENTITY)),
            max_superdiagonal: family.max_superdiagonal(tol::IDENTITY),
            safe_window: family.safe_window(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCurve {
    /// Empty for an analysis with a single curve.
    pub name: String,
    pub deltas: Vec<f64>,
    pub omega_hat: Vec<f64>,
    pub samples_per_delta: usize,
}

impl NamedCurve {
    pub fn new(name: impl Into<String>, c: &ModulusCurve) -> Self {
        Self {
            name: name.into(),
            deltas: c.deltas.clone(),
            omega_hat: c.omega_hat.clone(),
            samples_per_delta: c.samples_per_delta,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisResult {
    pub label: String,
    pub kind: String,
    /// Headline outcome, e.g. `pass`, `both_witnessed`, `growing`.
    pub verdict: String,
    pub curves: Vec<NamedCurve>,
    pub result: Value,
}

/// The part of a report needed to re-emit its curves.
#[derive(Clone, Debug, Deserialize)]
pub struct CurveSet {
    pub label: String,
    pub curves: Vec<NamedCurve>,
}

#[derive(Deserialize)]
struct ReportCurves {
    results: Vec<CurveSet>,
}

pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_significant(x)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn curve_sets(&self) -> Vec<CurveSet> {
        self.results
            .iter()
            .map(|r| CurveSet {
                label: r.label.clone(),
                curves: r.curves.clone(),
            })
            .collect()
    }
}

pub fn curve_sets_from_json(text: &str) -> Result<Vec<CurveSet>, CliError> {
    let r: ReportCurves =
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("report does not parse: {e}")))?;
    Ok(r.results)
}

fn file_stem(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "curve".into()
    } else {
        s
    }
}

pub fn curve_csv(c: &NamedCurve) -> String {
    let mut order: Vec<usize> = (0..c.deltas.len()).collect();
    order.sort_by(|&a, &b| c.deltas[a].total_cmp(&c.deltas[b]));
    let mut out = String::from("delta,omega_hat,samples\n");
    for k in order {
        let p = SIGNIFICANT_DIGITS - 1;
        out.push_str(&format!("{:.*e},{:.*e},{}\n", p, c.deltas[k], p, c.omega_hat[k], c.samples_per_delta));
    }
    out
}

/// Writes one CSV per curve. Files are named after the analysis label (and
/// the curve name for multi-curve analyses); a repeated name gets `-2`,
/// `-3`, ... appended.
pub fn emit_curves(sets: &[CurveSet], out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("cannot write curves to {}: {e}", out_dir.display()));
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    let mut files = Vec::new();
    let mut pending = Vec::new();
    for set in sets {
        for c in &set.curves {
            let stem = if c.name.is_empty() {
                file_stem(&set.label)
            } else {
                file_stem(&format!("{}.{}", set.label, c.name))
            };
            let n = used.entry(stem.clone()).or_insert(0);
            *n += 1;
            let name = if *n == 1 { format!("{stem}.csv") } else { format!("{stem}-{n}.csv") };
            pending.push((out_dir.join(name), curve_csv(c)));
        }
    }
    if !pending.is_empty() {
        fs::create_dir_all(out_dir).map_err(io)?;
    }
    for (path, text) in pending {
        fs::write(&path, text).map_err(io)?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(name: &str) -> NamedCurve {
        NamedCurve {
            name: name.into(),
            deltas: vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2],
            omega_hat: vec![1.0 / 3.0, 0.5, 0.5, 2.0f64.sqrt() / 2.0, 0.75, 0.75],
            samples_per_delta: 1234,
        }
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_significant(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_significant(123456.7890123456), 123456.789012);
        assert_eq!(round_significant(0.0), 0.0);
        let json = to_json(&serde_json::json!({"a": [std::f64::consts::PI], "b": 7}));
        assert!(json.contains("3.14159265359"));
        assert!(json.contains("\"b\": 7"));
    }

    #[test]
    fn csv_has_header_and_one_row_per_delta() {
        let text = curve_csv(&curve(""));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "delta,omega_hat,samples");
        assert_eq!(lines[1], "1.00000000000e-4,3.33333333333e-1,1234");
    }

    #[test]
    fn csv_round_trips_rounded_report_values() {
        let c = curve("");
        let report: NamedCurve = serde_json::from_str(&to_json(&c)).unwrap();
        let text = curve_csv(&c);
        let mut rows = csv::Reader::from_reader(text.as_bytes());
        for (k, row) in rows.records().enumerate() {
            let row = row.unwrap();
            assert_eq!(row[0].parse::<f64>().unwrap(), report.deltas[k]);
            assert_eq!(row[1].parse::<f64>().unwrap(), report.omega_hat[k]);
        }
    }

    #[test]
    fn repeated_labels_get_suffixes() {
        let dir = tempfile::tempdir().unwrap();
        let sets = vec![
            CurveSet { label: "mod".into(), curves: vec![curve("")] },
            CurveSet { label: "mod".into(), curves: vec![curve("")] },
            CurveSet { label: "mod".into(), curves: vec![curve("")] },
            CurveSet { label: "ec uec".into(), curves: vec![curve("uniform")] },
        ];
        let files = emit_curves(&sets, dir.path()).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["mod.csv", "mod-2.csv", "mod-3.csv", "ec_uec.uniform.csv"]);
    }
}
