use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use uec_core::analysis::{
    automorphism_correspondence, banded_check, certificate_search, certificate_search_supermaps,
    composition_modulus_check, dim_criterion, dim_criterion_oracle, ec_equals_uec_check,
    estimate_modulus_supermaps, estimate_modulus_vectors, isometry_preimage_check, Composable,
    ModulusCurve, SearchParams, SLACK,
};
use uec_core::operators::{supermap_family, OperatorFamily, SuperMap, SuperMapKind};
use uec_core::space::{build_scheme, BasisIndexing, HVector, MetricScheme};

use crate::config::{Analysis, AnalysisConfig, ExperimentConfig, FamilyConfig, Target};
use crate::error::CliError;
use crate::report::{
    emit_curves, AnalysisReport, AnalysisResult, Artifact, FamilySummary, NamedCurve, Tolerances,
};

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("analysis reports serialize")
}

fn tag<T: Serialize>(v: &T) -> String {
    to_value(v).as_str().unwrap_or_default().to_string()
}

fn supermap_kind(t: Target) -> Option<SuperMapKind> {
    match t {
        Target::Vectors => None,
        Target::LeftMult => Some(SuperMapKind::LeftMult),
        Target::RightMult => Some(SuperMapKind::RightMult),
        Target::Conjugation => Some(SuperMapKind::Conjugation),
    }
}

fn maps(family: &OperatorFamily, t: Target) -> Result<Option<Vec<SuperMap>>, CliError> {
    supermap_kind(t)
        .map(|k| supermap_family(family, k).map_err(CliError::from))
        .transpose()
}

/// Scheme on the truncation of dimension `dim` for the configured
/// parameters.
pub fn scheme_for(cfg: &ExperimentConfig, dim: usize) -> Result<MetricScheme, CliError> {
    let indexing = BasisIndexing::new(cfg.space.indexing, dim);
    let l = cfg.scheme.basis_count.unwrap_or_else(|| indexing.positive_count());
    Ok(build_scheme(indexing, l, cfg.scheme.net_depth, cfg.scheme.seed)?)
}

fn v_basis(indices: &[i64], indexing: &BasisIndexing) -> Result<Vec<HVector>, CliError> {
    if indices.is_empty() {
        return Err(CliError::Validation("v_indices is empty".into()));
    }
    indices
        .iter()
        .map(|&i| {
            indexing.basis_vector(i).ok_or_else(|| {
                CliError::Validation(format!("e_{i} is not inside the truncation of dimension {}", indexing.dim()))
            })
        })
        .collect()
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    base: &'a Path,
    ladder_family: OperatorFamily,
    family: OperatorFamily,
    scheme: MetricScheme,
}

impl Context<'_> {
    fn build(&self, f: &FamilyConfig) -> Result<OperatorFamily, CliError> {
        f.build(self.cfg.space.indexing, self.family.dim(), self.base)
    }

    /// Everything an analysis needs that can fail on bad input, checked
    /// before any analysis runs.
    fn precheck(&self, a: &AnalysisConfig) -> Result<(), CliError> {
        match &a.analysis {
            Analysis::DimCriterion { v_indices, .. } | Analysis::Isometry { v_indices, .. } => {
                v_basis(v_indices, self.ladder_family.indexing()).map(|_| ())
            }
            Analysis::Modulus { target, .. } | Analysis::Certificate { target, .. } => {
                maps(&self.family, *target).map(|_| ())
            }
            Analysis::Correspondence { .. } => maps(&self.family, Target::Conjugation).map(|_| ()),
            Analysis::Composition { g, f_target, g_target, .. } => {
                let g = self.build(g)?;
                maps(&self.family, *f_target)?;
                maps(&g, *g_target).map(|_| ())
            }
            Analysis::Banded { .. } | Analysis::EcUec { .. } => Ok(()),
        }
    }

    fn run(&self, a: &AnalysisConfig) -> Result<AnalysisResult, CliError> {
        let mut curves = Vec::new();
        let ladder = &self.cfg.space.ladder;
        let (verdict, result) = match &a.analysis {
            Analysis::Banded { k } => {
                let r = banded_check(&self.family, *k);
                (if r.passed { "pass" } else { "fail" }.to_string(), to_value(&r))
            }
            Analysis::DimCriterion { v_indices, c, oracle } => {
                let v = v_basis(v_indices, self.ladder_family.indexing())?;
                let r = dim_criterion(&self.ladder_family, &v, *c, ladder)?;
                let oracle = match oracle {
                    Some(o) => {
                        let v: Vec<HVector> = v.iter().map(|x| x.resized(self.family.dim())).collect::<Result<_, _>>()?;
                        Some(dim_criterion_oracle(&self.family, &v, *c, o.trials, o.seed)?)
                    }
                    None => None,
                };
                (tag(&r.verdict), json!({ "criterion": r, "oracle": oracle }))
            }
            Analysis::Isometry { v_indices, restriction } => {
                let v = v_basis(v_indices, self.ladder_family.indexing())?;
                let r = isometry_preimage_check(&self.ladder_family, &v, ladder, *restriction)?;
                (tag(&r.verdict), to_value(&r))
            }
            Analysis::Modulus { target, deltas, budget, seed } => {
                let curve = match maps(&self.family, *target)? {
                    None => estimate_modulus_vectors(&self.family, &self.scheme, deltas, *budget, *seed)?,
                    Some(m) => estimate_modulus_supermaps(&m, &self.scheme, deltas, *budget, *seed)?,
                };
                curves.push(NamedCurve::new("", &curve));
                (classify(&curve).to_string(), json!({ "target": target, "curve": curve }))
            }
            Analysis::Certificate { target, delta_max, gain_min, budget, seed } => {
                let params = SearchParams { delta_max: *delta_max, gain_min: *gain_min, budget: *budget, seed: *seed };
                let (cert, verified) = match maps(&self.family, *target)? {
                    None => {
                        let c = certificate_search(&self.family, &self.scheme, &params)?;
                        let ok = c.as_ref().map(|c| c.verify_vectors(&self.family, &self.scheme)).transpose()?;
                        (c, ok)
                    }
                    Some(m) => {
                        let c = certificate_search_supermaps(&m, &self.scheme, &params)?;
                        let ok = c.as_ref().map(|c| c.verify_supermaps(&m, &self.scheme)).transpose()?;
                        (c, ok)
                    }
                };
                let verdict = if cert.is_some() { "witnessed" } else { "none" };
                (
                    verdict.to_string(),
                    json!({ "target": target, "params": params, "certificate": cert, "verified": verified }),
                )
            }
            Analysis::Correspondence { delta_max, gain_min, budget, seed } => {
                let params = SearchParams { delta_max: *delta_max, gain_min: *gain_min, budget: *budget, seed: *seed };
                let r = automorphism_correspondence(&self.family, &self.scheme, &params)?;
                (tag(&r.verdict), json!({ "params": params, "report": r }))
            }
            Analysis::EcUec { deltas, base_points, budget, seed } => {
                let r = ec_equals_uec_check(&self.family, &self.scheme, deltas, *base_points, *budget, *seed)?;
                curves.push(NamedCurve::new("uniform", &r.uniform));
                for p in &r.pointwise {
                    curves.push(NamedCurve::new(format!("pointwise-{}", p.base), &p.curve));
                }
                (if r.holds { "holds" } else { "violated" }.to_string(), to_value(&r))
            }
            Analysis::Composition { g, f_target, g_target, deltas, budget, seed, cap } => {
                let g = self.build(g)?;
                let r = match (maps(&self.family, *f_target)?, maps(&g, *g_target)?) {
                    (Some(fm), Some(gm)) => composition_modulus_check(
                        Composable::SuperMaps(&fm, &gm),
                        &self.scheme,
                        deltas,
                        *budget,
                        *seed,
                        *cap,
                    )?,
                    _ => composition_modulus_check(
                        Composable::Vectors(&self.family, &g),
                        &self.scheme,
                        deltas,
                        *budget,
                        *seed,
                        *cap,
                    )?,
                };
                curves.push(NamedCurve::new("f", &r.curve_f));
                curves.push(NamedCurve::new("g", &r.curve_g));
                curves.push(NamedCurve::new("fg", &r.curve_fg));
                (if r.holds { "holds" } else { "violated" }.to_string(), to_value(&r))
            }
        };
        Ok(AnalysisResult {
            label: a.label().to_string(),
            kind: a.analysis.kind().to_string(),
            verdict,
            curves,
            result,
        })
    }
}

/// `uec_consistent` when the curve has dropped below the slack at the
/// smallest radius, `bounded_below` otherwise.
fn classify(c: &ModulusCurve) -> &'static str {
    match c.omega_hat.first() {
        Some(w) if *w < SLACK => "uec_consistent",
        _ => "bounded_below",
    }
}

/// Validates the config against the family and schemes, then runs the
/// analyses in declared order.
pub fn run(cfg: &ExperimentConfig, base: &Path) -> Result<AnalysisReport, CliError> {
    let start = Instant::now();
    cfg.validate()?;
    let kind = cfg.space.indexing;
    let dim = cfg.analysis_dim();
    for &n in &cfg.space.ladder {
        cfg.family.build(kind, n, base)?;
    }
    let ctx = Context {
        cfg,
        base,
        ladder_family: cfg.family.build(kind, cfg.space.ladder[0], base)?,
        family: cfg.family.build(kind, dim, base)?,
        scheme: scheme_for(cfg, dim)?,
    };
    for a in &cfg.analyses {
        ctx.precheck(a)?;
    }
    let results = cfg.analyses.iter().map(|a| ctx.run(a)).collect::<Result<Vec<_>, _>>()?;
    Ok(AnalysisReport {
        artifact: Artifact::default(),
        config: cfg.clone(),
        tolerances: Tolerances::default(),
        family: FamilySummary::new(cfg.family.kind(), &ctx.family),
        schemes: vec![ctx.scheme.summary()],
        results,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub struct RunOutput {
    pub report: AnalysisReport,
    pub report_path: PathBuf,
    pub curve_files: Vec<PathBuf>,
}

/// Runs `cfg` and writes `report.json` and `curves/*.csv` into `out_dir`.
/// Files are written only after every analysis has finished.
pub fn execute(cfg: &ExperimentConfig, base: &Path, out_dir: &Path) -> Result<RunOutput, CliError> {
    let report = run(cfg, base)?;
    let io = |e: std::io::Error| CliError::Io(format!("cannot write to {}: {e}", out_dir.display()));
    fs::create_dir_all(out_dir).map_err(io)?;
    let report_path = out_dir.join("report.json");
    fs::write(&report_path, report.to_json()).map_err(io)?;
    let curve_files = if cfg.output.no_curves {
        Vec::new()
    } else {
        emit_curves(&report.curve_sets(), &out_dir.join("curves"))?
    };
    Ok(RunOutput {
        report,
        report_path,
        curve_files,
    })
}
