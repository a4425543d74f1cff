use std::fmt::Write;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::FamilySummary;

fn num(x: f64) -> String {
    let r: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{r}")
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

/// Text summary of the configured family at the analysis dimension.
pub fn describe(cfg: &ExperimentConfig, base: &Path) -> Result<String, CliError> {
    let dim = cfg.analysis_dim();
    let family = cfg.family.build(cfg.space.indexing, dim, base)?;
    let s = FamilySummary::new(cfg.family.kind(), &family);
    let n = s.members.len();
    let mut out = String::new();
    let structure = if s.identity {
        "identity".to_string()
    } else {
        match s.max_superdiagonal {
            Some(k) => format!("max superdiagonal {k}"),
            None => "all entries zero".to_string(),
        }
    };
    writeln!(out, "{n} member{}, {structure}", plural(n)).unwrap();
    let indexing = match cfg.space.indexing {
        uec_core::space::IndexKind::Natural => "natural",
        uec_core::space::IndexKind::Integer => "integer",
    };
    writeln!(out, "family: {}, {indexing} indexing, dimension {dim}", s.kind).unwrap();
    let smax = s.members.iter().map(|m| m.sigma_max).fold(0.0, f64::max);
    let smin = s.members.iter().map(|m| m.sigma_min).fold(f64::INFINITY, f64::min);
    writeln!(out, "sigma_max: {}", num(smax)).unwrap();
    writeln!(out, "sigma_min: {}", num(smin)).unwrap();
    match s.safe_window {
        Some(w) => writeln!(out, "safe window: {}..={}", w.lo, w.hi).unwrap(),
        None => writeln!(out, "safe window: none").unwrap(),
    }
    for m in &s.members {
        writeln!(out, "  {}: sigma_max {}, sigma_min {}", m.label, num(m.sigma_max), num(m.sigma_min)).unwrap();
    }
    Ok(out)
}
