use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uec_core::analysis::{
    Restriction, DEFAULT_BUDGET, DEFAULT_COMPOSITION_CAP, DEFAULT_DELTAS, DEFAULT_DELTA_MAX,
    DEFAULT_GAIN_MIN,
};
use uec_core::operators::{Extent, FamilyDescriptor, Member, OperatorFamily};
use uec_core::space::{BasisIndexing, IndexKind};

use crate::error::CliError;
use crate::matrix::read_matrix_csv;

pub const DEFAULT_MAX_DIM: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceConfig,
    pub scheme: SchemeConfig,
    pub family: FamilyConfig,
    #[serde(default)]
    pub analyses: Vec<AnalysisConfig>,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub indexing: IndexKind,
    /// Truncation dimensions. Ladder analyses use all of them, the others
    /// run at the last one.
    pub ladder: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    /// Number of scheduled basis vectors; defaults to every positive index
    /// of the truncation.
    #[serde(default)]
    pub basis_count: Option<usize>,
    #[serde(default)]
    pub net_depth: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    LeftShiftPowers { k_max: Extent },
    RightShiftPowers { n_max: Extent },
    AdjointRightShiftPowers { n_max: Extent },
    MultGroup { t_list: Vec<f64> },
    ConjugationGroup { t_list: Vec<f64> },
    /// Matrices read from CSV files, resolved against the config directory.
    Custom { members: Vec<CustomMember> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMember {
    pub label: String,
    pub matrix: PathBuf,
}

impl FamilyConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            FamilyConfig::LeftShiftPowers { .. } => "left_shift_powers",
            FamilyConfig::RightShiftPowers { .. } => "right_shift_powers",
            FamilyConfig::AdjointRightShiftPowers { .. } => "adjoint_right_shift_powers",
            FamilyConfig::MultGroup { .. } => "mult_group",
            FamilyConfig::ConjugationGroup { .. } => "conjugation_group",
            FamilyConfig::Custom { .. } => "custom",
        }
    }

    /// Builds the family on a truncation of dimension `dim`. Custom
    /// matrices are zero-padded or cropped to `dim`.
    pub fn build(&self, kind: IndexKind, dim: usize, base: &Path) -> Result<OperatorFamily, CliError> {
        let indexing = BasisIndexing::new(kind, dim);
        let descriptor = match self {
            FamilyConfig::LeftShiftPowers { k_max } => FamilyDescriptor::LeftShiftPowers { k_max: *k_max },
            FamilyConfig::RightShiftPowers { n_max } => FamilyDescriptor::RightShiftPowers { n_max: *n_max },
            FamilyConfig::AdjointRightShiftPowers { n_max } => {
                FamilyDescriptor::AdjointRightShiftPowers { n_max: *n_max }
            }
            FamilyConfig::MultGroup { t_list } => FamilyDescriptor::MultGroup { t_list: t_list.clone() },
            FamilyConfig::ConjugationGroup { t_list } => {
                FamilyDescriptor::ConjugationGroup { t_list: t_list.clone() }
            }
            FamilyConfig::Custom { members } => {
                if members.is_empty() {
                    return Err(CliError::Validation("custom family has no members".into()));
                }
                let mut out = Vec::with_capacity(members.len());
                let mut native = None;
                for m in members {
                    let op = read_matrix_csv(&base.join(&m.matrix))?;
                    if *native.get_or_insert(op.dim()) != op.dim() {
                        return Err(CliError::Validation(format!(
                            "custom member {} has dimension {}, expected {}",
                            m.label,
                            op.dim(),
                            native.unwrap_or(0)
                        )));
                    }
                    out.push(Member::new(m.label.clone(), op));
                }
                let n = native.unwrap_or(dim);
                let fam = OperatorFamily::custom(BasisIndexing::new(kind, n), out)?;
                return Ok(fam.at_dim(dim)?);
            }
        };
        Ok(descriptor.build(indexing)?)
    }
}

/// Operand of an analysis: the family acting on vectors, or the super-maps
/// it induces on operators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    Vectors,
    LeftMult,
    RightMult,
    Conjugation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Report and file-name label; defaults to the analysis kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub analysis: Analysis,
}

impl AnalysisConfig {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.analysis.kind())
    }
}

fn default_deltas() -> Vec<f64> {
    DEFAULT_DELTAS.to_vec()
}

fn default_delta_max() -> f64 {
    DEFAULT_DELTA_MAX
}

fn default_gain_min() -> f64 {
    DEFAULT_GAIN_MIN
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_cap() -> usize {
    DEFAULT_COMPOSITION_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analysis {
    Banded {
        k: usize,
    },
    DimCriterion {
        /// `V = span{e_i : i in v_indices}`.
        v_indices: Vec<i64>,
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        oracle: Option<OracleConfig>,
    },
    Isometry {
        v_indices: Vec<i64>,
        #[serde(default)]
        restriction: Restriction,
    },
    Modulus {
        #[serde(default)]
        target: Target,
        #[serde(default = "default_deltas")]
        deltas: Vec<f64>,
        budget: usize,
        seed: u64,
    },
    Certificate {
        #[serde(default)]
        target: Target,
        #[serde(default = "default_delta_max")]
        delta_max: f64,
        #[serde(default = "default_gain_min")]
        gain_min: f64,
        #[serde(default = "default_budget")]
        budget: usize,
        seed: u64,
    },
    Correspondence {
        #[serde(default = "default_delta_max")]
        delta_max: f64,
        #[serde(default = "default_gain_min")]
        gain_min: f64,
        #[serde(default = "default_budget")]
        budget: usize,
        seed: u64,
    },
    EcUec {
        #[serde(default = "default_deltas")]
        deltas: Vec<f64>,
        base_points: usize,
        budget: usize,
        seed: u64,
    },
    Composition {
        /// The inner family `G`; the config family is `F`.
        g: FamilyConfig,
        #[serde(default)]
        f_target: Target,
        #[serde(default)]
        g_target: Target,
        #[serde(default = "default_deltas")]
        deltas: Vec<f64>,
        budget: usize,
        seed: u64,
        #[serde(default = "default_cap")]
        cap: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Banded { .. } => "banded",
            Analysis::DimCriterion { .. } => "dim_criterion",
            Analysis::Isometry { .. } => "isometry",
            Analysis::Modulus { .. } => "modulus",
            Analysis::Certificate { .. } => "certificate",
            Analysis::Correspondence { .. } => "correspondence",
            Analysis::EcUec { .. } => "ec_uec",
            Analysis::Composition { .. } => "composition",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, overridden by `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Skip the curve CSV files.
    #[serde(default)]
    pub no_curves: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("config does not parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config, returning it with the directory that
    /// relative paths resolve against.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let ladder = &self.space.ladder;
        if ladder.is_empty() {
            return Err(CliError::Validation("ladder is empty".into()));
        }
        if ladder.contains(&0) {
            return Err(CliError::Validation("ladder entries must be positive".into()));
        }
        if ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Validation("ladder not increasing".into()));
        }
        if let Some(n) = ladder.iter().find(|n| **n > self.max_dim) {
            return Err(CliError::Validation(format!(
                "truncation dimension {n} exceeds cap {}",
                self.max_dim
            )));
        }
        for a in &self.analyses {
            if a.label().is_empty() {
                return Err(CliError::Validation("analysis label is empty".into()));
            }
            if let Analysis::Composition { f_target, g_target, .. } = &a.analysis {
                if (*f_target == Target::Vectors) != (*g_target == Target::Vectors) {
                    return Err(CliError::Validation(format!(
                        "{}: cannot compose vector maps with super-maps",
                        a.label()
                    )));
                }
            }
            if let Analysis::EcUec { budget, .. } | Analysis::Modulus { budget, .. } = &a.analysis {
                if *budget < uec_core::analysis::MIN_BUDGET {
                    return Err(CliError::Validation(format!(
                        "{}: budget must be at least {}",
                        a.label(),
                        uec_core::analysis::MIN_BUDGET
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dimension of the single-truncation analyses.
    pub fn analysis_dim(&self) -> usize {
        *self.space.ladder.last().expect("validated ladder")
    }
}
