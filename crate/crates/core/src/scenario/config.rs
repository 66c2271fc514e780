//! The JSON-compatible scenario schema: matrices as nested [re, im] arrays,
//! unknown keys rejected, defaults filled on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lindblad::LindbladSet;
use crate::operator::Operator;
use crate::propagator::{HamiltonianKind, HamiltonianSpec, TimeGrid};
use crate::{
    Result, DEFAULT_CYC_TOL, DEFAULT_EQUIVALENCE_TOL, DEFAULT_GAP_TOL, DEFAULT_HERM_TOL,
    DEFAULT_PD_TOL,
};

fn one() -> f64 {
    1.0
}

fn linear() -> String {
    "linear".into()
}

fn default_name() -> String {
    "scenario".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianConfig {
    Constant {
        matrix: Operator,
    },
    PauliRotating {
        omega0: f64,
        omega1: f64,
        omega: f64,
    },
    PiecewiseConstant {
        times: Vec<f64>,
        matrices: Vec<Operator>,
    },
    Sampled {
        times: Vec<f64>,
        matrices: Vec<Operator>,
        #[serde(default = "linear")]
        interpolation: String,
    },
    Fourier {
        base: Operator,
        cos_term: Operator,
        sin_term: Operator,
        nu: f64,
    },
}

impl HamiltonianConfig {
    pub fn to_kind(&self) -> HamiltonianKind {
        match self {
            HamiltonianConfig::Constant { matrix } => HamiltonianKind::Constant {
                matrix: matrix.clone(),
            },
            HamiltonianConfig::PauliRotating {
                omega0,
                omega1,
                omega,
            } => HamiltonianKind::PauliRotating {
                omega0: *omega0,
                omega1: *omega1,
                omega: *omega,
            },
            HamiltonianConfig::PiecewiseConstant { times, matrices } => {
                HamiltonianKind::PiecewiseConstant {
                    times: times.clone(),
                    matrices: matrices.clone(),
                }
            }
            HamiltonianConfig::Sampled {
                times, matrices, ..
            } => HamiltonianKind::Sampled {
                times: times.clone(),
                matrices: matrices.clone(),
            },
            HamiltonianConfig::Fourier {
                base,
                cos_term,
                sin_term,
                nu,
            } => HamiltonianKind::Fourier {
                base: base.clone(),
                cos_term: cos_term.clone(),
                sin_term: sin_term.clone(),
                nu: *nu,
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaSpec {
    #[default]
    Identity,
    Diagonal { values: Vec<f64> },
    Matrix { matrix: Operator },
}

impl EtaSpec {
    pub fn to_operator(&self, dim: usize) -> Result<Operator> {
        match self {
            EtaSpec::Identity => Ok(Operator::identity(dim)),
            EtaSpec::Diagonal { values } => {
                if values.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: values.len(),
                    });
                }
                Operator::from_fn(dim, |i, j| {
                    if i == j {
                        num_complex::Complex64::new(values[i], 0.0)
                    } else {
                        num_complex::Complex64::new(0.0, 0.0)
                    }
                })
            }
            EtaSpec::Matrix { matrix } => {
                if matrix.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: matrix.dim(),
                    });
                }
                Ok(matrix.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladConfig {
    pub ops: Vec<Operator>,
    /// Jump operators carry sqrt(rate) factors; D(eta) then has the units of
    /// (1/hbar)[H, eta].
    pub rate_convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::default_herm")]
    pub herm_tol: f64,
    #[serde(default = "Tolerances::default_pd")]
    pub pd_tol: f64,
    #[serde(default = "Tolerances::default_gap")]
    pub gap_tol: f64,
    #[serde(default = "Tolerances::default_equivalence")]
    pub equivalence_tol: f64,
    #[serde(default = "Tolerances::default_cyc")]
    pub cyc_tol: f64,
}

impl Tolerances {
    fn default_herm() -> f64 {
        DEFAULT_HERM_TOL
    }
    fn default_pd() -> f64 {
        DEFAULT_PD_TOL
    }
    fn default_gap() -> f64 {
        DEFAULT_GAP_TOL
    }
    fn default_equivalence() -> f64 {
        DEFAULT_EQUIVALENCE_TOL
    }
    fn default_cyc() -> f64 {
        DEFAULT_CYC_TOL
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm_tol: Self::default_herm(),
            pd_tol: Self::default_pd(),
            gap_tol: Self::default_gap(),
            equivalence_tol: Self::default_equivalence(),
            cyc_tol: Self::default_cyc(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default = "OutputSpec::default_formats")]
    pub formats: Vec<Format>,
}

impl OutputSpec {
    fn default_formats() -> Vec<Format> {
        vec![Format::Csv, Format::Json]
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            directory: None,
            formats: Self::default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "one")]
    pub hbar: f64,
    pub dimension: usize,
    pub time: TimeSpec,
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub eta0: EtaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta1: Option<EtaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<LindbladConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: OutputSpec,
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::Validation {
        field: field.into(),
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(invalid("dimension", "must be at least 2"));
        }
        if self.time.steps < 2 {
            return Err(invalid("time.steps", "must be at least 2"));
        }
        if !(self.time.t0.is_finite()
            && self.time.t1.is_finite()
            && self.time.t1 > self.time.t0)
        {
            return Err(invalid("time", "need finite t1 > t0"));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(invalid("hbar", "must be positive"));
        }
        for (name, v) in [
            ("tolerances.herm_tol", self.tolerances.herm_tol),
            ("tolerances.pd_tol", self.tolerances.pd_tol),
            ("tolerances.gap_tol", self.tolerances.gap_tol),
            ("tolerances.equivalence_tol", self.tolerances.equivalence_tol),
            ("tolerances.cyc_tol", self.tolerances.cyc_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be positive"));
            }
        }

        let spec = self.hamiltonian_spec()?;
        if spec.dim() != self.dimension {
            return Err(invalid(
                "hamiltonian",
                format!("dimension {} != declared {}", spec.dim(), self.dimension),
            ));
        }
        match &self.hamiltonian {
            HamiltonianConfig::PauliRotating { .. } if self.dimension != 2 => {
                return Err(invalid("hamiltonian", "pauli_rotating requires dimension 2"));
            }
            HamiltonianConfig::Sampled {
                times,
                interpolation,
                ..
            } => {
                if interpolation != "linear" {
                    return Err(invalid(
                        "hamiltonian.interpolation",
                        "only \"linear\" is supported",
                    ));
                }
                let first = times[0];
                let last = *times.last().unwrap();
                if first > self.time.t0 + 1e-12 || last < self.time.t1 - 1e-12 {
                    return Err(invalid(
                        "hamiltonian.times",
                        format!(
                            "samples cover [{first}, {last}] but the run needs [{}, {}]",
                            self.time.t0, self.time.t1
                        ),
                    ));
                }
            }
            HamiltonianConfig::PiecewiseConstant { times, .. }
                if times[0] > self.time.t0 + 1e-12 =>
            {
                return Err(invalid(
                    "hamiltonian.times",
                    "first segment must start at or before t0",
                ));
            }
            _ => {}
        }

        self.eta0.to_operator(self.dimension).map_err(|_| {
            invalid("eta0", format!("must be {0}x{0}", self.dimension))
        })?;
        if let EtaSpec::Diagonal { values } = &self.eta0 {
            if values.len() != self.dimension {
                return Err(invalid("eta0.values", "length must equal dimension"));
            }
        }
        if let Some(e1) = &self.eta1 {
            e1.to_operator(self.dimension).map_err(|_| {
                invalid("eta1", format!("must be {0}x{0}", self.dimension))
            })?;
        }
        if let Some(l) = &self.lindblad {
            if l.rate_convention != "sqrt_rate_embedded" {
                return Err(invalid(
                    "lindblad.rate_convention",
                    "only \"sqrt_rate_embedded\" is supported",
                ));
            }
            if l.ops.iter().any(|a| a.dim() != self.dimension) {
                return Err(invalid("lindblad.ops", "dimension mismatch"));
            }
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.time.t0, self.time.t1, self.time.steps, self.hbar)
    }

    pub fn hamiltonian_spec(&self) -> Result<HamiltonianSpec> {
        HamiltonianSpec::new(self.hamiltonian.to_kind(), self.hbar)
    }

    pub fn eta0_operator(&self) -> Result<Operator> {
        self.eta0.to_operator(self.dimension)
    }

    pub fn eta1_operator(&self) -> Result<Option<Operator>> {
        match &self.eta1 {
            None => Ok(None),
            Some(e) => Ok(Some(e.to_operator(self.dimension)?)),
        }
    }

    pub fn lindblad_set(&self) -> Result<LindbladSet> {
        match &self.lindblad {
            None => Ok(LindbladSet::empty()),
            Some(l) => LindbladSet::new(l.ops.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn save_config(cfg: &ScenarioConfig, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, cfg.to_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dimension": 2,
        "time": {"t0": 0.0, "t1": 1.0, "steps": 100},
        "hamiltonian": {"kind": "constant", "matrix": [[[1,0],[0,0]],[[0,0],[-1,0]]]}
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.hbar, 1.0);
        assert_eq!(cfg.name, "scenario");
        assert_eq!(cfg.eta0, EtaSpec::Identity);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.outputs.formats, vec![Format::Csv, Format::Json]);
        let eta = cfg.eta0_operator().unwrap();
        assert!((&eta - &Operator::identity(2)).frob_norm() < 1e-15);
        assert!(cfg.hamiltonian_spec().unwrap().is_hermitian());
    }

    #[test]
    fn zero_steps_rejected_as_validation() {
        let text = MINIMAL.replace("\"steps\": 100", "\"steps\": 0");
        match parse_config(&text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "time.steps"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_position() {
        let text = MINIMAL.replace("\"dimension\"", "\"dimensions\"");
        match parse_config(&text) {
            Err(Error::Parse { line, .. }) => assert!(line >= 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_rejected_with_position() {
        match parse_config("{ \"dimension\": ") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 1);
                assert!(column > 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn diagonal_eta_and_dimension_checks() {
        let text = MINIMAL.replace(
            "\"hamiltonian\"",
            "\"eta0\": {\"kind\": \"diagonal\", \"values\": [1.0, 2.0]}, \"hamiltonian\"",
        );
        let cfg = parse_config(&text).unwrap();
        let eta = cfg.eta0_operator().unwrap();
        assert_eq!(eta.matrix()[(1, 1)].re, 2.0);

        let bad = text.replace("[1.0, 2.0]", "[1.0, 2.0, 3.0]");
        assert!(matches!(
            parse_config(&bad),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn rate_convention_enforced() {
        let text = MINIMAL.replace(
            "\"hamiltonian\"",
            "\"lindblad\": {\"ops\": [[[[0,0],[1,0]],[[0,0],[0,0]]]], \"rate_convention\": \"bare\"}, \"hamiltonian\"",
        );
        match parse_config(&text) {
            Err(Error::Validation { field, .. }) => {
                assert_eq!(field, "lindblad.rate_convention")
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn sampled_must_cover_span() {
        let text = r#"{
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 2.0, "steps": 10},
            "hamiltonian": {"kind": "sampled",
                "times": [0.0, 1.0],
                "matrices": [[[[0,0],[0,0]],[[0,0],[0,0]]], [[[1,0],[0,0]],[[0,0],[1,0]]]]}
        }"#;
        match parse_config(text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "hamiltonian.times"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn save_load_round_trip_is_bit_identical() {
        let cfg = parse_config(MINIMAL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        save_config(&cfg, &path).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let again = load_config(&path).unwrap();
        assert_eq!(again, cfg);
        save_config(&again, &path).unwrap();
        let bytes2 = std::fs::read(&path).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn pauli_rotating_dimension_guard() {
        let text = r#"{
            "dimension": 4,
            "time": {"t0": 0.0, "t1": 1.0, "steps": 10},
            "hamiltonian": {"kind": "pauli_rotating", "omega0": 1.0, "omega1": 0.5, "omega": 0.8}
        }"#;
        assert!(matches!(
            parse_config(text),
            Err(Error::Validation { .. })
        ));
    }
}
