//! JSON run configuration. Unknown keys are rejected everywhere.
//!
//! ```json
//! {
//!   "target":   { "n": 4, "epsilon": 2000, "v": -0.2 },
//!   "hardware": { "kind": "ising_transverse", "omega": 5, "j": 0.03,
//!                 "freq_tunable": true, "couplings_switchable": true },
//!   "trotter":  { "m": 20, "g": 1 },
//!   "run":      { "t": 5.0 }
//! }
//! ```
//!
//! Scalars broadcast: `epsilon`/`omega` to every qubit, `j` to every bond,
//! and a scalar `v` to every off-diagonal pair. `target.fermionic` replaces
//! `epsilon`/`v` and folds the diagonal of `v` into the on-site energies.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::Metric;
use crate::compiler::{CompileOptions, SynthesisTarget, XxyyRoute, ZzRoute};
use crate::error::{Error, Result};
use crate::models::{from_fermionic, FermionicInput, HardwareKind, HardwareModel, PairingModel, TrotterOptions};
use crate::spectroscopy::{InitialState, PropagatorSource, ProtocolConfig, DEFAULT_PEAK_THRESHOLD};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Scalar(f64),
    List(Vec<f64>),
}

impl Values {
    fn expand(&self, len: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            Values::Scalar(x) => Ok(vec![*x; len]),
            Values::List(v) if v.len() == len => Ok(v.clone()),
            Values::List(v) => Err(Error::InvalidConfig(format!(
                "{name} has {} entries, expected {len}",
                v.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matrix {
    /// Same value on every off-diagonal entry.
    Uniform(f64),
    Rows(Vec<Vec<f64>>),
}

impl Matrix {
    fn expand(&self, n: usize, name: &str) -> Result<DMatrix<f64>> {
        match self {
            Matrix::Uniform(x) => Ok(DMatrix::from_fn(n, n, |r, c| if r == c { 0.0 } else { *x })),
            Matrix::Rows(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidConfig(format!("{name} must be {n}×{n}")));
                }
                Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FermionicSection {
    pub eps: Values,
    pub v: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fermionic: Option<FermionicSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareSection {
    pub kind: HardwareKind,
    pub omega: Values,
    pub j: Values,
    #[serde(default)]
    pub freq_tunable: bool,
    #[serde(default)]
    pub couplings_switchable: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xxyy: Option<XxyyRoute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zz: Option<ZzRoute>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Points(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Grid::Points(v) if !v.is_empty() => Ok(v.clone()),
            Grid::Points(_) => Err(Error::InvalidConfig("empty time grid".into())),
            Grid::Range { start, stop, points } => {
                if *points < 2 || stop.partial_cmp(start) != Some(std::cmp::Ordering::Greater) {
                    return Err(Error::InvalidConfig("grid needs stop > start and at least 2 points".into()));
                }
                let dt = (stop - start) / (*points - 1) as f64;
                Ok((0..*points).map(|k| start + dt * k as f64).collect())
            }
        }
    }
}

/// Single synthesis target for `compile`; defaults to the full pairing
/// evolution at `run.t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthesisSpec {
    SingleZ { l: usize, theta: f64 },
    PairZz { l: usize, m: usize, phi: f64 },
    PairXxyy { l: usize, m: usize, phi: f64 },
    FullPairing { t: f64 },
}

impl From<SynthesisSpec> for SynthesisTarget<f64> {
    fn from(s: SynthesisSpec) -> Self {
        match s {
            SynthesisSpec::SingleZ { l, theta } => SynthesisTarget::SingleZ { l, theta },
            SynthesisSpec::PairZz { l, m, phi } => SynthesisTarget::PairZz { l, m, phi },
            SynthesisSpec::PairXxyy { l, m, phi } => SynthesisTarget::PairXxyy { l, m, phi },
            SynthesisSpec::FullPairing { t } => SynthesisTarget::FullPairing { t },
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Evolution time for `compile`, `simulate` and `trotter-fit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Backends for `complexity-sweep`; defaults to `hardware.kind`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backends: Option<Vec<HardwareKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    #[serde(default = "yes")]
    pub smooth: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t: None,
            synthesis: None,
            t_grid: None,
            m_list: None,
            n_list: None,
            backends: None,
            metric: None,
            smooth: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    #[default]
    Exact,
    Compiled,
}

fn default_threshold() -> f64 {
    DEFAULT_PEAK_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectroscopySection {
    pub t_max: f64,
    pub n_samples: usize,
    pub initial_state: InitialState,
    #[serde(default)]
    pub source: SourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub target: TargetSection,
    pub hardware: HardwareSection,
    #[serde(default)]
    pub trotter: TrotterOptions,
    #[serde(default)]
    pub routes: RouteSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectroscopy: Option<SpectroscopySection>,
}

impl Config {
    /// Parses and fully validates a document.
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        TrotterOptions::new(self.trotter.m, self.trotter.g).map_err(as_config)?;
        self.pairing_model()?;
        self.hardware_model()?;
        if let Some(s) = &self.spectroscopy {
            if !(s.threshold > 0.0 && s.threshold < 1.0) {
                return Err(Error::InvalidConfig("spectroscopy.threshold must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.target.n
    }

    pub fn pairing_model(&self) -> Result<PairingModel<f64>> {
        let n = self.target.n;
        let t = &self.target;
        match (&t.epsilon, &t.v, &t.fermionic) {
            (Some(eps), v, None) => {
                let v = match v {
                    Some(m) => m.expand(n, "target.v")?,
                    None => DMatrix::zeros(n, n),
                };
                PairingModel::new(eps.expand(n, "target.epsilon")?, v).map_err(as_config)
            }
            (None, None, Some(f)) => {
                let input = FermionicInput::new(f.eps.expand(n, "target.fermionic.eps")?, f.v.expand(n, "target.fermionic.v")?)
                    .map_err(as_config)?;
                from_fermionic(&input).map_err(as_config)
            }
            _ => Err(Error::InvalidConfig(
                "target needs either epsilon (with optional v) or fermionic, not both".into(),
            )),
        }
    }

    pub fn hardware_model(&self) -> Result<HardwareModel<f64>> {
        let n = self.target.n;
        let h = &self.hardware;
        HardwareModel::new(
            h.kind,
            h.omega.expand(n, "hardware.omega")?,
            h.j.expand(n.saturating_sub(1), "hardware.j")?,
            h.freq_tunable,
            h.couplings_switchable,
        )
        .map_err(as_config)
    }

    pub fn compile_options(&self) -> CompileOptions {
        CompileOptions {
            trotter: self.trotter,
            xxyy_route: self.routes.xxyy,
            zz_route: self.routes.zz,
        }
    }

    /// `run.synthesis`, or the full pairing evolution at `run.t`.
    pub fn synthesis_target(&self) -> Result<SynthesisTarget<f64>> {
        match (self.run.synthesis, self.run.t) {
            (Some(s), _) => Ok(s.into()),
            (None, Some(t)) => Ok(SynthesisTarget::FullPairing { t }),
            (None, None) => Err(Error::InvalidConfig("run.t or run.synthesis is required".into())),
        }
    }

    pub fn evolution_time(&self) -> Result<f64> {
        self.run
            .t
            .ok_or_else(|| Error::InvalidConfig("run.t is required".into()))
    }

    pub fn protocol(&self, seed: u64) -> Result<(ProtocolConfig<f64>, f64)> {
        let s = self
            .spectroscopy
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("spectroscopy section is required".into()))?;
        let source = match s.source {
            SourceKind::Exact => PropagatorSource::Exact,
            SourceKind::Compiled => PropagatorSource::Compiled {
                hardware: self.hardware_model()?,
                opts: self.compile_options(),
            },
        };
        let psi = s.initial_state.build().map_err(as_config)?;
        if psi.n_qubits() != self.target.n {
            return Err(Error::InvalidConfig(format!(
                "spectroscopy.initial_state has {} qubits, target.n is {}",
                psi.n_qubits(),
                self.target.n
            )));
        }
        let cfg = ProtocolConfig {
            t_max: s.t_max,
            n_samples: s.n_samples,
            initial_state: psi,
            source,
            shots: s.shots,
            seed,
        };
        Ok((cfg, s.threshold))
    }
}

/// Model-construction failures inside a config are configuration errors.
fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidConfig(_) => e,
        other => Error::InvalidConfig(other.to_string()),
    }
}
