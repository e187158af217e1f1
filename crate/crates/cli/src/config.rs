//! Run configuration: the JSON schema accepted by `--config`, merged with
//! command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qmacro_core::error::{Error, Result};
use qmacro_core::fock::FockSpace;
use qmacro_core::linalg::{c64, CMat, CVec, PureState};
use qmacro_core::superposition::{build_superposition, GeneralSuperposition, NamedState, SpaceKind};
use qmacro_core::tolerance::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub state: Option<StateSpec>,
    /// Extra sections for `size` and `nrf`: `c_delta`, `nrf`, `times`, `checks`.
    pub measures: Vec<Measure>,
    pub delta: Option<f64>,
    pub algebra: Option<String>,
    pub per_mode_independent: bool,
    pub times: Option<TimesSpec>,
    pub grid: Option<Grid>,
    pub plot: Option<PlotSpec>,
    pub truncation: Option<usize>,
    pub tolerances: Option<Tolerances>,
    pub seed: Option<u64>,
    /// Criteria to run under `verify`; empty means all.
    pub criteria: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    CDelta,
    Nrf,
    Times,
    Checks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(NamedState),
    Custom { custom: CustomState },
}

/// A user-supplied `(φ, U, N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomState {
    /// Amplitudes as `[re, im]` pairs; normalized on load.
    pub phi: Vec<[f64; 2]>,
    pub unitary: UnitarySpec,
    pub n_modes: usize,
    #[serde(default = "default_kind")]
    pub kind: SpaceKind,
}

fn default_kind() -> SpaceKind {
    SpaceKind::Fock
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UnitarySpec {
    /// CSV with one row per matrix row, entries interleaved `re, im`.
    MatrixFile {
        path: PathBuf,
    },
    Displacement {
        re: f64,
        im: f64,
    },
    Squeeze {
        re: f64,
        im: f64,
    },
    /// `exp(−iθ n̂)`.
    Phase {
        theta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimesSpec {
    pub state: String,
    pub hamiltonian: String,
    /// Weight of the maximally mixed state mixed into the preset.
    pub mix: f64,
}

impl Default for TimesSpec {
    fn default() -> Self {
        Self { state: "plus".into(), hamiltonian: "sigmaz".into(), mix: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `C̃` of the four Gaussian cats (computed, printed, normalization-implied).
    Gaussian,
    /// `N^rF` of a named family over modes and amplitudes.
    Nrf,
    /// `C_δ` of a named family over modes, amplitudes and δ.
    Size,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub kind: GridKind,
    /// Family for `nrf` and `size` grids (`ghz`, `ecs`, `hcs`, `fockghz`, ...).
    pub state: String,
    pub alpha: Vec<f64>,
    pub xi: Vec<f64>,
    pub modes: Vec<usize>,
    pub delta: Vec<f64>,
    /// Fock level for `fockghz`.
    pub n: Vec<usize>,
    pub algebra: Option<String>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            kind: GridKind::Gaussian,
            state: String::new(),
            alpha: vec![],
            xi: vec![],
            modes: vec![],
            delta: vec![],
            n: vec![],
            algebra: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotSpec {
    pub alpha: f64,
    pub xi: f64,
    /// `C̃(ξ)` curve abscissae for the four Gaussian cats.
    pub curve_xi: Vec<f64>,
    pub curve_modes: usize,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self { alpha: 0.5, xi: 0.3, curve_xi: (0..=20).map(|k| k as f64 * 0.05).collect(), curve_modes: 1 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Argument(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Validation(format!("config {}: {e}", path.display())))?;
        // matrix files are resolved against the config's directory
        if let Some(StateSpec::Custom { custom }) = &mut cfg.state {
            if let UnitarySpec::MatrixFile { path: p } = &mut custom.unitary {
                if p.is_relative() {
                    if let Some(dir) = path.parent() {
                        *p = dir.join(&*p);
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.delta {
            if !(0.0..=0.5).contains(&d) {
                return Err(Error::Argument(format!("delta must lie in [0, 1/2], got {d}")));
            }
        }
        if let Some(g) = &self.grid {
            let empty = match g.kind {
                GridKind::Gaussian => g.alpha.is_empty() || g.xi.is_empty() || g.modes.is_empty(),
                GridKind::Nrf => g.modes.is_empty(),
                GridKind::Size => g.modes.is_empty() || g.delta.is_empty(),
            };
            if empty {
                return Err(Error::Validation("sweep grid has an empty axis".into()));
            }
        }
        if self.truncation == Some(0) || self.truncation == Some(1) {
            return Err(Error::Argument("truncation must be at least 2".into()));
        }
        Ok(())
    }
}

/// Builds a named state from flat command-line parameters.
pub fn named_from_parts(
    name: &str,
    modes: Option<usize>,
    alpha: Option<f64>,
    xi: Option<f64>,
    n: Option<usize>,
) -> Result<NamedState> {
    let n_modes = modes.unwrap_or(1);
    let need_alpha = || alpha.ok_or_else(|| Error::Argument(format!("state '{name}' needs --alpha")));
    let xi_or_zero = xi.unwrap_or(0.0);
    Ok(match name.to_ascii_lowercase().as_str() {
        "ghz" => NamedState::Ghz { n_modes },
        "ecs" => NamedState::Ecs { alpha: need_alpha()?, n_modes },
        "fockghz" | "fock_ghz" => {
            NamedState::FockGhz { n: n.ok_or_else(|| Error::Argument("state 'fockghz' needs --n".into()))?, n_modes }
        }
        "hcs" => NamedState::Hcs { alpha: need_alpha()?, n_modes },
        "psi0" => NamedState::Psi0 { alpha: need_alpha()?, xi: xi_or_zero, n_modes },
        "psi1" => NamedState::Psi1 { alpha: need_alpha()?, xi: xi_or_zero, n_modes },
        "psi2plus" | "psi2+" => NamedState::Psi2Plus { alpha: need_alpha()?, xi: xi_or_zero, n_modes },
        "psi2minus" | "psi2-" => NamedState::Psi2Minus { alpha: need_alpha()?, xi: xi_or_zero, n_modes },
        "iteratedsd" | "iterated_sd" => NamedState::IteratedSd { alpha: need_alpha()?, xi: xi_or_zero, n_modes },
        other => return Err(Error::Argument(format!("unknown state '{other}'"))),
    })
}

impl CustomState {
    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn build(&self, tol: &Tolerances) -> Result<GeneralSuperposition> {
        let d = self.dim();
        if d < 2 {
            return Err(Error::Argument("custom φ needs at least two amplitudes".into()));
        }
        let phi = PureState::normalized(CVec::from_iterator(d, self.phi.iter().map(|p| c64(p[0], p[1]))), vec![d])?;
        let u = match &self.unitary {
            UnitarySpec::MatrixFile { path } => read_matrix_csv(path, d)?,
            UnitarySpec::Displacement { re, im } => FockSpace::new(d)?.displacement(c64(*re, *im), tol)?,
            UnitarySpec::Squeeze { re, im } => FockSpace::new(d)?.squeeze(c64(*re, *im), tol)?,
            UnitarySpec::Phase { theta } => {
                CMat::from_diagonal(&CVec::from_fn(d, |k, _| c64(0.0, -theta * k as f64).exp()))
            }
        };
        build_superposition(&phi, &u, self.n_modes, self.kind, tol)
    }
}

/// Reads a `d × d` complex matrix stored as `d` CSV rows of `2d` numbers.
pub fn read_matrix_csv(path: &Path, d: usize) -> Result<CMat> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))?;
    let mut m = CMat::zeros(d, d);
    let mut rows = 0usize;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        if i >= d || rec.len() != 2 * d {
            return Err(Error::Dimension(format!("{}: expected {d} rows of {} entries", path.display(), 2 * d)));
        }
        for j in 0..d {
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Validation(format!("{}: bad number '{s}'", path.display())))
            };
            m[(i, j)] = c64(parse(&rec[2 * j])?, parse(&rec[2 * j + 1])?);
        }
        rows += 1;
    }
    if rows != d {
        return Err(Error::Dimension(format!("{}: expected {d} rows, found {rows}", path.display())));
    }
    Ok(m)
}
