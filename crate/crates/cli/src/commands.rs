//! One function per subcommand.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use qmacro_core::branch_size::{
    c_delta, figure_ellipses, gaussian_cat_size, EllipseConvention, GaussianCat, GaussianCatReport, SizeReport,
};
use qmacro_core::error::{Error, Result};
use qmacro_core::fisher::{
    nrf_measure, nrf_named, projector_variance_check, AlgebraBasis, FamilyName, MaximizeOptions,
    ProjectorVarianceCheck, RFResult,
};
use qmacro_core::fock::{FockSpace, TruncationCertificate};
use qmacro_core::linalg::{c64, CMat, DensityMatrix, HermitianObservable, PureState};
use qmacro_core::speed_limits::{
    fubini_study_ratio, nrf_time_ratio, speed_limit_report, FubiniStudyRatio, SpeedLimitReport, TimeRatio,
};
use qmacro_core::superposition::{named_state, named_state_converged, GeneralSuperposition, NamedState, SpaceKind};
use qmacro_core::tolerance::Tolerances;
use qmacro_core::verify::{run_criterion, CriterionReport};

use crate::config::{named_from_parts, Grid, GridKind, Measure, PlotSpec, RunConfig, StateSpec, TimesSpec};
use crate::output::{emit, emit_report, rows_to_csv, to_json, Format, Meta};
use crate::CliError;

/// Everything a command needs after flags and config are merged.
pub struct Ctx {
    pub cfg: RunConfig,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Ctx {
    fn tol(&self) -> Tolerances {
        self.cfg.tolerances()
    }

    fn opts(&self) -> MaximizeOptions {
        MaximizeOptions { per_mode_independent: self.cfg.per_mode_independent, ..MaximizeOptions::default() }
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    fn state(&self) -> Result<&StateSpec> {
        self.cfg.state.as_ref().ok_or_else(|| Error::Argument("no state given (use --state or a config file)".into()))
    }
}

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_SEED: u64 = 7;

/// The family each named state is usually measured with.
pub fn default_family(spec: &NamedState) -> FamilyName {
    match spec {
        NamedState::Ghz { .. } => FamilyName::QubitBloch,
        NamedState::FockGhz { .. } => FamilyName::H4FixedL1,
        NamedState::Hcs { .. } => FamilyName::Sl2,
        _ => FamilyName::H3,
    }
}

fn gaussian_kind(spec: &NamedState) -> Option<(GaussianCat, f64, f64)> {
    match *spec {
        NamedState::Psi0 { alpha, xi, .. } => Some((GaussianCat::Psi0, alpha, xi)),
        NamedState::Psi1 { alpha, xi, .. } => Some((GaussianCat::Psi1, alpha, xi)),
        NamedState::Psi2Plus { alpha, xi, .. } => Some((GaussianCat::Psi2Plus, alpha, xi)),
        NamedState::Psi2Minus { alpha, xi, .. } => Some((GaussianCat::Psi2Minus, alpha, xi)),
        _ => None,
    }
}

/// Realizes a named state at a fixed truncation, certifying it against the
/// doubled truncation.
fn named_at(
    spec: &NamedState,
    dim: usize,
    tol: &Tolerances,
) -> Result<(GeneralSuperposition, Option<TruncationCertificate>)> {
    let s = named_state(spec, dim, tol)?;
    if spec.space_kind() == SpaceKind::Spin {
        return Ok((s, None));
    }
    let big = named_state(spec, 2 * dim, tol)?;
    let change = (s.z() - big.z()).norm();
    let cert = TruncationCertificate { dim, doubled_dim: 2 * dim, max_change: change, converged: change < tol.conv };
    Ok((s, Some(cert)))
}

fn realize(ctx: &Ctx, tol: &Tolerances) -> Result<(GeneralSuperposition, Option<TruncationCertificate>)> {
    match ctx.state()? {
        StateSpec::Named(spec) => match ctx.cfg.truncation {
            Some(d) => named_at(spec, d, tol),
            None => named_state_converged(spec, None, tol),
        },
        StateSpec::Custom { custom } => Ok((custom.build(tol)?, None)),
    }
}

fn family_for(ctx: &Ctx) -> Result<FamilyName> {
    match (&ctx.cfg.algebra, ctx.state()?) {
        (Some(a), _) => FamilyName::parse(a),
        (None, StateSpec::Named(spec)) => Ok(default_family(spec)),
        (None, StateSpec::Custom { custom }) => Ok(if custom.kind == SpaceKind::Spin && custom.dim() == 2 {
            FamilyName::QubitBloch
        } else {
            FamilyName::H3
        }),
    }
}

fn basis_for(family: FamilyName, state: &GeneralSuperposition) -> Result<AlgebraBasis> {
    if family == FamilyName::QubitBloch {
        if state.local_dim() != 2 {
            return Err(Error::Argument("the qubit family needs a two-level mode".into()));
        }
        return Ok(AlgebraBasis::qubit_bloch());
    }
    AlgebraBasis::for_space(family, &FockSpace::new(state.local_dim())?)
}

// ---------------------------------------------------------------------------
// size

#[derive(Serialize)]
pub struct SizeOutput {
    pub state: StateSpec,
    pub size: SizeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<GaussianCatReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nrf: Option<RFResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projector_variance: Option<ProjectorVarianceCheck>,
}

/// Largest `D^N` for which `size` also runs the variance check.
const CHECK_DIM: usize = 4096;

pub fn cmd_size(ctx: &Ctx) -> std::result::Result<(), CliError> {
    let tol = ctx.tol();
    let (state, cert) = realize(ctx, &tol)?;
    // orthogonal branches only admit δ = 0, so that is their default
    let delta = ctx.cfg.delta.unwrap_or(if state.z().norm() == 0.0 { 0.0 } else { DEFAULT_DELTA });
    let size = c_delta(&state, delta, &tol)?;
    let gaussian = match ctx.state()? {
        StateSpec::Named(spec) => match gaussian_kind(spec) {
            Some((cat, a, x)) => {
                let d = (delta > 0.0).then_some(delta);
                Some(gaussian_cat_size(cat, a, x, spec.n_modes(), d, true, &tol)?)
            }
            None => None,
        },
        StateSpec::Custom { .. } => None,
    };
    let nrf = if ctx.cfg.measures.contains(&Measure::Nrf) {
        Some(nrf_measure(&state, &basis_for(family_for(ctx)?, &state)?, &ctx.opts())?)
    } else {
        None
    };
    let projector_variance = match state.total_dim() {
        Some(d) if ctx.cfg.measures.contains(&Measure::Checks) && d <= CHECK_DIM => {
            Some(projector_variance_check(&state, &tol)?)
        }
        _ => None,
    };
    let report = SizeOutput { state: ctx.state()?.clone(), size, gaussian, nrf, projector_variance };
    emit_report(ctx.out(), ctx.format.unwrap_or(Format::Json), &Meta::new("size", &ctx.cfg, cert), &report)
}

// ---------------------------------------------------------------------------
// nrf

#[derive(Serialize)]
pub struct NrfOutput {
    pub state: StateSpec,
    pub nrf: RFResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_ratio: Option<TimeRatio>,
}

pub fn cmd_nrf(ctx: &Ctx, with_time_ratio: bool) -> std::result::Result<(), CliError> {
    let tol = ctx.tol();
    let family = family_for(ctx)?;
    let opts = ctx.opts();
    let (state, nrf, cert) = match (ctx.state()?, ctx.cfg.truncation) {
        (StateSpec::Named(spec), None) => {
            let (r, cert) = nrf_named(spec, family, &opts, &tol)?;
            let s = named_state(spec, cert.map(|c| c.dim).unwrap_or(2), &tol)?;
            (s, r, cert)
        }
        _ => {
            let (s, cert) = realize(ctx, &tol)?;
            let r = nrf_measure(&s, &basis_for(family, &s)?, &opts)?;
            (s, r, cert)
        }
    };
    let time_ratio = if with_time_ratio {
        let d = ctx.cfg.delta.unwrap_or(DEFAULT_DELTA);
        Some(nrf_time_ratio(&state, &basis_for(family, &state)?, d, &opts)?)
    } else {
        None
    };
    let report = NrfOutput { state: ctx.state()?.clone(), nrf, time_ratio };
    emit_report(ctx.out(), ctx.format.unwrap_or(Format::Json), &Meta::new("nrf", &ctx.cfg, cert), &report)
}

// ---------------------------------------------------------------------------
// times

#[derive(Serialize)]
pub struct TimesOutput {
    pub spec: TimesSpec,
    pub report: SpeedLimitReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fubini_study: Option<FubiniStudyRatio>,
}

/// Qubit preset states by name.
pub fn qubit_state(name: &str) -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match name {
        "zero" => [c64(1.0, 0.0), c64(0.0, 0.0)],
        "one" => [c64(0.0, 0.0), c64(1.0, 0.0)],
        "plus" => [c64(h, 0.0), c64(h, 0.0)],
        "minus" => [c64(h, 0.0), c64(-h, 0.0)],
        "plus_i" => [c64(h, 0.0), c64(0.0, h)],
        "minus_i" => [c64(h, 0.0), c64(0.0, -h)],
        other => {
            return Err(Error::Argument(format!(
                "unknown qubit state '{other}' (zero, one, plus, minus, plus_i, minus_i)"
            )))
        }
    };
    PureState::normalized(qmacro_core::linalg::CVec::from_row_slice(&amps), vec![2])
}

/// Pauli Hamiltonians by name.
pub fn pauli(name: &str) -> Result<CMat> {
    let (o, z, i) = (c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0));
    Ok(match name {
        "sigmax" => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        "sigmay" => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        "sigmaz" => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        other => return Err(Error::Argument(format!("unknown Hamiltonian '{other}' (sigmax, sigmay, sigmaz)"))),
    })
}

pub fn cmd_times(ctx: &Ctx) -> std::result::Result<(), CliError> {
    let tol = ctx.tol();
    let spec = ctx.cfg.times.clone().unwrap_or_default();
    if !(0.0..=1.0).contains(&spec.mix) {
        return Err(Error::Argument(format!("mix must lie in [0, 1], got {}", spec.mix)).into());
    }
    let delta = ctx.cfg.delta.unwrap_or(DEFAULT_DELTA);
    let psi = qubit_state(&spec.state)?;
    let hm = pauli(&spec.hamiltonian)?;
    let pure = psi.to_density();
    let rho = if spec.mix > 0.0 {
        let m = pure.matrix() * c64(1.0 - spec.mix, 0.0) + CMat::identity(2, 2) * c64(0.5 * spec.mix, 0.0);
        DensityMatrix::new(m, vec![2], &tol)?
    } else {
        pure
    };
    let h = HermitianObservable::single_mode(hm.clone(), &tol)?;
    let report = speed_limit_report(&rho, &h, delta, &tol)?;
    let fubini_study = if spec.mix == 0.0 {
        let dts: Vec<f64> = (0..6).map(|k| 0.1 / 2f64.powi(k)).collect();
        Some(fubini_study_ratio(&psi, &hm, &dts)?)
    } else {
        None
    };
    let out = TimesOutput { spec, report, fubini_study };
    emit_report(ctx.out(), ctx.format.unwrap_or(Format::Json), &Meta::new("times", &ctx.cfg, None), &out)
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Serialize)]
pub struct GaussianRow {
    pub state: &'static str,
    pub alpha: f64,
    pub xi: f64,
    pub n_modes: usize,
    pub abs_z: Option<f64>,
    pub c_tilde: Option<f64>,
    pub c_tilde_printed: Option<f64>,
    pub c_tilde_from_normalization: Option<f64>,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct NrfRow {
    pub state: String,
    pub n_modes: usize,
    pub alpha: Option<f64>,
    pub xi: Option<f64>,
    pub n: Option<usize>,
    pub algebra: &'static str,
    /// `N|α|²` for amplitude families, `N` otherwise.
    pub x: f64,
    pub nrf: Option<f64>,
    pub nf_superposition: Option<f64>,
    pub nf_branch_mean: Option<f64>,
    pub truncation: Option<usize>,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct SizeRow {
    pub state: String,
    pub n_modes: usize,
    pub alpha: Option<f64>,
    pub xi: Option<f64>,
    pub n: Option<usize>,
    pub delta: f64,
    pub abs_z: Option<f64>,
    pub c_delta: Option<f64>,
    pub c_delta_integer: Option<f64>,
    pub n_eff: Option<usize>,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub kind: GridKind,
    pub rows: usize,
    pub failed_rows: usize,
    /// Least-squares slope of `log nrf` on `log x` (nrf grids only).
    pub fitted_exponent: Option<f64>,
}

fn opt_axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
    if v.is_empty() {
        vec![None]
    } else {
        v.iter().copied().map(Some).collect()
    }
}

/// Named states of one family over the grid's parameter axes.
/// modes, alpha, xi, Fock level
type GridPoint = (usize, Option<f64>, Option<f64>, Option<usize>);

fn family_points(g: &Grid) -> Vec<GridPoint> {
    let mut pts = Vec::new();
    for &m in &g.modes {
        for a in opt_axis(&g.alpha) {
            for x in opt_axis(&g.xi) {
                for n in opt_axis(&g.n) {
                    pts.push((m, a, x, n));
                }
            }
        }
    }
    pts
}

fn err_text(e: &Error) -> String {
    e.to_string()
}

pub fn sweep_rows(
    g: &Grid,
    opts: &MaximizeOptions,
    tol: &Tolerances,
) -> (Vec<u8>, SweepSummary, Vec<serde_json::Value>) {
    match g.kind {
        GridKind::Gaussian => {
            let mut pts = Vec::new();
            for c in GaussianCat::ALL {
                for &a in &g.alpha {
                    for &x in &g.xi {
                        for &m in &g.modes {
                            pts.push((c, a, x, m));
                        }
                    }
                }
            }
            let rows: Vec<GaussianRow> = pts
                .into_par_iter()
                .map(|(c, a, x, m)| match gaussian_cat_size(c, a, x, m, None, false, tol) {
                    Ok(r) => GaussianRow {
                        state: c.label(),
                        alpha: a,
                        xi: x,
                        n_modes: m,
                        abs_z: Some(r.abs_z),
                        c_tilde: Some(r.c_tilde),
                        c_tilde_printed: Some(r.c_tilde_printed),
                        c_tilde_from_normalization: Some(r.c_tilde_from_normalization),
                        error: String::new(),
                    },
                    Err(e) => GaussianRow {
                        state: c.label(),
                        alpha: a,
                        xi: x,
                        n_modes: m,
                        abs_z: None,
                        c_tilde: None,
                        c_tilde_printed: None,
                        c_tilde_from_normalization: None,
                        error: err_text(&e),
                    },
                })
                .collect();
            finish(g.kind, &rows, |r| !r.error.is_empty(), None)
        }
        GridKind::Nrf => {
            let rows: Vec<NrfRow> = family_points(g)
                .into_par_iter()
                .map(|(m, a, x, n)| {
                    let spec = named_from_parts(&g.state, Some(m), a, x, n);
                    let family = match (&g.algebra, &spec) {
                        (Some(s), _) => FamilyName::parse(s),
                        (None, Ok(sp)) => Ok(default_family(sp)),
                        (None, Err(_)) => Ok(FamilyName::H3),
                    };
                    let xval = m as f64 * a.map(|v| v * v).unwrap_or(1.0);
                    let mut row = NrfRow {
                        state: g.state.clone(),
                        n_modes: m,
                        alpha: a,
                        xi: x,
                        n,
                        algebra: family.as_ref().map(|f| f.label()).unwrap_or("?"),
                        x: xval,
                        nrf: None,
                        nf_superposition: None,
                        nf_branch_mean: None,
                        truncation: None,
                        error: String::new(),
                    };
                    match spec.and_then(|s| nrf_named(&s, family?, opts, tol)) {
                        Ok((r, cert)) => {
                            row.nrf = Some(r.nrf);
                            row.nf_superposition = Some(r.nf_superposition);
                            row.nf_branch_mean = Some(r.nf_branch_mean);
                            row.truncation = cert.map(|c| c.dim);
                        }
                        Err(e) => row.error = err_text(&e),
                    }
                    row
                })
                .collect();
            let pts: Vec<(f64, f64)> =
                rows.iter().filter_map(|r| r.nrf.filter(|v| *v > 0.0).map(|v| (r.x.ln(), v.ln()))).collect();
            let distinct = pts.iter().any(|p| (p.0 - pts[0].0).abs() > 1e-12);
            let fit = (pts.len() >= 2 && distinct).then(|| qmacro_core::verify::fit_slope(&pts));
            finish(g.kind, &rows, |r| !r.error.is_empty(), fit)
        }
        GridKind::Size => {
            let mut pts = Vec::new();
            for p in family_points(g) {
                for &d in &g.delta {
                    pts.push((p, d));
                }
            }
            let rows: Vec<SizeRow> = pts
                .into_par_iter()
                .map(|((m, a, x, n), d)| {
                    let mut row = SizeRow {
                        state: g.state.clone(),
                        n_modes: m,
                        alpha: a,
                        xi: x,
                        n,
                        delta: d,
                        abs_z: None,
                        c_delta: None,
                        c_delta_integer: None,
                        n_eff: None,
                        error: String::new(),
                    };
                    let r = named_from_parts(&g.state, Some(m), a, x, n)
                        .and_then(|s| named_state_converged(&s, None, tol))
                        .and_then(|(s, _)| c_delta(&s, d, tol));
                    match r {
                        Ok(r) => {
                            row.abs_z = Some(r.abs_z);
                            row.c_delta = Some(r.c_delta);
                            row.c_delta_integer = r.c_delta_integer;
                            row.n_eff = r.n_eff;
                        }
                        Err(e) => row.error = err_text(&e),
                    }
                    row
                })
                .collect();
            finish(g.kind, &rows, |r| !r.error.is_empty(), None)
        }
    }
}

fn finish<T: Serialize>(
    kind: GridKind,
    rows: &[T],
    failed: impl Fn(&T) -> bool,
    fit: Option<f64>,
) -> (Vec<u8>, SweepSummary, Vec<serde_json::Value>) {
    let csv = rows_to_csv(rows).unwrap_or_default();
    let summary = SweepSummary {
        kind,
        rows: rows.len(),
        failed_rows: rows.iter().filter(|r| failed(r)).count(),
        fitted_exponent: fit,
    };
    let json = rows.iter().map(|r| serde_json::to_value(r).expect("row serializes")).collect();
    (csv, summary, json)
}

#[derive(Serialize)]
struct SweepJson<'a> {
    summary: &'a SweepSummary,
    rows: &'a [serde_json::Value],
}

pub fn cmd_sweep(ctx: &Ctx) -> std::result::Result<(), CliError> {
    let g = ctx.cfg.grid.clone().ok_or_else(|| Error::Argument("sweep needs a grid (flags or config)".into()))?;
    let (csv, summary, json) = sweep_rows(&g, &ctx.opts(), &ctx.tol());
    let meta = Meta::new("sweep", &ctx.cfg, None);
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            emit(ctx.out(), &csv)?;
            let side = to_json(&meta, &summary);
            match ctx.out() {
                Some(p) => emit(Some(&sidecar(p, "summary.json")), &side)?,
                None => eprint!("{}", String::from_utf8_lossy(&side)),
            }
        }
        Format::Json => emit(ctx.out(), &to_json(&meta, &SweepJson { summary: &summary, rows: &json }))?,
    }
    Ok(())
}

fn sidecar(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

// ---------------------------------------------------------------------------
// plotdata

#[derive(Serialize)]
struct CurveRow {
    state: &'static str,
    alpha: f64,
    xi: f64,
    n_modes: usize,
    c_tilde: f64,
    c_tilde_printed: f64,
}

pub fn cmd_plotdata(ctx: &Ctx) -> std::result::Result<(), CliError> {
    let tol = ctx.tol();
    let p: PlotSpec = ctx.cfg.plot.clone().unwrap_or_default();
    let quoted = figure_ellipses(p.alpha, p.xi, EllipseConvention::Quoted);
    let variance = figure_ellipses(p.alpha, p.xi, EllipseConvention::Variance);
    let Some(dir) = ctx.out() else {
        let all: Vec<_> = quoted.iter().chain(&variance).cloned().collect();
        return emit(None, &rows_to_csv(&all)?);
    };
    let mut curve = Vec::new();
    for c in GaussianCat::ALL {
        for &x in &p.curve_xi {
            let r = gaussian_cat_size(c, p.alpha, x, p.curve_modes.max(1), None, false, &tol)?;
            curve.push(CurveRow {
                state: c.label(),
                alpha: p.alpha,
                xi: x,
                n_modes: r.n_modes,
                c_tilde: r.c_tilde,
                c_tilde_printed: r.c_tilde_printed,
            });
        }
    }
    emit(Some(&dir.join("ellipses_quoted.csv")), &rows_to_csv(&quoted)?)?;
    emit(Some(&dir.join("ellipses_variance.csv")), &rows_to_csv(&variance)?)?;
    emit(Some(&dir.join("c_tilde_curves.csv")), &rows_to_csv(&curve)?)?;
    emit(Some(&dir.join("meta.json")), &to_json(&Meta::new("plotdata", &ctx.cfg, None), &p))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

#[derive(Serialize)]
struct EnsembleCsvRow<'a> {
    criterion: u8,
    kind: &'a str,
    index: usize,
    seed: u64,
    lhs: f64,
    rhs: f64,
    gap: f64,
}

/// Runs the selected criteria, prints one line each, and returns whether all
/// passed.
pub fn cmd_verify(ctx: &Ctx) -> std::result::Result<bool, CliError> {
    let tol = ctx.tol();
    let seed = ctx.cfg.seed.unwrap_or(DEFAULT_SEED);
    let ids: Vec<u8> = if ctx.cfg.criteria.is_empty() { (1..=8).collect() } else { ctx.cfg.criteria.clone() };
    let mut reports: Vec<CriterionReport> = Vec::with_capacity(ids.len());
    for id in ids {
        let r = run_criterion(id, seed, &tol);
        println!("{}", r.line());
        reports.push(r);
    }
    let all = reports.iter().all(|r| r.passed);
    if let Some(dir) = ctx.out() {
        let mut rows = Vec::new();
        for r in &reports {
            for e in &r.ensemble {
                rows.push(EnsembleCsvRow {
                    criterion: r.id,
                    kind: &e.kind,
                    index: e.index,
                    seed,
                    lhs: e.lhs,
                    rhs: e.rhs,
                    gap: e.gap,
                });
            }
        }
        emit(Some(&dir.join("ensemble.csv")), &rows_to_csv(&rows)?)?;
        let trimmed: Vec<CriterionReport> =
            reports.iter().map(|r| CriterionReport { ensemble: vec![], ..r.clone() }).collect();
        let mut cfg = ctx.cfg.clone();
        cfg.seed = Some(seed);
        emit(Some(&dir.join("verify.json")), &to_json(&Meta::new("verify", &cfg, None), &trimmed))?;
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        assert!(qubit_state("plus").is_ok());
        assert!(qubit_state("nope").is_err());
        assert!(pauli("sigmay").is_ok());
        assert!(pauli("x").is_err());
    }

    #[test]
    fn gaussian_sweep_has_one_row_per_point() {
        let g = Grid {
            kind: GridKind::Gaussian,
            alpha: vec![0.5],
            xi: vec![0.0, 0.5],
            modes: vec![1, 2],
            ..Grid::default()
        };
        let (csv, summary, _) = sweep_rows(&g, &MaximizeOptions::default(), &Tolerances::default());
        assert_eq!(summary.rows, 4 * 2 * 2);
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 16);
    }

    #[test]
    fn failed_points_are_recorded_per_row() {
        let g = Grid { kind: GridKind::Nrf, state: "ecs".into(), modes: vec![2], ..Grid::default() };
        let (_, summary, rows) = sweep_rows(&g, &MaximizeOptions::default(), &Tolerances::default());
        assert_eq!(summary.failed_rows, 1);
        assert!(rows[0]["error"].as_str().unwrap().contains("--alpha"));
    }
}
