//! Branch-distinguishability size `C_δ`.
//!
//! For `|Ψ⟩ ∝ (I + U^{⊗N})|φ⟩^{⊗N}` the two branches' n-mode reduced states are
//! pure products, so the optimal success probability of telling them apart
//! from `n` modes is `½ + ½√(1 − |z|^{2n})`. The size is `N / n_eff`, where
//! `n_eff` is the fewest modes that reach success probability `1 − δ`; its
//! continuum version is `2N log|z| / log(4δ − 4δ²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{converge, suggested_dim, BranchOrder, GaussianBranchSpec, TruncationCertificate};
use crate::linalg::{c64, helstrom_probability, reduced_density, C64};
use crate::superposition::{GeneralSuperposition, SpaceKind};
use crate::tolerance::Tolerances;

const SNAP: f64 = 1e-12;

/// `½ + ½√(1 − |z|^{2n})`.
pub fn n_mode_success_probability(abs_z: f64, n: usize) -> f64 {
    let q = abs_z.min(1.0).powi(2 * n as i32);
    0.5 + 0.5 * (1.0 - q).max(0.0).sqrt()
}

/// Admissible precision window; `orthogonal` flags `z = 0`, where only
/// `δ = 0` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaWindow {
    pub lower: f64,
    pub upper: f64,
    pub orthogonal: bool,
}

/// `(½ − ½√(1 − |z|^{2N}), ½ − ½√(1 − |z|²))`.
pub fn delta_window(abs_z: f64, n_modes: usize) -> DeltaWindow {
    if abs_z == 0.0 {
        return DeltaWindow { lower: 0.0, upper: 0.0, orthogonal: true };
    }
    DeltaWindow {
        lower: 1.0 - n_mode_success_probability(abs_z, n_modes),
        upper: 1.0 - n_mode_success_probability(abs_z, 1),
        orthogonal: false,
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::Argument(format!("delta must lie in [0, 1/2), got {delta}")));
    }
    Ok(())
}

/// `⌈log(4δ − 4δ²) / (2 log|z|)⌉`, clamped below at 1.
///
/// Ratios within `1e−12` of an integer are snapped to it so that exact
/// boundary cases do not round up through floating-point noise.
pub fn n_eff(abs_z: f64, delta: f64, n_modes: usize) -> Result<usize> {
    check_delta(delta)?;
    if abs_z >= 1.0 {
        return Err(Error::Degenerate(abs_z));
    }
    if abs_z == 0.0 {
        return Ok(1);
    }
    let w = delta_window(abs_z, n_modes);
    if delta == 0.0 {
        return Err(Error::Window { delta, lower: w.lower, upper: w.upper });
    }
    let x = (4.0 * delta - 4.0 * delta * delta).ln() / (2.0 * abs_z.ln());
    let r = x.round();
    let n = if (x - r).abs() < SNAP * r.abs().max(1.0) { r } else { x.ceil() };
    let n = n.max(1.0);
    if n > n_modes as f64 {
        return Err(Error::Window { delta, lower: w.lower, upper: w.upper });
    }
    Ok(n as usize)
}

/// Smallest `n ≤ N` with `½ + ½√(1 − |z|^{2n}) ≥ 1 − δ`, by direct scan.
pub fn n_eff_scan(abs_z: f64, delta: f64, n_modes: usize) -> Option<usize> {
    (1..=n_modes).find(|&n| n_mode_success_probability(abs_z, n) >= 1.0 - delta)
}

/// Helstrom probabilities of the explicit n-mode reduced branch states, for
/// `n = 1..=N`, from the realized branch vectors.
pub fn rdm_success_probabilities(state: &GeneralSuperposition, tol: &Tolerances) -> Result<Vec<f64>> {
    let (a, b) = state.branch_states(tol)?;
    (1..=state.n_modes())
        .map(|n| {
            let keep: Vec<usize> = (0..n).collect();
            let ra = reduced_density(&a, &keep)?;
            let rb = reduced_density(&b, &keep)?;
            helstrom_probability(&ra, &rb, tol)
        })
        .collect()
}

/// Which definition produced `c_delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeConvention {
    /// `2N log|z| / log(4δ − 4δ²)`.
    Continuum,
    /// Orthogonal branches at `δ = 0`: the elementary particle count.
    OrthogonalBranches,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n_modes: usize,
    pub abs_z: f64,
    pub delta: f64,
    /// Canonical value.
    pub c_delta: f64,
    /// `N / n_eff`.
    pub c_delta_integer: Option<f64>,
    /// `−2N log|z|`, independent of δ.
    pub c_tilde: Option<f64>,
    pub n_eff: Option<usize>,
    pub delta_window: DeltaWindow,
    pub p_succ_by_n: Vec<(usize, f64)>,
    pub convention: SizeConvention,
    pub convention_note: String,
    /// Largest gap between the closed-form and explicit reduced-state success
    /// probabilities, when the branches are small enough to realize.
    pub oracle_deviation: Option<f64>,
}

/// Total dimension up to which `c_delta` also runs the explicit oracle.
pub const ORACLE_DIM: usize = 1024;

/// `2N log|z| / log(4δ − 4δ²)`.
pub fn c_delta_continuum(abs_z: f64, delta: f64, n_modes: usize) -> f64 {
    2.0 * n_modes as f64 * abs_z.ln() / (4.0 * delta - 4.0 * delta * delta).ln()
}

/// The branch-distinguishability size of `state` at precision `delta`.
pub fn c_delta(state: &GeneralSuperposition, delta: f64, tol: &Tolerances) -> Result<SizeReport> {
    check_delta(delta)?;
    let n = state.n_modes();
    let abs_z = state.z().norm();
    let window = delta_window(abs_z, n);
    let p_succ_by_n: Vec<(usize, f64)> = (1..=n).map(|k| (k, n_mode_success_probability(abs_z, k))).collect();
    let oracle_deviation = match state.total_dim() {
        Some(d) if d <= ORACLE_DIM.min(tol.max_dim) => {
            let explicit = rdm_success_probabilities(state, tol)?;
            Some(explicit.iter().zip(&p_succ_by_n).map(|(e, (_, p))| (e - p).abs()).fold(0.0, f64::max))
        }
        _ => None,
    };
    if abs_z == 0.0 {
        if delta > 0.0 {
            return Err(Error::Convention(delta));
        }
        return Ok(SizeReport {
            n_modes: n,
            abs_z,
            delta,
            c_delta: elementary_particle_count(state),
            c_delta_integer: Some(n as f64),
            c_tilde: None,
            n_eff: Some(1),
            delta_window: window,
            p_succ_by_n,
            convention: SizeConvention::OrthogonalBranches,
            convention_note: "orthogonal branches: a single mode already distinguishes them perfectly, so the size is \
                              the elementary particle count (mode count for spins, mean total excitation for modes)"
                .into(),
            oracle_deviation,
        });
    }
    let ne = n_eff(abs_z, delta, n)?;
    Ok(SizeReport {
        n_modes: n,
        abs_z,
        delta,
        c_delta: c_delta_continuum(abs_z, delta, n),
        c_delta_integer: Some(n as f64 / ne as f64),
        c_tilde: Some(-2.0 * n as f64 * abs_z.ln()),
        n_eff: Some(ne),
        delta_window: window,
        p_succ_by_n,
        convention: SizeConvention::Continuum,
        convention_note: "c_delta is the continuum value 2N log|z| / log(4δ-4δ²); c_delta_integer is N / n_eff".into(),
        oracle_deviation,
    })
}

/// Mode count for spins; mean total excitation `⟨Ψ|Σ n̂_i|Ψ⟩` for bosonic modes.
pub fn elementary_particle_count(state: &GeneralSuperposition) -> f64 {
    match state.kind() {
        SpaceKind::Spin => state.n_modes() as f64,
        SpaceKind::Fock => {
            let d = state.local_dim();
            let number =
                crate::linalg::CMat::from_diagonal(&crate::linalg::CVec::from_fn(d, |k, _| c64(k as f64, 0.0)));
            state.moments().mean(&number).re
        }
    }
}

/// The four squeezed/displaced two-branch families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianCat {
    Psi0,
    Psi1,
    Psi2Plus,
    Psi2Minus,
}

impl GaussianCat {
    pub const ALL: [GaussianCat; 4] =
        [GaussianCat::Psi0, GaussianCat::Psi1, GaussianCat::Psi2Plus, GaussianCat::Psi2Minus];

    pub fn label(&self) -> &'static str {
        match self {
            GaussianCat::Psi0 => "psi0",
            GaussianCat::Psi1 => "psi1",
            GaussianCat::Psi2Plus => "psi2plus",
            GaussianCat::Psi2Minus => "psi2minus",
        }
    }

    /// Canonical single-mode unitary as `S(s) D(β)` acting on the vacuum.
    pub fn canonical(&self, alpha: f64, xi: f64) -> (f64, f64) {
        match self {
            GaussianCat::Psi0 => (2.0 * xi, -alpha * (1.0 + (2.0 * xi).exp())),
            GaussianCat::Psi1 => (-2.0 * xi, -alpha * (1.0 + (-2.0 * xi).exp())),
            GaussianCat::Psi2Plus => (0.0, -2.0 * alpha * xi.exp()),
            GaussianCat::Psi2Minus => (-2.0 * xi, -2.0 * alpha * (-xi).exp()),
        }
    }

    /// The two branch preparations applied to the vacuum.
    pub fn branches(&self, alpha: f64, xi: f64) -> (GaussianBranchSpec, GaussianBranchSpec) {
        let spec = |x: f64, a: f64, order| GaussianBranchSpec { xi: c64(x, 0.0), alpha: c64(a, 0.0), order };
        use BranchOrder::*;
        match self {
            GaussianCat::Psi0 => (spec(-xi, alpha, DisplaceThenSqueeze), spec(xi, -alpha, DisplaceThenSqueeze)),
            GaussianCat::Psi1 => (spec(xi, alpha, DisplaceThenSqueeze), spec(-xi, -alpha, DisplaceThenSqueeze)),
            GaussianCat::Psi2Plus => (spec(xi, alpha, SqueezeThenDisplace), spec(xi, -alpha, SqueezeThenDisplace)),
            GaussianCat::Psi2Minus => (spec(xi, alpha, SqueezeThenDisplace), spec(-xi, -alpha, SqueezeThenDisplace)),
        }
    }
}

/// `⟨0| S(ζ) D(β) |0⟩ = (cosh r)^{−1/2} e^{−|β|²/2} exp(e^{−iθ'} tanh r β²/2)`
/// with `ζ = r e^{iθ}`, `θ' = θ`.
pub fn vacuum_squeeze_displace_overlap(zeta: C64, beta: C64) -> C64 {
    let r = zeta.norm();
    let t = C64::from_polar(r.tanh(), -zeta.arg());
    let pref = r.cosh().powf(-0.5) * (-0.5 * beta.norm_sqr()).exp();
    (t * beta * beta * 0.5).exp() * pref
}

/// First-principles `|z|` from the canonical form.
pub fn gaussian_abs_z(cat: GaussianCat, alpha: f64, xi: f64) -> f64 {
    let (s, beta) = cat.canonical(alpha, xi);
    vacuum_squeeze_displace_overlap(c64(s, 0.0), c64(beta, 0.0)).norm()
}

/// `−2N log|z|` from the canonical form, evaluated in log space.
pub fn gaussian_c_tilde(cat: GaussianCat, alpha: f64, xi: f64, n_modes: usize) -> f64 {
    let (s, beta) = cat.canonical(alpha, xi);
    let log_abs_z = -0.5 * log_cosh(s) - 0.5 * beta * beta + 0.5 * s.tanh() * beta * beta;
    -2.0 * n_modes as f64 * log_abs_z
}

/// The size expressions as printed for the four families.
pub fn gaussian_c_tilde_printed(cat: GaussianCat, alpha: f64, xi: f64, n_modes: usize) -> f64 {
    let n = n_modes as f64;
    let (a2, t, lc) = (alpha * alpha, (2.0 * xi).tanh(), log_cosh(2.0 * xi));
    match cat {
        GaussianCat::Psi0 => n * (a2 * (1.0 + (2.0 * xi).exp()).powi(2) * (1.0 + t) - lc),
        GaussianCat::Psi1 => n * (a2 * (1.0 + (-2.0 * xi).exp()).powi(2) * (1.0 - t) - lc),
        GaussianCat::Psi2Plus => n * a2 * (2.0 * xi).exp(),
        GaussianCat::Psi2Minus => n * (4.0 * a2 * (-2.0 * xi).exp() * (1.0 - t) - lc),
    }
}

/// `−2 log X` with `A² = 2 + 2X` read off the printed normalization constants.
pub fn gaussian_c_tilde_from_normalization(cat: GaussianCat, alpha: f64, xi: f64, n_modes: usize) -> f64 {
    let n = n_modes as f64;
    let (a2, t, lc) = (alpha * alpha, (2.0 * xi).tanh(), log_cosh(2.0 * xi));
    match cat {
        GaussianCat::Psi0 => n * lc + n * a2 * (1.0 + (-2.0 * xi).exp()).powi(2) * (1.0 + t),
        GaussianCat::Psi1 => n * lc + n * a2 * (1.0 + (2.0 * xi).exp()).powi(2) * (1.0 - t),
        GaussianCat::Psi2Plus => 4.0 * n * a2 * (2.0 * xi).exp(),
        GaussianCat::Psi2Minus => -n * lc + 4.0 * n * a2 * (-2.0 * xi).exp() * (1.0 - t),
    }
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `|⟨B₁0|B₂0⟩|` from the two branch preparations on a truncated space,
/// with the truncation doubled until stable.
pub fn gaussian_abs_z_oracle(
    cat: GaussianCat,
    alpha: f64,
    xi: f64,
    tol: &Tolerances,
) -> Result<(f64, TruncationCertificate)> {
    let (b1, b2) = cat.branches(alpha, xi);
    let nbar = 4.0 * alpha * alpha * (2.0 * xi.abs()).exp() + (2.0 * xi).sinh().powi(2);
    let (vals, cert) = converge(suggested_dim(nbar), tol, |f| {
        let s1 = f.gaussian_branch(&b1, tol)?;
        let s2 = f.gaussian_branch(&b2, tol)?;
        Ok(vec![s1.inner(&s2).norm()])
    })?;
    Ok((vals[0], cert))
}

/// Computed-versus-printed comparison for one Gaussian family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianCatReport {
    pub state: GaussianCat,
    pub alpha: f64,
    pub xi: f64,
    pub n_modes: usize,
    pub abs_z: f64,
    pub abs_z_oracle: Option<f64>,
    pub oracle_rel_deviation: Option<f64>,
    pub oracle_certificate: Option<TruncationCertificate>,
    /// `−2N log|z|` from first principles.
    pub c_tilde: f64,
    /// The printed closed-form expression.
    pub c_tilde_printed: f64,
    pub printed_over_computed: f64,
    /// Size implied by the printed normalization constant.
    pub c_tilde_from_normalization: f64,
    pub normalization_over_computed: f64,
    pub delta: Option<f64>,
    pub c_delta: Option<f64>,
}

/// Computed size, printed expressions, and (optionally) the Fock oracle.
pub fn gaussian_cat_size(
    cat: GaussianCat,
    alpha: f64,
    xi: f64,
    n_modes: usize,
    delta: Option<f64>,
    with_oracle: bool,
    tol: &Tolerances,
) -> Result<GaussianCatReport> {
    if !(alpha.is_finite() && xi.is_finite()) || n_modes == 0 {
        return Err(Error::Argument("finite α, ξ and positive N required".into()));
    }
    if let Some(d) = delta {
        check_delta(d)?;
        if d == 0.0 {
            return Err(Error::Window { delta: d, lower: 0.0, upper: 0.0 });
        }
    }
    let abs_z = gaussian_abs_z(cat, alpha, xi);
    let c_tilde = gaussian_c_tilde(cat, alpha, xi, n_modes);
    let printed = gaussian_c_tilde_printed(cat, alpha, xi, n_modes);
    let from_norm = gaussian_c_tilde_from_normalization(cat, alpha, xi, n_modes);
    let (abs_z_oracle, oracle_rel_deviation, oracle_certificate) = if with_oracle {
        let (zo, cert) = gaussian_abs_z_oracle(cat, alpha, xi, tol)?;
        (Some(zo), Some(((zo / abs_z).powi(n_modes as i32) - 1.0).abs()), Some(cert))
    } else {
        (None, None, None)
    };
    Ok(GaussianCatReport {
        state: cat,
        alpha,
        xi,
        n_modes,
        abs_z,
        abs_z_oracle,
        oracle_rel_deviation,
        oracle_certificate,
        c_tilde,
        c_tilde_printed: printed,
        printed_over_computed: printed / c_tilde,
        c_tilde_from_normalization: from_norm,
        normalization_over_computed: from_norm / c_tilde,
        delta,
        c_delta: delta.map(|d| -c_tilde / (4.0 * d - 4.0 * d * d).ln()),
    })
}

/// One quadrature ellipse of a branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseRecord {
    pub label: String,
    pub cx: f64,
    pub cp: f64,
    pub semi_u: f64,
    pub semi_v: f64,
    pub convention: String,
}

/// Axis convention for the exported ellipses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EllipseConvention {
    /// Centers at the displacement parameter of the figure's `U`, axes
    /// `e^{±4ξ}`, vacuum radius ½.
    Quoted,
    /// Centers at `(⟨x⟩, ⟨p⟩)` of the actual branch and semi-axes equal to the
    /// quadrature variances under `x^{(θ)}` (vacuum ½).
    Variance,
}

impl EllipseConvention {
    pub fn tag(&self) -> &'static str {
        match self {
            EllipseConvention::Quoted => "quoted",
            EllipseConvention::Variance => "variance",
        }
    }
}

fn panel(cat: GaussianCat) -> &'static str {
    match cat {
        GaussianCat::Psi0 => "a",
        GaussianCat::Psi1 => "b",
        GaussianCat::Psi2Plus => "c",
        GaussianCat::Psi2Minus => "d",
    }
}

/// Two ellipses (vacuum branch, displaced branch) for one figure panel.
pub fn ellipse_data(cat: GaussianCat, alpha: f64, xi: f64, convention: EllipseConvention) -> Vec<EllipseRecord> {
    let tag = convention.tag().to_string();
    let p = panel(cat);
    let vacuum = EllipseRecord {
        label: format!("{p}_vacuum"),
        cx: 0.0,
        cp: 0.0,
        semi_u: 0.5,
        semi_v: 0.5,
        convention: tag.clone(),
    };
    let branch = match convention {
        EllipseConvention::Quoted => {
            // U exactly as labeled in the figure: S(s) D(β), center β.
            let (s, beta) = match cat {
                GaussianCat::Psi0 => (2.0 * xi, -alpha * (1.0 + (2.0 * xi).exp())),
                GaussianCat::Psi1 => (-2.0 * xi, -alpha * (1.0 + (2.0 * xi).exp())),
                GaussianCat::Psi2Plus => (0.0, -2.0 * alpha * xi.exp()),
                GaussianCat::Psi2Minus => (-2.0 * xi, -2.0 * alpha * (-xi).exp()),
            };
            let (u, v) = if s == 0.0 {
                (0.5, 0.5)
            } else if s > 0.0 {
                ((-4.0 * xi.abs()).exp(), (4.0 * xi.abs()).exp())
            } else {
                ((4.0 * xi.abs()).exp(), (-4.0 * xi.abs()).exp())
            };
            EllipseRecord { label: format!("{p}_displaced"), cx: beta, cp: 0.0, semi_u: u, semi_v: v, convention: tag }
        }
        EllipseConvention::Variance => {
            // S(s) D(β)|0⟩ = D(β e^{−s}) S(s)|0⟩
            let (s, beta) = cat.canonical(alpha, xi);
            let center = beta * (-s).exp();
            EllipseRecord {
                label: format!("{p}_displaced"),
                cx: 2f64.sqrt() * center,
                cp: 0.0,
                semi_u: 0.5 * (-2.0 * s).exp(),
                semi_v: 0.5 * (2.0 * s).exp(),
                convention: tag,
            }
        }
    };
    vec![vacuum, branch]
}

/// All four panels, two records each.
pub fn figure_ellipses(alpha: f64, xi: f64, convention: EllipseConvention) -> Vec<EllipseRecord> {
    GaussianCat::ALL.iter().flat_map(|&c| ellipse_data(c, alpha, xi, convention)).collect()
}
