//! Distinguishability times and the rate bounds that tie them to the sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{nrf_measure, qfi, AlgebraBasis, MaximizeOptions};
use crate::linalg::{
    apply_spectral, eigh, trace_norm_hermitian, CMat, CVec, DensityMatrix, HermitianEigen, HermitianObservable,
    PureState, C64,
};
use crate::superposition::GeneralSuperposition;
use crate::tolerance::Tolerances;

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::Argument(format!("delta must lie in [0, 1/2], got {delta}")));
    }
    Ok(())
}

fn check_dims(rho: &DensityMatrix, h: &HermitianObservable) -> Result<()> {
    if rho.dim() != h.dim() {
        return Err(Error::Dimension(format!("state dim {} vs generator dim {}", rho.dim(), h.dim())));
    }
    Ok(())
}

/// Spectral cache for `ρ(t) = e^{−iHt} ρ e^{iHt}`.
#[derive(Debug, Clone)]
pub struct Evolver {
    eig: HermitianEigen,
}

impl Evolver {
    pub fn new(h: &CMat) -> Result<Self> {
        Ok(Self { eig: eigh(h)? })
    }

    pub fn unitary(&self, t: f64) -> CMat {
        apply_spectral(&self.eig, |l| C64::from_polar(1.0, -l * t))
    }

    pub fn evolve(&self, rho: &CMat, t: f64) -> CMat {
        let u = self.unitary(t);
        &u * rho * u.adjoint()
    }

    /// `E_max − E_min`.
    pub fn spread(&self) -> f64 {
        self.eig.values.last().copied().unwrap_or(0.0) - self.eig.values.first().copied().unwrap_or(0.0)
    }

    pub fn min_energy(&self) -> f64 {
        self.eig.values.first().copied().unwrap_or(0.0)
    }
}

/// `½ + ¼‖A − B‖₁` on raw Hermitian matrices.
fn p_succ(a: &CMat, b: &CMat) -> Result<f64> {
    Ok((0.5 + 0.25 * trace_norm_hermitian(&(a - b))?).min(1.0))
}

/// `2 arcsin(1 − 2δ) / √F(ρ, H)`; `δ = 0` gives the `π/√F` limit.
pub fn tau_dist(rho: &DensityMatrix, h: &HermitianObservable, delta: f64, tol: &Tolerances) -> Result<f64> {
    check_delta(delta)?;
    check_dims(rho, h)?;
    let f = qfi(rho, h, tol)?;
    if f <= tol.num * tol.num {
        return Err(Error::Stationary);
    }
    Ok(2.0 * (1.0 - 2.0 * delta).asin() / f.sqrt())
}

/// Mean-energy bound with its validity window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlBound {
    pub tau: f64,
    /// `tr(ρ(H − E_min))`.
    pub mean_energy: f64,
    /// `π / (E_max − E_min)`.
    pub window: f64,
}

/// `π(1 − √(1 − (1−2δ)²)) / (2 tr(ρ(H − E_min)))`.
///
/// The minimum over purifications is `tr(ρH)` for every purification, so no
/// search is needed.
pub fn tau_dist_ml(rho: &DensityMatrix, h: &HermitianObservable, delta: f64, tol: &Tolerances) -> Result<MlBound> {
    check_delta(delta)?;
    check_dims(rho, h)?;
    let ev = Evolver::new(h.matrix())?;
    let mean_energy = rho.expectation(h.matrix()).re - ev.min_energy();
    if mean_energy <= tol.num {
        return Err(Error::Stationary);
    }
    let s = 1.0 - 2.0 * delta;
    let tau = std::f64::consts::PI * (1.0 - (1.0 - s * s).max(0.0).sqrt()) / (2.0 * mean_energy);
    let spread = ev.spread();
    let window = if spread > 0.0 { std::f64::consts::PI / spread } else { f64::INFINITY };
    Ok(MlBound { tau, mean_energy, window })
}

/// First `t ∈ (0, t_max]` with `p_succ(ρ, ρ(t)) ≥ 1 − δ`.
///
/// Steps by `(target − p)/L` with `L = (E_max − E_min)/4`, a bound on
/// `|dp/dt|`, so no crossing is skipped; the bracket is then bisected.
pub fn crossing_time(rho: &DensityMatrix, h: &HermitianObservable, delta: f64, t_max: f64) -> Result<Option<f64>> {
    check_delta(delta)?;
    check_dims(rho, h)?;
    let ev = Evolver::new(h.matrix())?;
    let lip = ev.spread() / 4.0;
    if lip <= 0.0 {
        return Ok(None);
    }
    // a target equal to the supremum of p is met only asymptotically
    let target = 1.0 - delta - 1e-12;
    let r0 = rho.matrix();
    let p = |t: f64| p_succ(&ev.evolve(r0, t), r0);
    let min_step = 1e-12 / lip;
    let (mut lo, mut t, mut pv) = (0.0, 0.0, 0.5);
    let mut iters = 0usize;
    while pv < target {
        if t >= t_max {
            return Ok(None);
        }
        iters += 1;
        if iters > 2_000_000 {
            return Err(Error::Numerical("crossing search did not terminate".into()));
        }
        lo = t;
        t = (t + ((target - pv) / lip).max(min_step)).min(t_max);
        pv = p(t)?;
    }
    let mut hi = t;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// `(1 − ¼‖ρ(t) − ρ‖₁²) − cos²(√F t / 2)`.
pub fn qfi_variance_gap(rho: &DensityMatrix, h: &HermitianObservable, t: f64, tol: &Tolerances) -> Result<f64> {
    check_dims(rho, h)?;
    if t < 0.0 {
        return Err(Error::Argument("t must be nonnegative".into()));
    }
    let f = qfi(rho, h, tol)?;
    let ev = Evolver::new(h.matrix())?;
    let d = trace_norm_hermitian(&(ev.evolve(rho.matrix(), t) - rho.matrix()))?;
    Ok((1.0 - 0.25 * d * d) - (0.5 * f.sqrt() * t).cos().powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedLimitReport {
    pub delta: f64,
    pub qfi: f64,
    pub tau_dist: f64,
    pub tau_dist_ml: Option<f64>,
    pub ml_window: Option<f64>,
    /// `None` when `p_succ` never reaches `1 − δ` in the searched horizon.
    pub actual_crossing_time: Option<f64>,
    pub bound_satisfied: bool,
    /// Crossing time minus the larger applicable bound.
    pub gap: Option<f64>,
}

/// Both bounds and the measured crossing time. The mean-energy bound is
/// applied only when the crossing falls inside its window.
pub fn speed_limit_report(
    rho: &DensityMatrix,
    h: &HermitianObservable,
    delta: f64,
    tol: &Tolerances,
) -> Result<SpeedLimitReport> {
    let f = qfi(rho, h, tol)?;
    let td = tau_dist(rho, h, delta, tol)?;
    let ml = tau_dist_ml(rho, h, delta, tol).ok();
    let horizon = (4.0 * td).max(ml.map(|m| m.window).unwrap_or(0.0)).max(1e-12);
    let cross = crossing_time(rho, h, delta, horizon)?;
    let (satisfied, gap) = match cross {
        Some(tc) => {
            let mut bound = td;
            if let Some(m) = ml {
                if tc <= m.window {
                    bound = bound.max(m.tau);
                }
            }
            (tc >= bound - tol.num, Some(tc - bound))
        }
        None => (true, None),
    };
    Ok(SpeedLimitReport {
        delta,
        qfi: f,
        tau_dist: td,
        tau_dist_ml: ml.map(|m| m.tau),
        ml_window: ml.map(|m| m.window),
        actual_crossing_time: cross,
        bound_satisfied: satisfied,
        gap,
    })
}

/// `|⟨φ| U₁†(t) U₂(t) |φ⟩|²` with `U_k(t) = e^{−iH_k t}`.
pub fn loschmidt_echo(phi: &PureState, h1: &CMat, h2: &CMat, t: f64) -> Result<f64> {
    let u1 = Evolver::new(h1)?.unitary(t);
    let u2 = Evolver::new(h2)?.unitary(t);
    let v = phi.amplitudes();
    Ok((u1 * v).dotc(&(u2 * v)).norm_sqr())
}

// ---------------------------------------------------------------------------
// Finite differences

/// A derivative estimate and the Richardson error estimate attached to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Richardson table on step halving for a stencil with `O(h²)` error.
/// Returns the level whose successive-difference estimate is smallest.
fn richardson(stencil: impl Fn(f64) -> Result<f64>, h0: f64, levels: usize) -> Result<Derivative> {
    let mut prev: Option<f64> = None;
    let mut prev_r: Option<f64> = None;
    let mut best = Derivative { value: f64::NAN, error: f64::INFINITY };
    let mut h = h0;
    for _ in 0..levels {
        let d = stencil(h)?;
        if let Some(p) = prev {
            let r = (4.0 * d - p) / 3.0;
            if let Some(pr) = prev_r {
                let e = (r - pr).abs();
                if e < best.error {
                    best = Derivative { value: r, error: e };
                }
            }
            prev_r = Some(r);
        }
        prev = Some(d);
        h *= 0.5;
    }
    if !best.value.is_finite() {
        return Err(Error::Stencil("no finite extrapolation".into()));
    }
    if best.error > 1e-4 * best.value.abs().max(1.0) {
        return Err(Error::Stencil(format!("Richardson error {:.3e} too large", best.error)));
    }
    Ok(best)
}

/// `1 − |⟨φ|e^{−iHt}|φ⟩|² = Σ_{jk} w_j w_k 2 sin²((λ_j − λ_k)t/2)`, free of
/// cancellation at small `t`.
fn one_minus_echo(weights: &[f64], lam: &[f64], t: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..lam.len() {
        for k in (j + 1)..lam.len() {
            s += 4.0 * weights[j] * weights[k] * (0.5 * (lam[j] - lam[k]) * t).sin().powi(2);
        }
    }
    s
}

fn spectral_weights(phi: &PureState, h: &CMat) -> Result<(Vec<f64>, Vec<f64>)> {
    let eig = eigh(h)?;
    let c = eig.vectors.adjoint() * phi.amplitudes();
    Ok((c.iter().map(|x| x.norm_sqr()).collect(), eig.values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBoundCheck {
    /// `√(−log(4δ−4δ²)) · d√C_δ/dt |₀₊ / √N`.
    pub lhs: f64,
    pub stencil_error: f64,
    /// `σ_H(φ)`.
    pub rhs: f64,
    pub satisfied: bool,
}

/// Rate bound on `C_δ` for `U(t) = e^{−iHt}` at `t = 0⁺`, from a one-sided
/// three-point stencil with Richardson extrapolation.
pub fn rate_bound_check(phi: &PureState, h: &CMat, delta: f64, n_modes: usize) -> Result<RateBoundCheck> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Argument(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if n_modes == 0 {
        return Err(Error::Argument("mode count must be positive".into()));
    }
    let (w, lam) = spectral_weights(phi, h)?;
    let mean: f64 = w.iter().zip(&lam).map(|(a, l)| a * l).sum();
    let rhs = w.iter().zip(&lam).map(|(a, l)| a * (l - mean).powi(2)).sum::<f64>().max(0.0).sqrt();
    let spread = lam.last().unwrap() - lam.first().unwrap();
    if rhs <= 1e-14 * spread.max(1.0) {
        return Ok(RateBoundCheck { lhs: 0.0, stencil_error: 0.0, rhs, satisfied: true });
    }
    let log_d = (4.0 * delta - 4.0 * delta * delta).ln();
    let nf = n_modes as f64;
    let g = |t: f64| -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let log_abs_z = 0.5 * (-one_minus_echo(&w, &lam, t)).ln_1p();
        let c = 2.0 * nf * log_abs_z / log_d;
        (-log_d).sqrt() * c.max(0.0).sqrt() / nf.sqrt()
    };
    let stencil = |hh: f64| Ok((-3.0 * g(0.0) + 4.0 * g(hh) - g(2.0 * hh)) / (2.0 * hh));
    let d = richardson(stencil, 0.05 / spread, 8)?;
    Ok(RateBoundCheck { lhs: d.value, stencil_error: d.error, rhs, satisfied: d.value <= rhs + d.error + 1e-12 * rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleCheck {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub window: f64,
    pub satisfied: bool,
}

/// `|‖ρA − ρB‖₁ − ‖ρA(t) − ρB(t)‖₁| ≤ 2 Σ_k sin(√F_k t / 2)` for
/// `t ≤ π / max_k √F_k`, where the right side is increasing.
pub fn reverse_triangle_check(
    rho_a: &DensityMatrix,
    h_a: &HermitianObservable,
    rho_b: &DensityMatrix,
    h_b: &HermitianObservable,
    t: f64,
    tol: &Tolerances,
) -> Result<TriangleCheck> {
    check_dims(rho_a, h_a)?;
    check_dims(rho_b, h_b)?;
    let fa = qfi(rho_a, h_a, tol)?.sqrt();
    let fb = qfi(rho_b, h_b, tol)?.sqrt();
    let top = fa.max(fb);
    let window = if top > 0.0 { std::f64::consts::PI / top } else { f64::INFINITY };
    if !(0.0..=window).contains(&t) {
        return Err(Error::TimeWindow { t, upper: window });
    }
    let ea = Evolver::new(h_a.matrix())?;
    let eb = Evolver::new(h_b.matrix())?;
    let d0 = trace_norm_hermitian(&(rho_a.matrix() - rho_b.matrix()))?;
    let dt = trace_norm_hermitian(&(ea.evolve(rho_a.matrix(), t) - eb.evolve(rho_b.matrix(), t)))?;
    let lhs = (d0 - dt).abs();
    let rhs = 2.0 * ((0.5 * fa * t).sin() + (0.5 * fb * t).sin());
    Ok(TriangleCheck { t, lhs, rhs, window, satisfied: lhs <= rhs + tol.num })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBoundCheck {
    /// `|dp/dt|` at `t = 0`.
    pub derivative: f64,
    pub stencil_error: f64,
    /// `¼(√F_A + √F_B)`.
    pub fisher_rhs: f64,
    /// `½(σ_A + σ_B)`.
    pub variance_rhs: f64,
    pub satisfied: bool,
    /// `|fisher_rhs − variance_rhs|` when both inputs are pure.
    pub pure_equality_deviation: Option<f64>,
}

/// `|dp/dt|₀ ≤ ¼(√F_A + √F_B) ≤ ½(σ_A + σ_B)` for
/// `p(t) = p_succ(ρA(t), ρB(t))`, from a Richardson-extrapolated central
/// difference.
pub fn derivative_bound_check(
    rho_a: &DensityMatrix,
    h_a: &HermitianObservable,
    rho_b: &DensityMatrix,
    h_b: &HermitianObservable,
    tol: &Tolerances,
) -> Result<DerivativeBoundCheck> {
    check_dims(rho_a, h_a)?;
    check_dims(rho_b, h_b)?;
    let d0 = trace_norm_hermitian(&(rho_a.matrix() - rho_b.matrix()))?;
    if d0 <= tol.num {
        return Err(Error::Argument("the two states coincide".into()));
    }
    let ea = Evolver::new(h_a.matrix())?;
    let eb = Evolver::new(h_b.matrix())?;
    let p = |t: f64| p_succ(&ea.evolve(rho_a.matrix(), t), &eb.evolve(rho_b.matrix(), t));
    let spread = ea.spread().max(eb.spread());
    let (derivative, stencil_error) = if spread == 0.0 {
        (0.0, 0.0)
    } else {
        let d = richardson(|hh| Ok((p(hh)? - p(-hh)?) / (2.0 * hh)), 0.02 / spread, 7)?;
        (d.value.abs(), d.error)
    };
    let fa = qfi(rho_a, h_a, tol)?.sqrt();
    let fb = qfi(rho_b, h_b, tol)?.sqrt();
    let var = |r: &DensityMatrix, h: &CMat| {
        let m = r.expectation(h).re;
        (r.expectation(&(h * h)).re - m * m).max(0.0).sqrt()
    };
    let fisher_rhs = 0.25 * (fa + fb);
    let variance_rhs = 0.5 * (var(rho_a, h_a.matrix()) + var(rho_b, h_b.matrix()));
    let pure = |r: &DensityMatrix| (r.purity() - 1.0).abs() < tol.psd;
    let pure_equality_deviation = (pure(rho_a) && pure(rho_b)).then(|| (fisher_rhs - variance_rhs).abs());
    let slack = stencil_error + tol.num;
    Ok(DerivativeBoundCheck {
        derivative,
        stencil_error,
        fisher_rhs,
        variance_rhs,
        satisfied: derivative <= fisher_rhs + slack && fisher_rhs <= variance_rhs + tol.num,
        pure_equality_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FubiniStudyRatio {
    /// `(dt, (2p−1)² / (σ² dt²))`.
    pub samples: Vec<(f64, f64)>,
    pub limit: f64,
    pub limit_error: f64,
    /// `limit` expressed against `4σ²dt²`.
    pub ratio_to_four_sigma_sq: f64,
}

/// `(2p_succ(dt) − 1)² / (σ_H² dt²)` along `dts`, extrapolated to `dt → 0`
/// by Neville interpolation in `dt²`.
pub fn fubini_study_ratio(phi: &PureState, h: &CMat, dts: &[f64]) -> Result<FubiniStudyRatio> {
    if dts.len() < 2 || dts.windows(2).any(|w| w[1] >= w[0]) || dts.iter().any(|&d| d <= 0.0) {
        return Err(Error::Argument("dt sequence must be positive and strictly decreasing".into()));
    }
    let (w, lam) = spectral_weights(phi, h)?;
    let mean: f64 = w.iter().zip(&lam).map(|(a, l)| a * l).sum();
    let var: f64 = w.iter().zip(&lam).map(|(a, l)| a * (l - mean).powi(2)).sum();
    if var <= 1e-28 {
        return Err(Error::Stationary);
    }
    let samples: Vec<(f64, f64)> = dts.iter().map(|&dt| (dt, one_minus_echo(&w, &lam, dt) / (var * dt * dt))).collect();
    let xs: Vec<f64> = dts.iter().map(|d| d * d).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let m = xs.len();
    let take = m.min(4);
    let limit = neville_at_zero(&xs[m - take..], &ys[m - take..]);
    let coarser = neville_at_zero(&xs[m - take..m - 1], &ys[m - take..m - 1]);
    Ok(FubiniStudyRatio { samples, limit, limit_error: (limit - coarser).abs(), ratio_to_four_sigma_sq: limit / 4.0 })
}

fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRatio {
    pub delta: f64,
    /// `min_H τ_dist` for `|Ψ⟩`.
    pub tau_superposition: f64,
    /// `min_H τ_dist` for each branch.
    pub tau_branches: [f64; 2],
    /// `(τ(Φ) / τ(Ψ))²` with `Φ` the first branch.
    pub literal: f64,
    /// Same with the branch QFI averaged before forming the time.
    pub branch_mean: f64,
    pub nrf: f64,
}

/// Time-ratio form of `N^rF`, with each minimal time taken over the same
/// family as [`nrf_measure`].
pub fn nrf_time_ratio(
    state: &GeneralSuperposition,
    basis: &AlgebraBasis,
    delta: f64,
    opts: &MaximizeOptions,
) -> Result<TimeRatio> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Argument(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    let r = nrf_measure(state, basis, opts)?;
    let n = state.n_modes() as f64;
    let num = 2.0 * (1.0 - 2.0 * delta).asin();
    let tau = |nf: f64| -> Result<f64> {
        let f = 4.0 * n * nf;
        if f <= 0.0 {
            return Err(Error::Stationary);
        }
        Ok(num / f.sqrt())
    };
    let ts = tau(r.nf_superposition)?;
    let t1 = tau(r.nf_branches[0])?;
    let t2 = tau(r.nf_branches[1])?;
    let tm = tau(r.nf_branch_mean)?;
    Ok(TimeRatio {
        delta,
        tau_superposition: ts,
        tau_branches: [t1, t2],
        literal: (t1 / ts).powi(2),
        branch_mean: (tm / ts).powi(2),
        nrf: r.nrf,
    })
}

/// Evolves a pure state, for callers that need `|φ(t)⟩`.
pub fn evolve_pure(phi: &PureState, h: &CMat, t: f64) -> Result<PureState> {
    let v: CVec = Evolver::new(h)?.unitary(t) * phi.amplitudes();
    PureState::normalized(v, phi.dims().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::AlgebraBasis;
    use crate::linalg::{c64, ONE, ZERO};
    use crate::superposition::{named_state, NamedState};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn plus() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::normalized(CVec::from_vec(vec![c64(h, 0.0), c64(h, 0.0)]), vec![2]).unwrap()
    }

    fn sz() -> CMat {
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    fn sx() -> CMat {
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    #[test]
    fn tau_dist_examples() {
        let t = tol();
        let rho = plus().to_density();
        let h = HermitianObservable::single_mode(sz(), &t).unwrap();
        assert!((tau_dist(&rho, &h, 0.0, &t).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(tau_dist(&rho, &h, 0.5, &t).unwrap(), 0.0);
        let b = tau_dist(&rho, &h, 0.1, &t).unwrap();
        assert!((b - 0.8f64.asin()).abs() < 1e-12);
        let c = crossing_time(&rho, &h, 0.1, 10.0).unwrap().unwrap();
        assert!((c - b).abs() < 1e-8, "{c} vs {b}");
        // mixing caps p at exactly 1 − δ, reached at t = π/2
        let mixed =
            DensityMatrix::new(rho.matrix() * c64(0.8, 0.0) + CMat::identity(2, 2) * c64(0.1, 0.0), vec![2], &t)
                .unwrap();
        let c = crossing_time(&mixed, &h, 0.1, 10.0).unwrap().unwrap();
        assert!((c - std::f64::consts::FRAC_PI_2).abs() < 1e-4, "{c}");
        let zero = PureState::basis(2, 0).unwrap().to_density();
        assert!(matches!(tau_dist(&zero, &h, 0.1, &t), Err(Error::Stationary)));
    }

    #[test]
    fn ml_examples() {
        let t = tol();
        let rho = plus().to_density();
        let h = HermitianObservable::single_mode(CMat::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]), &t).unwrap();
        let m = tau_dist_ml(&rho, &h, 0.0, &t).unwrap();
        assert!((m.tau - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(tau_dist_ml(&rho, &h, 0.5, &t).unwrap().tau, 0.0);
        // a shift of the spectrum changes nothing
        let shifted =
            HermitianObservable::single_mode(CMat::from_row_slice(2, 2, &[-ONE * 3.0, ZERO, ZERO, -ONE * 2.0]), &t)
                .unwrap();
        assert!(
            (tau_dist_ml(&rho, &shifted, 0.2, &t).unwrap().tau - tau_dist_ml(&rho, &h, 0.2, &t).unwrap().tau).abs()
                < 1e-12
        );
    }

    #[test]
    fn qfi_variance_gap_examples() {
        let t = tol();
        let rho = plus().to_density();
        let h = HermitianObservable::single_mode(sz(), &t).unwrap();
        assert!(qfi_variance_gap(&rho, &h, 0.0, &t).unwrap().abs() < 1e-15);
        assert!(qfi_variance_gap(&rho, &h, std::f64::consts::FRAC_PI_4, &t).unwrap().abs() < 1e-8);
    }

    #[test]
    fn rate_bound_examples() {
        let zero = PureState::basis(2, 0).unwrap();
        let r = rate_bound_check(&zero, &sz(), 0.1, 4).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let r = rate_bound_check(&zero, &sx(), 0.1, 4).unwrap();
        assert!(r.satisfied && (r.lhs / r.rhs - 1.0).abs() < 1e-8, "{r:?}");
        let f = crate::fock::FockSpace::new(60).unwrap();
        let coh = f.coherent(c64(1.2, 0.0), &tol()).unwrap();
        let r = rate_bound_check(&coh, &f.number(), 0.1, 3).unwrap();
        assert!(r.satisfied, "{r:?}");
    }

    #[test]
    fn triangle_trivial() {
        let t = tol();
        let a = PureState::basis(2, 0).unwrap().to_density();
        let b = PureState::basis(2, 1).unwrap().to_density();
        let h = HermitianObservable::single_mode(sz(), &t).unwrap();
        let r = reverse_triangle_check(&a, &h, &b, &h, 1.0, &t).unwrap();
        assert!(r.lhs < 1e-14 && r.satisfied);
        let hx = HermitianObservable::single_mode(sx(), &t).unwrap();
        assert!(matches!(reverse_triangle_check(&a, &hx, &b, &hx, 10.0, &t), Err(Error::TimeWindow { .. })));
    }

    #[test]
    fn derivative_examples() {
        let t = tol();
        let a = PureState::basis(2, 0).unwrap().to_density();
        let b = PureState::basis(2, 1).unwrap().to_density();
        let hx = HermitianObservable::single_mode(sx(), &t).unwrap();
        let r = derivative_bound_check(&a, &hx, &b, &hx, &t).unwrap();
        assert!((r.fisher_rhs - 1.0).abs() < 1e-12 && (r.variance_rhs - 1.0).abs() < 1e-12);
        assert!(r.pure_equality_deviation.unwrap() < 1e-8 && r.satisfied);
        let hz = HermitianObservable::single_mode(sz(), &t).unwrap();
        let r = derivative_bound_check(&a, &hz, &b, &hz, &t).unwrap();
        assert!(r.derivative.abs() < 1e-10);
    }

    #[test]
    fn fubini_study_examples() {
        let dts = [0.1, 0.05, 0.025, 0.0125];
        let r = fubini_study_ratio(&plus(), &sz(), &dts).unwrap();
        assert!((r.limit - 1.0).abs() < 1e-9 && (r.ratio_to_four_sigma_sq - 0.25).abs() < 1e-9);
        let f = crate::fock::FockSpace::new(60).unwrap();
        let coh = f.coherent(c64(0.7, 0.2), &tol()).unwrap();
        let r = fubini_study_ratio(&coh, &f.number(), &dts).unwrap();
        assert!((r.limit - 1.0).abs() < 1e-8);
        assert!(matches!(fubini_study_ratio(&PureState::basis(2, 0).unwrap(), &sz(), &dts), Err(Error::Stationary)));
    }

    #[test]
    fn loschmidt_commuting_pair() {
        let phi = plus();
        let h1 = CMat::from_row_slice(2, 2, &[c64(0.3, 0.0), ZERO, ZERO, c64(-0.2, 0.0)]);
        let h2 = CMat::from_row_slice(2, 2, &[c64(1.1, 0.0), ZERO, ZERO, c64(0.4, 0.0)]);
        let t = 0.8;
        let echo = loschmidt_echo(&phi, &h1, &h2, t).unwrap();
        let u = Evolver::new(&(&h2 - &h1)).unwrap().unitary(t);
        let z = phi.amplitudes().dotc(&(u * phi.amplitudes()));
        assert!((echo - z.norm_sqr()).abs() < 1e-14);
    }

    #[test]
    fn time_ratio_ghz() {
        let t = tol();
        for n in 2..=5 {
            let s = named_state(&NamedState::Ghz { n_modes: n }, 2, &t).unwrap();
            for d in [0.05, 0.1, 0.25] {
                let r = nrf_time_ratio(&s, &AlgebraBasis::qubit_bloch(), d, &MaximizeOptions::default()).unwrap();
                assert!((r.literal - n as f64).abs() < 1e-10 && (r.branch_mean - r.nrf).abs() < 1e-10);
            }
        }
    }
}
