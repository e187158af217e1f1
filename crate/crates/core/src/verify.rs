//! Runners for the eight numerical acceptance criteria.
//!
//! Every runner is deterministic for a given seed: instance `i` of an
//! ensemble draws from its own stream, and parallel results are collected in
//! index order.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch_size::{
    c_delta, delta_window, ellipse_data, gaussian_abs_z, gaussian_abs_z_oracle, gaussian_cat_size, n_eff,
    rdm_success_probabilities, EllipseConvention, GaussianCat,
};
use crate::error::{Error, Result};
use crate::fisher::{
    ecs_h3_bound, fock_ghz_nrf_printed, nrf_named, povm_equivalence_converged, projector_variance_check,
    projector_variance_printed, sl2_commutator_check, AlgebraBasis, FamilyName, MaximizeOptions, PovmCase,
};
use crate::fock::{coherent_amplitudes, FockSpace};
use crate::linalg::{c64, matrix_exponential, DensityMatrix, HermitianObservable, PureState};
use crate::sampling::{random_density, random_hermitian, random_pure, random_unitary, rng_for, uniform};
use crate::speed_limits::{
    derivative_bound_check, nrf_time_ratio, qfi_variance_gap, rate_bound_check, reverse_triangle_check,
    speed_limit_report, tau_dist,
};
use crate::superposition::{build_superposition, named_state, GeneralSuperposition, NamedState, SpaceKind};
use crate::tolerance::Tolerances;

/// One pinned comparison inside a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: String,
    pub threshold: f64,
    pub passed: bool,
    /// Diagnostic checks are reported but do not decide the criterion.
    pub gating: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, relation: "<=".into(), threshold, passed: value <= threshold, gating: true }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, relation: ">=".into(), threshold, passed: value >= threshold, gating: true }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        let mut c = Self::at_least(name, value, lo);
        c.relation = format!("in [{lo}, {hi}]");
        c.threshold = hi;
        c.passed = value >= lo && value <= hi;
        c
    }

    pub fn diagnostic(mut self) -> Self {
        self.gating = false;
        self
    }
}

/// Per-instance ensemble record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub kind: String,
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ensemble: Vec<EnsembleRow>,
}

impl CriterionReport {
    fn new(id: u8, title: &str, checks: Vec<Check>, notes: Vec<String>, ensemble: Vec<EnsembleRow>) -> Self {
        let passed = checks.iter().filter(|c| c.gating).all(|c| c.passed);
        Self { id, title: title.into(), passed, checks, notes, ensemble }
    }

    fn errored(id: u8, title: &str, err: &Error) -> Self {
        Self {
            id,
            title: title.into(),
            passed: false,
            checks: vec![],
            notes: vec![format!("error: {err}")],
            ensemble: vec![],
        }
    }

    /// `criterion N: PASS|FAIL  title  (first failing gating check)`.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let detail = match self.checks.iter().find(|c| c.gating && !c.passed) {
            Some(c) => format!(" -- {} = {:.6e} not {} {:.3e}", c.name, c.value, c.relation, c.threshold),
            None if !self.passed => format!(" -- {}", self.notes.first().cloned().unwrap_or_default()),
            None => String::new(),
        };
        format!("criterion {}: {} {}{}", self.id, status, self.title, detail)
    }
}

pub const TITLES: [&str; 8] = [
    "branch-size oracle equivalence",
    "variance of the projector-difference observable",
    "distinguishability-time speed limits",
    "rate, reverse-triangle and derivative bounds",
    "named-state N^rF values",
    "weak equivalences and sl2 algebra",
    "time-ratio identity for N^rF",
    "Gaussian cat adjudication",
];

/// Runs one criterion (1–8).
pub fn run_criterion(id: u8, seed: u64, tol: &Tolerances) -> CriterionReport {
    let title = TITLES.get(usize::from(id).wrapping_sub(1)).copied().unwrap_or("unknown");
    let out = match id {
        1 => criterion1(seed, tol),
        2 => criterion2(seed, tol),
        3 => criterion3(seed, tol),
        4 => criterion4(seed, tol),
        5 => criterion5(tol),
        6 => criterion6(seed, tol),
        7 => criterion7(tol),
        8 => criterion8(tol),
        _ => Err(Error::Argument(format!("no criterion {id}"))),
    };
    match out {
        Ok((checks, notes, ens)) => CriterionReport::new(id, title, checks, notes, ens),
        Err(e) => CriterionReport::errored(id, title, &e),
    }
}

pub fn run_all(seed: u64, tol: &Tolerances) -> Vec<CriterionReport> {
    (1..=8).map(|id| run_criterion(id, seed, tol)).collect()
}

type Outcome = Result<(Vec<Check>, Vec<String>, Vec<EnsembleRow>)>;

// ---------------------------------------------------------------------------
// Ensembles shared by criteria 1 and 2

pub const QUBIT_INSTANCES: usize = 200;
pub const FOCK_INSTANCES: usize = 20;

/// Instance `i` of the size ensemble: qubits for `i < 200`, then Fock.
pub fn size_instance(seed: u64, i: usize, tol: &Tolerances) -> Result<(GeneralSuperposition, f64)> {
    let mut rng = rng_for(seed, 1, i as u64);
    for _ in 0..100 {
        let (phi, u, n, kind) = if i < QUBIT_INSTANCES {
            let n = rng.random_range(1..=8usize);
            (random_pure(2, &mut rng)?, random_unitary(2, &mut rng), n, SpaceKind::Spin)
        } else {
            let n = rng.random_range(1..=3usize);
            let d = [40, 22, 8][n - 1];
            let f = FockSpace::new(d)?;
            let alpha =
                c64(uniform(&mut rng, 0.2, 1.2), 0.0) * c64(0.0, uniform(&mut rng, 0.0, std::f64::consts::TAU)).exp();
            let phi = PureState::normalized(coherent_amplitudes(alpha, d), vec![d])?;
            let beta = c64(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0));
            let theta = uniform(&mut rng, 0.0, std::f64::consts::TAU);
            let gen = f.displacement_generator(beta) + f.number() * c64(theta, 0.0);
            (phi, matrix_exponential(&gen, c64(0.0, -1.0))?, n, SpaceKind::Fock)
        };
        let state = match build_superposition(&phi, &u, n, kind, tol) {
            Ok(s) => s,
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        };
        let abs_z = state.z().norm();
        if !(1e-6..=1.0 - 1e-6).contains(&abs_z) {
            continue;
        }
        let w = delta_window(abs_z, n);
        let u01: f64 = rng.random();
        let delta = if n == 1 { w.upper + u01 * (0.5 - w.upper) } else { w.lower + u01 * (w.upper - w.lower) };
        if !(delta > 0.0 && delta < 0.5) {
            continue;
        }
        return Ok((state, delta));
    }
    Err(Error::Numerical(format!("could not draw a usable instance {i}")))
}

fn criterion1(seed: u64, tol: &Tolerances) -> Outcome {
    let total = QUBIT_INSTANCES + FOCK_INSTANCES;
    let rows: Vec<Result<(bool, f64, f64)>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let (s, delta) = size_instance(seed, i, tol)?;
            let explicit = rdm_success_probabilities(&s, tol)?;
            let brute = explicit.iter().position(|&p| p >= 1.0 - delta).map(|k| k + 1);
            let formula = n_eff(s.z().norm(), delta, s.n_modes()).ok();
            let (a, b) = s.branch_states(tol)?;
            let log_overlap = a.inner(&b).norm().ln();
            let denom = (4.0 * delta - 4.0 * delta * delta).ln();
            let closed = 2.0 * s.n_modes() as f64 * s.z().norm().ln() / denom;
            let explicit_overlap = 2.0 * log_overlap / denom;
            let report = c_delta(&s, delta, tol)?;
            let dev = (report.c_delta - closed).abs() / closed.abs().max(1.0);
            let dev_explicit = (report.c_delta - explicit_overlap).abs() / explicit_overlap.abs().max(1.0);
            Ok((brute == formula && brute.is_some(), dev, dev_explicit))
        })
        .collect();
    let mut mismatches = 0usize;
    let (mut worst, mut worst_explicit) = (0.0f64, 0.0f64);
    for r in rows {
        let (ok, dev, dev_explicit) = r?;
        mismatches += usize::from(!ok);
        worst = worst.max(dev);
        worst_explicit = worst_explicit.max(dev_explicit);
    }
    Ok((
        vec![
            Check::at_most("n_eff mismatches vs explicit RDM scan", mismatches as f64, 0.0),
            Check::at_most("max relative |C_delta - 2N log|z| / log(4d-4d^2)|", worst, 1e-10),
            // the explicit N-mode inner product loses digits when |z| is near 1
            Check::at_most("max relative |C_delta - 2 log|<Phi|VPhi>| / log(4d-4d^2)|", worst_explicit, 1e-8)
                .diagnostic(),
        ],
        vec![format!("{QUBIT_INSTANCES} qubit instances (N <= 8), {FOCK_INSTANCES} Fock instances (N <= 3, D <= 40)")],
        vec![],
    ))
}

fn criterion2(seed: u64, tol: &Tolerances) -> Outcome {
    let total = QUBIT_INSTANCES + FOCK_INSTANCES;
    let rows: Vec<Result<(f64, f64, f64)>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let (s, _) = size_instance(seed, i, tol)?;
            let c = projector_variance_check(&s, tol)?;
            let scale = c.numeric.abs().max(1.0);
            Ok((c.deviation_printed / scale, c.deviation_corrected / scale, c.mean.abs()))
        })
        .collect();
    let (mut printed, mut corrected, mut mean) = (0.0f64, 0.0f64, 0.0f64);
    for r in rows {
        let (p, c, m) = r?;
        printed = printed.max(p);
        corrected = corrected.max(c);
        mean = mean.max(m);
    }
    let mut end_one = 0.0f64;
    let mut end_zero = 0.0f64;
    for n in 1..=8usize {
        let nf = n as f64;
        end_one = end_one.max((projector_variance_printed(c64(1.0 - 1e-12, 0.0), n)? - nf).abs());
        end_zero = end_zero.max((projector_variance_printed(c64(0.0, 0.0), n)? - nf * nf).abs());
    }
    Ok((
        vec![
            Check::at_most("max relative |printed formula - direct variance|", printed, 1e-9),
            Check::at_most("max |<Psi|A|Psi>|", mean, 1e-10),
            Check::at_most("max |Var(|z| -> 1) - N|", end_one, 1e-9),
            Check::at_most("max |Var(z = 0) - N^2|", end_zero, 1e-9),
            Check::at_most("max relative |corrected formula (Re z^N) - direct variance|", corrected, 1e-9).diagnostic(),
        ],
        vec!["the printed numerator carries N(|z|^2 + Re z); the direct variance matches N|z|^2 + N Re z^N".into()],
        vec![],
    ))
}

pub const SPEED_INSTANCES: usize = 500;

fn criterion3(seed: u64, tol: &Tolerances) -> Outcome {
    struct Row {
        /// `(bound, crossing)` pairs.
        dist: Option<(f64, f64)>,
        ml: Option<(f64, f64)>,
        limit_dev: f64,
        qfi_gap_min: f64,
    }
    let rows: Vec<Result<Row>> = (0..SPEED_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, 3, i as u64);
            let d = rng.random_range(2..=4usize);
            let rank = rng.random_range(1..=d);
            let rho = random_density(d, rank, &mut rng, tol)?;
            let h = HermitianObservable::single_mode(random_hermitian(d, &mut rng), tol)?;
            let delta = uniform(&mut rng, 0.02, 0.45);
            let rep = speed_limit_report(&rho, &h, delta, tol)?;
            let (dist, ml) = match rep.actual_crossing_time {
                Some(tc) => {
                    let ml = match (rep.tau_dist_ml, rep.ml_window) {
                        (Some(m), Some(w)) if tc <= w => Some((m, tc)),
                        _ => None,
                    };
                    (Some((rep.tau_dist, tc)), ml)
                }
                None => (None, None),
            };
            let root_f = rep.qfi.sqrt();
            let limit = tau_dist(&rho, &h, 1e-15, tol)?;
            let limit_dev = (limit - std::f64::consts::PI / root_f).abs();
            let mut qfi_gap_min = f64::INFINITY;
            for k in 0..=10 {
                let t = std::f64::consts::PI / root_f * k as f64 / 10.0;
                qfi_gap_min = qfi_gap_min.min(qfi_variance_gap(&rho, &h, t, tol)?);
            }
            Ok(Row { dist, ml, limit_dev, qfi_gap_min })
        })
        .collect();
    let mut ens = Vec::new();
    let (mut worst_dist, mut worst_ml, mut worst_limit, mut worst_qfi_gap) =
        (f64::INFINITY, f64::INFINITY, 0.0f64, f64::INFINITY);
    let (mut crossed, mut ml_applied, mut ml_viol) = (0usize, 0usize, 0usize);
    for (i, r) in rows.into_iter().enumerate() {
        let r = r?;
        if let Some((bound, tc)) = r.dist {
            crossed += 1;
            worst_dist = worst_dist.min(tc - bound);
            ens.push(EnsembleRow { kind: "tau_dist".into(), index: i, lhs: bound, rhs: tc, gap: tc - bound });
        }
        if let Some((bound, tc)) = r.ml {
            ml_applied += 1;
            ml_viol += usize::from(tc - bound < -1e-8);
            worst_ml = worst_ml.min(tc - bound);
            ens.push(EnsembleRow { kind: "tau_dist_ml".into(), index: i, lhs: bound, rhs: tc, gap: tc - bound });
        }
        worst_limit = worst_limit.max(r.limit_dev);
        worst_qfi_gap = worst_qfi_gap.min(r.qfi_gap_min);
    }
    Ok((
        vec![
            Check::at_least("min (crossing - tau_dist)", worst_dist, -1e-8),
            Check::at_least("min (crossing - tau_dist_ml) inside t <= pi/E_max", worst_ml, -1e-8),
            Check::at_most("max |tau_dist(delta -> 0+) - pi/sqrt(F)|", worst_limit, 1e-6),
            Check::at_least("min QFI-variance gap", worst_qfi_gap, -1e-9),
        ],
        vec![format!(
            "{SPEED_INSTANCES} instances; {crossed} reach 1 - delta; mean-energy bound applicable in {ml_applied}, violated in {ml_viol}"
        )],
        ens,
    ))
}

pub const BOUND_INSTANCES: usize = 200;

fn criterion4(seed: u64, tol: &Tolerances) -> Outcome {
    let rate: Vec<Result<(f64, f64, f64, bool)>> = (0..BOUND_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, 41, i as u64);
            let d = rng.random_range(2..=5usize);
            let phi = random_pure(d, &mut rng)?;
            let h = random_hermitian(d, &mut rng);
            let delta = uniform(&mut rng, 0.02, 0.45);
            let n = rng.random_range(1..=8usize);
            let r = rate_bound_check(&phi, &h, delta, n)?;
            Ok((r.lhs, r.rhs, r.stencil_error, r.satisfied))
        })
        .collect();
    let tri: Vec<Result<(f64, f64, bool)>> = (0..BOUND_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, 42, i as u64);
            let d = rng.random_range(2..=3usize);
            let ra = random_density(d, d, &mut rng, tol)?;
            let rb = random_density(d, d, &mut rng, tol)?;
            let ha = HermitianObservable::single_mode(random_hermitian(d, &mut rng), tol)?;
            let hb = HermitianObservable::single_mode(random_hermitian(d, &mut rng), tol)?;
            let u: f64 = rng.random();
            let fa = crate::fisher::qfi(&ra, &ha, tol)?.sqrt();
            let fb = crate::fisher::qfi(&rb, &hb, tol)?.sqrt();
            let t = u * std::f64::consts::PI / fa.max(fb);
            let r = reverse_triangle_check(&ra, &ha, &rb, &hb, t, tol)?;
            Ok((r.lhs, r.rhs, r.satisfied))
        })
        .collect();
    // derivative, fisher rhs, variance rhs, satisfied, pure-state equality deviation
    type DerivRow = (f64, f64, f64, bool, Option<f64>);
    let deriv: Vec<Result<DerivRow>> = (0..BOUND_INSTANCES + 50)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, 43, i as u64);
            let d = rng.random_range(2..=3usize);
            let (ra, rb) = if i < BOUND_INSTANCES {
                (random_density(d, d, &mut rng, tol)?, random_density(d, d, &mut rng, tol)?)
            } else {
                (random_pure(d, &mut rng)?.to_density(), random_pure(d, &mut rng)?.to_density())
            };
            let ha = HermitianObservable::single_mode(random_hermitian(d, &mut rng), tol)?;
            let hb = HermitianObservable::single_mode(random_hermitian(d, &mut rng), tol)?;
            let r = derivative_bound_check(&ra, &ha, &rb, &hb, tol)?;
            Ok((r.derivative, r.fisher_rhs, r.variance_rhs, r.satisfied, r.pure_equality_deviation))
        })
        .collect();

    let mut ens = Vec::new();
    let (mut rate_fail, mut rate_ratio) = (0usize, 0.0f64);
    for (i, r) in rate.into_iter().enumerate() {
        let (l, rhs, e, ok) = r?;
        rate_fail += usize::from(!ok);
        if rhs > 0.0 {
            rate_ratio = rate_ratio.max((l - e) / rhs);
        }
        ens.push(EnsembleRow { kind: "rate".into(), index: i, lhs: l, rhs, gap: rhs - l });
    }
    let mut tri_fail = 0usize;
    for (i, r) in tri.into_iter().enumerate() {
        let (l, rhs, ok) = r?;
        tri_fail += usize::from(!ok);
        ens.push(EnsembleRow { kind: "reverse_triangle".into(), index: i, lhs: l, rhs, gap: rhs - l });
    }
    let (mut der_fail, mut pure_dev) = (0usize, 0.0f64);
    for (i, r) in deriv.into_iter().enumerate() {
        let (l, f, v, ok, pd) = r?;
        der_fail += usize::from(!ok);
        if let Some(p) = pd {
            pure_dev = pure_dev.max(p);
        }
        ens.push(EnsembleRow { kind: "derivative".into(), index: i, lhs: l, rhs: f, gap: v - l });
    }
    Ok((
        vec![
            Check::at_most("rate-bound violations beyond stencil error", rate_fail as f64, 0.0),
            Check::at_most("reverse-triangle violations", tri_fail as f64, 0.0),
            Check::at_most("derivative-bound violations beyond stencil error", der_fail as f64, 0.0),
            Check::at_most("max |fisher_rhs - variance_rhs| for pure pairs", pure_dev, 1e-8),
            Check::at_most("max (lhs - stencil error)/rhs for the rate bound", rate_ratio, 1.0 + 1e-8).diagnostic(),
        ],
        vec![format!("{BOUND_INSTANCES} instances per bound, plus 50 pure pairs for the equality case")],
        ens,
    ))
}

fn criterion5(tol: &Tolerances) -> Outcome {
    let opts = MaximizeOptions::default();
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let fock: Vec<Result<(usize, usize, f64)>> = [(3, 2), (3, 3), (4, 2), (4, 3), (5, 2), (5, 3)]
        .into_par_iter()
        .map(|(n, m)| {
            Ok((n, m, nrf_named(&NamedState::FockGhz { n, n_modes: m }, FamilyName::H4FixedL1, &opts, tol)?.0.nrf))
        })
        .collect();
    let mut fock_dev = 0.0f64;
    for r in fock {
        let (n, m, v) = r?;
        let p = fock_ghz_nrf_printed(n, m);
        fock_dev = fock_dev.max((v - p).abs());
        notes.push(format!("FockGHZ n={n} N={m}: nrf = {v:.10}, printed {p:.10}, ratio {:.6}", v / p));
    }
    checks.push(Check::at_most("max |nrf(FockGHZ, h4 l=1) - Nn/(4(1+1/n)) - 1/2|", fock_dev, 1e-6));

    let grid: Vec<(usize, f64)> = [2usize, 3, 4].iter().flat_map(|&n| [0.5, 1.0, 1.5].map(|a| (n, a))).collect();
    let ecs: Vec<Result<(usize, f64, f64, f64)>> = grid
        .into_par_iter()
        .map(|(n, a)| {
            let h3 = nrf_named(&NamedState::Ecs { alpha: a, n_modes: n }, FamilyName::H3, &opts, tol)?.0.nrf;
            let h4 = nrf_named(&NamedState::Ecs { alpha: a, n_modes: n }, FamilyName::H4, &opts, tol)?.0.nrf;
            Ok((n, a, h3, h4))
        })
        .collect();
    let mut ecs_margin = f64::INFINITY;
    let (mut h4_per_n, mut h3_scaled) = (0.0f64, f64::INFINITY);
    for r in ecs {
        let (n, a, h3, h4) = r?;
        ecs_margin = ecs_margin.min(h3 - ecs_h3_bound(a, n));
        h4_per_n = h4_per_n.max(h4 / n as f64);
        h3_scaled = h3_scaled.min(h3 / (n as f64 * a * a));
    }
    checks.push(Check::at_least("min nrf(ECS, h3) - bound", ecs_margin, -1e-9));
    checks.push(Check::at_most("max nrf(ECS, h4)/N", h4_per_n, 4.0).diagnostic());
    checks.push(Check::at_least("min nrf(ECS, h3)/(N|alpha|^2)", h3_scaled, 1.0).diagnostic());

    let hgrid: Vec<(usize, f64)> = [2usize, 3, 4].iter().flat_map(|&n| [1.5, 2.0].map(|a| (n, a))).collect();
    let hcs: Vec<Result<(f64, f64)>> = hgrid
        .into_par_iter()
        .map(|(n, a)| {
            let v = nrf_named(&NamedState::Hcs { alpha: a, n_modes: n }, FamilyName::Sl2, &opts, tol)?.0.nrf;
            Ok(((n as f64 * a * a).ln(), v.ln()))
        })
        .collect::<Vec<_>>();
    let pts: Vec<(f64, f64)> = hcs.into_iter().collect::<Result<_>>()?;
    let slope = fit_slope(&pts);
    checks.push(Check::within("HCS sl2 fitted exponent vs N|alpha|^2", slope, 0.9, 1.1));
    notes.push("HCS grid N in {2,3,4} x alpha in {1.5, 2}".into());
    Ok((checks, notes, vec![]))
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion6(seed: u64, tol: &Tolerances) -> Outcome {
    let cases = [PovmCase::Ecs { alpha: 1.0 }, PovmCase::Fock { n: 3 }, PovmCase::Hcs { alpha: 1.0 }];
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for (k, case) in cases.iter().enumerate() {
        let r = povm_equivalence_converged(*case, 100, seed.wrapping_add(k as u64), tol)?;
        let label = match case {
            PovmCase::Ecs { .. } => "ecs",
            PovmCase::Fock { .. } => "fock",
            PovmCase::Hcs { .. } => "hcs",
        };
        checks.push(Check::at_most(format!("{label}: printed POVM deviation"), r.deviation_printed, 1e-8));
        checks.push(Check::at_least(format!("{label}: min variance-gain margin"), r.variance_gain_min_margin, -1e-9));
        checks.push(
            Check::at_most(format!("{label}: re-derived POVM deviation"), r.deviation_corrected, 1e-8).diagnostic(),
        );
        checks
            .push(Check::at_most(format!("{label}: c P_K O P_K - (P+ - P-)"), r.witness_deviation, 1e-8).diagnostic());
        notes.push(format!(
            "{label}: D = {}, printed coefficient {:.10}, re-derived {:.10}",
            r.dim, r.printed_coefficient, r.corrected_coefficient
        ));
    }
    for d in [40usize, 80] {
        let dev = sl2_commutator_check(&FockSpace::new(d)?);
        for (k, v) in dev.iter().enumerate() {
            checks.push(Check::at_most(format!("sl2 commutator {} at D = {d}", k + 1), *v, 1e-8));
        }
    }
    Ok((checks, notes, vec![]))
}

/// Named states paired with the family used for their `N^rF`.
pub fn named_catalog() -> Vec<(NamedState, FamilyName)> {
    vec![
        (NamedState::Ghz { n_modes: 4 }, FamilyName::QubitBloch),
        (NamedState::Ecs { alpha: 1.0, n_modes: 3 }, FamilyName::H3),
        (NamedState::FockGhz { n: 4, n_modes: 2 }, FamilyName::H4FixedL1),
        (NamedState::Hcs { alpha: 1.0, n_modes: 2 }, FamilyName::Sl2),
        (NamedState::Psi0 { alpha: 0.5, xi: 0.3, n_modes: 2 }, FamilyName::H3),
        (NamedState::Psi1 { alpha: 0.5, xi: 0.3, n_modes: 2 }, FamilyName::H3),
        (NamedState::Psi2Plus { alpha: 0.5, xi: 0.3, n_modes: 2 }, FamilyName::H3),
        (NamedState::Psi2Minus { alpha: 0.5, xi: 0.3, n_modes: 2 }, FamilyName::H3),
        (NamedState::IteratedSd { alpha: 0.3, xi: 0.0, n_modes: 2 }, FamilyName::H3),
    ]
}

/// Realizes `spec` at the truncation certified for its `N^rF`.
pub fn named_with_basis(
    spec: &NamedState,
    family: FamilyName,
    tol: &Tolerances,
) -> Result<(GeneralSuperposition, AlgebraBasis)> {
    let (_, cert) = nrf_named(spec, family, &MaximizeOptions::default(), tol)?;
    match cert {
        None => Ok((named_state(spec, 2, tol)?, AlgebraBasis::qubit_bloch())),
        Some(c) => {
            let f = FockSpace::new(c.dim)?;
            Ok((named_state(spec, c.dim, tol)?, AlgebraBasis::for_space(family, &f)?))
        }
    }
}

fn criterion7(tol: &Tolerances) -> Outcome {
    let deltas = [0.05, 0.1, 0.25];
    let rows: Vec<Result<(String, f64, f64, f64)>> = named_catalog()
        .into_par_iter()
        .map(|(spec, fam)| {
            let (s, b) = named_with_basis(&spec, fam, tol)?;
            let mut lit = Vec::new();
            let mut dev_mean = 0.0f64;
            let mut nrf = 0.0;
            for d in deltas {
                let r = nrf_time_ratio(&s, &b, d, &MaximizeOptions::default())?;
                nrf = r.nrf;
                lit.push(r.literal);
                dev_mean = dev_mean.max((r.branch_mean - r.nrf).abs());
            }
            let dev = lit.iter().map(|l| (l - nrf).abs()).fold(0.0, f64::max);
            let spread = lit.iter().cloned().fold(f64::MIN, f64::max) - lit.iter().cloned().fold(f64::MAX, f64::min);
            Ok((format!("{}/{}", spec.label(), fam.label()), dev, spread, dev_mean))
        })
        .collect();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let (mut worst_dev, mut worst_spread, mut worst_mean) = (0.0f64, 0.0f64, 0.0f64);
    for r in rows {
        let (label, dev, spread, dm) = r?;
        notes.push(format!(
            "{label}: |literal - nrf| = {dev:.3e}, delta spread {spread:.3e}, branch-mean variant {dm:.3e}"
        ));
        worst_dev = worst_dev.max(dev);
        worst_spread = worst_spread.max(spread);
        worst_mean = worst_mean.max(dm);
    }
    checks.push(Check::at_most("max |time ratio (first branch) - nrf|", worst_dev, 1e-8));
    checks.push(Check::at_most("max delta spread of the time ratio", worst_spread, 1e-8));
    checks.push(Check::at_most("max |time ratio (branch-mean QFI) - nrf|", worst_mean, 1e-8).diagnostic());
    Ok((checks, notes, vec![]))
}

pub const GAUSSIAN_ALPHAS: [f64; 3] = [0.25, 0.5, 1.0];
pub const GAUSSIAN_XIS: [f64; 3] = [0.0, 0.2, 0.5];
pub const GAUSSIAN_MODES: [usize; 3] = [1, 2, 4];

fn criterion8(tol: &Tolerances) -> Outcome {
    let grid: Vec<(GaussianCat, f64, f64)> = GaussianCat::ALL
        .iter()
        .flat_map(|&c| GAUSSIAN_ALPHAS.iter().flat_map(move |&a| GAUSSIAN_XIS.iter().map(move |&x| (c, a, x))))
        .collect();
    let oracle: Vec<Result<(GaussianCat, f64, f64, f64)>> = grid
        .into_par_iter()
        .map(|(c, a, x)| {
            let (zo, _) = gaussian_abs_z_oracle(c, a, x, tol)?;
            let z = gaussian_abs_z(c, a, x);
            let worst = GAUSSIAN_MODES.iter().map(|&n| ((zo / z).powi(n as i32) - 1.0).abs()).fold(0.0, f64::max);
            Ok((c, a, x, worst))
        })
        .collect();
    let mut worst = 0.0f64;
    for r in oracle {
        worst = worst.max(r?.3);
    }
    let mut notes = Vec::new();
    let mut generated = 0usize;
    for c in GaussianCat::ALL {
        for a in GAUSSIAN_ALPHAS {
            for x in GAUSSIAN_XIS {
                for n in GAUSSIAN_MODES {
                    let r = gaussian_cat_size(c, a, x, n, None, false, tol)?;
                    if r.c_tilde.is_finite()
                        && r.c_tilde_printed.is_finite()
                        && r.c_tilde_from_normalization.is_finite()
                    {
                        generated += 1;
                    }
                }
            }
        }
        let r = gaussian_cat_size(c, 0.5, 0.5, 2, None, false, tol)?;
        notes.push(format!(
            "{} (alpha 0.5, xi 0.5, N 2): computed {:.6}, printed {:.6} (x{:.4}), from normalization {:.6} (x{:.4})",
            c.label(),
            r.c_tilde,
            r.c_tilde_printed,
            r.printed_over_computed,
            r.c_tilde_from_normalization,
            r.normalization_over_computed
        ));
    }
    let expected = GaussianCat::ALL.len() * GAUSSIAN_ALPHAS.len() * GAUSSIAN_XIS.len() * GAUSSIAN_MODES.len();

    // quoted centers: a) S(2ξ)D(−α(1+e^{2ξ})), b) S(−2ξ)D(−α(1+e^{2ξ})), c) D(−2αe^{ξ}),
    // d) S(−2ξ)D(−2αe^{−ξ}); axes e^{±4ξ} in a), b), d)
    let (alpha, xi): (f64, f64) = (0.5, 0.3);
    let big = (4.0 * xi).exp();
    let small = (-4.0 * xi).exp();
    let quoted = [
        (GaussianCat::Psi0, -alpha * (1.0 + (2.0 * xi).exp()), small, big),
        (GaussianCat::Psi1, -alpha * (1.0 + (2.0 * xi).exp()), big, small),
        (GaussianCat::Psi2Plus, -2.0 * alpha * xi.exp(), 0.5, 0.5),
        (GaussianCat::Psi2Minus, -2.0 * alpha * (-xi).exp(), big, small),
    ];
    let mut ellipse_dev = 0.0f64;
    let mut records = 0usize;
    for (c, cx, u, v) in quoted {
        let e = ellipse_data(c, alpha, xi, EllipseConvention::Quoted);
        records += e.len();
        let d = &e[1];
        ellipse_dev =
            ellipse_dev.max((d.cx - cx).abs()).max(d.cp.abs()).max((d.semi_u - u).abs()).max((d.semi_v - v).abs());
        ellipse_dev = ellipse_dev.max((e[0].semi_u - 0.5).abs()).max(e[0].cx.abs());
    }
    let var_dev = variance_ellipse_oracle(alpha, xi, tol)?;
    Ok((
        vec![
            Check::at_most("max relative | |z_oracle|^N / |z|^N - 1 |", worst, 1e-6),
            Check::at_least("computed-vs-printed rows generated", generated as f64, expected as f64),
            Check::at_least("ellipse records", records as f64, 8.0),
            Check::at_most("quoted ellipse deviation", ellipse_dev, 1e-12),
            Check::at_most("variance ellipses vs Fock moments", var_dev, 1e-8),
        ],
        notes,
        vec![],
    ))
}

fn variance_ellipse_oracle(alpha: f64, xi: f64, tol: &Tolerances) -> Result<f64> {
    let f = FockSpace::new(120)?;
    let x = f.quadrature(0.0);
    let p = f.quadrature(std::f64::consts::FRAC_PI_2);
    let mut worst = 0.0f64;
    for c in GaussianCat::ALL {
        let spec = named_cat(c, alpha, xi);
        let s = named_state(&spec, 120, tol)?;
        let st = PureState::normalized(s.u_phi().clone(), vec![120])?;
        let e = &ellipse_data(c, alpha, xi, EllipseConvention::Variance)[1];
        worst = worst
            .max((st.expectation(&x).re - e.cx).abs())
            .max((st.expectation(&p).re - e.cp).abs())
            .max((st.variance(&x) - e.semi_u).abs())
            .max((st.variance(&p) - e.semi_v).abs());
    }
    Ok(worst)
}

/// The named state with `N = 1` for a Gaussian family member.
pub fn named_cat(c: GaussianCat, alpha: f64, xi: f64) -> NamedState {
    match c {
        GaussianCat::Psi0 => NamedState::Psi0 { alpha, xi, n_modes: 1 },
        GaussianCat::Psi1 => NamedState::Psi1 { alpha, xi, n_modes: 1 },
        GaussianCat::Psi2Plus => NamedState::Psi2Plus { alpha, xi, n_modes: 1 },
        GaussianCat::Psi2Minus => NamedState::Psi2Minus { alpha, xi, n_modes: 1 },
    }
}

/// `DensityMatrix` helper for callers that sample mixed states.
pub fn mixed(d: usize, seed: u64, tol: &Tolerances) -> Result<DensityMatrix> {
    random_density(d, d, &mut rng_for(seed, 99, 0), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        assert!((fit_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn instances_are_deterministic() {
        let t = Tolerances::default();
        let (a, da) = size_instance(7, 5, &t).unwrap();
        let (b, db) = size_instance(7, 5, &t).unwrap();
        assert_eq!(a.z(), b.z());
        assert_eq!(da, db);
        let (f, _) = size_instance(7, QUBIT_INSTANCES + 1, &t).unwrap();
        assert_eq!(f.kind(), SpaceKind::Fock);
    }

    #[test]
    fn line_format() {
        let r = CriterionReport::new(3, "x", vec![Check::at_most("a", 2.0, 1.0)], vec![], vec![]);
        assert!(r.line().starts_with("criterion 3: FAIL x -- a"));
    }
}
