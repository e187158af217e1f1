//! Two-branch superpositions `|Ψ⟩ ∝ (I + U^{⊗N}) |φ⟩^{⊗N}` and the named
//! families built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{converge, suggested_dim, FockSpace, TruncationCertificate};
use crate::linalg::{c64, kron_power_vec, unitarity_defect, CMat, CVec, PureState, C64, ONE, ZERO};
use crate::tolerance::Tolerances;

/// Kind of single-mode space, which decides the elementary particle count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Spin,
    Fock,
}

/// `(φ, U, N)` with its branch overlap `z = ⟨φ|U|φ⟩`.
#[derive(Debug, Clone)]
pub struct GeneralSuperposition {
    phi: CVec,
    u: CMat,
    u_phi: CVec,
    n_modes: usize,
    z: C64,
    kind: SpaceKind,
}

impl GeneralSuperposition {
    pub fn phi(&self) -> &CVec {
        &self.phi
    }

    pub fn unitary(&self) -> &CMat {
        &self.u
    }

    /// `U|φ⟩`.
    pub fn u_phi(&self) -> &CVec {
        &self.u_phi
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn local_dim(&self) -> usize {
        self.phi.len()
    }

    /// `2 + 2 Re z^N`, the squared normalization.
    pub fn norm_sq(&self) -> f64 {
        2.0 + 2.0 * self.z.powu(self.n_modes as u32).re
    }

    /// Same `(φ, U)` with a different mode count.
    pub fn with_modes(&self, n_modes: usize, tol: &Tolerances) -> Result<Self> {
        build_superposition_unchecked(self.phi.clone(), self.u.clone(), n_modes, self.kind, tol)
    }

    /// Total dimension of the realized vector, if it fits in `usize`.
    pub fn total_dim(&self) -> Option<usize> {
        crate::linalg::checked_pow(self.local_dim(), self.n_modes)
    }

    /// The realized N-mode branches `|Φ⟩` and `V|Φ⟩`.
    pub fn branch_states(&self, tol: &Tolerances) -> Result<(PureState, PureState)> {
        let dims = vec![self.local_dim(); self.n_modes];
        let a = kron_power_vec(&self.phi, self.n_modes, tol)?;
        let b = kron_power_vec(&self.u_phi, self.n_modes, tol)?;
        Ok((PureState::normalized(a, dims.clone())?, PureState::normalized(b, dims)?))
    }

    /// The realized normalized `|Ψ⟩`; capacity error beyond the cap.
    pub fn psi(&self, tol: &Tolerances) -> Result<PureState> {
        let (a, b) = self.branch_states(tol)?;
        let v = a.amplitudes() + b.amplitudes();
        PureState::normalized(v, a.dims().to_vec())
    }

    /// Branch vectors packaged for analytic one- and two-point moments.
    pub fn moments(&self) -> ProductMoments<'_> {
        ProductMoments { u: &self.phi, v: &self.u_phi, n: self.n_modes, norm_sq: self.norm_sq() }
    }
}

fn spow(s: C64, k: usize) -> C64 {
    if k == 0 {
        ONE
    } else {
        s.powu(k as u32)
    }
}

/// `⟨a^{⊗N}| Σ_i A^{(i)} |b^{⊗N}⟩ = N ⟨a|A|b⟩ ⟨a|b⟩^{N−1}`.
pub fn product_one_point(a: &CVec, b: &CVec, op: &CMat, n: usize) -> C64 {
    let s = a.dotc(b);
    a.dotc(&(op * b)) * (n as f64) * spow(s, n - 1)
}

/// `⟨a^{⊗N}| (Σ_i X^{(i)}) (Σ_j Y^{(j)}) |b^{⊗N}⟩`.
pub fn product_two_point(a: &CVec, b: &CVec, x: &CMat, y: &CMat, n: usize) -> C64 {
    let s = a.dotc(b);
    let yb = y * b;
    let xy = a.dotc(&(x * &yb));
    let xa = a.dotc(&(x * b));
    let ya = a.dotc(&yb);
    let nf = n as f64;
    let diag = xy * nf * spow(s, n - 1);
    let off = if n >= 2 { xa * ya * (nf * (nf - 1.0)) * spow(s, n - 2) } else { ZERO };
    diag + off
}

/// Analytic expectation values of collective one-local operators in `|Ψ⟩`.
#[derive(Debug, Clone, Copy)]
pub struct ProductMoments<'a> {
    u: &'a CVec,
    v: &'a CVec,
    n: usize,
    norm_sq: f64,
}

impl ProductMoments<'_> {
    /// `⟨Ψ| Σ_i X^{(i)} |Ψ⟩`.
    pub fn mean(&self, x: &CMat) -> C64 {
        let (u, v, n) = (self.u, self.v, self.n);
        (product_one_point(u, u, x, n)
            + product_one_point(v, v, x, n)
            + product_one_point(u, v, x, n)
            + product_one_point(v, u, x, n))
            / self.norm_sq
    }

    /// `⟨Ψ| (Σ X^{(i)}) (Σ Y^{(j)}) |Ψ⟩`.
    pub fn second(&self, x: &CMat, y: &CMat) -> C64 {
        let (u, v, n) = (self.u, self.v, self.n);
        (product_two_point(u, u, x, y, n)
            + product_two_point(v, v, x, y, n)
            + product_two_point(u, v, x, y, n)
            + product_two_point(v, u, x, y, n))
            / self.norm_sq
    }

    /// Symmetrized covariance `Re⟨XY⟩ − ⟨X⟩⟨Y⟩` for Hermitian `X`, `Y`.
    pub fn covariance(&self, x: &CMat, y: &CMat) -> f64 {
        self.second(x, y).re - self.mean(x).re * self.mean(y).re
    }

    /// `⟨Ψ|(ΣX)²|Ψ⟩ − ⟨Ψ|ΣX|Ψ⟩²`.
    pub fn variance(&self, x: &CMat) -> f64 {
        self.covariance(x, x).max(0.0)
    }
}

/// `⟨φ|U|φ⟩`.
pub fn overlap_z(phi: &CVec, u: &CMat) -> C64 {
    phi.dotc(&(u * phi))
}

fn build_superposition_unchecked(
    phi: CVec,
    u: CMat,
    n_modes: usize,
    kind: SpaceKind,
    tol: &Tolerances,
) -> Result<GeneralSuperposition> {
    if n_modes == 0 {
        return Err(Error::Argument("mode count must be positive".into()));
    }
    let u_phi = &u * &phi;
    let z = phi.dotc(&u_phi);
    if z.norm() > 1.0 - tol.num {
        return Err(Error::Degenerate(z.norm()));
    }
    let sup = GeneralSuperposition { phi, u, u_phi, n_modes, z, kind };
    if sup.norm_sq() <= tol.degen {
        return Err(Error::Degenerate(z.norm()));
    }
    Ok(sup)
}

/// Validates `U` and `φ`, computes `z`, rejects coinciding branches.
pub fn build_superposition(
    phi: &PureState,
    u: &CMat,
    n_modes: usize,
    kind: SpaceKind,
    tol: &Tolerances,
) -> Result<GeneralSuperposition> {
    if phi.dims().len() != 1 {
        return Err(Error::Argument("φ must be a single-mode state".into()));
    }
    if u.nrows() != phi.dim() || u.ncols() != phi.dim() {
        return Err(Error::Dimension(format!("U is {}x{}, φ has dim {}", u.nrows(), u.ncols(), phi.dim())));
    }
    let defect = unitarity_defect(u);
    if defect > tol.unit {
        return Err(Error::Validation(format!("U is not unitary (defect {defect:.3e})")));
    }
    build_superposition_unchecked(phi.amplitudes().clone(), u.clone(), n_modes, kind, tol)
}

/// `U₁† U₂`: the single-mode unitary whose superposition with the identity
/// has the same branch distinguishability as `(U₁^{⊗N} + U₂^{⊗N})|φ⟩^{⊗N}`.
pub fn two_path_reduce(u1: &CMat, u2: &CMat) -> Result<CMat> {
    if u1.shape() != u2.shape() || !u1.is_square() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", u1.shape(), u2.shape())));
    }
    Ok(u1.adjoint() * u2)
}

/// Named members of the superposition family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NamedState {
    /// `φ = |0⟩`, `U = σ_x` on qubits.
    Ghz { n_modes: usize },
    /// `φ = |α⟩`, `U = exp(−iπ n̂)`.
    Ecs { alpha: f64, n_modes: usize },
    /// `φ = |0⟩`, `U` swaps `|0⟩` and `|n⟩`.
    FockGhz { n: usize, n_modes: usize },
    /// `φ = ψ₊`, `U` swaps the even and odd cats.
    Hcs { alpha: f64, n_modes: usize },
    /// `φ = |0⟩`, `U = D(−α) S(2ξ) D(−α)`.
    Psi0 { alpha: f64, xi: f64, n_modes: usize },
    /// `φ = |0⟩`, `U = D(−α) S(−2ξ) D(−α)`.
    Psi1 { alpha: f64, xi: f64, n_modes: usize },
    /// `φ = |0⟩`, `U = S(−ξ) D(−2α) S(ξ)`.
    Psi2Plus { alpha: f64, xi: f64, n_modes: usize },
    /// `φ = |0⟩`, `U = S(−ξ) D(−2α) S(−ξ)`.
    Psi2Minus { alpha: f64, xi: f64, n_modes: usize },
    /// `φ = |0⟩`, `U = Π_k S(−ξ)^k D(α/k!) S(ξ)^k`, collapsed to one displacement.
    IteratedSd { alpha: f64, xi: f64, n_modes: usize },
}

impl NamedState {
    pub fn n_modes(&self) -> usize {
        match *self {
            NamedState::Ghz { n_modes }
            | NamedState::Ecs { n_modes, .. }
            | NamedState::FockGhz { n_modes, .. }
            | NamedState::Hcs { n_modes, .. }
            | NamedState::Psi0 { n_modes, .. }
            | NamedState::Psi1 { n_modes, .. }
            | NamedState::Psi2Plus { n_modes, .. }
            | NamedState::Psi2Minus { n_modes, .. }
            | NamedState::IteratedSd { n_modes, .. } => n_modes,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NamedState::Ghz { .. } => "ghz",
            NamedState::Ecs { .. } => "ecs",
            NamedState::FockGhz { .. } => "fockghz",
            NamedState::Hcs { .. } => "hcs",
            NamedState::Psi0 { .. } => "psi0",
            NamedState::Psi1 { .. } => "psi1",
            NamedState::Psi2Plus { .. } => "psi2plus",
            NamedState::Psi2Minus { .. } => "psi2minus",
            NamedState::IteratedSd { .. } => "iteratedsd",
        }
    }

    pub fn space_kind(&self) -> SpaceKind {
        match self {
            NamedState::Ghz { .. } => SpaceKind::Spin,
            _ => SpaceKind::Fock,
        }
    }

    /// Rough mean photon number of the most excited intermediate state,
    /// used to pick a starting truncation.
    pub fn photon_scale(&self) -> f64 {
        let sq = |r: f64| r.sinh().powi(2);
        match *self {
            NamedState::Ghz { .. } => 0.0,
            NamedState::Ecs { alpha, .. } | NamedState::Hcs { alpha, .. } => alpha * alpha,
            NamedState::FockGhz { n, .. } => n as f64,
            NamedState::Psi0 { alpha, xi, .. } | NamedState::Psi1 { alpha, xi, .. } => {
                let b = alpha.abs() * (1.0 + (2.0 * xi.abs()).exp());
                b * b * (4.0 * xi.abs()).exp() + sq(2.0 * xi)
            }
            NamedState::Psi2Plus { alpha, xi, .. } | NamedState::Psi2Minus { alpha, xi, .. } => {
                4.0 * alpha * alpha * (2.0 * xi.abs()).exp() + sq(2.0 * xi)
            }
            NamedState::IteratedSd { alpha, xi, .. } => {
                let b = iterated_sd_amplitude(alpha, xi).0;
                b * b
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes() == 0 {
            return Err(Error::Argument("mode count must be positive".into()));
        }
        let finite = match *self {
            NamedState::Ecs { alpha, .. } | NamedState::Hcs { alpha, .. } => alpha.is_finite(),
            NamedState::Psi0 { alpha, xi, .. }
            | NamedState::Psi1 { alpha, xi, .. }
            | NamedState::Psi2Plus { alpha, xi, .. }
            | NamedState::Psi2Minus { alpha, xi, .. }
            | NamedState::IteratedSd { alpha, xi, .. } => alpha.is_finite() && xi.is_finite(),
            _ => true,
        };
        if !finite {
            return Err(Error::Argument("non-finite parameter".into()));
        }
        Ok(())
    }
}

/// Collapsed displacement `α Σ_{k≤k_max} e^{kξ}/k!` and the `k_max` used:
/// the smallest `k` whose term is below `1e−12` of the running sum.
pub fn iterated_sd_amplitude(alpha: f64, xi: f64) -> (f64, usize) {
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut k = 0usize;
    loop {
        if k > 0 {
            term *= xi.exp() / k as f64;
        }
        sum += term;
        if term.abs() < 1e-12 * sum.abs() || k > 10_000 {
            return (alpha * sum, k);
        }
        k += 1;
    }
}

/// The uncollapsed product `Π_{k=0}^{k_max} S(−ξ)^k D(α/k!) S(ξ)^k` on a
/// truncated space.
pub fn iterated_sd_product(space: &FockSpace, alpha: f64, xi: f64, k_max: usize, tol: &Tolerances) -> Result<CMat> {
    let s = space.squeeze(c64(xi, 0.0), tol)?;
    let s_inv = s.adjoint();
    let mut u = space.identity();
    let mut fact = 1.0;
    for k in 0..=k_max {
        if k > 0 {
            fact *= k as f64;
        }
        let d = space.displacement(c64(alpha / fact, 0.0), tol)?;
        let mut term = d;
        for _ in 0..k {
            term = &s_inv * term * &s;
        }
        u *= term;
    }
    Ok(u)
}

fn swap_unitary(d: usize, i: usize, j: usize) -> CMat {
    let mut u = CMat::identity(d, d);
    u[(i, i)] = ZERO;
    u[(j, j)] = ZERO;
    u[(i, j)] = ONE;
    u[(j, i)] = ONE;
    u
}

/// Realizes a named state at a fixed single-mode truncation (ignored for
/// spin states).
pub fn named_state(spec: &NamedState, dim: usize, tol: &Tolerances) -> Result<GeneralSuperposition> {
    spec.validate()?;
    let n = spec.n_modes();
    let kind = spec.space_kind();
    if let NamedState::Ghz { .. } = spec {
        let phi = PureState::basis(2, 0)?;
        let sx = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        return build_superposition(&phi, &sx, n, kind, tol);
    }
    let f = FockSpace::new(dim)?;
    let (phi, u) = match *spec {
        NamedState::Ghz { .. } => unreachable!(),
        NamedState::Ecs { alpha, .. } => (f.coherent(c64(alpha, 0.0), tol)?, f.parity()),
        NamedState::FockGhz { n: level, .. } => {
            if level == 0 || level >= dim {
                return Err(Error::Argument(format!("Fock level {level} needs 0 < n < D = {dim}")));
            }
            (f.vacuum(), swap_unitary(dim, 0, level))
        }
        NamedState::Hcs { alpha, .. } => {
            let (p, m) = f.cat_pair(c64(alpha, 0.0), tol)?;
            let (pv, mv) = (p.amplitudes(), m.amplitudes());
            let proj = pv * pv.adjoint() + mv * mv.adjoint();
            let u = f.identity() - proj + mv * pv.adjoint() + pv * mv.adjoint();
            (p, u)
        }
        NamedState::Psi0 { alpha, xi, .. } | NamedState::Psi1 { alpha, xi, .. } => {
            let sign = if matches!(spec, NamedState::Psi0 { .. }) { 1.0 } else { -1.0 };
            let d = f.displacement(c64(-alpha, 0.0), tol)?;
            let s = f.squeeze(c64(2.0 * sign * xi, 0.0), tol)?;
            (f.vacuum(), &d * s * &d)
        }
        NamedState::Psi2Plus { alpha, xi, .. } | NamedState::Psi2Minus { alpha, xi, .. } => {
            let right = if matches!(spec, NamedState::Psi2Plus { .. }) { xi } else { -xi };
            let sl = f.squeeze(c64(-xi, 0.0), tol)?;
            let d = f.displacement(c64(-2.0 * alpha, 0.0), tol)?;
            let sr = f.squeeze(c64(right, 0.0), tol)?;
            (f.vacuum(), sl * d * sr)
        }
        NamedState::IteratedSd { alpha, xi, .. } => {
            let (beta, _) = iterated_sd_amplitude(alpha, xi);
            (f.vacuum(), f.displacement(c64(beta, 0.0), tol)?)
        }
    };
    if !matches!(spec, NamedState::FockGhz { .. }) {
        crate::fock::check_tail(&(&u * phi.amplitudes()), dim, tol)?;
    }
    build_superposition(&phi, &u, n, kind, tol)
}

/// Realizes a named state at the smallest doubling of a heuristic truncation
/// for which `z` is stable within `tol.conv`.
pub fn named_state_converged(
    spec: &NamedState,
    start: Option<usize>,
    tol: &Tolerances,
) -> Result<(GeneralSuperposition, Option<TruncationCertificate>)> {
    if spec.space_kind() == SpaceKind::Spin {
        return Ok((named_state(spec, 2, tol)?, None));
    }
    let mut d0 = start.unwrap_or_else(|| suggested_dim(spec.photon_scale()));
    if let NamedState::FockGhz { n, .. } = spec {
        d0 = d0.max(n + 2);
    }
    let (_, cert) = converge(d0, tol, |f| {
        let s = named_state(spec, f.dim(), tol)?;
        Ok(vec![s.z().re, s.z().im])
    })?;
    Ok((named_state(spec, cert.dim, tol)?, Some(cert)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{helstrom_probability, reduced_density};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn ghz_construction() {
        let s = named_state(&NamedState::Ghz { n_modes: 3 }, 2, &tol()).unwrap();
        assert_eq!(s.z(), ZERO);
        let psi = s.psi(&tol()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((psi.amplitudes()[7].re - h).abs() < 1e-15);
    }

    #[test]
    fn ecs_overlap() {
        let alpha: f64 = 0.8;
        let s = named_state(&NamedState::Ecs { alpha, n_modes: 2 }, 40, &tol()).unwrap();
        assert!((s.z().re - (-2.0 * alpha * alpha).exp()).abs() < 1e-10);
    }

    #[test]
    fn identity_is_degenerate() {
        let phi = PureState::basis(3, 0).unwrap();
        let r = build_superposition(&phi, &CMat::identity(3, 3), 2, SpaceKind::Fock, &tol());
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn overlap_examples() {
        let f = FockSpace::new(40).unwrap();
        let d = f.displacement(c64(2.0, 0.0), &tol()).unwrap();
        let z = overlap_z(f.vacuum().amplitudes(), &d);
        assert!((z.re - (-2.0f64).exp()).abs() < 1e-10);
        let th = std::f64::consts::FRAC_PI_3;
        let u =
            CMat::from_row_slice(2, 2, &[c64(th.cos(), 0.), c64(0., -th.sin()), c64(0., -th.sin()), c64(th.cos(), 0.)]);
        let z = overlap_z(PureState::basis(2, 0).unwrap().amplitudes(), &u);
        assert!((z - c64(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn named_examples() {
        let t = tol();
        let s = named_state(&NamedState::FockGhz { n: 2, n_modes: 2 }, 8, &t).unwrap();
        assert_eq!(s.z(), ZERO);
        let s = named_state(&NamedState::Hcs { alpha: 1.0, n_modes: 2 }, 30, &t).unwrap();
        assert!(s.z().norm() < 1e-12);
        let (alpha, xi) = (0.5f64, 0.3f64);
        let s = named_state(&NamedState::Psi2Plus { alpha, xi, n_modes: 2 }, 80, &t).unwrap();
        let want = (-2.0 * alpha * alpha * (2.0 * xi).exp()).exp();
        assert!((s.z().norm() - want).abs() < 1e-9);
        assert!((want - 0.4021).abs() < 1e-4);
        assert!(named_state(&NamedState::FockGhz { n: 8, n_modes: 2 }, 8, &t).is_err());
    }

    #[test]
    fn two_path_examples() {
        let sx = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let sy = CMat::from_row_slice(2, 2, &[ZERO, c64(0., -1.), c64(0., 1.), ZERO]);
        let u = two_path_reduce(&sx, &sy).unwrap();
        let want = CMat::from_row_slice(2, 2, &[c64(0., 1.), ZERO, ZERO, c64(0., -1.)]);
        assert!(crate::linalg::max_abs(&(u.clone() - want)) < 1e-15);
        let phi = PureState::basis(2, 0).unwrap();
        assert!(matches!(build_superposition(&phi, &u, 2, SpaceKind::Spin, &tol()), Err(Error::Degenerate(_))));
        assert_eq!(two_path_reduce(&sx, &sx).unwrap(), CMat::identity(2, 2));
    }

    #[test]
    fn full_branch_helstrom_matches_overlap() {
        let t = tol();
        let th = 0.4f64;
        let u =
            CMat::from_row_slice(2, 2, &[c64(th.cos(), 0.), c64(0., -th.sin()), c64(0., -th.sin()), c64(th.cos(), 0.)]);
        let s = build_superposition(&PureState::basis(2, 0).unwrap(), &u, 3, SpaceKind::Spin, &t).unwrap();
        let (a, b) = s.branch_states(&t).unwrap();
        let p = helstrom_probability(&a.to_density(), &b.to_density(), &t).unwrap();
        let want = 0.5 + 0.5 * (1.0 - s.z().norm_sqr().powi(3)).sqrt();
        assert!((p - want).abs() < 1e-12);
        let r = reduced_density(&a, &[0]).unwrap();
        assert!((r.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_moments_match_realized_vector() {
        let t = tol();
        let f = FockSpace::new(20).unwrap();
        let s = named_state(&NamedState::Ecs { alpha: 0.9, n_modes: 3 }, 20, &t).unwrap();
        let psi = s.psi(&t).unwrap();
        let x = f.quadrature(0.3);
        let nn = f.number();
        let total_x = crate::linalg::HermitianObservable::identical_one_local(&x, 3, &t).unwrap();
        let total_n = crate::linalg::HermitianObservable::identical_one_local(&nn, 3, &t).unwrap();
        let m = s.moments();
        assert!((m.mean(&nn) - psi.expectation(total_n.matrix())).norm() < 1e-10);
        assert!((m.variance(&x) - psi.variance(total_x.matrix())).abs() < 1e-10);
        let cross = psi.amplitudes().dotc(&(total_x.matrix() * (total_n.matrix() * psi.amplitudes())));
        assert!((m.second(&x, &nn) - cross).norm() < 1e-9);
    }

    #[test]
    fn iterated_sd_collapse() {
        let (beta, kmax) = iterated_sd_amplitude(0.3, 0.2);
        assert!((beta - 0.3 * 0.2f64.exp().exp()).abs() < 1e-12);
        assert!(kmax > 5);
        // a two-term product oracle at a modest truncation
        let t = tol();
        let f = FockSpace::new(60).unwrap();
        let u = iterated_sd_product(&f, 0.3, 0.2, 2, &t).unwrap();
        let partial = 0.3 * (1.0 + 0.2f64.exp() + (0.4f64).exp() / 2.0);
        let z = u[(0, 0)];
        assert!((z.norm() - (-partial * partial / 2.0).exp()).abs() < 1e-8);
    }

    #[test]
    fn phase_covariance_of_z() {
        let t = tol();
        let th = 0.7f64;
        let u =
            CMat::from_row_slice(2, 2, &[c64(th.cos(), 0.), c64(0., -th.sin()), c64(0., -th.sin()), c64(th.cos(), 0.)]);
        let phi = PureState::basis(2, 0).unwrap();
        let a = build_superposition(&phi, &u, 2, SpaceKind::Spin, &t).unwrap();
        let ph = C64::from_polar(1.0, 0.9);
        let b = build_superposition(&phi, &(u * ph), 2, SpaceKind::Spin, &t).unwrap();
        assert!((b.z() - a.z() * ph).norm() < 1e-15);
        assert!((b.z().norm() - a.z().norm()).abs() < 1e-15);
    }
}
