//! Quantum Fisher information and the Fisher-based sizes `N^F`, `N^rF`.
//!
//! Both sizes maximize a variance (or QFI) over a family of 1-local
//! observables `Σ_i A^{(i)}` with `A^{(i)} = Σ_k c_k B_k` drawn from an
//! [`AlgebraBasis`]. The objective is a quadratic form in the coefficients, so
//! the collective maximum is a largest-eigenvalue problem and the variant with
//! a pinned term (the `ℓ n̂` part of an `𝔥₄` Hamiltonian) is a trust-region
//! subproblem on the unit sphere.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{converge, suggested_dim, FockSpace, TruncationCertificate};
use crate::linalg::{
    apply_at_site, c64, eigh, ensure_capacity, hermiticity_defect, identity, kron, max_abs, CMat, CVec, DensityMatrix,
    HermitianObservable, PureState, C64, I, ONE, ZERO,
};
use crate::superposition::{named_state, GeneralSuperposition, NamedState, SpaceKind};
use crate::tolerance::Tolerances;

// ---------------------------------------------------------------------------
// Quantum Fisher information

/// QFI of `ρ` along `exp(−iHt)`.
///
/// Uses `2 Σ (p_j − p_k)² / (p_j + p_k) |⟨j|H|k⟩|²` over the eigenbasis of `ρ`,
/// skipping pairs with `p_j + p_k ≤ tol.psd`. For pure `ρ` this is `4 Var(H)`.
pub fn qfi(rho: &DensityMatrix, h: &HermitianObservable, tol: &Tolerances) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::Dimension(format!("state dim {} vs observable dim {}", rho.dim(), h.dim())));
    }
    let m = qfi_matrix(rho, std::slice::from_ref(h.matrix()), tol)?;
    Ok(m[(0, 0)].max(0.0))
}

/// `4 Var(H)` for a pure state.
pub fn qfi_pure(psi: &PureState, h: &HermitianObservable) -> Result<f64> {
    if psi.dim() != h.dim() {
        return Err(Error::Dimension(format!("state dim {} vs observable dim {}", psi.dim(), h.dim())));
    }
    Ok(4.0 * psi.variance(h.matrix()))
}

/// Real symmetric QFI matrix `F_kl` of the generators `ops`, so that the QFI
/// of `Σ c_k ops_k` is `cᵀ F c`.
pub fn qfi_matrix(rho: &DensityMatrix, ops: &[CMat], tol: &Tolerances) -> Result<DMatrix<f64>> {
    let eig = eigh(rho.matrix())?;
    let v = &eig.vectors;
    let p = &eig.values;
    let rotated: Vec<CMat> = ops.iter().map(|o| v.adjoint() * o * v).collect();
    let k = ops.len();
    let d = rho.dim();
    let mut f = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let mut acc = 0.0;
            for j in 0..d {
                for l in 0..d {
                    let s = p[j] + p[l];
                    if s <= tol.psd {
                        continue;
                    }
                    let w = (p[j] - p[l]).powi(2) / s;
                    if w == 0.0 {
                        continue;
                    }
                    acc += w * (rotated[a][(j, l)] * rotated[b][(l, j)]).re;
                }
            }
            f[(a, b)] = 2.0 * acc;
            f[(b, a)] = 2.0 * acc;
        }
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Observable families

/// Family identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    QubitBloch,
    H3,
    H4,
    /// `𝔥₄` Hamiltonians `n̂ + x^{(θ)}` with the frequency pinned to one.
    H4FixedL1,
    Sl2,
    Custom,
}

impl FamilyName {
    pub fn label(&self) -> &'static str {
        match self {
            FamilyName::QubitBloch => "qubit_bloch",
            FamilyName::H3 => "h3",
            FamilyName::H4 => "h4",
            FamilyName::H4FixedL1 => "h4_l1",
            FamilyName::Sl2 => "sl2",
            FamilyName::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "qubit" | "qubit_bloch" | "bloch" => FamilyName::QubitBloch,
            "h3" => FamilyName::H3,
            "h4" => FamilyName::H4,
            "h4_l1" | "h4l1" | "h4-l1" => FamilyName::H4FixedL1,
            "sl2" => FamilyName::Sl2,
            other => return Err(Error::Argument(format!("unknown algebra family '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    OperatorNormOne,
    CoefficientNormOne,
}

/// Single-mode Hermitian basis `{B_k}` spanning the maximization family, with
/// an optional pinned term entering every member with unit weight.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    name: FamilyName,
    ops: Vec<CMat>,
    labels: Vec<String>,
    fixed: Option<(String, CMat)>,
    normalization: Normalization,
    unbounded: bool,
}

impl AlgebraBasis {
    /// Pauli matrices; members `n·σ` with `|n| = 1` have unit operator norm.
    pub fn qubit_bloch() -> Self {
        let sx = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let sy = CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
        let sz = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        Self {
            name: FamilyName::QubitBloch,
            ops: vec![sx, sy, sz],
            labels: vec!["sigma_x".into(), "sigma_y".into(), "sigma_z".into()],
            fixed: None,
            normalization: Normalization::OperatorNormOne,
            unbounded: false,
        }
    }

    /// Quadratures `x^{(0)}`, `x^{(π/2)}`.
    pub fn h3(space: &FockSpace) -> Self {
        Self {
            name: FamilyName::H3,
            ops: vec![space.quadrature(0.0), space.quadrature(std::f64::consts::FRAC_PI_2)],
            labels: vec!["x0".into(), "x_pi/2".into()],
            fixed: None,
            normalization: Normalization::CoefficientNormOne,
            unbounded: true,
        }
    }

    /// `{n̂, x^{(0)}, x^{(π/2)}, I}`.
    pub fn h4(space: &FockSpace) -> Self {
        Self {
            name: FamilyName::H4,
            ops: vec![
                space.number(),
                space.quadrature(0.0),
                space.quadrature(std::f64::consts::FRAC_PI_2),
                space.identity(),
            ],
            labels: vec!["n".into(), "x0".into(), "x_pi/2".into(), "identity".into()],
            fixed: None,
            normalization: Normalization::CoefficientNormOne,
            unbounded: true,
        }
    }

    /// `L(1, β) = n̂ + (β̄a + βa†)/√2` with `|β| = 1`.
    pub fn h4_fixed_l1(space: &FockSpace) -> Self {
        Self {
            name: FamilyName::H4FixedL1,
            ops: vec![space.quadrature(0.0), space.quadrature(std::f64::consts::FRAC_PI_2)],
            labels: vec!["x0".into(), "x_pi/2".into()],
            fixed: Some(("n".into(), space.number())),
            normalization: Normalization::CoefficientNormOne,
            unbounded: true,
        }
    }

    /// `{(2n̂+1)/4, Π(a² + a†²)/2, iΠ(a² − a†²)/2}` with `Π = exp(iπn̂)`.
    pub fn sl2(space: &FockSpace) -> Self {
        let (k0, kx, ky) = sl2_elements(space);
        Self {
            name: FamilyName::Sl2,
            ops: vec![k0, kx, ky],
            labels: vec!["(2n+1)/4".into(), "Pi(a^2+a^2dag)/2".into(), "iPi(a^2-a^2dag)/2".into()],
            fixed: None,
            normalization: Normalization::CoefficientNormOne,
            unbounded: true,
        }
    }

    /// A user basis. Operator-norm normalization is accepted only for bases
    /// of anticommuting involutions, where `‖Σ c_k B_k‖ = |c|`.
    pub fn custom(ops: Vec<CMat>, labels: Vec<String>, normalization: Normalization, tol: &Tolerances) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Argument("algebra basis must be nonempty".into()));
        }
        if labels.len() != ops.len() {
            return Err(Error::Argument("one label per basis operator".into()));
        }
        let d = ops[0].nrows();
        for o in &ops {
            if o.shape() != (d, d) {
                return Err(Error::Dimension("basis operators must share one square shape".into()));
            }
            let defect = hermiticity_defect(o);
            if defect > tol.herm {
                return Err(Error::Validation(format!("basis operator not Hermitian (defect {defect:.3e})")));
            }
        }
        let basis = Self { name: FamilyName::Custom, ops, labels, fixed: None, normalization, unbounded: false };
        if normalization == Normalization::OperatorNormOne && !basis.is_clifford(tol) {
            return Err(Error::Normalization(
                "operator_norm_one is only solvable for anticommuting involutions; use coefficient_norm_one".into(),
            ));
        }
        Ok(basis)
    }

    /// Builds the named family on `space`.
    pub fn for_space(name: FamilyName, space: &FockSpace) -> Result<Self> {
        Ok(match name {
            FamilyName::QubitBloch => Self::qubit_bloch(),
            FamilyName::H3 => Self::h3(space),
            FamilyName::H4 => Self::h4(space),
            FamilyName::H4FixedL1 => Self::h4_fixed_l1(space),
            FamilyName::Sl2 => Self::sl2(space),
            FamilyName::Custom => return Err(Error::Argument("custom families must be built explicitly".into())),
        })
    }

    /// Same family with a different normalization. Unbounded families reject
    /// `OperatorNormOne`, since no maximum exists under it.
    pub fn with_normalization(mut self, normalization: Normalization) -> Result<Self> {
        if normalization == Normalization::OperatorNormOne && self.unbounded {
            return Err(Error::Normalization(format!(
                "{} is unbounded: the variance grows without limit under operator_norm_one",
                self.name.label()
            )));
        }
        self.normalization = normalization;
        Ok(self)
    }

    fn is_clifford(&self, tol: &Tolerances) -> bool {
        let d = self.dim();
        let id = identity(d);
        self.ops.iter().enumerate().all(|(k, a)| {
            max_abs(&(a * a - &id)) < tol.num && self.ops[k + 1..].iter().all(|b| max_abs(&(a * b + b * a)) < tol.num)
        })
    }

    pub fn name(&self) -> FamilyName {
        self.name
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn fixed(&self) -> Option<&(String, CMat)> {
        self.fixed.as_ref()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// True when raw `N^F` values depend on the chosen coefficient scale.
    pub fn normalization_dependent(&self) -> bool {
        self.unbounded
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// Fixed term first (if any), then the free basis.
    fn all_ops(&self) -> Vec<&CMat> {
        self.fixed.iter().map(|(_, m)| m).chain(self.ops.iter()).collect()
    }

    /// `Σ_k c_k B_k` plus the pinned term.
    pub fn member(&self, coeffs: &[f64]) -> CMat {
        let mut m = match &self.fixed {
            Some((_, f)) => f.clone(),
            None => CMat::zeros(self.dim(), self.dim()),
        };
        for (c, b) in coeffs.iter().zip(&self.ops) {
            m += b * c64(*c, 0.0);
        }
        m
    }
}

/// The three `𝔰𝔩(2)` elements `(2n̂+1)/4`, `Π(a²+a†²)/2`, `iΠ(a²−a†²)/2`.
pub fn sl2_elements(space: &FockSpace) -> (CMat, CMat, CMat) {
    let a = space.annihilation();
    let a2 = &a * &a;
    let pi = space.parity();
    let lower = &pi * &a2;
    let raise = lower.adjoint();
    let k0 = (space.number() * c64(2.0, 0.0) + space.identity()) * c64(0.25, 0.0);
    let kx = (&lower + &raise) * c64(0.5, 0.0);
    let ky = (&lower - &raise) * c64(0.0, 0.5);
    (k0, kx, ky)
}

// ---------------------------------------------------------------------------
// Quadratic maximization

/// Maximizer of `xᵀQx + 2gᵀx` on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMax {
    pub x: DVector<f64>,
    pub value: f64,
    /// Multiplier `μ` with `(Q − μI)x = −g`.
    pub multiplier: f64,
    pub residual: f64,
}

/// Solves the trust-region subproblem exactly through the secular equation
/// `Σ g̃_i² / (μ − λ_i)² = 1`, `μ ≥ λ_max`, handling the hard case.
pub fn max_quadratic_on_sphere(q: &DMatrix<f64>, g: &DVector<f64>) -> SphereMax {
    let k = q.nrows();
    let sym = (q + q.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    let lam = &eig.eigenvalues;
    let v = &eig.eigenvectors;
    let top = (0..k).fold(0, |b, i| if lam[i] > lam[b] { i } else { b });
    let lmax = lam[top];
    let gp = v.transpose() * g;
    let scale = lam.amax().max(g.norm()).max(1.0);
    let near = |i: usize| lmax - lam[i] <= 1e-12 * scale;
    let g_top: f64 = (0..k).filter(|&i| near(i)).map(|i| gp[i] * gp[i]).sum::<f64>().sqrt();

    let x_at = |mu: f64| -> DVector<f64> {
        let mut c = DVector::zeros(k);
        for i in 0..k {
            if mu - lam[i] > 0.0 {
                c[i] = gp[i] / (mu - lam[i]);
            }
        }
        v * c
    };

    let (x, mu) = if g_top <= 1e-14 * scale {
        let rest = {
            let mut c = DVector::zeros(k);
            for i in (0..k).filter(|&i| !near(i)) {
                c[i] = gp[i] / (lmax - lam[i]);
            }
            c
        };
        let rn = rest.norm();
        if rn <= 1.0 {
            let tau = (1.0 - rn * rn).max(0.0).sqrt();
            let x = v * rest + v.column(top) * tau;
            (x, lmax)
        } else {
            secular(lam, &gp, lmax, g.norm(), &x_at)
        }
    } else {
        secular(lam, &gp, lmax, g.norm(), &x_at)
    };
    let x = if x.norm() > 0.0 { &x / x.norm() } else { x };
    let value = (x.transpose() * &sym * &x)[(0, 0)] + 2.0 * g.dot(&x);
    let residual = (&sym * &x - &x * mu + g).norm();
    SphereMax { x, value, multiplier: mu, residual }
}

fn secular(
    lam: &DVector<f64>,
    gp: &DVector<f64>,
    lmax: f64,
    gnorm: f64,
    x_at: &dyn Fn(f64) -> DVector<f64>,
) -> (DVector<f64>, f64) {
    let phi = |mu: f64| -> f64 { (0..lam.len()).map(|i| (gp[i] / (mu - lam[i])).powi(2)).sum::<f64>() - 1.0 };
    let (mut lo, mut hi) = (lmax, lmax + gnorm.max(f64::MIN_POSITIVE));
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (x_at(hi), hi)
}

/// Quadratic objective over per-mode coefficient blocks:
/// `f(c) = cᵀGc + 2hᵀc + f₀`, with `c` split into `n` blocks of length `k`.
#[derive(Debug, Clone)]
pub struct ModeQuadratic {
    pub n: usize,
    pub k: usize,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub f0: f64,
}

impl ModeQuadratic {
    /// From a full `(n·k')²` matrix over `[fixed?, B_1..B_k]` per mode.
    fn from_full(m: &DMatrix<f64>, n: usize, pinned: bool) -> Self {
        let kp = m.nrows() / n;
        let off = usize::from(pinned);
        let k = kp - off;
        let idx = |i: usize, l: usize| i * kp + off + l;
        let g = DMatrix::from_fn(n * k, n * k, |r, c| m[(idx(r / k, r % k), idx(c / k, c % k))]);
        let (h, f0) = if pinned {
            let h = DVector::from_fn(n * k, |r, _| (0..n).map(|j| m[(j * kp, idx(r / k, r % k))]).sum());
            let f0 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[(i * kp, j * kp)]).sum();
            (h, f0)
        } else {
            (DVector::zeros(n * k), 0.0)
        };
        Self { n, k, g, h, f0 }
    }

    fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.g.view((i * self.k, j * self.k), (self.k, self.k)).into_owned()
    }

    pub fn value(&self, c: &DVector<f64>) -> f64 {
        (c.transpose() * &self.g * c)[(0, 0)] + 2.0 * self.h.dot(c) + self.f0
    }

    /// Same coefficients on every mode: exact solution.
    pub fn maximize_identical(&self) -> (DVector<f64>, f64, f64) {
        let mut q = DMatrix::zeros(self.k, self.k);
        let mut g = DVector::zeros(self.k);
        for i in 0..self.n {
            for j in 0..self.n {
                q += self.block(i, j);
            }
            g += self.h.rows(i * self.k, self.k);
        }
        let s = max_quadratic_on_sphere(&q, &g);
        (s.x, s.value + self.f0, s.residual)
    }

    /// Block coordinate ascent from the identical optimum; each block update
    /// is an exact sphere subproblem. Returns `(coefficients, value, sweeps)`.
    pub fn maximize_independent(&self, max_sweeps: usize) -> (DVector<f64>, f64, usize) {
        let (x0, _, _) = self.maximize_identical();
        let mut c = DVector::from_fn(self.n * self.k, |r, _| x0[r % self.k]);
        let mut val = self.value(&c);
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            sweeps += 1;
            for i in 0..self.n {
                let q = self.block(i, i);
                let mut g = self.h.rows(i * self.k, self.k).into_owned();
                for j in (0..self.n).filter(|&j| j != i) {
                    g += self.block(i, j) * c.rows(j * self.k, self.k);
                }
                let s = max_quadratic_on_sphere(&q, &g);
                c.rows_mut(i * self.k, self.k).copy_from(&s.x);
            }
            let new = self.value(&c);
            let gain = new - val;
            val = new.max(val);
            if gain <= 1e-14 * val.abs().max(1.0) {
                break;
            }
        }
        (c, val, sweeps)
    }
}

// ---------------------------------------------------------------------------
// N^F

/// Options for the family maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaximizeOptions {
    /// Allow each mode its own coefficients (coordinate ascent).
    pub per_mode_independent: bool,
    pub max_sweeps: usize,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self { per_mode_independent: false, max_sweeps: 500 }
    }
}

/// The maximizing 1-local observable as per-mode basis coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxObservable {
    pub family: FamilyName,
    pub labels: Vec<String>,
    pub fixed_term: Option<String>,
    /// One coefficient vector per mode.
    pub coefficients: Vec<Vec<f64>>,
}

impl ArgmaxObservable {
    pub fn single_mode_term(&self, basis: &AlgebraBasis, mode: usize) -> CMat {
        basis.member(&self.coefficients[mode])
    }

    /// Assembles `Σ_i A^{(i)}` on the full space.
    pub fn to_observable(&self, basis: &AlgebraBasis, tol: &Tolerances) -> Result<HermitianObservable> {
        let parts = (0..self.coefficients.len()).map(|i| self.single_mode_term(basis, i)).collect();
        HermitianObservable::one_local_sum(parts, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerCertificate {
    pub method: String,
    pub residual: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfResult {
    /// `max QFI / (4N)`.
    pub value: f64,
    pub argmax: ArgmaxObservable,
    pub certificate: OptimizerCertificate,
    pub normalization_dependent: bool,
}

fn solve_family(full: &DMatrix<f64>, n: usize, basis: &AlgebraBasis, opts: &MaximizeOptions) -> NfResult {
    let mq = ModeQuadratic::from_full(full, n, basis.fixed.is_some());
    let (coeffs, value, cert) = if opts.per_mode_independent && n > 1 {
        let (c, v, sweeps) = mq.maximize_independent(opts.max_sweeps);
        let res = block_residual(&mq, &c);
        (c, v, OptimizerCertificate { method: "block_coordinate_ascent".into(), residual: res, sweeps })
    } else {
        let (x, v, res) = mq.maximize_identical();
        let c = DVector::from_fn(n * mq.k, |r, _| x[r % mq.k]);
        let method = if basis.fixed.is_some() { "secular_equation" } else { "largest_eigenvalue" };
        (c, v, OptimizerCertificate { method: method.into(), residual: res, sweeps: 0 })
    };
    let coefficients = (0..n).map(|i| coeffs.rows(i * mq.k, mq.k).iter().copied().collect()).collect();
    NfResult {
        value: value.max(0.0) / n as f64,
        argmax: ArgmaxObservable {
            family: basis.name,
            labels: basis.labels.clone(),
            fixed_term: basis.fixed.as_ref().map(|(l, _)| l.clone()),
            coefficients,
        },
        certificate: cert,
        normalization_dependent: basis.normalization_dependent(),
    }
}

/// Largest per-block stationarity defect, projected onto the sphere tangent.
fn block_residual(mq: &ModeQuadratic, c: &DVector<f64>) -> f64 {
    let grad = &mq.g * c + &mq.h;
    (0..mq.n)
        .map(|i| {
            let gi = grad.rows(i * mq.k, mq.k);
            let ci = c.rows(i * mq.k, mq.k);
            (gi - ci * gi.dot(&ci)).norm()
        })
        .fold(0.0, f64::max)
}

/// State accepted by [`nf_measure`].
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityMatrix),
}

impl StateRef<'_> {
    fn dims(&self) -> &[usize] {
        match self {
            StateRef::Pure(p) => p.dims(),
            StateRef::Mixed(m) => m.dims(),
        }
    }
}

/// Largest dimension for which mixed-state operators are built explicitly.
pub const MIXED_OPERATOR_DIM: usize = 1024;

/// `N^F = max ħ² F(ρ, Σ_i A^{(i)}) / (4N)` over the family.
pub fn nf_measure(
    state: StateRef<'_>,
    basis: &AlgebraBasis,
    opts: &MaximizeOptions,
    tol: &Tolerances,
) -> Result<NfResult> {
    check_normalization(basis)?;
    let dims = state.dims().to_vec();
    let n = dims.len();
    let d = basis.dim();
    if dims.iter().any(|&x| x != d) {
        return Err(Error::Dimension(format!("state factors {dims:?} do not match basis dimension {d}")));
    }
    let ops = basis.all_ops();
    let full = match state {
        StateRef::Pure(psi) => {
            let v = psi.amplitudes();
            let w: Vec<CVec> = (0..n).flat_map(|i| ops.iter().map(move |b| apply_at_site(b, v, d, n, i))).collect();
            let means: Vec<f64> = w.iter().map(|x| v.dotc(x).re).collect();
            DMatrix::from_fn(w.len(), w.len(), |r, c| w[r].dotc(&w[c]).re - means[r] * means[c])
        }
        StateRef::Mixed(rho) => {
            let total = rho.dim();
            if total > MIXED_OPERATOR_DIM {
                return Err(Error::Capacity { requested: total, limit: MIXED_OPERATOR_DIM });
            }
            ensure_capacity(total, tol)?;
            let mut mats = Vec::with_capacity(n * ops.len());
            for i in 0..n {
                let left = d.pow(i as u32);
                let right = d.pow((n - 1 - i) as u32);
                for b in &ops {
                    mats.push(kron(&kron(&identity(left), b), &identity(right)));
                }
            }
            qfi_matrix(rho, &mats, tol)? * 0.25
        }
    };
    Ok(solve_family(&full, n, basis, opts))
}

fn check_normalization(basis: &AlgebraBasis) -> Result<()> {
    if basis.normalization == Normalization::OperatorNormOne && basis.unbounded {
        return Err(Error::Normalization(format!("{} has no maximum under operator_norm_one", basis.name.label())));
    }
    Ok(())
}

/// Single-mode covariance matrix `Re⟨B_k B_l⟩ − ⟨B_k⟩⟨B_l⟩` in `|v⟩/‖v‖`.
fn single_mode_covariance(v: &CVec, ops: &[&CMat]) -> DMatrix<f64> {
    let nv = v.norm_squared();
    let w: Vec<CVec> = ops.iter().map(|b| *b * v).collect();
    let means: Vec<f64> = w.iter().map(|x| v.dotc(x).re / nv).collect();
    DMatrix::from_fn(ops.len(), ops.len(), |r, c| w[r].dotc(&w[c]).re / nv - means[r] * means[c])
}

/// Full per-mode covariance of a permutation-symmetric state from its
/// same-mode and cross-mode blocks.
fn assemble_symmetric(same: &DMatrix<f64>, cross: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let k = same.nrows();
    DMatrix::from_fn(n * k, n * k, |r, c| if r / k == c / k { same[(r % k, c % k)] } else { cross[(r % k, c % k)] })
}

/// Same-mode and cross-mode covariance blocks of `|Ψ⟩` from analytic moments.
fn superposition_blocks(state: &GeneralSuperposition, ops: &[&CMat]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = state.n_modes() as f64;
    let mo = state.moments();
    let k = ops.len();
    let mean: Vec<f64> = ops.iter().map(|b| mo.mean(b).re / n).collect();
    let mut same = DMatrix::zeros(k, k);
    let mut cross = DMatrix::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            let prod = ops[r] * ops[c];
            let local = mo.mean(&prod).re;
            same[(r, c)] = local / n - mean[r] * mean[c];
            if state.n_modes() > 1 {
                let pair = mo.second(ops[r], ops[c]).re - local;
                cross[(r, c)] = pair / (n * (n - 1.0)) - mean[r] * mean[c];
            }
        }
    }
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    (sym(same), sym(cross))
}

/// Variance of one basis element (as a collective operator) in `|Ψ⟩` and the
/// two branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub variance_superposition: f64,
    pub variance_branch_mean: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RFResult {
    pub family: FamilyName,
    pub normalization: Normalization,
    pub nf_superposition: f64,
    pub nf_branches: [f64; 2],
    pub nf_branch_mean: f64,
    pub nrf: f64,
    pub argmax_observable: ArgmaxObservable,
    pub branch_argmax: [ArgmaxObservable; 2],
    pub optimizer_certificate: OptimizerCertificate,
    /// Raw `N^F` values depend on the coefficient scale for unbounded families;
    /// the ratio `nrf` does not.
    pub normalization_dependent: bool,
    pub witnesses: Vec<Witness>,
}

/// `N^rF = N^F(Ψ) / ½(N^F(Φ) + N^F(VΦ))`, all over the same family, using
/// closed-form product moments (no `D^N` vectors are formed).
pub fn nrf_measure(state: &GeneralSuperposition, basis: &AlgebraBasis, opts: &MaximizeOptions) -> Result<RFResult> {
    check_normalization(basis)?;
    if basis.dim() != state.local_dim() {
        return Err(Error::Dimension(format!("basis dim {} vs mode dim {}", basis.dim(), state.local_dim())));
    }
    let n = state.n_modes();
    let ops = basis.all_ops();
    let (same, cross) = superposition_blocks(state, &ops);
    let sup = solve_family(&assemble_symmetric(&same, &cross, n), n, basis, opts);
    let zero = DMatrix::zeros(ops.len(), ops.len());
    let b1 = solve_family(&assemble_symmetric(&single_mode_covariance(state.phi(), &ops), &zero, n), n, basis, opts);
    let b2 = solve_family(&assemble_symmetric(&single_mode_covariance(state.u_phi(), &ops), &zero, n), n, basis, opts);
    let mean = 0.5 * (b1.value + b2.value);
    if mean <= 0.0 {
        return Err(Error::Numerical("branch N^F vanishes: N^rF undefined for this family".into()));
    }
    let witnesses = basis
        .labels
        .iter()
        .zip(&basis.ops)
        .map(|(label, b)| {
            let vs = state.moments().variance(b);
            let v1 = n as f64 * single_mode_covariance(state.phi(), &[b])[(0, 0)];
            let v2 = n as f64 * single_mode_covariance(state.u_phi(), &[b])[(0, 0)];
            let vm = 0.5 * (v1 + v2);
            Witness {
                label: label.clone(),
                variance_superposition: vs,
                variance_branch_mean: vm,
                ratio: if vm > 0.0 { vs / vm } else { f64::INFINITY },
            }
        })
        .collect();
    let residual = sup.certificate.residual.max(b1.certificate.residual).max(b2.certificate.residual);
    Ok(RFResult {
        family: basis.name,
        normalization: basis.normalization,
        nf_superposition: sup.value,
        nf_branches: [b1.value, b2.value],
        nf_branch_mean: mean,
        nrf: sup.value / mean,
        argmax_observable: sup.argmax,
        branch_argmax: [b1.argmax, b2.argmax],
        optimizer_certificate: OptimizerCertificate {
            method: sup.certificate.method,
            residual,
            sweeps: sup.certificate.sweeps.max(b1.certificate.sweeps).max(b2.certificate.sweeps),
        },
        normalization_dependent: basis.normalization_dependent(),
        witnesses,
    })
}

/// [`nrf_measure`] on the realized `|Ψ⟩` and branch vectors, for cross-checks.
pub fn nrf_measure_explicit(
    state: &GeneralSuperposition,
    basis: &AlgebraBasis,
    opts: &MaximizeOptions,
    tol: &Tolerances,
) -> Result<(f64, f64, f64)> {
    let psi = state.psi(tol)?;
    let (a, b) = state.branch_states(tol)?;
    let s = nf_measure(StateRef::Pure(&psi), basis, opts, tol)?.value;
    let fa = nf_measure(StateRef::Pure(&a), basis, opts, tol)?.value;
    let fb = nf_measure(StateRef::Pure(&b), basis, opts, tol)?.value;
    Ok((s, 0.5 * (fa + fb), s / (0.5 * (fa + fb))))
}

/// Realizes `spec` and the family at a truncation where `nrf` is stable.
pub fn nrf_named(
    spec: &NamedState,
    family: FamilyName,
    opts: &MaximizeOptions,
    tol: &Tolerances,
) -> Result<(RFResult, Option<TruncationCertificate>)> {
    if spec.space_kind() == SpaceKind::Spin {
        if family != FamilyName::QubitBloch {
            return Err(Error::Argument(format!("{} is not defined on qubits", family.label())));
        }
        let s = named_state(spec, 2, tol)?;
        return Ok((nrf_measure(&s, &AlgebraBasis::qubit_bloch(), opts)?, None));
    }
    if family == FamilyName::QubitBloch {
        return Err(Error::Argument("qubit_bloch needs a spin state".into()));
    }
    let mut d0 = suggested_dim(spec.photon_scale());
    if let NamedState::FockGhz { n, .. } = spec {
        d0 = d0.max(n + 3);
    }
    let (_, cert) = converge(d0, tol, |f| {
        let s = named_state(spec, f.dim(), tol)?;
        let r = nrf_measure(&s, &AlgebraBasis::for_space(family, f)?, opts)?;
        Ok(vec![r.nrf, r.nf_superposition, r.nf_branch_mean])
    })?;
    let f = FockSpace::new(cert.dim)?;
    let s = named_state(spec, cert.dim, tol)?;
    Ok((nrf_measure(&s, &AlgebraBasis::for_space(family, &f)?, opts)?, Some(cert)))
}

/// `Nn / (4(1 + 1/n)) + ½`, the printed FockGHZ value for `L(1, β)`.
pub fn fock_ghz_nrf_printed(n: usize, n_modes: usize) -> f64 {
    let (n, m) = (n as f64, n_modes as f64);
    m * n / (4.0 * (1.0 + 1.0 / n)) + 0.5
}

/// `Nn / (2(1 + 1/n)) + 1`, the value of the definition for `L(1, β)`.
pub fn fock_ghz_nrf_computed(n: usize, n_modes: usize) -> f64 {
    let (n, m) = (n as f64, n_modes as f64);
    m * n / (2.0 * (1.0 + 1.0 / n)) + 1.0
}

/// `N|α|² tanh(N|α|²) + |α|² + 1/(2N)`, the printed lower bound for ECS.
pub fn ecs_h3_bound(alpha: f64, n_modes: usize) -> f64 {
    let m = n_modes as f64;
    let a2 = alpha * alpha;
    m * a2 * (m * a2).tanh() + a2 + 0.5 / m
}

// ---------------------------------------------------------------------------
// Projector-difference observable

/// `A = P₊ − P₋` from the `±√(1−|z|²)` eigenvectors of `|φ⟩⟨φ| − U|φ⟩⟨φ|U†`.
pub fn projector_single_mode(phi: &CVec, u_phi: &CVec, tol: &Tolerances) -> Result<CMat> {
    let z = phi.dotc(u_phi);
    let s = (1.0 - z.norm_sqr()).max(0.0).sqrt();
    if s <= tol.num {
        return Err(Error::Degenerate(z.norm()));
    }
    let diff = phi * phi.adjoint() - u_phi * u_phi.adjoint();
    let eig = eigh(&diff)?;
    let d = phi.len();
    let (lo, hi) = (eig.values[0], eig.values[d - 1]);
    if (hi - s).abs() > 1e-8 || (lo + s).abs() > 1e-8 {
        return Err(Error::Numerical(format!("difference spectrum {lo}, {hi} does not match ±{s}")));
    }
    let vp = eig.vectors.column(d - 1).into_owned();
    let vm = eig.vectors.column(0).into_owned();
    Ok(&vp * vp.adjoint() - &vm * vm.adjoint())
}

/// Closed form `(|φ⟩⟨φ| − U|φ⟩⟨φ|U†)/√(1−|z|²)`, used as a cross-check.
pub fn projector_single_mode_closed_form(phi: &CVec, u_phi: &CVec) -> Result<CMat> {
    let z = phi.dotc(u_phi);
    let s = (1.0 - z.norm_sqr()).max(0.0).sqrt();
    if s == 0.0 {
        return Err(Error::Degenerate(z.norm()));
    }
    Ok((phi * phi.adjoint() - u_phi * u_phi.adjoint()).unscale(s))
}

/// `Σ_i A^{(i)}` on the full `D^N` space.
pub fn projector_observable(state: &GeneralSuperposition, tol: &Tolerances) -> Result<HermitianObservable> {
    let a = projector_single_mode(state.phi(), state.u_phi(), tol)?;
    HermitianObservable::identical_one_local(&a, state.n_modes(), tol)
}

/// `[N²(1−|z|²) + N|z|² + N Re z^N] / (1 + Re z^N)`, the variance of the
/// projector-difference observable.
pub fn projector_variance(z: C64, n: usize) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::Degenerate(z.norm()));
    }
    let nf = n as f64;
    let zn = z.powu(n as u32).re;
    Ok((nf * nf * (1.0 - z.norm_sqr()) + nf * z.norm_sqr() + nf * zn) / (1.0 + zn))
}

/// The printed form `[N²(1−|z|²) + N(|z|² + Re z)] / (1 + Re z^N)`.
pub fn projector_variance_printed(z: C64, n: usize) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::Degenerate(z.norm()));
    }
    let nf = n as f64;
    let zn = z.powu(n as u32).re;
    Ok((nf * nf * (1.0 - z.norm_sqr()) + nf * (z.norm_sqr() + z.re)) / (1.0 + zn))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorVarianceCheck {
    pub n_modes: usize,
    pub z: (f64, f64),
    pub formula_printed: f64,
    pub formula_corrected: f64,
    /// `⟨A²⟩ − ⟨A⟩²` from the realized `|Ψ⟩`.
    pub numeric: f64,
    pub mean: f64,
    pub deviation_printed: f64,
    pub deviation_corrected: f64,
}

/// Direct variance of the constructed observable in the realized `|Ψ⟩`
/// against both formulas.
pub fn projector_variance_check(state: &GeneralSuperposition, tol: &Tolerances) -> Result<ProjectorVarianceCheck> {
    let a = projector_single_mode(state.phi(), state.u_phi(), tol)?;
    let psi = state.psi(tol)?;
    let (d, n) = (state.local_dim(), state.n_modes());
    let av = crate::linalg::apply_one_local(&a, psi.amplitudes(), d, n);
    let mean = psi.amplitudes().dotc(&av).re;
    let numeric = av.norm_squared() - mean * mean;
    let printed = projector_variance_printed(state.z(), n)?;
    let corrected = projector_variance(state.z(), n)?;
    Ok(ProjectorVarianceCheck {
        n_modes: n,
        z: (state.z().re, state.z().im),
        formula_printed: printed,
        formula_corrected: corrected,
        numeric,
        mean,
        deviation_printed: (printed - numeric).abs(),
        deviation_corrected: (corrected - numeric).abs(),
    })
}

// ---------------------------------------------------------------------------
// Weak equivalences

/// `P_K O P_K` in the basis `(e₀, e₁)`.
pub fn compress_observable(o: &CMat, e0: &PureState, e1: &PureState, tol: &Tolerances) -> Result<CMat> {
    if e0.dim() != o.nrows() || e1.dim() != o.nrows() {
        return Err(Error::Dimension("subspace vectors do not match the observable".into()));
    }
    let g = [e0.inner(e0) - ONE, e1.inner(e1) - ONE, e0.inner(e1)];
    if g.iter().any(|x| x.norm() > tol.num) {
        return Err(Error::Validation("subspace basis is not orthonormal".into()));
    }
    let b = [e0.amplitudes(), e1.amplitudes()];
    Ok(CMat::from_fn(2, 2, |r, c| b[r].dotc(&(o * b[c]))))
}

/// The three distinguishing problems with a compressed POVM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum PovmCase {
    Ecs { alpha: f64 },
    Fock { n: usize },
    Hcs { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmCheck {
    pub case: PovmCase,
    pub dim: usize,
    /// Max deviation between the projector pair and the printed compression.
    pub deviation_printed: f64,
    /// Same with the compression coefficient re-derived.
    pub deviation_corrected: f64,
    pub printed_coefficient: f64,
    pub corrected_coefficient: f64,
    /// `c` with `P₊ − P₋ = c P_K O P_K`.
    pub c: f64,
    /// Compression of `O` minus `(P₊ − P₋)/c`.
    pub witness_deviation: f64,
    pub variance_gain_samples: usize,
    /// Smallest `Var(O) − Var(P₊−P₋)/c²` over the samples (≥ 0 when the
    /// inequality holds).
    pub variance_gain_min_margin: f64,
}

struct PovmPieces {
    e: (PureState, PureState),
    proj: (CMat, CMat),
    printed: (CMat, CMat),
    corrected: (CMat, CMat),
    printed_coefficient: f64,
    corrected_coefficient: f64,
    witness: CMat,
    c: f64,
}

fn povm_pieces(case: PovmCase, f: &FockSpace, tol: &Tolerances) -> Result<PovmPieces> {
    let a = f.annihilation();
    let ad = a.adjoint();
    let cplx = |m: f64| c64(m, 0.0);
    match case {
        PovmCase::Ecs { alpha } => {
            let al = c64(alpha, 0.0);
            if alpha == 0.0 {
                return Err(Error::Argument("ECS case needs α ≠ 0".into()));
            }
            let (p, m) = f.cat_pair(al, tol)?;
            let (ph, r) = (al.arg(), al.norm());
            let e2 = C64::from_polar(1.0, 2.0 * ph);
            let e1 = C64::from_polar(1.0, ph);
            let quad2 = (&a * &a * e2.conj() + &ad * &ad * e2).unscale(4.0 * r * r);
            let lin = (&a * e1.conj() + &ad * e1).unscale(4.0 * r);
            let e4 = (-4.0 * r * r).exp();
            let (cp, cc) = ((1.0 + e4).sqrt(), (1.0 - e4).sqrt());
            let plus = (p.amplitudes() + m.amplitudes()) * cplx(std::f64::consts::FRAC_1_SQRT_2);
            let minus = (p.amplitudes() - m.amplitudes()) * cplx(std::f64::consts::FRAC_1_SQRT_2);
            let proj = (&plus * plus.adjoint(), &minus * minus.adjoint());
            Ok(PovmPieces {
                printed: (&quad2 + &lin * cplx(cp), &quad2 - &lin * cplx(cp)),
                corrected: (&quad2 + &lin * cplx(cc), &quad2 - &lin * cplx(cc)),
                printed_coefficient: cp,
                corrected_coefficient: cc,
                witness: f.quadrature(ph),
                c: (0.5 - 0.5 * e4).sqrt() / r,
                e: (p, m),
                proj,
            })
        }
        PovmCase::Fock { n } => {
            if n == 0 || n + 1 >= f.dim() {
                return Err(Error::Argument(format!("Fock case needs 0 < n < D − 1 (n = {n}, D = {})", f.dim())));
            }
            let e0 = f.number_state(0)?;
            let en = f.number_state(n)?;
            let num = f.number().unscale(n as f64);
            let id = f.identity();
            let proj = (en.amplitudes() * en.amplitudes().adjoint(), e0.amplitudes() * e0.amplitudes().adjoint());
            let pair = (num.clone(), &id - &num);
            Ok(PovmPieces {
                printed: pair.clone(),
                corrected: pair,
                printed_coefficient: 1.0,
                corrected_coefficient: 1.0,
                witness: f.number() * cplx(2.0) - id * cplx(n as f64),
                c: 1.0 / n as f64,
                e: (en, e0),
                proj,
            })
        }
        PovmCase::Hcs { alpha } => {
            let al = c64(alpha, 0.0);
            let re2 = (al * al).re;
            if re2 == 0.0 {
                return Err(Error::Argument("HCS case needs Re(α²) ≠ 0".into()));
            }
            let (p, m) = f.cat_pair(al, tol)?;
            let pi = f.parity();
            let o = &pi * &a * &a + &ad * &ad * &pi;
            let id = f.identity();
            let half = &id * cplx(0.5);
            let proj = (p.amplitudes() * p.amplitudes().adjoint(), m.amplitudes() * m.amplitudes().adjoint());
            let printed_term = o.unscale(2.0 * re2);
            let corrected_term = o.unscale(4.0 * re2);
            Ok(PovmPieces {
                printed: (&half + &printed_term, &half - &printed_term),
                corrected: (&half + &corrected_term, &half - &corrected_term),
                printed_coefficient: 2.0 * re2,
                corrected_coefficient: 4.0 * re2,
                witness: o,
                c: 1.0 / (2.0 * re2),
                e: (p, m),
                proj,
            })
        }
    }
}

/// Compares the projector POVM with its compressed forms on `K`, and checks
/// `Var(O) ≥ Var(P₊ − P₋)/c²` on `samples` random states of `K`.
pub fn povm_equivalence_check(
    case: PovmCase,
    dim: usize,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<PovmCheck> {
    let f = FockSpace::new(dim)?;
    let pc = povm_pieces(case, &f, tol)?;
    let (e0, e1) = (&pc.e.0, &pc.e.1);
    let comp = |m: &CMat| compress_observable(m, e0, e1, tol);
    let dev = |pair: &(CMat, CMat)| -> Result<f64> {
        let a = max_abs(&(comp(&pc.proj.0)? - comp(&pair.0)?));
        let b = max_abs(&(comp(&pc.proj.1)? - comp(&pair.1)?));
        Ok(a.max(b))
    };
    let deviation_printed = dev(&pc.printed)?;
    let deviation_corrected = dev(&pc.corrected)?;
    let diff = &pc.proj.0 - &pc.proj.1;
    let witness_deviation = max_abs(&(comp(&pc.witness)? * c64(pc.c, 0.0) - comp(&diff)?));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut margin = f64::INFINITY;
    for _ in 0..samples {
        let mut w = [ZERO; 2];
        for x in &mut w {
            *x = c64(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        }
        let v = e0.amplitudes() * w[0] + e1.amplitudes() * w[1];
        let st = PureState::normalized(v, vec![dim])?;
        let m = st.variance(&pc.witness) - st.variance(&diff) / (pc.c * pc.c);
        margin = margin.min(m);
    }
    Ok(PovmCheck {
        case,
        dim,
        deviation_printed,
        deviation_corrected,
        printed_coefficient: pc.printed_coefficient,
        corrected_coefficient: pc.corrected_coefficient,
        c: pc.c,
        witness_deviation,
        variance_gain_samples: samples,
        variance_gain_min_margin: margin,
    })
}

/// Runs [`povm_equivalence_check`] at doubling truncations until the printed
/// deviation is stable.
pub fn povm_equivalence_converged(case: PovmCase, samples: usize, seed: u64, tol: &Tolerances) -> Result<PovmCheck> {
    let nbar = match case {
        PovmCase::Ecs { alpha } | PovmCase::Hcs { alpha } => alpha * alpha,
        PovmCase::Fock { n } => n as f64,
    };
    let mut d0 = suggested_dim(nbar);
    if let PovmCase::Fock { n } = case {
        d0 = d0.max(n + 2);
    }
    let (_, cert) = converge(d0, tol, |f| {
        let r = povm_equivalence_check(case, f.dim(), 0, seed, tol)?;
        Ok(vec![r.deviation_printed, r.deviation_corrected, r.witness_deviation])
    })?;
    povm_equivalence_check(case, cert.doubled_dim, samples, seed, tol)
}

/// Max deviations of the three `𝔰𝔩(2)` commutators on the lowest
/// `3D/4` levels: `[Πa², a†²Π] = 4n̂+2`, `[n̂, Πa²] = −2Πa²`,
/// `[n̂, a†²Π] = 2a†²Π`.
pub fn sl2_commutator_check(space: &FockSpace) -> [f64; 3] {
    let a = space.annihilation();
    let pi = space.parity();
    let lower = &pi * &a * &a;
    let raise = lower.adjoint();
    let n = space.number();
    let comm = |x: &CMat, y: &CMat| x * y - y * x;
    let keep = 3 * space.dim() / 4;
    let low = |m: CMat| max_abs(&m.view((0, 0), (keep, keep)).into_owned());
    [
        low(comm(&lower, &raise) - (&n * c64(4.0, 0.0) + space.identity() * c64(2.0, 0.0))),
        low(comm(&n, &lower) + &lower * c64(2.0, 0.0)),
        low(comm(&n, &raise) - &raise * c64(2.0, 0.0)),
    ]
}
