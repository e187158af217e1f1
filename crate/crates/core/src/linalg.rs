//! Dense complex linear algebra: states, observables, tensor products,
//! partial traces, trace-norm distances and Hermitian matrix functions.
//!
//! Tensor products use the row-major convention: the first factor is the
//! slowest-varying index, so `(a ⊗ b)[i_a * dim_b + i_b, ..]`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Entrywise distance of `m` from its adjoint.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// Entrywise distance of `u†u` from the identity.
pub fn unitarity_defect(u: &CMat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn ensure_capacity(dim: usize, tol: &Tolerances) -> Result<()> {
    if dim > tol.max_dim {
        Err(Error::Capacity { requested: dim, limit: tol.max_dim })
    } else {
        Ok(())
    }
}

/// Kronecker product without a capacity check.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product that refuses to exceed the configured dimension cap.
pub fn tensor_product(a: &CMat, b: &CMat, tol: &Tolerances) -> Result<CMat> {
    let rows = a.nrows().saturating_mul(b.nrows());
    let cols = a.ncols().saturating_mul(b.ncols());
    ensure_capacity(rows.max(cols), tol)?;
    Ok(a.kronecker(b))
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// `v ⊗ v ⊗ ... ⊗ v` with `n` factors.
pub fn kron_power_vec(v: &CVec, n: usize, tol: &Tolerances) -> Result<CVec> {
    if n == 0 {
        return Err(Error::Argument("tensor power needs at least one factor".into()));
    }
    let total = checked_pow(v.len(), n).ok_or(Error::Capacity { requested: usize::MAX, limit: tol.max_dim })?;
    ensure_capacity(total, tol)?;
    let mut out = v.clone();
    for _ in 1..n {
        out = kron_vec(&out, v);
    }
    Ok(out)
}

pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Ascending eigenvalues and matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn eigh(m: &CMat) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigendecomposition of a {}x{} matrix", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(hermitize(m), f64::EPSILON, 0).ok_or_else(|| {
        Error::Numerical(format!(
            "Hermitian eigendecomposition did not converge (dim {n}, max entry {:.3e})",
            max_abs(m)
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues only.
pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigenvalues of a {}x{} matrix", m.nrows(), m.ncols())));
    }
    let h = hermitize(m);
    let mut v: Vec<f64> = if h.nrows() == 0 { Vec::new() } else { h.symmetric_eigenvalues().iter().copied().collect() };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `exp(scale * M)` for Hermitian `M`, via `M = Q Λ Q†`.
pub fn matrix_exponential(generator: &CMat, scale: C64) -> Result<CMat> {
    let eig = eigh(generator)?;
    Ok(apply_spectral(&eig, |lam| (scale * lam).exp()))
}

/// `Q f(Λ) Q†`.
pub fn apply_spectral(eig: &HermitianEigen, f: impl Fn(f64) -> C64) -> CMat {
    let q = &eig.vectors;
    let mut scaled = q.clone();
    for (j, &lam) in eig.values.iter().enumerate() {
        let fj = f(lam);
        for v in scaled.column_mut(j).iter_mut() {
            *v *= fj;
        }
    }
    scaled * q.adjoint()
}

/// Unitary time evolution operator `exp(-i H t)`.
pub fn evolution(h: &CMat, t: f64) -> Result<CMat> {
    matrix_exponential(h, c64(0.0, -t))
}

/// A normalized state vector with a declared tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVec,
    dims: Vec<usize>,
}

fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Argument(format!("invalid factor dimensions {dims:?}")));
    }
    let prod = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    if prod != Some(len) {
        return Err(Error::Dimension(format!("factor dimensions {dims:?} do not multiply to {len}")));
    }
    Ok(())
}

impl PureState {
    /// Validates normalization within `tol.norm`.
    pub fn new(amps: CVec, dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        check_dims(amps.len(), &dims)?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::Validation(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amps, dims })
    }

    /// Rescales to unit norm.
    pub fn normalized(amps: CVec, dims: Vec<usize>) -> Result<Self> {
        check_dims(amps.len(), &dims)?;
        let norm = amps.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Validation("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self { amps: amps.unscale(norm), dims })
    }

    /// Single-factor state on a `d`-dimensional space.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::Argument(format!("basis index {k} out of range for dimension {d}")));
        }
        let mut v = CVec::zeros(d);
        v[k] = ONE;
        Ok(Self { amps: v, dims: vec![d] })
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `⟨self|M|self⟩`.
    pub fn expectation(&self, m: &CMat) -> C64 {
        self.amps.dotc(&(m * &self.amps))
    }

    /// `⟨M²⟩ - ⟨M⟩²` for Hermitian `M`.
    pub fn variance(&self, m: &CMat) -> f64 {
        let mv = m * &self.amps;
        let mean = self.amps.dotc(&mv).re;
        (mv.norm_squared() - mean * mean).max(0.0)
    }

    pub fn tensor(&self, other: &PureState, tol: &Tolerances) -> Result<PureState> {
        ensure_capacity(self.dim().saturating_mul(other.dim()), tol)?;
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(PureState { amps: kron_vec(&self.amps, &other.amps), dims })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { mat: &self.amps * self.amps.adjoint(), dims: self.dims.clone() }
    }

    pub fn apply(&self, u: &CMat) -> Result<PureState> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return Err(Error::Dimension(format!(
                "operator {}x{} on state of dim {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        PureState::normalized(u * &self.amps, self.dims.clone())
    }
}

/// A validated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: CMat, dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        check_dims(mat.nrows(), &dims)?;
        let herm = hermiticity_defect(&mat);
        if herm > tol.herm {
            return Err(Error::Validation(format!("density matrix not Hermitian (defect {herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.norm || tr.im.abs() > tol.norm {
            return Err(Error::Validation(format!("density matrix trace {tr} differs from 1")));
        }
        let min = eigvalsh(&mat)?.first().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::Validation(format!("density matrix has negative eigenvalue {min:.3e}")));
        }
        Ok(Self { mat: hermitize(&mat), dims })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.to_density()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &CMat) -> DensityMatrix {
        let m = u * &self.mat * u.adjoint();
        DensityMatrix { mat: hermitize(&m), dims: self.dims.clone() }
    }

    /// `tr(ρ M)`.
    pub fn expectation(&self, m: &CMat) -> C64 {
        (&self.mat * m).trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// Declared locality structure of an observable.
#[derive(Debug, Clone, PartialEq)]
pub enum Locality {
    SingleMode,
    /// `Σ_i A^{(i)} ⊗ I` over `parts.len()` modes.
    OneLocalSum {
        parts: Vec<CMat>,
    },
}

/// A Hermitian matrix with its locality structure.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable {
    mat: CMat,
    locality: Locality,
}

impl HermitianObservable {
    pub fn single_mode(mat: CMat, tol: &Tolerances) -> Result<Self> {
        let defect = hermiticity_defect(&mat);
        if defect > tol.herm {
            return Err(Error::Validation(format!("observable not Hermitian (defect {defect:.3e})")));
        }
        Ok(Self { mat: hermitize(&mat), locality: Locality::SingleMode })
    }

    /// Assembles `Σ_i A^{(i)} ⊗ I^{⊗ rest}` from per-mode parts.
    pub fn one_local_sum(parts: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Argument("one-local sum needs at least one mode".into()));
        }
        let dims: Vec<usize> = parts.iter().map(|p| p.nrows()).collect();
        for p in &parts {
            if !p.is_square() {
                return Err(Error::Dimension("one-local parts must be square".into()));
            }
            let defect = hermiticity_defect(p);
            if defect > tol.herm {
                return Err(Error::Validation(format!("one-local part not Hermitian (defect {defect:.3e})")));
            }
        }
        let total = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).unwrap_or(usize::MAX);
        ensure_capacity(total, tol)?;
        let mut mat = CMat::zeros(total, total);
        for (i, p) in parts.iter().enumerate() {
            let left: usize = dims[..i].iter().product();
            let right: usize = dims[i + 1..].iter().product();
            let term = kron(&kron(&identity(left), p), &identity(right));
            mat += term;
        }
        Ok(Self { mat: hermitize(&mat), locality: Locality::OneLocalSum { parts } })
    }

    /// The same single-mode term on each of `n` modes.
    pub fn identical_one_local(single: &CMat, n: usize, tol: &Tolerances) -> Result<Self> {
        Self::one_local_sum(vec![single.clone(); n], tol)
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn locality(&self) -> &Locality {
        &self.locality
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
}

/// Row-major full indices `table[kept][traced]` for a factor split.
fn split_index_table(dims: &[usize], keep: &[usize]) -> (usize, usize, Vec<usize>) {
    let m = dims.len();
    let traced: Vec<usize> = (0..m).filter(|i| !keep.contains(i)).collect();
    let dk: usize = keep.iter().map(|&i| dims[i]).product();
    let dt: usize = traced.iter().map(|&i| dims[i]).product();
    let mut strides = vec![1usize; m];
    for i in (0..m.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offsets = |factors: &[usize], mut flat: usize| -> usize {
        let mut off = 0;
        for &f in factors.iter().rev() {
            off += (flat % dims[f]) * strides[f];
            flat /= dims[f];
        }
        off
    };
    let kept_off: Vec<usize> = (0..dk).map(|a| offsets(keep, a)).collect();
    let traced_off: Vec<usize> = (0..dt).map(|t| offsets(&traced, t)).collect();
    let mut table = Vec::with_capacity(dk * dt);
    for &ka in &kept_off {
        for &tb in &traced_off {
            table.push(ka + tb);
        }
    }
    (dk, dt, table)
}

fn validate_keep(dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if k.len() != keep.len() {
        return Err(Error::Argument(format!("repeated indices in keep set {keep:?}")));
    }
    if let Some(&bad) = k.iter().find(|&&i| i >= dims.len()) {
        return Err(Error::Argument(format!("keep index {bad} out of range for {} factors", dims.len())));
    }
    Ok(k)
}

/// Reduced density matrix on the factors in `keep` (kept in ascending order).
/// An empty `keep` returns the 1x1 scalar trace.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = validate_keep(&rho.dims, keep)?;
    let (dk, dt, table) = split_index_table(&rho.dims, &keep);
    let m = &rho.mat;
    let mut out = CMat::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(table[a * dt + t], table[b * dt + t])];
            }
            out[(a, b)] = acc;
        }
    }
    let dims = if keep.is_empty() { vec![1] } else { keep.iter().map(|&i| rho.dims[i]).collect() };
    Ok(DensityMatrix { mat: hermitize(&out), dims })
}

/// Reduced density matrix of a pure state, without forming `|ψ⟩⟨ψ|`.
pub fn reduced_density(psi: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = validate_keep(&psi.dims, keep)?;
    let (dk, dt, table) = split_index_table(&psi.dims, &keep);
    let mut mm = CMat::zeros(dk, dt);
    for a in 0..dk {
        for t in 0..dt {
            mm[(a, t)] = psi.amps[table[a * dt + t]];
        }
    }
    let out = &mm * mm.adjoint();
    let dims = if keep.is_empty() { vec![1] } else { keep.iter().map(|&i| psi.dims[i]).collect() };
    Ok(DensityMatrix { mat: hermitize(&out), dims })
}

/// `Σ |λ_k|` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> Result<f64> {
    Ok(eigvalsh(m)?.iter().map(|x| x.abs()).sum())
}

fn check_pair(a: &CMat, b: &CMat, tol: &Tolerances) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    for m in [a, b] {
        let d = hermiticity_defect(m);
        if d > tol.herm {
            return Err(Error::Validation(format!("non-Hermitian input (defect {d:.3e})")));
        }
    }
    Ok(())
}

/// `‖ρA − ρB‖₁`.
pub fn trace_norm_distance(a: &DensityMatrix, b: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    check_pair(&a.mat, &b.mat, tol)?;
    trace_norm_hermitian(&(&a.mat - &b.mat))
}

/// Optimal equal-prior discrimination probability `½ + ¼‖ρA − ρB‖₁`.
pub fn helstrom_probability(a: &DensityMatrix, b: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    Ok((0.5 + 0.25 * trace_norm_distance(a, b, tol)?).min(1.0))
}

/// `‖ |u⟩⟨u| − |v⟩⟨v| ‖₁ = 2√(1 − |⟨u|v⟩|²)` for normalized vectors.
pub fn pure_trace_distance(u: &CVec, v: &CVec) -> f64 {
    2.0 * (1.0 - u.dotc(v).norm_sqr()).max(0.0).sqrt()
}

/// `A^{(site)} |ψ⟩` for a state on `n` factors of dimension `d`.
pub fn apply_at_site(a: &CMat, psi: &CVec, d: usize, n: usize, site: usize) -> CVec {
    let right = d.pow((n - 1 - site) as u32);
    let left = psi.len() / (d * right);
    let mut out = CVec::zeros(psi.len());
    for l in 0..left {
        for r in 0..right {
            for i in 0..d {
                let mut acc = ZERO;
                for j in 0..d {
                    acc += a[(i, j)] * psi[(l * d + j) * right + r];
                }
                out[(l * d + i) * right + r] = acc;
            }
        }
    }
    out
}

/// Applies the same single-mode operator to every factor and sums:
/// `(Σ_i A^{(i)}) |ψ⟩` for a state on `n` factors of dimension `d`.
pub fn apply_one_local(a: &CMat, psi: &CVec, d: usize, n: usize) -> CVec {
    let mut out = CVec::zeros(psi.len());
    for site in 0..n {
        let right = d.pow((n - 1 - site) as u32);
        let left = psi.len() / (d * right);
        for l in 0..left {
            for r in 0..right {
                for i in 0..d {
                    let mut acc = ZERO;
                    for j in 0..d {
                        let aij = a[(i, j)];
                        if aij != ZERO {
                            acc += aij * psi[(l * d + j) * right + r];
                        }
                    }
                    out[(l * d + i) * right + r] += acc;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx() -> CMat {
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }
    fn sz() -> CMat {
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    #[test]
    fn kron_identity_and_index_convention() {
        let tol = Tolerances::default();
        assert_eq!(tensor_product(&identity(2), &identity(2), &tol).unwrap(), identity(4));
        let k = tensor_product(&sz(), &identity(2), &tol).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| k[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn kron_of_ladders_lowers_both_modes() {
        let mut a = CMat::zeros(3, 3);
        a[(0, 1)] = ONE;
        a[(1, 2)] = c64(2f64.sqrt(), 0.0);
        let aa = kron(&a, &a);
        let mut v = CVec::zeros(9);
        v[4] = ONE; // |1⟩⊗|1⟩
        let w = aa * v;
        assert!((w[0] - ONE).norm() < 1e-15);
        assert!(w.iter().skip(1).all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn capacity_is_enforced() {
        let tol = Tolerances { max_dim: 8, ..Default::default() };
        assert!(matches!(tensor_product(&identity(4), &identity(4), &tol), Err(Error::Capacity { .. })));
    }

    #[test]
    fn partial_trace_examples() {
        let tol = Tolerances::default();
        let s01 = PureState::basis(2, 0).unwrap().tensor(&PureState::basis(2, 1).unwrap(), &tol).unwrap();
        let r = partial_trace(&s01.to_density(), &[0]).unwrap();
        assert!((r.matrix()[(0, 0)] - ONE).norm() < 1e-15);
        assert!(r.matrix()[(1, 1)].norm() < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ghz = PureState::new(CVec::from_vec(vec![c64(h, 0.), ZERO, ZERO, c64(h, 0.)]), vec![2, 2], &tol).unwrap();
        let r = partial_trace(&ghz.to_density(), &[1]).unwrap();
        assert!(max_abs(&(r.matrix() - identity(2).scale(0.5))) < 1e-15);

        let mut v = CVec::zeros(8);
        v[0] = c64(h, 0.);
        v[7] = c64(h, 0.);
        let g3 = PureState::new(v, vec![2, 2, 2], &tol).unwrap();
        let r = partial_trace(&g3.to_density(), &[1, 2]).unwrap();
        let mut want = CMat::zeros(4, 4);
        want[(0, 0)] = c64(0.5, 0.);
        want[(3, 3)] = c64(0.5, 0.);
        assert!(max_abs(&(r.matrix() - want)) < 1e-15);
        let pure_path = reduced_density(&g3, &[1, 2]).unwrap();
        assert!(max_abs(&(pure_path.matrix() - r.matrix())) < 1e-15);
        let scalar = partial_trace(&g3.to_density(), &[]).unwrap();
        assert!((scalar.matrix()[(0, 0)] - ONE).norm() < 1e-14);
        assert!(partial_trace(&g3.to_density(), &[3]).is_err());
    }

    #[test]
    fn partial_trace_respects_non_adjacent_order() {
        // |0⟩|1⟩|+⟩ keep {0,2} → |0⟩⟨0| ⊗ |+⟩⟨+|
        let tol = Tolerances::default();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(CVec::from_vec(vec![c64(h, 0.), c64(h, 0.)]), vec![2], &tol).unwrap();
        let s = PureState::basis(2, 0)
            .unwrap()
            .tensor(&PureState::basis(2, 1).unwrap(), &tol)
            .unwrap()
            .tensor(&plus, &tol)
            .unwrap();
        let r = reduced_density(&s, &[0, 2]).unwrap();
        let want = PureState::basis(2, 0).unwrap().tensor(&plus, &tol).unwrap().to_density();
        assert!(max_abs(&(r.matrix() - want.matrix())) < 1e-15);
    }

    #[test]
    fn trace_norm_and_helstrom_examples() {
        let tol = Tolerances::default();
        let z = PureState::basis(2, 0).unwrap().to_density();
        let o = PureState::basis(2, 1).unwrap().to_density();
        assert!(trace_norm_distance(&z, &z, &tol).unwrap() < 1e-15);
        assert!((trace_norm_distance(&z, &o, &tol).unwrap() - 2.0).abs() < 1e-14);
        assert!((helstrom_probability(&z, &z, &tol).unwrap() - 0.5).abs() < 1e-15);
        assert!((helstrom_probability(&z, &o, &tol).unwrap() - 1.0).abs() < 1e-14);
        // |⟨u|v⟩|² = 0.5
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = PureState::new(CVec::from_vec(vec![c64(h, 0.), c64(0., h)]), vec![2], &tol).unwrap().to_density();
        let d = trace_norm_distance(&z, &p, &tol).unwrap();
        assert!((d - 2.0 * 0.5f64.sqrt()).abs() < 1e-14);
        let ph = helstrom_probability(&z, &p, &tol).unwrap();
        assert!((ph - (0.5 + 0.5 * 0.5f64.sqrt())).abs() < 1e-14);
        assert!((ph - 0.85355).abs() < 1e-5);
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let tol = Tolerances::default();
        let z = PureState::basis(2, 0).unwrap().to_density();
        let bad = DensityMatrix { mat: CMat::from_row_slice(2, 2, &[ONE, ONE, ZERO, ZERO]), dims: vec![2] };
        assert!(matches!(trace_norm_distance(&z, &bad, &tol), Err(Error::Validation(_))));
    }

    #[test]
    fn exponential_examples() {
        let e = matrix_exponential(&sx(), ZERO).unwrap();
        assert!(max_abs(&(e - identity(2))) < 1e-15);
        let u = matrix_exponential(&sx(), c64(0.0, -std::f64::consts::FRAC_PI_2)).unwrap();
        let v = u * CVec::from_vec(vec![ONE, ZERO]);
        assert!(v[0].norm() < 1e-14 && (v[1] - c64(0.0, -1.0)).norm() < 1e-14);
        let n = CMat::from_diagonal(&CVec::from_fn(4, |i, _| c64(i as f64, 0.0)));
        let p = matrix_exponential(&n, c64(0.0, std::f64::consts::PI)).unwrap();
        for i in 0..4 {
            let want = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert!((p[(i, i)] - c64(want, 0.0)).norm() < 1e-14);
        }
        assert!(unitarity_defect(&p) < 1e-12);
    }

    #[test]
    fn density_validation() {
        let tol = Tolerances::default();
        let m = CMat::from_row_slice(2, 2, &[c64(1.2, 0.), ZERO, ZERO, c64(-0.2, 0.)]);
        assert!(DensityMatrix::new(m, vec![2], &tol).is_err());
        let m = CMat::from_row_slice(2, 2, &[c64(0.5, 0.), ZERO, ZERO, c64(0.5, 0.)]);
        assert!(DensityMatrix::new(m, vec![2], &tol).is_ok());
    }

    #[test]
    fn one_local_sum_matches_kron_assembly() {
        let tol = Tolerances::default();
        let obs = HermitianObservable::identical_one_local(&sz(), 3, &tol).unwrap();
        let want: Vec<f64> = (0..8).map(|k: u32| 3.0 - 2.0 * k.count_ones() as f64).collect();
        for (i, w) in want.iter().enumerate() {
            assert!((obs.matrix()[(i, i)].re - w).abs() < 1e-15);
        }
        let mut psi = CVec::zeros(8);
        psi[3] = ONE;
        psi[5] = c64(0.0, 1.0);
        let direct = obs.matrix() * &psi;
        let fast = apply_one_local(&sz(), &psi, 2, 3);
        assert!((direct - fast).norm() < 1e-14);
    }
}
