//! Truncated single-mode Fock space: ladder, number, parity and quadrature
//! operators, displacement and squeezing, coherent, cat and Gaussian states.
//!
//! Conventions: `D(α) = exp(α a† − ᾱ a)`, `S(ξ) = exp((ξ̄ a² − ξ a†²)/2)`,
//! `x^{(θ)} = (a e^{−iθ} + a† e^{iθ})/√2` (vacuum variance ½).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, matrix_exponential, CMat, CVec, PureState, C64, I, ONE, ZERO};
use crate::tolerance::Tolerances;

/// Upper bound for automatic truncation doubling of a single mode.
pub const MAX_ADAPTIVE_DIM: usize = 2048;

/// States `|0⟩ … |D−1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    dim: usize,
}

/// Named single-mode operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeKind {
    Annihilation,
    Creation,
    Number,
    Parity,
    Quadrature(f64),
    Identity,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Argument(format!("Fock truncation must be at least 2 (got {dim})")));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn doubled(&self) -> Self {
        Self { dim: self.dim * 2 }
    }

    pub fn operator(&self, kind: ModeKind) -> CMat {
        match kind {
            ModeKind::Annihilation => self.annihilation(),
            ModeKind::Creation => self.annihilation().adjoint(),
            ModeKind::Number => self.number(),
            ModeKind::Parity => self.parity(),
            ModeKind::Quadrature(theta) => self.quadrature(theta),
            ModeKind::Identity => CMat::identity(self.dim, self.dim),
        }
    }

    /// `(a)_{n−1,n} = √n`.
    pub fn annihilation(&self) -> CMat {
        let mut a = CMat::zeros(self.dim, self.dim);
        for n in 1..self.dim {
            a[(n - 1, n)] = c64((n as f64).sqrt(), 0.0);
        }
        a
    }

    pub fn creation(&self) -> CMat {
        self.annihilation().adjoint()
    }

    pub fn number(&self) -> CMat {
        CMat::from_diagonal(&CVec::from_fn(self.dim, |n, _| c64(n as f64, 0.0)))
    }

    /// `exp(iπ n̂) = diag((−1)^n)`.
    pub fn parity(&self) -> CMat {
        CMat::from_diagonal(&CVec::from_fn(self.dim, |n, _| if n % 2 == 0 { ONE } else { -ONE }))
    }

    pub fn quadrature(&self, theta: f64) -> CMat {
        let a = self.annihilation();
        let e = C64::from_polar(1.0, -theta);
        (a.clone() * e + a.adjoint() * e.conj()).unscale(2f64.sqrt())
    }

    pub fn identity(&self) -> CMat {
        CMat::identity(self.dim, self.dim)
    }

    pub fn vacuum(&self) -> PureState {
        PureState::basis(self.dim, 0).expect("dim >= 2")
    }

    pub fn number_state(&self, n: usize) -> Result<PureState> {
        PureState::basis(self.dim, n)
    }

    /// Hermitian `H` with `D(α) = exp(−iH)`.
    pub fn displacement_generator(&self, alpha: C64) -> CMat {
        let a = self.annihilation();
        let g = a.adjoint() * alpha - a * alpha.conj();
        g * I
    }

    /// Hermitian `H` with `S(ξ) = exp(−iH)`.
    pub fn squeeze_generator(&self, xi: C64) -> CMat {
        let a = self.annihilation();
        let a2 = &a * &a;
        let g = (a2.clone() * xi.conj() - a2.adjoint() * xi) * c64(0.5, 0.0);
        g * I
    }

    /// Truncated `D(α)`; fails when `D(α)|0⟩` leaks into the top levels.
    pub fn displacement(&self, alpha: C64, tol: &Tolerances) -> Result<CMat> {
        let d = matrix_exponential(&self.displacement_generator(alpha), c64(0.0, -1.0))?;
        check_tail(&d.column(0).into_owned(), self.dim, tol)?;
        Ok(d)
    }

    /// Truncated `S(ξ)`; fails when `S(ξ)|0⟩` leaks into the top levels.
    pub fn squeeze(&self, xi: C64, tol: &Tolerances) -> Result<CMat> {
        let s = matrix_exponential(&self.squeeze_generator(xi), c64(0.0, -1.0))?;
        check_tail(&s.column(0).into_owned(), self.dim, tol)?;
        Ok(s)
    }

    /// Closed-form `|α⟩`, renormalized after the tail test.
    pub fn coherent(&self, alpha: C64, tol: &Tolerances) -> Result<PureState> {
        let amps = coherent_amplitudes(alpha, self.dim);
        let lost = (1.0 - amps.norm_squared()).max(0.0);
        check_tail_with_loss(&amps, self.dim, lost, tol)?;
        PureState::normalized(amps, vec![self.dim])
    }

    /// Even and odd cats `ψ± ∝ |α⟩ ± |−α⟩`.
    pub fn cat_pair(&self, alpha: C64, tol: &Tolerances) -> Result<(PureState, PureState)> {
        if alpha.norm() == 0.0 {
            return Err(Error::Argument("cat states need α ≠ 0".into()));
        }
        let c = coherent_amplitudes(alpha, self.dim);
        let lost = (1.0 - c.norm_squared()).max(0.0);
        check_tail_with_loss(&c, self.dim, lost, tol)?;
        let even = CVec::from_fn(self.dim, |n, _| if n % 2 == 0 { c[n] * 2.0 } else { ZERO });
        let odd = CVec::from_fn(self.dim, |n, _| if n % 2 == 1 { c[n] * 2.0 } else { ZERO });
        Ok((PureState::normalized(even, vec![self.dim])?, PureState::normalized(odd, vec![self.dim])?))
    }

    /// Closed-form `S(ξ)|0⟩`.
    pub fn squeezed_vacuum(&self, xi: C64, tol: &Tolerances) -> Result<PureState> {
        let amps = squeezed_vacuum_amplitudes(xi, self.dim);
        let lost = (1.0 - amps.norm_squared()).max(0.0);
        check_tail_with_loss(&amps, self.dim, lost, tol)?;
        PureState::normalized(amps, vec![self.dim])
    }

    /// Branch state built from the closed-form first factor in a padded
    /// working space, then the exponential of the second factor.
    pub fn gaussian_branch(&self, spec: &GaussianBranchSpec, tol: &Tolerances) -> Result<PureState> {
        let work = FockSpace::new(2 * self.dim)?;
        let (first, second) = match spec.order {
            BranchOrder::SqueezeThenDisplace => {
                let v = work.squeezed_vacuum_unchecked(spec.xi);
                (v, work.displacement_generator(spec.alpha))
            }
            BranchOrder::DisplaceThenSqueeze => {
                let v = coherent_amplitudes(spec.alpha, work.dim);
                (v, work.squeeze_generator(spec.xi))
            }
        };
        let u = matrix_exponential(&second, c64(0.0, -1.0))?;
        let v = u * first;
        let lost: f64 = v.iter().skip(self.dim).map(|x| x.norm_sqr()).sum();
        let head = CVec::from_fn(self.dim, |n, _| v[n]);
        check_tail_with_loss(&head, self.dim, lost, tol)?;
        PureState::normalized(head, vec![self.dim])
    }

    /// Same state from truncated matrix exponentials only.
    pub fn gaussian_branch_expm(&self, spec: &GaussianBranchSpec, tol: &Tolerances) -> Result<PureState> {
        let d = self.displacement(spec.alpha, tol)?;
        let s = self.squeeze(spec.xi, tol)?;
        let op = match spec.order {
            BranchOrder::SqueezeThenDisplace => d * s,
            BranchOrder::DisplaceThenSqueeze => s * d,
        };
        let v = op.column(0).into_owned();
        check_tail(&v, self.dim, tol)?;
        PureState::normalized(v, vec![self.dim])
    }

    fn squeezed_vacuum_unchecked(&self, xi: C64) -> CVec {
        squeezed_vacuum_amplitudes(xi, self.dim)
    }
}

/// `e^{−|α|²/2} αⁿ/√n!` for `n < dim`.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    let mut amp = c64((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            amp = amp * alpha / (n as f64).sqrt();
        }
        v[n] = amp;
    }
    v
}

/// `(cosh r)^{−1/2} Σ_m (−e^{iθ} tanh r)^m √((2m)!)/(2^m m!) |2m⟩`, `ξ = r e^{iθ}`.
pub fn squeezed_vacuum_amplitudes(xi: C64, dim: usize) -> CVec {
    let r = xi.norm();
    let ratio = -C64::from_polar(r.tanh(), xi.arg());
    let mut v = CVec::zeros(dim);
    let mut amp = c64(r.cosh().powf(-0.5), 0.0);
    let mut m = 0usize;
    while 2 * m < dim {
        if m > 0 {
            let mm = m as f64;
            amp = amp * ratio * ((2.0 * mm - 1.0) / (2.0 * mm)).sqrt();
        }
        v[2 * m] = amp;
        m += 1;
    }
    v
}

/// Mass on the top 10% of levels (at least one level).
pub fn tail_mass(v: &CVec) -> f64 {
    let dim = v.len();
    let k = (dim / 10).max(1);
    v.iter().skip(dim - k).map(|x| x.norm_sqr()).sum()
}

pub fn check_tail(v: &CVec, dim: usize, tol: &Tolerances) -> Result<()> {
    check_tail_with_loss(v, dim, 0.0, tol)
}

fn check_tail_with_loss(v: &CVec, dim: usize, lost: f64, tol: &Tolerances) -> Result<()> {
    let tail = tail_mass(v) + lost;
    if tail.is_nan() || tail >= tol.tail {
        return Err(Error::Truncation { dim, tail, threshold: tol.tail });
    }
    Ok(())
}

/// Order in which the two Gaussian factors act on the vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchOrder {
    /// `D(α) S(ξ) |0⟩`.
    SqueezeThenDisplace,
    /// `S(ξ) D(α) |0⟩`.
    DisplaceThenSqueeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBranchSpec {
    pub xi: C64,
    pub alpha: C64,
    pub order: BranchOrder,
}

/// Evidence that a result is stable under doubling the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationCertificate {
    pub dim: usize,
    pub doubled_dim: usize,
    pub max_change: f64,
    pub converged: bool,
}

/// Evaluates `f` at `start` and at twice that truncation, doubling on
/// truncation errors or disagreement, until successive results agree within
/// `tol.conv`. Returns the values at the smaller certified truncation.
pub fn converge<F>(start: usize, tol: &Tolerances, f: F) -> Result<(Vec<f64>, TruncationCertificate)>
where
    F: Fn(&FockSpace) -> Result<Vec<f64>>,
{
    let cap = MAX_ADAPTIVE_DIM.min(tol.max_dim);
    let mut d = start.max(2);
    let mut prev: Option<(usize, Vec<f64>)> = None;
    loop {
        if d > cap {
            let last = prev.map(|p| p.0).unwrap_or(start);
            return Err(Error::Truncation { dim: last, tail: f64::NAN, threshold: tol.tail });
        }
        match f(&FockSpace::new(d)?) {
            Ok(vals) => {
                if let Some((pd, pv)) = &prev {
                    let change = pv.iter().zip(&vals).map(|(a, b)| (a - b).abs()).fold(0.0_f64, f64::max);
                    if change < tol.conv {
                        let cert =
                            TruncationCertificate { dim: *pd, doubled_dim: d, max_change: change, converged: true };
                        return Ok((pv.clone(), cert));
                    }
                }
                prev = Some((d, vals));
            }
            Err(Error::Truncation { .. }) => prev = None,
            Err(e) => return Err(e),
        }
        d *= 2;
    }
}

/// A starting truncation for a state with mean photon number around `nbar`.
pub fn suggested_dim(nbar: f64) -> usize {
    let n = nbar.max(0.0);
    ((n + 10.0 * n.sqrt() + 24.0).ceil() as usize).max(16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitarity_defect};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn ladder_and_simple_operators() {
        let f = FockSpace::new(5).unwrap();
        let a = f.annihilation();
        assert_eq!(a[(2, 3)], c64(3f64.sqrt(), 0.0));
        let n = f.creation() * &a;
        assert!(max_abs(&(n - f.number())) < 1e-14);
        let three = f.number_state(3).unwrap();
        let p3 = f.parity() * three.amplitudes();
        assert!((p3[3] + ONE).norm() < 1e-15);
        assert!(FockSpace::new(1).is_err());
    }

    #[test]
    fn vacuum_quadrature_variance_is_half() {
        let f = FockSpace::new(20).unwrap();
        let v = f.vacuum().variance(&f.quadrature(0.0));
        assert!((v - 0.5).abs() < 1e-14);
        let v = f.vacuum().variance(&f.quadrature(1.1));
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn coherent_number_mean() {
        let f = FockSpace::new(30).unwrap();
        let s = f.coherent(c64(1.0, 0.0), &tol()).unwrap();
        assert!((s.expectation(&f.number()).re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn displacement_examples() {
        let t = tol();
        let f = FockSpace::new(40).unwrap();
        assert!(max_abs(&(f.displacement(ZERO, &t).unwrap() - f.identity())) < 1e-14);
        let d = f.displacement(c64(2.0, 0.0), &t).unwrap();
        assert!((d[(0, 0)].re - (-2.0f64).exp()).abs() < 1e-10);
        assert!(unitarity_defect(&d) < t.unit);
        // ⟨α|−α⟩ = e^{−2|α|²}
        let a = f.coherent(c64(1.0, 0.0), &t).unwrap();
        let b = f.coherent(c64(-1.0, 0.0), &t).unwrap();
        assert!((a.inner(&b).re - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn displacement_truncation_error() {
        let f = FockSpace::new(8).unwrap();
        assert!(matches!(f.displacement(c64(3.0, 0.0), &tol()), Err(Error::Truncation { .. })));
    }

    #[test]
    fn squeeze_vacuum_overlap() {
        let t = tol();
        let f = FockSpace::new(60).unwrap();
        assert!(max_abs(&(f.squeeze(ZERO, &t).unwrap() - f.identity())) < 1e-14);
        let s = f.squeeze(c64(0.6, 0.0), &t).unwrap();
        let want = 0.6f64.cosh().powf(-0.5);
        assert!((s[(0, 0)].re - want).abs() < 1e-10);
        assert!((want - 0.918_450).abs() < 1e-6);
        assert!(unitarity_defect(&s) < t.unit);
        let closed = f.squeezed_vacuum(c64(0.6, 0.0), &t).unwrap();
        let col = s.column(0).into_owned();
        // truncation only perturbs the top levels of the exponential
        let low = (closed.amplitudes().rows(0, 30) - col.rows(0, 30)).norm();
        assert!(low < 1e-9, "{low}");
    }

    #[test]
    fn complex_squeeze_closed_form_matches_exponential() {
        let t = tol();
        let f = FockSpace::new(60).unwrap();
        let xi = c64(0.3, -0.4);
        let s = f.squeeze(xi, &t).unwrap();
        let closed = f.squeezed_vacuum(xi, &t).unwrap();
        let col = s.column(0).into_owned();
        assert!((closed.amplitudes().rows(0, 30) - col.rows(0, 30)).norm() < 1e-9);
    }

    #[test]
    fn adjoint_action_of_squeeze() {
        let t = tol();
        let f = FockSpace::new(120).unwrap();
        let (alpha, xi) = (0.5, 0.4);
        let s = f.squeeze(c64(xi, 0.0), &t).unwrap();
        let lhs = s.adjoint() * f.displacement(c64(alpha, 0.0), &t).unwrap() * &s;
        let rhs = f.displacement(c64(alpha * xi.exp(), 0.0), &t).unwrap();
        let block = 20;
        let diff = (lhs - rhs).view((0, 0), (block, block)).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn cat_states() {
        let t = tol();
        let f = FockSpace::new(30).unwrap();
        let (p, m) = f.cat_pair(c64(1.0, 0.0), &t).unwrap();
        assert!(p.inner(&m).norm() < 1e-10);
        assert!((p.expectation(&f.parity()).re - 1.0).abs() < 1e-12);
        assert!((m.expectation(&f.parity()).re + 1.0).abs() < 1e-12);
        assert!((p.expectation(&f.number()).re - 1f64.tanh()).abs() < 1e-8);
    }

    #[test]
    fn gaussian_branch_examples() {
        let t = tol();
        let f = FockSpace::new(60).unwrap();
        for order in [BranchOrder::SqueezeThenDisplace, BranchOrder::DisplaceThenSqueeze] {
            let s = f.gaussian_branch(&GaussianBranchSpec { xi: ZERO, alpha: ZERO, order }, &t).unwrap();
            assert!((s.amplitudes()[0] - ONE).norm() < 1e-14);
            let s = f.gaussian_branch(&GaussianBranchSpec { xi: c64(0.3, 0.0), alpha: ZERO, order }, &t).unwrap();
            assert!((s.variance(&f.quadrature(0.0)) - (-0.6f64).exp() / 2.0).abs() < 1e-6);
        }
        // D(α)S(ξ)|0⟩ = S(ξ)D(α e^{ξ})|0⟩ for real α, ξ
        let (alpha, xi) = (0.7, 0.35);
        let a = f
            .gaussian_branch(
                &GaussianBranchSpec { xi: c64(xi, 0.), alpha: c64(alpha, 0.), order: BranchOrder::SqueezeThenDisplace },
                &t,
            )
            .unwrap();
        let b = f
            .gaussian_branch(
                &GaussianBranchSpec {
                    xi: c64(xi, 0.),
                    alpha: c64(alpha * xi.exp(), 0.),
                    order: BranchOrder::DisplaceThenSqueeze,
                },
                &t,
            )
            .unwrap();
        assert!((a.inner(&b).norm() - 1.0).abs() < 1e-8);
        let c = f
            .gaussian_branch_expm(
                &GaussianBranchSpec { xi: c64(xi, 0.), alpha: c64(alpha, 0.), order: BranchOrder::SqueezeThenDisplace },
                &t,
            )
            .unwrap();
        assert!((a.inner(&c).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn parity_anticommutes_with_quadratures() {
        let f = FockSpace::new(16).unwrap();
        let p = f.parity();
        for theta in [0.0, 0.7, 2.0] {
            let x = f.quadrature(theta);
            assert!(max_abs(&(&p * &x * &p + &x)) < 1e-14);
        }
    }

    #[test]
    fn convergence_certificate() {
        let t = tol();
        let (vals, cert) = converge(8, &t, |f| {
            let s = f.coherent(c64(1.5, 0.0), &t)?;
            Ok(vec![s.expectation(&f.number()).re])
        })
        .unwrap();
        assert!(cert.converged && cert.max_change < t.conv);
        assert!((vals[0] - 2.25).abs() < 1e-8);
    }
}
