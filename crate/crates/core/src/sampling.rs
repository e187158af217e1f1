//! Seeded random states, generators and unitaries for the ensemble checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{c64, CMat, CVec, DensityMatrix, PureState, C64};
use crate::tolerance::Tolerances;

/// Independent stream for `(seed, stream, index)`; the same triple always
/// yields the same draws regardless of evaluation order.
pub fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_shl(32) ^ index);
    rng
}

pub fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure(d: usize, rng: &mut impl Rng) -> Result<PureState> {
    let v = CVec::from_fn(d, |_, _| gaussian_complex(rng));
    PureState::normalized(v, vec![d])
}

/// `G G† / tr` with `G` a `d × rank` Ginibre matrix.
pub fn random_density(d: usize, rank: usize, rng: &mut impl Rng, tol: &Tolerances) -> Result<DensityMatrix> {
    let g = CMat::from_fn(d, rank.max(1), |_, _| gaussian_complex(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr), vec![d], tol)
}

/// GUE sample `(G + G†)/2`.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| gaussian_complex(rng));
    (&g + g.adjoint()) * c64(0.5, 0.0)
}

/// Haar unitary from the QR decomposition of a Ginibre matrix with the
/// phases of `R`'s diagonal removed.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let ph = r[(j, j)];
        let s = if ph.norm() > 0.0 { ph / ph.norm() } else { c64(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= s;
        }
    }
    q
}

/// Uniform draw from `[lo, hi)`.
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = rng_for(7, 1, 3).random();
        let b: f64 = rng_for(7, 1, 3).random();
        let c: f64 = rng_for(7, 1, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn samples_are_valid() {
        let t = Tolerances::default();
        let mut rng = rng_for(1, 0, 0);
        for d in 2..6 {
            assert!(unitarity_defect(&random_unitary(d, &mut rng)) < 1e-12);
            let rho = random_density(d, d, &mut rng, &t).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            let h = random_hermitian(d, &mut rng);
            assert!(crate::linalg::hermiticity_defect(&h) == 0.0);
            assert!((random_pure(d, &mut rng).unwrap().amplitudes().norm() - 1.0).abs() < 1e-12);
        }
    }
}
