//! Random symmetric matrix ensembles with counter-addressed sampling.
//!
//! Every matrix entry is a pure function of `(seed, sample_index, row, col)`:
//! the generator is keyed by the seed, the stream by the sample index, and
//! the word position by the cell, with a fixed budget of two 64-bit draws
//! per cell regardless of the distribution. Sampling is therefore
//! reproducible across thread counts and evaluation orders, and any single
//! entry can be re-derived in isolation.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::num::{scalar, Real};
use crate::FormTag;

/// 32-bit generator words consumed per matrix cell (two `u64` draws).
const WORDS_PER_CELL: u128 = 4;

fn uniform53(u: u64) -> f64 {
    // 53 high bits -> [0, 1) on the standard dyadic grid
    (u >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Entry distribution of one matrix part. All variants are symmetric about
/// zero with finite moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistributionSpec<R> {
    /// Point mass at zero.
    Zero,
    /// `+w` or `-w` with probability `1/2` each.
    Sign { w: R },
    /// Centered normal with standard deviation `sigma`.
    Gaussian { sigma: R },
    /// `+a` or `-a` with probability `prob` each, zero otherwise.
    ThreePoint { a: R, prob: R },
}

impl<R: Real> DistributionSpec<R> {
    pub fn validate(&self) -> Result<()> {
        let half = scalar::<R>(0.5);
        match *self {
            DistributionSpec::Zero => Ok(()),
            DistributionSpec::Sign { w } if w > R::zero() => Ok(()),
            DistributionSpec::Sign { w } => Err(Error::InvalidParameter(format!(
                "sign level must be positive, got {w}"
            ))),
            DistributionSpec::Gaussian { sigma } if sigma > R::zero() => Ok(()),
            DistributionSpec::Gaussian { sigma } => Err(Error::InvalidParameter(format!(
                "standard deviation must be positive, got {sigma}"
            ))),
            DistributionSpec::ThreePoint { a, prob }
                if a > R::zero() && prob > R::zero() && prob <= half =>
            {
                Ok(())
            }
            DistributionSpec::ThreePoint { a, prob } => Err(Error::InvalidParameter(format!(
                "three-point law needs a > 0 and 0 < prob <= 1/2, got a = {a}, prob = {prob}"
            ))),
        }
    }

    pub fn variance(&self) -> R {
        match *self {
            DistributionSpec::Zero => R::zero(),
            DistributionSpec::Sign { w } => w * w,
            DistributionSpec::Gaussian { sigma } => sigma * sigma,
            DistributionSpec::ThreePoint { a, prob } => scalar::<R>(2.0) * prob * a * a,
        }
    }

    pub fn fourth_moment(&self) -> R {
        match *self {
            DistributionSpec::Zero => R::zero(),
            DistributionSpec::Sign { w } => (w * w).powi(2),
            DistributionSpec::Gaussian { sigma } => scalar::<R>(3.0) * (sigma * sigma).powi(2),
            DistributionSpec::ThreePoint { a, prob } => scalar::<R>(2.0) * prob * (a * a).powi(2),
        }
    }

    pub fn fourth_cumulant(&self) -> R {
        self.fourth_moment() - scalar::<R>(3.0) * self.variance().powi(2)
    }

    /// One value, always consuming exactly two 64-bit draws.
    fn draw(&self, rng: &mut ChaCha8Rng) -> R {
        let u0 = rng.next_u64();
        let u1 = rng.next_u64();
        match *self {
            DistributionSpec::Zero => R::zero(),
            DistributionSpec::Sign { w } => {
                if u0 & 1 == 1 {
                    -w
                } else {
                    w
                }
            }
            DistributionSpec::Gaussian { sigma } => {
                // Box-Muller; 1 - uniform53 lies in (0, 1], keeping ln finite.
                let r = scalar::<R>((-2.0 * (1.0 - uniform53(u0)).ln()).sqrt());
                let theta = R::PI() * scalar::<R>(2.0 * uniform53(u1));
                sigma * r * theta.cos()
            }
            DistributionSpec::ThreePoint { a, prob } => {
                let x = scalar::<R>(uniform53(u0));
                if x < prob {
                    a
                } else if x < prob + prob {
                    -a
                } else {
                    R::zero()
                }
            }
        }
    }
}

/// Dense symmetric matrix stored row-major with both triangles filled.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix<R> {
    n: usize,
    data: Vec<R>,
}

impl<R: Real> SymmetricMatrix<R> {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "matrices here have at least one row");
        SymmetricMatrix {
            n,
            data: vec![R::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` and `(j, i)` together, keeping the symmetry invariant.
    pub fn set_sym(&mut self, i: usize, j: usize, value: R) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> R {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> R {
        self.data
            .iter()
            .map(|&x| x * x)
            .fold(R::zero(), |a, b| a + b)
            .sqrt()
    }
}

/// A random real symmetric matrix law: one distribution for the strict
/// upper triangle (mirrored), another for the diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec<R> {
    offdiag: DistributionSpec<R>,
    diag: DistributionSpec<R>,
}

impl<R: Real> EnsembleSpec<R> {
    /// Ensemble from explicit parts. The off-diagonal part must carry
    /// positive variance — it sets the scale `w`.
    pub fn with_parts(offdiag: DistributionSpec<R>, diag: DistributionSpec<R>) -> Result<Self> {
        offdiag.validate()?;
        diag.validate()?;
        if offdiag.variance() <= R::zero() {
            return Err(Error::InvalidParameter(
                "off-diagonal distribution needs positive variance".into(),
            ));
        }
        Ok(EnsembleSpec { offdiag, diag })
    }

    /// Zero diagonal, off-diagonal entries `±w`.
    pub fn sign(w: R) -> Result<Self> {
        Self::with_parts(DistributionSpec::Sign { w }, DistributionSpec::Zero)
    }

    /// Gaussian orthogonal ensemble at off-diagonal deviation `w`: the
    /// diagonal carries twice the off-diagonal variance.
    pub fn goe(w: R) -> Result<Self> {
        Self::with_parts(
            DistributionSpec::Gaussian { sigma: w },
            DistributionSpec::Gaussian {
                sigma: w * scalar::<R>(2.0).sqrt(),
            },
        )
    }

    /// Ensemble realizing prescribed off-diagonal variance `w * w`, diagonal
    /// variance `v2 >= 0`, and off-diagonal fourth cumulant `kappa4`.
    ///
    /// Both parts are three-point laws: `a^2 = m4 / m2` and
    /// `prob = m2^2 / (2 m4)` reproduce any feasible `(m2, m4)` pair. The
    /// constraint `prob <= 1/2` is exactly the cumulant feasibility bound
    /// `kappa4 >= -2 w^4`. The diagonal law is given a vanishing fourth
    /// cumulant; corrections at this order do not depend on it.
    pub fn general(w: R, v2: R, kappa4: R) -> Result<Self> {
        if !(w > R::zero()) {
            return Err(Error::InvalidParameter(format!(
                "scale w must be positive, got {w}"
            )));
        }
        if v2 < R::zero() {
            return Err(Error::InvalidParameter(format!(
                "diagonal variance must be nonnegative, got {v2}"
            )));
        }
        let w2 = w * w;
        let m4 = kappa4 + scalar::<R>(3.0) * w2 * w2;
        let bound = scalar::<R>(-2.0) * w2 * w2;
        if kappa4 < bound {
            return Err(Error::InfeasibleCumulant {
                kappa4: kappa4.to_f64().unwrap_or(f64::NAN),
                bound: bound.to_f64().unwrap_or(f64::NAN),
                variance: w2.to_f64().unwrap_or(f64::NAN),
            });
        }
        // min() guards against rounding pushing prob a few ulp past the
        // feasibility edge prob = 1/2 when kappa4 sits exactly on the bound.
        let offdiag = DistributionSpec::ThreePoint {
            a: (m4 / w2).sqrt(),
            prob: (w2 * w2 / (scalar::<R>(2.0) * m4)).min(scalar::<R>(0.5)),
        };
        let diag = if v2 == R::zero() {
            DistributionSpec::Zero
        } else {
            DistributionSpec::ThreePoint {
                a: (scalar::<R>(3.0) * v2).sqrt(),
                prob: scalar::<R>(1.0 / 6.0),
            }
        };
        Self::with_parts(offdiag, diag)
    }

    pub fn offdiag(&self) -> &DistributionSpec<R> {
        &self.offdiag
    }

    pub fn diag(&self) -> &DistributionSpec<R> {
        &self.diag
    }

    /// Off-diagonal variance `w^2`.
    pub fn w2(&self) -> R {
        self.offdiag.variance()
    }

    /// Semicircle scale `w`.
    pub fn scale_w(&self) -> R {
        self.w2().sqrt()
    }

    /// Diagonal variance.
    pub fn v2(&self) -> R {
        self.diag.variance()
    }

    /// Off-diagonal fourth cumulant.
    pub fn kappa4(&self) -> R {
        self.offdiag.fourth_cumulant()
    }

    /// Tag of this ensemble's correction piece, parameters in `w`-units.
    pub fn correction_tag(&self) -> FormTag<R> {
        let w2 = self.w2();
        FormTag::GeneralCorrection {
            v2: self.v2() / w2,
            kappa4: self.kappa4() / (w2 * w2),
        }
    }

    /// Draws the full matrix for one `(seed, sample_index)` pair.
    pub fn sample_matrix(
        &self,
        n: usize,
        seed: u64,
        sample_index: u64,
    ) -> Result<SymmetricMatrix<R>> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimension must be at least 1".into(),
            ));
        }
        let mut m = SymmetricMatrix::zero(n);
        for j in 0..n {
            // Cells (j, j..n) are consecutive in the counter layout, so one
            // seek per row suffices.
            let mut rng = cell_rng(seed, sample_index, n, j, j);
            for k in j..n {
                let part = if j == k { &self.diag } else { &self.offdiag };
                m.set_sym(j, k, part.draw(&mut rng));
            }
        }
        Ok(m)
    }

    /// Re-derives a single entry directly from its counter position; equals
    /// `sample_matrix(n, seed, sample_index).get(j, k)` by construction.
    pub fn entry_value(&self, n: usize, seed: u64, sample_index: u64, j: usize, k: usize) -> R {
        let (a, b) = if j <= k { (j, k) } else { (k, j) };
        let part = if a == b { &self.diag } else { &self.offdiag };
        part.draw(&mut cell_rng(seed, sample_index, n, a, b))
    }
}

/// Generator parked at the first word of cell `(j, k)` in sample
/// `sample_index`. Shared with the bit-packed trace kernel so every consumer
/// sees the same entries at the same addresses.
pub(crate) fn cell_rng(seed: u64, sample_index: u64, n: usize, j: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index);
    rng.set_word_pos(WORDS_PER_CELL * (j as u128 * n as u128 + k as u128));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sampling_is_deterministic() {
        let spec = EnsembleSpec::goe(1.0f64).unwrap();
        let a = spec.sample_matrix(8, 42, 3).unwrap();
        let b = spec.sample_matrix(8, 42, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_and_seeds_differ() {
        let spec = EnsembleSpec::goe(1.0f64).unwrap();
        let base = spec.sample_matrix(8, 42, 0).unwrap();
        assert_ne!(base, spec.sample_matrix(8, 42, 1).unwrap());
        assert_ne!(base, spec.sample_matrix(8, 43, 0).unwrap());
    }

    #[test]
    fn entries_match_their_counter_addresses() {
        for spec in [
            EnsembleSpec::sign(0.5f64).unwrap(),
            EnsembleSpec::goe(1.25).unwrap(),
            EnsembleSpec::general(1.0, 0.7, 1.5).unwrap(),
        ] {
            let n = 5;
            let m = spec.sample_matrix(n, 7, 11).unwrap();
            for j in 0..n {
                for k in 0..n {
                    assert_eq!(
                        m.get(j, k),
                        spec.entry_value(n, 7, 11, j, k),
                        "({j}, {k}) of {spec:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn matrices_are_exactly_symmetric() {
        let spec = EnsembleSpec::goe(1.0f64).unwrap();
        let m = spec.sample_matrix(12, 1, 0).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn sign_matrices_take_sign_values_off_the_zero_diagonal() {
        let w = 0.75f64;
        let spec = EnsembleSpec::sign(w).unwrap();
        let m = spec.sample_matrix(10, 5, 2).unwrap();
        let mut saw_plus = false;
        let mut saw_minus = false;
        for i in 0..10 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..10 {
                if i != j {
                    assert!(m.get(i, j) == w || m.get(i, j) == -w);
                    saw_plus |= m.get(i, j) == w;
                    saw_minus |= m.get(i, j) == -w;
                }
            }
        }
        assert!(saw_plus && saw_minus);
    }

    #[test]
    fn three_point_draws_take_three_values() {
        let spec = EnsembleSpec::with_parts(
            DistributionSpec::ThreePoint {
                a: 2.0f64,
                prob: 0.2,
            },
            DistributionSpec::Zero,
        )
        .unwrap();
        let m = spec.sample_matrix(24, 9, 0).unwrap();
        let mut zeros = 0usize;
        for i in 0..24 {
            for j in (i + 1)..24 {
                let x = m.get(i, j);
                assert!(x == 2.0 || x == -2.0 || x == 0.0, "{x}");
                zeros += usize::from(x == 0.0);
            }
        }
        // 276 upper cells at 60% zero probability.
        assert!(zeros > 100 && zeros < 230, "{zeros}");
    }

    #[test]
    fn goe_moments_and_correction_tag() {
        let w = 1.5f64;
        let spec = EnsembleSpec::goe(w).unwrap();
        assert_relative_eq!(spec.w2(), w * w);
        assert_relative_eq!(spec.v2(), 2.0 * w * w, max_relative = 1e-14);
        assert_relative_eq!(spec.kappa4(), 0.0, epsilon = 1e-13);
        match spec.correction_tag() {
            FormTag::GeneralCorrection { v2, kappa4 } => {
                assert_relative_eq!(v2, 2.0, max_relative = 1e-14);
                assert_relative_eq!(kappa4, 0.0, epsilon = 1e-14);
            }
            other => panic!("unexpected tag {other:?}"),
        }
    }

    #[test]
    fn general_constructor_round_trips_moments() {
        let spec = EnsembleSpec::general(1.25f64, 0.8, -1.0).unwrap();
        assert_relative_eq!(spec.w2(), 1.5625, max_relative = 1e-14);
        assert_relative_eq!(spec.v2(), 0.8, max_relative = 1e-14);
        assert_relative_eq!(spec.kappa4(), -1.0, max_relative = 1e-12);
    }

    #[test]
    fn sign_parameters_reproduce_the_sign_law() {
        // kappa4 = -2 w^4 forces prob = 1/2: the zero value disappears.
        let spec = EnsembleSpec::general(1.0f64, 0.0, -2.0).unwrap();
        match spec.offdiag() {
            DistributionSpec::ThreePoint { a, prob } => {
                assert_relative_eq!(*a, 1.0, max_relative = 1e-14);
                assert_relative_eq!(*prob, 0.5, max_relative = 1e-14);
            }
            other => panic!("unexpected off-diagonal law {other:?}"),
        }
        assert_eq!(*spec.diag(), DistributionSpec::Zero);
    }

    #[test]
    fn infeasible_cumulants_are_rejected() {
        let err = EnsembleSpec::general(1.0f64, 0.0, -2.5).unwrap_err();
        assert!(matches!(err, Error::InfeasibleCumulant { .. }), "{err}");
        assert!(EnsembleSpec::general(0.0f64, 1.0, 0.0).is_err());
        assert!(EnsembleSpec::general(1.0f64, -0.1, 0.0).is_err());
        assert!(EnsembleSpec::sign(-1.0f64).is_err());
        assert!(
            EnsembleSpec::<f64>::with_parts(DistributionSpec::Zero, DistributionSpec::Zero)
                .is_err()
        );
    }

    #[test]
    fn gaussian_draws_have_plausible_moments() {
        let sigma = 2.0f64;
        let spec =
            EnsembleSpec::with_parts(DistributionSpec::Gaussian { sigma }, DistributionSpec::Zero)
                .unwrap();
        let n = 64;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let mut count = 0.0;
        for s in 0..10 {
            let m = spec.sample_matrix(n, 123, s).unwrap();
            for i in 0..n {
                for j in (i + 1)..n {
                    sum += m.get(i, j);
                    sum2 += m.get(i, j) * m.get(i, j);
                    count += 1.0;
                }
            }
        }
        let mean = sum / count;
        let var = sum2 / count - mean * mean;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - sigma * sigma).abs() < 0.2, "variance {var}");
    }

    #[test]
    fn single_precision_sampling_works() {
        let spec = EnsembleSpec::<f32>::sign(1.0).unwrap();
        let m = spec.sample_matrix(6, 3, 0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!(m.get(i, j) == 0.0 || m.get(i, j).abs() == 1.0);
            }
        }
    }
}
