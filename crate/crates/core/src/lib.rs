//! Finite-size corrections to the Wigner semicircle law.
//!
//! For a real symmetric random matrix with independent entries, the empirical
//! spectral density of `X / sqrt(N)` converges to the semicircle law. The
//! leading finite-size correction at order `1/N` splits into a universal piece
//! (edge atoms plus a bulk deficit) and an ensemble-dependent piece controlled
//! by the diagonal variance and the off-diagonal fourth cumulant.
//!
//! A published closed form for the ensemble piece of the sign ensemble is
//! internally inconsistent: it carries total mass `-3/4` and second moment
//! `-3 w^2`, while every correction term must integrate to zero. This crate
//! keeps that flawed form alongside the corrected ones and verifies the
//! corrections through four independent routes:
//!
//! 1. numerical quadrature of the closed-form densities ([`analytic`]),
//! 2. exact rational expansion of the resolvents at infinity ([`series`]),
//! 3. exact combinatorial trace moments at finite `N` ([`exact_moments`]),
//! 4. Monte Carlo sampling of the ensembles ([`ensembles`], [`spectra`]).
//!
//! [`consistency`] ties the routes together into machine-checkable reports.
//!
//! Floating-point routines are generic over the scalar through [`Real`]
//! (`f32` or `f64`); exact routes use arbitrary-precision rationals. The
//! aliases below fix the default concrete types.

pub mod analytic;
pub mod combinatorics;
pub mod consistency;
pub mod ensembles;
pub mod error;
pub mod exact_moments;
pub mod num;
pub mod series;
pub mod spectra;

pub use error::{Error, Result};
pub use num::Real;

use num_rational::BigRational;

/// Default floating-point scalar.
pub type Scalar = f64;
/// Exact coefficient type used by the series and trace-moment routes.
pub type Rational = BigRational;

/// Spectral measure over the default scalar.
pub type SpectralMeasure = analytic::SpectralMeasure<Scalar>;
/// Ensemble description over the default scalar.
pub type EnsembleSpec = ensembles::EnsembleSpec<Scalar>;
/// Symmetric matrix over the default scalar.
pub type SymmetricMatrix = ensembles::SymmetricMatrix<Scalar>;
/// Truncated power series with exact rational coefficients.
pub type RationalSeries = series::PowerSeries<Rational>;

/// The closed forms handled by both the density and the series route.
///
/// `T` is the parameter type: a float for quadrature, [`Rational`] for exact
/// expansion. Parameters of `GeneralCorrection` are expressed in units of the
/// off-diagonal variance (`v2` divided by `w^2`, `kappa4` divided by `w^4`),
/// so the tag is scale-free.
#[derive(Clone, Debug, PartialEq)]
pub enum FormTag<T> {
    /// Limiting semicircle density on `[-2w, 2w]`.
    Semicircle,
    /// Universal `1/N` piece: atoms of mass `1/4` at the edges plus the
    /// arcsine-weighted bulk deficit.
    GoeCorrection,
    /// Published ensemble piece for the sign ensemble, kept to demonstrate
    /// its inconsistency (mass `-3/4` instead of `0`).
    SignCorrectionFlawed,
    /// Corrected ensemble piece for the sign ensemble.
    SignCorrectionFixed,
    /// Ensemble piece for general diagonal variance and off-diagonal fourth
    /// cumulant, in `w`-units: `v2 = <d^2>/w^2`, `kappa4 = k4/w^4`.
    GeneralCorrection { v2: T, kappa4: T },
}

impl<T> FormTag<T> {
    /// Converts the parameter type, leaving the tag unchanged.
    pub fn map_params<U>(&self, mut f: impl FnMut(&T) -> U) -> FormTag<U> {
        match self {
            FormTag::Semicircle => FormTag::Semicircle,
            FormTag::GoeCorrection => FormTag::GoeCorrection,
            FormTag::SignCorrectionFlawed => FormTag::SignCorrectionFlawed,
            FormTag::SignCorrectionFixed => FormTag::SignCorrectionFixed,
            FormTag::GeneralCorrection { v2, kappa4 } => FormTag::GeneralCorrection {
                v2: f(v2),
                kappa4: f(kappa4),
            },
        }
    }

    /// `true` for the pieces that enter at order `1/N` (everything except the
    /// limiting density).
    pub fn is_correction(&self) -> bool {
        !matches!(self, FormTag::Semicircle)
    }
}
