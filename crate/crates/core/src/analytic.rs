//! Closed-form spectral densities, their quadrature, and resolvents.
//!
//! A [`SpectralMeasure`] is a list of point atoms plus smooth parts on the
//! support `[-2w, 2w]`. Integrals use Gauss-Chebyshev quadrature with the
//! nodes taken in exact plus/minus pairs, so integrals of odd functions
//! cancel bitwise instead of to rounding error. Resolvents are evaluated
//! from the algebraic closed forms in [`resolvent_value`], independently of
//! any density, which is what makes the density-resolvent comparison a real
//! consistency check.

use crate::error::{Error, Result};
use crate::num::{scalar, scalar_from_usize, Real};
use crate::FormTag;

/// Default quadrature node count for the consistent forms.
pub const DEFAULT_NODES: usize = 256;
/// Node count for the flawed form, which mixes a weight mismatched to the
/// quadrature; generous nodes make discretization error a non-issue.
pub const FLAWED_NODES: usize = 2048;
/// How far outside the support a Stieltjes evaluation point must sit.
pub const STIELTJES_MARGIN: f64 = 1e-3;

/// Chebyshev polynomial of the first kind, `T_n(x)`, by the three-term
/// recurrence.
pub fn chebyshev_t<R: Real>(n: u32, x: R) -> R {
    match n {
        0 => R::one(),
        1 => x,
        _ => {
            let mut prev = R::one();
            let mut cur = x;
            for _ in 2..=n {
                let next = scalar::<R>(2.0) * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// A point mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<R> {
    pub location: R,
    pub mass: R,
}

/// Continuous component on `[-2w, 2w]`, written in the scaled variable
/// `t = lambda / 2w`.
#[derive(Clone, Debug, PartialEq)]
pub enum SmoothPart<R> {
    /// `coeff * sqrt(4 w^2 - lambda^2)`.
    SemicircleWeight { coeff: R },
    /// `(sum_k coeffs[k] T_k(t)) / sqrt(1 - t^2)` strictly inside the
    /// support.
    ChebyshevWeight { coeffs: Vec<R> },
    /// The published inconsistent sign-correction shape, transcribed
    /// verbatim.
    FlawedSignShape,
}

/// Atoms plus smooth parts with a common support scale.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure<R> {
    w: R,
    atoms: Vec<Atom<R>>,
    smooth: Vec<SmoothPart<R>>,
    default_nodes: usize,
}

impl<R: Real> SpectralMeasure<R> {
    /// Measure attached to a closed form at scale `w`.
    pub fn from_form(tag: &FormTag<R>, w: R) -> Result<Self> {
        if !(w > R::zero()) {
            return Err(Error::InvalidParameter(format!(
                "scale w must be positive, got {w}"
            )));
        }
        let two_pi_w = scalar::<R>(2.0) * R::PI() * w;
        let measure = match tag {
            FormTag::Semicircle => SpectralMeasure {
                w,
                atoms: vec![],
                smooth: vec![SmoothPart::SemicircleWeight {
                    coeff: R::one() / (two_pi_w * w),
                }],
                default_nodes: DEFAULT_NODES,
            },
            FormTag::GoeCorrection => SpectralMeasure {
                w,
                atoms: vec![
                    Atom {
                        location: -(w + w),
                        mass: scalar::<R>(0.25),
                    },
                    Atom {
                        location: w + w,
                        mass: scalar::<R>(0.25),
                    },
                ],
                smooth: vec![SmoothPart::ChebyshevWeight {
                    coeffs: vec![-R::one() / (scalar::<R>(2.0) * two_pi_w)],
                }],
                default_nodes: DEFAULT_NODES,
            },
            FormTag::SignCorrectionFixed => SpectralMeasure {
                w,
                atoms: vec![],
                smooth: vec![SmoothPart::ChebyshevWeight {
                    coeffs: vec![
                        R::zero(),
                        R::zero(),
                        -scalar::<R>(2.0) / two_pi_w,
                        R::zero(),
                        -scalar::<R>(2.0) / two_pi_w,
                    ],
                }],
                default_nodes: DEFAULT_NODES,
            },
            FormTag::GeneralCorrection { v2, kappa4 } => SpectralMeasure {
                w,
                atoms: vec![],
                smooth: vec![SmoothPart::ChebyshevWeight {
                    coeffs: vec![
                        R::zero(),
                        R::zero(),
                        (*v2 - scalar::<R>(2.0)) / two_pi_w,
                        R::zero(),
                        *kappa4 / two_pi_w,
                    ],
                }],
                default_nodes: DEFAULT_NODES,
            },
            FormTag::SignCorrectionFlawed => SpectralMeasure {
                w,
                atoms: vec![],
                smooth: vec![SmoothPart::FlawedSignShape],
                default_nodes: FLAWED_NODES,
            },
        };
        Ok(measure)
    }

    pub fn scale_w(&self) -> R {
        self.w
    }

    pub fn atoms(&self) -> &[Atom<R>] {
        &self.atoms
    }

    pub fn smooth_parts(&self) -> &[SmoothPart<R>] {
        &self.smooth
    }

    pub fn default_nodes(&self) -> usize {
        self.default_nodes
    }

    /// Value of the continuous part at `lambda`; atoms are not included.
    /// Outside the open support every smooth part vanishes by its indicator.
    pub fn density_value(&self, lambda: R) -> R {
        let two_w = self.w + self.w;
        let t = lambda / two_w;
        let mut total = R::zero();
        for part in &self.smooth {
            total += match part {
                SmoothPart::SemicircleWeight { coeff } => {
                    if t.abs() <= R::one() {
                        let disc = (two_w * two_w - lambda * lambda).max(R::zero());
                        *coeff * disc.sqrt()
                    } else {
                        R::zero()
                    }
                }
                SmoothPart::ChebyshevWeight { coeffs } => {
                    if t.abs() < R::one() {
                        let num: R = coeffs
                            .iter()
                            .enumerate()
                            .map(|(k, c)| *c * chebyshev_t(k as u32, t))
                            .sum();
                        num / (R::one() - t * t).sqrt()
                    } else {
                        R::zero()
                    }
                }
                SmoothPart::FlawedSignShape => flawed_sign_density(self.w, lambda),
            };
        }
        total
    }

    /// Integral of `phi` against the measure with an explicit node count.
    ///
    /// Nodes are forced even so they pair as `t, -t` exactly; `phi` values
    /// of an odd integrand then cancel bitwise.
    pub fn integrate_with(&self, nodes: usize, phi: impl Fn(R) -> R) -> R {
        let mut total = R::zero();
        for atom in &self.atoms {
            total += atom.mass * phi(atom.location);
        }
        for part in &self.smooth {
            total += self.smooth_integral(part, nodes, &phi);
        }
        total
    }

    /// Integral of `phi` with the measure's default node count.
    pub fn integrate(&self, phi: impl Fn(R) -> R) -> R {
        self.integrate_with(self.default_nodes, phi)
    }

    /// `k`-th moment; the node count grows with `k` so high moments stay
    /// resolved.
    pub fn moment(&self, k: u32) -> R {
        let nodes = self.default_nodes.max(k as usize + 8);
        self.integrate_with(nodes, |lambda| lambda.powi(k as i32))
    }

    /// Stieltjes transform `int d_mu(lambda) / (x - lambda)` for real `x`
    /// at least [`STIELTJES_MARGIN`] outside the support.
    pub fn stieltjes(&self, x: R) -> Result<R> {
        check_outside_support(self.w, x)?;
        Ok(self.integrate(|lambda| R::one() / (x - lambda)))
    }

    /// Uniform inclusive grid over `[-2w, 2w]`; odd point counts hit zero
    /// exactly at the middle index.
    pub fn support_grid(&self, points: usize) -> Result<Vec<R>> {
        if points < 2 {
            return Err(Error::InvalidParameter(
                "a grid needs at least two points".into(),
            ));
        }
        let two_w = self.w + self.w;
        let denom = (points - 1) as f64;
        Ok((0..points)
            .map(|i| {
                let num = 2 * i as i64 - (points as i64 - 1);
                two_w * scalar::<R>(num as f64 / denom)
            })
            .collect())
    }

    fn smooth_integral(&self, part: &SmoothPart<R>, nodes: usize, phi: impl Fn(R) -> R) -> R {
        let two_w = self.w + self.w;
        match part {
            SmoothPart::SemicircleWeight { coeff } => {
                let c = *coeff * two_w * two_w;
                chebyshev_quadrature(nodes, |t| phi(two_w * t) * c * (R::one() - t * t))
            }
            SmoothPart::ChebyshevWeight { coeffs } => chebyshev_quadrature(nodes, |t| {
                let num: R = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| *c * chebyshev_t(k as u32, t))
                    .sum();
                phi(two_w * t) * num * two_w
            }),
            SmoothPart::FlawedSignShape => chebyshev_quadrature(nodes, |t| {
                let lambda = two_w * t;
                phi(lambda)
                    * flawed_sign_density(self.w, lambda)
                    * two_w
                    * (R::one() - t * t).sqrt()
            }),
        }
    }
}

/// Gauss-Chebyshev rule for `int_{-1}^{1} f(t) / sqrt(1 - t^2) dt` with
/// symmetric node pairing: only positive-angle nodes are computed and each
/// is paired with its exact negation, so odd integrands cancel to the bit.
/// Rounds `nodes` up to the next even count.
pub fn chebyshev_quadrature<R: Real>(nodes: usize, f: impl Fn(R) -> R) -> R {
    let m = {
        let m = nodes.max(2);
        m + (m & 1)
    };
    let mut sum = R::zero();
    for i in 0..m / 2 {
        let theta = R::PI() * scalar_from_usize::<R>(2 * i + 1) / scalar_from_usize::<R>(2 * m);
        let t = theta.cos();
        sum += f(t) + f(-t);
    }
    sum * R::PI() / scalar_from_usize::<R>(m)
}

/// The published inconsistent sign-correction density, transcribed exactly:
/// `(3 / 8 pi) sqrt(4 w^2 - l^2) / w^4 *
///  ((3 l^2 - 2 w^2) - 2 l^2 (l^2 - 2 w^2) / (4 w^2 - l^2))`
/// strictly inside the support. Even in `lambda` down to the last bit.
pub fn flawed_sign_density<R: Real>(w: R, lambda: R) -> R {
    let w2 = w * w;
    let l2 = lambda * lambda;
    let disc = scalar::<R>(4.0) * w2 - l2;
    if disc <= R::zero() {
        return R::zero();
    }
    let prefactor = scalar::<R>(3.0) / (scalar::<R>(8.0) * R::PI()) * disc.sqrt() / (w2 * w2);
    let bracket = scalar::<R>(3.0) * l2
        - scalar::<R>(2.0) * w2
        - scalar::<R>(2.0) * l2 * (l2 - scalar::<R>(2.0) * w2) / disc;
    prefactor * bracket
}

fn check_outside_support<R: Real>(w: R, x: R) -> Result<()> {
    let margin = scalar::<R>(STIELTJES_MARGIN);
    if x.abs() - (w + w) > margin {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            x: x.to_f64().unwrap_or(f64::NAN),
            edge: (w + w).to_f64().unwrap_or(f64::NAN),
            margin: STIELTJES_MARGIN,
        })
    }
}

/// Closed-form resolvent of a form at real `x` outside the support.
///
/// Uses the cancellation-free branch
/// `G0(x) = 2 / (x + sign(x) sqrt(x^2 - 4 w^2))` of the semicircle
/// resolvent, then composes the correction forms algebraically.
pub fn resolvent_value<R: Real>(tag: &FormTag<R>, w: R, x: R) -> Result<R> {
    if !(w > R::zero()) {
        return Err(Error::InvalidParameter(format!(
            "scale w must be positive, got {w}"
        )));
    }
    check_outside_support(w, x)?;
    let root = (x * x - scalar::<R>(4.0) * w * w).sqrt();
    let g0 = scalar::<R>(2.0) / (x + x.signum() * root);
    let g = w * g0;
    let g2 = g * g;
    let g3 = g2 * g;
    let g5 = g3 * g2;
    let denom = w * (R::one() - g2);
    Ok(match tag {
        FormTag::Semicircle => g0,
        FormTag::GoeCorrection => g3 / (denom * (R::one() - g2)),
        FormTag::SignCorrectionFlawed => scalar::<R>(-3.0) * g5 / denom,
        FormTag::SignCorrectionFixed => scalar::<R>(-2.0) * (g3 + g5) / denom,
        FormTag::GeneralCorrection { v2, kappa4 } => {
            ((*v2 - scalar::<R>(2.0)) * g3 + *kappa4 * g5) / denom
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn measure(tag: &FormTag<f64>, w: f64) -> SpectralMeasure<f64> {
        SpectralMeasure::from_form(tag, w).unwrap()
    }

    #[test]
    fn chebyshev_matches_cosine_identity() {
        for n in 0..=8u32 {
            for &theta in &[0.0, 0.3, 1.1, 2.0, std::f64::consts::PI] {
                assert_abs_diff_eq!(
                    chebyshev_t(n, theta.cos()),
                    (n as f64 * theta).cos(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        for &w in &[1.0, 1.7] {
            let m = measure(&FormTag::Semicircle, w);
            for (k, cat) in [(0u32, 1.0), (2, 1.0), (4, 2.0), (6, 5.0), (8, 14.0)] {
                assert_relative_eq!(m.moment(k), cat * w.powi(k as i32), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn odd_moments_cancel_bitwise() {
        for tag in [
            FormTag::Semicircle,
            FormTag::GoeCorrection,
            FormTag::SignCorrectionFlawed,
            FormTag::SignCorrectionFixed,
            FormTag::GeneralCorrection {
                v2: 1.3,
                kappa4: -0.7,
            },
        ] {
            let m = measure(&tag, 1.3);
            for k in [1u32, 3, 5, 7] {
                assert_eq!(m.moment(k), 0.0, "{tag:?} k={k}");
            }
        }
    }

    #[test]
    fn goe_correction_moments() {
        // Mass zero; even moments w^2, 5 w^4, 22 w^6 — frozen from the
        // exact expansion route before this module existed.
        for &w in &[1.0, 0.8] {
            let m = measure(&FormTag::GoeCorrection, w);
            assert_abs_diff_eq!(m.moment(0), 0.0, epsilon = 1e-12);
            assert_relative_eq!(m.moment(2), w.powi(2), max_relative = 1e-11);
            assert_relative_eq!(m.moment(4), 5.0 * w.powi(4), max_relative = 1e-11);
            assert_relative_eq!(m.moment(6), 22.0 * w.powi(6), max_relative = 1e-11);
        }
    }

    #[test]
    fn fixed_sign_correction_moments() {
        let w = 1.25f64;
        let m = measure(&FormTag::SignCorrectionFixed, w);
        assert_abs_diff_eq!(m.moment(0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(m.moment(2), -2.0 * w.powi(2), max_relative = 1e-11);
        assert_relative_eq!(m.moment(4), -10.0 * w.powi(4), max_relative = 1e-11);
        assert_relative_eq!(m.moment(6), -42.0 * w.powi(6), max_relative = 1e-11);
    }

    #[test]
    fn general_correction_moments_follow_binomial_weights() {
        // m_{2k} = w^{2k} ((v2 - 2) binom(2k, k-1) + kappa4 binom(2k, k-2)),
        // the Chebyshev moment identity over the arcsine weight.
        let w = 1.1f64;
        for (v2, kappa4) in [(0.0, -2.0), (2.5, 0.3), (1.0, 1.0)] {
            let m = measure(&FormTag::GeneralCorrection { v2, kappa4 }, w);
            let binom = |n: i64, k: i64| -> f64 {
                if k < 0 {
                    return 0.0;
                }
                let mut acc = 1.0;
                for i in 0..k {
                    acc = acc * (n - i) as f64 / (i + 1) as f64;
                }
                acc
            };
            for k in 0..=3i64 {
                let expected = w.powi(2 * k as i32)
                    * ((v2 - 2.0) * binom(2 * k, k - 1) + kappa4 * binom(2 * k, k - 2));
                assert_abs_diff_eq!(
                    m.moment(2 * k as u32),
                    expected,
                    epsilon = 1e-10 * w.powi(2 * k as i32)
                );
            }
        }
    }

    #[test]
    fn flawed_form_carries_spurious_mass_and_moments() {
        // The defect this library exists to exhibit: quadrature of the
        // published form gives mass -3/4 and second moment -3 w^2 (and
        // fourth moment -57/4 w^4), where a correction term must give zero.
        for &w in &[1.0, 1.5] {
            let m = measure(&FormTag::SignCorrectionFlawed, w);
            assert_abs_diff_eq!(m.moment(0), -0.75, epsilon = 1e-10);
            assert_abs_diff_eq!(m.moment(2), -3.0 * w * w, epsilon = 1e-9);
            assert_abs_diff_eq!(m.moment(4), -14.25 * w.powi(4), epsilon = 1e-9);
        }
    }

    #[test]
    fn density_values_at_reference_points() {
        let w = 1.0f64;
        let semi = measure(&FormTag::Semicircle, w);
        assert_relative_eq!(
            semi.density_value(0.0),
            1.0 / std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert_eq!(semi.density_value(2.0), 0.0);
        assert_eq!(semi.density_value(-2.5), 0.0);

        let goe = measure(&FormTag::GoeCorrection, w);
        assert_relative_eq!(
            goe.density_value(0.0),
            -1.0 / (4.0 * std::f64::consts::PI),
            max_relative = 1e-14
        );
        // Strict indicator: the continuous part is zero at the edge even
        // though it diverges just inside.
        assert_eq!(goe.density_value(2.0), 0.0);
        assert!(goe.density_value(1.999).abs() > 1.0);

        // T_2(0) = -1, T_4(0) = 1: the fixed form cancels at the origin.
        let fixed = measure(&FormTag::SignCorrectionFixed, w);
        assert_abs_diff_eq!(fixed.density_value(0.0), 0.0, epsilon = 1e-15);

        let flawed = measure(&FormTag::SignCorrectionFlawed, w);
        assert_relative_eq!(
            flawed.density_value(0.0),
            flawed_sign_density(w, 0.0),
            max_relative = 1e-15
        );
        // (3/8pi) * 2 * (-2) at the origin for w = 1.
        assert_relative_eq!(
            flawed_sign_density(1.0, 0.0),
            -1.5 / std::f64::consts::PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn goe_atoms_sit_at_the_edges() {
        let m = measure(&FormTag::GoeCorrection, 1.5);
        let atoms = m.atoms();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[0].location, -3.0);
        assert_eq!(atoms[1].location, 3.0);
        assert_eq!(atoms[0].mass, 0.25);
        assert_eq!(atoms[1].mass, 0.25);
        assert!(measure(&FormTag::Semicircle, 1.5).atoms().is_empty());
    }

    #[test]
    fn support_grid_is_symmetric_with_exact_midpoint() {
        let m = measure(&FormTag::Semicircle, 1.3);
        let grid = m.support_grid(401).unwrap();
        assert_eq!(grid.len(), 401);
        assert_eq!(grid[0], -2.6);
        assert_eq!(grid[400], 2.6);
        assert_eq!(grid[200], 0.0);
        for i in 0..401 {
            assert_eq!(grid[i], -grid[400 - i], "i={i}");
        }
        assert!(m.support_grid(1).is_err());
    }

    #[test]
    fn stieltjes_matches_resolvent_for_consistent_forms() {
        let w = 1.0f64;
        let golden = (3.0 - 5.0f64.sqrt()) / 2.0;
        assert_relative_eq!(
            resolvent_value(&FormTag::Semicircle, w, 3.0).unwrap(),
            golden,
            max_relative = 1e-14
        );
        for tag in [
            FormTag::Semicircle,
            FormTag::GoeCorrection,
            FormTag::SignCorrectionFixed,
            FormTag::GeneralCorrection {
                v2: 2.0,
                kappa4: 0.5,
            },
        ] {
            let m = measure(&tag, w);
            for &x in &[2.5, 3.0, -3.0, 10.0] {
                assert_abs_diff_eq!(
                    m.stieltjes(x).unwrap(),
                    resolvent_value(&tag, w, x).unwrap(),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn stieltjes_exposes_the_flawed_form_mismatch() {
        let w = 1.0f64;
        let m = measure(&FormTag::SignCorrectionFlawed, w);
        let density_route = m.stieltjes(3.0).unwrap();
        let resolvent_route = resolvent_value(&FormTag::SignCorrectionFlawed, w, 3.0).unwrap();
        assert!(
            (density_route - resolvent_route).abs() > 0.1,
            "the two routes must visibly disagree, got {density_route} vs {resolvent_route}"
        );
    }

    #[test]
    fn resolvent_is_stable_far_from_the_support() {
        let g = resolvent_value(&FormTag::Semicircle, 1.0f64, 1e8).unwrap();
        assert_relative_eq!(g * 1e8, 1.0, max_relative = 1e-10);
        let g_neg = resolvent_value(&FormTag::Semicircle, 1.0f64, -1e8).unwrap();
        assert_relative_eq!(g_neg * -1e8, 1.0, max_relative = 1e-10);
        assert!(g_neg < 0.0);
    }

    #[test]
    fn evaluation_points_near_the_support_are_rejected() {
        let m = measure(&FormTag::Semicircle, 1.0);
        for x in [2.0, 2.0005, -2.0005, 0.0, 1.9] {
            assert!(
                matches!(m.stieltjes(x), Err(Error::OutOfDomain { .. })),
                "{x}"
            );
            assert!(
                resolvent_value(&FormTag::Semicircle, 1.0, x).is_err(),
                "{x}"
            );
        }
        assert!(m.stieltjes(2.002).is_ok());
        assert!(m.stieltjes(-2.002).is_ok());
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(SpectralMeasure::from_form(&FormTag::<f64>::Semicircle, 0.0).is_err());
        assert!(SpectralMeasure::from_form(&FormTag::<f64>::Semicircle, -2.0).is_err());
        assert!(resolvent_value(&FormTag::<f64>::Semicircle, -1.0, 5.0).is_err());
    }

    #[test]
    fn quadrature_integrates_polynomials_against_arcsine_weight() {
        // int t^{2j} / sqrt(1 - t^2) = pi binom(2j, j) / 4^j; exact for the
        // rule once the degree is below the node count.
        let vals = [(0u32, 1.0), (2, 0.5), (4, 0.375), (6, 0.3125)];
        for (p, frac) in vals {
            let got = chebyshev_quadrature(16, |t: f64| t.powi(p as i32));
            assert_relative_eq!(got, std::f64::consts::PI * frac, max_relative = 1e-13);
        }
        let odd = chebyshev_quadrature(16, |t: f64| t.powi(3));
        assert_eq!(odd, 0.0);
    }

    #[test]
    fn single_precision_path_is_consistent() {
        let m = SpectralMeasure::<f32>::from_form(&FormTag::Semicircle, 1.0).unwrap();
        assert!((m.moment(0) - 1.0).abs() < 1e-5);
        assert!((m.moment(2) - 1.0).abs() < 1e-4);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn densities_vanish_outside_the_support(
                w in 0.5f64..2.0,
                v2 in 0.0f64..3.0,
                kappa4 in -1.5f64..3.0,
                offset in 1e-9f64..5.0,
            ) {
                for tag in [
                    FormTag::Semicircle,
                    FormTag::GoeCorrection,
                    FormTag::SignCorrectionFlawed,
                    FormTag::SignCorrectionFixed,
                    FormTag::GeneralCorrection { v2, kappa4 },
                ] {
                    let m = SpectralMeasure::from_form(&tag, w).unwrap();
                    prop_assert_eq!(m.density_value(2.0 * w + offset), 0.0);
                    prop_assert_eq!(m.density_value(-2.0 * w - offset), 0.0);
                }
            }

            #[test]
            fn density_is_even_to_the_bit(
                w in 0.5f64..2.0,
                lambda in 0.0f64..4.0,
            ) {
                for tag in [
                    FormTag::Semicircle,
                    FormTag::GoeCorrection,
                    FormTag::SignCorrectionFlawed,
                    FormTag::SignCorrectionFixed,
                ] {
                    let m = SpectralMeasure::from_form(&tag, w).unwrap();
                    prop_assert_eq!(m.density_value(lambda), m.density_value(-lambda));
                }
            }

            #[test]
            fn correction_masses_vanish_under_quadrature(
                w in 0.5f64..2.0,
                v2 in 0.0f64..3.0,
                kappa4 in -1.5f64..3.0,
            ) {
                for tag in [
                    FormTag::GoeCorrection,
                    FormTag::SignCorrectionFixed,
                    FormTag::GeneralCorrection { v2, kappa4 },
                ] {
                    let m = SpectralMeasure::from_form(&tag, w).unwrap();
                    prop_assert!(m.moment(0).abs() < 1e-10, "{:?}: {}", tag, m.moment(0));
                }
            }
        }
    }
}
