//! Exact truncated power series in `u = 1/x` for the resolvents.
//!
//! Everything here is exact rational arithmetic; floating point never enters.
//! The resolvent of a measure with moments `m_p` expands at infinity as
//! `G(x) = sum_p m_p u^(p+1)`, so moments can be read off coefficients. This
//! route is independent of the quadrature route in [`crate::analytic`]: it
//! never evaluates a density, only composes the algebraic closed forms.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::ops::{Div, Neg, Sub};

use crate::combinatorics::catalan_numbers;
use crate::error::{Error, Result};
use crate::FormTag;

/// Truncation order used by the verification reports; keeps every moment up
/// to `p = 11` available.
pub const DEFAULT_ORDER: usize = 12;

/// Coefficient ring for [`PowerSeries`]: a field, in practice `BigRational`.
pub trait Coeff:
    Clone + PartialEq + Zero + One + Neg<Output = Self> + Sub<Output = Self> + Div<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone + PartialEq + Zero + One + Neg<Output = T> + Sub<Output = T> + Div<Output = T>
{
}

/// Polynomial in `u` truncated at a fixed order; `coeffs[p]` multiplies `u^p`.
///
/// All binary operations require equal truncation orders — mixing orders is
/// almost always a bug when comparing expansions term by term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Coeff> PowerSeries<T> {
    /// Series from explicit coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least a constant term");
        PowerSeries { coeffs }
    }

    /// Zero series of the given order.
    pub fn zero(order: usize) -> Self {
        PowerSeries {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    /// Constant series of the given order.
    pub fn constant(order: usize, c: T) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Highest retained power of `u`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `u^p`; panics when `p` exceeds the order.
    pub fn coeff(&self, p: usize) -> &T {
        &self.coeffs[p]
    }

    /// All coefficients, constant term first.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn assert_same_order(&self, other: &Self) {
        assert_eq!(
            self.order(),
            other.order(),
            "series operations require equal truncation orders"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_order(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        PowerSeries { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_order(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        PowerSeries { coeffs }
    }

    pub fn neg(&self) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn scale(&self, factor: &T) -> Self {
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|a| a.clone() * factor.clone())
                .collect(),
        }
    }

    /// Product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_order(other);
        let mut coeffs = vec![T::zero(); self.order() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(self.order() + 1 - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        PowerSeries { coeffs }
    }

    /// Multiplicative inverse modulo `u^(order + 1)`; the constant term must
    /// be nonzero.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let mut inv = vec![T::zero(); self.order() + 1];
        inv[0] = T::one() / self.coeffs[0].clone();
        for n in 1..=self.order() {
            let mut acc = T::zero();
            for k in 1..=n {
                acc = acc + self.coeffs[k].clone() * inv[n - k].clone();
            }
            inv[n] = -(acc / self.coeffs[0].clone());
        }
        Ok(PowerSeries { coeffs: inv })
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.order(), T::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl PowerSeries<BigRational> {
    /// Renders the series in inverse powers of `x`, e.g.
    /// `1/x - (3/4)/x^3 + 2/x^5`; the zero series renders as `0`.
    pub fn in_inverse_powers(&self) -> String {
        let mut out = String::new();
        for (p, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs().to_string();
            let mag = if mag.contains('/') {
                format!("({mag})")
            } else {
                mag
            };
            let term = match p {
                0 => mag,
                1 => format!("{mag}/x"),
                _ => format!("{mag}/x^{p}"),
            };
            if out.is_empty() {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            out.push_str(&term);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

fn ratio(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn check_scale(w: &BigRational) -> Result<()> {
    if w.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "scale w must be positive, got {w}"
        )))
    }
}

/// Expansion of `g(x) = w G0(x)`, where `G0` is the Stieltjes transform of
/// the semicircle law of scale `w`: `g = sum_k Cat(k) (w u)^(2k+1)`.
pub fn semicircle_g(order: usize, w: &BigRational) -> PowerSeries<BigRational> {
    let cat = catalan_numbers(order / 2 + 1);
    let mut coeffs = vec![BigRational::zero(); order + 1];
    let mut w_pow = w.clone();
    for (k, c) in cat.iter().enumerate() {
        let p = 2 * k + 1;
        if p > order {
            break;
        }
        coeffs[p] = BigRational::from_integer(c.clone()) * &w_pow;
        w_pow *= w * w;
    }
    PowerSeries::from_coeffs(coeffs)
}

/// Exact expansion at infinity of the resolvent attached to a closed form.
///
/// For `GeneralCorrection` the parameters are in `w`-units (see [`FormTag`]).
pub fn expand_form(
    tag: &FormTag<BigRational>,
    w: &BigRational,
    order: usize,
) -> Result<PowerSeries<BigRational>> {
    check_scale(w)?;
    let g = semicircle_g(order, w);
    let inv_w = PowerSeries::constant(order, BigRational::one() / w.clone());
    if let FormTag::Semicircle = tag {
        return Ok(g.mul(&inv_w));
    }
    let g2 = g.mul(&g);
    let g3 = g2.mul(&g);
    let g5 = g3.mul(&g2);
    let one = PowerSeries::constant(order, BigRational::one());
    let denom_inv = one.sub(&g2).reciprocal()?;
    let series = match tag {
        FormTag::Semicircle => unreachable!(),
        FormTag::GoeCorrection => g3.mul(&denom_inv).mul(&denom_inv),
        FormTag::SignCorrectionFlawed => g5.mul(&denom_inv).scale(&ratio(-3)),
        FormTag::SignCorrectionFixed => g3.add(&g5).mul(&denom_inv).scale(&ratio(-2)),
        FormTag::GeneralCorrection { v2, kappa4 } => {
            let cubic = g3.scale(&(v2.clone() - ratio(2)));
            let quintic = g5.scale(kappa4);
            cubic.add(&quintic).mul(&denom_inv)
        }
    };
    Ok(series.mul(&inv_w))
}

/// Moments read off a resolvent expansion: `m_p` is the coefficient of
/// `u^(p+1)`. Requires `max_p + 1` within the truncation order.
pub fn moments_from_series(
    series: &PowerSeries<BigRational>,
    max_p: usize,
) -> Result<Vec<BigRational>> {
    if max_p + 1 > series.order() {
        return Err(Error::InvalidParameter(format!(
            "moment order {max_p} needs series order {}, have {}",
            max_p + 1,
            series.order()
        )));
    }
    Ok((0..=max_p).map(|p| series.coeff(p + 1).clone()).collect())
}
