//! Exact expected trace moments `<Tr X^p>` at finite `N`.
//!
//! Two independent exact routes live here: closed-form polynomials in `N`
//! (graphical-enumeration results for symmetric matrices with even entry
//! distributions) and a direct sum over all closed index walks. Both are
//! exact rational arithmetic; agreement between them validates the closed
//! forms before their subleading coefficients are compared with the other
//! routes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinatorics::odd_double_factorial;
use crate::ensembles::DistributionSpec;
use crate::error::{Error, Result};
use crate::num::Real;

/// Walk-enumeration budget: `n^p` may not exceed this.
pub const ENUMERATION_BUDGET: u128 = 20_000_000;

/// Even moments of a symmetric (mean-zero, even) entry distribution.
///
/// Only even orders are stored; odd moments are identically zero and the
/// zeroth moment is one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MomentSequence {
    even: BTreeMap<u32, BigRational>,
}

impl MomentSequence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insertion of the moment of even order `p`.
    pub fn with(mut self, p: u32, value: BigRational) -> Self {
        assert!(p >= 2 && p % 2 == 0, "only even orders >= 2 are stored");
        self.even.insert(p, value);
        self
    }

    /// Exact moments of a sampling distribution up to order `max_p`.
    ///
    /// Parameters are rationalized from their floating-point values, so the
    /// result describes exactly the distribution the sampler draws from.
    pub fn from_distribution<R: Real>(d: &DistributionSpec<R>, max_p: u32) -> Self {
        let exact = |x: R| {
            BigRational::from_float(x.to_f64().expect("distribution parameters are finite"))
                .expect("distribution parameters are finite")
        };
        let mut seq = Self::new();
        for p in (2..=max_p).step_by(2) {
            let m = match d {
                DistributionSpec::Zero => BigRational::zero(),
                DistributionSpec::Sign { w } => exact(*w).pow(p as i32),
                DistributionSpec::Gaussian { sigma } => {
                    exact(*sigma).pow(p as i32)
                        * BigRational::from_integer(odd_double_factorial(u64::from(p) / 2))
                }
                DistributionSpec::ThreePoint { a, prob } => {
                    BigRational::from_integer(2.into()) * exact(*prob) * exact(*a).pow(p as i32)
                }
            };
            seq.even.insert(p, m);
        }
        seq
    }

    /// Moment of order `p`: one at zero, zero for odd `p`, stored value
    /// otherwise.
    pub fn moment(&self, p: u32) -> Result<BigRational> {
        if p == 0 {
            return Ok(BigRational::one());
        }
        if p % 2 == 1 {
            return Ok(BigRational::zero());
        }
        self.even
            .get(&p)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("moment of order {p} was not provided")))
    }

    /// `true` when every stored moment vanishes (a point mass at zero).
    pub fn is_identically_zero(&self) -> bool {
        self.even.values().all(|m| m.is_zero())
    }

    /// Highest stored order.
    pub fn max_order(&self) -> u32 {
        self.even.keys().next_back().copied().unwrap_or(0)
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn big_n(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `<Tr J^p>` for a symmetric matrix with zero diagonal and iid even
/// off-diagonal entries with moments `sigma`; closed forms exist for
/// `p = 2, 4, 6, 8`.
pub fn offdiag_trace_moment(n: u64, p: u32, sigma: &MomentSequence) -> Result<BigRational> {
    let nn = big_n(n);
    let s2 = sigma.moment(2)?;
    let fall2 = &nn * (&nn - big(1));
    let fall3 = &fall2 * (&nn - big(2));
    Ok(match p {
        2 => &fall2 * &s2,
        4 => {
            let s4 = sigma.moment(4)?;
            &fall2 * &s4 + big(2) * &fall3 * s2.pow(2)
        }
        6 => {
            let s4 = sigma.moment(4)?;
            let s6 = sigma.moment(6)?;
            &fall2 * &s6
                + big(6) * &fall3 * &s4 * &s2
                + &fall3 * (big(5) * &nn - big(11)) * s2.pow(3)
        }
        8 => {
            let s4 = sigma.moment(4)?;
            let s6 = sigma.moment(6)?;
            let s8 = sigma.moment(8)?;
            &fall2 * &s8
                + &fall3 * (big(8) * &s6 * &s2 + big(6) * s4.pow(2))
                + big(28) * &fall3 * (&nn - big(2)) * &s4 * s2.pow(2)
                + &fall3 * (&nn - big(3)) * (big(14) * &nn - big(19)) * s2.pow(4)
        }
        _ => {
            return Err(Error::UnsupportedPower {
                p,
                context: "for the zero-diagonal closed forms (need p in {2, 4, 6, 8})",
            })
        }
    })
}

/// `<Tr S^p>` for a symmetric matrix with iid even off-diagonal entries
/// (moments `sigma`) and iid even diagonal entries from a distinct
/// distribution (moments `tau`); closed forms exist for `p = 2, 4, 6`.
pub fn general_trace_moment(
    n: u64,
    p: u32,
    sigma: &MomentSequence,
    tau: &MomentSequence,
) -> Result<BigRational> {
    let nn = big_n(n);
    let n2 = nn.pow(2);
    let n3 = nn.pow(3);
    let n4 = nn.pow(4);
    let s2 = sigma.moment(2)?;
    let t2 = tau.moment(2)?;
    Ok(match p {
        2 => &n2 * &s2 + &nn * (&t2 - &s2),
        4 => {
            let s4 = sigma.moment(4)?;
            let t4 = tau.moment(4)?;
            big(2) * &n3 * s2.pow(2)
                + &n2 * (big(4) * &s2 * &t2 + &s4 - big(6) * s2.pow(2))
                + &nn * (&t4 - &s4 - big(4) * &s2 * &t2 + big(4) * s2.pow(2))
        }
        6 => {
            let s4 = sigma.moment(4)?;
            let s6 = sigma.moment(6)?;
            let t4 = tau.moment(4)?;
            let t6 = tau.moment(6)?;
            big(5) * &n4 * s2.pow(3)
                + &n3 * (big(15) * s2.pow(2) * &t2 + big(6) * &s2 * &s4 - big(26) * s2.pow(3))
                + &n2
                    * (big(6) * &s2 * &t4
                        + big(3) * &s2 * t2.pow(2)
                        + big(9) * &s4 * &t2
                        + big(-45) * s2.pow(2) * &t2
                        + &s6
                        + big(-18) * &s2 * &s4
                        + big(43) * s2.pow(3))
                + &nn
                    * (&t6
                        + big(-6) * &s2 * &t4
                        + big(-3) * &s2 * t2.pow(2)
                        + big(-9) * &s4 * &t2
                        + big(30) * s2.pow(2) * &t2
                        - &s6
                        + big(12) * &s2 * &s4
                        + big(-22) * s2.pow(3))
        }
        _ => {
            return Err(Error::UnsupportedPower {
                p,
                context: "for the general-diagonal closed forms (need p in {2, 4, 6})",
            })
        }
    })
}

/// Leading and subleading coefficients of `<Tr X^p>` in powers of `N`:
/// the coefficient of `N^(p/2 + 1)` and of `N^(p/2)`, for `p = 2, 4, 6`.
///
/// Inputs are the off-diagonal variance `w2`, the diagonal variance `v2`,
/// and the off-diagonal fourth cumulant `kappa4`, all in absolute units.
pub fn subleading_coefficients(
    p: u32,
    w2: &BigRational,
    v2: &BigRational,
    kappa4: &BigRational,
) -> Result<(BigRational, BigRational)> {
    Ok(match p {
        2 => (w2.clone(), v2 - w2),
        4 => (
            big(2) * w2.pow(2),
            big(4) * w2 * v2 + kappa4 - big(3) * w2.pow(2),
        ),
        6 => (
            big(5) * w2.pow(3),
            big(15) * w2.pow(2) * v2 + big(6) * w2 * kappa4 - big(8) * w2.pow(3),
        ),
        _ => {
            return Err(Error::UnsupportedPower {
                p,
                context: "for the two-term large-N expansion (need p in {2, 4, 6})",
            })
        }
    })
}

/// `<Tr X^p>` by direct summation over all `n^p` closed index walks.
///
/// Each walk contributes the product over its distinct edges of the entry
/// moment of the edge multiplicity; walks with any odd-multiplicity edge
/// contribute zero and are pruned early. Cost is bounded by
/// [`ENUMERATION_BUDGET`].
pub fn brute_force_trace_moment(
    n: u64,
    p: u32,
    sigma: &MomentSequence,
    tau: &MomentSequence,
) -> Result<BigRational> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidParameter(
            "walk enumeration needs n >= 1 and p >= 1".into(),
        ));
    }
    let cost = u128::from(n)
        .checked_pow(p)
        .ok_or(Error::EnumerationBudget {
            cost: u128::MAX,
            budget: ENUMERATION_BUDGET,
        })?;
    if cost > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget {
            cost,
            budget: ENUMERATION_BUDGET,
        });
    }

    // Moments by multiplicity, resolved up front so the walk loop is
    // infallible. Odd multiplicities never reach the product (parity
    // pruning), but the tables keep them as zeros anyway.
    let mut off_moment = Vec::with_capacity(p as usize + 1);
    let mut diag_moment = Vec::with_capacity(p as usize + 1);
    for m in 0..=p {
        off_moment.push(sigma.moment(m)?);
        diag_moment.push(tau.moment(m)?);
    }

    let n = n as usize;
    let mut walker = Walker {
        n,
        p: p as usize,
        multiplicity: vec![0u8; n * n],
        touched: Vec::with_capacity(p as usize),
        odd_edges: 0,
        off_moment,
        diag_moment,
        sum: BigRational::zero(),
    };
    for start in 0..n {
        walker.descend(start, start, 0);
    }
    Ok(walker.sum)
}

struct Walker {
    n: usize,
    p: usize,
    /// Multiplicity of edge `{i, j}`, stored at `min * n + max`.
    multiplicity: Vec<u8>,
    /// Slots with nonzero multiplicity, in first-use order.
    touched: Vec<usize>,
    odd_edges: usize,
    off_moment: Vec<BigRational>,
    diag_moment: Vec<BigRational>,
    sum: BigRational,
}

impl Walker {
    fn slot(&self, a: usize, b: usize) -> usize {
        if a <= b {
            a * self.n + b
        } else {
            b * self.n + a
        }
    }

    fn add_edge(&mut self, a: usize, b: usize) -> usize {
        let slot = self.slot(a, b);
        if self.multiplicity[slot] == 0 {
            self.touched.push(slot);
        }
        self.multiplicity[slot] += 1;
        if self.multiplicity[slot] % 2 == 1 {
            self.odd_edges += 1;
        } else {
            self.odd_edges -= 1;
        }
        slot
    }

    fn remove_edge(&mut self, slot: usize) {
        if self.multiplicity[slot] % 2 == 1 {
            self.odd_edges -= 1;
        } else {
            self.odd_edges += 1;
        }
        self.multiplicity[slot] -= 1;
        if self.multiplicity[slot] == 0 {
            let popped = self.touched.pop();
            debug_assert_eq!(popped, Some(slot));
        }
    }

    /// Extends a walk that has taken `steps` of its `p` steps and stands at
    /// `cur`; `start` is where the walk must close.
    fn descend(&mut self, start: usize, cur: usize, steps: usize) {
        if steps == self.p - 1 {
            let slot = self.add_edge(cur, start);
            if self.odd_edges == 0 {
                let mut product = BigRational::one();
                for &s in &self.touched {
                    let mult = self.multiplicity[s] as usize;
                    let diagonal = s % self.n == s / self.n;
                    let m = if diagonal {
                        &self.diag_moment[mult]
                    } else {
                        &self.off_moment[mult]
                    };
                    if m.is_zero() {
                        product = BigRational::zero();
                        break;
                    }
                    product *= m;
                }
                self.sum += product;
            }
            self.remove_edge(slot);
            return;
        }
        let remaining_after_next = self.p - steps - 1;
        for next in 0..self.n {
            let slot = self.add_edge(cur, next);
            if self.odd_edges <= remaining_after_next {
                self.descend(start, next, steps + 1);
            }
            self.remove_edge(slot);
        }
    }
}

/// How a number in a trace-moment table was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceRoute {
    ClosedForm,
    BruteForce,
}

impl std::fmt::Display for TraceRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TraceRoute::ClosedForm => "closed-form",
            TraceRoute::BruteForce => "brute-force",
        })
    }
}

/// One `(N, p)` cell of the closed-form vs brute-force comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub n: u64,
    pub p: u32,
    pub closed_form: BigRational,
    pub brute_force: BigRational,
}

impl OracleRow {
    pub fn agrees(&self) -> bool {
        self.closed_form == self.brute_force
    }
}

/// Closed-form vs brute-force table over a grid of sizes and powers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MomentTable {
    rows: Vec<OracleRow>,
}

impl MomentTable {
    /// Builds the table; the closed form is picked by the diagonal: the
    /// zero-diagonal forms when `tau` vanishes identically, the
    /// general-diagonal forms otherwise.
    pub fn build(
        ns: &[u64],
        ps: &[u32],
        sigma: &MomentSequence,
        tau: &MomentSequence,
    ) -> Result<Self> {
        let mut rows = Vec::with_capacity(ns.len() * ps.len());
        for &n in ns {
            for &p in ps {
                let closed_form = if tau.is_identically_zero() {
                    offdiag_trace_moment(n, p, sigma)?
                } else {
                    general_trace_moment(n, p, sigma, tau)?
                };
                let brute_force = brute_force_trace_moment(n, p, sigma, tau)?;
                rows.push(OracleRow {
                    n,
                    p,
                    closed_form,
                    brute_force,
                });
            }
        }
        Ok(MomentTable { rows })
    }

    pub fn rows(&self) -> &[OracleRow] {
        &self.rows
    }

    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(OracleRow::agrees)
    }

    /// CSV rendering with exact rational values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,p,closed_form,brute_force,equal\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.n,
                row.p,
                rational_str(&row.closed_form),
                rational_str(&row.brute_force),
                row.agrees()
            ));
        }
        out
    }
}

fn rational_str(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
