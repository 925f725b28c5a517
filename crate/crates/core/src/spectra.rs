//! Spectral computations on sampled matrices: trace powers, eigenvalues,
//! empirical densities, Monte Carlo moment estimates, and `1/N` fits.
//!
//! Monte Carlo estimates are deterministic functions of
//! `(ensemble, n, p, samples, seed)`: samples are indexed, each index maps to
//! its own generator stream, and accumulation runs in index order regardless
//! of how the per-sample work is scheduled.

use rand_core::RngCore;
use rayon::prelude::*;

use crate::ensembles::{DistributionSpec, EnsembleSpec, SymmetricMatrix};
use crate::error::{Error, Result};
use crate::num::{scalar, scalar_from_usize, Real};

/// Hard cap on Jacobi sweeps; convergence is typically reached in well under
/// ten for the sizes used here.
pub const MAX_JACOBI_SWEEPS: usize = 30;

/// `Tr(m^p)` without forming the full power when avoidable: even `p = 2q`
/// uses `Tr(A^{2q}) = |A^q|_F^2`, odd `p = 2q + 1` pairs `A^q` with
/// `A^(q+1)` entrywise.
pub fn trace_power<R: Real>(m: &SymmetricMatrix<R>, p: u32) -> Result<R> {
    if p == 0 {
        return Err(Error::UnsupportedPower {
            p,
            context: "(trace powers start at p = 1)",
        });
    }
    if p == 1 {
        return Ok(m.trace());
    }
    let q = p / 2;
    let aq = sym_power(m, q);
    if p % 2 == 0 {
        Ok(frobenius_sq(&aq))
    } else {
        let aq1 = sym_multiply(&aq, m);
        let n = m.dim();
        let mut acc = R::zero();
        for i in 0..n {
            for j in 0..n {
                acc += aq.get(i, j) * aq1.get(i, j);
            }
        }
        Ok(acc)
    }
}

fn frobenius_sq<R: Real>(m: &SymmetricMatrix<R>) -> R {
    let n = m.dim();
    let mut acc = R::zero();
    for i in 0..n {
        for j in 0..n {
            acc += m.get(i, j) * m.get(i, j);
        }
    }
    acc
}

/// Product of two symmetric matrices that commute (powers of a common
/// matrix), so the result is symmetric again; inner loops run over
/// contiguous rows.
fn sym_multiply<R: Real>(a: &SymmetricMatrix<R>, b: &SymmetricMatrix<R>) -> SymmetricMatrix<R> {
    let n = a.dim();
    assert_eq!(n, b.dim());
    let mut out = SymmetricMatrix::zero(n);
    for i in 0..n {
        let row_a = a.row(i);
        for j in i..n {
            let row_b = b.row(j);
            let mut acc = R::zero();
            for k in 0..n {
                acc += row_a[k] * row_b[k];
            }
            out.set_sym(i, j, acc);
        }
    }
    out
}

fn sym_power<R: Real>(m: &SymmetricMatrix<R>, q: u32) -> SymmetricMatrix<R> {
    assert!(q >= 1);
    let mut acc = m.clone();
    for _ in 1..q {
        acc = sym_multiply(&acc, m);
    }
    acc
}

/// Eigenvalues in ascending order via cyclic Jacobi with the default
/// tolerance.
pub fn eigenvalues<R: Real>(m: &SymmetricMatrix<R>) -> Result<Vec<R>> {
    let tol = scalar::<R>(1e-12).max(R::epsilon() * scalar::<R>(50.0));
    eigenvalues_with(m, tol, MAX_JACOBI_SWEEPS)
}

/// Eigenvalues with an explicit relative off-diagonal tolerance and sweep
/// cap. Converged when `off(A) <= tol * |A_0|_F`.
pub fn eigenvalues_with<R: Real>(
    m: &SymmetricMatrix<R>,
    tol: R,
    max_sweeps: usize,
) -> Result<Vec<R>> {
    let n = m.dim();
    let mut a: Vec<R> = (0..n * n).map(|i| m.get(i / n, i % n)).collect();
    let base_norm = m.frobenius_norm();
    let threshold = tol * base_norm;

    let off_norm = |a: &[R]| -> R {
        let mut acc = R::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                acc += a[p * n + q] * a[p * n + q];
            }
        }
        (acc + acc).sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > threshold {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off_norm(&a).to_f64().unwrap_or(f64::NAN),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == R::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (scalar::<R>(2.0) * apq);
                let t = {
                    let denom = theta.abs() + (theta * theta + R::one()).sqrt();
                    let t = R::one() / denom;
                    if theta < R::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = R::zero();
                a[q * n + p] = R::zero();
            }
        }
        sweeps += 1;
    }

    let mut eig: Vec<R> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(eig)
}

/// Eigenvalues of one sampled matrix, scaled by `1 / sqrt(n)` onto the
/// support of the limiting law.
pub fn scaled_eigenvalues<R: Real>(
    spec: &EnsembleSpec<R>,
    n: usize,
    seed: u64,
    sample_index: u64,
) -> Result<Vec<R>> {
    let m = spec.sample_matrix(n, seed, sample_index)?;
    let mut eig = eigenvalues(&m)?;
    let inv_root = R::one() / scalar_from_usize::<R>(n).sqrt();
    for e in &mut eig {
        *e = *e * inv_root;
    }
    Ok(eig)
}

/// A normalized histogram: bin heights integrate to one over `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram<R> {
    lo: R,
    hi: R,
    heights: Vec<R>,
    in_range: usize,
}

impl<R: Real> Histogram<R> {
    pub fn lo(&self) -> R {
        self.lo
    }

    pub fn hi(&self) -> R {
        self.hi
    }

    pub fn heights(&self) -> &[R] {
        &self.heights
    }

    pub fn bins(&self) -> usize {
        self.heights.len()
    }

    pub fn bin_width(&self) -> R {
        (self.hi - self.lo) / scalar_from_usize::<R>(self.heights.len())
    }

    /// Count of values that fell inside `[lo, hi]`.
    pub fn in_range(&self) -> usize {
        self.in_range
    }

    pub fn edges(&self, i: usize) -> (R, R) {
        let width = self.bin_width();
        let left = self.lo + scalar_from_usize::<R>(i) * width;
        (left, left + width)
    }

    /// Total mass `sum(height * width)`; one by construction.
    pub fn mass(&self) -> R {
        self.heights
            .iter()
            .fold(R::zero(), |acc, &h| acc + h * self.bin_width())
    }
}

/// Bins `values` over `[lo, hi]` into a unit-mass histogram. Values outside
/// the window are dropped; the upper endpoint lands in the last bin.
pub fn empirical_density<R: Real>(values: &[R], lo: R, hi: R, bins: usize) -> Result<Histogram<R>> {
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "histogram window needs hi > lo, got [{lo}, {hi}]"
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter(
            "histogram needs at least one bin".into(),
        ));
    }
    let mut counts = vec![0usize; bins];
    let width = (hi - lo) / scalar_from_usize::<R>(bins);
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let idx = ((v - lo) / width).to_usize().unwrap_or(0).min(bins - 1);
        counts[idx] += 1;
    }
    let in_range: usize = counts.iter().sum();
    if in_range == 0 {
        return Err(Error::EmptyInput(
            "no values fall inside the histogram window",
        ));
    }
    let norm = R::one() / (scalar_from_usize::<R>(in_range) * width);
    Ok(Histogram {
        lo,
        hi,
        heights: counts
            .iter()
            .map(|&c| scalar_from_usize::<R>(c) * norm)
            .collect(),
        in_range,
    })
}

/// Monte Carlo estimate with its standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate<R> {
    pub mean: R,
    pub std_error: R,
    pub samples: usize,
}

/// Monte Carlo mean of the scaled trace moment
/// `Tr(X^p) / n^(1 + p/2)` over `samples` independent matrices.
///
/// Sample `s` always uses generator stream `s`, so estimates with more
/// samples extend — not reshuffle — estimates with fewer. For the sign
/// ensemble at `p = 4` (double precision) an exact bit-packed kernel
/// replaces the dense matrix power; at unit scale its output is
/// bit-identical to the dense route, both being exact integers.
pub fn estimate_scaled_moment<R: Real>(
    spec: &EnsembleSpec<R>,
    n: usize,
    p: u32,
    samples: usize,
    seed: u64,
) -> Result<McEstimate<R>> {
    if samples == 0 {
        return Err(Error::EmptyInput("a Monte Carlo run needs samples >= 1"));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "matrix dimension must be at least 1".into(),
        ));
    }
    if p == 0 {
        return Err(Error::UnsupportedPower {
            p,
            context: "(trace powers start at p = 1)",
        });
    }

    let scale = moment_scale::<R>(n, p);
    let use_bit_kernel = p == 4
        && matches!(spec.diag(), DistributionSpec::Zero)
        && matches!(spec.offdiag(), DistributionSpec::Sign { .. })
        && std::any::TypeId::of::<R>() == std::any::TypeId::of::<f64>();

    let values: Vec<R> = if use_bit_kernel {
        let w = match spec.offdiag() {
            DistributionSpec::Sign { w } => w.to_f64().expect("finite scale"),
            _ => unreachable!(),
        };
        let w4 = (w * w) * (w * w);
        let scale_f64 = scale.to_f64().expect("finite scale");
        (0..samples as u64)
            .into_par_iter()
            .map(|s| scalar::<R>(sign_trace4_bits(n, seed, s) * w4 / scale_f64))
            .collect()
    } else {
        (0..samples as u64)
            .into_par_iter()
            .map(|s| {
                let m = spec
                    .sample_matrix(n, seed, s)
                    .expect("dimension validated above");
                let tr = trace_power(&m, p).expect("power validated above");
                tr / scale
            })
            .collect()
    };

    // Welford accumulation in sample order: deterministic regardless of the
    // parallel schedule above.
    let mut mean = R::zero();
    let mut m2 = R::zero();
    let mut count = R::zero();
    for &y in &values {
        count += R::one();
        let delta = y - mean;
        mean += delta / count;
        m2 += delta * (y - mean);
    }
    let std_error = if samples > 1 {
        (m2 / (count * (count - R::one()))).sqrt()
    } else {
        R::zero()
    };
    Ok(McEstimate {
        mean,
        std_error,
        samples,
    })
}

/// `n^(1 + p/2)` through exact integer powers (plus one square root for odd
/// `p`), avoiding platform-dependent `powf`.
fn moment_scale<R: Real>(n: usize, p: u32) -> R {
    let n_r = scalar_from_usize::<R>(n);
    let e = p + 2;
    if e % 2 == 0 {
        n_r.powi((e / 2) as i32)
    } else {
        n_r.powi((e / 2) as i32) * n_r.sqrt()
    }
}

/// `Tr(S^4)` for one sign matrix drawn at `(seed, sample_index)`, at unit
/// scale, via bit rows: with `+1` forced on the diagonal,
/// `(S^2)_ij = n - 2 popcount(b_i xor b_j) - 2 s_ij` for `i != j` and
/// `(S^2)_ii = n - 1`, so
/// `Tr(S^4) = n (n-1)^2 + 2 sum_{i<j} (S^2)_ij^2`. All quantities stay
/// exact integers well below 2^53.
///
/// Consumes generator words cell by cell in the same order and quantity as
/// the dense sampler, so it sees the very same entries.
fn sign_trace4_bits(n: usize, seed: u64, sample_index: u64) -> f64 {
    let words = n.div_ceil(64);
    let mut rows = vec![0u64; n * words];
    for j in 0..n {
        let mut rng = crate::ensembles::cell_rng(seed, sample_index, n, j, j);
        for k in j..n {
            let u0 = rng.next_u64();
            let _ = rng.next_u64();
            if k != j && u0 & 1 == 1 {
                rows[j * words + k / 64] |= 1u64 << (k % 64);
                rows[k * words + j / 64] |= 1u64 << (j % 64);
            }
        }
    }
    let pair_sum = pair_sum_dispatch(&rows, n, words);
    let nf = n as f64;
    nf * (nf - 1.0) * (nf - 1.0) + 2.0 * pair_sum as f64
}

#[inline(always)]
fn pair_sum_impl(rows: &[u64], n: usize, words: usize) -> u64 {
    let mut acc = 0u64;
    for i in 0..n {
        let ri = &rows[i * words..(i + 1) * words];
        for j in (i + 1)..n {
            let rj = &rows[j * words..(j + 1) * words];
            let mut pop = 0u32;
            for t in 0..words {
                pop += (ri[t] ^ rj[t]).count_ones();
            }
            let bit = (rows[i * words + j / 64] >> (j % 64)) & 1;
            let d = n as i64 - 2 * pop as i64 - 2 + 4 * bit as i64;
            acc += (d * d) as u64;
        }
    }
    acc
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "popcnt")]
unsafe fn pair_sum_popcnt(rows: &[u64], n: usize, words: usize) -> u64 {
    pair_sum_impl(rows, n, words)
}

fn pair_sum_dispatch(rows: &[u64], n: usize, words: usize) -> u64 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: the popcnt feature was just detected at runtime.
            return unsafe { pair_sum_popcnt(rows, n, words) };
        }
    }
    pair_sum_impl(rows, n, words)
}

/// Weighted least-squares fit of `y = c0 + c1 / N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult<R> {
    pub c0: R,
    pub c1: R,
    pub c0_std_error: R,
    pub c1_std_error: R,
    /// Square root of the weighted mean squared residual.
    pub weighted_rms_residual: R,
}

/// Fits `y = c0 + c1 / N` to `(N, y, sigma)` points.
///
/// With all `sigma` positive the weights are `1 / sigma^2` and the reported
/// standard errors treat the sigmas as known. With any `sigma` equal to
/// zero the fit falls back to uniform weights and scales the errors by the
/// residual variance (zero when the data are exactly affine).
pub fn fit_one_over_n<R: Real>(points: &[(usize, R, R)]) -> Result<FitResult<R>> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points"));
    }
    if points
        .iter()
        .any(|&(n, _, sigma)| n == 0 || sigma < R::zero())
    {
        return Err(Error::InvalidParameter(
            "fit points need n >= 1 and sigma >= 0".into(),
        ));
    }
    let known_variances = points.iter().all(|&(_, _, sigma)| sigma > R::zero());

    let mut s_w = R::zero();
    let mut s_wx = R::zero();
    let mut s_wxx = R::zero();
    let mut s_wy = R::zero();
    let mut s_wxy = R::zero();
    for &(n, y, sigma) in points {
        let x = R::one() / scalar_from_usize::<R>(n);
        let w = if known_variances {
            R::one() / (sigma * sigma)
        } else {
            R::one()
        };
        s_w += w;
        s_wx += w * x;
        s_wxx += w * x * x;
        s_wy += w * y;
        s_wxy += w * x * y;
    }
    let det = s_w * s_wxx - s_wx * s_wx;
    if !(det.abs() > R::epsilon() * s_w * s_wxx) {
        return Err(Error::DegenerateFit(
            "need at least two distinct matrix sizes",
        ));
    }
    let c0 = (s_wxx * s_wy - s_wx * s_wxy) / det;
    let c1 = (s_w * s_wxy - s_wx * s_wy) / det;

    let mut rss = R::zero();
    for &(n, y, sigma) in points {
        let x = R::one() / scalar_from_usize::<R>(n);
        let w = if known_variances {
            R::one() / (sigma * sigma)
        } else {
            R::one()
        };
        let r = y - c0 - c1 * x;
        rss += w * r * r;
    }

    let cov_scale = if known_variances {
        R::one()
    } else if points.len() > 2 {
        rss / scalar_from_usize::<R>(points.len() - 2)
    } else {
        R::zero()
    };
    Ok(FitResult {
        c0,
        c1,
        c0_std_error: (cov_scale * s_wxx / det).sqrt(),
        c1_std_error: (cov_scale * s_w / det).sqrt(),
        weighted_rms_residual: (rss / s_w).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn matrix_from(rows: &[&[f64]]) -> SymmetricMatrix<f64> {
        let n = rows.len();
        let mut m = SymmetricMatrix::zero(n);
        for i in 0..n {
            for j in i..n {
                assert_eq!(rows[i][j], rows[j][i], "test input must be symmetric");
                m.set_sym(i, j, rows[i][j]);
            }
        }
        m
    }

    fn naive_trace_power(m: &SymmetricMatrix<f64>, p: u32) -> f64 {
        let n = m.dim();
        let mut acc = vec![0.0; n * n];
        for i in 0..n {
            acc[i * n + i] = 1.0;
        }
        for _ in 0..p {
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += acc[i * n + k] * m.get(k, j);
                    }
                    next[i * n + j] = s;
                }
            }
            acc = next;
        }
        (0..n).map(|i| acc[i * n + i]).sum()
    }

    #[test]
    fn trace_power_matches_naive_products() {
        let m = matrix_from(&[&[1.0, 2.0, -0.5], &[2.0, 0.0, 1.5], &[-0.5, 1.5, -1.0]]);
        for p in 1..=8u32 {
            assert_relative_eq!(
                trace_power(&m, p).unwrap(),
                naive_trace_power(&m, p),
                max_relative = 1e-12
            );
        }
        assert!(trace_power(&m, 0).is_err());
    }

    #[test]
    fn trace_square_equals_frobenius() {
        let spec = EnsembleSpec::goe(1.0f64).unwrap();
        let m = spec.sample_matrix(20, 11, 0).unwrap();
        assert_relative_eq!(
            trace_power(&m, 2).unwrap(),
            m.frobenius_norm().powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let diag = matrix_from(&[&[3.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let eig = eigenvalues(&diag).unwrap();
        assert_eq!(eig, vec![-1.0, 2.0, 3.0]);

        let pair = matrix_from(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let eig = eigenvalues(&pair).unwrap();
        assert_abs_diff_eq!(eig[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_reproduce_trace_identities() {
        let spec = EnsembleSpec::goe(1.0f64).unwrap();
        let m = spec.sample_matrix(24, 3, 1).unwrap();
        let eig = eigenvalues(&m).unwrap();
        assert!(eig.windows(2).all(|w| w[0] <= w[1]), "sorted ascending");
        let sum: f64 = eig.iter().sum();
        let sum2: f64 = eig.iter().map(|l| l * l).sum();
        let sum4: f64 = eig.iter().map(|l| l.powi(4)).sum();
        assert_abs_diff_eq!(sum, m.trace(), epsilon = 1e-9);
        assert_relative_eq!(sum2, trace_power(&m, 2).unwrap(), max_relative = 1e-11);
        assert_relative_eq!(sum4, trace_power(&m, 4).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn scaled_eigenvalues_land_on_the_limiting_support() {
        let spec = EnsembleSpec::sign(1.0f64).unwrap();
        let eig = scaled_eigenvalues(&spec, 64, 9, 0).unwrap();
        assert_eq!(eig.len(), 64);
        assert!(eig.iter().all(|l| l.abs() < 2.5), "max {:?}", eig.last());
    }

    #[test]
    fn histogram_has_unit_mass_and_drops_outliers() {
        let values = [-3.0, -0.5, 0.1, 0.2, 0.6, 0.6, 2.0, 7.0];
        let h = empirical_density(&values, -1.0, 1.0, 4).unwrap();
        assert_eq!(h.in_range(), 5);
        assert_relative_eq!(h.mass(), 1.0, max_relative = 1e-12);
        // Half-open bins: -0.5 sits on the first interior edge and lands in
        // bin 1; bin 2 holds 0.1 and 0.2; bin 3 holds 0.6 twice.
        assert_relative_eq!(h.heights()[0], 0.0, max_relative = 1e-12);
        assert_relative_eq!(h.heights()[1], 0.4, max_relative = 1e-12);
        assert_relative_eq!(h.heights()[2], 0.8, max_relative = 1e-12);
        assert_relative_eq!(h.heights()[3], 0.8, max_relative = 1e-12);
        let (left, right) = h.edges(1);
        assert_relative_eq!(left, -0.5, max_relative = 1e-12);
        assert_relative_eq!(right, 0.0, max_relative = 1e-12);

        // The upper endpoint belongs to the last bin.
        let h = empirical_density(&[1.0f64], 0.0, 1.0, 2).unwrap();
        assert_eq!(h.heights()[1], 2.0);

        assert!(empirical_density(&[5.0f64], -1.0, 1.0, 4).is_err());
        assert!(empirical_density(&values, 1.0, -1.0, 4).is_err());
        assert!(empirical_density(&values, -1.0, 1.0, 0).is_err());
    }

    #[test]
    fn sign_second_moment_is_deterministic() {
        // Tr X^2 of a sign matrix is constant: every off-diagonal square is
        // w^2. The estimator must return the exact value with zero error.
        let spec = EnsembleSpec::sign(1.0f64).unwrap();
        let est = estimate_scaled_moment(&spec, 16, 2, 50, 77).unwrap();
        assert_eq!(est.mean, 240.0 / 256.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn estimates_are_reproducible() {
        let spec = EnsembleSpec::goe(1.0f64).unwrap();
        let a = estimate_scaled_moment(&spec, 12, 4, 40, 5).unwrap();
        let b = estimate_scaled_moment(&spec, 12, 4, 40, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bit_kernel_matches_dense_route_exactly_at_unit_scale() {
        let n = 13;
        let samples = 25;
        let seed = 31;
        let spec = EnsembleSpec::sign(1.0f64).unwrap();
        let fast = estimate_scaled_moment(&spec, n, 4, samples, seed).unwrap();
        // Dense reference: same matrices, same accumulation, full matmul.
        let scale = (n as f64).powi(3);
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for s in 0..samples as u64 {
            let m = spec.sample_matrix(n, seed, s).unwrap();
            let y = trace_power(&m, 4).unwrap() / scale;
            let count = (s + 1) as f64;
            let delta = y - mean;
            mean += delta / count;
            m2 += delta * (y - mean);
        }
        let std_error = (m2 / (samples as f64 * (samples as f64 - 1.0))).sqrt();
        assert_eq!(fast.mean, mean, "means must agree bit for bit");
        assert_eq!(fast.std_error, std_error);
    }

    #[test]
    fn bit_kernel_matches_dense_route_at_general_scale() {
        let spec = EnsembleSpec::sign(0.7f64).unwrap();
        let fast = estimate_scaled_moment(&spec, 10, 4, 30, 13).unwrap();
        let scale = 1000.0;
        let mut values = Vec::new();
        for s in 0..30u64 {
            let m = spec.sample_matrix(10, 13, s).unwrap();
            values.push(trace_power(&m, 4).unwrap() / scale);
        }
        let mean: f64 = values.iter().sum::<f64>() / 30.0;
        assert_relative_eq!(fast.mean, mean, max_relative = 1e-12);
    }

    #[test]
    fn sign_fourth_moment_matches_the_exact_finite_size_value() {
        // <Tr X^4> = 2 N^3 - 5 N^2 + 3 N at w = 1; the estimator mean over
        // many samples should sit within a few standard errors.
        let n = 24;
        let spec = EnsembleSpec::sign(1.0f64).unwrap();
        let est = estimate_scaled_moment(&spec, n, 4, 4000, 2024).unwrap();
        let nf = n as f64;
        let expected = (2.0 * nf.powi(3) - 5.0 * nf.powi(2) + 3.0 * nf) / nf.powi(3);
        let pull = (est.mean - expected) / est.std_error;
        assert!(pull.abs() < 4.0, "pull {pull}, mean {}", est.mean);
    }

    #[test]
    fn odd_power_scaling_uses_half_integer_exponent() {
        let spec = EnsembleSpec::goe(1.0f64).unwrap();
        let est = estimate_scaled_moment(&spec, 9, 3, 10, 3).unwrap();
        // Direct check against an explicit loop with n^{5/2}.
        let scale = (9.0f64).powi(2) * 3.0;
        let mut mean = 0.0;
        for s in 0..10u64 {
            let m = spec.sample_matrix(9, 3, s).unwrap();
            mean += trace_power(&m, 3).unwrap() / scale;
        }
        mean /= 10.0;
        assert_relative_eq!(est.mean, mean, max_relative = 1e-12);
    }

    #[test]
    fn fit_recovers_exact_affine_data() {
        let points: Vec<(usize, f64, f64)> = [16usize, 32, 64, 128]
            .iter()
            .map(|&n| (n, 2.0 - 5.0 / n as f64, 1e-3))
            .collect();
        let fit = fit_one_over_n(&points).unwrap();
        assert_relative_eq!(fit.c0, 2.0, max_relative = 1e-12);
        assert_relative_eq!(fit.c1, -5.0, max_relative = 1e-10);
        assert!(fit.weighted_rms_residual < 1e-10);
        assert!(fit.c0_std_error > 0.0 && fit.c1_std_error > 0.0);
    }

    #[test]
    fn fit_standard_errors_match_hand_computation() {
        // Two unit-sigma points: det = 1/16, Var(c0) = Swxx/det = 5,
        // Var(c1) = Sw/det = 32.
        let points = [(2usize, 1.0f64, 1.0), (4, 2.0, 1.0)];
        let fit = fit_one_over_n(&points).unwrap();
        assert_relative_eq!(fit.c0, 3.0, max_relative = 1e-12);
        assert_relative_eq!(fit.c1, -4.0, max_relative = 1e-12);
        assert_relative_eq!(fit.c0_std_error, 5.0f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(fit.c1_std_error, 32.0f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn fit_with_zero_sigmas_reports_residual_scaled_errors() {
        let points: Vec<(usize, f64, f64)> = [8usize, 16, 32]
            .iter()
            .map(|&n| (n, 1.0 + 3.0 / n as f64, 0.0))
            .collect();
        let fit = fit_one_over_n(&points).unwrap();
        assert_relative_eq!(fit.c0, 1.0, max_relative = 1e-10);
        assert_relative_eq!(fit.c1, 3.0, max_relative = 1e-8);
        assert_abs_diff_eq!(fit.c0_std_error, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.c1_std_error, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        assert!(fit_one_over_n(&[(8usize, 1.0f64, 1.0)]).is_err());
        let same_n = [(8usize, 1.0f64, 1.0), (8, 1.1, 1.0), (8, 0.9, 1.0)];
        assert!(matches!(
            fit_one_over_n(&same_n),
            Err(Error::DegenerateFit(_))
        ));
        assert!(fit_one_over_n(&[(8usize, 1.0f64, -1.0), (16, 1.0, 1.0)]).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(proptest::test_runner::Config::with_cases(16))]

            #[test]
            fn eigenvalue_sums_match_traces(seed in 0u64..500) {
                let spec = EnsembleSpec::goe(1.0f64).unwrap();
                let m = spec.sample_matrix(10, seed, 0).unwrap();
                let eig = eigenvalues(&m).unwrap();
                let sum2: f64 = eig.iter().map(|l| l * l).sum();
                prop_assert!((sum2 - trace_power(&m, 2).unwrap()).abs() < 1e-9);
            }

            #[test]
            fn histograms_always_have_unit_mass(
                seed in 0u64..200,
                bins in 1usize..40,
            ) {
                let spec = EnsembleSpec::sign(1.0f64).unwrap();
                let eig = scaled_eigenvalues(&spec, 16, seed, 0).unwrap();
                let h = empirical_density(&eig, -2.5, 2.5, bins).unwrap();
                prop_assert!((h.mass() - 1.0).abs() < 1e-10);
            }
        }
    }
}
