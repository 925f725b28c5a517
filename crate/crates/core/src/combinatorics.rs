//! Exact integer combinatorics shared by the series and trace-moment routes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// First `count` Catalan numbers, computed by the convolution recurrence
/// `C(k+1) = sum_i C(i) C(k-i)` rather than by factorial ratios, so the
/// series route does not share arithmetic with [`binomial`].
pub fn catalan_numbers(count: usize) -> Vec<BigInt> {
    let mut c: Vec<BigInt> = Vec::with_capacity(count);
    if count == 0 {
        return c;
    }
    c.push(BigInt::one());
    for k in 1..count {
        let mut next = BigInt::zero();
        for i in 0..k {
            next += &c[i] * &c[k - 1 - i];
        }
        c.push(next);
    }
    c
}

/// `k`-th Catalan number.
pub fn catalan(k: usize) -> BigInt {
    catalan_numbers(k + 1).pop().expect("k + 1 >= 1")
}

/// Binomial coefficient `n choose k` (zero when `k > n`).
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Double factorial of odd arguments: `(2k - 1)!! = (2k)! / (2^k k!)`,
/// the number of perfect matchings of `2k` points. `odd_double_factorial(0) = 1`.
pub fn odd_double_factorial(k: u64) -> BigInt {
    let mut acc = BigInt::one();
    let mut m = 1u64;
    while m < 2 * k {
        acc *= BigInt::from(m);
        m += 2;
    }
    acc
}

/// Rational view of [`binomial`], convenient in rational arithmetic.
pub fn binomial_ratio(n: u64, k: u64) -> BigRational {
    BigRational::from_integer(binomial(n, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_matches_known_values() {
        let c = catalan_numbers(10);
        let expected = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(c[k], BigInt::from(*e), "C({k})");
        }
        assert_eq!(catalan(9), BigInt::from(4862u64));
    }

    #[test]
    fn catalan_matches_factorial_formula() {
        // Independent route: C(k) = binom(2k, k) / (k + 1).
        for k in 0..20u64 {
            let via_binomial = binomial(2 * k, k) / BigInt::from(k + 1);
            assert_eq!(catalan(k as usize), via_binomial, "C({k})");
        }
    }

    #[test]
    fn binomial_matches_pascals_rule() {
        for n in 1..30u64 {
            for k in 1..n {
                assert_eq!(
                    binomial(n, k),
                    binomial(n - 1, k - 1) + binomial(n - 1, k),
                    "binom({n},{k})"
                );
            }
        }
        assert_eq!(binomial(4, 7), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::one());
    }

    #[test]
    fn double_factorial_counts_matchings() {
        let expected = [1u64, 1, 3, 15, 105, 945];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(odd_double_factorial(k as u64), BigInt::from(*e), "({k})");
        }
    }
}
