//! Closed-form Narayana polynomial families and the exact identity suite
//! relating them.
//!
//! Three families live here, all in the abstract variable t:
//!
//! * type A: `N^A_n(t) = sum_{k=1..n} (1/k) C(n-1,k-1) C(n,k-1) t^k`, the
//!   block-count generating polynomial over non-crossing partitions of [n];
//! * type B: `N^B_n(t) = sum_{k=0..n} C(n,k)^2 t^k`, the half-non-zero-block
//!   generating polynomial over type-B non-crossing partitions;
//! * `Q_m(t) = (N^A_{m+1})'(t) = sum_{j=0..m} C(m,j) C(m+1,j) t^j`, which also
//!   counts type-B non-crossing partitions with a zero block.
//!
//! The closed binomial forms are the primary construction; the recurrences
//! among the families are checked against them as exact polynomial
//! identities, never used to build them.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::poly::{binomial, IntPoly};

/// Type-A Narayana polynomial; `narayana_a(0) = 1` (empty partition).
pub fn narayana_a(n: usize) -> IntPoly {
    if n == 0 {
        return IntPoly::one();
    }
    let n = n as u64;
    let mut coeffs = vec![BigInt::zero(); n as usize + 1];
    for k in 1..=n {
        let num = binomial(n - 1, k - 1) * binomial(n, k - 1);
        let (q, r) = num_integer_div_rem(num, BigInt::from(k));
        debug_assert!(r.is_zero(), "Narayana numbers are integers");
        coeffs[k as usize] = q;
    }
    IntPoly::from_coeffs(coeffs)
}

fn num_integer_div_rem(a: BigInt, b: BigInt) -> (BigInt, BigInt) {
    (&a / &b, &a % &b)
}

/// Type-B Narayana polynomial, with coefficients `C(n,k)^2`.
pub fn narayana_b(n: usize) -> IntPoly {
    let n = n as u64;
    let coeffs = (0..=n)
        .map(|k| {
            let b = binomial(n, k);
            &b * &b
        })
        .collect();
    IntPoly::from_coeffs(coeffs)
}

/// `Q_m(t)`, the derivative of `narayana_a(m + 1)`, by its closed form
/// `coeff_j = C(m,j) C(m+1,j)`.
pub fn q_poly(m: usize) -> IntPoly {
    let m = m as u64;
    let coeffs = (0..=m)
        .map(|j| binomial(m, j) * binomial(m + 1, j))
        .collect();
    IntPoly::from_coeffs(coeffs)
}

/// One failed identity instance: which identity, at which order, and the
/// (nonzero) difference of the two sides.
#[derive(Clone, Debug)]
pub struct IdentityFailure {
    pub identity: &'static str,
    pub n: usize,
    pub difference: IntPoly,
}

/// Report of the full identity suite. Failures are data, not errors.
#[derive(Clone, Debug, Default)]
pub struct IdentityReport {
    pub n_max: usize,
    pub checked: usize,
    pub failures: Vec<IdentityFailure>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies, as exact polynomial equalities for every `1 <= n <= n_max`, the
/// six relations tying the three families together plus the three recurrences
/// that determine the families uniquely from their initial values.
///
/// With `rev_n(p) = t^n p(1/t)`, the nine identities are:
///
/// 1.  `N^B_n = Q_{n-1} + rev_n(Q_{n-1})`
/// 2.  `(n+1) N^A_n = t Q_{n-1} + rev_n(Q_{n-1})`
/// 3.  `Q_{n-1} = sum_{k=1..n} N^A_{k-1} N^B_{n-k}`
/// 4.  `Q_n = (n+1) N^A_n + sum_{k=1..n} N^A_{k-1} Q_{n-k}`
/// 5.  `N^A_n = t N^A_{n-1} + sum_{k=1..n-1} N^A_{k-1} N^A_{n-k}`
/// 6.  `N^B_n = t N^B_{n-1} + sum_{k=1..n} N^A_{k-1} N^B_{n-k}
///      + sum_{k=1..n-1} N^B_{k-1} N^A_{n-k}`
/// 7.  `N^B_n = rev_n(Q_{n-1}) + sum_{k=1..n} N^A_{k-1} N^B_{n-k}`
/// 8.  `rev_n(Q_n) = N^B_n + sum_{k=1..n} N^A_{k-1} rev_{n-k}(Q_{n-k})`
/// 9.  `N^A_n = t * sum_{k=1..n} N^A_{k-1} rev_{n-k}(N^A_{n-k})`
pub fn check_identities(n_max: usize) -> IdentityReport {
    assert!(n_max >= 1, "n_max must be at least 1");
    let na: Vec<IntPoly> = (0..=n_max).map(narayana_a).collect();
    let nb: Vec<IntPoly> = (0..=n_max).map(narayana_b).collect();
    let q: Vec<IntPoly> = (0..=n_max).map(q_poly).collect();
    let t = IntPoly::monomial(1, 1);

    let mut report = IdentityReport {
        n_max,
        ..Default::default()
    };
    let mut check = |identity: &'static str, n: usize, lhs: &IntPoly, rhs: &IntPoly| {
        report.checked += 1;
        let difference = lhs - rhs;
        if !difference.is_zero() {
            report.failures.push(IdentityFailure {
                identity,
                n,
                difference,
            });
        }
    };

    for n in 1..=n_max {
        let rev_q_prev = q[n - 1].reverse(n).expect("deg Q_{n-1} = n-1 < n");

        let rhs1 = &q[n - 1] + &rev_q_prev;
        check("NB = Q + rev(Q)", n, &nb[n], &rhs1);

        let rhs2 = &(&t * &q[n - 1]) + &rev_q_prev;
        check("(n+1) NA = t Q + rev(Q)", n, &na[n].scale(n as i64 + 1), &rhs2);

        let rhs3: IntPoly = (1..=n).map(|k| &na[k - 1] * &nb[n - k]).sum();
        check("Q = sum NA*NB", n, &q[n - 1], &rhs3);

        let conv_q: IntPoly = (1..=n).map(|k| &na[k - 1] * &q[n - k]).sum();
        let rhs4 = &na[n].scale(n as i64 + 1) + &conv_q;
        check("Q' = (n+1) NA + sum NA*Q", n, &q[n], &rhs4);

        let conv_a: IntPoly = (1..n).map(|k| &na[k - 1] * &na[n - k]).sum();
        let rhs5 = &(&t * &na[n - 1]) + &conv_a;
        check("NA recurrence", n, &na[n], &rhs5);

        let conv_ab: IntPoly = (1..=n).map(|k| &na[k - 1] * &nb[n - k]).sum();
        let conv_ba: IntPoly = (1..n).map(|k| &nb[k - 1] * &na[n - k]).sum();
        let rhs6 = &(&(&t * &nb[n - 1]) + &conv_ab) + &conv_ba;
        check("NB recurrence", n, &nb[n], &rhs6);

        // The three determining recurrences, stated with reversals so every
        // term is an honest polynomial.
        let conv7: IntPoly = (1..=n).map(|k| &na[k - 1] * &nb[n - k]).sum();
        let rhs7 = &rev_q_prev + &conv7;
        check("NB = rev(Q) + sum NA*NB", n, &nb[n], &rhs7);

        let conv8: IntPoly = (1..=n)
            .map(|k| {
                let rev = q[n - k].reverse(n - k).expect("deg Q_m = m");
                &na[k - 1] * &rev
            })
            .sum();
        let lhs8 = q[n].reverse(n).expect("deg Q_n = n");
        let rhs8 = &nb[n] + &conv8;
        check("rev(Q') = NB + sum NA*rev(Q)", n, &lhs8, &rhs8);

        let conv9: IntPoly = (1..=n)
            .map(|k| {
                let rev = na[n - k].reverse(n - k).expect("deg NA_m <= m");
                &na[k - 1] * &rev
            })
            .sum();
        let rhs9 = &t * &conv9;
        check("NA = t sum NA*rev(NA)", n, &na[n], &rhs9);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    use crate::poly::{binomial, catalan};

    #[test]
    fn narayana_a_small() {
        assert_eq!(narayana_a(0), IntPoly::one());
        assert_eq!(narayana_a(1), IntPoly::from_i64_coeffs(&[0, 1]));
        assert_eq!(narayana_a(3), IntPoly::from_i64_coeffs(&[0, 1, 3, 1]));
        assert_eq!(narayana_a(4), IntPoly::from_i64_coeffs(&[0, 1, 6, 6, 1]));
    }

    #[test]
    fn narayana_a_at_one_is_catalan() {
        let one = BigInt::from(1);
        for n in 0..=10usize {
            assert_eq!(narayana_a(n).eval_bigint(&one), catalan(n as u64));
        }
    }

    #[test]
    fn narayana_b_small() {
        assert_eq!(narayana_b(0), IntPoly::one());
        assert_eq!(narayana_b(2), IntPoly::from_i64_coeffs(&[1, 4, 1]));
        assert_eq!(narayana_b(3), IntPoly::from_i64_coeffs(&[1, 9, 9, 1]));
    }

    #[test]
    fn narayana_b_coefficients_and_palindrome() {
        let one = BigInt::from(1);
        for n in 0..=12usize {
            let p = narayana_b(n);
            for k in 0..=n {
                let b = binomial(n as u64, k as u64);
                assert_eq!(p.coeff(k), &b * &b);
            }
            assert!(p.is_palindromic(n));
            assert_eq!(p.eval_bigint(&one), binomial(2 * n as u64, n as u64));
        }
    }

    #[test]
    fn q_poly_is_derivative_of_narayana_a() {
        assert_eq!(q_poly(0), IntPoly::one());
        assert_eq!(q_poly(2), IntPoly::from_i64_coeffs(&[1, 6, 3]));
        for m in 0..=10usize {
            assert_eq!(q_poly(m), narayana_a(m + 1).derivative());
        }
    }

    #[test]
    fn smallest_identity_cases_by_hand() {
        // 2 * NA_1 = t * Q_0 + rev_1(Q_0): 2t = t + t
        let lhs = narayana_a(1).scale(2);
        let t = IntPoly::monomial(1, 1);
        let rhs = &(&t * &q_poly(0)) + &q_poly(0).reverse(1).unwrap();
        assert_eq!(lhs, rhs);

        // NB_2 = Q_1 + rev_2(Q_1): 1 + 4t + t^2 = (1 + 2t) + (t^2 + 2t)
        let rhs = &q_poly(1) + &q_poly(1).reverse(2).unwrap();
        assert_eq!(narayana_b(2), rhs);
        assert_eq!(q_poly(1), IntPoly::from_i64_coeffs(&[1, 2]));
    }

    #[test]
    fn identity_suite_passes_to_12() {
        let report = check_identities(12);
        assert_eq!(report.checked, 9 * 12);
        assert!(
            report.all_pass(),
            "failures: {:?}",
            report
                .failures
                .iter()
                .map(|f| (f.identity, f.n))
                .collect::<Vec<_>>()
        );
    }
}
