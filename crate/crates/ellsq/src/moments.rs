//! Moment polynomials of the squared-singular-value distribution of a squared
//! elliptic random matrix, built by the two-family dynamic programming
//! recurrence
//!
//! ```text
//! U_{k+1} = sum_{i=0..floor((k-1)/2)} U_{k-2i-1} V_{2i+1}
//!         + rho * sum_{i=0..floor(k/2)} V_{2i} U_{k-2i}
//! V_{k+1} = sum_{i=0..floor(k/2)}     U_{2i} V_{k-2i}
//!         + rho * sum_{i=0..floor((k-1)/2)} U_{2i+1} V_{k-2i-1}
//! ```
//!
//! with `U_0 = V_0 = 1`. The k-th moment polynomial is `M_k(rho) = U_{2k}`.
//! `U_k` and `V_k` are also the partition functions of planar chord diagrams
//! on 2k vertices under the two standard colorings, which is what the
//! brute-force oracle in [`crate::chords`] checks.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::poly::{binomial, IntPoly};
use crate::{Error, Result};

/// Table of `U_0..U_kmax` and `V_0..V_kmax` as exact polynomials in rho.
#[derive(Clone, Debug)]
pub struct MomentTable {
    u_polys: Vec<IntPoly>,
    v_polys: Vec<IntPoly>,
    kmax: usize,
}

/// Fills the table by dynamic programming. The recurrence has a true data
/// dependency, so construction is sequential; the finished table is immutable.
pub fn build_uv(kmax: usize) -> MomentTable {
    let mut u = Vec::with_capacity(kmax + 1);
    let mut v = Vec::with_capacity(kmax + 1);
    u.push(IntPoly::one());
    v.push(IntPoly::one());
    for k in 0..kmax {
        // upper index floor((k-1)/2); empty for k = 0
        let half_lo = if k >= 1 { Some((k - 1) / 2) } else { None };
        let half_hi = k / 2;

        let mut u_next = IntPoly::zero();
        if let Some(top) = half_lo {
            for i in 0..=top {
                u_next = &u_next + &(&u[k - 2 * i - 1] * &v[2 * i + 1]);
            }
        }
        let mut u_rho = IntPoly::zero();
        for i in 0..=half_hi {
            u_rho = &u_rho + &(&v[2 * i] * &u[k - 2 * i]);
        }
        u.push(&u_next + &u_rho.shift_up(1));

        let mut v_next = IntPoly::zero();
        for i in 0..=half_hi {
            v_next = &v_next + &(&u[2 * i] * &v[k - 2 * i]);
        }
        let mut v_rho = IntPoly::zero();
        if let Some(top) = half_lo {
            for i in 0..=top {
                v_rho = &v_rho + &(&u[2 * i + 1] * &v[k - 2 * i - 1]);
            }
        }
        v.push(&v_next + &v_rho.shift_up(1));
    }
    MomentTable {
        u_polys: u,
        v_polys: v,
        kmax,
    }
}

impl MomentTable {
    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn u(&self, k: usize) -> &IntPoly {
        &self.u_polys[k]
    }

    pub fn v(&self, k: usize) -> &IntPoly {
        &self.v_polys[k]
    }

    /// `M_k(rho) = U_{2k}` as an exact polynomial.
    pub fn moment_polynomial(&self, k: usize) -> Result<&IntPoly> {
        if 2 * k > self.kmax {
            return Err(Error::InvalidArgument(format!(
                "moment index {k} needs U_{}, table holds up to U_{}",
                2 * k,
                self.kmax
            )));
        }
        Ok(&self.u_polys[2 * k])
    }

    /// Evaluates `M_0(rho) .. M_kmax(rho)` by exact-then-evaluate.
    pub fn moment_values(&self, rho: f64, kmax: usize) -> Result<Vec<f64>> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::InvalidArgument(format!(
                "rho = {rho} outside [-1, 1]"
            )));
        }
        (0..=kmax)
            .map(|k| Ok(self.moment_polynomial(k)?.eval_f64(rho)))
            .collect()
    }
}

/// `M_k(0) = binom(3k,k)/(2k+1)` exactly (Fuss–Catalan endpoint).
pub fn moment_at_zero(k: u64) -> BigInt {
    crate::poly::fuss_catalan3(k)
}

/// `M_k(1) = binom(4k,2k)/(2k+1)` exactly (even-index Catalan endpoint).
pub fn moment_at_one(k: u64) -> BigInt {
    binomial(4 * k, 2 * k) / BigInt::from(2 * k + 1)
}

/// `M_k(rho)` as f64 straight from a table built on demand; convenience for
/// callers that need a handful of theory values.
pub fn moment_value(k: usize, rho: f64) -> f64 {
    build_uv(2 * k)
        .moment_polynomial(k)
        .expect("table sized for k")
        .eval_f64(rho)
}

/// Checks the sandwich `binom(3k,k)/(2k+1) <= M_k(rho) <= binom(4k,2k)/(2k+1)`.
pub fn endpoint_bounds_hold(table: &MomentTable, rho: f64, kmax: usize) -> bool {
    (0..=kmax).all(|k| {
        let m = table
            .moment_polynomial(k)
            .map(|p| p.eval_f64(rho))
            .unwrap_or(f64::NAN);
        let lo = moment_at_zero(k as u64).to_f64().unwrap();
        let hi = moment_at_one(k as u64).to_f64().unwrap();
        lo * (1.0 - 1e-12) <= m && m <= hi * (1.0 + 1e-12)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    use crate::poly::catalan;

    #[test]
    fn initial_conditions() {
        let t = build_uv(0);
        assert_eq!(t.u(0), &IntPoly::one());
        assert_eq!(t.v(0), &IntPoly::one());
    }

    #[test]
    fn first_moment_by_hand_unroll() {
        // U_1 = rho, V_1 = 1, so U_2 = V_1 + rho * U_1 = 1 + rho^2
        let t = build_uv(2);
        assert_eq!(t.u(1), &IntPoly::monomial(1, 1));
        assert_eq!(t.v(1), &IntPoly::one());
        assert_eq!(t.u(2), &IntPoly::from_i64_coeffs(&[1, 0, 1]));
    }

    #[test]
    fn printed_moment_polynomials() {
        let t = build_uv(8);
        assert_eq!(
            t.moment_polynomial(1).unwrap(),
            &IntPoly::from_i64_coeffs(&[1, 0, 1])
        );
        assert_eq!(
            t.moment_polynomial(2).unwrap(),
            &IntPoly::from_i64_coeffs(&[3, 0, 8, 0, 3])
        );
        assert_eq!(
            t.moment_polynomial(3).unwrap(),
            &IntPoly::from_i64_coeffs(&[12, 0, 54, 0, 54, 0, 12])
        );
        assert_eq!(
            t.u(8),
            &IntPoly::from_i64_coeffs(&[55, 0, 352, 0, 616, 0, 352, 0, 55])
        );
        assert_eq!(t.moment_polynomial(0).unwrap(), &IntPoly::one());
        assert!(t.moment_polynomial(5).is_err());
    }

    #[test]
    fn endpoint_sequences() {
        let t = build_uv(20);
        for k in 0..=10u64 {
            let p = t.moment_polynomial(k as usize).unwrap();
            assert_eq!(p.eval_bigint(&BigInt::from(0)), moment_at_zero(k));
            assert_eq!(p.eval_bigint(&BigInt::from(1)), moment_at_one(k));
        }
        let vals = t.moment_values(0.0, 5).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 3.0, 12.0, 55.0, 273.0]);
        let vals = t.moment_values(1.0, 4).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 14.0, 132.0, 1430.0]);
        let vals = t.moment_values(0.5, 1).unwrap();
        assert_eq!(vals[1], 1.25);
        assert!(t.moment_values(1.5, 1).is_err());
    }

    #[test]
    fn u_and_v_at_one_are_catalan() {
        let one = BigInt::from(1);
        let t = build_uv(20);
        for k in 0..=20usize {
            assert_eq!(t.u(k).eval_bigint(&one), catalan(k as u64), "U_{k}(1)");
            assert_eq!(t.v(k).eval_bigint(&one), catalan(k as u64), "V_{k}(1)");
        }
    }

    #[test]
    fn moment_polynomials_are_palindromic() {
        let t = build_uv(24);
        for k in 0..=12usize {
            let p = t.moment_polynomial(k).unwrap();
            assert!(p.is_palindromic(2 * k), "M_{k} not palindromic");
        }
    }

    #[test]
    fn bounds_hold_across_rho() {
        let t = build_uv(20);
        for rho in [-1.0, -0.7, -0.3, 0.0, 0.4, 0.8, 1.0] {
            assert!(endpoint_bounds_hold(&t, rho, 10), "rho = {rho}");
        }
    }
}
