//! The two q-exponentials.
//!
//! `e_q(z) = Σ z^n/(q; q)_n = 1/(z; q)_∞` converges for |z| < 1 as a series
//! but the product form extends it to all z away from the poles z = q^{-k};
//! `E_q(z) = Σ q^{n(n-1)/2} z^n/(q; q)_n = (-z; q)_∞` is entire. Functions
//! here take the base directly (callers pass q² or q^{-2} as appropriate).

use num_complex::Complex64;

use super::{pochhammer, sum_one_sided, SeriesValue};
use crate::{Error, Result};

fn check_base(q2: f64) -> Result<f64> {
    if !(q2 > 0.0 && q2 < 1.0) {
        return Err(Error::InvalidInput(format!("q-exponential base must be in (0, 1), got {q2}")));
    }
    Ok(q2)
}

/// Small q-exponential e_{q²}(z) = 1/(z; q²)_∞, via the product form.
///
/// Flags a pole when z hits q^{-2k} (a vanishing product factor). Near
/// base 1 the product converges too slowly (it needs O(1/(1-q²)) factors),
/// so the series form takes over there — legitimate because |z| < 1 is the
/// only region the classical-limit callers touch.
pub fn q_exp_small(z: Complex64, q2: f64) -> Result<SeriesValue> {
    let q2 = check_base(q2)?;
    if q2 > 0.999 && z.norm() < 1.0 {
        return q_exp_small_series(z, q2);
    }
    let prod = pochhammer::infinite(z, q2);
    if prod.value.norm() < 1e-140 {
        return Err(Error::Pole(format!("e_q(z) pole: z = {z} lies on the lattice q^(-2k)")));
    }
    let value = 1.0 / prod.value;
    Ok(SeriesValue {
        value,
        est_error: prod.est_error * value.norm() / prod.value.norm(),
        terms_used: prod.terms_used,
        in_domain: true,
    })
}

/// Series form Σ z^n/(q²; q²)_n of e_{q²}(z); valid for |z| < 1 only.
pub fn q_exp_small_series(z: Complex64, q2: f64) -> Result<SeriesValue> {
    let q2 = check_base(q2)?;
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("e_q series requires |z| < 1, got |z| = {}", z.norm())));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut denom_next = 1.0 - q2; // (q²; q²)_{n+1}/(q²; q²)_n at n = 0
    let mut q2n = q2;
    Ok(sum_one_sided(move |n| {
        if n == 0 {
            return term;
        }
        term *= z / denom_next;
        q2n *= q2;
        denom_next = 1.0 - q2n;
        term
    }))
}

/// Big q-exponential E_p(z) = (-z; p)_∞ (entire), via the product form.
///
/// The q² > 1 regime is reached by passing p = q^{-2}. Near
/// base 1 the product needs O(1/(1-p)) factors, so the (entire) series form
/// takes over there.
pub fn q_exp_big(z: Complex64, p: f64) -> Result<SeriesValue> {
    let p = check_base(p)?;
    if p > 0.999 {
        return q_exp_big_series(z, p);
    }
    Ok(pochhammer::infinite(-z, p))
}

/// Series form Σ p^{n(n-1)/2} z^n/(p; p)_n of E_p(z).
pub fn q_exp_big_series(z: Complex64, p: f64) -> Result<SeriesValue> {
    let p = check_base(p)?;
    let mut term = Complex64::new(1.0, 0.0);
    let mut pn = 1.0; // p^n
    let mut pochh_next = 1.0 - p;
    Ok(sum_one_sided(move |n| {
        if n == 0 {
            return term;
        }
        // t_{n+1}/t_n = p^n z / (1 - p^{n+1})
        term *= pn * z / pochh_next;
        pn *= p;
        pochh_next = 1.0 - pn * p;
        term
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn value_at_zero_is_one() {
        assert_eq!(q_exp_small(c(0.0), 0.25).unwrap().value, c(1.0));
        assert_eq!(q_exp_big(c(0.0), 0.25).unwrap().value, c(1.0));
    }

    #[test]
    fn small_series_vs_product() {
        let z = Complex64::new(0.3, 0.1);
        let s = q_exp_small_series(z, 0.25).unwrap().value;
        let p = q_exp_small(z, 0.25).unwrap().value;
        assert!((s - p).norm() < 1e-12, "series {s} vs product {p}");
    }

    #[test]
    fn big_series_vs_product() {
        let z = Complex64::new(1.7, -0.4);
        let s = q_exp_big_series(z, 0.25).unwrap().value;
        let p = q_exp_big(z, 0.25).unwrap().value;
        assert!((s - p).norm() < 1e-12 * p.norm(), "series {s} vs product {p}");
    }

    #[test]
    fn functional_identities() {
        // e_q(z)(1 - z) = e_q(qz) and E_q(z) = (1 + z) E_q(qz), from the products.
        let q2 = 0.25;
        for &zr in &[0.15, 0.4, 0.72, -0.3] {
            let z = Complex64::new(zr, 0.07);
            let lhs = q_exp_small(z, q2).unwrap().value * (c(1.0) - z);
            let rhs = q_exp_small(z * q2, q2).unwrap().value;
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
            let lhs_big = q_exp_big(z, q2).unwrap().value;
            let rhs_big = (c(1.0) + z) * q_exp_big(z * q2, q2).unwrap().value;
            assert!((lhs_big - rhs_big).norm() < 1e-12 * lhs_big.norm());
        }
    }

    #[test]
    fn small_exp_pole_detected() {
        // z = q^{-2} is a zero of (z; q²)_inf.
        let err = q_exp_small(c(4.0), 0.25).unwrap_err();
        assert!(matches!(err, crate::Error::Pole(_)));
    }

    #[test]
    fn est_error_bounds_hold_against_deeper_truncation() {
        // est_error must dominate the distance to a much deeper evaluation.
        let z = Complex64::new(0.83, 0.05);
        let v = q_exp_small_series(z, 0.6).unwrap();
        // reference: brute-force long sum in f64 (terms decay geometrically)
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        let mut pochh = 1.0;
        for n in 0..2000 {
            if n > 0 {
                pochh *= 1.0 - 0.6f64.powi(n);
                term = z.powi(n) / pochh;
            }
            sum += term;
        }
        assert!((v.value - sum).norm() <= v.est_error.max(1e-15 * sum.norm()) * 10.0);
    }
}
