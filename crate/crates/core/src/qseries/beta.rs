//! Ramanujan q-beta integral.
//!
//! ```text
//! ∫_0^∞ λ^τ dλ / (-λ q²/c; q²)_∞
//!     = -(π / sin πτ) (q^{-2τ}; q²)_∞ / (q²; q²)_∞ · (c/q²)^{τ+1}
//! ```
//!
//! The closed form has removable 0/0 points at integer τ where sin πτ = 0;
//! these are reported as pole errors. A quadrature fallback over λ = e^t is
//! provided as an independent route for verification.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{pochhammer, SeriesValue};
use crate::{quad, Error, Result};

fn validate(tau: f64, c: f64, q2: f64) -> Result<()> {
    if !(q2 > 0.0 && q2 < 1.0) {
        return Err(Error::InvalidInput(format!("q-beta integral needs 0 < q² < 1, got {q2}")));
    }
    if c <= 0.0 {
        return Err(Error::InvalidInput(format!("q-beta integral needs c > 0, got {c}")));
    }
    if tau <= -1.0 {
        return Err(Error::Domain(format!("q-beta integral diverges at 0 for τ = {tau} <= -1")));
    }
    if (tau - tau.round()).abs() < 1e-9 {
        return Err(Error::Pole(format!("sin πτ = 0 at τ = {tau}")));
    }
    Ok(())
}

/// Closed form of the Ramanujan q-beta integral (see module docs).
pub fn ramanujan_beta_integral(tau: f64, c: f64, q2: f64) -> Result<SeriesValue> {
    validate(tau, c, q2)?;
    let a = Complex64::new(q2.powf(-tau), 0.0);
    let num = pochhammer::infinite(a, q2);
    let den = pochhammer::infinite(Complex64::new(q2, 0.0), q2);
    let value = -(PI / (PI * tau).sin()) * (num.value / den.value) * (c / q2).powf(tau + 1.0);
    let rel = num.est_error / num.value.norm().max(1e-300)
        + den.est_error / den.value.norm().max(1e-300);
    Ok(SeriesValue {
        value,
        est_error: rel * value.norm(),
        terms_used: num.terms_used,
        in_domain: true,
    })
}

/// Quadrature fallback: adaptive integration of λ^τ / (-λq²/c; q²)_∞ after
/// the substitution λ = e^t. Used as the independent oracle for the closed
/// form and by the normalization checks of the momentum-integral states.
pub fn ramanujan_beta_quadrature(tau: f64, c: f64, q2: f64) -> Result<f64> {
    validate(tau, c, q2)?;
    let integrand = move |t: f64| {
        let lam = t.exp();
        let den = pochhammer::infinite(Complex64::new(-lam * q2 / c, 0.0), q2).value;
        Complex64::new((t * (tau + 1.0)).exp(), 0.0) / den
    };
    // decay scales: e^{(τ+1)t} at -∞, super-gaussian q-product growth at +∞
    let t_lo = (1e-18f64).ln() / (tau + 1.0);
    let mut t_hi = 1.0;
    while integrand(t_hi).norm() > 1e-18 && t_hi < 400.0 {
        t_hi += 1.0;
    }
    let v = quad::integrate(&integrand, t_lo, t_hi, 1e-300, 1e-11)?;
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_vs_quadrature() {
        let (tau, c, q2) = (0.3, 1.0, 0.25);
        let cf = ramanujan_beta_integral(tau, c, q2).unwrap().value.re;
        let qd = ramanujan_beta_quadrature(tau, c, q2).unwrap();
        assert!(((cf - qd) / cf).abs() < 1e-8, "closed {cf} vs quad {qd}");
    }

    #[test]
    fn closed_form_vs_quadrature_other_params() {
        for (tau, c, q2) in [(0.5, 2.0, 0.5), (1.3, 0.7, 0.36), (-0.4, 1.5, 0.25)] {
            let cf = ramanujan_beta_integral(tau, c, q2).unwrap().value.re;
            let qd = ramanujan_beta_quadrature(tau, c, q2).unwrap();
            assert!(((cf - qd) / cf).abs() < 1e-8, "τ={tau}: closed {cf} vs quad {qd}");
        }
    }

    #[test]
    fn integer_tau_is_a_pole() {
        assert!(matches!(ramanujan_beta_integral(1.0, 1.0, 0.25), Err(Error::Pole(_))));
        assert!(matches!(ramanujan_beta_integral(0.0, 1.0, 0.25), Err(Error::Pole(_))));
    }

    #[test]
    fn tau_below_minus_one_rejected() {
        assert!(matches!(ramanujan_beta_integral(-1.2, 1.0, 0.25), Err(Error::Domain(_))));
    }
}
