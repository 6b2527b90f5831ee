//! q-Pochhammer symbols (a; q)_n for finite, negative, and infinite order.

use num_complex::Complex64;

use super::{QParam, SeriesValue, MAX_TERMS, PRODUCT_TAIL};
use crate::{Error, Result};

/// Order of a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PochhammerOrder {
    /// (a; q)_n, any integer n (negative orders use the reflection formula).
    Finite(i64),
    /// (a; q)_∞; requires |q| < 1.
    Infinite,
}

/// q-Pochhammer symbol (a; q)_n.
///
/// - finite n ≥ 0: Π_{k=0}^{n-1} (1 - a q^k), exact (est_error = 0);
/// - finite n < 0: (a; q)_{-m} = (-q/a)^m q^{m(m-1)/2} / (q/a; q)_m,
///   with a pole error when (q/a; q)_m vanishes;
/// - n = ∞: truncated once |a q^k| < 1e-17, with a rigorous geometric
///   tail bound in `est_error`; requires |q| < 1.
pub fn qpochhammer(a: Complex64, q: &QParam, n: PochhammerOrder) -> Result<SeriesValue> {
    let qv = q.value();
    match n {
        PochhammerOrder::Finite(n) if n >= 0 => Ok(SeriesValue::exact(finite(a, qv, n as u64))),
        PochhammerOrder::Finite(n) => {
            let m = (-n) as u64;
            if a.norm() == 0.0 {
                return Err(Error::Pole("(a; q)_{-n} undefined at a = 0".into()));
            }
            let denom = finite(qv / a, qv, m);
            if denom.norm() < 1e-300 {
                return Err(Error::Pole(format!(
                    "(q/a; q)_{m} vanishes in the negative-order formula (a = {a})"
                )));
            }
            let m_i = m as i64;
            let sign_pow = (-qv / a).powi(m_i as i32);
            let qpow = qv.powi(((m_i * (m_i - 1)) / 2) as i32);
            Ok(SeriesValue::exact(sign_pow * qpow / denom))
        }
        PochhammerOrder::Infinite => {
            if !q.is_sub_unit() {
                return Err(Error::Domain(format!(
                    "(a; q)_inf requires |q| < 1, got q = {qv}"
                )));
            }
            Ok(infinite(a, qv))
        }
    }
}

fn finite(a: Complex64, q: f64, n: u64) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    let mut qk = 1.0;
    for _ in 0..n {
        prod *= Complex64::new(1.0, 0.0) - a * qk;
        qk *= q;
    }
    prod
}

pub(crate) fn infinite(a: Complex64, q: f64) -> SeriesValue {
    let mut prod = Complex64::new(1.0, 0.0);
    let mut aq = a;
    let mut k = 0usize;
    while aq.norm() >= PRODUCT_TAIL && k < MAX_TERMS {
        prod *= Complex64::new(1.0, 0.0) - aq;
        aq *= q;
        k += 1;
    }
    // |Π_{j>=k}(1 - a q^j) - 1| <= exp(|a q^k|/(1-|q|)) - 1
    let tail = (aq.norm() / (1.0 - q.abs())).exp_m1();
    SeriesValue {
        value: prod,
        est_error: tail * prod.norm(),
        terms_used: k,
        in_domain: true,
    }
}
