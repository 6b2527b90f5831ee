//! q-special-function backbone: q-Pochhammer symbols, q-brackets and
//! factorials, q-exponentials, basic (`rφs`) and bilateral (`rψs`)
//! hypergeometric series, and the Ramanujan q-beta integral.
//!
//! Every series evaluation returns a [`SeriesValue`] carrying a truncation
//! error estimate and an `in_domain` flag. Callers must treat
//! `in_domain == false` results as unusable numbers kept only for
//! diagnostics.
//!
//! Conventions (all series in the deformation base `q`, |q| < 1 unless a
//! classical-limit branch applies):
//!
//! ```text
//! (a; q)_n   = Π_{k=0}^{n-1} (1 - a q^k),        (a; q)_0 = 1
//! (a; q)_∞   = Π_{k≥0} (1 - a q^k)
//! (a; q)_{-n} = (-q/a)^n q^{n(n-1)/2} / (q/a; q)_n
//! [n]        = (1 - q^{2n})/(1 - q²),   [n]! = [n][n-1]!
//! e_q(z)     = Σ z^n/(q; q)_n = 1/(z; q)_∞             (|z| < 1)
//! E_q(z)     = Σ q^{n(n-1)/2} z^n/(q; q)_n = (-z; q)_∞  (entire)
//! ```

mod beta;
mod exponential;
mod hypergeometric;
mod pochhammer;

pub use beta::{ramanujan_beta_integral, ramanujan_beta_quadrature};
pub use exponential::{q_exp_big, q_exp_big_series, q_exp_small, q_exp_small_series};
pub use hypergeometric::{basic_phi, bilateral_psi, ramanujan_psi1_product};
pub use pochhammer::{qpochhammer, PochhammerOrder};

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Relative tail tolerance: a series stops once the current term is below
/// this fraction of the partial sum and terms have been decreasing for
/// [`DECREASE_RUN`] consecutive steps (q-series terms can be non-monotone
/// early).
pub(crate) const TAIL_TOL: f64 = 1e-16;
pub(crate) const DECREASE_RUN: usize = 3;
/// Infinite products truncate once |a q^k| drops below this; the geometric
/// tail bound is then rigorous.
pub(crate) const PRODUCT_TAIL: f64 = 1e-17;
/// Hard cap on summation length before flagging divergence.
pub(crate) const MAX_TERMS: usize = 20_000;

/// Validated deformation parameter q.
///
/// The regime decides which formula branches are legal: most series require
/// `0 < |q| < 1`; `q = ±1` dispatches to classical (undeformed) limits;
/// roots of unity are only meaningful for the finite superposition
/// machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QParam {
    q: f64,
    regime: QRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum QRegime {
    /// 0 < |q| < 1.
    SubUnit,
    /// q = ±1 (classical limits).
    Unit,
    /// q^M = 1 for the stored M ≥ 1.
    RootOfUnity(u32),
}

impl QParam {
    /// A sub-unit deformation parameter, 0 < |q| < 1.
    pub fn sub_unit(q: f64) -> Result<Self> {
        if !q.is_finite() || q == 0.0 || q.abs() >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "sub-unit regime requires 0 < |q| < 1, got q = {q}"
            )));
        }
        Ok(QParam { q, regime: QRegime::SubUnit })
    }

    /// q = 1 or q = -1; formulas dispatch to their classical limits.
    pub fn unit(q: f64) -> Result<Self> {
        if (q.abs() - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidInput(format!("unit regime requires |q| = 1, got q = {q}")));
        }
        Ok(QParam { q: q.signum(), regime: QRegime::Unit })
    }

    /// A real M-th root of unity (M ∈ {1, 2} for real q).
    pub fn root_of_unity(q: f64, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("root_of_unity requires M >= 1".into()));
        }
        if (q.powi(m as i32) - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidInput(format!("q = {q} is not an {m}-th root of unity")));
        }
        Ok(QParam { q, regime: QRegime::RootOfUnity(m) })
    }

    pub fn value(&self) -> f64 {
        self.q
    }

    pub fn regime(&self) -> QRegime {
        self.regime
    }

    pub fn is_sub_unit(&self) -> bool {
        matches!(self.regime, QRegime::SubUnit)
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.regime, QRegime::Unit)
    }
}

/// Result of a truncated series or product evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesValue {
    /// Partial sum / truncated product.
    pub value: Complex64,
    /// A-posteriori truncation bound (first dropped term, tail-corrected).
    pub est_error: f64,
    /// Number of terms (or product factors) actually used.
    pub terms_used: usize,
    /// False when the evaluation point lies outside the convergence domain;
    /// `value` is then a diagnostic partial sum only.
    pub in_domain: bool,
}

impl SeriesValue {
    pub(crate) fn exact(value: Complex64) -> Self {
        SeriesValue { value, est_error: 0.0, terms_used: 0, in_domain: true }
    }
}

/// One-sided series summation with the crate's standard stopping rule.
///
/// `term(n)` returns the n-th term; summation stops when the term magnitude
/// has stayed below `TAIL_TOL * |sum|` while decreasing for `DECREASE_RUN`
/// consecutive terms. Returns `in_domain = false` when terms grow for a long
/// stretch or the cap is hit.
pub(crate) fn sum_one_sided(mut term: impl FnMut(usize) -> Complex64) -> SeriesValue {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev_mag = f64::INFINITY;
    let mut small_run = 0usize;
    let mut grow_run = 0usize;
    let mut last_mag = 0.0;
    for n in 0..MAX_TERMS {
        let t = term(n);
        sum += t;
        let mag = t.norm();
        if mag <= prev_mag {
            grow_run = 0;
        } else {
            grow_run += 1;
        }
        if mag < TAIL_TOL * sum.norm().max(f64::MIN_POSITIVE) && mag <= prev_mag {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= DECREASE_RUN {
            return SeriesValue { value: sum, est_error: mag, terms_used: n + 1, in_domain: true };
        }
        // 64 consecutive growing terms (or overflow) is read as divergence.
        if grow_run >= 64 || !mag.is_finite() || mag > 1e250 {
            return SeriesValue { value: sum, est_error: mag, terms_used: n + 1, in_domain: false };
        }
        prev_mag = mag;
        last_mag = mag;
    }
    SeriesValue { value: sum, est_error: last_mag, terms_used: MAX_TERMS, in_domain: false }
}

/// q-bracket `[n] = (1 - q^{2n})/(1 - q²)`, with the exact classical limit
/// `[n] -> n` at q = ±1.
pub fn qbracket(n: u32, q: &QParam) -> f64 {
    let qv = q.value();
    if q.is_unit() || (qv.abs() - 1.0).abs() < 1e-15 {
        return n as f64;
    }
    let q2 = qv * qv;
    (1.0 - q2.powi(n as i32)) / (1.0 - q2)
}

/// q-factorial `[n]! = [n] [n-1]!`, `[0]! = 1`; returns n! exactly at q = ±1.
pub fn qfactorial(n: u32, q: &QParam) -> f64 {
    (1..=n).map(|k| qbracket(k, q)).product()
}
