//! Momentum-integral coherent states of the free-particle hierarchy.
//!
//! ```text
//! ψ_s(x) = (1/√(4π)) ∫_0^∞ λ^{d_s} e^{i√λ x} dλ / Π_k (iq√λ/β_k; q)_∞,
//! d_s = [ln(ρ/(α q^{3/2})) + 2πis] / ln q²,   ρ = Πβ_k,
//! ```
//!
//! normalizable exactly for |α| > ρ. In the momentum variable p = √λ the
//! phase is linear, so the smooth form factor
//! G(p) = 2 p^{2d_s+1} / Π(iqp/β_k; q)_∞ is precomputed once on a graded
//! mesh and every x-evaluation reduces to a Filon pass (linear G per panel,
//! e^{ipx} integrated exactly). The normalization identity
//! ∫|ψ|²dx = ∫ λ^τ dλ/Π(-λq²/β_k²; q²)_∞ with τ = 2 Re d_s + 1/2 provides
//! the independent momentum-space route.

use num_complex::Complex64;

use crate::qseries::{qpochhammer, PochhammerOrder, QParam};
use crate::{quad, Error, Result};

type C64 = Complex64;

/// Precomputed evaluator for one (α, q, β-list, s) family member.
pub struct FreeCsEvaluator {
    pub alpha: C64,
    pub q: f64,
    pub betas: Vec<f64>,
    pub s: i32,
    pub d_s: C64,
    mesh_p: Vec<f64>,
    g: Vec<C64>,
}

impl FreeCsEvaluator {
    pub fn new(alpha: C64, q: f64, betas: &[f64], s: i32) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) || betas.is_empty() || betas.iter().any(|b| *b <= 0.0) {
            return Err(Error::InvalidInput(
                "free-particle states need 0 < q < 1 and positive β_k".into(),
            ));
        }
        let rho: f64 = betas.iter().product();
        if alpha.norm() <= rho {
            return Err(Error::Domain(format!(
                "out of the normalizability window: |α| = {} <= ρ = {rho}",
                alpha.norm()
            )));
        }
        // d_s = [ln(ρ/(α q^{3/2})) + 2πis]/ln q², principal branch
        let d_s = ((C64::new(rho, 0.0) / (alpha * q.powf(1.5))).ln()
            + C64::new(0.0, 2.0 * std::f64::consts::PI * s as f64))
            / (q * q).ln();
        let qp = QParam::sub_unit(q)?;
        let gfun = |p: f64| -> Result<C64> {
            if p == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            let mut den = C64::new(1.0, 0.0);
            for &b in betas {
                den *= qpochhammer(C64::new(0.0, q * p / b), &qp, PochhammerOrder::Infinite)?
                    .value;
            }
            Ok(2.0 * C64::new(p, 0.0).powc(2.0 * d_s + 1.0) / den)
        };
        // locate p_max where |G| has decayed to ~1e-15 of its peak
        let mut peak = 0.0f64;
        let mut p_max = 1.0f64;
        loop {
            let v = gfun(p_max)?.norm();
            peak = peak.max(v);
            if v < 1e-15 * peak.max(1e-300) || p_max > 1e7 {
                break;
            }
            p_max *= 1.6;
        }
        // quadratically graded mesh resolves both the p^{2d+1} endpoint and
        // the O(p·ln(1/q)) feature scale of the q-product
        let m = 24_000usize;
        let mut mesh_p = Vec::with_capacity(m + 1);
        let mut g = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let u = j as f64 / m as f64;
            let p = p_max * u * u;
            mesh_p.push(p);
            g.push(gfun(p)?);
        }
        Ok(FreeCsEvaluator { alpha, q, betas: betas.to_vec(), s, d_s, mesh_p, g })
    }

    /// ψ(x) by the Filon pass (extra = 0) or its x-derivative (extra = 1,
    /// inserting the ip factor).
    fn filon(&self, x: f64, extra_ip: bool) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for j in 0..self.mesh_p.len() - 1 {
            let (p0, p1) = (self.mesh_p[j], self.mesh_p[j + 1]);
            let h = p1 - p0;
            if h <= 0.0 {
                continue;
            }
            let (mut g0, mut g1) = (self.g[j], self.g[j + 1]);
            if extra_ip {
                g0 *= C64::new(0.0, p0);
                g1 *= C64::new(0.0, p1);
            }
            // ∫_0^h [g0 + (g1-g0)u/h] e^{i(p0+u)x} du
            let (i0, i1) = moment_integrals(h, x);
            total += (C64::new(0.0, p0 * x)).exp() * (g0 * i0 + (g1 - g0) * i1 / h);
        }
        total / (4.0 * std::f64::consts::PI).sqrt()
    }

    /// Wavefunction sample ψ_s(x).
    pub fn eval(&self, x: f64) -> C64 {
        self.filon(x, false)
    }

    /// dψ_s/dx by differentiating under the integral.
    pub fn eval_derivative(&self, x: f64) -> C64 {
        self.filon(x, true)
    }

    /// Envelope decay power of |ψ(x)| at large x: 2 Re d_s + 2.
    pub fn decay_power(&self) -> f64 {
        2.0 * self.d_s.re + 2.0
    }

    /// Exponent of the momentum-space normalization integrand.
    pub fn tau(&self) -> f64 {
        2.0 * self.d_s.re + 0.5
    }

    /// Momentum-route normalization ∫ λ^τ dλ / Π(-λq²/β_k²; q²)_∞.
    pub fn norm_squared_momentum(&self) -> Result<f64> {
        let tau = self.tau();
        let q2 = self.q * self.q;
        let qp2 = QParam::sub_unit(q2)?;
        let betas = self.betas.clone();
        let integrand = move |t: f64| {
            let lam = t.exp();
            let mut den = C64::new(1.0, 0.0);
            for &b in &betas {
                den *= qpochhammer(
                    C64::new(-lam * q2 / (b * b), 0.0),
                    &qp2,
                    PochhammerOrder::Infinite,
                )
                .expect("sub-unit base")
                .value;
            }
            C64::new((t * (tau + 1.0)).exp(), 0.0) / den
        };
        let t_lo = (1e-18f64).ln() / (tau + 1.0);
        let mut t_hi = 1.0;
        while integrand(t_hi).norm() > 1e-18 && t_hi < 400.0 {
            t_hi += 1.0;
        }
        Ok(quad::integrate(&integrand, t_lo, t_hi, 1e-300, 1e-10)?.re)
    }

    /// Grid-route normalization: trapezoid ∫_{-X}^{X} |ψ|² dx plus power-law
    /// tail corrections |ψ(±X)|² X/(2κ-1).
    pub fn norm_squared_grid(&self, x_max: f64, dx: f64) -> Result<f64> {
        if !(x_max > 0.0 && dx > 0.0) {
            return Err(Error::InvalidInput("x_max and dx must be positive".into()));
        }
        let kappa = self.decay_power();
        if kappa <= 0.5 {
            return Err(Error::Domain("state is not normalizable (κ ≤ 1/2)".into()));
        }
        let n = (2.0 * x_max / dx).round() as usize + 1;
        let mut sum = 0.0;
        let mut left = 0.0;
        let mut right = 0.0;
        for i in 0..n {
            let x = -x_max + dx * i as f64;
            let v = self.eval(x).norm_sqr();
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            sum += w * v;
            if i == 0 {
                left = v;
            }
            if i == n - 1 {
                right = v;
            }
        }
        let tail = (left + right) * x_max / (2.0 * kappa - 1.0);
        Ok(sum * dx + tail)
    }
}

/// ∫_0^h e^{iux} du and ∫_0^h u e^{iux} du with stable small-phase branches.
fn moment_integrals(h: f64, x: f64) -> (C64, C64) {
    let w = h * x;
    if w.abs() < 1e-3 {
        // series in w keeps full precision through the cancellation
        let i = C64::new(0.0, 1.0);
        let i0 = h * (C64::new(1.0, 0.0) + i * w / 2.0 - w * w / 6.0 * C64::new(1.0, 0.0)
            - i * w * w * w / 24.0);
        let i1 = h * h
            * (C64::new(0.5, 0.0) + i * w / 3.0 - w * w / 8.0 * C64::new(1.0, 0.0)
                - i * w * w * w / 30.0);
        (i0, i1)
    } else {
        let i = C64::new(0.0, 1.0);
        let e = (i * w).exp();
        let ix = i * x;
        let i0 = (e - 1.0) / ix;
        let i1 = h * e / ix - (e - 1.0) / (ix * ix);
        (i0, i1)
    }
}

/// One wavefunction sample of the momentum-integral coherent state (builds
/// the form-factor mesh, so batch evaluations should use
/// [`FreeCsEvaluator`] directly).
pub fn free_cs_quadrature(alpha: C64, q: f64, betas: &[f64], s: i32, x: f64) -> Result<C64> {
    Ok(FreeCsEvaluator::new(alpha, q, betas, s)?.eval(x))
}

/// (grid-route, momentum-route) normalization pair for the s = 0 member.
pub fn free_cs_norm_squared(
    alpha: C64,
    q: f64,
    betas: &[f64],
    x_max: f64,
    dx: f64,
) -> Result<(f64, f64)> {
    let ev = FreeCsEvaluator::new(alpha, q, betas, 0)?;
    Ok((ev.norm_squared_grid(x_max, dx)?, ev.norm_squared_momentum()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn window_flag() {
        assert!(FreeCsEvaluator::new(c(0.9), 0.5, &[1.0], 0).is_err());
        assert!(FreeCsEvaluator::new(c(2.0), 0.5, &[1.0], 0).is_ok());
    }

    #[test]
    fn moment_integral_branches_agree() {
        // across the small-phase switch
        for &(h, x) in &[(1e-3, 0.09), (1e-3, 0.11), (0.01, 0.011), (0.5, 2.0e-4)] {
            let (i0a, i1a) = moment_integrals(h, x);
            // brute force Simpson
            let n = 2000;
            let mut s0 = C64::new(0.0, 0.0);
            let mut s1 = C64::new(0.0, 0.0);
            for k in 0..=n {
                let u = h * k as f64 / n as f64;
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let e = (C64::new(0.0, u * x)).exp();
                s0 += w * e;
                s1 += w * u * e;
            }
            let hstep = h / n as f64 / 3.0;
            s0 *= hstep;
            s1 *= hstep;
            assert!((i0a - s0).norm() < 1e-8 * h, "i0 h={h} x={x}");
            assert!((i1a - s1).norm() < 1e-8 * h * h, "i1 h={h} x={x}");
        }
    }

    #[test]
    fn satisfies_generalized_pantograph_equation() {
        // N = 1: -q ψ'(qx) + β ψ(qx) = α q^{-1/2} ψ(x)
        let (alpha, q, beta) = (c(2.0), 0.5, 1.0);
        let ev = FreeCsEvaluator::new(alpha, q, &[beta], 0).unwrap();
        for &x in &[0.7, 1.9, 4.2, -2.3] {
            let lhs = -q * ev.eval_derivative(q * x) + beta * ev.eval(q * x);
            let rhs = alpha * q.powf(-0.5) * ev.eval(x);
            let rel = (lhs - rhs).norm() / rhs.norm().max(1e-12);
            assert!(rel < 1e-5, "x = {x}: relative residual {rel}");
        }
    }

    #[test]
    fn s_members_linearly_independent() {
        let (alpha, q) = (c(2.0), 0.5);
        let e0 = FreeCsEvaluator::new(alpha, q, &[1.0], 0).unwrap();
        let e1 = FreeCsEvaluator::new(alpha, q, &[1.0], 1).unwrap();
        let (x1, x2) = (0.9, 2.7);
        let det = e0.eval(x1) * e1.eval(x2) - e0.eval(x2) * e1.eval(x1);
        let scale = e0.eval(x1).norm() * e1.eval(x2).norm()
            + e0.eval(x2).norm() * e1.eval(x1).norm();
        assert!(det.norm() > 1e-3 * scale, "det = {det}, scale = {scale}");
    }
}
