//! Harmonic-oscillator layer: number states, canonical coherent states and
//! their parity / root-of-unity / Titulaer-Glauber superpositions, moments
//! and uncertainty products, and two-mode entangled states.
//!
//! Conventions: `a = (d/dx + x)/√2`, `H = a†a` up to the usual 1/2 shift,
//! `⟨x|0⟩ = π^{-1/4} e^{-x²/2}` with zero phase. All normalization constants
//! are chosen real positive; only |C|² is fixed by theory, tests need
//! determinism.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::{Error, Result};

type C64 = Complex64;

/// Truncated coefficient vector over oscillator number states.
#[derive(Debug, Clone)]
pub struct FockVector {
    pub coeffs: Vec<C64>,
    /// Whether Σ|c_n|² = 1 was enforced at construction.
    pub norm_flag: bool,
}

impl FockVector {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("FockVector needs nmax >= 0".into()));
        }
        Ok(FockVector { coeffs, norm_flag: false })
    }

    pub fn nmax(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescale to unit norm and set the flag.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-150 {
            return Err(Error::InvalidInput("cannot normalize a null Fock vector".into()));
        }
        for c in &mut self.coeffs {
            *c /= n;
        }
        self.norm_flag = true;
        Ok(self)
    }

    /// ⟨self|other⟩ (conjugate-linear in self), padding the shorter vector.
    pub fn dot(&self, other: &FockVector) -> C64 {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            s += self.coeffs[i].conj() * other.coeffs[i];
        }
        s
    }

    /// Annihilation operator: (a ψ)_n = √(n+1) c_{n+1}.
    pub fn lower(&self) -> FockVector {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        for n in 0..self.coeffs.len() - 1 {
            out[n] = ((n + 1) as f64).sqrt() * self.coeffs[n + 1];
        }
        FockVector { coeffs: out, norm_flag: false }
    }

    /// Creation operator: (a† ψ)_n = √n c_{n-1}; grows the truncation by one.
    pub fn raise(&self) -> FockVector {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + 1];
        for n in 1..out.len() {
            out[n] = (n as f64).sqrt() * self.coeffs[n - 1];
        }
        FockVector { coeffs: out, norm_flag: false }
    }

    /// Parity (-1)^N.
    pub fn parity(&self) -> FockVector {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| if n % 2 == 0 { *c } else { -*c })
            .collect();
        FockVector { coeffs, norm_flag: self.norm_flag }
    }

    /// Coordinate wavefunction Σ c_n ⟨x|n⟩ by Hermite synthesis.
    pub fn wavefunction(&self, x: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut h_prev = 0.0f64;
        let mut h = PI.powf(-0.25) * (-x * x / 2.0).exp();
        for (n, c) in self.coeffs.iter().enumerate() {
            acc += c * h;
            let np1 = (n + 1) as f64;
            let next = (2.0 / np1).sqrt() * x * h - (n as f64 / np1).sqrt() * h_prev;
            h_prev = h;
            h = next;
        }
        acc
    }
}

/// Truncation policy for coherent-state towers: Poisson tail bound.
pub fn auto_nmax(alpha: C64) -> usize {
    let a = alpha.norm();
    32usize.max((a * a + 8.0 * a + 20.0).ceil() as usize)
}

/// Normalized oscillator eigenstate ⟨x|n⟩ = H_n(x) e^{-x²/2}/√(2^n n! √π),
/// by the stable three-term recurrence on the normalized functions.
pub fn hermite_eigenstate(n: usize, x: f64) -> f64 {
    let mut h_prev = 0.0f64;
    let mut h = PI.powf(-0.25) * (-x * x / 2.0).exp();
    for k in 0..n {
        let kp1 = (k + 1) as f64;
        let next = (2.0 / kp1).sqrt() * x * h - (k as f64 / kp1).sqrt() * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// Canonical coherent state |α⟩ = e^{-|α|²/2} Σ α^n/√(n!) |n⟩.
pub fn canonical_cs(alpha: C64) -> FockVector {
    canonical_cs_n(alpha, auto_nmax(alpha))
}

/// Canonical coherent state with explicit truncation.
pub fn canonical_cs_n(alpha: C64, nmax: usize) -> FockVector {
    let mut coeffs = Vec::with_capacity(nmax + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..=nmax {
        coeffs.push(c);
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    FockVector { coeffs, norm_flag: true }
}

/// Closed-form coherent-state wavefunction
/// ψ_α(x) = π^{-1/4} exp((α² - |α|²)/2 - (x/√2 - α)²).
pub fn canonical_cs_wf(alpha: C64, x: f64) -> C64 {
    let arg = (alpha * alpha - alpha.norm_sqr()) / 2.0
        - (C64::new(x / 2f64.sqrt(), 0.0) - alpha).powi(2);
    PI.powf(-0.25) * arg.exp()
}

/// Parity coherent state ½[(1+e^{-iφ})|α⟩ + (1-e^{-iφ})|-α⟩]: the eigenstate
/// of A = V a with V = cos φ + iP sin φ. φ = 0 gives |α⟩; φ = π/2 the
/// Yurke-Stoler state. The combination is automatically normalized.
pub fn parity_cs(alpha: C64, phi: f64) -> FockVector {
    let nmax = auto_nmax(alpha);
    let plus = canonical_cs_n(alpha, nmax);
    let minus = canonical_cs_n(-alpha, nmax);
    let e = C64::new(0.0, -phi).exp();
    let wp = (C64::new(1.0, 0.0) + e) / 2.0;
    let wm = (C64::new(1.0, 0.0) - e) / 2.0;
    let coeffs = plus
        .coeffs
        .iter()
        .zip(&minus.coeffs)
        .map(|(p, m)| wp * p + wm * m)
        .collect();
    FockVector { coeffs, norm_flag: true }
}

/// Apply V a with V = cos φ + i (-1)^N sin φ (Fock-space form of the parity
/// ladder operator).
pub fn parity_ladder_apply(state: &FockVector, phi: f64) -> FockVector {
    let lowered = state.lower();
    let coeffs = lowered
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(phi.cos(), sign * phi.sin()) * c
        })
        .collect();
    FockVector { coeffs, norm_flag: false }
}

/// Position/momentum first and second moments plus the
/// Schrödinger-Robertson combination Δ = σ_xx σ_pp - σ_xp².
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentsReport {
    pub mean_x: f64,
    pub mean_p: f64,
    pub sigma_xx: f64,
    pub sigma_pp: f64,
    pub sigma_xp: f64,
    pub delta: f64,
}

/// Moments from Fock coefficients via the tridiagonal x, p matrix elements.
pub fn moments(state: &FockVector) -> Result<MomentsReport> {
    let norm2: f64 = state.coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "moments need a normalized state (got Σ|c|² = {norm2})"
        )));
    }
    let c = &state.coeffs;
    let nmax = state.nmax();
    let mut exp_a = C64::new(0.0, 0.0); // ⟨a⟩
    let mut exp_a2 = C64::new(0.0, 0.0); // ⟨a²⟩
    let mut exp_n = 0.0; // ⟨N⟩
    for n in 0..=nmax {
        exp_n += n as f64 * c[n].norm_sqr();
        if n + 1 <= nmax {
            exp_a += c[n].conj() * ((n + 1) as f64).sqrt() * c[n + 1];
        }
        if n + 2 <= nmax {
            exp_a2 += c[n].conj() * (((n + 1) * (n + 2)) as f64).sqrt() * c[n + 2];
        }
    }
    let mean_x = 2f64.sqrt() * exp_a.re;
    let mean_p = 2f64.sqrt() * exp_a.im;
    let x2 = 0.5 * (1.0 + 2.0 * exp_n + 2.0 * exp_a2.re);
    let p2 = 0.5 * (1.0 + 2.0 * exp_n - 2.0 * exp_a2.re);
    let xp_sym = exp_a2.im; // ½⟨xp + px⟩
    let sigma_xx = x2 - mean_x * mean_x;
    let sigma_pp = p2 - mean_p * mean_p;
    let sigma_xp = xp_sym - mean_x * mean_p;
    Ok(MomentsReport {
        mean_x,
        mean_p,
        sigma_xx,
        sigma_pp,
        sigma_xp,
        delta: sigma_xx * sigma_pp - sigma_xp * sigma_xp,
    })
}

/// Closed form Δ(φ) = ¼(1 + ρ sin²φ (1 - (1+ρ) e^{-ρ})), ρ = 4|α|², for the
/// parity coherent states.
pub fn delta_phi_closed(alpha: C64, phi: f64) -> f64 {
    let rho = 4.0 * alpha.norm_sqr();
    0.25 * (1.0 + rho * phi.sin().powi(2) * (1.0 - (1.0 + rho) * (-rho).exp()))
}

/// Closed-form covariance block for the φ = π/2 parity coherent states.
pub fn yurke_stoler_sigma(alpha: C64) -> (f64, f64, f64) {
    let d = alpha - alpha.conj(); // α - α*
    let s = alpha + alpha.conj(); // α + α*
    let e = (-4.0 * alpha.norm_sqr()).exp();
    let sigma_xx = (1.0 - (d * d).re - (s * s).re * e) / 2.0;
    let sigma_pp = (1.0 + (s * s).re + (d * d).re * e) / 2.0;
    // (α*² - α²)(1 + e^{-4|α|²})/2i
    let sigma_xp = ((alpha.conj() * alpha.conj() - alpha * alpha) * (1.0 + e)
        / C64::new(0.0, 2.0))
    .re;
    (sigma_xx, sigma_pp, sigma_xp)
}

/// Orthonormal root-of-unity superposition
/// |α_l⟩ = C_l Σ_m ε^{-lm} |ε^m α⟩, ε = e^{2πi/M}; populates only Fock
/// indices ≡ l (mod M). Degenerate (null) at α = 0 for l > 0.
pub fn root_superposition(alpha: C64, m_fold: usize, l: usize) -> Result<FockVector> {
    if m_fold < 1 || l >= m_fold {
        return Err(Error::InvalidInput(format!(
            "root superposition needs M >= 1 and 0 <= l < M (M={m_fold}, l={l})"
        )));
    }
    // |C_l|^{-2} = M e^{-|α|²} Σ_m ε^{-lm} exp(ε^m |α|²)  (real positive)
    let t = alpha.norm_sqr();
    let m = m_fold as f64;
    let mut csum = C64::new(0.0, 0.0);
    for k in 0..m_fold {
        let eps_k = C64::from_polar(1.0, 2.0 * PI * (k as f64) / m);
        csum += C64::from_polar(1.0, -2.0 * PI * (k as f64 * l as f64) / m) * (eps_k * t).exp();
    }
    let inv_cl2 = m * (-t).exp() * csum.re;
    if inv_cl2 <= 1e-140 {
        return Err(Error::Domain(format!(
            "degenerate normalization for root superposition (α = {alpha}, l = {l})"
        )));
    }
    let cl = inv_cl2.sqrt().recip();
    let nmax = auto_nmax(alpha).max(m_fold * 4);
    let mut coeffs = vec![C64::new(0.0, 0.0); nmax + 1];
    // c_n = M C_l e^{-|α|²/2} α^n/√(n!) on n ≡ l (mod M)
    let mut amp = C64::new((-t / 2.0).exp(), 0.0);
    for n in 0..=nmax {
        if n % m_fold == l {
            coeffs[n] = m * cl * amp;
        }
        amp *= alpha / ((n + 1) as f64).sqrt();
    }
    Ok(FockVector { coeffs, norm_flag: true })
}

/// Projector Π_l onto Fock indices ≡ l (mod M), built from the
/// exponential-sum form Π_l = (1/M) Σ_m ε^{m(N-l)}; returned as the diagonal.
pub fn mod_projector_diagonal(m_fold: usize, l: usize, nmax: usize) -> Vec<C64> {
    let m = m_fold as f64;
    (0..=nmax)
        .map(|n| {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..m_fold {
                // reduce the phase index mod M first; keeps the roots exact
                let idx = (k as i64 * (n as i64 - l as i64)).rem_euclid(m_fold as i64);
                s += C64::from_polar(1.0, 2.0 * PI * (idx as f64) / m);
            }
            s / m
        })
        .collect()
}

/// Titulaer-Glauber state e^{-|α|²/2} Σ α^n e^{iθ(n)}/√(n!) |n⟩ for an
/// arbitrary phase function θ (θ(0) = 0 convention; a global phase is
/// harmless either way).
pub fn titulaer_glauber(theta: impl Fn(usize) -> f64, alpha: C64) -> FockVector {
    let base = canonical_cs(alpha);
    let coeffs = base
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * C64::from_polar(1.0, theta(n)))
        .collect();
    FockVector { coeffs, norm_flag: true }
}

/// Superposition weights B_l(φ) = (1/M) Σ_m q^{-lm} e^{i q^m φ} for the
/// q-periodic phase θ(n) = φ q^n at a primitive M-th root of unity q.
pub fn qperiodic_truncation(phi: f64, m_fold: usize) -> Result<Vec<C64>> {
    if m_fold < 1 {
        return Err(Error::InvalidInput("qperiodic truncation needs M >= 1".into()));
    }
    let m = m_fold as f64;
    let q = |k: f64| C64::from_polar(1.0, 2.0 * PI * k / m);
    let mut out = Vec::with_capacity(m_fold);
    for l in 0..m_fold {
        let mut s = C64::new(0.0, 0.0);
        for mm in 0..m_fold {
            let qm = q(mm as f64);
            s += q(-((l * mm) as f64)) * (C64::new(0.0, phi) * qm).exp();
        }
        out.push(s / m);
    }
    Ok(out)
}

/// The q-periodic-phase coherent state Σ_n e^{-|α|²/2} α^n e^{iφ q^n}/√(n!)|n⟩
/// for q a primitive M-th root of unity (the "phase" iφq^n is complex, so
/// this state is not normalized).
pub fn qperiodic_state(phi: f64, m_fold: usize, alpha: C64) -> Result<FockVector> {
    if m_fold < 1 {
        return Err(Error::InvalidInput("qperiodic state needs M >= 1".into()));
    }
    let m = m_fold as f64;
    let base = canonical_cs(alpha);
    let coeffs = base
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let qn = C64::from_polar(1.0, 2.0 * PI * ((n % m_fold) as f64) / m);
            c * (C64::new(0.0, phi) * qn).exp()
        })
        .collect();
    Ok(FockVector { coeffs, norm_flag: false })
}

/// Superposition Σ_k w_k |β_k α⟩ with given weights and unimodular β_k.
pub fn weighted_cs_superposition(weights: &[C64], betas: &[C64], alpha: C64) -> Result<FockVector> {
    if weights.len() != betas.len() || weights.is_empty() {
        return Err(Error::InvalidInput("weights/betas length mismatch".into()));
    }
    let nmax = auto_nmax(alpha);
    let mut coeffs = vec![C64::new(0.0, 0.0); nmax + 1];
    for (w, b) in weights.iter().zip(betas) {
        let cs = canonical_cs_n(b * alpha, nmax);
        for (o, c) in coeffs.iter_mut().zip(cs.coeffs) {
            *o += w * c;
        }
    }
    Ok(FockVector { coeffs, norm_flag: false })
}

/// Two-mode coefficient tensor c_{mn} over |m⟩⊗|n⟩.
#[derive(Debug, Clone)]
pub struct TwoModeState {
    pub coeffs: Vec<Vec<C64>>, // [mode1 index][mode2 index]
}

impl TwoModeState {
    pub fn nmax(&self) -> (usize, usize) {
        (self.coeffs.len() - 1, self.coeffs[0].len() - 1)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Apply A_j = P a_j with P = (-1)^{N₁+N₂}; j ∈ {1, 2}.
    pub fn parity_lower(&self, mode: usize) -> Result<TwoModeState> {
        let (n1, n2) = self.nmax();
        let mut out = vec![vec![C64::new(0.0, 0.0); n2 + 1]; n1 + 1];
        for m in 0..=n1 {
            for n in 0..=n2 {
                let lowered = match mode {
                    1 => {
                        if m + 1 <= n1 {
                            ((m + 1) as f64).sqrt() * self.coeffs[m + 1][n]
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }
                    2 => {
                        if n + 1 <= n2 {
                            ((n + 1) as f64).sqrt() * self.coeffs[m][n + 1]
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }
                    _ => return Err(Error::InvalidInput("mode must be 1 or 2".into())),
                };
                let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
                out[m][n] = sign * lowered;
            }
        }
        Ok(TwoModeState { coeffs: out })
    }

    /// Squared Schmidt coefficients (eigenvalues of the reduced density
    /// matrix), descending, via power iteration with deflation.
    pub fn schmidt_squares(&self, k: usize) -> Vec<f64> {
        let (n1, _) = self.nmax();
        let dim = n1 + 1;
        // rho[m][m'] = Σ_n c_{mn} conj(c_{m'n})
        let mut rho = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        for m in 0..dim {
            for mp in 0..dim {
                let mut s = C64::new(0.0, 0.0);
                for n in 0..self.coeffs[0].len() {
                    s += self.coeffs[m][n] * self.coeffs[mp][n].conj();
                }
                rho[m][mp] = s;
            }
        }
        let mut found: Vec<(f64, Vec<C64>)> = Vec::new();
        for _ in 0..k.min(dim) {
            let mut v: Vec<C64> = (0..dim)
                .map(|i| C64::new(1.0 / ((i + 1) as f64), 0.3 / ((i + 2) as f64)))
                .collect();
            let mut lambda = 0.0;
            for _ in 0..600 {
                // project out previously found eigenvectors
                for (_, u) in &found {
                    let ip: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= ip * ui;
                    }
                }
                let mut w = vec![C64::new(0.0, 0.0); dim];
                for m in 0..dim {
                    for mp in 0..dim {
                        w[m] += rho[m][mp] * v[mp];
                    }
                }
                let nrm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if nrm < 1e-200 {
                    lambda = 0.0;
                    break;
                }
                lambda = nrm;
                for wi in &mut w {
                    *wi /= nrm;
                }
                v = w;
            }
            found.push((lambda, v));
        }
        found.into_iter().map(|(l, _)| l).collect()
    }
}

/// Two-mode entangled coherent state
/// (e^{-iπ/4}|iα₁⟩|iα₂⟩ + e^{iπ/4}|-iα₁⟩|-iα₂⟩)/√2: simultaneous eigenstate
/// of A_j = P a_j with eigenvalues α_j.
pub fn entangled_two_mode(alpha1: C64, alpha2: C64) -> TwoModeState {
    let i = C64::new(0.0, 1.0);
    let (n1, n2) = (auto_nmax(alpha1), auto_nmax(alpha2));
    let u1 = canonical_cs_n(i * alpha1, n1);
    let u2 = canonical_cs_n(i * alpha2, n2);
    let v1 = canonical_cs_n(-i * alpha1, n1);
    let v2 = canonical_cs_n(-i * alpha2, n2);
    let wp = C64::from_polar(1.0 / 2f64.sqrt(), -PI / 4.0);
    let wm = C64::from_polar(1.0 / 2f64.sqrt(), PI / 4.0);
    let mut coeffs = vec![vec![C64::new(0.0, 0.0); n2 + 1]; n1 + 1];
    for m in 0..=n1 {
        for n in 0..=n2 {
            coeffs[m][n] = wp * u1.coeffs[m] * u2.coeffs[n] + wm * v1.coeffs[m] * v2.coeffs[n];
        }
    }
    TwoModeState { coeffs }
}

/// Even/odd coherent states of the shifted oscillator u = (x-x₀)²,
/// closed coordinate form ∝ e^{-(x-x₀)²/2}(e^{√2(x-x₀)α} ± e^{-√2(x-x₀)α}).
pub fn shifted_even_odd_wf(alpha: C64, x0: f64, even: bool, x: f64) -> C64 {
    let y = x - x0;
    let u = 2f64.sqrt() * alpha * y;
    let g = (-y * y / 2.0).exp();
    if even {
        g * (u.exp() + (-u).exp())
    } else {
        g * (u.exp() - (-u).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ground_state_closed_form() {
        for &x in &[0.0f64, 0.7, -1.3, 2.9] {
            let expect = PI.powf(-0.25) * (-x * x / 2.0).exp();
            assert!((hermite_eigenstate(0, x) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn hermite_parity() {
        for n in 0..12 {
            for &x in &[0.3, 1.1, 2.4] {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let lhs = hermite_eigenstate(n, -x);
                let rhs = sign * hermite_eigenstate(n, x);
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hermite_orthogonality_by_quadrature() {
        let f = |x: f64| C64::new(hermite_eigenstate(3, x) * hermite_eigenstate(5, x), 0.0);
        let v = quad::integrate(&f, -12.0, 12.0, 1e-12, 1e-12).unwrap();
        assert!(v.re.abs() < 1e-10);
        let g = |x: f64| C64::new(hermite_eigenstate(5, x).powi(2), 0.0);
        let n = quad::integrate(&g, -12.0, 12.0, 1e-12, 1e-12).unwrap();
        assert!((n.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_state_basics() {
        // α = 0 is the ground state
        let v = canonical_cs(c(0.0));
        assert_eq!(v.coeffs[0], c(1.0));
        assert!(v.coeffs[1..].iter().all(|c| c.norm() == 0.0));
        // a|α⟩ = α|α⟩
        let alpha = C64::new(0.8, -0.4);
        let v = canonical_cs(alpha);
        let av = v.lower();
        let mut res = 0.0f64;
        for n in 0..v.coeffs.len() - 1 {
            res = res.max((av.coeffs[n] - alpha * v.coeffs[n]).norm());
        }
        assert!(res < 1e-12, "ladder residual {res}");
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_overlap_closed_form() {
        let a = C64::new(0.6, 0.3);
        let b = C64::new(-0.2, 0.9);
        let va = canonical_cs(a);
        let vb = canonical_cs(b);
        let expect = (b.conj() * a - a.norm_sqr() / 2.0 - b.norm_sqr() / 2.0).exp();
        assert!((vb.dot(&va) - expect).norm() < 1e-13);
    }

    #[test]
    fn coherent_wavefunction_synthesis_matches_closed_form() {
        let alpha = C64::new(0.9, 0.5);
        let v = canonical_cs(alpha);
        for &x in &[-2.0, 0.0, 0.9, 3.2] {
            let synth = v.wavefunction(x);
            let closed = canonical_cs_wf(alpha, x);
            assert!((synth - closed).norm() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn parity_cs_phi_zero_is_canonical() {
        let alpha = C64::new(0.5, 0.2);
        let p = parity_cs(alpha, 0.0);
        let v = canonical_cs(alpha);
        for (a, b) in p.coeffs.iter().zip(&v.coeffs) {
            assert!((a - b).norm() == 0.0);
        }
    }

    #[test]
    fn parity_cs_is_eigenstate_of_va() {
        let alpha = C64::new(0.7, -0.3);
        for &phi in &[0.4, PI / 2.0, 2.1] {
            let state = parity_cs(alpha, phi);
            let applied = parity_ladder_apply(&state, phi);
            let mut res = 0.0f64;
            for n in 0..state.coeffs.len() - 1 {
                res = res.max((applied.coeffs[n] - alpha * state.coeffs[n]).norm());
            }
            assert!(res < 1e-12, "φ = {phi}: residual {res}");
        }
    }

    #[test]
    fn yurke_stoler_coordinate_form() {
        // After the α ↔ iα relabeling: parity_cs(iα, π/2) has the closed
        // coordinate form √2 π^{-1/4} e^{(α²-|α|²-x²)/2} cos(√2 αx - π/4).
        let alpha = c(0.8);
        let state = parity_cs(C64::new(0.0, 1.0) * alpha, PI / 2.0);
        for &x in &[-1.7, -0.4, 0.0, 0.6, 2.3] {
            let synth = state.wavefunction(x);
            let pref = 2f64.sqrt() * PI.powf(-0.25);
            let closed = pref
                * ((alpha * alpha - alpha.norm_sqr() - x * x) / 2.0).exp()
                * (2f64.sqrt() * alpha * x - PI / 4.0).cos();
            assert!((synth - closed).norm() < 1e-11, "x = {x}: {synth} vs {closed}");
        }
    }

    #[test]
    fn moments_of_canonical_cs() {
        let alpha = C64::new(0.4, -1.1);
        let m = moments(&canonical_cs(alpha)).unwrap();
        assert!((m.sigma_xx - 0.5).abs() < 1e-12);
        assert!((m.sigma_pp - 0.5).abs() < 1e-12);
        assert!(m.sigma_xp.abs() < 1e-12);
        assert!((m.delta - 0.25).abs() < 1e-12);
        assert!((m.mean_x - 2f64.sqrt() * alpha.re).abs() < 1e-12);
        assert!((m.mean_p - 2f64.sqrt() * alpha.im).abs() < 1e-12);
    }

    #[test]
    fn delta_closed_form_vs_moments() {
        let alpha = C64::new(0.45, 0.2);
        for &phi in &[0.0, 0.7, PI / 2.0, 2.4] {
            let m = moments(&parity_cs(alpha, phi)).unwrap();
            let closed = delta_phi_closed(alpha, phi);
            assert!((m.delta - closed).abs() < 1e-10, "φ = {phi}: {} vs {closed}", m.delta);
        }
        // α = 0 is the vacuum: Δ = 1/4
        assert!((delta_phi_closed(c(0.0), 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sigma_xx_minimum_value() {
        // σ_xx of the Pa-eigenstate at α = α* = 1/2 equals (1 - e^{-1})/2
        // ≈ 0.32; that state is parity_cs(iα, π/2) in this parametrization.
        let alpha = c(0.5);
        let m = moments(&parity_cs(C64::new(0.0, 1.0) * alpha, PI / 2.0)).unwrap();
        let expect = (1.0 - (-1.0f64).exp()) / 2.0;
        assert!((m.sigma_xx - expect).abs() < 1e-10, "σ_xx = {}", m.sigma_xx);
        let (sxx, spp, sxp) = yurke_stoler_sigma(alpha);
        assert!((m.sigma_xx - sxx).abs() < 1e-10);
        assert!((m.sigma_pp - spp).abs() < 1e-10);
        assert!((m.sigma_xp - sxp).abs() < 1e-10);
    }

    #[test]
    fn root_superposition_support_pattern() {
        let alpha = c(1.1);
        for m_fold in [2usize, 3, 5] {
            for l in 0..m_fold {
                let s = root_superposition(alpha, m_fold, l).unwrap();
                assert!((s.norm() - 1.0).abs() < 1e-12);
                for (n, cn) in s.coeffs.iter().enumerate() {
                    if n % m_fold != l {
                        assert_eq!(cn.norm(), 0.0);
                    }
                }
            }
        }
        // M = 1, l = 0 reduces to the canonical coherent state
        let s = root_superposition(alpha, 1, 0).unwrap();
        let v = canonical_cs(alpha);
        for (a, b) in s.coeffs.iter().zip(&v.coeffs) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn root_superposition_even_odd_closed_norms() {
        // |α_±⟩ = (|α⟩ ± |-α⟩)/√(2 ± 2e^{-2|α|²}): compare coefficients.
        let alpha = c(0.9);
        let t = alpha.norm_sqr();
        let plus = root_superposition(alpha, 2, 0).unwrap();
        let minus = root_superposition(alpha, 2, 1).unwrap();
        let va = canonical_cs(alpha);
        let vm = canonical_cs(-alpha);
        let np = (2.0 + 2.0 * (-2.0 * t).exp()).sqrt();
        let nm = (2.0 - 2.0 * (-2.0 * t).exp()).sqrt();
        for n in 0..=plus.nmax().min(va.nmax()) {
            let ep = (va.coeffs[n] + vm.coeffs[n]) / np;
            let em = (va.coeffs[n] - vm.coeffs[n]) / nm;
            assert!((plus.coeffs[n] - ep).norm() < 1e-12);
            assert!((minus.coeffs[n] - em).norm() < 1e-12);
        }
    }

    #[test]
    fn root_superposition_orthonormal() {
        let alpha = c(1.3);
        let m_fold = 5;
        let states: Vec<_> =
            (0..m_fold).map(|l| root_superposition(alpha, m_fold, l).unwrap()).collect();
        for (i, si) in states.iter().enumerate() {
            for (j, sj) in states.iter().enumerate() {
                let ip = si.dot(sj).norm();
                if i == j {
                    assert!((ip - 1.0).abs() < 1e-12);
                } else {
                    assert!(ip < 1e-12, "⟨{i}|{j}⟩ = {ip}");
                }
            }
        }
    }

    #[test]
    fn root_superposition_degenerate_at_zero() {
        assert!(root_superposition(c(0.0), 3, 1).is_err());
    }

    #[test]
    fn projector_completeness() {
        let nmax = 64;
        for m_fold in [2usize, 3, 5] {
            let mut total = vec![C64::new(0.0, 0.0); nmax + 1];
            for l in 0..m_fold {
                for (t, p) in total.iter_mut().zip(mod_projector_diagonal(m_fold, l, nmax)) {
                    *t += p;
                }
            }
            for t in total {
                assert!((t - c(1.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn titulaer_glauber_trivial_phase() {
        let alpha = C64::new(0.3, 0.6);
        let tg = titulaer_glauber(|_| 0.0, alpha);
        let v = canonical_cs(alpha);
        for (a, b) in tg.coeffs.iter().zip(&v.coeffs) {
            assert!((a - b).norm() == 0.0);
        }
    }

    #[test]
    fn titulaer_glauber_period4_signs() {
        // θ(n) = πn(n-1)/2 gives the +,+,-,- sign pattern and reproduces the
        // Yurke-Stoler combination after the α ↔ iα relabeling.
        let alpha = C64::new(0.7, 0.1);
        let tg = titulaer_glauber(|n| PI * (n as f64) * ((n as f64) - 1.0) / 2.0, alpha);
        let signs: Vec<f64> = [1.0, 1.0, -1.0, -1.0].into_iter().cycle().take(12).collect();
        let base = canonical_cs(alpha);
        for n in 0..12 {
            assert!((tg.coeffs[n] - signs[n] * base.coeffs[n]).norm() < 1e-12);
        }
        let ys = parity_cs(C64::new(0.0, 1.0) * alpha, PI / 2.0);
        for n in 0..12 {
            assert!((tg.coeffs[n] - ys.coeffs[n]).norm() < 1e-12);
        }
    }

    #[test]
    fn qperiodic_truncation_matches_infinite_form() {
        // Σ_l B_l |q^l α⟩ must equal Σ_k (iφ)^k/k! |q^k α⟩ (both unnormalized)
        let (phi, m_fold) = (0.8, 3usize);
        let alpha = C64::new(0.9, -0.2);
        let b = qperiodic_truncation(phi, m_fold).unwrap();
        let eps: Vec<C64> =
            (0..m_fold).map(|l| C64::from_polar(1.0, 2.0 * PI * (l as f64) / 3.0)).collect();
        let finite = weighted_cs_superposition(&b, &eps, alpha).unwrap();
        // infinite form, truncated when φ^k/k! is negligible
        let mut weights = Vec::new();
        let mut betas = Vec::new();
        let mut w = c(1.0);
        for k in 0..60 {
            weights.push(w);
            betas.push(C64::from_polar(1.0, 2.0 * PI * ((k % m_fold) as f64) / 3.0));
            w *= C64::new(0.0, phi) / ((k + 1) as f64);
        }
        let infinite = weighted_cs_superposition(&weights, &betas, alpha).unwrap();
        for n in 0..=finite.nmax().min(infinite.nmax()) {
            assert!(
                (finite.coeffs[n] - infinite.coeffs[n]).norm() < 1e-12,
                "n = {n}: {} vs {}",
                finite.coeffs[n],
                infinite.coeffs[n]
            );
        }
        // and both equal the direct q-periodic phase state
        let direct = qperiodic_state(phi, m_fold, alpha).unwrap();
        for n in 0..=finite.nmax().min(direct.nmax()) {
            assert!((finite.coeffs[n] - direct.coeffs[n]).norm() < 1e-12);
        }
    }

    #[test]
    fn entangled_state_eigenvalues_and_schmidt_rank() {
        let (a1, a2) = (C64::new(0.7, 0.0), C64::new(0.0, -0.4));
        let psi = entangled_two_mode(a1, a2);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        for (mode, alpha) in [(1usize, a1), (2usize, a2)] {
            let applied = psi.parity_lower(mode).unwrap();
            let mut res = 0.0f64;
            let (n1, n2) = psi.nmax();
            for m in 0..n1 {
                for n in 0..n2 {
                    res = res.max((applied.coeffs[m][n] - alpha * psi.coeffs[m][n]).norm());
                }
            }
            assert!(res < 1e-12, "mode {mode} residual {res}");
        }
        let s = psi.schmidt_squares(3);
        assert!((s.iter().take(2).sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(s[1] > 1e-3, "generic state must have Schmidt rank 2, got {s:?}");
        assert!(s[2] < 1e-10, "rank must not exceed 2, got {s:?}");
        // α₂ = 0 factorizes: mode 2 stays in |0⟩, Schmidt rank 1
        let sep = entangled_two_mode(C64::new(0.5, 0.0), c(0.0));
        let ss = sep.schmidt_squares(2);
        assert!(ss[1] < 1e-10, "{ss:?}");
    }

    #[test]
    fn shifted_even_odd_matches_root_superposition() {
        // Synthesize root_superposition(M=2) with x → x - x₀ and compare
        // with the closed shifted-oscillator form, up to one global constant.
        let alpha = c(0.8);
        let x0 = 1.3;
        for (l, even) in [(0usize, true), (1usize, false)] {
            let s = root_superposition(alpha, 2, l).unwrap();
            let xr = 0.9;
            let ratio = s.wavefunction(xr - x0) / shifted_even_odd_wf(alpha, x0, even, xr);
            for &x in &[-0.8, 0.1, 1.0, 2.2, 3.4] {
                let lhs = s.wavefunction(x - x0);
                let rhs = ratio * shifted_even_odd_wf(alpha, x0, even, x);
                assert!((lhs - rhs).norm() < 1e-10, "x = {x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn parity_fock_vs_coordinate() {
        // (-1)^N in Fock space agrees with f(x) → f(-x) on truncated states.
        let state = parity_cs(C64::new(0.6, 0.4), 1.1);
        let flipped = state.parity();
        for &x in &[-1.4, -0.2, 0.5, 1.9] {
            let lhs = flipped.wavefunction(x);
            let rhs = state.wavefunction(-x);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
