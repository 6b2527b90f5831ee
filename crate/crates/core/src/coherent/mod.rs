//! q-coherent states of the self-similar potentials, assembled in Fock
//! space over the discrete tower |n⟩ (or the two-sided tower |λq^{-2n}⟩ for
//! positive energies).
//!
//! Kinds and their normalizability windows:
//!
//! - annihilation eigenstates (0 < q < 1):
//!   c_n ∝ α^n/√(ω^n [n]!), |C|^{-2} = e_{q²}(|α|²/ν), window |α|² < ν;
//! - annihilation eigenstates at q² > 1: |C|^{-2} = E_{q^{-2}}(z), entire —
//!   every α is admissible;
//! - period-N towers: c_{kN+l} ∝ α^{kN+l}/√(ΠΠ(E_l q^{2m} - E_s)),
//!   |C_l|^{-2} = |α|^{2l} · NφN-1(0,…,0; E_lq²/E_s (s≠l); q², |α|^{2N}/ν),
//!   window |α|^{2N} < ν = (-1)^N E_0···E_{N-1};
//! - two-sided (adjoint-lowering) states on the positive-energy tower,
//!   normalizable in the complementary window |α|^{2N} > ν, with
//!   |C|^{-2} = 0ψN(E/λ; q², (-1)^N|α|^{2N}/λ^N).

mod coordinate;

pub use coordinate::{
    coordinate_cs, exam_ode_residual, exam_tower_state, rational_chain_eigen_setup, n1_eigen_setup,
    CoordinateCsReport, ExamKind, ExamResidualReport, N1Setup,
};

use num_complex::Complex64;

use crate::canonical::{root_superposition, FockVector};
use crate::qseries::{self, QParam};
use crate::{Error, Result};

type C64 = Complex64;

/// Which eigenvalue problem the state solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QCoherentKind {
    /// A|α⟩ = α|α⟩ on the bound-state tower, 0 < q < 1.
    Annihilation,
    /// Same definition in the q² > 1 regime (always normalizable).
    AnnihilationQGt1,
    /// B⁻|α⟩ = α^N|α⟩ on the l-th bound tower of a period-N closure.
    GeneralN,
    /// Adjoint-lowering eigenstate on the two-sided positive-energy tower
    /// at reference eigenvalue λ.
    LoweringAdjointDiscreteLambda,
}

/// Coefficients over a one- or two-sided tower.
#[derive(Debug, Clone)]
pub struct QCoherentState {
    pub alpha: C64,
    pub kind: QCoherentKind,
    /// Tower coefficients; entry i corresponds to tower index i - zero_index.
    pub coeffs: Vec<C64>,
    pub zero_index: usize,
    pub q: f64,
    /// Condensate scale ν (= ω/(1-q²) for N = 1, (-1)^N ΠE_l in general).
    pub nu: f64,
    /// First-period energies E_0..E_{N-1} (E_0 = -ν for N = 1).
    pub energies: Vec<f64>,
    /// Reference eigenvalue of the two-sided tower, if applicable.
    pub lambda: Option<f64>,
    pub n_period: usize,
    pub in_domain: bool,
}

impl QCoherentState {
    pub fn coefficient(&self, n: i64) -> C64 {
        let idx = n + self.zero_index as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn index_range(&self) -> (i64, i64) {
        (
            -(self.zero_index as i64),
            self.coeffs.len() as i64 - 1 - self.zero_index as i64,
        )
    }

    /// Overlap ⟨self|other⟩ over matching tower indices.
    pub fn dot(&self, other: &QCoherentState) -> C64 {
        let (lo1, hi1) = self.index_range();
        let (lo2, hi2) = other.index_range();
        let mut s = C64::new(0.0, 0.0);
        for n in lo1.max(lo2)..=hi1.min(hi2) {
            s += self.coefficient(n).conj() * other.coefficient(n);
        }
        s
    }

    /// View as a FockVector (one-sided towers only).
    pub fn to_fock(&self) -> Result<FockVector> {
        if self.zero_index != 0 {
            return Err(Error::InvalidInput("two-sided tower is not a Fock vector".into()));
        }
        FockVector::new(self.coeffs.clone())
    }
}

/// Annihilation-eigenstate coefficients |α, q⟩ = C Σ α^n/√(ω^n [n]!) |n⟩.
///
/// Out-of-window states (|α|² ≥ ν) are returned unnormalized (C = 1) with
/// `in_domain = false`.
pub fn qcoherent_fock(alpha: C64, q: f64, omega: f64, nmax: Option<usize>) -> Result<QCoherentState> {
    let qp = QParam::sub_unit(q)?;
    if q <= 0.0 {
        return Err(Error::InvalidInput("annihilation states here use 0 < q < 1".into()));
    }
    if omega <= 0.0 {
        return Err(Error::InvalidInput("ω must be positive".into()));
    }
    let q2 = q * q;
    let nu = omega / (1.0 - q2);
    let z = alpha.norm_sqr() / nu;
    let in_domain = z < 1.0;
    let nmax = nmax.unwrap_or_else(|| {
        if in_domain {
            // geometric tail |c_{n+1}/c_n| → √z
            ((1e-18f64.ln() / z.sqrt().ln().min(-1e-3)).ceil() as usize).clamp(32, 4000)
        } else {
            64
        }
    });
    let c0 = if in_domain {
        let e = qseries::q_exp_small(C64::new(z, 0.0), q2)?;
        C64::new(1.0 / e.value.re.sqrt(), 0.0)
    } else {
        C64::new(1.0, 0.0)
    };
    let mut coeffs = Vec::with_capacity(nmax + 1);
    let mut c = c0;
    for n in 0..=nmax {
        coeffs.push(c);
        let bracket = qseries::qbracket(n as u32 + 1, &qp);
        c *= alpha / (omega * bracket).sqrt();
    }
    Ok(QCoherentState {
        alpha,
        kind: QCoherentKind::Annihilation,
        coeffs,
        zero_index: 0,
        q,
        nu,
        energies: vec![-nu],
        lambda: None,
        n_period: 1,
        in_domain,
    })
}

/// Annihilation eigenstates in the q² > 1 regime: normalizable for every α,
/// |C|^{-2} = E_{q^{-2}}(|α|²(1 - q^{-2})/ω).
pub fn qcoherent_fock_qgt1(
    alpha: C64,
    q: f64,
    omega: f64,
    nmax: Option<usize>,
) -> Result<QCoherentState> {
    if !(q > 1.0) {
        return Err(Error::InvalidInput(format!("this regime needs q > 1, got {q}")));
    }
    if omega <= 0.0 {
        return Err(Error::InvalidInput("ω must be positive".into()));
    }
    let q2 = q * q;
    let p = 1.0 / q2; // q^{-2} < 1
    let z = alpha.norm_sqr() * (1.0 - p) / omega;
    let e = qseries::q_exp_big(C64::new(z, 0.0), p)?;
    let c0 = C64::new(1.0 / e.value.re.sqrt(), 0.0);
    // [n] grows like q^{2n}, so coefficients decay superfast
    let nmax = nmax.unwrap_or(96);
    let mut coeffs = Vec::with_capacity(nmax + 1);
    let mut c = c0;
    for n in 0..=nmax {
        coeffs.push(c);
        let bracket = (q2.powi(n as i32 + 1) - 1.0) / (q2 - 1.0);
        c *= alpha / (omega * bracket).sqrt();
    }
    Ok(QCoherentState {
        alpha,
        kind: QCoherentKind::AnnihilationQGt1,
        coeffs,
        zero_index: 0,
        q,
        nu: omega / (1.0 - q2), // negative in this regime; kept for reference
        energies: vec![],
        lambda: None,
        n_period: 1,
        in_domain: true,
    })
}

fn validate_energies(e_list: &[f64], q: f64) -> Result<f64> {
    let n = e_list.len();
    if n == 0 {
        return Err(Error::InvalidInput("need at least one energy".into()));
    }
    for w in e_list.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidInput(format!(
                "energies must be strictly ascending, got {e_list:?}"
            )));
        }
    }
    if *e_list.last().unwrap() >= 0.0 {
        return Err(Error::InvalidInput("all E_l must be negative".into()));
    }
    if q * q * e_list[0] <= e_list[n - 1] {
        return Err(Error::InvalidInput(format!(
            "ordering E_{{N-1}} < q²E_0 violated (q²E_0 = {}, E_{{N-1}} = {})",
            q * q * e_list[0],
            e_list[n - 1]
        )));
    }
    let nu = e_list.iter().fold(1.0, |acc, e| acc * -e);
    Ok(nu)
}

/// Period-N tower coherent state on the l-th series, B⁻|α⟩ = α^N|α⟩:
/// coefficients over the FOCK index kN+l (other indices vanish).
pub fn general_n_fock(
    alpha: C64,
    e_list: &[f64],
    q: f64,
    l: usize,
    kmax: usize,
) -> Result<QCoherentState> {
    let qp = QParam::sub_unit(q)?;
    if q <= 0.0 {
        return Err(Error::InvalidInput("period-N towers use 0 < q < 1".into()));
    }
    let n = e_list.len();
    if l >= n {
        return Err(Error::InvalidInput(format!("need l < N = {n}, got {l}")));
    }
    let nu = validate_energies(e_list, q)?;
    let in_domain = alpha.norm().powi(2 * n as i32) < nu;
    let el = e_list[l];
    // raw coefficients r_k = α^{kN+l}/√(D_k), D_k = Π_{m≤k} Π_s (E_l q^{2m} - E_s)
    let mut raw = Vec::with_capacity(kmax + 1);
    let mut amp = alpha.powu(l as u32);
    raw.push(amp);
    let mut q2m = 1.0;
    for _ in 1..=kmax {
        q2m *= q * q;
        let mut step = 1.0;
        for &es in e_list {
            let factor = el * q2m - es;
            if factor <= 0.0 {
                return Err(Error::InvalidInput(
                    "non-positive ladder factor; energies violate the closure ordering".into(),
                ));
            }
            step *= factor;
        }
        amp = amp * alpha.powu(n as u32) / step.sqrt();
        raw.push(amp);
    }
    let norm2: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
    let scale = if in_domain { C64::new(1.0 / norm2.sqrt(), 0.0) } else { C64::new(1.0, 0.0) };
    // scatter onto Fock indices kN+l
    let mut coeffs = vec![C64::new(0.0, 0.0); kmax * n + l + 1];
    for (k, r) in raw.into_iter().enumerate() {
        coeffs[k * n + l] = scale * r;
    }
    let _ = qp;
    Ok(QCoherentState {
        alpha,
        kind: QCoherentKind::GeneralN,
        coeffs,
        zero_index: 0,
        q,
        nu,
        energies: e_list.to_vec(),
        lambda: None,
        n_period: n,
        in_domain,
    })
}

/// |C_l|^{-2} of the period-N tower via the basic hypergeometric form
/// |α|^{2l} · NφN-1(0,…,0; {E_l q²/E_s}_{s≠l}; q², |α|^{2N}/ν).
pub fn general_n_norm_phi(alpha: C64, e_list: &[f64], q: f64, l: usize) -> Result<C64> {
    let n = e_list.len();
    if l >= n {
        return Err(Error::InvalidInput(format!("need l < N = {n}, got {l}")));
    }
    let nu = validate_energies(e_list, q)?;
    let qp2 = QParam::sub_unit(q * q)?;
    let zeros = vec![C64::new(0.0, 0.0); n];
    let b: Vec<C64> = (0..n)
        .filter(|s| *s != l)
        .map(|s| C64::new(e_list[l] * q * q / e_list[s], 0.0))
        .collect();
    let z = C64::new(alpha.norm().powi(2 * n as i32) / nu, 0.0);
    let phi = qseries::basic_phi(&zeros, &b, &qp2, z)?;
    if !phi.in_domain {
        return Err(Error::Domain("normalization series outside its window".into()));
    }
    Ok(alpha.norm().powi(2 * l as i32) * phi.value)
}

/// Two-sided adjoint-lowering eigenstate on the positive-energy tower
/// |n⟩ = |λ q^{-2n}⟩, n ∈ [-n_range, n_range]:
/// c_{n+1} Π_s √(λq^{-2n} - E_s) = α^N c_n.
///
/// Normalizable exactly when |α|^{2N} > ν; the state is normalized in
/// domain, and c_0 = C (so out-of-window states carry raw coefficients).
pub fn bilateral_fock(
    alpha: C64,
    lambda: f64,
    e_list: &[f64],
    q: f64,
    n_range: usize,
) -> Result<QCoherentState> {
    let _ = QParam::sub_unit(q)?;
    if q <= 0.0 {
        return Err(Error::InvalidInput("two-sided towers use 0 < q < 1".into()));
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidInput("λ must be positive".into()));
    }
    let nu = validate_energies(e_list, q)?;
    let n = e_list.len();
    let in_domain = alpha.norm().powi(2 * n as i32) > nu;
    let an = alpha.powu(n as u32);
    if an.norm() == 0.0 {
        return Err(Error::InvalidInput("α must be nonzero for two-sided towers".into()));
    }
    let size = 2 * n_range + 1;
    let mut coeffs = vec![C64::new(0.0, 0.0); size];
    let zero_index = n_range;
    coeffs[zero_index] = C64::new(1.0, 0.0);
    // upward
    for m in 0..n_range {
        let mut prod = 1.0;
        for &es in e_list {
            prod *= lambda * q.powi(-2 * m as i32) - es;
        }
        coeffs[zero_index + m + 1] = coeffs[zero_index + m] * an / prod.sqrt();
    }
    // downward: c_{-m-1} = c_{-m} Π√(λq^{2(m+1)} - E_s)/α^N
    for m in 0..n_range {
        let idx = zero_index - m;
        let mut prod = 1.0;
        for &es in e_list {
            prod *= lambda * q.powi(2 * (m as i32 + 1)) - es;
        }
        coeffs[idx - 1] = coeffs[idx] * prod.sqrt() / an;
    }
    if in_domain {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut coeffs {
            *c /= norm;
        }
    }
    Ok(QCoherentState {
        alpha,
        kind: QCoherentKind::LoweringAdjointDiscreteLambda,
        coeffs,
        zero_index,
        q,
        nu,
        energies: e_list.to_vec(),
        lambda: Some(lambda),
        n_period: n,
        in_domain,
    })
}

/// |C|^{-2} of the two-sided state via 0ψN(E_l/λ; q², (-1)^N |α|^{2N}/λ^N).
pub fn bilateral_norm_psi(alpha: C64, lambda: f64, e_list: &[f64], q: f64) -> Result<C64> {
    let n = e_list.len() as i32;
    validate_energies(e_list, q)?;
    let qp2 = QParam::sub_unit(q * q)?;
    let b: Vec<C64> = e_list.iter().map(|e| C64::new(e / lambda, 0.0)).collect();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let z = C64::new(sign * alpha.norm().powi(2 * n) / lambda.powi(n), 0.0);
    let psi = qseries::bilateral_psi(&[], &b, &qp2, z)?;
    if !psi.in_domain {
        return Err(Error::Domain(
            "bilateral normalization series diverges (|α|^{2N} ≤ ν)".into(),
        ));
    }
    Ok(psi.value)
}

/// N = 1 closed form of the same normalization by the Ramanujan 1ψ1 sum:
/// (q²;q²)∞ (-λq²/|α|²;q²)∞ (-|α|²/λ;q²)∞ / [(-ν/λ;q²)∞ (ν/|α|²;q²)∞].
pub fn bilateral_norm_ramanujan(alpha: C64, lambda: f64, nu: f64, q: f64) -> Result<C64> {
    use crate::qseries::{qpochhammer, PochhammerOrder};
    let qp2 = QParam::sub_unit(q * q)?;
    let a2 = alpha.norm_sqr();
    let inf =
        |v: f64| Ok::<_, Error>(qpochhammer(C64::new(v, 0.0), &qp2, PochhammerOrder::Infinite)?.value);
    let num = inf(q * q)? * inf(-lambda * q * q / a2)? * inf(-a2 / lambda)?;
    let den = inf(-nu / lambda)? * inf(nu / a2)?;
    Ok(num / den)
}

/// Convergence report of the q → 1 harmonic degeneration.
#[derive(Debug, Clone)]
pub struct HarmonicLimitReport {
    /// (ε, max-abs coefficient distance over the compared indices).
    pub distances: Vec<(f64, f64)>,
}

impl HarmonicLimitReport {
    pub fn final_distance(&self) -> f64 {
        self.distances.last().map(|p| p.1).unwrap_or(f64::NAN)
    }

    /// Distances must shrink essentially linearly in ε.
    pub fn monotone(&self) -> bool {
        self.distances.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Follow the path q = 1-ε, E_l = E_0 + lω/N (E_0 = -ω/(1-q²)) and compare
/// the period-N tower coefficients with the root-of-unity superposition of
/// the oscillator at α_eff = α√(N/ω); compares the first `indices` Fock
/// amplitudes in absolute value.
pub fn harmonic_limit_check(
    alpha: C64,
    n_fold: usize,
    l: usize,
    omega: f64,
    steps: usize,
) -> Result<HarmonicLimitReport> {
    if steps < 2 {
        return Err(Error::InvalidInput("need at least two path steps".into()));
    }
    let alpha_eff = alpha * (n_fold as f64 / omega).sqrt();
    let target = root_superposition(alpha_eff, n_fold, l)?;
    let indices = 30usize;
    let mut distances = Vec::with_capacity(steps);
    for i in 0..steps {
        // ε from 1e-1 down to 1e-7, geometric
        let eps = 10f64.powf(-1.0 - 6.0 * (i as f64) / (steps as f64 - 1.0));
        let q = 1.0 - eps;
        let nu: f64 = omega / (1.0 - q * q);
        let e_list: Vec<f64> =
            (0..n_fold).map(|s| -nu + s as f64 * omega / n_fold as f64).collect();
        let kmax = (indices / n_fold) + 8;
        let state = general_n_fock(alpha, &e_list, q, l, kmax)?;
        if !state.in_domain {
            return Err(Error::Domain("limit path left the normalizability window".into()));
        }
        let mut dist = 0.0f64;
        for nn in 0..indices {
            let a = state.coefficient(nn as i64);
            let b = if nn <= target.nmax() { target.coeffs[nn] } else { C64::new(0.0, 0.0) };
            dist = dist.max((a - b).norm());
        }
        distances.push((eps, dist));
    }
    Ok(HarmonicLimitReport { distances })
}
