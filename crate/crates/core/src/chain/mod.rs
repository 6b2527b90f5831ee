//! The q-closed dressing chain.
//!
//! A period-N closure couples N superpotentials f_j through
//!
//! ```text
//! (f_j + f_{j+1})' + f_j² - f_{j+1}² = μ_j,   j = 0..N-1,
//! f_N(x) = q f_0(qx),                         μ_{j+N} = q² μ_j,
//! ```
//!
//! in the fixed-point frame (affine shift l = 0). The factorization
//! constants are λ_0 = 0, λ_{j+1} = λ_j + μ_j; with ω = Σ μ_j and
//! ν = ω/(1-q²) the Hamiltonian H = -d²/dx² + f_0² - f_0' - ν carries the
//! geometric spectrum E_{kN+l} = E_l q^{2k}, E_l = λ_l - ν.
//!
//! Solutions are built as power series around the scaling fixed point x = 0
//! ([`solve_series`], [`solve_singular_n2_series`]) and extended outward by
//! delay-aware marching ([`march_delay`]). Closed-form special cases used as
//! oracles live in the `closed` submodule.

mod closed;
mod march;
mod series;

pub use closed::{
    piv_residual_from_chain_f0, solve_n2_qminus1, ClosedFormChain, ClosedFormName, N2QMinus1Grids,
};
pub use march::{march_delay, ChainGrids};
pub use series::{
    chain_residual_on_grid, solve_series, solve_singular_n2_series, zero_mode_series,
    SingularChainSeries, ZeroModeSeries,
};

use crate::qseries::QParam;
use crate::{Error, Result};

/// Parity/seed structure of the sought solution.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainParity {
    /// All f_j odd (f_j(0) = 0); the branch with a symmetric potential.
    Antisymmetric,
    /// Free constant terms f_j(0) = seeds[j].
    General { seeds: Vec<f64> },
}

/// Parameters of one period-N closure.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    pub n: usize,
    pub q: QParam,
    pub mu: Vec<f64>,
    pub parity: ChainParity,
}

impl ChainParams {
    pub fn new(n: usize, q: QParam, mu: Vec<f64>, parity: ChainParity) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("chain needs N >= 1".into()));
        }
        if mu.len() != n {
            return Err(Error::InvalidInput(format!(
                "need exactly N = {n} chain constants, got {}",
                mu.len()
            )));
        }
        if let ChainParity::General { seeds } = &parity {
            if seeds.len() != n {
                return Err(Error::InvalidInput(format!(
                    "general parity needs N = {n} seeds, got {}",
                    seeds.len()
                )));
            }
        }
        Ok(ChainParams { n, q, mu, parity })
    }

    /// ω = Σ μ_j over one period.
    pub fn omega(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// ν = ω/(1-q²); only defined away from |q| = 1.
    pub fn nu(&self) -> Option<f64> {
        let q2 = self.q.value() * self.q.value();
        if (1.0 - q2).abs() < 1e-14 {
            None
        } else {
            Some(self.omega() / (1.0 - q2))
        }
    }

    /// Factorization constants λ_0 = 0, λ_{j+1} = λ_j + μ_j.
    pub fn lambdas(&self) -> Vec<f64> {
        let mut l = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        for j in 0..self.n {
            l.push(acc);
            acc += self.mu[j];
        }
        l
    }

    /// First-period energies E_l = λ_l - ν of the shifted Hamiltonian.
    pub fn energies(&self) -> Option<Vec<f64>> {
        let nu = self.nu()?;
        Some(self.lambdas().into_iter().map(|l| l - nu).collect())
    }
}

/// Power-series solution of one closure: per-j coefficient rows for
/// f_j(x) = Σ_i b_i^{(j)} x^i.
#[derive(Debug, Clone)]
pub struct ChainSolution {
    pub params: ChainParams,
    /// series[j][i] is the x^i coefficient of f_j.
    pub series: Vec<Vec<f64>>,
    /// Convergence radius estimate from the coefficient ratio test.
    pub radius_est: f64,
}

impl ChainSolution {
    /// Evaluate f_j(x) by Horner's rule. Only trustworthy inside the
    /// convergence radius; marching extends beyond it.
    pub fn eval_f(&self, j: usize, x: f64) -> f64 {
        horner(&self.series[j], x)
    }

    /// Evaluate f_j'(x) from the differentiated series.
    pub fn eval_fprime(&self, j: usize, x: f64) -> f64 {
        let c = &self.series[j];
        let mut acc = 0.0;
        for i in (1..c.len()).rev() {
            acc = acc * x + c[i] * i as f64;
        }
        acc
    }

    /// Potential u = f_0² - f_0' - ν of the shifted Hamiltonian, from the
    /// series (valid inside the radius).
    pub fn eval_potential(&self, x: f64) -> Result<f64> {
        let nu = self
            .params
            .nu()
            .ok_or_else(|| Error::InvalidInput("potential in H-convention needs |q| != 1".into()))?;
        let f = self.eval_f(0, x);
        Ok(f * f - self.eval_fprime(0, x) - nu)
    }

    /// The chain with constant superpotentials f_j = β_j (zero potential);
    /// closure forces μ_j = β_j² - β_{j+1}² with β_N = qβ_0.
    pub fn constant(betas: &[f64], q: QParam) -> Result<ChainSolution> {
        let n = betas.len();
        if n == 0 {
            return Err(Error::InvalidInput("need at least one β".into()));
        }
        let mut mu = Vec::with_capacity(n);
        for j in 0..n {
            let next = if j + 1 < n { betas[j + 1] } else { q.value() * betas[0] };
            mu.push(betas[j] * betas[j] - next * next);
        }
        let params = ChainParams::new(n, q, mu, ChainParity::General { seeds: betas.to_vec() })?;
        let series = betas.iter().map(|&b| vec![b]).collect();
        Ok(ChainSolution { params, series, radius_est: f64::INFINITY })
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_ladder() {
        let q = QParam::sub_unit(0.5).unwrap();
        let p = ChainParams::new(3, q, vec![1.0, 0.5, -0.2], ChainParity::Antisymmetric).unwrap();
        let l = p.lambdas();
        assert_eq!(l, vec![0.0, 1.0, 1.5]);
        assert!((p.omega() - 1.3).abs() < 1e-15);
        // E_N = q² E_0 consistency
        let e = p.energies().unwrap();
        let e_n = e[0] + p.omega(); // λ_N - ν
        assert!((e_n - 0.25 * e[0]).abs() < 1e-13);
    }

    #[test]
    fn constant_chain_is_zero_potential() {
        let q = QParam::sub_unit(0.5).unwrap();
        let sol = ChainSolution::constant(&[1.0, 0.7], q).unwrap();
        // ν = ω/(1-q²) must equal β_0², making u = β_0² - ν = 0
        let nu = sol.params.nu().unwrap();
        assert!((nu - 1.0).abs() < 1e-14);
        assert!(sol.eval_potential(1.3).unwrap().abs() < 1e-14);
        // E_k = -β_k²
        let e = sol.params.energies().unwrap();
        assert!((e[0] + 1.0).abs() < 1e-14);
        assert!((e[1] + 0.49).abs() < 1e-14);
    }
}
