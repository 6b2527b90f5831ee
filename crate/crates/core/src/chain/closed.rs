//! Closed-form chains used as oracles, and the N = 2, q = -1 reduction.

use super::{ChainParams, ChainParity};
use crate::grid::{Grid, RealGridFn};
use crate::qseries::QParam;
use crate::{Error, Result};

/// Catalog of exactly solvable chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormName {
    /// N = 1, q = 1: f = ωx/2, u = ω²x²/4 - ω/2, spectrum λ_n = nω.
    Harmonic { omega: f64 },
    /// N = 2, q = 1 conformal model: f_{0,1} = ±γ/x + βx on the half-line,
    /// γ = (μ_0-μ_1)/(2(μ_0+μ_1)), β = (μ_0+μ_1)/4.
    SingularOscillator { mu0: f64, mu1: f64 },
    /// N = 3, q = 1 rational chain with μ = (4, 1, -2):
    /// f_0 = x/2 + 2x/(x²+1), f_1 = x/2 - 1/x, f_2 = x/2 + 1/x - 2x/(x²+1).
    PivRationalA,
    /// N = 3, q = 1 chain for the same Hamiltonian with μ = (3, -2, 0):
    /// f_0 = x/2 + 2x/(x²+1), f_1 = x/2, f_2 = -f_0.
    PivRationalB,
}

/// An exactly known chain: superpotentials, constants, and potential.
#[derive(Debug, Clone)]
pub struct ClosedFormChain {
    pub name: ClosedFormName,
    pub n: usize,
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub omega: f64,
}

impl ClosedFormChain {
    pub fn new(name: ClosedFormName) -> Self {
        match name {
            ClosedFormName::Harmonic { omega } => ClosedFormChain {
                name,
                n: 1,
                mu: vec![omega],
                lambda: vec![0.0],
                omega,
            },
            ClosedFormName::SingularOscillator { mu0, mu1 } => ClosedFormChain {
                name,
                n: 2,
                mu: vec![mu0, mu1],
                lambda: vec![0.0, mu0],
                omega: mu0 + mu1,
            },
            ClosedFormName::PivRationalA => ClosedFormChain {
                name,
                n: 3,
                mu: vec![4.0, 1.0, -2.0],
                lambda: vec![0.0, 4.0, 5.0],
                omega: 3.0,
            },
            ClosedFormName::PivRationalB => ClosedFormChain {
                name,
                n: 3,
                mu: vec![3.0, -2.0, 0.0],
                lambda: vec![0.0, 3.0, 1.0],
                omega: 1.0,
            },
        }
    }

    /// Superpotential f_j(x). Singular at x = 0 for the singular oscillator
    /// and for f_1 of the A-chain / the B-chain's f_0 image; callers exclude
    /// such points from grids.
    pub fn f(&self, j: usize, x: f64) -> f64 {
        match self.name {
            ClosedFormName::Harmonic { omega } => omega * x / 2.0,
            ClosedFormName::SingularOscillator { mu0, mu1 } => {
                let gamma = (mu0 - mu1) / (2.0 * (mu0 + mu1));
                let beta = (mu0 + mu1) / 4.0;
                match j {
                    0 => gamma / x + beta * x,
                    _ => -gamma / x + beta * x,
                }
            }
            ClosedFormName::PivRationalA => match j {
                0 => x / 2.0 + 2.0 * x / (x * x + 1.0),
                1 => x / 2.0 - 1.0 / x,
                _ => x / 2.0 + 1.0 / x - 2.0 * x / (x * x + 1.0),
            },
            ClosedFormName::PivRationalB => match j {
                0 => x / 2.0 + 2.0 * x / (x * x + 1.0),
                1 => x / 2.0,
                _ => -(x / 2.0 + 2.0 * x / (x * x + 1.0)),
            },
        }
    }

    /// f_j'(x), closed form.
    pub fn fprime(&self, j: usize, x: f64) -> f64 {
        match self.name {
            ClosedFormName::Harmonic { omega } => omega / 2.0,
            ClosedFormName::SingularOscillator { mu0, mu1 } => {
                let gamma = (mu0 - mu1) / (2.0 * (mu0 + mu1));
                let beta = (mu0 + mu1) / 4.0;
                match j {
                    0 => -gamma / (x * x) + beta,
                    _ => gamma / (x * x) + beta,
                }
            }
            ClosedFormName::PivRationalA => {
                let d = x * x + 1.0;
                match j {
                    0 => 0.5 + 2.0 * (1.0 - x * x) / (d * d),
                    1 => 0.5 + 1.0 / (x * x),
                    _ => 0.5 - 1.0 / (x * x) - 2.0 * (1.0 - x * x) / (d * d),
                }
            }
            ClosedFormName::PivRationalB => {
                let d = x * x + 1.0;
                match j {
                    0 => 0.5 + 2.0 * (1.0 - x * x) / (d * d),
                    1 => 0.5,
                    _ => -(0.5 + 2.0 * (1.0 - x * x) / (d * d)),
                }
            }
        }
    }

    /// Potential of L_0 = -d²/dx² + u_0, u_0 = f_0² - f_0' + λ_0.
    pub fn potential(&self, x: f64) -> f64 {
        let f = self.f(0, x);
        f * f - self.fprime(0, x) + self.lambda[0]
    }

    /// Sample all superpotentials on a grid.
    pub fn sample_fs(&self, grid: Grid) -> Result<Vec<RealGridFn>> {
        (0..self.n)
            .map(|j| Ok(RealGridFn::sample(grid, |x| self.f(j, x))))
            .collect()
    }

    /// Sample the potential on a grid.
    pub fn sample_potential(&self, grid: Grid) -> RealGridFn {
        RealGridFn::sample(grid, |x| self.potential(x))
    }

    /// The matching ChainParams (q = 1 closure).
    pub fn params(&self) -> Result<ChainParams> {
        ChainParams::new(
            self.n,
            QParam::unit(1.0)?,
            self.mu.clone(),
            ChainParity::General { seeds: vec![0.0; self.n] },
        )
    }
}

/// Residual of the Painlevé-IV equation
///
/// ```text
/// f'' = f'²/(2f) + (3/2)f³ + 2ωx f² + (ω²x²/2 + μ_2 - μ_0) f - μ_1²/(2f)
/// ```
///
/// for the reduced function f(x) = f_0(x) - ωx/2 of an N = 3, q = 1 chain,
/// given closed forms for (f, f', f'').
pub fn piv_residual_from_chain_f0(
    f: f64,
    fp: f64,
    fpp: f64,
    x: f64,
    omega: f64,
    mu: &[f64; 3],
) -> f64 {
    let rhs = fp * fp / (2.0 * f)
        + 1.5 * f * f * f
        + 2.0 * omega * x * f * f
        + (omega * omega * x * x / 2.0 + mu[2] - mu[0]) * f
        - mu[1] * mu[1] / (2.0 * f);
    fpp - rhs
}

/// Marched N = 2, q = -1 reduction.
///
/// The chain reduces to two ODEs for the symmetric parts,
/// f_s' = 2 g_s g_a, g_s' = -2 f_s f_a, with the antisymmetric parts
/// reconstructed algebraically:
///
/// ```text
/// f_a = (g_s² - f_s² + σ²x² + τ)/(2σx),  g_a = (f_s² - g_s² + σ²x² - τ)/(2σx),
/// σ = (μ_0+μ_1)/2,  τ = (μ_0-μ_1)/2.
/// ```
#[derive(Debug, Clone)]
pub struct N2QMinus1Grids {
    pub grid: Grid,
    pub f_s: Vec<f64>,
    pub g_s: Vec<f64>,
    pub f_a: Vec<f64>,
    pub g_a: Vec<f64>,
    pub sigma: f64,
    pub tau: f64,
    pub mu0: f64,
    pub mu1: f64,
}

impl N2QMinus1Grids {
    /// f_0 = f_s + f_a and f_1 = g_s + g_a.
    pub fn f0(&self, i: usize) -> f64 {
        self.f_s[i] + self.f_a[i]
    }
    pub fn f1(&self, i: usize) -> f64 {
        self.g_s[i] + self.g_a[i]
    }

    /// Max drift of the conserved combination f_s² + f_a² - g_s² - g_a² - τ.
    pub fn conservation_drift(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.grid.n {
            let v = self.f_s[i].powi(2) + self.f_a[i].powi(2)
                - self.g_s[i].powi(2)
                - self.g_a[i].powi(2)
                - self.tau;
            worst = worst.max(v.abs());
        }
        worst
    }

    /// Max deviation of f_a + g_a - σx.
    pub fn linear_integral_drift(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.grid.n {
            let x = self.grid.x(i);
            worst = worst.max((self.f_a[i] + self.g_a[i] - self.sigma * x).abs());
        }
        worst
    }

    /// Max residual of the original chain pair
    /// (f_0+f_1)' + f_0² - f_1² = μ_0 and (f_1(x) - f_0(-x))' + f_1² - f_0²(-x) = μ_1,
    /// using centered differences of the sampled values (independent check).
    pub fn chain_residual(&self) -> Result<f64> {
        let g = self.grid;
        let f0: Vec<f64> = (0..g.n).map(|i| self.f0(i)).collect();
        let f1: Vec<f64> = (0..g.n).map(|i| self.f1(i)).collect();
        // f_0(-x) = f_s - f_a
        let f0m: Vec<f64> = (0..g.n).map(|i| self.f_s[i] - self.f_a[i]).collect();
        let s1 = RealGridFn::new(g, f0.iter().zip(&f1).map(|(a, b)| a + b).collect())?;
        let s2 = RealGridFn::new(g, f1.iter().zip(&f0m).map(|(a, b)| a - b).collect())?;
        let d1 = s1.derivative()?;
        let d2 = s2.derivative()?;
        let mut worst = 0.0f64;
        for i in 0..d1.grid.n {
            let gi = i + 2;
            let r1 = d1.values[i] + f0[gi] * f0[gi] - f1[gi] * f1[gi] - self.mu0;
            let r2 = d2.values[i] + f1[gi] * f1[gi] - f0m[gi] * f0m[gi] - self.mu1;
            worst = worst.max(r1.abs()).max(r2.abs());
        }
        Ok(worst)
    }
}

fn reconstruct_a_parts(fs: f64, gs: f64, sigma: f64, tau: f64, x: f64) -> (f64, f64) {
    let fa = (gs * gs - fs * fs + sigma * sigma * x * x + tau) / (2.0 * sigma * x);
    let ga = (fs * fs - gs * gs + sigma * sigma * x * x - tau) / (2.0 * sigma * x);
    (fa, ga)
}

/// Integrate the reduced N = 2, q = -1 system.
///
/// With `start_x = 0` seeds are values at the origin on the nonsingular
/// branch (requires f_s(0)² = g_s(0)² + τ); the first step uses the series
/// start f_a ≈ F₁x with F₁ = σ/2 - f_s(0)g_s(0), g_a ≈ (σ - F₁)x. A positive
/// `start_x` seeds the integration there directly (singular branches).
pub fn solve_n2_qminus1(
    mu0: f64,
    mu1: f64,
    fs0: f64,
    gs0: f64,
    start_x: f64,
    x_max: f64,
    step: f64,
) -> Result<N2QMinus1Grids> {
    let sigma = 0.5 * (mu0 + mu1);
    let tau = 0.5 * (mu0 - mu1);
    if sigma == 0.0 {
        return Err(Error::InvalidInput("σ = (μ_0+μ_1)/2 must be nonzero".into()));
    }
    if !(x_max > start_x && step > 0.0) {
        return Err(Error::InvalidInput("need x_max > start_x and positive step".into()));
    }
    let mut x0 = start_x;
    let (mut fs, mut gs);
    if start_x == 0.0 {
        if (fs0 * fs0 - gs0 * gs0 - tau).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "nonsingular branch needs f_s(0)² = g_s(0)² + τ (violation {:.2e})",
                fs0 * fs0 - gs0 * gs0 - tau
            )));
        }
        // series start: f_s = F0 + F2 x², g_s = G0 + G2 x², f_a = F1 x, g_a = G1 x
        let f1c = sigma / 2.0 - fs0 * gs0;
        let g1c = sigma - f1c;
        let f2c = gs0 * g1c;
        let g2c = -fs0 * f1c;
        x0 = step.min(1e-3);
        fs = fs0 + f2c * x0 * x0;
        gs = gs0 + g2c * x0 * x0;
    } else {
        fs = fs0;
        gs = gs0;
    }

    let n_out = ((x_max - x0) / step + 1e-9).floor() as usize + 1;
    let grid = Grid::new(x0, step, n_out.max(3))?;
    let mut out = N2QMinus1Grids {
        grid,
        f_s: Vec::with_capacity(grid.n),
        g_s: Vec::with_capacity(grid.n),
        f_a: Vec::with_capacity(grid.n),
        g_a: Vec::with_capacity(grid.n),
        sigma,
        tau,
        mu0,
        mu1,
    };
    let rhs = |x: f64, fs: f64, gs: f64| -> (f64, f64) {
        let (fa, ga) = reconstruct_a_parts(fs, gs, sigma, tau, x);
        (2.0 * gs * ga, -2.0 * fs * fa)
    };
    let mut x = x0;
    for i in 0..grid.n {
        let (fa, ga) = reconstruct_a_parts(fs, gs, sigma, tau, x);
        out.f_s.push(fs);
        out.g_s.push(gs);
        out.f_a.push(fa);
        out.g_a.push(ga);
        if i + 1 == grid.n {
            break;
        }
        // RK4 step to the next grid point
        let h = step;
        let (k1f, k1g) = rhs(x, fs, gs);
        let (k2f, k2g) = rhs(x + h / 2.0, fs + h / 2.0 * k1f, gs + h / 2.0 * k1g);
        let (k3f, k3g) = rhs(x + h / 2.0, fs + h / 2.0 * k2f, gs + h / 2.0 * k2g);
        let (k4f, k4g) = rhs(x + h, fs + h * k3f, gs + h * k3g);
        fs += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        gs += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        x += h;
        if !fs.is_finite() || !gs.is_finite() || fs.abs() > 1e8 || gs.abs() > 1e8 {
            return Err(Error::Divergence(format!("N=2 q=-1 system blew up near x = {x}")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::chain_residual_on_grid;

    #[test]
    fn harmonic_chain() {
        let c = ClosedFormChain::new(ClosedFormName::Harmonic { omega: 2.0 });
        // u = x² - 1 for ω = 2
        for &x in &[0.0, 0.5, 1.7] {
            assert!((c.potential(x) - (x * x - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn rational_chain_a_values() {
        let c = ClosedFormChain::new(ClosedFormName::PivRationalA);
        // f_0(1) = 1/2 + 2/2 = 1.5
        assert!((c.f(0, 1.0) - 1.5).abs() < 1e-15);
        // potential at 0: 4 - 8 + 0 + 3/2 = -2.5
        assert!((c.potential(0.0) + 2.5).abs() < 1e-15);
        // L = -d²/dx² + 4/(x²+1) - 8/(x²+1)² + x²/4 + 3/2
        for &x in &[0.3, 1.1, 2.6, -1.8] {
            let d = x * x + 1.0;
            let expect = 4.0 / d - 8.0 / (d * d) + x * x / 4.0 + 1.5;
            assert!((c.potential(x) - expect).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn chain_b_constants_and_same_potential() {
        let a = ClosedFormChain::new(ClosedFormName::PivRationalA);
        let b = ClosedFormChain::new(ClosedFormName::PivRationalB);
        assert_eq!(b.mu, vec![3.0, -2.0, 0.0]);
        assert!((b.mu.iter().sum::<f64>() - 1.0).abs() < 1e-15); // Σμ = ω = 1
        for &x in &[-3.0, -0.7, 0.2, 1.9, 4.0] {
            assert!((a.potential(x) - b.potential(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn both_rational_chains_satisfy_the_closure() {
        // q = 1 closure residual on a grid clear of the f_1 pole at 0
        // (the finite-difference oracle needs bounded high derivatives)
        for name in [ClosedFormName::PivRationalA, ClosedFormName::PivRationalB] {
            let c = ClosedFormChain::new(name);
            let grid = Grid::span(1.0, 7.0, 1201).unwrap();
            let fs = c.sample_fs(grid).unwrap();
            let params = c.params().unwrap();
            let res = chain_residual_on_grid(&params, &fs).unwrap();
            assert!(res < 1e-8, "{name:?} residual {res}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for name in [
            ClosedFormName::PivRationalA,
            ClosedFormName::PivRationalB,
            ClosedFormName::SingularOscillator { mu0: 1.0, mu1: 0.5 },
        ] {
            let c = ClosedFormChain::new(name);
            let h = 1e-5;
            for j in 0..c.n {
                for &x in &[0.7, 1.3, 2.9] {
                    let fd = (c.f(j, x + h) - c.f(j, x - h)) / (2.0 * h);
                    assert!(
                        (fd - c.fprime(j, x)).abs() < 1e-8,
                        "{name:?} f_{j}'({x}): {fd} vs {}",
                        c.fprime(j, x)
                    );
                }
            }
        }
    }

    #[test]
    fn reduced_chain_function_solves_piv() {
        // f(x) = f_0 - ωx/2 = x(1-x²)/(x²+1) must satisfy PIV with
        // ω = 3, μ = (4, 1, -2).
        let f = |x: f64| x * (1.0 - x * x) / (x * x + 1.0);
        let fp = |x: f64| {
            let d = x * x + 1.0;
            (1.0 - 4.0 * x * x - x.powi(4)) / (d * d)
        };
        let fpp = |x: f64| {
            let d = x * x + 1.0;
            4.0 * x * (x * x - 3.0) / (d * d * d)
        };
        for &x in &[0.4, 0.8, 2.0, 3.5, -1.6] {
            let r = piv_residual_from_chain_f0(f(x), fp(x), fpp(x), x, 3.0, &[4.0, 1.0, -2.0]);
            assert!(r.abs() < 1e-10, "x = {x}: PIV residual {r}");
        }
    }

    #[test]
    fn singular_oscillator_potential() {
        let (mu0, mu1) = (1.0, 0.5);
        let c = ClosedFormChain::new(ClosedFormName::SingularOscillator { mu0, mu1 });
        let gamma = (mu0 - mu1) / (2.0 * (mu0 + mu1));
        let beta = (mu0 + mu1) / 4.0;
        for &x in &[0.3, 1.0, 2.5] {
            let expect = gamma * (gamma + 1.0) / (x * x) + beta * beta * x * x
                - beta * (1.0 - 2.0 * gamma);
            assert!((c.potential(x) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn n2_qminus1_nonsingular_branch() {
        let (mu0, mu1) = (1.0, 0.5);
        let tau = 0.25f64;
        let gs0 = 0.4;
        let fs0 = (gs0 * gs0 + tau).sqrt();
        let sol = solve_n2_qminus1(mu0, mu1, fs0, gs0, 0.0, 6.0, 0.002).unwrap();
        assert!(sol.conservation_drift() < 1e-9, "drift {}", sol.conservation_drift());
        assert!(sol.linear_integral_drift() < 1e-12);
        let res = sol.chain_residual().unwrap();
        assert!(res < 1e-6, "chain residual {res}");
        // inconsistent seeds are rejected
        assert!(solve_n2_qminus1(mu0, mu1, 0.1, 0.4, 0.0, 2.0, 0.01).is_err());
    }

    #[test]
    fn n2_qminus1_antisymmetric_seed_reproduces_conformal_model() {
        // f_s = g_s = 0 is a fixed point; f_a, g_a must match ±γ/x + βx.
        let (mu0, mu1) = (1.0, 0.5);
        let sol = solve_n2_qminus1(mu0, mu1, 0.0, 0.0, 0.4, 5.0, 0.002).unwrap();
        let c = ClosedFormChain::new(ClosedFormName::SingularOscillator { mu0, mu1 });
        for i in (0..sol.grid.n).step_by(100) {
            let x = sol.grid.x(i);
            assert!((sol.f0(i) - c.f(0, x)).abs() < 1e-9, "x = {x}");
            assert!((sol.f1(i) - c.f(1, x)).abs() < 1e-9, "x = {x}");
        }
    }
}
