//! Outward extension of chain solutions by delay-aware marching.
//!
//! The chain equations only constrain the sums g_j = f_j + f_{j+1}, whose
//! derivatives are delay-free:
//!
//! ```text
//! g_j' = μ_j - f_j² + f_{j+1}²,   g_{N-1}' uses f_N(x) = q f_0(qx).
//! ```
//!
//! Integrating the g_j by classic RK4 avoids interpolating any derivative:
//! f_0 is recovered pointwise from the alternating sum
//! f_0(x) = Σ_j (-1)^j g_j(x) + (-1)^N q f_0(qx), which descends through
//! geometrically shrinking arguments into the series seed region, and the
//! remaining f_j follow by back-substitution. Dense output is cubic Hermite
//! on the stored (g, g') mesh.

use super::{ChainParity, ChainSolution};
use crate::grid::{Grid, RealGridFn};
use crate::{Error, Result};

/// Marched superpotentials on a uniform output grid over [0, x_max].
#[derive(Debug, Clone)]
pub struct ChainGrids {
    pub grid: Grid,
    /// f[j][i] = f_j(x_i).
    pub f: Vec<Vec<f64>>,
    /// fprime[j][i] = f_j'(x_i), reconstructed algebraically from the system.
    pub fprime: Vec<Vec<f64>>,
    pub omega: f64,
    pub nu: f64,
    pub q: f64,
    pub n_chain: usize,
}

impl ChainGrids {
    /// Sampled f_j as grid functions.
    pub fn f_grid_fn(&self, j: usize) -> Result<RealGridFn> {
        RealGridFn::new(self.grid, self.f[j].clone())
    }

    /// Potential u = f_0² - f_0' - ν on the output grid.
    pub fn potential(&self) -> Result<RealGridFn> {
        let values = self.f[0]
            .iter()
            .zip(&self.fprime[0])
            .map(|(f, fp)| f * f - fp - self.nu)
            .collect();
        RealGridFn::new(self.grid, values)
    }

    /// Potential extended to a symmetric grid [-x_max, x_max] by parity
    /// (antisymmetric f_0 makes u even).
    pub fn potential_symmetric(&self, n_points: usize) -> Result<RealGridFn> {
        let u_half = self.potential()?;
        let l = self.grid.x_end();
        let grid = Grid::span(-l, l, n_points)?;
        let mut values = Vec::with_capacity(grid.n);
        for x in grid.points() {
            values.push(u_half.interp(x.abs())?);
        }
        RealGridFn::new(grid, values)
    }

    /// f_0 extended antisymmetrically to a symmetric grid.
    pub fn f0_symmetric(&self, n_points: usize) -> Result<RealGridFn> {
        let f_half = self.f_grid_fn(0)?;
        let l = self.grid.x_end();
        let grid = Grid::span(-l, l, n_points)?;
        let mut values = Vec::with_capacity(grid.n);
        for x in grid.points() {
            let v = f_half.interp(x.abs())?;
            values.push(if x < 0.0 { -v } else { v });
        }
        RealGridFn::new(grid, values)
    }
}

struct MeshPoint {
    x: f64,
    g: Vec<f64>,
    gp: Vec<f64>,
}

struct Marcher<'a> {
    sol: &'a ChainSolution,
    n: usize,
    q: f64,
    x_seed: f64,
    antisymmetric: bool,
    mesh: Vec<MeshPoint>,
}

impl<'a> Marcher<'a> {
    /// g_j(x) from the dense mesh (cubic Hermite) or the seed series.
    fn g_at(&self, x: f64, j: usize) -> Result<f64> {
        if x <= self.x_seed {
            let next = if j + 1 < self.n {
                self.sol.eval_f(j + 1, x)
            } else {
                self.q * self.f_series(self.q * x)
            };
            return Ok(self.sol.eval_f(j, x) + next);
        }
        let last = self.mesh.last().expect("mesh seeded");
        if x > last.x + 1e-12 {
            return Err(Error::Interpolation(format!(
                "delayed argument {x} beyond computed mesh {}",
                last.x
            )));
        }
        // binary search for the segment containing x
        let idx = match self
            .mesh
            .binary_search_by(|p| p.x.partial_cmp(&x).expect("finite mesh"))
        {
            Ok(i) => return Ok(self.mesh[i].g[j]),
            Err(i) => i.min(self.mesh.len() - 1).max(1),
        };
        let (lo, hi) = (&self.mesh[idx - 1], &self.mesh[idx]);
        let h = hi.x - lo.x;
        let t = (x - lo.x) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * lo.g[j] + h10 * h * lo.gp[j] + h01 * hi.g[j] + h11 * h * hi.gp[j])
    }

    /// f_0 inside the seed region, with parity handling for negative
    /// arguments (negative q).
    fn f_series(&self, x: f64) -> f64 {
        if x < 0.0 {
            -self.sol.eval_f(0, -x)
        } else {
            self.sol.eval_f(0, x)
        }
    }

    /// f_0(x) by descent through the closure identity.
    fn f0_at(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        if x < 0.0 && !self.antisymmetric {
            return Err(Error::InvalidInput(
                "negative arguments need the antisymmetric branch".into(),
            ));
        }
        if ax <= self.x_seed {
            return Ok(self.f_series(x));
        }
        let mut alt = 0.0;
        for j in 0..self.n {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            alt += s * self.g_at(ax, j)?;
        }
        let closure_sign = if self.n % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * (alt + closure_sign * self.q * self.f0_at(self.q * ax)?))
    }

    /// All f_j(x) given the g vector at x.
    fn fs_from_g(&self, x: f64, g: &[f64]) -> Result<Vec<f64>> {
        let mut alt = 0.0;
        for (j, gj) in g.iter().enumerate() {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            alt += s * gj;
        }
        let closure_sign = if self.n % 2 == 0 { 1.0 } else { -1.0 };
        let delayed = self.f0_at(self.q * x)?;
        let f0 = alt + closure_sign * self.q * delayed;
        let mut fs = Vec::with_capacity(self.n);
        fs.push(f0);
        for j in 1..self.n {
            let prev = fs[j - 1];
            fs.push(g[j - 1] - prev);
        }
        Ok(fs)
    }

    /// g' from the chain equations at (x, g).
    fn rhs(&self, x: f64, g: &[f64]) -> Result<Vec<f64>> {
        let fs = self.fs_from_g(x, g)?;
        let mut gp = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let fnext = if j + 1 < self.n {
                fs[j + 1]
            } else {
                self.q * self.f0_at(self.q * x)?
            };
            gp.push(self.sol.params.mu[j] - fs[j] * fs[j] + fnext * fnext);
        }
        Ok(gp)
    }

    /// f_j'(x): g_j' is algebraic in the f's; f_0' descends like f_0.
    fn f0p_at(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        if x < 0.0 && !self.antisymmetric {
            return Err(Error::InvalidInput(
                "negative arguments need the antisymmetric branch".into(),
            ));
        }
        // f_0 odd => f_0' even
        if ax <= self.x_seed {
            return Ok(self.sol.eval_fprime(0, ax));
        }
        let g: Vec<f64> = (0..self.n).map(|j| self.g_at(ax, j)).collect::<Result<_>>()?;
        let fs = self.fs_from_g(ax, &g)?;
        let mut alt = 0.0;
        for j in 0..self.n {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            let fnext = if j + 1 < self.n {
                fs[j + 1]
            } else {
                self.q * self.f0_at(self.q * ax)?
            };
            alt += s * (self.sol.params.mu[j] - fs[j] * fs[j] + fnext * fnext);
        }
        let closure_sign = if self.n % 2 == 0 { 1.0 } else { -1.0 };
        Ok(alt + closure_sign * self.q * self.q * self.f0p_at(self.q * ax)?)
    }
}

/// March the chain outward to x_max; `step` sets the output grid spacing
/// (the integrator uses an internal step no larger than this, further capped
/// so delayed arguments stay within computed history).
pub fn march_delay(sol: &ChainSolution, x_max: f64, step: f64) -> Result<ChainGrids> {
    let q = sol.params.q.value();
    if !sol.params.q.is_sub_unit() {
        return Err(Error::InvalidInput("delay marching needs 0 < |q| < 1".into()));
    }
    let antisymmetric = matches!(sol.params.parity, ChainParity::Antisymmetric);
    if q < 0.0 && !antisymmetric {
        return Err(Error::InvalidInput(
            "negative q marching requires the antisymmetric branch".into(),
        ));
    }
    if !(x_max > 0.0 && step > 0.0) {
        return Err(Error::InvalidInput("x_max and step must be positive".into()));
    }
    let n = sol.params.n;
    // seed segment: safely inside the convergence radius
    let x_seed = (0.35 * sol.radius_est).min(x_max * 0.5).min(2.0);
    if !(x_seed > 0.0) || !x_seed.is_finite() {
        return Err(Error::Divergence(format!(
            "series radius estimate {} leaves no seed segment",
            sol.radius_est
        )));
    }
    let mut m = Marcher { sol, n, q, x_seed, antisymmetric, mesh: Vec::new() };

    // initial mesh point at x_seed
    let g0: Vec<f64> = (0..n).map(|j| m.g_at(x_seed, j)).collect::<Result<_>>()?;
    let gp0 = m.rhs(x_seed, &g0)?;
    m.mesh.push(MeshPoint { x: x_seed, g: g0, gp: gp0 });

    let h_user = step.min(0.01);
    let aq = q.abs();
    let mut x = x_seed;
    let overflow_guard = 1e8;
    while x < x_max - 1e-12 {
        // delayed stage arguments must stay within history: |q|(x + h) <= x
        let h_cap = 0.9 * x * (1.0 - aq) / aq;
        let h = h_user.min(h_cap.max(1e-6)).min(x_max - x);
        let g: Vec<f64> = m.mesh.last().unwrap().g.clone();
        let k1 = m.rhs(x, &g)?;
        let g2: Vec<f64> = g.iter().zip(&k1).map(|(gi, ki)| gi + 0.5 * h * ki).collect();
        let k2 = m.rhs(x + 0.5 * h, &g2)?;
        let g3: Vec<f64> = g.iter().zip(&k2).map(|(gi, ki)| gi + 0.5 * h * ki).collect();
        let k3 = m.rhs(x + 0.5 * h, &g3)?;
        let g4: Vec<f64> = g.iter().zip(&k3).map(|(gi, ki)| gi + h * ki).collect();
        let k4 = m.rhs(x + h, &g4)?;
        let gn: Vec<f64> = (0..n)
            .map(|j| g[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        if gn.iter().any(|v| !v.is_finite() || v.abs() > overflow_guard) {
            return Err(Error::Divergence(format!("superpotential blew up near x = {x}")));
        }
        x += h;
        let gpn = m.rhs(x, &gn)?;
        m.mesh.push(MeshPoint { x, g: gn, gp: gpn });
    }

    // sample the output grid (last point must not pass x_max)
    let n_out = ((x_max / step + 1e-9).floor() as usize) + 1;
    let grid = Grid::new(0.0, step, n_out.max(3))?;
    let mut f = vec![Vec::with_capacity(grid.n); n];
    let mut fprime = vec![Vec::with_capacity(grid.n); n];
    for xo in grid.points() {
        if xo <= m.x_seed {
            for j in 0..n {
                f[j].push(sol.eval_f(j, xo));
                fprime[j].push(sol.eval_fprime(j, xo));
            }
        } else {
            let g: Vec<f64> = (0..n).map(|j| m.g_at(xo, j)).collect::<Result<_>>()?;
            let fs = m.fs_from_g(xo, &g)?;
            // f_j' by back-substitution from g_{j-1}' = μ_{j-1} - f_{j-1}² + f_j²
            let f0p = m.f0p_at(xo)?;
            let mut fps = Vec::with_capacity(n);
            fps.push(f0p);
            for j in 1..n {
                let gp_prev = sol.params.mu[j - 1] - fs[j - 1] * fs[j - 1] + fs[j] * fs[j];
                fps.push(gp_prev - fps[j - 1]);
            }
            for j in 0..n {
                f[j].push(fs[j]);
                fprime[j].push(fps[j]);
            }
        }
    }
    let omega = sol.params.omega();
    let nu = sol.params.nu().unwrap_or(f64::NAN);
    Ok(ChainGrids { grid, f, fprime, omega, nu, q, n_chain: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{chain_residual_on_grid, solve_series, ChainParams, ChainParity};
    use crate::qseries::QParam;

    fn n1_solution(q: f64, omega: f64) -> ChainSolution {
        let params = ChainParams::new(
            1,
            QParam::sub_unit(q).unwrap(),
            vec![omega],
            ChainParity::Antisymmetric,
        )
        .unwrap();
        solve_series(&params, 101).unwrap()
    }

    #[test]
    fn march_agrees_with_series_on_overlap() {
        let sol = n1_solution(0.5, 1.0);
        let grids = march_delay(&sol, 4.0, 0.005).unwrap();
        let x_seed = (0.35 * sol.radius_est).min(2.0);
        // overlap window [x_seed/2, x_seed]
        for i in 0..grids.grid.n {
            let x = grids.grid.x(i);
            if x >= 0.5 * x_seed && x <= x_seed * 0.99 {
                let series = sol.eval_f(0, x);
                assert!(
                    (grids.f[0][i] - series).abs() < 1e-10,
                    "x = {x}: {} vs {series}",
                    grids.f[0][i]
                );
            }
        }
    }

    #[test]
    fn n1_approaches_sqrt_nu() {
        let sol = n1_solution(0.5, 1.0);
        let grids = march_delay(&sol, 40.0, 0.01).unwrap();
        let nu: f64 = 4.0 / 3.0;
        // the deficit decays like 1/x² with an O(5) prefactor, so ~1.4e-3
        // remains at x = 40
        let at = |x: f64| grids.f[0][(x / 0.01).round() as usize];
        let d40 = (at(40.0) - nu.sqrt()).abs();
        let d20 = (at(20.0) - nu.sqrt()).abs();
        assert!(d40 < 2e-3, "f(40) deficit {d40}");
        assert!(d40 < d20 / 3.0, "deficit must shrink ~x²: {d20} -> {d40}");
        // bounded, one zero at the origin only
        let mut sign_changes = 0;
        for w in grids.f[0].windows(2) {
            if w[0] != 0.0 && w[1] != 0.0 && w[0].signum() != w[1].signum() {
                sign_changes += 1;
            }
        }
        assert_eq!(sign_changes, 0, "f must have its only zero at x = 0");
        assert!(grids.f[0].iter().all(|v| v.abs() <= 1.5 * nu.sqrt()));
    }

    #[test]
    fn marched_chain_residual_small() {
        let sol = n1_solution(0.5, 1.0);
        let grids = march_delay(&sol, 40.0, 0.01).unwrap();
        let f0 = grids.f_grid_fn(0).unwrap();
        let res = chain_residual_on_grid(&sol.params, &[f0]).unwrap();
        assert!(res < 1e-8, "chain residual {res}");
    }

    #[test]
    fn marched_n2_chain_residual_small() {
        let q = QParam::sub_unit(0.5).unwrap();
        let params = ChainParams::new(2, q, vec![1.0, 0.5], ChainParity::Antisymmetric).unwrap();
        let sol = solve_series(&params, 101).unwrap();
        let grids = march_delay(&sol, 40.0, 0.01).unwrap();
        let f0 = grids.f_grid_fn(0).unwrap();
        let f1 = grids.f_grid_fn(1).unwrap();
        let res = chain_residual_on_grid(&params, &[f0, f1]).unwrap();
        assert!(res < 1e-8, "chain residual {res}");
    }

    #[test]
    fn constant_chain_marches_exactly() {
        let q = QParam::sub_unit(0.5).unwrap();
        let sol = ChainSolution::constant(&[1.0, 0.7], q).unwrap();
        let grids = march_delay(&sol, 10.0, 0.01).unwrap();
        for i in 0..grids.grid.n {
            assert!((grids.f[0][i] - 1.0).abs() < 1e-12);
            assert!((grids.f[1][i] - 0.7).abs() < 1e-12);
            assert!(grids.fprime[0][i].abs() < 1e-12);
        }
        let f0 = grids.f_grid_fn(0).unwrap();
        let f1 = grids.f_grid_fn(1).unwrap();
        let res = chain_residual_on_grid(&sol.params, &[f0, f1]).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn negative_q_limit_matches_linear_solution() {
        // q → -1: f = ωx/2 exactly; the deviation of the marched solution
        // from ωx/2 must shrink as q approaches -1.
        let max_dev = |qv: f64| {
            let sol = n1_solution(qv, 1.0);
            let grids = march_delay(&sol, 3.0, 0.01).unwrap();
            let mut worst = 0.0f64;
            for i in 0..grids.grid.n {
                let x = grids.grid.x(i);
                worst = worst.max((grids.f[0][i] - 0.5 * x).abs());
            }
            // delayed-argument residual stays tight regardless of q
            let f0 = grids.f_grid_fn(0).unwrap();
            let res = chain_residual_on_grid(&sol.params, &[f0]).unwrap();
            assert!(res < 1e-8, "chain residual {res} at q = {qv}");
            worst
        };
        let d90 = max_dev(-0.90);
        let d99 = max_dev(-0.99);
        assert!(d99 < 0.3 * d90, "no convergence toward ωx/2: {d90} -> {d99}");
        assert!(d99 < 0.05, "deviation at q = -0.99 too large: {d99}");
    }

    #[test]
    fn potential_symmetric_and_decaying() {
        let sol = n1_solution(0.5, 1.0);
        let grids = march_delay(&sol, 40.0, 0.01).unwrap();
        let u = grids.potential_symmetric(4001).unwrap();
        // u(0) = 2ω/(q⁴-1)
        let mid = u.values[u.grid.n / 2];
        assert!((mid - 2.0 / (0.0625 - 1.0)).abs() < 1e-9, "u(0) = {mid}");
        // soft tail check: |u| < 10/x² on [20, 40]
        for i in 0..u.grid.n {
            let x = u.grid.x(i);
            if x.abs() >= 20.0 {
                assert!(u.values[i].abs() < 10.0 / (x * x), "x = {x}: u = {}", u.values[i]);
            }
        }
        // symmetric by construction
        for i in 0..u.grid.n {
            let j = u.grid.n - 1 - i;
            assert!((u.values[i] - u.values[j]).abs() < 1e-12);
        }
    }
}
