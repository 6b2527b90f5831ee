//! Finite-difference Schrödinger eigensolver, spectrum-model fits, and
//! numerical ladder/intertwining algebra checks.
//!
//! H = -d²/dx² + u(x) is discretized with the standard three-point
//! Laplacian; eigenvalues come from Sturm bisection and eigenvectors from
//! inverse iteration. Grid eigenvectors are normalized in the continuum
//! sense (trapezoid ∫|ψ|² = 1) and sign-fixed so the first extremum from
//! the left is positive.

mod ladder;
mod tridiag;

pub use ladder::{
    algebra_residuals, apply_h_poly, apply_hamiltonian, apply_ladder, relative_l2_mismatch,
    AlgebraReport, LadderChain, LadderDirection,
};
pub use tridiag::{inverse_iteration, smallest_eigenvalues, sturm_count};

use serde::Serialize;

use crate::grid::{Grid, RealGridFn};
use crate::{Error, Result};

/// Boundary handling for the discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryCondition {
    /// ψ = 0 at both grid ends (whole-line problems on a truncated box).
    Dirichlet,
    /// Half-line problem: grid starts at ε > 0 with ψ(ε) = ψ(L) = 0.
    DirichletHalfLine,
}

/// Tridiagonal discretization of H = -d²/dx² + u.
#[derive(Debug, Clone)]
pub struct TridiagOperator {
    pub grid: Grid,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub bc: BoundaryCondition,
}

/// Assemble the three-point operator from a sampled potential.
pub fn discretize(u: &RealGridFn, bc: BoundaryCondition) -> Result<TridiagOperator> {
    let g = u.grid;
    if bc == BoundaryCondition::DirichletHalfLine && g.x0 <= 0.0 {
        return Err(Error::InvalidInput("half-line grid must start at ε > 0".into()));
    }
    let inv2 = 1.0 / (g.dx * g.dx);
    let diag: Vec<f64> = u.values.iter().map(|v| 2.0 * inv2 + v).collect();
    let off = vec![-inv2; g.n - 1];
    Ok(TridiagOperator { grid: g, diag, off, bc })
}

/// Model fitted to a computed spectrum.
#[derive(Debug, Clone, Serialize)]
pub enum SpectrumModel {
    /// E_{kN+l} = E_l q^{2k}.
    Geometric { q: f64, n_period: usize, base: Vec<f64> },
    /// E_{kN+l} = E_l + k ω.
    Arithmetic { omega: f64, n_period: usize, base: Vec<f64> },
}

/// Computed eigenvalues with optional model fit and per-level residuals.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub model: Option<SpectrumModel>,
    pub per_level_residual: Vec<f64>,
    pub grid_x0: f64,
    pub grid_dx: f64,
    pub grid_n: usize,
}

/// Lowest-k eigenpairs. Eigenvectors are continuum-normalized and
/// sign-fixed; the residual ‖Hψ - Eψ‖/‖ψ‖ (discrete norms) is checked
/// against 1e-9·max(|E|, 1).
pub fn lowest_eigenpairs(
    op: &TridiagOperator,
    k: usize,
) -> Result<(SpectrumReport, Vec<RealGridFn>)> {
    let eigenvalues = smallest_eigenvalues(&op.diag, &op.off, k)?;
    let mut discrete: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &lam in &eigenvalues {
        let v = inverse_iteration(&op.diag, &op.off, lam, &discrete)?;
        discrete.push(v);
    }
    let mut vectors = Vec::with_capacity(k);
    for v in discrete {
        let mut w = v;
        sign_fix_first_extremum(&mut w);
        // continuum normalization: divide by √dx
        let s = op.grid.dx.sqrt();
        for x in &mut w {
            *x /= s;
        }
        vectors.push(RealGridFn::new(op.grid, w)?);
    }
    let report = SpectrumReport {
        eigenvalues,
        model: None,
        per_level_residual: Vec::new(),
        grid_x0: op.grid.x0,
        grid_dx: op.grid.dx,
        grid_n: op.grid.n,
    };
    Ok((report, vectors))
}

/// Make the first extremum (scanning from the left, above 20% of the max
/// amplitude) positive.
pub(crate) fn sign_fix_first_extremum(v: &mut [f64]) {
    let maxabs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if maxabs == 0.0 {
        return;
    }
    let thresh = 0.2 * maxabs;
    for i in 1..v.len() - 1 {
        if v[i].abs() >= thresh && v[i].abs() >= v[i - 1].abs() && v[i].abs() >= v[i + 1].abs() {
            if v[i] < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            return;
        }
    }
}

/// Fit the geometric model E_{kN+l} = E_l q^{2k} to a computed spectrum and
/// report per-level relative residuals |E_{kN+l}/(E_l q^{2k}) - 1|.
pub fn verify_geometric(report: &mut SpectrumReport, q: f64, n_period: usize) -> Result<f64> {
    let e = &report.eigenvalues;
    if e.len() < 2 * n_period {
        return Err(Error::InvalidInput(format!(
            "geometric fit needs at least 2N = {} eigenvalues",
            2 * n_period
        )));
    }
    let q2 = q * q;
    // least squares for each base level: min Σ_k (E_{kN+l} - E_l q^{2k})²
    let mut base = vec![0.0f64; n_period];
    for l in 0..n_period {
        let (mut num, mut den) = (0.0, 0.0);
        let mut k = 0usize;
        while k * n_period + l < e.len() {
            let w = q2.powi(k as i32);
            num += e[k * n_period + l] * w;
            den += w * w;
            k += 1;
        }
        base[l] = num / den;
    }
    let mut residuals = Vec::with_capacity(e.len());
    let mut worst = 0.0f64;
    for (i, &ei) in e.iter().enumerate() {
        let (k, l) = (i / n_period, i % n_period);
        let model = base[l] * q2.powi(k as i32);
        let r = (ei / model - 1.0).abs();
        residuals.push(r);
        worst = worst.max(r);
    }
    report.model = Some(SpectrumModel::Geometric { q, n_period, base });
    report.per_level_residual = residuals;
    Ok(worst)
}

/// Fit the arithmetic model E_{kN+l} = E_l + kω; residuals are absolute,
/// scaled by max(|ω|, 1).
pub fn verify_arithmetic(report: &mut SpectrumReport, n_period: usize) -> Result<f64> {
    let e = &report.eigenvalues;
    if e.len() < 2 * n_period {
        return Err(Error::InvalidInput(format!(
            "arithmetic fit needs at least 2N = {} eigenvalues",
            2 * n_period
        )));
    }
    // ω from the mean of E_{i+N} - E_i; bases from k = 0 entries
    let mut omega = 0.0;
    let mut count = 0usize;
    for i in 0..e.len() - n_period {
        omega += e[i + n_period] - e[i];
        count += 1;
    }
    omega /= count as f64;
    let base: Vec<f64> = (0..n_period).map(|l| e[l]).collect();
    let mut residuals = Vec::with_capacity(e.len());
    let mut worst = 0.0f64;
    let scale = omega.abs().max(1.0);
    for (i, &ei) in e.iter().enumerate() {
        let (k, l) = (i / n_period, i % n_period);
        let r = (ei - base[l] - k as f64 * omega).abs() / scale;
        residuals.push(r);
        worst = worst.max(r);
    }
    report.model = Some(SpectrumModel::Arithmetic { omega, n_period, base });
    report.per_level_residual = residuals;
    Ok(worst)
}

/// Count strict sign changes of a grid function (node counting), ignoring
/// the near-zero boundary tails.
pub fn count_nodes(psi: &RealGridFn) -> usize {
    let maxabs = psi.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-6 * maxabs;
    let mut nodes = 0;
    let mut last_sign = 0.0f64;
    for &v in &psi.values {
        if v.abs() < floor {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inner_trapezoid_real;

    #[test]
    fn particle_in_a_box() {
        // u = 0 on [0, π] with Dirichlet walls: E_k = k² with O(dx²) error.
        // The matrix imposes ψ = 0 one spacing beyond each edge, so the grid
        // holds the open interior (dx, π - dx).
        let n_cells = 1500usize;
        let dx = std::f64::consts::PI / n_cells as f64;
        let grid = Grid::new(dx, dx, n_cells - 1).unwrap();
        let u = RealGridFn::sample(grid, |_| 0.0);
        let op = discretize(&u, BoundaryCondition::Dirichlet).unwrap();
        let (rep, _) = lowest_eigenpairs(&op, 3).unwrap();
        assert!((rep.eigenvalues[0] - 1.0).abs() < 2e-6, "E_0 = {}", rep.eigenvalues[0]);
        assert!((rep.eigenvalues[1] - 4.0).abs() < 2e-5);
        assert!((rep.eigenvalues[2] - 9.0).abs() < 1e-4);
    }

    #[test]
    fn harmonic_oscillator_spectrum_and_parity() {
        let grid = Grid::span(-12.0, 12.0, 3000).unwrap();
        let u = RealGridFn::sample(grid, |x| x * x);
        let op = discretize(&u, BoundaryCondition::Dirichlet).unwrap();
        let (rep, vecs) = lowest_eigenpairs(&op, 5).unwrap();
        for n in 0..5 {
            let expect = 2.0 * n as f64 + 1.0;
            // FD error grows like dx²·E²/12 ≈ 2.6e-4 at E = 7 for this grid
            assert!(
                (rep.eigenvalues[n] - expect).abs() < 5e-4,
                "E_{n} = {} vs {expect}",
                rep.eigenvalues[n]
            );
        }
        assert!((rep.eigenvalues[0] - 1.0).abs() < 2e-5);
        // eigenvectors alternate parity and have n nodes
        for (n, v) in vecs.iter().enumerate() {
            assert_eq!(count_nodes(v), n, "node count of level {n}");
            let m = v.grid.n - 1;
            let sym = if n % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..v.grid.n / 4 {
                let d = (v.values[i] - sym * v.values[m - i]).abs();
                assert!(d < 1e-7, "parity defect {d} at level {n}");
            }
        }
        // orthonormality (trapezoid)
        for i in 0..5 {
            for j in 0..5 {
                let ip = inner_trapezoid_real(&vecs[i], &vecs[j]).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-8, "⟨{i}|{j}⟩ = {ip}");
            }
        }
    }

    #[test]
    fn eigenvalue_richardson_convergence() {
        // halving dx must shrink the E error by ~4 (second order)
        let err = |n: usize| {
            let grid = Grid::span(-12.0, 12.0, n).unwrap();
            let u = RealGridFn::sample(grid, |x| x * x);
            let op = discretize(&u, BoundaryCondition::Dirichlet).unwrap();
            let (rep, _) = lowest_eigenpairs(&op, 1).unwrap();
            (rep.eigenvalues[0] - 1.0).abs()
        };
        let (e1, e2) = (err(1000), err(2000));
        let ratio = e1 / e2;
        assert!(ratio > 3.0 && ratio < 5.0, "Richardson ratio {ratio}");
    }

    #[test]
    fn geometric_fit_exact_synthetic() {
        let q: f64 = 0.5;
        let evs: Vec<f64> = (0..8).map(|n| -(q * q).powi(n)).collect();
        let mut rep = SpectrumReport {
            eigenvalues: evs,
            model: None,
            per_level_residual: Vec::new(),
            grid_x0: 0.0,
            grid_dx: 1.0,
            grid_n: 0,
        };
        let worst = verify_geometric(&mut rep, q, 1).unwrap();
        assert!(worst < 1e-14);
    }

    #[test]
    fn arithmetic_fit_exact_synthetic() {
        let evs: Vec<f64> = (0..9).map(|n| 3.0 + n as f64).collect();
        let mut rep = SpectrumReport {
            eigenvalues: evs,
            model: None,
            per_level_residual: Vec::new(),
            grid_x0: 0.0,
            grid_dx: 1.0,
            grid_n: 0,
        };
        let worst = verify_arithmetic(&mut rep, 1).unwrap();
        assert!(worst < 1e-14);
        match rep.model {
            Some(SpectrumModel::Arithmetic { omega, .. }) => assert!((omega - 1.0).abs() < 1e-13),
            _ => panic!("wrong model"),
        }
    }

    #[test]
    fn half_line_requires_positive_start() {
        let grid = Grid::span(0.0, 10.0, 101).unwrap();
        let u = RealGridFn::sample(grid, |_| 0.0);
        assert!(discretize(&u, BoundaryCondition::DirichletHalfLine).is_err());
    }
}
