//! Power-series construction of chain solutions around the fixed point.

use super::{horner, ChainParams, ChainParity, ChainSolution};
use crate::grid::RealGridFn;
use crate::qseries::QParam;
use crate::{Error, Result};

/// Solve the closure order by order in x.
///
/// Matching x^m in equation j gives a bidiagonal linear system for the
/// order-(m+1) coefficients whose elimination denominator is
/// (-1)^{N-1} + q^{m+2}; a vanishing denominator (root-of-unity q, or q = 1
/// with N even) is a resonance.
pub fn solve_series(params: &ChainParams, order: usize) -> Result<ChainSolution> {
    if order > 400 {
        return Err(Error::InvalidInput("series order capped at 400".into()));
    }
    let n = params.n;
    let q = params.q.value();
    let mut b = vec![vec![0.0f64; order + 1]; n];
    match &params.parity {
        ChainParity::Antisymmetric => {}
        ChainParity::General { seeds } => {
            for j in 0..n {
                b[j][0] = seeds[j];
            }
        }
    }

    // row N (the closure image): b_i^{(N)} = q^{i+1} b_i^{(0)}
    let closure_coeff = |b: &Vec<Vec<f64>>, i: usize| q.powi(i as i32 + 1) * b[0][i];

    for m in 0..order {
        // r_j = [μ_j δ_{m0} - Σ_{i=0}^m (b_i^{(j)} b_{m-i}^{(j)} - b_i^{(j+1)} b_{m-i}^{(j+1)})]/(m+1)
        let mut r = vec![0.0f64; n];
        for j in 0..n {
            let mut conv = 0.0;
            for i in 0..=m {
                let own = b[j][i] * b[j][m - i];
                let next = if j + 1 < n {
                    b[j + 1][i] * b[j + 1][m - i]
                } else {
                    closure_coeff(&b, i) * closure_coeff(&b, m - i)
                };
                conv += own - next;
            }
            let mu_term = if m == 0 { params.mu[j] } else { 0.0 };
            r[j] = (mu_term - conv) / (m as f64 + 1.0);
        }
        // b^{(N-1)} = S + (-1)^{N-1} b^{(0)} with S = Σ_{k<N-1}(-1)^{N-2-k} r_k,
        // and the closure row gives b^{(N-1)} + q^{m+2} b^{(0)} = r_{N-1}.
        let mut s = 0.0;
        for k in 0..n.saturating_sub(1) {
            let sign = if (n - 2 - k) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * r[k];
        }
        let parity_sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let denom = parity_sign + q.powi(m as i32 + 2);
        let rhs = r[n - 1] - s;
        if denom.abs() < 1e-12 {
            // 0/0 happens legitimately at q = -1 for the even orders of the
            // antisymmetric branch; pick the regular solution b = 0 there.
            let scale = r.iter().fold(1e-30f64, |m, v| m.max(v.abs()));
            if rhs.abs() < 1e-12 * scale {
                b[0][m + 1] = 0.0;
            } else {
                return Err(Error::Resonance(format!(
                    "vanishing denominator (-1)^(N-1) + q^(m+2) at order {} (q = {q})",
                    m + 1
                )));
            }
        } else {
            b[0][m + 1] = rhs / denom;
        }
        for j in 1..n {
            b[j][m + 1] = r[j - 1] - b[j - 1][m + 1];
        }
        if b.iter().any(|row| !row[m + 1].is_finite() || row[m + 1].abs() > 1e150) {
            return Err(Error::Divergence(format!(
                "series coefficients blew up at order {}",
                m + 1
            )));
        }
    }

    let radius_est = estimate_radius(&b);
    Ok(ChainSolution { params: params.clone(), series: b, radius_est })
}

/// Ratio-test radius estimate from the trailing nonzero coefficients.
fn estimate_radius(b: &[Vec<f64>]) -> f64 {
    let mut worst = f64::INFINITY;
    for row in b {
        // least-squares slope of log|b_i| vs i over the last nonzero entries
        let pts: Vec<(f64, f64)> = row
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| c.abs() > 1e-290)
            .take(20)
            .map(|(i, c)| (i as f64, c.abs().ln()))
            .collect();
        if pts.len() < 4 {
            continue;
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let r = (-slope).exp();
        if r < worst {
            worst = r;
        }
    }
    worst
}

/// Residual of the chain equations on sampled grids: max over j and interior
/// x of |(f_j + f_{j+1})' + f_j² - f_{j+1}² - μ_j|, with derivatives from
/// 4th-order centered differences of the sampled values and f_0(qx) read by
/// cubic interpolation. This is the independent a-posteriori oracle; it uses
/// only sampled VALUES, never the solver's own derivatives.
pub fn chain_residual_on_grid(params: &ChainParams, fs: &[RealGridFn]) -> Result<f64> {
    let n = params.n;
    if fs.len() != n {
        return Err(Error::InvalidInput(format!("need {n} sampled superpotentials")));
    }
    let q = params.q.value();
    let grid = fs[0].grid;
    // f_N(x) = q f_0(qx) sampled by interpolation (valid since |q| < 1)
    let mut f_closure = Vec::with_capacity(grid.n);
    for x in grid.points() {
        let qx = q * x;
        let v = if fs[0].grid.contains(qx) {
            fs[0].interp(qx)?
        } else if fs[0].grid.contains(-qx) {
            // negative q with antisymmetric f_0
            -fs[0].interp(-qx)?
        } else {
            return Err(Error::Interpolation(format!("cannot evaluate f_0 at qx = {qx}")));
        };
        f_closure.push(q * v);
    }
    let f_next_last = RealGridFn::new(grid, f_closure)?;

    let mut max_res = 0.0f64;
    for j in 0..n {
        let fj = &fs[j];
        let fnext = if j + 1 < n { &fs[j + 1] } else { &f_next_last };
        let sum = RealGridFn::new(
            grid,
            fj.values.iter().zip(&fnext.values).map(|(a, b)| a + b).collect(),
        )?;
        let dsum = sum.derivative()?;
        for (i, x) in dsum.grid.points().enumerate() {
            let gi = i + 2; // derivative grid is the interior
            let res = dsum.values[i] + fj.values[gi] * fj.values[gi]
                - fnext.values[gi] * fnext.values[gi]
                - params.mu[j];
            let _ = x;
            if res.abs() > max_res {
                max_res = res.abs();
            }
        }
    }
    Ok(max_res)
}

/// Singular N = 2 solution with a simple pole at zero:
/// f_0 = a/x + Σ b_i x^{2i-1}, f_1 = -a/x + Σ c_i x^{2i-1}.
#[derive(Debug, Clone)]
pub struct SingularChainSeries {
    pub a: f64,
    pub b: Vec<f64>, // b_1, b_2, ... (index 0 is b_1)
    pub c: Vec<f64>,
    pub mu0: f64,
    pub mu1: f64,
    pub q: f64,
}

impl SingularChainSeries {
    pub fn eval_f0(&self, x: f64) -> f64 {
        self.a / x + odd_series(&self.b, x)
    }
    pub fn eval_f1(&self, x: f64) -> f64 {
        -self.a / x + odd_series(&self.c, x)
    }
    pub fn eval_f0_prime(&self, x: f64) -> f64 {
        -self.a / (x * x) + odd_series_prime(&self.b, x)
    }
    pub fn eval_f1_prime(&self, x: f64) -> f64 {
        self.a / (x * x) + odd_series_prime(&self.c, x)
    }
}

fn odd_series(coeffs: &[f64], x: f64) -> f64 {
    // Σ coeffs[i-1] x^{2i-1}
    let x2 = x * x;
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x2 + c;
    }
    acc * x
}

fn odd_series_prime(coeffs: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    let mut acc = 0.0;
    for (i, &c) in coeffs.iter().enumerate().rev() {
        let pow = 2 * i + 1; // exponent of x in the term
        acc = acc * x2 + c * pow as f64;
    }
    acc
}

/// Coupled linear recursion for the singular N = 2 series.
///
/// ```text
/// b_1 = [μ_0/(1+2a) - μ_1/(1-2a)]/(1-q²)
/// c_1 = [μ_1/(1-2a) - q²μ_0/(1+2a)]/(1-q²)
/// b_i + c_i         = Σ_j (c_j c_{i-j} - b_j b_{i-j})/(2i-1+2a)
/// q^{2i} b_i + c_i  = Σ_j (q^{2i} b_j b_{i-j} - c_j c_{i-j})/(2i-1-2a)
/// ```
pub fn solve_singular_n2_series(
    mu0: f64,
    mu1: f64,
    a: f64,
    q: &QParam,
    order: usize,
) -> Result<SingularChainSeries> {
    let qv = q.value();
    let q2 = qv * qv;
    // pole set: 2a = ±(2i-1) for any order i in range
    for i in 1..=order {
        let odd = (2 * i - 1) as f64;
        if (2.0 * a - odd).abs() < 1e-12 || (2.0 * a + odd).abs() < 1e-12 {
            return Err(Error::Pole(format!("2a = ±{odd} hits a recursion pole")));
        }
    }
    if q.is_unit() {
        // only the truncated conformal solution survives; a must equal γ
        let gamma = (mu0 - mu1) / (2.0 * (mu0 + mu1));
        if (a - gamma).abs() > 1e-12 {
            return Err(Error::Divergence(format!(
                "series diverges at q = 1 unless a = γ = {gamma}"
            )));
        }
        let beta = (mu0 + mu1) / 4.0;
        return Ok(SingularChainSeries { a, b: vec![beta], c: vec![beta], mu0, mu1, q: qv });
    }
    let b1 = (mu0 / (1.0 + 2.0 * a) - mu1 / (1.0 - 2.0 * a)) / (1.0 - q2);
    let c1 = (mu1 / (1.0 - 2.0 * a) - q2 * mu0 / (1.0 + 2.0 * a)) / (1.0 - q2);
    let mut b = vec![b1];
    let mut c = vec![c1];
    for i in 2..=order {
        let mut s1 = 0.0; // Σ (c_j c_{i-j} - b_j b_{i-j})
        let mut s2b = 0.0; // Σ b_j b_{i-j}
        let mut s2c = 0.0; // Σ c_j c_{i-j}
        for j in 1..i {
            s1 += c[j - 1] * c[i - j - 1] - b[j - 1] * b[i - j - 1];
            s2b += b[j - 1] * b[i - j - 1];
            s2c += c[j - 1] * c[i - j - 1];
        }
        let q2i = q2.powi(i as i32);
        let rhs1 = s1 / ((2 * i - 1) as f64 + 2.0 * a);
        let rhs2 = (q2i * s2b - s2c) / ((2 * i - 1) as f64 - 2.0 * a);
        // subtract: (1 - q^{2i}) b_i = rhs1 - rhs2
        let denom = 1.0 - q2i;
        if denom.abs() < 1e-12 {
            return Err(Error::Resonance(format!("1 - q^{} vanishes", 2 * i)));
        }
        let bi = (rhs1 - rhs2) / denom;
        let ci = rhs1 - bi;
        if !bi.is_finite() || bi.abs() > 1e150 {
            return Err(Error::Divergence(format!("singular series blew up at i = {i}")));
        }
        b.push(bi);
        c.push(ci);
    }
    Ok(SingularChainSeries { a, b, c, mu0, mu1, q: qv })
}

/// Taylor series of the N = 1 zero-energy wavefunctions.
///
/// Solves ψ'' = u ψ termwise for the even (ψ(0)=1, ψ'(0)=0) and odd
/// (ψ(0)=0, ψ'(0)=1) branches, with u = f² - f' - ν from the antisymmetric
/// N = 1 chain solution.
#[derive(Debug, Clone)]
pub struct ZeroModeSeries {
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub nu: f64,
    pub q: f64,
    pub omega: f64,
    pub radius_est: f64,
}

impl ZeroModeSeries {
    pub fn eval_even(&self, x: f64) -> f64 {
        horner(&self.even, x)
    }
    pub fn eval_odd(&self, x: f64) -> f64 {
        horner(&self.odd, x)
    }

    /// Coefficients of A ψ where A ψ(x) = q^{-1/2} [ψ' + f ψ](x/q).
    pub fn apply_lowering(&self, psi: &[f64]) -> Vec<f64> {
        let n = psi.len();
        let mut w = vec![0.0f64; n];
        // ψ'
        for k in 0..n - 1 {
            w[k] += (k as f64 + 1.0) * psi[k + 1];
        }
        // + f ψ (truncated convolution)
        for (i, &fi) in self.f.iter().enumerate() {
            if fi == 0.0 {
                continue;
            }
            for (k, &pk) in psi.iter().enumerate() {
                if i + k < n {
                    w[i + k] += fi * pk;
                }
            }
        }
        // dilate x -> x/q and prefactor q^{-1/2}
        let qs = self.q.powf(-0.5);
        for (k, wk) in w.iter_mut().enumerate() {
            *wk *= qs * self.q.powi(-(k as i32));
        }
        w
    }
}

pub fn zero_mode_series(q: &QParam, omega: f64, order: usize) -> Result<ZeroModeSeries> {
    if !q.is_sub_unit() {
        return Err(Error::InvalidInput("zero-mode series needs 0 < |q| < 1".into()));
    }
    let params = ChainParams::new(1, *q, vec![omega], ChainParity::Antisymmetric)?;
    let sol = solve_series(&params, order)?;
    let f = sol.series[0].clone();
    let nu = params.nu().expect("sub-unit q has finite ν");
    // u = f² - f' - ν
    let n = f.len();
    let mut u = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n - i {
            u[i + j] += f[i] * f[j];
        }
    }
    for k in 0..n - 1 {
        u[k] -= (k as f64 + 1.0) * f[k + 1];
    }
    u[0] -= nu;
    // ψ'' = u ψ: p_{k+2} = Σ_i u_i p_{k-i} / ((k+1)(k+2))
    let solve = |p0: f64, p1: f64| -> Vec<f64> {
        let mut p = vec![0.0f64; n];
        p[0] = p0;
        if n > 1 {
            p[1] = p1;
        }
        for k in 0..n.saturating_sub(2) {
            let mut s = 0.0;
            for i in 0..=k {
                s += u[i] * p[k - i];
            }
            p[k + 2] = s / (((k + 1) * (k + 2)) as f64);
        }
        p
    };
    Ok(ZeroModeSeries {
        even: solve(1.0, 0.0),
        odd: solve(0.0, 1.0),
        u,
        f,
        nu,
        q: q.value(),
        omega,
        radius_est: sol.radius_est,
    })
}
