//! Uniform grids, sampled functions, interpolation, and finite-difference
//! stencils shared by the solvers.

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Uniform grid x_i = x0 + i·dx, i = 0..n-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0) || n < 3 {
            return Err(Error::InvalidInput(format!("grid needs dx > 0 and n >= 3 (dx={dx}, n={n})")));
        }
        Ok(Grid { x0, dx, n })
    }

    /// Grid covering [a, b] with approximately n points (exact spacing).
    pub fn span(a: f64, b: f64, n: usize) -> Result<Self> {
        if b <= a {
            return Err(Error::InvalidInput(format!("grid span needs b > a, got [{a}, {b}]")));
        }
        let dx = (b - a) / (n.max(3) as f64 - 1.0);
        Grid::new(a, dx, n.max(3))
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x0 - 1e-12 * self.dx && x <= self.x_end() + 1e-12 * self.dx
    }
}

/// Function sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    pub grid: Grid,
    pub values: Vec<T>,
}

pub type RealGridFn = GridFunction<f64>;
pub type ComplexGridFn = GridFunction<Complex64>;

impl<T: Copy> GridFunction<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidInput(format!(
                "grid function length {} does not match grid size {}",
                values.len(),
                grid.n
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn sample(grid: Grid, f: impl Fn(f64) -> T) -> Self {
        let values = grid.points().map(f).collect();
        GridFunction { grid, values }
    }

    /// Restrict to the index range [lo, hi] (inclusive).
    pub fn slice(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi || hi >= self.grid.n {
            return Err(Error::InvalidInput(format!("bad slice [{lo}, {hi}]")));
        }
        let grid = Grid::new(self.grid.x(lo), self.grid.dx, hi - lo + 1)?;
        Ok(GridFunction { grid, values: self.values[lo..=hi].to_vec() })
    }
}

macro_rules! impl_interp {
    ($t:ty, $zero:expr) => {
        impl GridFunction<$t> {
            /// Cubic (4-point Lagrange) interpolation at y. Extrapolation is
            /// refused; points must lie within the grid.
            pub fn interp(&self, y: f64) -> Result<$t> {
                let g = &self.grid;
                if !g.contains(y) {
                    return Err(Error::Interpolation(format!(
                        "x = {y} outside grid [{}, {}]",
                        g.x0,
                        g.x_end()
                    )));
                }
                let fi = (y - g.x0) / g.dx;
                // stencil start: clamp so that i0..i0+3 are valid
                let i0 = ((fi.floor() as isize) - 1).clamp(0, g.n as isize - 4) as usize;
                let t = fi - i0 as f64; // in units of dx, relative to stencil start
                let mut acc = $zero;
                for (j, w) in lagrange4(t).into_iter().enumerate() {
                    acc = acc + self.values[i0 + j] * w;
                }
                Ok(acc)
            }

            /// Trapezoid-rule L² norm.
            pub fn norm_l2(&self) -> f64 {
                self.inner_trapezoid_norm2().sqrt()
            }

            fn inner_trapezoid_norm2(&self) -> f64 {
                let mut s = 0.0;
                for (i, v) in self.values.iter().enumerate() {
                    let w = if i == 0 || i == self.grid.n - 1 { 0.5 } else { 1.0 };
                    s += w * sq_abs(*v);
                }
                s * self.grid.dx
            }

            /// 4th-order centered first derivative; the two points nearest
            /// each edge are dropped (domain truncation instead of one-sided
            /// stencils).
            pub fn derivative(&self) -> Result<GridFunction<$t>> {
                let g = &self.grid;
                if g.n < 7 {
                    return Err(Error::InvalidInput("derivative needs at least 7 points".into()));
                }
                let v = &self.values;
                let inv = 1.0 / (12.0 * g.dx);
                let mut out = Vec::with_capacity(g.n - 4);
                for i in 2..g.n - 2 {
                    out.push((v[i - 2] - v[i + 2] + (v[i + 1] - v[i - 1]) * 8.0) * inv);
                }
                Ok(GridFunction { grid: Grid::new(g.x(2), g.dx, g.n - 4)?, values: out })
            }

            /// 4th-order centered second derivative, same truncation rule.
            pub fn second_derivative(&self) -> Result<GridFunction<$t>> {
                let g = &self.grid;
                if g.n < 7 {
                    return Err(Error::InvalidInput("second derivative needs at least 7 points".into()));
                }
                let v = &self.values;
                let inv = 1.0 / (12.0 * g.dx * g.dx);
                let mut out = Vec::with_capacity(g.n - 4);
                for i in 2..g.n - 2 {
                    out.push(
                        ((v[i + 1] + v[i - 1]) * 16.0 - v[i + 2] - v[i - 2] - v[i] * 30.0) * inv,
                    );
                }
                Ok(GridFunction { grid: Grid::new(g.x(2), g.dx, g.n - 4)?, values: out })
            }

            /// 4th-order centered third derivative; drops three points per edge.
            pub fn third_derivative(&self) -> Result<GridFunction<$t>> {
                let g = &self.grid;
                if g.n < 9 {
                    return Err(Error::InvalidInput("third derivative needs at least 9 points".into()));
                }
                let v = &self.values;
                let inv = 1.0 / (8.0 * g.dx * g.dx * g.dx);
                let mut out = Vec::with_capacity(g.n - 6);
                for i in 3..g.n - 3 {
                    out.push(
                        (v[i - 3] - v[i + 3] + (v[i + 2] - v[i - 2]) * 8.0
                            + (v[i - 1] - v[i + 1]) * 13.0)
                            * inv,
                    );
                }
                Ok(GridFunction { grid: Grid::new(g.x(3), g.dx, g.n - 6)?, values: out })
            }
        }
    };
}

trait SqAbs {
    fn sq_abs(self) -> f64;
}
impl SqAbs for f64 {
    fn sq_abs(self) -> f64 {
        self * self
    }
}
impl SqAbs for Complex64 {
    fn sq_abs(self) -> f64 {
        self.norm_sqr()
    }
}
fn sq_abs<T: SqAbs>(v: T) -> f64 {
    v.sq_abs()
}

impl_interp!(f64, 0.0f64);
impl_interp!(Complex64, Complex64::new(0.0, 0.0));

/// 4-point Lagrange weights at offset t ∈ [0, 3] from the stencil start.
fn lagrange4(t: f64) -> [f64; 4] {
    let (t0, t1, t2, t3) = (t, t - 1.0, t - 2.0, t - 3.0);
    [
        -t1 * t2 * t3 / 6.0,
        t0 * t2 * t3 / 2.0,
        -t0 * t1 * t3 / 2.0,
        t0 * t1 * t2 / 6.0,
    ]
}

/// Inner product ⟨f, g⟩ = ∫ conj(f) g dx by the trapezoid rule.
pub fn inner_trapezoid(f: &ComplexGridFn, g: &ComplexGridFn) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(Error::InvalidInput("inner product needs matching grids".into()));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..f.grid.n {
        let w = if i == 0 || i == f.grid.n - 1 { 0.5 } else { 1.0 };
        s += w * f.values[i].conj() * g.values[i];
    }
    Ok(s * f.grid.dx)
}

/// Real inner product by the trapezoid rule.
pub fn inner_trapezoid_real(f: &RealGridFn, g: &RealGridFn) -> Result<f64> {
    if f.grid != g.grid {
        return Err(Error::InvalidInput("inner product needs matching grids".into()));
    }
    let mut s = 0.0;
    for i in 0..f.grid.n {
        let w = if i == 0 || i == f.grid.n - 1 { 0.5 } else { 1.0 };
        s += w * f.values[i] * g.values[i];
    }
    Ok(s * f.grid.dx)
}
