//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! A 21-point Kronrod rule with embedded 10-point Gauss rule, refined by
//! bisection on the subinterval with the largest error estimate. Oscillatory
//! integrands are handled by pre-splitting panels so that the caller-supplied
//! phase estimate changes by a bounded amount per panel before the adaptive
//! stage runs.

use num_complex::Complex64;

use crate::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One Kronrod panel: returns (integral, error estimate).
fn kronrod_panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let f_center = f(center);
    let mut kronrod = f_center * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).norm();
    (integral, err)
}

/// Adaptive integration of `f` over [a, b] to absolute tolerance `abs_tol`
/// or relative tolerance `rel_tol`, whichever is met first.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    integrate_presplit(f, &[a, b], abs_tol, rel_tol)
}

/// Adaptive integration over the union of consecutive panels given by
/// `breaks` (ascending). Useful when the caller pre-splits at oscillation
/// or decay scales.
pub fn integrate_presplit<F: Fn(f64) -> Complex64>(
    f: &F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("quadrature breakpoints must be ascending".into()));
    }
    struct Panel {
        a: f64,
        b: f64,
        val: Complex64,
        err: f64,
    }
    let mut panels: Vec<Panel> = Vec::with_capacity(breaks.len() + 64);
    for w in breaks.windows(2) {
        let (val, err) = kronrod_panel(f, w[0], w[1]);
        panels.push(Panel { a: w[0], b: w[1], val, err });
    }
    let max_panels = 4000usize;
    loop {
        let total: Complex64 = panels.iter().map(|p| p.val).sum();
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= abs_tol || total_err <= rel_tol * total.norm() {
            return Ok(total);
        }
        if panels.len() >= max_panels {
            return Err(Error::NonConvergence(format!(
                "quadrature error {total_err:.3e} above tolerance after {} panels",
                panels.len()
            )));
        }
        // split the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let Panel { a, b, .. } = panels[idx];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Err(Error::NonConvergence("quadrature panel below machine resolution".into()));
        }
        let (v1, e1) = kronrod_panel(f, a, mid);
        let (v2, e2) = kronrod_panel(f, mid, b);
        panels[idx] = Panel { a, b: mid, val: v1, err: e1 };
        panels.push(Panel { a: mid, b, val: v2, err: e2 });
    }
}

/// Build breakpoints over [a, b] such that `phase` varies by at most
/// `max_phase` radians per panel (measured on a scan grid). Panels where the
/// phase is already slow are left coarse.
pub fn phase_breakpoints(
    phase: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    max_phase: f64,
    scan: usize,
) -> Vec<f64> {
    let scan = scan.max(8);
    let mut breaks = vec![a];
    let mut last_phase = phase(a);
    let mut acc = 0.0;
    for i in 1..=scan {
        let x = a + (b - a) * (i as f64) / (scan as f64);
        let ph = phase(x);
        acc += (ph - last_phase).abs();
        last_phase = ph;
        if acc >= max_phase || i == scan {
            breaks.push(x);
            acc = 0.0;
        }
    }
    if *breaks.last().unwrap() < b {
        breaks.push(b);
    }
    breaks
}
