use crate::error::{invalid, Error, Result};

/// Tolerances and truncation for real-line quadrature.
///
/// The integration range is `[center - k * scale, center + k * scale]` with
/// `k = truncation_halfwidth`; every integrand in this crate has tails
/// dominated by a Gaussian of the given scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub truncation_halfwidth: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            truncation_halfwidth: 12.0,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, truncation_halfwidth: f64) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(invalid("abs_tol", "must be positive"));
        }
        if !(rel_tol > 0.0) {
            return Err(invalid("rel_tol", "must be positive"));
        }
        if !(truncation_halfwidth >= 8.0) {
            return Err(invalid("truncation_halfwidth", "must be at least 8"));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            truncation_halfwidth,
        })
    }
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel; returns (estimate, |K15 - G7|).
pub(crate) fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = checked(f, center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if !v.is_finite() {
        return Err(Error::NonFinite { x, value: v });
    }
    Ok(v)
}

const INITIAL_PANELS: usize = 16;
const MAX_PANELS: usize = 4096;

/// Globally adaptive Gauss-Kronrod quadrature on a finite interval.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate_interval(f, b, a, spec).map(|v| -v);
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    for i in 0..INITIAL_PANELS {
        let lo = a + width * i as f64;
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
        let (v, e) = gauss_kronrod_15(&f, lo, hi)?;
        panels.push((lo, hi, v, e));
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) || panels.len() >= MAX_PANELS {
            return Ok(total);
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, _, _) = panels[idx];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(total);
        }
        let (v1, e1) = gauss_kronrod_15(&f, lo, mid)?;
        let (v2, e2) = gauss_kronrod_15(&f, mid, hi)?;
        panels[idx] = (lo, mid, v1, e1);
        panels.push((mid, hi, v2, e2));
    }
}

/// Integral over the real line of an integrand with Gaussian-order tails
/// around `center` at length scale `scale`.
pub fn integrate_real_line<F>(f: F, center: f64, scale: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(scale > 0.0) || !center.is_finite() {
        return Err(invalid("scale", "need finite center and positive scale"));
    }
    let k = spec.truncation_halfwidth;
    integrate_interval(f, center - k * scale, center + k * scale, spec)
}
