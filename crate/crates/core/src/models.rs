//! Class-conditional densities, the binormal training model, density ratios
//! and population models.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    integrate_real_line, std_normal_cdf, std_normal_pdf, QuadratureSpec, RngStream,
};

/// Location and length scale of a density's effective support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub center: f64,
    pub scale: f64,
}

/// A probability density on the real line.
pub trait Density: Send + Sync + fmt::Debug {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn support(&self) -> Support;
    /// Draws `n` independent variates.
    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>>;
}

/// `E[f(X)]` for `X` with density `d`, by truncated quadrature.
pub fn expect_under<F>(d: &dyn Density, f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let s = d.support();
    integrate_real_line(|x| f(x) * d.pdf(x), s.center, s.scale, spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mean: f64,
    sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(invalid("mean", "must be finite"));
        }
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(invalid("sd", "must be positive"));
        }
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }
}

impl Density for Normal {
    fn pdf(&self, x: f64) -> f64 {
        std_normal_pdf((x - self.mean) / self.sd) / self.sd
    }

    fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mean) / self.sd)
    }

    fn support(&self) -> Support {
        Support {
            center: self.mean,
            scale: self.sd,
        }
    }

    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        Ok((0..n)
            .map(|_| self.mean + self.sd * rng.next_gaussian())
            .collect())
    }
}

/// Equal-variance binormal model: class 0 ~ N(mu, sigma^2), class 1 ~ N(nu, sigma^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinormalParams {
    pub mu: f64,
    pub nu: f64,
    pub sigma: f64,
}

impl Default for BinormalParams {
    fn default() -> Self {
        Self {
            mu: 0.0,
            nu: 2.0,
            sigma: 1.0,
        }
    }
}

impl BinormalParams {
    pub fn new(mu: f64, nu: f64, sigma: f64) -> Result<Self> {
        let p = Self { mu, nu, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !(self.mu < self.nu) || !self.nu.is_finite() || !self.mu.is_finite() {
            return Err(invalid(
                "mu",
                format!("need finite mu < nu, got mu = {}, nu = {}", self.mu, self.nu),
            ));
        }
        Ok(())
    }

    pub fn class0(&self) -> Normal {
        Normal {
            mean: self.mu,
            sd: self.sigma,
        }
    }

    pub fn class1(&self) -> Normal {
        Normal {
            mean: self.nu,
            sd: self.sigma,
        }
    }
}

/// Class-0 posterior of the binormal model in logistic form,
/// `1 / (1 + exp(a x + b))` with `a = (nu - mu) / sigma^2` and
/// `b = (mu^2 - nu^2) / (2 sigma^2) + ln((1 - p) / p)`.
pub fn binormal_posterior(params: &BinormalParams, prevalence0: f64, x: f64) -> f64 {
    let s2 = params.sigma * params.sigma;
    let a = (params.nu - params.mu) / s2;
    let b = (params.mu * params.mu - params.nu * params.nu) / (2.0 * s2)
        + ((1.0 - prevalence0) / prevalence0).ln();
    logistic_neg(a * x + b)
}

/// `1 / (1 + exp(t))` without overflow.
pub(crate) fn logistic_neg(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

/// Which side of a feature-space cut point is assigned to class 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// class 0 iff `x < cut`
    ZeroBelow,
    /// class 0 iff `x > cut`
    ZeroAbove,
}

/// Cut point realising `{R(x) > c}` for a monotone ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCut {
    pub cut: f64,
    pub orientation: Orientation,
}

/// Log-linear density ratio `R(x) = f0(x) / f1(x) = exp(slope * x + intercept)`.
///
/// This covers the equal-variance binormal ratio and every power of it,
/// in particular its square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRatio {
    slope: f64,
    intercept: f64,
}

impl DensityRatio {
    pub fn log_linear(slope: f64, intercept: f64) -> Result<Self> {
        if !slope.is_finite() || !intercept.is_finite() {
            return Err(invalid("ratio", "coefficients must be finite"));
        }
        Ok(Self { slope, intercept })
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn ln_eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.ln_eval(x).exp()
    }

    /// `R^power`; `powf(0.5)` is the square-root ratio.
    pub fn powf(&self, power: f64) -> Self {
        Self {
            slope: self.slope * power,
            intercept: self.intercept * power,
        }
    }

    /// Cut point `x_c` with `R(x) > c` iff `x` lies on the class-0 side.
    pub fn invert_threshold(&self, c: f64) -> Result<RatioCut> {
        if !(c > 0.0) {
            return Err(Error::InvalidThreshold(c));
        }
        let ln_c = c.ln();
        if self.slope == 0.0 {
            // constant ratio: everything or nothing exceeds c
            let cut = if self.intercept > ln_c {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            return Ok(RatioCut {
                cut,
                orientation: Orientation::ZeroBelow,
            });
        }
        let cut = (ln_c - self.intercept) / self.slope;
        let orientation = if self.slope < 0.0 {
            Orientation::ZeroBelow
        } else {
            Orientation::ZeroAbove
        };
        Ok(RatioCut { cut, orientation })
    }
}

/// `R(x) = exp(x (mu - nu) / sigma^2 + (nu^2 - mu^2) / (2 sigma^2))`.
pub fn binormal_density_ratio(params: &BinormalParams) -> DensityRatio {
    let s2 = params.sigma * params.sigma;
    DensityRatio {
        slope: (params.mu - params.nu) / s2,
        intercept: (params.nu * params.nu - params.mu * params.mu) / (2.0 * s2),
    }
}

/// Class-conditional densities plus a class-0 prevalence.
///
/// `ratio`, when present, is the exact ratio `f0 / f1`; threshold
/// classifiers and the EM estimator need it.
#[derive(Debug, Clone)]
pub struct PopulationModel {
    class0: Arc<dyn Density>,
    class1: Arc<dyn Density>,
    prevalence0: f64,
    ratio: Option<DensityRatio>,
}

impl PopulationModel {
    pub fn new(
        class0: Arc<dyn Density>,
        class1: Arc<dyn Density>,
        prevalence0: f64,
        ratio: Option<DensityRatio>,
    ) -> Result<Self> {
        check_prevalence(prevalence0)?;
        Ok(Self {
            class0,
            class1,
            prevalence0,
            ratio,
        })
    }

    pub fn binormal(params: &BinormalParams, prevalence0: f64) -> Result<Self> {
        params.validate()?;
        Self::new(
            Arc::new(params.class0()),
            Arc::new(params.class1()),
            prevalence0,
            Some(binormal_density_ratio(params)),
        )
    }

    /// Same conditionals, new prevalence.
    pub fn with_prevalence(&self, prevalence0: f64) -> Result<Self> {
        check_prevalence(prevalence0)?;
        Ok(Self {
            prevalence0,
            ..self.clone()
        })
    }

    pub fn prevalence0(&self) -> f64 {
        self.prevalence0
    }

    pub fn class0(&self) -> &Arc<dyn Density> {
        &self.class0
    }

    pub fn class1(&self) -> &Arc<dyn Density> {
        &self.class1
    }

    pub fn class_density(&self, class: u8) -> &Arc<dyn Density> {
        if class == 0 {
            &self.class0
        } else {
            &self.class1
        }
    }

    pub fn ratio(&self) -> Option<&DensityRatio> {
        self.ratio.as_ref()
    }

    pub fn require_ratio(&self) -> Result<&DensityRatio> {
        self.ratio.as_ref().ok_or(Error::MissingDensityRatio)
    }

    /// `P[Y = 0 | X = x]`.
    pub fn posterior(&self, x: f64) -> f64 {
        let p = self.prevalence0;
        match &self.ratio {
            Some(r) => logistic_neg(((1.0 - p) / p).ln() - r.ln_eval(x)),
            None => {
                let a = p * self.class0.pdf(x);
                let b = (1.0 - p) * self.class1.pdf(x);
                if a + b > 0.0 {
                    a / (a + b)
                } else {
                    p
                }
            }
        }
    }

    /// `E[f(X)]` under the mixture.
    pub fn expect<F>(&self, f: F, spec: &QuadratureSpec) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let e0 = expect_under(self.class0.as_ref(), &f, spec)?;
        let e1 = expect_under(self.class1.as_ref(), &f, spec)?;
        Ok(self.prevalence0 * e0 + (1.0 - self.prevalence0) * e1)
    }

    /// Range covering the bulk of both conditionals, `k` scales out.
    pub fn span(&self, k: f64) -> (f64, f64) {
        let s0 = self.class0.support();
        let s1 = self.class1.support();
        (
            (s0.center - k * s0.scale).min(s1.center - k * s1.scale),
            (s0.center + k * s0.scale).max(s1.center + k * s1.scale),
        )
    }
}

fn check_prevalence(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("prevalence0", format!("must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// Mixture density `p f0(x) + (1 - p) f1(x)`.
pub fn marginal_density(pop: &PopulationModel, x: f64) -> f64 {
    let p = pop.prevalence0;
    p * pop.class0.pdf(x) + (1.0 - p) * pop.class1.pdf(x)
}

/// A class-0 posterior `x -> P[Y = 0 | X = x]`.
///
/// `class1` may be overridden where `1 - class0(x)` loses precision.
pub trait PosteriorFn: Send + Sync {
    fn class0(&self, x: f64) -> f64;
    fn class1(&self, x: f64) -> f64 {
        1.0 - self.class0(x)
    }
}

impl<F> PosteriorFn for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn class0(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Posterior of a two-component mixture with weight `w` on class 0 and
/// conditional ratio `R`: `w R / (1 - w + w R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPosterior {
    pub ratio: DensityRatio,
    pub weight0: f64,
}

impl PosteriorFn for RatioPosterior {
    fn class0(&self, x: f64) -> f64 {
        let w = self.weight0;
        logistic_neg(((1.0 - w) / w).ln() - self.ratio.ln_eval(x))
    }

    fn class1(&self, x: f64) -> f64 {
        let w = self.weight0;
        logistic_neg((w / (1.0 - w)).ln() + self.ratio.ln_eval(x))
    }
}

/// Number of grid nodes of the cached CDF table.
pub const DEFAULT_CDF_RESOLUTION: usize = 2048;

/// Class-conditional density recovered from a marginal and a posterior:
/// `f0 = post * f / p`, `f1 = (1 - post) * f / (1 - p)`.
///
/// The CDF is served from a table of cumulative integrals on a uniform grid
/// over the marginal's truncated support, refined inside one cell by a
/// single Kronrod panel.
pub struct PosteriorConditional {
    marginal: Arc<dyn Density>,
    posterior: Arc<dyn PosteriorFn>,
    prevalence0: f64,
    class: u8,
    grid_lo: f64,
    grid_step: f64,
    cumulative: Vec<f64>,
}

impl fmt::Debug for PosteriorConditional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PosteriorConditional")
            .field("marginal", &self.marginal)
            .field("prevalence0", &self.prevalence0)
            .field("class", &self.class)
            .field("grid_points", &self.cumulative.len())
            .finish()
    }
}

impl PosteriorConditional {
    fn build(
        marginal: Arc<dyn Density>,
        posterior: Arc<dyn PosteriorFn>,
        prevalence0: f64,
        class: u8,
        resolution: usize,
        halfwidth: f64,
    ) -> Result<Self> {
        let s = marginal.support();
        let lo = s.center - halfwidth * s.scale;
        let hi = s.center + halfwidth * s.scale;
        let cells = resolution.max(2) - 1;
        let step = (hi - lo) / cells as f64;
        let mut this = Self {
            marginal,
            posterior,
            prevalence0,
            class,
            grid_lo: lo,
            grid_step: step,
            cumulative: Vec::with_capacity(cells + 1),
        };
        let mut acc = 0.0;
        this.cumulative.push(0.0);
        for i in 0..cells {
            let a = lo + step * i as f64;
            let (v, _) =
                crate::numerics::kronrod_panel(&|x| this.density(x), a, a + step)?;
            acc += v;
            this.cumulative.push(acc);
        }
        Ok(this)
    }

    fn density(&self, x: f64) -> f64 {
        let f = self.marginal.pdf(x);
        if f == 0.0 {
            return 0.0;
        }
        if self.class == 0 {
            self.posterior.class0(x) * f / self.prevalence0
        } else {
            self.posterior.class1(x) * f / (1.0 - self.prevalence0)
        }
    }

    /// Upper bound `M` with `pdf <= M * marginal.pdf`.
    pub fn envelope_constant(&self) -> f64 {
        if self.class == 0 {
            1.0 / self.prevalence0
        } else {
            1.0 / (1.0 - self.prevalence0)
        }
    }

    pub fn marginal(&self) -> &Arc<dyn Density> {
        &self.marginal
    }

    /// Mass of the table, i.e. the truncated integral of the density.
    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }
}

impl Density for PosteriorConditional {
    fn pdf(&self, x: f64) -> f64 {
        self.density(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let cells = self.cumulative.len() - 1;
        let hi = self.grid_lo + self.grid_step * cells as f64;
        if x <= self.grid_lo {
            return 0.0;
        }
        if x >= hi {
            return self.total_mass();
        }
        let i = (((x - self.grid_lo) / self.grid_step).floor() as usize).min(cells - 1);
        let a = self.grid_lo + self.grid_step * i as f64;
        let partial = crate::numerics::kronrod_panel(&|t| self.density(t), a, x)
            .map(|(v, _)| v)
            .unwrap_or(0.0);
        self.cumulative[i] + partial
    }

    fn support(&self) -> Support {
        self.marginal.support()
    }

    fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        let marginal = Arc::clone(&self.marginal);
        let outcome = crate::sampling::accept_reject_sample(
            |x| self.density(x),
            |r: &mut RngStream| marginal.sample(1, r).map(|v| v[0]),
            |x| self.marginal.pdf(x),
            self.envelope_constant(),
            n,
            rng,
        )?;
        Ok(outcome.draws)
    }
}

/// Splits a marginal density into class conditionals given the class-0
/// posterior and prevalence.
pub fn conditionals_from_posterior(
    marginal: Arc<dyn Density>,
    posterior: Arc<dyn PosteriorFn>,
    prevalence0: f64,
) -> Result<(Arc<PosteriorConditional>, Arc<PosteriorConditional>)> {
    conditionals_from_posterior_with(
        marginal,
        posterior,
        prevalence0,
        DEFAULT_CDF_RESOLUTION,
        QuadratureSpec::default().truncation_halfwidth,
    )
}

/// As [`conditionals_from_posterior`] with an explicit CDF table
/// resolution and truncation half-width (in marginal scales).
pub fn conditionals_from_posterior_with(
    marginal: Arc<dyn Density>,
    posterior: Arc<dyn PosteriorFn>,
    prevalence0: f64,
    resolution: usize,
    halfwidth: f64,
) -> Result<(Arc<PosteriorConditional>, Arc<PosteriorConditional>)> {
    check_prevalence(prevalence0)?;
    if resolution < 2 {
        return Err(invalid("resolution", "need at least two grid points"));
    }
    let c0 = PosteriorConditional::build(
        Arc::clone(&marginal),
        Arc::clone(&posterior),
        prevalence0,
        0,
        resolution,
        halfwidth,
    )?;
    let c1 = PosteriorConditional::build(marginal, posterior, prevalence0, 1, resolution, halfwidth)?;
    Ok((Arc::new(c0), Arc::new(c1)))
}
