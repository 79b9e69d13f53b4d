//! Classical extreme-value building blocks: max-stable marginals, bivariate
//! exponent measures, Poisson-maximum MID laws, base d.f.s and their
//! domain-of-attraction norming.

use std::fmt;

use rand::Rng;

use crate::error::{config, domain, Error, Result};
use crate::rng::uniform_open0;

/// A d.f. on `R^d`.
pub trait DistributionFunction {
    fn dim(&self) -> usize;
    fn cdf(&self, x: &[f64]) -> f64;
}

/// Fréchet-type evaluation points (standardized).
pub const FRECHET_GRID: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
/// Gumbel-type evaluation points (standardized).
pub const GUMBEL_GRID: [f64; 5] = [-1.0, 0.0, 1.0, 2.0, 4.0];
/// Reverse-Weibull-type evaluation points (standardized).
pub const REVERSE_WEIBULL_GRID: [f64; 5] = [-4.0, -2.0, -1.0, -0.5, -0.25];

/// Univariate max-stable type with location and scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Frechet { alpha: f64, loc: f64, scale: f64 },
    Gumbel { loc: f64, scale: f64 },
    ReverseWeibull { alpha: f64, loc: f64, scale: f64 },
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tail = |f: &mut fmt::Formatter<'_>, loc: f64, scale: f64| {
            if loc != 0.0 || scale != 1.0 {
                write!(f, ":{loc}:{scale}")
            } else {
                Ok(())
            }
        };
        match *self {
            Marginal::Frechet { alpha, loc, scale } => {
                write!(f, "frechet:{alpha}")?;
                tail(f, loc, scale)
            }
            Marginal::Gumbel { loc, scale } => {
                write!(f, "gumbel")?;
                tail(f, loc, scale)
            }
            Marginal::ReverseWeibull { alpha, loc, scale } => {
                write!(f, "reverse-weibull:{alpha}")?;
                tail(f, loc, scale)
            }
        }
    }
}

fn check_shape(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config(format!("{what} must be finite and > 0, got {v}")))
    }
}

fn check_loc_scale(loc: f64, scale: f64) -> Result<()> {
    if !loc.is_finite() {
        return Err(config(format!("location must be finite, got {loc}")));
    }
    check_shape("scale", scale)
}

impl Marginal {
    pub fn frechet(alpha: f64) -> Result<Self> {
        Self::frechet_with(alpha, 0.0, 1.0)
    }

    pub fn frechet_with(alpha: f64, loc: f64, scale: f64) -> Result<Self> {
        check_shape("Frechet shape", alpha)?;
        check_loc_scale(loc, scale)?;
        Ok(Marginal::Frechet { alpha, loc, scale })
    }

    pub fn gumbel() -> Self {
        Marginal::Gumbel { loc: 0.0, scale: 1.0 }
    }

    pub fn gumbel_with(loc: f64, scale: f64) -> Result<Self> {
        check_loc_scale(loc, scale)?;
        Ok(Marginal::Gumbel { loc, scale })
    }

    pub fn reverse_weibull(alpha: f64) -> Result<Self> {
        Self::reverse_weibull_with(alpha, 0.0, 1.0)
    }

    pub fn reverse_weibull_with(alpha: f64, loc: f64, scale: f64) -> Result<Self> {
        check_shape("reverse Weibull shape", alpha)?;
        check_loc_scale(loc, scale)?;
        Ok(Marginal::ReverseWeibull { alpha, loc, scale })
    }

    fn loc_scale(&self) -> (f64, f64) {
        match *self {
            Marginal::Frechet { loc, scale, .. }
            | Marginal::Gumbel { loc, scale }
            | Marginal::ReverseWeibull { loc, scale, .. } => (loc, scale),
        }
    }

    /// `−log H(x)`, `+∞` at or below the lower endpoint.
    pub fn exponent(&self, x: f64) -> f64 {
        let (loc, scale) = self.loc_scale();
        let z = (x - loc) / scale;
        match *self {
            Marginal::Frechet { alpha, .. } => {
                if z <= 0.0 {
                    f64::INFINITY
                } else {
                    z.powf(-alpha)
                }
            }
            Marginal::Gumbel { .. } => (-z).exp(),
            Marginal::ReverseWeibull { alpha, .. } => {
                if z < 0.0 {
                    (-z).powf(alpha)
                } else {
                    0.0
                }
            }
        }
    }

    /// Solves `exponent(x) = v` for `v ∈ [0, ∞]`.
    pub fn exponent_inverse(&self, v: f64) -> f64 {
        let (loc, scale) = self.loc_scale();
        match *self {
            Marginal::Frechet { alpha, .. } => loc + scale * v.powf(-1.0 / alpha),
            Marginal::Gumbel { .. } => loc - scale * v.ln(),
            Marginal::ReverseWeibull { alpha, .. } => loc - scale * v.powf(1.0 / alpha),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (-self.exponent(x)).exp()
    }

    /// Left end of the support (`−∞` when unbounded).
    pub fn lower_endpoint(&self) -> f64 {
        match *self {
            Marginal::Frechet { loc, .. } => loc,
            _ => f64::NEG_INFINITY,
        }
    }

    /// `(A_t, B_t)` with `H^t(A_t x + B_t) = H(x)`.
    pub fn norming(&self, t: f64) -> (f64, f64) {
        let (loc, scale) = self.loc_scale();
        match *self {
            Marginal::Frechet { alpha, .. } => {
                let a = t.powf(1.0 / alpha);
                (a, loc * (1.0 - a))
            }
            Marginal::Gumbel { .. } => (1.0, scale * t.ln()),
            Marginal::ReverseWeibull { alpha, .. } => {
                let a = t.powf(-1.0 / alpha);
                (a, loc * (1.0 - a))
            }
        }
    }

    /// The standard grid mapped through this marginal's location and scale.
    pub fn standard_grid(&self) -> Vec<f64> {
        let (loc, scale) = self.loc_scale();
        let z: &[f64] = match self {
            Marginal::Frechet { .. } => &FRECHET_GRID,
            Marginal::Gumbel { .. } => &GUMBEL_GRID,
            Marginal::ReverseWeibull { .. } => &REVERSE_WEIBULL_GRID,
        };
        z.iter().map(|z| loc + scale * z).collect()
    }

    fn is_standard_frechet1(&self) -> bool {
        matches!(*self, Marginal::Frechet { alpha, loc, scale } if alpha == 1.0 && loc == 0.0 && scale == 1.0)
    }
}

/// Dependence structure of a multivariate max-stable law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dependence {
    Independence,
    CompleteDependence,
    /// Symmetric logistic with parameter `r ∈ (0, 1]`; bivariate, Fréchet(1) margins.
    Logistic(f64),
}

impl fmt::Display for Dependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dependence::Independence => write!(f, "independence"),
            Dependence::CompleteDependence => write!(f, "complete"),
            Dependence::Logistic(r) => write!(f, "logistic:{r}"),
        }
    }
}

/// A max-stable d.f. `H(x) = exp(−V(x))` on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxStableLaw {
    marginals: Vec<Marginal>,
    dependence: Dependence,
}

impl MaxStableLaw {
    pub fn new(marginals: Vec<Marginal>, dependence: Dependence) -> Result<Self> {
        if marginals.is_empty() {
            return Err(config("a max-stable law needs at least one coordinate"));
        }
        if let Dependence::Logistic(r) = dependence {
            if !(r > 0.0 && r <= 1.0) {
                return Err(config(format!("logistic dependence needs r in (0,1], got {r}")));
            }
            if marginals.len() != 2 {
                return Err(config("logistic dependence is bivariate only"));
            }
            if !marginals.iter().all(Marginal::is_standard_frechet1) {
                return Err(config("logistic dependence requires standard Frechet(1) marginals"));
            }
        }
        Ok(Self { marginals, dependence })
    }

    pub fn univariate(marginal: Marginal) -> Self {
        Self {
            marginals: vec![marginal],
            dependence: Dependence::Independence,
        }
    }

    pub fn bivariate(m1: Marginal, m2: Marginal, dependence: Dependence) -> Result<Self> {
        Self::new(vec![m1, m2], dependence)
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn dependence(&self) -> Dependence {
        self.dependence
    }

    /// `V(x) = μ([ℓ, x]^c) = −log H(x)`.
    pub fn exponent(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut per = self.marginals.iter().zip(x).map(|(m, &xi)| m.exponent(xi));
        match self.dependence {
            Dependence::Independence => per.sum(),
            Dependence::CompleteDependence => per.fold(0.0, f64::max),
            Dependence::Logistic(r) => {
                let v: Vec<f64> = per.by_ref().collect();
                let m = v.iter().copied().fold(0.0, f64::max);
                if m == 0.0 || m.is_infinite() {
                    return m;
                }
                let s: f64 = v.iter().map(|vi| (vi / m).powf(1.0 / r)).sum();
                m * s.powf(r)
            }
        }
    }

    /// Product of the per-coordinate standard grids.
    pub fn standard_grid(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self.marginals.iter().map(Marginal::standard_grid).collect();
        product_grid(&axes)
    }

    /// Per-coordinate `(A_t, B_t)`.
    pub fn norming(&self, t: f64) -> Vec<(f64, f64)> {
        self.marginals.iter().map(|m| m.norming(t)).collect()
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        self.marginals.iter().map(Marginal::lower_endpoint).collect()
    }
}

impl fmt::Display for MaxStableLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms: Vec<String> = self.marginals.iter().map(|m| m.to_string()).collect();
        if self.dim() == 1 {
            write!(f, "{}", ms[0])
        } else {
            write!(f, "{} [{}]", ms.join(" x "), self.dependence)
        }
    }
}

impl DistributionFunction for MaxStableLaw {
    fn dim(&self) -> usize {
        self.marginals.len()
    }

    fn cdf(&self, x: &[f64]) -> f64 {
        ms_cdf(self, x)
    }
}

/// Cartesian product of coordinate axes.
pub fn product_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// `H(x)`; exactly 0 when any coordinate is at or below its lower endpoint.
pub fn ms_cdf(law: &MaxStableLaw, x: &[f64]) -> f64 {
    if law.marginals.iter().zip(x).any(|(m, &xi)| xi <= m.lower_endpoint()) {
        return 0.0;
    }
    (-law.exponent(x)).exp()
}

/// The exponent measure `μ` of a max-stable law, seen through `x ↦ μ([ℓ, x]^c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentMeasure {
    lower_corner: Vec<f64>,
    law: MaxStableLaw,
}

impl ExponentMeasure {
    pub fn lower_corner(&self) -> &[f64] {
        &self.lower_corner
    }

    /// `μ([ℓ, x]^c)`; `+∞` unless `x > ℓ` in every coordinate.
    pub fn value(&self, x: &[f64]) -> f64 {
        if x.iter().zip(&self.lower_corner).any(|(xi, l)| xi <= l) {
            return f64::INFINITY;
        }
        self.law.exponent(x)
    }
}

pub fn exponent_measure(law: &MaxStableLaw) -> Result<ExponentMeasure> {
    // re-validate: a law built by hand-rolled struct update must still be supported
    let law = MaxStableLaw::new(law.marginals.clone(), law.dependence)?;
    Ok(ExponentMeasure {
        lower_corner: law.lower_corner(),
        law,
    })
}

/// Base d.f.s used in domain-of-attraction and random-maximum experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseDist {
    /// `G(x) = 1 − x^{−α}`, `x ≥ 1`.
    Pareto(f64),
    UnitExponential,
    /// Uniform on `(0, 1)`.
    Uniform,
}

impl fmt::Display for BaseDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseDist::Pareto(a) => write!(f, "pareto:{a}"),
            BaseDist::UnitExponential => write!(f, "exponential"),
            BaseDist::Uniform => write!(f, "uniform"),
        }
    }
}

impl BaseDist {
    pub fn pareto(alpha: f64) -> Result<Self> {
        check_shape("Pareto index", alpha)?;
        Ok(BaseDist::Pareto(alpha))
    }

    /// Survival function `1 − G(x)`.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            BaseDist::Pareto(alpha) => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-alpha)
                }
            }
            BaseDist::UnitExponential => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x).exp()
                }
            }
            BaseDist::Uniform => (1.0 - x).clamp(0.0, 1.0),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            BaseDist::UnitExponential if x > 0.0 => -(-x).exp_m1(),
            _ => 1.0 - self.sf(x),
        }
    }

    /// `log G(x)`, accurate when `G(x)` is close to 1.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        (-self.sf(x)).ln_1p()
    }

    /// The point with survival probability `s ∈ (0, 1]`.
    pub fn sf_inverse(&self, s: f64) -> f64 {
        match *self {
            BaseDist::Pareto(alpha) => s.powf(-1.0 / alpha),
            BaseDist::UnitExponential => -s.ln(),
            BaseDist::Uniform => 1.0 - s,
        }
    }

    /// One draw by inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sf_inverse(uniform_open0(rng))
    }

    /// The maximum of `k` independent draws, by inverting `G^k`.
    pub fn sample_max_of<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> f64 {
        let u = uniform_open0(rng);
        // G(x) = u^{1/k}  <=>  sf(x) = 1 − exp(ln(u)/k)
        let s = -(u.ln() / k as f64).exp_m1();
        if s <= 0.0 {
            // u^{1/k} rounds to 1: the top of the support
            return self.sf_inverse(f64::MIN_POSITIVE);
        }
        self.sf_inverse(s)
    }
}

/// Independent product of base d.f.s on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseLaw {
    coords: Vec<BaseDist>,
}

impl BaseLaw {
    pub fn new(coords: Vec<BaseDist>) -> Result<Self> {
        if coords.is_empty() {
            return Err(config("a base law needs at least one coordinate"));
        }
        Ok(Self { coords })
    }

    pub fn univariate(base: BaseDist) -> Self {
        Self { coords: vec![base] }
    }

    pub fn coords(&self) -> &[BaseDist] {
        &self.coords
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.coords.iter().map(|g| g.sample(rng)).collect()
    }
}

impl DistributionFunction for BaseLaw {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn cdf(&self, x: &[f64]) -> f64 {
        self.coords.iter().zip(x).map(|(g, &xi)| g.cdf(xi)).product()
    }
}

pub fn sample_base<R: Rng + ?Sized>(base: &BaseDist, rng: &mut R) -> f64 {
    base.sample(rng)
}

/// The MID d.f. of the maximum of a Poisson(`a`) number of draws from `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonMax {
    rate: f64,
    base: BaseLaw,
}

impl PoissonMax {
    pub fn new(rate: f64, base: BaseLaw) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(domain(format!("Poisson rate must be finite and > 0, got {rate}")));
        }
        Ok(Self { rate, base })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn base(&self) -> &BaseLaw {
        &self.base
    }

    /// `a (1 − G(x))`.
    pub fn exponent(&self, x: &[f64]) -> f64 {
        let coords = &self.base.coords;
        let sf = if coords.len() == 1 {
            coords[0].sf(x[0])
        } else {
            1.0 - self.base.cdf(x)
        };
        self.rate * sf
    }
}

impl DistributionFunction for PoissonMax {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn cdf(&self, x: &[f64]) -> f64 {
        (-self.exponent(x)).exp()
    }
}

/// `exp(−a(1 − G(x)))`.
pub fn poisson_max_cdf(a: f64, base: &BaseLaw, x: &[f64]) -> Result<f64> {
    Ok(PoissonMax::new(a, base.clone())?.cdf(x))
}

/// A base d.f. together with its norming sequences and max-stable limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractionTriple {
    base: BaseDist,
}

impl AttractionTriple {
    pub fn new(base: BaseDist) -> Self {
        Self { base }
    }

    pub fn shipped() -> [AttractionTriple; 3] {
        [
            AttractionTriple::new(BaseDist::Pareto(1.0)),
            AttractionTriple::new(BaseDist::UnitExponential),
            AttractionTriple::new(BaseDist::Uniform),
        ]
    }

    pub fn base(&self) -> BaseDist {
        self.base
    }

    /// `(a_n, b_n)`.
    pub fn norming(&self, n: u64) -> (f64, f64) {
        let n = n as f64;
        match self.base {
            BaseDist::Pareto(alpha) => (n.powf(1.0 / alpha), 0.0),
            BaseDist::UnitExponential => (1.0, n.ln()),
            BaseDist::Uniform => (1.0 / n, 1.0),
        }
    }

    /// The max-stable limit of `G^n(a_n x + b_n)`.
    pub fn target_marginal(&self) -> Marginal {
        match self.base {
            BaseDist::Pareto(alpha) => Marginal::Frechet {
                alpha,
                loc: 0.0,
                scale: 1.0,
            },
            BaseDist::UnitExponential => Marginal::gumbel(),
            BaseDist::Uniform => Marginal::ReverseWeibull {
                alpha: 1.0,
                loc: 0.0,
                scale: 1.0,
            },
        }
    }

    pub fn target(&self) -> MaxStableLaw {
        MaxStableLaw::univariate(self.target_marginal())
    }

    pub fn standard_grid(&self) -> Vec<f64> {
        self.target_marginal().standard_grid()
    }

    /// `G(a_n x + b_n)` as `log`, i.e. `log G` at the normed point.
    pub fn normed_ln_cdf(&self, n: u64, x: f64) -> f64 {
        let (a, b) = self.norming(n);
        self.base.ln_cdf(a * x + b)
    }

    pub fn normed_cdf(&self, n: u64, x: f64) -> f64 {
        let (a, b) = self.norming(n);
        self.base.cdf(a * x + b)
    }

    /// `n (1 − G(a_n x + b_n))`.
    pub fn normed_exponent(&self, n: u64, x: f64) -> f64 {
        let (a, b) = self.norming(n);
        n as f64 * self.base.sf(a * x + b)
    }

    /// `G^n(a_n x + b_n)`.
    pub fn normed_max_cdf(&self, n: u64, x: f64) -> f64 {
        (n as f64 * self.normed_ln_cdf(n, x)).exp()
    }
}

impl fmt::Display for AttractionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.base, self.target_marginal())
    }
}

/// Sup-norm distances of the `n`-th normed maximum from its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaGap {
    /// `sup |n(1 − G(a_n x + b_n)) − (−log H(x))|`
    pub exponent_gap: f64,
    /// `sup |G^n(a_n x + b_n) − H(x)|`
    pub cdf_gap: f64,
}

pub fn doa_gap(triple: &AttractionTriple, n: u64, grid: &[f64]) -> Result<DoaGap> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let target = triple.target_marginal();
    let mut gap = DoaGap {
        exponent_gap: 0.0,
        cdf_gap: 0.0,
    };
    for &x in grid {
        let v = target.exponent(x);
        gap.exponent_gap = gap.exponent_gap.max((triple.normed_exponent(n, x) - v).abs());
        gap.cdf_gap = gap.cdf_gap.max((triple.normed_max_cdf(n, x) - (-v).exp()).abs());
    }
    Ok(gap)
}
