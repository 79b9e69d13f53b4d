//! Random max-infinitely divisible laws `F = φ(−log H)`, random maxima and
//! the same-type decomposition `F = P_θ(F_θ)`.

use std::fmt;

use rand::Rng;

use crate::error::{config, domain, unsupported, Result};
use crate::evd::{BaseLaw, DistributionFunction, MaxStableLaw, PoissonMax};
use crate::lt_families::{CountScheme, LaplaceFamily};
use crate::quadrature::GaussLegendre;

/// Default node count of the mixture quadrature.
pub const DEFAULT_NODES: usize = 256;
/// Fewest nodes [`mixture_cdf`] accepts.
pub const MIN_NODES: usize = 64;

/// An MID d.f. `H`, represented by `−log H`.
#[derive(Debug, Clone, PartialEq)]
pub enum MidLaw {
    MaxStable(MaxStableLaw),
    PoissonMax(PoissonMax),
}

impl MidLaw {
    /// `−log H(x)`, `+∞` where `H(x) = 0`.
    pub fn exponent(&self, x: &[f64]) -> f64 {
        match self {
            MidLaw::MaxStable(h) => {
                if h.marginals().iter().zip(x).any(|(m, &xi)| xi <= m.lower_endpoint()) {
                    f64::INFINITY
                } else {
                    h.exponent(x)
                }
            }
            MidLaw::PoissonMax(p) => p.exponent(x),
        }
    }

    pub fn as_max_stable(&self) -> Option<&MaxStableLaw> {
        match self {
            MidLaw::MaxStable(h) => Some(h),
            MidLaw::PoissonMax(_) => None,
        }
    }
}

impl DistributionFunction for MidLaw {
    fn dim(&self) -> usize {
        match self {
            MidLaw::MaxStable(h) => h.dim(),
            MidLaw::PoissonMax(p) => p.dim(),
        }
    }

    fn cdf(&self, x: &[f64]) -> f64 {
        (-self.exponent(x)).exp()
    }
}

impl From<MaxStableLaw> for MidLaw {
    fn from(h: MaxStableLaw) -> Self {
        MidLaw::MaxStable(h)
    }
}

impl From<PoissonMax> for MidLaw {
    fn from(p: PoissonMax) -> Self {
        MidLaw::PoissonMax(p)
    }
}

/// `F(x) = φ(−log H(x))`: N-max-stable when `H` is max-stable, N-MID in general.
#[derive(Debug, Clone, PartialEq)]
pub struct NMaxStableLaw {
    family: LaplaceFamily,
    base: MidLaw,
}

impl NMaxStableLaw {
    pub fn new(family: LaplaceFamily, base: impl Into<MidLaw>) -> Self {
        Self {
            family,
            base: base.into(),
        }
    }

    pub fn family(&self) -> LaplaceFamily {
        self.family
    }

    pub fn base(&self) -> &MidLaw {
        &self.base
    }

    pub fn max_stable_base(&self) -> Option<&MaxStableLaw> {
        self.base.as_max_stable()
    }

    /// `F_θ(x) = φ(−θ log H(x))`.
    pub fn component_cdf(&self, theta: f64, x: &[f64]) -> f64 {
        self.family.eval(theta * self.base.exponent(x))
    }
}

impl DistributionFunction for NMaxStableLaw {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn cdf(&self, x: &[f64]) -> f64 {
        nmid_cdf(self, x)
    }
}

impl fmt::Display for NMaxStableLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.base {
            MidLaw::MaxStable(h) => write!(f, "{} o {}", self.family, h),
            MidLaw::PoissonMax(p) => write!(f, "{} o poisson-max(rate={})", self.family, p.rate()),
        }
    }
}

/// `φ(−log H(x))`, with `−log H` taken straight from the exponent measure.
pub fn nmid_cdf(law: &NMaxStableLaw, x: &[f64]) -> f64 {
    law.family.eval(law.base.exponent(x))
}

/// `∫_0^∞ H(x)^t dΛ(t)` with `Λ` the mixing law whose Laplace transform is `φ`,
/// by Gauss–Legendre quadrature on the mapped half-line.
pub fn mixture_cdf(law: &NMaxStableLaw, x: &[f64], nodes: usize) -> Result<f64> {
    if nodes < MIN_NODES {
        return Err(config(format!(
            "mixture quadrature needs >= {MIN_NODES} nodes, got {nodes}"
        )));
    }
    mixture_cdf_with(law, x, &GaussLegendre::new(nodes))
}

pub fn mixture_cdf_with(law: &NMaxStableLaw, x: &[f64], rule: &GaussLegendre) -> Result<f64> {
    let v = law.base.exponent(x);
    let mixer = law.family.mixer();
    match law.family {
        // Λ is the point mass at 1
        LaplaceFamily::Degenerate => Ok((-v).exp()),
        LaplaceFamily::Geometric => {
            if v.is_infinite() {
                return Ok(0.0);
            }
            Ok(rule.integrate_half_line(|t| (-t * v).exp() * mixer.density(t).expect("closed-form mixer density")))
        }
        LaplaceFamily::MittagLeffler(_) => Err(config(
            "the Mittag-Leffler mixing law has no closed-form density for quadrature",
        )),
    }
}

/// How the componentwise maximum of `K` draws is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaxStrategy {
    /// Draw all `K` vectors and reduce.
    #[default]
    Loop,
    /// Invert `G_i^K` per coordinate; same law, constant cost in `K`.
    Inversion,
}

/// Componentwise maximum of `N_θ` independent draws from `base`. For every
/// θ its d.f. is exactly `P_θ(G(x))`.
pub fn sample_random_max<R: Rng + ?Sized>(
    scheme: &CountScheme,
    base: &BaseLaw,
    strategy: MaxStrategy,
    rng: &mut R,
) -> Vec<f64> {
    let k = scheme.sample(rng);
    match strategy {
        MaxStrategy::Loop => {
            let mut max = vec![f64::NEG_INFINITY; base.dim()];
            for _ in 0..k {
                for (m, g) in max.iter_mut().zip(base.coords()) {
                    *m = m.max(g.sample(rng));
                }
            }
            max
        }
        MaxStrategy::Inversion => base.coords().iter().map(|g| g.sample_max_of(k, rng)).collect(),
    }
}

/// `F = P_θ(F_θ)` checked over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SameTypeDecomposition {
    pub theta: f64,
    /// `sup |F(x) − P_θ(F_θ(x))|`
    pub residual: f64,
    /// Per-coordinate `(A, B)` with `F_θ(x) = F((x − B)/A)`.
    pub norming: Vec<(f64, f64)>,
    /// `sup |F_θ(x) − F((x − B)/A)|`
    pub type_residual: f64,
    pub grid_points: usize,
}

pub fn same_type_decompose(law: &NMaxStableLaw, theta: f64) -> Result<SameTypeDecomposition> {
    let h = law
        .max_stable_base()
        .ok_or_else(|| unsupported("same-type decomposition needs a max-stable base law"))?;
    same_type_decompose_on(law, theta, &h.standard_grid())
}

pub fn same_type_decompose_on(law: &NMaxStableLaw, theta: f64, grid: &[Vec<f64>]) -> Result<SameTypeDecomposition> {
    let h = law
        .max_stable_base()
        .ok_or_else(|| unsupported("same-type decomposition needs a max-stable base law"))?;
    let scheme = CountScheme::new(law.family, theta)?;
    if grid.is_empty() {
        return Err(domain("empty evaluation grid"));
    }
    // H^θ(A x + B) = H(x)  =>  F_θ(y) = F((y − B)/A)
    let norming = h.norming(theta);
    let mut residual: f64 = 0.0;
    let mut type_residual: f64 = 0.0;
    for x in grid {
        let f = nmid_cdf(law, x);
        let f_theta = law.component_cdf(theta, x);
        residual = residual.max((f - scheme.pgf(f_theta)).abs());
        let pulled: Vec<f64> = x.iter().zip(&norming).map(|(xi, (a, b))| (xi - b) / a).collect();
        type_residual = type_residual.max((f_theta - nmid_cdf(law, &pulled)).abs());
    }
    Ok(SameTypeDecomposition {
        theta,
        residual,
        norming,
        type_residual,
        grid_points: grid.len(),
    })
}
