//! Laplace transforms solving the Poincaré equation `φ(s) = P(φ(θs))`,
//! the p.g.f.s `P_θ(s) = φ(φ⁻¹(s)/θ)` they induce, the count variable `N_θ`
//! and the limit mixer `U` with `θ N_θ → U`.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;

use crate::error::{config, domain, unsupported, Result};
use crate::harness::ks::grid_sup_distance;
use crate::rng::{exponential, uniform_open0, Substreams};

/// A closed-form standard solution of the Poincaré equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplaceFamily {
    /// `φ(s) = 1/(1+s)`; `N_θ` geometric, `U` unit exponential.
    Geometric,
    /// `φ(s) = 1/(1+s^ν)`, `0 < ν < 1`.
    MittagLeffler(f64),
    /// `φ(s) = e^{-s}`; `N_{1/n} ≡ n`, `U ≡ 1`.
    Degenerate,
}

impl fmt::Display for LaplaceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaplaceFamily::Geometric => write!(f, "geometric"),
            LaplaceFamily::MittagLeffler(nu) => write!(f, "mittag-leffler:{nu}"),
            LaplaceFamily::Degenerate => write!(f, "degenerate"),
        }
    }
}

impl LaplaceFamily {
    pub fn mittag_leffler(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(config(format!("Mittag-Leffler index must lie in (0,1), got {nu}")));
        }
        Ok(LaplaceFamily::MittagLeffler(nu))
    }

    /// All shipped families, with ν = 1/2 for Mittag-Leffler.
    pub fn shipped() -> [LaplaceFamily; 3] {
        [
            LaplaceFamily::Geometric,
            LaplaceFamily::MittagLeffler(0.5),
            LaplaceFamily::Degenerate,
        ]
    }

    /// `φ(s)`; `+∞` maps to 0.
    pub fn eval(&self, s: f64) -> f64 {
        if s == f64::INFINITY {
            return 0.0;
        }
        match *self {
            LaplaceFamily::Geometric => 1.0 / (1.0 + s),
            LaplaceFamily::MittagLeffler(nu) => 1.0 / (1.0 + s.powf(nu)),
            LaplaceFamily::Degenerate => (-s).exp(),
        }
    }

    /// `φ⁻¹(u)` for `u ∈ [0, 1]`, with `φ⁻¹(0) = +∞`.
    pub fn inverse(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return f64::INFINITY;
        }
        match *self {
            LaplaceFamily::Geometric => (1.0 - u) / u,
            LaplaceFamily::MittagLeffler(nu) => ((1.0 - u) / u).powf(1.0 / nu),
            LaplaceFamily::Degenerate => -u.ln(),
        }
    }

    /// Whether `theta` belongs to the family's parameter set Θ.
    pub fn admits(&self, theta: f64) -> bool {
        match self {
            LaplaceFamily::Degenerate => degenerate_index(theta).is_some(),
            _ => theta > 0.0 && theta < 1.0,
        }
    }

    pub fn count_scheme(&self, theta: f64) -> Result<CountScheme> {
        CountScheme::new(*self, theta)
    }

    pub fn mixer(&self) -> MixerU {
        MixerU { family: *self }
    }

    /// Lipschitz constant of φ on `[0, ∞)`, when finite.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            LaplaceFamily::Geometric | LaplaceFamily::Degenerate => Some(1.0),
            LaplaceFamily::MittagLeffler(_) => None,
        }
    }
}

/// Checked `φ(s)`.
pub fn lt_eval(family: &LaplaceFamily, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(domain(format!(
            "Laplace transform argument must be finite and >= 0, got {s}"
        )));
    }
    Ok(family.eval(s))
}

/// Checked `φ⁻¹(u)`.
pub fn lt_inverse(family: &LaplaceFamily, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(domain(format!("inverse Laplace transform needs u in (0,1], got {u}")));
    }
    Ok(family.inverse(u))
}

fn degenerate_index(theta: f64) -> Option<u64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return None;
    }
    let n = (1.0 / theta).round();
    if (1.0..9.0e15).contains(&n) && ((1.0 / theta) - n).abs() <= 1e-9 * n {
        Some(n as u64)
    } else {
        None
    }
}

/// The count variable `N_θ` with p.g.f. `P_θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountScheme {
    family: LaplaceFamily,
    theta: f64,
}

impl CountScheme {
    pub fn new(family: LaplaceFamily, theta: f64) -> Result<Self> {
        if !family.admits(theta) {
            let allowed = match family {
                LaplaceFamily::Degenerate => "{1/n : n >= 1}",
                _ => "(0,1)",
            };
            return Err(config(format!(
                "theta = {theta} is not admissible for the {family} family; expected {allowed}"
            )));
        }
        Ok(Self { family, theta })
    }

    pub fn family(&self) -> LaplaceFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `P_θ(s) = φ(φ⁻¹(s)/θ)`, evaluated through the Laplace transform.
    pub fn pgf(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 1.0;
        }
        if s <= 0.0 {
            return 0.0;
        }
        self.family.eval(self.family.inverse(s) / self.theta)
    }

    /// The same p.g.f. in its rational/power closed form.
    pub fn pgf_closed_form(&self, s: f64) -> f64 {
        match self.family {
            LaplaceFamily::Geometric => self.theta * s / (1.0 - (1.0 - self.theta) * s),
            LaplaceFamily::MittagLeffler(nu) => {
                let p = self.theta.powf(nu);
                p * s / (1.0 - (1.0 - p) * s)
            }
            LaplaceFamily::Degenerate => s.powf(self.degenerate_n() as f64),
        }
    }

    /// `E[N_θ]`.
    pub fn mean(&self) -> f64 {
        match self.family {
            LaplaceFamily::Geometric => 1.0 / self.theta,
            LaplaceFamily::MittagLeffler(nu) => self.theta.powf(-nu),
            LaplaceFamily::Degenerate => self.degenerate_n() as f64,
        }
    }

    fn degenerate_n(&self) -> u64 {
        degenerate_index(self.theta).expect("validated at construction")
    }

    /// Success probability of the geometric law of `N_θ`, if it is geometric.
    fn geometric_p(&self) -> Option<f64> {
        match self.family {
            LaplaceFamily::Geometric => Some(self.theta),
            LaplaceFamily::MittagLeffler(nu) => Some(self.theta.powf(nu)),
            LaplaceFamily::Degenerate => None,
        }
    }

    /// One draw of `N_θ ∈ {1, 2, …}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.geometric_p() {
            None => self.degenerate_n(),
            Some(p) if p >= 1.0 => 1,
            Some(p) => {
                // P(N > k) = (1-p)^k
                let u = uniform_open0(rng);
                let k = (u.ln() / (-p).ln_1p()).ceil();
                if k < 1.0 {
                    1
                } else if k >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    k as u64
                }
            }
        }
    }
}

pub fn pgf_theta(scheme: &CountScheme, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(domain(format!("p.g.f. argument must lie in [0,1], got {s}")));
    }
    Ok(scheme.pgf(s))
}

pub fn sample_count<R: Rng + ?Sized>(scheme: &CountScheme, rng: &mut R) -> u64 {
    scheme.sample(rng)
}

/// The limit `U` of `θ N_θ`, whose Laplace transform is `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixerU {
    family: LaplaceFamily,
}

impl MixerU {
    pub fn family(&self) -> LaplaceFamily {
        self.family
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            LaplaceFamily::Geometric => exponential(rng),
            LaplaceFamily::MittagLeffler(nu) => {
                let e = exponential(rng);
                e.powf(1.0 / nu) * positive_stable(nu, rng)
            }
            LaplaceFamily::Degenerate => 1.0,
        }
    }

    /// CDF of `U`, where known in closed form.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        match self.family {
            LaplaceFamily::Geometric => Some(if x <= 0.0 { 0.0 } else { -(-x).exp_m1() }),
            LaplaceFamily::Degenerate => Some(if x >= 1.0 { 1.0 } else { 0.0 }),
            LaplaceFamily::MittagLeffler(_) => None,
        }
    }

    /// Density of the mixing law `Λ`, where it has one in closed form.
    pub fn density(&self, t: f64) -> Option<f64> {
        match self.family {
            LaplaceFamily::Geometric => Some(if t < 0.0 { 0.0 } else { (-t).exp() }),
            _ => None,
        }
    }
}

pub fn sample_mixer<R: Rng + ?Sized>(mixer: &MixerU, rng: &mut R) -> f64 {
    mixer.sample(rng)
}

/// Positive `ν`-stable variate with Laplace transform `exp(-s^ν)`, by Kanter's
/// representation (the totally skewed Chambers–Mallows–Stuck draw).
pub fn positive_stable<R: Rng + ?Sized>(nu: f64, rng: &mut R) -> f64 {
    // u strictly inside (0, π)
    let u = PI
        * loop {
            let v: f64 = rng.random();
            if v > 0.0 {
                break v;
            }
        };
    let e = exponential(rng);
    let a = (nu * u).sin() / u.sin().powf(1.0 / nu);
    let b = (((1.0 - nu) * u).sin() / e).powf((1.0 - nu) / nu);
    a * b
}

/// Distance between the law of `θ N_θ` and the law of `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct KsReport {
    pub samples: usize,
    pub distance: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Grid used by [`verify_lemma12`]: `[0, 10]` in steps of `1e-3`.
pub fn lemma12_grid() -> Vec<f64> {
    (0..=10_000).map(|k| k as f64 / 1000.0).collect()
}

/// Draws `n` copies of `θ N_θ` and measures the sup distance, over
/// [`lemma12_grid`], between their empirical d.f. and the d.f. of `U`.
pub fn verify_lemma12(
    family: &LaplaceFamily,
    theta: f64,
    n: usize,
    threshold: f64,
    streams: &Substreams,
) -> Result<KsReport> {
    if let LaplaceFamily::MittagLeffler(nu) = family {
        return Err(unsupported(format!(
            "theta*N_theta does not converge to U for the Mittag-Leffler family (nu = {nu} < 1): \
             E[N_theta] = theta^-nu, so theta^nu*N_theta is the non-degenerate scaling"
        )));
    }
    if n == 0 {
        return Err(domain("sample size must be positive"));
    }
    let scheme = CountScheme::new(*family, theta)?;
    let mixer = family.mixer();
    let mut scaled = streams.par_draws(n, |rng| theta * scheme.sample(rng) as f64);
    scaled.sort_by(f64::total_cmp);
    let cdf = |x: f64| mixer.cdf(x).expect("closed-form mixer cdf");
    let distance = grid_sup_distance(&scaled, &lemma12_grid(), cdf)?;
    Ok(KsReport {
        samples: n,
        distance,
        threshold,
        pass: distance < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;

    const THETAS: [f64; 3] = [0.5, 0.1, 0.01];
    const S_GRID: [f64; 7] = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

    #[test]
    fn eval_examples() {
        assert_eq!(lt_eval(&LaplaceFamily::Geometric, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(lt_eval(&LaplaceFamily::Geometric, 2.0).unwrap(), 1.0 / 3.0);
        let ml = LaplaceFamily::mittag_leffler(0.5).unwrap();
        assert_abs_diff_eq!(lt_eval(&ml, 4.0).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        for f in LaplaceFamily::shipped() {
            assert_eq!(f.eval(0.0), 1.0);
        }
    }

    #[test]
    fn eval_rejects_bad_arguments() {
        let g = LaplaceFamily::Geometric;
        assert!(matches!(lt_eval(&g, -1.0), Err(crate::Error::Domain(_))));
        assert!(lt_eval(&g, f64::NAN).is_err());
        assert!(lt_eval(&g, f64::INFINITY).is_err());
        assert!(lt_inverse(&g, 0.0).is_err());
        assert!(lt_inverse(&g, 1.5).is_err());
        assert!(LaplaceFamily::mittag_leffler(1.0).is_err());
        assert!(LaplaceFamily::mittag_leffler(0.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(lt_inverse(&LaplaceFamily::Geometric, 1.0).unwrap(), 0.0);
        assert_eq!(lt_inverse(&LaplaceFamily::Geometric, 0.5).unwrap(), 1.0);
        assert_abs_diff_eq!(
            lt_inverse(&LaplaceFamily::Degenerate, (-2.0f64).exp()).unwrap(),
            2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn round_trip_on_zero_to_twenty() {
        for f in LaplaceFamily::shipped() {
            for k in 0..=2000 {
                let s = k as f64 / 100.0;
                let back = f.inverse(f.eval(s));
                assert!((back - s).abs() < 1e-10 * (1.0 + s), "{f} s={s} back={back}");
            }
        }
    }

    #[test]
    fn limits_and_monotonicity() {
        for f in LaplaceFamily::shipped() {
            let mut prev = f.eval(0.0);
            for k in 1..400 {
                let cur = f.eval(k as f64 * 0.25);
                assert!(cur < prev, "{f} not strictly decreasing");
                prev = cur;
            }
            assert!(f.eval(1e12) < 1e-5);
            assert_eq!(f.eval(f64::INFINITY), 0.0);
        }
    }

    #[test]
    fn poincare_identity() {
        for f in LaplaceFamily::shipped() {
            for theta in THETAS {
                let p = f.count_scheme(theta).unwrap();
                for s in S_GRID {
                    let r = (p.pgf(f.eval(theta * s)) - f.eval(s)).abs();
                    assert!(r < 1e-12, "{f} theta={theta} s={s} residual={r}");
                }
            }
        }
    }

    #[test]
    fn complete_monotonicity_spot_check() {
        // forward differences Δ^k φ alternate in sign: (-1)^k Δ^k φ >= 0
        let h = 0.25;
        for f in LaplaceFamily::shipped() {
            let values: Vec<f64> = (0..40).map(|i| f.eval(0.1 + i as f64 * h)).collect();
            let mut diff = values.clone();
            for order in 1..=6 {
                diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                for d in &diff {
                    assert!(sign * d >= -1e-15, "{f} order {order}: {d}");
                }
            }
        }
    }

    #[test]
    fn pgf_examples() {
        let g = LaplaceFamily::Geometric;
        let p = g.count_scheme(0.5).unwrap();
        assert_eq!(pgf_theta(&p, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(pgf_theta(&p, 0.5).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let p = g.count_scheme(0.1).unwrap();
        assert_abs_diff_eq!(pgf_theta(&p, 1.0 / 1.3).unwrap(), 0.25, epsilon = 1e-15);
        assert!(pgf_theta(&p, 1.1).is_err());
    }

    #[test]
    fn pgf_matches_closed_form() {
        for f in LaplaceFamily::shipped() {
            for theta in THETAS {
                let p = f.count_scheme(theta).unwrap();
                for k in 0..=100 {
                    let s = k as f64 / 100.0;
                    let tol = if f == LaplaceFamily::Geometric { 1e-14 } else { 1e-12 };
                    assert!((p.pgf(s) - p.pgf_closed_form(s)).abs() < tol, "{f} {theta} {s}");
                }
            }
        }
    }

    #[test]
    fn pgf_maps_unit_interval_monotonically() {
        for f in LaplaceFamily::shipped() {
            let p = f.count_scheme(0.1).unwrap();
            let mut prev = 0.0;
            for k in 0..=200 {
                let v = p.pgf(k as f64 / 200.0);
                assert!((0.0..=1.0).contains(&v));
                assert!(v >= prev);
                prev = v;
            }
            assert_eq!(p.pgf(1.0), 1.0);
        }
    }

    #[test]
    fn theta_admissibility() {
        assert!(CountScheme::new(LaplaceFamily::Geometric, 1.0).is_err());
        assert!(CountScheme::new(LaplaceFamily::Geometric, 0.0).is_err());
        assert!(CountScheme::new(LaplaceFamily::Degenerate, 0.3).is_err());
        assert!(CountScheme::new(LaplaceFamily::Degenerate, 1.0).is_ok());
        assert!(CountScheme::new(LaplaceFamily::Degenerate, 1.0 / 7.0).is_ok());
        assert!(matches!(
            CountScheme::new(LaplaceFamily::Geometric, 2.0),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn degenerate_count_is_constant() {
        let p = LaplaceFamily::Degenerate.count_scheme(0.1).unwrap();
        let mut rng = stream(99);
        for _ in 0..100 {
            assert_eq!(sample_count(&p, &mut rng), 10);
        }
    }

    fn count_mean(f: LaplaceFamily, theta: f64, seed: u64) -> f64 {
        let p = f.count_scheme(theta).unwrap();
        let mut rng = stream(seed);
        let n = 100_000;
        (0..n).map(|_| p.sample(&mut rng) as f64).sum::<f64>() / n as f64
    }

    #[test]
    fn geometric_count_mean() {
        let m = count_mean(LaplaceFamily::Geometric, 0.5, 11);
        assert!((m - 2.0).abs() < 0.03, "{m}");
    }

    #[test]
    fn mittag_leffler_count_mean() {
        let m = count_mean(LaplaceFamily::MittagLeffler(0.5), 0.25, 12);
        assert!((m - 2.0).abs() < 0.03, "{m}");
    }

    #[test]
    fn empirical_pgf_matches() {
        let n = 100_000;
        for f in LaplaceFamily::shipped() {
            for theta in [0.5, 0.1] {
                let p = f.count_scheme(theta).unwrap();
                let mut rng = stream(5);
                let draws: Vec<u64> = (0..n).map(|_| p.sample(&mut rng)).collect();
                assert!(draws.iter().all(|&k| k >= 1));
                for s in [0.25f64, 0.5, 0.75] {
                    let vals: Vec<f64> = draws.iter().map(|&k| s.powf(k as f64)).collect();
                    let mean = vals.iter().sum::<f64>() / n as f64;
                    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                    let se = (var / n as f64).sqrt();
                    let exact = p.pgf(s);
                    assert!((mean - exact).abs() < 0.01, "{f} {theta} {s}");
                    assert!((mean - exact).abs() <= 3.0 * se + 1e-12, "{f} {theta} {s}: 3 s.e.");
                }
            }
        }
    }

    #[test]
    fn mixer_laplace_transform_matches() {
        for f in LaplaceFamily::shipped() {
            let mixer = f.mixer();
            let mut rng = stream(21);
            let draws: Vec<f64> = (0..100_000).map(|_| sample_mixer(&mixer, &mut rng)).collect();
            assert!(draws.iter().all(|&u| u > 0.0));
            for s in [0.5, 1.0, 2.0] {
                let lt = draws.iter().map(|u| (-s * u).exp()).sum::<f64>() / draws.len() as f64;
                assert!((lt - f.eval(s)).abs() < 0.01, "{f} s={s} lt={lt}");
            }
        }
    }

    #[test]
    fn mixer_examples() {
        let mut rng = stream(8);
        assert_eq!(LaplaceFamily::Degenerate.mixer().sample(&mut rng), 1.0);

        let geo = LaplaceFamily::Geometric.mixer();
        let n = 100_000;
        let below = (0..n).filter(|_| geo.sample(&mut rng) <= 1.0).count() as f64 / n as f64;
        assert!((below - (1.0 - (-1.0f64).exp())).abs() < 0.005, "{below}");

        let ml = LaplaceFamily::MittagLeffler(0.5).mixer();
        let lt = (0..n).map(|_| (-ml.sample(&mut rng)).exp()).sum::<f64>() / n as f64;
        assert!((lt - 0.5).abs() < 0.005, "{lt}");
    }

    #[test]
    fn positive_stable_laplace_transform() {
        let mut rng = stream(31);
        for nu in [0.3, 0.5, 0.8] {
            let n = 100_000;
            let draws: Vec<f64> = (0..n).map(|_| positive_stable(nu, &mut rng)).collect();
            for s in [0.5f64, 1.0, 2.0] {
                let lt = draws.iter().map(|x| (-s * x).exp()).sum::<f64>() / n as f64;
                assert!((lt - (-s.powf(nu)).exp()).abs() < 0.01, "nu={nu} s={s}");
            }
        }
    }

    #[test]
    fn scaled_count_examples() {
        let streams = Substreams::new(2024);
        let deg = verify_lemma12(&LaplaceFamily::Degenerate, 0.01, 1000, 1e-3, &streams).unwrap();
        assert!(deg.distance <= 1e-3, "{deg:?}");

        let near = verify_lemma12(&LaplaceFamily::Geometric, 0.001, 100_000, 0.01, &streams).unwrap();
        assert!(near.pass && near.distance < 0.01, "{near:?}");

        let far = verify_lemma12(&LaplaceFamily::Geometric, 0.5, 100_000, 0.01, &streams).unwrap();
        assert!(far.distance > 0.05 && !far.pass, "{far:?}");
    }

    #[test]
    fn scaled_count_rejects_mittag_leffler() {
        let r = verify_lemma12(&LaplaceFamily::MittagLeffler(0.5), 0.01, 10, 0.01, &Substreams::new(1));
        assert!(matches!(r, Err(crate::Error::Unsupported(_))));
    }
}
