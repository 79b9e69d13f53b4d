//! Extremal processes `Y(t)` with `P{Y(t) ≤ x} = exp(−t V(x))`, exact
//! jump-chain paths, and the random-time identity `P{Y(Z) ≤ x} = φ(V(x))`.

use rand::Rng;

use crate::error::{domain, unsupported, Result};
use crate::evd::{Dependence, Marginal, MaxStableLaw};
use crate::harness::ks::{critical_1pct, ecdf, ks_distance};
use crate::nmid::{nmid_cdf, NMaxStableLaw};
use crate::rng::{exponential, Substreams};

/// `P{Y(t) ≤ x} = exp(−t V(x))`.
pub fn marginal_cdf(law: &MaxStableLaw, t: f64, x: &[f64]) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(domain(format!("time must be finite and > 0, got {t}")));
    }
    if law.marginals().iter().zip(x).any(|(m, &xi)| xi <= m.lower_endpoint()) {
        return Ok(0.0);
    }
    Ok((-t * law.exponent(x)).exp())
}

/// Jumps of one realized path above its floor.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalPath {
    /// `(time, state)`, times strictly increasing in `(0, horizon]`.
    pub jumps: Vec<(f64, f64)>,
    pub horizon: f64,
    /// States below the floor are not resolved.
    pub floor: f64,
}

impl ExtremalPath {
    /// `Y(t)`, or `None` while the path is still below the floor.
    pub fn state_at(&self, t: f64) -> Option<f64> {
        let k = self.jumps.partition_point(|&(s, _)| s <= t);
        (k > 0).then(|| self.jumps[k - 1].1)
    }

    /// `Y(horizon)`; the floor stands in when no jump occurred.
    pub fn terminal_state(&self) -> f64 {
        self.jumps.last().map_or(self.floor, |&(_, y)| y)
    }

    /// Number of jump states strictly above `level`.
    pub fn jumps_above(&self, level: f64) -> usize {
        self.jumps.iter().filter(|&&(_, y)| y > level).count()
    }

    pub fn is_monotone(&self) -> bool {
        self.jumps.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
            && self
                .jumps
                .iter()
                .all(|&(t, y)| t > 0.0 && t <= self.horizon && y > self.floor)
    }

    /// States at the dyadic times `horizon / 2^k`, `k = 0..=levels`.
    pub fn dyadic_skeleton(&self, levels: u32) -> Vec<(f64, Option<f64>)> {
        (0..=levels)
            .map(|k| {
                let t = self.horizon / f64::from(2u32.pow(k));
                (t, self.state_at(t))
            })
            .collect()
    }
}

fn path_marginal(law: &MaxStableLaw) -> Result<Marginal> {
    match law.marginals() {
        [m @ Marginal::Frechet { .. }] => Ok(*m),
        _ => Err(unsupported(
            "path simulation is implemented for univariate Frechet laws only",
        )),
    }
}

/// Floor at the 0.1% quantile of `Y(horizon/1000)`.
pub fn default_floor(law: &MaxStableLaw, horizon: f64) -> Result<f64> {
    let m = path_marginal(law)?;
    let t0 = horizon / 1000.0;
    Ok(m.exponent_inverse(1000f64.ln() / t0))
}

/// Exact jump chain: from state `y` the process waits an exponential time of
/// rate `V(y)` and then jumps to `W` with `P(W > w | W > y) = V(w)/V(y)`.
/// The chain starts at the floor, so its first jump is the first exceedance.
pub fn simulate_path<R: Rng + ?Sized>(
    law: &MaxStableLaw,
    horizon: f64,
    floor: f64,
    rng: &mut R,
) -> Result<ExtremalPath> {
    let m = path_marginal(law)?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(domain(format!("horizon must be finite and > 0, got {horizon}")));
    }
    if !(floor.is_finite() && floor > m.lower_endpoint()) {
        return Err(domain(format!(
            "floor must be finite and above the lower endpoint {}, got {floor}",
            m.lower_endpoint()
        )));
    }
    let mut jumps = Vec::new();
    let mut t = 0.0;
    let mut y = floor;
    loop {
        let rate = m.exponent(y);
        t += exponential(rng) / rate;
        if t > horizon {
            break;
        }
        let next = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                let w = m.exponent_inverse(rate * u);
                if w > y {
                    break w;
                }
            }
        };
        y = next;
        jumps.push((t, y));
    }
    Ok(ExtremalPath { jumps, horizon, floor })
}

/// Exact draw of `Y(t)` by inverting `exp(−t V(x))` coordinatewise.
pub fn sample_y_at_time<R: Rng + ?Sized>(law: &MaxStableLaw, t: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(t.is_finite() && t > 0.0) {
        return Err(domain(format!("time must be finite and > 0, got {t}")));
    }
    check_sampleable(law)?;
    Ok(draw_y(law, t, rng))
}

fn check_sampleable(law: &MaxStableLaw) -> Result<()> {
    if let Dependence::Logistic(_) = law.dependence() {
        return Err(unsupported(
            "logistic dependence is evaluated through its CDF only; exact sampling is not provided",
        ));
    }
    Ok(())
}

fn draw_y<R: Rng + ?Sized>(law: &MaxStableLaw, t: f64, rng: &mut R) -> Vec<f64> {
    // P(Y ≤ x) = P(E/t ≥ V_i(x_i) for all i) with E unit exponential
    match law.dependence() {
        Dependence::CompleteDependence => {
            let v = exponential(rng) / t;
            law.marginals().iter().map(|m| m.exponent_inverse(v)).collect()
        }
        _ => law
            .marginals()
            .iter()
            .map(|m| m.exponent_inverse(exponential(rng) / t))
            .collect(),
    }
}

/// `Ein(z) = ∫_0^z (1 − e^{−u})/u du`: the mean number of jumps above level
/// `y` by time `T` when `z = T V(y)`.
pub fn expected_jumps_above(law: &MaxStableLaw, horizon: f64, level: f64) -> Result<f64> {
    let m = path_marginal(law)?;
    Ok(ein(horizon * m.exponent(level)))
}

fn ein(z: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if z <= 0.0 {
        return 0.0;
    }
    if z <= 2.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            term *= -z / k as f64;
            sum -= term / k as f64;
        }
        return sum;
    }
    EULER_GAMMA + z.ln() + exp1(z)
}

/// `E_1(z)` for `z > 1` by its continued fraction (modified Lentz).
fn exp1(z: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// One row of the evaluation grid in a [`SubordinationReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub x: Vec<f64>,
    pub empirical: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubordinationReport {
    pub samples: usize,
    /// Largest distance over all checks.
    pub ks_distance: f64,
    pub critical: f64,
    pub pass: bool,
    /// Per-check distances: `"joint"` for d = 1, otherwise one per coordinate
    /// plus `"diagonal"` for `max_i Y_i(Z)` against `F(x, …, x)`.
    pub checks: Vec<(String, f64)>,
    pub grid: Vec<GridRow>,
}

/// Draws `Z` with Laplace transform `φ`, then `Y(Z)` from its conditional law,
/// and compares the sample with `F = φ(V)`.
pub fn verify_subordination(nlaw: &NMaxStableLaw, n: usize, streams: &Substreams) -> Result<SubordinationReport> {
    let h = nlaw
        .max_stable_base()
        .ok_or_else(|| unsupported("random-time subordination needs a max-stable base law"))?;
    check_sampleable(h)?;
    if n < 10_000 {
        return Err(domain(format!("subordination check needs n >= 10000 draws, got {n}")));
    }
    let mixer = nlaw.family().mixer();
    let draws = streams.par_draws(n, |rng| {
        let z = mixer.sample(rng);
        draw_y(h, z, rng)
    });
    let d = h.marginals().len();
    let critical = critical_1pct(n);
    let mut checks = Vec::new();

    let diagonal_cdf = |x: f64| nmid_cdf(nlaw, &vec![x; d]);
    let mut diag: Vec<f64> = draws
        .iter()
        .map(|y| y.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    diag.sort_by(f64::total_cmp);

    if d == 1 {
        checks.push(("joint".to_string(), ks_distance(&diag, diagonal_cdf)?));
    } else {
        for (i, m) in h.marginals().iter().enumerate() {
            let marginal = NMaxStableLaw::new(nlaw.family(), MaxStableLaw::univariate(*m));
            let mut col: Vec<f64> = draws.iter().map(|y| y[i]).collect();
            col.sort_by(f64::total_cmp);
            let dist = ks_distance(&col, |x| nmid_cdf(&marginal, &[x]))?;
            checks.push((format!("marginal_{}", i + 1), dist));
        }
        checks.push(("diagonal".to_string(), ks_distance(&diag, diagonal_cdf)?));
    }

    // for d >= 2 the rows sit on the diagonal, at the first coordinate's grid
    let grid = h.marginals()[0]
        .standard_grid()
        .into_iter()
        .map(|x| GridRow {
            x: vec![x; d],
            empirical: ecdf(&diag, x),
            analytic: diagonal_cdf(x),
        })
        .collect();

    let ks = checks.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(SubordinationReport {
        samples: n,
        ks_distance: ks,
        critical,
        pass: ks < critical,
        checks,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ks::{ks_distance_unsorted, two_sample_critical_1pct, two_sample_distance};
    use crate::lt_families::LaplaceFamily;
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;

    fn frechet_law(alpha: f64) -> MaxStableLaw {
        MaxStableLaw::univariate(Marginal::frechet(alpha).unwrap())
    }

    #[test]
    fn marginal_cdf_examples() {
        let h = frechet_law(1.0);
        let e1 = (-1.0f64).exp();
        assert_abs_diff_eq!(marginal_cdf(&h, 1.0, &[1.0]).unwrap(), e1);
        assert_abs_diff_eq!(marginal_cdf(&h, 2.0, &[2.0]).unwrap(), e1);
        let f1 = Marginal::frechet(1.0).unwrap();
        let b = MaxStableLaw::bivariate(f1, f1, Dependence::Independence).unwrap();
        assert_abs_diff_eq!(marginal_cdf(&b, 0.5, &[1.0, 1.0]).unwrap(), e1);
        assert!(marginal_cdf(&h, 0.0, &[1.0]).is_err());
        assert!(matches!(marginal_cdf(&h, -1.0, &[1.0]), Err(crate::Error::Domain(_))));
        assert_eq!(marginal_cdf(&h, 1.0, &[-1.0]).unwrap(), 0.0);
    }

    #[test]
    fn path_is_monotone() {
        let h = frechet_law(1.0);
        let mut rng = stream(80);
        for _ in 0..1000 {
            let p = simulate_path(&h, 1.0, 0.01, &mut rng).unwrap();
            assert!(p.is_monotone());
        }
    }

    #[test]
    fn path_configuration_errors() {
        let mut rng = stream(81);
        let g = MaxStableLaw::univariate(Marginal::gumbel());
        assert!(matches!(
            simulate_path(&g, 1.0, 0.1, &mut rng),
            Err(crate::Error::Unsupported(_))
        ));
        let f1 = Marginal::frechet(1.0).unwrap();
        let b = MaxStableLaw::bivariate(f1, f1, Dependence::Independence).unwrap();
        assert!(simulate_path(&b, 1.0, 0.1, &mut rng).is_err());
        let h = frechet_law(1.0);
        assert!(simulate_path(&h, 0.0, 0.1, &mut rng).is_err());
        assert!(simulate_path(&h, 1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn default_floor_is_tiny_quantile() {
        let h = frechet_law(1.0);
        let y0 = default_floor(&h, 10.0).unwrap();
        assert_abs_diff_eq!(marginal_cdf(&h, 0.01, &[y0]).unwrap(), 0.001, epsilon = 1e-15);
    }

    #[test]
    fn terminal_state_marginal() {
        let h = frechet_law(1.0);
        let s = Substreams::new(82);
        let paths = s.par_draws(10_000, |r| simulate_path(&h, 10.0, 0.01, r).unwrap());
        let below = paths.iter().filter(|p| p.terminal_state() <= 10.0).count() as f64 / 1e4;
        assert!((below - (-1.0f64).exp()).abs() < 0.015, "{below}");
        let terminal: Vec<f64> = paths.iter().map(ExtremalPath::terminal_state).collect();
        let d = ks_distance_unsorted(terminal, |x| marginal_cdf(&h, 10.0, &[x]).unwrap()).unwrap();
        assert!(d < critical_1pct(10_000), "{d}");
    }

    #[test]
    fn dyadic_skeleton_marginals() {
        let h = frechet_law(2.0);
        let paths = Substreams::new(83).par_draws(10_000, |r| simulate_path(&h, 8.0, 0.05, r).unwrap());
        for k in 0..4u32 {
            let t = 8.0 / f64::from(2u32.pow(k));
            let states: Vec<f64> = paths
                .iter()
                .map(|p| p.dyadic_skeleton(3)[k as usize].1.unwrap_or(0.05))
                .collect();
            let d = ks_distance_unsorted(states, |x| marginal_cdf(&h, t, &[x]).unwrap()).unwrap();
            assert!(d < critical_1pct(10_000), "t={t}: {d}");
        }
    }

    #[test]
    fn mean_jumps_above_level() {
        let h = frechet_law(1.0);
        let paths = Substreams::new(84).par_draws(20_000, |r| simulate_path(&h, 1.0, 0.01, r).unwrap());
        let mean = paths.iter().map(|p| p.jumps_above(1.0) as f64).sum::<f64>() / paths.len() as f64;
        let expected = expected_jumps_above(&h, 1.0, 1.0).unwrap();
        assert!((expected - 0.796_599_599_297_053).abs() < 1e-12, "{expected}");
        assert!((mean - expected).abs() < 0.03, "{mean} vs {expected}");
    }

    #[test]
    fn ein_series_and_asymptotic_agree() {
        // both branches near the switch point, and a brute-force trapezoid oracle
        let trap = |z: f64| {
            let n = 200_000;
            let h = z / n as f64;
            (1..n)
                .map(|k| {
                    let u = k as f64 * h;
                    (1.0 - (-u).exp()) / u
                })
                .sum::<f64>()
                * h
                + 0.5 * h * (1.0 + (1.0 - (-z).exp()) / z)
        };
        for z in [0.5, 1.0, 1.999, 2.001, 3.0, 10.0] {
            assert!((ein(z) - trap(z)).abs() < 1e-8, "z={z}");
        }
    }

    #[test]
    fn independent_max_increments() {
        let h = frechet_law(1.5);
        let (s, t) = (0.7, 2.0);
        let n = 10_000;
        let mut rng = stream(85);
        let mut joined: Vec<f64> = (0..n)
            .map(|_| {
                let a = sample_y_at_time(&h, s, &mut rng).unwrap()[0];
                let b = sample_y_at_time(&h, t - s, &mut rng).unwrap()[0];
                a.max(b)
            })
            .collect();
        let mut direct: Vec<f64> = (0..n).map(|_| sample_y_at_time(&h, t, &mut rng).unwrap()[0]).collect();
        joined.sort_by(f64::total_cmp);
        direct.sort_by(f64::total_cmp);
        let d = two_sample_distance(&joined, &direct).unwrap();
        assert!(d < two_sample_critical_1pct(n, n), "{d}");
        let d = ks_distance(&joined, |x| marginal_cdf(&h, t, &[x]).unwrap()).unwrap();
        assert!(d < critical_1pct(n), "{d}");
    }

    #[test]
    fn y_at_time_examples() {
        let h = frechet_law(1.0);
        let mut rng = stream(86);
        let n = 100_000;
        let ones: Vec<f64> = (0..n)
            .map(|_| sample_y_at_time(&h, 1.0, &mut rng).unwrap()[0])
            .collect();
        let below = ones.iter().filter(|&&x| x <= 1.0).count() as f64 / n as f64;
        assert!((below - (-1.0f64).exp()).abs() < 0.005);

        let mut fours: Vec<f64> = (0..n)
            .map(|_| sample_y_at_time(&h, 4.0, &mut rng).unwrap()[0])
            .collect();
        let mut ones = ones;
        ones.sort_by(f64::total_cmp);
        fours.sort_by(f64::total_cmp);
        for q in [n / 4, n / 2, 3 * n / 4] {
            let ratio = fours[q] / ones[q];
            assert!((ratio / 4.0 - 1.0).abs() < 0.02, "{ratio}");
        }

        let f1 = Marginal::frechet(1.0).unwrap();
        let c = MaxStableLaw::bivariate(f1, f1, Dependence::CompleteDependence).unwrap();
        for t in [0.3, 1.0, 5.0] {
            let y = sample_y_at_time(&c, t, &mut rng).unwrap();
            assert_eq!(y[0], y[1]);
        }
        let l = MaxStableLaw::bivariate(f1, f1, Dependence::Logistic(0.5)).unwrap();
        assert!(matches!(
            sample_y_at_time(&l, 1.0, &mut rng),
            Err(crate::Error::Unsupported(_))
        ));
        assert!(sample_y_at_time(&h, 0.0, &mut rng).is_err());
    }

    #[test]
    fn y_at_time_matches_marginal_cdf_for_all_types() {
        let mut rng = stream(87);
        let n = 20_000;
        for m in [
            Marginal::gumbel(),
            Marginal::reverse_weibull(2.0).unwrap(),
            Marginal::frechet_with(3.0, 1.0, 2.0).unwrap(),
        ] {
            let h = MaxStableLaw::univariate(m);
            let s: Vec<f64> = (0..n)
                .map(|_| sample_y_at_time(&h, 2.5, &mut rng).unwrap()[0])
                .collect();
            let d = ks_distance_unsorted(s, |x| marginal_cdf(&h, 2.5, &[x]).unwrap()).unwrap();
            assert!(d < critical_1pct(n), "{m}: {d}");
        }
    }

    #[test]
    fn subordination_examples() {
        let h = frechet_law(1.0);
        let deg = verify_subordination(
            &NMaxStableLaw::new(LaplaceFamily::Degenerate, h.clone()),
            20_000,
            &Substreams::new(88),
        )
        .unwrap();
        assert!(deg.pass, "{deg:?}");

        let geo = verify_subordination(
            &NMaxStableLaw::new(LaplaceFamily::Geometric, h.clone()),
            100_000,
            &Substreams::new(89),
        )
        .unwrap();
        assert!(geo.pass, "{geo:?}");
        let at_one = geo.grid.iter().find(|r| r.x[0] == 1.0).unwrap();
        assert!((at_one.empirical - 0.5).abs() < 0.005);
        assert_eq!(at_one.analytic, 0.5);

        let ml = verify_subordination(
            &NMaxStableLaw::new(LaplaceFamily::MittagLeffler(0.5), h),
            100_000,
            &Substreams::new(90),
        )
        .unwrap();
        assert!(ml.pass, "{ml:?}");
    }

    #[test]
    fn subordination_errors() {
        let f1 = Marginal::frechet(1.0).unwrap();
        let l = MaxStableLaw::bivariate(f1, f1, Dependence::Logistic(0.5)).unwrap();
        let r = verify_subordination(
            &NMaxStableLaw::new(LaplaceFamily::Geometric, l),
            10_000,
            &Substreams::new(1),
        );
        assert!(matches!(r, Err(crate::Error::Unsupported(_))));
        let r = verify_subordination(
            &NMaxStableLaw::new(LaplaceFamily::Geometric, frechet_law(1.0)),
            100,
            &Substreams::new(1),
        );
        assert!(r.is_err());
    }
}
