//! Named experiments assembled into [`ExperimentReport`]s, plus the sample
//! tables behind the `sample` and `extremal` commands.

use crate::error::Result;
use crate::evd::{doa_gap, AttractionTriple, BaseLaw, DistributionFunction, MaxStableLaw};
use crate::extremal::{default_floor, sample_y_at_time, simulate_path, verify_subordination};
use crate::lt_families::{verify_lemma12, CountScheme, LaplaceFamily};
use crate::nmid::{mixture_cdf_with, nmid_cdf, same_type_decompose_on, sample_random_max, MaxStrategy, NMaxStableLaw};
use crate::quadrature::GaussLegendre;
use crate::rng::Substreams;

use super::report::{Cell, Check, ExperimentReport, Table};
use super::{run_definetti, run_thm24, run_thm34, thm24_checks, IDENTITY_TOL, LIMIT_TOL};

/// `s` values of the Poincaré residual table.
pub const POINCARE_S: [f64; 7] = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
/// Test values of θ.
pub const DEFAULT_THETAS: [f64; 3] = [0.5, 0.1, 0.01];
/// Agreement required between the closed-form composition and the mixture integral.
pub const MIXTURE_TOL: f64 = 1e-8;

fn grid_cells(x: &[f64]) -> Vec<Cell> {
    x.iter().map(|&v| Cell::Float(v)).collect()
}

fn coord_header(prefix: &str, d: usize) -> Vec<String> {
    if d == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=d).map(|i| format!("{prefix}{i}")).collect()
    }
}

fn table_with(name: &str, head: &[&str], coords: &[String], tail: &[&str]) -> Table {
    let mut header: Vec<&str> = head.to_vec();
    header.extend(coords.iter().map(String::as_str));
    header.extend_from_slice(tail);
    Table::new(name, &header)
}

/// Law grid, or the 1-d override applied to every coordinate.
pub fn law_grid(law: &MaxStableLaw, grid: Option<&[f64]>) -> Vec<Vec<f64>> {
    match grid {
        None => law.standard_grid(),
        Some(g) => {
            let axes = vec![g.to_vec(); law.dim()];
            crate::evd::product_grid(&axes)
        }
    }
}

/// Residuals of `P_θ(φ(θs)) = φ(s)`.
pub fn poincare(families: &[LaplaceFamily], thetas: &[f64], s_grid: &[f64]) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("poincare")
        .param(
            "families",
            families.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(";"),
        )
        .param("thetas", join(thetas));
    let mut table = Table::new("residuals", &["family", "theta", "s", "residual"]);
    for fam in families {
        let mut worst: f64 = 0.0;
        for &theta in thetas {
            let scheme = CountScheme::new(*fam, theta)?;
            for &s in s_grid {
                let r = (scheme.pgf(fam.eval(theta * s)) - fam.eval(s)).abs();
                worst = worst.max(r);
                table.push(vec![fam.to_string().into(), theta.into(), s.into(), r.into()]);
            }
        }
        report.checks.push(Check::below(
            format!("max Poincare residual, {fam}"),
            worst,
            IDENTITY_TOL,
        ));
    }
    report.tables.push(table);
    Ok(report)
}

/// Law of `θ N_θ` against the mixer `U`, one row per θ.
pub fn lemma12(
    family: &LaplaceFamily,
    thetas: &[f64],
    n: usize,
    threshold: f64,
    seed: u64,
) -> Result<ExperimentReport> {
    let streams = Substreams::new(seed);
    let mut report = ExperimentReport::new("lemma12")
        .param("family", family)
        .param("thetas", join(thetas))
        .param("samples", n)
        .with_seed(seed);
    let mut table = Table::new("distances", &["theta", "samples", "distance", "threshold", "pass"]);
    for (i, &theta) in thetas.iter().enumerate() {
        let r = verify_lemma12(family, theta, n, threshold, &streams.derive(i as u64))?;
        table.push(vec![
            theta.into(),
            r.samples.into(),
            r.distance.into(),
            r.threshold.into(),
            r.pass.into(),
        ]);
        report.checks.push(Check::below(
            format!("sup |F_(theta N) - F_U| at theta={theta}"),
            r.distance,
            threshold,
        ));
    }
    report.tables.push(table);
    Ok(report)
}

pub fn definetti(
    family: &LaplaceFamily,
    triple: &AttractionTriple,
    ns: &[u64],
    grid: Option<&[f64]>,
) -> Result<ExperimentReport> {
    let g = grid.map_or_else(|| triple.standard_grid(), <[f64]>::to_vec);
    let table = run_definetti(family, triple, ns, &g)?;
    let mut report = ExperimentReport::new("definetti")
        .param("family", family)
        .param("triple", triple)
        .param("ns", join_u(ns));
    if let Some(last) = table.last() {
        report.checks.push(Check::below(
            format!("Poisson-maximum gap at n={}", last.n),
            last.deterministic,
            LIMIT_TOL,
        ));
        report.checks.push(Check::below(
            format!("Laplace gap at n={}", last.n),
            last.random,
            LIMIT_TOL,
        ));
    }
    report.checks.push(Check::holds(
        "gaps nonincreasing in n",
        table.nonincreasing(IDENTITY_TOL),
    ));
    report.tables.push(table.to_table("convergence"));
    Ok(report)
}

pub fn thm24(
    family: &LaplaceFamily,
    triple: &AttractionTriple,
    ns: &[u64],
    grid: Option<&[f64]>,
) -> Result<ExperimentReport> {
    let g = grid.map_or_else(|| triple.standard_grid(), <[f64]>::to_vec);
    let table = run_thm24(family, triple, ns, &g)?;
    let mut report = ExperimentReport::new("thm24")
        .param("family", family)
        .param("triple", triple)
        .param("ns", join_u(ns));
    report.checks = thm24_checks(&table, LIMIT_TOL);
    report.tables.push(table.to_table("convergence"));
    Ok(report)
}

/// Closed-form composition against the mixture integral.
pub fn thm23(
    family: &LaplaceFamily,
    law: &MaxStableLaw,
    nodes: usize,
    grid: Option<&[f64]>,
) -> Result<ExperimentReport> {
    let f = NMaxStableLaw::new(*family, law.clone());
    let rule = GaussLegendre::new(nodes.max(crate::nmid::MIN_NODES));
    let d = law.dim();
    let mut table = table_with(
        "composition",
        &[],
        &coord_header("x", d),
        &["closed_form", "mixture", "abs_diff"],
    );
    let mut worst: f64 = 0.0;
    for x in law_grid(law, grid) {
        let c = nmid_cdf(&f, &x);
        let m = mixture_cdf_with(&f, &x, &rule)?;
        worst = worst.max((c - m).abs());
        let mut row = grid_cells(&x);
        row.extend([c.into(), m.into(), (c - m).abs().into()]);
        table.push(row);
    }
    let mut report = ExperimentReport::new("thm23")
        .param("family", family)
        .param("law", law)
        .param("nodes", rule.len());
    report
        .checks
        .push(Check::below("max |phi(-log H) - mixture integral|", worst, MIXTURE_TOL));
    report.tables.push(table);
    Ok(report)
}

pub fn thm31(
    family: &LaplaceFamily,
    law: &MaxStableLaw,
    thetas: &[f64],
    grid: Option<&[f64]>,
) -> Result<ExperimentReport> {
    let f = NMaxStableLaw::new(*family, law.clone());
    let g = law_grid(law, grid);
    let d = law.dim();
    let mut norm_cols = Vec::new();
    for i in 1..=d {
        norm_cols.push(format!("scale{i}"));
        norm_cols.push(format!("shift{i}"));
    }
    let mut table = table_with(
        "decomposition",
        &["theta", "residual", "type_residual"],
        &norm_cols,
        &[],
    );
    let mut report = ExperimentReport::new("thm31")
        .param("family", family)
        .param("law", law)
        .param("thetas", join(thetas));
    for &theta in thetas {
        let dec = same_type_decompose_on(&f, theta, &g)?;
        let mut row: Vec<Cell> = vec![theta.into(), dec.residual.into(), dec.type_residual.into()];
        for (a, b) in &dec.norming {
            row.push((*a).into());
            row.push((*b).into());
        }
        table.push(row);
        report.checks.push(Check::below(
            format!("sup |F - P_theta(F_theta)| at theta={theta}"),
            dec.residual,
            IDENTITY_TOL,
        ));
        report.checks.push(Check::below(
            format!("sup |F_theta - F((x-B)/A)| at theta={theta}"),
            dec.type_residual,
            IDENTITY_TOL,
        ));
    }
    report.tables.push(table);
    Ok(report)
}

pub fn thm32(family: &LaplaceFamily, law: &MaxStableLaw, n: usize, seed: u64) -> Result<ExperimentReport> {
    let f = NMaxStableLaw::new(*family, law.clone());
    let r = verify_subordination(&f, n, &Substreams::new(seed))?;
    let d = law.dim();
    let mut grid = table_with("grid", &[], &coord_header("x", d), &["empirical", "analytic"]);
    for row in &r.grid {
        let mut cells = grid_cells(&row.x);
        cells.extend([row.empirical.into(), row.analytic.into()]);
        grid.push(cells);
    }
    let mut ks = Table::new("ks", &["check", "samples", "distance", "critical", "pass"]);
    let mut report = ExperimentReport::new("thm32")
        .param("family", family)
        .param("law", law)
        .param("samples", n)
        .with_seed(seed);
    for (label, dist) in &r.checks {
        ks.push(vec![
            label.as_str().into(),
            n.into(),
            (*dist).into(),
            r.critical.into(),
            (*dist < r.critical).into(),
        ]);
        report
            .checks
            .push(Check::below(format!("KS of Y(Z) vs F, {label}"), *dist, r.critical));
    }
    report.tables.push(grid);
    report.tables.push(ks);
    Ok(report)
}

pub fn thm34(
    family: &LaplaceFamily,
    triple: &AttractionTriple,
    ns: &[u64],
    m: usize,
    grid: Option<&[f64]>,
    seed: u64,
) -> Result<ExperimentReport> {
    let g = grid.map_or_else(|| triple.standard_grid(), <[f64]>::to_vec);
    let streams = Substreams::new(seed);
    let mut report = ExperimentReport::new("thm34")
        .param("family", family)
        .param("triple", triple)
        .param("ns", join_u(ns))
        .param("samples", m)
        .with_seed(seed);
    let mut table: Option<Table> = None;
    for (i, &n) in ns.iter().enumerate() {
        let out = run_thm34(family, triple, n, m, &g, &streams.derive(i as u64))?;
        let t = out.report_table(n);
        match table.as_mut() {
            None => table = Some(t),
            Some(acc) => acc.rows.extend(t.rows),
        }
        for mut c in out.checks() {
            c.label = format!("{} (n={n})", c.label);
            report.checks.push(c);
        }
    }
    report.tables.extend(table);
    Ok(report)
}

/// Domain-of-attraction gaps for each triple and `n`.
pub fn doa_table(triples: &[AttractionTriple], ns: &[u64], grid: Option<&[f64]>) -> Result<ExperimentReport> {
    let mut table = Table::new("doa", &["triple", "n", "a_n", "b_n", "exponent_gap", "cdf_gap"]);
    let mut report = ExperimentReport::new("doa").param("ns", join_u(ns));
    for t in triples {
        let g = grid.map_or_else(|| t.standard_grid(), <[f64]>::to_vec);
        let mut prev = f64::INFINITY;
        let mut decreasing = true;
        for &n in ns {
            let gap = doa_gap(t, n, &g)?;
            let (a, b) = t.norming(n);
            decreasing &= gap.cdf_gap < prev;
            prev = gap.cdf_gap;
            table.push(vec![
                t.to_string().into(),
                n.into(),
                a.into(),
                b.into(),
                gap.exponent_gap.into(),
                gap.cdf_gap.into(),
            ]);
        }
        report
            .checks
            .push(Check::holds(format!("{t}: cdf gap decreasing in n"), decreasing));
    }
    report.tables.push(table);
    Ok(report)
}

/// `n` random maxima `max(X_1, …, X_{N_θ})`.
pub fn sample_randmax(scheme: &CountScheme, base: &BaseLaw, n: usize, strategy: MaxStrategy, seed: u64) -> Table {
    let draws = Substreams::new(seed).par_draws(n, |r| sample_random_max(scheme, base, strategy, r));
    let mut t = table_with("randmax", &["draw"], &coord_header("x", base.dim()), &[]);
    for (i, x) in draws.iter().enumerate() {
        let mut row = vec![Cell::from(i)];
        row.extend(grid_cells(x));
        t.push(row);
    }
    t
}

pub fn sample_mixer_table(family: &LaplaceFamily, n: usize, seed: u64) -> Table {
    let mixer = family.mixer();
    let draws = Substreams::new(seed).par_draws(n, |r| mixer.sample(r));
    let mut t = Table::new("mixer", &["draw", "u"]);
    for (i, u) in draws.into_iter().enumerate() {
        t.push(vec![i.into(), u.into()]);
    }
    t
}

pub fn sample_count_table(scheme: &CountScheme, n: usize, seed: u64) -> Table {
    let draws = Substreams::new(seed).par_draws(n, |r| scheme.sample(r));
    let mut t = Table::new("count", &["draw", "k"]);
    for (i, k) in draws.into_iter().enumerate() {
        t.push(vec![i.into(), k.into()]);
    }
    t
}

pub fn sample_extremal_marginal(law: &MaxStableLaw, time: f64, n: usize, seed: u64) -> Result<Table> {
    // validate once so the parallel draws cannot fail
    sample_y_at_time(law, time, &mut crate::rng::stream(seed))?;
    let draws = Substreams::new(seed).par_draws(n, |r| sample_y_at_time(law, time, r).expect("validated"));
    let mut t = table_with("extremal_marginal", &["draw"], &coord_header("y", law.dim()), &[]);
    for (i, y) in draws.iter().enumerate() {
        let mut row = vec![Cell::from(i)];
        row.extend(grid_cells(y));
        t.push(row);
    }
    Ok(t)
}

/// Jump records `(path_id, time, state)` of `paths` simulated paths.
pub fn extremal_paths(law: &MaxStableLaw, horizon: f64, floor: Option<f64>, paths: usize, seed: u64) -> Result<Table> {
    let floor = match floor {
        Some(f) => f,
        None => default_floor(law, horizon)?,
    };
    simulate_path(law, horizon, floor, &mut crate::rng::stream(seed))?;
    let sims = Substreams::new(seed).par_draws(paths, |r| simulate_path(law, horizon, floor, r).expect("validated"));
    let mut t = Table::new("paths", &["path_id", "time", "state"]);
    for (id, p) in sims.iter().enumerate() {
        for &(time, state) in &p.jumps {
            t.push(vec![id.into(), time.into(), state.into()]);
        }
    }
    Ok(t)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn join_u(v: &[u64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}
