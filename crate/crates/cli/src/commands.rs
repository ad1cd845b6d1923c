//! One function per subcommand. Each reads its settings from the
//! [`RunConfig`] and writes CSV or JSON to `out`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use jost_core::expansion::{
    effective_range_params, expand, fit_coefficients, FitOptions, Observable,
};
use jost_core::riccati::{log_branch_h, riccati_jy, tilde_jy, wronskian_residual};
use jost_core::spectrum::{
    find_spectral_points, levinson_check, partial_cross_section, phase_shift_curve, CurveOptions,
    RootQuality, SearchOptions, SearchRegion,
};
use jost_core::{
    Complex64, Error, ExpansionSet, JostPair, JostSolver, LogBranch, PartialWave, RiemannPoint,
    SpectralKind, SpectralPoint, UnitSystem,
};

use crate::config::{ConfigError, RunConfig};
use crate::output::{parts, sig, Csv};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    /// Unreadable or malformed input file.
    Input(String),
    Numerical(Error),
    /// A self-test check exceeded its tolerance.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numerical(Error::OutOfDomain { .. }) => 4,
            CliError::Numerical(Error::InvalidInput(_)) => 2,
            CliError::Numerical(_) | CliError::Check(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Check(m) => write!(f, "self-test failed: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult = Result<(), CliError>;

fn partial_wave(cfg: &RunConfig) -> PartialWave {
    PartialWave::new(cfg.int("solver", "ell"))
}

fn sheet_name(b: LogBranch) -> String {
    if b == LogBranch::PHYSICAL {
        "physical".into()
    } else if b == LogBranch::RESONANCE {
        "resonance".into()
    } else {
        format!("{:?}{:+}", b.half_plane, b.winding).to_lowercase()
    }
}

fn quality_name(q: RootQuality) -> &'static str {
    match q {
        RootQuality::Converged => "converged",
        RootQuality::Broad => "broad",
        RootQuality::StepOnly => "step-only",
    }
}

fn read_file(path: &str, what: &str) -> Result<String, CliError> {
    if path.is_empty() {
        return Err(CliError::Config(ConfigError {
            line: None,
            message: format!("{what} is not set"),
        }));
    }
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {what} '{path}': {e}")))
}

fn load_expansion(path: &str) -> Result<ExpansionSet, CliError> {
    let text = read_file(path, "expansion file")?;
    ExpansionSet::from_json(&text)
        .map_err(|e| CliError::Input(format!("expansion file '{path}': {e}")))
}

fn energy_grid(e_min: f64, e_max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && e_max >= e_min) {
        return Err(CliError::Config(ConfigError {
            line: None,
            message: format!("energy grid needs e_min <= e_max and a positive step (got {e_min}, {e_max}, {step})"),
        }));
    }
    let n = ((e_max - e_min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| e_min + step * i as f64).collect())
}

/// Bound states on the negative axis and resonances in the fourth quadrant.
pub fn spectrum(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let solver = cfg.solver()?;
    let pw = partial_wave(cfg);
    let opts = SearchOptions {
        re_step: cfg.float("spectrum", "re_step"),
        im_step: cfg.float("spectrum", "im_step"),
        ..Default::default()
    };
    let mut points: Vec<SpectralPoint> = Vec::new();
    let mut unresolved = Vec::new();
    let (b_min, b_max) = (
        cfg.float("spectrum", "bound_min"),
        cfg.float("spectrum", "bound_max"),
    );
    if b_min < b_max {
        let r = find_spectral_points(
            &solver,
            pw,
            &SearchRegion::real_axis(b_min, b_max, LogBranch::PHYSICAL),
            &opts,
        )?;
        let mut bound = r.points;
        bound.sort_by(|a, b| a.er.total_cmp(&b.er));
        points.extend(bound);
        unresolved.extend(r.unresolved);
    }
    let region = SearchRegion {
        re_min: cfg.float("spectrum", "res_re_min"),
        re_max: cfg.float("spectrum", "res_re_max"),
        im_min: cfg.float("spectrum", "res_im_min"),
        im_max: cfg.float("spectrum", "res_im_max"),
        sheet: LogBranch::RESONANCE,
    };
    if region.re_min < region.re_max && region.im_min < region.im_max {
        let r = find_spectral_points(&solver, pw, &region, &opts)?;
        let mut res = r.points;
        res.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.er.total_cmp(&b.er)));
        points.extend(res);
        unresolved.extend(r.unresolved);
    }
    let mut csv = Csv::new(out);
    csv.comment(&format!(
        "spectral points E = Er - i Gamma/2, l = {}",
        pw.ell
    ))?;
    csv.comment(&format!(
        "bound states: {}, resonances: {}",
        count(&points, SpectralKind::Bound),
        count(&points, SpectralKind::Resonance)
    ))?;
    csv.comment(&format!("unresolved seeds: {}", unresolved.len()))?;
    for z in &unresolved {
        csv.comment(&format!("  seed {} {}", sig(z.re), sig(z.im)))?;
    }
    csv.header(&[
        "kind",
        "sheet",
        "Er",
        "Gamma",
        "relative_residual",
        "newton_iters",
        "quality",
    ])?;
    for p in &points {
        csv.row(&[
            p.kind.as_str().into(),
            sheet_name(p.sheet),
            sig(p.er),
            sig(p.gamma),
            format!("{:.1e}", p.relative_residual),
            p.newton_iters.to_string(),
            quality_name(p.quality).into(),
        ])?;
    }
    Ok(())
}

fn count(points: &[SpectralPoint], kind: SpectralKind) -> usize {
    points.iter().filter(|p| p.kind == kind).count()
}

/// Expansion coefficients about `expand.e0` as JSON.
pub fn expand_cmd(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let solver = cfg.solver()?;
    let set = expand(
        &solver,
        partial_wave(cfg),
        cfg.complex("expand", "e0"),
        cfg.int("expand", "order") as usize,
    )?;
    writeln!(out, "{}", set.to_json())?;
    Ok(())
}

/// `f_in`, `f_out` and `S` at one point of the energy surface.
pub fn eval(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let solver = cfg.solver()?;
    let e = cfg.complex("eval", "energy");
    let sheet = match cfg.text("eval", "sheet") {
        "resonance" => LogBranch::RESONANCE,
        _ => LogBranch::PHYSICAL,
    };
    let at = RiemannPoint::new(e, sheet);
    let source = cfg.text("eval", "source");
    let (pair, ell) = match source {
        "expansion" => {
            let set = load_expansion(cfg.text("eval", "expansion_file"))?;
            (set.approx_jost(at)?, set.ell)
        }
        "factorized" => (
            solver.factorized(partial_wave(cfg), at)?,
            cfg.int("solver", "ell"),
        ),
        _ => (
            solver.direct(partial_wave(cfg), at)?,
            cfg.int("solver", "ell"),
        ),
    };
    let mut csv = Csv::new(out);
    csv.comment(&format!("Jost functions, l = {ell}, source = {source}"))?;
    let s = match pair.s_matrix() {
        Ok(s) => s,
        Err(err) => {
            csv.comment(&format!("S not available: {err}"))?;
            Complex64::new(f64::NAN, f64::NAN)
        }
    };
    csv.header(&[
        "E_re", "E_im", "sheet", "f_in_re", "f_in_im", "f_out_re", "f_out_im", "S_re", "S_im",
    ])?;
    let mut row: Vec<String> = parts(e).into();
    row.push(sheet_name(sheet));
    row.extend(parts(pair.f_in));
    row.extend(parts(pair.f_out));
    row.extend(parts(s));
    csv.row(&row)?;
    Ok(())
}

fn exact_sigma(solver: &JostSolver, ell: u32, e: f64) -> Result<f64, Error> {
    let pw = PartialWave::new(ell);
    let pair: JostPair = solver.direct(pw, RiemannPoint::physical(Complex64::new(e, 0.0)))?;
    partial_cross_section(&pair, pw, solver.units())
}

/// Partial and total cross sections on an energy grid, optionally next to
/// the cross section of an expansion file.
pub fn xsection(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let solver = cfg.solver()?;
    let ells = cfg.int_list("xsection", "ells");
    let grid = energy_grid(
        cfg.float("xsection", "e_min"),
        cfg.float("xsection", "e_max"),
        cfg.float("xsection", "e_step"),
    )?;
    if grid[0] <= 0.0 {
        return Err(CliError::Config(ConfigError {
            line: None,
            message: "xsection.e_min must be positive".into(),
        }));
    }
    let set = match cfg.text("xsection", "expansion_file") {
        "" => None,
        path => Some(load_expansion(path)?),
    };
    let mut rows = Vec::with_capacity(grid.len());
    let mut max_gap: f64 = 0.0;
    for &e in &grid {
        let mut row = vec![sig(e)];
        let mut total = 0.0;
        let mut partial = Vec::new();
        for &ell in &ells {
            let s = exact_sigma(&solver, ell, e)?;
            total += s;
            partial.push(sig(s));
        }
        row.push(sig(total));
        row.extend(partial);
        if let Some(set) = &set {
            let at = RiemannPoint::physical(Complex64::new(e, 0.0));
            let approx =
                partial_cross_section(&set.approx_jost(at)?, set.partial_wave(), &set.units)?;
            let exact = exact_sigma(&solver, set.ell, e)?;
            let gap = ((approx - exact) / exact).abs();
            max_gap = max_gap.max(gap);
            row.push(sig(approx));
            row.push(sig(gap));
        }
        rows.push(row);
    }
    let mut csv = Csv::new(out);
    csv.comment("cross sections in units of length")?;
    let mut columns: Vec<String> = vec!["E".into(), "sigma_total".into()];
    columns.extend(ells.iter().map(|l| format!("sigma_{l}")));
    if let Some(set) = &set {
        csv.comment(&format!(
            "expansion: l = {}, E0 = {}, N = {}; max relative gap {}",
            set.ell,
            set.e0,
            set.order,
            sig(max_gap)
        ))?;
        columns.push(format!("sigma_{}_expansion", set.ell));
        columns.push("relative_gap".into());
    }
    csv.header(&columns.iter().map(String::as_str).collect::<Vec<_>>())?;
    for row in &rows {
        csv.row(row)?;
    }
    Ok(())
}

/// Continuous phase shift and the Levinson count.
pub fn phaseshift(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let solver = cfg.solver()?;
    let pw = partial_wave(cfg);
    let opts = CurveOptions {
        step: cfg.float("phaseshift", "step"),
        refine: cfg.flag("phaseshift", "refine"),
        ..Default::default()
    };
    let curve = phase_shift_curve(
        &solver,
        pw,
        cfg.float("phaseshift", "e_min"),
        cfg.float("phaseshift", "e_max"),
        &opts,
    )?;
    let report = levinson_check(
        &curve,
        cfg.int("phaseshift", "bound_count") as usize,
        cfg.float("phaseshift", "levinson_tol"),
    );
    let mut csv = Csv::new(out);
    csv.comment(&format!("phase shift, l = {}", pw.ell))?;
    csv.comment(&format!(
        "delta(0+) = {}, delta(inf) = {}",
        sig(report.delta_zero),
        sig(report.delta_inf)
    ))?;
    csv.comment(&format!(
        "Levinson: difference = {} pi, expected {} pi, {}",
        sig(report.difference / PI),
        sig(report.expected / PI),
        if report.passed { "passed" } else { "failed" }
    ))?;
    for f in &curve.flagged {
        csv.comment(&format!(
            "jump of {} rad on [{}, {}]{}",
            sig(f.jump),
            sig(f.e_left),
            sig(f.e_right),
            if f.at_floor {
                " (narrower than the bisection floor)"
            } else {
                ""
            }
        ))?;
    }
    csv.header(&["E", "delta"])?;
    for (e, d) in curve.energies.iter().zip(&curve.delta) {
        csv.row(&[sig(*e), sig(*d)])?;
    }
    Ok(())
}

/// Scattering length and effective radius from an expansion about zero.
pub fn effrange(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let solver = cfg.solver()?;
    let pw = partial_wave(cfg);
    let set = expand(
        &solver,
        pw,
        Complex64::default(),
        cfg.int("effrange", "order") as usize,
    )?;
    let p = effective_range_params(&set)?;
    let mut csv = Csv::new(out);
    csv.comment(&format!("effective-range parameters, l = {}", pw.ell))?;
    csv.header(&["quantity", "value"])?;
    csv.row(&["a".into(), sig(p.a)])?;
    csv.row(&["r0".into(), sig(p.r0)])?;
    csv.row(&["a_log".into(), sig(p.a_log.unwrap_or(f64::NAN))])?;
    csv.row(&["a_inv_log".into(), sig(p.a_inv_log.unwrap_or(f64::NAN))])?;
    Ok(())
}

/// `(E, value)` pairs from a CSV file; `#` lines and a non-numeric header
/// line are skipped.
pub fn read_data(text: &str, path: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut data = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [e, v] => e.parse::<f64>().ok().zip(v.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(p) => data.push(p),
            None if data.is_empty() && fields.iter().all(|f| f.parse::<f64>().is_err()) => {}
            None => {
                return Err(CliError::Input(format!(
                    "data file '{path}' line {}: expected 'E,value', got '{line}'",
                    i + 1
                )))
            }
        }
    }
    Ok(data)
}

/// Coefficients fitted to measured cross sections or phase shifts.
pub fn fit(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let solver = cfg.solver()?;
    let path = cfg.text("fit", "data_file");
    let data = read_data(&read_file(path, "fit.data_file")?, path)?;
    let kind = match cfg.text("fit", "observable") {
        "phase-shift" => Observable::PhaseShift,
        _ => Observable::PartialCrossSection,
    };
    let report = fit_coefficients(
        &data,
        partial_wave(cfg),
        cfg.float("fit", "e0"),
        cfg.int("fit", "order") as usize,
        kind,
        solver.units(),
        solver.scale_r,
        &FitOptions::default(),
    )?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Input(e.to_string()))?;
    writeln!(out, "{json}")?;
    Ok(())
}

/// Wronskian and k-factorization checks of the Riccati functions.
pub fn riccati_selftest(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let units: UnitSystem = *cfg.solver()?.units();
    let mut wronskian: f64 = 0.0;
    let mut n_w = 0;
    let mut factor: f64 = 0.0;
    let mut n_f = 0;
    for ell in 0..=4 {
        let pw = PartialWave::new(ell);
        for modulus in [0.01, 0.1, 1.0, 10.0, 100.0] {
            for arg in [-1.2, -0.6, 0.0, 0.6, 1.2] {
                wronskian =
                    wronskian.max(wronskian_residual(pw, Complex64::from_polar(modulus, arg))?);
                n_w += 1;
            }
        }
        for e in [
            Complex64::new(0.5, 0.0),
            Complex64::new(5.0, -1.0),
            Complex64::new(2.0, 3.0),
        ] {
            let k = (e * units.c2mu).sqrt();
            let h = log_branch_h(k, 1.0, LogBranch::PHYSICAL)?;
            for r in [0.05, 1.0, 8.0] {
                let r = Complex64::new(r, 0.0);
                let (j, y) = riccati_jy(pw, k * r)?;
                let (jt, yt) = tilde_jy(pw, e, r, &units, 1.0)?;
                let lam = pw.lambda();
                let dj = (j - k.powf(lam + 1.0) * jt).norm();
                let dy = (y - k.powf(-lam) * yt - h * j).norm();
                factor = factor.max(dj.max(dy) / (j.norm() + y.norm()));
                n_f += 1;
            }
        }
    }
    let checks = [
        ("wronskian", n_w, wronskian, 1e-10),
        ("k-factorization", n_f, factor, 1e-9),
    ];
    let mut csv = Csv::new(out);
    csv.comment("Riccati-Bessel self-test")?;
    csv.header(&["check", "cases", "max_error", "tolerance", "passed"])?;
    for (name, n, err, tol) in checks {
        csv.row(&[
            name.into(),
            n.to_string(),
            format!("{err:.1e}"),
            format!("{tol:.0e}"),
            (err < tol).to_string(),
        ])?;
    }
    if let Some((name, _, err, tol)) = checks.iter().find(|c| !(c.2 < c.3)) {
        return Err(CliError::Check(format!(
            "{name}: {err:.1e} exceeds {tol:.0e}"
        )));
    }
    Ok(())
}
