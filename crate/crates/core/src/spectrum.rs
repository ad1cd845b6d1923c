//! Spectral points as zeros of `f_in`, phase shifts with Levinson
//! bookkeeping, and partial-wave amplitudes and cross sections.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::IntegrationSettings;
use crate::error::{Error, Result};
use crate::jost::{JostPair, JostSolver, POLE_RATIO};
use crate::newton::{newton, NewtonOptions};
use crate::potential::UnitSystem;
use crate::riccati::{HalfPlane, LogBranch, PartialWave, RiemannPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralKind {
    /// Real negative energy on the physical sheet.
    Bound,
    /// `E_r - i Gamma/2` on the resonance sheet.
    Resonance,
    /// Any other zero of `f_in`.
    VirtualLike,
}

impl SpectralKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralKind::Bound => "bound",
            SpectralKind::Resonance => "resonance",
            SpectralKind::VirtualLike => "virtual-like",
        }
    }
}

/// How well a root satisfies the spectral condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootQuality {
    /// `|f_in| / max(|f_out|, 1/2)` below [`POLE_RATIO`].
    Converged,
    /// Broad resonance (`Gamma > E_r`) that meets the looser residual.
    Broad,
    /// Newton settled but the residual test is out of reach, as for very
    /// narrow resonances where `|df_in/dE|` is enormous.
    StepOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub er: f64,
    /// `-2 Im E`.
    pub gamma: f64,
    pub kind: SpectralKind,
    pub sheet: LogBranch,
    /// `|f_in|` at the root.
    pub residual: f64,
    /// `|f_in| / max(|f_out|, 1/2)`, with `|f_out|` dropped where it is not
    /// available.
    pub relative_residual: f64,
    pub newton_iters: usize,
    pub quality: RootQuality,
}

impl SpectralPoint {
    pub fn energy(&self) -> Complex64 {
        Complex64::new(self.er, -0.5 * self.gamma)
    }
}

/// Rectangle of complex energies on one sheet. A zero-height rectangle is
/// searched as a line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub sheet: LogBranch,
}

impl SearchRegion {
    pub fn real_axis(e_min: f64, e_max: f64, sheet: LogBranch) -> Self {
        SearchRegion {
            re_min: e_min,
            re_max: e_max,
            im_min: 0.0,
            im_max: 0.0,
            sheet,
        }
    }

    fn is_line(&self) -> bool {
        self.im_min == self.im_max
    }

    fn contains(&self, e: Complex64) -> bool {
        let tol = 1e-9 * e.norm().max(1.0);
        e.re >= self.re_min - tol
            && e.re <= self.re_max + tol
            && e.im >= self.im_min - tol
            && e.im <= self.im_max + tol
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(Error::InvalidInput(
                "search region needs finite, ordered bounds".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub re_step: f64,
    pub im_step: f64,
    /// Integration tolerance of the seeding grid.
    pub grid_rtol: f64,
    /// Residual accepted for broad resonances.
    pub broad_residual: f64,
    /// Roots closer than this (relative to `max(1, |E|)`) are merged.
    pub dedup_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            re_step: 0.25,
            im_step: 0.5,
            grid_rtol: 1e-6,
            broad_residual: 1e-6,
            dedup_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted by `Re E`.
    pub points: Vec<SpectralPoint>,
    /// Interior seeds from which Newton did not converge.
    pub unresolved: Vec<Complex64>,
    /// Grid nodes where `f_in` could not be evaluated.
    pub failed_nodes: usize,
}

fn linspace(a: f64, b: f64, step: f64) -> Vec<f64> {
    if a == b {
        return vec![a];
    }
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

fn jost_at(solver: &JostSolver, pw: PartialWave, at: RiemannPoint) -> Result<JostPair> {
    if at.branch.winding == 0 {
        solver.direct(pw, at)
    } else {
        solver.factorized(pw, at)
    }
}

fn relative_residual(pair: &JostPair) -> f64 {
    let out = if pair.f_out.is_finite() {
        pair.f_out.norm()
    } else {
        0.0
    };
    pair.f_in.norm() / out.max(0.5)
}

fn classify(e: Complex64, sheet: LogBranch) -> SpectralKind {
    match sheet.half_plane {
        HalfPlane::Upper if sheet.winding == 0 && e.re < 0.0 && e.im == 0.0 => SpectralKind::Bound,
        HalfPlane::Lower if sheet.winding == 0 && e.re > 0.0 && e.im <= 0.0 => {
            SpectralKind::Resonance
        }
        _ => SpectralKind::VirtualLike,
    }
}

/// Zeros of `f_in` in `region`: Newton from every local minimum of `|f_in|`
/// on a coarse grid. `|f_in|` has no interior minima away from its zeros, so
/// each minimum marks a zero within about a grid cell.
pub fn find_spectral_points(
    solver: &JostSolver,
    pw: PartialWave,
    region: &SearchRegion,
    opts: &SearchOptions,
) -> Result<SpectrumReport> {
    region.validate()?;
    if solver.model.potential.is_zero() {
        return Ok(SpectrumReport {
            points: Vec::new(),
            unresolved: Vec::new(),
            failed_nodes: 0,
        });
    }
    let res = linspace(region.re_min, region.re_max, opts.re_step);
    let ims = linspace(region.im_min, region.im_max, opts.im_step);
    let coarse = JostSolver {
        integration: IntegrationSettings {
            rtol: opts.grid_rtol,
            ..solver.integration
        },
        ..solver.clone()
    };
    let mut failed_nodes = 0;
    let mut grid = vec![vec![f64::NAN; res.len()]; ims.len()];
    for (i, &y) in ims.iter().enumerate() {
        for (j, &x) in res.iter().enumerate() {
            let e = Complex64::new(x, y);
            if e.norm() < 1e-12 {
                continue;
            }
            match jost_at(&coarse, pw, RiemannPoint::new(e, region.sheet)) {
                Ok(p) if p.f_in.is_finite() => grid[i][j] = p.f_in.norm().ln(),
                _ => failed_nodes += 1,
            }
        }
    }

    let mut seeds = Vec::new();
    for i in 0..ims.len() {
        for j in 0..res.len() {
            let v = grid[i][j];
            if !v.is_finite() {
                continue;
            }
            let mut lowest = true;
            let mut below_some = false;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= ims.len() as i64 || jj >= res.len() as i64 {
                        continue;
                    }
                    let w = grid[ii as usize][jj as usize];
                    if w.is_finite() {
                        lowest &= v <= w;
                        below_some |= v < w;
                    }
                }
            }
            if lowest && below_some {
                let edge = j == 0
                    || j + 1 == res.len()
                    || (!region.is_line() && (i == 0 || i + 1 == ims.len()));
                seeds.push((Complex64::new(res[j], ims[i]), edge));
            }
        }
    }

    let lower = region.sheet.half_plane == HalfPlane::Lower;
    let line = region.is_line().then_some(region.im_min);
    let project = |e: Complex64| {
        let mut e = e;
        if let Some(y) = line {
            e.im = y;
        } else if lower && e.im > 0.0 {
            e.im = 0.0;
        }
        e
    };
    let mut points: Vec<SpectralPoint> = Vec::new();
    let mut unresolved = Vec::new();
    for (seed, edge) in seeds {
        let run = newton(
            |e| Ok(jost_at(solver, pw, RiemannPoint::new(e, region.sheet))?.f_in),
            seed,
            &NewtonOptions::default(),
            project,
        );
        let run = match run {
            Ok(r) if region.contains(r.root) => r,
            Ok(_) => continue,
            Err(_) => {
                if !edge {
                    unresolved.push(seed);
                }
                continue;
            }
        };
        let at = RiemannPoint::new(run.root, region.sheet);
        let pair = jost_at(solver, pw, at)?;
        let rel = relative_residual(&pair);
        let er = run.root.re;
        let gamma = -2.0 * run.root.im;
        let quality = if rel < POLE_RATIO {
            RootQuality::Converged
        } else if gamma > er.abs() && rel < opts.broad_residual {
            RootQuality::Broad
        } else {
            log::debug!(
                "root {} accepted on step size {:.1e}, residual {:.1e}",
                run.root,
                run.last_step,
                run.value.norm()
            );
            RootQuality::StepOnly
        };
        let point = SpectralPoint {
            er,
            gamma,
            kind: classify(run.root, region.sheet),
            sheet: region.sheet,
            residual: pair.f_in.norm(),
            relative_residual: rel,
            newton_iters: run.iterations,
            quality,
        };
        let tol = opts.dedup_tol * run.root.norm().max(1.0);
        match points
            .iter_mut()
            .find(|p| (p.energy() - run.root).norm() < tol)
        {
            Some(p) if p.relative_residual > rel => *p = point,
            Some(_) => {}
            None => points.push(point),
        }
    }
    points.sort_by(|a, b| a.er.total_cmp(&b.er));
    Ok(SpectrumReport {
        points,
        unresolved,
        failed_nodes,
    })
}

/// `|f_out| / max(|f_in|, 1/2)` at `conj(E)` on the opposite half-plane:
/// the mirror image of a zero of `f_in` is a zero of `f_out`.
pub fn pole_zero_duality(
    solver: &JostSolver,
    pw: PartialWave,
    point: &SpectralPoint,
) -> Result<f64> {
    let half_plane = match point.sheet.half_plane {
        HalfPlane::Upper => HalfPlane::Lower,
        HalfPlane::Lower => HalfPlane::Upper,
    };
    let at = RiemannPoint::new(
        point.energy().conj(),
        LogBranch {
            half_plane,
            winding: point.sheet.winding,
        },
    );
    let pair = jost_at(solver, pw, at)?;
    if !pair.f_out.is_finite() {
        return Err(Error::SubdominantOutgoing);
    }
    Ok(pair.f_out.norm() / pair.f_in.norm().max(0.5))
}

/// `atan2(b, a)` from the real-axis `(a, b)`; continuous in `E` up to whole
/// turns because `(a, b)` never vanish together.
fn raw_phase(solver: &JostSolver, pw: PartialWave, e: f64) -> Result<f64> {
    let (a, b) = solver.ab(pw, RiemannPoint::physical(Complex64::new(e, 0.0)))?;
    Ok(b.re.atan2(a.re))
}

/// Phase shift at real `e > 0`, reduced to `[0, pi)`.
pub fn phase_shift(solver: &JostSolver, pw: PartialWave, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::InvalidInput("phase shifts need E > 0".into()));
    }
    if solver.model.potential.is_zero() {
        return Ok(0.0);
    }
    Ok(raw_phase(solver, pw, e)?.rem_euclid(PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    /// Grid spacing up to the requested upper energy.
    pub step: f64,
    /// Bisect intervals where the phase moves by more than `pi/4`; jumps
    /// above `pi/2` left at the floor are flagged.
    pub refine: bool,
    /// Smallest interval bisection goes down to.
    pub min_de: f64,
    /// Energy where the high-energy limit is extrapolated from.
    pub e_high: f64,
    /// Growth factor of the grid below the first step, where the phase
    /// varies like `1 / ln E`, and between the requested upper energy and
    /// `e_high`.
    pub tail_ratio: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            step: 0.05,
            refine: true,
            min_de: 1e-10,
            e_high: 2000.0,
            tail_ratio: 1.1,
        }
    }
}

/// Interval where the phase jumps by more than `pi/2` between neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlaggedSegment {
    pub e_left: f64,
    pub e_right: f64,
    /// Change of the phase counted across the interval.
    pub jump: f64,
    /// Whether bisection reached its floor here. Wider segments were never
    /// refined, so the phase count across them is a guess.
    pub at_floor: bool,
}

/// Phase shift unwrapped by continuity and shifted so that `delta -> 0` at
/// high energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftCurve {
    pub ell: u32,
    pub energies: Vec<f64>,
    pub delta: Vec<f64>,
    /// Threshold limit `delta(0+)`.
    pub delta_zero: f64,
    /// Extrapolated high-energy limit; zero up to the extrapolation error.
    pub delta_inf: f64,
    pub flagged: Vec<FlaggedSegment>,
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

struct Unwrapper<'a> {
    solver: &'a JostSolver,
    pw: PartialWave,
    opts: &'a CurveOptions,
    energies: Vec<f64>,
    delta: Vec<f64>,
    flagged: Vec<FlaggedSegment>,
}

impl Unwrapper<'_> {
    /// Appends `(e1, raw1)` after the last point, bisecting in between as
    /// needed.
    fn push(&mut self, e1: f64, raw1: f64) -> Result<()> {
        let e0 = *self.energies.last().expect("curve starts with one point");
        let d0 = *self.delta.last().expect("curve starts with one point");
        let step = wrap_pi(raw1 - d0);
        let at_floor = !self.opts.refine || e1 - e0 <= self.opts.min_de;
        if step.abs() <= FRAC_PI_4 || (at_floor && step.abs() <= FRAC_PI_2) {
            self.energies.push(e1);
            self.delta.push(d0 + step);
            return Ok(());
        }
        if !at_floor {
            let em = 0.5 * (e0 + e1);
            let rm = raw_phase(self.solver, self.pw, em)?;
            self.push(em, rm)?;
            return self.push(e1, raw1);
        }
        // Unresolved: a resonance narrower than the floor turns the phase by
        // about +pi; without refinement the nearest branch is taken.
        let jump = if self.opts.refine {
            (raw1 - d0).rem_euclid(2.0 * PI)
        } else {
            step
        };
        self.flagged.push(FlaggedSegment {
            e_left: e0,
            e_right: e1,
            jump,
            at_floor: self.opts.refine,
        });
        self.energies.push(e1);
        self.delta.push(d0 + jump);
        Ok(())
    }
}

/// Unwrapped phase shift on `[e_min, e_max]`, continued to `opts.e_high`
/// for the high-energy normalization.
pub fn phase_shift_curve(
    solver: &JostSolver,
    pw: PartialWave,
    e_min: f64,
    e_max: f64,
    opts: &CurveOptions,
) -> Result<PhaseShiftCurve> {
    if !(e_min > 0.0) || !(e_max > e_min) || !(opts.step > 0.0) || !(opts.tail_ratio > 1.0) {
        return Err(Error::InvalidInput(
            "phase-shift curve needs 0 < e_min < e_max, a positive step and tail ratio > 1".into(),
        ));
    }
    let first = (e_min + opts.step).min(e_max);
    let mut grid = Vec::new();
    let mut e = e_min;
    while e < first {
        grid.push(e);
        e *= opts.tail_ratio;
    }
    grid.extend(linspace(first, e_max, opts.step));
    let mut e = e_max;
    while e < opts.e_high {
        e = (e * opts.tail_ratio).min(opts.e_high);
        grid.push(e);
    }
    if solver.model.potential.is_zero() {
        return Ok(PhaseShiftCurve {
            ell: pw.ell,
            delta: vec![0.0; grid.len()],
            energies: grid,
            delta_zero: 0.0,
            delta_inf: 0.0,
            flagged: Vec::new(),
        });
    }
    let first = raw_phase(solver, pw, grid[0])?;
    let mut unwrap = Unwrapper {
        solver,
        pw,
        opts,
        energies: vec![grid[0]],
        delta: vec![first],
        flagged: Vec::new(),
    };
    for &e in &grid[1..] {
        let r = raw_phase(solver, pw, e)?;
        unwrap.push(e, r)?;
    }
    let Unwrapper {
        energies,
        mut delta,
        flagged,
        ..
    } = unwrap;

    // delta ~ delta_inf + c1 k^-1 + c2 k^-2 + c3 k^-3 over the upper half of
    // the tail; the leading Born term c1 vanishes for potentials of zero mean
    // and higher orders then dominate.
    let e_top = *energies.last().expect("grid is not empty");
    let tail: Vec<(f64, f64)> = energies
        .iter()
        .zip(&delta)
        .filter(|(&e, _)| e >= 0.5 * e_top)
        .map(|(&e, &d)| (e, d))
        .collect();
    let limit = if tail.len() >= 4 {
        let m = DMatrix::from_fn(tail.len(), 4, |i, j| tail[i].0.powf(-0.5 * j as f64));
        let rhs = DVector::from_iterator(tail.len(), tail.iter().map(|p| p.1));
        m.svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::NoConvergence(format!("tail fit: {e}")))?[0]
    } else {
        *delta.last().expect("grid is not empty")
    };
    let shift = PI * (limit / PI).round();
    delta.iter_mut().for_each(|d| *d -= shift);

    // cot(delta) -> -infinity at threshold, so delta(0+) is the next multiple
    // of pi at or above the lowest computed value.
    let delta_zero = PI * (delta[0] / PI).ceil();
    Ok(PhaseShiftCurve {
        ell: pw.ell,
        energies,
        delta,
        delta_zero,
        delta_inf: limit - shift,
        flagged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevinsonReport {
    pub delta_zero: f64,
    pub delta_inf: f64,
    pub difference: f64,
    /// `pi * bound_count`.
    pub expected: f64,
    pub bound_count: usize,
    pub tolerance: f64,
    pub flagged_segments: usize,
    /// Flagged segments wider than the bisection floor.
    pub unresolved_segments: usize,
    pub passed: bool,
}

/// `delta(0+) - delta(inf) = pi N` for `N` bound states. A curve with
/// unresolved segments cannot certify the count and fails.
pub fn levinson_check(
    curve: &PhaseShiftCurve,
    bound_count: usize,
    tolerance: f64,
) -> LevinsonReport {
    let difference = curve.delta_zero - curve.delta_inf;
    let expected = PI * bound_count as f64;
    let unresolved_segments = curve.flagged.iter().filter(|f| !f.at_floor).count();
    LevinsonReport {
        delta_zero: curve.delta_zero,
        delta_inf: curve.delta_inf,
        difference,
        expected,
        bound_count,
        tolerance,
        flagged_segments: curve.flagged.len(),
        unresolved_segments,
        passed: unresolved_segments == 0 && (difference - expected).abs() < tolerance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialAmplitude {
    pub ell: u32,
    pub s: Complex64,
    /// `(s - 1) / sqrt(2 pi i k)`.
    pub f: Complex64,
    /// `(eps_l / k) |s - 1|^2`.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSections {
    pub energy: f64,
    pub k: f64,
    pub partials: Vec<PartialAmplitude>,
    pub sigma_total: f64,
    /// Equally spaced scattering angles on `[0, 2 pi)`.
    pub angles: Vec<f64>,
    /// `|F(phi)|^2` at `angles`.
    pub differential: Vec<f64>,
}

impl CrossSections {
    /// `F(phi) = sum eps_l f_l cos(l phi)`.
    pub fn amplitude(&self, phi: f64) -> Complex64 {
        self.partials
            .iter()
            .map(|p| p.f * PartialWave::new(p.ell).epsilon() * (p.ell as f64 * phi).cos())
            .sum()
    }

    /// Periodic trapezoid sum of the differential cross section; exact for
    /// `2 l_max` below the number of angles.
    pub fn integrated_differential(&self) -> f64 {
        let n = self.differential.len() as f64;
        self.differential.iter().sum::<f64>() * 2.0 * PI / n
    }
}

fn momentum(units: &UnitSystem, e: f64) -> f64 {
    (units.c2mu * e).sqrt()
}

/// `sigma_l = (eps_l / k) |s - 1|^2` from a physical-sheet pair at real `E`.
pub fn partial_cross_section(pair: &JostPair, pw: PartialWave, units: &UnitSystem) -> Result<f64> {
    let e = pair.at.energy;
    if e.im != 0.0 || !(e.re > 0.0) {
        return Err(Error::InvalidInput("cross sections need real E > 0".into()));
    }
    let s = pair.s_matrix()?;
    Ok(pw.epsilon() / momentum(units, e.re) * (s - 1.0).norm_sqr())
}

/// Amplitudes, partial and total cross sections and `n_angles` samples of
/// the differential cross section at real `e > 0`.
pub fn amplitudes_and_cross_sections(
    solver: &JostSolver,
    ells: &[u32],
    e: f64,
    n_angles: usize,
) -> Result<CrossSections> {
    if !(e > 0.0) || n_angles == 0 {
        return Err(Error::InvalidInput(
            "cross sections need E > 0 and at least one angle".into(),
        ));
    }
    let units = solver.units();
    let k = momentum(units, e);
    let norm = (Complex64::new(0.0, 2.0 * PI * k)).sqrt();
    let mut partials = Vec::with_capacity(ells.len());
    for &ell in ells {
        let pw = PartialWave::new(ell);
        let pair = solver.direct(pw, RiemannPoint::physical(Complex64::new(e, 0.0)))?;
        let s = pair.s_matrix()?;
        partials.push(PartialAmplitude {
            ell,
            s,
            f: (s - 1.0) / norm,
            sigma: pw.epsilon() / k * (s - 1.0).norm_sqr(),
        });
    }
    let sigma_total = partials.iter().map(|p| p.sigma).sum();
    let mut out = CrossSections {
        energy: e,
        k,
        partials,
        sigma_total,
        angles: (0..n_angles)
            .map(|i| 2.0 * PI * i as f64 / n_angles as f64)
            .collect(),
        differential: Vec::new(),
    };
    out.differential = out
        .angles
        .iter()
        .map(|&phi| out.amplitude(phi).norm_sqr())
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests;
