use super::*;
use crate::potential::{Model, RadialPotential};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn solver(rtol: f64) -> JostSolver {
    JostSolver::new(Model::reference_dot()).with_tolerance(rtol)
}

fn free() -> JostSolver {
    JostSolver::new(Model::new(RadialPotential::Zero, UnitSystem::DONOR))
}

#[test]
fn free_particle_has_no_spectrum_and_no_scattering() {
    let s = free();
    let pw = PartialWave::new(0);
    let region = SearchRegion {
        re_min: 0.0,
        re_max: 10.0,
        im_min: -5.0,
        im_max: 0.0,
        sheet: LogBranch::RESONANCE,
    };
    let r = find_spectral_points(&s, pw, &region, &SearchOptions::default()).unwrap();
    assert!(r.points.is_empty() && r.unresolved.is_empty());
    let curve = phase_shift_curve(&s, pw, 1e-3, 5.0, &CurveOptions::default()).unwrap();
    assert!(curve.delta.iter().all(|&d| d == 0.0));
    assert!(levinson_check(&curve, 0, 0.05).passed);
    assert_eq!(phase_shift(&s, pw, 2.0).unwrap(), 0.0);
    let xs = amplitudes_and_cross_sections(&s, &[0, 1, 2], 2.0, 16).unwrap();
    assert_eq!(xs.sigma_total, 0.0);
    assert!(xs.differential.iter().all(|&d| d == 0.0));
}

#[test]
fn bound_states_on_the_physical_axis() {
    let s = solver(1e-12);
    let r = find_spectral_points(
        &s,
        PartialWave::new(0),
        &SearchRegion::real_axis(-50.0, -0.01, LogBranch::PHYSICAL),
        &SearchOptions::default(),
    )
    .unwrap();
    let table = [-32.4850428093, -16.2643650096, -6.2711504590];
    assert_eq!(r.points.len(), 3, "{:?}", r.points);
    for (p, e) in r.points.iter().zip(table) {
        assert_eq!(p.kind, SpectralKind::Bound);
        assert_eq!(p.gamma, 0.0);
        assert_eq!(p.quality, RootQuality::Converged);
        assert!(p.relative_residual < POLE_RATIO);
        assert!((p.er - e).abs() < 1e-6, "{} vs {e}", p.er);
    }
}

#[test]
fn narrow_resonances_on_the_lower_rim() {
    let s = solver(1e-12);
    let pw = PartialWave::new(0);
    let r = find_spectral_points(
        &s,
        pw,
        &SearchRegion::real_axis(0.3, 5.5, LogBranch::RESONANCE),
        &SearchOptions::default(),
    );
    // On the real line Newton cannot leave the axis, so only the first,
    // practically real, resonance is caught there.
    let r = r.unwrap();
    assert!(r.points.iter().any(|p| (p.er - 0.5036180960).abs() < 1e-6));

    let region = SearchRegion {
        re_min: 0.3,
        re_max: 5.5,
        im_min: -0.5,
        im_max: 0.0,
        sheet: LogBranch::RESONANCE,
    };
    let r = find_spectral_points(&s, pw, &region, &SearchOptions::default()).unwrap();
    assert_eq!(r.points.len(), 2, "{:?}", r.points);
    let (first, second) = (r.points[0], r.points[1]);
    assert!((first.er - 0.5036180960).abs() < 1e-6);
    assert!(first.gamma < 1e-9);
    assert!((second.er - 4.9422440057).abs() < 1e-5 * 4.9422440057);
    assert!((second.gamma - 0.0000588188).abs() < 1e-6);
    for p in [first, second] {
        assert_eq!(p.kind, SpectralKind::Resonance);
        assert!(pole_zero_duality(&s, pw, &p).unwrap() < 1e-4);
    }
    assert_eq!(second.quality, RootQuality::Converged);
}

#[test]
fn newton_is_quick_near_a_resonance() {
    let s = solver(1e-12);
    let pw = PartialWave::new(0);
    // Root from an independent shooting calculation.
    let exact = c(7.105043502887168, -0.2855863192869928);
    let run = newton(
        |e| Ok(s.direct(pw, RiemannPoint::resonance(e))?.f_in),
        exact + c(0.07, -0.07),
        &NewtonOptions::default(),
        |e| e,
    )
    .unwrap();
    assert!(run.iterations <= 8, "{}", run.iterations);
    assert!((run.root - exact).norm() < 1e-8, "{}", run.root);
}

#[test]
fn differential_cross_section_integrates_to_the_total() {
    let s = solver(1e-10);
    let xs = amplitudes_and_cross_sections(&s, &[0, 1, 2, 3], 2.0, 64).unwrap();
    let total: f64 = xs.partials.iter().map(|p| p.sigma).sum();
    assert!((xs.integrated_differential() - total).abs() < 1e-8 * total);
    for (&phi, &d) in xs.angles.iter().zip(&xs.differential) {
        assert_eq!(xs.amplitude(phi).norm_sqr(), d);
    }
    // Backward scattering sums the partial amplitudes with alternating signs.
    let back: Complex64 = xs
        .partials
        .iter()
        .map(|p| p.f * PartialWave::new(p.ell).epsilon() * if p.ell % 2 == 0 { 1.0 } else { -1.0 })
        .sum();
    assert!((xs.amplitude(PI) - back).norm() < 1e-12 * back.norm());
    for p in &xs.partials {
        assert!(p.sigma <= 4.0 * PartialWave::new(p.ell).epsilon() / xs.k * (1.0 + 1e-12));
        assert!((p.s.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn cross_section_reaches_the_unitarity_peak() {
    let s = solver(1e-10);
    let pw = PartialWave::new(0);
    let (er, gamma) = (4.9422440177, 0.0000588123);
    let peak = (0..=40)
        .map(|i| {
            let e = er + gamma * (i as f64 / 4.0 - 5.0);
            let pair = s.direct(pw, RiemannPoint::physical(c(e, 0.0))).unwrap();
            let k = (s.units().c2mu * e).sqrt();
            partial_cross_section(&pair, pw, s.units()).unwrap() * k / 4.0
        })
        .fold(0.0, f64::max);
    assert!(peak > 0.99 && peak <= 1.0 + 1e-9, "{peak}");
}

#[test]
fn cross_sections_need_real_positive_energy() {
    let s = solver(1e-8);
    let pw = PartialWave::new(0);
    let pair = s.direct(pw, RiemannPoint::physical(c(2.0, 0.1))).unwrap();
    assert!(partial_cross_section(&pair, pw, s.units()).is_err());
    assert!(amplitudes_and_cross_sections(&s, &[0], -1.0, 8).is_err());
    assert!(phase_shift(&s, pw, 0.0).is_err());
}

#[test]
fn levinson_holds_on_the_refined_curve() {
    let s = solver(1e-8);
    let pw = PartialWave::new(0);
    let curve = phase_shift_curve(&s, pw, 1e-6, 10.0, &CurveOptions::default()).unwrap();
    let report = levinson_check(&curve, 3, 0.05);
    assert!(report.passed, "{report:?}");
    assert!((report.difference - 3.0 * PI).abs() < 1e-3);
    // The first resonance is narrower than the bisection floor and shows up
    // as a single flagged rise by pi.
    assert_eq!(curve.flagged.len(), 1);
    let f = curve.flagged[0];
    assert!(f.at_floor && (f.e_left - 0.5036180960).abs() < 1e-6);
    assert!((f.jump - PI).abs() < 1e-6);
    for w in curve.delta.windows(2) {
        assert!((w[1] - w[0]).abs() < FRAC_PI_2 || (w[1] - w[0] - PI).abs() < 1e-6);
    }

    let coarse = CurveOptions {
        step: 0.5,
        refine: false,
        ..Default::default()
    };
    let curve = phase_shift_curve(&s, pw, 1e-6, 10.0, &coarse).unwrap();
    let report = levinson_check(&curve, 3, 0.05);
    assert!(!report.passed);
    assert!(report.unresolved_segments > 0);
}

#[test]
fn pointwise_phase_matches_the_curve_mod_pi() {
    let s = solver(1e-10);
    let pw = PartialWave::new(0);
    let curve = phase_shift_curve(
        &s,
        pw,
        0.5,
        3.0,
        &CurveOptions {
            e_high: 10.0,
            ..Default::default()
        },
    )
    .unwrap();
    for (&e, &d) in curve.energies.iter().zip(&curve.delta).step_by(7) {
        let p = phase_shift(&s, pw, e).unwrap();
        let diff = (p - d).rem_euclid(PI);
        assert!(diff.min(PI - diff) < 1e-9, "{e} {p} {d}");
    }
}
