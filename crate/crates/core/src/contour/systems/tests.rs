use super::*;
use crate::contour::{build_contour, ContourSettings, ThetaPolicy};
use crate::potential::{RadialPotential, TabulatedPotential, UnitSystem};
use crate::riccati::log_branch_h;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tight() -> IntegrationSettings {
    IntegrationSettings::with_tolerance(1e-12)
}

fn assemble_in(
    model: &Model,
    pw: PartialWave,
    at: &RiemannPoint,
    at_bt: (Complex64, Complex64),
    scale_r: f64,
) -> Complex64 {
    let k = at.momentum(&model.units);
    let h = log_branch_h(k, scale_r, at.branch).unwrap();
    let k2l = (k * k).powi(pw.ell as i32);
    (at_bt.0 + k2l * (h - I) * at_bt.1) * 0.5
}

#[test]
fn free_particle_coefficients_stay_at_initial_values() {
    let model = Model::new(RadialPotential::Zero, UnitSystem::DONOR);
    let pw = PartialWave::new(1);
    let s = ContourSettings::default();
    let at = RiemannPoint::physical(c(1.3, 0.0));
    let contour = build_contour(at.momentum(&model.units), ThetaPolicy::RealAxis, &s).unwrap();
    let f = integrate_finout(&model, pw, &at, &contour, &tight()).unwrap();
    assert!((f.values[0] - 0.5).norm() < 1e-15 && (f.values[1] - 0.5).norm() < 1e-14);
    let ab = integrate_ab(&model, pw, &at, &contour, &tight()).unwrap();
    assert!((ab.values[0] - 1.0).norm() < 1e-15 && ab.values[1].norm() < 1e-15);
    let t = integrate_tilde(
        &model,
        pw,
        at.energy,
        &contour,
        2.0,
        DomainPolicy::Strict,
        &tight(),
    )
    .unwrap();
    assert!((t.values[0] - 1.0).norm() < 1e-15 && t.values[1].norm() < 1e-15);
    let x = integrate_expansion(
        &model,
        pw,
        at.energy,
        3,
        &contour,
        2.0,
        DomainPolicy::Strict,
        &tight(),
    )
    .unwrap();
    assert!((x.values[0] - 1.0).norm() < 1e-15);
    assert!(x.values[1..].iter().all(|v| v.norm() < 1e-15));
}

#[test]
fn three_routes_to_f_in_agree_on_real_axis() {
    let model = Model::reference_dot();
    let s = ContourSettings::default();
    for ell in 0..4 {
        let pw = PartialWave::new(ell);
        for &e in &[0.3, 1.0, 6.0, 20.0] {
            let at = RiemannPoint::physical(c(e, 0.0));
            let contour =
                build_contour(at.momentum(&model.units), ThetaPolicy::RealAxis, &s).unwrap();
            let f = integrate_finout(&model, pw, &at, &contour, &tight()).unwrap();
            let ab = integrate_ab(&model, pw, &at, &contour, &tight()).unwrap();
            let t = integrate_tilde(
                &model,
                pw,
                at.energy,
                &contour,
                2.0,
                DomainPolicy::Strict,
                &tight(),
            )
            .unwrap();
            let from_ab = (ab.values[0] - I * ab.values[1]) * 0.5;
            let from_tilde = assemble_in(&model, pw, &at, t.pair(), 2.0);
            let scale = f.values[0].norm().max(1.0);
            assert!(
                (f.values[0] - from_ab).norm() < 1e-8 * scale,
                "l {ell} E {e}: {} vs {}",
                f.values[0],
                from_ab
            );
            assert!(
                (f.values[0] - from_tilde).norm() < 1e-8 * scale,
                "l {ell} E {e}: {} vs {}",
                f.values[0],
                from_tilde
            );
            // f_out is the complex conjugate on the real axis.
            assert!((f.values[1] - f.values[0].conj()).norm() < 1e-8 * scale);
        }
    }
}

#[test]
fn rotated_contour_reaches_resonance_region() {
    let model = Model::reference_dot();
    let s = ContourSettings::default();
    let pw = PartialWave::new(0);
    let at = RiemannPoint::resonance(c(7.55, -1.06));
    let k = at.momentum(&model.units);
    let contour = build_contour(k, ThetaPolicy::ZeroImKr, &s).unwrap();
    let f = integrate_finout(&model, pw, &at, &contour, &tight()).unwrap();
    let t = integrate_tilde(
        &model,
        pw,
        at.energy,
        &contour,
        2.0,
        DomainPolicy::Strict,
        &tight(),
    )
    .unwrap();
    let from_tilde = assemble_in(&model, pw, &at, t.pair(), 2.0);
    assert!((f.values[0] - from_tilde).norm() < 1e-8 * f.values[0].norm().max(1.0));
    // Out of domain on the real axis.
    let real = build_contour(k, ThetaPolicy::RealAxis, &s).unwrap();
    assert!(matches!(
        integrate_tilde(
            &model,
            pw,
            at.energy,
            &real,
            2.0,
            DomainPolicy::Strict,
            &tight()
        ),
        Err(Error::OutOfDomain { .. })
    ));
}

#[test]
fn tilde_is_contour_independent() {
    let model = Model::reference_dot();
    let s = ContourSettings::default();
    for ell in 0..3 {
        let pw = PartialWave::new(ell);
        for &e in &[c(2.0, -0.1), c(0.5, 0.0), c(5.0, -0.3)] {
            let a = integrate_tilde(
                &model,
                pw,
                e,
                &Contour::new(0.0, &s).unwrap(),
                2.0,
                DomainPolicy::Strict,
                &tight(),
            )
            .unwrap();
            let theta = -0.03;
            let b = integrate_tilde(
                &model,
                pw,
                e,
                &Contour::new(theta, &s).unwrap(),
                2.0,
                DomainPolicy::Strict,
                &tight(),
            )
            .unwrap();
            for i in 0..2 {
                let scale = a.values[i].norm().max(1.0);
                assert!(
                    (a.values[i] - b.values[i]).norm() < 1e-8 * scale,
                    "l {ell} E {e} i {i}: {} {}",
                    a.values[i],
                    b.values[i]
                );
            }
        }
    }
}

#[test]
fn bound_state_region_is_finite_on_real_axis() {
    // Deep below threshold F_out grows like exp(2 kappa r) but F_in converges.
    let model = Model::reference_dot();
    let s = ContourSettings::default();
    let pw = PartialWave::new(0);
    let at = RiemannPoint::physical(c(-30.0, 0.0));
    let contour = build_contour(at.momentum(&model.units), ThetaPolicy::RealAxis, &s).unwrap();
    let f = integrate_finout(&model, pw, &at, &contour, &tight()).unwrap();
    assert!(f.values[0].is_finite());
    assert!(f.values[1].is_nan());
    assert!(f.values[0].im.abs() < 1e-10 * f.values[0].norm().max(1.0));
    let looser = integrate_finout(
        &model,
        pw,
        &at,
        &contour,
        &IntegrationSettings::with_tolerance(1e-10),
    )
    .unwrap();
    assert!((looser.values[0] - f.values[0]).norm() < 1e-7 * f.values[0].norm().max(1.0));
}

#[test]
fn expansion_leading_terms_equal_tilde_values() {
    let model = Model::reference_dot();
    let s = ContourSettings::default();
    let pw = PartialWave::new(1);
    let e0 = c(1.2, 0.0);
    let contour = Contour::new(0.0, &s).unwrap();
    let x = integrate_expansion(
        &model,
        pw,
        e0,
        3,
        &contour,
        2.0,
        DomainPolicy::Strict,
        &tight(),
    )
    .unwrap();
    let t = integrate_tilde(
        &model,
        pw,
        e0,
        &contour,
        2.0,
        DomainPolicy::Strict,
        &tight(),
    )
    .unwrap();
    assert!((x.values[0] - t.values[0]).norm() < 1e-9 * t.values[0].norm());
    assert!((x.values[4] - t.values[1]).norm() < 1e-9 * t.values[1].norm());
}

#[test]
fn complex_radius_needs_analytic_potential() {
    let r: Vec<f64> = (0..100).map(|i| i as f64 * 0.2).collect();
    let u: Vec<f64> = r
        .iter()
        .map(|x| (x - 2.0) * 25.0 * (-x / 2.0).exp())
        .collect();
    let pot = RadialPotential::Tabulated(TabulatedPotential::new(r, u, Some(0.5)).unwrap());
    let model = Model::new(pot, UnitSystem::DONOR);
    let contour = Contour::new(-0.1, &ContourSettings::default()).unwrap();
    let at = RiemannPoint::physical(c(1.0, 0.0));
    assert_eq!(
        integrate_finout(&model, PartialWave::new(0), &at, &contour, &tight()).unwrap_err(),
        Error::UnsupportedEvaluation("tabulated")
    );
}

#[test]
fn trace_records_accepted_steps() {
    let model = Model::reference_dot();
    let mut settings = IntegrationSettings::default();
    settings.trace = true;
    let contour = Contour::new(0.0, &ContourSettings::default()).unwrap();
    let t = integrate_tilde(
        &model,
        PartialWave::new(0),
        c(1.0, 0.0),
        &contour,
        2.0,
        DomainPolicy::Strict,
        &settings,
    )
    .unwrap();
    assert_eq!(t.trace.len(), t.diagnostics.steps + 1);
    assert_eq!(t.trace.last().unwrap().state, t.values);
}
