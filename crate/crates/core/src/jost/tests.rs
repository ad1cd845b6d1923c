use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::riccati::{HalfPlane, LogBranch};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn solver() -> JostSolver {
    JostSolver::new(Model::reference_dot()).with_tolerance(1e-12)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn free_particle_is_one_half() {
    let s = JostSolver::new(Model::new(
        crate::potential::RadialPotential::Zero,
        UnitSystem::DONOR,
    ));
    for ell in 0..3 {
        let pw = PartialWave::new(ell);
        for at in [
            RiemannPoint::physical(c(2.0, 0.0)),
            RiemannPoint::physical(c(-1.5, 0.0)),
            RiemannPoint::resonance(c(3.0, -1.0)),
        ] {
            for p in [s.direct(pw, at).unwrap(), s.factorized(pw, at).unwrap()] {
                assert!((p.f_in - 0.5).norm() < 1e-12, "{p:?}");
                assert!((p.f_out - 0.5).norm() < 1e-12, "{p:?}");
            }
        }
        let p = s.direct(pw, RiemannPoint::physical(c(2.0, 0.0))).unwrap();
        assert!((p.s_matrix().unwrap() - 1.0).norm() < 1e-12);
    }
}

#[test]
fn factorized_matches_direct() {
    let s = solver();
    for ell in 0..2 {
        let pw = PartialWave::new(ell);
        for at in [
            RiemannPoint::physical(c(5.0, 0.0)),
            RiemannPoint::physical(c(5.0, 0.7)),
            RiemannPoint::resonance(c(7.0, -0.3)),
        ] {
            let d = s.direct(pw, at).unwrap();
            let f = s.factorized(pw, at).unwrap();
            assert!(rel(f.f_in, d.f_in) < 1e-9, "{at:?} {} {}", f.f_in, d.f_in);
            assert!(
                rel(f.f_out, d.f_out) < 1e-9,
                "{at:?} {} {}",
                f.f_out,
                d.f_out
            );
        }
    }
}

#[test]
fn sheets_differ_only_through_h() {
    let units = UnitSystem::DONOR;
    let (a, b) = (c(0.3, -1.2), c(-0.7, 0.4));
    for ell in 0..3 {
        let pw = PartialWave::new(ell);
        let e = c(4.0, -0.5);
        let up = RiemannPoint::physical(e);
        let down = RiemannPoint::resonance(e);
        let pu = assemble_jost(a, b, pw, up, &units, 1.0).unwrap();
        let pd = assemble_jost(a, b, pw, down, &units, 1.0).unwrap();
        let k = up.momentum(&units);
        let dh = down.h(&units, 1.0).unwrap() - up.h(&units, 1.0).unwrap();
        let expect = 0.5 * k_power(k, ell) * dh * b;
        assert!((pd.f_in - pu.f_in - expect).norm() < 1e-13);
        assert!((pd.f_out - pu.f_out - expect).norm() < 1e-13);
    }
}

#[test]
fn unitary_on_real_axis() {
    let s = solver();
    for ell in 0..3 {
        let p = s
            .direct(PartialWave::new(ell), RiemannPoint::physical(c(1.0, 0.0)))
            .unwrap();
        assert!((p.f_in.norm() / p.f_out.norm() - 1.0).abs() < 1e-10);
        assert!((p.s_matrix().unwrap().norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn bound_state_is_a_zero_of_f_in() {
    let s = solver();
    let pw = PartialWave::new(0);
    let eb = -6.2711504590;
    let at = RiemannPoint::physical(c(eb, 0.0));
    let p = s.direct(pw, at).unwrap();
    assert!(p.f_out.is_nan());
    for de in [-0.05, 0.05] {
        let q = s
            .direct(pw, RiemannPoint::physical(c(eb + de, 0.0)))
            .unwrap();
        assert!(
            p.f_in.norm() < 1e-6 * q.f_in.norm(),
            "{} {}",
            p.f_in,
            q.f_in
        );
    }
    assert!(matches!(
        JostPair {
            f_in: c(0.1, 0.0),
            ..p
        }
        .s_matrix(),
        Err(Error::SubdominantOutgoing)
    ));
    // Deep bound states sit outside the domain of the k-scaled systems.
    let strict = JostSolver {
        domain: crate::contour::DomainPolicy::Strict,
        ..solver()
    };
    assert!(matches!(
        strict.tilde(pw, c(eb, 0.0)),
        Err(Error::OutOfDomain { .. })
    ));
}

#[test]
fn rotation_across_the_hankel_cut_is_rejected() {
    let mut s = solver();
    let at = RiemannPoint::physical(c(2.35, -0.3));
    let k = at.momentum(s.units());
    assert!(k.re < 0.0);
    let theta = s.contour_for(k).unwrap().theta;
    assert!((theta - 0.5 * (k.arg() - std::f64::consts::PI)).abs() < 1e-12);
    s.theta = Some(crate::contour::ThetaPolicy::Fixed(-0.09));
    assert!(matches!(
        s.direct(PartialWave::new(0), at),
        Err(Error::InvalidRotation(_))
    ));
}

#[test]
fn direct_route_rejects_far_sheets() {
    let at = RiemannPoint::new(
        c(3.0, -1.0),
        LogBranch {
            half_plane: HalfPlane::Lower,
            winding: 1,
        },
    );
    assert!(solver().direct(PartialWave::new(0), at).is_err());
    assert!(solver().factorized(PartialWave::new(0), at).is_ok());
}

#[test]
fn tilde_assembly_reproduces_direct_sample() {
    let s = solver().with_tolerance(1e-11);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let e = c(rng.gen_range(0.5..9.0), rng.gen_range(-2.0..1.0));
        let at = if e.im < 0.0 && rng.gen_bool(0.5) {
            RiemannPoint::resonance(e)
        } else {
            RiemannPoint::physical(e)
        };
        let pw = PartialWave::new(rng.gen_range(0..3));
        let d = s.direct(pw, at).unwrap();
        let f = s.factorized(pw, at).unwrap();
        // Whichever of f_in, f_out is smaller inherits the absolute error of
        // the larger one through cancellation, so both are measured on it.
        let scale = f.f_in.norm().max(f.f_out.norm());
        assert!((f.f_in - d.f_in).norm() < 1e-8 * scale, "{at:?} {pw:?}");
        if d.f_out.is_finite() {
            assert!((f.f_out - d.f_out).norm() < 1e-8 * scale, "{at:?} {pw:?}");
        }
    }
}
