use super::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Derivative of a Riccati function from `F'_lambda = F_(lambda-1) - (lambda/z) F_lambda`,
/// using `C_{-1} = -C_1` for `l = 0`.
fn riccati_derivatives(ell: u32, z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let pw = PartialWave::new(ell);
    let (j, y) = riccati_jy(pw, z).unwrap();
    let (jm, ym) = if ell == 0 {
        let (j1, y1) = riccati_jy(PartialWave::new(1), z).unwrap();
        (-j1, -y1)
    } else {
        riccati_jy(PartialWave::new(ell - 1), z).unwrap()
    };
    let lam = pw.lambda();
    (j, y, jm - j * lam / z, ym - y * lam / z)
}

#[test]
fn riccati_reference_value() {
    // j_{-1/2}(1) = sqrt(pi/2) J_0(1)
    let (j, _) = riccati_jy(PartialWave::new(0), c(1.0, 0.0)).unwrap();
    assert!((j.re - 0.959_033_078_4).abs() < 1e-9, "{j}");
}

#[test]
fn y_is_singular_at_origin() {
    assert_eq!(
        riccati_jy(PartialWave::new(0), c(0.0, 0.0)),
        Err(Error::SingularArgument("Y_n(0)"))
    );
}

#[test]
fn branch_function_reference() {
    let h = log_branch_h(c(0.0, 2.0), 1.0, LogBranch::PHYSICAL).unwrap();
    assert!((h - c(0.0, 1.0)).norm() < 1e-15);
    assert_eq!(
        log_branch_h(c(0.0, 0.0), 1.0, LogBranch::PHYSICAL),
        Err(Error::LogSingularity)
    );
    // Winding shifts by 2i per turn of the energy.
    let b = LogBranch {
        half_plane: HalfPlane::Upper,
        winding: 1,
    };
    let h1 = log_branch_h(c(0.3, 0.2), 2.0, b).unwrap();
    let h0 = log_branch_h(c(0.3, 0.2), 2.0, LogBranch::PHYSICAL).unwrap();
    assert!((h1 - h0 - c(0.0, 2.0)).norm() < 1e-15);
}

#[test]
fn lower_branch_continues_through_positive_axis() {
    let k = c(1.0, -0.5);
    let up = LogBranch::PHYSICAL.arg(k);
    let low = LogBranch::RESONANCE.arg(k);
    assert!((up - low).abs() < 1e-15);
    let k = c(-1.0, -0.5);
    assert!((LogBranch::PHYSICAL.arg(k) - LogBranch::RESONANCE.arg(k) - 2.0 * PI).abs() < 1e-14);
}

#[test]
fn hankel_factorisation() {
    for ell in 0..4 {
        let pw = PartialWave::new(ell);
        for &z in &[c(0.7, 0.2), c(5.0, -1.0), c(30.0, 0.5), c(2.0, 2.5)] {
            let (j, y) = riccati_jy(pw, z).unwrap();
            let (hm, hp) = riccati_hankel(pw, z).unwrap();
            let i = c(0.0, 1.0);
            let scale = j.norm() + y.norm();
            assert!((hp - (j + i * y)).norm() < 1e-12 * scale);
            assert!((hm - (j - i * y)).norm() < 1e-12 * scale);
        }
    }
}

#[test]
fn tilde_factorisation_reconstructs_riccati_functions() {
    let units = UnitSystem::DONOR;
    let scale_r = 2.0;
    for ell in 0..4 {
        let pw = PartialWave::new(ell);
        for &(e, r) in &[
            (c(0.8, 0.1), c(1.5, 0.0)),
            (c(7.55, -1.06), c(3.0, 0.4)),
            (c(3.0, 0.0), c(20.0, 0.0)),
            (c(0.02, -0.01), c(50.0, -3.0)),
        ] {
            let k = (e * units.c2mu).sqrt();
            let z = k * r;
            let (j, y) = riccati_jy(pw, z).unwrap();
            let (jt, yt) = tilde_jy(pw, e, r, &units, scale_r).unwrap();
            let lam = pw.lambda();
            let h = log_branch_h(k, scale_r, LogBranch::PHYSICAL).unwrap();
            let j_rec = k.powf(lam + 1.0) * jt;
            let y_rec = k.powf(-lam) * yt + h * j;
            let scale = j.norm() + y.norm();
            assert!((j - j_rec).norm() < 1e-11 * scale, "l {ell} e {e} r {r}");
            assert!((y - y_rec).norm() < 1e-11 * scale, "l {ell} e {e} r {r}");
        }
    }
}

#[test]
fn tilde_series_and_bessel_routes_agree() {
    // Both routes evaluated at the same points around the switchover.
    for ell in 0..4usize {
        for &zmod in &[8.0, TILDE_SERIES_LIMIT] {
            for &arg in &[0.0, -0.3, 0.2, -1.2] {
                let r = Complex64::from_polar(2.0, arg * 0.3);
                let k = Complex64::from_polar(zmod / 2.0, arg * 0.7);
                let e = k * k / 2.0;
                let (a1, b1) = tilde_orders_series(3, e, r, 2.0, 1.0);
                let (a2, b2) = tilde_orders_bessel(3, e, r, 2.0, 1.0).unwrap();
                let scale = a1[ell].norm() * k.norm().powi(2 * ell as i32) + b1[ell].norm();
                let tol = 1e-10 * scale * (1.0 + (k * r).im.abs().exp() * 1e-5);
                assert!(
                    (a1[ell] - a2[ell]).norm() * k.norm().powi(2 * ell as i32) < tol,
                    "l {ell} |z| {zmod} arg {arg}"
                );
                assert!(
                    (b1[ell] - b2[ell]).norm() < tol,
                    "l {ell} |z| {zmod} arg {arg}"
                );
            }
        }
    }
}

#[test]
fn tilde_zero_energy_is_power_law() {
    // At E = 0, jt_{l-1/2}(0, r) = f_0(r) and yt = g_0(r).
    let units = UnitSystem::DONOR;
    let r = c(1.7, -0.2);
    for ell in 0..4 {
        let (jt, yt) = tilde_jy(PartialWave::new(ell), c(0.0, 0.0), r, &units, 2.0).unwrap();
        assert!((jt - series::fcoeff(ell, 0, r)).norm() < 1e-15);
        assert!((yt - series::gcoeff(ell, 0, r, 2.0)).norm() < 1e-14);
    }
}

/// Taylor coefficients by the trapezoidal rule on a circle around `e0`.
fn cauchy_oracle(
    f: impl Fn(Complex64) -> Complex64,
    e0: Complex64,
    radius: f64,
    nodes: usize,
    n: usize,
) -> (Vec<Complex64>, f64) {
    let values: Vec<(Complex64, Complex64)> = (0..nodes)
        .map(|j| {
            let w = Complex64::from_polar(radius, 2.0 * PI * j as f64 / nodes as f64);
            (w, f(e0 + w))
        })
        .collect();
    let max = values.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let coeffs = (0..=n)
        .map(|m| {
            values
                .iter()
                .map(|(w, v)| v * w.powi(-(m as i32)))
                .sum::<Complex64>()
                / nodes as f64
        })
        .collect();
    (coeffs, max)
}

#[test]
fn taylor_coefficients_match_cauchy_oracle() {
    let units = UnitSystem::DONOR;
    let scale_r = 2.0;
    let radius: f64 = 0.5;
    let n = 5;
    let theta: f64 = 0.14;
    for ell in 0..4 {
        let pw = PartialWave::new(ell);
        for &e0 in &[
            c(0.0, 0.0),
            c(0.3, 0.0),
            c(7.55, -1.06),
            c(20.0, 0.0),
            c(-1.5, 0.0),
        ] {
            for &r in &[
                c(0.05, 0.0),
                c(0.6, 0.0),
                c(3.0, 0.0),
                Complex64::from_polar(10.0, -theta),
                c(40.0, 0.0),
            ] {
                let tc = taylor_coefficients(pw, e0, r, n, &units, scale_r).unwrap();
                // Keep |k r| variation on the circle modest so 32 nodes resolve it.
                let radius = radius.min(8.0 / (units.c2mu * r.norm_sqr()));
                let (s_ref, smax) = cauchy_oracle(
                    |e| tilde_jy(pw, e, r, &units, scale_r).unwrap().0,
                    e0,
                    radius,
                    32,
                    n,
                );
                let (c_ref, cmax) = cauchy_oracle(
                    |e| tilde_jy(pw, e, r, &units, scale_r).unwrap().1,
                    e0,
                    radius,
                    32,
                    n,
                );
                for m in 0..=n {
                    let rho = radius.powi(m as i32);
                    let ds = (tc.s[m] - s_ref[m]).norm();
                    let dc = (tc.c[m] - c_ref[m]).norm();
                    assert!(
                        ds <= 1e-9 * smax / rho,
                        "s l={ell} e0={e0} r={r} m={m}: {} vs {}",
                        tc.s[m],
                        s_ref[m]
                    );
                    assert!(
                        dc <= 1e-9 * cmax / rho,
                        "c l={ell} e0={e0} r={r} m={m}: {} vs {}",
                        tc.c[m],
                        c_ref[m]
                    );
                }
            }
        }
    }
}

#[test]
fn taylor_branches_agree_near_switchover() {
    for ell in 0..3 {
        let pw = PartialWave::new(ell);
        for &kr in &[3.0, TAYLOR_SERIES_LIMIT, 6.0] {
            for &r in &[c(1.0, 0.0), c(5.0, -0.5), c(30.0, 0.0)] {
                let k = kr / r.norm();
                let e0 = Complex64::from_polar(k * k / 2.0, -0.1);
                let (s, cc) = series::small_argument_derivatives(ell, e0, r, 2.0, 2.0, 4);
                let rec = taylor_by_recurrence(pw, e0, r, 4, 2.0, 2.0).unwrap();
                for m in 0..=4 {
                    let scale = (cc[m].norm() + s[m].norm() * k.powi(2 * ell as i32)).max(1e-300);
                    assert!(
                        (rec.s[m] - s[m]).norm() * k.powi(2 * ell as i32) < 1e-10 * scale,
                        "l {ell} kr {kr} r {r} m {m}"
                    );
                    assert!(
                        (rec.c[m] - cc[m]).norm() < 1e-10 * scale,
                        "l {ell} kr {kr} r {r} m {m}: {} {}",
                        rec.c[m],
                        cc[m]
                    );
                }
            }
        }
    }
}

#[test]
fn zero_energy_first_coefficient() {
    // s_1 at E0 = 0, l = 0, r = 2: c2mu f_1(2) = 2 * (-sqrt(pi)).
    let units = UnitSystem::natural(2.0);
    let tc = taylor_coefficients(
        PartialWave::new(0),
        c(0.0, 0.0),
        c(2.0, 0.0),
        1,
        &units,
        2.0,
    )
    .unwrap();
    assert!((tc.s[1] - c(-2.0 * PI.sqrt(), 0.0)).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn wronskian_is_unity(modulus in 0.01f64..100.0, arg in -1.5f64..1.5, ell in 0u32..4) {
        let z = Complex64::from_polar(modulus, arg);
        let (j, y, dj, dy) = riccati_derivatives(ell, z);
        let w = j * dy - y * dj;
        let scale = 1.0f64.max((j * dy).norm());
        prop_assert!((w - 1.0).norm() < 1e-10 * scale, "z {} l {} w {}", z, ell, w);
    }

    #[test]
    fn tilde_is_even_in_k(re in 0.01f64..30.0, im in -5.0f64..5.0, rm in 0.1f64..40.0, ra in -0.4f64..0.4) {
        // Evaluating the Bessel route with -k must give the same entire function.
        let e = c(re, im);
        let r = Complex64::from_polar(rm, ra);
        let (jt, yt) = tilde_orders(3, e, r, 2.0, 2.0).unwrap();
        let k = (e * 2.0).sqrt();
        let z = k * r;
        prop_assume!(z.norm() > TILDE_SERIES_LIMIT);
        // Rebuild order 0 directly from Bessel functions at +z and -z.
        let pre = (r * (PI / 2.0)).sqrt();
        let log = (r / 2.0).ln() * FRAC_2_PI;
        for zz in [z, -z] {
            let cy = cylinder_orders(zz, 0).unwrap();
            let j0 = pre * cy.j[0];
            let y0 = pre * (cy.yreg[0] + log * cy.j[0]);
            prop_assert!((j0 - jt[0]).norm() < 1e-11 * (jt[0].norm() + yt[0].norm()));
            prop_assert!((y0 - yt[0]).norm() < 1e-11 * (jt[0].norm() + yt[0].norm()));
        }
    }
}

#[test]
fn wronskian_residual_matches_local_derivatives() {
    for ell in 0..4 {
        for z in [c(0.3, 0.0), c(5.0, -1.0), c(40.0, 2.0)] {
            let (j, y, dj, dy) = riccati_derivatives(ell, z);
            let local = (j * dy - y * dj - 1.0).norm() / (j * dy).norm().max(1.0);
            let r = wronskian_residual(PartialWave::new(ell), z).unwrap();
            assert!((r - local).abs() < 1e-15 && r < 1e-12, "l={ell} z={z}: {r}");
        }
    }
}
