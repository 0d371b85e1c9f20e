mod common;

use common::*;
use despeckle_core::diffusion::{
    advance_proposed, advance_shan, advance_tdm, coefficient_for, fidelity_term, step,
    step_proposed, step_shan,
};
use despeckle_core::metrics::psnr;
use despeckle_core::stencil::trapezoid_mass;
use despeckle_core::{
    add_speckle, denoise, denoise_rgb, Error, FidelityForm, ImageGrid, Model, ModelParams,
    NoiseSpec, RgbImage, SolverState, StoppingRule,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// 3x3 grid of 100 with 109 in the centre. Under mirror boundaries
/// lap I = [[0,2d,0],[2d,-4d,2d],[0,2d,0]] and
/// lap lap I = [[8d,-16d,8d],[-16d,24d,-16d],[8d,-16d,8d]] with d = 9.
#[test]
fn fourth_order_step_by_hand_with_unit_coefficient() {
    let mut g = ImageGrid::filled(3, 3, 100.0);
    g.set(1, 1, 109.0);
    let p = ModelParams {
        gamma: 0.0,
        lambda: 0.0,
        ..ModelParams::default()
    };
    let ones = ImageGrid::filled(3, 3, 1.0);
    let next = advance_proposed(&SolverState::new(g), &p, &ones).unwrap();
    let want = [
        [97.12, 105.76, 97.12],
        [105.76, 100.36, 105.76],
        [97.12, 105.76, 97.12],
    ];
    for (y, row) in want.iter().enumerate() {
        for (x, &v) in row.iter().enumerate() {
            assert!(close(next.current.get(x, y), v, 1e-12));
        }
    }
}

#[test]
fn fourth_order_step_matches_loop_evaluation() {
    let mut r = rng(21);
    let f = random_grid(&mut r, 3, 3, 20.0, 230.0);
    let p = ModelParams {
        gamma: 0.0,
        lambda: 0.0,
        k: 40.0,
        alpha: 1.5,
        ..ModelParams::default()
    };
    let next = step_proposed(&SolverState::new(f.clone()), &p).unwrap();

    let smooth = oracle_gaussian(&f, p.xi, 8);
    let m = smooth.data().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let lm = oracle_laplacian_magnitude(&smooth, 1.0);
    let c = ImageGrid::from_fn(3, 3, |x, y| {
        let s = smooth.get(x, y).abs().powf(p.alpha);
        let e = lm.get(x, y) / p.k;
        2.0 * s / (m.powf(p.alpha) + s) / (1.0 + e * e)
    });
    let lap = oracle_laplacian(&f, 1.0);
    let inner = c.zip_map(&lap, |a, b| a * b);
    let outer = oracle_laplacian(&inner, 1.0);
    for i in 0..9 {
        let want = (f.data()[i] - p.tau * p.tau * outer.data()[i]).clamp(1.0, 255.0);
        assert!(close(next.current.data()[i], want, 1e-10), "{i}");
    }
}

/// I(x, y) = u(x) + v(y) with u = [10, 20, 50], v = [0, 30, 60]. Central
/// differences of the central gradient with an odd-reflected flux give
/// div = [20, 0, -20](x) + [30, 0, -30](y).
fn separable_grid() -> (ImageGrid, ImageGrid) {
    let u = [10.0, 20.0, 50.0];
    let v = [0.0, 30.0, 60.0];
    let du = [20.0, 0.0, -20.0];
    let dv = [30.0, 0.0, -30.0];
    (
        ImageGrid::from_fn(3, 3, |x, y| 1.0 + u[x] + v[y]),
        ImageGrid::from_fn(3, 3, |x, y| du[x] + dv[y]),
    )
}

#[test]
fn tdm_step_by_hand_with_unit_coefficient() {
    let (g, div) = separable_grid();
    let p = ModelParams {
        gamma: 0.0,
        ..ModelParams::default()
    };
    let ones = ImageGrid::filled(3, 3, 1.0);
    let next = advance_tdm(&SolverState::new(g.clone()), &p, &ones).unwrap();
    for i in 0..9 {
        assert!(close(
            next.current.data()[i],
            g.data()[i] + 0.04 * div.data()[i],
            1e-12
        ));
    }

    // damping rescales the increment by 1 / (1 + gamma tau)
    let damped = ModelParams {
        gamma: 5.0,
        ..ModelParams::default()
    };
    let next = advance_tdm(&SolverState::new(g.clone()), &damped, &ones).unwrap();
    for i in 0..9 {
        assert!(close(
            next.current.data()[i],
            g.data()[i] + 0.02 * div.data()[i],
            1e-12
        ));
    }
}

#[test]
fn shan_step_by_hand_with_unit_coefficient() {
    let (g, div) = separable_grid();
    let ones = ImageGrid::filled(3, 3, 1.0);
    let next = advance_shan(&SolverState::new(g.clone()), &ModelParams::default(), &ones).unwrap();
    for i in 0..9 {
        assert!(close(
            next.current.data()[i],
            g.data()[i] + 0.2 * div.data()[i],
            1e-12
        ));
    }
}

#[test]
fn shan_conserves_trapezoid_mass() {
    let mut r = rng(33);
    let f = random_grid(&mut r, 16, 16, 60.0, 200.0);
    let p = ModelParams {
        alpha: 1.0,
        nu: 1.0,
        ..ModelParams::default()
    };
    let before = trapezoid_mass(&f);
    let mut s = SolverState::new(f);
    for _ in 0..10 {
        s = step_shan(&s, &p).unwrap();
    }
    let drift = (trapezoid_mass(&s.current) - before).abs() / before;
    assert!(drift <= 1e-9, "drift {drift}");
}

#[test]
fn fourth_order_term_conserves_trapezoid_mass() {
    let mut r = rng(34);
    let f = random_grid(&mut r, 16, 12, 80.0, 180.0);
    let p = ModelParams {
        lambda: 0.0,
        ..ModelParams::default()
    };
    let before = trapezoid_mass(&f);
    let mut s = SolverState::new(f);
    for _ in 0..10 {
        s = step_proposed(&s, &p).unwrap();
    }
    let drift = (trapezoid_mass(&s.current) - before).abs() / before;
    assert!(drift <= 1e-9, "drift {drift}");
}

#[test]
fn leapfrog_consistency_without_damping() {
    let mut r = rng(35);
    let f = random_grid(&mut r, 10, 8, 30.0, 220.0);
    let p = ModelParams {
        gamma: 0.0,
        lambda: 0.0,
        ..ModelParams::default()
    };
    let state = SolverState::new(f.clone());
    let c = coefficient_for(Model::Proposed, &f, &p);
    let inner = c.zip_map(&oracle_laplacian(&f, 1.0), |a, b| a * b);
    let rhs = oracle_laplacian(&inner, 1.0).map(|v| -v);
    let next = step_proposed(&state, &p).unwrap();
    for i in 0..f.len() {
        let want = (f.data()[i] + p.tau * p.tau * rhs.data()[i]).clamp(1.0, 255.0);
        assert!(close(next.current.data()[i], want, 1e-10));
    }
}

#[test]
fn fidelity_matches_scalar_loop() {
    let mut r = rng(36);
    let i = random_grid(&mut r, 6, 5, 1.0, 255.0);
    let f = random_grid(&mut r, 6, 5, 1.0, 255.0);
    let sq = fidelity_term(&i, &f, FidelityForm::Squared);
    let sg = fidelity_term(&i, &f, FidelityForm::Signed);
    for k in 0..i.len() {
        let (a, b) = (i.data()[k], f.data()[k]);
        assert!(close(
            sq.data()[k],
            ((a - b) / a).powi(2),
            1e-14 * (1.0 + sq.data()[k])
        ));
        assert!(close(
            sg.data()[k],
            (a - b) / a * (b / a),
            1e-14 * (1.0 + sg.data()[k].abs())
        ));
    }
}

#[test]
fn steps_commute_with_flips() {
    let mut r = rng(37);
    let f = random_grid(&mut r, 13, 9, 1.0, 255.0);
    let prev = random_grid(&mut r, 13, 9, 1.0, 255.0);
    let cur = random_grid(&mut r, 13, 9, 1.0, 255.0);
    let s = SolverState::from_levels(cur, prev, f, 3).unwrap();
    let p = ModelParams::default();
    for model in Model::ALL {
        let base = step(model, &s, &p).unwrap();
        for t in [
            ImageGrid::flip_horizontal as fn(&ImageGrid) -> ImageGrid,
            ImageGrid::flip_vertical,
            ImageGrid::rotate_180,
            ImageGrid::rotate_90,
            ImageGrid::transpose,
        ] {
            let moved = step(model, &s.map_grids(t), &p).unwrap();
            assert_eq!(moved.current, t(&base.current), "{model}");
        }
    }
}

#[test]
fn large_time_step_diverges_quickly() {
    let clean = ImageGrid::from_fn(64, 64, |x, y| 40.0 + ((x / 8 + y / 8) % 2) as f64 * 150.0);
    let noisy = add_speckle(&clean, NoiseSpec::new(3, 9).unwrap()).unwrap();
    let p = ModelParams {
        tau: 10.0,
        ..ModelParams::default()
    };
    let err = denoise(
        Model::Proposed,
        &noisy,
        &p,
        &StoppingRule::max_iters(50),
        None,
    )
    .unwrap_err();
    match err {
        Error::Divergence { iteration, .. } => assert!(iteration <= 50),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn psnr_peak_returns_trajectory_argmax() {
    let clean = ImageGrid::from_fn(40, 40, |x, y| 60.0 + ((x / 10 + y / 10) % 2) as f64 * 120.0);
    let noisy = add_speckle(&clean, NoiseSpec::new(3, 4).unwrap()).unwrap();
    let p = ModelParams::default();
    let stop = StoppingRule::psnr_peak(5).with_cap(200);
    let out = denoise(Model::Proposed, &noisy, &p, &stop, Some(&clean)).unwrap();

    let mut s = SolverState::new(noisy.clone());
    let mut best = (psnr(&noisy, &clean, 255.0).unwrap(), 0usize, noisy.clone());
    for _ in 0..out.report.iterations {
        s = step(Model::Proposed, &s, &p).unwrap();
        let q = psnr(&s.current, &clean, 255.0).unwrap();
        if q > best.0 {
            best = (q, s.iteration, s.current.clone());
        }
    }
    assert_eq!(out.report.selected_iteration, best.1);
    assert_eq!(out.image, best.2);
    assert!(out.report.psnr.unwrap() >= psnr(&noisy, &clean, 255.0).unwrap());
}

#[test]
fn rgb_channels_are_independent() {
    let gray = ImageGrid::from_fn(24, 20, |x, y| 30.0 + ((x * 7 + y * 5) % 200) as f64);
    let noisy = add_speckle(&gray, NoiseSpec::new(5, 1).unwrap()).unwrap();
    let stop = StoppingRule::relative_error(1e-3).with_cap(30);
    let p = ModelParams::default();
    let rgb = denoise_rgb(
        Model::Proposed,
        &RgbImage::from_gray(&noisy),
        &p,
        &stop,
        None,
    )
    .unwrap();
    let single = denoise(Model::Proposed, &noisy, &p, &stop, None).unwrap();
    assert_eq!(rgb.image, RgbImage::from_gray(&single.image));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let gray = ImageGrid::from_fn(32, 32, |x, y| 50.0 + ((x * 3 + y * 11) % 150) as f64);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let n = add_speckle(&gray, NoiseSpec::new(1, 77).unwrap()).unwrap();
                let c = RgbImage::new(n.clone(), n.map(|v| v * 0.5 + 1.0), n.rotate_180()).unwrap();
                denoise_rgb(
                    Model::Tdm,
                    &c,
                    &ModelParams::default(),
                    &StoppingRule::max_iters(15),
                    None,
                )
                .unwrap()
                .image
            })
    };
    assert_eq!(run(1), run(4));
}
