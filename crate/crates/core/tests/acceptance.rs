//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! The criteria are property-based checks against the synthetic plant plus
//! structural checks of the tuning and identification pipelines; run with
//! `cargo test --test acceptance -- --nocapture` to see the per-criterion
//! lines.

use std::time::Instant;

use nmeskit_core::controller::{
    check_gain_condition, ControllerSettings, ControllerState, GainConditionBounds, RiseGains,
};
use nmeskit_core::ident::{
    batch_gradient, batch_loss, build_regression_set, fit_metrics, free_run, train, Activation,
    NarxModel, RegressionSet, TrainConfig, OUTPUT_SCALE,
};
use nmeskit_core::iga::{cga_run, fga_run, tune, AuditLog, EvalOutcome, IgaConfig, Phase};
use nmeskit_core::plant::{
    self, DisturbanceModel, PlantParams, PlantState, ViscousConvention,
};
use nmeskit_core::reference::{TrajectorySpec, DEG_TO_RAD, RAD_TO_DEG};
use nmeskit_core::session::{
    avstd_op, generate_excitation, merge_sessions, rmse, run_closed_loop, run_open_loop, tec,
    AvStd, ExcitationSpec, GainSource, LogKind, PlantSim, SessionLog, Tec, TecOptions,
    CONTROL_TS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(n: u32, what: &str) {
    println!("acceptance criterion {n} ({what}): PASS");
}

// -------------------------------------------------------------------------
// 1. Plant identities and physics
// -------------------------------------------------------------------------

#[test]
fn criterion_1_plant_identities_and_physics() {
    let started = Instant::now();
    let p = PlantParams::default();

    // trivial-zero torque cases, exact to 1e-12
    assert!(plant::gravitational_torque(0.0, &p).abs() <= 1e-12);
    assert!(plant::viscous_torque(0.0, &p).abs() <= 1e-12);
    let p_rest = PlantParams { psi3: 0.25, ..p };
    assert!(plant::elastic_torque(0.25, &p_rest).abs() <= 1e-12);
    assert!(plant::stimulation_torque(0.4, 0.2, 0.0, &p, 1.0).unwrap().abs() <= 1e-12);

    // equilibrium at rest stays put to machine precision
    let mut s = PlantState::at_rest();
    for _ in 0..200 {
        s = plant::step(&s, 0.0, CONTROL_TS, &p, &DisturbanceModel::None).unwrap();
        assert_eq!(s.theta, 0.0);
        assert_eq!(s.theta_dot, 0.0);
    }

    // RK4 measured order on the gravity-only plant
    let gravity_only = PlantParams {
        psi1: 0.0,
        psi2: 0.0,
        psi3: 0.0,
        kappa1: 0.0,
        kappa2: 0.0,
        kappa3: 0.0,
        ..p
    };
    let run = |dt: f64| -> f64 {
        let mut s = PlantState {
            theta: 0.3,
            theta_dot: 0.0,
            t: 0.0,
        };
        for _ in 0..(1.0 / dt).round() as usize {
            s = plant::step(&s, 0.0, dt, &gravity_only, &DisturbanceModel::None).unwrap();
        }
        s.theta
    };
    let reference_theta = run(1e-6);
    let order =
        ((run(2e-3) - reference_theta).abs() / (run(1e-3) - reference_theta).abs()).log2();
    assert!(
        (3.8..=4.2).contains(&order),
        "RK4 measured order {order} outside [3.8, 4.2]"
    );

    // energy non-increase under the dissipative convention, 1e-9 per step
    assert_eq!(p.viscous_convention, ViscousConvention::Dissipative);
    let elastic_potential = |theta: f64| {
        p.psi1 * (1.0 - (1.0 + p.psi2 * theta) * (-p.psi2 * theta).exp()) / (p.psi2 * p.psi2)
    };
    let energy = |s: &PlantState| {
        0.5 * p.inertia * s.theta_dot * s.theta_dot
            + p.mgl() * (1.0 - s.theta.cos())
            + elastic_potential(s.theta)
    };
    let mut s = PlantState {
        theta: 0.7,
        theta_dot: 0.0,
        t: 0.0,
    };
    let mut prev = energy(&s);
    for _ in 0..4000 {
        s = plant::step(&s, 0.0, 1e-3, &p, &DisturbanceModel::None).unwrap();
        let e = energy(&s);
        assert!(e <= prev + 1e-9, "energy increased by {}", e - prev);
        prev = e;
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 1 took {elapsed:?}");
    pass(1, "plant identities and physics");
}

// -------------------------------------------------------------------------
// 2. Controller unit suite
// -------------------------------------------------------------------------

#[test]
fn criterion_2_controller_suite() {
    // saturation bounds always hold
    let settings = ControllerSettings {
        rho_max: 280.0,
        ..ControllerSettings::default()
    };
    let gains = RiseGains::new(6.0, 7.0, 75.0, 5.5);
    let mut cs = ControllerState::new(&settings).unwrap();
    for k in 0..5000 {
        let theta_d = 0.7 * ((k as f64) * 0.11).sin();
        let theta = 0.5 * ((k as f64) * 0.017).cos() - 0.2;
        let u = cs
            .rise_step(theta, theta_d, 0.0, &gains, CONTROL_TS)
            .unwrap();
        assert!((0.0..=280.0).contains(&u));
    }

    // gain-condition truth table including the boundary
    let bounds = GainConditionBounds {
        e_wd: 1.0,
        e_wd_dot: 1.0,
    };
    let row = |beta: f64| check_gain_condition(&RiseGains::new(1.0, 2.0, 10.0, beta), &bounds);
    assert!(row(2.0).satisfied && (row(2.0).margin - 0.5).abs() < 1e-12);
    assert!(!row(1.5).satisfied && row(1.5).margin.abs() < 1e-12); // boundary
    assert!(!row(1.0).satisfied && row(1.0).margin < 0.0);

    // filtered-derivative ramp response within 1% after 5*tau
    let tau = 0.01;
    let dt = 0.001;
    let slope = 3.0;
    let mut cs = ControllerState::new(&ControllerSettings {
        tau,
        ..ControllerSettings::default()
    })
    .unwrap();
    let mut t = 0.0;
    while t < 20.0 * tau {
        let y = cs.filtered_derivative(slope * t, dt).unwrap();
        if t >= 5.0 * tau {
            assert!((y - slope).abs() <= 0.01 * slope, "ramp error at t={t}");
        }
        t += dt;
    }

    // discrete-integral growth matches the closed form to 1e-9
    let gains = RiseGains::new(2.0, 3.0, 30.0, 2.0);
    let eps = 0.015;
    let per_step = ((gains.ks + 1.0) * gains.alpha2 * eps + gains.beta) * CONTROL_TS;
    let mut cs = ControllerState::new(&ControllerSettings {
        rho_max: 400.0,
        ..ControllerSettings::default()
    })
    .unwrap();
    assert_eq!(cs.step_from_e2(eps, &gains, CONTROL_TS).unwrap(), 0.0);
    for k in 1..500 {
        let u = cs.step_from_e2(eps, &gains, CONTROL_TS).unwrap();
        assert!(
            (u - k as f64 * per_step).abs() <= 1e-9,
            "integral drift at step {k}"
        );
    }

    pass(2, "controller unit suite");
}

// -------------------------------------------------------------------------
// 3. Tuning beats naive gains
// -------------------------------------------------------------------------

#[test]
fn criterion_3_tuning_beats_naive_gains() {
    let started = Instant::now();
    let plant = PlantParams::default();
    let spec = TrajectorySpec::default(); // sine, 10-40 deg, T = 5 s, 60 s
    let settings = ControllerSettings::default();

    let cfg = IgaConfig::preset_first(42);
    let mut sys = PlantSim::new(plant, DisturbanceModel::None, CONTROL_TS).unwrap();
    let result = tune(&mut sys, &spec, &cfg, &settings).unwrap();
    assert!(!result.all_infeasible);
    let tuned = run_closed_loop(&mut sys, &result.best.gains, &spec, &settings, 60.0).unwrap();
    assert!(tuned.diverged_at.is_none());

    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut random_rmse: Vec<f64> = (0..20)
        .map(|_| {
            let gains = cfg.bounds.sample(&mut rng);
            match run_closed_loop(&mut sys, &gains, &spec, &settings, 60.0) {
                Ok(run) if run.diverged_at.is_none() => run.rmse_deg,
                _ => 180.0,
            }
        })
        .collect();
    random_rmse.sort_by(f64::total_cmp);
    let median = 0.5 * (random_rmse[9] + random_rmse[10]);

    println!(
        "tuned RMSE {:.3} deg vs random median {:.3} deg (ratio {:.3})",
        tuned.rmse_deg,
        median,
        tuned.rmse_deg / median
    );
    assert!(
        tuned.rmse_deg <= 0.6 * median,
        "tuned {} deg not <= 0.6 x median {} deg",
        tuned.rmse_deg,
        median
    );
    assert!(tuned.rmse_deg <= 3.0, "tuned RMSE {} > 3 deg", tuned.rmse_deg);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() <= 120.0, "criterion 3 took {elapsed:?}");
    pass(3, "tuning beats naive gains");
}

// -------------------------------------------------------------------------
// 4. Identification quality
// -------------------------------------------------------------------------

#[test]
fn criterion_4_identification_quality() {
    let started = Instant::now();
    let plant = PlantParams::default();

    // 60 s excitation at Ts = 0.02: 3000 samples
    let exc = ExcitationSpec::default();
    let pw = generate_excitation(&exc);
    assert_eq!(pw.len(), 3000);
    let mut sys = PlantSim::new(plant, DisturbanceModel::None, exc.ts).unwrap();
    let log = run_open_loop(&mut sys, &pw).unwrap();
    let (u, y) = log.series();

    // 250-neuron, m = n = 1 model
    let data = build_regression_set(&u, &y, 1, 1).unwrap();
    let cfg = TrainConfig::default();
    assert_eq!(cfg.hidden_size, 250);
    let (model, report) = train(&data, &cfg).unwrap();

    // held-out one-step R^2 on the chronological validation tail
    let rows = data.rows();
    let val_start = rows - report.val_rows;
    let y_true: Vec<f64> = data.targets[val_start..]
        .iter()
        .map(|t| t * OUTPUT_SCALE)
        .collect();
    let y_pred: Vec<f64> = (val_start..rows)
        .map(|k| model.forward(data.row(k)).unwrap())
        .collect();
    let metrics = fit_metrics(&y_true, &y_pred).unwrap();
    let r2 = metrics.r_squared.unwrap();
    println!("held-out one-step R^2 = {r2:.6}");
    assert!(r2 >= 0.99, "held-out R^2 {r2} < 0.99");

    // free-run replay of the training input stays within the tracking band
    let y_replay = free_run(&model, &u, &y[..1]).unwrap();
    let replay_rmse = rmse(&y, &y_replay).unwrap();
    println!("training replay free-run RMSE = {replay_rmse:.3} deg");
    assert!(replay_rmse <= 5.0, "replay free-run RMSE {replay_rmse} > 5 deg");

    // free-run over a fresh 20 s excitation
    let exc_fresh = ExcitationSpec {
        duration_s: 20.0,
        seed: 99,
        ..exc
    };
    let pw_fresh = generate_excitation(&exc_fresh);
    let mut sys2 = PlantSim::new(plant, DisturbanceModel::None, exc.ts).unwrap();
    let fresh = run_open_loop(&mut sys2, &pw_fresh).unwrap();
    let (u_fresh, y_fresh) = fresh.series();
    let y_hat = free_run(&model, &u_fresh, &y_fresh[..1]).unwrap();
    let fr_rmse = rmse(&y_fresh, &y_hat).unwrap();
    println!("fresh free-run RMSE = {fr_rmse:.3} deg");
    assert!(fr_rmse <= 5.0, "free-run RMSE {fr_rmse} > 5 deg");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() <= 300.0, "criterion 4 took {elapsed:?}");
    pass(4, "identification quality");
}

// -------------------------------------------------------------------------
// 5. Gradient check
// -------------------------------------------------------------------------

#[test]
fn criterion_5_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for trial in 0..5u64 {
        let lag_m = 1 + (trial % 2) as usize;
        let lag_n = 1 + (trial / 2 % 2) as usize;
        let hidden = 3 + trial as usize;
        let mut model = NarxModel::new_random(lag_m, lag_n, hidden, Activation::Tanh, 500 + trial);
        model.b_in.iter_mut().for_each(|b| *b = rng.gen_range(-0.4..0.4));
        model.b_out = rng.gen_range(-0.4..0.4);

        let rows = 10;
        let cols = lag_m + lag_n;
        let data = RegressionSet {
            lag_m,
            lag_n,
            features: (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            targets: (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let indices: Vec<usize> = (0..rows).collect();
        let (_, analytic) = batch_gradient(&model, &data, &indices);

        let h = 1e-6;
        let mut weights = model.weights_flat();
        for i in 0..weights.len() {
            let orig = weights[i];
            weights[i] = orig + h;
            model.set_weights_flat(&weights).unwrap();
            let plus = batch_loss(&model, &data, &indices);
            weights[i] = orig - h;
            model.set_weights_flat(&weights).unwrap();
            let minus = batch_loss(&model, &data, &indices);
            weights[i] = orig;
            model.set_weights_flat(&weights).unwrap();

            let fd = (plus - minus) / (2.0 * h);
            let scale = fd.abs().max(analytic[i].abs()).max(1e-8);
            assert!(
                (fd - analytic[i]).abs() / scale <= 1e-4,
                "trial {trial} parameter {i}: {} vs {fd}",
                analytic[i]
            );
        }
    }
    pass(5, "analytic gradients match finite differences");
}

// -------------------------------------------------------------------------
// 6. Metric oracles
// -------------------------------------------------------------------------

/// Brute-force re-implementations straight from the metric definitions.
mod oracle {
    use super::*;

    pub fn rmse_deg(theta: &[f64], theta_d: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..theta.len() {
            let e = (theta_d[k] - theta[k]) * RAD_TO_DEG;
            acc += e * e;
        }
        (acc / theta.len() as f64).sqrt()
    }

    pub fn tec(theta: &[f64], theta_d: &[f64], ts: f64, band: f64, dwell: f64) -> Tec {
        let n = theta.len();
        let in_band = |k: usize| ((theta_d[k] - theta[k]) * RAD_TO_DEG).abs() <= band;
        let mut first_in = None;
        for k in 0..n {
            if in_band(k) {
                first_in = Some(k);
                break;
            }
        }
        let k0 = match first_in {
            Some(k) => k,
            None => return Tec::NotComputable,
        };
        // first out-of-band run after k0 that lasts at least `dwell`
        for start in (k0 + 1)..n {
            if !in_band(start) && in_band(start - 1) {
                let mut end = start;
                while end < n && !in_band(end) {
                    end += 1;
                }
                if (end - start) as f64 * ts >= dwell {
                    return Tec::Ok {
                        seconds: start as f64 * ts,
                    };
                }
            }
        }
        Tec::Ok {
            seconds: n as f64 * ts,
        }
    }

    pub fn avstd(theta: &[f64], op_deg: f64, band: f64) -> AvStd {
        let mut entry = None;
        for (k, a) in theta.iter().enumerate() {
            if (a * RAD_TO_DEG - op_deg).abs() <= band {
                entry = Some(k);
                break;
            }
        }
        let entry = match entry {
            Some(k) => k,
            None => return AvStd::NotComputable,
        };
        let window = &theta[entry..];
        let n = window.len() as f64;
        let mut mean = 0.0;
        for a in window {
            mean += a * RAD_TO_DEG;
        }
        mean /= n;
        let mut var = 0.0;
        for a in window {
            let d = a * RAD_TO_DEG - mean;
            var += d * d;
        }
        AvStd::Ok {
            mean_deg: mean,
            std_deg: (var / n).sqrt(),
        }
    }

    pub fn pearson_r2_mse(y: &[f64], y_hat: &[f64]) -> (Option<f64>, Option<f64>, f64) {
        let n = y.len() as f64;
        let my = y.iter().sum::<f64>() / n;
        let mh = y_hat.iter().sum::<f64>() / n;
        let mut syy = 0.0;
        let mut shh = 0.0;
        let mut syh = 0.0;
        let mut res = 0.0;
        for k in 0..y.len() {
            syy += (y[k] - my) * (y[k] - my);
            shh += (y_hat[k] - mh) * (y_hat[k] - mh);
            syh += (y[k] - my) * (y_hat[k] - mh);
            res += (y[k] - y_hat[k]) * (y[k] - y_hat[k]);
        }
        let pearson = if syy > 0.0 && shh > 0.0 {
            Some(syh / (syy.sqrt() * shh.sqrt()))
        } else {
            None
        };
        let r2 = if syy > 0.0 { Some(1.0 - res / syy) } else { None };
        (pearson, r2, res / n)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

#[test]
fn criterion_6_metric_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let opts = TecOptions::default();

    for trace in 0..100 {
        let n = rng.gen_range(50..1500);
        let ts = [0.005, 0.01, 0.02][trace % 3];
        // reference plus a drifting error that wanders in and out of band
        let mut err: f64 = rng.gen_range(-20.0..20.0);
        let mut theta_d = Vec::with_capacity(n);
        let mut theta = Vec::with_capacity(n);
        for k in 0..n {
            let d = 25.0 * DEG_TO_RAD + 15.0 * DEG_TO_RAD * ((k as f64) * 0.02).sin();
            err += rng.gen_range(-1.0..1.0);
            err = err.clamp(-25.0, 25.0);
            theta_d.push(d);
            theta.push(d - err * DEG_TO_RAD);
        }

        assert!(close(
            rmse(&theta, &theta_d).unwrap(),
            oracle::rmse_deg(&theta, &theta_d)
        ));

        let got = tec(&theta, &theta_d, ts, &opts).unwrap();
        let want = oracle::tec(&theta, &theta_d, ts, opts.band_deg, opts.dwell_s);
        match (got, want) {
            (Tec::NotComputable, Tec::NotComputable) => {}
            (Tec::Ok { seconds: a }, Tec::Ok { seconds: b }) => {
                assert!(close(a, b), "trace {trace}: tec {a} vs {b}")
            }
            other => panic!("trace {trace}: tec mismatch {other:?}"),
        }

        let op = rng.gen_range(20.0..45.0);
        let got = avstd_op(&theta, ts, op, 5.0).unwrap();
        let want = oracle::avstd(&theta, op, 5.0);
        match (got, want) {
            (AvStd::NotComputable, AvStd::NotComputable) => {}
            (
                AvStd::Ok {
                    mean_deg: m1,
                    std_deg: s1,
                },
                AvStd::Ok {
                    mean_deg: m2,
                    std_deg: s2,
                },
            ) => assert!(close(m1, m2) && close(s1, s2), "trace {trace}: avstd"),
            other => panic!("trace {trace}: avstd mismatch {other:?}"),
        }

        let fit = fit_metrics(&theta_d, &theta).unwrap();
        let (p, r2, mse) = oracle::pearson_r2_mse(&theta_d, &theta);
        assert_eq!(fit.pearson.is_some(), p.is_some());
        if let (Some(a), Some(b)) = (fit.pearson, p) {
            assert!(close(a, b));
        }
        if let (Some(a), Some(b)) = (fit.r_squared, r2) {
            assert!(close(a, b));
        }
        assert!(close(fit.mse, mse));
    }

    // the three TEC reference cases
    let n = 6000;
    let ts = 0.01;
    let zeros = vec![0.0; n];
    assert_eq!(
        tec(&zeros, &zeros, ts, &opts).unwrap(),
        Tec::Ok { seconds: 60.0 }
    );
    let dropout: Vec<f64> = (0..n)
        .map(|k| {
            if k as f64 * ts < 30.0 {
                0.0
            } else {
                12.0 * DEG_TO_RAD
            }
        })
        .collect();
    assert_eq!(
        tec(&dropout, &zeros, ts, &opts).unwrap(),
        Tec::Ok { seconds: 30.0 }
    );
    let never = vec![30.0 * DEG_TO_RAD; n];
    assert_eq!(tec(&never, &zeros, ts, &opts).unwrap(), Tec::NotComputable);

    pass(6, "metric oracles match brute force");
}

// -------------------------------------------------------------------------
// 7. IGA structure
// -------------------------------------------------------------------------

#[test]
fn criterion_7_iga_structure() {
    // structural checks on a cheap stub fitness
    let cfg = IgaConfig {
        generations: 12,
        seed: 77,
        ..IgaConfig::default()
    };
    let cb = GainConditionBounds::default();
    let mut audit = AuditLog::default();
    let mut calls = 0usize;
    let mut eval = |g: &RiseGains| {
        calls += 1;
        EvalOutcome {
            cost: (g.alpha1 - 2.0).powi(2) + (g.beta - 2.5).powi(2),
            margin: 1.0,
        }
    };
    let rip = fga_run(&cfg, &cb, &mut eval, &mut audit);
    assert_eq!(rip.len(), cfg.generations, "RIP size != N_g");
    for pair in rip.windows(2) {
        assert!(pair[1].cost <= pair[0].cost, "best-so-far increased");
    }
    let _ranked = cga_run(&rip, &cfg, &cb, &mut eval, &mut audit);
    assert_eq!(calls, audit.len(), "hidden evaluations detected");
    assert_eq!(
        audit.count_phase(Phase::Init) + audit.count_phase(Phase::Fga),
        cfg.population_size + cfg.generations
    );

    // both presets run to completion against the plant
    let spec = TrajectorySpec::default();
    let settings = ControllerSettings::default();
    for (name, cfg) in [
        ("first", IgaConfig::preset_first(42)),
        ("later", IgaConfig::preset_later(42)),
    ] {
        let cfg = IgaConfig {
            fitness_horizon_s: 5.0,
            ..cfg
        };
        let mut sys =
            PlantSim::new(PlantParams::default(), DisturbanceModel::None, CONTROL_TS).unwrap();
        let result = tune(&mut sys, &spec, &cfg, &settings).unwrap();
        assert_eq!(
            result.audit.len(),
            cfg.population_size + cfg.generations + cfg.iterations * cfg.generations,
            "preset {name}: evaluation count"
        );
        assert!(!result.all_infeasible, "preset {name} found no feasible gains");
    }
    pass(7, "IGA structure");
}

// -------------------------------------------------------------------------
// 8. Multi-session pipeline
// -------------------------------------------------------------------------

#[test]
fn criterion_8_multi_session_pipeline() {
    let plant = PlantParams::default();
    let settings = ControllerSettings::default();
    let spec = TrajectorySpec::default();

    // build a mixed set of logs: one identification, three control (two
    // tuned, one empirical), different lengths
    let gains = RiseGains::new(2.6, 3.3, 48.0, 1.8);
    let mut logs: Vec<SessionLog> = Vec::new();
    let exc = ExcitationSpec {
        duration_s: 20.0,
        ..ExcitationSpec::default()
    };
    let mut sys = PlantSim::new(plant, DisturbanceModel::None, exc.ts).unwrap();
    let mut ident_log = run_open_loop(&mut sys, &generate_excitation(&exc)).unwrap();
    ident_log.subject = "synthetic".into();
    ident_log.session_index = 1;
    logs.push(ident_log);

    for (idx, duration, source) in [
        (1u32, 10.0, GainSource::Iga),
        (2, 14.0, GainSource::Iga),
        (3, 7.0, GainSource::Empirical),
    ] {
        let mut sys = PlantSim::new(plant, DisturbanceModel::None, CONTROL_TS).unwrap();
        let mut run = run_closed_loop(&mut sys, &gains, &spec, &settings, duration).unwrap();
        run.log.subject = "synthetic".into();
        run.log.session_index = idx;
        run.log.gain_source = Some(source);
        logs.push(run.log);
    }

    // control-only filter: identification and empirical logs excluded
    let merged = merge_sessions(&logs, true).unwrap();
    assert_eq!(merged.len(), 2);
    assert!(merged
        .iter()
        .all(|l| l.kind == LogKind::Control && l.gain_source == Some(GainSource::Iga)));

    // pooled regression rows = sum(N_i - 1) for m = n = 1
    let sets: Vec<_> = merged
        .iter()
        .map(|log| {
            let (u, y) = log.series();
            build_regression_set(&u, &y, 1, 1).unwrap()
        })
        .collect();
    let pooled = RegressionSet::pool(&sets).unwrap();
    let expected_rows: usize = merged.iter().map(|log| log.rows.len() - 1).sum();
    assert_eq!(pooled.rows(), expected_rows);

    // a model trained on two pooled excitation sessions is no worse (within
    // 10%) than the one-session model on a shared held-out excitation
    let session = |seed: u64, duration: f64| {
        let exc = ExcitationSpec {
            seed,
            duration_s: duration,
            ..ExcitationSpec::default()
        };
        let mut sys = PlantSim::new(plant, DisturbanceModel::None, exc.ts).unwrap();
        run_open_loop(&mut sys, &generate_excitation(&exc)).unwrap()
    };
    let log_a = session(1, 60.0);
    let log_b = session(2, 60.0);
    let held_out = session(99, 20.0);

    let set_of = |log: &SessionLog| {
        let (u, y) = log.series();
        build_regression_set(&u, &y, 1, 1).unwrap()
    };
    let cfg = TrainConfig::default();
    let (model_one, _) = train(&set_of(&log_a), &cfg).unwrap();
    let pooled = RegressionSet::pool(&[set_of(&log_a), set_of(&log_b)]).unwrap();
    let (model_two, _) = train(&pooled, &cfg).unwrap();

    let (u_h, y_h) = held_out.series();
    let rmse_one = rmse(&y_h, &free_run(&model_one, &u_h, &y_h[..1]).unwrap()).unwrap();
    let rmse_two = rmse(&y_h, &free_run(&model_two, &u_h, &y_h[..1]).unwrap()).unwrap();
    println!("free-run RMSE: 1 session {rmse_one:.3} deg, 2 sessions {rmse_two:.3} deg");
    assert!(
        rmse_two <= 1.1 * rmse_one,
        "two-session model degraded: {rmse_two} vs {rmse_one}"
    );
    pass(8, "multi-session pipeline");
}
