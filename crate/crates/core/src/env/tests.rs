use super::*;
use proptest::prelude::*;

fn uncontrolled_run(config: &EnvConfig, state: SurrogateState, duration: f64) -> SurrogateState {
    let steps = (duration / config.dt).round() as usize;
    let mut s = state;
    for _ in 0..steps {
        s = rk4_step(&s, config).unwrap();
    }
    s
}

#[test]
fn defaults_satisfy_calibration() {
    let c = EnvConfig::default();
    c.validate().unwrap();
    assert_eq!(c.limit_cycle_radius(), 1.0);
    assert!((c.actuation_period() - 0.025).abs() < 1e-15);
    assert!((c.episode_duration() - 2.5).abs() < 1e-12);
    assert!((c.shedding_period() - 0.5).abs() < 1e-15);
}

#[test]
fn validation_names_the_key() {
    let mut c = EnvConfig {
        drag_base: 3.0,
        ..EnvConfig::default()
    };
    match c.validate() {
        Err(Error::Config { key, .. }) => assert_eq!(key, "drag_base"),
        other => panic!("{other:?}"),
    }
    c.calibrate_drag_base();
    c.validate().unwrap();
    let c = EnvConfig {
        smoothing: 0.0,
        ..Default::default()
    };
    assert!(c.validate().is_err());
    let c = EnvConfig {
        dt: -1.0,
        ..Default::default()
    };
    assert!(c.validate().is_err());
}

#[test]
fn reset_lands_on_the_limit_cycle() {
    let c = EnvConfig::default();
    for seed in 0..50 {
        let (s, obs) = reset(&c, seed);
        assert!((s.radius_sq().sqrt() - 1.0).abs() < 1e-15);
        assert_eq!(s.jet_velocity, 0.0);
        assert_eq!(s.time(&c), 0.0);
        assert_eq!(obs.len(), OBS_DIM);
    }
    assert_eq!(reset(&c, 17), reset(&c, 17));
    assert_ne!(reset(&c, 17).0, reset(&c, 18).0);
}

#[test]
fn reset_phases_are_uniform() {
    // One-sample Kolmogorov–Smirnov test against U[0, 2π) at the 1% level.
    let c = EnvConfig::default();
    let n = 10_000;
    let mut u: Vec<f64> = (0..n as u64)
        .map(|seed| {
            let (s, _) = reset(&c, seed);
            s.y.atan2(s.x).rem_euclid(2.0 * PI) / (2.0 * PI)
        })
        .collect();
    u.sort_by(f64::total_cmp);
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let lo = v - i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64 - v;
            lo.max(hi)
        })
        .fold(0.0, f64::max);
    let critical = 1.628 / (n as f64).sqrt();
    assert!(d < critical, "KS statistic {d} >= {critical}");
}

#[test]
fn smoothing_examples() {
    assert!((smooth_action(0.0, 1.0, 0.4, 1.5) - 0.4).abs() < 1e-15);
    assert_eq!(smooth_action(0.3, 0.3, 0.4, 1.5), 0.3);
    assert_eq!(smooth_action(1.4, 2.0, 0.4, 1.5), 1.5);
    assert_eq!(smooth_action(-1.4, -2.0, 0.4, 1.5), -1.5);
}

proptest! {
    #[test]
    fn smoothing_contracts_and_caps(prev in -1.5f64..1.5, a in -4.5f64..4.5, beta in 0.01f64..1.0) {
        let unclamped = prev + beta * (a - prev);
        prop_assert!(((unclamped - a).abs() - (1.0 - beta) * (prev - a).abs()).abs() < 1e-12);
        let v = smooth_action(prev, a, beta, 1.5);
        prop_assert!(v.abs() <= 1.5);
    }

    #[test]
    fn jets_conserve_mass(v in proptest::num::f64::NORMAL) {
        let (a, b) = jet_velocities(v);
        prop_assert_eq!(a + b, 0.0);
        prop_assert_eq!(a, v);
    }
}

#[test]
fn jet_examples() {
    assert_eq!(jet_velocities(0.7), (0.7, -0.7));
    assert_eq!(jet_velocities(0.0), (0.0, -0.0));
}

#[test]
fn limit_cycle_radius_drift_is_tiny() {
    let c = EnvConfig::default();
    let (mut s, _) = reset(&c, 3);
    for _ in 0..5000 {
        let next = rk4_step(&s, &c).unwrap();
        let drift = (next.radius_sq().sqrt() - s.radius_sq().sqrt()).abs();
        assert!(drift < 1e-9, "per-step drift {drift}");
        s = next;
    }
    assert!((s.radius_sq().sqrt() - 1.0).abs() < 1e-9);
}

#[test]
fn pure_rotation_conserves_radius() {
    let c = EnvConfig {
        growth_rate: 0.0,
        saturation: 0.0,
        ..Default::default()
    };
    let state = SurrogateState {
        x: 0.6,
        y: -0.8,
        jet_velocity: 0.0,
        steps: 0,
        actuation: 0,
        rng: SplitMix64::new(0),
    };
    let next = rk4_step(&state, &c).unwrap();
    // RK4 on a rotation multiplies the radius by |1 − z²/2 + z⁴/24| with z = ω·dt (pure imaginary),
    // an O(dt⁶) deviation from one.
    let z = c.shedding_freq * c.dt;
    let growth = ((1.0 - z * z / 2.0 + z.powi(4) / 24.0).powi(2) + (z - z.powi(3) / 6.0).powi(2)).sqrt();
    assert!((next.radius_sq().sqrt() - growth).abs() < 1e-15);
    assert!((growth - 1.0).abs() < 1e-12);
}

#[test]
fn rk4_converges_at_fourth_order() {
    let base = EnvConfig::default();
    let mut rng = SplitMix64::new(77);
    for _ in 0..5 {
        let state = SurrogateState {
            x: rng.next_signed_unit() * 1.5,
            y: rng.next_signed_unit() * 1.5,
            jet_velocity: rng.next_signed_unit(),
            steps: 0,
            actuation: 0,
            rng: SplitMix64::new(0),
        };
        let run = |dt: f64| {
            let c = EnvConfig { dt, ..base.clone() };
            let s = uncontrolled_run(&c, state.clone(), 0.4);
            (s.x, s.y)
        };
        let coarse = run(0.02);
        let mid = run(0.01);
        let fine = run(0.005);
        let e1 = ((coarse.0 - mid.0).powi(2) + (coarse.1 - mid.1).powi(2)).sqrt();
        let e2 = ((mid.0 - fine.0).powi(2) + (mid.1 - fine.1).powi(2)).sqrt();
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "convergence ratio {ratio}");
    }
}

#[test]
fn divergence_is_reported() {
    let c = EnvConfig::default();
    let state = SurrogateState {
        x: 1e200,
        y: 0.0,
        jet_velocity: 0.0,
        steps: 0,
        actuation: 0,
        rng: SplitMix64::new(0),
    };
    assert!(matches!(rk4_step(&state, &c), Err(Error::Diverged { .. })));
}

#[test]
fn coefficient_examples() {
    let c = EnvConfig::default();
    let (s, _) = reset(&c, 9);
    let (cd, _) = coefficients(&s, &c);
    assert!((cd - 3.205).abs() < 1e-12);

    let mut zero = s.clone();
    zero.x = 0.0;
    zero.y = 0.0;
    let (cd, cl) = coefficients(&zero, &c);
    assert_eq!(cl, 0.0);
    assert!((cd - 2.905).abs() < 1e-12);
    let reduction = 1.0 - cd / c.drag_ref;
    assert!((reduction - 0.0936).abs() < 1e-3, "{reduction}");
}

#[test]
fn reward_examples() {
    let c = EnvConfig::default();
    let rec = |cd: f64, cl: f64| vec![StepRecord { t: 0.0, cd, cl }; 4];
    assert!(compute_reward(&rec(3.205, 0.0), &c).unwrap().abs() < 1e-15);
    assert!((compute_reward(&rec(2.95, 0.0), &c).unwrap() - 0.255).abs() < 1e-12);
    assert!((compute_reward(&rec(3.205, 1.0), &c).unwrap() - -0.1).abs() < 1e-12);
    assert!((compute_reward(&rec(3.205, -1.0), &c).unwrap() - -0.1).abs() < 1e-12);
    assert!(compute_reward(&[], &c).is_err());
}

#[test]
fn observation_is_linear_in_state() {
    let c = EnvConfig::default();
    let state = SurrogateState {
        x: 0.0,
        y: 0.0,
        jet_velocity: 0.0,
        steps: 0,
        actuation: 0,
        rng: SplitMix64::new(0),
    };
    let obs = observe(&state, &c);
    assert_eq!(obs.len(), 149);
    let m = SensorMatrix::standard();
    let scale = c.drag_base - c.drag_ref;
    for (i, o) in obs.iter().enumerate() {
        assert_eq!(*o, m.row(i)[3] * scale);
    }
}

#[test]
fn episode_bookkeeping() {
    let c = EnvConfig::default();
    let mut env = SurrogateEnv::new(c.clone(), 4).unwrap();
    let mut rewards = 0;
    let mut records = 0;
    for k in 0..c.actuations_per_episode {
        let out = env.actuate(0.3 * (k as f64).sin()).unwrap();
        rewards += 1;
        records += out.records.len();
        assert!(out.state.jet_velocity.abs() <= c.max_jet_velocity);
        assert_eq!(out.observation, env.observe());
    }
    assert_eq!(rewards, 100);
    assert_eq!(records, 5000);
    assert!((env.state().time(&c) - 2.5).abs() < 1e-12);
    assert_eq!(env.state().actuation, 100);
}

#[test]
fn period_duration_and_records() {
    let c = EnvConfig::default();
    let (s, _) = reset(&c, 0);
    let out = actuate(&s, 0.0, &c).unwrap();
    assert_eq!(out.records.len(), 50);
    assert!((out.records[49].t - 0.025).abs() < 1e-15);
    assert!((out.records[0].t - 0.0005).abs() < 1e-18);
}

#[test]
fn uncontrolled_reward_is_lift_only() {
    let c = EnvConfig::default();
    let (mut s, _) = reset(&c, 12);
    let mut all = Vec::new();
    for _ in 0..20 {
        let out = actuate(&s, 0.0, &c).unwrap();
        let max_cl = out.records.iter().map(|r| r.cl.abs()).fold(0.0, f64::max);
        assert!(out.reward.abs() <= c.lift_weight * max_cl + 1e-9);
        all.extend(out.records);
        s = out.state;
    }
    // Twenty periods of 0.025 span exactly one shedding cycle.
    let full = compute_reward(&all, &c).unwrap();
    assert!(full.abs() < 1e-3, "reward over a full cycle {full}");
}

#[test]
fn uncontrolled_radius_converges_from_any_start() {
    let c = EnvConfig::default();
    for (x, y) in [(1e-3, 0.0), (0.2, -0.1), (2.5, 1.0), (-0.05, 0.05)] {
        let state = SurrogateState {
            x,
            y,
            jet_velocity: 0.0,
            steps: 0,
            actuation: 0,
            rng: SplitMix64::new(0),
        };
        let end = uncontrolled_run(&c, state, 10.0);
        let err = (end.radius_sq().sqrt() - c.limit_cycle_radius()).abs();
        assert!(err < 1e-6, "start ({x}, {y}) ends {err} away");
    }
}

/// Time-averaged r² over the last fifth of an episode under `policy(x)`.
fn tail_radius_sq(policy: impl Fn(&SurrogateState) -> f64) -> f64 {
    let c = EnvConfig::default();
    let (mut s, _) = reset(&c, 5);
    let tail_start = c.actuations_per_episode * 4 / 5;
    let mut acc = 0.0;
    let mut n = 0;
    for k in 0..c.actuations_per_episode {
        let out = actuate(&s, policy(&s), &c).unwrap();
        if k >= tail_start {
            for r in &out.records {
                acc += (r.cd - c.drag_base) / c.drag_sensitivity;
                n += 1;
            }
        }
        s = out.state;
    }
    acc / n as f64
}

#[test]
fn proportional_controller_suppresses_shedding() {
    let free = tail_radius_sq(|_| 0.0);
    let controlled = tail_radius_sq(|s| -2.0 * s.x);
    assert!((free - 1.0).abs() < 1e-6);
    assert!(controlled <= 0.5 * free, "controlled {controlled} vs free {free}");
}

#[test]
fn non_finite_actions_become_zero() {
    let c = EnvConfig::default();
    let mut a = SurrogateEnv::new(c.clone(), 1).unwrap();
    let mut b = SurrogateEnv::new(c, 1).unwrap();
    let out = a.actuate(f64::NAN).unwrap();
    assert!(out.sanitized);
    assert_eq!(a.sanitized_actions(), 1);
    assert_eq!(
        out,
        b.actuate(0.0)
            .map(|mut o| {
                o.sanitized = true;
                o
            })
            .unwrap()
    );
}

#[test]
fn trajectories_are_deterministic() {
    let c = EnvConfig::default();
    let run = || {
        let mut env = SurrogateEnv::new(c.clone(), 8).unwrap();
        env.reset(99);
        (0..30)
            .map(|k| env.actuate(((k * 7) % 5) as f64 - 2.0).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}
