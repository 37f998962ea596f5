use detumble::dynamics::InertiaTensor;
use detumble::nmpc::{
    cgmres_step, dense_kkt_oracle, initialize_u, HorizonField, HorizonModel, NmpcConfig, NmpcController, Problem,
    SolverVector,
};
use detumble::orbit::OrbitElements;
use detumble::sim::{Controller, Observation};
use detumble::DEG;
use nalgebra::{DVector, UnitQuaternion, Vector3};
use proptest::prelude::*;

fn controller(mode: HorizonField) -> NmpcController {
    let cfg = NmpcConfig {
        horizon_field: mode,
        ..NmpcConfig::default()
    };
    NmpcController::new(cfg, InertiaTensor::asymmetric_reference(), OrbitElements::aeolus(), 1.0).unwrap()
}

fn observation(t: f64, omega: Vector3<f64>, q: UnitQuaternion<f64>) -> Observation {
    Observation {
        t,
        omega,
        q,
        b_body: Vector3::zeros(),
    }
}

fn horizon(mode: HorizonField, t: f64, q: UnitQuaternion<f64>) -> HorizonModel {
    controller(mode).horizon_for(&observation(t, Vector3::zeros(), q))
}

fn relative(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn rest_state_solution_is_the_seed() {
    let cfg = NmpcConfig::default();
    let hz = horizon(HorizonField::FrozenAttitude, 100.0, UnitQuaternion::identity());
    let p = Problem::new(&cfg, InertiaTensor::asymmetric_reference(), &hz);
    let seed = SolverVector::seed(&cfg);
    assert_eq!(p.residual(&seed, &Vector3::zeros(), 100.0).unwrap().norm(), 0.0);
    assert_eq!(initialize_u(&p, &Vector3::zeros(), 100.0, None).unwrap(), seed);
}

#[test]
fn initializer_is_idempotent_and_matches_dense_oracle() {
    let cfg = NmpcConfig::default();
    let j = InertiaTensor::asymmetric_reference();
    for (k, w) in [
        Vector3::new(2.429286, 2.878490, -0.366780),
        Vector3::new(-1.576299, -0.246907, 2.778531),
        Vector3::new(0.04715, -2.486905, -1.425107),
        Vector3::new(1.0, -0.5, 0.25),
    ]
    .into_iter()
    .enumerate()
    {
        let w = w * DEG;
        let q = UnitQuaternion::from_euler_angles(0.4 * k as f64, -0.3, 1.0);
        let hz = horizon(HorizonField::FrozenAttitude, 0.0, q);
        let p = Problem::new(&cfg, j, &hz);
        let u = initialize_u(&p, &w, 0.0, None).unwrap();
        assert_eq!(initialize_u(&p, &w, 0.0, Some(u.clone())).unwrap(), u);
        let exact = dense_kkt_oracle(&p, &w, 0.0, None).unwrap();
        assert!(
            relative(&u.0, &exact.0) < 1e-8,
            "case {k}: {}",
            relative(&u.0, &exact.0)
        );
        assert!((0..cfg.stages).all(|i| u.v(i) > 0.0 && u.m_x(i).abs() <= cfg.m_max));
    }
}

#[test]
fn continuation_contracts_residual_geometrically() {
    // consistent plant and horizon rotation: dF/dt = −ζF up to discretization
    let cfg = NmpcConfig::default();
    let j = InertiaTensor::asymmetric_reference();
    let mut hz = horizon(HorizonField::FrozenAttitude, 0.0, UnitQuaternion::identity());
    let mut omega = Vector3::new(2.429286, 2.878490, -0.366780) * DEG;
    let mut u = initialize_u(&Problem::new(&cfg, j, &hz), &omega, 0.0, None).unwrap();
    for i in 0..cfg.stages {
        u.0[3 * i] += 0.02;
    }
    let dt = 0.01;
    let mut u_dot = DVector::zeros(cfg.dim());
    let mut norms = Vec::new();
    for k in 0..100 {
        let t = k as f64 * dt;
        let p = Problem::new(&cfg, j, &hz);
        let wd = p.omega_dot(&omega, u.m_x(0), t).unwrap();
        let s = cgmres_step(&p, &u, &u_dot, &omega, &wd, t, dt).unwrap();
        norms.push(s.residual_norm);
        u = s.u_next;
        u_dot = s.u_dot;
        hz = hz.advanced(&omega, dt);
        omega += wd * dt;
    }
    let expected = 1.0 - cfg.zeta * dt;
    for (k, w) in norms.windows(2).take(50).enumerate() {
        let ratio = w[1] / w[0];
        assert!((ratio - expected).abs() < 2e-3, "step {k}: ratio {ratio}");
    }
}

#[test]
fn controller_tracks_oracle_on_a_slow_spin() {
    let mut ctrl = controller(HorizonField::FrozenField);
    let omega = Vector3::new(0.5, -0.3, 0.2) * DEG;
    let mut q = UnitQuaternion::identity();
    for k in 0..30 {
        let obs = observation(k as f64, omega, q);
        if let Some(u) = ctrl.solver_vector() {
            let hz = ctrl.horizon_for(&obs);
            let p = Problem::new(&ctrl.cfg, InertiaTensor::asymmetric_reference(), &hz);
            let exact = dense_kkt_oracle(&p, &omega, obs.t, None).unwrap();
            assert!(relative(&u.0, &exact.0) < 1e-2, "t = {k}");
        }
        let d = ctrl.command(&obs).unwrap();
        assert!(d.m_x.abs() <= 1.0);
        assert!(d.telemetry.is_some_and(|t| !t.failed));
        q *= UnitQuaternion::from_scaled_axis(omega);
    }
    assert_eq!(ctrl.failures(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn residual_is_lagrangian_gradient(
        wx in -3.0f64..3.0, wy in -3.0f64..3.0, wz in -3.0f64..3.0,
        t in 0.0f64..6000.0,
        ms in prop::collection::vec((-1.0f64..1.0, 0.1f64..1.0, 0.01f64..1.0), 10),
    ) {
        let cfg = NmpcConfig::default();
        let hz = horizon(HorizonField::FrozenAttitude, t, UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3));
        let p = Problem::new(&cfg, InertiaTensor::asymmetric_reference(), &hz);
        let omega = Vector3::new(wx, wy, wz) * DEG;
        let u = SolverVector(DVector::from_iterator(30, ms.iter().flat_map(|&(m, v, mu)| [m, v, mu])));
        let f = p.residual(&u, &omega, t).unwrap();
        let dtau = cfg.stage_length();
        let grad = DVector::from_fn(30, |k, _| {
            let e = 1e-6;
            let mut up = u.clone();
            let mut dn = u.clone();
            up.0[k] += e;
            dn.0[k] -= e;
            (p.lagrangian(&up, &omega, t).unwrap() - p.lagrangian(&dn, &omega, t).unwrap()) / (2.0 * e * dtau)
        });
        prop_assert!(relative(&grad, &f) < 1e-6, "{}", relative(&grad, &f));
    }

    #[test]
    fn commands_respect_the_bound(
        wx in -10.0f64..10.0, wy in -10.0f64..10.0, wz in -10.0f64..10.0,
        t in 0.0f64..6000.0,
        roll in -3.0f64..3.0, pitch in -1.5f64..1.5, yaw in -3.0f64..3.0,
    ) {
        let mut ctrl = controller(HorizonField::FrozenAttitude);
        let q = UnitQuaternion::from_euler_angles(roll, pitch, yaw);
        let omega = Vector3::new(wx, wy, wz) * DEG;
        for k in 0..3 {
            let d = ctrl.command(&observation(t + k as f64, omega, q)).unwrap();
            prop_assert!(d.m_x.abs() <= 1.0);
        }
    }
}
