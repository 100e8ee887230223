//! Acceptance suite. Each criterion prints one PASS/FAIL line on stdout
//! (written past the test-output capture) and asserts its outcome.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use facdyn::dynamics::{inverse_dynamics_el, inverse_dynamics_factorized};
use facdyn::experiments::metrics::find;
use facdyn::experiments::noise::{
    EL_CLEAN_VS_REFERENCE, EL_NOISY_VS_REFERENCE, FACT_NOISY_VS_REFERENCE,
};
use facdyn::experiments::{
    run_invdyn_benchmark, run_noise_experiment, ComparisonMetrics, NoiseOutcome, RunConfig,
    StandInTrajectory,
};
use facdyn::integration::{simulate, Drive, Formulation, SimulationConfig};
use facdyn::linalg::{kernel_projection, pseudo_inverse};
use facdyn::systems::{
    crank_model, ftv_model, planar_robot_model, CrankParams, FtvParams, PlanarRobotParams,
    SystemKind,
};
use facdyn::{FactorizedModel, State};

const CHANNELS: [&str; 4] = ["omega_a", "omega_b", "omega_c", "omega_d"];

/// Keeps criteria from competing for the CPU, which matters for timing.
fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: &str, name: &str, pass: bool, detail: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "[acceptance] {id:<3} {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

// Closed-form models, written independently of the library.

fn crank_h(p: &CrankParams, th: f64) -> f64 {
    let g = p.d - p.r * th.sin();
    -p.r * th.sin() + p.r * th.cos() * g / (p.l * p.l - g * g).sqrt()
}

fn crank_p0(p: &CrankParams, x: &[f64], _u: f64) -> Vec<f64> {
    let th = x[0];
    vec![th, p.r * th.cos() + (p.l * p.l - (p.r * th.sin() - p.d).powi(2)).sqrt()]
}

fn crank_mn(p: &CrankParams, x: &[f64], xd: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let th = x[0];
    let h = crank_h(p, th);
    let e = 1e-6;
    let dh = (crank_h(p, th + e) - crank_h(p, th - e)) / (2.0 * e);
    (
        DMatrix::from_element(1, 1, p.j_m + p.m_p * h * h),
        DMatrix::from_element(1, 1, p.m_p * h * dh * xd[0]),
    )
}

fn ftv_ratios(p: &FtvParams, tilt: f64) -> [f64; 4] {
    let r1 = p.r_a / p.r_b2;
    let rb = p.r_b1 + p.r_c * tilt.sin();
    let rd = p.r_b1 - p.r_c * tilt.sin();
    [1.0, r1, r1 * rb / p.r_c, r1 * rb / rd]
}

fn ftv_p0(p: &FtvParams, x: &[f64], u: f64) -> Vec<f64> {
    ftv_ratios(p, u).iter().map(|r| r * x[0]).collect()
}

fn ftv_mn(p: &FtvParams, u: f64, ud: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let r = ftv_ratios(p, u);
    let m = p.j_a * r[0] * r[0] + p.j_b * r[1] * r[1] + p.j_c * r[2] * r[2] + p.j_d * r[3] * r[3];
    let r1 = p.r_a / p.r_b2;
    let rb = p.r_b1 + p.r_c * u.sin();
    let rd = p.r_b1 - p.r_c * u.sin();
    let n = rb * p.r_c * ud * u.cos() * r1 * r1 * (p.j_c / (p.r_c * p.r_c) + 2.0 * p.r_b1 * p.j_d / rd.powi(3));
    (DMatrix::from_element(1, 1, m), DMatrix::from_element(1, 1, n))
}

fn robot_p0(p: &PlanarRobotParams, x: &[f64], _u: f64) -> Vec<f64> {
    let (a, b) = (x[0], x[0] + x[1]);
    vec![a, p.l1 * a.cos() + p.r2 * b.cos(), p.l1 * a.sin() + p.r2 * b.sin(), b]
}

fn robot_mn(p: &PlanarRobotParams, x: &[f64], xd: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let alpha = p.iz1 + p.m1 * p.r1 * p.r1 + p.m2 * p.l1 * p.l1 + p.iz2 + p.m2 * p.r2 * p.r2;
    let beta = p.m2 * p.l1 * p.r2;
    let delta = p.iz2 + p.m2 * p.r2 * p.r2;
    let (s2, c2) = x[1].sin_cos();
    let m = DMatrix::from_row_slice(2, 2, &[alpha + 2.0 * beta * c2, delta + beta * c2, delta + beta * c2, delta]);
    let n = DMatrix::from_row_slice(
        2,
        2,
        &[-beta * s2 * xd[1], -beta * s2 * (xd[0] + xd[1]), beta * s2 * xd[0], 0.0],
    );
    (m, n)
}

struct Point {
    x: Vec<f64>,
    xd: Vec<f64>,
    u: f64,
    ud: f64,
}

fn random_point(kind: SystemKind, rng: &mut ChaCha8Rng) -> Point {
    match kind {
        SystemKind::Crank => Point {
            x: vec![rng.gen_range(-PI..PI)],
            xd: vec![rng.gen_range(-20.0..20.0)],
            u: 0.0,
            ud: 0.0,
        },
        SystemKind::Ftv => Point {
            x: vec![rng.gen_range(-10.0..10.0)],
            xd: vec![rng.gen_range(-250.0..250.0)],
            u: rng.gen_range(-1.2322..1.2322),
            ud: rng.gen_range(-4.0..4.0),
        },
        SystemKind::Robot => Point {
            x: vec![rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)],
            xd: vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
            u: 0.0,
            ud: 0.0,
        },
    }
}

type P0 = Box<dyn Fn(&[f64], f64) -> Vec<f64>>;
type Mn = Box<dyn Fn(&Point) -> (DMatrix<f64>, DMatrix<f64>)>;

fn system(kind: SystemKind) -> (Box<dyn FactorizedModel>, P0, Mn) {
    match kind {
        SystemKind::Crank => {
            let p = CrankParams::default();
            let (p1, p2) = (p.clone(), p.clone());
            (
                Box::new(crank_model(&p).unwrap()),
                Box::new(move |x, u| crank_p0(&p1, x, u)),
                Box::new(move |q| crank_mn(&p2, &q.x, &q.xd)),
            )
        }
        SystemKind::Ftv => {
            let p = FtvParams::default();
            let (p1, p2) = (p.clone(), p.clone());
            (
                Box::new(ftv_model(&p).unwrap()),
                Box::new(move |x, u| ftv_p0(&p1, x, u)),
                Box::new(move |q| ftv_mn(&p2, q.u, q.ud)),
            )
        }
        SystemKind::Robot => {
            let p = PlanarRobotParams::default();
            let (p1, p2) = (p.clone(), p.clone());
            (
                Box::new(planar_robot_model(&p).unwrap()),
                Box::new(move |x, u| robot_p0(&p1, x, u)),
                Box::new(move |q| robot_mn(&p2, &q.x, &q.xd)),
            )
        }
    }
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[test]
fn criterion_1_factorization_identities() {
    let _g = serial();
    let start = Instant::now();
    let mut worst_m = 0.0f64;
    let mut worst_n = 0.0f64;
    for (s, kind) in SystemKind::ALL.into_iter().enumerate() {
        let (model, _, mn) = system(kind);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + s as u64);
        for _ in 0..100 {
            let q = random_point(kind, &mut rng);
            let (t, tdot) = model.t_and_tdot(&dv(&q.x), &dv(&q.xd), q.u, q.ud).unwrap();
            let (m, n) = mn(&q);
            worst_m = worst_m.max((t.transpose() * &t - &m).norm() / (1e-9 * (1.0 + m.norm())));
            // the crank oracle differentiates H numerically, good to ~1e-9 relative
            worst_n = worst_n.max((t.transpose() * &tdot - &n).norm() / (1e-7 * (1.0 + n.norm())));
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_m <= 1.0 && worst_n <= 1.0 && within(elapsed, 1.0);
    report(
        "1",
        "factorization identities M = TᵀT, N = TᵀṪ (3 systems × 100 states)",
        pass,
        &format!("worst error/tol: M {worst_m:.2e}, N {worst_n:.2e}; {:.3} s", elapsed.as_secs_f64()),
    );
    assert!(pass);
}

#[test]
fn criterion_2_projection_suite() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 100 {
        let n = rng.gen_range(1..=3);
        let r = rng.gen_range(n..=6);
        let t = DMatrix::from_fn(r, n, |_, _| rng.gen_range(-1.0..1.0));
        // full column rank with some margin
        if t.clone().svd(false, false).singular_values.min() < 1e-2 {
            continue;
        }
        count += 1;
        let tp = pseudo_inverse(&t).unwrap();
        let p = kernel_projection(&t, &tp).unwrap();
        let tt = &t * &tp;
        for e in [
            (&tp * &t - DMatrix::identity(n, n)).amax(),
            (tt.transpose() - &tt).amax(),
            (&p * &p - &p).amax(),
            (p.transpose() - &p).amax(),
            (&p * &t).amax(),
        ] {
            worst = worst.max(e);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-10 && within(elapsed, 1.0);
    report(
        "2",
        "projection identities T⁺T = I, TT⁺ symmetric, P² = P, Pᵀ = P, PT = 0",
        pass,
        &format!("worst |error| {worst:.2e} (tol 1e-10); {:.3} s", elapsed.as_secs_f64()),
    );
    assert!(pass);
}

fn noise_outcome() -> &'static (NoiseOutcome, Duration) {
    static OUTCOME: OnceLock<(NoiseOutcome, Duration)> = OnceLock::new();
    OUTCOME.get_or_init(|| {
        let cfg = RunConfig::defaults(SystemKind::Ftv);
        assert_eq!((cfg.simulation.h, cfg.simulation.t_end), (1e-4, 5.0));
        let start = Instant::now();
        let o = run_noise_experiment(&cfg, None).expect("noise experiment runs");
        (o, start.elapsed())
    })
}

fn metric(o: &NoiseOutcome, comparison: &str, ch: &str) -> ComparisonMetrics {
    *find(&o.metrics, comparison, ch).expect("metric present")
}

#[test]
fn criterion_3_noiseless_equivalence() {
    let _g = serial();
    let (o, elapsed) = noise_outcome();
    let worst = CHANNELS
        .iter()
        .map(|ch| metric(o, EL_CLEAN_VS_REFERENCE, ch).max_pct)
        .fold(0.0, f64::max);
    let pass = worst <= 1e-4 && within(*elapsed, 30.0);
    report(
        "3",
        "noiseless variator: Euler-Lagrange vs factorized ω_a..ω_d",
        pass,
        &format!("worst max deviation {worst:.2e} % of peak (tol 1e-4 %); 4 runs in {:.2} s", elapsed.as_secs_f64()),
    );
    assert!(pass);
}

#[test]
fn criterion_4_noise_robustness() {
    let _g = serial();
    let (o, elapsed) = noise_outcome();
    let mut a_ok = true;
    let mut b_ok = true;
    let mut c_ok = true;
    let mut a_detail = Vec::new();
    let mut b_detail = Vec::new();
    let mut c_detail = Vec::new();
    for ch in CHANNELS {
        let fact = metric(o, FACT_NOISY_VS_REFERENCE, ch);
        let el = metric(o, EL_NOISY_VS_REFERENCE, ch);
        a_ok &= fact.max_pct <= 0.1;
        b_ok &= (0.5..=5.0).contains(&el.mean_pct) && (1.0..=10.0).contains(&el.max_pct);
        let ratio = el.mean_pct / fact.mean_pct;
        c_ok &= ratio >= 10.0;
        a_detail.push(format!("{ch} {:.3}", fact.max_pct));
        b_detail.push(format!("{ch} {:.3}/{:.3}", el.mean_pct, el.max_pct));
        c_detail.push(format!("{ch} {ratio:.2}"));
    }
    let in_time = within(*elapsed, 60.0);
    report(
        "4a",
        "noisy factorized vs noiseless factorized, max ≤ 0.1 % of peak",
        a_ok && in_time,
        &format!("max % per channel: {}", a_detail.join(", ")),
    );
    report(
        "4b",
        "noisy Euler-Lagrange vs reference, mean in [0.5, 5] %, max in [1, 10] %",
        b_ok && in_time,
        &format!("mean/max % per channel: {}", b_detail.join(", ")),
    );
    report(
        "4c",
        "Euler-Lagrange mean deviation ≥ 10 × factorized mean deviation",
        c_ok && in_time,
        &format!("ratio per channel: {}", c_detail.join(", ")),
    );
    assert!(a_ok && b_ok && c_ok && in_time, "noise robustness criteria not met");
}

#[test]
fn criterion_5_inverse_dynamics_agreement() {
    let _g = serial();
    let start = Instant::now();
    let p = PlanarRobotParams::default();
    let model = planar_robot_model(&p).unwrap();
    let traj = StandInTrajectory::default();
    let mut el = [Vec::new(), Vec::new()];
    let mut fact = [Vec::new(), Vec::new()];
    let mut algebra = 0.0f64;
    for k in 0..=10_000 {
        let (x, xd, xdd) = traj.sample(k as f64 * 1e-3).unwrap();
        let (m, n) = robot_mn(&p, x.as_slice(), xd.as_slice());
        let tau_el = &m * &xdd + &n * &xd;
        let (t, tdot) = model.t_and_tdot(&x, &xd, 0.0, 0.0).unwrap();
        let tau_fact = inverse_dynamics_factorized(&t, &tdot, &xd, &xdd).unwrap();
        let same_inputs = inverse_dynamics_el(&(t.transpose() * &t), &(t.transpose() * &tdot), &xd, &xdd).unwrap();
        algebra = algebra.max((&same_inputs - &tau_fact).amax() / tau_fact.amax().max(1.0));
        for j in 0..2 {
            el[j].push(tau_el[j]);
            fact[j].push(tau_fact[j]);
        }
    }
    let m1 = ComparisonMetrics::compute(&el[0], &fact[0]).unwrap();
    let m2 = ComparisonMetrics::compute(&el[1], &fact[1]).unwrap();
    let elapsed = start.elapsed();
    let pass = [m1, m2].iter().all(|m| m.mean_pct <= 0.5 && m.max_pct <= 0.5)
        && algebra <= 1e-12
        && within(elapsed, 10.0);
    report(
        "5",
        "inverse dynamics along the reference motion, Euler-Lagrange vs factorized",
        pass,
        &format!(
            "τ₁ mean/max {:.2e}/{:.2e} %, τ₂ mean/max {:.2e}/{:.2e} % (tol 0.5 %); same-input identity {algebra:.1e}; {:.2} s",
            m1.mean_pct,
            m1.max_pct,
            m2.mean_pct,
            m2.max_pct,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_timing() {
    let _g = serial();
    let start = Instant::now();
    let cfg = RunConfig::defaults(SystemKind::Robot);
    assert_eq!(cfg.experiment.reps, 100);
    let o = run_invdyn_benchmark(&cfg, None).unwrap();
    let elapsed = start.elapsed();
    let r = &o.timing;
    let pass = r.fact_mean <= r.el_mean && r.el_seconds.len() == 100 && within(elapsed, 60.0);
    report(
        "6",
        "inverse-dynamics execution time, factorized mean ≤ Euler-Lagrange mean",
        pass,
        &format!(
            "EL {:.3e} s, factorized {:.3e} s, reduction {:.2} % (reference figure 17.08 %); {:.2} s",
            r.el_mean,
            r.fact_mean,
            r.reduction_pct,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_energy_conservation() {
    let _g = serial();
    let start = Instant::now();
    let p = CrankParams::default();
    assert_eq!((p.d_m, p.b_p), (0.0, 0.0));
    let model = crank_model(&p).unwrap();
    let init = State::from_slices(&[0.0], &[10.0], 0.0).unwrap();
    let energy = |s: &State| {
        let h = crank_h(&p, s.x[0]);
        0.5 * (p.j_m + p.m_p * h * h) * s.xdot[0] * s.xdot[0]
    };
    let mut worst = [0.0f64; 2];
    for (i, f) in [Formulation::EulerLagrange, Formulation::Factorized].into_iter().enumerate() {
        let cfg = SimulationConfig {
            t_end: 10.0,
            h: 1e-4,
            formulation: f,
            ..Default::default()
        };
        let tr = simulate(&model, &cfg, &init, &Drive::unforced()).unwrap();
        let e0 = energy(&tr.states[0]);
        worst[i] = tr.states.iter().map(|s| (energy(s) - e0).abs() / e0).fold(0.0, f64::max);
    }
    let elapsed = start.elapsed();
    let pass = worst.iter().all(|w| *w <= 1e-6) && within(elapsed, 20.0);
    report(
        "7",
        "energy drift of the unforced frictionless crank over 10 s",
        pass,
        &format!(
            "max |ΔE|/E₀: Euler-Lagrange {:.2e}, factorized {:.2e} (tol 1e-6); {:.2} s",
            worst[0],
            worst[1],
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_differentiation() {
    let _g = serial();
    let start = Instant::now();
    let mut worst_h = 0.0f64;
    let mut worst_td = 0.0f64;
    for (s, kind) in SystemKind::ALL.into_iter().enumerate() {
        let (model, p0, _) = system(kind);
        let sq = model.inertia().sqrt_entries().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(800 + s as u64);
        for _ in 0..100 {
            let q = random_point(kind, &mut rng);
            let x = dv(&q.x);
            let t = model.eval_t(&x, q.u).unwrap();
            let h0 = DMatrix::from_fn(t.nrows(), t.ncols(), |k, i| t[(k, i)] / sq[k]);
            let e = 1e-6;
            let fd = DMatrix::from_fn(t.nrows(), t.ncols(), |k, i| {
                let mut xp = q.x.clone();
                let mut xm = q.x.clone();
                xp[i] += e;
                xm[i] -= e;
                (p0(&xp, q.u)[k] - p0(&xm, q.u)[k]) / (2.0 * e)
            });
            worst_h = worst_h.max((&h0 - &fd).norm() / (1e-6 * fd.norm()));

            let (_, tdot) = model.t_and_tdot(&x, &dv(&q.xd), q.u, q.ud).unwrap();
            let e = 1e-5;
            let shift = |sgn: f64| {
                let xs: Vec<f64> = q.x.iter().zip(&q.xd).map(|(a, b)| a + sgn * e * b).collect();
                model.eval_t(&dv(&xs), q.u + sgn * e * q.ud).unwrap()
            };
            let fd_t = (shift(1.0) - shift(-1.0)) / (2.0 * e);
            worst_td = worst_td.max((&tdot - &fd_t).norm() / (1e-4 * fd_t.norm().max(1e-300)));
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_h <= 1.0 && worst_td <= 1.0 && within(elapsed, 5.0);
    report(
        "8",
        "H₀ and Ṫ against central finite differences (3 systems × 100 points)",
        pass,
        &format!(
            "worst error/tol: H₀ {worst_h:.2e} (rel 1e-6), Ṫ {worst_td:.2e} (rel 1e-4); {:.3} s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}
