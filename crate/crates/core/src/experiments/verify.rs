//! Self-checks of a build: factorization identities, derivative accuracy,
//! projection algebra, energy conservation and formulation equivalence.

use std::thread;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::factorization::el_matrices_from_t;
use crate::integration::{simulate, Drive, Formulation, SimulationConfig};
use crate::linalg::{kernel_projection, max_abs, pseudo_inverse};
use crate::model::{ExogenousSignal, State};
use crate::systems::{CaseStudy, PhasePoint, SystemKind};

const POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub system: SystemKind,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error relative to its tolerance.
    pub worst: f64,
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<6} {:<28} worst/tol = {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.system.name(),
            self.name,
            self.worst
        )
    }
}

/// Tracks `max(error / tolerance)`.
struct Worst(f64);

impl Worst {
    fn add(&mut self, err: f64, tol: f64) {
        let r = if err.is_finite() { err / tol } else { f64::INFINITY };
        self.0 = self.0.max(r);
    }
}

fn check(system: SystemKind, name: &'static str, w: Worst) -> CheckResult {
    CheckResult {
        system,
        name,
        passed: w.0 <= 1.0,
        worst: w.0,
    }
}

fn points(cs: &CaseStudy, seed: u64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..POINTS).map(|_| cs.random_point(&mut rng)).collect()
}

fn identities(cs: &CaseStudy, pts: &[PhasePoint]) -> Result<Worst> {
    let mut w = Worst(0.0);
    for p in pts {
        let (t, tdot) = cs.assembled.t_and_tdot(&p.x, &p.xdot, p.u, p.udot)?;
        let el = el_matrices_from_t(&t, &tdot)?;
        let or = cs.oracle.el_matrices(&p.x, &p.xdot, p.u, p.udot)?;
        w.add((&el.m - &or.m).norm(), 1e-9 * (1.0 + or.m.norm()));
        w.add((&t.transpose() * &tdot - &or.n).norm(), 1e-7 * (1.0 + or.n.norm()));
    }
    Ok(w)
}

fn h0_finite_differences(cs: &CaseStudy, pts: &[PhasePoint]) -> Result<Worst> {
    let mut w = Worst(0.0);
    let eps = 1e-6;
    for p in pts {
        let t = cs.assembled.eval_t(&p.x, p.u)?;
        let s = cs.assembled.inertia().sqrt_entries().to_vec();
        let h0 = DMatrix::from_fn(t.nrows(), t.ncols(), |k, i| t[(k, i)] / s[k]);
        let fd = DMatrix::from_fn(t.nrows(), t.ncols(), |k, i| {
            let mut xp = p.x.clone();
            let mut xm = p.x.clone();
            xp[i] += eps;
            xm[i] -= eps;
            (cs.positions(&xp, p.u)[k] - cs.positions(&xm, p.u)[k]) / (2.0 * eps)
        });
        w.add(max_abs(&(&h0 - &fd)), 1e-6 * max_abs(&fd).max(1e-12));
    }
    Ok(w)
}

fn tdot_finite_differences(cs: &CaseStudy, pts: &[PhasePoint]) -> Result<Worst> {
    let mut w = Worst(0.0);
    let eps = 1e-5;
    for p in pts {
        let (_, tdot) = cs.assembled.t_and_tdot(&p.x, &p.xdot, p.u, p.udot)?;
        let tp = cs.assembled.eval_t(&(&p.x + &p.xdot * eps), p.u + p.udot * eps)?;
        let tm = cs.assembled.eval_t(&(&p.x - &p.xdot * eps), p.u - p.udot * eps)?;
        let fd = (tp - tm) / (2.0 * eps);
        w.add(max_abs(&(&tdot - &fd)), 1e-4 * max_abs(&fd).max(1e-12));
    }
    Ok(w)
}

fn projection(cs: &CaseStudy, pts: &[PhasePoint]) -> Result<Worst> {
    let mut w = Worst(0.0);
    let tol = 1e-10;
    for p in pts {
        let t = cs.assembled.eval_t(&p.x, p.u)?;
        let tp = pseudo_inverse(&t)?;
        let proj = kernel_projection(&t, &tp)?;
        let n = t.ncols();
        let r = t.nrows();
        let range = &t * &tp;
        w.add(max_abs(&(&tp * &t - DMatrix::identity(n, n))), tol);
        w.add(max_abs(&(&range - range.transpose())), tol);
        w.add(max_abs(&(&proj * &proj - &proj)), tol);
        w.add(max_abs(&(&proj - proj.transpose())), tol);
        w.add(max_abs(&(&proj * &t)), tol);
        w.add(max_abs(&(&proj + &range - DMatrix::identity(r, r))), tol);
    }
    Ok(w)
}

/// Unforced motion with a constant exogenous input keeps `½‖Tẋ‖²`.
fn energy(cs: &CaseStudy) -> Result<Worst> {
    let (x, xdot, u) = match cs.kind {
        SystemKind::Crank => (vec![0.3], vec![8.0], 0.0),
        SystemKind::Ftv => (vec![0.0], vec![200.0], 0.6),
        SystemKind::Robot => (vec![0.4, -0.7], vec![1.5, -2.0], 0.0),
    };
    let init = State::from_slices(&x, &xdot, 0.0)?;
    let drive = Drive::new(ExogenousSignal::constant(u));
    let mut w = Worst(0.0);
    for f in [Formulation::EulerLagrange, Formulation::Factorized] {
        let cfg = SimulationConfig {
            t_end: 1.0,
            h: 1e-3,
            formulation: f,
            ..Default::default()
        };
        let tr = simulate(cs.assembled.as_ref(), &cfg, &init, &drive)?;
        let e = tr.channel("energy").expect("energy channel");
        for v in e {
            w.add((v - e[0]).abs() / e[0], 1e-6);
        }
    }
    Ok(w)
}

/// Both formulations trace the same motion.
fn equivalence(cs: &CaseStudy) -> Result<Worst> {
    let (x, xdot, signal) = match cs.kind {
        SystemKind::Crank => (vec![0.3], vec![8.0], ExogenousSignal::constant(0.0)),
        SystemKind::Ftv => (
            vec![0.0],
            vec![200.0],
            ExogenousSignal::analytic(|t| 1.22 * (3.0 * t).sin(), |t| 3.66 * (3.0 * t).cos()),
        ),
        SystemKind::Robot => (vec![0.4, -0.7], vec![1.5, -2.0], ExogenousSignal::constant(0.0)),
    };
    let init = State::from_slices(&x, &xdot, 0.0)?;
    let drive = Drive::new(signal);
    let run = |f| {
        let cfg = SimulationConfig {
            t_end: 0.5,
            h: 1e-3,
            formulation: f,
            ..Default::default()
        };
        simulate(cs.assembled.as_ref(), &cfg, &init, &drive)
    };
    let el = run(Formulation::EulerLagrange)?;
    let fact = run(Formulation::Factorized)?;
    let mut w = Worst(0.0);
    for (a, b) in el.states.iter().zip(&fact.states) {
        let scale = 1.0 + a.xdot.amax();
        w.add((&a.x - &b.x).amax().max((&a.xdot - &b.xdot).amax()), 1e-8 * scale);
    }
    Ok(w)
}

pub fn verify_system(kind: SystemKind) -> Result<Vec<CheckResult>> {
    let cs = CaseStudy::with_defaults(kind)?;
    let pts = points(&cs, 0x5eed ^ kind as u64);
    Ok(vec![
        check(kind, "factorization identities", identities(&cs, &pts)?),
        check(kind, "H0 vs finite differences", h0_finite_differences(&cs, &pts)?),
        check(kind, "Tdot vs finite differences", tdot_finite_differences(&cs, &pts)?),
        check(kind, "projection identities", projection(&cs, &pts)?),
        check(kind, "energy conservation", energy(&cs)?),
        check(kind, "formulation equivalence", equivalence(&cs)?),
    ])
}

/// Runs the checks of every listed system, one thread per system.
pub fn verify(kinds: &[SystemKind]) -> Result<Vec<CheckResult>> {
    let results: Vec<Result<Vec<CheckResult>>> = thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&k| s.spawn(move || verify_system(k)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification thread panicked"))
            .collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
