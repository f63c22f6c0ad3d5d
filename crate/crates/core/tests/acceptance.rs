//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use acnl::experiments::{rates_from_errors, restrict, simulate_observed, RunOutput};
use acnl::grid::{grad_inner, inner, laplacian, norm, quad};
use acnl::linsolve::{woodbury_solve, LocalOperator, RankOneTerm};
use acnl::model::eq_aux;
use acnl::{
    Constraint, ExperimentConfig, Field, Grid, InitialCondition, Method, ModelParams, Norm, SolverOptions,
};
use rand::Rng;

const PAIRINGS: [(Method, Constraint); 4] = [
    (Method::Eq, Constraint::Penalty),
    (Method::Eq, Constraint::Lagrange),
    (Method::Sav, Constraint::Penalty),
    (Method::Sav, Constraint::Lagrange),
];

struct Outcome {
    pass: bool,
    detail: String,
}

/// Worst `max residual / (1 + ‖φⁿ⁺¹‖₂)` over every step seen so far.
#[derive(Default)]
struct ResidualLog {
    worst: f64,
    steps: usize,
    worst_at: String,
}

impl ResidualLog {
    fn run(&mut self, label: &str, cfg: &ExperimentConfig) -> acnl::Result<RunOutput> {
        let mut worst = 0.0f64;
        let mut steps = 0;
        let out = simulate_observed(cfg, |r| {
            worst = worst.max(r.residual_ratio());
            steps += 1;
        })?;
        self.steps += steps;
        if worst >= self.worst {
            self.worst = worst;
            self.worst_at = label.to_string();
        }
        Ok(out)
    }
}

fn variant(method: Method, constraint: Constraint) -> String {
    format!("{method}-{constraint}")
}

fn difference(a: &Field, b: &Field) -> Field {
    a.zip_map(b, |x, y| x - y)
}

fn criterion_1(log: &mut ResidualLog) -> acnl::Result<Outcome> {
    let dts: Vec<f64> = (0..6).map(|k| 0.1 / f64::from(1 << k)).collect();
    let mut pass = true;
    let mut notes = Vec::new();
    let mut errors = Vec::new();
    for (method, constraint) in PAIRINGS {
        let name = variant(method, constraint);
        let mut finals = Vec::new();
        for &dt in &dts {
            let cfg = ExperimentConfig {
                dt,
                ..ExperimentConfig::refinement_study(constraint, method)
            };
            finals.push(log.run(&format!("{name} dt={dt}"), &cfg)?.state.phi);
        }
        let diffs: Vec<Field> = finals.windows(2).map(|w| difference(&w[0], &w[1])).collect();
        let e_l2: Vec<f64> = diffs.iter().map(|d| norm(d, Norm::L2)).collect();
        let e_h1: Vec<f64> = diffs.iter().map(|d| norm(d, Norm::H1)).collect();
        let r_l2 = rates_from_errors(&e_l2)?;
        let r_h1 = rates_from_errors(&e_h1)?;
        let finest: Vec<f64> = r_l2[1..].iter().chain(&r_h1[1..]).copied().collect();
        let (lo, hi) = finest.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        if !(1.8..=2.2).contains(&lo) || !(1.8..=2.2).contains(&hi) {
            pass = false;
        }
        notes.push(format!("{name} rates [{lo:.3}, {hi:.3}]"));
        errors.push((method, constraint, e_l2, e_h1));
    }
    let mut gap = 0.0f64;
    for constraint in [Constraint::Penalty, Constraint::Lagrange] {
        let find = |m: Method| errors.iter().find(|e| e.0 == m && e.1 == constraint).unwrap();
        let (eq, sav) = (find(Method::Eq), find(Method::Sav));
        for (a, b) in eq.2.iter().zip(&sav.2).chain(eq.3.iter().zip(&sav.3)) {
            gap = gap.max((a - b).abs() / a.abs());
        }
    }
    if gap > 0.01 {
        pass = false;
    }
    notes.push(format!("max EQ/SAV error gap {:.3}%", 100.0 * gap));
    Ok(Outcome {
        pass,
        detail: notes.join(", "),
    })
}

fn criterion_2(log: &mut ResidualLog) -> acnl::Result<Outcome> {
    let ns = [8usize, 16, 32, 64, 128];
    let mut finals = Vec::new();
    for &n in &ns {
        let cfg = ExperimentConfig {
            n,
            dt: 1e-3,
            t_end: 0.1,
            ..ExperimentConfig::refinement_study(Constraint::Lagrange, Method::Eq)
        };
        finals.push(log.run(&format!("eq-lagrange n={n}"), &cfg)?.state.phi);
    }
    let mut e_l2 = Vec::new();
    let mut e_h1 = Vec::new();
    for w in finals.windows(2) {
        let d = difference(&restrict(&w[1])?, &w[0]);
        e_l2.push(norm(&d, Norm::L2));
        e_h1.push(norm(&d, Norm::H1));
    }
    let r_l2 = rates_from_errors(&e_l2)?;
    let r_h1 = rates_from_errors(&e_h1)?;
    let finest: Vec<f64> = r_l2[1..].iter().chain(&r_h1[1..]).copied().collect();
    let pass = finest.iter().all(|r| (1.7..=2.2).contains(r));
    Ok(Outcome {
        pass,
        detail: format!(
            "L2 rates {:.3} {:.3}, H1 rates {:.3} {:.3}",
            r_l2[1], r_l2[2], r_h1[1], r_h1[2]
        ),
    })
}

fn all_variants() -> impl Iterator<Item = (Method, Constraint)> {
    Method::ALL
        .into_iter()
        .flat_map(|m| Constraint::ALL.into_iter().map(move |c| (m, c)))
}

fn drop_run(method: Method, constraint: Constraint, dt: f64, t_end: f64) -> ExperimentConfig {
    ExperimentConfig {
        n: 128,
        dt,
        t_end,
        ..ExperimentConfig::drop_merge(constraint, method)
    }
}

fn criterion_3(log: &mut ResidualLog) -> Outcome {
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for (method, constraint) in all_variants() {
        for dt in [1e-1, 1e-2, 1e-3] {
            let label = format!("{} dt={dt}", variant(method, constraint));
            match log.run(&label, &drop_run(method, constraint, dt, 50.0 * dt)) {
                Ok(out) => {
                    for w in out.series.windows(2) {
                        let (a, b) = (w[0].energy_modified, w[1].energy_modified);
                        let rel = (b - a) / (1.0 + a.abs());
                        worst = worst.max(rel);
                        if b - a > 1e-10 * (1.0 + a.abs()) {
                            pass = false;
                        }
                    }
                }
                Err(e) => {
                    pass = false;
                    failures.push(format!("{label}: {e}"));
                }
            }
        }
    }
    let mut detail = format!("18 runs x 50 steps, worst relative energy change {worst:+.3e}");
    if !failures.is_empty() {
        detail += &format!("; errors: {}", failures.join("; "));
    }
    Outcome { pass, detail }
}

fn criterion_4(log: &mut ResidualLog) -> acnl::Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    for (method, constraint) in all_variants() {
        let name = variant(method, constraint);
        let out = log.run(&format!("{name} T=2"), &drop_run(method, constraint, 1e-3, 2.0))?;
        let v0 = out.series[0].volume;
        let drift = out
            .series
            .iter()
            .map(|r| ((r.volume - v0) / v0).abs())
            .fold(0.0, f64::max);
        let k = out.series.len();
        let (last, prev) = (out.series[k - 1].volume, out.series[k - 2].volume);
        let ok = match constraint {
            Constraint::Lagrange => drift <= 1e-6,
            Constraint::Penalty => drift <= 1e-3,
            Constraint::Classic => last < 0.95 * v0 && last < prev,
        };
        pass &= ok;
        notes.push(match constraint {
            Constraint::Classic => format!("{name} V(T)/V0 {:.4}", last / v0),
            _ => format!("{name} drift {drift:.1e}"),
        });
    }
    Ok(Outcome {
        pass,
        detail: notes.join(", "),
    })
}

fn criterion_5(log: &ResidualLog) -> Outcome {
    Outcome {
        pass: log.steps > 0 && log.worst <= 1e-9,
        detail: format!(
            "{} steps from criteria 1-4, worst residual/(1+|phi|) {:.3e} ({})",
            log.steps, log.worst, log.worst_at
        ),
    }
}

fn random_term(grid: Grid, rng: &mut rand::rngs::StdRng) -> RankOneTerm {
    // Mix the structured shapes used by the schemes with fully random ones.
    let direction = match rng.gen_range(0..3) {
        0 => Field::constant(grid, 1.0),
        _ => common::random_field(grid, rng, -1.0, 1.0),
    };
    let weight = match rng.gen_range(0..3) {
        0 => direction.clone(),
        1 => common::random_field(grid, rng, 0.5, 2.0),
        _ => common::random_field(grid, rng, -1.0, 1.0),
    };
    RankOneTerm {
        direction,
        weight,
        coeff: rng.gen_range(-0.5..2.0),
    }
}

fn criterion_6() -> acnl::Result<Outcome> {
    let grid = Grid::new(8)?;
    let mut rng = common::rng(6);
    let opts = SolverOptions::with_tol(1e-14);
    let mut worst = 0.0f64;
    let instances = 150;
    for i in 0..instances {
        let diag = rng
            .gen_bool(0.5)
            .then(|| common::random_field(grid, &mut rng, 0.0, 3.0));
        let op = LocalOperator::new(grid, rng.gen_range(0.5..50.0), rng.gen_range(0.0..0.5), diag);
        let terms: Vec<RankOneTerm> = (0..i % 3).map(|_| random_term(grid, &mut rng)).collect();
        let b = common::random_field(grid, &mut rng, -1.0, 1.0);
        let x = woodbury_solve(&op, &terms, &b, &opts)?.x;
        worst = worst.max(common::rel_diff(&x.interior(), &common::dense_solve(&op, &terms, &b)));
    }
    Ok(Outcome {
        pass: worst <= 1e-10,
        detail: format!("{instances} instances with 0/1/2 terms, worst relative difference {worst:.3e}"),
    })
}

fn criterion_7() -> acnl::Result<Outcome> {
    let mut rng = common::rng(7);
    let (mut sbp, mut mass) = (0.0f64, 0.0f64);
    for n in [4usize, 8, 16, 32, 64] {
        let grid = Grid::new(n)?;
        for _ in 0..20 {
            let phi = common::random_field(grid, &mut rng, -1.0, 1.0);
            let psi = common::random_field(grid, &mut rng, -1.0, 1.0);
            let lhs = inner(&phi, &laplacian(&psi));
            let rhs = -grad_inner(&phi, &psi);
            sbp = sbp.max((lhs - rhs).abs() / rhs.abs().max(1.0));
            mass = mass.max(quad(&laplacian(&phi)).abs());
        }
    }
    let mut dg = 0.0f64;
    for params in [ModelParams::default(), ModelParams::refinement_study(Constraint::Classic, Method::Eq)] {
        for k in 0..=40 {
            let phi = -0.5 + 2.0 * f64::from(k) / 40.0;
            let step = 1e-5;
            let (qp, _) = eq_aux(phi + step, &params)?;
            let (qm, _) = eq_aux(phi - step, &params)?;
            let (_, g) = eq_aux(phi, &params)?;
            dg = dg.max(((qp - qm) / (2.0 * step) - g).abs());
        }
    }
    Ok(Outcome {
        pass: sbp <= 1e-12 && mass <= 1e-11 && dg <= 1e-6,
        detail: format!("summation by parts {sbp:.2e}, quad(laplacian) {mass:.2e}, g vs central difference {dg:.2e}"),
    })
}

fn criterion_8() -> acnl::Result<Outcome> {
    let mut worst = 0.0f64;
    for (method, constraint) in all_variants() {
        for c in [0.0, 1.0] {
            for dt in [1e-3, 1e-1] {
                let cfg = ExperimentConfig {
                    n: 16,
                    dt,
                    t_end: 100.0 * dt,
                    ic: InitialCondition::Constant(c),
                    ..ExperimentConfig::drop_merge(constraint, method)
                };
                let out = simulate_observed(&cfg, |_| {})?;
                assert_eq!(out.state.step, 100);
                worst = worst.max(common::max_abs_diff(&out.state.phi, c));
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-12,
        detail: format!("6 variants x phi in {{0, 1}} x 2 time steps, 100 steps, worst |phi - c| {worst:.2e}"),
    })
}

fn report(id: u8, title: &str, start: Instant, outcome: acnl::Result<Outcome>) -> bool {
    let outcome = outcome.unwrap_or_else(|e| Outcome {
        pass: false,
        detail: format!("error: {e}"),
    });
    println!(
        "[{}] criterion {id} {title}: {} ({:.1?})",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.detail,
        start.elapsed()
    );
    outcome.pass
}

fn main() -> ExitCode {
    let mut log = ResidualLog::default();
    let mut ok = true;

    let t = Instant::now();
    ok &= report(1, "temporal convergence", t, criterion_1(&mut log));
    let t = Instant::now();
    ok &= report(2, "spatial convergence", t, criterion_2(&mut log));
    let t = Instant::now();
    ok &= report(3, "energy dissipation", t, Ok(criterion_3(&mut log)));
    let t = Instant::now();
    ok &= report(4, "volume behaviour", t, criterion_4(&mut log));
    let t = Instant::now();
    ok &= report(5, "scheme residuals", t, Ok(criterion_5(&log)));
    let t = Instant::now();
    ok &= report(6, "woodbury vs dense solve", t, criterion_6());
    let t = Instant::now();
    ok &= report(7, "operator identities", t, criterion_7());
    let t = Instant::now();
    ok &= report(8, "fixed points", t, criterion_8());

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
