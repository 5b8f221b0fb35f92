//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::sync::Arc;
use std::time::Instant;

use axicyl::config::{Scheme, SolverConfig};
use axicyl::diagnostics::{
    energy_budget_check, identity_5_3_check, swirl_bounds_check, vorticity_budgets_check, DiagnosticsRecord,
};
use axicyl::elliptic::StreamSolver;
use axicyl::field::{bump_field, make_initial_data, AxisymState, BoundaryKind, InitialKind, Support};
use axicyl::grid::{Exponent, Grid, Operator};
use axicyl::inequalities::{
    interpolation_suite, CheckKind, InequalityId, InequalityReport, Interpolation, SuiteParams,
};
use axicyl::mms::{mms_convergence, MmsSetup};
use axicyl::picard::{picard_iterate, PicardParams};
use axicyl::semigroup::{commutation_check, semigroup_decay_fit, DecayFamily, DecayParams};
use axicyl::simulation::{run_simulation, RunOutput, RunStatus};
use axicyl::sweep::{eps_sweep, h1_variation};

type Outcome = (bool, String);

fn swirl_config(n: usize, dt: f64, amplitude: f64, secondary: f64, t_end: f64) -> SolverConfig {
    let mut c = SolverConfig::default();
    c.grid.n_r = n + 1;
    c.grid.n_z = n;
    c.dt = Some(dt);
    c.t_end = t_end;
    c.initial.kind = InitialKind::SwirlBump;
    c.initial.amplitude = amplitude;
    c.initial.secondary_amplitude = secondary;
    c
}

fn run(c: &SolverConfig) -> RunOutput {
    run_simulation(c, None, None).expect("run failed")
}

struct Runs {
    swirl_128: RunOutput,
    swirl_256: RunOutput,
    no_swirl_128: RunOutput,
    monotone_128: RunOutput,
    large_128: RunOutput,
}

impl Runs {
    fn new() -> Self {
        let mut no_swirl = swirl_config(128, 0.002, 1.0, 0.0, 1.0);
        no_swirl.initial.kind = InitialKind::NoSwirlBump;
        let mut monotone = swirl_config(128, 1.0, 1.0, 0.5, 1.0);
        monotone.dt = None;
        monotone.scheme = Scheme::MONOTONE;
        Runs {
            swirl_128: run(&swirl_config(128, 0.002, 1.0, 0.5, 1.0)),
            swirl_256: run(&swirl_config(256, 0.001, 1.0, 0.5, 1.0)),
            no_swirl_128: run(&no_swirl),
            monotone_128: run(&monotone),
            large_128: run(&swirl_config(128, 0.002, 5.0, 2.0, 2.0)),
        }
    }

    fn r_min_one(&self) -> [(&'static str, &RunOutput); 5] {
        [
            ("swirl128", &self.swirl_128),
            ("swirl256", &self.swirl_256),
            ("noswirl128", &self.no_swirl_128),
            ("monotone128", &self.monotone_128),
            ("large128", &self.large_128),
        ]
    }
}

fn first(out: &RunOutput) -> &DiagnosticsRecord {
    &out.records[0]
}

fn c1_mms() -> Outcome {
    let lv = mms_convergence(&MmsSetup::default(), &[64, 128, 256]).expect("mms");
    let orders: Vec<f64> = lv.iter().filter_map(|l| l.order).collect();
    let ok = orders.len() == 2 && orders.iter().all(|o| (1.8..=2.2).contains(o));
    (
        ok,
        format!(
            "errors {:.3e} {:.3e} {:.3e}, orders {:.3} {:.3}",
            lv[0].err, lv[1].err, lv[2].err, orders[0], orders[1]
        ),
    )
}

fn c2_energy(runs: &Runs) -> Outcome {
    let a = energy_budget_check(&runs.swirl_128.records).unwrap();
    let b = energy_budget_check(&runs.swirl_256.records).unwrap();
    let flux_ok = [&runs.swirl_128, &runs.swirl_256]
        .iter()
        .all(|o| o.records.iter().all(|r| r.bdry_flux >= 0.0) && o.records.last().unwrap().bdry_flux > 0.0);
    let ok = a < 1e-3 && a / b >= 3.0 && flux_ok;
    (
        ok,
        format!(
            "residual 128: {a:.3e}, 256: {b:.3e}, ratio {:.2}, boundary flux non-negative and active: {flux_ok}",
            a / b
        ),
    )
}

fn c3_max_principle(runs: &Runs) -> Outcome {
    let mono = runs.monotone_128.last.max_margin_1_6;
    let sup0 = first(&runs.swirl_128).sup_gamma;
    let centered = runs.swirl_128.last.max_margin_1_6;
    let ok = mono <= 0.0 && centered <= 1e-6 * sup0;
    (
        ok,
        format!(
            "monotone step margin {mono:.3e} over {} steps; default step margin {centered:.3e} (limit {:.1e})",
            runs.monotone_128.last.step,
            1e-6 * sup0
        ),
    )
}

fn c4_l4(runs: &Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, out) in runs.r_min_one() {
        if first(out).sup_gamma == 0.0 {
            continue;
        }
        let m = swirl_bounds_check(&out.records, 1.0).unwrap();
        let rel = m.l4 / m.l4_bound;
        ok &= rel <= 1e-8;
        parts.push(format!("{name} {rel:.3e}"));
    }
    (ok, format!("relative L4 margins: {}", parts.join(", ")))
}

fn c5_vorticity(runs: &Runs) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, out) in runs.r_min_one() {
        let vb = vorticity_budgets_check(&out.records).unwrap();
        ok &= vb.excess_1_11 <= 0.0;
        parts.push(format!("{name} {:.3e}", vb.excess_1_11));
    }
    let rise = runs.no_swirl_128.last.max_rise_om_over_r;
    ok &= rise <= 1e-10;
    (
        ok,
        format!(
            "max (lhs - E)/E: {}; no-swirl max step rise of ||omega/r||: {rise:.3e}",
            parts.join(", ")
        ),
    )
}

fn identity_dev(r_max: f64, n_z: usize, n_r: usize) -> f64 {
    let mut c = SolverConfig::default();
    c.initial.kind = InitialKind::NoSwirlBump;
    c.grid.r_max = r_max;
    c.grid.n_r = n_r;
    c.grid.n_z = n_z;
    let g = c.validate().unwrap();
    let solver = StreamSolver::new(&g);
    identity_5_3_check(&make_initial_data(g, &c.initial, &solver).unwrap())
}

fn c6_identity() -> Outcome {
    let base = identity_dev(5.0, 128, 129);
    let wide = identity_dev(10.0, 128, 289);
    let fine = identity_dev(5.0, 256, 257);
    let both = identity_dev(10.0, 256, 577);
    let ok = base < 1e-2 && fine < base && both < base;
    (
        ok,
        format!("R=5 128^2: {base:.4e}; h/2: {fine:.4e}; R=10 and h/2: {both:.4e}; R=10 at fixed h: {wide:.6e}"),
    )
}

fn suite(n: usize, first: u64) -> Vec<InequalityReport> {
    let g = Grid::new(1.0, 6.0, 4.0, n + 1, n).unwrap();
    let p = SuiteParams {
        seed: 2024,
        first,
        count: 100,
        interpolation: Interpolation { p: 4.0, q: 2.0 },
    };
    interpolation_suite(g, &InequalityId::ALL, &p).unwrap()
}

fn c7_inequalities() -> Outcome {
    let a = suite(128, 0);
    let b = suite(128, 100);
    let fine = suite(256, 0);
    let mut ok = true;
    let mut parts = Vec::new();
    for ((x, y), z) in a.iter().zip(&b).zip(&fine) {
        match x.id.kind() {
            CheckKind::Fitted => {
                let batch = (x.max_ratio - y.max_ratio).abs() / x.max_ratio.min(y.max_ratio);
                let refine = (x.max_ratio - z.max_ratio).abs() / x.max_ratio.min(z.max_ratio);
                ok &= batch <= 0.2 && refine <= 0.2;
                parts.push(format!(
                    "{} C={:.3} ({:+.1}%/{:+.1}%)",
                    x.id.name(),
                    x.max_ratio,
                    100.0 * batch,
                    100.0 * refine
                ));
            }
            _ => {
                let v = x.violations.unwrap() + y.violations.unwrap() + z.violations.unwrap();
                ok &= v == 0 && x.samples + y.samples >= 200;
                parts.push(format!(
                    "{} violations {v}/{}",
                    x.id.name(),
                    x.samples + y.samples + z.samples
                ));
            }
        }
    }
    (ok, parts.join("; "))
}

fn c8_semigroup() -> Outcome {
    let g = Grid::new(1.0, 81.0, 160.0, 321, 640).unwrap();
    let params = DecayParams {
        family: DecayFamily::Axis,
        n_samples: 8,
        steps_per_sample: 32,
    };
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for op in [Operator::L0, Operator::L1, Operator::L0p] {
        for (p, k) in [
            (Exponent::Finite(2.0), 0),
            (Exponent::Finite(6.0), 0),
            (Exponent::Finite(6.0), 1),
            (Exponent::Infinity, 0),
        ] {
            let f = semigroup_decay_fit(op, &g, p, k, &params).unwrap();
            let d = (f.exponent - f.target).abs();
            worst = worst.max(d);
            ok &= d <= 0.08;
            parts.push(format!("{}({},{}) {:.3}/{:.3}", op.name(), p, k, f.exponent, f.target));
        }
    }
    (ok, format!("max |fit - target| {worst:.3}; {}", parts.join(" ")))
}

fn c9_commutation() -> Outcome {
    let lv = commutation_check(1.0, 5.0, 4.0, 0.1, 0.5, &[32, 64, 128]).unwrap();
    let ratios: Vec<f64> = lv.iter().filter_map(|l| l.ratio).collect();
    let ok = ratios.len() == 2 && ratios.iter().all(|&r| r >= 3.0);
    (
        ok,
        format!(
            "deviations {:.3e} {:.3e} {:.3e}, ratios {:.2} {:.2}",
            lv[0].deviation, lv[1].deviation, lv[2].deviation, ratios[0], ratios[1]
        ),
    )
}

fn c10_picard() -> Outcome {
    let g = Grid::new(1.0, 5.0, 4.0, 65, 64).unwrap();
    let solver = Arc::new(StreamSolver::new(&g));
    let sup = Support {
        r_center: 2.5,
        r_half_width: 0.8,
        z_center: 2.0,
        z_half_width: 1.0,
    };
    let gamma = bump_field(g, &sup, BoundaryKind::Robin(2.0)).scaled(2.0);
    let omega = bump_field(g, &Support { z_center: 1.5, ..sup }, BoundaryKind::Dirichlet0).scaled(20.0);
    let s0 = AxisymState::from_dynamic(0.0, gamma, omega, &solver);
    let params = PicardParams {
        t_end: 0.5,
        dt: 0.0025,
        j_max: 8,
        p: 4.0,
        scheme: Scheme::DEFAULT,
    };
    let rep = picard_iterate(&s0, solver, &params).unwrap();
    let r = rep.ratios();
    let head = &r[..5.min(r.len())];
    let ok = head.len() == 5
        && head.iter().all(|&x| x < 1.0)
        && head.windows(2).all(|w| w[1] < w[0])
        && rep.direct_diff < rep.direct_tolerance;
    let shown: Vec<String> = head.iter().map(|x| format!("{x:.4}")).collect();
    (
        ok,
        format!(
            "ratios j=1..5 [{}]; |u_jmax - u_direct| {:.3e} < {:.3e}",
            shown.join(" "),
            rep.direct_diff,
            rep.direct_tolerance
        ),
    )
}

fn c11_eps() -> Outcome {
    let mut c = SolverConfig::default();
    c.initial.kind = InitialKind::NoSwirlBump;
    c.dt = Some(0.002);
    let rows = eps_sweep(&c, &[1.0, 0.5, 0.25, 0.125]);
    let var = h1_variation(&rows).unwrap_or(f64::INFINITY);
    let ok = rows.iter().all(|r| r.completed() && r.residual_6_1 < 1e-3) && var < 0.5;
    let parts: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "eps {} {} res {:.2e} C {:.2e}",
                r.eps, r.status, r.residual_6_1, r.c_6_3
            )
        })
        .collect();
    (ok, format!("H1 variation {:.2}%; {}", 100.0 * var, parts.join(", ")))
}

fn c12_large(runs: &Runs) -> Outcome {
    let out = &runs.large_128;
    let f = first(out);
    let res = energy_budget_check(&out.records).unwrap();
    let m = swirl_bounds_check(&out.records, 1.0).unwrap();
    let vb = vorticity_budgets_check(&out.records).unwrap();
    let t_final = out.records.last().unwrap().t;
    let ok = out.status == RunStatus::Completed
        && (t_final - 2.0).abs() < 1e-12
        && res < 1e-3
        && out.last.max_margin_1_6 <= 1e-6 * f.sup_gamma
        && m.l4 <= 1e-8 * m.l4_bound
        && vb.excess_1_11 <= 0.0;
    (ok, format!(
        "sup Gamma0 {:.2}, E0 {:.2}, reached t={t_final}, residual {res:.3e}, max-principle margin {:.2e}, L4 margin {:.2e}, vorticity-budget excess {:.2e}",
        f.sup_gamma, f.e_kin, out.last.max_margin_1_6, m.l4 / m.l4_bound, vb.excess_1_11
    ))
}

fn main() {
    let started = Instant::now();
    let runs = Runs::new();
    println!("shared runs ready in {:.1?}", started.elapsed());
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("manufactured-solution convergence", Box::new(c1_mms)),
        ("energy equality", Box::new(|| c2_energy(&runs))),
        ("swirl maximum principle", Box::new(|| c3_max_principle(&runs))),
        ("L4 swirl bound", Box::new(|| c4_l4(&runs))),
        ("vorticity budget", Box::new(|| c5_vorticity(&runs))),
        ("identity ||grad v|| = ||omega||", Box::new(c6_identity)),
        ("interpolation suite", Box::new(c7_inequalities)),
        ("semigroup decay", Box::new(c8_semigroup)),
        ("commutation", Box::new(c9_commutation)),
        ("picard iteration", Box::new(c10_picard)),
        ("eps-sweep", Box::new(c11_eps)),
        ("large-data regularity smoke test", Box::new(|| c12_large(&runs))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = check();
        failed += usize::from(!ok);
        println!(
            "criterion {:2} {}: {name} ({:.1?}) | {detail}",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed()
        );
    }
    println!(
        "{} of {} criteria passed in {:.1?}",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
