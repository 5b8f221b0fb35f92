use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde_json::json;

use axicyl::config::ForcingKind;
use axicyl::diagnostics::{write_csv, CSV_COLUMNS};
use axicyl::elliptic::StreamSolver;
use axicyl::evolution::Forcing;
use axicyl::field::make_initial_data;
use axicyl::inequalities::{interpolation_suite, write_reports, SuiteParams, REPORT_COLUMNS};
use axicyl::mms::{mms_convergence, Manufactured};
use axicyl::picard::{picard_iterate, PicardParams};
use axicyl::semigroup::{commutation_check, semigroup_decay_fit};
use axicyl::simulation::{run_from_state, RunStatus};
use axicyl::sweep::{eps_sweep, h1_variation, write_summaries, SUMMARY_COLUMNS};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::settings::Settings;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Creates `out/name`, hands a buffered writer to `body` and lists the file in
/// the manifest.
fn emit(
    out: &Path,
    name: &str,
    manifest: &mut RunManifest,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let path = out.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(&path)?);
    body(&mut w)?;
    w.flush()?;
    manifest.files.push(name.to_string());
    Ok(())
}

pub fn run(s: &Settings, out: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    let config = &s.solver;
    let grid = config.validate()?;
    let solver = StreamSolver::new(&grid);
    let (initial, forcing) = match config.forcing {
        ForcingKind::None => (make_initial_data(grid, &config.initial, &solver)?, None),
        ForcingKind::Manufactured => {
            let m = &s.mms.setup;
            let ms = Arc::new(Manufactured::new(&grid, m.axial_mode, m.amp_psi, m.amp_gamma));
            (ms.exact_state(grid, 0.0, &solver), Some(ms as Arc<dyn Forcing>))
        }
    };
    let ck_dir = out.join("checkpoints");
    std::fs::create_dir_all(&ck_dir)?;
    let result = run_from_state(config, initial, forcing, Some(&ck_dir))?;
    for p in &result.checkpoints {
        let rel = p.strip_prefix(out).unwrap_or(p);
        manifest.files.push(rel.to_string_lossy().into_owned());
    }
    emit(out, "diagnostics.csv", manifest, |w| write_csv(w, &result.records))?;
    let last = result.records.last().expect("at least the initial record");
    manifest.summary = json!({
        "records": result.records.len(),
        "t_final": last.t,
        "steps": result.last.step,
        "max_margin_1_6": result.last.max_margin_1_6,
        "max_rise_om_over_r": result.last.max_rise_om_over_r,
        "budget_residual_1_5": last.budget_residual_1_5,
    });
    match result.status {
        RunStatus::Completed => Ok(()),
        RunStatus::HaltedBlowup(msg) => Err(CliError::Halt(msg)),
    }
}

pub fn mms(s: &Settings, out: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    let setup = axicyl::mms::MmsSetup {
        scheme: s.solver.scheme,
        ..s.mms.setup
    };
    let levels = mms_convergence(&setup, &s.mms.ladder)?;
    emit(out, "mms.csv", manifest, |w| {
        writeln!(w, "n,h,dt,err_gamma,err_omega,err,order")?;
        for l in &levels {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                l.n,
                num(l.h),
                num(l.dt),
                num(l.err_gamma),
                num(l.err_omega),
                num(l.err),
                opt(l.order)
            )?;
        }
        Ok(())
    })?;
    manifest.summary = json!({ "orders": levels.iter().filter_map(|l| l.order).collect::<Vec<_>>() });
    Ok(())
}

pub fn semigroup(s: &Settings, out: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    let grid = s.solver.validate()?;
    let mut fits = Vec::new();
    for &op in &s.semigroup.operators {
        for &(p, k) in &s.semigroup.cases {
            fits.push(semigroup_decay_fit(op, &grid, p, k, &s.semigroup.decay)?);
        }
    }
    emit(out, "semigroup_decay.csv", manifest, |w| {
        writeln!(w, "op,p,k,family,exponent,std_err,target,deviation,ring_rate")?;
        for f in &fits {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                f.op.name(),
                f.p,
                f.k,
                f.family.name(),
                num(f.exponent),
                num(f.std_err),
                num(f.target),
                num(f.exponent - f.target),
                num(f.ring_rate)
            )?;
        }
        Ok(())
    })?;
    emit(out, "semigroup_samples.csv", manifest, |w| {
        writeln!(w, "op,p,k,t,sup")?;
        for f in &fits {
            for (t, v) in &f.samples {
                writeln!(w, "{},{},{},{},{}", f.op.name(), f.p, f.k, num(*t), num(*v))?;
            }
        }
        Ok(())
    })?;
    let c = &s.commutation;
    let levels = commutation_check(c.r_min, c.r_max, c.l_z, c.t, c.courant, &c.ladder)?;
    emit(out, "commutation.csv", manifest, |w| {
        writeln!(w, "n,h,dt,deviation,ratio")?;
        for l in &levels {
            writeln!(
                w,
                "{},{},{},{},{}",
                l.n,
                num(l.h),
                num(l.dt),
                num(l.deviation),
                opt(l.ratio)
            )?;
        }
        Ok(())
    })?;
    let worst = fits.iter().map(|f| (f.exponent - f.target).abs()).fold(0.0, f64::max);
    manifest.summary = json!({
        "max_abs_deviation": worst,
        "commutation_ratios": levels.iter().filter_map(|l| l.ratio).collect::<Vec<_>>(),
    });
    Ok(())
}

pub fn picard(s: &Settings, out: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    let grid = s.solver.validate()?;
    let solver = Arc::new(StreamSolver::new(&grid));
    let initial = make_initial_data(grid, &s.solver.initial, &solver)?;
    let p = &s.picard;
    let params = PicardParams {
        t_end: p.t_end,
        dt: p.dt,
        j_max: p.j_max,
        p: p.p,
        scheme: s.solver.scheme,
    };
    let rep = picard_iterate(&initial, solver, &params)?;
    emit(out, "picard.csv", manifest, |w| {
        writeln!(w, "j,k,delta,ratio")?;
        for it in &rep.iterates {
            writeln!(w, "{},{},{},{}", it.j, num(it.k), opt(it.delta), opt(it.ratio))?;
        }
        Ok(())
    })?;
    manifest.summary = json!({
        "direct_diff": rep.direct_diff,
        "direct_tolerance": rep.direct_tolerance,
        "u0_l2": rep.u0_l2,
        "steps": rep.steps,
    });
    Ok(())
}

pub fn sweep_eps(s: &Settings, out: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    s.solver.validate()?;
    let rows = eps_sweep(&s.solver, &s.sweep_eps);
    emit(out, "eps_sweep.csv", manifest, |w| write_summaries(w, &rows))?;
    manifest.summary = json!({
        "h1_variation": h1_variation(&rows),
        "completed": rows.iter().filter(|r| r.completed()).count(),
        "runs": rows.len(),
    });
    Ok(())
}

pub fn inequalities(s: &Settings, out: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    let grid = s.solver.validate()?;
    let q = &s.inequalities;
    let params = SuiteParams {
        seed: s.solver.seed,
        first: q.first,
        count: q.count,
        interpolation: q.interpolation,
    };
    let reports = interpolation_suite(grid, &q.ids, &params)?;
    emit(out, "inequalities.csv", manifest, |w| write_reports(w, &reports))?;
    emit(out, "inequality_ratios.csv", manifest, |w| {
        writeln!(w, "id,index,ratio")?;
        for r in &reports {
            for (i, v) in r.ratios.iter().enumerate() {
                writeln!(w, "{},{},{}", r.id.name(), i, num(*v))?;
            }
        }
        Ok(())
    })?;
    manifest.summary = json!({
        "violations": reports.iter().filter_map(|r| r.violations).sum::<usize>(),
        "samples": q.count,
    });
    Ok(())
}

pub fn info(s: &Settings) -> std::io::Result<()> {
    let mut w = std::io::stdout().lock();
    writeln!(w, "axicyl {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w)?;
    writeln!(w, "diagnostics.csv columns: {}", CSV_COLUMNS.join(","))?;
    writeln!(w, "inequalities.csv columns: {}", REPORT_COLUMNS.join(","))?;
    writeln!(w, "eps_sweep.csv columns: {}", SUMMARY_COLUMNS.join(","))?;
    writeln!(w)?;
    writeln!(w, "# effective configuration")?;
    for (k, v) in s.pairs() {
        writeln!(w, "{k} = {v}")?;
    }
    Ok(())
}
