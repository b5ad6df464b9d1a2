use crate::config::RunConfig;
use pmech::catalog::{named, CatalogRng, TestSignal, Widths, NAMED};
use pmech::dynamics::{
    alternative_residual, check_consistency, evolve_rk4, write_snapshots, write_trajectory_csv, Rk4Config,
};
use pmech::oscillator::{oscillator_hamiltonian, transport_flow};
use pmech::presets;
use pmech::schrodinger::{
    correspondence_residuals, interior, loglog_slope, rel_op_diff, rep_quantize, signal_symbol, weyl_quantize,
    Branch, CMatrix, WeylConfig,
};
use pmech::verify;
use pmech::PmechError;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Some checks did not meet their tolerance (exit 1).
    Checks(usize),
    /// Invalid configuration or arguments (exit 2).
    Config(String),
    /// Numerical abort (exit 3).
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Checks(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<PmechError> for Failure {
    fn from(e: PmechError) -> Self {
        match e {
            PmechError::InvalidGrid(_)
            | PmechError::InvalidParameter(_)
            | PmechError::InadmissibleHbar { .. }
            | PmechError::ShiftOutOfRange { .. }
            | PmechError::Io(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("cannot write output: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn signal(name: &str) -> Result<TestSignal, Failure> {
    named(name, Widths::REPRESENTATION)
        .ok_or_else(|| Failure::Config(format!("unknown signal `{name}` (catalog: {})", NAMED.join(", "))))
}

pub fn verify(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let checks = verify::run(&cfg.suites, &cfg.verify_config())?;
    write_json(&out.join("verify.json"), &checks)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    for c in &checks {
        println!("{:<40} {:>10.3e} {:>8.1e}  {}", c.check, c.residual, c.tolerance, if c.pass { "pass" } else { "FAIL" });
    }
    println!("{} checks, {failed} failed; report in {}", checks.len(), out.join("verify.json").display());
    if failed > 0 {
        Err(Failure::Checks(failed))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct OscillatorReport {
    t_end: f64,
    dt: f64,
    hbar: f64,
    snapshots: usize,
    transport_final: f64,
    transport_max: f64,
    recurrence_final: f64,
    heisenberg_max: Option<f64>,
    hamilton_max: Option<f64>,
    alternative_max: Option<f64>,
}

pub fn oscillator(cfg: &RunConfig, out: &Path, write_states: bool) -> Result<(), Failure> {
    let spec = cfg.grid.unwrap_or_else(presets::oscillator_grid);
    let f0 = presets::oscillator_signal().sample(spec)?;
    let h = oscillator_hamiltonian();
    let traj = evolve_rk4(&f0, &h, Rk4Config { t_end: cfg.t_end, dt: cfg.dt, snapshots: cfg.snapshots })?;
    let n = traj.len();
    let transport: Vec<f64> =
        traj.iter().map(|s| Ok(s.f.rel_l2(&transport_flow(&f0, s.t)?))).collect::<Result<_, PmechError>>()?;
    let recurrence: Vec<f64> = traj.iter().map(|s| s.f.rel_l2(&f0)).collect();
    let (mut heis, mut ham, mut alt) = (vec![None; n], vec![None; n], vec![None; n]);
    let mut report = OscillatorReport {
        t_end: cfg.t_end,
        dt: cfg.dt,
        hbar: cfg.oscillator_hbar,
        snapshots: n,
        transport_final: transport[n - 1],
        transport_max: transport.iter().cloned().fold(0.0, f64::max),
        recurrence_final: recurrence[n - 1],
        heisenberg_max: None,
        hamilton_max: None,
        alternative_max: None,
    };
    // centred differences need three evenly spaced snapshots
    let even = n >= 3 && traj.windows(2).all(|w| ((w[1].t - w[0].t) - (traj[1].t - traj[0].t)).abs() < 1e-9);
    if even {
        cfg.wave.check_hbar(cfg.oscillator_hbar, &spec)?;
        let r = check_consistency(&traj, &h, cfg.oscillator_hbar, &cfg.wave, &cfg.lattice)?;
        let a = alternative_residual(&traj, &h)?;
        for i in 1..n - 1 {
            heis[i] = Some(r.heisenberg[i - 1]);
            ham[i] = Some(r.hamilton[i - 1]);
            alt[i] = Some(a[i - 1]);
        }
        report.heisenberg_max = Some(r.max_heisenberg());
        report.hamilton_max = Some(r.max_hamilton());
        report.alternative_max = Some(a.iter().cloned().fold(0.0, f64::max));
    }
    let columns = [
        ("transport", transport.into_iter().map(Some).collect()),
        ("heisenberg", heis),
        ("hamilton", ham),
        ("alternative", alt),
        ("recurrence", recurrence.into_iter().map(Some).collect()),
    ];
    write_trajectory_csv(&out.join("oscillator.csv"), &traj, &columns)?;
    write_json(&out.join("oscillator.json"), &report)?;
    if write_states {
        write_snapshots(&out.join("snapshots"), &traj)?;
    }
    println!(
        "{} snapshots to t = {:.6}; transport {:.3e}, recurrence {:.3e}",
        n, cfg.t_end, report.transport_final, report.recurrence_final
    );
    Ok(())
}

#[derive(Serialize)]
struct QuantizeReport {
    signal: String,
    hbar: f64,
    branch: Branch,
    weyl: String,
    rep: Option<String>,
    rep_skipped: Option<String>,
    residual_interior: Option<f64>,
    residual_full: Option<f64>,
    identity_distance_interior: f64,
}

pub fn quantize(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let spec = cfg.grid.unwrap_or_else(presets::representation_grid);
    let sig = signal(&cfg.signal)?;
    cfg.wave.check_hbar(cfg.hbar, &spec)?;
    let sym = signal_symbol(&sig, cfg.hbar, cfg.branch, &cfg.wave);
    let weyl = weyl_quantize(&sym, cfg.hbar, WeylConfig::default(), &cfg.wave)?;
    let stem = format!("quantize_{}", cfg.signal);
    let weyl_path = out.join(format!("{stem}_weyl.bin"));
    weyl.write(&weyl_path)?;
    let nv = cfg.wave.nv;
    let mut report = QuantizeReport {
        signal: cfg.signal.clone(),
        hbar: cfg.hbar,
        branch: cfg.branch,
        weyl: weyl_path.display().to_string(),
        rep: None,
        rep_skipped: None,
        residual_interior: None,
        residual_full: None,
        identity_distance_interior: rel_op_diff(&interior(&weyl.matrix), &interior(&CMatrix::identity(nv, nv))),
    };
    // the integrated route needs a signal the grid resolves
    let sampled = sig.sample(spec).and_then(|f| f.nyquist_check().map(|_| f));
    match sampled {
        Ok(f) => {
            let rep = rep_quantize(&f, cfg.hbar, cfg.branch, &cfg.wave)?;
            let rep_path = out.join(format!("{stem}_rep.bin"));
            rep.write(&rep_path)?;
            report.rep = Some(rep_path.display().to_string());
            report.residual_interior = Some(rel_op_diff(&interior(&rep.matrix), &interior(&weyl.matrix)));
            report.residual_full = Some(rel_op_diff(&rep.matrix, &weyl.matrix));
        }
        Err(e) => report.rep_skipped = Some(e.to_string()),
    }
    write_json(&out.join(format!("{stem}.json")), &report)?;
    match report.residual_interior {
        Some(r) => println!("{} at hbar = {}: paths agree to {r:.3e} on the interior block", cfg.signal, cfg.hbar),
        None => println!("{} at hbar = {}: integrated route skipped ({})", cfg.signal, cfg.hbar, report.rep_skipped.as_deref().unwrap_or("")),
    }
    Ok(())
}

#[derive(Serialize)]
struct CorrespondenceReport {
    a: String,
    b: String,
    hbars: Vec<f64>,
    residuals: Vec<f64>,
    slope: Option<f64>,
}

pub fn correspondence(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let hs = &cfg.correspondence_hbars;
    if hs.len() < 4 || hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Failure::Config(format!(
            "correspondence needs at least 4 strictly decreasing hbar values, got {hs:?}"
        )));
    }
    let spec = cfg.grid.unwrap_or_else(presets::representation_grid);
    let (a, b) = match &cfg.pair {
        Some((a, b)) => (signal(a)?, signal(b)?),
        None => CatalogRng::new(cfg.seed).pairs(1, Widths::REPRESENTATION, true).remove(0),
    };
    let points = correspondence_residuals(&a, &b, spec, hs, &cfg.lattice)?;
    // identical or commuting symbols leave nothing to fit
    let slope = loglog_slope(&points).ok();
    let mut csv = String::from("hbar,residual\n");
    for (h, r) in &points {
        csv.push_str(&format!("{h},{r:.6e}\n"));
    }
    fs::write(out.join("correspondence.csv"), csv)?;
    let report = CorrespondenceReport {
        a: a.name.clone(),
        b: b.name.clone(),
        hbars: points.iter().map(|p| p.0).collect(),
        residuals: points.iter().map(|p| p.1).collect(),
        slope,
    };
    write_json(&out.join("correspondence.json"), &report)?;
    match slope {
        Some(s) => println!("log-log slope {s:.4} over {} hbar values", points.len()),
        None => println!("residuals vanish; no slope fitted"),
    }
    Ok(())
}
