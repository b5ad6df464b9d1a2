use num_complex::Complex64;
use pmech::catalog::{named, Widths};
use pmech::dynamics::{evolve_rk4, write_snapshots, write_trajectory_csv, Rk4Config};
use pmech::grid::{GridSpec, PFunction};
use pmech::oscillator::oscillator_hamiltonian;
use pmech::presets;
use pmech::schrodinger::{rep_quantize, Branch, WaveOp};
use tempfile::TempDir;

#[test]
fn pfunction_binary_round_trip() {
    let dir = TempDir::new().unwrap();
    let spec = GridSpec::new(3.0, 2.0, 5.0, 16, 32, 16).unwrap();
    let f = PFunction::from_fn(spec, |s, x, y| Complex64::new(s + 2.0 * x, y * x - 1.0)).unwrap();
    let path = dir.path().join("f.bin");
    f.write_binary(&path).unwrap();
    assert!(path.with_extension("json").exists());
    let g = PFunction::read_binary(&path).unwrap();
    assert_eq!(g.spec, spec);
    assert_eq!(g.values(), f.values());
}

#[test]
fn truncated_binary_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("f.bin");
    PFunction::zeros(GridSpec::cube(1.0, 16).unwrap()).write_binary(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    assert!(PFunction::read_binary(&path).is_err());
    std::fs::write(&path, &bytes[..20]).unwrap();
    assert!(PFunction::read_binary(&path).is_err());
}

#[test]
fn wave_op_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = named("asym", Widths::REPRESENTATION).unwrap().sample(presets::representation_grid()).unwrap();
    let op = rep_quantize(&f, 0.5, Branch::Minus, &presets::wave_grid()).unwrap();
    let path = dir.path().join("op.bin");
    op.write(&path).unwrap();
    let back = WaveOp::read(&path).unwrap();
    assert_eq!(back, op);
}

#[test]
fn trajectory_csv_layout() {
    let dir = TempDir::new().unwrap();
    let spec = presets::oscillator_grid();
    let f0 = presets::oscillator_signal().sample(spec).unwrap();
    let traj = evolve_rk4(&f0, &oscillator_hamiltonian(), Rk4Config { t_end: 0.03, dt: 0.005, snapshots: 3 }).unwrap();
    assert_eq!(traj.len(), 4);
    let path = dir.path().join("t.csv");
    let col = vec![Some(1.5), None, Some(2.0), None];
    write_trajectory_csv(&path, &traj, &[("extra", col)]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,l2_norm,max_abs,extra");
    assert_eq!(lines.len(), 5);
    let row: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(row.len(), 4);
    assert!((row[0].parse::<f64>().unwrap() - 0.01).abs() < 1e-12);
    assert_eq!(row[3], "");
    assert_eq!(lines[3].split(',').nth(3).unwrap().parse::<f64>().unwrap(), 2.0);

    write_snapshots(&dir.path().join("snaps"), &traj).unwrap();
    let last = PFunction::read_binary(&dir.path().join("snaps/snap_0003.bin")).unwrap();
    assert_eq!(last.values(), traj[3].f.values());
}
