//! The equation of motion ḟ = {{f,H}}: an RK4 integrator, the conjugation
//! solution e^{−t𝒜H} ∗ f0 ∗ e^{t𝒜H}, and residual checks of a trajectory
//! against its quantum and classical images.

use crate::convolution::convolve_fast;
use crate::error::{PmechError, Result};
use crate::grid::{spectral_derivative, Axis, GridSpec, PFunction};
use crate::heisenberg::{FieldAxis, InvariantField, Side};
use crate::pbracket::{apply_antiderivative, pbracket, AntiMode};
use crate::pdo::Pdo;
use crate::schrodinger::{
    group_fourier, momentum_matrix, position_matrix, rel_op_diff, rep_classical, rep_quantize, spectral_power,
    Branch, CMatrix, ClassicalLattice, WaveGrid,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Generators of the δ-derivative algebra: δ_X = δ(s)δ'(x)δ(y),
/// δ_Y = δ(s)δ(x)δ'(y), δ_S = δ'(s)δ(x)δ(y).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    X,
    Y,
    S,
}

impl Generator {
    fn axis(self) -> FieldAxis {
        match self {
            Generator::X => FieldAxis::X(1),
            Generator::Y => FieldAxis::Y(1),
            Generator::S => FieldAxis::S,
        }
    }
}

/// c · δ_{w1} ∗ δ_{w2} ∗ … ∗ δ_{wk}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMonomial {
    pub coeff: f64,
    pub word: Vec<Generator>,
}

/// A distribution supported at the identity, written as a polynomial in the
/// generators. Convolving with it on either side is a differential operator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldPolynomial {
    pub terms: Vec<FieldMonomial>,
}

pub const MAX_DEGREE: usize = 4;

impl FieldPolynomial {
    pub fn new(terms: Vec<FieldMonomial>) -> Result<Self> {
        for t in &terms {
            if t.word.len() > MAX_DEGREE {
                return Err(PmechError::InvalidParameter(format!("degree {} exceeds {MAX_DEGREE}", t.word.len())));
            }
            if !t.coeff.is_finite() {
                return Err(PmechError::NonFinite);
            }
        }
        Ok(Self { terms })
    }

    /// H ∗ f as an operator on f: δ_g ∗ f applies the field
    /// ∂_x + (y/2)∂_s, ∂_y − (x/2)∂_s or ∂_s, and words compose left to right.
    pub fn convolve_left_op(&self) -> Pdo {
        let mut out = Pdo::zero();
        for t in &self.terms {
            let op = t
                .word
                .iter()
                .fold(Pdo::identity(), |acc, g| acc.compose(&Pdo::field(InvariantField::new(Side::Right, g.axis()))));
            out = out.add(&op.scale(t.coeff));
        }
        out
    }

    /// f ∗ H as an operator on f: the other field family, word reversed.
    pub fn convolve_right_op(&self) -> Pdo {
        let mut out = Pdo::zero();
        for t in &self.terms {
            let op = t
                .word
                .iter()
                .fold(Pdo::identity(), |acc, g| Pdo::field(InvariantField::new(Side::Left, g.axis())).compose(&acc));
            out = out.add(&op.scale(t.coeff));
        }
        out
    }

    /// f ↦ {{f,H}} = 𝒜(f∗H − H∗f).
    pub fn bracket_op(&self) -> Result<Pdo> {
        self.convolve_right_op().sub(&self.convolve_left_op()).divide_ds()
    }

    /// ρ_{σħ}(H) on the wave grid: δ_X ↦ −iσ√ħ M, δ_Y ↦ −i√ħ D, δ_S ↦ iσħ,
    /// with runs of δ_Y taken as a single spectral power of D.
    pub fn quantum_image(&self, hbar: f64, sign: Branch, grid: &WaveGrid) -> CMatrix {
        let n = grid.nv;
        let sigma = sign.sigma();
        let rh = hbar.sqrt();
        let m = position_matrix(grid);
        let mut out = CMatrix::zeros(n, n);
        for t in &self.terms {
            let mut op = CMatrix::identity(n, n) * Complex64::new(t.coeff, 0.0);
            let mut k = 0;
            while k < t.word.len() {
                match t.word[k] {
                    Generator::X => op = op * &m * (-I * sigma * rh),
                    Generator::S => op *= I * sigma * hbar,
                    Generator::Y => {
                        let run = t.word[k..].iter().take_while(|g| **g == Generator::Y).count();
                        let d = if run == 1 { momentum_matrix(grid) } else { spectral_power(grid, run as u32) };
                        op = op * d * (-I * rh).powu(run as u32);
                        k += run;
                        continue;
                    }
                }
                k += 1;
            }
            out += op;
        }
        out
    }

    /// Classical image Ĥ(0,q,p): δ_X ↦ −iq, δ_Y ↦ −ip, δ_S ↦ 0.
    pub fn classical_image(&self, q: f64, p: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                t.word.iter().fold(Complex64::new(t.coeff, 0.0), |acc, g| match g {
                    Generator::X => acc * (-I * q),
                    Generator::Y => acc * (-I * p),
                    Generator::S => Complex64::default(),
                })
            })
            .sum()
    }

    /// (∂_q, ∂_p) of the classical image.
    pub fn classical_gradient(&self, q: f64, p: f64) -> (Complex64, Complex64) {
        let mut gq = Complex64::default();
        let mut gp = Complex64::default();
        for t in &self.terms {
            if t.word.contains(&Generator::S) {
                continue;
            }
            let nx = t.word.iter().filter(|g| **g == Generator::X).count() as i32;
            let ny = t.word.len() as i32 - nx;
            let base = Complex64::new(t.coeff, 0.0) * (-I).powi(nx + ny);
            if nx > 0 {
                gq += base * nx as f64 * q.powi(nx - 1) * p.powi(ny);
            }
            if ny > 0 {
                gp += base * ny as f64 * q.powi(nx) * p.powi(ny - 1);
            }
        }
        (gq, gp)
    }
}

#[derive(Clone, Debug)]
pub enum HamiltonianSpec {
    ConvolutionKernel(PFunction),
    DifferentialOperator(FieldPolynomial),
}

impl HamiltonianSpec {
    pub fn kernel(h: PFunction) -> Result<Self> {
        h.ensure_admitted()?;
        Ok(Self::ConvolutionKernel(h))
    }

    pub fn zero(spec: GridSpec) -> Self {
        Self::ConvolutionKernel(PFunction::zeros(spec))
    }

    pub fn quantum_image(&self, hbar: f64, sign: Branch, grid: &WaveGrid) -> Result<CMatrix> {
        match self {
            Self::ConvolutionKernel(h) => Ok(rep_quantize(h, hbar, sign, grid)?.matrix),
            Self::DifferentialOperator(p) => Ok(p.quantum_image(hbar, sign, grid)),
        }
    }

    /// Ĥ(0,q,p) on a lattice.
    pub fn classical_image(&self, lattice: &ClassicalLattice) -> Result<CMatrix> {
        match self {
            Self::ConvolutionKernel(h) => Ok(rep_classical(h, lattice)?.values),
            Self::DifferentialOperator(p) => {
                let (qs, ps) = (lattice.q_nodes(), lattice.p_nodes());
                Ok(CMatrix::from_fn(qs.len(), ps.len(), |a, b| p.classical_image(qs[a], ps[b])))
            }
        }
    }
}

/// A prepared right-hand side f ↦ {{f,H}}.
enum Rhs<'a> {
    Kernel(&'a PFunction),
    Operator(Pdo),
}

impl<'a> Rhs<'a> {
    fn new(h: &'a HamiltonianSpec) -> Result<Self> {
        Ok(match h {
            HamiltonianSpec::ConvolutionKernel(k) => Rhs::Kernel(k),
            HamiltonianSpec::DifferentialOperator(p) => Rhs::Operator(p.bracket_op()?),
        })
    }

    fn eval(&self, f: &PFunction) -> Result<PFunction> {
        match self {
            Rhs::Kernel(h) => pbracket(f, h),
            Rhs::Operator(op) => op.apply_unchecked(f),
        }
    }

    fn eval_values(&self, spec: &GridSpec, values: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            Rhs::Kernel(h) => Ok(pbracket(&PFunction::new(*spec, values.to_vec())?, h)?.values().to_vec()),
            Rhs::Operator(op) => Ok(op.apply_values(spec, values)),
        }
    }
}

/// {{f,H}}.
pub fn rhs(f: &PFunction, h: &HamiltonianSpec) -> Result<PFunction> {
    f.ensure_admitted()?;
    if let HamiltonianSpec::DifferentialOperator(_) = h {
        f.nyquist_check()?;
    }
    Rhs::new(h)?.eval(f)
}

#[derive(Clone, Debug)]
pub struct TrajectoryState {
    pub t: f64,
    pub f: PFunction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rk4Config {
    pub t_end: f64,
    pub dt: f64,
    /// Number of snapshots after the initial one (the final state is always
    /// included).
    pub snapshots: usize,
}

impl Rk4Config {
    pub fn new(t_end: f64, dt: f64) -> Self {
        Self { t_end, dt, snapshots: 50 }
    }
}

/// Largest admissible step for a differential Hamiltonian:
/// 0.5 · (grid step) / (advection speed); infinite for kernels.
pub fn cfl_limit(h: &HamiltonianSpec, spec: &GridSpec) -> Result<f64> {
    match h {
        HamiltonianSpec::ConvolutionKernel(_) => Ok(f64::INFINITY),
        HamiltonianSpec::DifferentialOperator(p) => {
            let speed = p.bracket_op()?.advection_speed(spec);
            let step = spec.step(Axis::X).min(spec.step(Axis::Y));
            Ok(if speed > 0.0 { 0.5 * step / speed } else { f64::INFINITY })
        }
    }
}

/// Classical fourth-order Runge–Kutta. The step is shrunk so that t_end is a
/// whole number of steps; the run aborts when the L² norm grows tenfold.
pub fn evolve_rk4(f0: &PFunction, h: &HamiltonianSpec, cfg: Rk4Config) -> Result<Vec<TrajectoryState>> {
    f0.ensure_admitted()?;
    if !(cfg.dt > 0.0 && cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
        return Err(PmechError::InvalidParameter(format!("need dt > 0 and t_end >= 0, got dt = {}, t_end = {}", cfg.dt, cfg.t_end)));
    }
    let limit = cfl_limit(h, &f0.spec)?;
    if cfg.dt > limit {
        return Err(PmechError::InvalidParameter(format!("dt = {} exceeds the CFL bound {limit:.3e}", cfg.dt)));
    }
    if let HamiltonianSpec::DifferentialOperator(_) = h {
        f0.nyquist_check()?;
    }
    let mut traj = vec![TrajectoryState { t: 0.0, f: f0.clone() }];
    if cfg.t_end == 0.0 {
        return Ok(traj);
    }
    let steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let every = (steps / cfg.snapshots.max(1)).max(1);
    let rhs = Rhs::new(h)?;
    let spec = f0.spec;
    let l2 = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let n0 = l2(f0.values()).max(f64::MIN_POSITIVE);
    let axpy = |a: &[Complex64], b: &[Complex64], c: f64| -> Vec<Complex64> { a.iter().zip(b).map(|(x, y)| x + y * c).collect() };
    let mut f = f0.values().to_vec();
    for step in 1..=steps {
        let k1 = rhs.eval_values(&spec, &f)?;
        let k2 = rhs.eval_values(&spec, &axpy(&f, &k1, 0.5 * dt))?;
        let k3 = rhs.eval_values(&spec, &axpy(&f, &k2, 0.5 * dt))?;
        let k4 = rhs.eval_values(&spec, &axpy(&f, &k3, dt))?;
        for (i, v) in f.iter_mut().enumerate() {
            *v += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        let t = step as f64 * dt;
        let growth = l2(&f) / n0;
        if !growth.is_finite() || growth > 10.0 {
            return Err(PmechError::Unstable { t, growth });
        }
        if step % every == 0 || step == steps {
            traj.push(TrajectoryState { t, f: PFunction::new(spec, f.clone())? });
        }
    }
    Ok(traj)
}

pub const CONJUGATION_MAX_ORDER: usize = 20;

/// e^{−t𝒜H} ∗ f0 ∗ e^{t𝒜H}, each exponential summed as a convolution power
/// series until the next term falls below `tol` relative to the partial sum.
pub fn evolve_conjugation(f0: &PFunction, h: &HamiltonianSpec, t: f64, tol: f64) -> Result<PFunction> {
    let HamiltonianSpec::ConvolutionKernel(hk) = h else {
        return Err(PmechError::InvalidParameter("conjugation needs a convolution-kernel Hamiltonian".into()));
    };
    f0.ensure_admitted()?;
    if t == 0.0 {
        return Ok(f0.clone());
    }
    let g = apply_antiderivative(hk, AntiMode::FourierDivision)?;
    let radius = t.abs() * g.l1_norm() * g.spec.cell_volume();
    // E_− ∗ f0, then (E_− ∗ f0) ∗ E_+
    let left = exp_series(f0, |term, k| Ok(convolve_fast(&g, term)?.scale(Complex64::new(-t / k as f64, 0.0))), tol, radius)?;
    exp_series(&left, |term, k| Ok(convolve_fast(term, &g)?.scale(Complex64::new(t / k as f64, 0.0))), tol, radius)
}

fn exp_series(
    start: &PFunction,
    next: impl Fn(&PFunction, usize) -> Result<PFunction>,
    tol: f64,
    radius: f64,
) -> Result<PFunction> {
    let mut sum = start.clone();
    let mut term = start.clone();
    for k in 1..=CONJUGATION_MAX_ORDER {
        term = next(&term, k)?;
        sum = sum.add(&term)?;
        if term.l2_norm() <= tol * sum.l2_norm() {
            return Ok(sum);
        }
    }
    Err(PmechError::SeriesNotConverged { order: CONJUGATION_MAX_ORDER, radius })
}

/// Per-snapshot residuals of a trajectory against both representations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub hbar: f64,
    pub times: Vec<f64>,
    /// ‖dK/dt − (1/iħ)[K,H_ħ]‖ / ‖(1/iħ)[K,H_ħ]‖ at interior snapshots.
    pub heisenberg: Vec<f64>,
    /// max |dk̂/dt − {k̂,Ĥ}| / max |{k̂,Ĥ}| at interior snapshots.
    pub hamilton: Vec<f64>,
    /// ‖{{H,H}}‖ / ‖H‖ for kernel Hamiltonians (the rate of change of H
    /// along its own flow), 0 for δ-derivative ones.
    pub conservation: f64,
}

impl ConsistencyReport {
    pub fn max_heisenberg(&self) -> f64 {
        self.heisenberg.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_hamilton(&self) -> f64 {
        self.hamilton.iter().cloned().fold(0.0, f64::max)
    }
}

fn check_uniform(traj: &[TrajectoryState]) -> Result<f64> {
    if traj.len() < 3 {
        return Err(PmechError::InvalidParameter("need at least three snapshots".into()));
    }
    let dt = traj[1].t - traj[0].t;
    for w in traj.windows(2) {
        if ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(1.0) {
            return Err(PmechError::InvalidParameter("snapshots must be evenly spaced".into()));
        }
    }
    Ok(dt)
}

/// Time derivatives by centred differences over evenly spaced snapshots.
pub fn check_consistency(
    traj: &[TrajectoryState],
    h: &HamiltonianSpec,
    hbar: f64,
    grid: &WaveGrid,
    lattice: &ClassicalLattice,
) -> Result<ConsistencyReport> {
    let dt = check_uniform(traj)?;
    let h_q = h.quantum_image(hbar, Branch::Plus, grid)?;
    let h_c = h.classical_image(lattice)?;
    let ks: Vec<CMatrix> = traj.iter().map(|s| rep_quantize(&s.f, hbar, Branch::Plus, grid).map(|w| w.matrix)).collect::<Result<_>>()?;
    let cs: Vec<CMatrix> = traj.iter().map(|s| rep_classical(&s.f, lattice).map(|c| c.values)).collect::<Result<_>>()?;
    let mut report = ConsistencyReport { hbar, times: Vec::new(), heisenberg: Vec::new(), hamilton: Vec::new(), conservation: 0.0 };
    for i in 1..traj.len() - 1 {
        let dk = (&ks[i + 1] - &ks[i - 1]) / Complex64::new(2.0 * dt, 0.0);
        let comm = (&ks[i] * &h_q - &h_q * &ks[i]) / (I * hbar);
        report.heisenberg.push(rel_op_diff(&dk, &comm));

        let dc = (&cs[i + 1] - &cs[i - 1]) / Complex64::new(2.0 * dt, 0.0);
        let (fq, fp) = classical_gradient(&traj[i].f, lattice);
        let (hq, hp) = lattice_gradient(&h_c, lattice, h);
        let poisson = fq.component_mul(&hp) - fp.component_mul(&hq);
        let den = poisson.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let num = (dc - &poisson).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        report.hamilton.push(if den > 0.0 { num / den } else { num });
        report.times.push(traj[i].t);
    }
    if let HamiltonianSpec::ConvolutionKernel(k) = h {
        let n = k.l2_norm();
        report.conservation = if n > 0.0 { pbracket(k, k)?.l2_norm() / n } else { 0.0 };
    }
    Ok(report)
}

/// (∂_q k̂, ∂_p k̂)(0,q,p) by quadrature of ix·k and iy·k.
pub fn classical_gradient(k: &PFunction, lattice: &ClassicalLattice) -> (CMatrix, CMatrix) {
    let spec = k.spec;
    let (xs, ys) = (spec.nodes(Axis::X), spec.nodes(Axis::Y));
    let weighted = |w: &dyn Fn(f64, f64) -> f64| {
        let mut v = k.values().to_vec();
        for is in 0..spec.ns {
            for (ix, &x) in xs.iter().enumerate() {
                for (iy, &y) in ys.iter().enumerate() {
                    v[spec.index(is, ix, iy)] *= I * w(x, y);
                }
            }
        }
        PFunction::new(spec, v).expect("finite weights")
    };
    let gq = group_fourier(&weighted(&|x, _| x), 0.0, lattice);
    let gp = group_fourier(&weighted(&|_, y| y), 0.0, lattice);
    (gq, gp)
}

/// Gradient of the classical Hamiltonian symbol: exact for δ-derivative
/// polynomials, central differences for sampled kernels.
fn lattice_gradient(values: &CMatrix, lattice: &ClassicalLattice, h: &HamiltonianSpec) -> (CMatrix, CMatrix) {
    let (qs, ps) = (lattice.q_nodes(), lattice.p_nodes());
    let (nq, np) = values.shape();
    if let HamiltonianSpec::DifferentialOperator(p) = h {
        let gq = CMatrix::from_fn(nq, np, |a, b| p.classical_gradient(qs[a], ps[b]).0);
        let gp = CMatrix::from_fn(nq, np, |a, b| p.classical_gradient(qs[a], ps[b]).1);
        return (gq, gp);
    }
    let gq = CMatrix::from_fn(nq, np, |a, b| {
        let (lo, hi) = (a.saturating_sub(1), (a + 1).min(nq - 1));
        (values[(hi, b)] - values[(lo, b)]) / (qs[hi] - qs[lo])
    });
    let gp = CMatrix::from_fn(nq, np, |a, b| {
        let (lo, hi) = (b.saturating_sub(1), (b + 1).min(np - 1));
        (values[(a, hi)] - values[(a, lo)]) / (ps[hi] - ps[lo])
    });
    (gq, gp)
}

/// Residual of ∂_s(df/dt) = f∗H − H∗f at interior snapshots, relative to
/// the right-hand side; needs no antiderivative.
pub fn alternative_residual(traj: &[TrajectoryState], h: &HamiltonianSpec) -> Result<Vec<f64>> {
    let dt = check_uniform(traj)?;
    let mut out = Vec::with_capacity(traj.len() - 2);
    let diff_op = match h {
        HamiltonianSpec::DifferentialOperator(p) => Some(p.convolve_right_op().sub(&p.convolve_left_op())),
        HamiltonianSpec::ConvolutionKernel(_) => None,
    };
    for i in 1..traj.len() - 1 {
        let spec = traj[i].f.spec;
        let df = traj[i + 1].f.sub(&traj[i - 1].f)?.scale(Complex64::new(1.0 / (2.0 * dt), 0.0));
        let lhs = PFunction::new(spec, spectral_derivative(&spec, df.values(), Axis::S, 1))?;
        let rhs = match (&diff_op, h) {
            (Some(op), _) => op.apply(&traj[i].f)?,
            (None, HamiltonianSpec::ConvolutionKernel(k)) => convolve_fast(&traj[i].f, k)?.sub(&convolve_fast(k, &traj[i].f)?)?,
            _ => unreachable!(),
        };
        let den = rhs.l2_norm();
        let num = lhs.sub(&rhs)?.l2_norm();
        out.push(if den > 0.0 { num / den } else { num });
    }
    Ok(out)
}

/// CSV with columns t, l2_norm, max_abs followed by the given residual
/// columns (one value per snapshot; missing entries are left empty).
pub fn write_trajectory_csv(path: &Path, traj: &[TrajectoryState], columns: &[(&str, Vec<Option<f64>>)]) -> Result<()> {
    let mut out = String::from("t,l2_norm,max_abs");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, s) in traj.iter().enumerate() {
        out.push_str(&format!("{:.12e},{:.12e},{:.12e}", s.t, s.f.l2_norm(), s.f.max_abs()));
        for (_, col) in columns {
            out.push(',');
            if let Some(Some(v)) = col.get(i) {
                out.push_str(&format!("{v:.6e}"));
            }
        }
        out.push('\n');
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// One PFunction binary per snapshot, named snap_NNNN.bin.
pub fn write_snapshots(dir: &Path, traj: &[TrajectoryState]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, s) in traj.iter().enumerate() {
        s.f.write_binary(&dir.join(format!("snap_{i:04}.bin")))?;
    }
    Ok(())
}
