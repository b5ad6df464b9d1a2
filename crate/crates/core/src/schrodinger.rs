//! Schrödinger representations ρ_{±ħ} on a discretised L²(ℝ), Weyl
//! quantisation, and the one-dimensional (classical) representations.
//!
//! Convention: ρ_{σħ}(s,x,y)u(v) = e^{iσ((−s + xy/2)ħ + x√ħ v)} u(v + √ħ y),
//! a homomorphism for the group law, whose extension to the convolution
//! algebra has Weyl symbol k̂(σħ, σ√ħ v, √ħ ν) with
//! k̂(ħ,q,p) = ∫ k(g) e^{−iħs + i(qx+py)} dg.

use crate::catalog::TestSignal;
use crate::error::{PmechError, Result};
use crate::grid::{signed_bin, Axis, GridSpec, PFunction};
use crate::heisenberg::GroupPoint;
use crate::pbracket::pbracket;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveGrid {
    pub lv: f64,
    pub nv: usize,
}

impl WaveGrid {
    pub fn new(lv: f64, nv: usize) -> Result<Self> {
        if !(lv.is_finite() && lv > 0.0) {
            return Err(PmechError::InvalidGrid(format!("L_v = {lv} must be positive")));
        }
        if nv < 32 || !nv.is_power_of_two() {
            return Err(PmechError::InvalidGrid(format!("N_v = {nv} must be a power of two >= 32")));
        }
        Ok(Self { lv, nv })
    }

    /// Position and momentum windows of equal half-width √(πN_v/2).
    pub fn balanced(nv: usize) -> Result<Self> {
        Self::new((PI * nv as f64 / 2.0).sqrt(), nv)
    }

    pub fn step(&self) -> f64 {
        2.0 * self.lv / self.nv as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nv).map(|i| -self.lv + i as f64 * self.step()).collect()
    }

    /// Dual frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.nv).map(|k| PI * signed_bin(k, self.nv) as f64 / self.lv).collect()
    }

    /// Largest ħ keeping every shift √ħ·y of the grid inside the window.
    pub fn max_hbar(&self, spec: &GridSpec) -> f64 {
        (self.lv / spec.ly).powi(2)
    }

    pub fn check_hbar(&self, hbar: f64, spec: &GridSpec) -> Result<()> {
        let hi = self.max_hbar(spec);
        if !(hbar > 0.0 && hbar <= hi) {
            return Err(PmechError::InadmissibleHbar { hbar, lo: 0.0, hi });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sigma(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveOp {
    pub hbar: f64,
    pub sign: Branch,
    pub grid: WaveGrid,
    pub matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct WaveOpHeader {
    hbar: f64,
    sign: Branch,
    grid: WaveGrid,
}

impl WaveOp {
    /// JSON header next to a row-major interleaved re/im payload.
    pub fn write(&self, bin_path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 * self.grid.nv * self.grid.nv);
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let v = self.matrix[(i, j)];
                buf.extend_from_slice(&v.re.to_le_bytes());
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        std::fs::File::create(bin_path)?.write_all(&buf)?;
        let header = WaveOpHeader { hbar: self.hbar, sign: self.sign, grid: self.grid };
        std::fs::write(bin_path.with_extension("json"), serde_json::to_string_pretty(&header)?)?;
        Ok(())
    }

    pub fn read(bin_path: &Path) -> Result<Self> {
        let header: WaveOpHeader = serde_json::from_str(&std::fs::read_to_string(bin_path.with_extension("json"))?)?;
        let buf = std::fs::read(bin_path)?;
        let n = header.grid.nv;
        if buf.len() != 16 * n * n {
            return Err(PmechError::InvalidGrid("payload size does not match header".into()));
        }
        let word = |i: usize| f64::from_le_bytes(buf[8 * i..8 * i + 8].try_into().unwrap());
        let matrix = CMatrix::from_fn(n, n, |i, j| Complex64::new(word(2 * (i * n + j)), word(2 * (i * n + j) + 1)));
        Ok(Self { hbar: header.hbar, sign: header.sign, grid: header.grid, matrix })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = &self.matrix - self.matrix.adjoint();
        op_norm(&d) <= tol * op_norm(&self.matrix).max(f64::MIN_POSITIVE)
    }
}

/// Largest singular value by power iteration on A^H A (at least 20 steps,
/// stopping once successive estimates agree to 1e-10).
pub fn op_norm(a: &CMatrix) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |j, _| Complex64::new(1.0 + 0.37 * (j as f64).sin(), 0.21 * (1.7 * j as f64).cos()));
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    let ah = a.adjoint();
    let mut prev = 0.0;
    for it in 0..500 {
        let w = &ah * (a * &v);
        let lambda = w.norm();
        if lambda == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(lambda, 0.0);
        if it >= 19 && (lambda - prev).abs() <= 1e-10 * lambda {
            return lambda.sqrt();
        }
        prev = lambda;
    }
    prev.sqrt()
}

/// ‖a − b‖ / max(‖a‖, ‖b‖); zero when both vanish.
pub fn rel_op_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let den = op_norm(a).max(op_norm(b));
    if den == 0.0 {
        return 0.0;
    }
    op_norm(&(a - b)) / den
}

fn dft_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |k, j| Complex64::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64))
}

/// e^{iνa} per frequency, with the real interpolant at Nyquist.
fn shift_multipliers(grid: &WaveGrid, a: f64) -> Vec<Complex64> {
    grid.frequencies()
        .iter()
        .enumerate()
        .map(|(k, &nu)| {
            if 2 * k == grid.nv {
                Complex64::new((nu * a).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, nu * a)
            }
        })
        .collect()
}

/// Spectral shift matrix u ↦ u(· + a).
pub fn shift_matrix(grid: &WaveGrid, a: f64) -> CMatrix {
    let n = grid.nv;
    let f = dft_matrix(n);
    let phi = shift_multipliers(grid, a);
    let finv = CMatrix::from_fn(n, n, |j, k| Complex64::from_polar(1.0, 2.0 * PI * (j * k % n) as f64 / n as f64) * phi[k] / n as f64);
    finv * f
}

/// Multiplication by v.
pub fn position_matrix(grid: &WaveGrid) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_vec(grid.nodes().into_iter().map(|v| Complex64::new(v, 0.0)).collect()))
}

/// Spectral D = −i d/dv (Nyquist dropped).
pub fn momentum_matrix(grid: &WaveGrid) -> CMatrix {
    spectral_multiplier(grid, |k, nu| if 2 * k == grid.nv { 0.0 } else { nu })
}

/// Spectral D² = −d²/dv² (Nyquist kept).
pub fn momentum_sq_matrix(grid: &WaveGrid) -> CMatrix {
    spectral_power(grid, 2)
}

/// Spectral D^k; the Nyquist bin is dropped for odd k.
pub fn spectral_power(grid: &WaveGrid, k: u32) -> CMatrix {
    spectral_multiplier(grid, |b, nu| if k % 2 == 1 && 2 * b == grid.nv { 0.0 } else { nu.powi(k as i32) })
}

fn spectral_multiplier(grid: &WaveGrid, m: impl Fn(usize, f64) -> f64) -> CMatrix {
    let n = grid.nv;
    let f = dft_matrix(n);
    let nus = grid.frequencies();
    let finv = CMatrix::from_fn(n, n, |j, k| Complex64::from_polar(1.0, 2.0 * PI * (j * k % n) as f64 / n as f64) * m(k, nus[k]) / n as f64);
    finv * f
}

pub fn rep_group_element(g: &GroupPoint, hbar: f64, sign: Branch, grid: &WaveGrid) -> Result<WaveOp> {
    if g.n() != 1 {
        return Err(PmechError::DimensionMismatch("only n = 1 is supported".into()));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(PmechError::InvalidParameter(format!("hbar = {hbar} must be positive")));
    }
    let (s, x, y) = (g.s, g.x[0], g.y[0]);
    let rh = hbar.sqrt();
    let shift = rh * y;
    if shift.abs() > grid.lv {
        return Err(PmechError::ShiftOutOfRange { shift, extent: grid.lv });
    }
    let sigma = sign.sigma();
    let phases: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&v| Complex64::from_polar(1.0, sigma * ((-s + 0.5 * x * y) * hbar + x * rh * v)))
        .collect();
    let mut m = shift_matrix(grid, shift);
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row *= phases[i];
    }
    Ok(WaveOp { hbar, sign, grid: *grid, matrix: m })
}

/// ρ(k) = ∫ k(g) ρ(g) dg on the sampling grid.
pub fn rep_quantize(k: &PFunction, hbar: f64, sign: Branch, grid: &WaveGrid) -> Result<WaveOp> {
    k.ensure_admitted()?;
    let spec = k.spec;
    grid.check_hbar(hbar, &spec)?;
    let sigma = sign.sigma();
    let rh = hbar.sqrt();
    let (ss, xs, ys) = (spec.nodes(Axis::S), spec.nodes(Axis::X), spec.nodes(Axis::Y));
    let (nx, ny) = (spec.nx, spec.ny);
    let cols = nx * ny;

    // central integral: K(x,y) = ∫ k e^{−iσħs} ds
    let mut kxy = vec![Complex64::default(); cols];
    for (is, &s) in ss.iter().enumerate() {
        let ph = Complex64::from_polar(spec.step(Axis::S), -sigma * hbar * s);
        for j in 0..cols {
            kxy[j] += k.values()[is * cols + j] * ph;
        }
    }

    // d_j(v) = ∫ K(x, y_j) e^{iσ(ħxy_j/2 + x√ħv)} dx
    let vs = grid.nodes();
    let nv = grid.nv;
    let hx = spec.step(Axis::X);
    let mut d = CMatrix::zeros(nv, ny);
    for (jy, &y) in ys.iter().enumerate() {
        for (i, &v) in vs.iter().enumerate() {
            let mut acc = Complex64::default();
            for (ix, &x) in xs.iter().enumerate() {
                let kv = kxy[ix * ny + jy];
                if kv != Complex64::default() {
                    acc += kv * Complex64::from_polar(1.0, sigma * x * (0.5 * hbar * y + rh * v));
                }
            }
            d[(i, jy)] = acc * hx;
        }
    }
    let mut phi = CMatrix::zeros(ny, nv);
    for (jy, &y) in ys.iter().enumerate() {
        for (kk, m) in shift_multipliers(grid, rh * y).into_iter().enumerate() {
            phi[(jy, kk)] = m;
        }
    }
    let mut g = d * phi;
    let hy = spec.step(Axis::Y);
    for i in 0..nv {
        for kk in 0..nv {
            g[(i, kk)] *= Complex64::from_polar(hy / nv as f64, 2.0 * PI * (i * kk % nv) as f64 / nv as f64);
        }
    }
    Ok(WaveOp { hbar, sign, grid: *grid, matrix: g * dft_matrix(nv) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylConfig {
    pub tau: f64,
}

impl Default for WeylConfig {
    fn default() -> Self {
        Self { tau: 0.5 }
    }
}

/// Lattice on which Weyl symbols are sampled: v at half the wave-grid step
/// over [−L_v, L_v), ν at the wave-grid dual frequencies in ascending order.
pub fn symbol_lattice(grid: &WaveGrid) -> (Vec<f64>, Vec<f64>) {
    let h = grid.step() / 2.0;
    let v = (0..2 * grid.nv).map(|r| -grid.lv + r as f64 * h).collect();
    let n = grid.nv as i64;
    let nu = (0..n).map(|m| (m - n / 2) as f64 * PI / grid.lv).collect();
    (v, nu)
}

/// Samples a symbol a(v, ν) on the lattice of `grid`.
pub fn sample_symbol(grid: &WaveGrid, a: impl Fn(f64, f64) -> Complex64) -> CMatrix {
    let (vs, nus) = symbol_lattice(grid);
    CMatrix::from_fn(vs.len(), nus.len(), |r, m| a(vs[r], nus[m]))
}

/// τ-quantisation (2π)^{-1} ∬ e^{i(v−u)ν} a(τu + (1−τ)v, ν) u(u) dν du with
/// both integrals on the lattice of `grid`.
pub fn weyl_quantize(symbol: &CMatrix, hbar: f64, cfg: WeylConfig, grid: &WaveGrid) -> Result<WaveOp> {
    let nv = grid.nv;
    if symbol.nrows() != 2 * nv || symbol.ncols() != nv {
        return Err(PmechError::DimensionMismatch(format!(
            "symbol is {}x{}, lattice is {}x{}",
            symbol.nrows(),
            symbol.ncols(),
            2 * nv,
            nv
        )));
    }
    if !(0.0..=1.0).contains(&cfg.tau) {
        return Err(PmechError::InvalidParameter(format!("tau = {} outside [0, 1]", cfg.tau)));
    }
    let (_, nus) = symbol_lattice(grid);
    let h = grid.step();
    let twice_tau = 2.0 * cfg.tau;
    let on_lattice = (twice_tau - twice_tau.round()).abs() < 1e-12;
    let interp = if on_lattice { None } else { Some(SymbolInterp::new(symbol, grid)) };
    let mut w = CMatrix::zeros(nv, nv);
    for i in 0..nv {
        for j in 0..nv {
            let d = (i as f64 - j as f64) * h;
            let mut acc = Complex64::default();
            match &interp {
                None => {
                    let r = (2.0 * (1.0 - cfg.tau) * i as f64 + twice_tau * j as f64).round() as usize;
                    for (m, &nu) in nus.iter().enumerate() {
                        acc += symbol[(r, m)] * Complex64::from_polar(1.0, d * nu);
                    }
                }
                Some(it) => {
                    let c = -grid.lv + ((1.0 - cfg.tau) * i as f64 + cfg.tau * j as f64) * h;
                    for (m, &nu) in nus.iter().enumerate() {
                        acc += it.eval(m, c) * Complex64::from_polar(1.0, d * nu);
                    }
                }
            }
            w[(i, j)] = acc / nv as f64;
        }
    }
    Ok(WaveOp { hbar, sign: Branch::Plus, grid: *grid, matrix: w })
}

/// Trigonometric interpolation of each ν-column of a symbol along v.
struct SymbolInterp {
    coeffs: Vec<Vec<Complex64>>,
    freqs: Vec<f64>,
    v0: f64,
}

impl SymbolInterp {
    fn new(symbol: &CMatrix, grid: &WaveGrid) -> Self {
        let n = symbol.nrows();
        let fft = crate::grid::plan(n, false);
        let period = 2.0 * grid.lv;
        let freqs = (0..n).map(|k| 2.0 * PI * signed_bin(k, n) as f64 / period).collect();
        let coeffs = (0..symbol.ncols())
            .map(|m| {
                let mut col: Vec<Complex64> = symbol.column(m).iter().cloned().collect();
                fft.process(&mut col);
                col.iter_mut().for_each(|c| *c /= n as f64);
                col
            })
            .collect();
        Self { coeffs, freqs, v0: -grid.lv }
    }

    fn eval(&self, m: usize, v: f64) -> Complex64 {
        let n = self.freqs.len();
        let t = v - self.v0;
        self.coeffs[m]
            .iter()
            .zip(&self.freqs)
            .enumerate()
            .map(|(k, (c, f))| if 2 * k == n { c * (f * t).cos() } else { c * Complex64::from_polar(1.0, f * t) })
            .sum()
    }
}

/// Weyl symbol of ρ_{σħ}(k) from the closed-form group transform.
pub fn signal_symbol(k: &TestSignal, hbar: f64, sign: Branch, grid: &WaveGrid) -> CMatrix {
    let sigma = sign.sigma();
    let rh = hbar.sqrt();
    sample_symbol(grid, |v, nu| k.transform(sigma * hbar, sigma * rh * v, rh * nu))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLattice {
    pub q_max: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl ClassicalLattice {
    pub fn new(q_max: f64, p_max: f64, nq: usize, np: usize) -> Result<Self> {
        if !(q_max > 0.0 && p_max > 0.0) || nq < 2 || np < 2 {
            return Err(PmechError::InvalidParameter("lattice needs positive extents and >= 2 points".into()));
        }
        Ok(Self { q_max, p_max, nq, np })
    }

    pub fn q_nodes(&self) -> Vec<f64> {
        (0..self.nq).map(|i| -self.q_max + 2.0 * self.q_max * i as f64 / (self.nq - 1) as f64).collect()
    }

    pub fn p_nodes(&self) -> Vec<f64> {
        (0..self.np).map(|i| -self.p_max + 2.0 * self.p_max * i as f64 / (self.np - 1) as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSymbol {
    pub lattice: ClassicalLattice,
    pub values: CMatrix,
}

impl ClassicalSymbol {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// max |self − other| / max |other| (absolute when the reference is 0).
    pub fn rel_max_diff(&self, reference: &CMatrix) -> f64 {
        let den = reference.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let num = (&self.values - reference).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if den > 0.0 {
            num / den
        } else {
            num
        }
    }
}

/// k̂(ħ,q,p) on a lattice by quadrature over the sampling grid.
pub fn group_fourier(k: &PFunction, hbar: f64, lattice: &ClassicalLattice) -> CMatrix {
    let spec = k.spec;
    let (ss, xs, ys) = (spec.nodes(Axis::S), spec.nodes(Axis::X), spec.nodes(Axis::Y));
    let (nx, ny) = (spec.nx, spec.ny);
    let cols = nx * ny;
    let mut kxy = CMatrix::zeros(nx, ny);
    for (is, &s) in ss.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -hbar * s);
        for j in 0..cols {
            kxy[(j / ny, j % ny)] += k.values()[is * cols + j] * ph;
        }
    }
    let (qs, ps) = (lattice.q_nodes(), lattice.p_nodes());
    let eq = CMatrix::from_fn(qs.len(), nx, |a, b| Complex64::from_polar(1.0, qs[a] * xs[b]));
    let ep = CMatrix::from_fn(ny, ps.len(), |a, b| Complex64::from_polar(1.0, ps[b] * ys[a]));
    eq * kxy * ep * Complex64::new(spec.cell_volume(), 0.0)
}

pub fn rep_classical(k: &PFunction, lattice: &ClassicalLattice) -> Result<ClassicalSymbol> {
    k.ensure_admitted()?;
    Ok(ClassicalSymbol { lattice: lattice.clone(), values: group_fourier(k, 0.0, lattice) })
}

/// Poisson bracket of closed-form classical symbols on a lattice.
pub fn analytic_poisson(k1: &TestSignal, k2: &TestSignal, lattice: &ClassicalLattice) -> CMatrix {
    let (qs, ps) = (lattice.q_nodes(), lattice.p_nodes());
    CMatrix::from_fn(qs.len(), ps.len(), |a, b| k1.poisson(k2, qs[a], ps[b]))
}

/// Poisson bracket of sampled symbols by central differences with the
/// lattice step (O(h²)), for symbols without closed forms.
pub fn finite_difference_poisson(a: &ClassicalSymbol, b: &ClassicalSymbol) -> CMatrix {
    let l = &a.lattice;
    let (hq, hp) = (2.0 * l.q_max / (l.nq - 1) as f64, 2.0 * l.p_max / (l.np - 1) as f64);
    let grad = |m: &CMatrix, i: usize, j: usize| -> (Complex64, Complex64) {
        let dq = if i == 0 {
            (m[(1, j)] - m[(0, j)]) / hq
        } else if i == l.nq - 1 {
            (m[(i, j)] - m[(i - 1, j)]) / hq
        } else {
            (m[(i + 1, j)] - m[(i - 1, j)]) / (2.0 * hq)
        };
        let dp = if j == 0 {
            (m[(i, 1)] - m[(i, 0)]) / hp
        } else if j == l.np - 1 {
            (m[(i, j)] - m[(i, j - 1)]) / hp
        } else {
            (m[(i, j + 1)] - m[(i, j - 1)]) / (2.0 * hp)
        };
        (dq, dp)
    };
    CMatrix::from_fn(l.nq, l.np, |i, j| {
        let (aq, ap) = grad(&a.values, i, j);
        let (bq, bp) = grad(&b.values, i, j);
        aq * bp - ap * bq
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketImageReport {
    /// (ħ, ‖ρ({{k1,k2}}) − [K1,K2]/(iħ)‖ / ‖·‖)
    pub quantum: Vec<(f64, f64)>,
    /// max |ρ_(q,p)({{k1,k2}}) − {k̂1,k̂2}| / max |{k̂1,k̂2}|
    pub classical: f64,
}

/// Compares both representation images of {{k1,k2}} with the commutator
/// over iħ and with the analytic Poisson bracket.
pub fn check_bracket_images(
    k1: &TestSignal,
    k2: &TestSignal,
    spec: GridSpec,
    hbars: &[f64],
    grid: &WaveGrid,
    lattice: &ClassicalLattice,
) -> Result<BracketImageReport> {
    let (f1, f2) = (k1.sample(spec)?, k2.sample(spec)?);
    let br = pbracket(&f1, &f2)?;
    let mut quantum = Vec::with_capacity(hbars.len());
    for &hbar in hbars {
        let a = rep_quantize(&f1, hbar, Branch::Plus, grid)?.matrix;
        let b = rep_quantize(&f2, hbar, Branch::Plus, grid)?.matrix;
        let img = rep_quantize(&br, hbar, Branch::Plus, grid)?.matrix;
        let comm = (&a * &b - &b * &a) / (I * hbar);
        quantum.push((hbar, rel_op_diff(&img, &comm)));
    }
    let classical = rep_classical(&br, lattice)?.rel_max_diff(&analytic_poisson(k1, k2, lattice));
    Ok(BracketImageReport { quantum, classical })
}

/// Central block of an operator on the inner half of the wave window, where
/// the periodic wrap of the grid does not reach.
pub fn interior(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    m.view((n / 4, n / 4), (n / 2, n / 2)).into_owned()
}

/// Distance between the Weyl symbol of (1/iħ)[K1,K2] and the Poisson bracket
/// of the classical symbols, per ħ.
///
/// The symbol of ρ_ħ(k1∗k2 − k2∗k1) at (v,ν) is the group transform of the
/// commutator at (ħ, √ħv, √ħν), so on the (q,p) lattice it is read off the
/// sampled commutator directly. Residuals are relative to max |{k̂1,k̂2}|, or
/// absolute when the Poisson bracket vanishes.
pub fn correspondence_residuals(
    k1: &TestSignal,
    k2: &TestSignal,
    spec: GridSpec,
    hbars: &[f64],
    lattice: &ClassicalLattice,
) -> Result<Vec<(f64, f64)>> {
    let comm = crate::pbracket::commutator(&k1.sample(spec)?, &k2.sample(spec)?)?;
    let poisson = analytic_poisson(k1, k2, lattice);
    let den = poisson.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    hbars
        .iter()
        .map(|&hbar| {
            if !(hbar > 0.0) {
                return Err(PmechError::InvalidParameter(format!("hbar = {hbar} must be positive")));
            }
            let q = group_fourier(&comm, hbar, lattice) / (I * hbar);
            let num = (q - &poisson).iter().fold(0.0f64, |m, v| m.max(v.norm()));
            Ok((hbar, if den > 0.0 { num / den } else { num }))
        })
        .collect()
}

/// Least-squares slope of log(residual) against log(ħ).
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(PmechError::InvalidParameter("need at least two points to fit a slope".into()));
    }
    if points.iter().any(|&(h, r)| !(h > 0.0 && r > 0.0)) {
        return Err(PmechError::InvalidParameter("slope fit needs positive hbar and residuals".into()));
    }
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(h, r)| (h.ln(), r.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> WaveGrid {
        WaveGrid::balanced(64).unwrap()
    }

    #[test]
    fn identity_and_central_elements() {
        let g = grid();
        let e = rep_group_element(&GroupPoint::h1(0.0, 0.0, 0.0), 0.5, Branch::Plus, &g).unwrap();
        assert!(rel_op_diff(&e.matrix, &CMatrix::identity(64, 64)) < 1e-13);
        let s = 0.7;
        let c = rep_group_element(&GroupPoint::h1(s, 0.0, 0.0), 0.5, Branch::Plus, &g).unwrap();
        let expect = CMatrix::identity(64, 64) * Complex64::from_polar(1.0, -s * 0.5);
        assert!(rel_op_diff(&c.matrix, &expect) < 1e-13);
        let cm = rep_group_element(&GroupPoint::h1(s, 0.0, 0.0), 0.5, Branch::Minus, &g).unwrap();
        let expect = CMatrix::identity(64, 64) * Complex64::from_polar(1.0, s * 0.5);
        assert!(rel_op_diff(&cm.matrix, &expect) < 1e-13);
    }

    #[test]
    fn group_elements_multiply_on_commensurate_points() {
        // x√ħ on the dual lattice and √ħ y on the grid make the discrete
        // relations exact
        let g = grid();
        let hbar = 1.0;
        let dnu = PI / g.lv;
        let h = g.step();
        for sign in [Branch::Plus, Branch::Minus] {
            let p = GroupPoint::h1(0.3, 2.0 * dnu, 3.0 * h);
            let q = GroupPoint::h1(-1.1, -dnu, 2.0 * h);
            let a = rep_group_element(&p, hbar, sign, &g).unwrap().matrix;
            let b = rep_group_element(&q, hbar, sign, &g).unwrap().matrix;
            let pq = crate::heisenberg::multiply(&p, &q).unwrap();
            let c = rep_group_element(&pq, hbar, sign, &g).unwrap().matrix;
            assert!(rel_op_diff(&(&a * &b), &c) < 1e-9);
        }
    }

    #[test]
    fn shift_out_of_range() {
        let g = grid();
        let r = rep_group_element(&GroupPoint::h1(0.0, 0.0, 40.0), 1.0, Branch::Plus, &g);
        assert!(matches!(r, Err(PmechError::ShiftOutOfRange { .. })));
    }

    #[test]
    fn weyl_trivial_symbols() {
        let g = grid();
        let one = sample_symbol(&g, |_, _| Complex64::new(1.0, 0.0));
        let w = weyl_quantize(&one, 1.0, WeylConfig::default(), &g).unwrap();
        assert!(rel_op_diff(&w.matrix, &CMatrix::identity(64, 64)) < 1e-12);
        let v = sample_symbol(&g, |v, _| Complex64::new(v, 0.0));
        let w = weyl_quantize(&v, 1.0, WeylConfig::default(), &g).unwrap();
        assert!(rel_op_diff(&w.matrix, &position_matrix(&g)) < 1e-12);
        // every ordering quantises a function of v alone to the same diagonal
        let w = weyl_quantize(&v, 1.0, WeylConfig { tau: 0.3 }, &g).unwrap();
        assert!(rel_op_diff(&w.matrix, &position_matrix(&g)) < 1e-10);
    }

    #[test]
    fn op_norm_matches_svd() {
        let m = CMatrix::from_fn(20, 20, |i, j| Complex64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64));
        let svd = m.clone().svd(false, false);
        let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        assert!((op_norm(&m) - top).abs() < 1e-8 * top);
    }
}
