//! Uniform periodic grids on H^1, sampled observables, Fourier in s,
//! spectral interpolation and quadrature.

use crate::error::{PmechError, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

/// Largest tail fraction admitted to convolution and bracket operations.
pub const TAIL_LIMIT: f64 = 0.01;
/// Relative spectral content allowed in the top band before a grid is
/// declared too coarse for differentiation.
pub const NYQUIST_LIMIT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    S,
    X,
    Y,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::S => "s",
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ls: f64,
    pub lx: f64,
    pub ly: f64,
    pub ns: usize,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(ls: f64, lx: f64, ly: f64, ns: usize, nx: usize, ny: usize) -> Result<Self> {
        for (name, l) in [("L_s", ls), ("L_x", lx), ("L_y", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(PmechError::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        for (name, n) in [("N_s", ns), ("N_x", nx), ("N_y", ny)] {
            if n < 16 || !n.is_power_of_two() {
                return Err(PmechError::InvalidGrid(format!(
                    "{name} = {n} must be a power of two >= 16"
                )));
            }
        }
        Ok(Self { ls, lx, ly, ns, nx, ny })
    }

    /// Cube grid with the same extent and count on every axis.
    pub fn cube(l: f64, n: usize) -> Result<Self> {
        Self::new(l, l, l, n, n, n)
    }

    pub fn len(&self) -> usize {
        self.ns * self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn half_extent(&self, axis: Axis) -> f64 {
        match axis {
            Axis::S => self.ls,
            Axis::X => self.lx,
            Axis::Y => self.ly,
        }
    }

    pub fn count(&self, axis: Axis) -> usize {
        match axis {
            Axis::S => self.ns,
            Axis::X => self.nx,
            Axis::Y => self.ny,
        }
    }

    pub fn step(&self, axis: Axis) -> f64 {
        2.0 * self.half_extent(axis) / self.count(axis) as f64
    }

    pub fn nodes(&self, axis: Axis) -> Vec<f64> {
        let (l, h) = (self.half_extent(axis), self.step(axis));
        (0..self.count(axis)).map(|j| -l + j as f64 * h).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.step(Axis::S) * self.step(Axis::X) * self.step(Axis::Y)
    }

    #[inline]
    pub fn index(&self, is: usize, ix: usize, iy: usize) -> usize {
        (is * self.nx + ix) * self.ny + iy
    }

    /// Dual frequencies of the s axis in ascending order (Nyquist first).
    pub fn hbar_grid(&self) -> Vec<f64> {
        let n = self.ns as i64;
        (0..n).map(|m| (m - n / 2) as f64 * PI / self.ls).collect()
    }
}

/// Signed frequency index of DFT bin `k` for length `n`.
#[inline]
pub(crate) fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

thread_local! {
    static PLANNER: std::cell::RefCell<FftPlanner<f64>> = std::cell::RefCell::new(FftPlanner::new());
}

/// FFT plan from a per-thread planner (which caches plans by size).
pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    })
}

/// Unnormalised DFT along one axis, in place. The inverse is not scaled.
pub(crate) fn fft_axis(spec: &GridSpec, data: &mut [Complex64], axis: Axis, inverse: bool) {
    let n = spec.count(axis);
    let fft = plan(n, inverse);
    let (ns, nx, ny) = (spec.ns, spec.nx, spec.ny);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    match axis {
        Axis::Y => fft.process_with_scratch(data, &mut scratch),
        Axis::X => {
            // transform a whole (x, y) slab at once: gather y-lanes side by side
            let mut slab = vec![Complex64::default(); nx * ny];
            for is in 0..ns {
                let base = spec.index(is, 0, 0);
                for ix in 0..nx {
                    for iy in 0..ny {
                        slab[iy * nx + ix] = data[base + ix * ny + iy];
                    }
                }
                fft.process_with_scratch(&mut slab, &mut scratch);
                for ix in 0..nx {
                    for iy in 0..ny {
                        data[base + ix * ny + iy] = slab[iy * nx + ix];
                    }
                }
            }
        }
        Axis::S => {
            let stride = nx * ny;
            let mut lanes = vec![Complex64::default(); ns * stride];
            for is in 0..ns {
                for j in 0..stride {
                    lanes[j * ns + is] = data[is * stride + j];
                }
            }
            fft.process_with_scratch(&mut lanes, &mut scratch);
            for is in 0..ns {
                for j in 0..stride {
                    data[is * stride + j] = lanes[j * ns + is];
                }
            }
        }
    }
}

/// Spectral derivative of the given order along one axis. The Nyquist bin is
/// dropped for odd orders.
pub fn spectral_derivative(
    spec: &GridSpec,
    values: &[Complex64],
    axis: Axis,
    order: u32,
) -> Vec<Complex64> {
    let mut data = values.to_vec();
    if order == 0 {
        return data;
    }
    let n = spec.count(axis);
    let l = spec.half_extent(axis);
    fft_axis(spec, &mut data, axis, false);
    let mult: Vec<Complex64> = (0..n)
        .map(|k| {
            let m = signed_bin(k, n);
            if order % 2 == 1 && m == -(n as i64) / 2 {
                return Complex64::default();
            }
            Complex64::new(0.0, m as f64 * PI / l).powu(order) / n as f64
        })
        .collect();
    for (idx, v) in data.iter_mut().enumerate() {
        let k = axis_index(spec, idx, axis);
        *v *= mult[k];
    }
    fft_axis(spec, &mut data, axis, true);
    data
}

#[inline]
pub(crate) fn axis_index(spec: &GridSpec, idx: usize, axis: Axis) -> usize {
    match axis {
        Axis::Y => idx % spec.ny,
        Axis::X => (idx / spec.ny) % spec.nx,
        Axis::S => idx / (spec.nx * spec.ny),
    }
}

#[derive(Clone, Debug)]
pub struct PFunction {
    pub spec: GridSpec,
    values: Vec<Complex64>,
    tail_mass: f64,
}

impl PFunction {
    /// Wraps values without checking finiteness; internal results only.
    pub(crate) fn from_values(spec: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        let tail_mass = tail_fraction(&spec, &values);
        Self { spec, values, tail_mass }
    }

    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(PmechError::DimensionMismatch(format!(
                "{} values for a grid of {}",
                values.len(),
                spec.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(PmechError::NonFinite);
        }
        Ok(Self::from_values(spec, values))
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64, f64) -> Complex64) -> Result<Self> {
        let (ss, xs, ys) = (spec.nodes(Axis::S), spec.nodes(Axis::X), spec.nodes(Axis::Y));
        let mut values = Vec::with_capacity(spec.len());
        for &s in &ss {
            for &x in &xs {
                for &y in &ys {
                    values.push(f(s, x, y));
                }
            }
        }
        Self::new(spec, values)
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::from_values(spec, vec![Complex64::default(); spec.len()])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    #[inline]
    pub fn at(&self, is: usize, ix: usize, iy: usize) -> Complex64 {
        self.values[self.spec.index(is, ix, iy)]
    }

    /// Boundary-leakage guard for convolution and bracket operands.
    pub fn ensure_admitted(&self) -> Result<()> {
        if self.tail_mass >= TAIL_LIMIT {
            return Err(PmechError::DomainTooSmall { tail: self.tail_mass, limit: TAIL_LIMIT });
        }
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_values(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn zip_with(
        &self,
        other: &PFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.spec != other.spec {
            return Err(PmechError::GridMismatch);
        }
        Ok(Self::from_values(
            self.spec,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &PFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.spec.cell_volume()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.spec.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// ‖self − other‖₂ / ‖other‖₂, or the plain difference norm when the
    /// reference vanishes.
    pub fn rel_l2(&self, reference: &PFunction) -> f64 {
        let diff: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
        if den > 0.0 {
            (diff / den).sqrt()
        } else {
            diff.sqrt()
        }
    }

    /// Fails if any axis carries noticeable spectral content near Nyquist.
    pub fn nyquist_check(&self) -> Result<()> {
        for axis in [Axis::S, Axis::X, Axis::Y] {
            let ratio = top_band_ratio(&self.spec, &self.values, axis);
            if ratio > NYQUIST_LIMIT {
                return Err(PmechError::GridTooCoarse { axis: axis.name(), ratio });
            }
        }
        Ok(())
    }

    /// Shifts every s-column by `k` grid steps (periodically).
    pub fn roll_s(&self, k: i64) -> Self {
        let spec = self.spec;
        let n = spec.ns as i64;
        let stride = spec.nx * spec.ny;
        let mut out = vec![Complex64::default(); spec.len()];
        for is in 0..spec.ns {
            let src = (is as i64 - k).rem_euclid(n) as usize;
            out[is * stride..(is + 1) * stride]
                .copy_from_slice(&self.values[src * stride..(src + 1) * stride]);
        }
        Self::from_values(spec, out)
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let spec = self.spec;
        let mut buf = Vec::with_capacity(48 + 16 * spec.len());
        for n in [spec.ns, spec.nx, spec.ny] {
            buf.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for l in [spec.ls, spec.lx, spec.ly] {
            buf.extend_from_slice(&l.to_le_bytes());
        }
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        let sidecar = path.with_extension("json");
        std::fs::write(sidecar, serde_json::to_string_pretty(&spec)?)?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 48 {
            return Err(PmechError::InvalidGrid("truncated header".into()));
        }
        let word = |i: usize| -> [u8; 8] { buf[8 * i..8 * i + 8].try_into().unwrap() };
        let dims: Vec<usize> = (0..3).map(|i| u64::from_le_bytes(word(i)) as usize).collect();
        let ext: Vec<f64> = (3..6).map(|i| f64::from_le_bytes(word(i))).collect();
        let spec = GridSpec::new(ext[0], ext[1], ext[2], dims[0], dims[1], dims[2])?;
        if buf.len() != 48 + 16 * spec.len() {
            return Err(PmechError::InvalidGrid("payload size does not match header".into()));
        }
        let values = (0..spec.len())
            .map(|j| Complex64::new(f64::from_le_bytes(word(6 + 2 * j)), f64::from_le_bytes(word(7 + 2 * j))))
            .collect();
        Self::new(spec, values)
    }
}

fn tail_fraction(spec: &GridSpec, values: &[Complex64]) -> f64 {
    let outer = |axis: Axis| -> Vec<bool> {
        let l = spec.half_extent(axis);
        spec.nodes(axis).iter().map(|u| u.abs() >= 0.9 * l).collect()
    };
    let (os, ox, oy) = (outer(Axis::S), outer(Axis::X), outer(Axis::Y));
    let (mut total, mut tail) = (0.0, 0.0);
    for is in 0..spec.ns {
        for ix in 0..spec.nx {
            for iy in 0..spec.ny {
                let a = values[spec.index(is, ix, iy)].norm();
                total += a;
                if os[is] || ox[ix] || oy[iy] {
                    tail += a;
                }
            }
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Largest spectral magnitude in the outer eighth of frequencies along
/// `axis`, relative to the largest magnitude overall.
fn top_band_ratio(spec: &GridSpec, values: &[Complex64], axis: Axis) -> f64 {
    let mut data = values.to_vec();
    fft_axis(spec, &mut data, axis, false);
    let n = spec.count(axis);
    let (mut top, mut all) = (0.0f64, 0.0f64);
    for (idx, v) in data.iter().enumerate() {
        let m = signed_bin(axis_index(spec, idx, axis), n).unsigned_abs() as usize;
        let a = v.norm();
        all = all.max(a);
        if 8 * m > 3 * n {
            top = top.max(a);
        }
    }
    if all > 0.0 {
        top / all
    } else {
        0.0
    }
}

/// Fourier transform along s: one (x, y) slice per dual frequency.
#[derive(Clone, Debug)]
pub struct SlicedFunction {
    pub spec: GridSpec,
    pub slices: Vec<Complex64>,
    pub hbar_grid: Vec<f64>,
}

impl SlicedFunction {
    pub fn slice(&self, m: usize) -> &[Complex64] {
        let stride = self.spec.nx * self.spec.ny;
        &self.slices[m * stride..(m + 1) * stride]
    }

    /// Position of the slice treated as ħ = 0.
    pub fn zero_slice(&self) -> usize {
        self.spec.ns / 2
    }
}

/// Unitary transform F(ħ) = (2π)^{-1/2} ∫ k(s,·) e^{-iħs} ds, slices in
/// ascending ħ.
pub fn fourier_s(k: &PFunction) -> SlicedFunction {
    let spec = k.spec;
    let n = spec.ns;
    let stride = spec.nx * spec.ny;
    let mut data = k.values.clone();
    fft_axis(&spec, &mut data, Axis::S, false);
    let scale = spec.step(Axis::S) / (2.0 * PI).sqrt();
    let mut slices = vec![Complex64::default(); spec.len()];
    for m in 0..n {
        let signed = m as i64 - (n / 2) as i64;
        let k_bin = signed.rem_euclid(n as i64) as usize;
        let c = if signed % 2 == 0 { scale } else { -scale };
        for j in 0..stride {
            slices[m * stride + j] = data[k_bin * stride + j] * c;
        }
    }
    SlicedFunction { spec, slices, hbar_grid: spec.hbar_grid() }
}

pub fn inverse_fourier_s(f: &SlicedFunction) -> PFunction {
    let spec = f.spec;
    let n = spec.ns;
    let stride = spec.nx * spec.ny;
    let scale = (2.0 * PI).sqrt() / spec.step(Axis::S) / n as f64;
    let mut data = vec![Complex64::default(); spec.len()];
    for m in 0..n {
        let signed = m as i64 - (n / 2) as i64;
        let k_bin = signed.rem_euclid(n as i64) as usize;
        let c = if signed % 2 == 0 { scale } else { -scale };
        for j in 0..stride {
            data[k_bin * stride + j] = f.slices[m * stride + j] * c;
        }
    }
    fft_axis(&spec, &mut data, Axis::S, true);
    PFunction::from_values(spec, data)
}

/// Band-limited shift on a periodic grid of spacing `h`: returns u(v + a).
/// The Nyquist bin uses the real (cosine) interpolant, so shifts by whole
/// grid steps are exact circular shifts.
pub fn shift_interp(u: &[Complex64], h: f64, a: f64) -> Vec<Complex64> {
    let mut shifter = Shifter::new(u.len(), h);
    let mut out = u.to_vec();
    shifter.shift_in_place(&mut out, a);
    out
}

/// Reusable spectral shifter for repeated shifts of equal-length columns.
pub(crate) struct Shifter {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
    freqs: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Shifter {
    pub(crate) fn new(n: usize, h: f64) -> Self {
        let period = n as f64 * h;
        let freqs = (0..n).map(|k| 2.0 * PI * signed_bin(k, n) as f64 / period).collect();
        let scratch_len = plan(n, false).get_inplace_scratch_len();
        Self {
            n,
            forward: plan(n, false),
            backward: plan(n, true),
            freqs,
            scratch: vec![Complex64::default(); scratch_len.max(1)],
        }
    }

    pub(crate) fn shift_in_place(&mut self, u: &mut [Complex64], a: f64) {
        if a == 0.0 {
            return;
        }
        self.forward.process_with_scratch(u, &mut self.scratch);
        let inv_n = 1.0 / self.n as f64;
        for (k, v) in u.iter_mut().enumerate() {
            let w = self.freqs[k] * a;
            let factor = if 2 * k == self.n {
                Complex64::new(w.cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, w)
            };
            *v *= factor * inv_n;
        }
        self.backward.process_with_scratch(u, &mut self.scratch);
    }
}

/// Periodic Riemann sum of weight·k over the grid with dg = ds dx dy.
pub fn quadrature(k: &PFunction, weight: Option<&dyn Fn(f64, f64, f64) -> Complex64>) -> Complex64 {
    let spec = k.spec;
    let mut acc = Complex64::default();
    match weight {
        None => {
            for v in &k.values {
                acc += v;
            }
        }
        Some(w) => {
            let (ss, xs, ys) = (spec.nodes(Axis::S), spec.nodes(Axis::X), spec.nodes(Axis::Y));
            for (is, &s) in ss.iter().enumerate() {
                for (ix, &x) in xs.iter().enumerate() {
                    for (iy, &y) in ys.iter().enumerate() {
                        acc += w(s, x, y) * k.values[spec.index(is, ix, iy)];
                    }
                }
            }
        }
    }
    acc * spec.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(spec: GridSpec) -> PFunction {
        PFunction::from_fn(spec, |s, x, y| Complex64::new((-s * s - x * x - y * y).exp(), 0.0)).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::cube(4.0, 16).is_ok());
        assert!(GridSpec::cube(4.0, 24).is_err());
        assert!(GridSpec::cube(4.0, 8).is_err());
        assert!(GridSpec::cube(-1.0, 16).is_err());
    }

    #[test]
    fn gaussian_integrals() {
        let spec = GridSpec::cube(8.0, 64).unwrap();
        let k = gauss(spec);
        let total = quadrature(&k, None);
        assert!((total.re - PI.powf(1.5)).abs() / PI.powf(1.5) < 1e-10);
        assert!((k.l1_norm() - PI.powf(1.5)).abs() / PI.powf(1.5) < 1e-10);
        let odd = quadrature(&k, Some(&|s, _, _| Complex64::new(s, 0.0)));
        assert!(odd.norm() < 1e-12);
        let second = quadrature(&k, Some(&|s, _, _| Complex64::new(s * s, 0.0)));
        let exact = PI.sqrt() / 2.0 * PI;
        assert!((second.re - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn odd_sample_vanishes_at_origin() {
        let spec = GridSpec::cube(4.0, 16).unwrap();
        let k = PFunction::from_fn(spec, |s, x, y| Complex64::new(s * (-s * s - x * x - y * y).exp(), 0.0)).unwrap();
        assert_eq!(k.at(8, 8, 8), Complex64::default());
    }

    #[test]
    fn fourier_round_trip_and_parseval() {
        let spec = GridSpec::new(6.0, 4.0, 4.0, 32, 16, 16).unwrap();
        let k = PFunction::from_fn(spec, |s, x, y| {
            Complex64::new((-(s - 0.3).powi(2) - x * x - 2.0 * y * y).exp(), s * (-s * s - x * x - y * y).exp())
        })
        .unwrap();
        let f = fourier_s(&k);
        let back = inverse_fourier_s(&f);
        assert!(back.rel_l2(&k) < 1e-12);
        let dh = PI / spec.ls;
        let e_hat: f64 = f.slices.iter().map(|v| v.norm_sqr()).sum::<f64>() * dh * spec.step(Axis::X) * spec.step(Axis::Y);
        let e = k.l2_norm().powi(2);
        assert!((e_hat - e).abs() / e < 1e-12);
    }

    #[test]
    fn fourier_of_gaussian_at_zero() {
        let spec = GridSpec::new(8.0, 4.0, 4.0, 64, 16, 16).unwrap();
        let k = PFunction::from_fn(spec, |s, x, y| Complex64::new((-s * s).exp() * (-x * x - y * y).exp(), 0.0)).unwrap();
        let f = fourier_s(&k);
        let z = f.zero_slice();
        assert_eq!(f.hbar_grid[z], 0.0);
        let stride = spec.nx * spec.ny;
        let (xs, ys) = (spec.nodes(Axis::X), spec.nodes(Axis::Y));
        for ix in 0..spec.nx {
            for iy in 0..spec.ny {
                let expect = PI.sqrt() / (2.0 * PI).sqrt() * (-xs[ix] * xs[ix] - ys[iy] * ys[iy]).exp();
                let got = f.slices[z * stride + ix * spec.ny + iy];
                assert!((got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-12);
            }
        }
        // real even profile gives real slices
        assert!(f.slices.iter().all(|v| v.im.abs() < 1e-12));
        let odd = PFunction::from_fn(spec, |s, x, y| Complex64::new(s * (-s * s - x * x - y * y).exp(), 0.0)).unwrap();
        let fo = fourier_s(&odd);
        assert!(fo.slice(z).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn shift_examples() {
        let n = 64;
        let h = 0.25;
        let nodes: Vec<f64> = (0..n).map(|j| -8.0 + j as f64 * h).collect();
        let u: Vec<Complex64> = nodes.iter().map(|v| Complex64::new((-v * v / 2.0).exp(), 0.0)).collect();
        assert_eq!(shift_interp(&u, h, 0.0), u);
        let one = shift_interp(&u, h, h);
        for j in 0..n {
            assert!((one[j] - u[(j + 1) % n]).norm() < 1e-12);
        }
        let a = 0.3 * h;
        let shifted = shift_interp(&u, h, a);
        let err = nodes
            .iter()
            .zip(&shifted)
            .map(|(v, w)| (w.re - (-(v + a) * (v + a) / 2.0).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn tail_guard() {
        // width σ read as e^{-u²/σ²}
        let sigma = 1.0;
        let wide = GridSpec::cube(3.0 * sigma, 32).unwrap();
        let g = |s: f64, x: f64, y: f64| Complex64::new((-(s * s + x * x + y * y) / (sigma * sigma)).exp(), 0.0);
        assert!(PFunction::from_fn(wide, g).unwrap().ensure_admitted().is_ok());
        let tight = GridSpec::cube(sigma, 32).unwrap();
        assert!(PFunction::from_fn(tight, g).unwrap().ensure_admitted().is_err());
    }

    #[test]
    fn binary_round_trip() {
        let spec = GridSpec::new(3.0, 4.0, 5.0, 16, 16, 32).unwrap();
        let k = PFunction::from_fn(spec, |s, x, y| Complex64::new(s + x, y * s)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.bin");
        k.write_binary(&path).unwrap();
        let back = PFunction::read_binary(&path).unwrap();
        assert_eq!(back.spec, spec);
        assert_eq!(back.values(), k.values());
        let sidecar: GridSpec = serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
        assert_eq!(sidecar, spec);
    }

    #[test]
    fn derivative_of_gaussian() {
        let spec = GridSpec::new(8.0, 8.0, 8.0, 16, 64, 16).unwrap();
        let k = PFunction::from_fn(spec, |_, x, _| Complex64::new((-x * x / 2.0).exp(), 0.0)).unwrap();
        let d = spectral_derivative(&spec, k.values(), Axis::X, 1);
        let xs = spec.nodes(Axis::X);
        for ix in 0..spec.nx {
            let expect = -xs[ix] * (-xs[ix] * xs[ix] / 2.0).exp();
            assert!((d[spec.index(3, ix, 5)].re - expect).abs() < 1e-10);
        }
    }
}
