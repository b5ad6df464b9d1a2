//! The antiderivative 𝒜 in the central variable and the p-mechanical
//! bracket {{k1,k2}} = 𝒜(k1∗k2 − k2∗k1).

use crate::convolution::convolve_fast;
use crate::error::{PmechError, Result};
use crate::grid::{fft_axis, signed_bin, Axis, PFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative s-mean above which an input is rejected as outside L¹_v.
pub const S_MEAN_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AntiMode {
    GridCumulative,
    FourierDivision,
}

/// Largest |∫ f ds| over (x, y), relative to the largest ∫|f| ds.
pub fn s_mean_ratio(f: &PFunction) -> f64 {
    let spec = f.spec;
    let cols = spec.nx * spec.ny;
    let mut mean = vec![Complex64::default(); cols];
    let mut mass = vec![0.0; cols];
    for is in 0..spec.ns {
        for j in 0..cols {
            let v = f.values()[is * cols + j];
            mean[j] += v;
            mass[j] += v.norm();
        }
    }
    let top = mass.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    mean.iter().map(|v| v.norm()).fold(0.0, f64::max) / top
}

/// Cumulative integral along s from −∞ (the left edge of the grid).
pub fn apply_antiderivative(f: &PFunction, mode: AntiMode) -> Result<PFunction> {
    let ratio = s_mean_ratio(f);
    if ratio > S_MEAN_LIMIT {
        return Err(PmechError::NotInL1v { mean: ratio });
    }
    Ok(match mode {
        AntiMode::FourierDivision => fourier_division(f),
        AntiMode::GridCumulative => grid_cumulative(f),
    })
}

fn fourier_division(f: &PFunction) -> PFunction {
    let spec = f.spec;
    let n = spec.ns;
    let cols = spec.nx * spec.ny;
    let ss = spec.nodes(Axis::S);
    let mut data = f.values().to_vec();

    // ħ = 0: −∫ s f ds, expressed as a DFT bin (the bin holds Σ_j g_j)
    let mut moment = vec![Complex64::default(); cols];
    for (is, &s) in ss.iter().enumerate() {
        for j in 0..cols {
            moment[j] -= data[is * cols + j] * s;
        }
    }
    fft_axis(&spec, &mut data, Axis::S, false);
    for k in 0..n {
        let m = signed_bin(k, n);
        let row = &mut data[k * cols..(k + 1) * cols];
        if m == 0 {
            row.copy_from_slice(&moment);
        } else if m == -(n as i64) / 2 {
            row.iter_mut().for_each(|v| *v = Complex64::default());
        } else {
            let factor = Complex64::new(0.0, -spec.ls / (PI * m as f64));
            row.iter_mut().for_each(|v| *v *= factor);
        }
    }
    fft_axis(&spec, &mut data, Axis::S, true);
    let inv = 1.0 / n as f64;
    data.iter_mut().for_each(|v| *v *= inv);
    PFunction::from_values(spec, data)
}

/// w_m with ∫_{s_j}^{s_j+h} p(s) ds = Σ_m w_m f_{j+m} for the band-limited
/// interpolant p of periodic samples f (offsets m in FFT order).
fn cell_weights(n: usize, h: f64) -> Vec<f64> {
    let period = n as f64 * h;
    (0..n)
        .map(|m| {
            let mut w = h;
            for k in 1..n / 2 {
                // ∫_0^h e^{iωs} ds paired with its conjugate bin, shifted by m
                let omega = 2.0 * PI * k as f64 / period;
                let c = Complex64::new(0.0, 1.0) * omega;
                let cell = ((c * h).exp() - 1.0) / c;
                let phase = Complex64::from_polar(1.0, -omega * m as f64 * h);
                w += 2.0 * (cell * phase).re;
            }
            // the Nyquist bin integrates to zero over a cell
            w / n as f64
        })
        .collect()
}

fn grid_cumulative(f: &PFunction) -> PFunction {
    let spec = f.spec;
    let n = spec.ns;
    let cols = spec.nx * spec.ny;
    let weights = cell_weights(n, spec.step(Axis::S));
    let mut out = vec![Complex64::default(); spec.len()];
    let mut acc = vec![Complex64::default(); cols];
    let mut cell = vec![Complex64::default(); cols];
    for j in 0..n - 1 {
        cell.iter_mut().for_each(|c| *c = Complex64::default());
        for (m, &w) in weights.iter().enumerate() {
            let row = &f.values()[((j + m) % n) * cols..((j + m) % n + 1) * cols];
            for (c, v) in cell.iter_mut().zip(row) {
                *c += v * w;
            }
        }
        for (a, c) in acc.iter_mut().zip(&cell) {
            *a += c;
        }
        out[(j + 1) * cols..(j + 2) * cols].copy_from_slice(&acc);
    }
    PFunction::from_values(spec, out)
}

/// k1∗k2 − k2∗k1.
pub fn commutator(k1: &PFunction, k2: &PFunction) -> Result<PFunction> {
    let ab = convolve_fast(k1, k2)?;
    let ba = convolve_fast(k2, k1)?;
    ab.sub(&ba)
}

pub fn pbracket(k1: &PFunction, k2: &PFunction) -> Result<PFunction> {
    pbracket_with(k1, k2, AntiMode::FourierDivision)
}

pub fn pbracket_with(k1: &PFunction, k2: &PFunction, mode: AntiMode) -> Result<PFunction> {
    apply_antiderivative(&commutator(k1, k2)?, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn spec() -> GridSpec {
        GridSpec::new(8.0, 4.0, 4.0, 64, 16, 16).unwrap()
    }

    fn profile(f: impl Fn(f64) -> f64) -> PFunction {
        PFunction::from_fn(spec(), move |s, x, y| Complex64::new(f(s) * (-x * x - 0.5 * y * y).exp(), 0.0)).unwrap()
    }

    #[test]
    fn antiderivative_of_odd_gaussian() {
        let f = profile(|s| s * (-s * s).exp());
        let expect = profile(|s| -0.5 * (-s * s).exp());
        for mode in [AntiMode::FourierDivision, AntiMode::GridCumulative] {
            let g = apply_antiderivative(&f, mode).unwrap();
            assert!(g.rel_l2(&expect) < 1e-9, "{mode:?} {}", g.rel_l2(&expect));
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = PFunction::zeros(spec());
        for mode in [AntiMode::FourierDivision, AntiMode::GridCumulative] {
            assert_eq!(apply_antiderivative(&z, mode).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn zero_slice_moment() {
        // ∫ 𝒜f ds = −∫ s f ds = −√π/2 for f = s e^{−s²}
        let f = profile(|s| s * (-s * s).exp());
        let g = apply_antiderivative(&f, AntiMode::FourierDivision).unwrap();
        let s = spec();
        let cols = s.nx * s.ny;
        let centre = (s.nx / 2) * s.ny + s.ny / 2;
        let integral: Complex64 = (0..s.ns).map(|is| g.values()[is * cols + centre]).sum::<Complex64>() * s.step(Axis::S);
        assert!((integral.re + PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn nonzero_mean_rejected() {
        let f = profile(|s| (-s * s).exp());
        assert!(matches!(apply_antiderivative(&f, AntiMode::FourierDivision), Err(PmechError::NotInL1v { .. })));
    }

    #[test]
    fn commutes_with_grid_shifts() {
        let f = profile(|s| (s - 0.5) * (-(s - 0.5) * (s - 0.5)).exp());
        for mode in [AntiMode::FourierDivision, AntiMode::GridCumulative] {
            let a = apply_antiderivative(&f.roll_s(3), mode).unwrap();
            let b = apply_antiderivative(&f, mode).unwrap().roll_s(3);
            assert!(a.rel_l2(&b) < 1e-9);
        }
    }
}
