//! Harmonic oscillator H = δ(s)δ''(x)δ(y) + δ(s)δ(x)δ''(y).
//!
//! Its bracket acts as the transport operator {{f,H}} = 2(x∂_y − y∂_x)f, so
//! observables rotate rigidly in (x,y): f(t) = f0 ∘ R(−2t) with
//! R(t)(x,y) = (x cos t + y sin t, −x sin t + y cos t).

use crate::catalog::{GaussPoly, SeparableTerm, TestSignal};
use crate::dynamics::{FieldMonomial, FieldPolynomial, Generator, HamiltonianSpec};
use crate::error::{PmechError, Result};
use crate::grid::{spectral_derivative, Axis, PFunction, Shifter};
use crate::schrodinger::{momentum_sq_matrix, position_matrix, CMatrix, ClassicalLattice, WaveGrid};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationFlow {
    pub t: f64,
}

impl RotationFlow {
    pub fn new(t: f64) -> Self {
        Self { t }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.t.sin_cos();
        (x * c + y * s, -x * s + y * c)
    }

    pub fn then(&self, other: RotationFlow) -> RotationFlow {
        RotationFlow::new(self.t + other.t)
    }
}

pub fn oscillator_polynomial() -> FieldPolynomial {
    FieldPolynomial {
        terms: vec![
            FieldMonomial { coeff: 1.0, word: vec![Generator::X, Generator::X] },
            FieldMonomial { coeff: 1.0, word: vec![Generator::Y, Generator::Y] },
        ],
    }
}

pub fn oscillator_hamiltonian() -> HamiltonianSpec {
    HamiltonianSpec::DifferentialOperator(oscillator_polynomial())
}

/// 2(x∂_y − y∂_x)f.
pub fn transport_rhs(f: &PFunction) -> Result<PFunction> {
    f.ensure_admitted()?;
    f.nyquist_check()?;
    let spec = f.spec;
    let dx = spectral_derivative(&spec, f.values(), Axis::X, 1);
    let dy = spectral_derivative(&spec, f.values(), Axis::Y, 1);
    let (xs, ys) = (spec.nodes(Axis::X), spec.nodes(Axis::Y));
    let mut out = vec![Complex64::default(); spec.len()];
    for is in 0..spec.ns {
        for (ix, &x) in xs.iter().enumerate() {
            for (iy, &y) in ys.iter().enumerate() {
                let idx = spec.index(is, ix, iy);
                out[idx] = (dy[idx] * x - dx[idx] * y) * 2.0;
            }
        }
    }
    PFunction::new(spec, out)
}

/// f0 ∘ R(t) on every s-slice: whole quarter turns by index permutation,
/// the remainder (|r| ≤ π/4) by three spectral shears
/// R(r) = S_x(tan(r/2)) S_y(−sin r) S_x(tan(r/2)).
pub fn rotate_exact(f0: &PFunction, t: f64) -> Result<PFunction> {
    f0.ensure_admitted()?;
    let spec = f0.spec;
    if spec.nx != spec.ny || spec.lx != spec.ly {
        return Err(PmechError::InvalidGrid("rotation needs a square (x, y) grid".into()));
    }
    if !t.is_finite() {
        return Err(PmechError::NonFinite);
    }
    let quarters = (t / FRAC_PI_2).round();
    let r = t - quarters * FRAC_PI_2;
    let n = spec.nx;
    let mut v = f0.values().to_vec();
    for _ in 0..(quarters as i64).rem_euclid(4) {
        // (f ∘ Q)(x, y) = f(y, −x), and −x_i is node (n − i) mod n
        let mut w = vec![Complex64::default(); v.len()];
        for is in 0..spec.ns {
            for ix in 0..n {
                for iy in 0..n {
                    w[spec.index(is, ix, iy)] = v[spec.index(is, iy, (n - ix) % n)];
                }
            }
        }
        v = w;
    }
    if r != 0.0 {
        let alpha = (r / 2.0).tan();
        let beta = -r.sin();
        let h = spec.step(Axis::X);
        let nodes = spec.nodes(Axis::X);
        let mut shifter = Shifter::new(n, h);
        let mut col = vec![Complex64::default(); n];
        for is in 0..spec.ns {
            let base = spec.index(is, 0, 0);
            let slice = &mut v[base..base + n * n];
            shear_x(slice, n, alpha, &nodes, &mut shifter, &mut col);
            // h(x, y) ↦ h(x, y + βx): shift each row along y
            for (ix, &x) in nodes.iter().enumerate() {
                shifter.shift_in_place(&mut slice[ix * n..(ix + 1) * n], beta * x);
            }
            shear_x(slice, n, alpha, &nodes, &mut shifter, &mut col);
        }
    }
    PFunction::new(spec, v)
}

/// h(x, y) ↦ h(x + αy, y) on one n×n slice stored x-major.
fn shear_x(slice: &mut [Complex64], n: usize, alpha: f64, nodes: &[f64], shifter: &mut Shifter, col: &mut [Complex64]) {
    for (iy, &y) in nodes.iter().enumerate() {
        for ix in 0..n {
            col[ix] = slice[ix * n + iy];
        }
        shifter.shift_in_place(col, alpha * y);
        for ix in 0..n {
            slice[ix * n + iy] = col[ix];
        }
    }
}

/// Exact solution of ḟ = 2(x∂_y − y∂_x)f: f0 ∘ R(−2t), period π.
pub fn transport_flow(f0: &PFunction, t: f64) -> Result<PFunction> {
    rotate_exact(f0, -2.0 * t)
}

/// ρ_ħ(H) = −ħ(M² + D²) on the wave grid.
pub fn quantum_hamiltonian(hbar: f64, grid: &WaveGrid) -> CMatrix {
    let m = position_matrix(grid);
    -(&m * &m + momentum_sq_matrix(grid)) * Complex64::new(hbar, 0.0)
}

/// Solution of dK/dt = (1/iħ)[K, H]: e^{−tG} K0 e^{tG} with G = H/(iħ).
pub fn heisenberg_flow(k0: &CMatrix, h: &CMatrix, hbar: f64, t: f64) -> CMatrix {
    let g = h * Complex64::new(0.0, -t / hbar);
    let u = g.exp();
    let uinv = (-g).exp();
    uinv * k0 * u
}

/// Classical symbol of the transported observable: k̂0(0, R(−2t)(q,p)).
pub fn classical_flow(signal: &TestSignal, t: f64, lattice: &ClassicalLattice) -> CMatrix {
    let rot = RotationFlow::new(-2.0 * t);
    let (qs, ps) = (lattice.q_nodes(), lattice.p_nodes());
    CMatrix::from_fn(qs.len(), ps.len(), |a, b| {
        let (q, p) = rot.apply(qs[a], ps[b]);
        signal.transform(0.0, q, p)
    })
}

/// Gaussian smearing of H at width ε in every variable:
/// δ_ε(s)δ_ε''(x)δ_ε(y) + δ_ε(s)δ_ε(x)δ_ε''(y) with unit-mass δ_ε.
pub fn smeared_oscillator(eps: f64) -> TestSignal {
    let unit = 1.0 / ((2.0 * PI).sqrt() * eps);
    let d = GaussPoly::with_poly(0.0, eps, &[unit]);
    let d2 = d.derivative().derivative();
    let amp = Complex64::new(1.0, 0.0);
    TestSignal {
        name: "oscillator-smeared".into(),
        terms: vec![
            SeparableTerm { amp, s: d.clone(), x: d2.clone(), y: d.clone() },
            SeparableTerm { amp, s: d.clone(), x: d.clone(), y: d2 },
        ],
    }
}

/// Polynomial extrapolation in ε² to ε = 0 (Neville's scheme).
pub fn richardson(samples: &[(f64, CMatrix)]) -> Result<CMatrix> {
    if samples.is_empty() {
        return Err(PmechError::InvalidParameter("no samples to extrapolate".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|(e, _)| e * e).collect();
    let mut p: Vec<CMatrix> = samples.iter().map(|(_, m)| m.clone()).collect();
    for level in 1..p.len() {
        for i in 0..p.len() - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            // value at 0 of the line through (xi, p[i]) and (xj, p[i+1])
            p[i] = (&p[i + 1] * Complex64::new(xi, 0.0) - &p[i] * Complex64::new(xj, 0.0)) / Complex64::new(xi - xj, 0.0);
        }
    }
    Ok(p.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn spec() -> GridSpec {
        crate::presets::oscillator_grid()
    }

    fn blob() -> PFunction {
        PFunction::from_fn(spec(), |s, x, y| {
            let g = (-(s * s) / 4.5 - ((x - 1.0) * (x - 1.0) + (y + 0.5) * (y + 0.5) * 1.2) / 2.0).exp();
            Complex64::new(g * (1.0 + 0.3 * x), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn rotation_is_orthogonal() {
        let r = RotationFlow::new(0.7);
        let (x, y) = r.apply(1.3, -0.4);
        assert!((x * x + y * y - (1.3f64.powi(2) + 0.16)).abs() < 1e-14);
    }

    #[test]
    fn quarter_turn_matches_display() {
        let f = blob();
        let g = rotate_exact(&f, FRAC_PI_2).unwrap();
        let expect = PFunction::from_fn(spec(), |s, x, y| {
            let (u, v) = (y, -x);
            let gg = (-(s * s) / 4.5 - ((u - 1.0) * (u - 1.0) + (v + 0.5) * (v + 0.5) * 1.2) / 2.0).exp();
            Complex64::new(gg * (1.0 + 0.3 * u), 0.0)
        })
        .unwrap();
        assert!(g.rel_l2(&expect) < 1e-8);
    }

    #[test]
    fn full_turn_and_half_turn() {
        let f = blob();
        assert!(rotate_exact(&f, 2.0 * PI).unwrap().rel_l2(&f) < 1e-10);
        let half = rotate_exact(&f, PI).unwrap();
        let twice = rotate_exact(&rotate_exact(&f, PI / 2.0).unwrap(), PI / 2.0).unwrap();
        assert!(half.rel_l2(&twice) < 1e-9);
    }

    #[test]
    fn shears_compose() {
        let f = blob();
        let a = rotate_exact(&rotate_exact(&f, 0.3).unwrap(), 0.25).unwrap();
        let b = rotate_exact(&f, 0.55).unwrap();
        assert!(a.rel_l2(&b) < 1e-9, "{}", a.rel_l2(&b));
    }

    #[test]
    fn radial_functions_do_not_move() {
        let f = PFunction::from_fn(spec(), |s, x, y| Complex64::new((-(s * s) / 4.5 - (x * x + y * y) / 2.0).exp(), 0.0)).unwrap();
        assert!(transport_rhs(&f).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let exact = CMatrix::identity(2, 2);
        let samples: Vec<(f64, CMatrix)> =
            [0.4, 0.3, 0.2].iter().map(|&e: &f64| (e, &exact * Complex64::new(1.0 + 2.0 * e * e - e.powi(4), 0.0))).collect();
        let r = richardson(&samples).unwrap();
        assert!((r - exact).norm() < 1e-12);
    }
}
