//! Analytic test observables: sums of separable Gaussian×polynomial terms
//! with closed-form values, Fourier transforms and symbol derivatives.

use crate::error::Result;
use crate::grid::{GridSpec, PFunction};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn poly_eval(p: &[Complex64], t: f64) -> Complex64 {
    p.iter().rev().fold(Complex64::default(), |acc, &c| acc * t + c)
}

fn poly_deriv(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().enumerate().skip(1).map(|(m, &c)| c * m as f64).collect()
}

/// P(u − c)·exp(−(u − c)²/(2σ²)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussPoly {
    pub center: f64,
    pub sigma: f64,
    pub coeffs: Vec<Complex64>,
}

impl GaussPoly {
    pub fn gaussian(center: f64, sigma: f64) -> Self {
        Self { center, sigma, coeffs: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn with_poly(center: f64, sigma: f64, coeffs: &[f64]) -> Self {
        Self { center, sigma, coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect() }
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        let t = u - self.center;
        poly_eval(&self.coeffs, t) * (-t * t / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// Polynomial T with ∫ f(u) e^{iqu} du = e^{iqc} T(q) σ√(2π) e^{−σ²q²/2}.
    fn transform_poly(&self) -> Vec<Complex64> {
        let s2 = self.sigma * self.sigma;
        let mut r = vec![Complex64::new(1.0, 0.0)];
        let mut total = vec![Complex64::default(); 1];
        for (m, &p) in self.coeffs.iter().enumerate() {
            if m > 0 {
                // R_{m+1} = −i (R_m' − σ² q R_m)
                let d = poly_deriv(&r);
                let mut next = vec![Complex64::default(); r.len() + 1];
                for (j, &c) in d.iter().enumerate() {
                    next[j] += c;
                }
                for (j, &c) in r.iter().enumerate() {
                    next[j + 1] -= c * s2;
                }
                r = next.into_iter().map(|c| -I * c).collect();
            }
            if total.len() < r.len() {
                total.resize(r.len(), Complex64::default());
            }
            for (j, &c) in r.iter().enumerate() {
                total[j] += p * c;
            }
        }
        total
    }

    /// (∫ f(u) e^{iqu} du, its q-derivative).
    pub fn ft(&self, q: f64) -> (Complex64, Complex64) {
        let t = self.transform_poly();
        let s2 = self.sigma * self.sigma;
        let g = self.sigma * (2.0 * PI).sqrt() * (-s2 * q * q / 2.0).exp();
        let phase = Complex64::from_polar(1.0, q * self.center);
        let tv = poly_eval(&t, q);
        let td = poly_eval(&poly_deriv(&t), q);
        let value = phase * tv * g;
        let deriv = phase * (I * self.center * tv + td - s2 * q * tv) * g;
        (value, deriv)
    }

    /// Derivative of the profile itself.
    pub fn derivative(&self) -> GaussPoly {
        let s2 = self.sigma * self.sigma;
        let mut coeffs = vec![Complex64::default(); self.coeffs.len() + 1];
        for (j, c) in poly_deriv(&self.coeffs).into_iter().enumerate() {
            coeffs[j] += c;
        }
        for (j, &c) in self.coeffs.iter().enumerate() {
            coeffs[j + 1] -= c / s2;
        }
        GaussPoly { center: self.center, sigma: self.sigma, coeffs }
    }

    fn scaled(&self, c: Complex64) -> GaussPoly {
        GaussPoly { center: self.center, sigma: self.sigma, coeffs: self.coeffs.iter().map(|&v| v * c).collect() }
    }

    fn is_even_about_origin(&self) -> bool {
        self.center == 0.0 && self.coeffs.iter().skip(1).step_by(2).all(|c| c.norm() == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub amp: Complex64,
    pub s: GaussPoly,
    pub x: GaussPoly,
    pub y: GaussPoly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSignal {
    pub name: String,
    pub terms: Vec<SeparableTerm>,
}

impl TestSignal {
    pub fn separable(name: &str, amp: f64, s: GaussPoly, x: GaussPoly, y: GaussPoly) -> Self {
        Self {
            name: name.to_string(),
            terms: vec![SeparableTerm { amp: Complex64::new(amp, 0.0), s, x, y }],
        }
    }

    pub fn eval(&self, s: f64, x: f64, y: f64) -> Complex64 {
        self.terms.iter().map(|t| t.amp * t.s.eval(s) * t.x.eval(x) * t.y.eval(y)).sum()
    }

    /// k̂(ħ,q,p) = ∫ k(g) e^{−iħs + i(qx+py)} dg.
    pub fn transform(&self, hbar: f64, q: f64, p: f64) -> Complex64 {
        self.terms.iter().map(|t| t.amp * t.s.ft(-hbar).0 * t.x.ft(q).0 * t.y.ft(p).0).sum()
    }

    /// (∂_q k̂, ∂_p k̂) at (ħ, q, p).
    pub fn transform_grad(&self, hbar: f64, q: f64, p: f64) -> (Complex64, Complex64) {
        let mut gq = Complex64::default();
        let mut gp = Complex64::default();
        for t in &self.terms {
            let fs = t.s.ft(-hbar).0;
            let (fx, dx) = t.x.ft(q);
            let (fy, dy) = t.y.ft(p);
            gq += t.amp * fs * dx * fy;
            gp += t.amp * fs * fx * dy;
        }
        (gq, gp)
    }

    /// Unitary s-transform (2π)^{-1/2} ∫ k(s,x,y) e^{−iħs} ds.
    pub fn fourier_s(&self, hbar: f64, x: f64, y: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.amp * t.s.ft(-hbar).0 * t.x.eval(x) * t.y.eval(y))
            .sum::<Complex64>()
            / (2.0 * PI).sqrt()
    }

    /// Poisson bracket {k̂1(0,·), k̂2(0,·)} at (q,p).
    pub fn poisson(&self, other: &TestSignal, q: f64, p: f64) -> Complex64 {
        let (aq, ap) = self.transform_grad(0.0, q, p);
        let (bq, bp) = other.transform_grad(0.0, q, p);
        aq * bp - ap * bq
    }

    /// Every term has an s-profile of zero mean.
    pub fn s_mean_zero(&self) -> bool {
        self.terms.iter().all(|t| t.s.ft(0.0).0.norm() < 1e-14 * t.s.sigma)
    }

    /// Every s-profile is even about s = 0.
    pub fn s_even(&self) -> bool {
        self.terms.iter().all(|t| t.s.is_even_about_origin())
    }

    pub fn sample(&self, spec: GridSpec) -> Result<PFunction> {
        let k = self.sample_unchecked(spec)?;
        k.ensure_admitted()?;
        Ok(k)
    }

    pub fn sample_unchecked(&self, spec: GridSpec) -> Result<PFunction> {
        PFunction::from_fn(spec, |s, x, y| self.eval(s, x, y))
    }

    pub fn add(&self, other: &TestSignal) -> TestSignal {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        TestSignal { name: format!("{}+{}", self.name, other.name), terms }
    }

    pub fn scaled(&self, c: Complex64) -> TestSignal {
        TestSignal {
            name: self.name.clone(),
            terms: self.terms.iter().map(|t| SeparableTerm { amp: t.amp * c, ..t.clone() }).collect(),
        }
    }

    /// ∂_s of the signal.
    pub fn ds(&self) -> TestSignal {
        TestSignal {
            name: format!("d_s {}", self.name),
            terms: self.terms.iter().map(|t| SeparableTerm { s: t.s.derivative(), ..t.clone() }).collect(),
        }
    }

    /// Every term is centred in (x, y) with plain Gaussian factors of equal
    /// width, so the signal is invariant under rotations of the plane.
    pub fn is_isotropic(&self) -> bool {
        self.terms.iter().all(|t| {
            t.x.center == 0.0
                && t.y.center == 0.0
                && t.x.sigma == t.y.sigma
                && t.x.coeffs.len() == 1
                && t.y.coeffs.len() == 1
        })
    }
}

/// Width profile for generated catalogs, in units where each factor is
/// exp(−(u−c)²/(2σ²)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Widths {
    pub sigma_s: f64,
    pub sigma_xy: f64,
}

impl Widths {
    /// Narrow profile for nested products and brackets.
    pub const ALGEBRA: Widths = Widths { sigma_s: 0.7, sigma_xy: 0.5 };
    /// Wider profile whose symbols fit the default wave grid.
    pub const REPRESENTATION: Widths = Widths { sigma_s: 1.0, sigma_xy: 0.9 };
}

/// Seeded generator of random catalog signals.
pub struct CatalogRng {
    rng: ChaCha8Rng,
}

impl CatalogRng {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn jitter(&mut self, base: f64) -> f64 {
        base * self.rng.gen_range(0.85..1.15)
    }

    /// Real Gaussian×polynomial signal with x/y asymmetry so that products
    /// do not commute. With `even_s` the s-profiles are centred and even.
    pub fn signal(&mut self, name: &str, w: Widths, even_s: bool) -> TestSignal {
        let nterms = self.rng.gen_range(1..=2);
        let mut terms = Vec::with_capacity(nterms);
        for _ in 0..nterms {
            let amp = Complex64::new(self.rng.gen_range(0.5..1.5) * if self.rng.gen_bool(0.3) { -1.0 } else { 1.0 }, 0.0);
            let s = if even_s {
                GaussPoly::with_poly(0.0, self.jitter(w.sigma_s), &[1.0, 0.0, self.rng.gen_range(-0.3..0.3)])
            } else {
                GaussPoly::with_poly(
                    self.rng.gen_range(-0.3..0.3) * w.sigma_s,
                    self.jitter(w.sigma_s),
                    &[1.0, self.rng.gen_range(-0.5..0.5)],
                )
            };
            let sx = self.jitter(w.sigma_xy);
            let sy = self.jitter(w.sigma_xy);
            let x = GaussPoly::with_poly(self.rng.gen_range(-0.4..0.4) * sx, sx, &[1.0, self.rng.gen_range(-0.8..0.8) / sx]);
            let y = GaussPoly::with_poly(self.rng.gen_range(-0.4..0.4) * sy, sy, &[1.0, self.rng.gen_range(-0.8..0.8) / sy]);
            terms.push(SeparableTerm { amp, s, x, y });
        }
        TestSignal { name: name.to_string(), terms }
    }

    /// Signal whose s-profile has zero mean (derivative of a Gaussian).
    pub fn l1v_signal(&mut self, name: &str, w: Widths) -> TestSignal {
        let mut sig = self.signal(name, w, false);
        for t in &mut sig.terms {
            let sigma = t.s.sigma;
            t.s = GaussPoly::gaussian(t.s.center, sigma).derivative().scaled(Complex64::new(-sigma, 0.0));
        }
        sig
    }

    pub fn pairs(&mut self, count: usize, w: Widths, even_s: bool) -> Vec<(TestSignal, TestSignal)> {
        (0..count)
            .map(|i| (self.signal(&format!("a{i}"), w, even_s), self.signal(&format!("b{i}"), w, even_s)))
            .collect()
    }
}

/// Named signals used by the CLI and documentation.
pub fn named(name: &str, w: Widths) -> Option<TestSignal> {
    let (ss, sx) = (w.sigma_s, w.sigma_xy);
    let g = GaussPoly::gaussian;
    let sig = match name {
        "gauss" => TestSignal::separable(name, 1.0, g(0.0, ss), g(0.0, sx), g(0.0, sx)),
        "s-gauss" => TestSignal::separable(name, 1.0, GaussPoly::with_poly(0.0, ss, &[0.0, 1.0]), g(0.0, sx), g(0.0, sx)),
        "asym" => TestSignal::separable(name, 1.0, g(0.2, ss), GaussPoly::with_poly(0.3, sx, &[1.0, 0.5]), g(-0.2, 0.8 * sx)),
        "hermite" => TestSignal::separable(
            name,
            1.0,
            GaussPoly::with_poly(0.0, ss, &[-1.0, 0.0, 1.0 / (ss * ss)]),
            g(0.0, sx),
            GaussPoly::with_poly(0.0, sx, &[0.0, 1.0]),
        ),
        "identity" => identity_like(0.05),
        "q-gen" => q_generator(0.3, 1.0),
        "p-gen" => p_generator(0.3, 1.0),
        _ => return None,
    };
    Some(sig)
}

pub const NAMED: [&str; 7] = ["gauss", "s-gauss", "asym", "hermite", "identity", "q-gen", "p-gen"];

/// Unit-mass Gaussian of width ε in every variable, approximating δ(g).
pub fn identity_like(eps: f64) -> TestSignal {
    let norm = 1.0 / ((2.0 * PI).powf(1.5) * eps.powi(3));
    TestSignal::separable("identity", norm, GaussPoly::gaussian(0.0, eps), GaussPoly::gaussian(0.0, eps), GaussPoly::gaussian(0.0, eps))
}

/// Smeared x-generator: classical symbol q·exp(−ε²(q²+p²)/2)·φ̂(ħ).
pub fn q_generator(eps: f64, sigma_s: f64) -> TestSignal {
    let unit = 1.0 / ((2.0 * PI).sqrt() * eps);
    let s = GaussPoly::gaussian(0.0, sigma_s);
    let s_norm = 1.0 / ((2.0 * PI).sqrt() * sigma_s);
    // i·δ_ε'(x) = −i x/ε² δ_ε(x)
    let x = GaussPoly { center: 0.0, sigma: eps, coeffs: vec![Complex64::default(), Complex64::new(0.0, -unit / (eps * eps))] };
    let y = GaussPoly::with_poly(0.0, eps, &[unit]);
    TestSignal { name: "q-gen".into(), terms: vec![SeparableTerm { amp: Complex64::new(s_norm, 0.0), s, x, y }] }
}

/// Smeared y-generator: classical symbol p·exp(−ε²(q²+p²)/2)·φ̂(ħ).
pub fn p_generator(eps: f64, sigma_s: f64) -> TestSignal {
    let q = q_generator(eps, sigma_s);
    let t = &q.terms[0];
    TestSignal {
        name: "p-gen".into(),
        terms: vec![SeparableTerm { amp: t.amp, s: t.s.clone(), x: t.y.clone(), y: t.x.clone() }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_ft(f: &GaussPoly, q: f64) -> Complex64 {
        let h = 1e-3;
        let mut acc = Complex64::default();
        let mut u = f.center - 20.0 * f.sigma;
        while u < f.center + 20.0 * f.sigma {
            acc += f.eval(u) * Complex64::from_polar(1.0, q * u) * h;
            u += h;
        }
        acc
    }

    #[test]
    fn closed_form_transform_matches_quadrature() {
        let f = GaussPoly { center: 0.4, sigma: 0.7, coeffs: vec![Complex64::new(1.0, 0.2), Complex64::new(-0.5, 0.0), Complex64::new(0.3, 0.1)] };
        for q in [-2.0, -0.3, 0.0, 1.1, 3.0] {
            let (v, d) = f.ft(q);
            assert!((v - numeric_ft(&f, q)).norm() < 1e-10);
            let fd = (f.ft(q + 1e-5).0 - f.ft(q - 1e-5).0) / 2e-5;
            assert!((d - fd).norm() < 1e-7);
        }
    }

    #[test]
    fn derivative_profile() {
        let f = GaussPoly::with_poly(0.2, 0.9, &[1.0, 0.5]);
        let d = f.derivative();
        for u in [-1.0, 0.0, 0.7] {
            let fd = (f.eval(u + 1e-6) - f.eval(u - 1e-6)) / 2e-6;
            assert!((d.eval(u) - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn l1v_flag() {
        let mut rng = CatalogRng::new(3);
        let k = rng.l1v_signal("k", Widths::ALGEBRA);
        assert!(k.s_mean_zero());
        assert!(!named("gauss", Widths::ALGEBRA).unwrap().s_mean_zero());
        assert!(named("s-gauss", Widths::ALGEBRA).unwrap().s_mean_zero());
        assert!(named("hermite", Widths::ALGEBRA).unwrap().s_mean_zero());
    }

    #[test]
    fn generators_have_linear_symbols() {
        let q = q_generator(0.3, 1.0);
        let p = p_generator(0.3, 1.0);
        let v = q.transform(0.0, 0.01, 0.0);
        assert!((v - Complex64::new(0.01, 0.0)).norm() < 1e-5);
        assert!((p.transform(0.0, 0.0, 0.02) - Complex64::new(0.02, 0.0)).norm() < 1e-5);
        assert!((q.poisson(&p, 0.0, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
