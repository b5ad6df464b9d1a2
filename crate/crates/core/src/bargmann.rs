//! Truncated Segal–Bargmann–Fock picture in the orthonormal monomial basis
//! e_m = z^m/√(m!), where a⁺ = z· and a⁻ = ∂/∂z act as √(m+1) and √m shifts.

use crate::error::{PmechError, Result};
use crate::heisenberg::GroupPoint;
use crate::schrodinger::CMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_DIM: usize = 64;
pub const LEAKAGE_LIMIT: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockVec {
    pub coeffs: Vec<Complex64>,
}

impl FockVec {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(PmechError::InvalidParameter("empty Fock vector".into()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(PmechError::NonFinite);
        }
        Ok(Self { coeffs })
    }

    pub fn basis(dim: usize, m: usize) -> Self {
        let mut coeffs = vec![Complex64::default(); dim];
        coeffs[m] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockOp {
    /// Row-major entries.
    pub rows: Vec<Vec<Complex64>>,
}

impl FockOp {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self { rows: (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect() }
    }

    pub fn matrix(&self) -> CMatrix {
        let n = self.rows.len();
        CMatrix::from_fn(n, n, |i, j| self.rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, f: &FockVec) -> Result<FockVec> {
        if f.dim() != self.dim() {
            return Err(PmechError::DimensionMismatch(format!("operator {} vs vector {}", self.dim(), f.dim())));
        }
        let coeffs = self.rows.iter().map(|r| r.iter().zip(&f.coeffs).map(|(a, b)| a * b).sum()).collect();
        Ok(FockVec { coeffs })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub fn creation(dim: usize) -> FockOp {
    FockOp::from_matrix(&CMatrix::from_fn(dim, dim, |i, j| {
        if i == j + 1 {
            Complex64::new((i as f64).sqrt(), 0.0)
        } else {
            Complex64::default()
        }
    }))
}

pub fn annihilation(dim: usize) -> FockOp {
    FockOp::from_matrix(&CMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::default()
        }
    }))
}

/// Generator of the dynamical group below: diag(n/2 + m) on e_m.
pub fn euler_operator(dim: usize, n: u32) -> Result<FockOp> {
    if dim < 2 {
        return Err(PmechError::InvalidParameter(format!("dimension {dim} < 2")));
    }
    Ok(FockOp::from_matrix(&CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(0.5 * n as f64 + i as f64, 0.0)
        } else {
            Complex64::default()
        }
    })))
}

/// e^{itT}f(z) = e^{int/2} f(e^{it}z): coefficient m gains e^{it(n/2 + m)}.
pub fn dynamical_group(f: &FockVec, t: f64, n: u32) -> FockVec {
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| c * Complex64::from_polar(1.0, t * (0.5 * n as f64 + m as f64)))
        .collect();
    FockVec { coeffs }
}

/// β_ħ(s, x, y) with z = x + iy, acting as
/// f(w) ↦ exp(−2isħ + i√ħzw − ħ|z|²/2) f(w + i√ħz̄),
/// i.e. a central phase times the displacement D(α), α = i√ħz, applied as
/// e^{−|α|²/2} e^{αa⁺} e^{−ᾱa⁻}. The part of the image beyond the cut is
/// measured in an extended buffer and must stay below 1e-6 of the norm.
pub fn beta_action(g: &GroupPoint, hbar: f64, f: &FockVec) -> Result<FockVec> {
    if g.n() != 1 {
        return Err(PmechError::DimensionMismatch("only n = 1 is supported".into()));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(PmechError::InvalidParameter(format!("hbar = {hbar} must be positive")));
    }
    let d = f.dim();
    let ext = 2 * d + 32;
    let z = Complex64::new(g.x[0], g.y[0]);
    let alpha = Complex64::new(0.0, hbar.sqrt()) * z;
    // ln √(m!) prefix sums
    let half_log_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..ext).scan(0.0, |acc, m| {
            *acc += 0.5 * (m as f64).ln();
            Some(*acc)
        }))
        .collect();

    // e^{c a⁻} e_k = Σ_{j≤k} c^{k−j}/(k−j)! √(k!/j!) e_j, exact inside the cut
    let c = -alpha.conj();
    let mut lowered = vec![Complex64::default(); d];
    for (k, &fk) in f.coeffs.iter().enumerate() {
        if fk == Complex64::default() {
            continue;
        }
        for (j, out) in lowered.iter_mut().enumerate().take(k + 1) {
            *out += fk * coeff(c, k - j, half_log_fact[k] - half_log_fact[j]);
        }
    }
    // e^{α a⁺} e_k = Σ_{j≥k} α^{j−k}/(j−k)! √(j!/k!) e_j
    let mut raised = vec![Complex64::default(); ext];
    for (k, &lk) in lowered.iter().enumerate() {
        if lk == Complex64::default() {
            continue;
        }
        for (j, out) in raised.iter_mut().enumerate().skip(k) {
            *out += lk * coeff(alpha, j - k, half_log_fact[j] - half_log_fact[k]);
        }
    }
    let scale = Complex64::from_polar((-0.5 * alpha.norm_sqr()).exp(), -2.0 * g.s * hbar);
    raised.iter_mut().for_each(|v| *v *= scale);
    let leak = raised[d..].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let norm = f.norm();
    if leak > LEAKAGE_LIMIT * norm.max(f64::MIN_POSITIVE) {
        return Err(PmechError::TruncationLeakage { leak: leak / norm, dim: d });
    }
    raised.truncate(d);
    FockVec::new(raised)
}

/// c^p / p! · e^{log_ratio}, evaluated in log space.
fn coeff(c: Complex64, p: usize, log_ratio: f64) -> Complex64 {
    if p == 0 {
        return Complex64::new(log_ratio.exp(), 0.0);
    }
    if c == Complex64::default() {
        return Complex64::default();
    }
    let log_fact: f64 = (1..=p).map(|i| (i as f64).ln()).sum();
    Complex64::from_polar((p as f64 * c.norm().ln() - log_fact + log_ratio).exp(), p as f64 * c.arg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::multiply;

    fn vec_close(a: &FockVec, b: &FockVec) -> f64 {
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn euler_small_case() {
        let e = euler_operator(4, 1).unwrap().matrix();
        let diag: Vec<f64> = (0..4).map(|i| e[(i, i)].re).collect();
        assert_eq!(diag, vec![0.5, 1.5, 2.5, 3.5]);
        assert!(euler_operator(1, 1).is_err());
    }

    #[test]
    fn ladder_commutator() {
        let d = 16;
        let (a, ad) = (annihilation(d).matrix(), creation(d).matrix());
        let comm = &a * &ad - &ad * &a;
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((comm[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn dynamical_group_is_diagonal_exponential() {
        let d = 12;
        let f = FockVec::new((0..d).map(|m| Complex64::new(1.0 / (m as f64 + 1.0), 0.3)).collect()).unwrap();
        let t = 0.83;
        let e = euler_operator(d, 1).unwrap().matrix();
        let u = FockOp::from_matrix(&(e * Complex64::new(0.0, t)).exp());
        let a = u.apply(&f).unwrap();
        let err = vec_close(&a, &dynamical_group(&f, t, 1));
        assert!(err < 1e-12, "{err:e}");
    }

    #[test]
    fn central_elements_and_identity() {
        let f = FockVec::new((0..32).map(|m| Complex64::new((-(m as f64)).exp(), 0.0)).collect()).unwrap();
        let e = beta_action(&GroupPoint::h1(0.0, 0.0, 0.0), 0.7, &f).unwrap();
        assert!(vec_close(&e, &f) < 1e-15);
        let s = 0.4;
        let c = beta_action(&GroupPoint::h1(s, 0.0, 0.0), 0.7, &f).unwrap();
        let expect = FockVec { coeffs: f.coeffs.iter().map(|v| v * Complex64::from_polar(1.0, -2.0 * s * 0.7)).collect() };
        assert!(vec_close(&c, &expect) < 1e-15);
    }

    #[test]
    fn beta_is_a_homomorphism() {
        let f = FockVec::basis(32, 0);
        let hbar = 0.5;
        let g = GroupPoint::h1(0.2, 0.3, -0.1);
        let h = GroupPoint::h1(-0.4, 0.15, 0.25);
        let gh = multiply(&g, &h).unwrap();
        let lhs = beta_action(&g, hbar, &beta_action(&h, hbar, &f).unwrap()).unwrap();
        let rhs = beta_action(&gh, hbar, &f).unwrap();
        assert!(vec_close(&lhs, &rhs) < 1e-6);
        assert!((lhs.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_displacement_is_refused() {
        let f = FockVec::basis(8, 3);
        let r = beta_action(&GroupPoint::h1(0.0, 3.0, 2.0), 1.0, &f);
        assert!(matches!(r, Err(PmechError::TruncationLeakage { .. })));
    }

    #[test]
    fn json_round_trip() {
        let f = FockVec::basis(4, 2);
        let back: FockVec = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
