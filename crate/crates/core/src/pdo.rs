//! Normal-ordered differential operators Σ c·x^i y^j ∂_s^a ∂_x^b ∂_y^c with
//! real coefficients, used to act with δ-derivative Hamiltonians without
//! sampling distributions on a grid.

use crate::error::{PmechError, Result};
use crate::grid::{spectral_derivative, Axis, GridSpec, PFunction};
use crate::heisenberg::{FieldAxis, InvariantField};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Exponents [i, j, a, b, c] of x^i y^j ∂_s^a ∂_x^b ∂_y^c.
pub type Monomial = [u32; 5];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pdo {
    terms: BTreeMap<Monomial, f64>,
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn binom(n: u32, k: u32) -> f64 {
    falling(n, k) / falling(k, k)
}

impl Pdo {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::monomial([0; 5], 1.0)
    }

    pub fn monomial(m: Monomial, c: f64) -> Self {
        let mut p = Self::zero();
        p.push(m, c);
        p
    }

    fn push(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(m).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&m);
        }
    }

    /// An invariant vector field, e.g. ∂_x − (y/2)∂_s for the left X field.
    pub fn field(f: InvariantField) -> Self {
        let (direct, central) = f.decompose();
        let mut p = Self::zero();
        match direct {
            Some(Axis::X) => p.push([0, 0, 0, 1, 0], 1.0),
            Some(Axis::Y) => p.push([0, 0, 0, 0, 1], 1.0),
            _ => {}
        }
        p.push([0, 0, 1, 0, 0], central[0]);
        p.push([1, 0, 1, 0, 0], central[1]);
        p.push([0, 1, 1, 0, 0], central[2]);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Pdo) -> Pdo {
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.push(m, c);
        }
        out
    }

    pub fn sub(&self, other: &Pdo) -> Pdo {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Pdo {
        let mut out = Pdo::zero();
        for (&m, &v) in &self.terms {
            out.push(m, v * c);
        }
        out
    }

    /// self ∘ other, brought back to normal order by the Leibniz rule.
    pub fn compose(&self, other: &Pdo) -> Pdo {
        let mut out = Pdo::zero();
        for (&[i, j, a, b, c], &cl) in &self.terms {
            for (&[i2, j2, a2, b2, c2], &cr) in &other.terms {
                for k in 0..=b.min(i2) {
                    for l in 0..=c.min(j2) {
                        let w = binom(b, k) * falling(i2, k) * binom(c, l) * falling(j2, l);
                        out.push([i + i2 - k, j + j2 - l, a + a2, b - k + b2, c - l + c2], cl * cr * w);
                    }
                }
            }
        }
        out
    }

    /// Removes one ∂_s from every term; on functions decaying in s this is
    /// left composition with the antiderivative.
    pub fn divide_ds(&self) -> Result<Pdo> {
        let mut out = Pdo::zero();
        for (&[i, j, a, b, c], &v) in &self.terms {
            if a == 0 {
                return Err(PmechError::InvalidParameter(format!(
                    "term x^{i} y^{j} d_x^{b} d_y^{c} has no s-derivative to cancel"
                )));
            }
            out.push([i, j, a - 1, b, c], v);
        }
        Ok(out)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m[2] + m[3] + m[4]).max().unwrap_or(0)
    }

    /// Upper bound of the first-order x/y transport speed over the grid.
    pub fn advection_speed(&self, spec: &GridSpec) -> f64 {
        let (lx, ly) = (spec.lx, spec.ly);
        let (mut vx, mut vy) = (0.0, 0.0);
        for (&[i, j, a, b, c], &v) in &self.terms {
            if a == 0 && b + c == 1 {
                let bound = v.abs() * lx.powi(i as i32) * ly.powi(j as i32);
                if b == 1 {
                    vx += bound;
                } else {
                    vy += bound;
                }
            }
        }
        f64::hypot(vx, vy)
    }

    /// Spectral application on the periodic grid.
    pub fn apply(&self, f: &PFunction) -> Result<PFunction> {
        f.nyquist_check()?;
        self.apply_unchecked(f)
    }

    pub(crate) fn apply_unchecked(&self, f: &PFunction) -> Result<PFunction> {
        PFunction::new(f.spec, self.apply_values(&f.spec, f.values()))
    }

    pub(crate) fn apply_values(&self, spec: &GridSpec, values: &[Complex64]) -> Vec<Complex64> {
        let (xs, ys) = (spec.nodes(Axis::X), spec.nodes(Axis::Y));
        let plane = spec.nx * spec.ny;
        let mut derivs: BTreeMap<[u32; 3], Vec<Complex64>> = BTreeMap::new();
        let mut out = vec![Complex64::default(); spec.len()];
        let mut weight = vec![0.0; plane];
        for (&[i, j, a, b, c], &v) in &self.terms {
            let d = derivs.entry([a, b, c]).or_insert_with(|| {
                let mut cur: Option<Vec<Complex64>> = None;
                for (axis, order) in [(Axis::S, a), (Axis::X, b), (Axis::Y, c)] {
                    if order > 0 {
                        cur = Some(spectral_derivative(spec, cur.as_deref().unwrap_or(values), axis, order));
                    }
                }
                cur.unwrap_or_else(|| values.to_vec())
            });
            for (ix, &x) in xs.iter().enumerate() {
                let wx = v * x.powi(i as i32);
                for (iy, &y) in ys.iter().enumerate() {
                    weight[ix * spec.ny + iy] = wx * y.powi(j as i32);
                }
            }
            for (o, dv) in out.chunks_exact_mut(plane).zip(d.chunks_exact(plane)) {
                for ((o, dv), w) in o.iter_mut().zip(dv).zip(&weight) {
                    *o += dv * w;
                }
            }
        }
        out
    }
}

impl From<FieldAxis> for Pdo {
    /// The plain coordinate derivative along an axis.
    fn from(axis: FieldAxis) -> Self {
        match axis {
            FieldAxis::X(_) => Pdo::monomial([0, 0, 0, 1, 0], 1.0),
            FieldAxis::Y(_) => Pdo::monomial([0, 0, 0, 0, 1], 1.0),
            FieldAxis::S => Pdo::monomial([0, 0, 1, 0, 0], 1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::Side;

    fn f(side: Side, axis: FieldAxis) -> Pdo {
        Pdo::field(InvariantField::new(side, axis))
    }

    #[test]
    fn field_commutators() {
        for (side, sign) in [(Side::Left, 1.0), (Side::Right, -1.0)] {
            let x = f(side, FieldAxis::X(1));
            let y = f(side, FieldAxis::Y(1));
            let comm = x.compose(&y).sub(&y.compose(&x));
            assert_eq!(comm, Pdo::monomial([0, 0, 1, 0, 0], sign));
        }
    }

    #[test]
    fn left_and_right_fields_commute() {
        let axes = [FieldAxis::X(1), FieldAxis::Y(1), FieldAxis::S];
        for a in axes {
            for b in axes {
                let l = f(Side::Left, a);
                let r = f(Side::Right, b);
                assert!(l.compose(&r).sub(&r.compose(&l)).is_zero());
            }
        }
    }

    #[test]
    fn leibniz_reordering() {
        // ∂_x ∘ x = x ∂_x + 1
        let dx = Pdo::monomial([0, 0, 0, 1, 0], 1.0);
        let x = Pdo::monomial([1, 0, 0, 0, 0], 1.0);
        assert_eq!(dx.compose(&x), Pdo::monomial([1, 0, 0, 1, 0], 1.0).add(&Pdo::identity()));
        // ∂_y² ∘ y² = y²∂_y² + 4y∂_y + 2
        let dy2 = Pdo::monomial([0, 0, 0, 0, 2], 1.0);
        let y2 = Pdo::monomial([0, 2, 0, 0, 0], 1.0);
        let expect = Pdo::monomial([0, 2, 0, 0, 2], 1.0)
            .add(&Pdo::monomial([0, 1, 0, 0, 1], 4.0))
            .add(&Pdo::monomial([0, 0, 0, 0, 0], 2.0));
        assert_eq!(dy2.compose(&y2), expect);
    }

    #[test]
    fn divide_ds_requires_central_factor() {
        assert!(Pdo::monomial([0, 0, 0, 1, 0], 1.0).divide_ds().is_err());
        let p = Pdo::monomial([1, 0, 2, 0, 1], 3.0).divide_ds().unwrap();
        assert_eq!(p, Pdo::monomial([1, 0, 1, 0, 1], 3.0));
    }
}
