//! Group law of H^n and its invariant vector fields.

use crate::error::{PmechError, Result};
use crate::grid::{spectral_derivative, Axis, PFunction};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GroupPoint {
    pub fn new(s: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(PmechError::DimensionMismatch(format!(
                "x has {} entries, y has {}",
                x.len(),
                y.len()
            )));
        }
        if !s.is_finite() || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(PmechError::NonFinite);
        }
        Ok(Self { s, x, y })
    }

    /// Point of H^1.
    pub fn h1(s: f64, x: f64, y: f64) -> Self {
        Self { s, x: vec![x], y: vec![y] }
    }

    pub fn identity(n: usize) -> Self {
        Self { s: 0.0, x: vec![0.0; n], y: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Symplectic form x·y' − x'·y.
    pub fn symplectic(&self, other: &GroupPoint) -> f64 {
        self.x.iter().zip(&other.y).map(|(a, b)| a * b).sum::<f64>()
            - other.x.iter().zip(&self.y).map(|(a, b)| a * b).sum::<f64>()
    }
}

pub fn multiply(g: &GroupPoint, h: &GroupPoint) -> Result<GroupPoint> {
    if g.n() != h.n() {
        return Err(PmechError::DimensionMismatch(format!("n = {} vs n = {}", g.n(), h.n())));
    }
    Ok(GroupPoint {
        s: g.s + h.s + 0.5 * g.symplectic(h),
        x: g.x.iter().zip(&h.x).map(|(a, b)| a + b).collect(),
        y: g.y.iter().zip(&h.y).map(|(a, b)| a + b).collect(),
    })
}

pub fn inverse(g: &GroupPoint) -> GroupPoint {
    GroupPoint {
        s: -g.s,
        x: g.x.iter().map(|v| -v).collect(),
        y: g.y.iter().map(|v| -v).collect(),
    }
}

/// Central coordinate of h⁻¹·g for points of H^1, the only quantity the
/// convolution oracle needs from the group law.
#[inline]
pub fn left_quotient_h1(h: (f64, f64, f64), g: (f64, f64, f64)) -> (f64, f64, f64) {
    let (hs, hx, hy) = h;
    let (gs, gx, gy) = g;
    (gs - hs + 0.5 * (-hx * gy + gx * hy), gx - hx, gy - hy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldAxis {
    X(usize),
    Y(usize),
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantField {
    pub side: Side,
    pub axis: FieldAxis,
}

impl InvariantField {
    pub const fn new(side: Side, axis: FieldAxis) -> Self {
        Self { side, axis }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.axis {
            FieldAxis::X(j) | FieldAxis::Y(j) if j == 0 || j > n => Err(
                PmechError::DimensionMismatch(format!("field index {j} outside [1, {n}]")),
            ),
            _ => Ok(()),
        }
    }

    /// Coefficients (c_s, c_x, c_y) with the field written as
    /// c_x·∂_x + c_y·∂_y + (a + b_x·x + b_y·y)·∂_s.
    /// Returns (direct axis, coefficient of ∂_s as (const, x, y)).
    pub(crate) fn decompose(&self) -> (Option<Axis>, [f64; 3]) {
        let sgn = match self.side {
            Side::Left => 1.0,
            Side::Right => -1.0,
        };
        match self.axis {
            // left X: ∂_x − (y/2)∂_s, right X: ∂_x + (y/2)∂_s
            FieldAxis::X(_) => (Some(Axis::X), [0.0, 0.0, -0.5 * sgn]),
            // left Y: ∂_y + (x/2)∂_s, right Y: ∂_y − (x/2)∂_s
            FieldAxis::Y(_) => (Some(Axis::Y), [0.0, 0.5 * sgn, 0.0]),
            FieldAxis::S => (None, [1.0, 0.0, 0.0]),
        }
    }
}

/// Applies an invariant field by spectral differentiation.
pub fn apply_field(field: InvariantField, k: &PFunction) -> Result<PFunction> {
    field.validate(1)?;
    k.nyquist_check()?;
    let (direct, central) = field.decompose();
    let spec = k.spec;
    let ds = spectral_derivative(&spec, k.values(), Axis::S, 1);
    let mut out = match direct {
        Some(axis) => spectral_derivative(&spec, k.values(), axis, 1),
        None => vec![Default::default(); ds.len()],
    };
    let (xs, ys) = (spec.nodes(Axis::X), spec.nodes(Axis::Y));
    for is in 0..spec.ns {
        for ix in 0..spec.nx {
            for iy in 0..spec.ny {
                let c = central[0] + central[1] * xs[ix] + central[2] * ys[iy];
                let idx = spec.index(is, ix, iy);
                out[idx] += ds[idx] * c;
            }
        }
    }
    Ok(PFunction::from_values(spec, out))
}
