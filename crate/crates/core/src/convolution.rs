//! Group convolution (k1∗k2)(g) = ∫ k1(h) k2(h⁻¹g) dh on H^1.
//!
//! Both routes zero-pad s to twice its length and treat x, y as zero outside
//! the grid, so they compute the same discrete product.

use crate::error::{PmechError, Result};
use crate::grid::{plan, Axis, GridSpec, PFunction, Shifter};
use crate::heisenberg::left_quotient_h1;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Largest grid the full direct oracle accepts.
pub const ORACLE_MAX_POINTS: usize = 16 * 16 * 16;

fn check_pair(k1: &PFunction, k2: &PFunction) -> Result<GridSpec> {
    if k1.spec != k2.spec {
        return Err(PmechError::GridMismatch);
    }
    k1.ensure_admitted()?;
    k2.ensure_admitted()?;
    Ok(k1.spec)
}

/// Zero-padded s-columns, column-major by (x, y): column j occupies
/// `[j * 2N_s, (j + 1) * 2N_s)`.
fn padded_columns(k: &PFunction) -> Vec<Complex64> {
    let spec = k.spec;
    let np = 2 * spec.ns;
    let cols = spec.nx * spec.ny;
    let mut out = vec![Complex64::default(); cols * np];
    for is in 0..spec.ns {
        for j in 0..cols {
            out[j * np + is] = k.values()[is * cols + j];
        }
    }
    out
}

/// Direct quadrature of the group convolution over the full grid.
pub fn convolve_direct(k1: &PFunction, k2: &PFunction) -> Result<PFunction> {
    let spec = check_pair(k1, k2)?;
    if spec.len() > ORACLE_MAX_POINTS {
        return Err(PmechError::OracleTooLarge { points: spec.len() });
    }
    let points: Vec<(usize, usize, usize)> = (0..spec.ns)
        .flat_map(|is| (0..spec.nx).flat_map(move |ix| (0..spec.ny).map(move |iy| (is, ix, iy))))
        .collect();
    let vals = direct_at(k1, k2, &points);
    Ok(PFunction::from_values(spec, vals))
}

/// Direct oracle evaluated only at the given output points.
pub fn convolve_direct_at(
    k1: &PFunction,
    k2: &PFunction,
    points: &[(usize, usize, usize)],
) -> Result<Vec<Complex64>> {
    let spec = check_pair(k1, k2)?;
    if points.iter().any(|&(a, b, c)| a >= spec.ns || b >= spec.nx || c >= spec.ny) {
        return Err(PmechError::InvalidParameter("output point outside grid".into()));
    }
    Ok(direct_at(k1, k2, points))
}

/// Reproducible random sample of output points for subset mode.
pub fn sample_points(spec: &GridSpec, count: usize, seed: u64) -> Vec<(usize, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, spec.len(), count.min(spec.len())).into_vec();
    idx.sort_unstable();
    idx.into_iter()
        .map(|j| (j / (spec.nx * spec.ny), (j / spec.ny) % spec.nx, j % spec.ny))
        .collect()
}

fn direct_at(k1: &PFunction, k2: &PFunction, points: &[(usize, usize, usize)]) -> Vec<Complex64> {
    let spec = k1.spec;
    let (ns, nx, ny) = (spec.ns, spec.nx, spec.ny);
    let np = 2 * ns;
    let hs = spec.step(Axis::S);
    let (xs, ys) = (spec.nodes(Axis::X), spec.nodes(Axis::Y));
    let cols2 = padded_columns(k2);
    let mut shifter = Shifter::new(np, hs);
    let mut column = vec![Complex64::default(); np];
    let weight = spec.cell_volume();

    // group points by their (x, y) position so each shifted column is reused
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&p| (points[p].1, points[p].2));
    let mut out = vec![Complex64::default(); points.len()];
    let mut start = 0;
    while start < order.len() {
        let (_, ix, iy) = points[order[start]];
        let mut end = start;
        while end < order.len() && (points[order[end]].1, points[order[end]].2) == (ix, iy) {
            end += 1;
        }
        let group = &order[start..end];
        for ixp in 0..nx {
            let bx = ix as i64 - ixp as i64 + (nx / 2) as i64;
            if bx < 0 || bx >= nx as i64 {
                continue;
            }
            for iyp in 0..ny {
                let by = iy as i64 - iyp as i64 + (ny / 2) as i64;
                if by < 0 || by >= ny as i64 {
                    continue;
                }
                // s-coordinate of h⁻¹g minus (s − s′): the symplectic twist
                let tau = left_quotient_h1((0.0, xs[ixp], ys[iyp]), (0.0, xs[ix], ys[iy])).0;
                let c = bx as usize * ny + by as usize;
                column.copy_from_slice(&cols2[c * np..(c + 1) * np]);
                shifter.shift_in_place(&mut column, tau);
                for &p in group {
                    let is = points[p].0;
                    let mut acc = Complex64::default();
                    for jsp in 0..ns {
                        let a = k1.at(jsp, ixp, iyp);
                        if a == Complex64::default() {
                            continue;
                        }
                        let m = (is + ns / 2 + np - jsp) % np;
                        acc += a * column[m];
                    }
                    out[p] += acc * weight;
                }
            }
        }
        start = end;
    }
    out
}

/// Fast route: transform along the padded s axis, twisted 2-D convolution
/// per ħ-slice, inverse transform.
pub fn convolve_fast(k1: &PFunction, k2: &PFunction) -> Result<PFunction> {
    let spec = check_pair(k1, k2)?;
    Ok(convolve_unchecked(k1, k2, spec))
}

pub(crate) fn convolve_unchecked(k1: &PFunction, k2: &PFunction, spec: GridSpec) -> PFunction {
    let (ns, nx, ny) = (spec.ns, spec.nx, spec.ny);
    let np = 2 * ns;
    let cols = nx * ny;
    let hs = spec.step(Axis::S);
    let real = k1.is_real() && k2.is_real();

    let spectra = |k: &PFunction| -> Vec<Complex64> {
        let mut c = padded_columns(k);
        let fft = plan(np, false);
        fft.process(&mut c);
        c
    };
    let a = spectra(k1);
    let b = spectra(k2);

    let mut plan_ctx = Twister::new(&spec);
    let mut result = vec![Complex64::default(); cols * np];
    let mut sa = vec![Complex64::default(); cols];
    let mut sb = vec![Complex64::default(); cols];
    let last = if real { np / 2 } else { np - 1 };
    let weight = spec.cell_volume();
    for m in 0..=last {
        for j in 0..cols {
            sa[j] = a[j * np + m];
            sb[j] = b[j * np + m];
        }
        if sa.iter().all(|v| *v == Complex64::default()) || sb.iter().all(|v| *v == Complex64::default()) {
            continue;
        }
        let signed = if m < np / 2 { m as i64 } else { m as i64 - np as i64 };
        let hbar = 2.0 * PI * signed as f64 / (np as f64 * hs);
        let slice = if m == np / 2 {
            // Nyquist: average the two orientations, matching the cosine
            // convention of the spectral shift in the direct route
            let plus = plan_ctx.twisted(&sa, &sb, hbar);
            let minus = plan_ctx.twisted(&sa, &sb, -hbar);
            let (cp, cm) = (Complex64::from_polar(1.0, hbar * spec.ls), Complex64::from_polar(1.0, -hbar * spec.ls));
            plus.iter().zip(&minus).map(|(p, q)| 0.5 * (p * cp + q * cm)).collect::<Vec<_>>()
        } else {
            let c = Complex64::from_polar(1.0, hbar * spec.ls);
            plan_ctx.twisted(&sa, &sb, hbar).into_iter().map(|v| v * c).collect()
        };
        for j in 0..cols {
            result[j * np + m] = slice[j] * weight;
            if real && m > 0 && m < np / 2 {
                result[j * np + np - m] = (slice[j] * weight).conj();
            }
        }
    }

    let ifft = plan(np, true);
    ifft.process(&mut result);
    let inv = 1.0 / np as f64;
    let mut out = vec![Complex64::default(); spec.len()];
    for is in 0..ns {
        for j in 0..cols {
            let v = result[j * np + is] * inv;
            out[is * cols + j] = if real { Complex64::new(v.re, 0.0) } else { v };
        }
    }
    PFunction::from_values(spec, out)
}

/// Scratch space and coordinate tables for the per-slice twisted sum.
struct Twister {
    nx: usize,
    ny: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    t_re: Vec<f64>,
    t_im: Vec<f64>,
    brev_re: Vec<f64>,
    brev_im: Vec<f64>,
    acc_re: Vec<f64>,
    acc_im: Vec<f64>,
}

impl Twister {
    fn new(spec: &GridSpec) -> Self {
        let (nx, ny) = (spec.nx, spec.ny);
        Self {
            nx,
            ny,
            xs: spec.nodes(Axis::X),
            ys: spec.nodes(Axis::Y),
            t_re: vec![0.0; ny],
            t_im: vec![0.0; ny],
            brev_re: vec![0.0; nx * ny],
            brev_im: vec![0.0; nx * ny],
            acc_re: vec![0.0; ny],
            acc_im: vec![0.0; ny],
        }
    }

    /// Σ_{x′,y′} a(x′,y′) b(x−x′, y−y′) e^{iħ(xy′ − x′y)/2}.
    fn twisted(&mut self, a: &[Complex64], b: &[Complex64], hbar: f64) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        let (hx, hy) = (nx / 2, ny / 2);
        for r in 0..nx {
            for k in 0..ny {
                let v = b[r * ny + (ny - 1 - k)];
                self.brev_re[r * ny + k] = v.re;
                self.brev_im[r * ny + k] = v.im;
            }
        }
        let mut out = vec![Complex64::default(); nx * ny];
        let nonzero_rows: Vec<bool> = (0..nx).map(|r| a[r * ny..(r + 1) * ny].iter().any(|v| *v != Complex64::default())).collect();
        for i in 0..nx {
            let xi = self.xs[i];
            let p_row: Vec<Complex64> = self.ys.iter().map(|&y| Complex64::from_polar(1.0, 0.5 * hbar * xi * y)).collect();
            let ip_lo = (i + hx + 1).saturating_sub(nx);
            let ip_hi = (i + hx).min(nx - 1);
            for ip in ip_lo..=ip_hi {
                if !nonzero_rows[ip] {
                    continue;
                }
                let bx = i + hx - ip;
                for jp in 0..ny {
                    let v = a[ip * ny + jp] * p_row[jp];
                    self.t_re[jp] = v.re;
                    self.t_im[jp] = v.im;
                }
                let br = &self.brev_re[bx * ny..(bx + 1) * ny];
                let bi = &self.brev_im[bx * ny..(bx + 1) * ny];
                for j in 0..ny {
                    // b index j + ny/2 − j′ maps to reversed index j′ + ny/2 − 1 − j
                    let lo = (j + 1).saturating_sub(hy);
                    let hi = (j + hy).min(ny - 1);
                    let off = lo + hy - 1 - j;
                    let len = hi + 1 - lo;
                    let (tr, ti) = (&self.t_re[lo..lo + len], &self.t_im[lo..lo + len]);
                    let (rr, ri) = (&br[off..off + len], &bi[off..off + len]);
                    let (mut sr, mut si) = (0.0, 0.0);
                    for q in 0..len {
                        sr += tr[q] * rr[q] - ti[q] * ri[q];
                        si += tr[q] * ri[q] + ti[q] * rr[q];
                    }
                    self.acc_re[j] = sr;
                    self.acc_im[j] = si;
                }
                let xip = self.xs[ip];
                for j in 0..ny {
                    let qf = Complex64::from_polar(1.0, -0.5 * hbar * xip * self.ys[j]);
                    out[i * ny + j] += Complex64::new(self.acc_re[j], self.acc_im[j]) * qf;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{CatalogRng, Widths};

    fn small() -> GridSpec {
        GridSpec::new(5.0, 3.5, 3.5, 16, 16, 16).unwrap()
    }

    #[test]
    fn fast_matches_direct_on_random_pairs() {
        let spec = small();
        let mut rng = CatalogRng::new(11);
        for (a, b) in rng.pairs(3, Widths { sigma_s: 0.8, sigma_xy: 0.55 }, false) {
            let (ka, kb) = (a.sample(spec).unwrap(), b.sample(spec).unwrap());
            let fast = convolve_fast(&ka, &kb).unwrap();
            let direct = convolve_direct(&ka, &kb).unwrap();
            assert!(fast.rel_l2(&direct) < 1e-10, "{}", fast.rel_l2(&direct));
        }
    }

    #[test]
    fn complex_inputs_use_all_slices() {
        let spec = small();
        let mut rng = CatalogRng::new(5);
        let (a, b) = rng.pairs(1, Widths { sigma_s: 0.8, sigma_xy: 0.55 }, false).remove(0);
        let ka = a.sample(spec).unwrap().scale(Complex64::new(0.6, 0.8));
        let kb = b.sample(spec).unwrap();
        let fast = convolve_fast(&ka, &kb).unwrap();
        let direct = convolve_direct(&ka, &kb).unwrap();
        assert!(fast.rel_l2(&direct) < 1e-10);
    }

    #[test]
    fn oracle_refuses_large_grids() {
        let spec = GridSpec::new(5.0, 3.5, 3.5, 32, 16, 16).unwrap();
        let k = PFunction::from_fn(spec, |s, x, y| Complex64::new((-s * s - x * x - y * y).exp(), 0.0)).unwrap();
        assert!(matches!(convolve_direct(&k, &k), Err(PmechError::OracleTooLarge { .. })));
        let pts = sample_points(&spec, 5, 1);
        assert_eq!(convolve_direct_at(&k, &k, &pts).unwrap().len(), 5);
    }
}
