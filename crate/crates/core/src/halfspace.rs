//! Harmonic functions on periodic half-spaces and strips.
//!
//! A layer is an array of shape `[2L; d−1]` in wrapped storage. Mode `k` of a
//! bounded harmonic half-space function decays like `Q(λ(hk))^{−y}`; strips
//! combine the growing and decaying solutions per mode.

use std::f64::consts::PI;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{lp_norm, PNorm, StripFunction};
use crate::spectral::{
    f_real, forward_dft_real, inverse_dft, inverse_dft_real, lambda_minus_one_at, q_real,
    SpectralField,
};

pub type Layer = ArrayD<f64>;

/// Half-period of a layer, checking the shape is `[2L; d−1]`.
pub fn layer_half_period(layer: &Layer) -> Result<usize> {
    let shape = layer.shape();
    let n = shape.first().copied().unwrap_or(0);
    if n == 0 || n % 2 != 0 || shape.iter().any(|&s| s != n) {
        return Err(Error::InvalidArgument(format!(
            "layer shape {shape:?} is not [2L; d−1]"
        )));
    }
    Ok(n / 2)
}

/// `Q(λ(hk))` for every mode of a layer grid.
fn q_field(dim: usize, l: usize) -> SpectralField {
    SpectralField::from_fn(dim, l, |k| {
        Complex64::new(q_real(lambda_minus_one_at(k, l)), 0.0)
    })
}

/// Layer `n` of the bounded periodic harmonic extension of `bottom` to `y ≥ 0`.
pub fn halfspace_layer(bottom: &Layer, n: usize) -> Result<Layer> {
    if n == 0 {
        layer_half_period(bottom)?;
        return Ok(bottom.clone());
    }
    Ok(halfspace_layers(bottom, n)?.pop().expect("n ≥ 1"))
}

/// Layers `0..=n` of the half-space extension; layer 0 is the input itself.
pub fn halfspace_layers(bottom: &Layer, n: usize) -> Result<Vec<Layer>> {
    let l = layer_half_period(bottom)?;
    let fb = forward_dft_real(bottom, l)?;
    let q = q_field(bottom.ndim(), l);
    let mut out = vec![bottom.clone()];
    for m in 1..=n {
        let mut f = fb.clone();
        f.coeffs_mut()
            .zip_mut_with(q.coeffs(), |c, qv| *c *= qv.re.powi(-(m as i32)));
        out.push(inverse_dft_real(&f));
    }
    Ok(out)
}

/// Dirichlet (values) or Neumann (normal differences) data on both strip layers.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPair {
    pub bottom: Layer,
    pub top: Layer,
}

impl BoundaryPair {
    pub fn new(bottom: Layer, top: Layer) -> Result<Self> {
        layer_half_period(&bottom)?;
        if bottom.shape() != top.shape() {
            return Err(Error::ShapeMismatch {
                expected: bottom.shape().to_vec(),
                got: top.shape().to_vec(),
            });
        }
        if bottom.iter().chain(top.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite boundary value".into()));
        }
        Ok(BoundaryPair { bottom, top })
    }

    pub fn constant(dim: usize, l: usize, bottom: f64, top: f64) -> Self {
        let shape = vec![2 * l; dim];
        BoundaryPair {
            bottom: ArrayD::from_elem(IxDyn(&shape), bottom),
            top: ArrayD::from_elem(IxDyn(&shape), top),
        }
    }

    pub fn half_period(&self) -> usize {
        self.bottom.shape()[0] / 2
    }

    /// Ambient dimension d.
    pub fn d(&self) -> usize {
        self.bottom.ndim() + 1
    }
}

fn mean(layer: &Layer) -> f64 {
    layer.mean().unwrap_or(0.0)
}

fn strip_from_coeffs(d: usize, l: usize, coeffs: &[SpectralField]) -> Result<StripFunction> {
    let layers: Vec<Layer> = coeffs.iter().map(inverse_dft_real).collect();
    StripFunction::from_layers(d, l, &layers)
}

/// Harmonic `w` on `I_L^{d−1} × {0,…,N}` with `w(·,0) = bc.bottom`, `w(·,N) = bc.top`.
pub fn dirichlet_strip_solve(bc: &BoundaryPair, n: usize) -> Result<StripFunction> {
    if n < 1 {
        return Err(Error::InvalidArgument("strip height must be ≥ 1".into()));
    }
    let l = bc.half_period();
    let fb = forward_dft_real(&bc.bottom, l)?;
    let ft = forward_dft_real(&bc.top, l)?;
    let q = q_field(bc.bottom.ndim(), l);
    let nf = n as f64;
    let mut coeffs = Vec::with_capacity(n + 1);
    for y in 0..=n {
        let mut c = fb.clone();
        ndarray::Zip::from(c.coeffs_mut())
            .and(ft.coeffs())
            .and(q.coeffs())
            .for_each(|cb, &ct, qv| {
                let (phi, psi) = dirichlet_basis(qv.re, y, n, nf);
                *cb = *cb * phi + ct * psi;
            });
        coeffs.push(c);
    }
    // Boundary layers are reproduced from the data, not from the round trip.
    let mut w = strip_from_coeffs(bc.d(), l, &coeffs)?;
    w.set_layer(0, &bc.bottom)?;
    w.set_layer(n, &bc.top)?;
    Ok(w)
}

/// Mode solutions equal to 1 at the bottom (resp. top) and 0 at the other end.
fn dirichlet_basis(q: f64, y: usize, n: usize, nf: f64) -> (f64, f64) {
    if q == 1.0 {
        let t = y as f64 / nf;
        return (1.0 - t, t);
    }
    let p = |e: usize| q.powi(-(e as i32));
    let den = 1.0 - p(2 * n);
    ((p(y) - p(2 * n - y)) / den, (p(n - y) - p(n + y)) / den)
}

fn check_zero_mean(layer: &Layer, which: &str) -> Result<()> {
    let scale = layer.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let m = mean(layer);
    if m.abs() > 1e-12 * scale {
        return Err(Error::Incompatible(format!("{which} layer mean {m:e} is not zero")));
    }
    Ok(())
}

/// Harmonic `w` with `w(·,1)−w(·,0) = bc.bottom`, `w(·,N−1)−w(·,N) = bc.top`, zero mean on layer 0.
pub fn neumann_strip_solve(bc: &BoundaryPair, n: usize) -> Result<StripFunction> {
    if n < 2 {
        return Err(Error::InvalidArgument("Neumann strip height must be ≥ 2".into()));
    }
    check_zero_mean(&bc.bottom, "bottom")?;
    check_zero_mean(&bc.top, "top")?;
    let l = bc.half_period();
    let gb = forward_dft_real(&bc.bottom, l)?;
    let gt = forward_dft_real(&bc.top, l)?;
    let dim = bc.bottom.ndim();
    // Per mode: w(y) = A Q^{−y} + B Q^{−(N−y)}.
    let mut a = SpectralField::zeros(dim, l);
    let mut b = SpectralField::zeros(dim, l);
    let mut qs = SpectralField::zeros(dim, l);
    let modes = SpectralField::from_fn(dim, l, |k| {
        Complex64::new(lambda_minus_one_at(k, l), 0.0)
    });
    ndarray::Zip::from(a.coeffs_mut())
        .and(b.coeffs_mut())
        .and(qs.coeffs_mut())
        .and(modes.coeffs())
        .and(gb.coeffs())
        .and(gt.coeffs())
        .for_each(|ca, cb, cq, m, &g0, &g1| {
            let m = m.re;
            if m == 0.0 {
                *ca = Complex64::new(0.0, 0.0);
                *cb = Complex64::new(0.0, 0.0);
                *cq = Complex64::new(1.0, 0.0);
                return;
            }
            let q = q_real(m);
            let f = f_real(m);
            let s = -f * q.powi(-(n as i32 - 1));
            let det = f * f - s * s;
            *ca = (f * g0 - s * g1) / det;
            *cb = (f * g1 - s * g0) / det;
            *cq = Complex64::new(q, 0.0);
        });
    let mut coeffs = Vec::with_capacity(n + 1);
    for y in 0..=n {
        let mut c = SpectralField::zeros(dim, l);
        ndarray::Zip::from(c.coeffs_mut())
            .and(a.coeffs())
            .and(b.coeffs())
            .and(qs.coeffs())
            .for_each(|out, &ca, &cb, q| {
                let q = q.re;
                *out = ca * q.powi(-(y as i32)) + cb * q.powi(-((n - y) as i32));
            });
        coeffs.push(c);
    }
    strip_from_coeffs(bc.d(), l, &coeffs)
}

/// Allowed range of `L/N` for telescope constructions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AspectGuard {
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl Default for AspectGuard {
    fn default() -> Self {
        AspectGuard {
            min_ratio: 0.25,
            max_ratio: 4.0,
        }
    }
}

impl AspectGuard {
    pub fn check(&self, l: usize, n: usize) -> Result<()> {
        let r = l as f64 / n as f64;
        if r < self.min_ratio || r > self.max_ratio {
            return Err(Error::InvalidArgument(format!(
                "aspect ratio L/N = {r} outside [{}, {}]",
                self.min_ratio, self.max_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TelescopeConfig {
    /// Stop once the current data norm is at most `tol` times the initial one.
    pub tol: f64,
    pub max_iter: usize,
    pub aspect: AspectGuard,
    /// Norm used for the trace.
    pub norm: PNorm,
}

impl Default for TelescopeConfig {
    fn default() -> Self {
        TelescopeConfig {
            tol: 1e-10,
            max_iter: 200,
            aspect: AspectGuard::default(),
            norm: PNorm::Finite(2.0),
        }
    }
}

/// Data norms of successive telescope terms, for the chain started at each layer.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TelescopeTrace {
    pub from_bottom: Vec<f64>,
    pub from_top: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TelescopeResult {
    pub solution: StripFunction,
    pub trace: TelescopeTrace,
}

#[derive(Clone, Copy, PartialEq)]
enum Problem {
    Dirichlet,
    Neumann,
}

/// Alternating half-space solves started from `data` at layer 0.
///
/// Returns the signed sum per layer in Fourier space and the trace of data norms.
fn telescope_chain(
    data: &Layer,
    n: usize,
    problem: Problem,
    cfg: &TelescopeConfig,
) -> Result<(Vec<SpectralField>, Vec<f64>)> {
    let l = layer_half_period(data)?;
    let dim = data.ndim();
    let mut acc: Vec<SpectralField> = (0..=n).map(|_| SpectralField::zeros(dim, l)).collect();
    let initial = lp_norm(data.iter().copied(), cfg.norm);
    let mut trace = vec![initial];
    if initial == 0.0 {
        return Ok((acc, trace));
    }
    let q = q_field(dim, l);
    let lm1 = SpectralField::from_fn(dim, l, |k| Complex64::new(lambda_minus_one_at(k, l), 0.0));
    let mut current = forward_dft_real(data, l)?;
    let mut sign = 1.0;
    let mut upward = true;
    for step in 1..=cfg.max_iter {
        // Base-layer values of this term.
        let mut base = current.clone();
        if problem == Problem::Neumann {
            ndarray::Zip::from(base.coeffs_mut())
                .and(lm1.coeffs())
                .for_each(|c, m| {
                    *c = if m.re == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        *c / f_real(m.re)
                    };
                });
        }
        for m in 0..=n {
            let y = if upward { m } else { n - m };
            ndarray::Zip::from(acc[y].coeffs_mut())
                .and(base.coeffs())
                .and(q.coeffs())
                .for_each(|a, &b, qv| *a += sign * b * qv.re.powi(-(m as i32)));
        }
        // Data handed to the next term at the opposite layer.
        let mut next = current.clone();
        ndarray::Zip::from(next.coeffs_mut())
            .and(q.coeffs())
            .and(lm1.coeffs())
            .for_each(|c, qv, m| {
                let factor = match problem {
                    Problem::Dirichlet => qv.re.powi(-(n as i32)),
                    Problem::Neumann if m.re == 0.0 => 0.0,
                    Problem::Neumann => -qv.re.powi(-(n as i32 - 1)),
                };
                *c *= factor;
            });
        let norm = lp_norm(inverse_dft(&next).iter().map(|c| c.re), cfg.norm);
        trace.push(norm);
        if norm <= cfg.tol * initial {
            return Ok((acc, trace));
        }
        if step >= 3 && norm >= trace[step - 3] {
            return Err(Error::NonContraction { step, norm });
        }
        current = next;
        sign = -sign;
        upward = !upward;
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        residual: *trace.last().unwrap() / initial,
    })
}

fn flip_layers(v: Vec<SpectralField>) -> Vec<SpectralField> {
    v.into_iter().rev().collect()
}

fn combine(
    d: usize,
    l: usize,
    bottom_chain: Vec<SpectralField>,
    top_chain: Vec<SpectralField>,
    affine: impl Fn(usize) -> f64,
) -> Result<StripFunction> {
    let top_chain = flip_layers(top_chain);
    let layers: Vec<Layer> = bottom_chain
        .iter()
        .zip(&top_chain)
        .enumerate()
        .map(|(y, (a, b))| {
            let mut s = a.clone();
            s.coeffs_mut().zip_mut_with(b.coeffs(), |x, y| *x += y);
            let c = affine(y);
            inverse_dft_real(&s).mapv(|v| v + c)
        })
        .collect();
    StripFunction::from_layers(d, l, &layers)
}

/// Dirichlet strip solution as two mean-zero telescopes plus the affine interpolation of the means.
pub fn telescope_dirichlet(
    bc: &BoundaryPair,
    n: usize,
    cfg: &TelescopeConfig,
) -> Result<TelescopeResult> {
    let l = bc.half_period();
    cfg.aspect.check(l, n)?;
    let (mb, mt) = (mean(&bc.bottom), mean(&bc.top));
    let (w1, t1) = telescope_chain(&bc.bottom.mapv(|v| v - mb), n, Problem::Dirichlet, cfg)?;
    let (w2, t2) = telescope_chain(&bc.top.mapv(|v| v - mt), n, Problem::Dirichlet, cfg)?;
    let nf = n as f64;
    let solution = combine(bc.d(), l, w1, w2, |y| {
        (nf - y as f64) / nf * mb + y as f64 / nf * mt
    })?;
    Ok(TelescopeResult {
        solution,
        trace: TelescopeTrace {
            from_bottom: t1,
            from_top: t2,
        },
    })
}

/// Neumann strip solution as two mean-zero telescopes plus the linear part `y·⟨bottom⟩`.
///
/// Requires `⟨bottom⟩ + ⟨top⟩ = 0`; the result has zero mean on layer 0.
pub fn telescope_neumann(
    bc: &BoundaryPair,
    n: usize,
    cfg: &TelescopeConfig,
) -> Result<TelescopeResult> {
    let l = bc.half_period();
    cfg.aspect.check(l, n)?;
    if n < 2 {
        return Err(Error::InvalidArgument("Neumann strip height must be ≥ 2".into()));
    }
    let (mb, mt) = (mean(&bc.bottom), mean(&bc.top));
    let scale = bc
        .bottom
        .iter()
        .chain(bc.top.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    if (mb + mt).abs() > 1e-12 * scale {
        return Err(Error::Incompatible(format!(
            "layer means {mb:e} and {mt:e} do not cancel"
        )));
    }
    let (w1, t1) = telescope_chain(&bc.bottom.mapv(|v| v - mb), n, Problem::Neumann, cfg)?;
    let (w2, t2) = telescope_chain(&bc.top.mapv(|v| v - mt), n, Problem::Neumann, cfg)?;
    let solution = combine(bc.d(), l, w1, w2, |y| y as f64 * mb)?;
    Ok(TelescopeResult {
        solution,
        trace: TelescopeTrace {
            from_bottom: t1,
            from_top: t2,
        },
    })
}

/// Exit distribution from height `z` onto the periodized hyperplane, on `I_L^{d−1}`.
pub fn periodized_poisson_kernel(z: usize, d: usize, l: usize) -> Result<Layer> {
    if z < 1 || d < 2 || l < 1 {
        return Err(Error::InvalidArgument(format!(
            "invalid kernel parameters z={z}, d={d}, L={l}"
        )));
    }
    let dim = d - 1;
    let h = PI / l as f64;
    let coeffs = SpectralField::from_fn(dim, l, |k| {
        Complex64::new(
            h.powi(dim as i32) * q_real(lambda_minus_one_at(k, l)).powi(-(z as i32)),
            0.0,
        )
    });
    let p = inverse_dft_real(&coeffs);
    // Sum of the values equals a(0)/h^{d−1}.
    let mass = coeffs.at(&vec![0; dim]).re / h.powi(dim as i32);
    Ok(p.mapv(|v| v / mass))
}

/// Column statistics of a half-space extension along `x₁ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnStats {
    /// `Σ_{z=1..N} Σ_y |u(0,y,z) − ⟨u(·,z)⟩|ᵖ`.
    pub centered_sum: f64,
    /// `(Σ_{z=1..N} Σ_y |u(0,y,z)|ᵖ)^{1/p}`.
    pub face_norm: f64,
    /// `‖u(·,0)‖_p^p`.
    pub bottom_sum: f64,
    /// `|u(0,…,0,z) − ⟨u(·,z)⟩|` for z = 1..N.
    pub column: Vec<f64>,
}

pub fn column_stats(bottom: &Layer, n: usize, p: f64) -> Result<ColumnStats> {
    let layers = halfspace_layers(bottom, n)?;
    let mut centered_sum = 0.0;
    let mut face_sum = 0.0;
    let mut column = Vec::with_capacity(n);
    for layer in layers.iter().skip(1) {
        let m = mean(layer);
        let face = layer.index_axis(ndarray::Axis(0), 0);
        for v in face.iter() {
            centered_sum += (v - m).abs().powf(p);
            face_sum += v.abs().powf(p);
        }
        column.push((face.iter().next().copied().unwrap_or(0.0) - m).abs());
    }
    Ok(ColumnStats {
        centered_sum,
        face_norm: face_sum.powf(1.0 / p),
        bottom_sum: bottom.iter().map(|v| v.abs().powf(p)).sum(),
        column,
    })
}

/// `t · #{z : column(z) > t}` for each threshold.
pub fn weak_l1_profile(column: &[f64], thresholds: &[f64]) -> Vec<f64> {
    thresholds
        .iter()
        .map(|&t| t * column.iter().filter(|&&c| c > t).count() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{layer_mean, LatticeFunction};

    fn layer(l: usize, f: impl Fn(i64) -> f64) -> Layer {
        ArrayD::from_shape_fn(IxDyn(&[2 * l]), |i| f(crate::lattice::unwrap(i[0], l)))
    }

    #[test]
    fn halfspace_identity_and_constants() {
        let b = layer(4, |x| x as f64);
        assert_eq!(halfspace_layer(&b, 0).unwrap(), b);
        let c = layer(4, |_| 2.5);
        for v in halfspace_layer(&c, 7).unwrap().iter() {
            assert!((v - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn dirichlet_constant_and_zero() {
        let bc = BoundaryPair::constant(1, 4, 3.0, 3.0);
        let w = dirichlet_strip_solve(&bc, 5).unwrap();
        assert!(w.values().iter().all(|v| (v - 3.0).abs() < 1e-13));
        let bc = BoundaryPair::constant(2, 2, 0.0, 0.0);
        let w = dirichlet_strip_solve(&bc, 3).unwrap();
        assert!(w.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn neumann_zero_and_mode() {
        let bc = BoundaryPair::constant(1, 4, 0.0, 0.0);
        let w = neumann_strip_solve(&bc, 4).unwrap();
        assert!(w.values().iter().all(|v| v.abs() < 1e-15));
        let l = 8;
        let h = PI / l as f64;
        let g = layer(l, |x| (h * 2.0 * x as f64).cos());
        let bc = BoundaryPair::new(g.clone(), g.mapv(|v| -0.5 * v)).unwrap();
        let n = 6;
        let w = neumann_strip_solve(&bc, n).unwrap();
        for x in -(l as i64) + 1..=l as i64 {
            let d0 = w.value(&[x, 1]).unwrap() - w.value(&[x, 0]).unwrap();
            let dn = w.value(&[x, n as i64 - 1]).unwrap() - w.value(&[x, n as i64]).unwrap();
            assert!((d0 - bc.bottom[[crate::lattice::wrap(x, l)]]).abs() < 1e-9);
            assert!((dn - bc.top[[crate::lattice::wrap(x, l)]]).abs() < 1e-9);
        }
        assert!(layer_mean(&w, 0).unwrap().abs() < 1e-14);
        assert!(layer_mean(&w, n).unwrap().abs() < 1e-14);
        assert!(w.harmonic_residual() < 1e-9);
    }

    #[test]
    fn neumann_rejects_mean() {
        let bc = BoundaryPair::constant(1, 4, 1.0, -1.0);
        assert!(matches!(neumann_strip_solve(&bc, 4), Err(Error::Incompatible(_))));
    }

    #[test]
    fn telescope_constant_data() {
        let bc = BoundaryPair::constant(1, 8, 2.0, 2.0);
        let r = telescope_dirichlet(&bc, 8, &TelescopeConfig::default()).unwrap();
        assert!(r.solution.values().iter().all(|v| (v - 2.0).abs() < 1e-13));
        assert_eq!(r.trace.from_bottom, vec![0.0]);
    }

    #[test]
    fn telescope_aspect_guard() {
        let bc = BoundaryPair::constant(1, 2, 1.0, 1.0);
        assert!(telescope_dirichlet(&bc, 16, &TelescopeConfig::default()).is_err());
    }

    #[test]
    fn kernel_mass() {
        let p = periodized_poisson_kernel(3, 2, 16).unwrap();
        assert!((p.sum() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v > -1e-10));
    }
}
