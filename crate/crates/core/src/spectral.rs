//! Periodic DFT on h-lattices and the symbols of the discrete Laplacian.
//!
//! A periodic grid of half-period `L` has `2L` points per axis, `h = π/L`,
//! spatial points `h·{−L+1,…,L}` and frequencies `k ∈ {−L+1,…,L}`. Both are
//! stored at index `x mod 2L` (see [`crate::lattice::wrap`]).
//!
//! Symbols take a tangential frequency `t ∈ [−π,π]^{d−1}`, so the ambient
//! dimension is `t.len() + 1`. Axis indices are zero-based.

use std::f64::consts::PI;

use ndarray::{ArrayD, Axis, Dimension, IxDyn};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::lattice::{periodic_shape, unwrap, wrap};

/// Per-axis transform used by the DFT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// rustfft, any length.
    #[default]
    Fast,
    /// Direct O(n²) sum.
    Direct,
}

fn check_periodic_shape(shape: &[usize], l: usize) -> Result<()> {
    let expected = periodic_shape(shape.len(), l);
    if l == 0 || shape != expected.as_slice() {
        return Err(Error::ShapeMismatch {
            expected,
            got: shape.to_vec(),
        });
    }
    Ok(())
}

fn direct_line(line: &mut [Complex64], sign: f64) {
    let n = line.len();
    let src = line.to_vec();
    let twiddle: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, sign * 2.0 * PI * m as f64 / n as f64))
        .collect();
    for (k, out) in line.iter_mut().enumerate() {
        *out = src
            .iter()
            .enumerate()
            .map(|(j, v)| v * twiddle[(j * k) % n])
            .sum();
    }
}

/// Unnormalized transform along every axis: `Σ_j v_j e^{∓2πi jk/n}`.
fn transform_all_axes(a: &mut ArrayD<Complex64>, inverse: bool, backend: Backend) {
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..a.ndim() {
        let n = a.shape()[axis];
        let fft = match (backend, inverse) {
            (Backend::Fast, false) => Some(planner.plan_fft_forward(n)),
            (Backend::Fast, true) => Some(planner.plan_fft_inverse(n)),
            (Backend::Direct, _) => None,
        };
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for mut lane in a.lanes_mut(Axis(axis)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            match &fft {
                Some(f) => f.process(&mut buf),
                None => direct_line(&mut buf, if inverse { 1.0 } else { -1.0 }),
            }
            for (v, b) in lane.iter_mut().zip(&buf) {
                *v = *b;
            }
        }
    }
}

/// Fourier coefficients on `I_L^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    l: usize,
    coeffs: ArrayD<Complex64>,
}

impl SpectralField {
    pub fn new(l: usize, coeffs: ArrayD<Complex64>) -> Result<Self> {
        check_periodic_shape(coeffs.shape(), l)?;
        Ok(SpectralField { l, coeffs })
    }

    pub fn zeros(dim: usize, l: usize) -> Self {
        SpectralField {
            l,
            coeffs: ArrayD::zeros(IxDyn(&periodic_shape(dim, l))),
        }
    }

    pub fn from_fn(dim: usize, l: usize, f: impl Fn(&[i64]) -> Complex64) -> Self {
        let coeffs = ArrayD::from_shape_fn(IxDyn(&periodic_shape(dim, l)), |idx| {
            let k: Vec<i64> = idx.slice().iter().map(|&j| unwrap(j, l)).collect();
            f(&k)
        });
        SpectralField { l, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.ndim()
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn h(&self) -> f64 {
        PI / self.l as f64
    }

    pub fn coeffs(&self) -> &ArrayD<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut ArrayD<Complex64> {
        &mut self.coeffs
    }

    /// Coefficient at frequency `k`, reduced mod 2L.
    pub fn at(&self, k: &[i64]) -> Complex64 {
        let idx: Vec<usize> = k.iter().map(|&c| wrap(c, self.l)).collect();
        self.coeffs[IxDyn(&idx)]
    }

    /// Pointwise product with a mode-dependent factor.
    pub fn map_modes(&self, f: impl Fn(&[i64], Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.indexed_iter_mut() {
            let k: Vec<i64> = idx.slice().iter().map(|&j| unwrap(j, self.l)).collect();
            *c = f(&k, *c);
        }
        out
    }
}

/// `(ℱv)(k) = h^d Σ_x v(x) e^{−i k·x}`.
pub fn forward_dft(v: &ArrayD<Complex64>, l: usize) -> Result<SpectralField> {
    forward_dft_with(v, l, Backend::Fast)
}

pub fn forward_dft_with(v: &ArrayD<Complex64>, l: usize, backend: Backend) -> Result<SpectralField> {
    check_periodic_shape(v.shape(), l)?;
    let mut a = v.clone();
    transform_all_axes(&mut a, false, backend);
    let scale = (PI / l as f64).powi(v.ndim() as i32);
    a.mapv_inplace(|c| c * scale);
    Ok(SpectralField { l, coeffs: a })
}

pub fn forward_dft_real(v: &ArrayD<f64>, l: usize) -> Result<SpectralField> {
    forward_dft(&v.mapv(|x| Complex64::new(x, 0.0)), l)
}

/// `w(x) = (2π)^{−d} Σ_ν a(ν) e^{iν·x}`.
pub fn inverse_dft(a: &SpectralField) -> ArrayD<Complex64> {
    inverse_dft_with(a, Backend::Fast)
}

pub fn inverse_dft_with(a: &SpectralField, backend: Backend) -> ArrayD<Complex64> {
    let mut w = a.coeffs.clone();
    transform_all_axes(&mut w, true, backend);
    let scale = (2.0 * PI).powi(-(a.dim() as i32));
    w.mapv_inplace(|c| c * scale);
    w
}

/// Real part of the inverse transform.
pub fn inverse_dft_real(a: &SpectralField) -> ArrayD<f64> {
    inverse_dft(a).mapv(|c| c.re)
}

/// Principal square root `exp(½ Log z)`, with `R(0) = 0`.
pub fn principal_sqrt(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::BranchCut(format!("{z}")));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok((0.5 * z.ln()).exp())
}

fn check_q_domain(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re < 1.0 {
        return Err(Error::BranchCut(format!("{z} in (−∞,1)")));
    }
    Ok(())
}

/// `Q(z) = z + R(z+1)R(z−1)`.
pub fn q_symbol(z: Complex64) -> Result<Complex64> {
    check_q_domain(z)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(z + principal_sqrt(z + one)? * principal_sqrt(z - one)?)
}

/// `f(z) = 1/Q(z) − 1`, evaluated as `−(Q−1)/Q` to avoid cancellation near 1.
pub fn f_symbol(z: Complex64) -> Result<Complex64> {
    check_q_domain(z)?;
    let one = Complex64::new(1.0, 0.0);
    let rr = principal_sqrt(z + one)? * principal_sqrt(z - one)?;
    let q = z + rr;
    Ok(-((z - one) + rr) / q)
}

/// `Q(λ)` for real `λ ≥ 1`, given `λ − 1` to keep precision near the origin.
pub fn q_real(lambda_minus_one: f64) -> f64 {
    let m = lambda_minus_one.max(0.0);
    1.0 + m + (m * (m + 2.0)).sqrt()
}

/// `f(λ)` for real `λ ≥ 1`, given `λ − 1`.
pub fn f_real(lambda_minus_one: f64) -> f64 {
    let m = lambda_minus_one.max(0.0);
    let s = m + (m * (m + 2.0)).sqrt();
    -s / (1.0 + s)
}

/// `λ(t) = d − Σ cos tᵢ` with `d = t.len() + 1`.
pub fn lambda_symbol(t: &[f64]) -> f64 {
    1.0 + lambda_minus_one(t)
}

/// `λ(t) − 1 = Σ 2 sin²(tᵢ/2)`.
pub fn lambda_minus_one(t: &[f64]) -> f64 {
    t.iter().map(|&x| 2.0 * (0.5 * x).sin().powi(2)).sum()
}

/// `λ(hk) − 1` for an integer frequency on a grid of half-period `l`.
pub fn lambda_minus_one_at(k: &[i64], l: usize) -> f64 {
    let h = PI / l as f64;
    k.iter()
        .map(|&x| 2.0 * (0.5 * h * x as f64).sin().powi(2))
        .sum()
}

fn expm1_i(t: f64) -> Complex64 {
    // e^{−it} − 1 = −2 sin²(t/2) − i sin t
    Complex64::new(-2.0 * (0.5 * t).sin().powi(2), -t.sin())
}

/// `𝒩ᵢ(t) = (e^{−itᵢ} − 1)/f(λ(t))`, and 0 at `t = 0`.
pub fn neumann_symbol(i: usize, t: &[f64]) -> Complex64 {
    assert!(i < t.len(), "axis {i} out of range");
    if t.iter().all(|&x| x == 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    expm1_i(t[i]) / f_real(lambda_minus_one(t))
}

/// `𝒟ᵢ(t) = f(λ(t))/(e^{−itᵢ} − 1)`, and 0 when `tᵢ = 0`.
pub fn dirichlet_symbol(i: usize, t: &[f64]) -> Complex64 {
    assert!(i < t.len(), "axis {i} out of range");
    if t[i] == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    f_real(lambda_minus_one(t)) / expm1_i(t[i])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    Neumann(usize),
    Dirichlet(usize),
}

impl Symbol {
    pub fn eval(self, t: &[f64]) -> Complex64 {
        match self {
            Symbol::Neumann(i) => neumann_symbol(i, t),
            Symbol::Dirichlet(i) => dirichlet_symbol(i, t),
        }
    }

    /// `symbol(hξ)` for `ξ ∈ [−π/h, π/h]^{d−1}`.
    pub fn scaled(self, h: f64, xi: &[f64]) -> Result<Complex64> {
        let bound = PI / h;
        if let Some(x) = xi.iter().find(|x| x.abs() > bound * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "frequency {x} outside [−{bound}, {bound}]"
            )));
        }
        let t: Vec<f64> = xi.iter().map(|x| h * x).collect();
        Ok(self.eval(&t))
    }

    /// Samples of `symbol(hν)` on `I_L^{dim}`.
    pub fn periodic(self, dim: usize, l: usize) -> PeriodicSymbol {
        let h = PI / l as f64;
        PeriodicSymbol::from_fn(dim, l, |nu| {
            let t: Vec<f64> = nu.iter().map(|&x| h * x as f64).collect();
            self.eval(&t)
        })
    }
}

/// Complex 2L-periodic function on ℤ^dim, stored on `I_L^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSymbol {
    l: usize,
    values: ArrayD<Complex64>,
}

impl PeriodicSymbol {
    pub fn new(l: usize, values: ArrayD<Complex64>) -> Result<Self> {
        check_periodic_shape(values.shape(), l)?;
        Ok(PeriodicSymbol { l, values })
    }

    pub fn from_fn(dim: usize, l: usize, f: impl Fn(&[i64]) -> Complex64) -> Self {
        let values = ArrayD::from_shape_fn(IxDyn(&periodic_shape(dim, l)), |idx| {
            let nu: Vec<i64> = idx.slice().iter().map(|&j| unwrap(j, l)).collect();
            f(&nu)
        });
        PeriodicSymbol { l, values }
    }

    pub fn constant(dim: usize, l: usize, c: Complex64) -> Self {
        Self::from_fn(dim, l, |_| c)
    }

    pub fn dim(&self) -> usize {
        self.values.ndim()
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn values(&self) -> &ArrayD<Complex64> {
        &self.values
    }

    pub fn at(&self, nu: &[i64]) -> Complex64 {
        let idx: Vec<usize> = nu.iter().map(|&c| wrap(c, self.l)).collect();
        self.values[IxDyn(&idx)]
    }

    pub fn set(&mut self, nu: &[i64], v: Complex64) {
        let idx: Vec<usize> = nu.iter().map(|&c| wrap(c, self.l)).collect();
        self.values[IxDyn(&idx)] = v;
    }

    /// Max of `|a(ν) − conj(a(−ν))|`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, v) in self.values.indexed_iter() {
            let neg: Vec<i64> = idx.slice().iter().map(|&j| -unwrap(j, self.l)).collect();
            worst = worst.max((v - self.at(&neg).conj()).norm());
        }
        worst
    }
}

/// `U = ℱ⁻¹(a · ℱu)`.
pub fn apply_multiplier(a: &PeriodicSymbol, u: &ArrayD<Complex64>) -> Result<ArrayD<Complex64>> {
    if u.shape() != a.values.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.values.shape().to_vec(),
            got: u.shape().to_vec(),
        });
    }
    let mut fu = forward_dft(u, a.l)?;
    fu.coeffs.zip_mut_with(&a.values, |c, m| *c *= m);
    Ok(inverse_dft(&fu))
}

/// Real input; returns the real part and the largest discarded imaginary part.
pub fn apply_multiplier_real(a: &PeriodicSymbol, u: &ArrayD<f64>) -> Result<(ArrayD<f64>, f64)> {
    let out = apply_multiplier(a, &u.mapv(|x| Complex64::new(x, 0.0)))?;
    let imag = out.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    Ok((out.mapv(|c| c.re), imag))
}

/// `c = inf_{0<|s|≤π} (1 − cos s)/s² = 2/π²`.
pub fn cosine_constant() -> f64 {
    2.0 / (PI * PI)
}

/// Sup of `|f(ζ)|` over the circle `|ζ − z| = ½|z − 1|`, sampled at `samples` points.
pub fn circle_sup_f(z: Complex64, samples: usize) -> Result<f64> {
    let r = 0.5 * (z - 1.0).norm();
    let mut sup = 0.0f64;
    for j in 0..samples {
        let zeta = z + Complex64::from_polar(r, 2.0 * PI * j as f64 / samples as f64);
        sup = sup.max(f_symbol(zeta)?.norm());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dft_of_constant_and_mode() {
        let v = ArrayD::from_elem(IxDyn(&[4]), c(1.0, 0.0));
        let f = forward_dft(&v, 2).unwrap();
        assert!((f.at(&[0]) - c(2.0 * PI, 0.0)).norm() < 1e-13);
        for k in [-1, 1, 2] {
            assert!(f.at(&[k]).norm() < 1e-13);
        }
        let h = PI / 2.0;
        let mode = ArrayD::from_shape_fn(IxDyn(&[4]), |i| {
            Complex64::from_polar(1.0, 2.0 * h * unwrap(i[0], 2) as f64)
        });
        let f = forward_dft(&mode, 2).unwrap();
        assert!((f.at(&[2]) - c(2.0 * PI, 0.0)).norm() < 1e-13);
        assert!(f.at(&[1]).norm() < 1e-13);
    }

    #[test]
    fn fast_and_direct_agree() {
        let v = ArrayD::from_shape_fn(IxDyn(&[6, 6]), |i| c((i[0] * 7 + i[1]) as f64 % 5.0, i[1] as f64));
        let a = forward_dft_with(&v, 3, Backend::Fast).unwrap();
        let b = forward_dft_with(&v, 3, Backend::Direct).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() < 1e-11);
        }
        let back = inverse_dft_with(&b, Backend::Direct);
        for (x, y) in back.iter().zip(&v) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_shape() {
        let v = ArrayD::from_elem(IxDyn(&[5]), c(1.0, 0.0));
        assert!(forward_dft(&v, 2).is_err());
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(principal_sqrt(c(4.0, 0.0)).unwrap(), c(2.0, 0.0));
        assert_eq!(principal_sqrt(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!((principal_sqrt(c(0.0, 2.0)).unwrap() - c(1.0, 1.0)).norm() < 1e-15);
        assert!(principal_sqrt(c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn q_and_f_examples() {
        assert_eq!(q_symbol(c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(f_symbol(c(1.0, 0.0)).unwrap().norm(), 0.0);
        let s2 = 2f64.sqrt();
        assert!((q_symbol(c(3.0, 0.0)).unwrap() - c(3.0 + 2.0 * s2, 0.0)).norm() < 1e-14);
        assert!((f_symbol(c(3.0, 0.0)).unwrap() - c(2.0 - 2.0 * s2, 0.0)).norm() < 1e-14);
        assert!((q_real(2.0) - (3.0 + 2.0 * s2)).abs() < 1e-14);
        assert!((f_real(2.0) - (2.0 - 2.0 * s2)).abs() < 1e-14);
        assert!(q_symbol(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn symbol_examples() {
        let s2 = 2f64.sqrt();
        assert!((neumann_symbol(0, &[PI]) - c(1.0 + s2, 0.0)).norm() < 1e-12);
        assert_eq!(neumann_symbol(0, &[0.0]), c(0.0, 0.0));
        assert_eq!(dirichlet_symbol(1, &[0.3, 0.0]), c(0.0, 0.0));
        let t = [0.4, -1.1];
        assert!((neumann_symbol(1, &t) * dirichlet_symbol(1, &t) - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(lambda_symbol(&[0.0, 0.0]), 1.0);
        assert!((lambda_symbol(&[PI, PI]) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_symbol_checks_range() {
        let l = 8;
        let h = PI / l as f64;
        let v = Symbol::Neumann(0).scaled(h, &[l as f64]).unwrap();
        assert!((v - neumann_symbol(0, &[PI])).norm() < 1e-14);
        assert!(Symbol::Neumann(0).scaled(h, &[l as f64 + 1.0]).is_err());
    }

    #[test]
    fn cosine_constant_value() {
        assert!((cosine_constant() - 0.2026423672).abs() < 1e-10);
        let grid_min = (1..=1_000_000)
            .map(|j| {
                let s = PI * j as f64 / 1_000_000.0;
                (1.0 - s.cos()) / (s * s)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((grid_min - cosine_constant()).abs() < 1e-9);
    }

    #[test]
    fn identity_and_zero_multipliers() {
        let u = ArrayD::from_shape_fn(IxDyn(&[8]), |i| c(i[0] as f64, 0.0));
        let one = PeriodicSymbol::constant(1, 4, c(1.0, 0.0));
        let out = apply_multiplier(&one, &u).unwrap();
        for (a, b) in out.iter().zip(&u) {
            assert!((a - b).norm() < 1e-12);
        }
        let zero = PeriodicSymbol::constant(1, 4, c(0.0, 0.0));
        assert!(apply_multiplier(&zero, &u).unwrap().iter().all(|z| z.norm() < 1e-15));
    }
}
