//! Independent oracles: dense Gaussian elimination and direct DFT sums.

#![allow(dead_code)]

use std::f64::consts::PI;

use harmonic_lattice::halfspace::Layer;
use harmonic_lattice::lattice::{unwrap, wrap, BoxDomain};
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        assert!(a[piv][col].abs() > 1e-14, "singular oracle system");
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// All vertices of `{0..N}^d` in lexicographic order.
pub fn cube_vertices(d: usize, n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=n as i64).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

/// Dirichlet problem on the cube as one dense system over every vertex.
pub fn dirichlet_oracle(d: usize, n: usize, boundary: impl Fn(&[i64]) -> f64) -> Vec<f64> {
    let verts = cube_vertices(d, n);
    let m = verts.len();
    let index = |x: &[i64]| x.iter().fold(0usize, |acc, &c| acc * (n + 1) + c as usize);
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (row, x) in verts.iter().enumerate() {
        if x.iter().any(|&c| c == 0 || c == n as i64) {
            a[row][row] = 1.0;
            b[row] = boundary(x);
        } else {
            a[row][row] = -2.0 * d as f64;
            for axis in 0..d {
                for s in [-1i64, 1] {
                    let mut y = x.clone();
                    y[axis] += s;
                    a[row][index(&y)] += 1.0;
                }
            }
        }
    }
    gauss_solve(a, b)
}

pub fn box_values(domain: BoxDomain, f: impl Fn(&[i64]) -> f64) -> Vec<f64> {
    domain.boundary_vertices().iter().map(|x| f(x)).collect()
}

/// Every point of `I_L^dim` in storage order, as coordinates.
pub fn torus_points(dim: usize, l: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..2 * l).map(move |j| {
                    let mut w = v.clone();
                    w.push(unwrap(j, l));
                    w
                })
            })
            .collect();
    }
    out
}

pub fn at(layer: &ArrayD<f64>, x: &[i64], l: usize) -> f64 {
    let idx: Vec<usize> = x.iter().map(|&c| wrap(c, l)).collect();
    layer[IxDyn(&idx)]
}

pub fn random_layer(rng: &mut impl Rng, dim: usize, l: usize) -> Layer {
    ArrayD::from_shape_fn(IxDyn(&vec![2 * l; dim]), |_| gaussian(rng))
}

pub fn mean_zero(mut layer: Layer) -> Layer {
    let m = layer.mean().unwrap();
    layer.mapv_inplace(|v| v - m);
    layer
}

/// `h^d Σ_x v(x) e^{−i h k·x}` summed directly.
pub fn direct_dft(v: &ArrayD<Complex64>, l: usize) -> ArrayD<Complex64> {
    let dim = v.ndim();
    let h = PI / l as f64;
    let pts = torus_points(dim, l);
    let mut out = ArrayD::zeros(v.raw_dim());
    for k in &pts {
        let mut s = Complex64::new(0.0, 0.0);
        for x in &pts {
            let phase: i64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            let idx: Vec<usize> = x.iter().map(|&c| wrap(c, l)).collect();
            s += v[IxDyn(&idx)] * Complex64::from_polar(1.0, -h * phase as f64);
        }
        let idx: Vec<usize> = k.iter().map(|&c| wrap(c, l)).collect();
        out[IxDyn(&idx)] = s * h.powi(dim as i32);
    }
    out
}

/// Layer index of strip point `(x, y)` among `(2L)^dim · (N+1)` unknowns.
fn strip_index(x: &[i64], y: usize, l: usize, n: usize) -> usize {
    let lin = x.iter().fold(0usize, |acc, &c| acc * 2 * l + wrap(c, l));
    lin * (n + 1) + y
}

fn strip_harmonic_row(a: &mut [f64], x: &[i64], y: usize, l: usize, n: usize) {
    let dim = x.len();
    a[strip_index(x, y, l, n)] -= 2.0 * (dim + 1) as f64;
    for axis in 0..dim {
        for s in [-1i64, 1] {
            let mut z = x.to_vec();
            z[axis] += s;
            a[strip_index(&z, y, l, n)] += 1.0;
        }
    }
    a[strip_index(x, y - 1, l, n)] += 1.0;
    a[strip_index(x, y + 1, l, n)] += 1.0;
}

/// Dirichlet strip problem as a dense system; returns layers `0..=N`.
pub fn dirichlet_strip_oracle(bottom: &Layer, top: &Layer, n: usize) -> Vec<Layer> {
    let dim = bottom.ndim();
    let l = bottom.shape()[0] / 2;
    let pts = torus_points(dim, l);
    let m = pts.len() * (n + 1);
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for x in &pts {
        for y in 0..=n {
            let row = strip_index(x, y, l, n);
            if y == 0 || y == n {
                a[row][row] = 1.0;
                b[row] = at(if y == 0 { bottom } else { top }, x, l);
            } else {
                strip_harmonic_row(&mut a[row], x, y, l, n);
            }
        }
    }
    unpack_strip(&gauss_solve(a, b), dim, l, n)
}

/// Neumann strip problem `w(·,1)−w(·,0) = gb`, `w(·,N−1)−w(·,N) = gt`, zero mean on layer 0.
pub fn neumann_strip_oracle(gb: &Layer, gt: &Layer, n: usize) -> Vec<Layer> {
    let dim = gb.ndim();
    let l = gb.shape()[0] / 2;
    let pts = torus_points(dim, l);
    let m = pts.len() * (n + 1);
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (i, x) in pts.iter().enumerate() {
        for y in 0..=n {
            let row = strip_index(x, y, l, n);
            if y == 0 {
                if i == 0 {
                    // The system has a one-dimensional kernel; this row fixes the gauge.
                    for z in &pts {
                        a[row][strip_index(z, 0, l, n)] = 1.0;
                    }
                } else {
                    a[row][strip_index(x, 1, l, n)] = 1.0;
                    a[row][row] = -1.0;
                    b[row] = at(gb, x, l);
                }
            } else if y == n {
                a[row][strip_index(x, n - 1, l, n)] = 1.0;
                a[row][row] = -1.0;
                b[row] = at(gt, x, l);
            } else {
                strip_harmonic_row(&mut a[row], x, y, l, n);
            }
        }
    }
    unpack_strip(&gauss_solve(a, b), dim, l, n)
}

fn unpack_strip(sol: &[f64], dim: usize, l: usize, n: usize) -> Vec<Layer> {
    (0..=n)
        .map(|y| {
            ArrayD::from_shape_fn(IxDyn(&vec![2 * l; dim]), |idx| {
                let x: Vec<i64> = (0..dim).map(|a| unwrap(idx[a], l)).collect();
                sol[strip_index(&x, y, l, n)]
            })
        })
        .collect()
}

pub fn max_abs_diff(a: &ArrayD<f64>, b: &ArrayD<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
