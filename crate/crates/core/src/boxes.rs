//! Harmonic extensions on the cube `{0,…,N}^d`, reflections of boundary data
//! and the face decomposition of a harmonic function.

use nalgebra::{DMatrix, DVector};
use ndarray::{ArrayD, Axis, Dimension, IxDyn};

use crate::error::{Error, Result};
use crate::halfspace::{dirichlet_strip_solve, BoundaryPair};
use crate::lattice::{
    discrete_laplacian, lp_norm, unwrap, BoxDomain, EdgeSetKind, GridDomain, GridFunction,
    LatticeFunction, OrientedEdgeValues, PNorm, StripFunction,
};

/// Interior systems up to this many unknowns are solved by dense LU.
pub const DENSE_LIMIT: usize = 512;
const CG_TOL: f64 = 1e-12;

/// Values on etanT, in the order of [`BoxDomain::boundary_vertices`].
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletData {
    domain: BoxDomain,
    values: Vec<f64>,
}

impl DirichletData {
    pub fn new(domain: BoxDomain, values: Vec<f64>) -> Result<Self> {
        let expected = domain.boundary_vertices().len();
        if values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: vec![expected],
                got: vec![values.len()],
            });
        }
        Ok(DirichletData { domain, values })
    }

    pub fn from_fn(domain: BoxDomain, f: impl Fn(&[i64]) -> f64) -> Self {
        let values = domain.boundary_vertices().iter().map(|x| f(x)).collect();
        DirichletData { domain, values }
    }

    pub fn domain(&self) -> BoxDomain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Values on enor, in the order of [`BoxDomain::normal_edges`]; they sum to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct NeumannData {
    domain: BoxDomain,
    values: Vec<f64>,
}

impl NeumannData {
    pub fn new(domain: BoxDomain, values: Vec<f64>) -> Result<Self> {
        let expected = domain.normal_edges().len();
        if values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: vec![expected],
                got: vec![values.len()],
            });
        }
        let total: f64 = values.iter().sum();
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        if total.abs() > 1e-12 * scale {
            return Err(Error::Incompatible(format!(
                "normal data sums to {total:e}; no solution exists"
            )));
        }
        Ok(NeumannData { domain, values })
    }

    /// Subtract the mean so the data sums to zero.
    pub fn projected(domain: BoxDomain, mut values: Vec<f64>) -> Result<Self> {
        let m = values.iter().sum::<f64>() / values.len().max(1) as f64;
        values.iter_mut().for_each(|v| *v -= m);
        Self::new(domain, values)
    }

    /// Vertex form: one value per face-interior boundary vertex, the tail of its inward edge.
    pub fn vertex_form(&self) -> Vec<(Vec<i64>, f64)> {
        self.domain
            .normal_edges()
            .into_iter()
            .zip(&self.values)
            .map(|(e, &v)| (e.tail, v))
            .collect()
    }

    pub fn domain(&self) -> BoxDomain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Real values on the closed cube, harmonic at interior vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxHarmonic {
    domain: BoxDomain,
    grid: GridFunction,
}

impl BoxHarmonic {
    /// Wraps `values` (shape `[N+1; d]`) after checking the interior residual.
    pub fn new(domain: BoxDomain, values: ArrayD<f64>) -> Result<Self> {
        let grid = GridFunction::new(
            GridDomain::Cube {
                d: domain.d(),
                n: domain.n(),
            },
            values,
        )?;
        let u = BoxHarmonic { domain, grid };
        let scale = u.grid.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let r = u.interior_residual();
        if r > 1e-9 * scale {
            return Err(Error::Residual {
                residual: r,
                tol: 1e-9 * scale,
            });
        }
        Ok(u)
    }

    pub fn domain(&self) -> BoxDomain {
        self.domain
    }

    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<f64> {
        self.grid.values()
    }

    /// Max |Δu| over interior vertices.
    pub fn interior_residual(&self) -> f64 {
        self.domain
            .interior_vertices()
            .iter()
            .map(|x| discrete_laplacian(&self.grid, x).unwrap().abs())
            .fold(0.0, f64::max)
    }
}

impl LatticeFunction for BoxHarmonic {
    fn dim(&self) -> usize {
        self.domain.d()
    }

    fn value(&self, x: &[i64]) -> Result<f64> {
        self.grid.value(x)
    }
}

/// Index bookkeeping for the interior unknowns of a box.
struct Interior {
    domain: BoxDomain,
    /// Linear box index of each unknown.
    cells: Vec<usize>,
    /// Unknown indices of interior neighbours.
    nbrs: Vec<Vec<usize>>,
    /// Linear box indices of boundary neighbours.
    bnbrs: Vec<Vec<usize>>,
}

impl Interior {
    fn new(domain: BoxDomain) -> Self {
        let mut slot = vec![usize::MAX; domain.num_vertices()];
        let interior = domain.interior_vertices();
        let cells: Vec<usize> = interior
            .iter()
            .map(|x| domain.linear_index(x).unwrap())
            .collect();
        for (i, &c) in cells.iter().enumerate() {
            slot[c] = i;
        }
        let mut nbrs = Vec::with_capacity(cells.len());
        let mut bnbrs = Vec::with_capacity(cells.len());
        for x in &interior {
            let mut inner = Vec::new();
            let mut outer = Vec::new();
            for y in domain.neighbours(x) {
                let li = domain.linear_index(&y).unwrap();
                if domain.is_interior(&y) {
                    inner.push(slot[li]);
                } else {
                    outer.push(li);
                }
            }
            nbrs.push(inner);
            bnbrs.push(outer);
        }
        Interior {
            domain,
            cells,
            nbrs,
            bnbrs,
        }
    }

    fn len(&self) -> usize {
        self.cells.len()
    }

    /// `out = diag·x − Σ_{interior nbrs} x (+ mean(x) when gauged)`.
    fn apply(&self, kind: SystemKind, x: &[f64], out: &mut [f64]) {
        let two_d = 2.0 * self.domain.d() as f64;
        let mean = if kind == SystemKind::Neumann {
            x.iter().sum::<f64>() / x.len() as f64
        } else {
            0.0
        };
        for i in 0..self.len() {
            let diag = match kind {
                SystemKind::Dirichlet => two_d,
                SystemKind::Neumann => self.nbrs[i].len() as f64,
            };
            let s: f64 = self.nbrs[i].iter().map(|&j| x[j]).sum();
            out[i] = diag * x[i] - s + mean;
        }
    }

    fn solve(&self, kind: SystemKind, b: &[f64]) -> Result<Vec<f64>> {
        if self.len() <= DENSE_LIMIT {
            self.solve_dense(kind, b)
        } else {
            self.solve_cg(kind, b)
        }
    }

    fn solve_dense(&self, kind: SystemKind, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(kind, &e, &mut col);
            for i in 0..n {
                a[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        let x = a
            .lu()
            .solve(&DVector::from_column_slice(b))
            .ok_or_else(|| Error::NoConvergence {
                iterations: 0,
                residual: f64::NAN,
            })?;
        Ok(x.iter().copied().collect())
    }

    fn solve_cg(&self, kind: SystemKind, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let mut rr: f64 = r.iter().map(|v| v * v).sum();
        let max_iter = 20 * n + 100;
        for _ in 0..max_iter {
            if rr.sqrt() <= CG_TOL * bnorm {
                return Ok(x);
            }
            self.apply(kind, &p, &mut ap);
            let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|v| v * v).sum();
            let beta = rr_new / rr;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_new;
        }
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual: rr.sqrt() / bnorm,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SystemKind {
    Dirichlet,
    Neumann,
}

/// Φᴰ: the harmonic function on the cube with boundary values `f`.
pub fn dirichlet_extension(f: &DirichletData) -> Result<BoxHarmonic> {
    let domain = f.domain;
    let mut flat = vec![0.0; domain.num_vertices()];
    for (x, &v) in domain.boundary_vertices().iter().zip(&f.values) {
        flat[domain.linear_index(x).unwrap()] = v;
    }
    let sys = Interior::new(domain);
    let b: Vec<f64> = sys
        .bnbrs
        .iter()
        .map(|nb| nb.iter().map(|&li| flat[li]).sum())
        .collect();
    let sol = sys.solve(SystemKind::Dirichlet, &b)?;
    for (&c, v) in sys.cells.iter().zip(sol) {
        flat[c] = v;
    }
    let values = ArrayD::from_shape_vec(IxDyn(&domain.shape()), flat)
        .expect("shape matches vertex count");
    BoxHarmonic::new(domain, values)
}

/// Φᴺ: harmonic in the interior with `∇_e u = g(e)` on enor.
///
/// Gauge: zero mean over the interior. Vertices on ridges and corners are set,
/// by increasing codimension, to the mean of their already-determined neighbours.
pub fn neumann_extension(g: &NeumannData) -> Result<BoxHarmonic> {
    let domain = g.domain;
    let sys = Interior::new(domain);
    let mut inflow = vec![0.0; domain.num_vertices()];
    let edges = domain.normal_edges();
    for (e, &v) in edges.iter().zip(&g.values) {
        inflow[domain.linear_index(&e.head).unwrap()] += v;
    }
    // Σ_{interior nbrs}(u(y)−u(x)) = Σ_{e into x} g(e).
    let b: Vec<f64> = sys.cells.iter().map(|&c| -inflow[c]).collect();
    let sol = sys.solve(SystemKind::Neumann, &b)?;
    let mut flat = vec![0.0; domain.num_vertices()];
    for (&c, v) in sys.cells.iter().zip(&sol) {
        flat[c] = *v;
    }
    for (e, &v) in edges.iter().zip(&g.values) {
        let head = flat[domain.linear_index(&e.head).unwrap()];
        flat[domain.linear_index(&e.tail).unwrap()] = head - v;
    }
    let vertices = domain.vertices();
    for codim in 2..=domain.d() {
        for x in vertices.iter().filter(|x| domain.codimension(x) == codim) {
            let known: Vec<f64> = domain
                .neighbours(x)
                .iter()
                .filter(|y| domain.codimension(y) < codim)
                .map(|y| flat[domain.linear_index(y).unwrap()])
                .collect();
            flat[domain.linear_index(x).unwrap()] =
                known.iter().sum::<f64>() / known.len() as f64;
        }
    }
    let values = ArrayD::from_shape_vec(IxDyn(&domain.shape()), flat)
        .expect("shape matches vertex count");
    BoxHarmonic::new(domain, values)
}

/// Gradient norms of a box function on etan, enor and efull.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientReport {
    pub tan_norm: f64,
    pub nor_norm: f64,
    pub full_norm: f64,
    /// `nor/tan`, `None` when `tan = 0`.
    pub nor_over_tan: Option<f64>,
    /// `tan/nor`, `None` when `nor = 0`.
    pub tan_over_nor: Option<f64>,
}

pub fn gradient_comparison<F: LatticeFunction + ?Sized>(
    u: &F,
    domain: BoxDomain,
    p: PNorm,
) -> Result<GradientReport> {
    let norm = |kind| OrientedEdgeValues::gradient_of(u, domain, kind).map(|g| g.norm(p));
    let tan_norm = norm(EdgeSetKind::Tangential)?;
    let nor_norm = norm(EdgeSetKind::Normal)?;
    let full_norm = norm(EdgeSetKind::Full)?;
    let ratio = |a: f64, b: f64| (b > 0.0).then(|| a / b);
    Ok(GradientReport {
        tan_norm,
        nor_norm,
        full_norm,
        nor_over_tan: ratio(nor_norm, tan_norm),
        tan_over_nor: ratio(tan_norm, nor_norm),
    })
}

/// `inf_a ‖v − a‖_p`.
pub fn distance_to_constants(values: &[f64], p: PNorm) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cost = |a: f64| lp_norm(values.iter().map(|v| v - a), p);
    match p {
        PNorm::Infinity => 0.5 * (hi - lo),
        PNorm::Finite(q) if q == 2.0 => {
            cost(values.iter().sum::<f64>() / values.len() as f64)
        }
        _ => {
            // Convex in a: golden-section search on [min, max].
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if cost(c) <= cost(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            cost(0.5 * (a + b))
        }
    }
}

/// `(1/N) inf_a ‖u − a‖_{etanT} / ‖∇u‖_{etan}`; `None` when the gradient vanishes.
pub fn poincare_ratio<F: LatticeFunction + ?Sized>(
    u: &F,
    domain: BoxDomain,
    p: PNorm,
) -> Result<Option<f64>> {
    let vals = domain
        .boundary_vertices()
        .iter()
        .map(|x| u.value(x))
        .collect::<Result<Vec<_>>>()?;
    let grad = OrientedEdgeValues::gradient_of(u, domain, EdgeSetKind::Tangential)?.norm(p);
    let dist = distance_to_constants(&vals, p) / domain.n() as f64;
    Ok((grad > 0.0).then(|| dist / grad))
}

fn extend_axis(
    data: &ArrayD<f64>,
    axis: usize,
    half_period: usize,
    source: impl Fn(i64) -> Option<(usize, f64)>,
) -> ArrayD<f64> {
    let mut shape = data.shape().to_vec();
    shape[axis] = 2 * half_period;
    ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
        let x = unwrap(idx[axis], half_period);
        match source(x) {
            Some((j, sign)) => {
                let mut src = idx.slice().to_vec();
                src[axis] = j;
                sign * data[IxDyn(&src)]
            }
            None => 0.0,
        }
    })
}

/// Odd 2N-periodic extension along `axis` of data given at coordinates `0..=N`.
///
/// The data must vanish (within `tol`, relative to its max) at the fixed points 0 and N;
/// the output is exactly 0 there.
pub fn odd_reflect(data: &ArrayD<f64>, axis: usize, n: usize, tol: f64) -> Result<ArrayD<f64>> {
    check_axis_len(data, axis, n + 1)?;
    let scale = data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for fixed in [0, n] {
        let worst = data
            .index_axis(Axis(axis), fixed)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > tol * scale {
            return Err(Error::Incompatible(format!(
                "odd reflection needs zero data at coordinate {fixed}, found {worst:e}"
            )));
        }
    }
    let ni = n as i64;
    Ok(extend_axis(data, axis, n, |x| match x {
        0 => None,
        x if x == ni => None,
        x if x > 0 => Some((x as usize, 1.0)),
        x => Some(((-x) as usize, -1.0)),
    }))
}

/// Even 2N-periodic extension along `axis` about the integer mirror `x ↦ −x`.
pub fn even_reflect_integer(data: &ArrayD<f64>, axis: usize, n: usize) -> Result<ArrayD<f64>> {
    check_axis_len(data, axis, n + 1)?;
    Ok(extend_axis(data, axis, n, |x| Some((x.unsigned_abs() as usize, 1.0))))
}

/// Even 2(N−1)-periodic extension along `axis` about the mirror `x ↦ 1 − x`,
/// from data given at coordinates `1..=N−1`.
pub fn even_reflect(data: &ArrayD<f64>, axis: usize, n: usize) -> Result<ArrayD<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument("even reflection needs N ≥ 2".into()));
    }
    check_axis_len(data, axis, n - 1)?;
    Ok(extend_axis(data, axis, n - 1, |x| {
        let y = if x >= 1 { x } else { 1 - x };
        Some(((y - 1) as usize, 1.0))
    }))
}

/// `v ↦ −v(−x)` along `axis` on periodic data (an involution).
pub fn reflect_odd_periodic(v: &ArrayD<f64>, axis: usize) -> ArrayD<f64> {
    let m = v.shape()[axis];
    ArrayD::from_shape_fn(v.raw_dim(), |idx| {
        let mut src = idx.slice().to_vec();
        src[axis] = (m - idx[axis]) % m;
        -v[IxDyn(&src)]
    })
}

/// `v ↦ v(1 − x)` along `axis` on periodic data (an involution).
pub fn reflect_even_half_periodic(v: &ArrayD<f64>, axis: usize) -> ArrayD<f64> {
    let m = v.shape()[axis];
    ArrayD::from_shape_fn(v.raw_dim(), |idx| {
        let mut src = idx.slice().to_vec();
        src[axis] = (m + 1 - idx[axis]) % m;
        v[IxDyn(&src)]
    })
}

fn check_axis_len(data: &ArrayD<f64>, axis: usize, len: usize) -> Result<()> {
    if axis >= data.ndim() || data.shape()[axis] != len {
        let mut expected = data.shape().to_vec();
        if axis < expected.len() {
            expected[axis] = len;
        }
        return Err(Error::ShapeMismatch {
            expected,
            got: data.shape().to_vec(),
        });
    }
    Ok(())
}

/// Strip function normal to one axis of the box, 2N-periodic in the others.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceComponent {
    pub axis: usize,
    pub strip: StripFunction,
}

impl FaceComponent {
    /// Value at box coordinates `x` (other axes may be any integer).
    pub fn value_at(&self, x: &[i64]) -> Result<f64> {
        let mut y: Vec<i64> = x
            .iter()
            .enumerate()
            .filter(|&(a, _)| a != self.axis)
            .map(|(_, &c)| c)
            .collect();
        y.push(x[self.axis]);
        self.strip.value(&y)
    }
}

impl LatticeFunction for FaceComponent {
    fn dim(&self) -> usize {
        self.strip.d()
    }

    fn value(&self, x: &[i64]) -> Result<f64> {
        self.value_at(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceCertificate {
    /// `‖∇wᵢ‖` on efull.
    pub gradient_norms: Vec<f64>,
    /// Max strip-interior Laplacian residual of each `wᵢ`.
    pub harmonic_residuals: Vec<f64>,
    /// `max |u − Σwᵢ|` over the box.
    pub reconstruction_residual: f64,
}

const FACE_TOL: f64 = 1e-8;

/// Split `u` into strip functions `w₁,…,w_d` with `Σwᵢ = u` on the box.
///
/// `wᵢ` is normal to axis `i`, solves the Dirichlet strip problem with period 2N,
/// and vanishes on the faces normal to earlier axes.
pub fn face_decomposition_dirichlet(
    u: &BoxHarmonic,
    p: PNorm,
) -> Result<(Vec<FaceComponent>, FaceCertificate)> {
    let domain = u.domain;
    let (d, n) = (domain.d(), domain.n());
    let mut residual = u.values().clone();
    let mut comps: Vec<FaceComponent> = Vec::with_capacity(d);
    let scale = u.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for axis in 0..d {
        let mut faces = Vec::with_capacity(2);
        for side in [0, n] {
            let mut block = residual.index_axis(Axis(axis), side).to_owned();
            for (pos, other) in (0..d).filter(|&b| b != axis).enumerate() {
                block = if other < axis {
                    odd_reflect(&block, pos, n, FACE_TOL)?
                } else {
                    even_reflect_integer(&block, pos, n)?
                };
            }
            faces.push(block);
        }
        let top = faces.pop().unwrap();
        let bottom = faces.pop().unwrap();
        let strip = dirichlet_strip_solve(&BoundaryPair::new(bottom, top)?, n)?;
        let comp = FaceComponent { axis, strip };
        for (idx, r) in residual.indexed_iter_mut() {
            let x: Vec<i64> = idx.slice().iter().map(|&i| i as i64).collect();
            *r -= comp.value_at(&x)?;
        }
        comps.push(comp);
    }
    let reconstruction_residual = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if reconstruction_residual > FACE_TOL * scale {
        return Err(Error::Residual {
            residual: reconstruction_residual,
            tol: FACE_TOL * scale,
        });
    }
    let gradient_norms = comps
        .iter()
        .map(|c| OrientedEdgeValues::gradient_of(c, domain, EdgeSetKind::Full).map(|g| g.norm(p)))
        .collect::<Result<Vec<_>>>()?;
    let harmonic_residuals = comps.iter().map(|c| c.strip.harmonic_residual()).collect();
    Ok((
        comps,
        FaceCertificate {
            gradient_norms,
            harmonic_residuals,
            reconstruction_residual,
        },
    ))
}
