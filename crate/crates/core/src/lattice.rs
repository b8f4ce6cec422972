//! Lattice geometry, edge sets, discrete operators and Lᵖ norms.
//!
//! Periodic axes with half-period `L` store the coordinate `x ∈ {−L+1,…,L}` at
//! index `x mod 2L`. This is the same layout the FFT uses, so grids can be
//! handed to [`crate::spectral`] without reordering.

use std::fmt;

use ndarray::{ArrayD, Dimension, IxDyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = Vec<i64>;

/// Storage index of the periodic coordinate `x` for half-period `l`.
pub fn wrap(x: i64, l: usize) -> usize {
    x.rem_euclid(2 * l as i64) as usize
}

/// Coordinate in `{−L+1,…,L}` stored at index `j`.
pub fn unwrap(j: usize, l: usize) -> i64 {
    if j <= l {
        j as i64
    } else {
        j as i64 - 2 * l as i64
    }
}

/// Reduce `x` into the fundamental interval `{−L+1,…,L}`.
pub fn reduce(x: i64, l: usize) -> i64 {
    unwrap(wrap(x, l), l)
}

/// Shape `[2L; dim]` of a periodic grid.
pub fn periodic_shape(dim: usize, l: usize) -> Vec<usize> {
    vec![2 * l; dim]
}

/// Exponent of an Lᵖ norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p.is_infinite() {
            Ok(PNorm::Infinity)
        } else {
            Ok(PNorm::Finite(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            PNorm::Finite(p) => p,
            PNorm::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(PNorm::Infinity),
            t => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse exponent {s:?}")))?;
                PNorm::new(p)
            }
        }
    }
}

/// `(Σ|f|ᵖ)^{1/p}`, or `max|f|` for p = ∞. Empty input has norm 0.
pub fn lp_norm<I>(values: I, p: PNorm) -> f64
where
    I: IntoIterator<Item = f64>,
{
    match p {
        PNorm::Infinity => values.into_iter().fold(0.0, |m, v| m.max(v.abs())),
        PNorm::Finite(p) => {
            // Scale by the max to avoid overflow for large p.
            let vals: Vec<f64> = values.into_iter().map(f64::abs).collect();
            let m = vals.iter().cloned().fold(0.0, f64::max);
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = vals.iter().map(|v| (v / m).powf(p)).sum();
            m * s.powf(1.0 / p)
        }
    }
}

/// `(h^d Σ|f|ᵖ)^{1/p}` over a periodic grid of dimension `d`.
pub fn normalized_lp_norm<I>(values: I, p: PNorm, h: f64, d: usize) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    match p {
        PNorm::Infinity => Err(Error::InvalidArgument(
            "normalized norm requires a finite exponent".into(),
        )),
        PNorm::Finite(pv) => Ok(h.powi(d as i32).powf(1.0 / pv) * lp_norm(values, p)),
    }
}

/// The cube `{0,…,N}^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxDomain {
    d: usize,
    n: usize,
}

impl BoxDomain {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("side length {n} < 2")));
        }
        Ok(BoxDomain { d, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n + 1; self.d]
    }

    pub fn num_vertices(&self) -> usize {
        (self.n + 1).pow(self.d as u32)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.d && x.iter().all(|&c| c >= 0 && c <= self.n as i64)
    }

    pub fn is_interior(&self, x: &[i64]) -> bool {
        x.len() == self.d && x.iter().all(|&c| c >= 1 && c < self.n as i64)
    }

    pub fn is_boundary(&self, x: &[i64]) -> bool {
        self.contains(x) && !self.is_interior(x)
    }

    /// Number of coordinates equal to 0 or N.
    pub fn codimension(&self, x: &[i64]) -> usize {
        x.iter().filter(|&&c| c == 0 || c == self.n as i64).count()
    }

    /// All vertices in lexicographic order.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.num_vertices());
        let mut x = vec![0i64; self.d];
        loop {
            out.push(x.clone());
            let mut axis = self.d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if x[axis] < self.n as i64 {
                    x[axis] += 1;
                    break;
                }
                x[axis] = 0;
            }
        }
    }

    pub fn linear_index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        Some(x.iter().fold(0usize, |acc, &c| acc * (self.n + 1) + c as usize))
    }

    pub fn vertex_at(&self, mut idx: usize) -> Vertex {
        let mut x = vec![0i64; self.d];
        for axis in (0..self.d).rev() {
            x[axis] = (idx % (self.n + 1)) as i64;
            idx /= self.n + 1;
        }
        x
    }

    /// etanT: vertices of the boundary shell, lexicographic.
    pub fn boundary_vertices(&self) -> Vec<Vertex> {
        self.vertices()
            .into_iter()
            .filter(|x| !self.is_interior(x))
            .collect()
    }

    pub fn interior_vertices(&self) -> Vec<Vertex> {
        self.vertices()
            .into_iter()
            .filter(|x| self.is_interior(x))
            .collect()
    }

    /// Lattice neighbours of `x` inside the box, lexicographic.
    pub fn neighbours(&self, x: &[i64]) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = neighbours(x)
            .into_iter()
            .filter(|y| self.contains(y))
            .collect();
        out.sort();
        out
    }

    fn edges_where(&self, keep: impl Fn(&[i64], &[i64]) -> bool) -> Vec<OrientedEdge> {
        let mut out = Vec::new();
        for tail in self.vertices() {
            for head in self.neighbours(&tail) {
                if keep(&tail, &head) {
                    out.push(OrientedEdge {
                        tail: tail.clone(),
                        head,
                    });
                }
            }
        }
        out
    }

    /// etan: oriented edges with both endpoints on the boundary shell.
    pub fn tangential_edges(&self) -> Vec<OrientedEdge> {
        self.edges_where(|t, h| !self.is_interior(t) && !self.is_interior(h))
    }

    /// enor: oriented edges from the boundary shell into the interior.
    pub fn normal_edges(&self) -> Vec<OrientedEdge> {
        self.edges_where(|t, h| !self.is_interior(t) && self.is_interior(h))
    }

    /// efull: oriented edges whose midpoint lies in `[0,N]^d ∖ [1,N−1]^d`.
    pub fn full_edges(&self) -> Vec<OrientedEdge> {
        let n = self.n as i64;
        self.edges_where(|t, h| {
            // Midpoint coordinates doubled: t + h lies in [2, 2N−2] on every axis iff inside.
            !t.iter().zip(h).all(|(&a, &b)| a + b >= 2 && a + b <= 2 * n - 2)
        })
    }

    pub fn edges(&self, kind: EdgeSetKind) -> Vec<OrientedEdge> {
        match kind {
            EdgeSetKind::Tangential => self.tangential_edges(),
            EdgeSetKind::Normal => self.normal_edges(),
            EdgeSetKind::Full => self.full_edges(),
        }
    }
}

/// All 2d lattice neighbours, unordered.
pub fn neighbours(x: &[i64]) -> Vec<Vertex> {
    let mut out = Vec::with_capacity(2 * x.len());
    for axis in 0..x.len() {
        for s in [-1, 1] {
            let mut y = x.to_vec();
            y[axis] += s;
            out.push(y);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub tail: Vertex,
    pub head: Vertex,
}

impl OrientedEdge {
    pub fn new(tail: Vertex, head: Vertex) -> Result<Self> {
        if tail.len() != head.len() {
            return Err(Error::InvalidArgument("endpoint dimensions differ".into()));
        }
        let dist: i64 = tail.iter().zip(&head).map(|(a, b)| (a - b).abs()).sum();
        if dist != 1 {
            return Err(Error::InvalidArgument(format!(
                "{tail:?} -> {head:?} is not a nearest-neighbour edge"
            )));
        }
        Ok(OrientedEdge { tail, head })
    }

    pub fn reverse(&self) -> Self {
        OrientedEdge {
            tail: self.head.clone(),
            head: self.tail.clone(),
        }
    }

    /// Axis along which the edge points.
    pub fn axis(&self) -> usize {
        self.tail
            .iter()
            .zip(&self.head)
            .position(|(a, b)| a != b)
            .expect("edge endpoints coincide")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeSetKind {
    Tangential,
    Normal,
    Full,
}

/// Real values on one of the edge sets of a box.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedEdgeValues {
    domain: BoxDomain,
    kind: EdgeSetKind,
    edges: Vec<OrientedEdge>,
    values: Vec<f64>,
}

impl OrientedEdgeValues {
    /// `values` must follow the enumeration order of `domain.edges(kind)`.
    pub fn new(domain: BoxDomain, kind: EdgeSetKind, values: Vec<f64>) -> Result<Self> {
        let edges = domain.edges(kind);
        if edges.len() != values.len() {
            return Err(Error::ShapeMismatch {
                expected: vec![edges.len()],
                got: vec![values.len()],
            });
        }
        Ok(OrientedEdgeValues {
            domain,
            kind,
            edges,
            values,
        })
    }

    pub fn gradient_of<F: LatticeFunction + ?Sized>(
        u: &F,
        domain: BoxDomain,
        kind: EdgeSetKind,
    ) -> Result<Self> {
        let edges = domain.edges(kind);
        let values = edges
            .iter()
            .map(|e| edge_gradient(u, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(OrientedEdgeValues {
            domain,
            kind,
            edges,
            values,
        })
    }

    pub fn domain(&self) -> BoxDomain {
        self.domain
    }

    pub fn kind(&self) -> EdgeSetKind {
        self.kind
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, e: &OrientedEdge) -> Option<f64> {
        self.edges
            .binary_search(e)
            .ok()
            .map(|i| self.values[i])
    }

    pub fn norm(&self, p: PNorm) -> f64 {
        lp_norm(self.values.iter().copied(), p)
    }
}

/// Anything that can be evaluated on lattice vertices.
pub trait LatticeFunction {
    fn dim(&self) -> usize;
    fn value(&self, x: &[i64]) -> Result<f64>;
}

/// Domain of a dense [`GridFunction`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridDomain {
    /// `{0,…,N}^d`, not periodic.
    Cube { d: usize, n: usize },
    /// `I_L^d`, 2L-periodic in every axis.
    Torus { d: usize, l: usize },
}

impl GridDomain {
    pub fn dim(&self) -> usize {
        match *self {
            GridDomain::Cube { d, .. } | GridDomain::Torus { d, .. } => d,
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match *self {
            GridDomain::Cube { d, n } => vec![n + 1; d],
            GridDomain::Torus { d, l } => periodic_shape(d, l),
        }
    }

    pub fn storage_index(&self, x: &[i64]) -> Result<Vec<usize>> {
        if x.len() != self.dim() {
            return Err(Error::OutOfDomain { vertex: x.to_vec() });
        }
        match *self {
            GridDomain::Cube { n, .. } => x
                .iter()
                .map(|&c| {
                    if c >= 0 && c <= n as i64 {
                        Ok(c as usize)
                    } else {
                        Err(Error::OutOfDomain { vertex: x.to_vec() })
                    }
                })
                .collect(),
            GridDomain::Torus { l, .. } => Ok(x.iter().map(|&c| wrap(c, l)).collect()),
        }
    }

    pub fn coordinates(&self, idx: &[usize]) -> Vertex {
        match *self {
            GridDomain::Cube { .. } => idx.iter().map(|&i| i as i64).collect(),
            GridDomain::Torus { l, .. } => idx.iter().map(|&i| unwrap(i, l)).collect(),
        }
    }
}

/// Dense real values on a box or torus.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    domain: GridDomain,
    values: ArrayD<f64>,
}

impl GridFunction {
    pub fn new(domain: GridDomain, values: ArrayD<f64>) -> Result<Self> {
        let expected = domain.shape();
        if values.shape() != expected.as_slice() {
            return Err(Error::ShapeMismatch {
                expected,
                got: values.shape().to_vec(),
            });
        }
        Ok(GridFunction { domain, values })
    }

    pub fn from_fn(domain: GridDomain, f: impl Fn(&[i64]) -> f64) -> Self {
        let values = ArrayD::from_shape_fn(IxDyn(&domain.shape()), |idx| {
            f(&domain.coordinates(idx.slice()))
        });
        GridFunction { domain, values }
    }

    pub fn domain(&self) -> GridDomain {
        self.domain
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut ArrayD<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> ArrayD<f64> {
        self.values
    }

    pub fn set(&mut self, x: &[i64], v: f64) -> Result<()> {
        let idx = self.domain.storage_index(x)?;
        self.values[IxDyn(&idx)] = v;
        Ok(())
    }
}

impl LatticeFunction for GridFunction {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn value(&self, x: &[i64]) -> Result<f64> {
        let idx = self.domain.storage_index(x)?;
        Ok(self.values[IxDyn(&idx)])
    }
}

/// Values on `I_L^{d−1} × {0,…,N}`, 2L-periodic in the first d−1 coordinates.
///
/// Storage shape is `[2L, …, 2L, N+1]`; the last axis is the height.
#[derive(Clone, Debug, PartialEq)]
pub struct StripFunction {
    d: usize,
    l: usize,
    n: usize,
    values: ArrayD<f64>,
}

impl StripFunction {
    pub fn shape(d: usize, l: usize, n: usize) -> Vec<usize> {
        let mut s = periodic_shape(d - 1, l);
        s.push(n + 1);
        s
    }

    pub fn new(d: usize, l: usize, n: usize, values: ArrayD<f64>) -> Result<Self> {
        if d < 2 || l < 1 || n < 1 {
            return Err(Error::InvalidArgument(format!(
                "invalid strip d={d}, L={l}, N={n}"
            )));
        }
        let expected = Self::shape(d, l, n);
        if values.shape() != expected.as_slice() {
            return Err(Error::ShapeMismatch {
                expected,
                got: values.shape().to_vec(),
            });
        }
        Ok(StripFunction { d, l, n, values })
    }

    pub fn zeros(d: usize, l: usize, n: usize) -> Self {
        StripFunction {
            d,
            l,
            n,
            values: ArrayD::zeros(IxDyn(&Self::shape(d, l, n))),
        }
    }

    /// Build from layers 0..=N, each of shape `[2L; d−1]`.
    pub fn from_layers(d: usize, l: usize, layers: &[ArrayD<f64>]) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidArgument("a strip needs at least two layers".into()));
        }
        let n = layers.len() - 1;
        let mut s = Self::zeros(d, l, n);
        for (y, layer) in layers.iter().enumerate() {
            s.set_layer(y, layer)?;
        }
        Ok(s)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub fn layer(&self, y: usize) -> Result<ArrayD<f64>> {
        if y > self.n {
            return Err(Error::OutOfDomain {
                vertex: vec![y as i64],
            });
        }
        Ok(self
            .values
            .index_axis(ndarray::Axis(self.d - 1), y)
            .to_owned())
    }

    pub fn set_layer(&mut self, y: usize, layer: &ArrayD<f64>) -> Result<()> {
        if y > self.n {
            return Err(Error::OutOfDomain {
                vertex: vec![y as i64],
            });
        }
        let mut view = self.values.index_axis_mut(ndarray::Axis(self.d - 1), y);
        if view.shape() != layer.shape() {
            return Err(Error::ShapeMismatch {
                expected: view.shape().to_vec(),
                got: layer.shape().to_vec(),
            });
        }
        view.assign(layer);
        Ok(())
    }

    pub fn layers(&self) -> Vec<ArrayD<f64>> {
        (0..=self.n).map(|y| self.layer(y).unwrap()).collect()
    }

    /// Max |Δw| over layers 1..N−1.
    pub fn harmonic_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, _) in self.values.indexed_iter() {
            let y = idx[self.d - 1];
            if y == 0 || y == self.n {
                continue;
            }
            let x: Vertex = (0..self.d)
                .map(|a| {
                    if a + 1 == self.d {
                        y as i64
                    } else {
                        unwrap(idx[a], self.l)
                    }
                })
                .collect();
            let r = discrete_laplacian(self, &x).expect("interior point");
            worst = worst.max(r.abs());
        }
        worst
    }
}

impl LatticeFunction for StripFunction {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[i64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::OutOfDomain { vertex: x.to_vec() });
        }
        let y = x[self.d - 1];
        if y < 0 || y > self.n as i64 {
            return Err(Error::OutOfDomain { vertex: x.to_vec() });
        }
        let mut idx: Vec<usize> = x[..self.d - 1].iter().map(|&c| wrap(c, self.l)).collect();
        idx.push(y as usize);
        Ok(self.values[IxDyn(&idx)])
    }
}

/// Mean of a strip over the layer `I_L^{d−1} × {y}`.
pub fn layer_mean(u: &StripFunction, y: usize) -> Result<f64> {
    let layer = u.layer(y)?;
    Ok(layer.mean().unwrap_or(0.0))
}

/// `Σᵢ [u(x+eᵢ)+u(x−eᵢ)] − 2d·u(x)`.
pub fn discrete_laplacian<F: LatticeFunction + ?Sized>(u: &F, x: &[i64]) -> Result<f64> {
    let center = u.value(x)?;
    let mut s = -2.0 * x.len() as f64 * center;
    for y in neighbours(x) {
        s += u.value(&y)?;
    }
    Ok(s)
}

/// `u(head) − u(tail)`.
pub fn edge_gradient<F: LatticeFunction + ?Sized>(u: &F, e: &OrientedEdge) -> Result<f64> {
    Ok(u.value(&e.head)? - u.value(&e.tail)?)
}
