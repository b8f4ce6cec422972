//! Dyadic rectangles, α-differences, local and total variation of periodic symbols.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::reduce;
use crate::spectral::PeriodicSymbol;

pub type DyadicIndex = Vec<i64>;

/// Endpoints of `D(ℓ)` with openness flags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

fn pow2(e: i64) -> f64 {
    2f64.powi(e as i32)
}

/// `D(ℓ) = [2^{ℓ−1}, 2^ℓ)` for ℓ ≥ 1, `(−1,1)` for ℓ = 0, `(−2^{|ℓ|}, −2^{|ℓ|−1}]` for ℓ ≤ −1.
pub fn dyadic_interval(l: i64) -> Interval {
    match l {
        0 => Interval {
            lo: -1.0,
            hi: 1.0,
            lo_closed: false,
            hi_closed: false,
        },
        l if l > 0 => Interval {
            lo: pow2(l - 1),
            hi: pow2(l),
            lo_closed: true,
            hi_closed: false,
        },
        l => Interval {
            lo: -pow2(-l),
            hi: -pow2(-l - 1),
            lo_closed: false,
            hi_closed: true,
        },
    }
}

/// The `ℓ` with `ν ∈ D(ℓ)`.
pub fn dyadic_index_1d(nu: i64) -> i64 {
    let bits = |m: u64| 64 - m.leading_zeros() as i64;
    match nu {
        0 => 0,
        n if n > 0 => bits(n as u64),
        n => -bits(n.unsigned_abs()),
    }
}

/// Per-axis dyadic index; with `Some(L)` coordinates are first reduced into `I_L`.
pub fn dyadic_index_of(nu: &[i64], period: Option<usize>) -> DyadicIndex {
    nu.iter()
        .map(|&x| dyadic_index_1d(period.map_or(x, |l| reduce(x, l))))
        .collect()
}

/// Integer range `D(ℓ) ∩ I_L` as `(lo, hi)`, or `None` if empty.
pub fn dyadic_range(l: i64, big_l: usize) -> Option<(i64, i64)> {
    let big_l = big_l as i64;
    let (lo, hi) = match l {
        0 => (0, 0),
        l if l > 0 => {
            if l - 1 >= 62 {
                return None;
            }
            let lo = 1i64 << (l - 1);
            (lo, (2 * lo - 1).min(big_l))
        }
        l => {
            if -l - 1 >= 62 {
                return None;
            }
            let a = 1i64 << (-l - 1);
            ((-2 * a + 1).max(-big_l + 1), -a)
        }
    };
    (lo <= hi).then_some((lo, hi))
}

/// Dyadic indices along one axis whose range meets `I_L`.
pub fn axis_indices(big_l: usize) -> Vec<i64> {
    let mut out = vec![0];
    let mut l = 1;
    while dyadic_range(l, big_l).is_some() {
        out.push(l);
        l += 1;
    }
    let mut l = -1;
    while dyadic_range(l, big_l).is_some() {
        out.push(l);
        l -= 1;
    }
    out.sort();
    out
}

/// All dyadic indices in dimension `dim` with nonempty rectangle in `I_L^dim`.
pub fn all_indices(dim: usize, big_l: usize) -> Vec<DyadicIndex> {
    let axis = axis_indices(big_l);
    let mut out: Vec<DyadicIndex> = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&l| {
                    let mut k = prefix.clone();
                    k.push(l);
                    k
                })
            })
            .collect();
    }
    out
}

/// `Δᵢ^α a`: forward difference along `axis` when `alpha = 1`, identity when 0.
pub fn alpha_difference(a: &PeriodicSymbol, axis: usize, alpha: u8) -> PeriodicSymbol {
    if alpha == 0 {
        return a.clone();
    }
    PeriodicSymbol::from_fn(a.dim(), a.l(), |nu| {
        let mut next = nu.to_vec();
        next[axis] += 1;
        a.at(&next) - a.at(nu)
    })
}

/// `Δ^α a` for a full flag vector.
pub fn mixed_difference(a: &PeriodicSymbol, alpha: &[u8]) -> PeriodicSymbol {
    alpha
        .iter()
        .enumerate()
        .fold(a.clone(), |acc, (axis, &al)| alpha_difference(&acc, axis, al))
}

fn alpha_vectors(dim: usize) -> Vec<Vec<u8>> {
    (0..1usize << dim)
        .map(|bits| (0..dim).map(|j| ((bits >> j) & 1) as u8).collect())
        .collect()
}

/// Nested reduction over `ranges`, outermost axis first: sum where `alpha = 1`, sup where 0.
fn mixed_reduce(b: &PeriodicSymbol, ranges: &[(i64, i64)], alpha: &[u8]) -> f64 {
    fn rec(b: &PeriodicSymbol, ranges: &[(i64, i64)], alpha: &[u8], nu: &mut Vec<i64>) -> f64 {
        let axis = nu.len();
        if axis == ranges.len() {
            return b.at(nu).norm();
        }
        let (lo, hi) = ranges[axis];
        let mut acc = 0.0f64;
        for x in lo..=hi {
            nu.push(x);
            let v = rec(b, ranges, alpha, nu);
            nu.pop();
            acc = if alpha[axis] == 1 { acc + v } else { acc.max(v) };
        }
        acc
    }
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return 0.0;
    }
    rec(b, ranges, alpha, &mut Vec::with_capacity(ranges.len()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalVariation {
    pub value: f64,
    /// The rectangle `∏(D(kⱼ) ∩ I_L)` was empty.
    pub empty: bool,
}

/// `lvar(a, k)`: α-maximized mixed sums (with each summed set's max removed) and sups.
pub fn local_variation(a: &PeriodicSymbol, k: &[i64]) -> Result<LocalVariation> {
    check_dim(a, k)?;
    let Some(rect) = rectangle(k, a.l()) else {
        return Ok(LocalVariation {
            value: 0.0,
            empty: true,
        });
    };
    let value = alpha_vectors(a.dim())
        .iter()
        .map(|alpha| {
            let b = mixed_difference(a, alpha);
            let ranges: Vec<(i64, i64)> = rect
                .iter()
                .zip(alpha)
                .map(|(&(lo, hi), &al)| if al == 1 { (lo, hi - 1) } else { (lo, hi) })
                .collect();
            mixed_reduce(&b, &ranges, alpha)
        })
        .fold(0.0, f64::max);
    Ok(LocalVariation {
        value,
        empty: false,
    })
}

/// `max_k lvar(a, k)` over all nonempty rectangles.
pub fn max_local_variation(a: &PeriodicSymbol) -> f64 {
    all_indices(a.dim(), a.l())
        .iter()
        .map(|k| local_variation(a, k).map(|v| v.value).unwrap_or(0.0))
        .fold(0.0, f64::max)
}

/// `var(a)`: sup over rectangles of the α-maximized untruncated mixed sums.
pub fn total_variation(a: &PeriodicSymbol) -> f64 {
    let dim = a.dim();
    let indices = all_indices(dim, a.l());
    let mut best = 0.0f64;
    for alpha in alpha_vectors(dim) {
        let b = mixed_difference(a, &alpha);
        for k in &indices {
            if let Some(rect) = rectangle(k, a.l()) {
                best = best.max(mixed_reduce(&b, &rect, &alpha));
            }
        }
    }
    best
}

fn rectangle(k: &[i64], big_l: usize) -> Option<Vec<(i64, i64)>> {
    k.iter().map(|&kj| dyadic_range(kj, big_l)).collect()
}

fn check_dim(a: &PeriodicSymbol, k: &[i64]) -> Result<()> {
    if k.len() != a.dim() {
        return Err(Error::InvalidArgument(format!(
            "dyadic index of length {} for a {}-dimensional symbol",
            k.len(),
            a.dim()
        )));
    }
    Ok(())
}

/// `a(ν) = A_{K(ν)}(ν)` on `I_L^dim`.
pub fn glue_local_symbols(
    family: &BTreeMap<DyadicIndex, PeriodicSymbol>,
    dim: usize,
    big_l: usize,
) -> Result<PeriodicSymbol> {
    for k in all_indices(dim, big_l) {
        if !family.contains_key(&k) {
            return Err(Error::MissingSymbol(k));
        }
    }
    let mut out = PeriodicSymbol::constant(dim, big_l, Complex64::new(0.0, 0.0));
    for k in all_indices(dim, big_l) {
        let member = &family[&k];
        let rect = rectangle(&k, big_l).expect("listed indices are nonempty");
        for_each_point(&rect, |nu| out.set(nu, member.at(nu)));
    }
    Ok(out)
}

/// Visit every integer point of a product of ranges, lexicographically.
pub fn for_each_point(ranges: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut nu: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&nu);
        let mut axis = ranges.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if nu[axis] < ranges[axis].1 {
                nu[axis] += 1;
                break;
            }
            nu[axis] = ranges[axis].0;
        }
    }
}

/// `J(k)`: first axis where `|kⱼ|` is maximal.
pub fn max_coordinate_axis(k: &[i64]) -> usize {
    let m = k.iter().map(|x| x.abs()).max().unwrap_or(0);
    k.iter().position(|x| x.abs() == m).unwrap_or(0)
}

/// Closed real rectangle spanned by `D(kⱼ) ∩ [−L+1, L]`.
fn real_rectangle(k: &[i64], big_l: usize) -> Option<Vec<(f64, f64)>> {
    let lf = big_l as f64;
    k.iter()
        .map(|&kj| {
            let iv = dyadic_interval(kj);
            let lo = iv.lo.max(-lf + 1.0);
            let hi = iv.hi.min(lf);
            (lo < hi).then_some((lo, hi))
        })
        .collect()
}

const SAMPLES_PER_AXIS: usize = 64;
const STEP_FACTOR: f64 = 1e-4;

/// Sampled estimate of `max_α sup |ξ^α ∂^α A(ξ)|` over the rectangle of `k`.
///
/// Derivatives are central differences; points lie on a 64-per-axis grid including endpoints.
pub fn derivative_variation_bound<F>(a: F, k: &[i64], big_l: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> Complex64,
{
    let rect = real_rectangle(k, big_l)
        .ok_or_else(|| Error::InvalidArgument(format!("empty rectangle for {k:?}")))?;
    let dim = k.len();
    let steps: Vec<f64> = rect
        .iter()
        .map(|&(lo, hi)| STEP_FACTOR * lo.abs().max(hi.abs()).max(1.0))
        .collect();
    let grid: Vec<Vec<f64>> = rect
        .iter()
        .map(|&(lo, hi)| {
            (0..SAMPLES_PER_AXIS)
                .map(|j| lo + (hi - lo) * j as f64 / (SAMPLES_PER_AXIS - 1) as f64)
                .collect()
        })
        .collect();
    let alphas = alpha_vectors(dim);
    let mut best = 0.0f64;
    let ranges: Vec<(i64, i64)> = vec![(0, SAMPLES_PER_AXIS as i64 - 1); dim];
    for_each_point(&ranges, |idx| {
        let xi: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(a, &j)| grid[a][j as usize])
            .collect();
        for alpha in &alphas {
            let d = mixed_partial(&a, &xi, alpha, &steps);
            let weight: f64 = xi
                .iter()
                .zip(alpha)
                .map(|(x, &al)| if al == 1 { x.abs() } else { 1.0 })
                .product();
            best = best.max(weight * d.norm());
        }
    });
    Ok(best)
}

fn mixed_partial<F>(a: &F, xi: &[f64], alpha: &[u8], steps: &[f64]) -> Complex64
where
    F: Fn(&[f64]) -> Complex64,
{
    let axes: Vec<usize> = (0..xi.len()).filter(|&j| alpha[j] == 1).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for signs in 0..1usize << axes.len() {
        let mut p = xi.to_vec();
        let mut sign = 1.0;
        for (b, &axis) in axes.iter().enumerate() {
            if (signs >> b) & 1 == 1 {
                p[axis] += steps[axis];
            } else {
                p[axis] -= steps[axis];
                sign = -sign;
            }
        }
        total += sign * a(&p);
    }
    let denom: f64 = axes.iter().map(|&axis| 2.0 * steps[axis]).product();
    total / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn intervals() {
        assert_eq!(dyadic_interval(1), Interval { lo: 1.0, hi: 2.0, lo_closed: true, hi_closed: false });
        assert!(dyadic_interval(0).contains(0.5) && !dyadic_interval(0).contains(1.0));
        let m2 = dyadic_interval(-2);
        assert_eq!((m2.lo, m2.hi), (-4.0, -2.0));
        assert!(m2.contains(-2.0) && !m2.contains(-4.0));
    }

    #[test]
    fn indices() {
        assert_eq!(dyadic_index_1d(0), 0);
        assert_eq!(dyadic_index_1d(3), 2);
        assert_eq!(dyadic_index_1d(-1), -1);
        assert_eq!(dyadic_index_1d(-2), -2);
        assert_eq!(dyadic_index_1d(4), 3);
        assert_eq!(dyadic_index_of(&[9], Some(4)), vec![1]);
    }

    #[test]
    fn ranges_meet_fundamental_domain() {
        assert_eq!(dyadic_range(2, 4), Some((2, 3)));
        assert_eq!(dyadic_range(3, 4), Some((4, 4)));
        assert_eq!(dyadic_range(4, 4), None);
        assert_eq!(dyadic_range(-2, 4), Some((-3, -2)));
        assert_eq!(dyadic_range(-3, 4), None);
        assert_eq!(axis_indices(4), vec![-2, -1, 0, 1, 2, 3]);
    }

    #[test]
    fn difference_of_identity_symbol() {
        let a = PeriodicSymbol::from_fn(1, 4, |nu| c(nu[0] as f64));
        let d = alpha_difference(&a, 0, 1);
        for nu in -3..=4i64 {
            let expect = if nu == 4 { -7.0 } else { 1.0 };
            assert_eq!(d.at(&[nu]), c(expect));
        }
        assert_eq!(alpha_difference(&a, 0, 0), a);
    }

    #[test]
    fn local_variation_of_identity_symbol() {
        let a = PeriodicSymbol::from_fn(1, 4, |nu| c(nu[0] as f64));
        assert_eq!(local_variation(&a, &[2]).unwrap().value, 3.0);
        assert_eq!(local_variation(&a, &[3]).unwrap().value, 4.0);
        assert_eq!(local_variation(&a, &[0]).unwrap().value, 0.0);
        let e = local_variation(&a, &[5]).unwrap();
        assert!(e.empty && e.value == 0.0);
    }

    #[test]
    fn constant_symbol_variations() {
        let a = PeriodicSymbol::constant(2, 4, c(-2.5));
        for k in all_indices(2, 4) {
            assert_eq!(local_variation(&a, &k).unwrap().value, 2.5);
        }
        assert_eq!(total_variation(&a), 2.5);
    }

    #[test]
    fn inverse_bound_closed_form() {
        let m = derivative_variation_bound(|xi| c(1.0 / xi[0]), &[2], 8).unwrap();
        assert!((m - 0.5).abs() < 1e-6, "{m}");
        let m = derivative_variation_bound(|_| c(3.0), &[1, -2], 8).unwrap();
        assert!((m - 3.0).abs() < 1e-9);
    }

    #[test]
    fn selector() {
        assert_eq!(max_coordinate_axis(&[0, 3]), 1);
        assert_eq!(max_coordinate_axis(&[-3, 3]), 0);
        assert_eq!(max_coordinate_axis(&[0, 0]), 0);
    }
}
