//! Chebyshev extreme-point grids, differentiation matrices and barycentric
//! interpolation on an affinely mapped interval.


use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `Nc + 1` Chebyshev–Lobatto nodes on `[xi_l, xi_r]`, increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebGrid {
    pub nc: usize,
    pub xi_l: f64,
    pub xi_r: f64,
    pub nodes: Vec<f64>,
}

impl ChebGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn theta(&self, j: usize) -> f64 {
        PI * j as f64 / self.nc as f64
    }

    /// Reference coordinate in `[-1, 1]`.
    pub fn to_reference(&self, xi: f64) -> f64 {
        (2.0 * xi - self.xi_l - self.xi_r) / (self.xi_r - self.xi_l)
    }
}

/// Builds the grid; `Nc ≥ 2` is accepted so that tiny grids can be inspected,
/// solvers require more.
pub fn build_grid(nc: usize, xi_l: f64, xi_r: f64) -> Result<ChebGrid> {
    if nc < 2 || !(xi_l < xi_r) || !xi_l.is_finite() || !xi_r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid needs Nc >= 2 and a finite interval xi_l < xi_r, got Nc = {nc}, [{xi_l}, {xi_r}]"
        )));
    }
    let mid = 0.5 * (xi_l + xi_r);
    let half = 0.5 * (xi_r - xi_l);
    // reference nodes -cos(πj/Nc), mirrored so the grid is exactly symmetric
    let reference: Vec<f64> = (0..=nc)
        .map(|j| {
            if 2 * j == nc {
                0.0
            } else if 2 * j < nc {
                -(PI * j as f64 / nc as f64).cos()
            } else {
                (PI * (nc - j) as f64 / nc as f64).cos()
            }
        })
        .collect();
    let mut nodes: Vec<f64> = reference.iter().map(|s| mid + half * s).collect();
    nodes[0] = xi_l;
    nodes[nc] = xi_r;
    Ok(ChebGrid { nc, xi_l, xi_r, nodes })
}

/// Dense differentiation matrices `D1..D4` with the affine chain-rule factor included.
#[derive(Clone, Debug)]
pub struct DiffOps {
    d: [DMatrix<f64>; 4],
}

impl DiffOps {
    /// `D_k`, `k = 1..=4`.
    pub fn get(&self, k: usize) -> &DMatrix<f64> {
        assert!((1..=4).contains(&k), "derivative order 1..=4");
        &self.d[k - 1]
    }

    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d[0]
    }

    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d[1]
    }

    pub fn d3(&self) -> &DMatrix<f64> {
        &self.d[2]
    }

    pub fn d4(&self) -> &DMatrix<f64> {
        &self.d[3]
    }

    pub fn size(&self) -> usize {
        self.d[0].nrows()
    }

    /// `D_k v` for complex node values, summed as `Σ_{j≠i} D_ij (v_j - v_i)`.
    ///
    /// Equivalent to the plain product because rows sum to zero, but the
    /// large entries next to the diagonal multiply small differences, which
    /// keeps endpoint rows of `D2..D4` an order of magnitude more accurate.
    pub fn apply(&self, k: usize, v: &[Complex64]) -> Vec<Complex64> {
        (0..v.len()).map(|i| self.apply_row(k, i, v)).collect()
    }

    /// `(D_k v)_i` for a single row, in the difference form of [`DiffOps::apply`].
    pub fn apply_row(&self, k: usize, row: usize, v: &[Complex64]) -> Complex64 {
        let m = self.get(k);
        assert_eq!(m.ncols(), v.len());
        let vi = v[row];
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, vj) in v.iter().enumerate() {
            if j != row {
                acc += m[(row, j)] * (vj - vi);
            }
        }
        acc
    }
}

/// Real matrix times complex vector, plain summation.
pub fn apply_real(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(m.ncols(), v.len());
    let n = v.len();
    let re = nalgebra::DVector::from_iterator(n, v.iter().map(|z| z.re));
    let im = nalgebra::DVector::from_iterator(n, v.iter().map(|z| z.im));
    let a = m * re;
    let b = m * im;
    a.iter().zip(b.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
}

fn fix_diagonal(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if j != i {
                s += m[(i, j)];
            }
        }
        m[(i, i)] = -s;
    }
}

pub fn build_diff_ops(grid: &ChebGrid) -> DiffOps {
    let n = grid.nc;
    let size = n + 1;
    // ratio[i][j] = a_i / a_j with a_i = prod_{k != i} (y_i - y_k) ∝ (-1)^i c_i
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let ratio = |i: usize, j: usize| {
        let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * c(i) / c(j)
    };
    // inv_diff[i][j] = 1 / (y_i - y_j) through a product of sines
    let mut inv_diff = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            if i != j {
                let ti = grid.theta(i);
                let tj = grid.theta(j);
                inv_diff[(i, j)] = 1.0 / (2.0 * (0.5 * (ti + tj)).sin() * (0.5 * (ti - tj)).sin());
            }
        }
    }
    let mut d1 = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            if i != j {
                d1[(i, j)] = ratio(i, j) * inv_diff[(i, j)];
            }
        }
    }
    fix_diagonal(&mut d1);
    // D2 = D1 D1, D3 = D1 D2, D4 = D2 D2; diagonals by negative sums
    let mut mats = vec![d1];
    for k in 2..=4 {
        let mut d = &mats[k / 2 - 1] * &mats[k.div_ceil(2) - 1];
        fix_diagonal(&mut d);
        mats.push(d);
    }
    let scale = 2.0 / (grid.xi_r - grid.xi_l);
    for (k, m) in mats.iter_mut().enumerate() {
        *m *= scale.powi(k as i32 + 1);
    }
    let mut it = mats.into_iter();
    let d = std::array::from_fn(|_| it.next().unwrap());
    DiffOps { d }
}

/// Barycentric interpolation of node values at `xi`.
pub fn interpolate(grid: &ChebGrid, values: &[Complex64], xi: f64) -> Result<Complex64> {
    if values.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values for a grid of {} nodes",
            values.len(),
            grid.len()
        )));
    }
    if !(xi >= grid.xi_l && xi <= grid.xi_r) {
        return Err(Error::OutOfInterval {
            query: xi,
            left: grid.xi_l,
            right: grid.xi_r,
        });
    }
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (j, (&node, &v)) in grid.nodes.iter().zip(values).enumerate() {
        let diff = xi - node;
        if diff == 0.0 {
            return Ok(v);
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == grid.nc {
            w *= 0.5;
        }
        let q = w / diff;
        num += q * v;
        den += q;
    }
    Ok(num / den)
}
