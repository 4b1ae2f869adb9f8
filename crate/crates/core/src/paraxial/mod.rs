//! Paraxial optics: fundamental solutions `g`, `h` of `R″ + α²R = 0` by
//! several independent routes, Larmor rotation, lab-frame transfer maps,
//! centroid trajectories and cardinal elements.

mod glaser;
mod imaging;
mod ode_route;
mod peano_baker;
mod powerlaw;
mod solver;

pub use glaser::{glaser_image_planes, glaser_larmor_angle, glaser_pair};
pub use imaging::{
    cardinal_elements, cardinal_elements_with_tol, find_image_plane, find_image_plane_with,
    CardinalElements, ImageSearch,
};
pub use ode_route::{ode_pair, ode_pairs_at, DEFAULT_ODE_REL_TOL};
pub use peano_baker::{peano_baker_grid, peano_baker_pair, peano_baker_path, PeanoBakerPair};
pub use powerlaw::{
    default_z_start, powerlaw_basis, powerlaw_pair, powerlaw_pair_neg, powerlaw_pair_pos,
};
pub use solver::{PairSolver, Route};

use crate::error::Result;
use crate::fields::LensStrength;
use crate::quadrature::{integrate_scalar, QuadOptions};

/// Values of the two fundamental solutions at `z` for initial plane `zi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalPair {
    pub zi: f64,
    pub z: f64,
    pub g: f64,
    pub g_prime: f64,
    pub h: f64,
    pub h_prime: f64,
}

impl FundamentalPair {
    pub fn identity(zi: f64) -> Self {
        Self { zi, z: zi, g: 1.0, g_prime: 0.0, h: 0.0, h_prime: 1.0 }
    }

    /// Free-space pair: `g = 1`, `h = z − zi`.
    pub fn drift(zi: f64, z: f64) -> Self {
        Self { zi, z, g: 1.0, g_prime: 0.0, h: z - zi, h_prime: 1.0 }
    }

    pub fn from_matrix(zi: f64, z: f64, m: [[f64; 2]; 2]) -> Self {
        Self { zi, z, g: m[0][0], h: m[0][1], g_prime: m[1][0], h_prime: m[1][1] }
    }

    /// `[[g, h], [g′, h′]]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.g, self.h], [self.g_prime, self.h_prime]]
    }

    pub fn wronskian(&self) -> f64 {
        self.g * self.h_prime - self.g_prime * self.h
    }

    /// `self ∘ earlier`: the pair from `earlier.zi` to `self.z`, given
    /// `earlier.z == self.zi`.
    pub fn compose(&self, earlier: &FundamentalPair) -> FundamentalPair {
        let a = self.matrix();
        let b = earlier.matrix();
        FundamentalPair::from_matrix(earlier.zi, self.z, mat2_mul(&a, &b))
    }

    /// Pair running from `z` back to `zi`.
    pub fn inverse(&self) -> FundamentalPair {
        let w = self.wronskian();
        FundamentalPair {
            zi: self.z,
            z: self.zi,
            g: self.h_prime / w,
            h: -self.h / w,
            g_prime: -self.g_prime / w,
            h_prime: self.g / w,
        }
    }
}

pub(crate) fn mat2_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Larmor rotation `[[cos θ, sin θ], [−sin θ, cos θ]]`, mapping rotating-frame
/// coordinates to lab coordinates.
pub fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// Position and canonical transverse momentum over `p0` of a ray or of the
/// centroid of a wavepacket.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CentroidState {
    pub x: f64,
    pub y: f64,
    pub px_over_p0: f64,
    pub py_over_p0: f64,
}

impl CentroidState {
    pub fn new(x: f64, y: f64, px_over_p0: f64, py_over_p0: f64) -> Self {
        Self { x, y, px_over_p0, py_over_p0 }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.px_over_p0, self.py_over_p0]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(s * self.x, s * self.y, s * self.px_over_p0, s * self.py_over_p0)
    }
}

/// Lab-frame 4×4 transfer map acting on `(x, y, px/p0, py/p0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMap {
    pub pair: FundamentalPair,
    pub theta: f64,
    pub matrix: [[f64; 4]; 4],
}

impl TransferMap {
    pub fn rotation(&self) -> [[f64; 2]; 2] {
        rotation(self.theta)
    }

    pub fn apply(&self, s: &CentroidState) -> CentroidState {
        let v = s.to_array();
        let mut out = [0.0; 4];
        for (i, row) in self.matrix.iter().enumerate() {
            out[i] = row.iter().zip(&v).map(|(m, x)| m * x).sum();
        }
        CentroidState::from_array(out)
    }

    pub fn determinant(&self) -> f64 {
        det4(&self.matrix)
    }

    /// `self · earlier`.
    pub fn compose(&self, earlier: &TransferMap) -> TransferMap {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.matrix[i][k] * earlier.matrix[k][j]).sum();
            }
        }
        TransferMap { pair: self.pair.compose(&earlier.pair), theta: self.theta + earlier.theta, matrix: m }
    }
}

pub(crate) fn det4(m: &[[f64; 4]; 4]) -> f64 {
    // Laplace expansion along the first row with 3×3 minors.
    let minor = |c: usize| {
        let cols: Vec<usize> = (0..4).filter(|&j| j != c).collect();
        let r = |i: usize, j: usize| m[i][cols[j]];
        r(1, 0) * (r(2, 1) * r(3, 2) - r(2, 2) * r(3, 1))
            - r(1, 1) * (r(2, 0) * r(3, 2) - r(2, 2) * r(3, 0))
            + r(1, 2) * (r(2, 0) * r(3, 1) - r(2, 1) * r(3, 0))
    };
    (0..4).map(|c| if c % 2 == 0 { 1.0 } else { -1.0 } * m[0][c] * minor(c)).sum()
}

/// Assembles the lab-frame map `[[g·R, h·R], [g′·R, h′·R]]`.
pub fn transfer_map(pair: FundamentalPair, theta: f64) -> TransferMap {
    let r = rotation(theta);
    let blocks = [[pair.g, pair.h], [pair.g_prime, pair.h_prime]];
    let mut m = [[0.0; 4]; 4];
    for bi in 0..2 {
        for bj in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    m[2 * bi + i][2 * bj + j] = blocks[bi][bj] * r[i][j];
                }
            }
        }
    }
    TransferMap { pair, theta, matrix: m }
}

/// Larmor angle `θ(z, zi) = ∫ α dz` by adaptive quadrature; `tol` is the
/// absolute error target in radians.
pub fn larmor_angle(ls: &LensStrength, zi: f64, z: f64, tol: f64) -> Result<f64> {
    if zi == z {
        return Ok(0.0);
    }
    ls.profile.check_interval(zi, z)?;
    let breaks = ls.profile.breakpoints(zi, z);
    let opts = QuadOptions { abs_tol: tol, rel_tol: 0.0, max_intervals: 4000 };
    let (v, _) = integrate_scalar(|t| ls.alpha(t), zi, z, &breaks, opts)?;
    Ok(v)
}

/// Applies the transfer map from `zi` to each sample plane.
pub fn trace_centroid(
    ls: &LensStrength,
    initial: CentroidState,
    zi: f64,
    z_samples: &[f64],
) -> Result<Vec<(f64, CentroidState)>> {
    if z_samples.is_empty() {
        return Ok(Vec::new());
    }
    let lo = z_samples.iter().copied().fold(zi, f64::min);
    let hi = z_samples.iter().copied().fold(zi, f64::max);
    let solver = PairSolver::new(ls, zi, (lo, hi))?;
    let mut out = Vec::with_capacity(z_samples.len());
    for &z in z_samples {
        let pair = solver.pair_at(z)?;
        let theta = solver.larmor_angle(z)?;
        out.push((z, transfer_map(pair, theta).apply(&initial)));
    }
    Ok(out)
}
