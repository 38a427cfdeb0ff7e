//! 2x2 unitary helpers shared by rebasing, row lowering and the checker.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64 as C64;

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        Mat2([[o, z], [z, o]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Phase `p` such that `self ≈ e^{ip} other`, using the largest entry.
    pub fn relative_phase(&self, other: &Mat2) -> f64 {
        let mut best = (0, 0);
        let mut mag = -1.0;
        for r in 0..2 {
            for c in 0..2 {
                let n = other.0[r][c].norm();
                if n > mag {
                    mag = n;
                    best = (r, c);
                }
            }
        }
        let (r, c) = best;
        (self.0[r][c] / other.0[r][c]).arg()
    }

    /// Distance to `other` after removing the best global phase.
    pub fn phase_insensitive_diff(&self, other: &Mat2) -> f64 {
        let p = self.relative_phase(other);
        self.max_abs_diff(&other.scale(C64::from_polar(1.0, p)))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2([[C64::new(c, 0.0), -C64::from_polar(s, lambda)], [C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)]])
}

pub fn rz_matrix(a: f64) -> Mat2 {
    let z = C64::new(0.0, 0.0);
    Mat2([[C64::from_polar(1.0, -a / 2.0), z], [z, C64::from_polar(1.0, a / 2.0)]])
}

pub fn rx_matrix(a: f64) -> Mat2 {
    let (s, c) = (a / 2.0).sin_cos();
    Mat2([[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]])
}

pub fn ry_matrix(a: f64) -> Mat2 {
    let (s, c) = (a / 2.0).sin_cos();
    Mat2([[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]])
}

pub fn hadamard_matrix() -> Mat2 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Mat2([[h, h], [h, -h]])
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    } else if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// True when `a` is a multiple of 2*pi within `tol`.
pub fn is_zero_angle(a: f64, tol: f64) -> bool {
    normalize_angle(a).abs() <= tol
}

const GIMBAL_TOL: f64 = 1e-12;

/// Extracts `(theta, phi, lambda)` with `m = e^{i delta} U3(theta, phi, lambda)`.
///
/// theta = 2 atan2(|m10|, |m00|). When sin(theta/2) vanishes lambda is pinned
/// to 0 and the relative phase goes into phi; the cos(theta/2) = 0 case pins
/// lambda the same way.
pub fn u3_params(m: &Mat2) -> (f64, f64, f64) {
    let a = m.0;
    let theta = 2.0 * a[1][0].norm().atan2(a[0][0].norm());
    let (s, c) = (theta / 2.0).sin_cos();
    let (phi, lambda) = if s.abs() < GIMBAL_TOL {
        (a[1][1].arg() - a[0][0].arg(), 0.0)
    } else if c.abs() < GIMBAL_TOL {
        let alpha = (-a[0][1]).arg();
        (a[1][0].arg() - alpha, 0.0)
    } else {
        let alpha = a[0][0].arg();
        (a[1][0].arg() - alpha, (-a[0][1]).arg() - alpha)
    };
    (theta, normalize_angle(phi), normalize_angle(lambda))
}
