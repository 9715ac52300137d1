//! Minimal dense 2x2 complex matrices.
//!
//! Everything the measurement algebra needs fits in hand-rolled 2x2
//! arithmetic; pulling in a general linear-algebra crate for this would be
//! overkill. Entries are row-major: `m[row][col]`.

use num_complex::Complex64;

pub type C64 = Complex64;

/// A 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2([[z, z], [z, z]])
    }

    pub fn identity() -> Self {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        Mat2([[o, z], [z, o]])
    }

    /// Build from real entries.
    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), d)
    }

    pub fn sigma_x() -> Self {
        Mat2::from_real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn sigma_y() -> Self {
        let i = C64::new(0.0, 1.0);
        Mat2::new(C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0))
    }

    pub fn sigma_z() -> Self {
        Mat2::from_real(1.0, 0.0, 0.0, -1.0)
    }

    pub fn add(&self, rhs: &Mat2) -> Self {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][c] + rhs.0[r][c];
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Mat2) -> Self {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][c] - rhs.0[r][c];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] *= s;
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Mat2) -> Self {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][0] * rhs.0[0][c] + self.0[r][1] * rhs.0[1][c];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Mat2::new(
            self.0[0][0].conj(),
            self.0[1][0].conj(),
            self.0[0][1].conj(),
            self.0[1][1].conj(),
        )
    }

    /// Apply to a column vector (a, b).
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest entrywise absolute difference from `rhs`.
    pub fn max_abs_diff(&self, rhs: &Mat2) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                m = m.max((self.0[r][c] - rhs.0[r][c]).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) < tol
    }

    /// Largest entrywise deviation from unitarity, max |U* U - I|.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&Mat2::identity())
    }
}
