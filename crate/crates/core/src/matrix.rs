//! Dense complex 4×4 / 2×2 matrix and 4-vector arithmetic.
//!
//! Everything is stack-allocated and `Copy`; the hot loops (time evolution,
//! grid maps) never touch the heap. Entries are double-precision complex
//! numbers throughout.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Complex 4-component state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector4(pub [C64; 4]);

/// Dense complex 4×4 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[C64; 4]; 4]);

/// Dense complex 2×2 matrix (overlap blocks, QGT blocks, Wilson links).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[C64; 2]; 2]);

/// The four Pauli matrices σ₀, σ₁, σ₂, σ₃ as 2×2 complex arrays.
pub fn pauli(index: usize) -> [[C64; 2]; 2] {
    match index {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("Pauli index must be 0..=3"),
    }
}

impl Vector4 {
    pub fn zero() -> Self {
        Vector4([ZERO; 4])
    }

    /// ⟨self|other⟩ with the left argument conjugated.
    pub fn dot(&self, other: &Vector4) -> C64 {
        (0..4).map(|i| self.0[i].conj() * other.0[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Vector4 {
        self.scale(ONE / self.norm())
    }

    pub fn scale(&self, s: C64) -> Vector4 {
        Vector4([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    /// self += s * other, in place.
    pub fn axpy(&mut self, s: C64, other: &Vector4) {
        for i in 0..4 {
            self.0[i] += s * other.0[i];
        }
    }

    /// |self⟩⟨other|.
    pub fn outer(&self, other: &Vector4) -> Matrix4 {
        let mut m = Matrix4::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[i] * other.0[j].conj();
            }
        }
        m
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.0.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Real part, as plain f64 components. Valid for real-gauge states.
    pub fn re(&self) -> [f64; 4] {
        [self.0[0].re, self.0[1].re, self.0[2].re, self.0[3].re]
    }
}

impl Add for Vector4 {
    type Output = Vector4;
    fn add(self, rhs: Vector4) -> Vector4 {
        let mut v = self;
        for i in 0..4 {
            v.0[i] += rhs.0[i];
        }
        v
    }
}

impl Sub for Vector4 {
    type Output = Vector4;
    fn sub(self, rhs: Vector4) -> Vector4 {
        let mut v = self;
        for i in 0..4 {
            v.0[i] -= rhs.0[i];
        }
        v
    }
}

impl Matrix4 {
    pub fn zero() -> Self {
        Matrix4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Matrix4::zero();
        for i in 0..4 {
            m.0[i][i] = ONE;
        }
        m
    }

    /// Kronecker product a ⊗ b of two 2×2 blocks; the first factor indexes
    /// the outer block structure. Basis order (0,0),(0,1),(1,0),(1,1).
    pub fn kron(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> Matrix4 {
        let mut m = Matrix4::zero();
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        m.0[2 * i + p][2 * j + q] = a[i][j] * b[p][q];
                    }
                }
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Matrix4 {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Matrix4 {
        let mut m = Matrix4::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Matrix4 {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for e in row.iter_mut() {
                *e = e.conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2] + self.0[3][3]
    }

    /// Entrywise max-modulus norm ‖M‖_∞.
    pub fn inf_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    /// ‖M − M†‖_∞.
    pub fn hermiticity_residual(&self) -> f64 {
        (*self - self.adjoint()).inf_norm()
    }

    pub fn mul_vec(&self, v: &Vector4) -> Vector4 {
        let mut out = Vector4::zero();
        for i in 0..4 {
            let row = &self.0[i];
            out.0[i] = row[0] * v.0[0] + row[1] * v.0[1] + row[2] * v.0[2] + row[3] * v.0[3];
        }
        out
    }

    /// ⟨u|M|v⟩.
    pub fn sandwich(&self, u: &Vector4, v: &Vector4) -> C64 {
        u.dot(&self.mul_vec(v))
    }

    /// ⟨v|M|v⟩, real part. The imaginary part is a Hermiticity residual.
    pub fn expectation(&self, v: &Vector4) -> f64 {
        self.sandwich(v, v).re
    }

    pub fn commutator(&self, other: &Matrix4) -> Matrix4 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Matrix4) -> Matrix4 {
        *self * *other + *other * *self
    }

    pub fn column(&self, j: usize) -> Vector4 {
        Vector4([self.0[0][j], self.0[1][j], self.0[2][j], self.0[3][j]])
    }
}

impl Add for Matrix4 {
    type Output = Matrix4;
    fn add(self, rhs: Matrix4) -> Matrix4 {
        let mut m = self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }
}

impl Sub for Matrix4 {
    type Output = Matrix4;
    fn sub(self, rhs: Matrix4) -> Matrix4 {
        let mut m = self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }
}

impl Neg for Matrix4 {
    type Output = Matrix4;
    fn neg(self) -> Matrix4 {
        self.scale(-ONE)
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        let mut m = Matrix4::zero();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..4 {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl Matrix2 {
    pub fn zero() -> Self {
        Matrix2([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Matrix2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn adjoint(&self) -> Matrix2 {
        Matrix2([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: C64) -> Matrix2 {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for e in row.iter_mut() {
                *e *= s;
            }
        }
        m
    }

    pub fn inf_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Unitary factor of the polar decomposition M = U·P, P positive
    /// semidefinite. Intended for near-unitary link/overlap matrices; the
    /// inverse square root of M†M is taken through its 2×2 Hermitian
    /// eigendecomposition.
    pub fn polar_unitary(&self) -> Matrix2 {
        let h = self.adjoint() * *self;
        // Hermitian 2×2: h = [[a, b],[b*, c]] with a, c real.
        let a = h.0[0][0].re;
        let c = h.0[1][1].re;
        let b = h.0[0][1];
        let tr = a + c;
        let disc = ((a - c) * (a - c) / 4.0 + b.norm_sqr()).sqrt();
        let l1 = tr / 2.0 + disc;
        let l2 = tr / 2.0 - disc;
        let (s1, s2) = (l1.max(0.0).sqrt(), l2.max(0.0).sqrt());
        // Eigenvectors of h.
        let (v1, v2) = if b.norm() > 1e-300 {
            let u1 = [b, C64::new(l1 - a, 0.0)];
            let u2 = [b, C64::new(l2 - a, 0.0)];
            (normalize2(u1), normalize2(u2))
        } else if a >= c {
            ([ONE, ZERO], [ZERO, ONE])
        } else {
            ([ZERO, ONE], [ONE, ZERO])
        };
        // h^(-1/2) = Σ v v† / s
        let mut hinv = Matrix2::zero();
        for (v, s) in [(v1, s1), (v2, s2)] {
            let inv = if s > 1e-300 { 1.0 / s } else { 0.0 };
            for i in 0..2 {
                for j in 0..2 {
                    hinv.0[i][j] += v[i] * v[j].conj() * inv;
                }
            }
        }
        *self * hinv
    }

    /// Eigenvalues of a general 2×2 matrix via the quadratic formula.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let t = self.trace();
        let d = self.det();
        let disc = (t * t - d * 4.0).sqrt();
        [(t + disc) * 0.5, (t - disc) * 0.5]
    }

    pub fn mul_vec(&self, v: &[C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }
}

fn normalize2(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let mut m = Matrix2::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        m
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        let mut m = self;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let mut m = self;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }
}
