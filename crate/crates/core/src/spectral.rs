//! Eigenstructure of the flat-spectrum 4×4 Hamiltonians and deterministic
//! gauge fixing of the degenerate ground pair.
//!
//! Because every model Hamiltonian satisfies H² = e²·I₄, the spectral
//! projectors are available in closed form, P_∓ = (I ∓ H/e)/2, with
//! e = √(Tr H²/4). Ground and excited pairs are built from projector
//! columns by column-pivoted Gram–Schmidt, so the degeneracy is exact by
//! construction and the frame is a deterministic function of H. A generic
//! dense Hermitian eigensolver is kept only for slab matrices.

use crate::error::{Error, Result};
use crate::matrix::{Matrix4, Vector4, C64, ONE};
use nalgebra::DMatrix;

/// Below this half-gap the QGT denominators (2e)² lose all precision;
/// callers must excise monopole points from grids.
pub const GAP_FLOOR: f64 = 1e-9;

/// Gauge conventions for the degenerate ground frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeMode {
    /// Each ground vector's largest-modulus component is made real-positive
    /// (lowest index on ties).
    ComplexPhase,
    /// Ground pair rotated to entrywise real vectors; first vector's largest
    /// component positive, second vector's sign set by a positive pivot-minor
    /// determinant of the 4×2 frame.
    RealOrthogonal,
}

/// Ground/excited pairs of a flat-spectrum Hamiltonian.
#[derive(Debug, Clone)]
pub struct DegenerateSubspace {
    pub e_minus: f64,
    pub e_plus: f64,
    pub ground: [Vector4; 2],
    pub excited: [Vector4; 2],
    /// Σ |ψ_i⟩⟨ψ_i| over the ground pair.
    pub projector: Matrix4,
}

impl DegenerateSubspace {
    /// Half-gap e (= e_plus).
    pub fn half_gap(&self) -> f64 {
        self.e_plus
    }
}

/// Orthonormal pair spanning the range of a rank-2 projector, by
/// column-pivoted Gram–Schmidt. Pivot = largest-norm column, deterministic
/// tie-break by lowest index.
fn projector_frame(p: &Matrix4) -> [Vector4; 2] {
    let cols: Vec<Vector4> = (0..4).map(|j| p.column(j)).collect();
    let mut pivot = 0;
    for j in 1..4 {
        if cols[j].norm() > cols[pivot].norm() {
            pivot = j;
        }
    }
    let v1 = cols[pivot].normalized();
    let mut second = usize::MAX;
    let mut best = -1.0;
    for (j, c) in cols.iter().enumerate() {
        if j == pivot {
            continue;
        }
        let mut r = *c;
        r.axpy(-v1.dot(c), &v1);
        if r.norm() > best {
            best = r.norm();
            second = j;
        }
    }
    let mut v2 = cols[second];
    v2.axpy(-v1.dot(&v2), &v1);
    // second orthogonalization pass tightens ⟨v1|v2⟩ to machine precision
    let mut v2 = v2.normalized();
    v2.axpy(-v1.dot(&v2), &v1);
    [v1, v2.normalized()]
}

/// Decompose a Hermitian flat-spectrum Hamiltonian into its degenerate
/// ground and excited pairs.
pub fn eigensystem(h: &Matrix4) -> Result<DegenerateSubspace> {
    let scale = h.inf_norm().max(1.0);
    let herm = h.hermiticity_residual();
    if herm > 1e-9 * scale {
        return Err(Error::Validation(format!(
            "eigensystem: matrix not Hermitian (residual {herm:.3e})"
        )));
    }
    let h2 = *h * *h;
    let e = (h2.trace().re / 4.0).max(0.0).sqrt();
    if e < GAP_FLOOR {
        return Err(Error::MonopoleProximity { gap: 2.0 * e, floor: GAP_FLOOR });
    }
    let flat = (h2 - Matrix4::identity().scale(C64::new(e * e, 0.0))).inf_norm();
    if flat > 1e-8 * e * e + 1e-12 {
        return Err(Error::Validation(format!(
            "eigensystem: spectrum not two-fold flat (residual {flat:.3e})"
        )));
    }
    let inv = C64::new(1.0 / e, 0.0);
    let p_minus = (Matrix4::identity() - h.scale(inv)).scale(C64::new(0.5, 0.0));
    let p_plus = (Matrix4::identity() + h.scale(inv)).scale(C64::new(0.5, 0.0));
    let ground = projector_frame(&p_minus);
    let excited = projector_frame(&p_plus);
    let projector = ground[0].outer(&ground[0]) + ground[1].outer(&ground[1]);
    Ok(DegenerateSubspace {
        e_minus: -e,
        e_plus: e,
        ground,
        excited,
        projector,
    })
}

fn phase_fix(v: &Vector4) -> Vector4 {
    let mut p = 0;
    for i in 1..4 {
        if v.0[i].norm() > v.0[p].norm() {
            p = i;
        }
    }
    let a = v.0[p];
    if a.norm() == 0.0 {
        return *v;
    }
    v.scale(a.conj() / C64::new(a.norm(), 0.0))
}

/// Apply a deterministic gauge convention to the ground pair.
///
/// `RealOrthogonal` requires the underlying Hamiltonian (equivalently the
/// ground projector) to be entrywise real; requesting it for a genuinely
/// complex subspace is a [`Error::Gauge`].
pub fn fix_gauge(sub: &DegenerateSubspace, mode: GaugeMode) -> Result<DegenerateSubspace> {
    let mut out = sub.clone();
    match mode {
        GaugeMode::ComplexPhase => {
            out.ground = [phase_fix(&sub.ground[0]), phase_fix(&sub.ground[1])];
        }
        GaugeMode::RealOrthogonal => {
            let imag = sub.projector.max_imag_abs();
            if imag > 1e-10 {
                return Err(Error::Gauge(format!(
                    "ground subspace is not real (projector imaginary part {imag:.3e})"
                )));
            }
            // Re-derive the frame from the real projector columns so the
            // result is independent of the incoming complex phases.
            let mut pr = Matrix4::zero();
            for i in 0..4 {
                for j in 0..4 {
                    pr.0[i][j] = C64::new(sub.projector.0[i][j].re, 0.0);
                }
            }
            let [v1, v2] = projector_frame(&pr);
            let mut r1 = v1.re();
            let mut r2 = v2.re();
            // residual imaginary parts are pure rounding at this stage
            let mut p1 = 0;
            for i in 1..4 {
                if r1[i].abs() > r1[p1].abs() {
                    p1 = i;
                }
            }
            if r1[p1] < 0.0 {
                for x in r1.iter_mut() {
                    *x = -*x;
                }
            }
            // orientation: the 2×2 minor with the largest determinant
            // magnitude must be positive
            let mut best = 0.0;
            for a in 0..4 {
                for b in (a + 1)..4 {
                    let det = r1[a] * r2[b] - r1[b] * r2[a];
                    if det.abs() > best.abs() {
                        best = det;
                    }
                }
            }
            if best < 0.0 {
                for x in r2.iter_mut() {
                    *x = -*x;
                }
            }
            out.ground = [
                Vector4([
                    C64::new(r1[0], 0.0),
                    C64::new(r1[1], 0.0),
                    C64::new(r1[2], 0.0),
                    C64::new(r1[3], 0.0),
                ]),
                Vector4([
                    C64::new(r2[0], 0.0),
                    C64::new(r2[1], 0.0),
                    C64::new(r2[2], 0.0),
                    C64::new(r2[3], 0.0),
                ]),
            ];
        }
    }
    out.projector = out.ground[0].outer(&out.ground[0]) + out.ground[1].outer(&out.ground[1]);
    Ok(out)
}

/// Dense Hermitian eigendecomposition for slab matrices (dim ≤ 1024).
/// Returns eigenvalues ascending with matching eigenvector columns.
pub fn dense_eigh(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Validation("dense_eigh: matrix must be square".into()));
    }
    if n > 1024 {
        return Err(Error::Validation(format!(
            "dense_eigh: dimension {n} exceeds the 1024 cap"
        )));
    }
    let mut scale = 0.0_f64;
    let mut herm = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(m[(i, j)].norm());
            herm = herm.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if herm > 1e-10 * scale.max(1.0) {
        return Err(Error::Validation(format!(
            "dense_eigh: matrix not Hermitian (residual {herm:.3e})"
        )));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Overlap matrix O_ij = ⟨a_i | b_j⟩ of two 2-frames.
pub fn frame_overlap(a: &[Vector4; 2], b: &[Vector4; 2]) -> crate::matrix::Matrix2 {
    let mut o = crate::matrix::Matrix2::zero();
    for i in 0..2 {
        for j in 0..2 {
            o.0[i][j] = a[i].dot(&b[j]);
        }
    }
    o
}

/// Rotate frame `b` by the unitary polar factor of its overlap with `a`,
/// so the rotated frame is the closest one to `a` within the same subspace.
/// Used to compare frames at neighboring parameter points across gauge
/// convention switches.
pub fn align_frame(a: &[Vector4; 2], b: &[Vector4; 2]) -> [Vector4; 2] {
    let o = frame_overlap(a, b);
    let u = o.polar_unitary();
    // aligned_j = Σ_k b_k (U†)_kj
    let ud = u.adjoint();
    let mut out = [Vector4::zero(), Vector4::zero()];
    for j in 0..2 {
        for k in 0..2 {
            out[j].axpy(ud.0[k][j], &b[k]);
        }
    }
    out
}
