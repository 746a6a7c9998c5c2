//! Model Hamiltonians: CP- and C₂T-symmetric lattice models, their
//! low-energy effective forms near the monopoles, and the sphere
//! parametrization used for monopole charges.
//!
//! All families share one composite Bloch vector
//!
//!   D = (α_x·Re[(d_x + i d_y)ⁿ], α_y·Im[(d_x + i d_y)ⁿ], α_z·d_z),
//!
//! contracted with the family's Clifford triple: H = D₁Γ₁′ + D₂Γ₂′ + D₃Γ₃′.
//! Lattice models use d_x = 2t·sin k_x, d_y = 2t·sin k_y,
//! d_z = 2t·(mass − cos k_x − cos k_y − cos k_z); effective models replace
//! (d_x, d_y, d_z) by the momentum offset q itself (with a relative minus
//! sign on the first two components for the C₂T family and a branch sign on
//! q_z). Gradients are exact analytic derivatives, never finite differences.
//!
//! On the sphere, q_x = (q·sinθ)^(1/n)·sinφ, q_y = (q·sinθ)^(1/n)·cosφ,
//! q_z = q·cosθ. The composite D absorbs the fractional power:
//! (q_x + i·q_y)ⁿ = q·sinθ·e^{i·n(π/2−φ)}, which is smooth in θ for every n,
//! so ramp paths may cross the poles even though the chart itself is only
//! defined on θ ∈ (0, π].

use crate::clifford::{build_clifford_set, CliffordSet};
use crate::error::{Error, Result};
use crate::matrix::{Matrix4, C64};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

fn catalog() -> &'static CliffordSet {
    static CATALOG: OnceLock<CliffordSet> = OnceLock::new();
    CATALOG.get_or_init(build_clifford_set)
}

/// Which Hamiltonian family a [`ModelSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    CpLattice,
    C2tLattice,
    CpEffectivePlus,
    CpEffectiveMinus,
    C2tEffectivePlus,
    C2tEffectiveMinus,
    CpSpherePlus,
    CpSphereMinus,
    C2tSpherePlus,
    C2tSphereMinus,
}

impl Family {
    /// True for CP-symmetric members (complex Bloch states, Chern numbers).
    pub fn is_cp(self) -> bool {
        use Family::*;
        matches!(
            self,
            CpLattice | CpEffectivePlus | CpEffectiveMinus | CpSpherePlus | CpSphereMinus
        )
    }

    /// True for C₂T-symmetric members (real Hamiltonian, Euler classes).
    pub fn is_c2t(self) -> bool {
        !self.is_cp()
    }

    pub fn is_lattice(self) -> bool {
        matches!(self, Family::CpLattice | Family::C2tLattice)
    }

    pub fn is_sphere(self) -> bool {
        use Family::*;
        matches!(self, CpSpherePlus | CpSphereMinus | C2tSpherePlus | C2tSphereMinus)
    }

    pub fn is_effective(self) -> bool {
        !self.is_lattice() && !self.is_sphere()
    }

    /// Branch sign of the effective/sphere members (+1 or −1); lattice
    /// members have no branch.
    pub fn branch(self) -> Option<f64> {
        use Family::*;
        match self {
            CpEffectivePlus | C2tEffectivePlus | CpSpherePlus | C2tSpherePlus => Some(1.0),
            CpEffectiveMinus | C2tEffectiveMinus | CpSphereMinus | C2tSphereMinus => Some(-1.0),
            CpLattice | C2tLattice => None,
        }
    }

    /// Number of active parameters: (k_x, k_y, k_z) or (θ, φ).
    pub fn param_count(self) -> usize {
        if self.is_sphere() {
            2
        } else {
            3
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        if self.is_sphere() {
            &["theta", "phi"]
        } else {
            &["kx", "ky", "kz"]
        }
    }
}

fn default_alpha() -> [i32; 3] {
    [1, 1, 1]
}

fn default_hopping() -> f64 {
    0.5
}

fn default_radius() -> f64 {
    0.1
}

/// Full description of one model Hamiltonian.
///
/// Serializes to the JSON object
/// `{"family":"cp_lattice","n":1,"alpha":[1,1,1],"mass":2.0,"t":0.5}`;
/// unknown keys are rejected. `q` (sphere radius, default 0.1) only matters
/// for sphere families and for dynamics, where it sets the gap 2q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Family,
    /// Winding order n ≥ 1.
    pub n: u32,
    #[serde(default = "default_alpha")]
    pub alpha: [i32; 3],
    /// M_z (CP) or m_z (C₂T); ignored by effective and sphere families.
    #[serde(default)]
    pub mass: f64,
    /// Hopping energy t.
    #[serde(default = "default_hopping")]
    pub t: f64,
    /// Sphere radius q > 0.
    #[serde(default = "default_radius")]
    pub q: f64,
}

impl ModelSpec {
    pub fn lattice(family: Family, n: u32, mass: f64) -> Self {
        assert!(family.is_lattice());
        ModelSpec {
            family,
            n,
            alpha: [1, 1, 1],
            mass,
            t: 0.5,
            q: default_radius(),
        }
    }

    pub fn cp_lattice(n: u32, mass: f64) -> Self {
        Self::lattice(Family::CpLattice, n, mass)
    }

    pub fn c2t_lattice(n: u32, mass: f64) -> Self {
        Self::lattice(Family::C2tLattice, n, mass)
    }

    pub fn sphere(family: Family, n: u32, q: f64) -> Self {
        assert!(family.is_sphere());
        ModelSpec {
            family,
            n,
            alpha: [1, 1, 1],
            mass: 0.0,
            t: 0.5,
            q,
        }
    }

    pub fn effective(family: Family, n: u32) -> Self {
        assert!(family.is_effective());
        ModelSpec {
            family,
            n,
            alpha: [1, 1, 1],
            mass: 0.0,
            t: 0.5,
            q: default_radius(),
        }
    }

    pub fn with_alpha(mut self, alpha: [i32; 3]) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Validation("winding order n must be >= 1".into()));
        }
        if self.alpha.iter().any(|a| a.abs() != 1) {
            return Err(Error::Validation("alpha components must be +-1".into()));
        }
        if self.t == 0.0 {
            return Err(Error::Validation("hopping t must be nonzero".into()));
        }
        if self.q <= 0.0 {
            return Err(Error::Validation("sphere radius q must be positive".into()));
        }
        Ok(())
    }

    /// sgn(α_x·α_y·α_z).
    pub fn alpha_product(&self) -> f64 {
        (self.alpha[0] * self.alpha[1] * self.alpha[2]) as f64
    }

    /// The Clifford triple contracted with the Bloch vector.
    pub fn gamma_triple(&self) -> &'static [Matrix4; 3] {
        if self.family.is_cp() {
            &catalog().cp_triple
        } else {
            &catalog().c2t_triple
        }
    }

    /// The k-independent unitary that commutes with H(k) for every k and
    /// splits the four bands into two decoupled two-level sectors:
    /// σ_z⊗s_y for the CP triple, σ_y⊗s₀ for the C₂T triple. The sector
    /// decomposition orients the real gauge and explains which QGT
    /// components can be nonzero.
    pub fn sector_operator(&self) -> Matrix4 {
        use crate::matrix::pauli;
        if self.family.is_cp() {
            Matrix4::kron(&pauli(3), &pauli(2))
        } else {
            Matrix4::kron(&pauli(2), &pauli(0))
        }
    }
}

/// Composite Bloch vector D and its exact parameter gradient.
#[derive(Debug, Clone, Copy)]
pub struct BlochVector {
    /// D = (D₁, D₂, D₃) in energy units.
    pub d: [f64; 3],
    /// grad[μ][r] = ∂_μ D_r for the active parameters μ (rows beyond
    /// `n_params` are zero).
    pub grad: [[f64; 3]; 3],
    pub n_params: usize,
}

impl BlochVector {
    /// |D| = E₊.
    pub fn norm(&self) -> f64 {
        let d = &self.d;
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// Unit Bloch vector d̂.
    pub fn unit(&self) -> [f64; 3] {
        let n = self.norm();
        [self.d[0] / n, self.d[1] / n, self.d[2] / n]
    }

    /// ∂_μ d̂ = (∂_μ D − d̂ (d̂·∂_μ D)) / |D|.
    pub fn unit_grad(&self, mu: usize) -> [f64; 3] {
        let n = self.norm();
        let u = self.unit();
        let g = &self.grad[mu];
        let proj = u[0] * g[0] + u[1] * g[1] + u[2] * g[2];
        [
            (g[0] - u[0] * proj) / n,
            (g[1] - u[1] * proj) / n,
            (g[2] - u[2] * proj) / n,
        ]
    }
}

/// (w, n·w^(n−1)) for w = x + i·y by repeated multiplication.
fn int_pow_with_derivative(x: f64, y: f64, n: u32) -> (C64, C64) {
    let w = C64::new(x, y);
    let mut p = C64::new(1.0, 0.0); // w^(n-1)
    for _ in 0..n.saturating_sub(1) {
        p *= w;
    }
    (p * w, p * n as f64)
}

/// Composite Bloch vector of `spec` at a parameter point.
///
/// `point` holds (k_x, k_y, k_z) for lattice/effective families and (θ, φ)
/// for sphere families (the radius comes from `spec.q`).
pub fn bloch_vector(spec: &ModelSpec, point: &[f64]) -> BlochVector {
    let a = [spec.alpha[0] as f64, spec.alpha[1] as f64, spec.alpha[2] as f64];
    let n = spec.n;
    match spec.family {
        Family::CpLattice | Family::C2tLattice => {
            let (kx, ky, kz) = (point[0], point[1], point[2]);
            let t2 = 2.0 * spec.t;
            let (sx, cx) = kx.sin_cos();
            let (sy, cy) = ky.sin_cos();
            let (sz, cz) = kz.sin_cos();
            let (dx, dy) = (t2 * sx, t2 * sy);
            let dz = t2 * (spec.mass - cx - cy - cz);
            let (w, wp) = int_pow_with_derivative(dx, dy, n);
            let dwx = wp * (t2 * cx); // ∂_kx w
            let dwy = wp * C64::new(0.0, t2 * cy); // ∂_ky w
            BlochVector {
                d: [a[0] * w.re, a[1] * w.im, a[2] * dz],
                grad: [
                    [a[0] * dwx.re, a[1] * dwx.im, a[2] * t2 * sx],
                    [a[0] * dwy.re, a[1] * dwy.im, a[2] * t2 * sy],
                    [0.0, 0.0, a[2] * t2 * sz],
                ],
                n_params: 3,
            }
        }
        Family::CpEffectivePlus
        | Family::CpEffectiveMinus
        | Family::C2tEffectivePlus
        | Family::C2tEffectiveMinus => {
            let (qx, qy, qz) = (point[0], point[1], point[2]);
            let b = spec.family.branch().unwrap();
            let s = if spec.family.is_cp() { 1.0 } else { -1.0 };
            let (w, wp) = int_pow_with_derivative(qx, qy, n);
            let dwy = wp * C64::new(0.0, 1.0);
            BlochVector {
                d: [s * a[0] * w.re, s * a[1] * w.im, b * a[2] * qz],
                grad: [
                    [s * a[0] * wp.re, s * a[1] * wp.im, 0.0],
                    [s * a[0] * dwy.re, s * a[1] * dwy.im, 0.0],
                    [0.0, 0.0, b * a[2]],
                ],
                n_params: 3,
            }
        }
        Family::CpSpherePlus
        | Family::CpSphereMinus
        | Family::C2tSpherePlus
        | Family::C2tSphereMinus => bloch_vector_sphere(spec, point[0], point[1], spec.q),
    }
}

/// Sphere-family Bloch vector at explicit radius `q`, smooth for all θ.
fn bloch_vector_sphere(spec: &ModelSpec, theta: f64, phi: f64, q: f64) -> BlochVector {
    let a = [spec.alpha[0] as f64, spec.alpha[1] as f64, spec.alpha[2] as f64];
    let n = spec.n as f64;
    let b = spec.family.branch().unwrap();
    let s = if spec.family.is_cp() { 1.0 } else { -1.0 };
    let (st, ct) = theta.sin_cos();
    let u = n * (std::f64::consts::FRAC_PI_2 - phi);
    let (su, cu) = u.sin_cos();
    BlochVector {
        d: [
            s * a[0] * q * st * cu,
            s * a[1] * q * st * su,
            b * a[2] * q * ct,
        ],
        grad: [
            [
                s * a[0] * q * ct * cu,
                s * a[1] * q * ct * su,
                -b * a[2] * q * st,
            ],
            [
                s * a[0] * q * st * su * n,
                -s * a[1] * q * st * cu * n,
                0.0,
            ],
            [0.0, 0.0, 0.0],
        ],
        n_params: 2,
    }
}

/// Sphere coordinates for [`sphere_embed`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SphereCoords {
    /// θ ∈ (0, π].
    pub theta: f64,
    /// φ ∈ (0, 2π].
    pub phi: f64,
    /// Radius q > 0.
    pub q: f64,
}

/// The effective-model Bloch vector on the chart sphere of radius `s.q`.
///
/// θ = 0 is rejected: the (θ, φ) chart is singular at the pole. The unit
/// vector d̂ of the result does not depend on the radius.
pub fn sphere_embed(spec: &ModelSpec, s: &SphereCoords) -> Result<BlochVector> {
    if !spec.family.is_sphere() {
        return Err(Error::Validation(format!(
            "sphere_embed requires a sphere family, got {:?}",
            spec.family
        )));
    }
    if s.theta <= 0.0 || s.theta > std::f64::consts::PI {
        return Err(Error::Validation(format!(
            "theta must lie in (0, pi], got {}",
            s.theta
        )));
    }
    if s.q <= 0.0 {
        return Err(Error::Validation("sphere radius must be positive".into()));
    }
    Ok(bloch_vector_sphere(spec, s.theta, s.phi, s.q))
}

/// H(point) = Σ_r D_r Γ_r′ with the family's Clifford triple.
pub fn hamiltonian(spec: &ModelSpec, point: &[f64]) -> Matrix4 {
    let bloch = bloch_vector(spec, point);
    contract(spec, &bloch.d)
}

/// ∂_μ H, exact and Hermitian.
pub fn d_hamiltonian(spec: &ModelSpec, point: &[f64], mu: usize) -> Result<Matrix4> {
    if mu >= spec.family.param_count() {
        return Err(Error::Validation(format!(
            "parameter index {mu} out of range for {:?} (has {})",
            spec.family,
            spec.family.param_count()
        )));
    }
    let bloch = bloch_vector(spec, point);
    Ok(contract(spec, &bloch.grad[mu]))
}

/// Contract a 3-vector with the family's Clifford triple.
pub fn contract(spec: &ModelSpec, d: &[f64; 3]) -> Matrix4 {
    let t = spec.gamma_triple();
    let mut h = Matrix4::zero();
    for r in 0..3 {
        if d[r] == 0.0 {
            continue;
        }
        let c = C64::new(d[r], 0.0);
        for i in 0..4 {
            for j in 0..4 {
                h.0[i][j] += c * t[r].0[i][j];
            }
        }
    }
    h
}

/// Which four-level atomic construction to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomicMap {
    Cp,
    C2t,
}

/// Assemble the four-level atomic Hamiltonian from its detuning/Rabi table
/// and compare with the n = 1 Dirac Hamiltonian for the same d.
///
/// Returns min over the 24 relabelings of the levels {a, b, c, d} — and over
/// the overall phase convention of the couplings (i ↔ −i, i.e. the complex
/// conjugate realization, which is physically the same drive scheme) — of
/// ‖P·ℋ′·Pᵀ − H⁽¹⁾‖_∞.
pub fn atomic_equivalence(map: AtomicMap, d: [f64; 3]) -> f64 {
    let (hp, spec) = match map {
        AtomicMap::Cp => {
            // Δ = 0, {Ω₁..Ω₆} = {d_y, d_z, d_x, d_x, −d_z, d_y},
            // φ₁ = φ₆ = π/2, other phases zero.
            let om = [d[1], d[2], d[0], d[0], -d[2], d[1]];
            let i = C64::new(0.0, 1.0);
            let r = |x: f64| C64::new(x, 0.0);
            let hp = Matrix4([
                [r(0.0), i * om[0], r(om[1]), r(om[2])],
                [-i * om[0], r(0.0), r(om[3]), r(om[4])],
                [r(om[1]), r(om[3]), r(0.0), i * om[5]],
                [r(om[2]), r(om[4]), -i * om[5], r(0.0)],
            ]);
            (hp, ModelSpec::cp_lattice(1, 0.0))
        }
        AtomicMap::C2t => {
            // Δ = {d_x, −d_x, d_x, −d_x}, {Ω₁..Ω₄} = {d_z, −d_y, d_y, d_z}.
            let de = [d[0], -d[0], d[0], -d[0]];
            let om = [d[2], -d[1], d[1], d[2]];
            let r = |x: f64| C64::new(x, 0.0);
            let hp = Matrix4([
                [r(de[0]), r(om[0]), r(0.0), r(om[1])],
                [r(om[0]), r(de[1]), r(om[2]), r(0.0)],
                [r(0.0), r(om[2]), r(de[2]), r(om[3])],
                [r(om[1]), r(0.0), r(om[3]), r(de[3])],
            ]);
            (hp, ModelSpec::c2t_lattice(1, 0.0))
        }
    };
    let target = contract(&spec, &d);
    let mut best = f64::INFINITY;
    for perm in permutations4() {
        for conjugate in [false, true] {
            let mut m = if conjugate { hp.conj() } else { hp };
            m = permute(&m, &perm);
            best = best.min((m - target).inf_norm());
        }
    }
    best
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    let items = [0usize, 1, 2, 3];
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                out.push([items[a], items[b], items[c], items[d]]);
            }
        }
    }
    out
}

fn permute(m: &Matrix4, p: &[usize; 4]) -> Matrix4 {
    let mut out = Matrix4::zero();
    for i in 0..4 {
        for j in 0..4 {
            out.0[i][j] = m.0[p[i]][p[j]];
        }
    }
    out
}
