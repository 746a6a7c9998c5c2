//! Clifford matrix catalog and the global-degeneracy checker.
//!
//! The five generators Γ₁…Γ₅ obey {Γ_a, Γ_b} = 2δ_ab·I₄ exactly (their
//! entries are 0, ±1, ±i), and the ten commutator matrices
//! Γ_ab = [Γ_a, Γ_b]/(2i) complete the catalog. A Hamiltonian of the form
//! H = Σ B_i Γ_i (or B_i Γ_i + Σ_j B_ij Γ_ij with a shared index i) squares
//! to f·I₄, which is what makes both band pairs globally degenerate.

use crate::error::{Error, Result};
use crate::matrix::{pauli, Matrix4, C64, I, ONE};

/// The generator set Γ₁…Γ₅, their ten commutators, and the two model
/// triples (Γ_x, Γ_y, Γ_z) and (Γ̃_x, Γ̃_y, Γ̃_z).
#[derive(Debug, Clone)]
pub struct CliffordSet {
    /// Γ₁ = σ_z⊗τ_x, Γ₂ = σ₀⊗τ_y, Γ₃ = σ₀⊗τ_z, Γ₄ = σ_x⊗τ_x, Γ₅ = σ_y⊗τ_x.
    pub gamma: [Matrix4; 5],
    /// Γ_ab = [Γ_a, Γ_b]/(2i) for a < b, indexed by [`pair_index`].
    pub comm: [Matrix4; 10],
    /// Γ_x = σ_x⊗s_x, Γ_y = σ₀⊗s_y, Γ_z = σ_x⊗s_z.
    pub cp_triple: [Matrix4; 3],
    /// Γ̃_x = σ₀⊗s_z, Γ̃_y = σ_y⊗s_y, Γ̃_z = σ₀⊗s_x (entrywise real).
    pub c2t_triple: [Matrix4; 3],
}

/// Flat index of the ordered pair (a, b), a < b, into the `comm` array.
pub fn pair_index(a: usize, b: usize) -> usize {
    assert!(a < b && b < 5, "need 0 <= a < b < 5");
    // pairs in lexicographic order: (0,1)..(0,4),(1,2)..(3,4)
    a * (7 - a) / 2 + b - a - 1
}

/// Build the full catalog. Generator entries come straight from the Pauli
/// Kronecker products; commutators are constructed, not tabulated, so the
/// defining identity holds exactly.
pub fn build_clifford_set() -> CliffordSet {
    let gamma = [
        Matrix4::kron(&pauli(3), &pauli(1)),
        Matrix4::kron(&pauli(0), &pauli(2)),
        Matrix4::kron(&pauli(0), &pauli(3)),
        Matrix4::kron(&pauli(1), &pauli(1)),
        Matrix4::kron(&pauli(2), &pauli(1)),
    ];
    let mut comm = [Matrix4::zero(); 10];
    for a in 0..5 {
        for b in (a + 1)..5 {
            comm[pair_index(a, b)] = gamma[a].commutator(&gamma[b]).scale(ONE / (2.0 * I));
        }
    }
    let cp_triple = [
        Matrix4::kron(&pauli(1), &pauli(1)),
        Matrix4::kron(&pauli(0), &pauli(2)),
        Matrix4::kron(&pauli(1), &pauli(3)),
    ];
    let c2t_triple = [
        Matrix4::kron(&pauli(0), &pauli(3)),
        Matrix4::kron(&pauli(2), &pauli(2)),
        Matrix4::kron(&pauli(0), &pauli(1)),
    ];
    CliffordSet {
        gamma,
        comm,
        cp_triple,
        c2t_triple,
    }
}

/// Max over all generator pairs of ‖{Γ_a, Γ_b} − 2δ_ab·I₄‖_∞.
/// Zero (exactly) for the untouched catalog.
pub fn anticommutator_check(set: &CliffordSet) -> f64 {
    let mut worst = 0.0_f64;
    for a in 0..5 {
        for b in 0..5 {
            let target = if a == b {
                Matrix4::identity().scale(C64::new(2.0, 0.0))
            } else {
                Matrix4::zero()
            };
            let res = (set.gamma[a].anticommutator(&set.gamma[b]) - target).inf_norm();
            worst = worst.max(res);
        }
    }
    worst
}

/// Max over the samples of ‖H(k)² − f(k)·I₄‖_∞ with f(k) = Tr(H²)/4.
///
/// f is taken from the trace rather than from any dispersion formula, so the
/// check is model-agnostic. Non-Hermitian input at any sample is rejected.
pub fn check_global_degeneracy<F>(hamiltonian: F, samples: &[[f64; 3]]) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> Matrix4,
{
    let mut worst = 0.0_f64;
    for k in samples {
        let h = hamiltonian(k);
        let herm = h.hermiticity_residual();
        if herm > 1e-10 {
            return Err(Error::Validation(format!(
                "Hamiltonian not Hermitian at k = {k:?}: residual {herm:.3e}"
            )));
        }
        let h2 = h * h;
        let f = h2.trace() / 4.0;
        let res = (h2 - Matrix4::identity().scale(f)).inf_norm();
        worst = worst.max(res);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ZERO;

    /// Commutator catalog, entry by entry, as σ ⊗ τ products.
    /// Γ₁₅ and Γ₃₄ follow the defining identity Γ_ab = [Γ_a, Γ_b]/(2i);
    /// a direct Pauli-algebra expansion gives Γ₁₅ = −σ_x⊗τ₀ and
    /// Γ₃₄ = +σ_x⊗τ_y.
    fn expected_comm_table() -> Vec<((usize, usize), Matrix4)> {
        let k = |a: usize, b: usize| Matrix4::kron(&pauli(a), &pauli(b));
        vec![
            ((1, 2), k(3, 3)),
            ((1, 3), -k(3, 2)),
            ((1, 4), k(2, 0)),
            ((1, 5), -k(1, 0)),
            ((2, 3), k(0, 1)),
            ((2, 4), -k(1, 3)),
            ((2, 5), -k(2, 3)),
            ((3, 4), k(1, 2)),
            ((3, 5), k(2, 2)),
            ((4, 5), k(3, 0)),
        ]
    }

    #[test]
    fn generators_anticommute_exactly() {
        let set = build_clifford_set();
        assert_eq!(anticommutator_check(&set), 0.0);
    }

    #[test]
    fn commutator_table_reproduced() {
        let set = build_clifford_set();
        for ((a, b), want) in expected_comm_table() {
            let got = set.comm[pair_index(a - 1, b - 1)];
            assert_eq!(
                (got - want).inf_norm(),
                0.0,
                "Γ_{a}{b} differs from the catalog"
            );
        }
    }

    #[test]
    fn gamma2_is_tau_y_on_both_blocks() {
        let set = build_clifford_set();
        let g2 = set.gamma[1];
        // diag-block [[0, −i],[i, 0]] repeated on both σ blocks
        assert_eq!(g2.0[0][1], -I);
        assert_eq!(g2.0[1][0], I);
        assert_eq!(g2.0[2][3], -I);
        assert_eq!(g2.0[3][2], I);
        assert_eq!(g2.0[0][2], ZERO);
        assert_eq!(g2.0[0][3], ZERO);
    }

    #[test]
    fn c2t_triple_is_real() {
        let set = build_clifford_set();
        for g in &set.c2t_triple {
            assert_eq!(g.max_imag_abs(), 0.0);
        }
    }

    #[test]
    fn perturbed_generator_fails_with_linear_residual() {
        let mut set = build_clifford_set();
        let eps = 1e-3;
        set.gamma[0] = set.gamma[0] + set.gamma[1].scale(C64::new(eps, 0.0));
        let res = anticommutator_check(&set);
        assert!(
            (res - 2.0 * eps).abs() < 1e-12,
            "expected residual 2ε = {:.3e}, got {res:.3e}",
            2.0 * eps
        );
    }

    #[test]
    fn degeneracy_of_allowed_two_term_form() {
        // H = Γ₁ + Γ₁₂ is of the allowed form B_iΓ_i + Σ_j B_ijΓ_ij.
        let set = build_clifford_set();
        let h = set.gamma[0] + set.comm[pair_index(0, 1)];
        let res = check_global_degeneracy(|_| h, &[[0.0; 3]]).unwrap();
        assert!(res < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_passes() {
        let res = check_global_degeneracy(|_| Matrix4::zero(), &[[0.1, 0.2, 0.3]]).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let mut m = Matrix4::zero();
        m.0[0][1] = ONE; // no conjugate partner
        let err = check_global_degeneracy(|_| m, &[[0.0; 3]]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
