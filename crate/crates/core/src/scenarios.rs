//! Reference models: the two-qubit counterexamples, the depolarizing qubit
//! and the three-level ladder.

use crate::error::{invalid, Result};
use crate::ladder::{ladder_jump, LadderSpec};
use crate::linalg::{self, C64};
use crate::operators::named::*;
use crate::operators::{HamiltonianSchedule, JumpSet, LindbladModel, Operator, PhiDrive};

/// `{(σz + 2σ⁻) ⊗ I, |1⟩⟨1| ⊗ σ⁻, |1⟩⟨1| ⊗ σ⁺}` on two qubits.
pub fn two_qubit_jumps() -> JumpSet {
    let id = linalg::identity(2);
    let p1 = unit(2, 1, 1);
    let first = sigma_z() + sigma_minus() * C64::new(2.0, 0.0);
    JumpSet::new(
        4,
        vec![
            linalg::kron(&first, &id),
            linalg::kron(&p1, &sigma_minus()),
            linalg::kron(&p1, &sigma_plus()),
        ],
    )
    .expect("4x4 jumps")
}

/// Unique stationary state of the two-qubit dissipator.
pub fn two_qubit_fixed_point() -> Operator {
    let mut a = linalg::zeros(2);
    a[(0, 0)] = C64::new(6.0, 0.0);
    a[(0, 1)] = C64::new(-2.0, 0.0);
    a[(1, 0)] = C64::new(-2.0, 0.0);
    a[(1, 1)] = C64::new(1.0, 0.0);
    linalg::kron(&a, &linalg::identity(2)) / C64::new(14.0, 0.0)
}

/// The dissipator alone, or with the constant drive `σy ⊗ I`, which makes
/// every `|0⟩⟨0| ⊗ ρ` stationary.
pub fn ce1(with_hamiltonian: bool) -> LindbladModel {
    let jumps = two_qubit_jumps();
    if with_hamiltonian {
        LindbladModel::new(jumps, HamiltonianSchedule::Constant(linalg::kron(&sigma_y(), &linalg::identity(2))))
            .expect("valid model")
    } else {
        LindbladModel::dissipative(jumps)
    }
}

/// Rotating drive `(σy + cos φ σx + sin φ σy) ⊗ I` with `φ(t) = 2π(1 + ct)^r`.
pub fn ce2_drive(r: f64, c: f64) -> PhiDrive {
    let id = linalg::identity(2);
    PhiDrive {
        c,
        r,
        base: linalg::kron(&sigma_y(), &id),
        cos_term: linalg::kron(&sigma_x(), &id),
        sin_term: linalg::kron(&sigma_y(), &id),
    }
}

pub fn ce2(r: f64, c: f64) -> Result<LindbladModel> {
    LindbladModel::new(two_qubit_jumps(), HamiltonianSchedule::PhiDrive(ce2_drive(r, c)))
}

/// Whether `(r, c)` satisfies `4 + 9/(c(r−2)) < 2πrc`.
pub fn ce2_parameters_admissible(r: f64, c: f64) -> bool {
    r > 2.0 && c > 0.0 && 4.0 + 9.0 / (c * (r - 2.0)) < 2.0 * std::f64::consts::PI * r * c
}

/// Lower bound on the trace distance of the two reference states for all times.
pub fn ce2_distance_floor(r: f64, c: f64) -> f64 {
    2.0 - (9.0 / (c * (r - 2.0)) + 4.0) / (std::f64::consts::PI * r * c)
}

pub fn depolarizing(gamma: f64) -> Result<LindbladModel> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    let g = C64::new(gamma.sqrt(), 0.0);
    let jumps = JumpSet::new(2, vec![sigma_x() * g, sigma_y() * g, sigma_z() * g])?;
    Ok(LindbladModel::dissipative(jumps))
}

/// `√η (|0⟩⟨1| + α|1⟩⟨2|)`.
pub fn ladder3(alpha: f64, eta: f64) -> Result<LindbladModel> {
    Ok(LindbladModel::dissipative(ladder_jump(&LadderSpec::new(vec![1.0, alpha], eta)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::lindbladian_apply;

    #[test]
    fn fixed_point_is_stationary() {
        let m = ce1(false);
        let y = lindbladian_apply(&m, 0.0, &two_qubit_fixed_point()).unwrap();
        assert!(linalg::max_abs(&y) < 1e-14);
    }

    #[test]
    fn drive_admits_ground_sector() {
        let m = ce1(true);
        let x = linalg::kron(&unit(2, 0, 0), &sigma_x());
        assert!(linalg::max_abs(&lindbladian_apply(&m, 0.0, &x).unwrap()) < 1e-14);
    }

    #[test]
    fn ce2_defaults() {
        assert!(ce2_parameters_admissible(3.0, 2.0));
        assert!(!ce2_parameters_admissible(3.0, 0.1));
        let m = ce2(3.0, 2.0).unwrap();
        if let HamiltonianSchedule::PhiDrive(p) = m.hamiltonian() {
            assert!((p.phase(0.5) - 2.0 * std::f64::consts::PI * 8.0).abs() < 1e-12);
        } else {
            panic!("expected rotating drive");
        }
        assert!((ce2_distance_floor(3.0, 2.0) - (2.0 - 8.5 / (6.0 * std::f64::consts::PI))).abs() < 1e-15);
    }
}
