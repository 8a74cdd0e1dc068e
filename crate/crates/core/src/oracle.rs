//! Whole-circuit unitaries built by explicit tensor products.
//!
//! This is a reference path for checking the in-place gate kernels on tiny
//! registers. It shares no arithmetic with [`StateVector`]: every gate is
//! expanded to a `2^n × 2^n` matrix from Pauli matrices and multiplied out.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, VqcError};
use crate::statevector::{Gate, StateVector};

/// Largest register the oracle will expand.
pub const ORACLE_MAX_QUBITS: usize = 3;

type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `exp(-i angle P / 2) = cos(angle/2) I − i sin(angle/2) P` for a Pauli `P`.
fn pauli_rotation(pauli: CMatrix, angle: f64) -> CMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    identity(2) * c(co, 0.0) - pauli * c(0.0, s)
}

/// Places one 2×2 factor per qubit, qubit 0 leftmost (most significant).
fn tensor_chain(factors: Vec<CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .reduce(|acc, m| acc.kronecker(&m))
        .expect("at least one factor")
}

fn embed_single(n_qubits: usize, qubit: usize, op: CMatrix) -> CMatrix {
    let mut op = Some(op);
    tensor_chain(
        (0..n_qubits)
            .map(|q| {
                if q == qubit {
                    op.take().expect("single placement")
                } else {
                    identity(2)
                }
            })
            .collect(),
    )
}

fn embed_cnot(n_qubits: usize, control: usize, target: usize) -> CMatrix {
    let proj0 = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
    let proj1 = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
    let idle = tensor_chain(
        (0..n_qubits)
            .map(|q| if q == control { proj0.clone() } else { identity(2) })
            .collect(),
    );
    let fire = tensor_chain(
        (0..n_qubits)
            .map(|q| {
                if q == control {
                    proj1.clone()
                } else if q == target {
                    pauli_x()
                } else {
                    identity(2)
                }
            })
            .collect(),
    );
    idle + fire
}

fn gate_matrix(n_qubits: usize, gate: &Gate) -> Result<CMatrix> {
    let check = |q: usize| {
        if q >= n_qubits {
            Err(VqcError::invalid(format!(
                "qubit {q} out of range for {n_qubits} qubits"
            )))
        } else {
            Ok(())
        }
    };
    Ok(match *gate {
        Gate::Rx { qubit, angle } => {
            check(qubit)?;
            embed_single(n_qubits, qubit, pauli_rotation(pauli_x(), angle))
        }
        Gate::Ry { qubit, angle } => {
            check(qubit)?;
            embed_single(n_qubits, qubit, pauli_rotation(pauli_y(), angle))
        }
        Gate::Rz { qubit, angle } => {
            check(qubit)?;
            embed_single(n_qubits, qubit, pauli_rotation(pauli_z(), angle))
        }
        Gate::Rot { qubit, angles } => {
            check(qubit)?;
            let op = pauli_rotation(pauli_z(), angles.omega)
                * pauli_rotation(pauli_y(), angles.theta)
                * pauli_rotation(pauli_z(), angles.phi);
            embed_single(n_qubits, qubit, op)
        }
        Gate::Cnot { control, target } => {
            check(control)?;
            check(target)?;
            if control == target {
                return Err(VqcError::invalid("CNOT control equals target"));
            }
            embed_cnot(n_qubits, control, target)
        }
    })
}

/// Multiplies out the unitary of `gates` (applied first to last).
pub fn full_unitary(gates: &[Gate], n_qubits: usize) -> Result<DMatrix<Complex64>> {
    if n_qubits == 0 || n_qubits > ORACLE_MAX_QUBITS {
        return Err(VqcError::UnsupportedSize(format!(
            "full-unitary oracle supports 1..={ORACLE_MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let mut total = identity(1 << n_qubits);
    for gate in gates {
        total = gate_matrix(n_qubits, gate)? * total;
    }
    Ok(total)
}

/// `U · ψ` for the oracle unitary of `gates`.
pub fn apply_via_unitary(gates: &[Gate], state: &StateVector) -> Result<Vec<Complex64>> {
    let u = full_unitary(gates, state.n_qubits())?;
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    Ok((u * psi).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_is_identity() {
        for n in 1..=3 {
            let u = full_unitary(&[], n).unwrap();
            assert_eq!(u, identity(1 << n));
        }
    }

    #[test]
    fn cnot_is_canonical_permutation() {
        let u = full_unitary(&[Gate::Cnot { control: 0, target: 1 }], 2).unwrap();
        let one = c(1., 0.);
        let zero = c(0., 0.);
        #[rustfmt::skip]
        let expected = CMatrix::from_row_slice(4, 4, &[
            one, zero, zero, zero,
            zero, one, zero, zero,
            zero, zero, zero, one,
            zero, zero, one, zero,
        ]);
        assert_eq!(u, expected);
    }

    #[test]
    fn rejects_large_registers() {
        assert!(matches!(
            full_unitary(&[], 4),
            Err(VqcError::UnsupportedSize(_))
        ));
    }

    #[test]
    fn rejects_bad_gates() {
        assert!(full_unitary(&[Gate::Cnot { control: 1, target: 1 }], 2).is_err());
        assert!(full_unitary(&[Gate::Rx { qubit: 2, angle: 0.1 }], 2).is_err());
    }
}
