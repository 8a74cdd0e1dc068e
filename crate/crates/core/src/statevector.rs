//! Dense statevector simulation for circuits made of single-qubit rotations
//! and CNOTs.
//!
//! Qubit 0 is the most significant bit of the basis index: on three qubits
//! the amplitude at index `0b100` belongs to `|1⟩ ⊗ |0⟩ ⊗ |0⟩`. Every gate is
//! applied in place on the amplitude array.

use num_complex::Complex64;

use crate::error::{Result, VqcError};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Tolerance on `|‖ψ‖² − 1|` accepted when a state is built from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Euler angles of the composite rotation `RZ(omega) · RY(theta) · RZ(phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotationAngles {
    pub phi: f64,
    pub theta: f64,
    pub omega: f64,
}

impl RotationAngles {
    pub const fn new(phi: f64, theta: f64, omega: f64) -> Self {
        Self { phi, theta, omega }
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.theta.is_finite() && self.omega.is_finite()
    }

    /// 2×2 unitary in row-major order.
    pub fn matrix(&self) -> [Complex64; 4] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let sum = (self.phi + self.omega) / 2.0;
        let diff = (self.phi - self.omega) / 2.0;
        [
            Complex64::from_polar(c, -sum),
            -Complex64::from_polar(s, diff),
            Complex64::from_polar(s, -diff),
            Complex64::from_polar(c, sum),
        ]
    }
}

/// A single gate of the supported set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    Rot { qubit: usize, angles: RotationAngles },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn is_rotation(&self) -> bool {
        !matches!(self, Gate::Cnot { .. })
    }
}

pub fn rx_matrix(angle: f64) -> [Complex64; 4] {
    let (s, c) = (angle / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        Complex64::new(0.0, -s),
        Complex64::new(0.0, -s),
        Complex64::new(c, 0.0),
    ]
}

pub fn ry_matrix(angle: f64) -> [Complex64; 4] {
    let (s, c) = (angle / 2.0).sin_cos();
    [
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    ]
}

pub fn rz_matrix(angle: f64) -> [Complex64; 4] {
    let zero = Complex64::new(0.0, 0.0);
    [
        Complex64::from_polar(1.0, -angle / 2.0),
        zero,
        zero,
        Complex64::from_polar(1.0, angle / 2.0),
    ]
}

/// Pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(VqcError::invalid(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the
    /// vector must already be normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(VqcError::invalid(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_size(n_qubits)?;
        let state = Self { n_qubits, amps };
        let norm = state.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(VqcError::invalid(format!(
                "amplitudes are not normalized (squared norm {norm})"
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(VqcError::invalid(format!(
                "cannot compare a {}-qubit state with a {}-qubit state",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Phase-insensitive overlap `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Bit mask selecting `qubit` in a basis index.
    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n_qubits {
            return Err(VqcError::invalid(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(1 << (self.n_qubits - 1 - qubit))
    }

    /// Applies a 2×2 unitary (row-major) to `qubit`.
    pub fn apply_single(&mut self, qubit: usize, m: &[Complex64; 4]) -> Result<()> {
        let stride = self.mask(qubit)?;
        let block = stride << 1;
        for base in (0..self.amps.len()).step_by(block) {
            for i in base..base + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m[0] * a0 + m[1] * a1;
                self.amps[i + stride] = m[2] * a0 + m[3] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_rx(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.apply_single(qubit, &rx_matrix(angle))
    }

    pub fn apply_ry(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.apply_single(qubit, &ry_matrix(angle))
    }

    /// Diagonal gate, so only phases change.
    pub fn apply_rz(&mut self, qubit: usize, angle: f64) -> Result<()> {
        let mask = self.mask(qubit)?;
        let lo = Complex64::from_polar(1.0, -angle / 2.0);
        let hi = Complex64::from_polar(1.0, angle / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & mask == 0 { lo } else { hi };
        }
        Ok(())
    }

    /// `RZ(omega) · RY(theta) · RZ(phi)` as one fused 2×2 unitary.
    pub fn apply_rot(&mut self, qubit: usize, angles: RotationAngles) -> Result<()> {
        self.apply_single(qubit, &angles.matrix())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(VqcError::invalid(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let cmask = self.mask(control)?;
        let tmask = self.mask(target)?;
        for i in 0..self.amps.len() {
            // visit each swapped pair once, from its target-bit-0 member
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Rx { qubit, angle } => self.apply_rx(qubit, angle),
            Gate::Ry { qubit, angle } => self.apply_ry(qubit, angle),
            Gate::Rz { qubit, angle } => self.apply_rz(qubit, angle),
            Gate::Rot { qubit, angles } => self.apply_rot(qubit, angles),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
        }
    }

    pub fn apply_gates<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for gate in gates {
            self.apply_gate(gate)?;
        }
        Ok(())
    }

    /// `⟨Z⟩` on `qubit`, always in `[-1, 1]` for a normalized state.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        let mask = self.mask(qubit)?;
        let value: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if i & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum();
        Ok(value.clamp(-1.0, 1.0))
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(VqcError::UnsupportedSize(format!(
            "{n_qubits} qubits requested; supported range is 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn assert_close(a: &StateVector, b: &StateVector, tol: f64) {
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn rot_zero_is_identity() {
        let mut s = StateVector::basis(2, 2).unwrap();
        s.apply_ry(1, 0.7).unwrap();
        let before = s.clone();
        s.apply_rot(0, RotationAngles::default()).unwrap();
        assert_close(&s, &before, 1e-15);
    }

    #[test]
    fn rot_pi_flips_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rot(0, RotationAngles::new(0.0, PI, 0.0)).unwrap();
        assert!((s.amplitudes()[1].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rot_half_pi_gives_equal_superposition() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rot(0, RotationAngles::new(0.0, FRAC_PI_2, 0.0)).unwrap();
        let a = s.amplitudes();
        assert!((a[0] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((a[1] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((a[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn rz_keeps_zero_probabilities() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rz(0, 1.234).unwrap();
        assert_eq!(s.probabilities(), vec![1.0, 0.0]);
    }

    #[test]
    fn rx_pi_flips() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rx(0, PI).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert!((s.fidelity(&one).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cnot_truth_table() {
        // qubit 0 is the MSB, so |10⟩ is index 2
        let mut s = StateVector::basis(2, 0b10).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b11).unwrap());

        let mut s = StateVector::zero(2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s, StateVector::zero(2).unwrap());
    }

    #[test]
    fn cnot_twice_restores() {
        let mut s = StateVector::zero(3).unwrap();
        s.apply_rot(0, RotationAngles::new(0.3, 1.1, -0.4)).unwrap();
        s.apply_rot(2, RotationAngles::new(-1.0, 0.2, 2.0)).unwrap();
        let before = s.clone();
        s.apply_cnot(2, 0).unwrap();
        s.apply_cnot(2, 0).unwrap();
        assert_close(&s, &before, 1e-12);
    }

    #[test]
    fn cnot_rejects_bad_indices() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply_cnot(1, 1), Err(VqcError::InvalidArgument(_))));
        assert!(matches!(s.apply_cnot(0, 2), Err(VqcError::InvalidArgument(_))));
    }

    #[test]
    fn out_of_range_qubit_is_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(s.apply_rx(2, 0.1).is_err());
        assert!(s.apply_rot(5, RotationAngles::default()).is_err());
        assert!(s.expectation_z(2).is_err());
    }

    #[test]
    fn expectation_z_eigenstates() {
        assert_eq!(StateVector::zero(1).unwrap().expectation_z(0).unwrap(), 1.0);
        assert_eq!(StateVector::basis(1, 1).unwrap().expectation_z(0).unwrap(), -1.0);
        let mut s = StateVector::zero(1).unwrap();
        s.apply_ry(0, FRAC_PI_2).unwrap();
        assert!(s.expectation_z(0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn size_limits() {
        assert!(matches!(StateVector::zero(0), Err(VqcError::UnsupportedSize(_))));
        assert!(matches!(StateVector::zero(13), Err(VqcError::UnsupportedSize(_))));
        assert_eq!(StateVector::zero(12).unwrap().dim(), 4096);
    }

    #[test]
    fn from_amplitudes_validates() {
        let half = Complex64::new(0.5, 0.0);
        assert!(StateVector::from_amplitudes(vec![half; 4]).is_ok());
        assert!(StateVector::from_amplitudes(vec![half; 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![half; 2]).is_err());
    }
}
