//! Fixed gates. Rotations follow R_a(θ) = exp(−iθσ_a/2).

use std::f64::consts::FRAC_1_SQRT_2;

use crate::tensor::{c, cr, ComplexMatrix, C};

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::real_square(&[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::square(vec![cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]).expect("2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::real_square(&[1.0, 0.0, 0.0, -1.0]).expect("2x2")
}

pub fn hadamard() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    ComplexMatrix::real_square(&[s, s, s, -s]).expect("2x2")
}

/// Phase gate S = diag(1, i).
pub fn phase_s() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[cr(1.0), c(0.0, 1.0)])
}

pub fn phase_s_dag() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[cr(1.0), c(0.0, -1.0)])
}

fn rotation(theta: f64, pauli: ComplexMatrix) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    &identity(2).scale_real(co) + &pauli.scale(c(0.0, -s))
}

pub fn rx(theta: f64) -> ComplexMatrix {
    rotation(theta, pauli_x())
}

pub fn ry(theta: f64) -> ComplexMatrix {
    rotation(theta, pauli_y())
}

pub fn rz(theta: f64) -> ComplexMatrix {
    rotation(theta, pauli_z())
}

/// Swap of two subsystems of equal radix, acting on radix² dimensions.
pub fn swap(radix: usize) -> ComplexMatrix {
    let n = radix * radix;
    ComplexMatrix::from_fn(n, n, |r, col| {
        let (a, b) = (col / radix, col % radix);
        if r == b * radix + a {
            cr(1.0)
        } else {
            C::default()
        }
    })
}

/// Generalized Z on a qudit: diag(1, ω, ω², …) with ω = e^{2πi/d}.
pub fn clock(dim: usize) -> ComplexMatrix {
    let diag: Vec<C> = (0..dim)
        .map(|k| C::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / dim as f64))
        .collect();
    ComplexMatrix::from_diag(&diag)
}

/// The three non-identity single-qubit Paulis in x, y, z order.
pub fn paulis() -> [ComplexMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}
