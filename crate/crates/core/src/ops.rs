//! Spin-1/2 operators with `ħ = 1`. Basis order is `|↑⟩ = 0`, `|↓⟩ = 1`.

use crate::tensor::DenseTensor;
use crate::C64;

pub const SPIN_HALF_DIM: usize = 2;

pub fn identity() -> DenseTensor {
    DenseTensor::identity(SPIN_HALF_DIM)
}

pub fn sz() -> DenseTensor {
    DenseTensor::from_real(&[2, 2], &[0.5, 0.0, 0.0, -0.5]).expect("2x2")
}

pub fn sx() -> DenseTensor {
    DenseTensor::from_real(&[2, 2], &[0.0, 0.5, 0.5, 0.0]).expect("2x2")
}

pub fn sy() -> DenseTensor {
    let h = C64::new(0.0, 0.5);
    DenseTensor::new(vec![2, 2], vec![C64::new(0.0, 0.0), h, -h, C64::new(0.0, 0.0)]).expect("2x2")
}

/// Raising operator `|↑⟩⟨↓|`.
pub fn s_plus() -> DenseTensor {
    DenseTensor::from_real(&[2, 2], &[0.0, 0.0, 1.0, 0.0]).expect("2x2")
}

/// Lowering operator `|↓⟩⟨↑|`.
pub fn s_minus() -> DenseTensor {
    DenseTensor::from_real(&[2, 2], &[0.0, 1.0, 0.0, 0.0]).expect("2x2")
}

pub fn up() -> Vec<C64> {
    vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
}

pub fn down() -> Vec<C64> {
    vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
}
