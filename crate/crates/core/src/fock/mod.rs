//! Toy Fock space: `n` two-level time slices of width `Δ = T/n` standing in
//! for the Fock space over `[0, T]`.
//!
//! Slice `k` (1-based) carries `ΔA_k = √Δ |0⟩⟨1|`, `ΔA†_k`, `ΔΛ_k = |1⟩⟨1|`
//! and the local sign flip `1 - 2 ΔΛ_k`. The reflection `J_k` is the product
//! of the sign flips over slices `1..=k`.
//!
//! Two representations are provided. [`LatticeState`] stores all `d·2ⁿ`
//! amplitudes and is exact but limited to small `n`. [`ProductState`] and the
//! [`sector`] engines exploit the product structure of exponential vectors
//! and scale linearly in `n`.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::operator::{C64, ONE, ZERO};

mod checks;
mod evolve;
pub mod sector;
mod state;

pub use checks::{
    characteristic_functional, check_anticommutation, check_anticommutation_sparse,
    check_fundamental_lemma, fermion_square_norm, CharacteristicValue, LemmaKind, LemmaReport,
    NoiseKind,
};
pub use evolve::{
    apply_flow, flow_matrix_elements, flow_observable, simulate_evolution, step_blocks,
    StepBlocks, Trajectory,
};
pub use state::{
    exponential_vector, reflection_to, FockAmplitudes, LatticeState, ProductState, Reflection,
    SparseState,
};

/// Largest `d·2ⁿ` accepted by the dense representation.
pub const DENSE_MAX_AMPLITUDES: usize = 1 << 21;

/// Largest slice count accepted by [`SparseState`] (one bit per slice).
pub const SPARSE_MAX_SLICES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    slices: usize,
    horizon: f64,
    system_dim: usize,
}

impl Lattice {
    pub fn new(slices: usize, horizon: f64, system_dim: usize) -> Result<Self> {
        if slices == 0 {
            return Err(Error::InvalidArgument("lattice needs at least one slice".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument("horizon must be positive and finite".into()));
        }
        if system_dim == 0 {
            return Err(Error::InvalidArgument("system dimension must be positive".into()));
        }
        Ok(Lattice {
            slices,
            horizon,
            system_dim,
        })
    }

    #[inline]
    pub fn slices(&self) -> usize {
        self.slices
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.horizon / self.slices as f64
    }

    #[inline]
    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    /// `t_k = k T / n`; exact at both ends.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.horizon * k as f64 / self.slices as f64
    }

    pub fn times(&self) -> alloc::vec::Vec<f64> {
        (0..=self.slices).map(|k| self.time(k)).collect()
    }

    /// Midpoint of slice `k` (1-based).
    pub fn midpoint(&self, k: usize) -> f64 {
        self.horizon * (k as f64 - 0.5) / self.slices as f64
    }

    /// Samples `f` at the slice midpoints.
    pub fn sample(&self, f: impl Fn(f64) -> C64) -> alloc::vec::Vec<C64> {
        (1..=self.slices).map(|k| f(self.midpoint(k))).collect()
    }

    /// Number of whole slices in `[0, t]`, rounding down. The flag is set
    /// when `t` is not on the grid.
    pub fn snap(&self, t: f64) -> Result<(usize, bool)> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument("time must be non-negative".into()));
        }
        let slack = 1e-9 * self.horizon.max(1.0);
        if t > self.horizon + slack {
            return Err(Error::InvalidArgument(alloc::format!(
                "time {t} exceeds the horizon {}",
                self.horizon
            )));
        }
        let exact = t / self.step();
        let k = libm::floor(exact + 1e-9).min(self.slices as f64) as usize;
        let snapped = libm::fabs(self.time(k) - t) > slack;
        Ok((k, snapped))
    }

    /// Total dimension `d·2ⁿ` of the dense representation.
    pub fn dense_dim(&self) -> Option<usize> {
        if self.slices >= usize::BITS as usize - 1 {
            return None;
        }
        (1usize << self.slices).checked_mul(self.system_dim)
    }

    pub fn slice_operators(&self) -> SliceOperators {
        SliceOperators::new(self.step())
    }
}

/// Local operators on one two-level slice, basis `(|0⟩, |1⟩)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceOperators {
    pub ann: Matrix2<C64>,
    pub cre: Matrix2<C64>,
    pub num: Matrix2<C64>,
    pub refl: Matrix2<C64>,
}

impl SliceOperators {
    pub fn new(step: f64) -> Self {
        let r = C64::new(libm::sqrt(step), 0.0);
        SliceOperators {
            ann: Matrix2::new(ZERO, r, ZERO, ZERO),
            cre: Matrix2::new(ZERO, ZERO, r, ZERO),
            num: Matrix2::new(ZERO, ZERO, ZERO, ONE),
            refl: Matrix2::new(ONE, ZERO, ZERO, -ONE),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_validation() {
        assert!(Lattice::new(0, 1.0, 1).is_err());
        assert!(Lattice::new(4, 0.0, 1).is_err());
        assert!(Lattice::new(4, f64::NAN, 1).is_err());
        assert!(Lattice::new(4, 1.0, 0).is_err());
        let l = Lattice::new(16, 1.0, 2).unwrap();
        assert_eq!(l.time(16), 1.0);
        assert_eq!(l.dense_dim(), Some(2 << 16));
    }

    #[test]
    fn snapping_rounds_down() {
        let l = Lattice::new(10, 1.0, 1).unwrap();
        assert_eq!(l.snap(0.3).unwrap(), (3, false));
        assert_eq!(l.snap(0.35).unwrap(), (3, true));
        assert_eq!(l.snap(1.0).unwrap(), (10, false));
        assert!(l.snap(1.5).is_err());
        assert!(l.snap(-0.1).is_err());
    }

    #[test]
    fn discrete_ito_table_per_slice() {
        let delta = 0.125;
        let s = SliceOperators::new(delta);
        let id = Matrix2::<C64>::identity();
        let close = |a: Matrix2<C64>, b: Matrix2<C64>| (a - b).norm() < 1e-15;
        assert!(close(s.ann * s.cre, (id - s.num) * C64::new(delta, 0.0)));
        assert!(close(s.num * s.cre, s.cre));
        assert!(close(s.ann * s.num, s.ann));
        assert!(close(s.num * s.num, s.num));
        assert!(close(s.cre * s.num, Matrix2::zeros()));
        assert!(close(s.cre * s.cre, Matrix2::zeros()));
        assert!(close(s.num * s.ann, Matrix2::zeros()));
        assert!(close(s.refl * s.refl, id));
        assert!(close(s.cre, s.ann.adjoint()));
    }
}
