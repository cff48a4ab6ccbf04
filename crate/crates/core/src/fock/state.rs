use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DVector, Matrix2};

use super::{Lattice, DENSE_MAX_AMPLITUDES, SPARSE_MAX_SLICES};
use crate::error::{check_dim, Error, Result};
use crate::operator::{SystemOperator, C64, ONE, ZERO};

/// Mask of the bits for slices `1..=k`.
#[inline]
pub(crate) fn low_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// `(-1)` to the number of excited slices among `1..=k`.
#[inline]
pub(crate) fn reflection_sign(config: u64, k: usize) -> f64 {
    if (config & low_mask(k)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Dense vector on `H ⊗ (ℂ²)^{⊗n}`; index `s + d·m`, where bit `k-1` of `m`
/// is the occupation of slice `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    lattice: Lattice,
    amplitudes: DVector<C64>,
}

fn dense_dim(lattice: &Lattice) -> Result<usize> {
    match lattice.dense_dim() {
        Some(n) if n <= DENSE_MAX_AMPLITUDES => Ok(n),
        _ => Err(Error::InvalidArgument(alloc::format!(
            "dense lattice state with {} slices and system dimension {} exceeds {} amplitudes",
            lattice.slices(),
            lattice.system_dim(),
            DENSE_MAX_AMPLITUDES
        ))),
    }
}

impl LatticeState {
    pub fn new(lattice: Lattice, amplitudes: DVector<C64>) -> Result<Self> {
        let n = dense_dim(&lattice)?;
        if amplitudes.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("amplitudes must be finite".into()));
        }
        Ok(LatticeState {
            lattice,
            amplitudes,
        })
    }

    pub fn zeros(lattice: Lattice) -> Result<Self> {
        let n = dense_dim(&lattice)?;
        Ok(LatticeState {
            lattice,
            amplitudes: DVector::zeros(n),
        })
    }

    /// `u ⊗ ψ(0)`.
    pub fn vacuum(lattice: Lattice, u: &DVector<C64>) -> Result<Self> {
        check_dim(lattice.system_dim(), u.len())?;
        let mut state = Self::zeros(lattice)?;
        state.amplitudes.rows_mut(0, u.len()).copy_from(u);
        Ok(state)
    }

    pub fn from_product(lattice: Lattice, p: &ProductState) -> Result<Self> {
        check_dim(lattice.system_dim(), p.system.len())?;
        check_dim(lattice.slices(), p.slices.len())?;
        let mut state = Self::zeros(lattice)?;
        let d = lattice.system_dim();
        let mut field = vec![ONE];
        for slice in &p.slices {
            let mut next = Vec::with_capacity(field.len() * 2);
            next.extend(field.iter().map(|a| a * slice[0]));
            next.extend(field.iter().map(|a| a * slice[1]));
            field = next;
        }
        for (m, a) in field.iter().enumerate() {
            for s in 0..d {
                state.amplitudes[s + d * m] = p.system[s] * a;
            }
        }
        Ok(state)
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline]
    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn scale(&self, a: C64) -> Self {
        LatticeState {
            lattice: self.lattice,
            amplitudes: &self.amplitudes * a,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticeState {
            lattice: self.lattice,
            amplitudes: &self.amplitudes + &other.amplitudes,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        LatticeState {
            lattice: self.lattice,
            amplitudes: &self.amplitudes - &other.amplitudes,
        }
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    /// `(X ⊗ 1) ψ`.
    pub fn apply_system(&self, x: &SystemOperator) -> Result<Self> {
        let d = self.lattice.system_dim();
        check_dim(d, x.dim())?;
        let mut out = self.clone();
        let m = x.matrix();
        for (dst, src) in out
            .amplitudes
            .as_mut_slice()
            .chunks_mut(d)
            .zip(self.amplitudes.as_slice().chunks(d))
        {
            for i in 0..d {
                let mut acc = ZERO;
                for j in 0..d {
                    acc += m[(i, j)] * src[j];
                }
                dst[i] = acc;
            }
        }
        Ok(out)
    }

    /// Applies a 2×2 operator to slice `k` (1-based).
    pub fn apply_slice(&self, k: usize, op: &Matrix2<C64>) -> Result<Self> {
        if k == 0 || k > self.lattice.slices() {
            return Err(Error::OutOfRange {
                index: k,
                max: self.lattice.slices(),
            });
        }
        let d = self.lattice.system_dim();
        let bit = 1usize << (k - 1);
        let mut out = self.clone();
        let src = self.amplitudes.as_slice();
        let dst = out.amplitudes.as_mut_slice();
        for m in 0..(1usize << self.lattice.slices()) {
            if m & bit != 0 {
                continue;
            }
            let m1 = m | bit;
            for s in 0..d {
                let x0 = src[s + d * m];
                let x1 = src[s + d * m1];
                dst[s + d * m] = op[(0, 0)] * x0 + op[(0, 1)] * x1;
                dst[s + d * m1] = op[(1, 0)] * x0 + op[(1, 1)] * x1;
            }
        }
        Ok(out)
    }

    /// `(T + S J_k) ψ`.
    pub fn apply_pair(&self, x: &crate::pair::OperatorPair, k: usize) -> Result<Self> {
        let t = self.apply_system(x.t_part())?;
        let s = reflection_to(&self.lattice, k)?.apply(&self.apply_system(x.j_part())?)?;
        Ok(t.add(&s))
    }
}

/// The reflection `J_k`: product of the slice sign flips over `1..=k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reflection {
    slices: usize,
    k: usize,
}

/// `J_k` on the given lattice; `J_0` is the identity.
pub fn reflection_to(lattice: &Lattice, k: usize) -> Result<Reflection> {
    if k > lattice.slices() {
        return Err(Error::OutOfRange {
            index: k,
            max: lattice.slices(),
        });
    }
    Ok(Reflection {
        slices: lattice.slices(),
        k,
    })
}

impl Reflection {
    #[inline]
    pub fn index(&self) -> usize {
        self.k
    }

    pub fn apply(&self, state: &LatticeState) -> Result<LatticeState> {
        check_dim(self.slices, state.lattice.slices())?;
        let d = state.lattice.system_dim();
        let mut out = state.clone();
        for (m, chunk) in out.amplitudes.as_mut_slice().chunks_mut(d).enumerate() {
            if reflection_sign(m as u64, self.k) < 0.0 {
                for z in chunk {
                    *z = -*z;
                }
            }
        }
        Ok(out)
    }

    pub fn apply_product(&self, state: &ProductState) -> Result<ProductState> {
        check_dim(self.slices, state.slices.len())?;
        let mut out = state.clone();
        for slice in out.slices.iter_mut().take(self.k) {
            slice[1] = -slice[1];
        }
        Ok(out)
    }
}

/// `u ⊗ ψ(f)` with `f` given per slice (usually midpoint samples):
/// the product over slices of `|0⟩ + √Δ f_k |1⟩`, unnormalized.
pub fn exponential_vector(lattice: Lattice, u: &DVector<C64>, f: &[C64]) -> Result<LatticeState> {
    LatticeState::from_product(lattice, &ProductState::exponential(&lattice, u, f)?)
}

/// `u ⊗ φ_1 ⊗ … ⊗ φ_n` with two-component slice factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    pub(crate) system: DVector<C64>,
    pub(crate) slices: Vec<[C64; 2]>,
}

impl ProductState {
    pub fn new(system: DVector<C64>, slices: Vec<[C64; 2]>) -> Self {
        ProductState { system, slices }
    }

    pub fn vacuum(lattice: &Lattice, u: &DVector<C64>) -> Result<Self> {
        check_dim(lattice.system_dim(), u.len())?;
        Ok(ProductState {
            system: u.clone(),
            slices: vec![[ONE, ZERO]; lattice.slices()],
        })
    }

    pub fn exponential(lattice: &Lattice, u: &DVector<C64>, f: &[C64]) -> Result<Self> {
        check_dim(lattice.system_dim(), u.len())?;
        if f.len() != lattice.slices() {
            return Err(Error::LengthMismatch {
                expected: lattice.slices(),
                found: f.len(),
            });
        }
        let r = libm::sqrt(lattice.step());
        Ok(ProductState {
            system: u.clone(),
            slices: f.iter().map(|&fk| [ONE, fk * r]).collect(),
        })
    }

    #[inline]
    pub fn system(&self) -> &DVector<C64> {
        &self.system
    }

    #[inline]
    pub fn slices(&self) -> &[[C64; 2]] {
        &self.slices
    }

    pub fn slice_overlap(&self, other: &Self, k: usize) -> C64 {
        let a = &self.slices[k - 1];
        let b = &other.slices[k - 1];
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }

    pub fn inner(&self, other: &Self) -> C64 {
        let mut acc = self.system.dotc(&other.system);
        for (a, b) in self.slices.iter().zip(&other.slices) {
            acc *= a[0].conj() * b[0] + a[1].conj() * b[1];
        }
        acc
    }

    pub fn apply_system(&self, x: &SystemOperator) -> Result<Self> {
        check_dim(self.system.len(), x.dim())?;
        Ok(ProductState {
            system: x.apply(&self.system),
            slices: self.slices.clone(),
        })
    }

    pub fn apply_slice(&self, k: usize, op: &Matrix2<C64>) -> Result<Self> {
        if k == 0 || k > self.slices.len() {
            return Err(Error::OutOfRange {
                index: k,
                max: self.slices.len(),
            });
        }
        let mut out = self.clone();
        let [x0, x1] = self.slices[k - 1];
        out.slices[k - 1] = [op[(0, 0)] * x0 + op[(0, 1)] * x1, op[(1, 0)] * x0 + op[(1, 1)] * x1];
        Ok(out)
    }

    pub fn scale(&self, a: C64) -> Self {
        ProductState {
            system: &self.system * a,
            slices: self.slices.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.system.iter().all(|z| *z == ZERO)
            || self.slices.iter().any(|s| s[0] == ZERO && s[1] == ZERO)
    }
}

/// Sum of product states; `⟨Σa, Σb⟩ = Σ ⟨a_i, b_j⟩`.
pub(crate) fn sum_inner(a: &[ProductState], b: &[ProductState]) -> C64 {
    let mut acc = ZERO;
    for x in a {
        for y in b {
            acc += x.inner(y);
        }
    }
    acc
}

/// Finitely supported vector in the occupation basis; handles up to
/// [`SPARSE_MAX_SLICES`] slices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    lattice: Lattice,
    entries: BTreeMap<(u64, usize), C64>,
}

impl SparseState {
    pub fn zeros(lattice: Lattice) -> Result<Self> {
        if lattice.slices() > SPARSE_MAX_SLICES {
            return Err(Error::InvalidArgument(alloc::format!(
                "sparse states support at most {SPARSE_MAX_SLICES} slices"
            )));
        }
        Ok(SparseState {
            lattice,
            entries: BTreeMap::new(),
        })
    }

    pub fn vacuum(lattice: Lattice, u: &DVector<C64>) -> Result<Self> {
        check_dim(lattice.system_dim(), u.len())?;
        let mut state = Self::zeros(lattice)?;
        for (s, &a) in u.iter().enumerate() {
            if a != ZERO {
                state.entries.insert((0, s), a);
            }
        }
        Ok(state)
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn amplitude(&self, config: u64, s: usize) -> C64 {
        self.entries.get(&(config, s)).copied().unwrap_or(ZERO)
    }

    pub fn to_dense(&self) -> Result<LatticeState> {
        let mut out = LatticeState::zeros(self.lattice)?;
        let d = self.lattice.system_dim();
        for (&(m, s), &a) in &self.entries {
            out.amplitudes[s + d * m as usize] = a;
        }
        Ok(out)
    }

    pub fn apply_system(&self, x: &SystemOperator) -> Result<Self> {
        check_dim(self.lattice.system_dim(), x.dim())?;
        let mut out = Self::zeros(self.lattice)?;
        for (&(m, s), &a) in &self.entries {
            for i in 0..x.dim() {
                let v = x.get(i, s) * a;
                if v != ZERO {
                    *out.entries.entry((m, i)).or_insert(ZERO) += v;
                }
            }
        }
        Ok(out)
    }
}

/// Vectors that the fermion increments `J_{k-1} ΔA_k` and `J_{k-1} ΔA†_k`
/// can act on.
pub trait FockAmplitudes: Clone {
    fn lattice(&self) -> &Lattice;
    fn zeros_like(&self) -> Self;
    /// `self += a x`
    fn axpy(&mut self, a: C64, x: &Self);
    fn norm(&self) -> f64;
    /// `J_{k-1} ΔA_k ψ`, or `J_{k-1} ΔA†_k ψ` when `creation` is set.
    fn fermion(&self, k: usize, creation: bool) -> Self;
}

impl FockAmplitudes for LatticeState {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn zeros_like(&self) -> Self {
        LatticeState {
            lattice: self.lattice,
            amplitudes: DVector::zeros(self.amplitudes.len()),
        }
    }

    fn axpy(&mut self, a: C64, x: &Self) {
        self.amplitudes.axpy(a, &x.amplitudes, ONE);
    }

    fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    fn fermion(&self, k: usize, creation: bool) -> Self {
        let d = self.lattice.system_dim();
        let r = libm::sqrt(self.lattice.step());
        let bit = 1usize << (k - 1);
        let mut out = self.zeros_like();
        let src = self.amplitudes.as_slice();
        let dst = out.amplitudes.as_mut_slice();
        for m in 0..(1usize << self.lattice.slices()) {
            let occupied = m & bit != 0;
            if occupied == creation {
                continue;
            }
            let target = m ^ bit;
            let factor = r * reflection_sign(m as u64, k - 1);
            for s in 0..d {
                dst[s + d * target] = src[s + d * m] * factor;
            }
        }
        out
    }
}

impl FockAmplitudes for SparseState {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn zeros_like(&self) -> Self {
        SparseState {
            lattice: self.lattice,
            entries: BTreeMap::new(),
        }
    }

    fn axpy(&mut self, a: C64, x: &Self) {
        for (key, &v) in &x.entries {
            *self.entries.entry(*key).or_insert(ZERO) += a * v;
        }
    }

    fn norm(&self) -> f64 {
        libm::sqrt(self.entries.values().map(|z| z.norm_sqr()).sum::<f64>())
    }

    fn fermion(&self, k: usize, creation: bool) -> Self {
        let r = libm::sqrt(self.lattice.step());
        let bit = 1u64 << (k - 1);
        let mut out = self.zeros_like();
        for (&(m, s), &a) in &self.entries {
            let occupied = m & bit != 0;
            if occupied == creation {
                continue;
            }
            let v = a * (r * reflection_sign(m, k - 1));
            *out.entries.entry((m ^ bit, s)).or_insert(ZERO) += v;
        }
        out
    }
}
