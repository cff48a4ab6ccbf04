//! Linear-in-`n` evaluation of flow matrix elements for product initial
//! states `u ⊗ φ_1 ⊗ … ⊗ φ_n`.
//!
//! After `k` Euler steps the state is a sum over occupation patterns of the
//! first `k` slices. The observables `T + S J_k` only see the parity of that
//! pattern, so it suffices to carry, per parity, the system operator
//! `Σ_c v_c^ket (v_c^bra)†`. Sandwiches `⟨U*O'U a, U*OU b⟩` need the same
//! bookkeeping for the nested chain `U* … U`, carried as a `d²×d²` transfer
//! matrix per pair of parities.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::evolve::{parity_blocks, StepBlocks};
use super::state::ProductState;
use super::Lattice;
use crate::error::{check_dim, Result};
use crate::ito::QsdeCoefficients;
use crate::operator::{C64, ZERO};
use crate::pair::OperatorPair;

fn check_inputs(lattice: &Lattice, c: &QsdeCoefficients, states: &[&ProductState]) -> Result<()> {
    let d = lattice.system_dim();
    check_dim(d, c.dim())?;
    for s in states {
        check_dim(d, s.system.len())?;
        check_dim(lattice.slices(), s.slices.len())?;
    }
    Ok(())
}

/// `suffix[k] = Π_{j>k} ⟨a_j, b_j⟩`.
fn future_overlaps(a: &ProductState, b: &ProductState) -> Vec<C64> {
    let n = a.slices.len();
    let mut suffix = vec![C64::new(1.0, 0.0); n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * a.slice_overlap(b, k + 1);
    }
    suffix
}

/// `A_t = Σ_in g[t][in] amp_in`, the system operator produced on output
/// occupation `t` of the new slice.
fn slice_kraus(blocks: &StepBlocks, amp: &[C64; 2]) -> [DMatrix<C64>; 2] {
    let k = |t: usize| blocks.g[t][0].matrix() * amp[0] + blocks.g[t][1].matrix() * amp[1];
    [k(0), k(1)]
}

/// `⟨U_k a, (T + S J_k) U_k b⟩` for `k = 0..=n`.
pub fn flow_series(
    lattice: &Lattice,
    c: &QsdeCoefficients,
    bra: &ProductState,
    ket: &ProductState,
    x: &OperatorPair,
) -> Result<Vec<C64>> {
    flow_series_many(lattice, c, bra, ket, core::slice::from_ref(x)).map(|mut v| v.remove(0))
}

/// [`flow_series`] for several observables sharing one pass.
pub fn flow_series_many(
    lattice: &Lattice,
    c: &QsdeCoefficients,
    bra: &ProductState,
    ket: &ProductState,
    xs: &[OperatorPair],
) -> Result<Vec<Vec<C64>>> {
    check_inputs(lattice, c, &[bra, ket])?;
    for x in xs {
        check_dim(lattice.system_dim(), x.dim())?;
    }
    let n = lattice.slices();
    let d = lattice.system_dim();
    let blocks = parity_blocks(c, lattice.step());
    let suffix = future_overlaps(bra, ket);
    let observables: Vec<[DMatrix<C64>; 2]> = xs
        .iter()
        .map(|x| [x.on_parity(1.0).into_matrix(), x.on_parity(-1.0).into_matrix()])
        .collect();

    let mut rho = [&ket.system * bra.system.adjoint(), DMatrix::zeros(d, d)];
    let mut out = vec![Vec::with_capacity(n + 1); xs.len()];
    let record = |rho: &[DMatrix<C64>; 2], k: usize, out: &mut Vec<Vec<C64>>| {
        for (series, o) in out.iter_mut().zip(&observables) {
            let v = (&o[0] * &rho[0]).trace() + (&o[1] * &rho[1]).trace();
            series.push(v * suffix[k]);
        }
    };
    record(&rho, 0, &mut out);
    for j in 1..=n {
        let mut next = [DMatrix::zeros(d, d), DMatrix::zeros(d, d)];
        for (parity, b) in blocks.iter().enumerate() {
            if rho[parity].iter().all(|z| *z == ZERO) {
                continue;
            }
            let ak = slice_kraus(b, &ket.slices[j - 1]);
            let ab = slice_kraus(b, &bra.slices[j - 1]);
            for t in 0..2 {
                next[parity ^ t] += &ak[t] * &rho[parity] * ab[t].adjoint();
            }
        }
        rho = next;
        record(&rho, j, &mut out);
    }
    Ok(out)
}

/// Kronecker product with row-major pair indexing `(i, j) ↦ i d + j`.
fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `⟨U_k* O'_k U_k a, U_k* O_k U_k b⟩` for `k = 0..=n`, with
/// `O_k = T + S J_k`, `O = o_ket`, `O' = o_bra`, and `U_k*` the adjoint of
/// the discrete propagator.
pub fn sandwich_series(
    lattice: &Lattice,
    c: &QsdeCoefficients,
    bra: &ProductState,
    ket: &ProductState,
    o_bra: &OperatorPair,
    o_ket: &OperatorPair,
) -> Result<Vec<C64>> {
    check_inputs(lattice, c, &[bra, ket])?;
    check_dim(lattice.system_dim(), o_bra.dim())?;
    check_dim(lattice.system_dim(), o_ket.dim())?;
    let n = lattice.slices();
    let d = lattice.system_dim();
    let d2 = d * d;
    let blocks = parity_blocks(c, lattice.step());
    let suffix = future_overlaps(bra, ket);
    let o = [o_ket.on_parity(1.0).into_matrix(), o_ket.on_parity(-1.0).into_matrix()];
    let o_prime = [o_bra.on_parity(1.0).into_matrix(), o_bra.on_parity(-1.0).into_matrix()];

    // theta[pk][pb]: Σ vec(K) vec(N)ᵀ over patterns with ket parity pk and
    // bra parity pb, where K = A…u_b u_a†…A† and N is the nested U* U part.
    let mut theta = [
        [DMatrix::<C64>::zeros(d2, d2), DMatrix::zeros(d2, d2)],
        [DMatrix::zeros(d2, d2), DMatrix::zeros(d2, d2)],
    ];
    let k0 = &ket.system * bra.system.adjoint();
    let n0 = DMatrix::<C64>::identity(d, d);
    theta[0][0] = DMatrix::from_fn(d2, d2, |r, s| k0[(r / d, r % d)] * n0[(s / d, s % d)]);

    let close = |theta: &[[DMatrix<C64>; 2]; 2]| {
        let mut acc = ZERO;
        for pk in 0..2 {
            for pb in 0..2 {
                let t = &theta[pk][pb];
                for m in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            for l in 0..d {
                                acc += t[(m * d + i, j * d + l)] * o_prime[pb][(j, i)].conj() * o[pk][(l, m)];
                            }
                        }
                    }
                }
            }
        }
        acc
    };

    let mut out = Vec::with_capacity(n + 1);
    out.push(close(&theta) * suffix[0]);
    for j in 1..=n {
        let mut next = [
            [DMatrix::<C64>::zeros(d2, d2), DMatrix::zeros(d2, d2)],
            [DMatrix::zeros(d2, d2), DMatrix::zeros(d2, d2)],
        ];
        let ket_kraus = [slice_kraus(&blocks[0], &ket.slices[j - 1]), slice_kraus(&blocks[1], &ket.slices[j - 1])];
        let bra_kraus = [slice_kraus(&blocks[0], &bra.slices[j - 1]), slice_kraus(&blocks[1], &bra.slices[j - 1])];
        for pk in 0..2 {
            for pb in 0..2 {
                if theta[pk][pb].iter().all(|z| *z == ZERO) {
                    continue;
                }
                for t in 0..2 {
                    for tb in 0..2 {
                        // K ↦ A_t K A'_tb†
                        let sk = kron(&ket_kraus[pk][t], &bra_kraus[pb][tb].map(|z| z.conj()));
                        // N ↦ Σ_s g'[tb][s] N g[t][s]†
                        let mut sn = DMatrix::<C64>::zeros(d2, d2);
                        for s in 0..2 {
                            sn += kron(
                                blocks[pb].g[tb][s].matrix(),
                                &blocks[pk].g[t][s].matrix().map(|z| z.conj()),
                            );
                        }
                        next[pk ^ t][pb ^ tb] += &sk * &theta[pk][pb] * sn.transpose();
                    }
                }
            }
        }
        theta = next;
        out.push(close(&theta) * suffix[j]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_flow, flow_matrix_elements, simulate_evolution, LatticeState};
    use crate::operator::{complex_gaussian, random_vector, random_with, OperatorKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_qsde(rng: &mut ChaCha8Rng, d: usize, dressed: bool) -> QsdeCoefficients {
        QsdeCoefficients::new(
            random_with(OperatorKind::General, d, rng),
            random_with(OperatorKind::General, d, rng),
            random_with(OperatorKind::General, d, rng),
            random_with(OperatorKind::General, d, rng),
            dressed,
        )
        .unwrap()
    }

    fn random_pair(rng: &mut ChaCha8Rng, d: usize) -> OperatorPair {
        OperatorPair::new(
            random_with(OperatorKind::General, d, rng),
            random_with(OperatorKind::General, d, rng),
        )
        .unwrap()
    }

    fn random_exponential(rng: &mut ChaCha8Rng, l: &Lattice) -> ProductState {
        let f: Vec<C64> = (0..l.slices()).map(|_| complex_gaussian(rng)).collect();
        ProductState::exponential(l, &random_vector(l.system_dim(), rng), &f).unwrap()
    }

    #[test]
    fn flow_series_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for &(d, dressed) in &[(1, true), (2, true), (2, false), (3, true)] {
            let l = Lattice::new(5, 0.7, d).unwrap();
            let c = random_qsde(&mut rng, d, dressed);
            let x = random_pair(&mut rng, d);
            let a = random_exponential(&mut rng, &l);
            let b = random_exponential(&mut rng, &l);
            let ta = simulate_evolution(l, &c, &LatticeState::from_product(l, &a).unwrap()).unwrap();
            let tb = simulate_evolution(l, &c, &LatticeState::from_product(l, &b).unwrap()).unwrap();
            let dense = flow_matrix_elements(&ta, &tb, &x).unwrap();
            let fast = flow_series(&l, &c, &a, &b, &x).unwrap();
            for (u, v) in dense.iter().zip(&fast) {
                assert!((u - v).norm() < 1e-9 * (1.0 + u.norm()), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn sandwich_series_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for &(d, dressed) in &[(1, true), (2, true), (2, false)] {
            let l = Lattice::new(5, 0.6, d).unwrap();
            let c = random_qsde(&mut rng, d, dressed);
            let x = random_pair(&mut rng, d);
            let y = random_pair(&mut rng, d);
            let a = random_exponential(&mut rng, &l);
            let b = random_exponential(&mut rng, &l);
            let da = LatticeState::from_product(l, &a).unwrap();
            let db = LatticeState::from_product(l, &b).unwrap();
            let fast = sandwich_series(&l, &c, &a, &b, &y, &x).unwrap();
            for k in 0..=5 {
                let lhs = apply_flow(&c, k, &y, &da).unwrap();
                let rhs = apply_flow(&c, k, &x, &db).unwrap();
                let dense = lhs.inner(&rhs);
                assert!((dense - fast[k]).norm() < 1e-9 * (1.0 + dense.norm()), "k={k}: {dense} vs {}", fast[k]);
            }
        }
    }

    #[test]
    fn large_lattice_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let l = Lattice::new(64, 1.0, 2).unwrap();
        let c = random_qsde(&mut rng, 2, true);
        let a = random_exponential(&mut rng, &l);
        let v = sandwich_series(&l, &c, &a, &a, &OperatorPair::identity(2), &OperatorPair::identity(2)).unwrap();
        assert_eq!(v.len(), 65);
        assert!(v.iter().all(|z| z.re.is_finite()));
    }
}
