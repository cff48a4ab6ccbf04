//! Bartels–Stewart solver for `A Y + Y B = C` over the complex numbers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{SystemOperator, C64};

/// Solves `A Y + Y B = C`. Fails when an eigenvalue of `A` nearly cancels
/// one of `B`, which makes the operator `Y ↦ AY + YB` singular.
pub fn solve_sylvester(a: &SystemOperator, b: &SystemOperator, c: &SystemOperator) -> Result<SystemOperator> {
    let d = a.dim();
    crate::error::check_dim(d, b.dim())?;
    crate::error::check_dim(d, c.dim())?;
    let (qa, ta) = a.matrix().clone().schur().unpack();
    let (qb, tb) = b.matrix().clone().schur().unpack();
    let rhs = qa.adjoint() * c.matrix() * &qb;
    let scale = 1.0 + a.op_norm() + b.op_norm();
    let floor = 1e3 * f64::EPSILON * scale;

    let mut y = DMatrix::<C64>::zeros(d, d);
    for j in 0..d {
        // (T_a + tb_jj) y_j = rhs_j - Σ_{i<j} y_i tb_ij
        let mut col = rhs.column(j).clone_owned();
        for i in 0..j {
            let f = tb[(i, j)];
            col -= y.column(i) * f;
        }
        let shift = tb[(j, j)];
        for r in (0..d).rev() {
            let mut acc = col[r];
            for k in (r + 1)..d {
                acc -= ta[(r, k)] * y[(k, j)];
            }
            let pivot = ta[(r, r)] + shift;
            if pivot.norm() <= floor {
                return Err(Error::Singular {
                    what: "Sylvester operator",
                    detail: alloc::format!(
                        "eigenvalues {:.6e}{:+.6e}i of A and {:.6e}{:+.6e}i of B nearly cancel (|sum| = {:.3e})",
                        ta[(r, r)].re,
                        ta[(r, r)].im,
                        shift.re,
                        shift.im,
                        pivot.norm()
                    ),
                });
            }
            y[(r, j)] = acc / pivot;
        }
    }
    SystemOperator::new(qa * y * qb.adjoint())
}
