use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

use super::OperatorExpr;
use crate::{Error, Result};

/// `q̂` and `p̂` in the oscillator number basis (m = ω = 1), size `dim`.
fn ladder_pair(dim: usize, hbar: f64) -> (Array2<C64>, Array2<C64>) {
    let scale = (hbar / 2.0).sqrt();
    let mut q = Array2::<C64>::zeros((dim, dim));
    let mut p = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim.saturating_sub(1) {
        let a = scale * ((i + 1) as f64).sqrt();
        // a|i+1> = sqrt(i+1)|i>
        q[[i, i + 1]] = C64::new(a, 0.0);
        q[[i + 1, i]] = C64::new(a, 0.0);
        p[[i, i + 1]] = C64::new(0.0, -a);
        p[[i + 1, i]] = C64::new(0.0, a);
    }
    (q, p)
}

/// Matrix of `op` in the first `basis_size` oscillator eigenstates.
///
/// Every monomial is built in a basis enlarged by the operator degree and
/// then truncated, so all returned entries are exact; products of two such
/// matrices are exact on the leading block of size
/// `basis_size − degree(second factor)`.
pub fn matrix_representation(op: &OperatorExpr, basis_size: usize) -> Result<Array2<C64>> {
    let degree = op.degree() as usize;
    if basis_size < 2 || basis_size <= degree {
        return Err(Error::InvalidInput(format!(
            "basis size {basis_size} too small for operator of degree {degree}"
        )));
    }
    let dim = basis_size + degree;
    let (q, p) = ladder_pair(dim, op.hbar());
    let identity = Array2::<C64>::eye(dim);
    let mut out = Array2::<C64>::zeros((dim, dim));
    for mono in op.monomials() {
        let mut m = identity.clone();
        for _ in 0..mono.qpow {
            m = m.dot(&q);
        }
        for _ in 0..mono.ppow {
            m = m.dot(&p);
        }
        out.scaled_add(mono.coeff.evaluate(op.hbar()), &m);
    }
    Ok(out.slice(s![..basis_size, ..basis_size]).to_owned())
}
