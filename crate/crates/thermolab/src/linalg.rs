//! Dense complex kernels built on real BLAS-like products.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::scalar::{cx, CMatrix, CVector, Real};

/// Splits a complex matrix into real and imaginary parts.
pub fn split<T: Real>(m: &CMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

/// Joins real and imaginary parts.
pub fn join<T: Real>(re: &DMatrix<T>, im: &DMatrix<T>) -> CMatrix<T> {
    re.zip_map(im, |a, b| Complex::new(a, b))
}

/// Below this many output entries the real products run sequentially.
const PAR_MIN_ENTRIES: usize = 128 * 128;

fn both<A: Send, B: Send>(par: bool, f: impl FnOnce() -> A + Send, g: impl FnOnce() -> B + Send) -> (A, B) {
    if par {
        rayon::join(f, g)
    } else {
        (f(), g())
    }
}

/// Complex product through real products, which use the optimized real kernel.
/// Products with an identically zero imaginary part are skipped.
pub fn cmatmul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let a_real = ai.iter().all(|x| *x == T::zero());
    let b_real = bi.iter().all(|x| *x == T::zero());
    let par = a.nrows() * b.ncols() >= PAR_MIN_ENTRIES;
    let (re, im) = match (a_real, b_real) {
        (true, true) => (&ar * &br, DMatrix::zeros(ar.nrows(), br.ncols())),
        (true, false) => both(par, || &ar * &br, || &ar * &bi),
        (false, true) => both(par, || &ar * &br, || &ai * &br),
        (false, false) => {
            let ((rr, ii), (ri, ir)) = both(
                par,
                || both(par, || &ar * &br, || &ai * &bi),
                || both(par, || &ar * &bi, || &ai * &br),
            );
            (rr - ii, ri + ir)
        }
    };
    join(&re, &im)
}

/// `a† b` computed with the split real products.
pub fn cmatmul_adj<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    cmatmul(&a.adjoint(), b)
}

/// Complex matrix-vector product.
pub fn cmatvec<T: Real>(a: &CMatrix<T>, v: &CVector<T>) -> CVector<T> {
    a * v
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.norm_sqr().sqrt()))
}

/// Largest modulus of `m - m†`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm_sqr().sqrt());
        }
    }
    worst
}

/// Kronecker product.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// Ascending eigenpairs of a real symmetric matrix.
pub fn sym_eig<T: Real>(m: DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)]], DMatrix::identity(1, 1));
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn sym_eigvals<T: Real>(m: DMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = if m.nrows() == 1 {
        vec![m[(0, 0)]]
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Ascending eigenpairs of a Hermitian matrix, taking the real path when possible.
pub fn herm_eig<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    if m.iter().all(|z| z.im == T::zero()) {
        let (vals, vecs) = sym_eig(m.map(|z| z.re));
        return (vals, vecs.map(cx));
    }
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], CMatrix::identity(1, 1));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn herm_eigvals<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    if m.iter().all(|z| z.im == T::zero()) {
        return sym_eigvals(m.map(|z| z.re));
    }
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut v: Vec<T> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// `exp(i h)` for Hermitian `h`.
pub fn expi_hermitian<T: Real>(h: &CMatrix<T>) -> CMatrix<T> {
    let (vals, vecs) = herm_eig(h);
    let phases = CMatrix::from_fn(vals.len(), vals.len(), |r, c| {
        if r == c {
            Complex::new(vals[r].cos(), vals[r].sin())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    cmatmul(&cmatmul(&vecs, &phases), &vecs.adjoint())
}

/// Largest modulus of `u† u - 1`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let g = cmatmul_adj(u, u);
    let n = g.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((g[(i, j)] - cx(target)).norm_sqr().sqrt());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> CMatrix<f64> {
        CMatrix::from_fn(n, n, |r, c| Complex::new((r * 3 + c) as f64 * 0.1, (r as f64 - c as f64) * 0.2))
    }

    #[test]
    fn split_product_matches_direct_product() {
        let a = sample(5);
        let b = sample(5).transpose();
        let d = cmatmul(&a, &b) - &a * &b;
        assert!(max_abs(&d) < 1e-12);
        let e = cmatmul_adj(&a, &b) - a.adjoint() * &b;
        assert!(max_abs(&e) < 1e-12);
    }

    #[test]
    fn real_operands_take_shortcuts() {
        let a = sample(4);
        let r = a.map(|z| Complex::new(z.re, 0.0));
        for (x, y) in [(&r, &r), (&r, &a), (&a, &r)] {
            assert!(max_abs(&(cmatmul(x, y) - x * y)) < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigenpairs_reconstruct() {
        let a = sample(6);
        let h = &a + a.adjoint();
        let (vals, vecs) = herm_eig(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(6, vals.iter().map(|&v| cx(v))));
        let back = cmatmul(&cmatmul(&vecs, &d), &vecs.adjoint());
        assert!(max_abs(&(back - h)) < 1e-10);
        assert!(unitarity_defect(&vecs) < 1e-10);
    }

    #[test]
    fn exponential_of_hermitian_is_unitary() {
        let a = sample(4);
        let h = &a + a.adjoint();
        assert!(unitarity_defect(&expi_hermitian(&h)) < 1e-10);
    }
}
