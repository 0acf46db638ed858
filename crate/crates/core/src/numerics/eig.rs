use num_complex::Complex64;

use super::dense::DenseMatrix;
use super::{NumericsError, Result, SparseOperator, StateVector};

#[derive(Debug, Clone)]
pub struct EigOptions {
    /// Residual and orthonormality tolerance, relative to ‖H‖.
    pub tol: f64,
    /// Dimensions up to this bound use the dense Jacobi path.
    pub dense_threshold: usize,
    /// Lanczos basis cap for the iterative path.
    pub max_lanczos_dim: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { tol: 1e-9, dense_threshold: 400, max_lanczos_dim: 320 }
    }
}

/// The `k` lowest eigenpairs of a hermitian-flagged operator, eigenvalues
/// ascending, eigenvectors unit norm. Residuals are verified against
/// `tol * ‖H‖` before returning.
pub fn lowest_eigenpair(op: &SparseOperator, k: usize) -> Result<Vec<(f64, StateVector)>> {
    lowest_eigenpair_with(op, k, &EigOptions::default())
}

pub fn lowest_eigenpair_with(
    op: &SparseOperator,
    k: usize,
    opts: &EigOptions,
) -> Result<Vec<(f64, StateVector)>> {
    if !op.is_hermitian_flagged() {
        return Err(NumericsError::HermitianRequired);
    }
    let dim = op.dim();
    if k > dim {
        return Err(NumericsError::TooManyEigenpairs { k, dim });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let pairs = if dim <= opts.dense_threshold {
        dense_lowest(op, k)?
    } else {
        lanczos_lowest(op, k, opts)?
    };
    verify_pairs(op, &pairs, opts.tol)?;
    Ok(pairs)
}

fn verify_pairs(op: &SparseOperator, pairs: &[(f64, StateVector)], tol: f64) -> Result<()> {
    let scale = op.norm_inf().max(f64::MIN_POSITIVE);
    for (i, (lambda, v)) in pairs.iter().enumerate() {
        let mut r = op.apply(v)?;
        r.axpy(Complex64::new(-lambda, 0.0), v);
        if r.norm() > tol * scale {
            return Err(NumericsError::EigNotConverged { iterations: 0 });
        }
        for (_, w) in &pairs[..i] {
            if w.dot(v).norm() > tol {
                return Err(NumericsError::EigNotConverged { iterations: 0 });
            }
        }
    }
    Ok(())
}

/// Dense complex-hermitian Jacobi eigensolver.
fn dense_lowest(op: &SparseOperator, k: usize) -> Result<Vec<(f64, StateVector)>> {
    let n = op.dim();
    let mut a = DenseMatrix::zeros(n);
    for (r, c, v) in op.entries() {
        a[(r, c)] = v;
    }
    let (evals, evecs) = jacobi_hermitian(&mut a)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    Ok(order[..k]
        .iter()
        .map(|&idx| {
            let v = StateVector::new((0..n).map(|r| evecs[(r, idx)]).collect()).normalized();
            (evals[idx], v)
        })
        .collect())
}

/// Cyclic Jacobi sweeps with complex rotations. Destroys `a`; returns
/// (eigenvalues unsorted, eigenvector columns).
fn jacobi_hermitian(a: &mut DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.n();
    let mut v = DenseMatrix::identity(n);
    if n == 1 {
        return Ok((vec![a[(0, 0)].re], v));
    }
    let scale: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;
    let max_sweeps = 60;
    for sweep in 0..max_sweeps {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            let evals = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((evals, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tol / (n as f64) {
                    continue;
                }
                let phase = apq / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s·phase], [-s·conj(phase), c]] zeroes a_pq in G†AG.
                let gpq = Complex64::new(s, 0.0) * phase;
                let gqp = -Complex64::new(s, 0.0) * phase.conj();
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * gqp.conj();
                    a[(q, k)] = apk * gpq.conj() + aqk * c;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * c;
                }
            }
        }
        let _ = sweep;
    }
    Err(NumericsError::EigNotConverged { iterations: max_sweeps })
}

/// Lanczos with full reorthogonalization for large dimensions; adequate for
/// well-separated low eigenvalues, which is all the iterative path serves.
fn lanczos_lowest(
    op: &SparseOperator,
    k: usize,
    opts: &EigOptions,
) -> Result<Vec<(f64, StateVector)>> {
    let n = op.dim();
    let m = opts.max_lanczos_dim.min(n).max(2 * k + 2);
    let mut basis: Vec<StateVector> = Vec::with_capacity(m);
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    // Deterministic, dense seed vector.
    let seed = StateVector::new(
        (0..n)
            .map(|i| Complex64::new(((i as f64) + 1.0).sin() + 0.5, ((i as f64) * 0.7).cos()))
            .collect(),
    )
    .normalized();
    basis.push(seed);

    for j in 0..m {
        let mut w = op.apply(&basis[j])?;
        let alpha = basis[j].dot(&w).re;
        alphas.push(alpha);
        w.axpy(Complex64::new(-alpha, 0.0), &basis[j]);
        if j > 0 {
            w.axpy(Complex64::new(-betas[j - 1], 0.0), &basis[j - 1]);
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dot(&w);
                w.axpy(-coeff, b);
            }
        }
        let beta = w.norm();
        if beta < 1e-13 * op.norm_inf().max(1.0) || j + 1 == m {
            break;
        }
        betas.push(beta);
        w.scale(Complex64::new(1.0 / beta, 0.0));
        basis.push(w);
    }

    let steps = alphas.len();
    if steps < k {
        return Err(NumericsError::EigNotConverged { iterations: steps });
    }
    let mut tri = DenseMatrix::zeros(steps);
    for i in 0..steps {
        tri[(i, i)] = Complex64::new(alphas[i], 0.0);
        if i + 1 < steps {
            tri[(i, i + 1)] = Complex64::new(betas[i], 0.0);
            tri[(i + 1, i)] = Complex64::new(betas[i], 0.0);
        }
    }
    let (evals, evecs) = jacobi_hermitian(&mut tri)?;
    let mut order: Vec<usize> = (0..steps).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());

    let mut out = Vec::with_capacity(k);
    for &idx in &order[..k] {
        let mut ritz = StateVector::zero(n);
        for (row, b) in basis.iter().enumerate() {
            ritz.axpy(evecs[(row, idx)], b);
        }
        out.push((evals[idx], ritz.normalized()));
    }
    Ok(out)
}
