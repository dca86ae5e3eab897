//! Symmetric eigensolvers.
//!
//! Dense path: Householder reduction to tridiagonal form followed by the
//! implicit QL iteration (the classic EISPACK `tred2`/`tql2` pair). Partial
//! path: Lanczos with full reorthogonalization, whose projected tridiagonal
//! problems are solved with the same QL kernel.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::SparseSymMatrix;

/// Row-major square matrix used by the dense kernels.
struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    fn sub(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] -= v;
    }
}

/// Householder tridiagonalization. On return `d` holds the diagonal, `e[1..]`
/// the subdiagonal and `v` the accumulated orthogonal transform.
fn tridiagonalize(v: &mut Square, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.at(j, j) * f;
                for k in (j + 1)..i {
                    g += v.at(k, j) * d[k];
                    e[k] += v.at(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v.sub(k, j, f * e[k] + g * d[k]);
                }
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        let vii = v.at(i, i);
        v.set(n - 1, i, vii);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                for k in 0..=i {
                    v.sub(k, j, g * d[k]);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit QL on a symmetric tridiagonal matrix (`d` diagonal, `e[1..]`
/// subdiagonal), rotating the columns of `v` along. Eigenvalues are left
/// unsorted in `d`.
fn tridiagonal_ql(v: &mut Square, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = v.n;
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let max_iter = 30 * n.max(10);
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NotConverged {
                        iterations: iter,
                        residual: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let row = k * n;
                        let h = v.data[row + i + 1];
                        let vi = v.data[row + i];
                        v.data[row + i + 1] = s * vi + c * h;
                        v.data[row + i] = c * vi - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Ascending eigenpairs, eigenvectors as columns.
fn sorted_pairs(d: &[f64], v: &Square, keep: usize) -> (Array1<f64>, Array2<f64>) {
    let n = v.n;
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    order.truncate(keep);
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = Array2::from_shape_fn((n, keep), |(row, col)| v.at(row, order[col]));
    (values, vectors)
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn dense_symmetric_eigen(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = m.nrows();
    let mut v = Square {
        n,
        data: m.iter().copied().collect(),
    };
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;
    Ok(sorted_pairs(&d, &v, n))
}

/// Eigenpairs of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = diag.len();
    let mut v = Square {
        n,
        data: vec![0.0; n * n],
    };
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(&off[..(n - 1)]);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;
    Ok(sorted_pairs(&d, &v, n))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Smallest `d` eigenpairs by Lanczos with full reorthogonalization. The
/// Krylov space grows until every requested Ritz pair meets `tol` (relative to
/// `max(1, |λ|)`) or spans the whole space. The start vector is drawn from a
/// fixed-seed generator so results are reproducible.
///
/// Exact multiplicities can be under-resolved when the Krylov space is much
/// smaller than `n`; callers needing degenerate spectra should use the dense
/// path.
pub fn lanczos_smallest(
    m: &SparseSymMatrix,
    d: usize,
    tol: f64,
) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c_2005);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let fresh_direction = |basis: &[Vec<f64>], rng: &mut ChaCha8Rng| -> Option<Vec<f64>> {
        for _ in 0..8 {
            let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            for _ in 0..2 {
                for q in basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let nw = norm(&w);
            if nw > 1e-8 {
                w.iter_mut().for_each(|x| *x /= nw);
                return Some(w);
            }
        }
        None
    };

    let mut target = n.min((2 * d + 20).max(40));
    let mut q = fresh_direction(&basis, &mut rng).expect("n ≥ 1");
    loop {
        while basis.len() < target {
            let mut w = m.mul_vec(&q)?;
            let alpha = dot(&q, &w);
            basis.push(q.clone());
            alphas.push(alpha);
            for _ in 0..2 {
                for qb in &basis {
                    let c = dot(qb, &w);
                    w.iter_mut().zip(qb).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            if basis.len() == n {
                break;
            }
            let beta = norm(&w);
            let scale = alpha.abs().max(betas.last().copied().unwrap_or(0.0)).max(1.0);
            if beta > 1e-10 * scale {
                betas.push(beta);
                q = w.into_iter().map(|x| x / beta).collect();
            } else {
                // Invariant subspace found; continue in a fresh orthogonal direction.
                betas.push(0.0);
                match fresh_direction(&basis, &mut rng) {
                    Some(next) => q = next,
                    None => break,
                }
            }
        }

        let k = basis.len();
        let (theta, s) = tridiagonal_eigen(&alphas[..k], &betas[..k.saturating_sub(1)])?;
        let keep = d.min(k);
        let mut vectors = Array2::<f64>::zeros((n, keep));
        for col in 0..keep {
            for (j, qj) in basis.iter().enumerate() {
                let c = s[[j, col]];
                if c != 0.0 {
                    for row in 0..n {
                        vectors[[row, col]] += c * qj[row];
                    }
                }
            }
        }
        let mut worst: f64 = 0.0;
        for col in 0..keep {
            let y: Vec<f64> = vectors.column(col).to_vec();
            let my = m.mul_vec(&y)?;
            let r: f64 = my
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - theta[col] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r / theta[col].abs().max(1.0));
        }
        if keep == d && worst <= tol {
            let values = theta.iter().take(d).copied().collect();
            return Ok((values, vectors));
        }
        if k >= n || target >= n {
            return Err(Error::NotConverged {
                iterations: k,
                residual: worst,
            });
        }
        target = n.min(target * 2);
    }
}
