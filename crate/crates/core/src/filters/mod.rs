//! Spectral-domain filtering: direct convolution in the Laplacian eigenbasis,
//! spline-smoothed spectral filters, and Chebyshev polynomial filters that
//! avoid the eigendecomposition altogether.

mod chebyshev;
mod spline;

use ndarray::{Array2, ArrayView1, ArrayView2, ArrayView3, Axis};

pub use chebyshev::{cheb_apply, cheb_layer_forward, chebyshev_terms, rescale_laplacian, ChebCoeffs};
pub use spline::{build_spline_kernel, spline_filter_diag, SplineFilterSpec};

use crate::error::{check_dim, Result};
use crate::nn::Activation;
use crate::spectral::SpectralBasis;

/// `U · diag(ĝ) · Uᵀ · x`.
pub fn spectral_conv(
    basis: &SpectralBasis,
    g_hat: ArrayView1<'_, f64>,
    x: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_dim("spectral filter length", basis.d(), g_hat.len())?;
    check_dim("spectral convolution rows", basis.n(), x.nrows())?;
    let u = basis.eigenvectors();
    let mut coeffs = u.t().dot(&x);
    for (mut row, &g) in coeffs.axis_iter_mut(Axis(0)).zip(g_hat.iter()) {
        row *= g;
    }
    Ok(u.dot(&coeffs))
}

/// Spectral convolution layer with one diagonal filter per channel pair:
/// output channel `j` is `σ(U Σ_i diag(G[i, j, :]) Uᵀ x_i)`. `filters` has
/// shape `(f_in, f_out, d)`; spline-parametrized filters are produced by
/// [`spline_filter_diag`].
pub fn spectral_layer_forward(
    basis: &SpectralBasis,
    filters: ArrayView3<'_, f64>,
    x: ArrayView2<'_, f64>,
    activation: Activation,
) -> Result<Array2<f64>> {
    let (f_in, f_out, d) = filters.dim();
    check_dim("spectral layer input channels", f_in, x.ncols())?;
    check_dim("spectral layer filter length", basis.d(), d)?;
    check_dim("spectral layer rows", basis.n(), x.nrows())?;
    let u = basis.eigenvectors();
    let xhat = u.t().dot(&x);
    let mut yhat = Array2::zeros((d, f_out));
    for j in 0..f_out {
        for i in 0..f_in {
            for l in 0..d {
                yhat[[l, j]] += filters[[i, j, l]] * xhat[[l, i]];
            }
        }
    }
    Ok(activation.apply(&u.dot(&yhat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, laplacian, LaplacianKind};
    use crate::spectral::laplacian_basis;
    use ndarray::{Array1, Array3};

    fn ring5() -> crate::SparseGraph {
        let edges: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5, 1.0)).collect();
        build_graph(&edges, 5, false).unwrap()
    }

    #[test]
    fn identity_filter() {
        let b = laplacian_basis(&ring5(), LaplacianKind::Combinatorial, None).unwrap();
        let x = Array2::from_shape_fn((5, 2), |(i, j)| (i + 2 * j) as f64);
        let y = spectral_conv(&b, Array1::ones(5).view(), x.view()).unwrap();
        assert!((&y - &x).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dc_filter_averages_columns() {
        let b = laplacian_basis(&ring5(), LaplacianKind::Combinatorial, None).unwrap();
        let x = Array2::from_shape_fn((5, 2), |(i, j)| (i * i) as f64 - j as f64);
        let mut g = Array1::zeros(5);
        g[0] = 1.0;
        let y = spectral_conv(&b, g.view(), x.view()).unwrap();
        let means = x.mean_axis(Axis(0)).unwrap();
        for row in y.rows() {
            assert!((&row - &means).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn eigenvalue_filter_is_laplacian() {
        let g = ring5();
        let b = laplacian_basis(&g, LaplacianKind::Combinatorial, None).unwrap();
        let x = Array2::from_shape_fn((5, 1), |(i, _)| (i as f64).sin());
        let y = spectral_conv(&b, b.eigenvalues().view(), x.view()).unwrap();
        let lx = laplacian(&g, LaplacianKind::Combinatorial).unwrap().mul_dense(x.view()).unwrap();
        assert!((&y - &lx).iter().all(|v| v.abs() < 1e-9));
        assert!(spectral_conv(&b, Array1::ones(4).view(), x.view()).is_err());
    }

    #[test]
    fn spectral_layer_with_spline_filters() {
        let g = ring5();
        let b = laplacian_basis(&g, LaplacianKind::Combinatorial, None).unwrap();
        let spec = build_spline_kernel(3, 5).unwrap();
        let alphas = [[0.5, 1.0, -0.5], [1.0, 0.0, 2.0]];
        let mut filters = Array3::zeros((2, 1, 5));
        for (i, alpha) in alphas.iter().enumerate() {
            let diag = spline_filter_diag(&spec, ndarray::arr1(alpha).view()).unwrap();
            filters.slice_mut(ndarray::s![i, 0, ..]).assign(&diag);
        }
        let x = Array2::from_shape_fn((5, 2), |(i, j)| (i as f64 - 2.0) * (1.0 + j as f64));
        let y = spectral_layer_forward(&b, filters.view(), x.view(), Activation::Identity).unwrap();
        let mut expected = Array2::zeros((5, 1));
        for i in 0..2 {
            let g_hat = filters.slice(ndarray::s![i, 0, ..]);
            expected += &spectral_conv(&b, g_hat, x.slice(ndarray::s![.., i..i + 1])).unwrap();
        }
        assert!((&y - &expected).iter().all(|v| v.abs() < 1e-12));
    }
}
