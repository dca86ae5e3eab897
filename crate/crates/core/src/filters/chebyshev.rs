use ndarray::{Array2, ArrayView2, ArrayView3};

use crate::error::{check_dim, Error, Result};
use crate::graph::SparseSymMatrix;
use crate::nn::Activation;

/// Chebyshev filter coefficients `θ_0..θ_{K-1}` and the spectral bound used to
/// rescale the Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebCoeffs {
    theta: Vec<f64>,
    lambda_max: f64,
}

impl ChebCoeffs {
    pub fn new(theta: Vec<f64>, lambda_max: f64) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidArgument("Chebyshev filter needs K ≥ 1".into()));
        }
        check_lambda_max(lambda_max)?;
        Ok(Self { theta, lambda_max })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Polynomial order `K`.
    pub fn order(&self) -> usize {
        self.theta.len()
    }
}

fn check_lambda_max(lambda_max: f64) -> Result<()> {
    if lambda_max > 0.0 && lambda_max.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "lambda_max must be positive, got {lambda_max}"
        )))
    }
}

/// `L̃ = 2L/λ_max − I`.
pub fn rescale_laplacian(l: &SparseSymMatrix, lambda_max: f64) -> Result<SparseSymMatrix> {
    check_lambda_max(lambda_max)?;
    Ok(l.affine(2.0 / lambda_max, -1.0))
}

/// `[T_0(L̃)x, …, T_{K-1}(L̃)x]` by the three-term recurrence on signals.
pub fn chebyshev_terms(
    l_tilde: &SparseSymMatrix,
    x: ArrayView2<'_, f64>,
    order: usize,
) -> Result<Vec<Array2<f64>>> {
    check_dim("Chebyshev signal rows", l_tilde.n(), x.nrows())?;
    let mut terms: Vec<Array2<f64>> = Vec::with_capacity(order);
    if order == 0 {
        return Ok(terms);
    }
    terms.push(x.to_owned());
    if order > 1 {
        terms.push(l_tilde.mul_dense(x)?);
    }
    for k in 2..order {
        let mut next = l_tilde.mul_dense(terms[k - 1].view())?;
        next *= 2.0;
        next -= &terms[k - 2];
        terms.push(next);
    }
    Ok(terms)
}

/// `y = Σ_k θ_k T_k(L̃) x`, never forming `T_k(L̃)` as a matrix.
pub fn cheb_apply(
    coeffs: &ChebCoeffs,
    l: &SparseSymMatrix,
    x: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    check_dim("Chebyshev signal rows", l.n(), x.nrows())?;
    let l_tilde = rescale_laplacian(l, coeffs.lambda_max)?;
    // Only two previous terms are alive at any time.
    let mut prev = x.to_owned();
    let mut y = &prev * coeffs.theta[0];
    if coeffs.order() == 1 {
        return Ok(y);
    }
    let mut curr = l_tilde.mul_dense(x)?;
    y.scaled_add(coeffs.theta[1], &curr);
    for &theta in &coeffs.theta[2..] {
        let mut next = l_tilde.mul_dense(curr.view())?;
        next *= 2.0;
        next -= &prev;
        y.scaled_add(theta, &next);
        prev = curr;
        curr = next;
    }
    Ok(y)
}

/// One Chebyshev convolution layer: output channel `j` is
/// `σ(Σ_i Σ_k θ[i, j, k] T_k(L̃) x_i)`. `params` has shape `(f_in, f_out, K)`.
pub fn cheb_layer_forward(
    params: ArrayView3<'_, f64>,
    lambda_max: f64,
    l: &SparseSymMatrix,
    x: ArrayView2<'_, f64>,
    activation: Activation,
) -> Result<Array2<f64>> {
    let (f_in, f_out, order) = params.dim();
    check_dim("Chebyshev layer input channels", f_in, x.ncols())?;
    if order == 0 {
        return Err(Error::InvalidArgument("Chebyshev layer needs K ≥ 1".into()));
    }
    let l_tilde = rescale_laplacian(l, lambda_max)?;
    let terms = chebyshev_terms(&l_tilde, x, order)?;
    let mut out = Array2::zeros((x.nrows(), f_out));
    for (k, term) in terms.iter().enumerate() {
        let theta_k = params.index_axis(ndarray::Axis(2), k);
        out += &term.dot(&theta_k);
    }
    Ok(activation.apply(&out))
}
