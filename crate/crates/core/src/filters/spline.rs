use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{check_dim, Error, Result};

/// Fixed `d × K` natural-cubic-spline interpolation kernel. Column `j` is the
/// spline through the `j`-th unit control vector; knots and evaluation points
/// are uniformly spaced over the same interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFilterSpec {
    k_control: usize,
    d_target: usize,
    kernel: Array2<f64>,
}

impl SplineFilterSpec {
    pub fn k_control(&self) -> usize {
        self.k_control
    }

    pub fn d_target(&self) -> usize {
        self.d_target
    }

    pub fn kernel(&self) -> &Array2<f64> {
        &self.kernel
    }
}

/// Second derivatives of the natural cubic spline through `y` on unit-spaced
/// knots (`M_0 = M_{K-1} = 0`), by the Thomas algorithm.
fn natural_second_derivatives(y: &[f64]) -> Vec<f64> {
    let k = y.len();
    let mut m = vec![0.0; k];
    if k < 3 {
        return m;
    }
    let interior = k - 2;
    // M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i+1} − 2 y_i + y_{i-1})
    let mut c_prime = vec![0.0; interior];
    let mut d_prime = vec![0.0; interior];
    for row in 0..interior {
        let i = row + 1;
        let rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
        if row == 0 {
            c_prime[row] = 1.0 / 4.0;
            d_prime[row] = rhs / 4.0;
        } else {
            let denom = 4.0 - c_prime[row - 1];
            c_prime[row] = 1.0 / denom;
            d_prime[row] = (rhs - d_prime[row - 1]) / denom;
        }
    }
    for row in (0..interior).rev() {
        let next = if row + 1 < interior { m[row + 2] } else { 0.0 };
        m[row + 1] = d_prime[row] - c_prime[row] * next;
    }
    m
}

pub fn build_spline_kernel(k_control: usize, d_target: usize) -> Result<SplineFilterSpec> {
    if k_control < 2 {
        return Err(Error::InvalidArgument(format!(
            "spline kernel needs at least 2 control points, got {k_control}"
        )));
    }
    if k_control > d_target {
        return Err(Error::InvalidArgument(format!(
            "spline kernel needs K ≤ d, got K={k_control}, d={d_target}"
        )));
    }
    let segments = k_control - 1;
    let steps = d_target - 1;
    let mut kernel = Array2::zeros((d_target, k_control));
    for j in 0..k_control {
        let mut y = vec![0.0; k_control];
        y[j] = 1.0;
        let m = natural_second_derivatives(&y);
        for i in 0..d_target {
            // Evaluation point i sits at knot coordinate i·(K−1)/(d−1).
            let scaled = i * segments;
            let mut interval = scaled / steps;
            let remainder = scaled % steps;
            if remainder == 0 {
                kernel[[i, j]] = y[interval];
                continue;
            }
            if interval == segments {
                interval -= 1;
            }
            let tau = remainder as f64 / steps as f64;
            let (y0, y1) = (y[interval], y[interval + 1]);
            let (m0, m1) = (m[interval], m[interval + 1]);
            let one_minus = 1.0 - tau;
            kernel[[i, j]] = m0 * one_minus.powi(3) / 6.0
                + m1 * tau.powi(3) / 6.0
                + (y0 - m0 / 6.0) * one_minus
                + (y1 - m1 / 6.0) * tau;
        }
    }
    Ok(SplineFilterSpec {
        k_control,
        d_target,
        kernel,
    })
}

/// Spectral filter diagonal `𝒦·α` from `K` control values.
pub fn spline_filter_diag(spec: &SplineFilterSpec, alpha: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    check_dim("spline control values", spec.k_control, alpha.len())?;
    Ok(spec.kernel.dot(&alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    /// Independent natural cubic spline: solves for the 4 coefficients of every
    /// segment at once with dense Gaussian elimination.
    fn oracle_spline(knots: &[f64], y: &[f64], x: f64) -> f64 {
        let segs = knots.len() - 1;
        let n = 4 * segs;
        let mut a = vec![vec![0.0; n + 1]; n];
        let mut row = 0;
        let poly = |t: f64| [1.0, t, t * t, t * t * t];
        let d1 = |t: f64| [0.0, 1.0, 2.0 * t, 3.0 * t * t];
        let d2 = |t: f64| [0.0, 0.0, 2.0, 6.0 * t];
        for s in 0..segs {
            for (t, val) in [(knots[s], y[s]), (knots[s + 1], y[s + 1])] {
                let p = poly(t);
                for c in 0..4 {
                    a[row][4 * s + c] = p[c];
                }
                a[row][n] = val;
                row += 1;
            }
        }
        for s in 0..segs.saturating_sub(1) {
            let t = knots[s + 1];
            for basis in [d1(t), d2(t)] {
                for c in 0..4 {
                    a[row][4 * s + c] = basis[c];
                    a[row][4 * (s + 1) + c] = -basis[c];
                }
                row += 1;
            }
        }
        for (s, t) in [(0, knots[0]), (segs - 1, knots[segs])] {
            let b = d2(t);
            for c in 0..4 {
                a[row][4 * s + c] = b[c];
            }
            row += 1;
        }
        assert_eq!(row, n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            for r in 0..n {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    if f != 0.0 {
                        for c in col..=n {
                            a[r][c] -= f * a[col][c];
                        }
                    }
                }
            }
        }
        let coef: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
        let s = (0..segs)
            .find(|&s| x <= knots[s + 1] + 1e-15)
            .unwrap_or(segs - 1);
        let p = poly(x);
        (0..4).map(|c| coef[4 * s + c] * p[c]).sum()
    }

    #[test]
    fn identity_when_k_equals_d() {
        for k in 2..9 {
            let spec = build_spline_kernel(k, k).unwrap();
            assert_eq!(spec.kernel(), &Array2::<f64>::eye(k));
        }
    }

    #[test]
    fn reproduces_constants() {
        let spec = build_spline_kernel(5, 23).unwrap();
        for row in spec.kernel().rows() {
            assert!((row.sum() - 1.0).abs() < 1e-10);
        }
        let out = spline_filter_diag(&spec, Array1::from_elem(5, 2.5).view()).unwrap();
        assert!(out.iter().all(|v| (v - 2.5).abs() < 1e-10));
    }

    #[test]
    fn two_knots_are_linear() {
        let spec = build_spline_kernel(2, 6).unwrap();
        let out = spline_filter_diag(&spec, array![1.0, 3.0].view()).unwrap();
        for (i, v) in out.iter().enumerate() {
            assert!((v - (1.0 + 2.0 * i as f64 / 5.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_and_identity_filters() {
        let spec = build_spline_kernel(4, 10).unwrap();
        let zero = spline_filter_diag(&spec, Array1::zeros(4).view()).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let spec = build_spline_kernel(4, 4).unwrap();
        let alpha = array![0.3, -1.0, 2.0, 5.0];
        assert_eq!(spline_filter_diag(&spec, alpha.view()).unwrap(), alpha);
    }

    #[test]
    fn bump_matches_independent_spline() {
        let spec = build_spline_kernel(3, 7).unwrap();
        let out = spline_filter_diag(&spec, array![0.0, 1.0, 0.0].view()).unwrap();
        let knots = [0.0, 0.5, 1.0];
        for i in 0..7 {
            let x = i as f64 / 6.0;
            let expected = oracle_spline(&knots, &[0.0, 1.0, 0.0], x);
            assert!((out[i] - expected).abs() < 1e-12, "i={i}: {} vs {expected}", out[i]);
            assert!((out[i] - out[6 - i]).abs() < 1e-14);
        }
        assert_eq!(out[3], 1.0);
    }

    #[test]
    fn random_kernels_match_oracle() {
        let (k, d) = (6, 17);
        let spec = build_spline_kernel(k, d).unwrap();
        let alpha = array![0.2, -1.3, 0.7, 2.2, -0.4, 1.0];
        let out = spline_filter_diag(&spec, alpha.view()).unwrap();
        let knots: Vec<f64> = (0..k).map(|j| j as f64 / (k - 1) as f64).collect();
        for i in 0..d {
            let expected = oracle_spline(&knots, alpha.as_slice().unwrap(), i as f64 / (d - 1) as f64);
            assert!((out[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_sizes() {
        assert!(build_spline_kernel(1, 5).is_err());
        assert!(build_spline_kernel(6, 5).is_err());
        let spec = build_spline_kernel(3, 5).unwrap();
        assert!(spline_filter_diag(&spec, Array1::zeros(4).view()).is_err());
    }
}
