//! Spectral bases of graph Laplacians, the graph Fourier transform pair,
//! low-pass truncation, and Fiedler-vector bipartitioning.

mod eigen;

use ndarray::{s, Array1, Array2, ArrayView2};

pub use eigen::{dense_symmetric_eigen, lanczos_smallest, tridiagonal_eigen};

use crate::error::{check_dim, Error, Result};
use crate::graph::{connected_components, laplacian, LaplacianKind, SparseGraph, SparseSymMatrix};

/// Above this dimension [`EigenMethod::Auto`] switches from the dense solver
/// to Lanczos.
pub const DENSE_LIMIT: usize = 2048;

/// Entries at or below this magnitude count as zero for sign decisions.
pub const ZERO_TOL: f64 = 1e-12;

/// Ascending eigenvalues and column-orthonormal eigenvectors of a symmetric
/// matrix, each column oriented so its first non-negligible entry is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<f64>,
    source_kind: Option<LaplacianKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Auto,
    Dense,
    Lanczos,
}

impl SpectralBasis {
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Array2<f64> {
        &self.eigenvectors
    }

    pub fn source_kind(&self) -> Option<LaplacianKind> {
        self.source_kind
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Number of retained eigenpairs.
    pub fn d(&self) -> usize {
        self.eigenvectors.ncols()
    }
}

fn orient_columns(vectors: &mut Array2<f64>) {
    for mut col in vectors.columns_mut() {
        if let Some(&first) = col.iter().find(|v| v.abs() > ZERO_TOL) {
            if first < 0.0 {
                col.mapv_inplace(|v| -v);
            }
        }
    }
}

/// First `d` eigenpairs (all when `d` is `None`) in ascending order.
pub fn eigendecompose(m: &SparseSymMatrix, d: Option<usize>) -> Result<SpectralBasis> {
    eigendecompose_with(m, d, EigenMethod::Auto)
}

pub fn eigendecompose_with(
    m: &SparseSymMatrix,
    d: Option<usize>,
    method: EigenMethod,
) -> Result<SpectralBasis> {
    let n = m.n();
    let d = d.unwrap_or(n);
    if d == 0 || d > n {
        return Err(Error::InvalidArgument(format!(
            "requested {d} eigenpairs of a {n}×{n} matrix"
        )));
    }
    let use_dense = match method {
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
        EigenMethod::Auto => n <= DENSE_LIMIT || d == n,
    };
    let (values, mut vectors) = if use_dense {
        let (values, vectors) = dense_symmetric_eigen(&m.to_dense())?;
        (
            values.slice(s![..d]).to_owned(),
            vectors.slice(s![.., ..d]).to_owned(),
        )
    } else {
        lanczos_smallest(m, d, 1e-10)?
    };
    orient_columns(&mut vectors);

    let worst = max_residual(m, &values, &vectors)?;
    if worst > 1e-8 {
        return Err(Error::NotConverged {
            iterations: 0,
            residual: worst,
        });
    }
    Ok(SpectralBasis {
        eigenvalues: values,
        eigenvectors: vectors,
        source_kind: None,
    })
}

/// `max_l ‖M u_l − λ_l u_l‖ / max(1, |λ_l|)`.
pub fn max_residual(m: &SparseSymMatrix, values: &Array1<f64>, vectors: &Array2<f64>) -> Result<f64> {
    let mu = m.mul_dense(vectors.view())?;
    let mut worst: f64 = 0.0;
    for (l, &lambda) in values.iter().enumerate() {
        let r = mu
            .column(l)
            .iter()
            .zip(vectors.column(l))
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r / lambda.abs().max(1.0));
    }
    Ok(worst)
}

/// Eigenbasis of the chosen Laplacian of `g`.
pub fn laplacian_basis(g: &SparseGraph, kind: LaplacianKind, d: Option<usize>) -> Result<SpectralBasis> {
    let l = laplacian(g, kind)?;
    let mut basis = eigendecompose(&l, d)?;
    basis.source_kind = Some(kind);
    Ok(basis)
}

/// Graph Fourier transform `Uᵀx`.
pub fn gft(basis: &SpectralBasis, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_dim("GFT signal rows", basis.n(), x.nrows())?;
    Ok(basis.eigenvectors.t().dot(&x))
}

/// Inverse transform `U·x̂`.
pub fn igft(basis: &SpectralBasis, xhat: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_dim("IGFT coefficient rows", basis.d(), xhat.nrows())?;
    Ok(basis.eigenvectors.dot(&xhat))
}

/// Keeps the `d` lowest-frequency eigenpairs.
pub fn lowpass_truncate(basis: &SpectralBasis, d: usize) -> Result<SpectralBasis> {
    if d == 0 || d > basis.d() {
        return Err(Error::InvalidArgument(format!(
            "cannot truncate a basis of {} vectors to {d}",
            basis.d()
        )));
    }
    Ok(SpectralBasis {
        eigenvalues: basis.eigenvalues.slice(s![..d]).to_owned(),
        eigenvectors: basis.eigenvectors.slice(s![.., ..d]).to_owned(),
        source_kind: basis.source_kind,
    })
}

/// Eigenvector of the second-smallest eigenvalue of the combinatorial
/// Laplacian (unit norm, orthogonal to the constant vector).
pub fn fiedler_vector(g: &SparseGraph) -> Result<Array1<f64>> {
    let (components, _) = connected_components(g);
    if components != 1 {
        return Err(Error::Disconnected(components));
    }
    if g.n_vertices() < 2 {
        return Err(Error::InvalidArgument(
            "the Fiedler vector needs at least two vertices".into(),
        ));
    }
    let basis = laplacian_basis(g, LaplacianKind::Combinatorial, Some(2))?;
    Ok(basis.eigenvectors.column(1).to_owned())
}

/// Per-vertex cluster labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<usize>) -> Self {
        Self { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == cluster)
            .map(|(v, _)| v)
            .collect()
    }
}

/// Sign split of the Fiedler vector: label 1 where the entry is positive,
/// label 0 otherwise (entries within [`ZERO_TOL`] of zero go to 0).
pub fn spectral_bipartition(g: &SparseGraph) -> Result<Partition> {
    let fiedler = fiedler_vector(g)?;
    Ok(Partition::new(
        fiedler
            .iter()
            .map(|&v| usize::from(v > ZERO_TOL))
            .collect(),
    ))
}

/// `cut(A, B) / min(vol(A), vol(B))` for clusters `a` and `b` of `part`.
pub fn conductance(g: &SparseGraph, part: &Partition, a: usize, b: usize) -> Result<f64> {
    check_dim("partition length", g.n_vertices(), part.labels.len())?;
    let degrees = g.degree_vector();
    let mut vol = [0.0, 0.0];
    let mut size = [0usize, 0usize];
    for (v, &label) in part.labels.iter().enumerate() {
        for (slot, cluster) in [a, b].into_iter().enumerate() {
            if label == cluster {
                vol[slot] += degrees[v];
                size[slot] += 1;
            }
        }
    }
    for (slot, cluster) in [a, b].into_iter().enumerate() {
        if size[slot] == 0 {
            return Err(Error::EmptyCluster(cluster));
        }
    }
    let cut: f64 = g
        .edges()
        .filter(|&(u, v, _)| {
            let (lu, lv) = (part.labels[u], part.labels[v]);
            (lu == a && lv == b) || (lu == b && lv == a)
        })
        .map(|(_, _, w)| w)
        .sum();
    let denom = vol[0].min(vol[1]);
    if denom == 0.0 {
        return Err(Error::ZeroVolume);
    }
    Ok(cut / denom)
}
