//! Undirected weighted graphs in CSR form and the matrices derived from them:
//! degree vectors, the three Laplacian variants, the incidence matrix, the
//! Dirichlet energy, and the normalized k-hop aggregators used by SIGN.

mod csr;
mod edgelist;

use std::collections::VecDeque;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

pub use csr::CsrMatrix;
pub use edgelist::{parse_edge_list, read_edge_list};

use crate::error::{check_dim, Error, Result};

/// Undirected graph with nonnegative edge weights. The adjacency matrix is
/// stored in both directions so every row lists all neighbours of a vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    adjacency: CsrMatrix,
    has_self_loops: bool,
}

/// Symmetric sparse matrix (Laplacians, aggregators, incidence products).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    csr: CsrMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    /// `D − A`
    Combinatorial,
    /// `I − D^{-1/2} A D^{-1/2}`
    SymmetricNormalized,
    /// `D̃^{-1/2} (A + I) D̃^{-1/2}`, the GCN propagation matrix
    Renormalized,
}

/// Oriented incidence matrix `K` (vertices × edges). Column `e` for the edge
/// `u < v` holds `+√a_uv` at row `u` and `−√a_uv` at row `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    n_vertices: usize,
    columns: Vec<(usize, usize, f64)>,
}

/// Options for [`sign_aggregator`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AggregatorOptions {
    /// Replace every nonzero of `A^k` by 1 before adding self-loops.
    pub binarize: bool,
    /// Maximum nonzeros allowed in any intermediate power. `None` uses
    /// `10·|E|·k`.
    pub nnz_budget: Option<usize>,
}

/// Builds an undirected graph on `n` vertices.
///
/// Repeated listings of the same ordered pair are summed; the two
/// orientations of a pair are merged with `max`, so listing an edge once or
/// in both directions yields the same graph. With `add_self_loops` every
/// vertex gains a unit self-loop.
pub fn build_graph(
    edges: &[(usize, usize, f64)],
    n: usize,
    add_self_loops: bool,
) -> Result<SparseGraph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    for &(u, v, w) in edges {
        for idx in [u, v] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, n });
            }
        }
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidWeight { u, v, weight: w });
        }
    }
    let directed = CsrMatrix::from_triplets(n, n, edges.iter().copied())?;
    let mut triplets = Vec::with_capacity(2 * directed.nnz() + n);
    for (i, j, w) in directed.iter() {
        let sym = w.max(directed.get(j, i));
        if sym > 0.0 {
            triplets.push((i, j, sym));
            if !directed_has(&directed, j, i) {
                triplets.push((j, i, sym));
            }
        }
    }
    if add_self_loops {
        triplets.extend((0..n).map(|i| (i, i, 1.0)));
    }
    let adjacency = CsrMatrix::from_triplets(n, n, triplets)?;
    Ok(SparseGraph::from_symmetric_adjacency(adjacency))
}

fn directed_has(m: &CsrMatrix, i: usize, j: usize) -> bool {
    m.row(i).0.binary_search(&j).is_ok()
}

impl SparseGraph {
    fn from_symmetric_adjacency(adjacency: CsrMatrix) -> Self {
        debug_assert!(adjacency.is_symmetric(0.0));
        let has_self_loops = (0..adjacency.n_rows()).any(|i| adjacency.get(i, i) != 0.0);
        Self {
            adjacency,
            has_self_loops,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.adjacency.n_rows()
    }

    pub fn has_self_loops(&self) -> bool {
        self.has_self_loops
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    /// Number of undirected edges, self-loops included.
    pub fn n_edges(&self) -> usize {
        self.edges().count()
    }

    pub fn neighbors(&self, v: usize) -> (&[usize], &[f64]) {
        self.adjacency.row(v)
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adjacency.get(u, v)
    }

    /// Each undirected edge once, as `(u, v, w)` with `u ≤ v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().filter(|&(i, j, _)| i <= j)
    }

    /// Row sums of the adjacency matrix.
    pub fn degree_vector(&self) -> Array1<f64> {
        self.adjacency.row_sums()
    }

    /// Relabels vertices: old vertex `v` becomes `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> Result<SparseGraph> {
        check_dim("vertex permutation", self.n_vertices(), perm.len())?;
        let triplets = self.adjacency.iter().map(|(i, j, w)| (perm[i], perm[j], w));
        let adjacency = CsrMatrix::from_triplets(self.n_vertices(), self.n_vertices(), triplets)?;
        Ok(Self::from_symmetric_adjacency(adjacency))
    }
}

/// Free-function form of [`SparseGraph::degree_vector`].
pub fn degree_vector(g: &SparseGraph) -> Array1<f64> {
    g.degree_vector()
}

impl SparseSymMatrix {
    /// Wraps a CSR matrix after checking it is square and symmetric within `tol`.
    pub fn try_from_csr(csr: CsrMatrix, tol: f64) -> Result<Self> {
        check_dim("symmetric matrix", csr.n_rows(), csr.n_cols())?;
        if !csr.is_symmetric(tol) {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        if csr.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self { csr })
    }

    /// Keeps entries of a dense symmetric matrix whose magnitude exceeds zero.
    pub fn from_dense(m: ArrayView2<'_, f64>) -> Result<Self> {
        let triplets = m
            .indexed_iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|((i, j), &v)| (i, j, v));
        let csr = CsrMatrix::from_triplets(m.nrows(), m.ncols(), triplets)?;
        Self::try_from_csr(csr, 0.0)
    }

    pub(crate) fn from_csr_unchecked(csr: CsrMatrix) -> Self {
        debug_assert!(csr.is_symmetric(1e-12));
        Self { csr }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            csr: CsrMatrix::identity(n),
        }
    }

    pub fn n(&self) -> usize {
        self.csr.n_rows()
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.csr
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.csr.get(i, j)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.csr.to_dense()
    }

    pub fn mul_dense(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.csr.mul_dense(x)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.csr.mul_vec(x)
    }

    /// `a·self + b·I`
    pub fn affine(&self, a: f64, b: f64) -> Self {
        let scaled = self.csr.map_values(|_, _, v| a * v);
        Self {
            csr: scaled.add_diagonal(b),
        }
    }

    /// Gershgorin upper bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n())
            .map(|i| self.csr.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn inverse_sqrt_degrees(degrees: &[f64]) -> Result<Vec<f64>> {
    degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d > 0.0 {
                Ok(1.0 / d.sqrt())
            } else {
                Err(Error::IsolatedVertex(i))
            }
        })
        .collect()
}

pub fn laplacian(g: &SparseGraph, kind: LaplacianKind) -> Result<SparseSymMatrix> {
    let a = g.adjacency();
    let csr = match kind {
        LaplacianKind::Combinatorial => {
            let degrees = g.degree_vector();
            CsrMatrix::diagonal(degrees.as_slice().expect("contiguous")).add_scaled(1.0, a, -1.0)?
        }
        LaplacianKind::SymmetricNormalized => {
            let s = inverse_sqrt_degrees(g.degree_vector().as_slice().expect("contiguous"))?;
            a.scale(&s, &s)
                .map_values(|_, _, v| -v)
                .add_diagonal(1.0)
        }
        LaplacianKind::Renormalized => normalize_with_self_loops(a)?,
    };
    Ok(SparseSymMatrix::from_csr_unchecked(csr))
}

/// `D̃^{-1/2} (M + I) D̃^{-1/2}` with `D̃` the row sums of `M + I`.
fn normalize_with_self_loops(m: &CsrMatrix) -> Result<CsrMatrix> {
    let tilde = m.add_diagonal(1.0);
    let s = inverse_sqrt_degrees(tilde.row_sums().as_slice().expect("contiguous"))?;
    Ok(tilde.scale(&s, &s))
}

/// `I + D^{-1/2} A D^{-1/2}`, the first-order propagation matrix before the
/// renormalization trick. Its spectrum lies in `[0, 2]`.
pub fn first_order_propagation(g: &SparseGraph) -> Result<SparseSymMatrix> {
    let s = inverse_sqrt_degrees(g.degree_vector().as_slice().expect("contiguous"))?;
    let csr = g.adjacency().scale(&s, &s).add_diagonal(1.0);
    Ok(SparseSymMatrix::from_csr_unchecked(csr))
}

impl IncidenceMatrix {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.columns.len()
    }

    /// Column `e` as `(u, v, √a_uv)`: `+√a_uv` at `u`, `−√a_uv` at `v`.
    pub fn column(&self, e: usize) -> (usize, usize, f64) {
        self.columns[e]
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut k = Array2::zeros((self.n_vertices, self.columns.len()));
        for (e, &(u, v, s)) in self.columns.iter().enumerate() {
            k[[u, e]] = s;
            k[[v, e]] = -s;
        }
        k
    }

    /// Edge gradient `Kᵀφ`.
    pub fn gradient(&self, phi: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim("incidence gradient", self.n_vertices, phi.len())?;
        Ok(self
            .columns
            .iter()
            .map(|&(u, v, s)| s * (phi[u] - phi[v]))
            .collect())
    }

    /// `K·Kᵀ`, which equals the combinatorial Laplacian of a loop-free graph.
    pub fn gram(&self) -> SparseSymMatrix {
        let triplets = self.columns.iter().flat_map(|&(u, v, s)| {
            let w = s * s;
            [(u, u, w), (v, v, w), (u, v, -w), (v, u, -w)]
        });
        let csr = CsrMatrix::from_triplets(self.n_vertices, self.n_vertices, triplets)
            .expect("edge endpoints are valid vertices");
        SparseSymMatrix::from_csr_unchecked(csr)
    }
}

/// Incidence matrix with one column per non-loop edge, oriented from the
/// lower to the higher vertex index. Self-loops have zero gradient and are
/// skipped.
pub fn incidence_matrix(g: &SparseGraph) -> IncidenceMatrix {
    let columns = g
        .edges()
        .filter(|&(u, v, _)| u != v)
        .map(|(u, v, w)| (u, v, w.sqrt()))
        .collect();
    IncidenceMatrix {
        n_vertices: g.n_vertices(),
        columns,
    }
}

/// `φᵀ L φ` with `L` the combinatorial Laplacian.
pub fn dirichlet_energy(g: &SparseGraph, phi: ArrayView1<'_, f64>) -> Result<f64> {
    check_dim("Dirichlet energy", g.n_vertices(), phi.len())?;
    let l = laplacian(g, LaplacianKind::Combinatorial)?;
    let phi_slice = phi.to_vec();
    let lphi = l.mul_vec(&phi_slice)?;
    Ok(lphi.iter().zip(&phi_slice).map(|(a, b)| a * b).sum())
}

/// `A^k` by repeated sparse products under the options' nonzero budget.
pub fn adjacency_power(g: &SparseGraph, k: usize, opts: AggregatorOptions) -> Result<CsrMatrix> {
    let a = g.adjacency();
    if k == 0 {
        return Ok(CsrMatrix::identity(g.n_vertices()));
    }
    let budget = opts
        .nnz_budget
        .unwrap_or_else(|| 10 * g.n_edges().max(1) * k);
    let mut power = a.clone();
    for step in 2..=k {
        power = power.matmul(a, Some(budget), step)?;
    }
    if power.nnz() > budget {
        return Err(Error::DensityBudget {
            k,
            nnz: power.nnz(),
            budget,
        });
    }
    Ok(power)
}

/// Normalized k-hop aggregator `A_k = D̃(k)^{-1/2} (A^k + I) D̃(k)^{-1/2}`,
/// with `A_0 = I`.
pub fn sign_aggregator(
    g: &SparseGraph,
    k: usize,
    opts: AggregatorOptions,
) -> Result<SparseSymMatrix> {
    if k == 0 {
        return Ok(SparseSymMatrix::identity(g.n_vertices()));
    }
    let mut power = adjacency_power(g, k, opts)?;
    if opts.binarize {
        power = power.map_values(|_, _, v| if v != 0.0 { 1.0 } else { 0.0 });
    }
    Ok(SparseSymMatrix::from_csr_unchecked(normalize_with_self_loops(
        &power,
    )?))
}

/// `A_k · X` computed without materializing `A^k`: walk-count degrees come
/// from `A^k·1` and the power is applied as `k` sparse-dense products. Same
/// result as `sign_aggregator(g, k, default)·X` with no densification.
pub fn aggregate_signal(g: &SparseGraph, k: usize, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_dim("aggregator input rows", g.n_vertices(), x.nrows())?;
    if k == 0 {
        return Ok(x.to_owned());
    }
    let a = g.adjacency();
    let mut walks = vec![1.0; g.n_vertices()];
    for _ in 0..k {
        walks = a.mul_vec(&walks)?;
    }
    let degrees: Vec<f64> = walks.iter().map(|w| w + 1.0).collect();
    let s = inverse_sqrt_degrees(&degrees)?;
    let mut scaled = x.to_owned();
    for (mut row, &si) in scaled.rows_mut().into_iter().zip(&s) {
        row *= si;
    }
    let mut propagated = scaled.clone();
    for _ in 0..k {
        propagated = a.mul_dense(propagated.view())?;
    }
    propagated += &scaled;
    for (mut row, &si) in propagated.rows_mut().into_iter().zip(&s) {
        row *= si;
    }
    Ok(propagated)
}

/// Breadth-first component labelling. Labels are assigned in order of the
/// lowest vertex index in each component.
pub fn connected_components(g: &SparseGraph) -> (usize, Vec<usize>) {
    let n = g.n_vertices();
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &u in g.neighbors(v).0 {
                if labels[u] == usize::MAX {
                    labels[u] = count;
                    queue.push_back(u);
                }
            }
        }
        count += 1;
    }
    (count, labels)
}

/// Hop distances from `source`; unreachable vertices get `usize::MAX`.
pub fn bfs_distances(g: &SparseGraph, source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n_vertices()];
    let mut queue = VecDeque::from([source]);
    dist[source] = 0;
    while let Some(v) = queue.pop_front() {
        for &u in g.neighbors(v).0 {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}
