//! Compressed sparse row storage for graph Laplacians and `I + L`.

use nalgebra::DMatrix;

use crate::graph::{Graph, ResidualGraph};

/// Square CSR matrix with sorted column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.binary_search(&i).map(|k| v[k]).unwrap_or(0.0)
            })
            .collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    /// `Y = A X` for `width` interleaved right-hand sides stored node-major
    /// (`x[i * width + lane]`).
    pub fn mul_block(&self, x: &[f64], y: &mut [f64], width: usize) {
        debug_assert_eq!(x.len(), self.n * width);
        for i in 0..self.n {
            let out = &mut y[i * width..(i + 1) * width];
            out.fill(0.0);
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                let xj = &x[j * width..(j + 1) * width];
                for (o, &xv) in out.iter_mut().zip(xj) {
                    *o += a * xv;
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                m[(i, j)] = a;
            }
        }
        m
    }

    fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable_by_key(|&(j, _)| j);
            for (j, a) in r {
                cols.push(j);
                vals.push(a);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }
}

fn assemble(g: &ResidualGraph<'_>, shift: f64) -> CsrMatrix {
    let n = g.node_count();
    let mut diag = vec![shift; n];
    let mut rows: Vec<Vec<(usize, f64)>> = (0..n).map(|u| Vec::with_capacity(g.degree(u) + 1)).collect();
    for (_, e) in g.alive_edges() {
        diag[e.u] += e.weight;
        diag[e.v] += e.weight;
        rows[e.u].push((e.v, -e.weight));
        rows[e.v].push((e.u, -e.weight));
    }
    for (u, d) in diag.into_iter().enumerate() {
        rows[u].push((u, d));
    }
    CsrMatrix::from_rows(n, rows)
}

/// Weighted Laplacian `L = D - A` of the current graph.
pub fn laplacian(g: &ResidualGraph<'_>) -> CsrMatrix {
    assemble(g, 0.0)
}

/// `I + L`, the SDDM matrix whose inverse is the forest matrix.
pub fn identity_plus_laplacian(g: &ResidualGraph<'_>) -> CsrMatrix {
    assemble(g, 1.0)
}

/// Laplacian of a whole graph.
pub fn build_laplacian(g: &Graph) -> CsrMatrix {
    laplacian(&ResidualGraph::full(g))
}
