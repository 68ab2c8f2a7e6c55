//! Preconditioned conjugate gradients for `I + L` systems.
//!
//! `I + L` is symmetric, strictly diagonally dominant and positive definite, so
//! plain CG always converges; the preconditioners only cut the iteration count.
//! Many right-hand sides are solved together in interleaved blocks so one pass
//! over the matrix serves every lane of the block.

use crate::error::{Error, Result};
use crate::par;
use crate::sparse::CsrMatrix;

/// Right-hand sides per interleaved block.
const BLOCK_WIDTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
    /// Zero fill-in incomplete Cholesky.
    IncompleteCholesky,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop once `‖(I+L)y - b‖ / ‖b‖` falls to this value.
    pub rel_tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-8,
            max_iterations: 5_000,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "solver tolerance must lie in (0, 1), got {}",
                self.rel_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "solver needs at least one iteration".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Lower-triangular factor in CSR form, diagonal last in each row.
#[derive(Debug)]
struct IncompleteFactor {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl IncompleteFactor {
    fn new(a: &CsrMatrix) -> Self {
        let n = a.dim();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols: Vec<usize> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let (ac, av) = a.row(i);
            let start = cols.len();
            let mut diag = 0.0;
            for (&k, &aik) in ac.iter().zip(av) {
                if k > i {
                    break;
                }
                if k == i {
                    diag = aik;
                    break;
                }
                // L_ik = (A_ik - sum_{j<k} L_ij L_kj) / L_kk
                let (kc, kv) = (&cols[row_ptr[k]..row_ptr[k + 1]], &vals[row_ptr[k]..row_ptr[k + 1]]);
                let (ic, iv) = (&cols[start..], &vals[start..]);
                let dot = sparse_dot(ic, iv, &kc[..kc.len() - 1], &kv[..kv.len() - 1]);
                let lkk = kv[kv.len() - 1];
                let lik = (aik - dot) / lkk;
                cols.push(k);
                vals.push(lik);
            }
            let sq: f64 = vals[start..].iter().map(|v| v * v).sum();
            let mut pivot = diag - sq;
            if !(pivot > 0.0) {
                // Cannot happen for an M-matrix in exact arithmetic.
                pivot = diag;
            }
            cols.push(i);
            vals.push(pivot.sqrt());
            row_ptr.push(cols.len());
        }
        Self {
            row_ptr,
            cols,
            vals,
        }
    }

    /// Solves `L Lᵀ z = r` for `width` interleaved lanes.
    fn apply(&self, r: &[f64], z: &mut [f64], width: usize) {
        let n = self.row_ptr.len() - 1;
        z.copy_from_slice(r);
        // Forward: L y = r.
        for i in 0..n {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            let (c, v) = (&self.cols[range.clone()], &self.vals[range]);
            let last = c.len() - 1;
            for (&k, &lik) in c[..last].iter().zip(&v[..last]) {
                for l in 0..width {
                    z[i * width + l] -= lik * z[k * width + l];
                }
            }
            let d = v[last];
            for l in 0..width {
                z[i * width + l] /= d;
            }
        }
        // Backward: Lᵀ x = y, column-oriented over the rows of L.
        for i in (0..n).rev() {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            let (c, v) = (&self.cols[range.clone()], &self.vals[range]);
            let last = c.len() - 1;
            let d = v[last];
            for l in 0..width {
                z[i * width + l] /= d;
            }
            for (&k, &lik) in c[..last].iter().zip(&v[..last]) {
                for l in 0..width {
                    z[k * width + l] -= lik * z[i * width + l];
                }
            }
        }
    }
}

fn sparse_dot(ac: &[usize], av: &[f64], bc: &[usize], bv: &[f64]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < ac.len() && j < bc.len() {
        match ac[i].cmp(&bc[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += av[i] * bv[j];
                i += 1;
                j += 1;
            }
        }
    }
    s
}

enum Precond {
    Identity,
    Diagonal(Vec<f64>),
    Factor(IncompleteFactor),
}

impl Precond {
    fn build(a: &CsrMatrix, kind: Preconditioner) -> Self {
        match kind {
            Preconditioner::None => Precond::Identity,
            Preconditioner::Jacobi => {
                Precond::Diagonal(a.diagonal().into_iter().map(|d| 1.0 / d).collect())
            }
            Preconditioner::IncompleteCholesky => Precond::Factor(IncompleteFactor::new(a)),
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64], width: usize) {
        match self {
            Precond::Identity => z.copy_from_slice(r),
            Precond::Diagonal(inv) => {
                for (i, &d) in inv.iter().enumerate() {
                    for l in 0..width {
                        z[i * width + l] = r[i * width + l] * d;
                    }
                }
            }
            Precond::Factor(f) => f.apply(r, z, width),
        }
    }
}

fn lane_dot(a: &[f64], b: &[f64], width: usize, out: &mut [f64]) {
    out.fill(0.0);
    for (ca, cb) in a.chunks_exact(width).zip(b.chunks_exact(width)) {
        for l in 0..width {
            out[l] += ca[l] * cb[l];
        }
    }
}

/// Block PCG on interleaved right-hand sides; lanes converge independently.
fn solve_block(
    a: &CsrMatrix,
    m: &Precond,
    b: &[f64],
    width: usize,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Vec<SolveStats>)> {
    let n = a.dim();
    let tol = cfg.rel_tolerance;
    let mut bnorm = vec![0.0; width];
    lane_dot(b, b, width, &mut bnorm);
    bnorm.iter_mut().for_each(|v| *v = v.sqrt());

    let mut x = vec![0.0; n * width];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n * width];
    let mut p = vec![0.0; n * width];
    let mut q = vec![0.0; n * width];
    let mut rz = vec![0.0; width];
    let mut pq = vec![0.0; width];
    let mut rr = vec![0.0; width];
    let mut iterations = vec![0usize; width];
    let mut residual = vec![0.0; width];
    let mut active = vec![false; width];
    let mut total = 0usize;

    // Each pass starts from the true residual b - Ax so the returned solution
    // honours the tolerance even if the recurrence drifted.
    loop {
        a.mul_block(&x, &mut q, width);
        for (ri, (bi, qi)) in r.iter_mut().zip(b.iter().zip(&q)) {
            *ri = bi - qi;
        }
        lane_dot(&r, &r, width, &mut rr);
        let mut any = false;
        for l in 0..width {
            residual[l] = if bnorm[l] > 0.0 { rr[l].sqrt() / bnorm[l] } else { 0.0 };
            active[l] = residual[l] > tol;
            any |= active[l];
        }
        if !any {
            break;
        }
        if total >= cfg.max_iterations {
            let worst = residual.iter().cloned().fold(0.0, f64::max);
            return Err(Error::NotConverged {
                iterations: total,
                residual: worst,
            });
        }
        m.apply(&r, &mut z, width);
        p.copy_from_slice(&z);
        lane_dot(&r, &z, width, &mut rz);

        while total < cfg.max_iterations && active.iter().any(|&s| s) {
            total += 1;
            a.mul_block(&p, &mut q, width);
            lane_dot(&p, &q, width, &mut pq);
            let alpha: Vec<f64> = (0..width)
                .map(|l| if active[l] && pq[l] > 0.0 { rz[l] / pq[l] } else { 0.0 })
                .collect();
            for i in 0..n {
                for l in 0..width {
                    let k = i * width + l;
                    x[k] += alpha[l] * p[k];
                    r[k] -= alpha[l] * q[k];
                }
            }
            lane_dot(&r, &r, width, &mut rr);
            for l in 0..width {
                if active[l] {
                    iterations[l] += 1;
                    if rr[l].sqrt() <= tol * bnorm[l] || alpha[l] == 0.0 {
                        active[l] = false;
                    }
                }
            }
            m.apply(&r, &mut z, width);
            let old = rz.clone();
            lane_dot(&r, &z, width, &mut rz);
            for i in 0..n {
                for l in 0..width {
                    if active[l] {
                        let k = i * width + l;
                        p[k] = z[k] + (rz[l] / old[l]) * p[k];
                    }
                }
            }
        }
    }
    let stats = (0..width)
        .map(|l| SolveStats {
            iterations: iterations[l],
            rel_residual: residual[l],
        })
        .collect();
    Ok((x, stats))
}

/// Solves `(I + L) y = b` to the configured relative residual.
pub fn sddm_solve(a: &CsrMatrix, b: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    sddm_solve_with_stats(a, b, cfg).map(|(y, _)| y)
}

pub fn sddm_solve_with_stats(
    a: &CsrMatrix,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    cfg.validate()?;
    check_len(a, b)?;
    let m = Precond::build(a, cfg.preconditioner);
    let (y, stats) = solve_block(a, &m, b, 1, cfg)?;
    Ok((y, stats[0]))
}

fn check_len(a: &CsrMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.dim() {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, matrix is {}×{}",
            b.len(),
            a.dim(),
            a.dim()
        )));
    }
    Ok(())
}

/// Solves one system per right-hand side, sharing the preconditioner.
/// Blocks of right-hand sides are processed in parallel.
pub fn sddm_solve_many(a: &CsrMatrix, rhs: &[Vec<f64>], cfg: &SolverConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    for b in rhs {
        check_len(a, b)?;
    }
    let n = a.dim();
    let m = Precond::build(a, cfg.preconditioner);
    let blocks = rhs.len().div_ceil(BLOCK_WIDTH);
    let solved = par::map_range(blocks, |blk| {
        let lo = blk * BLOCK_WIDTH;
        let hi = (lo + BLOCK_WIDTH).min(rhs.len());
        let width = hi - lo;
        let mut packed = vec![0.0; n * width];
        for (l, b) in rhs[lo..hi].iter().enumerate() {
            for (i, &v) in b.iter().enumerate() {
                packed[i * width + l] = v;
            }
        }
        solve_block(a, &m, &packed, width, cfg).map(|(x, _)| (x, width))
    });
    let mut out = Vec::with_capacity(rhs.len());
    for block in solved {
        let (x, width) = block?;
        for l in 0..width {
            out.push((0..n).map(|i| x[i * width + l]).collect());
        }
    }
    Ok(out)
}

/// Output of [`solve_generated`]: solutions stored node-major
/// (`x[node * count + rhs]`) and `⟨b_i, x_i⟩` for every right-hand side.
pub(crate) struct GeneratedSolve {
    pub node_major: Vec<f64>,
    pub rhs_dot: Vec<f64>,
}

/// Solves `count` systems whose right-hand sides are produced on demand by
/// `rhs(i)`, so the full set never has to be materialized at once.
pub(crate) fn solve_generated<F>(
    a: &CsrMatrix,
    count: usize,
    rhs: F,
    cfg: &SolverConfig,
) -> Result<GeneratedSolve>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    cfg.validate()?;
    let n = a.dim();
    let m = Precond::build(a, cfg.preconditioner);
    let blocks = count.div_ceil(BLOCK_WIDTH);
    let solved = par::map_range(blocks, |blk| {
        let lo = blk * BLOCK_WIDTH;
        let width = (lo + BLOCK_WIDTH).min(count) - lo;
        let mut packed = vec![0.0; n * width];
        for l in 0..width {
            let b = rhs(lo + l);
            debug_assert_eq!(b.len(), n);
            for (i, v) in b.into_iter().enumerate() {
                packed[i * width + l] = v;
            }
        }
        let (x, _) = solve_block(a, &m, &packed, width, cfg)?;
        let mut dots = vec![0.0; width];
        lane_dot(&packed, &x, width, &mut dots);
        Ok::<_, Error>((x, dots))
    });
    let mut node_major = vec![0.0; n * count];
    let mut rhs_dot = Vec::with_capacity(count);
    for (blk, block) in solved.into_iter().enumerate() {
        let (x, dots) = block?;
        let lo = blk * BLOCK_WIDTH;
        let width = dots.len();
        for i in 0..n {
            node_major[i * count + lo..i * count + lo + width]
                .copy_from_slice(&x[i * width..(i + 1) * width]);
        }
        rhs_dot.extend(dots);
    }
    Ok(GeneratedSolve {
        node_major,
        rhs_dot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::{Graph, ResidualGraph};
    use crate::sparse::identity_plus_laplacian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(a: &CsrMatrix, y: &[f64], b: &[f64]) -> f64 {
        let mut ay = vec![0.0; b.len()];
        a.mul_vec(y, &mut ay);
        let num: f64 = ay.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        num / den
    }

    fn all_preconditioners() -> [SolverConfig; 3] {
        [Preconditioner::None, Preconditioner::Jacobi, Preconditioner::IncompleteCholesky].map(
            |p| SolverConfig {
                preconditioner: p,
                ..Default::default()
            },
        )
    }

    #[test]
    fn single_edge_first_column() {
        let g = Graph::from_unweighted(2, &[(0, 1)]).unwrap();
        let a = identity_plus_laplacian(&ResidualGraph::full(&g));
        for cfg in all_preconditioners() {
            let y = sddm_solve(&a, &[1.0, 0.0], &cfg).unwrap();
            assert!((y[0] - 2.0 / 3.0).abs() < 1e-8 && (y[1] - 1.0 / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn identity_system_is_one_step() {
        let g = Graph::empty(6);
        let a = identity_plus_laplacian(&ResidualGraph::full(&g));
        let b = [1.0, -2.0, 0.5, 3.0, 0.0, 7.0];
        for cfg in all_preconditioners() {
            let (y, stats) = sddm_solve_with_stats(&a, &b, &cfg).unwrap();
            assert_eq!(y, b.to_vec());
            assert_eq!(stats.iterations, 1);
        }
    }

    #[test]
    fn recovers_known_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = generators::with_random_weights(
            &generators::erdos_renyi(200, 900, &mut rng).unwrap(),
            0.1,
            10.0,
            &mut rng,
        );
        let a = identity_plus_laplacian(&ResidualGraph::full(&g));
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut b = vec![0.0; 200];
        a.mul_vec(&x, &mut b);
        for cfg in all_preconditioners() {
            let (y, stats) = sddm_solve_with_stats(&a, &b, &cfg).unwrap();
            assert!(stats.rel_residual <= cfg.rel_tolerance);
            assert!(residual(&a, &y, &b) <= cfg.rel_tolerance);
            // cond(I + L) <= 1 + 2 * max weighted degree
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
                / x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(err <= 1e-8 * 200.0 * 10.0);
        }
    }

    #[test]
    fn many_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = generators::random_connected(60, 150, &mut rng).unwrap();
        let a = identity_plus_laplacian(&ResidualGraph::full(&g));
        let rhs: Vec<Vec<f64>> = (0..19)
            .map(|i| {
                if i == 4 {
                    vec![0.0; 60]
                } else {
                    (0..60).map(|_| rng.random_range(-1.0..1.0)).collect()
                }
            })
            .collect();
        let cfg = SolverConfig {
            rel_tolerance: 1e-10,
            ..Default::default()
        };
        let many = sddm_solve_many(&a, &rhs, &cfg).unwrap();
        assert_eq!(many.len(), 19);
        assert!(many[4].iter().all(|&v| v == 0.0));
        for (b, y) in rhs.iter().zip(&many) {
            let single = sddm_solve(&a, b, &cfg).unwrap();
            for (p, q) in single.iter().zip(y) {
                assert!((p - q).abs() < 1e-8);
            }
            if b.iter().any(|&v| v != 0.0) {
                assert!(residual(&a, y, b) <= 1e-10);
            }
        }
    }

    #[test]
    fn reports_non_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = generators::random_connected(100, 300, &mut rng).unwrap();
        let a = identity_plus_laplacian(&ResidualGraph::full(&g));
        let b: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = SolverConfig {
            rel_tolerance: 1e-14,
            max_iterations: 2,
            preconditioner: Preconditioner::None,
        };
        match sddm_solve(&a, &b, &cfg) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            rel_tolerance: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
