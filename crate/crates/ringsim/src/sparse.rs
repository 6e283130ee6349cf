//! Extremal eigenpairs of large sparse Hermitian operators.
//!
//! Matrices are assembled from one triangle of triplets; the Hermitian
//! completion is materialised in the compiled row lists used by
//! [`SparseHermitian::matvec`]. The solver is a thick-restart Lanczos
//! iteration with full reorthogonalization and locking of converged
//! eigenpairs. A dense reference solver backed by `nalgebra` is provided for
//! oracle duty on small dimensions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("dimension mismatch: operator dim {0}, vector len {1}")]
    DimensionMismatch(usize, usize),
    #[error("triplet index ({row}, {col}) out of range for dim {dim}")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
    #[error("dense reference cap exceeded: dim {dim} > cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("Lanczos did not converge within {max_iter} matvecs; best residuals {residuals:?}")]
    NonConvergence { max_iter: usize, residuals: Vec<f64> },
    #[error("eigenvector i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("eigenvector dump malformed: {0}")]
    BadDump(String),
}

/// Builder for a sparse Hermitian matrix. Entries are given for one triangle
/// only (row ≤ col); the conjugate transpose is implied.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    dim: usize,
    triplets: Vec<(usize, usize, Complex64)>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        Self { dim, triplets: Vec::new() }
    }

    /// Add `value` at (row, col). Entries below the diagonal are folded onto
    /// the upper triangle by conjugation; duplicates accumulate.
    pub fn push(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.dim && col < self.dim);
        if row <= col {
            self.triplets.push((row, col, value));
        } else {
            self.triplets.push((col, row, value.conj()));
        }
    }

    pub fn build(mut self) -> Result<SparseHermitian, SparseError> {
        for &(r, c, _) in &self.triplets {
            if r >= self.dim || c >= self.dim {
                return Err(SparseError::IndexOutOfRange { row: r, col: c, dim: self.dim });
            }
        }
        // Merge duplicates on the stored triangle.
        self.triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(self.triplets.len());
        for (r, c, v) in self.triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(r, c, v)| v.norm() > 0.0 || r == c);
        // Compile a full CSR including the implied lower triangle so that the
        // matvec is a row-local gather (deterministic for any thread count).
        let dim = self.dim;
        let mut row_counts = vec![0usize; dim];
        for &(r, c, _) in &merged {
            row_counts[r] += 1;
            if r != c {
                row_counts[c] += 1;
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        for i in 0..dim {
            row_ptr[i + 1] = row_ptr[i] + row_counts[i];
        }
        let nnz = row_ptr[dim];
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![Complex64::new(0.0, 0.0); nnz];
        let mut cursor = row_ptr.clone();
        for &(r, c, v) in &merged {
            cols[cursor[r]] = c;
            vals[cursor[r]] = v;
            cursor[r] += 1;
            if r != c {
                cols[cursor[c]] = r;
                vals[cursor[c]] = v.conj();
                cursor[c] += 1;
            }
        }
        Ok(SparseHermitian { dim, row_ptr, cols, vals })
    }
}

/// Sparse Hermitian matrix with compiled row storage (both triangles) for
/// fast products. Built through [`TripletBuilder`], which guarantees the
/// Hermitian structure.
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseHermitian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries (both triangles).
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn trace(&self) -> f64 {
        let mut t = 0.0;
        for i in 0..self.dim {
            for j in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.cols[j] == i {
                    t += self.vals[j].re;
                }
            }
        }
        t
    }

    /// Largest deviation from Hermiticity of the compiled storage: checks
    /// A[i][j] against conj(A[j][i]) entry by entry, and diagonal realness.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[idx];
                if j == i {
                    worst = worst.max(self.vals[idx].im.abs());
                    continue;
                }
                if j < i {
                    continue;
                }
                // find A[j][i]
                let lo = self.row_ptr[j];
                let hi = self.row_ptr[j + 1];
                let mirror = self.cols[lo..hi]
                    .iter()
                    .position(|&c| c == i)
                    .map(|p| self.vals[lo + p])
                    .unwrap_or(Complex64::new(0.0, 0.0));
                worst = worst.max((self.vals[idx] - mirror.conj()).norm());
            }
        }
        worst
    }

    /// Visit each stored upper-triangle entry (row ≤ col).
    pub fn for_each_upper(&self, mut f: impl FnMut(usize, usize, Complex64)) {
        for i in 0..self.dim {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[idx];
                if j >= i {
                    f(i, j, self.vals[idx]);
                }
            }
        }
    }

    /// y = A x using the Hermitian completion.
    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>, SparseError> {
        if x.len() != self.dim {
            return Err(SparseError::DimensionMismatch(self.dim, x.len()));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            for j in lo..hi {
                acc += self.vals[j] * x[self.cols[j]];
            }
            *yi = acc;
        }
    }

    /// Dense completion (for oracle-size problems).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::new(0.0, 0.0));
        for i in 0..self.dim {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[idx])] = self.vals[idx];
            }
        }
        m
    }

    /// Spectral norm estimate via power iteration.
    pub fn norm_estimate(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut v: Vec<Complex64> =
            (0..self.dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        normalize(&mut v);
        let mut est = 0.0f64;
        let mut w = vec![Complex64::new(0.0, 0.0); self.dim];
        for _ in 0..20 {
            self.matvec_into(&v, &mut w);
            let n = norm(&w);
            if n == 0.0 {
                return 0.0;
            }
            est = n;
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / n;
            }
        }
        est
    }
}

/// Eigenpairs returned by the solvers, sorted ascending by value.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Options for [`lowest_k_with`].
#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Krylov basis cap before a thick restart.
    pub max_basis: usize,
    /// Ritz vectors retained across a restart.
    pub keep: usize,
    /// Relative clustering threshold for degeneracy detection.
    pub cluster_rel: f64,
    /// Probe for extra members of the cluster at the kth value.
    pub probe_clusters: bool,
}

impl LanczosOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            tol: 1e-10,
            max_iter: 20_000,
            seed: 1,
            max_basis: 0, // resolved against dim at solve time
            keep: 0,
            cluster_rel: 1e-8,
            probe_clusters: true,
        }
    }
}

/// k smallest eigenpairs of `a`.
pub fn lowest_k(
    a: &SparseHermitian,
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigenResult, SparseError> {
    let mut opts = LanczosOptions::new(k);
    opts.tol = tol;
    opts.max_iter = max_iter;
    opts.seed = seed;
    lowest_k_with(a, &opts, None)
}

/// k smallest eigenpairs with full option control and optional warm-start
/// guess vectors (e.g. eigenvectors of a nearby operator).
pub fn lowest_k_with(
    a: &SparseHermitian,
    opts: &LanczosOptions,
    guess: Option<&[Vec<Complex64>]>,
) -> Result<EigenResult, SparseError> {
    let dim = a.dim;
    let k = opts.k.min(dim);
    if dim <= 1 {
        let val = a.trace();
        return Ok(EigenResult {
            values: vec![val; k],
            vectors: vec![vec![Complex64::new(1.0, 0.0)]; k],
            residuals: vec![0.0; k],
            iterations: 0,
        });
    }
    // Small problems go straight to the dense path; Lanczos brings nothing.
    if dim <= 64 {
        let mut dense = dense_reference(a, 64)?;
        dense.values.truncate(k.max(1));
        dense.vectors.truncate(k.max(1));
        dense.residuals.truncate(k.max(1));
        return Ok(dense);
    }

    let norm_est = a.norm_estimate(opts.seed).max(f64::MIN_POSITIVE);
    let abs_tol = opts.tol * norm_est;
    let max_basis = if opts.max_basis > 0 {
        opts.max_basis.min(dim)
    } else {
        // Basis memory is the dominant footprint at large dim; cap it.
        let by_mem = (2_500_000_000usize / (16 * dim)).max(2 * k + 10);
        (6 * k + 110).min(by_mem).min(dim)
    };
    let keep = if opts.keep > 0 { opts.keep.min(max_basis - 2) } else { (2 * k + 6).min(max_basis / 2) };

    let mut solver = Lanczos {
        a,
        abs_tol,
        norm_est,
        max_basis,
        keep,
        matvecs: 0,
        max_iter: opts.max_iter,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
    };

    let mut found_vals: Vec<f64> = Vec::new();
    let mut found_vecs: Vec<Vec<Complex64>> = Vec::new();
    let mut want = k;
    let mut pass_guess: Option<Vec<Vec<Complex64>>> = guess.map(|g| g.to_vec());
    loop {
        let need = want - found_vals.len();
        let (vals, vecs) = solver.run(need, &found_vecs, pass_guess.as_deref(), None)?;
        pass_guess = None;
        found_vals.extend(vals);
        found_vecs.extend(vecs);
        // Keep the global ascending order across passes.
        let mut order: Vec<usize> = (0..found_vals.len()).collect();
        order.sort_by(|&i, &j| found_vals[i].total_cmp(&found_vals[j]));
        found_vals = order.iter().map(|&i| found_vals[i]).collect();
        found_vecs = order.iter().map(|&i| found_vecs[i].clone()).collect();
        if found_vals.len() < want {
            continue;
        }
        if !opts.probe_clusters || want >= dim {
            break;
        }
        // Degenerate clusters are returned whole: probe (deflated) whether
        // another eigenvalue sits within the cluster width of the kth.
        let scale = norm_est.max(found_vals[want - 1].abs());
        let cut = found_vals[want - 1] + opts.cluster_rel * scale;
        match solver.run(1, &found_vecs[..want], None, Some(cut))? {
            (vals, vecs) if !vals.is_empty() && vals[0] <= cut => {
                found_vals.truncate(want);
                found_vecs.truncate(want);
                found_vals.push(vals[0]);
                found_vecs.push(vecs.into_iter().next().unwrap());
                want += 1;
            }
            _ => break,
        }
    }
    found_vals.truncate(want);
    found_vecs.truncate(want);

    let mut residuals = Vec::with_capacity(want);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    for (val, vec) in found_vals.iter().zip(&found_vecs) {
        a.matvec_into(vec, &mut w);
        let r: f64 = w.iter().zip(vec).map(|(wi, vi)| (wi - val * vi).norm_sqr()).sum::<f64>().sqrt();
        residuals.push(r);
    }
    Ok(EigenResult { values: found_vals, vectors: found_vecs, residuals, iterations: solver.matvecs })
}

struct Lanczos<'a> {
    a: &'a SparseHermitian,
    abs_tol: f64,
    norm_est: f64,
    max_basis: usize,
    keep: usize,
    matvecs: usize,
    max_iter: usize,
    rng: ChaCha8Rng,
}

impl Lanczos<'_> {
    /// One deflated thick-restart run returning `need` converged lowest
    /// eigenpairs. `early_cut`, when set, allows returning an unconverged
    /// pair as soon as its Ritz interval lies entirely above the cut (used
    /// by the degeneracy probe).
    ///
    /// Invariant inside the loop: `proj` is the complete projected matrix
    /// over `basis`; `beta`/`cand` hold the coupling and normalized next
    /// vector produced by the most recent extension step.
    fn run(
        &mut self,
        need: usize,
        deflate: &[Vec<Complex64>],
        guess: Option<&[Vec<Complex64>]>,
        early_cut: Option<f64>,
    ) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), SparseError> {
        let dim = self.a.dim;
        let mut basis: Vec<Vec<Complex64>> = vec![self.start_vector(guess, deflate)];
        let mut proj = DMatrix::<f64>::zeros(1, 1);

        loop {
            // Complete the frontier column: alpha, then the next direction.
            let j = basis.len() - 1;
            if self.matvecs >= self.max_iter {
                return Err(SparseError::NonConvergence {
                    max_iter: self.max_iter,
                    residuals: self.best_residuals(&proj, 0.0, need),
                });
            }
            let mut w = vec![Complex64::new(0.0, 0.0); dim];
            self.a.matvec_into(&basis[j], &mut w);
            self.matvecs += 1;
            let alpha = basis[j].iter().zip(&w).map(|(q, wi)| (q.conj() * wi).re).sum::<f64>();
            proj[(j, j)] = alpha;
            // Full reorthogonalization (twice) against basis and locked set.
            ortho_against(&mut w, &basis);
            ortho_against(&mut w, deflate);
            ortho_against(&mut w, &basis);
            ortho_against(&mut w, deflate);
            let mut beta = norm(&w);
            let breakdown = beta < 1e-13 * self.norm_est.max(1.0);
            let cand: Vec<Complex64> = if breakdown {
                // Invariant subspace found: continue with a fresh direction,
                // coupled by beta = 0.
                beta = 0.0;
                let mut f = self.start_vector(None, deflate);
                ortho_against(&mut f, &basis);
                ortho_against(&mut f, deflate);
                ortho_against(&mut f, &basis);
                if norm(&f) < 1e-12 {
                    // Whole space exhausted; extract whatever we have.
                    return self
                        .extract(&basis, &proj, 0.0, need, early_cut, true)
                        .ok_or_else(|| SparseError::NonConvergence {
                            max_iter: self.max_iter,
                            residuals: self.best_residuals(&proj, 0.0, need),
                        });
                }
                normalize(&mut f);
                f
            } else {
                w.iter().map(|x| x / beta).collect()
            };

            // Convergence check (periodic, and always at the basis cap).
            let at_cap = basis.len() >= self.max_basis;
            if at_cap || basis.len() % 10 == 0 {
                if let Some(res) = self.extract(&basis, &proj, beta, need, early_cut, false) {
                    return Ok(res);
                }
            }

            if !at_cap {
                let n = basis.len();
                proj = grow(proj);
                proj[(n - 1, n)] = beta;
                proj[(n, n - 1)] = beta;
                basis.push(cand);
                continue;
            }

            // Thick restart: compress to the `keep` lowest Ritz vectors and
            // carry the residual direction as the new frontier.
            let m = basis.len();
            let eig = nalgebra::SymmetricEigen::new(proj.clone());
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let keep = self.keep.min(m - 1).max(need + 2).min(m - 1);
            let mut new_basis: Vec<Vec<Complex64>> = Vec::with_capacity(keep + 1);
            let mut couplings = Vec::with_capacity(keep);
            for &idx in order.iter().take(keep) {
                let y = eig.eigenvectors.column(idx);
                let mut q = vec![Complex64::new(0.0, 0.0); dim];
                for (l, ql) in basis.iter().enumerate() {
                    let c = y[l];
                    if c != 0.0 {
                        for (qi, bi) in q.iter_mut().zip(ql) {
                            *qi += c * bi;
                        }
                    }
                }
                normalize(&mut q);
                couplings.push(beta * y[m - 1]);
                new_basis.push(q);
            }
            let mut frontier = cand;
            ortho_against(&mut frontier, &new_basis);
            ortho_against(&mut frontier, deflate);
            ortho_against(&mut frontier, &new_basis);
            if norm(&frontier) < 1e-12 {
                frontier = self.start_vector(None, deflate);
                ortho_against(&mut frontier, &new_basis);
                ortho_against(&mut frontier, deflate);
                for c in couplings.iter_mut() {
                    *c = 0.0;
                }
            }
            normalize(&mut frontier);
            let kk = new_basis.len();
            proj = DMatrix::zeros(kk + 1, kk + 1);
            for (i, &idx) in order.iter().take(kk).enumerate() {
                proj[(i, i)] = eig.eigenvalues[idx];
                proj[(i, kk)] = couplings[i];
                proj[(kk, i)] = couplings[i];
            }
            new_basis.push(frontier);
            basis = new_basis;
        }
    }

    /// Extract the `need` lowest Ritz pairs if they are converged (residual
    /// estimate |beta·y_last| within tolerance). With `force`, extract
    /// unconditionally.
    fn extract(
        &self,
        basis: &[Vec<Complex64>],
        proj: &DMatrix<f64>,
        beta: f64,
        need: usize,
        early_cut: Option<f64>,
        force: bool,
    ) -> Option<(Vec<f64>, Vec<Vec<Complex64>>)> {
        let m = basis.len();
        if m < need && !force {
            return None;
        }
        let eig = nalgebra::SymmetricEigen::new(proj.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let take = need.min(m);
        let mut vals = Vec::new();
        let mut idxs = Vec::new();
        for &idx in order.iter().take(take) {
            let y_last = eig.eigenvectors[(m - 1, idx)];
            let res_est = (beta * y_last).abs();
            if res_est > self.abs_tol && !force {
                if let Some(cut) = early_cut {
                    if eig.eigenvalues[idx] - res_est > cut {
                        // The probe only needs to certify the value is above
                        // the cut.
                        vals.push(eig.eigenvalues[idx]);
                        idxs.push(idx);
                        continue;
                    }
                }
                return None;
            }
            vals.push(eig.eigenvalues[idx]);
            idxs.push(idx);
        }
        let dim = self.a.dim;
        let mut vecs = Vec::with_capacity(take);
        for &idx in &idxs {
            let y = eig.eigenvectors.column(idx);
            let mut q = vec![Complex64::new(0.0, 0.0); dim];
            for (l, ql) in basis.iter().enumerate() {
                let c = y[l];
                if c != 0.0 {
                    for (qi, bi) in q.iter_mut().zip(ql) {
                        *qi += c * bi;
                    }
                }
            }
            normalize(&mut q);
            vecs.push(q);
        }
        Some((vals, vecs))
    }

    fn best_residuals(&self, proj: &DMatrix<f64>, beta: f64, need: usize) -> Vec<f64> {
        let m = proj.nrows();
        if m == 0 {
            return vec![];
        }
        let eig = nalgebra::SymmetricEigen::new(proj.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        order.iter().take(need).map(|&i| (beta * eig.eigenvectors[(m - 1, i)]).abs()).collect()
    }

    fn start_vector(&mut self, guess: Option<&[Vec<Complex64>]>, deflate: &[Vec<Complex64>]) -> Vec<Complex64> {
        let dim = self.a.dim;
        let mut v: Vec<Complex64> = match guess {
            Some(g) if !g.is_empty() => {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                for (i, gi) in g.iter().enumerate() {
                    if gi.len() != dim {
                        continue;
                    }
                    let w = Complex64::new(1.0 + 0.1 * i as f64, 0.0);
                    for (vi, x) in v.iter_mut().zip(gi) {
                        *vi += w * x;
                    }
                }
                // Tiny random admixture keeps the Krylov space generic.
                for vi in v.iter_mut() {
                    *vi += Complex64::new(
                        1e-6 * (self.rng.gen::<f64>() - 0.5),
                        1e-6 * (self.rng.gen::<f64>() - 0.5),
                    );
                }
                v
            }
            _ => (0..dim)
                .map(|_| Complex64::new(self.rng.gen::<f64>() - 0.5, self.rng.gen::<f64>() - 0.5))
                .collect(),
        };
        ortho_against(&mut v, deflate);
        if norm(&v) < 1e-12 {
            v = (0..dim)
                .map(|_| Complex64::new(self.rng.gen::<f64>() - 0.5, self.rng.gen::<f64>() - 0.5))
                .collect();
        }
        normalize(&mut v);
        v
    }
}

fn grow(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(n + 1, n + 1);
    out.view_mut((0, 0), (n, n)).copy_from(&m);
    out
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Orthogonalize `v` against every vector in `basis` (classical Gram-Schmidt,
/// callers apply it twice).
fn ortho_against(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for q in basis {
        let c: Complex64 = q.iter().zip(v.iter()).map(|(qi, vi)| qi.conj() * vi).sum();
        if c.norm_sqr() > 0.0 {
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

/// Full dense spectrum for oracle duty. Errors above `cap` (default 4096).
pub fn dense_reference(a: &SparseHermitian, cap: usize) -> Result<EigenResult, SparseError> {
    let cap = if cap == 0 { 4096 } else { cap };
    if a.dim > cap {
        return Err(SparseError::CapExceeded { dim: a.dim, cap });
    }
    let m = a.to_dense();
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let n = a.dim;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for &idx in &order {
        let val = eig.eigenvalues[idx];
        let v: Vec<Complex64> = eig.eigenvectors.column(idx).iter().cloned().collect();
        let mut r = 0.0f64;
        let av = &m * DMatrix::from_column_slice(n, 1, &v);
        for i in 0..n {
            r += (av[(i, 0)] - val * v[i]).norm_sqr();
        }
        values.push(val);
        vectors.push(v);
        residuals.push(r.sqrt());
    }
    Ok(EigenResult { values, vectors, residuals, iterations: 0 })
}

/// Binary eigenvector dump: little-endian u64 dim, u64 k, then for each
/// vector `dim` interleaved (re, im) f64 pairs.
pub fn save_eigenvectors<W: Write>(mut w: W, dim: usize, vectors: &[Vec<Complex64>]) -> Result<(), SparseError> {
    w.write_all(&(dim as u64).to_le_bytes())?;
    w.write_all(&(vectors.len() as u64).to_le_bytes())?;
    for v in vectors {
        if v.len() != dim {
            return Err(SparseError::DimensionMismatch(dim, v.len()));
        }
        for x in v {
            w.write_all(&x.re.to_le_bytes())?;
            w.write_all(&x.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load_eigenvectors<R: Read>(mut r: R) -> Result<(usize, Vec<Vec<Complex64>>), SparseError> {
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let dim = u64::from_le_bytes(buf8) as usize;
    r.read_exact(&mut buf8)?;
    let k = u64::from_le_bytes(buf8) as usize;
    if dim == 0 || dim > (1 << 32) || k > (1 << 20) {
        return Err(SparseError::BadDump(format!("implausible header dim={dim} k={k}")));
    }
    let mut vectors = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v = Vec::with_capacity(dim);
        for _ in 0..dim {
            r.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            r.read_exact(&mut buf8)?;
            let im = f64::from_le_bytes(buf8);
            v.push(Complex64::new(re, im));
        }
        vectors.push(v);
    }
    Ok((dim, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn diag_matrix(values: &[f64]) -> SparseHermitian {
        let mut b = TripletBuilder::new(values.len());
        for (i, &v) in values.iter().enumerate() {
            b.push(i, i, Complex64::new(v, 0.0));
        }
        b.build().unwrap()
    }

    fn random_hermitian(dim: usize, seed: u64) -> SparseHermitian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = TripletBuilder::new(dim);
        for i in 0..dim {
            b.push(i, i, Complex64::new(rng.gen::<f64>() - 0.5, 0.0));
            for j in (i + 1)..dim {
                b.push(i, j, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn matvec_identity() {
        let a = diag_matrix(&[1.0; 16]);
        let x: Vec<Complex64> = (0..16).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let y = a.matvec(&x).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn matvec_matches_dense_completion() {
        let a = random_hermitian(64, 7);
        let d = a.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Complex64> =
            (0..64).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let y = a.matvec(&x).unwrap();
        let xd = DMatrix::from_column_slice(64, 1, &x);
        let yd = &d * xd;
        for i in 0..64 {
            assert!((y[i] - yd[(i, 0)]).norm() < 1e-12);
        }
        // quadratic form real
        let q: Complex64 = x.iter().zip(&y).map(|(xi, yi)| xi.conj() * yi).sum();
        assert!(q.im.abs() < 1e-10);
    }

    #[test]
    fn matvec_linearity() {
        let a = random_hermitian(32, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Complex64> =
            (0..32).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let z: Vec<Complex64> =
            (0..32).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let xz: Vec<Complex64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
        let lhs = a.matvec(&xz).unwrap();
        let ax = a.matvec(&x).unwrap();
        let az = a.matvec(&z).unwrap();
        for i in 0..32 {
            assert!((lhs[i] - ax[i] - az[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let a = diag_matrix(&[1.0, 2.0]);
        assert!(matches!(a.matvec(&[Complex64::new(1.0, 0.0)]), Err(SparseError::DimensionMismatch(2, 1))));
    }

    #[test]
    fn dense_pauli_z() {
        let mut b = TripletBuilder::new(2);
        b.push(0, 0, Complex64::new(1.0, 0.0));
        b.push(1, 1, Complex64::new(-1.0, 0.0));
        let a = b.build().unwrap();
        let r = dense_reference(&a, 0).unwrap();
        assert!((r.values[0] + 1.0).abs() < 1e-14);
        assert!((r.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dense_trace_identity() {
        let a = random_hermitian(48, 11);
        let r = dense_reference(&a, 0).unwrap();
        let trace = a.trace();
        let sum: f64 = r.values.iter().sum();
        assert!((trace - sum).abs() < 1e-10 * trace.abs().max(1.0));
    }

    #[test]
    fn dense_cap_enforced() {
        let a = diag_matrix(&vec![0.0; 10]);
        assert!(matches!(dense_reference(&a, 5), Err(SparseError::CapExceeded { .. })));
    }

    #[test]
    fn lanczos_diagonal_1000() {
        let vals: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        let a = diag_matrix(&vals);
        let r = lowest_k(&a, 3, 1e-10, 20_000, 42).unwrap();
        for (i, expect) in [1.0, 2.0, 3.0].iter().enumerate() {
            assert!((r.values[i] - expect).abs() < 1e-8, "value {i}: {}", r.values[i]);
        }
    }

    #[test]
    fn lanczos_matches_dense_512() {
        let a = random_hermitian(512, 99);
        let dense = dense_reference(&a, 0).unwrap();
        let r = lowest_k(&a, 4, 1e-10, 60_000, 1).unwrap();
        for i in 0..4 {
            let scale = dense.values[i].abs().max(1.0);
            assert!(
                (r.values[i] - dense.values[i]).abs() < 1e-8 * scale,
                "eig {i}: lanczos {} dense {}",
                r.values[i],
                dense.values[i]
            );
        }
    }

    #[test]
    fn lanczos_degenerate_cluster_subspace() {
        // Planted 3-fold degenerate ground level.
        let dim = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // Random unitary via QR of a random complex matrix.
        let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let qr = g.qr();
        let q = qr.q();
        let mut evals = vec![0.0f64; dim];
        evals[0] = -5.0;
        evals[1] = -5.0;
        evals[2] = -5.0;
        for (i, e) in evals.iter_mut().enumerate().skip(3) {
            *e = -3.0 + 0.05 * i as f64;
        }
        let d = DMatrix::from_fn(dim, dim, |i, j| if i == j { Complex64::new(evals[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        let h = &q * d * q.adjoint();
        let mut b = TripletBuilder::new(dim);
        for i in 0..dim {
            for j in i..dim {
                b.push(i, j, (h[(i, j)] + h[(j, i)].conj()) * 0.5);
            }
        }
        let a = b.build().unwrap();
        // Ask for 2; cluster probing must return the full 3-block.
        let r = lowest_k(&a, 2, 1e-10, 60_000, 5).unwrap();
        assert!(r.values.len() >= 3, "cluster not completed: {:?}", r.values);
        for v in &r.values[..3] {
            assert!((v + 5.0).abs() < 1e-7, "cluster value {v}");
        }
        // Subspace agreement: each Lanczos vector lies in the span of the
        // dense degenerate eigenvectors.
        let dense = dense_reference(&a, 0).unwrap();
        for v in &r.vectors[..3] {
            let mut proj_sq = 0.0;
            for dv in &dense.vectors[..3] {
                let c: Complex64 = dv.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                proj_sq += c.norm_sqr();
            }
            assert!((proj_sq - 1.0).abs() < 1e-7, "subspace projection {proj_sq}");
        }
    }

    #[test]
    fn lanczos_orthonormal_and_residuals() {
        let a = random_hermitian(300, 23);
        let r = lowest_k(&a, 5, 1e-10, 60_000, 9).unwrap();
        let nrm = a.norm_estimate(9);
        for (i, vi) in r.vectors.iter().enumerate() {
            assert!(r.residuals[i] <= 1e-9 * nrm.max(1.0), "residual {}", r.residuals[i]);
            for (j, vj) in r.vectors.iter().enumerate() {
                let c: Complex64 = vi.iter().zip(vj).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((c.norm() - expect).abs() < 1e-8, "overlap ({i},{j}) = {}", c.norm());
            }
        }
    }

    #[test]
    fn lanczos_deterministic() {
        let a = random_hermitian(256, 31);
        let r1 = lowest_k(&a, 3, 1e-10, 60_000, 77).unwrap();
        let r2 = lowest_k(&a, 3, 1e-10, 60_000, 77).unwrap();
        for i in 0..3 {
            assert!((r1.values[i] - r2.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_dump_roundtrip() {
        let vectors = vec![
            vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)],
            vec![Complex64::new(0.0, -1.0), Complex64::new(3.5, 0.0)],
        ];
        let mut buf = Vec::new();
        save_eigenvectors(&mut buf, 2, &vectors).unwrap();
        let (dim, loaded) = load_eigenvectors(&buf[..]).unwrap();
        assert_eq!(dim, 2);
        assert_eq!(loaded, vectors);
    }
}
