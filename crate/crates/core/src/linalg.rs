//! Decompositions on top of nalgebra: Hermitian eigenproblems, ordered Schur
//! forms with cluster projectors, SVD rank decisions and canonical bases.

use nalgebra::{Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{identity, real, relative_skew, zeros, CMatrix, ZERO};
use crate::tol::Tolerance;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are eigenvectors; unitary.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Orthonormal basis (as columns) of each eigenvalue cluster, with the cluster mean.
    pub fn clusters(&self, radius: f64) -> Vec<(f64, CMatrix)> {
        cluster_sorted(&self.values, radius)
            .into_iter()
            .map(|range| {
                let mean = self.values[range.clone()].iter().sum::<f64>() / range.len() as f64;
                (mean, self.vectors.columns(range.start, range.len()).into_owned())
            })
            .collect()
    }
}

/// Groups an ascending list into maximal runs whose neighbours are within `radius`.
pub fn cluster_sorted(values: &[f64], radius: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > radius {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Hermitian eigensolver with deterministic eigenvectors.
///
/// Inside every eigenvalue cluster (radius `tol.eig_cluster_abs`) the basis
/// is replaced by [`canonical_basis`] of the cluster's eigenspace.
pub fn eig_hermitian(a: &CMatrix, tol: &Tolerance) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (a.nrows(), a.nrows()),
            actual: a.shape(),
        });
    }
    let skew = relative_skew(a);
    if skew > tol.hermitian {
        return Err(Error::NotHermitian {
            relative_skew: skew,
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: zeros(0, 0),
        });
    }
    let sym = (a + a.adjoint()) * real(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure("Hermitian eigensolver"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    for range in cluster_sorted(&values, tol.eig_cluster_abs) {
        let block = vectors.columns(range.start, range.len()).into_owned();
        let canon = canonical_basis(&block);
        vectors.columns_mut(range.start, range.len()).copy_from(&canon);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Canonical orthonormal basis of the column space of `q` (orthonormal columns).
///
/// Pivoted Gram–Schmidt of the projected identity columns: each step takes
/// the column with the largest residual (lowest index among near-ties);
/// every accepted vector then gets the phase making its largest-modulus
/// entry real positive.
/// The result depends only on the subspace, not on the basis `q`.
pub fn canonical_basis(q: &CMatrix) -> CMatrix {
    let n = q.nrows();
    let r = q.ncols();
    if r == 0 {
        return q.clone();
    }
    // Projections of the unit vectors e_j onto the subspace: row j of Q, conjugated.
    let mut residuals: Vec<nalgebra::DVector<Complex64>> =
        (0..n).map(|j| q * q.row(j).transpose().map(|z| z.conj())).collect();
    let mut accepted: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(r);
    let mut used = vec![false; n];
    while accepted.len() < r {
        // The deflated residuals keep Σ‖·‖² = remaining rank ≥ 1, so the
        // largest is at least 1/√n. Earlier indices win ties.
        let mut best = None;
        let mut best_norm = 0.0;
        for (j, v) in residuals.iter().enumerate() {
            let norm = v.norm();
            if !used[j] && norm > best_norm * (1.0 + 1e-9) {
                best = Some(j);
                best_norm = norm;
            }
        }
        let Some(j) = best else { break };
        used[j] = true;
        let mut a = residuals[j].clone() / real(best_norm);
        // Reorthogonalize once against the accepted vectors.
        for b in &accepted {
            let overlap = b.dotc(&a);
            a -= b * overlap;
        }
        let a = a.normalize();
        for v in residuals.iter_mut() {
            let overlap = a.dotc(v);
            *v -= &a * overlap;
        }
        accepted.push(a);
    }
    let mut out = zeros(n, accepted.len());
    for (k, mut v) in accepted.into_iter().enumerate() {
        fix_phase(v.as_mut_slice());
        out.set_column(k, &v);
    }
    out
}

/// Rotates `v` so that its first entry of (near-)maximal modulus is real positive.
pub fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("maximum exists");
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// Thin singular value decomposition `A = U·diag(σ)·V*`, `σ` descending.
///
/// `U` is `m×r` and `V` is `n×n` unitary, with `r = min(m, n)`; columns of
/// `V` beyond `r` span `ker A` together with those for zero `σ`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

const JACOBI_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD after a Householder QR reduction.
///
/// nalgebra's bidiagonal SVD loses accuracy on some rank-deficient inputs,
/// which is fatal for rank decisions; Jacobi rotations are slower but
/// backward stable with small relative error in every singular value.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Svd {
            u: zeros(m, 0),
            singular_values: vec![],
            v: identity(n),
        };
    }
    if m < n {
        // A = V'·Σ·U'* from the SVD of the tall adjoint; V is U' completed to a unitary.
        let t = svd(&a.adjoint());
        let mut v = zeros(n, n);
        v.columns_mut(0, m).copy_from(&t.u);
        let mut sigma = t.singular_values.clone();
        sigma.resize(n, 0.0);
        complete_orthonormal(&mut v, &sigma);
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v,
        };
    }
    let qr = a.clone().qr();
    let q = qr.q();
    let mut w = qr.r();
    let mut v = identity(n);
    let eps = f64::EPSILON;
    let wr = w.nrows();
    let mut sq: Vec<f64> = (0..n).map(|j| w.column(j).norm_squared()).collect();
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for r in p + 1..n {
                let (alpha, beta) = (sq[p], sq[r]);
                let (wp, wq) = column_pair(w.as_mut_slice(), wr, p, r);
                let gamma: Complex64 = wp.iter().zip(wq.iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= eps * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                // Exactly unimodular even when γ is subnormal.
                let phase = Complex64::from_polar(1.0, gamma.arg());
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (np, nr) = rotate(wp, wq, cs, sn, phase.conj());
                sq[p] = np;
                sq[r] = nr;
                let (vp, vq) = column_pair(v.as_mut_slice(), n, p, r);
                rotate(vp, vq, cs, sn, phase.conj());
            }
        }
        if !rotated {
            break;
        }
        // Refresh against drift in the running norms.
        for (j, s) in sq.iter_mut().enumerate() {
            *s = w.column(j).norm_squared();
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let r = m.min(n);
    let mut u_small = zeros(n, n);
    let mut v_sorted = zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        singular_values.push(s);
        v_sorted.set_column(k, &v.column(j));
        if s > 0.0 {
            u_small.set_column(k, &(w.column(j) / real(s)));
        }
    }
    complete_orthonormal(&mut u_small, &singular_values);
    let u = (q * u_small).rows(0, m).columns(0, r).into_owned();
    singular_values.truncate(r);
    Svd {
        u,
        singular_values,
        v: v_sorted,
    }
}

/// Columns `p < r` of a column-major buffer with `rows` rows.
fn column_pair(data: &mut [Complex64], rows: usize, p: usize, r: usize) -> (&mut [Complex64], &mut [Complex64]) {
    let (head, tail) = data.split_at_mut(r * rows);
    (&mut head[p * rows..(p + 1) * rows], &mut tail[..rows])
}

/// `(x, y) ← (x·c − y·φ·s, x·s + y·φ·c)`; returns the new squared norms.
fn rotate(x: &mut [Complex64], y: &mut [Complex64], c: f64, s: f64, phi: Complex64) -> (f64, f64) {
    let (mut nx, mut ny) = (0.0, 0.0);
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xp = *a;
        let xr = *b * phi;
        *a = xp * c - xr * s;
        *b = xp * s + xr * c;
        nx += a.norm_sqr();
        ny += b.norm_sqr();
    }
    (nx, ny)
}

/// Replaces the columns with zero singular value by an orthonormal completion.
///
/// The completion is the trailing part of the Householder `Q` of `[B | 1]`,
/// where `B` holds the retained columns.
fn complete_orthonormal(u: &mut CMatrix, sigma: &[f64]) {
    let n = u.nrows();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let (kept, missing): (Vec<usize>, Vec<usize>) =
        (0..sigma.len()).partition(|&j| sigma[j] > smax * f64::EPSILON * n as f64 && sigma[j] > 0.0);
    if missing.is_empty() {
        return;
    }
    let k = kept.len();
    let mut stacked = zeros(n, k + n);
    for (c, &j) in kept.iter().enumerate() {
        stacked.set_column(c, &u.column(j));
    }
    stacked.columns_mut(k, n).copy_from(&identity(n));
    let q = stacked.qr().q();
    for (c, &j) in missing.iter().enumerate() {
        u.set_column(j, &q.column(k + c));
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![];
    }
    svd(a).singular_values
}

/// Orthonormal canonical basis of `{v : A·v = 0}`, as columns.
///
/// The dimension is the number of singular values `≤ rank_rel·σ_max`
/// (all of them when `A = 0`).
pub fn nullspace(a: &CMatrix, tol: &Tolerance) -> CMatrix {
    nullspace_scaled(a, tol, 0.0)
}

/// [`nullspace`] with cutoff `rank_rel·max(σ_max, scale)`, for maps whose
/// natural size is known (e.g. commutators with unit-norm elements).
pub fn nullspace_scaled(a: &CMatrix, tol: &Tolerance, scale: f64) -> CMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    if a.nrows() == 0 {
        return identity(cols);
    }
    let dec = svd(a);
    let sigma = &dec.singular_values;
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_rel * smax.max(scale);
    // Columns of V past min(m, n) belong to the kernel of a wide matrix.
    let null: Vec<usize> = (0..cols).filter(|&i| sigma.get(i).is_none_or(|&s| s <= cutoff)).collect();
    let mut basis = zeros(cols, null.len());
    for (k, &i) in null.iter().enumerate() {
        basis.set_column(k, &dec.v.column(i));
    }
    canonical_basis(&basis)
}

/// [`nullspace_scaled`] of the matrix stacking `blocks` (all with `cols`
/// columns), narrowing the candidate space one row block at a time.
pub fn stacked_nullspace(cols: usize, blocks: impl IntoIterator<Item = CMatrix>, tol: &Tolerance, scale: f64) -> CMatrix {
    let mut basis = identity(cols);
    for block in blocks {
        if basis.ncols() == 0 {
            break;
        }
        let null = nullspace_scaled(&(block * &basis), tol, scale);
        basis = &basis * null;
    }
    canonical_basis(&basis)
}

/// Orthonormal canonical basis of the column span of `a`.
///
/// Directions with singular value `≤ rank_rel·scale` are dropped, where
/// `scale` defaults to `σ_max` when `None`.
pub fn column_span(a: &CMatrix, tol: &Tolerance, scale: Option<f64>) -> CMatrix {
    let rows = a.nrows();
    if a.ncols() == 0 || rows == 0 {
        return zeros(rows, 0);
    }
    let dec = svd(a);
    let u = &dec.u;
    let sigma = &dec.singular_values;
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_rel * scale.unwrap_or(smax);
    if smax == 0.0 {
        return zeros(rows, 0);
    }
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > cutoff).collect();
    let mut basis = zeros(rows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        basis.set_column(k, &u.column(i));
    }
    canonical_basis(&basis)
}

/// Unitary factor of the polar decomposition `M = W·|M|`.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let dec = svd(m);
    dec.u * dec.v.adjoint()
}

/// `f(A)` for Hermitian `A` through its eigen-decomposition.
pub fn hermitian_function(
    a: &CMatrix,
    tol: &Tolerance,
    f: impl Fn(f64) -> f64,
) -> Result<CMatrix> {
    let eig = eig_hermitian(a, tol)?;
    let v = &eig.vectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(f(lambda));
    }
    Ok(scaled * v.adjoint())
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &CMatrix) -> CMatrix {
    if a.nrows() == 0 {
        return a.clone();
    }
    a.exp()
}

/// Complex Schur form `A = Q·T·Q*` with eigenvalue clusters contiguous on the diagonal.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: CMatrix,
    pub t: CMatrix,
    /// Diagonal ranges of the clusters, in spectral order.
    pub clusters: Vec<std::ops::Range<usize>>,
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.t.diagonal().iter().copied().collect()
    }

    pub fn cluster_mean(&self, c: usize) -> Complex64 {
        let r = self.clusters[c].clone();
        let n = r.len() as f64;
        r.map(|i| self.t[(i, i)]).sum::<Complex64>() / n
    }
}

/// Single-linkage clusters of complex eigenvalues within `radius`.
///
/// Cluster order: real part descending; runs of clusters whose real parts
/// are within `radius` of each other are ordered by imaginary part ascending.
/// Members of each cluster are listed by original index.
pub fn cluster_complex(values: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_to_group[r] == usize::MAX {
            root_to_group[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_to_group[r]].push(i);
    }
    let mean = |g: &Vec<usize>| g.iter().map(|&i| values[i]).sum::<Complex64>() / g.len() as f64;
    let mut keyed: Vec<(Complex64, Vec<usize>)> = groups.into_iter().map(|g| (mean(&g), g)).collect();
    keyed.sort_by(|a, b| b.0.re.total_cmp(&a.0.re).then(a.1[0].cmp(&b.1[0])));
    let mut out = Vec::with_capacity(keyed.len());
    let mut start = 0;
    for i in 1..=keyed.len() {
        if i == keyed.len() || (keyed[i - 1].0.re - keyed[i].0.re) > radius {
            let run = &mut keyed[start..i];
            run.sort_by(|a, b| a.0.im.total_cmp(&b.0.im).then(a.1[0].cmp(&b.1[0])));
            out.extend(run.iter().map(|(_, g)| g.clone()));
            start = i;
        }
    }
    out
}

/// Deflation thresholds tried in turn, in units of machine epsilon.
const SCHUR_DEFLATION: [f64; 4] = [1.0, 4.0, 16.0, 64.0];

/// Complex Schur decomposition reordered into spectral cluster order.
pub fn schur(a: &CMatrix, tol: &Tolerance) -> Result<SchurForm> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (a.nrows(), a.nrows()),
            actual: a.shape(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(SchurForm {
            q: zeros(0, 0),
            t: zeros(0, 0),
            clusters: vec![],
        });
    }
    let (mut q, mut t) = if is_upper_triangular(a) {
        (identity(n), a.clone())
    } else {
        // Exactly degenerate spectra can stall QR deflation at machine epsilon;
        // relax the criterion a few ulps at a time before giving up.
        SCHUR_DEFLATION
            .iter()
            .find_map(|&k| Schur::try_new(a.clone(), k * f64::EPSILON, 1000 * n.max(10)))
            .ok_or(Error::ConvergenceFailure("Schur decomposition"))?
            .unpack()
    };
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = ZERO;
        }
    }
    let diag: Vec<Complex64> = t.diagonal().iter().copied().collect();
    let groups = cluster_complex(&diag, tol.eig_cluster_abs);
    let mut rank = vec![0usize; n];
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            rank[i] = g;
        }
    }
    // Stable bubble sort of the diagonal by cluster rank using adjacent swaps.
    for pass in 0..n {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1 + pass) {
            if rank[k] > rank[k + 1] {
                swap_adjacent(&mut t, &mut q, k);
                rank.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    let mut clusters = Vec::with_capacity(groups.len());
    let mut start = 0;
    for members in &groups {
        clusters.push(start..start + members.len());
        start += members.len();
    }
    Ok(SchurForm { q, t, clusters })
}

fn is_upper_triangular(a: &CMatrix) -> bool {
    (0..a.ncols()).all(|j| ((j + 1)..a.nrows()).all(|i| a[(i, j)] == ZERO))
}

/// Exchanges diagonal entries `k` and `k+1` of the triangular factor by a unitary rotation.
fn swap_adjacent(t: &mut CMatrix, q: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let v1 = t[(k, k + 1)];
    let v2 = b - a;
    let norm = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    let (z11, z21) = (v1 / norm, v2 / norm);
    let (z12, z22) = (-z21.conj(), z11.conj());
    // Columns: T ← T·Z.
    for i in 0..n {
        let (x, y) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = x * z11 + y * z21;
        t[(i, k + 1)] = x * z12 + y * z22;
        let (x, y) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = x * z11 + y * z21;
        q[(i, k + 1)] = x * z12 + y * z22;
    }
    // Rows: T ← Z*·T.
    for j in 0..n {
        let (x, y) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = z11.conj() * x + z21.conj() * y;
        t[(k + 1, j)] = z12.conj() * x + z22.conj() * y;
    }
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
    t[(k + 1, k)] = ZERO;
}

/// One cluster of a [`SpectralDecomposition`].
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    /// Mean of the clustered eigenvalues.
    pub eigenvalue: Complex64,
    pub multiplicity: usize,
    /// Orthonormal basis (columns) of the generalized eigenspace.
    pub basis: CMatrix,
    /// Spectral projection onto the generalized eigenspace along all others.
    pub projector: CMatrix,
    /// `‖projector‖₂`.
    pub projector_norm: f64,
    /// `‖T_cc − λ̄·1‖_F` of the triangular cluster block.
    pub nilpotent_norm: f64,
}

/// Generalized eigenspaces and spectral projections of a square matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub schur: SchurForm,
    pub clusters: Vec<SpectralCluster>,
}

/// Block-diagonalizes the ordered Schur form cluster by cluster.
///
/// For cluster `c` occupying diagonal range `s..e` the invariant subspace is
/// spanned by `Q·[Y; 1; 0]`, where the rows of `Y` solve the triangular
/// Sylvester recursion `Y_r·(T_cc − t_rr·1) = Σ_{s>r} T_rs·W_s`.
pub fn spectral_decomposition(a: &CMatrix, tol: &Tolerance) -> Result<SpectralDecomposition> {
    let schur = schur(a, tol)?;
    let n = a.nrows();
    let t = &schur.t;
    let mut w = identity(n);
    for range in &schur.clusters {
        let (s, e) = (range.start, range.end);
        let m = e - s;
        let tcc = t.view((s, s), (m, m)).into_owned();
        for r in (0..s).rev() {
            // rhs_j = Σ_{p=r+1}^{e-1} T[r,p]·W[p, s+j]
            let mut rhs = vec![ZERO; m];
            for p in (r + 1)..e {
                let trp = t[(r, p)];
                if trp == ZERO {
                    continue;
                }
                for (j, slot) in rhs.iter_mut().enumerate() {
                    *slot += trp * w[(p, s + j)];
                }
            }
            // Solve row vector y·(Tcc − t_rr·1) = rhs; the matrix is upper triangular.
            let trr = t[(r, r)];
            let mut y = vec![ZERO; m];
            for j in 0..m {
                let mut acc = rhs[j];
                for l in 0..j {
                    acc -= y[l] * tcc[(l, j)];
                }
                y[j] = acc / (tcc[(j, j)] - trr);
            }
            for j in 0..m {
                w[(r, s + j)] = y[j];
            }
        }
    }
    let w_inv = w
        .clone()
        .solve_upper_triangular(&identity(n))
        .ok_or(Error::ConvergenceFailure("spectral block diagonalization"))?;
    let q = &schur.q;
    let v = q * &w;
    let left = &w_inv * q.adjoint();
    let mut clusters = Vec::with_capacity(schur.clusters.len());
    for (c, range) in schur.clusters.iter().enumerate() {
        let m = range.len();
        let lambda = schur.cluster_mean(c);
        let cols = v.columns(range.start, m).into_owned();
        let rows = left.rows(range.start, m).into_owned();
        let projector = &cols * &rows;
        // ‖C·R‖₂ = σ_max(R_C·R_R*) for thin QR factors C = Q_C·R_C, R* = Q_R·R_R.
        let rc = cols.clone().qr().r();
        let rr = rows.adjoint().qr().r();
        let projector_norm = singular_values(&(rc * rr.adjoint())).first().copied().unwrap_or(0.0);
        let mut block = t.view((range.start, range.start), (m, m)).into_owned();
        for i in 0..m {
            block[(i, i)] -= lambda;
        }
        clusters.push(SpectralCluster {
            eigenvalue: lambda,
            multiplicity: m,
            basis: column_span(&cols, tol, None),
            projector,
            projector_norm,
            nilpotent_norm: block.norm(),
        });
    }
    Ok(SpectralDecomposition { schur, clusters })
}

/// `true` when the cluster block is a multiple of the identity up to the tolerance.
pub fn is_semisimple(cluster: &SpectralCluster, matrix_norm: f64, tol: &Tolerance) -> bool {
    cluster.nilpotent_norm <= 1e3 * tol.eig_cluster_abs * (1.0 + matrix_norm)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    a.clone()
        .try_inverse()
        .ok_or(Error::ConvergenceFailure("matrix inversion"))
}
