//! Dense complex matrices, concrete *-subalgebras of `M_n(C)` and the
//! handful of numerical primitives everything else is built from.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Default tolerance for equality of operators, relative to their norms.
pub const EQ_TOL: f64 = 1e-9;
/// Default tolerance for positivity tests.
pub const PSD_TOL: f64 = 1e-10;
/// Relative rank cutoff used when separating degenerate Gram matrices.
pub const RANK_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Build a matrix from real row-major data.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| r(data[i * cols + j]))
}

pub fn diag(entries: &[f64]) -> ComplexMatrix {
    let n = entries.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { r(entries[i]) } else { C64::default() })
}

/// Matrix unit `e_{ij}` in `M_n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(n, n);
    m[(i, j)] = r(1.0);
    m
}

/// Kronecker product, with the index of `a` as the slow index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C64::default() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Hilbert–Schmidt pairing `tr(a* b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Largest singular value.
pub fn operator_norm(x: &ComplexMatrix) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Singular values of `x`, unsorted.
pub fn singular_values(x: &ComplexMatrix) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    x.clone().svd(false, false).singular_values.iter().cloned().collect()
}

pub fn numerical_rank(x: &ComplexMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(x);
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

pub fn hermitian_part(x: &ComplexMatrix) -> ComplexMatrix {
    (x + x.adjoint()) * r(0.5)
}

pub fn max_abs(x: &ComplexMatrix) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian part of `x`; eigenvalues ascending.
pub fn hermitian_eigen(x: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = x.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(x).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(x: &ComplexMatrix) -> f64 {
    hermitian_eigen(x).0.first().cloned().unwrap_or(0.0)
}

/// True iff `x` is Hermitian within `tol` and its spectrum lies above `-tol`.
pub fn is_psd(x: &ComplexMatrix, tol: f64) -> Result<bool> {
    if !x.is_square() {
        return Err(Error::dim("is_psd", "square matrix", format!("{}x{}", x.nrows(), x.ncols())));
    }
    if max_abs(&(x - x.adjoint())) > tol {
        return Ok(false);
    }
    Ok(min_eigenvalue(x) >= -tol)
}

/// Orthonormal basis (columns) of the kernel of `a`. Singular values up to
/// `rel_tol · max(‖a‖, 1)` count as zero, so that a matrix which is zero up
/// to roundoff has a full kernel.
pub fn nullspace(a: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    let cols = a.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    let padded;
    let a = if a.nrows() < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * top.max(1.0);
    let mut keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    keep.sort_unstable();
    let mut out = zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        for j in 0..cols {
            out[(j, k)] = v_t[(i, j)].conj();
        }
    }
    out
}

/// Orthonormalise a list of vectors (modified Gram–Schmidt, two passes),
/// dropping those that are dependent on their predecessors.
pub fn orthonormalize(vectors: &[ComplexVector], tol: f64) -> Vec<ComplexVector> {
    let mut out: Vec<ComplexVector> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let p = q.dotc(&w);
                w -= q * p;
            }
        }
        let n = w.norm();
        if n > tol * scale.max(1.0) {
            out.push(w / r(n));
        }
    }
    out
}

pub fn columns_to_matrix(rows: usize, cols: &[ComplexVector]) -> ComplexMatrix {
    let mut m = zeros(rows, cols.len());
    for (j, v) in cols.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Column-major vectorisation.
pub fn vec_of(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_iterator(m.len(), m.iter().cloned())
}

pub fn unvec(v: &ComplexVector, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_iterator(rows, cols, v.iter().cloned())
}

/// Matrix product through a blocked complex GEMM kernel; small products
/// stay on the generic path.
pub fn mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, k) = a.shape();
    let n = b.ncols();
    assert_eq!(k, b.nrows(), "mul: inner dimensions");
    if m * k * n < 4096 {
        return a * b;
    }
    let mut out = zeros(m, n);
    let one = [1.0f64, 0.0];
    let zero = [0.0f64, 0.0];
    // SAFETY: `Complex<f64>` is `repr(C)` with two `f64` fields, matching
    // the kernel's `[f64; 2]`; all three buffers are dense column-major with
    // the shapes passed, and `out` does not alias the inputs.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            one,
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            zero,
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    out
}

/// `(a ⊗ I_d) m` without forming the Kronecker product.
pub fn kron_mul(a: &ComplexMatrix, d: usize, m: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = a.shape();
    assert_eq!(m.nrows(), q * d, "kron_mul: inner dimensions");
    if d == 1 {
        return mul(a, m);
    }
    let c = m.ncols();
    let mut out = zeros(p * d, c);
    // rows s, s+d, s+2d, ... of the output only see the same stride of m
    for s in 0..d {
        let slice = ComplexMatrix::from_fn(q, c, |j, k| m[(j * d + s, k)]);
        let prod = mul(a, &slice);
        for i in 0..p {
            out.row_mut(i * d + s).copy_from(&prod.row(i));
        }
    }
    out
}

/// `(I_d ⊗ b) m` without forming the Kronecker product.
pub fn id_kron_mul(d: usize, b: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = b.shape();
    assert_eq!(m.nrows(), q * d, "id_kron_mul: inner dimensions");
    let mut out = zeros(p * d, m.ncols());
    for i in 0..d {
        out.rows_mut(i * p, p).copy_from(&mul(b, &m.rows(i * q, q).into_owned()));
    }
    out
}

/// `x^n` by binary powering.
pub fn matrix_power(x: &ComplexMatrix, mut n: u64) -> ComplexMatrix {
    let mut result = identity(x.nrows());
    let mut base = x.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = mul(&result, &base);
        }
        n >>= 1;
        if n > 0 {
            base = mul(&base, &base);
        }
    }
    result
}

/// Orthogonal projection onto the column span of `m`.
pub fn range_projection(m: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return zeros(rows, rows);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut p = zeros(rows, rows);
    if top == 0.0 {
        return p;
    }
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > rel_tol * top {
            let col = u.column(k);
            p += col * col.adjoint();
        }
    }
    p
}

/// Result of quotienting an algebraic span by the kernel of a
/// positive semidefinite scalar Gram matrix `S`.
///
/// `expand` (`D x r`) writes each orthonormal quotient basis vector in the
/// spanning family; `project` (`r x D`) sends a spanning vector to its
/// quotient coordinates. `expand^* S expand = I` and
/// `project^* project = S`.
#[derive(Clone, Debug)]
pub struct Separation {
    pub expand: ComplexMatrix,
    pub project: ComplexMatrix,
    pub pivots: Vec<usize>,
}

impl Separation {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Separate a scalar Gram matrix: pivoted Cholesky picks an independent
/// spanning subfamily (ties broken by lowest index), which is then
/// orthonormalised in ascending index order.
pub fn separate(s: &ComplexMatrix, rel_tol: f64) -> Separation {
    let d = s.nrows();
    let s = hermitian_part(s);
    let diag: Vec<f64> = (0..d).map(|i| s[(i, i)].re).collect();
    let top = diag.iter().cloned().fold(0.0, f64::max);
    let mut pivots = Vec::new();
    if top > 0.0 {
        let mut resid = diag.clone();
        let mut chosen = vec![false; d];
        let mut cols: Vec<ComplexVector> = Vec::new();
        loop {
            let mut best = None;
            for i in 0..d {
                if !chosen[i] && best.is_none_or(|b: usize| resid[i] > resid[b]) {
                    best = Some(i);
                }
            }
            let Some(j) = best else { break };
            if resid[j] <= rel_tol * top {
                break;
            }
            let mut col: ComplexVector = s.column(j).into_owned();
            for l in &cols {
                let f = l[j].conj();
                col.axpy(-f, l, C64::new(1.0, 0.0));
            }
            let piv = resid[j].sqrt();
            col /= r(piv);
            for i in 0..d {
                resid[i] -= col[i].norm_sqr();
            }
            chosen[j] = true;
            pivots.push(j);
            cols.push(col);
        }
    }
    pivots.sort_unstable();
    let rank = pivots.len();
    let sjj = ComplexMatrix::from_fn(rank, rank, |a, b| s[(pivots[a], pivots[b])]);
    // S_JJ = L L^*, quotient basis = E_J L^{-*}
    let l_inv_adj = match sjj.clone().cholesky() {
        Some(ch) => {
            lower_triangular_inverse(&ch.l()).adjoint()
        }
        None => {
            // fall back to a symmetric inverse square root
            let (vals, vecs) = hermitian_eigen(&sjj);
            let inv_sqrt = ComplexMatrix::from_fn(rank, rank, |i, j| {
                if i == j {
                    r(1.0 / vals[i].max(f64::MIN_POSITIVE).sqrt())
                } else {
                    C64::default()
                }
            });
            &vecs * inv_sqrt * vecs.adjoint()
        }
    };
    let mut expand = zeros(d, rank);
    for (a, &p) in pivots.iter().enumerate() {
        for b in 0..rank {
            expand[(p, b)] = l_inv_adj[(a, b)];
        }
    }
    let project = mul(&expand.adjoint(), &s);
    Separation { expand, project, pivots }
}

/// Inverse of an invertible lower triangular matrix, by 2x2 block recursion.
pub fn lower_triangular_inverse(l: &ComplexMatrix) -> ComplexMatrix {
    let n = l.nrows();
    if n <= 48 {
        return l.solve_lower_triangular(&identity(n)).expect("triangular factor is invertible");
    }
    let h = n / 2;
    let a_inv = lower_triangular_inverse(&l.view((0, 0), (h, h)).into_owned());
    let d_inv = lower_triangular_inverse(&l.view((h, h), (n - h, n - h)).into_owned());
    let c = l.view((h, 0), (n - h, h)).into_owned();
    let off = -mul(&d_inv, &mul(&c, &a_inv));
    let mut out = zeros(n, n);
    out.view_mut((0, 0), (h, h)).copy_from(&a_inv);
    out.view_mut((h, h), (n - h, n - h)).copy_from(&d_inv);
    out.view_mut((h, 0), (n - h, h)).copy_from(&off);
    out
}

/// A concrete unital *-subalgebra of `M_n(C)`, stored by a basis that is
/// orthonormal for `tr(a^* b)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StarAlgebra {
    pub ambient_dim: usize,
    #[serde(with = "crate::literal::matrices")]
    pub basis: Vec<ComplexMatrix>,
    pub contains_identity: bool,
}

impl StarAlgebra {
    /// Build from a spanning set that is already known to be a *-algebra.
    pub fn from_spanning(ambient_dim: usize, span: &[ComplexMatrix]) -> Result<Self> {
        for (k, g) in span.iter().enumerate() {
            if g.shape() != (ambient_dim, ambient_dim) {
                return Err(Error::dim(
                    format!("algebra element {k}"),
                    format!("{ambient_dim}x{ambient_dim}"),
                    format!("{}x{}", g.nrows(), g.ncols()),
                ));
            }
        }
        let vecs: Vec<ComplexVector> = span.iter().map(vec_of).collect();
        let basis: Vec<ComplexMatrix> = orthonormalize(&vecs, 1e-10)
            .iter()
            .map(|v| unvec(v, ambient_dim, ambient_dim))
            .collect();
        let mut alg = StarAlgebra { ambient_dim, basis, contains_identity: false };
        alg.contains_identity = alg.contains(&identity(ambient_dim), 1e-8);
        Ok(alg)
    }

    /// Smallest unital *-subalgebra containing `gens`.
    pub fn from_generators(gens: &[ComplexMatrix], ambient_dim: usize) -> Result<Self> {
        let n = ambient_dim;
        for (k, g) in gens.iter().enumerate() {
            if g.shape() != (n, n) {
                return Err(Error::dim(
                    format!("generator {k}"),
                    format!("{n}x{n}"),
                    format!("{}x{}", g.nrows(), g.ncols()),
                ));
            }
        }
        let mut letters: Vec<ComplexMatrix> = Vec::new();
        for g in gens {
            letters.push(g.clone());
            letters.push(g.adjoint());
        }
        let mut span: Vec<ComplexVector> = vec![vec_of(&identity(n))];
        span.extend(letters.iter().map(vec_of));
        let mut basis = orthonormalize(&span, 1e-10);
        // close under multiplication by the letters until the dimension stabilises
        loop {
            let before = basis.len();
            let mut candidates = basis.clone();
            for b in &basis {
                let bm = unvec(b, n, n);
                for l in &letters {
                    candidates.push(vec_of(&(&bm * l)));
                    candidates.push(vec_of(&(l * &bm)));
                }
            }
            basis = orthonormalize(&candidates, 1e-10);
            if basis.len() == before || basis.len() >= n * n {
                break;
            }
        }
        let basis = basis.iter().map(|v| unvec(v, n, n)).collect();
        Ok(StarAlgebra { ambient_dim: n, basis, contains_identity: true })
    }

    pub fn full(n: usize) -> Self {
        let mut basis = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                basis.push(matrix_unit(n, i, j));
            }
        }
        StarAlgebra { ambient_dim: n, basis, contains_identity: true }
    }

    pub fn scalars(n: usize) -> Self {
        let s = 1.0 / (n as f64).sqrt();
        StarAlgebra { ambient_dim: n, basis: vec![identity(n) * r(s)], contains_identity: true }
    }

    pub fn diagonal(n: usize) -> Self {
        StarAlgebra {
            ambient_dim: n,
            basis: (0..n).map(|i| matrix_unit(n, i, i)).collect(),
            contains_identity: true,
        }
    }

    /// `M_{k_1} ⊕ ... ⊕ M_{k_m}` embedded block-diagonally.
    pub fn block_diagonal(blocks: &[usize]) -> Self {
        let n: usize = blocks.iter().sum();
        let mut basis = Vec::new();
        let mut off = 0;
        for &k in blocks {
            for j in 0..k {
                for i in 0..k {
                    basis.push(matrix_unit(n, off + i, off + j));
                }
            }
            off += k;
        }
        StarAlgebra { ambient_dim: n, basis, contains_identity: true }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `x` against the basis (orthogonal projection).
    pub fn coords(&self, x: &ComplexMatrix) -> ComplexVector {
        ComplexVector::from_iterator(self.dim(), self.basis.iter().map(|b| hs_inner(b, x)))
    }

    pub fn element(&self, coords: &ComplexVector) -> ComplexMatrix {
        let mut out = zeros(self.ambient_dim, self.ambient_dim);
        for (b, w) in self.basis.iter().zip(coords.iter()) {
            out += b * *w;
        }
        out
    }

    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.element(&self.coords(x))
    }

    /// Distance from `x` to the span of the basis.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        frobenius_norm(&(x - self.project(x)))
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.residual(x) <= tol * frobenius_norm(x).max(1.0)
    }

    /// True iff both algebras span the same subspace.
    pub fn same_span(&self, other: &StarAlgebra, tol: f64) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b, tol))
    }

    /// Matrix of `a ↦ coords in self` applied to `other`'s basis.
    pub fn change_of_basis(&self, other: &StarAlgebra) -> ComplexMatrix {
        let mut m = zeros(self.dim(), other.dim());
        for (j, b) in other.basis.iter().enumerate() {
            m.set_column(j, &self.coords(b));
        }
        m
    }

    /// Residuals of closure under adjoints and products, and of unitality.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            worst = worst.max(self.residual(&a.adjoint()));
            for b in &self.basis {
                worst = worst.max(self.residual(&(a * b)));
            }
        }
        if self.contains_identity {
            worst = worst.max(self.residual(&identity(self.ambient_dim)));
        }
        worst
    }

    /// Coordinates of the identity.
    pub fn unit_coords(&self) -> ComplexVector {
        self.coords(&identity(self.ambient_dim))
    }

    /// Normalised trace `tr(x)/n`, the faithful tracial state used for
    /// scalarising algebra-valued inner products.
    pub fn tau(&self, x: &ComplexMatrix) -> C64 {
        trace(x) / r(self.ambient_dim as f64)
    }
}

/// `{x : xa = ax for every basis element a}`.
pub fn commutant(a: &StarAlgebra) -> StarAlgebra {
    commutant_of_set(a.ambient_dim, &generating_elements(a))
}

/// Commutant of an arbitrary set (closed under adjoints by the caller or not).
pub fn commutant_of_set(n: usize, set: &[ComplexMatrix]) -> StarAlgebra {
    let nn = n * n;
    let id = identity(n);
    let mut stacked = zeros(nn * set.len().max(1), nn);
    for (k, a) in set.iter().enumerate() {
        // vec(a x - x a) = (I ⊗ a - a^T ⊗ I) vec(x)
        let block = kron(&id, a) - kron(&a.transpose(), &id);
        stacked.view_mut((k * nn, 0), (nn, nn)).copy_from(&block);
    }
    let null = nullspace(&stacked, 1e-9);
    let basis = (0..null.ncols())
        .map(|j| unvec(&null.column(j).into_owned(), n, n))
        .collect();
    StarAlgebra { ambient_dim: n, basis, contains_identity: true }
}

/// A small generating set with the same commutant as `a`: the basis for
/// small algebras, otherwise a few fixed pseudo-random elements and their
/// adjoints (generic pairs generate any finite-dimensional C*-algebra).
fn generating_elements(a: &StarAlgebra) -> Vec<ComplexMatrix> {
    if a.dim() <= 8 {
        return a.basis.clone();
    }
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut gens = Vec::new();
    for _ in 0..3 {
        let coords = ComplexVector::from_fn(a.dim(), |_, _| c(next(), next()));
        let x = a.element(&coords);
        gens.push(x.adjoint());
        gens.push(x);
    }
    gens
}
