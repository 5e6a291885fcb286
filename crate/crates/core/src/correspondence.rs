//! Finite-dimensional Hilbert C*-modules with left actions, stored
//! abstractly: a linear basis, the algebra-valued Gram matrix and the
//! matrices of the left and right actions on that basis.
//!
//! Finite-dimensional modules over finite-dimensional algebras are
//! automatically self-dual, so the W*-completions that appear for
//! correspondences over von Neumann algebras are the identity here.

use serde::{Deserialize, Serialize};

use crate::algebra::{
    frobenius_norm, hermitian_eigen, identity, kron, kron_mul, min_eigenvalue, mul, numerical_rank, operator_norm,
    orthonormalize, r, separate, unvec, vec_of, zeros, ComplexMatrix, ComplexVector, Separation,
    StarAlgebra, C64, RANK_TOL,
};
use crate::error::{Error, Result};
use crate::report::Residuals;

/// A Hilbert module over `coeff_algebra` with a left action of
/// `left_algebra` by adjointable maps. When both algebras coincide this is
/// a correspondence over that algebra.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Correspondence {
    pub left_algebra: StarAlgebra,
    #[serde(rename = "algebra")]
    pub coeff_algebra: StarAlgebra,
    pub vec_dim: usize,
    pub basis_labels: Vec<String>,
    /// Block matrix whose `(i, j)` block is `<ξ_i, ξ_j>`.
    #[serde(with = "crate::literal")]
    pub gram: ComplexMatrix,
    #[serde(with = "crate::literal::matrices")]
    pub right_action: Vec<ComplexMatrix>,
    #[serde(with = "crate::literal::matrices")]
    pub left_action: Vec<ComplexMatrix>,
}

/// A separated quotient of an algebraic spanning family, together with the
/// maps relating the family to the orthonormal quotient basis.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub module: Correspondence,
    /// `r x D`: spanning vector ↦ quotient coordinates.
    pub project: ComplexMatrix,
    /// `D x r`: quotient basis vector ↦ combination of spanning vectors.
    pub expand: ComplexMatrix,
}

impl Correspondence {
    pub fn new(
        left_algebra: StarAlgebra,
        coeff_algebra: StarAlgebra,
        gram: ComplexMatrix,
        right_action: Vec<ComplexMatrix>,
        left_action: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let n = coeff_algebra.ambient_dim;
        if n == 0 || !gram.nrows().is_multiple_of(n) || !gram.is_square() {
            return Err(Error::dim("gram", format!("square, multiple of {n}"), format!("{}x{}", gram.nrows(), gram.ncols())));
        }
        let d = gram.nrows() / n;
        if right_action.len() != coeff_algebra.dim() {
            return Err(Error::dim("right_action count", coeff_algebra.dim(), right_action.len()));
        }
        if left_action.len() != left_algebra.dim() {
            return Err(Error::dim("left_action count", left_algebra.dim(), left_action.len()));
        }
        for m in right_action.iter().chain(left_action.iter()) {
            if m.shape() != (d, d) {
                return Err(Error::dim("action matrix", format!("{d}x{d}"), format!("{}x{}", m.nrows(), m.ncols())));
            }
        }
        Ok(Correspondence {
            left_algebra,
            coeff_algebra,
            vec_dim: d,
            basis_labels: (0..d).map(|i| format!("v{i}")).collect(),
            gram,
            right_action,
            left_action,
        })
    }

    /// `C^d` over `C` with the standard inner product.
    pub fn standard(d: usize) -> Self {
        let scalars = StarAlgebra::scalars(1);
        Correspondence {
            left_algebra: scalars.clone(),
            coeff_algebra: scalars,
            vec_dim: d,
            basis_labels: (0..d).map(|i| format!("e{}", i + 1)).collect(),
            gram: identity(d),
            right_action: vec![identity(d)],
            left_action: vec![identity(d)],
        }
    }

    /// An algebra as a correspondence over itself: `<a, b> = a^* b`.
    pub fn over_itself(alg: &StarAlgebra) -> Self {
        let n = alg.ambient_dim;
        let d = alg.dim();
        let mut gram = zeros(d * n, d * n);
        for (i, a) in alg.basis.iter().enumerate() {
            for (j, b) in alg.basis.iter().enumerate() {
                gram.view_mut((i * n, j * n), (n, n)).copy_from(&(a.adjoint() * b));
            }
        }
        let mult = |left: bool| -> Vec<ComplexMatrix> {
            alg.basis
                .iter()
                .map(|x| {
                    let mut m = zeros(d, d);
                    for (j, b) in alg.basis.iter().enumerate() {
                        let prod = if left { x * b } else { b * x };
                        m.set_column(j, &alg.coords(&prod));
                    }
                    m
                })
                .collect()
        };
        Correspondence {
            left_algebra: alg.clone(),
            coeff_algebra: alg.clone(),
            vec_dim: d,
            basis_labels: (0..d).map(|i| format!("a{i}")).collect(),
            gram,
            right_action: mult(false),
            left_action: mult(true),
        }
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_algebra.ambient_dim
    }

    pub fn is_correspondence(&self) -> bool {
        self.left_algebra.same_span(&self.coeff_algebra, 1e-9)
    }

    /// `<ξ_i, ξ_j>`.
    pub fn gram_entry(&self, i: usize, j: usize) -> ComplexMatrix {
        let n = self.coeff_dim();
        self.gram.view((i * n, j * n), (n, n)).into_owned()
    }

    /// `<u, v>` for coordinate vectors.
    pub fn inner(&self, u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
        let n = self.coeff_dim();
        let id = identity(n);
        let ui = kron(&ComplexMatrix::from_column_slice(u.len(), 1, u.as_slice()), &id);
        let vi = kron(&ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice()), &id);
        ui.adjoint() * &self.gram * vi
    }

    /// The Gram matrix transported along `w` (columns are coordinate vectors):
    /// block `(i,j)` is `<w_i, w_j>`.
    pub fn gram_along(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let wi = kron(w, &identity(self.coeff_dim()));
        wi.adjoint() * &self.gram * wi
    }

    /// Scalar Gram matrix `τ(<ξ_i, ξ_j>)` for the normalised trace `τ`.
    pub fn scalar_gram(&self) -> ComplexMatrix {
        scalarize(&self.gram, self.vec_dim, &self.coeff_algebra)
    }

    /// Matrix of the left action of an arbitrary element of the left algebra.
    pub fn left_op(&self, a: &ComplexMatrix) -> ComplexMatrix {
        combine(&self.left_action, &self.left_algebra.coords(a), self.vec_dim)
    }

    /// Matrix of the right action of an arbitrary element of the coefficient algebra.
    pub fn right_op(&self, b: &ComplexMatrix) -> ComplexMatrix {
        combine(&self.right_action, &self.coeff_algebra.coords(b), self.vec_dim)
    }

    /// Quotient of this module's basis by the null space of its inner product,
    /// with an orthonormal basis for the scalarised inner product.
    pub fn separated(&self) -> Quotient {
        from_spanning(
            self.left_algebra.clone(),
            self.coeff_algebra.clone(),
            &self.gram,
            &self.right_action,
            &self.left_action,
            &self.basis_labels,
        )
    }

    /// Named residuals for the correspondence axioms. Nothing is thrown:
    /// invalid data simply produces large residuals.
    pub fn check_axioms(&self, _tol: f64) -> Residuals {
        let d = self.vec_dim;
        let n = self.coeff_dim();
        let idn = identity(n);
        let idd = identity(d);
        let mut out = Residuals::new();
        out.push("gram_hermitian", operator_norm(&(&self.gram - self.gram.adjoint())));
        out.push("gram_positive", (-min_eigenvalue(&self.gram)).max(0.0));
        let s = self.scalar_gram();
        let (vals, _) = hermitian_eigen(&s);
        let top = vals.iter().cloned().fold(0.0, f64::max);
        let degenerate = vals.iter().filter(|&&v| v <= RANK_TOL * top.max(f64::MIN_POSITIVE)).count();
        out.push("gram_nondegenerate", degenerate as f64);

        let mut right = 0.0f64;
        for (rk, a) in self.right_action.iter().zip(&self.coeff_algebra.basis) {
            let lhs = &self.gram * kron(rk, &idn);
            let rhs = &self.gram * kron(&idd, a);
            right = right.max(operator_norm(&(lhs - rhs)));
        }
        out.push("right_compatibility", right);

        let mut adj = 0.0f64;
        for (lk, a) in self.left_action.iter().zip(&self.left_algebra.basis) {
            let lhs = kron(lk, &idn).adjoint() * &self.gram;
            let rhs = &self.gram * kron(&self.left_op(&a.adjoint()), &idn);
            adj = adj.max(operator_norm(&(lhs - rhs)));
        }
        out.push("left_adjointable", adj);

        let mut hom = operator_norm(&(self.left_op(&identity(self.left_algebra.ambient_dim)) - &idd));
        for (la, a) in self.left_action.iter().zip(&self.left_algebra.basis) {
            for (lb, b) in self.left_action.iter().zip(&self.left_algebra.basis) {
                hom = hom.max(operator_norm(&(la * lb - self.left_op(&(a * b)))));
            }
        }
        out.push("left_homomorphism", hom);

        let mut anti = operator_norm(&(self.right_op(&idn) - &idd));
        for (ra, a) in self.right_action.iter().zip(&self.coeff_algebra.basis) {
            for (rb, b) in self.right_action.iter().zip(&self.coeff_algebra.basis) {
                anti = anti.max(operator_norm(&(rb * ra - self.right_op(&(a * b)))));
            }
        }
        out.push("right_antihomomorphism", anti);
        out
    }

    /// Concrete modules: spanning tuples of `q x n` matrices (one matrix per
    /// tag), left multiplication by `left` (in `M_q`), right multiplication by
    /// `right` (in `M_n`), and `<x, y> = Σ_t x_t^* y_t`. Returns the module
    /// and the largest distance of `a·x` or `x·b` from the span (zero for
    /// genuinely invariant subspaces).
    pub fn from_concrete(
        left: &StarAlgebra,
        right: &StarAlgebra,
        elements: &[Vec<ComplexMatrix>],
    ) -> Result<(Correspondence, ConcreteBasis)> {
        Self::concrete(left, right, elements, false)
    }

    /// As [`Correspondence::from_concrete`], with `<x, y> = E(Σ_t x_t^* y_t)`
    /// for the trace-preserving conditional expectation `E` onto `right`
    /// (the orthogonal projection onto it).
    pub fn from_concrete_expected(
        left: &StarAlgebra,
        right: &StarAlgebra,
        elements: &[Vec<ComplexMatrix>],
    ) -> Result<(Correspondence, ConcreteBasis)> {
        Self::concrete(left, right, elements, true)
    }

    fn concrete(
        left: &StarAlgebra,
        right: &StarAlgebra,
        elements: &[Vec<ComplexMatrix>],
        expect: bool,
    ) -> Result<(Correspondence, ConcreteBasis)> {
        let basis = ConcreteBasis::new(left.ambient_dim, right.ambient_dim, elements)?;
        let d = basis.elements.len();
        let n = right.ambient_dim;
        let mut gram = zeros(d * n, d * n);
        for i in 0..d {
            for j in 0..d {
                let g = basis.pair(i, j, |x, y| x.adjoint() * y);
                let g = if expect { right.project(&g) } else { g };
                gram.view_mut((i * n, j * n), (n, n)).copy_from(&g);
            }
        }
        let mut closure = 0.0f64;
        let mut act = |f: &dyn Fn(&ComplexMatrix) -> ComplexMatrix| -> ComplexMatrix {
            let mut m = zeros(d, d);
            for j in 0..d {
                let image: Vec<ComplexMatrix> = basis.elements[j].iter().map(f).collect();
                let (coords, resid) = basis.coords(&image);
                closure = closure.max(resid);
                m.set_column(j, &coords);
            }
            m
        };
        let left_action: Vec<_> = left.basis.iter().map(|a| act(&|x: &ComplexMatrix| a * x)).collect();
        let right_action: Vec<_> = right.basis.iter().map(|b| act(&|x: &ComplexMatrix| x * b)).collect();
        let mut module = Correspondence::new(left.clone(), right.clone(), gram, right_action, left_action)?;
        module.basis_labels = (0..d).map(|i| format!("x{i}")).collect();
        let mut basis = basis;
        basis.closure_residual = closure;
        Ok((module, basis))
    }
}

/// Frobenius-orthonormal basis of a concrete module of matrix tuples.
#[derive(Clone, Debug)]
pub struct ConcreteBasis {
    pub rows: usize,
    pub cols: usize,
    pub elements: Vec<Vec<ComplexMatrix>>,
    pub closure_residual: f64,
}

impl ConcreteBasis {
    fn new(rows: usize, cols: usize, spanning: &[Vec<ComplexMatrix>]) -> Result<Self> {
        let tags = spanning.first().map_or(0, Vec::len);
        let mut flat = Vec::new();
        for (k, tuple) in spanning.iter().enumerate() {
            if tuple.len() != tags {
                return Err(Error::dim(format!("element {k} tag count"), tags, tuple.len()));
            }
            let mut v = Vec::new();
            for m in tuple {
                if m.shape() != (rows, cols) {
                    return Err(Error::dim(format!("element {k}"), format!("{rows}x{cols}"), format!("{}x{}", m.nrows(), m.ncols())));
                }
                v.extend(m.iter().cloned());
            }
            flat.push(ComplexVector::from_vec(v));
        }
        let elements = orthonormalize(&flat, 1e-10)
            .iter()
            .map(|v| {
                (0..tags)
                    .map(|t| {
                        let part = v.rows(t * rows * cols, rows * cols).into_owned();
                        unvec(&part, rows, cols)
                    })
                    .collect()
            })
            .collect();
        Ok(ConcreteBasis { rows, cols, elements, closure_residual: 0.0 })
    }

    fn pair(&self, i: usize, j: usize, f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
        let x = &self.elements[i];
        let y = &self.elements[j];
        let mut acc: Option<ComplexMatrix> = None;
        for (a, b) in x.iter().zip(y) {
            let v = f(a, b);
            acc = Some(match acc {
                Some(s) => s + v,
                None => v,
            });
        }
        acc.expect("at least one tag")
    }

    /// Coordinates of a tuple and its distance from the span.
    pub fn coords(&self, tuple: &[ComplexMatrix]) -> (ComplexVector, f64) {
        let coords = ComplexVector::from_iterator(
            self.elements.len(),
            self.elements.iter().map(|e| e.iter().zip(tuple).map(|(a, b)| crate::algebra::hs_inner(a, b)).sum::<C64>()),
        );
        let mut resid = 0.0;
        for (t, target) in tuple.iter().enumerate() {
            let mut rebuilt = zeros(self.rows, self.cols);
            for (e, w) in self.elements.iter().zip(coords.iter()) {
                rebuilt += &e[t] * *w;
            }
            resid += frobenius_norm(&(target - rebuilt)).powi(2);
        }
        (coords, resid.sqrt())
    }

    /// The algebra-valued "left" inner products `Σ_t x_t y_t^*`.
    pub fn left_gram(&self) -> ComplexMatrix {
        let d = self.elements.len();
        let q = self.rows;
        let mut g = zeros(d * q, d * q);
        for i in 0..d {
            for j in 0..d {
                let v = self.pair(i, j, |x, y| x * y.adjoint());
                g.view_mut((i * q, j * q), (q, q)).copy_from(&v);
            }
        }
        g
    }
}

fn combine(ops: &[ComplexMatrix], coords: &ComplexVector, d: usize) -> ComplexMatrix {
    let mut out = zeros(d, d);
    for (m, w) in ops.iter().zip(coords.iter()) {
        if *w != C64::default() {
            out += m * *w;
        }
    }
    out
}

/// Apply `τ` blockwise to a `(D·n) x (D·n)` block matrix.
pub fn scalarize(gram: &ComplexMatrix, d: usize, alg: &StarAlgebra) -> ComplexMatrix {
    let n = alg.ambient_dim;
    ComplexMatrix::from_fn(d, d, |i, j| {
        let mut t = C64::default();
        for k in 0..n {
            t += gram[(i * n + k, j * n + k)];
        }
        t / r(n as f64)
    })
}

/// Separate an algebraic spanning family described by its block Gram
/// matrix and the actions on the family.
pub fn from_spanning(
    left: StarAlgebra,
    coeff: StarAlgebra,
    gram: &ComplexMatrix,
    right_action: &[ComplexMatrix],
    left_action: &[ComplexMatrix],
    labels: &[String],
) -> Quotient {
    let n = coeff.ambient_dim;
    let big_d = gram.nrows() / n;
    let s = scalarize(gram, big_d, &coeff);
    let Separation { expand, project, pivots } = separate(&s, RANK_TOL);
    let ex_adj = expand.adjoint();
    let half = kron_mul(&ex_adj, n, gram);
    let new_gram = kron_mul(&ex_adj, n, &half.adjoint()).adjoint();
    let push = |ops: &[ComplexMatrix]| -> Vec<ComplexMatrix> { ops.iter().map(|m| mul(&project, &mul(m, &expand))).collect() };
    let basis_labels = pivots
        .iter()
        .map(|&p| labels.get(p).cloned().unwrap_or_else(|| format!("v{p}")))
        .collect();
    let module = Correspondence {
        left_algebra: left,
        coeff_algebra: coeff,
        vec_dim: pivots.len(),
        basis_labels,
        gram: hermitian_blocks(new_gram),
        right_action: push(right_action),
        left_action: push(left_action),
    };
    Quotient { module, project, expand }
}

fn hermitian_blocks(g: ComplexMatrix) -> ComplexMatrix {
    (&g + g.adjoint()) * r(0.5)
}

/// Balanced tensor product `E ⊗_B F`: `E` is an `A,B`-module and `F` carries
/// a left action of `B`. The algebraic tensor `ξ_i ⊗ η_j` is indexed
/// `i * dim F + j`.
pub fn internal_tensor(e: &Correspondence, f: &Correspondence) -> Result<Quotient> {
    let (gram, right, left, labels) = algebraic_tensor(e, f)?;
    Ok(from_spanning(e.left_algebra.clone(), f.coeff_algebra.clone(), &gram, &right, &left, &labels))
}

/// Block Gram matrix and actions on the algebraic tensor product.
#[allow(clippy::type_complexity)]
pub fn algebraic_tensor(
    e: &Correspondence,
    f: &Correspondence,
) -> Result<(ComplexMatrix, Vec<ComplexMatrix>, Vec<ComplexMatrix>, Vec<String>)> {
    if !e.coeff_algebra.same_span(&f.left_algebra, 1e-8) {
        return Err(Error::AlgebraMismatch(format!(
            "coefficient algebra of the left factor (dim {} in M_{}) differs from the algebra acting on the right factor (dim {} in M_{})",
            e.coeff_algebra.dim(),
            e.coeff_algebra.ambient_dim,
            f.left_algebra.dim(),
            f.left_algebra.ambient_dim
        )));
    }
    let de = e.vec_dim;
    let df = f.vec_dim;
    let nc = f.coeff_dim();
    let idn = identity(nc);
    let mut gram = zeros(de * df * nc, de * df * nc);
    for i in 0..de {
        for k in 0..de {
            let phi = f.left_op(&e.gram_entry(i, k));
            let block = mul(&f.gram, &kron(&phi, &idn));
            gram.view_mut((i * df * nc, k * df * nc), (df * nc, df * nc)).copy_from(&block);
        }
    }
    let ide = identity(de);
    let idf = identity(df);
    let right = f.right_action.iter().map(|m| kron(&ide, m)).collect();
    let left = e.left_action.iter().map(|m| kron(m, &idf)).collect();
    let mut labels = Vec::with_capacity(de * df);
    for a in &e.basis_labels {
        for b in &f.basis_labels {
            labels.push(format!("{a}⊗{b}"));
        }
    }
    Ok((gram, right, left, labels))
}

/// Orthogonal direct sum of modules over the same algebras.
pub fn direct_sum(parts: &[Correspondence]) -> Result<Correspondence> {
    let first = parts.first().ok_or_else(|| Error::Argument("empty direct sum".into()))?;
    let n = first.coeff_dim();
    for p in parts {
        if !p.coeff_algebra.same_span(&first.coeff_algebra, 1e-8) || !p.left_algebra.same_span(&first.left_algebra, 1e-8) {
            return Err(Error::AlgebraMismatch("direct summands over different algebras".into()));
        }
    }
    let total: usize = parts.iter().map(|p| p.vec_dim).sum();
    let mut gram = zeros(total * n, total * n);
    let mut right = vec![zeros(total, total); first.right_action.len()];
    let mut left = vec![zeros(total, total); first.left_action.len()];
    let mut labels = Vec::with_capacity(total);
    let mut off = 0;
    for p in parts {
        let d = p.vec_dim;
        gram.view_mut((off * n, off * n), (d * n, d * n)).copy_from(&p.gram);
        for (k, b) in first.coeff_algebra.basis.iter().enumerate() {
            right[k].view_mut((off, off), (d, d)).copy_from(&p.right_op(b));
        }
        for (k, a) in first.left_algebra.basis.iter().enumerate() {
            left[k].view_mut((off, off), (d, d)).copy_from(&p.left_op(a));
        }
        labels.extend(p.basis_labels.iter().cloned());
        off += d;
    }
    Ok(Correspondence {
        left_algebra: first.left_algebra.clone(),
        coeff_algebra: first.coeff_algebra.clone(),
        vec_dim: total,
        basis_labels: labels,
        gram,
        right_action: right,
        left_action: left,
    })
}

/// A two-sided full Hilbert bimodule: `module` is the right `N`-module with
/// its left `M`-action, `left_gram` holds `M<x_i, x_j>` as blocks.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EquivalenceBimodule {
    pub module: Correspondence,
    #[serde(with = "crate::literal")]
    pub left_gram: ComplexMatrix,
}

impl EquivalenceBimodule {
    pub fn left_algebra(&self) -> &StarAlgebra {
        &self.module.left_algebra
    }

    pub fn right_algebra(&self) -> &StarAlgebra {
        &self.module.coeff_algebra
    }

    pub fn dim(&self) -> usize {
        self.module.vec_dim
    }

    pub fn left_gram_entry(&self, i: usize, j: usize) -> ComplexMatrix {
        let q = self.left_algebra().ambient_dim;
        self.left_gram.view((i * q, j * q), (q, q)).into_owned()
    }

    /// Build from a concrete module of `q x n` matrix tuples with
    /// `M<x, y> = Σ_t x_t y_t^*`.
    pub fn from_concrete(left: &StarAlgebra, right: &StarAlgebra, elements: &[Vec<ComplexMatrix>]) -> Result<Self> {
        let (module, basis) = Correspondence::from_concrete(left, right, elements)?;
        Ok(EquivalenceBimodule { module, left_gram: basis.left_gram() })
    }

    /// An algebra as an equivalence bimodule over itself.
    pub fn identity_bimodule(alg: &StarAlgebra) -> Self {
        let module = Correspondence::over_itself(alg);
        let n = alg.ambient_dim;
        let d = alg.dim();
        let mut left_gram = zeros(d * n, d * n);
        for (i, a) in alg.basis.iter().enumerate() {
            for (j, b) in alg.basis.iter().enumerate() {
                left_gram.view_mut((i * n, j * n), (n, n)).copy_from(&(a * b.adjoint()));
            }
        }
        EquivalenceBimodule { module, left_gram }
    }

    /// Column vectors `C^k` between `M_k` and `C`.
    pub fn column(k: usize) -> Self {
        let elements: Vec<Vec<ComplexMatrix>> = (0..k)
            .map(|i| {
                let mut x = zeros(k, 1);
                x[(i, 0)] = r(1.0);
                vec![x]
            })
            .collect();
        Self::from_concrete(&StarAlgebra::full(k), &StarAlgebra::scalars(1), &elements)
            .expect("column module is well formed")
    }

    /// Residuals for fullness of both inner products, the compatibility
    /// `M<x,y>·z = x·<y,z>_N`, and hermiticity/positivity of the left Gram.
    pub fn check(&self, _tol: f64) -> Residuals {
        let d = self.dim();
        let m_alg = self.left_algebra();
        let n_alg = self.right_algebra();
        let q = m_alg.ambient_dim;
        let n = n_alg.ambient_dim;
        let mut right_span = Vec::new();
        let mut left_span = Vec::new();
        for i in 0..d {
            for j in 0..d {
                right_span.push(vec_of(&self.module.gram_entry(i, j)));
                left_span.push(vec_of(&self.left_gram_entry(i, j)));
            }
        }
        let right_dim = span_dim(&right_span, n * n);
        let left_dim = span_dim(&left_span, q * q);
        let mut out = Residuals::new();
        out.push("right_fullness_deficit", n_alg.dim().saturating_sub(right_dim) as f64);
        out.push("left_fullness_deficit", m_alg.dim().saturating_sub(left_dim) as f64);

        let mut compat = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let lop = self.module.left_op(&self.left_gram_entry(i, j));
                for k in 0..d {
                    let lhs = lop.column(k).into_owned();
                    let rhs = self.module.right_op(&self.module.gram_entry(j, k)).column(i).into_owned();
                    compat = compat.max((lhs - rhs).norm());
                }
            }
        }
        out.push("compatibility", compat);
        out.push("left_gram_hermitian", operator_norm(&(&self.left_gram - self.left_gram.adjoint())));
        out.push("left_gram_positive", (-min_eigenvalue(&self.left_gram)).max(0.0));
        out
    }

    /// The dual `N,M`-bimodule `X̃` with `<x̃, ỹ>_M = M<x, y>`,
    /// `N<x̃, ỹ> = <x, y>_N`, `b·x̃ = (x b^*)~` and `x̃·a = (a^* x)~`.
    pub fn dual(&self) -> Self {
        let x = &self.module;
        let left_action = x
            .coeff_algebra
            .basis
            .iter()
            .map(|b| x.right_op(&b.adjoint()).map(|z| z.conj()))
            .collect();
        let right_action = x
            .left_algebra
            .basis
            .iter()
            .map(|a| x.left_op(&a.adjoint()).map(|z| z.conj()))
            .collect();
        let module = Correspondence {
            left_algebra: x.coeff_algebra.clone(),
            coeff_algebra: x.left_algebra.clone(),
            vec_dim: x.vec_dim,
            basis_labels: x.basis_labels.iter().map(|l| dual_label(l)).collect(),
            gram: self.left_gram.clone(),
            right_action,
            left_action,
        };
        EquivalenceBimodule { module, left_gram: x.gram.clone() }
    }
}

fn dual_label(l: &str) -> String {
    match l.strip_prefix('~') {
        Some(rest) => rest.to_string(),
        None => format!("~{l}"),
    }
}

fn span_dim(vectors: &[ComplexVector], len: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut m = zeros(len, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    numerical_rank(&m, 1e-9)
}

/// A linear map between modules, in coordinates.
#[derive(Clone, Debug)]
pub struct CorrespondenceMap {
    pub source: Correspondence,
    pub target: Correspondence,
    pub matrix: ComplexMatrix,
}

impl CorrespondenceMap {
    /// Residuals for inner-product preservation, surjectivity (rank deficit),
    /// and left/right module intertwining.
    pub fn check_isomorphism(&self, _tol: f64) -> Result<Residuals> {
        let w = &self.matrix;
        let (s, t) = (&self.source, &self.target);
        if w.shape() != (t.vec_dim, s.vec_dim) {
            return Err(Error::dim("correspondence map", format!("{}x{}", t.vec_dim, s.vec_dim), format!("{}x{}", w.nrows(), w.ncols())));
        }
        if s.coeff_dim() != t.coeff_dim() || !s.coeff_algebra.same_span(&t.coeff_algebra, 1e-8) {
            return Err(Error::AlgebraMismatch("source and target have different coefficient algebras".into()));
        }
        if !s.left_algebra.same_span(&t.left_algebra, 1e-8) {
            return Err(Error::AlgebraMismatch("source and target have different left algebras".into()));
        }
        let n = s.coeff_dim();
        let pulled = t.gram_along(w);
        let mut iso = 0.0f64;
        for i in 0..s.vec_dim {
            for j in 0..s.vec_dim {
                let diff = pulled.view((i * n, j * n), (n, n)) - s.gram.view((i * n, j * n), (n, n));
                iso = iso.max(operator_norm(&diff.into_owned()));
            }
        }
        let mut out = Residuals::new();
        out.push("isometry", iso);
        out.push("surjectivity_deficit", t.vec_dim.saturating_sub(numerical_rank(w, 1e-9)) as f64);
        let mut left = 0.0f64;
        for (ls, a) in s.left_action.iter().zip(&s.left_algebra.basis) {
            left = left.max(operator_norm(&(w * ls - t.left_op(a) * w)));
        }
        out.push("left_intertwining", left);
        let mut right = 0.0f64;
        for (rs, b) in s.right_action.iter().zip(&s.coeff_algebra.basis) {
            right = right.max(operator_norm(&(w * rs - t.right_op(b) * w)));
        }
        out.push("right_intertwining", right);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::real_matrix;
    use crate::instances::matrices_over_diagonal;

    #[test]
    fn scalars_satisfy_every_axiom() {
        let e = Correspondence::standard(1);
        assert!(e.check_axioms(1e-9).max() < 1e-14);
        assert!(Correspondence::standard(3).check_axioms(1e-9).max() < 1e-14);
    }

    #[test]
    fn negative_gram_is_reported() {
        let s = StarAlgebra::scalars(1);
        let e = Correspondence::new(s.clone(), s, real_matrix(1, 1, &[-1.0]), vec![identity(1)], vec![identity(1)]).unwrap();
        let res = e.check_axioms(1e-9);
        assert!((res.get("gram_positive").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(res.get("gram_hermitian"), Some(0.0));
    }

    #[test]
    fn algebra_over_itself_is_a_correspondence() {
        for alg in [StarAlgebra::full(2), StarAlgebra::block_diagonal(&[1, 2])] {
            let e = Correspondence::over_itself(&alg);
            assert!(e.check_axioms(1e-9).max() < 1e-12, "{}", e.check_axioms(1e-9));
        }
    }

    #[test]
    fn matrices_over_diagonal_tensor_dimensions() {
        for n in 2..=3 {
            let e = matrices_over_diagonal(n);
            assert!(e.check_axioms(1e-9).max() < 1e-12);
            let ee = internal_tensor(&e, &e).unwrap();
            // e_ij ⊗ e_kl survives iff j = k
            assert_eq!(ee.module.vec_dim, n * n * n);
            assert!(ee.module.check_axioms(1e-9).max() < 1e-10);
            let left = internal_tensor(&ee.module, &e).unwrap().module.vec_dim;
            let right = internal_tensor(&e, &ee.module).unwrap().module.vec_dim;
            assert_eq!(left, n.pow(4));
            assert_eq!(right, n.pow(4));
        }
    }

    #[test]
    fn tensor_with_mismatched_algebras_fails() {
        let e = matrices_over_diagonal(2);
        let f = Correspondence::standard(2);
        assert!(matches!(internal_tensor(&e, &f), Err(Error::AlgebraMismatch(_))));
    }

    #[test]
    fn separated_module_has_orthonormal_scalar_gram() {
        let e = matrices_over_diagonal(2);
        let q = internal_tensor(&e, &e).unwrap();
        let s = q.module.scalar_gram();
        assert!(operator_norm(&(s - identity(q.module.vec_dim))) < 1e-12);
    }

    #[test]
    fn column_bimodule_is_an_equivalence() {
        let x = EquivalenceBimodule::column(2);
        assert_eq!(x.dim(), 2);
        assert!(x.check(1e-9).max() < 1e-12, "{}", x.check(1e-9));
        assert!(x.module.check_axioms(1e-9).max() < 1e-12);
        let xt = x.dual();
        assert!(xt.check(1e-9).max() < 1e-12, "{}", xt.check(1e-9));
        assert!(xt.module.check_axioms(1e-9).max() < 1e-12, "{}", xt.module.check_axioms(1e-9));
        // X ⊗_C X̃ ≅ M_2 and X̃ ⊗_{M_2} X ≅ C
        assert_eq!(internal_tensor(&x.module, &xt.module).unwrap().module.vec_dim, 4);
        assert_eq!(internal_tensor(&xt.module, &x.module).unwrap().module.vec_dim, 1);
        let back = xt.dual();
        assert!(operator_norm(&(back.module.gram - &x.module.gram)) < 1e-14);
        assert_eq!(back.module.basis_labels, x.module.basis_labels);
    }

    #[test]
    fn partial_column_is_not_left_full() {
        let e1 = real_matrix(2, 1, &[1.0, 0.0]);
        let x = EquivalenceBimodule::from_concrete(&StarAlgebra::full(2), &StarAlgebra::scalars(1), &[vec![e1]]).unwrap();
        let res = x.check(1e-9);
        assert_eq!(res.get("left_fullness_deficit"), Some(3.0));
        assert_eq!(res.get("right_fullness_deficit"), Some(0.0));
    }

    #[test]
    fn scaled_identity_map_has_isometry_defect() {
        let e = Correspondence::standard(2);
        let w = CorrespondenceMap { source: e.clone(), target: e.clone(), matrix: identity(2) * r(2.0) };
        let res = w.check_isomorphism(1e-9).unwrap();
        assert!((res.get("isometry").unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(res.get("left_intertwining"), Some(0.0));
        let id = CorrespondenceMap { source: e.clone(), target: e, matrix: identity(2) };
        assert!(id.check_isomorphism(1e-9).unwrap().max() == 0.0);
    }

    #[test]
    fn tensor_with_algebra_is_trivial() {
        let e = matrices_over_diagonal(2);
        let d = Correspondence::over_itself(&e.coeff_algebra);
        let ed = internal_tensor(&e, &d).unwrap();
        assert_eq!(ed.module.vec_dim, e.vec_dim);
        let de = internal_tensor(&Correspondence::over_itself(&e.left_algebra), &e).unwrap();
        assert_eq!(de.module.vec_dim, e.vec_dim);
    }

    #[test]
    fn serde_round_trip() {
        let x = EquivalenceBimodule::column(2);
        let text = serde_json::to_string(&x).unwrap();
        let back: EquivalenceBimodule = serde_json::from_str(&text).unwrap();
        assert_eq!(back.module.gram, x.module.gram);
        assert_eq!(back.left_gram, x.left_gram);
    }
}
