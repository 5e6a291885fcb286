//! Truncated Fock spaces `M ⊕ E ⊕ E⊗E ⊕ ... ⊕ E^{⊗N}`, creation operators,
//! tensor-algebra polynomials and the right shift `ℱ(F)⊗F → ℱ(F)`.
//!
//! Every level carries a basis that is orthonormal for `τ(<·,·>)`, so
//! adjointable operators are plain matrices, adjoints are conjugate
//! transposes and operator norms are spectral norms. Creation operators
//! send the top level to zero, i.e. every operator is the compression of
//! the untruncated one to levels `0..=N`.

use crate::algebra::{identity, kron, mul, operator_norm, zeros, ComplexMatrix, ComplexVector, StarAlgebra};
use crate::correspondence::{direct_sum, internal_tensor, Correspondence, CorrespondenceMap, Quotient};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TruncatedFock {
    /// The generating correspondence in its separated, orthonormal form
    /// (equal to `levels[1]` when `level_cap ≥ 1`).
    pub base: Correspondence,
    pub level_cap: usize,
    pub levels: Vec<Correspondence>,
    /// For `k ≥ 2`: `levels[k]` as a quotient of `base ⊗ levels[k-1]`.
    /// Entries 0 and 1 are unused placeholders.
    pub factors: Vec<Option<Quotient>>,
    /// `levels[0]` as a quotient of the algebra's own basis.
    pub algebra_quotient: Quotient,
    pub level_offsets: Vec<usize>,
    pub total_dim: usize,
}

impl TruncatedFock {
    pub fn new(e: &Correspondence, level_cap: usize) -> Result<Self> {
        if !e.is_correspondence() {
            return Err(Error::AlgebraMismatch("Fock space needs a correspondence over one algebra".into()));
        }
        let base = e.separated().module;
        let algebra_quotient = Correspondence::over_itself(&base.coeff_algebra).separated();
        let mut levels = vec![algebra_quotient.module.clone()];
        let mut factors = vec![None];
        if level_cap >= 1 {
            levels.push(base.clone());
            factors.push(None);
        }
        for _ in 2..=level_cap {
            let q = internal_tensor(&base, levels.last().expect("nonempty"))?;
            levels.push(q.module.clone());
            factors.push(Some(q));
        }
        let mut level_offsets = Vec::with_capacity(levels.len() + 1);
        let mut off = 0;
        for l in &levels {
            level_offsets.push(off);
            off += l.vec_dim;
        }
        level_offsets.push(off);
        Ok(TruncatedFock { base, level_cap, levels, factors, algebra_quotient, level_offsets, total_dim: off })
    }

    pub fn algebra(&self) -> &StarAlgebra {
        &self.base.coeff_algebra
    }

    pub fn level_dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.vec_dim).collect()
    }

    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        self.level_offsets[k]..self.level_offsets[k + 1]
    }

    /// Orthogonal projection onto the levels in `range`.
    pub fn levels_projection(&self, range: std::ops::RangeInclusive<usize>) -> ComplexMatrix {
        let mut p = zeros(self.total_dim, self.total_dim);
        for k in range.filter(|&k| k <= self.level_cap) {
            for i in self.level_range(k) {
                p[(i, i)] = crate::algebra::r(1.0);
            }
        }
        p
    }

    /// Projection onto levels `1..=N` (the complement of the algebra).
    pub fn p0(&self) -> ComplexMatrix {
        self.levels_projection(1..=self.level_cap)
    }

    /// The whole truncated Fock space as a single correspondence.
    pub fn as_module(&self) -> Correspondence {
        direct_sum(&self.levels).expect("levels share their algebras")
    }

    fn check_vector(&self, level: usize, v: &ComplexVector) -> Result<()> {
        if level > self.level_cap {
            return Err(Error::Argument(format!("level {level} exceeds the cap {}", self.level_cap)));
        }
        if v.len() != self.levels[level].vec_dim {
            return Err(Error::dim(format!("vector at level {level}"), self.levels[level].vec_dim, v.len()));
        }
        Ok(())
    }

    /// `T_ξ` for `ξ` in level-1 coordinates.
    fn shift_by(&self, xi: &ComplexVector) -> ComplexMatrix {
        let mut t = zeros(self.total_dim, self.total_dim);
        if self.level_cap == 0 {
            return t;
        }
        // level 0 → 1: a ↦ ξ·a
        let r1 = self.level_range(1);
        for j in 0..self.levels[0].vec_dim {
            let a = self.level0_element(j);
            let col = self.base.right_op(&a) * xi;
            t.view_mut((r1.start, j), (r1.len(), 1)).copy_from(&col);
        }
        let xi_col = ComplexMatrix::from_column_slice(xi.len(), 1, xi.as_slice());
        for k in 1..self.level_cap {
            let q = self.factors[k + 1].as_ref().expect("built level");
            let rk = self.levels[k].vec_dim;
            let block = &q.project * kron(&xi_col, &identity(rk));
            let (src, dst) = (self.level_range(k), self.level_range(k + 1));
            t.view_mut((dst.start, src.start), (dst.len(), src.len())).copy_from(&block);
        }
        t
    }

    /// Generalised creation operator `η ↦ ξ ⊗ η` for `ξ` in level `m ≥ 1`.
    pub fn creation_operator(&self, level: usize, xi: &ComplexVector) -> Result<ComplexMatrix> {
        if level == 0 {
            return Err(Error::Argument("level-0 coefficients act through phi_infty".into()));
        }
        self.check_vector(level, xi)?;
        Ok(self.creation_unchecked(level, xi))
    }

    fn creation_unchecked(&self, level: usize, xi: &ComplexVector) -> ComplexMatrix {
        if level == 1 {
            return self.shift_by(xi);
        }
        // ξ = Σ_i e_i ⊗ ξ_i with ξ_i in level m-1, read off a representative
        let q = self.factors[level].as_ref().expect("built level");
        let rep = &q.expand * xi;
        let d = self.base.vec_dim;
        let rprev = self.levels[level - 1].vec_dim;
        let mut out = zeros(self.total_dim, self.total_dim);
        for i in 0..d {
            let part = rep.rows(i * rprev, rprev).into_owned();
            if part.norm() == 0.0 {
                continue;
            }
            let mut e = ComplexVector::zeros(d);
            e[i] = crate::algebra::r(1.0);
            out += self.shift_by(&e) * self.creation_unchecked(level - 1, &part);
        }
        out
    }

    /// Block-diagonal left action of the coefficient algebra.
    pub fn phi_infty(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = zeros(self.total_dim, self.total_dim);
        for (k, l) in self.levels.iter().enumerate() {
            let off = self.level_offsets[k];
            out.view_mut((off, off), (l.vec_dim, l.vec_dim)).copy_from(&l.left_op(a));
        }
        out
    }

    /// Coordinates of `ξ ⊗ η` for `ξ` in level `m1` and `η` in level `m2`.
    pub fn tensor_vectors(&self, m1: usize, xi: &ComplexVector, m2: usize, eta: &ComplexVector) -> Result<ComplexVector> {
        self.check_vector(m2, eta)?;
        if m1 + m2 > self.level_cap {
            return Err(Error::Argument(format!("level {} exceeds the cap {}", m1 + m2, self.level_cap)));
        }
        let op = if m1 == 0 {
            let a = self.algebra().element(&(&self.algebra_quotient.expand * xi));
            self.phi_infty(&a)
        } else {
            self.creation_operator(m1, xi)?
        };
        let mut full = ComplexVector::zeros(self.total_dim);
        full.rows_mut(self.level_offsets[m2], eta.len()).copy_from(eta);
        let image = op * full;
        Ok(image.rows(self.level_offsets[m1 + m2], self.levels[m1 + m2].vec_dim).into_owned())
    }

    /// Level-0 coordinates of an algebra element.
    pub fn algebra_vector(&self, a: &ComplexMatrix) -> ComplexVector {
        &self.algebra_quotient.project * self.algebra().coords(a)
    }

    /// The level-0 basis vector `j` as an algebra element.
    pub fn level0_element(&self, j: usize) -> ComplexMatrix {
        self.algebra().element(&self.algebra_quotient.expand.column(j).into_owned())
    }

    pub fn polynomial_to_operator(&self, p: &TensorPolynomial) -> Result<ComplexMatrix> {
        let mut out = match &p.constant {
            Some(a) => {
                let n = self.algebra().ambient_dim;
                if a.shape() != (n, n) {
                    return Err(Error::dim("constant term", format!("{n}x{n}"), format!("{}x{}", a.nrows(), a.ncols())));
                }
                self.phi_infty(a)
            }
            None => zeros(self.total_dim, self.total_dim),
        };
        for (level, v) in &p.terms {
            out += self.creation_operator(*level, v)?;
        }
        Ok(out)
    }

    /// The right shift `R: ℱ(F) ⊗_N F → ℱ(F)`, `ξ ⊗ f ↦ ξ ⊗ f`, with the
    /// top level tensor `F` sent to zero.
    pub fn right_shift(&self) -> Result<RightShift> {
        if self.level_cap == 0 {
            return Err(Error::Argument("right shift needs at least one tensor level".into()));
        }
        let fock = self.as_module();
        let domain = internal_tensor(&fock, &self.base)?;
        let d = self.base.vec_dim;
        // identifications level_k ⊗ F → level_{k+1} on algebraic tensors
        let mut level_maps: Vec<ComplexMatrix> = Vec::with_capacity(self.level_cap);
        let r0 = self.levels[0].vec_dim;
        let mut q0 = zeros(d, r0 * d);
        for j in 0..r0 {
            let a = self.level0_element(j);
            let la = self.base.left_op(&a);
            for al in 0..d {
                q0.set_column(j * d + al, &la.column(al));
            }
        }
        level_maps.push(q0);
        for k in 1..self.level_cap {
            let next = self.factors[k + 1].as_ref().expect("built level");
            let map = if k == 1 {
                next.project.clone()
            } else {
                let this = self.factors[k].as_ref().expect("built level");
                mul(&next.project, &mul(&kron(&identity(d), &level_maps[k - 1]), &kron(&this.expand, &identity(d))))
            };
            level_maps.push(map);
        }
        let mut alg_map = zeros(self.total_dim, self.total_dim * d);
        for (k, map) in level_maps.iter().enumerate() {
            let src = self.level_range(k);
            let dst = self.level_range(k + 1);
            alg_map
                .view_mut((dst.start, src.start * d), (dst.len(), src.len() * d))
                .copy_from(map);
        }
        let matrix = mul(&alg_map, &domain.expand);
        Ok(RightShift {
            map: CorrespondenceMap { source: domain.module.clone(), target: fock, matrix },
            domain,
            level_maps,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RightShift {
    pub map: CorrespondenceMap,
    /// `ℱ(F) ⊗_N F` as a quotient of the algebraic tensor product.
    pub domain: Quotient,
    /// `level_maps[k]`: algebraic `level_k ⊗ F` → `level_{k+1}`.
    pub level_maps: Vec<ComplexMatrix>,
}

impl RightShift {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.map.matrix
    }

    /// Fock level of each domain basis vector (`level_k ⊗ F` has level `k`).
    pub fn domain_levels(&self, fock: &TruncatedFock) -> Vec<usize> {
        let d = fock.base.vec_dim;
        let b = &self.domain.expand;
        (0..b.ncols())
            .map(|col| {
                let row = (0..b.nrows())
                    .max_by(|&x, &y| b[(x, col)].norm().total_cmp(&b[(y, col)].norm()))
                    .expect("nonempty domain");
                let x = row / d;
                (0..=fock.level_cap).find(|&k| fock.level_range(k).contains(&x)).expect("index within Fock space")
            })
            .collect()
    }

    /// Projection of the domain onto `level_k ⊗ F` for `k < N`.
    pub fn subcap_projection(&self, fock: &TruncatedFock) -> ComplexMatrix {
        let levels = self.domain_levels(fock);
        let mut p = zeros(levels.len(), levels.len());
        for (i, k) in levels.iter().enumerate() {
            if *k < fock.level_cap {
                p[(i, i)] = crate::algebra::r(1.0);
            }
        }
        p
    }
}

/// `a_0 + Σ_k T_{η_k}` with at most one term per level.
#[derive(Clone, Debug, Default)]
pub struct TensorPolynomial {
    pub constant: Option<ComplexMatrix>,
    pub terms: Vec<(usize, ComplexVector)>,
}

impl TensorPolynomial {
    pub fn new(constant: Option<ComplexMatrix>, terms: Vec<(usize, ComplexVector)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for (level, _) in &terms {
            if *level == 0 {
                return Err(Error::Argument("level-0 term belongs in the constant".into()));
            }
            if !seen.insert(*level) {
                return Err(Error::Argument(format!("two terms at level {level}")));
            }
        }
        Ok(TensorPolynomial { constant, terms })
    }

    /// A scalar polynomial `Σ c_k z^k` over `E = C`.
    pub fn scalar(coeffs: &[crate::algebra::C64]) -> Self {
        let constant = coeffs.first().map(|c0| ComplexMatrix::from_element(1, 1, *c0));
        let terms = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, c)| (k, ComplexVector::from_element(1, *c)))
            .collect();
        TensorPolynomial { constant, terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(k, _)| *k).max().unwrap_or(0)
    }
}

/// Operator norm of the polynomial compressed to levels `0..=level_cap`.
pub fn fock_norm(e: &Correspondence, p: &TensorPolynomial, level_cap: usize) -> Result<f64> {
    let fock = TruncatedFock::new(e, level_cap)?;
    Ok(operator_norm(&fock.polynomial_to_operator(p)?))
}
