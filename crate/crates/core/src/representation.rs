//! Representations of coefficient algebras, induced representations,
//! intertwiner spaces `E^σ`, covariant pairs and their integrated forms on
//! tensor-algebra polynomials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    c, commutant_of_set, id_kron_mul, identity, kron, kron_mul, mul, nullspace, operator_norm, unvec, zeros, ComplexMatrix, ComplexVector,
    StarAlgebra,
};
use crate::correspondence::{internal_tensor, Correspondence, Quotient};
use crate::error::{Error, Result};
use crate::fock::{TensorPolynomial, TruncatedFock};
use crate::report::Residuals;

/// Ball membership slack for `‖T̃‖ ≤ 1`.
pub const BALL_TOL: f64 = 1e-9;

/// A *-representation given on the algebra basis and extended linearly.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Representation {
    pub algebra: StarAlgebra,
    pub space_dim: usize,
    #[serde(with = "crate::literal::matrices")]
    pub images: Vec<ComplexMatrix>,
}

impl Representation {
    pub fn new(algebra: StarAlgebra, images: Vec<ComplexMatrix>) -> Result<Self> {
        if images.len() != algebra.dim() {
            return Err(Error::dim("representation images", algebra.dim(), images.len()));
        }
        let h = images.first().map_or(0, |m| m.nrows());
        for m in &images {
            if m.shape() != (h, h) {
                return Err(Error::dim("representation image", format!("{h}x{h}"), format!("{}x{}", m.nrows(), m.ncols())));
            }
        }
        Ok(Representation { algebra, space_dim: h, images })
    }

    /// The defining representation of a concrete algebra.
    pub fn identity(algebra: &StarAlgebra) -> Self {
        Representation { algebra: algebra.clone(), space_dim: algebra.ambient_dim, images: algebra.basis.clone() }
    }

    /// The scalars acting on `C^n`.
    pub fn scalar(n: usize) -> Self {
        Representation { algebra: StarAlgebra::scalars(1), space_dim: n, images: vec![identity(n)] }
    }

    /// `a ↦ a ⊗ I_k`.
    pub fn amplify(&self, k: usize) -> Self {
        let id = identity(k);
        Representation {
            algebra: self.algebra.clone(),
            space_dim: self.space_dim * k,
            images: self.images.iter().map(|m| kron(m, &id)).collect(),
        }
    }

    /// `a ↦ u σ(a) u^*`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Self {
        Representation {
            algebra: self.algebra.clone(),
            space_dim: self.space_dim,
            images: self.images.iter().map(|m| u * m * u.adjoint()).collect(),
        }
    }

    pub fn image(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let coords = self.algebra.coords(a);
        let mut out = zeros(self.space_dim, self.space_dim);
        for (m, w) in self.images.iter().zip(coords.iter()) {
            out += m * *w;
        }
        out
    }

    /// Residuals for multiplicativity, *-preservation and unitality.
    pub fn check(&self) -> Residuals {
        let mut mult = 0.0f64;
        let mut star = 0.0f64;
        for (ia, a) in self.images.iter().zip(&self.algebra.basis) {
            star = star.max(operator_norm(&(self.image(&a.adjoint()) - ia.adjoint())));
            for (ib, b) in self.images.iter().zip(&self.algebra.basis) {
                mult = mult.max(operator_norm(&(self.image(&(a * b)) - ia * ib)));
            }
        }
        let unit = operator_norm(&(self.image(&identity(self.algebra.ambient_dim)) - identity(self.space_dim)));
        Residuals::new().with("multiplicative", mult).with("star", star).with("unital", unit)
    }

    /// The commutant `σ(M)'` in `B(H)`.
    pub fn commutant(&self) -> StarAlgebra {
        commutant_of_set(self.space_dim, &constraint_elements(&self.algebra, |a| self.image(a)))
    }

    /// `H` as a module over `C` with the left action `σ`.
    pub fn as_module(&self) -> Correspondence {
        let h = self.space_dim;
        Correspondence {
            left_algebra: self.algebra.clone(),
            coeff_algebra: StarAlgebra::scalars(1),
            vec_dim: h,
            basis_labels: (0..h).map(|i| format!("h{i}")).collect(),
            gram: identity(h),
            right_action: vec![identity(h)],
            left_action: self.images.clone(),
        }
    }
}

/// Images of a generating family: the whole basis for small algebras,
/// otherwise a few fixed pseudo-random elements and their adjoints.
fn constraint_elements(alg: &StarAlgebra, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Vec<ComplexMatrix> {
    if alg.dim() <= 8 {
        let mut out: Vec<ComplexMatrix> = alg.basis.iter().map(&f).collect();
        out.extend(alg.basis.iter().map(|a| f(&a.adjoint())));
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for _ in 0..3 {
        let coords = ComplexVector::from_fn(alg.dim(), |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let a = alg.element(&coords);
        out.push(f(&a));
        out.push(f(&a.adjoint()));
    }
    out
}

/// `X ⊗_σ H` as a quotient of the algebraic tensor product, indexed
/// `i * dim H + k` for `ξ_i ⊗ h_k`. Its left action is the induced
/// representation.
#[derive(Clone, Debug)]
pub struct InducedSpace {
    pub module: Correspondence,
    pub rep: Representation,
    pub quotient: Quotient,
}

impl InducedSpace {
    pub fn dim(&self) -> usize {
        self.quotient.module.vec_dim
    }

    /// `r x (d·h)`: `ξ_i ⊗ h_k` ↦ quotient coordinates.
    pub fn factor(&self) -> &ComplexMatrix {
        &self.quotient.project
    }

    pub fn expand(&self) -> &ComplexMatrix {
        &self.quotient.expand
    }

    /// `T ⊗ I_H` for an operator `T` on the module (given in coordinates).
    pub fn lift_module_operator(&self, t: &ComplexMatrix) -> ComplexMatrix {
        mul(self.factor(), &kron_mul(t, self.rep.space_dim, self.expand()))
    }

    /// `I_X ⊗ b` for `b` in the commutant of `σ`.
    pub fn lift_commutant(&self, b: &ComplexMatrix) -> ComplexMatrix {
        mul(self.factor(), &id_kron_mul(self.module.vec_dim, b, self.expand()))
    }

    /// `φ(a) ⊗ I_H` for `a` in the left algebra.
    pub fn left(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.quotient.module.left_op(a)
    }

    pub fn induced_representation(&self) -> Representation {
        Representation {
            algebra: self.module.left_algebra.clone(),
            space_dim: self.dim(),
            images: self.quotient.module.left_action.clone(),
        }
    }

    /// Residual of `factor^* factor = scalar Gram of ξ_i ⊗ h_k`.
    pub fn check(&self) -> Residuals {
        let gram = self.algebraic_gram();
        let p = self.factor();
        let rank_deficit = p.nrows().saturating_sub(crate::algebra::numerical_rank(p, 1e-10));
        Residuals::new()
            .with("factor_gram", operator_norm(&(p.adjoint() * p - gram)))
            .with("factor_rank_deficit", rank_deficit as f64)
    }

    /// `<ξ_i ⊗ h_k, ξ_j ⊗ h_l> = <h_k, σ(<ξ_i, ξ_j>) h_l>`, computed directly.
    pub fn algebraic_gram(&self) -> ComplexMatrix {
        let d = self.module.vec_dim;
        let h = self.rep.space_dim;
        let mut g = zeros(d * h, d * h);
        for i in 0..d {
            for j in 0..d {
                let s = self.rep.image(&self.module.gram_entry(i, j));
                g.view_mut((i * h, j * h), (h, h)).copy_from(&s);
            }
        }
        g
    }
}

pub fn induce_space(x: &Correspondence, sigma: &Representation) -> Result<InducedSpace> {
    let quotient = internal_tensor(x, &sigma.as_module())?;
    Ok(InducedSpace { module: x.clone(), rep: sigma.clone(), quotient })
}

pub fn induce_representation(x: &Correspondence, sigma: &Representation) -> Result<Representation> {
    Ok(induce_space(x, sigma)?.induced_representation())
}

/// The intertwiner space `E^σ = {z : H → E⊗_σH | z σ(a) = (φ(a)⊗I) z}`,
/// a correspondence over `σ(M)'` with `<z, w> = z^* w` and
/// `a·z·b = (I⊗a) z b`.
#[derive(Clone, Debug)]
pub struct SigmaDual {
    pub induced: InducedSpace,
    /// Hilbert–Schmidt orthonormal basis of `(dim E⊗_σH) x (dim H)` matrices.
    pub basis: Vec<ComplexMatrix>,
    pub commutant: StarAlgebra,
}

pub fn sigma_dual(e: &Correspondence, sigma: &Representation) -> Result<SigmaDual> {
    let induced = induce_space(e, sigma)?;
    let m = induced.dim();
    let h = sigma.space_dim;
    let alg = &e.left_algebra;
    let pairs = constraint_elements(alg, |a| a.clone());
    let id_m = identity(m);
    let id_h = identity(h);
    let mut blocks = Vec::with_capacity(pairs.len());
    for a in &pairs {
        // vec(z σ(a) − L_a z) = (σ(a)^T ⊗ I − I ⊗ L_a) vec z
        blocks.push(kron(&sigma.image(a).transpose(), &id_m) - kron(&id_h, &induced.left(a)));
    }
    let rows = m * h;
    let mut stacked = zeros(rows * blocks.len().max(1), rows);
    for (k, b) in blocks.iter().enumerate() {
        stacked.view_mut((k * rows, 0), (rows, rows)).copy_from(b);
    }
    let null = if rows == 0 { zeros(0, 0) } else { nullspace(&stacked, 1e-9) };
    let basis = (0..null.ncols()).map(|j| unvec(&null.column(j).into_owned(), m, h)).collect();
    let commutant = sigma.commutant();
    Ok(SigmaDual { induced, basis, commutant })
}

impl SigmaDual {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn point(&self, coords: &ComplexVector) -> ComplexMatrix {
        let (m, h) = (self.induced.dim(), self.induced.rep.space_dim);
        let mut z = zeros(m, h);
        for (b, w) in self.basis.iter().zip(coords.iter()) {
            z += b * *w;
        }
        z
    }

    /// Distance of `z` from the span of the basis (Hilbert–Schmidt).
    pub fn residual(&self, z: &ComplexMatrix) -> f64 {
        let coords = ComplexVector::from_iterator(self.dim(), self.basis.iter().map(|b| crate::algebra::hs_inner(b, z)));
        crate::algebra::frobenius_norm(&(z - self.point(&coords)))
    }

    pub fn check(&self) -> Residuals {
        let sigma = &self.induced.rep;
        let alg = &self.induced.module.left_algebra;
        let mut inter = 0.0f64;
        let mut inner = 0.0f64;
        let mut actions = 0.0f64;
        for z in &self.basis {
            for a in &alg.basis {
                inter = inter.max(operator_norm(&(z * sigma.image(a) - self.induced.left(a) * z)));
            }
            for w in &self.basis {
                inner = inner.max(self.commutant.residual(&(z.adjoint() * w)));
            }
            for a in &self.commutant.basis {
                let lifted = self.induced.lift_commutant(a);
                actions = actions.max(self.residual(&(&lifted * z))).max(self.residual(&(z * a)));
            }
        }
        Residuals::new()
            .with("intertwining", inter)
            .with("inner_in_commutant", inner)
            .with("actions_in_span", actions)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallPosition {
    Interior,
    Boundary,
    Outside,
}

/// A representation `σ` and a contraction `T̃ : E ⊗_σ H → H` intertwining
/// `φ ⊗ I` with `σ`. `T̃ = z^*` for a point `z` of the dual ball.
#[derive(Clone, Debug)]
pub struct CovariantPair {
    pub induced: InducedSpace,
    pub intertwiner: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct CovariantReport {
    pub residuals: Residuals,
    pub norm: f64,
    pub position: BallPosition,
}

impl CovariantPair {
    /// `e` should be separated (orthonormal); the intertwiner acts on
    /// `induce_space(e, sigma)`.
    pub fn new(e: &Correspondence, sigma: &Representation, intertwiner: ComplexMatrix) -> Result<Self> {
        let induced = induce_space(e, sigma)?;
        if intertwiner.shape() != (sigma.space_dim, induced.dim()) {
            return Err(Error::dim(
                "intertwiner",
                format!("{}x{}", sigma.space_dim, induced.dim()),
                format!("{}x{}", intertwiner.nrows(), intertwiner.ncols()),
            ));
        }
        Ok(CovariantPair { induced, intertwiner })
    }

    /// The pair whose intertwiner is `z^*` for a point `z` of `E^σ`.
    pub fn from_point(dual: &SigmaDual, z: &ComplexMatrix) -> Self {
        CovariantPair { induced: dual.induced.clone(), intertwiner: z.adjoint() }
    }

    pub fn rep(&self) -> &Representation {
        &self.induced.rep
    }

    pub fn module(&self) -> &Correspondence {
        &self.induced.module
    }

    pub fn check(&self) -> CovariantReport {
        let t = &self.intertwiner;
        let norm = operator_norm(t);
        let mut inter = 0.0f64;
        for a in &self.module().left_algebra.basis {
            inter = inter.max(operator_norm(&(t * self.induced.left(a) - self.rep().image(a) * t)));
        }
        let position = if norm <= 1.0 - BALL_TOL {
            BallPosition::Interior
        } else if norm <= 1.0 + BALL_TOL {
            BallPosition::Boundary
        } else {
            BallPosition::Outside
        };
        CovariantReport {
            residuals: Residuals::new().with("norm_excess", (norm - 1.0).max(0.0)).with("intertwining", inter),
            norm,
            position,
        }
    }

    /// The bimodule map `ξ ↦ T(ξ) = T̃(ξ ⊗ ·)` on the module basis.
    pub fn bimodule_map(&self) -> Vec<ComplexMatrix> {
        let h = self.rep().space_dim;
        let full = &self.intertwiner * self.induced.factor();
        (0..self.module().vec_dim).map(|i| full.columns(i * h, h).into_owned()).collect()
    }

    /// Generalised intertwiners `T̃_k : E^{⊗k} ⊗_σ H → H` for `k ≤ level`.
    pub fn generalized(&self, level: usize) -> Result<GeneralizedIntertwiners> {
        let fock = TruncatedFock::new(self.module(), level)?;
        let sigma = self.rep();
        let h = sigma.space_dim;
        let d = fock.base.vec_dim;
        let mut spaces: Vec<InducedSpace> = Vec::with_capacity(level + 1);
        let mut maps: Vec<ComplexMatrix> = Vec::with_capacity(level + 1);
        // level 0: M ⊗_σ H ≅ H via a ⊗ h ↦ σ(a) h
        let s0 = induce_space(&fock.levels[0], sigma)?;
        let mut alg_map = zeros(h, fock.levels[0].vec_dim * h);
        for j in 0..fock.levels[0].vec_dim {
            alg_map.view_mut((0, j * h), (h, h)).copy_from(&sigma.image(&fock.level0_element(j)));
        }
        maps.push(alg_map * s0.expand());
        spaces.push(s0);
        if level >= 1 {
            let s1 = induce_space(&fock.levels[1], sigma)?;
            if s1.dim() != self.induced.dim() {
                return Err(Error::dim("E ⊗_σ H", self.induced.dim(), s1.dim()));
            }
            // transport T̃ to the basis built from the separated module
            let change = self.induced.factor() * kron(&self.module().separated().expand, &identity(h)) * s1.expand();
            maps.push(&self.intertwiner * change);
            spaces.push(s1);
        }
        for k in 2..=level {
            let sk = induce_space(&fock.levels[k], sigma)?;
            let q = fock.factors[k].as_ref().expect("built level");
            let prev = &spaces[k - 1];
            let inner = &maps[k - 1] * prev.factor();
            let e_h = &spaces[1];
            let map = &maps[1] * e_h.factor() * kron(&identity(d), &inner) * kron(&q.expand, &identity(h)) * sk.expand();
            maps.push(map);
            spaces.push(sk);
        }
        Ok(GeneralizedIntertwiners { fock, spaces, maps })
    }

    /// `ρ(p) = σ(a_0) + Σ_k T̃_k (η_k ⊗ ·)`.
    pub fn integrated_form(&self, p: &TensorPolynomial) -> Result<ComplexMatrix> {
        self.generalized(p.degree())?.evaluate(p)
    }
}

/// Rebuild `T̃` from a bimodule map given on the module basis.
pub fn intertwiner_from_map(induced: &InducedSpace, map: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let h = induced.rep.space_dim;
    let d = induced.module.vec_dim;
    if map.len() != d {
        return Err(Error::dim("bimodule map", d, map.len()));
    }
    let mut a = zeros(h, d * h);
    for (i, t) in map.iter().enumerate() {
        a.view_mut((0, i * h), (h, h)).copy_from(t);
    }
    Ok(a * induced.expand())
}

#[derive(Clone, Debug)]
pub struct GeneralizedIntertwiners {
    pub fock: TruncatedFock,
    /// `spaces[k] = E^{⊗k} ⊗_σ H`.
    pub spaces: Vec<InducedSpace>,
    /// `maps[k] = T̃_k`, with `T̃_0` the identification `M ⊗_σ H ≅ H`.
    pub maps: Vec<ComplexMatrix>,
}

impl GeneralizedIntertwiners {
    pub fn level(&self) -> usize {
        self.maps.len() - 1
    }

    /// `T̃_k (η ⊗ ·) : H → H` for `η` in level-`k` coordinates.
    pub fn creation_image(&self, k: usize, eta: &ComplexVector) -> Result<ComplexMatrix> {
        if k > self.level() {
            return Err(Error::Argument(format!("level {k} exceeds the available {}", self.level())));
        }
        let h = self.spaces[k].rep.space_dim;
        if eta.len() != self.fock.levels[k].vec_dim {
            return Err(Error::dim(format!("vector at level {k}"), self.fock.levels[k].vec_dim, eta.len()));
        }
        let col = ComplexMatrix::from_column_slice(eta.len(), 1, eta.as_slice());
        Ok(&self.maps[k] * self.spaces[k].factor() * kron(&col, &identity(h)))
    }

    pub fn evaluate(&self, p: &TensorPolynomial) -> Result<ComplexMatrix> {
        let sigma = &self.spaces[0].rep;
        let mut out = match &p.constant {
            Some(a) => sigma.image(a),
            None => zeros(sigma.space_dim, sigma.space_dim),
        };
        for (k, eta) in &p.terms {
            out += self.creation_image(*k, eta)?;
        }
        Ok(out)
    }
}
