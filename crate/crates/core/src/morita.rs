//! Morita contexts `(E, M) ~ (F, N)` via an equivalence bimodule `X` and an
//! isomorphism `W: E ⊗_M X → X ⊗_N F`, the transform of covariant
//! representations along such a context, the canonical stabilization
//! `(P₀𝒦(ℱ(F)), 𝒦(ℱ(F)))` and reconstruction operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{
    c, commutant_of_set, id_kron_mul, identity, kron, kron_mul, mul, numerical_rank, operator_norm, zeros, ComplexMatrix, ComplexVector,
    StarAlgebra,
};
use crate::correspondence::{internal_tensor, Correspondence, CorrespondenceMap, EquivalenceBimodule, Quotient};
use crate::error::{Error, Result};
use crate::fock::{RightShift, TruncatedFock};
use crate::report::Residuals;
use crate::representation::{induce_space, sigma_dual, CovariantPair, InducedSpace, Representation};

#[derive(Clone, Debug)]
pub struct MoritaContext {
    /// Correspondence over `M` (separated).
    pub e: Correspondence,
    /// Correspondence over `N` (separated).
    pub f: Correspondence,
    /// Equivalence `M,N`-bimodule.
    pub x: EquivalenceBimodule,
    /// `E ⊗_M X`.
    pub ex: Quotient,
    /// `X ⊗_N F`.
    pub xf: Quotient,
    /// `W` in the coordinates of `ex` and `xf`.
    pub w: ComplexMatrix,
}

impl MoritaContext {
    /// Assemble a context from a map on algebraic tensors
    /// (`e_i ⊗ x_j` ↦ combination of `x_k ⊗ f_l`).
    pub fn from_algebraic_map(
        e: Correspondence,
        f: Correspondence,
        x: EquivalenceBimodule,
        w_alg: &ComplexMatrix,
    ) -> Result<Self> {
        let ex = internal_tensor(&e, &x.module)?;
        let xf = internal_tensor(&x.module, &f)?;
        let expect = (x.dim() * f.vec_dim, e.vec_dim * x.dim());
        if w_alg.shape() != expect {
            return Err(Error::dim("algebraic W", format!("{}x{}", expect.0, expect.1), format!("{}x{}", w_alg.nrows(), w_alg.ncols())));
        }
        let w = &xf.project * w_alg * &ex.expand;
        Ok(MoritaContext { e, f, x, ex, xf, w })
    }

    /// `X = N` over itself and `E = F`, with `ξ ⊗ a ↦ 1 ⊗ ξa`.
    pub fn trivial(f: &Correspondence) -> Result<Self> {
        let f = f.separated().module;
        let alg = f.coeff_algebra.clone();
        let x = EquivalenceBimodule::identity_bimodule(&alg);
        let unit = alg.unit_coords();
        let (df, dx) = (f.vec_dim, x.dim());
        let mut w_alg = zeros(dx * df, df * dx);
        for i in 0..df {
            for (j, a) in alg.basis.iter().enumerate() {
                let mut e = ComplexVector::zeros(df);
                e[i] = c(1.0, 0.0);
                let moved = f.right_op(a) * e;
                w_alg.set_column(i * dx + j, &kron_vec(&unit, &moved));
            }
        }
        Self::from_algebraic_map(f.clone(), f, x, &w_alg)
    }

    /// The context with `E = X ⊗_N F ⊗_N X̃`, where `W` sends
    /// `(x ⊗ f ⊗ ỹ) ⊗ z` to `x ⊗ f·<y, z>_N`.
    pub fn induced(f: &Correspondence, x: &EquivalenceBimodule) -> Result<Self> {
        let f = f.separated().module;
        let xt = x.dual();
        let q1 = internal_tensor(&x.module, &f)?;
        let q2 = internal_tensor(&q1.module, &xt.module)?;
        let e = q2.module.clone();
        let (dx, df) = (x.dim(), f.vec_dim);
        // (j, k, l) ↦ f_j · <x_k, x_l>
        let mut contract = zeros(df, df * dx * dx);
        for j in 0..df {
            for k in 0..dx {
                for l in 0..dx {
                    let g = x.module.gram_entry(k, l);
                    let col = f.right_op(&g).column(j).into_owned();
                    contract.set_column((j * dx + k) * dx + l, &col);
                }
            }
        }
        let w_alg = kron(&identity(dx), &contract)
            * kron(&q1.expand, &identity(dx * dx))
            * kron(&q2.expand, &identity(dx));
        // w_alg acts on e_i ⊗ x_l; rows are algebraic x ⊗ f
        Self::from_algebraic_map(e, f, x.clone(), &w_alg)
    }

    pub fn w_map(&self) -> CorrespondenceMap {
        CorrespondenceMap { source: self.ex.module.clone(), target: self.xf.module.clone(), matrix: self.w.clone() }
    }

    /// `W` isomorphism residuals, the bimodule residuals of `X`, and the
    /// axioms of `E` and `F`.
    pub fn check(&self, tol: f64) -> Result<Residuals> {
        let mut out = Residuals::new();
        out.extend_prefixed("w", &self.w_map().check_isomorphism(tol)?);
        out.extend_prefixed("x", &self.x.check(tol));
        out.extend_prefixed("e", &self.e.check_axioms(tol));
        out.extend_prefixed("f", &self.f.check_axioms(tol));
        Ok(out)
    }

    /// `𝔷*^X = (I_X ⊗ 𝔷*)(W ⊗ I_H)` as a covariant pair for `(E, M)` with
    /// the induced representation `σ^X`.
    pub fn transform(&self, pair: &CovariantPair) -> Result<CovariantPair> {
        let sigma = pair.rep();
        if pair.module().vec_dim != self.f.vec_dim || !pair.module().coeff_algebra.same_span(&self.f.coeff_algebra, 1e-8) {
            return Err(Error::AlgebraMismatch("covariant pair is not over the context's F".into()));
        }
        let k = induce_space(&self.x.module, sigma)?;
        let sigma_x = k.induced_representation();
        let d = induce_space(&self.e, &sigma_x)?;
        let h = sigma.space_dim;
        let zstar_alg = &pair.intertwiner * pair.induced.factor();
        let w_alg = &self.xf.expand * &self.w * &self.ex.project;
        let inner = kron_mul(&w_alg, h, &id_kron_mul(self.e.vec_dim, k.expand(), d.expand()));
        let zx = mul(k.factor(), &id_kron_mul(self.x.dim(), &zstar_alg, &inner));
        Ok(CovariantPair { induced: d, intertwiner: zx })
    }

    /// Isometry and covariance of the transform at random points of the
    /// closed ball of `F^σ`, and the dimension count `dim F^σ = dim E^{σ^X}`.
    pub fn verify_functor(&self, sigma: &Representation, trials: usize, seed: u64) -> Result<FunctorReport> {
        let dual_f = sigma_dual(&self.f, sigma)?;
        let k = induce_space(&self.x.module, sigma)?;
        let sigma_x = k.induced_representation();
        let dual_e = sigma_dual(&self.e, &sigma_x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = FunctorReport {
            dim_f_dual: dual_f.dim(),
            dim_e_dual: dual_e.dim(),
            image_rank: 0,
            max_isometry_gap: 0.0,
            max_intertwining: 0.0,
            max_norm: 0.0,
        };
        // images of a basis span the target dual
        let mut images: Vec<ComplexVector> = Vec::new();
        for z in &dual_f.basis {
            let t = self.transform(&CovariantPair::from_point(&dual_f, z))?;
            images.push(crate::algebra::vec_of(&t.intertwiner.adjoint()));
            report.max_intertwining = report.max_intertwining.max(dual_e.residual(&t.intertwiner.adjoint()));
        }
        if let Some(first) = images.first() {
            report.image_rank = numerical_rank(&crate::algebra::columns_to_matrix(first.len(), &images), 1e-9);
        }
        for _ in 0..trials {
            let z = random_ball_point(&dual_f, &mut rng);
            let pair = CovariantPair::from_point(&dual_f, &z);
            let t = self.transform(&pair)?;
            let n0 = operator_norm(&pair.intertwiner);
            let n1 = operator_norm(&t.intertwiner);
            report.max_isometry_gap = report.max_isometry_gap.max((n1 - n0).abs());
            report.max_intertwining = report.max_intertwining.max(t.check().residuals.get("intertwining").unwrap_or(f64::NAN));
            report.max_norm = report.max_norm.max(n0);
        }
        Ok(report)
    }
}

fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// A random element of the dual with operator norm uniform in `[0, 1]`.
pub fn random_ball_point(dual: &crate::representation::SigmaDual, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    if dual.dim() == 0 {
        return zeros(dual.induced.dim(), dual.induced.rep.space_dim);
    }
    let coords = ComplexVector::from_fn(dual.dim(), |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let z = dual.point(&coords);
    let radius: f64 = rng.random_range(0.0..=1.0);
    let norm = operator_norm(&z);
    if norm == 0.0 {
        z
    } else {
        z * c(radius / norm, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FunctorReport {
    pub dim_f_dual: usize,
    pub dim_e_dual: usize,
    pub image_rank: usize,
    pub max_isometry_gap: f64,
    pub max_intertwining: f64,
    pub max_norm: f64,
}

/// `X = ℱ(F)` truncated at level `N`, with the right shift `R`,
/// `P₀` and `φ_M(b) = R (b ⊗ I_F) R^*`. The strictly cyclic
/// correspondence `E = P₀M` is kept implicit: `E ⊗_M X ≅ P₀X`, on which
/// `W = R^*`.
#[derive(Clone, Debug)]
pub struct Stabilization {
    pub fock: TruncatedFock,
    pub x: Correspondence,
    pub shift: RightShift,
    pub p0: ComplexMatrix,
    pub truncation_level: usize,
}

pub fn canonical_stabilization(f: &Correspondence, level_cap: usize) -> Result<Stabilization> {
    if level_cap < 2 {
        return Err(Error::Argument(format!("stabilization needs a level cap of at least 2, got {level_cap}")));
    }
    let fock = TruncatedFock::new(f, level_cap)?;
    let x = fock.as_module();
    let shift = fock.right_shift()?;
    let p0 = fock.p0();
    Ok(Stabilization { fock, x, shift, p0, truncation_level: level_cap })
}

/// Largest truncated Fock dimension for which the generic context is built.
pub const CONTEXT_DIM_CAP: usize = 8;

impl Stabilization {
    pub fn r(&self) -> &ComplexMatrix {
        self.shift.matrix()
    }

    pub fn dim(&self) -> usize {
        self.x.vec_dim
    }

    /// `b ⊗ I_F` on `X ⊗_N F` for a right-`N`-linear `b` on `X`.
    pub fn lift(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let q = &self.shift.domain;
        mul(&q.project, &kron_mul(b, self.fock.base.vec_dim, &q.expand))
    }

    pub fn phi(&self, b: &ComplexMatrix) -> ComplexMatrix {
        mul(&mul(self.r(), &self.lift(b)), &self.r().adjoint())
    }

    /// Projection of `X` onto the levels below the cap.
    pub fn window(&self) -> ComplexMatrix {
        self.fock.levels_projection(0..=self.truncation_level - 1)
    }

    /// `θ_{x,y}: z ↦ x <y, z>_N`.
    pub fn rank_one(&self, x: &ComplexVector, y: &ComplexVector) -> ComplexMatrix {
        let n = self.dim();
        let mut out = zeros(n, n);
        for j in 0..n {
            let mut e = ComplexVector::zeros(n);
            e[j] = c(1.0, 0.0);
            out.set_column(j, &(self.x.right_op(&self.x.inner(y, &e)) * x));
        }
        out
    }

    /// Columns of `W`: `P₀X` (levels `1..=N` of `X`) → `X ⊗_N F`.
    pub fn w(&self) -> ComplexMatrix {
        let start = self.fock.level_offsets[1];
        self.r().adjoint().columns(start, self.dim() - start).into_owned()
    }

    /// Residuals of the stabilization identities: `RR^* = P₀`, `W`
    /// isometric and right-`N`-linear, onto the sub-cap window, and left
    /// intertwining for `generators` random elements of `L(QX)` and their
    /// adjoints (`Q` the window projection).
    pub fn check(&self, generators: usize, seed: u64) -> Residuals {
        let r = self.r();
        let mut out = Residuals::new();
        out.push("rr_star_minus_p0", operator_norm(&(r * r.adjoint() - &self.p0)));
        let start = self.fock.level_offsets[1];
        let n = self.dim();
        let m = n - start;
        let w = self.w();
        let nc = self.x.coeff_dim();
        // N-valued isometry on P₀X
        let src_gram = self.x.gram.view((start * nc, start * nc), (m * nc, m * nc)).into_owned();
        let pulled = self.shift.domain.module.gram_along(&w);
        out.push("w_isometry", operator_norm(&(pulled - src_gram)));
        let sub = self.shift.subcap_projection(&self.fock);
        out.push("w_onto_window", operator_norm(&(&w * w.adjoint() - &sub)));
        let rank = numerical_rank(&w, 1e-9);
        out.push("w_window_rank_deficit", (numerical_rank(&sub, 1e-9).saturating_sub(rank)) as f64);
        let mut right = 0.0f64;
        for b in &self.x.coeff_algebra.basis {
            let src = self.x.right_op(b).view((start, start), (m, m)).into_owned();
            let tgt = self.shift.domain.module.right_op(b);
            right = right.max(operator_norm(&(&w * src - tgt * &w)));
        }
        out.push("w_right_intertwining", right);
        let window = self.window();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut left = 0.0f64;
        let mut hom = 0.0f64;
        let mut gens = Vec::new();
        for _ in 0..generators {
            let x = &window * ComplexVector::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            let y = &window * ComplexVector::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
            let b = self.rank_one(&x, &y);
            gens.push(b.adjoint());
            gens.push(b);
        }
        gens.push(window.clone());
        let phis: Vec<ComplexMatrix> = gens.iter().map(|b| self.phi(b)).collect();
        for (b, phi) in gens.iter().zip(&phis) {
            let src = phi.view((start, start), (m, m)).into_owned();
            left = left.max(operator_norm(&(&w * src - self.lift(b) * &w)));
            for (b2, phi2) in gens.iter().zip(&phis) {
                hom = hom.max(operator_norm(&(phi * phi2 - self.phi(&(b * b2)))));
            }
        }
        out.push("w_left_intertwining", left);
        out.push("phi_multiplicative", hom);
        out
    }

    /// The algebra `M = L(X)`: operators on `X` commuting with the right action.
    pub fn operator_algebra(&self) -> StarAlgebra {
        let mut set: Vec<ComplexMatrix> = self.x.right_action.clone();
        set.extend(self.x.right_action.iter().map(|m| m.adjoint()));
        commutant_of_set(self.dim(), &set)
    }

    /// The full context `(P₀M, M) ~ (F, N)` via `X`. Only built for small
    /// truncations (`dim X ≤ CONTEXT_DIM_CAP`).
    pub fn context(&self) -> Result<StabilizedContext> {
        let n = self.dim();
        if n > CONTEXT_DIM_CAP {
            return Err(Error::TooLarge(format!("truncated Fock space of dimension {n} (cap {CONTEXT_DIM_CAP})")));
        }
        let m_alg = self.operator_algebra();
        // X as an M,N-bimodule; M acts on coordinates
        let mut module = self.x.clone();
        module.left_algebra = m_alg.clone();
        module.left_action = m_alg.basis.clone();
        let mut left_gram = zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let mut ei = ComplexVector::zeros(n);
                ei[i] = c(1.0, 0.0);
                let mut ej = ComplexVector::zeros(n);
                ej[j] = c(1.0, 0.0);
                left_gram.view_mut((i * n, j * n), (n, n)).copy_from(&self.rank_one(&ei, &ej));
            }
        }
        let x = EquivalenceBimodule { module, left_gram };
        // E = P₀M with left action b·e = φ(b) e
        let elements: Vec<Vec<ComplexMatrix>> = m_alg.basis.iter().map(|a| vec![&self.p0 * a]).collect();
        let (mut e_raw, basis) = Correspondence::from_concrete(&m_alg, &m_alg, &elements)?;
        for (k, b) in m_alg.basis.iter().enumerate() {
            let phi = self.phi(b);
            let mut act = zeros(e_raw.vec_dim, e_raw.vec_dim);
            for j in 0..e_raw.vec_dim {
                let (coords, _) = basis.coords(&[&phi * &basis.elements[j][0]]);
                act.set_column(j, &coords);
            }
            e_raw.left_action[k] = act;
        }
        let eq = e_raw.separated();
        let e = eq.module.clone();
        // e_β ⊗ x_l ↦ R^*(e_β x_l), expressed on algebraic X ⊗ F
        let xf = internal_tensor(&x.module, &self.fock.base)?;
        let rstar = self.r().adjoint();
        let mut w_alg = zeros(n * self.fock.base.vec_dim, e.vec_dim * n);
        let mut e_elements = Vec::with_capacity(e.vec_dim);
        for beta in 0..e.vec_dim {
            let mut mat = zeros(n, n);
            for (j, el) in basis.elements.iter().enumerate() {
                mat += &el[0] * eq.expand[(j, beta)];
            }
            e_elements.push(mat.clone());
            for l in 0..n {
                let image = &rstar * mat.column(l);
                w_alg.set_column(beta * n + l, &(&xf.expand * image));
            }
        }
        let context = MoritaContext::from_algebraic_map(e, self.fock.base.clone(), x, &w_alg)?;
        Ok(StabilizedContext { context, e_elements })
    }

    /// `(R ⊗ I_H)(I_{ℱ(F)} ⊗ T̃^*)` on `ℱ(F) ⊗_σ H`.
    pub fn reconstruction_operator(&self, pair: &CovariantPair) -> Result<Reconstruction> {
        let base = &self.fock.base;
        if pair.module().vec_dim != base.vec_dim || !pair.module().coeff_algebra.same_span(&base.coeff_algebra, 1e-8) {
            return Err(Error::AlgebraMismatch("covariant pair is not over the stabilized correspondence".into()));
        }
        let sigma = pair.rep();
        let h = sigma.space_dim;
        let k = induce_space(&self.x, sigma)?;
        let r_alg = self.r() * &self.shift.domain.project;
        let lift_t = pair.induced.expand() * pair.intertwiner.adjoint();
        let matrix = mul(k.factor(), &kron_mul(&r_alg, h, &id_kron_mul(self.dim(), &lift_t, k.expand())));
        Ok(Reconstruction { matrix, space: k })
    }
}

#[derive(Clone, Debug)]
pub struct StabilizedContext {
    pub context: MoritaContext,
    /// Basis of `E = P₀M` as operators on `X`.
    pub e_elements: Vec<ComplexMatrix>,
}

impl StabilizedContext {
    /// `E ⊗_{σ^X} (X ⊗_σ H) → X ⊗_σ H`, `e ⊗ κ ↦ σ^X(e) κ`.
    pub fn multiplication(&self, sigma: &Representation) -> Result<ComplexMatrix> {
        let k = induce_space(&self.context.x.module, sigma)?;
        let sigma_x = k.induced_representation();
        let d = induce_space(&self.context.e, &sigma_x)?;
        let kd = k.dim();
        let mut a = zeros(kd, self.e_elements.len() * kd);
        for (b, e) in self.e_elements.iter().enumerate() {
            a.view_mut((0, b * kd), (kd, kd)).copy_from(&k.lift_module_operator(e));
        }
        Ok(a * d.expand())
    }
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub matrix: ComplexMatrix,
    /// `ℱ(F) ⊗_σ H`.
    pub space: InducedSpace,
}

/// `Σ_i R_i ⊗ T_i^*` with `R_i w = w i` on words of length `≤ N` over `d`
/// letters (length-`N` words sent to zero), ordered by length and then
/// lexicographically.
pub fn popescu_form(ts: &[ComplexMatrix], level_cap: usize) -> Result<ComplexMatrix> {
    let d = ts.len();
    let h = ts.first().map_or(0, |t| t.nrows());
    if d == 0 {
        return Err(Error::Argument("empty row".into()));
    }
    let mut row = zeros(h, h);
    for t in ts {
        if t.shape() != (h, h) {
            return Err(Error::dim("row entry", format!("{h}x{h}"), format!("{}x{}", t.nrows(), t.ncols())));
        }
        row += t * t.adjoint();
    }
    if crate::algebra::min_eigenvalue(&(identity(h) - row)) < -1e-9 {
        return Err(Error::Argument("not a row contraction".into()));
    }
    let shifts = word_shifts(d, level_cap);
    let total = shifts[0].nrows();
    let mut out = zeros(total * h, total * h);
    for (ri, t) in shifts.iter().zip(ts) {
        out += kron(ri, &t.adjoint());
    }
    Ok(out)
}

/// Truncated right creation operators `R_i w = w i` on words.
pub fn word_shifts(d: usize, level_cap: usize) -> Vec<ComplexMatrix> {
    let mut offsets = vec![0usize];
    let mut size = 1usize;
    for _ in 0..=level_cap {
        offsets.push(offsets.last().unwrap() + size);
        size *= d;
    }
    let total = *offsets.last().unwrap();
    (0..d)
        .map(|i| {
            let mut r = zeros(total, total);
            for len in 0..level_cap {
                for idx in 0..(offsets[len + 1] - offsets[len]) {
                    r[(offsets[len + 1] + idx * d + i, offsets[len] + idx)] = c(1.0, 0.0);
                }
            }
            r
        })
        .collect()
}

/// `max ‖Q(R_i^* R_j − δ_ij I)Q‖` over the sub-cap words.
pub fn row_isometry_residual(d: usize, level_cap: usize) -> f64 {
    let shifts = word_shifts(d, level_cap);
    let total = shifts[0].nrows();
    let top = d.pow(level_cap as u32);
    let mut q = identity(total);
    for i in (total - top)..total {
        q[(i, i)] = c(0.0, 0.0);
    }
    let mut worst = 0.0f64;
    for (i, ri) in shifts.iter().enumerate() {
        for (j, rj) in shifts.iter().enumerate() {
            let target = if i == j { q.clone() } else { zeros(total, total) };
            worst = worst.max(operator_norm(&(&q * ri.adjoint() * rj * &q - target)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{diag, r, real_matrix, C64};
    use crate::instances::matrices_over_diagonal;
    use crate::representation::SigmaDual;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        operator_norm(&(a - b))
    }

    fn point(dual: &SigmaDual, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_ball_point(dual, &mut rng)
    }

    #[test]
    fn trivial_context_preserves_points() {
        for f in [Correspondence::standard(2), matrices_over_diagonal(2)] {
            let ctx = MoritaContext::trivial(&f).unwrap();
            assert!(ctx.check(1e-9).unwrap().max() < 1e-10, "{}", ctx.check(1e-9).unwrap());
            let sigma = Representation::identity(&ctx.f.coeff_algebra).amplify(2);
            let rep = ctx.verify_functor(&sigma, 20, 1).unwrap();
            assert_eq!(rep.dim_f_dual, rep.dim_e_dual);
            assert_eq!(rep.image_rank, rep.dim_e_dual);
            assert!(rep.max_isometry_gap < 1e-10 && rep.max_intertwining < 1e-10, "{rep:?}");
        }
    }

    #[test]
    fn column_context_transform_norm() {
        let x = EquivalenceBimodule::column(2);
        for d in 1..=3 {
            let ctx = MoritaContext::induced(&Correspondence::standard(d), &x).unwrap();
            assert!(ctx.check(1e-9).unwrap().max() < 1e-10, "{}", ctx.check(1e-9).unwrap());
            let sigma = Representation::scalar(1);
            let t: Vec<f64> = (0..d).map(|i| 0.3 + 0.1 * i as f64).collect();
            let row = ComplexMatrix::from_fn(1, d, |_, j| r(t[j]));
            let pair = CovariantPair::new(&ctx.f, &sigma, row).unwrap();
            let out = ctx.transform(&pair).unwrap();
            let expect = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((operator_norm(&out.intertwiner) - expect).abs() < 1e-12);
            assert!(out.check().residuals.max() < 1e-12);
            let zero = CovariantPair::new(&ctx.f, &sigma, zeros(1, d)).unwrap();
            assert_eq!(operator_norm(&ctx.transform(&zero).unwrap().intertwiner), 0.0);
            let rep = ctx.verify_functor(&Representation::scalar(2), 10, 2).unwrap();
            assert_eq!(rep.dim_f_dual, 4 * d);
            assert_eq!(rep.dim_e_dual, 4 * d);
            assert_eq!(rep.image_rank, 4 * d);
        }
    }

    #[test]
    fn transform_is_linear() {
        let x = EquivalenceBimodule::column(2);
        let ctx = MoritaContext::induced(&Correspondence::standard(2), &x).unwrap();
        let sigma = Representation::scalar(2);
        let dual = sigma_dual(&ctx.f, &sigma).unwrap();
        let (z1, z2) = (point(&dual, 5), point(&dual, 6));
        let (a, b) = (C64::new(0.3, 0.1), C64::new(-0.2, 0.4));
        let t = |z: &ComplexMatrix| ctx.transform(&CovariantPair::from_point(&dual, z)).unwrap().intertwiner;
        let lhs = t(&(&z1 * a + &z2 * b));
        let rhs = t(&z1) * a.conj() + t(&z2) * b.conj();
        assert!(close(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn stabilization_of_scalars() {
        let st = canonical_stabilization(&Correspondence::standard(1), 3).unwrap();
        assert_eq!(st.dim(), 4);
        assert!(close(&st.p0, &diag(&[0.0, 1.0, 1.0, 1.0])) < 1e-15);
        let res = st.check(3, 9);
        assert!(res.max() < 1e-10, "{res}");
        let sc = st.context().unwrap();
        assert_eq!(sc.context.e.vec_dim, 12);
        assert_eq!(sc.context.x.left_algebra().dim(), 16);
        assert!(canonical_stabilization(&Correspondence::standard(1), 1).is_err());
    }

    #[test]
    fn stabilization_dimensions_and_residuals() {
        let st = canonical_stabilization(&Correspondence::standard(2), 2).unwrap();
        assert_eq!(st.dim(), 7);
        assert_eq!(numerical_rank(&st.p0, 1e-9), 6);
        assert!(st.check(3, 1).max() < 1e-10);
        for n in 2..=3 {
            let st = canonical_stabilization(&matrices_over_diagonal(2), n).unwrap();
            let res = st.check(3, 4);
            assert!(res.max() < 1e-10, "{res}");
        }
        let big = canonical_stabilization(&matrices_over_diagonal(2), 2).unwrap();
        assert!(matches!(big.context(), Err(Error::TooLarge(_))));
    }

    #[test]
    fn reconstruction_matches_word_shifts() {
        let s = (1.25f64).sqrt();
        let t1 = real_matrix(2, 2, &[0.0, 1.0 / s, 0.0, 0.0]);
        let t2 = identity(2) * r(0.5 / s);
        let st = canonical_stabilization(&Correspondence::standard(2), 3).unwrap();
        let mut row = zeros(2, 4);
        row.view_mut((0, 0), (2, 2)).copy_from(&t1);
        row.view_mut((0, 2), (2, 2)).copy_from(&t2);
        let pair = CovariantPair::new(&st.fock.base, &Representation::scalar(2), row).unwrap();
        let rec = st.reconstruction_operator(&pair).unwrap();
        let direct = popescu_form(&[t1, t2], 3).unwrap();
        assert!(close(&rec.matrix, &direct) < 1e-12);
    }

    #[test]
    fn popescu_basics() {
        let shift = popescu_form(&[identity(1)], 2).unwrap();
        let expect = ComplexMatrix::from_fn(3, 3, |i, j| if i == j + 1 { r(1.0) } else { C64::default() });
        assert!(close(&shift, &expect) < 1e-15);
        assert_eq!(operator_norm(&popescu_form(&[zeros(2, 2), zeros(2, 2)], 2).unwrap()), 0.0);
        assert!(row_isometry_residual(3, 3) < 1e-15);
        assert!(popescu_form(&[identity(2), identity(2)], 2).is_err());
    }

    #[test]
    fn scalar_reconstruction_is_conjugate_shift() {
        let t = C64::new(0.6, 0.3);
        let st = canonical_stabilization(&Correspondence::standard(1), 3).unwrap();
        let pair = CovariantPair::new(&st.fock.base, &Representation::scalar(1), ComplexMatrix::from_element(1, 1, t)).unwrap();
        let rec = st.reconstruction_operator(&pair).unwrap();
        let shift = ComplexMatrix::from_fn(4, 4, |i, j| if i == j + 1 { t.conj() } else { C64::default() });
        assert!(close(&rec.matrix, &shift) < 1e-15);
        assert!((operator_norm(&rec.matrix) - t.norm()).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_is_adjoint_of_transform() {
        for (f, n, h) in [(Correspondence::standard(1), 3, 2), (Correspondence::standard(2), 2, 2)] {
            let st = canonical_stabilization(&f, n).unwrap();
            let sc = st.context().unwrap();
            let sigma = Representation::scalar(h);
            let dual = sigma_dual(&st.fock.base, &sigma).unwrap();
            let z = point(&dual, 17);
            let pair = CovariantPair::from_point(&dual, &z);
            let rec = st.reconstruction_operator(&pair).unwrap();
            let zx = sc.context.transform(&pair).unwrap();
            let j = sc.multiplication(&sigma).unwrap();
            assert!(close(&rec.matrix, &(j * zx.intertwiner.adjoint())) < 1e-12);
        }
    }
}
