//! Completely positive maps attached to covariant pairs, superharmonic
//! elements and the absolutely continuous subspace, together with the
//! checks that both behave well under Morita transforms.

use rayon::prelude::*;

use crate::algebra::{
    c, hermitian_part, identity, matrix_power, min_eigenvalue, nullspace, operator_norm, r, range_projection,
    vec_of, zeros, ComplexMatrix, ComplexVector, StarAlgebra,
};
use crate::error::{Error, Result};
use crate::morita::MoritaContext;
use crate::report::Residuals;
use crate::representation::{induce_space, CovariantPair};

/// Default number of iterations for the purity test. Applied by binary
/// powering, so the cost is logarithmic.
pub const DEFAULT_PURITY_DEPTH: u64 = 1 << 40;
/// Default threshold for `‖Φ^depth(a)‖` relative to `max(1, ‖a‖)`.
pub const DEFAULT_PURITY_TOL: f64 = 1e-10;
/// Eigenvalues of the linearised map with modulus above `1 - PERIPHERAL_GAP`
/// count as peripheral.
pub const PERIPHERAL_GAP: f64 = 1e-8;
/// Eigenvalues with modulus in `(1 - AMBIGUOUS_GAP, 1 - PERIPHERAL_GAP]`
/// are close enough to the circle that a finite-depth purity verdict is
/// not trusted.
pub const AMBIGUOUS_GAP: f64 = 1e-6;
const POSITIVITY_TOL: f64 = 1e-9;

/// A linear map on a unital *-subalgebra of `B(H)`, stored by its values
/// on the algebra's orthonormal basis.
#[derive(Clone, Debug)]
pub struct CPMap {
    pub domain: StarAlgebra,
    pub images: Vec<ComplexMatrix>,
}

impl CPMap {
    pub fn from_fn(domain: StarAlgebra, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let images = domain.basis.iter().map(f).collect();
        CPMap { domain, images }
    }

    /// `Φ(a) = T̃ (I_E ⊗ a) T̃*` on `σ(M)'`.
    pub fn from_pair(pair: &CovariantPair) -> Self {
        Self::from_fn(pair.rep().commutant(), |a| apply_point(pair, a))
    }

    /// `Φ(a) = Σ T_i a T_i*` on all of `B(H)`.
    pub fn from_row(ts: &[ComplexMatrix]) -> Self {
        let n = ts.first().map_or(0, |t| t.nrows());
        Self::from_fn(StarAlgebra::full(n), |a| {
            ts.iter().fold(zeros(n, n), |acc, t| acc + t * a * t.adjoint())
        })
    }

    pub fn space_dim(&self) -> usize {
        self.domain.ambient_dim
    }

    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.apply_coords(&self.domain.coords(a))
    }

    fn apply_coords(&self, coords: &ComplexVector) -> ComplexMatrix {
        let n = self.space_dim();
        self.images.iter().zip(coords.iter()).fold(zeros(n, n), |acc, (m, w)| acc + m * *w)
    }

    /// Matrix of `Φ` in the domain's orthonormal coordinates.
    pub fn linearization(&self) -> ComplexMatrix {
        let k = self.domain.dim();
        let mut lin = zeros(k, k);
        for (j, m) in self.images.iter().enumerate() {
            lin.set_column(j, &self.domain.coords(m));
        }
        lin
    }

    /// Largest distance of an image from the domain.
    pub fn closure_residual(&self) -> f64 {
        self.images.iter().map(|m| self.domain.residual(m)).fold(0.0, f64::max)
    }

    pub fn spectral_radius(&self) -> f64 {
        eigenvalues(&self.linearization()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `Φ^n(a)` by binary powering of the linearisation.
    pub fn power(&self, a: &ComplexMatrix, n: u64) -> ComplexMatrix {
        let coords = matrix_power(&self.linearization(), n) * self.domain.coords(a);
        self.domain.element(&coords)
    }
}

/// `T̃ (I ⊗ b) T̃*` for any `b` commuting with `σ`.
pub fn apply_point(pair: &CovariantPair, b: &ComplexMatrix) -> ComplexMatrix {
    &pair.intertwiner * pair.induced.lift_commutant(b) * pair.intertwiner.adjoint()
}

fn eigenvalues(m: &ComplexMatrix) -> Vec<crate::algebra::C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

fn check_in_domain(a: &ComplexMatrix, phi: &CPMap) -> Result<()> {
    if a.shape() != (phi.space_dim(), phi.space_dim()) {
        return Err(Error::dim(
            "superharmonic candidate",
            format!("{0}x{0}", phi.space_dim()),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    if phi.domain.residual(a) > 1e-8 * operator_norm(a).max(1.0) {
        return Err(Error::Argument("element is not in the domain of the map".into()));
    }
    Ok(())
}

fn psd_at(x: &ComplexMatrix, scale: f64, tol: f64) -> bool {
    let h = hermitian_part(x);
    operator_norm(&(x - &h)) <= tol * scale && (h.nrows() == 0 || min_eigenvalue(&h) >= -tol * scale)
}

/// `a ≥ 0` and `Φ(a) ≤ a`, with `tol` relative to `max(1, ‖a‖)`.
pub fn is_superharmonic(a: &ComplexMatrix, phi: &CPMap, tol: f64) -> Result<bool> {
    check_in_domain(a, phi)?;
    let scale = operator_norm(a).max(1.0);
    Ok(psd_at(a, scale, tol) && psd_at(&(a - phi.apply(a)), scale, tol))
}

/// `‖Φ^depth(a)‖ ≤ tol · max(1, ‖a‖)`. Meaningful for superharmonic `a`,
/// where `Φⁿ(a)` decreases.
pub fn is_pure_superharmonic(a: &ComplexMatrix, phi: &CPMap, depth: u64, tol: f64) -> Result<bool> {
    check_in_domain(a, phi)?;
    let tail = phi.power(a, depth);
    Ok(operator_norm(&tail) <= tol * operator_norm(a).max(1.0))
}

/// Projection onto the span of the ranges of the pure superharmonic
/// elements found, with the elements themselves.
#[derive(Clone, Debug)]
pub struct ACSubspace {
    pub projection: ComplexMatrix,
    pub generators: Vec<ComplexMatrix>,
    /// Superharmonic candidates that did not decay at the test depth, or
    /// eigenvalues too close to the unit circle to classify.
    pub indeterminate: bool,
    pub spectral_radius: f64,
    pub peripheral_dim: usize,
}

impl ACSubspace {
    pub fn rank(&self) -> usize {
        crate::algebra::numerical_rank(&self.projection, 1e-6)
    }

    pub fn is_full(&self, tol: f64) -> bool {
        operator_norm(&(&self.projection - identity(self.projection.nrows()))) <= tol
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        operator_norm(&self.projection) <= tol
    }
}

pub fn ac_subspace(pair: &CovariantPair, depth: u64, tol: f64) -> Result<ACSubspace> {
    ac_subspace_of_map(&CPMap::from_pair(pair), depth, tol)
}

/// Peripheral spectral data of a linearised map: the right and left
/// eigenvectors for eigenvalues near the unit circle.
struct Peripheral {
    right: ComplexMatrix,
    left: ComplexMatrix,
    ambiguous: bool,
}

fn peripheral_part(lin: &ComplexMatrix) -> Peripheral {
    let k = lin.nrows();
    let mut eig = eigenvalues(lin);
    let ambiguous_mod = eig.iter().any(|z| z.norm() > 1.0 - AMBIGUOUS_GAP && z.norm() <= 1.0 - PERIPHERAL_GAP);
    eig.retain(|z| z.norm() > 1.0 - PERIPHERAL_GAP);
    // cluster numerically equal eigenvalues
    let mut clusters: Vec<(crate::algebra::C64, usize)> = Vec::new();
    for z in eig {
        match clusters.iter_mut().find(|(w, _)| (*w - z).norm() < 1e-6) {
            Some(entry) => entry.1 += 1,
            None => clusters.push((z, 1)),
        }
    }
    let mut right = Vec::new();
    let mut left = Vec::new();
    let mut ambiguous = ambiguous_mod;
    for (z, mult) in clusters {
        let shifted = lin - identity(k) * z;
        let v = nullspace(&shifted, 1e-8);
        let u = nullspace(&shifted.adjoint(), 1e-8);
        if v.ncols() != mult || u.ncols() != mult {
            ambiguous = true;
        }
        right.extend(v.column_iter().map(|col| col.into_owned()));
        left.extend(u.column_iter().map(|col| col.into_owned()));
    }
    Peripheral {
        right: crate::algebra::columns_to_matrix(k, &right),
        left: crate::algebra::columns_to_matrix(k, &left),
        ambiguous,
    }
}

/// Candidate pure superharmonic elements are `G(c) = Σ_k Φ^k(c)`, solved on
/// the spectral complement of the peripheral eigenspace. The candidates
/// are conditional expectations of `vv*` for `v ∈ {e_j, e_j + e_k, e_j + i e_k}`,
/// plus the complement of the supports of the peripheral left eigenvectors.
pub fn ac_subspace_of_map(phi: &CPMap, depth: u64, tol: f64) -> Result<ACSubspace> {
    let n = phi.space_dim();
    let k = phi.domain.dim();
    let lin = phi.linearization();
    let spectral_radius = eigenvalues(&lin).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let per = peripheral_part(&lin);
    let peripheral_dim = per.right.ncols();

    // spectral projection onto the peripheral part, and the solve operator
    let proj = if peripheral_dim == 0 || per.right.ncols() != per.left.ncols() {
        zeros(k, k)
    } else {
        let pairing = per.left.adjoint() * &per.right;
        match pairing.try_inverse() {
            Some(inv) => &per.right * inv * per.left.adjoint(),
            None => return Err(Error::Argument("peripheral eigenvectors are not biorthogonal".into())),
        }
    };
    let solve = (identity(k) - &lin + &proj)
        .try_inverse()
        .ok_or_else(|| Error::Argument("map is not invertible off its peripheral spectrum".into()))?;
    let complement = identity(k) - &proj;
    let tail_op = matrix_power(&lin, depth);

    let mut candidates: Vec<ComplexMatrix> = Vec::new();
    for i in 0..n {
        for j in i..n {
            if i == j {
                let mut v = ComplexVector::zeros(n);
                v[i] = r(1.0);
                candidates.push(phi.domain.project(&(&v * v.adjoint())));
            } else {
                for phase in [c(1.0, 0.0), c(0.0, 1.0)] {
                    let mut v = ComplexVector::zeros(n);
                    v[i] = r(1.0);
                    v[j] = phase;
                    candidates.push(phi.domain.project(&(&v * v.adjoint())));
                }
            }
        }
    }
    let mut support = zeros(n, n);
    for u in per.left.column_iter() {
        let m = phi.domain.element(&u.into_owned());
        support += &m * m.adjoint() + m.adjoint() * &m;
    }
    candidates.push(identity(n) - range_projection(&support, 1e-9));

    let verdicts: Vec<(Option<ComplexMatrix>, bool)> = candidates
        .par_iter()
        .map(|cand| {
            let coords = &solve * (&complement * phi.domain.coords(cand));
            let g = hermitian_part(&phi.domain.element(&coords));
            let scale = operator_norm(&g).max(1.0);
            if operator_norm(&g) <= tol || !psd_at(&g, scale, POSITIVITY_TOL) {
                return (None, false);
            }
            if !psd_at(&(&g - phi.apply(&g)), scale, POSITIVITY_TOL) {
                return (None, false);
            }
            let tail = phi.domain.element(&(&tail_op * phi.domain.coords(&g)));
            if operator_norm(&tail) <= tol * scale {
                (Some(g), false)
            } else {
                (None, true)
            }
        })
        .collect();

    let mut indeterminate = per.ambiguous;
    let mut generators = Vec::new();
    let mut total = zeros(n, n);
    for (g, flag) in verdicts {
        indeterminate |= flag;
        if let Some(g) = g {
            total += &g / r(operator_norm(&g));
            generators.push(g);
        }
    }
    Ok(ACSubspace {
        projection: range_projection(&total, 1e-9),
        generators,
        indeterminate,
        spectral_radius,
        peripheral_dim,
    })
}

/// `Φ_{𝔷^X}(I_X ⊗ a) = I_X ⊗ Φ_𝔷(a)` over a basis of `σ(N)'`, and the
/// identification of the commutant of `σ^X(M)` with `I_X ⊗ σ(N)'`.
/// With `window`, an operator on `X`, the first residual is compressed by
/// `window ⊗ I_H`.
pub fn verify_cp_induction(
    ctx: &MoritaContext,
    pair: &CovariantPair,
    window: Option<&ComplexMatrix>,
) -> Result<Residuals> {
    let transformed = ctx.transform(pair)?;
    let phi = CPMap::from_pair(pair);
    let k = induce_space(&ctx.x.module, pair.rep())?;
    let q = window.map(|w| k.lift_module_operator(w)).unwrap_or_else(|| identity(k.dim()));
    let mut worst: f64 = 0.0;
    let mut lifts = Vec::new();
    for a in &phi.domain.basis {
        let lifted = k.lift_commutant(a);
        let lhs = apply_point(&transformed, &lifted);
        let rhs = k.lift_commutant(&phi.apply(a));
        worst = worst.max(operator_norm(&(&q * (lhs - rhs) * &q)));
        lifts.push(lifted);
    }
    let comm = transformed.rep().commutant();
    let containment = lifts.iter().map(|l| comm.residual(l)).fold(0.0, f64::max);
    let lift_rank = if lifts.is_empty() {
        0
    } else {
        let cols: Vec<ComplexVector> = lifts.iter().map(vec_of).collect();
        crate::algebra::numerical_rank(&crate::algebra::columns_to_matrix(cols[0].len(), &cols), 1e-9)
    };
    Ok(Residuals::new()
        .with("cp_induction", worst)
        .with("commutant_containment", containment)
        .with("commutant_dim_gap", (comm.dim() as f64 - lift_rank as f64).abs()))
}

#[derive(Clone, Debug)]
pub struct AcTransport {
    pub residuals: Residuals,
    pub source: ACSubspace,
    pub target: ACSubspace,
    pub source_full: bool,
    pub target_full: bool,
}

/// Compares `X ⊗ 𝒱_ac` with the absolutely continuous subspace of the
/// transformed pair.
pub fn verify_ac_transform(ctx: &MoritaContext, pair: &CovariantPair, depth: u64, tol: f64) -> Result<AcTransport> {
    let source = ac_subspace(pair, depth, tol)?;
    let transformed = ctx.transform(pair)?;
    let target = ac_subspace(&transformed, depth, tol)?;
    let k = induce_space(&ctx.x.module, pair.rep())?;
    let lifted = k.lift_commutant(&source.projection);
    let diff = operator_norm(&(lifted - &target.projection));
    let source_full = source.is_full(1e-8);
    let target_full = target.is_full(1e-8);
    let residuals = Residuals::new()
        .with("projection_difference", diff)
        .with("full_mismatch", if source_full == target_full { 0.0 } else { 1.0 });
    Ok(AcTransport { residuals, source, target, source_full, target_full })
}
