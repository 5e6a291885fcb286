//! The dual `E^σ` of a correspondence, points of its ball as covariant
//! pairs, and integrated forms of tensor polynomials.

use cstar_morita::algebra::{operator_norm, r, C64};
use cstar_morita::fock::TensorPolynomial;
use cstar_morita::instances::matrices_over_diagonal;
use cstar_morita::representation::{intertwiner_from_map, sigma_dual, CovariantPair, Representation};
use cstar_morita::{ComplexVector, StarAlgebra};

fn main() -> cstar_morita::Result<()> {
    let f = matrices_over_diagonal(2).separated().module;
    let sigma = Representation::identity(&StarAlgebra::diagonal(2)).amplify(2);
    let dual = sigma_dual(&f, &sigma)?;
    println!("dim E^sigma = {}, checks\n{}", dual.dim(), dual.check());

    let coords = ComplexVector::from_fn(dual.dim(), |i, _| C64::new(0.3 - 0.1 * i as f64, 0.05 * i as f64));
    let z = dual.point(&coords);
    let z = &z * r(0.8 / operator_norm(&z));
    let pair = CovariantPair::from_point(&dual, &z);
    let report = pair.check();
    println!("pair: norm {:.4}, position {:?}\n{}", report.norm, report.position, report.residuals);

    let back = intertwiner_from_map(&pair.induced, &pair.bimodule_map())?;
    println!("bimodule map round trip: {:e}", operator_norm(&(back - &pair.intertwiner)));

    let xi = ComplexVector::from_fn(f.vec_dim, |i, _| C64::new(1.0, i as f64 * 0.25));
    let p = TensorPolynomial::new(Some(StarAlgebra::diagonal(2).basis[0].clone()), vec![(1, xi)])?;
    let image = pair.integrated_form(&p)?;
    println!("integrated form of a + T_xi has norm {:.6}", operator_norm(&image));
    Ok(())
}
