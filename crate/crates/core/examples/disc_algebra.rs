//! Over `E = C` the tensor algebra is the disc algebra: point evaluations
//! and matrix contractions obey von Neumann's inequality.

use cstar_morita::algebra::{operator_norm, C64};
use cstar_morita::fock::TensorPolynomial;
use cstar_morita::representation::{CovariantPair, Representation};
use cstar_morita::{ComplexMatrix, Correspondence};

fn main() -> cstar_morita::Result<()> {
    let coeffs = [C64::new(1.0, 0.0), C64::new(0.0, -0.5), C64::new(0.25, 0.0), C64::new(0.0, 0.0), C64::new(-0.3, 0.1)];
    let p = TensorPolynomial::scalar(&coeffs);
    let sup = (0..4096)
        .map(|k| {
            let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 4096.0);
            coeffs.iter().rev().fold(C64::default(), |acc, a| acc * z + a).norm()
        })
        .fold(0.0, f64::max);
    println!("sup of |p| on the circle ~ {sup:.6}");

    let line = Correspondence::standard(1);
    for lambda in [C64::new(0.5, 0.0), C64::new(0.0, 0.9), C64::new(-0.7, 0.7)] {
        let pair = CovariantPair::new(&line, &Representation::scalar(1), ComplexMatrix::from_element(1, 1, lambda))?;
        let value = pair.integrated_form(&p)?[(0, 0)];
        println!("p({lambda}) = {value:.6}, |p| = {:.6}", value.norm());
    }

    let jordan = ComplexMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    let pair = CovariantPair::new(&line, &Representation::scalar(2), jordan)?;
    println!("||p(J)|| = {:.6} <= {sup:.6}", operator_norm(&pair.integrated_form(&p)?));
    Ok(())
}
