//! Truncated Fock space: level dimensions, creation operators, and the
//! disc-algebra norm of `1 + z` approaching 2.

use cstar_morita::algebra::{operator_norm, r, C64};
use cstar_morita::fock::{fock_norm, TensorPolynomial, TruncatedFock};
use cstar_morita::{ComplexVector, Correspondence};

fn main() -> cstar_morita::Result<()> {
    let e = Correspondence::standard(2);
    let fock = TruncatedFock::new(&e, 3)?;
    println!("levels of F(C^2) up to 3: {:?}", fock.level_dims());

    let xi = ComplexVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
    let t = fock.creation_operator(1, &xi)?;
    println!("||T_xi|| = {:.6} (|xi| = {:.6})", operator_norm(&t), xi.norm());

    let line = Correspondence::standard(1);
    let p = TensorPolynomial::scalar(&[r(1.0), r(1.0)]);
    for cap in [1, 3, 10, 50, 200] {
        println!("||1 + z|| on levels 0..={cap}: {:.8}", fock_norm(&line, &p, cap)?);
    }
    Ok(())
}
