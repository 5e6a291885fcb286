//! Canonical stabilization of a correspondence on a truncated Fock space,
//! and the reconstruction operator compared with its direct assembly.

use cstar_morita::algebra::{operator_norm, r};
use cstar_morita::instances::matrices_over_diagonal;
use cstar_morita::morita::{canonical_stabilization, popescu_form};
use cstar_morita::representation::{CovariantPair, Representation};
use cstar_morita::{ComplexMatrix, Correspondence};

fn main() -> cstar_morita::Result<()> {
    for (label, f) in [("C", Correspondence::standard(1)), ("C^2", Correspondence::standard(2)), ("M_2 over D_2", matrices_over_diagonal(2))] {
        let st = canonical_stabilization(&f, 3)?;
        println!("{label}: dim X = {}\n{}", st.dim(), st.check(3, 1));
    }

    let (d, h, cap) = (2, 2, 3);
    let st = canonical_stabilization(&Correspondence::standard(d), cap)?;
    let row = ComplexMatrix::from_fn(h, d * h, |i, j| r(0.3 * ((i + 2 * j) % 3) as f64 - 0.2));
    let row = &row * r(0.9 / operator_norm(&row));
    let ts: Vec<ComplexMatrix> = (0..d).map(|i| row.columns(i * h, h).into_owned()).collect();
    let pair = CovariantPair::new(&st.fock.base, &Representation::scalar(h), row.clone())?;
    let rec = st.reconstruction_operator(&pair)?;
    let direct = popescu_form(&ts, cap)?;
    println!(
        "reconstruction for d={d}, dim H={h}, cap {cap}: size {}, difference {:e}, norm {:.4}",
        rec.matrix.nrows(),
        operator_norm(&(&rec.matrix - direct)),
        operator_norm(&rec.matrix)
    );
    Ok(())
}
