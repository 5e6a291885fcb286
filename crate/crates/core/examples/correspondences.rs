//! Build correspondences, check their axioms, and form balanced tensor
//! products.

use cstar_morita::correspondence::internal_tensor;
use cstar_morita::instances::matrices_over_diagonal;
use cstar_morita::{Correspondence, EquivalenceBimodule, StarAlgebra};

fn main() -> cstar_morita::Result<()> {
    let line = Correspondence::standard(3);
    println!("C^3 over C: dim {}, axioms\n{}", line.vec_dim, line.check_axioms(1e-10));

    // M_2 as a bimodule over the diagonal subalgebra D_2
    let f = matrices_over_diagonal(2);
    println!("M_2 over D_2: dim {}, axioms\n{}", f.vec_dim, f.check_axioms(1e-10));
    for k in 2..=3 {
        let mut power = f.clone();
        for _ in 1..k {
            power = internal_tensor(&f, &power)?.module;
        }
        println!("  tensor power {k}: dim {}", power.vec_dim);
    }

    let x = EquivalenceBimodule::column(2);
    println!("column bimodule C^2 between M_2 and C:\n{}", x.check(1e-10));
    let dual = x.dual();
    println!("its dual has dim {}", dual.dim());

    let d3 = StarAlgebra::diagonal(3);
    let over_itself = Correspondence::over_itself(&d3);
    println!("D_3 over itself: dim {}, axioms\n{}", over_itself.vec_dim, over_itself.check_axioms(1e-10));
    Ok(())
}
