//! A Morita context `E = X ⊗ F ⊗ X̃` and the transform of points of the
//! dual ball, which is an isometric bijection onto the dual of `E`.

use cstar_morita::instances::random_instance;
use cstar_morita::morita::MoritaContext;
use cstar_morita::representation::Representation;
use cstar_morita::{Correspondence, EquivalenceBimodule};

fn main() -> cstar_morita::Result<()> {
    let ctx = MoritaContext::induced(&Correspondence::standard(2), &EquivalenceBimodule::column(3))?;
    println!("column context: dim E = {}, residual {:e}", ctx.e.vec_dim, ctx.check(1e-10)?.max());
    let rep = ctx.verify_functor(&Representation::scalar(2), 20, 7)?;
    println!(
        "  dim F^sigma {} -> dim E^(sigma^X) {}, isometry gap {:e}, intertwining {:e}",
        rep.dim_f_dual, rep.dim_e_dual, rep.max_isometry_gap, rep.max_intertwining
    );

    for seed in 0..4 {
        let inst = random_instance(seed)?;
        let rep = inst.context.verify_functor(&inst.sigma, 10, seed)?;
        println!(
            "random context {seed}: blocks {:?}/{:?}, dims {} -> {}, isometry gap {:e}",
            inst.shape.left_blocks, inst.shape.right_blocks, rep.dim_f_dual, rep.dim_e_dual, rep.max_isometry_gap
        );
    }
    Ok(())
}
