//! The completely positive map of a covariant pair, its induction through a
//! Morita context, and the absolutely continuous subspace on both sides.

use cstar_morita::accontinuity::{
    ac_subspace_of_map, verify_ac_transform, verify_cp_induction, CPMap, DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL,
};
use cstar_morita::algebra::r;
use cstar_morita::morita::MoritaContext;
use cstar_morita::representation::{CovariantPair, Representation};
use cstar_morita::{ComplexMatrix, Correspondence, EquivalenceBimodule};

fn main() -> cstar_morita::Result<()> {
    let ctx = MoritaContext::induced(&Correspondence::standard(1), &EquivalenceBimodule::column(2))?;
    let f = Correspondence::standard(1);
    for t in [0.5, 1.0] {
        let pair = CovariantPair::new(&f, &Representation::scalar(1), ComplexMatrix::from_element(1, 1, r(t)))?;
        println!("t = {t}: cp induction\n{}", verify_cp_induction(&ctx, &pair, None)?);
        let out = verify_ac_transform(&ctx, &pair, DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL)?;
        println!(
            "  ac rank {} of {} before, {} of {} after\n{}",
            out.source.rank(),
            out.source.projection.nrows(),
            out.target.rank(),
            out.target.projection.nrows(),
            out.residuals
        );
    }

    // a row whose map has both a decaying and a peripheral part
    let e12 = ComplexMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0].map(r));
    let e22 = ComplexMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0].map(r));
    let phi = CPMap::from_row(&[e12, e22]);
    let ac = ac_subspace_of_map(&phi, DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL)?;
    println!(
        "row (e12, e22): spectral radius {:.3}, peripheral dim {}, ac projection diag [{:.3}, {:.3}], indeterminate {}",
        ac.spectral_radius,
        ac.peripheral_dim,
        ac.projection[(0, 0)].re,
        ac.projection[(1, 1)].re,
        ac.indeterminate
    );
    Ok(())
}
