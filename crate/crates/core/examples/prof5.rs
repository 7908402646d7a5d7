use std::sync::Arc;
use std::time::Instant;
use modp_gl2_core::cind::CindCtx;
use modp_gl2_core::gl2::Gl2Ctx;
use modp_gl2_core::localring::{Backend, FieldCtx, Fq, LocalRingCtx};
use modp_gl2_core::quotient::rn_plus_u_invariants;
use modp_gl2_core::weights::Weight;

fn main() {
    for r in [0usize, 2, 4] {
        let field = Arc::new(FieldCtx::new(5, 2, 2).unwrap());
        let ring = LocalRingCtx::new(field.clone(), Backend::EqualChar, 9).unwrap();
        let g2 = Gl2Ctx::new(ring);
        let w = Arc::new(Weight::new(field.clone(), vec![r, r], 0, Fq::ONE).unwrap());
        let ctx = CindCtx::new(g2, w).unwrap();
        for n in [3usize, 4] {
            let t = Instant::now();
            let (dim, gen) = rn_plus_u_invariants(&ctx, n).unwrap();
            println!("r=({r},{r}) n={n}: dim={dim} terms={} in {:?}", gen.num_terms(), t.elapsed());
        }
    }
}
