use std::sync::Arc;
use std::time::Instant;
use modp_gl2_core::cind::CindCtx;
use modp_gl2_core::diagram::d1_compute;
use modp_gl2_core::gl2::Gl2Ctx;
use modp_gl2_core::localring::{Backend, FieldCtx, Fq, LocalRingCtx};
use modp_gl2_core::quotient::QuotientSpace;
use modp_gl2_core::weights::Weight;

fn main() {
    for (r, lambda) in [(1usize, 1i64), (4, 1)] {
        let field = Arc::new(FieldCtx::new(5, 2, 2).unwrap());
        let ring = LocalRingCtx::new(field.clone(), Backend::EqualChar, 10).unwrap();
        let g2 = Gl2Ctx::new(ring);
        let w = Arc::new(Weight::new(field.clone(), vec![r, r], 0, Fq::ONE).unwrap());
        let ctx = CindCtx::new(g2, w).unwrap();
        let k = ctx.field();
        let poly = vec![k.neg(k.from_int(lambda)), Fq::ONE];
        let t = Instant::now();
        let qs = QuotientSpace::make(ctx.clone(), poly, vec![], 6, 1).unwrap();
        println!("quotient_make r=({r},{r}) λ={lambda}: {:?}", t.elapsed());
        let t = Instant::now();
        let d1 = d1_compute(&qs, 5).unwrap();
        println!("d1 r=({r},{r}) λ={lambda}: dim={} growth={:?} in {:?}", d1.basis.dim(), d1.growth, t.elapsed());
    }
}
