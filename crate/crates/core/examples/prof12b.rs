use std::sync::Arc;
use std::time::Instant;
use modp_gl2_core::cind::{CindCtx, InducedElement, TreeSide, VertexRep};
use modp_gl2_core::gl2::Gl2Ctx;
use modp_gl2_core::localring::{Backend, FieldCtx, Fq, LocalRingCtx};
use modp_gl2_core::oracle::bfs_kernel_dims;
use modp_gl2_core::quotient::QuotientSpace;
use modp_gl2_core::weights::Weight;

fn main() {
    // q = 25 spot check
    {
        let field = Arc::new(FieldCtx::new(5, 2, 2).unwrap());
        let ring = LocalRingCtx::new(field.clone(), Backend::EqualChar, 8).unwrap();
        let g2 = Gl2Ctx::new(ring);
        let w = Arc::new(Weight::new(field.clone(), vec![1, 1], 0, Fq::ONE).unwrap());
        let ctx = CindCtx::new(g2, w).unwrap();
        let k = ctx.field();
        let poly = vec![k.neg(Fq::ONE), Fq::ONE];
        let qs = QuotientSpace::make(ctx.clone(), poly.clone(), vec![], 1, 0).unwrap();
        let t = Instant::now();
        let (od, _) = bfs_kernel_dims(&ctx, &poly, &[], 1, 0).unwrap();
        println!("q=25 spot: oracle={od} kernel={} in {:?}", qs.kernel_dim(1), t.elapsed());
    }
    // special series oracle
    for p in [2u64, 3] {
        let field = Arc::new(FieldCtx::new(p, 1, 1).unwrap());
        let ring = LocalRingCtx::new(field.clone(), Backend::EqualChar, 10).unwrap();
        let g2 = Gl2Ctx::new(ring);
        let w = Arc::new(Weight::new(field.clone(), vec![(p - 1) as usize], 0, Fq::ONE).unwrap());
        let ctx = CindCtx::new(g2, w).unwrap();
        let k = ctx.field();
        let poly = vec![k.neg(Fq::ONE), Fq::ONE];
        let v0 = ctx.weight.i1_line().unwrap();
        let mut rel = InducedElement::single(VertexRep::base(TreeSide::Plus), v0.clone());
        ctx.add_term(&mut rel, VertexRep::base(TreeSide::Minus), &v0, Fq::ONE);
        let t = Instant::now();
        let qs = QuotientSpace::make(ctx.clone(), poly.clone(), vec![rel.clone()], 3, 2).unwrap();
        println!("special p={p}: quotient make in {:?}", t.elapsed());
        let t = Instant::now();
        let (od, _) = bfs_kernel_dims(&ctx, &poly, &[rel], 3, 2).unwrap();
        println!("special p={p}: oracle={od} kernel={} in {:?}", od_check(&qs), t.elapsed());
        fn od_check(q: &QuotientSpace) -> usize { q.kernel_dim(3) }
        let _ = od;
    }
}
