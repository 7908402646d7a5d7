use std::sync::Arc;
use std::time::Instant;
use modp_gl2_core::cind::CindCtx;
use modp_gl2_core::gl2::Gl2Ctx;
use modp_gl2_core::localring::{Backend, FieldCtx, Fq, LocalRingCtx};
use modp_gl2_core::oracle::bfs_kernel_dims;
use modp_gl2_core::quotient::QuotientSpace;
use modp_gl2_core::weights::Weight;

fn main() {
    let cases: Vec<(u64, usize, Vec<usize>, usize, usize, Backend)> = vec![
        (2, 1, vec![1], 3, 1, Backend::EqualChar),
        (3, 1, vec![2], 3, 1, Backend::EqualChar),
        (3, 1, vec![2], 3, 1, Backend::MixedChar),
        (2, 2, vec![1, 1], 2, 1, Backend::EqualChar),
        (5, 1, vec![3], 2, 1, Backend::EqualChar),
        (3, 2, vec![1, 1], 2, 0, Backend::EqualChar),
        (3, 2, vec![2, 2], 2, 0, Backend::EqualChar),
    ];
    for (p, f, r, n, slack, backend) in cases {
        let field = Arc::new(FieldCtx::new(p, f, f).unwrap());
        let ring = LocalRingCtx::new(field.clone(), backend, n + slack + 5).unwrap();
        let g2 = Gl2Ctx::new(ring);
        let w = Arc::new(Weight::new(field.clone(), r.clone(), 0, Fq::ONE).unwrap());
        let ctx = CindCtx::new(g2, w).unwrap();
        let k = ctx.field();
        let poly = vec![k.neg(Fq::ONE), Fq::ONE];
        let qs = QuotientSpace::make(ctx.clone(), poly.clone(), vec![], n, slack).unwrap();
        let t = Instant::now();
        let (od, full) = bfs_kernel_dims(&ctx, &poly, &[], n, slack).unwrap();
        println!(
            "p={p} f={f} r={r:?} n={n} slack={slack} {backend:?}: oracle={od} kernel={} (full {full}) in {:?}",
            qs.kernel_dim(n), t.elapsed()
        );
    }
}
