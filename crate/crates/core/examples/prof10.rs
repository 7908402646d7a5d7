use std::sync::Arc;
use modp_gl2_core::cind::{CindCtx, InducedElement, TreeSide};
use modp_gl2_core::gl2::Gl2Ctx;
use modp_gl2_core::localring::{Backend, FieldCtx, Fq, LocalRingCtx};
use modp_gl2_core::quotient::QuotientSpace;
use modp_gl2_core::weights::Weight;

fn main() {
    for q in [2u64, 3] {
        for r in 0..q as usize {
            for deg in [1usize, 2] {
                let field = Arc::new(FieldCtx::new(q, 1, 1).unwrap());
                let ring = LocalRingCtx::new(field.clone(), Backend::EqualChar, 14).unwrap();
                let g2 = Gl2Ctx::new(ring);
                let w = Arc::new(Weight::new(field.clone(), vec![r], 0, Fq::ONE).unwrap());
                let ctx = CindCtx::new(g2, w).unwrap();
                let mut poly = vec![Fq::ZERO; deg + 1];
                poly[deg] = Fq::ONE;
                let qs = QuotientSpace::make(ctx.clone(), poly, vec![], 8, 1).unwrap();
                let mut orders = vec![];
                for vert in ctx.ball_vertices(2) {
                    if vert.side != TreeSide::Plus { continue; }
                    for mi in 0..ctx.weight.dim() {
                        let mut v = ctx.weight.zero_vec();
                        v[mi] = Fq::ONE;
                        let e = InducedElement::single(vert.clone(), v);
                        let ord = qs.s_nilpotence_order(&e, 6).unwrap();
                        orders.push(ord);
                    }
                }
                let max = orders.iter().map(|o| o.map_or(99, |m| m)).max().unwrap();
                println!("q={q} r={r} deg={deg}: orders max = {} (99 = not nilpotent by 6); all = {:?}", max, orders.iter().take(14).collect::<Vec<_>>());
            }
        }
    }
}
