//! Independent kernel-dimension oracle.
//!
//! Where the quotient construction reasons gradedly about P(T), this
//! closure works from first principles: start from P(T) applied to the
//! base blocks together with the extra relations, translate by a
//! generating set of the group action (the K/I coset representatives,
//! digit generators of the Iwahori subgroup, and Π), keep whatever stays
//! inside the working ball, and span-close until stable. Dimensions are
//! read off a plain dense Gaussian elimination that shares nothing with
//! the production reduction path.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cind::{CindCtx, InducedElement, TreeSide, VertexRep};
use crate::error::Result;
use crate::gl2::SubgroupSpec;
use crate::localring::Fq;

/// Dense echelon with pivot columns ordered radius-major descending, kept
/// deliberately simple and self-contained.
struct DenseEchelon<'a> {
    ctx: &'a CindCtx,
    /// coordinate order: index 0 is the largest coordinate
    coords: Vec<(VertexRep, usize)>,
    index: BTreeMap<(VertexRep, usize), usize>,
    rows: Vec<Vec<Fq>>,
    pivots: Vec<usize>,
}

impl<'a> DenseEchelon<'a> {
    fn new(ctx: &'a CindCtx, radius: usize) -> DenseEchelon<'a> {
        let dim = ctx.weight.dim();
        let mut coords: Vec<(VertexRep, usize)> = vec![];
        for vert in ctx.ball_vertices(radius) {
            for mi in 0..dim {
                coords.push((vert.clone(), mi));
            }
        }
        // radius-major descending, then side, path, monomial descending to
        // mirror the production pivot order without sharing its code
        coords.sort_by(|a, b| {
            let ka = (a.0.radius(), a.0.side == TreeSide::Minus, a.0.path.clone(), a.1);
            let kb = (b.0.radius(), b.0.side == TreeSide::Minus, b.0.path.clone(), b.1);
            kb.cmp(&ka)
        });
        let index = coords.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        DenseEchelon { ctx, coords, index, rows: vec![], pivots: vec![] }
    }

    fn densify(&self, x: &InducedElement) -> Option<Vec<Fq>> {
        let mut row = vec![Fq::ZERO; self.coords.len()];
        for (vert, v) in &x.terms {
            for (mi, &c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let idx = self.index.get(&(vert.clone(), mi))?;
                row[*idx] = c;
            }
        }
        Some(row)
    }

    /// Insert; returns false when dependent or out of the ball.
    fn insert(&mut self, x: &InducedElement) -> bool {
        let k = self.ctx.field();
        let Some(mut row) = self.densify(x) else { return false };
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            let c = row[p];
            if !c.is_zero() {
                let nc = k.neg(c);
                for (slot, &v) in row.iter_mut().zip(r) {
                    *slot = k.add(*slot, k.mul(nc, v));
                }
            }
        }
        let Some(p) = row.iter().position(|c| !c.is_zero()) else { return false };
        let inv = k.inv(row[p]).expect("pivot nonzero");
        for c in row.iter_mut() {
            *c = k.mul(*c, inv);
        }
        self.rows.push(row);
        self.pivots.push(p);
        true
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Dimension of (row space) ∩ ball_radius: rows are re-echelonized so
    /// pivots are canonical; with the radius-major coordinate order a row
    /// reduced to have its leading coordinate within the ball lies within
    /// the ball entirely.
    fn dim_within(&self, radius: usize) -> usize {
        let k = self.ctx.field();
        // full reduction pass to make pivots canonical
        let mut rows = self.rows.clone();
        let pivots = self.pivots.clone();
        let order: Vec<usize> = {
            let mut idx: Vec<usize> = (0..rows.len()).collect();
            idx.sort_by_key(|&i| pivots[i]);
            idx
        };
        let mut reduced: Vec<Vec<Fq>> = vec![];
        let mut red_pivots: Vec<usize> = vec![];
        for &i in &order {
            let mut row = rows[i].clone();
            for (r, &p) in reduced.iter().zip(&red_pivots) {
                let c = row[p];
                if !c.is_zero() {
                    let nc = k.neg(c);
                    for (slot, &v) in row.iter_mut().zip(r) {
                        *slot = k.add(*slot, k.mul(nc, v));
                    }
                }
            }
            if let Some(p) = row.iter().position(|c| !c.is_zero()) {
                let inv = k.inv(row[p]).expect("pivot nonzero");
                for c in row.iter_mut() {
                    *c = k.mul(*c, inv);
                }
                reduced.push(row);
                red_pivots.push(p);
            }
        }
        rows.clear();
        red_pivots
            .iter()
            .filter(|&&p| self.coords[p].0.radius() <= radius)
            .count()
    }
}

/// BFS span-closure estimate of dim(R(σ,π) ∩ ball_n), computed at working
/// radius n + slack and intersected back. Returns (dim within ball_n,
/// dim at the working radius).
pub fn bfs_kernel_dims(
    ctx: &Arc<CindCtx>,
    poly: &[Fq],
    extra_rels: &[InducedElement],
    n_ball: usize,
    slack: usize,
) -> Result<(usize, usize)> {
    let working = n_ball + slack;
    let mut ech = DenseEchelon::new(ctx, working);
    // seed: P(T) on the two base blocks, plus the extra relations
    let dim = ctx.weight.dim();
    let mut queue: Vec<InducedElement> = vec![];
    for side in [TreeSide::Plus, TreeSide::Minus] {
        for mi in 0..dim {
            let mut v = ctx.weight.zero_vec();
            v[mi] = Fq::ONE;
            let e = InducedElement::single(VertexRep::base(side), v);
            let pe = ctx.apply_poly(poly, &e);
            if !pe.is_zero() && pe.radius() <= working && ech.insert(&pe) {
                queue.push(pe);
            }
        }
    }
    for rel in extra_rels {
        if rel.radius() <= working && ech.insert(rel) {
            queue.push(rel.clone());
        }
    }
    // translation generators: K/I coset representatives, Iwahori digit
    // generators deep enough for the ball, and Π
    let mut gens = vec![ctx.g2.pi_elt()];
    for li in 0..ctx.q() {
        gens.push(ctx.g2.k_coset_rep(ctx.field().residue_elem(li)));
    }
    gens.extend(ctx.g2.subgroup_generators(SubgroupSpec::I, working + 2)?);
    while let Some(v) = queue.pop() {
        for g in &gens {
            let gv = ctx.g_act(g, &v)?;
            if gv.radius() <= working && ech.insert(&gv) {
                queue.push(gv);
            }
        }
    }
    Ok((ech.dim_within(n_ball), ech.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cind::tests::make_ctx;
    use crate::localring::Backend;
    use crate::quotient::QuotientSpace;

    #[test]
    fn oracle_agrees_with_graded_kernel() {
        for (p, r, lambda, backend) in [
            (2u64, vec![0usize], 1i64, Backend::EqualChar),
            (2, vec![1], 0, Backend::EqualChar),
            (3, vec![1], 1, Backend::MixedChar),
        ] {
            let ctx = make_ctx(p, 1, &r, 10, backend, 1);
            let k = ctx.field();
            let poly = vec![k.neg(k.from_int(lambda)), Fq::ONE];
            for n in 2..=3usize {
                let q = QuotientSpace::make(ctx.clone(), poly.clone(), vec![], n, 2).unwrap();
                let (oracle_dim, _) = bfs_kernel_dims(&ctx, &poly, &[], n, 2).unwrap();
                assert_eq!(
                    q.kernel_dim(n),
                    oracle_dim,
                    "p={p} r={r:?} λ={lambda} n={n} backend={backend:?}"
                );
            }
        }
    }

    #[test]
    fn oracle_agrees_on_special_series() {
        let ctx = make_ctx(2, 1, &[1], 10, Backend::EqualChar, 1);
        let k = ctx.field();
        let poly = vec![k.neg(Fq::ONE), Fq::ONE];
        let v0 = ctx.weight.i1_line().unwrap();
        let mut rel = InducedElement::single(VertexRep::base(TreeSide::Plus), v0.clone());
        ctx.add_term(&mut rel, VertexRep::base(TreeSide::Minus), &v0, Fq::ONE);
        let n = 3;
        let q = QuotientSpace::make(ctx.clone(), poly.clone(), vec![rel.clone()], n, 2).unwrap();
        let (oracle_dim, _) = bfs_kernel_dims(&ctx, &poly, &[rel], n, 2).unwrap();
        assert_eq!(q.kernel_dim(n), oracle_dim);
    }
}
