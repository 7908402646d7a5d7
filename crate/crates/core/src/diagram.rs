//! The canonical-diagram layer: D₁ = I⁺ ∩ I⁻ via the Φ-images of the
//! kernel, D₀ = ⟨K·D₁⟩, the level filtration, the boundary map of the
//! associated complex, and the standard-presentation edge relations.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cind::{CindCtx, InducedElement, TreeSide, VertexRep};
use crate::error::{Error, Result};
use crate::gl2::{GroupElement, SubgroupSpec};
use crate::localring::Fq;
use crate::quotient::QuotientSpace;
use crate::subspace::{coeff_at, Coord, SubspaceBasis};

#[derive(Debug, Clone)]
pub struct D1Result {
    pub basis: SubspaceBasis,
    /// (radius, dim of the Φ-image span of kernel vectors up to that radius)
    pub growth: Vec<(usize, usize)>,
    /// the last radius step added nothing
    pub stable: bool,
}

/// span{Φ_σ(f) : f over kernel vectors of radius ≤ n}; at ball level this
/// is I⁺(σ,π) ∩ I⁻(σ,π).
pub fn d1_compute(q: &QuotientSpace, n: usize) -> Result<D1Result> {
    let ctx = &q.cind;
    if n + 1 > q.n_ball {
        return Err(Error::RadiusOverflow { needed: n + 1, available: q.n_ball });
    }
    let deg = q.deg();
    let dim = ctx.weight.dim();
    let mut basis = SubspaceBasis::new();
    let mut growth = vec![];
    for radius in 0..=n {
        // polynomial kernel generators whose image has radius `radius`
        let mut batch: Vec<(VertexRep, usize)> = vec![];
        if radius >= deg {
            let r_e = radius - deg;
            for side in [TreeSide::Plus, TreeSide::Minus] {
                // Plus generators only touch the Minus side when P(T) can
                // cross the base vertex, i.e. when their radius < deg
                if side == TreeSide::Plus && r_e >= deg {
                    continue;
                }
                let grade = match side {
                    TreeSide::Plus => r_e,
                    TreeSide::Minus => {
                        if r_e == 0 {
                            continue;
                        }
                        r_e - 1
                    }
                };
                for path in ctx.all_paths(grade) {
                    let vert = VertexRep { side, path };
                    for mi in 0..dim {
                        batch.push((vert.clone(), mi));
                    }
                }
            }
        }
        let chunks: Vec<SubspaceBasis> = batch
            .par_chunks(1024.max(batch.len() / 64).max(1))
            .map(|chunk| {
                let mut local = SubspaceBasis::new();
                for (vert, mi) in chunk {
                    let mut v = ctx.weight.zero_vec();
                    v[*mi] = Fq::ONE;
                    let e = InducedElement::single(vert.clone(), v);
                    let pe = ctx.apply_poly(&q.poly, &e);
                    let (_, minus) = ctx.split_pm(&pe);
                    if minus.is_zero() {
                        continue;
                    }
                    let phi = q.reduce(&minus).expect("kernel generator stays in the ball");
                    local.insert(ctx, &phi);
                }
                local
            })
            .collect();
        for c in chunks {
            basis.insert_all(ctx, c.vecs.iter());
        }
        // extra kernel vectors that live at this radius
        for vec in &q.extra_kernel_basis().vecs {
            if vec.radius() == radius {
                let (_, minus) = ctx.split_pm(vec);
                let phi = q.reduce(&minus)?;
                basis.insert(ctx, &phi);
            }
        }
        growth.push((radius, basis.dim()));
    }
    let stable = n >= 1 && growth[n].1 == growth[n - 1].1;
    Ok(D1Result { basis, growth, stable })
}

#[derive(Debug, Clone)]
pub struct D0Result {
    pub basis: SubspaceBasis,
    pub iterations: usize,
    pub truncated: bool,
}

/// ⟨K·D₁⟩ inside the ball quotient: closure under the K/I coset operators
/// and Iwahori digit generators, iterated to a fixpoint.
pub fn d0_compute(q: &QuotientSpace, d1: &SubspaceBasis, radius: usize) -> Result<D0Result> {
    let ctx = &q.cind;
    let mut ops: Vec<GroupElement> = vec![];
    for li in 0..ctx.q() {
        ops.push(ctx.g2.k_coset_rep(ctx.field().residue_elem(li)));
    }
    ops.extend(ctx.g2.subgroup_generators(SubgroupSpec::I, radius + 2)?);
    let mut basis = d1.clone();
    let mut frontier: Vec<InducedElement> = d1.vecs.clone();
    let mut iterations = 0usize;
    let cap = 4 * (q.ball_dim(radius) + 2);
    let mut truncated = false;
    while !frontier.is_empty() {
        iterations += 1;
        if iterations > cap {
            truncated = true;
            break;
        }
        let mut next = vec![];
        for v in frontier {
            for g in &ops {
                let gv = q.reduce(&ctx.g_act(g, &v)?)?;
                if basis.insert(ctx, &gv) {
                    next.push(gv);
                }
            }
        }
        frontier = next;
    }
    Ok(D0Result { basis, iterations, truncated })
}

/// The diagram data of a quotient at ball level.
#[derive(Debug, Clone)]
pub struct Diagram {
    pub d0: SubspaceBasis,
    pub d1: SubspaceBasis,
    pub d1_growth: Vec<(usize, usize)>,
    pub d1_stable: bool,
    pub d0_truncated: bool,
}

pub fn diagram_compute(q: &QuotientSpace, radius: usize) -> Result<Diagram> {
    let d1 = d1_compute(q, radius)?;
    let d0 = d0_compute(q, &d1.basis, radius)?;
    // D1 must sit inside D0 and be Π-stable at ball level
    for v in &d1.basis.vecs {
        if !d0.basis.contains(&q.cind, v) {
            return Err(Error::Construction("D1 is not contained in D0".into()));
        }
        let piv = q.reduce(&q.cind.act_pi(v))?;
        if !d1.basis.contains(&q.cind, &piv) {
            return Err(Error::Construction("D1 is not Π-stable at ball level".into()));
        }
    }
    Ok(Diagram {
        d0: d0.basis,
        d1: d1.basis,
        d1_growth: d1.growth,
        d1_stable: d1.stable,
        d0_truncated: d0.truncated,
    })
}

/// δ₋₁(g) = (-1)^(val det g), the character of N twisting the boundary
/// source.
pub fn delta_minus_one(q: &QuotientSpace, g: &GroupElement) -> Result<Fq> {
    let k = q.cind.field();
    let v = q.cind.g2.det_valuation(g)?;
    Ok(k.pow(k.neg(Fq::ONE), v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Finite(usize),
    /// not attained within the requested bound
    BeyondBound,
}

#[derive(Debug)]
pub struct LevelCtx {
    /// I^{+,k} for k = 0..=bound
    pub filtration: Vec<SubspaceBasis>,
    pub iplus: SubspaceBasis,
    pub radius: usize,
}

/// Build the filtration I^{+,k} = I⁺ ∩ ⟨K·Π(I^{+,k-1})⟩ at ball level.
pub fn level_filtration(q: &QuotientSpace, radius: usize, bound: usize) -> Result<LevelCtx> {
    let ctx = &q.cind;
    if radius + 2 > q.n_ball {
        return Err(Error::RadiusOverflow { needed: radius + 2, available: q.n_ball });
    }
    let (iplus, _) = q.i_pm_images(radius)?;
    let d1 = d1_compute(q, radius)?;
    let mut filtration = vec![d1.basis];
    for _ in 1..=bound {
        let prev = filtration.last().unwrap();
        let mut pi_prev = SubspaceBasis::new();
        for v in &prev.vecs {
            pi_prev.insert(ctx, &q.reduce(&ctx.act_pi(v))?);
        }
        let closure = d0_compute(q, &pi_prev, radius)?;
        let next = SubspaceBasis::intersect(ctx, &iplus, &closure.basis);
        // the filtration is increasing; keep the union to be safe against
        // truncation artifacts
        let merged = SubspaceBasis::sum(ctx, prev, &next);
        filtration.push(merged);
    }
    Ok(LevelCtx { filtration, iplus, radius })
}

impl LevelCtx {
    fn level_in_iplus(&self, q: &QuotientSpace, v: &InducedElement) -> Level {
        for (k, f) in self.filtration.iter().enumerate() {
            if f.contains(&q.cind, v) {
                return Level::Finite(k);
            }
        }
        Level::BeyondBound
    }

    /// ℓ_σ(v) via the canonical split of the reduced representative.
    pub fn level(&self, q: &QuotientSpace, v: &InducedElement) -> Result<Level> {
        let ctx = &q.cind;
        let red = q.reduce(v)?;
        if red.is_zero() {
            return Ok(Level::Finite(0));
        }
        let (plus, minus) = ctx.split_pm(&red);
        let mut levels = vec![];
        if !plus.is_zero() {
            levels.push(self.level_in_iplus(q, &q.reduce(&plus)?));
        }
        if !minus.is_zero() {
            // ℓ(v⁻) := ℓ(Π(v⁻)) with Π(v⁻) ∈ I⁺
            let piv = q.reduce(&ctx.act_pi(&minus))?;
            levels.push(self.level_in_iplus(q, &piv));
        }
        Ok(levels
            .into_iter()
            .fold(Level::Finite(0), |acc, l| match (acc, l) {
                (Level::BeyondBound, _) | (_, Level::BeyondBound) => Level::BeyondBound,
                (Level::Finite(a), Level::Finite(b)) => Level::Finite(a.max(b)),
            }))
    }
}

/// Sparse vectors over a fixed subspace basis: elements of the compact
/// induction of the D₀-fiber, used by the boundary map and the
/// edge-relation generators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InducedOverBase {
    pub terms: BTreeMap<VertexRep, Vec<Fq>>,
}

impl InducedOverBase {
    pub fn zero() -> InducedOverBase {
        InducedOverBase::default()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn radius(&self) -> usize {
        self.terms.keys().map(|v| v.radius()).max().unwrap_or(0)
    }
}

/// Express x in the coordinates of an echelonized basis; None when x is
/// outside the span.
pub fn express_in_basis(ctx: &CindCtx, basis: &SubspaceBasis, x: &InducedElement) -> Option<Vec<Fq>> {
    let k = ctx.field();
    let mut rest = x.clone();
    let mut coords = vec![Fq::ZERO; basis.dim()];
    for (i, (vec, pivot)) in basis.vecs.iter().zip(basis.pivots()).enumerate() {
        let c = coeff_at(&rest, pivot);
        if !c.is_zero() {
            coords[i] = c;
            ctx.axpy(&mut rest, k.neg(c), vec);
        }
    }
    rest.is_zero().then_some(coords)
}

/// The environment for computing with cInd_{KZ}^G D₀ at ball level: the
/// fiber is the D₀ subspace of π and KZ acts through matrices computed in
/// the quotient.
pub struct OverBaseCtx<'a> {
    pub q: &'a QuotientSpace,
    pub base: &'a SubspaceBasis,
}

impl<'a> OverBaseCtx<'a> {
    pub fn new(q: &'a QuotientSpace, base: &'a SubspaceBasis) -> OverBaseCtx<'a> {
        OverBaseCtx { q, base }
    }

    fn fiber_dim(&self) -> usize {
        self.base.dim()
    }

    /// Matrix of k ∈ KZ on the base fiber.
    fn fiber_matrix(&self, k_elt: &GroupElement) -> Result<Vec<Vec<Fq>>> {
        let ctx = &self.q.cind;
        let mut cols = vec![];
        for b in &self.base.vecs {
            let moved = self.q.reduce(&ctx.g_act(k_elt, b)?)?;
            let coords = express_in_basis(ctx, self.base, &moved).ok_or_else(|| {
                Error::Domain("base subspace is not stable under the tail action".into())
            })?;
            cols.push(coords);
        }
        Ok(cols)
    }

    pub fn add_term(&self, out: &mut InducedOverBase, vertex: VertexRep, fiber: &[Fq], scale: Fq) {
        let k = self.q.cind.field();
        if scale.is_zero() || fiber.iter().all(|c| c.is_zero()) {
            return;
        }
        let entry = out.terms.entry(vertex).or_insert_with(|| vec![Fq::ZERO; self.fiber_dim()]);
        for (slot, &c) in entry.iter_mut().zip(fiber) {
            *slot = k.add(*slot, k.mul(c, scale));
        }
        let all_zero = out
            .terms
            .iter()
            .filter(|(_, v)| v.iter().all(|c| c.is_zero()))
            .map(|(key, _)| key.clone())
            .collect::<Vec<_>>();
        for key in all_zero {
            out.terms.remove(&key);
        }
    }

    /// g·x by the canonical-word factorization, exactly as for weights.
    pub fn g_act(&self, g: &GroupElement, x: &InducedOverBase) -> Result<InducedOverBase> {
        let ctx = &self.q.cind;
        let k = ctx.field();
        let mut out = InducedOverBase::zero();
        for (vert, fiber) in &x.terms {
            let h = ctx.vertex_elt(vert)?;
            let gh = ctx.g2.mul(g, &h)?;
            let w = ctx.g2.cartan_word(&gh)?;
            let path: smallvec::SmallVec<[u8; 16]> = w
                .digits
                .iter()
                .map(|&d| ctx.field().residue_index(d).expect("residue digit") as u8)
                .collect();
            let side = match w.side {
                crate::gl2::Side::Plus => TreeSide::Plus,
                crate::gl2::Side::PiSide => TreeSide::Minus,
            };
            let m = self.fiber_matrix(&w.tail)?;
            let mut new_fiber = vec![Fq::ZERO; self.fiber_dim()];
            for (j, col) in m.iter().enumerate() {
                let c = fiber[j];
                if c.is_zero() {
                    continue;
                }
                for (slot, &mc) in new_fiber.iter_mut().zip(col) {
                    *slot = k.add(*slot, k.mul(mc, c));
                }
            }
            self.add_term(&mut out, VertexRep { side, path }, &new_fiber, Fq::ONE);
        }
        Ok(out)
    }

    /// ∂ on a generator: [Id, r(x)] - [Π, r(Π⁻¹·x)] for x in the D₁-fiber.
    pub fn boundary_of_generator(&self, x: &InducedElement) -> Result<InducedOverBase> {
        let ctx = &self.q.cind;
        let k = ctx.field();
        let x_coords = express_in_basis(ctx, self.base, &self.q.reduce(x)?)
            .ok_or_else(|| Error::Domain("boundary argument must lie in the base".into()))?;
        // Π⁻¹x = χ(ϖ)⁻¹·Π·x
        let chi_inv = k.inv(self.q.cind.weight.central)?;
        let pix = self.q.reduce(&ctx.scale(&ctx.act_pi(&self.q.reduce(x)?), chi_inv))?;
        let pix_coords = express_in_basis(ctx, self.base, &pix)
            .ok_or_else(|| Error::Domain("Π⁻¹x must lie in the base".into()))?;
        let mut out = InducedOverBase::zero();
        self.add_term(&mut out, VertexRep::base(TreeSide::Plus), &x_coords, Fq::ONE);
        self.add_term(&mut out, VertexRep::base(TreeSide::Minus), &pix_coords, k.neg(Fq::ONE));
        Ok(out)
    }

    /// g·∂[id, x].
    pub fn boundary_apply(&self, x: &InducedElement, g: &GroupElement) -> Result<InducedOverBase> {
        let b = self.boundary_of_generator(x)?;
        self.g_act(g, &b)
    }

    /// Evaluate the natural map cInd_{KZ}^G D₀ → π on an element.
    pub fn evaluate_to_pi(&self, x: &InducedOverBase) -> Result<InducedElement> {
        let ctx = &self.q.cind;
        let mut out = InducedElement::zero();
        for (vert, fiber) in &x.terms {
            let h = ctx.vertex_elt(vert)?;
            for (j, &c) in fiber.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let moved = ctx.g_act(&h, &self.base.vecs[j])?;
                ctx.axpy(&mut out, c, &moved);
            }
        }
        self.q.reduce(&out)
    }

    /// The edge relations [(ϖ,0;0,1), x] - [id, (ϖ,0;0,1)·x] over a basis
    /// of W ∩ Π(W), where W is the base.
    pub fn r0_generators(&self) -> Result<Vec<InducedOverBase>> {
        let ctx = &self.q.cind;
        let k = ctx.field();
        // W ∩ Π(W)
        let mut piw = SubspaceBasis::new();
        for b in &self.base.vecs {
            piw.insert(ctx, &self.q.reduce(&ctx.act_pi(b))?);
        }
        let inter = SubspaceBasis::intersect(ctx, self.base, &piw);
        let g0 = ctx.g2.g_lambda(ctx.field().zero());
        let mut out = vec![];
        for x in &inter.vecs {
            let coords = express_in_basis(ctx, self.base, x)
                .ok_or_else(|| Error::Domain("intersection escaped the base".into()))?;
            let g0x = self.q.reduce(&ctx.g_act(&g0, x)?)?;
            let g0x_coords = express_in_basis(ctx, self.base, &g0x)
                .ok_or_else(|| Error::Domain("(ϖ,0;0,1)·x escaped the base".into()))?;
            let mut rel = InducedOverBase::zero();
            // vertex of (ϖ,0;0,1) is the digit-0 child of the base vertex
            self.add_term(&mut rel, VertexRep::base(TreeSide::Plus).child(0), &coords, Fq::ONE);
            self.add_term(&mut rel, VertexRep::base(TreeSide::Plus), &g0x_coords, k.neg(Fq::ONE));
            out.push(rel);
        }
        Ok(out)
    }

    /// dim W ∩ Π(W).
    pub fn intersection_dim(&self) -> Result<usize> {
        let ctx = &self.q.cind;
        let mut piw = SubspaceBasis::new();
        for b in &self.base.vecs {
            piw.insert(ctx, &self.q.reduce(&ctx.act_pi(b))?);
        }
        Ok(SubspaceBasis::intersect(ctx, self.base, &piw).dim())
    }
}

/// Echelon span of `InducedOverBase` vectors (coordinates are
/// (vertex, fiber index), radius-major pivots as everywhere else).
#[derive(Debug, Default)]
pub struct OverBaseSpan {
    vecs: Vec<InducedOverBase>,
    pivots: Vec<Coord>,
}

impl OverBaseSpan {
    pub fn new() -> OverBaseSpan {
        OverBaseSpan::default()
    }

    pub fn dim(&self) -> usize {
        self.vecs.len()
    }

    fn leading(x: &InducedOverBase) -> Option<(Coord, Fq)> {
        let mut best: Option<(Coord, Fq)> = None;
        for (vert, v) in &x.terms {
            for (mi, &c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let coord = Coord::new(vert, mi);
                if best.as_ref().is_none_or(|(b, _)| coord > *b) {
                    best = Some((coord, c));
                }
            }
        }
        best
    }

    fn coeff(x: &InducedOverBase, coord: &Coord) -> Fq {
        x.terms
            .get(&coord.vertex())
            .map(|v| v[coord.monomial])
            .unwrap_or(Fq::ZERO)
    }

    fn axpy(ob: &OverBaseCtx, out: &mut InducedOverBase, c: Fq, x: &InducedOverBase) {
        for (vert, v) in &x.terms {
            ob.add_term(out, vert.clone(), v, c);
        }
    }

    pub fn insert(&mut self, ob: &OverBaseCtx, x: &InducedOverBase) -> bool {
        let k = ob.q.cind.field();
        let mut rest = x.clone();
        for (vec, pivot) in self.vecs.iter().zip(&self.pivots) {
            let c = Self::coeff(&rest, pivot);
            if !c.is_zero() {
                let mut nr = rest.clone();
                Self::axpy(ob, &mut nr, k.neg(c), vec);
                rest = nr;
            }
        }
        let Some((pivot, coef)) = Self::leading(&rest) else { return false };
        let mut normalized = InducedOverBase::zero();
        Self::axpy(ob, &mut normalized, k.inv(coef).expect("pivot"), &rest);
        for vec in self.vecs.iter_mut() {
            let c = Self::coeff(vec, &pivot);
            if !c.is_zero() {
                let mut nv = vec.clone();
                Self::axpy(ob, &mut nv, k.neg(c), &normalized);
                *vec = nv;
            }
        }
        let at = self.pivots.partition_point(|p| *p > pivot);
        self.pivots.insert(at, pivot);
        self.vecs.insert(at, normalized);
        true
    }

    pub fn contains(&self, ob: &OverBaseCtx, x: &InducedOverBase) -> bool {
        let k = ob.q.cind.field();
        let mut rest = x.clone();
        for (vec, pivot) in self.vecs.iter().zip(&self.pivots) {
            let c = Self::coeff(&rest, pivot);
            if !c.is_zero() {
                let mut nr = rest.clone();
                Self::axpy(ob, &mut nr, k.neg(c), vec);
                rest = nr;
            }
        }
        rest.is_zero()
    }

    pub fn equals(&self, ob: &OverBaseCtx, other: &OverBaseSpan) -> bool {
        self.dim() == other.dim() && self.vecs.iter().all(|v| other.contains(ob, v))
    }
}

/// Ball-truncated span of the G-translates of a family of
/// `InducedOverBase` generators: closure under Π, the K/I coset
/// representatives and the Iwahori digit generators, keeping whatever
/// stays inside the ball.
pub fn translate_span(
    ob: &OverBaseCtx,
    gens: &[InducedOverBase],
    ball: usize,
) -> Result<OverBaseSpan> {
    let ctx = &ob.q.cind;
    let mut span = OverBaseSpan::new();
    let mut translators: Vec<GroupElement> = vec![ctx.g2.pi_elt()];
    for li in 0..ctx.q() {
        translators.push(ctx.g2.k_coset_rep(ctx.field().residue_elem(li)));
    }
    translators.extend(ctx.g2.subgroup_generators(SubgroupSpec::I, ball + 2)?);
    let mut queue: Vec<InducedOverBase> = vec![];
    for gen in gens {
        if gen.radius() <= ball && span.insert(ob, gen) {
            queue.push(gen.clone());
        }
    }
    while let Some(v) = queue.pop() {
        for g in &translators {
            let gv = ob.g_act(g, &v)?;
            if gv.radius() <= ball && span.insert(ob, &gv) {
                queue.push(gv);
            }
        }
    }
    Ok(span)
}
