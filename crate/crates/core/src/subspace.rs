//! Echelonized spans of sparse induced elements.
//!
//! Pivot coordinates are (radius, side, path, monomial) compared
//! radius-major and taken maximal, so a fully reduced echelon basis is
//! canonical and the rows whose pivot lies inside a smaller ball span
//! exactly the intersection of the row space with that ball.

use smallvec::SmallVec;

use crate::cind::{CindCtx, InducedElement, TreeSide, VertexRep};
use crate::localring::Fq;

/// Total order on basis coordinates, radius-major.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub radius: usize,
    pub minus_side: bool,
    pub path: SmallVec<[u8; 16]>,
    pub monomial: usize,
}

impl Coord {
    pub fn new(vertex: &VertexRep, monomial: usize) -> Coord {
        Coord {
            radius: vertex.radius(),
            minus_side: vertex.side == TreeSide::Minus,
            path: vertex.path.clone(),
            monomial,
        }
    }

    pub fn vertex(&self) -> VertexRep {
        VertexRep {
            side: if self.minus_side { TreeSide::Minus } else { TreeSide::Plus },
            path: self.path.clone(),
        }
    }
}

/// The maximal nonzero coordinate of an element.
pub fn leading_coord(x: &InducedElement) -> Option<(Coord, Fq)> {
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

pub fn coeff_at(x: &InducedElement, coord: &Coord) -> Fq {
    x.terms
        .get(&coord.vertex())
        .map(|v| v[coord.monomial])
        .unwrap_or(Fq::ZERO)
}

/// A fully reduced echelon basis of a span of induced elements.
#[derive(Debug, Clone, Default)]
pub struct SubspaceBasis {
    /// sorted by pivot, descending; each has pivot coefficient 1 and zero
    /// coefficient on every other pivot
    pub vecs: Vec<InducedElement>,
    pivots: Vec<Coord>,
}

impl SubspaceBasis {
    pub fn new() -> SubspaceBasis {
        SubspaceBasis::default()
    }

    pub fn dim(&self) -> usize {
        self.vecs.len()
    }

    pub fn pivots(&self) -> &[Coord] {
        &self.pivots
    }

    /// Eliminate all pivots from x.
    pub fn reduce_vec(&self, ctx: &CindCtx, x: &InducedElement) -> InducedElement {
        let k = ctx.field();
        let mut out = x.clone();
        for (vec, pivot) in self.vecs.iter().zip(&self.pivots) {
            let c = coeff_at(&out, pivot);
            if !c.is_zero() {
                ctx.axpy(&mut out, k.neg(c), vec);
            }
        }
        out
    }

    pub fn contains(&self, ctx: &CindCtx, x: &InducedElement) -> bool {
        self.reduce_vec(ctx, x).is_zero()
    }

    /// Insert a vector; returns true when the span grew.
    pub fn insert(&mut self, ctx: &CindCtx, x: &InducedElement) -> bool {
        let k = ctx.field();
        let reduced = self.reduce_vec(ctx, x);
        let Some((pivot, coef)) = leading_coord(&reduced) else {
            return false;
        };
        let normalized = ctx.scale(&reduced, k.inv(coef).expect("pivot is nonzero"));
        // clear the new pivot from existing vectors
        for vec in self.vecs.iter_mut() {
            let c = coeff_at(vec, &pivot);
            if !c.is_zero() {
                let mut nv = vec.clone();
                ctx.axpy(&mut nv, k.neg(c), &normalized);
                *vec = nv;
            }
        }
        let at = self.pivots.partition_point(|p| *p > pivot);
        self.pivots.insert(at, pivot);
        self.vecs.insert(at, normalized);
        true
    }

    pub fn insert_all<'a>(&mut self, ctx: &CindCtx, xs: impl IntoIterator<Item = &'a InducedElement>) {
        for x in xs {
            self.insert(ctx, x);
        }
    }

    /// Rows whose support lies within the given ball radius. Because the
    /// pivot order is radius-major and the basis is fully reduced, these
    /// rows span exactly (row space) ∩ ball.
    pub fn restrict_to_ball(&self, radius: usize) -> SubspaceBasis {
        let mut out = SubspaceBasis::new();
        for (vec, pivot) in self.vecs.iter().zip(&self.pivots) {
            if pivot.radius <= radius {
                out.vecs.push(vec.clone());
                out.pivots.push(pivot.clone());
            }
        }
        out
    }

    /// Subspace equality via mutual containment of the canonical bases.
    pub fn equals(&self, ctx: &CindCtx, other: &SubspaceBasis) -> bool {
        self.dim() == other.dim() && self.vecs.iter().all(|v| other.contains(ctx, v))
    }

    pub fn sum(ctx: &CindCtx, a: &SubspaceBasis, b: &SubspaceBasis) -> SubspaceBasis {
        let mut out = a.clone();
        out.insert_all(ctx, b.vecs.iter());
        out
    }

    /// Zassenhaus-style intersection: echelonize pairs (a, a) and (b, 0);
    /// pairs whose first component dies span the intersection.
    pub fn intersect(ctx: &CindCtx, a: &SubspaceBasis, b: &SubspaceBasis) -> SubspaceBasis {
        let k = ctx.field();
        let mut pairs: Vec<(InducedElement, InducedElement)> = vec![];
        let mut out = SubspaceBasis::new();
        let feed = |first: InducedElement, second: InducedElement,
                        pairs: &mut Vec<(InducedElement, InducedElement)>,
                        out: &mut SubspaceBasis| {
            let mut first = first;
            let mut second = second;
            loop {
                let Some((pivot, coef)) = leading_coord(&first) else {
                    out.insert(ctx, &second);
                    return;
                };
                let mut hit = None;
                for (i, (pf, _)) in pairs.iter().enumerate() {
                    if let Some((pp, _)) = leading_coord(pf) {
                        if pp == pivot {
                            hit = Some(i);
                            break;
                        }
                    }
                }
                match hit {
                    None => {
                        let inv = k.inv(coef).expect("pivot nonzero");
                        pairs.push((ctx.scale(&first, inv), ctx.scale(&second, inv)));
                        return;
                    }
                    Some(i) => {
                        let c = k.neg(coef);
                        let (pf, ps) = &pairs[i];
                        let inv_lead = Fq::ONE; // pairs store pivot coeff 1
                        let _ = inv_lead;
                        let mut nf = first.clone();
                        ctx.axpy(&mut nf, c, pf);
                        let mut ns = second.clone();
                        ctx.axpy(&mut ns, c, ps);
                        first = nf;
                        second = ns;
                    }
                }
            }
        };
        for v in &a.vecs {
            feed(v.clone(), v.clone(), &mut pairs, &mut out);
        }
        for v in &b.vecs {
            feed(v.clone(), InducedElement::zero(), &mut pairs, &mut out);
        }
        out
    }
}
