//! Ball-truncated compact induction cInd_{KZ}^G σ in canonical vertex form.
//!
//! Basis vectors live over tree vertices: (ϖⁿ, b; 0, 1)-cosets on the Plus
//! side and their Π-translates on the Minus side. A vertex is stored as its
//! ϖ-digit path (lowest digit first), so the parent drops the last digit
//! and the q children append one. The Hecke operator T acts locally: the
//! child-direction factor φ(g_λ⁻¹) is the same matrix at every vertex and
//! the parent-direction factor is σ(u_λ)U with λ the dropped digit, which
//! keeps every operator application linear in the support size.

use std::collections::BTreeMap;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::gl2::{Gl2Ctx, GroupElement, Side};
use crate::linalg::{Mat, Solver};
use crate::localring::Fq;
use crate::weights::{HeckeData, Weight, WeightVector};

/// Side of the tree: Plus = P⁺KZ-vertices, Minus = Π·P⁺KZ-vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeSide {
    Plus,
    Minus,
}

/// Coset representative (ϖⁿ, b; 0, 1) (Plus) or Π·(ϖⁿ, b; 0, 1) (Minus),
/// with b encoded as the sequence of residue-digit indices of its
/// Teichmüller expansion, lowest digit first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexRep {
    pub side: TreeSide,
    pub path: SmallVec<[u8; 16]>,
}

impl VertexRep {
    pub fn base(side: TreeSide) -> VertexRep {
        VertexRep { side, path: SmallVec::new() }
    }

    #[inline]
    pub fn grade(&self) -> usize {
        self.path.len()
    }

    /// Distance to the base vertex: grade on the Plus side, grade + 1 on
    /// the Minus side (matches the length function).
    #[inline]
    pub fn radius(&self) -> usize {
        self.grade() + usize::from(self.side == TreeSide::Minus)
    }

    pub fn child(&self, digit: u8) -> VertexRep {
        let mut path = self.path.clone();
        path.push(digit);
        VertexRep { side: self.side, path }
    }

    pub fn parent(&self) -> Option<(VertexRep, u8)> {
        if self.path.is_empty() {
            return None;
        }
        let mut path = self.path.clone();
        let top = path.pop().unwrap();
        Some((VertexRep { side: self.side, path }, top))
    }

    /// Strip the lowest digit (the subtree-root direction used by S).
    pub fn strip_first(&self) -> Option<(u8, VertexRep)> {
        if self.path.is_empty() {
            return None;
        }
        let first = self.path[0];
        let path: SmallVec<[u8; 16]> = self.path[1..].iter().copied().collect();
        Some((first, VertexRep { side: self.side, path }))
    }

    pub fn prepend(&self, digit: u8) -> VertexRep {
        let mut path = SmallVec::with_capacity(self.path.len() + 1);
        path.push(digit);
        path.extend(self.path.iter().copied());
        VertexRep { side: self.side, path }
    }

    pub fn with_side(&self, side: TreeSide) -> VertexRep {
        VertexRep { side, path: self.path.clone() }
    }
}

/// A finitely supported element of cInd_{KZ}^G σ in canonical form: the
/// KZ-part of every group coordinate is absorbed into the fiber vector and
/// zero fibers are pruned.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InducedElement {
    pub terms: BTreeMap<VertexRep, WeightVector>,
}

impl InducedElement {
    pub fn zero() -> InducedElement {
        InducedElement { terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn radius(&self) -> usize {
        self.terms.keys().map(|v| v.radius()).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn single(vertex: VertexRep, v: WeightVector) -> InducedElement {
        let mut out = InducedElement::zero();
        if v.iter().any(|c| !c.is_zero()) {
            out.terms.insert(vertex, v);
        }
        out
    }
}

/// Everything needed to compute in cInd_{KZ}^G σ at a fixed precision.
pub struct CindCtx {
    pub g2: Arc<Gl2Ctx>,
    pub weight: Arc<Weight>,
    pub hecke: HeckeData,
    /// solver for the child-direction block v ↦ (φ(g_λ⁻¹)v)_λ (injective)
    pub tplus_solver: Solver,
    /// solver for the parent-direction block (w_λ)_λ ↦ Σ σ(u_λ)U w_λ (surjective)
    pub tminus_solver: Solver,
}

impl CindCtx {
    pub fn new(g2: Arc<Gl2Ctx>, weight: Arc<Weight>) -> Result<Arc<CindCtx>> {
        if g2.field().q() > 255 {
            return Err(Error::Unsupported("residue fields larger than 255 are not supported".into()));
        }
        let hecke = HeckeData::new(&weight)?;
        let field = &*weight.field;
        let q = field.q() as usize;
        let dim = weight.dim();
        // L: (q·dim) x dim stacked φ-blocks
        let mut l = Mat::zeros(q * dim, dim);
        for (li, phi) in hecke.phi.iter().enumerate() {
            for r in 0..dim {
                for c in 0..dim {
                    l[(li * dim + r, c)] = phi[(r, c)];
                }
            }
        }
        let tplus_solver = Solver::new(field, l);
        if tplus_solver.rank != dim {
            return Err(Error::Construction(
                "child-direction Hecke block is not injective".into(),
            ));
        }
        // D: dim x (q·dim) concatenated ψ-blocks
        let mut d = Mat::zeros(dim, q * dim);
        for (li, psi) in hecke.psi.iter().enumerate() {
            for r in 0..dim {
                for c in 0..dim {
                    d[(r, li * dim + c)] = psi[(r, c)];
                }
            }
        }
        let tminus_solver = Solver::new(field, d);
        if tminus_solver.rank != dim {
            return Err(Error::Construction(
                "parent-direction Hecke block is not surjective".into(),
            ));
        }
        Ok(Arc::new(CindCtx { g2, weight, hecke, tplus_solver, tminus_solver }))
    }

    #[inline]
    pub fn field(&self) -> &crate::localring::FieldCtx {
        &self.weight.field
    }

    pub fn q(&self) -> usize {
        self.field().q() as usize
    }

    /// Group element of a vertex at the ring's working precision.
    pub fn vertex_elt(&self, v: &VertexRep) -> Result<GroupElement> {
        let r = &self.g2.ring;
        let digits: Vec<Fq> = v.path.iter().map(|&i| self.field().residue_elem(i as usize)).collect();
        let b = r.from_teich_digits(&digits, r.precision())?;
        let n = v.grade();
        let h = self.g2.from_entries([r.pi_pow(n), b, r.zero(), r.one()], 0)?;
        match v.side {
            TreeSide::Plus => Ok(h),
            TreeSide::Minus => self.g2.mul(&self.g2.pi_elt(), &h),
        }
    }

    /// Canonical form of [g, v].
    pub fn inject(&self, g: &GroupElement, v: &WeightVector) -> Result<InducedElement> {
        let w = self.g2.cartan_word(g)?;
        let path: SmallVec<[u8; 16]> = w
            .digits
            .iter()
            .map(|&d| {
                self.field()
                    .residue_index(d)
                    .expect("cartan digits are residue elements") as u8
            })
            .collect();
        let side = match w.side {
            Side::Plus => TreeSide::Plus,
            Side::PiSide => TreeSide::Minus,
        };
        let tail_mat = self.weight.act_matrix(&self.g2, &w.tail)?;
        let fv = tail_mat.apply(self.field(), v);
        Ok(InducedElement::single(VertexRep { side, path }, fv))
    }

    pub fn add_term(&self, out: &mut InducedElement, vertex: VertexRep, v: &[Fq], scale: Fq) {
        if scale.is_zero() {
            return;
        }
        let k = self.field();
        let entry = out.terms.entry(vertex);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                let w: WeightVector = v.iter().map(|&c| k.mul(c, scale)).collect();
                if w.iter().any(|c| !c.is_zero()) {
                    e.insert(w);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                for (slot, &c) in e.get_mut().iter_mut().zip(v) {
                    *slot = k.add(*slot, k.mul(c, scale));
                }
                if e.get().iter().all(|c| c.is_zero()) {
                    e.remove();
                }
            }
        }
    }

    pub fn axpy(&self, out: &mut InducedElement, scale: Fq, x: &InducedElement) {
        for (vert, v) in &x.terms {
            self.add_term(out, vert.clone(), v, scale);
        }
    }

    pub fn scale(&self, x: &InducedElement, c: Fq) -> InducedElement {
        let mut out = InducedElement::zero();
        self.axpy(&mut out, c, x);
        out
    }

    pub fn sub(&self, a: &InducedElement, b: &InducedElement) -> InducedElement {
        let mut out = a.clone();
        self.axpy(&mut out, self.field().neg(Fq::ONE), b);
        out
    }

    pub fn add(&self, a: &InducedElement, b: &InducedElement) -> InducedElement {
        let mut out = a.clone();
        self.axpy(&mut out, Fq::ONE, b);
        out
    }

    /// Left translation g·f, term by term through the canonical word.
    pub fn g_act(&self, g: &GroupElement, f: &InducedElement) -> Result<InducedElement> {
        let mut out = InducedElement::zero();
        for (vert, v) in &f.terms {
            let h = self.vertex_elt(vert)?;
            let gh = self.g2.mul(g, &h)?;
            let single = self.inject(&gh, v)?;
            self.axpy(&mut out, Fq::ONE, &single);
        }
        Ok(out)
    }

    /// Fast path for the Π-action: swaps sides, multiplying by the central
    /// value when Π lands on Π² = ϖ.
    pub fn act_pi(&self, f: &InducedElement) -> InducedElement {
        let chi = self.weight.central;
        let mut out = InducedElement::zero();
        for (vert, v) in &f.terms {
            match vert.side {
                TreeSide::Plus => {
                    self.add_term(&mut out, vert.with_side(TreeSide::Minus), v, Fq::ONE);
                }
                TreeSide::Minus => {
                    self.add_term(&mut out, vert.with_side(TreeSide::Plus), v, chi);
                }
            }
        }
        out
    }

    /// The Hecke operator T, tree-locally.
    pub fn hecke_t(&self, f: &InducedElement) -> InducedElement {
        let k = self.field();
        let chi = self.weight.central;
        let q = self.q();
        let mut out = InducedElement::zero();
        for (vert, v) in &f.terms {
            // child direction
            for li in 0..q {
                let w = self.hecke.phi[li].apply(k, v);
                self.add_term(&mut out, vert.child(li as u8), &w, Fq::ONE);
            }
            // parent direction
            match vert.parent() {
                Some((par, top)) => {
                    let w = self.hecke.psi[top as usize].apply(k, v);
                    self.add_term(&mut out, par, &w, chi);
                }
                None => {
                    let w = self.hecke.s_u.apply(k, v);
                    match vert.side {
                        TreeSide::Plus => {
                            self.add_term(&mut out, VertexRep::base(TreeSide::Minus), &w, Fq::ONE)
                        }
                        TreeSide::Minus => {
                            self.add_term(&mut out, VertexRep::base(TreeSide::Plus), &w, chi)
                        }
                    }
                }
            }
        }
        out
    }

    /// P(T)·f for P given by its coefficient vector (low degree first).
    pub fn apply_poly(&self, poly: &[Fq], f: &InducedElement) -> InducedElement {
        let mut out = InducedElement::zero();
        let mut power = f.clone();
        for (j, &c) in poly.iter().enumerate() {
            if j > 0 {
                power = self.hecke_t(&power);
            }
            self.axpy(&mut out, c, &power);
        }
        out
    }

    /// S = Σ_λ g_λ: prepends a digit on the Plus side; general translation
    /// on the Minus side.
    pub fn s_apply(&self, f: &InducedElement) -> Result<InducedElement> {
        let q = self.q();
        let mut out = InducedElement::zero();
        for (vert, v) in &f.terms {
            match vert.side {
                TreeSide::Plus => {
                    for li in 0..q {
                        self.add_term(&mut out, vert.prepend(li as u8), v, Fq::ONE);
                    }
                }
                TreeSide::Minus => {
                    let h = self.vertex_elt(vert)?;
                    for li in 0..q {
                        let gl = self.g2.g_lambda(self.field().residue_elem(li));
                        let gh = self.g2.mul(&gl, &h)?;
                        let single = self.inject(&gh, v)?;
                        self.axpy(&mut out, Fq::ONE, &single);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn s_pow(&self, n: usize, f: &InducedElement) -> Result<InducedElement> {
        let mut cur = f.clone();
        for _ in 0..n {
            cur = self.s_apply(&cur)?;
        }
        Ok(cur)
    }

    /// Partition into (I⁺-part, I⁻-part).
    pub fn split_pm(&self, f: &InducedElement) -> (InducedElement, InducedElement) {
        let mut plus = InducedElement::zero();
        let mut minus = InducedElement::zero();
        for (vert, v) in &f.terms {
            match vert.side {
                TreeSide::Plus => plus.terms.insert(vert.clone(), v.clone()),
                TreeSide::Minus => minus.terms.insert(vert.clone(), v.clone()),
            };
        }
        (plus, minus)
    }

    /// The x₀-component of the K/I-coset expansion of Π(f⁻):
    /// Π(f⁻) = y + Σ_μ ([μ],1;1,0)·x_μ with y in the base block and
    /// x_μ ∈ I⁻(σ). Input must be supported on the Minus side.
    pub fn x0_extract(&self, f_minus: &InducedElement) -> Result<InducedElement> {
        if f_minus.terms.keys().any(|v| v.side == TreeSide::Plus) {
            return Err(Error::Domain("x0_extract expects an I⁻-supported element".into()));
        }
        let pi_f = self.act_pi(f_minus);
        let mut x0 = InducedElement::zero();
        for (vert, v) in &pi_f.terms {
            debug_assert_eq!(vert.side, TreeSide::Plus);
            if let Some((first, stripped)) = vert.strip_first() {
                if first == 0 {
                    self.add_term(&mut x0, stripped.with_side(TreeSide::Minus), v, Fq::ONE);
                }
            }
        }
        Ok(x0)
    }

    /// All x_μ-components and the base block y of the expansion of Π(f⁻).
    pub fn coset_expansion(&self, f_minus: &InducedElement) -> Result<(InducedElement, Vec<InducedElement>)> {
        let pi_f = self.act_pi(f_minus);
        let q = self.q();
        let mut y = InducedElement::zero();
        let mut xs = vec![InducedElement::zero(); q];
        for (vert, v) in &pi_f.terms {
            match vert.strip_first() {
                None => self.add_term(&mut y, vert.clone(), v, Fq::ONE),
                Some((first, stripped)) => {
                    self.add_term(&mut xs[first as usize], stripped.with_side(TreeSide::Minus), v, Fq::ONE)
                }
            }
        }
        Ok((y, xs))
    }

    /// Basis of M_n⁺(σ) = [(ϖⁿ, O; 0, 1), F̄·v₀]: one vector per digit word.
    pub fn m_n_plus_basis(&self, n: usize) -> Result<Vec<InducedElement>> {
        let v0 = self.weight.i1_line()?;
        Ok(self
            .all_paths(n)
            .into_iter()
            .map(|p| {
                InducedElement::single(
                    VertexRep { side: TreeSide::Plus, path: p },
                    v0.clone(),
                )
            })
            .collect())
    }

    /// All digit words of a given length, lexicographic.
    pub fn all_paths(&self, n: usize) -> Vec<SmallVec<[u8; 16]>> {
        let q = self.q();
        let mut out: Vec<SmallVec<[u8; 16]>> = vec![SmallVec::new()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * q);
            for p in &out {
                for d in 0..q {
                    let mut np = p.clone();
                    np.push(d as u8);
                    next.push(np);
                }
            }
            out = next;
        }
        out
    }

    /// Basis vertices of the ball of the given radius, ordered by
    /// (radius, side, path).
    pub fn ball_vertices(&self, radius: usize) -> Vec<VertexRep> {
        let mut out = vec![];
        for r in 0..=radius {
            for side in [TreeSide::Plus, TreeSide::Minus] {
                let grade = match side {
                    TreeSide::Plus => r,
                    TreeSide::Minus => {
                        if r == 0 {
                            continue;
                        }
                        r - 1
                    }
                };
                for p in self.all_paths(grade) {
                    out.push(VertexRep { side, path: p });
                }
            }
        }
        out
    }

    pub fn ball_dim(&self, radius: usize) -> usize {
        self.ball_vertices(radius).len() * self.weight.dim()
    }

    /// Graded split of T on a single R_n⁻ block (n ≥ 1): the part raising
    /// the grade and the part lowering it.
    pub fn t_plus_minus(&self, f: &InducedElement) -> Result<(InducedElement, InducedElement)> {
        let grades: std::collections::BTreeSet<(TreeSide, usize)> =
            f.terms.keys().map(|v| (v.side, v.grade())).collect();
        if grades.len() != 1 {
            return Err(Error::Domain("t_plus_minus expects support in a single graded piece".into()));
        }
        let (side, n) = grades.into_iter().next().unwrap();
        if side != TreeSide::Minus || n == 0 {
            return Err(Error::Domain("t_plus_minus expects support in R_n⁻ with n ≥ 1".into()));
        }
        let tf = self.hecke_t(f);
        let mut up = InducedElement::zero();
        let mut down = InducedElement::zero();
        for (vert, v) in &tf.terms {
            if vert.grade() == n + 1 {
                up.terms.insert(vert.clone(), v.clone());
            } else if vert.grade() == n - 1 {
                down.terms.insert(vert.clone(), v.clone());
            } else {
                return Err(Error::Construction(
                    "T did not respect the graded split on R_n⁻".into(),
                ));
            }
        }
        Ok((up, down))
    }

    /// One solution h of T⁻h = f with h one grade higher (Minus side).
    pub fn tminus_preimage(&self, f: &InducedElement) -> Result<InducedElement> {
        let k = self.field();
        let chi_inv = k.inv(self.weight.central)?;
        let dim = self.weight.dim();
        let q = self.q();
        let mut h = InducedElement::zero();
        for (vert, v) in &f.terms {
            if vert.side != TreeSide::Minus {
                return Err(Error::Domain("tminus_preimage expects an I⁻-supported element".into()));
            }
            let target: Vec<Fq> = v.iter().map(|&c| k.mul(c, chi_inv)).collect();
            let (w, residual) = self.tminus_solver.solve(k, &target);
            if residual.iter().any(|c| !c.is_zero()) {
                return Err(Error::Construction("parent-direction block failed to be surjective".into()));
            }
            for li in 0..q {
                let block = &w[li * dim..(li + 1) * dim];
                self.add_term(&mut h, vert.child(li as u8), block, Fq::ONE);
            }
        }
        Ok(h)
    }

    /// Factor one root out of P: P(T) = (T - λ)·P₁(T). Needs a root in the
    /// coefficient field.
    pub fn split_root(&self, poly: &[Fq]) -> Result<(Fq, Vec<Fq>)> {
        let k = self.field();
        let deg = poly.len() - 1;
        if deg == 0 {
            return Err(Error::Domain("cannot split a constant polynomial".into()));
        }
        for cand in k.all_elements() {
            // Horner evaluation
            let mut acc = Fq::ZERO;
            for &c in poly.iter().rev() {
                acc = k.add(k.mul(acc, cand), c);
            }
            if acc.is_zero() {
                // synthetic division by (T - cand)
                let mut quotient = vec![Fq::ZERO; deg];
                let mut carry = Fq::ZERO;
                for j in (1..=deg).rev() {
                    carry = k.add(poly[j], k.mul(carry, cand));
                    quotient[j - 1] = carry;
                }
                return Ok((cand, quotient));
            }
        }
        Err(Error::Unsupported(
            "polynomial has no root in the coefficient field; enlarge m".into(),
        ))
    }

    /// The grade-raising correction of the recursive lemma: returns
    /// (f', witness) with f + f' = P(T)(witness), f' and witness supported
    /// in strictly higher Minus grades than f.
    pub fn pt_correction(&self, f: &InducedElement, poly: &[Fq]) -> Result<(InducedElement, InducedElement)> {
        let k = self.field();
        if poly.len() < 2 {
            return Err(Error::Domain("pt_correction needs deg P ≥ 1".into()));
        }
        let (lambda, p1) = self.split_root(poly)?;
        let h = self.tminus_preimage(f)?;
        if p1.len() == 1 {
            // P = a(T - λ): (T-λ)h = f + (T⁺h - λh), so f' = T⁺h - λh and
            // the witness is a⁻¹h.
            let a = p1[0];
            let th = self.hecke_t(&h);
            let mut fp = self.sub(&th, &self.scale(&h, lambda));
            fp = self.sub(&fp, f);
            let witness = self.scale(&h, k.inv(a)?);
            Ok((fp, witness))
        } else {
            let (hp, witness) = self.pt_correction(&h, &p1)?;
            // h + hp = P₁(witness); f' = T⁺h - λh + (T-λ)(hp)
            let th = self.hecke_t(&h);
            let tplus_part = self.sub(&self.sub(&th, &self.scale(&h, lambda)), f);
            let thp = self.hecke_t(&hp);
            let second = self.sub(&thp, &self.scale(&hp, lambda));
            let fp = self.add(&tplus_part, &second);
            Ok((fp, witness))
        }
    }
}

#[cfg(test)]
pub mod tests {
    use super::*;
    use crate::gl2::SubgroupSpec;
    use crate::localring::{Backend, FieldCtx, LocalRingCtx};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn make_ctx(p: u64, f: usize, r: &[usize], prec: usize, backend: Backend, central: i64) -> Arc<CindCtx> {
        let field = Arc::new(FieldCtx::new(p, f, f).unwrap());
        let ring = LocalRingCtx::new(field.clone(), backend, prec).unwrap();
        let g2 = Gl2Ctx::new(ring);
        let w = Arc::new(Weight::new(field.clone(), r.to_vec(), 0, field.from_int(central)).unwrap());
        CindCtx::new(g2, w).unwrap()
    }

    fn id_v0(ctx: &CindCtx) -> InducedElement {
        let v0 = ctx.weight.i1_line().unwrap();
        InducedElement::single(VertexRep::base(TreeSide::Plus), v0)
    }

    fn pi_v0(ctx: &CindCtx) -> InducedElement {
        let v0 = ctx.weight.i1_line().unwrap();
        InducedElement::single(VertexRep::base(TreeSide::Minus), v0)
    }

    fn random_kz(ctx: &CindCtx, rng: &mut ChaCha8Rng) -> GroupElement {
        let g2 = &ctx.g2;
        let r = &g2.ring;
        loop {
            let mut digits = |n: usize| {
                let ds: Vec<Fq> = (0..n)
                    .map(|_| ctx.field().residue_elem(rng.gen_range(0..ctx.q())))
                    .collect();
                r.from_teich_digits(&ds, r.precision()).unwrap()
            };
            let m = [digits(3), digits(3), digits(3), digits(3)];
            if let Ok(g) = g2.from_entries(m, rng.gen_range(-1..=1)) {
                if g2.member(&g, SubgroupSpec::KZ).unwrap_or(false) {
                    return g;
                }
            }
        }
    }

    pub fn random_group_element(ctx: &CindCtx, rng: &mut ChaCha8Rng, max_len: usize) -> GroupElement {
        let g2 = &ctx.g2;
        let mut g = random_kz(ctx, rng);
        let len = rng.gen_range(0..=max_len);
        for _ in 0..len {
            let l = ctx.field().residue_elem(rng.gen_range(0..ctx.q()));
            g = g2.mul(&g2.g_lambda(l), &g).unwrap();
        }
        if rng.gen_bool(0.5) {
            g = g2.mul(&g2.pi_elt(), &g).unwrap();
        }
        g
    }

    pub fn random_element(ctx: &CindCtx, rng: &mut ChaCha8Rng, max_radius: usize, nterms: usize) -> InducedElement {
        let mut out = InducedElement::zero();
        let verts = ctx.ball_vertices(max_radius);
        for _ in 0..nterms {
            let vert = verts[rng.gen_range(0..verts.len())].clone();
            let mut v = ctx.weight.zero_vec();
            for c in v.iter_mut() {
                *c = crate::localring::Fq(rng.gen_range(0..ctx.field().order()) as u16);
            }
            ctx.add_term(&mut out, vert, &v, Fq::ONE);
        }
        out
    }

    #[test]
    fn inject_examples() {
        let ctx = make_ctx(5, 1, &[2], 8, Backend::EqualChar, 1);
        let g2 = &ctx.g2;
        let v0 = ctx.weight.i1_line().unwrap();
        // [Id, v₀]
        let e = ctx.inject(&g2.identity(), &v0).unwrap();
        assert_eq!(e, id_v0(&ctx));
        // [Π·k, v] = [Π, σ(k)v]
        let k = g2.u_plus(g2.ring.from_integer(3));
        let pk = g2.mul(&g2.pi_elt(), &k).unwrap();
        let e = ctx.inject(&pk, &v0).unwrap();
        // v₀ is fixed by upper unipotents in K
        assert_eq!(e, pi_v0(&ctx));
        // [(ϖ,[λ];0,1)·s, v] lands at (Plus,1,[λ]) with fiber σ(s)v
        let l = ctx.field().from_int(2);
        let gs = g2.mul(&g2.g_lambda(l), &g2.s_elt()).unwrap();
        let mut v = ctx.weight.zero_vec();
        v[1] = Fq::ONE;
        let e = ctx.inject(&gs, &v).unwrap();
        let smat = ctx.weight.act_matrix_residue([Fq::ZERO, Fq::ONE, Fq::ONE, Fq::ZERO]).unwrap();
        let sv = smat.apply(ctx.field(), &v);
        let li = ctx.field().residue_index(l).unwrap() as u8;
        let expect = InducedElement::single(VertexRep::base(TreeSide::Plus).child(li), sv);
        assert_eq!(e, expect);
    }

    #[test]
    fn canonicalization_soundness() {
        // inject(g·k, v) = inject(g, σ(k)v) on random KZ elements
        let ctx = make_ctx(3, 1, &[1], 9, Backend::EqualChar, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let g = random_group_element(&ctx, &mut rng, 3);
            let k = random_kz(&ctx, &mut rng);
            let mut v = ctx.weight.zero_vec();
            v[rng.gen_range(0..ctx.weight.dim())] = Fq::ONE;
            let gk = ctx.g2.mul(&g, &k).unwrap();
            let lhs = ctx.inject(&gk, &v).unwrap();
            let kmat = ctx.weight.act_matrix(&ctx.g2, &k).unwrap();
            let kv = kmat.apply(ctx.field(), &v);
            let rhs = ctx.inject(&g, &kv).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn pi_action_and_centrality() {
        let ctx = make_ctx(3, 1, &[0], 8, Backend::EqualChar, 2);
        let e = id_v0(&ctx);
        // Π·[Id,v₀] = [Π,v₀]
        let pe = ctx.g_act(&ctx.g2.pi_elt(), &e).unwrap();
        assert_eq!(pe, pi_v0(&ctx));
        assert_eq!(pe, ctx.act_pi(&e));
        // Π·[Π,v₀] = χ(ϖ)·[Id,v₀]
        let ppe = ctx.g_act(&ctx.g2.pi_elt(), &pe).unwrap();
        assert_eq!(ppe, ctx.scale(&e, ctx.field().from_int(2)));
    }

    #[test]
    fn g_act_is_action() {
        let ctx = make_ctx(3, 1, &[1], 10, Backend::MixedChar, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let g1 = random_group_element(&ctx, &mut rng, 2);
            let g2e = random_group_element(&ctx, &mut rng, 2);
            let f = random_element(&ctx, &mut rng, 2, 3);
            let lhs = ctx.g_act(&ctx.g2.mul(&g1, &g2e).unwrap(), &f).unwrap();
            let rhs = ctx.g_act(&g1, &ctx.g_act(&g2e, &f).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn hecke_formula_dim_one() {
        // trivial weight, central 1: T[1,v₀] = [Π,v₀] + Σ_λ [g_λ, v₀]
        let ctx = make_ctx(5, 1, &[0], 8, Backend::EqualChar, 1);
        let t = ctx.hecke_t(&id_v0(&ctx));
        let mut expect = pi_v0(&ctx);
        for li in 0..ctx.q() {
            ctx.add_term(&mut expect, VertexRep::base(TreeSide::Plus).child(li as u8), &[Fq::ONE], Fq::ONE);
        }
        assert_eq!(t, expect);
    }

    #[test]
    fn hecke_formula_dim_ge_two() {
        // T[1,v₀] = Σ_λ [g_λ, v₀]
        for (p, f, r) in [(3u64, 1usize, vec![1usize]), (5, 1, vec![2]), (3, 2, vec![1, 1])] {
            let ctx = make_ctx(p, f, &r, 8, Backend::EqualChar, 1);
            let v0 = ctx.weight.i1_line().unwrap();
            let t = ctx.hecke_t(&id_v0(&ctx));
            let mut expect = InducedElement::zero();
            for li in 0..ctx.q() {
                ctx.add_term(&mut expect, VertexRep::base(TreeSide::Plus).child(li as u8), &v0, Fq::ONE);
            }
            assert_eq!(t, expect, "p={p} f={f}");
            // and S[Id,v₀] agrees with T[1,v₀]
            let s = ctx.s_apply(&id_v0(&ctx)).unwrap();
            assert_eq!(s, t);
        }
    }

    #[test]
    fn s_on_trivial_weight_is_t_minus_pi() {
        let ctx = make_ctx(3, 1, &[0], 8, Backend::EqualChar, 1);
        let s = ctx.s_apply(&id_v0(&ctx)).unwrap();
        let t = ctx.hecke_t(&id_v0(&ctx));
        let expect = ctx.sub(&t, &pi_v0(&ctx));
        assert_eq!(s, expect);
    }

    #[test]
    fn hecke_is_g_equivariant() {
        for backend in [Backend::EqualChar, Backend::MixedChar] {
            let ctx = make_ctx(3, 1, &[2], 12, backend, 1);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..30 {
                let g = random_group_element(&ctx, &mut rng, 2);
                let f = random_element(&ctx, &mut rng, 2, 3);
                let lhs = ctx.hecke_t(&ctx.g_act(&g, &f).unwrap());
                let rhs = ctx.g_act(&g, &ctx.hecke_t(&f)).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn s_equals_sum_of_translates() {
        let ctx = make_ctx(3, 2, &[1, 0], 9, Backend::EqualChar, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let f = random_element(&ctx, &mut rng, 2, 4);
            let fast = ctx.s_apply(&f).unwrap();
            let mut slow = InducedElement::zero();
            for li in 0..ctx.q() {
                let gl = ctx.g2.g_lambda(ctx.field().residue_elem(li));
                let t = ctx.g_act(&gl, &f).unwrap();
                ctx.axpy(&mut slow, Fq::ONE, &t);
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn s_raises_plus_grade() {
        let ctx = make_ctx(3, 1, &[1], 9, Backend::EqualChar, 1);
        let mut cur = id_v0(&ctx);
        for n in 1..=4usize {
            cur = ctx.s_apply(&cur).unwrap();
            assert_eq!(cur.num_terms(), ctx.q().pow(n as u32));
            assert!(cur.terms.keys().all(|v| v.side == TreeSide::Plus && v.grade() == n));
        }
    }

    #[test]
    fn s_s_equals_pi_plus_r() {
        // s·S = Π + R with R = Σ_{λ≠0} (ϖ,[λ⁻¹];0,1)·(-[λ⁻¹],0;ϖ,[λ])
        for backend in [Backend::EqualChar, Backend::MixedChar] {
            for p in [3u64, 5] {
                let ctx = make_ctx(p, 1, &[1], 12, backend, 1);
                let k = ctx.field();
                let g2 = &ctx.g2;
                let r = &g2.ring;
                let mut rng = ChaCha8Rng::seed_from_u64(17);
                for _ in 0..12 {
                    let f = random_element(&ctx, &mut rng, 2, 3);
                    let lhs = ctx.g_act(&g2.s_elt(), &ctx.s_apply(&f).unwrap()).unwrap();
                    let mut rhs = ctx.act_pi(&f);
                    for li in 0..ctx.q() {
                        let l = k.residue_elem(li);
                        if l.is_zero() {
                            continue;
                        }
                        let linv = k.inv(l).unwrap();
                        let m1 = g2.g_lambda(linv);
                        let m2 = g2
                            .from_entries(
                                [
                                    r.neg(&r.teichmuller(linv)),
                                    r.zero(),
                                    r.pi_pow(1),
                                    r.teichmuller(l),
                                ],
                                0,
                            )
                            .unwrap();
                        let prod = g2.mul(&m1, &m2).unwrap();
                        let t = ctx.g_act(&prod, &f).unwrap();
                        ctx.axpy(&mut rhs, Fq::ONE, &t);
                    }
                    assert_eq!(lhs, rhs, "p={p}, backend={backend:?}");
                }
            }
        }
    }

    #[test]
    fn x0_extract_examples() {
        // f⁻ ∈ R₀⁻ → x₀ = 0
        let ctx = make_ctx(3, 1, &[1], 9, Backend::EqualChar, 1);
        let x0 = ctx.x0_extract(&pi_v0(&ctx)).unwrap();
        assert!(x0.is_zero());
        // f⁻ = Π·Sⁿ[Id,v₀] → x₀ = χ·Π·S^{n-1}[Id,v₀] (central value 1 here)
        for n in 1..=3usize {
            let sn = ctx.s_pow(n, &id_v0(&ctx)).unwrap();
            let f_minus = ctx.act_pi(&sn);
            let x0 = ctx.x0_extract(&f_minus).unwrap();
            let expect = ctx.act_pi(&ctx.s_pow(n - 1, &id_v0(&ctx)).unwrap());
            assert_eq!(x0, expect);
        }
        // linearity on random pairs
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let f1 = random_element(&ctx, &mut rng, 3, 3);
            let f2 = random_element(&ctx, &mut rng, 3, 3);
            let (_, m1) = ctx.split_pm(&f1);
            let (_, m2) = ctx.split_pm(&f2);
            let lhs = ctx.x0_extract(&ctx.add(&m1, &m2)).unwrap();
            let rhs = ctx.add(&ctx.x0_extract(&m1).unwrap(), &ctx.x0_extract(&m2).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn coset_expansion_reassembles() {
        // Π(f⁻) = y + Σ_μ ([μ],1;1,0)·x_μ exactly
        let ctx = make_ctx(3, 1, &[2], 10, Backend::EqualChar, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..8 {
            let f = random_element(&ctx, &mut rng, 3, 4);
            let (_, fm) = ctx.split_pm(&f);
            let (y, xs) = ctx.coset_expansion(&fm).unwrap();
            let mut reassembled = y.clone();
            for (mi, xmu) in xs.iter().enumerate() {
                let rep = ctx.g2.k_coset_rep(ctx.field().residue_elem(mi));
                let t = ctx.g_act(&rep, xmu).unwrap();
                ctx.axpy(&mut reassembled, Fq::ONE, &t);
            }
            assert_eq!(reassembled, ctx.act_pi(&fm));
        }
    }

    #[test]
    fn m_n_plus_properties() {
        let ctx = make_ctx(3, 1, &[1], 9, Backend::EqualChar, 1);
        // size qⁿ
        assert_eq!(ctx.m_n_plus_basis(0).unwrap().len(), 1);
        assert_eq!(ctx.m_n_plus_basis(2).unwrap().len(), 9);
        // every basis element fixed by (1, 𝔭ⁿ; 0, 1)
        let n = 2;
        let basis = ctx.m_n_plus_basis(n).unwrap();
        let r = &ctx.g2.ring;
        for j in n..n + 2 {
            for li in 1..ctx.q() {
                let mut x = r.teichmuller(ctx.field().residue_elem(li));
                for _ in 0..j {
                    x = r.mul_pi(&x);
                }
                let u = ctx.g2.u_plus(x);
                for b in &basis {
                    assert_eq!(&ctx.g_act(&u, b).unwrap(), b);
                }
            }
        }
    }

    #[test]
    fn grading_under_iz() {
        // i·(R_n^± basis vector) stays in the same graded piece
        let ctx = make_ctx(3, 1, &[1], 10, Backend::EqualChar, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let gens = ctx.g2.subgroup_generators(SubgroupSpec::I1, 4).unwrap();
        for n in 0..3usize {
            for side in [TreeSide::Plus, TreeSide::Minus] {
                for _ in 0..5 {
                    let paths = ctx.all_paths(n);
                    let path = paths[rng.gen_range(0..paths.len())].clone();
                    let mut v = ctx.weight.zero_vec();
                    v[rng.gen_range(0..ctx.weight.dim())] = Fq::ONE;
                    let e = InducedElement::single(VertexRep { side, path }, v);
                    let g = &gens[rng.gen_range(0..gens.len())];
                    let ge = ctx.g_act(g, &e).unwrap();
                    assert!(ge.terms.keys().all(|vt| vt.side == side && vt.grade() == n));
                }
            }
        }
    }

    #[test]
    fn rn_plus_decomposes_into_translated_minus() {
        // R_n⁺(σ) = ⊕_λ ([λ],1;1,0)·R_{n-1}⁻(σ): dimension and span equality
        let ctx = make_ctx(3, 1, &[1], 9, Backend::EqualChar, 1);
        for n in 1..=3usize {
            let dim_rn_plus = ctx.all_paths(n).len() * ctx.weight.dim();
            let mut image_vertices = std::collections::BTreeSet::new();
            for li in 0..ctx.q() {
                let rep = ctx.g2.k_coset_rep(ctx.field().residue_elem(li));
                for path in ctx.all_paths(n - 1) {
                    let e = InducedElement::single(
                        VertexRep { side: TreeSide::Minus, path },
                        ctx.weight.i1_line().unwrap(),
                    );
                    let t = ctx.g_act(&rep, &e).unwrap();
                    for vt in t.terms.keys() {
                        assert_eq!(vt.side, TreeSide::Plus);
                        assert_eq!(vt.grade(), n);
                        image_vertices.insert(vt.clone());
                    }
                }
            }
            // all qⁿ vertices are hit, q^{n-1} per translate, disjointly
            assert_eq!(image_vertices.len() * ctx.weight.dim(), dim_rn_plus);
        }
    }

    #[test]
    fn t_plus_minus_grading_and_ranks() {
        for (p, f, r) in [(2u64, 1usize, vec![0usize]), (3, 1, vec![1]), (3, 1, vec![0])] {
            let ctx = make_ctx(p, f, &r, 9, Backend::EqualChar, 1);
            let dim = ctx.weight.dim();
            let q = ctx.q();
            for n in 1..=2usize {
                // assemble matrices of T⁺ and T⁻ on R_n⁻
                let dom: Vec<VertexRep> = ctx
                    .all_paths(n)
                    .into_iter()
                    .map(|p| VertexRep { side: TreeSide::Minus, path: p })
                    .collect();
                let cod_up: Vec<VertexRep> = ctx
                    .all_paths(n + 1)
                    .into_iter()
                    .map(|p| VertexRep { side: TreeSide::Minus, path: p })
                    .collect();
                let cod_down: Vec<VertexRep> = ctx
                    .all_paths(n - 1)
                    .into_iter()
                    .map(|p| VertexRep { side: TreeSide::Minus, path: p })
                    .collect();
                let index_up: BTreeMap<&VertexRep, usize> =
                    cod_up.iter().enumerate().map(|(i, v)| (v, i)).collect();
                let index_down: BTreeMap<&VertexRep, usize> =
                    cod_down.iter().enumerate().map(|(i, v)| (v, i)).collect();
                let mut mat_up = Mat::zeros(cod_up.len() * dim, dom.len() * dim);
                let mut mat_down = Mat::zeros(cod_down.len() * dim, dom.len() * dim);
                for (ci, vert) in dom.iter().enumerate() {
                    for cj in 0..dim {
                        let mut v = ctx.weight.zero_vec();
                        v[cj] = Fq::ONE;
                        let e = InducedElement::single(vert.clone(), v);
                        let (up, down) = ctx.t_plus_minus(&e).unwrap();
                        for (vt, w) in &up.terms {
                            let bi = index_up[vt];
                            for (wi, &c) in w.iter().enumerate() {
                                mat_up[(bi * dim + wi, ci * dim + cj)] = c;
                            }
                        }
                        for (vt, w) in &down.terms {
                            let bi = index_down[vt];
                            for (wi, &c) in w.iter().enumerate() {
                                mat_down[(bi * dim + wi, ci * dim + cj)] = c;
                            }
                        }
                    }
                }
                // T⁺ injective: rank = dim R_n⁻ = qⁿ·dim σ
                assert_eq!(mat_up.rank(ctx.field()), q.pow(n as u32) * dim, "p={p} n={n} up");
                // T⁻ surjective: rank = dim R_{n-1}⁻
                assert_eq!(
                    mat_down.rank(ctx.field()),
                    q.pow((n - 1) as u32) * dim,
                    "p={p} n={n} down"
                );
            }
        }
    }

    #[test]
    fn h_invariance_of_s() {
        // the elementary invariance statements for S under I₁∩U⁺, the
        // diagonal pro-p torus, and I₁
        let ctx = make_ctx(3, 1, &[1], 11, Backend::EqualChar, 1);
        let r = &ctx.g2.ring;
        let v = id_v0(&ctx);
        let sv = ctx.s_apply(&v).unwrap();
        // (i) fixed by I₁∩U⁺
        for g in ctx.g2.subgroup_generators(SubgroupSpec::UplusO, 4).unwrap() {
            assert_eq!(ctx.g_act(&g, &sv).unwrap(), sv);
        }
        // (ii) h·Sv = S(h·v) for h in the diagonal pro-p torus
        for li in 1..ctx.q() {
            let d = r.add(&r.one(), &r.mul_pi(&r.teichmuller(ctx.field().residue_elem(li)))).unwrap();
            let h = ctx.g2.diag(d.clone(), r.one());
            let lhs = ctx.g_act(&h, &sv).unwrap();
            let rhs = ctx.s_apply(&ctx.g_act(&h, &v).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            let h2 = ctx.g2.diag(r.one(), d);
            let lhs = ctx.g_act(&h2, &sv).unwrap();
            let rhs = ctx.s_apply(&ctx.g_act(&h2, &v).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
        // (iv) Sv fixed by I₁ when v is
        for g in ctx.g2.subgroup_generators(SubgroupSpec::I1, 4).unwrap() {
            assert_eq!(ctx.g_act(&g, &v).unwrap(), v, "v₀ must be I₁-fixed");
            assert_eq!(ctx.g_act(&g, &sv).unwrap(), sv);
        }
    }

    #[test]
    fn pt_correction_witness_identity() {
        let ctx = make_ctx(3, 1, &[1], 12, Backend::EqualChar, 1);
        let k = ctx.field();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        // polynomials (T-1), (T-1)(T-2) = T²-3T+2 = T²+2 over F₃, and a cubic
        let polys: Vec<Vec<Fq>> = vec![
            vec![k.neg(Fq::ONE), Fq::ONE],
            vec![k.from_int(2), k.from_int(0), Fq::ONE],
            vec![k.neg(Fq::ONE), Fq::ZERO, Fq::ZERO, Fq::ONE],
        ];
        for poly in &polys {
            for _ in 0..6 {
                // random f in ⊕_{n≥k} R_n⁻ with k = 1
                let mut f = InducedElement::zero();
                for _ in 0..3 {
                    let n = rng.gen_range(1..3usize);
                    let paths = ctx.all_paths(n);
                    let path = paths[rng.gen_range(0..paths.len())].clone();
                    let mut v = ctx.weight.zero_vec();
                    for c in v.iter_mut() {
                        *c = Fq(rng.gen_range(0..ctx.field().order()) as u16);
                    }
                    ctx.add_term(&mut f, VertexRep { side: TreeSide::Minus, path }, &v, Fq::ONE);
                }
                if f.is_zero() {
                    continue;
                }
                let kmin = f.terms.keys().map(|v| v.grade()).min().unwrap();
                let (fp, witness) = ctx.pt_correction(&f, poly).unwrap();
                // f' lives strictly above grade kmin, on the Minus side
                assert!(fp
                    .terms
                    .keys()
                    .all(|v| v.side == TreeSide::Minus && v.grade() > kmin));
                assert!(witness
                    .terms
                    .keys()
                    .all(|v| v.side == TreeSide::Minus && v.grade() > kmin));
                // f + f' = P(T)(witness)
                let lhs = ctx.add(&f, &fp);
                let rhs = ctx.apply_poly(poly, &witness);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn radius_growth_under_p_t() {
        // radius(P(T)·f) = radius(f) + deg P for nonzero f
        let ctx = make_ctx(3, 1, &[2], 12, Backend::EqualChar, 1);
        let k = ctx.field();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let polys: Vec<Vec<Fq>> = vec![
            vec![k.neg(Fq::ONE), Fq::ONE],
            vec![Fq::ZERO, Fq::ONE],
            vec![Fq::ONE, Fq::ONE, Fq::ONE],
        ];
        for poly in &polys {
            for _ in 0..10 {
                let f = random_element(&ctx, &mut rng, 3, 3);
                if f.is_zero() {
                    continue;
                }
                let pf = ctx.apply_poly(poly, &f);
                assert_eq!(pf.radius(), f.radius() + poly.len() - 1);
            }
        }
    }
}
