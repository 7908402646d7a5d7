//! Elements of G = GL₂(F) at finite precision, subgroup membership, and the
//! canonical-word, Iwahori and K/I decompositions.
//!
//! A group element is stored as ϖ^(-shift)·M with M an integral 2×2 matrix
//! normalized so that the minimal entry valuation is 0. With that
//! normalization, KZ-membership is just "det M is a unit", and the
//! canonical-word extraction is syntactic digit peeling.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::localring::{FieldCtx, Fq, LocalRingCtx, LocalScalar};

/// ϖ^(-shift) · [[a, b], [c, d]], entries integral, min valuation 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    /// entries [a, b, c, d] row-major
    pub mat: [LocalScalar; 4],
    pub shift: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgroupSpec {
    K,
    Z,
    KZ,
    /// Iwahori: upper triangular mod ϖ
    I,
    /// pro-p Iwahori: upper unipotent mod ϖ
    I1,
    /// principal congruence subgroup 1 + ϖⁿM₂(O)
    Kn(usize),
    /// (1+𝔭ⁿ, 𝔭^(n-1); 𝔭ⁿ, 1+𝔭ⁿ)
    In(usize),
    IZ,
    /// monoid (O−0, O; 0, 1)
    Pplus,
    /// diagonal Teichmüller torus ([λ], 0; 0, [μ])
    H,
    /// (1, O; 0, 1)
    UplusO,
    /// (1, 0; 𝔭, 1)
    UminusP,
}

/// Side of the coset decomposition G = P⁺KZ ⊔ ΠP⁺KZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Plus,
    PiSide,
}

/// The unique word g = (Π?)·g_{λ(0)}·g_{λ(1)}···g_{λ(n-1)}·tail with
/// tail ∈ KZ, where g_λ = (ϖ, [λ]; 0, 1) and λ(i) is the i-th ϖ-digit of
/// the coset parameter b (lowest digit leftmost in the product).
#[derive(Debug, Clone)]
pub struct CosetWord {
    pub side: Side,
    /// ϖ-digits of the coset parameter, lowest first
    pub digits: Vec<Fq>,
    pub tail: GroupElement,
}

impl CosetWord {
    pub fn length(&self) -> usize {
        self.digits.len() + usize::from(self.side == Side::PiSide)
    }
}

pub struct Gl2Ctx {
    pub ring: Arc<LocalRingCtx>,
}

impl Gl2Ctx {
    pub fn new(ring: Arc<LocalRingCtx>) -> Arc<Gl2Ctx> {
        Arc::new(Gl2Ctx { ring })
    }

    pub fn field(&self) -> &FieldCtx {
        &self.ring.field
    }

    pub fn from_entries(&self, entries: [LocalScalar; 4], shift: i64) -> Result<GroupElement> {
        self.normalize(GroupElement { mat: entries, shift })
    }

    fn normalize(&self, mut g: GroupElement) -> Result<GroupElement> {
        let r = &self.ring;
        let minval = g.mat.iter().map(|e| r.valuation(e)).min().unwrap();
        let prec = g.mat.iter().map(|e| e.precision()).min().unwrap();
        if minval >= prec {
            return Err(Error::Precision("matrix is zero at working precision".into()));
        }
        for _ in 0..minval {
            for e in g.mat.iter_mut() {
                *e = r.div_pi(e)?;
            }
        }
        g.shift -= minval as i64;
        // invertibility must be certifiable at remaining precision
        let d = self.det(&g)?;
        if r.is_zero(&d) {
            return Err(Error::Precision("determinant vanishes at working precision".into()));
        }
        Ok(g)
    }

    fn det(&self, g: &GroupElement) -> Result<LocalScalar> {
        let r = &self.ring;
        let ad = r.mul(&g.mat[0], &g.mat[3])?;
        let bc = r.mul(&g.mat[1], &g.mat[2])?;
        r.sub(&ad, &bc)
    }

    pub fn det_valuation(&self, g: &GroupElement) -> Result<i64> {
        Ok(self.ring.valuation(&self.det(g)?) as i64 - 2 * g.shift)
    }

    pub fn identity(&self) -> GroupElement {
        let r = &self.ring;
        GroupElement {
            mat: [r.one(), r.zero(), r.zero(), r.one()],
            shift: 0,
        }
    }

    /// Π = (0, 1; ϖ, 0)
    pub fn pi_elt(&self) -> GroupElement {
        let r = &self.ring;
        GroupElement { mat: [r.zero(), r.one(), r.pi_pow(1), r.zero()], shift: 0 }
    }

    /// s = (0, 1; 1, 0)
    pub fn s_elt(&self) -> GroupElement {
        let r = &self.ring;
        GroupElement { mat: [r.zero(), r.one(), r.one(), r.zero()], shift: 0 }
    }

    /// g_λ = (ϖ, [λ]; 0, 1)
    pub fn g_lambda(&self, lambda: Fq) -> GroupElement {
        let r = &self.ring;
        GroupElement {
            mat: [r.pi_pow(1), r.teichmuller(lambda), r.zero(), r.one()],
            shift: 0,
        }
    }

    /// upper unipotent (1, x; 0, 1)
    pub fn u_plus(&self, x: LocalScalar) -> GroupElement {
        let r = &self.ring;
        GroupElement { mat: [r.one(), x, r.zero(), r.one()], shift: 0 }
    }

    /// lower unipotent (1, 0; y, 1)
    pub fn u_minus(&self, y: LocalScalar) -> GroupElement {
        let r = &self.ring;
        GroupElement { mat: [r.one(), r.zero(), y, r.one()], shift: 0 }
    }

    pub fn diag(&self, a: LocalScalar, d: LocalScalar) -> GroupElement {
        let r = &self.ring;
        GroupElement { mat: [a, r.zero(), r.zero(), d], shift: 0 }
    }

    /// ([λ], 1; 1, 0), the K/I coset translate of Eq-6 type.
    pub fn k_coset_rep(&self, lambda: Fq) -> GroupElement {
        let r = &self.ring;
        GroupElement { mat: [r.teichmuller(lambda), r.one(), r.one(), r.zero()], shift: 0 }
    }

    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        let r = &self.ring;
        let prec = x.mat.iter().chain(y.mat.iter()).map(|e| e.precision()).min().unwrap();
        let xa = |i: usize| r.truncate(&x.mat[i], prec);
        let ya = |i: usize| r.truncate(&y.mat[i], prec);
        let e = |i: usize, j: usize| -> Result<LocalScalar> {
            let p1 = r.mul(&xa(2 * i), &ya(j))?;
            let p2 = r.mul(&xa(2 * i + 1), &ya(2 + j))?;
            r.add(&p1, &p2)
        };
        self.normalize(GroupElement {
            mat: [e(0, 0)?, e(0, 1)?, e(1, 0)?, e(1, 1)?],
            shift: x.shift + y.shift,
        })
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        let r = &self.ring;
        let d = self.det(g)?;
        let dv = r.valuation(&d);
        let mut unit = d;
        for _ in 0..dv {
            unit = r.div_pi(&unit)?;
        }
        let uinv = r.inv(&unit)?;
        // adj(M)/det(M) = ϖ^{-dv}·uinv·adj(M); entries stay integral, the
        // ϖ^{-dv} moves into the shift. Dividing out ϖ^dv costs dv digits
        // of precision.
        let np = uinv.precision();
        let t = |i: usize| r.truncate(&g.mat[i], np);
        let adj = [
            r.mul(&t(3), &uinv)?,
            r.mul(&r.neg(&t(1)), &uinv)?,
            r.mul(&r.neg(&t(2)), &uinv)?,
            r.mul(&t(0), &uinv)?,
        ];
        self.normalize(GroupElement { mat: adj, shift: dv as i64 - g.shift })
    }

    /// Scalar ϖ^k with k possibly negative (central element).
    pub fn central_pi_pow(&self, k: i64) -> GroupElement {
        let r = &self.ring;
        GroupElement { mat: [r.one(), r.zero(), r.zero(), r.one()], shift: -k }
    }

    pub fn member(&self, g: &GroupElement, spec: SubgroupSpec) -> Result<bool> {
        let r = &self.ring;
        let prec = g.mat.iter().map(|e| e.precision()).min().unwrap();
        let val = |i: usize| r.valuation(&g.mat[i]);
        let detv = r.valuation(&self.det(g)?);
        let in_kz = detv == 0;
        let one = r.one();
        // x ≡ 1 mod ϖ^n at available precision
        let unit_congruent_one = |i: usize, n: usize| -> Result<bool> {
            let t = r.truncate(&g.mat[i], prec);
            let o = r.truncate(&one, prec);
            let d = r.sub(&t, &o)?;
            Ok(r.valuation(&d) >= n.min(prec))
        };
        Ok(match spec {
            SubgroupSpec::K => g.shift == 0 && in_kz,
            SubgroupSpec::KZ => in_kz,
            SubgroupSpec::Z => {
                let b0 = val(1) >= prec && val(2) >= prec;
                let diag_eq = {
                    let d = r.sub(
                        &r.truncate(&g.mat[0], prec),
                        &r.truncate(&g.mat[3], prec),
                    )?;
                    r.valuation(&d) >= prec
                };
                b0 && diag_eq
            }
            SubgroupSpec::I => g.shift == 0 && in_kz && val(0) == 0 && val(3) == 0 && val(2) >= 1,
            SubgroupSpec::IZ => {
                in_kz && {
                    // a ϖ-central multiple of an Iwahori element: after
                    // normalization min val is 0 and det is a unit, so just
                    // the I-shape conditions
                    val(0) == 0 && val(3) == 0 && val(2) >= 1
                }
            }
            SubgroupSpec::I1 => {
                g.shift == 0
                    && in_kz
                    && val(2) >= 1
                    && unit_congruent_one(0, 1)?
                    && unit_congruent_one(3, 1)?
            }
            SubgroupSpec::Kn(n) => {
                if n >= prec {
                    return Err(Error::Precision(format!(
                        "congruence level {n} needs precision > {n}, have {prec}"
                    )));
                }
                g.shift == 0
                    && in_kz
                    && val(1) >= n
                    && val(2) >= n
                    && unit_congruent_one(0, n)?
                    && unit_congruent_one(3, n)?
            }
            SubgroupSpec::In(n) => {
                if n >= prec {
                    return Err(Error::Precision(format!(
                        "congruence level {n} needs precision > {n}, have {prec}"
                    )));
                }
                g.shift == 0
                    && in_kz
                    && val(1) >= n.saturating_sub(1)
                    && val(2) >= n
                    && unit_congruent_one(0, n)?
                    && unit_congruent_one(3, n)?
            }
            SubgroupSpec::Pplus => {
                g.shift == 0 && val(2) >= prec && {
                    let d = r.sub(&r.truncate(&g.mat[3], prec), &r.truncate(&one, prec))?;
                    r.valuation(&d) >= prec
                }
            }
            SubgroupSpec::H => {
                g.shift == 0 && in_kz && val(1) >= prec && val(2) >= prec && {
                    let ta = r.teichmuller(r.reduce_mod_pi(&g.mat[0]));
                    let td = r.teichmuller(r.reduce_mod_pi(&g.mat[3]));
                    let da = r.sub(&r.truncate(&g.mat[0], prec), &r.truncate(&ta, prec))?;
                    let dd = r.sub(&r.truncate(&g.mat[3], prec), &r.truncate(&td, prec))?;
                    r.valuation(&da) >= prec && r.valuation(&dd) >= prec
                }
            }
            SubgroupSpec::UplusO => {
                g.shift == 0
                    && val(2) >= prec
                    && unit_congruent_one(0, prec)?
                    && unit_congruent_one(3, prec)?
            }
            SubgroupSpec::UminusP => {
                g.shift == 0
                    && val(1) >= prec
                    && val(2) >= 1
                    && unit_congruent_one(0, prec)?
                    && unit_congruent_one(3, prec)?
            }
        })
    }

    /// The canonical word of Eq-style G = P⁺KZ ⊔ ΠP⁺KZ. After normalization
    /// an element lies on the Plus side iff its bottom row contains a unit.
    pub fn cartan_word(&self, g: &GroupElement) -> Result<CosetWord> {
        let r = &self.ring;
        let mut side = Side::Plus;
        let mut work = g.clone();
        let bottom_has_unit =
            r.valuation(&work.mat[2]) == 0 || r.valuation(&work.mat[3]) == 0;
        if !bottom_has_unit {
            // Π-side: peel Π from the left
            let pinv = self.inv(&self.pi_elt())?;
            work = self.mul(&pinv, &work)?;
            side = Side::PiSide;
        }
        // Now work ∈ P⁺KZ. Column-reduce to (ϖⁿ, b; 0, 1)·k form.
        // Pivot on a bottom-row unit.
        let (a, b, c, d) = (0usize, 1usize, 2usize, 3usize);
        let mut m = work.mat.clone();
        let prec = m.iter().map(|e| e.precision()).min().unwrap();
        for e in m.iter_mut() {
            *e = r.truncate(e, prec);
        }
        // tail accumulates the inverse column operations: m_orig = m_new * tail
        let mut tail = self.identity();
        if r.valuation(&m[d]) != 0 {
            // swap columns (right-multiply by s, s⁻¹ = s)
            m.swap(a, b);
            m.swap(c, d);
            tail = self.mul(&self.s_elt(), &tail)?;
        }
        debug_assert_eq!(r.valuation(&m[d]), 0);
        // clear c: col1 -= (c/d)·col2  (right mult by (1,0;-c/d,1)), inverse is (1,0;c/d,1)
        let cd = r.mul(&m[c], &r.inv(&m[d])?)?;
        {
            let t0 = r.sub(&m[a], &r.mul(&m[b], &cd)?)?;
            let t2 = r.sub(&m[c], &r.mul(&m[d], &cd)?)?;
            m[a] = t0;
            m[c] = t2;
            tail = self.mul(&self.u_minus_raw(cd)?, &tail)?;
        }
        debug_assert!(r.valuation(&m[c]) >= prec);
        // scale col2 by d⁻¹ (tail gets diag(1,d))
        let dinv = r.inv(&m[d])?;
        m[b] = r.mul(&m[b], &dinv)?;
        let dunit = std::mem::replace(&mut m[d], r.one());
        tail = self.mul(&self.diag(r.one(), dunit), &tail)?;
        // a = ϖⁿ·u: scale col1 by u⁻¹
        let n = r.valuation(&m[a]);
        if n >= prec {
            return Err(Error::Precision("coset parameter exceeds precision".into()));
        }
        let mut u = m[a].clone();
        for _ in 0..n {
            u = r.div_pi(&u)?;
        }
        m[a] = r.truncate(&r.pi_pow(n), prec);
        tail = self.mul(&self.diag(u, r.one()), &tail)?;
        // reduce b mod ϖⁿ: b = b̃ + ϖⁿ·x, col2 -= x·col1 ⇒ tail gets (1,x;0,1).
        // x is only known mod ϖ^(prec-n); padding with zero digits is fine
        // because downstream consumers use the tail through its reduction
        // mod ϖ and central valuation only.
        let digits_all = r.teich_digits(&m[b])?;
        let digits: Vec<Fq> = digits_all[..n.min(digits_all.len())].to_vec();
        let btilde = r.from_teich_digits(&digits, prec)?;
        let x_scaled = r.sub(&m[b], &btilde)?;
        let mut x = x_scaled;
        for _ in 0..n {
            x = r.div_pi(&x)?;
        }
        let xfull = {
            let ds = r.teich_digits(&x)?;
            r.from_teich_digits(&ds, prec)?
        };
        tail = self.mul(&self.u_plus(xfull), &tail)?;
        // central ϖ-shift of the original element goes to the tail
        if work.shift != 0 {
            tail = self.mul(&self.central_pi_pow(-work.shift), &tail)?;
        }
        Ok(CosetWord { side, digits, tail })
    }

    fn u_minus_raw(&self, y: LocalScalar) -> Result<GroupElement> {
        let r = &self.ring;
        let prec = y.precision();
        Ok(GroupElement {
            mat: [r.truncate(&r.one(), prec), r.truncate(&r.zero(), prec), y, r.truncate(&r.one(), prec)],
            shift: 0,
        })
    }

    /// ℓ(g): 0 iff g ∈ KZ.
    pub fn length(&self, g: &GroupElement) -> Result<usize> {
        Ok(self.cartan_word(g)?.length())
    }

    /// Rebuild the element from its word: (Π?)·g_{d0}·g_{d1}···tail.
    pub fn reassemble(&self, w: &CosetWord) -> Result<GroupElement> {
        let mut acc = w.tail.clone();
        for &d in w.digits.iter().rev() {
            acc = self.mul(&self.g_lambda(d), &acc)?;
        }
        if w.side == Side::PiSide {
            acc = self.mul(&self.pi_elt(), &acc)?;
        }
        Ok(acc)
    }

    /// Iwahori factorization g = upper · diag · lower for g ∈ I₁.
    pub fn iwahori_factor(
        &self,
        g: &GroupElement,
    ) -> Result<(GroupElement, GroupElement, GroupElement)> {
        if !self.member(g, SubgroupSpec::I1)? {
            return Err(Error::Domain("iwahori_factor requires g ∈ I₁".into()));
        }
        let r = &self.ring;
        let prec = g.mat.iter().map(|e| e.precision()).min().unwrap();
        let at = |i: usize| r.truncate(&g.mat[i], prec);
        let dinv = r.inv(&at(3))?;
        let x = r.mul(&at(1), &dinv)?;
        let y = r.mul(&at(2), &dinv)?;
        let t1 = r.sub(&at(0), &r.mul(&r.mul(&at(1), &at(2))?, &dinv)?)?;
        let upper = self.u_plus(x);
        let diag = self.diag(t1, at(3));
        let lower = self.u_minus(y);
        Ok((upper, diag, lower))
    }

    /// K = I ⊔ ⊔_λ ([λ],1;1,0)·I: locate k's coset.
    pub fn k_coset(&self, k: &GroupElement) -> Result<KCoset> {
        if !self.member(k, SubgroupSpec::K)? {
            return Err(Error::Domain("k_coset requires k ∈ K".into()));
        }
        let r = &self.ring;
        let cbar = r.reduce_mod_pi(&k.mat[2]);
        if cbar.is_zero() {
            return Ok(KCoset::InI(k.clone()));
        }
        let abar = r.reduce_mod_pi(&k.mat[0]);
        let lambda = self.field().mul(abar, self.field().inv(cbar)?);
        let rep = self.k_coset_rep(lambda);
        let i = self.mul(&self.inv(&rep)?, k)?;
        Ok(KCoset::Translated(lambda, i))
    }

    /// Constructive Iwahori-commutation: given i ∈ IZ and h = (ϖⁿ, x; 0, 1),
    /// rewrite i·h = h'·i' with h' of the same shape and i' ∈ IZ.
    pub fn rewrite_iz_past_pplus(
        &self,
        i: &GroupElement,
        h: &GroupElement,
    ) -> Result<(GroupElement, GroupElement)> {
        let m = self.mul(i, h)?;
        let w = self.cartan_word(&m)?;
        if w.side != Side::Plus {
            return Err(Error::Domain("product left the P⁺KZ side".into()));
        }
        let prec = m.mat.iter().map(|e| e.precision()).min().unwrap();
        let b = self.ring.from_teich_digits(&w.digits, prec)?;
        let n = w.digits.len();
        let hp = GroupElement {
            mat: [
                self.ring.truncate(&self.ring.pi_pow(n), prec),
                b,
                self.ring.truncate(&self.ring.zero(), prec),
                self.ring.truncate(&self.ring.one(), prec),
            ],
            shift: 0,
        };
        Ok((hp, w.tail.clone()))
    }

    /// Generators of the finite image of a pro-p subgroup acting at
    /// congruence depth `level` (digit one-parameter elements).
    pub fn subgroup_generators(&self, spec: SubgroupSpec, level: usize) -> Result<Vec<GroupElement>> {
        let r = &self.ring;
        let field = self.field();
        let mut gens = vec![];
        let nonzero_res: Vec<Fq> =
            field.residue_elements().iter().copied().filter(|l| !l.is_zero()).collect();
        let depth = level.min(r.precision().saturating_sub(1));
        let digit = |l: Fq, j: usize| -> LocalScalar {
            let mut x = r.teichmuller(l);
            for _ in 0..j {
                x = r.mul_pi(&x);
            }
            x
        };
        match spec {
            SubgroupSpec::UplusO => {
                for j in 0..depth {
                    for &l in &nonzero_res {
                        gens.push(self.u_plus(digit(l, j)));
                    }
                }
            }
            SubgroupSpec::UminusP => {
                for j in 1..=depth {
                    for &l in &nonzero_res {
                        gens.push(self.u_minus(digit(l, j)));
                    }
                }
            }
            SubgroupSpec::I1 => {
                for j in 0..depth {
                    for &l in &nonzero_res {
                        gens.push(self.u_plus(digit(l, j)));
                    }
                }
                for j in 1..=depth {
                    for &l in &nonzero_res {
                        gens.push(self.u_minus(digit(l, j)));
                        let one = r.one();
                        gens.push(self.diag(r.add(&one, &digit(l, j))?, one.clone()));
                        gens.push(self.diag(one.clone(), r.add(&one, &digit(l, j))?));
                    }
                }
            }
            SubgroupSpec::Kn(n) => {
                for j in n..=depth {
                    for &l in &nonzero_res {
                        gens.push(self.u_plus(digit(l, j)));
                        gens.push(self.u_minus(digit(l, j)));
                        let one = r.one();
                        gens.push(self.diag(r.add(&one, &digit(l, j))?, one.clone()));
                        gens.push(self.diag(one.clone(), r.add(&one, &digit(l, j))?));
                    }
                }
            }
            SubgroupSpec::In(n) => {
                for j in n.saturating_sub(1)..=depth {
                    for &l in &nonzero_res {
                        gens.push(self.u_plus(digit(l, j)));
                    }
                }
                for j in n..=depth {
                    for &l in &nonzero_res {
                        gens.push(self.u_minus(digit(l, j)));
                        let one = r.one();
                        gens.push(self.diag(r.add(&one, &digit(l, j))?, one.clone()));
                        gens.push(self.diag(one.clone(), r.add(&one, &digit(l, j))?));
                    }
                }
            }
            SubgroupSpec::I => {
                gens.extend(self.subgroup_generators(SubgroupSpec::I1, level)?);
                for &l in &nonzero_res {
                    gens.push(self.diag(r.teichmuller(l), r.one()));
                    gens.push(self.diag(r.one(), r.teichmuller(l)));
                }
            }
            SubgroupSpec::H => {
                for &l in &nonzero_res {
                    gens.push(self.diag(r.teichmuller(l), r.one()));
                    gens.push(self.diag(r.one(), r.teichmuller(l)));
                }
            }
            _ => {
                return Err(Error::Domain(format!(
                    "no digit generating set for {spec:?}"
                )))
            }
        }
        Ok(gens)
    }

    /// "[[a,b],[c,d]] * w^-e" with scalars in the ring's text format.
    pub fn format(&self, g: &GroupElement) -> String {
        let r = &self.ring;
        let body = format!(
            "[[{},{}],[{},{}]]",
            r.format(&g.mat[0]),
            r.format(&g.mat[1]),
            r.format(&g.mat[2]),
            r.format(&g.mat[3])
        );
        if g.shift == 0 {
            body
        } else {
            format!("{body} * w^{}", -g.shift)
        }
    }

    pub fn parse(&self, s: &str) -> Result<GroupElement> {
        let s = s.trim();
        let (body, shift) = match s.split_once("* w^") {
            Some((b, e)) => {
                let ev: i64 =
                    e.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {e}")))?;
                (b.trim(), -ev)
            }
            None => (s, 0),
        };
        let inner = body
            .strip_prefix("[[")
            .and_then(|x| x.strip_suffix("]]"))
            .ok_or_else(|| Error::Parse(format!("bad matrix literal {body}")))?;
        let halves: Vec<&str> = inner.split("],[").collect();
        if halves.len() != 2 {
            return Err(Error::Parse("matrix literal needs two rows".into()));
        }
        let mut entries = vec![];
        for h in halves {
            for part in h.split(',') {
                entries.push(self.ring.parse(part)?);
            }
        }
        if entries.len() != 4 {
            return Err(Error::Parse("matrix literal needs four entries".into()));
        }
        let m: [LocalScalar; 4] = [
            entries[0].clone(),
            entries[1].clone(),
            entries[2].clone(),
            entries[3].clone(),
        ];
        self.from_entries(m, shift)
    }
}

#[derive(Debug, Clone)]
pub enum KCoset {
    InI(GroupElement),
    Translated(Fq, GroupElement),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localring::Backend;

    fn ctx(p: u64, f: usize, n: usize, backend: Backend) -> Arc<Gl2Ctx> {
        let fc = Arc::new(FieldCtx::new(p, f, f).unwrap());
        let ring = LocalRingCtx::new(fc, backend, n).unwrap();
        Gl2Ctx::new(ring)
    }

    #[test]
    fn pi_squared_is_central_pi() {
        let g = ctx(5, 1, 6, Backend::EqualChar);
        let pi = g.pi_elt();
        let p2 = g.mul(&pi, &pi).unwrap();
        // ϖ·Id normalizes to Id with shift -1
        assert_eq!(p2.shift, -1);
        let r = &g.ring;
        assert!(r.is_unit(&p2.mat[0]));
        assert!(r.is_zero(&p2.mat[1]));
        assert!(r.is_zero(&p2.mat[2]));
        assert_eq!(r.format(&p2.mat[0]), r.format(&p2.mat[3]));
    }

    #[test]
    fn pi_times_s_is_diag() {
        let g = ctx(5, 1, 6, Backend::EqualChar);
        let m = g.mul(&g.pi_elt(), &g.s_elt()).unwrap();
        let r = &g.ring;
        assert_eq!(r.format(&m.mat[0]), "1");
        assert!(r.is_zero(&m.mat[1]));
        assert!(r.is_zero(&m.mat[2]));
        assert_eq!(r.valuation(&m.mat[3]), 1);
    }

    #[test]
    fn inverse_roundtrip() {
        let g = ctx(3, 1, 8, Backend::MixedChar);
        let x = g.g_lambda(g.field().from_int(2));
        let xinv = g.inv(&x).unwrap();
        let prod = g.mul(&xinv, &x).unwrap();
        assert!(g.member(&prod, SubgroupSpec::Z).unwrap());
        assert_eq!(g.length(&prod).unwrap(), 0);
    }

    #[test]
    fn membership_examples() {
        let g = ctx(5, 1, 6, Backend::EqualChar);
        let r = &g.ring;
        // (1,3;0,1) ∈ I₁
        let u = g.u_plus(r.from_integer(3));
        assert!(g.member(&u, SubgroupSpec::I1).unwrap());
        // s ∉ I
        assert!(!g.member(&g.s_elt(), SubgroupSpec::I).unwrap());
        assert!(g.member(&g.s_elt(), SubgroupSpec::K).unwrap());
        // (1+ϖ², ϖ; ϖ², 1+ϖ²) ∈ I₂
        let e = g
            .from_entries(
                [
                    r.add(&r.one(), &r.pi_pow(2)).unwrap(),
                    r.pi_pow(1),
                    r.pi_pow(2),
                    r.add(&r.one(), &r.pi_pow(2)).unwrap(),
                ],
                0,
            )
            .unwrap();
        assert!(g.member(&e, SubgroupSpec::In(2)).unwrap());
        assert!(!g.member(&e, SubgroupSpec::In(3)).unwrap());
    }

    #[test]
    fn cartan_word_examples() {
        let g = ctx(5, 1, 8, Backend::EqualChar);
        let r = &g.ring;
        // (ϖ,0;0,1) → Plus, digits (0), tail ∈ KZ trivial
        let e = g.from_entries([r.pi_pow(1), r.zero(), r.zero(), r.one()], 0).unwrap();
        let w = g.cartan_word(&e).unwrap();
        assert_eq!(w.side, Side::Plus);
        assert_eq!(w.digits, vec![Fq::ZERO]);
        assert_eq!(w.length(), 1);
        assert_eq!(g.length(&g.identity()).unwrap(), 0);

        // (1,0;0,ϖ) = Π·s → PiSide, no digits, length 1
        let e = g.from_entries([r.one(), r.zero(), r.zero(), r.pi_pow(1)], 0).unwrap();
        let w = g.cartan_word(&e).unwrap();
        assert_eq!(w.side, Side::PiSide);
        assert!(w.digits.is_empty());
        assert_eq!(w.length(), 1);
        // tail is s modulo Z: reassembly must reproduce the element
        let back = g.reassemble(&w).unwrap();
        assert_eq!(g.format(&back), g.format(&e));

        // Π has length 1
        assert_eq!(g.length(&g.pi_elt()).unwrap(), 1);

        // (ϖ², [μ]+ϖ[ν]; 0,1) → Plus, digit word (μ, ν) low-first, tail ∈ KZ
        let mu = g.field().from_int(3);
        let nu = g.field().from_int(2);
        let b = r
            .add(&r.teichmuller(mu), &r.mul_pi(&r.teichmuller(nu)))
            .unwrap();
        let e = g.from_entries([r.pi_pow(2), b, r.zero(), r.one()], 0).unwrap();
        let w = g.cartan_word(&e).unwrap();
        assert_eq!(w.side, Side::Plus);
        assert_eq!(w.digits, vec![mu, nu]);
        assert!(g.member(&w.tail, SubgroupSpec::KZ).unwrap());
        assert_eq!(g.length(&e).unwrap(), 2);

        // g_λ·g_μ has length 2
        let x = g
            .mul(&g.g_lambda(g.field().from_int(1)), &g.g_lambda(g.field().from_int(4)))
            .unwrap();
        assert_eq!(g.length(&x).unwrap(), 2);
    }

    #[test]
    fn iwahori_factor_reassembles() {
        let g = ctx(3, 1, 8, Backend::EqualChar);
        let r = &g.ring;
        let e = g
            .from_entries(
                [
                    r.add(&r.one(), &r.pi_pow(1)).unwrap(),
                    r.pi_pow(1),
                    r.pi_pow(1),
                    r.add(&r.one(), &r.pi_pow(1)).unwrap(),
                ],
                0,
            )
            .unwrap();
        let (u, t, l) = g.iwahori_factor(&e).unwrap();
        assert!(g.member(&u, SubgroupSpec::UplusO).unwrap());
        assert!(g.member(&l, SubgroupSpec::UminusP).unwrap());
        let prod = g.mul(&g.mul(&u, &t).unwrap(), &l).unwrap();
        assert_eq!(g.format(&prod), g.format(&e));
        // identity factors trivially
        let (u, t, l) = g.iwahori_factor(&g.identity()).unwrap();
        for e in [u, t, l] {
            assert_eq!(g.length(&e).unwrap(), 0);
            assert!(g.member(&e, SubgroupSpec::I1).unwrap());
        }
        // non-I₁ input rejected
        assert!(g.iwahori_factor(&g.s_elt()).is_err());
    }

    #[test]
    fn k_coset_examples() {
        let g = ctx(5, 1, 6, Backend::EqualChar);
        let r = &g.ring;
        // upper-triangular-mod-ϖ stays in I
        let u = g.u_plus(r.from_integer(2));
        assert!(matches!(g.k_coset(&u).unwrap(), KCoset::InI(_)));
        // s = ([0],1;1,0)
        match g.k_coset(&g.s_elt()).unwrap() {
            KCoset::Translated(l, i) => {
                assert!(l.is_zero());
                assert!(g.member(&i, SubgroupSpec::I).unwrap());
            }
            _ => panic!("s should be translated"),
        }
        // (2,1;1,0): λ = 2
        let e = g
            .from_entries([r.from_integer(2), r.one(), r.one(), r.zero()], 0)
            .unwrap();
        match g.k_coset(&e).unwrap() {
            KCoset::Translated(l, i) => {
                assert_eq!(l, g.field().from_int(2));
                assert!(g.member(&i, SubgroupSpec::I).unwrap());
                let back = g.mul(&g.k_coset_rep(l), &i).unwrap();
                assert_eq!(g.format(&back), g.format(&e));
            }
            _ => panic!("expected translated coset"),
        }
    }

    #[test]
    fn iz_rewrite_past_pplus() {
        for backend in [Backend::EqualChar, Backend::MixedChar] {
            let g = ctx(3, 1, 9, backend);
            let r = &g.ring;
            let i = g
                .from_entries(
                    [
                        r.from_integer(2),
                        r.from_integer(1),
                        r.pi_pow(1),
                        r.from_integer(1),
                    ],
                    0,
                )
                .unwrap();
            assert!(g.member(&i, SubgroupSpec::IZ).unwrap());
            let h = g
                .from_entries([r.pi_pow(2), r.from_integer(4), r.zero(), r.one()], 0)
                .unwrap();
            let (hp, ip) = g.rewrite_iz_past_pplus(&i, &h).unwrap();
            assert!(g.member(&ip, SubgroupSpec::IZ).unwrap());
            let lhs = g.mul(&i, &h).unwrap();
            let rhs = g.mul(&hp, &ip).unwrap();
            assert_eq!(g.format(&lhs), g.format(&rhs));
        }
    }

    #[test]
    fn parse_format_roundtrip() {
        let g = ctx(3, 1, 6, Backend::EqualChar);
        let e = g.mul(&g.pi_elt(), &g.g_lambda(g.field().from_int(2))).unwrap();
        let s = g.format(&e);
        let back = g.parse(&s).unwrap();
        assert_eq!(g.format(&back), s);
    }
}
