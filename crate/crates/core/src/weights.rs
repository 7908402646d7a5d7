//! Weights: irreducible smooth KZ-representations trivial on K₁.
//!
//! A weight is a Frobenius-twisted tensor of symmetric powers of the
//! standard representation of GL₂(F_q), twisted by a power of det, with a
//! free nonzero central value at ϖ. The action convention is row-vector
//! substitution x ↦ ax + cy, y ↦ bx + dy, which makes the pure-x monomial
//! the I₁-invariant line.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gl2::{Gl2Ctx, GroupElement, SubgroupSpec};
use crate::linalg::Mat;
use crate::localring::{FieldCtx, Fq};

#[derive(Debug, Clone)]
pub struct Weight {
    pub field: Arc<FieldCtx>,
    /// symmetric-power exponents (r_0, …, r_{f-1}), 0 ≤ r_j ≤ p-1
    pub r_vec: Vec<usize>,
    /// det-twist exponent, 0 ≤ a < q-1
    pub det_twist: u64,
    /// central value χ_σ(ϖ)
    pub central: Fq,
    dim: usize,
    /// mixed-radix strides for the monomial tensor basis
    strides: Vec<usize>,
}

/// Dense coefficient vector in the weight's monomial basis.
pub type WeightVector = Vec<Fq>;

impl Weight {
    pub fn new(field: Arc<FieldCtx>, r_vec: Vec<usize>, det_twist: u64, central: Fq) -> Result<Weight> {
        let f = field.f();
        let p = field.p();
        if r_vec.len() != f {
            return Err(Error::Config(format!(
                "weight needs {} symmetric-power exponents, got {}",
                f,
                r_vec.len()
            )));
        }
        if r_vec.iter().any(|&r| r as u64 > p - 1) {
            return Err(Error::Config("symmetric-power exponents must satisfy r ≤ p-1".into()));
        }
        if central.is_zero() {
            return Err(Error::Config("central value must be nonzero".into()));
        }
        let q = field.q();
        if q > 2 && det_twist >= q - 1 {
            return Err(Error::Config(format!("det twist {det_twist} must be < q-1 = {}", q - 1)));
        }
        let mut dim = 1usize;
        for &r in &r_vec {
            dim *= r + 1;
        }
        // index = Σ_j i_j · stride_j with j = 0 most significant
        let mut strides = vec![1usize; f];
        for j in (0..f.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * (r_vec[j + 1] + 1);
        }
        Ok(Weight { field, r_vec, det_twist, central, dim, strides })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn zero_vec(&self) -> WeightVector {
        vec![Fq::ZERO; self.dim]
    }

    /// Decompose a flat basis index into per-factor x-exponents.
    pub fn exponents(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.r_vec.len());
        let mut rest = idx;
        for j in 0..self.r_vec.len() {
            out.push(rest / self.strides[j]);
            rest %= self.strides[j];
        }
        out
    }

    pub fn index_of(&self, exps: &[usize]) -> usize {
        exps.iter().zip(&self.strides).map(|(&i, &s)| i * s).sum()
    }

    /// Label like "x^2y" ⊗ … for diagnostics and JSON dumps.
    pub fn basis_label(&self, idx: usize) -> String {
        let exps = self.exponents(idx);
        let factor = |i: usize, r: usize| -> String {
            let y = r - i;
            let mut s = String::new();
            if i > 0 {
                s.push('x');
                if i > 1 {
                    s.push_str(&format!("^{i}"));
                }
            }
            if y > 0 {
                s.push('y');
                if y > 1 {
                    s.push_str(&format!("^{y}"));
                }
            }
            if s.is_empty() {
                s.push('1');
            }
            s
        };
        exps.iter()
            .zip(&self.r_vec)
            .map(|(&i, &r)| factor(i, r))
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Matrix of the action of k̄ = (a,b;c,d) ∈ GL₂(F_q) (with det twist,
    /// without the central-value factor).
    pub fn act_matrix_residue(&self, kbar: [Fq; 4]) -> Result<Mat> {
        let k = &*self.field;
        let [a, b, c, d] = kbar;
        let det = k.sub(k.mul(a, d), k.mul(b, c));
        if det.is_zero() {
            return Err(Error::Domain("reduction of k is not invertible".into()));
        }
        let f = self.r_vec.len();
        // per-factor substitution matrices with Frobenius-twisted entries
        let mut factors: Vec<Mat> = Vec::with_capacity(f);
        for (j, &r) in self.r_vec.iter().enumerate() {
            let aj = k.frob(a, j);
            let bj = k.frob(b, j);
            let cj = k.frob(c, j);
            let dj = k.frob(d, j);
            let mut mj = Mat::zeros(r + 1, r + 1);
            for i in 0..=r {
                // (a x + c y)^i (b x + d y)^(r-i), coefficients by x-degree
                let mut poly = vec![Fq::ZERO; r + 1];
                poly[0] = Fq::ONE;
                let mut deg = 0usize;
                for _ in 0..i {
                    mul_linear(k, &mut poly, deg, aj, cj);
                    deg += 1;
                }
                for _ in 0..r - i {
                    mul_linear(k, &mut poly, deg, bj, dj);
                    deg += 1;
                }
                for (ip, &coef) in poly.iter().enumerate() {
                    mj[(ip, i)] = coef;
                }
            }
            factors.push(mj);
        }
        let twist = k.pow(det, self.det_twist as i64);
        let mut out = Mat::zeros(self.dim, self.dim);
        for col in 0..self.dim {
            let ce = self.exponents(col);
            for row in 0..self.dim {
                let re = self.exponents(row);
                let mut v = twist;
                for j in 0..f {
                    if v.is_zero() {
                        break;
                    }
                    v = k.mul(v, factors[j][(re[j], ce[j])]);
                }
                out[(row, col)] = v;
            }
        }
        Ok(out)
    }

    /// Matrix of σ(k) for k ∈ KZ: residue action times central^(central
    /// ϖ-valuation of k).
    pub fn act_matrix(&self, g2: &Gl2Ctx, kz: &GroupElement) -> Result<Mat> {
        if !g2.member(kz, SubgroupSpec::KZ)? {
            return Err(Error::Domain("weight action requires an element of KZ".into()));
        }
        let r = &g2.ring;
        let kbar = [
            r.reduce_mod_pi(&kz.mat[0]),
            r.reduce_mod_pi(&kz.mat[1]),
            r.reduce_mod_pi(&kz.mat[2]),
            r.reduce_mod_pi(&kz.mat[3]),
        ];
        let mut m = self.act_matrix_residue(kbar)?;
        if kz.shift != 0 {
            let c = self.field.pow(self.central, -kz.shift);
            for e in m.data.iter_mut() {
                *e = self.field.mul(*e, c);
            }
        }
        Ok(m)
    }

    pub fn act(&self, g2: &Gl2Ctx, kz: &GroupElement, v: &WeightVector) -> Result<WeightVector> {
        Ok(self.act_matrix(g2, kz)?.apply(&self.field, v))
    }

    /// The I₁-fixed line, normalized with coefficient 1 on its highest
    /// basis monomial. Solves over the reductions of upper-unipotent
    /// generators and checks the solution space is a line.
    pub fn i1_line(&self) -> Result<WeightVector> {
        let k = &*self.field;
        let gens: Vec<[Fq; 4]> = k
            .residue_elements()
            .iter()
            .filter(|l| !l.is_zero())
            .map(|&l| [Fq::ONE, l, Fq::ZERO, Fq::ONE])
            .collect();
        let mut rows = vec![];
        for kbar in gens {
            let m = self.act_matrix_residue(kbar)?;
            for i in 0..self.dim {
                let mut row = m.row(i).to_vec();
                row[i] = k.sub(row[i], Fq::ONE);
                rows.push(row);
            }
        }
        if rows.is_empty() {
            // q = 1 cannot happen; but dim-1 trivial case has no nonzero gens when q = 1
            rows.push(vec![Fq::ZERO; self.dim]);
        }
        let ns = Mat::from_rows(rows).nullspace(k);
        if ns.rows != 1 {
            return Err(Error::Construction(format!(
                "I₁-invariants have dimension {} (expected 1)",
                ns.rows
            )));
        }
        let mut v = ns.row(0).to_vec();
        let lead = (0..self.dim).rev().find(|&i| !v[i].is_zero()).unwrap();
        let inv = k.inv(v[lead])?;
        for e in v.iter_mut() {
            *e = k.mul(*e, inv);
        }
        Ok(v)
    }

    /// dim of span{([λ],1;1,0)·v₀ : λ ∈ F_q}; equals dim σ for every weight.
    pub fn k_translates_span(&self) -> Result<usize> {
        let v0 = self.i1_line()?;
        let k = &*self.field;
        let mut rows = vec![];
        for &l in k.residue_elements() {
            let m = self.act_matrix_residue([l, Fq::ONE, Fq::ONE, Fq::ZERO])?;
            rows.push(m.apply(k, &v0));
        }
        Ok(Mat::from_rows(rows).rank(k))
    }

    /// Parse "p=3,f=1,r=2,a=0,z=1" (multi-digit r for f ≥ 2 separated by
    /// semicolons, e.g. "r=2;1"; optional m= for a larger coefficient
    /// field; z is the canonical index of the central value).
    pub fn parse_descriptor(desc: &str) -> Result<(Weight, Arc<FieldCtx>)> {
        let mut p = None;
        let mut f = 1usize;
        let mut m = None;
        let mut r: Option<Vec<usize>> = None;
        let mut a = 0u64;
        let mut z = 1u64;
        for part in desc.split(',') {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad weight descriptor field: {part}")))?;
            match key.trim() {
                "p" => p = Some(val.parse::<u64>().map_err(|_| Error::Parse("bad p".into()))?),
                "f" => f = val.parse().map_err(|_| Error::Parse("bad f".into()))?,
                "m" => m = Some(val.parse::<usize>().map_err(|_| Error::Parse("bad m".into()))?),
                "r" => {
                    r = Some(
                        val.split(';')
                            .map(|x| x.parse::<usize>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| Error::Parse("bad r".into()))?,
                    )
                }
                "a" => a = val.parse().map_err(|_| Error::Parse("bad a".into()))?,
                "z" => z = val.parse().map_err(|_| Error::Parse("bad z".into()))?,
                other => return Err(Error::Parse(format!("unknown weight field {other}"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("weight descriptor needs p=".into()))?;
        let r = r.ok_or_else(|| Error::Parse("weight descriptor needs r=".into()))?;
        let m = m.unwrap_or(f);
        let field = Arc::new(FieldCtx::new(p, m, f)?);
        let central = field.from_index(z)?;
        let w = Weight::new(field.clone(), r, a, central)?;
        Ok((w, field))
    }
}

fn mul_linear(k: &FieldCtx, poly: &mut [Fq], deg: usize, xcoef: Fq, ycoef: Fq) {
    // poly ← poly·(xcoef·x + ycoef·y) tracked by x-degree at homogeneous
    // total degree deg
    for i in (0..=deg + 1).rev() {
        let from_x = if i > 0 { k.mul(poly[i - 1], xcoef) } else { Fq::ZERO };
        let from_y = if i <= deg { k.mul(poly[i], ycoef) } else { Fq::ZERO };
        poly[i] = k.add(from_x, from_y);
    }
}

/// The kernel endomorphism U = U_{r_1}⊗…⊗U_{r_f} of the Hecke operator
/// together with the per-digit operators it induces on the tree, all
/// validated at construction.
#[derive(Debug, Clone)]
pub struct HeckeData {
    /// U: rank-one projector onto the pure-y monomial (identity in dim 1)
    pub u_mat: Mat,
    /// φ(g_λ⁻¹) = σ(s)·U·σ(s·u_{-λ}), indexed by residue index of λ
    pub phi: Vec<Mat>,
    /// σ(u_λ)·U, the parent-direction factor, indexed by residue index
    pub psi: Vec<Mat>,
    /// σ(s)·U, the side-crossing factor at the base vertex
    pub s_u: Mat,
    /// sign of the [Π, v₀]-term for dim-1 weights: det(s̄)^a = (±1)
    pub pi_term_sign: Fq,
}

impl HeckeData {
    pub fn new(w: &Weight) -> Result<HeckeData> {
        let k = &*w.field;
        let dim = w.dim();
        // U: e_0 ↦ e_0 (index 0 is the pure-y monomial), everything else ↦ 0.
        let mut u_mat = Mat::zeros(dim, dim);
        u_mat[(0, 0)] = Fq::ONE;
        let s_mat = w.act_matrix_residue([Fq::ZERO, Fq::ONE, Fq::ONE, Fq::ZERO])?;
        let mut phi = vec![];
        let mut psi = vec![];
        for &l in k.residue_elements() {
            let u_minus_l = w.act_matrix_residue([Fq::ZERO, Fq::ONE, Fq::ONE, k.neg(l)])?; // s·u_{-λ}
            let m = s_mat.matmul(k, &u_mat).matmul(k, &u_minus_l);
            phi.push(m);
            let u_l = w.act_matrix_residue([Fq::ONE, l, Fq::ZERO, Fq::ONE])?;
            psi.push(u_l.matmul(k, &u_mat));
        }
        let s_u = s_mat.matmul(k, &u_mat);
        let sign = k.pow(k.neg(Fq::ONE), w.det_twist as i64);
        let data = HeckeData { u_mat, phi, psi, s_u, pi_term_sign: sign };
        data.validate(w)?;
        Ok(data)
    }

    /// Validation anchored on the explicit formula for T[1, v₀]: every
    /// [g_λ, v₀]-coefficient must be exactly v₀, the [Π, v₀]-term must
    /// vanish in dim ≥ 2 and equal det(s̄)^a·v₀ in dim 1.
    fn validate(&self, w: &Weight) -> Result<()> {
        let k = &*w.field;
        let v0 = w.i1_line()?;
        for m in &self.phi {
            if m.apply(k, &v0) != v0 {
                return Err(Error::Construction(
                    "Hecke kernel normalization broken: φ(g_λ⁻¹)v₀ ≠ v₀".into(),
                ));
            }
        }
        let pi_term = self.s_u.apply(k, &v0);
        if w.dim() >= 2 {
            if pi_term.iter().any(|c| !c.is_zero()) {
                return Err(Error::Construction(
                    "Hecke kernel normalization broken: U v₀ ≠ 0 in dim ≥ 2".into(),
                ));
            }
        } else {
            let expected: Vec<Fq> = v0.iter().map(|&c| k.mul(c, self.pi_term_sign)).collect();
            if pi_term != expected {
                return Err(Error::Construction(
                    "Hecke kernel normalization broken in dim 1".into(),
                ));
            }
        }
        // U annihilates v₀ exactly when dim ≥ 2
        if w.dim() >= 2 {
            let uv = self.u_mat.apply(k, &v0);
            if uv.iter().any(|c| !c.is_zero()) {
                return Err(Error::Construction("U v₀ ≠ 0 in dim ≥ 2".into()));
            }
        }
        Ok(())
    }
}
