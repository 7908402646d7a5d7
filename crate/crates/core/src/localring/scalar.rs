//! Truncated local ring O/ϖ^N with Teichmüller section.
//!
//! Two backends: formal Laurent-series coefficients F_q[ϖ]/(ϖ^N) for the
//! equal-characteristic field F_q((ϖ)), and Z/p^N for the mixed-characteristic
//! field Q_p (restricted to residue degree 1; unramified extensions would
//! need Witt vectors, which this tool does not implement).

use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::localring::field::{FieldCtx, Fq};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// F_q((ϖ)), q = p^f
    EqualChar,
    /// Q_p, residue field F_p
    MixedChar,
}

/// Context for the truncated ring: backend, residue/coefficient fields and
/// the working precision. Values are immutable and freely shareable.
#[derive(Debug)]
pub struct LocalRingCtx {
    pub field: Arc<FieldCtx>,
    backend: Backend,
    precision: usize,
    /// p^precision for the mixed backend
    modulus: u64,
    /// Teichmüller lifts of residue elements 0..p for the mixed backend
    teich_table: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// digits low-first, each a residue-field element; length = precision
    Eq(SmallVec<[Fq; 12]>),
    /// integer mod p^precision
    Mixed(u64),
}

/// An element of O/ϖ^N at an explicit precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalScalar {
    prec: usize,
    repr: Repr,
}

impl LocalRingCtx {
    pub fn new(field: Arc<FieldCtx>, backend: Backend, precision: usize) -> Result<Arc<Self>> {
        if precision == 0 {
            return Err(Error::Config("precision must be >= 1".into()));
        }
        let p = field.p();
        let mut modulus = 1u64;
        let mut teich_table = vec![];
        match backend {
            Backend::MixedChar => {
                if field.f() != 1 {
                    return Err(Error::Unsupported(
                        "mixed-characteristic backend requires residue degree f = 1 \
                         (unramified f > 1 needs Witt vectors)"
                            .into(),
                    ));
                }
                if precision as u32 * (64 - p.leading_zeros()) > 62 {
                    return Err(Error::Config(format!(
                        "p^precision overflows u64 (p={p}, N={precision})"
                    )));
                }
                for _ in 0..precision {
                    modulus *= p;
                }
                // Teichmüller lift: iterate x -> x^p until stable mod p^N.
                teich_table.push(0);
                for l in 1..p {
                    let mut x = l % p;
                    loop {
                        let next = pow_mod_u64(x, p, modulus);
                        if next == x {
                            break;
                        }
                        x = next;
                    }
                    teich_table.push(x);
                }
            }
            Backend::EqualChar => {
                if precision > 64 {
                    return Err(Error::Config("equal-char precision capped at 64".into()));
                }
            }
        }
        Ok(Arc::new(LocalRingCtx { field, backend, precision, modulus, teich_table }))
    }

    #[inline]
    pub fn backend(&self) -> Backend {
        self.backend
    }
    #[inline]
    pub fn precision(&self) -> usize {
        self.precision
    }
    pub fn q(&self) -> u64 {
        self.field.q()
    }

    pub fn zero(&self) -> LocalScalar {
        self.zero_at(self.precision)
    }

    pub fn zero_at(&self, prec: usize) -> LocalScalar {
        match self.backend {
            Backend::EqualChar => LocalScalar {
                prec,
                repr: Repr::Eq(SmallVec::from_elem(Fq::ZERO, prec)),
            },
            Backend::MixedChar => LocalScalar { prec, repr: Repr::Mixed(0) },
        }
    }

    pub fn one(&self) -> LocalScalar {
        self.teichmuller(self.field.one())
    }

    /// ϖ^k as a scalar at full precision.
    pub fn pi_pow(&self, k: usize) -> LocalScalar {
        let mut s = self.zero();
        if k < self.precision {
            match &mut s.repr {
                Repr::Eq(d) => d[k] = Fq::ONE,
                Repr::Mixed(v) => {
                    let mut x = 1u64;
                    for _ in 0..k {
                        x = x * self.field.p() % self.modulus;
                    }
                    *v = x;
                }
            }
        }
        s
    }

    /// Lower a scalar's precision, reducing the representation accordingly.
    pub fn truncate(&self, a: &LocalScalar, prec: usize) -> LocalScalar {
        if prec >= a.prec {
            return a.clone();
        }
        match &a.repr {
            Repr::Eq(d) => LocalScalar { prec, repr: Repr::Eq(d[..prec].iter().copied().collect()) },
            Repr::Mixed(x) => LocalScalar { prec, repr: Repr::Mixed(*x % self.modulus_at(prec)) },
        }
    }

    /// The multiplicative (Teichmüller) representative of a residue element.
    /// Equal characteristic: the constant series. Mixed characteristic: the
    /// unique (p-1)-th root of unity congruent to λ mod p.
    pub fn teichmuller(&self, lambda: Fq) -> LocalScalar {
        match self.backend {
            Backend::EqualChar => {
                debug_assert!(self.field.is_residue(lambda), "Teichmüller arg must be a residue element");
                let mut d = SmallVec::from_elem(Fq::ZERO, self.precision);
                d[0] = lambda;
                LocalScalar { prec: self.precision, repr: Repr::Eq(d) }
            }
            Backend::MixedChar => {
                let l = lambda.0 as usize; // residue field is the prime field: index = value
                LocalScalar { prec: self.precision, repr: Repr::Mixed(self.teich_table[l]) }
            }
        }
    }

    pub fn from_integer(&self, n: i64) -> LocalScalar {
        match self.backend {
            Backend::MixedChar => LocalScalar {
                prec: self.precision,
                repr: Repr::Mixed(n.rem_euclid(self.modulus as i64) as u64),
            },
            Backend::EqualChar => {
                // image of the integer under Z -> F_q ⊂ O
                self.teichmuller(self.field.from_int(n))
            }
        }
    }

    fn modulus_at(&self, prec: usize) -> u64 {
        let mut m = 1u64;
        for _ in 0..prec {
            m *= self.field.p();
        }
        m
    }

    pub fn add(&self, a: &LocalScalar, b: &LocalScalar) -> Result<LocalScalar> {
        self.check(a, b)?;
        Ok(match (&a.repr, &b.repr) {
            (Repr::Eq(x), Repr::Eq(y)) => LocalScalar {
                prec: a.prec,
                repr: Repr::Eq(x.iter().zip(y.iter()).map(|(&u, &v)| self.field.add(u, v)).collect()),
            },
            (Repr::Mixed(x), Repr::Mixed(y)) => LocalScalar {
                prec: a.prec,
                repr: Repr::Mixed((x + y) % self.modulus_at(a.prec)),
            },
            _ => unreachable!(),
        })
    }

    pub fn neg(&self, a: &LocalScalar) -> LocalScalar {
        match &a.repr {
            Repr::Eq(x) => LocalScalar {
                prec: a.prec,
                repr: Repr::Eq(x.iter().map(|&u| self.field.neg(u)).collect()),
            },
            Repr::Mixed(x) => {
                let m = self.modulus_at(a.prec);
                LocalScalar { prec: a.prec, repr: Repr::Mixed((m - x % m) % m) }
            }
        }
    }

    pub fn sub(&self, a: &LocalScalar, b: &LocalScalar) -> Result<LocalScalar> {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &LocalScalar, b: &LocalScalar) -> Result<LocalScalar> {
        self.check(a, b)?;
        Ok(match (&a.repr, &b.repr) {
            (Repr::Eq(x), Repr::Eq(y)) => {
                let n = a.prec;
                let mut out = SmallVec::from_elem(Fq::ZERO, n);
                for i in 0..n {
                    if x[i].is_zero() {
                        continue;
                    }
                    for j in 0..n - i {
                        if !y[j].is_zero() {
                            out[i + j] = self.field.add(out[i + j], self.field.mul(x[i], y[j]));
                        }
                    }
                }
                LocalScalar { prec: n, repr: Repr::Eq(out) }
            }
            (Repr::Mixed(x), Repr::Mixed(y)) => {
                let m = self.modulus_at(a.prec) as u128;
                LocalScalar {
                    prec: a.prec,
                    repr: Repr::Mixed(((*x as u128 * *y as u128) % m) as u64),
                }
            }
            _ => unreachable!(),
        })
    }

    /// ϖ-adic valuation; returns the precision for (representations of) zero.
    pub fn valuation(&self, a: &LocalScalar) -> usize {
        match &a.repr {
            Repr::Eq(x) => x.iter().position(|d| !d.is_zero()).unwrap_or(a.prec),
            Repr::Mixed(x) => {
                if *x == 0 {
                    return a.prec;
                }
                let mut v = 0;
                let mut y = *x;
                let p = self.field.p();
                while y % p == 0 {
                    y /= p;
                    v += 1;
                }
                v
            }
        }
    }

    pub fn is_unit(&self, a: &LocalScalar) -> bool {
        self.valuation(a) == 0
    }

    pub fn is_zero(&self, a: &LocalScalar) -> bool {
        self.valuation(a) >= a.prec
    }

    /// Reduction mod ϖ into the residue field.
    pub fn reduce_mod_pi(&self, a: &LocalScalar) -> Fq {
        match &a.repr {
            Repr::Eq(x) => x[0],
            Repr::Mixed(x) => self.field.from_int((*x % self.field.p()) as i64),
        }
    }

    /// Inverse of a unit, by Newton iteration from the residue inverse.
    pub fn inv(&self, a: &LocalScalar) -> Result<LocalScalar> {
        let v = self.valuation(a);
        if v != 0 {
            return Err(Error::NonUnit(v));
        }
        match &a.repr {
            Repr::Eq(_) => {
                let a0 = self.reduce_mod_pi(a);
                let mut x = self.zero_at(a.prec);
                if let Repr::Eq(d) = &mut x.repr {
                    d[0] = self.field.inv(a0)?;
                }
                // x_{k+1} = x_k (2 - a x_k), doubling precision each step
                let two = self.truncate(&self.from_integer(2), a.prec);
                loop {
                    let ax = self.mul(a, &x)?;
                    let two_minus = self.sub(&two, &ax)?;
                    let next = self.mul(&x, &two_minus)?;
                    if next == x {
                        break;
                    }
                    x = next;
                }
                Ok(x)
            }
            Repr::Mixed(xv) => {
                let m = self.modulus_at(a.prec);
                // Newton on integers mod p^N
                let p = self.field.p();
                let mut inv0 = polyinv_mod_p(*xv % p, p);
                let mut cur_mod = p;
                while cur_mod < m {
                    cur_mod = (cur_mod as u128 * cur_mod as u128).min(m as u128) as u64;
                    let cm = cur_mod as u128;
                    let prod = (*xv as u128 % cm) * (inv0 as u128) % cm;
                    let two_minus = (2 + cm - prod % cm) % cm;
                    inv0 = ((inv0 as u128 * two_minus) % cm) as u64;
                }
                Ok(LocalScalar { prec: a.prec, repr: Repr::Mixed(inv0 % m) })
            }
        }
    }

    /// Exact division by ϖ; precision drops by one.
    pub fn div_pi(&self, a: &LocalScalar) -> Result<LocalScalar> {
        if a.prec <= 1 {
            return Err(Error::Precision("cannot divide by ϖ at precision 1".into()));
        }
        if self.valuation(a) == 0 {
            return Err(Error::Domain("division by ϖ of a unit".into()));
        }
        Ok(match &a.repr {
            Repr::Eq(x) => LocalScalar { prec: a.prec - 1, repr: Repr::Eq(x[1..].iter().copied().collect()) },
            Repr::Mixed(x) => LocalScalar { prec: a.prec - 1, repr: Repr::Mixed(x / self.field.p()) },
        })
    }

    pub fn mul_pi(&self, a: &LocalScalar) -> LocalScalar {
        match &a.repr {
            Repr::Eq(x) => {
                let mut d: SmallVec<[Fq; 12]> = SmallVec::with_capacity(a.prec);
                d.push(Fq::ZERO);
                d.extend(x[..a.prec - 1].iter().copied());
                LocalScalar { prec: a.prec, repr: Repr::Eq(d) }
            }
            Repr::Mixed(x) => {
                let m = self.modulus_at(a.prec);
                LocalScalar { prec: a.prec, repr: Repr::Mixed((x * self.field.p()) % m) }
            }
        }
    }

    /// The canonical ϖ-digit decomposition a = [λ] + ϖ a'; returns (λ, a')
    /// with a' at one digit less precision.
    pub fn split_digit(&self, a: &LocalScalar) -> Result<(Fq, LocalScalar)> {
        let lambda = self.reduce_mod_pi(a);
        let t = self.truncate(&self.teichmuller(lambda), a.prec);
        let rest = self.sub(a, &t)?;
        Ok((lambda, self.div_pi(&rest)?))
    }

    /// Teichmüller digit expansion of length `a.prec`.
    pub fn teich_digits(&self, a: &LocalScalar) -> Result<Vec<Fq>> {
        let mut out = Vec::with_capacity(a.prec);
        let mut cur = a.clone();
        for _ in 0..a.prec - 1 {
            let (l, rest) = self.split_digit(&cur)?;
            out.push(l);
            cur = rest;
        }
        out.push(self.reduce_mod_pi(&cur));
        Ok(out)
    }

    /// Rebuild a scalar at precision `prec` from Teichmüller digits.
    pub fn from_teich_digits(&self, digits: &[Fq], prec: usize) -> Result<LocalScalar> {
        let mut acc = self.zero_at(prec);
        for &d in digits.iter().rev() {
            acc = self.mul_pi(&acc);
            let t = self.truncate(&self.teichmuller(d), prec);
            acc = self.add(&acc, &t)?;
        }
        Ok(acc)
    }

    fn check(&self, a: &LocalScalar, b: &LocalScalar) -> Result<()> {
        if a.prec != b.prec {
            return Err(Error::Mismatch(format!("precision {} vs {}", a.prec, b.prec)));
        }
        match (&a.repr, &b.repr) {
            (Repr::Eq(_), Repr::Eq(_)) | (Repr::Mixed(_), Repr::Mixed(_)) => Ok(()),
            _ => Err(Error::Mismatch("backend mismatch".into())),
        }
    }

    /// Text form: equal char "a0+a1*w+a2*w^2" (residue elements printed as
    /// canonical indices), mixed char a decimal integer.
    pub fn format(&self, a: &LocalScalar) -> String {
        match &a.repr {
            Repr::Mixed(x) => format!("{x}"),
            Repr::Eq(d) => {
                let mut parts = vec![];
                for (i, digit) in d.iter().enumerate() {
                    if digit.is_zero() {
                        continue;
                    }
                    let c = self.field.residue_index(*digit).unwrap_or(digit.0 as usize);
                    parts.push(match i {
                        0 => format!("{c}"),
                        1 => format!("{c}*w"),
                        _ => format!("{c}*w^{i}"),
                    });
                }
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join("+")
                }
            }
        }
    }

    pub fn parse(&self, s: &str) -> Result<LocalScalar> {
        let s = s.trim();
        match self.backend {
            Backend::MixedChar => {
                let v: i64 = s
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad mixed-char scalar: {s}")))?;
                Ok(self.from_integer(v))
            }
            Backend::EqualChar => {
                let mut out = self.zero();
                if s == "0" {
                    return Ok(out);
                }
                for term in s.split('+') {
                    let term = term.trim();
                    let (coef, pow): (&str, usize) = if let Some((c, p)) = term.split_once("*w^") {
                        (c, p.parse().map_err(|_| Error::Parse(format!("bad power in {term}")))?)
                    } else if let Some((c, _)) = term.split_once("*w") {
                        (c, 1)
                    } else if term == "w" {
                        ("1", 1)
                    } else {
                        (term, 0)
                    };
                    let ci: u64 =
                        coef.parse().map_err(|_| Error::Parse(format!("bad coefficient {coef}")))?;
                    if ci >= self.field.q() {
                        return Err(Error::Parse(format!("residue index {ci} out of range")));
                    }
                    let fqv = self.field.residue_elem(ci as usize);
                    if pow < self.precision {
                        if let Repr::Eq(d) = &mut out.repr {
                            d[pow] = self.field.add(d[pow], fqv);
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

impl LocalScalar {
    pub fn precision(&self) -> usize {
        self.prec
    }
}

fn pow_mod_u64(b: u64, mut e: u64, m: u64) -> u64 {
    let mm = m as u128;
    let mut acc = 1u128;
    let mut bb = b as u128 % mm;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    acc as u64
}

fn polyinv_mod_p(a: u64, p: u64) -> u64 {
    // Fermat inverse mod prime p
    pow_mod_u64(a % p, p - 2, p)
}
