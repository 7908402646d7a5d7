//! The coefficient field F_{p^m} and its residue subfield F_{p^f}.
//!
//! Elements are stored as `Fq`, a u16 index encoding the coordinate vector
//! in the polynomial basis: index = sum_i c_i * p^i for the element
//! sum_i c_i * g^i, where g is the class of X in F_p[X]/(defining poly).
//! Arithmetic goes through Zech logarithm tables, so multiplication,
//! inversion and addition are all table lookups. The field order is capped
//! at 2^16 which is far beyond anything desk-scale computations need.

use crate::error::{Error, Result};

/// An element of the coefficient field, valid only together with its
/// [`FieldCtx`]. Index 0 is zero, index 1 is one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fq(pub u16);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

const LOG_ZERO: u32 = u32::MAX;

/// Arithmetic context for F_{p^m} with a distinguished residue subfield
/// F_{p^f} (requires f | m). Immutable after construction.
pub struct FieldCtx {
    p: u64,
    m: usize,
    f: usize,
    q_coeff: u64,
    q_res: u64,
    /// defining polynomial of degree m over F_p, monic, coefficients low-first
    modulus: Vec<u64>,
    /// exp[k] = index of g^k for k in 0..order-1 (g a primitive element)
    exp: Vec<u16>,
    /// log[idx] = k with g^k = element, LOG_ZERO for zero
    log: Vec<u32>,
    /// zech[k] = log(1 + g^k), LOG_ZERO when 1 + g^k = 0
    zech: Vec<u32>,
    /// the q_res elements of the residue subfield, indexed canonically:
    /// res_elems[i] = sum_j c_j * beta^j where (c_j) are the base-p digits
    /// of i and beta is the canonical embedded generator of F_{p^f}
    res_elems: Vec<Fq>,
    /// inverse of res_elems: position of a coefficient-field element in the
    /// residue enumeration, u8::MAX when not a residue element
    res_index_of: Vec<u16>,
    /// images of 1, beta, beta^2, ..., beta^{f-1}
    res_basis: Vec<Fq>,
}

impl std::fmt::Debug for FieldCtx {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "FieldCtx(p={}, m={}, f={})", self.p, self.m, self.f)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense polynomial arithmetic over F_p used only during context
/// construction (irreducibility tests, root search).
mod polyfp {
    pub fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r: Vec<u64> = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lead_inv = mod_inv(b[db], p);
        while r.len() > db {
            let k = r.len() - 1 - db;
            let c = (r[r.len() - 1] * lead_inv) % p;
            if c != 0 {
                for i in 0..=db {
                    let idx = k + i;
                    r[idx] = (r[idx] + p - (c * b[i]) % p) % p;
                }
            }
            r.pop();
            trim(&mut r);
            if r.is_empty() {
                break;
            }
        }
        r
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        out
    }

    pub fn mod_inv(a: u64, p: u64) -> u64 {
        // Fermat; p is prime and a nonzero mod p.
        pow_mod(a % p, p - 2, p)
    }

    pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    }

    /// x^(p^k) mod g, computed by repeated squaring on exponent p^k.
    pub fn x_pow_pk_mod(g: &[u64], p: u64, k: u32) -> Vec<u64> {
        let mut acc = vec![0, 1]; // x
        for _ in 0..k {
            acc = pow_poly_mod(&acc, p, g, p);
        }
        acc
    }

    pub fn pow_poly_mod(base: &[u64], mut e: u64, g: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, g, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &b, p), g, p);
            }
            b = rem(&mul(&b, &b, p), g, p);
            e >>= 1;
        }
        acc
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// Deterministically pick the lexicographically smallest monic
    /// irreducible polynomial of degree d over F_p (coefficients scanned
    /// low-first as base-p counter).
    pub fn canonical_irreducible(p: u64, d: usize) -> Vec<u64> {
        if d == 1 {
            return vec![0, 1]; // x
        }
        let total = (p as u128).pow(d as u32);
        let mut counter: u128 = 0;
        while counter < total {
            let mut g = vec![0u64; d + 1];
            let mut c = counter;
            for coef in g.iter_mut().take(d) {
                *coef = (c % p as u128) as u64;
                c /= p as u128;
            }
            g[d] = 1;
            if is_irreducible(&g, p) {
                return g;
            }
            counter += 1;
        }
        unreachable!("irreducible polynomials of every degree exist")
    }

    pub fn is_irreducible(g: &[u64], p: u64) -> bool {
        let d = g.len() - 1;
        // x^(p^d) == x mod g
        let xpd = x_pow_pk_mod(g, p, d as u32);
        let mut diff = xpd;
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        trim(&mut diff);
        if !diff.is_empty() {
            return false;
        }
        // gcd(x^(p^(d/l)) - x, g) == 1 for each prime l | d
        let mut d_rem = d;
        let mut l = 2;
        let mut primes = vec![];
        while d_rem > 1 {
            if d_rem % l == 0 {
                primes.push(l);
                while d_rem % l == 0 {
                    d_rem /= l;
                }
            }
            l += 1;
        }
        for l in primes {
            let mut diff = x_pow_pk_mod(g, p, (d / l) as u32);
            if diff.len() < 2 {
                diff.resize(2, 0);
            }
            diff[1] = (diff[1] + p - 1) % p;
            trim(&mut diff);
            if diff.is_empty() {
                return false;
            }
            let gc = gcd(&diff, g, p);
            if gc.len() != 1 {
                return false;
            }
        }
        true
    }
}

impl FieldCtx {
    /// Build F_{p^m} with residue subfield F_{p^f}. Requires p prime,
    /// 1 <= f <= m <= 12, f | m and p^m <= 2^16.
    pub fn new(p: u64, m: usize, f: usize) -> Result<FieldCtx> {
        if !is_prime(p) {
            return Err(Error::Config(format!("p = {p} is not prime")));
        }
        if m == 0 || m > 12 {
            return Err(Error::Config(format!("extension degree m = {m} out of range 1..=12")));
        }
        if f == 0 || m % f != 0 {
            return Err(Error::Config(format!("residue degree f = {f} must divide m = {m}")));
        }
        let q_coeff = (p as u128).pow(m as u32);
        if q_coeff > 1 << 16 {
            return Err(Error::Unsupported(format!(
                "coefficient field order p^m = {q_coeff} exceeds the 2^16 table cap"
            )));
        }
        let q_coeff = q_coeff as u64;
        let q_res = p.pow(f as u32);

        let modulus = polyfp::canonical_irreducible(p, m);

        // Multiplication by the generator g (= X) in coordinates.
        let idx_of = |poly: &[u64]| -> u16 {
            let mut idx = 0u64;
            for (i, &c) in poly.iter().enumerate() {
                idx += c * p.pow(i as u32);
            }
            idx as u16
        };
        let poly_of = |idx: u16| -> Vec<u64> {
            let mut v = vec![0u64; m];
            let mut c = idx as u64;
            for coef in v.iter_mut() {
                *coef = c % p;
                c /= p;
            }
            v
        };

        // Find the smallest primitive element by index, then build tables.
        let order = q_coeff - 1;
        let mut order_prime_factors = vec![];
        {
            let mut n = order;
            let mut l = 2;
            while l * l <= n {
                if n % l == 0 {
                    order_prime_factors.push(l);
                    while n % l == 0 {
                        n /= l;
                    }
                }
                l += 1;
            }
            if n > 1 {
                order_prime_factors.push(n);
            }
        }

        // Index-space multiplication without tables (schoolbook), used only
        // during generator search.
        let raw_mul = |a: u16, b: u16| -> u16 {
            let pa = poly_of(a);
            let pb = poly_of(b);
            let prod = polyfp::mul(&pa, &pb, p);
            let red = polyfp::rem(&prod, &modulus, p);
            let mut padded = red;
            padded.resize(m, 0);
            idx_of(&padded)
        };
        let raw_pow = |a: u16, mut e: u64| -> u16 {
            let mut acc = 1u16;
            let mut b = a;
            while e > 0 {
                if e & 1 == 1 {
                    acc = raw_mul(acc, b);
                }
                b = raw_mul(b, b);
                e >>= 1;
            }
            acc
        };

        let mut generator = 0u16;
        for cand in 2..q_coeff as u16 {
            let ok = order_prime_factors.iter().all(|&l| raw_pow(cand, order / l) != 1);
            if ok && raw_pow(cand, order) == 1 {
                generator = cand;
                break;
            }
        }
        if q_coeff == 2 {
            generator = 1;
        }
        if generator == 0 {
            return Err(Error::Config("no primitive element found".into()));
        }

        let mut exp = vec![0u16; order as usize];
        let mut log = vec![LOG_ZERO; q_coeff as usize];
        let mut cur = 1u16;
        for (k, e) in exp.iter_mut().enumerate() {
            *e = cur;
            log[cur as usize] = k as u32;
            cur = raw_mul(cur, generator);
        }
        if cur != 1 {
            return Err(Error::Config("generator order mismatch".into()));
        }

        // Addition of 1 in index space is digit arithmetic on the lowest digit.
        let add_one = |idx: u16| -> u16 {
            let mut poly = poly_of(idx);
            poly[0] = (poly[0] + 1) % p;
            idx_of(&poly)
        };
        let mut zech = vec![LOG_ZERO; order as usize];
        for (k, z) in zech.iter_mut().enumerate() {
            let s = add_one(exp[k]);
            *z = if s == 0 { LOG_ZERO } else { log[s as usize] };
        }

        // Residue subfield: embed F_{p^f} by finding the smallest root of the
        // canonical degree-f irreducible inside F_{p^m}. Uses true tables via
        // a provisional ctx closure.
        let hf = polyfp::canonical_irreducible(p, f);
        let eval_hf = |x: u16| -> u16 {
            // Horner in index space
            let mut acc = 0u16;
            for &c in hf.iter().rev() {
                acc = raw_mul(acc, x);
                // add constant c
                let mut poly = poly_of(acc);
                poly[0] = (poly[0] + c) % p;
                acc = idx_of(&poly);
            }
            acc
        };
        let beta: u16 = if f == 1 {
            1
        } else {
            let mut found = None;
            for cand in 0..q_coeff as u16 {
                if eval_hf(cand) == 0 {
                    found = Some(cand);
                    break;
                }
            }
            found.ok_or_else(|| Error::Config("degree-f polynomial has no root in F_{p^m}".into()))?
        };

        let mut res_basis = vec![Fq(1)];
        let mut acc = 1u16;
        for _ in 1..f {
            acc = raw_mul(acc, beta);
            res_basis.push(Fq(acc));
        }

        let add_raw = |a: u16, b: u16| -> u16 {
            let pa = poly_of(a);
            let pb = poly_of(b);
            let sum: Vec<u64> = pa.iter().zip(&pb).map(|(x, y)| (x + y) % p).collect();
            idx_of(&sum)
        };

        let mut res_elems = Vec::with_capacity(q_res as usize);
        let mut res_index_of = vec![u16::MAX; q_coeff as usize];
        for i in 0..q_res {
            let mut digits = vec![0u64; f];
            let mut c = i;
            for d in digits.iter_mut() {
                *d = c % p;
                c /= p;
            }
            let mut v = 0u16;
            for (j, &d) in digits.iter().enumerate() {
                let mut term = res_basis[j].0;
                // scalar multiple d * term via repeated addition in F_p coords
                let mut scaled = 0u16;
                for _ in 0..d {
                    scaled = add_raw(scaled, term);
                }
                term = scaled;
                v = add_raw(v, term);
            }
            if res_index_of[v as usize] != u16::MAX {
                return Err(Error::Config("residue enumeration collision".into()));
            }
            res_index_of[v as usize] = i as u16;
            res_elems.push(Fq(v));
        }

        Ok(FieldCtx {
            p,
            m,
            f,
            q_coeff,
            q_res,
            modulus,
            exp,
            log,
            zech,
            res_elems,
            res_index_of,
            res_basis,
        })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }
    #[inline]
    pub fn f(&self) -> usize {
        self.f
    }
    /// Order of the coefficient field p^m.
    #[inline]
    pub fn order(&self) -> u64 {
        self.q_coeff
    }
    /// Order q = p^f of the residue field.
    #[inline]
    pub fn q(&self) -> u64 {
        self.q_res
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    #[inline]
    pub fn zero(&self) -> Fq {
        Fq::ZERO
    }
    #[inline]
    pub fn one(&self) -> Fq {
        Fq::ONE
    }

    /// The prime-subfield element i mod p.
    pub fn from_int(&self, i: i64) -> Fq {
        let r = i.rem_euclid(self.p as i64) as u16;
        Fq(r)
    }

    /// Element from its canonical index (coordinate vector packed base p).
    pub fn from_index(&self, idx: u64) -> Result<Fq> {
        if idx >= self.q_coeff {
            return Err(Error::Parse(format!("field element index {idx} out of range")));
        }
        Ok(Fq(idx as u16))
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let la = self.log[a.0 as usize];
        let lb = self.log[b.0 as usize];
        // a + b = a * (1 + b/a)
        let order = (self.q_coeff - 1) as u32;
        let k = (lb + order - la) % order;
        let z = self.zech[k as usize];
        if z == LOG_ZERO {
            return Fq::ZERO;
        }
        Fq(self.exp[((la + z) % order) as usize])
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        if self.p == 2 || a.is_zero() {
            return a;
        }
        // -1 = g^((q-1)/2)
        let order = (self.q_coeff - 1) as u32;
        let half = order / 2;
        let la = self.log[a.0 as usize];
        Fq(self.exp[((la + half) % order) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.is_zero() || b.is_zero() {
            return Fq::ZERO;
        }
        let order = (self.q_coeff - 1) as u32;
        let k = (self.log[a.0 as usize] + self.log[b.0 as usize]) % order;
        Fq(self.exp[k as usize])
    }

    pub fn inv(&self, a: Fq) -> Result<Fq> {
        if a.is_zero() {
            return Err(Error::NonUnit(0));
        }
        let order = (self.q_coeff - 1) as u32;
        let k = (order - self.log[a.0 as usize]) % order;
        Ok(Fq(self.exp[k as usize]))
    }

    pub fn pow(&self, a: Fq, e: i64) -> Fq {
        if a.is_zero() {
            return if e == 0 { Fq::ONE } else { Fq::ZERO };
        }
        let order = (self.q_coeff - 1) as i64;
        let k = (self.log[a.0 as usize] as i64 * (e % order)).rem_euclid(order);
        Fq(self.exp[k as usize])
    }

    /// Frobenius x -> x^(p^j).
    pub fn frob(&self, a: Fq, j: usize) -> Fq {
        self.pow(a, self.p.pow((j % self.m) as u32) as i64)
    }

    /// True for elements of the residue subfield F_q.
    pub fn is_residue(&self, a: Fq) -> bool {
        self.res_index_of[a.0 as usize] != u16::MAX
    }

    /// Deterministic enumeration of the residue field; index 0 is zero.
    pub fn residue_elements(&self) -> &[Fq] {
        &self.res_elems
    }

    pub fn residue_index(&self, a: Fq) -> Option<usize> {
        let i = self.res_index_of[a.0 as usize];
        (i != u16::MAX).then_some(i as usize)
    }

    pub fn residue_elem(&self, idx: usize) -> Fq {
        self.res_elems[idx]
    }

    /// Images in F_{p^m} of the canonical F_p-basis of the residue field.
    pub fn residue_basis(&self) -> &[Fq] {
        &self.res_basis
    }

    /// All p^m elements in index order.
    pub fn all_elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.q_coeff).map(|i| Fq(i as u16))
    }
}
