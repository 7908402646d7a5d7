//! Scenario parsing: weight descriptor, backend, polynomial in T, relation
//! preset, radii, seed.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use modp_gl2_core::cind::CindCtx;
use modp_gl2_core::gl2::Gl2Ctx;
use modp_gl2_core::localring::{Backend, FieldCtx, Fq, LocalRingCtx};
use modp_gl2_core::quotient::{QuotientSpace, RelationPreset};
use modp_gl2_core::weights::Weight;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub sigma: String,
    pub backend: Backend,
    pub poly: String,
    pub rel: RelationPreset,
    pub radius: usize,
    pub slack: usize,
    pub precision: Option<usize>,
    pub seed: u64,
}

impl Scenario {
    pub fn field_and_weight(&self) -> Result<(Arc<FieldCtx>, Arc<Weight>)> {
        let (w, field) = Weight::parse_descriptor(&self.sigma)
            .map_err(|e| anyhow!("bad --sigma: {e}"))?;
        Ok((field, Arc::new(w)))
    }

    pub fn cind_ctx(&self) -> Result<Arc<CindCtx>> {
        let (field, weight) = self.field_and_weight()?;
        let deg = self.poly_coeffs(&field)?.len().saturating_sub(1);
        let prec = self.precision.unwrap_or(self.radius + deg + self.slack + 4);
        let ring = LocalRingCtx::new(field, self.backend, prec)
            .map_err(|e| anyhow!("ring configuration: {e}"))?;
        let g2 = Gl2Ctx::new(ring);
        CindCtx::new(g2, weight).map_err(|e| anyhow!("context construction: {e}"))
    }

    pub fn poly_coeffs(&self, field: &FieldCtx) -> Result<Vec<Fq>> {
        parse_poly(&self.poly, field)
    }

    pub fn quotient(&self) -> Result<QuotientSpace> {
        let ctx = self.cind_ctx()?;
        let coeffs = self.poly_coeffs(ctx.field())?;
        QuotientSpace::make_preset(ctx, coeffs, self.rel, self.radius, self.slack)
            .map_err(|e| anyhow!("quotient construction: {e}"))
    }
}

/// Parse polynomials in T over the coefficient field: "T-1", "T^2+2*T+1",
/// "T^3", "2". Coefficients are canonical field indices.
pub fn parse_poly(s: &str, field: &FieldCtx) -> Result<Vec<Fq>> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        bail!("empty polynomial");
    }
    // split into signed terms
    let mut terms: Vec<(bool, String)> = vec![];
    let mut cur = String::new();
    let mut neg = false;
    for (i, ch) in compact.chars().enumerate() {
        match ch {
            '+' | '-' if i > 0 => {
                terms.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
            }
            '-' => neg = true,
            _ => cur.push(ch),
        }
    }
    terms.push((neg, cur));
    let mut coeffs: Vec<Fq> = vec![];
    for (is_neg, term) in terms {
        let (coef_str, pow): (&str, usize) = if let Some(rest) = term.strip_prefix("T^") {
            ("1", rest.parse().context("bad exponent")?)
        } else if term == "T" {
            ("1", 1)
        } else if let Some((c, rest)) = term.split_once("*T^") {
            (c, rest.parse().context("bad exponent")?)
        } else if let Some((c, _)) = term.split_once("*T") {
            (c, 1)
        } else if let Some(c) = term.strip_suffix("T") {
            (if c.is_empty() { "1" } else { c }, 1)
        } else {
            (term.as_str(), 0)
        };
        let idx: u64 = coef_str.parse().with_context(|| format!("bad coefficient {coef_str}"))?;
        let mut c = field
            .from_index(idx)
            .map_err(|e| anyhow!("coefficient out of range: {e}"))?;
        if is_neg {
            c = field.neg(c);
        }
        if coeffs.len() <= pow {
            coeffs.resize(pow + 1, Fq::ZERO);
        }
        coeffs[pow] = field.add(coeffs[pow], c);
    }
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        bail!("polynomial is zero");
    }
    Ok(coeffs)
}

pub fn parse_backend(s: &str) -> Result<Backend> {
    match s {
        "equal" | "equal-char" | "laurent" => Ok(Backend::EqualChar),
        "mixed" | "mixed-char" | "padic" => Ok(Backend::MixedChar),
        other => bail!("unknown backend {other} (use equal|mixed)"),
    }
}

pub fn parse_rel(s: &str) -> Result<RelationPreset> {
    match s {
        "none" => Ok(RelationPreset::None),
        "special" => Ok(RelationPreset::Special),
        other => bail!("unknown relation preset {other} (use none|special)"),
    }
}
