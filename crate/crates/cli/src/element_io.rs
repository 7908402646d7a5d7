//! JSON (de)serialization of induced elements: a list of
//! {side, n, b, vector} with b the digit word (lowest first) and vector the
//! fiber coefficients as canonical field indices.

use anyhow::{anyhow, bail, Result};
use serde::{Deserialize, Serialize};

use modp_gl2_core::cind::{CindCtx, InducedElement, TreeSide, VertexRep};
use modp_gl2_core::localring::Fq;

use crate::report::Check;

#[derive(Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub side: String,
    pub n: usize,
    pub b: Vec<u8>,
    pub vector: Vec<u64>,
}

pub fn parse_element(ctx: &CindCtx, s: &str) -> Result<InducedElement> {
    let text = if let Some(path) = s.strip_prefix('@') {
        std::fs::read_to_string(path)?
    } else {
        s.to_string()
    };
    let terms: Vec<TermJson> = serde_json::from_str(&text)?;
    let mut out = InducedElement::zero();
    for t in terms {
        let side = match t.side.as_str() {
            "plus" => TreeSide::Plus,
            "minus" => TreeSide::Minus,
            other => bail!("bad side {other} (use plus|minus)"),
        };
        if t.b.len() != t.n {
            bail!("digit word length {} does not match n = {}", t.b.len(), t.n);
        }
        if t.b.iter().any(|&d| d as usize >= ctx.q()) {
            bail!("digit out of range for q = {}", ctx.q());
        }
        if t.vector.len() != ctx.weight.dim() {
            bail!("fiber length {} does not match dim σ = {}", t.vector.len(), ctx.weight.dim());
        }
        let vert = VertexRep { side, path: t.b.iter().copied().collect() };
        let v: Vec<Fq> = t
            .vector
            .iter()
            .map(|&i| ctx.field().from_index(i))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| anyhow!("bad fiber coefficient: {e}"))?;
        ctx.add_term(&mut out, vert, &v, Fq::ONE);
    }
    Ok(out)
}

pub fn element_json(x: &InducedElement) -> String {
    let terms: Vec<TermJson> = x
        .terms
        .iter()
        .map(|(vert, v)| TermJson {
            side: match vert.side {
                TreeSide::Plus => "plus".into(),
                TreeSide::Minus => "minus".into(),
            },
            n: vert.grade(),
            b: vert.path.to_vec(),
            vector: v.iter().map(|c| c.0 as u64).collect(),
        })
        .collect();
    serde_json::to_string(&terms).expect("element serializes")
}

pub fn element_report(id: &str, ctx: &CindCtx, x: &InducedElement) -> Vec<Check> {
    vec![
        Check {
            statement_id: format!("{id}-result"),
            expected: "reported".into(),
            got: element_json(x),
            pass: true,
            warnings: vec![],
        },
        Check {
            statement_id: format!("{id}-radius"),
            expected: "reported".into(),
            got: format!("{} (terms {}, dim σ {})", x.radius(), x.num_terms(), ctx.weight.dim()),
            pass: true,
            warnings: vec![],
        },
    ]
}
