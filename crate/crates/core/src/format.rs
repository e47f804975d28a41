//! Text renderings of transfer functions and analysis results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::FrequencyPoint;
use crate::graph::SymbolId;
use crate::loops::Monomial;
use crate::poly::Poly;
use crate::shannon::TransferFunction;

/// Name of the transform variable. Only the printing changes; discrete
/// graphs go through the same pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    #[default]
    S,
    Z,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::S => "s",
            Variable::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    B,
    A,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredTerm {
    /// Symbol names of the monomial, repeated by exponent. Empty for the
    /// plain term.
    pub symbols: Vec<String>,
    /// Ascending coefficients of the polynomial multiplying the monomial.
    pub numerator: Vec<f64>,
    pub denominator_side: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredTransfer {
    pub variable: Variable,
    pub terms: Vec<StructuredTerm>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid symbol {0:?}")]
    Symbol(String),
    #[error("invalid coefficients: {0}")]
    Poly(#[from] crate::poly::PolyError),
    #[error("transfer function has no denominator terms")]
    EmptyDenominator,
}

fn term(m: &Monomial, p: &Poly, side: Side) -> StructuredTerm {
    StructuredTerm {
        symbols: m.symbols().iter().map(|s| s.name().to_string()).collect(),
        numerator: p.coeffs().to_vec(),
        denominator_side: side,
    }
}

pub fn to_structured(tf: &TransferFunction, variable: Variable) -> StructuredTransfer {
    let b = tf.numerator().iter().map(|(m, p)| term(m, p, Side::B));
    let a = tf.denominator().iter().map(|(m, p)| term(m, p, Side::A));
    StructuredTransfer {
        variable,
        terms: b.chain(a).collect(),
    }
}

/// Pretty JSON with a trailing newline. The CLI and the service both print
/// this, so the two stay byte-identical.
pub fn render_structured(tf: &TransferFunction, variable: Variable) -> String {
    let mut s = serde_json::to_string_pretty(&to_structured(tf, variable)).expect("serializable");
    s.push('\n');
    s
}

impl StructuredTransfer {
    pub fn to_transfer(&self) -> Result<TransferFunction, FormatError> {
        let mut b: BTreeMap<Monomial, Poly> = BTreeMap::new();
        let mut a: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for t in &self.terms {
            let syms = t
                .symbols
                .iter()
                .map(|n| SymbolId::new(n).map_err(|_| FormatError::Symbol(n.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            let m = Monomial::from_symbols(&syms);
            let p = Poly::try_new(t.numerator.clone())?;
            let side = match t.denominator_side {
                Side::B => &mut b,
                Side::A => &mut a,
            };
            let sum = side.get(&m).map_or_else(|| p.clone(), |q| q + &p);
            side.insert(m, sum);
        }
        TransferFunction::new(b, a).map_err(|_| FormatError::EmptyDenominator)
    }
}

pub fn parse_structured(text: &str) -> Result<(TransferFunction, Variable), FormatError> {
    let st: StructuredTransfer = serde_json::from_str(text)?;
    Ok((st.to_transfer()?, st.variable))
}

fn column_label(m: &Monomial) -> String {
    if m.is_one() {
        "plain".into()
    } else {
        m.to_string()
    }
}

/// Coefficient table with one row per power of the variable and, for each
/// side, one column per monomial occurring anywhere in the result.
pub fn render_table(tf: &TransferFunction, variable: Variable) -> String {
    let monomials = tf.monomials();
    let rows = tf
        .numerator()
        .values()
        .chain(tf.denominator().values())
        .map(|p| p.coeffs().len())
        .max()
        .unwrap_or(1);
    let mut header = vec![format!("power of {}", variable.name())];
    let mut columns: Vec<Option<&Poly>> = Vec::new();
    for (side, map) in [("B", tf.numerator()), ("A", tf.denominator())] {
        for m in &monomials {
            header.push(format!("{side}[{}]", column_label(m)));
            columns.push(map.get(m));
        }
    }
    let mut cells: Vec<Vec<String>> = vec![header];
    for k in 0..rows {
        let mut row = vec![k.to_string()];
        for col in &columns {
            let c = col.and_then(|p| p.coeffs().get(k)).copied().unwrap_or(0.0);
            row.push(format!("{:.6}", c + 0.0));
        }
        cells.push(row);
    }
    let width: Vec<usize> = (0..cells[0].len())
        .map(|j| cells.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j == 0 {
                    format!("{c:<w$}", w = width[j])
                } else {
                    format!("{c:>w$}", w = width[j])
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// `omega,re,im,mag_db,phase_deg`, one row per point.
pub fn sweep_csv(points: &[FrequencyPoint]) -> String {
    let mut out = String::from("omega,re,im,mag_db,phase_deg\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.omega, p.value.re, p.value.im, p.magnitude_db, p.phase_deg
        );
    }
    out
}
