//! The Shannon-Happ sum over a closed graph and its separation into a
//! transfer function.
//!
//! The closed graph's alternating sum `f = 1 - Σg + Σgg - ...` is linear in
//! the `1/G` marker: `f = A - B·(1/G)`, so `G = B/A`. Each term of `f` is
//! keyed by its symbol monomial; the `1/G` exponent of that key plays the
//! role of an index table pointing at the terms that carry the marker.
//!
//! Rational branch gains make every term a ratio. Rather than cross
//! multiplying term by term, the sum is formed over the least common
//! multiple of the branch denominators that occur (tracked exactly as
//! [`DenFactors`]), which then cancels between `B` and `A`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::combos::{all_orders, ComboTable};
use crate::graph::{GraphError, NodeId, SfgGraph, SymbolId};
use crate::loops::{
    find_loops_capped, loop_gain, touch_matrix, DenFactors, FactorKey, LoopError, LoopRec,
    Monomial, SymbolicGain, DEFAULT_LOOP_CAP,
};
use crate::poly::{Poly, RationalFn, DEFAULT_REL_TOL, DEGREE_CAP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShannonError {
    #[error("no forward path from input to output")]
    NoForwardPath,
    #[error("the denominator vanishes identically")]
    DegenerateDenominator,
    #[error("the node equations are singular at s = {0}")]
    SingularAtSample(Complex64),
    #[error("polynomial degree {0} exceeds the cap of {DEGREE_CAP}")]
    DegreeCap(usize),
    #[error("no value supplied for symbol `{0}`")]
    MissingSymbolValue(String),
    #[error("cannot substitute the closure marker")]
    SubstituteMarker,
    #[error("transfer function has symbols in its denominator")]
    SymbolicDenominator,
    #[error("more than {0} non-touching loop combinations")]
    TooManyCombinations(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Loops(#[from] LoopError),
}

/// A multilinear expression: monomial -> rational coefficient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymbolicRational {
    terms: BTreeMap<Monomial, RationalFn>,
}

impl SymbolicRational {
    pub fn terms(&self) -> &BTreeMap<Monomial, RationalFn> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Inserts `value` under `monomial`, dropping it if it is zero.
    pub fn insert(&mut self, monomial: Monomial, value: RationalFn) {
        if value.is_zero() {
            self.terms.remove(&monomial);
        } else {
            self.terms.insert(monomial, value);
        }
    }

    /// Evaluates with numeric values for every symbol (the closure marker is
    /// looked up under [`SymbolId::inv_g`]).
    pub fn eval(
        &self,
        s: Complex64,
        values: &BTreeMap<SymbolId, Complex64>,
    ) -> Result<Complex64, ShannonError> {
        self.terms.iter().try_fold(Complex64::new(0.0, 0.0), |acc, (m, r)| {
            Ok(acc + monomial_value(m, values)? * r.eval(s))
        })
    }
}

impl fmt::Display for SymbolicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, r)| {
                if m.is_one() {
                    format!("[{r}]")
                } else {
                    format!("[{r}]*{m}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

fn monomial_value(
    m: &Monomial,
    values: &BTreeMap<SymbolId, Complex64>,
) -> Result<Complex64, ShannonError> {
    let mut v = Complex64::new(1.0, 0.0);
    for s in m.symbols() {
        v *= values
            .get(s)
            .ok_or_else(|| ShannonError::MissingSymbolValue(s.name().to_string()))?;
    }
    if m.inv_g() > 0 {
        let g = SymbolId::inv_g();
        let x = values
            .get(&g)
            .ok_or_else(|| ShannonError::MissingSymbolValue(g.name().to_string()))?;
        v *= x.powi(m.inv_g() as i32);
    }
    Ok(v)
}

/// `G = Σ_m numerator[m]·m / Σ_m denominator[m]·m`, with the `1/G` marker
/// eliminated from every monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    numerator: BTreeMap<Monomial, Poly>,
    denominator: BTreeMap<Monomial, Poly>,
}

impl TransferFunction {
    /// Builds a transfer function from monomial maps. Zero polynomials are
    /// dropped; the denominator must keep at least one term.
    pub fn new(
        numerator: BTreeMap<Monomial, Poly>,
        denominator: BTreeMap<Monomial, Poly>,
    ) -> Result<Self, ShannonError> {
        let numerator: BTreeMap<_, _> = numerator.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        let denominator: BTreeMap<_, _> =
            denominator.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        if denominator.is_empty() {
            return Err(ShannonError::DegenerateDenominator);
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    /// A transfer function without symbols.
    pub fn from_polys(b: Poly, a: Poly) -> Result<Self, ShannonError> {
        Self::new(
            BTreeMap::from([(Monomial::one(), b)]),
            BTreeMap::from([(Monomial::one(), a)]),
        )
    }

    pub fn numerator(&self) -> &BTreeMap<Monomial, Poly> {
        &self.numerator
    }

    pub fn denominator(&self) -> &BTreeMap<Monomial, Poly> {
        &self.denominator
    }

    /// All monomials that occur on either side, in canonical order.
    pub fn monomials(&self) -> Vec<Monomial> {
        self.numerator
            .keys()
            .chain(self.denominator.keys())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn symbols(&self) -> BTreeSet<SymbolId> {
        self.monomials()
            .iter()
            .flat_map(|m| m.symbols().iter().cloned())
            .collect()
    }

    /// `(B, A)` when no symbols remain.
    pub fn numeric(&self) -> Option<(Poly, Poly)> {
        if !self.symbols().is_empty() {
            return None;
        }
        let one = Monomial::one();
        let b = self.numerator.get(&one).cloned().unwrap_or_else(Poly::zero);
        let a = self.denominator.get(&one).cloned()?;
        Some((b, a))
    }

    pub fn eval(
        &self,
        s: Complex64,
        values: &BTreeMap<SymbolId, Complex64>,
    ) -> Result<Complex64, ShannonError> {
        let side = |map: &BTreeMap<Monomial, Poly>| {
            map.iter().try_fold(Complex64::new(0.0, 0.0), |acc, (m, p)| {
                Ok::<_, ShannonError>(acc + monomial_value(m, values)? * p.eval(s))
            })
        };
        Ok(side(&self.numerator)? / side(&self.denominator)?)
    }

    /// Divides every polynomial by the magnitude of the leading coefficient
    /// of the denominator's symbol-free term (or its first term when every
    /// denominator term carries a symbol).
    pub fn monic(&self) -> Self {
        let lead = self
            .denominator
            .get(&Monomial::one())
            .or_else(|| self.denominator.values().next())
            .map(Poly::leading)
            .unwrap_or(1.0)
            .abs();
        self.map_polys(|p| p.scale(1.0 / lead))
    }

    fn map_polys(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self {
            numerator: self.numerator.iter().map(|(m, p)| (m.clone(), f(p))).collect(),
            denominator: self.denominator.iter().map(|(m, p)| (m.clone(), f(p))).collect(),
        }
    }

    /// Prunes tiny coefficients, cancels a common power of `s` and makes
    /// the lowest nonzero coefficient of the first denominator term positive.
    fn tidy(self, rel_tol: f64) -> Result<Self, ShannonError> {
        let prune = |map: BTreeMap<Monomial, Poly>| -> BTreeMap<Monomial, Poly> {
            map.into_iter()
                .map(|(m, p)| (m, p.prune(rel_tol)))
                .filter(|(_, p)| !p.is_zero())
                .collect()
        };
        let numerator = prune(self.numerator);
        let denominator = prune(self.denominator);
        if denominator.is_empty() {
            return Err(ShannonError::DegenerateDenominator);
        }
        let k = numerator
            .values()
            .chain(denominator.values())
            .filter_map(Poly::low_order)
            .min()
            .unwrap_or(0);
        let sign = denominator
            .values()
            .next()
            .and_then(|p| p.low_order().map(|i| p.coeffs()[i].signum()))
            .unwrap_or(1.0);
        let fix = |p: Poly| p.shift_down(k).scale(sign);
        Ok(Self {
            numerator: numerator.into_iter().map(|(m, p)| (m, fix(p))).collect(),
            denominator: denominator.into_iter().map(|(m, p)| (m, fix(p))).collect(),
        })
    }
}

/// `f = 1 + Σ_k (-1)^k Σ_{rows of order k} gain`, collected per monomial
/// over the least common denominator of all row gains.
pub fn shannon_sum(tables: &[ComboTable]) -> Result<SymbolicRational, ShannonError> {
    shannon_sum_with_tol(tables, DEFAULT_REL_TOL)
}

pub fn shannon_sum_with_tol(
    tables: &[ComboTable],
    rel_tol: f64,
) -> Result<SymbolicRational, ShannonError> {
    let unit = SymbolicGain::one();
    let mut signed: Vec<(f64, &SymbolicGain)> = vec![(1.0, &unit)];
    for t in tables {
        let sign = if t.order % 2 == 0 { 1.0 } else { -1.0 };
        signed.extend(t.rows.iter().map(|r| (sign, &r.gain)));
    }

    let mut lcm = DenFactors::new();
    for (_, g) in &signed {
        for (k, &m) in &g.den_factors {
            let slot = lcm.entry(k.clone()).or_insert(0);
            *slot = (*slot).max(m);
        }
    }
    let bases: BTreeMap<&FactorKey, Poly> = lcm.keys().map(|k| (k, k.poly())).collect();
    let common = lcm
        .iter()
        .try_fold(Poly::one(), |acc, (k, &m)| acc.checked_mul(&bases[k].pow(m)))
        .map_err(|_| ShannonError::DegreeCap(degree_of(&lcm, &bases)))?;

    let mut cofactors: BTreeMap<Vec<(&FactorKey, u32)>, Poly> = BTreeMap::new();
    let mut sums: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for (sign, g) in signed {
        let missing: Vec<(&FactorKey, u32)> = lcm
            .iter()
            .map(|(k, &m)| (k, m - g.den_factors.get(k).copied().unwrap_or(0)))
            .filter(|&(_, d)| d > 0)
            .collect();
        let cofactor = cofactors.entry(missing).or_insert_with_key(|missing| {
            missing
                .iter()
                .fold(Poly::one(), |acc, &(k, d)| &acc * &bases[k].pow(d))
        });
        let term = (g.rational.num() * &*cofactor).scale(sign);
        if term.degree() >= DEGREE_CAP {
            return Err(ShannonError::DegreeCap(term.degree()));
        }
        let slot = sums.entry(g.monomial.clone()).or_insert_with(Poly::zero);
        *slot = &*slot + &term;
    }

    let mut f = SymbolicRational::default();
    for (m, num) in sums {
        let term = RationalFn::new(num, common.clone())
            .expect("common denominator is nonzero")
            .tidy(rel_tol);
        f.insert(m, term);
    }
    Ok(f)
}

fn degree_of(lcm: &DenFactors, bases: &BTreeMap<&FactorKey, Poly>) -> usize {
    lcm.iter().map(|(k, &m)| bases[k].degree() * m as usize).sum()
}

/// Splits `f = A - B·(1/G)` and returns `G = B/A`.
pub fn extract_transfer(f: &SymbolicRational) -> Result<TransferFunction, ShannonError> {
    extract_transfer_with_tol(f, DEFAULT_REL_TOL)
}

pub fn extract_transfer_with_tol(
    f: &SymbolicRational,
    rel_tol: f64,
) -> Result<TransferFunction, ShannonError> {
    if !f.terms.keys().any(|m| m.inv_g() == 1) {
        return Err(ShannonError::NoForwardPath);
    }
    debug_assert!(f.terms.keys().all(|m| m.inv_g() <= 1));

    // Least common denominator over the distinct term denominators, treating
    // powers of s separately because tidy may have cancelled some of them.
    let split = |d: &Poly| {
        let k = d.low_order().unwrap_or(0);
        (k, FactorKey::of(&d.shift_down(k)))
    };
    let mut max_s = 0;
    let mut distinct = BTreeSet::new();
    for r in f.terms.values() {
        let (k, key) = split(r.den());
        max_s = max_s.max(k);
        distinct.insert(key);
    }

    let inv_g = SymbolId::inv_g();
    let mut numerator = BTreeMap::new();
    let mut denominator = BTreeMap::new();
    for (m, r) in &f.terms {
        let (k, own) = split(r.den());
        let mut cofactor = Poly::monomial(1.0, max_s - k);
        for other in distinct.iter().filter(|d| **d != own) {
            cofactor = cofactor
                .checked_mul(&other.poly())
                .map_err(|_| ShannonError::DegreeCap(DEGREE_CAP))?;
        }
        let cleared = r
            .num()
            .checked_mul(&cofactor)
            .map_err(|_| ShannonError::DegreeCap(DEGREE_CAP))?;
        if m.inv_g() == 1 {
            numerator.insert(m.without(&inv_g), -cleared);
        } else {
            denominator.insert(m.clone(), cleared);
        }
    }
    let tf = TransferFunction::new(numerator, denominator)?.tidy(rel_tol)?;
    if tf.numerator.is_empty() {
        return Err(ShannonError::NoForwardPath);
    }
    Ok(tf)
}

/// Replaces `sym` by `value`, clearing `value`'s denominator across every
/// term so the result stays polynomial on both sides.
pub fn substitute_symbol(
    tf: &TransferFunction,
    sym: &SymbolId,
    value: &RationalFn,
) -> Result<TransferFunction, ShannonError> {
    if sym.is_inv_g() {
        return Err(ShannonError::SubstituteMarker);
    }
    let top = tf
        .numerator
        .keys()
        .chain(tf.denominator.keys())
        .map(|m| m.exponent(sym))
        .max()
        .unwrap_or(0);
    if top == 0 {
        return Ok(tf.clone());
    }
    let subst = |map: &BTreeMap<Monomial, Poly>| {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, p) in map {
            let k = m.exponent(sym);
            let scaled = &(p * &value.num().pow(k)) * &value.den().pow(top - k);
            let slot = out.entry(m.without(sym)).or_insert_with(Poly::zero);
            *slot = &*slot + &scaled;
        }
        out
    };
    TransferFunction::new(subst(&tf.numerator), subst(&tf.denominator))?.tidy(DEFAULT_REL_TOL)
}

/// Tunables for [`transfer_function`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub loop_cap: usize,
    pub combo_cap: usize,
    pub rel_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            loop_cap: DEFAULT_LOOP_CAP,
            combo_cap: 2_000_000,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

/// Every intermediate of one pipeline run, kept for inspection.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub closed: SfgGraph,
    pub loops: Vec<LoopRec>,
    pub gains: Vec<SymbolicGain>,
    pub tables: Vec<ComboTable>,
    pub f: SymbolicRational,
    pub transfer: Result<TransferFunction, ShannonError>,
}

/// Preprocesses, closes, enumerates loops and combinations, and forms the
/// sum. Extraction errors are kept in [`PipelineRun::transfer`] so the
/// intermediates remain available.
pub fn run_pipeline(g: &SfgGraph, cfg: &PipelineConfig) -> Result<PipelineRun, ShannonError> {
    let closed = g.preprocess().close()?;
    let loops = find_loops_capped(&closed, cfg.loop_cap)?;
    let gains: Vec<SymbolicGain> = loops.iter().map(|l| loop_gain(l, &closed)).collect();
    let touch = touch_matrix(&loops);
    let tables = all_orders(&gains, &touch, cfg.combo_cap)
        .ok_or(ShannonError::TooManyCombinations(cfg.combo_cap))?;
    let f = shannon_sum_with_tol(&tables, cfg.rel_tol)?;
    let transfer = extract_transfer_with_tol(&f, cfg.rel_tol);
    Ok(PipelineRun {
        closed,
        loops,
        gains,
        tables,
        f,
        transfer,
    })
}

/// Transfer function from the graph's input to its output.
pub fn transfer_function(g: &SfgGraph, cfg: &PipelineConfig) -> Result<TransferFunction, ShannonError> {
    run_pipeline(g, cfg)?.transfer
}

/// One transfer function per input node, all to `output`.
pub fn transfer_multi_input(
    g: &SfgGraph,
    inputs: &[NodeId],
    output: NodeId,
    cfg: &PipelineConfig,
) -> Result<Vec<TransferFunction>, ShannonError> {
    inputs
        .iter()
        .map(|&input| transfer_function(&g.with_terminals(input, output)?, cfg))
        .collect()
}

/// `Σ G_i·F_i` over a common denominator. Each `G_i` must have a symbol-free
/// denominator so the sum stays multilinear.
pub fn compose_response(
    parts: &[(TransferFunction, RationalFn)],
) -> Result<SymbolicRational, ShannonError> {
    let mut dens = Vec::with_capacity(parts.len());
    for (tf, input) in parts {
        let a = match tf.denominator.iter().collect::<Vec<_>>().as_slice() {
            [(m, a)] if m.is_one() => (*a).clone(),
            _ => return Err(ShannonError::SymbolicDenominator),
        };
        dens.push(&a * input.den());
    }
    let mut distinct: Vec<&Poly> = Vec::new();
    for d in &dens {
        if !distinct.contains(&d) {
            distinct.push(d);
        }
    }
    let common = distinct.iter().fold(Poly::one(), |acc, d| &acc * d);

    let mut sums: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for ((tf, input), own) in parts.iter().zip(&dens) {
        let cofactor = distinct
            .iter()
            .filter(|d| **d != own)
            .fold(Poly::one(), |acc, d| &acc * d);
        for (m, b) in &tf.numerator {
            let term = &(b * input.num()) * &cofactor;
            let slot = sums.entry(m.clone()).or_insert_with(Poly::zero);
            *slot = &*slot + &term;
        }
    }
    let mut out = SymbolicRational::default();
    for (m, num) in sums {
        let r = RationalFn::new(num, common.clone()).expect("nonzero common denominator");
        out.insert(m, r.tidy(DEFAULT_REL_TOL));
    }
    Ok(out)
}

/// Evaluates a branch gain at `s` with numeric symbol values.
fn branch_value(
    b: &crate::graph::Branch,
    s: Complex64,
    values: &BTreeMap<SymbolId, Complex64>,
) -> Result<Complex64, ShannonError> {
    let mut v = b.gain.eval(s);
    for sym in &b.symbols {
        v *= values
            .get(sym)
            .ok_or_else(|| ShannonError::MissingSymbolValue(sym.name().to_string()))?;
    }
    Ok(v)
}

/// Output value of the open graph for a unit signal injected at the input,
/// found by solving the node equations directly.
pub fn numeric_oracle(
    g: &SfgGraph,
    s: Complex64,
    values: &BTreeMap<SymbolId, Complex64>,
) -> Result<Complex64, ShannonError> {
    numeric_oracle_driven(g, s, values, &[(g.input(), Complex64::new(1.0, 0.0))], g.output())
}

/// Solves `x_v = Σ_{u->v} gain·x_u + src_v` for every node and returns
/// `x_output`. Sources are injected additively, so a source node with no
/// incoming branches simply takes its source value.
pub fn numeric_oracle_driven(
    g: &SfgGraph,
    s: Complex64,
    values: &BTreeMap<SymbolId, Complex64>,
    sources: &[(NodeId, Complex64)],
    output: NodeId,
) -> Result<Complex64, ShannonError> {
    if g.is_closed() {
        return Err(GraphError::Closed.into());
    }
    let ids: Vec<NodeId> = g.nodes().collect();
    let n = ids.len();
    let at = |id: NodeId| ids.binary_search(&id).expect("declared node");
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    for b in g.branches() {
        m[at(b.to)][at(b.from)] -= branch_value(b, s, values)?;
    }
    for &(node, value) in sources {
        rhs[at(node)] += value;
    }
    let x = solve_dense(m, rhs).ok_or(ShannonError::SingularAtSample(s))?;
    Ok(x[at(output)])
}

/// Gaussian elimination with partial pivoting; `None` when a pivot falls
/// below `1e-12` relative to the largest entry.
fn solve_dense(mut m: Vec<Vec<Complex64>>, mut rhs: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = rhs.len();
    let scale = m
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))?;
        if m[pivot][col].norm() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..n {
                let sub = factor * m[col][c];
                m[r][c] -= sub;
            }
            let sub = factor * rhs[col];
            rhs[r] -= sub;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let tail: Complex64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - tail) / m[r][r];
    }
    Some(x)
}
