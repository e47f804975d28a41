//! Criterion checks shared by the acceptance target and the topic suites.
//! Each returns a one-line summary on success and the first violation on
//! failure.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sfg_core::analysis::{frequency_response, poles_zeros, reduce_order_cf, roots, routh_stability, Verdict};
use sfg_core::combos::all_orders;
use sfg_core::graph::{gain, SfgGraph, SymbolId};
use sfg_core::loops::{find_loops, Monomial, SymbolicGain, TouchMatrix};
use sfg_core::poly::{Poly, RationalFn};
use sfg_core::shannon::{
    numeric_oracle, substitute_symbol, transfer_function, PipelineConfig, TransferFunction,
};

use super::*;

pub type Check = Result<String, String>;

/// The cascade `1/(s+1) · (s+4)/(s+2) · V · 2` with both first-order blocks
/// realized as an integrator inside a feedback loop.
pub fn cascade_with_integrators() -> SfgGraph {
    let v = SymbolId::new("V").unwrap();
    let integ = gain(&[1.0], &[0.0, 1.0]);
    let mut g = SfgGraph::new(1, 8);
    // 1/(s+1): x3 = x2/s, x2 = x1 - x3
    g.add_branch(1, 2, RationalFn::one(), &[]).unwrap();
    g.add_branch(2, 3, integ.clone(), &[]).unwrap();
    g.add_branch(3, 2, RationalFn::constant(-1.0), &[]).unwrap();
    // (s+4)/(s+2): x5 = x4/s, x4 = x3 - 2 x5, x6 = x4 + 4 x5
    g.add_branch(3, 4, RationalFn::one(), &[]).unwrap();
    g.add_branch(4, 5, integ, &[]).unwrap();
    g.add_branch(5, 4, RationalFn::constant(-2.0), &[]).unwrap();
    g.add_branch(4, 6, RationalFn::one(), &[]).unwrap();
    g.add_branch(5, 6, RationalFn::constant(4.0), &[]).unwrap();
    g.add_branch(6, 7, RationalFn::one(), &[v]).unwrap();
    g.add_branch(7, 8, RationalFn::constant(2.0), &[]).unwrap();
    g
}

/// The same cascade with one branch per block.
pub fn cascade_chain() -> SfgGraph {
    let v = SymbolId::new("V").unwrap();
    let mut g = SfgGraph::new(1, 5);
    g.add_branch(1, 2, gain(&[1.0], &[1.0, 1.0]), &[]).unwrap();
    g.add_branch(2, 3, gain(&[4.0, 1.0], &[2.0, 1.0]), &[]).unwrap();
    g.add_branch(3, 4, RationalFn::one(), &[v]).unwrap();
    g.add_branch(4, 5, RationalFn::constant(2.0), &[]).unwrap();
    g
}

/// `got = c·want` for one positive `c`, coefficientwise to `tol`.
fn proportional(got: &[&Poly], want: &[&[f64]], tol: f64) -> Result<f64, String> {
    let c = got[0].coeffs()[0] / want[0][0];
    if !(c > 0.0) {
        return Err(format!("scale {c} is not positive"));
    }
    for (g, w) in got.iter().zip(want) {
        if g.coeffs().len() != w.len() {
            return Err(format!("{g} has the wrong length, want {w:?}"));
        }
        for (x, y) in g.coeffs().iter().zip(w.iter()) {
            if (x - c * y).abs() > tol * (c * y).abs().max(c) {
                return Err(format!("{g} is not {c} * {w:?}"));
            }
        }
    }
    Ok(c)
}

pub fn cascade_reproduction() -> Check {
    let start = Instant::now();
    let v = SymbolId::new("V").unwrap();
    let with_v = Monomial::from_symbols([&v]);
    let mut notes = Vec::new();
    for (name, g) in [("chain", cascade_chain()), ("integrators", cascade_with_integrators())] {
        let tf = transfer_function(&g, &PipelineConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        if tf.numerator().keys().ne([&with_v]) || tf.denominator().keys().ne([&Monomial::one()]) {
            return Err(format!("{name}: unexpected monomials {:?}", tf.monomials()));
        }
        let b = &tf.numerator()[&with_v];
        let a = &tf.denominator()[&Monomial::one()];
        let c = proportional(&[b, a], &[&[8.0, 2.0], &[2.0, 3.0, 1.0]], 1e-9).map_err(|e| format!("{name}: {e}"))?;
        let sub = substitute_symbol(&tf, &v, &gain(&[1.0], &[3.0, 1.0])).map_err(|e| e.to_string())?;
        let (sb, sa) = sub.numeric().ok_or("symbol left after substitution")?;
        proportional(&[&sb, &sa], &[&[8.0, 2.0], &[6.0, 11.0, 6.0, 1.0]], 1e-9).map_err(|e| format!("{name}: {e}"))?;
        notes.push(format!("{name}: B_V={b} A={a} scale {c}"));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} ({elapsed:?})", notes.join("; ")))
}

#[derive(Debug, Default)]
pub struct OracleStats {
    pub graphs: usize,
    pub points: usize,
    pub skipped: usize,
    pub worst: f64,
    pub failures: Vec<String>,
}

/// Pipeline vs node-equation oracle on random graphs with up to 8 nodes and
/// 16 branches, five sample points each.
pub fn oracle_equivalence(seed: u64, graphs: usize, tol: f64) -> OracleStats {
    let mut r = rng(seed);
    let mut st = OracleStats::default();
    let cfg = PipelineConfig::default();
    while st.graphs < graphs {
        let n = r.gen_range(2..=8u32);
        let m = r.gen_range(n as usize..=16);
        let g = random_graph(&mut r, n, m, 2);
        st.graphs += 1;
        let tf = match transfer_function(&g, &cfg) {
            Ok(tf) => tf,
            Err(e) => {
                st.failures.push(format!("graph {}: {e}", st.graphs));
                continue;
            }
        };
        for _ in 0..5 {
            let s0 = random_point(&mut r);
            let Ok(want) = numeric_oracle(&g, s0, &no_symbols()) else {
                st.skipped += 1;
                continue;
            };
            st.points += 1;
            let got = tf.eval(s0, &no_symbols()).unwrap();
            let err = rel_err(got, want);
            st.worst = st.worst.max(err);
            if !(err <= tol) {
                st.failures.push(format!("graph {} at {s0}: rel err {err:e}", st.graphs));
            }
        }
    }
    st
}

/// Random simple digraph on `1..=nodes` (self-loops allowed, no parallel
/// branches).
pub fn random_digraph(r: &mut ChaCha8Rng, nodes: u32, edges: usize) -> SfgGraph {
    let mut g = SfgGraph::new(1, nodes);
    for id in 1..=nodes {
        g.add_node(id, None);
    }
    let mut pairs = BTreeSet::new();
    let target = edges.min((nodes * nodes) as usize);
    while pairs.len() < target {
        pairs.insert((r.gen_range(1..=nodes), r.gen_range(1..=nodes)));
    }
    for (u, v) in pairs {
        g.add_branch(u, v, RationalFn::one(), &[]).unwrap();
    }
    g
}

pub fn johnson_vs_brute_force(seed: u64, graphs: usize) -> Check {
    let mut r = rng(seed);
    let mut total = 0;
    for case in 0..graphs {
        let n = r.gen_range(1..=8u32);
        let m = r.gen_range(0..=20usize);
        let g = random_digraph(&mut r, n, m);
        let loops = find_loops(&g).map_err(|e| format!("graph {case}: {e}"))?;
        let mut got: Vec<_> = loops.iter().map(|l| l.node_seq.clone()).collect();
        got.sort();
        let want = brute_force_circuits(&g);
        if got != want {
            return Err(format!("graph {case}: johnson {got:?} vs brute force {want:?}"));
        }
        total += got.len();
    }
    Ok(format!("{graphs} digraphs, {total} circuits, identical sets"))
}

pub fn random_touch(r: &mut ChaCha8Rng, n: usize) -> TouchMatrix {
    let p = r.gen_range(0.1..0.9);
    let mut upper = vec![vec![true; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            upper[i][j] = r.gen_bool(p);
        }
    }
    TouchMatrix::from_fn(n, |i, j| upper[i.min(j)][i.max(j)])
}

/// All pairwise non-touching index sets, grouped by size, by scanning every
/// subset.
pub fn brute_force_combos(touch: &TouchMatrix) -> BTreeMap<usize, BTreeSet<Vec<usize>>> {
    let n = touch.len();
    let mut out: BTreeMap<usize, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let ok = set
            .iter()
            .enumerate()
            .all(|(a, &i)| set[a + 1..].iter().all(|&j| !touch.touch(i, j)));
        if ok {
            out.entry(set.len()).or_default().insert(set);
        }
    }
    out
}

pub fn combos_vs_brute_force(seed: u64, matrices: usize) -> Check {
    let mut r = rng(seed);
    let mut rows = 0;
    for case in 0..matrices {
        let n = r.gen_range(0..=15usize);
        let touch = random_touch(&mut r, n);
        let gains = vec![SymbolicGain::one(); n];
        let tables = all_orders(&gains, &touch, usize::MAX).ok_or("row cap hit")?;
        let got: BTreeMap<usize, BTreeSet<Vec<usize>>> = tables
            .iter()
            .map(|t| (t.order, t.index_sets().into_iter().collect()))
            .collect();
        for t in &tables {
            if t.rows.iter().any(|row| row.loops.windows(2).any(|w| w[0] >= w[1])) {
                return Err(format!("matrix {case}: order {} has an unsorted row", t.order));
            }
            if t.len() != got[&t.order].len() {
                return Err(format!("matrix {case}: order {} has duplicate rows", t.order));
            }
        }
        let want = brute_force_combos(&touch);
        if got != want {
            return Err(format!("matrix {case} ({n} loops): generated and brute-force sets differ"));
        }
        rows += got.values().map(BTreeSet::len).sum::<usize>();
    }
    Ok(format!("{matrices} touch matrices, {rows} combinations, identical sets"))
}

/// Random graph that has parallel branches, a fed input and a draining
/// output, so both preprocessing steps change it.
pub fn random_preprocess_case(r: &mut ChaCha8Rng) -> SfgGraph {
    let n = r.gen_range(3..=6u32);
    let m = r.gen_range(n as usize..=10);
    let mut g = random_graph(r, n, m, 2);
    let b = g.branches()[r.gen_range(0..g.branches().len())].clone();
    g.add_branch(b.from, b.to, random_gain(r, 1), &[]).unwrap();
    let mid = r.gen_range(1..=n);
    g.add_branch(mid, 1, random_gain(r, 1), &[]).unwrap();
    g.add_branch(n, r.gen_range(1..=n), random_gain(r, 1), &[]).unwrap();
    g
}

pub fn preprocessing_invariance(seed: u64, cases: usize, tol: f64) -> Check {
    let mut r = rng(seed);
    let mut compared = 0;
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < cases {
        let g = random_preprocess_case(&mut r);
        let split = g.insert_parallel_nodes();
        let augmented = g.augment_terminals();
        let both = g.preprocess();
        if split.branches().len() == g.branches().len() || augmented.input() == g.input() || augmented.output() == g.output() {
            return Err("generator produced a case preprocessing leaves alone".into());
        }
        if !both.structural_violations().is_empty() {
            return Err(format!("preprocessed graph violates {:?}", both.structural_violations()));
        }
        for _ in 0..5 {
            let s0 = random_point(&mut r);
            let Ok(want) = numeric_oracle(&g, s0, &no_symbols()) else { continue };
            for h in [&split, &augmented, &both] {
                let got = numeric_oracle(h, s0, &no_symbols()).map_err(|e| e.to_string())?;
                let err = rel_err(got, want);
                worst = worst.max(err);
                if !(err <= tol) {
                    return Err(format!("case {done} at {s0}: rel err {err:e}"));
                }
                compared += 1;
            }
        }
        done += 1;
    }
    Ok(format!("{cases} graphs, {compared} comparisons, worst {worst:.2e}"))
}

/// Random graph with one branch carrying `V`.
pub fn random_symbolic_case(r: &mut ChaCha8Rng) -> (SfgGraph, usize) {
    let n = r.gen_range(2..=7u32);
    let m = r.gen_range(n as usize..=12);
    let g = random_graph(r, n, m, 1);
    let pick = r.gen_range(0..g.branches().len());
    let v = SymbolId::new("V").unwrap();
    let mut out = SfgGraph::new(g.input(), g.output());
    for id in g.nodes() {
        out.add_node(id, None);
    }
    for b in g.branches() {
        let syms = if b.id == pick { vec![v.clone()] } else { vec![] };
        out.add_branch(b.from, b.to, b.gain.clone(), &syms).unwrap();
    }
    (out, pick)
}

/// The same graph with `V` replaced by a numeric gain on its branch.
pub fn with_value(g: &SfgGraph, branch: usize, value: &RationalFn) -> SfgGraph {
    let mut out = SfgGraph::new(g.input(), g.output());
    for id in g.nodes() {
        out.add_node(id, None);
    }
    for b in g.branches() {
        let gain = if b.id == branch { &b.gain * value } else { b.gain.clone() };
        out.add_branch(b.from, b.to, gain, &[]).unwrap();
    }
    out
}

pub fn symbolic_invariants(seed: u64, graphs: usize, tol: f64) -> Check {
    let mut r = rng(seed);
    let v = SymbolId::new("V").unwrap();
    let cfg = PipelineConfig::default();
    let mut worst = 0.0f64;
    let mut points = 0;
    let mut with_v_terms = 0;
    for case in 0..graphs {
        let (g, branch) = random_symbolic_case(&mut r);
        let tf = transfer_function(&g, &cfg).map_err(|e| format!("graph {case}: {e}"))?;
        for m in tf.monomials() {
            if m.exponent(&v) > 1 {
                return Err(format!("graph {case}: monomial {m} has V exponent above 1"));
            }
            with_v_terms += usize::from(m.exponent(&v) == 1);
        }
        let value = random_gain(&mut r, 1);
        let substituted = substitute_symbol(&tf, &v, &value).map_err(|e| e.to_string())?;
        let direct = transfer_function(&with_value(&g, branch, &value), &cfg).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let s0 = random_point(&mut r);
            let want = direct.eval(s0, &no_symbols()).unwrap();
            let got = substituted.eval(s0, &no_symbols()).unwrap();
            if !want.is_finite() || !got.is_finite() {
                continue;
            }
            let err = rel_err(got, want);
            worst = worst.max(err);
            points += 1;
            if !(err <= tol) {
                return Err(format!("graph {case} at {s0}: rel err {err:e}"));
            }
        }
    }
    Ok(format!(
        "{graphs} graphs, {with_v_terms} V terms, {points} points, worst {worst:.2e}"
    ))
}

/// Fifth-order transfer function printed as the reference column of the
/// CSTR comparison table.
pub fn table4() -> TransferFunction {
    TransferFunction::from_polys(
        Poly::new(vec![0.50445086, 1.5102396, -0.58516490, -0.26303399, -0.045834191]),
        Poly::new(vec![0.55518079, 2.6282597, 10.373603, 26.505478, 7.5090303, 1.0]),
    )
    .unwrap()
}

/// Taylor coefficients of `b/a` about 0 from the truncated Neumann series
/// `1/a = (1/a0)·Σ_j (-(a - a0)/a0)^j`, independent of the long-division
/// recurrence.
pub fn taylor_oracle(b: &Poly, a: &Poly, count: usize) -> Vec<f64> {
    let trunc = |p: &Poly| -> Vec<f64> {
        let mut c = p.coeffs().to_vec();
        c.resize(count, 0.0);
        c.truncate(count);
        c
    };
    let mul = |x: &[f64], y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; count];
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                if i + j < count {
                    out[i + j] += xi * yj;
                }
            }
        }
        out
    };
    let a0 = a.coeffs()[0];
    let mut rest = trunc(a);
    rest[0] = 0.0;
    let q: Vec<f64> = rest.iter().map(|c| -c / a0).collect();
    let mut power = {
        let mut one = vec![0.0; count];
        one[0] = 1.0;
        one
    };
    let mut inv = vec![0.0; count];
    for _ in 0..count {
        for (acc, p) in inv.iter_mut().zip(&power) {
            *acc += p / a0;
        }
        power = mul(&power, &q);
    }
    mul(&trunc(b), &inv)
}

pub fn moment_match(tf: &TransferFunction, r: usize, tol: f64) -> Check {
    let reduced = reduce_order_cf(tf, r).map_err(|e| e.to_string())?;
    let (b, a) = tf.numeric().unwrap();
    let (rb, ra) = reduced.numeric().unwrap();
    if ra.degree() > r || rb.degree() >= r.max(1) + 1 {
        return Err(format!("reduced model {rb} / {ra} is not order {r}"));
    }
    let want = taylor_oracle(&b, &a, 2 * r);
    let got = taylor_oracle(&rb, &ra, 2 * r);
    let mut worst = 0.0f64;
    for (k, (x, y)) in got.iter().zip(&want).enumerate() {
        let err = (x - y).abs() / y.abs();
        worst = worst.max(err);
        if !(err <= tol) {
            return Err(format!("moment {k}: {x} vs {y} (rel {err:e})"));
        }
    }
    Ok(format!("r={r}: {rb} / {ra}, worst moment error {worst:.2e}"))
}

pub fn table4_reduction() -> Check {
    let tf = table4();
    let moments = moment_match(&tf, 3, 1e-6)?;
    let reduced = reduce_order_cf(&tf, 3).unwrap();
    let omegas: Vec<f64> = (0..=200).map(|k| 10f64.powf(-4.0 + 3.0 * k as f64 / 200.0)).collect();
    let full = frequency_response(&tf, &omegas).map_err(|e| e.to_string())?;
    let red = frequency_response(&reduced, &omegas).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (p, q) in full.iter().zip(&red) {
        let err = (q.value.norm() - p.value.norm()).abs() / p.value.norm();
        worst = worst.max(err);
        if !(err <= 0.05) {
            return Err(format!("omega {}: |G| {} vs reduced {}", p.omega, p.value.norm(), q.value.norm()));
        }
    }
    let dc = full[0].value.norm();
    if (dc - 0.50445086 / 0.55518079).abs() > 1e-6 {
        return Err(format!("|G(j1e-4)| = {dc}"));
    }
    Ok(format!("{moments}; worst |G| deviation for omega <= 0.1: {:.2e}", worst))
}

/// Real polynomial with random roots at least `margin` away from the
/// imaginary axis, returned with its roots.
pub fn random_rooted_poly(r: &mut ChaCha8Rng, max_degree: usize, margin: f64) -> (Poly, Vec<Complex64>) {
    let degree = r.gen_range(1..=max_degree);
    let mut p = Poly::constant(r.gen_range(0.5..2.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 });
    let mut rs = Vec::new();
    // Mostly left half-plane so stable cases are common.
    let real = |r: &mut ChaCha8Rng| {
        let x = r.gen_range(margin..3.0);
        if r.gen_bool(0.8) { -x } else { x }
    };
    while rs.len() < degree {
        if degree - rs.len() >= 2 && r.gen_bool(0.5) {
            let (re, im) = (real(r), r.gen_range(0.1..3.0));
            p = &p * &Poly::new(vec![re * re + im * im, -2.0 * re, 1.0]);
            rs.push(Complex64::new(re, im));
            rs.push(Complex64::new(re, -im));
        } else {
            let x = real(r);
            p = &p * &Poly::new(vec![-x, 1.0]);
            rs.push(Complex64::new(x, 0.0));
        }
    }
    (p, rs)
}

pub fn routh_vs_roots(seed: u64, count: usize) -> Check {
    let mut r = rng(seed);
    let mut stable = 0;
    for case in 0..count {
        let (p, known) = random_rooted_poly(&mut r, 6, 1e-3);
        let report = routh_stability(&p);
        let tf = TransferFunction::from_polys(Poly::one(), p.clone()).unwrap();
        let (_, poles) = poles_zeros(&tf).map_err(|e| e.to_string())?;
        let by_roots = poles.roots.iter().all(|z| z.re < 0.0);
        let by_known = known.iter().all(|z| z.re < 0.0);
        if by_roots != by_known {
            return Err(format!("case {case}: computed roots disagree with construction for {p}"));
        }
        if (report.verdict == Verdict::Stable) != by_roots {
            return Err(format!("case {case}: routh says {} for {p}", report.verdict));
        }
        let rhp = known.iter().filter(|z| z.re > 0.0).count();
        if report.sign_changes != rhp {
            return Err(format!("case {case}: {} sign changes but {rhp} right half-plane roots for {p}", report.sign_changes));
        }
        stable += usize::from(by_roots);
    }
    Ok(format!("{count} polynomials ({stable} stable), 100% agreement"))
}

pub fn root_residuals(seed: u64, count: usize, tol: f64) -> Check {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for case in 0..count {
        let (p, _) = random_rooted_poly(&mut r, 10, 0.1);
        let set = roots(&p).map_err(|e| e.to_string())?;
        if set.roots.len() != p.degree() {
            return Err(format!("case {case}: {} roots for degree {}", set.roots.len(), p.degree()));
        }
        worst = worst.max(set.residual);
        if !(set.residual <= tol) {
            return Err(format!("case {case}: residual {:e} for {p}", set.residual));
        }
    }
    Ok(format!("{count} polynomials, worst residual {worst:.2e}"))
}
