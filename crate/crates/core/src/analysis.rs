//! Analysis of numeric transfer functions: frequency response, Routh
//! stability, poles and zeros, and continued-fraction order reduction.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{Poly, RationalFn};
use crate::shannon::TransferFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("transfer function still contains symbols; substitute them first")]
    Symbolic,
    #[error("denominator vanishes at omega = {0}")]
    EvaluationAtPole(f64),
    #[error("QR iteration did not converge")]
    NoConvergence,
    #[error("continued-fraction quotient {0} has a zero leading term")]
    SingularQuotient(usize),
    #[error("reduction order {order} must lie in 1..={max}")]
    BadOrder { order: usize, max: usize },
    #[error("reduction about s = 0 needs A(0) != 0")]
    PoleAtOrigin,
    #[error("invalid sweep: {0}")]
    BadSweep(String),
}

fn numeric(tf: &TransferFunction) -> Result<(Poly, Poly), AnalysisError> {
    tf.numeric().ok_or(AnalysisError::Symbolic)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyPoint {
    pub omega: f64,
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub magnitude_db: f64,
    /// Unwrapped phase in degrees.
    pub phase_deg: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Log-spaced frequencies from `wmin` to `wmax` inclusive.
pub fn log_sweep(wmin: f64, wmax: f64, points: usize) -> Result<Vec<f64>, AnalysisError> {
    if !(wmin > 0.0 && wmax > wmin && wmax.is_finite()) {
        return Err(AnalysisError::BadSweep(format!(
            "need 0 < wmin < wmax, got {wmin}..{wmax}"
        )));
    }
    if points < 2 {
        return Err(AnalysisError::BadSweep("need at least 2 points".into()));
    }
    let (lo, hi) = (wmin.log10(), wmax.log10());
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if k == points - 1 {
                wmax
            } else {
                10f64.powf(lo + step * k as f64)
            }
        })
        .collect())
}

/// The default 400-point sweep over `[1e-2, 1e2]` rad/s.
pub fn default_sweep() -> Vec<f64> {
    log_sweep(1e-2, 1e2, 400).expect("valid default sweep")
}

/// `G(jω)` for every ω, with the phase unwrapped so consecutive points never
/// jump by more than 180 degrees.
pub fn frequency_response(
    tf: &TransferFunction,
    omegas: &[f64],
) -> Result<Vec<FrequencyPoint>, AnalysisError> {
    let (b, a) = numeric(tf)?;
    let mut out: Vec<FrequencyPoint> = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let s = Complex64::new(0.0, omega);
        let den = a.eval(s);
        if den.norm() < 1e-300 {
            return Err(AnalysisError::EvaluationAtPole(omega));
        }
        let value = b.eval(s) / den;
        let mut phase = value.arg().to_degrees();
        if phase <= -180.0 {
            phase += 360.0;
        }
        if let Some(prev) = out.last() {
            phase += 360.0 * ((prev.phase_deg - phase) / 360.0).round();
        }
        out.push(FrequencyPoint {
            omega,
            value,
            magnitude_db: 20.0 * value.norm().log10(),
            phase_deg: phase,
        });
    }
    Ok(out)
}

/// Leading behaviour `coeff·ε^eps_power` of a Routh array entry as ε -> 0+.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouthCell {
    pub coeff: f64,
    pub eps_power: i32,
}

impl RouthCell {
    fn sign(&self) -> f64 {
        self.coeff.signum()
    }
}

impl fmt::Display for RouthCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.eps_power {
            0 => write!(f, "{}", self.coeff),
            1 => write!(f, "{}ε", self.coeff),
            k if k > 0 => write!(f, "{}ε^{k}", self.coeff),
            -1 => write!(f, "{}/ε", self.coeff),
            k => write!(f, "{}/ε^{}", self.coeff, -k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegeneracyKind {
    /// A zero first-column entry replaced by ε.
    EpsilonSubstitution,
    /// An all-zero row replaced by the derivative of the auxiliary polynomial.
    AuxiliaryRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Degeneracy {
    pub kind: DegeneracyKind,
    pub row: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouthReport {
    /// Row `k` belongs to `s^(n-k)`.
    pub rows: Vec<Vec<RouthCell>>,
    pub sign_changes: usize,
    pub verdict: Verdict,
    pub degeneracies: Vec<Degeneracy>,
}

/// Relative threshold below which a cancelled Routh entry counts as zero.
const ROUTH_ZERO_TOL: f64 = 1e-9;

/// Entries are rational functions of ε, kept exact so that signs are read
/// off as ε -> 0+ rather than from a small numeric stand-in.
type Cell = RationalFn;

fn limit(cell: &Cell) -> RouthCell {
    let (n, d) = (cell.num(), cell.den());
    match (n.low_order(), d.low_order()) {
        (Some(i), Some(j)) => RouthCell {
            coeff: n.coeffs()[i] / d.coeffs()[j],
            eps_power: i as i32 - j as i32,
        },
        _ => RouthCell {
            coeff: 0.0,
            eps_power: 0,
        },
    }
}

/// `x - y` with per-coefficient cancellation to exact zero.
fn cancel_sub(x: &Poly, y: &Poly) -> Poly {
    let n = x.coeffs().len().max(y.coeffs().len());
    let at = |p: &Poly, k: usize| p.coeffs().get(k).copied().unwrap_or(0.0);
    Poly::new(
        (0..n)
            .map(|k| {
                let (a, b) = (at(x, k), at(y, k));
                let d = a - b;
                if d.abs() <= ROUTH_ZERO_TOL * a.abs().max(b.abs()) {
                    0.0
                } else {
                    d
                }
            })
            .collect(),
    )
}

/// `(p0·q_next - q0·p_next) / p0`, the standard Routh recurrence, where `p`
/// is the row directly above and `q` the one above that.
fn routh_entry(p0: &Cell, q0: &Cell, p_next: &Cell, q_next: &Cell) -> Cell {
    let left = p0 * q_next;
    let right = q0 * p_next;
    let num = cancel_sub(
        &(left.num() * right.den()),
        &(right.num() * left.den()),
    );
    let diff = RationalFn::new(num, left.den() * right.den()).expect("nonzero");
    (&diff * &p0.recip().expect("pivot is nonzero")).tidy(1e-14)
}

pub fn routh_stability(a: &Poly) -> RouthReport {
    let n = a.degree();
    let sign = a.leading().signum();
    // coefficient of s^k
    let coef = |k: usize| Cell::constant(sign * a.coeffs()[k]);
    let width = n / 2 + 1;
    let zero = Cell::zero();
    let at = |row: &Vec<Cell>, j: usize| row.get(j).cloned().unwrap_or_else(Cell::zero);

    let mut rows: Vec<Vec<Cell>> = Vec::with_capacity(n + 1);
    for start in [0usize, 1] {
        if start > n {
            break;
        }
        let row: Vec<Cell> = (0..width)
            .map(|j| {
                let k = start + 2 * j;
                if k <= n { coef(n - k) } else { zero.clone() }
            })
            .collect();
        rows.push(row);
    }

    let mut degeneracies = Vec::new();
    let mut idx = 1;
    loop {
        if idx > n {
            break;
        }
        if idx >= 2 {
            let (q, p) = (&rows[idx - 2], &rows[idx - 1]);
            let row = (0..width)
                .map(|j| routh_entry(&p[0], &q[0], &at(p, j + 1), &at(q, j + 1)))
                .collect();
            rows.push(row);
        }
        let row_is_zero = rows[idx].iter().all(RationalFn::is_zero);
        if row_is_zero {
            // Auxiliary polynomial from the row above, of degree n - idx + 1.
            let power = (n - idx + 1) as f64;
            let above = rows[idx - 1].clone();
            rows[idx] = above
                .iter()
                .enumerate()
                .map(|(j, c)| c.scale((power - 2.0 * j as f64).max(0.0)))
                .collect();
            degeneracies.push(Degeneracy {
                kind: DegeneracyKind::AuxiliaryRow,
                row: idx,
            });
        }
        if rows[idx][0].is_zero() {
            rows[idx][0] = Cell::from_poly(Poly::new(vec![0.0, 1.0]));
            degeneracies.push(Degeneracy {
                kind: DegeneracyKind::EpsilonSubstitution,
                row: idx,
            });
        }
        idx += 1;
    }

    let cells: Vec<Vec<RouthCell>> = rows
        .iter()
        .enumerate()
        .map(|(k, row)| {
            // Row for s^(n-k) has (n - k) / 2 + 1 meaningful entries.
            row.iter().take((n - k) / 2 + 1).map(limit).collect()
        })
        .collect();
    let sign_changes = cells
        .windows(2)
        .filter(|w| w[0][0].sign() != w[1][0].sign())
        .count();
    let verdict = if sign_changes > 0 {
        Verdict::Unstable
    } else if degeneracies
        .iter()
        .any(|d| d.kind == DegeneracyKind::AuxiliaryRow)
    {
        Verdict::Marginal
    } else {
        Verdict::Stable
    };
    RouthReport {
        rows: cells,
        sign_changes,
        verdict,
        degeneracies,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    #[serde(serialize_with = "ser_complex_vec")]
    pub roots: Vec<Complex64>,
    /// `max |p(root)| / max |coefficient|`.
    pub residual: f64,
}

fn ser_complex_vec<S: serde::Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(zs.len()))?;
    for z in zs {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Roots as eigenvalues of the balanced companion matrix, found with the
/// Francis double-shift QR iteration. Constant polynomials have no roots.
pub fn roots(p: &Poly) -> Result<RootSet, AnalysisError> {
    let zeros_at_origin = p.low_order().unwrap_or(0);
    let reduced = p.shift_down(zeros_at_origin);
    let mut found = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    if reduced.degree() > 0 {
        let mut m = companion(&reduced);
        balance(&mut m);
        found.extend(hqr(&mut m)?);
    }
    found.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let scale = p.max_abs();
    let residual = found
        .iter()
        .map(|&z| p.eval(z).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(RootSet {
        roots: found,
        residual,
    })
}

/// `(zeros, poles)` of a numeric transfer function.
pub fn poles_zeros(tf: &TransferFunction) -> Result<(RootSet, RootSet), AnalysisError> {
    let (b, a) = numeric(tf)?;
    Ok((roots(&b)?, roots(&a)?))
}

/// Upper Hessenberg companion matrix of a polynomial with nonzero constant
/// and leading coefficients.
fn companion(p: &Poly) -> Vec<Vec<f64>> {
    let n = p.degree();
    let c = p.coeffs();
    let lead = c[n];
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        m[0][j] = -c[n - 1 - j] / lead;
    }
    for i in 1..n {
        m[i][i - 1] = 1.0;
    }
    m
}

/// Diagonal similarity scaling by powers of two so rows and columns have
/// comparable norms.
fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the shifted QR algorithm
/// with implicit double shifts. Destroys `a`.
#[allow(unused_assignments)]
fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<Complex64>, AnalysisError> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // Smallest l such that a[l][l-1] is negligible.
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                out[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    let lo = if z != 0.0 { x - w / z } else { x + z };
                    out[nu - 1] = Complex64::new(x + z, 0.0);
                    out[nu] = Complex64::new(lo, 0.0);
                } else {
                    out[nu - 1] = Complex64::new(x + p, -z);
                    out[nu] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return Err(AnalysisError::NoConvergence);
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..=nu {
                    a[i][i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // Look for two consecutive small subdiagonal elements.
            let mut m = nu - 2;
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            // Double QR step on rows l..=nn and columns m..=nn.
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k + 1 != nu { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[i][k] + y * a[i][k + 1];
                        if k + 1 != nu {
                            pp += z * a[i][k + 2];
                            a[i][k + 2] -= pp * r;
                        }
                        a[i][k + 1] -= pp * q;
                        a[i][k] -= pp;
                    }
                }
                k += 1;
            }
            if l >= nu - 1 {
                break;
            }
        }
    }
    Ok(out)
}

/// First `count` Taylor coefficients of `b/a` about `s = 0` (the time
/// moments, up to sign and factorial), by ascending long division.
pub fn taylor_coefficients(b: &Poly, a: &Poly, count: usize) -> Result<Vec<f64>, AnalysisError> {
    let a0 = a.coeffs()[0];
    if a0 == 0.0 {
        return Err(AnalysisError::PoleAtOrigin);
    }
    let at = |p: &Poly, k: usize| p.coeffs().get(k).copied().unwrap_or(0.0);
    let mut c = Vec::with_capacity(count);
    for k in 0..count {
        let acc: f64 = (1..=k).map(|j| at(a, j) * c[k - j]).sum();
        c.push((at(b, k) - acc) / a0);
    }
    Ok(c)
}

/// Continued-fraction quotients `h1, h2, ...` of
/// `G = 1/(h1 + s/(h2 + s/(h3 + ...)))`, at most `max` of them. Fewer are
/// returned when the expansion terminates exactly.
pub fn cauer_quotients(b: &Poly, a: &Poly, max: usize) -> Result<Vec<f64>, AnalysisError> {
    let mut upper: Vec<f64> = a.coeffs().to_vec();
    let mut lower: Vec<f64> = b.coeffs().to_vec();
    let scale = a.max_abs().max(b.max_abs());
    let mut h = Vec::with_capacity(max);
    while h.len() < max {
        if lower.iter().all(|&c| c.abs() <= 1e-12 * scale) {
            break;
        }
        if lower[0].abs() <= 1e-12 * scale {
            return Err(AnalysisError::SingularQuotient(h.len() + 1));
        }
        let q = upper[0] / lower[0];
        let len = upper.len().max(lower.len()).saturating_sub(1);
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        let next: Vec<f64> = (0..len.max(1))
            .map(|j| get(&upper, j + 1) - q * get(&lower, j + 1))
            .collect();
        h.push(q);
        upper = std::mem::replace(&mut lower, next);
    }
    Ok(h)
}

/// Folds the quotients back into `num/den`, normalised so `den(0) = 1`.
pub fn cauer_rational(h: &[f64]) -> (Poly, Poly) {
    let s = Poly::new(vec![0.0, 1.0]);
    let (mut tn, mut td) = (Poly::constant(*h.last().expect("at least one quotient")), Poly::one());
    for &hk in h[..h.len() - 1].iter().rev() {
        // T_k = h_k + s / T_{k+1}
        let n = &tn.scale(hk) + &(&s * &td);
        td = tn;
        tn = n;
    }
    // G = 1 / T_1
    let (num, den) = (td, tn);
    let d0 = den.coeffs()[0];
    (num.scale(1.0 / d0), den.scale(1.0 / d0))
}

/// Reduced model of order `r` from the first `2r` quotients of the Cauer
/// second-form expansion about `s = 0`; it matches the first `2r` Taylor
/// coefficients of the original.
pub fn reduce_order_cf(tf: &TransferFunction, r: usize) -> Result<TransferFunction, AnalysisError> {
    let (b, a) = numeric(tf)?;
    let max = a.degree();
    if r == 0 || r > max {
        return Err(AnalysisError::BadOrder { order: r, max });
    }
    if a.coeffs()[0] == 0.0 {
        return Err(AnalysisError::PoleAtOrigin);
    }
    let h = cauer_quotients(&b, &a, 2 * r)?;
    if h.is_empty() {
        return Ok(TransferFunction::from_polys(Poly::zero(), Poly::one()).expect("unit denominator"));
    }
    let (num, den) = cauer_rational(&h);
    Ok(TransferFunction::from_polys(num, den).expect("nonzero denominator"))
}

/// Taylor coefficients of the original and a reduced model side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub original: Vec<f64>,
    pub reduced: Vec<f64>,
    pub max_rel_error: f64,
}

pub fn moment_report(
    original: &TransferFunction,
    reduced: &TransferFunction,
    count: usize,
) -> Result<MomentReport, AnalysisError> {
    let (b, a) = numeric(original)?;
    let (rb, ra) = numeric(reduced)?;
    let original = taylor_coefficients(&b, &a, count)?;
    let reduced = taylor_coefficients(&rb, &ra, count)?;
    let max_rel_error = original
        .iter()
        .zip(&reduced)
        .map(|(x, y)| (x - y).abs() / x.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(MomentReport {
        original,
        reduced,
        max_rel_error,
    })
}

/// Phase in degrees wrapped to (-180, 180].
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut d = deg % 360.0;
    if d <= -180.0 {
        d += 360.0;
    } else if d > 180.0 {
        d -= 360.0;
    }
    d
}
