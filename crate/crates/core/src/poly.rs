//! Real-coefficient polynomials in the Laplace variable and ratios of them.
//!
//! Coefficients are stored in ascending order: `coeffs[k]` multiplies `s^k`.
//! Every [`Poly`] is kept canonical (no trailing zeros; the zero polynomial is
//! `[0]`). [`RationalFn`] arithmetic never attempts a polynomial gcd; the only
//! cancellations performed are the structural ones in [`RationalFn::tidy`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

/// Polynomials at or above this degree are rejected by the checked operations.
pub const DEGREE_CAP: usize = 64;

/// Default relative tolerance for [`RationalFn::tidy`].
pub const DEFAULT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("non-finite coefficient {0}")]
    NonFinite(f64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("polynomial degree {0} exceeds the cap of {DEGREE_CAP}")]
    DegreeCap(usize),
    #[error("cannot parse polynomial text: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a canonical polynomial from ascending coefficients.
    ///
    /// Panics if a coefficient is NaN or infinite; use [`Poly::try_new`] for
    /// untrusted input.
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self::try_new(coeffs).expect("polynomial coefficients must be finite")
    }

    pub fn try_new(coeffs: Vec<f64>) -> Result<Self, PolyError> {
        if let Some(&bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(PolyError::NonFinite(bad));
        }
        Ok(Self::canonical(coeffs))
    }

    fn canonical(mut coeffs: Vec<f64>) -> Self {
        match coeffs.iter().rposition(|&c| c != 0.0) {
            Some(pos) => coeffs.truncate(pos + 1),
            None => {
                coeffs.clear();
                coeffs.push(0.0);
            }
        }
        // Normalise negative zero so structural equality is exact.
        for c in coeffs.iter_mut() {
            if *c == 0.0 {
                *c = 0.0;
            }
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c * s^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Index of the lowest nonzero coefficient (the power of `s` that divides
    /// the polynomial), `None` for the zero polynomial.
    pub fn low_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiplies by `s^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut coeffs = vec![0.0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Divides by `s^k`, dropping the `k` lowest coefficients.
    ///
    /// Callers are expected to have checked that those coefficients are zero.
    pub fn shift_down(&self, k: usize) -> Self {
        if k >= self.coeffs.len() {
            return Self::zero();
        }
        Self::canonical(self.coeffs[k..].to_vec())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// Zeroes every coefficient with magnitude `<= rel_tol * max_abs()`.
    pub fn prune(&self, rel_tol: f64) -> Self {
        let cutoff = rel_tol * self.max_abs();
        Self::canonical(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() <= cutoff { 0.0 } else { c })
                .collect(),
        )
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn eval_real(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn checked_mul(&self, rhs: &Poly) -> Result<Poly, PolyError> {
        if self.is_zero() || rhs.is_zero() {
            return Ok(Poly::zero());
        }
        let degree = self.degree() + rhs.degree();
        if degree >= DEGREE_CAP {
            return Err(PolyError::DegreeCap(degree));
        }
        Ok(self * rhs)
    }

    /// Raises to a non-negative integer power.
    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::one(), |acc, _| &acc * self)
    }

    /// Renders with the given variable name, highest power first.
    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let mag = c.abs();
            if out.is_empty() {
                if c < 0.0 {
                    out.push('-');
                }
            } else {
                out.push_str(if c < 0.0 { " - " } else { " + " });
            }
            if mag != 1.0 || k == 0 {
                out.push_str(&format_coeff(mag));
            }
            match k {
                0 => {}
                1 => out.push_str(var),
                _ => out.push_str(&format!("{var}^{k}")),
            }
        }
        out
    }
}

fn format_coeff(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("s"))
    }
}

fn zip_with(a: &[f64], b: &[f64], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            op(
                a.get(k).copied().unwrap_or(0.0),
                b.get(k).copied().unwrap_or(0.0),
            )
        })
        .collect()
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        Poly::new(zip_with(&self.coeffs, &rhs.coeffs, |x, y| x + y))
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        Poly::new(zip_with(&self.coeffs, &rhs.coeffs, |x, y| x - y))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($ty:ty, $tr:ident, $m:ident) => {
        impl $tr for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Poly, Add, add);
forward_owned!(Poly, Sub, sub);
forward_owned!(Poly, Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Parses an ascending coefficient list such as `[8, 2]`.
fn parse_coeff_list(text: &str) -> Result<Vec<f64>, PolyError> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| PolyError::Syntax(format!("expected [..] list, got `{text}`")))?;
    if inner.trim().is_empty() {
        return Err(PolyError::Syntax("empty coefficient list".into()));
    }
    inner
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| PolyError::Syntax(format!("bad coefficient `{}`", t.trim())))
        })
        .collect()
}

impl FromStr for Poly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Poly::try_new(parse_coeff_list(s)?)
    }
}

/// A ratio of two real polynomials. The denominator is never the zero
/// polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    pub fn from_coeffs(num: Vec<f64>, den: Vec<f64>) -> Result<Self, PolyError> {
        Self::new(Poly::try_new(num)?, Poly::try_new(den)?)
    }

    pub fn from_poly(num: Poly) -> Self {
        Self {
            num,
            den: Poly::one(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self, PolyError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// Numerical clean-up: prunes coefficients below `rel_tol` relative to
    /// each polynomial's largest coefficient, cancels common powers of `s`,
    /// and fixes the sign so the denominator's lowest nonzero coefficient is
    /// positive. A zero numerator becomes `0/1`.
    pub fn tidy(&self, rel_tol: f64) -> Self {
        let num = self.num.prune(rel_tol);
        if num.is_zero() {
            return Self::zero();
        }
        let mut den = self.den.prune(rel_tol);
        if den.is_zero() {
            // Everything in the denominator was below tolerance relative to
            // itself, which only happens for an exactly zero input.
            den = self.den.clone();
        }
        let k = num.low_order().unwrap().min(den.low_order().unwrap());
        let (mut num, mut den) = (num.shift_down(k), den.shift_down(k));
        if den.coeffs()[0] < 0.0 {
            num = -num;
            den = -den;
        }
        Self { num, den }
    }

    /// Renders as `(num)/(den)` using the given variable name.
    pub fn display_with(&self, var: &str) -> String {
        if self.den == Poly::one() {
            return self.num.display_with(var);
        }
        format!(
            "({})/({})",
            self.num.display_with(var),
            self.den.display_with(var)
        )
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("s"))
    }
}

impl Add for &RationalFn {
    type Output = RationalFn;
    fn add(self, rhs: &RationalFn) -> RationalFn {
        RationalFn {
            num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
    }
}

impl Mul for &RationalFn {
    type Output = RationalFn;
    fn mul(self, rhs: &RationalFn) -> RationalFn {
        RationalFn {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
        }
    }
}

impl Neg for &RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        self.scale(-1.0)
    }
}

impl Add for RationalFn {
    type Output = RationalFn;
    fn add(self, rhs: RationalFn) -> RationalFn {
        &self + &rhs
    }
}

impl Mul for RationalFn {
    type Output = RationalFn;
    fn mul(self, rhs: RationalFn) -> RationalFn {
        &self * &rhs
    }
}

impl Neg for RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        -&self
    }
}

/// Parses the gain text syntax `num=[8,2] den=[2,3,1]`. A missing `den`
/// defaults to `[1]`.
impl FromStr for RationalFn {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut num = None;
        let mut den = None;
        let mut rest = s.trim();
        while !rest.is_empty() {
            let (key, after) = rest
                .split_once('=')
                .ok_or_else(|| PolyError::Syntax(format!("expected key=[..] in `{s}`")))?;
            let end = after
                .find(']')
                .ok_or_else(|| PolyError::Syntax(format!("unterminated list in `{s}`")))?;
            let poly: Poly = after[..=end].parse()?;
            match key.trim() {
                "num" => num = Some(poly),
                "den" => den = Some(poly),
                other => return Err(PolyError::Syntax(format!("unknown key `{other}`"))),
            }
            rest = after[end + 1..].trim_start_matches([',', ' ', '\t']);
        }
        let num = num.ok_or_else(|| PolyError::Syntax(format!("missing num in `{s}`")))?;
        RationalFn::new(num, den.unwrap_or_else(Poly::one))
    }
}
