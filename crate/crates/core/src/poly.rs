//! Exact univariate polynomials over the rationals, plus the real-root
//! isolation used by the generating-function bounds.
//!
//! Root isolation is Sturm-free: the polynomial is first reduced to its
//! square-free part (exact gcd with the derivative), then bisected with
//! Descartes sign-variation counts until each interval holds at most one
//! root. Exact arithmetic makes the certificates rigorous.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;

/// Dense polynomial with exact rational coefficients; `coeffs[k]` multiplies
/// `x^k` and trailing zeros are trimmed.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

fn rat_i64(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RationalPoly {
    pub fn zero() -> Self {
        RationalPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        RationalPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = RationalPoly { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn monomial(c: BigRational, deg: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); deg + 1];
        coeffs[deg] = c;
        let mut p = RationalPoly { coeffs };
        p.trim();
        p
    }

    /// Build from integer coefficients in ascending degree.
    pub fn from_integers(cs: &[i64]) -> Self {
        let mut p = RationalPoly {
            coeffs: cs.iter().map(|&c| rat_i64(c)).collect(),
        };
        p.trim();
        p
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        let mut p = RationalPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Index of the lowest-degree nonzero coefficient.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) + other.coeff(k));
        }
        RationalPoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) - other.coeff(k));
        }
        RationalPoly::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Self {
        RationalPoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RationalPoly::zero();
        }
        let mut coeffs =
            vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        RationalPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiply by x^k.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return RationalPoly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        RationalPoly { coeffs }
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rational_to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return RationalPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * rat_i64(k as i64))
            .collect();
        RationalPoly::from_coeffs(coeffs)
    }

    /// Euclidean division; panics on division by zero.
    pub fn divrem(&self, div: &Self) -> (Self, Self) {
        assert!(!div.is_zero(), "division by the zero polynomial");
        let dd = div.degree().unwrap();
        let lead = div.coeffs[dd].clone();
        let mut rem = self.clone();
        let mut quo = vec![
            BigRational::zero();
            self.coeffs.len().saturating_sub(div.coeffs.len()) + 1
        ];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let f = &rem.coeffs[rd] / &lead;
            quo[rd - dd] = f.clone();
            let sub = div.scale(&f).shift_up(rd - dd);
            rem = rem.sub(&sub);
        }
        (RationalPoly::from_coeffs(quo), rem)
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if let Some(d) = a.degree() {
            let lead = a.coeffs[d].clone();
            a = a.scale(&(BigRational::one() / lead));
        }
        a
    }

    /// The square-free part `self / gcd(self, self')`.
    pub fn square_free(&self) -> Self {
        if self.is_zero() {
            return RationalPoly::zero();
        }
        let g = RationalPoly::gcd(self, &self.derivative());
        if g.degree() == Some(0) {
            return self.clone();
        }
        let (q, r) = self.divrem(&g);
        debug_assert!(r.is_zero());
        q
    }

    /// Exact division by `other`; panics if the remainder is nonzero.
    pub fn div_exact(&self, other: &Self) -> Self {
        let (q, r) = self.divrem(other);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Compose with the affine map x -> a + b*x.
    pub fn compose_affine(&self, a: &BigRational, b: &BigRational) -> Self {
        let mut acc = RationalPoly::zero();
        let lin = RationalPoly::from_coeffs(vec![a.clone(), b.clone()]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&RationalPoly::constant(c.clone()));
        }
        acc
    }

    /// Reverse coefficients: x^d * p(1/x).
    pub fn reverse(&self) -> Self {
        let mut coeffs: Vec<BigRational> = self.coeffs.iter().rev().cloned().collect();
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    /// Taylor shift: p(x + 1).
    pub fn shift_by_one(&self) -> Self {
        self.compose_affine(&BigRational::one(), &BigRational::one())
    }

    pub fn sign_variations(&self) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for c in &self.coeffs {
            let s = if c.is_zero() {
                0
            } else if c.is_positive() {
                1
            } else {
                -1
            };
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Canonical ascending-degree sparse rendering, e.g. `2*p^2 - p^3`.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let neg = c.is_negative();
            if first {
                if neg {
                    out.push('-');
                }
                first = false;
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mag_str = if mag.is_integer() {
                mag.numer().to_string()
            } else {
                format!("{}/{}", mag.numer(), mag.denom())
            };
            if k == 0 {
                out.push_str(&mag_str);
            } else {
                if !mag.is_one() {
                    out.push_str(&mag_str);
                    out.push('*');
                }
                out.push_str(var);
                if k > 1 {
                    out.push_str(&format!("^{k}"));
                }
            }
        }
        out
    }
}

impl fmt::Debug for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("x"))
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // good enough over the magnitudes used here
    let n = r.numer();
    let d = r.denom();
    let fn_ = bigint_to_f64(n);
    let fd = bigint_to_f64(d);
    fn_ / fd
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Number of real roots of `p` in the open interval (a, b), by the Descartes
/// test after mapping (a, b) onto (0, inf). Requires b > a.
fn descartes_count(p: &RationalPoly, a: &BigRational, b: &BigRational) -> usize {
    // q(x) = p(a + (b - a) x) has the roots of p in (a,b) mapped to (0,1);
    // reversal + Taylor shift maps (0,1) onto (0,inf) for the sign count.
    let q = p.compose_affine(a, &(b - a));
    q.reverse().shift_by_one().sign_variations()
}

/// Exact enclosure of one real root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RootInterval {
    pub fn point(r: BigRational) -> Self {
        RootInterval { lo: r.clone(), hi: r }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        (rational_to_f64(&self.lo) + rational_to_f64(&self.hi)) / 2.0
    }
}

/// Isolate the smallest strictly positive real root of `p` and refine the
/// enclosure to width <= `precision`. Returns None if `p` has no positive
/// root. Exact rational roots come back as point intervals.
pub fn smallest_positive_root(
    p: &RationalPoly,
    precision: &BigRational,
) -> Option<RootInterval> {
    assert!(!p.is_zero(), "zero polynomial has no isolated roots");
    // strip roots at the origin, then square-free for certified isolation
    let low = p.lowest_degree().unwrap();
    let stripped = RationalPoly::from_coeffs(p.coeffs()[low..].to_vec());
    let w = stripped.square_free();

    let d = w.degree().unwrap_or(0);
    if d == 0 {
        return None;
    }
    if d == 1 {
        let root = -w.coeff(0) / w.coeff(1);
        if root.is_positive() {
            return Some(RootInterval::point(root));
        }
        return None;
    }

    // Cauchy bound: every root has |x| < 1 + max |a_i| / |a_d|
    let lead = w.coeff(d).abs();
    let mut m = BigRational::zero();
    for c in &w.coeffs()[..d] {
        let a = c.abs();
        if a > m {
            m = a;
        }
    }
    let mut bound = BigRational::one() + m / lead;
    while w.eval(&bound).is_zero() {
        bound = &bound * rat_i64(2);
    }

    let zero = BigRational::zero();
    let isolating = isolate_leftmost(&w, &zero, &bound, 0)?;
    let (mut lo, mut hi) = match isolating {
        Isolated::Point(r) => return Some(RootInterval::point(r)),
        Isolated::Open(lo, hi) => (lo, hi),
    };

    // bisect the isolating interval down to the requested width; w(lo) != 0
    // by construction, and (lo, hi) holds exactly one root
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let s_lo = w.eval(&lo).is_positive();
    while &hi - &lo > *precision {
        let mid = (&lo + &hi) * &half;
        let v = w.eval(&mid);
        if v.is_zero() {
            return Some(RootInterval::point(mid));
        }
        if v.is_positive() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(RootInterval { lo, hi })
}

enum Isolated {
    Point(BigRational),
    Open(BigRational, BigRational),
}

/// Left-interval-first search for the leftmost root of the square-free `w`
/// in (a, b), with w(a) != 0. Returns an interval holding exactly one root
/// (Descartes count 1), or an exact point when a bisection midpoint is a
/// root and nothing smaller exists.
fn isolate_leftmost(
    w: &RationalPoly,
    a: &BigRational,
    b: &BigRational,
    depth: usize,
) -> Option<Isolated> {
    assert!(depth < 4096, "root isolation failed to terminate");
    match descartes_count(w, a, b) {
        0 => None,
        1 => Some(Isolated::Open(a.clone(), b.clone())),
        _ => {
            let half = BigRational::new(BigInt::from(1), BigInt::from(2));
            let mid = (a + b) * &half;
            let mid_is_root = w.eval(&mid).is_zero();
            if let Some(found) = isolate_leftmost(w, a, &mid, depth + 1) {
                return Some(found);
            }
            if mid_is_root {
                return Some(Isolated::Point(mid));
            }
            isolate_leftmost(w, &mid, b, depth + 1)
        }
    }
}
