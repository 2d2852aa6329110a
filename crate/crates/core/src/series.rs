//! Generating-function lower bounds: the a-sequence recurrence seeded with
//! exact small-n probabilities, its quadratic's discriminant, exact radius
//! computations, and the Monte Carlo variant of the bound.

use crate::catalan::{exact_theta_poly, N_ENUM_MAX};
use crate::error::{Error, Result};
use crate::poly::{smallest_positive_root, RationalPoly, RootInterval};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed};

/// Exact Catalan numbers C_0..C_{k_max}.
pub fn catalan_numbers(k_max: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(BigInt::from(1));
    for n in 1..=k_max {
        let prev = out.last().unwrap();
        let next: BigInt = prev * BigInt::from(2 * (2 * n - 1)) / BigInt::from(n + 1);
        out.push(next);
    }
    out
}

/// The sequence a_n^(n0): exact theta_n for n <= n0, then closed by the
/// union-bound convolution a_n = p * sum_k a_k a_{n-k}.
pub struct ASequence {
    pub n0: usize,
    polys: Vec<RationalPoly>, // index 0 unused
}

impl ASequence {
    pub fn len(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn a(&self, n: usize) -> &RationalPoly {
        assert!(n >= 1 && n <= self.len());
        &self.polys[n]
    }
}

pub fn a_sequence(n0: usize, len: usize) -> Result<ASequence> {
    if n0 == 0 || n0 > N_ENUM_MAX {
        return Err(Error::OutOfExactRange {
            n: n0,
            max: N_ENUM_MAX,
        });
    }
    if len < n0 {
        return Err(Error::Infeasible(format!(
            "sequence length {len} shorter than cutoff {n0}"
        )));
    }
    let p = RationalPoly::from_integers(&[0, 1]);
    let mut polys = vec![RationalPoly::zero()];
    for n in 1..=len {
        let next = if n <= n0 {
            exact_theta_poly(n)?
        } else {
            let mut conv = RationalPoly::zero();
            for k in 1..n {
                conv = conv.add(&polys[k].mul(&polys[n - k]));
            }
            p.mul(&conv)
        };
        polys.push(next);
    }
    Ok(ASequence { n0, polys })
}

/// A polynomial in x whose coefficients are exact polynomials in p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivarPoly {
    /// coefficient of x^k, as a polynomial in p
    pub x_coeffs: Vec<RationalPoly>,
}

impl BivarPoly {
    /// Substitute an exact rational p, leaving a polynomial in x.
    pub fn at_p(&self, p: &BigRational) -> RationalPoly {
        RationalPoly::from_coeffs(self.x_coeffs.iter().map(|c| c.eval(p)).collect())
    }

    /// Substitute x = 1, leaving a polynomial in p.
    pub fn at_x_one(&self) -> RationalPoly {
        let mut acc = RationalPoly::zero();
        for c in &self.x_coeffs {
            acc = acc.add(c);
        }
        acc
    }

    pub fn render(&self) -> String {
        let mut terms = Vec::new();
        for (k, c) in self.x_coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coeff = c.render("p");
            let body = if k == 0 {
                coeff
            } else {
                let x = if k == 1 { "x".to_string() } else { format!("x^{k}") };
                if coeff == "1" {
                    x
                } else {
                    format!("({coeff})*{x}")
                }
            };
            terms.push(body);
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

/// The discriminant Delta(p, x) = 1 - 4p Q(p, x) of the generating-function
/// quadratic p X^2 - X + Q = 0, where Q = sum_{n<=n0} theta_n x^n minus the
/// convolution terms of the truncated series that the recurrence re-counts.
pub struct Discriminant {
    pub n0: usize,
    pub delta: BivarPoly,
}

pub fn discriminant(n0: usize) -> Result<Discriminant> {
    if n0 == 0 || n0 > N_ENUM_MAX {
        return Err(Error::OutOfExactRange {
            n: n0,
            max: N_ENUM_MAX,
        });
    }
    let p = RationalPoly::from_integers(&[0, 1]);
    // truncated series A(x) = sum_{n=1..n0} theta_n(p) x^n
    let mut a = vec![RationalPoly::zero(); n0 + 1];
    for (n, slot) in a.iter_mut().enumerate().skip(1) {
        *slot = exact_theta_poly(n)?;
    }
    // [x^m] A^2 for m <= n0
    let mut a_sq = vec![RationalPoly::zero(); n0 + 1];
    for i in 1..=n0 {
        for j in 1..n0.saturating_sub(i) + 1 {
            if i + j <= n0 {
                a_sq[i + j] = a_sq[i + j].add(&a[i].mul(&a[j]));
            }
        }
    }
    // Q = A - p * (A^2 truncated); Delta = 1 - 4 p Q
    let mut delta = vec![RationalPoly::zero(); n0 + 1];
    delta[0] = RationalPoly::one();
    let minus_4p = RationalPoly::from_integers(&[0, -4]);
    for m in 1..=n0 {
        let q_m = a[m].sub(&p.mul(&a_sq[m]));
        delta[m] = minus_4p.mul(&q_m);
    }
    Ok(Discriminant {
        n0,
        delta: BivarPoly { x_coeffs: delta },
    })
}

/// Radius of convergence of the a-sequence at fixed p: the smallest positive
/// x-root of Delta(p, x), or infinite when no positive root exists.
#[derive(Clone, Debug)]
pub enum Radius {
    Finite(RootInterval),
    Infinite,
}

pub fn radius(n0: usize, p: &BigRational, precision: &BigRational) -> Result<Radius> {
    if !p.is_positive() || p > &BigRational::one() {
        return Err(Error::InvalidProbability {
            name: "p",
            value: crate::poly::rational_to_f64(p),
        });
    }
    let disc = discriminant(n0)?;
    let poly_x = disc.delta.at_p(p);
    Ok(match smallest_positive_root(&poly_x, precision) {
        Some(interval) => Radius::Finite(interval),
        None => Radius::Infinite,
    })
}

/// Certified enclosure of p_{n0} = inf{p > 0 : Delta(p, 1) = 0}, the exact
/// lower bound on the subcritical threshold delivered by cutoff n0.
pub fn lower_bound_pm(n0: usize, precision: &BigRational) -> Result<RootInterval> {
    let disc = discriminant(n0)?;
    let poly_p = disc.delta.at_x_one();
    smallest_positive_root(&poly_p, precision).ok_or_else(|| {
        Error::Infeasible(format!("Delta(p, 1) has no positive root for n0 = {n0}"))
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo variant of the lower bound (Fig. 6 pipeline).
// ---------------------------------------------------------------------------

/// Numeric source of theta_n(p) values, exact or estimated.
pub trait ThetaProvider: Sync {
    fn max_n(&self) -> usize;
    /// theta_n at parameter p, for 1 <= n <= max_n. Must be nondecreasing in
    /// p for the bisection to be meaningful.
    fn theta(&self, n: usize, p: f64) -> f64;
}

/// Provider backed by the exact polynomials (cross-validation path).
pub struct ExactThetaProvider {
    polys: Vec<RationalPoly>,
}

impl ExactThetaProvider {
    pub fn new(max_n: usize) -> Result<Self> {
        let mut polys = vec![RationalPoly::zero()];
        for n in 1..=max_n {
            polys.push(exact_theta_poly(n)?);
        }
        Ok(ExactThetaProvider { polys })
    }
}

impl ThetaProvider for ExactThetaProvider {
    fn max_n(&self) -> usize {
        self.polys.len() - 1
    }

    fn theta(&self, n: usize, p: f64) -> f64 {
        self.polys[n].eval_f64(p)
    }
}

/// Provider backed by tabulated estimates (n, p, theta_hat), e.g. parsed from
/// a CSV. Queries interpolate linearly between grid points and clamp outside
/// the grid; a missing n = 1 row defaults to theta_1 = 1.
pub struct ThetaTable {
    per_n: Vec<Vec<(f64, f64)>>, // index n, sorted by p
}

impl ThetaTable {
    pub fn from_rows(max_n: usize, rows: &[(usize, f64, f64)]) -> Result<Self> {
        let mut per_n: Vec<Vec<(f64, f64)>> = vec![Vec::new(); max_n + 1];
        for &(n, p, th) in rows {
            if n == 0 || n > max_n {
                continue;
            }
            per_n[n].push((p, th));
        }
        for (n, grid) in per_n.iter_mut().enumerate().skip(1) {
            grid.sort_by(|a, b| a.0.total_cmp(&b.0));
            if grid.is_empty() && n > 1 {
                return Err(Error::Parse(format!("no theta rows for n = {n}")));
            }
        }
        Ok(ThetaTable { per_n })
    }
}

impl ThetaProvider for ThetaTable {
    fn max_n(&self) -> usize {
        self.per_n.len() - 1
    }

    fn theta(&self, n: usize, p: f64) -> f64 {
        let grid = &self.per_n[n];
        if grid.is_empty() {
            return if n == 1 { 1.0 } else { 0.0 };
        }
        if p <= grid[0].0 {
            return grid[0].1;
        }
        if p >= grid[grid.len() - 1].0 {
            return grid[grid.len() - 1].1;
        }
        let idx = grid.partition_point(|&(gp, _)| gp <= p);
        let (p0, t0) = grid[idx - 1];
        let (p1, t1) = grid[idx];
        if p1 == p0 {
            t0
        } else {
            t0 + (t1 - t0) * (p - p0) / (p1 - p0)
        }
    }
}

#[derive(Clone, Debug)]
pub struct McLowerBoundOptions {
    /// Number of recurrence terms.
    pub n_terms: usize,
    /// Bisection tolerance for p.
    pub tol: f64,
    /// Initial bracket; widened automatically if the classifier disagrees.
    pub bracket: (f64, f64),
}

impl Default for McLowerBoundOptions {
    fn default() -> Self {
        McLowerBoundOptions {
            n_terms: 4000,
            tol: 1e-4,
            bracket: (0.1, 0.6),
        }
    }
}

#[derive(Clone, Debug)]
pub struct McLowerBound {
    pub n0: usize,
    pub p_lo: f64,
    pub p_hi: f64,
    /// False when the classifier was non-monotone across probes; the interval
    /// is then the hull of the disagreeing region rather than a tight bracket.
    pub consistent: bool,
}

impl McLowerBound {
    pub fn mid(&self) -> f64 {
        0.5 * (self.p_lo + self.p_hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.p_hi - self.p_lo)
    }
}

/// Extended-range float m * 2^e with m in [1, 2) or zero; keeps the
/// convolution out of f64 under/overflow without log-sum-exp per term.
#[derive(Clone, Copy, Debug)]
struct Scaled {
    m: f64,
    e: i64,
}

impl Scaled {
    const ZERO: Scaled = Scaled { m: 0.0, e: 0 };

    fn from_f64(x: f64) -> Scaled {
        if x == 0.0 {
            return Scaled::ZERO;
        }
        assert!(x > 0.0 && x.is_finite());
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        assert!(raw_exp != 0, "subnormal seed");
        let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
        Scaled { m, e: raw_exp - 1023 }
    }

    fn ln(&self) -> f64 {
        debug_assert!(self.m > 0.0);
        self.m.ln() + self.e as f64 * std::f64::consts::LN_2
    }
}

fn exp2i(d: i64) -> f64 {
    if d < -1000 {
        0.0
    } else if (-1022..=1023).contains(&d) {
        f64::from_bits(((1023 + d) as u64) << 52)
    } else {
        f64::INFINITY
    }
}

/// Least-squares slope of ln a_n over the last half of the sequence.
/// Negative slope means the terms decay, i.e. radius of convergence > 1.
fn tail_slope(seq: &[Scaled]) -> f64 {
    let n = seq.len() - 1;
    let lo = (n / 2).max(1);
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut count = 0.0;
    for i in lo..=n {
        sx += i as f64;
        sy += seq[i].ln();
        count += 1.0;
    }
    let (mx, my) = (sx / count, sy / count);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in lo..=n {
        let dx = i as f64 - mx;
        num += dx * (seq[i].ln() - my);
        den += dx * dx;
    }
    num / den
}

/// Run the recurrence numerically at fixed p and classify by tail slope.
fn recurrence_slope(provider: &dyn ThetaProvider, n0: usize, p: f64, n_terms: usize) -> f64 {
    let mut seq = Vec::with_capacity(n_terms + 1);
    seq.push(Scaled::ZERO);
    for n in 1..=n0 {
        seq.push(Scaled::from_f64(provider.theta(n, p).max(0.0).min(1.0)));
    }
    for n in n0 + 1..=n_terms {
        let mut e_max = i64::MIN;
        for k in 1..n {
            let (a, b) = (seq[k], seq[n - k]);
            if a.m != 0.0 && b.m != 0.0 {
                e_max = e_max.max(a.e + b.e);
            }
        }
        if e_max == i64::MIN {
            seq.push(Scaled::ZERO);
            continue;
        }
        let mut sum = 0.0;
        for k in 1..n {
            let (a, b) = (seq[k], seq[n - k]);
            if a.m == 0.0 || b.m == 0.0 {
                continue;
            }
            let d = a.e + b.e - e_max;
            if d >= -200 {
                sum += a.m * b.m * exp2i(d);
            }
        }
        let v = Scaled::from_f64(sum * p);
        seq.push(Scaled { m: v.m, e: v.e + e_max });
    }
    tail_slope(&seq)
}

/// Bisection over p of the radius classifier; p_hat is the estimated
/// sup{p : rad(a_n(p)) > 1}. Noisy, non-monotone classifications widen the
/// reported interval instead of being hidden.
pub fn lower_bound_mc(
    provider: &dyn ThetaProvider,
    n0: usize,
    opts: &McLowerBoundOptions,
) -> Result<McLowerBound> {
    if n0 == 0 || n0 > provider.max_n() {
        return Err(Error::Infeasible(format!(
            "n0 = {n0} outside provider range 1..={}",
            provider.max_n()
        )));
    }
    if n0 >= opts.n_terms / 2 {
        return Err(Error::Infeasible(
            "n_terms too small for the tail-slope window".into(),
        ));
    }
    let classify = |p: f64| recurrence_slope(provider, n0, p, opts.n_terms);

    let (mut lo, mut hi) = opts.bracket;
    let mut s_lo = classify(lo);
    let mut probes = vec![(lo, s_lo)];
    while s_lo >= 0.0 && lo > 1e-3 {
        lo *= 0.5;
        s_lo = classify(lo);
        probes.push((lo, s_lo));
    }
    if s_lo >= 0.0 {
        return Err(Error::Infeasible(
            "classifier found no subcritical p in the bracket".into(),
        ));
    }
    let mut s_hi = classify(hi);
    probes.push((hi, s_hi));
    while s_hi < 0.0 && hi < 0.99 {
        hi = (hi + 0.12).min(0.99);
        s_hi = classify(hi);
        probes.push((hi, s_hi));
    }
    if s_hi < 0.0 {
        return Err(Error::Infeasible(
            "classifier found no supercritical p in the bracket".into(),
        ));
    }

    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        let s = classify(mid);
        probes.push((mid, s));
        if s < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // consistency audit over everything we evaluated
    let p_minus = probes
        .iter()
        .filter(|&&(_, s)| s < 0.0)
        .map(|&(p, _)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    let p_plus = probes
        .iter()
        .filter(|&&(_, s)| s >= 0.0)
        .map(|&(p, _)| p)
        .fold(f64::INFINITY, f64::min);
    if p_minus <= p_plus {
        Ok(McLowerBound {
            n0,
            p_lo: p_minus,
            p_hi: p_plus,
            consistent: true,
        })
    } else {
        Ok(McLowerBound {
            n0,
            p_lo: p_plus,
            p_hi: p_minus,
            consistent: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn catalan_first_values_and_bound() {
        let c = catalan_numbers(30);
        let expect = [1i64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(c[k], BigInt::from(*e));
        }
        // closed form C_n = binom(2n, n)/(n+1)
        for n in 0..=12usize {
            let mut binom = BigInt::from(1);
            for i in 0..n {
                binom = binom * BigInt::from(2 * n - i) / BigInt::from(i + 1);
            }
            assert_eq!(c[n], binom / BigInt::from(n + 1));
        }
        // convolution C_n = sum C_k C_{n-1-k}
        for n in 1..=30usize {
            let conv: BigInt = (0..n).map(|k| &c[k] * &c[n - 1 - k]).sum();
            assert_eq!(conv, c[n]);
        }
        for (n, cn) in c.iter().enumerate() {
            assert!(cn <= &BigInt::from(4u8).pow(n as u32));
        }
    }

    #[test]
    fn a_sequence_cutoff_one_is_catalan() {
        let seq = a_sequence(1, 10).unwrap();
        let c = catalan_numbers(9);
        for n in 1..=10 {
            let expect = RationalPoly::monomial(
                BigRational::from_integer(c[n - 1].clone()),
                n - 1,
            );
            assert_eq!(seq.a(n), &expect, "a_{n}");
        }
    }

    #[test]
    fn a_sequence_cutoff_two_equals_cutoff_one() {
        let s1 = a_sequence(1, 9).unwrap();
        let s2 = a_sequence(2, 9).unwrap();
        for n in 1..=9 {
            assert_eq!(s1.a(n), s2.a(n));
        }
    }

    #[test]
    fn a_sequence_cutoff_three_step() {
        let seq = a_sequence(3, 4).unwrap();
        assert_eq!(seq.a(4), &RationalPoly::from_integers(&[0, 0, 0, 5, -2]));
    }

    #[test]
    fn domination_over_exact_theta() {
        // a_n^(3)(p) >= theta_n(p) exactly on the grid p = k/20
        let seq = a_sequence(3, 7).unwrap();
        for n in 1..=7usize {
            let theta = exact_theta_poly(n).unwrap();
            for k in 1..=19i64 {
                let p = rat(k, 20);
                assert!(
                    seq.a(n).eval(&p) >= theta.eval(&p),
                    "domination fails at n={n}, p={k}/20"
                );
            }
        }
    }

    #[test]
    fn cutoff_monotonicity() {
        let seqs: Vec<ASequence> = (1..=5).map(|n0| a_sequence(n0, 7).unwrap()).collect();
        for w in seqs.windows(2) {
            for n in 1..=7usize {
                for k in 0..=20i64 {
                    let p = rat(k, 20);
                    assert!(
                        w[1].a(n).eval(&p) <= w[0].a(n).eval(&p),
                        "a^({})_{n} > a^({})_{n} at p={k}/20",
                        w[1].n0,
                        w[0].n0
                    );
                }
            }
        }
    }

    #[test]
    fn discriminant_small_cutoffs() {
        let d1 = discriminant(1).unwrap();
        assert_eq!(
            d1.delta.x_coeffs,
            vec![RationalPoly::one(), RationalPoly::from_integers(&[0, -4])]
        );
        // n0 = 2 gives the same radius function as n0 = 1
        let d2 = discriminant(2).unwrap();
        assert_eq!(d2.delta.x_coeffs[..2], d1.delta.x_coeffs[..]);
        assert!(d2.delta.x_coeffs.get(2).is_none_or(|c| c.is_zero()));
    }

    #[test]
    fn discriminant_cutoff_three_matches_paper() {
        // Delta(p, x) = 1 - 4 p x + 4 p^4 x^3
        let d3 = discriminant(3).unwrap();
        assert_eq!(
            d3.delta.x_coeffs,
            vec![
                RationalPoly::one(),
                RationalPoly::from_integers(&[0, -4]),
                RationalPoly::zero(),
                RationalPoly::from_integers(&[0, 0, 0, 0, 4]),
            ]
        );
    }

    /// Independent route to the generating function: solve the quadratic by
    /// an exact power-series square root of Delta instead of the recurrence.
    fn gf_via_quadratic(n0: usize, order: usize) -> Vec<RationalPoly> {
        let disc = discriminant(n0).unwrap().delta;
        let mut d = vec![RationalPoly::zero(); order + 1];
        for (k, c) in disc.x_coeffs.iter().enumerate() {
            if k <= order {
                d[k] = c.clone();
            }
        }
        // S = sqrt(D) as a series in x: 2 s_n = d_n - sum_{k=1}^{n-1} s_k s_{n-k}
        let mut s = vec![RationalPoly::zero(); order + 1];
        s[0] = RationalPoly::one();
        let half = RationalPoly::constant(rat(1, 2));
        for n in 1..=order {
            let mut acc = d[n].clone();
            for k in 1..n {
                acc = acc.sub(&s[k].mul(&s[n - k]));
            }
            s[n] = half.mul(&acc);
        }
        // X = (1 - S) / (2p)
        let two_p = RationalPoly::from_integers(&[0, 2]);
        let mut x = vec![RationalPoly::zero(); order + 1];
        for n in 1..=order {
            x[n] = s[n].neg().div_exact(&two_p);
        }
        x
    }

    #[test]
    fn generating_function_identity_two_routes() {
        let order = 12;
        let seq = a_sequence(3, order).unwrap();
        let gf = gf_via_quadratic(3, order);
        for n in 1..=order {
            assert_eq!(seq.a(n), &gf[n], "series mismatch at x^{n}");
        }
    }

    #[test]
    fn radius_pure_catalan_quarter() {
        // Delta = 1 - x at p = 1/4: radius exactly 1
        let r = radius(1, &rat(1, 4), &rat(1, 1 << 40)).unwrap();
        match r {
            Radius::Finite(iv) => {
                assert_eq!(iv.lo, BigRational::one());
                assert_eq!(iv.hi, BigRational::one());
            }
            Radius::Infinite => panic!("expected finite radius"),
        }
    }

    #[test]
    fn radius_diverges_for_small_p() {
        let r = radius(3, &rat(1, 1000), &rat(1, 1 << 20)).unwrap();
        match r {
            Radius::Finite(iv) => {
                assert!(iv.mid_f64() > 100.0, "radius {} too small", iv.mid_f64());
            }
            Radius::Infinite => {}
        }
    }

    #[test]
    fn radius_nonincreasing_in_p() {
        let prec = rat(1, 1 << 30);
        let mut last = f64::INFINITY;
        for k in 1..=9i64 {
            let r = radius(3, &rat(k, 10), &prec).unwrap();
            let mid = match r {
                Radius::Finite(iv) => iv.mid_f64(),
                Radius::Infinite => f64::INFINITY,
            };
            assert!(mid <= last + 1e-9, "radius increased at p = {k}/10");
            last = mid;
        }
    }

    #[test]
    fn radius_is_one_at_the_bound() {
        // at the smallest root of 4p^4 - 4p + 1, Delta(p, 1) = 0
        let bound = lower_bound_pm(3, &rat(1, 1 << 40)).unwrap();
        let prec = rat(1, 1 << 30);
        for p in [bound.lo.clone(), bound.hi.clone()] {
            match radius(3, &p, &prec).unwrap() {
                Radius::Finite(iv) => {
                    let lo = crate::poly::rational_to_f64(&iv.lo);
                    let hi = crate::poly::rational_to_f64(&iv.hi);
                    assert!(lo < 1.0 + 1e-4 && hi > 1.0 - 1e-4, "[{lo}, {hi}]");
                }
                Radius::Infinite => panic!("expected finite radius"),
            }
        }
    }

    #[test]
    fn lower_bound_exact_cutoffs() {
        let prec = rat(1, 1_000_000);
        let b1 = lower_bound_pm(1, &prec).unwrap();
        assert_eq!(b1.lo, rat(1, 4));
        assert_eq!(b1.hi, rat(1, 4));
        let b2 = lower_bound_pm(2, &prec).unwrap();
        assert_eq!(b2.lo, rat(1, 4));
        assert_eq!(b2.hi, rat(1, 4));
        let b3 = lower_bound_pm(3, &prec).unwrap();
        let lo = b3.lo.to_f64().unwrap();
        let hi = b3.hi.to_f64().unwrap();
        assert!(lo > 0.254 && hi < 0.2549, "p_3 in [{lo}, {hi}]");
        assert!(b3.width() <= prec);
        // the enclosed root really is a root of 4p^4 - 4p + 1
        let poly = RationalPoly::from_integers(&[1, -4, 0, 0, 4]);
        assert!(poly.eval(&b3.lo).is_positive());
        assert!(!poly.eval(&b3.hi).is_positive());
    }

    #[test]
    fn mc_bound_pure_catalan() {
        let provider = ExactThetaProvider::new(1).unwrap();
        let opts = McLowerBoundOptions {
            n_terms: 2000,
            ..Default::default()
        };
        let b = lower_bound_mc(&provider, 1, &opts).unwrap();
        assert!(b.consistent);
        assert!(
            (b.mid() - 0.25).abs() < 1e-3,
            "expected 0.25, got [{}, {}]",
            b.p_lo,
            b.p_hi
        );
    }

    #[test]
    fn mc_bound_matches_exact_pipeline_at_cutoff_three() {
        let provider = ExactThetaProvider::new(3).unwrap();
        let opts = McLowerBoundOptions {
            n_terms: 2000,
            ..Default::default()
        };
        let b = lower_bound_mc(&provider, 3, &opts).unwrap();
        let exact = lower_bound_pm(3, &rat(1, 1 << 30)).unwrap();
        let target = exact.mid_f64();
        assert!(
            (b.mid() - target).abs() < 2e-3,
            "mc [{}, {}] vs exact {target}",
            b.p_lo,
            b.p_hi
        );
    }

    #[test]
    fn theta_table_interpolates() {
        let rows: Vec<(usize, f64, f64)> = vec![
            (2, 0.0, 0.0),
            (2, 1.0, 1.0),
            (3, 0.0, 0.0),
            (3, 0.5, 0.375),
            (3, 1.0, 1.0),
        ];
        let t = ThetaTable::from_rows(3, &rows).unwrap();
        assert_eq!(t.theta(1, 0.3), 1.0); // defaulted
        assert!((t.theta(2, 0.25) - 0.25).abs() < 1e-12);
        assert!((t.theta(3, 0.25) - 0.1875).abs() < 1e-12);
        assert_eq!(t.theta(3, 2.0), 1.0); // clamped
    }
}
