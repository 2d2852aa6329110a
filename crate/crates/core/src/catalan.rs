//! Catalan percolation on a finite window [0, n].
//!
//! Edges {i, j} with j - i >= 2 carry i.i.d. uniform labels; the edge is open
//! at parameter p iff its label is <= p (ties open). Nearest-neighbour edges
//! are occupied from the start, and an open edge becomes occupied once some
//! mediator k in (i, j) splits it into two occupied sub-edges. Occupation of
//! {0, n} only ever consults edges inside [0, n], so the window is exact.

use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::poly::RationalPoly;
use crate::rng::{self, DOMAIN_FIELD};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

/// Mediator admissibility: the full dynamics, or the truncated dynamics that
/// only allows mediators within distance L of one endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationRule {
    Full,
    Truncated(usize),
}

impl TruncationRule {
    pub fn truncated(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::Infeasible("truncation length must be positive".into()));
        }
        Ok(TruncationRule::Truncated(l))
    }
}

#[inline]
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j <= n);
    i * n - (i * i - i) / 2 + (j - i - 1)
}

/// The i.i.d. uniform labels u_{i,j} realizing the standard monotone coupling
/// on the window [0, n]. Labels exist exactly for pairs with j - i >= 2.
#[derive(Clone)]
pub struct CouplingField {
    n: usize,
    seed: u64,
    labels: Vec<f64>,
}

impl CouplingField {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The label of edge {i, j}; requires j - i >= 2.
    #[inline]
    pub fn label(&self, i: usize, j: usize) -> f64 {
        assert!(j >= i + 2 && j <= self.n, "no label for edge ({i},{j})");
        self.labels[pair_index(self.n, i, j)]
    }

    /// A copy with the single label u_{i,j} replaced.
    pub fn with_label(&self, i: usize, j: usize, value: f64) -> CouplingField {
        let mut f = self.clone();
        f.labels[pair_index(self.n, i, j)] = value;
        f
    }
}

/// Deterministic field for (n, seed); labels are i.i.d. uniform across pairs.
pub fn sample_field(n: usize, seed: u64) -> Result<CouplingField> {
    if n < 2 {
        return Err(Error::InvalidWindow { n, min: 2 });
    }
    let mut labels = vec![f64::NAN; n * (n + 1) / 2];
    let mut rng = rng::stream(&[DOMAIN_FIELD, seed, n as u64]);
    for i in 0..=n - 2 {
        for j in i + 2..=n {
            labels[pair_index(n, i, j)] = rng::unit_f64(&mut rng);
        }
    }
    Ok(CouplingField { n, seed, labels })
}

/// Occupied edges for one (field, p, rule) evaluation. Nearest-neighbour
/// edges are always occupied.
pub struct OccupationTable {
    n: usize,
    rows: Vec<BitRow>,
}

impl OccupationTable {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < j && j <= self.n);
        self.rows[i].get(j)
    }

    pub fn occupied_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.rows[i].iter_ones().map(move |j| (i, j)))
    }
}

/// Occupation closure for an arbitrary openness predicate over long edges.
/// One pass in increasing edge length reaches the fixed point, because a
/// mediator split only consults strictly shorter edges.
pub fn occupy_with(
    n: usize,
    rule: TruncationRule,
    open: impl Fn(usize, usize) -> bool,
) -> OccupationTable {
    let mut rows: Vec<BitRow> = (0..=n).map(|_| BitRow::new(n + 1)).collect();
    let mut cols: Vec<BitRow> = (0..=n).map(|_| BitRow::new(n + 1)).collect();
    for i in 0..n {
        rows[i].set(i + 1);
        cols[i + 1].set(i);
    }
    for d in 2..=n {
        for i in 0..=n - d {
            let j = i + d;
            if !open(i, j) {
                continue;
            }
            // row i holds occ(i, k) over k, column j holds occ(k, j) over k;
            // their intersection is exactly the set of usable mediators
            let found = match rule {
                TruncationRule::Full => rows[i].intersects(&cols[j]),
                TruncationRule::Truncated(l) => {
                    let near_i_hi = (i + l).min(j - 1);
                    let near_j_lo = j.saturating_sub(l).max(i + 1);
                    rows[i].intersects_in_range(&cols[j], i + 1, near_i_hi)
                        || rows[i].intersects_in_range(&cols[j], near_j_lo, j - 1)
                }
            };
            if found {
                rows[i].set(j);
                cols[j].set(i);
            }
        }
    }
    OccupationTable { n, rows }
}

/// Occupied edges of the field at parameter p (ties u = p count as open).
pub fn occupy(field: &CouplingField, p: f64, rule: TruncationRule) -> Result<OccupationTable> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    Ok(occupy_with(field.n, rule, |i, j| field.label(i, j) <= p))
}

/// Exact occupation thresholds: t(i, j) is the minimal p at which {i, j} is
/// occupied on this field, so occupation at p holds iff p >= t(i, j).
pub struct ThresholdTable {
    n: usize,
    pub rule: TruncationRule,
    pub conditioned: bool,
    t: Vec<f64>,
}

impl ThresholdTable {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn t(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < j && j <= self.n);
        self.t[i * (self.n + 1) + j]
    }

    /// t(0, n): the realized p-tilde of this field under the table's rule.
    pub fn top(&self) -> f64 {
        self.t(0, self.n)
    }
}

/// Min-max threshold recursion: t(i,i+1) = 0 and, for j - i >= 2,
/// t(i,j) = max(u_{i,j}, min over admissible k of max(t(i,k), t(k,j))).
/// With `conditioned`, the top edge's own label alone is replaced by 0,
/// which realizes "given {0,n} is open".
pub fn threshold_table(
    field: &CouplingField,
    rule: TruncationRule,
    conditioned: bool,
) -> ThresholdTable {
    let n = field.n;
    let w = n + 1;
    let mut t = vec![0.0f64; w * w];
    let mut tc = vec![0.0f64; w * w]; // tc[j*w + k] = t(k, j)
    for d in 2..=n {
        for i in 0..=n - d {
            let j = i + d;
            let u = if conditioned && i == 0 && j == n {
                0.0
            } else {
                field.label(i, j)
            };
            let best = match rule {
                TruncationRule::Full => {
                    let row = &t[i * w + i + 1..i * w + j];
                    let col = &tc[j * w + i + 1..j * w + j];
                    let mut m = f64::INFINITY;
                    for (a, b) in row.iter().zip(col) {
                        let hi = if a > b { *a } else { *b };
                        if hi < m {
                            m = hi;
                        }
                    }
                    m
                }
                TruncationRule::Truncated(l) => {
                    let mut m = f64::INFINITY;
                    let near_i_hi = (i + l).min(j - 1);
                    for k in i + 1..=near_i_hi {
                        m = m.min(t[i * w + k].max(tc[j * w + k]));
                    }
                    let near_j_lo = j.saturating_sub(l).max(i + 1);
                    for k in near_j_lo..=j - 1 {
                        m = m.min(t[i * w + k].max(tc[j * w + k]));
                    }
                    m
                }
            };
            let v = u.max(best);
            t[i * w + j] = v;
            tc[j * w + i] = v;
        }
    }
    ThresholdTable {
        n,
        rule,
        conditioned,
        t,
    }
}

// ---------------------------------------------------------------------------
// Exact small-n probabilities by enumeration over open-edge subsets.
// ---------------------------------------------------------------------------

/// Largest n for which exact_theta_poly enumerates all configurations.
pub const N_ENUM_MAX: usize = 8;
/// Largest order supported by exact_theta_coeffs.
pub const COEFF_K_MAX: usize = 8;
const SUBSET_BUDGET: u64 = 1 << 28;

/// Static mediator tables for the per-subset occupation check. Candidate
/// edges (j - i >= 2) are ordered by increasing length, so the top edge
/// {0, n} is always the last bit.
struct CertTables {
    m: usize,
    meds: Vec<Vec<(u32, u32)>>, // per edge: (a, b) with 0 = nearest-neighbour, else bit+1
}

fn cert_tables(n: usize) -> CertTables {
    let mut bit = vec![usize::MAX; (n + 1) * (n + 1)];
    let mut pairs = Vec::new();
    for d in 2..=n {
        for i in 0..=n - d {
            bit[i * (n + 1) + i + d] = pairs.len();
            pairs.push((i, i + d));
        }
    }
    let meds = pairs
        .iter()
        .map(|&(i, j)| {
            (i + 1..j)
                .map(|k| {
                    let a = if k == i + 1 { 0 } else { bit[i * (n + 1) + k] as u32 + 1 };
                    let b = if j == k + 1 { 0 } else { bit[k * (n + 1) + j] as u32 + 1 };
                    (a, b)
                })
                .collect()
        })
        .collect();
    CertTables { m: pairs.len(), meds }
}

/// Whether {0, n} is occupied when exactly the edges in `mask` are open.
fn occupied_top(tables: &CertTables, mask: u64) -> bool {
    let mut occ: u64 = 0;
    for (idx, meds) in tables.meds.iter().enumerate() {
        if mask & (1u64 << idx) == 0 {
            continue;
        }
        for &(a, b) in meds {
            if (a == 0 || occ & (1u64 << (a - 1)) != 0)
                && (b == 0 || occ & (1u64 << (b - 1)) != 0)
            {
                occ |= 1u64 << idx;
                break;
            }
        }
    }
    occ & (1u64 << (tables.m - 1)) != 0
}

/// Exact theta_n(p) = P({0,n} occupied) as a polynomial with integer
/// coefficients, by enumerating open-edge subsets that contain the top edge.
pub fn exact_theta_poly(n: usize) -> Result<RationalPoly> {
    if n == 0 {
        return Err(Error::InvalidWindow { n, min: 1 });
    }
    if n == 1 {
        return Ok(RationalPoly::one());
    }
    if n > N_ENUM_MAX {
        return Err(Error::OutOfExactRange { n, max: N_ENUM_MAX });
    }
    let tables = cert_tables(n);
    let m_edges = tables.m;
    debug_assert_eq!(m_edges, n * (n - 1) / 2);
    let top = 1u64 << (m_edges - 1);
    let sub_count = 1u64 << (m_edges - 1);

    let counts = crate::par::map_reduce_ranges(
        sub_count,
        1 << 16,
        || vec![0u64; m_edges + 1],
        |acc, range| {
            for sub in range {
                let mask = sub | top;
                if occupied_top(&tables, mask) {
                    acc[mask.count_ones() as usize] += 1;
                }
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        },
    );
    Ok(counts_to_poly(&counts, m_edges))
}

/// Sum over sizes of c_size * p^size * (1-p)^(m-size), expanded exactly.
fn counts_to_poly(counts: &[u64], m: usize) -> RationalPoly {
    // Pascal triangle up to m
    let mut binom = vec![vec![BigInt::from(0); m + 1]; m + 1];
    for r in 0..=m {
        binom[r][0] = BigInt::from(1);
        for c in 1..=r {
            let upper = if c < r {
                binom[r - 1][c].clone()
            } else {
                BigInt::from(0)
            };
            binom[r][c] = &binom[r - 1][c - 1] + upper;
        }
    }
    let mut coeffs = vec![BigInt::from(0); m + 1];
    for (size, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let c = BigInt::from(c);
        // p^size (1-p)^(m-size) = sum_t (-1)^t binom(m-size, t) p^(size+t)
        for t in 0..=m - size {
            let term = &c * &binom[m - size][t];
            if t % 2 == 0 {
                coeffs[size + t] += term;
            } else {
                coeffs[size + t] -= term;
            }
        }
    }
    RationalPoly::from_coeffs(
        coeffs
            .into_iter()
            .map(BigRational::from_integer)
            .collect(),
    )
}

/// First k_max + 1 power-series coefficients of theta_n, via enumeration over
/// open subsets of size <= k_max only: a subset of size s contributes nothing
/// below order p^s, so the low coefficients are unaffected by larger subsets.
pub fn exact_theta_coeffs(n: usize, k_max: usize) -> Result<Vec<BigRational>> {
    if n == 0 {
        return Err(Error::InvalidWindow { n, min: 1 });
    }
    if k_max > COEFF_K_MAX {
        return Err(Error::Infeasible(format!(
            "k_max = {k_max} exceeds the supported order {COEFF_K_MAX}"
        )));
    }
    let mut out = vec![BigRational::zero(); k_max + 1];
    if n == 1 {
        out[0] = BigRational::one();
        return Ok(out);
    }
    // theta_n has lowest order p^(n-1): a certificate tree for {0,n} has
    // n - 1 internal nodes, i.e. n - 1 open edges
    if n - 1 > k_max {
        return Ok(out);
    }
    if n <= N_ENUM_MAX {
        let poly = exact_theta_poly(n)?;
        for (k, c) in out.iter_mut().enumerate() {
            *c = poly.coeff(k);
        }
        return Ok(out);
    }

    let m_edges = n * (n - 1) / 2;
    if m_edges > 64 {
        return Err(Error::Infeasible(format!(
            "n = {n}: too many candidate edges for subset enumeration"
        )));
    }
    let mut budget = 0u64;
    for size in n - 1..=k_max {
        budget = budget.saturating_add(binom_u64(m_edges - 1, size - 1));
    }
    if budget > SUBSET_BUDGET {
        return Err(Error::Infeasible(format!(
            "(n, k_max) = ({n}, {k_max}) needs {budget} configurations"
        )));
    }

    let tables = cert_tables(n);
    let top = 1u64 << (m_edges - 1);
    let mut counts = vec![0u64; k_max + 1];
    for size in n - 1..=k_max {
        let mut hits = 0u64;
        for_each_combination(m_edges - 1, size - 1, |bits| {
            let mask = bits | top;
            if occupied_top(&tables, mask) {
                hits += 1;
            }
        });
        counts[size] = hits;
    }

    // [p^j] theta_n = sum_{s <= j} c_s (-1)^(j-s) binom(m-s, j-s)
    let mut binom = vec![vec![BigInt::from(0); k_max + 1]; m_edges + 1];
    for (r, row) in binom.iter_mut().enumerate() {
        row[0] = BigInt::from(1);
        for c in 1..=k_max {
            row[c] = if c > r {
                BigInt::from(0)
            } else {
                num_binom_big(r, c)
            };
        }
    }
    for j in 0..=k_max {
        let mut acc = BigInt::from(0);
        for (s, &c) in counts.iter().enumerate().take(j + 1) {
            if c == 0 {
                continue;
            }
            let term = BigInt::from(c) * &binom[m_edges - s][j - s];
            if (j - s) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        out[j] = BigRational::from_integer(acc);
    }
    Ok(out)
}

fn binom_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(u64::MAX as u128) as u64
}

fn num_binom_big(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::from(1);
    let k = k.min(n - k);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Visit every k-subset of {0..n_bits} as a bitmask, in lexicographic order.
fn for_each_combination(n_bits: usize, k: usize, mut f: impl FnMut(u64)) {
    if k == 0 {
        f(0);
        return;
    }
    if k > n_bits {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut mask = 0u64;
        for &i in &idx {
            mask |= 1u64 << i;
        }
        f(mask);
        // advance
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] != n_bits - k + pos {
                break;
            }
        }
        if idx[pos] == n_bits - k + pos {
            return;
        }
        idx[pos] += 1;
        for t in pos + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    /// Brute-force certificate search straight from the binary-tree picture:
    /// {i,j} is occupiable iff it is open and splits at some mediator into two
    /// occupiable edges. No tables, no length induction.
    fn occupied_brute(open: &dyn Fn(usize, usize) -> bool, i: usize, j: usize) -> bool {
        if j == i + 1 {
            return true;
        }
        if !open(i, j) {
            return false;
        }
        (i + 1..j).any(|k| occupied_brute(open, i, k) && occupied_brute(open, k, j))
    }

    fn field_open(field: &CouplingField, p: f64) -> impl Fn(usize, usize) -> bool + '_ {
        move |i, j| field.label(i, j) <= p
    }

    #[test]
    fn sample_field_rejects_tiny_window() {
        assert!(matches!(
            sample_field(1, 0),
            Err(Error::InvalidWindow { .. })
        ));
    }

    #[test]
    fn field_n2_has_single_label() {
        let f = sample_field(2, 42).unwrap();
        let u = f.label(0, 2);
        assert!((0.0..1.0).contains(&u));
        assert_eq!(f.labels.iter().filter(|v| !v.is_nan()).count(), 1);
    }

    #[test]
    fn field_is_deterministic() {
        let a = sample_field(5, 7).unwrap();
        let b = sample_field(5, 7).unwrap();
        for i in 0..=3 {
            for j in i + 2..=5 {
                assert_eq!(a.label(i, j), b.label(i, j));
            }
        }
    }

    #[test]
    fn distinct_seeds_give_distinct_fields() {
        for s in 0..100u64 {
            let a = sample_field(5, 2 * s).unwrap();
            let b = sample_field(5, 2 * s + 1).unwrap();
            let differs = (0..=3).any(|i| (i + 2..=5).any(|j| a.label(i, j) != b.label(i, j)));
            assert!(differs, "seeds {} and {} collide", 2 * s, 2 * s + 1);
        }
    }

    #[test]
    fn occupy_extremes() {
        let f = sample_field(7, 3).unwrap();
        let all = occupy(&f, 1.0, TruncationRule::Full).unwrap();
        let none = occupy(&f, 0.0, TruncationRule::Full).unwrap();
        for i in 0..7 {
            for j in i + 1..=7 {
                assert!(all.is_occupied(i, j));
                assert_eq!(none.is_occupied(i, j), j == i + 1);
            }
        }
    }

    #[test]
    fn occupy_hand_example() {
        // n=3 with u02=0.3, u13=0.9, u03=0.4 at p=0.5: {0,3} occupied via k=2
        let f = sample_field(3, 0)
            .unwrap()
            .with_label(0, 2, 0.3)
            .with_label(1, 3, 0.9)
            .with_label(0, 3, 0.4);
        let occ = occupy(&f, 0.5, TruncationRule::Full).unwrap();
        assert!(occ.is_occupied(0, 2));
        assert!(!occ.is_occupied(1, 3));
        assert!(occ.is_occupied(0, 3));
    }

    #[test]
    fn occupy_matches_brute_force() {
        for seed in 0..40u64 {
            let n = 4 + (seed % 5) as usize;
            let f = sample_field(n, seed).unwrap();
            for &p in &[0.2, 0.5, 0.8] {
                let fast = occupy(&f, p, TruncationRule::Full).unwrap();
                let open = field_open(&f, p);
                for i in 0..n {
                    for j in i + 2..=n {
                        assert_eq!(
                            fast.is_occupied(i, j),
                            occupied_brute(&open, i, j),
                            "mismatch at ({i},{j}) seed {seed} p {p}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn monotone_coupling_in_p() {
        for seed in 0..20u64 {
            let f = sample_field(12, seed).unwrap();
            let lo = occupy(&f, 0.35, TruncationRule::Full).unwrap();
            let hi = occupy(&f, 0.55, TruncationRule::Full).unwrap();
            for i in 0..12 {
                for j in i + 1..=12 {
                    assert!(!lo.is_occupied(i, j) || hi.is_occupied(i, j));
                }
            }
        }
    }

    #[test]
    fn truncation_monotone_in_l() {
        for seed in 0..20u64 {
            let f = sample_field(15, seed).unwrap();
            let p = 0.6;
            let t2 = occupy(&f, p, TruncationRule::Truncated(2)).unwrap();
            let t5 = occupy(&f, p, TruncationRule::Truncated(5)).unwrap();
            let full = occupy(&f, p, TruncationRule::Full).unwrap();
            for i in 0..15 {
                for j in i + 1..=15 {
                    assert!(!t2.is_occupied(i, j) || t5.is_occupied(i, j));
                    assert!(!t5.is_occupied(i, j) || full.is_occupied(i, j));
                }
            }
        }
    }

    #[test]
    fn threshold_all_zero_labels() {
        let mut f = sample_field(5, 1).unwrap();
        for i in 0..=3 {
            for j in i + 2..=5 {
                f = f.with_label(i, j, 0.0);
            }
        }
        let t = threshold_table(&f, TruncationRule::Full, false);
        for i in 0..5 {
            for j in i + 1..=5 {
                assert_eq!(t.t(i, j), 0.0);
            }
        }
    }

    #[test]
    fn threshold_hand_example() {
        let f = sample_field(3, 0)
            .unwrap()
            .with_label(0, 2, 0.3)
            .with_label(1, 3, 0.6)
            .with_label(0, 3, 0.5);
        let t = threshold_table(&f, TruncationRule::Full, false);
        assert_eq!(t.t(0, 2), 0.3);
        assert_eq!(t.t(1, 3), 0.6);
        assert_eq!(t.top(), 0.5);
    }

    /// Independent oracle: binary search over occupy for the minimal p
    /// marking (0, n) occupied, to the stated resolution.
    fn threshold_by_bisection(field: &CouplingField, rule: TruncationRule) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..34 {
            let mid = 0.5 * (lo + hi);
            let occ = occupy(field, mid, rule).unwrap();
            if occ.is_occupied(0, field.n()) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn threshold_matches_bisection() {
        for seed in 0..25u64 {
            let n = 6 + (seed % 10) as usize;
            let f = sample_field(n, seed).unwrap();
            for rule in [TruncationRule::Full, TruncationRule::Truncated(3)] {
                let t = threshold_table(&f, rule, false);
                let b = threshold_by_bisection(&f, rule);
                assert!(
                    (t.top() - b).abs() < 1e-9,
                    "seed {seed} rule {rule:?}: {} vs {b}",
                    t.top()
                );
            }
        }
    }

    #[test]
    fn truncated_thresholds_dominate_full() {
        for seed in 0..15u64 {
            let f = sample_field(14, seed).unwrap();
            let full = threshold_table(&f, TruncationRule::Full, false);
            let t1 = threshold_table(&f, TruncationRule::Truncated(1), false);
            let t4 = threshold_table(&f, TruncationRule::Truncated(4), false);
            for i in 0..14 {
                for j in i + 1..=14 {
                    assert!(t1.t(i, j) >= t4.t(i, j));
                    assert!(t4.t(i, j) >= full.t(i, j));
                }
            }
        }
    }

    #[test]
    fn conditioned_threshold_ignores_top_label() {
        let f = sample_field(3, 0)
            .unwrap()
            .with_label(0, 2, 0.3)
            .with_label(1, 3, 0.6)
            .with_label(0, 3, 0.99);
        let t = threshold_table(&f, TruncationRule::Full, true);
        // min over k of max: k=1 -> 0.6, k=2 -> 0.3
        assert_eq!(t.top(), 0.3);
        // other entries are untouched
        assert_eq!(t.t(0, 2), 0.3);
    }

    fn coeff_i64(p: &RationalPoly, k: usize) -> i64 {
        let c = p.coeff(k);
        assert!(c.is_integer(), "coefficient {k} not an integer: {c:?}");
        c.to_integer().to_i64().unwrap()
    }

    #[test]
    fn theta_1_is_one() {
        assert_eq!(exact_theta_poly(1).unwrap(), RationalPoly::one());
    }

    #[test]
    fn theta_2_is_p() {
        let t2 = exact_theta_poly(2).unwrap();
        assert_eq!(t2, RationalPoly::from_integers(&[0, 1]));
        let coeffs = exact_theta_coeffs(2, 4).unwrap();
        let expect = [0i64, 1, 0, 0, 0];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(coeffs[k], BigRational::from_integer(BigInt::from(*e)));
        }
    }

    #[test]
    fn theta_3_matches_paper() {
        let t3 = exact_theta_poly(3).unwrap();
        assert_eq!(t3, RationalPoly::from_integers(&[0, 0, 2, -1]));
        assert_eq!(t3.render("p"), "2*p^2 - p^3");
    }

    #[test]
    fn theta_4_lowest_term() {
        let t4 = exact_theta_poly(4).unwrap();
        assert_eq!(t4.lowest_degree(), Some(3));
        assert_eq!(coeff_i64(&t4, 3), 5);
    }

    #[test]
    fn theta_boundary_values() {
        for n in 2..=6 {
            let t = exact_theta_poly(n).unwrap();
            assert!(t.eval(&BigRational::zero()).is_zero(), "theta_{n}(0) != 0");
            assert!(t.eval(&BigRational::one()).is_one(), "theta_{n}(1) != 1");
        }
    }

    #[test]
    fn theta_coeffs_consistent_with_poly() {
        for n in 2..=6 {
            let poly = exact_theta_poly(n).unwrap();
            let coeffs = exact_theta_coeffs(n, 6).unwrap();
            for (k, c) in coeffs.iter().enumerate() {
                assert_eq!(*c, poly.coeff(k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn theta_9_low_coefficient_vanishes() {
        let coeffs = exact_theta_coeffs(9, 7).unwrap();
        for c in &coeffs {
            assert!(c.is_zero());
        }
    }

    #[test]
    fn theta_coeffs_infeasible_combination() {
        assert!(matches!(
            exact_theta_coeffs(3, 20),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn theta_matches_monte_carlo() {
        // crude sanity: exact theta_5(p) against occupy on random fields
        let p = 0.55;
        let exact = exact_theta_poly(5).unwrap().eval_f64(p);
        let reps = 4000;
        let mut hits = 0;
        for seed in 0..reps {
            let f = sample_field(5, seed).unwrap();
            if occupy(&f, p, TruncationRule::Full)
                .unwrap()
                .is_occupied(0, 5)
            {
                hits += 1;
            }
        }
        let est = hits as f64 / reps as f64;
        let sigma = (exact * (1.0 - exact) / reps as f64).sqrt();
        assert!(
            (est - exact).abs() < 5.0 * sigma,
            "theta_5({p}): est {est} vs exact {exact}"
        );
    }
}
