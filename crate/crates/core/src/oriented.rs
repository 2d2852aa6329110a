//! Classical and enhanced oriented percolation on a finite window.
//!
//! Sites (x, level) are open with probability p. Length-1 moves (right within
//! a level, up one level) are always traversable when the destination site is
//! open. On each even level 2m, all vertical length-2 edges ((x,2m),(x,2m+2))
//! open together with probability q; q = 0 is classical oriented site
//! percolation. Site and row-edge variables come from per-level substreams of
//! the lattice seed, so realizations with the same seed and different (p, q)
//! are coupled through shared uniforms.

use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::rng::{self, DOMAIN_DEFECTS, DOMAIN_LATTICE};
use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub x_lo: i64,
    pub x_hi: i64,
    pub level_max: u32,
}

impl Window {
    pub fn width(&self) -> usize {
        (self.x_hi - self.x_lo + 1) as usize
    }
}

/// How site rows are realized from the per-level streams.
///
/// `PerSite` spends one u64 per site, which makes realizations at the same
/// seed pathwise monotone in p (shared uniforms) and allows positional
/// access. `BitSliced` compares bit-planes against the threshold and is ~8x
/// cheaper in RNG draws; same law, different realization, full rows only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SamplerMode {
    #[default]
    PerSite,
    BitSliced,
}

#[derive(Clone)]
pub struct EnhancedLattice {
    pub p: f64,
    pub q: f64,
    window: Window,
    seed: u64,
    mode: SamplerMode,
    thr_site: u128,
    thr_row: u128,
    base: ChaCha8Rng,
}

impl EnhancedLattice {
    pub fn new(p: f64, q: f64, window: Window, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { name: "p", value: p });
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidProbability { name: "q", value: q });
        }
        if window.x_hi < window.x_lo {
            return Err(Error::Infeasible("empty window".into()));
        }
        Ok(EnhancedLattice {
            p,
            q,
            window,
            seed,
            mode: SamplerMode::PerSite,
            thr_site: rng::bernoulli_threshold(p),
            thr_row: rng::bernoulli_threshold(q),
            base: rng::stream(&[DOMAIN_LATTICE, seed]),
        })
    }

    pub fn with_mode(mut self, mode: SamplerMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn idx(&self, x: i64) -> usize {
        debug_assert!(x >= self.window.x_lo && x <= self.window.x_hi);
        (x - self.window.x_lo) as usize
    }

    #[inline]
    pub fn x_of(&self, idx: usize) -> i64 {
        self.window.x_lo + idx as i64
    }

    fn level_rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(stream);
        rng.set_word_pos(0);
        rng
    }

    /// Site openness for the whole window row at `level`. Pure in
    /// (seed, level): repeated calls return the same row.
    pub fn open_row(&self, level: u32) -> BitRow {
        assert!(level <= self.window.level_max, "level beyond window");
        let width = self.window.width();
        let mut row = BitRow::new(width);
        let mut rng = self.level_rng(2 * level as u64);
        match self.mode {
            SamplerMode::PerSite => {
                let words = row.words_mut();
                for (w, slot) in words.iter_mut().enumerate() {
                    let bits = (width - w * 64).min(64);
                    let mut acc = 0u64;
                    for b in 0..bits {
                        if rng::accept(rng.next_u64(), self.thr_site) {
                            acc |= 1 << b;
                        }
                    }
                    *slot = acc;
                }
            }
            SamplerMode::BitSliced => {
                for slot in row.words_mut() {
                    *slot = rng::bernoulli_word(&mut rng, self.thr_site);
                }
            }
        }
        row.mask_tail();
        row
    }

    /// Single-site openness; PerSite mode only (positional stream access).
    pub fn site_open(&self, x: i64, level: u32) -> bool {
        assert!(matches!(self.mode, SamplerMode::PerSite));
        assert!(level <= self.window.level_max, "level beyond window");
        let mut rng = self.level_rng(2 * level as u64);
        rng.set_word_pos(2 * (x - self.window.x_lo) as u128);
        rng::accept(rng.next_u64(), self.thr_site)
    }

    /// Whether the whole row of length-2 vertical edges out of the given even
    /// level is open. Shares nothing with the site streams, so q can vary
    /// while site fields stay fixed.
    pub fn row_edges_open(&self, even_level: u32) -> bool {
        debug_assert!(even_level % 2 == 0, "row edges live on even levels");
        let mut rng = self.level_rng(2 * even_level as u64 + 1);
        rng::accept(rng.next_u64(), self.thr_row)
    }
}

/// Reachable x-coordinates at the two most recent levels.
#[derive(Clone, Debug)]
pub struct ReachableFront {
    pub level: u32,
    prev: BitRow,
    cur: BitRow,
    pub truncated: bool,
}

impl ReachableFront {
    /// Closure of the start set at level 0. Start vertices count as reachable
    /// whether or not their sites are open (paths may begin at a closed
    /// vertex); rightward moves out of them require open destinations.
    pub fn start(lattice: &EnhancedLattice, xs: impl IntoIterator<Item = i64>) -> Self {
        let width = lattice.window.width();
        let mut sources = BitRow::new(width);
        for x in xs {
            assert!(
                x >= lattice.window.x_lo && x <= lattice.window.x_hi,
                "start point outside window"
            );
            sources.set(lattice.idx(x));
        }
        let open = lattice.open_row(0);
        let cur = BitRow::smear_right(&open, &sources);
        let truncated = cur.get(width - 1);
        ReachableFront {
            level: 0,
            prev: BitRow::new(width),
            cur,
            truncated,
        }
    }

    pub fn cur(&self) -> &BitRow {
        &self.cur
    }

    pub fn contains(&self, lattice: &EnhancedLattice, x: i64) -> bool {
        self.cur.get(lattice.idx(x))
    }

    pub fn max_x(&self, lattice: &EnhancedLattice) -> Option<i64> {
        self.cur.max_set().map(|i| lattice.x_of(i))
    }

    pub fn min_x(&self, lattice: &EnhancedLattice) -> Option<i64> {
        self.cur.min_set().map(|i| lattice.x_of(i))
    }

    pub fn is_dead(&self) -> bool {
        self.cur.is_empty() && self.prev.is_empty()
    }
}

fn evolve_with_row(
    lattice: &EnhancedLattice,
    front: &ReachableFront,
    open_next: &BitRow,
) -> ReachableFront {
    let level = front.level;
    // up-steps from the current level
    let mut base = front.cur.and(open_next);
    // length-2 jumps from level - 1 when that row of edges is open
    if level >= 1 && (level - 1) % 2 == 0 && lattice.row_edges_open(level - 1) {
        base.or_assign(&front.prev.and(open_next));
    }
    let cur = BitRow::smear_right(open_next, &base);
    // contact with the right window edge clips the closure; the left margin
    // is covered by the window-sizing rule and start sets already touch it
    let truncated = front.truncated || cur.get(cur.len() - 1);
    ReachableFront {
        level: level + 1,
        prev: front.cur.clone(),
        cur,
        truncated,
    }
}

/// One level of the front evolution: up-steps, length-2 jumps on open rows,
/// then the rightward closure through open sites.
pub fn evolve_front(lattice: &EnhancedLattice, front: &ReachableFront) -> ReachableFront {
    let open = lattice.open_row(front.level + 1);
    evolve_with_row(lattice, front, &open)
}

/// Window half-width factor from the geometric-overshoot domination of the
/// right edge, with a safety margin.
pub fn window_factor(p: f64) -> i64 {
    (2.0 / (1.0 - p)).ceil() as i64 + 2
}

/// Edge processes r_n (from the left half-line) and l_n (from the right
/// half-line), plus the geometric domination path r'_n, all on one shared
/// realization. `None` encodes -inf for r, +inf for l, "past the window"
/// for r'.
pub struct EdgeProcesses {
    pub r: Vec<Option<i64>>,
    pub l: Vec<Option<i64>>,
    pub r_prime: Vec<Option<i64>>,
    pub truncated: bool,
}

pub fn edge_processes(p: f64, q: f64, n_max: u32, seed: u64) -> Result<EdgeProcesses> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    if !(0.0..=1.0).contains(&q) || q >= 1.0 {
        return Err(Error::InvalidProbability { name: "q", value: q });
    }
    let c = window_factor(p);
    let half = c * n_max.max(1) as i64;
    let window = Window {
        x_lo: -half,
        x_hi: half,
        level_max: n_max,
    };
    let lattice = EnhancedLattice::new(p, q, window, seed)?.with_mode(SamplerMode::BitSliced);
    let width = window.width();

    let mut front_r = ReachableFront::start(&lattice, window.x_lo..=0);
    let mut front_l = ReachableFront::start(&lattice, 0..=window.x_hi);

    let mut r = Vec::with_capacity(n_max as usize + 1);
    let mut l = Vec::with_capacity(n_max as usize + 1);
    let mut r_prime = Vec::with_capacity(n_max as usize + 1);
    // the l-front legitimately occupies the right boundary from its start
    // half-line and its minimum is immune to right clipping, so only the
    // r-front's boundary contact (and losing r') marks real truncation
    let mut truncated = front_r.truncated;

    // r'_0 = inf{x >= 0 : (x+1, 0) closed}; r'_n continues the scan upward
    let row0 = lattice.open_row(0);
    let mut rp = first_zero_at_or_after(&row0, lattice.idx(0) + 1).map(|z| lattice.x_of(z) - 1);
    if rp.is_none() {
        truncated = true;
    }

    r.push(front_r.max_x(&lattice));
    l.push(front_l.min_x(&lattice));
    r_prime.push(rp);

    for level in 1..=n_max {
        let open = lattice.open_row(level);
        front_r = evolve_with_row(&lattice, &front_r, &open);
        front_l = evolve_with_row(&lattice, &front_l, &open);
        rp = match rp {
            Some(prev) => {
                let from = (prev + 1 - window.x_lo) as usize;
                let z = first_zero_at_or_after(&open, from);
                if z.is_none() {
                    truncated = true;
                }
                z.map(|z| lattice.x_of(z) - 1)
            }
            None => None,
        };
        truncated |= front_r.truncated;
        r.push(front_r.max_x(&lattice));
        l.push(front_l.min_x(&lattice));
        r_prime.push(rp);
        if width == 0 {
            break;
        }
    }
    Ok(EdgeProcesses {
        r,
        l,
        r_prime,
        truncated,
    })
}

fn first_zero_at_or_after(row: &BitRow, pos: usize) -> Option<usize> {
    (pos..row.len()).find(|&i| !row.get(i))
}

#[derive(Clone, Debug)]
pub struct EdgeCheckpoint {
    /// Level 2m at which the running means were recorded.
    pub level: u32,
    pub alpha_mean: f64,
    pub beta_mean: f64,
}

#[derive(Clone, Debug)]
pub struct EdgeSpeedEstimate {
    pub alpha_hat: f64,
    pub alpha_stderr: f64,
    pub beta_hat: f64,
    pub beta_stderr: f64,
    /// min over recorded m of mean r_{2m}/(2m): the subadditive estimator of
    /// alpha = inf_n E[r_{2n}]/(2n), an upper bound in expectation.
    pub alpha_subadditive: f64,
    /// max over recorded m of mean l_{2m}/(2m), mirroring beta = sup_n ...
    pub beta_superadditive: f64,
    pub checkpoints: Vec<EdgeCheckpoint>,
    pub reps_used: u64,
    pub excluded: u64,
}

/// Sample means and standard errors of r_{2n}/(2n) and l_{2n}/(2n) over
/// independent replicates. Truncated or dead replicates are excluded and
/// counted; more than 1% exclusions aborts.
pub fn edge_speed_estimate(
    p: f64,
    q: f64,
    n: u32,
    reps: u64,
    seed: u64,
) -> Result<EdgeSpeedEstimate> {
    if n == 0 || reps == 0 {
        return Err(Error::Infeasible("need n >= 1 and reps >= 1".into()));
    }
    let n_max = 2 * n;
    let mut marks: Vec<u32> = [n / 4, n / 2, (3 * n) / 4, n]
        .iter()
        .map(|&m| 2 * m.max(1))
        .collect();
    marks.dedup();

    let per_rep: Vec<Option<(Vec<f64>, Vec<f64>)>> = crate::par::map_indexed(reps, |rep| {
        let procs = edge_processes(p, q, n_max, rng::mix64(seed ^ rng::mix64(rep))).ok()?;
        if procs.truncated {
            return None;
        }
        let mut alphas = Vec::with_capacity(marks.len());
        let mut betas = Vec::with_capacity(marks.len());
        for &lvl in &marks {
            let r = procs.r[lvl as usize]?;
            let l = procs.l[lvl as usize]?;
            alphas.push(r as f64 / lvl as f64);
            betas.push(l as f64 / lvl as f64);
        }
        Some((alphas, betas))
    });

    let used: Vec<&(Vec<f64>, Vec<f64>)> = per_rep.iter().flatten().collect();
    let excluded = reps - used.len() as u64;
    if excluded as f64 > 0.01 * reps as f64 {
        return Err(Error::Resource(format!(
            "{excluded} of {reps} replicates truncated or dead"
        )));
    }
    if used.is_empty() {
        return Err(Error::Resource("no usable replicates".into()));
    }

    let stats = |values: Vec<f64>| {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() < 2 {
            0.0
        } else {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        };
        (mean, (var / n).sqrt())
    };

    let mut checkpoints = Vec::with_capacity(marks.len());
    for (k, &lvl) in marks.iter().enumerate() {
        let (am, _) = stats(used.iter().map(|u| u.0[k]).collect());
        let (bm, _) = stats(used.iter().map(|u| u.1[k]).collect());
        checkpoints.push(EdgeCheckpoint {
            level: lvl,
            alpha_mean: am,
            beta_mean: bm,
        });
    }
    let last = marks.len() - 1;
    let (alpha_hat, alpha_stderr) = stats(used.iter().map(|u| u.0[last]).collect());
    let (beta_hat, beta_stderr) = stats(used.iter().map(|u| u.1[last]).collect());
    let alpha_subadditive = checkpoints
        .iter()
        .map(|c| c.alpha_mean)
        .fold(f64::INFINITY, f64::min);
    let beta_superadditive = checkpoints
        .iter()
        .map(|c| c.beta_mean)
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(EdgeSpeedEstimate {
        alpha_hat,
        alpha_stderr,
        beta_hat,
        beta_stderr,
        alpha_subadditive,
        beta_superadditive,
        checkpoints,
        reps_used: used.len() as u64,
        excluded,
    })
}

// ---------------------------------------------------------------------------
// Parallelogram crossings.
// ---------------------------------------------------------------------------

/// R(u, v) = base + ([0,1)u + [0,1)v) cap Z^2, with exact rational u, v kept
/// as integers over a common denominator. Crossing strips follow the paper's
/// convention (points within Euclidean distance < band_width of the relevant
/// side, inside R), falling back to the minimal nonempty lattice band when
/// the strict inequality rasterizes to nothing.
#[derive(Clone, Debug)]
pub struct Parallelogram {
    pub base: (i64, i64),
    // u = (a, b)/dd, v = (d, e)/dd, k = a*e - b*d > 0
    a: i128,
    b: i128,
    d: i128,
    e: i128,
    dd: i128,
    k: i128,
    band_width: i128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossDirection {
    Up,
    Right,
    Left,
}

fn gcd_i64(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// A rational number num/den with den > 0.
pub type Rat = (i64, i64);

fn check_rat(r: Rat) -> Result<Rat> {
    if r.1 <= 0 {
        return Err(Error::Infeasible("rational denominator must be positive".into()));
    }
    Ok(r)
}

impl Parallelogram {
    pub fn from_rational(base: (i64, i64), u: (Rat, Rat), v: (Rat, Rat)) -> Result<Self> {
        for r in [u.0, u.1, v.0, v.1] {
            check_rat(r)?;
        }
        let mut dd: i64 = 1;
        for r in [u.0, u.1, v.0, v.1] {
            dd = dd / gcd_i64(dd, r.1) * r.1;
        }
        if dd > 1 << 20 {
            return Err(Error::Infeasible("rational denominators too large".into()));
        }
        let scale = |r: Rat| r.0 as i128 * (dd / r.1) as i128;
        let (a, b) = (scale(u.0), scale(u.1));
        let (d, e) = (scale(v.0), scale(v.1));
        for m in [a, b, d, e] {
            if m.abs() > 1 << 30 {
                return Err(Error::Infeasible("parallelogram coordinates too large".into()));
            }
        }
        let k = a * e - b * d;
        if k <= 0 {
            return Err(Error::Infeasible("need det(u, v) > 0".into()));
        }
        Ok(Parallelogram {
            base,
            a,
            b,
            d,
            e,
            dd: dd as i128,
            k,
            band_width: 1,
        })
    }

    pub fn from_integer(base: (i64, i64), u: (i64, i64), v: (i64, i64)) -> Result<Self> {
        Parallelogram::from_rational(base, ((u.0, 1), (u.1, 1)), ((v.0, 1), (v.1, 1)))
    }

    /// Widen the crossing strips to Euclidean distance < w (default 1).
    pub fn with_band_width(mut self, w: u8) -> Self {
        self.band_width = w.max(1) as i128;
        self
    }

    /// Barycentric numerators: s-numerator dd*(x'e - y'd) and t-numerator
    /// dd*(ay' - bx'), each in [0, k) exactly when the point is inside.
    fn st_num(&self, x: i64, y: i64) -> (i128, i128) {
        let xp = (x - self.base.0) as i128;
        let yp = (y - self.base.1) as i128;
        let s_num = self.dd * (xp * self.e - yp * self.d);
        let t_num = self.dd * (self.a * yp - self.b * xp);
        (s_num, t_num)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        let (s, t) = self.st_num(x, y);
        (0..self.k).contains(&s) && (0..self.k).contains(&t)
    }

    /// Inclusive y-extent of the real parallelogram (outward-rounded).
    pub fn y_range(&self) -> (i64, i64) {
        Self::corner_range(self.base.1, self.b, self.e, self.dd)
    }

    /// Inclusive x-extent of the real parallelogram (outward-rounded).
    pub fn x_range(&self) -> (i64, i64) {
        Self::corner_range(self.base.0, self.a, self.d, self.dd)
    }

    fn corner_range(base: i64, cu: i128, cv: i128, dd: i128) -> (i64, i64) {
        let corners = [0, cu, cv, cu + cv];
        let lo = corners.iter().min().unwrap();
        let hi = corners.iter().max().unwrap();
        let lo = base as i128 + div_floor(*lo, dd);
        let hi = base as i128 + div_ceil(*hi, dd);
        (lo as i64, hi as i64)
    }

    /// Integer x-interval of R at height y, or None when empty.
    pub fn interval_at(&self, y: i64) -> Option<(i64, i64)> {
        let yp = (y - self.base.1) as i128;
        // 0 <= dd*(x'e - y'd) <= k-1  and  0 <= dd*(ay' - bx') <= k-1
        let r1 = int_range(self.dd * self.e, -self.dd * self.d * yp, self.k)?;
        let r2 = int_range(-self.dd * self.b, self.dd * self.a * yp, self.k)?;
        let lo = max_opt(r1.0, r2.0)?;
        let hi = min_opt(r1.1, r2.1)?;
        if lo > hi {
            return None;
        }
        Some((self.base.0 + lo as i64, self.base.0 + hi as i64))
    }

    /// Start and end strips for a crossing direction, as (x, y) lists.
    ///
    /// Up crosses from the u-side (t near 0) to its translate at v (t near 1);
    /// Right from the v-side to its translate at u; Left is Right reversed.
    pub fn strips(&self, dir: CrossDirection) -> Result<(Vec<(i64, i64)>, Vec<(i64, i64)>)> {
        let (y0, y1) = self.y_range();
        let mut points = Vec::new();
        for y in y0..=y1 {
            if let Some((lo, hi)) = self.interval_at(y) {
                for x in lo..=hi {
                    points.push((x, y));
                }
            }
        }
        if points.is_empty() {
            return Err(Error::DegenerateRegion("no lattice points in R".into()));
        }

        // Point at barycentric coordinate c/k sits at Euclidean distance
        // c/(dd*|side|) from the low side and (k-c)/(dd*|side|) from the
        // high side; compare squares to stay exact.
        let coord = |x: i64, y: i64| -> i128 {
            let (s, t) = self.st_num(x, y);
            match dir {
                CrossDirection::Up => t,
                CrossDirection::Right | CrossDirection::Left => s,
            }
        };
        let side_sq = match dir {
            CrossDirection::Up => self.a * self.a + self.b * self.b,
            CrossDirection::Right | CrossDirection::Left => {
                self.d * self.d + self.e * self.e
            }
        };
        let rhs = side_sq
            .checked_mul(self.band_width * self.band_width)
            .and_then(|v| v.checked_mul(self.dd * self.dd))
            .ok_or_else(|| Error::Infeasible("parallelogram too large for strips".into()))?;
        let near = |c: i128| -> Result<bool> {
            c.checked_mul(c)
                .map(|sq| sq < rhs)
                .ok_or_else(|| Error::Infeasible("parallelogram too large for strips".into()))
        };

        let mut lo_band = Vec::new();
        let mut hi_band = Vec::new();
        let mut c_min = i128::MAX;
        let mut c_max = i128::MIN;
        for &(x, y) in &points {
            let c = coord(x, y);
            c_min = c_min.min(c);
            c_max = c_max.max(c);
            if near(c)? {
                lo_band.push((x, y));
            }
            if near(self.k - c)? {
                hi_band.push((x, y));
            }
        }
        // strict distance strips can rasterize empty; fall back to the
        // minimal nonempty lattice band in the barycentric coordinate
        if lo_band.is_empty() {
            lo_band = points
                .iter()
                .copied()
                .filter(|&(x, y)| coord(x, y) == c_min)
                .collect();
        }
        if hi_band.is_empty() {
            hi_band = points
                .iter()
                .copied()
                .filter(|&(x, y)| coord(x, y) == c_max)
                .collect();
        }
        match dir {
            CrossDirection::Up | CrossDirection::Right => Ok((lo_band, hi_band)),
            CrossDirection::Left => Ok((hi_band, lo_band)),
        }
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

fn div_ceil(a: i128, b: i128) -> i128 {
    (a + b - 1).div_euclid(b)
}

/// Integer t-range of 0 <= cx*t + c0 <= k-1; None when empty for all t.
fn int_range(cx: i128, c0: i128, k: i128) -> Option<(Option<i128>, Option<i128>)> {
    if cx == 0 {
        if (0..k).contains(&c0) {
            Some((None, None))
        } else {
            None
        }
    } else if cx > 0 {
        Some((
            Some(div_ceil(-c0, cx)),
            Some(div_floor(k - 1 - c0, cx)),
        ))
    } else {
        Some((
            Some(div_ceil(c0 - (k - 1), -cx)),
            Some(div_floor(c0, -cx)),
        ))
    }
}

fn max_opt(a: Option<i128>, b: Option<i128>) -> Option<i128> {
    match (a, b) {
        (None, None) => Some(i128::MIN),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (Some(x), Some(y)) => Some(x.max(y)),
    }
}

fn min_opt(a: Option<i128>, b: Option<i128>) -> Option<i128> {
    match (a, b) {
        (None, None) => Some(i128::MAX),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

/// Whether R is crossed in the given direction by an open path of the
/// lattice, via levelwise reachability restricted to R.
pub fn crossing_event(
    lattice: &EnhancedLattice,
    r: &Parallelogram,
    dir: CrossDirection,
) -> Result<bool> {
    let (x0, x1) = r.x_range();
    let (y0, y1) = r.y_range();
    let w = lattice.window();
    if x0 < w.x_lo || x1 > w.x_hi || y0 < 0 || (y1 as u32) > w.level_max {
        return Err(Error::RegionOutsideWindow);
    }
    let (start, end) = r.strips(dir)?;
    if start.is_empty() || end.is_empty() {
        return Err(Error::DegenerateRegion("empty crossing strip".into()));
    }
    let width = w.width();
    let mut starts_by_y: Vec<Vec<i64>> = vec![Vec::new(); (y1 - y0 + 1) as usize];
    for &(x, y) in &start {
        starts_by_y[(y - y0) as usize].push(x);
    }
    let mut end_by_y: Vec<BitRow> = vec![BitRow::new(width); (y1 - y0 + 1) as usize];
    for &(x, y) in &end {
        end_by_y[(y - y0) as usize].set(lattice.idx(x));
    }

    let mut prev2 = BitRow::new(width);
    let mut prev = BitRow::new(width);
    for y in y0..=y1 {
        let yi = (y - y0) as usize;
        let mut open_masked = BitRow::new(width);
        if let Some((lo, hi)) = r.interval_at(y) {
            let open = lattice.open_row(y as u32);
            open_masked.set_range(lattice.idx(lo), lattice.idx(hi));
            open_masked.and_assign(&open);
        }
        let mut base = prev.and(&open_masked);
        if y >= 2 && y % 2 == 0 && lattice.row_edges_open(y as u32 - 2) {
            base.or_assign(&prev2.and(&open_masked));
        }
        for &x in &starts_by_y[yi] {
            base.set(lattice.idx(x));
        }
        let cur = BitRow::smear_right(&open_masked, &base);
        if cur.intersects(&end_by_y[yi]) {
            return Ok(true);
        }
        prev2 = prev;
        prev = cur;
    }
    Ok(false)
}

/// Monte Carlo estimate of the crossing probability with independent
/// replicate substreams; window is the bounding box of R.
pub fn crossing_probability(
    r: &Parallelogram,
    dir: CrossDirection,
    p: f64,
    q: f64,
    reps: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let (x0, x1) = r.x_range();
    let (y0, y1) = r.y_range();
    if y0 < 0 {
        return Err(Error::RegionOutsideWindow);
    }
    let window = Window {
        x_lo: x0,
        x_hi: x1,
        level_max: y1.max(0) as u32,
    };
    let outcomes: Vec<Result<bool>> = crate::par::map_indexed(reps, |rep| {
        let lattice =
            EnhancedLattice::new(p, q, window, rng::mix64(seed ^ rng::mix64(rep)))?;
        crossing_event(&lattice, r, dir)
    });
    let mut hits = 0u64;
    for o in outcomes {
        if o? {
            hits += 1;
        }
    }
    let est = hits as f64 / reps as f64;
    let stderr = (est * (1.0 - est) / reps as f64).sqrt();
    Ok((est, stderr))
}

// ---------------------------------------------------------------------------
// Oriented bond percolation with geometric defects.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct DefectsSurvival {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: u64,
    /// Replicates whose front touched the right window edge.
    pub overflowed: u64,
}

/// Survival estimate for the geometric-defects model: per-level i.i.d.
/// xi_n with P(xi = k) = (1-delta) delta^k, and each oriented bond out of
/// level n open independently with probability p^(xi_n + 1). Reports the
/// probability that the origin reaches level n_max inside [0, width).
pub fn defects_survival(
    p: f64,
    delta: f64,
    width: usize,
    n_max: u32,
    reps: u64,
    seed: u64,
) -> Result<DefectsSurvival> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidProbability {
            name: "delta",
            value: delta,
        });
    }
    if width == 0 || reps == 0 {
        return Err(Error::Infeasible("need width >= 1 and reps >= 1".into()));
    }
    let outcomes: Vec<(bool, bool)> = crate::par::map_indexed(reps, |rep| {
        defects_one(p, delta, width, n_max, rng::mix64(seed ^ rng::mix64(rep)))
    });
    let survived = outcomes.iter().filter(|o| o.0).count() as u64;
    let overflowed = outcomes.iter().filter(|o| o.1).count() as u64;
    let est = survived as f64 / reps as f64;
    let stderr = (est * (1.0 - est) / reps as f64).sqrt();
    Ok(DefectsSurvival {
        estimate: est,
        stderr,
        reps,
        overflowed,
    })
}

fn defects_one(p: f64, delta: f64, width: usize, n_max: u32, seed: u64) -> (bool, bool) {
    let base = rng::stream(&[DOMAIN_DEFECTS, seed]);
    let mut front = BitRow::new(width);
    front.set(0);
    let mut overflowed = false;
    for level in 0..n_max {
        let mut env_rng = base.clone();
        env_rng.set_stream(3 * level as u64 + 2);
        let u = rng::unit_f64(&mut env_rng).max(1e-18);
        let xi: i32 = if delta == 0.0 {
            0
        } else {
            ((u.ln() / delta.ln()).floor() as i32).clamp(0, 64)
        };
        let thr = rng::bernoulli_threshold(p.powi(xi + 1));
        let sample_row = |stream: u64| {
            let mut rng = base.clone();
            rng.set_stream(stream);
            let mut row = BitRow::new(width);
            for slot in row.words_mut() {
                *slot = rng::bernoulli_word(&mut rng, thr);
            }
            row.mask_tail();
            row
        };
        let up_open = sample_row(3 * level as u64);
        let diag_open = sample_row(3 * level as u64 + 1);

        let mut next = front.and(&up_open);
        let mut shifted = shift_up_one(&front);
        shifted.and_assign(&diag_open);
        next.or_assign(&shifted);
        // right-edge contact with evolution still ahead means diagonal
        // children may have been clipped; contact at the final level is fine
        overflowed |= level + 1 < n_max && next.get(width - 1);
        if next.is_empty() {
            return (false, overflowed);
        }
        front = next;
    }
    (true, overflowed)
}

fn shift_up_one(row: &BitRow) -> BitRow {
    let mut out = BitRow::new(row.len());
    let words = row.words();
    let out_words = out.words_mut();
    let mut carry = 0u64;
    for (o, &w) in out_words.iter_mut().zip(words) {
        *o = (w << 1) | carry;
        carry = w >> 63;
    }
    out.mask_tail();
    out
}
