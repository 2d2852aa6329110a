//! Executable couplings between Catalan percolation and the oriented models:
//! the nucleation coupling (sites (i+j, |j-i|) open iff edge {i,j} open) and
//! the enhanced coupling behind the strict upper bound, where length-2
//! Catalan edges are split into Bernoulli(p') pairs with p' = 1 - sqrt(1-p).
//! Both implications are theorems, so a single violated realization is an
//! implementation bug.

use crate::catalan::{occupy_with, sample_field, CouplingField, TruncationRule};
use crate::error::{Error, Result};
use crate::rng::{self, DOMAIN_COUPLING};

#[derive(Clone, Copy, Debug)]
pub struct CouplingOutcome {
    pub premise: bool,
    pub conclusion: bool,
}

impl CouplingOutcome {
    pub fn violated(&self) -> bool {
        self.premise && !self.conclusion
    }
}

/// Nucleation coupling: derived oriented sites (i+j, j-i) are open iff the
/// Catalan edge {i,j} is open; a descending open-site path from (n, n) to
/// level 2 grows an occupied edge one unit at a time, so reaching the bottom
/// implies {0, n} is occupied at the same p.
pub fn op_implies_catalan(n: usize, p: f64, seed: u64) -> Result<CouplingOutcome> {
    if n < 2 {
        return Err(Error::InvalidWindow { n, min: 2 });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    let field = sample_field(n, seed)?;
    let open = |i: usize, j: usize| field.label(i, j) <= p;

    // site (s, k) <-> edge {(s-k)/2, (s+k)/2}; reach(s, k) = open descending
    // path from (s, k) to level 2 (all sites on the path open)
    let mut prev = vec![false; 2 * n + 1];
    for s in (2..=2 * n - 2).step_by(2) {
        prev[s] = open((s - 2) / 2, (s + 2) / 2);
    }
    for k in 3..=n {
        let mut cur = vec![false; 2 * n + 1];
        for s in (k..=2 * n - k).step_by(2) {
            if open((s - k) / 2, (s + k) / 2) && (prev[s - 1] || prev[s + 1]) {
                cur[s] = true;
            }
        }
        prev = cur;
    }
    let premise = prev[n];

    let conclusion = occupy_with(n, TruncationRule::Full, open).is_occupied(0, n);
    Ok(CouplingOutcome {
        premise,
        conclusion,
    })
}

/// One realization of the enhanced coupling (Fig. 7-style): long Catalan
/// edges drive oriented sites, length-2 edges come from xi + xi' Bernoulli
/// pairs, and row edges of the enhanced lattice from xi alone.
pub struct EnhancedRealization {
    pub n: usize,
    pub p: f64,
    pub p_prime: f64,
    field: CouplingField,
    xi: Vec<bool>,
    xi_prime: Vec<bool>,
}

pub fn enhanced_realization(n: usize, p: f64, seed: u64) -> Result<EnhancedRealization> {
    if n < 5 {
        return Err(Error::InvalidWindow { n, min: 5 });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    let p_prime = 1.0 - (1.0 - p).sqrt();
    let field = sample_field(n, seed)?;
    let mut rng = rng::stream(&[DOMAIN_COUPLING, seed, n as u64]);
    let thr = rng::bernoulli_threshold(p_prime);
    let mut draw = |len: usize| -> Vec<bool> {
        (0..len)
            .map(|_| rng::accept(rand_chacha::rand_core::RngCore::next_u64(&mut rng), thr))
            .collect()
    };
    let xi = draw(n + 1);
    let xi_prime = draw(n + 1);
    Ok(EnhancedRealization {
        n,
        p,
        p_prime,
        field,
        xi,
        xi_prime,
    })
}

impl EnhancedRealization {
    /// Openness of the length-2 Catalan edge {j, j+2}: xi_j + xi'_j != 0,
    /// which has marginal probability 1 - (1 - p')^2 = p.
    pub fn length_two_open(&self, j: usize) -> bool {
        self.xi[j] || self.xi_prime[j]
    }

    fn catalan_open(&self, i: usize, j: usize) -> bool {
        if j - i == 2 {
            self.length_two_open(i)
        } else {
            self.field.label(i, j) <= self.p
        }
    }

    /// Evaluate the coupled events. The enhanced-lattice site (i, j) is open
    /// iff the Catalan edge {j, n-i} is open (length >= 3 on the domain
    /// i + j <= n - 3); moves are right, up, and the length-2 vertical jump
    /// on even rows with xi_{row} = 1. The premise asks the origin to reach
    /// l1 distance n-4 or n-3 with xi'_j = xi'_{j+2} = 1 at the endpoint,
    /// which forces {0, n} occupied. The origin site itself must be open
    /// (it is the edge {0, n}, and occupied edges are open).
    pub fn outcome(&self) -> CouplingOutcome {
        let n = self.n;
        let site_open = |i: usize, j: usize| self.catalan_open(j, n - i);

        let w = n + 1;
        let mut reach = vec![false; w * w];
        for i in 0..=n {
            for j in 0..=n {
                if i + j > n - 3 {
                    continue;
                }
                if !site_open(i, j) {
                    continue;
                }
                let from_origin = i == 0 && j == 0;
                let from_left = i >= 1 && reach[(i - 1) * w + j];
                let from_below = j >= 1 && reach[i * w + j - 1];
                let from_jump =
                    j >= 2 && j % 2 == 0 && self.xi[j - 2] && reach[i * w + j - 2];
                if from_origin || from_left || from_below || from_jump {
                    reach[i * w + j] = true;
                }
            }
        }
        let mut premise = false;
        'outer: for i in 0..=n {
            for j in 0..=n {
                let dist = i + j;
                if (dist == n - 4 || dist == n - 3)
                    && dist <= n - 3
                    && reach[i * w + j]
                    && self.xi_prime[j]
                    && j + 2 <= n
                    && self.xi_prime[j + 2]
                {
                    premise = true;
                    break 'outer;
                }
            }
        }

        let conclusion = occupy_with(n, TruncationRule::Full, |i, j| self.catalan_open(i, j))
            .is_occupied(0, n);
        CouplingOutcome {
            premise,
            conclusion,
        }
    }
}

/// Enhanced oriented percolation reaching distance n-4 (with the two extra
/// Bernoulli marks) implies {0, n} occupied in the coupled Catalan model.
pub fn enhanced_implies_catalan(n: usize, p: f64, seed: u64) -> Result<CouplingOutcome> {
    Ok(enhanced_realization(n, p, seed)?.outcome())
}
