//! Exact minimizers of the travel objective.
//!
//! The objective skips the outbound leg from the data center, so this is an
//! asymmetric path problem: arcs leaving the depot cost nothing while arcs
//! returning to it carry their true flight time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evo::Individual;
use crate::model::Route;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExactConfig {
    /// Largest N solved by scanning every permutation.
    pub exhaustive_cap: usize,
    /// Largest N solved by Held-Karp; its table has `2^N * N` entries.
    pub held_karp_cap: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            exhaustive_cap: 9,
            held_karp_cap: 18,
        }
    }
}

impl ExactConfig {
    pub fn cap(&self) -> usize {
        self.exhaustive_cap.max(self.held_karp_cap)
    }
}

pub fn solve_exact(scenario: &Scenario) -> Result<Individual> {
    solve_exact_with(scenario, &ExactConfig::default())
}

/// Exhaustive scan up to `exhaustive_cap`, Held-Karp up to `held_karp_cap`.
pub fn solve_exact_with(scenario: &Scenario, config: &ExactConfig) -> Result<Individual> {
    let n = scenario.n();
    let route = if n <= config.exhaustive_cap {
        solve_exhaustive(scenario, config.exhaustive_cap)?.0
    } else if n <= config.held_karp_cap {
        held_karp(scenario, config.held_karp_cap)?.0
    } else {
        return Err(Error::Capacity {
            solver: "exact",
            cap: config.cap(),
            n,
        });
    };
    Individual::evaluate(scenario, route)
}

fn path_cost(legs: &[f64], m: usize, interior: &[usize]) -> f64 {
    let mut cost = 0.0;
    for w in interior.windows(2) {
        cost += legs[w[0] * m + w[1]];
    }
    cost + legs[interior[interior.len() - 1] * m]
}

// Lexicographic successor; false once the sequence is the last permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Scans all `N!` interiors in lexicographic order; the first minimum wins,
/// so ties resolve to the lexicographically smallest route. Returns the route
/// and its travel objective.
pub fn solve_exhaustive(scenario: &Scenario, cap: usize) -> Result<(Route, f64)> {
    let n = scenario.n();
    if n > cap {
        return Err(Error::Capacity {
            solver: "exhaustive",
            cap,
            n,
        });
    }
    let legs = scenario.leg_matrix();
    let m = n + 1;
    let mut perm: Vec<usize> = (1..=n).collect();
    let mut best = perm.clone();
    let mut best_cost = path_cost(&legs, m, &perm);
    while next_permutation(&mut perm) {
        let cost = path_cost(&legs, m, &perm);
        if cost < best_cost {
            best_cost = cost;
            best.copy_from_slice(&perm);
        }
    }
    Ok((Route::from_interior(&best).expect("permutation"), best_cost))
}

/// Bitmask dynamic program over visited subsets. `cost[mask][j]` is the
/// cheapest path that starts anywhere (the depot's outgoing arc is free),
/// visits exactly `mask` and ends at `j`. Returns the route and its travel
/// objective.
pub fn held_karp(scenario: &Scenario, cap: usize) -> Result<(Route, f64)> {
    let n = scenario.n();
    if n > cap {
        return Err(Error::Capacity {
            solver: "held-karp",
            cap,
            n,
        });
    }
    let legs = scenario.leg_matrix();
    let m = n + 1;
    // node k (0-based) is scenario id k + 1
    let arc = |a: usize, b: usize| legs[(a + 1) * m + b + 1];
    let home = |a: usize| legs[(a + 1) * m];

    let full = (1usize << n) - 1;
    let mut cost = vec![f64::INFINITY; (full + 1) * n];
    let mut prev = vec![u8::MAX; (full + 1) * n];
    for j in 0..n {
        cost[(1 << j) * n + j] = 0.0;
    }
    for mask in 1..=full {
        let mut ends = mask;
        while ends != 0 {
            let j = ends.trailing_zeros() as usize;
            ends &= ends - 1;
            let here = cost[mask * n + j];
            if !here.is_finite() {
                continue;
            }
            let mut free = full & !mask;
            while free != 0 {
                let k = free.trailing_zeros() as usize;
                free &= free - 1;
                let next = mask | (1 << k);
                let cand = here + arc(j, k);
                if cand < cost[next * n + k] {
                    cost[next * n + k] = cand;
                    prev[next * n + k] = j as u8;
                }
            }
        }
    }

    let mut last = 0;
    let mut best = f64::INFINITY;
    for j in 0..n {
        let total = cost[full * n + j] + home(j);
        if total < best {
            best = total;
            last = j;
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    let mut at = last;
    loop {
        order.push(at + 1);
        let p = prev[mask * n + at];
        mask &= !(1 << at);
        if p == u8::MAX {
            break;
        }
        at = p as usize;
    }
    order.reverse();
    Ok((Route::from_interior(&order).expect("held-karp path is a permutation"), best))
}
