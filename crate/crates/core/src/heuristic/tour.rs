use crate::model::EdgeCosts;

/// Largest tour solved exactly by dynamic programming.
pub const EXACT_TOUR_LIMIT: usize = 13;

/// Reformulated costs with the fixed cost of each endpoint folded in; a
/// location's cost to itself is its own fixed cost, so the closed walk
/// `[s]` costs `f_s` and `[s, j]` costs `2c_sj + f_s + f_j`.
#[derive(Clone, Copy)]
pub(crate) struct Hat<'a> {
    pub c: &'a EdgeCosts,
    pub f: &'a [f64],
}

impl Hat<'_> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c.get(i, j) + (self.f[i] + self.f[j]) / 2.0
    }
}

pub(crate) fn delta_cost_with(
    tour: &[usize],
    cost: impl Fn(usize, usize) -> f64,
    remove: Option<usize>,
    insert: Option<usize>,
) -> f64 {
    let mut delta = 0.0;
    let mut rest: Vec<usize>;
    let tour = match remove {
        Some(i) => {
            let k = tour.len();
            let p = tour.iter().position(|&v| v == i).expect("removed location is on the tour");
            let pred = tour[(p + k - 1) % k];
            let succ = tour[(p + 1) % k];
            delta += cost(pred, succ) - cost(pred, i) - cost(i, succ);
            rest = tour.to_vec();
            rest.remove(p);
            &rest[..]
        }
        None => tour,
    };
    if let Some(j) = insert {
        let k = tour.len();
        delta += (0..k)
            .map(|p| {
                let (u, v) = (tour[p], tour[(p + 1) % k]);
                cost(u, j) + cost(j, v) - cost(u, v)
            })
            .fold(f64::INFINITY, f64::min);
    }
    delta
}

/// Estimated change in tour cost from shortcutting `remove` out of `tour`
/// and then inserting `insert` at its cheapest position. A location's cost
/// to itself is read from the diagonal of `costs` (zero for [`EdgeCosts`]).
pub fn estimate_delta_cost(
    tour: &[usize],
    costs: &EdgeCosts,
    remove: Option<usize>,
    insert: Option<usize>,
) -> f64 {
    delta_cost_with(tour, |i, j| costs.get(i, j), remove, insert)
}

/// Short collection tour over `selected`, starting at `start` (which is added
/// if missing). Optimal for up to [`EXACT_TOUR_LIMIT`] stops, otherwise
/// nearest neighbour improved by 2-opt. Reflections are normalized so the
/// second stop has the smaller index of the start's two neighbours.
pub fn rebuild_tour(selected: &[usize], costs: &EdgeCosts, start: usize) -> Vec<usize> {
    let mut others: Vec<usize> = selected.iter().copied().filter(|&v| v != start).collect();
    others.sort_unstable();
    others.dedup();
    let tour = if others.len() < EXACT_TOUR_LIMIT {
        held_karp(start, &others, costs)
    } else {
        let mut t = nearest_neighbour(start, &others, costs);
        two_opt(&mut t, costs);
        t
    };
    crate::model::canonical_tour(&tour, start)
}

fn held_karp(start: usize, others: &[usize], costs: &EdgeCosts) -> Vec<usize> {
    let m = others.len();
    if m <= 2 {
        let mut t = vec![start];
        t.extend_from_slice(others);
        return t;
    }
    let full = 1usize << m;
    let mut dp = vec![f64::INFINITY; full * m];
    let mut parent = vec![u8::MAX; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = costs.get(start, others[j]);
    }
    for mask in 1..full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * m + j];
            if !cur.is_finite() {
                continue;
            }
            for k in 0..m {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cand = cur + costs.get(others[j], others[k]);
                if cand < dp[next * m + k] {
                    dp[next * m + k] = cand;
                    parent[next * m + k] = j as u8;
                }
            }
        }
    }
    let last_mask = full - 1;
    let mut best = (f64::INFINITY, 0);
    for j in 0..m {
        let total = dp[last_mask * m + j] + costs.get(others[j], start);
        if total < best.0 {
            best = (total, j);
        }
    }
    let mut path = Vec::with_capacity(m + 1);
    let (mut mask, mut j) = (last_mask, best.1);
    loop {
        path.push(others[j]);
        let p = parent[mask * m + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    path.push(start);
    path.reverse();
    path
}

fn nearest_neighbour(start: usize, others: &[usize], costs: &EdgeCosts) -> Vec<usize> {
    let mut left = others.to_vec();
    let mut tour = vec![start];
    let mut cur = start;
    while !left.is_empty() {
        let (p, _) = left
            .iter()
            .enumerate()
            .min_by(|a, b| costs.get(cur, *a.1).total_cmp(&costs.get(cur, *b.1)))
            .expect("non-empty");
        cur = left.remove(p);
        tour.push(cur);
    }
    tour
}

fn two_opt(tour: &mut [usize], costs: &EdgeCosts) {
    let k = tour.len();
    if k < 4 {
        return;
    }
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..k - 2 {
            for j in i + 2..k {
                if i == 0 && j == k - 1 {
                    continue;
                }
                let (a, b) = (tour[i], tour[i + 1]);
                let (c, d) = (tour[j], tour[(j + 1) % k]);
                let delta = costs.get(a, c) + costs.get(b, d) - costs.get(a, b) - costs.get(c, d);
                if delta < -1e-9 {
                    tour[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}
