use std::collections::BTreeSet;

use super::{DblpError, EdgeCosts, Indexed, Instance, VoterPopulation};

/// Access of `pop` when exactly the locations in `selected` hold boxes.
pub fn access_value<S: AsRef<str>>(pop: &VoterPopulation, selected: &[S]) -> Result<f64, DblpError> {
    let mut sum = 0.0;
    for id in selected {
        let id = id.as_ref();
        sum += pop
            .access
            .a
            .get(id)
            .ok_or_else(|| DblpError::UnknownLocation(id.to_string()))?;
    }
    let p = &pop.access;
    Ok((p.v1 + sum) / (p.v0 + p.v1 + sum))
}

/// Edge costs with half of each endpoint's fixed cost folded in, so that a
/// cycle's cost equals its travel cost plus the fixed cost of every stop.
pub fn reformulated_costs(inst: &Instance) -> EdgeCosts {
    let f: Vec<f64> = inst.locations.iter().map(|l| l.fixed_cost).collect();
    EdgeCosts::from_fn(inst.locations.len(), |i, j| {
        inst.edge_costs.get(i, j) + f[i] / 2.0 + f[j] / 2.0
    })
}

/// Ids of populations whose access constraint is implied by another
/// population's for every selection containing the required set.
///
/// `w` is dropped when some `ŵ` has `v0_ŵ ≥ v0_w`,
/// `v1_ŵ + Σ_T a_ŵ ≤ v1_w + Σ_T a_w` and `a_nŵ ≤ a_nw` on every optional
/// location. Mutually dominating populations keep the smallest id.
pub fn dominance_filter(inst: &Instance) -> Result<BTreeSet<String>, DblpError> {
    let ix = inst.indexed()?;
    Ok(dominated_indices(&ix)
        .into_iter()
        .map(|w| inst.populations[w].id.clone())
        .collect())
}

pub(crate) fn dominated_indices(ix: &Indexed<'_>) -> Vec<usize> {
    let req = ix.required_list();
    let optional: Vec<usize> = (0..ix.n).filter(|&j| !ix.required[j]).collect();
    let base: Vec<f64> = ix
        .pops
        .iter()
        .map(|p| p.v1 + req.iter().map(|&t| p.a[t]).sum::<f64>())
        .collect();
    let ids: Vec<&str> = ix.inst.populations.iter().map(|p| p.id.as_str()).collect();
    let mut out = Vec::new();
    for w in 0..ix.pops.len() {
        let pw = &ix.pops[w];
        let removable = (0..ix.pops.len()).any(|h| {
            if h == w {
                return false;
            }
            let ph = &ix.pops[h];
            if !(ph.v0 >= pw.v0 && base[h] <= base[w]) {
                return false;
            }
            if !optional.iter().all(|&n| ph.a[n] <= pw.a[n]) {
                return false;
            }
            let strict = ph.v0 > pw.v0
                || base[h] < base[w]
                || optional.iter().any(|&n| ph.a[n] < pw.a[n]);
            strict || ids[h] < ids[w]
        });
        if removable {
            out.push(w);
        }
    }
    out
}

/// Smallest drop in any population's access caused by removing a single box
/// from the full selection. Returns 1 when there are no populations.
pub fn epsilon_default(inst: &Instance) -> Result<f64, DblpError> {
    let ix = inst.indexed()?;
    let mut eps = f64::INFINITY;
    for p in &ix.pops {
        let total: f64 = p.a.iter().sum();
        let full = p.access_from_sum(total);
        for &a in &p.a {
            eps = eps.min(full - p.access_from_sum(total - a));
        }
    }
    if ix.pops.is_empty() || ix.n == 0 {
        return Ok(1.0);
    }
    if !(eps > 0.0) {
        return Err(DblpError::InvalidArgument(format!(
            "access step {eps} is not positive"
        )));
    }
    Ok(eps)
}
