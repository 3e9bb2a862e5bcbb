//! Induced order statistics.
//!
//! `S_n` holds the outcomes of the `k` observations whose covariates are
//! nearest to `x0` (Euclidean norm), listed in original sample order. Equal
//! distances are broken in favour of the smaller original index, so the
//! selection is a total order and fully deterministic.
//!
//! Indices in this module are 0-based; `ranks` hold 1-based rank values.

use std::cmp::Ordering;

use log::warn;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IosResult {
    pub k: usize,
    pub m: usize,
    /// `k × m`, row-major, rows in original sample order.
    pub s_n: Vec<f64>,
    /// `ι_n`: selected indices, strictly increasing.
    pub iota: Vec<usize>,
    /// `K_n`: selected indices ordered by distance rank.
    pub nearest: Vec<usize>,
    /// `σ_n(i)`: 1-based distance rank of every observation, when requested.
    pub ranks: Option<Vec<usize>>,
    /// `R_(k+1)`; `None` when `k = n`.
    pub r_k_plus_1: Option<f64>,
}

impl IosResult {
    /// Row `j` of `S_n`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.s_n[j * self.m..(j + 1) * self.m]
    }

    /// `S_n` as a scalar vector; errors for `m > 1`.
    pub fn scalar(&self) -> Result<&[f64]> {
        if self.m != 1 {
            return invalid(format!("expected scalar outcomes, got m = {}", self.m));
        }
        Ok(&self.s_n)
    }
}

/// Left and right blocks at a regression-discontinuity cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoSidedIos {
    pub q: usize,
    pub m: usize,
    /// `2q × m`: left block then right block, each in original order.
    pub s_n: Vec<f64>,
    pub left: IosResult,
    pub right: IosResult,
    /// Observations lying exactly on the cutoff, excluded from both sides.
    pub dropped_at_cutoff: usize,
}

/// Total order on candidates: distance, then original index.
fn by_distance<'a>(dist: &'a [f64]) -> impl Fn(&usize, &usize) -> Ordering + 'a {
    move |a, b| dist[*a].total_cmp(&dist[*b]).then(a.cmp(b))
}

/// Picks the `k` nearest among `cands` (partial selection). Returns them in
/// rank order together with the `(k+1)`-th smallest distance.
fn select_nearest(cands: &mut [usize], dist: &[f64], k: usize) -> (Vec<usize>, Option<f64>) {
    let cmp = by_distance(dist);
    let next = if k < cands.len() {
        cands.select_nth_unstable_by(k, &cmp);
        Some(dist[cands[k]])
    } else {
        None
    };
    let mut chosen = cands[..k].to_vec();
    chosen.sort_unstable_by(&cmp);
    (chosen, next)
}

fn assemble(data: &Dataset, nearest: Vec<usize>, r_next: Option<f64>) -> IosResult {
    let mut iota = nearest.clone();
    iota.sort_unstable();
    let m = data.m();
    let mut s_n = Vec::with_capacity(iota.len() * m);
    for &i in &iota {
        s_n.extend_from_slice(data.y_row(i));
    }
    IosResult { k: iota.len(), m, s_n, iota, nearest, ranks: None, r_k_plus_1: r_next }
}

fn distances(data: &Dataset, x0: &[f64]) -> Vec<f64> {
    (0..data.n())
        .map(|i| data.x_row(i).iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .collect()
}

fn check_extract(data: &Dataset, x0: &[f64], k: usize) -> Result<()> {
    if data.is_empty() {
        return invalid("empty dataset");
    }
    if x0.len() != data.d() {
        return invalid(format!("x0 has length {}, data has d = {}", x0.len(), data.d()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return invalid("x0 must be finite");
    }
    if k == 0 || k > data.n() {
        return invalid(format!("k must lie in 1..={}, got {k}", data.n()));
    }
    Ok(())
}

/// Extracts `S_n` for the `k` nearest neighbours of `x0`.
pub fn extract(data: &Dataset, x0: &[f64], k: usize) -> Result<IosResult> {
    check_extract(data, x0, k)?;
    let dist = distances(data, x0);
    let mut cands: Vec<usize> = (0..data.n()).collect();
    let (nearest, next) = select_nearest(&mut cands, &dist, k);
    Ok(assemble(data, nearest, next))
}

/// As [`extract`], also materialising the full rank permutation `σ_n`.
pub fn extract_ranked(data: &Dataset, x0: &[f64], k: usize) -> Result<IosResult> {
    check_extract(data, x0, k)?;
    let dist = distances(data, x0);
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.sort_unstable_by(by_distance(&dist));
    let mut ranks = vec![0; data.n()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    let next = order.get(k).map(|&i| dist[i]);
    order.truncate(k);
    let mut res = assemble(data, order, next);
    res.ranks = Some(ranks);
    Ok(res)
}

/// `q` nearest neighbours strictly left and strictly right of `cutoff`.
pub fn extract_two_sided(data: &Dataset, cutoff: f64, q: usize) -> Result<TwoSidedIos> {
    if data.d() != 1 {
        return invalid(format!("two-sided extraction needs d = 1, got d = {}", data.d()));
    }
    if q == 0 {
        return invalid("q must be at least 1");
    }
    if !cutoff.is_finite() {
        return invalid("cutoff must be finite");
    }
    let x = data.x();
    let dist: Vec<f64> = x.iter().map(|v| (v - cutoff).abs()).collect();
    let mut left: Vec<usize> = Vec::new();
    let mut right: Vec<usize> = Vec::new();
    let mut dropped = 0;
    for (i, &v) in x.iter().enumerate() {
        match v.partial_cmp(&cutoff) {
            Some(Ordering::Less) => left.push(i),
            Some(Ordering::Greater) => right.push(i),
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        warn!("{dropped} observation(s) exactly at the cutoff were dropped");
    }
    if left.len() < q || right.len() < q {
        return invalid(format!(
            "need at least q = {q} points on each side of the cutoff, found {} left and {} right",
            left.len(),
            right.len()
        ));
    }
    let (ln, lnext) = select_nearest(&mut left, &dist, q);
    let (rn, rnext) = select_nearest(&mut right, &dist, q);
    let left = assemble(data, ln, lnext);
    let right = assemble(data, rn, rnext);
    let mut s_n = left.s_n.clone();
    s_n.extend_from_slice(&right.s_n);
    Ok(TwoSidedIos { q, m: data.m(), s_n, left, right, dropped_at_cutoff: dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ties() -> Dataset {
        Dataset::from_pairs(&[(1.0, 10.0), (-1.0, 11.0), (0.5, 12.0), (-0.5, 13.0), (2.0, 14.0)]).unwrap()
    }

    #[test]
    fn ties_prefer_smaller_index() {
        let d = ties();
        let r = extract(&d, &[0.0], 3).unwrap();
        assert_eq!(r.nearest, vec![2, 3, 0]);
        assert_eq!(r.iota, vec![0, 2, 3]);
        assert_eq!(r.s_n, vec![10.0, 12.0, 13.0]);
        assert_eq!(r.r_k_plus_1, Some(1.0));
    }

    #[test]
    fn ranked_matches_plain() {
        let d = ties();
        for k in 1..=5 {
            let a = extract(&d, &[0.1], k).unwrap();
            let mut b = extract_ranked(&d, &[0.1], k).unwrap();
            let ranks = b.ranks.take().unwrap();
            assert_eq!(a, b);
            for (i, &r) in ranks.iter().enumerate() {
                assert_eq!(r <= k, a.iota.contains(&i));
            }
        }
    }

    #[test]
    fn k_equal_n_has_no_next_radius() {
        let d = ties();
        let r = extract(&d, &[0.0], 5).unwrap();
        assert_eq!(r.s_n, d.y().to_vec());
        assert_eq!(r.r_k_plus_1, None);
    }

    #[test]
    fn rejects_bad_arguments() {
        let d = ties();
        assert!(extract(&d, &[0.0], 0).is_err());
        assert!(extract(&d, &[0.0], 6).is_err());
        assert!(extract(&d, &[0.0, 1.0], 1).is_err());
        assert!(extract_two_sided(&d, 0.0, 0).is_err());
        assert!(extract_two_sided(&d, 0.0, 3).is_err());
    }

    #[test]
    fn cutoff_points_are_dropped() {
        let d = Dataset::from_pairs(&[(0.0, 1.0), (-0.1, 2.0), (0.2, 3.0), (0.0, 4.0)]).unwrap();
        let r = extract_two_sided(&d, 0.0, 1).unwrap();
        assert_eq!(r.dropped_at_cutoff, 2);
        assert_eq!(r.s_n, vec![2.0, 3.0]);
    }
}
