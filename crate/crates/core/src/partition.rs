//! Uniform random partitions of [0, 1], their merges, and the exact
//! combinatorics of how two independent partitions interleave.
//!
//! A partition with `k` cuts `0 < U_(1) < … < U_(k) < 1` has `k + 1` cells;
//! cell `j` is the half-open interval `(U_(j), U_(j+1)]` with the sentinels
//! `U_(0) = 0` and `U_(k+1) = 1`. The point `x = 0` is assigned to cell 0.

use rand::distr::Open01;
use rand::Rng;

use crate::error::{PurfError, Result};

/// Sorted cut points of a partition of [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct UniformPartition {
    cuts: Vec<f64>,
}

impl UniformPartition {
    /// `k` i.i.d. Uniform(0, 1) cuts, sorted. An exact tie (probability
    /// zero) triggers a full redraw.
    pub fn sample<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        loop {
            let mut cuts: Vec<f64> = (0..k).map(|_| rng.sample(Open01)).collect();
            cuts.sort_unstable_by(f64::total_cmp);
            if cuts.windows(2).all(|w| w[0] < w[1]) {
                return UniformPartition { cuts };
            }
        }
    }

    /// Wraps explicit cuts, which must be strictly increasing inside (0, 1).
    pub fn from_cuts(cuts: Vec<f64>) -> Result<Self> {
        if let Some(&c) = cuts.iter().find(|c| !(**c > 0.0 && **c < 1.0)) {
            return Err(PurfError::InvalidArgument(format!("cut {c} is not inside (0, 1)")));
        }
        if let Some(w) = cuts.windows(2).find(|w| w[0] >= w[1]) {
            return Err(PurfError::InvalidArgument(format!(
                "cuts must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(UniformPartition { cuts })
    }

    /// Number of cuts.
    pub fn k(&self) -> usize {
        self.cuts.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    /// Endpoints `(U_(j), U_(j+1))` of cell `j`.
    pub fn cell(&self, j: usize) -> (f64, f64) {
        let lo = if j == 0 { 0.0 } else { self.cuts[j - 1] };
        let hi = if j == self.cuts.len() { 1.0 } else { self.cuts[j] };
        (lo, hi)
    }

    /// Iterator over all cells in order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.num_cells()).map(|j| self.cell(j))
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.cells().map(|(lo, hi)| hi - lo).collect()
    }

    /// Index of the cell `(U_(j), U_(j+1)]` containing `x`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(PurfError::OutOfUnitInterval { what: "x", value: x });
        }
        Ok(self.locate_unchecked(x))
    }

    /// As [`locate`](Self::locate) without the domain check.
    #[inline]
    pub fn locate_unchecked(&self, x: f64) -> usize {
        self.cuts.partition_point(|&c| c < x)
    }

    /// Cell index of every point of an ascending sequence, by one merge walk.
    pub fn locate_sorted(&self, xs_ascending: impl Iterator<Item = f64>) -> Vec<usize> {
        let mut j = 0;
        xs_ascending
            .map(|x| {
                while j < self.cuts.len() && self.cuts[j] < x {
                    j += 1;
                }
                j
            })
            .collect()
    }

    /// A bucketed index giving the same answers as [`locate_unchecked`](Self::locate_unchecked)
    /// in expected O(1) per query.
    pub fn locator(&self) -> CellLocator<'_> {
        let buckets = (4 * self.num_cells()).next_power_of_two();
        let scale = buckets as f64;
        let start = (0..=buckets)
            .map(|b| self.cuts.partition_point(|&c| c < b as f64 / scale) as u32)
            .collect();
        CellLocator {
            cuts: &self.cuts,
            start,
            scale,
        }
    }
}

/// See [`UniformPartition::locator`].
#[derive(Debug, Clone)]
pub struct CellLocator<'a> {
    cuts: &'a [f64],
    /// `start[b]` counts the cuts below `b / scale`.
    start: Vec<u32>,
    /// A power of two, so bucket edges and `x · scale` are exact.
    scale: f64,
}

impl CellLocator<'_> {
    /// Cell of `x ∈ [0, 1]`.
    #[inline]
    pub fn locate(&self, x: f64) -> usize {
        let b = ((x * self.scale) as usize).min(self.start.len() - 1);
        let mut j = self.start[b] as usize;
        while j < self.cuts.len() && self.cuts[j] < x {
            j += 1;
        }
        j
    }
}

/// Which partition a merged cut came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    First,
    Second,
}

impl Origin {
    /// The label `1` or `2`.
    pub fn label(self) -> u8 {
        match self {
            Origin::First => 1,
            Origin::Second => 2,
        }
    }
}

/// Sorted union `V_(1) < … < V_(2k)` of two partitions' cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedPartition {
    cuts: Vec<f64>,
    origin: Vec<Origin>,
}

impl MergedPartition {
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn origin(&self) -> &[Origin] {
        &self.origin
    }

    pub fn labels(&self) -> Vec<u8> {
        self.origin.iter().map(|o| o.label()).collect()
    }
}

fn check_sizes(p1: &UniformPartition, p2: &UniformPartition) -> Result<()> {
    if p1.k() != p2.k() {
        return Err(PurfError::SizeMismatch {
            left: p1.k(),
            right: p2.k(),
        });
    }
    Ok(())
}

/// Merges two partitions of equal size, recording each cut's origin. An
/// exact tie across the partitions is reported as [`PurfError::Tie`].
pub fn merge(p1: &UniformPartition, p2: &UniformPartition) -> Result<MergedPartition> {
    check_sizes(p1, p2)?;
    let (a, b) = (p1.cuts(), p2.cuts());
    let mut cuts = Vec::with_capacity(a.len() + b.len());
    let mut origin = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_first = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => return Err(PurfError::Tie(*x)),
            (Some(x), Some(y)) => x < y,
            (Some(_), None) => true,
            _ => false,
        };
        if take_first {
            cuts.push(a[i]);
            origin.push(Origin::First);
            i += 1;
        } else {
            cuts.push(b[j]);
            origin.push(Origin::Second);
            j += 1;
        }
    }
    Ok(MergedPartition { cuts, origin })
}

/// Number of pairs `(r, s)`, `1 ≤ r ≤ k−2`, `1 ≤ s ≤ k−1`, such that
/// `U²_(s) < U¹_(r) < U¹_(r+1) < U¹_(r+2) < U²_(s+1)`: three consecutive cuts
/// of `p1` strictly inside one interior cell of `p2`.
///
/// One merge walk: a maximal run of `ℓ` cuts of `p1` between two adjacent
/// cuts of `p2` contributes `max(ℓ − 2, 0)`. Runs before the first or after
/// the last cut of `p2` lie in boundary cells and do not count.
pub fn count_m12(p1: &UniformPartition, p2: &UniformPartition) -> Result<usize> {
    check_sizes(p1, p2)?;
    let (a, b) = (p1.cuts(), p2.cuts());
    let mut count = 0;
    let mut i = 0;
    for (s, &right) in b.iter().enumerate() {
        let mut run = 0;
        while i < a.len() && a[i] < right {
            run += 1;
            i += 1;
        }
        if i < a.len() && a[i] == right {
            return Err(PurfError::Tie(right));
        }
        if s > 0 && run > 2 {
            count += run - 2;
        }
    }
    Ok(count)
}

/// `E[M₁,₂]` for two independent uniform partitions with `k` cuts each:
/// `(k−2)/(2(2k−1)) · (k−3 + 4/(k+1))` for `k ≥ 3`, and 0 for `k ≤ 2`.
///
/// The equivalent product `(k−2)(k−3)/(2(2k−1)) · (1 + 4/((k+1)(k−3)))` is
/// `0·∞` at `k = 3`; the factored form is finite there (it gives 1/10).
pub fn expected_m12(k: u64) -> f64 {
    if k <= 2 {
        return 0.0;
    }
    let kf = k as f64;
    (kf - 2.0) / (2.0 * (2.0 * kf - 1.0)) * (kf - 3.0 + 4.0 / (kf + 1.0))
}

/// Table of `ln(n!)` for `n ≤ max`.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for n in 1..=max {
            acc += (n as f64).ln();
            table.push(acc);
        }
        LnFactorial { table }
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.table[n]
    }
}

fn check_crossing_indices(k: usize, r: usize, s: usize) -> Result<()> {
    if k < 3 || !(1..=k - 2).contains(&r) || !(1..=k - 1).contains(&s) {
        return Err(PurfError::InvalidArgument(format!(
            "crossing probability needs k >= 3, 1 <= r <= k-2, 1 <= s <= k-1; got k={k}, r={r}, s={s}"
        )));
    }
    Ok(())
}

fn crossing_with_table(lf: &LnFactorial, k: usize, r: usize, s: usize) -> f64 {
    // i cuts of p1 fall below U²_(s) and j below U²_(s+1);
    // (U²_(s), U²_(s+1) − U²_(s), 1 − U²_(s+1)) ~ Dirichlet(s, 1, k−s).
    let base = 2.0 * lf.get(k) - lf.get(s - 1) - lf.get(k - s - 1) - lf.get(2 * k);
    let mut total = 0.0;
    for j in r + 2..=k {
        let upper = lf.get(2 * k - j - s - 1) - lf.get(k - j);
        for i in 0..r {
            total += (base + upper + lf.get(i + s - 1) - lf.get(i)).exp();
        }
    }
    total
}

/// `P(U²_(s) < U¹_(r) < U¹_(r+1) < U¹_(r+2) < U²_(s+1))` for independent
/// uniform partitions with `k` cuts, as the double sum over the number of
/// `U¹` cuts below `U²_(s)` (`i < r`) and below `U²_(s+1)` (`j ≥ r+2`).
/// Terms are evaluated in log space.
pub fn crossing_probability(k: usize, r: usize, s: usize) -> Result<f64> {
    check_crossing_indices(k, r, s)?;
    Ok(crossing_with_table(&LnFactorial::new(2 * k), k, r, s))
}

/// `Σ_{r,s} crossing_probability(k, r, s)`, which equals [`expected_m12`].
pub fn crossing_probability_total(k: usize) -> f64 {
    if k < 3 {
        return 0.0;
    }
    let lf = LnFactorial::new(2 * k);
    let mut total = 0.0;
    for r in 1..=k - 2 {
        for s in 1..=k - 1 {
            total += crossing_with_table(&lf, k, r, s);
        }
    }
    total
}

/// `E[d^m]` for a spacing `d = U_(j+1) − U_(j)` of a uniform partition with
/// `k` cuts. Spacings are Beta(1, k) with density `k(1−t)^{k−1}`, so the
/// moment is `m!·k!/(k+m)!`.
pub fn spacing_moment(k: u64, m: u32) -> f64 {
    (1..=m as u64).map(|i| i as f64 / (k + i) as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::MasterSeed;

    fn part(c: &[f64]) -> UniformPartition {
        UniformPartition::from_cuts(c.to_vec()).unwrap()
    }

    #[test]
    fn empty_partition_is_one_cell() {
        let p = UniformPartition::sample(0, &mut MasterSeed(0).stream(&[0]));
        assert_eq!(p.num_cells(), 1);
        assert_eq!(p.cell(0), (0.0, 1.0));
        assert_eq!(p.locate(0.0).unwrap(), 0);
        assert_eq!(p.locate(1.0).unwrap(), 0);
    }

    #[test]
    fn sampled_cuts_are_sorted_and_interior() {
        let p = UniformPartition::sample(3, &mut MasterSeed(5).stream(&[0]));
        assert_eq!(p.k(), 3);
        assert!(p.cuts().windows(2).all(|w| w[0] < w[1]));
        assert!(p.cuts().iter().all(|c| *c > 0.0 && *c < 1.0));
    }

    #[test]
    fn locate_uses_left_open_cells() {
        let p = part(&[0.5]);
        assert_eq!(p.locate(0.5).unwrap(), 0);
        assert_eq!(p.locate(0.7).unwrap(), 1);
        assert_eq!(part(&[0.2, 0.8]).locate(1.0).unwrap(), 2);
        assert_eq!(part(&[0.2, 0.8]).locate(0.0).unwrap(), 0);
        assert!(matches!(p.locate(1.2), Err(PurfError::OutOfUnitInterval { .. })));
        assert!(p.locate(-0.1).is_err());
        assert!(p.locate(f64::NAN).is_err());
    }

    #[test]
    fn locate_sorted_matches_binary_search() {
        let p = part(&[0.1, 0.25, 0.5, 0.9]);
        let xs = [0.0, 0.1, 0.1000001, 0.3, 0.5, 0.95, 1.0];
        let walk = p.locate_sorted(xs.iter().copied());
        let bs: Vec<usize> = xs.iter().map(|x| p.locate(*x).unwrap()).collect();
        assert_eq!(walk, bs);
    }

    #[test]
    fn from_cuts_rejects_bad_input() {
        assert!(UniformPartition::from_cuts(vec![0.5, 0.5]).is_err());
        assert!(UniformPartition::from_cuts(vec![0.6, 0.5]).is_err());
        assert!(UniformPartition::from_cuts(vec![0.0]).is_err());
        assert!(UniformPartition::from_cuts(vec![1.0]).is_err());
    }

    #[test]
    fn merge_examples() {
        let m = merge(&part(&[0.3]), &part(&[0.6])).unwrap();
        assert_eq!(m.cuts(), &[0.3, 0.6]);
        assert_eq!(m.labels(), vec![1, 2]);
        let m = merge(&part(&[0.2, 0.9]), &part(&[0.4, 0.5])).unwrap();
        assert_eq!(m.cuts(), &[0.2, 0.4, 0.5, 0.9]);
        assert_eq!(m.labels(), vec![1, 2, 2, 1]);
    }

    #[test]
    fn merge_errors() {
        assert!(matches!(merge(&part(&[0.3]), &part(&[0.3])), Err(PurfError::Tie(_))));
        assert!(matches!(
            merge(&part(&[0.3]), &part(&[0.4, 0.5])),
            Err(PurfError::SizeMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn count_m12_examples() {
        assert_eq!(count_m12(&part(&[0.3, 0.4]), &part(&[0.1, 0.9])).unwrap(), 0);
        let p1 = part(&[0.30, 0.35, 0.40]);
        let p2 = part(&[0.1, 0.9, 0.95]);
        assert_eq!(count_m12(&p1, &p2).unwrap(), 1);
        // same triple but inside the boundary cell (0, U²_(1)]
        assert_eq!(count_m12(&p1, &part(&[0.5, 0.6, 0.7])).unwrap(), 0);
        assert!(matches!(
            count_m12(&p1, &part(&[0.1, 0.35, 0.9])),
            Err(PurfError::Tie(_))
        ));
    }

    #[test]
    fn expected_m12_values() {
        assert_eq!(expected_m12(0), 0.0);
        assert_eq!(expected_m12(2), 0.0);
        assert!((expected_m12(3) - 0.1).abs() < 1e-15);
        assert!((expected_m12(4) - 9.0 / 35.0).abs() < 1e-15);
        // the displayed product form agrees for k >= 4
        for k in 4..200u64 {
            let kf = k as f64;
            let product = (kf - 2.0) * (kf - 3.0) / (2.0 * (2.0 * kf - 1.0)) * (1.0 + 4.0 / ((kf + 1.0) * (kf - 3.0)));
            assert!((product - expected_m12(k)).abs() <= 1e-12 * product, "k={k}");
        }
    }

    #[test]
    fn crossing_probability_domain() {
        assert!(crossing_probability(2, 1, 1).is_err());
        assert!(crossing_probability(5, 0, 1).is_err());
        assert!(crossing_probability(5, 4, 1).is_err());
        assert!(crossing_probability(5, 1, 5).is_err());
        let p = crossing_probability(5, 2, 3).unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn crossing_probability_at_k3() {
        // 3 cuts of p1 inside cell s of p2: one interleaving out of C(6,3) = 20 per s
        assert!((crossing_probability(3, 1, 1).unwrap() - 0.05).abs() < 1e-14);
        assert!((crossing_probability(3, 1, 2).unwrap() - 0.05).abs() < 1e-14);
    }

    #[test]
    fn spacing_moments() {
        assert!((spacing_moment(1, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(spacing_moment(0, 4), 1.0);
        for k in 0..50u64 {
            let kf = k as f64;
            assert!((spacing_moment(k, 1) * (kf + 1.0) - 1.0).abs() < 1e-14);
            assert!((spacing_moment(k, 2) - 2.0 / ((kf + 1.0) * (kf + 2.0))).abs() < 1e-15);
            assert!(((kf + 1.0) * spacing_moment(k, 3) - 6.0 / ((kf + 2.0) * (kf + 3.0))).abs() < 1e-15);
        }
    }
}
