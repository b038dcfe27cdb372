//! Piecewise-constant functions on [0, 1] and their exact integrals against
//! the design law.

use crate::model::DesignLaw;

/// A step function with value `values[j]` on `(cuts[j-1], cuts[j]]`, using
/// the sentinels 0 and 1 at the ends. `values.len() == cuts.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    cuts: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// Panics if the lengths do not match.
    pub fn new(cuts: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), cuts.len() + 1, "a step function needs one value per cell");
        StepFunction { cuts, values }
    }

    pub fn constant(value: f64) -> Self {
        StepFunction {
            cuts: Vec::new(),
            values: vec![value],
        }
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.cuts.partition_point(|&c| c < x)]
    }

    /// Sub-intervals of [0, 1] on which the function is constant, with values.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(j, &v)| {
            let lo = if j == 0 { 0.0 } else { self.cuts[j - 1] };
            let hi = if j == self.cuts.len() { 1.0 } else { self.cuts[j] };
            (lo, hi, v)
        })
    }

    /// Pointwise mean of several step functions, represented on the sorted
    /// union of their breakpoints. Members are added in slice order.
    pub fn average(members: &[StepFunction]) -> StepFunction {
        assert!(!members.is_empty(), "average of no step functions");
        if members.len() == 1 {
            return members[0].clone();
        }
        let grid = union_grid(members.iter().map(|m| m.cuts()));
        let mut values = vec![0.0; grid.len() + 1];
        for m in members {
            for (g, cell) in cells_on_grid(m.cuts(), &grid).enumerate() {
                values[g] += m.values[cell];
            }
        }
        let q = members.len() as f64;
        values.iter_mut().for_each(|v| *v /= q);
        StepFunction { cuts: grid, values }
    }

    /// `∫ f·g dμ`, exact: the sum over the common refinement of
    /// `f·g·P(a < X ≤ b)`.
    pub fn inner(&self, other: &StepFunction, design: &DesignLaw) -> f64 {
        let mut acc = 0.0;
        for_common_pieces(self, other, |a, b, f, g| acc += f * g * design.prob(a, b));
        acc
    }

    /// `∫ (f − g)² dμ`, exact.
    pub fn squared_distance(&self, other: &StepFunction, design: &DesignLaw) -> f64 {
        let mut acc = 0.0;
        for_common_pieces(self, other, |a, b, f, g| acc += (f - g) * (f - g) * design.prob(a, b));
        acc
    }
}

/// Sorted union of several ascending cut lists, with exact duplicates removed.
pub fn union_grid<'a>(lists: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut grid: Vec<f64> = lists.flat_map(|l| l.iter().copied()).collect();
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// For every interval of `grid` (in order), the index of the cell of `cuts`
/// containing it. `grid` must refine `cuts`.
fn cells_on_grid<'a>(cuts: &'a [f64], grid: &'a [f64]) -> impl Iterator<Item = usize> + 'a {
    let mut j = 0;
    (0..=grid.len()).map(move |g| {
        let right = if g == grid.len() { 1.0 } else { grid[g] };
        while j < cuts.len() && cuts[j] < right {
            j += 1;
        }
        j
    })
}

fn for_common_pieces(f: &StepFunction, g: &StepFunction, mut visit: impl FnMut(f64, f64, f64, f64)) {
    let (a, b) = (f.cuts(), g.cuts());
    let (mut i, mut j) = (0, 0);
    let mut lo = 0.0;
    loop {
        let next_a = a.get(i).copied().unwrap_or(1.0);
        let next_b = b.get(j).copied().unwrap_or(1.0);
        let hi = next_a.min(next_b);
        visit(lo, hi, f.values[i], g.values[j]);
        if i == a.len() && j == b.len() {
            break;
        }
        if next_a <= hi && i < a.len() {
            i += 1;
        }
        if next_b <= hi && j < b.len() {
            j += 1;
        }
        lo = hi;
    }
}
