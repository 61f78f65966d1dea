//! The local coherence functional
//!
//! ```text
//! H(k,x) = sum_(l>=0) 2^(-l r) avg_(|x-y|<=2^-k) |(F_y - F_x)(phi_y^(k+l))|
//!        + sum_(l>=0) avg_(|z-x|<=2^-k) avg_(|y-z|<=2^-k-l) |(F_z - F_y)(phi_y^(k+l))|
//! ```
//!
//! truncated at `l < L` with geometric tail extrapolation, plus the per-level
//! coherence coefficient fields and the envelope fit of their growth
//! exponent.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::germ::{Germ, TestFamily};
use crate::grid::{compensated_sum, DyadicGrid, SampledFunction};
use crate::mollifier::MollifierStack;

/// Consecutive-term ratio above which the truncated sums are declared
/// non-decaying.
pub const DIVERGENCE_RATIO: f64 = 0.95;

/// How many trailing terms the decay check inspects.
pub const DIVERGENCE_WINDOW: usize = 4;

/// Real values indexed by (scale k, base point x), with a per-level stride.
#[derive(Clone, Debug)]
pub struct MultiscaleField {
    levels: Vec<LevelSlice>,
    meta: String,
}

/// One scale of a `MultiscaleField`: entry `j` sits at grid index
/// `j * stride`.
#[derive(Clone, Debug)]
pub struct LevelSlice {
    pub k: u32,
    pub stride: usize,
    pub values: Vec<f64>,
    pub grid: DyadicGrid,
}

impl LevelSlice {
    pub fn point(&self, j: usize) -> f64 {
        self.grid.point(j * self.stride)
    }
}

/// Base points per level: every grid point at stride `2^(n_max - k - 3)`,
/// eight points per ball radius at scale k.
pub fn default_stride(grid: DyadicGrid, k: u32) -> usize {
    let shift = grid.n_max().saturating_sub(k + 3);
    1usize << shift.min(grid.n_max())
}

impl MultiscaleField {
    pub fn new(levels: Vec<LevelSlice>, meta: impl Into<String>) -> Self {
        MultiscaleField {
            levels,
            meta: meta.into(),
        }
    }

    /// Build a field by evaluating `f(k, x)` on the default base-point sets.
    pub fn from_fn(
        grid: DyadicGrid,
        k_range: RangeInclusive<u32>,
        meta: impl Into<String>,
        f: impl Fn(u32, f64) -> f64 + Sync,
    ) -> Self {
        let levels = k_range
            .map(|k| {
                let stride = default_stride(grid, k);
                let count = grid.samples() / stride;
                let values = (0..count)
                    .into_par_iter()
                    .map(|j| f(k, grid.point(j * stride)))
                    .collect();
                LevelSlice {
                    k,
                    stride,
                    values,
                    grid,
                }
            })
            .collect();
        MultiscaleField::new(levels, meta)
    }

    pub fn levels(&self) -> &[LevelSlice] {
        &self.levels
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn k_min(&self) -> u32 {
        self.levels.iter().map(|l| l.k).min().unwrap_or(0)
    }

    pub fn k_max(&self) -> u32 {
        self.levels.iter().map(|l| l.k).max().unwrap_or(0)
    }

    pub fn level(&self, k: u32) -> Option<&LevelSlice> {
        self.levels.iter().find(|l| l.k == k)
    }

    /// Restriction to the levels in `k_range`.
    pub fn restrict(&self, k_range: RangeInclusive<u32>) -> MultiscaleField {
        MultiscaleField {
            levels: self
                .levels
                .iter()
                .filter(|l| k_range.contains(&l.k))
                .cloned()
                .collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> MultiscaleField {
        MultiscaleField {
            levels: self
                .levels
                .iter()
                .map(|l| LevelSlice {
                    values: l.values.iter().map(|&v| f(v)).collect(),
                    ..l.clone()
                })
                .collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|l| l.values.iter())
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn is_finite(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.values.iter().all(|v| v.is_finite()))
    }
}

/// Truncated coherence field with tail diagnostics.
#[derive(Clone, Debug)]
pub struct CoherenceReport {
    pub field: MultiscaleField,
    pub truncation: usize,
    /// Geometric tail extrapolation per (k, x), aligned with `field`.
    pub tail_estimate: MultiscaleField,
    /// True when the per-l terms fail to decay by `DIVERGENCE_RATIO` over
    /// the last `DIVERGENCE_WINDOW` computed terms at some (k, x).
    pub divergence_flag: bool,
    /// Per-level truncated partial sums of the first (weighted) sum only,
    /// summed over base points; used by growth diagnostics.
    pub first_sum_by_l: Vec<Vec<f64>>,
}

fn budget_check(grid: DyadicGrid, k_max: u32, trunc: usize) -> Result<()> {
    let finest = k_max + trunc as u32;
    if finest > grid.n_max() - 2 {
        return Err(Error::ScaleBudgetExceeded {
            finest,
            limit: grid.n_max() - 2,
        });
    }
    Ok(())
}

struct TermSequence {
    total: f64,
    tail: f64,
    flagged: bool,
}

/// Tail and decay diagnostics of a nonnegative term sequence.
fn analyze_terms(terms: &[f64]) -> TermSequence {
    let total = compensated_sum(terms.iter().copied());
    let m = terms.len();
    if m < DIVERGENCE_WINDOW {
        return TermSequence {
            total,
            tail: 0.0,
            flagged: false,
        };
    }
    let window = &terms[m - DIVERGENCE_WINDOW..];
    let floor = 1e-14 * terms.iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-300);
    let mut flagged = true;
    for pair in window.windows(2) {
        let decayed = pair[1] <= DIVERGENCE_RATIO * pair[0] || pair[1] <= floor;
        if decayed {
            flagged = false;
        }
    }
    let last = window[DIVERGENCE_WINDOW - 1];
    let first = window[0];
    let tail = if last <= floor {
        0.0
    } else {
        let ratio = (last / first).powf(1.0 / (DIVERGENCE_WINDOW as f64 - 1.0));
        if ratio >= 1.0 {
            f64::INFINITY
        } else {
            last * ratio / (1.0 - ratio)
        }
    };
    TermSequence {
        total,
        tail,
        flagged,
    }
}

/// Per-(k,x) truncated evaluation of both coherence sums.
///
/// The inner averages run over all grid points of their balls; when the germ
/// exposes a two-valued difference profile, the double average uses an exact
/// prefix-count sliding window instead of the quadratic pair loop.
pub fn h_field(
    germ: &dyn Germ,
    stack: &MollifierStack,
    r: f64,
    k_range: RangeInclusive<u32>,
    trunc: usize,
) -> Result<CoherenceReport> {
    h_field_impl(germ, stack, r, k_range, trunc, false)
}

/// Negative-regularity variant: the second sum runs over `l in {-k, ..., 0}`
/// instead of `l >= 0` (first sum unchanged).
pub fn h_field_negative(
    germ: &dyn Germ,
    stack: &MollifierStack,
    r: f64,
    k_range: RangeInclusive<u32>,
    trunc: usize,
) -> Result<CoherenceReport> {
    h_field_impl(germ, stack, r, k_range, trunc, true)
}

fn h_field_impl(
    germ: &dyn Germ,
    stack: &MollifierStack,
    r: f64,
    k_range: RangeInclusive<u32>,
    trunc: usize,
    negative: bool,
) -> Result<CoherenceReport> {
    if r <= 0.0 {
        return Err(Error::Config("coherence needs r > 0".into()));
    }
    let grid = stack.grid();
    let (k_min, k_max) = (*k_range.start(), *k_range.end());
    budget_check(grid, k_max, trunc)?;

    let two_valued_profile = germ.difference_profile().and_then(|p| {
        let mut distinct: Vec<f64> = Vec::new();
        for &v in p.values() {
            if !distinct.iter().any(|&d| d == v) {
                distinct.push(v);
                if distinct.len() > 2 {
                    return None;
                }
            }
        }
        (distinct.len() == 2).then(|| (p.clone(), distinct[0], distinct[1]))
    });

    let mut levels = Vec::new();
    let mut tails = Vec::new();
    let mut flagged = false;
    let mut first_sum_by_l = Vec::new();

    for k in k_min..=k_max {
        // coarse test functions for the negative-variant second sum
        let neg_families: Vec<TestFamily> = if negative {
            (0..=k)
                .map(|j| TestFamily::dilated(&stack.phi, j))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let families: Vec<TestFamily> = (0..trunc as u32)
            .map(|l| TestFamily::dilated(&stack.phi, k + l))
            .collect::<Result<_>>()?;
        let stride = default_stride(grid, k);
        let count = grid.samples() / stride;
        let radius = (2.0f64).powi(-(k as i32));

        let per_x: Vec<(f64, f64, bool, Vec<f64>)> = (0..count)
            .into_par_iter()
            .map(|j| {
                let ix = j * stride;
                let mut terms = Vec::with_capacity(trunc);
                let mut firsts = Vec::with_capacity(trunc);
                for (l, family) in families.iter().enumerate() {
                    let weight = (2.0f64).powf(-(l as f64) * r);
                    let first = first_sum_term(germ, family, grid, ix, radius);
                    let second = if negative {
                        0.0
                    } else {
                        second_sum_term(
                            germ,
                            family,
                            grid,
                            ix,
                            radius,
                            k,
                            l as i32,
                            two_valued_profile.as_ref(),
                        )
                    };
                    firsts.push(weight * first);
                    terms.push(weight * first + second);
                }
                if negative {
                    // second sum over l in {-k..0}: coarse scales k+l in {0..k}
                    let mut neg_total = 0.0;
                    for (scale, family) in neg_families.iter().enumerate() {
                        let l = scale as i32 - k as i32;
                        neg_total += second_sum_term(
                            germ,
                            family,
                            grid,
                            ix,
                            radius,
                            k,
                            l,
                            two_valued_profile.as_ref(),
                        );
                    }
                    if let Some(t0) = terms.first_mut() {
                        *t0 += neg_total;
                    }
                }
                let analysis = analyze_terms(&terms);
                (analysis.total, analysis.tail, analysis.flagged, firsts)
            })
            .collect();

        let mut values = Vec::with_capacity(count);
        let mut tail_values = Vec::with_capacity(count);
        let mut first_acc = vec![0.0; trunc];
        for (total, tail, flag, firsts) in per_x {
            values.push(total);
            tail_values.push(tail);
            flagged |= flag;
            for (a, f) in first_acc.iter_mut().zip(&firsts) {
                *a += f;
            }
        }
        first_sum_by_l.push(first_acc);
        levels.push(LevelSlice {
            k,
            stride,
            values,
            grid,
        });
        tails.push(LevelSlice {
            k,
            stride,
            values: tail_values,
            grid,
        });
    }

    Ok(CoherenceReport {
        field: MultiscaleField::new(levels, format!("H[{}]", germ.kind())),
        truncation: trunc,
        tail_estimate: MultiscaleField::new(tails, "tail"),
        divergence_flag: flagged,
        first_sum_by_l,
    })
}

/// `avg_(|x-y|<=radius) |(F_y - F_x)(phi_y^(k+l))|` over grid points `y`.
fn first_sum_term(
    germ: &dyn Germ,
    family: &TestFamily,
    grid: DyadicGrid,
    ix: usize,
    radius: f64,
) -> f64 {
    let x = grid.point(ix);
    let reach = ((radius + grid.spacing() / 2.0) / grid.spacing()).floor() as i64;
    let n = grid.samples() as i64;
    let reach = reach.min(n / 2);
    let count = (2 * reach + 1).min(n);
    let sum = compensated_sum((-reach..=reach).take(count as usize).map(|m| {
        let iy = grid.wrap(ix as i64 + m);
        let y = grid.point(iy);
        germ.difference_view(x, y, &family.view(iy)).abs()
    }));
    sum / count as f64
}

/// Nested ball averages of `|(F_z - F_y)(phi_y^(k+l))|`: `z` over the
/// radius-`2^-k` ball at `x`, `y` over the radius-`2^(-k-l)` ball at `z`.
#[allow(clippy::too_many_arguments)]
fn second_sum_term(
    germ: &dyn Germ,
    family: &TestFamily,
    grid: DyadicGrid,
    ix: usize,
    outer_radius: f64,
    k: u32,
    l: i32,
    two_valued: Option<&(SampledFunction, f64, f64)>,
) -> f64 {
    let h = grid.spacing();
    let n = grid.samples() as i64;
    let inner_radius = (2.0f64).powi(-(k as i32 + l)).min(1.0);
    let outer_reach = (((outer_radius + h / 2.0) / h).floor() as i64).min(n / 2);
    let inner_reach = (((inner_radius + h / 2.0) / h).floor() as i64).min(n / 2);
    let outer_count = 2 * outer_reach + 1;
    let inner_count = (2 * inner_reach + 1).min(n);

    if let Some((profile, a, b)) = two_valued {
        // |c(z) - c(y)| = |a - b| 1[c(z) != c(y)]; count opposite values in
        // the sliding window by prefix sums (exact integer arithmetic)
        let c = profile.values();
        let nn = n as usize;
        let mut prefix_a = vec![0u32; nn + 1];
        for i in 0..nn {
            prefix_a[i + 1] = prefix_a[i] + u32::from(c[i] == *a);
        }
        let count_a = |lo: i64, hi: i64| -> i64 {
            // number of indices in [lo, hi] (mod n) whose value equals a
            let total = hi - lo + 1;
            if total >= n {
                return prefix_a[nn] as i64;
            }
            let lo_w = lo.rem_euclid(n) as usize;
            let hi_w = hi.rem_euclid(n) as usize;
            if lo_w <= hi_w {
                (prefix_a[hi_w + 1] - prefix_a[lo_w]) as i64
            } else {
                (prefix_a[nn] - prefix_a[lo_w]) as i64 + prefix_a[hi_w + 1] as i64
            }
        };
        let gap = (a - b).abs() * family.mass().abs();
        let total_a = prefix_a[nn] as i64;
        let sum = compensated_sum((-outer_reach..=outer_reach).map(|m| {
            let iz = ix as i64 + m;
            let z_val = c[iz.rem_euclid(n) as usize];
            let in_window = (2 * inner_reach + 1).min(n);
            let a_in_window = if in_window >= n {
                total_a
            } else {
                count_a(iz - inner_reach, iz + inner_reach)
            };
            let opposite = if z_val == *a {
                in_window - a_in_window
            } else {
                a_in_window
            };
            gap * opposite as f64 / in_window as f64
        }));
        return sum / outer_count as f64;
    }

    let sum = compensated_sum((-outer_reach..=outer_reach).map(|m| {
        let iz = grid.wrap(ix as i64 + m);
        let z = grid.point(iz);
        let inner = compensated_sum((-inner_reach..=inner_reach).take(inner_count as usize).map(
            |mm| {
                let iy = grid.wrap(iz as i64 + mm);
                let y = grid.point(iy);
                germ.difference_view(y, z, &family.view(iy)).abs()
            },
        ));
        inner / inner_count as f64
    }));
    sum / outer_count as f64
}

/// The coefficient field
/// `(k,x) -> avg_(|h|<=2^-k) |(F_(x+h) - F_x)(phi^(k+l)_(x+h))|`.
pub fn coherence_coefficients(
    germ: &dyn Germ,
    stack: &MollifierStack,
    k_range: RangeInclusive<u32>,
    l: u32,
) -> Result<MultiscaleField> {
    let grid = stack.grid();
    let (k_min, k_max) = (*k_range.start(), *k_range.end());
    budget_check(grid, k_max, l as usize)?;
    let mut levels = Vec::new();
    for k in k_min..=k_max {
        let family = TestFamily::dilated(&stack.phi, k + l)?;
        let stride = default_stride(grid, k);
        let count = grid.samples() / stride;
        let radius = (2.0f64).powi(-(k as i32));
        let values: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|j| first_sum_term(germ, &family, grid, j * stride, radius))
            .collect();
        levels.push(LevelSlice {
            k,
            stride,
            values,
            grid,
        });
    }
    Ok(MultiscaleField::new(
        levels,
        format!("coherence-coefficients[{}, l = {l}]", germ.kind()),
    ))
}

/// Envelope fit of `value <= 2^(l alpha) A` from measured `(l, value)` pairs:
/// least-squares slope on `log2`, then the intercept raised so the bound
/// holds at every sample.
pub fn fit_alpha_envelope(data: &[(u32, f64)]) -> Result<(f64, f64)> {
    if data.len() < 3 {
        return Err(Error::Config("exponent fit needs at least 3 points".into()));
    }
    if data.iter().all(|&(_, v)| v == 0.0) {
        return Ok((0.0, 0.0));
    }
    if data.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NonpositiveValue);
    }
    let n = data.len() as f64;
    let mx: f64 = data.iter().map(|&(l, _)| l as f64).sum::<f64>() / n;
    let my: f64 = data.iter().map(|&(_, v)| v.log2()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(l, v) in data {
        num += (l as f64 - mx) * (v.log2() - my);
        den += (l as f64 - mx) * (l as f64 - mx);
    }
    let alpha = num / den;
    let intercept = data
        .iter()
        .map(|&(l, v)| v.log2() - alpha * l as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((alpha, (2.0f64).powf(intercept)))
}

/// Least-squares slope of `log2(value)` against `x`; shared by the
/// convergence-rate checks.
pub fn fit_log2_slope(data: &[(f64, f64)]) -> f64 {
    let n = data.len() as f64;
    let mx: f64 = data.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = data.iter().map(|p| p.1.abs().max(1e-300).log2()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, v) in data {
        num += (x - mx) * (v.abs().max(1e-300).log2() - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}
