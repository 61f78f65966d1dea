//! Dyadic grids on the unit torus: sampling, quadrature, dilation and
//! translation of test functions, periodic convolution, and ball averages.
//!
//! Everything downstream (mollifiers, germs, coherence fields, quasinorms,
//! sewing) is built on `SampledFunction` values over a `DyadicGrid`. All
//! coordinates are taken modulo 1; the representative of a difference is
//! lifted to (-1/2, 1/2].

use crate::error::{Error, Result};
use rustfft::{num_complex::Complex, FftPlanner};

/// Uniform periodic sampling of the unit torus at spacing `2^-n_max`.
///
/// The dimension field `d` is carried so types read dimension-generically;
/// all kernels in this crate are one-dimensional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicGrid {
    n_max: u32,
    d: u32,
}

impl DyadicGrid {
    pub fn new(n_max: u32) -> Result<Self> {
        if n_max < 4 {
            return Err(Error::GridTooCoarse { n_max, required: 4 });
        }
        Ok(DyadicGrid { n_max, d: 1 })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    /// Number of samples per period, `2^n_max`.
    pub fn samples(&self) -> usize {
        1usize << self.n_max
    }

    /// Grid spacing `h = 2^-n_max` (exact in binary floating point).
    pub fn spacing(&self) -> f64 {
        1.0 / self.samples() as f64
    }

    /// Coordinate of the `idx`-th sample in [0, 1).
    pub fn point(&self, idx: usize) -> f64 {
        (idx % self.samples()) as f64 * self.spacing()
    }

    /// Nearest grid index to the torus point `x` (round half away from zero).
    pub fn index_of(&self, x: f64) -> usize {
        let n = self.samples() as i64;
        let i = (x * self.samples() as f64).round() as i64;
        i.rem_euclid(n) as usize
    }

    /// Representative of `x` modulo 1 in (-1/2, 1/2].
    pub fn lift(x: f64) -> f64 {
        let r = x - x.floor();
        if r > 0.5 {
            r - 1.0
        } else {
            r
        }
    }

    /// Torus distance between two points.
    pub fn torus_distance(a: f64, b: f64) -> f64 {
        Self::lift(a - b).abs()
    }

    /// Signed index offset in (-N/2, N/2].
    pub fn signed_offset(&self, from: usize, to: usize) -> i64 {
        let n = self.samples() as i64;
        let mut m = (to as i64 - from as i64).rem_euclid(n);
        if m > n / 2 {
            m -= n;
        }
        m
    }

    pub fn wrap(&self, idx: i64) -> usize {
        idx.rem_euclid(self.samples() as i64) as usize
    }
}

/// Neumaier compensated sum; accumulation order independent to ~1 ulp.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in iter {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Real values sampled on a `DyadicGrid`.
///
/// `support_center`/`support_radius` record the closed ball outside which
/// the values are exactly zero; operations use the window to keep costs
/// proportional to the support rather than the grid.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    grid: DyadicGrid,
    values: Vec<f64>,
    support_center: f64,
    support_radius: Option<f64>,
}

impl SampledFunction {
    pub fn new(grid: DyadicGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.samples(), "value count must match grid");
        SampledFunction {
            grid,
            values,
            support_center: 0.0,
            support_radius: None,
        }
    }

    pub fn zeros(grid: DyadicGrid) -> Self {
        Self::new(grid, vec![0.0; grid.samples()])
    }

    pub fn constant(grid: DyadicGrid, c: f64) -> Self {
        Self::new(grid, vec![c; grid.samples()])
    }

    /// Sample `f` at every grid point (argument lifted to (-1/2, 1/2]).
    pub fn from_fn(grid: DyadicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.samples())
            .map(|i| f(DyadicGrid::lift(grid.point(i))))
            .collect();
        Self::new(grid, values)
    }

    /// Sample `f` on the ball `B(center, radius)` and force zeros outside.
    pub fn from_fn_supported(
        grid: DyadicGrid,
        center: f64,
        radius: f64,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let mut values = vec![0.0; grid.samples()];
        for (i, v) in values.iter_mut().enumerate() {
            let y = DyadicGrid::lift(grid.point(i) - center);
            if y.abs() <= radius {
                *v = f(y);
            }
        }
        SampledFunction {
            grid,
            values,
            support_center: center,
            support_radius: Some(radius),
        }
    }

    pub fn with_support(mut self, center: f64, radius: f64) -> Self {
        self.support_center = center;
        self.support_radius = Some(radius);
        self
    }

    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn support_center(&self) -> f64 {
        self.support_center
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    /// Index window (start, count) covering the support, the full grid if
    /// no support is recorded.
    pub fn support_window(&self) -> (usize, usize) {
        let n = self.grid.samples();
        match self.support_radius {
            None => (0, n),
            Some(r) => {
                let h = self.grid.spacing();
                let half = ((r / h).ceil() as usize + 1).min(n / 2);
                let start = self
                    .grid
                    .wrap(self.grid.index_of(self.support_center) as i64 - half as i64);
                (start, (2 * half + 1).min(n))
            }
        }
    }

    /// Trapezoid quadrature on the periodic grid: `h * sum(values)`.
    ///
    /// Exact for constants and for trigonometric modes below Nyquist.
    pub fn quadrature(&self) -> f64 {
        let (start, count) = self.support_window();
        let n = self.grid.samples();
        let sum = compensated_sum((0..count).map(|j| self.values[(start + j) % n]));
        sum * self.grid.spacing()
    }

    /// Quadrature of the pointwise product `self * other`.
    pub fn quadrature_product(&self, other: &SampledFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.samples();
        let (s1, c1) = self.support_window();
        let (s2, c2) = other.support_window();
        let (start, count) = if c1 <= c2 { (s1, c1) } else { (s2, c2) };
        let sum = compensated_sum((0..count).map(|j| {
            let i = (start + j) % n;
            self.values[i] * other.values[i]
        }));
        Ok(sum * self.grid.spacing())
    }

    /// Moment `integral of y^order * f(y) dy` about the support center.
    pub fn moment(&self, order: u32) -> f64 {
        let n = self.grid.samples();
        let (start, count) = self.support_window();
        let sum = compensated_sum((0..count).map(|j| {
            let i = (start + j) % n;
            let y = DyadicGrid::lift(self.grid.point(i) - self.support_center);
            y.powi(order as i32) * self.values[i]
        }));
        sum * self.grid.spacing()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= a;
        }
        out
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &SampledFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| op(*a, *b))
            .collect();
        let support_radius = match (self.support_radius, other.support_radius) {
            (Some(r1), Some(r2)) if self.support_center == other.support_center => {
                Some(r1.max(r2))
            }
            _ => None,
        };
        Ok(SampledFunction {
            grid: self.grid,
            values,
            support_center: self.support_center,
            support_radius,
        })
    }

    /// Reflection `y -> f(-y)` about the origin.
    pub fn reflect(&self) -> Self {
        let n = self.grid.samples();
        let mut values = vec![0.0; n];
        for (i, v) in values.iter_mut().enumerate() {
            *v = self.values[(n - i) % n];
        }
        SampledFunction {
            grid: self.grid,
            values,
            support_center: -self.support_center,
            support_radius: self.support_radius,
        }
    }

    /// Centered finite-difference derivative.
    pub fn derivative(&self) -> Self {
        let n = self.grid.samples();
        let two_h = 2.0 * self.grid.spacing();
        let values = (0..n)
            .map(|i| (self.values[(i + 1) % n] - self.values[(i + n - 1) % n]) / two_h)
            .collect();
        SampledFunction {
            grid: self.grid,
            values,
            support_center: self.support_center,
            // one extra sample on each side of the support
            support_radius: self.support_radius.map(|r| r + self.grid.spacing()),
        }
    }
}

/// The L1-normalized rescaling of `xi` to scale `2^-k` centered at `x`:
/// `y -> 2^(d k) xi(2^k (y - x))`.
///
/// `x` is snapped to the nearest grid node, so the rescaled samples are exact
/// lookups into `xi`'s own samples. Quadrature mass is preserved up to
/// quadrature error; the recorded support radius scales by `2^-k`.
pub fn dilate_translate(xi: &SampledFunction, k: u32, x: f64) -> Result<SampledFunction> {
    let grid = xi.grid();
    if k > grid.n_max() - 2 {
        return Err(Error::ScaleTooFine {
            k,
            limit: grid.n_max() - 2,
        });
    }
    let n = grid.samples();
    let ix = grid.index_of(x) as i64;
    let factor = 1i64 << k;
    let amp = factor as f64; // 2^{d k} with d = 1
    let half = n as i64 / 2;

    let base_radius = xi.support_radius().unwrap_or(0.5);
    let base_center = xi.support_center();
    let out_center = DyadicGrid::lift(grid.point(ix as usize) + base_center / amp);
    let out_radius = base_radius / amp;

    let mut values = vec![0.0; n];
    // arguments 2^k (y - x) land on grid nodes; only |2^k (y - x)| <= 1/2
    // can touch the support of xi
    let reach = half / factor;
    for m in -reach..=reach {
        let t = m * factor;
        let j = grid.wrap(ix + m);
        values[j] = amp * xi.values()[grid.wrap(t)];
    }
    Ok(SampledFunction {
        grid,
        values,
        support_center: out_center,
        support_radius: Some(out_radius.min(0.5)),
    })
}

/// Periodic convolution with quadrature weights:
/// `(f * g)(x) = h * sum_y f(y) g(x - y)`.
///
/// Computed in Fourier space; an O(N^2) direct sum serves as the independent
/// oracle in the test suite. The result's support radius is the sum of the
/// operand radii (capped at the torus half-width), and values outside that
/// ball are forced to exact zeros.
pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let n = grid.samples();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let mut a: Vec<Complex<f64>> = f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut b: Vec<Complex<f64>> = g.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut a);
    fft.process(&mut b);
    let scale = grid.spacing() / n as f64;
    for (x, y) in a.iter_mut().zip(&b) {
        *x = *x * *y * scale;
    }
    ifft.process(&mut a);
    let values: Vec<f64> = a.iter().map(|c| c.re).collect();

    let support = match (f.support_radius(), g.support_radius()) {
        (Some(r1), Some(r2)) => {
            let center = DyadicGrid::lift(f.support_center() + g.support_center());
            // radii beyond the torus half-width are informational: the
            // window machinery saturates at a full period
            Some((center, (r1 + r2).min(1.0)))
        }
        _ => None,
    };
    let mut out = SampledFunction::new(grid, values);
    if let Some((center, radius)) = support {
        out = out.with_support(center, radius);
        if radius < 0.5 {
            let (start, count) = out.support_window();
            let keep: Vec<usize> = (0..count).map(|j| (start + j) % n).collect();
            let mut mask = vec![false; n];
            for i in keep {
                mask[i] = true;
            }
            for (i, v) in out.values_mut().iter_mut().enumerate() {
                if !mask[i] {
                    *v = 0.0;
                }
            }
        }
    }
    Ok(out)
}

/// Mean of `f` over the grid points of the closed ball `B(x, radius)`.
///
/// Boundary nodes are included when their distance is at most
/// `radius + h/2`, which makes the stencil deterministic.
pub fn ball_average(f: &SampledFunction, x: f64, radius: f64) -> Result<f64> {
    ball_average_slice(f.values(), f.grid(), 1, x, radius)
}

/// Ball average over a strided sample set: entry `j` of `values` sits at
/// grid index `j * stride`.
pub fn ball_average_slice(
    values: &[f64],
    grid: DyadicGrid,
    stride: usize,
    x: f64,
    radius: f64,
) -> Result<f64> {
    let h = grid.spacing() * stride as f64;
    if radius < 2.0 * grid.spacing() {
        return Err(Error::RadiusUnderResolved {
            radius,
            spacing: grid.spacing(),
        });
    }
    let m = values.len();
    let center = x / h; // fractional index into the strided set
    let reach = (radius + grid.spacing() / 2.0) / h;
    let lo = (center - reach).ceil() as i64;
    let hi = (center + reach).floor() as i64;
    if (hi - lo + 1) as usize >= m {
        return Ok(compensated_sum(values.iter().copied()) / m as f64);
    }
    let count = (hi - lo + 1) as usize;
    let sum = compensated_sum((lo..=hi).map(|j| values[j.rem_euclid(m as i64) as usize]));
    Ok(sum / count as f64)
}

/// Compactly supported test functions with controlled Holder-r seminorm;
/// a finite stand-in for the continuum test class.
#[derive(Clone, Debug)]
pub struct TestClassDictionary {
    r: f64,
    members: Vec<SampledFunction>,
}

impl TestClassDictionary {
    /// Normalize each member to unit discrete Holder-r seminorm and check
    /// the support constraint.
    pub fn new(r: f64, members: Vec<SampledFunction>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        let mut normalized = Vec::with_capacity(members.len());
        for m in members {
            let radius = m.support_radius().unwrap_or(1.0);
            if radius > 0.5 + 1e-12 {
                return Err(Error::Config(
                    "dictionary member support exceeds B(0, 1/2)".into(),
                ));
            }
            let s = holder_seminorm(&m, r);
            if !(s > 0.0) {
                return Err(Error::Config("dictionary member has zero seminorm".into()));
            }
            normalized.push(m.scale(1.0 / s));
        }
        Ok(TestClassDictionary {
            r,
            members: normalized,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn members(&self) -> &[SampledFunction] {
        &self.members
    }
}

/// Discrete Holder-r seminorm: with `rt` the largest integer below `r`,
/// the sup over support-point pairs of
/// `|D^rt f(x) - D^rt f(x')| / |x - x'|^(r - rt)`.
pub fn holder_seminorm(f: &SampledFunction, r: f64) -> f64 {
    let rt = holder_integer_part(r);
    let mut g = f.clone();
    for _ in 0..rt {
        g = g.derivative();
    }
    let grid = f.grid();
    let n = grid.samples();
    let (start, count) = g.support_window();
    let idx: Vec<usize> = (0..count).map(|j| (start + j) % n).collect();
    let vals: Vec<f64> = idx.iter().map(|&i| g.values()[i]).collect();
    let exponent = r - rt as f64;
    let h = grid.spacing();
    let mut best = 0.0f64;
    // max over offsets of the max difference at that separation
    for sep in 1..count {
        let raw = sep as f64 * h;
        let dist = raw.min(1.0 - raw);
        if dist <= 0.0 {
            continue;
        }
        let mut diff = 0.0f64;
        for i in 0..count - sep {
            diff = diff.max((vals[i + sep] - vals[i]).abs());
        }
        best = best.max(diff / dist.powf(exponent));
    }
    best
}

/// Largest integer strictly smaller than `r` (clamped at zero).
pub fn holder_integer_part(r: f64) -> u32 {
    if r <= 0.0 {
        return 0;
    }
    let f = r.floor();
    let rt = if f == r { f - 1.0 } else { f };
    rt.max(0.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: u32) -> DyadicGrid {
        DyadicGrid::new(n).unwrap()
    }

    fn bump(g: DyadicGrid) -> SampledFunction {
        let raw = SampledFunction::from_fn_supported(g, 0.0, 0.5, |y| {
            let u = 2.0 * y;
            if u.abs() < 1.0 {
                (-1.0 / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        });
        let mass = raw.quadrature();
        raw.scale(1.0 / mass)
    }

    #[test]
    fn quadrature_of_constant_is_exact() {
        let g = grid(10);
        assert_eq!(SampledFunction::constant(g, 1.0).quadrature(), 1.0);
    }

    #[test]
    fn quadrature_of_pure_mode_vanishes() {
        let g = grid(12);
        let f = SampledFunction::from_fn(g, |y| (2.0 * std::f64::consts::PI * y).sin());
        assert!(f.quadrature().abs() <= 1e-14);
    }

    #[test]
    fn normalized_bump_reintegrates_to_one() {
        let g = grid(12);
        assert!((bump(g).quadrature() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dilation_at_scale_zero_is_identity() {
        let g = grid(10);
        let f = bump(g);
        let d = dilate_translate(&f, 0, 0.0).unwrap();
        assert_eq!(f.values(), d.values());
    }

    #[test]
    fn dilation_preserves_mass() {
        let g = grid(14);
        let f = bump(g);
        let mass = f.quadrature();
        for k in 0..=6 {
            let d = dilate_translate(&f, k, 0.25).unwrap();
            assert!(
                (d.quadrature() - mass).abs() / mass.abs() <= 1e-10,
                "mass drift at k = {k}: {}",
                d.quadrature() - mass
            );
        }
    }

    #[test]
    fn dilation_sup_norm_scales_exactly() {
        let g = grid(12);
        let f = bump(g);
        for k in [1u32, 3, 5] {
            let d = dilate_translate(&f, k, 0.5).unwrap();
            assert_eq!(d.sup_norm(), (1u64 << k) as f64 * f.sup_norm());
        }
    }

    #[test]
    fn dilation_rejects_unresolvable_scales() {
        let g = grid(8);
        let f = bump(g);
        assert!(matches!(
            dilate_translate(&f, 7, 0.0),
            Err(Error::ScaleTooFine { .. })
        ));
    }

    #[test]
    fn dilation_composes() {
        let g = grid(12);
        let f = bump(g);
        let once = dilate_translate(&dilate_translate(&f, 2, 0.0).unwrap(), 3, 0.0).unwrap();
        let direct = dilate_translate(&f, 5, 0.0).unwrap();
        let diff: f64 = once
            .values()
            .iter()
            .zip(direct.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-12 * direct.sup_norm());
    }

    #[test]
    fn convolution_with_discrete_delta_is_identity() {
        let g = grid(10);
        let f = bump(g);
        let mut delta = SampledFunction::zeros(g);
        delta.values_mut()[0] = 1.0 / g.spacing();
        let delta = delta.with_support(0.0, 2.0 * g.spacing());
        let c = convolve(&f, &delta).unwrap();
        let err: f64 = c
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12 * f.sup_norm());
    }

    #[test]
    fn convolution_mass_is_product_of_masses() {
        let g = grid(12);
        let f = bump(g);
        let c = convolve(&f, &f).unwrap();
        assert!((c.quadrature() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn convolution_is_commutative() {
        let g = grid(10);
        let f = bump(g);
        let w = SampledFunction::from_fn_supported(g, 0.0, 0.25, |y| 1.0 - 16.0 * y * y);
        let a = convolve(&f, &w).unwrap();
        let b = convolve(&w, &f).unwrap();
        let err: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12);
    }

    /// Independent O(N^2) oracle for the Fourier-side convolution.
    fn convolve_direct(f: &SampledFunction, g: &SampledFunction) -> SampledFunction {
        let grid = f.grid();
        let n = grid.samples();
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = compensated_sum(
                (0..n).map(|j| f.values()[j] * g.values()[(i + n - j) % n]),
            ) * grid.spacing();
        }
        SampledFunction::new(grid, out)
    }

    #[test]
    fn convolution_matches_direct_sum_oracle() {
        let g = grid(10);
        let f = bump(g);
        let fast = convolve(&f, &f).unwrap();
        let slow = convolve_direct(&f, &f);
        let err: f64 = fast
            .values()
            .iter()
            .zip(slow.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "fft vs direct sum: {err:.3e}");
    }

    #[test]
    fn ball_average_of_constant_is_exact() {
        let g = grid(10);
        let f = SampledFunction::constant(g, 3.25);
        assert_eq!(ball_average(&f, 0.3, 0.125).unwrap(), 3.25);
    }

    #[test]
    fn ball_average_kills_odd_part() {
        let g = grid(10);
        let x = 0.5;
        let f = SampledFunction::from_fn(g, |_| 0.0);
        let mut f = f;
        for i in 0..g.samples() {
            f.values_mut()[i] = DyadicGrid::lift(g.point(i) - x);
        }
        assert!(ball_average(&f, x, 0.0625).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn ball_average_of_square_matches_closed_form() {
        let g = grid(12);
        let x = 0.25;
        let mut f = SampledFunction::zeros(g);
        for i in 0..g.samples() {
            let d = DyadicGrid::lift(g.point(i) - x);
            f.values_mut()[i] = d * d;
        }
        let radius = 0.125;
        let avg = ball_average(&f, x, radius).unwrap();
        let expected = radius * radius / 3.0;
        assert!(
            (avg - expected).abs() <= 0.01 * expected,
            "avg {avg}, expected {expected}"
        );
    }

    #[test]
    fn ball_average_is_monotone() {
        let g = grid(10);
        let f = SampledFunction::from_fn(g, |y| y.cos());
        let gfun = SampledFunction::from_fn(g, |y| y.cos() + 0.5 + 0.1 * y.sin());
        // f <= g pointwise here
        for i in 0..8 {
            let x = i as f64 / 8.0;
            let af = ball_average(&f, x, 0.0625).unwrap();
            let ag = ball_average(&gfun, x, 0.0625).unwrap();
            assert!(af <= ag + 1e-15);
        }
    }

    #[test]
    fn ball_average_rejects_tiny_radius() {
        let g = grid(10);
        let f = SampledFunction::constant(g, 1.0);
        assert!(matches!(
            ball_average(&f, 0.0, 0.5 * g.spacing()),
            Err(Error::RadiusUnderResolved { .. })
        ));
    }

    #[test]
    fn holder_integer_parts() {
        assert_eq!(holder_integer_part(0.5), 0);
        assert_eq!(holder_integer_part(1.0), 0);
        assert_eq!(holder_integer_part(1.5), 1);
        assert_eq!(holder_integer_part(2.0), 1);
        assert_eq!(holder_integer_part(3.0), 2);
    }

    #[test]
    fn dictionary_normalizes_to_unit_seminorm() {
        let g = grid(10);
        let member = bump(g);
        let dict = TestClassDictionary::new(1.5, vec![member]).unwrap();
        let s = holder_seminorm(&dict.members()[0], 1.5);
        assert!((s - 1.0).abs() <= 1e-9, "seminorm after normalization: {s}");
    }
}
