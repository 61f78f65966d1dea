//! Germ families `x -> F_x` and the built-in zoo used as fixtures: constant
//! germs, Taylor-polynomial germs of smooth functions, derivative germs of
//! two-parameter processes, and a sign-flip negative control.
//!
//! Coherence and reconstruction sweep a single rescaled test function over
//! many centers, so evaluation is organized around a `TestFamily`: the
//! rescaled template is materialized once, its mass and centered moments are
//! cached (both are translation invariant on the periodic grid), and a
//! `TestView` addresses a translate by index shift without copying.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{compensated_sum, dilate_translate, DyadicGrid, SampledFunction};

/// Highest centered moment cached per test family.
pub const MOMENT_CACHE_ORDERS: u32 = 4;

/// Tolerance for the two evaluation routes of a derivative germ.
pub const DUAL_ROUTE_TOLERANCE: f64 = 1e-6;

/// A rescaled test function with cached translation-invariant data.
#[derive(Clone, Debug)]
pub struct TestFamily {
    fun: SampledFunction,
    anchor: usize,
    mass: f64,
    moments: Vec<f64>,
}

impl TestFamily {
    pub fn new(fun: SampledFunction) -> Self {
        let anchor = fun.grid().index_of(fun.support_center());
        let mass = fun.quadrature();
        let moments = (0..=MOMENT_CACHE_ORDERS).map(|a| fun.moment(a)).collect();
        TestFamily {
            fun,
            anchor,
            mass,
            moments,
        }
    }

    /// Materialize `template` at scale `2^-k` (centered at the origin).
    pub fn dilated(template: &SampledFunction, k: u32) -> Result<Self> {
        Ok(Self::new(dilate_translate(template, k, 0.0)?))
    }

    pub fn function(&self) -> &SampledFunction {
        &self.fun
    }

    pub fn grid(&self) -> DyadicGrid {
        self.fun.grid()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// View of the translate centered at grid index `center_idx`.
    pub fn view(&self, center_idx: usize) -> TestView<'_> {
        let n = self.fun.grid().samples() as i64;
        TestView {
            family: self,
            center_idx: center_idx % self.fun.grid().samples(),
            shift: (center_idx as i64 - self.anchor as i64).rem_euclid(n),
        }
    }

    /// View at the template's own center.
    pub fn anchor_view(&self) -> TestView<'_> {
        self.view(self.anchor)
    }
}

/// A translate of a `TestFamily` template, addressed without copying.
#[derive(Clone, Copy)]
pub struct TestView<'a> {
    family: &'a TestFamily,
    center_idx: usize,
    shift: i64,
}

impl<'a> TestView<'a> {
    pub fn center(&self) -> f64 {
        self.family.fun.grid().point(self.center_idx)
    }

    pub fn center_index(&self) -> usize {
        self.center_idx
    }

    pub fn grid(&self) -> DyadicGrid {
        self.family.fun.grid()
    }

    pub fn mass(&self) -> f64 {
        self.family.mass
    }

    /// Centered moment `integral (t - center)^order xi(t) dt`.
    pub fn moment(&self, order: u32) -> f64 {
        self.family.moments[order as usize]
    }

    /// Same family, translated by `offset` grid indices.
    pub fn translated(&self, offset: i64) -> TestView<'a> {
        let n = self.grid().samples() as i64;
        TestView {
            family: self.family,
            center_idx: ((self.center_idx as i64 + offset).rem_euclid(n)) as usize,
            shift: (self.shift + offset).rem_euclid(n),
        }
    }

    /// Iterate `(grid index, value)` over the support window, widened by
    /// `pad` samples on each side.
    pub fn window_values(&self, pad: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        let n = self.grid().samples();
        let (start, count) = self.family.fun.support_window();
        let count = (count + 2 * pad).min(n);
        let start = (start + n - (pad % n)) % n;
        let shift = self.shift;
        let vals = self.family.fun.values();
        (0..count).map(move |j| {
            let src = (start + j) % n;
            let dst = (src + shift as usize) % n;
            (dst, vals[src])
        })
    }
}

/// A family of distributions indexed by base points, exposed through
/// evaluation against localized test functions. Evaluation is pure and
/// deterministic; concurrent use needs no locking.
pub trait Germ: Send + Sync {
    fn kind(&self) -> &'static str;

    /// `F_x(test)` for a test function given as a translated view.
    fn evaluate_view(&self, x: f64, test: &TestView<'_>) -> f64;

    /// `F_x(test)` for a plain sampled function.
    fn evaluate(&self, x: f64, test: &SampledFunction) -> f64 {
        let family = TestFamily::new(test.clone());
        let view = family.anchor_view();
        self.evaluate_view(x, &view)
    }

    /// `(F_b - F_a)(test)`.
    fn difference_view(&self, a: f64, b: f64, test: &TestView<'_>) -> f64 {
        self.evaluate_view(b, test) - self.evaluate_view(a, test)
    }

    /// When the differences factor as
    /// `(F_y - F_x)(xi) = (c(y) - c(x)) * mass(xi)`, the profile `c`.
    fn difference_profile(&self) -> Option<&SampledFunction> {
        None
    }

    /// Optional `(alpha, gamma)` pair hinting at the expected coherence and
    /// scaling exponents.
    fn regularity_hint(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Smooth closed-form function with derivatives of every cached order.
#[derive(Clone)]
pub struct SmoothMap {
    name: String,
    eval: Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>,
}

impl SmoothMap {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(u32, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SmoothMap {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// `sin(2 pi x)`; derivative of order j is `(2 pi)^j sin(2 pi x + j pi/2)`.
    pub fn sin_2pi() -> Self {
        Self::new("sin", |j, x| {
            let tau = 2.0 * std::f64::consts::PI;
            tau.powi(j as i32) * (tau * x + j as f64 * std::f64::consts::FRAC_PI_2).sin()
        })
    }

    /// `cos(2 pi x)`.
    pub fn cos_2pi() -> Self {
        Self::new("cos", |j, x| {
            let tau = 2.0 * std::f64::consts::PI;
            tau.powi(j as i32) * (tau * x + j as f64 * std::f64::consts::FRAC_PI_2).cos()
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::new("const", move |j, _| if j == 0 { c } else { 0.0 })
    }

    /// Derivative of order `j` at `x` (`j = 0` is the function itself).
    pub fn deriv(&self, j: u32, x: f64) -> f64 {
        (self.eval)(j, x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl std::fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SmoothMap({})", self.name)
    }
}

/// Degenerate coherent family `F_x = w` for a fixed sampled function.
pub struct ConstantGerm {
    w: SampledFunction,
}

pub fn constant_germ(w: SampledFunction) -> ConstantGerm {
    ConstantGerm { w }
}

impl ConstantGerm {
    pub fn function(&self) -> &SampledFunction {
        &self.w
    }
}

impl Germ for ConstantGerm {
    fn kind(&self) -> &'static str {
        "constant"
    }

    fn evaluate_view(&self, _x: f64, test: &TestView<'_>) -> f64 {
        let h = test.grid().spacing();
        compensated_sum(test.window_values(0).map(|(i, v)| self.w.values()[i] * v)) * h
    }

    fn regularity_hint(&self) -> Option<(f64, f64)> {
        Some((0.0, f64::INFINITY))
    }
}

/// `F_x` is the degree-m Taylor polynomial of `f` at `x`:
/// `F_x(xi) = sum_(j<=m) f^(j)(x)/j! integral (y-x)^j xi(y) dy`.
pub struct TaylorGerm {
    f: SmoothMap,
    order: u32,
}

pub fn taylor_germ(f: SmoothMap, order: u32) -> Result<TaylorGerm> {
    if order > 3 {
        return Err(Error::Config(format!(
            "taylor germ supports orders 0..=3, got {order}"
        )));
    }
    Ok(TaylorGerm { f, order })
}

impl TaylorGerm {
    pub fn function(&self) -> &SmoothMap {
        &self.f
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// The diagonal `x -> F_x(x) = f(x)`, the reconstruction target.
    pub fn diagonal(&self, x: f64) -> f64 {
        self.f.deriv(0, x)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

impl Germ for TaylorGerm {
    fn kind(&self) -> &'static str {
        "taylor"
    }

    fn evaluate_view(&self, x: f64, test: &TestView<'_>) -> f64 {
        // integral (t-x)^j xi = sum_i binom(j,i) delta^(j-i) m_i with
        // delta the lifted center offset and m_i the cached centered moments
        let delta = DyadicGrid::lift(test.center() - x);
        let mut acc = 0.0;
        let mut factorial = 1.0;
        for j in 0..=self.order {
            if j > 0 {
                factorial *= j as f64;
            }
            let mut mu = 0.0;
            for i in 0..=j {
                mu += binomial(j, i) * delta.powi((j - i) as i32) * test.moment(i);
            }
            acc += self.f.deriv(j, x) / factorial * mu;
        }
        acc
    }

    fn regularity_hint(&self) -> Option<(f64, f64)> {
        Some((0.0, (self.order + 1) as f64))
    }
}

/// Smooth two-parameter process `A(s, t)` with its derivative in the second
/// slot, the raw material for sewing.
#[derive(Clone)]
pub struct TwoParamProcess {
    name: String,
    a: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    d2: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl TwoParamProcess {
    pub fn new(
        name: impl Into<String>,
        a: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TwoParamProcess {
            name: name.into(),
            a: Arc::new(a),
            d2: Arc::new(d2),
        }
    }

    /// Young product `A(s,t) = f(s) (g(t) - g(s))`.
    pub fn young(f: SmoothMap, g: SmoothMap) -> Self {
        let name = format!("young:{}:{}", f.name(), g.name());
        let (fa, ga) = (f.clone(), g.clone());
        let (fb, gb) = (f, g);
        TwoParamProcess {
            name,
            a: Arc::new(move |s, t| fa.deriv(0, s) * (ga.deriv(0, t) - ga.deriv(0, s))),
            d2: Arc::new(move |s, t| fb.deriv(0, s) * gb.deriv(1, t)),
        }
    }

    /// Additive increments `A(s,t) = w(t) - w(s)`; `delta A` vanishes.
    pub fn additive(w: SmoothMap) -> Self {
        let name = format!("additive:{}", w.name());
        let (wa, wb) = (w.clone(), w);
        TwoParamProcess {
            name,
            a: Arc::new(move |s, t| wa.deriv(0, t) - wa.deriv(0, s)),
            d2: Arc::new(move |_s, t| wb.deriv(1, t)),
        }
    }

    /// `A(s,t) = (t-s)^2`.
    pub fn square_increment() -> Self {
        TwoParamProcess {
            name: "square".into(),
            a: Arc::new(|s, t| (t - s) * (t - s)),
            d2: Arc::new(|s, t| 2.0 * (t - s)),
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        (self.a)(s, t)
    }

    pub fn partial2(&self, s: f64, t: f64) -> f64 {
        (self.d2)(s, t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Max of `|A(s,s)|` over a coarse grid sample.
    pub fn max_diagonal_abs(&self, grid: DyadicGrid, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let s = grid.point(i * grid.samples() / samples.max(1));
                self.eval(s, s).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The germ `F_x = D2 A(x, .)` of a two-parameter process.
pub struct SewingGerm {
    process: TwoParamProcess,
}

pub fn sewing_germ(process: TwoParamProcess) -> SewingGerm {
    SewingGerm { process }
}

/// Build the germ and check the two evaluation routes against each other on
/// a probe set before returning it.
pub fn sewing_germ_validated(
    process: TwoParamProcess,
    grid: DyadicGrid,
    probe: &SampledFunction,
) -> Result<SewingGerm> {
    let germ = SewingGerm { process };
    let mut worst = 0.0f64;
    for k in [1u32, 3, grid.n_max() - 4] {
        let family = TestFamily::dilated(probe, k)?;
        for frac in [0usize, 3, 5] {
            let idx = frac * grid.samples() / 8;
            let view = family.view(idx);
            let x = grid.point(idx);
            let direct = germ.evaluate_view(x, &view);
            let by_parts = germ.evaluate_by_parts(x, &view);
            worst = worst.max((direct - by_parts).abs());
        }
    }
    if worst > DUAL_ROUTE_TOLERANCE {
        return Err(Error::RouteDisagreement {
            residual: worst,
            tolerance: DUAL_ROUTE_TOLERANCE,
        });
    }
    Ok(germ)
}

impl SewingGerm {
    pub fn process(&self) -> &TwoParamProcess {
        &self.process
    }

    /// The integration-by-parts route `-integral A(x,t) xi'(t) dt`, with a
    /// centered finite-difference derivative of the test function.
    pub fn evaluate_by_parts(&self, x: f64, test: &TestView<'_>) -> f64 {
        let grid = test.grid();
        let vals: Vec<(usize, f64)> = test.window_values(1).collect();
        // -h * sum A(x,t_i) (v_(i+1) - v_(i-1)) / (2h)
        let m = vals.len();
        let sum = compensated_sum((0..m).map(|j| {
            let (i, _) = vals[j];
            let prev = if j == 0 { 0.0 } else { vals[j - 1].1 };
            let next = if j + 1 == m { 0.0 } else { vals[j + 1].1 };
            let t = x + DyadicGrid::lift(grid.point(i) - x);
            self.process.eval(x, t) * (next - prev)
        }));
        -sum / 2.0
    }

    /// Max disagreement of the two routes over all dictionary members at the
    /// given scales and centers.
    pub fn dual_route_residual(
        &self,
        tests: &[SampledFunction],
        scales: &[u32],
        centers: &[usize],
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for t in tests {
            for &k in scales {
                let family = TestFamily::dilated(t, k)?;
                for &c in centers {
                    let view = family.view(c);
                    let x = view.grid().point(c);
                    let a = self.evaluate_view(x, &view);
                    let b = self.evaluate_by_parts(x, &view);
                    worst = worst.max((a - b).abs());
                }
            }
        }
        Ok(worst)
    }
}

impl Germ for SewingGerm {
    fn kind(&self) -> &'static str {
        "sewing"
    }

    fn evaluate_view(&self, x: f64, test: &TestView<'_>) -> f64 {
        let grid = test.grid();
        let h = grid.spacing();
        compensated_sum(test.window_values(0).map(|(i, v)| {
            let t = x + DyadicGrid::lift(grid.point(i) - x);
            self.process.partial2(x, t) * v
        })) * h
    }

    fn regularity_hint(&self) -> Option<(f64, f64)> {
        Some((1.0, 1.0))
    }
}

/// Negative control: `F_x(xi) = 2 s(x) integral(xi) - integral(s xi)` for a
/// seeded +-1-valued step function `s` at scale `2^(-n_max/2)`.
///
/// Differences are `(F_y - F_x)(xi) = 2 (s(y) - s(x)) integral(xi)`: they do
/// not decay as the test scale shrinks, and the reflected term makes the
/// mollified approximants keep O(1) jumps near the steps. Seed 0 maps to the
/// constant sign (a coherent degenerate case).
pub struct IncoherentGerm {
    signs: SampledFunction,
    profile: SampledFunction,
    seed: u64,
}

pub fn incoherent_germ(grid: DyadicGrid, seed: u64) -> IncoherentGerm {
    use rand::{Rng, SeedableRng};
    let cells = 1usize << (grid.n_max() / 2);
    let cell_len = grid.samples() / cells;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut signs = vec![1.0f64; grid.samples()];
    if seed != 0 {
        for c in 0..cells {
            let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            for v in signs.iter_mut().skip(c * cell_len).take(cell_len) {
                *v = s;
            }
        }
    }
    let signs = SampledFunction::new(grid, signs);
    let profile = signs.scale(2.0);
    IncoherentGerm {
        signs,
        profile,
        seed,
    }
}

impl IncoherentGerm {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn signs(&self) -> &SampledFunction {
        &self.signs
    }
}

impl Germ for IncoherentGerm {
    fn kind(&self) -> &'static str {
        "incoherent"
    }

    fn evaluate_view(&self, x: f64, test: &TestView<'_>) -> f64 {
        let grid = test.grid();
        let h = grid.spacing();
        let s_x = self.signs.values()[grid.index_of(x)];
        let reflected =
            compensated_sum(test.window_values(0).map(|(i, v)| self.signs.values()[i] * v)) * h;
        2.0 * s_x * test.mass() - reflected
    }

    fn difference_view(&self, a: f64, b: f64, test: &TestView<'_>) -> f64 {
        let grid = test.grid();
        let c = self.profile.values();
        (c[grid.index_of(b)] - c[grid.index_of(a)]) * test.mass()
    }

    fn difference_profile(&self) -> Option<&SampledFunction> {
        Some(&self.profile)
    }
}

/// Weighted combination of germs; every pipeline stage is linear in the
/// germ, so this is the fixture for linearity checks.
pub struct LinearGerm {
    terms: Vec<(f64, Arc<dyn Germ>)>,
}

impl LinearGerm {
    pub fn new(terms: Vec<(f64, Arc<dyn Germ>)>) -> Self {
        LinearGerm { terms }
    }
}

impl Germ for LinearGerm {
    fn kind(&self) -> &'static str {
        "linear-combination"
    }

    fn evaluate_view(&self, x: f64, test: &TestView<'_>) -> f64 {
        self.terms
            .iter()
            .map(|(w, g)| w * g.evaluate_view(x, test))
            .sum()
    }
}

/// The germ family translated by `tau`: `G_x(xi) = F_(x-tau)(xi(. + tau))`.
pub struct ShiftedGerm {
    inner: Arc<dyn Germ>,
    tau: f64,
    tau_idx: i64,
}

impl ShiftedGerm {
    pub fn new(inner: Arc<dyn Germ>, grid: DyadicGrid, tau: f64) -> Self {
        let tau_idx = grid.index_of(tau) as i64;
        ShiftedGerm {
            inner,
            tau,
            tau_idx,
        }
    }
}

impl Germ for ShiftedGerm {
    fn kind(&self) -> &'static str {
        "shifted"
    }

    fn evaluate_view(&self, x: f64, test: &TestView<'_>) -> f64 {
        let moved = test.translated(-self.tau_idx);
        self.inner.evaluate_view(x - self.tau, &moved)
    }
}
