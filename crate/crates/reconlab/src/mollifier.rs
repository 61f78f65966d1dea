//! Mollifier stack construction: a moment-cancelled bump `phi`, the smoother
//! `rho = phi^(1) * phi`, and the difference kernel `psi = phi^(2) - phi`
//! that drives the multiscale telescoping
//! `rho^(n+1) - rho^(n) = phi^(n+1) * psi^(n)`.

use crate::error::{Error, Result};
use crate::grid::{
    convolve, dilate_translate, holder_integer_part, DyadicGrid, SampledFunction,
    TestClassDictionary,
};

/// Highest moment order the cancellation construction supports.
pub const MAX_CANCELLED_ORDER: u32 = 4;

/// Relative tolerance for the telescoping identity check.
pub const TELESCOPE_TOLERANCE: f64 = 1e-8;

/// The mollifier triple used by the reconstruction engine, together with the
/// dilate-combination weights that produced `phi`.
///
/// `rho` has support radius 3/4, wider than the torus half-width, so its
/// unit-period samples are the folded periodization. Rescaled versions are
/// therefore derived from `rho_fine` (the alias-free scale-1 version
/// `phi^(2) * phi^(1)`, radius 3/8), never by rescaling the folded samples.
#[derive(Clone, Debug)]
pub struct MollifierStack {
    pub phi: SampledFunction,
    pub rho: SampledFunction,
    pub rho_fine: SampledFunction,
    pub psi: SampledFunction,
    pub r_tilde: u32,
    pub coefficients: Vec<f64>,
}

impl MollifierStack {
    pub fn grid(&self) -> DyadicGrid {
        self.phi.grid()
    }

    /// `phi` rescaled to scale `2^-k`, centered at the origin.
    pub fn phi_at(&self, k: u32) -> Result<SampledFunction> {
        dilate_translate(&self.phi, k, 0.0)
    }

    /// The periodization of `rho` rescaled to scale `2^-n`.
    pub fn rho_at(&self, n: u32) -> Result<SampledFunction> {
        if n == 0 {
            Ok(self.rho.clone())
        } else {
            dilate_translate(&self.rho_fine, n - 1, 0.0)
        }
    }

    /// `psi` rescaled to scale `2^-n`, centered at the origin.
    pub fn psi_at(&self, n: u32) -> Result<SampledFunction> {
        dilate_translate(&self.psi, n, 0.0)
    }
}

/// The smooth bump `exp(-1/(1-(2y)^2))` on `B(0, 1/2)`, normalized to unit
/// mass. Even by construction.
pub fn base_bump(grid: DyadicGrid) -> Result<SampledFunction> {
    if grid.n_max() < 8 {
        return Err(Error::GridTooCoarse {
            n_max: grid.n_max(),
            required: 8,
        });
    }
    let raw = SampledFunction::from_fn_supported(grid, 0.0, 0.5, |y| {
        let u = 2.0 * y;
        if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    });
    let mass = raw.quadrature();
    Ok(raw.scale(1.0 / mass))
}

/// Polynomial bump `(1-(2y)^2)^8` on `B(0, 1/2)`, normalized to unit mass.
/// A second base function for uniqueness cross-checks.
pub fn polynomial_bump(grid: DyadicGrid) -> Result<SampledFunction> {
    if grid.n_max() < 8 {
        return Err(Error::GridTooCoarse {
            n_max: grid.n_max(),
            required: 8,
        });
    }
    let raw = SampledFunction::from_fn_supported(grid, 0.0, 0.5, |y| {
        let u = 2.0 * y;
        if u.abs() < 1.0 {
            (1.0 - u * u).powi(8)
        } else {
            0.0
        }
    });
    let mass = raw.quadrature();
    Ok(raw.scale(1.0 / mass))
}

/// Cancel the moments of orders `1..=r_tilde` of a unit-mass bump by a linear
/// combination of its dyadic dilates.
///
/// The moment of a dilate scales as `m_a(phi0^(i)) = 2^(-i a) m_a(phi0)`, so
/// the weights solve `sum_i c_i 2^(-i a) m_a(phi0) = delta_(a 0)` for
/// `a = 0..=r_tilde`. Rows whose base moment already vanishes (all odd
/// orders, for an even bump) are identically satisfied and dropped; the
/// remaining Vandermonde-type system in the nodes `2^-i` uses exactly as many
/// dilates as retained rows. Residuals are re-measured on the grid afterwards.
pub fn moment_cancel(
    phi0: &SampledFunction,
    r_tilde: u32,
) -> Result<(SampledFunction, Vec<f64>)> {
    if r_tilde > MAX_CANCELLED_ORDER {
        return Err(Error::Config(format!(
            "moment cancellation supports orders up to {MAX_CANCELLED_ORDER}, got {r_tilde}"
        )));
    }
    let base_moments: Vec<f64> = (0..=r_tilde).map(|a| phi0.moment(a)).collect();
    if (base_moments[0] - 1.0).abs() > 1e-8 {
        return Err(Error::Config(
            "moment cancellation expects a unit-mass base bump".into(),
        ));
    }
    // retain rows with a nonzero base moment; the zero rows hold for any
    // combination with total weight 1
    let zero_tol = 1e-12 * phi0.sup_norm().max(1.0);
    let retained: Vec<u32> = (0..=r_tilde)
        .filter(|&a| a == 0 || base_moments[a as usize].abs() > zero_tol)
        .collect();
    let m = retained.len();
    if m == 1 {
        // only the mass row survives: the base bump already qualifies
        return Ok((phi0.clone(), vec![1.0]));
    }

    let mut matrix = vec![vec![0.0f64; m]; m];
    let mut rhs = vec![0.0f64; m];
    for (row, &a) in retained.iter().enumerate() {
        for (col, c) in matrix[row].iter_mut().enumerate() {
            *c = pow2_neg(col as i32, a) * base_moments[a as usize];
        }
        rhs[row] = if a == 0 { 1.0 } else { 0.0 };
    }
    let coefficients = solve_dense(matrix, rhs)?;

    let mut phi = SampledFunction::zeros(phi0.grid());
    for (i, &c) in coefficients.iter().enumerate() {
        let dilate = dilate_translate(phi0, i as u32, 0.0)?;
        phi = phi.add(&dilate.scale(c))?;
    }
    let radius = phi0.support_radius().unwrap_or(0.5);
    let phi = phi.with_support(0.0, radius);

    // post-solve residual check against the grid moments
    let mass = phi.moment(0);
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::MomentResidual {
            order: 0,
            residual: (mass - 1.0).abs(),
        });
    }
    for a in 1..=r_tilde {
        let res = phi.moment(a).abs();
        if res > 1e-8 {
            return Err(Error::MomentResidual {
                order: a as usize,
                residual: res,
            });
        }
    }
    Ok((phi, coefficients))
}

// helper: 2^{-i a} as f64
fn pow2_neg(i: i32, a: u32) -> f64 {
    (2.0f64).powi(-(i * a as i32))
}

// Gaussian elimination with partial pivoting; the systems here are at most
// 3x3 and well conditioned (distinct dyadic nodes), the guard is for safety.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Ok(x)
}

/// Build the full stack for Holder order `r`: `phi` from `moment_cancel`
/// with `r_tilde` the largest integer below `r`, then
/// `rho = phi^(1) * phi` and `psi = phi^(2) - phi`.
pub fn build_stack(grid: DyadicGrid, r: f64) -> Result<MollifierStack> {
    build_stack_from(&base_bump(grid)?, r)
}

/// Same as [`build_stack`] but from a caller-supplied unit-mass base bump.
pub fn build_stack_from(phi0: &SampledFunction, r: f64) -> Result<MollifierStack> {
    if r <= 0.0 {
        return Err(Error::Config("Holder order r must be positive".into()));
    }
    let r_tilde = holder_integer_part(r);
    let (phi, coefficients) = moment_cancel(phi0, r_tilde)?;
    let rho = convolve(&dilate_translate(&phi, 1, 0.0)?, &phi)?;
    let rho_fine = convolve(
        &dilate_translate(&phi, 2, 0.0)?,
        &dilate_translate(&phi, 1, 0.0)?,
    )?;
    let psi = dilate_translate(&phi, 2, 0.0)?.sub(&phi)?;
    // psi's support is phi's; the difference constructor widened it
    let psi_radius = phi.support_radius().unwrap_or(0.5);
    let psi = psi.with_support(0.0, psi_radius);
    Ok(MollifierStack {
        phi,
        rho,
        rho_fine,
        psi,
        r_tilde,
        coefficients,
    })
}

/// The difference kernel `phi^(n+1) * psi^(n)`.
///
/// The convolution integrand lives at scale `2^-n`, so the quadrature is
/// done once at base scale (where it is fully resolved) and rescaled
/// exactly; `w^(1) = phi^(2) * psi^(1)` is alias-free on the torus
/// (radius 3/8), while the n = 0 kernel is the folded periodization.
pub fn difference_kernel(stack: &MollifierStack, n: u32) -> Result<SampledFunction> {
    if n == 0 {
        convolve(&stack.phi_at(1)?, &stack.psi)
    } else {
        let fine = convolve(&stack.phi_at(2)?, &stack.psi_at(1)?)?;
        dilate_translate(&fine, n - 1, 0.0)
    }
}

/// Sup-norm residual of the telescoping identity at level `n`, with the two
/// sides computed by independent code paths: the left side by differencing
/// rescaled versions of `rho = phi^(1) * phi`, the right side through the
/// convolution `phi^(n+1) * psi^(n)` evaluated at its own scale.
///
/// Contract: residual <= `TELESCOPE_TOLERANCE` times `sup |rho^(n+1)|`.
pub fn check_telescope_identity(stack: &MollifierStack, n: u32) -> Result<f64> {
    Ok(telescope_residuals(stack, &[n])?[0])
}

/// Telescoping residuals for several levels at once, reusing the base-scale
/// kernels across levels.
///
/// Both sides are accumulated in double-double arithmetic: the residual is
/// quadrature content, and in plain f64 it would sink below the rounding
/// floor already at moderate resolutions, hiding the convergence trend.
pub fn telescope_residuals(stack: &MollifierStack, ns: &[u32]) -> Result<Vec<f64>> {
    let grid = stack.grid();
    let n_limit = grid.n_max().saturating_sub(6);
    for &n in ns {
        if n > n_limit {
            return Err(Error::ScaleTooFine { k: n, limit: n_limit });
        }
    }
    let phi1 = stack.phi_at(1)?;
    let phi2 = stack.phi_at(2)?;
    let psi1 = stack.psi_at(1)?;
    // alias-free scale-1 versions of rho and of the difference kernel
    let rho1 = dd::convolve(&phi2, &phi1);
    let w1 = dd::convolve(&phi2, &psi1);
    let needs_level_zero = ns.contains(&0);
    let (rho0, w0) = if needs_level_zero {
        (
            Some(dd::convolve(&phi1, &stack.phi)),
            Some(dd::convolve(&phi1, &stack.psi)),
        )
    } else {
        (None, None)
    };

    let n_samples = grid.samples();
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut worst = 0.0f64;
        if n == 0 {
            let rho0 = rho0.as_ref().expect("computed above");
            let w0 = w0.as_ref().expect("computed above");
            for j in 0..n_samples {
                // (rho^(1) - rho^(0)) - (phi^(1) * psi^(0))
                let lhs = dd::sub(rho1[j], rho0[j]);
                let r = dd::sub(lhs, w0[j]);
                worst = worst.max(r.0.abs());
            }
        } else {
            let coarse = 1usize << (n - 1);
            let fine = 1usize << n;
            for j in 0..n_samples {
                let up = dd::scale(rho1[(j * fine) % n_samples], fine as f64);
                let lo = dd::scale(rho1[(j * coarse) % n_samples], coarse as f64);
                let rhs = dd::scale(w1[(j * coarse) % n_samples], coarse as f64);
                let r = dd::sub(dd::sub(up, lo), rhs);
                worst = worst.max(r.0.abs());
            }
        }
        out.push(worst);
    }
    Ok(out)
}

/// Double-double helpers for the telescoping residual: ~31 significant
/// digits, enough to keep quadrature error above the arithmetic floor.
mod dd {
    use crate::grid::SampledFunction;

    pub type Dd = (f64, f64);

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let v = s - a;
        (s, (a - (s - v)) + (b - v))
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        (s, b - (s - a))
    }

    fn split(a: f64) -> (f64, f64) {
        let c = 134_217_729.0 * a; // 2^27 + 1
        let h = c - (c - a);
        (h, a - h)
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        let (ah, al) = split(a);
        let (bh, bl) = split(b);
        (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
    }

    pub fn add(a: Dd, b: Dd) -> Dd {
        let (s, e) = two_sum(a.0, b.0);
        quick_two_sum(s, e + a.1 + b.1)
    }

    pub fn sub(a: Dd, b: Dd) -> Dd {
        add(a, (-b.0, -b.1))
    }

    /// Exact for powers of two.
    pub fn scale(a: Dd, by: f64) -> Dd {
        (a.0 * by, a.1 * by)
    }

    /// Direct periodic convolution with quadrature weight, accumulated in
    /// double-double over the support window of the narrower factor.
    pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Vec<Dd> {
        let grid = f.grid();
        let n = grid.samples();
        let h = grid.spacing();
        let (fs, fc) = f.support_window();
        let (gs, gc) = g.support_window();
        let (inner, outer, istart, icount) = if fc <= gc {
            (f.values(), g.values(), fs, fc)
        } else {
            (g.values(), f.values(), gs, gc)
        };
        (0..n)
            .map(|i| {
                let mut acc: Dd = (0.0, 0.0);
                for j in 0..icount {
                    let y = (istart + j) % n;
                    let a = inner[y];
                    if a == 0.0 {
                        continue;
                    }
                    let b = outer[(i + n - y) % n];
                    acc = add(acc, two_prod(a, b));
                }
                scale(acc, h)
            })
            .collect()
    }
}

/// The five-member test dictionary used by error fields: the
/// moment-cancelled bump, its derivative, two translated half-width bumps,
/// and an odd two-lobe bump, each normalized to unit discrete Holder-r
/// seminorm.
pub fn standard_dictionary(stack: &MollifierStack, r: f64) -> Result<TestClassDictionary> {
    let grid = stack.grid();
    let half = |y: f64, c: f64| {
        let u = 4.0 * (y - c);
        if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    };
    let phi = stack.phi.clone();
    let dphi = stack
        .phi
        .derivative()
        .with_support(0.0, stack.phi.support_radius().unwrap_or(0.5));
    let left = SampledFunction::from_fn_supported(grid, 0.0, 0.5, |y| half(y, -0.125));
    let right = SampledFunction::from_fn_supported(grid, 0.0, 0.5, |y| half(y, 0.125));
    let odd = SampledFunction::from_fn_supported(grid, 0.0, 0.5, |y| half(y, 0.125) - half(y, -0.125));
    TestClassDictionary::new(r, vec![phi, dphi, left, right, odd])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: u32) -> DyadicGrid {
        DyadicGrid::new(n).unwrap()
    }

    #[test]
    fn base_bump_has_unit_mass_and_symmetry() {
        let g = grid(12);
        let b = base_bump(g).unwrap();
        assert!((b.quadrature() - 1.0).abs() <= 1e-12);
        let n = g.samples();
        for i in 1..n {
            assert_eq!(b.values()[i], b.values()[n - i]);
        }
        assert!(b.moment(1).abs() <= 1e-12);
    }

    #[test]
    fn no_cancellation_needed_for_low_orders() {
        let g = grid(12);
        let b = base_bump(g).unwrap();
        let (phi0, c0) = moment_cancel(&b, 0).unwrap();
        assert_eq!(c0, vec![1.0]);
        assert_eq!(phi0.values(), b.values());
        // the odd moment already vanishes for the even bump
        let (phi1, c1) = moment_cancel(&b, 1).unwrap();
        assert_eq!(c1, vec![1.0]);
        assert_eq!(phi1.values(), b.values());
    }

    #[test]
    fn second_order_cancellation_uses_hand_solved_weights() {
        let g = grid(12);
        let b = base_bump(g).unwrap();
        let (phi, c) = moment_cancel(&b, 2).unwrap();
        // c0 + c1 = 1, c0 m2 + c1 m2/4 = 0  =>  c = (-1/3, 4/3)
        assert!((c[0] + 1.0 / 3.0).abs() <= 1e-10, "c0 = {}", c[0]);
        assert!((c[1] - 4.0 / 3.0).abs() <= 1e-10, "c1 = {}", c[1]);
        assert!(phi.moment(2).abs() <= 1e-8);
    }

    #[test]
    fn cancelled_moment_table() {
        let g = grid(13);
        let b = base_bump(g).unwrap();
        for rt in 0..=4u32 {
            let (phi, _) = moment_cancel(&b, rt).unwrap();
            assert!((phi.moment(0) - 1.0).abs() <= 1e-10, "mass at rt = {rt}");
            for a in 1..=rt {
                assert!(
                    phi.moment(a).abs() <= 1e-8,
                    "order {a} residual {:.3e} at rt = {rt}",
                    phi.moment(a)
                );
            }
        }
    }

    #[test]
    fn stack_masses_and_supports() {
        let g = grid(12);
        let s = build_stack(g, 1.5).unwrap();
        assert_eq!(s.r_tilde, 1);
        assert!((s.rho.quadrature() - 1.0).abs() <= 1e-10);
        assert!(s.psi.quadrature().abs() <= 1e-10);
        assert_eq!(s.phi.support_radius(), Some(0.5));
        assert_eq!(s.psi.support_radius(), Some(0.5));
        assert_eq!(s.rho.support_radius(), Some(0.75));
    }

    #[test]
    fn low_order_stack_keeps_the_base_bump() {
        let g = grid(12);
        let s = build_stack(g, 0.5).unwrap();
        assert_eq!(s.r_tilde, 0);
        assert_eq!(s.coefficients, vec![1.0]);
    }

    #[test]
    fn psi_moments_vanish_through_r_tilde() {
        let g = grid(13);
        let s = build_stack(g, 2.5).unwrap();
        assert_eq!(s.r_tilde, 2);
        for a in 0..=2u32 {
            assert!(
                s.psi.moment(a).abs() <= 1e-8,
                "psi moment {a}: {:.3e}",
                s.psi.moment(a)
            );
        }
    }

    #[test]
    fn telescope_identity_holds() {
        let g = grid(14);
        let s = build_stack(g, 1.5).unwrap();
        let sup = s.rho_at(1).unwrap().sup_norm();
        let res = check_telescope_identity(&s, 0).unwrap();
        assert!(
            res <= TELESCOPE_TOLERANCE * sup,
            "residual {res:.3e} vs sup {sup:.3e}"
        );
    }

    #[test]
    fn telescope_identity_fails_without_psi() {
        // negative control: replacing psi by zero must leave the full
        // difference as residual
        let g = grid(12);
        let s = build_stack(g, 1.5).unwrap();
        let broken = MollifierStack {
            psi: SampledFunction::zeros(g).with_support(0.0, 0.5),
            ..s.clone()
        };
        let res = check_telescope_identity(&broken, 0).unwrap();
        let expected = s
            .rho_at(1)
            .unwrap()
            .sub(&s.rho_at(0).unwrap())
            .unwrap()
            .sup_norm();
        assert!(res > 0.0);
        assert!((res - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn telescope_residual_shrinks_with_resolution() {
        let mut last = f64::INFINITY;
        for n_max in [10u32, 12, 14] {
            let g = grid(n_max);
            let s = build_stack(g, 1.5).unwrap();
            let sup = s.rho_at(1).unwrap().sup_norm();
            let res = check_telescope_identity(&s, 0).unwrap() / sup;
            assert!(res < last, "residual not shrinking: {res:.3e} vs {last:.3e}");
            last = res;
        }
    }

    #[test]
    fn dictionary_has_five_normalized_members() {
        let g = grid(11);
        let s = build_stack(g, 1.5).unwrap();
        let dict = standard_dictionary(&s, 1.5).unwrap();
        assert_eq!(dict.members().len(), 5);
        for m in dict.members() {
            assert!(m.support_radius().unwrap_or(1.0) <= 0.5);
            let s = crate::grid::holder_seminorm(m, 1.5);
            assert!((s - 1.0).abs() <= 1e-9);
        }
    }
}
