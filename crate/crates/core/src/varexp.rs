//! Variable exponents, the modular, and the Luxemburg quasi-norm.
//!
//! An exponent function `p(·)` carries its declared essential bounds
//! `0 < p₋ ≤ p(x) ≤ p₊ < ∞`, the value `p_∞` at infinity, and the two
//! log-Hölder constants. The modular is `ϱ(f) = ∫ |f(x)|^{p(x)} dx`
//! (midpoint rule on the function's grid) and the Luxemburg quasi-norm is
//! `‖f‖ = inf { λ > 0 : ϱ(f/λ) ≤ 1 }`, computed by exponential bracketing
//! followed by bisection — `λ ↦ ϱ(f/λ)` is strictly decreasing for `f ≢ 0`,
//! so this is globally convergent.

use std::sync::Arc;

use serde::Serialize;

use crate::dilation::{DilatedBall, QuasiNormEvaluator};
use crate::error::{Error, Result};
use crate::grid::GriddedFunction;
use crate::sampling;
use crate::util::{rel_diff, ChunkedSum};

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A variable exponent with declared essential bounds and log-Hölder data.
#[derive(Clone)]
pub struct ExponentFunction {
    eval: Evaluator,
    p_minus: f64,
    p_plus: f64,
    p_infty: f64,
    c_log: f64,
    c_infty: f64,
}

impl core::fmt::Debug for ExponentFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ExponentFunction")
            .field("p_minus", &self.p_minus)
            .field("p_plus", &self.p_plus)
            .field("p_infty", &self.p_infty)
            .field("c_log", &self.c_log)
            .field("c_infty", &self.c_infty)
            .finish()
    }
}

impl ExponentFunction {
    pub fn new(
        eval: Evaluator,
        p_minus: f64,
        p_plus: f64,
        p_infty: f64,
        c_log: f64,
        c_infty: f64,
    ) -> Result<Self> {
        if !(p_minus > 0.0 && p_minus <= p_plus && p_plus.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exponent bounds must satisfy 0 < p_minus <= p_plus < inf, got [{p_minus}, {p_plus}]"
            )));
        }
        if c_log < 0.0 || c_infty < 0.0 {
            return Err(Error::InvalidParameter("log-Hölder constants must be >= 0".into()));
        }
        Ok(Self { eval, p_minus, p_plus, p_infty, c_log, c_infty })
    }

    /// The constant exponent `p(·) ≡ p0`.
    pub fn constant(p0: f64) -> Result<Self> {
        Self::new(Arc::new(move |_| p0), p0, p0, p0, 0.0, 0.0)
    }

    /// The log-smooth family `p(x) = p_∞ + c / ln(e + ρ_A(x))`.
    ///
    /// The decay inequality holds with constant exactly `C_∞ = c`; the
    /// pointwise log-Hölder constant is supplied by the caller and verified,
    /// not discovered.
    pub fn log_smooth(
        p_infty: f64,
        c: f64,
        c_log: f64,
        qn: Arc<QuasiNormEvaluator>,
    ) -> Result<Self> {
        if c < 0.0 {
            return Err(Error::InvalidParameter("log-smooth amplitude must be >= 0".into()));
        }
        let eval: Evaluator =
            Arc::new(move |x| p_infty + c / (core::f64::consts::E + qn.value(x)).ln());
        Self::new(eval, p_infty, p_infty + c, p_infty, c_log, c)
    }

    /// A discontinuous step along the first axis; deliberately violates the
    /// log-Hölder condition (its constants are declared zero).
    pub fn step(p_low: f64, p_high: f64, threshold: f64) -> Result<Self> {
        let eval: Evaluator =
            Arc::new(move |x| if x[0] > threshold { p_high } else { p_low });
        Self::new(
            eval,
            p_low.min(p_high),
            p_low.max(p_high),
            0.5 * (p_low + p_high),
            0.0,
            0.0,
        )
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// `p̲ = min{p₋, 1}`.
    pub fn p_underline(&self) -> f64 {
        self.p_minus.min(1.0)
    }

    pub fn p_infty(&self) -> f64 {
        self.p_infty
    }

    pub fn c_log(&self) -> f64 {
        self.c_log
    }

    pub fn c_infty(&self) -> f64 {
        self.c_infty
    }

    /// The exponent `r·p(·)` (used by the power identity of the norm).
    pub fn scale(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("scale factor {r} must be > 0")));
        }
        let inner = self.eval.clone();
        Self::new(
            Arc::new(move |x| r * inner(x)),
            r * self.p_minus,
            r * self.p_plus,
            r * self.p_infty,
            r * self.c_log,
            r * self.c_infty,
        )
    }

    /// Cross-check the declared essential bounds against the grid samples of
    /// `f`; excursions beyond `1e-12` are an error.
    pub fn check_declared_bounds(&self, f: &GriddedFunction) -> Result<f64> {
        let mut worst = 0.0_f64;
        let mut witness = None;
        f.for_each_cell(|x, _| {
            let v = self.eval(x);
            let excess = (self.p_minus - v).max(v - self.p_plus);
            if excess > worst {
                worst = excess;
                witness = Some(x.to_vec());
            }
        });
        if worst > 1e-12 {
            return Err(Error::PropertyViolation(format!(
                "exponent sample violates declared bounds by {worst:.3e} at {witness:?}"
            )));
        }
        Ok(worst.max(0.0))
    }
}

/// The modular `ϱ(f) = ∫ |f(x)|^{p(x)} dx` by the midpoint rule.
pub fn modular(f: &GriddedFunction, p: &ExponentFunction) -> f64 {
    let vol = f.cell_volume();
    let mut acc = ChunkedSum::<f64>::new();
    f.for_each_cell(|x, v| {
        if v != 0.0 {
            acc.push(v.abs().powf(p.eval(x)) * vol);
        }
    });
    acc.finish()
}

/// Samples of `f` with the exponent evaluated once per cell; the λ-sweep in
/// the Luxemburg bisection reuses them.
fn prepare(f: &GriddedFunction, p: &ExponentFunction) -> (Vec<(f64, f64)>, f64) {
    let mut cells = Vec::new();
    f.for_each_cell(|x, v| {
        if v != 0.0 {
            cells.push((v.abs(), p.eval(x)));
        }
    });
    (cells, f.cell_volume())
}

fn modular_at(cells: &[(f64, f64)], vol: f64, lambda: f64) -> f64 {
    let mut acc = ChunkedSum::<f64>::new();
    for (av, px) in cells {
        acc.push((av / lambda).powf(*px) * vol);
    }
    acc.finish()
}

const MAX_BRACKET_STEPS: u32 = 200;

/// The Luxemburg quasi-norm `inf { λ > 0 : ϱ(f/λ) ≤ 1 }` to relative
/// tolerance `tol` (which must lie in `(0, 1e-3]`). Returns `0` for `f ≡ 0`.
pub fn luxemburg_norm(f: &GriddedFunction, p: &ExponentFunction, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!("tol {tol} not in (0, 1e-3]")));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let (cells, vol) = prepare(f, p);
    let phi = |lambda: f64| modular_at(&cells, vol, lambda);

    let (mut lo, mut hi);
    if phi(1.0) <= 1.0 {
        hi = 1.0;
        lo = 0.5;
        let mut steps = 0;
        while phi(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::NonConvergence(MAX_BRACKET_STEPS));
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        let mut steps = 0;
        while phi(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::NonConvergence(MAX_BRACKET_STEPS));
            }
        }
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if phi(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Luxemburg norm of the indicator of a dilated ball, on a grid covering the
/// ball's bounding box. A cell belongs to the ball iff its midpoint does.
pub fn char_ball_norm(
    qn: &QuasiNormEvaluator,
    ball: &DilatedBall,
    p: &ExponentFunction,
    resolution: usize,
    tol: f64,
) -> Result<f64> {
    let indicator = ball_indicator(qn, ball, resolution)?;
    luxemburg_norm(&indicator, p, tol)
}

/// The gridded indicator of a dilated ball over its bounding box.
pub fn ball_indicator(
    qn: &QuasiNormEvaluator,
    ball: &DilatedBall,
    resolution: usize,
) -> Result<GriddedFunction> {
    let bbox = qn.ball_bbox(ball)?;
    let g = GriddedFunction::from_fn(bbox, resolution, |x| {
        if qn.ball_contains(ball, x) {
            1.0
        } else {
            0.0
        }
    });
    if g.is_zero() {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} too coarse: no midpoint falls inside the ball"
        )));
    }
    Ok(g)
}

/// Outcome of the sampled log-Hölder verification.
#[derive(Debug, Clone, Serialize)]
pub struct LogHolderReport {
    pub pairs: usize,
    /// max over pairs of `|p(x)−p(y)| · ln(e + 1/ρ(x−y)) / C_log`
    pub max_pointwise_ratio: f64,
    /// max over points of `|p(x)−p_∞| · ln(e + ρ(x)) / C_∞`
    pub max_decay_ratio: f64,
}

/// Check both global log-Hölder inequalities on random pairs spanning many
/// scales; error with a witness pair on the first violation.
pub fn check_log_holder(
    p: &ExponentFunction,
    qn: &QuasiNormEvaluator,
    pairs: usize,
    seed: u64,
) -> Result<LogHolderReport> {
    let mut rng = sampling::rng(seed);
    let mut report =
        LogHolderReport { pairs, max_pointwise_ratio: 0.0, max_decay_ratio: 0.0 };
    let sample = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        let u = sampling::gaussian_direction(qn.dim(), rng);
        let mag = 10f64.powf(rand::Rng::gen_range(rng, -6.0..6.0));
        u.into_iter().map(|v| v * mag).collect()
    };
    for _ in 0..pairs {
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let lhs = (p.eval(&x) - p.eval(&y)).abs();
        let rho_d = qn.value(&diff);
        if rho_d > 0.0 {
            let bound = p.c_log() / (core::f64::consts::E + 1.0 / rho_d).ln();
            let ratio = ratio_or_zero(lhs, bound);
            report.max_pointwise_ratio = report.max_pointwise_ratio.max(ratio);
            if lhs > bound * (1.0 + 1e-12) {
                return Err(Error::PropertyViolation(format!(
                    "log-Hölder pointwise inequality failed: |Δp|={lhs:.3e} > {bound:.3e} \
                     at x={x:?} y={y:?}"
                )));
            }
        }
        let lhs_inf = (p.eval(&x) - p.p_infty()).abs();
        let bound_inf = p.c_infty() / (core::f64::consts::E + qn.value(&x)).ln();
        let ratio = ratio_or_zero(lhs_inf, bound_inf);
        report.max_decay_ratio = report.max_decay_ratio.max(ratio);
        if lhs_inf > bound_inf * (1.0 + 1e-12) {
            return Err(Error::PropertyViolation(format!(
                "log-Hölder decay inequality failed: |p−p_∞|={lhs_inf:.3e} > {bound_inf:.3e} \
                 at x={x:?}"
            )));
        }
    }
    Ok(report)
}

fn ratio_or_zero(lhs: f64, bound: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if bound == 0.0 {
        f64::INFINITY
    } else {
        lhs / bound
    }
}

/// Outcome of the quasi-norm identity checks.
#[derive(Debug, Clone, Serialize)]
pub struct NormIdentityReport {
    /// relative error of `‖|f|^r‖_{p(·)} = ‖f‖^r_{rp(·)}`
    pub power_identity_rel_err: f64,
    /// relative error of `‖μf‖ = |μ|‖f‖`
    pub homogeneity_rel_err: f64,
    /// `‖f+g‖^p̲ − (‖f‖^p̲ + ‖g‖^p̲)` (must be ≤ 0 up to slack)
    pub triangle_margin: f64,
    /// `ϱ(f) ≤ ‖f‖` verified (only applies when `‖f‖ ≤ 1`)
    pub modular_bound_checked: bool,
}

/// Verify the power identity, absolute homogeneity, the `p̲`-triangle
/// inequality, and (when `‖f‖ ≤ 1`) the modular-vs-norm bound.
pub fn verify_remark21(
    p: &ExponentFunction,
    f: &GriddedFunction,
    g: &GriddedFunction,
    r: f64,
    mu: f64,
    tol: f64,
) -> Result<NormIdentityReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r {r} must be > 0")));
    }
    let norm_f = luxemburg_norm(f, p, tol)?;
    let norm_g = luxemburg_norm(g, p, tol)?;

    let f_pow = f.map(|v| v.abs().powf(r));
    let lhs = luxemburg_norm(&f_pow, p, tol)?;
    let rhs = luxemburg_norm(f, &p.scale(r)?, tol)?.powf(r);
    let power_identity_rel_err = rel_diff(lhs, rhs);
    if power_identity_rel_err > 1e-6 {
        return Err(Error::PropertyViolation(format!(
            "power identity failed: ‖|f|^r‖={lhs:.12e} vs ‖f‖^r_(rp)={rhs:.12e}"
        )));
    }

    let scaled = f.map(|v| mu * v);
    let norm_scaled = luxemburg_norm(&scaled, p, tol)?;
    let homogeneity_rel_err = rel_diff(norm_scaled, mu.abs() * norm_f);
    if homogeneity_rel_err > 1e-9 + 10.0 * tol {
        return Err(Error::PropertyViolation(format!(
            "homogeneity failed: ‖μf‖={norm_scaled:.12e} vs |μ|‖f‖={:.12e}",
            mu.abs() * norm_f
        )));
    }

    let pu = p.p_underline();
    let sum = f.zip_with(g, |a, b| a + b)?;
    let norm_sum = luxemburg_norm(&sum, p, tol)?;
    let triangle_margin = norm_sum.powf(pu) - (norm_f.powf(pu) + norm_g.powf(pu));
    if triangle_margin > 1e-9 * (1.0 + norm_f.powf(pu) + norm_g.powf(pu)) {
        return Err(Error::PropertyViolation(format!(
            "p-underline triangle inequality failed by {triangle_margin:.3e}"
        )));
    }

    // For ‖f‖ ≤ 1 the modular is bounded by ‖f‖^{p₋} (factor out ‖f‖^{p(x)}
    // ≤ ‖f‖^{p₋} and use ϱ(f/‖f‖) = 1); when p₋ ≥ 1 this implies the plain
    // bound ϱ(f) ≤ ‖f‖.
    let mut modular_bound_checked = false;
    if norm_f > 0.0 && norm_f <= 1.0 {
        modular_bound_checked = true;
        let m = modular(f, p);
        let bound = norm_f.powf(p.p_minus());
        if m > bound * (1.0 + 1e-9) + 10.0 * tol {
            return Err(Error::PropertyViolation(format!(
                "modular bound failed: ϱ(f)={m:.12e} > ‖f‖^p₋={bound:.12e}"
            )));
        }
        if p.p_minus() >= 1.0 && m > norm_f * (1.0 + 1e-9) + 10.0 * tol {
            return Err(Error::PropertyViolation(format!(
                "modular bound failed: ϱ(f)={m:.12e} > ‖f‖={norm_f:.12e}"
            )));
        }
    }

    Ok(NormIdentityReport {
        power_identity_rel_err,
        homogeneity_rel_err,
        triangle_margin,
        modular_bound_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::Dilation;
    use crate::grid::BoundingBox;
    use nalgebra::DMatrix;

    fn qn_1d() -> QuasiNormEvaluator {
        let d = Dilation::analyze(DMatrix::from_row_slice(1, 1, &[2.0]), 0.01).unwrap();
        QuasiNormEvaluator::build(d).unwrap()
    }

    fn indicator_01() -> GriddedFunction {
        let bbox = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        GriddedFunction::from_fn(bbox, 128, |_| 1.0)
    }

    #[test]
    fn modular_of_unit_indicator_with_p2_is_one() {
        let p = ExponentFunction::constant(2.0).unwrap();
        assert!((modular(&indicator_01(), &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modular_of_doubled_indicator_is_four() {
        let p = ExponentFunction::constant(2.0).unwrap();
        let f = indicator_01().map(|v| 2.0 * v);
        assert!((modular(&f, &p) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn modular_with_step_exponent_on_unit_values() {
        // |f| ≡ 1 on [-1,1], p(x) = 2 + χ_{x>0}: the integrand is 1 either way.
        let bbox = BoundingBox::new(vec![-1.0], vec![1.0]).unwrap();
        let f = GriddedFunction::from_fn(bbox, 128, |_| 1.0);
        let p = ExponentFunction::step(2.0, 3.0, 0.0).unwrap();
        assert!((modular(&f, &p) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn luxemburg_matches_the_constant_exponent_closed_form() {
        // ‖c·χ_E‖_{p₀} = c·|E|^{1/p₀}
        let bbox = BoundingBox::new(vec![0.0], vec![0.7]).unwrap();
        let f = GriddedFunction::from_fn(bbox, 64, |_| 3.0);
        let p = ExponentFunction::constant(1.7).unwrap();
        let norm = luxemburg_norm(&f, &p, 1e-10).unwrap();
        let expect = 3.0 * 0.7f64.powf(1.0 / 1.7);
        assert!(rel_diff(norm, expect) < 1e-8);
    }

    #[test]
    fn luxemburg_of_zero_function_is_zero() {
        let bbox = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        let f = GriddedFunction::from_fn(bbox, 16, |_| 0.0);
        let p = ExponentFunction::constant(1.0).unwrap();
        assert_eq!(luxemburg_norm(&f, &p, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn golden_ratio_step_exponent_case() {
        // f = χ_[0,2], p = 1 + χ_{x>1}: ϱ(f/λ) = 1/λ + 1/λ², so the norm is
        // the positive root of λ² − λ − 1.
        let bbox = BoundingBox::new(vec![0.0], vec![2.0]).unwrap();
        let f = GriddedFunction::from_fn(bbox, 256, |_| 1.0);
        let p = ExponentFunction::step(1.0, 2.0, 1.0).unwrap();
        let norm = luxemburg_norm(&f, &p, 1e-10).unwrap();
        let golden = 0.5 * (1.0 + 5f64.sqrt());
        assert!(rel_diff(norm, golden) < 1e-6, "norm {norm} vs golden {golden}");
    }

    #[test]
    fn modular_at_the_norm_is_one() {
        let bbox = BoundingBox::new(vec![-1.0], vec![2.0]).unwrap();
        let f = GriddedFunction::from_fn(bbox, 128, |x| (1.0 - x[0] * x[0]).max(0.0));
        let qn = std::sync::Arc::new(qn_1d());
        let p = ExponentFunction::log_smooth(0.8, 0.15, 2.0, qn).unwrap();
        let tol = 1e-10;
        let norm = luxemburg_norm(&f, &p, tol).unwrap();
        let scaled = f.map(|v| v / norm);
        assert!((modular(&scaled, &p) - 1.0).abs() < 10.0 * tol);
    }

    #[test]
    fn huge_values_trigger_nonconvergence() {
        let bbox = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        let f = GriddedFunction::from_fn(bbox, 8, |_| 1e300);
        let p = ExponentFunction::constant(2.0).unwrap();
        assert!(matches!(
            luxemburg_norm(&f, &p, 1e-6),
            Err(Error::NonConvergence(_))
        ));
    }

    #[test]
    fn char_ball_norm_matches_closed_form_for_constant_p() {
        let qn = qn_1d();
        // B₀ has measure 1, B₂ has measure 4.
        for (level, measure) in [(0, 1.0f64), (2, 4.0f64)] {
            let ball = DilatedBall::origin(1, level);
            let p0 = 0.8;
            let p = ExponentFunction::constant(p0).unwrap();
            let norm = char_ball_norm(&qn, &ball, &p, 4096, 1e-10).unwrap();
            // The discrete object is the gridded indicator; compare against
            // the closed form at the gridded measure.
            let grid_measure = ball_indicator(&qn, &ball, 4096).unwrap().integrate();
            assert!(rel_diff(norm, grid_measure.powf(1.0 / p0)) < 1e-8);
            assert!(rel_diff(grid_measure, measure) < 1e-3);
        }
    }

    #[test]
    fn char_ball_norm_of_unit_ball_with_p1_is_one() {
        let qn = qn_1d();
        let p = ExponentFunction::constant(1.0).unwrap();
        let norm = char_ball_norm(&qn, &DilatedBall::origin(1, 0), &p, 4096, 1e-10).unwrap();
        assert!(rel_diff(norm, 1.0) < 1e-3);
    }

    #[test]
    fn char_ball_norm_is_stable_under_resolution_doubling() {
        // smooth exponent: doubling the resolution moves the norm by ≤ 1%
        let qn = std::sync::Arc::new(qn_1d());
        let p = ExponentFunction::log_smooth(0.8, 0.2, 3.0, qn.clone()).unwrap();
        let ball = DilatedBall::origin(1, 1);
        let coarse = char_ball_norm(&qn, &ball, &p, 1024, 1e-10).unwrap();
        let fine = char_ball_norm(&qn, &ball, &p, 2048, 1e-10).unwrap();
        assert!(rel_diff(coarse, fine) <= 0.01, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn modular_is_cauchy_under_grid_refinement() {
        let bbox = BoundingBox::new(vec![-1.0], vec![1.0]).unwrap();
        let f = |x: &[f64]| {
            let t = x[0] * x[0];
            if t < 1.0 { (-1.0 / (1.0 - t)).exp() } else { 0.0 }
        };
        let p = ExponentFunction::constant(1.3).unwrap();
        let coarse = modular(&GriddedFunction::from_fn(bbox.clone(), 128, f), &p);
        let fine = modular(&GriddedFunction::from_fn(bbox, 256, f), &p);
        assert!(rel_diff(coarse, fine) < 1e-3, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn log_holder_constant_exponent_has_ratio_zero() {
        let qn = qn_1d();
        let p = ExponentFunction::constant(0.8).unwrap();
        let report = check_log_holder(&p, &qn, 500, 7).unwrap();
        assert_eq!(report.max_pointwise_ratio, 0.0);
        assert_eq!(report.max_decay_ratio, 0.0);
    }

    #[test]
    fn log_smooth_decay_inequality_is_tight() {
        let qn = std::sync::Arc::new(qn_1d());
        let p = ExponentFunction::log_smooth(0.7, 0.2, 3.0, qn.clone()).unwrap();
        let report = check_log_holder(&p, &qn, 2000, 13).unwrap();
        // |p(x) − p_∞| = c/ln(e+ρ(x)) exactly: the second ratio is 1.
        assert!((report.max_decay_ratio - 1.0).abs() < 1e-9);
        assert!(report.max_pointwise_ratio <= 1.0);
    }

    #[test]
    fn step_exponent_violates_log_holder() {
        let qn = qn_1d();
        let p = ExponentFunction::step(1.0, 2.0, 0.0).unwrap();
        // Plenty of sampled pairs straddle the jump at small separation.
        let err = check_log_holder(&p, &qn, 2000, 19).unwrap_err();
        assert!(matches!(err, Error::PropertyViolation(_)));
    }

    #[test]
    fn remark21_identities_hold_for_constant_p() {
        let bbox = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        let f = GriddedFunction::from_fn(bbox.clone(), 128, |x| 1.0 + x[0]);
        let g = GriddedFunction::from_fn(bbox, 128, |x| (3.0 * x[0]).cos());
        let p = ExponentFunction::constant(2.0).unwrap();
        let report = verify_remark21(&p, &f, &g, 2.0, -3.0, 1e-10).unwrap();
        assert!(report.power_identity_rel_err < 1e-6);
        assert!(report.homogeneity_rel_err < 1e-8);
        assert!(report.triangle_margin <= 1e-8);
    }

    #[test]
    fn remark21_with_r_equal_one_is_trivial() {
        let bbox = BoundingBox::new(vec![0.0], vec![1.0]).unwrap();
        let f = GriddedFunction::from_fn(bbox.clone(), 64, |x| x[0]);
        let g = GriddedFunction::from_fn(bbox, 64, |_| 0.25);
        let p = ExponentFunction::constant(0.9).unwrap();
        let report = verify_remark21(&p, &f, &g, 1.0, 2.0, 1e-10).unwrap();
        assert!(report.power_identity_rel_err < 1e-9);
    }

    #[test]
    fn declared_bounds_are_cross_checked() {
        let bbox = BoundingBox::new(vec![-4.0], vec![4.0]).unwrap();
        let f = GriddedFunction::from_fn(bbox, 64, |_| 1.0);
        let good = ExponentFunction::constant(1.5).unwrap();
        assert!(good.check_declared_bounds(&f).is_ok());
        let lying = ExponentFunction::new(
            Arc::new(|x: &[f64]| if x[0] > 0.0 { 3.0 } else { 1.0 }),
            1.0,
            2.0,
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        assert!(lying.check_declared_bounds(&f).is_err());
    }
}
