//! Expansive dilations and the anisotropic geometry they generate.
//!
//! An expansive matrix `A` (every eigenvalue of modulus `> 1`) induces a
//! family of dilated balls `B_k = A^k Δ`, where `Δ` is an ellipsoid of unit
//! Lebesgue measure chosen so that `Δ ⊂ rΔ ⊂ AΔ` for some `r ∈ (1, λ₋)`.
//! The step homogeneous quasi-norm is `ρ_A(x) = b^k` for `x ∈ B_{k+1} \ B_k`
//! (`b = |det A|`) and `ρ_A(0) = 0`.  The ellipsoid is realized by the
//! Lyapunov-type series `M = Σ_j ρ^{2j} (A^{-j})ᵀ A^{-j}` with
//! `ρ = (1 + λ₋)/2`, which guarantees that the quadratic form contracts by at
//! least `ρ²` under `A^{-1}`, hence the containment chain holds for every
//! `r ≤ ρ`.
//!
//! Set containments are verified on deterministic boundary samples: a
//! boundary point of a quadratic-form ball moves strictly inward along its
//! ray, so `open ⊂ open` containment is equivalent to a non-strict inequality
//! on boundary samples.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::BoundingBox;
use crate::sampling;
use crate::util::{rel_diff, unit_ball_volume};

/// Relative slack used when a boundary sample is tested against a closed
/// quadratic-form level set.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Default level-search window for the step quasi-norm.
pub const DEFAULT_WINDOW: i32 = 256;

/// Default number of series terms for the ellipsoid construction.
pub const DEFAULT_ELLIPSOID_TERMS: usize = 64;

/// An expansive dilation with its spectral data.
#[derive(Debug, Clone)]
pub struct Dilation {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
    eigenvalues: Vec<Complex64>,
    b: f64,
    lambda_minus: f64,
    lambda_plus: f64,
    diagonalizable: bool,
}

impl Dilation {
    /// Analyze a square matrix: eigenvalues, expansiveness, `b = |det A|`,
    /// and the spectral slack bounds `λ₋ ≤ min|λ| ≤ max|λ| ≤ λ₊`.
    ///
    /// When the matrix is diagonalizable over `ℂ` the bounds are taken with
    /// equality; otherwise they are relaxed by the factor `1 ∓ epsilon`
    /// (keeping `λ₋ > 1`).
    pub fn analyze(matrix: DMatrix<f64>, epsilon: f64) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n.max(1), got: matrix.ncols() });
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 0.5)")));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix entries must be finite".into()));
        }
        let det = matrix.clone().lu().determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        let eigenvalues: Vec<Complex64> = matrix.complex_eigenvalues().iter().copied().collect();
        let min_abs = eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let max_abs = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if min_abs <= 1.0 {
            return Err(Error::NotExpansive(min_abs));
        }
        let diagonalizable = is_diagonalizable(&matrix, &eigenvalues);
        let (lambda_minus, lambda_plus) = if diagonalizable {
            (min_abs, max_abs)
        } else {
            let mut lm = (1.0 - epsilon) * min_abs;
            if lm <= 1.0 {
                // Keep λ₋ strictly inside (1, min|λ|).
                lm = 0.5 * (1.0 + min_abs);
            }
            (lm, (1.0 + epsilon) * max_abs)
        };
        let inverse = matrix.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(Self {
            entries: matrix,
            inverse,
            eigenvalues,
            b: det.abs(),
            lambda_minus,
            lambda_plus,
            diagonalizable,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// `b = |det A|`, the measure scaling of one dilation step.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.diagonalizable
    }

    /// The transposed dilation (same determinant, same spectrum).
    pub fn transpose(&self, epsilon: f64) -> Result<Dilation> {
        Dilation::analyze(self.entries.transpose(), epsilon)
    }

    /// `b^k` with the sign convention used by the step quasi-norm.
    pub fn pow_b(&self, k: i32) -> f64 {
        if k >= 0 {
            self.b.powi(k)
        } else {
            1.0 / self.b.powi(-k)
        }
    }
}

/// Diagonalizability over `ℂ`: every eigenvalue cluster must have geometric
/// multiplicity equal to its size. Simple eigenvalues are never defective.
fn is_diagonalizable(matrix: &DMatrix<f64>, eigenvalues: &[Complex64]) -> bool {
    let n = matrix.nrows();
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-7 * scale;
    let mut remaining: Vec<Complex64> = eigenvalues.to_vec();
    while let Some(rep) = remaining.first().copied() {
        let (cluster, rest): (Vec<_>, Vec<_>) =
            remaining.into_iter().partition(|z| (z - rep).norm() <= tol);
        remaining = rest;
        if cluster.len() > 1 {
            let mean = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
            let shifted: Vec<Complex64> = (0..n * n)
                .map(|f| {
                    let (i, j) = (f / n, f % n);
                    let mut v = Complex64::new(matrix[(i, j)], 0.0);
                    if i == j {
                        v -= mean;
                    }
                    v
                })
                .collect();
            let geometric = n - complex_rank(shifted, n, tol);
            if geometric < cluster.len() {
                return false;
            }
        }
    }
    true
}

/// Rank of an `n×n` complex matrix (row-major) by Gaussian elimination with
/// partial pivoting.
fn complex_rank(mut m: Vec<Complex64>, n: usize, tol: f64) -> usize {
    let mut rank = 0;
    let mut row = 0;
    for col in 0..n {
        let (mut pivot_row, mut pivot_norm) = (row, 0.0);
        for r in row..n {
            let v = m[r * n + col].norm();
            if v > pivot_norm {
                pivot_norm = v;
                pivot_row = r;
            }
        }
        if pivot_norm <= tol {
            continue;
        }
        for c in 0..n {
            m.swap(row * n + c, pivot_row * n + c);
        }
        let pivot = m[row * n + col];
        for r in (row + 1)..n {
            let factor = m[r * n + col] / pivot;
            for c in col..n {
                let sub = factor * m[row * n + c];
                m[r * n + c] -= sub;
            }
        }
        rank += 1;
        row += 1;
        if row == n {
            break;
        }
    }
    rank
}

/// The unit-volume ellipsoid `Δ = {x : xᵀMx < volume_scale}` with the
/// admissible factor `r` for the chain `Δ ⊂ rΔ ⊂ AΔ`.
#[derive(Debug, Clone)]
pub struct EllipsoidNorm {
    m: DMatrix<f64>,
    m_inv: DMatrix<f64>,
    volume_scale: f64,
    r: f64,
    boundary_samples: usize,
}

impl EllipsoidNorm {
    /// Build the ellipsoid from the truncated Lyapunov series
    /// `M = Σ_{j=0}^{terms} ρ^{2j} (A^{-j})ᵀ A^{-j}`, `ρ = (1 + λ₋)/2`,
    /// rescaled so `|Δ| = 1`, and pick the largest ladder value
    /// `r ∈ (1, λ₋)` that passes sampled boundary verification.
    pub fn build(d: &Dilation, terms: usize) -> Result<Self> {
        Self::build_with_samples(d, terms, default_boundary_samples(d.dim()))
    }

    pub fn build_with_samples(d: &Dilation, terms: usize, samples: usize) -> Result<Self> {
        if terms < 8 {
            return Err(Error::InvalidParameter(format!("terms {terms} < 8")));
        }
        let n = d.dim();
        let rho = 0.5 * (1.0 + d.lambda_minus());
        let mut sum = DMatrix::<f64>::identity(n, n);
        let mut inv_pow = DMatrix::<f64>::identity(n, n);
        let mut scale = 1.0;
        for _ in 1..=terms {
            inv_pow = &inv_pow * d.inverse();
            scale *= rho * rho;
            let term = inv_pow.transpose() * &inv_pow * scale;
            let tn = term.norm();
            sum += term;
            if tn < 1e-15 * sum.norm() {
                break;
            }
        }
        let det = sum.clone().lu().determinant();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        let volume_scale = (det.sqrt() / unit_ball_volume(n)).powf(2.0 / n as f64);
        let m_inv = sum.clone().try_inverse().ok_or(Error::Singular)?;
        let mut e = Self { m: sum, m_inv, volume_scale, r: 1.0, boundary_samples: samples };
        e.r = e.pick_r(d, samples)?;
        Ok(e)
    }

    /// Largest ladder value `r ∈ (1, λ₋)` with `rΔ ⊂ AΔ` on all boundary
    /// samples. `Δ ⊂ rΔ` is automatic for `r > 1`.
    fn pick_r(&self, d: &Dilation, samples: usize) -> Result<f64> {
        let dirs = sampling::directions(d.dim(), samples);
        let lm = d.lambda_minus();
        for i in (1..64usize).rev() {
            let r = 1.0 + (lm - 1.0) * i as f64 / 64.0;
            if self.r_chain_holds(d, r, &dirs) {
                return Ok(r);
            }
        }
        Err(Error::ContainmentFailure)
    }

    fn r_chain_holds(&self, d: &Dilation, r: f64, dirs: &[Vec<f64>]) -> bool {
        let limit = self.volume_scale * (1.0 + BOUNDARY_SLACK);
        dirs.iter().all(|u| {
            let t = self.boundary_radius(u);
            let y = DVector::from_iterator(u.len(), u.iter().map(|c| c * t * r));
            let pre = d.inverse() * y;
            self.form(&pre) <= limit
        })
    }

    /// Re-verify `Δ ⊂ rΔ ⊂ AΔ` on a fresh direction set.
    pub fn verify_chain(&self, d: &Dilation, samples: usize) -> bool {
        let dirs = sampling::directions(d.dim(), samples);
        let inner = dirs.iter().all(|u| {
            let t = self.boundary_radius(u);
            let y = DVector::from_iterator(u.len(), u.iter().map(|c| c * t / self.r));
            self.form(&y) <= self.volume_scale * (1.0 + BOUNDARY_SLACK)
        });
        inner && self.r_chain_holds(d, self.r, &dirs)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn matrix_inverse(&self) -> &DMatrix<f64> {
        &self.m_inv
    }

    pub fn volume_scale(&self) -> f64 {
        self.volume_scale
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn boundary_samples(&self) -> usize {
        self.boundary_samples
    }

    /// Quadratic form `xᵀMx`.
    pub fn form(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.m * x)[(0, 0)]
    }

    /// Radius `t(u)` with `Q(t·u) = volume_scale` along direction `u`.
    pub fn boundary_radius(&self, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        (self.volume_scale / self.form(&v)).sqrt()
    }

    /// Closed-form Lebesgue measure of `Δ` (should be 1 after rescaling).
    pub fn volume(&self) -> f64 {
        let det = self.m.clone().lu().determinant();
        unit_ball_volume(self.dim()) * self.volume_scale.powf(self.dim() as f64 / 2.0)
            / det.sqrt()
    }
}

fn default_boundary_samples(dim: usize) -> usize {
    if dim == 1 {
        256
    } else {
        4096
    }
}

/// A dilated ball `center + B_k`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct DilatedBall {
    pub center: Vec<f64>,
    pub level: i32,
}

impl DilatedBall {
    pub fn new(center: Vec<f64>, level: i32) -> Self {
        Self { center, level }
    }

    pub fn origin(dim: usize, level: i32) -> Self {
        Self { center: vec![0.0; dim], level }
    }
}

/// Value of the step quasi-norm together with the shell it was found on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiNormValue {
    /// `b^level`, or an asymptotic estimate when the window was exceeded.
    pub value: f64,
    /// The `k` with `x ∈ B_{k+1} \ B_k`; `None` for `x = 0` or a flagged
    /// fallback value.
    pub level: Option<i32>,
    pub window_exceeded: bool,
}

/// Evaluates the step homogeneous quasi-norm by monotone level search over
/// the dilated balls. Immutable after construction; safe to share.
#[derive(Debug, Clone)]
pub struct QuasiNormEvaluator {
    dilation: Dilation,
    ellipsoid: EllipsoidNorm,
    window: i32,
    /// `pows[i] = A^i`, `inv_pows[i] = A^{-i}`, `i ∈ [0, window]`.
    pows: Vec<DMatrix<f64>>,
    inv_pows: Vec<DMatrix<f64>>,
}

impl QuasiNormEvaluator {
    pub fn new(dilation: Dilation, ellipsoid: EllipsoidNorm) -> Result<Self> {
        Self::with_window(dilation, ellipsoid, DEFAULT_WINDOW)
    }

    pub fn with_window(dilation: Dilation, ellipsoid: EllipsoidNorm, window: i32) -> Result<Self> {
        if ellipsoid.dim() != dilation.dim() {
            return Err(Error::DimensionMismatch {
                expected: dilation.dim(),
                got: ellipsoid.dim(),
            });
        }
        if window < 1 {
            return Err(Error::InvalidParameter("window must be positive".into()));
        }
        let n = dilation.dim();
        let mut pows = Vec::with_capacity(window as usize + 1);
        let mut inv_pows = Vec::with_capacity(window as usize + 1);
        pows.push(DMatrix::identity(n, n));
        inv_pows.push(DMatrix::identity(n, n));
        for i in 1..=(window as usize) {
            pows.push(&pows[i - 1] * dilation.entries());
            inv_pows.push(&inv_pows[i - 1] * dilation.inverse());
        }
        Ok(Self { dilation, ellipsoid, window, pows, inv_pows })
    }

    /// Build with default ellipsoid parameters.
    pub fn build(dilation: Dilation) -> Result<Self> {
        let e = EllipsoidNorm::build(&dilation, DEFAULT_ELLIPSOID_TERMS)?;
        Self::new(dilation, e)
    }

    pub fn dilation(&self) -> &Dilation {
        &self.dilation
    }

    pub fn ellipsoid(&self) -> &EllipsoidNorm {
        &self.ellipsoid
    }

    pub fn dim(&self) -> usize {
        self.dilation.dim()
    }

    pub fn window(&self) -> i32 {
        self.window
    }

    /// `A^k` for `|k| ≤ window`.
    pub fn power(&self, k: i32) -> &DMatrix<f64> {
        assert!(k.unsigned_abs() as usize <= self.pows.len() - 1, "power window exceeded");
        if k >= 0 {
            &self.pows[k as usize]
        } else {
            &self.inv_pows[(-k) as usize]
        }
    }

    /// `A^{-k}` for `|k| ≤ window`.
    pub fn inv_power(&self, k: i32) -> &DMatrix<f64> {
        self.power(-k)
    }

    /// Quadratic form of `v` pulled back to level `k`: `Q(A^{-k} v)`.
    pub fn form_at_level(&self, k: i32, v: &[f64]) -> f64 {
        let x = DVector::from_column_slice(v);
        let pulled = self.inv_power(k) * x;
        self.ellipsoid.form(&pulled)
    }

    /// Strict membership `v ∈ B_k` (the balls are open).
    pub fn member(&self, k: i32, v: &[f64]) -> bool {
        strictly_inside(self.form_at_level(k, v), self.ellipsoid.volume_scale)
    }

    /// Membership of `x` in the dilated ball `center + B_k`.
    pub fn ball_contains(&self, ball: &DilatedBall, x: &[f64]) -> bool {
        let v: Vec<f64> = x.iter().zip(&ball.center).map(|(a, c)| a - c).collect();
        self.member(ball.level, &v)
    }

    /// The step quasi-norm `ρ_A(x)`.
    pub fn evaluate(&self, x: &[f64]) -> QuasiNormValue {
        if x.iter().all(|v| *v == 0.0) {
            return QuasiNormValue { value: 0.0, level: None, window_exceeded: false };
        }
        if self.member(0, x) {
            let mut k = 0;
            while k > -self.window {
                if !self.member(k - 1, x) {
                    return self.at_shell(k);
                }
                k -= 1;
            }
        } else {
            let mut k = 1;
            while k <= self.window {
                if self.member(k, x) {
                    return self.at_shell(k);
                }
                k += 1;
            }
        }
        QuasiNormValue { value: self.asymptotic(x), level: None, window_exceeded: true }
    }

    /// Shorthand for `evaluate(x).value`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x).value
    }

    /// `m` is the smallest level with `x ∈ B_m`, so `x ∈ B_m \ B_{m-1}` and
    /// `ρ_A(x) = b^{m-1}`.
    fn at_shell(&self, m: i32) -> QuasiNormValue {
        QuasiNormValue {
            value: self.dilation.pow_b(m - 1),
            level: Some(m - 1),
            window_exceeded: false,
        }
    }

    /// Fallback for points beyond the level window: invert the two-sided
    /// comparison between `|x|` and powers of `ρ_A(x)` with the geometric
    /// mean of the spectral exponents.
    fn asymptotic(&self, x: &[f64]) -> f64 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lam = (self.dilation.lambda_minus() * self.dilation.lambda_plus()).sqrt();
        norm.powf(self.dilation.b().ln() / lam.ln())
    }

    /// Closed-form Lebesgue measure of `B_k` (equals `b^k`).
    pub fn ball_volume(&self, k: i32) -> f64 {
        let e = &self.ellipsoid;
        let n = self.dim();
        let mk = self.inv_power(k).transpose() * e.matrix() * self.inv_power(k);
        let det = mk.lu().determinant();
        unit_ball_volume(n) * e.volume_scale().powf(n as f64 / 2.0) / det.sqrt()
    }

    /// Axis-aligned bounding box of `center + B_k`.
    pub fn ball_bbox(&self, ball: &DilatedBall) -> Result<BoundingBox> {
        let n = self.dim();
        let mk_inv = self.power(ball.level) * self.ellipsoid.matrix_inverse()
            * self.power(ball.level).transpose();
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            let extent = (self.ellipsoid.volume_scale() * mk_inv[(i, i)]).sqrt();
            lo.push(ball.center[i] - extent);
            hi.push(ball.center[i] + extent);
        }
        BoundingBox::new(lo, hi)
    }

    /// Point on the boundary of `center + B_k` in direction `u`, scaled by
    /// `scale` (`scale = 1` is the boundary itself).
    pub fn boundary_point(&self, ball: &DilatedBall, u: &[f64], scale: f64) -> Vec<f64> {
        let t = self.ellipsoid.boundary_radius(u) * scale;
        let z = DVector::from_iterator(u.len(), u.iter().map(|c| c * t));
        let y = self.power(ball.level) * z;
        y.iter().zip(&ball.center).map(|(a, c)| a + c).collect()
    }

    /// A random point strictly inside `center + B_k`.
    pub fn sample_in_ball(&self, ball: &DilatedBall, rng: &mut impl Rng) -> Vec<f64> {
        let u = sampling::gaussian_direction(self.dim(), rng);
        let radial: f64 = rng.gen_range(0.0..0.999_f64);
        let frac = radial.powf(1.0 / self.dim() as f64);
        self.boundary_point(ball, &u, frac)
    }

    /// A random point strictly outside `B_k` (centered at the origin).
    pub fn sample_outside_level(&self, k: i32, rng: &mut impl Rng) -> Vec<f64> {
        let u = sampling::gaussian_direction(self.dim(), rng);
        let blow: f64 = 1.0 + rng.gen_range(1e-6..3.0);
        self.boundary_point(&DilatedBall::origin(self.dim(), k), &u, blow)
    }
}

#[inline]
fn strictly_inside(q: f64, threshold: f64) -> bool {
    q < threshold
}

/// The smallest integer `σ ≥ 0` such that `2B₀ ⊂ A^σ B₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SigmaConstant {
    pub sigma: u32,
}

impl SigmaConstant {
    /// Search upward from `σ = 0`, testing boundary samples of `2B₀` against
    /// the closed level set of `A^σ B₀` (ray-limit criterion, so the exact
    /// case `2B₀ = A^σ B₀` is accepted).
    pub fn compute(qn: &QuasiNormEvaluator, samples_per_sphere: usize) -> Result<Self> {
        let dirs = sampling::directions(qn.dim(), samples_per_sphere);
        let c = qn.ellipsoid().volume_scale();
        let limit = c * (1.0 + BOUNDARY_SLACK);
        for sigma in 0..=64u32 {
            let ok = dirs.iter().all(|u| {
                let t = qn.ellipsoid().boundary_radius(u);
                let y: Vec<f64> = u.iter().map(|v| 2.0 * t * v).collect();
                qn.form_at_level(sigma as i32, &y) <= limit
            });
            if ok {
                return Ok(Self { sigma });
            }
        }
        Err(Error::WindowExceeded(64))
    }
}

/// Outcome of the randomized containment and quasi-triangle checks.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub trials: usize,
    pub additive_pass: usize,
    pub complement_pass: usize,
    pub quasi_triangle_pass: usize,
    pub max_quasi_triangle_ratio: f64,
}

/// For random `k ≤ j`, `x ∈ B_k`, `y ∈ B_j`: check `x + y ∈ B_{j+σ}`; for
/// random `x ∈ B_k`, `y ∉ B_{k+σ}`: check `x + y ∉ B_k`; and check the
/// quasi-triangle inequality `ρ(x+y) ≤ b^σ (ρ(x) + ρ(y))`.
pub fn verify_containments(
    qn: &QuasiNormEvaluator,
    sigma: &SigmaConstant,
    trials: usize,
    seed: u64,
) -> Result<ContainmentReport> {
    let mut report = ContainmentReport {
        trials,
        additive_pass: 0,
        complement_pass: 0,
        quasi_triangle_pass: 0,
        max_quasi_triangle_ratio: 0.0,
    };
    if trials == 0 {
        return Ok(report);
    }
    let mut rng = sampling::rng(seed);
    let s = sigma.sigma as i32;
    for _ in 0..trials {
        let k = rng.gen_range(-6..=6);
        let j = k + rng.gen_range(0..=6);
        let x = qn.sample_in_ball(&DilatedBall::origin(qn.dim(), k), &mut rng);
        let y = qn.sample_in_ball(&DilatedBall::origin(qn.dim(), j), &mut rng);
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        if !qn.member(j + s, &sum) {
            return Err(Error::PropertyViolation(format!(
                "B_k + B_j ⊄ B_(j+σ): k={k} j={j} x={x:?} y={y:?}"
            )));
        }
        report.additive_pass += 1;

        let outside = qn.sample_outside_level(k + s, &mut rng);
        let sum2: Vec<f64> = x.iter().zip(&outside).map(|(a, b)| a + b).collect();
        if qn.member(k, &sum2) {
            return Err(Error::PropertyViolation(format!(
                "B_k + complement(B_(k+σ)) hit B_k: k={k} x={x:?} y={outside:?}"
            )));
        }
        report.complement_pass += 1;

        let (rx, ry, rs) = (qn.evaluate(&x), qn.evaluate(&y), qn.evaluate(&sum));
        if !rx.window_exceeded && !ry.window_exceeded && !rs.window_exceeded {
            let bound = qn.dilation().pow_b(s) * (rx.value + ry.value);
            let ratio = if bound == 0.0 { 0.0 } else { rs.value / bound };
            report.max_quasi_triangle_ratio = report.max_quasi_triangle_ratio.max(ratio);
            if ratio > 1.0 + 1e-12 {
                return Err(Error::PropertyViolation(format!(
                    "quasi-triangle violated: ratio={ratio} x={x:?} y={y:?}"
                )));
            }
            report.quasi_triangle_pass += 1;
        }
    }
    Ok(report)
}

/// Empirical two-sided comparison constant between `|x|` and
/// `[ρ_A(x)]^{ln λ∓ / ln b}`.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonEstimate {
    pub c: f64,
    pub samples: usize,
}

/// Smallest empirical `𝔠 ≥ 1` such that on all sampled points
///
/// * `ρ ≥ 1`:  `𝔠⁻¹ ρ^{lnλ₋/lnb} ≤ |x| ≤ 𝔠 ρ^{lnλ₊/lnb}`,
/// * `ρ < 1`:  `𝔠⁻¹ ρ^{lnλ₊/lnb} ≤ |x| ≤ 𝔠 ρ^{lnλ₋/lnb}`.
///
/// Sampling extends with `samples`, so enlarging the set never decreases the
/// estimate.
pub fn comparison_constant(
    qn: &QuasiNormEvaluator,
    samples: usize,
    seed: u64,
) -> Result<ComparisonEstimate> {
    if samples < 100 {
        return Err(Error::InvalidParameter(format!("samples {samples} < 100")));
    }
    let d = qn.dilation();
    let e_minus = d.lambda_minus().ln() / d.b().ln();
    let e_plus = d.lambda_plus().ln() / d.b().ln();
    let mut rng = sampling::rng(seed);
    let mut c: f64 = 1.0;
    for _ in 0..samples {
        let u = sampling::gaussian_direction(qn.dim(), &mut rng);
        let mag = 10f64.powf(rng.gen_range(-4.0..4.0));
        let x: Vec<f64> = u.iter().map(|v| v * mag).collect();
        let rho = qn.evaluate(&x);
        if rho.window_exceeded || rho.value == 0.0 {
            continue;
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (lo_exp, hi_exp) =
            if rho.value >= 1.0 { (e_minus, e_plus) } else { (e_plus, e_minus) };
        c = c.max(rho.value.powf(lo_exp) / norm);
        c = c.max(norm / rho.value.powf(hi_exp));
    }
    Ok(ComparisonEstimate { c, samples })
}

/// Relative error of `|B_k|` against `b^k`, used by volume-law checks.
pub fn ball_volume_rel_error(qn: &QuasiNormEvaluator, k: i32) -> f64 {
    rel_diff(qn.ball_volume(k), qn.dilation().pow_b(k))
}
