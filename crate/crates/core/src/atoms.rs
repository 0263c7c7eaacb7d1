//! Construction and validation of anisotropic atoms.
//!
//! An atom is a profile supported in a dilated ball `B = x₀ + B_k` whose
//! `L^q` norm is at most `|B|^{1/q} / ‖χ_B‖_{L^{p(·)}}` and whose monomial
//! moments vanish through a prescribed degree `s`. Construction takes a
//! random polynomial of degree `s+1` in the ball's local coordinates
//! `z = A^{-k}(x − x₀)`, multiplies by a smooth bump vanishing on the ball
//! boundary, and projects out all moments of degree `≤ s` by solving the
//! Gram system of weighted monomials. The size condition is then met with
//! near-equality (factor 0.999) so downstream constant estimates are tight.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::dilation::{DilatedBall, Dilation, QuasiNormEvaluator};
use crate::error::{Error, Result};
use crate::grid::GriddedFunction;
use crate::sampling;
use crate::util::ChunkedSum;
use crate::varexp::{char_ball_norm, ExponentFunction};

/// Moment tolerance, relative to `‖a‖_{L¹} · diam(B)^{|α|}`.
pub const MOMENT_TOL: f64 = 1e-8;

/// Fraction of the size budget the constructed atom is scaled to.
const SIZE_FRACTION: f64 = 0.999;

/// Grid and Luxemburg-tolerance settings for atom construction.
#[derive(Debug, Clone, Copy)]
pub struct AtomConfig {
    /// Points per axis of the profile grid over the ball's bounding box.
    pub resolution: usize,
    /// Relative tolerance of the Luxemburg bisection used for `‖χ_B‖`.
    pub luxemburg_tol: f64,
}

impl AtomConfig {
    pub fn default_for_dim(dim: usize) -> Self {
        let resolution = match dim {
            1 => 256,
            2 => 64,
            _ => 24,
        };
        Self { resolution, luxemburg_tol: 1e-12 }
    }
}

/// An anisotropic atom: supporting ball, integrability index `q`
/// (`f64::INFINITY` allowed), moment degree `s`, and the sampled profile.
#[derive(Debug, Clone)]
pub struct Atom {
    ball: DilatedBall,
    q: f64,
    s: u32,
    profile: GriddedFunction,
    lq_norm_value: f64,
    size_budget: f64,
    gram_condition: Option<f64>,
}

impl Atom {
    pub fn ball(&self) -> &DilatedBall {
        &self.ball
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn profile(&self) -> &GriddedFunction {
        &self.profile
    }

    pub fn lq_norm_value(&self) -> f64 {
        self.lq_norm_value
    }

    /// `|B|^{1/q} / ‖χ_B‖_{L^{p(·)}}`.
    pub fn size_budget(&self) -> f64 {
        self.size_budget
    }

    /// Condition number of the moment-projection Gram system, when the atom
    /// was built by projection.
    pub fn gram_condition(&self) -> Option<f64> {
        self.gram_condition
    }

    /// Assemble an atom from an existing profile without rescaling or
    /// validity checks (profiles loaded from files, hand-built test atoms).
    /// Run [`validate_atom`] to find out what it actually is.
    pub fn from_profile_unchecked(
        ball: DilatedBall,
        q: f64,
        s: u32,
        profile: GriddedFunction,
        lq_norm_value: f64,
        size_budget: f64,
    ) -> Self {
        Self { ball, q, s, profile, lq_norm_value, size_budget, gram_condition: None }
    }

    /// A copy with every profile value multiplied by `factor` (the norm
    /// fields follow suit; validity is broken for `|factor| > 1`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ball: self.ball.clone(),
            q: self.q,
            s: self.s,
            profile: self.profile.map(|v| factor * v),
            lq_norm_value: self.lq_norm_value * factor.abs(),
            size_budget: self.size_budget,
            gram_condition: self.gram_condition,
        }
    }
}

/// Validation outcome for the three atom conditions.
#[derive(Debug, Clone, Serialize)]
pub struct AtomReport {
    pub support_ok: bool,
    pub size_ok: bool,
    pub moments_ok: bool,
    /// max over `|α| ≤ s` of `|∫ a·x^α| / (‖a‖_{L¹}·diam(B)^{|α|})`
    pub worst_moment: f64,
    pub size_ratio: f64,
}

impl AtomReport {
    pub fn validates(&self) -> bool {
        self.support_ok && self.size_ok && self.moments_ok
    }
}

/// Smallest admissible moment degree `max(0, ⌊(1/p₋ − 1)·ln b / ln λ₋⌋)`.
pub fn minimal_s(p: &ExponentFunction, d: &Dilation) -> u32 {
    let value = (1.0 / p.p_minus() - 1.0) * d.b().ln() / d.lambda_minus().ln();
    value.floor().max(0.0) as u32
}

/// Midpoint-rule `L^q` norm; the exact maximum of `|values|` for `q = ∞`.
pub fn lq_norm(f: &GriddedFunction, q: f64) -> Result<f64> {
    if q.is_infinite() && q > 0.0 {
        return Ok(f.values().iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q {q} not in [1, inf]")));
    }
    let vol = f.cell_volume();
    let mut acc = ChunkedSum::<f64>::new();
    for v in f.values() {
        if *v != 0.0 {
            acc.push(v.abs().powf(q) * vol);
        }
    }
    Ok(acc.finish().powf(1.0 / q))
}

/// `|B_k|^{1/q} = b^{k/q}` with `q = ∞` giving `1`.
fn measure_power(d: &Dilation, level: i32, q: f64) -> f64 {
    if q.is_infinite() {
        1.0
    } else {
        d.b().powf(level as f64 / q)
    }
}

/// All multi-indices `α ∈ ℤ₊ⁿ` with `|α| ≤ max_degree`, ordered by degree
/// then lexicographically.
pub fn multi_indices(dim: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        let mut stack = vec![(Vec::new(), deg)];
        while let Some((prefix, remaining)) = stack.pop() {
            if prefix.len() == dim - 1 {
                let mut alpha = prefix;
                alpha.push(remaining);
                out.push(alpha);
                continue;
            }
            // descend from high to low so popping yields lexicographic order
            for take in 0..=remaining {
                let mut next = prefix.clone();
                next.push(remaining - take);
                stack.push((next, take));
            }
        }
    }
    out
}

fn monomial(z: &[f64], alpha: &[u32]) -> f64 {
    z.iter().zip(alpha).map(|(v, a)| v.powi(*a as i32)).product()
}

/// Euclidean diameter of the dilated ball at the given level.
pub fn ball_diameter(qn: &QuasiNormEvaluator, level: i32) -> f64 {
    let mk_inv =
        qn.power(level) * qn.ellipsoid().matrix_inverse() * qn.power(level).transpose();
    let max_eig = mk_inv.symmetric_eigen().eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
    2.0 * (qn.ellipsoid().volume_scale() * max_eig).sqrt()
}

/// Construct a validated `(p(·), q, s)`-atom on the given ball.
///
/// Preconditions: `q ∈ (max{p₊, 1}, ∞]` and `s ≥ minimal_s(p, d)`.
/// Profiles that the moment projection annihilates are retried with derived
/// seeds up to 8 times before failing.
pub fn make_atom(
    qn: &QuasiNormEvaluator,
    ball: &DilatedBall,
    q: f64,
    s: u32,
    p: &ExponentFunction,
    seed: u64,
    cfg: &AtomConfig,
) -> Result<Atom> {
    let d = qn.dilation();
    let dim = qn.dim();
    if ball.center.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: ball.center.len() });
    }
    let q_floor = p.p_plus().max(1.0);
    if !(q > q_floor) {
        return Err(Error::InvalidParameter(format!(
            "q must exceed max(p_plus, 1) = {q_floor}, got {q}"
        )));
    }
    let smin = minimal_s(p, d);
    if s < smin {
        return Err(Error::InvalidParameter(format!("s {s} below minimal_s {smin}")));
    }

    let bbox = qn.ball_bbox(ball)?;
    let c = qn.ellipsoid().volume_scale();
    let cells = cfg.resolution.pow(dim as u32);

    // Per-cell geometry shared across retry attempts: bump weight and local
    // coordinates z = A^{-k}(x - x0).
    let mut weight = vec![0.0f64; cells];
    let mut local = vec![vec![0.0f64; dim]; cells];
    {
        let probe = GriddedFunction::from_fn(bbox.clone(), cfg.resolution, |_| 0.0);
        let mut flat = 0usize;
        probe.for_each_cell(|x, _| {
            let v: Vec<f64> = x.iter().zip(&ball.center).map(|(a, b)| a - b).collect();
            let z = qn.inv_power(ball.level) * DVector::from_column_slice(&v);
            let u = qn.ellipsoid().form(&z) / c;
            weight[flat] = if u < 1.0 { (-1.0 / (1.0 - u)).exp() } else { 0.0 };
            local[flat] = z.iter().copied().collect();
            flat += 1;
        });
    }

    let seed_alphas = multi_indices(dim, s + 1);
    let moment_alphas = multi_indices(dim, s);
    let vol = bbox.volume() / cells as f64;

    let mut last_err = Error::DegenerateProfile(0);
    for attempt in 0..8u64 {
        let mut rng =
            sampling::rng(seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let coefs: Vec<f64> = seed_alphas.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();

        let base: Vec<f64> = (0..cells)
            .map(|i| {
                if weight[i] == 0.0 {
                    return 0.0;
                }
                let g0: f64 = seed_alphas
                    .iter()
                    .zip(&coefs)
                    .map(|(a, cf)| cf * monomial(&local[i], a))
                    .sum();
                weight[i] * g0
            })
            .collect();

        // Gram system of weighted local monomials of degree ≤ s.
        let nm = moment_alphas.len();
        let mut gram = DMatrix::<f64>::zeros(nm, nm);
        let mut rhs = DVector::<f64>::zeros(nm);
        for i in 0..cells {
            if weight[i] == 0.0 {
                continue;
            }
            let momv: Vec<f64> = moment_alphas.iter().map(|a| monomial(&local[i], a)).collect();
            for (r, mr) in momv.iter().enumerate() {
                rhs[r] += base[i] * mr * vol;
                for (cidx, mc) in momv.iter().enumerate() {
                    gram[(r, cidx)] += weight[i] * mr * mc * vol;
                }
            }
        }
        let svd = gram.clone().svd(false, false);
        let smax = svd.singular_values.iter().fold(0.0f64, |m, v| m.max(*v));
        let smin_sv = svd.singular_values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let gram_condition = smax / smin_sv;
        let coeffs = match gram.lu().solve(&rhs) {
            Some(cv) => cv,
            None => {
                last_err = Error::DegenerateProfile(attempt as u32 + 1);
                continue;
            }
        };

        let mut values = base;
        for i in 0..cells {
            if weight[i] == 0.0 {
                continue;
            }
            let correction: f64 = moment_alphas
                .iter()
                .zip(coeffs.iter())
                .map(|(a, cf)| cf * monomial(&local[i], a))
                .sum();
            values[i] -= weight[i] * correction;
        }

        let l2: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if l2 < 1e-10 {
            last_err = Error::DegenerateProfile(attempt as u32 + 1);
            continue;
        }

        let mut profile = GriddedFunction::from_values(bbox.clone(), cfg.resolution, values)?;
        let lq = lq_norm(&profile, q)?;
        let chi_norm = char_ball_norm(qn, ball, p, cfg.resolution, cfg.luxemburg_tol)?;
        let size_budget = measure_power(d, ball.level, q) / chi_norm;
        let factor = SIZE_FRACTION * size_budget / lq;
        for v in profile.values_mut() {
            *v *= factor;
        }
        let lq_norm_value = lq_norm(&profile, q)?;

        let atom = Atom {
            ball: ball.clone(),
            q,
            s,
            profile,
            lq_norm_value,
            size_budget,
            gram_condition: Some(gram_condition),
        };
        let report = validate_atom(&atom, p, qn, cfg.luxemburg_tol)?;
        if report.validates() {
            return Ok(atom);
        }
        last_err = Error::PropertyViolation(format!(
            "constructed atom failed self-validation: {report:?}"
        ));
    }
    Err(last_err)
}

/// Recompute the three atom conditions by quadrature.
pub fn validate_atom(
    a: &Atom,
    p: &ExponentFunction,
    qn: &QuasiNormEvaluator,
    luxemburg_tol: f64,
) -> Result<AtomReport> {
    let mut support_ok = true;
    a.profile.for_each_cell(|x, v| {
        if v != 0.0 && !qn.ball_contains(&a.ball, x) {
            support_ok = false;
        }
    });

    let lq = lq_norm(&a.profile, a.q)?;
    let chi_norm = char_ball_norm(qn, &a.ball, p, a.profile.resolution(), luxemburg_tol)?;
    let budget = measure_power(qn.dilation(), a.ball.level, a.q) / chi_norm;
    let size_ratio = if budget > 0.0 { lq / budget } else { f64::INFINITY };
    let size_ok = lq <= budget * (1.0 + 1e-9);

    let l1 = a.profile.l1_norm();
    let diam = ball_diameter(qn, a.ball.level);
    let mut worst_moment = 0.0f64;
    for alpha in multi_indices(qn.dim(), a.s) {
        let vol = a.profile.cell_volume();
        let mut acc = ChunkedSum::<f64>::new();
        a.profile.for_each_cell(|x, v| {
            if v != 0.0 {
                acc.push(v * monomial(x, &alpha) * vol);
            }
        });
        let degree: u32 = alpha.iter().sum();
        let scale = l1 * diam.powi(degree as i32);
        if scale > 0.0 {
            worst_moment = worst_moment.max(acc.finish().abs() / scale);
        }
    }
    let moments_ok = worst_moment <= MOMENT_TOL;

    Ok(AtomReport { support_ok, size_ok, moments_ok, worst_moment, size_ratio })
}
