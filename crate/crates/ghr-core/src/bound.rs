//! The generalized uncertainty bound series.
//!
//! For a trajectory generated by a conjugate variable with central moments
//! mu_n, the variance product obeys
//!
//! ```text
//! var(T) var(H) >= (1/4) sum_{k odd} mu_2 U_k^2 / N_k
//! ```
//!
//! built from three ingredients, each a rational function of even moments:
//!
//! - `D_2n`: the determinant of the (m+1)x(m+1) matrix with entry (i, j) =
//!   mu_{2n-2i-2j}, m = (n-1)/2. It is the Gram determinant of the odd
//!   trajectory derivatives, hence nonnegative, with D_2 = mu_2 and the
//!   convention D_{-2} = 1.
//! - `N_n = D_2n / D_2n-4`: the squared norm of the n-th orthogonalized
//!   derivative, so N_1 = mu_2.
//! - `U_n = (-1)^m n mu_{n-1} - sum_{k<n odd} F_{n,k} U_k` with U_1 = 1,
//!   where the projection coefficient F_{n,k} is (-1)^((n+k)/2-1)/D_2k times
//!   the determinant obtained from D_2k by replacing its first row with
//!   mu_{n+k}, mu_{n+k-2}, ..., mu_{n+1}.
//!
//! The k = 1 term is exactly 1 (the Heisenberg floor). Every term is
//! dimensionless and scale invariant, which the floating backend exploits:
//! inputs are rescaled to unit variance before any determinant is formed, so
//! the degeneracy threshold [`DEGENERACY_EPS`] applies to dimensionless
//! quantities.
//!
//! Finite spectra eventually make the orthogonal frame collapse: N_k -> 0.
//! If the numerator U_k survives, the term blows up and no finite-variance
//! unbiased estimator exists along the trajectory ([`TermStatus::Divergent`],
//! infinite bound); if U_k vanishes too, the series has simply terminated
//! ([`TermStatus::Truncated`]).

use thiserror::Error;

use crate::linalg::SquareMatrix;
use crate::moments::{moments_of, DistributionSpec, MomentError, MomentSequence};
use crate::scalar::{int_pow, Scalar};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Dimensionless degeneracy threshold, applied after standardizing the
/// input to unit variance. The exact backend tests literal zero instead.
pub const DEGENERACY_EPS: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("moments through order {needed} required, only {available} available")]
    InsufficientMoments { needed: usize, available: usize },
    #[error("moment determinant D_{} vanishes: orthogonal frame is degenerate at k = {k}", 2 * k)]
    DegenerateDenominator { k: usize },
    #[error("series index must be odd, got {0}")]
    NotOdd(usize),
    #[error("projection F_{{n,k}} requires odd k < n, got n = {n}, k = {k}")]
    InvalidProjection { n: usize, k: usize },
    #[error("no closed form available for k = {0} (only 3 and 5)")]
    UnsupportedClosedForm(usize),
    #[error(transparent)]
    Moments(#[from] MomentError),
}

fn check_odd(n: usize) -> Result<(), BoundError> {
    if n.is_multiple_of(2) {
        Err(BoundError::NotOdd(n))
    } else {
        Ok(())
    }
}

fn need_order<S: Scalar>(mu: &MomentSequence<S>, needed: usize) -> Result<(), BoundError> {
    if mu.order() < needed {
        Err(BoundError::InsufficientMoments {
            needed,
            available: mu.order(),
        })
    } else {
        Ok(())
    }
}

/// The matrix behind D_2n, n odd: entry (i, j) = mu_{2n-2i-2j}.
fn d_matrix<S: Scalar>(mu: &MomentSequence<S>, n: usize) -> SquareMatrix<S> {
    let m = (n - 1) / 2;
    SquareMatrix::from_fn(m + 1, |i, j| mu.mu(2 * n - 2 * i - 2 * j).clone())
}

struct DetD<S> {
    det: S,
    /// Hadamard margin det / prod(diagonal). The matrix is a (reordered)
    /// Gram matrix, so the true margin lies in [0, 1]; floating elimination
    /// noise sits near machine epsilon on this scale no matter how large
    /// the moments are, which makes the margin the right dimensionless
    /// quantity for zero tests.
    margin: S,
    growth: Option<f64>,
}

impl<S: Scalar> DetD<S> {
    fn is_degenerate(&self) -> bool {
        if S::EXACT {
            self.det.is_zero()
        } else {
            !self.margin.to_f64().is_finite() || self.margin.near_zero(DEGENERACY_EPS)
        }
    }
}

fn det_d<S: Scalar>(mu: &MomentSequence<S>, n: usize) -> DetD<S> {
    let m = d_matrix(mu, n);
    let (det, growth) = m.determinant_with_growth();
    let mut diag = S::one();
    for i in 0..m.size() {
        diag = diag * m.at(i, i).clone();
    }
    let margin = if diag.is_zero() {
        S::zero()
    } else {
        det.clone() / diag
    };
    DetD { det, margin, growth }
}

/// D_2n for odd n. D_2 = mu_2, D_6 = mu_6 mu_2 - mu_4^2, ... Requires
/// moments through order 2n. Nonnegative for any valid moment sequence (up
/// to rounding in the floating backend).
pub fn hankel_determinant<S: Scalar>(
    mu: &MomentSequence<S>,
    n: usize,
) -> Result<S, BoundError> {
    check_odd(n)?;
    need_order(mu, 2 * n)?;
    let (eval, unit) = mu.eval_form();
    let d = det_d(&eval, n).det;
    // D_2n carries units (energy)^((n+1)^2 / 2).
    let half = n.div_ceil(2);
    Ok(match unit {
        Some(mu2) => d * int_pow(&mu2, (half * half) as u32),
        None => d,
    })
}

/// N_n = D_2n / D_2n-4, the squared norm of the n-th orthogonalized
/// trajectory derivative; N_1 = mu_2 by the convention D_{-2} = 1.
pub fn orthogonal_norm<S: Scalar>(mu: &MomentSequence<S>, n: usize) -> Result<S, BoundError> {
    check_odd(n)?;
    need_order(mu, 2 * n)?;
    if n == 1 {
        return Ok(mu.variance().clone());
    }
    let (eval, unit) = mu.eval_form();
    let num = det_d(&eval, n);
    let den = det_d(&eval, n - 2);
    if den.is_degenerate() {
        return Err(BoundError::DegenerateDenominator { k: n - 2 });
    }
    let ratio = num.det / den.det;
    Ok(match unit {
        Some(mu2) => ratio * int_pow(&mu2, n as u32),
        None => ratio,
    })
}

fn projection_core<S: Scalar>(
    mu: &MomentSequence<S>,
    n: usize,
    k: usize,
) -> Result<S, BoundError> {
    let mk = (k - 1) / 2;
    let dk = det_d(mu, k);
    if dk.is_degenerate() {
        return Err(BoundError::DegenerateDenominator { k });
    }
    let dk = dk.det;
    let num = SquareMatrix::from_fn(mk + 1, |i, j| {
        if i == 0 {
            mu.mu(n + k - 2 * j).clone()
        } else {
            mu.mu(2 * k - 2 * i - 2 * j).clone()
        }
    })
    .determinant();
    let v = num / dk;
    Ok(if ((n + k) / 2 - 1) % 2 == 1 { -v } else { v })
}

/// F_{n,k}: the coefficient of the k-th orthogonalized derivative in the
/// n-th raw derivative (n, k odd, k < n). Special cases
/// F_{n,1} = (-1)^m mu_{n+1} / mu_2 and F_{n,3} follow from the general
/// determinant.
pub fn projection_coefficient<S: Scalar>(
    mu: &MomentSequence<S>,
    n: usize,
    k: usize,
) -> Result<S, BoundError> {
    check_odd(n)?;
    check_odd(k)?;
    if k >= n {
        return Err(BoundError::InvalidProjection { n, k });
    }
    need_order(mu, n + k)?;
    let (eval, unit) = mu.eval_form();
    let f = projection_core(&eval, n, k)?;
    Ok(match unit {
        Some(mu2) => f * int_pow(&mu2, ((n - k) / 2) as u32),
        None => f,
    })
}

/// U_1, U_3, ..., U_n computed by the recursion, on evaluation-form moments.
fn numerators_core<S: Scalar>(mu: &MomentSequence<S>, n: usize) -> Result<Vec<S>, BoundError> {
    let mut us = vec![S::one()];
    for k in (3..=n).step_by(2) {
        let m = (k - 1) / 2;
        let lead = S::from_int(k as i64) * mu.mu(k - 1).clone();
        let mut u = if m % 2 == 1 { -lead } else { lead };
        for (s, u_prev) in us.iter().enumerate() {
            let f = projection_core(mu, k, 2 * s + 1)?;
            u = u - f * u_prev.clone();
        }
        us.push(u);
    }
    Ok(us)
}

/// Dimensionless resolution margin of D_2k: the determinant divided by the
/// product of its diagonal entries, in [0, 1] for valid input. Values at or
/// below [`DEGENERACY_EPS`] classify as degenerate; values below about 1e-6
/// mean the floating determinant route resolves fewer than 8 significant
/// digits and identity checks against it are not meaningful at 1e-8.
pub fn degeneracy_margin<S: Scalar>(mu: &MomentSequence<S>, k: usize) -> Result<f64, BoundError> {
    check_odd(k)?;
    need_order(mu, 2 * k)?;
    if mu.order() >= 2 && mu.variance().near_zero(0.0) {
        return Ok(0.0);
    }
    let (eval, _) = mu.eval_form();
    Ok(det_d(&eval, k).margin.to_f64())
}

/// The estimator-independent numerator U_n, via the recursion
/// U_n = (-1)^m n mu_{n-1} - sum F_{n,k} U_k with U_1 = 1.
pub fn numerator_u<S: Scalar>(mu: &MomentSequence<S>, n: usize) -> Result<S, BoundError> {
    check_odd(n)?;
    if n == 1 {
        return Ok(S::one());
    }
    need_order(mu, 2 * n - 2)?;
    let (eval, unit) = mu.eval_form();
    let u = numerators_core(&eval, n)?.pop().expect("nonempty");
    Ok(match unit {
        Some(mu2) => u * int_pow(&mu2, ((n - 1) / 2) as u32),
        None => u,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermStatus {
    Regular,
    /// Frame dimension exhausted: N_k and U_k both vanish; the series has
    /// terminated and the partial sum is final.
    Truncated,
    /// N_k vanishes while U_k does not: the term blows up and no
    /// finite-variance unbiased estimator exists (infinite bound).
    Divergent,
}

impl TermStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TermStatus::Regular => "regular",
            TermStatus::Truncated => "truncated",
            TermStatus::Divergent => "divergent",
        }
    }
}

/// One term of the bound series.
#[derive(Clone, Debug)]
pub struct BoundTerm<S> {
    pub k: usize,
    /// U_k, units (energy)^(k-1).
    pub numerator: S,
    /// N_k, units (energy)^(2k).
    pub squared_norm: S,
    /// mu_2 U_k^2 / N_k, dimensionless; zero unless status is Regular
    /// (k = 1 always contributes exactly 1).
    pub value: S,
    pub status: TermStatus,
    /// Pivot-growth estimate from the floating determinant elimination.
    pub condition: Option<f64>,
}

/// Final bound value: (1/4) times the series sum.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue<S> {
    Finite(S),
    /// A Divergent term was hit.
    Infinite,
    /// Zero-variance input: the trajectory is stationary and the bound on
    /// the variance product is vacuous.
    Undefined,
}

impl<S: Scalar> BoundValue<S> {
    pub fn to_f64(&self) -> f64 {
        match self {
            BoundValue::Finite(v) => v.to_f64(),
            BoundValue::Infinite => f64::INFINITY,
            BoundValue::Undefined => f64::NAN,
        }
    }
}

/// The assembled series for k = 1, 3, ..., k_max (stopping early on
/// degeneracy).
#[derive(Clone, Debug)]
pub struct BoundSeries<S> {
    pub terms: Vec<BoundTerm<S>>,
    /// Running sum of Regular term values, aligned with `terms`.
    pub partial_sums: Vec<S>,
    pub bound: BoundValue<S>,
    pub degeneracy: Option<String>,
}

/// The k-th series term with degeneracy classification. Requires moments
/// through order 2k.
pub fn series_term<S: Scalar>(mu: &MomentSequence<S>, k: usize) -> Result<BoundTerm<S>, BoundError> {
    check_odd(k)?;
    need_order(mu, 2 * k)?;
    if k == 1 {
        return Ok(BoundTerm {
            k: 1,
            numerator: S::one(),
            squared_norm: mu.variance().clone(),
            value: S::one(),
            status: TermStatus::Regular,
            condition: None,
        });
    }
    let (eval, unit) = mu.eval_form();
    if eval.variance().near_zero(DEGENERACY_EPS) {
        // Point mass: every moment vanishes and the frame never forms
        // beyond k = 1.
        return Ok(BoundTerm {
            k,
            numerator: S::zero(),
            squared_norm: S::zero(),
            value: S::zero(),
            status: TermStatus::Truncated,
            condition: None,
        });
    }
    let u = numerators_core(&eval, k)?.pop().expect("nonempty");
    let dk = det_d(&eval, k);
    let dk_prev = det_d(&eval, k - 2);
    debug_assert!(
        !dk_prev.is_degenerate(),
        "earlier degeneracy must surface through the projection denominators"
    );
    let growth = dk.growth;
    let (status, norm, value) = if dk.is_degenerate() {
        // N_k is zero at the resolution of the backend.
        if u.near_zero(DEGENERACY_EPS) {
            (TermStatus::Truncated, S::zero(), S::zero())
        } else {
            (TermStatus::Divergent, S::zero(), S::zero())
        }
    } else {
        let norm = dk.det / dk_prev.det;
        let v = eval.variance().clone() * u.clone() * u.clone() / norm.clone();
        (TermStatus::Regular, norm, v)
    };
    let (numerator, squared_norm) = match &unit {
        Some(mu2) => (
            u * int_pow(mu2, ((k - 1) / 2) as u32),
            norm * int_pow(mu2, k as u32),
        ),
        None => (u, norm),
    };
    Ok(BoundTerm {
        k,
        numerator,
        squared_norm,
        value,
        status,
        condition: growth,
    })
}

/// The series through k_max, stopping at the first non-Regular term. The
/// bound is (1/4) times the sum of Regular values, upgraded to Infinite on a
/// Divergent term and to Undefined for zero-variance input.
pub fn bound_series<S: Scalar>(
    mu: &MomentSequence<S>,
    k_max: usize,
) -> Result<BoundSeries<S>, BoundError> {
    check_odd(k_max)?;
    need_order(mu, 2 * k_max)?;
    let quarter = S::ratio(1, 4);

    if mu.order() >= 2 && {
        let (eval, _) = mu.eval_form();
        eval.variance().near_zero(DEGENERACY_EPS)
    } {
        let mut terms = vec![BoundTerm {
            k: 1,
            numerator: S::one(),
            squared_norm: mu.variance().clone(),
            value: S::one(),
            status: TermStatus::Regular,
            condition: None,
        }];
        let mut partial_sums = vec![S::one()];
        if k_max >= 3 {
            terms.push(BoundTerm {
                k: 3,
                numerator: S::zero(),
                squared_norm: S::zero(),
                value: S::zero(),
                status: TermStatus::Truncated,
                condition: None,
            });
            partial_sums.push(S::one());
        }
        return Ok(BoundSeries {
            terms,
            partial_sums,
            bound: BoundValue::Undefined,
            degeneracy: Some(
                "zero variance (Delta H^2 = 0): stationary trajectory, bound undefined".into(),
            ),
        });
    }

    let mut terms = Vec::new();
    let mut partial_sums = Vec::new();
    let mut sum = S::zero();
    let mut bound = None;
    let mut degeneracy = None;
    let mut k = 1usize;
    while k <= k_max {
        let term = series_term(mu, k)?;
        let status = term.status;
        if status == TermStatus::Regular {
            sum = sum + term.value.clone();
        }
        partial_sums.push(sum.clone());
        terms.push(term);
        match status {
            TermStatus::Regular => {}
            TermStatus::Truncated => {
                degeneracy = Some(format!(
                    "frame exhausted at k = {k} (N_{k} = 0, U_{k} = 0): series terminated"
                ));
                bound = Some(BoundValue::Finite(quarter.clone() * sum.clone()));
                break;
            }
            TermStatus::Divergent => {
                degeneracy = Some(format!(
                    "degenerate direction at k = {k} (N_{k} = 0, U_{k} != 0): \
                     no finite-variance unbiased estimator, bound infinite"
                ));
                bound = Some(BoundValue::Infinite);
                break;
            }
        }
        k += 2;
    }
    Ok(BoundSeries {
        terms,
        partial_sums,
        bound: bound.unwrap_or(BoundValue::Finite(quarter * sum)),
        degeneracy,
    })
}

/// Literal evaluation of the printed second and third correction terms,
/// used exclusively to cross-check [`series_term`]:
///
/// ```text
/// k = 3:  (mu_4 - 3 mu_2^2)^2 / (mu_6 mu_2 - mu_4^2)
/// k = 5:  mu_2 [mu_8 (mu_4 - 3 mu_2^2) + mu_6 (8 mu_4 mu_2 - mu_6) - 5 mu_4^3]^2
///         / ((mu_10 (mu_6 mu_2 - mu_4^2) + 2 mu_8 mu_6 mu_4 - mu_8^2 mu_2 - mu_6^3)
///            (mu_6 mu_2 - mu_4^2))
/// ```
pub fn closed_form_term<S: Scalar>(mu: &MomentSequence<S>, k: usize) -> Result<S, BoundError> {
    // Zero test on a determinant against its Hadamard bound (the diagonal
    // product), matching the margin rule used by the series path.
    fn vanishes<S: Scalar>(det: &S, diag: &S) -> bool {
        if S::EXACT {
            det.is_zero()
        } else if diag.is_zero() {
            true
        } else {
            (det.clone() / diag.clone()).near_zero(DEGENERACY_EPS)
        }
    }
    match k {
        3 => {
            need_order(mu, 6)?;
            let (e, _) = mu.eval_form();
            let (m2, m4, m6) = (e.mu(2).clone(), e.mu(4).clone(), e.mu(6).clone());
            let den = m6.clone() * m2.clone() - m4.clone() * m4.clone();
            if vanishes(&den, &(m6 * m2.clone())) {
                return Err(BoundError::DegenerateDenominator { k: 3 });
            }
            let dev = m4 - S::from_int(3) * m2.clone() * m2;
            Ok(dev.clone() * dev / den)
        }
        5 => {
            need_order(mu, 10)?;
            let (e, _) = mu.eval_form();
            let (m2, m4, m6, m8, m10) = (
                e.mu(2).clone(),
                e.mu(4).clone(),
                e.mu(6).clone(),
                e.mu(8).clone(),
                e.mu(10).clone(),
            );
            let d6 = m6.clone() * m2.clone() - m4.clone() * m4.clone();
            let d10 = m10.clone() * d6.clone()
                + S::from_int(2) * m8.clone() * m6.clone() * m4.clone()
                - m8.clone() * m8.clone() * m2.clone()
                - m6.clone() * m6.clone() * m6.clone();
            if vanishes(&d6, &(m6.clone() * m2.clone()))
                || vanishes(&d10, &(m10 * m6.clone() * m2.clone()))
            {
                return Err(BoundError::DegenerateDenominator { k: 5 });
            }
            let bracket = m8 * (m4.clone() - S::from_int(3) * m2.clone() * m2.clone())
                + m6.clone() * (S::from_int(8) * m4.clone() * m2.clone() - m6)
                - S::from_int(5) * m4.clone() * m4.clone() * m4;
            Ok(m2 * bracket.clone() * bracket / (d10 * d6))
        }
        _ => Err(BoundError::UnsupportedClosedForm(k)),
    }
}

/// The k = 3 correction for a gamma law with the given shape:
/// 18 / (3 shape^2 + 47 shape + 42), independent of the rate.
pub fn gamma_second_order<S: Scalar>(shape: &S) -> S {
    let den = S::from_int(3) * shape.clone() * shape.clone()
        + S::from_int(47) * shape.clone()
        + S::from_int(42);
    S::from_int(18) / den
}

/// One row of a gamma-shape parameter sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub shape: f64,
    pub term1: f64,
    pub term3: f64,
    pub term5: Option<f64>,
    pub bound: f64,
    /// 18 / (3 shape^2 + 47 shape + 42), the independent cross-check for
    /// the term3 column.
    pub second_order_closed_form: f64,
}

fn sweep_row(shape: f64, k_max: usize) -> Result<SweepRow, BoundError> {
    let mu = moments_of(&DistributionSpec::Gamma { shape, rate: 1.0 }, 2 * k_max)?;
    let series = bound_series(&mu, k_max)?;
    let value_at = |k: usize| {
        series
            .terms
            .iter()
            .find(|t| t.k == k)
            .map(|t| t.value)
            .unwrap_or(f64::NAN)
    };
    Ok(SweepRow {
        shape,
        term1: value_at(1),
        term3: value_at(3),
        term5: (k_max >= 5).then(|| value_at(5)),
        bound: series.bound.to_f64(),
        second_order_closed_form: gamma_second_order(&shape),
    })
}

/// Sweeps the gamma shape parameter, one row per value. Rows are
/// independent; with the `parallel` feature they are computed on the rayon
/// pool, in input order either way.
pub fn gamma_sweep(shapes: &[f64], k_max: usize) -> Result<Vec<SweepRow>, BoundError> {
    check_odd(k_max)?;
    #[cfg(feature = "parallel")]
    {
        shapes.par_iter().map(|&s| sweep_row(s, k_max)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        gamma_sweep_seq(shapes, k_max)
    }
}

/// Sequential variant of [`gamma_sweep`]; always available for comparison
/// benchmarks.
pub fn gamma_sweep_seq(shapes: &[f64], k_max: usize) -> Result<Vec<SweepRow>, BoundError> {
    check_odd(k_max)?;
    shapes.iter().map(|&s| sweep_row(s, k_max)).collect()
}
