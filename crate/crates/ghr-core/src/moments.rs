//! Central moments, cumulants, and distribution models.
//!
//! A [`MomentSequence`] holds the central moments mu_0..mu_order of a
//! probability distribution (mu_0 = 1, mu_1 = 0). It is the universal input
//! to the bound machinery: every correction term is a rational function of
//! even central moments. Cumulants are the dual representation; conversion
//! both ways uses the standard convolution recursion
//!
//! ```text
//! mu_n = sum_{j>=2} C(n-1, j-1) kappa_j mu_{n-j}
//! ```
//!
//! with kappa_1 suppressed (central moments discard location).
//!
//! Validity of a moment sequence is checked through two families of
//! even-moment Hankel matrices: `[mu_{2a+2b}]` (Gram matrix of even-order
//! trajectory derivatives, catches e.g. mu_4 < mu_2^2) and `[mu_{2a+2b+2}]`
//! (Gram matrix of odd-order derivatives, whose leading minors are the
//! determinants D_2, D_6, D_10, ... driving the bound series).

use thiserror::Error;

use crate::linalg::SquareMatrix;
use crate::scalar::{int_pow, Scalar};

/// Largest supported moment order. C(n-1, k) stays well inside i64/f64
/// integer range below this, and no physically sensible run needs more.
pub const MAX_ORDER: usize = 64;

/// Absolute tolerance on mu_1 = 0 and on probability normalization in the
/// floating backend.
pub const REAL_INPUT_TOL: f64 = 1e-12;

/// Relative eigenvalue tolerance for positive-semidefiniteness in the
/// floating backend: lambda_min >= -PSD_EPS * lambda_max.
pub const PSD_EPS: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("target order {target} exceeds available order {available}")]
    InsufficientOrder { target: usize, available: usize },
    #[error("invalid moment sequence: {0}")]
    InvalidMoments(String),
    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),
}

/// Central moments mu_0..mu_order; mu_n carries units (energy)^n.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence<S> {
    mu: Vec<S>,
}

impl<S: Scalar> MomentSequence<S> {
    /// Builds a sequence from raw values, enforcing mu_0 = 1 and mu_1 = 0
    /// (exactly in the rational backend, to `REAL_INPUT_TOL` in the floating
    /// one). Deeper positivity checks live in [`validate`].
    pub fn new(mu: Vec<S>) -> Result<Self, MomentError> {
        if mu.is_empty() {
            return Err(MomentError::InvalidMoments("no moments given".into()));
        }
        if mu.len() > MAX_ORDER + 1 {
            return Err(MomentError::InvalidMoments(format!(
                "order {} exceeds the supported maximum {MAX_ORDER}",
                mu.len() - 1
            )));
        }
        if !(mu[0].clone() - S::one()).near_zero(REAL_INPUT_TOL) {
            return Err(MomentError::InvalidMoments(format!(
                "mu_0 must be 1, got {}",
                mu[0]
            )));
        }
        if mu.len() > 1 && !mu[1].near_zero(REAL_INPUT_TOL) {
            return Err(MomentError::InvalidMoments(format!(
                "mu_1 must be 0 for central moments, got {}",
                mu[1]
            )));
        }
        if mu.len() > 2 && mu[2] < S::zero() && !mu[2].near_zero(REAL_INPUT_TOL) {
            return Err(MomentError::InvalidMoments(format!(
                "mu_2 must be nonnegative, got {}",
                mu[2]
            )));
        }
        Ok(Self { mu })
    }

    /// Largest available moment index.
    pub fn order(&self) -> usize {
        self.mu.len() - 1
    }

    /// mu_n. Panics when `n > order`; callers gate on [`order`](Self::order).
    pub fn mu(&self, n: usize) -> &S {
        &self.mu[n]
    }

    pub fn values(&self) -> &[S] {
        &self.mu
    }

    /// The variance mu_2.
    pub fn variance(&self) -> &S {
        &self.mu[2]
    }

    /// Rescales the underlying variable by `c`: mu_n -> c^n mu_n.
    pub fn scaled(&self, c: &S) -> Self {
        let mut power = S::one();
        let mu = self
            .mu
            .iter()
            .map(|m| {
                let v = m.clone() * power.clone();
                power = power.clone() * c.clone();
                v
            })
            .collect();
        Self { mu }
    }

    /// Copy truncated to `order`.
    pub fn truncated(&self, order: usize) -> Result<Self, MomentError> {
        if order > self.order() {
            return Err(MomentError::InsufficientOrder {
                target: order,
                available: self.order(),
            });
        }
        Ok(Self {
            mu: self.mu[..=order].to_vec(),
        })
    }

    /// Largest odd series index k whose term (which consumes moments through
    /// mu_{2k}) is computable from this sequence.
    pub fn max_series_index(&self) -> Option<usize> {
        let k = self.order() / 2;
        match k {
            0 => None,
            k if k % 2 == 1 => Some(k),
            k => Some(k - 1),
        }
    }

    /// Evaluation form for the floating backend: rescaled so mu_2 = 1 to
    /// tame Hankel conditioning, along with the original variance for
    /// unit restoration. Exact sequences and zero-variance sequences are
    /// returned unchanged.
    pub(crate) fn eval_form(&self) -> (Self, Option<S>) {
        if S::EXACT || self.order() < 2 {
            return (self.clone(), None);
        }
        let mu2 = self.mu[2].clone();
        if mu2.to_f64() <= 0.0 {
            return (self.clone(), None);
        }
        let c = S::from_f64(1.0 / mu2.to_f64().sqrt()).expect("finite scale");
        (self.scaled(&c), Some(mu2))
    }
}

/// Cumulants kappa_1..kappa_order; `kappa[0]` is unused padding.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantSequence<S> {
    kappa: Vec<S>,
}

impl<S: Scalar> CumulantSequence<S> {
    /// `kappa[r]` is kappa_r; index 0 is ignored and forced to zero.
    pub fn new(mut kappa: Vec<S>) -> Result<Self, MomentError> {
        if kappa.len() < 2 {
            return Err(MomentError::InvalidMoments(
                "cumulant sequence needs at least kappa_1".into(),
            ));
        }
        if kappa.len() > MAX_ORDER + 1 {
            return Err(MomentError::InvalidMoments(format!(
                "order {} exceeds the supported maximum {MAX_ORDER}",
                kappa.len() - 1
            )));
        }
        kappa[0] = S::zero();
        Ok(Self { kappa })
    }

    /// Builds from kappa_1..kappa_order listed without the padding slot.
    pub fn from_slice(kappa: &[S]) -> Result<Self, MomentError> {
        let mut v = Vec::with_capacity(kappa.len() + 1);
        v.push(S::zero());
        v.extend_from_slice(kappa);
        Self::new(v)
    }

    pub fn order(&self) -> usize {
        self.kappa.len() - 1
    }

    /// kappa_r for r in 1..=order.
    pub fn kappa(&self, r: usize) -> &S {
        &self.kappa[r]
    }
}

/// Pascal triangle rows 0..=n in the scalar type.
fn binomials<S: Scalar>(n: usize) -> Vec<Vec<S>> {
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![S::one(); i + 1];
        for j in 1..i {
            row[j] = rows[i - 1][j - 1].clone() + rows[i - 1][j].clone();
        }
        rows.push(row);
    }
    rows
}

/// Central moments from cumulants, with kappa_1 suppressed so the result is
/// location-free.
pub fn cumulants_to_central<S: Scalar>(
    kappa: &CumulantSequence<S>,
    target_order: usize,
) -> Result<MomentSequence<S>, MomentError> {
    if target_order > kappa.order() {
        return Err(MomentError::InsufficientOrder {
            target: target_order,
            available: kappa.order(),
        });
    }
    let binom = binomials::<S>(target_order.saturating_sub(1));
    let mut mu = vec![S::one()];
    for n in 1..=target_order {
        let mut acc = S::zero();
        for j in 2..=n {
            acc = acc
                + binom[n - 1][j - 1].clone() * kappa.kappa(j).clone() * mu[n - j].clone();
        }
        mu.push(acc);
    }
    MomentSequence::new(mu)
}

/// Cumulants from central moments; kappa_1 = 0 by construction, and the
/// round trip with [`cumulants_to_central`] is the identity (exactly in the
/// rational backend).
pub fn central_to_cumulants<S: Scalar>(
    mu: &MomentSequence<S>,
    target_order: usize,
) -> Result<CumulantSequence<S>, MomentError> {
    if target_order > mu.order() {
        return Err(MomentError::InsufficientOrder {
            target: target_order,
            available: mu.order(),
        });
    }
    if mu.order() < 2 {
        return Err(MomentError::InvalidMoments(
            "need at least mu_2 to extract cumulants".into(),
        ));
    }
    let binom = binomials::<S>(target_order.saturating_sub(1));
    let mut kappa = vec![S::zero(); 2.min(target_order + 1)];
    for n in 2..=target_order {
        let mut acc = mu.mu(n).clone();
        for j in 2..n {
            acc = acc
                - binom[n - 1][j - 1].clone() * kappa[j].clone() * mu.mu(n - j).clone();
        }
        kappa.push(acc);
    }
    CumulantSequence::new(kappa)
}

/// Distribution families the moment engine can expand.
#[derive(Clone, Debug)]
pub enum DistributionSpec<S> {
    /// Gamma law with density rate^shape e^(-rate x) x^(shape-1) / Gamma(shape);
    /// cumulants kappa_r = shape (r-1)! / rate^r.
    Gamma { shape: S, rate: S },
    /// Gamma with shape 1.
    Exponential { rate: S },
    /// All cumulants above the second vanish.
    Gaussian { variance: S },
    /// Discrete law: (value, probability) pairs.
    Spectrum { levels: Vec<(S, S)> },
    Moments(MomentSequence<S>),
    Cumulants(CumulantSequence<S>),
}

/// Central moments of a distribution spec through `target_order`.
pub fn moments_of<S: Scalar>(
    spec: &DistributionSpec<S>,
    target_order: usize,
) -> Result<MomentSequence<S>, MomentError> {
    if target_order > MAX_ORDER {
        return Err(MomentError::InvalidSpec(format!(
            "order {target_order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    match spec {
        DistributionSpec::Gamma { shape, rate } => {
            if *shape <= S::zero() || *rate <= S::zero() {
                return Err(MomentError::InvalidSpec(
                    "gamma requires shape > 0 and rate > 0".into(),
                ));
            }
            let order = target_order.max(2);
            let mut kappa = vec![S::zero(); 2];
            // kappa_r = shape (r-1)! / rate^r, built incrementally.
            let mut factorial = S::one();
            let mut rate_pow = rate.clone() * rate.clone();
            for r in 2..=order {
                factorial = factorial * S::from_int(r as i64 - 1);
                kappa.push(shape.clone() * factorial.clone() / rate_pow.clone());
                rate_pow = rate_pow * rate.clone();
            }
            cumulants_to_central(&CumulantSequence::new(kappa)?, target_order)
        }
        DistributionSpec::Exponential { rate } => moments_of(
            &DistributionSpec::Gamma {
                shape: S::one(),
                rate: rate.clone(),
            },
            target_order,
        ),
        DistributionSpec::Gaussian { variance } => {
            if *variance < S::zero() {
                return Err(MomentError::InvalidSpec(
                    "gaussian variance must be nonnegative".into(),
                ));
            }
            let order = target_order.max(2);
            let mut kappa = vec![S::zero(); order + 1];
            kappa[2] = variance.clone();
            cumulants_to_central(&CumulantSequence::new(kappa)?, target_order)
        }
        DistributionSpec::Spectrum { levels } => spectrum_moments(levels, target_order),
        DistributionSpec::Moments(mu) => {
            if target_order > mu.order() {
                return Err(MomentError::InsufficientOrder {
                    target: target_order,
                    available: mu.order(),
                });
            }
            mu.truncated(target_order)
        }
        DistributionSpec::Cumulants(kappa) => cumulants_to_central(kappa, target_order),
    }
}

fn spectrum_moments<S: Scalar>(
    levels: &[(S, S)],
    target_order: usize,
) -> Result<MomentSequence<S>, MomentError> {
    if levels.is_empty() {
        return Err(MomentError::InvalidSpec("spectrum has no levels".into()));
    }
    let mut total = S::zero();
    for (_, p) in levels {
        if *p < S::zero() && !p.near_zero(REAL_INPUT_TOL) {
            return Err(MomentError::InvalidSpec(format!(
                "negative probability {p}"
            )));
        }
        total = total + p.clone();
    }
    if !(total.clone() - S::one()).near_zero(REAL_INPUT_TOL) {
        return Err(MomentError::InvalidSpec(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    let mut mean = S::zero();
    for (e, p) in levels {
        mean = mean + e.clone() * p.clone();
    }
    let mut mu = vec![S::zero(); target_order + 1];
    mu[0] = S::one();
    for (e, p) in levels {
        let d = e.clone() - mean.clone();
        let mut power = S::one();
        for item in mu.iter_mut().skip(1) {
            power = power * d.clone();
            *item = item.clone() + p.clone() * power.clone();
        }
    }
    // Centering makes mu_1 vanish identically; pin it to avoid rounding dust.
    if target_order >= 1 {
        mu[1] = S::zero();
    }
    MomentSequence::new(mu)
}

/// Central moments from raw moments by binomial centering:
/// mu_n = sum_k C(n,k) raw_k (-raw_1)^(n-k). Requires raw_0 = 1.
pub fn raw_to_central<S: Scalar>(raw: &[S]) -> Result<MomentSequence<S>, MomentError> {
    if raw.is_empty() || !(raw[0].clone() - S::one()).near_zero(REAL_INPUT_TOL) {
        return Err(MomentError::InvalidMoments("raw_0 must be 1".into()));
    }
    let order = raw.len() - 1;
    let binom = binomials::<S>(order);
    let neg_mean = if order >= 1 {
        -raw[1].clone()
    } else {
        S::zero()
    };
    let mut mu = Vec::with_capacity(order + 1);
    for (n, row) in binom.iter().enumerate() {
        let mut acc = S::zero();
        for (k, r) in raw.iter().enumerate().take(n + 1) {
            acc = acc + row[k].clone() * r.clone() * int_pow(&neg_mean, (n - k) as u32);
        }
        mu.push(acc);
    }
    if order >= 1 {
        mu[1] = S::zero();
    }
    MomentSequence::new(mu)
}

/// Outcome of the structural validity check.
#[derive(Clone, Debug)]
pub struct ValidityReport<S> {
    pub valid: bool,
    /// Leading principal minors of the odd-derivative Gram family
    /// `[mu_{2a+2b+2}]`: these are exactly D_2, D_6, D_10, ...
    pub odd_block_minors: Vec<S>,
    /// Leading principal minors of the even-derivative Gram family
    /// `[mu_{2a+2b}]` (first entry mu_0 = 1).
    pub even_block_minors: Vec<S>,
    /// Per odd-block minor: true when it vanishes, marking a degenerate
    /// (finite-support) distribution.
    pub rank_deficient: Vec<bool>,
    pub violations: Vec<String>,
}

impl<S: Scalar> ValidityReport<S> {
    pub fn summary(&self) -> String {
        let flags: Vec<String> = self
            .rank_deficient
            .iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .map(|(j, _)| format!("D_{}", 4 * j + 2))
            .collect();
        let mut s = if self.valid {
            "valid".to_string()
        } else {
            format!("invalid ({})", self.violations.join("; "))
        };
        if !flags.is_empty() {
            s.push_str(&format!("; rank deficient at {}", flags.join(", ")));
        }
        s
    }
}

/// Checks a moment sequence for representability: both even-moment Hankel
/// families must be positive semidefinite. Always returns a report;
/// failures are data, not errors.
pub fn validate<S: Scalar>(mu: &MomentSequence<S>) -> ValidityReport<S> {
    let mut violations = Vec::new();
    let order = mu.order();

    let (eval, unit_var) = mu.eval_form();
    for n in 1..=order / 2 {
        let v = eval.mu(2 * n);
        if *v < S::zero() && !v.near_zero(PSD_EPS) {
            violations.push(format!("mu_{} is negative", 2 * n));
        }
    }

    // Odd-derivative family [mu_{2a+2b+2}], a,b = 0..m with 2(2m+1) <= order.
    let mut odd_block_minors = Vec::new();
    let mut rank_deficient = Vec::new();
    if order >= 2 {
        let m = (order / 2 - 1) / 2;
        let raw = SquareMatrix::from_fn(m + 1, |a, b| mu.mu(2 * a + 2 * b + 2).clone());
        odd_block_minors = raw.leading_minors();
        let scaled = SquareMatrix::from_fn(m + 1, |a, b| eval.mu(2 * a + 2 * b + 2).clone());
        // Rank flags test each minor against its Hadamard bound (the
        // diagonal product), a dimensionless zero test that stays
        // meaningful for large moments.
        let mut diag_product = S::one();
        rank_deficient = scaled
            .leading_minors()
            .iter()
            .enumerate()
            .map(|(j, d)| {
                diag_product = diag_product.clone() * scaled.at(j, j).clone();
                if S::EXACT || diag_product.is_zero() {
                    d.is_zero() || diag_product.is_zero()
                } else {
                    (d.clone() / diag_product.clone()).near_zero(PSD_EPS)
                }
            })
            .collect();
        if !scaled.is_psd(PSD_EPS) {
            violations.push("odd-derivative moment family is not positive semidefinite".into());
        }
    }

    // Even-derivative family [mu_{2a+2b}], a,b = 0..m with 4m <= order.
    let mut even_block_minors = Vec::new();
    if order >= 2 {
        let m = order / 4;
        let raw = SquareMatrix::from_fn(m + 1, |a, b| mu.mu(2 * a + 2 * b).clone());
        even_block_minors = raw.leading_minors();
        let scaled = SquareMatrix::from_fn(m + 1, |a, b| {
            if a + b == 0 {
                S::one()
            } else {
                eval.mu(2 * a + 2 * b).clone()
            }
        });
        if !scaled.is_psd(PSD_EPS) {
            violations.push("even-derivative moment family is not positive semidefinite".into());
        }
    }

    let _ = unit_var;
    ValidityReport {
        valid: violations.is_empty(),
        odd_block_minors,
        even_block_minors,
        rank_deficient,
        violations,
    }
}
