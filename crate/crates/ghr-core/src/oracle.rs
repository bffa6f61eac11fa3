//! Brute-force ground truth on finite-dimensional Hilbert spaces.
//!
//! Every identity the bound engine evaluates in closed form is, underneath,
//! a statement about the geometry of a Schrodinger trajectory: with
//! derivative vectors xi_n = (i H~)^n xi (H~ the mean-adjusted generator)
//! and the real inner product g(x, y) = Re <x, y>,
//!
//! - g(xi_m, xi_m) = mu_2m, the 2m-th central moment of the generator;
//! - the squared norms of the Gram-Schmidt orthogonalization of the odd
//!   derivatives equal the determinant ratios D_2k / D_2k-4;
//! - the Gram-Schmidt projection coefficients equal the closed-form F_{n,k};
//! - the numerators U_k re-emerge from the expansion coefficients of the
//!   orthogonalized vectors over the raw derivatives.
//!
//! This module builds concrete models (diagonal spectra or seeded random
//! Hermitian generators), measures all of the above explicitly, and checks
//! them against the engine. The real-Hilbert-space formalism is realized in
//! complex arithmetic: the complex structure is multiplication by i, and g
//! takes the real part of the inner product that is conjugate-linear in its
//! first argument.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::bound::{self, TermStatus};
use crate::moments::{moments_of, DistributionSpec, MomentSequence};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Hermiticity / unit-norm tolerance for model construction.
pub const MODEL_TOL: f64 = 1e-12;

/// Squared-norm floor, relative to mu_2^k, below which a Gram-Schmidt
/// vector counts as vanished.
pub const VANISH_EPS: f64 = 1e-20;

/// Orthogonality ceiling after re-orthogonalization (normalized residual).
pub const ORTHO_EPS: f64 = 1e-10;

/// Smallest determinant resolution margin (see
/// [`bound::degeneracy_margin`]) at which the floating determinant route
/// still carries the ~8 significant digits the 1e-8 identity checks need.
/// Below it comparisons are skipped and reported as conditioning-limited.
pub const RELIABLE_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("observable is not Hermitian")]
    NonHermitian,
    #[error("derivative frame degenerate at k = {k}: orthogonal direction vanished")]
    DegenerateFrame { k: usize },
}

/// g(x, y): real part of the complex inner product, conjugate-linear in the
/// first argument. All inner products between odd derivative vectors are
/// real multiples of moments under this convention (e.g. g(xi_3, xi_1) =
/// -mu_4).
fn gdot(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.dotc(b).re
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale <= f64::MIN_POSITIVE {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// One spectral level: an eigenvalue of the generator and the state's
/// complex amplitude on it.
#[derive(Clone, Debug)]
pub struct SpectrumLevel {
    pub energy: f64,
    pub amplitude: Complex64,
}

/// Recipe for a model.
#[derive(Clone, Debug)]
pub enum ModelSpec {
    /// Diagonal generator with the given levels.
    Spectrum(Vec<SpectrumLevel>),
    /// Seeded random Hermitian generator (symmetrized standard-normal
    /// entries) and a normalized standard-normal complex state.
    Random { seed: u64, dim: usize },
}

/// Finite-dimensional Hermitian generator plus a unit state.
#[derive(Clone, Debug)]
pub struct QuantumModel {
    hamiltonian: DMatrix<Complex64>,
    state: DVector<Complex64>,
}

impl QuantumModel {
    pub fn new(
        hamiltonian: DMatrix<Complex64>,
        state: DVector<Complex64>,
    ) -> Result<Self, OracleError> {
        let d = hamiltonian.nrows();
        if d < 2 || hamiltonian.ncols() != d {
            return Err(OracleError::InvalidSpec(format!(
                "generator must be square with dimension >= 2, got {}x{}",
                hamiltonian.nrows(),
                hamiltonian.ncols()
            )));
        }
        if state.len() != d {
            return Err(OracleError::InvalidSpec(format!(
                "state dimension {} does not match generator dimension {d}",
                state.len()
            )));
        }
        let herm_defect = (&hamiltonian - hamiltonian.adjoint()).norm();
        if herm_defect > MODEL_TOL * hamiltonian.norm().max(1.0) {
            return Err(OracleError::InvalidSpec(
                "generator is not Hermitian".into(),
            ));
        }
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(OracleError::InvalidSpec(format!(
                "state norm {norm} is not 1"
            )));
        }
        Ok(Self {
            hamiltonian,
            state: state / Complex64::new(norm, 0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    pub fn hamiltonian(&self) -> &DMatrix<Complex64> {
        &self.hamiltonian
    }

    pub fn state(&self) -> &DVector<Complex64> {
        &self.state
    }

    /// <H> in the model state.
    pub fn mean_energy(&self) -> f64 {
        self.state.dotc(&(&self.hamiltonian * &self.state)).re
    }

    /// H~ = H - <H> I.
    pub fn centered_hamiltonian(&self) -> DMatrix<Complex64> {
        let mean = Complex64::new(self.mean_energy(), 0.0);
        let mut h = self.hamiltonian.clone();
        for i in 0..h.nrows() {
            h[(i, i)] -= mean;
        }
        h
    }

    /// The state evolved to time t: exp(i t H~) xi, via eigendecomposition
    /// of the centered generator (exact at any t, no series truncation).
    pub fn evolved(&self, t: f64) -> QuantumModel {
        let eig = self.centered_hamiltonian().symmetric_eigen();
        let mut coeffs = eig.eigenvectors.adjoint() * &self.state;
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, t * eig.eigenvalues[j]);
        }
        let state = &eig.eigenvectors * coeffs;
        QuantumModel {
            hamiltonian: self.hamiltonian.clone(),
            state,
        }
    }

    /// Spectral decomposition of the model: (eigenvalue, probability)
    /// pairs. Probabilities are the squared overlaps of the state with the
    /// eigenvectors.
    pub fn spectrum(&self) -> Vec<(f64, f64)> {
        let eig = self.hamiltonian.clone().symmetric_eigen();
        let overlaps = eig.eigenvectors.adjoint() * &self.state;
        eig.eigenvalues
            .iter()
            .zip(overlaps.iter())
            .map(|(&e, c)| (e, c.norm_sqr()))
            .collect()
    }

    /// Central moments <H~^n> for n = 0..=order, measured directly through
    /// powers of the centered generator applied to the state. mu_0 and mu_1
    /// are pinned to their identities (1 and 0); even entries equal the
    /// squared norms of the derivative vectors.
    pub fn measured_moments(&self, order: usize) -> MomentSequence<f64> {
        let h = self.centered_hamiltonian();
        let half = order / 2 + 1;
        let mut powers: Vec<DVector<Complex64>> = Vec::with_capacity(half + 1);
        powers.push(self.state.clone());
        for _ in 0..half {
            powers.push(&h * powers.last().unwrap());
        }
        let mut mu = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let a = n / 2;
            mu.push(gdot(&powers[a], &powers[n - a]));
        }
        mu[0] = 1.0;
        if order >= 1 {
            mu[1] = 0.0;
        }
        MomentSequence::new(mu).expect("measured moments are structurally valid")
    }

    /// Number of odd-order orthogonalized derivatives that can be nonzero:
    /// the count of distinct nonzero squared centered eigenvalues carrying
    /// amplitude. Finite spectra exhaust the frame at exactly this depth.
    pub fn frame_capacity(&self) -> usize {
        let mean = self.mean_energy();
        let spectrum = self.spectrum();
        let scale = spectrum
            .iter()
            .map(|(e, _)| (e - mean).abs())
            .fold(0.0_f64, f64::max);
        if scale <= f64::MIN_POSITIVE {
            return 0;
        }
        let mut squares: Vec<f64> = spectrum
            .iter()
            .filter(|(_, p)| *p > 1e-12)
            .map(|(e, _)| ((e - mean) / scale).powi(2))
            .filter(|s| *s > 1e-12)
            .collect();
        squares.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut count = 0;
        let mut last = 0.0_f64;
        for s in squares {
            if count == 0 || s - last > 1e-9 * s {
                count += 1;
                last = s;
            }
        }
        count
    }
}

/// Builds a model from a spec. Deterministic for a given seed.
pub fn build_model(spec: &ModelSpec) -> Result<QuantumModel, OracleError> {
    match spec {
        ModelSpec::Spectrum(levels) => {
            if levels.is_empty() {
                return Err(OracleError::InvalidSpec("spectrum has no levels".into()));
            }
            let norm_sq: f64 = levels.iter().map(|l| l.amplitude.norm_sqr()).sum();
            if norm_sq <= f64::MIN_POSITIVE {
                return Err(OracleError::InvalidSpec(
                    "amplitudes are not normalizable".into(),
                ));
            }
            // A single level still yields a valid (stationary) model; pad to
            // dimension 2 with an unpopulated copy of the same energy.
            let mut levels = levels.clone();
            if levels.len() == 1 {
                levels.push(SpectrumLevel {
                    energy: levels[0].energy,
                    amplitude: Complex64::ZERO,
                });
            }
            let d = levels.len();
            let scale = norm_sq.sqrt();
            let hamiltonian = DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(levels[i].energy, 0.0)
                } else {
                    Complex64::ZERO
                }
            });
            let state = DVector::from_fn(d, |i, _| levels[i].amplitude / scale);
            QuantumModel::new(hamiltonian, state)
        }
        ModelSpec::Random { seed, dim } => {
            if *dim < 2 {
                return Err(OracleError::InvalidSpec(format!(
                    "random model needs dim >= 2, got {dim}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let draw = |rng: &mut ChaCha8Rng| -> Complex64 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            };
            let a = DMatrix::from_fn(*dim, *dim, |_, _| draw(&mut rng));
            let hamiltonian = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
            let raw = DVector::from_fn(*dim, |_, _| draw(&mut rng));
            let state = &raw / Complex64::new(raw.norm(), 0.0);
            QuantumModel::new(hamiltonian, state)
        }
    }
}

/// Trajectory derivatives xi_n = (i H~)^n xi, their odd-order Gram-Schmidt
/// orthogonalization, and everything measured along the way.
#[derive(Clone, Debug)]
pub struct DerivativeFrame {
    n_max: usize,
    xi: Vec<DVector<Complex64>>,
    psi: Vec<DVector<Complex64>>,
    vanished: Vec<bool>,
    norm_sq: Vec<f64>,
    /// proj[t][s]: measured coefficient of Psi_{2s+1} in xi_{2t+1}
    /// (two-pass total); None when Psi_{2s+1} had vanished.
    proj: Vec<Vec<Option<f64>>>,
    /// basis_coeffs[t][s]: coefficient of xi_{2s+1} in Psi_{2t+1}.
    basis_coeffs: Vec<Vec<f64>>,
    /// bridge_mu[m] = g(xi_m, xi_m) = mu_2m.
    bridge_mu: Vec<f64>,
    zero_variance: bool,
}

impl DerivativeFrame {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// The odd orders 1, 3, ..., n_max.
    pub fn odd_orders(&self) -> impl Iterator<Item = usize> {
        (1..=self.n_max).step_by(2)
    }

    /// The raw derivative vector xi_n = (i H~)^n xi, n = 0..=n_max.
    pub fn derivative(&self, n: usize) -> &DVector<Complex64> {
        &self.xi[n]
    }

    /// The orthogonalized vector Psi_k for odd k (zero when vanished).
    pub fn orthogonalized(&self, k: usize) -> &DVector<Complex64> {
        &self.psi[Self::t(k)]
    }

    fn t(k: usize) -> usize {
        (k - 1) / 2
    }

    pub fn is_vanished(&self, k: usize) -> bool {
        self.vanished[Self::t(k)]
    }

    /// First odd order whose orthogonalized vector vanished.
    pub fn first_vanished(&self) -> Option<usize> {
        self.vanished.iter().position(|&v| v).map(|t| 2 * t + 1)
    }

    /// Measured N_k = g(Psi_k, Psi_k).
    pub fn norm_sq(&self, k: usize) -> f64 {
        self.norm_sq[Self::t(k)]
    }

    /// Measured projection coefficient of Psi_k in xi_n (odd k < n).
    pub fn measured_projection(&self, n: usize, k: usize) -> Option<f64> {
        self.proj[Self::t(n)][Self::t(k)]
    }

    /// g(xi_m, xi_m) = mu_2m for m = 0..=n_max.
    pub fn bridge_moment(&self, m: usize) -> f64 {
        self.bridge_mu[m]
    }

    pub fn variance(&self) -> f64 {
        self.bridge_mu[1]
    }

    pub fn zero_variance(&self) -> bool {
        self.zero_variance
    }

    pub fn basis_coefficients(&self, k: usize) -> &[f64] {
        &self.basis_coeffs[Self::t(k)]
    }

    /// U_k from the measured expansion Psi_k = sum_j c_j xi_j:
    /// U_k = sum_j c_j (-1)^((j-1)/2) j mu_{j-1}, an estimator-free route
    /// independent of the determinant formulas. None when Psi_k vanished.
    pub fn numerator_estimate(&self, k: usize) -> Option<f64> {
        let t = Self::t(k);
        if self.vanished[t] {
            return None;
        }
        let mut u = 0.0;
        for (s, c) in self.basis_coeffs[t].iter().enumerate() {
            let j = 2 * s + 1;
            let sign = if s % 2 == 1 { -1.0 } else { 1.0 };
            u += c * sign * j as f64 * self.bridge_mu[s];
        }
        Some(u)
    }

    /// Normalized worst-case residual orthogonality over alive pairs.
    pub fn worst_orthogonality(&self) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..self.psi.len() {
            if self.vanished[a] {
                continue;
            }
            for b in 0..a {
                if self.vanished[b] {
                    continue;
                }
                let g = gdot(&self.psi[a], &self.psi[b]).abs();
                worst = worst.max(g / (self.norm_sq[a] * self.norm_sq[b]).sqrt());
            }
        }
        worst
    }
}

/// Builds the derivative frame to odd order n_max: modified Gram-Schmidt
/// over the odd derivatives with one full re-orthogonalization pass.
pub fn derivative_frame(model: &QuantumModel, n_max: usize) -> DerivativeFrame {
    assert!(n_max % 2 == 1, "n_max must be odd");
    let h = model.centered_hamiltonian();
    let i_unit = Complex64::new(0.0, 1.0);

    let mut xi: Vec<DVector<Complex64>> = Vec::with_capacity(n_max + 1);
    xi.push(model.state().clone());
    for _ in 0..n_max {
        xi.push((&h * xi.last().unwrap()) * i_unit);
    }
    let bridge_mu: Vec<f64> = xi.iter().map(|v| v.norm_squared()).collect();
    let mu2 = bridge_mu[1];
    let zero_variance = mu2 <= VANISH_EPS * h.norm().powi(2).max(f64::MIN_POSITIVE);

    let count = n_max.div_ceil(2);
    let mut psi: Vec<DVector<Complex64>> = Vec::with_capacity(count);
    let mut vanished = Vec::with_capacity(count);
    let mut norm_sq = Vec::with_capacity(count);
    let mut proj: Vec<Vec<Option<f64>>> = Vec::with_capacity(count);
    let mut basis_coeffs: Vec<Vec<f64>> = Vec::with_capacity(count);

    for t in 0..count {
        let k = 2 * t + 1;
        let mut v = xi[k].clone();
        let mut totals: Vec<Option<f64>> = vec![None; t];
        for _pass in 0..2 {
            for s in 0..t {
                if vanished[s] {
                    continue;
                }
                let f = gdot(&v, &psi[s]) / norm_sq[s];
                v -= &psi[s] * Complex64::new(f, 0.0);
                *totals[s].get_or_insert(0.0) += f;
            }
        }
        let n = v.norm_squared();
        let dead = zero_variance || n <= VANISH_EPS * mu2.powi(k as i32);

        let mut coeffs = vec![0.0; t + 1];
        coeffs[t] = 1.0;
        for s in 0..t {
            let mut acc = 0.0;
            for (j, total) in totals.iter().enumerate().skip(s) {
                if let Some(f) = total {
                    acc -= f * basis_coeffs[j][s];
                }
            }
            coeffs[s] = acc;
        }

        psi.push(v);
        vanished.push(dead);
        norm_sq.push(if dead { 0.0 } else { n });
        proj.push(totals);
        basis_coeffs.push(coeffs);
    }

    DerivativeFrame {
        n_max,
        xi,
        psi,
        vanished,
        norm_sq,
        proj,
        basis_coeffs,
        bridge_mu,
        zero_variance,
    }
}

/// U_k estimates for every odd k <= n_max. Fails on the first vanished
/// direction, where the expansion coefficients are undefined.
pub fn expansion_numerators(frame: &DerivativeFrame) -> Result<Vec<f64>, OracleError> {
    frame
        .odd_orders()
        .map(|k| {
            frame
                .numerator_estimate(k)
                .ok_or(OracleError::DegenerateFrame { k })
        })
        .collect()
}

/// Mean and variance of a Hermitian observable in the model state:
/// the variance is the squared norm of (X - <X>) xi.
pub fn expectation_and_variance(
    model: &QuantumModel,
    observable: &DMatrix<Complex64>,
) -> Result<(f64, f64), OracleError> {
    let d = model.dim();
    if observable.nrows() != d || observable.ncols() != d {
        return Err(OracleError::InvalidSpec(format!(
            "observable is {}x{}, model dimension is {d}",
            observable.nrows(),
            observable.ncols()
        )));
    }
    if (observable - observable.adjoint()).norm() > MODEL_TOL * observable.norm().max(1.0) {
        return Err(OracleError::NonHermitian);
    }
    let mean = model.state().dotc(&(observable * model.state())).re;
    let mut centered = observable.clone();
    for i in 0..d {
        centered[(i, i)] -= Complex64::new(mean, 0.0);
    }
    let variance = (centered * model.state()).norm_squared();
    Ok((mean, variance))
}

/// Fisher information of the time-parametrized trajectory:
/// 4 g(xi_1, xi_1) = 4 Delta H^2, constant under the evolution it generates.
pub fn fisher_information(model: &QuantumModel) -> f64 {
    4.0 * (model.centered_hamiltonian() * model.state()).norm_squared()
}

/// Outcome of one model's identity cross-check. Failures are data, not
/// errors.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub dim: usize,
    pub k_max: usize,
    pub tolerance: f64,
    /// Measured g(xi_m, xi_m) vs spectral central moments.
    pub worst_moment_bridge: f64,
    /// Measured Gram-Schmidt squared norms vs determinant ratios.
    pub worst_norm_ratio: f64,
    /// Coefficient-route U_k vs recursion U_k.
    pub worst_numerator: f64,
    /// Measured projections vs closed-form F_{n,k}.
    pub worst_projection: f64,
    pub worst_orthogonality: f64,
    pub degenerate_at: Option<usize>,
    pub degenerate_status: Option<TermStatus>,
    pub degeneracy_consistent: bool,
    pub zero_variance: bool,
    /// Orders where the determinant route fell under [`RELIABLE_MARGIN`]
    /// and identity comparisons were skipped.
    pub skipped_marginal: Vec<usize>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Runs every identity check on one model: moment bridge, norm ratios,
/// numerators, projections, orthogonality, and (when the frame collapses)
/// consistency between the measured degeneracy and the engine's
/// classification.
pub fn cross_validate(model: &QuantumModel, k_max: usize, tolerance: f64) -> ValidationReport {
    assert!(k_max % 2 == 1, "k_max must be odd");
    let frame = derivative_frame(model, k_max);
    let mut failures = Vec::new();

    if frame.zero_variance() {
        // Stationary state: every derivative beyond order 0 vanishes and
        // the bound is undefined. Nothing further to compare.
        return ValidationReport {
            dim: model.dim(),
            k_max,
            tolerance,
            worst_moment_bridge: 0.0,
            worst_norm_ratio: 0.0,
            worst_numerator: 0.0,
            worst_projection: 0.0,
            worst_orthogonality: 0.0,
            degenerate_at: Some(1),
            degenerate_status: None,
            degeneracy_consistent: true,
            zero_variance: true,
            skipped_marginal: Vec::new(),
            failures,
            pass: true,
        };
    }

    let mu = model.measured_moments(2 * k_max);
    let spectral = moments_of(
        &DistributionSpec::Spectrum {
            levels: model.spectrum(),
        },
        2 * k_max,
    )
    .expect("model spectrum is a valid distribution");

    let mut worst_moment_bridge = 0.0_f64;
    for m in 0..=k_max {
        worst_moment_bridge =
            worst_moment_bridge.max(rel_err(frame.bridge_moment(m), *spectral.mu(2 * m)));
    }

    let mut worst_norm_ratio = 0.0_f64;
    let mut worst_numerator = 0.0_f64;
    let mut worst_projection = 0.0_f64;
    let mut degenerate_at = None;
    let mut degenerate_status = None;
    let mut degeneracy_consistent = true;
    let mut skipped_marginal = Vec::new();
    let mut min_margin = f64::INFINITY;

    for k in frame.odd_orders() {
        // The determinant route loses digits as the frame approaches
        // collapse; its resolution margin decides whether a 1e-8 identity
        // comparison is meaningful at this depth.
        let margin = bound::degeneracy_margin(&mu, k).unwrap_or(0.0);
        min_margin = min_margin.min(margin);

        if frame.is_vanished(k) {
            // The engine must agree that the series stops here, or be
            // demonstrably below its own resolution.
            degenerate_at = Some(k);
            match bound::series_term(&mu, k) {
                Ok(term) => {
                    degenerate_status = Some(term.status);
                    if term.status == TermStatus::Regular && min_margin >= RELIABLE_MARGIN {
                        degeneracy_consistent = false;
                        failures.push(format!(
                            "frame vanished at k = {k} but engine classifies the term Regular \
                             with resolution margin {margin:.2e}"
                        ));
                    }
                }
                Err(bound::BoundError::DegenerateDenominator { .. }) => {
                    // Also a degeneracy verdict.
                }
                Err(e) => {
                    degeneracy_consistent = false;
                    failures.push(format!("engine error at vanished k = {k}: {e}"));
                }
            }
            break;
        }

        if min_margin < RELIABLE_MARGIN {
            skipped_marginal.push(k);
            continue;
        }

        match bound::orthogonal_norm(&mu, k) {
            Ok(n_engine) => {
                let e = rel_err(frame.norm_sq(k), n_engine);
                worst_norm_ratio = worst_norm_ratio.max(e);
                if e > tolerance {
                    failures.push(format!(
                        "norm identity at k = {k}: measured {} vs determinant ratio {n_engine}",
                        frame.norm_sq(k)
                    ));
                }
            }
            Err(e) => failures.push(format!("engine norm failed at alive k = {k}: {e}")),
        }

        match bound::numerator_u(&mu, k) {
            Ok(u_engine) => {
                let u_frame = frame.numerator_estimate(k).expect("alive");
                let e = rel_err(u_frame, u_engine);
                worst_numerator = worst_numerator.max(e);
                if e > tolerance {
                    failures.push(format!(
                        "numerator identity at k = {k}: coefficients give {u_frame}, recursion {u_engine}"
                    ));
                }
            }
            Err(e) => failures.push(format!("engine numerator failed at alive k = {k}: {e}")),
        }

        for j in (1..k).step_by(2) {
            let Some(f_frame) = frame.measured_projection(k, j) else {
                continue;
            };
            match bound::projection_coefficient(&mu, k, j) {
                Ok(f_engine) => {
                    let e = rel_err(f_frame, f_engine);
                    worst_projection = worst_projection.max(e);
                    if e > tolerance {
                        failures.push(format!(
                            "projection identity at (n, k) = ({k}, {j}): measured {f_frame} vs {f_engine}"
                        ));
                    }
                }
                Err(e) => failures.push(format!(
                    "engine projection failed at alive (n, k) = ({k}, {j}): {e}"
                )),
            }
        }
    }

    let worst_orthogonality = frame.worst_orthogonality();
    if worst_moment_bridge > tolerance {
        failures.push(format!(
            "moment bridge error {worst_moment_bridge} exceeds tolerance"
        ));
    }
    if worst_orthogonality > ORTHO_EPS {
        failures.push(format!(
            "orthogonality residual {worst_orthogonality} exceeds {ORTHO_EPS}"
        ));
    }

    let pass = failures.is_empty() && degeneracy_consistent;
    ValidationReport {
        dim: model.dim(),
        k_max,
        tolerance,
        worst_moment_bridge,
        worst_norm_ratio,
        worst_numerator,
        worst_projection,
        worst_orthogonality,
        degenerate_at,
        degenerate_status,
        degeneracy_consistent,
        zero_variance: false,
        skipped_marginal,
        failures,
        pass,
    }
}

/// Cross-validates a batch of independent models, in input order. Uses the
/// rayon pool when the `parallel` feature is on.
pub fn validate_ensemble(
    specs: &[ModelSpec],
    k_max: usize,
    tolerance: f64,
) -> Result<Vec<ValidationReport>, OracleError> {
    #[cfg(feature = "parallel")]
    {
        specs
            .par_iter()
            .map(|s| Ok(cross_validate(&build_model(s)?, k_max, tolerance)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        validate_ensemble_seq(specs, k_max, tolerance)
    }
}

/// Sequential variant of [`validate_ensemble`]; always available for
/// comparison benchmarks.
pub fn validate_ensemble_seq(
    specs: &[ModelSpec],
    k_max: usize,
    tolerance: f64,
) -> Result<Vec<ValidationReport>, OracleError> {
    specs
        .iter()
        .map(|s| Ok(cross_validate(&build_model(s)?, k_max, tolerance)))
        .collect()
}
