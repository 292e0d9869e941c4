//! The two-component Gaussian scale mixture, its asymptotic
//! parameterizations, sampling, and the CDF of absolute values.
//!
//! An observation is standard normal with probability `1 - epsilon` and
//! `N(0, sigma^2)` with probability `epsilon`. The null hypothesis is
//! `epsilon = 0`; alternatives take `epsilon > 0` with `sigma != 1`.
//! Asymptotic regimes parameterize `(epsilon, sigma)` through a sample size:
//! `epsilon = n^-beta` always, with `sigma = n^-gamma` (shrinking to zero),
//! `sigma = 1 -+ n^-gamma` (approaching one), or a fixed `sigma`.

use crate::error::{Error, Result};
use crate::numerics::{folded_cdf, normal_quantile, Probability};
use crate::rng::{derive_key, Stream};

/// Contamination proportion and contaminated standard deviation.
///
/// `epsilon = 0` encodes the null regardless of `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    epsilon: f64,
    sigma: f64,
}

impl MixtureParams {
    pub fn new(epsilon: f64, sigma: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&epsilon) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::SigmaOutOfRange(sigma));
        }
        Ok(MixtureParams { epsilon, sigma })
    }

    /// The null distribution: no contamination.
    pub fn null() -> Self {
        MixtureParams { epsilon: 0.0, sigma: 1.0 }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// True when the distribution equals the null (`epsilon = 0`, or
    /// `sigma = 1` which makes both components identical).
    pub fn is_null(&self) -> bool {
        self.epsilon == 0.0 || self.sigma == 1.0
    }
}

/// Which side of 1 the contaminated standard deviation approaches from in
/// the near-one regime. Both sides are exposed and treated symmetrically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// The shape of an asymptotic regime; carries exactly the parameters the
/// regime uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeShape {
    /// `sigma = n^-gamma`, shrinking toward zero.
    NearZero { gamma: f64 },
    /// `sigma = 1 -+ n^-gamma`, approaching one from the chosen side.
    NearOne { gamma: f64, side: Side },
    /// `sigma` fixed away from zero and one.
    Fixed { sigma: f64 },
}

/// Kind tag for a [`RegimeShape`], convenient for dispatch and display.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    NearZero,
    NearOne,
    Fixed,
}

/// A sparsity/scale regime: `epsilon = n^-beta` together with a sigma shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSpec {
    beta: f64,
    shape: RegimeShape,
}

impl RegimeSpec {
    pub fn near_zero(beta: f64, gamma: f64) -> Result<Self> {
        check_beta(beta)?;
        check_gamma(gamma)?;
        Ok(RegimeSpec { beta, shape: RegimeShape::NearZero { gamma } })
    }

    pub fn near_one(beta: f64, gamma: f64, side: Side) -> Result<Self> {
        check_beta(beta)?;
        check_gamma(gamma)?;
        Ok(RegimeSpec { beta, shape: RegimeShape::NearOne { gamma, side } })
    }

    pub fn fixed(beta: f64, sigma: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::SigmaOutOfRange(sigma));
        }
        Ok(RegimeSpec { beta, shape: RegimeShape::Fixed { sigma } })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn shape(&self) -> RegimeShape {
        self.shape
    }

    pub fn kind(&self) -> RegimeKind {
        match self.shape {
            RegimeShape::NearZero { .. } => RegimeKind::NearZero,
            RegimeShape::NearOne { .. } => RegimeKind::NearOne,
            RegimeShape::Fixed { .. } => RegimeKind::Fixed,
        }
    }

    /// Substitute the sample size: `epsilon = n^-beta` and sigma per shape.
    ///
    /// Rejects outcomes that violate the mixture invariants: a resolved
    /// `epsilon >= 1/2` (tiny `n`, small `beta`) and the near-one/below shape
    /// when `n^-gamma >= 1` would push sigma to zero.
    pub fn resolve(&self, n: usize) -> Result<MixtureParams> {
        assert!(n >= 1, "sample size must be positive");
        let nf = n as f64;
        let sigma = match self.shape {
            RegimeShape::NearZero { gamma } => nf.powf(-gamma),
            RegimeShape::NearOne { gamma, side } => {
                let shrink = nf.powf(-gamma);
                match side {
                    Side::Above => 1.0 + shrink,
                    Side::Below => {
                        if shrink >= 1.0 {
                            return Err(Error::DegenerateNearOne { n, shrink });
                        }
                        1.0 - shrink
                    }
                }
            }
            RegimeShape::Fixed { sigma } => sigma,
        };
        let epsilon = nf.powf(-self.beta);
        if epsilon >= 0.5 {
            return Err(Error::EpsilonResolvedTooLarge { n, epsilon });
        }
        MixtureParams::new(epsilon, sigma)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::BetaOutOfRange(beta))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma))
    }
}

/// Resolve a regime at sample size `n`; free-function form of
/// [`RegimeSpec::resolve`].
pub fn resolve_regime(spec: &RegimeSpec, n: usize) -> Result<MixtureParams> {
    spec.resolve(n)
}

/// An ordered sample with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    seed: u64,
    params: MixtureParams,
}

impl Sample {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &MixtureParams {
        &self.params
    }
}

/// Domain tag separating sampler streams from everything else keyed by the
/// same seed.
const SAMPLE_STREAM_TAG: u64 = 0x5A4D;

/// Draw `n` iid observations from the mixture.
///
/// Each observation makes an independent Bernoulli(epsilon) component choice
/// (the contaminated count is binomial, not fixed). Observation `i` consumes
/// exactly the uniforms at stream positions `2i` (component choice) and
/// `2i + 1` (normal variate via the inverse CDF), so a sample is a pure
/// function of `(params, n, seed)`: identical inputs give bit-identical
/// output, and changing `epsilon` or `sigma` never reshuffles the underlying
/// randomness.
pub fn sample(params: &MixtureParams, n: usize, seed: u64) -> Sample {
    assert!(n >= 1, "sample size must be positive");
    let stream = Stream::new(derive_key(&[SAMPLE_STREAM_TAG, seed]));
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        values.push(draw_one(params, &stream, i as u64));
    }
    Sample { values, seed, params: *params }
}

#[inline]
fn draw_one(params: &MixtureParams, stream: &Stream, i: u64) -> f64 {
    let contaminated = stream.uniform_at(2 * i) < params.epsilon;
    let z = normal_quantile(stream.uniform_at(2 * i + 1));
    if contaminated {
        params.sigma * z
    } else {
        z
    }
}

/// CDF of |X| under the mixture:
/// `Lambda(t) = (1 - epsilon) psi(t) + epsilon psi(t / sigma)`
/// where `psi(x) = 2 Phi(x) - 1` is the folded normal CDF.
pub fn mixture_abs_cdf(t: f64, params: &MixtureParams) -> Probability {
    assert!(t >= 0.0, "mixture_abs_cdf needs t >= 0, got {t}");
    let base = folded_cdf(t).value();
    let contaminated = folded_cdf(t / params.sigma).value();
    Probability::new((1.0 - params.epsilon) * base + params.epsilon * contaminated)
}
