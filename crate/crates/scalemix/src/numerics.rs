//! Special functions with tail accuracy sufficient for extreme thresholds.
//!
//! Everything downstream computes survival quantities directly instead of
//! `1 - cdf`: the extremes test evaluates the normal tail at thresholds near
//! `sqrt(2 ln n)` where the survival probability is of order `1/n` and a
//! complement would lose every significant digit.
//!
//! Contents: the error function pair (`erf`, `erfc`), the standard normal
//! survival/CDF/quantile, the folded-normal CDF `psi(x) = 2*Phi(x) - 1`, and
//! the chi-squared CDF through the regularized incomplete gamma function.

use crate::error::{Error, Result};
use std::fmt;

/// A value guaranteed to lie in `[0, 1]`.
///
/// Construction clamps sub-ulp excursions produced by floating-point
/// arithmetic; anything further out of range is a bug and panics.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Self {
        assert!(
            (-1e-9..=1.0 + 1e-9).contains(&value),
            "probability out of range: {value}"
        );
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const FRAC_1_SQRT_PI: f64 = FRAC_2_SQRT_PI / 2.0;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Series/continued-fraction crossover for `erf`/`erfc`.
const ERF_CROSSOVER: f64 = 2.0;

/// The error function, via its confluent power series for `|x| <= 2` and the
/// complement elsewhere.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= ERF_CROSSOVER {
        erf_series(x)
    } else {
        1.0 - erfc_fraction(x)
    }
}

/// The complementary error function, accurate in the far tail.
///
/// Relative error stays near machine precision out to the underflow limit
/// (`x ~ 26.5`, beyond which the true value is below the smallest positive
/// double and 0 is returned).
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= ERF_CROSSOVER {
        // erf <= erf(2) ~ 0.9953: the complement loses < 3 digits here.
        1.0 - erf_series(x)
    } else {
        erfc_fraction(x)
    }
}

/// erf(x) = (2x/sqrt(pi)) e^{-x^2} sum_k (2x^2)^k / (2k+1)!!, all terms positive.
fn erf_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let two_x2 = 2.0 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..200 {
        term *= two_x2 / (2 * k + 3) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * x * (-x * x).exp() * sum
}

/// Laplace continued fraction for erfc, evaluated by modified Lentz:
/// erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
fn erfc_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    // Lentz on the denominator x + (1/2)/(x + 1/(x + ...)).
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..400 {
        let a = n as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-15 {
            break;
        }
    }
    FRAC_1_SQRT_PI * (-x * x).exp() / f
}

/// Standard normal survival function `Phi_bar(x) = P(Z > x)`.
///
/// Computed through `erfc` so the tail keeps full relative accuracy; never
/// formed as `1 - Phi(x)`.
pub fn normal_survival(x: f64) -> Probability {
    Probability::new(0.5 * erfc(x / SQRT_2))
}

/// Standard normal CDF `Phi(x)`.
pub fn normal_cdf(x: f64) -> Probability {
    Probability::new(0.5 * erfc(-x / SQRT_2))
}

/// Folded normal CDF `psi(x) = P(|Z| <= x) = 2*Phi(x) - 1` for `x >= 0`.
pub fn folded_cdf(x: f64) -> Probability {
    assert!(x >= 0.0, "folded_cdf needs x >= 0, got {x}");
    Probability::new(erf(x / SQRT_2))
}

/// Complementary form `1 - psi(x) = 2*Phi_bar(x)`, exposed so callers can
/// build `psi * (1 - psi)` without cancellation when `psi` rounds to 1.
pub fn folded_survival(x: f64) -> Probability {
    assert!(x >= 0.0, "folded_survival needs x >= 0, got {x}");
    Probability::new(erfc(x / SQRT_2))
}

/// Standard normal quantile (inverse CDF), Wichura's AS 241 rational
/// approximations (PPND16), accurate to ~1e-15 over (0, 1).
///
/// The sampler relies on this being a fixed, documented transform: normal
/// variates are produced exclusively as `normal_quantile(u)` of uniforms, so
/// sample paths are a deterministic function of the uniform stream.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile needs p in (0,1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * rational(r, &QUANT_A, &QUANT_B);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let z = if r <= 5.0 {
        r -= 1.6;
        rational(r, &QUANT_C, &QUANT_D)
    } else {
        r -= 5.0;
        rational(r, &QUANT_E, &QUANT_F)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

fn rational(r: f64, num: &[f64; 8], den: &[f64; 8]) -> f64 {
    let mut p = num[7];
    let mut q = den[7];
    for i in (0..7).rev() {
        p = p * r + num[i];
        q = q * r + den[i];
    }
    p / q
}

#[allow(clippy::excessive_precision)]
const QUANT_A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const QUANT_B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
#[allow(clippy::excessive_precision)]
const QUANT_C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
#[allow(clippy::excessive_precision)]
const QUANT_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const QUANT_E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const QUANT_F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Pinned internals of the regularized incomplete gamma evaluation.
const GAMMA_MAX_ITERATIONS: usize = 10_000;
const GAMMA_TOLERANCE: f64 = 1e-14;

/// Regularized incomplete gamma pair `(P(a, x), Q(a, x))` with `P + Q = 1`.
///
/// Series expansion of `P` for `x < a + 1`, Lentz continued fraction for `Q`
/// otherwise, so whichever tail is small is computed directly. The prefactor
/// `x^a e^{-x} / Gamma(a)` switches to a Stirling form for large `a`; the
/// naive `a ln x - x - lgamma(a)` loses absolute accuracy once those terms
/// reach ~1e7 and cancel.
pub fn regularized_gamma(a: f64, x: f64) -> Result<(f64, f64)> {
    assert!(a > 0.0 && x >= 0.0, "regularized_gamma needs a > 0, x >= 0");
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    let prefactor = ln_gamma_prefactor(a, x).exp();
    if x < a + 1.0 {
        let p = prefactor * gamma_series(a, x)?;
        Ok((p, 1.0 - p))
    } else {
        let q = prefactor * gamma_fraction(a, x)?;
        Ok((1.0 - q, q))
    }
}

/// `a ln x - x - ln Gamma(a)`, stable for all `a`.
fn ln_gamma_prefactor(a: f64, x: f64) -> f64 {
    if a < 16.0 {
        return a * x.ln() - x - ln_gamma(a);
    }
    // a ln x - x - lgamma(a)
    //   = [a ln(x/a) + a - x] + ln(a/(2 pi))/2 - stirlerr(a)
    let u = (x - a) / a;
    let core = if u.abs() <= 0.5 {
        -a * (u - u.ln_1p())
    } else {
        a * (x / a).ln() + a - x
    };
    core + 0.5 * (a / (2.0 * std::f64::consts::PI)).ln() - stirling_error(a)
}

/// `ln Gamma(a) - [(a - 1/2) ln a - a + ln(2 pi)/2]` for `a >= 16`.
fn stirling_error(a: f64) -> f64 {
    let r = 1.0 / a;
    let r2 = r * r;
    r / 12.0 - r * r2 / 360.0 + r * r2 * r2 / 1260.0 - r * r2 * r2 * r2 / 1680.0
        + r * r2 * r2 * r2 * r2 / 1188.0
}

/// Lanczos log-gamma (g = 7, 9 terms), used for moderate arguments.
fn ln_gamma(z: f64) -> f64 {
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(z > 0.0);
    if z < 0.5 {
        // Reflection keeps the small-argument half accurate.
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Lower series: P(a,x) = prefactor * sum_k x^k / (a (a+1) ... (a+k)).
fn gamma_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..GAMMA_MAX_ITERATIONS {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_TOLERANCE {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence { what: "incomplete gamma series", iterations: GAMMA_MAX_ITERATIONS })
}

/// Upper continued fraction (modified Lentz): Q(a,x) = prefactor * CF.
fn gamma_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITERATIONS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_TOLERANCE {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma continued fraction",
        iterations: GAMMA_MAX_ITERATIONS,
    })
}

/// Chi-squared CDF with `k` degrees of freedom: `P(k/2, w/2)`.
///
/// Supports `k` up to 10^6; absolute error below 1e-10.
pub fn chi_squared_cdf(w: f64, k: u64) -> Result<Probability> {
    let (p, _) = chi_squared_tails(w, k)?;
    Ok(p)
}

/// Lower and upper chi-squared tails `(P(W <= w), P(W > w))`, each computed
/// on its own side so neither loses accuracy to cancellation.
pub fn chi_squared_tails(w: f64, k: u64) -> Result<(Probability, Probability)> {
    assert!(w >= 0.0, "chi-squared CDF needs w >= 0, got {w}");
    assert!(k >= 1, "chi-squared CDF needs k >= 1");
    let (p, q) = regularized_gamma(k as f64 / 2.0, w / 2.0)?;
    Ok((Probability::new(p), Probability::new(q)))
}
