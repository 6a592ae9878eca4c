//! Standard-normal numerics: univariate CDF and quantile plus the bivariate
//! upper-orthant probability.
//!
//! These three functions underpin every test statistic, boundary solve, and
//! minimal-detectable-difference computation in the crate. The CDF uses
//! Cody's rational Chebyshev approximation of erfc (max relative error near
//! machine epsilon), the quantile uses Wichura's PPND16 rational
//! approximation, and the orthant probability is the Drezner–Wesolowsky
//! single-integral form with fixed-order Gauss–Legendre quadrature as
//! refined by Genz.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arguments at or beyond this magnitude are in a tail that is not
/// resolvable in double precision; the CDF clamps to exactly 0 or 1 there.
pub const TAIL_CUTOFF: f64 = 38.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("probability must lie in [0, 1], got {0}")]
    ProbabilityRange(f64),
    #[error("z-score must be finite, got {0}")]
    NonFiniteZ(f64),
    #[error("quantile requires 0 < p < 1, got {0}")]
    QuantileDomain(f64),
    #[error("correlation must satisfy -1 < rho < 1, got {0}")]
    CorrelationRange(f64),
}

/// A probability, guaranteed to lie in `[0, 1]`.
#[derive(Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const HALF: Probability = Probability(0.5);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self, DistError> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(DistError::ProbabilityRange(value))
        }
    }

    /// Wraps a value already known to lie in `[0, 1]`.
    pub(crate) fn new_unchecked(value: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&value), "out of range: {value}");
        Probability(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = DistError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Debug for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Probability({})", self.0)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A standard-normal deviate, guaranteed finite.
#[derive(Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ZScore(f64);

impl ZScore {
    pub const ZERO: ZScore = ZScore(0.0);

    pub fn new(value: f64) -> Result<Self, DistError> {
        if value.is_finite() {
            Ok(ZScore(value))
        } else {
            Err(DistError::NonFiniteZ(value))
        }
    }

    pub(crate) fn new_unchecked(value: f64) -> Self {
        debug_assert!(value.is_finite(), "non-finite z: {value}");
        ZScore(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ZScore {
    type Error = DistError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        ZScore::new(value)
    }
}

impl From<ZScore> for f64 {
    fn from(z: ZScore) -> f64 {
        z.0
    }
}

impl fmt::Debug for ZScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZScore({})", self.0)
    }
}

impl fmt::Display for ZScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Standard-normal CDF Φ(x).
pub fn std_normal_cdf(x: ZScore) -> Probability {
    Probability::new_unchecked(phi(x.value()))
}

/// Standard-normal quantile Φ⁻¹(p). Errors on p ∈ {0, 1}.
pub fn std_normal_quantile(p: Probability) -> Result<ZScore, DistError> {
    let v = p.value();
    if v <= 0.0 || v >= 1.0 {
        return Err(DistError::QuantileDomain(v));
    }
    Ok(ZScore::new_unchecked(inverse_phi(v)))
}

/// Upper-orthant probability P(X > a, Y > b) for a standard bivariate
/// normal pair with correlation `rho`.
pub fn bivariate_upper_orthant(a: ZScore, b: ZScore, rho: f64) -> Result<Probability, DistError> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(DistError::CorrelationRange(rho));
    }
    Ok(Probability::new_unchecked(bvn_upper(
        a.value(),
        b.value(),
        rho,
    )))
}

/// Φ(x) as a plain f64 function; clamps to 0/1 beyond [`TAIL_CUTOFF`].
pub(crate) fn phi(x: f64) -> f64 {
    if x <= -TAIL_CUTOFF {
        return 0.0;
    }
    if x >= TAIL_CUTOFF {
        return 1.0;
    }
    if x < 0.0 {
        0.5 * erfc_cody(-x * std::f64::consts::FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc_cody(x * std::f64::consts::FRAC_1_SQRT_2)
    }
}

// ---------------------------------------------------------------------------
// erfc — Cody's rational Chebyshev approximation (netlib specfun calerf)
// ---------------------------------------------------------------------------

const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const ERFC_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERFC_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const ERFC_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERFC_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];
const FRAC_1_SQRT_PI: f64 = 5.641895835477562869e-1;

fn erfc_cody(x: f64) -> f64 {
    let y = x.abs();
    let result = if y <= 0.46875 {
        // erfc via erf in the central region
        let ysq = if y > 1.11e-16 { y * y } else { 0.0 };
        let mut num = ERF_A[4] * ysq;
        let mut den = ysq;
        for i in 0..3 {
            num = (num + ERF_A[i]) * ysq;
            den = (den + ERF_B[i]) * ysq;
        }
        return 1.0 - x * (num + ERF_A[3]) / (den + ERF_B[3]);
    } else if y <= 4.0 {
        let mut num = ERFC_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERFC_C[i]) * y;
            den = (den + ERFC_D[i]) * y;
        }
        let r = (num + ERFC_C[7]) / (den + ERFC_D[7]);
        scaled_by_exp(y, r)
    } else if y < 26.543 {
        let ysq = 1.0 / (y * y);
        let mut num = ERFC_P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + ERFC_P[i]) * ysq;
            den = (den + ERFC_Q[i]) * ysq;
        }
        let mut r = ysq * (num + ERFC_P[4]) / (den + ERFC_Q[4]);
        r = (FRAC_1_SQRT_PI - r) / y;
        scaled_by_exp(y, r)
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

// exp(-y^2) computed as exp(-ysq*ysq) * exp(-del) to preserve accuracy for
// large arguments (Cody's trick: split y at a multiple of 1/16).
fn scaled_by_exp(y: f64, r: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * r
}

// ---------------------------------------------------------------------------
// Quantile — Wichura's algorithm AS 241, PPND16
// ---------------------------------------------------------------------------

pub(crate) fn inverse_phi(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * rational(r, &PPND_A, &PPND_B);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut s = (-r.ln()).sqrt();
    let z = if s <= 5.0 {
        s -= 1.6;
        rational(s, &PPND_C, &PPND_D)
    } else {
        s -= 5.0;
        rational(s, &PPND_E, &PPND_F)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

fn rational(r: f64, num: &[f64; 8], den: &[f64; 8]) -> f64 {
    let mut n = num[7];
    let mut d = den[7];
    for i in (0..7).rev() {
        n = n * r + num[i];
        d = d * r + den[i];
    }
    n / d
}

const PPND_A: [f64; 8] = [
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
const PPND_B: [f64; 8] = [
    1.0,
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
const PPND_C: [f64; 8] = [
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
const PPND_D: [f64; 8] = [
    1.0,
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
const PPND_E: [f64; 8] = [
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
const PPND_F: [f64; 8] = [
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

// ---------------------------------------------------------------------------
// Bivariate upper orthant — Drezner–Wesolowsky / Genz (tvpack BVND)
// ---------------------------------------------------------------------------

// Gauss–Legendre (weight, node) pairs; each node x is evaluated at 1−x and
// 1+x inside the quadrature loops.
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705, -0.9324695142031522),
    (0.3607615730481384, -0.6612093864662647),
    (0.4679139345726904, -0.2386191860831970),
];
const GL12: [(f64, f64); 6] = [
    (0.04717533638651177, -0.9815606342467191),
    (0.1069393259953183, -0.9041172563704750),
    (0.1600783285433464, -0.7699026741943050),
    (0.2031674267230659, -0.5873179542866171),
    (0.2334925365383547, -0.3678314989981802),
    (0.2491470458134029, -0.1252334085114692),
];
const GL20: [(f64, f64); 10] = [
    (0.01761400713915212, -0.9931285991850949),
    (0.04060142980038694, -0.9639719272779138),
    (0.06267204833410906, -0.9122344282513259),
    (0.08327674157670475, -0.8391169718222188),
    (0.1019301198172404, -0.7463319064601508),
    (0.1181945319615184, -0.6360536807265150),
    (0.1316886384491766, -0.5108670019508271),
    (0.1420961093183821, -0.3737060887154196),
    (0.1491729864726037, -0.2277858511416451),
    (0.1527533871307259, -0.07652652113349733),
];

/// P(X > h, Y > k) for standard bivariate normal with correlation `r`.
pub(crate) fn bvn_upper(dh: f64, dk: f64, r: f64) -> f64 {
    use std::f64::consts::PI;

    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };

    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r.abs() > 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = r.asin();
            for &(w, x) in quad {
                for is in [-1.0, 1.0] {
                    let sn = (asr * (is * x + 1.0) / 2.0).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (4.0 * PI);
        }
        bvn += phi(-h) * phi(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a_s = (1.0 - r) * (1.0 + r);
            let mut a = a_s.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -(bs / a_s + hk) / 2.0;
            if asr > -100.0 {
                bvn = a * asr.exp() * (1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0
                    + c * d * a_s * a_s / 5.0);
            }
            if -hk < 100.0 {
                let b = bs.sqrt();
                bvn -= (-hk / 2.0).exp()
                    * (2.0 * PI).sqrt()
                    * phi(-b / a)
                    * b
                    * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for &(w, x) in quad {
                for is in [-1.0, 1.0] {
                    let xs = (a * (is * x + 1.0)).powi(2);
                    let rs = (1.0 - xs).sqrt();
                    let asr = -(bs / xs + hk) / 2.0;
                    if asr > -100.0 {
                        let sp = 1.0 + c * xs * (1.0 + d * xs);
                        let ep = (-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs;
                        bvn += a * w * asr.exp() * (ep - sp);
                    }
                }
            }
            bvn = -bvn / (2.0 * PI);
        }
        if r > 0.0 {
            bvn += phi(-h.max(k));
        } else {
            bvn = -bvn;
            if k > h {
                bvn += phi(k) - phi(h);
            }
        }
    }
    bvn.clamp(0.0, 1.0)
}
