//! Univariate and bivariate standard normal primitives.
//!
//! The bivariate CDF is evaluated through the correlation integral
//!
//! ```text
//! Psi(u, v, rho) = Phi(u) Phi(v) + integral_0^rho psi(u, v, r) dr
//! ```
//!
//! which follows from `d Psi / d rho = psi`. The integral is taken over
//! `r = sin(theta)` so the `1 / sqrt(1 - r^2)` factor of the density cancels
//! and the integrand stays bounded up to `|rho| = 1`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Largest |rho| handed to the quadrature; exactly ±1 uses the degenerate form.
pub const RHO_CAP: f64 = 1.0 - 1e-12;

/// A correlation coefficient in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Rho(f64);

impl Rho {
    pub const ZERO: Rho = Rho(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&value) {
            Ok(Rho(value))
        } else {
            Err(Error::Domain(format!("correlation {value} outside [-1, 1]")))
        }
    }

    /// Clamps into `[-1, 1]`; NaN maps to zero.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Rho(0.0)
        } else {
            Rho(value.clamp(-1.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Rho {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Rho::new(value)
    }
}

impl From<Rho> for f64 {
    fn from(r: Rho) -> f64 {
        r.0
    }
}

/// A threshold on the standard-normal scale, extended with ±∞ so that the
/// outermost categories of a discretized variable have uniform bounds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Cutoff {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Cutoff {
    pub fn value(self) -> f64 {
        match self {
            Cutoff::NegInf => f64::NEG_INFINITY,
            Cutoff::Finite(x) => x,
            Cutoff::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Cutoff::Finite(_))
    }
}

impl From<f64> for Cutoff {
    fn from(x: f64) -> Self {
        debug_assert!(!x.is_nan(), "NaN cutoff");
        if x == f64::INFINITY {
            Cutoff::PosInf
        } else if x == f64::NEG_INFINITY {
            Cutoff::NegInf
        } else {
            Cutoff::Finite(x)
        }
    }
}

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF.
///
/// Cody's rational Chebyshev approximations (the same scheme behind R's
/// `pnorm`), with the exponential split to avoid cancellation. Absolute error
/// is below 1e-15 over the real line.
pub fn std_normal_cdf(x: f64) -> f64 {
    let (lower, _) = cdf_both(x);
    lower
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn std_normal_sf(x: f64) -> f64 {
    let (_, upper) = cdf_both(x);
    upper
}

fn cdf_both(x: f64) -> (f64, f64) {
    const A: [f64; 5] = [
        2.235_252_035_460_683_9,
        161.028_231_068_555_88,
        1_067.689_485_460_370_9,
        18_154.981_253_343_56,
        0.065_682_337_918_207_45,
    ];
    const B: [f64; 4] = [
        47.202_581_904_688_24,
        976.098_551_737_776_7,
        10_260.932_208_618_978,
        45_507.789_335_026_73,
    ];
    const C: [f64; 9] = [
        0.398_941_512_088_134_66,
        8.883_149_794_388_376,
        93.506_656_132_177_86,
        597.270_276_394_800_3,
        2_494.537_585_290_372_6,
        6_848.190_450_536_283,
        11_602.651_437_647_35,
        9_842.714_838_383_978,
        1.076_557_677_372_019_2e-8,
    ];
    const D: [f64; 8] = [
        22.266_688_044_328_117,
        235.387_901_782_625,
        1_519.377_599_407_554_8,
        6_485.558_298_266_761,
        18_615.571_640_885_098,
        34_900.952_721_145_98,
        38_912.003_286_093_27,
        19_685.429_676_859_99,
    ];
    const P: [f64; 6] = [
        0.215_898_534_057_957,
        0.127_401_161_160_247_36,
        0.022_235_277_870_649_807,
        0.001_421_619_193_227_893_5,
        2.911_287_495_116_879e-5,
        0.023_073_441_764_940_17,
    ];
    const Q: [f64; 5] = [
        1.284_260_096_144_911_2,
        0.468_238_212_480_865_1,
        0.065_988_137_868_928_55,
        0.003_782_396_332_027_582_4,
        7.297_515_550_839_662e-5,
    ];

    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x == f64::INFINITY {
        return (1.0, 0.0);
    }
    if x == f64::NEG_INFINITY {
        return (0.0, 1.0);
    }

    let y = x.abs();
    if y <= 0.674_489_75 {
        let (mut num, mut den) = (0.0, 0.0);
        if y > f64::EPSILON * 0.5 {
            let xsq = x * x;
            num = A[4] * xsq;
            den = xsq;
            for i in 0..3 {
                num = (num + A[i]) * xsq;
                den = (den + B[i]) * xsq;
            }
        }
        let t = x * (num + A[3]) / (den + B[3]);
        return (0.5 + t, 0.5 - t);
    }

    let tail = if y <= 32f64.sqrt() {
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        let t = (num + C[7]) / (den + D[7]);
        split_exp(y) * t
    } else {
        let xsq = 1.0 / (x * x);
        let mut num = P[5] * xsq;
        let mut den = xsq;
        for i in 0..4 {
            num = (num + P[i]) * xsq;
            den = (den + Q[i]) * xsq;
        }
        let t = xsq * (num + P[4]) / (den + Q[4]);
        split_exp(y) * (FRAC_1_SQRT_2PI - t) / y
    };
    if x > 0.0 {
        (1.0 - tail, tail)
    } else {
        (tail, 1.0 - tail)
    }
}

/// `exp(-y^2 / 2)` computed as a product of two exponentials to keep the
/// relative error small for large `y`.
fn split_exp(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq * 0.5).exp() * (-del * 0.5).exp()
}

/// Inverse of [`std_normal_cdf`].
///
/// Acklam's rational approximation brackets the root, then safeguarded
/// Newton steps (bisection when a step leaves the bracket) polish it to
/// machine precision.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile requires 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        // 1 - p is exact here, and the lower tail has no cancellation.
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    let mut x = acklam(p);
    let (mut lo, mut hi) = (x - 0.5, x + 0.5);
    while std_normal_cdf(lo) > p {
        lo -= 1.0;
    }
    while std_normal_cdf(hi) < p {
        hi += 1.0;
    }
    for _ in 0..60 {
        let f = std_normal_cdf(x) - p;
        let d = std_normal_pdf(x);
        let mut next = x - f / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if std_normal_cdf(next) < p {
            lo = next;
        } else {
            hi = next;
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Standard bivariate normal density with correlation `rho`.
pub fn bvn_pdf(u: f64, v: f64, rho: Rho) -> Result<f64> {
    let r = rho.value();
    if r.abs() >= 1.0 {
        return Err(Error::DegenerateDistribution);
    }
    Ok(bvn_pdf_raw(u, v, r))
}

/// Density without the `|rho| < 1` check; callers guarantee it.
pub(crate) fn bvn_pdf_raw(u: f64, v: f64, r: f64) -> f64 {
    if !u.is_finite() || !v.is_finite() {
        return 0.0;
    }
    let one_minus = 1.0 - r * r;
    let q = (u * u - 2.0 * r * u * v + v * v) / (2.0 * one_minus);
    (-q).exp() / (2.0 * PI * one_minus.sqrt())
}

/// `P(U <= u, V <= v)` for a standard bivariate normal with correlation `rho`.
pub fn bvn_cdf(u: Cutoff, v: Cutoff, rho: Rho) -> f64 {
    bvn_cdf_raw(u.value(), v.value(), rho.value())
}

pub(crate) fn bvn_cdf_raw(u: f64, v: f64, r: f64) -> f64 {
    if u == f64::NEG_INFINITY || v == f64::NEG_INFINITY {
        return 0.0;
    }
    if u == f64::INFINITY {
        return std_normal_cdf(v);
    }
    if v == f64::INFINITY {
        return std_normal_cdf(u);
    }
    if r >= 1.0 {
        return std_normal_cdf(u.min(v));
    }
    if r <= -1.0 {
        return (std_normal_cdf(u) - std_normal_sf(v)).max(0.0);
    }
    let r = r.clamp(-RHO_CAP, RHO_CAP);
    let base = std_normal_cdf(u) * std_normal_cdf(v);
    if r == 0.0 {
        return base;
    }
    (base + correlation_integral(u, v, r)).clamp(0.0, 1.0)
}

/// `integral_0^rho psi(u, v, r) dr`, i.e. `Psi(u,v,rho) - Psi(u,v,0)`.
///
/// This is the increment every covariance formula in [`crate::discrete`]
/// is built from, so it is exposed directly rather than as a difference of
/// two CDF evaluations.
pub fn bvn_cdf_increment(u: Cutoff, v: Cutoff, rho: Rho) -> f64 {
    let (u, v, r) = (u.value(), v.value(), rho.value());
    if !u.is_finite() || !v.is_finite() {
        return 0.0;
    }
    if r.abs() >= 1.0 {
        return bvn_cdf_raw(u, v, r) - std_normal_cdf(u) * std_normal_cdf(v);
    }
    correlation_integral(u, v, r.clamp(-RHO_CAP, RHO_CAP))
}

fn correlation_integral(u: f64, v: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let theta_end = r.asin();
    let a = 0.5 * (u * u + v * v);
    let uv = u * v;
    // psi(u, v, sin t) cos t = exp(-(a - uv sin t) / cos^2 t) / (2 pi)
    let integrand = |t: f64| {
        let (s, c) = t.sin_cos();
        let c2 = c * c;
        if c2 <= 0.0 {
            return 0.0;
        }
        (-(a - uv * s) / c2).exp()
    };
    adaptive_gauss_legendre(&integrand, 0.0, theta_end, 1e-15) / (2.0 * PI)
}

/// Probability that `(U, V)` lands in the rectangle `(lo_u, hi_u] x (lo_v, hi_v]`.
pub fn bvn_rect_prob(lo_u: Cutoff, hi_u: Cutoff, lo_v: Cutoff, hi_v: Cutoff, rho: Rho) -> Result<f64> {
    if lo_u > hi_u || lo_v > hi_v {
        return Err(Error::Domain(format!(
            "inverted rectangle bounds ({lo_u:?}, {hi_u:?}] x ({lo_v:?}, {hi_v:?}]"
        )));
    }
    Ok(rect_prob_raw(
        lo_u.value(),
        hi_u.value(),
        lo_v.value(),
        hi_v.value(),
        rho.value(),
    ))
}

pub(crate) fn rect_prob_raw(lo_u: f64, hi_u: f64, lo_v: f64, hi_v: f64, r: f64) -> f64 {
    let p = bvn_cdf_raw(hi_u, hi_v, r) - bvn_cdf_raw(lo_u, hi_v, r) - bvn_cdf_raw(hi_u, lo_v, r)
        + bvn_cdf_raw(lo_u, lo_v, r);
    p.max(0.0)
}

const GL_ORDER: usize = 16;

fn gauss_legendre_rule() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Adaptive Gauss-Legendre: a panel is accepted when its 16-point estimate
/// agrees with the sum over its two halves.
pub(crate) fn adaptive_gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gauss_legendre(f, a, m);
        let right = gauss_legendre(f, m, b);
        let halves = left + right;
        if depth == 0 || (halves - whole).abs() <= tol {
            return halves;
        }
        recurse(f, a, m, left, 0.5 * tol, depth - 1) + recurse(f, m, b, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = gauss_legendre(f, a, b);
    recurse(f, a, b, whole, tol, 24)
}
