//! Continuous density catalog: exponential, Gamma, log-normal and Weibull
//! distributions on (0, inf), plus weighted mixtures.
//!
//! Every density exposes the pieces the envelope construction needs: the pdf,
//! its first derivative in factored form, the inflection points that partition
//! the domain into convex/concave regions, the CDF/quantile pair used for
//! percentile spans, and a sampler.

use rand::Rng;
use rand::RngCore;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Probability tolerance of the bisection quantile fallback.
const QUANTILE_TOL: f64 = 1e-10;

/// A univariate density on (0, inf) that the envelope machinery can bound.
///
/// `pdf`, `ln_pdf` and `pdf_derivative` return a domain error for x <= 0.
/// `inflection_points` returns the interior roots of f'' in ascending order;
/// segments between consecutive points are purely convex or concave.
pub trait Density: Send + Sync {
    fn ln_pdf(&self, x: f64) -> Result<f64>;

    fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    fn pdf_derivative(&self, x: f64) -> Result<f64>;

    fn inflection_points(&self) -> Vec<f64>;

    /// Total CDF: 0 for x <= 0.
    fn cdf(&self, x: f64) -> f64;

    /// Inverse CDF for p in [0, 1); p = 0 maps to the support edge 0.
    fn quantile(&self, p: f64) -> Result<f64>;

    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    /// Visits the weighted convexity components of this density. Mixtures
    /// visit each component; atomic densities visit themselves with weight 1.
    /// Envelope bounds are built per component and combined by weighted sum.
    fn for_each_component(&self, visit: &mut dyn FnMut(f64, &dyn Density)) {
        let mut v = visit;
        self.visit_self(&mut v);
    }

    #[doc(hidden)]
    fn visit_self(&self, _visit: &mut dyn FnMut(f64, &dyn Density)) {}
}

/// Draws `n` i.i.d. samples.
pub fn sample_many(d: &dyn Density, rng: &mut dyn RngCore, n: usize) -> Vec<f64> {
    (0..n).map(|_| d.sample(rng)).collect()
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {x}")))
    }
}

fn check_param(value: f64, name: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and positive, got {value}"
        )))
    }
}

/// One of the four catalog families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ContinuousDensity {
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    #[serde(rename = "lognormal")]
    LogNormal {
        location: f64,
        scale: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
}

impl ContinuousDensity {
    pub fn exponential(rate: f64) -> Result<Self> {
        check_param(rate, "exponential rate")?;
        Ok(ContinuousDensity::Exponential { rate })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        check_param(shape, "gamma shape")?;
        check_param(rate, "gamma rate")?;
        Ok(ContinuousDensity::Gamma { shape, rate })
    }

    pub fn log_normal(location: f64, scale: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "log-normal location must be finite, got {location}"
            )));
        }
        check_param(scale, "log-normal scale")?;
        Ok(ContinuousDensity::LogNormal { location, scale })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        check_param(shape, "weibull shape")?;
        check_param(scale, "weibull scale")?;
        Ok(ContinuousDensity::Weibull { shape, scale })
    }

    /// Re-checks parameter invariants, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ContinuousDensity::Exponential { rate } => check_param(rate, "exponential rate"),
            ContinuousDensity::Gamma { shape, rate } => {
                check_param(shape, "gamma shape")?;
                check_param(rate, "gamma rate")
            }
            ContinuousDensity::LogNormal { location, scale } => {
                if !location.is_finite() {
                    return Err(Error::InvalidParameter(
                        "log-normal location must be finite".into(),
                    ));
                }
                check_param(scale, "log-normal scale")
            }
            ContinuousDensity::Weibull { shape, scale } => {
                check_param(shape, "weibull shape")?;
                check_param(scale, "weibull scale")
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ContinuousDensity::Exponential { rate } => 1.0 / rate,
            ContinuousDensity::Gamma { shape, rate } => shape / rate,
            ContinuousDensity::LogNormal { location, scale } => {
                (location + 0.5 * scale * scale).exp()
            }
            ContinuousDensity::Weibull { shape, scale } => {
                scale * (special::ln_gamma(1.0 + 1.0 / shape)).exp()
            }
        }
    }

    /// Sign factor g(x) with f''(x) = f(x) * g(x); cheap and immune to pdf
    /// underflow, so the inflection filter works on it directly.
    fn convexity_factor(&self, x: f64) -> f64 {
        match *self {
            ContinuousDensity::Exponential { rate } => rate * rate,
            ContinuousDensity::Gamma { shape, rate } => {
                let t = (shape - 1.0) / x - rate;
                t * t - (shape - 1.0) / (x * x)
            }
            ContinuousDensity::LogNormal { location, scale } => {
                let s2 = scale * scale;
                let w = (x.ln() - location) / s2;
                ((1.0 + w) * (1.0 + w) + 1.0 - 1.0 / s2 + w) / (x * x)
            }
            ContinuousDensity::Weibull { shape, scale } => {
                let k = shape;
                let y = x / scale;
                let b = (k - 1.0) / x - (k / scale) * y.powf(k - 1.0);
                let db = -(k - 1.0) / (x * x) - k * (k - 1.0) / (scale * scale) * y.powf(k - 2.0);
                b * b + db
            }
        }
    }
}

impl Density for ContinuousDensity {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        check_positive(x, "pdf argument")?;
        Ok(match *self {
            ContinuousDensity::Exponential { rate } => rate.ln() - rate * x,
            ContinuousDensity::Gamma { shape, rate } => {
                shape * rate.ln() - special::ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
            }
            ContinuousDensity::LogNormal { location, scale } => {
                let z = (x.ln() - location) / scale;
                -x.ln() - scale.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
            }
            ContinuousDensity::Weibull { shape, scale } => {
                let y = x / scale;
                shape.ln() - scale.ln() + (shape - 1.0) * y.ln() - y.powf(shape)
            }
        })
    }

    fn pdf_derivative(&self, x: f64) -> Result<f64> {
        check_positive(x, "pdf derivative argument")?;
        let f = self.pdf(x)?;
        let factor = match *self {
            ContinuousDensity::Exponential { rate } => -rate,
            ContinuousDensity::Gamma { shape, rate } => (shape - 1.0) / x - rate,
            ContinuousDensity::LogNormal { location, scale } => {
                -(1.0 + (x.ln() - location) / (scale * scale)) / x
            }
            ContinuousDensity::Weibull { shape, scale } => {
                (shape - 1.0) / x - (shape / scale) * (x / scale).powf(shape - 1.0)
            }
        };
        Ok(factor * f)
    }

    fn inflection_points(&self) -> Vec<f64> {
        let candidates: Vec<f64> = match *self {
            ContinuousDensity::Exponential { .. } => Vec::new(),
            ContinuousDensity::Gamma { shape, rate } => {
                if shape > 1.0 {
                    let s = (shape - 1.0).sqrt();
                    vec![(shape - 1.0 - s) / rate, (shape - 1.0 + s) / rate]
                } else {
                    Vec::new()
                }
            }
            ContinuousDensity::LogNormal { location, scale } => {
                let s2 = scale * scale;
                let d = (1.0 + 4.0 / s2).sqrt();
                vec![
                    (location + 0.5 * s2 * (-3.0 - d)).exp(),
                    (location + 0.5 * s2 * (-3.0 + d)).exp(),
                ]
            }
            ContinuousDensity::Weibull { shape, scale } => {
                let k = shape;
                let disc = (k - 1.0) * (5.0 * k - 1.0);
                if disc < 0.0 {
                    Vec::new()
                } else {
                    let sq = disc.sqrt();
                    [
                        (3.0 * (k - 1.0) - sq) / (2.0 * k),
                        (3.0 * (k - 1.0) + sq) / (2.0 * k),
                    ]
                    .iter()
                    .filter(|&&z| z > 0.0)
                    .map(|&z| scale * z.powf(1.0 / k))
                    .collect()
                }
            }
        };

        let mut pts: Vec<f64> = candidates
            .into_iter()
            .filter(|&x| x.is_finite() && x > 0.0)
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());

        // Keep only candidates where the sign of f'' actually flips. Probe
        // points sit strictly between consecutive candidates (and beyond the
        // first/last), so each probe lies inside a constant-sign region.
        let mut verified = Vec::with_capacity(pts.len());
        for (i, &x) in pts.iter().enumerate() {
            let left = if i == 0 {
                0.5 * x
            } else {
                (pts[i - 1] * x).sqrt()
            };
            let right = if i + 1 == pts.len() {
                2.0 * x
            } else {
                (pts[i + 1] * x).sqrt()
            };
            if self.convexity_factor(left) * self.convexity_factor(right) < 0.0 {
                verified.push(x);
            }
        }
        verified
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            ContinuousDensity::Exponential { rate } => -libm::expm1(-rate * x),
            ContinuousDensity::Gamma { shape, rate } => {
                special::regularized_gamma_p(shape, rate * x)
            }
            ContinuousDensity::LogNormal { location, scale } => {
                special::standard_normal_cdf((x.ln() - location) / scale)
            }
            ContinuousDensity::Weibull { shape, scale } => -libm::expm1(-(x / scale).powf(shape)),
        }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_prob(p)?;
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(match *self {
            ContinuousDensity::Exponential { rate } => -libm::log1p(-p) / rate,
            ContinuousDensity::Gamma { .. } => {
                let hi0 = self.mean() * 2.0 + 1.0;
                bisect_quantile(self, p, hi0)
            }
            ContinuousDensity::LogNormal { location, scale } => {
                (location + scale * special::standard_normal_quantile(p)).exp()
            }
            ContinuousDensity::Weibull { shape, scale } => {
                scale * (-libm::log1p(-p)).powf(1.0 / shape)
            }
        })
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            ContinuousDensity::Exponential { rate } => {
                rand_distr::Exp::new(rate).unwrap().sample(rng)
            }
            ContinuousDensity::Gamma { shape, rate } => rand_distr::Gamma::new(shape, 1.0 / rate)
                .unwrap()
                .sample(rng),
            ContinuousDensity::LogNormal { location, scale } => {
                rand_distr::LogNormal::new(location, scale)
                    .unwrap()
                    .sample(rng)
            }
            ContinuousDensity::Weibull { shape, scale } => {
                rand_distr::Weibull::new(scale, shape).unwrap().sample(rng)
            }
        }
    }

    fn visit_self(&self, visit: &mut dyn FnMut(f64, &dyn Density)) {
        visit(1.0, self);
    }
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "probability must lie in [0, 1), got {p}"
        )))
    }
}

/// Monotone bisection of the CDF, expanding the upper bracket as needed.
fn bisect_quantile(d: &dyn Density, p: f64, hi_guess: f64) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = hi_guess.max(1e-12);
    let mut guard = 0;
    while d.cdf(hi) < p {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = d.cdf(mid);
        if (c - p).abs() <= QUANTILE_TOL {
            return mid;
        }
        if c < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Weighted mixture of catalog densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDensity {
    weights: Vec<f64>,
    components: Vec<ContinuousDensity>,
}

impl MixtureDensity {
    pub fn new(components: Vec<ContinuousDensity>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter(
                "mixture needs at least one component".into(),
            ));
        }
        if components.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "mixture has {} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidParameter(
                "mixture weights must be nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights must sum to 1, got {total}"
            )));
        }
        for c in &components {
            c.validate()?;
        }
        Ok(MixtureDensity {
            weights,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ContinuousDensity] {
        &self.components
    }

    pub fn validate(&self) -> Result<()> {
        MixtureDensity::new(self.components.clone(), self.weights.clone()).map(|_| ())
    }
}

impl Density for MixtureDensity {
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        check_positive(x, "pdf argument")?;
        let mut terms = Vec::with_capacity(self.components.len());
        for (w, c) in self.weights.iter().zip(&self.components) {
            if *w > 0.0 {
                terms.push(w.ln() + c.ln_pdf(x)?);
            }
        }
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
        Ok(m + s.ln())
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        check_positive(x, "pdf argument")?;
        let mut acc = 0.0;
        for (w, c) in self.weights.iter().zip(&self.components) {
            acc += w * c.pdf(x)?;
        }
        Ok(acc)
    }

    fn pdf_derivative(&self, x: f64) -> Result<f64> {
        check_positive(x, "pdf derivative argument")?;
        let mut acc = 0.0;
        for (w, c) in self.weights.iter().zip(&self.components) {
            acc += w * c.pdf_derivative(x)?;
        }
        Ok(acc)
    }

    /// Union of the component inflection points: the convexity partition for
    /// component-wise bounding, not the roots of the mixture's own f''.
    fn inflection_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .components
            .iter()
            .flat_map(|c| c.inflection_points())
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        pts
    }

    fn cdf(&self, x: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * c.cdf(x))
            .sum()
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_prob(p)?;
        if p == 0.0 {
            return Ok(0.0);
        }
        let hi = self
            .components
            .iter()
            .map(|c| c.quantile(p).unwrap_or(0.0))
            .fold(0.0_f64, f64::max);
        Ok(bisect_quantile(self, p, hi))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (w, c) in self.weights.iter().zip(&self.components) {
            acc += w;
            if u < acc {
                return c.sample(rng);
            }
        }
        self.components.last().unwrap().sample(rng)
    }

    fn for_each_component(&self, visit: &mut dyn FnMut(f64, &dyn Density)) {
        for (w, c) in self.weights.iter().zip(&self.components) {
            visit(*w, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn fd_derivative(d: &dyn Density, x: f64, h: f64) -> f64 {
        (d.pdf(x + h).unwrap() - d.pdf(x - h).unwrap()) / (2.0 * h)
    }

    /// Numeric second derivative from the analytic first derivative.
    fn fd_second(d: &dyn Density, x: f64) -> f64 {
        let h = 1e-5 * x;
        (d.pdf_derivative(x + h).unwrap() - d.pdf_derivative(x - h).unwrap()) / (2.0 * h)
    }

    /// Independent inflection oracle: dense geometric sign scan of the
    /// finite-difference f'' followed by bisection.
    fn numeric_inflections(d: &dyn Density, points: usize) -> Vec<f64> {
        let lo = d.quantile(1e-4).unwrap().max(1e-12);
        let hi = d.quantile(1.0 - 1e-4).unwrap();
        let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
        let mut found = Vec::new();
        let mut x_prev = lo;
        let mut s_prev = fd_second(d, x_prev);
        for i in 1..points {
            let x = lo * ratio.powi(i as i32);
            let s = fd_second(d, x);
            if s_prev * s < 0.0 {
                let (mut a, mut b) = (x_prev, x);
                let mut sa = s_prev;
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    let sm = fd_second(d, m);
                    if sa * sm <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        sa = sm;
                    }
                    if b - a < 1e-9 * b {
                        break;
                    }
                }
                found.push(0.5 * (a + b));
            }
            x_prev = x;
            s_prev = s;
        }
        found
    }

    fn random_density(rng: &mut impl Rng, kind: usize) -> ContinuousDensity {
        match kind {
            0 => ContinuousDensity::exponential(rng.random_range(0.2..5.0)).unwrap(),
            1 => ContinuousDensity::gamma(rng.random_range(0.3..6.0), rng.random_range(0.3..4.0))
                .unwrap(),
            2 => ContinuousDensity::log_normal(
                rng.random_range(-1.0..1.0),
                rng.random_range(0.2..2.0),
            )
            .unwrap(),
            _ => ContinuousDensity::weibull(rng.random_range(0.4..5.0), rng.random_range(0.3..4.0))
                .unwrap(),
        }
    }

    #[test]
    fn pdf_known_values() {
        let e = ContinuousDensity::exponential(1.0).unwrap();
        assert!((e.pdf(1e-12).unwrap() - 1.0).abs() < 1e-9);

        let ln = ContinuousDensity::log_normal(0.0, 1.0).unwrap();
        let expect = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((ln.pdf(1.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn gamma_shape_one_reduces_to_exponential() {
        let g = ContinuousDensity::gamma(1.0, 2.0).unwrap();
        let e = ContinuousDensity::exponential(2.0).unwrap();
        assert!((g.pdf(0.5).unwrap() - 2.0 * (-1.0_f64).exp()).abs() < 1e-12);
        for &x in &[0.1, 0.5, 1.0, 3.0, 7.0] {
            assert!((g.pdf(x).unwrap() - e.pdf(x).unwrap()).abs() < 1e-12);
            assert!((g.cdf(x) - e.cdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn pdf_rejects_nonpositive_argument() {
        let e = ContinuousDensity::exponential(1.0).unwrap();
        assert!(matches!(e.pdf(0.0), Err(Error::Domain(_))));
        assert!(matches!(e.pdf(-1.0), Err(Error::Domain(_))));
        assert!(matches!(e.pdf_derivative(-0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn parameter_validation() {
        assert!(ContinuousDensity::exponential(0.0).is_err());
        assert!(ContinuousDensity::gamma(-1.0, 1.0).is_err());
        assert!(ContinuousDensity::log_normal(0.0, 0.0).is_err());
        assert!(ContinuousDensity::weibull(1.0, f64::NAN).is_err());
    }

    #[test]
    fn derivative_known_values() {
        let e = ContinuousDensity::exponential(1.0).unwrap();
        assert!((e.pdf_derivative(0.3).unwrap() + (-0.3_f64).exp()).abs() < 1e-12);

        // Weibull with shape 1 is exponential.
        let w = ContinuousDensity::weibull(1.0, 1.0).unwrap();
        for &x in &[0.2, 1.0, 2.5] {
            assert!((w.pdf_derivative(x).unwrap() - e.pdf_derivative(x).unwrap()).abs() < 1e-12);
        }

        let ln = ContinuousDensity::log_normal(0.0, 1.0).unwrap();
        let fd = fd_derivative(&ln, 2.0, 1e-6);
        let an = ln.pdf_derivative(2.0).unwrap();
        assert!((fd - an).abs() / an.abs() < 1e-5);
    }

    #[test]
    fn derivative_matches_finite_differences_across_catalog() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for trial in 0..1000 {
            let d = random_density(&mut rng, trial % 4);
            for _ in 0..20 {
                let p = rng.random_range(0.05..0.95);
                let x = d.quantile(p).unwrap().max(1e-6);
                let h = 1e-6 * x.max(1.0);
                let fd = fd_derivative(&d, x, h);
                let an = d.pdf_derivative(x).unwrap();
                let scale = an.abs().max(d.pdf(x).unwrap()).max(1e-12);
                assert!(
                    (fd - an).abs() / scale < 1e-4,
                    "fd mismatch for {d:?} at x={x}: fd={fd} analytic={an}"
                );
            }
        }
    }

    #[test]
    fn inflection_known_values() {
        let e = ContinuousDensity::exponential(3.7).unwrap();
        assert!(e.inflection_points().is_empty());

        let g = ContinuousDensity::gamma(3.0, 1.0).unwrap();
        let pts = g.inflection_points();
        assert_eq!(pts.len(), 2);
        assert!((pts[0] - (2.0 - 2.0_f64.sqrt())).abs() < 1e-12);
        assert!((pts[1] - (2.0 + 2.0_f64.sqrt())).abs() < 1e-12);

        let ln = ContinuousDensity::log_normal(0.0, 1.0).unwrap();
        let pts = ln.inflection_points();
        assert_eq!(pts.len(), 2);
        assert!((pts[0] - (0.5 * (-3.0 - 5.0_f64.sqrt())).exp()).abs() < 1e-12);
        assert!((pts[1] - (0.5 * (-3.0 + 5.0_f64.sqrt())).exp()).abs() < 1e-12);
    }

    #[test]
    fn inflection_against_numeric_oracle() {
        let gamma = ContinuousDensity::gamma(3.0, 1.0).unwrap();
        let ln = ContinuousDensity::log_normal(0.0, 1.0).unwrap();
        for d in [&gamma, &ln] {
            let numeric = numeric_inflections(d, 4000);
            let closed: Vec<f64> = d
                .inflection_points()
                .into_iter()
                .filter(|&x| x > d.quantile(1e-4).unwrap() && x < d.quantile(1.0 - 1e-4).unwrap())
                .collect();
            assert_eq!(numeric.len(), closed.len(), "sign-change count for {d:?}");
            for (n, c) in numeric.iter().zip(&closed) {
                assert!(
                    (n - c).abs() <= 1e-8 * c.max(1.0),
                    "inflection mismatch for {d:?}: numeric {n} closed {c}"
                );
            }
        }
    }

    #[test]
    fn inflection_sign_scan_across_catalog() {
        // f'' changes sign exactly at the returned points and nowhere else
        // inside the (1e-4, 1-1e-4) quantile window.
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for trial in 0..120 {
            let d = random_density(&mut rng, trial % 4);
            let numeric = numeric_inflections(&d, 3000);
            let lo = d.quantile(1e-4).unwrap();
            let hi = d.quantile(1.0 - 1e-4).unwrap();
            let closed: Vec<f64> = d
                .inflection_points()
                .into_iter()
                .filter(|&x| x > lo * (1.0 + 1e-9) && x < hi * (1.0 - 1e-9))
                .collect();
            assert_eq!(
                numeric.len(),
                closed.len(),
                "sign-change count mismatch for {d:?}: numeric {numeric:?} closed {closed:?}"
            );
            for (n, c) in numeric.iter().zip(&closed) {
                assert!((n - c).abs() <= 1e-6 * c.max(1e-3), "{d:?}: {n} vs {c}");
            }
        }
    }

    #[test]
    fn weibull_inflection_count_by_shape() {
        assert!(ContinuousDensity::weibull(0.8, 1.0)
            .unwrap()
            .inflection_points()
            .is_empty());
        assert!(ContinuousDensity::weibull(1.0, 1.0)
            .unwrap()
            .inflection_points()
            .is_empty());
        assert_eq!(
            ContinuousDensity::weibull(1.5, 2.0)
                .unwrap()
                .inflection_points()
                .len(),
            1
        );
        assert_eq!(
            ContinuousDensity::weibull(3.0, 1.0)
                .unwrap()
                .inflection_points()
                .len(),
            2
        );
    }

    #[test]
    fn quantile_known_values() {
        let e = ContinuousDensity::exponential(1.0).unwrap();
        let p = 1.0 - (-1.0_f64).exp();
        assert!((e.quantile(p).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(e.quantile(0.0).unwrap(), 0.0);
        assert!(e.quantile(1.0).is_err());
        assert!(e.quantile(-0.1).is_err());
    }

    #[test]
    fn quantile_cdf_inverse_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for trial in 0..40 {
            let d = random_density(&mut rng, trial % 4);
            for i in 1..100 {
                let p = i as f64 / 100.0;
                let x = d.quantile(p).unwrap();
                assert!(
                    (d.cdf(x) - p).abs() < 1e-8,
                    "inverse failed for {d:?} at p={p}: cdf={}",
                    d.cdf(x)
                );
            }
        }
    }

    #[test]
    fn mixture_quantile_bisection() {
        let m = MixtureDensity::new(
            vec![
                ContinuousDensity::exponential(1.0).unwrap(),
                ContinuousDensity::exponential(2.0).unwrap(),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        let x = m.quantile(0.5).unwrap();
        assert!((m.cdf(x) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn mixture_pdf_is_weighted_sum() {
        let comps = vec![
            ContinuousDensity::log_normal(0.0, 0.5).unwrap(),
            ContinuousDensity::gamma(2.0, 1.0).unwrap(),
            ContinuousDensity::weibull(1.5, 2.0).unwrap(),
        ];
        let w = [0.2, 0.5, 0.3];
        let m = MixtureDensity::new(comps.clone(), w.to_vec()).unwrap();
        for &x in &[0.05, 0.3, 1.0, 2.5, 8.0] {
            let direct: f64 = comps
                .iter()
                .zip(&w)
                .map(|(c, wi)| wi * c.pdf(x).unwrap())
                .sum();
            assert!((m.pdf(x).unwrap() - direct).abs() <= 1e-14 * direct.max(1.0));
        }
    }

    #[test]
    fn mixture_validation() {
        let e = ContinuousDensity::exponential(1.0).unwrap();
        assert!(MixtureDensity::new(vec![], vec![]).is_err());
        assert!(MixtureDensity::new(vec![e.clone()], vec![0.9]).is_err());
        assert!(MixtureDensity::new(vec![e.clone(), e.clone()], vec![0.5, 0.5]).is_ok());
        assert!(MixtureDensity::new(vec![e], vec![-1.0]).is_err());
    }

    #[test]
    fn sampling_moments_and_empty() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let e = ContinuousDensity::exponential(2.0).unwrap();
        assert!(sample_many(&e, &mut rng, 0).is_empty());

        let n = 100_000;
        let xs = sample_many(&e, &mut rng, n);
        let mean: f64 = xs.iter().sum::<f64>() / n as f64;
        let tol = 3.0 * 0.5 / (n as f64).sqrt();
        assert!((mean - 0.5).abs() < tol, "mean {mean} vs 0.5 +- {tol}");
    }

    #[test]
    fn sampling_matches_cdf_by_ks() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let ln = ContinuousDensity::log_normal(0.0, 0.5).unwrap();
        let xs = sample_many(&ln, &mut rng, 100_000);
        let stat = crate::oracles::ks_statistic(&xs, |x| ln.cdf(x));
        let crit = 1.6276 / (xs.len() as f64).sqrt();
        assert!(stat < crit, "KS {stat} over 1% critical value {crit}");
    }

    #[test]
    fn mixture_sampling_matches_cdf_by_ks() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let m = MixtureDensity::new(
            vec![
                ContinuousDensity::log_normal(-0.5, 0.4).unwrap(),
                ContinuousDensity::log_normal(0.8, 0.3).unwrap(),
            ],
            vec![0.3, 0.7],
        )
        .unwrap();
        let xs = sample_many(&m, &mut rng, 100_000);
        let stat = crate::oracles::ks_statistic(&xs, |x| m.cdf(x));
        let crit = 1.6276 / (xs.len() as f64).sqrt();
        assert!(stat < crit, "KS {stat} over critical {crit}");
    }

    #[test]
    fn serde_wire_format() {
        let e = ContinuousDensity::exponential(1.5).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"kind":"exponential","params":{"rate":1.5}}"#);
        let back: ContinuousDensity = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);

        let m = MixtureDensity::new(
            vec![
                ContinuousDensity::exponential(1.0).unwrap(),
                ContinuousDensity::log_normal(0.0, 1.0).unwrap(),
            ],
            vec![0.25, 0.75],
        )
        .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: MixtureDensity = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(json.contains(r#""weights":[0.25,0.75]"#));
        assert!(json.contains(r#""components":"#));
    }

    #[test]
    fn pdf_integrates_to_one() {
        // Trapezoid over a wide quantile window; tail mass accounted by CDF.
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        for trial in 0..20 {
            let d = random_density(&mut rng, trial % 4);
            let lo = d.quantile(1e-9).unwrap().max(1e-12);
            let hi = d.quantile(1.0 - 1e-9).unwrap();
            let n = 200_000;
            let mut acc = 0.0;
            let mut x_prev = lo;
            let mut f_prev = d.pdf(lo).unwrap();
            let ratio = (hi / lo).powf(1.0 / n as f64);
            for i in 1..=n {
                let x = lo * ratio.powi(i);
                let f = d.pdf(x).unwrap();
                acc += 0.5 * (f + f_prev) * (x - x_prev);
                x_prev = x;
                f_prev = f;
            }
            let total = acc + d.cdf(lo) + (1.0 - d.cdf(hi));
            assert!(
                (total - 1.0).abs() < 1e-6,
                "normalization of {d:?}: {total}"
            );
        }
    }
}
