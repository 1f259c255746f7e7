//! Digital readout of ensemble-encoded numbers.
//!
//! Measuring `N` qubits of an ensemble gives a `Binomial(N, S₁₁)` count of
//! ones. Sampling uses ChaCha8 (`rand_chacha`) seeded with a `u64` through
//! `SeedableRng::seed_from_u64`; the same seed gives the same counts on every
//! platform. Independent trials derive their seeds with [`derive_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::arith::Real4;
use crate::error::{Error, Result};
use crate::qcm::{EnsembleId, EnsembleStore};
use crate::scalar::Scalar;

pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleResult {
    pub shots: u64,
    pub ones: u64,
    pub seed: u64,
}

impl SampleResult {
    pub fn proportion(&self) -> f64 {
        self.ones as f64 / self.shots as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wilson,
    Delta,
}

/// Serialises as
/// `{"point":…,"ci":[lo,hi],"level":0.95,"shots":N,"seed":S,"method":"wilson"|"delta"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub point: f64,
    pub ci: [f64; 2],
    pub level: f64,
    pub shots: u64,
    pub seed: u64,
    pub method: Method,
}

impl EstimateReport {
    pub fn ci_low(&self) -> f64 {
        self.ci[0]
    }

    pub fn ci_high(&self) -> f64 {
        self.ci[1]
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci[0] <= value && value <= self.ci[1]
    }
}

/// Seed for trial `index` of a run seeded with `base`: one SplitMix64 step
/// applied to `base + index·γ`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Two-sided standard-normal quantile for a confidence level.
pub fn z_for_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

fn draw(rng: &mut ChaCha8Rng, shots: u64, p: f64) -> u64 {
    Binomial::new(shots, p.clamp(0.0, 1.0))
        .expect("p is clamped into [0, 1]")
        .sample(rng)
}

/// Measures `shots` qubits of ensemble `a`. Reading does not consume it.
pub fn sample<T: Scalar>(
    store: &EnsembleStore<T>,
    a: EnsembleId,
    shots: u64,
    seed: u64,
) -> Result<SampleResult> {
    if shots == 0 {
        return Err(Error::InvalidShots);
    }
    let p = store.r1(a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(SampleResult {
        shots,
        ones: draw(&mut rng, shots, p),
        seed,
    })
}

/// Wilson score interval for `k` successes out of `n` at quantile `z`,
/// clamped into `[0, 1]`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// `k/N` with its Wilson score interval.
pub fn estimate_real1(s: &SampleResult, level: f64) -> Result<EstimateReport> {
    if s.shots == 0 {
        return Err(Error::InvalidShots);
    }
    let z = z_for_level(level)?;
    let (lo, hi) = wilson_interval(s.ones, s.shots, z);
    Ok(EstimateReport {
        point: s.proportion(),
        ci: [lo, hi],
        level,
        shots: s.shots,
        seed: s.seed,
        method: Method::Wilson,
    })
}

/// Plug-in ratio `(p₁ − p₂)/(p₃ − p₄)` and its first-order (delta-method)
/// standard error, treating each `pᵢ` as an independent proportion over
/// `shots` trials.
pub fn delta_ratio(p: [f64; 4], shots: u64) -> (f64, f64, f64) {
    let n = shots as f64;
    let var = p.map(|q| q * (1.0 - q) / n);
    let num = p[0] - p[1];
    let den = p[2] - p[3];
    let point = num / den;
    // ∂/∂p₁,₂ = ±1/den, ∂/∂p₃,₄ = ∓num/den²
    let se = ((var[0] + var[1]) / (den * den) + num * num * (var[2] + var[3]) / den.powi(4)).sqrt();
    let den_se = (var[2] + var[3]).sqrt();
    (point, se, den_se)
}

/// Estimates a `Real4` from `shots` measurements of each of its four
/// ensembles, with a delta-method interval `point ± z·SE`.
pub fn estimate_real4<T: Scalar>(
    store: &EnsembleStore<T>,
    x: Real4,
    shots: u64,
    seed: u64,
    level: f64,
) -> Result<EstimateReport> {
    if shots == 0 {
        return Err(Error::InvalidShots);
    }
    let z = z_for_level(level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = [0.0; 4];
    for (slot, id) in p.iter_mut().zip(x.ids()) {
        let q = store.r1(id)?;
        *slot = draw(&mut rng, shots, q) as f64 / shots as f64;
    }
    let (point, se, den_se) = delta_ratio(p, shots);
    let den = p[2] - p[3];
    if den.abs() <= z * den_se {
        return Err(Error::DenominatorIndistinguishableFromZero {
            denominator: den,
            standard_error: den_se,
            z,
        });
    }
    Ok(EstimateReport {
        point,
        ci: [point - z * se, point + z * se],
        level,
        shots,
        seed,
        method: Method::Delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{encode_real4, r4};

    fn report(k: u64, n: u64) -> EstimateReport {
        estimate_real1(
            &SampleResult {
                shots: n,
                ones: k,
                seed: 0,
            },
            0.95,
        )
        .unwrap()
    }

    // Independent closed form, written against the textbook expression
    // (p̂ + z²/2n ± z√(p̂q̂/n + z²/4n²)) / (1 + z²/n).
    fn wilson_oracle(k: f64, n: f64, z: f64) -> (f64, f64) {
        let p = k / n;
        let a = p + z * z / (2.0 * n);
        let b = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        let d = 1.0 + z * z / n;
        ((a - b) / d, (a + b) / d)
    }

    #[test]
    fn z_quantile() {
        assert!((z_for_level(0.95).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        assert!(z_for_level(1.0).is_err());
        assert!(z_for_level(0.0).is_err());
    }

    #[test]
    fn wilson_examples() {
        let all = report(10, 10);
        assert_eq!(all.point, 1.0);
        assert_eq!(all.ci_high(), 1.0);

        let none = report(0, 10);
        assert_eq!(none.point, 0.0);
        assert_eq!(none.ci_low(), 0.0);
        assert!((none.ci_high() - 0.278).abs() < 5e-4);

        let three = report(3, 10);
        assert_eq!(three.point, 0.3);
        assert!((three.ci_low() - 0.108).abs() < 5e-4);
        assert!((three.ci_high() - 0.603).abs() < 5e-4);

        let z = z_for_level(0.95).unwrap();
        for (k, n) in [(3u64, 10u64), (0, 10), (57, 200), (999, 1000)] {
            let (lo, hi) = wilson_oracle(k as f64, n as f64, z);
            let r = report(k, n);
            assert!((r.ci_low() - lo.max(0.0)).abs() < 1e-12);
            assert!((r.ci_high() - hi.min(1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_examples() {
        let mut store = EnsembleStore::<f64>::new();
        let zero = store.prepare(0.0).unwrap();
        let one = store.prepare(1.0).unwrap();
        let half = store.prepare(0.5).unwrap();
        assert_eq!(sample(&store, zero, 1000, 1).unwrap().ones, 0);
        assert_eq!(sample(&store, one, 100, 1).unwrap().ones, 100);
        // ±3σ with σ = √(pq/N) = 5e-4
        let s = sample(&store, half, 1_000_000, 42).unwrap();
        assert!((0.4985..=0.5015).contains(&s.proportion()));
        assert!(matches!(
            sample(&store, half, 0, 1),
            Err(Error::InvalidShots)
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut store = EnsembleStore::<f64>::new();
        let a = store.prepare(0.37).unwrap();
        let s1 = sample(&store, a, 5000, 9).unwrap();
        let s2 = sample(&store, a, 5000, 9).unwrap();
        assert_eq!(s1, s2);
        assert_ne!(s1.ones, sample(&store, a, 5000, 10).unwrap().ones);
        assert!(!store.is_consumed(a).unwrap());
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn wilson_width_shrinks() {
        let z = z_for_level(0.95).unwrap();
        for n in [100u64, 1000, 10_000] {
            let (a, b) = wilson_interval(n / 2, n, z);
            let (c, d) = wilson_interval(2 * n, 4 * n, z);
            let ratio = (b - a) / (d - c);
            assert!((ratio - 2.0).abs() <= 0.2, "ratio {ratio}");
        }
    }

    #[test]
    fn plug_in_consistency() {
        let p = [0.9, 0.1, 0.7, 0.3];
        let (point, _, _) = delta_ratio(p, 1000);
        assert!((point - 2.0).abs() < 1e-12);
    }

    #[test]
    fn delta_se_against_finite_differences() {
        // Numerical gradient of the ratio, combined with binomial variances.
        let p = [0.8, 0.3, 0.65, 0.2];
        let n = 5000u64;
        let f = |q: [f64; 4]| (q[0] - q[1]) / (q[2] - q[3]);
        let h = 1e-6;
        let mut var = 0.0;
        for i in 0..4 {
            let (mut up, mut dn) = (p, p);
            up[i] += h;
            dn[i] -= h;
            let g = (f(up) - f(dn)) / (2.0 * h);
            var += g * g * p[i] * (1.0 - p[i]) / n as f64;
        }
        let (_, se, _) = delta_ratio(p, n);
        assert!((se - var.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn real4_estimate_of_two() {
        let mut store = EnsembleStore::<f64>::new();
        let x = encode_real4(&mut store, 2.0).unwrap();
        let r = estimate_real4(&store, x, 1_000_000, 2024, 0.95).unwrap();
        // SE from p = (1, 0, 0.75, 0.25): √(2·0.1875/N)/0.25 ≈ 2.45e-3
        assert!((1.98..=2.02).contains(&r.point));
        assert!(r.contains(r.point));
        assert_eq!(r.method, Method::Delta);
        assert_eq!(r4(&store, x).unwrap(), 2.0);
    }

    #[test]
    fn real4_estimate_of_zero_covers_zero() {
        let mut store = EnsembleStore::<f64>::new();
        let x = encode_real4(&mut store, 0.0).unwrap();
        let r = estimate_real4(&store, x, 10_000, 5, 0.95).unwrap();
        assert!(r.contains(0.0));
    }

    #[test]
    fn real4_estimate_rejects_unresolved_denominator() {
        let mut store = EnsembleStore::<f64>::new();
        let x = encode_real4(&mut store, 1e6).unwrap();
        assert!(matches!(
            estimate_real4(&store, x, 100, 1, 0.95),
            Err(Error::DenominatorIndistinguishableFromZero { .. })
        ));
    }

    #[test]
    fn report_json_shape() {
        let r = report(3, 10);
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        assert_eq!(v["method"], "wilson");
        assert_eq!(v["ci"].as_array().unwrap().len(), 2);
        assert_eq!(v["shots"], 10);
        assert_eq!(v["level"], 0.95);
    }
}
