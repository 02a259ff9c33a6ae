//! Popular-content slice: Zipf popularity, cache birth-death chain, hit ratio
//! and RSU delay.
//!
//! The vehicle cache is a chain over `i = 0..=C_p` valid files, state `i`
//! meaning the `i` most popular files are fresh. Files arrive at `R_HP / L_p`
//! and expire at a state-independent rate μ_p, so `r_i ∝ ρ^(C_p - i)` with
//! `ρ = μ_p L_p / R_HP`.

use serde::Serialize;

use crate::domain::{FociConfig, Popularity};
use crate::error::{Error, Result};
use crate::queueing::{md1_sojourn, min_md1_rate};

/// `|ρ - 1|` below this uses the uniform branch.
pub const RHO_UNIT_TOL: f64 = 1e-9;

/// Zipf popularity `p_f ∝ f^(-ν)` over `files` ranks.
pub fn zipf(files: usize, skew: f64) -> Result<Popularity> {
    if files == 0 {
        return Err(Error::invalid("zipf_files", "must be at least 1"));
    }
    if !(skew.is_finite() && skew >= 0.0) {
        return Err(Error::invalid("zipf_skew", format!("must be non-negative (got {skew})")));
    }
    let weights: Vec<f64> = (1..=files).map(|f| (f as f64).powf(-skew)).collect();
    // smallest terms first
    let total: f64 = weights.iter().rev().sum();
    Ok(Popularity::from_normalized(weights.into_iter().map(|w| w / total).collect()))
}

/// ρ for a slice configuration; infinite when the HAP sends no files.
pub fn cache_rho(cfg: &FociConfig) -> f64 {
    if cfg.hap_rate > 0.0 {
        cfg.expire_rate * cfg.file_size / cfg.hap_rate
    } else {
        f64::INFINITY
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::domain("cache chain", format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

/// Steady-state occupancy `r_0..=r_C` of the cache chain.
pub fn cache_steady_state(rho: f64, slots: u32) -> Result<Vec<f64>> {
    check_rho(rho)?;
    let c = slots as usize;
    if rho.is_infinite() {
        let mut r = vec![0.0; c + 1];
        r[0] = 1.0;
        return Ok(r);
    }
    if (rho - 1.0).abs() < RHO_UNIT_TOL {
        return Ok(vec![1.0 / (c + 1) as f64; c + 1]);
    }
    // Truncated geometric (1-q) q^n / (1-q^(C+1)) with q < 1; n counts
    // empty slots when ρ < 1 and full slots when ρ > 1.
    let (lq, from_full) = if rho < 1.0 { (rho.ln(), true) } else { (-rho.ln(), false) };
    let norm = lq.exp_m1() / ((c + 1) as f64 * lq).exp_m1();
    Ok((0..=c)
        .map(|i| {
            let n = if from_full { c - i } else { i };
            norm * (n as f64 * lq).exp()
        })
        .collect())
}

/// The chain parameters together with their steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheChain {
    pub rho: f64,
    pub slots: u32,
    pub steady_state: Vec<f64>,
}

impl CacheChain {
    pub fn new(rho: f64, slots: u32) -> Result<Self> {
        Ok(CacheChain {
            rho,
            slots,
            steady_state: cache_steady_state(rho, slots)?,
        })
    }

    pub fn from_config(cfg: &FociConfig) -> Result<Self> {
        Self::new(cache_rho(cfg), cfg.cache_slots)
    }

    /// Mean number of valid files over the slot count; zero for an empty cache.
    pub fn utilization(&self) -> f64 {
        if self.slots == 0 {
            return 0.0;
        }
        let mean: f64 = self
            .steady_state
            .iter()
            .enumerate()
            .map(|(i, r)| i as f64 * r)
            .sum();
        mean / self.slots as f64
    }
}

fn check_slots(pop: &Popularity, slots: u32) -> Result<()> {
    if slots as usize > pop.files() {
        return Err(Error::invalid(
            "cache_slots",
            format!("cannot exceed the number of popular files ({slots} > {})", pop.files()),
        ));
    }
    Ok(())
}

/// Probability that a request finds its file valid in the vehicle cache.
pub fn hit_ratio(pop: &Popularity, rho: f64, slots: u32) -> Result<f64> {
    check_rho(rho)?;
    check_slots(pop, slots)?;
    if slots == 0 || rho.is_infinite() {
        return Ok(0.0);
    }
    let c = slots as usize;
    let big_a = (c + 1) as f64;
    let probs = &pop.probabilities()[..c];
    let total: f64 = if (rho - 1.0).abs() < RHO_UNIT_TOL {
        probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * (c - i) as f64 / big_a)
            .sum()
    } else if rho < 1.0 {
        // (1 - ρ^a) / (1 - ρ^A), a = C - f + 1
        let lr = rho.ln();
        let denom = (big_a * lr).exp_m1();
        probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * ((c - i) as f64 * lr).exp_m1() / denom)
            .sum()
    } else {
        // same ratio written in σ = 1/ρ: σ^f (1 - σ^a) / (1 - σ^A)
        let ls = -rho.ln();
        let denom = (big_a * ls).exp_m1();
        probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * ((i + 1) as f64 * ls).exp() * ((c - i) as f64 * ls).exp_m1() / denom)
            .sum()
    };
    Ok(total.clamp(0.0, 1.0))
}

/// `Σ_i r_i Σ_{f <= i} p_f`, the state-by-state form of [`hit_ratio`].
pub fn hit_ratio_direct(pop: &Popularity, rho: f64, slots: u32) -> Result<f64> {
    check_slots(pop, slots)?;
    let r = cache_steady_state(rho, slots)?;
    let cum = pop.cumulative(slots as usize);
    Ok(r.iter().zip(&cum).map(|(r, c)| r * c).sum())
}

/// Mean RSU sojourn for cache misses (M/D/1).
pub fn foci_delay(thinned_arrival: f64, file_size: f64, rsu_rate: f64) -> Result<f64> {
    if rsu_rate <= 0.0 {
        return Err(Error::RsuRateRequired("file service time"));
    }
    md1_sojourn(thinned_arrival, file_size / rsu_rate, "file RSU")
}

/// Smallest RSU rate meeting the file delay target.
pub fn min_rsu_rate_foci(p_hit: f64, request_rate: f64, delay_target: f64, file_size: f64) -> f64 {
    min_md1_rate(request_rate * (1.0 - p_hit), file_size, delay_target)
}

/// HAP rate at the knee of the hit-ratio curve.
///
/// Scans `step..=max_rate` and returns the rate with the most negative second
/// difference of the hit ratio, i.e. where extra HAP rate stops paying off.
pub fn saturate_rate(cfg: &FociConfig, max_rate: f64, step: f64) -> Result<f64> {
    if !(step > 0.0 && max_rate >= 3.0 * step) {
        return Err(Error::invalid("saturate_rate", "needs at least three grid points"));
    }
    let n = (max_rate / step + 1e-9).floor() as usize;
    let hits = (1..=n)
        .map(|k| {
            let rate = k as f64 * step;
            hit_ratio(&cfg.popularity, cfg.expire_rate * cfg.file_size / rate, cfg.cache_slots)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = (f64::INFINITY, step);
    for k in 1..hits.len() - 1 {
        let curvature = hits[k + 1] - 2.0 * hits[k] + hits[k - 1];
        if curvature < best.0 {
            best = (curvature, (k + 1) as f64 * step);
        }
    }
    Ok(best.1)
}

/// Every closed-form file-slice metric for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FociAnalysis {
    pub rho: f64,
    pub hit_ratio: f64,
    /// `Σ_{f <= C_p} p_f`, the hit ratio of an always-full cache.
    pub hit_ceiling: f64,
    pub thinned_arrival: f64,
    pub cache_utilization: f64,
    /// `λ'_p L_p / R_RP`.
    pub load: Option<f64>,
    pub mean_delay: Option<f64>,
    pub min_rsu_rate: f64,
}

impl FociAnalysis {
    pub fn evaluate(cfg: &FociConfig) -> Result<Self> {
        let chain = CacheChain::from_config(cfg)?;
        let hit = hit_ratio(&cfg.popularity, chain.rho, cfg.cache_slots)?;
        let thinned_arrival = cfg.request_rate * (1.0 - hit);
        let mean_delay = match foci_delay(thinned_arrival, cfg.file_size, cfg.rsu_rate) {
            Ok(w) => Some(w),
            Err(e) if e.is_model_error() => None,
            Err(e) => return Err(e),
        };
        Ok(FociAnalysis {
            rho: chain.rho,
            hit_ratio: hit,
            hit_ceiling: cfg.popularity.top_mass(cfg.cache_slots as usize),
            thinned_arrival,
            cache_utilization: chain.utilization(),
            load: (cfg.rsu_rate > 0.0).then(|| thinned_arrival * cfg.file_size / cfg.rsu_rate),
            mean_delay,
            min_rsu_rate: min_rsu_rate_foci(hit, cfg.request_rate, cfg.delay_target, cfg.file_size),
        })
    }
}
