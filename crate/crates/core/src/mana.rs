//! Map slice: HAP prefetch accomplishment, RSU service moments and delays.
//!
//! A vehicle passing its J-th block can prefetch that block's map during the
//! dwell time in the `J' = min(J-1, C_m)` blocks before it. The window is
//! Erlang(K J', μ_v), so in scaled time `Y = μ_v T` it is Gamma(s = K J') and
//! the map finishes iff `Y ≥ x = μ_v L_m / R_HM`.

use serde::Serialize;

use crate::domain::{ManaConfig, MobilityProfile};
use crate::error::{Error, Result};
use crate::numerics::{ln_gamma, reg_gamma, reg_lower_gamma, reg_upper_gamma};
use crate::queueing::{md1_sojourn, min_md1_rate, pk_sojourn};

/// `x = μ_v L_m / R_HM`; infinite when the HAP gives the slice no rate.
pub fn window_scale(cfg: &ManaConfig, mob: &MobilityProfile) -> f64 {
    if cfg.hap_rate > 0.0 {
        mob.erlang_rate * cfg.map_size / cfg.hap_rate
    } else {
        f64::INFINITY
    }
}

fn window_shape(blocks_before: u32, cfg: &ManaConfig, mob: &MobilityProfile) -> f64 {
    (mob.erlang_shape as u64 * blocks_before.min(cfg.cache_slots) as u64) as f64
}

/// (window blocks J', weight) pairs covering the whole route distribution.
///
/// All J with `J - 1 >= C_m` share the same window and are merged into one
/// entry carrying the tail mass.
fn window_weights(cfg: &ManaConfig, mob: &MobilityProfile) -> Vec<(u32, f64)> {
    let route = &mob.route;
    let c = cfg.cache_slots as usize;
    let head = c.min(route.max_blocks());
    let mut out: Vec<(u32, f64)> = (0..head).map(|jp| (jp as u32, route.prob(jp + 1))).collect();
    if c < route.max_blocks() {
        out.push((cfg.cache_slots, route.tail_mass(c)));
    }
    out
}

fn finish_prob(shape: f64, x: f64) -> Result<f64> {
    if shape == 0.0 || x.is_infinite() {
        return Ok(0.0);
    }
    reg_upper_gamma(shape, x)
}

/// Probability that a vehicle on its `blocks`-th block already holds the map.
pub fn block_accomplishment(blocks: u32, cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    if blocks == 0 {
        return Err(Error::invalid("block", "index starts at 1"));
    }
    finish_prob(window_shape(blocks - 1, cfg, mob), window_scale(cfg, mob))
}

/// Route-averaged accomplishment ratio P_acc.
pub fn accomplishment_ratio(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    let x = window_scale(cfg, mob);
    let mut total = 0.0;
    for (jp, w) in window_weights(cfg, mob) {
        if w > 0.0 {
            total += w * finish_prob(window_shape(jp, cfg, mob), x)?;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Lower and upper bounds on P_acc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccomplishmentBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Upper bound: every vehicle gets the full C_m-block window.
/// Lower bound: only vehicles with `J > C_m` count, at that same window.
pub fn accomplishment_bounds(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<AccomplishmentBounds> {
    let upper = upper_bound_at(cfg, mob, window_scale(cfg, mob))?;
    let lower = mob.route.tail_mass(cfg.cache_slots as usize) * upper;
    Ok(AccomplishmentBounds { lower, upper })
}

fn upper_bound_at(cfg: &ManaConfig, mob: &MobilityProfile, x: f64) -> Result<f64> {
    finish_prob(window_shape(cfg.cache_slots, cfg, mob), x)
}

/// Upper-bound accomplishment ratio as a function of the HAP rate alone.
pub fn upper_bound_at_rate(cfg: &ManaConfig, mob: &MobilityProfile, hap_rate: f64) -> Result<f64> {
    let cfg = ManaConfig { hap_rate, ..cfg.clone() };
    upper_bound_at(&cfg, mob, window_scale(&cfg, mob))
}

/// Published communication/cache matching point `L_m μ_v / (K C_m + 2)`.
///
/// The upper bound's curvature in R_HM actually flips at
/// [`inflection_hap_rate`], which sits `1/(K C_m + 1)` higher.
pub fn saddle_hap_rate(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    matching_rate(cfg, mob, 2.0)
}

/// Exact inflection of the upper bound in R_HM, `L_m μ_v / (K C_m + 1)`.
///
/// `dU/dR ∝ R^-(s+1) e^(-a/R)` with `a = L_m μ_v`, maximal at `R = a/(s+1)`.
pub fn inflection_hap_rate(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    matching_rate(cfg, mob, 1.0)
}

fn matching_rate(cfg: &ManaConfig, mob: &MobilityProfile, offset: f64) -> Result<f64> {
    if cfg.cache_slots == 0 {
        return Err(Error::invalid("cache_slots", "must be at least 1 for a saddle point to exist"));
    }
    let kc = (mob.erlang_shape as u64 * cfg.cache_slots as u64) as f64;
    Ok(cfg.map_size * mob.erlang_rate / (kc + offset))
}

/// E[L⁻] and E[(L⁻)²] for one window shape, in bits and bits².
fn remaining_moments_for(shape: f64, x: f64, size: f64) -> Result<(f64, f64)> {
    if shape == 0.0 || x.is_infinite() {
        return Ok((size, size * size));
    }
    // L⁻ = L (1 - Y/x)⁺ with Y ~ Gamma(s):
    // E[(1 - Y/x)⁺]   = (1 - s/x) P(s,x) + x^(s-1) e^-x / Γ(s)
    // E[((1 - Y/x)⁺)²] = P(s,x) - 2 (s/x) P(s+1,x) + s(s+1)/x² P(s+2,x)
    let p0 = reg_gamma(shape, x)?.p;
    let lone = ((shape - 1.0) * x.ln() - x - ln_gamma(shape)?).exp();
    let first = (1.0 - shape / x) * p0 + lone;
    let p1 = reg_lower_gamma(shape + 1.0, x)?;
    let p2 = reg_lower_gamma(shape + 2.0, x)?;
    let second = p0 - 2.0 * shape / x * p1 + shape * (shape + 1.0) / (x * x) * p2;
    Ok((
        (size * first).clamp(0.0, size),
        (size * size * second).clamp(0.0, size * size),
    ))
}

/// E[L_J⁻], the map bits still missing when the vehicle enters block `blocks`.
pub fn expected_remaining(blocks: u32, cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    if blocks == 0 {
        return Err(Error::invalid("block", "index starts at 1"));
    }
    let shape = window_shape(blocks - 1, cfg, mob);
    remaining_moments_for(shape, window_scale(cfg, mob), cfg.map_size).map(|m| m.0)
}

/// E[(L_J⁻)²] in bits².
pub fn remaining_second_moment(blocks: u32, cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    if blocks == 0 {
        return Err(Error::invalid("block", "index starts at 1"));
    }
    let shape = window_shape(blocks - 1, cfg, mob);
    remaining_moments_for(shape, window_scale(cfg, mob), cfg.map_size).map(|m| m.1)
}

/// Route-averaged E[L⁻] and E[(L⁻)²].
pub fn remaining_moments(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<(f64, f64)> {
    let x = window_scale(cfg, mob);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (jp, w) in window_weights(cfg, mob) {
        if w > 0.0 {
            let (a, b) = remaining_moments_for(window_shape(jp, cfg, mob), x, cfg.map_size)?;
            m1 += w * a;
            m2 += w * b;
        }
    }
    Ok((m1, m2))
}

/// Mean and second moment of the RSU service time, vehicles with a complete
/// map counting as zero-length jobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServiceMoments {
    pub mean: f64,
    pub second_moment: f64,
}

impl ServiceMoments {
    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean * self.mean).max(0.0)
    }
}

pub fn service_moments(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<ServiceMoments> {
    if cfg.rsu_rate <= 0.0 {
        return Err(Error::RsuRateRequired("map service time"));
    }
    let (m1, m2) = remaining_moments(cfg, mob)?;
    Ok(ServiceMoments {
        mean: m1 / cfg.rsu_rate,
        second_moment: m2 / (cfg.rsu_rate * cfg.rsu_rate),
    })
}

pub fn mean_service_time(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    service_moments(cfg, mob).map(|s| s.mean)
}

pub fn service_variance(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    service_moments(cfg, mob).map(|s| s.variance())
}

/// Mean RSU sojourn over all arriving vehicles (M/G/1).
pub fn mg1_delay(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    let s = service_moments(cfg, mob)?;
    pk_sojourn(mob.vehicle_arrival_rate, s.mean, s.second_moment, "map RSU")
}

/// Conservative delay: only vehicles without a complete map queue, each for a full map.
pub fn md1_delay_bound(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<f64> {
    let p_acc = accomplishment_ratio(cfg, mob)?;
    md1_delay_at(cfg, mob.vehicle_arrival_rate * (1.0 - p_acc))
}

fn md1_delay_at(cfg: &ManaConfig, thinned_arrival: f64) -> Result<f64> {
    if cfg.rsu_rate <= 0.0 {
        return Err(Error::RsuRateRequired("map service time"));
    }
    md1_sojourn(thinned_arrival, cfg.map_size / cfg.rsu_rate, "map RSU")
}

/// Smallest RSU rate meeting the delay target under the conservative model.
pub fn min_rsu_rate_mana(p_acc: f64, vehicle_arrival_rate: f64, delay_target: f64, map_size: f64) -> f64 {
    min_md1_rate(vehicle_arrival_rate * (1.0 - p_acc), map_size, delay_target)
}

/// Every closed-form map-slice metric for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManaAnalysis {
    pub x: f64,
    pub p_acc: f64,
    pub p_acc_lower: f64,
    pub p_acc_upper: f64,
    pub thinned_arrival: f64,
    /// Bits still missing at block entry, averaged over all vehicles.
    pub mean_remaining: f64,
    pub mean_service: Option<f64>,
    pub service_second_moment: Option<f64>,
    /// λ_v h̄, the M/G/1 utilization.
    pub utilization: Option<f64>,
    pub mg1_delay: Option<f64>,
    pub md1_delay: Option<f64>,
    pub min_rsu_rate: f64,
    pub saddle_hap_rate: Option<f64>,
}

impl ManaAnalysis {
    /// Delays are `None` when the RSU rate is zero or the queue is unstable.
    pub fn evaluate(cfg: &ManaConfig, mob: &MobilityProfile) -> Result<Self> {
        let x = window_scale(cfg, mob);
        let p_acc = accomplishment_ratio(cfg, mob)?;
        let bounds = accomplishment_bounds(cfg, mob)?;
        let thinned_arrival = mob.vehicle_arrival_rate * (1.0 - p_acc);
        let (mean_remaining, _) = remaining_moments(cfg, mob)?;
        let service = match service_moments(cfg, mob) {
            Ok(s) => Some(s),
            Err(e) if e.is_model_error() => None,
            Err(e) => return Err(e),
        };
        let optional = |r: Result<f64>| match r {
            Ok(v) => Ok(Some(v)),
            Err(e) if e.is_model_error() => Ok(None),
            Err(e) => Err(e),
        };
        let mg1_delay = match service {
            Some(s) => optional(pk_sojourn(mob.vehicle_arrival_rate, s.mean, s.second_moment, "map RSU"))?,
            None => None,
        };
        let md1_delay = optional(md1_delay_at(cfg, thinned_arrival))?;
        Ok(ManaAnalysis {
            x,
            p_acc,
            p_acc_lower: bounds.lower,
            p_acc_upper: bounds.upper,
            thinned_arrival,
            mean_remaining,
            mean_service: service.map(|s| s.mean),
            service_second_moment: service.map(|s| s.second_moment),
            utilization: service.map(|s| mob.vehicle_arrival_rate * s.mean),
            mg1_delay,
            md1_delay,
            min_rsu_rate: min_rsu_rate_mana(p_acc, mob.vehicle_arrival_rate, cfg.delay_target, cfg.map_size),
            saddle_hap_rate: saddle_hap_rate(cfg, mob).ok(),
        })
    }
}
