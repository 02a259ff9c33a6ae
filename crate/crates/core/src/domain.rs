//! Validated model inputs shared by every other module.
//!
//! All quantities are canonical: sizes in bits, rates in bits/second, times
//! in seconds. Construct values through the file layer in [`crate::scenario`]
//! or directly and call `validate()`; analytic functions assume validated
//! inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Routes are cut at the first block count whose remaining tail mass is below this.
pub const ROUTE_TAIL_CUTOFF: f64 = 1e-9;
/// Tolerance on the normalization of a user-supplied route distribution.
pub const ROUTE_SUM_TOL: f64 = 1e-9;
/// Tolerance on the normalization of a popularity profile.
pub const POPULARITY_SUM_TOL: f64 = 1e-12;

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive (got {v})")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be non-negative (got {v})")))
    }
}

/// Route length with a fixed per-block continuation probability ψ:
/// `G_J = (1-ψ) ψ^(J-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricRoute {
    pub continue_prob: f64,
}

impl GeometricRoute {
    pub fn new(continue_prob: f64) -> Result<Self> {
        if !(continue_prob > 0.0 && continue_prob < 1.0) {
            return Err(Error::invalid(
                "continue_prob",
                format!("must lie strictly between 0 and 1 (got {continue_prob})"),
            ));
        }
        Ok(GeometricRoute { continue_prob })
    }

    /// Untruncated probability of a route of exactly `blocks` blocks.
    pub fn prob(&self, blocks: usize) -> f64 {
        if blocks == 0 {
            return 0.0;
        }
        (1.0 - self.continue_prob) * self.continue_prob.powi(blocks as i32 - 1)
    }

    pub fn mean_length(&self) -> f64 {
        1.0 / (1.0 - self.continue_prob)
    }
}

/// Distribution of the block index J a vehicle is passing, truncated and renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteDistribution {
    // probs[j - 1] = G_j
    probs: Vec<f64>,
}

impl RouteDistribution {
    pub fn geometric(route: GeometricRoute) -> Result<Self> {
        let route = GeometricRoute::new(route.continue_prob)?;
        // Tail beyond J_max is ψ^J_max.
        let psi = route.continue_prob;
        let mut j_max = (ROUTE_TAIL_CUTOFF.ln() / psi.ln()).floor().max(1.0) as usize;
        while psi.powi(j_max as i32) >= ROUTE_TAIL_CUTOFF {
            j_max += 1;
        }
        while j_max > 1 && psi.powi(j_max as i32 - 1) < ROUTE_TAIL_CUTOFF {
            j_max -= 1;
        }
        let probs = (1..=j_max).map(|j| route.prob(j)).collect();
        Ok(Self::normalized(probs))
    }

    pub fn from_probabilities(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("route_probs", "must contain at least one block"));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(
                "route_probs",
                format!("entry {} must be a non-negative probability (got {p})", i + 1),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > ROUTE_SUM_TOL {
            return Err(Error::invalid(
                "route_probs",
                format!("probabilities must sum to 1 (got {total})"),
            ));
        }
        let mut tail = 0.0;
        let mut j_max = probs.len();
        // Smallest J_max whose tail mass stays below the cutoff.
        for j in (1..probs.len()).rev() {
            tail += probs[j];
            if tail >= ROUTE_TAIL_CUTOFF {
                break;
            }
            j_max = j;
        }
        Ok(Self::normalized(probs[..j_max].to_vec()))
    }

    fn normalized(mut probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        RouteDistribution { probs }
    }

    /// G_J for `blocks >= 1`; zero beyond the truncation point.
    pub fn prob(&self, blocks: usize) -> f64 {
        if blocks == 0 {
            return 0.0;
        }
        self.probs.get(blocks - 1).copied().unwrap_or(0.0)
    }

    /// Σ_{J > blocks} G_J.
    pub fn tail_mass(&self, blocks: usize) -> f64 {
        self.probs.iter().skip(blocks).sum()
    }

    pub fn max_blocks(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }
}

/// Vehicle arrivals, block dwell times and route lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityProfile {
    /// λ_v, vehicles/second entering each block.
    pub vehicle_arrival_rate: f64,
    /// K, Erlang shape of the per-block dwell time.
    pub erlang_shape: u32,
    /// μ_v, Erlang rate of the per-block dwell time (1/second).
    pub erlang_rate: f64,
    pub route: RouteDistribution,
}

impl MobilityProfile {
    pub fn validate(&self) -> Result<()> {
        positive("vehicle_arrival_rate", self.vehicle_arrival_rate)?;
        if self.erlang_shape == 0 {
            return Err(Error::invalid("erlang_shape", "must be at least 1"));
        }
        positive("erlang_rate", self.erlang_rate)?;
        let total: f64 = self.route.probabilities().iter().sum();
        if (total - 1.0).abs() > ROUTE_SUM_TOL {
            return Err(Error::invalid("route_probs", format!("probabilities must sum to 1 (got {total})")));
        }
        Ok(())
    }

    /// Mean dwell time per block, K / μ_v.
    pub fn mean_dwell(&self) -> f64 {
        self.erlang_shape as f64 / self.erlang_rate
    }
}

/// Map (location-based) slice resources and demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ManaConfig {
    /// L_m, bits per block map.
    pub map_size: f64,
    /// C_m, maps the vehicle cache can hold.
    pub cache_slots: u32,
    /// R_HM, HAP broadcast rate per block map.
    pub hap_rate: f64,
    /// R_RM, RSU unicast rate for the slice.
    pub rsu_rate: f64,
    /// T̂_m, mean download delay target (seconds).
    pub delay_target: f64,
}

impl ManaConfig {
    pub fn validate(&self) -> Result<()> {
        positive("map_size", self.map_size)?;
        non_negative("hap_rate", self.hap_rate)?;
        non_negative("rsu_rate", self.rsu_rate)?;
        positive("delay_target", self.delay_target)
    }
}

/// Request probabilities over file ranks 1..=F, most popular first.
#[derive(Debug, Clone, PartialEq)]
pub struct Popularity {
    probs: Vec<f64>,
}

impl Popularity {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("popularity", "must contain at least one file"));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::invalid(
                "popularity",
                format!("entry {} must be a non-negative probability (got {p})", i + 1),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > POPULARITY_SUM_TOL {
            return Err(Error::invalid("popularity", format!("probabilities must sum to 1 (got {total})")));
        }
        if let Some(i) = probs.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::invalid(
                "popularity",
                format!("probabilities must be non-increasing in rank (rank {} < rank {})", i + 1, i + 2),
            ));
        }
        Ok(Popularity { probs })
    }

    /// Skips validation for weights normalized by construction.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        Popularity { probs }
    }

    pub fn files(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Σ_{f <= n} p_f, the hit probability when the top `n` files are cached.
    pub fn top_mass(&self, n: usize) -> f64 {
        self.probs.iter().take(n).sum()
    }

    /// Cumulative masses `[0, p_1, p_1 + p_2, ...]` up to `n` files.
    pub fn cumulative(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for p in self.probs.iter().take(n) {
            acc += p;
            out.push(acc);
        }
        out
    }
}

/// Popular-content slice resources and demand.
#[derive(Debug, Clone, PartialEq)]
pub struct FociConfig {
    /// L_p, bits per file.
    pub file_size: f64,
    /// C_p, files the vehicle cache can hold.
    pub cache_slots: u32,
    /// R_HP, HAP broadcast rate for new popular files.
    pub hap_rate: f64,
    /// R_RP, RSU unicast rate for the slice.
    pub rsu_rate: f64,
    /// μ_p, file expiration rate (1/second).
    pub expire_rate: f64,
    /// λ_p, requests/second per RSU.
    pub request_rate: f64,
    pub popularity: Popularity,
    /// T̂_p, mean download delay target (seconds).
    pub delay_target: f64,
}

impl FociConfig {
    pub fn validate(&self) -> Result<()> {
        positive("file_size", self.file_size)?;
        non_negative("hap_rate", self.hap_rate)?;
        non_negative("rsu_rate", self.rsu_rate)?;
        positive("expire_rate", self.expire_rate)?;
        non_negative("request_rate", self.request_rate)?;
        positive("delay_target", self.delay_target)?;
        if self.cache_slots as usize > self.popularity.files() {
            return Err(Error::invalid(
                "cache_slots",
                format!(
                    "cannot exceed the number of popular files ({} > {})",
                    self.cache_slots,
                    self.popularity.files()
                ),
            ));
        }
        Ok(())
    }
}

/// Shared resources of one HAP cell and its RSUs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceBudget {
    /// R_R, RSU unicast rate.
    pub rsu_total: f64,
    /// R_H, HAP broadcast rate of the cell.
    pub hap_total: f64,
    /// L_v, vehicle cache in bits.
    pub vehicle_cache: f64,
    /// N_block, blocks covered by the HAP cell.
    pub block_count: u32,
}

impl ResourceBudget {
    pub fn validate(&self) -> Result<()> {
        positive("rsu_total", self.rsu_total)?;
        non_negative("hap_total", self.hap_total)?;
        non_negative("vehicle_cache", self.vehicle_cache)?;
        if self.block_count == 0 {
            return Err(Error::invalid("block_count", "must be at least 1"));
        }
        Ok(())
    }
}

/// Resources assigned to the map slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManaAllocation {
    pub cache_slots: u32,
    pub hap_rate: f64,
    pub rsu_rate: f64,
}

/// Resources assigned to the popular-content slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FociAllocation {
    pub cache_slots: u32,
    pub hap_rate: f64,
    pub rsu_rate: f64,
}

/// One allocation of HAP rate, RSU rate and vehicle cache across both slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicingSolution {
    pub mana: ManaAllocation,
    pub foci: FociAllocation,
    /// R_R - R_RM - R_RP, the rate left for on-demand traffic.
    pub objective: f64,
    pub p_acc: f64,
    pub p_hit: f64,
    /// Conservative (M/D/1) map delay at the chosen RSU rate.
    pub mana_delay: f64,
    /// M/G/1 map delay at the chosen RSU rate, for information.
    pub mana_mg1_delay: Option<f64>,
    pub foci_delay: f64,
    pub feasible: bool,
}
