//! Seeded Monte Carlo checks of the closed forms.
//!
//! Each RSU is a single FIFO queue fed by Poisson arrivals. Map-slice
//! customers carry whatever part of the map the HAP window did not deliver;
//! file-slice customers are cache misses drawn against the current state of
//! the cache chain.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::domain::{FociConfig, ManaConfig, MobilityProfile};
use crate::error::{Error, Result};
use crate::foci::{cache_rho, hit_ratio};
use crate::mana::{accomplishment_ratio, mean_service_time};
use crate::numerics::erlang_sample;

/// Batches used for batch-means standard errors.
pub const BATCHES: usize = 20;

/// Deterministic generator for `(seed, stream_id)`; distinct ids give independent streams.
pub fn rng_stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimControl {
    pub seed: u64,
    /// Share of the run discarded before measuring, in [0, 1).
    pub warmup_fraction: f64,
    /// Measured vehicles (map slice) or events (file slice).
    pub horizon: u64,
    /// Run even when the analytic load is at or above one.
    pub allow_unstable: bool,
}

impl SimControl {
    pub fn new(seed: u64, horizon: u64) -> Self {
        SimControl { seed, warmup_fraction: 0.1, horizon, allow_unstable: false }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::invalid("warmup_fraction", "must lie in [0, 1)"));
        }
        Ok(())
    }

    fn warmup_count(&self) -> u64 {
        (self.horizon as f64 * self.warmup_fraction / (1.0 - self.warmup_fraction)).ceil() as u64
    }
}

/// A sample mean with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Mean of `values` and the standard error of the mean of [`BATCHES`] consecutive batches.
    pub fn batch_means(values: &[f64]) -> Option<Estimate> {
        if values.is_empty() {
            return None;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if values.len() < BATCHES {
            return Some(Estimate { mean, std_error: f64::NAN });
        }
        let size = values.len() / BATCHES;
        let batch: Vec<f64> = (0..BATCHES)
            .map(|b| {
                let end = if b + 1 == BATCHES { values.len() } else { (b + 1) * size };
                let chunk = &values[b * size..end];
                chunk.iter().sum::<f64>() / chunk.len() as f64
            })
            .collect();
        let bm = batch.iter().sum::<f64>() / BATCHES as f64;
        let var = batch.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        Some(Estimate { mean, std_error: (var / BATCHES as f64).sqrt() })
    }
}

/// Little's law on the measured window: time-average number in system
/// against arrival rate times mean sojourn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LittleCheck {
    pub mean_in_system: f64,
    pub arrival_rate: f64,
    pub mean_sojourn: f64,
}

impl LittleCheck {
    pub fn relative_gap(&self) -> f64 {
        let rhs = self.arrival_rate * self.mean_sojourn;
        if rhs == 0.0 {
            self.mean_in_system.abs()
        } else {
            (self.mean_in_system - rhs).abs() / rhs
        }
    }

    /// `arrivals` and `departures` in arrival order; the first `skip` are warm-up.
    fn measure(arrivals: &[f64], departures: &[f64], skip: usize) -> Option<LittleCheck> {
        let n = arrivals.len() - skip;
        if n < 2 {
            return None;
        }
        let (t0, t1) = (arrivals[skip], arrivals[arrivals.len() - 1]);
        if t1 <= t0 {
            return None;
        }
        let area: f64 = arrivals
            .iter()
            .zip(departures)
            .map(|(&a, &d)| (d.min(t1) - a.max(t0)).max(0.0))
            .sum();
        // Customers arriving in [t0, t1) and their full sojourns.
        let inside = &arrivals[skip..arrivals.len() - 1];
        let sojourn: f64 = inside
            .iter()
            .zip(&departures[skip..])
            .map(|(&a, &d)| d - a)
            .sum::<f64>()
            / inside.len() as f64;
        Some(LittleCheck {
            mean_in_system: area / (t1 - t0),
            arrival_rate: inside.len() as f64 / (t1 - t0),
            mean_sojourn: sojourn,
        })
    }
}

// FIFO single server fed in arrival order.
#[derive(Default)]
struct FifoQueue {
    last_departure: f64,
    busy: f64,
}

impl FifoQueue {
    fn serve(&mut self, arrival: f64, service: f64) -> f64 {
        let start = arrival.max(self.last_departure);
        self.last_departure = start + service;
        self.busy += service;
        self.last_departure
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManaSimReport {
    pub vehicles_simulated: u64,
    pub empirical_p_acc: Estimate,
    /// Mean sojourn over all vehicles, zero-length jobs included.
    pub empirical_mean_delay_all: Estimate,
    /// Mean sojourn over vehicles that needed RSU service.
    pub empirical_mean_delay_served: Option<Estimate>,
    /// Mean missing map bits at block entry.
    pub empirical_mean_remaining: Estimate,
    /// Mean of the squared missing bits.
    pub empirical_remaining_second_moment: f64,
    /// Server busy fraction over the measured window.
    pub utilization: f64,
    pub little: Option<LittleCheck>,
}

/// Stream ids used by [`simulate_mana`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManaStreams {
    pub arrivals: u64,
    pub mobility: u64,
}

impl Default for ManaStreams {
    fn default() -> Self {
        ManaStreams { arrivals: 0, mobility: 1 }
    }
}

pub fn simulate_mana(cfg: &ManaConfig, mob: &MobilityProfile, ctl: &SimControl) -> Result<ManaSimReport> {
    simulate_mana_with_streams(cfg, mob, ctl, ManaStreams::default())
}

pub fn simulate_mana_with_streams(
    cfg: &ManaConfig,
    mob: &MobilityProfile,
    ctl: &SimControl,
    streams: ManaStreams,
) -> Result<ManaSimReport> {
    ctl.validate()?;
    let h = mean_service_time(cfg, mob)?;
    let utilization = mob.vehicle_arrival_rate * h;
    if utilization >= 1.0 && !ctl.allow_unstable {
        return Err(Error::Unstable { queue: "map RSU", utilization });
    }
    let mut arrivals_rng = rng_stream(ctl.seed, streams.arrivals);
    let mut mobility_rng = rng_stream(ctl.seed, streams.mobility);
    let route = WeightedIndex::new(mob.route.probabilities())
        .map_err(|e| Error::invalid("route_probs", e.to_string()))?;

    let skip = ctl.warmup_count() as usize;
    let total = skip + ctl.horizon as usize;
    let mut arrivals = Vec::with_capacity(total);
    let mut departures = Vec::with_capacity(total);
    let mut done = Vec::with_capacity(ctl.horizon as usize);
    let mut remaining = Vec::with_capacity(ctl.horizon as usize);
    let mut sojourn = Vec::with_capacity(ctl.horizon as usize);
    let mut served = Vec::new();
    let mut queue = FifoQueue::default();
    let mut clock = 0.0;
    let mut busy_at_start = 0.0;
    for n in 0..total {
        let gap: f64 = Exp1.sample(&mut arrivals_rng);
        clock += gap / mob.vehicle_arrival_rate;
        let blocks = route.sample(&mut mobility_rng) as u32 + 1;
        let window_blocks = (blocks - 1).min(cfg.cache_slots);
        let window = if window_blocks == 0 {
            0.0
        } else {
            erlang_sample(mob.erlang_shape * window_blocks, mob.erlang_rate, &mut mobility_rng)
        };
        let left = (cfg.map_size - cfg.hap_rate * window).max(0.0);
        if n == skip {
            busy_at_start = queue.busy;
        }
        let departure = queue.serve(clock, left / cfg.rsu_rate);
        arrivals.push(clock);
        departures.push(departure);
        if n >= skip {
            done.push(if left == 0.0 { 1.0 } else { 0.0 });
            remaining.push(left);
            sojourn.push(departure - clock);
            if left > 0.0 {
                served.push(departure - clock);
            }
        }
    }
    let start = arrivals[skip];
    // Busy time of jobs arriving in the window, over the span they occupy.
    let span = (queue.last_departure - start).max(f64::MIN_POSITIVE);
    let second: f64 = remaining.iter().map(|r| r * r).sum::<f64>() / remaining.len() as f64;
    Ok(ManaSimReport {
        vehicles_simulated: ctl.horizon,
        empirical_p_acc: Estimate::batch_means(&done).expect("horizon >= 1"),
        empirical_mean_delay_all: Estimate::batch_means(&sojourn).expect("horizon >= 1"),
        empirical_mean_delay_served: Estimate::batch_means(&served),
        empirical_mean_remaining: Estimate::batch_means(&remaining).expect("horizon >= 1"),
        empirical_remaining_second_moment: second,
        utilization: (queue.busy - busy_at_start) / span,
        little: LittleCheck::measure(&arrivals, &departures, skip),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FociSimReport {
    pub events_simulated: u64,
    pub transitions: u64,
    pub requests: u64,
    /// Time-average share of each cache state 0..=C_p.
    pub empirical_occupancy: Vec<f64>,
    pub empirical_hit_ratio: Option<Estimate>,
    /// Mean RSU sojourn of cache misses.
    pub empirical_mean_delay: Option<Estimate>,
    pub little: Option<LittleCheck>,
}

/// Options for [`simulate_foci`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FociSimOptions {
    /// Death rate `i μ_p` in state `i` instead of `μ_p`. Not the analyzed model.
    pub per_file_expiry: bool,
}

pub fn simulate_foci(cfg: &FociConfig, ctl: &SimControl, opts: FociSimOptions) -> Result<FociSimReport> {
    ctl.validate()?;
    if cfg.request_rate > 0.0 {
        if cfg.rsu_rate <= 0.0 {
            return Err(Error::RsuRateRequired("file service time"));
        }
        let hit = hit_ratio(&cfg.popularity, cache_rho(cfg), cfg.cache_slots)?;
        let load = cfg.request_rate * (1.0 - hit) * cfg.file_size / cfg.rsu_rate;
        if load >= 1.0 && !ctl.allow_unstable {
            return Err(Error::Unstable { queue: "file RSU", utilization: load });
        }
    }
    let c = cfg.cache_slots as usize;
    let birth = cfg.hap_rate / cfg.file_size;
    let cum = cfg.popularity.cumulative(c);
    let mut events_rng = rng_stream(ctl.seed, 0);
    let mut hits_rng = rng_stream(ctl.seed, 1);

    let skip = ctl.warmup_count();
    let total = skip + ctl.horizon;
    let mut occupancy = vec![0.0; c + 1];
    let mut state = 0usize;
    let mut clock = 0.0;
    let (mut transitions, mut requests) = (0u64, 0u64);
    let mut hits = Vec::new();
    let mut arrivals = Vec::new();
    let mut departures = Vec::new();
    let mut sojourn = Vec::new();
    let mut first_measured_miss = None;
    let mut queue = FifoQueue::default();
    let service = cfg.file_size / cfg.rsu_rate;

    for n in 0..total {
        let up = if state < c { birth } else { 0.0 };
        let down = match (state, opts.per_file_expiry) {
            (0, _) => 0.0,
            (i, true) => i as f64 * cfg.expire_rate,
            (_, false) => cfg.expire_rate,
        };
        let rate = up + down + cfg.request_rate;
        if rate == 0.0 {
            // Frozen chain with no requests: it stays put forever.
            occupancy[state] = 1.0;
            break;
        }
        let e: f64 = Exp1.sample(&mut events_rng);
        let dt = e / rate;
        let measured = n >= skip;
        if measured {
            occupancy[state] += dt;
        }
        clock += dt;
        let u = events_rng.random::<f64>() * rate;
        if u < up {
            state += 1;
            transitions += measured as u64;
        } else if u < up + down {
            state -= 1;
            transitions += measured as u64;
        } else {
            let hit = hits_rng.random::<f64>() < cum[state];
            if measured {
                requests += 1;
                hits.push(hit as u8 as f64);
            }
            if !hit {
                if measured && first_measured_miss.is_none() {
                    first_measured_miss = Some(arrivals.len());
                }
                let d = queue.serve(clock, service);
                arrivals.push(clock);
                departures.push(d);
                if measured {
                    sojourn.push(d - clock);
                }
            }
        }
    }
    let total_time: f64 = occupancy.iter().sum();
    if total_time > 0.0 {
        for o in &mut occupancy {
            *o /= total_time;
        }
    }
    let little = first_measured_miss.and_then(|k| LittleCheck::measure(&arrivals, &departures, k));
    Ok(FociSimReport {
        events_simulated: ctl.horizon,
        transitions,
        requests,
        empirical_occupancy: occupancy,
        empirical_hit_ratio: Estimate::batch_means(&hits),
        empirical_mean_delay: Estimate::batch_means(&sojourn),
        little,
    })
}

/// Map-slice accomplishment ratio and its simulated counterpart side by side.
pub fn p_acc_gap(cfg: &ManaConfig, mob: &MobilityProfile, report: &ManaSimReport) -> Result<f64> {
    Ok((report.empirical_p_acc.mean - accomplishment_ratio(cfg, mob)?).abs())
}
