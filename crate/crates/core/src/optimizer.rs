//! Exhaustive search over push resources for the slicing problem.
//!
//! For a fixed point `(C_m, R_HM, C_p, R_HP)` the smallest RSU rates meeting
//! both delay targets are closed form, so only the four push variables are
//! gridded. The search maximizes the RSU rate left over after both slices.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{
    FociAllocation, FociConfig, ManaAllocation, ManaConfig, MobilityProfile, ResourceBudget, SlicingSolution,
};
use crate::error::{Error, Result};
use crate::foci::{cache_rho, foci_delay, hit_ratio, min_rsu_rate_foci};
use crate::mana::{accomplishment_ratio, md1_delay_bound, mg1_delay, min_rsu_rate_mana};
use crate::units::MEGA;

/// Candidate values for each push variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub c_m_values: Vec<u32>,
    pub r_hm_values: Vec<f64>,
    pub c_p_values: Vec<u32>,
    pub r_hp_values: Vec<f64>,
}

/// `start, start + step, ...` up to `stop` inclusive (with a small slack for rounding).
pub fn float_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop >= start) {
        return Err(Error::invalid("range", format!("needs step > 0 and stop >= start (got {start}:{stop}:{step})")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

pub fn count_range(start: u32, stop: u32, step: u32) -> Result<Vec<u32>> {
    if step == 0 || stop < start {
        return Err(Error::invalid("range", format!("needs step > 0 and stop >= start (got {start}:{stop}:{step})")));
    }
    Ok((start..=stop).step_by(step as usize).collect())
}

impl GridSpec {
    /// Default search grid.
    ///
    /// `C_m` reaches 40 maps (a full 200 Gb cache of 5 Gb maps) and `R_HM`
    /// reaches 20 Mbps (200 Mbps over 10 blocks), so every budget in the
    /// standard sweep can be spent on either slice.
    pub fn standard() -> Self {
        GridSpec {
            c_m_values: (0..=40).collect(),
            r_hm_values: (0..=40).map(|k| k as f64 * 0.5 * MEGA).collect(),
            c_p_values: (0..=20).map(|k| k * 10).collect(),
            r_hp_values: (0..=50).map(|k| k as f64 * 0.1 * MEGA).collect(),
        }
    }

    /// Smaller grid: `C_m` in 0..=15 and `R_HM` in 0..=10 Mbps.
    pub fn compact() -> Self {
        GridSpec {
            c_m_values: (0..=15).collect(),
            r_hm_values: (0..=20).map(|k| k as f64 * 0.5 * MEGA).collect(),
            ..Self::standard()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check<T: PartialOrd + Copy + std::fmt::Debug>(name: &str, v: &[T], zero: T) -> Result<()> {
            if v.is_empty() {
                return Err(Error::invalid(name, "must not be empty"));
            }
            if v[0] < zero {
                return Err(Error::invalid(name, "must be non-negative"));
            }
            if let Some(w) = v.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
                return Err(Error::invalid(name, format!("must be strictly increasing ({:?} then {:?})", w[0], w[1])));
            }
            Ok(())
        }
        check("c_m_values", &self.c_m_values, 0)?;
        check("r_hm_values", &self.r_hm_values, 0.0)?;
        check("c_p_values", &self.c_p_values, 0)?;
        check("r_hp_values", &self.r_hp_values, 0.0)?;
        if self.r_hm_values.iter().chain(&self.r_hp_values).any(|r| !r.is_finite()) {
            return Err(Error::invalid("grid", "rates must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.c_m_values.len() * self.r_hm_values.len() * self.c_p_values.len() * self.r_hp_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::standard()
    }
}

/// Traffic, mobility and QoS targets. The allocation fields of `mana` and
/// `foci` (cache slots, HAP and RSU rates) are ignored by the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    pub mobility: MobilityProfile,
    pub mana: ManaConfig,
    pub foci: FociConfig,
}

/// One assignment of the push variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PushPoint {
    pub c_m: u32,
    pub r_hm: f64,
    pub c_p: u32,
    pub r_hp: f64,
}

impl PushPoint {
    pub const NONE: PushPoint = PushPoint { c_m: 0, r_hm: 0.0, c_p: 0, r_hp: 0.0 };

    pub fn hap_used(&self, budget: &ResourceBudget) -> f64 {
        budget.block_count as f64 * self.r_hm + self.r_hp
    }

    pub fn cache_used(&self, demand: &Demand) -> f64 {
        demand.mana.map_size * self.c_m as f64 + demand.foci.file_size * self.c_p as f64
    }
}

/// Minimal RSU rates for a point, with the push effectiveness behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsuDemand {
    pub mana_rate: f64,
    pub foci_rate: f64,
    pub p_acc: f64,
    pub p_hit: f64,
}

impl RsuDemand {
    pub fn total(&self) -> f64 {
        self.mana_rate + self.foci_rate
    }
}

/// Why a point cannot be used.
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    CacheBudget { used: f64, available: f64 },
    HapBudget { used: f64, available: f64 },
    RsuBudget { demand: RsuDemand, available: f64 },
    Model(Error),
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Infeasibility::CacheBudget { used, available } => {
                write!(f, "vehicle cache exceeded: {used} bits needed, {available} available")
            }
            Infeasibility::HapBudget { used, available } => {
                write!(f, "HAP rate exceeded: {used} bit/s needed, {available} available")
            }
            Infeasibility::RsuBudget { demand, available } => {
                write!(f, "RSU rate exceeded: {} bit/s needed, {available} available", demand.total())
            }
            Infeasibility::Model(e) => write!(f, "{e}"),
        }
    }
}

fn mana_rate(demand: &Demand, c_m: u32, r_hm: f64) -> Result<(f64, f64)> {
    let cfg = ManaConfig { cache_slots: c_m, hap_rate: r_hm, ..demand.mana.clone() };
    let p_acc = accomplishment_ratio(&cfg, &demand.mobility)?;
    let rate = min_rsu_rate_mana(p_acc, demand.mobility.vehicle_arrival_rate, cfg.delay_target, cfg.map_size);
    Ok((p_acc, rate))
}

fn foci_rate(demand: &Demand, c_p: u32, r_hp: f64) -> Result<(f64, f64)> {
    let cfg = FociConfig { cache_slots: c_p, hap_rate: r_hp, ..demand.foci.clone() };
    let p_hit = hit_ratio(&cfg.popularity, cache_rho(&cfg), c_p)?;
    let rate = min_rsu_rate_foci(p_hit, cfg.request_rate, cfg.delay_target, cfg.file_size);
    Ok((p_hit, rate))
}

fn push_limits(point: &PushPoint, demand: &Demand, budget: &ResourceBudget) -> std::result::Result<(), Infeasibility> {
    let cache = point.cache_used(demand);
    if cache > budget.vehicle_cache {
        return Err(Infeasibility::CacheBudget { used: cache, available: budget.vehicle_cache });
    }
    let hap = point.hap_used(budget);
    if hap > budget.hap_total {
        return Err(Infeasibility::HapBudget { used: hap, available: budget.hap_total });
    }
    Ok(())
}

/// Smallest RSU rates meeting both delay targets at `point`, or why the point is unusable.
pub fn min_total_rsu(
    point: &PushPoint,
    demand: &Demand,
    budget: &ResourceBudget,
) -> std::result::Result<RsuDemand, Infeasibility> {
    let d = rsu_demand(point, demand, budget)?;
    if d.total() > budget.rsu_total {
        return Err(Infeasibility::RsuBudget { demand: d, available: budget.rsu_total });
    }
    Ok(d)
}

/// Like [`min_total_rsu`] but without the RSU budget check.
pub fn rsu_demand(
    point: &PushPoint,
    demand: &Demand,
    budget: &ResourceBudget,
) -> std::result::Result<RsuDemand, Infeasibility> {
    push_limits(point, demand, budget)?;
    let (p_acc, mana_rate) = mana_rate(demand, point.c_m, point.r_hm).map_err(Infeasibility::Model)?;
    let (p_hit, foci_rate) = foci_rate(demand, point.c_p, point.r_hp).map_err(Infeasibility::Model)?;
    Ok(RsuDemand { mana_rate, foci_rate, p_acc, p_hit })
}

/// Builds the solution record for a point and its minimal rates.
pub fn solution_at(point: &PushPoint, rates: &RsuDemand, demand: &Demand, budget: &ResourceBudget) -> SlicingSolution {
    let mana = ManaConfig {
        cache_slots: point.c_m,
        hap_rate: point.r_hm,
        rsu_rate: rates.mana_rate,
        ..demand.mana.clone()
    };
    let lam_p = demand.foci.request_rate * (1.0 - rates.p_hit);
    let mana_delay = md1_delay_bound(&mana, &demand.mobility).unwrap_or(f64::INFINITY);
    let foci_delay = foci_delay(lam_p, demand.foci.file_size, rates.foci_rate).unwrap_or(f64::INFINITY);
    let objective = budget.rsu_total - rates.total();
    SlicingSolution {
        mana: ManaAllocation { cache_slots: point.c_m, hap_rate: point.r_hm, rsu_rate: rates.mana_rate },
        foci: FociAllocation { cache_slots: point.c_p, hap_rate: point.r_hp, rsu_rate: rates.foci_rate },
        objective,
        p_acc: rates.p_acc,
        p_hit: rates.p_hit,
        mana_delay,
        mana_mg1_delay: mg1_delay(&mana, &demand.mobility).ok(),
        foci_delay,
        feasible: objective >= 0.0,
    }
}

/// Comparison baselines and the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Optimal,
    FairRatio,
    ManaOnly,
    FociOnly,
    NoPush,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Optimal, Scheme::FairRatio, Scheme::ManaOnly, Scheme::FociOnly, Scheme::NoPush];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Optimal => "optimal",
            Scheme::FairRatio => "fair_ratio",
            Scheme::ManaOnly => "mana_only",
            Scheme::FociOnly => "foci_only",
            Scheme::NoPush => "no_push",
        }
    }
}

/// Outcome of one scheme. `solution` is `None` when no grid point satisfies
/// the cache and HAP budgets; a present solution may still exceed the RSU
/// budget, in which case its `feasible` flag is false.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub solution: Option<SlicingSolution>,
    /// `1 - (R_RM + R_RP) / (R_RM + R_RP without pushing)`.
    pub rsu_saving: Option<f64>,
}

impl SchemeResult {
    pub fn feasible(&self) -> bool {
        self.solution.is_some_and(|s| s.feasible)
    }

    pub fn rsu_used(&self) -> Option<f64> {
        self.solution.map(|s| s.mana.rsu_rate + s.foci.rsu_rate)
    }
}

/// Which slices receive push resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NoPush,
    ManaOnly,
    FociOnly,
    Shared,
}

impl Regime {
    pub fn of(solution: &SlicingSolution) -> Regime {
        let mana = solution.mana.cache_slots > 0 && solution.mana.hap_rate > 0.0;
        let foci = solution.foci.cache_slots > 0 && solution.foci.hap_rate > 0.0;
        match (mana, foci) {
            (false, false) => Regime::NoPush,
            (true, false) => Regime::ManaOnly,
            (false, true) => Regime::FociOnly,
            (true, true) => Regime::Shared,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::NoPush => "no_push",
            Regime::ManaOnly => "mana_only",
            Regime::FociOnly => "foci_only",
            Regime::Shared => "shared",
        }
    }
}

// Per-slice rate tables, indexed [cache][rate].
struct SliceTable {
    values: Vec<Vec<(f64, f64)>>,
}

fn mana_table(demand: &Demand, caches: &[u32], rates: &[f64]) -> Result<SliceTable> {
    let values = caches
        .par_iter()
        .map(|&c| rates.iter().map(|&r| mana_rate(demand, c, r)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(SliceTable { values })
}

fn foci_table(demand: &Demand, caches: &[u32], rates: &[f64]) -> Result<SliceTable> {
    let values = caches
        .par_iter()
        .map(|&c| rates.iter().map(|&r| foci_rate(demand, c, r)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(SliceTable { values })
}

#[derive(Clone, Copy)]
struct Candidate {
    objective: f64,
    push_rate: f64,
    cache: f64,
    index: [usize; 4],
}

// Greater is better; the grid index makes this a total order.
fn better(a: &Candidate, b: &Candidate) -> Ordering {
    a.objective
        .total_cmp(&b.objective)
        .then_with(|| b.push_rate.total_cmp(&a.push_rate))
        .then_with(|| b.cache.total_cmp(&a.cache))
        .then_with(|| b.index.cmp(&a.index))
}

fn best_of(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if better(&x, &y) == Ordering::Less { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Searches `grid` for the point leaving the most RSU rate for best-effort traffic.
fn search(demand: &Demand, budget: &ResourceBudget, grid: &GridSpec) -> Result<Option<(PushPoint, RsuDemand)>> {
    grid.validate()?;
    let mana = mana_table(demand, &grid.c_m_values, &grid.r_hm_values)?;
    let foci = foci_table(demand, &grid.c_p_values, &grid.r_hp_values)?;
    let n_blocks = budget.block_count as f64;
    let (lm, lp) = (demand.mana.map_size, demand.foci.file_size);
    let best = (0..grid.c_m_values.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Option<Candidate> = None;
            let cm = grid.c_m_values[i];
            for (j, &rhm) in grid.r_hm_values.iter().enumerate() {
                for (k, &cp) in grid.c_p_values.iter().enumerate() {
                    let cache = lm * cm as f64 + lp * cp as f64;
                    if cache > budget.vehicle_cache {
                        break;
                    }
                    for (l, &rhp) in grid.r_hp_values.iter().enumerate() {
                        let push_rate = n_blocks * rhm + rhp;
                        if push_rate > budget.hap_total {
                            break;
                        }
                        let total = mana.values[i][j].1 + foci.values[k][l].1;
                        let cand = Candidate {
                            objective: budget.rsu_total - total,
                            push_rate,
                            cache,
                            index: [i, j, k, l],
                        };
                        best = best_of(best, Some(cand));
                    }
                }
            }
            best
        })
        .reduce(|| None, best_of);
    Ok(best.map(|c| {
        let [i, j, k, l] = c.index;
        let point = PushPoint {
            c_m: grid.c_m_values[i],
            r_hm: grid.r_hm_values[j],
            c_p: grid.c_p_values[k],
            r_hp: grid.r_hp_values[l],
        };
        let (p_acc, mana_rate) = mana.values[i][j];
        let (p_hit, foci_rate) = foci.values[k][l];
        (point, RsuDemand { mana_rate, foci_rate, p_acc, p_hit })
    }))
}

fn no_push_total(demand: &Demand) -> Result<f64> {
    let (_, m) = mana_rate(demand, 0, 0.0)?;
    let (_, f) = foci_rate(demand, 0, 0.0)?;
    Ok(m + f)
}

fn scheme_result(
    scheme: Scheme,
    found: Option<(PushPoint, RsuDemand)>,
    demand: &Demand,
    budget: &ResourceBudget,
    baseline: f64,
) -> SchemeResult {
    let solution = found.map(|(p, r)| solution_at(&p, &r, demand, budget));
    let rsu_saving = found.map(|(_, r)| 1.0 - r.total() / baseline);
    SchemeResult { scheme, solution, rsu_saving }
}

/// Optimal slicing over the grid.
pub fn solve_p1(budget: &ResourceBudget, demand: &Demand, grid: &GridSpec) -> Result<SchemeResult> {
    let baseline = no_push_total(demand)?;
    let found = search(demand, budget, grid)?;
    Ok(scheme_result(Scheme::Optimal, found, demand, budget, baseline))
}

/// Share of push resources given to the map slice by the fair-ratio scheme:
/// its fraction of the offered RSU bit load.
pub fn fair_ratio_weight(demand: &Demand) -> f64 {
    let m = demand.mobility.vehicle_arrival_rate * demand.mana.map_size;
    let f = demand.foci.request_rate * demand.foci.file_size;
    if m + f == 0.0 {
        0.5
    } else {
        m / (m + f)
    }
}

fn restricted(grid: &GridSpec, mana: bool, foci: bool) -> GridSpec {
    GridSpec {
        c_m_values: if mana { grid.c_m_values.clone() } else { vec![0] },
        r_hm_values: if mana { grid.r_hm_values.clone() } else { vec![0.0] },
        c_p_values: if foci { grid.c_p_values.clone() } else { vec![0] },
        r_hp_values: if foci { grid.r_hp_values.clone() } else { vec![0.0] },
    }
}

fn fair_ratio(demand: &Demand, budget: &ResourceBudget, grid: &GridSpec) -> Result<Option<(PushPoint, RsuDemand)>> {
    let w = fair_ratio_weight(demand);
    let mana_budget = ResourceBudget {
        vehicle_cache: w * budget.vehicle_cache,
        hap_total: w * budget.hap_total,
        ..*budget
    };
    let foci_budget = ResourceBudget {
        vehicle_cache: (1.0 - w) * budget.vehicle_cache,
        hap_total: (1.0 - w) * budget.hap_total,
        ..*budget
    };
    let m = search(demand, &mana_budget, &restricted(grid, true, false))?;
    let f = search(demand, &foci_budget, &restricted(grid, false, true))?;
    Ok(match (m, f) {
        (Some((pm, rm)), Some((pf, rf))) => Some((
            PushPoint { c_m: pm.c_m, r_hm: pm.r_hm, c_p: pf.c_p, r_hp: pf.r_hp },
            RsuDemand { mana_rate: rm.mana_rate, foci_rate: rf.foci_rate, p_acc: rm.p_acc, p_hit: rf.p_hit },
        )),
        _ => None,
    })
}

/// All five schemes in the order of [`Scheme::ALL`].
pub fn comparison_schemes(budget: &ResourceBudget, demand: &Demand, grid: &GridSpec) -> Result<Vec<SchemeResult>> {
    let baseline = no_push_total(demand)?;
    let mut out = Vec::with_capacity(5);
    for scheme in Scheme::ALL {
        let found = match scheme {
            Scheme::Optimal => search(demand, budget, grid)?,
            Scheme::FairRatio => fair_ratio(demand, budget, grid)?,
            Scheme::ManaOnly => search(demand, budget, &restricted(grid, true, false))?,
            Scheme::FociOnly => search(demand, budget, &restricted(grid, false, true))?,
            Scheme::NoPush => {
                let p = PushPoint::NONE;
                rsu_demand(&p, demand, budget).ok().map(|r| (p, r))
            }
        };
        out.push(scheme_result(scheme, found, demand, budget, baseline));
    }
    Ok(out)
}

/// Constraints of a solution that fail when re-evaluated from scratch.
///
/// Delays are recomputed from the allocation through the analytic delay
/// formulas rather than taken from the solution record.
pub fn violated_constraints(solution: &SlicingSolution, demand: &Demand, budget: &ResourceBudget) -> Vec<String> {
    const REL: f64 = 1e-9;
    let mut out = Vec::new();
    let mana = ManaConfig {
        cache_slots: solution.mana.cache_slots,
        hap_rate: solution.mana.hap_rate,
        rsu_rate: solution.mana.rsu_rate,
        ..demand.mana.clone()
    };
    let foci = FociConfig {
        cache_slots: solution.foci.cache_slots,
        hap_rate: solution.foci.hap_rate,
        rsu_rate: solution.foci.rsu_rate,
        ..demand.foci.clone()
    };
    match md1_delay_bound(&mana, &demand.mobility) {
        Ok(w) if w <= mana.delay_target * (1.0 + REL) => {}
        Ok(w) => out.push(format!("map delay {w} exceeds target {}", mana.delay_target)),
        Err(e) => out.push(format!("map delay: {e}")),
    }
    let hit = hit_ratio(&foci.popularity, cache_rho(&foci), foci.cache_slots);
    match hit.and_then(|h| foci_delay(foci.request_rate * (1.0 - h), foci.file_size, foci.rsu_rate)) {
        Ok(w) if w <= foci.delay_target * (1.0 + REL) => {}
        Ok(w) => out.push(format!("file delay {w} exceeds target {}", foci.delay_target)),
        Err(e) => out.push(format!("file delay: {e}")),
    }
    let cache = demand.mana.map_size * mana.cache_slots as f64 + demand.foci.file_size * foci.cache_slots as f64;
    if cache > budget.vehicle_cache {
        out.push(format!("cache {cache} exceeds {}", budget.vehicle_cache));
    }
    let hap = budget.block_count as f64 * mana.hap_rate + foci.hap_rate;
    if hap > budget.hap_total * (1.0 + REL) {
        out.push(format!("HAP rate {hap} exceeds {}", budget.hap_total));
    }
    let rsu = mana.rsu_rate + foci.rsu_rate;
    if rsu > budget.rsu_total {
        out.push(format!("RSU rate {rsu} exceeds {}", budget.rsu_total));
    }
    out
}
