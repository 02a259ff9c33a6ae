//! Row producers for the analyze, simulate and optimize modes.
//!
//! Column lists are fixed per mode so that sweep output keeps one schema
//! even when some points fail.

use agiven_core::foci::{cache_rho, cache_steady_state, FociAnalysis};
use agiven_core::mana::ManaAnalysis;
use agiven_core::optimizer::{comparison_schemes, violated_constraints, Regime};
use agiven_core::sim::{simulate_foci, simulate_mana, Estimate, FociSimOptions, SimControl};
use agiven_core::{Result, Scenario};

use crate::table::Cell;

pub const ANALYZE_COLUMNS: &[&str] = &[
    "x",
    "p_acc",
    "p_acc_lower",
    "p_acc_upper",
    "mana_thinned_arrival",
    "mean_remaining",
    "mean_service",
    "service_second_moment",
    "mana_utilization",
    "mg1_delay",
    "md1_delay",
    "mana_min_rsu_rate",
    "saddle_hap_rate",
    "rho",
    "p_hit",
    "hit_ceiling",
    "foci_thinned_arrival",
    "cache_utilization",
    "foci_load",
    "foci_delay",
    "foci_min_rsu_rate",
];

pub fn analyze(s: &Scenario) -> Result<Vec<Vec<Cell>>> {
    let m = ManaAnalysis::evaluate(&s.mana, &s.mobility)?;
    let f = FociAnalysis::evaluate(&s.foci)?;
    Ok(vec![vec![
        m.x.into(),
        m.p_acc.into(),
        m.p_acc_lower.into(),
        m.p_acc_upper.into(),
        m.thinned_arrival.into(),
        m.mean_remaining.into(),
        m.mean_service.into(),
        m.service_second_moment.into(),
        m.utilization.into(),
        m.mg1_delay.into(),
        m.md1_delay.into(),
        m.min_rsu_rate.into(),
        m.saddle_hap_rate.into(),
        f.rho.into(),
        f.hit_ratio.into(),
        f.hit_ceiling.into(),
        f.thinned_arrival.into(),
        f.cache_utilization.into(),
        f.load.into(),
        f.mean_delay.into(),
        f.min_rsu_rate.into(),
    ]])
}

pub const SIMULATE_COLUMNS: &[&str] = &[
    "seed",
    "vehicles",
    "events",
    "p_acc",
    "p_acc_sim",
    "p_acc_se",
    "mg1_delay",
    "delay_all_sim",
    "delay_all_se",
    "md1_delay",
    "delay_served_sim",
    "delay_served_se",
    "mean_remaining",
    "mean_remaining_sim",
    "mean_remaining_se",
    "mana_utilization",
    "mana_utilization_sim",
    "mana_little_gap",
    "p_hit",
    "p_hit_sim",
    "p_hit_se",
    "foci_delay",
    "foci_delay_sim",
    "foci_delay_se",
    "foci_little_gap",
    "occupancy_tv",
    "per_file_expiry",
];

fn est(e: Option<Estimate>) -> [Cell; 2] {
    match e {
        Some(e) => [e.mean.into(), e.std_error.into()],
        None => [Cell::Empty, Cell::Empty],
    }
}

pub fn simulate(s: &Scenario, seed: u64) -> Result<Vec<Vec<Cell>>> {
    let ctl = |horizon| SimControl {
        seed,
        warmup_fraction: s.run.warmup_fraction,
        horizon,
        allow_unstable: s.run.allow_unstable,
    };
    let opts = FociSimOptions { per_file_expiry: s.run.per_file_expiry };
    let (mana_sim, foci_sim) = rayon::join(
        || simulate_mana(&s.mana, &s.mobility, &ctl(s.run.vehicles)),
        || simulate_foci(&s.foci, &ctl(s.run.events), opts),
    );
    let (ms, fs) = (mana_sim?, foci_sim?);
    let m = ManaAnalysis::evaluate(&s.mana, &s.mobility)?;
    let f = FociAnalysis::evaluate(&s.foci)?;
    let steady = cache_steady_state(cache_rho(&s.foci), s.foci.cache_slots)?;
    let tv = steady.iter().zip(&fs.empirical_occupancy).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;

    let mut row: Vec<Cell> = vec![seed.into(), s.run.vehicles.into(), s.run.events.into(), m.p_acc.into()];
    row.extend(est(Some(ms.empirical_p_acc)));
    row.push(m.mg1_delay.into());
    row.extend(est(Some(ms.empirical_mean_delay_all)));
    row.push(m.md1_delay.into());
    row.extend(est(ms.empirical_mean_delay_served));
    row.push(m.mean_remaining.into());
    row.extend(est(Some(ms.empirical_mean_remaining)));
    row.push(m.utilization.into());
    row.push(ms.utilization.into());
    row.push(ms.little.map(|l| l.relative_gap()).into());
    row.push(f.hit_ratio.into());
    row.extend(est(fs.empirical_hit_ratio));
    row.push(f.mean_delay.into());
    row.extend(est(fs.empirical_mean_delay));
    row.push(fs.little.map(|l| l.relative_gap()).into());
    row.push(tv.into());
    row.push(s.run.per_file_expiry.into());
    Ok(vec![row])
}

pub const OPTIMIZE_COLUMNS: &[&str] = &[
    "scheme",
    "feasible",
    "regime",
    "objective",
    "c_m",
    "r_hm",
    "r_rm",
    "c_p",
    "r_hp",
    "r_rp",
    "p_acc",
    "p_hit",
    "mana_delay",
    "mana_mg1_delay",
    "foci_delay",
    "rsu_used",
    "rsu_saving",
    "violated",
];

pub fn optimize(s: &Scenario) -> Result<Vec<Vec<Cell>>> {
    let demand = s.demand();
    let results = comparison_schemes(&s.budget, &demand, &s.grid)?;
    Ok(results
        .iter()
        .map(|r| {
            let mut row: Vec<Cell> = vec![r.scheme.name().into(), r.feasible().into()];
            match &r.solution {
                Some(sol) => {
                    row.extend([
                        Regime::of(sol).name().into(),
                        sol.objective.into(),
                        sol.mana.cache_slots.into(),
                        sol.mana.hap_rate.into(),
                        sol.mana.rsu_rate.into(),
                        sol.foci.cache_slots.into(),
                        sol.foci.hap_rate.into(),
                        sol.foci.rsu_rate.into(),
                        sol.p_acc.into(),
                        sol.p_hit.into(),
                        sol.mana_delay.into(),
                        sol.mana_mg1_delay.into(),
                        sol.foci_delay.into(),
                        r.rsu_used().into(),
                        r.rsu_saving.into(),
                        violated_constraints(sol, &demand, &s.budget).join("; ").into(),
                    ]);
                }
                None => row.extend((2..OPTIMIZE_COLUMNS.len()).map(|_| Cell::Empty)),
            }
            row
        })
        .collect())
}
