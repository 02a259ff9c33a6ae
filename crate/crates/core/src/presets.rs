//! Reference parameter set.

use crate::scenario::{BudgetSection, FociSection, ManaSection, MobilitySection, RunSection, ScenarioFile};
use crate::units::{BitRate, Bits, GIGA, MEGA};

/// Reference scenario: 5 Gb maps, 1 Gb files, Zipf(1000, 0.56) popularity,
/// 10 Gbps RSUs, a 200 Mbps HAP over 10 blocks and 200 Gb vehicle caches.
///
/// The RSU rates are chosen so both queues are stable (utilization about
/// 0.5); the file expiry rate of 1/900 s⁻¹ puts the hit-ratio knee near
/// 1.1 Mbps of HAP rate.
pub fn reference() -> ScenarioFile {
    ScenarioFile {
        mobility: MobilitySection {
            vehicle_arrival_rate: 1.2,
            erlang_shape: 5,
            erlang_rate: 0.2,
            continue_prob: Some(0.9),
            route_probs: None,
        },
        mana: ManaSection {
            map_size: Bits(5.0 * GIGA),
            cache_slots: 10,
            hap_rate: BitRate(20.0 * MEGA),
            rsu_rate: BitRate(10.0 * GIGA),
            delay_target: 1.0,
        },
        foci: FociSection {
            file_size: Bits(GIGA),
            cache_slots: 100,
            hap_rate: BitRate(2.0 * MEGA),
            rsu_rate: BitRate(5.0 * GIGA),
            expire_rate: 1.0 / 900.0,
            request_rate: 4.0,
            delay_target: 5.0,
            zipf_files: Some(1000),
            zipf_skew: Some(0.56),
            popularity: None,
        },
        budget: BudgetSection {
            rsu_total: BitRate(10.0 * GIGA),
            hap_total: BitRate(200.0 * MEGA),
            vehicle_cache: Bits(200.0 * GIGA),
            block_count: 10,
        },
        run: RunSection::default(),
        grid: None,
        sweep: None,
    }
}
