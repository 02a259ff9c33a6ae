//! Benchmark inputs shared by the criterion targets.

use agiven_core::presets::reference;
use agiven_core::Scenario;

/// Reference scenario with the compact search grid, so one solve stays in the millisecond range.
pub fn bench_scenario() -> Scenario {
    let mut s = reference().resolve().expect("reference scenario resolves");
    s.grid = agiven_core::GridSpec::compact();
    s
}

#[cfg(test)]
mod tests {
    #[test]
    fn scenario_uses_compact_grid() {
        assert_eq!(super::bench_scenario().grid, agiven_core::GridSpec::compact());
    }
}
