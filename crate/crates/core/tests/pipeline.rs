use agiven_core::foci::{hit_ratio, FociAnalysis};
use agiven_core::mana::ManaAnalysis;
use agiven_core::optimizer::{comparison_schemes, solve_p1, violated_constraints};
use agiven_core::presets::reference;
use agiven_core::scenario::SweepValue;
use agiven_core::{GridSpec, ResourceBudget, ScenarioFile};
use proptest::prelude::*;

#[test]
fn reference_scenario_analyzes_cleanly() {
    let s = reference().resolve().unwrap();
    let m = ManaAnalysis::evaluate(&s.mana, &s.mobility).unwrap();
    assert!(m.p_acc_lower <= m.p_acc && m.p_acc <= m.p_acc_upper);
    assert!(m.utilization.unwrap() < 1.0);
    assert!(m.md1_delay.unwrap() > 0.0 && m.mg1_delay.unwrap() > 0.0);
    let f = FociAnalysis::evaluate(&s.foci).unwrap();
    assert!(f.hit_ratio <= f.hit_ceiling);
    assert!(f.load.unwrap() < 1.0);
}

#[test]
fn generous_rsu_budget_makes_the_optimum_feasible() {
    let s = reference().resolve().unwrap();
    let demand = s.demand();
    let budget = ResourceBudget { rsu_total: 20e9, ..s.budget };
    let grid = GridSpec::compact();
    let best = solve_p1(&budget, &demand, &grid).unwrap();
    let sol = best.solution.unwrap();
    assert!(sol.feasible);
    assert!(violated_constraints(&sol, &demand, &budget).is_empty());
    for r in comparison_schemes(&budget, &demand, &grid).unwrap() {
        if let Some(other) = r.solution {
            assert!(sol.objective >= other.objective, "{:?}", r.scheme);
        }
    }
}

#[test]
fn overriding_a_key_changes_only_that_key() {
    let base = reference();
    let changed = base.with_override("foci.cache_slots", &SweepValue::Int(20)).unwrap();
    assert_eq!(changed.foci.cache_slots, 20);
    assert_eq!(changed.mana, base.mana);
    let s = changed.resolve().unwrap();
    let expected = hit_ratio(&s.foci.popularity, s.foci.expire_rate * s.foci.file_size / s.foci.hap_rate, 20).unwrap();
    assert_eq!(FociAnalysis::evaluate(&s.foci).unwrap().hit_ratio, expected);
}

proptest! {
    #[test]
    fn sweep_values_survive_display_and_parse(i in any::<i64>(), x in -1e12f64..1e12, mbps in 0.0f64..1e4) {
        prop_assert_eq!(SweepValue::parse(&SweepValue::Int(i).to_string()), SweepValue::Int(i));
        let back = SweepValue::parse(&SweepValue::Float(x).to_string());
        match back {
            SweepValue::Float(y) => prop_assert_eq!(y, x),
            SweepValue::Int(y) => prop_assert_eq!(y as f64, x),
            other => prop_assert!(false, "{other:?}"),
        }
        let text = SweepValue::Text(format!("{mbps} Mbps"));
        prop_assert_eq!(SweepValue::parse(&text.to_string()), text);
    }

    #[test]
    fn hap_rate_override_round_trips_through_toml(mbps in 0.0f64..1e3) {
        let file = reference().with_override("mana.hap_rate", &SweepValue::Float(mbps * 1e6)).unwrap();
        let again = ScenarioFile::from_toml_str(&file.to_toml_string().unwrap()).unwrap();
        prop_assert_eq!(again, file);
    }
}
