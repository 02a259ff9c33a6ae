//! Config file layer: raw TOML sections, unit suffixes, overrides, resolution
//! into validated model types.

use serde::{Deserialize, Serialize};

use crate::domain::{
    FociConfig, GeometricRoute, ManaConfig, MobilityProfile, Popularity, ResourceBudget, RouteDistribution,
};
use crate::error::{Error, Result};
use crate::foci::zipf;
use crate::optimizer::{count_range, float_range, Demand, GridSpec};
use crate::units::{de_count, BitRate, Bits};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilitySection {
    pub vehicle_arrival_rate: f64,
    #[serde(deserialize_with = "de_count")]
    pub erlang_shape: u32,
    pub erlang_rate: f64,
    /// ψ, probability of continuing to the next block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continue_prob: Option<f64>,
    /// Explicit G_1, G_2, ... instead of a geometric route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route_probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManaSection {
    pub map_size: Bits,
    #[serde(deserialize_with = "de_count")]
    pub cache_slots: u32,
    pub hap_rate: BitRate,
    pub rsu_rate: BitRate,
    pub delay_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FociSection {
    pub file_size: Bits,
    #[serde(deserialize_with = "de_count")]
    pub cache_slots: u32,
    pub hap_rate: BitRate,
    pub rsu_rate: BitRate,
    pub expire_rate: f64,
    pub request_rate: f64,
    pub delay_target: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zipf_files: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zipf_skew: Option<f64>,
    /// Explicit rank probabilities instead of Zipf.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popularity: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub rsu_total: BitRate,
    pub hap_total: BitRate,
    pub vehicle_cache: Bits,
    #[serde(deserialize_with = "de_count")]
    pub block_count: u32,
}

/// Simulation and reproducibility controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Measured vehicles per map-slice simulation.
    pub vehicles: u64,
    /// Measured events (chain transitions plus requests) per file-slice simulation.
    pub events: u64,
    pub warmup_fraction: f64,
    pub allow_unstable: bool,
    /// Off-model chain where each cached file expires on its own (death rate i μ_p).
    pub per_file_expiry: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: None,
            vehicles: 100_000,
            events: 1_000_000,
            warmup_fraction: 0.1,
            allow_unstable: false,
            per_file_expiry: false,
        }
    }
}

/// Axis written either as a list or as an inclusive `start/stop/step` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis<T> {
    List(Vec<T>),
    Range { start: T, stop: T, step: T },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_m: Option<Axis<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_hm: Option<Axis<BitRate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_p: Option<Axis<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_hp: Option<Axis<BitRate>>,
}

impl GridSection {
    /// Overrides the matching axes of `base`.
    pub fn apply(&self, base: GridSpec) -> Result<GridSpec> {
        fn counts(a: &Axis<u32>) -> Result<Vec<u32>> {
            match a {
                Axis::List(v) => Ok(v.clone()),
                Axis::Range { start, stop, step } => count_range(*start, *stop, *step),
            }
        }
        fn rates(a: &Axis<BitRate>) -> Result<Vec<f64>> {
            match a {
                Axis::List(v) => Ok(v.iter().map(|r| r.get()).collect()),
                Axis::Range { start, stop, step } => float_range(start.get(), stop.get(), step.get()),
            }
        }
        let grid = GridSpec {
            c_m_values: self.c_m.as_ref().map(counts).transpose()?.unwrap_or(base.c_m_values),
            r_hm_values: self.r_hm.as_ref().map(rates).transpose()?.unwrap_or(base.r_hm_values),
            c_p_values: self.c_p.as_ref().map(counts).transpose()?.unwrap_or(base.c_p_values),
            r_hp_values: self.r_hp.as_ref().map(rates).transpose()?.unwrap_or(base.r_hp_values),
        };
        grid.validate().map_err(|e| e.in_section("grid"))?;
        Ok(grid)
    }
}

/// A sweep value as written: number or suffixed string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl SweepValue {
    /// Reads `"20 Mbps"`, `"3"`, `"0.5"` the way a TOML value would be read.
    pub fn parse(text: &str) -> SweepValue {
        let t = text.trim();
        if let Ok(i) = t.parse::<i64>() {
            SweepValue::Int(i)
        } else if let Ok(f) = t.parse::<f64>() {
            SweepValue::Float(f)
        } else {
            SweepValue::Text(t.to_string())
        }
    }

    fn to_toml(&self) -> toml::Value {
        match self {
            SweepValue::Int(i) => toml::Value::Integer(*i),
            SweepValue::Float(f) => toml::Value::Float(*f),
            SweepValue::Text(s) => toml::Value::String(s.clone()),
        }
    }
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Int(i) => write!(f, "{i}"),
            SweepValue::Float(x) => write!(f, "{x}"),
            SweepValue::Text(s) => f.write_str(s),
        }
    }
}

fn split_suffix(v: &SweepValue) -> Result<(f64, String)> {
    match v {
        SweepValue::Int(i) => Ok((*i as f64, String::new())),
        SweepValue::Float(f) => Ok((*f, String::new())),
        SweepValue::Text(t) => {
            let t = t.trim();
            let at = t
                .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
                .unwrap_or(t.len());
            let (num, suffix) = t.split_at(at);
            let x = num
                .trim()
                .parse()
                .map_err(|_| Error::invalid("sweep range", format!("cannot read a number from {t:?}")))?;
            Ok((x, suffix.trim().to_string()))
        }
    }
}

/// Inclusive `start, start + step, ..., stop`, keeping a shared unit suffix.
pub fn sweep_range(start: &SweepValue, stop: &SweepValue, step: &SweepValue) -> Result<Vec<SweepValue>> {
    let (a, sa) = split_suffix(start)?;
    let (b, sb) = split_suffix(stop)?;
    let (h, sh) = split_suffix(step)?;
    if sa != sb || sa != sh {
        return Err(Error::invalid("sweep range", "start, stop and step must share one unit"));
    }
    let all_int = [start, stop, step].iter().all(|v| matches!(v, SweepValue::Int(_)));
    Ok(float_range(a, b, h)?
        .into_iter()
        .map(|x| {
            if all_int {
                SweepValue::Int(x.round() as i64)
            } else if sa.is_empty() {
                SweepValue::Float(x)
            } else {
                SweepValue::Text(format!("{x} {sa}"))
            }
        })
        .collect())
}

/// One swept key, e.g. `mana.hap_rate`, with a value list or a
/// `[start, stop, step]` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub key: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<SweepValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[SweepValue; 3]>,
}

impl SweepAxis {
    pub fn expanded(&self) -> Result<Vec<SweepValue>> {
        match (&self.range, self.values.is_empty()) {
            (None, false) => Ok(self.values.clone()),
            (Some([a, b, h]), true) => sweep_range(a, b, h),
            _ => Err(Error::invalid(
                format!("sweep.{}", self.key),
                "needs exactly one of values and range",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Mode evaluated at each sweep point: analyze, simulate or optimize.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub of: Option<String>,
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
}

/// A whole config file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub mobility: MobilitySection,
    pub mana: ManaSection,
    pub foci: FociSection,
    pub budget: BudgetSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Validated inputs for every mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mobility: MobilityProfile,
    pub mana: ManaConfig,
    pub foci: FociConfig,
    pub budget: ResourceBudget,
    pub grid: GridSpec,
    pub run: RunSection,
}

impl Scenario {
    pub fn demand(&self) -> Demand {
        Demand {
            mobility: self.mobility.clone(),
            mana: self.mana.clone(),
            foci: self.foci.clone(),
        }
    }
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid("config", e.message().to_string()).with_span(text, e.span()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid("config", e.to_string()))
    }

    /// Returns a copy with the dotted `key` (for example `mana.hap_rate`) replaced.
    pub fn with_override(&self, key: &str, value: &SweepValue) -> Result<Self> {
        let mut root = toml::Value::try_from(self).map_err(|e| Error::invalid("config", e.to_string()))?;
        let parts: Vec<&str> = key.split('.').collect();
        let (last, path) = parts.split_last().ok_or_else(|| Error::invalid("sweep key", "is empty"))?;
        let mut node = &mut root;
        for part in path {
            node = node
                .as_table_mut()
                .and_then(|t| t.get_mut(*part))
                .ok_or_else(|| Error::invalid(key, "does not name a config section"))?;
        }
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::invalid(key, "does not name a config field"))?;
        table.insert(last.to_string(), value.to_toml());
        // Switching route or popularity form must drop the other one.
        match (path, *last) {
            (["mobility"], "continue_prob") => {
                table.remove("route_probs");
            }
            (["mobility"], "route_probs") => {
                table.remove("continue_prob");
            }
            (["foci"], "popularity") => {
                table.remove("zipf_files");
                table.remove("zipf_skew");
            }
            _ => {}
        }
        root.try_into()
            .map_err(|e: toml::de::Error| Error::invalid(key, format!("cannot take value {value}: {}", e.message())))
    }

    pub fn resolve(&self) -> Result<Scenario> {
        let m = &self.mobility;
        let route = match (m.continue_prob, &m.route_probs) {
            (Some(psi), None) => GeometricRoute::new(psi).and_then(RouteDistribution::geometric),
            (None, Some(p)) => RouteDistribution::from_probabilities(p.clone()),
            _ => Err(Error::invalid("continue_prob", "exactly one of continue_prob and route_probs must be set")),
        }
        .map_err(|e| e.in_section("mobility"))?;
        let mobility = MobilityProfile {
            vehicle_arrival_rate: m.vehicle_arrival_rate,
            erlang_shape: m.erlang_shape,
            erlang_rate: m.erlang_rate,
            route,
        };
        mobility.validate().map_err(|e| e.in_section("mobility"))?;

        let mana = ManaConfig {
            map_size: self.mana.map_size.get(),
            cache_slots: self.mana.cache_slots,
            hap_rate: self.mana.hap_rate.get(),
            rsu_rate: self.mana.rsu_rate.get(),
            delay_target: self.mana.delay_target,
        };
        mana.validate().map_err(|e| e.in_section("mana"))?;

        let f = &self.foci;
        let popularity = match (&f.popularity, f.zipf_files, f.zipf_skew) {
            (Some(p), None, None) => Popularity::new(p.clone()),
            (None, Some(n), Some(skew)) => zipf(n as usize, skew),
            _ => Err(Error::invalid("popularity", "set either popularity or both zipf_files and zipf_skew")),
        }
        .map_err(|e| e.in_section("foci"))?;
        let foci = FociConfig {
            file_size: f.file_size.get(),
            cache_slots: f.cache_slots,
            hap_rate: f.hap_rate.get(),
            rsu_rate: f.rsu_rate.get(),
            expire_rate: f.expire_rate,
            request_rate: f.request_rate,
            popularity,
            delay_target: f.delay_target,
        };
        foci.validate().map_err(|e| e.in_section("foci"))?;

        let budget = ResourceBudget {
            rsu_total: self.budget.rsu_total.get(),
            hap_total: self.budget.hap_total.get(),
            vehicle_cache: self.budget.vehicle_cache.get(),
            block_count: self.budget.block_count,
        };
        budget.validate().map_err(|e| e.in_section("budget"))?;

        let grid = match &self.grid {
            Some(g) => g.apply(GridSpec::standard())?,
            None => GridSpec::standard(),
        };

        let run = self.run.clone();
        if !(0.0..1.0).contains(&run.warmup_fraction) {
            return Err(Error::invalid("run.warmup_fraction", "must lie in [0, 1)"));
        }
        if run.vehicles == 0 || run.events == 0 {
            return Err(Error::invalid("run", "vehicles and events must be at least 1"));
        }
        Ok(Scenario { mobility, mana, foci, budget, grid, run })
    }
}
