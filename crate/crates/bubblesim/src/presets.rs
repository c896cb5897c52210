//! Named ready-to-run scenarios.
//!
//! All presets share the stock population: 10 agents, 1000 rounds, 1000 cash
//! each, a uniform 0..=10 share endowment, and an initial price of 100.
//! Asymmetric panic pricing is what turns a bubble into a crash, so every
//! preset except `fig6-crash` pins the panic band to the symmetric 1%.

use crate::agents::Band;
use crate::sim::{ParamSpec, ScenarioConfig, Shock};
use crate::agents::{RiskCurve, RiskModel};

/// Names accepted by `--preset`, with a one-line description each.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "fig1-linear",
        "exogenous linear risk: a clean symmetric rise-and-fall bubble",
    ),
    (
        "fig1-arctan",
        "exogenous arctan risk: same bubble with a steeper turn",
    ),
    (
        "fig2-efficiency",
        "homogeneous endogenous agents: prices hug the fundamental value",
    ),
    (
        "fig3-shock",
        "efficiency scenario with the fundamental dropped to 75 at round 250",
    ),
    (
        "fig4-bubble-nocrash",
        "heterogeneous risk thresholds, symmetric panic pricing: bubble without a crash",
    ),
    (
        "fig5-alpha-sweep",
        "homogeneous base scenario for sweeping the fool factor (alpha)",
    ),
    (
        "fig6-crash",
        "heterogeneous thresholds, asymmetric panic pricing, heavier slope weight: bubble and crash",
    ),
];

/// Expand a preset name into its full configuration. `None` for unknown names.
pub fn expand(name: &str) -> Option<ScenarioConfig> {
    let mut config = ScenarioConfig::default();
    match name {
        "fig1-linear" => {
            config.model = RiskModel::Exogenous {
                curve: RiskCurve::Linear,
            };
        }
        "fig1-arctan" => {
            config.model = RiskModel::Exogenous {
                curve: RiskCurve::Arctan { steepness: 10.0 },
            };
        }
        "fig2-efficiency" => {
            config.panic_band = Some(Band::new(-0.01, 0.01));
        }
        "fig3-shock" => {
            config.shocks = vec![Shock {
                round: 250,
                new_fundamental: 75.0,
            }];
            config.panic_band = Some(Band::new(-0.01, 0.01));
        }
        "fig4-bubble-nocrash" => {
            config.params.risk_threshold = ParamSpec::Uniform(0.4, 0.8);
            // The crash needs asymmetric panic pricing; keep it symmetric here.
            config.panic_band = Some(Band::new(-0.01, 0.01));
        }
        "fig5-alpha-sweep" => {
            config.panic_band = Some(Band::new(-0.01, 0.01));
        }
        "fig6-crash" => {
            config.params.risk_threshold = ParamSpec::Uniform(0.4, 0.8);
            config.params.slope_weight = ParamSpec::Fixed(-5.0);
            config.panic_band = Some(Band::new(-0.05, 0.0));
        }
        _ => return None,
    }
    Some(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_str, to_config_string};

    #[test]
    fn every_preset_expands_to_a_valid_config() {
        for (name, _) in PRESETS {
            let config = expand(name).unwrap_or_else(|| panic!("preset {name} missing"));
            config.validate().unwrap_or_else(|e| panic!("preset {name}: {e}"));
        }
    }

    #[test]
    fn every_preset_round_trips_through_the_config_format() {
        for (name, _) in PRESETS {
            let config = expand(name).unwrap();
            let text = to_config_string(&config);
            let reparsed = parse_str(&text).unwrap_or_else(|e| panic!("preset {name}: {e}"));
            assert_eq!(reparsed, config, "preset {name} did not round-trip");
        }
    }

    #[test]
    fn unknown_preset_is_none() {
        assert!(expand("nosuch").is_none());
        assert!(expand("").is_none());
    }

    #[test]
    fn preset_specifics() {
        assert!(matches!(
            expand("fig1-linear").unwrap().model,
            RiskModel::Exogenous {
                curve: RiskCurve::Linear
            }
        ));
        let fig3 = expand("fig3-shock").unwrap();
        assert_eq!(fig3.shocks.len(), 1);
        assert_eq!(fig3.shocks[0].round, 250);
        assert_eq!(fig3.shocks[0].new_fundamental, 75.0);
        let fig6 = expand("fig6-crash").unwrap();
        assert_eq!(fig6.params.slope_weight, ParamSpec::Fixed(-5.0));
        assert_eq!(fig6.panic_band, Some(Band::new(-0.05, 0.0)));
        let fig4 = expand("fig4-bubble-nocrash").unwrap();
        assert_eq!(fig4.panic_band, Some(Band::new(-0.01, 0.01)));
        assert_eq!(fig4.params.risk_threshold, ParamSpec::Uniform(0.4, 0.8));
    }
}
