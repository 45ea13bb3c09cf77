//! MQ-9 style gas sampling for CO, LPG and methane.
//!
//! Each source contributes `c0 / (1 + (r / r0)^2)` to its species at range
//! `r`; contributions of the same species add.

use serde::{Deserialize, Serialize};

pub const CO_ALARM_PPM: f64 = 200.0;
pub const LPG_ALARM_PPM: f64 = 1000.0;
pub const CH4_ALARM_PPM: f64 = 5000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GasSpecies {
    #[serde(rename = "CO")]
    Co,
    #[serde(rename = "LPG")]
    Lpg,
    #[serde(rename = "CH4")]
    Ch4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasSource {
    pub species: GasSpecies,
    pub position: [f64; 2],
    pub c0_ppm: f64,
    pub r0_m: f64,
}

impl GasSource {
    pub fn concentration_at(&self, x_m: f64, y_m: f64) -> f64 {
        let r = (x_m - self.position[0]).hypot(y_m - self.position[1]);
        let q = r / self.r0_m;
        self.c0_ppm / (1.0 + q * q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GasReading {
    pub co_ppm: f64,
    pub lpg_ppm: f64,
    pub ch4_ppm: f64,
    pub alarm: bool,
}

impl GasReading {
    pub fn new(co_ppm: f64, lpg_ppm: f64, ch4_ppm: f64) -> Self {
        let alarm = co_ppm >= CO_ALARM_PPM || lpg_ppm >= LPG_ALARM_PPM || ch4_ppm >= CH4_ALARM_PPM;
        Self { co_ppm, lpg_ppm, ch4_ppm, alarm }
    }
}

pub fn gas_sense(position: (f64, f64), sources: &[GasSource]) -> GasReading {
    let (mut co, mut lpg, mut ch4) = (0.0, 0.0, 0.0);
    for s in sources {
        let c = s.concentration_at(position.0, position.1);
        match s.species {
            GasSpecies::Co => co += c,
            GasSpecies::Lpg => lpg += c,
            GasSpecies::Ch4 => ch4 += c,
        }
    }
    GasReading::new(co, lpg, ch4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn src(species: GasSpecies, x: f64, y: f64, c0: f64, r0: f64) -> GasSource {
        GasSource { species, position: [x, y], c0_ppm: c0, r0_m: r0 }
    }

    #[test]
    fn empty_air() {
        assert_eq!(gas_sense((1.0, 2.0), &[]), GasReading { co_ppm: 0.0, lpg_ppm: 0.0, ch4_ppm: 0.0, alarm: false });
    }

    #[test]
    fn co_at_half_falloff_hits_threshold() {
        let r = gas_sense((2.0, 0.0), &[src(GasSpecies::Co, 0.0, 0.0, 400.0, 2.0)]);
        assert_eq!(r.co_ppm, 200.0);
        assert!(r.alarm);
    }

    #[test]
    fn weak_methane_never_alarms() {
        let s = [src(GasSpecies::Ch4, 0.0, 0.0, 400.0, 2.0)];
        for d in [0.0, 0.1, 1.0, 5.0] {
            let r = gas_sense((d, 0.0), &s);
            assert!(r.ch4_ppm <= 400.0);
            assert!(!r.alarm);
        }
    }

    fn any_source() -> impl Strategy<Value = GasSource> {
        (0usize..3, -10.0f64..10.0, -10.0f64..10.0, 1.0f64..8000.0, 0.1f64..5.0).prop_map(|(k, x, y, c0, r0)| {
            let species = [GasSpecies::Co, GasSpecies::Lpg, GasSpecies::Ch4][k];
            src(species, x, y, c0, r0)
        })
    }

    proptest! {
        #[test]
        fn additive_and_order_free(sources in prop::collection::vec(any_source(), 0..8), x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let all = gas_sense((x, y), &sources);
            let mut rev = sources.clone();
            rev.reverse();
            let r = gas_sense((x, y), &rev);
            prop_assert!((all.co_ppm - r.co_ppm).abs() <= 1e-9 * all.co_ppm.max(1.0));
            prop_assert!((all.lpg_ppm - r.lpg_ppm).abs() <= 1e-9 * all.lpg_ppm.max(1.0));
            prop_assert!((all.ch4_ppm - r.ch4_ppm).abs() <= 1e-9 * all.ch4_ppm.max(1.0));

            let mid = sources.len() / 2;
            let a = gas_sense((x, y), &sources[..mid]);
            let b = gas_sense((x, y), &sources[mid..]);
            prop_assert!((all.co_ppm - (a.co_ppm + b.co_ppm)).abs() <= 1e-9 * all.co_ppm.max(1.0));
        }

        #[test]
        fn alarm_matches_thresholds(sources in prop::collection::vec(any_source(), 0..8), x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let r = gas_sense((x, y), &sources);
            prop_assert_eq!(r.alarm, r.co_ppm >= 200.0 || r.lpg_ppm >= 1000.0 || r.ch4_ppm >= 5000.0);
        }
    }
}
