//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! extends = fig_d            # optional: start from a builtin scenario
//! name = fig_d_tight
//! plant = crane              # crane | degenerate_pendubot | coupled | pendulum
//! plant.M = 1.0
//! plant.m = 0.8
//! plant.L = 0.305
//! plant.g = 9.8
//! plant.x_d = 2.0
//! plant.k = -1               # coupled only
//! plant.base = degenerate    # coupled only: degenerate | crane
//! controller = ahssmc        # open_loop | ihssmc | ahssmc | linear
//! controller.c1 = 0.8        # ihssmc: c1 c2 c3 eta k; ahssmc: c1 c2 alpha1 alpha2 eta k
//! controller.boundary_layer = 0
//! controller.input = sin     # open_loop: zero | sin | cos | const:<v>
//! controller.gain = 1.3, 1.9, 7.3, -2.2    # linear, explicit K
//! controller.poles = -3, -2.8, -2.6, -2.4  # linear, Ackermann on the crane
//! controller.x_d = 2.0       # defaults to plant.x_d
//! y0 = 0, 0, 0, 0
//! rtol = 1e-3
//! atol = 1e-4
//! h_init = 1e-3
//! h_min = 1e-12
//! h_max = 1e-2
//! t_end = 10
//! diverge_norm = 1e3
//! metrics = final_error, divergence_time
//! ```
//!
//! Keys are case-sensitive; unknown keys are errors. Later assignments
//! override earlier ones.

use std::collections::BTreeMap;

use super::scenario::{builtin, ControllerSpec, CoupledBase, InputProfile, PlantSpec, Scenario};
use crate::control::{AhssmcParams, IhssmcParams, LinearGain};
use crate::error::{Error, Result};
use crate::plant::{CraneParams, StateVector};
use crate::poly::C64;

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| cfg_err(format!("line {line}: `{key}` expects a number, got `{v}`"))),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| cfg_err(format!("line {line}: `{key}` expects a comma-separated list"))),
        }
    }

    fn set(&mut self, key: &str, target: &mut f64) -> Result<()> {
        if let Some(v) = self.number(key)? {
            *target = v;
        }
        Ok(())
    }
}

fn four(v: Vec<f64>, key: &str) -> Result<[f64; 4]> {
    v.try_into().map_err(|_| cfg_err(format!("`{key}` needs exactly four values")))
}

fn plant_x_d(plant: &PlantSpec) -> f64 {
    match plant {
        PlantSpec::Crane(p) | PlantSpec::Pendulum(p) => p.x_d,
        _ => 0.0,
    }
}

/// Parses a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| cfg_err(format!("line {}: expected `key = value`", i + 1)))?;
        map.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    let mut e = Entries { map };

    let mut s = match e.take("extends") {
        Some((line, name)) => {
            builtin(&name).ok_or_else(|| cfg_err(format!("line {line}: unknown builtin `{name}`")))?
        }
        None => Scenario::new(
            "custom",
            PlantSpec::Crane(CraneParams::default()),
            ControllerSpec::Ihssmc(IhssmcParams::default()),
        ),
    };
    if let Some((_, name)) = e.take("name") {
        if name.is_empty() {
            return Err(cfg_err("scenario name must not be empty"));
        }
        s.name = name;
    }

    // Plant.
    let plant_kind = e.take("plant").map(|(_, v)| v);
    let mut crane = match s.plant {
        PlantSpec::Crane(p) | PlantSpec::Pendulum(p) => p,
        PlantSpec::CoupledPair { base: CoupledBase::Crane(p), .. } => p,
        _ => CraneParams::default(),
    };
    e.set("plant.M", &mut crane.cart_mass)?;
    e.set("plant.m", &mut crane.payload_mass)?;
    e.set("plant.L", &mut crane.rope_length)?;
    e.set("plant.g", &mut crane.gravity)?;
    e.set("plant.x_d", &mut crane.x_d)?;
    let (mut k, mut base) = match s.plant {
        PlantSpec::CoupledPair { k, base } => (k, base),
        _ => (-1.0, CoupledBase::Degenerate),
    };
    e.set("plant.k", &mut k)?;
    if let Some((line, b)) = e.take("plant.base") {
        base = match b.as_str() {
            "degenerate" => CoupledBase::Degenerate,
            "crane" => CoupledBase::Crane(crane),
            _ => return Err(cfg_err(format!("line {line}: unknown coupled base `{b}`"))),
        };
    } else if let CoupledBase::Crane(_) = base {
        base = CoupledBase::Crane(crane);
    }
    let kind = plant_kind.unwrap_or_else(|| s.plant.name().to_string());
    s.plant = match kind.as_str() {
        "crane" => PlantSpec::Crane(crane),
        "pendulum" => PlantSpec::Pendulum(crane),
        "degenerate_pendubot" => PlantSpec::DegeneratePendubot,
        "coupled" => PlantSpec::CoupledPair { k, base },
        other => return Err(cfg_err(format!("unknown plant `{other}`"))),
    };

    // Controller.
    let ctrl_kind = e.take("controller").map(|(_, v)| v);
    let explicit_x_d = e.number("controller.x_d")?;
    let x_d = explicit_x_d.unwrap_or_else(|| plant_x_d(&s.plant));
    let kind = ctrl_kind.unwrap_or_else(|| s.controller.name().to_string());
    s.controller = match kind.as_str() {
        "open_loop" => {
            let profile = match e.take("controller.input") {
                Some((_, v)) => v.parse::<InputProfile>()?,
                None => match &s.controller {
                    ControllerSpec::OpenLoop(p) => *p,
                    _ => InputProfile::Zero,
                },
            };
            ControllerSpec::OpenLoop(profile)
        }
        "ihssmc" => {
            let mut p = match &s.controller {
                ControllerSpec::Ihssmc(p) => *p,
                _ => IhssmcParams::default(),
            };
            e.set("controller.c1", &mut p.c1)?;
            e.set("controller.c2", &mut p.c2)?;
            e.set("controller.c3", &mut p.c3)?;
            e.set("controller.eta", &mut p.eta)?;
            e.set("controller.k", &mut p.k)?;
            e.set("controller.boundary_layer", &mut p.boundary_layer)?;
            p.x_d = x_d;
            ControllerSpec::Ihssmc(p)
        }
        "ahssmc" => {
            let mut p = match &s.controller {
                ControllerSpec::Ahssmc(p) => *p,
                _ => AhssmcParams::default(),
            };
            e.set("controller.c1", &mut p.c1)?;
            e.set("controller.c2", &mut p.c2)?;
            e.set("controller.alpha1", &mut p.alpha1)?;
            e.set("controller.alpha2", &mut p.alpha2)?;
            e.set("controller.eta", &mut p.eta)?;
            e.set("controller.k", &mut p.k)?;
            e.set("controller.boundary_layer", &mut p.boundary_layer)?;
            p.x_d = x_d;
            ControllerSpec::Ahssmc(p)
        }
        "linear" => {
            let gain = e.list("controller.gain")?;
            let poles = e.list("controller.poles")?;
            match (gain, poles) {
                (Some(_), Some(_)) => return Err(cfg_err("give either controller.gain or controller.poles")),
                (Some(g), None) => ControllerSpec::Linear { gain: LinearGain(four(g, "controller.gain")?), x_d },
                (None, Some(p)) => {
                    ControllerSpec::PolePlacement { poles: p.into_iter().map(|re| C64::new(re, 0.0)).collect(), x_d }
                }
                (None, None) => match &s.controller {
                    ControllerSpec::Linear { gain, .. } => ControllerSpec::Linear { gain: *gain, x_d },
                    ControllerSpec::PolePlacement { poles, .. } => {
                        ControllerSpec::PolePlacement { poles: poles.clone(), x_d }
                    }
                    _ => return Err(cfg_err("linear controller needs controller.gain or controller.poles")),
                },
            }
        }
        other => return Err(cfg_err(format!("unknown controller `{other}`"))),
    };

    if let Some(v) = e.list("y0")? {
        s.y0 = StateVector::from_array(four(v, "y0")?);
    }
    let cfg = &mut s.integrator;
    e.set("rtol", &mut cfg.rtol)?;
    e.set("atol", &mut cfg.atol)?;
    e.set("h_init", &mut cfg.h_init)?;
    e.set("h_min", &mut cfg.h_min)?;
    e.set("h_max", &mut cfg.h_max)?;
    e.set("t_end", &mut cfg.t_end)?;
    e.set("diverge_norm", &mut cfg.diverge_norm)?;
    cfg.validate().map_err(|err| cfg_err(err.to_string()))?;

    if let Some((_, v)) = e.take("metrics") {
        s.metrics = v.split(',').map(str::trim).filter(|m| !m.is_empty()).map(str::parse).collect::<Result<_>>()?;
    }

    if let Some((key, (line, _))) = e.map.into_iter().next() {
        return Err(cfg_err(format!("line {line}: unknown or inapplicable key `{key}`")));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::scenario::MetricKind;

    #[test]
    fn extends_builtin_and_overrides() {
        let s = parse_scenario("extends = fig_d\nname = tight\nrtol = 1e-6\natol=1e-8 # inline\n").unwrap();
        assert_eq!(s.name, "tight");
        assert_eq!(s.integrator.rtol, 1e-6);
        assert_eq!(s.integrator.diverge_norm, 1e3);
        assert_eq!(s.controller, builtin("fig_d").unwrap().controller);
    }

    #[test]
    fn full_linear_scenario() {
        let s = parse_scenario(
            "name = lin\nplant = crane\nplant.L = 0.5\nplant.x_d = 1\ncontroller = linear\n\
             controller.gain = 1, 2, 3, 4\ny0 = 0, 0, 0.1, 0\nt_end = 5\nmetrics = final_error\n",
        )
        .unwrap();
        match s.plant {
            PlantSpec::Crane(p) => assert_eq!(p.rope_length, 0.5),
            _ => panic!(),
        }
        assert_eq!(s.controller, ControllerSpec::Linear { gain: LinearGain([1.0, 2.0, 3.0, 4.0]), x_d: 1.0 });
        assert_eq!(s.y0.x3, 0.1);
        assert_eq!(s.metrics, vec![MetricKind::FinalError]);
    }

    #[test]
    fn coupled_open_loop() {
        let s =
            parse_scenario("plant = coupled\nplant.k = 2\ncontroller = open_loop\ncontroller.input = cos\n").unwrap();
        assert_eq!(s.plant, PlantSpec::CoupledPair { k: 2.0, base: CoupledBase::Degenerate });
        assert_eq!(s.controller, ControllerSpec::OpenLoop(InputProfile::Cos));
    }

    #[test]
    fn errors_are_reported() {
        for bad in [
            "plant = boat\n",
            "nonsense\n",
            "rtol = fast\n",
            "y0 = 1, 2\n",
            "controller = ihssmc\ncontroller.alpha1 = 3\n",
            "controller = linear\n",
            "h_min = 1\n",
            "extends = fig_z\n",
            "metrics = speed\n",
        ] {
            assert!(matches!(parse_scenario(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
