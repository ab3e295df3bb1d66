//! The experiment configuration document.
//!
//! A single JSON object; every field has a default, unknown fields are
//! rejected. Distances are in meters, powers in dBm, frequencies in Hz.

use std::fs;
use std::path::Path;

use irsloc_core::estimation::GridSpec;
use irsloc_core::experiment::{self, TrialSetup};
use irsloc_core::{ArrayLayout, Backtracking, Centering, OptimConfig, Position3, RadioConfig, SceneGeometry, SchemeId};
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scene: SceneConfig,
    pub radio: RadioSection,
    pub grid: GridConfig,
    pub optim: OptimSection,
    pub plan: PlanConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub bs_position: [f64; 3],
    pub ue_position: [f64; 3],
    pub uav_initial: [f64; 3],
    /// Center of the feasible disk; `null` uses `uav_initial`.
    pub uav_home: Option<[f64; 3]>,
    pub r_max_m: f64,
    pub uav_plane_z: f64,
    pub planar_motion: bool,
    pub bs_array: ArrayConfig,
    pub irs_array: ArrayConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenteringConfig {
    Centered,
    FirstElement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub num_elements: usize,
    /// `null` means half a wavelength.
    pub spacing_m: Option<f64>,
    /// Unit vector along the array.
    pub axis: [f64; 3],
    pub centering: CenteringConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    pub carrier_hz: f64,
    pub noise_power_dbm: f64,
    pub rician_kappa: f64,
    pub gain_ue: f64,
    pub gain_bs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// `[x, y]` of the grid center; `null` centers on the true user.
    pub center: Option<[f64; 2]>,
    pub half_extent_m: f64,
    pub step_m: f64,
    pub plane_z: f64,
    /// Run the rough estimate on a grid of `coarse_step_m` instead.
    pub coarse_rough_grid: bool,
    pub coarse_step_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimSection {
    pub step_kp: f64,
    pub eps_outer: f64,
    pub eps_inner: f64,
    pub max_inner_iters: usize,
    pub max_outer_iters: usize,
    pub backtracking: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanConfig {
    /// Scheme names or letters (`a`..`d`).
    pub schemes: Vec<String>,
    pub powers_dbm: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            bs_position: [12.0, 0.0, 2.0],
            ue_position: [3.0, 0.0, 1.0],
            uav_initial: [6.0, 6.0, 3.0],
            uav_home: None,
            r_max_m: 3.0,
            uav_plane_z: 3.0,
            planar_motion: true,
            bs_array: ArrayConfig::default(),
            irs_array: ArrayConfig::default(),
        }
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            num_elements: 48,
            spacing_m: None,
            axis: [1.0, 0.0, 0.0],
            centering: CenteringConfig::Centered,
        }
    }
}

impl Default for RadioSection {
    fn default() -> Self {
        Self {
            carrier_hz: 28.0e9,
            noise_power_dbm: -125.0,
            rician_kappa: 5.0,
            gain_ue: 1.0,
            gain_bs: 1.0,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            center: None,
            half_extent_m: 0.2,
            step_m: 0.002,
            plane_z: 1.0,
            coarse_rough_grid: false,
            coarse_step_m: 0.01,
        }
    }
}

impl Default for OptimSection {
    fn default() -> Self {
        let d = OptimConfig::default();
        Self {
            step_kp: d.step_kp,
            eps_outer: d.eps_outer,
            eps_inner: d.eps_inner,
            max_inner_iters: d.max_inner_iters,
            max_outer_iters: d.max_outer_iters,
            backtracking: d.backtracking == Backtracking::On,
        }
    }
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            schemes: SchemeId::ALL.iter().map(|s| s.name().to_owned()).collect(),
            powers_dbm: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0],
            trials: 300,
            base_seed: 2024,
        }
    }
}

impl ArrayConfig {
    fn layout(&self, wavelength: f64) -> ArrayLayout {
        ArrayLayout {
            num_elements: self.num_elements,
            spacing: self.spacing_m.unwrap_or(wavelength / 2.0),
            axis: Position3::from(self.axis),
            centering: match self.centering {
                CenteringConfig::Centered => Centering::CenteredOnReference,
                CenteringConfig::FirstElement => Centering::FirstElementAtReference,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything [`ExperimentConfig::trial_setup`] and the plan need.
    pub fn validate(&self) -> Result<(), Error> {
        let setup = self.trial_setup()?;
        setup.validate()?;
        experiment::check_plan(&self.schemes()?, &self.plan.powers_dbm, self.plan.trials)?;
        Ok(())
    }

    pub fn schemes(&self) -> Result<Vec<SchemeId>, Error> {
        let mut out = Vec::with_capacity(self.plan.schemes.len());
        for name in &self.plan.schemes {
            let id: SchemeId = name.parse().map_err(|_| Error::UnknownScheme(name.clone()))?;
            if out.contains(&id) {
                return Err(Error::Config(format!("scheme {name} listed twice")));
            }
            out.push(id);
        }
        Ok(out)
    }

    pub fn radio(&self) -> RadioConfig {
        let r = &self.radio;
        let mut radio = RadioConfig::from_dbm(r.carrier_hz, 0.0, r.rician_kappa, r.noise_power_dbm);
        radio.gain_ue = r.gain_ue;
        radio.gain_bs = r.gain_bs;
        radio
    }

    /// The core trial inputs. Transmit power is left at 0 dBm; runs set it per
    /// power point.
    pub fn trial_setup(&self) -> Result<TrialSetup, Error> {
        let radio = self.radio();
        let wavelength = radio.wavelength();
        let s = &self.scene;
        let uav_ref = Position3::from(s.uav_initial);
        let ue_true = Position3::from(s.ue_position);
        let scene = SceneGeometry {
            bs_ref: Position3::from(s.bs_position),
            ue_true,
            uav_ref,
            uav_home: s.uav_home.map(Position3::from).unwrap_or(uav_ref),
            r_max: s.r_max_m,
            bs_array: s.bs_array.layout(wavelength),
            irs_array: s.irs_array.layout(wavelength),
            uav_plane_z: s.uav_plane_z,
            planar: s.planar_motion,
        };
        let g = &self.grid;
        let [cx, cy] = g.center.unwrap_or([ue_true.x, ue_true.y]);
        let grid = GridSpec {
            center: Position3::new(cx, cy, g.plane_z),
            half_extent_m: g.half_extent_m,
            step_m: g.step_m,
            plane_z: g.plane_z,
        };
        let rough_grid = g.coarse_rough_grid.then_some(GridSpec {
            step_m: g.coarse_step_m,
            ..grid
        });
        let o = &self.optim;
        let optim = OptimConfig {
            step_kp: o.step_kp,
            eps_outer: o.eps_outer,
            eps_inner: o.eps_inner,
            max_inner_iters: o.max_inner_iters,
            max_outer_iters: o.max_outer_iters,
            backtracking: if o.backtracking { Backtracking::On } else { Backtracking::Off },
        };
        Ok(TrialSetup {
            scene,
            radio,
            grid,
            rough_grid,
            optim,
        })
    }
}
