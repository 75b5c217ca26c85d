//! Run configuration: TOML sections per module, every physical quantity
//! suffixed with its unit. Values are converted to SI by [`SimConfig::resolve`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sdswe::cases::{Mountain, PlaneSetup, ShearFlow, SphereSetup, VortexPair, DAY, KM};
use sdswe::dissipation::{DissipationConfig, DissipationMode};
use sdswe::integrator::{TimeConfig, DEFAULT_CFL};

/// `km⁴/day` to `m⁴/s`.
pub fn nu_from_km4_per_day(nu: f64) -> f64 {
    nu * KM.powi(4) / DAY
}

/// `km⁴·day` to `m⁴·s`.
pub fn theta_from_km4_day(theta: f64) -> f64 {
    theta * KM.powi(4) * DAY
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid value for `{key}`: {msg}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    Plane,
    PlaneIrregular,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    VortexPair,
    ShearFlow,
    Mountain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub kind: MeshKind,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub lx_km: Option<f64>,
    pub ly_km: Option<f64>,
    pub refinement_factor: Option<f64>,
    pub seed: Option<u64>,
    pub level: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct CaseSection {
    pub name: Option<CaseName>,
    pub H0_m: Option<f64>,
    pub Hp_m: Option<f64>,
    pub sx_frac: Option<f64>,
    pub sy_frac: Option<f64>,
    pub lambda_x_frac: Option<f64>,
    pub sigma_y_frac: Option<f64>,
    pub kappa: Option<f64>,
    pub u0_m_per_s: Option<f64>,
    pub h0_m: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct PhysicsSection {
    pub f_per_s: Option<f64>,
    pub g_m_per_s2: Option<f64>,
    pub R_m: Option<f64>,
    pub Omega_per_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSection {
    pub mode: Option<String>,
    pub theta_km4_day: Option<f64>,
    pub theta_m4_s: Option<f64>,
    pub nu_km4_per_day: Option<f64>,
    pub nu_m4_per_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt_s: Option<f64>,
    pub cfl: Option<f64>,
    pub duration_days: Option<f64>,
    pub fp_tolerance_m_per_s: Option<f64>,
    pub fp_max_iterations: Option<usize>,
    pub linear_tolerance: Option<f64>,
    pub linear_max_iterations: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub diagnostics_every: Option<u64>,
    pub snapshot_every: Option<u64>,
    pub checkpoint_every: Option<u64>,
    /// Also keep a numbered copy of every periodic checkpoint.
    pub keep_checkpoints: Option<bool>,
}

/// The configuration file as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub mesh: MeshSection,
    #[serde(default)]
    pub case: CaseSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub dissipation: DissipationSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Mesh request in SI units.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Plane { nx: usize, ny: usize, lx: f64, ly: f64 },
    PlaneIrregular { nx: usize, ny: usize, lx: f64, ly: f64, factor: f64, seed: u64 },
    Sphere { level: u32, radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum CaseSpec {
    VortexPair(VortexPair, PlaneSetup),
    ShearFlow(ShearFlow, PlaneSetup),
    Mountain(Mountain, SphereSetup),
}

/// Time step: fixed, or from the CFL condition on the initial state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    Cfl(f64),
}

/// Fully defaulted configuration in SI units.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub mesh: MeshSpec,
    pub case: CaseSpec,
    pub dissipation: DissipationConfig,
    pub step_size: StepSize,
    pub duration: f64,
    /// Tolerances and limits; `dt` is filled in once the step size is known.
    pub time: TimeConfig,
    pub diagnostics_every: u64,
    pub snapshot_every: u64,
    pub checkpoint_every: u64,
    pub keep_checkpoints: bool,
}

/// Default dissipation coefficients per case as `(θ km⁴·day, ν km⁴/day)`.
pub fn default_coefficients(case: CaseName) -> (f64, f64) {
    match case {
        CaseName::VortexPair => (2.0, 1.2724e5),
        CaseName::ShearFlow => (2.0, 3.7145e5),
        CaseName::Mountain => (2.0, 1.0e8),
    }
}

fn positive(key: &str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(key, format!("must be positive and finite (got {value})")))
    }
}

fn non_negative(key: &str, value: f64) -> Result<f64, ConfigError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(key, format!("must be non-negative and finite (got {value})")))
    }
}

fn either(
    a: Option<f64>,
    a_key: &str,
    b: Option<f64>,
    b_key: &str,
    convert: fn(f64) -> f64,
    default: f64,
) -> Result<f64, ConfigError> {
    match (a, b) {
        (Some(_), Some(_)) => Err(ConfigError(format!("`{a_key}` and `{b_key}` are mutually exclusive"))),
        (Some(x), None) => Ok(convert(non_negative(a_key, x)?)),
        (None, Some(x)) => non_negative(b_key, x),
        (None, None) => Ok(convert(default)),
    }
}

impl SimConfig {
    /// Parses TOML text. Errors carry the line and key of the offending entry.
    pub fn parse(text: &str) -> Result<SimConfig, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<SimConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        SimConfig::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn case_name(&self) -> CaseName {
        self.case.name.unwrap_or(match self.mesh.kind {
            MeshKind::Sphere => CaseName::Mountain,
            _ => CaseName::VortexPair,
        })
    }

    /// Applies defaults, checks ranges and converts to SI.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let name = self.case_name();
        let sphere = self.mesh.kind == MeshKind::Sphere;
        if sphere != (name == CaseName::Mountain) {
            return Err(invalid("case.name", format!("{name:?} does not run on a {:?} mesh", self.mesh.kind)));
        }
        let m = &self.mesh;
        let plane = PlaneSetup::default();
        let lx = positive("mesh.lx_km", m.lx_km.unwrap_or(plane.lx / KM))? * KM;
        let ly = positive("mesh.ly_km", m.ly_km.unwrap_or(plane.ly / KM))? * KM;
        let (nx, ny) = (m.nx.unwrap_or(64), m.ny.unwrap_or(64));
        let p = &self.physics;
        let g = positive("physics.g_m_per_s2", p.g_m_per_s2.unwrap_or(plane.g))?;
        let mesh = match m.kind {
            MeshKind::Plane => MeshSpec::Plane { nx, ny, lx, ly },
            MeshKind::PlaneIrregular => MeshSpec::PlaneIrregular {
                nx,
                ny,
                lx,
                ly,
                factor: m.refinement_factor.unwrap_or(2.0),
                seed: m.seed.unwrap_or(1),
            },
            MeshKind::Sphere => MeshSpec::Sphere {
                level: m.level.unwrap_or(5),
                radius: positive("physics.R_m", p.R_m.unwrap_or(SphereSetup::default().radius))?,
            },
        };
        let plane = PlaneSetup { lx, ly, f: p.f_per_s.unwrap_or(plane.f), g };
        if !plane.f.is_finite() {
            return Err(invalid("physics.f_per_s", "must be finite"));
        }
        let c = &self.case;
        let case = match name {
            CaseName::VortexPair => {
                let d = VortexPair::default();
                let case = VortexPair {
                    h0: positive("case.H0_m", c.H0_m.unwrap_or(d.h0))?,
                    hp: non_negative("case.Hp_m", c.Hp_m.unwrap_or(d.hp))?,
                    centres: d.centres,
                    width: (
                        positive("case.sx_frac", c.sx_frac.unwrap_or(d.width.0))?,
                        positive("case.sy_frac", c.sy_frac.unwrap_or(d.width.1))?,
                    ),
                };
                CaseSpec::VortexPair(case, plane)
            }
            CaseName::ShearFlow => {
                let d = ShearFlow::default();
                let case = ShearFlow {
                    h0: positive("case.H0_m", c.H0_m.unwrap_or(d.h0))?,
                    hp: non_negative("case.Hp_m", c.Hp_m.unwrap_or(d.hp))?,
                    lambda_x: positive("case.lambda_x_frac", c.lambda_x_frac.unwrap_or(d.lambda_x))?,
                    sigma_y: positive("case.sigma_y_frac", c.sigma_y_frac.unwrap_or(d.sigma_y))?,
                    kappa: non_negative("case.kappa", c.kappa.unwrap_or(d.kappa))?,
                };
                CaseSpec::ShearFlow(case, plane)
            }
            CaseName::Mountain => {
                let d = Mountain::default();
                let s = SphereSetup::default();
                let setup = SphereSetup {
                    radius: positive("physics.R_m", p.R_m.unwrap_or(s.radius))?,
                    rotation: non_negative("physics.Omega_per_s", p.Omega_per_s.unwrap_or(s.rotation))?,
                    g,
                };
                let case = Mountain {
                    u0: non_negative("case.u0_m_per_s", c.u0_m_per_s.unwrap_or(d.u0))?,
                    h0: positive("case.h0_m", c.h0_m.unwrap_or(d.h0))?,
                    ..d
                };
                CaseSpec::Mountain(case, setup)
            }
        };
        let plane_only = [
            ("case.sx_frac", c.sx_frac.is_some() && name != CaseName::VortexPair),
            ("case.sy_frac", c.sy_frac.is_some() && name != CaseName::VortexPair),
            ("case.lambda_x_frac", c.lambda_x_frac.is_some() && name != CaseName::ShearFlow),
            ("case.sigma_y_frac", c.sigma_y_frac.is_some() && name != CaseName::ShearFlow),
            ("case.kappa", c.kappa.is_some() && name != CaseName::ShearFlow),
            ("case.H0_m", c.H0_m.is_some() && name == CaseName::Mountain),
            ("case.Hp_m", c.Hp_m.is_some() && name == CaseName::Mountain),
            ("case.u0_m_per_s", c.u0_m_per_s.is_some() && name != CaseName::Mountain),
            ("case.h0_m", c.h0_m.is_some() && name != CaseName::Mountain),
            ("physics.f_per_s", p.f_per_s.is_some() && sphere),
            ("physics.Omega_per_s", p.Omega_per_s.is_some() && !sphere),
            ("physics.R_m", p.R_m.is_some() && !sphere),
        ];
        if let Some((key, _)) = plane_only.iter().find(|(_, bad)| *bad) {
            return Err(invalid(key, format!("not used by case {name:?}")));
        }

        let d = &self.dissipation;
        let mode = match &d.mode {
            Some(s) => s.parse::<DissipationMode>().map_err(|e| invalid("dissipation.mode", e))?,
            None => DissipationMode::None,
        };
        let (theta0, nu0) = default_coefficients(name);
        let theta = either(d.theta_km4_day, "dissipation.theta_km4_day", d.theta_m4_s, "dissipation.theta_m4_s", theta_from_km4_day, theta0)?;
        let nu = either(d.nu_km4_per_day, "dissipation.nu_km4_per_day", d.nu_m4_per_s, "dissipation.nu_m4_per_s", nu_from_km4_per_day, nu0)?;

        let t = &self.time;
        let step_size = match (t.dt_s, t.cfl) {
            (Some(_), Some(_)) => return Err(ConfigError("`time.dt_s` and `time.cfl` are mutually exclusive".into())),
            (Some(dt), None) => StepSize::Fixed(positive("time.dt_s", dt)?),
            (None, cfl) => StepSize::Cfl(positive("time.cfl", cfl.unwrap_or(DEFAULT_CFL))?),
        };
        let defaults = TimeConfig::with_dt(0.0);
        let time = TimeConfig {
            dt: 0.0,
            fp_tolerance: positive("time.fp_tolerance_m_per_s", t.fp_tolerance_m_per_s.unwrap_or(defaults.fp_tolerance))?,
            fp_max_iterations: t.fp_max_iterations.unwrap_or(defaults.fp_max_iterations),
            linear_tolerance: positive("time.linear_tolerance", t.linear_tolerance.unwrap_or(defaults.linear_tolerance))?,
            linear_max_iterations: t.linear_max_iterations.unwrap_or(defaults.linear_max_iterations),
        };
        let o = &self.output;
        Ok(Resolved {
            mesh,
            case,
            dissipation: DissipationConfig { mode, theta, nu },
            step_size,
            duration: non_negative("time.duration_days", t.duration_days.unwrap_or(10.0))? * DAY,
            time,
            diagnostics_every: o.diagnostics_every.unwrap_or(1).max(1),
            snapshot_every: o.snapshot_every.unwrap_or(0),
            checkpoint_every: o.checkpoint_every.unwrap_or(0),
            keep_checkpoints: o.keep_checkpoints.unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vortex() -> SimConfig {
        SimConfig::parse("[mesh]\nkind = \"plane\"\nnx = 32\nny = 32\n").unwrap()
    }

    #[test]
    fn unit_conversions() {
        // 1 km⁴/day = 1e12 m⁴ / 86400 s.
        assert_relative_eq!(nu_from_km4_per_day(1.0), 1.0e12 / 86_400.0, max_relative = 1e-15);
        assert_relative_eq!(nu_from_km4_per_day(1.2724e5), 1.472_685e12, max_relative = 1e-6);
        assert_relative_eq!(theta_from_km4_day(1.0), 8.64e16, max_relative = 1e-15);
        assert_relative_eq!(theta_from_km4_day(2.0), 1.728e17, max_relative = 1e-15);
    }

    #[test]
    fn defaults_resolve_to_vortex_pair() {
        let r = vortex().resolve().unwrap();
        assert_eq!(r.mesh, MeshSpec::Plane { nx: 32, ny: 32, lx: 5.0e6, ly: 4.33e6 });
        assert!(matches!(r.case, CaseSpec::VortexPair(c, _) if c == VortexPair::default()));
        assert_eq!(r.dissipation.mode, DissipationMode::None);
        assert_relative_eq!(r.dissipation.nu, nu_from_km4_per_day(1.2724e5));
        assert_relative_eq!(r.dissipation.theta, 1.728e17);
        assert_eq!(r.step_size, StepSize::Cfl(DEFAULT_CFL));
        assert_eq!(r.duration, 10.0 * DAY);
        assert_eq!(r.time.fp_max_iterations, 50);
    }

    #[test]
    fn overrides_are_converted() {
        let text = r#"
[mesh]
kind = "plane"
lx_km = 1000
[case]
name = "shear_flow"
H0_m = 1000.0
kappa = 0.0
[dissipation]
mode = "biharmonic"
nu_km4_per_day = 2.0
[time]
dt_s = 60
duration_days = 0.5
"#;
        let r = SimConfig::parse(text).unwrap().resolve().unwrap();
        assert!(matches!(r.mesh, MeshSpec::Plane { lx, .. } if lx == 1.0e6));
        match r.case {
            CaseSpec::ShearFlow(c, s) => {
                assert_eq!(c.h0, 1000.0);
                assert_eq!(c.kappa, 0.0);
                assert_eq!(s.lx, 1.0e6);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(r.dissipation.mode, DissipationMode::Biharmonic);
        assert_relative_eq!(r.dissipation.nu, 2.0e12 / DAY);
        assert_eq!(r.step_size, StepSize::Fixed(60.0));
        assert_eq!(r.duration, 0.5 * DAY);
    }

    #[test]
    fn sphere_defaults_to_mountain() {
        let r = SimConfig::parse("[mesh]\nkind = \"sphere\"\nlevel = 2\n").unwrap().resolve().unwrap();
        assert!(matches!(r.mesh, MeshSpec::Sphere { level: 2, .. }));
        assert!(matches!(r.case, CaseSpec::Mountain(..)));
    }

    #[test]
    fn parse_errors_name_line_and_key() {
        let err = SimConfig::parse("[mesh]\nkind = \"plane\"\n\n[time]\ndt = 5\n").unwrap_err();
        assert!(err.0.contains("line 5"), "{err}");
        assert!(err.0.contains("dt"), "{err}");
        let err = SimConfig::parse("[mesh]\nkind = \"plane\"\nnx = \"big\"\n").unwrap_err();
        assert!(err.0.contains("line 3"), "{err}");
    }

    #[test]
    fn range_errors_name_key() {
        let cases = [
            ("[time]\ndt_s = -1", "time.dt_s"),
            ("[dissipation]\nnu_km4_per_day = -1", "dissipation.nu_km4_per_day"),
            ("[dissipation]\nmode = \"fast\"", "dissipation.mode"),
            ("[case]\nu0_m_per_s = 3", "case.u0_m_per_s"),
            ("[case]\nname = \"mountain\"", "case.name"),
            ("[time]\ndt_s = 1\ncfl = 0.1", "time.cfl"),
            ("[dissipation]\ntheta_km4_day = 1\ntheta_m4_s = 1", "theta_m4_s"),
        ];
        for (extra, key) in cases {
            let text = format!("[mesh]\nkind = \"plane\"\n{extra}\n");
            let err = SimConfig::parse(&text).and_then(|c| c.resolve()).unwrap_err();
            assert!(err.0.contains(key), "{extra}: {err}");
        }
    }

    #[test]
    fn round_trip_through_toml() {
        let mut c = vortex();
        c.dissipation.mode = Some("casimir".into());
        c.time.dt_s = Some(100.0);
        let back = SimConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }
}
