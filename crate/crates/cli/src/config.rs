//! Run configuration read from TOML.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gacpath::dynamics::{Mat2, SwitchedSystem, DEFAULT_DT};
use gacpath::gac::Point;
use gacpath::planner::{PathRequest, Tolerances, DEFAULT_MAX_RUNGS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// Row-major `[a11, a12, a21, a22]`.
    pub a1: [f64; 4],
    pub a2: [f64; 4],
    pub start: [f64; 2],
    pub target: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub incidence: f64,
    pub tangency: f64,
    pub coincidence: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            incidence: t.incidence,
            tangency: t.tangency,
            coincidence: t.coincidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationSection {
    pub dt: f64,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        Self { dt: DEFAULT_DT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub max_rungs: usize,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            max_rungs: DEFAULT_MAX_RUNGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for all artifacts; file names below are relative to it.
    pub dir: PathBuf,
    pub switch_points: PathBuf,
    pub segments: PathBuf,
    pub svg: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            switch_points: PathBuf::from("switch_points.csv"),
            segments: PathBuf::from("segments.json"),
            svg: PathBuf::from("path.svg"),
        }
    }
}

pub fn mat(m: [f64; 4]) -> Mat2 {
    Mat2::new(m[0], m[1], m[2], m[3])
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.check_fields()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    fn check_fields(&self) -> Result<()> {
        let s = &self.system;
        let finite = |name: &str, v: &[f64]| -> Result<()> {
            if v.iter().any(|x| !x.is_finite()) {
                bail!("system.{name} must be finite");
            }
            Ok(())
        };
        finite("a1", &s.a1)?;
        finite("a2", &s.a2)?;
        finite("start", &s.start)?;
        finite("target", &s.target)?;
        let t = &self.tolerances;
        for (name, v) in [
            ("incidence", t.incidence),
            ("tangency", t.tangency),
            ("coincidence", t.coincidence),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerances.{name} must be positive, got {v}");
            }
        }
        if !(self.integration.dt > 0.0 && self.integration.dt.is_finite()) {
            bail!(
                "integration.dt must be positive, got {}",
                self.integration.dt
            );
        }
        if self.planner.max_rungs == 0 {
            bail!("planner.max_rungs must be at least 1");
        }
        Ok(())
    }

    pub fn system(&self) -> Result<SwitchedSystem, gacpath::dynamics::DynamicsError> {
        let s = &self.system;
        SwitchedSystem::new(
            mat(s.a1),
            mat(s.a2),
            Point::new(s.start[0], s.start[1]),
            Point::new(s.target[0], s.target[1]),
        )
    }

    pub fn request(&self, system: SwitchedSystem) -> PathRequest {
        let mut req = PathRequest::new(system);
        req.tolerances = Tolerances {
            incidence: self.tolerances.incidence,
            tangency: self.tolerances.tangency,
            coincidence: self.tolerances.coincidence,
        };
        req.dt = self.integration.dt;
        req.max_rungs = self.planner.max_rungs;
        req
    }
}
