//! Problem descriptions: the three preset experiments and user-sampled data.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact::ExactExample;
use crate::fd::{BoundaryClosure, DirichletGrid};
use crate::field::{Field, GridKind};
use crate::scalar::Real;
use crate::spectral::PeriodicGrid;
use crate::weno::GhostFill;

/// Desk-scale periodic resolution.
pub const DESK_N: usize = 128;
/// Desk-scale Dirichlet resolution.
pub const DESK_D: usize = 200;
pub const PAPER_N: usize = 512;
pub const PAPER_D: usize = 500;
/// Smallest Dirichlet grid accepted by the engine.
pub const MIN_DIRICHLET_D: usize = 10;
/// Step of the periodic reference integrator.
pub const DEFAULT_REFERENCE_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `u₀ = ½ + ¼ sin x` on the periodic interval `[0, 2π]`.
    Example1,
    /// `u₀ = sin(πx)/5` on `[0, 1]` with homogeneous Dirichlet data.
    Example2,
    /// `u₀ = x(1 − x)/2` on `[0, 1]` with homogeneous Dirichlet data.
    Example3,
}

pub const PRESET_NAMES: [&str; 3] = ["example1", "example2", "example3"];

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Example2 => "example2",
            Preset::Example3 => "example3",
        }
    }

    pub fn boundary(self) -> GridKind {
        match self {
            Preset::Example1 => GridKind::Periodic,
            _ => GridKind::Dirichlet,
        }
    }

    pub fn default_nu(self) -> f64 {
        match self {
            Preset::Example1 => 0.03,
            _ => 0.1,
        }
    }

    pub fn default_t_final(self) -> f64 {
        match self {
            Preset::Example1 => std::f64::consts::TAU,
            _ => 1.0,
        }
    }

    pub fn default_resolution(self, paper_scale: bool) -> usize {
        match (self.boundary(), paper_scale) {
            (GridKind::Periodic, false) => DESK_N,
            (GridKind::Periodic, true) => PAPER_N,
            (GridKind::Dirichlet, false) => DESK_D,
            (GridKind::Dirichlet, true) => PAPER_D,
        }
    }

    /// Default step sizes of a convergence study, as parseable expressions.
    pub fn default_h_values(self) -> &'static [&'static str] {
        match self {
            Preset::Example1 => &["2pi/40", "2pi/80", "2pi/160", "2pi/320", "2pi/640"],
            _ => &["1/10", "1/20", "1/40", "1/80"],
        }
    }

    pub fn exact(self) -> Option<ExactExample> {
        match self {
            Preset::Example1 => None,
            Preset::Example2 => Some(ExactExample::Example2),
            Preset::Example3 => Some(ExactExample::Example3),
        }
    }

    pub fn initial<T: Real>(self, x: T) -> T {
        match self {
            Preset::Example1 => T::lit(0.5) + T::lit(0.25) * x.sin(),
            Preset::Example2 => ExactExample::Example2.initial(x),
            Preset::Example3 => ExactExample::Example3.initial(x),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "example1" | "ex1" | "1" => Ok(Preset::Example1),
            "example2" | "ex2" | "2" => Ok(Preset::Example2),
            "example3" | "ex3" | "3" => Ok(Preset::Example3),
            _ => Err(Error::NotFound {
                kind: "preset",
                name: s.to_string(),
                available: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition<T> {
    Preset(Preset),
    /// Values at the grid nodes.
    Sampled(Vec<T>),
}

/// The equation `u_t + u u_x = ν u_xx` with its data and discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<T> {
    pub boundary: GridKind,
    pub nu: T,
    pub initial: InitialCondition<T>,
    pub t_final: T,
    /// `N` for periodic grids, `D` for Dirichlet grids.
    pub resolution: usize,
    pub closure: BoundaryClosure,
    pub ghost: GhostFill,
    pub dealias: bool,
    pub reference_dt: T,
}

impl<T: Real> ProblemSpec<T> {
    pub fn preset(preset: Preset, paper_scale: bool) -> Self {
        Self {
            boundary: preset.boundary(),
            nu: T::lit(preset.default_nu()),
            initial: InitialCondition::Preset(preset),
            t_final: T::lit(preset.default_t_final()),
            resolution: preset.default_resolution(paper_scale),
            closure: BoundaryClosure::default(),
            ghost: GhostFill::default(),
            dealias: false,
            reference_dt: T::lit(DEFAULT_REFERENCE_DT),
        }
    }

    pub fn sampled(boundary: GridKind, values: Vec<T>, nu: T, t_final: T) -> Self {
        Self {
            boundary,
            nu,
            resolution: values.len(),
            initial: InitialCondition::Sampled(values),
            t_final,
            closure: BoundaryClosure::default(),
            ghost: GhostFill::default(),
            dealias: false,
            reference_dt: T::lit(DEFAULT_REFERENCE_DT),
        }
    }

    pub fn with_nu(mut self, nu: T) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_t_final(mut self, t_final: T) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn preset_kind(&self) -> Option<Preset> {
        match self.initial {
            InitialCondition::Preset(p) => Some(p),
            InitialCondition::Sampled(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > T::zero()) || !self.nu.is_finite() {
            return Err(Error::config("nu", format!("viscosity must be positive, got {}", self.nu)));
        }
        if !(self.t_final > T::zero()) || !self.t_final.is_finite() {
            return Err(Error::config("t_final", format!("must be positive, got {}", self.t_final)));
        }
        match self.boundary {
            GridKind::Periodic => {
                PeriodicGrid::<T>::new(self.resolution)
                    .map_err(|e| Error::config("resolution", e))?;
            }
            GridKind::Dirichlet => {
                if self.resolution < MIN_DIRICHLET_D {
                    return Err(Error::config(
                        "resolution",
                        format!("Dirichlet grids need D ≥ {MIN_DIRICHLET_D}, got {}", self.resolution),
                    ));
                }
            }
        }
        match &self.initial {
            InitialCondition::Preset(p) if p.boundary() != self.boundary => Err(Error::config(
                "preset",
                format!("{p} is posed on a {} grid", p.boundary().name()),
            )),
            InitialCondition::Sampled(v) if v.len() != self.resolution => Err(Error::Dimension {
                expected: self.resolution,
                found: v.len(),
            }),
            InitialCondition::Sampled(v) if v.iter().any(|x| !x.is_finite()) => {
                Err(Error::InvalidInput("initial samples must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Grid node coordinates.
    pub fn nodes(&self) -> Result<Vec<T>> {
        Ok(match self.boundary {
            GridKind::Periodic => PeriodicGrid::<T>::new(self.resolution)?.nodes(),
            GridKind::Dirichlet => DirichletGrid::<T>::new(self.resolution)?.nodes(),
        })
    }

    pub fn initial_field(&self) -> Result<Field<T>> {
        let values = match &self.initial {
            InitialCondition::Preset(p) => self.nodes()?.into_iter().map(|x| p.initial(x)).collect(),
            InitialCondition::Sampled(v) => v.clone(),
        };
        Ok(Field::from_real(&values, self.boundary))
    }
}
