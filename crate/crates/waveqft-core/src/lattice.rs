use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Antiperiodic,
    Open,
}

impl Boundary {
    /// Sign picked up by a coupling that wraps once around the ring; `None` for open chains.
    pub fn wrap_sign(self) -> Option<f64> {
        match self {
            Boundary::Periodic => Some(1.0),
            Boundary::Antiperiodic => Some(-1.0),
            Boundary::Open => None,
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "antiperiodic" => Ok(Boundary::Antiperiodic),
            "open" => Ok(Boundary::Open),
            _ => Err(format!("unknown boundary '{s}' (periodic|antiperiodic|open)")),
        }
    }
}

/// Unit in which `m0` is quoted.
///
/// `Physical` masses are in inverse units of the box length `X`. `ScaleN` masses are in
/// inverse units of the scale-n mode spacing, so the physical mass is `2^n m0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassUnits {
    #[default]
    Physical,
    ScaleN,
}

impl std::str::FromStr for MassUnits {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "physical" => Ok(MassUnits::Physical),
            "scale-n" => Ok(MassUnits::ScaleN),
            _ => Err(format!("unknown mass units '{s}' (physical|scale-n)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub x: usize,
    pub n: u32,
    pub k: usize,
    pub m0: f64,
    pub bc: Boundary,
    pub dims: u8,
    #[serde(default)]
    pub mass_units: MassUnits,
}

impl LatticeSpec {
    pub fn new(x: usize, n: u32, k: usize, m0: f64, bc: Boundary) -> Self {
        LatticeSpec { x, n, k, m0, bc, dims: 1, mass_units: MassUnits::Physical }
    }

    pub fn with_units(mut self, units: MassUnits) -> Self {
        self.mass_units = units;
        self
    }

    pub fn with_dims(mut self, dims: u8) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_mass(&self, m0: f64) -> Self {
        LatticeSpec { m0, ..self.clone() }
    }

    /// Mode count per dimension, `2^n X`.
    pub fn v(&self) -> usize {
        self.x << self.n
    }

    /// Mass entering the `2^n`-scaled lattice operators.
    pub fn mass(&self) -> f64 {
        match self.mass_units {
            MassUnits::Physical => self.m0,
            MassUnits::ScaleN => self.m0 * (1u64 << self.n) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x == 0 {
            return Err(Error::Mismatch("box length x must be positive".into()));
        }
        if self.n > 24 {
            return Err(Error::Mismatch(format!("scale n={} too large", self.n)));
        }
        if !(1..=10).contains(&self.k) {
            return Err(Error::UnsupportedOrder(self.k));
        }
        if !self.m0.is_finite() {
            return Err(Error::Mismatch("m0 must be finite".into()));
        }
        if !(1..=2).contains(&self.dims) {
            return Err(Error::Mismatch(format!("dims={} (1 or 2)", self.dims)));
        }
        Ok(())
    }
}

/// Mode frequencies with the momentum label of each mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub momenta: Vec<f64>,
    pub omegas: Vec<f64>,
}

impl Spectrum {
    pub fn min_omega(&self) -> f64 {
        self.omegas.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
