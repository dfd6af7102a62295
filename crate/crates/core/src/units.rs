//! Natural units (ħ = c = ε₀ = 1, energies in eV) and the physical constants
//! every other module draws from.
//!
//! Two charge conventions are supported. `HeavisideLorentz` uses e² = 4πα and
//! reproduces the textbook Lyman-α rate; `PaperGaussianLike` uses e² = 1/137
//! literally and is the configuration behind the vacuum-excitation curves.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// ħ in eV·s (CODATA 2018, exact).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Inverse fine-structure constant.
pub const FINE_STRUCTURE_INV: f64 = 137.035_999;
/// Rounded inverse coupling used by the `PaperGaussianLike` convention.
pub const PAPER_FINE_STRUCTURE_INV: f64 = 137.0;
pub const ELECTRON_MASS_EV: f64 = 510_998.950;
pub const PROTON_MASS_EV: f64 = 938_272_088.16;
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Lyman-α gap, the default transition energy for rate calculations.
pub const LYMAN_ALPHA_EV: f64 = 10.2;
/// Transition energy of the reference vacuum-excitation curve.
pub const PAPER_OMEGA_EV: f64 = 3.73;
/// Bohr radius of the reference vacuum-excitation curve.
pub const PAPER_BOHR_RADIUS_INV_EV: f64 = 2.68e-4;

/// Largest ħΩ/(Mc²) accepted: every expansion here is non-relativistic in
/// the internal energy.
pub const MAX_RECOIL_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChargeConvention {
    PaperGaussianLike,
    HeavisideLorentz,
}

impl ChargeConvention {
    pub fn label(self) -> &'static str {
        match self {
            ChargeConvention::PaperGaussianLike => "paper",
            ChargeConvention::HeavisideLorentz => "hl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub c: f64,
    pub eps0: f64,
    pub charge_convention: ChargeConvention,
}

impl UnitSystem {
    pub fn natural(charge_convention: ChargeConvention) -> Self {
        UnitSystem {
            hbar: 1.0,
            c: 1.0,
            eps0: 1.0,
            charge_convention,
        }
    }

    pub fn heaviside_lorentz() -> Self {
        Self::natural(ChargeConvention::HeavisideLorentz)
    }

    pub fn paper() -> Self {
        Self::natural(ChargeConvention::PaperGaussianLike)
    }

    /// Squared elementary charge in this convention (dimensionless).
    pub fn e_squared(&self) -> f64 {
        match self.charge_convention {
            ChargeConvention::PaperGaussianLike => 1.0 / PAPER_FINE_STRUCTURE_INV,
            ChargeConvention::HeavisideLorentz => 4.0 * PI / FINE_STRUCTURE_INV,
        }
    }

    /// e²/(4π ε₀ ħ c).
    pub fn fine_structure(&self) -> f64 {
        self.e_squared() / (4.0 * PI * self.eps0 * self.hbar * self.c)
    }
}

/// Atomic parameters in natural units. `a0` is the reduced-mass Bohr radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParameters {
    /// Bohr radius (eV⁻¹).
    pub a0: f64,
    /// Centre-of-mass rest energy Mc² (eV).
    pub mass: f64,
    /// Reduced-mass rest energy μc² (eV).
    pub reduced_mass: f64,
    /// Transition angular frequency ħΩ (eV).
    pub omega: f64,
    /// (m_p − m_e)/M.
    pub delta_m_over_m: f64,
}

impl AtomParameters {
    pub fn new(
        a0: f64,
        mass: f64,
        reduced_mass: f64,
        omega: f64,
        delta_m_over_m: f64,
    ) -> Result<Self> {
        let params = AtomParameters {
            a0,
            mass,
            reduced_mass,
            omega,
            delta_m_over_m,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.a0,
            self.mass,
            self.reduced_mass,
            self.omega,
            self.delta_m_over_m,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("atom parameters must be finite"));
        }
        if self.a0 <= 0.0 {
            return Err(Error::domain(format!(
                "a0 must be positive, got {}",
                self.a0
            )));
        }
        if self.mass <= 0.0 {
            return Err(Error::domain(format!(
                "M must be positive, got {}",
                self.mass
            )));
        }
        if !(self.reduced_mass > 0.0 && self.reduced_mass < self.mass) {
            return Err(Error::domain(format!(
                "reduced mass must satisfy 0 < mu < M, got mu = {}, M = {}",
                self.reduced_mass, self.mass
            )));
        }
        if self.delta_m_over_m.abs() >= 1.0 {
            return Err(Error::domain(format!(
                "|delta_m/M| must be below 1, got {}",
                self.delta_m_over_m
            )));
        }
        if self.recoil_ratio().abs() >= MAX_RECOIL_RATIO {
            return Err(Error::domain(format!(
                "hbar*Omega/(Mc^2) = {:e} exceeds the non-relativistic bound {:e}",
                self.recoil_ratio(),
                MAX_RECOIL_RATIO
            )));
        }
        Ok(())
    }

    /// Hydrogen with CODATA masses, reduced-mass Bohr radius and the
    /// Lyman-α gap.
    pub fn standard_hydrogen() -> Self {
        let mass = ELECTRON_MASS_EV + PROTON_MASS_EV;
        let reduced_mass = ELECTRON_MASS_EV * PROTON_MASS_EV / mass;
        AtomParameters {
            a0: FINE_STRUCTURE_INV / reduced_mass,
            mass,
            reduced_mass,
            omega: LYMAN_ALPHA_EV,
            delta_m_over_m: (PROTON_MASS_EV - ELECTRON_MASS_EV) / mass,
        }
    }

    /// The constant set of the reference vacuum-excitation curve:
    /// a0 = 2.68×10⁻⁴ eV⁻¹ and ħΩ = 3.73 eV.
    pub fn paper_figure() -> Self {
        AtomParameters {
            a0: PAPER_BOHR_RADIUS_INV_EV,
            omega: PAPER_OMEGA_EV,
            ..Self::standard_hydrogen()
        }
    }

    /// Default parameter set paired with each charge convention.
    pub fn for_convention(convention: ChargeConvention) -> Self {
        match convention {
            ChargeConvention::HeavisideLorentz => Self::standard_hydrogen(),
            ChargeConvention::PaperGaussianLike => Self::paper_figure(),
        }
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        let params = AtomParameters { omega, ..self };
        params.validate()?;
        Ok(params)
    }

    /// ħΩ/(Mc²).
    pub fn recoil_ratio(&self) -> f64 {
        self.omega / self.mass
    }

    /// P₀² = (ħΩ/Mc²)³ M²c², the leading value of the rate kernel g(P).
    pub fn p0_squared(&self) -> f64 {
        self.recoil_ratio().powi(3) * self.mass * self.mass
    }

    /// P₀ in eV/c.
    pub fn p0(&self) -> f64 {
        self.p0_squared().sqrt()
    }
}

/// Converts an energy (or angular frequency) in eV to a rate in s⁻¹.
pub fn seconds_inverse_from_ev(x: f64) -> f64 {
    x / HBAR_EV_S
}

/// Converts a momentum in eV/c to kg·m/s.
pub fn momentum_si_from_ev(p: f64) -> f64 {
    p * ELEMENTARY_CHARGE_C / SPEED_OF_LIGHT_M_S
}
