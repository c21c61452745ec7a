//! Host crystal description: tight-binding parameter tables, lattice constant,
//! conduction-valley family and donor constants.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Nearest-neighbour sp3d5s* parameters, all in eV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TbParams {
    pub e_s: f64,
    pub e_sstar: f64,
    pub e_p: f64,
    pub e_d: f64,
    pub ss_sigma: f64,
    pub sstar_sstar_sigma: f64,
    pub s_sstar_sigma: f64,
    pub sp_sigma: f64,
    pub sstar_p_sigma: f64,
    pub sd_sigma: f64,
    pub sstar_d_sigma: f64,
    pub pp_sigma: f64,
    pub pp_pi: f64,
    pub pd_sigma: f64,
    pub pd_pi: f64,
    pub dd_sigma: f64,
    pub dd_pi: f64,
    pub dd_delta: f64,
    /// On-site p spin-orbit strength λ of λ L·S.
    pub so_lambda_p: f64,
}

/// Channel names as they appear in table files, in canonical order.
pub const CHANNELS: [&str; 19] = [
    "E_s",
    "E_s*",
    "E_p",
    "E_d",
    "ss_sigma",
    "s*s*_sigma",
    "ss*_sigma",
    "sp_sigma",
    "s*p_sigma",
    "sd_sigma",
    "s*d_sigma",
    "pp_sigma",
    "pp_pi",
    "pd_sigma",
    "pd_pi",
    "dd_sigma",
    "dd_pi",
    "dd_delta",
    "so_lambda_p",
];

impl TbParams {
    /// Parses a plain-text table: one `channel value` row per line, `#`
    /// comments allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values: [Option<f64>; 19] = [None; 19];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let name = it.next().unwrap_or_default();
            let value = it.next().ok_or_else(|| Error::TableSyntax {
                line: lineno + 1,
                msg: format!("channel `{name}` has no value"),
            })?;
            if it.next().is_some() {
                return Err(Error::TableSyntax { line: lineno + 1, msg: "expected `name value`".into() });
            }
            let idx = CHANNELS.iter().position(|c| *c == name).ok_or_else(|| Error::TableSyntax {
                line: lineno + 1,
                msg: format!("unknown channel `{name}`"),
            })?;
            let v: f64 = value.parse().map_err(|_| Error::TableSyntax {
                line: lineno + 1,
                msg: format!("`{value}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::TableSyntax { line: lineno + 1, msg: "non-finite value".into() });
            }
            if values[idx].replace(v).is_some() {
                return Err(Error::TableSyntax { line: lineno + 1, msg: format!("duplicate channel `{name}`") });
            }
        }
        let get = |i: usize| values[i].ok_or_else(|| Error::MissingChannel(CHANNELS[i].to_string()));
        let params = TbParams {
            e_s: get(0)?,
            e_sstar: get(1)?,
            e_p: get(2)?,
            e_d: get(3)?,
            ss_sigma: get(4)?,
            sstar_sstar_sigma: get(5)?,
            s_sstar_sigma: get(6)?,
            sp_sigma: get(7)?,
            sstar_p_sigma: get(8)?,
            sd_sigma: get(9)?,
            sstar_d_sigma: get(10)?,
            pp_sigma: get(11)?,
            pp_pi: get(12)?,
            pd_sigma: get(13)?,
            pd_pi: get(14)?,
            dd_sigma: get(15)?,
            dd_pi: get(16)?,
            dd_delta: get(17)?,
            so_lambda_p: get(18)?,
        };
        if params.so_lambda_p < 0.0 {
            return Err(Error::InvalidCrystal("so_lambda_p must be non-negative".into()));
        }
        Ok(params)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Table text in canonical channel order; `parse` round-trips it.
    pub fn to_table(&self) -> String {
        CHANNELS
            .iter()
            .zip(self.values())
            .map(|(name, v)| format!("{name} {v:?}\n"))
            .collect()
    }

    fn values(&self) -> [f64; 19] {
        [
            self.e_s,
            self.e_sstar,
            self.e_p,
            self.e_d,
            self.ss_sigma,
            self.sstar_sstar_sigma,
            self.s_sstar_sigma,
            self.sp_sigma,
            self.sstar_p_sigma,
            self.sd_sigma,
            self.sstar_d_sigma,
            self.pp_sigma,
            self.pp_pi,
            self.pd_sigma,
            self.pd_pi,
            self.dd_sigma,
            self.dd_pi,
            self.dd_delta,
            self.so_lambda_p,
        ]
    }

    /// On-site energies per orbital in basis order.
    pub fn onsite_energies(&self) -> [f64; 10] {
        let (s, ss, p, d) = (self.e_s, self.e_sstar, self.e_p, self.e_d);
        [s, ss, p, p, p, d, d, d, d, d]
    }
}

/// Conduction-valley family of the host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValleyFamily {
    /// Six valleys along ±⟨100⟩ (Si-type).
    SixValley100,
    /// Four valleys at the ⟨111⟩ zone-boundary points (Ge-type).
    FourValley111,
}

impl ValleyFamily {
    /// Valley axes: each axis is a unit vector; ±⟨111⟩ pairs share one
    /// valley since they differ by a reciprocal lattice vector.
    pub fn axes(self) -> Vec<[f64; 3]> {
        match self {
            ValleyFamily::SixValley100 => vec![
                [1.0, 0.0, 0.0],
                [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
            ],
            ValleyFamily::FourValley111 => {
                let r = 1.0 / 3f64.sqrt();
                vec![[r, r, r], [r, -r, -r], [-r, r, -r], [-r, -r, r]]
            }
        }
    }

    pub fn labels(self) -> Vec<&'static str> {
        match self {
            ValleyFamily::SixValley100 => vec!["+x", "-x", "+y", "-y", "+z", "-z"],
            ValleyFamily::FourValley111 => vec!["[111]", "[1-1-1]", "[-11-1]", "[-1-11]"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub species_name: String,
    /// Conventional cubic lattice constant, nm.
    pub lattice_constant: f64,
    pub valley_family: ValleyFamily,
    pub valley_axes: Vec<[f64; 3]>,
    pub params: TbParams,
    pub dielectric_constant: f64,
    /// Donor ground-state binding energy relative to the conduction edge, eV (< 0).
    pub target_binding_energy: f64,
    /// Energy added to each dangling sp3 hybrid of a surface atom, eV.
    pub passivation_shift: f64,
}

pub const SILICON_TABLE: &str = include_str!("../data/si.tb");
pub const GERMANIUM_TABLE: &str = include_str!("../data/ge.tb");

impl CrystalSpec {
    /// Si host with a P donor: six ⟨100⟩ valleys, ε = 11.9, binding −45.6 meV.
    pub fn silicon() -> Self {
        let family = ValleyFamily::SixValley100;
        CrystalSpec {
            species_name: "Si".into(),
            lattice_constant: 0.5431,
            valley_family: family,
            valley_axes: family.axes(),
            params: TbParams::parse(SILICON_TABLE).expect("builtin Si table"),
            dielectric_constant: 11.9,
            target_binding_energy: -0.0456,
            passivation_shift: 5.0,
        }
    }

    /// Ge host with a P donor: four ⟨111⟩ valleys, ε = 16.0, binding −12.8 meV.
    pub fn germanium() -> Self {
        let family = ValleyFamily::FourValley111;
        CrystalSpec {
            species_name: "Ge".into(),
            lattice_constant: 0.5658,
            valley_family: family,
            valley_axes: family.axes(),
            params: TbParams::parse(GERMANIUM_TABLE).expect("builtin Ge table"),
            dielectric_constant: 16.0,
            target_binding_energy: -0.0128,
            passivation_shift: 5.0,
        }
    }

    /// Preset by species name (`Si` or `Ge`, case-insensitive).
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "si" | "silicon" => Some(Self::silicon()),
            "ge" | "germanium" => Some(Self::germanium()),
            _ => None,
        }
    }

    pub fn with_params(mut self, params: TbParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_spin_orbit(mut self, lambda: f64) -> Self {
        self.params.so_lambda_p = lambda;
        self
    }

    /// Nearest-neighbour distance √3·a/4, nm.
    pub fn bond_length(&self) -> f64 {
        3f64.sqrt() * self.lattice_constant / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        let want = match self.valley_family {
            ValleyFamily::SixValley100 => 6,
            ValleyFamily::FourValley111 => 4,
        };
        if self.valley_axes.len() != want {
            return Err(Error::InvalidCrystal(format!(
                "{} valley axes given, {:?} requires {want}",
                self.valley_axes.len(),
                self.valley_family
            )));
        }
        for axis in &self.valley_axes {
            let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidCrystal(format!("valley axis {axis:?} is not a unit vector")));
            }
        }
        if !(self.lattice_constant > 0.0) {
            return Err(Error::InvalidCrystal("lattice constant must be positive".into()));
        }
        if !(self.dielectric_constant > 0.0) {
            return Err(Error::InvalidCrystal("dielectric constant must be positive".into()));
        }
        if !(self.target_binding_energy < 0.0) {
            return Err(Error::InvalidCrystal("target binding energy must be negative".into()));
        }
        if self.params.so_lambda_p < 0.0 {
            return Err(Error::InvalidCrystal("so_lambda_p must be non-negative".into()));
        }
        Ok(())
    }
}
