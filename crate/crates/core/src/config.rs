//! TOML run configuration.
//!
//! Quantities are plain numbers in SI units or strings with a unit suffix:
//! `"-0.66 um"`, `"60us"`, `"1.1 cm/s"`. Suffixes are applied by shifting
//! the decimal exponent, so `"0.1 um"` parses to exactly the same double as
//! `1e-7`.
//!
//! ```toml
//! preset = "fig3"            # start from a built-in preset (optional)
//! methods = ["grid", "kernel", "eq9"]
//! workers = 2
//! output_dir = "out"
//!
//! [packet]
//! x0 = "-0.66 um"
//! v0 = "1.1 cm/s"
//! delta_x = "0.1 um"
//!
//! [pulse]
//! t_center = "60 us"
//! tau_range = { start = "0.01 us", stop = "5 us", count = 40, spacing = "log" }
//! position_tau = "1 us"
//!
//! [scan]
//! x_range = { start = "-0.9 um", stop = "0.9 um", count = 81 }
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::{default_positions, linspace, log_spaced, ExperimentPreset, Method};
use crate::units::Constants;
use crate::wavepacket::GaussianPacket;

/// Physical dimension of a configured quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Velocity,
}

impl Dimension {
    fn units(&self) -> &'static [(&'static str, i32)] {
        match self {
            Dimension::Length => &[
                ("m", 0),
                ("cm", -2),
                ("mm", -3),
                ("um", -6),
                ("μm", -6),
                ("nm", -9),
            ],
            Dimension::Time => &[("s", 0), ("ms", -3), ("us", -6), ("μs", -6), ("ns", -9)],
            Dimension::Velocity => &[
                ("m/s", 0),
                ("cm/s", -2),
                ("mm/s", -3),
                ("um/s", -6),
                ("μm/s", -6),
            ],
        }
    }
}

/// Number or number-with-unit as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    /// Value in SI units.
    pub fn si(&self, dim: Dimension) -> Result<f64> {
        match self {
            Quantity::Number(v) => Ok(*v),
            Quantity::Text(s) => parse_quantity(s, dim),
        }
    }
}

/// Parses `"<number>[ ]<unit>"` or a bare number into SI units.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let s = text.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            c.is_alphabetic()
                && !((c == 'e' || c == 'E')
                    && s[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+'))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, unit) = (s[..split].trim(), s[split..].trim());
    let bad = || {
        let names: Vec<&str> = dim.units().iter().map(|u| u.0).collect();
        Error::Config(format!(
            "cannot parse '{text}' as a quantity; units: {}",
            names.join(", ")
        ))
    };
    let shift = if unit.is_empty() {
        0
    } else {
        dim.units().iter().find(|u| u.0 == unit).ok_or_else(bad)?.1
    };
    let (mantissa, exp) = match num.find(['e', 'E']) {
        Some(i) => (&num[..i], num[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (num, 0),
    };
    if mantissa.is_empty() || mantissa.parse::<f64>().is_err() {
        return Err(bad());
    }
    let v: f64 = format!("{mantissa}e{}", exp + shift)
        .parse()
        .map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

/// Evenly spaced list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: Quantity,
    pub stop: Quantity,
    pub count: usize,
    /// `"linear"` (default) or `"log"`.
    #[serde(default)]
    pub spacing: Option<String>,
}

impl RangeSpec {
    fn values(&self, dim: Dimension, field: &str) -> Result<Vec<f64>> {
        let (a, b) = (self.start.si(dim)?, self.stop.si(dim)?);
        if self.count == 0 {
            return Err(Error::Config(format!("{field}: count must be positive")));
        }
        match self.spacing.as_deref().unwrap_or("linear") {
            "linear" => Ok(linspace(a, b, self.count)),
            "log" if a > 0.0 && b > 0.0 => Ok(log_spaced(a, b, self.count)),
            "log" => Err(Error::Config(format!(
                "{field}: log spacing needs positive bounds"
            ))),
            other => Err(Error::Config(format!("{field}: unknown spacing '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSection {
    pub x0: Option<Quantity>,
    pub v0: Option<Quantity>,
    pub delta_x: Option<Quantity>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub t_center: Option<Quantity>,
    pub tau: Option<Vec<Quantity>>,
    pub tau_range: Option<RangeSpec>,
    pub position_tau: Option<Quantity>,
    pub tau_scan_mirror: Option<Quantity>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub x_m: Option<Vec<Quantity>>,
    pub x_range: Option<RangeSpec>,
}

/// The file as written.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<String>,
    /// Identifier written into outputs; defaults to the preset name.
    pub name: Option<String>,
    pub atom: Option<String>,
    pub methods: Option<Vec<String>>,
    pub workers: Option<usize>,
    pub output_dir: Option<String>,
    #[serde(default)]
    pub packet: PacketSection,
    #[serde(default)]
    pub pulse: PulseSection,
    #[serde(default)]
    pub scan: ScanSection,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: ExperimentPreset,
    /// Worker threads; 0 means automatic.
    pub workers: usize,
    pub output_dir: PathBuf,
}

fn field<T>(v: Result<T>, name: &str) -> Result<T> {
    v.map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{name}: {m}")),
        other => Error::Config(format!("{name}: {other}")),
    })
}

impl RunConfig {
    /// Resolves a raw configuration; `fallback` names the preset used when
    /// the file neither names one nor defines a packet.
    pub fn resolve(raw: &RawConfig, fallback: &str, constants: &Constants) -> Result<Self> {
        let base_name = raw.preset.as_deref().unwrap_or(fallback);
        let has_packet =
            raw.packet.x0.is_some() || raw.packet.v0.is_some() || raw.packet.delta_x.is_some();
        let mut p = if raw.preset.is_none() && has_packet {
            // fully custom: every packet field and the pulse centre are needed
            let need = |q: &Option<Quantity>, name: &str| {
                q.clone()
                    .ok_or_else(|| Error::Config(format!("{name} is required without a preset")))
            };
            need(&raw.packet.x0, "packet.x0")?;
            need(&raw.packet.v0, "packet.v0")?;
            need(&raw.packet.delta_x, "packet.delta_x")?;
            need(&raw.pulse.t_center, "pulse.t_center")?;
            let mut p = ExperimentPreset::fig3();
            p.id = "custom".into();
            p
        } else {
            ExperimentPreset::by_name(base_name)?
        };
        if let Some(a) = &raw.atom {
            p.atom = field(constants.atom(a), "atom")?;
        }
        let q = |v: &Option<Quantity>, d, name: &str| -> Result<Option<f64>> {
            v.as_ref().map(|v| field(v.si(d), name)).transpose()
        };
        let mut packet = p.packet;
        let mut packet_changed = false;
        if let Some(v) = q(&raw.packet.x0, Dimension::Length, "packet.x0")? {
            packet.x0 = v;
            packet_changed = true;
        }
        if let Some(v) = q(&raw.packet.v0, Dimension::Velocity, "packet.v0")? {
            packet.v0 = v;
            packet_changed = true;
        }
        if let Some(v) = q(&raw.packet.delta_x, Dimension::Length, "packet.delta_x")? {
            packet.delta_x = v;
            packet_changed = true;
        }
        field(packet.validate(), "packet")?;
        p.packet = packet;
        let mut t_changed = false;
        if let Some(t) = q(&raw.pulse.t_center, Dimension::Time, "pulse.t_center")? {
            p.t_center = t;
            t_changed = true;
        }
        // derived defaults follow the packet and the pulse centre
        if packet_changed || t_changed || raw.atom.is_some() {
            p.xm_list = default_positions(&p.packet, &p.atom, p.t_center);
            p.tau_scan_mirror = p.packet.mean_at(p.t_center);
        }
        match (&raw.pulse.tau, &raw.pulse.tau_range) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("pulse: give either tau or tau_range".into()))
            }
            (Some(list), None) => {
                p.tau_list = list
                    .iter()
                    .map(|v| field(v.si(Dimension::Time), "pulse.tau"))
                    .collect::<Result<_>>()?;
            }
            (None, Some(r)) => p.tau_list = r.values(Dimension::Time, "pulse.tau_range")?,
            (None, None) => {}
        }
        if let Some(v) = q(
            &raw.pulse.position_tau,
            Dimension::Time,
            "pulse.position_tau",
        )? {
            p.position_tau = v;
        }
        if let Some(v) = q(
            &raw.pulse.tau_scan_mirror,
            Dimension::Length,
            "pulse.tau_scan_mirror",
        )? {
            p.tau_scan_mirror = v;
        }
        match (&raw.scan.x_m, &raw.scan.x_range) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("scan: give either x_m or x_range".into()))
            }
            (Some(list), None) => {
                p.xm_list = list
                    .iter()
                    .map(|v| field(v.si(Dimension::Length), "scan.x_m"))
                    .collect::<Result<_>>()?;
            }
            (None, Some(r)) => p.xm_list = r.values(Dimension::Length, "scan.x_range")?,
            (None, None) => {}
        }
        if let Some(m) = &raw.methods {
            p.methods = m
                .iter()
                .map(|s| Method::parse(s))
                .collect::<Result<BTreeSet<_>>>()?;
        }
        if let Some(n) = &raw.name {
            p.id = n.clone();
        }
        field(p.validate(), "config")?;
        Ok(RunConfig {
            preset: p,
            workers: raw.workers.unwrap_or(0),
            output_dir: PathBuf::from(raw.output_dir.as_deref().unwrap_or(".")),
        })
    }

    pub fn from_toml(text: &str, fallback: &str) -> Result<Self> {
        Self::resolve(
            &RawConfig::from_toml(text)?,
            fallback,
            &Constants::default(),
        )
    }

    /// Raw form with every value explicit in SI units; reading it back
    /// reproduces this configuration exactly.
    pub fn to_raw(&self) -> RawConfig {
        let p = &self.preset;
        let nums = |v: &[f64]| Some(v.iter().map(|&x| Quantity::Number(x)).collect());
        RawConfig {
            preset: ExperimentPreset::NAMES
                .contains(&p.id.as_str())
                .then(|| p.id.clone()),
            name: Some(p.id.clone()),
            atom: Some(p.atom.name.clone()),
            methods: Some(p.methods.iter().map(|m| m.as_str().to_string()).collect()),
            workers: Some(self.workers),
            output_dir: Some(self.output_dir.to_string_lossy().into_owned()),
            packet: PacketSection {
                x0: Some(Quantity::Number(p.packet.x0)),
                v0: Some(Quantity::Number(p.packet.v0)),
                delta_x: Some(Quantity::Number(p.packet.delta_x)),
            },
            pulse: PulseSection {
                t_center: Some(Quantity::Number(p.t_center)),
                tau: nums(&p.tau_list),
                tau_range: None,
                position_tau: Some(Quantity::Number(p.position_tau)),
                tau_scan_mirror: Some(Quantity::Number(p.tau_scan_mirror)),
            },
            scan: ScanSection {
                x_m: nums(&p.xm_list),
                x_range: None,
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_raw()).expect("config serializes")
    }

    /// Packet of the resolved configuration.
    pub fn packet(&self) -> &GaussianPacket {
        &self.preset.packet
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_suffixes() {
        assert_eq!(
            parse_quantity("-0.66 um", Dimension::Length).unwrap(),
            -0.66e-6
        );
        assert_eq!(parse_quantity("60us", Dimension::Time).unwrap(), 60e-6);
        assert_eq!(
            parse_quantity("1.1 cm/s", Dimension::Velocity).unwrap(),
            0.011
        );
        assert_eq!(
            parse_quantity("1.5e3 nm", Dimension::Length).unwrap(),
            1.5e-6
        );
        assert_eq!(parse_quantity("2e-3", Dimension::Time).unwrap(), 2e-3);
        assert_eq!(parse_quantity("12 mm", Dimension::Length).unwrap(), 12e-3);
        assert!(parse_quantity("3 furlongs", Dimension::Length).is_err());
        assert!(parse_quantity("1 cm/s", Dimension::Length).is_err());
        assert!(parse_quantity("um", Dimension::Length).is_err());
    }

    #[test]
    fn preset_from_file_matches_builtin() {
        let text = r#"
            [packet]
            x0 = "-0.66 um"
            v0 = "1.1 cm/s"
            delta_x = "0.1 um"
            [pulse]
            t_center = "60 us"
            tau_range = { start = "0.01 us", stop = "5 us", count = 40, spacing = "log" }
        "#;
        let c = RunConfig::from_toml(text, "fig3").unwrap();
        let f = ExperimentPreset::fig3();
        assert_eq!(c.preset.packet, f.packet);
        assert_eq!(c.preset.tau_list, f.tau_list);
        assert_eq!(c.preset.xm_list, f.xm_list);
    }

    #[test]
    fn round_trip_is_exact() {
        let c = RunConfig::from_toml("preset = \"fig5\"\nworkers = 3\n", "fig3").unwrap();
        let back = RunConfig::from_toml(&c.to_toml(), "fig3").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_toml("preset = \"fig3\"\n[packet]\nx0 = \"1 parsec\"\n", "fig3")
            .unwrap_err();
        assert!(e.to_string().contains("packet.x0"), "{e}");
        let e = RunConfig::from_toml("presett = \"fig3\"\n", "fig3").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = RunConfig::from_toml("preset = \"nope\"\n", "fig3").unwrap_err();
        assert!(e.to_string().contains("fig3, fig4, fig5"), "{e}");
    }
}
