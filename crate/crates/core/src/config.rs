//! TOML configuration file.
//!
//! ```toml
//! [network]
//! nodes = 100
//! width = 100.0
//! height = 100.0
//! initial_energy = 0.5
//!
//! [election]
//! p = 0.05
//! per_area_cap = 2        # default ceil(nodes * p / 4)
//!
//! [radio]
//! e_elec = 50e-9
//! e_amp = 100e-12
//! e_da = 5e-9
//! bs_x = 50.0             # default width / 2
//! bs_y = 150.0            # default height + 50
//!
//! [packets]
//! k = 2000
//! ctrl_bits = 200
//!
//! [simulation]
//! protocol = "qleach"
//! max_rounds = 5000
//! seed = 0
//! ```
//!
//! Every key is optional. Overrides use `section.key=value`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::SimulationConfig;
use crate::error::{Error, Result};
use crate::model::{FieldSpec, Position};
use crate::protocols::{default_cap, ElectionParams, ProtocolKind};
use crate::radio::{PacketSpec, RadioModel, DEFAULT_E_AMP, DEFAULT_E_DA, DEFAULT_E_ELEC};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub election: ElectionSection,
    #[serde(default)]
    pub radio: RadioSection,
    #[serde(default)]
    pub packets: PacketsSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub nodes: Option<usize>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub initial_energy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectionSection {
    pub p: Option<f64>,
    pub per_area_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub e_elec: Option<f64>,
    pub e_amp: Option<f64>,
    pub e_da: Option<f64>,
    pub bs_x: Option<f64>,
    pub bs_y: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketsSection {
    pub k: Option<u64>,
    pub ctrl_bits: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub protocol: Option<String>,
    pub max_rounds: Option<u64>,
    pub seed: Option<u64>,
}

/// Outcome of resolving a config file: the effective configuration when
/// every check passed, every violation otherwise, plus advisory warnings.
#[derive(Debug)]
pub struct Resolved {
    pub config: Option<SimulationConfig>,
    pub errors: Vec<Error>,
    pub warnings: Vec<String>,
}

impl Resolved {
    pub fn into_result(self) -> Result<SimulationConfig> {
        match (self.config, self.errors.into_iter().next()) {
            (Some(c), None) => Ok(c),
            (_, Some(e)) => Err(e),
            (None, None) => unreachable!("resolution yields a config or an error"),
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses `text` after applying `section.key=value` overrides.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        check_schema(&mut table)?;
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message()))
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn resolve(&self) -> Resolved {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        let base = SimulationConfig::default();

        let n_nodes = self.network.nodes.unwrap_or(base.n_nodes);
        if n_nodes == 0 {
            errors.push(Error::config("network.nodes", "must be >= 1"));
        }
        let field = FieldSpec {
            width: self.network.width.unwrap_or(base.field.width),
            height: self.network.height.unwrap_or(base.field.height),
        };
        if let Err(e) = field.validate() {
            errors.push(e);
        }
        let initial_energy = self.network.initial_energy.unwrap_or(base.initial_energy);
        if !(initial_energy.is_finite() && initial_energy > 0.0) {
            errors.push(Error::config(
                "network.initial_energy",
                format!("must be > 0, got {initial_energy}"),
            ));
        }

        let p = self.election.p.unwrap_or(base.election.p);
        let p_ok = p > 0.0 && p < 1.0;
        if !p_ok {
            errors.push(Error::config(
                "election.p",
                format!("must lie in (0, 1), got {p}"),
            ));
        }
        let cap = self.election.per_area_cap.unwrap_or_else(|| {
            if p_ok {
                default_cap(p, n_nodes)
            } else {
                1
            }
        });
        if cap == 0 {
            errors.push(Error::config("election.per_area_cap", "must be >= 1"));
        } else if p_ok && ((4 * cap) as f64) < n_nodes as f64 * p {
            warnings.push(format!(
                "election.per_area_cap = {cap} allows at most {} heads per round, below the expected nodes*p = {:.2}",
                4 * cap,
                n_nodes as f64 * p
            ));
        }

        let radio = RadioModel {
            e_elec: self.radio.e_elec.unwrap_or(DEFAULT_E_ELEC),
            e_amp: self.radio.e_amp.unwrap_or(DEFAULT_E_AMP),
            e_da: self.radio.e_da.unwrap_or(DEFAULT_E_DA),
            bs_position: Position::new(
                self.radio.bs_x.unwrap_or(field.width / 2.0),
                self.radio.bs_y.unwrap_or(field.height + 50.0),
            ),
        };
        if let Err(e) = radio.validate() {
            errors.push(e);
        }
        if field.validate().is_ok() && field.contains(radio.bs_position) {
            warnings.push(format!(
                "base station ({}, {}) lies inside the field",
                radio.bs_position.x, radio.bs_position.y
            ));
        }

        let packets = PacketSpec {
            k: self.packets.k.unwrap_or(base.packets.k),
            ctrl_bits: self.packets.ctrl_bits.unwrap_or(base.packets.ctrl_bits),
        };
        if let Err(e) = packets.validate() {
            errors.push(e);
        }

        let protocol = match self.simulation.protocol.as_deref() {
            None => Some(base.protocol),
            Some(name) => match name.parse::<ProtocolKind>() {
                Ok(k) => Some(k),
                Err(e) => {
                    errors.push(e);
                    None
                }
            },
        };
        let max_rounds = self.simulation.max_rounds.unwrap_or(base.max_rounds);
        if max_rounds == 0 {
            errors.push(Error::config("simulation.max_rounds", "must be >= 1"));
        }
        let seed = self.simulation.seed.unwrap_or(base.seed);

        let config = match (errors.is_empty(), protocol, ElectionParams::new(p, cap)) {
            (true, Some(protocol), Ok(election)) => Some(SimulationConfig {
                n_nodes,
                field,
                initial_energy,
                election,
                radio,
                packets,
                protocol,
                max_rounds,
                seed,
            }),
            _ => None,
        };
        Resolved {
            config,
            errors,
            warnings,
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Int,
    Float,
    Str,
}

const SCHEMA: &[(&str, &[(&str, Kind)])] = &[
    (
        "network",
        &[
            ("nodes", Kind::Int),
            ("width", Kind::Float),
            ("height", Kind::Float),
            ("initial_energy", Kind::Float),
        ],
    ),
    (
        "election",
        &[("p", Kind::Float), ("per_area_cap", Kind::Int)],
    ),
    (
        "radio",
        &[
            ("e_elec", Kind::Float),
            ("e_amp", Kind::Float),
            ("e_da", Kind::Float),
            ("bs_x", Kind::Float),
            ("bs_y", Kind::Float),
        ],
    ),
    ("packets", &[("k", Kind::Int), ("ctrl_bits", Kind::Int)]),
    (
        "simulation",
        &[
            ("protocol", Kind::Str),
            ("max_rounds", Kind::Int),
            ("seed", Kind::Int),
        ],
    ),
];

/// Rejects unknown keys and mistyped values by name; widens integers in float fields.
fn check_schema(table: &mut toml::Table) -> Result<()> {
    for (section, value) in table.iter_mut() {
        let Some((_, fields)) = SCHEMA.iter().find(|(name, _)| name == section) else {
            return Err(Error::config(section.as_str(), "unknown section"));
        };
        let toml::Value::Table(entries) = value else {
            return Err(Error::config(section.as_str(), "expected a [section]"));
        };
        for (key, v) in entries.iter_mut() {
            let field = format!("{section}.{key}");
            let Some(&(_, kind)) = fields.iter().find(|(name, _)| name == key) else {
                return Err(Error::config(field, "unknown key"));
            };
            match (kind, &*v) {
                (Kind::Int, toml::Value::Integer(i)) if *i < 0 => {
                    return Err(Error::config(field, format!("must be >= 0, got {i}")));
                }
                (Kind::Int, toml::Value::Integer(_))
                | (Kind::Float, toml::Value::Float(_))
                | (Kind::Str, toml::Value::String(_)) => {}
                (Kind::Float, toml::Value::Integer(i)) => *v = toml::Value::Float(*i as f64),
                (kind, other) => {
                    let want = match kind {
                        Kind::Int => "an integer",
                        Kind::Float => "a number",
                        Kind::Str => "a string",
                    };
                    return Err(Error::config(
                        field,
                        format!("expected {want}, got {}", other.type_str()),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "override must look like section.key=value"))?;
    let (section, field) = key
        .trim()
        .split_once('.')
        .ok_or_else(|| Error::config(key, "override key must look like section.key"))?;
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(Error::config(section, "is not a section")),
    }
}

/// Resolved configuration rendered back to the file format.
pub fn render(cfg: &SimulationConfig) -> String {
    let file = ConfigFile {
        network: NetworkSection {
            nodes: Some(cfg.n_nodes),
            width: Some(cfg.field.width),
            height: Some(cfg.field.height),
            initial_energy: Some(cfg.initial_energy),
        },
        election: ElectionSection {
            p: Some(cfg.election.p),
            per_area_cap: Some(cfg.election.per_area_cap),
        },
        radio: RadioSection {
            e_elec: Some(cfg.radio.e_elec),
            e_amp: Some(cfg.radio.e_amp),
            e_da: Some(cfg.radio.e_da),
            bs_x: Some(cfg.radio.bs_position.x),
            bs_y: Some(cfg.radio.bs_position.y),
        },
        packets: PacketsSection {
            k: Some(cfg.packets.k),
            ctrl_bits: Some(cfg.packets.ctrl_bits),
        },
        simulation: SimulationSection {
            protocol: Some(cfg.protocol.name().to_string()),
            max_rounds: Some(cfg.max_rounds),
            seed: Some(cfg.seed),
        },
    };
    toml::to_string(&file).expect("config serializes")
}

/// SHA-256 (hex, first 16 chars) over the rendered configs, seeds and RNG name.
pub fn fingerprint(configs: &[SimulationConfig], seeds: &[u64]) -> String {
    let mut h = Sha256::new();
    for c in configs {
        h.update(render(c).as_bytes());
    }
    for s in seeds {
        h.update(s.to_le_bytes());
    }
    h.update(crate::rng::RNG_ALGORITHM.as_bytes());
    h.finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_scenario() {
        let cfg = ConfigFile::parse("")
            .unwrap()
            .resolve()
            .into_result()
            .unwrap();
        assert_eq!(cfg, SimulationConfig::default());
        assert_eq!(cfg.radio.bs_position, Position::new(50.0, 150.0));
        assert_eq!(cfg.election.per_area_cap, 2);
    }

    #[test]
    fn render_round_trips() {
        let cfg = SimulationConfig {
            seed: 99,
            protocol: ProtocolKind::Leach,
            ..SimulationConfig::default()
        };
        let back = ConfigFile::parse(&render(&cfg))
            .unwrap()
            .resolve()
            .into_result()
            .unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_probability_names_field_and_range() {
        let r = ConfigFile::parse("[election]\np = 1.5\n")
            .unwrap()
            .resolve();
        assert!(r.config.is_none());
        let msg = r.errors[0].to_string();
        assert!(
            msg.contains("election.p") && msg.contains("(0, 1)"),
            "{msg}"
        );
    }

    #[test]
    fn zero_cap_rejected() {
        let r = ConfigFile::parse("[election]\nper_area_cap = 0\n")
            .unwrap()
            .resolve();
        assert!(r
            .errors
            .iter()
            .any(|e| e.to_string().contains("per_area_cap")));
    }

    #[test]
    fn every_violation_is_reported() {
        let r = ConfigFile::parse(
            "[election]\np = 0\nper_area_cap = 0\n[simulation]\nmax_rounds = 0\n",
        )
        .unwrap()
        .resolve();
        assert_eq!(r.errors.len(), 3);
    }

    #[test]
    fn unknown_key_is_a_field_error() {
        let err = ConfigFile::parse("[radio]\ne_foo = 1.0\n").unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("radio.e_foo"), "{err}");
        let err = ConfigFile::parse("[network]\nnodes = \"many\"\n").unwrap_err();
        assert!(err.to_string().contains("network.nodes"), "{err}");
        let err = ConfigFile::parse("[packets]\nk = -3\n").unwrap_err();
        assert!(err.to_string().contains("packets.k"), "{err}");
    }

    #[test]
    fn out_of_scope_protocol() {
        let r = ConfigFile::parse("[simulation]\nprotocol = \"deec\"\n")
            .unwrap()
            .resolve();
        assert!(matches!(r.errors[0], Error::NotImplemented(_)));
    }

    #[test]
    fn overrides_beat_file_values() {
        let f = ConfigFile::parse_with_overrides(
            "[network]\nnodes = 50\n",
            &[
                "network.nodes=20".into(),
                "simulation.protocol=leach".into(),
                "radio.bs_y=300".into(),
            ],
        )
        .unwrap();
        let cfg = f.resolve().into_result().unwrap();
        assert_eq!(cfg.n_nodes, 20);
        assert_eq!(cfg.protocol, ProtocolKind::Leach);
        assert_eq!(cfg.radio.bs_position.y, 300.0);
        assert!(ConfigFile::parse_with_overrides("", &["nodes".into()]).is_err());
    }

    #[test]
    fn warnings_for_cross_checks() {
        let r = ConfigFile::parse(
            "[election]\nper_area_cap = 1\n[network]\nnodes = 200\n[radio]\nbs_y = 10.0\n",
        )
        .unwrap()
        .resolve();
        assert!(r.errors.is_empty());
        assert_eq!(r.warnings.len(), 2, "{:?}", r.warnings);
    }

    #[test]
    fn bs_default_tracks_field() {
        let cfg = ConfigFile::parse("[network]\nwidth = 200\nheight = 80.0\n")
            .unwrap()
            .resolve()
            .into_result()
            .unwrap();
        assert_eq!(cfg.radio.bs_position, Position::new(100.0, 130.0));
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = SimulationConfig::default();
        let mut b = a.clone();
        b.packets.ctrl_bits = 0;
        let fp = |c: &SimulationConfig, seed| fingerprint(std::slice::from_ref(c), &[seed]);
        assert_eq!(fp(&a, 0), fp(&a, 0));
        assert_ne!(fp(&a, 0), fp(&b, 0));
        assert_ne!(fp(&a, 0), fp(&a, 1));
    }
}
