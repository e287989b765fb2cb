//! First-order radio energy model.
//!
//! Transmitting `b` bits over `d` metres costs `e_elec*b + e_amp*b*d^2`;
//! receiving costs `e_elec*b`; fusing `n` frames of `b` bits costs `e_da*b*n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Position;

pub const DEFAULT_E_ELEC: f64 = 50e-9;
pub const DEFAULT_E_AMP: f64 = 100e-12;
pub const DEFAULT_E_DA: f64 = 5e-9;
pub const DEFAULT_BS_POSITION: Position = Position::new(50.0, 150.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioModel {
    /// Electronics energy, J/bit, paid on both transmit and receive.
    pub e_elec: f64,
    /// Amplifier energy, J/bit/m^2.
    pub e_amp: f64,
    /// Aggregation energy, J/bit per fused signal.
    pub e_da: f64,
    /// Base station location; may lie outside the field.
    pub bs_position: Position,
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioModel {
            e_elec: DEFAULT_E_ELEC,
            e_amp: DEFAULT_E_AMP,
            e_da: DEFAULT_E_DA,
            bs_position: DEFAULT_BS_POSITION,
        }
    }
}

fn non_negative(what: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "{what} must be a finite value >= 0, got {v}"
        )))
    }
}

impl RadioModel {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("radio.e_elec", self.e_elec),
            ("radio.e_amp", self.e_amp),
            ("radio.e_da", self.e_da),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, format!("must be > 0, got {v}")));
            }
        }
        if !(self.bs_position.x.is_finite() && self.bs_position.y.is_finite()) {
            return Err(Error::config(
                "radio.bs_x/bs_y",
                "base station coordinates must be finite",
            ));
        }
        Ok(())
    }

    pub fn tx_cost(&self, bits: u64, distance: f64) -> Result<f64> {
        let d = non_negative("distance", distance)?;
        let b = bits as f64;
        Ok(self.e_elec * b + self.e_amp * b * d * d)
    }

    pub fn rx_cost(&self, bits: u64) -> f64 {
        self.e_elec * bits as f64
    }

    pub fn aggregation_cost(&self, bits: u64, n_signals: usize) -> Result<f64> {
        if n_signals == 0 {
            return Err(Error::Domain(
                "aggregation needs at least one signal".into(),
            ));
        }
        Ok(self.e_da * bits as f64 * n_signals as f64)
    }

    pub fn distance_to_bs(&self, p: Position) -> f64 {
        p.distance(self.bs_position)
    }
}

/// Ranks candidate cluster heads by received advertisement strength.
///
/// Implementations must be strictly decreasing in distance.
pub trait SignalStrength {
    fn rssi(&self, distance: f64) -> f64;
}

/// `1 / (1 + d^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InverseSquare;

impl SignalStrength for InverseSquare {
    fn rssi(&self, distance: f64) -> f64 {
        1.0 / (1.0 + distance * distance)
    }
}

pub fn rssi(distance: f64) -> f64 {
    InverseSquare.rssi(distance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketSpec {
    /// Data packet length in bits.
    pub k: u64,
    /// Advertisement, join and schedule packet length in bits.
    pub ctrl_bits: u64,
}

impl Default for PacketSpec {
    fn default() -> Self {
        PacketSpec {
            k: 2000,
            ctrl_bits: 200,
        }
    }
}

impl PacketSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config(
                "packets.k",
                "data packet length must be >= 1 bit",
            ));
        }
        Ok(())
    }
}
