//! Retransmission delay per hop and end-to-end composition.
//!
//! Each hop retransmits until success (ARQ), so the expected number of
//! attempts is `1/p` and the expected hop delay is `(payload / rate) / p`.
//! The pedestrian and vehicle hops run in parallel and feed the same base
//! station, so the chain delay is `max(T_ped, T_veh) + T_bs` and the chain
//! success probability is the product over the three hops.
//!
//! Sizes and rates use decimal SI prefixes: 1 KB = 10^3 bytes, 1 GB = 10^9 bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Success probabilities at or below this are treated as an unreachable link.
pub const P_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DelayError {
    #[error("unreachable link: success probability {0:e} is at or below {P_FLOOR:e}")]
    UnreachableLink(f64),
    #[error("success probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("invalid delay parameters: {0}")]
    InvalidParams(String),
}

/// Payload size and processing rate of one hop's transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayParams {
    /// Bytes per message.
    pub payload_bytes: f64,
    /// Bytes processed per second.
    pub rate_bytes_per_s: f64,
}

impl DelayParams {
    pub fn new(payload_bytes: f64, rate_bytes_per_s: f64) -> Result<Self, DelayError> {
        let d = Self {
            payload_bytes,
            rate_bytes_per_s,
        };
        d.validate()?;
        Ok(d)
    }

    /// Payload in KB and rate in GB/s.
    pub fn from_kb_and_gb_per_s(payload_kb: f64, rate_gb_per_s: f64) -> Result<Self, DelayError> {
        Self::new(payload_kb * 1e3, rate_gb_per_s * 1e9)
    }

    pub fn validate(&self) -> Result<(), DelayError> {
        if !(self.payload_bytes.is_finite() && self.payload_bytes > 0.0) {
            return Err(DelayError::InvalidParams(format!(
                "payload_bytes must be positive, got {}",
                self.payload_bytes
            )));
        }
        if !(self.rate_bytes_per_s.is_finite() && self.rate_bytes_per_s > 0.0) {
            return Err(DelayError::InvalidParams(format!(
                "rate_bytes_per_s must be positive, got {}",
                self.rate_bytes_per_s
            )));
        }
        Ok(())
    }
}

/// Default processing parameters of the three hops.
pub mod table_one {
    use super::DelayParams;

    pub const PEDESTRIAN: DelayParams = DelayParams {
        payload_bytes: 5e3,
        rate_bytes_per_s: 2e9,
    };
    pub const VEHICLE: DelayParams = DelayParams {
        payload_bytes: 5e3,
        rate_bytes_per_s: 4e9,
    };
    pub const BASE_STATION: DelayParams = DelayParams {
        payload_bytes: 10e3,
        rate_bytes_per_s: 8e9,
    };
}

/// Success probabilities and expected delays of the whole chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainResult {
    pub p_us: f64,
    pub p_vs: f64,
    pub p_bs: f64,
    /// Pedestrian, vehicle and base-station hop delays in seconds.
    pub t_u: f64,
    pub t_v: f64,
    pub t_bs: f64,
    pub p_s: f64,
    pub t_total: f64,
}

/// Expected ARQ attempts until the first success.
pub fn expected_transmissions(p: f64) -> Result<f64, DelayError> {
    if p.is_nan() || p > 1.0 {
        return Err(DelayError::InvalidProbability(p));
    }
    if p <= P_FLOOR {
        return Err(DelayError::UnreachableLink(p));
    }
    Ok(1.0 / p)
}

/// Time to process one message, in seconds.
pub fn processing_time(d: &DelayParams) -> f64 {
    d.payload_bytes / d.rate_bytes_per_s
}

/// Expected time for one hop to deliver a message.
pub fn tier_delay(p: f64, d: &DelayParams) -> Result<f64, DelayError> {
    Ok(processing_time(d) * expected_transmissions(p)?)
}

pub fn end_to_end(
    p_us: f64,
    p_vs: f64,
    p_bs: f64,
    d_u: &DelayParams,
    d_v: &DelayParams,
    d_bs: &DelayParams,
) -> Result<ChainResult, DelayError> {
    let t_u = tier_delay(p_us, d_u)?;
    let t_v = tier_delay(p_vs, d_v)?;
    let t_bs = tier_delay(p_bs, d_bs)?;
    Ok(ChainResult {
        p_us,
        p_vs,
        p_bs,
        t_u,
        t_v,
        t_bs,
        p_s: p_us * p_vs * p_bs,
        t_total: t_u.max(t_v) + t_bs,
    })
}

#[cfg(test)]
mod tests {
    use super::table_one::*;
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15 * b.abs().max(1e-300)
    }

    #[test]
    fn attempts() {
        assert_eq!(expected_transmissions(1.0).unwrap(), 1.0);
        assert_eq!(expected_transmissions(0.5).unwrap(), 2.0);
        assert_eq!(
            expected_transmissions(1e-10),
            Err(DelayError::UnreachableLink(1e-10))
        );
        assert!(matches!(
            expected_transmissions(0.0),
            Err(DelayError::UnreachableLink(_))
        ));
        assert!(matches!(
            expected_transmissions(1.5),
            Err(DelayError::InvalidProbability(_))
        ));
        assert!(expected_transmissions(f64::NAN).is_err());
    }

    #[test]
    fn processing_uses_decimal_units() {
        assert!(close(processing_time(&PEDESTRIAN), 2.5e-6));
        assert!(close(processing_time(&BASE_STATION), 1.25e-6));
        let d = DelayParams::from_kb_and_gb_per_s(5.0, 2.0).unwrap();
        assert_eq!(d, PEDESTRIAN);
        assert_eq!(processing_time(&DelayParams::new(3e6, 3e6).unwrap()), 1.0);
    }

    #[test]
    fn hop_delays() {
        assert!(close(tier_delay(1.0, &PEDESTRIAN).unwrap(), 2.5e-6));
        assert!(close(tier_delay(0.5, &PEDESTRIAN).unwrap(), 5e-6));
        assert!(close(tier_delay(0.25, &BASE_STATION).unwrap(), 5e-6));
    }

    #[test]
    fn chain() {
        let r = end_to_end(1.0, 1.0, 1.0, &PEDESTRIAN, &VEHICLE, &BASE_STATION).unwrap();
        assert_eq!(r.p_s, 1.0);
        assert!(close(r.t_total, 3.75e-6));
        let r = end_to_end(0.5, 0.5, 0.5, &PEDESTRIAN, &VEHICLE, &BASE_STATION).unwrap();
        assert_eq!(r.p_s, 0.125);
        assert!(close(r.t_total, 7.5e-6));
    }

    #[test]
    fn chain_propagates_unreachable_hop() {
        let r = end_to_end(1.0, 0.0, 1.0, &PEDESTRIAN, &VEHICLE, &BASE_STATION);
        assert!(matches!(r, Err(DelayError::UnreachableLink(_))));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(DelayParams::new(0.0, 1.0).is_err());
        assert!(DelayParams::new(1.0, f64::INFINITY).is_err());
    }
}
