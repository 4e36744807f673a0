use super::ReckoningError;
use crate::kinematics::{KinematicState, Vec3};

/// Encoded size of an [`EntityStatePdu`] in bytes.
pub const PDU_SIZE: usize = 96;

/// Entity-state update packet.
///
/// Little-endian wire layout: `u32 entity_id`, `u32 sequence`, `f64 send_time`,
/// `3×f64 position`, `3×f64 velocity`, `3×f64 acceleration`, `f64 orientation`.
/// The state timestamp is not carried separately; it equals `send_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntityStatePdu {
    pub entity_id: u32,
    pub sequence: u32,
    pub send_time: f64,
    pub state: KinematicState,
}

impl EntityStatePdu {
    pub fn encode(&self) -> [u8; PDU_SIZE] {
        let mut out = [0u8; PDU_SIZE];
        out[0..4].copy_from_slice(&self.entity_id.to_le_bytes());
        out[4..8].copy_from_slice(&self.sequence.to_le_bytes());
        let reals = self.reals();
        for (i, v) in reals.iter().enumerate() {
            let off = 8 + 8 * i;
            out[off..off + 8].copy_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ReckoningError> {
        if bytes.len() != PDU_SIZE {
            return Err(ReckoningError::Codec(format!(
                "expected {PDU_SIZE} bytes, got {}",
                bytes.len()
            )));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4-byte slice"));
        let f64_at = |i: usize| {
            let o = 8 + 8 * i;
            f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8-byte slice"))
        };
        let v3 = |i: usize| Vec3::new(f64_at(i), f64_at(i + 1), f64_at(i + 2));
        let send_time = f64_at(0);
        Ok(Self {
            entity_id: u32_at(0),
            sequence: u32_at(4),
            send_time,
            state: KinematicState::new(v3(1), v3(4), v3(7), f64_at(10), send_time),
        })
    }

    fn reals(&self) -> [f64; 11] {
        let s = &self.state;
        [
            self.send_time,
            s.position.x,
            s.position.y,
            s.position.z,
            s.velocity.x,
            s.velocity.y,
            s.velocity.z,
            s.acceleration.x,
            s.acceleration.y,
            s.acceleration.z,
            s.orientation,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite() -> impl Strategy<Value = f64> {
        prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL
    }

    proptest! {
        #[test]
        fn codec_round_trip(
            id in any::<u32>(), seq in any::<u32>(), t in finite(),
            v in prop::array::uniform9(finite()), or in finite(),
        ) {
            let pdu = EntityStatePdu {
                entity_id: id,
                sequence: seq,
                send_time: t,
                state: KinematicState::new(
                    Vec3::new(v[0], v[1], v[2]),
                    Vec3::new(v[3], v[4], v[5]),
                    Vec3::new(v[6], v[7], v[8]),
                    or,
                    t,
                ),
            };
            let bytes = pdu.encode();
            prop_assert_eq!(bytes.len(), PDU_SIZE);
            let back = EntityStatePdu::decode(&bytes).unwrap();
            prop_assert_eq!(back.encode(), bytes);
            prop_assert_eq!(back, pdu);
        }
    }

    #[test]
    fn layout_is_little_endian() {
        let pdu = EntityStatePdu {
            entity_id: 0x0102_0304,
            sequence: 7,
            send_time: 1.5,
            state: KinematicState::new(Vec3::new(1.0, 2.0, 3.0), Vec3::ZERO, Vec3::ZERO, -0.25, 1.5),
        };
        let b = pdu.encode();
        assert_eq!(&b[0..4], &[4, 3, 2, 1]);
        assert_eq!(&b[4..8], &[7, 0, 0, 0]);
        assert_eq!(&b[8..16], &1.5f64.to_le_bytes());
        assert_eq!(&b[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&b[88..96], &(-0.25f64).to_le_bytes());
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(EntityStatePdu::decode(&[0u8; 84]).is_err());
    }
}
