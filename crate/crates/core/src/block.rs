use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::{BlockId, Slot, ValidatorId};

/// A block. The id is derived from the other fields, so two blocks with the
/// same parent, slot, proposer and body are the same block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    pub parent: Option<BlockId>,
    pub slot: Slot,
    pub proposer: ValidatorId,
    #[serde(with = "hex_body")]
    pub body: Vec<u8>,
}

impl Block {
    pub fn genesis() -> Self {
        Self::build(None, 0, ValidatorId(0), b"genesis".to_vec())
    }

    pub fn new(parent: &Block, slot: Slot, proposer: ValidatorId, body: Vec<u8>) -> Self {
        assert!(
            parent.slot < slot,
            "block slot {slot} must exceed parent slot {}",
            parent.slot
        );
        Self::build(Some(parent.id), slot, proposer, body)
    }

    fn build(parent: Option<BlockId>, slot: Slot, proposer: ValidatorId, body: Vec<u8>) -> Self {
        let id = Self::digest(parent, slot, proposer, &body);
        Block { id, parent, slot, proposer, body }
    }

    pub fn digest(parent: Option<BlockId>, slot: Slot, proposer: ValidatorId, body: &[u8]) -> BlockId {
        let mut h = Sha256::new();
        match parent {
            Some(p) => {
                h.update([1u8]);
                h.update(p.0.to_be_bytes());
            }
            None => h.update([0u8]),
        }
        h.update(slot.to_be_bytes());
        h.update(proposer.0.to_be_bytes());
        h.update((body.len() as u64).to_be_bytes());
        h.update(body);
        let out = h.finalize();
        let mut first = [0u8; 8];
        first.copy_from_slice(&out[..8]);
        BlockId(u64::from_be_bytes(first))
    }

    pub fn is_genesis(&self) -> bool {
        self.parent.is_none()
    }

    /// True when the stored id matches the contents.
    pub fn id_is_valid(&self) -> bool {
        self.id == Self::digest(self.parent, self.slot, self.proposer, &self.body)
    }
}

mod hex_body {
    use super::*;

    pub fn serialize<S: Serializer>(body: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(body))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

/// A vote for `block` cast in `slot`.
///
/// Field order matters: the derived ordering sorts votes by slot first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vote {
    pub slot: Slot,
    pub voter: ValidatorId,
    pub block: BlockId,
}
