use crate::primitives::{keccak256, Address};
use crate::rlp::{self, Item};

/// Address of a contract created by `sender` with account nonce `nonce`:
/// the low 20 bytes of `keccak256(rlp([sender, nonce]))`.
pub fn derive_contract_address(sender: &Address, nonce: u64) -> Address {
    let encoded = rlp::encode(&Item::List(vec![Item::bytes(sender.0.to_vec()), Item::uint(nonce)]));
    let digest = keccak256(&encoded);
    let mut out = [0u8; 20];
    out.copy_from_slice(&digest[12..]);
    Address(out)
}
