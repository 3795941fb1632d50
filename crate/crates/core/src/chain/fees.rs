use serde::{Deserialize, Serialize};

use crate::model::NameOpKind;

/// Smallest units per whole coin (NMC and PPC alike).
pub const COIN: u64 = 100_000_000;

/// Height-dependent extra fee charged on name registration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkFeeCurve {
    /// `initial` halved every `half_life` blocks; reaches zero once the shift
    /// drops it below one unit. An approximation: only the launch value and
    /// the near-zero end point are documented.
    Halving { initial: u64, half_life: u64 },
    /// Step function: (start height, fee) pairs sorted by height; heights
    /// before the first step pay the first fee.
    Steps(Vec<(u64, u64)>),
}

impl Default for NetworkFeeCurve {
    fn default() -> Self {
        NetworkFeeCurve::Halving { initial: 50 * COIN, half_life: 8192 }
    }
}

impl NetworkFeeCurve {
    pub fn fee_at(&self, height: u64) -> u64 {
        match self {
            NetworkFeeCurve::Halving { initial, half_life } => {
                let halvings = height / (*half_life).max(1);
                if halvings >= 64 {
                    0
                } else {
                    initial >> halvings
                }
            }
            NetworkFeeCurve::Steps(steps) => {
                let i = steps.partition_point(|(h, _)| *h <= height);
                steps.get(i.saturating_sub(1)).map_or(0, |(_, f)| *f)
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            NetworkFeeCurve::Halving { half_life, .. } if *half_life == 0 => Err("half_life must be positive".into()),
            NetworkFeeCurve::Steps(steps) => {
                if steps.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err("step heights must be strictly increasing".into());
                }
                if steps.windows(2).any(|w| w[0].1 < w[1].1) {
                    return Err("network fee must not increase with height".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeeSchedule {
    pub name_new_fee: u64,
    /// Paid by both name_firstupdate and name_update.
    pub fixed_op_fee: u64,
    pub network_fee_curve: NetworkFeeCurve,
    pub merge_mining_start_height: u64,
    /// Blocks after the last registration or renewal at which a name expires.
    pub expiry_window_blocks: u64,
}

impl Default for FeeSchedule {
    fn default() -> Self {
        FeeSchedule {
            name_new_fee: COIN / 100,
            fixed_op_fee: COIN / 200,
            network_fee_curve: NetworkFeeCurve::default(),
            merge_mining_start_height: 19_200,
            expiry_window_blocks: 36_000,
        }
    }
}

/// Fee a name operation should pay at `height`, in 10^-8 NMC.
pub fn expected_fee(kind: NameOpKind, height: u64, schedule: &FeeSchedule) -> u64 {
    match kind {
        NameOpKind::New => schedule.name_new_fee,
        NameOpKind::Update => schedule.fixed_op_fee,
        NameOpKind::FirstUpdate => schedule.fixed_op_fee + schedule.network_fee_curve.fee_at(height),
    }
}
