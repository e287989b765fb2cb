use serde::{Deserialize, Serialize};

use super::Cluster;
use crate::model::NodeId;

/// One transmit slot per member per frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdmaSchedule {
    pub head: NodeId,
    pub slot_order: Vec<NodeId>,
}

impl TdmaSchedule {
    pub fn slots_per_frame(&self) -> usize {
        self.slot_order.len()
    }

    pub fn slot_of(&self, node: NodeId) -> Option<usize> {
        self.slot_order.iter().position(|&n| n == node)
    }
}

pub fn build_tdma_schedule(cluster: &Cluster) -> TdmaSchedule {
    let mut slot_order = cluster.members.clone();
    slot_order.sort_unstable();
    slot_order.dedup();
    TdmaSchedule {
        head: cluster.head,
        slot_order,
    }
}
