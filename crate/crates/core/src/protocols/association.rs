use serde::{Deserialize, Serialize};

use crate::model::{Node, NodeId, QuadrantId};
use crate::radio::SignalStrength;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssociationScope {
    /// Members only consider heads in their own quadrant.
    QuadrantLocal,
    /// Members consider every head in the network.
    Global,
}

impl AssociationScope {
    pub fn in_scope(self, a: &Node, b: &Node) -> bool {
        match self {
            AssociationScope::QuadrantLocal => a.quadrant == b.quadrant,
            AssociationScope::Global => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub head: NodeId,
    /// Ascending ids, head excluded.
    pub members: Vec<NodeId>,
    /// Set for quadrant-local clusters.
    pub quadrant: Option<QuadrantId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Association {
    /// One cluster per head, in the order the heads were given.
    pub clusters: Vec<Cluster>,
    /// Alive non-head nodes with no head in scope; they report straight to the BS.
    pub unclustered: Vec<NodeId>,
}

/// Joins every alive non-head node to the strongest head in scope.
///
/// Ties go to the lower head id. `heads` must be ids of alive nodes.
pub fn associate_members<S: SignalStrength + ?Sized>(
    nodes: &[Node],
    heads: &[NodeId],
    scope: AssociationScope,
    strength: &S,
) -> Association {
    let mut order: Vec<usize> = (0..heads.len()).collect();
    order.sort_by_key(|&i| heads[i]);

    let mut clusters: Vec<Cluster> = heads
        .iter()
        .map(|&h| Cluster {
            head: h,
            members: Vec::new(),
            quadrant: match scope {
                AssociationScope::QuadrantLocal => Some(nodes[h].quadrant),
                AssociationScope::Global => None,
            },
        })
        .collect();
    let mut unclustered = Vec::new();

    for node in nodes.iter().filter(|n| n.alive && !heads.contains(&n.id)) {
        let mut best: Option<(usize, f64)> = None;
        for &i in &order {
            let head = &nodes[heads[i]];
            if !scope.in_scope(node, head) {
                continue;
            }
            let s = strength.rssi(node.position.distance(head.position));
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        match best {
            Some((i, _)) => clusters[i].members.push(node.id),
            None => unclustered.push(node.id),
        }
    }

    Association {
        clusters,
        unclustered,
    }
}
