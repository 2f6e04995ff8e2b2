use std::collections::BTreeSet;

use crate::crypto::{CodeWord, KeyedHash};
use crate::protocol::NodeId;

/// Authentication tag carried by a Warning. Only holders of the node hash
/// and code 2 can produce or check it.
pub fn warning_tag(h_node: &KeyedHash, code2: &CodeWord, origin: NodeId, subject: NodeId) -> CodeWord {
    h_node.eval_parts(&[b"warning", code2.as_bytes(), &origin.0.to_be_bytes(), &subject.0.to_be_bytes()])
}

/// Per-node quarantine state: the excluded subjects. Flood suppression is
/// per subject, so a second Warning about the same node is not re-broadcast.
#[derive(Debug, Clone, Default)]
pub struct QuarantineSet {
    subjects: BTreeSet<NodeId>,
}

impl QuarantineSet {
    /// Returns true when `subject` is newly quarantined (and the Warning
    /// should be relayed).
    pub fn insert(&mut self, subject: NodeId) -> bool {
        self.subjects.insert(subject)
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.subjects.contains(&n)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.subjects.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_binds_origin_and_subject() {
        let h = KeyedHash::new([1; 32], 32);
        let c2 = CodeWord::from_bytes(vec![2; 32]);
        let t = warning_tag(&h, &c2, NodeId(1), NodeId(2));
        assert_eq!(t, warning_tag(&h, &c2, NodeId(1), NodeId(2)));
        assert_ne!(t, warning_tag(&h, &c2, NodeId(1), NodeId(3)));
        assert_ne!(t, warning_tag(&h, &c2, NodeId(4), NodeId(2)));
        assert_ne!(t, warning_tag(&KeyedHash::new([9; 32], 32), &c2, NodeId(1), NodeId(2)));
    }

    #[test]
    fn idempotent() {
        let mut q = QuarantineSet::default();
        assert!(q.insert(NodeId(3)));
        assert!(!q.insert(NodeId(3)));
        assert_eq!(q.len(), 1);
    }
}
