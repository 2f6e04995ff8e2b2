use std::collections::BTreeMap;

use rand::Rng;

use super::group::CyclicGroup;
use super::CryptoError;
use crate::protocol::NodeId;

/// Trusted authority holding the network master key pair and the roster of
/// registered identities.
#[derive(Debug, Clone)]
pub struct TrustedAuthority<G: CyclicGroup> {
    group: G,
    private_key: u64,
    public_key: G::Element,
    roster: BTreeMap<NodeId, Registration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Registration {
    pub id: u64,
    pub signed_id: u64,
}

impl<G: CyclicGroup> TrustedAuthority<G> {
    /// Master public key is `private · Z`.
    pub fn new(group: G, private_key: u64) -> Result<Self, CryptoError> {
        let private_key = check_scalar(&group, private_key)?;
        let public_key = group.base(private_key);
        Ok(Self {
            group,
            private_key,
            public_key,
            roster: BTreeMap::new(),
        })
    }

    pub fn generate<R: Rng + ?Sized>(group: G, rng: &mut R) -> Self {
        let sk = group.random_scalar(rng);
        Self::new(group, sk).expect("random scalar is in range")
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn public_key(&self) -> G::Element {
        self.public_key
    }

    pub fn roster(&self) -> &BTreeMap<NodeId, Registration> {
        &self.roster
    }

    pub fn signed_id_of(&self, node: NodeId) -> Option<u64> {
        self.roster.get(&node).map(|r| r.signed_id)
    }

    /// Signs an identity scalar: `ID' = ID · PR_TA mod q`.
    pub fn register(&mut self, node: NodeId, id: u64) -> Result<u64, CryptoError> {
        let id = check_scalar(&self.group, id)?;
        if self.roster.contains_key(&node) || self.roster.values().any(|r| r.id == id) {
            return Err(CryptoError::DuplicateRegistration(node));
        }
        let signed_id = self.group.scalar_mul(id, self.private_key);
        self.roster.insert(node, Registration { id, signed_id });
        Ok(signed_id)
    }
}

/// `ID' · Z == ID · PU_TA`
pub fn verify_registration<G: CyclicGroup>(
    group: &G,
    id: u64,
    signed_id: u64,
    ta_public: G::Element,
) -> bool {
    group.base(signed_id) == group.scale(id, ta_public)
}

/// Key material of one registered node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeKeys<G: CyclicGroup> {
    pub node: NodeId,
    pub id: u64,
    pub signed_id: u64,
    pub private: u64,
    pub public: G::Element,
}

impl<G: CyclicGroup> NodeKeys<G> {
    /// Registers `node` under identity scalar `id` and draws a fresh key pair.
    pub fn enroll<R: Rng + ?Sized>(
        ta: &mut TrustedAuthority<G>,
        node: NodeId,
        id: u64,
        rng: &mut R,
    ) -> Result<Self, CryptoError> {
        let signed_id = ta.register(node, id)?;
        if !verify_registration(ta.group(), id, signed_id, ta.public_key()) {
            return Err(CryptoError::RegistrationRejected(node));
        }
        let private = ta.group().random_scalar(rng);
        Ok(Self {
            node,
            id,
            signed_id,
            private,
            public: ta.group().base(private),
        })
    }
}

fn check_scalar<G: CyclicGroup>(group: &G, k: u64) -> Result<u64, CryptoError> {
    if k == 0 || k >= group.order() {
        return Err(CryptoError::ScalarOutOfRange(k));
    }
    Ok(k)
}
