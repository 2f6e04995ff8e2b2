use rand::Rng;
use sauav_core::crypto::{
    check_auth, make_auth, make_auth_with_nonce, verify_registration, AuthError, CyclicGroup, NodeKeys, SchnorrGroup,
    TrustedAuthority, AdditiveGroup,
};
use sauav_core::kernel::{stream_rng, RngStream, SimTime};
use sauav_core::protocol::NodeId;

const WINDOW: SimTime = SimTime::from_millis(2_000);

/// A Mersenne prime, so the additive realization has prime order.
const MERSENNE_61: u64 = (1 << 61) - 1;

/// One random key set: an authority and two enrolled nodes.
fn key_set<G: CyclicGroup, R: Rng>(g: &G, rng: &mut R) -> (TrustedAuthority<G>, NodeKeys<G>, NodeKeys<G>) {
    let mut ta = TrustedAuthority::generate(g.clone(), rng);
    let ia = g.random_scalar(rng);
    let ib = loop {
        let x = g.random_scalar(rng);
        if x != ia {
            break x;
        }
    };
    let a = NodeKeys::enroll(&mut ta, NodeId(0), ia, rng).unwrap();
    let b = NodeKeys::enroll(&mut ta, NodeId(1), ib, rng).unwrap();
    (ta, a, b)
}

fn bump<G: CyclicGroup>(g: &G, e: G::Element) -> G::Element {
    g.add(e, g.generator())
}

/// Honest inputs verify; each single-field change is rejected.
fn round_trip_and_perturb<G: CyclicGroup>(g: G, sets: usize, seed: u64) {
    let mut rng = stream_rng(seed, RngStream::Keys);
    let q = g.order();
    for _ in 0..sets {
        let (ta, a, b) = key_set(&g, &mut rng);
        let pu = ta.public_key();
        assert!(verify_registration(&g, a.id, a.signed_id, pu));
        assert!(!verify_registration(&g, a.id, g.scalar_add(a.signed_id, 1), pu));
        assert!(!verify_registration(&g, g.scalar_add(a.id, 1), a.signed_id, pu));
        assert!(!verify_registration(&g, a.id, a.signed_id, bump(&g, pu)));

        let now = SimTime::from_millis(rng.gen_range(0..1_000_000));
        let msg = make_auth(&g, &a, b.public, pu, &mut rng, now);
        let check = |recv: &NodeKeys<G>, sid: u64, spub: G::Element, tpub: G::Element, m: &_, at: SimTime| {
            check_auth(&g, recv, sid, spub, tpub, m, at, WINDOW)
        };
        assert_eq!(check(&b, a.signed_id, a.public, pu, &msg, now), Ok(()));

        let mut m = msg;
        m.d_prime = bump(&g, m.d_prime);
        assert_eq!(check(&b, a.signed_id, a.public, pu, &m, now), Err(AuthError::AlgebraMismatch));
        let mut m = msg;
        m.nonce = g.scalar_add(m.nonce, 1 + rng.gen_range(0..q - 1));
        assert_eq!(check(&b, a.signed_id, a.public, pu, &m, now), Err(AuthError::AlgebraMismatch));
        let mut m = msg;
        m.timestamp = now + WINDOW + SimTime::from_micros(1);
        assert_eq!(check(&b, a.signed_id, a.public, pu, &m, now), Err(AuthError::StaleTimestamp));

        assert!(check(&b, g.scalar_add(a.signed_id, 1), a.public, pu, &msg, now).is_err());
        assert!(check(&b, a.signed_id, bump(&g, a.public), pu, &msg, now).is_err());
        assert!(check(&b, a.signed_id, a.public, bump(&g, pu), &msg, now).is_err());
        let mut wrong = b.clone();
        wrong.private = g.scalar_add(wrong.private, 1);
        assert!(check(&wrong, a.signed_id, a.public, pu, &msg, now).is_err());
        // a message addressed to a, replayed at b
        assert!(check(&a, b.signed_id, b.public, pu, &msg, now).is_err());
    }
}

#[test]
fn toy_group_thousand_key_sets() {
    round_trip_and_perturb(SchnorrGroup::toy(), 1000, 1);
}

#[test]
fn standard_group_thousand_key_sets() {
    round_trip_and_perturb(SchnorrGroup::standard(), 1000, 2);
}

#[test]
fn additive_group_thousand_key_sets() {
    round_trip_and_perturb(AdditiveGroup::new(MERSENNE_61), 1000, 3);
}

#[test]
fn toy_registration_exhaustive() {
    let g = SchnorrGroup::toy();
    for pr in 1..101 {
        let mut ta = TrustedAuthority::new(g, pr).unwrap();
        for id in 1..101u64 {
            let s = ta.register(NodeId(id as u32), id).unwrap();
            assert_eq!(s, id * pr % 101);
            for cand in 0..101 {
                assert_eq!(verify_registration(&g, id, cand, ta.public_key()), cand == s);
            }
        }
    }
}

/// Every sender key, receiver key and nonce in the toy group. A message
/// verifies exactly when its authenticator is not the identity element.
#[test]
fn toy_authentication_exhaustive() {
    let g = SchnorrGroup::toy();
    let mut ta = TrustedAuthority::new(g, 7).unwrap();
    let sa = ta.register(NodeId(0), 5).unwrap();
    let sb = ta.register(NodeId(1), 9).unwrap();
    let pu = ta.public_key();
    let mut identity_hits = 0;
    for pa in 1..101 {
        let a = NodeKeys { node: NodeId(0), id: 5, signed_id: sa, private: pa, public: g.base(pa) };
        for pb in 1..101 {
            let b = NodeKeys { node: NodeId(1), id: 9, signed_id: sb, private: pb, public: g.base(pb) };
            for m in 1..101 {
                let msg = make_auth_with_nonce(&g, &a, b.public, pu, m, SimTime::ZERO);
                let ok = check_auth(&g, &b, sa, a.public, pu, &msg, SimTime::ZERO, WINDOW).is_ok();
                let degenerate = msg.d_prime == g.identity();
                identity_hits += degenerate as u32;
                assert_eq!(ok, !degenerate, "pa={pa} pb={pb} m={m}");
            }
        }
    }
    // pa·pb + m·7 ≡ 0 has one solution in m for each (pa, pb)
    assert_eq!(identity_hits, 100 * 100);
}

/// For a fixed honest message, no other claimed signed identity verifies.
#[test]
fn toy_forged_identity_exhaustive() {
    let g = SchnorrGroup::toy();
    let mut ta = TrustedAuthority::new(g, 7).unwrap();
    let mut rng = stream_rng(9, RngStream::Keys);
    let a = NodeKeys::enroll(&mut ta, NodeId(0), 5, &mut rng).unwrap();
    let b = NodeKeys::enroll(&mut ta, NodeId(1), 9, &mut rng).unwrap();
    for _ in 0..200 {
        let msg = make_auth(&g, &a, b.public, ta.public_key(), &mut rng, SimTime::ZERO);
        for sid in 0..101 {
            let ok = check_auth(&g, &b, sid, a.public, ta.public_key(), &msg, SimTime::ZERO, WINDOW).is_ok();
            assert_eq!(ok, sid == a.signed_id);
        }
    }
}
