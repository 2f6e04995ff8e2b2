use sauav_core::crypto::{
    check_auth, derive_code2, derive_code3, make_auth_with_nonce, verify_registration, CodeWord, CyclicGroup, KeyedHash,
    ModElement, NodeKeys, SchnorrGroup, TrustedAuthority,
};
use sauav_core::kernel::SimTime;
use sauav_core::protocol::NodeId;
use serde_json::Value;

fn fixture() -> Value {
    let text = include_str!("../fixtures/toy_vectors.json");
    serde_json::from_str(text).unwrap()
}

fn u(v: &Value) -> u64 {
    v.as_u64().unwrap()
}

fn hex(v: &Value) -> Vec<u8> {
    let s = v.as_str().unwrap();
    (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
}

fn key(v: &Value) -> [u8; 32] {
    hex(v).try_into().unwrap()
}

fn keys_of(v: &Value, node: u32) -> NodeKeys<SchnorrGroup> {
    NodeKeys {
        node: NodeId(node),
        id: u(&v["id"]),
        signed_id: u(&v["signed_id"]),
        private: u(&v["private"]),
        public: ModElement(u(&v["public"])),
    }
}

#[test]
fn toy_group_matches_fixture() {
    let f = fixture();
    let g = SchnorrGroup::toy();
    assert_eq!(g.modulus(), u(&f["group"]["p"]));
    assert_eq!(g.order(), u(&f["group"]["q"]));
    assert_eq!(g.generator(), ModElement(u(&f["group"]["g"])));
    let ta = TrustedAuthority::new(g, u(&f["pr_ta"])).unwrap();
    assert_eq!(ta.public_key(), ModElement(u(&f["pu_ta"])));
}

#[test]
fn registrations_match_fixture() {
    let f = fixture();
    let g = SchnorrGroup::toy();
    let mut ta = TrustedAuthority::new(g, u(&f["pr_ta"])).unwrap();
    for (i, r) in f["registrations"].as_array().unwrap().iter().enumerate() {
        let signed = ta.register(NodeId(i as u32), u(&r["id"])).unwrap();
        assert_eq!(signed, u(&r["signed_id"]));
        assert!(verify_registration(&g, u(&r["id"]), signed, ta.public_key()));
    }
}

#[test]
fn authenticators_match_fixture() {
    let f = fixture();
    let g = SchnorrGroup::toy();
    let ta_pub = ModElement(u(&f["pu_ta"]));
    let a = keys_of(&f["nodes"]["a"], 0);
    let b = keys_of(&f["nodes"]["b"], 1);
    assert_eq!(a.public, g.base(a.private));
    let window = SimTime::from_millis(2_000);
    for v in f["auth"].as_array().unwrap() {
        let msg = make_auth_with_nonce(&g, &a, b.public, ta_pub, u(&v["nonce"]), SimTime::ZERO);
        assert_eq!(msg.d_prime, ModElement(u(&v["d_prime"])));
        let p = g.scale(g.scalar_mul(a.signed_id, a.private), b.public);
        assert_eq!(p, ModElement(u(&v["p"])));
        assert_eq!(g.sub(msg.d_prime, p), ModElement(u(&v["k"])));
        // receiver's D equals the sender's P
        assert_eq!(ModElement(u(&v["d"])), p);
        assert_eq!(check_auth(&g, &b, a.signed_id, a.public, ta_pub, &msg, SimTime::ZERO, window), Ok(()));
    }
}

#[test]
fn code_chain_matches_fixture() {
    let f = fixture();
    let c = &f["codes"];
    let h_agent = KeyedHash::new(key(&c["h_agent_key"]), 32);
    let h_node = KeyedHash::new(key(&c["h_node_key"]), 32);
    let code1 = CodeWord::from_bytes(hex(&c["code1"]));
    let code2 = derive_code2(&h_agent, &code1);
    assert_eq!(code2.as_bytes(), hex(&c["code2"]).as_slice());
    assert_eq!(derive_code3(&h_node, &code2).as_bytes(), hex(&c["code3"]).as_slice());
    let narrow = KeyedHash::new(key(&c["h_agent_key"]), 8);
    assert_eq!(narrow.eval(code1.as_bytes()).as_bytes(), hex(&c["code2_width8"]).as_slice());
    let wide = KeyedHash::new(key(&c["h_agent_key"]), 40);
    assert_eq!(wide.eval(code1.as_bytes()).as_bytes(), hex(&c["code2_width40"]).as_slice());
}
