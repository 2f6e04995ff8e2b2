"""Regenerates crates/core/fixtures/toy_vectors.json with plain integer
arithmetic and the standard-library HMAC, independent of the Rust code."""

import hashlib
import hmac
import json
import pathlib

P, Q, G = 607, 101, 64
PR_TA = 7


def base(k):
    return pow(G, k % Q, P)


def scale(k, e):
    return pow(e, k % Q, P)


def keyed(key, data, width):
    out = b""
    counter = 1
    while len(out) < width:
        out += hmac.new(key, bytes([counter]) + data, hashlib.sha3_256).digest()
        counter += 1
    return out[:width]


def main():
    pu_ta = base(PR_TA)
    registrations = [{"id": i, "signed_id": i * PR_TA % Q} for i in (1, 5, 9, 50, 100)]

    nodes = {"a": {"id": 5, "private": 3}, "b": {"id": 9, "private": 11}}
    for n in nodes.values():
        n["signed_id"] = n["id"] * PR_TA % Q
        n["public"] = base(n["private"])

    auths = []
    a, b = nodes["a"], nodes["b"]
    for nonce in (1, 4, 57, 100):
        p_term = scale(a["signed_id"] * a["private"], b["public"])
        k_term = scale(a["signed_id"] * nonce, pu_ta)
        d_prime = p_term * k_term % P
        d = scale(a["signed_id"] * b["private"], a["public"])
        auths.append({"nonce": nonce, "p": p_term, "k": k_term, "d_prime": d_prime, "d": d})

    h_agent = bytes(range(32))
    h_node = bytes(range(32, 64))
    code1 = bytes(range(100, 132))
    code2 = keyed(h_agent, code1, 32)
    code3 = keyed(h_node, code2, 32)

    doc = {
        "group": {"p": P, "q": Q, "g": G},
        "pr_ta": PR_TA,
        "pu_ta": pu_ta,
        "registrations": registrations,
        "nodes": nodes,
        "auth": auths,
        "codes": {
            "h_agent_key": h_agent.hex(),
            "h_node_key": h_node.hex(),
            "code1": code1.hex(),
            "code2": code2.hex(),
            "code3": code3.hex(),
            "code2_width8": keyed(h_agent, code1, 8).hex(),
            "code2_width40": keyed(h_agent, code1, 40).hex(),
        },
    }
    out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/fixtures/toy_vectors.json"
    out.write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
