"""Smoke test for the Python bindings.

Loads the extension from SAUAV_EXT, or from target/release/libsauav.so after
`cargo build -p sauav-python --release --features extension-module`, or
imports an installed `sauav` module.
"""

import importlib.util
import json
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
SMALL = """
[scenario]
n_uavs = 20
sim_time_s = 20.0
arena_m = 700.0

[traffic]
flows = 3
start_s = 3.0

[adversary]
fraction = 0.2
"""


def load():
    candidates = [os.environ.get("SAUAV_EXT"), ROOT / "target/release/libsauav.so", ROOT / "target/debug/libsauav.so"]
    for c in candidates:
        if c and Path(c).exists():
            spec = importlib.util.spec_from_file_location("sauav", c)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    import sauav

    return sauav


def main():
    sauav = load()

    assert "[scenario]" in sauav.default_config()

    out = sauav.run(SMALL, seed=5, trace=True)
    assert out["run"]["n_uavs"] == 20 and out["run"]["seed"] == 5
    report = sauav.verify(out["trace"])
    assert report["ok"], report["mismatches"]
    assert abs(report["recomputed"]["pdr"] - out["report"]["pdr"]) < 1e-9

    off = sauav.run(SMALL, seed=5, defense=False)
    assert off["run"]["agent_handshakes"] == 0

    table = sauav.sweep(SMALL, "malicious_fraction", [0.0, 0.2], repeats=2)
    assert [r["value"] for r in table["rows"]] == [0.0, 0.2]
    assert all(len(r["runs"]) == 2 for r in table["rows"])

    vectors = json.loads((ROOT / "crates/core/fixtures/toy_vectors.json").read_text())
    assert sauav.toy_register(7, 5) == 35
    for v in vectors["auth"]:
        d, ok = sauav.toy_authenticate(7, 5, 3, 9, 11, v["nonce"])
        assert ok and d == v["d_prime"], v

    assert len(sauav.keyed_hash(bytes(range(32)), b"abc", 40)) == 40

    for bad in (lambda: sauav.run("[scenario]\nn_uavs = 0\n"), lambda: sauav.sweep(None, "speed", [1.0])):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("python smoke test ok")


if __name__ == "__main__":
    sys.exit(main())
