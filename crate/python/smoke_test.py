#!/usr/bin/env python3
"""Smoke test for the bridgesim_py extension module.

Build the module and run this script:

    cargo build -p bridgesim-py --release
    cp target/release/libbridgesim_py.so python/bridgesim_py.so
    python3 python/smoke_test.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import bridgesim_py  # noqa: E402


def main() -> None:
    names = bridgesim_py.presets()
    assert len(names) == 9, names
    assert "ronin_2022" in names

    citations = dict(bridgesim_py.preset_citations())
    assert "Ronin" in citations["ronin_2022"]

    # the ronin replay: exact incident quantities, causality broken
    report = json.loads(bridgesim_py.run_preset("ronin_2022", seed=7))
    assert report["loss"]["ETH"] == "173600"
    assert report["loss"]["USDC"] == "25500000"
    priors = {v["prior"] for v in report["violations"]}
    assert "Causality" in priors and "Peg" in priors
    assert all(
        v["classification"] == "Attack" for v in report["violations"]
    ), report["violations"]

    # determinism: identical inputs, identical bytes
    again = bridgesim_py.run_preset("ronin_2022", seed=7)
    assert bridgesim_py.run_preset("ronin_2022", seed=7) == again

    # an honest config document runs clean end to end
    config = bridgesim_py.example_config()
    honest = json.loads(bridgesim_py.run_config(config))
    assert honest["violations"] == []
    assert honest["loss"] == {}
    assert honest["final_balances"]["b2"]["a2"]["wETH"] == "40"

    # surface scoring without simulation
    surface = json.loads(bridgesim_py.surface_report(config))
    assert surface["trust"]["classification"] == "Trusted"
    assert surface["area_total"] >= 0

    # bad preset names raise
    try:
        bridgesim_py.run_preset("nonexistent")
    except ValueError as err:
        assert "unknown preset" in str(err)
    else:
        raise AssertionError("unknown preset must raise")

    print("bridgesim_py smoke test: OK")


if __name__ == "__main__":
    main()
