"""Quick check that the extension imports and agrees with known values."""

import json
import math

import ratiocut


def main():
    base = ratiocut.ratio_cut((0.5, 0.5, 0.0))
    assert abs(base["value"] - 8.0) < 1e-12, base

    opt = ratiocut.optimize_cut({"a1": 0.02})
    pred = ratiocut.predict_cut({"a1": 0.02}, order="full")
    d = math.dist((opt["cut"]["q"], opt["cut"]["p"], opt["cut"]["theta"]), pred)
    assert d < 50 * 0.02**3, d

    assert abs(ratiocut.cap_area(1.0, 0.1) - 0.0083368) < 1e-6
    assert ratiocut.arc_length(1.0, 0.0) == 1.0

    table = json.loads(ratiocut.coefficients_json())
    assert table["printed"]["1"][0] == "8"

    rows = ratiocut.sweep("a1:0:0.04:5")
    assert len(rows) == 5

    traj = ratiocut.iterate(steps=3)
    assert all(r["theta"] == 0.0 for r in traj["records"])

    g = ratiocut.graph_cut(n=800, seed=1)
    assert abs(g["interface_x"] - 1.0) < 0.2 and g["monotone"], g["interface_x"]

    try:
        ratiocut.ratio_cut((0.9, 0.9, 1.8))
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("arc outside the domain was accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
