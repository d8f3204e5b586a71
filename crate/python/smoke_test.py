"""Smoke test for the altcong Python extension.

Build and run from the repository root:

    cargo build -p altcong-py --release --features extension-module
    cp target/release/libaltcong_py.so python/altcong.so
    python3 python/smoke_test.py
"""

import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import altcong  # noqa: E402


def main() -> None:
    ne2 = altcong.gen("ne2")
    assert ne2.players == 3 and ne2.resources == 9
    assert ne2.costs([1, 1, 1])[0] == 2148
    assert ne2.nash() == []
    kind, path = ne2.dynamics([1, 1, 1])
    assert kind == "cycle", kind
    assert path[-1] == [2, 1, 1]
    report = ne2.analyze()
    assert report["poa"] is None and report["pos"] is None

    again = altcong.Game.parse(ne2.emit())
    assert again.emit() == ne2.emit()

    links = altcong.Game(
        [(1, 0), (1, 0)],
        [[[1], [2]], [[1], [2]]],
        [[1, Fraction(1, 2)], [Fraction(1, 2), 1]],
    )
    assert sorted(links.nash()) == [[1, 2], [2, 1]]
    assert links.social_cost([1, 1]) == 4
    assert links.check_potential("rs") == (True, 16)
    assert links.analyze()["poa"] == 1
    assert "Maximize" in links.export_lp([1, 2], [2, 1])

    try:
        altcong.Game.parse("players 2\nresources 1\nlatency 1 1 0\nstrategy 1 1 : 5\n")
    except ValueError as exc:
        assert "line 4" in str(exc), exc
    else:
        raise AssertionError("out-of-range resource accepted")

    tree = altcong.gen("tree", h=1)
    assert tree.is_nash([1] * tree.players)

    cert = altcong.certify_poa_17_3(20, 20)
    assert cert["passed"] and (3, 1) in cert["tight"]
    pos = altcong.certify_gamma_v_pos(0, 20, 20)
    assert pos["passed"] and pos["theta_decimal"].startswith("1.5773502691")
    poa = altcong.certify_gamma_v_poa(Fraction(1, 2), Fraction(1, 2), 20, 20)
    assert poa["passed"] and poa["theta"] == "3"
    assert altcong.quad_eval(1, 1, 2, 40).startswith("2.414213562")

    ok, text = altcong.verify(5, 5, 10)
    assert ok, text
    print(text, end="")
    print("smoke test passed")


if __name__ == "__main__":
    main()
