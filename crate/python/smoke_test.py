#!/usr/bin/env python3
"""Smoke test for the qsys_py extension module.

Build the module first:

    cargo build -p qsys-py --release

then run this script from the repository root:

    python3 python/smoke_test.py
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libqsys_py.so",
        REPO / "target" / "debug" / "libqsys_py.so",
        REPO / "target" / "release" / "libqsys_py.dylib",
        REPO / "target" / "debug" / "libqsys_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("error: build the extension first: cargo build -p qsys-py --release")
    stage = Path(tempfile.mkdtemp(prefix="qsys-py-"))
    shutil.copy2(built, stage / "qsys_py.so")
    sys.path.insert(0, str(stage))
    import qsys_py

    return qsys_py


def check(name, condition):
    status = "pass" if condition else "FAIL"
    print(f"{name}: {status}")
    return bool(condition)


def main():
    q = load_module()
    ok = True

    fam = q.solve_algebra("A1", 3)
    ok &= check("solve A1 members", fam.indices() == ["(1,1)", "(1,2)", "(1,3)"])
    q2 = fam.member("(1,2)")
    ok &= check(
        "A1 Q_2 = 1 + y + y^2",
        q2.terms() == [({}, "1"), ({"y1": 1}, "1"), ({"y1": 2}, "1")],
    )

    k0 = q.series_k("A1", "", 8)
    ok &= check("A1 K^0 = 1 - y", k0.num_terms() == 2 and k0.coeff({"y1": 1}) == "-1")
    ok &= check("A1 K^0 equals Weyl denominator cutoff-for-cutoff",
                k0.coeff({"y1": 1}) == q.weyl_denominator("A1").coeff({"y1": 1}))

    chi = q.character("A2", [1, 0])
    ok &= check("A2 character of the vector module has 3 weights", chi.num_terms() == 3)

    r1 = q.series_r("A1", "(1,1):1", 6)
    q1 = fam.member("(1,1)")
    ok &= check("R-series matches the solved member", r1.coeff({"y1": 1}) == q1.coeff({"y1": 1}))

    rows = q.decompose("A1", "(1,1):2", 6)
    ok &= check("A1 Clebsch-Gordan", rows == [([2], "1"), ([0], "1")])

    gating_ok, report = q.verify("A2", 6, 0)
    parsed = json.loads(report)
    ok &= check("verify A2 gating", gating_ok and parsed["algebra"] == "A2")

    ok &= check(
        "denominator identities at rank 2",
        all(q.denominator_identity(w, 2) for w in ("cn-bn", "bn-dn", "cn-dn")),
    )

    lambert = q.solve_spec(
        json.dumps({"kind": "standard", "indices": [1], "D": [["1"]], "G": [["2"]]}), 4
    )
    member = lambert.member("1")
    ok &= check(
        "Lambert signed Catalan numbers",
        [member.coeff({"w1": d}) for d in range(5)] == ["1", "-1", "2", "-5", "14"],
    )

    round_trip = q.series_from_json_str(member.to_json())
    ok &= check("series JSON round trip", round_trip == member)

    product = q1 * q1
    ok &= check("series arithmetic", product.coeff({"y1": 1}) == "2")

    if not ok:
        sys.exit(1)
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
