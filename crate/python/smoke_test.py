#!/usr/bin/env python3
"""Smoke test for the plcrit_py extension module.

Builds nothing itself: run `cargo build --release -p plcrit-py` first
(or pass a profile as argv[1]; default tries release, then debug).
The script copies the cdylib next to a temp directory under the import
name `plcrit_py` and exercises the main entry points.
"""

import math
import pathlib
import shutil
import sys
import tempfile


def load_module(profile=None):
    root = pathlib.Path(__file__).resolve().parents[1]
    profiles = [profile] if profile else ["release", "debug"]
    for prof in profiles:
        so = root / "target" / prof / "libplcrit_py.so"
        if so.exists():
            tmp = tempfile.mkdtemp(prefix="plcrit_py_")
            shutil.copy2(so, pathlib.Path(tmp) / "plcrit_py.so")
            sys.path.insert(0, tmp)
            import plcrit_py

            return plcrit_py
    raise SystemExit(
        "libplcrit_py.so not found; run `cargo build --release -p plcrit-py` first"
    )


def approx(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def main():
    m = load_module(sys.argv[1] if len(sys.argv) > 1 else None)

    # sphere areas and a Beta-identity value
    assert approx(m.sphere_area(2), 2 * math.pi)
    assert approx(m.sphere_area(3), 4 * math.pi)
    assert approx(m.sphere_area(1), 2.0)
    assert approx(m.radial_integral(3, 2, 3), math.pi / 16, rel=1e-8)
    assert m.classify_radial_integral(2, 1, 2) == "log_divergent"
    try:
        m.radial_integral(3, 1, 2)
        raise AssertionError("divergent integral should raise")
    except ValueError:
        pass

    # constants for (n, p) = (4, 2): sigma = pi^2/6, S = 8 pi / sqrt(6)
    b = m.constants_bundle(4, 2.0)
    assert approx(b["sigma"], math.pi**2 / 6, rel=1e-8), b
    assert approx(b["sobolev"], 8 * math.pi / math.sqrt(6), rel=1e-8), b
    assert b["identity_residual"] < 1e-8

    # marginal exponent: c1 diverges at p = (n+1)/2
    b3 = m.constants_bundle(3, 2.0)
    assert b3["c1"] is None

    # bubble values
    lam, n, p = 7.0, 4, 2.2
    assert approx(m.delta([0.0] * n, lam, n, p), lam ** ((p - 1) * (n - p) / p))
    assert m.grad_delta_pnorm([0.0] * n, lam, n, p) == 0.0
    u, g = m.test_function([0.05, 0.0, 0.0, 0.0], lam, n, p, 0.5)
    assert u > 0.0 and len(g) == n
    res = m.pde_residual([0.5, 1.0, 2.0], 3, 2.0, 1.0, 1e-4)
    assert max(abs(r) for r in res) < 1e-6, res

    # geometry
    assert approx(m.mean_curvature(4, [0.1, 0.1, 0.1]), 0.2)

    # energy components and the threshold verdict for the subquadratic
    # negative-boundary-potential configuration
    c = m.energy_components(3, 1.5, 50.0, beta=-1.0)
    assert c["mass"] > 0 and c["grad_term"] > 0 and c["beta_term"] < 0
    assert approx(c["norm_p"], c["grad_term"] + c["alpha_term"] + c["beta_term"], rel=1e-14)
    t = m.threshold_check(3, 1.5, 100.0, beta=-1.0)
    assert t["below"] is True, t

    # expansion fit recovers a synthetic model exactly
    grid = [25.0, 50.0, 100.0, 200.0, 400.0]
    vals = [1.0 + 2.0 * L ** -1.2 for L in grid]
    fit = m.fit_expansion(grid, vals, 1.2)
    assert approx(fit["a"], 1.0, rel=1e-9) and approx(fit["k"], 2.0, rel=1e-8), fit

    # dominance dichotomy on a small grid: subquadratic p favors beta
    d = m.dominance(3, 1.5, [0.1, 0.1], 1.0, [25.0, 50.0, 100.0, 200.0])
    assert d["dominant"] == "beta", d

    # expansion regime classification across the exponent ranges
    assert m.classify_regime(3, 1.5)["regime"] == "beta_leading"
    assert m.classify_regime(4, 2.0)["regime"] == "balanced"
    assert m.classify_regime(4, 2.2)["regime"] == "curvature_leading"
    r = m.classify_regime(3, 2.0)
    assert r["regime"] == "curvature_log_leading" and r["log_factor"] is True
    try:
        m.classify_regime(2, 1.7)  # the planar gap between 3/2 and 2
        raise AssertionError("out-of-range regime should raise")
    except RuntimeError:
        pass

    # a coarse FEM run of the planar existence configuration
    f = m.fem_half_disk(1.4, 1.0, -1.0, h=0.15, refinements=1)
    assert f["below"] is True and f["monotone"] is True, f

    print("smoke test ok:", len([k for k in dir(m) if not k.startswith("_")]), "bindings checked")


if __name__ == "__main__":
    main()
