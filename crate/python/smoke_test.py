"""Smoke test for the pyhmass bindings.

Build and install first:  pip install --no-build-isolation -e crates/py
"""
import json
import math
import pathlib

import pyhmass

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def segment(theta):
    return pyhmass.Chain.from_json(json.dumps({
        "ambient_dim": 2,
        "dim": 1,
        "terms": [{"vertices": [[0.0, 0.0], [1.0, 0.0]], "multiplicity": theta}],
    }))


def main():
    c = segment(4.0)
    assert c.dim == 1 and c.ambient_dim == 2 and len(c) == 1
    assert abs(c.mass() - 4.0) < 1e-12
    assert abs(pyhmass.phi_h(c, pyhmass.HSpec.power(0.5)) - 2.0) < 1e-12
    assert abs(pyhmass.phi_h(c, pyhmass.HSpec.abs()) - c.mass()) < 1e-12

    b = c.boundary()
    assert b.dim == 0
    assert abs(pyhmass.flat_zero(b) - 4.0) < 1e-9

    rows = pyhmass.counterexample(pyhmass.HSpec.power(0.5), 6)
    for i, _, _, _, phi, cauchy in rows:
        assert abs(phi - 2 ** (i / 2)) < 1e-9
        assert cauchy <= 3 * 2.0 ** -i

    patch = (DATA / "quarter_circle.json").read_text()
    outcome = json.loads(pyhmass.relax(patch, pyhmass.HSpec.abs(), 0.01))
    assert outcome["flat_upper"] <= 0.01
    assert abs(outcome["h_mass_target"] - math.pi / 2) < 1e-6

    print("pyhmass smoke test ok")


if __name__ == "__main__":
    main()
