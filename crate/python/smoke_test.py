"""Smoke test for the rohyta Python extension.

Uses an installed `rohyta` module when there is one (for example from
`maturin develop -m crates/py/Cargo.toml`). Otherwise it loads the library
built by `cargo build --release -p rohyta-py --features extension-module`.
"""

import importlib.util
import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "crates" / "core" / "tests" / "fixtures"


def import_rohyta():
    try:
        import rohyta

        return rohyta
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "librohyta.so"
        if lib.exists():
            tmp = pathlib.Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "rohyta.so")
            spec = importlib.util.spec_from_file_location("rohyta", tmp / "rohyta.so")
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("rohyta extension not found; build crates/py first")


def main():
    rohyta = import_rohyta()

    one = rohyta.Instance.load(str(FIXTURES / "one_zone.toml"))
    assert (one.n_zones, one.n_robots, one.n_tasks) == (1, 2, 3)
    assert abs(one.path_length((0, 0), (9, 0)) - 4.5) < 1e-12

    exact = rohyta.solve(one, solver="exact")
    assert abs(exact.makespan - 3405.0) < 1e-9, exact.makespan
    assert exact.feasible
    assert abs(rohyta.decode(one, exact.vector) - exact.makespan) < 1e-9

    three = rohyta.Instance.load(str(FIXTURES / "three_zone.toml"))
    oracle = rohyta.solve(three, solver="exact").makespan
    sa = rohyta.solve(three, solver="sa", seed=1, overrides=["sa.lk=50"])
    assert sa.makespan >= oracle - 1e-9
    assert all(b[1] <= a[1] for a, b in zip(sa.trace, sa.trace[1:]))
    again = rohyta.solve(three, solver="sa", seed=1, overrides=["sa.lk=50"])
    assert again.report_json == sa.report_json
    assert json.loads(sa.report_json)["solver"] == "sa"

    robust = rohyta.solve(three, solver="exact", robust="box", deviation=0.1)
    assert robust.makespan >= oracle

    lp = rohyta.lp(one)
    assert "Minimize" in lp and "Cmax" in lp

    gen = rohyta.Instance.generate(3, 4)
    assert gen.n_zones == 4
    assert rohyta.Instance.parse(gen.to_toml()).n_tasks == gen.n_tasks

    try:
        rohyta.Instance.parse("name = 3")
    except rohyta.InvalidInstance:
        pass
    else:
        raise AssertionError("bad instance accepted")

    print(f"ok: oracle {oracle:.3f} s, sa {sa.makespan:.3f} s, box {robust.makespan:.3f} s")


if __name__ == "__main__":
    main()
