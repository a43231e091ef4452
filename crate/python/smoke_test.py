"""Smoke test for the cfdim_py extension.

Build first with `cargo build --release -p cfdim-python`; the script copies
the shared library next to a temporary module path and imports it.
"""

import importlib.util
import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def load():
    for profile in ("release", "debug"):
        for name in ("libcfdim_py.so", "libcfdim_py.dylib", "cfdim_py.dll"):
            lib = ROOT / "target" / profile / name
            if lib.exists():
                tmp = pathlib.Path(tempfile.mkdtemp())
                suffix = ".pyd" if name.endswith(".dll") else ".so"
                dest = tmp / ("cfdim_py" + suffix)
                shutil.copy(lib, dest)
                spec = importlib.util.spec_from_file_location("cfdim_py", dest)
                mod = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(mod)
                return mod
    sys.exit("extension not built: run `cargo build --release -p cfdim-python`")


def main():
    cf = load()

    lo, hi, ok = cf.dimension("1,2", 0.02)
    assert ok and lo > 0.5 and hi < 0.56, (lo, hi)

    lo, hi = cf.lambda_bracket("full", 1.0)
    assert lo <= 1.0 <= hi, (lo, hi)

    assert cf.elements("i0:0.5", 8) == [1, 5, 17, 21, 65, 69, 81, 85]
    assert cf.elements("geometric:2", 4) == [2, 4, 8, 16]

    rep = cf.check("geometric:2", 0.3, ["c1"])
    assert rep["fragments"][0]["verdict"] == "fail-with-witness"

    paths = cf.sample("geometric:2", 20, samples=3, seed=5)
    assert len(paths) == 3 and all(len(p) == 20 for p in paths)
    assert all(d & (d - 1) == 0 and d >= 2 for p in paths for d in p)
    assert paths == cf.sample("geometric:2", 20, samples=3, seed=5)

    gauss = math.pi ** 2 / (6 * math.log(2))
    est, err = cf.lyapunov("full", 200_000, seed=3, h=1.0)
    assert abs(est - gauss) < 0.02 * gauss, (est, gauss)

    assert cf.classify_series("log:0.7", 0.7) == ("diverges", "converges")

    res = cf.khinchine("geometric:2", "log:h", depth=200, samples=50, prefix=8)
    s = res["survival"]
    assert len(s) == 200 and all(a >= b for a, b in zip(s, s[1:]))

    print("cfdim_py smoke test ok")


if __name__ == "__main__":
    main()
