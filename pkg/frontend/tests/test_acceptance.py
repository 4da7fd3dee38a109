"""Secondary acceptance: render the desk-scale figure-pipeline CSVs.

Consumes the producer only through its CLI and file formats; requires
the rmtlab package to be installed.
"""

import json
import math
import subprocess
import sys

import pytest

from rmtfig.cli import main, EXIT_OK

SEED = 20260809


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{name} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("desk")
    outs = {}
    for fig in ("fig1", "fig2"):
        out = base / fig
        proc = subprocess.run(
            [sys.executable, "-m", "rmtlab.cli", "reproduce", "--figure", fig,
             "--scale", "desk", "--seed", str(SEED), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs[fig] = out
    return outs


def test_a16_figures(desk_runs, tmp_path):
    fig1_dir = desk_runs["fig1"]
    fig2_dir = desk_runs["fig2"]
    rho_b1 = json.loads((fig1_dir / "manifest.json").read_text())["rho_b"]
    rho_b2 = json.loads((fig2_dir / "manifest.json").read_text())["rho_b"]
    assert rho_b1 == pytest.approx(1 / (2 * math.pi))

    spec1 = tmp_path / "fig1.json"
    spec1.write_text(json.dumps({
        "kind": "paircorr",
        "inputs": {
            "paircorr": str(fig1_dir / "paircorr.csv"),
            "smooth": str(fig1_dir / "paircorr_smooth.csv"),
        },
        "rho_b": rho_b1,
        "output": str(tmp_path / "fig1.svg"),
    }), encoding="utf-8")
    spec2 = tmp_path / "fig2.json"
    spec2.write_text(json.dumps({
        "kind": "edge_profile",
        "inputs": {"density": str(fig2_dir / "density.csv")},
        "rho_b": rho_b2,
        "output": str(tmp_path / "fig2.svg"),
    }), encoding="utf-8")

    ok = main(["--spec", str(spec1)]) == EXIT_OK and main(["--spec", str(spec2)]) == EXIT_OK
    img1 = (tmp_path / "fig1.svg").read_bytes()
    img2 = (tmp_path / "fig2.svg").read_bytes()
    main(["--spec", str(spec1)])
    main(["--spec", str(spec2)])
    identical = (
        (tmp_path / "fig1.svg").read_bytes() == img1
        and (tmp_path / "fig2.svg").read_bytes() == img2
    )
    has_curve = b"smoothed" in img1 or img1.count(b"<path") > 2
    has_step = img2.count(b"<path") > 2
    report(
        "A16",
        ok and identical and has_curve and has_step,
        f"rendered fig1 ({len(img1)} bytes) and fig2 ({len(img2)} bytes); "
        f"re-render byte-identical: {identical}",
    )
