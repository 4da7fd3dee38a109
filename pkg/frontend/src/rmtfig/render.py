"""Figure rendering from the delimited outputs of the rmtlab CLI.

The renderer does no statistics of its own: it draws exactly the
numbers in the CSVs (plus axis scaling), and produces byte-identical
images on re-render -- fonts are embedded as paths, no timestamps or
run-dependent metadata are written.

Input schemas (matching the producer):

    paircorr.csv         r_lo,r_hi,rho2T,rho2T_over_rhob2,stderr
    paircorr_smooth.csv  r,value
    density.csv          r_lo,r_hi,density,stderr
    density_model.csv    r,model
    eigs.csv             sample_id,re,im,is_real
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("paircorr", "edge_profile", "radial_density", "heatmap")

FIGSIZE = (6.4, 4.4)
DPI = 160


class FigureSpecError(ValueError):
    """Malformed figure spec or input file (schema violation)."""


class EmptyDataError(ValueError):
    """Input file validates but contains no data rows."""


@dataclass
class FigureSpec:
    """Declarative description of one figure."""

    kind: str
    inputs: dict
    output: str
    rho_b: float | None = None
    overlay_model: str | None = None
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    xlim: tuple | None = None
    ylim: tuple | None = None

    @classmethod
    def from_json(cls, path: str | Path) -> "FigureSpec":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise FigureSpecError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise FigureSpecError(f"{path}: figure spec must be a JSON object")
        kind = raw.get("kind")
        if kind not in KINDS:
            raise FigureSpecError(f"{path}: kind must be one of {KINDS}, got {kind!r}")
        inputs = raw.get("inputs")
        if not isinstance(inputs, dict) or not inputs:
            raise FigureSpecError(f"{path}: 'inputs' must map roles to CSV paths")
        output = raw.get("output")
        if not isinstance(output, str) or not output:
            raise FigureSpecError(f"{path}: 'output' image path is required")
        xlim = tuple(raw["xlim"]) if "xlim" in raw else None
        ylim = tuple(raw["ylim"]) if "ylim" in raw else None
        return cls(
            kind=kind,
            inputs=inputs,
            output=output,
            rho_b=float(raw["rho_b"]) if "rho_b" in raw else None,
            overlay_model=raw.get("overlay_model"),
            title=str(raw.get("title", "")),
            xlabel=str(raw.get("xlabel", "")),
            ylabel=str(raw.get("ylabel", "")),
            xlim=xlim,
            ylim=ylim,
        )


def read_csv(path: str | Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Load a CSV and demand the exact columns the producer writes."""
    path = Path(path)
    if not path.exists():
        raise FigureSpecError(f"input file {path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FigureSpecError(f"{path}: empty file, no header") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise FigureSpecError(f"{path}: missing required columns {missing}")
        idx = {c: header.index(c) for c in required}
        cols: dict[str, list[float]] = {c: [] for c in required}
        for row in reader:
            if not row:
                continue
            for c in required:
                cols[c].append(float(row[idx[c]]))
    if not cols[required[0]]:
        raise EmptyDataError(f"{path}: no data rows")
    return {c: np.asarray(v) for c, v in cols.items()}


def _deterministic_rc():
    return {
        "svg.fonttype": "path",
        "svg.hashsalt": "rmtfig",
        "font.family": "DejaVu Sans",
        "figure.figsize": FIGSIZE,
        "figure.dpi": DPI,
        "savefig.dpi": DPI,
        "path.simplify": False,
    }


def _save(fig, output: str | Path) -> None:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    suffix = output.suffix.lower()
    if suffix == ".svg":
        fig.savefig(output, format="svg", metadata={"Date": None})
    elif suffix == ".png":
        fig.savefig(output, format="png", metadata={"Software": "rmtfig"})
    else:
        raise FigureSpecError(f"unsupported output format {suffix!r} (use .svg or .png)")


def _render_paircorr(spec: FigureSpec, ax) -> dict:
    data = read_csv(
        spec.inputs.get("paircorr", ""),
        ("r_lo", "r_hi", "rho2T", "rho2T_over_rhob2", "stderr"),
    )
    centers = 0.5 * (data["r_lo"] + data["r_hi"])
    ax.errorbar(
        centers, data["rho2T_over_rhob2"],
        yerr=np.where(np.isfinite(data["stderr"]), data["stderr"], 0.0)
        / (spec.rho_b**2 if spec.rho_b else 1.0),
        fmt=".", ms=4, lw=0.8, color="#777777", label="binned",
    )
    info = {"plotted_max_r": float(centers[np.argmax(data["rho2T_over_rhob2"])])}
    if "smooth" in spec.inputs:
        sm = read_csv(spec.inputs["smooth"], ("r", "value"))
        norm = spec.rho_b**2 if spec.rho_b else 1.0
        ax.plot(sm["r"], sm["value"] / norm, "-", color="#1f4e9c", lw=1.6, label="smoothed")
        info["smoothed_max_r"] = float(sm["r"][np.argmax(sm["value"])])
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_xlabel(spec.xlabel or "r")
    ax.set_ylabel(spec.ylabel or "rho2T(r) / rho_b^2")
    ax.legend(frameon=False)
    return info


def _render_edge_profile(spec: FigureSpec, ax) -> dict:
    data = read_csv(spec.inputs.get("density", ""), ("r_lo", "r_hi", "density", "stderr"))
    if spec.rho_b is None:
        raise FigureSpecError("edge_profile figures need 'rho_b' for the step overlay")
    centers = 0.5 * (data["r_lo"] + data["r_hi"])
    ax.plot(centers, data["density"] / spec.rho_b, "-", color="#1f4e9c", lw=1.4, label="MC")
    # Background step: rho_b inside the spectral radius (u < 0), zero outside.
    u = np.array([data["r_lo"][0], 0.0, 0.0, data["r_hi"][-1]])
    step = np.array([1.0, 1.0, 0.0, 0.0])
    ax.plot(u, step, "--", color="#b23a3a", lw=1.2, label="background step")
    ax.set_xlabel(spec.xlabel or "r - R")
    ax.set_ylabel(spec.ylabel or "rho(r) / rho_b")
    ax.legend(frameon=False)
    return {
        "plotted_max_r": float(centers[np.argmax(data["density"])]),
        "step_level": 1.0,
    }


def _render_radial_density(spec: FigureSpec, ax) -> dict:
    data = read_csv(spec.inputs.get("density", ""), ("r_lo", "r_hi", "density", "stderr"))
    centers = 0.5 * (data["r_lo"] + data["r_hi"])
    ax.stairs(data["density"], np.concatenate([data["r_lo"], data["r_hi"][-1:]]),
              color="#1f4e9c", label="MC")
    info = {"plotted_max_r": float(centers[np.argmax(data["density"])])}
    model_path = spec.overlay_model or spec.inputs.get("model")
    if model_path:
        model = read_csv(model_path, ("r", "model"))
        ax.plot(model["r"], model["model"], "--", color="#b23a3a", lw=1.4, label="model")
        info["model_overlay"] = True
    ax.set_xlabel(spec.xlabel or "r")
    ax.set_ylabel(spec.ylabel or "density")
    ax.legend(frameon=False)
    return info


def _render_heatmap(spec: FigureSpec, ax) -> dict:
    data = read_csv(spec.inputs.get("eigs", ""), ("sample_id", "re", "im", "is_real"))
    lim = 1.05 * float(np.max(np.hypot(data["re"], data["im"])))
    counts, xe, ye = np.histogram2d(
        data["re"], data["im"], bins=120, range=[[-lim, lim], [-lim, lim]]
    )
    ax.imshow(
        counts.T, origin="lower", extent=(-lim, lim, -lim, lim),
        cmap="viridis", interpolation="nearest",
    )
    ax.set_xlabel(spec.xlabel or "Re z")
    ax.set_ylabel(spec.ylabel or "Im z")
    return {"n_points": int(data["re"].size)}


_RENDERERS = {
    "paircorr": _render_paircorr,
    "edge_profile": _render_edge_profile,
    "radial_density": _render_radial_density,
    "heatmap": _render_heatmap,
}


def render(spec: FigureSpec) -> dict:
    """Render one figure to spec.output; returns plotted-feature metadata."""
    if spec.kind not in _RENDERERS:
        raise FigureSpecError(f"unknown figure kind {spec.kind!r}")
    with plt.rc_context(_deterministic_rc()):
        fig, ax = plt.subplots()
        try:
            info = _RENDERERS[spec.kind](spec, ax)
            if spec.title:
                ax.set_title(spec.title)
            if spec.xlim:
                ax.set_xlim(*spec.xlim)
            if spec.ylim:
                ax.set_ylim(*spec.ylim)
            fig.tight_layout()
            _save(fig, spec.output)
        finally:
            plt.close(fig)
    info["output"] = str(spec.output)
    return info
