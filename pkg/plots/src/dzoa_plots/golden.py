"""Fixture rendering and golden-image verification.

The fixture CSVs under ``_fixtures/`` are real harness outputs (see
``tools/regenerate_fixtures.py``); the goldens are the images this package
rendered from them. ``verify`` re-renders into a scratch directory and
compares PNGs by decoded pixel buffer and SVGs byte-for-byte after
stripping the metadata block, so environment-dependent headers never
participate in the comparison.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

import matplotlib.image as mpimg
import numpy as np

from .figures import plot_convergence, plot_tradeoff

_METADATA_BLOCK = re.compile(rb"<metadata>.*?</metadata>", re.S)

CONVERGENCE_TRACES = tuple(
    f"{method}_eps{eps}_delta0.001_seed{seed}.csv"
    for method in ("baseline", "dzoa")
    for eps in ("0.3", "0.8")
    for seed in (0, 1)
)
GOLDEN_NAMES = (
    "convergence.png",
    "convergence.svg",
    "tradeoff_budget.png",
    "tradeoff_delta.svg",
)


def fixture_dir() -> Path:
    return Path(str(resources.files("dzoa_plots"))) / "_fixtures"


def golden_dir() -> Path:
    return fixture_dir() / "golden"


def render_fixture_figures(out_dir) -> dict[str, Path]:
    """Render every golden figure from the fixture CSVs into out_dir."""
    fixtures = fixture_dir()
    traces = [fixtures / "traces" / name for name in CONVERGENCE_TRACES]
    sweep = fixtures / "sweep.csv"
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rendered: dict[str, Path] = {}
    for name in GOLDEN_NAMES:
        target = str(out_dir / name)
        if name.startswith("convergence"):
            rendered[name] = Path(plot_convergence(traces, target))
        elif name == "tradeoff_budget.png":
            rendered[name] = Path(plot_tradeoff(sweep, "epsilon-bar", target))
        else:
            rendered[name] = Path(plot_tradeoff(sweep, "delta", target))
    return rendered


def images_match(rendered: Path, golden: Path) -> bool:
    """Pixel-buffer equality for PNG; byte equality modulo metadata for SVG."""
    if rendered.suffix.lower() == ".png":
        a = mpimg.imread(str(rendered))
        b = mpimg.imread(str(golden))
        return a.shape == b.shape and np.array_equal(a, b)
    a = _METADATA_BLOCK.sub(b"", rendered.read_bytes())
    b = _METADATA_BLOCK.sub(b"", golden.read_bytes())
    return a == b


def verify(out_dir) -> tuple[bool, str]:
    """Render the fixtures into out_dir and compare against the goldens."""
    rendered = render_fixture_figures(out_dir)
    missing = [n for n in rendered if not (golden_dir() / n).exists()]
    if missing:
        return False, f"goldens missing: {', '.join(sorted(missing))}"
    failures = [
        name for name, path in sorted(rendered.items())
        if not images_match(path, golden_dir() / name)
    ]
    if failures:
        return False, (
            f"{len(failures)}/{len(rendered)} figures deviate from goldens: "
            + ", ".join(failures)
        )
    return True, (
        f"{len(rendered)}/{len(rendered)} fixture figures match goldens "
        f"(convergence png+svg, tradeoff budget png, tradeoff delta svg)"
    )
