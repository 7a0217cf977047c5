"""Figure rendering: energy, constraints, estimate ratio, growth, spectra.

Figures are static files; reruns produce byte-identical output (fixed figure
geometry, no timestamps or library banners in the metadata, pinned SVG hash
salt).  Input artifacts are never written to.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "reportplots"

import matplotlib.pyplot as plt

from .reader import RunArtifactView

_META = {"png": {"Software": None}, "svg": {"Date": None}}


def _save(fig, path, fmt):
    fig.savefig(path, format=fmt, metadata=_META[fmt], dpi=110)
    plt.close(fig)


def plot_run(root: str, fmt: str = "png"):
    """Render every figure the artifacts in `root` support; returns the paths."""
    if fmt not in ("png", "svg"):
        raise ValueError(f"unsupported format {fmt!r}")
    view = RunArtifactView.load(root)
    written = []
    if view.series:
        written.append(_plot_energy(view, root, fmt))
        written.append(_plot_constraints(view, root, fmt))
        written.append(_plot_ratio(view, root, fmt))
    if view.growth:
        written.append(_plot_growth(view, root, fmt))
    if view.spectra is not None:
        written.append(_plot_spectra(view, root, fmt))
    return written


def _plot_energy(view, root, fmt):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, s in view.series:
        ax.plot(s["t"], s["I"], label=f"I [{label}]")
        ax.plot(s["t"], s["Ivac"], "--", label=f"Ivac [{label}]")
        ax.plot(s["t"], s["surfTerm"], ":", label=f"surface [{label}]")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title("interior energy and surface term")
    ax.legend(fontsize=7)
    path = os.path.join(root, f"energy.{fmt}")
    _save(fig, path, fmt)
    return path


def _plot_constraints(view, root, fmt):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, s in view.series:
        ax.plot(s["t"], s["divFluidMax"], label=f"div fluid [{label}]")
        ax.plot(s["t"], s["divVacMax"], "--", label=f"div vacuum [{label}]")
        ax.plot(s["t"], s["traceHNMax"], ":", label=f"normal traces [{label}]")
    ax.set_xlabel("t")
    ax.set_ylabel("max residual")
    ax.set_title("constraint residual maxima")
    ax.legend(fontsize=7)
    path = os.path.join(root, f"constraints.{fmt}")
    _save(fig, path, fmt)
    return path


def _plot_ratio(view, root, fmt):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, s in view.series:
        ax.plot(s["t"], s["ratio54"], label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("lhs / rhs")
    ax.set_title("energy-estimate ratio (ratio54)")
    ax.legend(fontsize=8)
    path = os.path.join(root, f"ratio54.{fmt}")
    _save(fig, path, fmt)
    return path


def _plot_growth(view, root, fmt):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, g in view.growth:
        # one curve per tension value found in the table
        tensions = sorted(set(g["sTension"]))
        for s in tensions:
            ks = [k for k, sv in zip(g["k2"], g["sTension"]) if sv == s]
            rs = [r for r, sv in zip(g["growthRate"], g["sTension"]) if sv == s]
            ax.plot(ks, rs, marker="o", label=f"s = {s:g} [{label}]")
    ax.set_xlabel("tangential wavenumber k2")
    ax.set_ylabel("max growth rate")
    ax.set_title("frozen-coefficient growth")
    ax.legend(fontsize=8)
    path = os.path.join(root, f"growth.{fmt}")
    _save(fig, path, fmt)
    return path


def _plot_spectra(view, root, fmt):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    sp = view.spectra
    names = sorted(set(sp["matrix"]))
    for pos, name in enumerate(names):
        eigs = [e for m, e in zip(sp["matrix"], sp["eig"]) if m == name]
        ax.plot([pos] * len(eigs), eigs, "o", ms=4)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("eigenvalue")
    ax.set_title("boundary-matrix spectra")
    fig.subplots_adjust(bottom=0.28)
    path = os.path.join(root, f"spectra.{fmt}")
    _save(fig, path, fmt)
    return path
