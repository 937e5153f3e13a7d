"""Persistence of study results: JSON summaries, delimited data files, and
matplotlib figures rendered next to them.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

FIGURE_DPI = 140


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def sweep_rows(report: dict) -> list:
    """CSV rows (k, quantity, bound, ratio) for a swept estimate report."""
    slope = report.get("fitted_slope")
    const = report.get("bound_constant")
    rows = []
    for k, value in report["sweep"]:
        if slope is not None and const is not None:
            bound = const * k ** slope
        else:
            bound = report.get("bound_constant") or value
        rows.append([repr(float(k)), repr(float(value)), repr(float(bound)),
                     repr(float(value / bound)) if bound else ""])
    return rows


def sweep_figure(report: dict, path) -> None:
    ks = np.array([k for k, _ in report["sweep"]], dtype=float)
    vals = np.array([v for _, v in report["sweep"]], dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.loglog(ks, vals, "o-", label="measured")
    slope = report.get("fitted_slope")
    const = report.get("bound_constant")
    if slope is not None and const is not None:
        ax.loglog(ks, const * ks ** slope, "--",
                  label=f"fit slope {slope:+.3f}")
    ax.set_xlabel("wavenumber k")
    ax.set_ylabel(report.get("quantity", "value"))
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(f"{report.get('quantity', '')} [{report.get('verdict', '')}]",
                 fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)


def probe_figure(values, floor, path, label="ratio") -> None:
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.bar(np.arange(values.size), values, color="#4878a8")
    if floor is not None:
        ax.axhline(floor, color="crimson", ls="--", lw=1.0,
                   label=f"floor {floor:.4f}")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel("ensemble member")
    ax.set_ylabel(label)
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)


def density_figure(centers: np.ndarray, solution: np.ndarray, path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    if centers.shape[1] == 1:
        x = centers[:, 0]
        ax.plot(x, np.abs(solution), "k-", lw=1.2, label="|v|")
        ax.plot(x, solution.real, lw=0.8, label="Re v")
        ax.plot(x, solution.imag, lw=0.8, label="Im v")
        ax.set_xlabel("position on screen")
        ax.legend(frameon=False, fontsize=8)
    else:
        n = int(round(np.sqrt(centers.shape[0])))
        img = np.abs(solution).reshape(n, -1)
        im = ax.imshow(img.T, origin="lower", aspect="auto")
        fig.colorbar(im, ax=ax, label="|v|")
    ax.set_title("solved density", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)


def field_figure(x: np.ndarray, y: np.ndarray, values: np.ndarray, path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    grid = np.abs(values).reshape(y.size, x.size)
    im = ax.pcolormesh(x, y, grid, shading="auto")
    fig.colorbar(im, ax=ax, label="|u|")
    ax.set_xlabel("in-plane coordinate")
    ax.set_ylabel("offset from screen plane")
    ax.set_title("scattered field magnitude", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
