"""Batch front end: configure and run solves, probes, wavenumber sweeps and
the acceptance suite, persisting results as JSON + CSV + figures.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, acceptance, bem, estimates as est, report
from .geometry import ScreenGeometry

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2

SWEEP_QUANTITIES = {
    "single_layer_continuity_shift":
        lambda lab, ks, s: est.probe_continuity_single_layer(
            lab, -0.5 if s is None else s, ks, mode="shift"),
    "single_layer_continuity_same":
        lambda lab, ks, s: est.probe_continuity_single_layer(
            lab, 0.0 if s is None else s, ks, mode="same"),
    "neumann_modulated_rayleigh":
        lambda lab, ks, s: est.probe_neumann_modulated_slope(lab, ks),
    "neumann_coercivity":
        lambda lab, ks, s: est.probe_coercivity_neumann(lab, ks),
    "hypersingular_continuity":
        lambda lab, ks, s: est.probe_continuity_hypersingular(
            lab, (0.0, 0.5, 1.0) if s is None else (s,), ks),
    "condition_single_layer":
        lambda lab, ks, s: est.condition_number_study(lab, ks, "single_layer"),
    "condition_hypersingular":
        lambda lab, ks, s: est.condition_number_study(lab, ks,
                                                      "hypersingular"),
}

PROBE_QUANTITIES = ("dirichlet_coercivity", "neumann_coercivity",
                    "hypersingular_cap", "trace_planewave",
                    "trace_fundamental")


class ConfigError(ValueError):
    """Raised with a `field: problem` message for malformed configs."""


@dataclass
class StudyConfig:
    mode: str
    dim: int = 2
    geometry: Optional[ScreenGeometry] = None
    seed: int = 42
    out_dir: str = "screenwave_out"
    k: Optional[float] = None
    kl_values: list = field(default_factory=list)
    mesh_n: int = 64
    wave_direction: Optional[list] = None
    quantity: Optional[str] = None
    s: Optional[float] = None
    criteria: Optional[list] = None
    accuracy: Optional[float] = None
    raw: dict = field(default_factory=dict)


def _expect(condition, where, message):
    if not condition:
        raise ConfigError(f"{where}: {message}")


def config_from_dict(raw: dict) -> StudyConfig:
    _expect(isinstance(raw, dict), "<root>", "config must be a JSON object")
    mode = raw.get("mode")
    _expect(mode in ("solve", "probe", "sweep", "validate"), "mode",
            "must be one of solve, probe, sweep, validate")
    dim = raw.get("dim", 2)
    _expect(dim in (2, 3), "dim", "ambient dimension must be 2 or 3")

    geo_spec = raw.get("geometry")
    if geo_spec is None:
        geometry = (ScreenGeometry.interval(-0.5, 0.5) if dim == 2
                    else ScreenGeometry.rect((-0.5, 0.5), (-0.5, 0.5)))
    else:
        _expect(isinstance(geo_spec, dict), "geometry", "must be an object")
        try:
            if dim == 2:
                _expect("intervals" in geo_spec, "geometry.intervals",
                        "required for dim 2")
                geometry = ScreenGeometry.union_of_intervals(
                    geo_spec["intervals"])
            else:
                _expect("rectangle" in geo_spec, "geometry.rectangle",
                        "required for dim 3")
                rect = geo_spec["rectangle"]
                geometry = ScreenGeometry.rect(rect[0], rect[1])
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"geometry: {exc}") from exc

    seed = raw.get("seed", 42)
    _expect(isinstance(seed, int) and seed >= 0, "seed",
            "must be a nonnegative integer")

    cfg = StudyConfig(mode=mode, dim=dim, geometry=geometry, seed=seed,
                      out_dir=raw.get("out_dir", "screenwave_out"), raw=raw)
    if "accuracy" in raw:
        _expect(isinstance(raw["accuracy"], (int, float))
                and raw["accuracy"] > 0, "accuracy", "must be positive")
        cfg.accuracy = float(raw["accuracy"])

    if mode == "solve":
        k = raw.get("k")
        _expect(isinstance(k, (int, float)) and k > 0, "k",
                "must be a positive number")
        cfg.k = float(k)
        n = raw.get("mesh_n", 64)
        _expect(isinstance(n, int) and 32 <= n <= 4096
                and (n & (n - 1)) == 0, "mesh_n",
                "must be a power of two in [32, 4096]")
        cfg.mesh_n = n
        d = raw.get("wave_direction", [0.0, -1.0] if dim == 2
                    else [0.0, 0.0, -1.0])
        _expect(isinstance(d, (list, tuple)) and len(d) == dim,
                "wave_direction", f"must have {dim} components")
        _expect(abs(np.linalg.norm(np.asarray(d, float)) - 1.0) < 1e-9,
                "wave_direction", "must be a unit vector")
        cfg.wave_direction = [float(c) for c in d]
    elif mode == "probe":
        q = raw.get("quantity", "dirichlet_coercivity")
        _expect(q in PROBE_QUANTITIES, "quantity",
                f"must be one of {', '.join(PROBE_QUANTITIES)}")
        cfg.quantity = q
        k = raw.get("k")
        _expect(isinstance(k, (int, float)) and k > 0, "k",
                "must be a positive number")
        cfg.k = float(k)
        if "s" in raw:
            cfg.s = float(raw["s"])
    elif mode == "sweep":
        q = raw.get("quantity", "single_layer_continuity_shift")
        _expect(q in SWEEP_QUANTITIES, "quantity",
                f"must be one of {', '.join(sorted(SWEEP_QUANTITIES))}")
        cfg.quantity = q
        kls = raw.get("kl_values")
        _expect(isinstance(kls, (list, tuple)) and len(kls) >= 1,
                "kl_values", "must be a nonempty list")
        for i, v in enumerate(kls):
            _expect(isinstance(v, (int, float)) and v > 0,
                    f"kl_values[{i}]", "entries must be positive")
        cfg.kl_values = [float(v) for v in kls]
        if "s" in raw:
            cfg.s = float(raw["s"])
    else:  # validate
        crits = raw.get("criteria")
        if crits is not None:
            _expect(isinstance(crits, (list, tuple)) and crits,
                    "criteria", "must be a nonempty list when given")
            known = set(acceptance.CRITERION_IDS) | {
                name for _, name, _ in acceptance.CRITERIA}
            for i, c in enumerate(crits):
                _expect(c in known, f"criteria[{i}]",
                        f"unknown criterion {c!r}")
            cfg.criteria = list(crits)
    return cfg


def load_config(path) -> StudyConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"<file>: config not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<file>: invalid JSON in {path}: {exc}")
    return config_from_dict(raw)


def bundled_config(mode: str) -> StudyConfig:
    name = {"solve": "solve_line.json", "probe": "probe_coercivity.json",
            "sweep": "sweep_continuity.json", "validate": "validate.json"}[mode]
    text = resources.files("screenwave.configs").joinpath(name).read_text()
    return config_from_dict(json.loads(text))


def _envelope(cfg: StudyConfig, status: str, results: dict,
              caught: list) -> dict:
    return {
        "tool": {"name": "screenwave", "version": __version__},
        "generated_at": datetime.datetime.now(datetime.timezone.utc)
        .isoformat(),
        "mode": cfg.mode,
        "config": cfg.raw,
        "status": status,
        "results": results,
        "warnings": [str(w.message) for w in caught],
    }


def run_solve(cfg: StudyConfig, out: Path) -> int:
    mesh = bem.ScreenMesh.uniform(
        cfg.geometry, cfg.mesh_n if cfg.dim == 2
        else (int(np.sqrt(cfg.mesh_n)),) * 2)
    wave = bem.IncidentWave(direction=cfg.wave_direction, wavenumber=cfg.k)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        system = bem.solve_dirichlet(mesh, wave)
        centers = mesh.centers()
        coord_cols = ["x"] if cfg.dim == 2 else ["x", "y"]
        rows = [[i] + [repr(float(c)) for c in centers[i]]
                + [repr(float(system.solution[i].real)),
                   repr(float(system.solution[i].imag))]
                for i in range(mesh.n_elements)]
        report.write_csv(out / "density.csv",
                         ["index"] + coord_cols + ["re", "im"], rows)

        L = cfg.geometry.diameter
        c = cfg.geometry.centroid
        gx = np.linspace(c[0] - L, c[0] + L, 61)
        gz = np.linspace(-L, L, 40)
        vals = np.empty((gz.size, gx.size), dtype=complex)
        for iz, z in enumerate(gz):
            for ix, x in enumerate(gx):
                point = (np.array([x, z]) if cfg.dim == 2
                         else np.array([x, c[1], z]))
                vals[iz, ix] = bem.scattered_field(system, point)
        frows = [[repr(float(x)), repr(float(z)),
                  repr(float(vals[iz, ix].real)), repr(float(vals[iz, ix].imag))]
                 for iz, z in enumerate(gz) for ix, x in enumerate(gx)]
        report.write_csv(out / "field.csv", ["x", "offset", "re", "im"], frows)
        report.density_figure(centers, system.solution, out / "density.png")
        report.field_figure(gx, gz, vals.ravel(), out / "field.png")

    payload = _envelope(cfg, "pass", {
        "n_elements": mesh.n_elements,
        "condition_estimate": system.cond_estimate,
        "flags": system.flags,
    }, caught)
    report.write_json(out / "results.json", payload)
    return EXIT_OK


def run_probe(cfg: StudyConfig, out: Path) -> int:
    lab = est.SweepLab(cfg.geometry, seed=cfg.seed, accuracy=cfg.accuracy)
    status = "pass"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if cfg.quantity == "dirichlet_coercivity":
            ratios = lab.dirichlet_rayleigh(cfg.k)
            outcome = est.probe_coercivity_dirichlet(lab, cfg.k)
            status = "pass" if outcome["passed"] else "fail"
            report.write_csv(out / "probe.csv", ["member", "ratio"],
                             [[i, repr(float(r))] for i, r in enumerate(ratios)])
            report.probe_figure(ratios, est.DIRICHLET_FLOOR,
                                out / "probe.png")
        elif cfg.quantity == "neumann_coercivity":
            ratios = lab.neumann_rayleigh(cfg.k)
            outcome = {"min_ratio": float(np.min(ratios)), "k": cfg.k}
            report.write_csv(out / "probe.csv", ["member", "ratio"],
                             [[i, repr(float(r))] for i, r in enumerate(ratios)])
            report.probe_figure(ratios, None, out / "probe.png")
        elif cfg.quantity == "hypersingular_cap":
            s = 0.5 if cfg.s is None else cfg.s
            ratios = lab.hypersingular_ratios(cfg.k, s)
            ok = float(np.max(ratios)) <= est.HYPERSINGULAR_CAP + 1e-6
            outcome = {"max_ratio": float(np.max(ratios)), "s": s,
                       "cap": est.HYPERSINGULAR_CAP, "passed": ok}
            status = "pass" if ok else "fail"
            report.write_csv(out / "probe.csv", ["member", "ratio"],
                             [[i, repr(float(r))] for i, r in enumerate(ratios)])
            report.probe_figure(ratios, est.HYPERSINGULAR_CAP,
                                out / "probe.png", label="norm ratio")
        elif cfg.quantity == "trace_planewave":
            s = 0.0 if cfg.s is None else cfg.s
            direction = np.zeros(cfg.dim)
            direction[0] = 1.0
            val = est.trace_norm_planewave(direction, s, cfg.k, cfg.geometry)
            outcome = {"value": val, "s": s, "k": cfg.k}
            report.write_csv(out / "probe.csv", ["k", "s", "value"],
                             [[repr(cfg.k), repr(s), repr(val)]])
        else:  # trace_fundamental
            probe_pt = np.zeros(cfg.dim)
            probe_pt[-1] = 0.5 * cfg.geometry.diameter
            val = est.trace_norm_fundamental(probe_pt, cfg.k, cfg.geometry)
            outcome = {"value": val, "k": cfg.k,
                       "probe": probe_pt.tolist()}
            report.write_csv(out / "probe.csv", ["k", "value"],
                             [[repr(cfg.k), repr(val)]])
    payload = _envelope(cfg, status, {cfg.quantity: outcome}, caught)
    report.write_json(out / "results.json", payload)
    return EXIT_OK if status == "pass" else EXIT_ERROR


def run_sweep(cfg: StudyConfig, out: Path, jobs: int = 1) -> int:
    L = cfg.geometry.diameter
    ks = sorted(kl / L for kl in cfg.kl_values)
    if len(ks) < 4:
        payload = _envelope(cfg, "inconclusive", {
            "reason": f"cannot fit a scaling exponent from {len(ks)} "
                      "wavenumber(s); need at least 4"}, [])
        report.write_json(out / "results.json", payload)
        return EXIT_INCONCLUSIVE
    lab = est.SweepLab(cfg.geometry, seed=cfg.seed, accuracy=cfg.accuracy)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                list(pool.map(lab.at, ks))
        rep = SWEEP_QUANTITIES[cfg.quantity](lab, ks, cfg.s).as_dict()
        report.write_csv(out / "sweep.csv", ["k", "quantity", "bound", "ratio"],
                         report.sweep_rows(rep))
        report.sweep_figure(rep, out / "sweep.png")
    status = {"pass": "pass", "fail": "fail",
              "inconclusive": "inconclusive"}[rep["verdict"]]
    payload = _envelope(cfg, status, {cfg.quantity: rep}, caught)
    report.write_json(out / "results.json", payload)
    return {"pass": EXIT_OK, "fail": EXIT_ERROR,
            "inconclusive": EXIT_INCONCLUSIVE}[status]


def run_validate(cfg: StudyConfig, out: Path) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        summary = acceptance.run_all(cfg.criteria, seed=cfg.seed)
    if summary["all_passed"]:
        status = "pass"
    elif summary["any_inconclusive"] and all(
            r["passed"] or r["inconclusive"] for r in summary["results"]):
        status = "inconclusive"
    else:
        status = "fail"
    payload = _envelope(cfg, status, summary, caught)
    report.write_json(out / "results.json", payload)
    return {"pass": EXIT_OK, "fail": EXIT_ERROR,
            "inconclusive": EXIT_INCONCLUSIVE}[status]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="screenwave",
        description="Acoustic scattering by flat screens: solves, estimate "
                    "probes, wavenumber sweeps, and the acceptance suite.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "probe", "sweep", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON study config (bundled default otherwise)")
        p.add_argument("--out", type=str, default=None,
                       help="output directory")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel sweep jobs")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config's ensemble seed")
    args = parser.parse_args(argv)

    try:
        cfg = (load_config(args.config) if args.config
               else bundled_config(args.command))
        if cfg.mode != args.command:
            raise ConfigError(
                f"mode: config says {cfg.mode!r}, command is "
                f"{args.command!r}")
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.raw["seed"] = args.seed
        out = Path(args.out) if args.out else Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "solve":
            return run_solve(cfg, out)
        if args.command == "probe":
            return run_probe(cfg, out)
        if args.command == "sweep":
            return run_sweep(cfg, out, jobs=max(1, args.jobs))
        return run_validate(cfg, out)
    except ConfigError as exc:
        print(f"config error - {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error - {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
