"""Command-line entry point: ``splinewidth <verify|basis|widths|converge>``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .kernels import RULES
from .spaces import (SpaceSpec, build_basis, continuity_jump, perturbed_space, trig_basis,
                     verify_boundary_conditions)
from .widths import (DEFAULT_CELLS, DEFAULT_TOL, WidthReport, observed_order, richardson,
                     width_report)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# dimensions of the three figure setups: knot spacing 0.2, 0.2 and 2/9
FIGURE_DIMS = {0: 4, 1: 5, 2: 4}
BASIS_TOL = 1e-9
REPORT_FIELDS = [f.name for f in fields(WidthReport)]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    families: tuple[int, ...]
    rs: tuple[int, ...]
    degrees: tuple[int, ...] | None
    dims: tuple[int, ...] | None
    cells: int
    quad_order: int | None
    tol: float
    candidate: str
    seed: int | None
    samples: int
    fmt: str
    out: str | None
    extrapolate: bool
    rule: str | None
    jobs: int


def _degree_range(text: str) -> tuple[int, ...]:
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if a < 0 or b < a:
        raise argparse.ArgumentTypeError(f"empty or negative degree range {text!r}")
    return tuple(range(a, b + 1))


def _dim_list(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N1,N2,..., got {text!r}") from None
    if any(n < 1 for n in dims):
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return dims


def _candidate(text: str) -> tuple[str, int | None]:
    kind, _, seed = text.partition(":")
    if kind in ("spline", "trig") and not seed:
        return kind, None
    if kind == "perturbed":
        try:
            return kind, int(seed)
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"candidate must be spline, trig or perturbed:SEED, got {text!r}")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="splinewidth",
        description="Compare spline and trigonometric spaces with exact L2 n-widths.")
    p.add_argument("command", choices=["verify", "basis", "widths", "converge"])
    p.add_argument("--family", type=int, action="append", choices=[0, 1, 2],
                   help="boundary-condition family; repeatable (default: all)")
    p.add_argument("--r", type=_positive, action="append",
                   help="smoothness order; repeatable (default: 1)")
    p.add_argument("--degrees", type=_degree_range, help="spline degrees A..B (default: r-1..5)")
    p.add_argument("--dims", type=_dim_list, help="space dimensions N1,N2,... (default: 3,4,5)")
    p.add_argument("--cells", type=_positive, default=DEFAULT_CELLS)
    p.add_argument("--quad-order", type=_positive, help="Gauss points per cell (default: max(d+1, 4))")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative tolerance on the ratio")
    p.add_argument("--candidate", type=_candidate, default=("spline", None))
    p.add_argument("--samples", type=_positive, default=512, help="points per basis export")
    p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="output file (directory for basis); default stdout / cwd")
    p.add_argument("--extrapolate", action="store_true",
                   help="Richardson-extrapolate E over cells and 2*cells")
    p.add_argument("--rule", choices=RULES,
                   help="kernel discretization (default: product; nystrom for converge)")
    p.add_argument("--jobs", type=_positive, default=1, help="worker processes for sweeps")
    return p


def parse_config(argv=None) -> RunConfig:
    a = build_parser().parse_args(argv)
    kind, seed = a.candidate
    return RunConfig(
        command=a.command,
        families=tuple(sorted(set(a.family or (0, 1, 2)))),
        rs=tuple(sorted(set(a.r or (1,)))),
        degrees=a.degrees,
        dims=tuple(sorted(set(a.dims))) if a.dims else None,
        cells=a.cells,
        quad_order=a.quad_order,
        tol=a.tol,
        candidate=kind,
        seed=seed,
        samples=a.samples,
        fmt=a.fmt,
        out=a.out,
        extrapolate=a.extrapolate,
        rule=a.rule,
        jobs=a.jobs,
    )


def _degrees_for(cfg: RunConfig, r: int) -> tuple[int, ...]:
    return cfg.degrees if cfg.degrees is not None else tuple(range(max(r - 1, 0), 6))


def _make_candidate(cfg: RunConfig, family: int, d: int | None, n: int):
    if cfg.candidate == "trig":
        return trig_basis(family, n)
    if cfg.candidate == "perturbed":
        # seeded per row so results do not depend on sweep order or worker count
        rng = np.random.default_rng([cfg.seed, family, d, n])
        return perturbed_space(family, d, n, rng)
    return SpaceSpec(family, d, n)


def _report(cfg: RunConfig, family: int, r: int, d: int | None, n: int) -> WidthReport:
    return width_report(family, r, _make_candidate(cfg, family, d, n), cells=cfg.cells,
                        q=cfg.quad_order, extrapolate=cfg.extrapolate,
                        rule=cfg.rule or "product")


def _report_task(args) -> WidthReport:
    return _report(*args)


def _status(cfg: RunConfig, rep: WidthReport) -> str:
    if rep.exploratory:
        return "exploratory"
    if cfg.candidate == "perturbed":
        # any space is at least as far as the optimal one
        ok = rep.ratio >= 1.0 - cfg.tol
    else:
        ok = abs(rep.ratio - 1.0) <= cfg.tol
    return "pass" if ok else "fail"


def _format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(rows[0].keys())
        writer.writerows([_format_value(v) for v in row.values()] for row in rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from exc


def cmd_verify(cfg: RunConfig) -> int:
    dims = cfg.dims or (3, 4, 5)
    tasks = []
    for family in cfg.families:
        for r in cfg.rs:
            degrees = (None,) if cfg.candidate == "trig" else _degrees_for(cfg, r)
            tasks += [(cfg, family, r, d, n) for d in degrees for n in dims]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            reports = list(pool.map(_report_task, tasks))
    else:
        reports = [_report_task(t) for t in tasks]
    rows = []
    for rep in reports:
        row = rep.to_dict()
        row["status"] = _status(cfg, rep)
        rows.append(row)
    rows.sort(key=lambda row: (row["family"], row["r"], -1 if row["degree"] is None
                               else row["degree"], row["n"]))
    _emit(_render(rows, cfg.fmt), cfg.out)
    return EXIT_FAIL if any(row["status"] == "fail" for row in rows) else EXIT_OK


def basis_table(family: int, d: int, n: int, samples: int) -> tuple[list[str], np.ndarray]:
    """Header and rows ``x, b1..bn`` of S_{d,family} at equally spaced points."""
    x = np.linspace(0.0, 1.0, samples)
    values = build_basis(SpaceSpec(family, d, n)).evaluate(x)
    return ["x"] + [f"b{i + 1}" for i in range(n)], np.column_stack([x, values])


def basis_checks(family: int, d: int, n: int) -> dict[str, float]:
    basis = build_basis(SpaceSpec(family, d, n))
    return {"dimension": float(basis.dim != n),
            "boundary": verify_boundary_conditions(basis).max_violation,
            "continuity": continuity_jump(basis)}


def cmd_basis(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out or ".")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {out_dir}: {exc}") from exc
    degrees = cfg.degrees if cfg.degrees is not None else tuple(range(4))
    status = EXIT_OK
    for family in cfg.families:
        for d in degrees:
            for n in cfg.dims or (FIGURE_DIMS[family],):
                header, table = basis_table(family, d, n, cfg.samples)
                buf = io.StringIO()
                writer = csv.writer(buf, lineterminator="\n")
                writer.writerow(header)
                writer.writerows([repr(float(v)) for v in row] for row in table)
                _emit(buf.getvalue(), str(out_dir / f"basis_family{family}_d{d}_n{n}.csv"))
                checks = basis_checks(family, d, n)
                bad = {k: v for k, v in checks.items() if v >= BASIS_TOL}
                if bad:
                    print(f"family {family}, d={d}, n={n}: failed checks {bad}", file=sys.stderr)
                    status = EXIT_FAIL
    return status


def _single(values, name: str):
    if values is None:
        return None
    if len(values) != 1:
        raise UsageError(f"widths takes exactly one {name}, got {len(values)}")
    return values[0]


def cmd_widths(cfg: RunConfig) -> int:
    family = _single(cfg.families, "family")
    r = _single(cfg.rs, "r")
    d = None if cfg.candidate == "trig" else (_single(cfg.degrees, "degree")
                                              if cfg.degrees is not None else max(r - 1, 0))
    n = _single(cfg.dims, "dimension") or 4
    rep = _report(cfg, family, r, d, n)
    _emit(json.dumps(rep.to_dict(), indent=2) + "\n", cfg.out)
    return EXIT_FAIL if _status(cfg, rep) == "fail" else EXIT_OK


def cmd_converge(cfg: RunConfig) -> int:
    family = _single(cfg.families, "family")
    r = _single(cfg.rs, "r")
    d = None if cfg.candidate == "trig" else (_single(cfg.degrees, "degree")
                                              if cfg.degrees is not None else max(r - 1, 0))
    n = _single(cfg.dims, "dimension") or 4
    levels = [cfg.cells // 4, cfg.cells // 2, cfg.cells, 2 * cfg.cells]
    if levels[0] < 1:
        raise UsageError("--cells must be at least 4 for a convergence study")
    candidate = _make_candidate(cfg, family, d, n)
    rule = cfg.rule or "nystrom"
    reports = [width_report(family, r, candidate, cells=m, q=cfg.quad_order, rule=rule)
               for m in levels]
    order = observed_order(reports)
    if not math.isfinite(order) or order <= 0:
        order = 1.0
    dn = reports[0].theoretical_dn
    rows = [{"level": str(rep.cells), "cells": rep.cells, "computed_E": rep.computed_E,
             "theoretical_dn": dn, "ratio": rep.ratio, "abs_error": abs(rep.computed_E - dn)}
            for rep in reports]
    E = richardson(reports[-2].computed_E, reports[-1].computed_E, order)
    rows.append({"level": "extrapolated", "cells": levels[-1], "computed_E": E,
                 "theoretical_dn": dn, "ratio": E / dn, "abs_error": abs(E - dn)})
    _emit(_render(rows, cfg.fmt), cfg.out)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "basis": cmd_basis, "widths": cmd_widths,
            "converge": cmd_converge}


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[cfg.command](cfg)
    except (UsageError, ValueError) as exc:
        print(f"splinewidth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
