"""Batch front end: ``quasiherm CONFIG [--output-dir DIR] [--threads N] [--quiet]``.

Exit status 0 on success, 1 on a domain failure (for instance an
exceptional-point Hamiltonian handed to the dyadic metric construction),
2 on a configuration error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys

import numpy as np

from . import domains, metric, numerics
from .config import ConfigError, RunConfig, load_config
from .errors import QuasiHermError

log = logging.getLogger("quasiherm")

CSV_HEADERS = {
    "spectrum": ["index", "re", "im"],
    "metric": ["element", "row", "col", "value"],
    "scan": ["p1", "p2", "in_DH", "in_DTheta", "in_DQ", "in_D", "real_count", "min_theta_eig"],
    "boundary": ["p1", "p2", "field_value"],
    "secular": ["t", "z1", "z2", "z3", "z4", "n_real"],
    "critical-beta": ["quantity", "value"],
}


def fmt(value) -> str:
    """Fixed 17-significant-digit rendering; booleans as 0/1."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if value == 0.0:
        value = 0.0  # drop the sign of negative zero
    return format(value, ".17g")


def _rows_spectrum(cfg):
    spec = numerics.eig(cfg.model.build())
    for k, ev in enumerate(spec.eigenvalues):
        yield k, ev.real, ev.imag


def _rows_metric(cfg):
    H = cfg.model.build()
    if cfg.get("construction") == "nullspace":
        fam = metric.metric_nullspace_oracle(H)
    else:
        fam = metric.metric_basis(H)
    for e, B in enumerate(fam.basis):
        for i in range(fam.dim):
            for j in range(fam.dim):
                yield e, i, j, B[i, j]


def _rows_scan(cfg, threads):
    n1 = cfg.get("resolution1", cfg.get("resolution"))
    n2 = cfg.get("resolution2", cfg.get("resolution"))
    axes = (
        domains.Axis(cfg.get("axis1"), *cfg.get("range1"), n1),
        domains.Axis(cfg.get("axis2"), *cfg.get("range2"), n2),
    )
    extras = {k: cfg.options[k] for k in domains.EXTRA_FIELDS if k in cfg.options}
    result = domains.scan_grid(
        cfg.model, axes, cfg.get("metric_rule"), cfg.get("weights"), extras, threads=threads
    )
    for c in result.cells:
        f = c.flags
        yield c.p1, c.p2, f.in_DH, f.in_DTheta, f.in_DQ, f.in_D, c.real_count, c.min_theta_eig


def _rows_boundary(cfg):
    truncated = cfg.get("field") == "G0"
    trace = domains.trace_zero_line(
        lambda z, g: domains.evaluate_G(z, g, truncated),
        (cfg.get("z_range"), cfg.get("g_range")),
        cfg.get("resolution"),
        field_name=cfg.get("field"),
    )
    for (z, g), v in zip(trace.points, trace.values):
        yield z, g, v


def _rows_secular(cfg):
    beta = cfg.get("beta_env")
    for t in np.linspace(*cfg.get("t_range"), cfg.get("resolution")):
        roots = domains.real_roots(domains.secular_roots(float(t), beta))
        padded = list(roots) + [math.nan] * (4 - len(roots))
        yield (t, *padded, len(roots))


def _rows_critical_beta(cfg):
    window = cfg.get("window")
    res = cfg.get("resolution")
    lo, hi = cfg.get("bracket")
    beta_c = domains.beta_critical((lo, hi), cfg.get("tol"), window, res)
    yield "beta_critical", beta_c
    for name, beta in (("fusion_offset_lo", lo), ("fusion_offset_hi", hi)):
        yield name, domains.fusion_offset(beta, window, res)


def produce_rows(cfg: RunConfig, threads=1):
    if cfg.command == "scan":
        return list(_rows_scan(cfg, threads))
    producer = {
        "spectrum": _rows_spectrum,
        "metric": _rows_metric,
        "boundary": _rows_boundary,
        "secular": _rows_secular,
        "critical-beta": _rows_critical_beta,
    }[cfg.command]
    return list(producer(cfg))


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def output_file(cfg: RunConfig, output_dir=None) -> str:
    name = cfg.output_path or f"{cfg.command}.csv"
    if output_dir and not os.path.isabs(name):
        name = os.path.join(output_dir, name)
    return name


def run(cfg: RunConfig, output_dir=None, threads=1) -> int:
    path = output_file(cfg, output_dir)
    try:
        rows = produce_rows(cfg, threads)
    except QuasiHermError as exc:
        print(f"quasiherm: {cfg.command} failed: {exc}", file=sys.stderr)
        return 1
    try:
        if os.path.dirname(path):
            os.makedirs(os.path.dirname(path), exist_ok=True)
        write_csv(path, CSV_HEADERS[cfg.command], rows)
    except OSError as exc:
        print(f"quasiherm: cannot write {path}: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %d rows to %s", len(rows), path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="quasiherm", description=__doc__.splitlines()[0])
    parser.add_argument("config", help="flat key = value run configuration")
    parser.add_argument("--output-dir", default=None, help="directory for CSV output")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for grid scans")
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s")
    if args.threads < 1:
        print("quasiherm: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
    except (ConfigError, QuasiHermError) as exc:
        print(f"quasiherm: config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg, args.output_dir, args.threads)


if __name__ == "__main__":
    sys.exit(main())
