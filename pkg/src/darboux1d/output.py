"""Delimited table output with embedded provenance.

Format contract: '#'-prefixed header lines, comma-delimited rows, LF line
endings, full-precision scientific notation (17 significant digits), complex
quantities as two columns.  No timestamps anywhere: identical config implies
byte-identical output.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _fmt(x: float) -> str:
    return f"{x:.17e}"


def write_table(path: Path, title: str, meta: dict, columns: list[str], rows) -> None:
    lines = [f"# darboux1d {title}"]
    for k in meta:
        lines.append(f"# {k}: {meta[k]}")
    lines.append("# columns: " + ",".join(columns))
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, str):
                cells.append(v.replace(",", ";"))  # cells must stay comma-free
            else:
                cells.append(_fmt(float(v)))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def write_text(path: Path, title: str, meta: dict, body: str) -> None:
    lines = [f"# darboux1d {title}"]
    for k in meta:
        lines.append(f"# {k}: {meta[k]}")
    lines.append(body)
    path.write_text("\n".join(lines) + "\n", newline="\n")


def provenance_meta(cfg, extra: dict | None = None) -> dict:
    from ._kernel import BACKEND_NAME

    meta = {
        "config_sha256": cfg.config_sha256,
        "config_path": cfg.source_path,
        "kernel_backend": BACKEND_NAME,
        "ode_rtol": _fmt(cfg.tolerances["ode_rtol"]),
        "ode_atol": _fmt(cfg.tolerances["ode_atol"]),
        "scan_step": _fmt(cfg.tolerances["scan_step"]),
        "interval": f"a={_fmt(cfg.interval.a)}, b={_fmt(cfg.interval.b)}, "
                    f"n_nodes={cfg.interval.n_nodes}",
    }
    if extra:
        meta.update(extra)
    return meta


def write_provenance(out_dir: Path, cfg) -> None:
    """Resolved configuration record: defaults included, reproducible."""
    lines = []

    def emit(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                emit(f"{prefix}.{k}" if prefix else k, obj[k])
        elif isinstance(obj, (list, tuple)):
            for i, v in enumerate(obj):
                emit(f"{prefix}[{i}]", v)
        elif isinstance(obj, float):
            lines.append(f"{prefix} = {_fmt(obj)}")
        elif isinstance(obj, complex):
            lines.append(f"{prefix} = {_fmt(obj.real)} {_fmt(obj.imag)}")
        else:
            lines.append(f"{prefix} = {obj}")

    emit("", cfg.resolved)
    write_text(out_dir / "provenance.txt", "resolved run configuration",
               provenance_meta(cfg), "\n".join(lines))


def potential_rows(V) -> tuple[list[str], list]:
    nodes = V.interval.nodes
    vals = V.grid_values()
    rows = [(x, v.real, v.imag) for x, v in zip(nodes, vals)]
    return ["x", "re_V", "im_V"], rows


def wave_rows(ws) -> tuple[list[str], list]:
    rows = [
        (x, v.real, v.imag, d.real, d.imag)
        for x, v, d in zip(ws.interval.nodes, ws.values, ws.derivs)
    ]
    return ["x", "re_psi", "im_psi", "re_dpsi", "im_dpsi"], rows
