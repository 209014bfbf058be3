"""Report assembly and deterministic JSON/CSV serialization.

Floats are written with 17 significant digits (``%.17g``); non-finite
values become JSON null / empty CSV cells.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from datetime import datetime, timezone

import numpy as np

from diraclab import __version__
from diraclab.catalog import (
    EnergyLevel,
    PrincipalNumberError,
    QuantumNumbers,
    Variant,
)
from diraclab.config import RunConfig
from diraclab.crossings import (
    CrossingPair,
    SearchBounds,
    crossings,
    dirac_states,
    oscillator2_infeasible_j,
    toy_states,
)
from diraclab.oracle import GridPolicy, OracleReport, verify_level
from diraclab.problems import model_problem
from diraclab.spectra import energy_levels
from diraclab.susy import PAIRINGS, all_signatures, branch_name

NOT_FEASIBLE = {
    Variant.CoulombII: "energy-level crossings are not feasible for this model",
    Variant.OscillatorIII: "neither energy-level crossings nor flown-away states are feasible for this model",
}


def fmt_number(x) -> str | None:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return None
    return f"{x:.17g}"


def to_json(obj, indent: int = 2) -> str:
    """Deterministic JSON with fixed float formatting and insertion-ordered keys."""
    out = io.StringIO()

    def emit(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None:
            out.write("null")
        elif isinstance(o, (bool, int, float, np.floating, np.integer)):
            s = fmt_number(o)
            out.write("null" if s is None else s)
        elif isinstance(o, str):
            out.write(json.dumps(o, ensure_ascii=False))
        elif isinstance(o, dict):
            if not o:
                out.write("{}")
                return
            out.write("{\n")
            for i, (k, v) in enumerate(o.items()):
                out.write(f"{pad}{json.dumps(str(k))}: ")
                emit(v, level + 1)
                out.write(",\n" if i < len(o) - 1 else "\n")
            out.write(end + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.write("[]")
                return
            out.write("[\n")
            for i, v in enumerate(o):
                out.write(pad)
                emit(v, level + 1)
                out.write(",\n" if i < len(o) - 1 else "\n")
            out.write(end + "]")
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj, 0)
    out.write("\n")
    return out.getvalue()


def to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        cells = []
        for c in columns:
            v = row.get(c)
            if v is None:
                cells.append("")
            elif isinstance(v, (bool, int, float, np.floating, np.integer)):
                cells.append(fmt_number(v) or "")
            elif isinstance(v, (list, tuple, dict)):
                cells.append(json.dumps(v, sort_keys=True))
            else:
                cells.append(str(v))
        writer.writerow(cells)
    return buf.getvalue()


def config_hash(cfg: RunConfig) -> str:
    payload = json.dumps(cfg.canonical(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def metadata(cfg: RunConfig, kind: str, **extra) -> dict:
    return {
        "kind": kind,
        "tool_version": __version__,
        "config_hash": config_hash(cfg),
        "timestamp": timestamp(),
        "config": cfg.canonical(),
        **extra,
    }


def bounds_of(cfg: RunConfig) -> SearchBounds:
    ell_max = cfg.ell_max if cfg.model in (Variant.CoulombII, Variant.OscillatorIII) else None
    return SearchBounds(cfg.n_r_max, cfg.two_j_max, ell_max)


def states_of(cfg: RunConfig) -> list[QuantumNumbers]:
    b = bounds_of(cfg)
    if cfg.model in (Variant.OscillatorToy, Variant.CoulombToy):
        return toy_states(b)
    return dirac_states(b)


def _qn_fields(qn: QuantumNumbers, prefix="") -> dict:
    return {f"{prefix}n_r": qn.n_r, f"{prefix}ell": qn.ell, f"{prefix}j": f"{qn.two_j}/2",
            f"{prefix}kappa": qn.kappa, f"{prefix}q": qn.q}


def _level_fields(lvl: EnergyLevel) -> dict:
    lam = complex(lvl.lam) if lvl.lam is not None else complex(math.nan, math.nan)
    return {
        "E_re": lvl.value.real,
        "E_im": lvl.value.imag,
        "lambda_re": lam.real,
        "lambda_im": lam.imag,
        "classification": lvl.classification.value,
    }


def _policy(cfg: RunConfig) -> GridPolicy:
    return GridPolicy(n_points=cfg.grid_points, tol=cfg.tol, r_max=cfg.r_max,
                      n_max=max(64000, 4 * cfg.grid_points))


def _oracle_fields(rep: OracleReport | None) -> dict:
    if rep is None:
        return {"oracle_rel_residual": None, "oracle_converged": None, "oracle_diagnostic": ""}
    return {"oracle_rel_residual": rep.rel_residual, "oracle_converged": rep.converged,
            "oracle_diagnostic": rep.diagnostic}


def spectrum_rows(cfg: RunConfig, spec=None, verify: bool | None = None) -> tuple[list[dict], int, int]:
    """Rows for every state and branch; returns (rows, excluded_count, oracle_failures)."""
    spec = spec or cfg.spec()
    verify = cfg.verify if verify is None else verify
    rows, excluded, failures = [], 0, 0
    policy = _policy(cfg)
    for qn in states_of(cfg):
        try:
            levels = energy_levels(spec, qn, "both")
        except PrincipalNumberError:
            excluded += 1
            continue
        for lvl in levels:
            row = {**_qn_fields(qn), "branch": lvl.branch, **_level_fields(lvl), "note": lvl.note}
            if verify:
                rep = None
                if lvl.is_real:
                    rep = verify_level(model_problem(spec, qn, lvl.branch), lvl, policy)
                    failures += not rep.converged
                row.update(_oracle_fields(rep))
            rows.append(row)
    return rows, excluded, failures


def spectrum_report(cfg: RunConfig) -> tuple[dict, int]:
    rows, excluded, failures = spectrum_rows(cfg)
    meta = metadata(cfg, "spectrum", excluded_states=excluded)
    if cfg.verify:
        meta["oracle_failures"] = failures
    return {"metadata": meta, "rows": rows}, failures


def _pair_row(p: CrossingPair) -> dict:
    e = p.energy
    return {**_qn_fields(p.state_a, "a_"), "a_branch": p.branch_a,
            **_qn_fields(p.state_b, "b_"), "b_branch": p.branch_b,
            "condition": p.condition,
            "E_re": e.value.real if e is not None else None,
            "E_im": e.value.imag if e is not None else None}


def crossings_report(cfg: RunConfig) -> dict:
    spec = cfg.spec()
    if cfg.model in NOT_FEASIBLE:
        meta = metadata(cfg, "crossings", feasible=False, statement=NOT_FEASIBLE[cfg.model])
        return {"metadata": meta, "rows": []}
    pairs = crossings(spec, bounds_of(cfg))
    extra = {"feasible": True, "pair_count": len(pairs)}
    if cfg.model is Variant.OscillatorII:
        extra["infeasible_j_pairs"] = [f"{a}/{b}" for a, b in oscillator2_infeasible_j(bounds_of(cfg))]
    if spec.is_toy and not pairs:
        extra["note"] = "no integer offset between quasi-parity sets for this A"
    return {"metadata": metadata(cfg, "crossings", **extra), "rows": [_pair_row(p) for p in pairs]}


def susy_report(cfg: RunConfig) -> dict:
    spec = cfg.spec()
    rows = []
    for rep in all_signatures(cfg.model, spec["A"], spec["B"], cfg.depth):
        a, b = rep.pairing
        rows.append({
            "pairing": rep.pairing_name,
            "branch_a": branch_name(*a),
            "branch_b": branch_name(*b),
            "verdict": rep.verdict.value,
            "shift": rep.shift,
            "zero_mode_a": rep.zero_modes[0],
            "zero_mode_b": rep.zero_modes[1],
            "evidence": [[e.n_r, e.lambda_a, e.lambda_b, e.residual] for e in rep.evidence],
        })
    return {"metadata": metadata(cfg, "susy", pairings=list(PAIRINGS)), "rows": rows}


def scan_values(cfg: RunConfig) -> np.ndarray:
    if cfg.scan_parameter is None:
        raise ValueError("scan needs scan_parameter, scan_start, scan_stop, scan_steps")
    if cfg.scan_steps is None or cfg.scan_steps < 1:
        raise ValueError("scan_steps must be >= 1")
    if cfg.scan_steps > 1 and cfg.scan_start == cfg.scan_stop:
        raise ValueError("zero-length scan range")
    return np.linspace(cfg.scan_start, cfg.scan_stop, cfg.scan_steps)


def scan_report(cfg: RunConfig) -> dict:
    """Long-format rows: one per (scan value, state, branch); ``transition`` marks class changes."""
    rows = []
    previous: dict = {}
    name = cfg.scan_parameter
    for x in scan_values(cfg):
        value = float(x) if name == "m" else complex(x) * cfg.scan_factor
        spec = cfg.spec(**{name: value})
        point_rows, _, _ = spectrum_rows(cfg, spec, verify=False)
        for row in point_rows:
            key = (row["n_r"], row["kappa"], row["q"], row["branch"])
            cls = row["classification"]
            row = {"scan_parameter": name, "scan_value": float(x), **row,
                   "transition": key in previous and previous[key] != cls}
            previous[key] = cls
            rows.append(row)
    return {"metadata": metadata(cfg, "scan"), "rows": rows}


_PAIR_COLUMNS = [f"{p}{k}" for p in ("a_", "b_") for k in ("n_r", "ell", "j", "kappa", "q", "branch")]
_PAIR_COLUMNS += ["condition", "E_re", "E_im"]


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(doc)
    rows = doc["rows"]
    meta = doc["metadata"]
    if not rows and meta.get("feasible") is False:
        return to_csv([{"feasible": False, "statement": meta["statement"]}])
    if not rows and meta["kind"] == "crossings":
        return to_csv([], _PAIR_COLUMNS)
    return to_csv(rows)
