"""JSON and CSV formats for models, samples, grids and traces.

Floats are written with 17 significant digits so every value survives a
write/read cycle bit-exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError, InvalidParam
from .model import BarycentricState, FrequencySample, PoleResidueModel, SampleSet
from .quadrature import QuadGrid
from .systems import StateSpaceModel


def fmt(x: float) -> str:
    """17-significant-digit text of a float; negative zero prints as 0."""
    return format(float(x) + 0.0, ".17g")


def _c(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _z(d) -> complex:
    if isinstance(d, dict):
        return complex(float(d["re"]), float(d.get("im", 0.0)))
    return complex(d)


def _cs(arr) -> list:
    return [_c(z) for z in np.asarray(arr).ravel()]


def _zs(items) -> np.ndarray:
    return np.array([_z(d) for d in items], dtype=complex)


# ---------------------------------------------------------------- dict forms


def model_to_dict(model: PoleResidueModel) -> dict:
    return {
        "order": model.order,
        "poles": _cs(model.poles),
        "residues": _cs(model.residues),
        "real_symmetric": bool(model.real_symmetric),
    }


def model_from_dict(d: dict) -> PoleResidueModel:
    try:
        model = PoleResidueModel(_zs(d["poles"]), _zs(d["residues"]),
                                 real_symmetric=bool(d.get("real_symmetric", False)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InvalidParam(f"malformed model JSON: {exc}") from exc
    if "order" in d and int(d["order"]) != model.order:
        raise InvalidParam("model JSON order disagrees with the pole count")
    return model


def statespace_to_dict(ss: StateSpaceModel) -> dict:
    return {
        "n": ss.n,
        "F": ss.F.ravel().tolist(),
        "B": ss.B.ravel().tolist(),
        "C": ss.C.ravel().tolist(),
    }


def statespace_from_dict(d: dict) -> StateSpaceModel:
    try:
        n = int(d["n"])
        F = np.asarray(d["F"], dtype=float).reshape(n, n)
        B = np.asarray(d["B"], dtype=float).reshape(n, 1)
        C = np.asarray(d["C"], dtype=float).reshape(1, n)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParam(f"malformed state-space JSON: {exc}") from exc
    return StateSpaceModel(F, B, C)


def barycentric_to_dict(state: BarycentricState) -> dict:
    return {"lambda": _cs(state.lam), "phi": _cs(state.phi), "varphi": _cs(state.varphi)}


def barycentric_from_dict(d: dict) -> BarycentricState:
    return BarycentricState(_zs(d["lambda"]), _zs(d["phi"]), _zs(d["varphi"]))


def sample_to_dict(smp: FrequencySample) -> dict:
    out = {"s": _c(smp.s), "value": _c(smp.value)}
    if smp.deriv is not None:
        out["deriv"] = _c(smp.deriv)
    if smp.sigma is not None:
        out["sigma"] = smp.sigma
    return out


def sample_from_dict(d: dict) -> FrequencySample:
    return FrequencySample(
        _z(d["s"]), _z(d["value"]),
        None if d.get("deriv") is None else _z(d["deriv"]),
        None if d.get("sigma") is None else float(d["sigma"]),
    )


def sampleset_to_dict(samples: SampleSet) -> dict:
    return {
        "samples": [sample_to_dict(s) for s in samples.samples],
        "m_plus": None if samples.m_plus is None else _c(samples.m_plus),
        "conjugate_closed": samples.conjugate_closed,
    }


def sampleset_from_dict(d: dict) -> SampleSet:
    m = d.get("m_plus")
    return SampleSet.from_samples([sample_from_dict(s) for s in d["samples"]],
                                  m_plus=None if m is None else _z(m))


def grid_to_dict(grid: QuadGrid) -> dict:
    return {
        "L": grid.L,
        "ell": grid.ell,
        "rho_plus": grid.rho_plus,
        "nodes": _cs(grid.nodes),
        "weights": grid.weights.tolist(),
    }


def grid_from_dict(d: dict) -> QuadGrid:
    return QuadGrid(_zs(d["nodes"]), np.asarray(d["weights"], dtype=float),
                    float(d["rho_plus"]), float(d["L"]), int(d["ell"]))


# ---------------------------------------------------------------- files


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidParam(f"{path}: invalid JSON ({exc})") from exc


def write_json(path, data) -> None:
    text = json.dumps(data, indent=2, allow_nan=False)
    if path is None or str(path) == "-":
        print(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def save_model(path, model: PoleResidueModel, fit_info: Optional[dict] = None) -> None:
    data = model_to_dict(model)
    if fit_info:
        data["fit"] = fit_info
    write_json(path, data)


def load_model(path) -> PoleResidueModel:
    return model_from_dict(read_json(path))


def load_statespace(path) -> StateSpaceModel:
    return statespace_from_dict(read_json(path))


def sidecar(path) -> Path:
    return Path(str(path) + ".json")


SAMPLE_COLUMNS = ("s_re", "s_im", "h_re", "h_im")


def write_samples_csv(path, samples: SampleSet) -> None:
    """Write the sample CSV and, if M+ is known, its ``<path>.json`` sidecar."""
    header = list(SAMPLE_COLUMNS)
    if samples.derivs is not None:
        header += ["hp_re", "hp_im"]
    if samples.sigma is not None:
        header.append("sigma")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, (s, h) in enumerate(zip(samples.points, samples.values)):
            row = [fmt(s.real), fmt(s.imag), fmt(h.real), fmt(h.imag)]
            if samples.derivs is not None:
                row += [fmt(samples.derivs[i].real), fmt(samples.derivs[i].imag)]
            if samples.sigma is not None:
                row.append(fmt(samples.sigma[i]))
            w.writerow(row)
    if samples.m_plus is not None:
        write_json(sidecar(path), {"m_plus": _c(samples.m_plus)})


def _float(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError as exc:
        raise InvalidParam(f"{where}: not a number: {text!r}") from exc
    if not math.isfinite(v):
        raise InvalidParam(f"{where}: non-finite value {text!r}")
    return v


def read_samples_csv(path) -> SampleSet:
    """Read a sample CSV; M+ comes from the ``<path>.json`` sidecar if present."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidParam(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if tuple(header[:4]) != SAMPLE_COLUMNS:
        raise InvalidParam(f"{path}: header must start with {','.join(SAMPLE_COLUMNS)}")
    extra = header[4:]
    if extra not in ([], ["hp_re", "hp_im"], ["sigma"], ["hp_re", "hp_im", "sigma"]):
        raise InvalidParam(f"{path}: unexpected columns {extra}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise InvalidParam(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        data.append([_float(c, f"{path}:{lineno}") for c in row])
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    col = {name: arr[:, k] for k, name in enumerate(header)}
    derivs = col["hp_re"] + 1j * col["hp_im"] if "hp_re" in col else None
    sigma = col.get("sigma")
    m_plus = None
    side = sidecar(path)
    if side.exists():
        meta = read_json(side)
        if meta.get("m_plus") is not None:
            m_plus = _z(meta["m_plus"])
    return SampleSet(col["s_re"] + 1j * col["s_im"], col["h_re"] + 1j * col["h_im"],
                     derivs=derivs, sigma=sigma, m_plus=m_plus)


def write_grid(path, grid: QuadGrid, as_json: bool = False) -> None:
    """Write grid nodes as CSV ``s_re,s_im,weight`` plus a JSON sidecar.

    With `as_json` the whole grid goes into one JSON document instead.
    """
    if as_json:
        write_json(path, grid_to_dict(grid))
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s_re", "s_im", "weight"])
        for s, rho in zip(grid.nodes, grid.weights):
            w.writerow([fmt(s.real), fmt(s.imag), fmt(rho)])
    write_json(sidecar(path), {"L": grid.L, "ell": grid.ell, "rho_plus": grid.rho_plus})


def read_grid(path) -> QuadGrid:
    """Read a grid written by :func:`write_grid` (CSV or JSON)."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        head = fh.read(1)
    if head == "{":
        return grid_from_dict(read_json(path))
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["s_re", "s_im", "weight"]:
        raise InvalidParam(f"{path}: grid CSV header must be s_re,s_im,weight")
    vals = np.array([[_float(c, str(path)) for c in row] for row in rows[1:] if row], dtype=float)
    vals = vals.reshape(-1, 3)
    nodes = vals[:, 0] + 1j * vals[:, 1]
    ell = nodes.size
    side = sidecar(path)
    if side.exists():
        meta = read_json(side)
        L, rho_plus = float(meta["L"]), float(meta["rho_plus"])
    else:
        # rho_j^2 sin^2(t_j) = L pi / (ell + 1) recovers L from any node
        t = np.pi / (ell + 1)
        L = float(vals[0, 2] ** 2 * np.sin(t) ** 2 * (ell + 1) / np.pi)
        rho_plus = float(np.sqrt(np.pi / (L * (ell + 1))))
    return QuadGrid(nodes, vals[:, 2], rho_plus, L, ell)


TRACE_COLUMNS = ("k", "delta", "max_abs_varphi", "mu", "omega", "residual")


def write_trace_csv(path, history) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for st in history:
            w.writerow([st.k] + [fmt(getattr(st, c)) for c in TRACE_COLUMNS[1:]])
