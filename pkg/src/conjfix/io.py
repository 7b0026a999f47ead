"""File formats.

Coupling (JSON)::

    {"labels": ["a", "b"], "phi": [[0, -3], [0, -3]]}

Valuation (JSON); infinities are the exact strings ``"inf"`` / ``"-inf"``
and dyadic fractions may be given as ``"p/q"`` strings::

    {"values": [1.0, "-inf", "inf"]}

Written valuations add an ``exact`` list (floats where exact, ``"p/q"``
otherwise) which readers prefer, so JSON round trips are lossless.  TSV
output is for plotting: values are rounded to the nearest double.

Operator sample (JSON): ``{"d": 1, "pairs": [[[x...], [xstar...]], ...]}``.
Grid (JSON): ``{"x_axes": [[...]], "xstar_axes": [[...]]}``.
Grid functions are written as TSV rows ``x..., xstar..., value``.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, TextIO

import numpy as np

from .core import CouplingMatrix
from .errors import ContractError
from .extreal import ExtReal
from .fitzpatrick import OperatorSample, ProductGrid
from .valuation import Valuation


def read_json(path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ContractError(f"invalid JSON ({exc})") from exc
    except OSError as exc:
        raise ContractError(f"cannot read ({exc.strerror})") from exc


def file_digest(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise ContractError(f"{path}: cannot read ({exc.strerror})") from exc


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def parse_coupling(obj) -> CouplingMatrix:
    if not isinstance(obj, dict) or "phi" not in obj:
        raise ContractError('coupling file must be an object with a "phi" table')
    rows = obj["phi"]
    if not isinstance(rows, list) or not rows:
        raise ContractError('"phi" must be a non-empty list of rows')
    n = len(rows)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ContractError(f"phi is not square: row {r} has {got} entries, expected {n}")
        for s, x in enumerate(row):
            if not _is_number(x) or not math.isfinite(x):
                raise ContractError(f"phi[{r}][{s}] = {x!r} is not a finite number")
    labels = obj.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != n:
            raise ContractError(f'"labels" must list {n} names')
    return CouplingMatrix.from_floats(np.array(rows, dtype=np.float64), labels)


def load_coupling(path) -> CouplingMatrix:
    try:
        return parse_coupling(read_json(path))
    except ContractError as exc:
        raise ContractError(f"{path}: {exc}") from None


def parse_valuation(obj, n: int | None = None) -> Valuation:
    """Reads ``exact`` in preference to ``values`` when both are present."""
    if not isinstance(obj, dict) or not isinstance(obj.get("values"), list):
        raise ContractError('valuation file must be an object with a "values" list')
    raw = obj["exact"] if isinstance(obj.get("exact"), list) else obj["values"]
    items = []
    for i, x in enumerate(raw):
        if isinstance(x, str):
            s = x.strip().lower()
            try:
                if s not in ("inf", "-inf") and "/" not in s:
                    raise ValueError(x)
                items.append(ExtReal.of(s))
            except (ValueError, ZeroDivisionError):
                raise ContractError(f"values[{i}] = {x!r} is not a number, \"inf\" or \"-inf\"") from None
        elif _is_number(x):
            if math.isnan(x):
                raise ContractError(f"values[{i}] is NaN")
            items.append(ExtReal.of(x))
        else:
            raise ContractError(f"values[{i}] = {x!r} is not a number, \"inf\" or \"-inf\"")
    if n is not None and len(items) != n:
        raise ContractError(f"valuation has {len(items)} values, coupling has n={n}")
    return Valuation.of(items)


def load_valuation(path, n: int | None = None) -> Valuation:
    try:
        return parse_valuation(read_json(path), n)
    except ContractError as exc:
        raise ContractError(f"{path}: {exc}") from None


def float_token(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def valuation_payload(v: Valuation) -> dict:
    """``values`` as floats (rounded if needed) plus the exact ``exact`` tokens."""
    return {"values": [float_token(x) for x in v.to_floats()], "exact": v.tokens()}


def coupling_payload(phi: CouplingMatrix) -> dict:
    return {"labels": list(phi.labels), "phi": phi.phi.tolist()}


def parse_operator(obj) -> OperatorSample:
    if not isinstance(obj, dict) or not isinstance(obj.get("pairs"), list):
        raise ContractError('operator file must be an object with a "pairs" list')
    d = obj.get("d")
    pairs = []
    for k, pair in enumerate(obj["pairs"]):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ContractError(f"pairs[{k}] must be [x, xstar]")
        x, xs = (np.atleast_1d(np.asarray(v, dtype=np.float64)) for v in pair)
        if d is not None and (x.size != d or xs.size != d):
            raise ContractError(f"pairs[{k}] does not have dimension d={d}")
        pairs.append((x, xs))
    return OperatorSample.from_pairs(pairs)


def load_operator(path) -> OperatorSample:
    try:
        return parse_operator(read_json(path))
    except (ContractError, ValueError) as exc:
        raise ContractError(f"{path}: {exc}") from None


def parse_grid(obj) -> ProductGrid:
    if not isinstance(obj, dict) or "x_axes" not in obj or "xstar_axes" not in obj:
        raise ContractError('grid file must be an object with "x_axes" and "xstar_axes"')
    return ProductGrid(tuple(obj["x_axes"]), tuple(obj["xstar_axes"]))


def load_grid(path) -> ProductGrid:
    try:
        return parse_grid(read_json(path))
    except (ContractError, ValueError) as exc:
        raise ContractError(f"{path}: {exc}") from None


def grid_payload(grid: ProductGrid) -> dict:
    return {
        "x_axes": [a.tolist() for a in grid.x_axes],
        "xstar_axes": [a.tolist() for a in grid.xstar_axes],
    }


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def write_grid_tsv(grid: ProductGrid, h: Valuation, stream: TextIO) -> None:
    """One row per node; shortest round-trip decimal for every number."""
    if len(h) != grid.size:
        raise ContractError(f"grid function has {len(h)} values, grid has {grid.size} nodes")
    X, XS = grid.nodes()
    names = [f"x{i + 1}" for i in range(grid.d)] + [f"xstar{i + 1}" for i in range(grid.d)]
    stream.write("\t".join(names + ["value"]) + "\n")
    for row, v in zip(np.hstack([X, XS]), h.to_floats()):
        stream.write("\t".join([_fmt(c) for c in row] + [_fmt(v)]) + "\n")


def read_grid_function(path, grid: ProductGrid) -> Valuation:
    """A grid function from a JSON valuation file or a TSV written by
    :func:`write_grid_tsv` (coordinates must match the grid's node order)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_valuation(path, grid.size)
    X, XS = grid.nodes()
    coords = np.hstack([X, XS])
    values = []
    with path.open("r", encoding="utf-8") as handle:
        rows = [r for r in csv.reader(handle, delimiter="\t") if r]
    body = rows[1:]
    if len(body) != grid.size:
        raise ContractError(f"{path}: {len(body)} rows, grid has {grid.size} nodes")
    for k, row in enumerate(body):
        if len(row) != coords.shape[1] + 1:
            raise ContractError(f"{path}: row {k + 1} has {len(row)} columns")
        try:
            got = np.array([float(c) for c in row[:-1]])
            val = ExtReal.of(row[-1])
        except ValueError:
            raise ContractError(f"{path}: row {k + 1} is not numeric") from None
        if not np.array_equal(got, coords[k]):
            raise ContractError(f"{path}: row {k + 1} coordinates do not match node {k}")
        values.append(val)
    return Valuation.of(values)


def write_trace_csv(trace: Iterable, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["sweep", "index", "t0", "gap"])
    for e in trace:
        writer.writerow([e.sweep, e.index, _fmt(float(e.t0)), _fmt(float(e.gap))])


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"
