"""Plain-text field files and CSV writers.

Field files carry one header line ``# h=<v> lo=<v> hi=<v> boundary=<b>``
followed by one site per line: ``l<TAB>u`` for shapes and
``l<TAB>re<TAB>im`` for complex fields. Floats are written with ``repr`` so
files round-trip bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .field import ComplexField, FieldError, LatticeParams, ShapeField


def _header(params: LatticeParams) -> str:
    return f"# h={params.h!r} lo={params.lo} hi={params.hi} boundary={params.boundary}\n"


def _parse_header(line: str) -> LatticeParams:
    if not line.startswith("#"):
        raise FieldError("missing field header line")
    kv = dict(tok.split("=", 1) for tok in line[1:].split())
    try:
        return LatticeParams(
            h=float(kv["h"]), lo=int(kv["lo"]), hi=int(kv["hi"]), boundary=kv["boundary"]
        )
    except KeyError as exc:
        raise FieldError(f"field header lacks {exc}") from None


def format_field(fld: ShapeField | ComplexField) -> str:
    out = [_header(fld.params)]
    for ell, v in zip(fld.params.indices, fld.values):
        if isinstance(fld, ComplexField):
            out.append(f"{ell}\t{float(v.real)!r}\t{float(v.imag)!r}\n")
        else:
            out.append(f"{ell}\t{float(v)!r}\n")
    return "".join(out)


def parse_field(text: str) -> ShapeField | ComplexField:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    params = _parse_header(lines[0])
    rows = [ln.split("\t") for ln in lines[1:]]
    if len(rows) != params.size:
        raise FieldError(f"header announces {params.size} sites, found {len(rows)}")
    idx = [int(r[0]) for r in rows]
    if idx != list(range(params.lo, params.hi + 1)):
        raise FieldError("site indices do not match the header window")
    if all(len(r) == 3 for r in rows):
        vals = np.array([complex(float(r[1]), float(r[2])) for r in rows])
        return ComplexField(params, vals)
    if all(len(r) == 2 for r in rows):
        return ShapeField(params, np.array([float(r[1]) for r in rows]))
    raise FieldError("mixed or malformed site lines")


def write_field(path, fld: ShapeField | ComplexField) -> None:
    Path(path).write_text(format_field(fld), encoding="utf-8")


def read_field(path) -> ShapeField | ComplexField:
    return parse_field(Path(path).read_text(encoding="utf-8"))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def append_jsonl(path, record: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
