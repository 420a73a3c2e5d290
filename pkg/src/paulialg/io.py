"""Text and JSON serialisation of operators.

Text form, one string per line with Pauli-letter coefficients::

    # N=4
    # translation_symmetric
    XX11 1.0 0.0
    1YY1 -0.5 0.0

The second header line appears only for translation-symmetric operators,
whose lines are the anchored representatives.  Floats are written with
``repr`` and coefficient conversion is an exact quarter turn, so a file
round-trips bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from .core import from_label
from .operator import Operator, _quarter_turn
from .symmetric import SymOperator1D

AnyOperator = Union[Operator, SymOperator1D]


def _split(op: AnyOperator) -> tuple[Operator, bool]:
    if isinstance(op, SymOperator1D):
        return op.rep, True
    return op, False


def _rows(op: Operator):
    pc = op.pauli_coefficients()
    for lab, z in zip(op.labels(), pc):
        yield lab, float(z.real), float(z.imag)


def _build(n: int, rows, symmetric: bool) -> AnyOperator:
    vs, ws, pcs, ys = [], [], [], []
    for lab, re, im in rows:
        term, _ = from_label(lab)
        if term.n != n:
            raise ValueError(f"label {lab!r} does not have {n} sites")
        vs.append(term.v)
        ws.append(term.w)
        pcs.append(complex(re, im))
        ys.append(bin(term.v & term.w).count("1"))
    if not vs:
        op = Operator(n)
    else:
        c = _quarter_turn(np.array(pcs, dtype=np.complex128), -np.array(ys))
        op = Operator(n, vs, ws, c)
    return SymOperator1D(op, canonical=True) if symmetric else op


def dumps_text(op: AnyOperator) -> str:
    rep, sym = _split(op)
    lines = [f"# N={rep.n}"]
    if sym:
        lines.append("# translation_symmetric")
    lines += [f"{lab} {re!r} {im!r}" for lab, re, im in _rows(rep)]
    return "\n".join(lines) + "\n"


def loads_text(text: str) -> AnyOperator:
    n = None
    sym = False
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("N="):
                n = int(body[2:])
            elif body == "translation_symmetric":
                sym = True
            continue
        lab, re, im = line.split()
        rows.append((lab, float(re), float(im)))
    if n is None:
        if not rows:
            raise ValueError("empty operator file without '# N=' header")
        n = len(rows[0][0])
    return _build(n, rows, sym)


def to_json(op: AnyOperator) -> dict:
    rep, sym = _split(op)
    return {
        "N": rep.n,
        "translation_symmetric": sym,
        "terms": [{"s": lab, "re": re, "im": im} for lab, re, im in _rows(rep)],
    }


def from_json(data: dict) -> AnyOperator:
    rows = [(t["s"], float(t["re"]), float(t["im"])) for t in data["terms"]]
    return _build(int(data["N"]), rows, bool(data.get("translation_symmetric", False)))


def save(op: AnyOperator, path: Union[str, Path]) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(to_json(op), indent=1))
    else:
        path.write_text(dumps_text(op))


def load(path: Union[str, Path]) -> AnyOperator:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return from_json(json.loads(text))
    return loads_text(text)


def write_text(op: AnyOperator, fh: TextIO) -> None:
    fh.write(dumps_text(op))
