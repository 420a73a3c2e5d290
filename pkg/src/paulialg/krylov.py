"""Lanczos recursion on the Liouvillian ``[H, .]``."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, TextIO

import numpy as np

from .operator import Operator, TrimPolicy

log = logging.getLogger(__name__)

TERMINATION_TOL = 1e-12
VERBOSE_CUTOFF = 1e-10


@dataclass
class LanczosRun:
    """Lanczos coefficients ``b[0] = b_1, b[1] = b_2, ...``.

    ``snapshots[k]`` is the basis operator ``O_k`` (``O_0`` is the normalised
    start) when snapshots were requested.  ``terms[k]`` is the string count
    of ``O_k``.
    """

    b: np.ndarray
    terms: list[int]
    snapshots: Optional[list] = None
    terminated: bool = False
    completed: bool = True

    def to_csv_rows(self) -> list[tuple[int, float, int]]:
        return [(n + 1, float(b), self.terms[n + 1]) for n, b in enumerate(self.b)]


def lanczos(
    H,
    O0,
    steps: int,
    policy: Optional[TrimPolicy] = None,
    *,
    snapshots: bool = False,
    callback: Optional[Callable[[int, object], None]] = None,
) -> LanczosRun:
    """Run ``steps`` iterations of the three-term recursion.

    ``H`` and ``O0`` are both :class:`~paulialg.operator.Operator` or both
    :class:`~paulialg.symmetric.SymOperator1D`.  ``policy`` is applied to
    each new basis operator after normalisation.  The run stops early when
    a coefficient drops below ``1e-12`` (the Krylov space is exhausted).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if H.n != O0.n:
        raise ValueError(f"site count mismatch: {H.n} != {O0.n}")
    norm0 = O0.norm_lanczos()
    if norm0 == 0:
        raise ValueError("initial operator is zero")
    cur = O0 / norm0
    prev = None
    b_prev = 0.0
    bs: list[float] = []
    terms = [len(cur)]
    snaps = [cur] if snapshots else None
    terminated = False
    completed = True
    for n in range(1, steps + 1):
        A = H.commutator(cur)
        if prev is not None:
            A = A - b_prev * prev
        b = A.norm_lanczos()
        if b < TERMINATION_TOL:
            terminated = True
            log.info("Krylov space exhausted at n=%d", n)
            break
        nxt = A / b
        if policy is not None:
            nxt = policy.apply(nxt)
        bs.append(b)
        terms.append(len(nxt))
        if snaps is not None:
            snaps.append(nxt)
        if callback is not None and callback(n, nxt) is False:
            completed = False
            break
        prev, cur, b_prev = cur, nxt, b
    return LanczosRun(np.array(bs), terms, snaps, terminated, completed)


def lanczos_verbose(H, O0, steps: int, out: Optional[TextIO] = None) -> LanczosRun:
    """Lanczos with a ``1e-10`` cutoff that prints every basis operator.

    Step ``k`` shows ``O_{k-1}``; step 1 is the normalised start.
    """
    run = lanczos(H, O0, steps, TrimPolicy(cutoff=VERBOSE_CUTOFF), snapshots=True)
    text = format_dump(run, steps)
    if out is not None:
        out.write(text)
    return run


def format_dump(run: LanczosRun, steps: int) -> str:
    chunks = []
    for k, op in enumerate(run.snapshots[:steps], start=1):
        if isinstance(op, Operator):
            body = op.format_lines()
        else:
            body = op.rep.format_lines()
        chunks.append(f"step {k}\n" + "\n".join(body) + "\n")
    return "\n".join(chunks)
