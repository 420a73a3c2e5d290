"""Translation-invariant operators on a periodic chain.

A :class:`SymOperator1D` stores only anchored representative strings (see
:func:`paulialg.core.shift_left`).  The operator it stands for is

    sum_{k=0}^{n-1} T_k(rep)

so a representative whose orbit has ``p`` distinct translates carries the
full-operator coefficient times ``p / n``.  In particular the identity is
stored as ``c / n``.
"""

from __future__ import annotations

from numbers import Number
from typing import Optional

import numpy as np

from .core import PauliTerm, orbit_sizes, rot_array, shift_left_arrays
from .operator import Operator, _CHUNK, _keys, _merge, _self_sign


class NotTranslationInvariant(ValueError):
    """Raised when an operator is not invariant under cyclic shifts."""

    def __init__(self, term: PauliTerm, coeff: complex, shifted: complex):
        self.term = term
        super().__init__(
            f"operator is not translation invariant: {term.label()} has coefficient "
            f"{coeff:.6g} but its shift by one site has {shifted:.6g}"
        )


class SymOperator1D:
    """Translation-symmetric operator held by its anchored representatives."""

    __slots__ = ("rep",)

    def __init__(self, rep: Operator, *, canonical: bool = False):
        if not canonical:
            cv, cw = shift_left_arrays(rep.v, rep.w, rep.n)
            rep = Operator(rep.n, cv, cw, rep.c)
        self.rep = rep

    @property
    def n(self) -> int:
        return self.rep.n

    def __len__(self) -> int:
        return len(self.rep)

    def __repr__(self) -> str:
        return f"SymOperator1D(n={self.n}, representatives={len(self)})"

    def _wrap(self, rep: Operator) -> "SymOperator1D":
        return SymOperator1D(rep, canonical=True)

    def _check(self, other: "SymOperator1D") -> None:
        if not isinstance(other, SymOperator1D):
            raise TypeError(f"expected SymOperator1D, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"site count mismatch: {self.n} != {other.n}")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Number):
            return self._wrap(self.rep + Operator.identity(self.n, other / self.n))
        self._check(other)
        return self._wrap(self.rep + other.rep)

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self.rep)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self._wrap(self.rep * other)
        return sym_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self._wrap(self.rep / other)

    # -- the same surface as Operator ---------------------------------------

    def commutator(self, other):
        return sym_commutator(self, other)

    def dagger(self):
        return self._wrap(self.rep.dagger())

    def trace(self) -> complex:
        # identity representative carries c/n
        return self.rep.trace() * self.n

    def norm_lanczos(self) -> float:
        return sym_norm_lanczos(self)

    def trim(self, M, keep=None):
        if isinstance(keep, SymOperator1D):
            keep = keep.rep
        return self._wrap(self.rep.trim(M, keep=keep))

    def cutoff(self, eps):
        return self._wrap(self.rep.cutoff(eps))

    def add_noise(self, g):
        return sym_add_noise(self, g)

    def truncate_weight(self, lmax):
        return self._wrap(self.rep.truncate_weight(lmax))

    def compress(self):
        return self._wrap(self.rep.compress())

    def to_operator(self) -> Operator:
        return to_operator(self)

    def weights(self) -> np.ndarray:
        return self.rep.weights()


def _lookup(A: Operator, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Coefficients of ``A`` at the given strings, zero where absent."""
    ka = _keys(A.v, A.w, A.n)
    kq = _keys(v, w, A.n)
    pos = np.searchsorted(ka, kq)
    pos = np.minimum(pos, len(ka) - 1)
    found = ka[pos] == kq
    return np.where(found, A.c[pos], 0)


def from_operator(A: Operator, atol: float = 1e-12) -> SymOperator1D:
    """Compress a translation-invariant operator; raises :class:`NotTranslationInvariant`."""
    n = A.n
    if len(A):
        shifted = _lookup(A, rot_array(A.v, 1, n), rot_array(A.w, 1, n))
        bad = np.flatnonzero(np.abs(shifted - A.c) > atol)
        if bad.size:
            i = bad[0]
            raise NotTranslationInvariant(
                PauliTerm(int(A.v[i]), int(A.w[i]), n), complex(A.c[i]), complex(shifted[i])
            )
    cv, cw = shift_left_arrays(A.v, A.w, n)
    anchored = (cv == A.v) & (cw == A.w)
    v, w, c = A.v[anchored], A.w[anchored], A.c[anchored]
    c = c * orbit_sizes(v, w, n) / n
    return SymOperator1D(Operator(n, v, w, c, merged=True), canonical=True)


def to_operator(S: SymOperator1D) -> Operator:
    """Expand ``sum_k T_k(rep)``."""
    n, rep = S.n, S.rep
    if len(rep) == 0:
        return Operator(n)
    vs = [rot_array(rep.v, k, n) for k in range(n)]
    ws = [rot_array(rep.w, k, n) for k in range(n)]
    return Operator(n, np.concatenate(vs), np.concatenate(ws), np.tile(rep.c, n))


def _sym_pairwise(A: SymOperator1D, B: SymOperator1D, commutator: bool) -> SymOperator1D:
    A._check(B)
    n = A.n
    a, b = A.rep, B.rep
    if len(a) == 0 or len(b) == 0:
        return A._wrap(Operator(n))
    # every translate of every right-hand representative
    bv = np.concatenate([rot_array(b.v, k, n) for k in range(n)])
    bw = np.concatenate([rot_array(b.w, k, n) for k in range(n)])
    bc = np.tile(b.c, n)
    rows = max(1, _CHUNK // bv.size)
    acc_v, acc_w, acc_c = [], [], []
    for s in range(0, len(a), rows):
        vA = a.v[s:s + rows, None]
        wA = a.w[s:s + rows, None]
        cA = a.c[s:s + rows, None]
        p1 = (np.bitwise_count(wA & bv[None, :]) & 1).astype(np.int8)
        if commutator:
            p2 = (np.bitwise_count(bw[None, :] & vA) & 1).astype(np.int8)
            alpha = 2 * (p2 - p1)
            sel = alpha != 0
            coef = (cA * bc[None, :])[sel] * alpha[sel]
            v = (vA ^ bv[None, :])[sel]
            w = (wA ^ bw[None, :])[sel]
        else:
            coef = (cA * bc[None, :] * (1 - 2 * p1)).ravel()
            v = (vA ^ bv[None, :]).ravel()
            w = (wA ^ bw[None, :]).ravel()
        # merge raw strings first so each distinct string is anchored once
        v, w, coef = _merge(v, w, coef, n)
        v, w = shift_left_arrays(v, w, n)
        v, w, coef = _merge(v, w, coef, n)
        acc_v.append(v)
        acc_w.append(w)
        acc_c.append(coef)
    rep = Operator(n, np.concatenate(acc_v), np.concatenate(acc_w), np.concatenate(acc_c))
    return A._wrap(rep)


def sym_product(A: SymOperator1D, B: SymOperator1D) -> SymOperator1D:
    """Product of two translation-symmetric operators, computed on representatives."""
    return _sym_pairwise(A, B, commutator=False)


def sym_commutator(A: SymOperator1D, B: SymOperator1D) -> SymOperator1D:
    return _sym_pairwise(A, B, commutator=True)


def sym_trace_product(A: SymOperator1D, B: SymOperator1D) -> complex:
    """``tr(A B) / 2**n`` of the expanded operators.

    Only equal representatives meet, once for each of the ``n / p`` shifts
    that fix a string with orbit size ``p``.
    """
    A._check(B)
    n = A.n
    a, b = A.rep, B.rep
    if len(a) == 0 or len(b) == 0:
        return 0j
    _, ia, ib = np.intersect1d(_keys(a.v, a.w, n), _keys(b.v, b.w, n),
                               assume_unique=True, return_indices=True)
    v, w = a.v[ia], a.w[ia]
    stab = n // orbit_sizes(v, w, n)
    return complex(n * np.sum(a.c[ia] * b.c[ib] * _self_sign(v, w) * stab))


def sym_norm_lanczos(A: SymOperator1D) -> float:
    rep = A.rep
    if len(rep) == 0:
        return 0.0
    stab = A.n // orbit_sizes(rep.v, rep.w, A.n)
    return float(np.sqrt(A.n * np.sum((np.abs(rep.c) ** 2) * stab)))


def sym_add_noise(A: SymOperator1D, g: float) -> SymOperator1D:
    # weight is translation invariant
    return A._wrap(A.rep.add_noise(g))


def sym_trim(A: SymOperator1D, M: Optional[int], keep=None) -> SymOperator1D:
    return A.trim(M, keep=keep)


def symmetric_allclose(A: SymOperator1D, B: SymOperator1D, atol: float = 1e-12) -> bool:
    return bool(np.all(np.abs((A - B).rep.c) <= atol))
