"""Sums of weighted Pauli strings and their algebra.

Coefficients are stored in tau space (see :mod:`paulialg.core`): a Hermitian
operator built from real couplings on strings without Y letters has real
coefficients, and each Y letter contributes a factor ``-i``.  Conversion to
Pauli-letter coefficients only happens for display and serialization.

Terms are kept as three parallel arrays ``v``, ``w`` (uint64) and ``c``
(complex128), sorted by ``(v, w)`` with duplicate keys merged.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Iterator, Optional

import numpy as np

from .core import MAX_SITES, PauliTerm, _check_n, from_label, parse_term, to_label

ZERO_TOL = 1e-20

# pairs materialised at once inside products
_CHUNK = 1 << 21

_KEY_DTYPE = np.dtype([("v", "<u8"), ("w", "<u8")])


def _keys(v: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    """Sortable single-array key whose order is lexicographic ``(v, w)``."""
    if n <= 32:
        return (v << np.uint64(n)) | w
    out = np.empty(v.shape, dtype=_KEY_DTYPE)
    out["v"] = v
    out["w"] = w
    return out


def _merge(v: np.ndarray, w: np.ndarray, c: np.ndarray, n: int):
    """Sort by key, add equal keys and drop zeros."""
    if v.size == 0:
        return v, w, c
    key = _keys(v, w, n)
    order = np.argsort(key, kind="stable")
    ks = key[order]
    first = np.ones(ks.shape, dtype=bool)
    first[1:] = ks[1:] != ks[:-1]
    starts = np.flatnonzero(first)
    cs = np.add.reduceat(c[order], starts)
    vs = v[order][starts]
    ws = w[order][starts]
    nz = np.abs(cs) >= ZERO_TOL
    return vs[nz], ws[nz], cs[nz]


def _quarter_turn(c: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Multiply by ``1j ** k`` exactly (component swaps, no rounding)."""
    k = np.asarray(k) % 4
    re, im = c.real, c.imag
    out_re = np.select([k == 0, k == 1, k == 2], [re, -im, -re], im)
    out_im = np.select([k == 0, k == 1, k == 2], [im, re, -im], -re)
    out = np.empty(c.shape, dtype=np.complex128)
    out.real = out_re
    out.imag = out_im
    return out


class Operator:
    """Linear combination of Pauli strings on ``n`` sites.

    Build one term at a time with the tuple form used by the model builders::

        H = Operator(4)
        H += "X", 1, "X", 2
        H += 0.5, "Z", 3
    """

    __slots__ = ("n", "v", "w", "c")

    def __init__(self, n: int, v=None, w=None, c=None, *, merged: bool = False):
        _check_n(n)
        self.n = n
        if v is None:
            self.v = np.zeros(0, dtype=np.uint64)
            self.w = np.zeros(0, dtype=np.uint64)
            self.c = np.zeros(0, dtype=np.complex128)
            return
        v = np.asarray(v, dtype=np.uint64).ravel()
        w = np.asarray(w, dtype=np.uint64).ravel()
        c = np.asarray(c, dtype=np.complex128).ravel()
        if not v.shape == w.shape == c.shape:
            raise ValueError("v, w and c must have the same length")
        if n < 64 and v.size and ((v | w) >> np.uint64(n)).any():
            raise ValueError(f"string bits beyond site {n}")
        if not merged:
            v, w, c = _merge(v, w, c, n)
        self.v, self.w, self.c = v, w, c

    # -- construction ------------------------------------------------------

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "Operator":
        return cls(n, [0], [0], [coeff])

    @classmethod
    def from_terms(cls, n: int, terms: Iterable) -> "Operator":
        """Build from ``(coeff, letters)`` pairs in Pauli-letter space."""
        vs, ws, cs = [], [], []
        for coeff, letters in terms:
            term, factor = parse_term(letters, n)
            vs.append(term.v)
            ws.append(term.w)
            cs.append(coeff * factor)
        if not vs:
            return cls(n)
        return cls(n, vs, ws, cs)

    @classmethod
    def from_pauli_dict(cls, d: dict, n: Optional[int] = None) -> "Operator":
        """Build from ``{label: coeff}`` with Pauli-letter coefficients."""
        vs, ws, cs = [], [], []
        for lab, coeff in d.items():
            term, factor = from_label(lab)
            if n is None:
                n = term.n
            elif term.n != n:
                raise ValueError(f"label {lab!r} has {term.n} sites, expected {n}")
            vs.append(term.v)
            ws.append(term.w)
            cs.append(coeff * factor)
        if n is None:
            raise ValueError("cannot infer site count from an empty dict")
        return cls(n, vs, ws, cs) if vs else cls(n)

    def add_term(self, coeff: complex, letters) -> "Operator":
        term, factor = parse_term(letters, self.n)
        return Operator(
            self.n,
            np.append(self.v, np.uint64(term.v)),
            np.append(self.w, np.uint64(term.w)),
            np.append(self.c, coeff * factor),
        )

    def copy(self) -> "Operator":
        return Operator(self.n, self.v.copy(), self.w.copy(), self.c.copy(), merged=True)

    def _new(self, v, w, c) -> "Operator":
        return Operator(self.n, v, w, c, merged=True)

    # -- container protocol ----------------------------------------------

    def __len__(self) -> int:
        return self.v.size

    def __iter__(self) -> Iterator[tuple[PauliTerm, complex]]:
        for a, b, c in zip(self.v, self.w, self.c):
            yield PauliTerm(int(a), int(b), self.n), complex(c)

    def terms(self) -> dict[PauliTerm, complex]:
        """Mapping from string to tau coefficient."""
        return dict(iter(self))

    def coefficient(self, letters) -> complex:
        """Pauli-letter coefficient of one string, given as label or letters."""
        if isinstance(letters, str):
            term, factor = from_label(letters)
        else:
            term, factor = parse_term(letters, self.n)
        hit = (self.v == term.v) & (self.w == term.w)
        if not hit.any():
            return 0j
        return complex(self.c[hit][0] / factor)

    def pauli_coefficients(self) -> np.ndarray:
        """Coefficients converted to Pauli-letter space."""
        return _quarter_turn(self.c, np.bitwise_count(self.v & self.w))

    def weights(self) -> np.ndarray:
        return np.bitwise_count(self.v | self.w).astype(np.int64)

    def labels(self) -> list[str]:
        return [to_label(t) for t, _ in self]

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Operator") -> None:
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"site count mismatch: {self.n} != {other.n}")

    def __add__(self, other):
        if isinstance(other, tuple):
            if other and isinstance(other[0], Number):
                return self.add_term(other[0], other[1:])
            return self.add_term(1.0, other)
        if isinstance(other, Number):
            return self + Operator.identity(self.n, other)
        self._check(other)
        return Operator(
            self.n,
            np.concatenate([self.v, other.v]),
            np.concatenate([self.w, other.w]),
            np.concatenate([self.c, other.c]),
        )

    __radd__ = __add__

    def __neg__(self) -> "Operator":
        return self._new(self.v, self.w, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            if other == 0:
                return Operator(self.n)
            return self._new(self.v, self.w, self.c * other)
        return op_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        return self._new(self.v, self.w, self.c / other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Operator) or other.n != self.n:
            return False
        return (
            np.array_equal(self.v, other.v)
            and np.array_equal(self.w, other.w)
            and np.array_equal(self.c, other.c)
        )

    __hash__ = None

    # -- algebra shortcuts ----------------------------------------------

    def commutator(self, other: "Operator") -> "Operator":
        return op_commutator(self, other)

    def dagger(self) -> "Operator":
        return dagger(self)

    def trace(self) -> complex:
        return trace_normalized(self)

    def norm_lanczos(self) -> float:
        return norm_lanczos(self)

    def trim(self, M: int, keep=None) -> "Operator":
        return trim(self, M, keep=keep)

    def cutoff(self, eps: float) -> "Operator":
        return cutoff(self, eps)

    def add_noise(self, g: float) -> "Operator":
        return add_noise(self, g)

    def truncate_weight(self, lmax: int) -> "Operator":
        return truncate_weight(self, lmax)

    def compress(self) -> "Operator":
        return compress(self)

    # -- display -----------------------------------------------------------

    def format_lines(self, order: str = "magnitude") -> list[str]:
        """``(re + imim) LABEL`` lines, largest magnitude first by default."""
        pc = self.pauli_coefficients()
        labs = self.labels()
        idx = range(len(labs))
        if order == "magnitude":
            idx = sorted(idx, key=lambda i: (-round(abs(pc[i]), 12), labs[i]))
        return [f"{format_coefficient(pc[i])} {labs[i]}" for i in idx]

    def __str__(self) -> str:
        return "\n".join(self.format_lines())

    def __repr__(self) -> str:
        return f"Operator(n={self.n}, terms={len(self)})"


def format_coefficient(z: complex) -> str:
    re = round(float(z.real), 10) + 0.0
    im = round(float(z.imag), 10) + 0.0
    sign = "-" if np.signbit(im) else "+"
    return f"({re!r} {sign} {abs(im)!r}im)"


# ---------------------------------------------------------------------------
# products


def _pairwise(A: Operator, B: Operator, commutator: bool) -> Operator:
    A._check(B)
    n = A.n
    if len(A) == 0 or len(B) == 0:
        return Operator(n)
    rows = max(1, _CHUNK // len(B))
    parts_v, parts_w, parts_c = [], [], []
    pending = 0
    vB, wB, cB = B.v[None, :], B.w[None, :], B.c[None, :]
    for s in range(0, len(A), rows):
        vA = A.v[s:s + rows, None]
        wA = A.w[s:s + rows, None]
        cA = A.c[s:s + rows, None]
        p1 = (np.bitwise_count(wA & vB) & 1).astype(np.int8)
        if commutator:
            p2 = (np.bitwise_count(wB & vA) & 1).astype(np.int8)
            # (-1)^p1 - (-1)^p2 = 2 (p2 - p1)
            alpha = 2 * (p2 - p1)
            sel = alpha != 0
            coef = (cA * cB)[sel] * alpha[sel]
            v = (vA ^ vB)[sel]
            w = (wA ^ wB)[sel]
        else:
            coef = (cA * cB * (1 - 2 * p1)).ravel()
            v = (vA ^ vB).ravel()
            w = (wA ^ wB).ravel()
        v, w, coef = _merge(v, w, coef, n)
        parts_v.append(v)
        parts_w.append(w)
        parts_c.append(coef)
        pending += v.size
        if pending > 4 * _CHUNK and len(parts_v) > 1:
            v, w, coef = _merge(np.concatenate(parts_v), np.concatenate(parts_w),
                                np.concatenate(parts_c), n)
            parts_v, parts_w, parts_c = [v], [w], [coef]
            pending = v.size
    if len(parts_v) == 1:
        return Operator(n, parts_v[0], parts_w[0], parts_c[0], merged=True)
    return Operator(n, np.concatenate(parts_v), np.concatenate(parts_w),
                    np.concatenate(parts_c))


def op_product(A: Operator, B: Operator) -> Operator:
    """Operator product ``A B``."""
    return _pairwise(A, B, commutator=False)


def op_commutator(A: Operator, B: Operator) -> Operator:
    """Commutator ``A B - B A``; commuting string pairs are skipped."""
    return _pairwise(A, B, commutator=True)


# ---------------------------------------------------------------------------
# traces and norms


def _self_sign(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    # tau_a tau_a = (-1)^pop(v & w), and tau_a^dagger = the same sign times tau_a
    return 1 - 2 * (np.bitwise_count(v & w) & 1).astype(np.int64)


def trace_normalized(A: Operator) -> complex:
    """``tr(A) / 2**n``, the identity coefficient."""
    hit = (A.v == 0) & (A.w == 0)
    return complex(A.c[hit].sum())


def trace_product_normalized(A: Operator, B: Operator) -> complex:
    """``tr(A B) / 2**n`` without forming the product."""
    A._check(B)
    if len(A) == 0 or len(B) == 0:
        return 0j
    _, ia, ib = np.intersect1d(_keys(A.v, A.w, A.n), _keys(B.v, B.w, B.n),
                               assume_unique=True, return_indices=True)
    sign = _self_sign(A.v[ia], A.w[ia])
    return complex(np.sum(A.c[ia] * B.c[ib] * sign))


def dagger(A: Operator) -> Operator:
    """Hermitian conjugate; ``tau_11 = iY`` is anti-Hermitian."""
    return A._new(A.v, A.w, np.conj(A.c) * _self_sign(A.v, A.w))


def norm_lanczos(A: Operator) -> float:
    """``sqrt(tr(A^dagger A) / 2**n)``.

    Strings are orthonormal under the normalised trace, so this is the
    Euclidean norm of the coefficient vector.
    """
    return float(np.sqrt(np.sum(A.c.real ** 2 + A.c.imag ** 2)))


# ---------------------------------------------------------------------------
# truncation and noise


def _keep_mask(A: Operator, keep) -> np.ndarray:
    if keep is None:
        return np.zeros(len(A), dtype=bool)
    if isinstance(keep, Operator):
        kv, kw = keep.v, keep.w
    else:
        keep = list(keep)
        kv = np.array([t.v for t in keep], dtype=np.uint64)
        kw = np.array([t.w for t in keep], dtype=np.uint64)
    if kv.size == 0 or len(A) == 0:
        return np.zeros(len(A), dtype=bool)
    return np.isin(_keys(A.v, A.w, A.n), _keys(kv, kw, A.n))


def trim(A: Operator, M: Optional[int], keep=None) -> Operator:
    """Keep the ``M`` largest-magnitude strings plus every string in ``keep``.

    ``keep`` (an Operator or iterable of PauliTerm) does not count against
    ``M``.  Ties are broken by ascending ``(v, w)``.
    """
    if M is None:
        return A
    if M < 1:
        raise ValueError("M must be >= 1")
    protected = _keep_mask(A, keep)
    free = np.flatnonzero(~protected)
    if free.size <= M:
        return A
    mag = np.abs(A.c[free])
    order = np.lexsort((A.w[free], A.v[free], -mag))
    chosen = protected.copy()
    chosen[free[order[:M]]] = True
    return A._new(A.v[chosen], A.w[chosen], A.c[chosen])


def cutoff(A: Operator, eps: float) -> Operator:
    """Drop strings with ``|coefficient| < eps``."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    sel = np.abs(A.c) >= eps
    return A._new(A.v[sel], A.w[sel], A.c[sel])


def add_noise(A: Operator, g: float) -> Operator:
    """Depolarizing damping: each string scaled by ``exp(-g * weight)``."""
    if g < 0:
        raise ValueError("noise amplitude must be >= 0")
    if g == 0:
        return A
    return A._new(A.v, A.w, A.c * np.exp(-g * A.weights()))


def truncate_weight(A: Operator, lmax: int) -> Operator:
    """Remove strings longer than ``lmax`` sites."""
    if lmax < 0:
        raise ValueError("lmax must be >= 0")
    sel = A.weights() <= lmax
    return A._new(A.v[sel], A.w[sel], A.c[sel])


def compress(A: Operator) -> Operator:
    v, w, c = _merge(A.v, A.w, A.c, A.n)
    return A._new(v, w, c)


def add_term(A: Operator, coeff: complex, letters) -> Operator:
    return A.add_term(coeff, letters)


@dataclass
class TrimPolicy:
    """Per-step truncation settings.

    ``M`` is the maximum number of retained strings (``trim = log2(M)`` in
    the command line), ``keep`` protects strings from being dropped.
    """

    M: Optional[int] = None
    keep: Optional[Operator] = None
    max_weight: Optional[int] = None
    cutoff: Optional[float] = None

    def __post_init__(self):
        if self.M is not None and self.M < 1:
            raise ValueError("M must be >= 1")

    @classmethod
    def from_trim(cls, trim_exponent: int, **kw) -> "TrimPolicy":
        return cls(M=2 ** int(trim_exponent), **kw)

    def apply(self, A):
        if self.cutoff is not None:
            A = A.cutoff(self.cutoff)
        if self.max_weight is not None:
            A = A.truncate_weight(self.max_weight)
        if self.M is not None:
            A = A.trim(self.M, keep=self.keep)
        return A


def allclose(A: Operator, B: Operator, atol: float = 1e-12) -> bool:
    """Coefficient-wise comparison, treating missing strings as zero."""
    if A.n != B.n:
        return False
    diff = A - B
    return bool(np.all(np.abs(diff.c) <= atol))


__all__ = [
    "MAX_SITES",
    "Operator",
    "TrimPolicy",
    "add_noise",
    "add_term",
    "allclose",
    "compress",
    "cutoff",
    "dagger",
    "norm_lanczos",
    "op_commutator",
    "op_product",
    "trace_normalized",
    "trace_product_normalized",
    "trim",
    "truncate_weight",
]
