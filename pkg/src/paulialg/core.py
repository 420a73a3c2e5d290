"""Bit-level encoding of single Pauli strings.

A string over ``n`` sites is a pair of integers ``(v, w)``.  Bit ``i`` of
``v`` marks a Z-type component on site ``i + 1`` and bit ``i`` of ``w`` marks
an X-type component, so that the string is the tensor product of the real
matrices

    tau_00 = 1,  tau_01 = X,  tau_10 = Z,  tau_11 = Z X = iY

written as ``Z**v X**w`` site by site.  With that ordering

    (Z^v1 X^w1)(Z^v2 X^w2) = (-1)^pop(w1 & v2) Z^(v1^v2) X^(w1^w2)

which fixes the orientation of the phase rule used throughout the package.

Sites are 1-based at every user-facing boundary and 0-based for bits.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

MAX_SITES = 64

# (v bit, w bit) per letter
_LETTER_BITS = {"1": (0, 0), "I": (0, 0), "X": (0, 1), "Z": (1, 0), "Y": (1, 1)}
_BITS_LETTER = {(0, 0): "1", (0, 1): "X", (1, 0): "Z", (1, 1): "Y"}


class PauliTerm(NamedTuple):
    """A single Pauli string ``(v, w)`` on ``n`` sites."""

    v: int
    w: int
    n: int

    @classmethod
    def identity(cls, n: int) -> "PauliTerm":
        return cls(0, 0, n)

    def label(self) -> str:
        return to_label(self)


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_SITES:
        raise ValueError(f"site count must be in [1, {MAX_SITES}], got {n}")


def _mask(n: int) -> int:
    return (1 << n) - 1


def _same_n(a: PauliTerm, b: PauliTerm) -> int:
    if a.n != b.n:
        raise ValueError(f"site count mismatch: {a.n} != {b.n}")
    return a.n


def popcount(x: int) -> int:
    return bin(x).count("1")


def term_product(a: PauliTerm, b: PauliTerm) -> tuple[PauliTerm, int]:
    """Product of two strings, ``tau_a tau_b = phase * tau_ab`` with phase = +-1."""
    n = _same_n(a, b)
    phase = -1 if popcount(a.w & b.v) & 1 else 1
    return PauliTerm(a.v ^ b.v, a.w ^ b.w, n), phase


def term_commutator(a: PauliTerm, b: PauliTerm) -> tuple[PauliTerm, int]:
    """Commutator ``[tau_a, tau_b] = phase * tau_ab`` with phase in {-2, 0, 2}."""
    n = _same_n(a, b)
    s1 = -1 if popcount(a.w & b.v) & 1 else 1
    s2 = -1 if popcount(b.w & a.v) & 1 else 1
    return PauliTerm(a.v ^ b.v, a.w ^ b.w, n), s1 - s2


def weight(a: PauliTerm) -> int:
    """Number of sites carrying a non-identity letter."""
    return popcount(a.v | a.w)


def _rot(x: int, k: int, n: int) -> int:
    k %= n
    if k == 0:
        return x
    return ((x << k) | (x >> (n - k))) & _mask(n)


def translate(a: PauliTerm, k: int) -> PauliTerm:
    """Cyclically move every letter ``k`` sites to the right."""
    return PauliTerm(_rot(a.v, k, a.n), _rot(a.w, k, a.n), a.n)


def shift_left(a: PauliTerm) -> PauliTerm:
    """Canonical anchor of ``a``: the rotation occupying site 1 with the smallest ``(v, w)``.

    The identity has no anchor and is returned unchanged.
    """
    if a.v == 0 and a.w == 0:
        return a
    best = None
    for k in range(a.n):
        r = translate(a, k)
        if (r.v | r.w) & 1 and (best is None or (r.v, r.w) < (best.v, best.w)):
            best = r
    return best


def orbit_size(a: PauliTerm) -> int:
    """Smallest ``k > 0`` with ``translate(a, k) == a``."""
    for k in range(1, a.n + 1):
        if translate(a, k) == a:
            return k
    return a.n  # unreachable


def y_count(v, w):
    """Number of Y letters; works on ints and on uint64 arrays."""
    if isinstance(v, np.ndarray):
        return np.bitwise_count(v & w).astype(np.int64)
    return popcount(v & w)


def parse_term(letters: Sequence, n: int) -> tuple[PauliTerm, complex]:
    """Encode ``[(letter, site), ...]`` or a flat ``letter, site, letter, site`` sequence.

    Returns the string and the factor that maps a Pauli-letter coefficient to
    the stored tau coefficient, ``(-i) ** (number of Y)``.
    """
    _check_n(n)
    pairs = _pairs(letters)
    v = w = 0
    seen = set()
    for sym, site in pairs:
        sym = str(sym).upper()
        if sym not in _LETTER_BITS:
            raise ValueError(f"unknown Pauli letter {sym!r}")
        if not isinstance(site, (int, np.integer)) or not 1 <= site <= n:
            raise ValueError(f"site {site!r} out of range [1, {n}]")
        if site in seen:
            raise ValueError(f"duplicate site {site}")
        seen.add(site)
        bv, bw = _LETTER_BITS[sym]
        v |= bv << (site - 1)
        w |= bw << (site - 1)
    return PauliTerm(v, w, n), (-1j) ** popcount(v & w)


def _pairs(letters: Sequence) -> list[tuple[str, int]]:
    letters = list(letters)
    if letters and isinstance(letters[0], (tuple, list)):
        return [tuple(p) for p in letters]
    if len(letters) % 2:
        raise ValueError("expected alternating letter, site entries")
    return list(zip(letters[::2], letters[1::2]))


def from_label(label: str) -> tuple[PauliTerm, complex]:
    """Inverse of :func:`to_label`; also returns the tau conversion factor."""
    label = label.strip()
    return parse_term([(ch, i + 1) for i, ch in enumerate(label)], len(label))


def to_label(a: PauliTerm) -> str:
    """Render as ``n`` characters from ``1XYZ``, site 1 leftmost."""
    return "".join(
        _BITS_LETTER[((a.v >> i) & 1, (a.w >> i) & 1)] for i in range(a.n)
    )


def labels(v: np.ndarray, w: np.ndarray, n: int) -> list[str]:
    return [to_label(PauliTerm(int(a), int(b), n)) for a, b in zip(v, w)]


# ---------------------------------------------------------------------------
# array versions used by the operator containers

def rot_array(x: np.ndarray, k: int, n: int) -> np.ndarray:
    k %= n
    if k == 0:
        return x.copy()
    mask = np.uint64(_mask(n)) if n < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    return ((x << np.uint64(k)) | (x >> np.uint64(n - k))) & mask


_UMAX = np.uint64(0xFFFFFFFFFFFFFFFF)


def shift_left_arrays(v: np.ndarray, w: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`shift_left` over many strings."""
    best_v = np.full(v.shape, _UMAX)
    best_w = np.full(v.shape, _UMAX)
    for k in range(n):
        rv = rot_array(v, k, n)
        rw = rot_array(w, k, n)
        anchored = ((rv | rw) & np.uint64(1)).astype(bool)
        better = anchored & ((rv < best_v) | ((rv == best_v) & (rw < best_w)))
        best_v = np.where(better, rv, best_v)
        best_w = np.where(better, rw, best_w)
    ident = (v | w) == 0
    best_v[ident] = 0
    best_w[ident] = 0
    return best_v, best_w


def orbit_sizes(v: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    """Vectorised :func:`orbit_size`."""
    out = np.full(v.shape, n, dtype=np.int64)
    for k in range(n - 1, 0, -1):
        fixed = (rot_array(v, k, n) == v) & (rot_array(w, k, n) == w)
        out[fixed] = k
    return out


