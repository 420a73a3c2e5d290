"""Dense-matrix reference implementations.

Everything here works on explicit ``2**n x 2**n`` matrices built from the
four tau matrices with Kronecker products, so it shares no code with the
bit-level phase rules.  Site 1 is the leftmost Kronecker factor.
"""

from __future__ import annotations

import numpy as np

from .operator import Operator

MAX_DENSE_SITES = 12
MAX_HEISENBERG_SITES = 10
MAX_LANCZOS_SITES = 8

TAU = {
    (0, 0): np.eye(2, dtype=complex),
    (0, 1): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 0): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 1): np.array([[0, 1], [-1, 0]], dtype=complex),
}

PAULI = {
    "1": np.eye(2, dtype=complex),
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _cap(n: int, limit: int) -> None:
    if n > limit:
        raise ValueError(f"dense oracle limited to n <= {limit}, got {n}")


def _kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli-letter label such as ``"XZ1Y"``."""
    _cap(len(label), MAX_DENSE_SITES)
    return _kron_all(PAULI[ch] for ch in label.upper())


def _index_order(x: np.ndarray, n: int) -> np.ndarray:
    """Reverse the low ``n`` bits: site 1 is the most significant Kronecker factor."""
    out = np.zeros_like(x)
    for i in range(n):
        out |= ((x >> np.uint64(i)) & np.uint64(1)) << np.uint64(n - 1 - i)
    return out


def to_dense(A: Operator) -> np.ndarray:
    """Sum of tau-coefficient times the tau-string matrix.

    Uses the basis action ``Z^v X^w |b> = (-1)^{pop(v & (b ^ w))} |b ^ w>``
    rather than Kronecker products, which keeps large random batches cheap.
    """
    n = A.n
    _cap(n, MAX_DENSE_SITES)
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    if len(A) == 0:
        return out
    v = _index_order(A.v, n)[:, None]
    w = _index_order(A.w, n)[:, None]
    cols = np.arange(dim, dtype=np.uint64)[None, :]
    rows = cols ^ w
    sign = 1 - 2 * (np.bitwise_count(v & rows) & 1).astype(np.int64)
    np.add.at(out, (rows.astype(np.intp), np.broadcast_to(cols, rows.shape).astype(np.intp)),
              A.c[:, None] * sign)
    return out


def to_dense_kron(A: Operator) -> np.ndarray:
    """Reference construction by explicit Kronecker products (slow)."""
    n = A.n
    _cap(n, MAX_DENSE_SITES)
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for term, coeff in A:
        mats = [TAU[((term.v >> i) & 1, (term.w >> i) & 1)] for i in range(n)]
        out += coeff * _kron_all(mats)
    return out


def from_dense(M: np.ndarray, tol: float = 0.0) -> Operator:
    """Decompose a matrix into tau strings by projection (``n <= 6`` in practice)."""
    dim = M.shape[0]
    n = int(round(np.log2(dim)))
    _cap(n, MAX_DENSE_SITES)
    vs, ws, cs = [], [], []
    for v in range(2 ** n):
        for w in range(2 ** n):
            mats = [TAU[((v >> i) & 1, (w >> i) & 1)] for i in range(n)]
            T = _kron_all(mats)
            # tau strings satisfy tr(T^dagger T) = 2**n
            coeff = np.trace(T.conj().T @ M) / dim
            if abs(coeff) > tol:
                vs.append(v)
                ws.append(w)
                cs.append(coeff)
    if not vs:
        return Operator(n)
    return Operator(n, vs, ws, cs)


def _eigh(H: Operator):
    Hd = to_dense(H)
    if not np.allclose(Hd, Hd.conj().T, atol=1e-12):
        raise ValueError("Hamiltonian is not Hermitian")
    return np.linalg.eigh(Hd)


def dense_heisenberg(H: Operator, O: Operator, t: float) -> np.ndarray:
    """``exp(iHt) O exp(-iHt)`` via eigendecomposition."""
    _cap(H.n, MAX_HEISENBERG_SITES)
    E, V = _eigh(H)
    U = (V * np.exp(1j * E * t)) @ V.conj().T
    return U @ to_dense(O) @ U.conj().T


def dense_autocorrelation(H: Operator, O: Operator, times) -> np.ndarray:
    """``tr(O(t) O^dagger) / tr(O O)`` on a time grid, exact."""
    _cap(H.n, MAX_HEISENBERG_SITES)
    E, V = _eigh(H)
    Od = to_dense(O)
    Oe = V.conj().T @ Od @ V
    Be = V.conj().T @ Od.conj().T @ V
    gaps = E[:, None] - E[None, :]
    norm = np.trace(Od @ Od)
    out = []
    for t in np.atleast_1d(times):
        Ot = Oe * np.exp(1j * gaps * t)
        out.append(np.sum(Ot * Be.T) / norm)
    return np.array(out)


def depolarize(M: np.ndarray, g: float) -> np.ndarray:
    """Apply a single-site depolarizing channel with damping ``exp(-g)`` on every site.

    Each site maps ``rho -> p rho + (1 - p) tr_i(rho) 1/2`` with ``p = exp(-g)``,
    which scales a string of length ``l`` by ``p**l``.
    """
    dim = M.shape[0]
    n = int(round(np.log2(dim)))
    p = np.exp(-g)
    T = M.reshape([2] * (2 * n))
    for i in range(n):
        traced = np.trace(T, axis1=i, axis2=n + i)
        mixed = np.expand_dims(np.expand_dims(traced, i), n + i) * np.eye(2).reshape(
            [2 if k in (i, n + i) else 1 for k in range(2 * n)]
        ) / 2
        T = p * T + (1 - p) * mixed
    return T.reshape(dim, dim)


def dense_noisy_evolution(H: Operator, O: Operator, dt: float, steps: int, g: float):
    """Alternate exact unitary steps and depolarizing noise; yields the matrix after each step."""
    _cap(H.n, MAX_HEISENBERG_SITES)
    E, V = _eigh(H)
    U = (V * np.exp(1j * E * dt)) @ V.conj().T
    M = to_dense(O)
    out = [M]
    for _ in range(steps):
        M = U @ M @ U.conj().T
        M = depolarize(M, g)
        out.append(M)
    return out


def dense_lanczos(H: Operator, O0: Operator, steps: int, tol: float = 1e-12) -> np.ndarray:
    """Lanczos coefficients from explicit matrices and the ``2**-n`` trace inner product."""
    n = H.n
    _cap(n, MAX_LANCZOS_SITES)
    dim = 2 ** n
    Hd = to_dense(H)

    def norm(X):
        return np.sqrt(np.real(np.vdot(X, X)) / dim)

    def liou(X):
        return Hd @ X - X @ Hd

    prev = np.zeros((dim, dim), dtype=complex)
    cur = to_dense(O0)
    cur = cur / norm(cur)
    b_prev = 0.0
    bs = []
    for _ in range(steps):
        A = liou(cur) - b_prev * prev
        b = norm(A)
        if b < tol:
            break
        bs.append(b)
        prev, cur, b_prev = cur, A / b, b
    return np.array(bs)


def dense_trace_normalized(M: np.ndarray) -> complex:
    return complex(np.trace(M) / M.shape[0])
