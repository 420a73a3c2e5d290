"""Heisenberg-picture time evolution with truncation and depolarizing noise.

Operators follow ``dO/dt = i [H, O]``, i.e. ``O(t) = exp(iHt) O exp(-iHt)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .operator import Operator, trace_product_normalized
from .symmetric import SymOperator1D, sym_trace_product

log = logging.getLogger(__name__)


@dataclass
class EvolveConfig:
    dt: float
    t_max: float
    M: Optional[int] = None
    epsilon: float = 0.0
    keep: Optional[Operator] = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_max < 0:
            raise ValueError("t_max must be >= 0")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    @property
    def times(self) -> np.ndarray:
        steps = int(round(self.t_max / self.dt))
        return self.dt * np.arange(steps + 1)


@dataclass
class EvolutionTrace:
    """Samples taken on the time grid before each step.

    ``profile`` holds ``tr(O(t) Z_i) / 2**n`` for each requested site (two-point
    runs only), ``n_t`` the particle-loss factor ``exp(-epsilon t)`` and
    ``discarded`` the norm fraction removed by the last truncation.
    """

    times: np.ndarray
    S: np.ndarray
    n_t: np.ndarray
    terms: np.ndarray
    discarded: np.ndarray
    sites: Optional[list[int]] = None
    profile: Optional[np.ndarray] = None
    completed: bool = True

    @property
    def normalized_profile(self) -> np.ndarray:
        return self.profile / self.n_t[:, None]


def _trim(O, M, keep):
    if M is None:
        return O
    return O.trim(M, keep=keep)


def rk4_step(H, O, dt: float, M: Optional[int] = None, keep=None):
    """One classical RK4 step of ``dO/dt = i [H, O]``.

    Each stage derivative is truncated to ``M`` strings (``keep`` honoured)
    before it feeds the next stage.
    """
    if H.n != O.n:
        raise ValueError(f"site count mismatch: {H.n} != {O.n}")
    if M is not None and keep is not None and len(keep) > M:
        raise ValueError(f"M={M} cannot hold the {len(keep)} protected strings")

    def deriv(X):
        return _trim(H.commutator(X) * 1j, M, keep)

    k1 = deriv(O)
    k2 = deriv(O + k1 * (dt / 2))
    k3 = deriv(O + k2 * (dt / 2))
    k4 = deriv(O + k3 * dt)
    return O + (k1 + k2 * 2 + k3 * 2 + k4) * (dt / 6)


def _trace(A, B) -> complex:
    if isinstance(A, SymOperator1D):
        return sym_trace_product(A, B)
    return trace_product_normalized(A, B)


def _run(H, O0, cfg: EvolveConfig, observe: Callable, on_step=None):
    keep = cfg.keep if cfg.keep is not None else O0
    times = cfg.times
    O = O0
    terms, discarded = [], []
    last_discard = 0.0
    completed = True
    for k, t in enumerate(times):
        observe(O)
        terms.append(len(O))
        discarded.append(last_discard)
        if k == len(times) - 1:
            break
        O = rk4_step(H, O, cfg.dt, cfg.M, keep)
        O = O.add_noise(cfg.epsilon * cfg.dt)
        before = O.norm_lanczos()
        trimmed = _trim(O, cfg.M, keep)
        after = trimmed.norm_lanczos()
        last_discard = float(np.sqrt(max(before ** 2 - after ** 2, 0.0)) / before) if before else 0.0
        O = trimmed
        if on_step is not None and on_step(k + 1, O) is False:
            completed = False
            break
    n = len(terms)
    return (times[:n], np.exp(-cfg.epsilon * times[:n]), np.array(terms),
            np.array(discarded), completed, O)


def evolve_autocorrelation(H, O0, cfg: EvolveConfig, on_step=None) -> EvolutionTrace:
    """``S(t) = tr(O(t) O0^dagger) / tr(O0 O0)`` along a noisy, truncated evolution.

    Each step is RK4, then noise ``exp(-epsilon dt weight)``, then a trim to
    ``M`` strings that never discards strings of ``cfg.keep`` (default ``O0``).
    ``on_step(k, O)`` may return ``False`` to abort; the trace is then
    flagged incomplete.
    """
    ref = O0.dagger()
    norm = _trace(O0, O0)
    if norm == 0:
        raise ValueError("initial operator has zero norm")
    S = []
    times, n_t, terms, disc, completed, _ = _run(
        H, O0, cfg, lambda O: S.append(_trace(O, ref) / norm), on_step
    )
    return EvolutionTrace(times, np.array(S), n_t, terms, disc, completed=completed)


def evolve_two_point(H: Operator, site: int, cfg: EvolveConfig, sites: Sequence[int],
                     on_step=None) -> EvolutionTrace:
    """Evolve ``Z_site`` once and read ``tr(Z_site(t) Z_i) / 2**n`` for every ``i`` in ``sites``.

    ``S`` holds the autocorrelation (``i == site``).
    """
    n = H.n
    sites = list(sites)
    O0 = Operator(n) + ("Z", site)
    # Z strings carry no phase, so the correlator is the stored coefficient
    sv = np.array([1 << (i - 1) for i in sites], dtype=np.uint64)
    rows, S = [], []

    def observe(O):
        Zmask = O.w == 0
        table = dict(zip(O.v[Zmask].tolist(), O.c[Zmask].tolist()))
        rows.append([table.get(int(x), 0j) for x in sv])
        S.append(table.get(1 << (site - 1), 0j))

    times, n_t, terms, disc, completed, _ = _run(H, O0, cfg, observe, on_step)
    return EvolutionTrace(times, np.array(S), n_t, terms, disc, sites=sites,
                          profile=np.array(rows), completed=completed)


def profile_variance(trace: EvolutionTrace, site: int, n: int) -> np.ndarray:
    """Variance in separation of the normalised profile, using periodic minimum-image distances."""
    d = np.array([((i - site + n // 2) % n) - n // 2 for i in trace.sites], dtype=float)
    p = np.real(trace.normalized_profile)
    return (p * d ** 2).sum(axis=1) / p.sum(axis=1)
