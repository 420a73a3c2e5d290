"""Hamiltonians and initial operators on chains, square grids and graphs.

Grid sites are numbered row-major with x fastest: ``site = (y - 1) * Lx + x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .operator import Operator

OPEN = "open"
PERIODIC = "periodic"


@dataclass
class LatticeSpec:
    kind: str = "chain"
    N: Optional[int] = None
    Lx: Optional[int] = None
    Ly: Optional[int] = None
    boundary: str = OPEN
    edges: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("chain", "grid2d", "graph"):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        _check_boundary(self.boundary)
        if self.kind == "grid2d":
            if self.Lx is None or self.Ly is None:
                raise ValueError("grid2d needs Lx and Ly")
            self.N = self.Lx * self.Ly

    def site_count(self) -> int:
        return self.N

    def bonds(self) -> list[tuple[int, int]]:
        if self.kind == "chain":
            return chain_bonds(self.N, self.boundary)
        if self.kind == "grid2d":
            h, v = grid_bonds(self.Lx, self.Ly, self.boundary)
            return h + v
        return [tuple(e) for e in self.edges]


@dataclass
class ModelParams:
    delta: float = 2.0
    gamma: float = 0.5
    h_x: float = 0.5
    J: float = 1.0
    g: float = 1.0


def _check_boundary(boundary: str) -> None:
    if boundary not in (OPEN, PERIODIC):
        raise ValueError(f"boundary must be 'open' or 'periodic', got {boundary!r}")


def chain_bonds(N: int, boundary: str = OPEN, distance: int = 1) -> list[tuple[int, int]]:
    """Site pairs ``(i, i + distance)``, wrapped when periodic."""
    _check_boundary(boundary)
    if boundary == PERIODIC:
        return [(i, (i - 1 + distance) % N + 1) for i in range(1, N + 1)]
    return [(i, i + distance) for i in range(1, N - distance + 1)]


def grid_site(x: int, y: int, Lx: int) -> int:
    return (y - 1) * Lx + x


def grid_bonds(Lx: int, Ly: int, boundary: str = OPEN):
    """Horizontal and vertical nearest-neighbour bonds, each ordered (site, neighbour)."""
    if Lx < 2 or Ly < 2:
        raise ValueError("grid needs Lx, Ly >= 2")
    _check_boundary(boundary)
    wrap = boundary == PERIODIC
    horiz, vert = [], []
    for y in range(1, Ly + 1):
        for x in range(1, Lx + 1):
            s = grid_site(x, y, Lx)
            if x < Lx or (wrap and Lx > 2):
                horiz.append((s, grid_site(x % Lx + 1, y, Lx)))
            if y < Ly or (wrap and Ly > 2):
                vert.append((s, grid_site(x, y % Ly + 1, Lx)))
    return horiz, vert


def _bond_sum(N: int, bonds, couplings: Sequence[tuple[float, str, str]]) -> list:
    terms = []
    for i, j in bonds:
        for coeff, a, b in couplings:
            terms.append((coeff, [(a, i), (b, j)]))
    return terms


def _need(N: int, minimum: int) -> None:
    if N < minimum:
        raise ValueError(f"need at least {minimum} sites, got {N}")


def xx_chain(N: int, boundary: str = OPEN) -> Operator:
    """Sum of XX + YY over nearest neighbours."""
    _need(N, 2)
    bonds = chain_bonds(N, boundary)
    return Operator.from_terms(N, _bond_sum(N, bonds, [(1.0, "X", "X"), (1.0, "Y", "Y")]))


def xxx_chain(N: int, boundary: str = OPEN) -> Operator:
    _need(N, 2)
    bonds = chain_bonds(N, boundary)
    couplings = [(1.0, "X", "X"), (1.0, "Y", "Y"), (1.0, "Z", "Z")]
    return Operator.from_terms(N, _bond_sum(N, bonds, couplings))


def quantum_ising(N: int, h_x: float = 0.5, boundary: str = OPEN) -> Operator:
    """``sum XX - 1.05 Z + h_x X``."""
    _need(N, 2)
    terms = _bond_sum(N, chain_bonds(N, boundary), [(1.0, "X", "X")])
    for j in range(1, N + 1):
        terms.append((-1.05, [("Z", j)]))
        terms.append((h_x, [("X", j)]))
    return Operator.from_terms(N, terms)


def ising(N: int, J: float = 1.0, g: float = 1.0, boundary: str = PERIODIC) -> Operator:
    """``-J (sum ZZ + g sum X)``."""
    _need(N, 2)
    terms = _bond_sum(N, chain_bonds(N, boundary), [(-J, "Z", "Z")])
    terms += [(-J * g, [("X", j)]) for j in range(1, N + 1)]
    return Operator.from_terms(N, terms)


def xxz_nnn(N: int, delta: float = 2.0, gamma: float = 0.5, boundary: str = PERIODIC) -> Operator:
    """XXZ chain with nearest and gamma-weighted next-nearest couplings."""
    _need(N, 3)
    couplings = [(1.0, "X", "X"), (1.0, "Y", "Y"), (delta, "Z", "Z")]
    terms = _bond_sum(N, chain_bonds(N, boundary, 1), couplings)
    terms += _bond_sum(N, chain_bonds(N, boundary, 2),
                       [(gamma * c, a, b) for c, a, b in couplings])
    return Operator.from_terms(N, terms)


def xzzx_2d(Lx: int, Ly: int, boundary: str = OPEN) -> Operator:
    """``sum X_{x,y} Z_{x+1,y} + Z_{x,y} X_{x,y+1}``."""
    horiz, vert = grid_bonds(Lx, Ly, boundary)
    terms = _bond_sum(Lx * Ly, horiz, [(1.0, "X", "Z")])
    terms += _bond_sum(Lx * Ly, vert, [(1.0, "Z", "X")])
    return Operator.from_terms(Lx * Ly, terms)


def xxz_2d(Lx: int, Ly: int, delta: float = 0.5, boundary: str = OPEN) -> Operator:
    horiz, vert = grid_bonds(Lx, Ly, boundary)
    couplings = [(1.0, "X", "X"), (1.0, "Y", "Y"), (delta, "Z", "Z")]
    return Operator.from_terms(Lx * Ly, _bond_sum(Lx * Ly, horiz + vert, couplings))


def graph_model(
    N: int,
    edges: Iterable[tuple[int, int]],
    bond_terms: Sequence[tuple[float, str, str]] = (),
    field_terms: Sequence[tuple[float, str]] = (),
) -> Operator:
    """Arbitrary geometry: the same two-site couplings on every edge plus one-site fields."""
    edges = [tuple(e) for e in edges]
    for i, j in edges:
        if not (1 <= i <= N and 1 <= j <= N) or i == j:
            raise ValueError(f"invalid edge ({i}, {j}) for {N} sites")
    terms = _bond_sum(N, edges, list(bond_terms))
    for j in range(1, N + 1):
        for coeff, letter in field_terms:
            terms.append((coeff, [(letter, j)]))
    return Operator.from_terms(N, terms)


def initial_operator(name: str, N: int, boundary: str = OPEN) -> Operator:
    """Named starting operators, unnormalised.

    ``sumX``, ``energy_current_xxx``, ``ising_energy`` and single-site
    strings such as ``Z1``, ``X3`` or ``Z11`` are recognised.
    """
    if name == "sumX":
        return Operator.from_terms(N, [(1.0, [("X", j)]) for j in range(1, N + 1)])
    if name == "energy_current_xxx":
        terms = []
        for i, j in chain_bonds(N, boundary):
            terms.append((1.0, [("X", i), ("Y", j)]))
            terms.append((-1.0, [("Y", i), ("X", j)]))
        return Operator.from_terms(N, terms)
    if name == "ising_energy":
        terms = _bond_sum(N, chain_bonds(N, boundary), [(1.05, "X", "X")])
        terms += [(1.0, [("Z", j)]) for j in range(1, N + 1)]
        return Operator.from_terms(N, terms)
    m = re.fullmatch(r"([XYZ])(\d+)", name)
    if m:
        return Operator.from_terms(N, [(1.0, [(m.group(1), int(m.group(2)))])])
    raise ValueError(f"unknown initial operator {name!r}")


_CHAIN_BUILDERS = {
    "xx": xx_chain,
    "xxx": xxx_chain,
}


_PERIODIC_BY_DEFAULT = ("ising", "xxz_nnn")


def model_boundary(desc: dict) -> str:
    """Boundary of a descriptor, falling back to the model's default."""
    if desc.get("boundary"):
        return desc["boundary"]
    return PERIODIC if desc.get("model") in _PERIODIC_BY_DEFAULT else OPEN


def build_model(desc: dict) -> Operator:
    """Build from a descriptor.

    ``{"model": "xxz_nnn", "N": 12, "params": {...}, "boundary": "periodic"}``,
    ``{"model": "xzzx_2d", "Lx": 3, "Ly": 3}`` or
    ``{"graph": [[1, 2], ...], "N": 3, "terms": {"bond": [[1, "X", "X"]], "field": [[0.5, "Z"]]}}``.
    An optional ``"extra_terms": [[coeff, "X", 4, ...], ...]`` adds individual
    strings (for example a defect field).
    """
    p = ModelParams(**desc.get("params", {}))
    boundary = model_boundary(desc)
    if "graph" in desc:
        terms = desc.get("terms", {})
        H = graph_model(
            desc["N"],
            desc["graph"],
            [tuple(t) for t in terms.get("bond", [])],
            [tuple(t) for t in terms.get("field", [])],
        )
    else:
        model = desc.get("model")
        if model in _CHAIN_BUILDERS:
            H = _CHAIN_BUILDERS[model](desc["N"], boundary)
        elif model == "quantum_ising":
            H = quantum_ising(desc["N"], p.h_x, boundary)
        elif model == "ising":
            H = ising(desc["N"], p.J, p.g, boundary)
        elif model == "xxz_nnn":
            H = xxz_nnn(desc["N"], p.delta, p.gamma, boundary)
        elif model == "xzzx_2d":
            H = xzzx_2d(desc["Lx"], desc["Ly"], boundary)
        elif model == "xxz_2d":
            # the 2D model's anisotropy defaults to 1/2, not the chain's 2
            delta = desc.get("params", {}).get("delta", 0.5)
            H = xxz_2d(desc["Lx"], desc["Ly"], delta, boundary)
        else:
            raise ValueError(f"unknown model {model!r}")
    for extra in desc.get("extra_terms", []):
        H = H + tuple(extra)
    return H


MODEL_NAMES = sorted(list(_CHAIN_BUILDERS) + ["quantum_ising", "ising", "xxz_nnn", "xzzx_2d", "xxz_2d"])
