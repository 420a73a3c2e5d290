import numpy as np
import pytest

from paulialg.models import ising, quantum_ising, xx_chain, xxz_nnn
from paulialg.operator import Operator, allclose, trace_product_normalized
from paulialg.symmetric import (
    NotTranslationInvariant,
    SymOperator1D,
    from_operator,
    sym_trace_product,
    symmetric_allclose,
    to_operator,
)


def test_ising_representatives():
    J, g = 1.3, 0.7
    S = from_operator(ising(8, J, g))
    # one anchored string per orbit: Z1 Z2 and X1, each with the full-chain coefficient
    assert set(S.rep.labels()) == {"ZZ111111", "X1111111"}
    assert np.isclose(S.rep.coefficient("ZZ111111"), -J)
    assert np.isclose(S.rep.coefficient("X1111111"), -J * g)


def test_roundtrip():
    H = xxz_nnn(10)
    assert allclose(to_operator(from_operator(H)), H)


def test_periodic_orbit_and_identity():
    A = Operator.from_pauli_dict({"Z1Z1": 1.0, "1Z1Z": 1.0, "1111": 4.0})
    S = from_operator(A)
    # Z1Z1 has orbit 2 of 4 sites, the identity orbit 1
    assert np.isclose(S.rep.coefficient("Z1Z1"), 0.5)
    assert np.isclose(S.rep.coefficient("1111"), 1.0)
    assert allclose(S.to_operator(), A)
    assert np.isclose(S.trace(), 4.0)


def test_rejects_open_chain():
    with pytest.raises(NotTranslationInvariant, match="translation invariant"):
        from_operator(xx_chain(6, "open"))


@pytest.mark.parametrize("build", [lambda: xx_chain(6, "periodic"),
                                   lambda: quantum_ising(6, 0.5, "periodic"),
                                   lambda: xxz_nnn(6)])
def test_algebra_matches_full(build):
    H = build()
    O = Operator(6)
    for j in range(1, 7):
        O = O + (0.3, "X", j) + (1.1, "Z", j, "Y", j % 6 + 1)
    sH, sO = from_operator(H), from_operator(O)
    assert allclose((sH * sO).to_operator(), H * O, atol=1e-12)
    assert allclose(sH.commutator(sO).to_operator(), H.commutator(O), atol=1e-12)
    assert allclose((sO * sO).to_operator(), O * O, atol=1e-12)
    assert np.isclose(sym_trace_product(sH, sO), trace_product_normalized(H, O))
    assert np.isclose(sO.norm_lanczos(), O.norm_lanczos())
    assert allclose(sO.dagger().to_operator(), O.dagger())
    assert allclose(sO.add_noise(0.2).to_operator(), O.add_noise(0.2))
    assert symmetric_allclose(sO + 2.0, from_operator(O + 2.0))


def test_trim_reduces_representatives():
    O = from_operator(xxz_nnn(8))
    assert len(O.trim(2)) == 2
    assert isinstance(O.trim(2), SymOperator1D)


def test_mismatch():
    with pytest.raises(ValueError):
        from_operator(xx_chain(4, "periodic")) * from_operator(xx_chain(5, "periodic"))
