import itertools
import math
from collections import defaultdict

import numpy as np
import pytest

from geophase.cyclic import (
    CyclicConfig,
    InterferometerRows,
    build_cyclic_rows,
    coincidence_distribution,
)
from geophase.errors import CapacityError, InvalidInputError, InvalidInterferometerError
from geophase.oracle import (
    coincidence_port_patterns,
    compose,
    cycle_decomposition,
    distinguishability_J,
    full_distribution,
    inverse,
    multiplicity,
    output_probability,
    output_probability_complex,
    permanent,
)
from geophase.states import (
    MixedState,
    PureState,
    geometric_factor,
    random_mixed,
    random_pure,
    random_unitary,
)

BS = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)
KET0 = PureState([1, 0])
KET1 = PureState([0, 1])


def naive_permanent(m):
    n = len(m)
    return sum(math.prod(m[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def test_cycle_examples():
    assert cycle_decomposition([0, 1, 2, 3]) == [(0,), (1,), (2,), (3,)]
    assert cycle_decomposition([1, 0, 3, 2]) == [(0, 1), (2, 3)]
    assert cycle_decomposition([1, 2, 3, 4, 0]) == [(0, 1, 2, 3, 4)]
    assert cycle_decomposition([2, 0, 1]) == [(0, 2, 1)]


def test_cycle_partitions_index_set(rng):
    for _ in range(50):
        p = rng.permutation(7)
        cycles = cycle_decomposition(p)
        assert sorted(i for c in cycles for i in c) == list(range(7))
        for c in cycles:
            assert c[0] == min(c)
            assert all(p[c[i]] == c[(i + 1) % len(c)] for i in range(len(c)))


def test_permutation_helpers():
    p = (2, 0, 1)
    assert compose(p, inverse(p)) == (0, 1, 2)
    with pytest.raises(InvalidInputError):
        cycle_decomposition([0, 0, 1])


def test_j_identity_and_bounds(rng):
    states = [random_mixed(3, rng) for _ in range(5)]
    assert distinguishability_J(range(5), states) == 1
    for p in itertools.permutations(range(5)):
        j = distinguishability_J(p, states)
        assert abs(j) <= 1 + 1e-12
        assert distinguishability_J(inverse(p), states) == pytest.approx(j.conjugate(), abs=1e-12)


def test_j_identical_and_orthogonal():
    plus = PureState(np.array([1, 1]) / math.sqrt(2))
    basis = [PureState(np.eye(3)[k]) for k in range(3)]
    for p in itertools.permutations(range(3)):
        assert distinguishability_J(p, [plus] * 3) == pytest.approx(1)
        expected = 1 if p == (0, 1, 2) else 0
        assert distinguishability_J(p, basis) == expected


def test_j_full_cycle_is_geometric_factor(rng):
    for n in (2, 3, 5):
        states = [random_pure(2, rng) for _ in range(n)]
        v = geometric_factor(states).value
        shift = [(m + 1) % n for m in range(n)]
        # the m -> m+1 cycle orders the trace as rho_{n-1} ... rho_0, i.e. conj(V)
        assert distinguishability_J(shift, states) == pytest.approx(v.conjugate(), abs=1e-12)
        assert distinguishability_J(inverse(shift), states) == pytest.approx(v, abs=1e-12)


def test_j_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        distinguishability_J([1, 0], [KET0, PureState([1, 0, 0])])


def test_permanent_against_naive(rng):
    for n in range(1, 7):
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        assert permanent(m) == pytest.approx(naive_permanent(m), rel=1e-10)
    assert permanent(np.zeros((0, 0))) == 1


def test_multiplicity():
    assert multiplicity((0, 0, 1, 3, 3, 3)) == 12
    assert multiplicity(()) == 1


def test_hom_identical():
    rows = InterferometerRows(BS)
    assert output_probability(rows, [KET0, KET0], (0, 0)) == pytest.approx(0.5, abs=1e-12)
    assert output_probability(rows, [KET0, KET0], (1, 1)) == pytest.approx(0.5, abs=1e-12)
    assert output_probability(rows, [KET0, KET0], (0, 1)) == pytest.approx(0, abs=1e-12)


def test_hom_orthogonal():
    rows = InterferometerRows(BS)
    dist = full_distribution(rows, [KET0, KET1])
    assert dist == pytest.approx({(0, 0): 0.25, (0, 1): 0.5, (1, 1): 0.25}, abs=1e-12)


def test_cyclic_n4_matches_closed_form(rng):
    for _ in range(5):
        cfg = CyclicConfig(4, tuple(rng.uniform(-math.pi, math.pi, 4)))
        states = [random_pure(2, rng) for _ in range(4)]
        closed = coincidence_distribution(cfg, states)
        rows = build_cyclic_rows(cfg)
        for o, p in closed.items():
            assert output_probability(rows, states, o.ports()) == pytest.approx(p, abs=1e-9)


def test_single_phase_sign_n3(rng):
    cfg = CyclicConfig(3, (0.0, 0.9, 0.0))
    states = [random_pure(2, rng) for _ in range(3)]
    rows = build_cyclic_rows(cfg)
    for o, p in coincidence_distribution(cfg, states).items():
        assert output_probability(rows, states, o.ports()) == pytest.approx(p, abs=1e-12)


def test_full_distribution_sums(rng):
    states = [random_mixed(2, rng) for _ in range(3)]
    rows = build_cyclic_rows(CyclicConfig(3, (0.2, -0.4, 1.0)))
    full = full_distribution(rows, states)
    assert len(full) == math.comb(6 + 3 - 1, 3)
    assert math.fsum(full.values()) == pytest.approx(1, abs=1e-8)
    plus = PureState(np.array([1, 1]) / math.sqrt(2))
    coinc = full_distribution(build_cyclic_rows(CyclicConfig.calibrated(3)), [plus] * 3,
                              restrict_to_coincidence=True)
    assert math.fsum(coinc.values()) == pytest.approx(0.25, abs=1e-8)


def test_hom_full_distribution():
    dist = full_distribution(InterferometerRows(BS), [KET0, KET0])
    assert list(dist) == [(0, 0), (0, 1), (1, 1)]
    assert dist == pytest.approx({(0, 0): 0.5, (0, 1): 0.0, (1, 1): 0.5}, abs=1e-12)


def test_colex_order():
    assert coincidence_port_patterns(2) == [(0, 2), (1, 2), (0, 3), (1, 3)]
    full = list(full_distribution(np.eye(3)[:2], [KET0, KET1]))
    assert full == [(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2)]


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_bosonic_limit(n, rng):
    u = random_unitary(n + 1, rng)[:n]
    psi = random_pure(2, rng)
    for ports in list(itertools.combinations_with_replacement(range(n + 1), n))[:12]:
        sub = u[:, list(ports)]
        expected = abs(naive_permanent(sub)) ** 2 / multiplicity(ports)
        assert output_probability(u, [psi] * n, ports) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_classical_limit(n, rng):
    k = n + 1
    u = random_unitary(k, rng)[:n]
    states = [PureState(np.eye(n)[m]) for m in range(n)]
    expected = defaultdict(float)
    for ports in itertools.product(range(k), repeat=n):
        expected[tuple(sorted(ports))] += math.prod(abs(u[m, ports[m]]) ** 2 for m in range(n))
    dist = full_distribution(u, states)
    for ports, p in dist.items():
        assert p == pytest.approx(expected[ports], abs=1e-10)


def test_basis_invariance(rng):
    n = 4
    u = random_unitary(6, rng)[:n]
    rhos = [random_mixed(3, rng) for _ in range(n)]
    w = random_unitary(3, rng)
    rotated = [MixedState(w @ r.matrix @ w.conj().T) for r in rhos]
    a, b = full_distribution(u, rhos), full_distribution(u, rotated)
    for ports in a:
        assert a[ports] == pytest.approx(b[ports], abs=1e-10)


def test_hermiticity_residue(rng):
    u = random_unitary(5, rng)[:4]
    rhos = [random_mixed(2, rng) for _ in range(4)]
    for ports in itertools.combinations_with_replacement(range(5), 4):
        assert abs(output_probability_complex(u, rhos, ports).imag) < 1e-10


def test_capacity_error():
    u = build_cyclic_rows(CyclicConfig.calibrated(9))
    with pytest.raises(CapacityError):
        output_probability(u, [KET0] * 9, tuple(range(0, 18, 2)))
    with pytest.raises(CapacityError):
        output_probability(np.eye(4)[:3], [KET0] * 3, (0, 1, 2), max_n=2)


def test_invalid_rows_and_ports():
    with pytest.raises(InvalidInterferometerError):
        output_probability([[1, 0], [0.5, 0.5]], [KET0, KET0], (0, 1))
    with pytest.raises(InvalidInputError):
        output_probability(BS, [KET0, KET0], (0, 2))
    with pytest.raises(InvalidInputError):
        output_probability(BS, [KET0, KET0], (0,))
    with pytest.raises(InvalidInputError):
        full_distribution(BS, [KET0, KET0], restrict_to_coincidence=True)
