"""Network topologies, timing parameters and the timing dependency matrix."""

import random

import pytest

from tropical_ca.errors import NetworkError
from tropical_ca.network import (
    NetworkSpec,
    TimingParameters,
    build_p,
    explicit_network,
    load_network,
    network_from_json_dict,
    network_to_json_dict,
    random_parameters,
    regular_ring,
    save_network,
    transmission_matrix,
    validate_timing,
)
from tropical_ca.semiring import EPS, is_eps
from tropical_ca.spectral import is_irreducible, max_cycle_mean


# -- topology ----------------------------------------------------------------


def test_ring_20_3_neighbourhoods():
    spec = regular_ring(20, 3)
    for i in range(20):
        assert spec.predecessors(i) == ((i - 1) % 20, i, (i + 1) % 20)
        assert spec.in_degree(i) == 3
    assert spec.is_three_ring()


def test_ring_n1_isolated_self_loops():
    spec = regular_ring(4, 1)
    assert spec.arcs == ((0, 0), (1, 1), (2, 2), (3, 3))


def test_ring_full_neighbourhood():
    spec = regular_ring(5, 5)
    assert len(spec.arcs) == 25
    assert not spec.is_three_ring()


def test_ring_rejects_bad_n():
    with pytest.raises(NetworkError):
        regular_ring(10, 4)
    with pytest.raises(NetworkError):
        regular_ring(3, 5)
    with pytest.raises(NetworkError):
        regular_ring(0, 1)


def test_explicit_network_validation():
    spec = explicit_network(3, [(0, 1), (1, 2), (2, 0)])
    assert spec.predecessors(1) == (0,)
    with pytest.raises(NetworkError):
        explicit_network(2, [(0, 5)])
    with pytest.raises(NetworkError):
        NetworkSpec(2, ((0, 1), (0, 1)))


# -- building P --------------------------------------------------------------------


def test_build_p_single_cell():
    spec = regular_ring(1, 1)
    params = TimingParameters.create((4,), {(0, 0): 2})
    P = build_p(spec, params).matrix
    assert P.entries == ((6,),)


def test_build_p_two_route_consistency():
    rng = random.Random(9)
    for _ in range(10):
        size = rng.randint(2, 8)
        spec = regular_ring(size, 3) if size >= 3 else regular_ring(size, 1)
        params = random_parameters(spec, rng.randint(0, 999), (1, 30), (1, 10))
        P = build_p(spec, params).matrix
        tau = params.tau
        arcs = set(spec.arcs)
        for i in range(size):
            for j in range(size):
                if (j, i) in arcs:
                    assert P[i, j] == params.xi[i] + tau[(i, j)]
                else:
                    assert is_eps(P[i, j])


def test_build_p_equals_diagonal_times_t():
    spec = regular_ring(6, 3)
    params = random_parameters(spec, 77, (1, 30), (1, 10))
    from tropical_ca.semiring import MaxPlusMatrix

    T = transmission_matrix(spec, params)
    assert build_p(spec, params).matrix == MaxPlusMatrix.diagonal(params.xi) @ T


def test_ring_p_irreducible():
    spec = regular_ring(10, 3)
    P = build_p(spec, random_parameters(spec, 4, (1, 30), (1, 10))).matrix
    assert is_irreducible(P)


def test_self_loop_lower_bound_on_eigenvalue():
    spec = regular_ring(8, 3)
    params = random_parameters(spec, 15, (1, 30), (1, 10))
    P = build_p(spec, params).matrix
    tau = params.tau
    best_loop = max(params.xi[i] + tau[(i, i)] for i in range(8))
    assert max_cycle_mean(P) >= best_loop


# -- timing validation ---------------------------------------------------------------


def test_validate_timing_errors():
    spec = regular_ring(3, 3)
    good = random_parameters(spec, 1, (1, 5), (0, 5))
    validate_timing(spec, good)

    short = TimingParameters.create((1, 1), good.tau)
    with pytest.raises(NetworkError):
        validate_timing(spec, short)

    with pytest.raises(NetworkError):
        validate_timing(spec, TimingParameters.create((0, 1, 1), good.tau))

    missing = dict(good.tau)
    missing.pop((0, 0))
    with pytest.raises(NetworkError):
        validate_timing(spec, TimingParameters.create(good.xi, missing))

    negative = dict(good.tau)
    negative[(0, 0)] = -1
    with pytest.raises(NetworkError):
        validate_timing(spec, TimingParameters.create(good.xi, negative))


def test_validate_timing_rejects_tau_off_arc():
    # Cell 0 never reads cell 1, so tau keyed (0, 1) has no arc to live on.
    line = explicit_network(2, [(0, 0), (1, 1), (0, 1)])
    tau = {(0, 0): 1, (1, 1): 1, (1, 0): 1, (0, 1): 9}
    with pytest.raises(NetworkError):
        validate_timing(line, TimingParameters.create((1, 1), tau))


# -- random parameters -----------------------------------------------------------------


def test_random_parameters_deterministic():
    spec = regular_ring(10, 3)
    a = random_parameters(spec, 42, (1, 30), (1, 10))
    b = random_parameters(spec, 42, (1, 30), (1, 10))
    assert a == b
    c = random_parameters(spec, 43, (1, 30), (1, 10))
    assert a != c


def test_random_parameters_degenerate_ranges():
    spec = regular_ring(5, 3)
    params = random_parameters(spec, 0, (5, 5), (2, 2))
    assert params.xi == (5,) * 5
    assert all(v == 2 for v in params.tau.values())


def test_random_parameters_within_ranges():
    spec = regular_ring(10, 3)
    params = random_parameters(spec, 8, (1, 30), (1, 10))
    assert all(1 <= x <= 30 for x in params.xi)
    assert all(1 <= v <= 10 for v in params.tau.values())
    assert set(params.tau) == {(i, j) for (j, i) in spec.arcs}


def test_random_parameters_bad_ranges():
    spec = regular_ring(3, 3)
    with pytest.raises(NetworkError):
        random_parameters(spec, 1, (5, 4), (1, 2))
    with pytest.raises(NetworkError):
        random_parameters(spec, 1, (0, 4), (1, 2))
    with pytest.raises(NetworkError):
        random_parameters(spec, 1, (1, 4), (-1, 2))
    with pytest.raises(NetworkError):
        random_parameters(spec, 1, (1.0, 4), (1, 2))


# -- file round trips ------------------------------------------------------------------


def test_save_load_round_trip_regular(tmp_path):
    spec = regular_ring(6, 3)
    params = random_parameters(spec, 5, (1, 30), (1, 10))
    path = tmp_path / "net.json"
    save_network(path, spec, params)
    spec2, params2 = load_network(path)
    assert spec2 == spec and params2 == params


def test_save_load_round_trip_explicit(tmp_path):
    spec = explicit_network(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0)])
    tau = {(i, j): 3 for (j, i) in spec.arcs}
    params = TimingParameters.create((2, 4, 6), tau)
    path = tmp_path / "net.json"
    save_network(path, spec, params)
    spec2, params2 = load_network(path)
    assert spec2.arcs == spec.arcs and spec2.regular_n is None
    assert params2 == params


def test_load_rejects_tau_on_non_arc():
    doc = {
        "N": 2,
        "topology": {"arcs": [[1, 1], [2, 2], [1, 2]]},
        "xi": [1, 1],
        "tau": [[1, 1, 1], [2, 2, 1], [1, 2, 1], [2, 1, 5]],
    }
    with pytest.raises(NetworkError):
        network_from_json_dict(doc)


def test_load_tau_matrix_with_eps():
    doc = {
        "N": 2,
        "xi": [2, 3],
        "tau_matrix": {
            "rows": 2,
            "cols": 2,
            "entries": [[1, "eps"], [4, 5]],
        },
    }
    spec, params = network_from_json_dict(doc)
    assert spec.arcs == ((0, 0), (0, 1), (1, 1))
    P = build_p(spec, params).matrix
    assert P.entries == ((3, EPS), (7, 8))


def test_load_missing_fields():
    with pytest.raises(NetworkError):
        network_from_json_dict({"topology": {"regular": {"n": 3}}})
    with pytest.raises(NetworkError):
        network_from_json_dict({"N": 3})
    with pytest.raises(NetworkError):
        network_from_json_dict(
            {"N": 3, "topology": {"regular": {"n": 3}}, "xi": [1, 1, 1]}
        )


def test_json_dict_is_one_based():
    spec = explicit_network(2, [(0, 1), (1, 0)])
    params = TimingParameters.create((1, 2), {(1, 0): 3, (0, 1): 4})
    doc = network_to_json_dict(spec, params)
    assert doc["topology"]["arcs"] == [[1, 2], [2, 1]]
    assert sorted(doc["tau"]) == [[1, 2, 3], [2, 1, 4]]


def test_load_network_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(NetworkError):
        load_network(path)


def test_ring_strong_connectivity_n3_and_up():
    # Radius >= 1 keeps the ring strongly connected; n = 1 with N > 1
    # degenerates to isolated self-loops and is reducible.
    for size in (3, 4, 7, 12):
        spec = regular_ring(size, 3)
        params = random_parameters(spec, 2, (1, 5), (0, 3))
        assert is_irreducible(build_p(spec, params).matrix)
    lonely = regular_ring(1, 1)
    params = random_parameters(lonely, 2, (1, 5), (0, 3))
    assert is_irreducible(build_p(lonely, params).matrix)
    split = regular_ring(2, 1)
    params = random_parameters(split, 2, (1, 5), (0, 3))
    assert not is_irreducible(build_p(split, params).matrix)
