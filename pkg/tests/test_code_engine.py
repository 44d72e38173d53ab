from __future__ import annotations

import math
from itertools import combinations

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from app.core.code_engine import (
    CodeParams,
    bad_vertices,
    exact_min_code,
    expected_size_estimate,
    is_identification_code,
    randomized_code,
    strong_index,
    strong_index_witness,
)
from app.core.errors import InvalidParameters, InvalidVertex, NotRStrong, TooLargeForExact, TooSmall
from app.core.generators import (
    LemmaParams,
    build_strong_graph,
    complete,
    cycle,
    generate_lemma_graph,
    gnp,
    path,
    petersen,
)
from app.core.graph_core import build_graph, closed_neighborhood, degree_stats, distinguishing_set
from conftest import PROPERTY_SETTINGS, naive_closed, naive_min_count, small_graphs


def naive_bad(G, Z, r):
    Z = set(Z)
    out = set()
    for v in range(G.n):
        if len(naive_closed(G, v) & Z) <= r - 1:
            out.add(v)
            continue
        for w in range(G.n):
            if w != v and len((naive_closed(G, v) - naive_closed(G, w)) & Z) <= r - 1:
                out.add(v)
                break
    return out


class TestStrongIndex:
    def test_known_values(self, c6, k4, pete, c4):
        assert strong_index(c6) == 1
        assert strong_index(c4) == 1
        assert strong_index(k4) == 0
        assert strong_index(pete) == 2

    def test_edgeless_graph(self):
        assert strong_index(build_graph(3, [])) == 1

    def test_too_small(self):
        with pytest.raises(TooSmall):
            strong_index(build_graph(1, []))

    @PROPERTY_SETTINGS
    @given(G=small_graphs())
    def test_matches_brute_force(self, G):
        expected = min(
            len(distinguishing_set(G, v, u)) for v in range(G.n) for u in range(G.n) if u != v
        )
        index, v, u = strong_index_witness(G)
        assert index == expected
        assert len(distinguishing_set(G, v, u)) == expected


class TestVerifier:
    def test_whole_vertex_set_of_c4(self, c4):
        outcome = is_identification_code(c4, {0, 1, 2, 3}, 1)
        assert outcome.valid
        assert outcome.witness is None
        assert outcome.achieved_min == 1

    def test_complete_graph_never_valid(self, k3):
        outcome = is_identification_code(k3, {0, 1, 2}, 1)
        assert not outcome.valid
        assert outcome.achieved_min == 0

    def test_c6_witness(self, c6):
        outcome = is_identification_code(c6, {0, 3}, 1)
        assert not outcome.valid
        assert outcome.witness == (0, 1, 0)
        assert distinguishing_set(c6, 0, 1) == {5}

    def test_witness_attains_the_minimum(self, c6):
        # (0, 1) fails first with one member; (0, 5) has none
        code = {0, 2, 3, 4, 5}
        assert len(distinguishing_set(c6, 0, 1) & code) == 1
        outcome = is_identification_code(c6, code, 2)
        assert outcome.witness == (0, 5, 0)
        assert outcome.witness[2] == outcome.achieved_min

    def test_rejects_out_of_range_member(self, c4):
        with pytest.raises(InvalidVertex):
            is_identification_code(c4, {0, 9}, 1)

    def test_rejects_zero_index(self, c4):
        with pytest.raises(InvalidParameters):
            is_identification_code(c4, {0}, 0)

    @PROPERTY_SETTINGS
    @given(G=small_graphs(min_n=4), data=st.data(), r=st.integers(min_value=1, max_value=2))
    def test_agrees_with_materialized_checker(self, G, data, r):
        C = data.draw(st.sets(st.integers(min_value=0, max_value=G.n - 1)))
        best, pair = naive_min_count(G, C)
        outcome = is_identification_code(G, C, r)
        assert outcome.achieved_min == best
        assert outcome.valid == (best >= r)
        if not outcome.valid:
            assert outcome.witness == (pair[0], pair[1], best)

    @PROPERTY_SETTINGS
    @given(G=small_graphs(min_n=4), data=st.data())
    def test_monotone_in_index_and_superset(self, G, data):
        C = data.draw(st.sets(st.integers(min_value=0, max_value=G.n - 1)))
        extra = data.draw(st.sets(st.integers(min_value=0, max_value=G.n - 1)))
        outcome = is_identification_code(G, C, 2)
        if outcome.valid:
            assert is_identification_code(G, C, 1).valid
        base = is_identification_code(G, C, 1)
        grown = is_identification_code(G, C | extra, 1)
        assert grown.achieved_min >= base.achieved_min

    @PROPERTY_SETTINGS
    @given(G=small_graphs())
    def test_existence_iff_strong(self, G):
        whole = is_identification_code(G, range(G.n), 1)
        assert whole.valid == (strong_index(G) >= 1)


class TestBadVertices:
    def test_full_sample_has_no_bad_vertex(self, pete):
        assert bad_vertices(pete, range(10), 2) == frozenset()

    def test_empty_sample_makes_everything_bad(self, c6):
        assert bad_vertices(c6, set(), 1) == frozenset(range(6))

    def test_c6_condition_b(self, c6):
        assert 0 in bad_vertices(c6, {0, 3}, 1)

    @PROPERTY_SETTINGS
    @given(G=small_graphs(), data=st.data(), r=st.integers(min_value=1, max_value=3))
    def test_radius_two_restriction_is_exact(self, G, data, r):
        Z = data.draw(st.sets(st.integers(min_value=0, max_value=G.n - 1)))
        assert bad_vertices(G, Z, r) == naive_bad(G, Z, r)


class TestRandomizedCode:
    def test_q_one_takes_everything(self, pete):
        result = randomized_code(pete, CodeParams(r=2, d=1), q=1.0, seed=11)
        assert result.sampled == frozenset(range(10))
        assert result.bad == frozenset()
        assert result.code == frozenset(range(10))

    def test_q_zero_marks_every_vertex_bad(self, c4):
        result = randomized_code(c4, CodeParams(r=1, d=1), q=0.0, seed=5)
        assert result.sampled == frozenset()
        assert result.bad == frozenset(range(4))
        assert result.code == frozenset(range(4))

    def test_not_r_strong(self, k4):
        with pytest.raises(NotRStrong) as info:
            randomized_code(k4, CodeParams(r=1), seed=1)
        assert info.value.achieved == 0

    def test_default_q_is_recorded(self, c6):
        result = randomized_code(c6, CodeParams(r=1, d=1), seed=3)
        assert result.q_used == pytest.approx(1.0 - 1.0 / 108.0, rel=1e-12)

    def test_q_is_clamped(self, c6):
        assert randomized_code(c6, CodeParams(r=1), q=1.7, seed=3).q_used == 1.0

    @pytest.mark.parametrize("q", [float("nan"), float("inf"), float("-inf")])
    def test_non_finite_q(self, c6, q):
        with pytest.raises(InvalidParameters):
            randomized_code(c6, CodeParams(r=1), q=q, seed=1)

    def test_strength_check_can_be_skipped(self, k4):
        result = randomized_code(k4, CodeParams(r=1), q=0.5, seed=1, check_strength=False)
        assert result.code <= frozenset(range(4))

    def test_deterministic(self, pete):
        a = randomized_code(pete, CodeParams(r=1, d=1), q=0.4, seed=2024)
        b = randomized_code(pete, CodeParams(r=1, d=1), q=0.4, seed=2024)
        assert a == b
        assert a.to_dict() == b.to_dict()

    def test_result_structure(self, pete):
        result = randomized_code(pete, CodeParams(r=1, d=1), q=0.3, seed=77)
        closure = set()
        for v in result.bad:
            closure |= closed_neighborhood(pete, v)
        assert result.bad_closure == closure
        assert result.code == result.sampled | result.bad_closure
        assert len(result.code) <= pete.n

    def test_invalid_params(self):
        with pytest.raises(InvalidParameters):
            CodeParams(r=0)
        with pytest.raises(InvalidParameters):
            CodeParams(r=1, d=0)

    @PROPERTY_SETTINGS
    @given(
        G=small_graphs(min_n=4),
        q=st.floats(min_value=0.0, max_value=1.0),
        seed=st.integers(min_value=0, max_value=2**64 - 1),
        r=st.integers(min_value=1, max_value=2),
    )
    def test_output_always_verifies(self, G, q, seed, r):
        assume(strong_index(G) >= r)
        result = randomized_code(G, CodeParams(r=r, d=1), q=q, seed=seed)
        assert is_identification_code(G, result.code, r).valid


class TestExactMinCode:
    def test_complete_graph_infeasible(self, k3):
        assert exact_min_code(k3, 1) is None

    def test_c4_needs_every_vertex(self, c4):
        assert exact_min_code(c4, 1) == (4, frozenset({0, 1, 2, 3}))

    def test_c6(self, c6):
        size, code = exact_min_code(c6, 1)
        assert size >= 2
        assert is_identification_code(c6, code, 1).valid

    def test_size_cap(self, c4):
        assert exact_min_code(c4, 1, size_cap=3) is None

    def test_limit(self):
        with pytest.raises(TooLargeForExact):
            exact_min_code(cycle(30), 1)

    def test_limit_from_environment(self, monkeypatch):
        monkeypatch.setenv("STRONGID_EXACT_CAP", "5")
        with pytest.raises(TooLargeForExact):
            exact_min_code(cycle(6), 1)

    def test_petersen_index_two(self, pete):
        size, code = exact_min_code(pete, 2)
        assert is_identification_code(pete, code, 2).valid
        assert size >= math.ceil(10 / 4)

    def test_lower_bound_and_sandwich(self, fixture_suite):
        for name, G in fixture_suite:
            delta = degree_stats(G).delta_max
            found = exact_min_code(G, 1)
            if strong_index(G) < 1:
                assert found is None, name
                continue
            assert found is not None, name
            theta, code = found
            assert theta >= math.ceil(G.n / (delta + 1)), name
            assert is_identification_code(G, code, 1).valid, name
            for seed in range(10):
                assert theta <= len(randomized_code(G, CodeParams(r=1, d=1), seed=seed).code), name

    def test_minimality_on_small_graphs(self):
        # every subset one smaller than the optimum must fail
        G = cycle(7)
        theta, _ = exact_min_code(G, 1)
        assert all(
            not is_identification_code(G, combo, 1).valid
            for combo in combinations(range(G.n), theta - 1)
        )


class TestExpectedSizeEstimate:
    def test_q_one(self, c6):
        assert expected_size_estimate(c6, 1.0, 1) == pytest.approx(6.0)

    def test_grows_as_q_falls_below_one(self, pete):
        assert expected_size_estimate(pete, 0.5, 1) > expected_size_estimate(pete, 0.9, 1)

    def test_paths_are_index_zero(self):
        assert strong_index(path(5)) == 0
        assert strong_index(complete(2)) == 0


@pytest.mark.slow
class TestCodesOnGeneratedGraphs:
    @pytest.mark.parametrize("source", ["chain", "lemma"])
    def test_every_sample_verifies(self, source):
        if source == "chain":
            G, _, _ = build_strong_graph(3000, 2, seed=7)
        else:
            G, _ = generate_lemma_graph(LemmaParams.from_size(1441, 3), seed=7)
        index = strong_index(G)
        for r in (1, 2):
            params = CodeParams(r=r, d=1)
            assert index >= r + params.d + 1
            for q in (None, 0.3, 0.7):
                for seed in range(5):
                    result = randomized_code(G, params, q=q, seed=seed, check_strength=False)
                    assert is_identification_code(G, result.code, r).valid


@pytest.mark.slow
@settings(
    max_examples=1000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
@given(
    n=st.integers(min_value=4, max_value=12),
    p=st.sampled_from([0.2, 0.5, 0.8]),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    data=st.data(),
    r=st.integers(min_value=1, max_value=2),
)
def test_verifier_matches_materialized_sets_on_random_graphs(n, p, seed, data, r):
    G = gnp(n, p, seed)
    C = data.draw(st.sets(st.integers(min_value=0, max_value=n - 1)))
    best, pair = naive_min_count(G, C)
    outcome = is_identification_code(G, C, r)
    assert outcome.achieved_min == best
    assert outcome.valid == (best >= r)
    if not outcome.valid:
        assert outcome.witness == (pair[0], pair[1], best)
