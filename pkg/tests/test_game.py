import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commitment_lab import (
    JointDistribution,
    NormalFormGame,
    build_congestion,
    build_matching_pennies,
    build_stop_light,
    expected_payoff,
    payoff,
)
from commitment_lab.game import GameError, InvalidProfileError
from oracles import STOP_LIGHT_TABLE, stop_light_outcomes


def test_stop_light_reproduces_table(stop_light):
    assert stop_light.n_actions == (3, 3)
    assert stop_light.action_labels[0] == ("Fast", "Caution", "Stop")
    for prof, expected in STOP_LIGHT_TABLE.items():
        got = payoff(stop_light, prof)
        assert got == expected
        assert all(isinstance(x, F) for x in got)


@pytest.mark.parametrize(
    "labels, expected",
    [(("Fast", "Stop"), (7, 2)), (("Fast", "Fast"), (0, 0)), (("Stop", "Stop"), (4, 4)), (("Caution", "Caution"), (F(21, 10),) * 2)],
)
def test_stop_light_entries(stop_light, labels, expected):
    assert payoff(stop_light, stop_light.profile(*labels)) == expected


def test_stop_light_symmetric(stop_light):
    for a, b in itertools.product(range(3), repeat=2):
        assert payoff(stop_light, (a, b))[0] == payoff(stop_light, (b, a))[1]


def test_matching_pennies(pennies):
    assert payoff(pennies, pennies.profile("Heads", "Heads")) == (1, -1)
    assert payoff(pennies, pennies.profile("Heads", "Tails")) == (-1, 1)
    assert payoff(pennies, pennies.profile("Tails", "Tails")) == (1, -1)
    for p in pennies.profiles():
        assert sum(payoff(pennies, p)) == 0


def test_payoff_is_pure(stop_light):
    assert payoff(stop_light, (1, 2)) == payoff(stop_light, (1, 2))
    assert payoff(stop_light, (1, 2)) is not None


@pytest.mark.parametrize("bad", [(3, 0), (0, -1), (0,), (0, 0, 0), (0.5, 1)])
def test_invalid_profile(stop_light, bad):
    with pytest.raises(InvalidProfileError):
        payoff(stop_light, bad)


def test_expected_payoff_stop_light_device(stop_light):
    dist = JointDistribution(stop_light_outcomes())
    assert expected_payoff(stop_light, dist, 0) == F(13, 3)
    assert expected_payoff(stop_light, dist, 1) == F(13, 3)


def test_expected_payoff_point_mass(stop_light):
    for p in stop_light.profiles():
        for i in range(2):
            assert expected_payoff(stop_light, JointDistribution.point_mass(p), i) == STOP_LIGHT_TABLE[p][i]


def test_expected_payoff_bad_player(stop_light):
    with pytest.raises(GameError):
        expected_payoff(stop_light, JointDistribution.point_mass((0, 0)), 2)


def test_congestion_examples():
    g = build_congestion(2, [(1, 0), (1, 0)])
    assert payoff(g, (0, 1)) == (-1, -1)
    assert payoff(g, (0, 0)) == (-2, -2)
    one = build_congestion(1, [(0, 5)])
    assert payoff(one, (0,)) == (-5,)


def test_congestion_errors():
    with pytest.raises(GameError):
        build_congestion(2, [])
    with pytest.raises(GameError):
        build_congestion(2, [(-1, 0)])


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 4),
    routes=st.lists(st.tuples(st.integers(0, 5), st.integers(-3, 3)), min_size=1, max_size=3),
    data=st.data(),
)
def test_congestion_anonymous(n, routes, data):
    g = build_congestion(n, routes)
    prof = tuple(data.draw(st.integers(0, len(routes) - 1)) for _ in range(n))
    i, j = data.draw(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)))
    swapped = list(prof)
    swapped[i], swapped[j] = swapped[j], swapped[i]
    u, v = payoff(g, prof), payoff(g, tuple(swapped))
    assert v[i] == u[j] and v[j] == u[i]


def test_json_roundtrip(stop_light):
    doc = stop_light.to_dict()
    assert doc["payoffs"][1][1] == ["21/10", "21/10"]
    back = NormalFormGame.from_json(stop_light.to_json())
    assert back == stop_light
    assert back.action_labels == stop_light.action_labels


def test_json_rejects_bad_documents():
    with pytest.raises(GameError):
        NormalFormGame.from_dict({"actions": [["a"]], "payoffs": [["1"]], "extra": 1})
    with pytest.raises(GameError):
        NormalFormGame.from_dict({"players": 1, "actions": [["a", "b"]], "payoffs": [["1"]]})


def test_labels_validated():
    with pytest.raises(GameError):
        NormalFormGame((("a", "a"),), np.array([[1], [2]], dtype=object))
    with pytest.raises(GameError):
        NormalFormGame(((),), np.empty((0, 1), dtype=object))


def test_game_is_immutable(stop_light):
    with pytest.raises(ValueError):
        stop_light.payoffs[0, 0, 0] = F(9)
    with pytest.raises(AttributeError):
        stop_light.name = "x"


def test_float_payoffs_match(stop_light):
    assert stop_light.float_payoffs[1, 1, 0] == 2.1
    assert stop_light.float_payoffs.shape == (3, 3, 2)


def test_distribution_validation():
    with pytest.raises(GameError):
        JointDistribution({(0, 0): F(1, 2)})
    with pytest.raises(GameError):
        JointDistribution({(0, 0): F(3, 2), (1, 1): F(-1, 2)})
    d = JointDistribution({(0, 0): 0.5, (1, 1): 0.5 + 1e-13})
    assert not d.is_exact
    merged = JointDistribution([((0, 0), F(1, 2)), ((0, 0), F(1, 2))])
    assert merged == JointDistribution.point_mass((0, 0))


def test_builtins_are_fresh():
    assert build_matching_pennies() == build_matching_pennies()
    assert build_stop_light() != build_matching_pennies()
