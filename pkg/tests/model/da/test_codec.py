"""
Test: model/da/codec.py
-----------------------
Game and profile JSON, error locations, payload rounding and the
trajectory stream.
"""

import json
import math

import pytest

from controller.instances import CANONICAL, canonical
from model.da.codec import (
    dumps_payload,
    game_hash,
    game_to_dict,
    load_game,
    load_profile,
    save_game,
    save_profile,
    to_jsonable,
    trajectory_lines,
)
from model.entity.profile import Profile
from model.entity.results import RoundRecord, TerminalKind, TerminalVerdict, Trajectory
from model.tools.errors import ParseError


def _game_json(edges, nodes=None):
    nodes = nodes if nodes is not None else [{"id": "u", "budget": 1}, {"id": "v", "budget": 1}]
    return json.dumps({"nodes": nodes, "edges": edges})


@pytest.mark.parametrize("name", CANONICAL)
def test_canonical_games_survive_save_and_load(name):
    game, _ = canonical(name)
    saved = save_game(game)
    loaded = load_game(saved)
    assert loaded == game
    assert save_game(loaded) == saved


def test_save_is_byte_stable():
    game, _ = canonical("triangle-noeq")
    assert save_game(game) == save_game(canonical("triangle-noeq")[0])
    assert game_hash(game) == game_hash(load_game(save_game(game)))


def test_nested_scalar_functions_parse():
    text = _game_json(
        [
            {
                "id": "e1",
                "u": "u",
                "v": "v",
                "reward": {
                    "type": "min_effort",
                    "h": {
                        "kind": "truncated",
                        "at": 1.5,
                        "inner": {"kind": "piecewise_linear", "points": [[0, 0], [1, 3], [2, 4]]},
                    },
                },
            }
        ]
    )
    game = load_game(text)
    h = game.edge("e1").reward.h
    assert h.at == 1.5
    assert h(5) == pytest.approx(3.5)


@pytest.mark.parametrize(
    "text, location",
    [
        ("{", "game line 1"),
        (json.dumps({"nodes": []}), "$"),
        (_game_json([], nodes=[{"id": "u", "budget": -1}]), "nodes[0].budget"),
        (_game_json([], nodes=[{"id": "u", "budget": "1"}]), "nodes[0].budget"),
        (
            _game_json([], nodes=[{"id": "u", "budget": 1}, {"id": "u", "budget": 1}]),
            "nodes[1].id",
        ),
        (
            _game_json([{"id": "e1", "u": "u", "v": "q", "reward": {"type": "weighted_sum", "c": 1}}]),
            "edges[0].v",
        ),
        (
            _game_json([{"id": "e1", "u": "u", "v": "v", "reward": {"type": "weighted_sum", "c": 0}}]),
            "edges[0].reward",
        ),
        (
            _game_json([{"id": "e1", "u": "u", "v": "v", "reward": {"type": "xor"}}]),
            "edges[0].reward.type",
        ),
        (
            _game_json(
                [
                    {
                        "id": "e1",
                        "u": "u",
                        "v": "v",
                        "reward": {"type": "max_effort", "h": {"kind": "power", "a": 1}},
                    }
                ]
            ),
            "edges[0].reward.h",
        ),
        (
            _game_json(
                [
                    {"id": "e1", "u": "u", "v": "v", "reward": {"type": "weighted_sum", "c": 1}},
                    {"id": "e2", "u": "v", "v": "u", "reward": {"type": "weighted_sum", "c": 1}},
                ]
            ),
            "edges[1]",
        ),
        (
            _game_json(
                [
                    {
                        "id": "e1",
                        "u": "u",
                        "v": "v",
                        "reward": {
                            "type": "min_effort",
                            "h": {"kind": "piecewise_linear", "points": [[0, 0], [1, 2], [2, 1]]},
                        },
                    }
                ]
            ),
            "edges[0].reward.h.points",
        ),
    ],
)
def test_parse_errors_name_the_location(text, location):
    with pytest.raises(ParseError) as info:
        load_game(text)
    assert info.value.location == location


def test_profile_codec():
    game, start = canonical("triangle-noeq")
    assert load_profile(save_profile(start), game) == start
    with pytest.raises(ParseError, match="not incident"):
        load_profile('{"u1": {"e2": 1}}', game)
    with pytest.raises(ParseError, match="unknown node"):
        load_profile('{"q": {"e1": 1}}', game)
    with pytest.raises(ParseError, match="negative effort"):
        load_profile('{"u1": {"e1": -1}}', game)
    # without a game only the shape is checked
    assert load_profile('{"q": {"x": 2}}').effort("q", "x") == 2.0


def test_to_jsonable():
    assert to_jsonable(1 / 3) == 0.333333333333
    assert to_jsonable(math.inf) == "inf"
    assert to_jsonable(-math.inf) == "-inf"
    assert to_jsonable((1, True, None)) == [1, True, None]
    assert to_jsonable(Profile({"u": {"e1": 2.0}})) == {"u": {"e1": 2.0}}
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_dumps_payload_sorts_keys():
    assert dumps_payload({"b": 1, "a": 2.0}) == '{"a": 2.0, "b": 1}'


def test_trajectory_lines():
    trajectory = Trajectory(seed=1, mode="random", rng="mt19937", game_hash="ab" * 32)
    trajectory.rounds.append(RoundRecord(1, (("u", "v"),), ("bilateral-BR",), {"u": 1.0}, "f"))
    trajectory.verdict = TerminalVerdict(TerminalKind.CYCLE, 1, period=1, first_visit=0)
    trajectory.certified = None
    lines = [json.loads(line) for line in trajectory_lines(trajectory)]
    assert [line["type"] for line in lines] == ["header", "round", "verdict"]
    assert lines[1]["units"] == [["u", "v"]]
    assert lines[2]["verdict"] == "CycleDetected"
    assert lines[2]["period"] == 1


def test_game_to_dict_keeps_input_order():
    game, _ = canonical("min-noeq")
    assert [n["id"] for n in game_to_dict(game)["nodes"]] == ["u", "v", "w", "z"]


if __name__ == "__main__":
    pytest.main([__file__])
