from __future__ import annotations

import random

import networkx as nx
import numpy as np
import pytest

from consensus_game import Color, ConsensusGame, new_game, read_instance, write_instance
from utils.errors import InvalidInstance


def _build_path() -> ConsensusGame:
    """Path 0-1-2 colored W R W: two bad edges, both at vertex 1."""
    return new_game([(0, 1), (1, 2)], "WRW")


def _build_random(seed: int, n: int = 12, p: float = 0.4) -> ConsensusGame:
    graph = nx.gnp_random_graph(n, p, seed=seed)
    rng = random.Random(seed)
    colors = [rng.choice([Color.WHITE, Color.RED]) for _ in range(n)]
    return ConsensusGame.from_networkx(graph, colors)


def test_costs_are_counted_at_construction() -> None:
    """
    Claim: player costs and the social cost are set from the coloring.
    """
    game = _build_path()
    assert game.bad_edges == 2
    assert [game.player_cost(v) for v in range(3)] == [1, 2, 1]
    assert [game.good_degree(v) for v in range(3)] == [0, 0, 0]


def test_flip_updates_costs_incrementally() -> None:
    """
    Claim: a flip returns its record and leaves caches equal to a full recount.
    """
    game = _build_path()
    record = game.flip(1)
    assert (record.vertex, record.b, record.g, record.before, record.after) == (1, 2, 0, Color.RED, Color.WHITE)
    assert record.delta_bad_edges == -2
    assert game.bad_edges == 0
    bad_edges, bad_degree = game.recount()
    assert bad_edges == game.bad_edges
    assert np.array_equal(bad_degree, game.bad_degree)


def test_random_flips_keep_caches_consistent() -> None:
    """
    Claim: after ten thousand arbitrary flips on one graph, cached costs equal direct recomputation.
    """
    game = _build_random(5, n=40, p=0.2)
    rng = random.Random(5)
    for step in range(10_000):
        game.flip(rng.randrange(game.n))
        if step % 1000 == 999:
            bad_edges, bad_degree = game.recount()
            assert bad_edges == game.bad_edges
            assert np.array_equal(bad_degree, game.bad_degree)
    assert 0 <= game.bad_edges <= game.num_edges


@pytest.mark.parametrize("edges, colors", [
    ([(0, 0)], "WR"),
    ([(0, 1), (1, 0)], "WR"),
    ([(0, 5)], "WR"),
    ([(0, 1)], "WRW"),
    ([(0, 1)], "WX"),
])
def test_invalid_instances_are_rejected(edges, colors) -> None:
    """
    Claim: self-loops, duplicate edges, out-of-range ids and bad colorings raise InvalidInstance.
    """
    with pytest.raises(InvalidInstance):
        ConsensusGame.from_edges(2, edges, colors)


def test_flip_rejects_unknown_vertex() -> None:
    """
    Claim: flipping a vertex outside 0..n-1 raises InvalidInstance.
    """
    with pytest.raises(InvalidInstance):
        _build_path().flip(3)


def test_instance_file_preserves_graph_and_coloring(tmp_path) -> None:
    """
    Claim: writing and reading an instance keeps edges, colors and costs.
    """
    game = _build_random(7)
    path = str(tmp_path / "instance.json")
    write_instance(game, path)
    loaded = read_instance(path)
    assert loaded.edges() == game.edges()
    assert loaded.color_string() == game.color_string()
    assert loaded.bad_edges == game.bad_edges


def test_networkx_view_carries_colors() -> None:
    """
    Claim: the networkx view has the same edges and a color attribute per node.
    """
    game = _build_path()
    graph = game.to_networkx()
    assert sorted(graph.edges()) == [(0, 1), (1, 2)]
    assert [graph.nodes[v]["color"] for v in range(3)] == ["W", "R", "W"]


def test_copy_is_independent() -> None:
    """
    Claim: flipping a copy leaves the original untouched.
    """
    game = _build_path()
    clone = game.copy()
    clone.flip(1)
    assert game.bad_edges == 2
    assert game.color(1) == Color.RED


def test_small_instances() -> None:
    """
    Claim: a bicolored edge has 1 bad edge, a White triangle none, and K_{2,2} across colors 4.
    """
    assert new_game([(0, 1)], "WR").bad_edges == 1
    assert new_game([(0, 1), (1, 2), (2, 0)], "WWW").bad_edges == 0
    assert new_game([(0, 2), (0, 3), (1, 2), (1, 3)], "WWRR").bad_edges == 4


def test_isolated_vertex_flip() -> None:
    """
    Claim: flipping a vertex without neighbors changes nothing but its color.
    """
    game = new_game([(0, 1)], "WRW")
    assert game.flip(2).delta_bad_edges == 0
    assert game.bad_edges == 1
    assert game.color(2) == Color.RED


def test_double_flip_restores_state() -> None:
    """
    Claim: flipping the same vertex twice restores colors and costs exactly.
    """
    game = _build_random(3)
    colors, bad_degree, bad_edges = game.colors.copy(), game.bad_degree.copy(), game.bad_edges
    for v in range(game.n):
        game.flip(v)
        game.flip(v)
    assert np.array_equal(game.colors, colors)
    assert np.array_equal(game.bad_degree, bad_degree)
    assert game.bad_edges == bad_edges
