"""Consensus game state: two-colored simple graph with incrementally maintained costs."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import IntEnum

import networkx as nx
import numpy as np

from utils.errors import InvalidInstance
from utils.utils import read_json, write_json

logger = logging.getLogger(__name__)


class Color(IntEnum):
    """Party of a player. Stored as 0/1 in the color array."""
    WHITE = 0
    RED = 1

    def complement(self):
        return Color(1 - self)

    @property
    def symbol(self):
        return "W" if self == Color.WHITE else "R"

    @staticmethod
    def from_symbol(symbol):
        try:
            return {"W": Color.WHITE, "R": Color.RED}[symbol]
        except KeyError:
            raise InvalidInstance("unknown color symbol {!r}".format(symbol))


@dataclass(frozen=True)
class MoveRecord:
    """One switch, with the mover's bad (b) and good (g) degree at switch time."""
    step: int
    vertex: int
    before: Color
    after: Color
    b: int
    g: int
    bad_edges_after: int

    @property
    def delta_bad_edges(self):
        return self.g - self.b

    @property
    def degree(self):
        return self.b + self.g


def _colors_array(colors, n):
    if isinstance(colors, str):
        values = [Color.from_symbol(c) for c in colors]
    else:
        try:
            values = [Color(int(c)) for c in colors]
        except ValueError:
            raise InvalidInstance("colors must be 0/1 or Color values")
    if len(values) != n:
        raise InvalidInstance("expected {} colors, got {}".format(n, len(values)))
    return np.array(values, dtype=np.int8)


class ConsensusGame:
    """
    Graph in compact adjacency form (offsets + neighbor array) with a coloring.
    bad_degree[v] is the cost of player v; bad_edges the social cost.
    """

    def __init__(self, n, offsets, neighbors, colors):
        """
        :param n: Number of vertices, ids 0..n-1.
        :param offsets: int array of length n+1; neighbors of v are neighbors[offsets[v]:offsets[v+1]].
        :param neighbors: int array of neighbor ids, each undirected edge stored twice.
        :param colors: int8 array of Color values.
        """
        self.n = n
        self.offsets = offsets
        self.neighbors = neighbors
        self.colors = colors
        self.degree = np.diff(offsets).astype(np.int64)
        self.steps = 0
        self.bad_edges, self.bad_degree = self.recount()

    @classmethod
    def from_edges(cls, n, edges, colors):
        n = int(n)
        if n < 0:
            raise InvalidInstance("vertex count must be nonnegative")
        pairs = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64).reshape(-1, 2)
        if len(pairs):
            if pairs.min() < 0 or pairs.max() >= n:
                bad = pairs[(pairs < 0).any(axis=1) | (pairs >= n).any(axis=1)][0]
                raise InvalidInstance("edge ({}, {}) out of range for n={}".format(bad[0], bad[1], n))
            loops = pairs[pairs[:, 0] == pairs[:, 1]]
            if len(loops):
                raise InvalidInstance("self-loop at vertex {}".format(loops[0, 0]))
            canonical = np.sort(pairs, axis=1)
            unique, counts = np.unique(canonical, axis=0, return_counts=True)
            if (counts > 1).any():
                dup = unique[counts > 1][0]
                raise InvalidInstance("duplicate edge ({}, {})".format(dup[0], dup[1]))
        both = np.concatenate([pairs, pairs[:, ::-1]]) if len(pairs) else pairs
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.zeros(0, dtype=np.int64)
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n) if len(both) else np.zeros(n, dtype=np.int64)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        neighbors = both[:, 1].astype(np.int64) if len(both) else np.zeros(0, dtype=np.int64)
        return cls(n, offsets, neighbors, _colors_array(colors, n))

    def copy(self):
        game = ConsensusGame.__new__(ConsensusGame)
        game.n = self.n
        game.offsets = self.offsets
        game.neighbors = self.neighbors
        game.degree = self.degree
        game.colors = self.colors.copy()
        game.bad_degree = self.bad_degree.copy()
        game.bad_edges = self.bad_edges
        game.steps = self.steps
        return game

    def neighbors_of(self, v):
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def check_vertex(self, v):
        if not 0 <= v < self.n:
            raise InvalidInstance("vertex {} out of range for n={}".format(v, self.n))

    def color(self, v):
        return Color(int(self.colors[v]))

    def player_cost(self, v):
        """Number of neighbors with the other color."""
        self.check_vertex(v)
        return int(self.bad_degree[v])

    def good_degree(self, v):
        return int(self.degree[v] - self.bad_degree[v])

    def flip(self, v):
        """
        Switch the color of v in O(deg(v)).
        :param v: Vertex id.
        :return record: MoveRecord of the switch.
        """
        self.check_vertex(v)
        nbrs = self.neighbors_of(v)
        b = int(self.bad_degree[v])
        g = int(self.degree[v]) - b
        before = self.color(v)
        # neighbors that agreed with v now disagree, and vice versa
        same = self.colors[nbrs] == self.colors[v]
        self.bad_degree[nbrs] += np.where(same, 1, -1)
        self.colors[v] = 1 - self.colors[v]
        self.bad_degree[v] = g
        self.bad_edges += g - b
        record = MoveRecord(self.steps, int(v), before, before.complement(), b, g, self.bad_edges)
        self.steps += 1
        return record

    def recount(self):
        """
        Full recomputation from adjacency and colors.
        :return (bad_edges, bad_degree): Social cost and per-vertex cost vector.
        """
        owner = np.repeat(np.arange(self.n), self.degree) if self.n else np.zeros(0, dtype=np.int64)
        disagree = self.colors[owner] != self.colors[self.neighbors]
        bad_degree = np.bincount(owner[disagree], minlength=self.n).astype(np.int64)
        return int(bad_degree.sum()) // 2, bad_degree

    def edge_array(self):
        """Each undirected edge once as (u, v) with u < v, sorted lexicographically."""
        owner = np.repeat(np.arange(self.n), self.degree)
        mask = owner < self.neighbors
        return np.stack([owner[mask], self.neighbors[mask]], axis=1)

    def edges(self):
        return [(int(u), int(v)) for u, v in self.edge_array()]

    @property
    def num_edges(self):
        return int(self.degree.sum()) // 2

    def color_string(self):
        return "".join("R" if c else "W" for c in self.colors)

    def to_json(self):
        return {"n": self.n, "edges": [[u, v] for u, v in self.edges()], "colors": self.color_string()}

    @classmethod
    def from_json(cls, data):
        try:
            return cls.from_edges(data["n"], [tuple(e) for e in data["edges"]], data["colors"])
        except KeyError as missing:
            raise InvalidInstance("instance is missing field {}".format(missing))

    def to_networkx(self):
        graph = nx.Graph()
        graph.add_nodes_from((v, {"color": self.color(v).symbol}) for v in range(self.n))
        graph.add_edges_from(self.edges())
        return graph

    @classmethod
    def from_networkx(cls, graph, colors):
        """Relabels nodes to 0..n-1 in sorted order; colors follows that order."""
        mapping = {node: i for i, node in enumerate(sorted(graph.nodes()))}
        edges = [(mapping[u], mapping[v]) for u, v in graph.edges()]
        return cls.from_edges(len(mapping), edges, colors)

    def __repr__(self):
        return "ConsensusGame(n={}, edges={}, bad_edges={})".format(self.n, self.num_edges, self.bad_edges)


def new_game(edges, colors, n=None):
    """
    Build a game from an edge list and a coloring.
    :param edges: Iterable of (u, v) pairs, simple and undirected.
    :param colors: Sequence of Color (or "W"/"R" string); its length fixes n unless n is given.
    :param n: Optional vertex count.
    :return game: ConsensusGame with consistent cached costs.
    """
    if n is None:
        n = len(colors)
    return ConsensusGame.from_edges(n, edges, colors)


def write_instance(game, path):
    write_json(game.to_json(), path)


def read_instance(path):
    return ConsensusGame.from_json(read_json(path))
