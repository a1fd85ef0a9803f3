import logging
import random

import networkx as nx

from consensus_game import Color, ConsensusGame

logger = logging.getLogger(__name__)

FAMILIES = ("gnp", "bipartite")
COLORINGS = ("random", "planted")


class GraphGen():
    """Seeded random consensus instances for oracle comparisons and property tests."""

    def __init__(self, seed=1337):
        self.seed = seed
        self.random = random.Random(seed)
        self.graph = nx.Graph()

    def _next_seed(self):
        return self.random.randrange(2 ** 31)

    def gen_gnp(self, n, p):
        # Erdos-Renyi graph on 0..n-1
        self.graph = nx.gnp_random_graph(n, p, seed=self._next_seed())
        return self.graph

    def gen_bipartite(self, n1, n2, p):
        # random bipartite graph, left side 0..n1-1
        graph = nx.bipartite.random_graph(n1, n2, p, seed=self._next_seed())
        self.graph = nx.Graph(graph.edges())
        self.graph.add_nodes_from(range(n1 + n2))
        return self.graph

    def random_coloring(self, p_red=0.5):
        return [Color.RED if self.random.random() < p_red else Color.WHITE for _ in range(len(self.graph))]

    def planted_coloring(self, flips=1):
        """
        Monochromatic except for a few flipped vertices, so the start has few bad edges.
        :param flips: Number of Red vertices.
        """
        colors = [Color.WHITE] * len(self.graph)
        for v in self.random.sample(range(len(colors)), min(flips, len(colors))):
            colors[v] = Color.RED
        return colors

    def coloring(self, kind="random", **kwargs):
        if kind == "random":
            return self.random_coloring(**kwargs)
        if kind == "planted":
            return self.planted_coloring(**kwargs)
        raise ValueError("unknown coloring {!r}, expected one of {}".format(kind, COLORINGS))

    def to_game(self, colors):
        return ConsensusGame.from_networkx(self.graph, colors)

    def gen_game(self, family, n, p, coloring="random", **kwargs):
        """
        :param family: "gnp" on n vertices or "bipartite" with sides n//2 and n - n//2.
        :param n: Number of vertices.
        :param p: Edge probability.
        :param coloring: "random" or "planted".
        :return game: ConsensusGame.
        """
        if family == "gnp":
            self.gen_gnp(n, p)
        elif family == "bipartite":
            self.gen_bipartite(n // 2, n - n // 2, p)
        else:
            raise ValueError("unknown family {!r}, expected one of {}".format(family, FAMILIES))
        game = self.to_game(self.coloring(coloring, **kwargs))
        logger.debug("generated %s instance: %r", family, game)
        return game
