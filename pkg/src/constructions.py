"""
Instances with their adversarial schedules: the layered lower-bound instance
(initializer, parallel white layer, secondary layers, boosting layers) and the
doubling gadgets.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from consensus_game import Color, ConsensusGame
from dynamics import UncertaintyRule
from utils.errors import BudgetExceeded, InstanceTooSmall, InvalidInstance, MTooSmall
from utils.utils import format_fraction, parse_fraction, read_json, write_json

logger = logging.getLogger(__name__)

C_GRID = tuple(Fraction(1, 2 ** i) for i in range(1, 31))


class Role(Enum):
    INITIALIZER = "initializer"
    PARALLEL_WHITE = "parallel-white"
    SECONDARY = "secondary"
    BOOST = "boost"


class Wiring(Enum):
    """How a layer is joined to the next one in the chain."""
    COMPLETE = "complete"
    REGULAR = "regular"
    NONE = "none"


@dataclass(frozen=True)
class LayerSpec:
    """
    A block of consecutive vertex ids. REGULAR wiring only follows layers of size 2k;
    every vertex of the next layer then has exactly k neighbors here.
    The parallel white layer is COMPLETE to the last initializer layer.
    """
    index: int
    size: int
    role: Role
    wiring: Wiring
    start: int

    @property
    def vertices(self):
        return range(self.start, self.start + self.size)

    @property
    def stop(self):
        return self.start + self.size

    def to_json(self):
        return {"size": self.size, "role": self.role.value, "wiring": self.wiring.value}


@dataclass
class ConstructionPlan:
    k: int
    eps: Fraction
    n: int
    c: Fraction
    layers: list
    phase1: list = field(default_factory=list)
    phase2: list = field(default_factory=list)

    @property
    def predicted_initial_bad_edges(self):
        return self.k

    @property
    def vertex_count(self):
        return sum(layer.size for layer in self.layers)

    @property
    def chain(self):
        return [layer for layer in self.layers if layer.role is not Role.PARALLEL_WHITE]

    def layers_with_role(self, role):
        return [layer for layer in self.layers if layer.role is role]

    @property
    def boost_sizes(self):
        return [layer.size for layer in self.layers_with_role(Role.BOOST)]

    @property
    def free_layer(self):
        """Last initializer layer; it doubles as the first secondary layer."""
        return self.layers_with_role(Role.INITIALIZER)[-1]

    @property
    def frozen(self):
        frozen_layers = self.layers_with_role(Role.INITIALIZER)[:-1] + self.layers_with_role(Role.PARALLEL_WHITE)
        return sorted(v for layer in frozen_layers for v in layer.vertices)

    def edge_array(self):
        chain = self.chain
        parts = [_wire(left, right, left.wiring, self.k) for left, right in zip(chain, chain[1:])]
        parts += [_wire(p, self.free_layer, Wiring.COMPLETE, self.k) for p in self.layers_with_role(Role.PARALLEL_WHITE)]
        return np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)

    def initial_colors(self):
        colors = np.full(self.vertex_count, int(Color.WHITE), dtype=np.int8)
        first = self.chain[0]
        colors[first.start:first.stop] = int(Color.RED)
        return colors

    def game(self):
        return ConsensusGame.from_edges(self.vertex_count, self.edge_array(), self.initial_colors())

    def to_json(self):
        return {"k": self.k,
                "eps": format_fraction(self.eps),
                "n": self.n,
                "c": format_fraction(self.c),
                "layers": [layer.to_json() for layer in self.layers],
                "frozen": self.frozen,
                "predicted_initial_bad_edges": self.predicted_initial_bad_edges,
                "predicted_final_bad_edges": predicted_final_bad_edges(self)}

    @classmethod
    def from_json(cls, data):
        try:
            layers, start = [], 0
            for index, entry in enumerate(data["layers"]):
                layer = LayerSpec(index, int(entry["size"]), Role(entry["role"]), Wiring(entry["wiring"]), start)
                layers.append(layer)
                start = layer.stop
            return cls(int(data["k"]), parse_fraction(data.get("eps", "1/{}".format(data["k"]))),
                       int(data.get("n", start)), parse_fraction(data["c"]), layers)
        except KeyError as missing:
            raise InvalidInstance("plan is missing field {}".format(missing))


def write_plan(plan, path):
    write_json(plan.to_json(), path)


def read_plan(path):
    return ConstructionPlan.from_json(read_json(path))


def _check_k(k):
    if k < 2:
        raise InstanceTooSmall("layer constructions need k >= 2, got {}".format(k))


def _cycling_sizes(k, target):
    """
    Odd positions cycle k, k+1, ..., 2k; even positions start at 1 and double
    (capped at target) after every 2k layer. Stops at an even/odd pair both equal to target.
    """
    sizes, even, odd = [k], 1, k
    while True:
        if odd == 2 * k:
            even = min(2 * even, target)
            odd = k
        else:
            odd += 1
        sizes += [even, odd]
        if even == target and odd == target:
            return sizes


def _layers(sizes, role, k, start, first_index, skip=0, terminal=Wiring.COMPLETE, regular=True):
    layers = []
    for position in range(skip, len(sizes)):
        size = sizes[position]
        if position + 1 == len(sizes):
            wiring = terminal
        elif regular and position % 2 == 0 and size == 2 * k:
            wiring = Wiring.REGULAR
        else:
            wiring = Wiring.COMPLETE
        layers.append(LayerSpec(first_index + len(layers), size, role, wiring, start))
        start += size
    return layers


def _wire(left, right, wiring, k):
    """Edge array between two layers."""
    if wiring is Wiring.REGULAR:
        j = np.repeat(np.arange(right.size), k)
        t = np.tile(np.arange(k), right.size)
        return np.stack([left.start + (j * k + t) % left.size, right.start + j], axis=1)
    u, v = np.meshgrid(np.arange(left.start, left.stop), np.arange(right.start, right.stop), indexing="ij")
    return np.stack([u.ravel(), v.ravel()], axis=1)


def _chain_edges(chain, k):
    parts = [_wire(left, right, left.wiring, k) for left, right in zip(chain, chain[1:])]
    return np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)


def build_initializer(k, start=0, first_index=0):
    """
    Initializer layers followed by the parallel white layer of k vertices
    joined to every vertex of the last initializer layer.
    :param k: Integer 1/eps, at least 2.
    :return (layers, edges): LayerSpecs (parallel layer last) and an edge array.
    """
    _check_k(k)
    layers = _layers(_cycling_sizes(k, k), Role.INITIALIZER, k, start, first_index)
    last = layers[-1]
    parallel = LayerSpec(first_index + len(layers), k, Role.PARALLEL_WHITE, Wiring.COMPLETE, last.stop)
    edges = np.concatenate([_chain_edges(layers, k), _wire(parallel, last, Wiring.COMPLETE, k)])
    return layers + [parallel], edges


def build_secondary(k, shared=None, start=None, first_index=0):
    """
    Secondary layers, ending in a complete 2k by 2k pair.
    :param k: Integer 1/eps, at least 2.
    :param shared: LayerSpec used as the first secondary layer (the last initializer layer).
    :param start: First id for new vertices.
    :param first_index: Index given to the first returned layer.
    :return (layers, edges): New LayerSpecs and an edge array including the edges to shared.
    """
    _check_k(k)
    sizes = _cycling_sizes(k, 2 * k)
    if shared is None:
        layers = _layers(sizes, Role.SECONDARY, k, start or 0, first_index)
        return layers, _chain_edges(layers, k)
    if start is None:
        start = shared.stop
    layers = _layers(sizes, Role.SECONDARY, k, start, first_index, skip=1)
    return layers, _chain_edges([shared] + layers, k)


def growth_factor(k):
    return 1 + Fraction(1, 2 * k)


def boost_target(k, n, c):
    """floor(c * eps' * n) with eps' = 1/k."""
    return math.floor(Fraction(c) * n / k)


def boost_sizes(k, target):
    """Start at 2k+1 and grow by (1 + 1/(2k)) rounded to nearest, until reaching target."""
    r = growth_factor(k)
    sizes = [2 * k + 1]
    while sizes[-1] < target:
        sizes.append(max(sizes[-1], math.floor(r * sizes[-1] + Fraction(1, 2))))
    return sizes


def build_boosting(k, n, c, prev=None, start=0, first_index=0, used=0):
    """
    :param k: Integer 1/eps.
    :param n: Vertex budget.
    :param c: Boost sizing constant.
    :param prev: Layer the first boost layer is completely joined to.
    :param used: Vertices already spent by earlier layers.
    :return (layers, edges): Boost LayerSpecs and an edge array.
    """
    _check_k(k)
    target = boost_target(k, n, c)
    if target <= 2 * k + 1:
        raise InstanceTooSmall("boost target {} does not exceed the first boost layer ({})".format(target, 2 * k + 1))
    sizes = boost_sizes(k, target)
    if used + sum(sizes) > n:
        raise BudgetExceeded("{} boost vertices after {} used exceed n={}".format(sum(sizes), used, n))
    layers = _layers(sizes, Role.BOOST, k, start, first_index, terminal=Wiring.NONE, regular=False)
    edges = _chain_edges(layers, k)
    if prev is not None:
        edges = np.concatenate([_wire(prev, layers[0], Wiring.COMPLETE, k), edges])
    return layers, edges


def fixed_vertex_count(k):
    """Initializer, parallel and secondary vertices."""
    return sum(_cycling_sizes(k, k)) + k + sum(_cycling_sizes(k, 2 * k)[1:])


def boost_budget(k, target):
    """Upper bound on the boost vertex count for a target size; monotone in target."""
    return (math.floor(growth_factor(k) * target) + 1) * (4 * k + 1)


def choose_c(k, n):
    """
    Largest c on the grid 1/2, 1/4, ... whose boost layers fit next to the fixed layers.
    :return c: Fraction.
    """
    _check_k(k)
    fixed = fixed_vertex_count(k)
    if n < fixed:
        raise InstanceTooSmall("n={} is below the {} fixed vertices needed for k={}".format(n, fixed, k))
    for c in C_GRID:
        target = boost_target(k, n, c)
        if target <= 2 * k + 1:
            break
        if fixed + boost_budget(k, target) <= n:
            return c
    raise InstanceTooSmall("no boost constant fits n={} for k={}".format(n, k))


def k_for_eps(eps):
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise InvalidInstance("eps must lie in (0, 1], got {}".format(eps))
    return max(2, math.ceil(1 / eps))


def _phase2_schedule(chain):
    """
    Alternating waves from the free layer. Each wave recolors chain[0], then every
    following layer until the next one already has the wave's color. Ends after two
    waves leave the boost pattern unchanged.
    """
    colors = [Color.RED] * (len(chain) - 1) + [Color.WHITE]
    boost = [i for i, layer in enumerate(chain) if layer.role is Role.BOOST]
    schedule, wave, quiet, waves = [], Color.WHITE, 0, 0
    while quiet < 2:
        before = [colors[i] for i in boost]
        colors[0] = wave
        schedule.extend(chain[0].vertices)
        i = 1
        while i + 1 < len(chain) and colors[i + 1] != wave:
            colors[i] = wave
            schedule.extend(chain[i].vertices)
            i += 1
        quiet = quiet + 1 if [colors[i] for i in boost] == before else 0
        wave = wave.complement()
        waves += 1
    logger.debug("phase 2: %d waves, %d switches", waves, len(schedule))
    return schedule


def build_full(n, eps, c=None):
    """
    Assemble the lower-bound instance and both phase schedules.
    :param n: Vertex budget.
    :param eps: Rational in (0, 1].
    :param c: Optional boost constant; chosen by choose_c when omitted.
    :return (game, plan): ConsensusGame on the used vertices and its ConstructionPlan.
    """
    eps = Fraction(eps)
    k = k_for_eps(eps)
    if c is None:
        c = choose_c(k, n)
    initializer, _ = build_initializer(k)
    shared, parallel = initializer[-2], initializer[-1]
    secondary, _ = build_secondary(k, shared=shared, start=parallel.stop, first_index=len(initializer))
    used = secondary[-1].stop
    boost, _ = build_boosting(k, n, c, prev=secondary[-1], start=used,
                              first_index=len(initializer) + len(secondary), used=used)
    plan = ConstructionPlan(k, eps, n, Fraction(c), initializer + secondary + boost)
    chain = plan.chain
    plan.phase1 = [v for layer in chain[1:-1] for v in layer.vertices]
    plan.phase2 = _phase2_schedule(chain[chain.index(shared):])
    game = plan.game()
    logger.info("built lower-bound instance: k=%d, c=%s, %d of %d vertices, %d edges, %d boost layers",
                k, c, game.n, n, game.num_edges, len(boost))
    return game, plan


def predicted_final_bad_edges(plan):
    """Bad edges when consecutive boost layers have alternating colors."""
    sizes = plan.boost_sizes
    return sum(a * b for a, b in zip(sizes, sizes[1:]))


def _gadget_rule(eps, rule):
    return rule if rule is not None else UncertaintyRule(Fraction(eps))


def min_gadget_m(rule):
    """Smallest m with m + 1 <= kappa * m."""
    return math.ceil(1 / rule.eps_hat)


def _check_m(m, rule):
    needed = min_gadget_m(rule)
    if m < needed:
        raise MTooSmall("m={} is too small for {}; need m >= {}".format(m, rule, needed))


def build_double_gadget(m, eps, rule=None):
    """
    V (vertex 0, White) with m White neighbors 1..m joined to the White anchor W
    and m+1 Red neighbors m+1..2m+1 joined to the Red anchor R.
    The schedule switches an unswitched neighbor (Red ones while V is White,
    White ones while V is Red), then V, 2m+1 times.
    :return (game, schedule): Fresh game and its schedule.
    """
    rule = _gadget_rule(eps, rule)
    _check_m(m, rule)
    v, white_anchor, red_anchor = 0, 2 * m + 2, 2 * m + 3
    whites = list(range(1, m + 1))
    reds = list(range(m + 1, 2 * m + 2))
    edges = [(v, u) for u in whites + reds]
    edges += [(u, white_anchor) for u in whites] + [(u, red_anchor) for u in reds]
    colors = [Color.WHITE] * (2 * m + 4)
    for u in reds + [red_anchor]:
        colors[u] = Color.RED
    schedule = []
    for step in range(2 * m + 1):
        schedule += [reds[step // 2] if step % 2 == 0 else whites[step // 2], v]
    return ConsensusGame.from_edges(2 * m + 4, edges, colors), schedule


def build_bipartite_gadget(m, eps, rule=None):
    """
    K_{m,2m+1}: m White small-side vertices, m Red and m+1 White large-side vertices.
    Each Red large-side vertex is joined to m Red anchors, each White one to m White anchors.
    :return (game, schedule): Fresh game and its schedule.
    """
    rule = _gadget_rule(eps, rule)
    _check_m(m, rule)
    small = list(range(m))
    reds = list(range(m, 2 * m))
    whites = list(range(2 * m, 3 * m + 1))
    red_anchors = list(range(3 * m + 1, 4 * m + 1))
    white_anchors = list(range(4 * m + 1, 5 * m + 1))
    edges = [(x, y) for x in small for y in reds + whites]
    edges += [(y, a) for y in reds for a in red_anchors]
    edges += [(y, a) for y in whites for a in white_anchors]
    colors = [Color.WHITE] * (5 * m + 1)
    for u in reds + red_anchors:
        colors[u] = Color.RED
    schedule = list(small)
    for step in range(2 * m + 1):
        schedule += [whites[step // 2] if step % 2 == 0 else reds[step // 2]] + small
    return ConsensusGame.from_edges(5 * m + 1, edges, colors), schedule
