"""
Uncertain best-response dynamics: the switching rule, schedule execution and
validation, traces with the initial/responder/rest partition, and exact and
greedy adversaries for small instances.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np
import pandas as pd
from tqdm import tqdm

from consensus_game import Color
from utils.errors import (ContainmentViolation, InvalidInstance, InvalidMove, NoIncrease,
                          StateLimitExceeded, ZeroInitialCost)

logger = logging.getLogger(__name__)

DEFAULT_STATE_LIMIT = 1 << 22
MAX_ORACLE_VERTICES = 24
TRACE_COLUMNS = ["step", "vertex", "from", "to", "b", "g", "delta", "bad_edges_after"]


class Variant(Enum):
    """How the relative perturbation eps turns into the permitted ratio g/b."""
    ONE_SIDED = "one-sided"
    TWO_SIDED = "two-sided"
    HALF_DEGREE = "half-degree"


@dataclass(frozen=True)
class UncertaintyRule:
    """
    A player with b bad and g good neighbors may switch iff g <= kappa * b.
    kappa is 1+eps (one-sided), (1+eps)^2 (two-sided) or 1+2eps (half-degree).
    """
    eps: Fraction
    variant: Variant = Variant.TWO_SIDED

    def __post_init__(self):
        eps = Fraction(self.eps)
        if eps <= 0:
            raise ValueError("eps must be positive, got {}".format(eps))
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "variant", Variant(self.variant))

    @classmethod
    def from_args(cls, eps, rule="two-sided"):
        return cls(Fraction(eps), Variant(rule))

    @property
    def kappa(self):
        if self.variant is Variant.ONE_SIDED:
            return 1 + self.eps
        if self.variant is Variant.HALF_DEGREE:
            return 1 + 2 * self.eps
        return (1 + self.eps) ** 2

    @property
    def eps_hat(self):
        """The effective relative slack kappa - 1."""
        return self.kappa - 1

    def allows(self, b, g):
        kappa = self.kappa
        return g * kappa.denominator <= kappa.numerator * b

    def allows_array(self, b, g):
        kappa = self.kappa
        return g * kappa.denominator <= kappa.numerator * b

    def __str__(self):
        return "{}@{}".format(self.variant.value, self.eps)


def can_switch(game, rule, v):
    """True iff g <= kappa * b for v; ties allowed."""
    b = game.player_cost(v)
    return rule.allows(b, game.good_degree(v))


def is_uncertain_best_response(game, rule, v):
    """A permitted switch that strictly increases the number of bad edges."""
    b = game.player_cost(v)
    g = game.good_degree(v)
    return g > b and rule.allows(b, g)


@dataclass
class Trace:
    """
    Ordered switches plus the vertex partition:
    initial (incident to a bad edge at the start), responders (other vertices in
    order of their first switch) and rest (never switched, never bad).
    """
    records: list
    initial_colors: np.ndarray
    initial_bad: int
    final_bad: int
    initial: list
    responders: list
    rest: list
    first_uncertain: dict = field(default_factory=dict)

    @property
    def moves(self):
        return len(self.records)

    @property
    def schedule(self):
        return [r.vertex for r in self.records]


def build_trace(initial_colors, initial_bad_degree, records, final_bad):
    """
    :param initial_colors: Colors before the first record.
    :param initial_bad_degree: Cost vector before the first record.
    :param records: MoveRecords in order.
    :param final_bad: Bad edges after the last record.
    :return trace: Trace with the partition filled in.
    """
    initial_bad = int(initial_bad_degree.sum()) // 2
    in_initial = initial_bad_degree > 0
    responders = []
    seen = np.zeros(len(initial_colors), dtype=bool)
    first_uncertain = {}
    for record in records:
        v = record.vertex
        if not seen[v]:
            seen[v] = True
            if not in_initial[v]:
                responders.append(v)
        if record.g > record.b and v not in first_uncertain:
            first_uncertain[v] = record.step
    initial = [int(v) for v in np.flatnonzero(in_initial)]
    rest = [int(v) for v in np.flatnonzero(~in_initial & ~seen)]
    return Trace(list(records), initial_colors.copy(), initial_bad, final_bad,
                 initial, responders, rest, first_uncertain)


def run_schedule(game, rule, schedule, strict=False, progress=False):
    """
    Apply a schedule to the game in place, validating every switch.
    :param game: ConsensusGame, mutated.
    :param rule: UncertaintyRule.
    :param schedule: Vertex ids to switch, in order.
    :param strict: Recount the cached costs after the run.
    :param progress: Show a tqdm bar.
    :return trace: Trace of the run.
    """
    initial_colors = game.colors.copy()
    initial_bad_degree = game.bad_degree.copy()
    records = []
    for step, v in enumerate(tqdm(schedule, disable=not progress, desc="schedule")):
        v = int(v)
        game.check_vertex(v)
        b = game.player_cost(v)
        g = game.good_degree(v)
        if not rule.allows(b, g):
            raise InvalidMove(step, v, b, g)
        records.append(game.flip(v))
    if strict:
        bad_edges, bad_degree = game.recount()
        if bad_edges != game.bad_edges or not np.array_equal(bad_degree, game.bad_degree):
            raise InvalidMove(len(records), -1, bad_edges, game.bad_edges, "cached costs drifted")
    logger.debug("ran %d switches under %s: %d -> %d bad edges",
                 len(records), rule, int(initial_bad_degree.sum()) // 2, game.bad_edges)
    return build_trace(initial_colors, initial_bad_degree, records, game.bad_edges)


def replay_schedule(game, schedule):
    """Apply a schedule without checking the rule; audits happen downstream."""
    initial_colors = game.colors.copy()
    initial_bad_degree = game.bad_degree.copy()
    records = [game.flip(int(v)) for v in schedule]
    return build_trace(initial_colors, initial_bad_degree, records, game.bad_edges)


@dataclass(frozen=True)
class OracleResult:
    max_bad_edges: int
    witness: list
    states: int


def bfs_oracle_max_bad_edges(game, rule, state_limit=DEFAULT_STATE_LIMIT):
    """
    Exhaustive search over colorings reachable from the current one by permitted switches.
    :param game: ConsensusGame with at most 24 vertices; not modified.
    :param rule: UncertaintyRule.
    :param state_limit: Maximum number of distinct states to visit.
    :return result: OracleResult with the exact maximum and a shortest witness schedule.
    """
    n = game.n
    if n > MAX_ORACLE_VERTICES:
        raise InvalidInstance("exhaustive search supports n <= {}, got {}".format(MAX_ORACLE_VERTICES, n))
    nbr_mask = [sum(1 << int(w) for w in game.neighbors_of(v)) for v in range(n)]
    degree = [int(d) for d in game.degree]
    start = sum(1 << v for v in range(n) if game.colors[v] == Color.RED)
    parent = {start: None}
    bad = {start: game.bad_edges}
    best_state, best = start, game.bad_edges
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for v in range(n):
            red_nbrs = bin(nbr_mask[v] & state).count("1")
            b = degree[v] - red_nbrs if state >> v & 1 else red_nbrs
            g = degree[v] - b
            if not rule.allows(b, g):
                continue
            nxt = state ^ (1 << v)
            if nxt in parent:
                continue
            if len(parent) >= state_limit:
                raise StateLimitExceeded(state_limit)
            parent[nxt] = (state, v)
            bad[nxt] = bad[state] + g - b
            if bad[nxt] > best:
                best_state, best = nxt, bad[nxt]
            queue.append(nxt)
    witness = []
    state = best_state
    while parent[state] is not None:
        state, v = parent[state]
        witness.append(v)
    witness.reverse()
    logger.debug("oracle explored %d states, max %d bad edges", len(parent), best)
    return OracleResult(best, witness, len(parent))


def greedy_adversary(game, rule, step_limit=10 ** 6):
    """
    Repeatedly take the permitted switch with the largest increase (lowest id on ties).
    Stops when no permitted switch increases the bad-edge count. Mutates game.
    """
    if step_limit <= 0:
        raise ValueError("step_limit must be positive")
    initial_colors = game.colors.copy()
    initial_bad_degree = game.bad_degree.copy()
    records = []
    while len(records) < step_limit:
        b = game.bad_degree
        g = game.degree - b
        delta = g - b
        candidates = rule.allows_array(b, g) & (delta > 0)
        if not candidates.any():
            break
        v = int(np.argmax(np.where(candidates, delta, -1)))
        records.append(game.flip(v))
    return build_trace(initial_colors, initial_bad_degree, records, game.bad_edges)


def price_of_uncertainty(trace):
    """Final over initial bad edges, as an exact Fraction."""
    if trace.initial_bad == 0:
        raise ZeroInitialCost("price of uncertainty needs at least one initial bad edge")
    return Fraction(trace.final_bad, trace.initial_bad)


def first_increasing_move(trace):
    for record in trace.records:
        if record.delta_bad_edges > 0:
            return record
    raise NoIncrease("trace has no move that increases the number of bad edges")


def first_increase_threshold_check(trace, rule):
    """
    At the first increasing move, b >= (g - b) / (kappa - 1); the bad-edge count
    never rose before it, so the initial count is at least that bound too.
    :return ok: Whether both hold.
    """
    record = first_increasing_move(trace)
    bound = math.ceil(Fraction(record.g - record.b) / rule.eps_hat)
    ok = record.b >= bound and trace.initial_bad >= bound
    logger.debug("first increase at step %d: b=%d, g=%d, bound=%d, initial=%d",
                 record.step, record.b, record.g, bound, trace.initial_bad)
    return ok


def check_containment(trace, game, full_scan=False):
    """
    Every bad edge has an endpoint among the initial vertices or the responders
    seen so far, checked before each first response and at the end.
    :param trace: Trace to audit.
    :param game: Any game on the same graph; only its adjacency is used.
    :param full_scan: Scan every edge at every event instead of keeping a counter.
    :return events: Number of checkpoints verified.
    """
    colors = trace.initial_colors.copy()
    member = np.zeros(game.n, dtype=bool)
    member[trace.initial] = True
    edges = game.edge_array()
    u, w = edges[:, 0], edges[:, 1]

    def scan(step):
        outside = (colors[u] != colors[w]) & ~member[u] & ~member[w]
        if outside.any():
            i = int(np.argmax(outside))
            raise ContainmentViolation(step, (int(u[i]), int(w[i])))

    # edge states change only at movers, which are members by then
    scan(-1)
    events = 1
    for record in trace.records:
        v = record.vertex
        if not member[v]:
            if full_scan:
                scan(record.step)
            member[v] = True
            events += 1
        colors[v] = 1 - colors[v]
    scan(len(trace.records))
    return events + 1


def write_trace_csv(trace, path):
    rows = [[r.step, r.vertex, r.before.symbol, r.after.symbol, r.b, r.g, r.delta_bad_edges, r.bad_edges_after]
            for r in trace.records]
    pd.DataFrame(rows, columns=TRACE_COLUMNS).to_csv(path, index=None)


def read_trace_schedule(path):
    """Vertex column of a trace CSV, in step order."""
    frame = pd.read_csv(path)
    missing = set(TRACE_COLUMNS) - set(frame.columns)
    if missing:
        raise InvalidInstance("trace file lacks columns {}".format(sorted(missing)))
    return [int(v) for v in frame.sort_values("step")["vertex"]]


def write_schedule(schedule, path):
    with open(path, "w") as outfile:
        outfile.write("".join("{}\n".format(int(v)) for v in schedule))


def read_schedule(path):
    with open(path) as infile:
        return [int(line) for line in infile if line.strip()]
