"""
Sequence game behind the upper bound: E_k multisets, moves and reversed moves,
extraction of E_k traces from simulated runs, and numeric checks of every
inequality used to bound the final number of bad edges.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from utils.errors import (ChainViolation, IllegalTransition, InvalidBoundInput, NonpositiveElement,
                          ViolatedInequality, WrongTargetCount, ZNotPresent)
from utils.utils import format_fraction, write_json

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9


@dataclass(frozen=True)
class EkSequence:
    """
    Nonnegative integers with finitely many nonzero entries, kept as the positive
    entries in descending order plus a count of zeros (None for an unbounded tail).
    """
    values: tuple
    zeros: int = None

    def __post_init__(self):
        values = tuple(sorted((int(v) for v in self.values), reverse=True))
        if values and values[-1] < 0:
            raise NonpositiveElement("sequence entries must be nonnegative")
        positive = tuple(v for v in values if v > 0)
        zeros = self.zeros
        if zeros is not None:
            zeros = int(zeros) + len(values) - len(positive)
        object.__setattr__(self, "values", positive)
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "_sum", sum(positive))
        object.__setattr__(self, "_sum_sq", sum(v * v for v in positive))

    @classmethod
    def from_counts(cls, counts, zeros=None):
        return cls(tuple(counts), zeros)

    @property
    def sum(self):
        return self._sum

    @property
    def sum_sq(self):
        return self._sum_sq

    def has_zero(self):
        return self.zeros is None or self.zeros > 0

    def __contains__(self, z):
        return self.has_zero() if z == 0 else z in self.values

    def __len__(self):
        return len(self.values)

    def __str__(self):
        return "{" + ",".join(str(v) for v in self.values) + ",0,...}"


def move_size(z, eps):
    return math.floor((1 + Fraction(eps)) * z)


def apply_move(sequence, z, targets, eps):
    """
    Delete one instance of z, then add 1 to floor((1+eps) z) distinct elements.
    :param sequence: EkSequence.
    :param z: Value to delete; 0 removes one zero.
    :param targets: Indices into the entries left after the deletion; indices past the end denote distinct zeros.
    :param eps: Fraction.
    :return sequence: New EkSequence.
    """
    if z not in sequence:
        raise ZNotPresent("{} is not an element of {}".format(z, sequence))
    values = list(sequence.values)
    zeros = sequence.zeros
    if z == 0:
        zeros = None if zeros is None else zeros - 1
    else:
        values.remove(z)
    targets = list(targets)
    if len(set(targets)) != len(targets) or any(t < 0 for t in targets):
        raise WrongTargetCount("targets must be distinct nonnegative indices")
    expected = move_size(z, eps)
    if len(targets) != expected:
        raise WrongTargetCount("move on z={} needs {} targets, got {}".format(z, expected, len(targets)))
    fresh = 0
    for t in targets:
        if t < len(values):
            values[t] += 1
        else:
            fresh += 1
    if zeros is not None:
        if fresh > zeros:
            raise WrongTargetCount("only {} zeros available, {} requested".format(zeros, fresh))
        zeros -= fresh
    return EkSequence(tuple(values) + (1,) * fresh, zeros)


def apply_reversed_move(sequence, indices, eps):
    """
    Subtract 1 from alpha positive elements and insert z = ceil(alpha / (1+eps)).
    :return (sequence, alpha, z): New EkSequence, the number of decremented elements and the inserted value.
    """
    indices = sorted(set(indices))
    alpha = len(indices)
    if alpha == 0:
        raise NonpositiveElement("a reversed move decrements at least one element")
    if indices[0] < 0 or indices[-1] >= len(sequence.values):
        raise NonpositiveElement("reversed moves only decrement positive elements")
    values = list(sequence.values)
    for i in indices:
        values[i] -= 1
    z = math.ceil(Fraction(alpha) / (1 + Fraction(eps)))
    values.append(z)
    zeros = sequence.zeros
    return EkSequence(tuple(values), zeros), alpha, z


@dataclass(frozen=True)
class StrongState:
    """(sum E, sum E^2) under strong reversed moves; may leave the representable range."""
    sum_e: object
    sum_e2: object

    @classmethod
    def start(cls, sum_e, sum_e2):
        if sum_e < 0:
            raise ValueError("sum E must be nonnegative, got {}".format(sum_e))
        return cls(sum_e, sum_e2)

    @classmethod
    def of(cls, sequence):
        return cls.start(sequence.sum, sequence.sum_sq)


def apply_strong_reversed_move(state, alpha, eps):
    """sum E drops by eps alpha; sum E^2 changes by -2 sum E + (1-eps)^2 alpha^2."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative, got {}".format(alpha))
    return StrongState(state.sum_e - eps * alpha,
                       state.sum_e2 - 2 * state.sum_e + (1 - eps) ** 2 * alpha * alpha)


def dominating_alpha(alpha, eps):
    """
    Real alpha' whose strong reversed move matches a reversed move of size alpha on
    sum E and lies below it on sum E^2.
    """
    eps = Fraction(eps)
    return (alpha - math.ceil(Fraction(alpha) / (1 + eps))) / eps


def sum_alpha_bound(m, eps, sum_e0, sum_e0_sq):
    """
    Larger root of the quadratic that the alphas of m reversed moves must satisfy
    for sum E_0^2 to remain nonnegative.
    :return bound: float.
    """
    if m < 1:
        raise InvalidBoundInput("m must be at least 1, got {}".format(m))
    if sum_e0 < 0 or sum_e0_sq < 0:
        raise InvalidBoundInput("starting sums must be nonnegative")
    if eps < 0 or eps == 1:
        raise InvalidBoundInput("eps must be nonnegative and different from 1, got {}".format(eps))
    eps = float(eps)
    a = (1 - eps) ** 2 / m
    b = eps * (2 * m - 1)
    disc = b * b + 4 * a * (float(sum_e0_sq) + 2 * m * float(sum_e0))
    return (b + math.sqrt(disc)) / a


@dataclass
class SetsPartition:
    """Initial set S_0, first responders in order, and T_k = edges inside S_k."""
    s0: list
    order: list
    t: list

    @property
    def m(self):
        return len(self.order)


@dataclass(frozen=True)
class Transition:
    """
    First response k: z edges from the vertex into S_{k-1}, `increments` edges to the
    outside; `alpha` = floor(kappa z) is the size of the padded move.
    """
    k: int
    vertex: int
    step: int
    z: int
    increments: int
    alpha: int
    b: int
    g: int

    @property
    def pad(self):
        return self.alpha - self.increments


@dataclass
class ReversedTrace:
    """alphas[j] is used by reversed move j; states[j] is (sum E, sum E^2) before it, states[-1] the end."""
    alphas: list
    states: list

    @property
    def steps(self):
        return len(self.alphas)


@dataclass
class EkExtraction:
    partition: SetsPartition
    sequences: list
    transitions: list
    sum_e: list
    sum_e2: list
    padding: list
    kappa: Fraction

    @property
    def eps_hat(self):
        return self.kappa - 1

    def padded_sums(self, k):
        """(sum, sum of squares) of the padded sequence after k first responses; phantom entries are all 1."""
        return self.sum_e[k] + self.padding[k], self.sum_e2[k] + self.padding[k]

    def reversed(self):
        alphas, states = [], []
        for transition in reversed(self.transitions):
            if transition.alpha == 0:
                continue
            alphas.append(transition.alpha)
            states.append(self.padded_sums(transition.k))
        states.append(self.padded_sums(0))
        return ReversedTrace(alphas, states)


def extract_Ek_trace(trace, game, rule, keep_sequences=True):
    """
    Replay the first responses of a trace against the sets S_k.
    :param trace: Trace from run_schedule or replay_schedule.
    :param game: Game on the same graph; only adjacency is read.
    :param rule: UncertaintyRule the trace was played under.
    :param keep_sequences: Keep every E_k; otherwise only E_0 and E_m.
    :return extraction: EkExtraction.
    """
    kappa = rule.kappa
    n = game.n
    owner = np.repeat(np.arange(n), game.degree)
    member = np.zeros(n, dtype=bool)
    member[trace.initial] = True
    into = np.bincount(owner[member[game.neighbors]], minlength=n).astype(np.int64)
    t_count = int((member[owner] & member[game.neighbors]).sum()) // 2
    into[member] = 0

    def snapshot():
        outside = into[~member]
        return EkSequence.from_counts(outside[outside > 0], int((outside == 0).sum()))

    sequences = [snapshot()]
    outside = into[~member]
    sum_e, sum_e2 = [int(outside.sum())], [int((outside * outside).sum())]
    padding, t_list, transitions, order = [0], [t_count], [], []
    for record in trace.records:
        v = record.vertex
        if member[v]:
            continue
        k = len(order) + 1
        z = int(into[v])
        if not rule.allows(record.b, record.g):
            raise IllegalTransition(k, "vertex {} switched with b={}, g={} outside {}".format(
                v, record.b, record.g, rule))
        increments = int(game.degree[v]) - z
        alpha = math.floor(kappa * z)
        if increments > alpha:
            raise IllegalTransition(k, "vertex {} has degree {} > z + floor(kappa z) = {}".format(
                v, int(game.degree[v]), z + alpha))
        member[v] = True
        nbrs = game.neighbors_of(v)
        out = nbrs[~member[nbrs]]
        old = into[out]
        into[out] += 1
        into[v] = 0
        sum_e.append(sum_e[-1] - z + len(out))
        sum_e2.append(sum_e2[-1] - z * z + int((2 * old + 1).sum()))
        padding.append(padding[-1] + alpha - increments)
        t_count += z
        t_list.append(t_count)
        order.append(v)
        transitions.append(Transition(k, v, record.step, z, increments, alpha, record.b, record.g))
        if keep_sequences:
            sequences.append(snapshot())
    if not keep_sequences:
        sequences.append(snapshot())
    partition = SetsPartition(list(trace.initial), order, t_list)
    logger.debug("extracted %d first responses, sum E %d -> %d", len(order), sum_e[0], sum_e[-1])
    return EkExtraction(partition, sequences, transitions, sum_e, sum_e2, padding, kappa)


@dataclass
class MonovariantReport:
    steps: int
    worst_sum_slack: object = None
    worst_square_slack: object = None


def _is_exact(*values):
    return all(isinstance(v, (int, Fraction, np.integer)) for v in values)


def check_monovariants(trace, eps, tolerance=TOLERANCE):
    """
    For every reversed move: sum E falls by at most eps alpha, and sum E^2 falls by
    at most 2 sum E - (1-eps)^2 alpha^2.
    :param trace: ReversedTrace or EkExtraction.
    :param eps: Relative slack of the move game.
    :return report: MonovariantReport with the smallest slacks seen.
    """
    if isinstance(trace, EkExtraction):
        trace = trace.reversed()
    report = MonovariantReport(trace.steps)
    for j, alpha in enumerate(trace.alphas):
        (s, s2), (prev, prev2) = trace.states[j], trace.states[j + 1]
        sum_slack = (prev - s) + eps * alpha
        square_slack = (prev2 - s2) - (-2 * s + (1 - eps) ** 2 * alpha * alpha)
        tol = 0 if _is_exact(sum_slack, square_slack) else tolerance
        if sum_slack < -tol:
            raise ViolatedInequality(j, "sum E", sum_slack)
        if square_slack < -tol:
            raise ViolatedInequality(j, "sum E^2", square_slack)
        if report.worst_sum_slack is None or sum_slack < report.worst_sum_slack:
            report.worst_sum_slack = sum_slack
        if report.worst_square_slack is None or square_slack < report.worst_square_slack:
            report.worst_square_slack = square_slack
    return report


def bound_applies(kappa):
    """The reversed inequalities and the closed form need kappa^2 - 2 kappa - 1 <= 0 and kappa != 2."""
    return kappa * kappa - 2 * kappa - 1 <= 0 and kappa != 2


def _number(value):
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def verify_upper_bound_chain(trace, game, rule, extraction=None, tolerance=TOLERANCE, raise_on_violation=True):
    """
    Check the inequalities that bound the final bad-edge count on one trace.
    :param trace: Trace of the run.
    :param game: Game on the same graph.
    :param rule: UncertaintyRule of the run.
    :param extraction: Precomputed EkExtraction, if any.
    :param raise_on_violation: Raise ChainViolation instead of returning a report with violations.
    :return report: JSON-ready dict.
    """
    if extraction is None:
        extraction = extract_Ek_trace(trace, game, rule, keep_sequences=False)
    kappa, eps_hat = rule.kappa, rule.eps_hat
    partition = extraction.partition
    m = partition.m
    alphas = [t.alpha for t in extraction.transitions]
    steps = [a for a in alphas if a > 0]
    sum_alpha = sum(alphas)
    sum_alpha_sq = sum(a * a for a in alphas)
    sum_e0, sum_e0_sq = extraction.sum_e[0], extraction.sum_e2[0]
    sum_em = extraction.sum_e[-1]
    t0, tm = partition.t[0], partition.t[-1]
    violations = []

    bound, status = None, "skipped"
    if not steps:
        status = "trivial"
    elif bound_applies(kappa):
        status = "checked"
        bound = sum_alpha_bound(len(steps), eps_hat, sum_e0, sum_e0_sq)
        if sum_alpha > bound * (1 + tolerance):
            violations.append("sum_alpha_bound")
        try:
            check_monovariants(extraction.reversed(), eps_hat, tolerance)
        except ViolatedInequality as error:
            logger.warning("%s", error)
            violations.append("monovariants")

    padded_growth = extraction.padded_sums(m)[0] - extraction.padded_sums(0)[0]
    if eps_hat * (tm - t0) - m > padded_growth:
        violations.append("edge_growth")

    increasing = any(r.delta_bad_edges > 0 for r in trace.records)
    if increasing and trace.initial_bad * eps_hat < 1:
        violations.append("initial_bad_edges")
    if trace.final_bad > tm + sum_em:
        violations.append("final_bad_edges")

    n = game.n
    observations = {
        "sum_sq_at_most_square_of_sum": sum_e0_sq <= sum_e0 * sum_e0,
        "start_sum_at_most_n_s0": sum_e0 <= n * len(partition.s0),
        "cauchy_schwarz": not steps or sum_alpha_sq * len(steps) >= sum_alpha * sum_alpha,
    }
    if trace.initial_bad:
        pou = Fraction(trace.final_bad, trace.initial_bad)
        if increasing:
            observations["quadratic_bound"] = pou <= eps_hat * n * (n - 1) / 2
        if pou >= eps_hat * eps_hat * n * n:
            observations["starting_cost_bound"] = trace.initial_bad <= 1 / (2 * eps_hat * eps_hat)
    violations += [name for name, holds in observations.items() if not holds]

    report = {"m": m,
              "sum_alpha": sum_alpha,
              "sum_alpha_sq": sum_alpha_sq,
              "bound": bound,
              "slack": None if bound is None else bound - sum_alpha,
              "bound_status": status,
              "T0": t0,
              "Tm": tm,
              "sumE0": sum_e0,
              "sumE0_sq": sum_e0_sq,
              "sumEm": sum_em,
              "padding": extraction.padding[-1],
              "s0_size": len(partition.s0),
              "initial_bad_edges": trace.initial_bad,
              "final_bad_edges": trace.final_bad,
              "kappa": format_fraction(kappa),
              "eps_hat": format_fraction(eps_hat),
              "observations": observations,
              "violations": violations}
    report = {key: _number(value) for key, value in report.items()}
    logger.info("chain check: m=%d, sum alpha=%d, bound=%s, violations=%s", m, sum_alpha, bound, violations)
    if violations and raise_on_violation:
        raise ChainViolation(", ".join(violations), report)
    return report


def write_report(report, path):
    write_json(report, path)
