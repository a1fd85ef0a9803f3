"""Exceptions raised by the consensus game simulator and verifiers."""

VIOLATION_EXIT_CODE = 2
INFEASIBLE_EXIT_CODE = 3


class ConsensusError(Exception):
    """Base class. `exit_code` is what the command line returns for it."""
    exit_code = 1


class InvalidInstance(ConsensusError, ValueError):
    """Edge list or coloring is not a simple graph with a valid coloring."""


class InvalidMove(ConsensusError):
    """A scheduled switch is not allowed under the uncertainty rule."""
    exit_code = VIOLATION_EXIT_CODE

    def __init__(self, step, vertex, b, g, reason="g > kappa * b"):
        self.step = step
        self.vertex = vertex
        self.b = b
        self.g = g
        self.reason = reason
        super().__init__("invalid move at step {}: vertex {} with b={}, g={} ({})".format(
            step, vertex, b, g, reason))


class StateLimitExceeded(ConsensusError):
    exit_code = VIOLATION_EXIT_CODE

    def __init__(self, limit):
        self.limit = limit
        super().__init__("exhaustive search visited more than {} states".format(limit))


class ZeroInitialCost(ConsensusError, ZeroDivisionError):
    """Price of uncertainty is undefined from a state without bad edges."""


class NoIncrease(ConsensusError):
    """The trace has no move that increases the number of bad edges."""


class InstanceTooSmall(ConsensusError):
    exit_code = INFEASIBLE_EXIT_CODE


class BudgetExceeded(ConsensusError):
    exit_code = INFEASIBLE_EXIT_CODE


class MTooSmall(ConsensusError):
    exit_code = INFEASIBLE_EXIT_CODE


class ZNotPresent(ConsensusError, ValueError):
    pass


class WrongTargetCount(ConsensusError, ValueError):
    pass


class NonpositiveElement(ConsensusError, ValueError):
    pass


class InvalidBoundInput(ConsensusError, ValueError):
    """The closed-form bound is undefined for these arguments."""


class IllegalTransition(ConsensusError):
    """An extracted first response is not a legal move of the sequence game."""
    exit_code = VIOLATION_EXIT_CODE

    def __init__(self, k, message):
        self.k = k
        super().__init__("first response {}: {}".format(k, message))


class ViolatedInequality(ConsensusError):
    exit_code = VIOLATION_EXIT_CODE

    def __init__(self, step, which, slack):
        self.step = step
        self.which = which
        self.slack = slack
        super().__init__("{} violated at reversed step {} (slack {})".format(which, step, slack))


class ChainViolation(ConsensusError):
    exit_code = VIOLATION_EXIT_CODE

    def __init__(self, which, report=None):
        self.which = which
        self.report = report
        super().__init__("upper-bound chain violated: {}".format(which))


class ContainmentViolation(ConsensusError):
    """A bad edge with both endpoints outside the current first-responder set."""
    exit_code = VIOLATION_EXIT_CODE

    def __init__(self, step, edge):
        self.step = step
        self.edge = edge
        super().__init__("bad edge {} outside the responder set after step {}".format(edge, step))


class DegenerateFit(ConsensusError):
    """Fewer than two distinct points, or a nonpositive coordinate."""
