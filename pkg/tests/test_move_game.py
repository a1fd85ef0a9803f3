from __future__ import annotations

import random
from collections import Counter
from fractions import Fraction

import pytest

from consensus_game import ConsensusGame, new_game
from constructions import build_double_gadget, build_full
from dynamics import UncertaintyRule, Variant, replay_schedule, run_schedule
from move_game import (EkSequence, ReversedTrace, StrongState, apply_move, apply_reversed_move,
                       apply_strong_reversed_move, bound_applies, check_monovariants, dominating_alpha,
                       extract_Ek_trace, move_size, sum_alpha_bound, verify_upper_bound_chain)
from utils.errors import (IllegalTransition, InvalidBoundInput, ViolatedInequality, WrongTargetCount,
                          ZNotPresent)

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
EPS_GRID = (Fraction(1, 3), QUARTER, HALF, Fraction(1))
MOVE_EPS_GRID = (Fraction(1, 3), QUARTER, HALF, Fraction(1, 10))


def _build_seven() -> ConsensusGame:
    """
    Red vertex 0 joined to White 1..4; White 5 sees 1..4 and White 6 sees 1..3.
    The initial set is 0..4, leaving 5 and 6 outside with 4 and 3 edges into it.
    """
    edges = [(0, v) for v in range(1, 5)] + [(v, 5) for v in range(1, 5)] + [(v, 6) for v in range(1, 4)]
    return new_game(edges, "RWWWWWW")


def _reverse_indices(before: list, after: EkSequence, targets: list) -> list:
    """Indices in after holding the elements a forward move incremented."""
    wanted = Counter(before[t] + 1 if t < len(before) else 1 for t in targets)
    indices = []
    for i, value in enumerate(after.values):
        if wanted[value]:
            wanted[value] -= 1
            indices.append(i)
    return indices


def test_move_on_sequence() -> None:
    """
    Claim: a move deletes z and increments floor((1+eps) z) distinct elements, zeros included.
    """
    assert apply_move(EkSequence((3, 1)), 1, [0], HALF) == EkSequence((4,))
    assert apply_move(EkSequence((2, 2, 1)), 2, [0, 1, 2], HALF) == EkSequence((3, 2, 1))
    assert apply_move(EkSequence((2,), zeros=3), 0, [], HALF) == EkSequence((2,), zeros=2)
    assert apply_move(EkSequence((2,), zeros=3), 2, [0, 1, 2], HALF) == EkSequence((1, 1, 1), zeros=0)


def test_move_rejects_bad_input() -> None:
    """
    Claim: a missing z, a wrong target count or too few zeros are rejected.
    """
    with pytest.raises(ZNotPresent):
        apply_move(EkSequence((3, 1)), 5, [], HALF)
    with pytest.raises(ZNotPresent):
        apply_move(EkSequence((3,), zeros=0), 0, [], HALF)
    with pytest.raises(WrongTargetCount):
        apply_move(EkSequence((3, 1)), 1, [0, 1], HALF)
    with pytest.raises(WrongTargetCount):
        apply_move(EkSequence((3,), zeros=1), 3, [0, 1, 2, 3], HALF)


def test_reversed_move_on_sequence() -> None:
    """
    Claim: a reversed move decrements alpha elements and inserts ceil(alpha / (1+eps)).
    """
    sequence, alpha, z = apply_reversed_move(EkSequence((4, 3)), [0, 1], HALF)
    assert (alpha, z) == (2, 2)
    assert sequence == EkSequence((3, 2, 2))


@pytest.mark.parametrize("cases", [2000, pytest.param(100_000, marks=pytest.mark.slow)])
def test_reversed_move_undoes_move(cases) -> None:
    """
    Claim: decrementing the elements a move incremented gives back the sequence and reinserts z.
    """
    rng = random.Random(1337)
    for _ in range(cases):
        eps = rng.choice(EPS_GRID)
        zeros = rng.choice([None, 50])
        sequence = EkSequence(tuple(rng.randint(1, 10) for _ in range(rng.randint(0, 8))), zeros)
        z = rng.choice(list(sequence.values) + [0])
        rest = list(sequence.values)
        if z:
            rest.remove(z)
        size = move_size(z, eps)
        targets = rng.sample(range(len(rest) + size), size)
        moved = apply_move(sequence, z, targets, eps)
        if size == 0:
            assert moved.sum == sequence.sum - z
            continue
        back, alpha, inserted = apply_reversed_move(moved, _reverse_indices(rest, moved, targets), eps)
        assert (alpha, inserted) == (size, z)
        assert back == sequence


def test_strong_reversed_move() -> None:
    """
    Claim: the strong move sends (8, 20) to (27/4, 289/16) for alpha 5 at eps 1/4, and allows alpha 0.
    """
    state = StrongState.start(8, 20)
    assert apply_strong_reversed_move(state, 5, QUARTER) == StrongState(Fraction(27, 4), Fraction(289, 16))
    assert apply_strong_reversed_move(state, 0, QUARTER) == StrongState(8, 4)
    with pytest.raises(ValueError):
        apply_strong_reversed_move(state, -1, QUARTER)


def test_dominating_alpha() -> None:
    """
    Claim: the strong move with alpha' matches the reversed move on sum E and stays below it on sum E^2.
    """
    rng = random.Random(7)
    for _ in range(500):
        eps = rng.choice(EPS_GRID)
        sequence = EkSequence(tuple(rng.randint(1, 12) for _ in range(rng.randint(1, 10))))
        indices = rng.sample(range(len(sequence)), rng.randint(1, len(sequence)))
        moved, alpha, _ = apply_reversed_move(sequence, indices, eps)
        strong = apply_strong_reversed_move(StrongState.of(sequence), dominating_alpha(alpha, eps), eps)
        assert strong.sum_e == moved.sum
        assert strong.sum_e2 <= moved.sum_sq
        assert dominating_alpha(alpha, eps) <= alpha


def test_monovariants_on_strong_moves() -> None:
    """
    Claim: a strong move meets both monovariants with zero slack; a larger drop is reported.
    """
    exact = ReversedTrace([5], [(8, 20), (Fraction(27, 4), Fraction(289, 16))])
    report = check_monovariants(exact, QUARTER)
    assert report.steps == 1
    assert report.worst_sum_slack == 0 and report.worst_square_slack == 0
    with pytest.raises(ViolatedInequality):
        check_monovariants(ReversedTrace([5], [(8, 20), (6, 20)]), QUARTER)


@pytest.mark.parametrize("cases", [2000, pytest.param(100_000, marks=pytest.mark.slow)])
def test_monovariants_on_random_reversed_moves(cases) -> None:
    """
    Claim: every reversed move keeps sum E from falling by more than eps alpha, and sum E^2 within its bound.
    """
    rng = random.Random(4242)
    for _ in range(cases):
        eps = rng.choice(MOVE_EPS_GRID)
        sequence = EkSequence(tuple(rng.randint(1, 12) for _ in range(rng.randint(1, 10))), rng.choice([None, 20]))
        indices = rng.sample(range(len(sequence)), rng.randint(1, len(sequence)))
        moved, alpha, _ = apply_reversed_move(sequence, indices, eps)
        states = [(sequence.sum, sequence.sum_sq), (moved.sum, moved.sum_sq)]
        report = check_monovariants(ReversedTrace([alpha], states), eps)
        assert report.worst_sum_slack >= 0 and report.worst_square_slack >= 0


def test_sum_alpha_bound_values() -> None:
    """
    Claim: the bound is about 17770 for m=100, eps=1/4, sums 10 and 30, and 2eps/(1-eps)^2 with nothing to start.
    """
    assert sum_alpha_bound(100, QUARTER, 10, 30) == pytest.approx(17770.12, rel=1e-3)
    for eps in (0.1, 0.25, 0.5):
        assert sum_alpha_bound(1, eps, 0, 0) == pytest.approx(2 * eps / (1 - eps) ** 2)


def test_sum_alpha_bound_is_monotone() -> None:
    """
    Claim: the bound grows with m and with both starting sums.
    """
    assert sum_alpha_bound(10, QUARTER, 5, 9) < sum_alpha_bound(11, QUARTER, 5, 9)
    assert sum_alpha_bound(10, QUARTER, 5, 9) < sum_alpha_bound(10, QUARTER, 6, 9)
    assert sum_alpha_bound(10, QUARTER, 5, 9) < sum_alpha_bound(10, QUARTER, 5, 10)
    with pytest.raises(ValueError):
        sum_alpha_bound(10, 1, 5, 9)
    with pytest.raises(ValueError):
        sum_alpha_bound(0, QUARTER, 5, 9)
    with pytest.raises(InvalidBoundInput):
        sum_alpha_bound(10, QUARTER, -1, 9)


def test_bound_applies() -> None:
    """
    Claim: the closed form is used for kappa up to 1 + sqrt(2), except kappa = 2.
    """
    assert bound_applies(Fraction(25, 16))
    assert bound_applies(Fraction(9, 4))
    assert not bound_applies(Fraction(2))
    assert not bound_applies(Fraction(4))


def test_starting_sequence_of_small_instance() -> None:
    """
    Claim: the seven-vertex instance starts from E_0 = {4, 3} with no zeros and four edges inside S_0.
    """
    game = _build_seven()
    trace = run_schedule(game.copy(), UncertaintyRule(HALF), [])
    extraction = extract_Ek_trace(trace, game, UncertaintyRule(HALF))
    assert extraction.partition.s0 == [0, 1, 2, 3, 4]
    assert extraction.sequences[0] == EkSequence((4, 3), zeros=0)
    assert (extraction.sum_e[0], extraction.sum_e2[0]) == (7, 25)
    assert extraction.partition.t == [4]


def test_gadget_extraction() -> None:
    """
    Claim: on the doubling gadget every responder enters with z=1 and alpha=1, and E_0 is {m+1, 1, ..., 1}.
    """
    m = 8
    rule = UncertaintyRule(QUARTER)
    game, schedule = build_double_gadget(m, QUARTER)
    trace = run_schedule(game.copy(), rule, schedule)
    extraction = extract_Ek_trace(trace, game, rule)
    assert extraction.sequences[0] == EkSequence((m + 1,) + (1,) * m, zeros=1)
    assert [(t.z, t.alpha, t.pad) for t in extraction.transitions] == [(1, 1, 0)] * m
    assert extraction.partition.t == list(range(m + 1, 2 * m + 2))
    assert len(extraction.sequences) == m + 1


@pytest.mark.parametrize("m", [4, 8, 16, 32])
def test_gadget_chain_is_clean(m) -> None:
    """
    Claim: every inequality of the upper bound holds on the doubling gadget, with room to spare.
    """
    rule = UncertaintyRule(QUARTER)
    game, schedule = build_double_gadget(m, QUARTER)
    trace = run_schedule(game.copy(), rule, schedule)
    report = verify_upper_bound_chain(trace, game, rule)
    assert report["bound_status"] == "checked"
    assert report["violations"] == []
    assert report["m"] == m and report["sum_alpha"] == m
    assert report["slack"] > 0
    assert report["slack"] == pytest.approx(report["bound"] - report["sum_alpha"])
    assert report["final_bad_edges"] <= report["Tm"] + report["sumEm"]


def test_chain_on_empty_trace() -> None:
    """
    Claim: without first responses the chain is trivial and clean.
    """
    rule = UncertaintyRule(QUARTER)
    game, _ = build_double_gadget(4, QUARTER)
    report = verify_upper_bound_chain(run_schedule(game.copy(), rule, []), game, rule)
    assert report["bound_status"] == "trivial"
    assert report["m"] == 0
    assert report["slack"] is None
    assert report["violations"] == []


def test_chain_skips_bound_at_kappa_two() -> None:
    """
    Claim: one-sided eps=1 gives kappa=2, where only the bound itself is skipped.
    """
    rule = UncertaintyRule(Fraction(1), Variant.ONE_SIDED)
    game, schedule = build_double_gadget(2, Fraction(1), rule)
    trace = run_schedule(game.copy(), rule, schedule)
    report = verify_upper_bound_chain(trace, game, rule)
    assert report["bound_status"] == "skipped"
    assert report["bound"] is None
    assert report["slack"] is None
    assert report["padding"] == 2


def test_illegal_transition() -> None:
    """
    Claim: a first response that the rule forbids is reported with its index.
    """
    game = new_game([(0, 1), (1, 2)], "RWW")
    trace = replay_schedule(game.copy(), [2])
    with pytest.raises(IllegalTransition) as raised:
        extract_Ek_trace(trace, game, UncertaintyRule(HALF))
    assert raised.value.k == 1


@pytest.mark.parametrize("n", [500, 1000, pytest.param(2000, marks=pytest.mark.slow),
                               pytest.param(4000, marks=pytest.mark.slow)])
def test_construction_chain_is_clean(n) -> None:
    """
    Claim: the lower-bound run at eps=1/2 satisfies every checked inequality with positive slack.
    """
    rule = UncertaintyRule(HALF)
    game, plan = build_full(n, HALF)
    trace = run_schedule(game.copy(), rule, plan.phase1 + plan.phase2)
    report = verify_upper_bound_chain(trace, game, rule, raise_on_violation=False)
    assert report["bound_status"] == "checked"
    assert report["violations"] == []
    assert report["slack"] > 0
