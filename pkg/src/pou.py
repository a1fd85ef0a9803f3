"""Command-line runner: generate, simulate, oracle, sweep, verify and bound."""

import logging
import os
import sys
import time

from consensus_game import read_instance, write_instance
from constructions import build_bipartite_gadget, build_double_gadget, build_full, predicted_final_bad_edges, write_plan
from dynamics import (UncertaintyRule, bfs_oracle_max_bad_edges, check_containment, first_increase_threshold_check,
                      greedy_adversary, read_schedule, read_trace_schedule, replay_schedule, run_schedule,
                      write_schedule, write_trace_csv)
from graphgen import GraphGen
from move_game import extract_Ek_trace, sum_alpha_bound, verify_upper_bound_chain, write_report
from param_parser import parameter_parser
from sweep import describe_fit, fit_sweep, row_from_trace, run_sweep, within_factor, write_rows
from utils.errors import VIOLATION_EXIT_CODE, ConsensusError, InvalidInstance, NoIncrease
from utils.utils import format_fraction, tab_printer, write_json

logger = logging.getLogger(__name__)

INSTANCE_FILE = "instance.json"
PLAN_FILE = "plan.json"
SCHEDULE_FILE = "schedule.txt"
PHASE_FILES = {"phase1": "phase1.txt", "phase2": "phase2.txt"}


def _ensure_parent(path):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _rule(args):
    return UncertaintyRule.from_args(args.eps, args.rule)


def _instance_path(args):
    return args.instance or os.path.join(args.input, INSTANCE_FILE)


def cmd_generate(args):
    """
    Write an instance with its schedules to args.out.
    :param args: Object with the arguments.
    """
    os.makedirs(args.out, exist_ok=True)
    rule = _rule(args)
    if args.construction == "full":
        game, plan = build_full(args.n, rule.eps)
        write_plan(plan, os.path.join(args.out, PLAN_FILE))
        write_schedule(plan.phase1, os.path.join(args.out, PHASE_FILES["phase1"]))
        write_schedule(plan.phase2, os.path.join(args.out, PHASE_FILES["phase2"]))
        schedule = plan.phase1 + plan.phase2
        logger.info("plan: k=%d, c=%s, %d boost layers, predicted final bad edges %d",
                    plan.k, format_fraction(plan.c), len(plan.boost_sizes), predicted_final_bad_edges(plan))
    elif args.construction == "double":
        game, schedule = build_double_gadget(args.m, rule.eps, rule)
    elif args.construction == "bipartite":
        game, schedule = build_bipartite_gadget(args.m, rule.eps, rule)
    else:
        game = GraphGen(args.seed).gen_game(args.family, args.n, args.p, args.coloring)
        schedule = greedy_adversary(game.copy(), rule).schedule
    write_instance(game, os.path.join(args.out, INSTANCE_FILE))
    write_schedule(schedule, os.path.join(args.out, SCHEDULE_FILE))
    logger.info("wrote %r with a %d-switch schedule to %s", game, len(schedule), args.out)
    return 0


def _load_schedule(args):
    if args.schedule:
        return [v for path in args.schedule for v in read_schedule(path)]
    if args.phase == "all":
        return read_schedule(os.path.join(args.input, SCHEDULE_FILE))
    path = os.path.join(args.input, PHASE_FILES[args.phase])
    if not os.path.exists(path):
        raise InvalidInstance("{} not found; phases exist only for the full construction".format(path))
    return read_schedule(path)


def cmd_simulate(args):
    """
    Play a schedule under the rule, write the trace and a one-row summary.
    :param args: Object with the arguments.
    """
    rule = _rule(args)
    game = read_instance(_instance_path(args))
    schedule = _load_schedule(args)
    started = time.perf_counter()
    trace = run_schedule(game, rule, schedule, strict=args.strict, progress=args.verbose)
    ms = (time.perf_counter() - started) * 1000
    row = row_from_trace(game.n, rule, trace, ms)
    _ensure_parent(args.trace)
    write_trace_csv(trace, args.trace)
    _ensure_parent(args.csv)
    write_rows([row], args.csv)
    logger.info("%d switches: %d -> %d bad edges, pou %s", trace.moves, trace.initial_bad, trace.final_bad,
                "undefined" if row.pou is None else format_fraction(row.pou))
    return 0


def cmd_oracle(args):
    """
    Exhaustive maximum next to the greedy adversary.
    :param args: Object with the arguments.
    """
    rule = _rule(args)
    game = read_instance(_instance_path(args))
    result = bfs_oracle_max_bad_edges(game, rule, args.state_limit)
    greedy = greedy_adversary(game.copy(), rule, args.step_limit)
    report = {"initial_bad_edges": game.bad_edges,
              "max_bad_edges": result.max_bad_edges,
              "witness": result.witness,
              "states": result.states,
              "greedy_bad_edges": greedy.final_bad,
              "greedy_moves": greedy.moves,
              "violations": [] if greedy.final_bad <= result.max_bad_edges else ["greedy_exceeds_oracle"]}
    _ensure_parent(args.report)
    write_json(report, args.report)
    logger.info("oracle max %d bad edges over %d states, greedy %d", result.max_bad_edges, result.states,
                greedy.final_bad)
    return VIOLATION_EXIT_CODE if report["violations"] else 0


def cmd_sweep(args):
    """
    Run every (n, eps) pair, write the csv and log the power-law fits.
    :param args: Object with the arguments.
    """
    rows = run_sweep(args.n, args.eps, args.rule, args.workers, args.phase)
    _ensure_parent(args.csv)
    write_rows(rows, args.csv)
    for row in rows:
        if row.ok and args.phase == "all" and not within_factor(row):
            logger.warning("n=%d, eps=%s: final %d is not within a factor 4 of predicted %d",
                           row.n, format_fraction(row.eps), row.final_bad, row.predicted_final)
    fits = fit_sweep(rows)
    for eps, fit in fits["n"].items():
        logger.info("pou vs n at eps=%s: %s", format_fraction(eps), describe_fit(fit))
    for n, fit in fits["eps"].items():
        logger.info("pou vs eps at n=%d: %s", n, describe_fit(fit))
    return 0


def cmd_verify(args):
    """
    Replay a recorded trace and audit it.
    :param args: Object with the arguments.
    """
    rule = _rule(args)
    game = read_instance(_instance_path(args))
    schedule = read_trace_schedule(args.trace)
    replay = game.copy()
    invalid = []
    for step, v in enumerate(schedule):
        if not rule.allows(replay.player_cost(v), replay.good_degree(v)):
            invalid.append(step)
        replay.flip(v)
    trace = replay_schedule(game, schedule)
    events = check_containment(trace, game, full_scan=args.full_scan)
    extraction = extract_Ek_trace(trace, game, rule, keep_sequences=False)
    report = verify_upper_bound_chain(trace, game, rule, extraction, raise_on_violation=False)
    try:
        threshold = first_increase_threshold_check(trace, rule)
    except NoIncrease:
        threshold = None
    report["containment_checkpoints"] = events
    report["first_increase_threshold"] = threshold
    report["invalid_moves"] = invalid
    if invalid:
        report["violations"].append("invalid_moves")
    if threshold is False:
        report["violations"].append("first_increase_threshold")
    _ensure_parent(args.report)
    write_report(report, args.report)
    if report["violations"]:
        logger.error("trace violates: %s", ", ".join(report["violations"]))
        return VIOLATION_EXIT_CODE
    logger.info("trace verified: m=%d, sum alpha=%d, bound=%s", report["m"], report["sum_alpha"], report["bound"])
    return 0


def cmd_bound(args):
    value = sum_alpha_bound(args.m, args.eps, args.sum_e0, args.sum_e0_sq)
    print(value)
    return 0


COMMANDS = {"generate": cmd_generate,
            "simulate": cmd_simulate,
            "oracle": cmd_oracle,
            "sweep": cmd_sweep,
            "verify": cmd_verify,
            "bound": cmd_bound}


def main(argv=None):
    """
    Parse the arguments, run the subcommand and map errors to exit codes.
    :return code: 0 on success, 2 on a violation, 3 on an infeasible instance.
    """
    args = parameter_parser(argv)
    logging.basicConfig(format="%(asctime)s : %(levelname)s : %(message)s",
                        level=logging.DEBUG if args.verbose else logging.INFO)
    tab_printer(args)
    try:
        return COMMANDS[args.command](args)
    except ConsensusError as error:
        logger.error("%s", error)
        return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
