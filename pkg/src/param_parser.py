"""Getting params from the command line."""

import argparse

from dynamics import DEFAULT_STATE_LIMIT, Variant
from utils.utils import parse_eps

RULES = [variant.value for variant in Variant]


def _add_rule(parser):
    parser.add_argument("--eps",
                        type=parse_eps,
                        default=parse_eps("1/2"),
                        help="Uncertainty parameter as p/q. Default is 1/2.")

    parser.add_argument("--rule",
                        choices=RULES,
                        default="two-sided",
                        help="How eps bounds the ratio of good to bad neighbors. Default is two-sided.")


def _add_instance(parser):
    parser.add_argument("--input",
                        nargs="?",
                        default="./output/",
                        help="Folder written by generate. Default is ./output/.")

    parser.add_argument("--instance",
                        nargs="?",
                        default=None,
                        help="Instance json; overrides the one in --input.")


def parameter_parser(argv=None):
    """
    A method to parse up command line parameters.
    One subcommand per task; the defaults reproduce the eps=1/2 lower-bound instance.
    """
    parser = argparse.ArgumentParser(description="Simulate uncertain best-response dynamics in consensus games.")

    parser.add_argument("--verbose",
                        action="store_true",
                        help="Log per-step detail. Default is off.")

    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="Build an instance and its schedules.")
    generate.add_argument("--construction",
                          choices=["full", "double", "bipartite", "random"],
                          default="full",
                          help="Instance family. Default is full.")
    generate.add_argument("--n",
                          type=int,
                          default=2000,
                          help="Vertex budget (full) or vertex count (random). Default is 2000.")
    generate.add_argument("--m",
                          type=int,
                          default=8,
                          help="Gadget size. Default is 8.")
    generate.add_argument("--p",
                          type=float,
                          default=0.3,
                          help="Edge probability of random instances. Default is 0.3.")
    generate.add_argument("--family",
                          choices=["gnp", "bipartite"],
                          default="gnp",
                          help="Random graph family. Default is gnp.")
    generate.add_argument("--coloring",
                          choices=["random", "planted"],
                          default="random",
                          help="Initial coloring of random instances. Default is random.")
    generate.add_argument("--seed",
                          type=int,
                          default=1337,
                          help="Random seed. Default is 1337.")
    generate.add_argument("--out",
                          nargs="?",
                          default="./output/",
                          help="Output folder. Default is ./output/.")
    _add_rule(generate)

    simulate = commands.add_parser("simulate", help="Play a schedule and write the trace.")
    _add_instance(simulate)
    _add_rule(simulate)
    simulate.add_argument("--schedule",
                          nargs="*",
                          default=None,
                          help="Schedule files played in order; overrides --phase.")
    simulate.add_argument("--phase",
                          choices=["phase1", "phase2", "all"],
                          default="all",
                          help="Which generated schedule to play. Default is all.")
    simulate.add_argument("--strict",
                          action="store_true",
                          help="Recount cached costs after the run. Default is off.")
    simulate.add_argument("--trace",
                          nargs="?",
                          default="./output/trace.csv",
                          help="Trace csv. Default is ./output/trace.csv.")
    simulate.add_argument("--csv",
                          nargs="?",
                          default="./output/summary.csv",
                          help="Summary row csv. Default is ./output/summary.csv.")

    oracle = commands.add_parser("oracle", help="Exact maximum by exhaustive search, compared with greedy.")
    _add_instance(oracle)
    _add_rule(oracle)
    oracle.add_argument("--state-limit",
                        type=int,
                        default=DEFAULT_STATE_LIMIT,
                        help="Maximum number of explored states. Default is {}.".format(DEFAULT_STATE_LIMIT))
    oracle.add_argument("--step-limit",
                        type=int,
                        default=10 ** 6,
                        help="Maximum number of greedy switches. Default is 1000000.")
    oracle.add_argument("--report",
                        nargs="?",
                        default="./output/oracle.json",
                        help="Report json. Default is ./output/oracle.json.")

    sweep = commands.add_parser("sweep", help="Price of uncertainty over (n, eps) pairs with power-law fits.")
    sweep.add_argument("--n",
                       type=int,
                       nargs="+",
                       default=[500, 1000, 2000, 4000],
                       help="Vertex budgets. Default is 500 1000 2000 4000.")
    sweep.add_argument("--eps",
                       type=parse_eps,
                       nargs="+",
                       default=[parse_eps("1/2")],
                       help="Uncertainty parameters as p/q. Default is 1/2.")
    sweep.add_argument("--rule",
                       choices=RULES,
                       default="two-sided",
                       help="How eps bounds the ratio of good to bad neighbors. Default is two-sided.")
    sweep.add_argument("--phase",
                       choices=["phase1", "phase2", "all"],
                       default="all",
                       help="Which schedule to play. Default is all.")
    sweep.add_argument("--workers",
                       type=int,
                       default=4,
                       help="Number of workers. Default is 4.")
    sweep.add_argument("--csv",
                       nargs="?",
                       default="./output/sweep.csv",
                       help="Sweep csv. Default is ./output/sweep.csv.")

    verify = commands.add_parser("verify", help="Audit a trace: containment, first increase and the upper-bound chain.")
    _add_instance(verify)
    _add_rule(verify)
    verify.add_argument("--trace",
                        nargs="?",
                        default="./output/trace.csv",
                        help="Trace csv to audit. Default is ./output/trace.csv.")
    verify.add_argument("--full-scan",
                        action="store_true",
                        help="Scan every edge at every first response. Default is off.")
    verify.add_argument("--report",
                        nargs="?",
                        default="./output/verify.json",
                        help="Report json. Default is ./output/verify.json.")

    bound = commands.add_parser("bound", help="Print the bound on the sum of alphas.")
    bound.add_argument("--m",
                       type=int,
                       default=1,
                       help="Number of first responses. Default is 1.")
    bound.add_argument("--eps",
                       type=parse_eps,
                       default=parse_eps("1/4"),
                       help="Relative slack as p/q. Default is 1/4.")
    bound.add_argument("--sum-e0",
                       type=int,
                       default=0,
                       help="Sum of the starting sequence. Default is 0.")
    bound.add_argument("--sum-e0-sq",
                       type=int,
                       default=0,
                       help="Sum of squares of the starting sequence. Default is 0.")

    return parser.parse_args(argv)
