"""Data processing utilities."""

import argparse
import json
from fractions import Fraction

from texttable import Texttable


def tab_printer(args):
    """
    Function to print the parameters in a nice tabular format.
    :param args: Parsed command line parameters.
    """
    args = vars(args)
    keys = sorted(k for k in args.keys() if k != "func")
    t = Texttable()
    t.add_rows([["Parameter", "Value"]])
    t.add_rows([[k.replace("_", " ").capitalize(), str(args[k])] for k in keys])
    print(t.draw())


def parse_fraction(text):
    """
    Parse an exact rational from "p/q", an integer or a finite decimal string.
    :param text: String form of the rational.
    :return value: Fraction.
    """
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError("not a rational number: {!r}".format(text))
    return value


def parse_eps(text):
    """argparse type for the uncertainty parameter; must be positive."""
    value = parse_fraction(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("eps must be positive, got {}".format(text))
    return value


def format_fraction(value):
    """Inverse of parse_fraction: "p/q", or "p" for integers."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return "{}/{}".format(value.numerator, value.denominator)


def write_json(data, path):
    """Deterministic JSON dump (sorted keys, trailing newline)."""
    with open(path, "w") as outfile:
        json.dump(data, outfile, sort_keys=True)
        outfile.write("\n")


def read_json(path):
    with open(path) as infile:
        return json.load(infile)
