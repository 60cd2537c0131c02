#!/usr/bin/env python3
"""
finslerkit command line.

Usage:
    python finslerkit.py <command> --config <path> [--out <dir>] [--seed <int>]

Commands: validate-norm, smooth, check-hilbert, quotient, distances
"""
import sys
import logging

from core.settings import LOG_LEVEL
from cli import run

if __name__ == "__main__":
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    sys.exit(run())
