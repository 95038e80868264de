#!/usr/bin/env python3
"""
🚀 AEDT SIMULATOR ENTRY POINT

    python main.py run --nodes 40 --seed 7
    python main.py sweep --node-counts 20,40,60 --protocols aedt,static-tree --jobs 4

Output directory, log level and log file come from .env (see config.py).
"""

import logging
import sys

import config
from aedt.cli import main


def setup_logging() -> None:
    handlers = [logging.StreamHandler(sys.stderr)]
    if config.LOG_FILE:
        handlers.append(logging.FileHandler(config.LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
        format=config.LOG_FORMAT,
        handlers=handlers,
    )


if __name__ == "__main__":
    setup_logging()
    sys.exit(main(default_out=config.OUTPUT_DIR))
