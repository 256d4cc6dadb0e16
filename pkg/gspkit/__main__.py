#!/usr/bin/env python3
import sys

from gspkit import EX_PARSE
from gspkit import main


def run() -> None:
    sys.exit(main(EX_PARSE.parse_args()))


if __name__ == "__main__":
    run()
