"""rmtfig command line: render one figure from a JSON spec.

Exit codes: 0 success, 2 spec/schema violation, 3 empty data.
"""

from __future__ import annotations

import argparse
import sys

from .render import EmptyDataError, FigureSpec, FigureSpecError, render

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_EMPTY = 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rmtfig", description="Render figures from rmtlab CSV outputs."
    )
    parser.add_argument("--spec", required=True, help="FigureSpec JSON file")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code not in (0, None) else EXIT_OK
    try:
        spec = FigureSpec.from_json(args.spec)
        info = render(spec)
    except FigureSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except EmptyDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    print(info["output"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
