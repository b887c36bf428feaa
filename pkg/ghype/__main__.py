"""Entry point for `python -m ghype`."""

import sys

from ghype.cli import main

if __name__ == "__main__":
    sys.exit(main())
