# main.py
"""
Command-line entry point

Equivalent to the ``climdelta`` console script:

    python main.py fit --manifest series/manifest.json --out chains/
"""

import sys

from cli.commands import main

if __name__ == "__main__":
    sys.exit(main())
