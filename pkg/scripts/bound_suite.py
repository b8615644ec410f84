"""Every exact bound and identity check over the shipped matrix; exits 3 on any violation.

    python3 scripts/bound_suite.py --out out/suite [--fault]
"""

import sys

from effbayes.cli import main

if __name__ == "__main__":
    sys.exit(main(["suite", *sys.argv[1:]]))
