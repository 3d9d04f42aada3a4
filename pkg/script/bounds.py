#!/usr/bin/env python3
"""
bounds command-line entry point
Sweeps, figure data, SDP certification runs and single-state reports
"""

import sys
from pathlib import Path

# Add parent directory to path to import locinfo
sys.path.insert(0, str(Path(__file__).parent.parent))

from locinfo.cli import main


if __name__ == "__main__":
    sys.exit(main())
