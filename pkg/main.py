#!/usr/bin/env python3
"""
ncdomain - Command-Line Entry Point
"""

import sys
from pathlib import Path

# Add current directory to Python path
sys.path.insert(0, str(Path(__file__).parent))

from core.cli import cli_main


def main():
    """Main entry point"""
    try:
        cli_main()
    except KeyboardInterrupt:
        print("👋 Interrupted", file=sys.stderr)
        sys.exit(130)


if __name__ == '__main__':
    main()
