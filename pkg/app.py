"""
Main entry point for the Boundary Loop DH verification engine.

Run with: uv run python app.py verify --config config.json
"""

import sys

from project.cli import main as cli_main


def main() -> None:
    """Run the command-line driver and exit with its code."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
