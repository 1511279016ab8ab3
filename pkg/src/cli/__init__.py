"""Command-line frontend: `python -m src.cli <command>` or `python main.py <command>`."""
