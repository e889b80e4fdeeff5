#Entry point for the command line: python main.py solve --instance ... (see README.md for every subcommand)
import sys
from src.Cli.main import main as cli_main

def main() -> None:
    """Main entry point for the allocation solvers CLI."""
    sys.exit(cli_main())

if __name__ == "__main__":
    main()
