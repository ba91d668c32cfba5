"""Entry point: ``python main.py <command> --config config/default.json``."""
from src.cli import main

if __name__ == "__main__":
    main()
