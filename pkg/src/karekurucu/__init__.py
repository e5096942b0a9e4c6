"""Turkish educational crossword toolkit."""

__version__ = "0.1.0"
