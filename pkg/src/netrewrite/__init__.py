"""Net class-rewriting with block abstractions and dimensional confluence checks."""

__version__ = "0.1.0"
