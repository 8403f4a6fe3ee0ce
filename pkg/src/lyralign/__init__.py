"""lyralign: hierarchical lyrics-to-audio alignment toolkit."""

__version__ = "0.1.0"
