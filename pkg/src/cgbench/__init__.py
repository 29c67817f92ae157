"""cgbench: computation-graph benchmark toolkit."""

__version__ = "0.1.0"
