"""On-off power allocation in single-hop networks with one-packet buffers."""

__version__ = "0.1.0"
