"""protorel: relation and event extraction toolkit for wet lab protocols."""

__version__ = "0.1.0"
