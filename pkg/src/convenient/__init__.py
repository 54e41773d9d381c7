"""Desk-scale differential linear logic over convenient vector spaces."""

__version__ = "0.1.0"
