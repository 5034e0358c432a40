"""Dreamloom: a self-hostable studio for metaphorical visual dream stories."""

__version__ = "0.1.0"
