"""Negative-weight adversary bounds for functions and relations, with
executable checks of the relational composition theorem."""

__version__ = "0.1.0"
