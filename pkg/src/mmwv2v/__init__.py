"""Discrete-event simulator of 802.11ad beacon-interval MAC for 60 GHz V2V links."""

__version__ = "0.1.0"
