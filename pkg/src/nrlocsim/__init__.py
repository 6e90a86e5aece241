"""Link-level simulator for 5G NR positioning signals."""

__version__ = "0.1.0"
