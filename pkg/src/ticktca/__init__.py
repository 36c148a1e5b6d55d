"""Transaction cost analysis and tick-size event-study toolkit."""

__version__ = "0.1.0"
