"""Data budgeting for tabular classification: estimate the saturating
performance of a task and the amount of data needed to reach it from a
small pilot sample."""

__version__ = "0.1.0"
