"""Synthetic biased loan-application datasets, fairness mitigation and auditing."""

__version__ = "0.1.0"
