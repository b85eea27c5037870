"""Toolkit for auditing political advertising corpora.

Ingests ad dumps, trains text classifiers that separate political from
non-political ads, calibrates decision thresholds to a target false-positive
rate, and audits undeclared corpora against a declared-ad archive, including
disclaimer-compliance checks.
"""

__version__ = "0.1.0"
