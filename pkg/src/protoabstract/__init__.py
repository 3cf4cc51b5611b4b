"""Protocol-specification abstraction: from tables and sentences to a formal
dependency table of (identifier, predicate, identifier) records."""

__version__ = "0.1.0"
