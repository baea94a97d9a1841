"""dsagent: a case-based reasoning agent for data science tasks."""

__version__ = "0.1.0"
