"""Model-agnostic, resampling-based summaries for tabular learners."""

__version__ = "0.1.0"
