"""Musically informed evaluation metrics for piano transcription."""
__version__ = "0.1.0"
