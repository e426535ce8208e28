"""Offline feature extraction: pool transformer hidden states over a
graph's node texts and write the embedding file the training toolkit
consumes."""

__version__ = "0.1.0"
