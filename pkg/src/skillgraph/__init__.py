"""Graph machine learning toolkit for classifying therapeutic utterances
against a counseling-skill taxonomy."""

__version__ = "0.1.0"
