"""Guideline-driven hazard assessment of construction-site images with
vision-language models, and a metric suite for scoring the assessments."""

__version__ = "0.1.0"
