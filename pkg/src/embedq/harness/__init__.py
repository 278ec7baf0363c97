"""Command-line experiments, configuration and output writers."""
