"""Bundled data files (the shipped default enhancement pattern)."""
