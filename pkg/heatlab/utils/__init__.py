"""Argument parsing and sanitization helpers."""
