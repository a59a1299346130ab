"""
Utility modules for the engine.

This package contains helpers for scene loading, validation, artifacts,
random streams and logging.
"""
