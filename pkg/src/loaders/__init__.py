# __init__.py
"""Initialize src/loaders module."""
