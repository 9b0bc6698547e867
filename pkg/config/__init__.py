# __init__.py
"""Initialize config module."""
