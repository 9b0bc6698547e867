# __init__.py
"""Initialize tests module."""
