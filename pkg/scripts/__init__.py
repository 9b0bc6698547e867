# __init__.py
"""Initialize scripts module."""
