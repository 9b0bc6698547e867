# __init__.py
"""Initialize src/models module."""
