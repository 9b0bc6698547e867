# __init__.py
"""Initialize src module."""
