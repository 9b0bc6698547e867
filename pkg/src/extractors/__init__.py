# __init__.py
"""Initialize src/extractors module."""
