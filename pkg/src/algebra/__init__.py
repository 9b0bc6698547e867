# __init__.py
"""Finite loops, their inverse properties, constructions and Hopf quasigroups."""
