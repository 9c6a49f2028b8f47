"""Exact harmonic analysis for random walks on discrete semigroups."""
