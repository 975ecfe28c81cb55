"""Numerical laboratory for translating solitons of 1-homogeneous curvature flows."""
