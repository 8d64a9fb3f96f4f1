"""Desk-scale laboratory for quantum promise problems."""
