"""Twisted Bethe equations, singular solutions and exact-diagonalization cross-checks."""
