"""Spectral numerics for Eisenstein series, Heegner points and critical-line zeros."""
