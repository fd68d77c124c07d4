"""Observability for annealing runs and R0 iterations."""
