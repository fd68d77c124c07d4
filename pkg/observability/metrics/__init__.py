"""Prometheus metrics collectors and exporter."""
