"""Benchmark harness and command-line driver."""
