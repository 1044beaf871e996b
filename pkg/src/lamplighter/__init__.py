"""Lamplighter word-metric and Hamiltonicity toolkit."""
