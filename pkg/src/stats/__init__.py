"""
Stats Package - Numerical core

Aggregation, regression families, adaptive MCMC, synoptic summaries,
the mixed-effects model and the simulator.
"""
