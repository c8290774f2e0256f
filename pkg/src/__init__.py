"""
climdelta - Main Package

Compiles annual block statistics from gridded climate-model output, fits
non-stationary GEV and Gaussian regressions by adaptive MCMC, and summarizes
return-value and mean changes across scenarios, models and ensembles.
"""

__version__ = "1.0.0"
