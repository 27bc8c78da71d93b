"""Stationary stochastic signals with a target autocorrelation and bounded values."""
