"""Pseudospectral simulation and verification suite for reaction-diffusion
systems coupled to a scalar conservation law near a long-wave Hopf
bifurcation, together with the derived Ginzburg-Landau / conservation-law
amplitude system and quantitative delta-scaling experiments."""

__version__ = "0.1.0"
