"""Finite-blocklength analysis and link simulation for short-packet
transmission with differential or pilot-assisted modulation over
time-varying Rayleigh fading and multi-connectivity combining."""

__version__ = "0.1.0"
