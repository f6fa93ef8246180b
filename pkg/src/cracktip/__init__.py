"""Numerical toolkit for the crack-tip / crack-front family of stationary
Mumford-Shah solutions: closed forms, Euler-Lagrange residual checks,
competitor energy ledgers, phase-field solves, and post-processing."""

__version__ = "0.1.0"
