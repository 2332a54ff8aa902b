"""Simulation and verification engine for Network General Lotto games."""
