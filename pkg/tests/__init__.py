"""Test package for Boundary Loop DH."""
