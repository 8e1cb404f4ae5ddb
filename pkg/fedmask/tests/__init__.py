"""
Unit tests for the fedmask models, protocols, federation and tooling.
"""
