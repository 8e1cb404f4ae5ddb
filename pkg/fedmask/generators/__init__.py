"""
Seeded synthetic data generators.
"""

from .signal_gen import Dataset, GeneratorConfig, PartyProfile, SignalGenerator, generate, party_profile

__all__ = ["Dataset", "GeneratorConfig", "PartyProfile", "SignalGenerator", "generate", "party_profile"]
