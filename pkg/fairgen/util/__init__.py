"""Shared helpers: RNG stream derivation and the checkpoint binary codec."""
