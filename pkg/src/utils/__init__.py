"""Shared parsing helpers"""
from .validators import parse_bool, parse_float, parse_sweep, parse_vector, sweep_values

__all__ = ['parse_bool', 'parse_float', 'parse_sweep', 'parse_vector', 'sweep_values']
