"""Core module for configuration and error types"""
from .config import RunConfig, get_config, load_config, parse_config
from .errors import ReebflowError

__all__ = ['RunConfig', 'get_config', 'load_config', 'parse_config', 'ReebflowError']
