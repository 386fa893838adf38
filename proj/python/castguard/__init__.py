"""Casting-defect classifier benchmark and deep-ensemble uncertainty toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import CLASSIFIERS, Error, DataError, TrainingError, ValidationError  # noqa: F401

__version__ = "0.1.0"
