"""Miscellaneous utility functions and the exception types used across yoloscenes."""
from collections.abc import Iterable
import numpy as np


class ShapeError(ValueError):
    """A tensor does not have the length or configuration required by an operation."""


class DomainError(ValueError):
    """A value lies outside the domain of an operation (e.g., a negative box width)."""


class SingularityError(DomainError):
    """A derivative is singular at the given value (e.g., the square root at zero)."""


class EncodingConflictError(ValueError):
    """Two ground-truth objects are assigned to the same grid cell."""


class BehindCameraError(ValueError):
    """An object is at or behind the camera plane and cannot be projected."""


class OutOfFrameError(DomainError):
    """An object projects entirely outside the image."""


def split_dict(d: dict, s: Iterable) -> tuple[dict, dict]:
    """Split a dict into two dicts based on a list of keys.

    Parameters
    ----------
    d :
        Dict to be split.
    s :
        Dict keys to use for splitting `d`.

    Returns
    -------
    :
        The `d` dict split into two dicts based on the keys in `s`. The first tuple item
        contains the items that do not have keys in `s`.
    """
    s = set(s)
    contains = {k: v for k, v in d.items() if k in s}
    ncontains = {k: v for k, v in d.items() if k not in s}
    return ncontains, contains


def present_and_in(p: dict, names: list, valid_values: list):
    """Check that parameters are present and contain values in `valid_values`.

    Parameters
    ----------
    p :
        Parameters.
    names :
        Parameter names to validate.
    valid_values :
        List of valid parameter values.

    Raises
    ------
    ValueError
        If any of the parameters are invalid.
    KeyError
        If any required parameters are not present.
    """
    for name in names:
        if name not in p:
            raise KeyError(f"A '{name}' parameter is required.")
        if not all(x in valid_values for x in np.atleast_1d(p[name]).tolist()):
            raise ValueError(f"Parameter '{name}' contains 1 or more invalid values.")


def present_and_positive(p: dict, names: list, allow_zero: bool = False):
    """Check that parameters are present and have a positive value.

    Parameters
    ----------
    p :
        Parameters.
    names :
        Parameter names to validate.
    allow_zero :
        If `True`, zero is accepted as well.

    Raises
    ------
    ValueError
        If any of the parameters are invalid.
    KeyError
        If any required parameters are not present.
    """
    for name in names:
        if name not in p:
            raise KeyError(f"A '{name}' parameter is required.")
        if p[name] is None:
            raise ValueError(f"Parameter '{name}' must not be None.")
        v = np.atleast_1d(np.asarray(p[name], dtype=float))
        if np.any(np.isnan(v)) or (np.min(v) < 0 if allow_zero else np.min(v) <= 0):
            bound = 'greater than or equal to zero' if allow_zero else 'greater than zero'
            raise ValueError(f"Parameter '{name}' must be {bound}.")


def present_and_unit(p: dict, names: list):
    """Check that parameters are present and lie in the closed interval [0, 1].

    Parameters
    ----------
    p :
        Parameters.
    names :
        Parameter names to validate.

    Raises
    ------
    ValueError
        If any of the parameters are outside [0, 1].
    KeyError
        If any required parameters are not present.
    """
    for name in names:
        if name not in p:
            raise KeyError(f"A '{name}' parameter is required.")
        v = np.atleast_1d(np.asarray(p[name], dtype=float))
        if np.any(np.isnan(v)) or np.min(v) < 0.0 or np.max(v) > 1.0:
            raise ValueError(f"Parameter '{name}' must be in the range [0, 1].")
