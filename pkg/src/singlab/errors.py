"""Exception taxonomy shared by the library, the service, and the CLI.

Two families matter for exit-code / HTTP mapping:

* ``ConfigError`` (and plain ``ValueError``) — bad arguments, violated
  preconditions, degenerate inputs, malformed config.  CLI exit code 2,
  service error code ``"config"``.
* ``BudgetError`` — an exact enumeration or subset search would exceed its
  configured budget.  CLI exit code 3, service error code ``"budget"``.
"""

from __future__ import annotations


class SinglabError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(SinglabError, ValueError):
    """Invalid argument, config field, or violated precondition."""


class DegenerateInputError(ConfigError):
    """An input is degenerate in a way the operation cannot use (e.g. every
    distribution is a point mass, so no anti-concentration is available)."""


class InsufficientDataError(ConfigError):
    """Too few usable data points for the requested statistical fit."""


class BudgetError(SinglabError, RuntimeError):
    """An exhaustive enumeration would exceed the configured budget."""


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
