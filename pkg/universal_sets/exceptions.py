"""
Exception types shared by every subpackage.

Bad arguments are reported with the builtin ``ValueError``. The classes here
cover the two remaining failure modes: an internal cross-check that did not
hold, and a resource guard that stopped a computation before it finished.
"""
from __future__ import annotations


class IntegrityError(RuntimeError):
    """An internal consistency check failed.

    Raised when two independent computations of the same quantity disagree,
    for example the valuations at the two conjugate primes above p not adding
    up to v_p of the norm, or a constructed set failing its certification.
    """


class BudgetExceededError(RuntimeError):
    """A configured resource guard was exceeded.

    Parameters
    ----------
    guard
        Name of the guard that tripped (``"budget"``, ``"residue_guard"`` ...)
    count
        The count reached when the guard tripped
    message
        Optional extra text appended to the generated message

    Attributes
    ----------
    guard : str
        Name of the guard that tripped
    count : int
        The count reached when the guard tripped
    """

    def __init__(self, guard: str, count: int, message: str = ""):
        self.guard = guard
        self.count = count
        text = f"{guard} exceeded after {count}"
        if message:
            text = f"{text}: {message}"
        super().__init__(text)


class FactorBoundError(BudgetExceededError):
    """A cofactor left over after trial division is composite.

    Parameters
    ----------
    cofactor
        The unfactored rational cofactor
    bound
        The trial division bound that was used

    Attributes
    ----------
    cofactor : int
        The unfactored rational cofactor
    """

    def __init__(self, cofactor: int, bound: int):
        self.cofactor = cofactor
        super().__init__("factor_bound", bound,
                         f"composite cofactor with {cofactor.bit_length()} bits "
                         f"has no prime factor below {bound}")


class InputFileError(ValueError):
    """A set, trace or batch file could not be read.

    The message names the JSON line and column or the index of the offending
    element.
    """
