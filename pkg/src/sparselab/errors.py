"""Exception hierarchy shared across the library.

Exit-code mapping used by the CLI and service lives here so that every
entry point agrees on it: configuration problems exit 2, blown
enumeration budgets exit 3, internal consistency violations exit 4.
"""


class SparselabError(Exception):
    """Base class for library errors."""

    exit_code = 1


class ConfigError(SparselabError):
    """Invalid or inconsistent run configuration."""

    exit_code = 2


class BudgetExceededError(SparselabError):
    """An exhaustive enumeration would exceed the allowed budget."""

    exit_code = 3


class InternalInconsistencyError(SparselabError):
    """Two routes that must agree disagreed.  Always a bug or a broken
    mathematical assumption, never a user error."""

    exit_code = 4


class RankDeficiencyError(SparselabError):
    """A matrix that must have full column rank does not."""

    exit_code = 1


class InfeasibleProblemError(SparselabError):
    """The equality constraints of an optimization problem admit no
    solution at the requested tolerance."""

    exit_code = 1


class SolverBudgetError(SparselabError):
    """An iterative solver hit its iteration limit before reaching the
    requested tolerance."""

    exit_code = 3


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the process exit code the CLI should use."""
    if isinstance(exc, SparselabError):
        return exc.exit_code
    return 1
