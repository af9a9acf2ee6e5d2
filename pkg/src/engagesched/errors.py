"""Shared exception type for all pipeline modules."""


class EngageError(Exception):
    """Raised for any domain-level failure (bad input, undefined result).

    The CLI maps this to exit code 1 with the message on stderr; usage
    errors are left to argparse (exit code 2).
    """
