"""Exception types shared across modules, and the resource guard setting."""

import os

DEFAULT_GUARD_BITS = 24


class GuardExceeded(RuntimeError):
    """An exhaustive sweep would exceed the configured size guard."""


class FormatError(ValueError):
    """A JSON document does not match the expected schema."""


def guard_bits(override: int | None = None) -> int:
    if override is not None:
        return override
    env = os.environ.get("MODLAB_GUARD_BITS")
    if env:
        return int(env)
    return DEFAULT_GUARD_BITS


def check_guard(log2_work: float, what: str, override: int | None = None) -> None:
    limit = guard_bits(override)
    if log2_work > limit:
        raise GuardExceeded(
            f"{what}: 2^{log2_work:.1f} exceeds guard 2^{limit}; "
            "raise --guard-bits or use sampled mode"
        )
