"""Compute backend selection.

The compiled extension (`_core`) is preferred when importable; otherwise
the pure-numpy reference (`_ref`) is used.  Set TAILAB_BACKEND=python or
TAILAB_BACKEND=compiled to force a choice (forcing "compiled" raises if
the extension is missing).

Both backends consume caller-provided uniforms and mirror each other's
arithmetic, so switching backends does not change results.
"""

from __future__ import annotations

import os

from . import _ref

_FORCED = os.environ.get("TAILAB_BACKEND", "").strip().lower()

if _FORCED == "python":
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        _impl = _ref
        BACKEND = "python"

recursion_linear = _impl.recursion_linear
recursion_linear_cap = _impl.recursion_linear_cap
recursion_custom = _impl.recursion_custom
wealth_panel = _impl.wealth_panel
birth_death_ages = _impl.birth_death_ages
coleman_crra = _impl.coleman_crra

# The callable-parameterized policy update only exists in the reference
# backend; non-crra utility families always go through it.
coleman_generic = _ref.coleman_generic
