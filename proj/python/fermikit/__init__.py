"""Finite-dimensional CAR / fermionic detailed balance toolkit."""

try:
    from fermikit._core import *  # noqa: F401,F403
    from fermikit._core import __version__  # noqa: F401
except ImportError:  # build-tree layout: the extension sits next to the package
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
