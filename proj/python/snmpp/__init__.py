"""Structured neural marked point process toolkit.

Simulate multi-class event streams, train the product-form neural
influence-kernel intensity model by stratified Monte Carlo maximum
likelihood, inspect the recovered interaction structure, and predict the
next event. The heavy lifting lives in the compiled extension `snmpp._core`.
"""

try:
    from snmpp._core import *  # noqa: F401,F403
    from snmpp._core import __doc__ as _core_doc  # noqa: F401
except ImportError:  # in-tree test runs put the extension on sys.path directly
    from _core import *  # type: ignore # noqa: F401,F403

__version__ = "0.1.0"
