"""Executable scorer adapters for the ``amrfact-scorer/1`` protocol.

The package ships one console script, ``amrfact-adapter``, which loads a
backend and then answers line-delimited JSON requests on stdin. The
``echo`` backend needs nothing beyond the standard library; the ``hf``
backend wraps pretrained checkpoints and needs the ``models`` extra.
"""
from .backends import BackendError, EchoBackend, TransformersBackend
from .protocol import BRIDGE_TASKS, PROTOCOL_NAME, SCORE_TASKS, serve

__version__ = "0.1.0"

__all__ = [
    "BRIDGE_TASKS",
    "BackendError",
    "EchoBackend",
    "PROTOCOL_NAME",
    "SCORE_TASKS",
    "TransformersBackend",
    "serve",
    "__version__",
]
