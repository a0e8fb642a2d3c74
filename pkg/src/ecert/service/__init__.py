"""HTTP service exposing certification, bounds and the experiment
harness. The CLI talks to this app in process by default."""

from .app import create_app

__all__ = ["create_app"]
