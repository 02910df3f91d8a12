"""Shared error types raised across the workbench modules."""

from __future__ import annotations

from typing import Any


class PedforgeError(Exception):
    """Base class for domain errors.

    ``detail`` carries structured context the API layer can surface to clients.
    """

    def __init__(self, message: str, detail: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}


class NotFound(PedforgeError):
    """A referenced project, candidate, artifact, or trace ref does not exist."""


class GateNotSatisfied(PedforgeError):
    """A workflow phase gate or operation precondition does not hold."""


class StorageFailure(PedforgeError):
    """The project file could not be written durably."""


class ProjectLocked(PedforgeError):
    """Another process holds the exclusive lock on the project file."""
