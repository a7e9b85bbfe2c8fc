"""Write-once shared slots with blocking reads and a deadlock watchdog."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ..errors import DeadlockDetected, DoubleWrite, NnefError


class RunAborted(NnefError):
    """Another worker failed; this one stops waiting."""


@dataclass
class Slot:
    writer: str
    readers: frozenset[str]
    value: np.ndarray | None = None

    @property
    def written(self) -> bool:
        return self.value is not None


@dataclass
class SharedStore:
    """Slots keyed by variablesync name.

    The store also counts live and blocked workers: when every live worker
    is blocked on a read, nobody can ever publish again, so all waiting
    readers are woken with DeadlockDetected.
    """

    slots: dict[str, Slot] = field(default_factory=dict)
    workers: int = 0

    def __post_init__(self) -> None:
        self._cond = threading.Condition()
        self._blocked: dict[str, str] = {}
        self._alive = self.workers
        self._deadlock: str | None = None
        self._aborted = False

    def declare(self, name: str, writer: str, readers) -> None:
        self.slots[name] = Slot(writer, frozenset(readers))

    def write(self, name: str, value: np.ndarray, writer: str) -> None:
        with self._cond:
            slot = self.slots.get(name)
            if slot is None:
                slot = self.slots[name] = Slot(writer, frozenset())
            if slot.written:
                raise DoubleWrite(f"{writer}: variablesync {name} was already written by {slot.writer}")
            slot.value = value
            slot.writer = writer
            # Readers of this slot are runnable from now on, even before they wake.
            for reader in [r for r, waited in self._blocked.items() if waited == name]:
                del self._blocked[reader]
            self._cond.notify_all()

    def read(self, name: str, reader: str) -> np.ndarray:
        with self._cond:
            slot = self.slots.get(name)
            while slot is None or not slot.written:
                self._check()
                self._blocked[reader] = name
                self._detect()
                if self._deadlock is not None:
                    # this reader completed the deadlock; nobody is left to wake it
                    del self._blocked[reader]
                    self._check()
                try:
                    self._cond.wait()
                finally:
                    self._blocked.pop(reader, None)
                slot = self.slots.get(name)
            return slot.value

    def leave(self, worker: str, failed: bool = False) -> None:
        """A worker finished (or died); re-check for deadlock."""
        with self._cond:
            self._alive -= 1
            if failed:
                self._aborted = True
                self._cond.notify_all()
            else:
                self._detect()

    def abort(self) -> None:
        with self._cond:
            self._aborted = True
            self._cond.notify_all()

    def _detect(self) -> None:
        if self._blocked and len(self._blocked) >= self._alive and self._deadlock is None:
            waits = ", ".join(f"{w} on {s}" for w, s in sorted(self._blocked.items()))
            self._deadlock = f"all live workers blocked: {waits}"
            self._cond.notify_all()

    def _check(self) -> None:
        if self._deadlock is not None:
            raise DeadlockDetected(self._deadlock)
        if self._aborted:
            raise RunAborted("run aborted by a failing worker")

    @property
    def deadlock(self) -> str | None:
        return self._deadlock
