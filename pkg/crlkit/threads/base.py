"""Stoppable threads and the registry the signal handler reaches them by."""
import abc
import logging
import threading
from typing import List

import wrapt


LOG = logging.getLogger("CRLKIT")


class CRLThread(threading.Thread, metaclass=abc.ABCMeta):
    """Calls loop() until it returns False or the thread is asked to stop.

    A stop request is only seen between two loop() calls, so the unit of
    work in flight always finishes.
    """

    def __init__(self, name):
        super().__init__(name=name)
        self.stopped = threading.Event()
        self.loops = 0
        CRLThreadList().add(self)

    def stop(self):
        self.stopped.set()

    @abc.abstractmethod
    def loop(self) -> bool:
        """One unit of work. Return False when there is nothing left."""

    def run(self):
        LOG.debug(f"{self.name} started")
        try:
            while not self.stopped.is_set() and self.loop():
                self.loops += 1
        finally:
            CRLThreadList().remove(self)
            LOG.debug(f"{self.name} done after {self.loops} loops")


class CRLThreadList:
    """Process wide list of the live crlkit threads."""

    _instance = None
    lock = threading.Lock()
    threads: List[CRLThread]

    def __new__(cls, *args, **kwargs):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance.threads = []
        return cls._instance

    @wrapt.synchronized(lock)
    def add(self, thread_obj):
        self.threads.append(thread_obj)

    @wrapt.synchronized(lock)
    def remove(self, thread_obj):
        if thread_obj in self.threads:
            self.threads.remove(thread_obj)

    @wrapt.synchronized(lock)
    def stop_all(self) -> int:
        """Ask every live thread to stop after its current unit of work."""
        for th in self.threads:
            th.stop()
        if self.threads:
            LOG.warning(f"Stopping {len(self.threads)} threads: {[th.name for th in self.threads]}")
        return len(self.threads)

    @wrapt.synchronized(lock)
    def __contains__(self, thread_obj):
        return thread_obj in self.threads

    @wrapt.synchronized(lock)
    def __len__(self):
        return len(self.threads)
