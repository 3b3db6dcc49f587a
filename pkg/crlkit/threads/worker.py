"""Fan independent jobs out to worker threads.

A job is a key plus a callable. Every job owns its environment, agent and
random streams, so workers share nothing but the queues. Results come back
sorted by key, which keeps merged output independent of scheduling.
"""
from dataclasses import dataclass
import logging
import queue
from typing import Any, Callable, Hashable, List, Optional

from crlkit import exception
from crlkit.threads.base import CRLThread


LOG = logging.getLogger("CRLKIT")


@dataclass
class Job:
    key: Hashable
    fn: Callable[[], Any]


@dataclass
class JobResult:
    key: Hashable
    value: Any = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class JobWorkerThread(CRLThread):

    def __init__(self, name, jobs: queue.Queue, results: queue.Queue):
        super().__init__(name)
        self.jobs = jobs
        self.results = results

    def loop(self):
        try:
            job = self.jobs.get_nowait()
        except queue.Empty:
            return False
        LOG.debug(f"{self.name} running job {job.key}")
        try:
            self.results.put(JobResult(key=job.key, value=job.fn()))
        except Exception as ex:
            LOG.error(f"Job {job.key} failed: {ex}")
            self.results.put(JobResult(key=job.key, error=ex))
        finally:
            self.jobs.task_done()
        return True


class JobRunner:
    """Run jobs on ``workers`` threads, or inline when workers is 1."""

    def __init__(self, workers: int = 1, name: str = "job"):
        self.workers = max(1, int(workers))
        self.name = name

    def run(self, jobs: List[Job]) -> List[JobResult]:
        keys = [job.key for job in jobs]
        if len(set(keys)) != len(keys):
            raise ValueError(f"Job keys must be unique: {keys}")
        results: queue.Queue = queue.Queue()
        if self.workers == 1 or len(jobs) <= 1:
            for job in jobs:
                try:
                    results.put(JobResult(key=job.key, value=job.fn()))
                except Exception as ex:
                    LOG.error(f"Job {job.key} failed: {ex}")
                    results.put(JobResult(key=job.key, error=ex))
        else:
            pending: queue.Queue = queue.Queue()
            for job in jobs:
                pending.put(job)
            threads = [
                JobWorkerThread(f"{self.name}-{i}", pending, results)
                for i in range(min(self.workers, len(jobs)))
            ]
            for th in threads:
                th.start()
            for th in threads:
                th.join()
        out = []
        while not results.empty():
            out.append(results.get())
        done = {r.key for r in out}
        for key in keys:
            if key not in done:
                out.append(JobResult(
                    key=key, error=exception.CRLKitException(f"Job {key} was stopped before it ran"),
                ))
        return sorted(out, key=lambda r: r.key)
