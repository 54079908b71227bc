"""Async job registry for long computations (embedding re-runs).

One job per work key: submitting an already-queued/running key returns the
existing job id (request coalescing). States move strictly
queued -> running -> done | failed.
"""
from __future__ import annotations

import hashlib
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable


@dataclass
class Job:
    id: str
    key: str
    state: str = "queued"             # queued | running | done | failed
    progress: float = 0.0
    error: str | None = None
    result_ref: dict | None = None


class JobRegistry:
    def __init__(self, max_workers: int = 1):
        self._jobs: dict[str, Job] = {}
        self._by_key: dict[str, str] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=max_workers)

    def submit(self, key: str, work: Callable[[Callable[[float], None]], Any],
               result_ref: dict) -> Job:
        """Run `work(progress_cb)` on the pool unless the key is already active."""
        with self._lock:
            existing_id = self._by_key.get(key)
            if existing_id is not None:
                existing = self._jobs[existing_id]
                if existing.state in ("queued", "running"):
                    return existing
            # deterministic ids: identical work keys poll the same job URL
            job = Job(id=hashlib.sha256(key.encode()).hexdigest()[:12], key=key,
                      result_ref=result_ref)
            self._jobs[job.id] = job
            self._by_key[key] = job.id

        def run():
            with self._lock:
                job.state = "running"
            try:
                def on_progress(fraction: float):
                    job.progress = max(0.0, min(1.0, fraction))

                work(on_progress)
            except Exception as exc:  # failures are job results, not crashes
                with self._lock:
                    job.state = "failed"
                    job.error = f"{type(exc).__name__}: {exc}"
            else:
                with self._lock:
                    job.state = "done"
                    job.progress = 1.0

        self._pool.submit(run)
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def wait_all(self, timeout: float | None = None) -> None:
        """Testing hook: block until the pool drains."""
        self._pool.shutdown(wait=True)
        self._pool = ThreadPoolExecutor(max_workers=1)
