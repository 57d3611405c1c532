from multiprocessing import Process, Queue
import queue
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import cloudpickle as pickle
from loguru import logger

from app.core.errors import AndersonCorrError
from .execution import child_target, decode_result


def chunked(items: Sequence[Any], chunks: int) -> List[List[Any]]:
    """Split items into at most `chunks` contiguous, order-preserving pieces."""
    items = list(items)
    if not items:
        return []
    chunks = max(1, min(chunks, len(items)))
    size, extra = divmod(len(items), chunks)
    out, start = [], 0
    for k in range(chunks):
        stop = start + size + (1 if k < extra else 0)
        out.append(items[start:stop])
        start = stop
    return out


class TaskRunner:
    """Runs a picklable function over payloads in worker processes.

    threads <= 1 runs inline. Results come back in payload order when
    `ordered`, otherwise in arrival order.
    """
    def __init__(self, threads: int = 1, timeout: Optional[float] = None):
        self.threads = max(1, int(threads or 1))
        self.timeout = timeout

    def map(self, func: Callable[[Any], Any], payloads: Sequence[Any], ordered: bool = True) -> List[Any]:
        payloads = list(payloads)
        if self.threads <= 1 or len(payloads) <= 1:
            return [func(p) for p in payloads]
        return self._map_processes(func, payloads, ordered)

    def _map_processes(self, func, payloads, ordered):
        q = Queue()
        pending = list(enumerate(payloads))
        active: Dict[int, Tuple[Process, float]] = {}
        results: Dict[int, Any] = {}
        arrival: List[int] = []
        logger.debug(f"Dispatching {len(payloads)} tasks over {self.threads} workers")

        def accept(message: dict):
            decoded = decode_result(message)
            index = decoded["index"]
            proc, _ = active.pop(index, (None, 0.0))
            if proc is not None:
                proc.join(timeout=1)
            if decoded["status"] != "finished":
                raise AndersonCorrError(f"Task {index} failed: {decoded['error']}")
            results[index] = decoded["result"]
            arrival.append(index)

        try:
            while pending or active:
                while pending and len(active) < self.threads:
                    index, payload = pending.pop(0)
                    p = Process(target=child_target, args=(pickle.dumps((func, payload)), index, q))
                    p.start()
                    active[index] = (p, time.time())
                try:
                    accept(q.get(timeout=0.1))
                except queue.Empty:
                    for index, (p, started) in list(active.items()):
                        if not p.is_alive():
                            try:
                                accept(q.get(timeout=0.5))
                            except queue.Empty:
                                raise AndersonCorrError(
                                    f"Task {index} crashed/exited unexpectedly with code {p.exitcode}.")
                            break
                        if self.timeout and (time.time() - started) > self.timeout:
                            raise TimeoutError(f"Task {index} timed out after {self.timeout}s")
        finally:
            for p, _ in active.values():
                p.terminate()
                p.join(timeout=1)
                if p.is_alive():
                    p.kill()
                    p.join()

        order = range(len(payloads)) if ordered else arrival
        return [results[i] for i in order]
