from multiprocessing import Process, Queue
import queue
import time
from typing import Any, Callable, Optional
import cloudpickle as pickle


def child_target(blob: bytes, index: int, q: Queue):
    status = "finished"
    error_val = ""
    result = None

    try:
        func, payload = pickle.loads(blob)
        result = func(payload)
    except Exception as e:
        status = "error"
        error_val = f"{type(e).__name__}: {e}"

    try:
        serialized_result = pickle.dumps(result)
    except Exception as e:
        serialized_result = pickle.dumps(None)
        status = "error"
        error_val = f"Failed to serialize task result: {str(e)}"

    q.put({
        "index": index,
        "status": status,
        "error": error_val,
        "serialized_result": serialized_result
    })


def decode_result(message: dict) -> dict:
    result = None
    if message.get("serialized_result") is not None:
        try:
            result = pickle.loads(message["serialized_result"])
        except Exception as e:
            message["status"] = "error"
            message["error"] = f"Failed to deserialize task result on host: {str(e)}"
    return {
        "index": message.get("index", 0),
        "status": message["status"],
        "error": message.get("error", ""),
        "result": result
    }


def run_task_in_process(func: Callable[[Any], Any], payload: Any, timeout: Optional[float] = None) -> dict:
    q = Queue()
    p = Process(target=child_target, args=(pickle.dumps((func, payload)), 0, q))
    p.start()

    start_time = time.time()
    message = None

    while True:
        try:
            message = q.get(timeout=0.1)
            break
        except queue.Empty:
            if not p.is_alive():
                try:
                    message = q.get(timeout=0.5)
                except queue.Empty:
                    return {
                        "index": 0,
                        "status": "error",
                        "error": f"Task process crashed/exited unexpectedly with code {p.exitcode}.",
                        "result": None
                    }
                break

            if timeout and (time.time() - start_time) > timeout:
                p.terminate()
                p.join(timeout=1)
                if p.is_alive():
                    p.kill()
                    p.join()
                raise TimeoutError(f"Task timed out after {timeout}s")

    p.join(timeout=1)
    if p.is_alive():
        p.kill()
        p.join()

    return decode_result(message)
