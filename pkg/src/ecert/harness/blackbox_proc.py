"""Black box behind a child process speaking newline-delimited JSON.

Requests go to the child's stdin as one line each,
``{"id": <int>, "xs": [[...], ...]}``, and the child answers on stdout
with ``{"id": <same int>, "ys": [...]}``. Both sides flush after every
line. The wrapper restarts a misbehaving child once per request and
replays the request; a second failure raises.
"""

from __future__ import annotations

import json
import os
import queue
import shlex
import subprocess
import threading
from typing import Optional, Sequence, Union

import numpy as np

from ..core import BlackBox

__all__ = ["BlackBoxProtocolError", "SubprocessBlackBox", "DEFAULT_TIMEOUT_SECS"]

DEFAULT_TIMEOUT_SECS = 30.0
_TIMEOUT_ENV = "ECERT_TIMEOUT_SECS"


class BlackBoxProtocolError(RuntimeError):
    """The child process broke the request/response protocol."""


def _pump(stream, q: "queue.Queue[Optional[str]]") -> None:
    try:
        for line in stream:
            q.put(line)
    finally:
        q.put(None)


class SubprocessBlackBox(BlackBox):
    """Runs a model as a child process and queries it over pipes.

    ``argv`` is the command, given as a list or a shell-style string.
    The response timeout defaults to 30 seconds, overridable by the
    ECERT_TIMEOUT_SECS environment variable or the ``timeout``
    argument. Safe to share between threads: requests are serialized.
    """

    def __init__(
        self,
        argv: Union[str, Sequence[str]],
        timeout: Optional[float] = None,
        cwd: Optional[str] = None,
        env: Optional[dict] = None,
    ) -> None:
        super().__init__()
        self.argv = shlex.split(argv) if isinstance(argv, str) else list(argv)
        if not self.argv:
            raise ValueError("argv must not be empty")
        if timeout is None:
            timeout = float(os.environ.get(_TIMEOUT_ENV, DEFAULT_TIMEOUT_SECS))
        if not (timeout > 0.0):
            raise ValueError("timeout must be positive")
        self.timeout = timeout
        self._cwd = cwd
        self._env = env
        self._proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._io_lock = threading.Lock()
        self._next_id = 0

    # -- process management -------------------------------------------------

    def _ensure(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        self._proc = subprocess.Popen(
            self.argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
            cwd=self._cwd,
            env=self._env,
        )
        self._lines = queue.Queue()
        threading.Thread(
            target=_pump, args=(self._proc.stdout, self._lines), daemon=True
        ).start()

    def _shutdown(self) -> None:
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            if proc.stdin is not None:
                proc.stdin.close()
        except OSError:
            pass
        proc.terminate()
        try:
            proc.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def close(self) -> None:
        with self._io_lock:
            self._shutdown()

    def __enter__(self) -> "SubprocessBlackBox":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __del__(self) -> None:
        try:
            self._shutdown()
        except Exception:
            pass

    # -- protocol -----------------------------------------------------------

    def _request_once(self, line: str, req_id: int, n: int) -> np.ndarray:
        self._ensure()
        assert self._proc is not None and self._proc.stdin is not None
        self._proc.stdin.write(line)
        self._proc.stdin.flush()
        raw = self._lines.get(timeout=self.timeout)
        if raw is None:
            raise BlackBoxProtocolError("model process closed its stdout")
        resp = json.loads(raw)
        if not isinstance(resp, dict) or resp.get("id") != req_id:
            raise BlackBoxProtocolError(f"response id mismatch (expected {req_id})")
        ys = resp.get("ys")
        if not isinstance(ys, list) or len(ys) != n:
            raise BlackBoxProtocolError(f"expected {n} values, got {ys!r}")
        arr = np.asarray(ys, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise BlackBoxProtocolError("model returned non-finite values")
        return arr

    def _roundtrip(self, xs: np.ndarray) -> np.ndarray:
        with self._io_lock:
            req_id = self._next_id
            self._next_id += 1
            line = json.dumps({"id": req_id, "xs": xs.tolist()}) + "\n"
            try:
                return self._request_once(line, req_id, xs.shape[0])
            except (
                BlackBoxProtocolError,
                BrokenPipeError,
                OSError,
                ValueError,
                queue.Empty,
                json.JSONDecodeError,
            ):
                # one transparent restart with the same request
                self._shutdown()
            try:
                return self._request_once(line, req_id, xs.shape[0])
            except queue.Empty as e:
                self._shutdown()
                raise BlackBoxProtocolError(
                    f"model process timed out twice ({self.timeout}s)"
                ) from e
            except (BrokenPipeError, OSError, ValueError, json.JSONDecodeError) as e:
                self._shutdown()
                raise BlackBoxProtocolError("model process failed after restart") from e

    # -- BlackBox hooks -----------------------------------------------------

    def _eval_one(self, x: np.ndarray) -> float:
        return float(self._roundtrip(x[None, :])[0])

    def _eval_many(self, xs: np.ndarray) -> np.ndarray:
        return self._roundtrip(xs)
