"""On-disk cache for expensive values.

One JSON file per key under content-derived subdirectories.  Writes go to a
temporary file and are renamed into place; a per-key file lock makes the
compute step single-flight across threads and processes.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from pathlib import Path
from typing import Callable

import mpmath
from filelock import FileLock

FORMAT_VERSION = 1


class CacheError(OSError):
    pass


def canonical_key(op: str, params: dict, precision) -> str:
    """Operation name, sorted parameters and precision as one canonical string."""
    return json.dumps({"op": op, "params": params, "precision": precision}, sort_keys=True, default=str)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# exact round-trip of mpmath numbers through their binary representation
def encode_mp(x) -> list:
    x = mpmath.mpmathify(x)
    if isinstance(x, mpmath.mpc):
        return ["c", _enc_real(x.real), _enc_real(x.imag)]
    return ["r", _enc_real(x)]


def _enc_real(x) -> list:
    sign, man, exp, bc = x._mpf_
    return [sign, hex(man), int(exp), bc]


def decode_mp(obj):
    """Inverse of encode_mp; no rounding to the working precision."""
    if obj[0] == "c":
        return mpmath.mp.make_mpc((_dec_real(obj[1]), _dec_real(obj[2])))
    return mpmath.mp.make_mpf(_dec_real(obj[1]))


def _dec_real(v):
    sign, man, exp, bc = v
    return (sign, mpmath.libmp.MPZ(int(man, 16)), exp, bc)


class Cache:
    def __init__(self, root: str | os.PathLike, version: int = FORMAT_VERSION):
        self.root = Path(root)
        self.version = version
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CacheError(f"cannot create cache directory {self.root}: {exc}") from exc

    def path_for(self, key: str) -> Path:
        h = _digest(key)
        return self.root / h[:2] / h[2:4] / f"{h}.json"

    def get(self, key: str) -> str | None:
        """Stored value, or None on a miss, a version mismatch or a corrupted entry."""
        path = self.path_for(key)
        try:
            raw = path.read_text()
        except FileNotFoundError:
            return None
        except OSError as exc:
            raise CacheError(f"cannot read {path}: {exc}") from exc
        try:
            entry = json.loads(raw)
        except json.JSONDecodeError:
            return None
        if entry.get("version") != self.version or entry.get("key") != key:
            return None
        value = entry.get("value")
        if not isinstance(value, str) or _digest(value) != entry.get("checksum"):
            return None
        return value

    def put(self, key: str, value: str) -> Path:
        path = self.path_for(key)
        entry = {
            "version": self.version,
            "key": key,
            "checksum": _digest(value),
            "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "value": value,
        }
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                json.dump(entry, fh, sort_keys=True)
            os.replace(tmp, path)
        except OSError as exc:
            raise CacheError(f"cannot write {path}: {exc}") from exc
        return path

    def _thread_lock(self, key: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    def get_or_compute(self, key: str, thunk: Callable[[], str]) -> str:
        hit = self.get(key)
        if hit is not None:
            return hit
        path = self.path_for(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._thread_lock(key), FileLock(str(path) + ".lock"):
            hit = self.get(key)
            if hit is not None:
                return hit
            value = thunk()
            self.put(key, value)
            return value


def cached(cache: Cache | None, op: str, params: dict, precision, thunk: Callable[[], str]) -> str:
    """get_or_compute when a cache is configured, plain computation otherwise."""
    if cache is None:
        return thunk()
    return cache.get_or_compute(canonical_key(op, params, precision), thunk)
