"""Content-addressed document store.

Stands in for a networked content-addressed filesystem: a document is
canonicalized, its SHA-256 digest becomes the URI ("cid:" + 64 hex chars),
and the canonical bytes land under ``<root>/<first 2 hex>/<digest>``.
Storage is append-only; putting identical content twice converges on one
record.
"""

from __future__ import annotations

import threading
from pathlib import Path

from .canonical import canonicalize, loads_canonical, sha256_hex
from .errors import RegistryError, err

URI_PREFIX = "cid:"


class DocStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def put(self, document) -> str:
        data = canonicalize(document)
        digest = sha256_hex(data)
        path = self._path(digest)
        with self._lock:
            if not path.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(data)
                tmp.replace(path)
        return URI_PREFIX + digest

    def get(self, uri: str):
        data = self._read(uri)
        return loads_canonical(data)

    def get_bytes(self, uri: str) -> bytes:
        return self._read(uri)

    def has(self, uri: str) -> bool:
        try:
            return self._path(self._digest(uri)).exists()
        except RegistryError:
            return False

    def _read(self, uri: str) -> bytes:
        path = self._path(self._digest(uri))
        if not path.exists():
            raise err("NotFound", f"no document at {uri}")
        return path.read_bytes()

    def _digest(self, uri: str) -> str:
        if not uri.startswith(URI_PREFIX):
            raise err("NotFound", f"not a content address: {uri!r}")
        digest = uri[len(URI_PREFIX):]
        if len(digest) != 64 or any(c not in "0123456789abcdef" for c in digest):
            raise err("NotFound", f"malformed content address: {uri!r}")
        return digest

    def _path(self, digest: str) -> Path:
        return self.root / digest[:2] / digest
