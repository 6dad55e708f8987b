"""Download and cache primary maps from the public EMDB archive.

This is the only networked code path and it only runs when called.
"""

from __future__ import annotations

import gzip
import os
import re
import shutil
import tempfile
import threading
import urllib.error
import urllib.request
from pathlib import Path

DEFAULT_URL_TEMPLATE = (
    "https://ftp.ebi.ac.uk/pub/databases/emdb/structures/EMD-{id}/map/emd_{id}.map.gz"
)
URL_ENV = "CORRINFO_EMDB_URL"
CACHE_ENV = "CORRINFO_CACHE"

_ID_RE = re.compile(r"^(?:EMD[-_])?(\d{4,6})$", re.IGNORECASE)

_locks: dict[str, threading.Lock] = {}
_locks_guard = threading.Lock()


class FetchError(RuntimeError):
    """Download failed or arrived incomplete."""


def normalise_id(entry_id) -> str:
    m = _ID_RE.match(str(entry_id).strip())
    if not m:
        raise ValueError(f"malformed EMDB id {entry_id!r}; expected digits such as 21452")
    return m.group(1)


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "corrinfo" / "emdb"


def _lock_for(entry: str) -> threading.Lock:
    with _locks_guard:
        return _locks.setdefault(entry, threading.Lock())


def _download(url: str, dest: Path, timeout: float) -> None:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            expected = resp.headers.get("Content-Length") if hasattr(resp, "headers") else None
            with open(dest, "wb") as out:
                shutil.copyfileobj(resp, out)
    except urllib.error.HTTPError as exc:
        raise FetchError(f"HTTP {exc.code} for {url}") from exc
    except (urllib.error.URLError, OSError) as exc:
        raise FetchError(f"download of {url} failed: {exc}") from exc
    got = dest.stat().st_size
    if expected is not None and int(expected) != got:
        raise FetchError(f"length mismatch for {url}: {got} of {expected} bytes")


def fetch_emdb(
    entry_id,
    cache_dir: str | os.PathLike | None = None,
    url_template: str | None = None,
    timeout: float = 60.0,
) -> Path:
    """Return a local path to ``emd_<id>.map``, downloading it on first use.

    The id is validated before anything touches the network.  A cached map
    is returned as is.  Concurrent calls for one id share a lock so the file
    is fetched at most once.
    """
    entry = normalise_id(entry_id)
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    target = cache / f"emd_{entry}.map"
    with _lock_for(entry):
        if target.is_file() and target.stat().st_size > 0:
            return target
        cache.mkdir(parents=True, exist_ok=True)
        template = url_template or os.environ.get(URL_ENV) or DEFAULT_URL_TEMPLATE
        url = template.format(id=entry)
        fd, tmp_gz = tempfile.mkstemp(dir=cache, suffix=".map.gz.part")
        os.close(fd)
        tmp_gz = Path(tmp_gz)
        tmp_map = tmp_gz.with_suffix(".map")
        try:
            _download(url, tmp_gz, timeout)
            try:
                with gzip.open(tmp_gz, "rb") as src, open(tmp_map, "wb") as dst:
                    shutil.copyfileobj(src, dst)
            except (OSError, EOFError) as exc:
                raise FetchError(f"corrupt archive from {url}: {exc}") from exc
            os.replace(tmp_map, target)
        finally:
            tmp_gz.unlink(missing_ok=True)
            tmp_map.unlink(missing_ok=True)
    return target
