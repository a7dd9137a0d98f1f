"""Atomic writers for JSON summaries and CSV tables."""

import json
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Union

import numpy as np
import pandas as pd

from ..core.errors import AudioIOError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@contextmanager
def atomic_path(path: PathLike, suffix: str = "") -> Iterator[Path]:
    """Yield a temporary path next to ``path``; rename it into place on success.

    On any exception the temporary file is removed and ``path`` is left
    untouched.
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=suffix or target.suffix, dir=target.parent)
        os.close(fd)
    except OSError as exc:
        raise AudioIOError(f"Cannot create output next to {target}: {exc}") from exc
    tmp = Path(tmp_name)
    try:
        yield tmp
        os.replace(tmp, target)
    except OSError as exc:
        raise AudioIOError(f"Cannot write {target}: {exc}") from exc
    finally:
        if tmp.exists():
            tmp.unlink()


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps_report(report: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indentation."""
    return json.dumps(report, indent=2, sort_keys=True, default=_to_builtin, allow_nan=True) + "\n"


def write_json(path: PathLike, report: Any) -> Path:
    with atomic_path(path) as tmp:
        tmp.write_text(dumps_report(report), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return Path(path)


def write_csv(path: PathLike, table: pd.DataFrame) -> Path:
    with atomic_path(path) as tmp:
        table.to_csv(tmp, index=False, float_format="%.10g")
    logger.info(f"Wrote {path}")
    return Path(path)
